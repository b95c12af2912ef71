//! Scenario files, built-in experiments and report rendering behind the
//! `auction-lab` binary.

pub mod experiments;
pub mod report;
pub mod scenario;

pub use experiments::{
    check_hr, plan_scenario, ratio_scenario, run_experiment, simulate_scenario, ExperimentOptions, HrPair, PlanReport,
    BUILTIN_EXPERIMENTS,
};
pub use report::{emit_report, parse_json_lines, ExperimentReport, Format, ReportRow, Verdict, CSV_COLUMNS};
pub use scenario::{parse_scenario, parse_scenario_with_seed, MechanismChoice, ScenarioConfig};
