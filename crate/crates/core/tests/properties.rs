use auction_lab::cli::{emit_report, parse_json_lines, parse_scenario, ExperimentReport, Format, ReportRow, Verdict};
use auction_lab::mechanisms::{run_myerson, run_second_price, Reserve};
use auction_lab::stream::stream;
use auction_lab::{DistributionSpec, Error, Mixture, ValueDistribution};
use proptest::prelude::*;

fn continuous_spec() -> impl Strategy<Value = DistributionSpec> {
    prop_oneof![
        (0.0..5.0f64, 0.1..5.0f64).prop_map(|(a, w)| DistributionSpec::uniform(a, a + w).unwrap()),
        (0.1..5.0f64).prop_map(|l| DistributionSpec::exponential(l).unwrap()),
        (1.1..5.0f64).prop_map(|a| DistributionSpec::power_law(a).unwrap()),
        Just(DistributionSpec::equal_revenue()),
        (-1.0..3.0f64, 0.1..2.0f64).prop_map(|(m, s)| DistributionSpec::truncated_normal(m, s).unwrap()),
    ]
}

/// Kolmogorov-Smirnov statistic of `xs` against `cdf`.
fn ks_statistic(mut xs: Vec<f64>, cdf: impl Fn(f64) -> f64) -> f64 {
    xs.sort_by(f64::total_cmp);
    let n = xs.len() as f64;
    xs.iter()
        .enumerate()
        .map(|(i, &x)| {
            let f = cdf(x);
            (f - i as f64 / n).abs().max((f - (i + 1) as f64 / n).abs())
        })
        .fold(0.0, f64::max)
}

#[test]
fn sampling_matches_cdf_by_ks() {
    // 1.95 / sqrt(n) is the 0.1% critical value.
    let n = 20_000;
    let crit = 1.95 / (n as f64).sqrt();
    let specs = [
        DistributionSpec::uniform(1.0, 3.0).unwrap(),
        DistributionSpec::exponential(0.7).unwrap(),
        DistributionSpec::power_law(2.5).unwrap(),
        DistributionSpec::equal_revenue(),
        DistributionSpec::truncated_normal(0.5, 1.5).unwrap(),
    ];
    for (j, d) in specs.iter().enumerate() {
        let mut rng = stream(99, j as u64);
        let xs = (0..n).map(|_| d.sample(&mut rng)).collect();
        let ks = ks_statistic(xs, |x| d.cdf(x));
        assert!(ks < crit, "{d:?}: KS {ks} >= {crit}");
    }
    let mix = Mixture::new([(0.3, specs[0]), (0.7, specs[1])]).unwrap();
    let mut rng = stream(99, 100);
    let xs = (0..n).map(|_| mix.sample(&mut rng).1).collect();
    let ks = ks_statistic(xs, |x| mix.cdf(x));
    assert!(ks < crit, "mixture: KS {ks}");
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 64, failure_persistence: None, ..ProptestConfig::default() })]

    #[test]
    fn quantile_inverts_cdf(d in continuous_spec(), q in 0.001..0.999f64) {
        let x = d.quantile(q).unwrap();
        prop_assert!((d.cdf(x) - q).abs() < 1e-6, "{:?} q={} x={} F={}", d, q, x, d.cdf(x));
    }

    #[test]
    fn cdf_is_monotone(d in continuous_spec(), a in 0.0..10.0f64, b in 0.0..10.0f64) {
        let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
        prop_assert!(d.cdf(lo) <= d.cdf(hi));
        prop_assert!((0.0..=1.0).contains(&d.cdf(hi)));
    }

    #[test]
    fn second_price_is_individually_rational(values in prop::collection::vec(0.0..10.0f64, 1..8), r in 0.0..5.0f64) {
        let out = run_second_price(&values, Reserve::Anonymous(r)).unwrap();
        match out.winner {
            Some(w) => {
                let max = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
                prop_assert_eq!(values[w], max);
                prop_assert!(out.revenue <= values[w] + 1e-12);
                prop_assert!(out.revenue >= r);
            }
            None => prop_assert_eq!(out.revenue, 0.0),
        }
    }

    #[test]
    fn adding_a_bidder_never_lowers_second_price_revenue(values in prop::collection::vec(0.0..10.0f64, 1..8), extra in 0.0..10.0f64) {
        let base = run_second_price(&values, Reserve::None).unwrap().revenue;
        let mut more = values.clone();
        more.push(extra);
        prop_assert!(run_second_price(&more, Reserve::None).unwrap().revenue >= base);
    }

    #[test]
    fn myerson_payment_is_between_reserve_and_value(values in prop::collection::vec(0.0..1.0f64, 2..5)) {
        let u = DistributionSpec::uniform(0.0, 1.0).unwrap();
        let priors = vec![u; values.len()];
        let out = run_myerson(&values, &priors).unwrap();
        if let Some(w) = out.winner {
            prop_assert!(out.revenue <= values[w] + 1e-9);
            prop_assert!(out.revenue >= 0.5 - 1e-9);
            let second = values.iter().enumerate().filter(|(i, _)| *i != w).map(|(_, v)| *v).fold(0.0, f64::max);
            prop_assert!((out.revenue - second.max(0.5)).abs() < 1e-8);
        } else {
            prop_assert!(values.iter().all(|&v| v <= 0.5 + 1e-12));
        }
    }

    #[test]
    fn json_lines_round_trip(means in prop::collection::vec(-1e6..1e6f64, 0..10), n in 0u64..1_000_000) {
        let mut report = ExperimentReport::new("prop");
        for (i, m) in means.iter().enumerate() {
            report.rows.push(ReportRow {
                scenario_id: "prop".into(),
                mechanism: format!("m,\"{i}\""),
                mean: *m,
                std_err: m.abs() / 10.0,
                n_samples: n,
                method: "mc".into(),
                bound_tested: "none".into(),
                verdict: if i % 2 == 0 { Verdict::Pass } else { Verdict::NotApplicable },
            });
        }
        let bytes = emit_report(&report, Format::JsonLines).unwrap();
        prop_assert_eq!(parse_json_lines(std::str::from_utf8(&bytes).unwrap()).unwrap(), report.rows.clone());
        let csv = emit_report(&report, Format::Csv).unwrap();
        let mut reader = csv::Reader::from_reader(csv.as_slice());
        prop_assert_eq!(reader.records().count(), means.len());
    }

    #[test]
    fn off_simplex_rows_are_rejected(w in 0.0..1.0f64, bump in 0.001..0.5f64) {
        let text = format!(
            r#"{{"version": 1, "market": {{"components": [{{"family": "uniform", "a": 0, "b": 1}}, {{"family": "exponential", "lambda": 1}}],
               "weights": [[{}, {}]], "iid": true, "n": 2}}, "estimator": {{"seed": 1}}}}"#,
            w, 1.0 - w + bump
        );
        match parse_scenario(&text) {
            Err(Error::Schema { path, .. }) => prop_assert_eq!(path, "market.weights[0]"),
            other => prop_assert!(false, "{:?}", other),
        }
    }
}
