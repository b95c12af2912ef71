//! Stream-partitioned sampling loop with compensated accumulation.
//!
//! Sample `j` of a run always lands in the same stream at the same position,
//! and per-stream sums are merged in stream order, so results depend only on
//! `(seed, n_samples, n_streams)`.

#[cfg(feature = "parallel")]
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::stream::{stream, Stream};

#[derive(Clone, Copy, Debug, Default, PartialEq)]
struct Kahan {
    sum: f64,
    c: f64,
}

impl Kahan {
    fn add(&mut self, x: f64) {
        let y = x - self.c;
        let t = self.sum + y;
        self.c = (t - self.sum) - y;
        self.sum = t;
    }
}

/// Count, sum and sum of squares of the non-NaN values pushed.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct Moments {
    n: u64,
    sum: Kahan,
    sumsq: Kahan,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    pub mean: f64,
    pub std_err: f64,
    pub count: u64,
}

impl Moments {
    /// NaN marks a sample excluded from this output.
    pub fn push(&mut self, x: f64) {
        if x.is_nan() {
            return;
        }
        self.n += 1;
        self.sum.add(x);
        self.sumsq.add(x * x);
    }

    pub fn merge(&mut self, other: &Moments) {
        self.n += other.n;
        self.sum.add(other.sum.sum);
        self.sum.add(-other.sum.c);
        self.sumsq.add(other.sumsq.sum);
        self.sumsq.add(-other.sumsq.c);
    }

    pub fn count(&self) -> u64 {
        self.n
    }

    pub fn mean(&self) -> f64 {
        if self.n == 0 {
            return f64::NAN;
        }
        self.sum.sum / self.n as f64
    }

    pub fn variance(&self) -> f64 {
        if self.n < 2 {
            return 0.0;
        }
        let n = self.n as f64;
        let mean = self.sum.sum / n;
        ((self.sumsq.sum - n * mean * mean) / (n - 1.0)).max(0.0)
    }

    pub fn std_err(&self) -> f64 {
        if self.n == 0 {
            return f64::NAN;
        }
        (self.variance() / self.n as f64).sqrt()
    }

    pub fn summary(&self) -> Summary {
        Summary {
            mean: self.mean(),
            std_err: self.std_err(),
            count: self.n,
        }
    }
}

/// Runs `body` once per sample, giving it per-stream scratch state from `init`,
/// and accumulates its `K` outputs. Streams are `stream_base..stream_base + n_streams`.
pub(crate) fn run_streams<const K: usize, S, I, F>(
    seed: u64,
    n_samples: u64,
    n_streams: u64,
    stream_base: u64,
    init: I,
    body: F,
) -> Result<[Moments; K]>
where
    I: Fn() -> S + Sync,
    F: Fn(&mut S, &mut Stream) -> Result<[f64; K]> + Sync,
{
    let ns = n_streams.clamp(1, n_samples.max(1));
    let base = n_samples / ns;
    let rem = n_samples % ns;

    let work = |s: u64| -> Result<[Moments; K]> {
        let count = base + u64::from(s < rem);
        let offset = s * base + s.min(rem);
        let mut rng = stream(seed, stream_base + s);
        let mut scratch = init();
        let mut acc = [Moments::default(); K];
        for j in 0..count {
            let out = body(&mut scratch, &mut rng).map_err(|e| Error::SampleFailure {
                sample: offset + j,
                source: Box::new(e),
            })?;
            for (a, x) in acc.iter_mut().zip(out) {
                a.push(x);
            }
        }
        Ok(acc)
    };

    #[cfg(feature = "parallel")]
    let parts: Vec<[Moments; K]> = (0..ns).into_par_iter().map(work).collect::<Result<_>>()?;
    #[cfg(not(feature = "parallel"))]
    let parts: Vec<[Moments; K]> = (0..ns).map(work).collect::<Result<_>>()?;

    let mut total = [Moments::default(); K];
    for part in &parts {
        for (t, p) in total.iter_mut().zip(part) {
            t.merge(p);
        }
    }
    Ok(total)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::stream::open01;

    #[test]
    fn moments_match_two_pass() {
        let xs = [1.0, 2.0, 4.0, 7.0, f64::NAN, 11.0];
        let mut m = Moments::default();
        xs.iter().for_each(|&x| m.push(x));
        assert_eq!(m.count(), 5);
        assert_eq!(m.mean(), 5.0);
        let var: f64 = [1.0, 2.0, 4.0, 7.0, 11.0].iter().map(|x: &f64| (x - 5.0).powi(2)).sum::<f64>() / 4.0;
        assert!((m.variance() - var).abs() < 1e-12);
    }

    #[test]
    fn results_are_bit_identical_for_fixed_config() {
        let f = |_: &mut (), rng: &mut Stream| Ok([open01(rng)]);
        let a = run_streams(9, 10_001, 7, 0, || (), f).unwrap();
        let b = run_streams(9, 10_001, 7, 0, || (), f).unwrap();
        assert_eq!(a[0].mean().to_bits(), b[0].mean().to_bits());
        assert_eq!(a[0].count(), 10_001);
    }

    #[test]
    fn sample_index_reported_on_failure() {
        let counter = std::sync::atomic::AtomicU64::new(0);
        let r = run_streams(1, 10, 1, 0, || (), |_, _| {
            if counter.fetch_add(1, std::sync::atomic::Ordering::SeqCst) == 3 {
                Err(Error::ZeroDenominator)
            } else {
                Ok([0.0])
            }
        });
        assert!(matches!(r, Err(Error::SampleFailure { sample: 3, .. })));
    }
}
