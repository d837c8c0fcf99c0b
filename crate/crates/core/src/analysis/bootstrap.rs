//! Shot-level bootstrap: each replicate redraws every time step's counts
//! from a multinomial with the observed frequencies.

use rand::Rng;
use rand_distr::{Binomial, Distribution};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::circuit::Counts;
use crate::error::{Error, Result};
use crate::rng::stream;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Interval {
    pub lo: f64,
    pub hi: f64,
    pub level: f64,
    pub point: f64,
    /// Mean of the replicates; its offset from `point` estimates the bias.
    pub replicate_mean: f64,
}

impl Interval {
    pub fn contains(&self, x: f64) -> bool {
        self.lo <= x && x <= self.hi
    }

    pub fn width(&self) -> f64 {
        self.hi - self.lo
    }
}

/// Multinomial redraw of `counts` with the same total.
pub fn resample_counts<R: Rng + ?Sized>(counts: &Counts, rng: &mut R) -> Counts {
    let mut left = counts.shots();
    let mut mass = left as f64;
    let mut out = Counts::new(counts.width());
    for (index, n) in counts.iter() {
        if left == 0 {
            break;
        }
        let p = (n as f64 / mass).clamp(0.0, 1.0);
        let k = if p >= 1.0 { left } else { Binomial::new(left, p).expect("valid binomial").sample(rng) };
        if k > 0 {
            out.add(index, k);
        }
        left -= k;
        mass -= n as f64;
    }
    out
}

/// Percentile interval of `statistic` over `replicates` shot-level
/// resamples. Replicate `r` draws from `stream(seed, [r])`.
pub fn bootstrap_ci<F>(steps: &[Counts], statistic: F, replicates: usize, level: f64, seed: u64) -> Result<Interval>
where
    F: Fn(&[Counts]) -> Result<f64> + Sync,
{
    if steps.is_empty() {
        return Err(Error::Empty("no time steps".into()));
    }
    if let Some(i) = steps.iter().position(|c| c.shots() == 0) {
        return Err(Error::Empty(format!("time step {i} has no shots")));
    }
    if replicates == 0 {
        return Err(Error::InvalidParams("bootstrap needs at least one replicate".into()));
    }
    if !(level > 0.0 && level < 1.0) {
        return Err(Error::InvalidParams(format!("confidence level {level} outside (0, 1)")));
    }
    let point = statistic(steps)?;
    let mut values = (0..replicates)
        .into_par_iter()
        .map(|r| {
            let mut rng = stream(seed, &[r as u64]);
            let resampled: Vec<Counts> = steps.iter().map(|c| resample_counts(c, &mut rng)).collect();
            statistic(&resampled)
        })
        .collect::<Result<Vec<f64>>>()?;
    values.sort_by(f64::total_cmp);
    let alpha = (1.0 - level) / 2.0;
    let replicate_mean = values.iter().sum::<f64>() / values.len() as f64;
    Ok(Interval { lo: quantile(&values, alpha), hi: quantile(&values, 1.0 - alpha), level, point, replicate_mean })
}

/// Linear-interpolated quantile of sorted data.
fn quantile(sorted: &[f64], q: f64) -> f64 {
    let pos = q * (sorted.len() - 1) as f64;
    let (i, frac) = (pos.floor() as usize, pos.fract());
    if i + 1 >= sorted.len() {
        sorted[sorted.len() - 1]
    } else {
        sorted[i] * (1.0 - frac) + sorted[i + 1] * frac
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::analysis::hellinger;

    fn mean_h(steps: &[Counts], reference: &[Vec<f64>]) -> Result<f64> {
        let mut total = 0.0;
        for (c, r) in steps.iter().zip(reference) {
            total += hellinger(&c.frequencies(), r)?;
        }
        Ok(total / steps.len() as f64)
    }

    fn draw(truth: &[f64], shots: u64, rng: &mut impl Rng) -> Counts {
        let mut c = Counts::new(2);
        for _ in 0..shots {
            let u: f64 = rng.random();
            let mut acc = 0.0;
            let mut k = truth.len() - 1;
            for (i, p) in truth.iter().enumerate() {
                acc += p;
                if u < acc {
                    k = i;
                    break;
                }
            }
            c.add(k as u64, 1);
        }
        c
    }

    #[test]
    fn resample_preserves_total() {
        let c = Counts::from_pairs(2, [(0, 10), (1, 0), (2, 25), (3, 65)]);
        let mut rng = stream(3, &[]);
        for _ in 0..50 {
            assert_eq!(resample_counts(&c, &mut rng).shots(), 100);
        }
    }

    #[test]
    fn zero_variance_gives_zero_width() {
        let steps = vec![Counts::from_pairs(2, [(1, 500)]); 4];
        let reference = vec![vec![0.5, 0.5, 0.0, 0.0]; 4];
        let ci = bootstrap_ci(&steps, |s| mean_h(s, &reference), 200, 0.95, 1).unwrap();
        assert!(ci.width().abs() < 1e-15);
        assert!(ci.contains(ci.point));
    }

    #[test]
    fn deterministic_and_contains_point() {
        let mut rng = stream(9, &[]);
        let truth = [0.1, 0.2, 0.3, 0.4];
        let steps: Vec<Counts> = (0..5).map(|_| draw(&truth, 300, &mut rng)).collect();
        let reference = vec![vec![0.7, 0.1, 0.1, 0.1]; 5];
        let a = bootstrap_ci(&steps, |s| mean_h(s, &reference), 1000, 0.95, 11).unwrap();
        let b = bootstrap_ci(&steps, |s| mean_h(s, &reference), 1000, 0.95, 11).unwrap();
        assert_eq!(a, b);
        assert!(a.contains(a.point));
        assert!(a.width() > 0.0);
    }

    #[test]
    fn errors() {
        let r = vec![vec![1.0, 0.0, 0.0, 0.0]];
        assert!(matches!(bootstrap_ci(&[], |s| mean_h(s, &r), 10, 0.95, 0), Err(Error::Empty(_))));
        let empty = vec![Counts::new(2)];
        assert!(matches!(bootstrap_ci(&empty, |s| mean_h(s, &r), 10, 0.95, 0), Err(Error::Empty(_))));
        let one = vec![Counts::from_pairs(2, [(0, 3)])];
        assert!(bootstrap_ci(&one, |s| mean_h(s, &r), 10, 1.5, 0).is_err());
    }

    #[test]
    fn coverage_near_nominal() {
        let truth: Vec<Vec<f64>> = (0..6)
            .map(|t| {
                let a = 0.05 + 0.08 * t as f64;
                vec![a, 0.3, 0.1, 0.6 - a]
            })
            .collect();
        let reference = vec![vec![0.05, 0.05, 0.6, 0.3]; 6];
        let target: f64 = truth.iter().zip(&reference).map(|(p, r)| hellinger(p, r).unwrap()).sum::<f64>() / 6.0;
        let trials = 200;
        let covered: usize = (0..trials)
            .into_par_iter()
            .map(|k| {
                let mut rng = stream(2024, &[k as u64]);
                let steps: Vec<Counts> = truth.iter().map(|p| draw(p, 400, &mut rng)).collect();
                let ci = bootstrap_ci(&steps, |s| mean_h(s, &reference), 1000, 0.95, 7000 + k as u64).unwrap();
                usize::from(ci.contains(target))
            })
            .sum();
        let pct = 100.0 * covered as f64 / trials as f64;
        assert!((pct - 95.0).abs() <= 4.0, "coverage {pct}%");
    }
}
