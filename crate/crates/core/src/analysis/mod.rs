//! Scoring simulated dynamics against the exact solution: Hellinger
//! distance, its time average (MHD), shot-level bootstrap intervals and
//! Fourier analysis of the population oscillations.

mod bootstrap;
mod spectrum;

use std::path::Path;

use serde::{Deserialize, Serialize};

pub use bootstrap::{bootstrap_ci, resample_counts, Interval};
pub use spectrum::{fft_spectrum, peak_frequency, rabi_peak, Spectrum};

use crate::error::{Error, Result};
use crate::model::{PopulationDistribution, DISTRIBUTION_TOL};

/// Populations sampled on a time grid.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TimeSeries {
    times: Vec<f64>,
    populations: Vec<PopulationDistribution>,
    pub shots: Option<Vec<u64>>,
    pub discard_fractions: Option<Vec<f64>>,
}

/// Relative tolerance when comparing two time grids.
const GRID_TOL: f64 = 1e-9;

impl TimeSeries {
    pub fn new(times: Vec<f64>, populations: Vec<PopulationDistribution>) -> Result<TimeSeries> {
        if times.len() != populations.len() {
            return Err(Error::Mismatch(format!("{} times but {} distributions", times.len(), populations.len())));
        }
        if times.is_empty() {
            return Err(Error::Empty("time series".into()));
        }
        if times.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::InvalidParams("times must be strictly increasing".into()));
        }
        for p in &populations {
            p.validate()?;
        }
        let n = populations[0].n_emitters();
        if populations.iter().any(|p| p.n_emitters() != n) {
            return Err(Error::Mismatch("emitter count changes along the series".into()));
        }
        Ok(TimeSeries { times, populations, shots: None, discard_fractions: None })
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn populations(&self) -> &[PopulationDistribution] {
        &self.populations
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn n_emitters(&self) -> usize {
        self.populations[0].n_emitters()
    }

    /// Values of channel `k` (`0..N` emitters, `N` cavity/environment).
    pub fn channel(&self, k: usize) -> Vec<f64> {
        self.populations.iter().map(|p| p.to_vec()[k]).collect()
    }

    /// Keep only the samples whose index satisfies `keep`.
    pub fn filter(&self, keep: impl Fn(usize) -> bool) -> Result<TimeSeries> {
        let idx: Vec<usize> = (0..self.len()).filter(|&i| keep(i)).collect();
        let mut out = TimeSeries::new(
            idx.iter().map(|&i| self.times[i]).collect(),
            idx.iter().map(|&i| self.populations[i].clone()).collect(),
        )?;
        out.shots = self.shots.as_ref().map(|s| idx.iter().map(|&i| s[i]).collect());
        out.discard_fractions = self.discard_fractions.as_ref().map(|d| idx.iter().map(|&i| d[i]).collect());
        Ok(out)
    }

    pub fn same_grid(&self, other: &TimeSeries) -> bool {
        self.len() == other.len()
            && self.times.iter().zip(&other.times).all(|(a, b)| (a - b).abs() <= GRID_TOL * a.abs().max(b.abs()).max(1.0))
    }

    /// CSV with columns `t,p_e1..p_eN,p_cav_env`.
    pub fn write_csv(&self, path: &Path) -> Result<()> {
        let file = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
        self.to_writer(std::io::BufWriter::new(file))
    }

    pub fn to_writer<W: std::io::Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        let n = self.n_emitters();
        let mut header = vec!["t".to_string()];
        header.extend((1..=n).map(|i| format!("p_e{i}")));
        header.push("p_cav_env".into());
        w.write_record(&header)?;
        for (t, p) in self.times.iter().zip(&self.populations) {
            let mut row = vec![format!("{t}")];
            row.extend(p.iter().map(|v| format!("{v}")));
            w.write_record(&row)?;
        }
        w.flush().map_err(csv::Error::from)?;
        Ok(())
    }
}

fn check_distribution(p: &[f64]) -> Result<()> {
    if p.iter().any(|x| !(*x >= 0.0) || !x.is_finite()) {
        return Err(Error::InvalidDistribution(format!("negative or non-finite entry in {p:?}")));
    }
    let s: f64 = p.iter().sum();
    if (s - 1.0).abs() > DISTRIBUTION_TOL.max(1e-9) {
        return Err(Error::InvalidDistribution(format!("entries sum to {s}")));
    }
    Ok(())
}

/// `H(p, q) = sqrt(sum (sqrt p_i - sqrt q_i)^2) / sqrt 2`, in `[0, 1]`.
pub fn hellinger(p: &[f64], q: &[f64]) -> Result<f64> {
    if p.len() != q.len() {
        return Err(Error::Mismatch(format!("distributions of length {} and {}", p.len(), q.len())));
    }
    check_distribution(p)?;
    check_distribution(q)?;
    let s: f64 = p.iter().zip(q).map(|(a, b)| (a.sqrt() - b.sqrt()).powi(2)).sum();
    Ok((s / 2.0).sqrt().min(1.0))
}

pub fn hellinger_populations(p: &PopulationDistribution, q: &PopulationDistribution) -> Result<f64> {
    hellinger(&p.to_vec(), &q.to_vec())
}

/// Per-sample Hellinger distances between two series on the same grid.
pub fn hellinger_series(sim: &TimeSeries, exact: &TimeSeries) -> Result<Vec<f64>> {
    if !sim.same_grid(exact) {
        return Err(Error::Mismatch("time grids differ".into()));
    }
    sim.populations.iter().zip(&exact.populations).map(|(a, b)| hellinger_populations(a, b)).collect()
}

/// Mean Hellinger distance: the average of `H(t)` over the samples.
pub fn mean_hellinger(sim: &TimeSeries, exact: &TimeSeries) -> Result<f64> {
    let h = hellinger_series(sim, exact)?;
    Ok(h.iter().sum::<f64>() / h.len() as f64)
}

/// Long-format CSV rows `(x, channel, value)`.
pub fn write_long_csv(path: &Path, x_name: &str, rows: &[(f64, String, f64)]) -> Result<()> {
    let file = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
    long_csv_to_writer(std::io::BufWriter::new(file), x_name, rows)
}

pub fn long_csv_to_writer<W: std::io::Write>(out: W, x_name: &str, rows: &[(f64, String, f64)]) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record([x_name, "channel", "value"])?;
    for (x, ch, v) in rows {
        w.write_record([format!("{x}"), ch.clone(), format!("{v}")])?;
    }
    w.flush().map_err(csv::Error::from)?;
    Ok(())
}
