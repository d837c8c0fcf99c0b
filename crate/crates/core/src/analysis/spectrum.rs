//! One-sided amplitude spectra of mean-subtracted population series.

use std::path::Path;

use rustfft::num_complex::Complex;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};

use super::{long_csv_to_writer, write_long_csv, TimeSeries};
use crate::error::{Error, Result};

/// Relative spacing deviation tolerated for a "uniform" grid.
const UNIFORM_TOL: f64 = 1e-6;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Spectrum {
    /// Bin frequencies `k / (n dt)` in cycles/ns, `k = 0..=n/2`.
    pub frequencies: Vec<f64>,
    /// `e1..eN`, then `cav_env`.
    pub channels: Vec<String>,
    /// `amplitudes[c][k]`: `|X_k| / n` for channel `c`.
    pub amplitudes: Vec<Vec<f64>>,
}

impl Spectrum {
    pub fn n_bins(&self) -> usize {
        self.frequencies.len()
    }

    pub fn bin_width(&self) -> f64 {
        self.frequencies.get(1).copied().unwrap_or(0.0)
    }

    pub fn channel(&self, name: &str) -> Option<&[f64]> {
        self.channels.iter().position(|c| c == name).map(|i| self.amplitudes[i].as_slice())
    }

    /// Index of the bin nearest to `f`.
    pub fn bin_of(&self, f: f64) -> usize {
        let w = self.bin_width();
        if w == 0.0 {
            0
        } else {
            ((f / w).round().max(0.0) as usize).min(self.n_bins() - 1)
        }
    }

    fn rows(&self) -> Vec<(f64, String, f64)> {
        self.channels
            .iter()
            .zip(&self.amplitudes)
            .flat_map(|(ch, amps)| self.frequencies.iter().zip(amps).map(move |(f, a)| (*f, ch.clone(), *a)))
            .collect()
    }

    /// Long-format CSV `frequency,channel,value`.
    pub fn write_csv(&self, path: &Path) -> Result<()> {
        write_long_csv(path, "frequency", &self.rows())
    }

    pub fn to_writer<W: std::io::Write>(&self, out: W) -> Result<()> {
        long_csv_to_writer(out, "frequency", &self.rows())
    }
}

pub fn fft_spectrum(series: &TimeSeries) -> Result<Spectrum> {
    let t = series.times();
    let n = t.len();
    if n < 2 {
        return Err(Error::InvalidParams("spectrum needs at least two samples".into()));
    }
    let dt = (t[n - 1] - t[0]) / (n - 1) as f64;
    if t.windows(2).any(|w| ((w[1] - w[0]) - dt).abs() > UNIFORM_TOL * dt) {
        return Err(Error::InvalidParams("time grid is not uniform".into()));
    }
    let fft = FftPlanner::new().plan_fft_forward(n);
    let n_ch = series.n_emitters() + 1;
    let mut channels: Vec<String> = (1..=series.n_emitters()).map(|i| format!("e{i}")).collect();
    channels.push("cav_env".into());
    let amplitudes = (0..n_ch)
        .map(|c| {
            let x = series.channel(c);
            let mean = x.iter().sum::<f64>() / n as f64;
            let mut buf: Vec<Complex<f64>> = x.iter().map(|v| Complex::new(v - mean, 0.0)).collect();
            fft.process(&mut buf);
            buf[..=n / 2].iter().map(|z| z.norm() / n as f64).collect()
        })
        .collect();
    let frequencies = (0..=n / 2).map(|k| k as f64 / (n as f64 * dt)).collect();
    Ok(Spectrum { frequencies, channels, amplitudes })
}

fn argmax_nonzero(values: &[f64]) -> Result<usize> {
    if values.len() < 2 {
        return Err(Error::Empty("spectrum has no nonzero-frequency bins".into()));
    }
    let (k, &best) = values[1..].iter().enumerate().max_by(|a, b| a.1.total_cmp(b.1)).unwrap();
    let min = values[1..].iter().cloned().fold(f64::INFINITY, f64::min);
    if !(best > 0.0) || best - min <= 1e-12 * best.max(1.0) {
        return Err(Error::InvalidParams("flat spectrum has no peak".into()));
    }
    Ok(k + 1)
}

/// Peak frequency of one channel, ignoring the zero bin.
pub fn peak_frequency(spec: &Spectrum, channel: &str) -> Result<f64> {
    let amps = spec.channel(channel).ok_or_else(|| Error::InvalidParams(format!("no channel {channel:?}")))?;
    Ok(spec.frequencies[argmax_nonzero(amps)?])
}

/// Collective Rabi peak: argmax of the summed emitter amplitudes, ignoring
/// the zero bin.
pub fn rabi_peak(spec: &Spectrum) -> Result<f64> {
    if spec.frequencies.is_empty() || spec.amplitudes.is_empty() {
        return Err(Error::Empty("spectrum".into()));
    }
    let emitters: Vec<&Vec<f64>> =
        spec.channels.iter().zip(&spec.amplitudes).filter(|(c, _)| c.starts_with('e')).map(|(_, a)| a).collect();
    let source: Vec<&Vec<f64>> = if emitters.is_empty() { spec.amplitudes.iter().collect() } else { emitters };
    let summed: Vec<f64> = (0..spec.n_bins()).map(|k| source.iter().map(|a| a[k]).sum()).collect();
    Ok(spec.frequencies[argmax_nonzero(&summed)?])
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{exact_series, PopulationDistribution, TcParams};
    use crate::rng::stream;
    use rand::Rng;

    fn grid() -> Vec<f64> {
        (0..51).map(|i| 3.0 * i as f64 / 50.0).collect()
    }

    fn two_channel(values: impl Fn(f64) -> f64) -> TimeSeries {
        let times = grid();
        let pops = times
            .iter()
            .map(|&t| {
                let v = values(t).clamp(0.0, 1.0);
                PopulationDistribution::from_slice(&[v, 1.0 - v]).unwrap()
            })
            .collect();
        TimeSeries::new(times, pops).unwrap()
    }

    #[test]
    fn constant_series_has_empty_spectrum() {
        let s = fft_spectrum(&two_channel(|_| 0.3)).unwrap();
        assert_eq!(s.n_bins(), 26);
        assert!(s.amplitudes.iter().flatten().all(|a| *a < 1e-12));
        assert!(rabi_peak(&s).is_err());
    }

    #[test]
    fn cosine_on_grid_frequency() {
        // 51 samples at dt = 0.06: bin k sits at k / 3.06.
        let f = 4.0 / 3.06;
        let s = fft_spectrum(&two_channel(|t| 0.5 + 0.4 * (2.0 * std::f64::consts::PI * f * t).cos())).unwrap();
        assert!(s.amplitudes[0][0] <= 1e-10);
        assert!((rabi_peak(&s).unwrap() - f).abs() < 1e-12);
        let amps = &s.amplitudes[0];
        let others = amps.iter().enumerate().filter(|(k, _)| *k != 4).map(|(_, a)| *a).fold(0.0, f64::max);
        assert!(amps[4] > 10.0 * others);
        assert_eq!(peak_frequency(&s, "cav_env").unwrap(), f);
    }

    #[test]
    fn peak_survives_small_noise() {
        let f = 4.0 / 3.06;
        for seed in 0..20 {
            let mut rng = stream(seed, &[]);
            let noise: Vec<f64> = (0..51).map(|_| rng.random_range(-0.05..0.05)).collect();
            let times = grid();
            let pops = times
                .iter()
                .zip(&noise)
                .map(|(&t, e)| {
                    let v = (0.5 + 0.4 * (2.0 * std::f64::consts::PI * f * t).cos() + e).clamp(0.0, 1.0);
                    PopulationDistribution::from_slice(&[v, 1.0 - v]).unwrap()
                })
                .collect();
            let s = fft_spectrum(&TimeSeries::new(times, pops).unwrap()).unwrap();
            assert_eq!(s.bin_of(rabi_peak(&s).unwrap()), 4);
        }
    }

    #[test]
    fn rejects_non_uniform_grid() {
        let p = PopulationDistribution::from_slice(&[0.5, 0.5]).unwrap();
        let ts = TimeSeries::new(vec![0.0, 0.1, 0.3], vec![p.clone(), p.clone(), p]).unwrap();
        assert!(matches!(fft_spectrum(&ts), Err(Error::InvalidParams(_))));
    }

    #[test]
    fn exact_solution_peak() {
        let params = TcParams::reference();
        let times = grid();
        let ts = TimeSeries::new(times.clone(), exact_series(&params, &times).unwrap()).unwrap();
        let s = fft_spectrum(&ts).unwrap();
        assert!(s.amplitudes.iter().all(|a| a[0] <= 1e-10));
        let peak = rabi_peak(&s).unwrap();
        assert_eq!(s.bin_of(peak), EXACT_PEAK_BIN);
        let omega = 4.0 * 3f64.sqrt() / (2.0 * std::f64::consts::PI);
        assert!((peak - omega).abs() <= s.bin_width());
    }

    #[test]
    fn csv_layout() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("spec.csv");
        let s = fft_spectrum(&two_channel(|t| 0.5 + 0.3 * t.sin())).unwrap();
        s.write_csv(&path).unwrap();
        let text = std::fs::read_to_string(path).unwrap();
        assert_eq!(text.lines().next().unwrap(), "frequency,channel,value");
        assert_eq!(text.lines().count(), 1 + 2 * 26);
    }

    const EXACT_PEAK_BIN: usize = 3;
}
