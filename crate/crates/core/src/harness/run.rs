use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{hash_text, RunConfig};
use crate::analysis::{bootstrap_ci, fft_spectrum, mean_hellinger, rabi_peak, Interval, Spectrum, TimeSeries};
use crate::circuit::{synthesize_qmarina, Counts, Role};
use crate::error::{Error, Result};
use crate::mitigation::{execute, mitigate_counts, FactorCounts, MitigatedStep, MitigationConfig};
use crate::model::{exact_series, rabi_frequency, PopulationDistribution};
use crate::rng::derive_seed;
use crate::transpiler::{transpile, CompilationReport};

#[derive(Clone, Debug, PartialEq)]
pub struct StepRecord {
    pub t: f64,
    pub counts: FactorCounts,
    pub report: CompilationReport,
    /// Populations with the configured mitigation.
    pub mitigated: MitigatedStep,
    /// Same stack without postselection.
    pub raw: MitigatedStep,
    /// Readout roles of the compiled circuit's logical qubits.
    pub roles: Vec<Role>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunSummary {
    pub name: String,
    pub software_version: String,
    pub schema_version: u32,
    pub config_hash: String,
    pub seed: u64,
    pub n_steps: usize,
    /// Steps without retained shots, left out of every metric.
    pub excluded_steps: Vec<usize>,
    pub mhd: Option<f64>,
    pub mhd_raw: Option<f64>,
    pub ci: Option<Interval>,
    pub mean_discard_fraction: f64,
    pub clipped_steps: usize,
    pub peak_frequency: Option<f64>,
    pub exact_peak_frequency: f64,
    pub rabi_frequency: f64,
    pub bin_width: f64,
    pub two_qubit_gates: usize,
    pub total_entangling_angle: f64,
    pub unmirrored_entangling_angle: f64,
    /// `1 - total / unmirrored` over the sweep.
    pub entangling_angle_reduction: f64,
    pub mirrored_blocks: usize,
    pub swaps_inserted: usize,
}

#[derive(Clone, Debug)]
pub struct RunResult {
    pub config: RunConfig,
    pub steps: Vec<StepRecord>,
    pub exact: TimeSeries,
    /// Mitigated populations on the included steps.
    pub mitigated: Option<TimeSeries>,
    pub spectrum: Option<Spectrum>,
    pub exact_spectrum: Spectrum,
    pub summary: RunSummary,
    pub wall_clock_s: f64,
}

/// Exact populations on the configured grid.
pub fn solve(config: &RunConfig) -> Result<TimeSeries> {
    config.model.validate()?;
    config.grid.validate()?;
    let times = config.grid.times();
    TimeSeries::new(times.clone(), exact_series(&config.model, &times)?)
}

fn run_step(config: &RunConfig, index: usize, t: f64, target: &PopulationDistribution) -> Result<StepRecord> {
    let noise = config.backend.resolved_noise()?;
    let (circuit, _) = synthesize_qmarina(target, config.model.excited_emitter)?;
    let compiled = transpile(&circuit, &config.backend.gate_set, &config.backend.transpile)?;
    let seed = derive_seed(config.seed, &[index as u64]);
    let mitigation = MitigationConfig { seed: derive_seed(config.seed, &[u64::MAX, config.mitigation.seed]), ..config.mitigation.clone() };
    let counts = execute(&compiled.circuit, &noise, config.shots, &mitigation, seed)?;
    let roles = compiled.circuit.roles().to_vec();
    let excited = config.model.excited_emitter;
    let mitigated = mitigate_counts(&counts, &roles, &config.mitigation, excited)?;
    let raw_cfg = MitigationConfig { postselect: false, ..config.mitigation.clone() };
    let raw = mitigate_counts(&counts, &roles, &raw_cfg, excited)?;
    Ok(StepRecord { t, counts, report: compiled.report, mitigated, raw, roles })
}

/// Series over the steps with defined populations, and the excluded indices.
fn defined_series(times: &[f64], pops: &[Option<PopulationDistribution>]) -> Result<(Option<TimeSeries>, Vec<usize>)> {
    let excluded: Vec<usize> = (0..pops.len()).filter(|&i| pops[i].is_none()).collect();
    let keep: Vec<usize> = (0..pops.len()).filter(|&i| pops[i].is_some()).collect();
    if keep.is_empty() {
        return Ok((None, excluded));
    }
    let ts = TimeSeries::new(keep.iter().map(|&i| times[i]).collect(), keep.iter().map(|&i| pops[i].clone().unwrap()).collect())?;
    Ok((Some(ts), excluded))
}

fn mhd_of(pops: &[Option<PopulationDistribution>], exact: &TimeSeries) -> Result<Option<f64>> {
    let (series, _) = defined_series(exact.times(), pops)?;
    let Some(series) = series else { return Ok(None) };
    let keep: Vec<usize> = (0..pops.len()).filter(|&i| pops[i].is_some()).collect();
    let reference = exact.filter(|i| keep.contains(&i))?;
    mean_hellinger(&series, &reference).map(Some)
}

fn bootstrap(config: &RunConfig, steps: &[StepRecord], exact: &TimeSeries) -> Result<Option<Interval>> {
    let factors: Vec<u32> = steps[0].counts.keys().copied().collect();
    let k = factors.len();
    let flat: Vec<Counts> = steps.iter().flat_map(|s| s.counts.values().cloned()).collect();
    if flat.iter().any(|c| c.shots() == 0) {
        return Ok(None);
    }
    let statistic = |sample: &[Counts]| -> Result<f64> {
        let pops = steps
            .iter()
            .enumerate()
            .map(|(i, s)| {
                let fc: FactorCounts = factors.iter().copied().zip(sample[i * k..(i + 1) * k].iter().cloned()).collect();
                Ok(mitigate_counts(&fc, &s.roles, &config.mitigation, config.model.excited_emitter)?.populations)
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(mhd_of(&pops, exact)?.unwrap_or(f64::NAN))
    };
    let seed = derive_seed(config.seed, &[u64::MAX - 1]);
    let ci = bootstrap_ci(&flat, statistic, config.analysis.bootstrap_replicates, config.analysis.ci_level, seed)?;
    Ok(Some(ci))
}

/// Run the full sweep in memory.
pub fn run_experiment(config: &RunConfig) -> Result<RunResult> {
    config.validate()?;
    let start = Instant::now();
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(config.jobs)
        .build()
        .map_err(|e| Error::Config(format!("thread pool: {e}")))?;
    let exact = solve(config)?;
    let times = exact.times().to_vec();
    let steps: Vec<StepRecord> = pool.install(|| {
        times
            .par_iter()
            .zip(exact.populations())
            .enumerate()
            .map(|(i, (&t, target))| run_step(config, i, t, target))
            .collect::<Result<_>>()
    })?;

    let pops: Vec<Option<PopulationDistribution>> = steps.iter().map(|s| s.mitigated.populations.clone()).collect();
    let raw: Vec<Option<PopulationDistribution>> = steps.iter().map(|s| s.raw.populations.clone()).collect();
    let (mitigated, excluded) = defined_series(&times, &pops)?;
    let mhd = mhd_of(&pops, &exact)?;
    let mhd_raw = mhd_of(&raw, &exact)?;
    let ci = if mhd.is_some() { pool.install(|| bootstrap(config, &steps, &exact))? } else { None };

    let exact_spectrum = fft_spectrum(&exact)?;
    let exact_peak_frequency = rabi_peak(&exact_spectrum)?;
    let spectrum = match &mitigated {
        Some(m) if excluded.is_empty() => Some(fft_spectrum(m)?),
        _ => None,
    };
    let peak_frequency = spectrum.as_ref().and_then(|s| rabi_peak(s).ok());

    let total: f64 = steps.iter().map(|s| s.report.total_entangling_angle).sum();
    let unmirrored: f64 = steps.iter().map(|s| s.report.unmirrored_entangling_angle).sum();
    let summary = RunSummary {
        name: config.name.clone(),
        software_version: env!("CARGO_PKG_VERSION").to_string(),
        schema_version: config.schema_version,
        config_hash: config.hash()?,
        seed: config.seed,
        n_steps: steps.len(),
        excluded_steps: excluded,
        mhd,
        mhd_raw,
        ci,
        mean_discard_fraction: steps.iter().map(|s| s.mitigated.discard_fraction).sum::<f64>() / steps.len() as f64,
        clipped_steps: steps.iter().filter(|s| s.mitigated.clipped).count(),
        peak_frequency,
        exact_peak_frequency,
        rabi_frequency: rabi_frequency(&config.model)? / (2.0 * std::f64::consts::PI),
        bin_width: exact_spectrum.bin_width(),
        two_qubit_gates: steps.iter().map(|s| s.report.two_qubit_gates).sum(),
        total_entangling_angle: total,
        unmirrored_entangling_angle: unmirrored,
        entangling_angle_reduction: if unmirrored > 0.0 { 1.0 - total / unmirrored } else { 0.0 },
        mirrored_blocks: steps.iter().map(|s| s.report.mirrored_blocks).sum(),
        swaps_inserted: steps.iter().map(|s| s.report.swaps_inserted).sum(),
    };
    Ok(RunResult {
        config: config.clone(),
        steps,
        exact,
        mitigated,
        spectrum,
        exact_spectrum,
        summary,
        wall_clock_s: start.elapsed().as_secs_f64(),
    })
}

fn write(path: &Path, text: &str) -> Result<()> {
    fs::write(path, text).map_err(|e| Error::io(path, e))
}

fn json<T: Serialize>(value: &T) -> Result<String> {
    let mut s = serde_json::to_string_pretty(value)?;
    s.push('\n');
    Ok(s)
}

fn num(v: Option<f64>) -> String {
    v.map(|x| format!("{x}")).unwrap_or_default()
}

#[derive(Serialize)]
struct Provenance<'a> {
    config_hash: &'a str,
    seed: u64,
    software_version: &'a str,
    wall_clock_s: f64,
    finished_unix_s: u64,
}

impl RunResult {
    fn write_steps(&self, path: &Path) -> Result<()> {
        let n = self.config.model.n_emitters;
        let mut w = csv::Writer::from_path(path)?;
        let mut header = vec!["t".to_string()];
        header.extend((1..=n).map(|i| format!("p_e{i}")));
        header.extend(["p_cav_env", "discard_fraction", "shots_kept"].map(String::from));
        w.write_record(&header)?;
        for s in &self.steps {
            let mut row = vec![format!("{}", s.t)];
            match &s.mitigated.populations {
                Some(p) => row.extend(p.iter().map(|v| format!("{v}"))),
                None => row.extend(std::iter::repeat_n(String::new(), n + 1)),
            }
            row.push(format!("{}", s.mitigated.discard_fraction));
            row.push(s.mitigated.shots_kept.to_string());
            w.write_record(&row)?;
        }
        w.flush().map_err(|e| Error::io(path, e))?;
        Ok(())
    }

    fn write_raw(&self, path: &Path) -> Result<()> {
        let n = self.config.model.n_emitters;
        let mut w = csv::Writer::from_path(path)?;
        let mut header = vec!["t".to_string()];
        header.extend((1..=n).map(|i| format!("p_e{i}")));
        header.push("p_cav_env".into());
        w.write_record(&header)?;
        for s in &self.steps {
            let mut row = vec![format!("{}", s.t)];
            match &s.raw.populations {
                Some(p) => row.extend(p.iter().map(|v| num(Some(v)))),
                None => row.extend(std::iter::repeat_n(String::new(), n + 1)),
            }
            w.write_record(&row)?;
        }
        w.flush().map_err(|e| Error::io(path, e))?;
        Ok(())
    }

    /// Write the run directory atomically: everything goes to a sibling
    /// staging directory that is renamed into place at the end.
    pub fn persist(&self, dir: &Path) -> Result<PathBuf> {
        let parent = dir.parent().filter(|p| !p.as_os_str().is_empty()).unwrap_or(Path::new("."));
        fs::create_dir_all(parent).map_err(|e| Error::io(parent, e))?;
        let name = dir.file_name().ok_or_else(|| Error::Config(format!("bad output path {}", dir.display())))?;
        let staging = parent.join(format!(".{}.partial-{}", name.to_string_lossy(), std::process::id()));
        if staging.exists() {
            fs::remove_dir_all(&staging).map_err(|e| Error::io(&staging, e))?;
        }
        fs::create_dir_all(&staging).map_err(|e| Error::io(&staging, e))?;

        write(&staging.join("config.toml"), &self.config.to_toml()?)?;
        self.write_steps(&staging.join("steps.csv"))?;
        self.write_raw(&staging.join("raw_populations.csv"))?;
        self.exact.write_csv(&staging.join("exact.csv"))?;
        let counts: Vec<&FactorCounts> = self.steps.iter().map(|s| &s.counts).collect();
        write(&staging.join("counts.json"), &json(&counts)?)?;
        let reports: Vec<&CompilationReport> = self.steps.iter().map(|s| &s.report).collect();
        write(&staging.join("compile_report.json"), &json(&reports)?)?;
        if let Some(s) = &self.spectrum {
            s.write_csv(&staging.join("spectrum.csv"))?;
        }
        self.exact_spectrum.write_csv(&staging.join("exact_spectrum.csv"))?;
        write(&staging.join("summary.json"), &json(&self.summary)?)?;
        let finished = std::time::SystemTime::now().duration_since(std::time::UNIX_EPOCH).map(|d| d.as_secs()).unwrap_or(0);
        let prov = Provenance {
            config_hash: &self.summary.config_hash,
            seed: self.summary.seed,
            software_version: &self.summary.software_version,
            wall_clock_s: self.wall_clock_s,
            finished_unix_s: finished,
        };
        write(&staging.join("provenance.toml"), &toml::to_string(&prov).map_err(|e| Error::Config(e.to_string()))?)?;

        if dir.exists() {
            fs::remove_dir_all(dir).map_err(|e| Error::io(dir, e))?;
        }
        fs::rename(&staging, dir).map_err(|e| Error::io(dir, e))?;
        Ok(dir.to_path_buf())
    }
}

#[derive(Clone, Debug)]
pub struct LoadedRun {
    pub dir: PathBuf,
    pub config: RunConfig,
    pub summary: RunSummary,
}

/// Read a run directory back, checking the stored config against its hash.
pub fn load_run(dir: &Path) -> Result<LoadedRun> {
    let read = |name: &str| {
        let p = dir.join(name);
        fs::read_to_string(&p).map_err(|e| Error::io(&p, e))
    };
    let config_text = read("config.toml")?;
    let summary: RunSummary = serde_json::from_str(&read("summary.json")?)?;
    if hash_text(&config_text) != summary.config_hash {
        return Err(Error::Provenance(dir.to_path_buf()));
    }
    let config = RunConfig::from_toml(&config_text)?;
    Ok(LoadedRun { dir: dir.to_path_buf(), config, summary })
}

/// Populations of `steps.csv` (or any CSV with `t, p_e.., p_cav_env` leading
/// columns); rows without populations are skipped.
pub fn load_steps(path: &Path) -> Result<TimeSeries> {
    let mut r = csv::Reader::from_path(path)?;
    let headers = r.headers()?.clone();
    let n_pop = headers.iter().skip(1).take_while(|h| h.starts_with("p_")).count();
    if n_pop < 2 || headers.get(0) != Some("t") {
        return Err(Error::Config(format!("{} does not have t, p_e1.., p_cav_env columns", path.display())));
    }
    let (mut times, mut pops) = (Vec::new(), Vec::new());
    for rec in r.records() {
        let rec = rec?;
        if rec.get(1).is_none_or(str::is_empty) {
            continue;
        }
        let parse = |s: &str| s.parse::<f64>().map_err(|_| Error::Config(format!("bad number {s:?} in {}", path.display())));
        times.push(parse(&rec[0])?);
        let v: Vec<f64> = (1..=n_pop).map(|i| parse(&rec[i])).collect::<Result<_>>()?;
        pops.push(PopulationDistribution::normalized(&v)?);
    }
    TimeSeries::new(times, pops)
}
