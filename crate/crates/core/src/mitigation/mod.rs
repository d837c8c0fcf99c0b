//! Error mitigation: single-excitation postselection, identical-emitter
//! averaging, randomized compiling (RC) and noise amplification with
//! zero-noise extrapolation (NOX).

mod nox;
mod rc;

use std::collections::BTreeMap;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

pub use nox::{check_factor, extrapolate_step, extrapolate_zero, nox_amplify, nox_extrapolate, Extrapolated};
pub use rc::{randomize_compile, randomize_once, MAX_RANDOMIZATIONS};

use crate::circuit::{Circuit, Counts, Role};
use crate::error::{Error, Result};
use crate::model::PopulationDistribution;
use crate::noise::{apply_noisy, NoiseModel};
use crate::rng::derive_seed;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct MitigationConfig {
    pub postselect: bool,
    /// 1-based emitter indices whose populations are averaged.
    pub average_identical: Vec<usize>,
    /// 0 disables RC.
    pub rc_randomizations: usize,
    /// Odd amplification factors; fewer than two disables extrapolation.
    pub nox_factors: Vec<u32>,
    /// Polynomial degree of the extrapolation fit.
    pub nox_order: usize,
    pub seed: u64,
}

impl Default for MitigationConfig {
    fn default() -> Self {
        MitigationConfig {
            postselect: true,
            average_identical: Vec::new(),
            rc_randomizations: 0,
            nox_factors: Vec::new(),
            nox_order: 1,
            seed: 0,
        }
    }
}

impl MitigationConfig {
    pub fn none() -> MitigationConfig {
        MitigationConfig { postselect: false, ..MitigationConfig::default() }
    }

    pub fn validate(&self) -> Result<()> {
        if self.rc_randomizations == 1 || self.rc_randomizations > MAX_RANDOMIZATIONS {
            return Err(Error::Mitigation(format!(
                "rc_randomizations must be 0 or in 2..={MAX_RANDOMIZATIONS}, got {}",
                self.rc_randomizations
            )));
        }
        for &l in &self.nox_factors {
            check_factor(l)?;
        }
        if self.nox_factors.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::Mitigation("nox_factors must be strictly increasing".into()));
        }
        if self.extrapolates() && self.nox_order >= self.nox_factors.len() {
            return Err(Error::Mitigation(format!(
                "fit order {} needs more than {} factors",
                self.nox_order,
                self.nox_factors.len()
            )));
        }
        if self.nox_order == 0 {
            return Err(Error::Mitigation("nox_order must be >= 1".into()));
        }
        if self.average_identical.contains(&0) {
            return Err(Error::Mitigation("emitter indices are 1-based".into()));
        }
        Ok(())
    }

    pub fn extrapolates(&self) -> bool {
        self.nox_factors.len() >= 2
    }

    /// Factors actually executed (`[1]` without NOX).
    pub fn factors(&self) -> Vec<u32> {
        if self.nox_factors.is_empty() {
            vec![1]
        } else {
            self.nox_factors.clone()
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Postselected {
    pub retained: Counts,
    pub discard_fraction: f64,
    /// `None` when every shot was discarded.
    pub populations: Option<Vec<f64>>,
}

/// Keep exactly the Hamming-weight-1 outcomes.
pub fn postselect(counts: &Counts) -> Postselected {
    let retained = Counts::from_pairs(counts.width(), counts.iter().filter(|(i, _)| i.count_ones() == 1));
    let total = counts.shots();
    let discard_fraction = if total == 0 { 0.0 } else { 1.0 - retained.shots() as f64 / total as f64 };
    let populations = (retained.shots() > 0).then(|| {
        let n = retained.shots() as f64;
        (0..counts.width()).map(|q| retained.get(1 << q) as f64 / n).collect()
    });
    Postselected { retained, discard_fraction, populations }
}

/// Per-qubit excitation probabilities, rescaled to unit sum. `None` if no
/// shot excited any qubit.
pub fn marginal_populations(counts: &Counts) -> Option<Vec<f64>> {
    let mut m = vec![0.0; counts.width()];
    for (i, n) in counts.iter() {
        for (q, v) in m.iter_mut().enumerate() {
            if i >> q & 1 == 1 {
                *v += n as f64;
            }
        }
    }
    let s: f64 = m.iter().sum();
    (s > 0.0).then(|| m.iter().map(|v| v / s).collect())
}

/// Arrange per-qubit values (logical order) as `[e1..eN, cav]`.
pub fn by_role(per_qubit: &[f64], roles: &[Role]) -> Result<PopulationDistribution> {
    if per_qubit.len() != roles.len() {
        return Err(Error::Mismatch(format!("{} values for {} roles", per_qubit.len(), roles.len())));
    }
    let n = roles.len() - 1;
    let mut out = vec![0.0; n + 1];
    for (&v, r) in per_qubit.iter().zip(roles) {
        match *r {
            Role::CavityEnv => out[n] = v,
            Role::Emitter(i) => out[i - 1] = v,
        }
    }
    PopulationDistribution::from_slice(&out)
}

/// Replace the populations of the `identical` emitters (1-based) by their
/// mean.
pub fn average_identical_emitters(pops: &PopulationDistribution, identical: &[usize], excited: usize) -> Result<PopulationDistribution> {
    if identical.contains(&excited) {
        return Err(Error::Mitigation(format!("emitter {excited} is initially excited and cannot be averaged")));
    }
    let n = pops.n_emitters();
    if let Some(&bad) = identical.iter().find(|&&i| i == 0 || i > n) {
        return Err(Error::Mitigation(format!("no emitter {bad}")));
    }
    if identical.len() < 2 {
        return Ok(pops.clone());
    }
    let mean = identical.iter().map(|&i| pops.emitter(i)).sum::<f64>() / identical.len() as f64;
    let mut e = pops.p_emitters.clone();
    for &i in identical {
        e[i - 1] = mean;
    }
    PopulationDistribution::new(e, pops.p_cav_env)
}

/// Counts of one time step per amplification factor, summed over
/// randomizations.
pub type FactorCounts = BTreeMap<u32, Counts>;

/// Execute one circuit under `model` with the configured RC and NOX.
/// Randomizations split `shots` evenly; every factor gets the full budget.
/// Job `(lambda, r)` samples with seed `derive_seed(seed, [lambda, r])`.
pub fn execute(circuit: &Circuit, model: &NoiseModel, shots: u64, config: &MitigationConfig, seed: u64) -> Result<FactorCounts> {
    config.validate()?;
    if shots == 0 {
        return Err(Error::InvalidParams("shots must be >= 1".into()));
    }
    let n_rand = config.rc_randomizations.max(1);
    if (n_rand as u64) > shots {
        return Err(Error::Mitigation(format!("{shots} shots cannot cover {n_rand} randomizations")));
    }
    config
        .factors()
        .into_par_iter()
        .map(|lambda| {
            let amplified = nox_amplify(circuit, lambda)?;
            let variants = if config.rc_randomizations >= 2 {
                randomize_compile(&amplified, n_rand, derive_seed(config.seed, &[seed, lambda as u64]))?
            } else {
                vec![amplified]
            };
            let (base, extra) = (shots / n_rand as u64, shots % n_rand as u64);
            let parts = variants
                .par_iter()
                .enumerate()
                .map(|(r, c)| {
                    let n = base + u64::from((r as u64) < extra);
                    apply_noisy(c, model, n, derive_seed(seed, &[lambda as u64, r as u64]))
                })
                .collect::<Result<Vec<_>>>()?;
            let mut total = Counts::new(circuit.width());
            for p in &parts {
                total.merge(p);
            }
            Ok((lambda, total))
        })
        .collect()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MitigatedStep {
    /// `None` when every shot of some factor was discarded.
    pub populations: Option<PopulationDistribution>,
    /// Extrapolated to zero noise when NOX is on, clamped to `[0, 1]`.
    pub discard_fraction: f64,
    /// Retained shots at the smallest factor.
    pub shots_kept: u64,
    pub clipped: bool,
}

/// Turn the counts of one step into mitigated populations.
pub fn mitigate_counts(counts: &FactorCounts, roles: &[Role], config: &MitigationConfig, excited: usize) -> Result<MitigatedStep> {
    if counts.is_empty() {
        return Err(Error::Empty("no factor counts".into()));
    }
    let mut per_factor = BTreeMap::new();
    let mut discards = Vec::new();
    let mut shots_kept = None;
    let mut undefined = false;
    for (&lambda, c) in counts {
        let (values, discard, kept) = if config.postselect {
            let ps = postselect(c);
            (ps.populations, ps.discard_fraction, ps.retained.shots())
        } else {
            (marginal_populations(c), 0.0, c.shots())
        };
        shots_kept.get_or_insert(kept);
        discards.push((lambda as f64, discard));
        match values {
            Some(v) => {
                per_factor.insert(lambda, by_role(&v, roles)?);
            }
            None => undefined = true,
        }
    }
    let (x, d): (Vec<f64>, Vec<f64>) = discards.into_iter().unzip();
    let extrapolate = config.extrapolates() && counts.len() >= 2;
    let discard_fraction =
        if extrapolate { extrapolate_zero(&x, &d, config.nox_order)?.clamp(0.0, 1.0) } else { d[0] };
    let shots_kept = shots_kept.unwrap_or(0);
    if undefined {
        return Ok(MitigatedStep { populations: None, discard_fraction, shots_kept, clipped: false });
    }
    let (pops, clipped) = if extrapolate {
        let e = extrapolate_step(&per_factor, config.nox_order)?;
        (e.populations, e.clipped)
    } else {
        (per_factor.into_values().next().unwrap(), false)
    };
    let pops = average_identical_emitters(&pops, &config.average_identical, excited)?;
    Ok(MitigatedStep { populations: Some(pops), discard_fraction, shots_kept, clipped })
}
