//! Measured gate-fidelity tables and their conversion to depolarizing
//! probabilities.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Conversion rule used by [`depolarizing_from_fidelity`].
pub const FIDELITY_CONVENTION: &str = "average gate fidelity F of a d-dimensional depolarizing channel: p = (1 - F) d / (d - 1)";

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PairFidelity {
    /// Wires, ascending.
    pub pair: [usize; 2],
    pub connectivity: String,
    pub fidelity: f64,
    pub minus: f64,
    pub plus: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FidelityTable {
    pub runs: Vec<Vec<PairFidelity>>,
    pub single_qubit: f64,
}

/// Depolarizing probability with average gate fidelity `f` on `d` levels.
pub fn depolarizing_from_fidelity(f: f64, d: usize) -> Result<f64> {
    if !(f > 0.0 && f <= 1.0) {
        return Err(Error::InvalidFidelity(f));
    }
    let d = d as f64;
    Ok(((1.0 - f) * d / (d - 1.0)).min(1.0))
}

fn parse_qubit(s: &str) -> Option<usize> {
    let s = s.trim();
    let s = s.strip_prefix("q[").and_then(|r| r.strip_suffix(']')).or_else(|| s.strip_prefix('q')).unwrap_or(s);
    s.parse().ok()
}

impl FidelityTable {
    /// The four-run trapped-ion calibration shipped with the crate.
    pub fn qscout() -> FidelityTable {
        FidelityTable::parse(include_str!("../../data/qscout_fidelities.txt")).expect("bundled table parses")
    }

    /// Parse the text form: `single_qubit F`, then `run K` headers each
    /// followed by `qA,qB | connectivity | fidelity | minus | plus` rows.
    /// `#` starts a comment.
    pub fn parse(text: &str) -> Result<FidelityTable> {
        let mut runs: Vec<Vec<PairFidelity>> = Vec::new();
        let mut single = None;
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            let err = |msg: String| Error::Parse { line: i + 1, msg };
            if line.is_empty() {
                continue;
            }
            if let Some(rest) = line.strip_prefix("single_qubit") {
                let f: f64 = rest.trim().parse().map_err(|_| err(format!("bad fidelity {:?}", rest.trim())))?;
                check_fidelity(f).map_err(|_| err(format!("fidelity {f} outside (0, 1]")))?;
                single = Some(f);
                continue;
            }
            if let Some(rest) = line.strip_prefix("run") {
                let k: usize = rest.trim().parse().map_err(|_| err(format!("bad run index {:?}", rest.trim())))?;
                if k != runs.len() {
                    return Err(err(format!("expected run {}, found run {k}", runs.len())));
                }
                runs.push(Vec::new());
                continue;
            }
            let cols: Vec<&str> = line.split('|').map(str::trim).collect();
            if cols.len() != 5 {
                return Err(err(format!("expected 5 columns, found {}", cols.len())));
            }
            let run = runs.last_mut().ok_or_else(|| err("row before any run header".into()))?;
            let qs: Vec<usize> = cols[0]
                .trim_matches(|c| c == '{' || c == '}')
                .split(',')
                .map(|q| parse_qubit(q).ok_or_else(|| err(format!("bad qubit {q:?}"))))
                .collect::<Result<_>>()?;
            let [a, b] = qs[..] else { return Err(err(format!("pair {:?} needs two qubits", cols[0]))) };
            if a == b {
                return Err(err(format!("pair {:?} repeats a qubit", cols[0])));
            }
            let num = |s: &str| -> Result<f64> {
                s.trim_start_matches(['+', '-']).parse().map_err(|_| err(format!("bad number {s:?}")))
            };
            let fidelity: f64 = cols[2].parse().map_err(|_| err(format!("bad fidelity {:?}", cols[2])))?;
            check_fidelity(fidelity).map_err(|_| err(format!("fidelity {fidelity} outside (0, 1]")))?;
            run.push(PairFidelity {
                pair: [a.min(b), a.max(b)],
                connectivity: cols[1].to_string(),
                fidelity,
                minus: num(cols[3])?,
                plus: num(cols[4])?,
            });
        }
        let single_qubit = single.ok_or(Error::Parse { line: 0, msg: "missing single_qubit line".into() })?;
        if runs.is_empty() {
            return Err(Error::Parse { line: 0, msg: "no runs".into() });
        }
        Ok(FidelityTable { runs, single_qubit })
    }

    pub fn validate(&self) -> Result<()> {
        check_fidelity(self.single_qubit)?;
        for row in self.runs.iter().flatten() {
            check_fidelity(row.fidelity)?;
        }
        Ok(())
    }
}

fn check_fidelity(f: f64) -> Result<()> {
    if f > 0.0 && f <= 1.0 {
        Ok(())
    } else {
        Err(Error::InvalidFidelity(f))
    }
}
