use serde::{Deserialize, Serialize};

use super::LoadedRun;
use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ComparisonRow {
    pub variant: String,
    pub mhd_raw: Option<f64>,
    pub mhd_postselected: Option<f64>,
    pub ci_lo: Option<f64>,
    pub ci_hi: Option<f64>,
    pub mean_discard_fraction: f64,
    pub total_entangling_angle: f64,
}

/// One row per run, in input order. All runs must share the model and grid.
pub fn compare_variants(runs: &[LoadedRun]) -> Result<Vec<ComparisonRow>> {
    let first = runs.first().ok_or_else(|| Error::Empty("no runs to compare".into()))?;
    for r in &runs[1..] {
        if r.config.grid != first.config.grid {
            return Err(Error::Mismatch(format!("{} and {} use different time grids", first.config.name, r.config.name)));
        }
        if r.config.model != first.config.model {
            return Err(Error::Mismatch(format!("{} and {} simulate different models", first.config.name, r.config.name)));
        }
    }
    Ok(runs
        .iter()
        .map(|r| {
            let s = &r.summary;
            ComparisonRow {
                variant: s.name.clone(),
                mhd_raw: s.mhd_raw,
                mhd_postselected: if r.config.mitigation.postselect { s.mhd } else { None },
                ci_lo: s.ci.map(|c| c.lo),
                ci_hi: s.ci.map(|c| c.hi),
                mean_discard_fraction: s.mean_discard_fraction,
                total_entangling_angle: s.total_entangling_angle,
            }
        })
        .collect())
}

fn cell(v: Option<f64>) -> String {
    v.map(|x| format!("{x:.4}")).unwrap_or_else(|| "-".into())
}

/// Fixed-width text table.
pub fn render_table(rows: &[ComparisonRow]) -> String {
    let width = rows.iter().map(|r| r.variant.len()).max().unwrap_or(0).max(7);
    let mut out = format!(
        "{:<width$}  {:>8}  {:>8}  {:>17}  {:>8}  {:>9}\n",
        "variant", "mhd_raw", "mhd_ps", "ci", "discard", "ent_angle"
    );
    for r in rows {
        let ci = match (r.ci_lo, r.ci_hi) {
            (Some(lo), Some(hi)) => format!("[{lo:.4}, {hi:.4}]"),
            _ => "-".into(),
        };
        out.push_str(&format!(
            "{:<width$}  {:>8}  {:>8}  {:>17}  {:>8.4}  {:>9.3}\n",
            r.variant,
            cell(r.mhd_raw),
            cell(r.mhd_postselected),
            ci,
            r.mean_discard_fraction,
            r.total_entangling_angle
        ));
    }
    out
}
