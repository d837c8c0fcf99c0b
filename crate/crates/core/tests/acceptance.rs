//! Acceptance criteria 1-10. Prints one PASS/FAIL line per criterion and
//! exits nonzero if any fails.

use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::fs;
use std::time::Instant;

use nalgebra::Matrix4;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use cqed_core::analysis::{bootstrap_ci, hellinger, mean_hellinger, Interval, TimeSeries};
use cqed_core::circuit::{simulate_statevector, synthesize_qmarina, Circuit, Counts};
use cqed_core::harness::{run_experiment, RunConfig, RunResult, TimeGrid};
use cqed_core::linalg::c;
use cqed_core::mitigation::{by_role, extrapolate_step, mitigate_counts, FactorCounts, MitigationConfig};
use cqed_core::model::{exact_series, lindblad_trajectory, rabi_frequency};
use cqed_core::transpiler::{kak_decompose, transpile, Entangler};
use cqed_core::{GateSetSpec, NoiseModel, PopulationDistribution, TcParams, TranspileOptions};

type Outcome = (bool, String);

fn ideal_populations(circuit: &Circuit) -> PopulationDistribution {
    let p = simulate_statevector(circuit).unwrap();
    let per_qubit: Vec<f64> = (0..circuit.width()).map(|q| p[1 << q]).collect();
    by_role(&per_qubit, circuit.roles()).unwrap()
}

fn max_abs(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

fn reference_targets() -> (Vec<f64>, Vec<PopulationDistribution>) {
    let times = TimeGrid::reference().times();
    let exact = exact_series(&TcParams::reference(), &times).unwrap();
    (times, exact)
}

fn criterion_1() -> Outcome {
    let start = Instant::now();
    let (_, exact) = reference_targets();
    let mut worst: f64 = 0.0;
    for target in &exact {
        let (circuit, _) = synthesize_qmarina(target, 1).unwrap();
        worst = worst.max(max_abs(&ideal_populations(&circuit).to_vec(), &target.to_vec()));
    }
    let secs = start.elapsed().as_secs_f64();
    (worst <= 1e-9 && secs < 10.0, format!("max error {worst:.2e} over 51 steps, {secs:.2} s"))
}

fn random_params(rng: &mut ChaCha8Rng) -> TcParams {
    let n = rng.random_range(1..=4);
    TcParams {
        n_emitters: n,
        couplings: (0..n).map(|_| rng.random_range(0.5..5.0)).collect(),
        kappa: rng.random_range(0.1..4.0),
        cavity_freq: rng.random_range(-2.0..2.0),
        emitter_freqs: (0..n).map(|_| rng.random_range(-2.0..2.0)).collect(),
        excited_emitter: rng.random_range(1..=n),
    }
}

fn oracle_error(params: &TcParams, times: &[f64]) -> f64 {
    let exact = exact_series(params, times).unwrap();
    let oracle = lindblad_trajectory(params, times, 2, 1e-4).unwrap();
    exact.iter().zip(&oracle).map(|(e, o)| max_abs(&e.to_vec(), &o.populations.to_vec())).fold(0.0, f64::max)
}

fn criterion_2() -> Outcome {
    let start = Instant::now();
    let (times, _) = reference_targets();
    let reference = oracle_error(&TcParams::reference(), &times);
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let sets: Vec<TcParams> = (0..50).map(|_| random_params(&mut rng)).collect();
    let grid: Vec<f64> = (0..=10).map(|i| 0.3 * i as f64).collect();
    let random = sets.iter().map(|p| oracle_error(p, &grid)).fold(0.0, f64::max);
    let secs = start.elapsed().as_secs_f64();
    (
        reference <= 1e-6 && random <= 1e-6 && secs < 120.0,
        format!("reference grid {reference:.2e}, 50 random sets {random:.2e}, {secs:.1} s"),
    )
}

fn haar_su4(rng: &mut ChaCha8Rng) -> Matrix4<cqed_core::linalg::C64> {
    let z = Matrix4::from_fn(|_, _| c(StandardNormal.sample(rng), StandardNormal.sample(rng)));
    let qr = z.qr();
    let (q, r) = (qr.q(), qr.r());
    q * Matrix4::from_diagonal(&nalgebra::Vector4::from_fn(|j, _| r[(j, j)] / r[(j, j)].norm()))
}

fn criterion_3() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let mut kak: f64 = 0.0;
    for _ in 0..1000 {
        let u = haar_su4(&mut rng);
        let k = kak_decompose(&u).unwrap();
        kak = kak.max((k.reassemble() - u).iter().map(|z| z.norm()).fold(0.0, f64::max));
    }

    let zz = TranspileOptions { use_zz: true, fuse_single_qubit: true, ..TranspileOptions::default() };
    let pipelines = [
        ("manual_ms", GateSetSpec::ion(Entangler::MsXx), TranspileOptions::default()),
        ("zz", GateSetSpec::ion(Entangler::Zz), zz.clone()),
        ("zz_mirror", GateSetSpec::ion(Entangler::Zz), TranspileOptions { mirror: true, ..zz.clone() }),
        ("ms_blocks", GateSetSpec::ion(Entangler::MsXx), zz),
        ("aqt", GateSetSpec::superconducting(4), TranspileOptions { route: true, fuse_single_qubit: true, ..TranspileOptions::default() }),
    ];
    let (times, exact) = reference_targets();
    let n = 3;
    let mut preserve: f64 = 0.0;
    let mut counts_ok = true;
    let mut notes = Vec::new();
    for (name, spec, opts) in &pipelines {
        let mut swaps = Vec::new();
        for (t, target) in times.iter().zip(&exact) {
            let (circuit, _) = synthesize_qmarina(target, 1).unwrap();
            let out = transpile(&circuit, spec, opts).unwrap();
            let ideal = simulate_statevector(&circuit).unwrap();
            preserve = preserve.max(max_abs(&simulate_statevector(&out.circuit).unwrap(), &ideal));
            let two = out.report.two_qubit_gates;
            match *name {
                "manual_ms" => counts_ok &= two == 3 * n,
                // At t = 0 every CRY angle vanishes and each block is a bare
                // CNOT needing one entangler.
                "zz" | "zz_mirror" => counts_ok &= if *t == 0.0 { two == n } else { two == 2 * n },
                "aqt" => swaps.push(out.report.swaps_inserted),
                _ => {}
            }
        }
        if *name == "aqt" {
            counts_ok &= swaps.iter().all(|&s| s == 1);
            notes.push(format!("aqt swaps {:?}", swaps.iter().collect::<std::collections::BTreeSet<_>>()));
        }
    }
    (
        kak <= 1e-9 && preserve <= 1e-9 && counts_ok,
        format!("KAK {kak:.2e} over 1000, pipelines {preserve:.2e}, gate counts {}, {}", if counts_ok { "exact" } else { "WRONG" }, notes.join(" ")),
    )
}

fn criterion_4() -> Outcome {
    let (_, exact) = reference_targets();
    let opts = TranspileOptions { use_zz: true, mirror: true, fuse_single_qubit: true, ..TranspileOptions::default() };
    let plain = TranspileOptions { mirror: false, ..opts.clone() };
    let (mut mirrored, mut unmirrored, mut never_worse) = (0.0, 0.0, true);
    let mut improved = Vec::new();
    for target in &exact {
        let (circuit, _) = synthesize_qmarina(target, 1).unwrap();
        let m = transpile(&circuit, &GateSetSpec::ion(Entangler::Zz), &opts).unwrap().report;
        let u = transpile(&circuit, &GateSetSpec::ion(Entangler::Zz), &plain).unwrap().report;
        never_worse &= m.total_entangling_angle <= u.total_entangling_angle + 1e-12;
        never_worse &= (m.unmirrored_entangling_angle - u.total_entangling_angle).abs() < 1e-9;
        mirrored += m.total_entangling_angle;
        unmirrored += u.total_entangling_angle;
        if m.total_entangling_angle < u.total_entangling_angle - 1e-12 {
            improved.push(1.0 - m.total_entangling_angle / u.total_entangling_angle);
        }
    }
    let reduction = 1.0 - mirrored / unmirrored;
    let per = if improved.is_empty() { 0.0 } else { improved.iter().sum::<f64>() / improved.len() as f64 };
    (
        never_worse && reduction >= 0.0,
        format!("angle never increases: {never_worse}; total reduction {:.2}%, {} improved circuits averaging {:.2}%", 100.0 * reduction, improved.len(), 100.0 * per),
    )
}

fn with_seed(mut c: RunConfig, seed: u64) -> RunConfig {
    c.seed = seed;
    c
}

fn criterion_5() -> Outcome {
    let mut ideal = RunConfig::preset("manual_ms").unwrap();
    ideal.backend.noise = NoiseModel::ideal();
    ideal.backend.fidelity_run = None;
    ideal.analysis.bootstrap_replicates = 20;
    let ideal_discard = run_experiment(&ideal).unwrap().summary.mean_discard_fraction;

    let variants = ["manual_ms", "zz", "zz_mirror", "zz_rc"];
    let mut in_band = true;
    let mut band = Vec::new();
    let mut wins = 0;
    let mut total = 0;
    for name in variants {
        let mut c = RunConfig::preset(name).unwrap();
        c.analysis.bootstrap_replicates = 20;
        let mut discards = Vec::new();
        for seed in 0..25 {
            let s = run_experiment(&with_seed(c.clone(), seed)).unwrap().summary;
            discards.push(s.mean_discard_fraction);
            total += 1;
            if s.mhd.unwrap() <= s.mhd_raw.unwrap() {
                wins += 1;
            }
        }
        let lo = discards.iter().cloned().fold(1.0, f64::min);
        let hi = discards.iter().cloned().fold(0.0, f64::max);
        in_band &= lo >= 0.08 && hi <= 0.35;
        band.push(format!("{name} {:.1}-{:.1}%", 100.0 * lo, 100.0 * hi));
    }
    let frac = wins as f64 / total as f64;
    (
        ideal_discard == 0.0 && in_band && frac >= 0.95,
        format!("noiseless discard {ideal_discard}; discard {}; postselected <= raw in {wins}/{total}", band.join(", ")),
    )
}

fn rc_run(randomizations: usize, seed: u64) -> RunResult {
    let mut c = RunConfig::preset("aqt").unwrap();
    c.name = format!("aqt_rc{randomizations}");
    c.shots = 2000;
    c.seed = seed;
    c.mitigation.rc_randomizations = randomizations;
    run_experiment(&c).unwrap()
}

fn criterion_6() -> Outcome {
    let ci = |r: &RunResult| -> Interval { r.summary.ci.unwrap() };
    let base = rc_run(0, 1);
    let b = ci(&base);
    let mut ok = true;
    let mut parts = vec![format!("no RC {:.4} [{:.4}, {:.4}]", base.summary.mhd.unwrap(), b.lo, b.hi)];
    let mut by_n = BTreeMap::new();
    for n in [20, 40, 80] {
        let r = rc_run(n, 1);
        let i = ci(&r);
        ok &= r.summary.mhd.unwrap() < base.summary.mhd.unwrap() && i.hi < b.lo;
        parts.push(format!("RC{n} {:.4} [{:.4}, {:.4}]", r.summary.mhd.unwrap(), i.lo, i.hi));
        by_n.insert(n, r);
    }
    let (m40, m80) = (by_n[&40].summary.mhd.unwrap(), by_n[&80].summary.mhd.unwrap());
    let width = ci(&by_n[&40]).width().max(ci(&by_n[&80]).width());
    let stable = (m40 - m80).abs() < width;
    parts.push(format!("|RC40 - RC80| {:.4} vs CI width {width:.4}", (m40 - m80).abs()));
    (ok && stable, parts.join("; "))
}

/// MHD of the lambda = 1 counts alone, with the rest of the stack unchanged.
fn unit_factor_mhd(r: &RunResult) -> f64 {
    let cfg = MitigationConfig { nox_factors: Vec::new(), ..r.config.mitigation.clone() };
    let pops: Vec<PopulationDistribution> = r
        .steps
        .iter()
        .map(|s| {
            let one: FactorCounts = [(1, s.counts[&1].clone())].into_iter().collect();
            mitigate_counts(&one, &s.roles, &cfg, 1).unwrap().populations.unwrap()
        })
        .collect();
    let sim = TimeSeries::new(r.exact.times().to_vec(), pops).unwrap();
    mean_hellinger(&sim, &r.exact).unwrap()
}

fn criterion_7() -> Outcome {
    let mut c = RunConfig::preset("aqt_rc40_nox").unwrap();
    c.analysis.bootstrap_replicates = 100;
    let r = run_experiment(&c).unwrap();
    let nox = r.summary.mhd.unwrap();
    let one = unit_factor_mhd(&r);

    let ideal = [0.6, 0.25, 0.15, 0.0];
    let (u, a) = (0.25, 0.9f64);
    let xs = [1.0, 3.0, 5.0];
    let data: BTreeMap<u32, PopulationDistribution> = xs
        .iter()
        .map(|&l| {
            let s = a.powf(l);
            (l as u32, PopulationDistribution::from_slice(&ideal.map(|p| p * s + u * (1.0 - s))).unwrap())
        })
        .collect();
    let fit = extrapolate_step(&data, 1).unwrap().populations.to_vec();
    // Least-squares line through a^x at x = 1, 3, 5: intercept
    // mean(y) - slope * mean(x), slope = sum (x - 3) y / 8.
    let ys = xs.map(|x| a.powf(x));
    let slope = (-2.0 * ys[0] + 2.0 * ys[2]) / 8.0;
    let s0 = ys.iter().sum::<f64>() / 3.0 - 3.0 * slope;
    let closed: Vec<f64> = ideal.iter().map(|p| p * s0 + u * (1.0 - s0)).collect();
    let toy = max_abs(&fit, &closed);
    (
        nox < one && toy < 1e-12,
        format!("MHD lambda=1 {one:.4} -> extrapolated {nox:.4}; toy intercept error {toy:.1e}"),
    )
}

fn criterion_8() -> Outcome {
    let omega = rabi_frequency(&TcParams::reference()).unwrap();
    let expected = 3f64.sqrt() * 4.0;
    let mut ok = (omega - expected).abs() < 1e-12;
    let mut notes = Vec::new();
    let mut exact_peak = None;
    for name in cqed_core::harness::PRESETS {
        let mut c = RunConfig::preset(name).unwrap();
        c.analysis.bootstrap_replicates = 20;
        let s = run_experiment(&c).unwrap().summary;
        let bin = s.bin_width;
        let peak = s.peak_frequency;
        let within = peak.is_some_and(|p| (p - s.exact_peak_frequency).abs() <= bin + 1e-12);
        ok &= within;
        exact_peak = Some((s.exact_peak_frequency, bin));
        notes.push(format!("{name} {}", peak.map(|p| format!("{p:.3}")).unwrap_or("none".into())));
    }
    let (fe, bin) = exact_peak.unwrap();
    let consistent = (fe - omega / (2.0 * PI)).abs() <= bin;
    (
        ok && consistent,
        format!("exact peak {fe:.3} cycles/ns vs Omega/2pi {:.3} (bin {bin:.3}); noisy peaks {}", omega / (2.0 * PI), notes.join(", ")),
    )
}

fn criterion_9() -> Outcome {
    let same = hellinger(&[0.3, 0.7], &[0.3, 0.7]).unwrap();
    let disjoint = hellinger(&[1.0, 0.0], &[0.0, 1.0]).unwrap();
    let half = hellinger(&[1.0, 0.0], &[0.5, 0.5]).unwrap();
    let metric = same == 0.0 && (disjoint - 1.0).abs() < 1e-12 && (half - 0.541196100146197).abs() < 1e-12;

    let (times, exact) = reference_targets();
    let series = TimeSeries::new(times, exact).unwrap();
    let mhd0 = mean_hellinger(&series, &series).unwrap();

    let truth: Vec<Vec<f64>> = (0..7)
        .map(|t| {
            let a = 0.05 + 0.08 * t as f64;
            vec![a, 0.3, 0.1, 0.6 - a]
        })
        .collect();
    let reference = [0.05, 0.05, 0.6, 0.3];
    let true_mhd = truth.iter().map(|p| hellinger(p, &reference).unwrap()).sum::<f64>() / truth.len() as f64;
    let statistic = |steps: &[Counts]| -> cqed_core::Result<f64> {
        let h = steps
            .iter()
            .map(|c| {
                let n = c.shots() as f64;
                let p: Vec<f64> = (0..4).map(|i| c.get(i) as f64 / n).collect();
                hellinger(&p, &reference)
            })
            .collect::<cqed_core::Result<Vec<_>>>()?;
        Ok(h.iter().sum::<f64>() / h.len() as f64)
    };
    let trials = 200;
    let mut covered = 0;
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    for trial in 0..trials {
        let steps: Vec<Counts> = truth.iter().map(|p| cqed_core::circuit::sample_from_probs(p, 2, 400, &mut rng)).collect();
        let ci = bootstrap_ci(&steps, statistic, 1000, 0.95, trial).unwrap();
        if ci.contains(true_mhd) {
            covered += 1;
        }
    }
    let coverage = covered as f64 / trials as f64;
    (
        metric && mhd0 == 0.0 && (coverage - 0.95).abs() <= 0.04,
        format!("H = {same}, {disjoint}, {half:.4}; MHD(identical) = {mhd0}; bootstrap coverage {:.1}%", 100.0 * coverage),
    )
}

fn criterion_10() -> Outcome {
    let dir = tempfile::tempdir().unwrap();
    let mut differing = Vec::new();
    let mut files = 0;
    for name in ["zz_rc", "aqt_rc40_nox"] {
        let c = RunConfig::preset(name).unwrap();
        let a = run_experiment(&c).unwrap().persist(&dir.path().join(format!("{name}_a"))).unwrap();
        let b = run_experiment(&c).unwrap().persist(&dir.path().join(format!("{name}_b"))).unwrap();
        for entry in fs::read_dir(&a).unwrap() {
            let f = entry.unwrap().file_name();
            let f = f.to_string_lossy();
            if !(f.ends_with(".csv") || f.ends_with(".json")) {
                continue;
            }
            files += 1;
            if fs::read(a.join(&*f)).unwrap() != fs::read(b.join(&*f)).unwrap() {
                differing.push(format!("{name}/{f}"));
            }
        }
    }
    (differing.is_empty(), format!("{files} CSV/JSON files compared, differing: {differing:?}"))
}

fn main() {
    let criteria: [(&str, fn() -> Outcome); 10] = [
        ("noiseless end-to-end fidelity", criterion_1),
        ("oracle equivalence", criterion_2),
        ("transpiler soundness", criterion_3),
        ("mirroring", criterion_4),
        ("postselection", criterion_5),
        ("RC effectiveness", criterion_6),
        ("NOX effectiveness", criterion_7),
        ("spectral accuracy", criterion_8),
        ("metric unit tests", criterion_9),
        ("determinism", criterion_10),
    ];
    let mut failed = 0;
    for (i, (name, f)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let (ok, detail) = f();
        failed += usize::from(!ok);
        println!("{} criterion {} ({name}): {detail} [{:.1} s]", if ok { "PASS" } else { "FAIL" }, i + 1, start.elapsed().as_secs_f64());
    }
    println!("{} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed > 0 {
        std::process::exit(1);
    }
}
