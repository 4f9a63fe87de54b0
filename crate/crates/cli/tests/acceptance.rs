//! Acceptance checks, one line per criterion. Run with
//! `cargo test -p gridlock-cli --test acceptance`.

use gridlock_cli::netgains_rows;
use gridlock_core::proposition::{monte_carlo_prob_sp, verify_all, SweepGrid};
use gridlock_core::scenario::{all_scenarios, all_treatments};
use gridlock_core::stats::ols::{ols_cluster, Design, OlsOptions};
use gridlock_core::stats::{
    analyze, build_design, fdr_sharpened, fisher_exact, fwer_adjust, power_two_proportions, AnalysisSpec,
    ContingencyTable2x2, Control, FamilyMember, Hypothesis, RegressionSpec, ResamplingSpec, Sidedness,
};
use gridlock_core::synth::{generate_dataset, BehaviorConfig, CovariateMarginals};
use gridlock_core::{prob_sp, net_gain_sp, Shock, ShockDistribution, ShockFamily};
use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::time::{Duration, Instant};

struct Outcome {
    pass: bool,
    detail: String,
}

fn report(id: u32, name: &str, start: Instant, out: Outcome) -> bool {
    println!(
        "[{}] criterion {id}: {name}: {} ({:.2?})",
        if out.pass { "PASS" } else { "FAIL" },
        out.detail,
        start.elapsed()
    );
    out.pass
}

const TABLE: [[i64; 7]; 14] = [
    [-24, -24, -24, -24, -96, -24, -24],
    [-24, -24, -24, -24, -96, -24, -24],
    [-24, -24, -24, -24, -96, -24, -24],
    [-24, -24, -24, -24, -96, -24, -24],
    [40, -72, 40, -72, -32, 40, 40],
    [-24, -24, -24, -24, -96, -24, -24],
    [-104, -104, -104, -104, -176, -104, -104],
    [-24, -24, -24, -24, -96, -24, -24],
    [-24, -24, -24, -24, -96, -24, -24],
    [56, 56, 56, 56, -16, 56, 56],
    [-24, -24, -24, -24, -96, -24, -24],
    [-24, -24, -24, -24, -96, -24, -24],
    [-24, -24, -24, -24, -96, -24, -24],
    [-24, -24, -24, -24, -96, -24, -24],
];

fn net_gains_table() -> Outcome {
    let start = Instant::now();
    let rows = netgains_rows();
    let elapsed = start.elapsed();
    let mut matched = 0;
    for (row, expect) in rows.iter().zip(TABLE.iter()) {
        for (cell, want) in row[6..].iter().zip(expect) {
            if cell.parse::<i64>().ok() == Some(*want) {
                matched += 1;
            }
        }
    }
    Outcome {
        pass: rows.len() == 14 && matched == 98 && elapsed < Duration::from_secs(1),
        detail: format!("{matched}/98 cells equal, {elapsed:.2?}"),
    }
}

fn proposition_sweep() -> Outcome {
    let start = Instant::now();
    let grid = SweepGrid::<f64>::dense();
    let reports = verify_all(&grid).expect("dense grid is valid");
    let violations: usize = reports.iter().map(|r| r.violations.len()).sum();
    let cases: usize = reports.iter().map(|r| r.cases_checked).sum();
    let mut families: Vec<ShockFamily> = grid.shocks().iter().map(|s| s.family()).collect();
    families.dedup();
    let elapsed = start.elapsed();
    Outcome {
        pass: violations == 0
            && grid.parameter_points() >= 10_000
            && families.len() >= 3
            && elapsed < Duration::from_secs(30),
        detail: format!(
            "{} points x {} shocks ({} families), {cases} checks, {violations} violations",
            grid.parameter_points(),
            grid.shocks().len(),
            families.len()
        ),
    }
}

fn monte_carlo() -> Outcome {
    let start = Instant::now();
    let shock = Shock::default();
    let mut worst: f64 = 0.0;
    for (s, sc) in all_scenarios().iter().enumerate() {
        for (t, tr) in all_treatments().iter().enumerate() {
            let params = tr.params::<f64>();
            let exact = prob_sp(net_gain_sp(&sc.profile, &params), &shock);
            let mc = monte_carlo_prob_sp(&sc.profile, &params, &shock, 1_000_000, (s * 7 + t) as u64);
            worst = worst.max((mc.estimate - exact).abs());
        }
    }
    let elapsed = start.elapsed();
    Outcome {
        pass: worst < 0.005 && elapsed < Duration::from_secs(60),
        detail: format!("98 cells at 1e6 draws, max |MC - F(delta)| = {worst:.5}"),
    }
}

fn choose(n: u64, k: u64) -> u128 {
    if k > n {
        return 0;
    }
    (0..k).fold(1u128, |acc, i| acc * (n - i) as u128 / (i + 1) as u128)
}

/// Hypergeometric tails by integer enumeration.
fn fisher_oracle(t: &ContingencyTable2x2, side: Sidedness) -> f64 {
    let (r1, r2, c1) = (t.a + t.b, t.c + t.d, t.a + t.c);
    let lo = c1.saturating_sub(r2);
    let hi = r1.min(c1);
    let w = |x: u64| choose(r1, x) * choose(r2, c1 - x);
    let total: u128 = (lo..=hi).map(w).sum();
    let obs = w(t.a);
    let num: u128 = match side {
        Sidedness::OneSidedGreater => (t.a..=hi).map(w).sum(),
        Sidedness::OneSidedLess => (lo..=t.a).map(w).sum(),
        Sidedness::TwoSided => (lo..=hi).map(w).filter(|&v| v <= obs).sum(),
    };
    num as f64 / total as f64
}

fn fisher_exhaustive() -> Outcome {
    let mut worst: f64 = 0.0;
    let mut tables = 0;
    for n in 1..=24u64 {
        for a in 0..=n {
            for b in 0..=n - a {
                for c in 0..=n - a - b {
                    let t = ContingencyTable2x2::new(a, b, c, n - a - b - c).unwrap();
                    tables += 1;
                    for side in [Sidedness::OneSidedGreater, Sidedness::OneSidedLess, Sidedness::TwoSided] {
                        worst = worst.max((fisher_exact(&t, side) - fisher_oracle(&t, side)).abs());
                    }
                }
            }
        }
    }
    Outcome {
        pass: worst < 1e-12,
        detail: format!("{tables} tables x 3 alternatives, max |dp| = {worst:.2e}"),
    }
}

fn ols_identities() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(17);
    let groups = 4usize;
    let n = 400;
    let g: Vec<usize> = (0..n).map(|i| i % groups).collect();
    let x = DMatrix::from_fn(n, groups, |i, j| if j == 0 { 1.0 } else { (g[i] == j) as u8 as f64 });
    let y = DVector::from_fn(n, |i, _| g[i] as f64 * 0.3 + rng.random::<f64>());
    let clusters: Vec<u64> = (0..n as u64).map(|i| i / 8).collect();
    let names = (0..groups).map(|j| format!("g{j}")).collect();
    let fit = ols_cluster(&Design::new(names, x, y.clone(), clusters).unwrap(), &OlsOptions::default()).unwrap();
    let mean = |k: usize| {
        let v: Vec<f64> = (0..n).filter(|&i| g[i] == k).map(|i| y[i]).collect();
        v.iter().sum::<f64>() / v.len() as f64
    };
    let mut worst_mean: f64 = (fit.beta[0] - mean(0)).abs();
    for k in 1..groups {
        worst_mean = worst_mean.max((fit.beta[k] - (mean(k) - mean(0))).abs());
    }

    let rows = [(0.0, 1.0), (1.0, 3.0), (0.0, 2.0), (1.0, 2.0), (0.0, 0.0), (1.0, 7.0)];
    let x = DMatrix::from_fn(6, 2, |i, j| if j == 0 { 1.0 } else { rows[i].0 });
    let y = DVector::from_fn(6, |i, _| rows[i].1);
    let small = Design::new(vec!["const".into(), "d".into()], x, y, vec![1, 1, 2, 2, 3, 3]).unwrap();
    let fit = ols_cluster(&small, &OlsOptions::default()).unwrap();
    let c = 3.0 / 2.0 * 5.0 / 4.0;
    let hand = [[2.0, -7.0], [-7.0, 26.0]];
    let mut worst_vcov: f64 = 0.0;
    for (i, row) in hand.iter().enumerate() {
        for (j, v) in row.iter().enumerate() {
            worst_vcov = worst_vcov.max((fit.vcov[(i, j)] - c * v / 9.0).abs());
        }
    }
    worst_vcov = worst_vcov.max((fit.se[1] - (c * 26.0 / 9.0f64).sqrt()).abs());
    Outcome {
        pass: worst_mean < 1e-10 && worst_vcov < 1e-10,
        detail: format!("group means {worst_mean:.1e}, sandwich {worst_vcov:.1e}"),
    }
}

/// Same outcome for every member, each with its own random dummy: nine true
/// nulls correlated through the shared outcome and cluster effects.
fn null_family(rng: &mut ChaCha8Rng, clusters: u64, per: usize, m: usize) -> Vec<Design> {
    let n = clusters as usize * per;
    let mut y = DVector::zeros(n);
    let mut cl = Vec::with_capacity(n);
    for g in 0..clusters {
        let u: f64 = rng.random::<f64>() - 0.5;
        for t in 0..per {
            y[g as usize * per + t] = u + rng.random::<f64>() - 0.5;
            cl.push(g);
        }
    }
    (0..m)
        .map(|k| {
            let cluster_level = k % 2 == 0;
            let cluster_draw: Vec<bool> = (0..clusters).map(|_| rng.random::<bool>()).collect();
            let x = DMatrix::from_fn(n, 2, |i, j| {
                if j == 0 {
                    1.0
                } else if cluster_level {
                    cluster_draw[i / per] as u8 as f64
                } else {
                    ((i + k) % 2) as f64
                }
            });
            Design::new(vec!["const".into(), "d".into()], x, y.clone(), cl.clone()).unwrap()
        })
        .collect()
}

/// Two-stage sharpened procedure run level by level.
fn fdr_definition(p: &[f64]) -> Vec<f64> {
    let m = p.len();
    let step_up = |level: f64| -> Option<f64> {
        let mut s = p.to_vec();
        s.sort_by(f64::total_cmp);
        (1..=m).rev().find(|&k| s[k - 1] <= k as f64 * level / m as f64).map(|k| s[k - 1])
    };
    let mut q = vec![1.0; m];
    for k in (1..=10_000u32).rev() {
        let level = k as f64 / 10_000.0;
        let q1 = level / (1.0 + level);
        let r1 = step_up(q1).map_or(0, |cut| p.iter().filter(|&&v| v <= cut).count());
        let cut = if r1 == 0 {
            None
        } else if r1 == m {
            Some(f64::INFINITY)
        } else {
            step_up(q1 * m as f64 / (m - r1) as f64)
        };
        if let Some(cut) = cut {
            for (i, &v) in p.iter().enumerate() {
                if v <= cut {
                    q[i] = level;
                }
            }
        }
    }
    q
}

fn multiple_testing(sims: usize, reps: usize) -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let mut family_rejections = 0;
    for sim in 0..sims {
        let designs = null_family(&mut rng, 60, 6, 9);
        let family: Vec<FamilyMember> = designs.iter().map(|d| FamilyMember { design: d, coef: 1 }).collect();
        let res = fwer_adjust(&family, &ResamplingSpec { reps, seed: sim as u64 }).unwrap();
        if res.adjusted.iter().any(|&p| p <= 0.05) {
            family_rejections += 1;
        }
    }
    let rate = family_rejections as f64 / sims as f64;
    let bound = 0.05 + 2.0 * (0.05f64 * 0.95 / sims as f64).sqrt();

    let mut fdr_mismatch = 0;
    for _ in 0..50 {
        let m = rng.random_range(2..=25);
        let p: Vec<f64> = (0..m)
            .map(|_| {
                let u: f64 = rng.random();
                if rng.random::<f64>() < 0.4 { u * 0.02 } else { u }
            })
            .collect();
        if fdr_sharpened(&p).unwrap() != fdr_definition(&p) {
            fdr_mismatch += 1;
        }
    }
    Outcome {
        pass: rate <= bound && fdr_mismatch == 0,
        detail: format!(
            "FWER {family_rejections}/{sims} = {rate:.3} (bound {bound:.4}, {reps} reps); FDR oracle mismatches {fdr_mismatch}/50"
        ),
    }
}

fn power_claim() -> Outcome {
    let n = power_two_proportions(0.212, 0.229, 0.05, 0.80, Sidedness::OneSidedGreater).unwrap();
    Outcome {
        pass: n > 7000,
        detail: format!("n per group = {n} (normal approximation, one-sided)"),
    }
}

fn significant(report: &gridlock_core::stats::InferenceReport, h: Hypothesis, positive: bool) -> bool {
    let r = report.row(h.label()).expect("hypothesis row");
    r.p_unadjusted < 0.05 && (r.estimate > 0.0) == positive
}

fn directional(seeds: u64, bias_seeds: u64, bias: f64) -> Outcome {
    let spec = AnalysisSpec {
        bootstrap_reps: 0,
        ..AnalysisSpec::default()
    };
    let counts = [500; 7];
    let pattern = [(Hypothesis::H1, true), (Hypothesis::H2, true), (Hypothesis::H3, false), (Hypothesis::H4, false)];
    let mut hits = 0;
    for seed in 0..seeds {
        let ds = generate_dataset(&counts, &BehaviorConfig::rational(), &CovariateMarginals::default(), seed).unwrap();
        let rep = analyze(&ds, &spec).unwrap();
        if pattern.iter().all(|&(h, pos)| significant(&rep, h, pos)) {
            hits += 1;
        }
    }
    let biased = BehaviorConfig {
        gridlock_sp_bias: bias,
        ..BehaviorConfig::rational()
    };
    let mut flipped = 0;
    for seed in 0..bias_seeds {
        let ds = generate_dataset(&counts, &biased, &CovariateMarginals::default(), 10_000 + seed).unwrap();
        let rep = analyze(&ds, &spec).unwrap();
        if significant(&rep, Hypothesis::H3, true) && significant(&rep, Hypothesis::H4, true) {
            flipped += 1;
        }
    }
    Outcome {
        pass: hits * 100 >= 95 * seeds && flipped == bias_seeds,
        detail: format!(
            "rational sign pattern in {hits}/{seeds} seeds; with gridlock bias {bias}, H3>0 and H4>0 in {flipped}/{bias_seeds}"
        ),
    }
}

fn coverage(reps: u64) -> Outcome {
    let c = 400.0;
    let behavior = BehaviorConfig {
        shock: ShockDistribution::new(ShockFamily::Uniform, c).unwrap(),
        ..BehaviorConfig::rational()
    };
    let spec = RegressionSpec {
        hypotheses: vec![Hypothesis::H1, Hypothesis::H2, Hypothesis::H3, Hypothesis::H4],
        controls: Control::DEFAULT.iter().copied().filter(|c| c.covariate().is_some()).collect(),
        ..RegressionSpec::default()
    };
    let rents = 24.0;
    let truth = |name: &str| -> f64 {
        match name {
            "const" => 0.5 - rents / (2.0 * c),
            "H1" => 64.0 / (2.0 * c),
            "H2" => 80.0 / (2.0 * c),
            "H3" => -48.0 / (2.0 * c),
            "H4" => -80.0 / (2.0 * c),
            _ => 0.0,
        }
    };
    let mut covered: Vec<(String, u64)> = Vec::new();
    for seed in 0..reps {
        let ds = generate_dataset(&[0, 0, 300, 300, 0, 0, 0], &behavior, &CovariateMarginals::default(), 500 + seed).unwrap();
        let md = build_design(&ds, &spec).unwrap();
        let fit = ols_cluster(&md.design, &OlsOptions::default()).unwrap();
        if covered.is_empty() {
            covered = fit.names.iter().map(|n| (n.clone(), 0)).collect();
        }
        for (j, name) in fit.names.iter().enumerate() {
            let (lo, hi) = fit.conf_int(j, 0.95);
            if lo <= truth(name) && truth(name) <= hi {
                covered[j].1 += 1;
            }
        }
    }
    let worst = covered.iter().min_by_key(|c| c.1).cloned().unwrap();
    let summary: Vec<String> = covered.iter().map(|(n, k)| format!("{n} {k}")).collect();
    Outcome {
        pass: covered.iter().all(|c| c.1 * 100 >= 90 * reps),
        detail: format!("coverage per coefficient out of {reps}: {}; min {} ({})", summary.join(", "), worst.1, worst.0),
    }
}

fn main() {
    let args: Vec<String> = std::env::args().collect();
    if args.iter().any(|a| a == "--list") {
        return;
    }
    let mut ok = true;
    let t = Instant::now();
    ok &= report(1, "net-gain table", t, net_gains_table());
    let t = Instant::now();
    ok &= report(2, "proposition sweep", t, proposition_sweep());
    let t = Instant::now();
    ok &= report(3, "Monte Carlo vs F(delta)", t, monte_carlo());
    let t = Instant::now();
    ok &= report(4, "Fisher vs enumeration", t, fisher_exhaustive());
    let t = Instant::now();
    ok &= report(5, "OLS identities", t, ols_identities());
    let t = Instant::now();
    ok &= report(6, "multiple testing control", t, multiple_testing(200, 1000));
    let t = Instant::now();
    ok &= report(7, "power", t, power_claim());
    let t = Instant::now();
    let out = directional(100, 10, 100.0);
    let within = t.elapsed() < Duration::from_secs(300);
    ok &= report(
        8,
        "directional replication",
        t,
        Outcome {
            pass: out.pass && within,
            detail: out.detail,
        },
    );
    let t = Instant::now();
    ok &= report(9, "CI coverage", t, coverage(100));
    if !ok {
        std::process::exit(1);
    }
}
