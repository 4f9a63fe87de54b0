//! Numerical verification of the comparative statics of `Pr(SP)`.
//!
//! * Gridlock effects: relative to no gridlock, gridlock weakly raises
//!   `Pr(SP)` with a biased pair and `q > 1/2` or with an unbiased executive,
//!   and weakly reduces it with a biased pair and `q ≤ 1/2` or with an
//!   unbiased legislature.
//! * `Pr(SP)` is non-decreasing in `q` for a reformist executive facing a
//!   conservative legislature, and constant in `q` otherwise.
//! * `Pr(SP)` is non-increasing in rents.
//!
//! Every check goes through [`net_gain_sp`] and [`prob_sp`], so a sweep
//! exercises the model implementation rather than a restatement of it.

use crate::model::{net_gain_sp, prob_sp, ModelError, ModelParams, ScenarioProfile, ShockDistribution, ShockFamily};
use crate::rng::{derive_seed, stream_rng};
use crate::scalar::Real;
use crate::scenario::{all_scenarios, scenario, Scenario};
use rayon::prelude::*;
use std::fmt;
use thiserror::Error;

/// Absolute tolerance on CDF differences for weak inequalities.
pub const WEAK_TOL: f64 = 1e-12;
/// A CDF value within this distance of 0 or 1 counts as saturated.
const SATURATION: f64 = 1e-12;
const MC_BATCH: u64 = 1 << 16;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GridError {
    #[error("grid list `{0}` is empty")]
    Empty(&'static str),
    #[error("grid list `{0}` must be sorted ascending")]
    Unsorted(&'static str),
    #[error(transparent)]
    Model(#[from] ModelError),
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepGrid<T> {
    q_values: Vec<T>,
    a_values: Vec<T>,
    r_values: Vec<T>,
    shocks: Vec<ShockDistribution<T>>,
}

impl<T: Real> SweepGrid<T> {
    pub fn new(
        q_values: Vec<T>,
        a_values: Vec<T>,
        r_values: Vec<T>,
        shocks: Vec<ShockDistribution<T>>,
    ) -> Result<Self, GridError> {
        for (name, list) in [("q", &q_values), ("a", &a_values), ("r", &r_values)] {
            if list.is_empty() {
                return Err(GridError::Empty(name));
            }
        }
        if shocks.is_empty() {
            return Err(GridError::Empty("shocks"));
        }
        for &q in &q_values {
            for &a in &a_values {
                for &r in &r_values {
                    ModelParams::new(q, a, r)?;
                }
            }
        }
        Ok(Self {
            q_values,
            a_values,
            r_values,
            shocks,
        })
    }

    /// q ∈ {0, 0.1, …, 1}, a ∈ {0, 20, 80, 200}, r ∈ {0, 24, 96, 300},
    /// three shock families at three scales each.
    pub fn standard() -> Self {
        let f = T::from_f64_lossy;
        Self::new(
            (0..=10).map(|i| f(i as f64 / 10.0)).collect(),
            [0.0, 20.0, 80.0, 200.0].into_iter().map(f).collect(),
            [0.0, 24.0, 96.0, 300.0].into_iter().map(f).collect(),
            default_shocks(),
        )
        .expect("standard grid is valid")
    }

    /// Denser grid: 101 priors × 10 weights × 10 rent levels (10 100 points).
    pub fn dense() -> Self {
        let f = T::from_f64_lossy;
        Self::new(
            (0..=100).map(|i| f(i as f64 / 100.0)).collect(),
            [0.0, 5.0, 10.0, 20.0, 40.0, 80.0, 120.0, 160.0, 200.0, 300.0]
                .into_iter()
                .map(f)
                .collect(),
            [0.0, 1.0, 6.0, 12.0, 24.0, 48.0, 96.0, 150.0, 200.0, 300.0]
                .into_iter()
                .map(f)
                .collect(),
            default_shocks(),
        )
        .expect("dense grid is valid")
    }

    pub fn q_values(&self) -> &[T] {
        &self.q_values
    }

    pub fn a_values(&self) -> &[T] {
        &self.a_values
    }

    pub fn r_values(&self) -> &[T] {
        &self.r_values
    }

    pub fn shocks(&self) -> &[ShockDistribution<T>] {
        &self.shocks
    }

    /// Number of (q, a, r) parameter points.
    pub fn parameter_points(&self) -> usize {
        self.q_values.len() * self.a_values.len() * self.r_values.len()
    }

    fn shock_a_pairs(&self) -> Vec<(ShockDistribution<T>, T)> {
        self.shocks
            .iter()
            .flat_map(|&s| self.a_values.iter().map(move |&a| (s, a)))
            .collect()
    }
}

fn default_shocks<T: Real>() -> Vec<ShockDistribution<T>> {
    let mut out = Vec::new();
    for family in ShockFamily::ALL {
        for scale in [5.0, 20.0, 80.0] {
            out.push(ShockDistribution::new(family, T::from_f64_lossy(scale)).expect("positive scale"));
        }
    }
    out
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum PropositionId {
    /// Gridlock effects.
    P1,
    /// Effect of the prior.
    P2,
    /// Effect of rents.
    P3,
}

impl fmt::Display for PropositionId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            PropositionId::P1 => "P1",
            PropositionId::P2 => "P2",
            PropositionId::P3 => "P3",
        })
    }
}

/// Relation that was expected to hold between `lhs` and `rhs`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Relation {
    AtLeast,
    AtMost,
    Greater,
    Less,
    Equal,
}

impl fmt::Display for Relation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Relation::AtLeast => ">=",
            Relation::AtMost => "<=",
            Relation::Greater => ">",
            Relation::Less => "<",
            Relation::Equal => "==",
        })
    }
}

impl Relation {
    fn holds(self, lhs: f64, rhs: f64) -> bool {
        match self {
            Relation::AtLeast => lhs >= rhs - WEAK_TOL,
            Relation::AtMost => lhs <= rhs + WEAK_TOL,
            Relation::Greater => lhs > rhs,
            Relation::Less => lhs < rhs,
            Relation::Equal => (lhs - rhs).abs() <= WEAK_TOL,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Violation {
    pub proposition: PropositionId,
    pub scenario_id: u8,
    pub q: f64,
    pub a: f64,
    pub r: f64,
    pub shock: String,
    pub lhs: f64,
    pub relation: Relation,
    pub rhs: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PropositionReport {
    pub proposition: PropositionId,
    pub cases_checked: usize,
    /// Cases where `lhs` and `rhs` were required to coincide and did.
    pub equalities: usize,
    pub violations: Vec<Violation>,
}

impl PropositionReport {
    pub fn passed(&self) -> bool {
        self.violations.is_empty()
    }

    fn merge(proposition: PropositionId, parts: Vec<Outcome>) -> Self {
        let mut report = Self {
            proposition,
            cases_checked: 0,
            equalities: 0,
            violations: Vec::new(),
        };
        for part in parts {
            report.cases_checked += part.checked;
            report.equalities += part.equalities;
            report.violations.extend(part.violations);
        }
        report
    }
}

#[derive(Default)]
struct Outcome {
    checked: usize,
    equalities: usize,
    violations: Vec<Violation>,
}

impl Outcome {
    #[allow(clippy::too_many_arguments)]
    fn check<T: Real>(
        &mut self,
        proposition: PropositionId,
        scenario_id: u8,
        params: &ModelParams<T>,
        shock: &ShockDistribution<T>,
        lhs: f64,
        relation: Relation,
        rhs: f64,
    ) {
        self.checked += 1;
        if relation.holds(lhs, rhs) {
            if relation == Relation::Equal {
                self.equalities += 1;
            }
            return;
        }
        self.violations.push(Violation {
            proposition,
            scenario_id,
            q: params.q().to_f64_lossy(),
            a: params.a().to_f64_lossy(),
            r: params.r().to_f64_lossy(),
            shock: shock.to_string(),
            lhs,
            relation,
            rhs,
        });
    }
}

fn pr_sp<T: Real>(profile: &ScenarioProfile, params: &ModelParams<T>, shock: &ShockDistribution<T>) -> T {
    prob_sp(net_gain_sp(profile, params), shock)
}

/// Gridlock vs. no-gridlock differences in `Pr(SP)`.
pub fn verify_prop1<T: Real>(grid: &SweepGrid<T>) -> PropositionReport {
    let baseline = scenario(1).expect("scenario 1").profile;
    let biased = scenario(5).expect("scenario 5").profile;
    let unbiased_x = scenario(10).expect("scenario 10").profile;
    let unbiased_l = scenario(7).expect("scenario 7").profile;
    let half = T::from_f64_lossy(0.5);

    let parts = grid
        .shock_a_pairs()
        .into_par_iter()
        .map(|(shock, a)| {
            let mut out = Outcome::default();
            for &q in &grid.q_values {
                for &r in &grid.r_values {
                    let params = ModelParams::new(q, a, r).expect("grid validated");
                    let base = pr_sp(&baseline, &params, &shock);
                    let cases = [
                        (5u8, &biased, if q > half { 1 } else if q < half { -1 } else { 0 }),
                        (10u8, &unbiased_x, 1),
                        (7u8, &unbiased_l, -1),
                    ];
                    for (id, profile, direction) in cases {
                        let with = pr_sp(profile, &params, &shock);
                        let diff = (with - base).to_f64_lossy();
                        let (lo, hi) = if with < base { (with, base) } else { (base, with) };
                        let moves = a > T::zero() && direction != 0;
                        let relation = match direction {
                            1 => Relation::AtLeast,
                            -1 => Relation::AtMost,
                            _ => Relation::Equal,
                        };
                        out.check(PropositionId::P1, id, &params, &shock, diff, relation, 0.0);
                        if moves && !saturated(lo, hi) {
                            let strict = if direction > 0 { Relation::Greater } else { Relation::Less };
                            out.check(PropositionId::P1, id, &params, &shock, diff, strict, 0.0);
                        }
                        if a == T::zero() {
                            out.check(PropositionId::P1, id, &params, &shock, diff, Relation::Equal, 0.0);
                        }
                    }
                }
            }
            out
        })
        .collect();
    PropositionReport::merge(PropositionId::P1, parts)
}

/// True when both CDF values sit in the same flat tail of F.
fn saturated<T: Real>(lo: T, hi: T) -> bool {
    let (lo, hi) = (lo.to_f64_lossy(), hi.to_f64_lossy());
    hi <= SATURATION || lo >= 1.0 - SATURATION
}

/// Monotonicity of `Pr(SP)` in the prior.
pub fn verify_prop2<T: Real>(grid: &SweepGrid<T>) -> Result<PropositionReport, GridError> {
    if !is_sorted(&grid.q_values) {
        return Err(GridError::Unsorted("q"));
    }
    let scenarios = all_scenarios();
    let pairs = grid.shock_a_pairs();
    let parts = pairs
        .into_par_iter()
        .map(|(shock, a)| {
            let mut out = Outcome::default();
            for &r in &grid.r_values {
                for sc in &scenarios {
                    monotone_path(
                        &mut out,
                        PropositionId::P2,
                        sc,
                        &shock,
                        grid.q_values.iter().map(|&q| ModelParams::new(q, a, r).expect("grid validated")),
                        if sc.id == 5 { Relation::AtLeast } else { Relation::Equal },
                    );
                }
            }
            out
        })
        .collect();
    Ok(PropositionReport::merge(PropositionId::P2, parts))
}

/// Monotonicity of `Pr(SP)` in rents.
pub fn verify_prop3<T: Real>(grid: &SweepGrid<T>) -> Result<PropositionReport, GridError> {
    if !is_sorted(&grid.r_values) {
        return Err(GridError::Unsorted("r"));
    }
    let scenarios = all_scenarios();
    let pairs = grid.shock_a_pairs();
    let parts = pairs
        .into_par_iter()
        .map(|(shock, a)| {
            let mut out = Outcome::default();
            for &q in &grid.q_values {
                for sc in &scenarios {
                    monotone_path(
                        &mut out,
                        PropositionId::P3,
                        sc,
                        &shock,
                        grid.r_values.iter().map(|&r| ModelParams::new(q, a, r).expect("grid validated")),
                        Relation::AtMost,
                    );
                }
            }
            out
        })
        .collect();
    Ok(PropositionReport::merge(PropositionId::P3, parts))
}

/// Compares consecutive `Pr(SP)` values along a parameter path.
fn monotone_path<T: Real>(
    out: &mut Outcome,
    proposition: PropositionId,
    sc: &Scenario,
    shock: &ShockDistribution<T>,
    path: impl Iterator<Item = ModelParams<T>>,
    relation: Relation,
) {
    let mut prev: Option<T> = None;
    for params in path {
        let p = pr_sp(&sc.profile, &params, shock);
        if let Some(before) = prev {
            out.check(proposition, sc.id, &params, shock, p.to_f64_lossy(), relation, before.to_f64_lossy());
        }
        prev = Some(p);
    }
}

fn is_sorted<T: PartialOrd>(xs: &[T]) -> bool {
    xs.windows(2).all(|w| w[0] <= w[1])
}

/// All three propositions over one grid.
pub fn verify_all<T: Real>(grid: &SweepGrid<T>) -> Result<[PropositionReport; 3], GridError> {
    Ok([verify_prop1(grid), verify_prop2(grid)?, verify_prop3(grid)?])
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MonteCarloEstimate {
    pub estimate: f64,
    pub std_error: f64,
    pub draws: u64,
}

/// Fraction of `n` i.i.d. shocks with `ε < Δ`. Draws run in fixed-size
/// batches, each on its own ChaCha stream, so the result does not depend on
/// thread scheduling.
pub fn monte_carlo_prob_sp<T: Real>(
    profile: &ScenarioProfile,
    params: &ModelParams<T>,
    shock: &ShockDistribution<T>,
    n: u64,
    seed: u64,
) -> MonteCarloEstimate {
    assert!(n >= 1, "need at least one draw");
    let delta = net_gain_sp(profile, params);
    let batches = n.div_ceil(MC_BATCH);
    let hits: u64 = (0..batches)
        .into_par_iter()
        .map(|b| {
            let mut rng = stream_rng(seed, b);
            let len = MC_BATCH.min(n - b * MC_BATCH);
            (0..len).filter(|_| shock.sample(&mut rng) < delta).count() as u64
        })
        .sum();
    let p = hits as f64 / n as f64;
    MonteCarloEstimate {
        estimate: p,
        std_error: (p * (1.0 - p) / n as f64).sqrt(),
        draws: n,
    }
}

/// Seed for grid point `index` under master seed `seed`.
pub fn point_seed(seed: u64, index: u64) -> u64 {
    derive_seed(seed, index)
}
