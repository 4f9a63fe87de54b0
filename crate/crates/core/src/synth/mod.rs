//! Synthetic sessions: subjects assigned to arms, a priming stage that
//! produces the `mistakes` flag, fourteen decisions per subject and payoffs.

pub mod mpl;

pub use mpl::{classify_mpl, LotteryPair, MplChoice, MplChoiceSheet, MplClassification, MplError, PriceList};

use crate::dataset::{Covariates, DataError, DecisionRow, SessionDataset};
use crate::model::{net_gain_sp, posterior_q, Institution, ModelParams, ShockDistribution, State};
use crate::rng::stream_rng;
use crate::scalar::Scalar;
use crate::scenario::{all_scenarios, all_treatments, lab_subject_counts, HIGH_RENTS, N_TREATMENTS, POLICY_WEIGHT};
use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Right/wrong questions in the priming stage.
pub const PRIMING_QUESTIONS: u32 = 10;
/// Attempts allowed per question before the payment is forfeited.
pub const ATTEMPTS: i32 = 4;
pub const DEFAULT_ENDOWMENT: f64 = 200.0;
pub const DEFAULT_MISTAKE_PROB: f64 = 0.12;

#[derive(Debug, Error)]
pub enum SynthError {
    #[error("no subjects requested (all treatment counts are zero)")]
    NoSubjects,
    #[error("{name} must be a probability in [0, 1], got {value}")]
    InvalidProbability { name: &'static str, value: f64 },
    #[error("endowment {endowment} is below a + r = {needed}; payoffs could be negative")]
    EndowmentTooLow { endowment: f64, needed: f64 },
    #[error("gridlock_sp_bias must be finite, got {0}")]
    InvalidBias(f64),
    #[error(transparent)]
    Data(#[from] DataError),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BehaviorConfig {
    pub shock: ShockDistribution<f64>,
    /// Added to the net gain in gridlock environments only.
    pub gridlock_sp_bias: f64,
    /// Chance of answering one right/wrong question incorrectly.
    pub mistake_prob: f64,
    /// Fresh shock every period; otherwise one shock per subject.
    pub per_period_shocks: bool,
}

impl Default for BehaviorConfig {
    fn default() -> Self {
        Self {
            shock: ShockDistribution::default(),
            gridlock_sp_bias: 0.0,
            mistake_prob: DEFAULT_MISTAKE_PROB,
            per_period_shocks: true,
        }
    }
}

impl BehaviorConfig {
    pub fn rational() -> Self {
        Self::default()
    }

    pub fn validate(&self) -> Result<(), SynthError> {
        check_prob("mistake_prob", self.mistake_prob)?;
        if !self.gridlock_sp_bias.is_finite() {
            return Err(SynthError::InvalidBias(self.gridlock_sp_bias));
        }
        Ok(())
    }
}

/// Independent Bernoulli shares of the subject characteristics.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CovariateMarginals {
    pub female: f64,
    pub risk_averse: f64,
    pub right_wing: f64,
    pub strong_leader: f64,
}

impl Default for CovariateMarginals {
    fn default() -> Self {
        Self {
            female: 0.63,
            risk_averse: 0.82,
            right_wing: 0.19,
            strong_leader: 0.24,
        }
    }
}

impl CovariateMarginals {
    pub fn validate(&self) -> Result<(), SynthError> {
        check_prob("female", self.female)?;
        check_prob("risk_averse", self.risk_averse)?;
        check_prob("right_wing", self.right_wing)?;
        check_prob("strong_leader", self.strong_leader)
    }
}

fn check_prob(name: &'static str, value: f64) -> Result<(), SynthError> {
    if (0.0..=1.0).contains(&value) {
        Ok(())
    } else {
        Err(SynthError::InvalidProbability { name, value })
    }
}

/// Everything needed to regenerate one synthetic panel.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SynthConfig {
    /// Subjects per treatment, in treatment order.
    pub counts: [u32; N_TREATMENTS],
    pub behavior: BehaviorConfig,
    pub marginals: CovariateMarginals,
    pub endowment: f64,
    pub seed: u64,
}

impl Default for SynthConfig {
    fn default() -> Self {
        Self {
            counts: lab_subject_counts(),
            behavior: BehaviorConfig::default(),
            marginals: CovariateMarginals::default(),
            endowment: DEFAULT_ENDOWMENT,
            seed: 0,
        }
    }
}

impl SynthConfig {
    pub fn generate(&self) -> Result<SessionDataset, SynthError> {
        generate_dataset_with_endowment(&self.counts, &self.behavior, &self.marginals, self.endowment, self.seed)
    }
}

/// Payoff of one stage-2 decision.
pub fn stage_payoff<T: Scalar>(
    decision: &DecisionRow,
    realized_s: State,
    params: &ModelParams<T>,
    endowment: T,
    mistake: bool,
) -> T {
    if mistake {
        return T::zero();
    }
    let rule = if decision.chose_sp {
        Institution::SpecialPowers
    } else {
        Institution::ChecksAndBalances
    };
    let policy = decision.scenario().profile.policy_under(rule);
    let mut pay = endowment;
    if policy != realized_s.matching_policy() {
        pay = pay - params.a();
    }
    if decision.chose_sp {
        pay = pay - params.r();
    }
    pay
}

/// Generates a panel with the default endowment.
pub fn generate_dataset(
    counts: &[u32; N_TREATMENTS],
    behavior: &BehaviorConfig,
    marginals: &CovariateMarginals,
    seed: u64,
) -> Result<SessionDataset, SynthError> {
    generate_dataset_with_endowment(counts, behavior, marginals, DEFAULT_ENDOWMENT, seed)
}

struct SubjectSlot {
    index: u64,
    subject_id: u32,
    session_id: u32,
    treatment: u8,
}

pub fn generate_dataset_with_endowment(
    counts: &[u32; N_TREATMENTS],
    behavior: &BehaviorConfig,
    marginals: &CovariateMarginals,
    endowment: f64,
    seed: u64,
) -> Result<SessionDataset, SynthError> {
    behavior.validate()?;
    marginals.validate()?;
    let needed = (POLICY_WEIGHT + HIGH_RENTS) as f64;
    if !(endowment >= needed) {
        return Err(SynthError::EndowmentTooLow { endowment, needed });
    }
    if counts.iter().all(|&c| c == 0) {
        return Err(SynthError::NoSubjects);
    }

    let mut slots = Vec::new();
    let mut next_session = 1u32;
    let mut next_subject = 1u32;
    for (spec, &n) in all_treatments().iter().zip(counts) {
        if n == 0 {
            continue;
        }
        let sessions = spec.sessions.min(n).max(1);
        for k in 0..n {
            slots.push(SubjectSlot {
                index: slots.len() as u64,
                subject_id: next_subject,
                session_id: next_session + k * sessions / n,
                treatment: spec.id,
            });
            next_subject += 1;
        }
        next_session += sessions;
    }

    let scenarios = all_scenarios();
    let rows: Vec<DecisionRow> = slots
        .par_iter()
        .flat_map_iter(|slot| simulate_subject(slot, &scenarios, behavior, marginals, endowment, seed))
        .collect();
    Ok(SessionDataset::new(rows)?)
}

fn simulate_subject(
    slot: &SubjectSlot,
    scenarios: &[crate::scenario::Scenario],
    behavior: &BehaviorConfig,
    marginals: &CovariateMarginals,
    endowment: f64,
    seed: u64,
) -> Vec<DecisionRow> {
    let mut rng = stream_rng(seed, slot.index);
    let spec = all_treatments()[slot.treatment as usize - 1];
    let params: ModelParams<f64> = spec.params();

    let mistakes = (0..PRIMING_QUESTIONS).any(|_| rng.random_bool(behavior.mistake_prob));
    let covariates = Covariates {
        mistakes,
        female: rng.random_bool(marginals.female),
        risk_averse: rng.random_bool(marginals.risk_averse),
        right_wing: rng.random_bool(marginals.right_wing),
        strong_leader: rng.random_bool(marginals.strong_leader),
    };
    let subject_shock = behavior.shock.sample(&mut rng);
    let forfeit = behavior.mistake_prob.powi(ATTEMPTS);

    scenarios
        .iter()
        .map(|sc| {
            let eps = if behavior.per_period_shocks {
                behavior.shock.sample(&mut rng)
            } else {
                subject_shock
            };
            let bias = if sc.is_gridlock() { behavior.gridlock_sp_bias } else { 0.0 };
            let delta = net_gain_sp(&sc.profile, &params) + bias;
            let s = if rng.random_bool(posterior_q(&sc.profile, params.q())) {
                State::One
            } else {
                State::Zero
            };
            let mistake = rng.random_bool(forfeit);
            let mut row = DecisionRow {
                subject_id: slot.subject_id,
                session_id: slot.session_id,
                treatment: slot.treatment,
                period: sc.id,
                scenario: sc.id,
                chose_sp: crate::model::chooses_sp(eps, delta),
                covariates,
                payoff: 0.0,
            };
            row.payoff = stage_payoff(&row, s, &params, endowment, mistake);
            row
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::prob_sp;
    use crate::scenario::{scenario, treatment_params, HypothesisClass};
    use num_rational::Ratio;

    fn only(treatment: usize, n: u32) -> [u32; N_TREATMENTS] {
        let mut c = [0; N_TREATMENTS];
        c[treatment - 1] = n;
        c
    }

    fn sp_freq(ds: &SessionDataset, treatment: u8, scenario: u8) -> (f64, usize) {
        let sel: Vec<_> = ds
            .rows()
            .iter()
            .filter(|r| r.treatment == treatment && r.scenario == scenario)
            .collect();
        let k = sel.iter().filter(|r| r.chose_sp).count();
        (k as f64 / sel.len() as f64, sel.len())
    }

    #[test]
    fn payoff_examples() {
        let row = |sc: u8, sp: bool| DecisionRow {
            subject_id: 1,
            session_id: 1,
            treatment: 3,
            period: sc,
            scenario: sc,
            chose_sp: sp,
            covariates: Covariates::default(),
            payoff: 0.0,
        };
        let params: ModelParams<f64> = treatment_params(3).unwrap().params();
        assert_eq!(stage_payoff(&row(5, true), State::One, &params, 200.0, true), 0.0);
        // Scenario 1 keeps the status quo under both rules.
        assert_eq!(stage_payoff(&row(1, false), State::Zero, &params, 200.0, false), 200.0);
        // Scenario 5 under SP implements reform.
        assert_eq!(stage_payoff(&row(5, true), State::Zero, &params, 200.0, false), 96.0);
        let exact: ModelParams<Ratio<i64>> = treatment_params(3).unwrap().params();
        assert_eq!(
            stage_payoff(&row(5, true), State::Zero, &exact, Ratio::from_integer(200), false),
            Ratio::from_integer(96)
        );
    }

    #[test]
    fn rational_frequency_matches_cdf() {
        let n = 20_000;
        let ds = generate_dataset(&only(3, n), &BehaviorConfig::rational(), &CovariateMarginals::default(), 11)
            .unwrap();
        let shock = ShockDistribution::<f64>::default();
        let params: ModelParams<f64> = treatment_params(3).unwrap().params();
        for id in [1u8, 5, 7, 10] {
            let p = prob_sp(net_gain_sp(&scenario(id).unwrap().profile, &params), &shock);
            let (f, m) = sp_freq(&ds, 3, id);
            let se = (p * (1.0 - p) / m as f64).sqrt();
            assert!((f - p).abs() < 3.0 * se, "scenario {id}: {f} vs {p}");
        }
        assert!(sp_freq(&ds, 3, 7).0 <= sp_freq(&ds, 3, 1).0);
    }

    #[test]
    fn marginals_are_respected() {
        let ds = generate_dataset(&[2000; 7], &BehaviorConfig::rational(), &CovariateMarginals::default(), 3).unwrap();
        let subs = ds.subjects();
        let share = |f: fn(&Covariates) -> bool| {
            subs.iter().filter(|s| f(&s.covariates)).count() as f64 / subs.len() as f64
        };
        assert!((share(|c| c.female) - 0.63).abs() < 0.015);
        assert!((share(|c| c.risk_averse) - 0.82).abs() < 0.015);
        let p_mist = 1.0 - (1.0 - DEFAULT_MISTAKE_PROB).powi(PRIMING_QUESTIONS as i32);
        assert!((share(|c| c.mistakes) - p_mist).abs() < 0.015);
    }

    #[test]
    fn lab_counts_shape() {
        let ds = SynthConfig::default().generate().unwrap();
        assert_eq!(ds.len(), 243 * 14);
        let subs = ds.subjects();
        assert_eq!(subs.len(), 243);
        let sessions: std::collections::BTreeSet<u32> = subs.iter().map(|s| s.session_id).collect();
        assert_eq!(sessions.len(), 30);
        for r in ds.rows() {
            assert!(r.payoff >= 0.0);
            assert_eq!(r.gridlock(), matches!(r.scenario, 5 | 7 | 10));
            if r.hypothesis_class(Default::default()) == HypothesisClass::Control {
                assert!(!r.gridlock());
            }
        }
    }

    #[test]
    fn deterministic_and_seed_sensitive() {
        let cfg = SynthConfig::default();
        let a = cfg.generate().unwrap().to_csv_string();
        let b = cfg.generate().unwrap().to_csv_string();
        assert_eq!(a, b);
        let other = SynthConfig { seed: 1, ..cfg }.generate().unwrap().to_csv_string();
        assert_ne!(a, other);
    }

    #[test]
    fn per_subject_shock_mode_correlates_choices() {
        let behavior = BehaviorConfig {
            per_period_shocks: false,
            ..BehaviorConfig::rational()
        };
        let ds = generate_dataset(&only(3, 2000), &behavior, &CovariateMarginals::default(), 5).unwrap();
        // With one shock per subject, SP in scenario 1 (Δ = −24) implies SP in
        // scenario 5 (Δ = 40).
        let rows = ds.rows();
        for chunk in rows.chunks(14) {
            if chunk[0].chose_sp {
                assert!(chunk[4].chose_sp);
            }
        }
    }

    #[test]
    fn bias_only_moves_gridlock() {
        let biased = BehaviorConfig {
            gridlock_sp_bias: 100.0,
            ..BehaviorConfig::rational()
        };
        let m = CovariateMarginals::default();
        let base = generate_dataset(&only(4, 4000), &BehaviorConfig::rational(), &m, 9).unwrap();
        let bias = generate_dataset(&only(4, 4000), &biased, &m, 9).unwrap();
        // Same seed, same shocks: non-gridlock choices are identical.
        for (x, y) in base.rows().iter().zip(bias.rows()) {
            if !x.gridlock() {
                assert_eq!(x.chose_sp, y.chose_sp);
            }
        }
        assert!(sp_freq(&bias, 4, 5).0 > sp_freq(&base, 4, 5).0 + 0.3);
    }

    #[test]
    fn control_scenarios_favor_cb_in_expectation() {
        for spec in all_treatments() {
            let params: ModelParams<Ratio<i64>> = spec.params();
            for sc in all_scenarios().iter().filter(|s| !s.is_gridlock()) {
                assert!(crate::model::net_gain_sp_composed(&sc.profile, &params) < Ratio::from_integer(0));
            }
        }
    }

    #[test]
    fn errors() {
        let m = CovariateMarginals::default();
        let b = BehaviorConfig::rational();
        assert!(matches!(generate_dataset(&[0; 7], &b, &m, 0), Err(SynthError::NoSubjects)));
        let bad = CovariateMarginals { female: 1.5, ..m };
        assert!(matches!(
            generate_dataset(&[1; 7], &b, &bad, 0),
            Err(SynthError::InvalidProbability { name: "female", .. })
        ));
        assert!(matches!(
            generate_dataset_with_endowment(&[1; 7], &b, &m, 150.0, 0),
            Err(SynthError::EndowmentTooLow { .. })
        ));
    }
}
