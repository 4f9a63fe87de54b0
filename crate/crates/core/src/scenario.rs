//! Fixed experimental design: the fourteen decision scenarios, the seven
//! treatments, and the table of expected net gains from special powers.

use crate::model::{net_gain_sp, ModelError, ModelParams, Policy, PoliticianType, ScenarioProfile};
use crate::scalar::Scalar;
use serde::{Deserialize, Serialize};
use std::fmt;
use thiserror::Error;

/// Policy-mismatch weight shared by every treatment.
pub const POLICY_WEIGHT: i32 = 80;
pub const LOW_RENTS: i32 = 24;
pub const HIGH_RENTS: i32 = 96;
/// Priors in tenths: q_H = 0.9, q_L = 0.2.
const HIGH_Q_TENTHS: i32 = 9;
const LOW_Q_TENTHS: i32 = 2;

pub const N_SCENARIOS: usize = 14;
pub const N_TREATMENTS: usize = 7;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum CatalogError {
    #[error("unknown treatment id {0} (expected 1..=7)")]
    UnknownTreatment(u8),
    #[error("unknown scenario id {0} (expected 1..=14)")]
    UnknownScenario(u8),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Framing {
    Neutral,
    Corruption,
    Political,
}

impl fmt::Display for Framing {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Framing::Neutral => "neutral",
            Framing::Corruption => "corruption",
            Framing::Political => "political",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Scenario {
    pub id: u8,
    pub profile: ScenarioProfile,
}

impl Scenario {
    pub fn is_gridlock(&self) -> bool {
        self.profile.is_gridlock()
    }
}

/// One experimental arm.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TreatmentSpec {
    pub id: u8,
    rents: i32,
    q_tenths: i32,
    /// Gridlock frequency in the priming stage, in tenths.
    priming_tenths: i32,
    pub framing: Framing,
    pub sessions: u32,
    pub subjects: u32,
}

impl TreatmentSpec {
    pub fn rents<T: Scalar>(&self) -> T {
        T::int(self.rents)
    }

    pub fn q<T: Scalar>(&self) -> T {
        T::ratio(self.q_tenths, 10)
    }

    pub fn priming_gridlock_freq<T: Scalar>(&self) -> T {
        T::ratio(self.priming_tenths, 10)
    }

    /// Priming scenarios (out of ten) that show gridlock.
    pub fn priming_gridlock_count(&self) -> u32 {
        self.priming_tenths as u32
    }

    pub fn has_high_rents(&self) -> bool {
        self.rents == HIGH_RENTS
    }

    pub fn has_high_q(&self) -> bool {
        self.q_tenths == HIGH_Q_TENTHS
    }

    /// Model parameters of this arm, with the shared weight `a`.
    pub fn params<T: Scalar>(&self) -> ModelParams<T> {
        ModelParams::new(self.q(), T::int(POLICY_WEIGHT), self.rents())
            .expect("catalog parameters are valid")
    }
}

const fn arm(
    id: u8,
    rents: i32,
    q_tenths: i32,
    priming_tenths: i32,
    framing: Framing,
    sessions: u32,
    subjects: u32,
) -> TreatmentSpec {
    TreatmentSpec {
        id,
        rents,
        q_tenths,
        priming_tenths,
        framing,
        sessions,
        subjects,
    }
}

static TREATMENTS: [TreatmentSpec; N_TREATMENTS] = [
    arm(1, LOW_RENTS, HIGH_Q_TENTHS, 3, Framing::Neutral, 2, 26),
    arm(2, LOW_RENTS, LOW_Q_TENTHS, 2, Framing::Neutral, 1, 16),
    arm(3, LOW_RENTS, HIGH_Q_TENTHS, 6, Framing::Neutral, 4, 40),
    arm(4, LOW_RENTS, LOW_Q_TENTHS, 6, Framing::Neutral, 5, 49),
    arm(5, HIGH_RENTS, HIGH_Q_TENTHS, 6, Framing::Neutral, 7, 46),
    arm(6, LOW_RENTS, HIGH_Q_TENTHS, 6, Framing::Corruption, 5, 33),
    arm(7, LOW_RENTS, HIGH_Q_TENTHS, 6, Framing::Political, 6, 33),
];

pub fn treatment_params(id: u8) -> Result<TreatmentSpec, CatalogError> {
    TREATMENTS
        .iter()
        .find(|t| t.id == id)
        .copied()
        .ok_or(CatalogError::UnknownTreatment(id))
}

pub fn all_treatments() -> &'static [TreatmentSpec; N_TREATMENTS] {
    &TREATMENTS
}

/// Subjects per arm as run in the lab.
pub fn lab_subject_counts() -> [u32; N_TREATMENTS] {
    TREATMENTS.map(|t| t.subjects)
}

/// The fourteen consistent type/proposal combinations, in catalog order
/// (executive type, legislature type, then proposals; C < R < U and 0 < 1).
pub fn all_scenarios() -> Vec<Scenario> {
    use Policy::*;
    use PoliticianType::*;
    let rows = [
        (Conservative, Conservative, StatusQuo, StatusQuo),
        (Conservative, Reformist, StatusQuo, Reform),
        (Conservative, Unbiased, StatusQuo, StatusQuo),
        (Conservative, Unbiased, StatusQuo, Reform),
        (Reformist, Conservative, Reform, StatusQuo),
        (Reformist, Reformist, Reform, Reform),
        (Reformist, Unbiased, Reform, StatusQuo),
        (Reformist, Unbiased, Reform, Reform),
        (Unbiased, Conservative, StatusQuo, StatusQuo),
        (Unbiased, Conservative, Reform, StatusQuo),
        (Unbiased, Reformist, StatusQuo, Reform),
        (Unbiased, Reformist, Reform, Reform),
        (Unbiased, Unbiased, StatusQuo, StatusQuo),
        (Unbiased, Unbiased, Reform, Reform),
    ];
    rows.iter()
        .enumerate()
        .map(|(i, &(x, l, px, pl))| Scenario {
            id: i as u8 + 1,
            profile: ScenarioProfile::new(x, l, px, pl).expect("catalog profile is consistent"),
        })
        .collect()
}

pub fn scenario(id: u8) -> Result<Scenario, CatalogError> {
    all_scenarios()
        .into_iter()
        .find(|s| s.id == id)
        .ok_or(CatalogError::UnknownScenario(id))
}

/// Every profile accepted by [`ScenarioProfile::new`], in lexicographic order.
pub fn enumerate_consistent_profiles() -> Vec<ScenarioProfile> {
    let policies = [Policy::StatusQuo, Policy::Reform];
    let mut out = Vec::new();
    for x in PoliticianType::ALL {
        for l in PoliticianType::ALL {
            for px in policies {
                for pl in policies {
                    match ScenarioProfile::new(x, l, px, pl) {
                        Ok(p) => out.push(p),
                        Err(ModelError::InconsistentProposal { .. } | ModelError::UnbiasedDisagreement) => {}
                        Err(e) => unreachable!("{e}"),
                    }
                }
            }
        }
    }
    out
}

/// Entry `[s][t]` is the net gain from SP in scenario `s + 1` under treatment `t + 1`.
pub fn expected_gains_table<T: Scalar>() -> [[T; N_TREATMENTS]; N_SCENARIOS] {
    let scenarios = all_scenarios();
    std::array::from_fn(|s| std::array::from_fn(|t| net_gain_sp(&scenarios[s].profile, &TREATMENTS[t].params())))
}

/// Which gridlock hypothesis an environment tests.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum HypothesisClass {
    /// Biased gridlock, reform ex ante beneficial.
    H1Env,
    /// Gridlock with an unbiased executive.
    H2Env,
    /// Biased gridlock, reform ex ante harmful.
    H3Env,
    /// Gridlock with an unbiased legislature.
    H4Env,
    Control,
}

impl fmt::Display for HypothesisClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            HypothesisClass::H1Env => "H1",
            HypothesisClass::H2Env => "H2",
            HypothesisClass::H3Env => "H3",
            HypothesisClass::H4Env => "H4",
            HypothesisClass::Control => "control",
        })
    }
}

/// Where the boundary prior `q = 1/2` falls.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum HalfPriorRule {
    /// `q = 1/2` counts as ex ante harmful (weak inequality `q ≤ 1/2`).
    #[default]
    Harmful,
    /// `q = 1/2` counts as ex ante beneficial.
    Beneficial,
}

impl HalfPriorRule {
    pub fn is_beneficial<T: Scalar>(self, q: T) -> bool {
        match self {
            HalfPriorRule::Harmful => q > T::half(),
            HalfPriorRule::Beneficial => q >= T::half(),
        }
    }
}

pub fn hypothesis_class<T: Scalar>(profile: &ScenarioProfile, q: T, rule: HalfPriorRule) -> HypothesisClass {
    use PoliticianType::*;
    if !profile.is_gridlock() {
        return HypothesisClass::Control;
    }
    match (profile.executive(), profile.legislature()) {
        (Unbiased, _) => HypothesisClass::H2Env,
        (_, Unbiased) => HypothesisClass::H4Env,
        (Reformist, Conservative) if rule.is_beneficial(q) => HypothesisClass::H1Env,
        (Reformist, Conservative) => HypothesisClass::H3Env,
        (x, l) => unreachable!("gridlock with X_{} L_{}", x.code(), l.code()),
    }
}
