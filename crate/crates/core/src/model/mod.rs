//! Voters choosing between checks and balances and executive special powers.
//!
//! Two branches, an executive `X` and a legislature `L`, each propose a binary
//! policy. Voters see the politicians' types and proposals but not the state
//! of nature, and pick the institution that maps proposals into the
//! implemented policy. The net gain from special powers feeds a random-utility
//! choice: a voter grants special powers iff `ε < Δ`, so `Pr(SP) = F(Δ)`.

mod shock;

pub use shock::{ShockDistribution, ShockFamily, DEFAULT_SHOCK_SCALE};

use crate::scalar::{Real, Scalar};
use serde::{Deserialize, Serialize};
use std::fmt;
use std::str::FromStr;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ModelError {
    #[error("{branch} is {kind} but proposes {proposal}")]
    InconsistentProposal {
        branch: &'static str,
        kind: PoliticianType,
        proposal: Policy,
    },
    #[error("both branches are unbiased but propose different policies")]
    UnbiasedDisagreement,
    #[error("prior probability {0} outside [0, 1]")]
    InvalidPrior(f64),
    #[error("policy weight a = {0} must be nonnegative")]
    InvalidWeight(f64),
    #[error("rents r = {0} must be nonnegative")]
    InvalidRents(f64),
    #[error("shock scale {0} must be positive and finite")]
    InvalidScale(f64),
    #[error("unknown shock family {0:?}")]
    UnknownShockFamily(String),
    #[error("unknown politician type {0:?} (expected C, R or U)")]
    UnknownType(String),
    #[error("binary value expected, got {0}")]
    NotBinary(i64),
}

/// Binary policy; `StatusQuo` is the status quo policy 0.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Policy {
    StatusQuo,
    Reform,
}

impl Policy {
    pub fn bit(self) -> u8 {
        match self {
            Policy::StatusQuo => 0,
            Policy::Reform => 1,
        }
    }

    pub fn from_bit(bit: i64) -> Result<Self, ModelError> {
        match bit {
            0 => Ok(Policy::StatusQuo),
            1 => Ok(Policy::Reform),
            other => Err(ModelError::NotBinary(other)),
        }
    }

    fn value<T: Scalar>(self) -> T {
        T::int(self.bit() as i32)
    }
}

impl fmt::Display for Policy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.bit())
    }
}

/// State of nature: `One` means the reform is the right policy.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum State {
    Zero,
    One,
}

impl State {
    pub fn bit(self) -> u8 {
        match self {
            State::Zero => 0,
            State::One => 1,
        }
    }

    pub fn from_bit(bit: i64) -> Result<Self, ModelError> {
        match bit {
            0 => Ok(State::Zero),
            1 => Ok(State::One),
            other => Err(ModelError::NotBinary(other)),
        }
    }

    /// The policy that matches this state.
    pub fn matching_policy(self) -> Policy {
        match self {
            State::Zero => Policy::StatusQuo,
            State::One => Policy::Reform,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum PoliticianType {
    Conservative,
    Reformist,
    Unbiased,
}

impl PoliticianType {
    pub const ALL: [PoliticianType; 3] = [
        PoliticianType::Conservative,
        PoliticianType::Reformist,
        PoliticianType::Unbiased,
    ];

    /// One-letter code used in CSV files.
    pub fn code(self) -> char {
        match self {
            PoliticianType::Conservative => 'C',
            PoliticianType::Reformist => 'R',
            PoliticianType::Unbiased => 'U',
        }
    }

    /// Proposal that does not depend on the state; `None` for unbiased types.
    fn forced_proposal(self) -> Option<Policy> {
        match self {
            PoliticianType::Conservative => Some(Policy::StatusQuo),
            PoliticianType::Reformist => Some(Policy::Reform),
            PoliticianType::Unbiased => None,
        }
    }
}

impl fmt::Display for PoliticianType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            PoliticianType::Conservative => "Conservative",
            PoliticianType::Reformist => "Reformist",
            PoliticianType::Unbiased => "Unbiased",
        })
    }
}

impl FromStr for PoliticianType {
    type Err = ModelError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim() {
            "C" | "c" | "Conservative" | "conservative" => Ok(PoliticianType::Conservative),
            "R" | "r" | "Reformist" | "reformist" => Ok(PoliticianType::Reformist),
            "U" | "u" | "Unbiased" | "unbiased" => Ok(PoliticianType::Unbiased),
            other => Err(ModelError::UnknownType(other.to_string())),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Institution {
    /// Checks and balances: reform needs both branches.
    ChecksAndBalances,
    /// Special powers: the executive's proposal is implemented.
    SpecialPowers,
}

/// Types and proposals of both branches in one decision environment.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct ScenarioProfile {
    executive: PoliticianType,
    legislature: PoliticianType,
    exec_proposal: Policy,
    leg_proposal: Policy,
}

impl ScenarioProfile {
    pub fn new(
        executive: PoliticianType,
        legislature: PoliticianType,
        exec_proposal: Policy,
        leg_proposal: Policy,
    ) -> Result<Self, ModelError> {
        for (branch, kind, proposal) in [
            ("executive", executive, exec_proposal),
            ("legislature", legislature, leg_proposal),
        ] {
            if let Some(forced) = kind.forced_proposal() {
                if forced != proposal {
                    return Err(ModelError::InconsistentProposal { branch, kind, proposal });
                }
            }
        }
        if executive == PoliticianType::Unbiased
            && legislature == PoliticianType::Unbiased
            && exec_proposal != leg_proposal
        {
            return Err(ModelError::UnbiasedDisagreement);
        }
        Ok(Self {
            executive,
            legislature,
            exec_proposal,
            leg_proposal,
        })
    }

    /// Profile generated by non-strategic politicians in state `s`.
    pub fn realized(executive: PoliticianType, legislature: PoliticianType, s: State) -> Self {
        Self {
            executive,
            legislature,
            exec_proposal: propose(executive, s),
            leg_proposal: propose(legislature, s),
        }
    }

    pub fn executive(&self) -> PoliticianType {
        self.executive
    }

    pub fn legislature(&self) -> PoliticianType {
        self.legislature
    }

    pub fn exec_proposal(&self) -> Policy {
        self.exec_proposal
    }

    pub fn leg_proposal(&self) -> Policy {
        self.leg_proposal
    }

    pub fn is_gridlock(&self) -> bool {
        is_gridlock(self.exec_proposal, self.leg_proposal)
    }

    pub fn policy_under(&self, rule: Institution) -> Policy {
        implemented_policy(rule, self.exec_proposal, self.leg_proposal)
    }
}

impl fmt::Display for ScenarioProfile {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "X_{} L_{} p_X={} p_L={}",
            self.executive.code(),
            self.legislature.code(),
            self.exec_proposal,
            self.leg_proposal
        )
    }
}

/// Prior `q = Pr(s = 1)`, policy-mismatch weight `a` and rents `r` under SP.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModelParams<T> {
    q: T,
    a: T,
    r: T,
}

impl<T: Scalar> ModelParams<T> {
    pub fn new(q: T, a: T, r: T) -> Result<Self, ModelError> {
        let lossy = |x: T| x.to_f64().unwrap_or(f64::NAN);
        if !(q >= T::zero() && q <= T::one()) {
            return Err(ModelError::InvalidPrior(lossy(q)));
        }
        if !(a >= T::zero()) {
            return Err(ModelError::InvalidWeight(lossy(a)));
        }
        if !(r >= T::zero()) {
            return Err(ModelError::InvalidRents(lossy(r)));
        }
        Ok(Self { q, a, r })
    }

    pub fn q(&self) -> T {
        self.q
    }

    pub fn a(&self) -> T {
        self.a
    }

    pub fn r(&self) -> T {
        self.r
    }

    pub fn with_q(self, q: T) -> Result<Self, ModelError> {
        Self::new(q, self.a, self.r)
    }

    pub fn with_r(self, r: T) -> Result<Self, ModelError> {
        Self::new(self.q, self.a, r)
    }
}

/// Proposal of a non-strategic politician.
pub fn propose(kind: PoliticianType, s: State) -> Policy {
    kind.forced_proposal().unwrap_or_else(|| s.matching_policy())
}

pub fn implemented_policy(rule: Institution, exec_proposal: Policy, leg_proposal: Policy) -> Policy {
    match rule {
        Institution::SpecialPowers => exec_proposal,
        Institution::ChecksAndBalances if exec_proposal == leg_proposal => exec_proposal,
        Institution::ChecksAndBalances => Policy::StatusQuo,
    }
}

/// The executive proposes reform and the legislature blocks it.
pub fn is_gridlock(exec_proposal: Policy, leg_proposal: Policy) -> bool {
    exec_proposal == Policy::Reform && leg_proposal == Policy::StatusQuo
}

/// Voters' belief that `s = 1` after seeing the profile.
///
/// An unbiased proposal reveals the state; otherwise the prior stands.
pub fn posterior_q<T: Scalar>(profile: &ScenarioProfile, q: T) -> T {
    if profile.executive == PoliticianType::Unbiased {
        profile.exec_proposal.value()
    } else if profile.legislature == PoliticianType::Unbiased {
        profile.leg_proposal.value()
    } else {
        q
    }
}

/// `a · E[(p − s)²]` under belief `q_post`: the magnitude of the policy loss.
pub fn expected_policy_loss<T: Scalar>(p: Policy, q_post: T, a: T) -> T {
    match p {
        Policy::StatusQuo => a * q_post,
        Policy::Reform => a * (T::one() - q_post),
    }
}

/// Net gain from special powers, `v(SP) − v(CB)`, by the four-case formula.
pub fn net_gain_sp<T: Scalar>(profile: &ScenarioProfile, params: &ModelParams<T>) -> T {
    use PoliticianType::*;
    let ModelParams { q, a, r } = *params;
    let zero = T::zero();
    match (profile.executive, profile.legislature) {
        (Reformist, Conservative) => zero - r - a * (T::one() - T::int(2) * q),
        (Reformist, Unbiased) if profile.leg_proposal == Policy::StatusQuo => zero - r - a,
        (Unbiased, Conservative) if profile.exec_proposal == Policy::Reform => zero - r + a,
        _ => zero - r,
    }
}

/// Net gain from special powers composed from the posterior and the policy
/// losses under each institution. Agrees with [`net_gain_sp`] on every valid
/// profile.
pub fn net_gain_sp_composed<T: Scalar>(profile: &ScenarioProfile, params: &ModelParams<T>) -> T {
    let q_post = posterior_q(profile, params.q);
    let loss_sp = expected_policy_loss(profile.policy_under(Institution::SpecialPowers), q_post, params.a);
    let loss_cb = expected_policy_loss(profile.policy_under(Institution::ChecksAndBalances), q_post, params.a);
    loss_cb - loss_sp - params.r
}

/// `Pr(SP) = Pr(ε < Δ) = F(Δ)`. The shock families are atomless, so the
/// strict inequality (ties go to CB) does not change the value.
pub fn prob_sp<T: Real>(delta: T, shock: &ShockDistribution<T>) -> T {
    shock.cdf(delta)
}

/// Whether a voter with shock `epsilon` grants special powers.
pub fn chooses_sp<T: PartialOrd>(epsilon: T, delta: T) -> bool {
    epsilon < delta
}

/// Proposal of an executive with policy bias `delta_bias` who maximizes
/// `−(p − s − δ)²`. Ties go to the status quo.
pub fn strategic_proposal<T: Scalar>(delta_bias: T, s: State) -> Policy {
    let s_val: T = T::int(s.bit() as i32);
    if s_val + delta_bias > T::half() {
        Policy::Reform
    } else {
        Policy::StatusQuo
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_rational::Ratio;
    use PoliticianType::*;

    fn profile(x: PoliticianType, l: PoliticianType, px: u8, pl: u8) -> ScenarioProfile {
        ScenarioProfile::new(
            x,
            l,
            Policy::from_bit(px as i64).unwrap(),
            Policy::from_bit(pl as i64).unwrap(),
        )
        .unwrap()
    }

    fn params(q: f64, a: f64, r: f64) -> ModelParams<f64> {
        ModelParams::new(q, a, r).unwrap()
    }

    #[test]
    fn proposals() {
        assert_eq!(propose(Conservative, State::One), Policy::StatusQuo);
        assert_eq!(propose(Reformist, State::Zero), Policy::Reform);
        assert_eq!(propose(Unbiased, State::One), Policy::Reform);
        assert_eq!(propose(Unbiased, State::Zero), Policy::StatusQuo);
    }

    #[test]
    fn policy_rules_table() {
        use Institution::*;
        use Policy::*;
        let rows = [
            (StatusQuo, StatusQuo, StatusQuo, StatusQuo),
            (StatusQuo, Reform, StatusQuo, StatusQuo),
            (Reform, StatusQuo, StatusQuo, Reform),
            (Reform, Reform, Reform, Reform),
        ];
        for (px, pl, cb, sp) in rows {
            assert_eq!(implemented_policy(ChecksAndBalances, px, pl), cb);
            assert_eq!(implemented_policy(SpecialPowers, px, pl), sp);
            assert_eq!(cb != sp, is_gridlock(px, pl));
        }
    }

    #[test]
    fn gridlock_only_reform_blocked() {
        assert!(is_gridlock(Policy::Reform, Policy::StatusQuo));
        assert!(!is_gridlock(Policy::StatusQuo, Policy::Reform));
        assert!(!is_gridlock(Policy::StatusQuo, Policy::StatusQuo));
    }

    #[test]
    fn profile_invariants() {
        assert!(ScenarioProfile::new(Conservative, Conservative, Policy::Reform, Policy::StatusQuo).is_err());
        assert!(ScenarioProfile::new(Reformist, Conservative, Policy::Reform, Policy::Reform).is_err());
        assert_eq!(
            ScenarioProfile::new(Unbiased, Unbiased, Policy::Reform, Policy::StatusQuo),
            Err(ModelError::UnbiasedDisagreement)
        );
        assert!(ScenarioProfile::new(Unbiased, Unbiased, Policy::Reform, Policy::Reform).is_ok());
    }

    #[test]
    fn params_invariants() {
        assert!(ModelParams::new(1.1, 80.0, 24.0).is_err());
        assert!(ModelParams::new(0.5, -1.0, 24.0).is_err());
        assert!(ModelParams::new(0.5, 80.0, -24.0).is_err());
        assert!(ModelParams::new(f64::NAN, 80.0, 24.0).is_err());
        assert!(ModelParams::new(0.0, 0.0, 0.0).is_ok());
    }

    #[test]
    fn posterior() {
        assert_eq!(posterior_q(&profile(Unbiased, Conservative, 1, 0), 0.9), 1.0);
        assert_eq!(posterior_q(&profile(Reformist, Unbiased, 1, 0), 0.9), 0.0);
        assert_eq!(posterior_q(&profile(Reformist, Conservative, 1, 0), 0.2), 0.2);
    }

    #[test]
    fn policy_loss() {
        assert_eq!(expected_policy_loss(Policy::StatusQuo, 0.0, 80.0), 0.0);
        let exact = |p, q: Ratio<i64>| expected_policy_loss(p, q, Ratio::from_integer(80));
        assert_eq!(exact(Policy::Reform, Ratio::new(9, 10)), Ratio::from_integer(8));
        assert_eq!(exact(Policy::StatusQuo, Ratio::new(9, 10)), Ratio::from_integer(72));
    }

    #[test]
    fn net_gain_examples() {
        let close = |x: f64, y: f64| assert!((x - y).abs() < 1e-12, "{x} vs {y}");
        close(net_gain_sp(&profile(Reformist, Conservative, 1, 0), &params(0.9, 80.0, 24.0)), 40.0);
        close(net_gain_sp(&profile(Unbiased, Conservative, 1, 0), &params(0.9, 80.0, 24.0)), 56.0);
        close(net_gain_sp(&profile(Reformist, Unbiased, 1, 0), &params(0.9, 80.0, 24.0)), -104.0);
        close(net_gain_sp(&profile(Conservative, Reformist, 0, 1), &params(0.9, 80.0, 96.0)), -96.0);
        close(net_gain_sp(&profile(Reformist, Conservative, 1, 0), &params(0.2, 80.0, 24.0)), -72.0);
    }

    #[test]
    fn net_gain_exact_rational() {
        let p = ModelParams::new(Ratio::new(9, 10), Ratio::from_integer(80), Ratio::from_integer(24)).unwrap();
        let d = net_gain_sp(&profile(Reformist, Conservative, 1, 0), &p);
        assert_eq!(d, Ratio::from_integer(40));
        assert_eq!(d, net_gain_sp_composed(&profile(Reformist, Conservative, 1, 0), &p));
    }

    #[test]
    fn prob_sp_examples() {
        let logistic = ShockDistribution::logistic(20.0).unwrap();
        assert!((prob_sp(0.0_f64, &logistic) - 0.5).abs() < 1e-15);
        let uniform = ShockDistribution::uniform(1.0).unwrap();
        assert_eq!(prob_sp(-0.5, &uniform), 0.25);
        assert_eq!(prob_sp(f64::NEG_INFINITY, &logistic), 0.0);
    }

    #[test]
    fn indifference_goes_to_checks_and_balances() {
        assert!(!chooses_sp(1.0, 1.0));
        assert!(chooses_sp(0.999, 1.0));
    }

    #[test]
    fn strategic_examples() {
        assert_eq!(strategic_proposal(0.0, State::One), Policy::Reform);
        assert_eq!(strategic_proposal(1.0, State::Zero), Policy::Reform);
        assert_eq!(strategic_proposal(0.5, State::Zero), Policy::StatusQuo);
        assert_eq!(strategic_proposal(Ratio::new(-1, 2), State::One), Policy::StatusQuo);
    }
}
