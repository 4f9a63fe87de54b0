//! Hypothesis dummies, controls and the design matrices built from them.

use super::ols::Design;
use super::StatsError;
use crate::dataset::{Column, Covariate, DecisionRow, SessionDataset};
use crate::model::PoliticianType;
use crate::scenario::{treatment_params, Framing, HalfPriorRule, HypothesisClass};
use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};
use std::fmt;
use std::str::FromStr;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Hypothesis {
    /// Biased gridlock with reform ex ante beneficial.
    H1,
    /// Gridlock with an unbiased executive.
    H2,
    /// Biased gridlock with reform ex ante harmful.
    H3,
    /// Gridlock with an unbiased legislature.
    H4,
    /// High prior, within biased gridlock.
    H5,
    /// High rents.
    H6,
    /// Corruption framing.
    H7,
    /// Political framing.
    H8,
    /// Low gridlock frequency in the priming stage.
    H9,
}

impl Hypothesis {
    pub const ALL: [Hypothesis; 9] = [
        Hypothesis::H1,
        Hypothesis::H2,
        Hypothesis::H3,
        Hypothesis::H4,
        Hypothesis::H5,
        Hypothesis::H6,
        Hypothesis::H7,
        Hypothesis::H8,
        Hypothesis::H9,
    ];

    /// H1–H4 compare environments within subjects and share one regression.
    pub fn is_environment(self) -> bool {
        matches!(self, Hypothesis::H1 | Hypothesis::H2 | Hypothesis::H3 | Hypothesis::H4)
    }

    pub fn label(self) -> &'static str {
        match self {
            Hypothesis::H1 => "H1",
            Hypothesis::H2 => "H2",
            Hypothesis::H3 => "H3",
            Hypothesis::H4 => "H4",
            Hypothesis::H5 => "H5",
            Hypothesis::H6 => "H6",
            Hypothesis::H7 => "H7",
            Hypothesis::H8 => "H8",
            Hypothesis::H9 => "H9",
        }
    }

    pub fn description(self) -> &'static str {
        match self {
            Hypothesis::H1 => "gridlock, X_R L_C, q > 1/2",
            Hypothesis::H2 => "gridlock, unbiased executive",
            Hypothesis::H3 => "gridlock, X_R L_C, q < 1/2",
            Hypothesis::H4 => "gridlock, unbiased legislature",
            Hypothesis::H5 => "q = 0.9 vs 0.2 in X_R L_C gridlock",
            Hypothesis::H6 => "high rents (treatment 5)",
            Hypothesis::H7 => "corruption framing (treatment 6)",
            Hypothesis::H8 => "political framing (treatment 7)",
            Hypothesis::H9 => "low priming gridlock (treatments 1-2)",
        }
    }

    fn environment_class(self) -> Option<HypothesisClass> {
        match self {
            Hypothesis::H1 => Some(HypothesisClass::H1Env),
            Hypothesis::H2 => Some(HypothesisClass::H2Env),
            Hypothesis::H3 => Some(HypothesisClass::H3Env),
            Hypothesis::H4 => Some(HypothesisClass::H4Env),
            _ => None,
        }
    }

    /// Treatment-level split used by H5–H9: (treated arms, comparison arms).
    pub fn treatment_split(self) -> Option<(Vec<u8>, Vec<u8>)> {
        let all = 1..=7u8;
        let part = |f: &dyn Fn(u8) -> bool| -> (Vec<u8>, Vec<u8>) { all.clone().partition(|&t| f(t)) };
        match self {
            Hypothesis::H5 => Some(part(&|t| treatment_params(t).unwrap().has_high_q())),
            Hypothesis::H6 => Some(part(&|t| t == 5)),
            Hypothesis::H7 => Some(part(&|t| t == 6)),
            Hypothesis::H8 => Some(part(&|t| t == 7)),
            Hypothesis::H9 => Some(part(&|t| t <= 2)),
            _ => None,
        }
    }
}

impl fmt::Display for Hypothesis {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

impl FromStr for Hypothesis {
    type Err = StatsError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Hypothesis::ALL
            .into_iter()
            .find(|h| h.label().eq_ignore_ascii_case(s.trim()))
            .ok_or_else(|| StatsError::InvalidSpec(format!("unknown hypothesis '{s}' (expected H1..H9)")))
    }
}

/// Regressor added alongside the hypothesis dummies.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Control {
    Mistakes,
    RiskAverse,
    Female,
    RightWing,
    StrongLeader,
    /// Treatment 6 framing dummy.
    Corruption,
    /// Treatment 7 framing dummy.
    Political,
}

impl Control {
    pub const DEFAULT: [Control; 7] = [
        Control::Mistakes,
        Control::RiskAverse,
        Control::Female,
        Control::RightWing,
        Control::StrongLeader,
        Control::Corruption,
        Control::Political,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Control::Mistakes => "mistakes",
            Control::RiskAverse => "risk_averse",
            Control::Female => "female",
            Control::RightWing => "right_wing",
            Control::StrongLeader => "strong_leader",
            Control::Corruption => "corruption",
            Control::Political => "political",
        }
    }

    pub fn covariate(self) -> Option<Covariate> {
        match self {
            Control::Mistakes => Some(Covariate::Mistakes),
            Control::RiskAverse => Some(Covariate::RiskAverse),
            Control::Female => Some(Covariate::Female),
            Control::RightWing => Some(Covariate::RightWing),
            Control::StrongLeader => Some(Covariate::StrongLeader),
            Control::Corruption | Control::Political => None,
        }
    }

    pub fn from_covariate(c: Covariate) -> Self {
        match c {
            Covariate::Mistakes => Control::Mistakes,
            Covariate::RiskAverse => Control::RiskAverse,
            Covariate::Female => Control::Female,
            Covariate::RightWing => Control::RightWing,
            Covariate::StrongLeader => Control::StrongLeader,
        }
    }

    fn value(self, row: &DecisionRow) -> bool {
        match self.covariate() {
            Some(c) => row.covariates.get(c),
            None => {
                let framing = treatment_params(row.treatment).expect("validated treatment").framing;
                framing
                    == if self == Control::Corruption {
                        Framing::Corruption
                    } else {
                        Framing::Political
                    }
            }
        }
    }
}

impl FromStr for Control {
    type Err = StatsError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Control::DEFAULT
            .into_iter()
            .find(|c| c.name() == s.trim())
            .ok_or_else(|| StatsError::InvalidSpec(format!("unknown control '{s}'")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ClusterLevel {
    #[default]
    Subject,
    Session,
}

impl FromStr for ClusterLevel {
    type Err = StatsError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "subject" => Ok(ClusterLevel::Subject),
            "session" => Ok(ClusterLevel::Session),
            other => Err(StatsError::InvalidSpec(format!("unknown cluster level '{other}'"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Outcome {
    #[default]
    ChoseSp,
    Payoff,
}

/// One regression.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RegressionSpec {
    pub outcome: Outcome,
    pub hypotheses: Vec<Hypothesis>,
    /// `(Hk, z)` pairs; `Hk` and `z` enter as base terms automatically.
    pub interactions: Vec<(Hypothesis, Covariate)>,
    pub controls: Vec<Control>,
    pub cluster: ClusterLevel,
    pub half_prior: HalfPriorRule,
}

impl Default for RegressionSpec {
    fn default() -> Self {
        Self {
            outcome: Outcome::ChoseSp,
            hypotheses: vec![Hypothesis::H1, Hypothesis::H2, Hypothesis::H3, Hypothesis::H4],
            interactions: Vec::new(),
            controls: Control::DEFAULT.to_vec(),
            cluster: ClusterLevel::Subject,
            half_prior: HalfPriorRule::default(),
        }
    }
}

impl RegressionSpec {
    pub fn for_hypothesis(h: Hypothesis) -> Self {
        Self {
            hypotheses: vec![h],
            ..Self::default()
        }
    }

    pub fn interaction(z: Covariate, with: &[Hypothesis]) -> Self {
        Self {
            hypotheses: with.to_vec(),
            interactions: with.iter().map(|&h| (h, z)).collect(),
            ..Self::default()
        }
    }

    /// Hypothesis dummies including those implied by interactions, deduplicated.
    pub fn all_hypotheses(&self) -> Vec<Hypothesis> {
        let mut hs = self.hypotheses.clone();
        hs.extend(self.interactions.iter().map(|(h, _)| *h));
        hs.sort();
        hs.dedup();
        hs
    }

    fn interaction_covariates(&self) -> Vec<Covariate> {
        let mut zs: Vec<Covariate> = self.interactions.iter().map(|(_, z)| *z).collect();
        zs.sort();
        zs.dedup();
        zs
    }

    pub fn validate(&self) -> Result<(), StatsError> {
        let hs = self.all_hypotheses();
        if hs.is_empty() {
            return Err(StatsError::InvalidSpec("no hypotheses in the regression".into()));
        }
        let env = hs.iter().filter(|h| h.is_environment()).count();
        if env != hs.len() && hs.len() > 1 {
            return Err(StatsError::InvalidSpec(
                "H5-H9 are estimated one per regression and cannot share it with other hypotheses".into(),
            ));
        }
        if let Some((h, _)) = self.interactions.iter().find(|(h, _)| !h.is_environment()) {
            return Err(StatsError::InvalidSpec(format!("interactions are defined for H1-H4, not {h}")));
        }
        Ok(())
    }

    /// Dataset columns this regression reads.
    pub fn required_columns(&self) -> Vec<Column> {
        let mut cols = vec![match self.outcome {
            Outcome::ChoseSp => Column::ChoseSp,
            Outcome::Payoff => Column::Payoff,
        }];
        if self.cluster == ClusterLevel::Session {
            cols.push(Column::SessionId);
        }
        cols.extend(self.controls.iter().filter_map(|c| c.covariate()).map(Covariate::column));
        cols.extend(self.interaction_covariates().into_iter().map(Covariate::column));
        cols
    }
}

/// A regression ready to fit, with the terms under test.
#[derive(Debug, Clone, PartialEq)]
pub struct ModelDesign {
    pub design: Design,
    /// Mean outcome where every hypothesis dummy is zero.
    pub control_mean: f64,
    /// Terms tested: the hypothesis dummies, or the interaction terms when
    /// the spec has interactions.
    pub tested: Vec<String>,
}

pub fn interaction_name(h: Hypothesis, z: Covariate) -> String {
    format!("{}:{}", h.label(), z.column().name())
}

pub(crate) fn in_sample(row: &DecisionRow, hs: &[Hypothesis], rule: HalfPriorRule) -> bool {
    if hs.iter().all(|h| h.is_environment()) {
        let class = row.hypothesis_class(rule);
        class == HypothesisClass::Control || hs.iter().any(|h| h.environment_class() == Some(class))
    } else if hs == [Hypothesis::H5] {
        let p = row.scenario().profile;
        p.is_gridlock() && p.executive() == PoliticianType::Reformist && p.legislature() == PoliticianType::Conservative
    } else {
        true
    }
}

fn dummy(h: Hypothesis, row: &DecisionRow, rule: HalfPriorRule) -> bool {
    match h.environment_class() {
        Some(class) => row.hypothesis_class(rule) == class,
        None => {
            let (treated, _) = h.treatment_split().expect("treatment-level hypothesis");
            treated.contains(&row.treatment)
        }
    }
}

/// Builds the design for one regression: intercept, hypothesis dummies,
/// interaction base and product terms, then controls.
pub fn build_design(dataset: &SessionDataset, spec: &RegressionSpec) -> Result<ModelDesign, StatsError> {
    spec.validate()?;
    dataset.require(&spec.required_columns())?;
    let hs = spec.all_hypotheses();
    let zs = spec.interaction_covariates();
    let rule = spec.half_prior;

    let own_framing = |c: Control| {
        (c == Control::Corruption && hs.contains(&Hypothesis::H7))
            || (c == Control::Political && hs.contains(&Hypothesis::H8))
    };
    let controls: Vec<Control> = {
        let mut seen = Vec::new();
        for &c in &spec.controls {
            let is_z = c.covariate().is_some_and(|cv| zs.contains(&cv));
            if !own_framing(c) && !is_z && !seen.contains(&c) {
                seen.push(c);
            }
        }
        seen
    };

    let mut names = vec!["const".to_string()];
    names.extend(hs.iter().map(|h| h.label().to_string()));
    names.extend(zs.iter().map(|z| z.column().name().to_string()));
    names.extend(spec.interactions.iter().map(|&(h, z)| interaction_name(h, z)));
    names.extend(controls.iter().map(|c| c.name().to_string()));

    let rows: Vec<&DecisionRow> = dataset.rows().iter().filter(|r| in_sample(r, &hs, rule)).collect();
    let n = rows.len();
    let k = names.len();
    let mut x = DMatrix::zeros(n, k);
    let mut y = DVector::zeros(n);
    let mut clusters = Vec::with_capacity(n);
    let mut base_sum = 0.0;
    let mut base_n = 0usize;
    let mut treated_n = vec![0usize; hs.len()];
    let b = |v: bool| if v { 1.0 } else { 0.0 };

    for (i, r) in rows.iter().enumerate() {
        let mut col = 0;
        x[(i, col)] = 1.0;
        col += 1;
        let mut any = false;
        for (j, &h) in hs.iter().enumerate() {
            let d = dummy(h, r, rule);
            any |= d;
            treated_n[j] += d as usize;
            x[(i, col)] = b(d);
            col += 1;
        }
        for &z in &zs {
            x[(i, col)] = b(r.covariates.get(z));
            col += 1;
        }
        for &(h, z) in &spec.interactions {
            x[(i, col)] = b(dummy(h, r, rule) && r.covariates.get(z));
            col += 1;
        }
        for &c in &controls {
            x[(i, col)] = b(c.value(r));
            col += 1;
        }
        y[i] = match spec.outcome {
            Outcome::ChoseSp => b(r.chose_sp),
            Outcome::Payoff => r.payoff,
        };
        clusters.push(match spec.cluster {
            ClusterLevel::Subject => r.subject_id as u64,
            ClusterLevel::Session => r.session_id as u64,
        });
        if !any {
            base_sum += y[i];
            base_n += 1;
        }
    }

    if let Some(j) = treated_n.iter().position(|&c| c == 0) {
        return Err(StatsError::EmptyCell(format!("no observations with {} = 1", hs[j])));
    }
    if base_n == 0 {
        return Err(StatsError::EmptyCell("no comparison observations (all hypothesis dummies are 1)".into()));
    }

    let tested = if spec.interactions.is_empty() {
        hs.iter().map(|h| h.label().to_string()).collect()
    } else {
        spec.interactions.iter().map(|&(h, z)| interaction_name(h, z)).collect()
    };
    Ok(ModelDesign {
        design: Design::new(names, x, y, clusters)?,
        control_mean: base_sum / base_n as f64,
        tested,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dataset::Covariates;

    fn row(subject: u32, treatment: u8, scenario: u8, sp: bool) -> DecisionRow {
        DecisionRow {
            subject_id: subject,
            session_id: treatment as u32,
            treatment,
            period: scenario,
            scenario,
            chose_sp: sp,
            covariates: Covariates {
                female: subject.is_multiple_of(2),
                ..Default::default()
            },
            payoff: 0.0,
        }
    }

    fn panel() -> SessionDataset {
        let mut rows = Vec::new();
        for (s, t) in [(1, 3), (2, 3), (3, 4), (4, 4), (5, 5), (6, 6), (7, 7), (8, 1)] {
            for sc in 1..=14u8 {
                rows.push(row(s, t, sc, (s as u8 + sc).is_multiple_of(3)));
            }
        }
        SessionDataset::new(rows).unwrap()
    }

    fn value(md: &ModelDesign, i: usize, name: &str) -> f64 {
        md.design.x[(i, md.design.column(name).unwrap())]
    }

    fn find(ds: &SessionDataset, md: &ModelDesign, treatment: u8, scenario: u8) -> usize {
        let kept: Vec<&DecisionRow> = ds
            .rows()
            .iter()
            .filter(|r| in_sample(r, &[Hypothesis::H1, Hypothesis::H2, Hypothesis::H3, Hypothesis::H4], Default::default()))
            .collect();
        assert_eq!(kept.len(), md.design.n_obs());
        kept.iter().position(|r| r.treatment == treatment && r.scenario == scenario).unwrap()
    }

    #[test]
    fn table_rows() {
        let ds = panel();
        let md = build_design(&ds, &RegressionSpec::default()).unwrap();
        let i = find(&ds, &md, 3, 5);
        assert_eq!(
            ["H1", "H2", "H3", "H4"].map(|h| value(&md, i, h)),
            [1.0, 0.0, 0.0, 0.0]
        );
        let i = find(&ds, &md, 4, 5);
        assert_eq!(value(&md, i, "H3"), 1.0);
        let i = find(&ds, &md, 6, 1);
        assert_eq!(["H1", "H2", "H3", "H4"].map(|h| value(&md, i, h)), [0.0; 4]);
        assert_eq!(value(&md, i, "corruption"), 1.0);
        assert_eq!(md.tested, vec!["H1", "H2", "H3", "H4"]);
    }

    #[test]
    fn treatment_level_hypotheses() {
        let ds = panel();
        let h5 = build_design(&ds, &RegressionSpec::for_hypothesis(Hypothesis::H5)).unwrap();
        // Only scenario 5 rows, one per subject.
        assert_eq!(h5.design.n_obs(), 8);
        let h7 = build_design(&ds, &RegressionSpec::for_hypothesis(Hypothesis::H7)).unwrap();
        assert!(h7.design.column("corruption").is_none());
        assert!(h7.design.column("political").is_some());
        assert_eq!(h7.design.n_obs(), ds.len());
    }

    #[test]
    fn interactions_add_base_terms() {
        let ds = panel();
        let spec = RegressionSpec::interaction(Covariate::Female, &[Hypothesis::H3, Hypothesis::H4]);
        let md = build_design(&ds, &spec).unwrap();
        assert_eq!(
            &md.design.names[..6],
            &["const", "H3", "H4", "female", "H3:female", "H4:female"]
        );
        assert_eq!(md.design.names.iter().filter(|n| *n == "female").count(), 1);
        assert_eq!(md.tested, vec!["H3:female", "H4:female"]);
    }

    #[test]
    fn errors() {
        let only_t3: Vec<DecisionRow> = (1..=14u8).map(|sc| row(1, 3, sc, false)).collect();
        let ds = SessionDataset::new(only_t3).unwrap();
        assert!(matches!(
            build_design(&ds, &RegressionSpec::default()),
            Err(StatsError::EmptyCell(_))
        ));
        let spec = RegressionSpec {
            hypotheses: vec![Hypothesis::H1, Hypothesis::H6],
            ..Default::default()
        };
        assert!(matches!(build_design(&panel(), &spec), Err(StatsError::InvalidSpec(_))));
        assert!("H10".parse::<Hypothesis>().is_err());
        assert_eq!("h7".parse::<Hypothesis>().unwrap(), Hypothesis::H7);
    }
}
