//! End-to-end inference: designs, fits, multiplicity adjustments, and the
//! comparison tables built on exact tests.

use super::design::{build_design, in_sample, ClusterLevel, Control, Hypothesis, ModelDesign, Outcome, RegressionSpec};
use super::fisher::{fisher_exact, ContingencyTable2x2, Sidedness};
use super::mht::{fdr_sharpened, fwer_adjust, FamilyMember, ResamplingSpec};
use super::ols::{ols_cluster, OlsOptions};
use super::StatsError;
use crate::dataset::{Covariate, SessionDataset};
use crate::scenario::{all_scenarios, HalfPriorRule};
use serde::{Deserialize, Serialize};
use std::collections::{BTreeMap, BTreeSet};

/// The coefficient family and how to test it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AnalysisSpec {
    pub outcome: Outcome,
    pub hypotheses: Vec<Hypothesis>,
    /// Non-empty switches to the subgroup specification: one regression per
    /// covariate, testing the `Hk × z` terms.
    pub interactions: Vec<(Hypothesis, Covariate)>,
    pub controls: Vec<Control>,
    pub cluster: ClusterLevel,
    pub half_prior: HalfPriorRule,
    /// Bootstrap replications for the step-down adjustment; 0 skips it.
    pub bootstrap_reps: usize,
    pub seed: u64,
    pub allow_collinear: bool,
    pub level: f64,
}

impl Default for AnalysisSpec {
    fn default() -> Self {
        Self {
            outcome: Outcome::ChoseSp,
            hypotheses: Hypothesis::ALL.to_vec(),
            interactions: Vec::new(),
            controls: Control::DEFAULT.to_vec(),
            cluster: ClusterLevel::Subject,
            half_prior: HalfPriorRule::default(),
            bootstrap_reps: super::mht::DEFAULT_BOOTSTRAP_REPS,
            seed: 0,
            allow_collinear: false,
            level: 0.95,
        }
    }
}

impl AnalysisSpec {
    /// H3 and H4 interacted with each subgroup dummy.
    pub fn subgroups(covariates: &[Covariate]) -> Self {
        Self {
            interactions: covariates
                .iter()
                .flat_map(|&z| [(Hypothesis::H3, z), (Hypothesis::H4, z)])
                .collect(),
            ..Self::default()
        }
    }

    /// The regressions making up the family.
    pub fn regressions(&self) -> Vec<RegressionSpec> {
        let base = RegressionSpec {
            outcome: self.outcome,
            hypotheses: Vec::new(),
            interactions: Vec::new(),
            controls: self.controls.clone(),
            cluster: self.cluster,
            half_prior: self.half_prior,
        };
        if !self.interactions.is_empty() {
            let mut by_z: BTreeMap<Covariate, Vec<Hypothesis>> = BTreeMap::new();
            for &(h, z) in &self.interactions {
                let hs = by_z.entry(z).or_default();
                if !hs.contains(&h) {
                    hs.push(h);
                }
            }
            return by_z
                .into_iter()
                .map(|(z, mut hs)| {
                    hs.sort();
                    RegressionSpec {
                        hypotheses: hs.clone(),
                        interactions: hs.iter().map(|&h| (h, z)).collect(),
                        ..base.clone()
                    }
                })
                .collect();
        }
        let mut hs: Vec<Hypothesis> = self.hypotheses.clone();
        hs.sort();
        hs.dedup();
        let env: Vec<Hypothesis> = hs.iter().copied().filter(|h| h.is_environment()).collect();
        let mut out = Vec::new();
        if !env.is_empty() {
            out.push(RegressionSpec {
                hypotheses: env,
                ..base.clone()
            });
        }
        for h in hs.into_iter().filter(|h| !h.is_environment()) {
            out.push(RegressionSpec {
                hypotheses: vec![h],
                ..base.clone()
            });
        }
        out
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CoefficientRow {
    pub term: String,
    pub estimate: f64,
    pub se: f64,
    pub ci_low: f64,
    pub ci_high: f64,
    pub p_unadjusted: f64,
    pub p_fwer: Option<f64>,
    pub q_fdr: f64,
    pub control_mean: f64,
    pub n_obs: usize,
    pub n_clusters: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct InferenceReport {
    pub rows: Vec<CoefficientRow>,
    /// Distinct observations used by any regression.
    pub n_obs: usize,
    pub n_clusters: usize,
    pub bootstrap_reps_used: usize,
    pub level: f64,
    pub interaction: bool,
}

impl InferenceReport {
    pub fn row(&self, term: &str) -> Option<&CoefficientRow> {
        self.rows.iter().find(|r| r.term == term)
    }
}

/// Fits every regression of the family and adjusts the tested terms jointly.
pub fn analyze(dataset: &SessionDataset, spec: &AnalysisSpec) -> Result<InferenceReport, StatsError> {
    if !(spec.level > 0.0 && spec.level < 1.0) {
        return Err(StatsError::InvalidSpec(format!("confidence level {} not in (0, 1)", spec.level)));
    }
    let regressions = spec.regressions();
    if regressions.is_empty() {
        return Err(StatsError::InvalidSpec("no hypotheses to test".into()));
    }
    let opts = OlsOptions {
        allow_collinear: spec.allow_collinear,
    };
    let mut designs: Vec<ModelDesign> = Vec::with_capacity(regressions.len());
    for r in &regressions {
        let mut md = build_design(dataset, r)?;
        if spec.allow_collinear {
            let keep = md.design.independent_columns();
            md.design = md.design.select_columns(&keep);
        }
        designs.push(md);
    }

    let mut rows = Vec::new();
    let mut members = Vec::new();
    for md in &designs {
        let fit = ols_cluster(&md.design, &opts)?;
        for term in &md.tested {
            let j = fit
                .index(term)
                .ok_or_else(|| StatsError::RankDeficient(vec![term.clone()]))?;
            let (lo, hi) = fit.conf_int(j, spec.level);
            let control_mean = if spec.interactions.is_empty() {
                md.control_mean
            } else {
                let base = term.split(':').next().unwrap_or(term);
                fit.index(base).map_or(f64::NAN, |b| fit.beta[b])
            };
            rows.push(CoefficientRow {
                term: term.clone(),
                estimate: fit.beta[j],
                se: fit.se[j],
                ci_low: lo,
                ci_high: hi,
                p_unadjusted: fit.p[j],
                p_fwer: None,
                q_fdr: f64::NAN,
                control_mean,
                n_obs: fit.n_obs,
                n_clusters: fit.n_clusters,
            });
            members.push(FamilyMember {
                design: &md.design,
                coef: j,
            });
        }
    }

    let pvals: Vec<f64> = rows.iter().map(|r| r.p_unadjusted).collect();
    for (r, q) in rows.iter_mut().zip(fdr_sharpened(&pvals)?) {
        r.q_fdr = q;
    }
    let mut reps_used = 0;
    if spec.bootstrap_reps > 0 {
        let res = fwer_adjust(
            &members,
            &ResamplingSpec {
                reps: spec.bootstrap_reps,
                seed: spec.seed,
            },
        )?;
        reps_used = res.reps_used;
        for (r, p) in rows.iter_mut().zip(res.adjusted) {
            r.p_fwer = Some(p);
        }
    }

    let used: BTreeSet<(u32, u8)> = dataset
        .rows()
        .iter()
        .filter(|r| {
            regressions
                .iter()
                .any(|spec| in_sample(r, &spec.all_hypotheses(), spec.half_prior))
        })
        .map(|r| (r.subject_id, r.period))
        .collect();
    let clusters: BTreeSet<u64> = designs.iter().flat_map(|d| d.design.clusters.iter().copied()).collect();
    Ok(InferenceReport {
        rows,
        n_obs: used.len(),
        n_clusters: clusters.len(),
        bootstrap_reps_used: reps_used,
        level: spec.level,
        interaction: !spec.interactions.is_empty(),
    })
}

/// SP frequency in one scenario compared with a baseline scenario.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FisherComparison {
    /// `None` pools all treatments.
    pub treatment: Option<u8>,
    pub scenario: u8,
    pub sp: u64,
    pub n: u64,
    pub baseline_scenario: u8,
    pub baseline_sp: u64,
    pub baseline_n: u64,
    pub p_greater: f64,
    pub p_less: f64,
    pub p_two_sided: f64,
}

impl FisherComparison {
    pub fn share(&self) -> f64 {
        self.sp as f64 / self.n as f64
    }

    pub fn baseline_share(&self) -> f64 {
        self.baseline_sp as f64 / self.baseline_n as f64
    }
}

/// Each gridlock scenario against `baseline` within every treatment present,
/// then pooled.
pub fn fisher_comparisons(dataset: &SessionDataset, baseline: u8) -> Result<Vec<FisherComparison>, StatsError> {
    crate::scenario::scenario(baseline).map_err(|e| StatsError::InvalidSpec(e.to_string()))?;
    dataset.require(&[crate::dataset::Column::ChoseSp])?;
    let mut counts: BTreeMap<(u8, u8), (u64, u64)> = BTreeMap::new();
    for r in dataset.rows() {
        let e = counts.entry((r.treatment, r.scenario)).or_default();
        e.0 += r.chose_sp as u64;
        e.1 += 1;
    }
    let treatments: BTreeSet<u8> = counts.keys().map(|k| k.0).collect();
    let gridlock: Vec<u8> = all_scenarios().iter().filter(|s| s.is_gridlock()).map(|s| s.id).collect();
    let get = |t: Option<u8>, sc: u8| -> (u64, u64) {
        match t {
            Some(t) => counts.get(&(t, sc)).copied().unwrap_or_default(),
            None => counts
                .iter()
                .filter(|(k, _)| k.1 == sc)
                .fold((0, 0), |acc, (_, v)| (acc.0 + v.0, acc.1 + v.1)),
        }
    };
    let mut out = Vec::new();
    for t in treatments.iter().map(|&t| Some(t)).chain([None]) {
        let (bx, bn) = get(t, baseline);
        for &sc in &gridlock {
            let (x, n) = get(t, sc);
            if n == 0 || bn == 0 {
                continue;
            }
            let table = ContingencyTable2x2::from_groups(x, n, bx, bn)?;
            out.push(FisherComparison {
                treatment: t,
                scenario: sc,
                sp: x,
                n,
                baseline_scenario: baseline,
                baseline_sp: bx,
                baseline_n: bn,
                p_greater: fisher_exact(&table, Sidedness::OneSidedGreater),
                p_less: fisher_exact(&table, Sidedness::OneSidedLess),
                p_two_sided: fisher_exact(&table, Sidedness::TwoSided),
            });
        }
    }
    if out.is_empty() {
        return Err(StatsError::EmptyCell(format!(
            "no treatment has both scenario {baseline} and a gridlock scenario"
        )));
    }
    Ok(out)
}

/// Two groups of treatments compared subject by subject.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct BalanceSplit {
    pub name: String,
    pub treated: Vec<u8>,
    pub comparison: Vec<u8>,
}

impl BalanceSplit {
    pub fn for_hypothesis(h: Hypothesis) -> Result<Self, StatsError> {
        let (treated, comparison) = h.treatment_split().ok_or_else(|| {
            StatsError::InvalidSpec(format!("{h} varies within subjects; there is no between-arm split"))
        })?;
        Ok(Self {
            name: h.label().to_string(),
            treated,
            comparison,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BalanceRow {
    pub split: String,
    pub covariate: Covariate,
    pub treated_yes: u64,
    pub treated_n: u64,
    pub comparison_yes: u64,
    pub comparison_n: u64,
    pub p_two_sided: f64,
}

/// Two-sided Fisher test of equal covariate shares across the split.
pub fn balance_fisher(
    dataset: &SessionDataset,
    covariates: &[Covariate],
    split: &BalanceSplit,
) -> Result<Vec<BalanceRow>, StatsError> {
    dataset.require(&covariates.iter().map(|c| c.column()).collect::<Vec<_>>())?;
    let subjects = dataset.subjects();
    let count = |g: &[u8], c: Option<Covariate>| {
        subjects
            .iter()
            .filter(|s| g.contains(&s.treatment) && c.is_none_or(|c| s.covariates.get(c)))
            .count() as u64
    };
    let tn = count(&split.treated, None);
    let cn = count(&split.comparison, None);
    if tn == 0 || cn == 0 {
        return Err(StatsError::EmptyCell(format!("split {} has an empty arm", split.name)));
    }
    covariates
        .iter()
        .map(|&c| {
            let ty = count(&split.treated, Some(c));
            let cy = count(&split.comparison, Some(c));
            let table = ContingencyTable2x2::from_groups(ty, tn, cy, cn)?;
            Ok(BalanceRow {
                split: split.name.clone(),
                covariate: c,
                treated_yes: ty,
                treated_n: tn,
                comparison_yes: cy,
                comparison_n: cn,
                p_two_sided: fisher_exact(&table, Sidedness::TwoSided),
            })
        })
        .collect()
}
