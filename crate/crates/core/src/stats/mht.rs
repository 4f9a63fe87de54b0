//! Multiple-hypothesis adjustments: free step-down resampling for the
//! family-wise error rate and two-stage sharpened q-values for the false
//! discovery rate.

use super::ols::{cluster_sums, fit_from_sums, t_pvalue, ClusterSums, Design};
use super::StatsError;
use crate::rng::stream_rng;
use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::collections::BTreeSet;

pub const DEFAULT_BOOTSTRAP_REPS: usize = 5000;
/// Significance grid used for q-values.
pub const FDR_GRID_STEPS: u32 = 10_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ResamplingSpec {
    pub reps: usize,
    pub seed: u64,
}

impl Default for ResamplingSpec {
    fn default() -> Self {
        Self {
            reps: DEFAULT_BOOTSTRAP_REPS,
            seed: 0,
        }
    }
}

/// One tested coefficient: column `coef` of `design`. Cluster labels are
/// shared across the family so every member sees the same resampled clusters.
#[derive(Debug, Clone, Copy)]
pub struct FamilyMember<'a> {
    pub design: &'a Design,
    pub coef: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FwerResult {
    pub unadjusted: Vec<f64>,
    pub adjusted: Vec<f64>,
    /// Replications with a nonsingular fit for every member.
    pub reps_used: usize,
}

struct Prepared<'a> {
    coef: usize,
    beta: f64,
    p: f64,
    by_cluster: Vec<Option<&'a ClusterSums>>,
}

/// Step-down min-p adjustment with a pairs cluster bootstrap. Bootstrap
/// statistics are centered at the full-sample estimate, studentized with
/// the resample's own clustered SE, and mapped to p-values through t(G − 1)
/// so members with different precision are comparable.
pub fn fwer_adjust(family: &[FamilyMember<'_>], spec: &ResamplingSpec) -> Result<FwerResult, StatsError> {
    if family.is_empty() {
        return Err(StatsError::InvalidInput("empty hypothesis family".into()));
    }
    if spec.reps == 0 {
        return Err(StatsError::InvalidInput("bootstrap needs at least one replication".into()));
    }
    let labels: Vec<u64> = family
        .iter()
        .flat_map(|m| m.design.clusters.iter().copied())
        .collect::<BTreeSet<_>>()
        .into_iter()
        .collect();
    if labels.len() < 2 {
        return Err(StatsError::TooFewClusters(labels.len()));
    }
    let sums: Vec<_> = family.iter().map(|m| cluster_sums(m.design)).collect();
    let mut prepared = Vec::with_capacity(family.len());
    for (m, s) in family.iter().zip(&sums) {
        let (beta, vcov, _, g) =
            fit_from_sums(s.values().map(|c| (c, 1usize))).ok_or_else(|| StatsError::RankDeficient(vec![]))?;
        let t = beta[m.coef] / vcov[(m.coef, m.coef)].sqrt();
        prepared.push(Prepared {
            coef: m.coef,
            beta: beta[m.coef],
            p: t_pvalue(t, (g - 1) as f64),
            by_cluster: labels.iter().map(|l| s.get(l)).collect(),
        });
    }

    let k = family.len();
    let mut order: Vec<usize> = (0..k).collect();
    order.sort_by(|&i, &j| prepared[i].p.total_cmp(&prepared[j].p).then(i.cmp(&j)));

    let g = labels.len();
    let (hits, used) = (0..spec.reps)
        .into_par_iter()
        .map(|b| {
            let mut rng = stream_rng(spec.seed, b as u64);
            let mut w = vec![0usize; g];
            for _ in 0..g {
                w[rng.random_range(0..g)] += 1;
            }
            let mut pstar = vec![0.0; k];
            for (i, m) in prepared.iter().enumerate() {
                let drawn = m.by_cluster.iter().zip(&w).filter_map(|(s, &wi)| s.map(|s| (s, wi)));
                let (beta, vcov, _, gs) = fit_from_sums(drawn)?;
                let se = vcov[(m.coef, m.coef)].sqrt();
                if !(se > 0.0) {
                    return None;
                }
                pstar[i] = t_pvalue((beta[m.coef] - m.beta) / se, (gs - 1) as f64);
            }
            let mut hit = vec![0u32; k];
            let mut running = f64::INFINITY;
            for pos in (0..k).rev() {
                let i = order[pos];
                running = running.min(pstar[i]);
                if running <= prepared[i].p {
                    hit[pos] = 1;
                }
            }
            Some(hit)
        })
        .fold(
            || (vec![0u64; k], 0usize),
            |(mut acc, n), hit| match hit {
                Some(h) => {
                    acc.iter_mut().zip(h).for_each(|(a, x)| *a += x as u64);
                    (acc, n + 1)
                }
                None => (acc, n),
            },
        )
        .reduce(
            || (vec![0u64; k], 0usize),
            |(mut a, n), (b, m)| {
                a.iter_mut().zip(b).for_each(|(x, y)| *x += y);
                (a, n + m)
            },
        );
    if used == 0 {
        return Err(StatsError::RankDeficient(vec!["every bootstrap resample".into()]));
    }

    let unadjusted: Vec<f64> = prepared.iter().map(|m| m.p).collect();
    let mut adjusted = vec![0.0; k];
    let mut running: f64 = 0.0;
    for (pos, &i) in order.iter().enumerate() {
        running = running.max(hits[pos] as f64 / used as f64).max(unadjusted[i]);
        adjusted[i] = running.min(1.0);
    }
    Ok(FwerResult {
        unadjusted,
        adjusted,
        reps_used: used,
    })
}

/// Largest `j` (1-based) with `p_(j) ≤ j·level/m`; `sorted` ascending.
fn step_up_count(sorted: &[f64], level: f64) -> usize {
    let m = sorted.len() as f64;
    sorted
        .iter()
        .enumerate()
        .rev()
        .find(|(j, p)| **p <= (*j + 1) as f64 * level / m)
        .map_or(0, |(j, _)| j + 1)
}

/// Largest p-value rejected by the two-stage procedure at `level`, if any.
fn two_stage_cutoff(sorted: &[f64], level: f64) -> Option<f64> {
    let m = sorted.len();
    let q1 = level / (1.0 + level);
    let r1 = step_up_count(sorted, q1);
    if r1 == 0 {
        return None;
    }
    if r1 == m {
        return Some(f64::INFINITY);
    }
    let q2 = q1 * m as f64 / (m - r1) as f64;
    match step_up_count(sorted, q2) {
        0 => None,
        r2 => Some(sorted[r2 - 1]),
    }
}

/// Sharpened q-values: the smallest level on a 0.0001 grid at which the
/// two-stage step-up procedure rejects each hypothesis; 1 if none does.
pub fn fdr_sharpened(pvals: &[f64]) -> Result<Vec<f64>, StatsError> {
    if pvals.is_empty() {
        return Err(StatsError::InvalidInput("empty hypothesis family".into()));
    }
    if let Some(bad) = pvals.iter().find(|p| !(0.0..=1.0).contains(*p)) {
        return Err(StatsError::InvalidInput(format!("p-value {bad} outside [0, 1]")));
    }
    let mut sorted = pvals.to_vec();
    sorted.sort_by(f64::total_cmp);
    let mut q = vec![1.0; pvals.len()];
    let mut open: Vec<usize> = (0..pvals.len()).collect();
    for k in 1..=FDR_GRID_STEPS {
        if open.is_empty() {
            break;
        }
        let level = k as f64 / FDR_GRID_STEPS as f64;
        if let Some(cut) = two_stage_cutoff(&sorted, level) {
            open.retain(|&i| {
                if pvals[i] <= cut {
                    q[i] = level;
                    false
                } else {
                    true
                }
            });
        }
    }
    Ok(q)
}
