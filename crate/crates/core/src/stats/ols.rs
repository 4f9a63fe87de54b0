//! Least squares with cluster-robust (CR1) standard errors.

use super::StatsError;
use nalgebra::{DMatrix, DVector};
use statrs::distribution::{ContinuousCDF, StudentsT};
use std::collections::BTreeMap;

/// Relative tolerance for a column to count as linearly independent of the
/// columns before it.
const COLLINEAR_RTOL: f64 = 1e-9;

/// Regressors, outcome and cluster labels for one regression.
#[derive(Debug, Clone, PartialEq)]
pub struct Design {
    pub names: Vec<String>,
    pub x: DMatrix<f64>,
    pub y: DVector<f64>,
    pub clusters: Vec<u64>,
}

impl Design {
    pub fn new(names: Vec<String>, x: DMatrix<f64>, y: DVector<f64>, clusters: Vec<u64>) -> Result<Self, StatsError> {
        if x.ncols() != names.len() {
            return Err(StatsError::InvalidInput(format!(
                "{} columns but {} names",
                x.ncols(),
                names.len()
            )));
        }
        if x.nrows() != y.len() || x.nrows() != clusters.len() {
            return Err(StatsError::InvalidInput(format!(
                "row counts differ: x {}, y {}, clusters {}",
                x.nrows(),
                y.len(),
                clusters.len()
            )));
        }
        Ok(Self { names, x, y, clusters })
    }

    pub fn n_obs(&self) -> usize {
        self.y.len()
    }

    pub fn n_clusters(&self) -> usize {
        let mut c = self.clusters.clone();
        c.sort_unstable();
        c.dedup();
        c.len()
    }

    pub fn column(&self, name: &str) -> Option<usize> {
        self.names.iter().position(|n| n == name)
    }

    /// Indices of a maximal linearly independent prefix-greedy column set.
    pub fn independent_columns(&self) -> Vec<usize> {
        let mut basis: Vec<DVector<f64>> = Vec::new();
        let mut keep = Vec::new();
        for j in 0..self.x.ncols() {
            let col = self.x.column(j).into_owned();
            let norm = col.norm();
            if norm == 0.0 {
                continue;
            }
            let mut r = col;
            // Two passes of Gram-Schmidt for stability.
            for _ in 0..2 {
                for q in &basis {
                    let proj = q.dot(&r);
                    r -= q * proj;
                }
            }
            let rn = r.norm();
            if rn > COLLINEAR_RTOL * norm {
                basis.push(r / rn);
                keep.push(j);
            }
        }
        keep
    }

    pub fn select_columns(&self, keep: &[usize]) -> Self {
        Self {
            names: keep.iter().map(|&j| self.names[j].clone()).collect(),
            x: self.x.select_columns(keep),
            y: self.y.clone(),
            clusters: self.clusters.clone(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct OlsOptions {
    /// Drop collinear columns instead of failing.
    pub allow_collinear: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct OlsFit {
    pub names: Vec<String>,
    pub beta: Vec<f64>,
    pub se: Vec<f64>,
    pub t: Vec<f64>,
    pub p: Vec<f64>,
    pub vcov: DMatrix<f64>,
    pub n_obs: usize,
    pub n_clusters: usize,
    /// Columns removed as collinear.
    pub dropped: Vec<String>,
}

impl OlsFit {
    pub fn index(&self, name: &str) -> Option<usize> {
        self.names.iter().position(|n| n == name)
    }

    pub fn df(&self) -> f64 {
        (self.n_clusters - 1) as f64
    }

    /// Two-sided confidence interval at `level` from t(G − 1).
    pub fn conf_int(&self, j: usize, level: f64) -> (f64, f64) {
        let t = students_t(self.df()).inverse_cdf(0.5 + level / 2.0);
        (self.beta[j] - t * self.se[j], self.beta[j] + t * self.se[j])
    }
}

fn students_t(df: f64) -> StudentsT {
    StudentsT::new(0.0, 1.0, df).expect("positive degrees of freedom")
}

/// Two-sided p-value of `t` against t(df).
pub fn t_pvalue(t: f64, df: f64) -> f64 {
    if !t.is_finite() {
        return if t.is_nan() { 1.0 } else { 0.0 };
    }
    (2.0 * students_t(df).sf(t.abs())).clamp(0.0, 1.0)
}

/// Per-cluster cross products: everything the estimator needs from the data.
#[derive(Debug, Clone, PartialEq)]
pub struct ClusterSums {
    pub xtx: DMatrix<f64>,
    pub xty: DVector<f64>,
    pub n: usize,
}

/// Cross products grouped by cluster label, in label order.
pub fn cluster_sums(design: &Design) -> BTreeMap<u64, ClusterSums> {
    let k = design.x.ncols();
    let mut out: BTreeMap<u64, ClusterSums> = BTreeMap::new();
    for (i, &g) in design.clusters.iter().enumerate() {
        let e = out.entry(g).or_insert_with(|| ClusterSums {
            xtx: DMatrix::zeros(k, k),
            xty: DVector::zeros(k),
            n: 0,
        });
        let row = design.x.row(i);
        let yi = design.y[i];
        for a in 0..k {
            let ra = row[a];
            if ra == 0.0 {
                continue;
            }
            e.xty[a] += ra * yi;
            for b in 0..k {
                e.xtx[(a, b)] += ra * row[b];
            }
        }
        e.n += 1;
    }
    out
}

/// Estimates and CR1 covariance from a weighted collection of cluster sums.
/// Each cluster enters `w` times as distinct clusters. Returns `None` if the
/// pooled cross-product matrix is singular.
pub fn fit_from_sums<'a, I>(sums: I) -> Option<(DVector<f64>, DMatrix<f64>, usize, usize)>
where
    I: IntoIterator<Item = (&'a ClusterSums, usize)> + Clone,
{
    let mut iter = sums.clone().into_iter().peekable();
    let k = iter.peek()?.0.xty.len();
    let mut xtx = DMatrix::zeros(k, k);
    let mut xty = DVector::zeros(k);
    let mut n = 0;
    let mut g = 0;
    for (s, w) in sums.clone() {
        if w == 0 {
            continue;
        }
        let wf = w as f64;
        xtx += &s.xtx * wf;
        xty += &s.xty * wf;
        n += s.n * w;
        g += w;
    }
    if g < 2 || n <= k {
        return None;
    }
    let chol = xtx.clone().cholesky()?;
    let bread = chol.inverse();
    // Reject near-singular systems the factorization lets through.
    let scale = xtx.diagonal().iter().fold(0.0_f64, |m, v| m.max(v.abs()));
    if bread.diagonal().iter().any(|v| !v.is_finite() || *v * scale > 1e12) {
        return None;
    }
    let beta = &bread * &xty;
    let mut meat = DMatrix::zeros(k, k);
    for (s, w) in sums {
        if w == 0 {
            continue;
        }
        let u = &s.xty - &s.xtx * &beta;
        meat += (&u * u.transpose()) * w as f64;
    }
    let c = (g as f64 / (g - 1) as f64) * ((n - 1) as f64 / (n - k) as f64);
    let vcov = &bread * meat * &bread * c;
    Some((beta, vcov, n, g))
}

/// OLS with standard errors clustered on `design.clusters`.
pub fn ols_cluster(design: &Design, opts: &OlsOptions) -> Result<OlsFit, StatsError> {
    let g = design.n_clusters();
    if g < 2 {
        return Err(StatsError::TooFewClusters(g));
    }
    let keep = design.independent_columns();
    let mut dropped = Vec::new();
    let working;
    let design = if keep.len() < design.x.ncols() {
        dropped = (0..design.x.ncols())
            .filter(|j| !keep.contains(j))
            .map(|j| design.names[j].clone())
            .collect();
        if !opts.allow_collinear {
            return Err(StatsError::RankDeficient(dropped));
        }
        working = design.select_columns(&keep);
        &working
    } else {
        design
    };
    let k = design.x.ncols();
    if design.n_obs() <= k {
        return Err(StatsError::InvalidInput(format!(
            "{} observations for {} regressors",
            design.n_obs(),
            k
        )));
    }
    let sums = cluster_sums(design);
    let (beta, vcov, n, g) =
        fit_from_sums(sums.values().map(|s| (s, 1usize))).ok_or_else(|| StatsError::RankDeficient(vec![]))?;
    let df = (g - 1) as f64;
    let se: Vec<f64> = (0..k).map(|j| vcov[(j, j)].max(0.0).sqrt()).collect();
    let t: Vec<f64> = (0..k).map(|j| beta[j] / se[j]).collect();
    let p = t.iter().map(|&t| t_pvalue(t, df)).collect();
    Ok(OlsFit {
        names: design.names.clone(),
        beta: beta.iter().copied().collect(),
        se,
        t,
        p,
        vcov,
        n_obs: n,
        n_clusters: g,
        dropped,
    })
}
