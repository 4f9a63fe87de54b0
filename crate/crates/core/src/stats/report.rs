//! CSV and aligned plain-text renderings of the stats outputs.

use super::analyze::{BalanceRow, FisherComparison, InferenceReport};

pub const INFERENCE_HEADER: [&str; 11] = [
    "term",
    "estimate",
    "se",
    "ci_low",
    "ci_high",
    "p_unadjusted",
    "p_fwer",
    "q_fdr",
    "control_mean",
    "n_obs",
    "n_clusters",
];

pub const FISHER_HEADER: [&str; 10] = [
    "treatment",
    "scenario",
    "sp",
    "n",
    "baseline_scenario",
    "baseline_sp",
    "baseline_n",
    "p_greater",
    "p_less",
    "p_two_sided",
];

pub const BALANCE_HEADER: [&str; 7] = [
    "split",
    "covariate",
    "treated_yes",
    "treated_n",
    "comparison_yes",
    "comparison_n",
    "p_two_sided",
];

fn num(x: f64) -> String {
    if x.is_nan() {
        String::new()
    } else {
        format!("{x:.6}")
    }
}

fn csv_string(header: &[&str], rows: &[Vec<String>]) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(header).expect("in-memory write");
    for r in rows {
        w.write_record(r).expect("in-memory write");
    }
    String::from_utf8(w.into_inner().expect("in-memory flush")).expect("utf-8 output")
}

/// Left-aligned first column, right-aligned others, two-space gutters.
pub fn render_table(header: &[&str], rows: &[Vec<String>]) -> String {
    let mut width: Vec<usize> = header.iter().map(|h| h.chars().count()).collect();
    for r in rows {
        for (w, c) in width.iter_mut().zip(r) {
            *w = (*w).max(c.chars().count());
        }
    }
    let line = |cells: Vec<&str>| -> String {
        let mut s = String::new();
        for (j, (c, w)) in cells.iter().zip(&width).enumerate() {
            if j > 0 {
                s.push_str("  ");
            }
            if j == 0 {
                s.push_str(&format!("{c:<w$}"));
            } else {
                s.push_str(&format!("{c:>w$}"));
            }
        }
        s.trim_end().to_string() + "\n"
    };
    let mut out = line(header.to_vec());
    out.push_str(&line(width.iter().map(|w| "-".repeat(*w)).collect::<Vec<_>>().iter().map(String::as_str).collect()));
    for r in rows {
        out.push_str(&line(r.iter().map(String::as_str).collect()));
    }
    out
}

impl InferenceReport {
    fn cells(&self) -> Vec<Vec<String>> {
        self.rows
            .iter()
            .map(|r| {
                vec![
                    r.term.clone(),
                    num(r.estimate),
                    num(r.se),
                    num(r.ci_low),
                    num(r.ci_high),
                    num(r.p_unadjusted),
                    r.p_fwer.map(num).unwrap_or_default(),
                    num(r.q_fdr),
                    num(r.control_mean),
                    r.n_obs.to_string(),
                    r.n_clusters.to_string(),
                ]
            })
            .collect()
    }

    pub fn to_csv(&self) -> String {
        csv_string(&INFERENCE_HEADER, &self.cells())
    }

    /// Difference, unadjusted and adjusted p-values and the comparison mean.
    pub fn to_text(&self) -> String {
        let base = if self.interaction { "Base effect" } else { "Control mean" };
        let header = ["", "Difference", "(SE)", "Unadjusted p", "FWER p", "FDR q", base];
        let rows: Vec<Vec<String>> = self
            .rows
            .iter()
            .map(|r| {
                vec![
                    r.term.clone(),
                    format!("{:.3}", r.estimate),
                    format!("({:.3})", r.se),
                    format!("{:.3}", r.p_unadjusted),
                    r.p_fwer.map_or("-".into(), |p| format!("{p:.3}")),
                    format!("{:.3}", r.q_fdr),
                    format!("{:.3}", r.control_mean),
                ]
            })
            .collect();
        let mut out = render_table(&header, &rows);
        out.push_str(&format!(
            "Observations: {}  Clusters: {}  Bootstrap replications: {}\n",
            self.n_obs, self.n_clusters, self.bootstrap_reps_used
        ));
        out.push_str(
            "OLS with clustered SEs (CR1, t with G-1 df). FWER: free step-down min-p, pairs cluster bootstrap of \
             centered t-statistics. FDR: two-stage sharpened q-values.\n",
        );
        out
    }
}

fn fisher_cells(rows: &[FisherComparison]) -> Vec<Vec<String>> {
    rows.iter()
        .map(|r| {
            vec![
                r.treatment.map_or("all".into(), |t| t.to_string()),
                r.scenario.to_string(),
                r.sp.to_string(),
                r.n.to_string(),
                r.baseline_scenario.to_string(),
                r.baseline_sp.to_string(),
                r.baseline_n.to_string(),
                num(r.p_greater),
                num(r.p_less),
                num(r.p_two_sided),
            ]
        })
        .collect()
}

pub fn fisher_csv(rows: &[FisherComparison]) -> String {
    csv_string(&FISHER_HEADER, &fisher_cells(rows))
}

pub fn fisher_text(rows: &[FisherComparison]) -> String {
    let header = ["Treatment", "Scenario", "SP share", "Obs.", "Baseline share", "Obs.", "p (>)", "p (<)", "p (2-sided)"];
    let cells: Vec<Vec<String>> = rows
        .iter()
        .map(|r| {
            vec![
                r.treatment.map_or("all".into(), |t| t.to_string()),
                r.scenario.to_string(),
                format!("{:.3}", r.share()),
                r.n.to_string(),
                format!("{:.3}", r.baseline_share()),
                r.baseline_n.to_string(),
                format!("{:.3}", r.p_greater),
                format!("{:.3}", r.p_less),
                format!("{:.3}", r.p_two_sided),
            ]
        })
        .collect();
    render_table(&header, &cells)
}

fn balance_cells(rows: &[BalanceRow]) -> Vec<Vec<String>> {
    rows.iter()
        .map(|r| {
            vec![
                r.split.clone(),
                r.covariate.column().name().to_string(),
                r.treated_yes.to_string(),
                r.treated_n.to_string(),
                r.comparison_yes.to_string(),
                r.comparison_n.to_string(),
                num(r.p_two_sided),
            ]
        })
        .collect()
}

pub fn balance_csv(rows: &[BalanceRow]) -> String {
    csv_string(&BALANCE_HEADER, &balance_cells(rows))
}

pub fn balance_text(rows: &[BalanceRow]) -> String {
    let header = ["Split", "Covariate", "Treated", "Comparison", "p (2-sided)"];
    let cells: Vec<Vec<String>> = rows
        .iter()
        .map(|r| {
            vec![
                r.split.clone(),
                r.covariate.label().to_string(),
                format!("{:.3}", r.treated_yes as f64 / r.treated_n as f64),
                format!("{:.3}", r.comparison_yes as f64 / r.comparison_n as f64),
                format!("{:.3}", r.p_two_sided),
            ]
        })
        .collect();
    render_table(&header, &cells)
}
