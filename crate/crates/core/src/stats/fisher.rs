//! Exact tests on 2×2 tables.

use super::StatsError;
use serde::{Deserialize, Serialize};
use statrs::function::factorial::ln_binomial;
use std::fmt;
use std::str::FromStr;

/// Point probabilities within this relative distance of the observed one
/// count as "as extreme" in the two-sided test.
const TIE_RTOL: f64 = 1e-7;

/// `[[a, b], [c, d]]`: rows are groups, columns are (success, failure).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct ContingencyTable2x2 {
    pub a: u64,
    pub b: u64,
    pub c: u64,
    pub d: u64,
}

impl ContingencyTable2x2 {
    pub fn new(a: u64, b: u64, c: u64, d: u64) -> Result<Self, StatsError> {
        if a + b + c + d == 0 {
            return Err(StatsError::EmptyTable);
        }
        Ok(Self { a, b, c, d })
    }

    /// Two groups given as (successes, size).
    pub fn from_groups(x1: u64, n1: u64, x2: u64, n2: u64) -> Result<Self, StatsError> {
        if x1 > n1 || x2 > n2 {
            return Err(StatsError::InvalidInput(format!("successes exceed group size: {x1}/{n1}, {x2}/{n2}")));
        }
        Self::new(x1, n1 - x1, x2, n2 - x2)
    }

    pub fn total(&self) -> u64 {
        self.a + self.b + self.c + self.d
    }

    pub fn row1(&self) -> u64 {
        self.a + self.b
    }

    pub fn col1(&self) -> u64 {
        self.a + self.c
    }

    /// Some row or column total is zero, so the table is fixed by its margins.
    pub fn is_degenerate(&self) -> bool {
        self.a + self.b == 0 || self.c + self.d == 0 || self.a + self.c == 0 || self.b + self.d == 0
    }

    /// Range of `a` compatible with the margins.
    pub fn support(&self) -> (u64, u64) {
        let (n, r, k) = (self.total(), self.row1(), self.col1());
        ((r + k).saturating_sub(n), r.min(k))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Sidedness {
    /// Group 1 has the higher success rate under the alternative.
    OneSidedGreater,
    OneSidedLess,
    TwoSided,
}

impl fmt::Display for Sidedness {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Sidedness::OneSidedGreater => "greater",
            Sidedness::OneSidedLess => "less",
            Sidedness::TwoSided => "two-sided",
        })
    }
}

impl FromStr for Sidedness {
    type Err = StatsError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "greater" | "one-sided-greater" => Ok(Sidedness::OneSidedGreater),
            "less" | "one-sided-less" => Ok(Sidedness::OneSidedLess),
            "two-sided" | "two" | "both" => Ok(Sidedness::TwoSided),
            other => Err(StatsError::InvalidInput(format!("unknown sidedness '{other}'"))),
        }
    }
}

/// Hypergeometric p-value for the count in the top-left cell.
pub fn fisher_exact(table: &ContingencyTable2x2, sidedness: Sidedness) -> f64 {
    if table.is_degenerate() {
        return 1.0;
    }
    let (lo, hi) = table.support();
    let (n, r, k) = (table.total(), table.row1(), table.col1());
    let logp: Vec<f64> = (lo..=hi)
        .map(|x| ln_binomial(k, x) + ln_binomial(n - k, r - x))
        .collect();
    // Scale by the mode so the weights are O(1) before normalizing.
    let peak = logp.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let w: Vec<f64> = logp.iter().map(|l| (l - peak).exp()).collect();
    let total: f64 = w.iter().sum();
    let obs = (table.a - lo) as usize;
    let tail: f64 = match sidedness {
        Sidedness::OneSidedGreater => w[obs..].iter().sum(),
        Sidedness::OneSidedLess => w[..=obs].iter().sum(),
        Sidedness::TwoSided => {
            let cut = w[obs] * (1.0 + TIE_RTOL);
            w.iter().filter(|&&v| v <= cut).sum()
        }
    };
    (tail / total).clamp(0.0, 1.0)
}
