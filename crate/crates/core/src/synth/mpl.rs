//! Risk-attitude classification from a multiple price list.

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum MplError {
    #[error("choice sheet is empty")]
    Empty,
    #[error("sheet has {sheet} rows but the price list has {list}")]
    LengthMismatch { sheet: usize, list: usize },
    #[error("inconsistent sheet: switches back to A at row {row}")]
    MultipleSwitches { row: usize },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum MplChoice {
    /// The safer lottery.
    A,
    /// The riskier lottery.
    B,
}

/// One row: lottery A pays `a_high`/`a_low`, lottery B pays `b_high`/`b_low`,
/// each high prize with probability `prob_high`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LotteryPair {
    pub prob_high: f64,
    pub a_high: f64,
    pub a_low: f64,
    pub b_high: f64,
    pub b_low: f64,
}

impl LotteryPair {
    pub fn expected_a(&self) -> f64 {
        self.prob_high * self.a_high + (1.0 - self.prob_high) * self.a_low
    }

    pub fn expected_b(&self) -> f64 {
        self.prob_high * self.b_high + (1.0 - self.prob_high) * self.b_low
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PriceList {
    pub rows: Vec<LotteryPair>,
}

impl PriceList {
    /// The ten-row list with A = (2.00, 1.60), B = (3.85, 0.10) and the high
    /// prize probability rising from 0.1 to 1.0.
    pub fn holt_laury() -> Self {
        Self {
            rows: (1..=10)
                .map(|k| LotteryPair {
                    prob_high: k as f64 / 10.0,
                    a_high: 2.00,
                    a_low: 1.60,
                    b_high: 3.85,
                    b_low: 0.10,
                })
                .collect(),
        }
    }

    /// First row (1-based) where a risk-neutral chooser prefers B.
    pub fn risk_neutral_row(&self) -> Option<usize> {
        self.rows.iter().position(|r| r.expected_b() > r.expected_a()).map(|i| i + 1)
    }
}

impl Default for PriceList {
    fn default() -> Self {
        Self::holt_laury()
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MplChoiceSheet {
    rows: Vec<MplChoice>,
}

impl MplChoiceSheet {
    pub fn new(rows: Vec<MplChoice>) -> Result<Self, MplError> {
        if rows.is_empty() {
            return Err(MplError::Empty);
        }
        Ok(Self { rows })
    }

    /// Parses a string such as `"AAAAAABBBB"`.
    pub fn parse(s: &str) -> Result<Self, MplError> {
        Self::new(
            s.chars()
                .filter(|c| !c.is_whitespace() && *c != ',')
                .map(|c| if c.eq_ignore_ascii_case(&'b') { MplChoice::B } else { MplChoice::A })
                .collect(),
        )
    }

    pub fn rows(&self) -> &[MplChoice] {
        &self.rows
    }

    /// Row (1-based) of the single A→B switch; `None` if B is never chosen.
    pub fn switch_row(&self) -> Result<Option<usize>, MplError> {
        let first_b = self.rows.iter().position(|c| *c == MplChoice::B);
        if let Some(start) = first_b {
            if let Some(back) = self.rows[start..].iter().position(|c| *c == MplChoice::A) {
                return Err(MplError::MultipleSwitches { row: start + back + 1 });
            }
        }
        Ok(first_b.map(|i| i + 1))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct MplClassification {
    pub risk_averse: bool,
    pub switch_row: Option<usize>,
}

/// A subject is risk averse when they switch to B later than a risk-neutral
/// chooser would, or never.
pub fn classify_mpl(sheet: &MplChoiceSheet, list: &PriceList) -> Result<MplClassification, MplError> {
    if sheet.rows.len() != list.rows.len() {
        return Err(MplError::LengthMismatch {
            sheet: sheet.rows.len(),
            list: list.rows.len(),
        });
    }
    let switch_row = sheet.switch_row()?;
    let neutral = list.risk_neutral_row();
    let risk_averse = match (switch_row, neutral) {
        (None, _) => true,
        (Some(s), Some(n)) => s > n,
        (Some(_), None) => false,
    };
    Ok(MplClassification {
        risk_averse,
        switch_row,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn classify(s: &str) -> Result<MplClassification, MplError> {
        classify_mpl(&MplChoiceSheet::parse(s).unwrap(), &PriceList::holt_laury())
    }

    #[test]
    fn neutral_row_from_payoffs() {
        // EV(B) - EV(A) = 3.35 p - 1.5 turns positive between p = 0.4 and 0.5.
        let list = PriceList::holt_laury();
        let r4 = list.rows[3];
        let r5 = list.rows[4];
        assert!(r4.expected_b() < r4.expected_a());
        assert!(r5.expected_b() > r5.expected_a());
        assert_eq!(list.risk_neutral_row(), Some(5));
    }

    #[test]
    fn examples() {
        assert_eq!(
            classify("AAAAAAAAAA").unwrap(),
            MplClassification {
                risk_averse: true,
                switch_row: None
            }
        );
        assert_eq!(
            classify("BBBBBBBBBB").unwrap(),
            MplClassification {
                risk_averse: false,
                switch_row: Some(1)
            }
        );
        let late = classify("AAAAAABBBB").unwrap();
        assert!(late.risk_averse);
        assert_eq!(late.switch_row, Some(7));
        assert!(!classify("AAAABBBBBB").unwrap().risk_averse);
    }

    #[test]
    fn errors() {
        assert_eq!(classify("AABABBBBBB"), Err(MplError::MultipleSwitches { row: 4 }));
        assert_eq!(MplChoiceSheet::new(vec![]), Err(MplError::Empty));
        assert!(matches!(classify("AAB"), Err(MplError::LengthMismatch { .. })));
    }
}
