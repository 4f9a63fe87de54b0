//! Subject × period panel of decisions and its CSV form.
//!
//! Header (one row per subject-period, booleans as 0/1, types as C/R/U):
//!
//! ```text
//! subject_id,session_id,treatment,period,scenario,x_type,l_type,p_x,p_l,gridlock,chose_sp,mistakes,female,risk_averse,right_wing,strong_leader,payoff
//! ```
//!
//! External files can be read through a [`ColumnMapping`] that renames source
//! columns onto the canonical names. Only `subject_id`, `treatment`,
//! `scenario` and `chose_sp` are mandatory; derived columns are recomputed
//! from the scenario catalog and checked when present.

use crate::model::{Policy, PoliticianType};
use crate::scenario::{hypothesis_class, scenario, treatment_params, HalfPriorRule, HypothesisClass, Scenario};
use serde::{Deserialize, Serialize};
use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;
use std::io::{Read, Write};
use thiserror::Error;

pub const HEADER: [&str; 17] = [
    "subject_id",
    "session_id",
    "treatment",
    "period",
    "scenario",
    "x_type",
    "l_type",
    "p_x",
    "p_l",
    "gridlock",
    "chose_sp",
    "mistakes",
    "female",
    "risk_averse",
    "right_wing",
    "strong_leader",
    "payoff",
];

const REQUIRED: [Column; 4] = [Column::SubjectId, Column::Treatment, Column::Scenario, Column::ChoseSp];

#[derive(Debug, Error)]
pub enum DataError {
    #[error("missing column(s): {}", .0.join(", "))]
    MissingColumns(Vec<String>),
    #[error("row {row}: column `{column}`: {message}")]
    BadValue {
        row: usize,
        column: String,
        message: String,
    },
    #[error("row {row}: {message}")]
    Inconsistent { row: usize, message: String },
    #[error("subject {subject}: {message}")]
    Subject { subject: u32, message: String },
    #[error("dataset has no rows")]
    Empty,
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
    #[error("io: {0}")]
    Io(#[from] std::io::Error),
}

/// Canonical dataset columns.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Column {
    SubjectId,
    SessionId,
    Treatment,
    Period,
    Scenario,
    XType,
    LType,
    PX,
    PL,
    Gridlock,
    ChoseSp,
    Mistakes,
    Female,
    RiskAverse,
    RightWing,
    StrongLeader,
    Payoff,
}

impl Column {
    pub const ALL: [Column; 17] = [
        Column::SubjectId,
        Column::SessionId,
        Column::Treatment,
        Column::Period,
        Column::Scenario,
        Column::XType,
        Column::LType,
        Column::PX,
        Column::PL,
        Column::Gridlock,
        Column::ChoseSp,
        Column::Mistakes,
        Column::Female,
        Column::RiskAverse,
        Column::RightWing,
        Column::StrongLeader,
        Column::Payoff,
    ];

    pub fn name(self) -> &'static str {
        HEADER[self as usize]
    }

    pub fn from_name(name: &str) -> Option<Column> {
        HEADER.iter().position(|h| *h == name).map(|i| Column::ALL[i])
    }
}

impl fmt::Display for Column {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Binary subject characteristics used as controls and subgroup dummies.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Covariate {
    Mistakes,
    Female,
    RiskAverse,
    RightWing,
    StrongLeader,
}

impl Covariate {
    pub const ALL: [Covariate; 5] = [
        Covariate::Mistakes,
        Covariate::RiskAverse,
        Covariate::Female,
        Covariate::RightWing,
        Covariate::StrongLeader,
    ];

    pub fn column(self) -> Column {
        match self {
            Covariate::Mistakes => Column::Mistakes,
            Covariate::Female => Column::Female,
            Covariate::RiskAverse => Column::RiskAverse,
            Covariate::RightWing => Column::RightWing,
            Covariate::StrongLeader => Column::StrongLeader,
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            Covariate::Mistakes => "mistakes",
            Covariate::Female => "female",
            Covariate::RiskAverse => "risk averse",
            Covariate::RightWing => "right wing",
            Covariate::StrongLeader => "strong leader",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Hash)]
pub struct Covariates {
    pub mistakes: bool,
    pub female: bool,
    pub risk_averse: bool,
    pub right_wing: bool,
    pub strong_leader: bool,
}

impl Covariates {
    pub fn get(&self, c: Covariate) -> bool {
        match c {
            Covariate::Mistakes => self.mistakes,
            Covariate::Female => self.female,
            Covariate::RiskAverse => self.risk_averse,
            Covariate::RightWing => self.right_wing,
            Covariate::StrongLeader => self.strong_leader,
        }
    }
}

/// One subject's decision in one period.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DecisionRow {
    pub subject_id: u32,
    pub session_id: u32,
    pub treatment: u8,
    pub period: u8,
    pub scenario: u8,
    pub chose_sp: bool,
    pub covariates: Covariates,
    pub payoff: f64,
}

impl DecisionRow {
    pub fn scenario(&self) -> Scenario {
        scenario(self.scenario).expect("validated scenario id")
    }

    pub fn gridlock(&self) -> bool {
        self.scenario().is_gridlock()
    }

    pub fn hypothesis_class(&self, rule: HalfPriorRule) -> HypothesisClass {
        let q: f64 = treatment_params(self.treatment).expect("validated treatment id").q();
        hypothesis_class(&self.scenario().profile, q, rule)
    }
}

/// Per-subject view of the panel.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SubjectRecord {
    pub subject_id: u32,
    pub session_id: u32,
    pub treatment: u8,
    pub covariates: Covariates,
}

/// Canonical-name → source-column renames for external files.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ColumnMapping {
    #[serde(default)]
    pub columns: BTreeMap<Column, String>,
}

impl ColumnMapping {
    pub fn source_name(&self, col: Column) -> &str {
        self.columns.get(&col).map(String::as_str).unwrap_or(col.name())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SessionDataset {
    rows: Vec<DecisionRow>,
    available: BTreeSet<Column>,
}

#[derive(Debug, Serialize)]
struct CsvRow {
    subject_id: u32,
    session_id: u32,
    treatment: u8,
    period: u8,
    scenario: u8,
    x_type: char,
    l_type: char,
    p_x: u8,
    p_l: u8,
    gridlock: u8,
    chose_sp: u8,
    mistakes: u8,
    female: u8,
    risk_averse: u8,
    right_wing: u8,
    strong_leader: u8,
    payoff: f64,
}

impl SessionDataset {
    /// Builds a dataset with every column present, checking all invariants.
    pub fn new(rows: Vec<DecisionRow>) -> Result<Self, DataError> {
        Self::with_columns(rows, Column::ALL.into_iter().collect())
    }

    fn with_columns(rows: Vec<DecisionRow>, available: BTreeSet<Column>) -> Result<Self, DataError> {
        let ds = Self { rows, available };
        ds.validate()?;
        Ok(ds)
    }

    pub fn rows(&self) -> &[DecisionRow] {
        &self.rows
    }

    pub fn len(&self) -> usize {
        self.rows.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.is_empty()
    }

    pub fn has_column(&self, col: Column) -> bool {
        self.available.contains(&col)
    }

    /// Fails with every missing column named.
    pub fn require(&self, cols: &[Column]) -> Result<(), DataError> {
        let missing: Vec<String> = cols
            .iter()
            .filter(|c| !self.has_column(**c))
            .map(|c| c.name().to_string())
            .collect();
        if missing.is_empty() {
            Ok(())
        } else {
            Err(DataError::MissingColumns(missing))
        }
    }

    fn validate(&self) -> Result<(), DataError> {
        if self.rows.is_empty() {
            return Err(DataError::Empty);
        }
        let mut subjects: HashMap<u32, (u8, u32, Covariates)> = HashMap::new();
        let mut seen: BTreeSet<(u32, u8)> = BTreeSet::new();
        for (i, row) in self.rows.iter().enumerate() {
            let line = i + 1;
            treatment_params(row.treatment).map_err(|e| DataError::Inconsistent {
                row: line,
                message: e.to_string(),
            })?;
            scenario(row.scenario).map_err(|e| DataError::Inconsistent {
                row: line,
                message: e.to_string(),
            })?;
            if self.has_column(Column::Period) && !seen.insert((row.subject_id, row.period)) {
                return Err(DataError::Inconsistent {
                    row: line,
                    message: format!("duplicate period {} for subject {}", row.period, row.subject_id),
                });
            }
            let key = (row.treatment, row.session_id, row.covariates);
            match subjects.get(&row.subject_id) {
                None => {
                    subjects.insert(row.subject_id, key);
                }
                Some(prev) if prev.0 != row.treatment => {
                    return Err(DataError::Subject {
                        subject: row.subject_id,
                        message: "treatment changes across periods".into(),
                    })
                }
                Some(prev) if *prev != key => {
                    return Err(DataError::Subject {
                        subject: row.subject_id,
                        message: "session or covariates change across periods".into(),
                    })
                }
                Some(_) => {}
            }
        }
        Ok(())
    }

    /// One record per subject, ordered by subject id.
    pub fn subjects(&self) -> Vec<SubjectRecord> {
        let mut map: BTreeMap<u32, SubjectRecord> = BTreeMap::new();
        for r in &self.rows {
            map.entry(r.subject_id).or_insert(SubjectRecord {
                subject_id: r.subject_id,
                session_id: r.session_id,
                treatment: r.treatment,
                covariates: r.covariates,
            });
        }
        map.into_values().collect()
    }

    pub fn write_csv<W: Write>(&self, out: W) -> Result<(), DataError> {
        let mut w = csv::Writer::from_writer(out);
        for r in &self.rows {
            let sc = r.scenario().profile;
            w.serialize(CsvRow {
                subject_id: r.subject_id,
                session_id: r.session_id,
                treatment: r.treatment,
                period: r.period,
                scenario: r.scenario,
                x_type: sc.executive().code(),
                l_type: sc.legislature().code(),
                p_x: sc.exec_proposal().bit(),
                p_l: sc.leg_proposal().bit(),
                gridlock: sc.is_gridlock() as u8,
                chose_sp: r.chose_sp as u8,
                mistakes: r.covariates.mistakes as u8,
                female: r.covariates.female as u8,
                risk_averse: r.covariates.risk_averse as u8,
                right_wing: r.covariates.right_wing as u8,
                strong_leader: r.covariates.strong_leader as u8,
                payoff: r.payoff,
            })?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn to_csv_string(&self) -> String {
        let mut buf = Vec::new();
        self.write_csv(&mut buf).expect("writing to memory");
        String::from_utf8(buf).expect("csv output is utf-8")
    }

    pub fn read_csv<R: Read>(input: R) -> Result<Self, DataError> {
        Self::read_csv_mapped(input, &ColumnMapping::default())
    }

    pub fn read_csv_mapped<R: Read>(input: R, mapping: &ColumnMapping) -> Result<Self, DataError> {
        let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(input);
        let headers = rdr.headers()?.clone();
        let mut index: HashMap<Column, usize> = HashMap::new();
        for col in Column::ALL {
            if let Some(i) = headers.iter().position(|h| h == mapping.source_name(col)) {
                index.insert(col, i);
            }
        }
        let missing: Vec<String> = REQUIRED
            .iter()
            .filter(|c| !index.contains_key(c))
            .map(|c| mapping.source_name(*c).to_string())
            .collect();
        if !missing.is_empty() {
            return Err(DataError::MissingColumns(missing));
        }

        let mut rows = Vec::new();
        let mut next_period: HashMap<u32, u8> = HashMap::new();
        for (i, rec) in rdr.records().enumerate() {
            let rec = rec?;
            let line = i + 1;
            let field = |col: Column| index.get(&col).and_then(|&j| rec.get(j));
            let parse_int = |col: Column| -> Result<Option<i64>, DataError> {
                match field(col) {
                    None => Ok(None),
                    Some(s) => s.parse::<i64>().map(Some).map_err(|e| DataError::BadValue {
                        row: line,
                        column: col.name().into(),
                        message: format!("{s:?}: {e}"),
                    }),
                }
            };
            let ranged = |col: Column, lo: i64, hi: i64| -> Result<Option<i64>, DataError> {
                match parse_int(col)? {
                    Some(v) if v < lo || v > hi => Err(DataError::BadValue {
                        row: line,
                        column: col.name().into(),
                        message: format!("{v} outside {lo}..={hi}"),
                    }),
                    v => Ok(v),
                }
            };
            let flag = |col: Column| -> Result<bool, DataError> { Ok(ranged(col, 0, 1)?.unwrap_or(0) == 1) };

            let subject_id = ranged(Column::SubjectId, 0, u32::MAX as i64)?.expect("required") as u32;
            let treatment = ranged(Column::Treatment, 1, 7)?.expect("required") as u8;
            let scenario_id = ranged(Column::Scenario, 1, 14)?.expect("required") as u8;
            let chose_sp = flag(Column::ChoseSp)?;
            let session_id = ranged(Column::SessionId, 0, u32::MAX as i64)?.unwrap_or(0) as u32;
            let period = match ranged(Column::Period, 1, 14)? {
                Some(p) => p as u8,
                None => {
                    let p = next_period.entry(subject_id).or_insert(0);
                    *p += 1;
                    *p
                }
            };
            let sc = scenario(scenario_id).expect("range checked");
            check_derived(line, &sc, &field, &flag)?;
            let payoff = match field(Column::Payoff) {
                None => 0.0,
                Some(s) => s.parse::<f64>().map_err(|e| DataError::BadValue {
                    row: line,
                    column: "payoff".into(),
                    message: format!("{s:?}: {e}"),
                })?,
            };
            rows.push(DecisionRow {
                subject_id,
                session_id,
                treatment,
                period,
                scenario: scenario_id,
                chose_sp,
                covariates: Covariates {
                    mistakes: flag(Column::Mistakes)?,
                    female: flag(Column::Female)?,
                    risk_averse: flag(Column::RiskAverse)?,
                    right_wing: flag(Column::RightWing)?,
                    strong_leader: flag(Column::StrongLeader)?,
                },
                payoff,
            });
        }
        Self::with_columns(rows, index.into_keys().collect())
    }
}

/// Types, proposals and the gridlock flag, when present, must match the catalog row.
fn check_derived<'a>(
    line: usize,
    sc: &Scenario,
    field: &impl Fn(Column) -> Option<&'a str>,
    flag: &impl Fn(Column) -> Result<bool, DataError>,
) -> Result<(), DataError> {
    let p = sc.profile;
    let mismatch = |col: Column, found: String, expected: String| DataError::Inconsistent {
        row: line,
        message: format!("{col} = {found} but scenario {} has {expected}", sc.id),
    };
    for (col, expected) in [(Column::XType, p.executive()), (Column::LType, p.legislature())] {
        if let Some(s) = field(col) {
            let got: PoliticianType = s.parse().map_err(|e: crate::model::ModelError| DataError::BadValue {
                row: line,
                column: col.name().into(),
                message: e.to_string(),
            })?;
            if got != expected {
                return Err(mismatch(col, got.code().to_string(), expected.code().to_string()));
            }
        }
    }
    for (col, expected) in [(Column::PX, p.exec_proposal()), (Column::PL, p.leg_proposal())] {
        if field(col).is_some() {
            let got = if flag(col)? { Policy::Reform } else { Policy::StatusQuo };
            if got != expected {
                return Err(mismatch(col, got.to_string(), expected.to_string()));
            }
        }
    }
    if field(Column::Gridlock).is_some() && flag(Column::Gridlock)? != p.is_gridlock() {
        return Err(mismatch(
            Column::Gridlock,
            (!p.is_gridlock() as u8).to_string(),
            (p.is_gridlock() as u8).to_string(),
        ));
    }
    Ok(())
}
