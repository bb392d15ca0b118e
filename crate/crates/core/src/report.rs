//! Structured pass/fail records.

use std::fmt;

use serde::Serialize;
use serde_json::Value;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Status {
    Pass,
    Fail,
    NotApplicable,
}

impl fmt::Display for Status {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Status::Pass => "pass",
            Status::Fail => "fail",
            Status::NotApplicable => "not_applicable",
        })
    }
}

/// One checked statement.
///
/// `reference` names the mathematical statement being checked, so that a
/// failure can be traced back to it. A failing clause always has a witness.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Clause {
    pub clause: String,
    #[serde(rename = "paper_ref")]
    pub reference: String,
    pub status: Status,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub witness: Option<Value>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub detail: Option<String>,
}

impl Clause {
    pub fn pass(clause: impl Into<String>, reference: impl Into<String>) -> Self {
        Clause {
            clause: clause.into(),
            reference: reference.into(),
            status: Status::Pass,
            witness: None,
            detail: None,
        }
    }

    pub fn fail(clause: impl Into<String>, reference: impl Into<String>, witness: Value) -> Self {
        Clause {
            clause: clause.into(),
            reference: reference.into(),
            status: Status::Fail,
            witness: Some(witness),
            detail: None,
        }
    }

    pub fn not_applicable(
        clause: impl Into<String>,
        reference: impl Into<String>,
        reason: impl Into<String>,
    ) -> Self {
        Clause {
            clause: clause.into(),
            reference: reference.into(),
            status: Status::NotApplicable,
            witness: None,
            detail: Some(reason.into()),
        }
    }

    /// Pass if `witness` is `None`, otherwise fail with it.
    pub fn from_witness(
        clause: impl Into<String>,
        reference: impl Into<String>,
        witness: Option<Value>,
    ) -> Self {
        match witness {
            None => Clause::pass(clause, reference),
            Some(w) => Clause::fail(clause, reference, w),
        }
    }

    pub fn with_detail(mut self, detail: impl Into<String>) -> Self {
        self.detail = Some(detail.into());
        self
    }

    pub fn passed(&self) -> bool {
        self.status == Status::Pass
    }
}

/// An ordered list of clauses. Passes when no clause fails; clauses marked
/// not-applicable neither pass nor fail.
#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct VerificationReport {
    pub clauses: Vec<Clause>,
}

impl VerificationReport {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn push(&mut self, clause: Clause) {
        self.clauses.push(clause);
    }

    pub fn extend(&mut self, other: VerificationReport) {
        self.clauses.extend(other.clauses);
    }

    pub fn status(&self) -> Status {
        if self.clauses.iter().any(|c| c.status == Status::Fail) {
            Status::Fail
        } else {
            Status::Pass
        }
    }

    pub fn passed(&self) -> bool {
        self.status() == Status::Pass
    }

    pub fn failures(&self) -> impl Iterator<Item = &Clause> {
        self.clauses.iter().filter(|c| c.status == Status::Fail)
    }

    pub fn clause(&self, label: &str) -> Option<&Clause> {
        self.clauses.iter().find(|c| c.clause == label)
    }
}

impl fmt::Display for VerificationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for c in &self.clauses {
            write!(f, "  [{:>14}] {}", c.status.to_string(), c.clause)?;
            if let Some(d) = &c.detail {
                write!(f, " ({d})")?;
            }
            writeln!(f)?;
            if let Some(w) = &c.witness {
                writeln!(f, "                   witness: {w}")?;
            }
        }
        write!(f, "  overall: {}", self.status())
    }
}
