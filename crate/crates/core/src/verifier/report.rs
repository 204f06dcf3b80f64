use std::fmt;

use serde::{Deserialize, Serialize};

use crate::construction::Block;
use crate::gf2m::FieldElement;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CheckStatus {
    Pass,
    Fail,
    Skipped,
}

/// The object a failed check points at.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Witness {
    Element(FieldElement),
    Pair {
        a: FieldElement,
        b: FieldElement,
        count: u64,
    },
    Block(Block),
}

impl fmt::Display for Witness {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Witness::Element(a) => write!(f, "element {a}"),
            Witness::Pair { a, b, count } => write!(f, "pair {{{a}, {b}}} in {count} blocks"),
            Witness::Block(b) => write!(f, "block {b}"),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    pub status: CheckStatus,
    pub observed: String,
    pub expected: String,
    pub witness: Option<Witness>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PairCount {
    pub u: FieldElement,
    pub v: FieldElement,
    pub count: u64,
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct VerificationReport {
    pub title: String,
    pub m: u32,
    pub k: usize,
    pub checks: Vec<Check>,
    /// The common pair count, when every tested pair agreed.
    pub lambda_observed: Option<u64>,
    pub pairs_tested: u64,
    /// Per-pair counts for sampled runs, in sampling order.
    pub pair_counts: Vec<PairCount>,
    /// Set whenever an expected value rests on the unproved conjecture.
    pub conjectured: bool,
    pub note: Option<String>,
}

impl VerificationReport {
    pub fn new(title: impl Into<String>, m: u32, k: usize) -> Self {
        VerificationReport {
            title: title.into(),
            m,
            k,
            ..Default::default()
        }
    }

    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.status != CheckStatus::Fail)
    }

    pub fn failures(&self) -> impl Iterator<Item = &Check> {
        self.checks.iter().filter(|c| c.status == CheckStatus::Fail)
    }

    pub fn check(&self, name: &str) -> Option<&Check> {
        self.checks.iter().find(|c| c.name == name)
    }

    /// Records a comparison; `witness` is consulted only on failure.
    pub(crate) fn compare<T: PartialEq + ToString>(
        &mut self,
        name: impl Into<String>,
        observed: T,
        expected: T,
        witness: impl FnOnce() -> Witness,
    ) -> bool {
        let ok = observed == expected;
        self.checks.push(Check {
            name: name.into(),
            status: if ok {
                CheckStatus::Pass
            } else {
                CheckStatus::Fail
            },
            observed: observed.to_string(),
            expected: expected.to_string(),
            witness: (!ok).then(witness),
        });
        ok
    }

    /// A check whose outcome is an optional counterexample.
    pub(crate) fn expect_none(
        &mut self,
        name: impl Into<String>,
        counterexample: Option<Witness>,
        expected: &str,
    ) -> bool {
        let ok = counterexample.is_none();
        self.checks.push(Check {
            name: name.into(),
            status: if ok {
                CheckStatus::Pass
            } else {
                CheckStatus::Fail
            },
            observed: if ok {
                expected.to_string()
            } else {
                "violated".to_string()
            },
            expected: expected.to_string(),
            witness: counterexample,
        });
        ok
    }

    pub(crate) fn skip(&mut self, name: impl Into<String>, reason: &str) {
        self.checks.push(Check {
            name: name.into(),
            status: CheckStatus::Skipped,
            observed: String::new(),
            expected: reason.to_string(),
            witness: None,
        });
    }
}

impl fmt::Display for VerificationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "{} (m = {}, k = {})", self.title, self.m, self.k)?;
        for c in &self.checks {
            let tag = match c.status {
                CheckStatus::Pass => "pass",
                CheckStatus::Fail => "FAIL",
                CheckStatus::Skipped => "skip",
            };
            match c.status {
                CheckStatus::Skipped => writeln!(f, "  [{tag}] {}: {}", c.name, c.expected)?,
                _ => writeln!(
                    f,
                    "  [{tag}] {}: observed {}, expected {}",
                    c.name, c.observed, c.expected
                )?,
            }
            if let Some(w) = &c.witness {
                writeln!(f, "         witness: {w}")?;
            }
        }
        if self.conjectured {
            writeln!(f, "  expected values are conjectured, not proved")?;
        }
        if let Some(note) = &self.note {
            writeln!(f, "  note: {note}")?;
        }
        Ok(())
    }
}
