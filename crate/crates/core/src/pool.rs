//! Case identifiers and case pools.

use std::collections::BTreeSet;
use std::fmt;
use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum PoolError {
    #[error("case ids must be nonempty")]
    EmptyCaseId,
    #[error("duplicate case id {id:?} in pool")]
    DuplicateCase { id: String },
}

/// Unique case identifier within a pool.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct CaseId(String);

impl CaseId {
    pub fn new(id: impl Into<String>) -> Result<Self, PoolError> {
        let id = id.into();
        if id.is_empty() {
            return Err(PoolError::EmptyCaseId);
        }
        Ok(Self(id))
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl fmt::Display for CaseId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

/// Ordered collection of unique case ids. The order is the manifest order and
/// stays stable across runs, which makes every downstream iteration (ledgers,
/// tie-breaks, reports) deterministic.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Pool {
    cases: Vec<CaseId>,
}

impl Pool {
    pub fn new(cases: Vec<CaseId>) -> Result<Self, PoolError> {
        let mut seen = BTreeSet::new();
        for case in &cases {
            if !seen.insert(case) {
                return Err(PoolError::DuplicateCase {
                    id: case.as_str().to_string(),
                });
            }
        }
        Ok(Self { cases })
    }

    pub fn len(&self) -> usize {
        self.cases.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cases.is_empty()
    }

    pub fn cases(&self) -> &[CaseId] {
        &self.cases
    }

    pub fn iter(&self) -> impl Iterator<Item = &CaseId> {
        self.cases.iter()
    }
}
