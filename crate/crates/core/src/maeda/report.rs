//! Machine-readable results of congruence suites and scans.

use std::collections::BTreeMap;

use serde::Serialize;

/// Inclusive range of the scanned parameter.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct ScanRange {
    pub lo: u64,
    pub hi: u64,
}

/// One violated congruence lhs ≢ rhs (mod modulus), both sides reduced.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct CongruenceFailure {
    pub inputs: BTreeMap<String, u64>,
    pub lhs: u64,
    pub rhs: u64,
    pub modulus: u64,
}

/// Outcome of a congruence family over a range; passes iff `failures` is empty.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct CongruenceReport {
    pub family: String,
    pub params: BTreeMap<String, u64>,
    pub range: ScanRange,
    pub checked: u64,
    pub failures: Vec<CongruenceFailure>,
    pub mode: Option<String>,
    pub runtime_ms: u64,
    pub cache_hits: u64,
}

impl CongruenceReport {
    pub fn passed(&self) -> bool {
        self.failures.is_empty()
    }
}

/// Result of an admissible-d scan.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ScanReport {
    pub family: String,
    pub params: BTreeMap<String, u64>,
    pub range: ScanRange,
    pub values: Vec<u32>,
    pub failures: Vec<CongruenceFailure>,
    pub mode: Option<String>,
    pub runtime_ms: u64,
    pub cache_hits: u64,
}

pub(crate) fn params<const N: usize>(pairs: [(&str, u64); N]) -> BTreeMap<String, u64> {
    pairs.into_iter().map(|(k, v)| (k.to_string(), v)).collect()
}
