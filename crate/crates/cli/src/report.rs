//! Machine-readable run reports.

use std::time::Duration;

use serde::Serialize;

/// One named check with its outcome and, on failure, a witness.
#[derive(Serialize, Clone, Debug)]
pub struct ResultLine {
    pub name: String,
    pub pass: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub detail: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub witness: Option<String>,
}

/// Digest of one input file.
#[derive(Serialize, Clone, Debug)]
pub struct InputDigest {
    pub path: String,
    pub fnv1a64: String,
}

/// Full report for one invocation.
#[derive(Serialize, Clone, Debug)]
pub struct RunReport {
    pub command: String,
    pub inputs: Vec<InputDigest>,
    pub results: Vec<ResultLine>,
    pub elapsed_ms: u128,
}

impl RunReport {
    pub fn new(command: String, inputs: Vec<InputDigest>, results: Vec<ResultLine>, elapsed: Duration) -> Self {
        RunReport { command, inputs, results, elapsed_ms: elapsed.as_millis() }
    }

    pub fn all_pass(&self) -> bool {
        self.results.iter().all(|r| r.pass)
    }
}

/// FNV-1a over the raw bytes; stable across platforms and runs.
pub fn fnv1a64(bytes: &[u8]) -> u64 {
    let mut hash: u64 = 0xcbf2_9ce4_8422_2325;
    for &b in bytes {
        hash ^= b as u64;
        hash = hash.wrapping_mul(0x0000_0100_0000_01b3);
    }
    hash
}
