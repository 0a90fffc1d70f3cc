//! Run configurations embedded in every output file, and the input hash.

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use icosa_core::flex::TraceMode;
use icosa_core::invariants::InvariantTolerances;
use icosa_core::realization::Tolerances;
use icosa_core::solver::SolveConfig;

/// Version of every file format written by this tool.
pub const FORMAT_VERSION: u32 = 1;

/// Parameters of one invocation. Output paths are deliberately left out so
/// that the same run written to two places produces identical bytes.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "command", rename_all = "lowercase")]
pub enum RunConfig {
    Solve {
        cases: Vec<String>,
        solver: SolveConfig,
    },
    Report {
        inputs: Vec<String>,
        tolerances: Tolerances,
    },
    Curve {
        mode: TraceMode,
        steps: usize,
        t_end: f64,
        /// Multistart used to pick the starting point.
        start: SolveConfig,
        export_obj_every: Option<usize>,
    },
    Invariants {
        input: String,
        tolerances: InvariantTolerances,
    },
    Dent {
        input: Option<String>,
        class: Option<usize>,
        great: bool,
        /// 1-based vertex label.
        vertex: usize,
        then_antipodal: bool,
        tolerances: InvariantTolerances,
    },
    Export {
        inputs: Vec<String>,
    },
}

/// SHA-256 over the serialized configuration followed by the raw bytes of
/// each input file, hex encoded.
pub fn input_hash(config: &RunConfig, inputs: &[Vec<u8>]) -> String {
    let mut hasher = Sha256::new();
    hasher.update(serde_json::to_vec(config).expect("configuration serializes"));
    for bytes in inputs {
        hasher.update((bytes.len() as u64).to_le_bytes());
        hasher.update(bytes);
    }
    hex::encode(hasher.finalize())
}
