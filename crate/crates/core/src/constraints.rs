//! Placeholder.

use serde::{Deserialize, Serialize};

/// Per-predicate rejection counters.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct RejectionTallies;
impl std::fmt::Display for RejectionTallies {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result { f.write_str("") }
}
