//! Bug localization that fuses three suspiciousness signals per (bug, file):
//! similar resolved issues on the trace graph, recent bug-fix history, and
//! structured retrieval over source identifiers.
//!
//! Every signal is computed from what was observable when the bug was filed.

pub mod bugcache;
pub mod codestruct;
pub mod corpus;
pub mod score;
pub mod textprep;
pub mod tracescore;
pub mod composer;
pub mod eval;
pub mod pipeline;
