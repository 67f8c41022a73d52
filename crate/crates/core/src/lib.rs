//! Extended λ-eigenoperators `L = R_λ φ(D)` of the differentiation operator
//! acting on truncated power series: application and iteration, the
//! hypercyclicity/supercyclicity classification, orbit experiments, and
//! numerical harnesses for the quantitative estimates behind them.

// `!(x > 0.0)` is used on purpose: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod budget;
pub mod classify;
pub mod dynamics;
pub mod error;
pub mod exact;
pub mod operators;
pub mod series;
pub mod symbols;
pub mod verify;

pub use budget::Budget;
pub use error::{Error, Result};
pub use operators::{aron_markose, similarity_check, EigenBasis, EigenOp, IterateRoute};
pub use series::{Seminorm, TruncatedSeries};
pub use symbols::{iterated_symbol, leibniz_coefficients, Builtin, PhiSpec, ZeroCount, ZeroMeta};
pub use classify::{classify, classify_op, Classification, Verdict};
pub use dynamics::{construct_supercyclic, orbit, super2_ratio_trace, ConstructionReport, OrbitRecord, Target};
pub use verify::{verify_infinf, verify_iteracionpolinomio, verify_modulo1_estimate, verify_supsup, LemmaReport};
