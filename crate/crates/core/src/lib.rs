//! Group divisible designs GDD(2^m - 2, 2, k) built from subset sums in
//! GF(2^m).
//!
//! The point set is X = GF(2^m) \ {0, 1}. The groups are the pairs
//! {a, a+1}, and the blocks of size k are the k-subsets of X that sum to 1
//! while no nonempty proper subset does. The crate constructs these
//! families, evaluates their parameters exactly and checks the design
//! axioms by enumeration.

pub mod cli_io;
pub mod closed_forms;
pub mod construction;
pub mod error;
pub mod gf2m;
pub mod verifier;

pub use closed_forms::{
    b_closed, consistency_identities, lambda_closed, params, r_closed, tau_closed, ClosedFormParams,
};
pub use construction::{
    blocks_through_pair, collect_wk, count_wk, enumerate_wk, group_set, is_valid_block,
    par_enumerate_wk, partition_omega_tau, Block, BlockSink, GroupSet, PairContext, PairMode,
};
pub use error::{GddError, Result};
pub use gf2m::{build_field, FieldContext, FieldElement, Notation};
