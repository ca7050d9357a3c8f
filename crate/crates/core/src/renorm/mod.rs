//! Rauzy–Veech induction, Zorich acceleration, Rauzy paths and Rokhlin towers.
//!
//! Conventions: a step of type Top removes the tail of the last top interval,
//! Bottom the tail of the last bottom one. The winner's length decreases by
//! the loser's (`λ_w ← λ_w − λ_l`), the loser's tower grows by the winner's
//! (`q_l ← q_l + q_w`), and the path matrix is multiplied on the right by
//! `I + E_{w,l}`.

mod balanced;
mod hierarchy;
mod induction;
mod matrix;
mod path;
mod towers;

pub use balanced::{
    build_balanced_domain, delta_in_u, lambda_in_u, simplex_member, BalancedConfig, BalancedDomain,
    BulletReport, UCheck,
};
pub use hierarchy::{Hierarchy, Located, Walk, DEFAULT_JUMP_CAP};
pub use induction::{
    delta_membership, find_loop_path, induce_once, rauzy_step, run_rauzy, run_zorich,
    step_decision, zorich_step, InductionState, StepDecision, ZorichBlock, DEFAULT_KAPPA_CAP,
};
pub use matrix::{big_number, ser_bigint, ser_bigint_vec, IntMatrix};
pub use path::{
    extend_no_return, path_matrix, successor, winner_loser, Arrow, RauzyPath, StepType,
};
pub use towers::{
    first_return_pieces, heights_bruteforce, towers, Floor, ReturnPiece, Tower, TowerDecomposition,
};
