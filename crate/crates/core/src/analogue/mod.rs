//! Output theorems beyond the Poisson queue: the Brownian queue, the
//! `log∫exp` queue and transform `Πₙ`, Pitman-type transforms for walks and
//! a ±1 Markov chain, the Matsumoto–Yor transform and the first-order
//! autoregressive output theorem.

mod ar;
mod brownian;
mod logexp;
mod pitman;

pub use ar::{ar1_conditional_check, ar1_forward, ar1_output_check, conditional_target, Ar1Output, ArParams, AR_TAIL_VARIANCE};
pub use brownian::{
    brownian_burke_transform, brownian_symmetry_residual, grid_output_law_check, logexp_queue, logexp_symmetry_residual,
    symmetry_rate_check, GridQueueOutput, QueueKind, SymmetryResidual, BURN_IN_MASS_TOL,
};
pub use logexp::{log_add_exp, matsumoto_yor_transform, pi_n_transform, LogExpParams, LogExpPath};
pub use pitman::{
    conditioned_chain_law, conditioned_walk_law, discrete_pitman_check, nonmarkov_pitman_check, pitman_2m_minus_x,
    ConditionedLaw, CONDITIONING_TOL,
};
