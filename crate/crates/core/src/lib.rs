//! Robust MDP solvers over s-rectangular uncertainty sets.
//!
//! The central algorithm is a first-order value iteration: each epoch runs
//! primal-dual iterations on the per-state saddle-point problems and then
//! updates the value vector from the averaged iterates.

pub mod baselines;
pub mod error;
pub mod fomvi;
pub mod forge;
pub mod gap;
pub mod model;
pub mod prox;
pub mod report;
pub mod uncertainty;

pub use baselines::{
    anderson_vi, anderson_weights, avi, gs_vi, robust_bellman, robust_bellman_warm, vi_robust, BellmanResult,
    ViOptions,
};
pub use error::{Result, RmdpError};
pub use fomvi::{run_fom_vi, FomViOptions, FomViState, InitMode, Schedule};
pub use forge::{gen_garnet, gen_healthcare, gen_machine_replacement, perturb_samples, GarnetParams, InstanceDocument};
pub use gap::{best_response_value, duality_gap, worst_case_value, GapReport};
pub use model::{
    apply_k, apply_k_transpose, bilinear_value, policy_value, return_value, AdversarialKernel, Policy,
    RobustMdp, ValueVector,
};
pub use prox::{NormPair, ProxSetup};
pub use report::{Method, SolveReport, StopReason, TraceRow};
pub use uncertainty::{
    is_member, linear_max_over_set, set_distance, LinearMax, StateUncertainty, UncertaintyKind,
    UncertaintySpec,
};
