//! Least-squares and recursive least-squares baselines plus the group-based
//! shrinkage estimators layered on top of them.

mod gse;
mod ls;
pub(crate) mod opcount;
mod rls;

pub use gse::{
    at_pm_gradient, eb_alpha_gradient, estimate_noise_var, gse_apply, gse_optimal_alpha, GseMode,
    GseState, ALPHA_CLAMP_MAX, ALPHA_CLAMP_MIN,
};
pub use ls::{crlb_variance, hermitian_condition, ls_solve, sce_regression, CONDITION_LIMIT};
pub use rls::RlsState;
