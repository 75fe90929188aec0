//! Loss assembly, per-sub-domain training sessions, stitching and metrics.
//!
//! Methods:
//!
//! * `pinn` — one network on the whole rectangle, loss `w_u·MSE_u + w_f·MSE_f`;
//! * `sdpinn` — independent per-sub-domain sessions whose `MSE_u` includes the
//!   exactly labeled interface points generated by the symmetry group;
//! * `sdpinn_isc` — sdPINN plus the invariant-surface-condition penalty
//!   `w_g·MSE_g`;
//! * `xpinn` — all sub-domain networks optimized jointly, neighbors coupled
//!   through residual continuity `MSE_R` and the interface average `MSE_u_avg`
//!   (interface points unlabeled);
//! * `inverse` / `inverse_pinn` — recover the advection coefficient λ from
//!   orbit-generated interior labels, training one sub-domain (`inverse`) or
//!   the whole rectangle (`inverse_pinn`).

mod loss;
mod metrics;
mod session;

pub use loss::{
    InterfaceCoupling, LossReport, LossWeights, Method, SubdomainData, SubdomainObjective,
    XpinnObjective,
};
pub use metrics::{
    interface_discontinuity, interface_fit_rmse, l2_relative_error, stitch, SolutionGrid,
};
pub use session::{
    derive_seed, generate_interior_labels, train_inverse, train_subdomain, train_xpinn,
    InverseState, SessionResult, SubTrainConfig, TrainingConfig,
};
