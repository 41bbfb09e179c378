//! Fourier-matching hard instances.
//!
//! Two contaminated distributions `P_j = E_j * D` with
//! `E_0 = (1 - alpha) delta_{eps/2} + alpha Q_0` and
//! `E_1 = (1 - alpha) delta_{-eps/2} + alpha Q_1` whose characteristic
//! functions agree on bands around the lattice `Z / eps`. The adversaries
//! come from the Jordan split of an atomic measure `g` built by sampling a
//! smooth window.

pub mod construction;
pub mod tv;
pub mod window;

pub use construction::{
    atomic_cf, build_g, build_hard_instance, default_truncation, delta_phi_e, g_tail_bound,
    jordan_split, l1_for_c, largest_feasible_c, rho_hat, HardInstance, InstanceOptions,
};
pub use tv::{
    lemma_tv_bound, sample_lower_bound_from_tv, tv_between, tv_direct, tv_distance, DirectTv,
    LemmaBound, TvOptions, TvReport,
};
pub use window::{window_hat, window_time};
