//! Special functions and closed-form ROC curves.
//!
//! Only coherent integration and NPDI have known detection curves; the
//! Monte Carlo engine is checked against them.

mod roc;
pub(crate) mod special;

pub use roc::{
    coherent_pd_at_threshold, coherent_pfa_at_threshold, coherent_roc, coherent_threshold,
    npdi_pd_at_threshold, npdi_pfa_at_threshold, npdi_roc, npdi_threshold, RocPoint,
};
pub use special::{
    bessel_i0, bessel_i0_scaled, inverse_upper_regularized_gamma, ln_bessel_i0, ln_cosh, marcum_q,
    upper_regularized_gamma,
};
