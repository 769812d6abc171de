//! Polynomial-rooting DOA estimation by generalized least squares.
//!
//! The signal subspace of prewhitened data is un-whitened, taken to the DFT
//! domain and turned into a linear system `H a = h` whose solution holds the
//! coefficients of `z^L + a_1 z^(L-1) + ... + a_L`. The roots of that
//! polynomial carry the source directions in their phases. The forward-only
//! flavor works on `Q^-1/2 X`; the forward-backward flavor appends the
//! exchange-conjugated data and whitens by `Q + J Q J`.

mod estimator;
mod subspace;
mod system;
mod variance;

pub use estimator::{
    estimate_fba, estimate_forward, gls_weight, roots_to_doas, solve_gls, DoaCandidates, GlsEstimator, GlsFlags,
    GlsRun, PolynomialCoefficients, DEFAULT_GLS_ITERATIONS,
};
pub use subspace::{fba_embed, prewhiten, signal_subspace, Flavor, SignalSubspace};
pub use system::{assemble_system, build_dft_system, dft_matrix, DftSystem};
pub use variance::doa_asymptotic_variance;
