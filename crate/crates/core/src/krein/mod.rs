//! Spectral shift functions: finite-dimensional oracles, the transform to
//! the squared operator, trace consistency on the model, and the
//! resolvent-regularized Witten index.

mod oracles;
mod profile;
mod suite;
mod report;
mod trace;

pub use oracles::{
    counting_ssf, counting_ssf_eigs, delta_r, geometric_ladder, krein_stieltjes, log_derivative_fd, perturbation_determinant,
    resolvent_trace_diff, square_truncation_obstruction, ssf_from_determinant, witten_limit, RectFactor, WittenLimit,
};
pub use profile::{pushnitski_transform, SSFProfile};
pub use report::{GateKind, TraceReport, ValueRecord, REPORT_SCHEMA_VERSION};
pub use suite::{oracle_suite, random_complex, random_hermitian, OracleSuite, RectCheck};
pub use trace::{
    nu_kernel_integral, principal_trace_consistency, principal_trace_consistency_spectra, ssf_constant_fit, ssf_constant_fit_spectra,
    ssf_resolvent_side, truncation_convergence, witten_model_route, ModelSpectra, SsfFit, TruncationRow,
};
