//! (-Δ+m²)^s by three routes (Fourier symbol, Bessel-kernel principal value,
//! Dirichlet form) and the degenerate extension problem.

pub mod field;
pub mod kernel;
pub mod limit;
pub mod operator;
pub mod trace;

pub use field::SpectralField;
pub use kernel::{conjugate_kernel_eval, kernel_eval, KernelSample};
pub use limit::{convolve_point, pointwise_kernel_limit, LimitReport};
pub use operator::{apply_kernel_pv, apply_symbol, dirichlet_form_identity, DirichletIdentity};
pub use trace::{extend, neumann_trace, trace_energy_check, verify_trace};
