//! Periodic dnoidal traveling waves of the Zakharov system and their spectral
//! stability.
//!
//! The crate builds the wave `φ(x) = φ0 dn(αx, κ)`, discretizes the
//! linearization `JH` with Fourier collocation and certifies stability twice:
//! once through the closed form of `⟨L+⁻¹φ, φ⟩` and the constraint matrix `D`,
//! once from the eigenvalues of `JH` directly.
//!
//! ```
//! use zakharov_core::stability::{stability_verdict, StabilityOptions, Verdict};
//! use zakharov_core::waves::resolve_parameters;
//!
//! let params = resolve_parameters(0.5, 0.3, None, Some(1.0))?;
//! let options = StabilityOptions { n: 64, ..Default::default() };
//! let report = stability_verdict(&params, &options)?;
//! assert_eq!(report.verdict, Verdict::Stable);
//! # Ok::<(), zakharov_core::Error>(())
//! ```

pub mod elliptic;
pub mod error;
pub mod linalg;
pub mod operators;
pub mod spectra;
pub mod stability;
pub mod waves;

pub use elliptic::EllipticModulus;
pub use error::{Error, Result};
pub use operators::{KernelVectors, LinearOperator, OperatorKind};
pub use spectra::{HamiltonianSpectrum, IndexCounts, SpectrumReport};
pub use stability::{DMatrixReport, StabilityOptions, StabilityReport, Verdict};
pub use waves::{DnoidalWave, PeriodicGrid, WaveParameters};

#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/introduction.md")]
    mod introduction {}
    #[doc = include_str!("../../../book/src/elliptic.md")]
    mod elliptic {}
    #[doc = include_str!("../../../book/src/waves.md")]
    mod waves {}
    #[doc = include_str!("../../../book/src/operators.md")]
    mod operators {}
    #[doc = include_str!("../../../book/src/spectra.md")]
    mod spectra {}
    #[doc = include_str!("../../../book/src/stability.md")]
    mod stability {}
    #[doc = include_str!("../../../book/src/cli.md")]
    mod cli {}
}
