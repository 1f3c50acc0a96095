//! Fourier-space approximation of twisted transfer operators for Anosov
//! maps of the 2-torus: SRB densities, CLT variances and large-deviation
//! rate functions, together with a closed-form hyperbolicity certificate for
//! the perturbed cat map and an Ulam-method baseline.
//!
//! The geometry, certificate, grid and kernel code is generic over
//! [`Real`] (`f32`/`f64`). Operator assembly, the eigen/linear solvers and
//! the Ulam baseline run in `f64`. The aliases below fix the scalar to `f64`.

pub mod cert;
pub mod error;
pub mod grid;
pub mod io;
pub mod kernels;
pub mod operator;
pub mod scalar;
pub mod stats;
pub mod torus;
pub mod ulam;

pub use error::{Error, Result};
pub use grid::{FreqIndex, GridSpec};
pub use scalar::Real;

pub type C64 = num_complex::Complex<f64>;

pub type TorusPoint = torus::TorusPoint<f64>;
pub type MapModel = torus::MapModel<f64>;
pub type Observable = torus::Observable<f64>;
pub type SpatialGrid = grid::SpatialGrid<f64>;
pub type SpectralVector = grid::SpectralVector<f64>;
pub type FineSpectrum = grid::FineSpectrum<f64>;
pub type KernelSpec = kernels::KernelSpec<f64>;
pub type CertificateReport = cert::CertificateReport<f64>;

pub use operator::OperatorMatrix;
pub use stats::{EigenData, RateTable, VarianceResult};
pub use torus::{CatForm, ToralMap};
pub use ulam::UlamMatrix;
