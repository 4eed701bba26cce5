//! Linear and nonlinear entanglement witnesses built from Schmidt-family
//! envelopes and positive maps, with the sampling experiments around them.

pub mod ensembles;
pub mod error;
pub mod experiments;
pub mod matcore;
pub mod measure;
pub mod pncp;
pub mod scalar;
pub mod selftest;
pub mod states;
pub mod witness;

pub use error::{Error, Result};
pub use scalar::Real;

pub type ComplexMatrix = matcore::Matrix<f64>;
pub type ComplexMatrix32 = matcore::Matrix<f32>;
pub type Density = states::DensityMatrix<f64>;
pub type Density32 = states::DensityMatrix<f32>;
pub type Witness = witness::WitnessOperator<f64>;
pub type Delta = witness::DeltaMatrix<f64>;
pub type MapTensor = pncp::PositiveMapTensor<f64>;
pub type Weights = states::SchmidtWeights<f64>;
pub type Tol = matcore::Tolerance<f64>;
