//! Kernel density modeling of radar sea-clutter amplitudes.
//!
//! Gaussian, Gamma and Weibull kernel KDEs with AMISE-optimal bandwidths
//! found by fixed-point iteration, parametric baselines fitted by histogram
//! MSE, a synthetic clutter generator, and a CFAR detector that turns any of
//! the fitted densities into a threshold for a requested false-alarm rate.

pub mod bandwidth;
pub mod cfar;
pub mod cli;
pub mod clutter_sim;
pub mod error;
pub mod kde;
pub mod kernels;
pub mod metrics;
pub mod parametric;
pub mod pipeline;
pub mod quadrature;
pub mod samples_io;
pub mod special;

pub use bandwidth::{BandwidthResult, FixedPointConfig, IterationRecord, QuadratureConfig, UpdateRule};
pub use error::{Error, Result};
pub use kde::{Density, DensityModel, KdeModel};
pub use kernels::{KernelConstants, KernelFamily, KernelSpec, MomentConvention};
pub use parametric::{HistogramDensity, ParametricModel};
pub use samples_io::{CellLabel, Dataset, Normalization, SampleSet};
