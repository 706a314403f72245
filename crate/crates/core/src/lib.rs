//! hkelab: a numerical laboratory for heat kernel estimates on converging
//! metric measure Dirichlet spaces.
//!
//! The lab builds sequences of finite weighted graphs approximating fractal
//! spaces (pre-carpets, gasket cable systems, ingested graphs), equips them
//! with geodesic metrics and graph Dirichlet forms, computes Dirichlet heat
//! kernels by eigen-expansion, and verifies quantitative estimates:
//! sub-Gaussian two-sided kernel bounds, Weyl-type eigenvalue growth,
//! eigenfunction sup bounds, cutoff capacity bounds, and convergence
//! diagnostics (pulled-back kernel gaps, eigendata gaps, weak measure gaps
//! and strong-semigroup/Mosco residuals) along pointed Gromov-Hausdorff
//! approximations.

pub mod config;
pub mod convergence;
pub mod cubes;
pub mod error;
pub mod form;
pub mod graph;
pub mod hke;
pub mod isometry;
pub mod metric;
pub mod models;
pub mod pipeline;
pub mod scale;
pub mod spectral;

pub use error::{Error, Result};
pub use graph::{Edge, WeightedGraph};
pub use metric::{geodesic_space, MetricMeasureSpace, RegularityReport, VolumeProfile};
