//! Exact quantile dyadic CART on `d`-dimensional lattices.
//!
//! The solver fits a piecewise-constant surface that minimises the check
//! loss plus a per-piece penalty over recursive dyadic partitions with a
//! minimum piece size. Alongside it the crate provides the squared-error
//! baseline, a one-dimensional quantile optimal regression tree, BIC-based
//! penalty selection, and the generators and harness used for Monte-Carlo
//! comparisons.
//!
//! ```
//! use qdcart::{fit_qdcart, LatticeShape, SolverConfig};
//!
//! let shape = LatticeShape::line(4).unwrap();
//! let cfg = SolverConfig::qdcart(0.5, 1.0, 1).unwrap();
//! let fit = fit_qdcart(&shape, &[0.0, 0.0, 10.0, 10.0], &cfg).unwrap();
//! assert_eq!(fit.theta_hat, vec![0.0, 0.0, 10.0, 10.0]);
//! assert_eq!(fit.objective, 2.0);
//! ```

pub mod error;
pub mod harness;
pub mod lattice;
pub mod moments;
mod numeric;
pub mod ostree;
pub mod quantile;
pub mod simulation;
pub mod solver;
pub mod tuning;

pub use error::{Error, Result};
pub use lattice::{canonical_split, dyadic_split, enumerate_dyadic_rects, DyadicId, DyadicIndex, LatticeShape, Rect};
pub use quantile::{empirical_quantile, merge, rho, sql, sse, QuantileLevel, RectCost, SortedSegment};
pub use simulation::{generate, noise, signal, Dataset, NoiseLaw, NoiseSpec, Scenario};
pub use solver::{
    check_loss, extract_partition, fit, fit_dcart, fit_qdcart, fit_qort_1d, project, DpTables, DyadicSolver, FitResult,
    Method, Partition, SolverConfig, SplitTree,
};
pub use tuning::{bic, grid_1d, grid_2d, select_lambda, BicScore, DfMode, LambdaGrid};
