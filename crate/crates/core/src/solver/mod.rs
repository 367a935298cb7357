//! Exact solvers for penalized piecewise-constant fits on lattices.
//!
//! * [`fit_qdcart`] minimises `sum_i rho_tau(y_i - theta_i) + lambda * |Pi|`
//!   over recursive dyadic partitions whose rectangles hold at least `gamma`
//!   cells, by a bottom-up dynamic program over all dyadic rectangles.
//! * [`fit_dcart`] is the squared-error analogue with leaf means.
//! * [`fit_qort_1d`] searches all segmentations of a line (hierarchical
//!   splits at any position) with an interval dynamic program.

mod dyadic;
mod partition;
mod qort;

use std::fmt;
use std::str::FromStr;

pub use dyadic::{extract_partition, DpTables, DyadicSolver, LeafCost, SegmentRetention, SplitDecision};
pub use partition::{project, Partition, SplitTree};
pub use qort::fit_qort_1d;

use crate::error::{Error, Result};
use crate::lattice::LatticeShape;
use crate::quantile::{rho, QuantileLevel};

/// Which estimator to fit.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Method {
    /// Quantile dyadic CART.
    Qdcart,
    /// Mean-regression dyadic CART.
    Dcart,
    /// Quantile optimal regression tree, one-dimensional only.
    Qort1d,
}

impl Method {
    pub fn as_str(self) -> &'static str {
        match self {
            Method::Qdcart => "qdcart",
            Method::Dcart => "dcart",
            Method::Qort1d => "qort1d",
        }
    }

    /// Whether the fitted loss is the check loss (as opposed to squared error).
    pub fn is_quantile(self) -> bool {
        !matches!(self, Method::Dcart)
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "qdcart" => Ok(Method::Qdcart),
            "dcart" => Ok(Method::Dcart),
            "qort1d" | "qort" => Ok(Method::Qort1d),
            other => Err(Error::Usage(format!("unknown method `{other}`"))),
        }
    }
}

/// Tuning parameters of one fit.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolverConfig {
    pub method: Method,
    /// Ignored by [`Method::Dcart`].
    pub tau: QuantileLevel,
    /// Penalty per partition piece.
    pub lambda: f64,
    /// Minimum number of cells per piece.
    pub gamma: usize,
}

impl SolverConfig {
    pub fn new(method: Method, tau: QuantileLevel, lambda: f64, gamma: usize) -> Result<Self> {
        let cfg = Self {
            method,
            tau,
            lambda,
            gamma,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn qdcart(tau: f64, lambda: f64, gamma: usize) -> Result<Self> {
        Self::new(Method::Qdcart, QuantileLevel::new(tau)?, lambda, gamma)
    }

    pub fn dcart(lambda: f64, gamma: usize) -> Result<Self> {
        Self::new(Method::Dcart, QuantileLevel::MEDIAN, lambda, gamma)
    }

    pub fn qort_1d(tau: f64, lambda: f64, gamma: usize) -> Result<Self> {
        Self::new(Method::Qort1d, QuantileLevel::new(tau)?, lambda, gamma)
    }

    pub fn with_lambda(self, lambda: f64) -> Result<Self> {
        Self::new(self.method, self.tau, lambda, self.gamma)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.lambda.is_finite() && self.lambda > 0.0) {
            return Err(Error::Config(format!(
                "lambda must be positive and finite, got {}",
                self.lambda
            )));
        }
        if self.gamma == 0 {
            return Err(Error::Config("gamma must be at least 1".into()));
        }
        Ok(())
    }

    /// Checks the configuration against a lattice before fitting.
    pub fn check_shape(&self, shape: &LatticeShape) -> Result<()> {
        self.validate()?;
        if self.method == Method::Qort1d && shape.ndim() != 1 {
            return Err(Error::Unsupported(format!(
                "qort1d needs a one-dimensional lattice, got {} dimensions",
                shape.ndim()
            )));
        }
        if self.gamma > shape.len() {
            return Err(Error::Infeasible {
                gamma: self.gamma,
                cells: shape.len(),
            });
        }
        Ok(())
    }
}

/// Fitted surface together with the partition that produced it.
#[derive(Debug, Clone)]
pub struct FitResult {
    pub shape: LatticeShape,
    pub theta_hat: Vec<f64>,
    pub partition: Partition,
    /// Optimal penalized objective as computed by the solver.
    pub objective: f64,
    pub config: SolverConfig,
}

impl FitResult {
    pub fn leaf_count(&self) -> usize {
        self.partition.len()
    }

    /// Data-fit term of the objective: check loss, or squared error for DCART.
    pub fn loss(&self, y: &[f64]) -> f64 {
        if self.config.method.is_quantile() {
            check_loss(self.config.tau, y, &self.theta_hat)
        } else {
            y.iter().zip(&self.theta_hat).map(|(a, b)| (a - b) * (a - b)).sum()
        }
    }

    /// Loss plus `lambda` times the leaf count, recomputed from `theta_hat`.
    pub fn recompute_objective(&self, y: &[f64]) -> f64 {
        self.loss(y) + self.config.lambda * self.leaf_count() as f64
    }
}

/// `sum_i rho_tau(y_i - theta_i)`.
pub fn check_loss(tau: QuantileLevel, y: &[f64], theta: &[f64]) -> f64 {
    y.iter().zip(theta).map(|(&a, &b)| rho(tau, a - b)).sum()
}

pub(crate) fn check_data(shape: &LatticeShape, y: &[f64]) -> Result<()> {
    if y.len() != shape.len() {
        return Err(Error::Data(format!(
            "expected {} observations for a {shape} lattice, got {}",
            shape.len(),
            y.len()
        )));
    }
    if let Some(i) = y.iter().position(|v| !v.is_finite()) {
        return Err(Error::Data(format!("observation {} is not finite", i + 1)));
    }
    Ok(())
}

/// Quantile dyadic CART fit.
pub fn fit_qdcart(shape: &LatticeShape, y: &[f64], cfg: &SolverConfig) -> Result<FitResult> {
    let cfg = SolverConfig {
        method: Method::Qdcart,
        ..*cfg
    };
    cfg.check_shape(shape)?;
    DyadicSolver::qdcart(shape, y, cfg.tau, cfg.gamma)?.fit(cfg.lambda)
}

/// Mean-regression dyadic CART fit.
pub fn fit_dcart(shape: &LatticeShape, y: &[f64], cfg: &SolverConfig) -> Result<FitResult> {
    let cfg = SolverConfig {
        method: Method::Dcart,
        ..*cfg
    };
    cfg.check_shape(shape)?;
    DyadicSolver::dcart(shape, y, cfg.gamma)?.fit(cfg.lambda)
}

/// Dispatches on `cfg.method`.
pub fn fit(shape: &LatticeShape, y: &[f64], cfg: &SolverConfig) -> Result<FitResult> {
    match cfg.method {
        Method::Qdcart => fit_qdcart(shape, y, cfg),
        Method::Dcart => fit_dcart(shape, y, cfg),
        Method::Qort1d => {
            cfg.check_shape(shape)?;
            fit_qort_1d(y, cfg)
        }
    }
}
