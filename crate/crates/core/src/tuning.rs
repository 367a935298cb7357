//! Penalty grids and quantile-BIC selection.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::lattice::LatticeShape;
use crate::quantile::QuantileLevel;
use crate::solver::{check_loss, fit_qort_1d, DyadicSolver, FitResult, Method, SolverConfig};

/// Where a grid came from.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GridKind {
    /// `{2^-2, 2^-1.75, ..., 2^4}`.
    Grid1d,
    /// `log10(lambda)` in `{-1 + 6.5 j / 59 : j = 0..59}`.
    Grid2d,
    Custom,
}

/// Strictly increasing list of positive penalties.
#[derive(Debug, Clone, PartialEq)]
pub struct LambdaGrid {
    values: Vec<f64>,
    kind: GridKind,
}

impl LambdaGrid {
    pub fn custom(values: Vec<f64>) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::Config("lambda grid is empty".into()));
        }
        if values.iter().any(|v| !(v.is_finite() && *v > 0.0)) {
            return Err(Error::Config("lambda grid values must be positive and finite".into()));
        }
        if values.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::Config("lambda grid must be strictly increasing".into()));
        }
        Ok(Self {
            values,
            kind: GridKind::Custom,
        })
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn kind(&self) -> GridKind {
        self.kind
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }
}

/// 25 penalties, geometric with ratio `2^0.25` from 0.25 to 16.
pub fn grid_1d() -> LambdaGrid {
    LambdaGrid {
        values: (0..25).map(|k| 2f64.powf(-2.0 + 0.25 * k as f64)).collect(),
        kind: GridKind::Grid1d,
    }
}

/// 60 penalties, log10-uniform from -1 to 5.5.
pub fn grid_2d() -> LambdaGrid {
    LambdaGrid {
        values: (0..60).map(|j| 10f64.powf(-1.0 + 6.5 * j as f64 / 59.0)).collect(),
        kind: GridKind::Grid2d,
    }
}

/// [`grid_1d`] for lines, [`grid_2d`] otherwise.
pub fn default_grid(shape: &LatticeShape) -> LambdaGrid {
    if shape.ndim() == 1 {
        grid_1d()
    } else {
        grid_2d()
    }
}

/// 8 on a line (capped at `N`), `ceil(log2 N)` in higher dimensions.
pub fn default_gamma(shape: &LatticeShape) -> usize {
    let n = shape.len();
    if shape.ndim() == 1 {
        8.min(n)
    } else {
        ((n as f64).log2().ceil() as usize).clamp(1, n)
    }
}

/// How the BIC counts degrees of freedom.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DfMode {
    /// Adjacent pairs on a line whose fitted values differ by more than `1e-3`.
    JumpCount,
    /// Number of partition pieces.
    LeafCount,
}

/// Fitted values closer than this count as equal in [`DfMode::JumpCount`].
pub const JUMP_THRESHOLD: f64 = 1e-3;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BicScore {
    pub lambda: f64,
    pub bic: f64,
    pub df: usize,
    pub loss: f64,
}

/// `(1 - |1 - 2 tau|) / 2`.
pub fn bic_sigma(tau: QuantileLevel) -> f64 {
    (1.0 - (1.0 - 2.0 * tau.get()).abs()) / 2.0
}

/// `(2 / sigma) * sum_i rho_tau(y_i - theta_i) + v * ln N`.
pub fn bic(y: &[f64], fit: &FitResult, df_mode: DfMode) -> Result<BicScore> {
    if y.len() != fit.theta_hat.len() {
        return Err(Error::Data("observations and fit have different lengths".into()));
    }
    let tau = fit.config.tau;
    let sigma = bic_sigma(tau);
    if sigma <= 0.0 {
        return Err(Error::Config(format!("quantile level {tau} gives a zero BIC scale")));
    }
    let df = match df_mode {
        DfMode::LeafCount => fit.leaf_count(),
        DfMode::JumpCount => {
            if fit.shape.ndim() != 1 {
                return Err(Error::Usage(
                    "jump-count degrees of freedom need a one-dimensional fit".into(),
                ));
            }
            fit.theta_hat
                .windows(2)
                .filter(|w| (w[0] - w[1]).abs() > JUMP_THRESHOLD)
                .count()
        }
    };
    let loss = check_loss(tau, y, &fit.theta_hat);
    Ok(BicScore {
        lambda: fit.config.lambda,
        bic: 2.0 / sigma * loss + df as f64 * (y.len() as f64).ln(),
        df,
        loss,
    })
}

/// Outcome of [`select_lambda`].
#[derive(Debug, Clone)]
pub struct Selection {
    pub lambda: f64,
    pub fit: FitResult,
    pub scores: Vec<BicScore>,
}

impl Selection {
    pub fn best(&self) -> &BicScore {
        self.scores
            .iter()
            .find(|s| s.lambda == self.lambda)
            .expect("selected lambda is scored")
    }
}

/// Fits every penalty of `grid` and keeps the fit with the smallest BIC,
/// preferring the larger penalty on ties. `cfg.lambda` is ignored.
pub fn select_lambda(
    shape: &LatticeShape,
    y: &[f64],
    cfg: &SolverConfig,
    grid: &LambdaGrid,
    df_mode: DfMode,
) -> Result<Selection> {
    if grid.is_empty() {
        return Err(Error::Config("lambda grid is empty".into()));
    }
    let cfg = cfg.with_lambda(grid.values()[0])?;
    cfg.check_shape(shape)?;
    if df_mode == DfMode::JumpCount && shape.ndim() != 1 {
        return Err(Error::Usage(
            "jump-count degrees of freedom need a one-dimensional lattice".into(),
        ));
    }

    let fits: Vec<FitResult> = match cfg.method {
        Method::Qdcart | Method::Dcart => {
            let solver = if cfg.method == Method::Qdcart {
                DyadicSolver::qdcart(shape, y, cfg.tau, cfg.gamma)?
            } else {
                DyadicSolver::dcart(shape, y, cfg.gamma)?
            };
            let mut fits: Vec<FitResult> = grid
                .values()
                .par_iter()
                .map(|&lambda| solver.fit(lambda))
                .collect::<Result<_>>()?;
            // dcart echoes the caller's tau so the BIC uses it
            fits.iter_mut().for_each(|f| f.config.tau = cfg.tau);
            fits
        }
        Method::Qort1d => grid
            .values()
            .par_iter()
            .map(|&lambda| fit_qort_1d(y, &cfg.with_lambda(lambda)?))
            .collect::<Result<_>>()?,
    };

    let scores: Vec<BicScore> = fits.iter().map(|f| bic(y, f, df_mode)).collect::<Result<_>>()?;
    let mut best = 0;
    for (i, s) in scores.iter().enumerate() {
        if s.bic <= scores[best].bic {
            best = i;
        }
    }
    let fit = fits.into_iter().nth(best).expect("index in range");
    Ok(Selection {
        lambda: grid.values()[best],
        fit,
        scores,
    })
}
