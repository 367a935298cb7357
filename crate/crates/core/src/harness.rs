//! Monte-Carlo benchmark of the oracle mean squared error.
//!
//! For each (scenario, size, method) every replicate is fitted at every
//! penalty of the grid; the MSE against the true signal is averaged over
//! replicates per penalty and the row reports the penalty with the smallest
//! average. Replicate `r` uses seed `base_seed + r`, so all methods see the
//! same data.

use std::time::Instant;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::quantile::QuantileLevel;
use crate::simulation::{generate, Scenario};
use crate::solver::{fit_qort_1d, DyadicSolver, Method, SolverConfig};
use crate::tuning::{default_gamma, default_grid, LambdaGrid};

pub const BENCH_HEADER: &str = "scenario,n,method,mse_mean,mse_stderr,lambda_star,wall_time_seconds";
pub const SURFACE_HEADER: &str = "scenario,n,method,lambda,mse_mean,mse_stderr";

#[derive(Debug, Clone)]
pub struct BenchSpec {
    pub scenarios: Vec<u8>,
    pub sizes: Vec<usize>,
    pub methods: Vec<Method>,
    pub replicates: usize,
    /// Defaults to the grid matching each scenario's dimension.
    pub grid: Option<LambdaGrid>,
    /// Defaults to [`default_gamma`] of each scenario's lattice.
    pub gamma: Option<usize>,
    pub tau: QuantileLevel,
    pub base_seed: u64,
}

impl Default for BenchSpec {
    fn default() -> Self {
        Self {
            scenarios: vec![1],
            sizes: vec![512],
            methods: vec![Method::Qdcart, Method::Dcart],
            replicates: 100,
            grid: None,
            gamma: None,
            tau: QuantileLevel::MEDIAN,
            base_seed: 0,
        }
    }
}

impl BenchSpec {
    pub fn validate(&self) -> Result<()> {
        if self.replicates == 0 {
            return Err(Error::Config("replicates must be at least 1".into()));
        }
        if self.methods.is_empty() || self.scenarios.is_empty() || self.sizes.is_empty() {
            return Err(Error::Config("scenarios, sizes and methods must be nonempty".into()));
        }
        for &id in &self.scenarios {
            for &n in &self.sizes {
                let s = Scenario::new(id, n)?;
                if s.ndim() != 1 && self.methods.contains(&Method::Qort1d) {
                    return Err(Error::Config(format!(
                        "qort1d cannot run on two-dimensional scenario {id}"
                    )));
                }
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BenchRow {
    pub scenario: u8,
    pub n: usize,
    pub method: Method,
    pub mse_mean: f64,
    pub mse_stderr: f64,
    pub lambda_star: f64,
    pub wall_time_seconds: f64,
}

impl BenchRow {
    pub fn to_csv(&self) -> String {
        format!(
            "{},{},{},{},{},{},{}",
            self.scenario,
            self.n,
            self.method,
            self.mse_mean,
            self.mse_stderr,
            self.lambda_star,
            self.wall_time_seconds
        )
    }
}

/// Replicate-averaged MSE at one penalty.
#[derive(Debug, Clone, PartialEq)]
pub struct SurfacePoint {
    pub scenario: u8,
    pub n: usize,
    pub method: Method,
    pub lambda: f64,
    pub mse_mean: f64,
    pub mse_stderr: f64,
}

impl SurfacePoint {
    pub fn to_csv(&self) -> String {
        format!(
            "{},{},{},{},{},{}",
            self.scenario, self.n, self.method, self.lambda, self.mse_mean, self.mse_stderr
        )
    }
}

#[derive(Debug, Clone, Default)]
pub struct BenchReport {
    pub rows: Vec<BenchRow>,
    pub surface: Vec<SurfacePoint>,
}

/// `(1/N) sum_i (a_i - b_i)^2`.
pub fn mse(a: &[f64], b: &[f64]) -> f64 {
    debug_assert_eq!(a.len(), b.len());
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>() / a.len() as f64
}

/// MSE of one replicate at every penalty of `grid`.
pub fn replicate_mse(
    scenario: &Scenario,
    method: Method,
    tau: QuantileLevel,
    gamma: usize,
    grid: &LambdaGrid,
    seed: u64,
) -> Result<Vec<f64>> {
    let data = generate(scenario, seed);
    let shape = scenario.shape();
    match method {
        Method::Qdcart | Method::Dcart => {
            let solver = if method == Method::Qdcart {
                DyadicSolver::qdcart(&shape, &data.y, tau, gamma)?
            } else {
                DyadicSolver::dcart(&shape, &data.y, gamma)?
            };
            grid.values()
                .iter()
                .map(|&lambda| Ok(mse(&solver.fit(lambda)?.theta_hat, &data.theta_star)))
                .collect()
        }
        Method::Qort1d => grid
            .values()
            .iter()
            .map(|&lambda| {
                let cfg = SolverConfig::new(Method::Qort1d, tau, lambda, gamma)?;
                Ok(mse(&fit_qort_1d(&data.y, &cfg)?.theta_hat, &data.theta_star))
            })
            .collect(),
    }
}

fn mean_and_stderr(values: &[f64]) -> (f64, f64) {
    let r = values.len() as f64;
    let mean = values.iter().sum::<f64>() / r;
    if values.len() < 2 {
        return (mean, 0.0);
    }
    let var = values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (r - 1.0);
    (mean, (var / r).sqrt())
}

/// Runs every (scenario, size, method) cell of `spec`. Replicates fan out
/// over the rayon pool; reduction is in replicate order.
pub fn run_benchmark(spec: &BenchSpec) -> Result<BenchReport> {
    spec.validate()?;
    let mut report = BenchReport::default();
    for &id in &spec.scenarios {
        for &n in &spec.sizes {
            let scenario = Scenario::new(id, n)?;
            let shape = scenario.shape();
            let grid = spec.grid.clone().unwrap_or_else(|| default_grid(&shape));
            let gamma = spec.gamma.unwrap_or_else(|| default_gamma(&shape));
            if gamma > shape.len() {
                return Err(Error::Infeasible {
                    gamma,
                    cells: shape.len(),
                });
            }
            for &method in &spec.methods {
                let started = Instant::now();
                let per_replicate: Vec<Vec<f64>> = (0..spec.replicates)
                    .into_par_iter()
                    .map(|r| {
                        let seed = spec.base_seed.wrapping_add(r as u64);
                        replicate_mse(&scenario, method, spec.tau, gamma, &grid, seed)
                    })
                    .collect::<Result<_>>()?;
                let wall = started.elapsed().as_secs_f64();

                let mut best: Option<(usize, f64, f64)> = None;
                for (k, &lambda) in grid.values().iter().enumerate() {
                    let column: Vec<f64> = per_replicate.iter().map(|row| row[k]).collect();
                    let (mean, stderr) = mean_and_stderr(&column);
                    report.surface.push(SurfacePoint {
                        scenario: id,
                        n,
                        method,
                        lambda,
                        mse_mean: mean,
                        mse_stderr: stderr,
                    });
                    if best.map_or(true, |(_, m, _)| mean < m) {
                        best = Some((k, mean, stderr));
                    }
                }
                let (k, mse_mean, mse_stderr) = best.expect("grid is nonempty");
                report.rows.push(BenchRow {
                    scenario: id,
                    n,
                    method,
                    mse_mean,
                    mse_stderr,
                    lambda_star: grid.values()[k],
                    wall_time_seconds: wall,
                });
            }
        }
    }
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn spec_validation() {
        let mut spec = BenchSpec {
            replicates: 0,
            ..Default::default()
        };
        assert!(spec.validate().is_err());
        spec.replicates = 1;
        spec.methods = vec![];
        assert!(spec.validate().is_err());
        spec.methods = vec![Method::Qort1d];
        spec.scenarios = vec![5];
        spec.sizes = vec![16];
        assert!(spec.validate().is_err());
        spec.scenarios = vec![1];
        assert!(spec.validate().is_ok());
    }

    #[test]
    fn single_replicate_is_deterministic() {
        let spec = BenchSpec {
            scenarios: vec![1],
            sizes: vec![64],
            methods: vec![Method::Qdcart, Method::Qort1d],
            replicates: 1,
            base_seed: 5,
            ..Default::default()
        };
        let a = run_benchmark(&spec).unwrap();
        let b = run_benchmark(&spec).unwrap();
        for (x, y) in a.rows.iter().zip(&b.rows) {
            assert_eq!(x.mse_mean, y.mse_mean);
            assert_eq!(x.lambda_star, y.lambda_star);
            assert_eq!(x.mse_stderr, 0.0);
        }
    }

    #[test]
    fn lambda_star_minimises_surface() {
        let spec = BenchSpec {
            scenarios: vec![3],
            sizes: vec![128],
            replicates: 4,
            ..Default::default()
        };
        let report = run_benchmark(&spec).unwrap();
        for row in &report.rows {
            let points: Vec<&SurfacePoint> = report
                .surface
                .iter()
                .filter(|p| p.method == row.method && p.scenario == row.scenario)
                .collect();
            assert_eq!(points.len(), 25);
            let min = points.iter().map(|p| p.mse_mean).fold(f64::INFINITY, f64::min);
            assert_eq!(row.mse_mean, min);
            assert!(points.iter().any(|p| p.lambda == row.lambda_star && p.mse_mean == min));
        }
    }

    #[test]
    fn stderr_formula() {
        let (m, s) = mean_and_stderr(&[1.0, 3.0]);
        assert_eq!(m, 2.0);
        assert!((s - 1.0).abs() < 1e-15);
    }
}
