//! Synthetic signals and noise for the benchmark scenarios.
//!
//! Scenarios 1-4 live on a line of `n` cells, scenarios 5-7 on an `n x n`
//! image (first coordinate `i` is the row). Boundary inequalities are
//! evaluated in exact integer arithmetic.
//!
//! Noise is drawn from a ChaCha8 stream keyed by the seed, with one stream
//! per cell (stream id = storage offset). Draws are therefore independent of
//! evaluation order and thread count.

use rand::distr::{Distribution, Open01};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{ChiSquared, StandardNormal};

use crate::error::{Error, Result};
use crate::lattice::LatticeShape;

/// Degrees of freedom of the Student-t scenarios.
pub const STUDENT_T_DF: f64 = 2.5;

/// One of the seven generating models.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Scenario {
    id: u8,
    n: usize,
}

impl Scenario {
    pub fn new(id: u8, n: usize) -> Result<Self> {
        let min_n = match id {
            1 | 3 | 5 | 6 | 7 => 5,
            2 | 4 => 32,
            _ => return Err(Error::Config(format!("scenario must be between 1 and 7, got {id}"))),
        };
        if n < min_n {
            return Err(Error::Config(format!("scenario {id} needs n >= {min_n}, got {n}")));
        }
        Ok(Self { id, n })
    }

    pub fn id(&self) -> u8 {
        self.id
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn ndim(&self) -> usize {
        if self.id <= 4 {
            1
        } else {
            2
        }
    }

    pub fn shape(&self) -> LatticeShape {
        LatticeShape::cube(self.ndim(), self.n).expect("validated side length")
    }

    pub fn noise_law(&self) -> NoiseLaw {
        match self.id {
            3 => NoiseLaw::Cauchy,
            4 => NoiseLaw::HeteroscedasticNormal,
            _ => NoiseLaw::StudentT,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NoiseLaw {
    /// Student t with [`STUDENT_T_DF`] degrees of freedom.
    StudentT,
    /// Standard Cauchy.
    Cauchy,
    /// `N(0, 1) * sqrt(2 i / N + 1)` for 1-based linear index `i`.
    HeteroscedasticNormal,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct NoiseSpec {
    pub law: NoiseLaw,
    pub seed: u64,
}

/// Observations and the signal they were drawn around.
#[derive(Debug, Clone)]
pub struct Dataset {
    pub y: Vec<f64>,
    pub theta_star: Vec<f64>,
    pub scenario: Scenario,
    pub seed: u64,
}

impl Dataset {
    pub fn shape(&self) -> LatticeShape {
        self.scenario.shape()
    }
}

/// True signal `theta*` of a scenario, row-major.
pub fn signal(scenario: &Scenario) -> Vec<f64> {
    let n = scenario.n;
    match scenario.id {
        1 | 3 => {
            let f = n / 5;
            (1..=n)
                .map(|i| indicator((f + 1..=2 * f).contains(&i) || (3 * f + 1..=n).contains(&i)))
                .collect()
        }
        2 | 4 => {
            let (t, s) = (n / 3, n / 32);
            (1..=n)
                .map(|i| {
                    indicator(
                        (t + 1..=t + s).contains(&i)
                            || (t + 2 * s + 1..=t + 3 * s).contains(&i)
                            || (t + 4 * s + 1..=n).contains(&i),
                    )
                })
                .collect()
        }
        _ => {
            let mut theta = Vec::with_capacity(n * n);
            for i in 1..=n {
                for j in 1..=n {
                    theta.push(image_value(scenario.id, n as i64, i as i64, j as i64));
                }
            }
            theta
        }
    }
}

fn indicator(b: bool) -> f64 {
    if b {
        1.0
    } else {
        0.0
    }
}

fn image_value(id: u8, n: i64, i: i64, j: i64) -> f64 {
    match id {
        // n/5 < i < 3n/5 and n/5 < j < 3n/5
        5 => indicator(n < 5 * i && 5 * i < 3 * n && n < 5 * j && 5 * j < 3 * n),
        // disks of radius n/5 about (n/4, n/4) and (3n/4, 3n/4), scaled by 20
        6 => {
            let r2 = 16 * n * n;
            let d1 = (20 * i - 5 * n).pow(2) + (20 * j - 5 * n).pow(2);
            let d2 = (20 * i - 15 * n).pow(2) + (20 * j - 15 * n).pow(2);
            if d1 < r2 {
                1.0
            } else if d2 < r2 {
                -1.0
            } else {
                0.0
            }
        }
        // first matching case wins; both +1 bands precede the -1 corner
        7 => {
            let band = n < 4 * i && 4 * i < 3 * n && n < 4 * j && 8 * j < 3 * n;
            let step = 5 * n < 8 * i && 4 * i < 3 * n && 3 * n <= 8 * j && 4 * j < 3 * n;
            if band || step {
                1.0
            } else if 8 * i > 6 * n && 8 * j > 6 * n {
                -1.0
            } else {
                0.0
            }
        }
        _ => unreachable!("image scenarios are 5-7"),
    }
}

/// Independent draws of `spec.law`, one per cell of `shape`.
pub fn noise(spec: &NoiseSpec, shape: &LatticeShape) -> Vec<f64> {
    let base = ChaCha8Rng::seed_from_u64(spec.seed);
    let chi2 = ChiSquared::new(STUDENT_T_DF).expect("positive degrees of freedom");
    let total = shape.len() as f64;
    (0..shape.len())
        .map(|cell| {
            let mut rng = base.clone();
            rng.set_stream(cell as u64);
            match spec.law {
                NoiseLaw::StudentT => {
                    let z: f64 = StandardNormal.sample(&mut rng);
                    let v = chi2.sample(&mut rng);
                    z / (v / STUDENT_T_DF).sqrt()
                }
                NoiseLaw::Cauchy => {
                    let u: f64 = Open01.sample(&mut rng);
                    (std::f64::consts::PI * (u - 0.5)).tan()
                }
                NoiseLaw::HeteroscedasticNormal => {
                    let z: f64 = StandardNormal.sample(&mut rng);
                    z * heteroscedastic_scale(cell + 1, total)
                }
            }
        })
        .collect()
}

/// `sqrt(2 i / n + 1)` for 1-based index `i`.
pub fn heteroscedastic_scale(i: usize, n: f64) -> f64 {
    (2.0 * i as f64 / n + 1.0).sqrt()
}

/// Mixes the scenario and size into the seed so that different scenarios
/// draw from unrelated streams.
fn stream_seed(seed: u64, scenario: &Scenario) -> u64 {
    let mut z = seed
        ^ (scenario.id as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15)
        ^ (scenario.n as u64).wrapping_mul(0xC2B2_AE3D_27D4_EB4F);
    // splitmix64 finaliser
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// `y = theta* + eps` for one replicate.
pub fn generate(scenario: &Scenario, seed: u64) -> Dataset {
    let theta_star = signal(scenario);
    let spec = NoiseSpec {
        law: scenario.noise_law(),
        seed: stream_seed(seed, scenario),
    };
    let eps = noise(&spec, &scenario.shape());
    let y = theta_star.iter().zip(&eps).map(|(t, e)| t + e).collect();
    Dataset {
        y,
        theta_star,
        scenario: *scenario,
        seed,
    }
}
