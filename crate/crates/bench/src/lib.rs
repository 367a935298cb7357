//! Shared inputs for the criterion benchmarks.

use qdcart::{generate, Dataset, Scenario};

/// Scenario 1 data on a line of `n` cells.
pub fn line_data(n: usize, seed: u64) -> Dataset {
    generate(&Scenario::new(1, n).expect("n >= 5"), seed)
}

/// Scenario 7 data on an `n x n` image.
pub fn image_data(n: usize, seed: u64) -> Dataset {
    generate(&Scenario::new(7, n).expect("n >= 5"), seed)
}
