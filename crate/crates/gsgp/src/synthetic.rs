//! Deterministic synthetic regression problems for tests and desk-scale
//! experiments. The real benchmark files are not redistributable, so these
//! stand in wherever a concrete dataset shape is needed.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use crate::dataset::Dataset;

/// Smooth nonlinear response over eight inputs with mild observation noise.
/// Inputs are uniform on [0, 2).
pub fn smooth_surrogate(cases: usize, seed: u64) -> Dataset {
    assert!(cases >= 2);
    let num_vars = 8;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let noise = Normal::new(0.0, 0.1).expect("valid std dev");
    let mut inputs = Vec::with_capacity(cases * num_vars);
    let mut targets = Vec::with_capacity(cases);
    for _ in 0..cases {
        let x: Vec<f64> = (0..num_vars).map(|_| rng.random_range(0.0..2.0)).collect();
        let y = (x[0] * x[1] + 3.0 * x[2]) / (1.0 + x[3] * x[3]) + 2.0 * x[4] - x[5] * x[6]
            + 0.5 * x[7] * x[7]
            + noise.sample(&mut rng);
        inputs.extend(x);
        targets.push(y);
    }
    Dataset::new("smooth_surrogate", num_vars, inputs, targets).expect("finite by construction")
}

/// Short, wide dataset: `informative` predictive inputs, the remaining
/// `num_vars - informative` pure noise. All inputs are standard normal.
pub fn wide_noise(cases: usize, num_vars: usize, informative: usize, seed: u64) -> Dataset {
    assert!(cases >= 2);
    assert!(informative >= 1 && informative <= num_vars);
    assert!(informative >= 5, "response formula uses five inputs");
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let standard = Normal::new(0.0, 1.0).expect("valid std dev");
    let noise = Normal::new(0.0, 0.1).expect("valid std dev");
    let mut inputs = Vec::with_capacity(cases * num_vars);
    let mut targets = Vec::with_capacity(cases);
    for _ in 0..cases {
        let x: Vec<f64> = (0..num_vars).map(|_| standard.sample(&mut rng)).collect();
        let y = 2.0 * x[0] - 1.5 * x[1] + x[2] * x[3] + 0.5 * x[4] + noise.sample(&mut rng);
        inputs.extend(x);
        targets.push(y);
    }
    Dataset::new("wide_noise", num_vars, inputs, targets).expect("finite by construction")
}
