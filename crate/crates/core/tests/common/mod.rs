#![allow(dead_code)]

use noma_maxmin::Scenario;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Ordinary least squares `y ≈ slope·x + intercept`.
#[derive(Debug, Clone, Copy)]
pub struct LinearFit {
    pub slope: f64,
    pub intercept: f64,
    pub r_squared: f64,
}

pub fn linear_fit(x: &[f64], y: &[f64]) -> LinearFit {
    assert_eq!(x.len(), y.len());
    assert!(x.len() >= 2);
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = x.iter().map(|a| (a - mx).powi(2)).sum();
    let syy: f64 = y.iter().map(|b| (b - my).powi(2)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let r_squared = if syy == 0.0 {
        1.0
    } else {
        sxy * sxy / (sxx * syy)
    };
    LinearFit {
        slope,
        intercept,
        r_squared,
    }
}

/// Seeded random instances with `K ∈ {2,…,8}` and `P_T ∈ [1, 100]`.
pub fn random_corpus(n: usize, seed: u64) -> Vec<Scenario> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n)
        .map(|_| {
            let k = rng.random_range(2..=8usize);
            let power = rng.random_range(1.0..=100.0f64);
            let gains_seed: u64 = rng.random();
            Scenario::sample_rayleigh(k, power, gains_seed).unwrap()
        })
        .collect()
}

pub fn e2() -> Scenario {
    Scenario::new(vec![1.0, 0.5], 10.0).unwrap()
}

pub fn e4() -> Scenario {
    Scenario::new(noma_maxmin::scenario::REFERENCE_GAINS.to_vec(), 10.0).unwrap()
}

/// Prints one verdict line and fails the test when `ok` is false.
pub fn verdict(id: u32, name: &str, ok: bool, detail: impl std::fmt::Display) {
    let tag = if ok { "PASS" } else { "FAIL" };
    println!("[{tag}] criterion {id:>2} {name}: {detail}");
    assert!(ok, "criterion {id} ({name}) failed: {detail}");
}
