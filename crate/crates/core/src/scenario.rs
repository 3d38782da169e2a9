//! Problem instances: per-user channel power gains and a transmit budget.
//!
//! Noise power is normalized to one, so `total_power` is expressed in units
//! of noise power and the received SNR of user `k` at power `P` is `P·g_k`.
//!
//! Random instances draw i.i.d. unit-mean exponential gains (Rayleigh fading
//! power). The generator is ChaCha8 seeded with `seed_from_u64`, sampled
//! through `rand_distr::Exp1`, so a seed reproduces the same gains bit for
//! bit on every platform.

use std::fs;
use std::path::Path;

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::Exp1;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A validated max-min power allocation instance.
///
/// Gains are stored sorted non-increasing, so index 0 is the strongest user
/// and decodes first under SIC. The permutation back to the caller's order
/// is kept so results can be reported per original user.
#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    gains: Vec<f64>,
    total_power: f64,
    label: Option<String>,
    // order[i] = caller index of the user at sorted position i
    order: Vec<usize>,
}

/// On-disk form. Gains are written in the caller's original order; loading
/// re-sorts them, which makes save/load an exact round trip.
#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ScenarioDocument {
    gains: Vec<f64>,
    total_power: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    label: Option<String>,
}

impl Scenario {
    /// Validates and sorts `gains` (stable, descending).
    pub fn new(gains: Vec<f64>, total_power: f64) -> Result<Self> {
        if gains.is_empty() {
            return Err(Error::InvalidScenario(
                "at least one user is required".into(),
            ));
        }
        for (i, &g) in gains.iter().enumerate() {
            if !g.is_finite() || g <= 0.0 {
                return Err(Error::InvalidScenario(format!(
                    "gain of user {i} must be finite and positive, got {g}"
                )));
            }
        }
        if !total_power.is_finite() || total_power <= 0.0 {
            return Err(Error::InvalidScenario(format!(
                "total power must be finite and positive, got {total_power}"
            )));
        }

        let mut order: Vec<usize> = (0..gains.len()).collect();
        // sort_by is stable: equal gains keep their original relative order
        order.sort_by(|&a, &b| gains[b].total_cmp(&gains[a]));
        let sorted = order.iter().map(|&i| gains[i]).collect();

        Ok(Scenario {
            gains: sorted,
            total_power,
            label: None,
            order,
        })
    }

    pub fn with_label(mut self, label: impl Into<String>) -> Self {
        self.label = Some(label.into());
        self
    }

    /// Draws `num_users` i.i.d. Exp(1) gains from a ChaCha8 stream seeded
    /// with `seed`.
    pub fn sample_rayleigh(num_users: usize, total_power: f64, seed: u64) -> Result<Self> {
        if num_users == 0 {
            return Err(Error::InvalidParameter(
                "num_users must be at least 1".into(),
            ));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let gains = (0..num_users)
            .map(|_| {
                let g: f64 = rng.sample(Exp1);
                g.max(f64::MIN_POSITIVE)
            })
            .collect();
        Scenario::new(gains, total_power)
    }

    /// Same gains with a different budget; permutation and label are kept.
    pub fn with_total_power(&self, total_power: f64) -> Result<Self> {
        if !total_power.is_finite() || total_power <= 0.0 {
            return Err(Error::InvalidScenario(format!(
                "total power must be finite and positive, got {total_power}"
            )));
        }
        Ok(Scenario {
            total_power,
            ..self.clone()
        })
    }

    pub fn num_users(&self) -> usize {
        self.gains.len()
    }

    /// Gains sorted non-increasing.
    pub fn gains(&self) -> &[f64] {
        &self.gains
    }

    pub fn total_power(&self) -> f64 {
        self.total_power
    }

    pub fn label(&self) -> Option<&str> {
        self.label.as_deref()
    }

    /// `permutation()[i]` is the caller's index of the user at sorted
    /// position `i`.
    pub fn permutation(&self) -> &[usize] {
        &self.order
    }

    /// True when the input gains were not already sorted non-increasing.
    pub fn was_reordered(&self) -> bool {
        self.order.iter().enumerate().any(|(i, &j)| i != j)
    }

    /// Reorders a per-user vector from sorted order back to the caller's.
    pub fn to_original_order(&self, sorted_values: &[f64]) -> Result<Vec<f64>> {
        if sorted_values.len() != self.num_users() {
            return Err(Error::LengthMismatch {
                expected: self.num_users(),
                actual: sorted_values.len(),
            });
        }
        let mut out = vec![0.0; sorted_values.len()];
        for (pos, &orig) in self.order.iter().enumerate() {
            out[orig] = sorted_values[pos];
        }
        Ok(out)
    }

    /// `b_k = 1 / (P_T·g_k)`, the rank-one part of the PF operator.
    pub fn noise_terms(&self) -> Vec<f64> {
        self.gains
            .iter()
            .map(|g| 1.0 / (self.total_power * g))
            .collect()
    }

    pub fn to_json(&self) -> String {
        let doc = ScenarioDocument {
            gains: self.to_original_order(&self.gains).expect("length matches"),
            total_power: self.total_power,
            label: self.label.clone(),
        };
        serde_json::to_string_pretty(&doc).expect("scenario document serializes")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let doc: ScenarioDocument =
            serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))?;
        let s = Scenario::new(doc.gains, doc.total_power)?;
        Ok(match doc.label {
            Some(label) => s.with_label(label),
            None => s,
        })
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        fs::write(path, self.to_json() + "\n").map_err(|source| Error::Io {
            path: path.to_path_buf(),
            source,
        })
    }

    /// Loads a scenario document. Unsorted gains are accepted; check
    /// [`Scenario::was_reordered`] to detect them.
    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = fs::read_to_string(path).map_err(|source| Error::Io {
            path: path.to_path_buf(),
            source,
        })?;
        Scenario::from_json(&text)
    }
}

/// Gains of the four-user instance used in the scheme comparisons.
pub const REFERENCE_GAINS: [f64; 4] = [1.2389, 0.7192, 0.4322, 0.3614];
