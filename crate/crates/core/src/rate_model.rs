//! Achievable rates under superposition coding with SIC, and the
//! orthogonal (equal-bandwidth FDMA) comparison model.
//!
//! With users sorted by decreasing gain, user `k` cancels nothing and sees
//! interference from the powers of every stronger user `j < k`:
//!
//! ```text
//! R_1 = log2(1 + P_1·g_1)
//! R_k = log2(1 + P_k·g_k / (g_k·Σ_{j<k} P_j + 1))
//! ```
//!
//! The OMA model gives every user `1/K` of the band with noise scaled in
//! proportion: `R_k = (1/K)·log2(1 + K·P_k·g_k)`.

use crate::error::{Error, Result};
use crate::scenario::Scenario;

/// Relative slack on the power budget to absorb rounding in normalization.
pub const BUDGET_SLACK: f64 = 1e-12;

/// Per-user transmit powers, in the scenario's sorted user order.
#[derive(Debug, Clone, PartialEq)]
pub struct PowerAllocation(Vec<f64>);

impl PowerAllocation {
    /// Checks that every power is finite and non-negative.
    pub fn new(powers: Vec<f64>) -> Result<Self> {
        if let Some((i, p)) = powers
            .iter()
            .enumerate()
            .find(|(_, p)| !p.is_finite() || **p < 0.0)
        {
            return Err(Error::InvalidAllocation(format!(
                "power of user {i} must be finite and non-negative, got {p}"
            )));
        }
        Ok(PowerAllocation(powers))
    }

    /// Like [`PowerAllocation::new`], also checking the length and the
    /// budget `Σ P ≤ P_T·(1 + 1e-12)` against `s`.
    pub fn for_scenario(powers: Vec<f64>, s: &Scenario) -> Result<Self> {
        let p = PowerAllocation::new(powers)?;
        p.check_length(s)?;
        let total = p.total();
        if total > s.total_power() * (1.0 + BUDGET_SLACK) {
            return Err(Error::InvalidAllocation(format!(
                "allocation uses {total} but the budget is {}",
                s.total_power()
            )));
        }
        Ok(p)
    }

    pub(crate) fn from_trusted(powers: Vec<f64>) -> Self {
        debug_assert!(powers.iter().all(|p| p.is_finite() && *p >= 0.0));
        PowerAllocation(powers)
    }

    pub fn powers(&self) -> &[f64] {
        &self.0
    }

    pub fn into_inner(self) -> Vec<f64> {
        self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn total(&self) -> f64 {
        self.0.iter().sum()
    }

    fn check_length(&self, s: &Scenario) -> Result<()> {
        if self.len() != s.num_users() {
            return Err(Error::LengthMismatch {
                expected: s.num_users(),
                actual: self.len(),
            });
        }
        Ok(())
    }
}

/// Per-user achievable rates in bits/s/Hz.
#[derive(Debug, Clone, PartialEq)]
pub struct RateVector(Vec<f64>);

impl RateVector {
    pub fn new(rates: Vec<f64>) -> Result<Self> {
        if rates.is_empty() {
            return Err(Error::InvalidParameter("rate vector is empty".into()));
        }
        if let Some(r) = rates.iter().find(|r| !r.is_finite() || **r < 0.0) {
            return Err(Error::InvalidParameter(format!(
                "rates must be finite and non-negative, got {r}"
            )));
        }
        Ok(RateVector(rates))
    }

    pub fn rates(&self) -> &[f64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// The max-min objective.
    pub fn min_rate(&self) -> f64 {
        self.0.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn max_rate(&self) -> f64 {
        self.0.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    /// `max − min`; zero exactly when all users get the same rate.
    pub fn spread(&self) -> f64 {
        self.max_rate() - self.min_rate()
    }

    /// Jain's fairness index `(Σ R)² / (K·Σ R²)`, in `[1/K, 1]`.
    pub fn jain_index(&self) -> Result<f64> {
        let sum: f64 = self.0.iter().sum();
        let sum_sq: f64 = self.0.iter().map(|r| r * r).sum();
        if sum_sq == 0.0 {
            return Err(Error::AllRatesZero);
        }
        Ok(sum * sum / (self.0.len() as f64 * sum_sq))
    }
}

/// NOMA rates of `p` under SIC in sorted-gain order. O(K).
pub fn noma_rates(s: &Scenario, p: &PowerAllocation) -> Result<RateVector> {
    p.check_length(s)?;
    let mut out = vec![0.0; s.num_users()];
    noma_rates_into(s.gains(), p.powers(), &mut out);
    Ok(RateVector(out))
}

/// OMA (equal-bandwidth FDMA) rates of `p`.
pub fn oma_rates(s: &Scenario, p: &PowerAllocation) -> Result<RateVector> {
    p.check_length(s)?;
    let k = s.num_users() as f64;
    let rates = s
        .gains()
        .iter()
        .zip(p.powers())
        .map(|(g, pw)| (k * pw * g).ln_1p() / (k * std::f64::consts::LN_2))
        .collect();
    Ok(RateVector(rates))
}

pub(crate) fn noma_rates_into(gains: &[f64], powers: &[f64], out: &mut [f64]) {
    let mut interference = 0.0;
    for ((g, p), r) in gains.iter().zip(powers).zip(out.iter_mut()) {
        *r = (p * g / (g * interference + 1.0)).ln_1p() / std::f64::consts::LN_2;
        interference += p;
    }
}

/// `(min, max)` of the NOMA rates without allocating.
pub(crate) fn noma_rate_range(gains: &[f64], powers: &[f64]) -> (f64, f64) {
    let mut interference = 0.0;
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for (g, p) in gains.iter().zip(powers) {
        let r = (p * g / (g * interference + 1.0)).ln_1p() / std::f64::consts::LN_2;
        lo = lo.min(r);
        hi = hi.max(r);
        interference += p;
    }
    (lo, hi)
}
