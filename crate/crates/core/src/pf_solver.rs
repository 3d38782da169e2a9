//! Perron-Frobenius characterization of the max-min allocation.
//!
//! At the optimum every user attains the same rate `R*` and the budget is
//! tight. Writing `s* = P*/P_T` and `c = 2^{R*} − 1`, the equal-rate
//! conditions read `s*/c = A·s* + b`, and since `1ᵀs* = 1` this is the
//! eigen-equation `B·s* = (1/c)·s*` for the strictly positive matrix
//! `B = A + b·1ᵀ`. Hence `λ_pf = 1/c` and `R* = log2(1 + 1/λ_pf)`.
//!
//! `B` is never formed. `A·x` is the exclusive prefix sum of `x` and
//! `b·1ᵀx` is one scaled copy of `b`, so a product costs O(K).

use crate::error::{Error, Result};
use crate::rate_model::{noma_rate_range, PowerAllocation};
use crate::scenario::Scenario;

pub const DEFAULT_TOLERANCE: f64 = 1e-5;
pub const DEFAULT_MAX_ITERATIONS: usize = 10_000;

/// Changes below this are rounding noise and are ignored when estimating
/// the convergence ratio.
const RATIO_NOISE_FLOOR: f64 = 1e-14;

/// When the power iteration stops.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum StoppingRule {
    /// `|R_min(i) − R_min(i−1)| < ε` only.
    MinRateChange,
    /// `|R_min(i) − R_min(i−1)| < ε` and `max R − min R ≤ ε`.
    ///
    /// On the budget simplex `min R ≤ R* ≤ max R`, so the second condition
    /// bounds the error of the reported rate by `ε` even when the iteration
    /// contracts slowly and successive changes understate the distance.
    #[default]
    Certified,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolverOptions {
    pub tolerance: f64,
    pub max_iterations: usize,
    pub stopping: StoppingRule,
}

impl Default for SolverOptions {
    fn default() -> Self {
        SolverOptions {
            tolerance: DEFAULT_TOLERANCE,
            max_iterations: DEFAULT_MAX_ITERATIONS,
            stopping: StoppingRule::default(),
        }
    }
}

impl SolverOptions {
    pub fn with_tolerance(tolerance: f64) -> Self {
        SolverOptions {
            tolerance,
            ..Default::default()
        }
    }

    pub fn stopping(mut self, rule: StoppingRule) -> Self {
        self.stopping = rule;
        self
    }

    pub fn max_iterations(mut self, n: usize) -> Self {
        self.max_iterations = n;
        self
    }

    pub(crate) fn validate(&self) -> Result<()> {
        if !self.tolerance.is_finite() || self.tolerance <= 0.0 {
            return Err(Error::InvalidParameter(format!(
                "tolerance must be finite and positive, got {}",
                self.tolerance
            )));
        }
        if self.max_iterations == 0 {
            return Err(Error::InvalidParameter(
                "max_iterations must be at least 1".into(),
            ));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SolveMethod {
    PowerIteration,
    Bisection,
}

impl SolveMethod {
    pub fn name(self) -> &'static str {
        match self {
            SolveMethod::PowerIteration => "power",
            SolveMethod::Bisection => "bisection",
        }
    }
}

/// One step of a solver run.
///
/// For the power iteration `min_rate` is the minimum NOMA rate of the
/// current iterate. For bisection it is the candidate rate tested at that
/// halving, and `rate_spread` belongs to the candidate's allocation scaled
/// to the full budget.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TraceEntry {
    /// 0 is the initial point; `i` is the state after `i` updates.
    pub iteration: usize,
    pub min_rate: f64,
    pub rate_spread: f64,
    /// `|min_rate(i) − min_rate(i−1)|`; `None` for the initial point.
    pub change: Option<f64>,
}

/// Row-sum bounds on `λ_pf` and the matching bounds on `R*`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PfBounds {
    pub lambda_lo: f64,
    pub lambda_hi: f64,
    pub rate_lo: f64,
    pub rate_hi: f64,
}

impl PfBounds {
    pub fn contains_lambda(&self, lambda: f64) -> bool {
        self.lambda_lo <= lambda && lambda <= self.lambda_hi
    }

    pub fn contains_rate(&self, rate: f64) -> bool {
        self.rate_lo <= rate && rate <= self.rate_hi
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolveResult {
    pub method: SolveMethod,
    /// Optimal powers in sorted user order, summing to `P_T`.
    pub allocation: PowerAllocation,
    /// Common rate `R*` in bits/s/Hz.
    pub fairness_rate: f64,
    pub lambda_pf: f64,
    /// Operator applications (power iteration) or halvings (bisection).
    pub iterations: usize,
    pub trace: Vec<TraceEntry>,
    pub bounds: PfBounds,
    pub converged: bool,
}

impl SolveResult {
    /// Successive changes recorded in the trace.
    pub fn changes(&self) -> Vec<f64> {
        self.trace.iter().filter_map(|e| e.change).collect()
    }

    pub fn convergence_ratio(&self) -> Result<f64> {
        estimate_convergence_ratio(&self.changes())
    }
}

/// `y = A·x + b·(1ᵀx)` for the scenario's operator.
pub fn apply_b(s: &Scenario, x: &[f64]) -> Result<Vec<f64>> {
    if x.len() != s.num_users() {
        return Err(Error::LengthMismatch {
            expected: s.num_users(),
            actual: x.len(),
        });
    }
    if let Some(v) = x.iter().find(|v| !v.is_finite()) {
        return Err(Error::InvalidParameter(format!(
            "operator input must be finite, got {v}"
        )));
    }
    let mut out = vec![0.0; x.len()];
    apply_b_into(&s.noise_terms(), x, &mut out);
    Ok(out)
}

/// Allocation-free form of [`apply_b`]; `noise_terms` is `b`.
pub fn apply_b_into(noise_terms: &[f64], x: &[f64], out: &mut [f64]) {
    debug_assert_eq!(noise_terms.len(), x.len());
    debug_assert_eq!(out.len(), x.len());
    let total: f64 = x.iter().sum();
    let mut prefix = 0.0;
    for ((o, b), xi) in out.iter_mut().zip(noise_terms).zip(x) {
        *o = prefix + b * total;
        prefix += xi;
    }
}

/// `R = log2(1 + 1/λ)`.
pub fn rate_from_lambda(lambda: f64) -> Result<f64> {
    if lambda.is_nan() || lambda <= 0.0 || lambda.is_infinite() {
        return Err(Error::InvalidParameter(format!(
            "eigenvalue must be finite and positive, got {lambda}"
        )));
    }
    Ok((1.0 / lambda).ln_1p() / std::f64::consts::LN_2)
}

/// Inverse of [`rate_from_lambda`]: `λ = 1 / (2^R − 1)`.
pub fn lambda_from_rate(rate: f64) -> f64 {
    1.0 / (rate * std::f64::consts::LN_2).exp_m1()
}

/// Bounds `λ_pf` between the smallest and largest row sums of `B`.
///
/// Row `k` sums to `(k−1) + Σ_j b_j`, so the bounds are `Σ b` and
/// `K − 1 + Σ b`, and they coincide when `K = 1`.
pub fn pf_bounds(s: &Scenario) -> PfBounds {
    let lambda_lo: f64 = s.gains().iter().map(|g| 1.0 / g).sum::<f64>() / s.total_power();
    let lambda_hi = (s.num_users() - 1) as f64 + lambda_lo;
    PfBounds {
        lambda_lo,
        lambda_hi,
        rate_lo: rate_from_lambda(lambda_hi).expect("positive"),
        rate_hi: rate_from_lambda(lambda_lo).expect("positive"),
    }
}

/// `‖B·s − λ·s‖∞` with `s = allocation / P_T`.
pub fn eigen_residual(s: &Scenario, allocation: &PowerAllocation, lambda: f64) -> Result<f64> {
    let unit: Vec<f64> = allocation
        .powers()
        .iter()
        .map(|p| p / s.total_power())
        .collect();
    let image = apply_b(s, &unit)?;
    Ok(image
        .iter()
        .zip(&unit)
        .map(|(y, x)| (y - lambda * x).abs())
        .fold(0.0, f64::max))
}

/// Normalized power iteration on `B`, starting from equal power.
///
/// Each step applies the operator and rescales to the budget. The growth
/// factor `‖B·P‖₁/‖P‖₁` of the last step is reported as `λ_pf` and the
/// minimum NOMA rate of the final iterate as the fairness rate. If the
/// iteration cap is hit the last iterate is returned with
/// `converged = false`.
pub fn solve_power_iteration(s: &Scenario, options: &SolverOptions) -> Result<SolveResult> {
    options.validate()?;
    let k = s.num_users();
    let total_power = s.total_power();
    let bounds = pf_bounds(s);
    let gains = s.gains();

    if k == 1 {
        let rate = bounds.rate_hi;
        return Ok(SolveResult {
            method: SolveMethod::PowerIteration,
            allocation: PowerAllocation::from_trusted(vec![total_power]),
            fairness_rate: rate,
            lambda_pf: bounds.lambda_lo,
            iterations: 0,
            trace: vec![TraceEntry {
                iteration: 0,
                min_rate: rate,
                rate_spread: 0.0,
                change: None,
            }],
            bounds,
            converged: true,
        });
    }

    let noise_terms = s.noise_terms();
    let mut power = vec![total_power / k as f64; k];
    let mut image = vec![0.0; k];

    let (mut prev_min, max) = noma_rate_range(gains, &power);
    let mut trace = Vec::with_capacity(64);
    trace.push(TraceEntry {
        iteration: 0,
        min_rate: prev_min,
        rate_spread: max - prev_min,
        change: None,
    });

    let mut lambda = f64::NAN;
    let mut converged = false;
    let mut iterations = 0;
    while iterations < options.max_iterations {
        iterations += 1;
        apply_b_into(&noise_terms, &power, &mut image);
        let image_norm: f64 = image.iter().sum();
        let power_norm: f64 = power.iter().sum();
        lambda = image_norm / power_norm;
        let scale = total_power / image_norm;
        for (p, y) in power.iter_mut().zip(&image) {
            *p = y * scale;
        }

        let (min, max) = noma_rate_range(gains, &power);
        let change = (min - prev_min).abs();
        let spread = max - min;
        trace.push(TraceEntry {
            iteration: iterations,
            min_rate: min,
            rate_spread: spread,
            change: Some(change),
        });
        prev_min = min;

        let done = match options.stopping {
            StoppingRule::MinRateChange => change < options.tolerance,
            StoppingRule::Certified => change < options.tolerance && spread <= options.tolerance,
        };
        if done {
            converged = true;
            break;
        }
    }

    Ok(SolveResult {
        method: SolveMethod::PowerIteration,
        allocation: PowerAllocation::from_trusted(power),
        fairness_rate: prev_min,
        lambda_pf: lambda,
        iterations,
        trace,
        bounds,
        converged,
    })
}

/// Geometric-mean contraction factor of a sequence of successive changes.
///
/// Uses the last half of the entries at or above `1e-14`. When that tail
/// holds more than one ratio the count is made even, so a two-step
/// oscillation (a negative subdominant eigenvalue) averages out exactly.
pub fn estimate_convergence_ratio(changes: &[f64]) -> Result<f64> {
    let usable: Vec<f64> = changes
        .iter()
        .copied()
        .filter(|c| c.is_finite() && *c >= RATIO_NOISE_FLOOR)
        .collect();
    if usable.len() < 3 {
        return Err(Error::InsufficientTrace {
            needed: 3,
            actual: usable.len(),
        });
    }
    let mut tail = &usable[usable.len() / 2..];
    if tail.len() > 2 && (tail.len() - 1) % 2 == 1 {
        tail = &tail[1..];
    }
    let steps = (tail.len() - 1) as f64;
    Ok((tail[tail.len() - 1] / tail[0]).powf(1.0 / steps))
}
