//! Reference solvers and comparison schemes.

use crate::error::{Error, Result};
use crate::pf_solver::{
    lambda_from_rate, pf_bounds, SolveMethod, SolveResult, SolverOptions, TraceEntry,
};
use crate::rate_model::{noma_rate_range, PowerAllocation};
use crate::scenario::Scenario;

/// Largest user count accepted by [`grid_search_oracle`].
pub const GRID_MAX_USERS: usize = 4;

/// Minimal powers giving every user rate `target_rate`, and their sum.
///
/// With `c = 2^t − 1`, equal rates force `P_1 = c/g_1` and
/// `P_k = c·(Σ_{j<k} P_j + 1/g_k)`. The sum is continuous and strictly
/// increasing in `t`, so `t` is achievable within the budget iff the sum
/// is at most `P_T`.
pub fn min_total_power_for_rate(s: &Scenario, target_rate: f64) -> Result<(f64, Vec<f64>)> {
    if !target_rate.is_finite() || target_rate < 0.0 {
        return Err(Error::InvalidParameter(format!(
            "target rate must be finite and non-negative, got {target_rate}"
        )));
    }
    let mut powers = vec![0.0; s.num_users()];
    let total = stack_powers(s.gains(), target_rate, &mut powers);
    Ok((total, powers))
}

fn stack_powers(gains: &[f64], rate: f64, out: &mut [f64]) -> f64 {
    let c = (rate * std::f64::consts::LN_2).exp_m1();
    let mut total = 0.0;
    for (p, g) in out.iter_mut().zip(gains) {
        *p = c * (total + 1.0 / g);
        total += *p;
    }
    total
}

/// Bisection on the common rate over `[0, rate_hi]`, where `rate_hi` is the
/// analytic upper bound from [`pf_bounds`].
///
/// Each halving runs the O(K) feasibility recursion of
/// [`min_total_power_for_rate`]. Stops once the bracket is narrower than
/// the tolerance and reports its midpoint, with the recursion's powers at
/// that rate rescaled to the full budget.
pub fn solve_bisection(s: &Scenario, options: &SolverOptions) -> Result<SolveResult> {
    options.validate()?;
    let bounds = pf_bounds(s);
    let total_power = s.total_power();
    let gains = s.gains();

    if s.num_users() == 1 {
        let rate = bounds.rate_hi;
        return Ok(SolveResult {
            method: SolveMethod::Bisection,
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

    let mut buf = vec![0.0; s.num_users()];
    let mut lo = 0.0;
    let mut hi = bounds.rate_hi;
    let mut trace = Vec::with_capacity(64);
    let mut prev: Option<f64> = None;
    let mut iterations = 0;
    while hi - lo >= options.tolerance {
        iterations += 1;
        let mid = 0.5 * (lo + hi);
        let needed = stack_powers(gains, mid, &mut buf);
        if needed <= total_power {
            lo = mid;
        } else {
            hi = mid;
        }
        let spread = rescaled_spread(gains, &mut buf, needed, total_power);
        trace.push(TraceEntry {
            iteration: iterations,
            min_rate: mid,
            rate_spread: spread,
            change: prev.map(|p| (mid - p).abs()),
        });
        prev = Some(mid);
    }

    let rate = 0.5 * (lo + hi);
    let needed = stack_powers(gains, rate, &mut buf);
    let scale = total_power / needed;
    let powers = buf.iter().map(|p| p * scale).collect();

    Ok(SolveResult {
        method: SolveMethod::Bisection,
        allocation: PowerAllocation::from_trusted(powers),
        fairness_rate: rate,
        lambda_pf: lambda_from_rate(rate),
        iterations,
        trace,
        bounds,
        converged: true,
    })
}

fn rescaled_spread(gains: &[f64], powers: &mut [f64], sum: f64, budget: f64) -> f64 {
    let scale = budget / sum;
    powers.iter_mut().for_each(|p| *p *= scale);
    let (min, max) = noma_rate_range(gains, powers);
    max - min
}

/// `P_T/K` to every user.
pub fn equal_power(s: &Scenario) -> PowerAllocation {
    let k = s.num_users();
    PowerAllocation::from_trusted(vec![s.total_power() / k as f64; k])
}

/// Max-min allocation under the equal-bandwidth FDMA model.
///
/// Equal OMA rates `t` at full budget need `K·P_k·g_k = 2^{Kt} − 1` for
/// every user, so `P_k ∝ 1/g_k` and
/// `t = (1/K)·log2(1 + K·P_T / Σ 1/g_k)`.
pub fn solve_oma_maxmin(s: &Scenario) -> (f64, PowerAllocation) {
    let k = s.num_users() as f64;
    let inv_sum: f64 = s.gains().iter().map(|g| 1.0 / g).sum();
    let rate = (k * s.total_power() / inv_sum).ln_1p() / (k * std::f64::consts::LN_2);
    let powers = s
        .gains()
        .iter()
        .map(|g| s.total_power() / (g * inv_sum))
        .collect();
    (rate, PowerAllocation::from_trusted(powers))
}

/// Exhaustive search over budget-tight allocations whose entries are
/// multiples of `resolution·P_T`. Limited to four users.
pub fn grid_search_oracle(s: &Scenario, resolution: f64) -> Result<(f64, PowerAllocation)> {
    let k = s.num_users();
    if k > GRID_MAX_USERS {
        return Err(Error::TooManyUsers {
            max: GRID_MAX_USERS,
            actual: k,
        });
    }
    if !resolution.is_finite() || resolution <= 0.0 || resolution > 1.0 {
        return Err(Error::InvalidParameter(format!(
            "grid resolution must lie in (0, 1], got {resolution}"
        )));
    }
    let steps = (1.0 / resolution).round().max(1.0) as usize;
    let unit = s.total_power() / steps as f64;

    let mut counts = vec![0usize; k];
    let mut powers = vec![0.0; k];
    let mut best = (f64::NEG_INFINITY, powers.clone());
    enumerate_compositions(&mut counts, 0, steps, &mut |c| {
        for (p, n) in powers.iter_mut().zip(c) {
            *p = *n as f64 * unit;
        }
        let (min, _) = noma_rate_range(s.gains(), &powers);
        if min > best.0 {
            best = (min, powers.clone());
        }
    });
    Ok((best.0, PowerAllocation::from_trusted(best.1)))
}

fn enumerate_compositions(
    counts: &mut [usize],
    pos: usize,
    remaining: usize,
    visit: &mut impl FnMut(&[usize]),
) {
    if pos == counts.len() - 1 {
        counts[pos] = remaining;
        visit(counts);
        return;
    }
    for n in 0..=remaining {
        counts[pos] = n;
        enumerate_compositions(counts, pos + 1, remaining - n, visit);
    }
}
