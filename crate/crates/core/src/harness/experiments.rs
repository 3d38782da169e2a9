//! Experiment drivers behind the CLI.
//!
//! Monte-Carlo sweeps draw trial `i` from the seed `seed + i`, so each trial
//! owns its RNG stream and the table is the same whichever [`Execution`]
//! runs it. Averages are reduced in trial order.

use crate::baselines::{equal_power, solve_bisection, solve_oma_maxmin};
use crate::error::{Error, Result};
use crate::exec::Execution;
use crate::harness::table::ExperimentTable;
use crate::pf_solver::{solve_power_iteration, SolveMethod, SolverOptions};
use crate::rate_model::{noma_rates, oma_rates};
use crate::scenario::Scenario;

/// Tolerance used for reference solutions (`R*` in error traces and the
/// max-min curves of the scheme comparisons).
pub const REFERENCE_TOLERANCE: f64 = 1e-12;

pub const DEFAULT_USERS: usize = 4;
pub const DEFAULT_TOTAL_POWER: f64 = 10.0;
pub const DEFAULT_TRIALS: usize = 1000;
pub const DEFAULT_TOLERANCES: [f64; 6] = [1e-2, 1e-3, 1e-4, 1e-5, 1e-6, 1e-7];
pub const DEFAULT_POWERS: [f64; 5] = [2.0, 5.0, 10.0, 20.0, 40.0];

const METHODS: [SolveMethod; 2] = [SolveMethod::PowerIteration, SolveMethod::Bisection];

/// Seed of Monte-Carlo trial `trial`.
pub fn trial_seed(base: u64, trial: usize) -> u64 {
    base.wrapping_add(trial as u64)
}

fn list(values: &[f64]) -> String {
    values
        .iter()
        .map(|v| format!("{v:?}"))
        .collect::<Vec<_>>()
        .join(",")
}

/// Per-iteration minimum rate of both methods and its distance to `R*`.
///
/// Columns: `iteration, method, R_min, abs_error_vs_Rstar`. `R*` comes from
/// the power iteration at [`REFERENCE_TOLERANCE`].
pub fn run_convergence_trace(s: &Scenario, tolerance: f64) -> Result<ExperimentTable> {
    let reference = solve_power_iteration(s, &SolverOptions::with_tolerance(REFERENCE_TOLERANCE))?;
    let r_star = reference.fairness_rate;
    let options = SolverOptions::with_tolerance(tolerance);

    let mut table = ExperimentTable::new(["iteration", "method", "R_min", "abs_error_vs_Rstar"]);
    table.set_meta("experiment", "convergence_trace");
    table.set_meta("tolerance", format!("{tolerance:?}"));
    table.set_meta("total_power", format!("{:?}", s.total_power()));
    table.set_meta("gains", list(s.gains()));
    table.set_meta("r_star", format!("{r_star:?}"));

    for method in METHODS {
        let result = crate::solve(s, method, &options)?;
        for entry in &result.trace {
            table.push_row(vec![
                entry.iteration.into(),
                method.name().into(),
                entry.min_rate.into(),
                (entry.min_rate - r_star).abs().into(),
            ])?;
        }
    }
    Ok(table)
}

fn average_iterations(
    scenarios: impl Fn(usize) -> Result<Vec<Scenario>> + Sync + Send,
    trials: usize,
    tolerances: &[f64],
    exec: Execution,
) -> Result<Vec<[f64; 2]>> {
    // per trial: per (scenario, tolerance) pair, iterations of each method
    let per_trial: Vec<Result<Vec<[usize; 2]>>> = exec.map_indexed(trials, |trial| {
        let mut counts = Vec::new();
        for s in scenarios(trial)? {
            for &tol in tolerances {
                let options = SolverOptions::with_tolerance(tol);
                let p = solve_power_iteration(&s, &options)?.iterations;
                let b = solve_bisection(&s, &options)?.iterations;
                counts.push([p, b]);
            }
        }
        Ok(counts)
    });

    let mut totals: Vec<[usize; 2]> = Vec::new();
    for counts in per_trial {
        let counts = counts?;
        if totals.is_empty() {
            totals = vec![[0, 0]; counts.len()];
        }
        for (t, c) in totals.iter_mut().zip(&counts) {
            t[0] += c[0];
            t[1] += c[1];
        }
    }
    Ok(totals
        .iter()
        .map(|t| [t[0] as f64 / trials as f64, t[1] as f64 / trials as f64])
        .collect())
}

fn check_sweep(trials: usize, values: &[f64], what: &str) -> Result<()> {
    if trials == 0 {
        return Err(Error::InvalidParameter("trials must be at least 1".into()));
    }
    if values.is_empty() {
        return Err(Error::InvalidParameter(format!("{what} list is empty")));
    }
    if let Some(v) = values.iter().find(|v| !v.is_finite() || **v <= 0.0) {
        return Err(Error::InvalidParameter(format!(
            "{what} values must be positive, got {v}"
        )));
    }
    Ok(())
}

/// Average iteration count of both methods per tolerance over random
/// Rayleigh instances. Columns: `tolerance, method, avg_iterations`.
pub fn run_iterations_vs_tolerance(
    num_users: usize,
    total_power: f64,
    trials: usize,
    tolerances: &[f64],
    seed: u64,
    exec: Execution,
) -> Result<ExperimentTable> {
    check_sweep(trials, tolerances, "tolerance")?;
    Scenario::sample_rayleigh(num_users, total_power, seed)?;

    let averages = average_iterations(
        |trial| {
            Ok(vec![Scenario::sample_rayleigh(
                num_users,
                total_power,
                trial_seed(seed, trial),
            )?])
        },
        trials,
        tolerances,
        exec,
    )?;

    let mut table = ExperimentTable::new(["tolerance", "method", "avg_iterations"]);
    table.set_meta("experiment", "iterations_vs_tolerance");
    table.set_meta("seed", seed);
    table.set_meta("users", num_users);
    table.set_meta("total_power", format!("{total_power:?}"));
    table.set_meta("trials", trials);
    for (tol, avg) in tolerances.iter().zip(&averages) {
        for (method, value) in METHODS.iter().zip(avg) {
            table.push_row(vec![(*tol).into(), method.name().into(), (*value).into()])?;
        }
    }
    Ok(table)
}

/// Average iteration count of both methods per total power. Each trial
/// keeps its channel draw across the power sweep. Columns:
/// `total_power, method, avg_iterations`.
pub fn run_iterations_vs_power(
    num_users: usize,
    tolerance: f64,
    trials: usize,
    powers: &[f64],
    seed: u64,
    exec: Execution,
) -> Result<ExperimentTable> {
    check_sweep(trials, powers, "power")?;
    SolverOptions::with_tolerance(tolerance).validate()?;
    Scenario::sample_rayleigh(num_users, 1.0, seed)?;

    let averages = average_iterations(
        |trial| {
            let base = Scenario::sample_rayleigh(num_users, 1.0, trial_seed(seed, trial))?;
            powers.iter().map(|&p| base.with_total_power(p)).collect()
        },
        trials,
        &[tolerance],
        exec,
    )?;

    let mut table = ExperimentTable::new(["total_power", "method", "avg_iterations"]);
    table.set_meta("experiment", "iterations_vs_power");
    table.set_meta("seed", seed);
    table.set_meta("users", num_users);
    table.set_meta("tolerance", format!("{tolerance:?}"));
    table.set_meta("trials", trials);
    for (power, avg) in powers.iter().zip(&averages) {
        for (method, value) in METHODS.iter().zip(avg) {
            table.push_row(vec![(*power).into(), method.name().into(), (*value).into()])?;
        }
    }
    Ok(table)
}

/// Scheme names used by [`run_minrate_vs_power`].
pub const SCHEMES: [&str; 4] = ["maxmin_noma", "maxmin_oma", "equal_noma", "equal_oma"];

/// Minimum user rate of each scheme over a power sweep on fixed gains.
/// Columns: `total_power, scheme, min_rate`.
pub fn run_minrate_vs_power(gains: &[f64], powers: &[f64]) -> Result<ExperimentTable> {
    check_sweep(1, powers, "power")?;
    let mut table = ExperimentTable::new(["total_power", "scheme", "min_rate"]);
    table.set_meta("experiment", "minrate_vs_power");
    table.set_meta("gains", list(gains));

    for &power in powers {
        let s = Scenario::new(gains.to_vec(), power)?;
        let maxmin =
            solve_power_iteration(&s, &SolverOptions::with_tolerance(REFERENCE_TOLERANCE))?;
        let equal = equal_power(&s);
        let values = [
            maxmin.fairness_rate,
            solve_oma_maxmin(&s).0,
            noma_rates(&s, &equal)?.min_rate(),
            oma_rates(&s, &equal)?.min_rate(),
        ];
        for (scheme, value) in SCHEMES.iter().zip(values) {
            table.push_row(vec![power.into(), (*scheme).into(), value.into()])?;
        }
    }
    Ok(table)
}

/// Jain's index of the max-min allocation of each system together with
/// the index of equal power.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FairnessPoint {
    pub total_power: f64,
    pub noma_maxmin: f64,
    pub noma_equal: f64,
    pub oma_maxmin: f64,
    pub oma_equal: f64,
}

impl FairnessPoint {
    pub fn noma_ratio(&self) -> f64 {
        self.noma_maxmin / self.noma_equal
    }

    pub fn oma_ratio(&self) -> f64 {
        self.oma_maxmin / self.oma_equal
    }
}

pub fn fairness_indices(gains: &[f64], power: f64) -> Result<FairnessPoint> {
    let s = Scenario::new(gains.to_vec(), power)?;
    let maxmin = solve_power_iteration(&s, &SolverOptions::with_tolerance(REFERENCE_TOLERANCE))?;
    let (_, oma_alloc) = solve_oma_maxmin(&s);
    let equal = equal_power(&s);
    Ok(FairnessPoint {
        total_power: power,
        noma_maxmin: noma_rates(&s, &maxmin.allocation)?.jain_index()?,
        noma_equal: noma_rates(&s, &equal)?.jain_index()?,
        oma_maxmin: oma_rates(&s, &oma_alloc)?.jain_index()?,
        oma_equal: oma_rates(&s, &equal)?.jain_index()?,
    })
}

/// Ratio of Jain's index under max-min to that under equal power, per
/// system. Columns: `total_power, system, index_ratio`.
pub fn run_fairness_ratio_vs_power(gains: &[f64], powers: &[f64]) -> Result<ExperimentTable> {
    check_sweep(1, powers, "power")?;
    let mut table = ExperimentTable::new(["total_power", "system", "index_ratio"]);
    table.set_meta("experiment", "fairness_ratio_vs_power");
    table.set_meta("gains", list(gains));
    for &power in powers {
        let point = fairness_indices(gains, power)?;
        table.push_row(vec![power.into(), "noma".into(), point.noma_ratio().into()])?;
        table.push_row(vec![power.into(), "oma".into(), point.oma_ratio().into()])?;
    }
    Ok(table)
}
