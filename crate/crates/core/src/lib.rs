//! Max-min fair power allocation for downlink power-domain NOMA.
//!
//! With users sorted by channel gain and SIC decoding, the optimal max-min
//! allocation is the Perron-Frobenius eigenvector of the positive matrix
//! `B = A + b·1ᵀ`, where `A` is the strictly lower-triangular all-ones matrix
//! and `b_k = 1 / (P_T·g_k)`. The common optimal rate is
//! `R* = log2(1 + 1/λ_pf)`.
//!
//! The crate is organised as:
//!
//! - [`scenario`]: problem instances (sorted gains and a power budget),
//!   random Rayleigh instances, JSON persistence.
//! - [`rate_model`]: NOMA/OMA achievable rates, minimum rate, Jain's index.
//! - [`pf_solver`]: the matrix-free operator, the normalized power
//!   iteration, closed-form rate, analytic eigenvalue bounds and
//!   convergence diagnostics.
//! - [`baselines`]: bisection on the target rate, equal power, OMA max-min
//!   and a brute-force grid oracle.
//! - [`harness`]: Monte-Carlo sweeps and scheme comparisons producing
//!   [`harness::ExperimentTable`]s, plus CSV emission.
//!
//! Monte-Carlo work fans out over rayon when the `parallel` feature is
//! enabled (the default); without it every sweep runs sequentially and
//! produces the identical table.
//!
//! ```
//! use noma_maxmin::{pf_solver, Scenario, SolverOptions};
//!
//! let s = Scenario::new(vec![1.0, 0.5], 10.0).unwrap();
//! let result = pf_solver::solve_power_iteration(&s, &SolverOptions::with_tolerance(1e-12)).unwrap();
//! assert!((result.lambda_pf - 0.5).abs() < 1e-10);
//! assert!((result.fairness_rate - 3f64.log2()).abs() < 1e-10);
//! ```

pub mod baselines;
pub mod error;
pub mod exec;
pub mod harness;
pub mod pf_solver;
pub mod rate_model;
pub mod scenario;

pub use error::{Error, Result};
pub use exec::Execution;
pub use pf_solver::{PfBounds, SolveMethod, SolveResult, SolverOptions, StoppingRule, TraceEntry};
pub use rate_model::{PowerAllocation, RateVector};
pub use scenario::Scenario;

/// Solves one scenario with the chosen method.
pub fn solve(s: &Scenario, method: SolveMethod, options: &SolverOptions) -> Result<SolveResult> {
    match method {
        SolveMethod::PowerIteration => pf_solver::solve_power_iteration(s, options),
        SolveMethod::Bisection => baselines::solve_bisection(s, options),
    }
}

/// Solves every scenario, returning results in input order.
pub fn solve_batch(
    scenarios: &[Scenario],
    method: SolveMethod,
    options: &SolverOptions,
    exec: Execution,
) -> Vec<Result<SolveResult>> {
    exec.map_slice(scenarios, |s| solve(s, method, options))
}
