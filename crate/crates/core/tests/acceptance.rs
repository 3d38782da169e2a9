//! Acceptance criteria. Run with `cargo test --test acceptance -- --nocapture`
//! to see one PASS/FAIL line per criterion.

mod common;

use std::time::{Duration, Instant};

use common::{e2, e4, linear_fit, random_corpus, verdict};
use noma_maxmin::baselines::{grid_search_oracle, solve_bisection};
use noma_maxmin::harness::{
    fairness_indices, run_iterations_vs_tolerance, run_minrate_vs_power, DEFAULT_POWERS,
    DEFAULT_TOTAL_POWER,
};
use noma_maxmin::pf_solver::{
    apply_b_into, estimate_convergence_ratio, pf_bounds, solve_power_iteration,
};
use noma_maxmin::rate_model::noma_rates;
use noma_maxmin::scenario::REFERENCE_GAINS;
use noma_maxmin::{solve_batch, Execution, Scenario, SolveMethod, SolverOptions};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const CORPUS_SEED: u64 = 20_180_101;
const CORPUS_SIZE: usize = 1000;
const CORPUS_TOLERANCE: f64 = 1e-8;

#[test]
fn criterion_01_closed_form_two_users() {
    let s = e2();
    let opts = SolverOptions::with_tolerance(1e-12);
    let r_star = 3f64.log2();

    let start = Instant::now();
    let power = solve_power_iteration(&s, &opts).unwrap();
    let bisection = solve_bisection(&s, &opts).unwrap();
    let elapsed = start.elapsed();

    let mut worst: f64 = 0.0;
    for r in [&power, &bisection] {
        assert!(r.converged);
        worst = worst
            .max((r.lambda_pf - 0.5).abs())
            .max((r.allocation.powers()[0] - 2.0).abs())
            .max((r.allocation.powers()[1] - 8.0).abs())
            .max((r.fairness_rate - r_star).abs());
    }
    let ok = worst <= 1e-10 && elapsed < Duration::from_millis(1);
    verdict(
        1,
        "closed form on two users",
        ok,
        format!("max abs error {worst:.2e}, both solves in {elapsed:?}"),
    );
}

#[test]
fn criterion_02_cross_oracle_agreement() {
    let corpus = random_corpus(CORPUS_SIZE, CORPUS_SEED);
    let opts = SolverOptions::with_tolerance(CORPUS_TOLERANCE);

    let start = Instant::now();
    let power = solve_batch(
        &corpus,
        SolveMethod::PowerIteration,
        &opts,
        Execution::default(),
    );
    let bisection = solve_batch(&corpus, SolveMethod::Bisection, &opts, Execution::default());
    let elapsed = start.elapsed();

    let mut worst: f64 = 0.0;
    let mut violations = 0;
    for (p, b) in power.iter().zip(&bisection) {
        let gap = (p.as_ref().unwrap().fairness_rate - b.as_ref().unwrap().fairness_rate).abs();
        worst = worst.max(gap);
        violations += (gap > 2e-8) as usize;
    }
    let ok = violations == 0 && elapsed < Duration::from_secs(5);
    verdict(
        2,
        "power iteration vs bisection",
        ok,
        format!("{violations}/{CORPUS_SIZE} over 2e-8, worst gap {worst:.2e}, {elapsed:?}"),
    );
}

#[test]
fn criterion_03_brute_force_dominance() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let start = Instant::now();
    let mut failures = 0;
    let mut worst_gap: f64 = 0.0;
    for _ in 0..100 {
        let k = rng.random_range(2..=3usize);
        let s = Scenario::sample_rayleigh(k, DEFAULT_TOTAL_POWER, rng.random()).unwrap();
        let opt = solve_power_iteration(&s, &SolverOptions::with_tolerance(1e-12)).unwrap();
        let (grid, _) = grid_search_oracle(&s, 0.01).unwrap();
        let gap = opt.fairness_rate - grid;
        worst_gap = worst_gap.max(gap);
        if grid > opt.fairness_rate + 1e-9 || grid < opt.fairness_rate - 0.1 {
            failures += 1;
        }
    }
    let elapsed = start.elapsed();
    let ok = failures == 0 && elapsed < Duration::from_secs(10);
    verdict(
        3,
        "grid oracle dominance",
        ok,
        format!("{failures} failures, worst R* - grid {worst_gap:.3e}, {elapsed:?}"),
    );
}

#[test]
fn criterion_04_equal_rate_and_budget() {
    let corpus = random_corpus(CORPUS_SIZE, CORPUS_SEED);
    let opts = SolverOptions::with_tolerance(CORPUS_TOLERANCE);
    let mut worst_spread: f64 = 0.0;
    let mut worst_budget: f64 = 0.0;
    let mut checked = 0;
    for method in [SolveMethod::PowerIteration, SolveMethod::Bisection] {
        for (s, r) in corpus
            .iter()
            .zip(solve_batch(&corpus, method, &opts, Execution::default()))
        {
            let r = r.unwrap();
            if !r.converged {
                continue;
            }
            checked += 1;
            let spread = noma_rates(s, &r.allocation).unwrap().spread();
            worst_spread = worst_spread.max(spread / CORPUS_TOLERANCE);
            worst_budget =
                worst_budget.max((r.allocation.total() - s.total_power()).abs() / s.total_power());
        }
    }
    let ok = checked == 2 * CORPUS_SIZE && worst_spread <= 10.0 && worst_budget <= 1e-9;
    verdict(
        4,
        "equal rates and tight budget",
        ok,
        format!("{checked} converged solves, worst spread {worst_spread:.2}·ε, worst budget error {worst_budget:.1e}"),
    );
}

#[test]
fn criterion_05_bounds_sandwich() {
    let corpus = random_corpus(CORPUS_SIZE, CORPUS_SEED);
    let opts = SolverOptions::with_tolerance(CORPUS_TOLERANCE);
    let mut outside = 0;
    for r in solve_batch(
        &corpus,
        SolveMethod::PowerIteration,
        &opts,
        Execution::default(),
    ) {
        let r = r.unwrap();
        if !r.bounds.contains_rate(r.fairness_rate) || !r.bounds.contains_lambda(r.lambda_pf) {
            outside += 1;
        }
    }

    let mut single_gap: f64 = 0.0;
    for (g, p) in [(1.0, 10.0), (0.05, 3.0), (7.5, 0.2)] {
        let s = Scenario::new(vec![g], p).unwrap();
        let b = pf_bounds(&s);
        let exact = (p * g).ln_1p() / std::f64::consts::LN_2;
        single_gap = single_gap
            .max((b.rate_lo - exact).abs())
            .max((b.rate_hi - exact).abs());
    }
    let ok = outside == 0 && single_gap <= 1e-12;
    verdict(
        5,
        "bounds sandwich",
        ok,
        format!("{outside} instances outside bounds, K=1 bound gap {single_gap:.1e}"),
    );
}

#[test]
fn criterion_06_half_iterations() {
    let start = Instant::now();
    let table =
        run_iterations_vs_tolerance(4, 10.0, 1000, &[1e-5], 6, Execution::default()).unwrap();
    let elapsed = start.elapsed();
    let power = table.series("method", "power", "avg_iterations")[0];
    let bisection = table.series("method", "bisection", "avg_iterations")[0];
    let ratio = power / bisection;
    let ok = (0.35..=0.65).contains(&ratio) && elapsed < Duration::from_secs(10);
    verdict(
        6,
        "half iterations of bisection",
        ok,
        format!("avg {power:.3} vs {bisection:.3}, ratio {ratio:.3}, {elapsed:?}"),
    );
}

#[test]
fn criterion_07_linear_convergence() {
    let r = solve_power_iteration(&e4(), &SolverOptions::with_tolerance(1e-11)).unwrap();
    let points: Vec<(f64, f64)> = r
        .trace
        .iter()
        .filter_map(|e| {
            e.change
                .filter(|c| *c >= 1e-14)
                .map(|c| (e.iteration as f64, c.log10()))
        })
        .collect();
    let tail = &points[points.len() / 2..];
    let (x, y): (Vec<f64>, Vec<f64>) = tail.iter().copied().unzip();
    let fit = linear_fit(&x, &y);
    let fitted_ratio = 10f64.powf(fit.slope);
    let estimated = r.convergence_ratio().unwrap();
    let rel = (fitted_ratio - estimated).abs() / estimated;

    let two = solve_power_iteration(&e2(), &SolverOptions::with_tolerance(1e-10)).unwrap();
    let two_ratio = estimate_convergence_ratio(&two.changes()).unwrap();

    let ok = fit.r_squared >= 0.98 && rel <= 0.2 && (two_ratio - 0.4).abs() <= 0.05;
    verdict(
        7,
        "linear convergence",
        ok,
        format!(
            "four users: R² {:.4}, fitted ratio {fitted_ratio:.4}, estimator {estimated:.4} ({:.1}% apart); two users: ratio {two_ratio:.4}",
            fit.r_squared,
            100.0 * rel
        ),
    );
}

#[test]
fn criterion_08_scheme_orderings() {
    let t = run_minrate_vs_power(&REFERENCE_GAINS, &DEFAULT_POWERS).unwrap();
    let noma = t.series("scheme", "maxmin_noma", "min_rate");
    let oma = t.series("scheme", "maxmin_oma", "min_rate");
    let equal = t.series("scheme", "equal_noma", "min_rate");

    let dominates = noma
        .iter()
        .zip(&oma)
        .zip(&equal)
        .all(|((n, o), e)| n > o && n > e);
    let increasing = noma.windows(2).all(|w| w[1] > w[0]);
    // second differences over unevenly spaced powers: slopes must not increase
    let slopes: Vec<f64> = noma
        .windows(2)
        .zip(DEFAULT_POWERS.windows(2))
        .map(|(r, p)| (r[1] - r[0]) / (p[1] - p[0]))
        .collect();
    let concave = slopes.windows(2).all(|w| w[1] - w[0] <= 0.0);
    let second: Vec<String> = slopes
        .windows(2)
        .map(|w| format!("{:.2e}", w[1] - w[0]))
        .collect();
    let ok = dominates && increasing && concave;
    verdict(
        8,
        "min-rate orderings on the reference gains",
        ok,
        format!(
            "dominates {dominates}, increasing {increasing}, concave {concave}; maxmin NOMA {noma:.4?}; divided second differences {second:?}"
        ),
    );
}

#[test]
fn criterion_09_fairness_ratios() {
    let points: Vec<_> = DEFAULT_POWERS
        .iter()
        .map(|&p| fairness_indices(&REFERENCE_GAINS, p).unwrap())
        .collect();
    let unit = points
        .iter()
        .all(|p| (p.noma_maxmin - 1.0).abs() <= 1e-9 && (p.oma_maxmin - 1.0).abs() <= 1e-9);
    let noma: Vec<f64> = points.iter().map(|p| p.noma_ratio()).collect();
    let oma: Vec<f64> = points.iter().map(|p| p.oma_ratio()).collect();
    let noma_above = noma.iter().zip(&oma).all(|(n, o)| n > o);
    let noma_up = noma.windows(2).all(|w| w[1] > w[0]);
    let oma_down = oma.windows(2).all(|w| w[1] < w[0]);
    let ok = unit && noma_above && noma_up && oma_down;
    verdict(
        9,
        "fairness index ratios",
        ok,
        format!("max-min index 1: {unit}; NOMA ratios {noma:.4?}; OMA ratios {oma:.4?}"),
    );
}

fn apply_b_nanos(k: usize) -> f64 {
    let s = Scenario::sample_rayleigh(k, 10.0, 10).unwrap();
    let b = s.noise_terms();
    let mut x = vec![1.0 / k as f64; k];
    let mut y = vec![0.0; k];
    let reps = (2_000_000 / k).max(20);
    let mut best = f64::INFINITY;
    for _ in 0..7 {
        let start = Instant::now();
        for _ in 0..reps {
            apply_b_into(&b, std::hint::black_box(&x), &mut y);
            std::mem::swap(&mut x, &mut y);
            let norm: f64 = x.iter().sum();
            x.iter_mut().for_each(|v| *v /= norm);
        }
        best = best.min(start.elapsed().as_nanos() as f64 / reps as f64);
    }
    best
}

#[test]
fn criterion_10_complexity_scaling() {
    let small = apply_b_nanos(1_000);
    let large = apply_b_nanos(10_000);
    let growth = large / small;

    let s = e4();
    let tolerances = [1e-3, 1e-4, 1e-5, 1e-6, 1e-7, 1e-8, 1e-9];
    let (x, y): (Vec<f64>, Vec<f64>) = tolerances
        .iter()
        .map(|&eps| {
            let r = solve_power_iteration(&s, &SolverOptions::with_tolerance(eps)).unwrap();
            (-eps.log10(), r.iterations as f64)
        })
        .unzip();
    let fit = linear_fit(&x, &y);

    let ok = growth <= 20.0 && fit.r_squared >= 0.95;
    verdict(
        10,
        "complexity scaling",
        ok,
        format!(
            "operator time K=1e3 {small:.0} ns, K=1e4 {large:.0} ns (x{growth:.1}); iterations {y:?} vs -log10(ε): R² {:.4}, slope {:.2}",
            fit.r_squared, fit.slope
        ),
    );
}
