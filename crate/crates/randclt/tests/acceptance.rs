//! Acceptance suite: one PASS/FAIL line per criterion, tolerances pinned
//! below. Runs without the libtest harness so the lines always print.

use std::process::{Command, ExitCode};
use std::time::{Duration, Instant};

use randclt::exec::Parallel;
use randclt_core::distance::{
    l2_dist_sq, omega_sq_by_plancherel, sphere_samples, summarize, target_law, theta_for, theta_law, InnerBudget,
    Metric, MixtureBudget, Target, ThetaDistances,
};
use randclt_core::expansions::{
    chain_audit, cor51_prediction, edgeworth_gap, kantorovich_rho_audit, min_square_integral, omega_rho_audit, psi_r,
    psi_r_quadrature, rho_lower_sphere, sandwich_violation,
};
use randclt_core::moments::{
    inner_moment, moment_ratio_sides, sigma3_lacunary_count, sigma_2p, triple_count, xi_functionals, Budget,
    TripleConvention,
};
use randclt_core::quadrature::{integrate, QuadConfig};
use randclt_core::sphere::{jn, theta1_abs_moment, theta1_density};
use randclt_core::systems::System;

const SEED: u64 = 20240601;

const TOL_J3: f64 = 1e-10;
const TOL_DENSITY: f64 = 1e-10;
const RATE_BAND: (f64, f64) = (0.15, 0.40);
const WALSH_M3: f64 = 42.0;
const WALSH_M4: f64 = 301.0;
const WALSH_MC_SIGMAS: f64 = 4.0;
const EMPIRICAL_SIGMAS: f64 = 3.0;
const EMPIRICAL_N_THETA: usize = 4000;
const COR51_SIGMAS: f64 = 3.0;
const COR51_N_THETA: usize = 2000;
const SIGMA4_SIGMAS: f64 = 3.0;
const SIGMA4_SAMPLES: usize = 100_000;
const FIBONACCI_RATIO: f64 = 2.0;
const TWO_SIDED_BAND: f64 = 3.0;
const TWO_SIDED_N_THETA: usize = 2000;
const RHO_LOWER_BAND: f64 = 2.0;
const TOL_QUADRATURE: f64 = 1e-8;
const SANDWICH_POINTS: usize = 10_000;
const AUDIT_N_THETA: usize = 1000;
const CHAIN_TOL: f64 = 1e-10;
const PLANCHEREL_GRID: usize = 4096;
const PLANCHEREL_T: f64 = 200.0;
const TOL_PLANCHEREL: f64 = 1e-3;

/// Criteria whose stated value contradicts the implemented definition; they
/// must print FAIL with the reason, and the suite fails if they start passing
/// without this list being revisited.
const KNOWN_UNATTAINABLE: &[&str] = &["8a"];

struct Outcome {
    id: &'static str,
    pass: bool,
    detail: String,
    elapsed: Duration,
    budget: Duration,
}

struct Suite {
    exec: Parallel,
    outcomes: Vec<Outcome>,
    chain_samples: Vec<ThetaDistances>,
}

impl Suite {
    fn record(&mut self, id: &'static str, budget_secs: u64, start: Instant, (pass, detail): (bool, String)) {
        let elapsed = start.elapsed();
        let budget = Duration::from_secs(budget_secs);
        let outcome = Outcome { id, pass: pass && elapsed <= budget, detail, elapsed, budget };
        println!(
            "criterion {:>3}: {} ({}; {:.2}s of {}s)",
            outcome.id,
            if outcome.pass { "PASS" } else { "FAIL" },
            outcome.detail,
            outcome.elapsed.as_secs_f64(),
            outcome.budget.as_secs()
        );
        self.outcomes.push(outcome);
    }
}

fn c1() -> (bool, String) {
    let mut worst = 0.0f64;
    for i in 1..=100 {
        let s = 0.1 * i as f64;
        worst = worst.max((jn(3, s).unwrap() - s.sin() / s).abs());
    }
    (worst <= TOL_J3, format!("max |J_3(s) - sin s / s| = {worst:.2e}"))
}

fn c2() -> (bool, String) {
    let cfg = QuadConfig::default().with_abs_tol(1e-13).with_rel_tol(1e-13);
    let half_pi = std::f64::consts::FRAC_PI_2;
    let mut worst_mass = 0.0f64;
    let mut worst_ratio = 0.0f64;
    for n in [2usize, 3, 5, 10, 50] {
        // x = sin v removes the endpoint singularity at n = 2.
        let mass = integrate(|v| theta1_density(n, v.sin()).unwrap() * v.cos(), -half_pi, half_pi, &cfg).unwrap().value;
        worst_mass = worst_mass.max((mass - 1.0).abs());
        for p in 1..=8 {
            let p = p as f64;
            let bound = 2.0 * (p / n as f64).powf(p / 2.0);
            worst_ratio = worst_ratio.max(theta1_abs_moment(n, p).unwrap() / bound);
        }
    }
    (
        worst_mass <= TOL_DENSITY && worst_ratio <= 1.0,
        format!("max |mass - 1| = {worst_mass:.2e}, max moment / bound = {worst_ratio:.3}"),
    )
}

fn c3() -> (bool, String) {
    let gap = |n| edgeworth_gap(n, 3.0, 600).unwrap();
    let mut ratios = Vec::new();
    for n in [50usize, 100, 200] {
        ratios.push(gap(2 * n) / gap(n));
    }
    let pass = ratios.iter().all(|r| (RATE_BAND.0..=RATE_BAND.1).contains(r));
    (pass, format!("e_2n / e_n = {ratios:.4?}"))
}

fn c4(exec: &Parallel) -> (bool, String) {
    let w = System::walsh(3).unwrap();
    let m3 = inner_moment(&w, 3, Budget::Exact, exec).unwrap().value;
    let m4 = inner_moment(&w, 4, Budget::Exact, exec).unwrap().value;
    let mc = Budget::MonteCarlo { samples: 100_000, seed: SEED };
    let e3 = inner_moment(&w, 3, mc, exec).unwrap();
    let e4 = inner_moment(&w, 4, mc, exec).unwrap();
    let z3 = (e3.value - WALSH_M3).abs() / e3.stderr;
    let z4 = (e4.value - WALSH_M4).abs() / e4.stderr;
    let pass = m3 == WALSH_M3 && m4 == WALSH_M4 && z3 <= WALSH_MC_SIGMAS && z4 <= WALSH_MC_SIGMAS;
    (pass, format!("exact {m3}, {m4}; MC z-scores {z3:.2}, {z4:.2}"))
}

fn c5(suite: &mut Suite) -> (bool, String) {
    let constant = 7.0 / (8.0 * std::f64::consts::PI.sqrt());
    let mut pass = true;
    let mut parts = Vec::new();
    for n in [32usize, 64] {
        let s = System::empirical(n).unwrap();
        let law = target_law(&s, Target::Normal, MixtureBudget::default()).unwrap();
        let samples = sphere_samples(&s, &law, EMPIRICAL_N_THETA, &InnerBudget::default(), SEED, &suite.exec).unwrap();
        let (mean, se) = summarize(&samples, Metric::OmegaSq);
        let nf = n as f64;
        let band = EMPIRICAL_SIGMAS * nf * se + 2.0 / nf;
        pass &= (nf * mean - constant).abs() <= band;
        parts.push(format!("n={n}: n*E = {:.4} vs {constant:.4} +- {band:.4}", nf * mean));
        suite.chain_samples.extend(samples);
    }
    (pass, parts.join("; "))
}

fn c6(suite: &mut Suite) -> (bool, String) {
    let w = System::walsh(4).unwrap();
    let n = w.n() as f64;
    let xi = xi_functionals(&w, Budget::Exact, &suite.exec).unwrap();
    let p = cor51_prediction(&w, &xi).unwrap();
    let law = target_law(&w, Target::Typical, MixtureBudget::default()).unwrap();
    let samples = sphere_samples(&w, &law, COR51_N_THETA, &InnerBudget::default(), SEED, &suite.exec).unwrap();
    let (mean, se) = summarize(&samples, Metric::OmegaSq);
    suite.chain_samples.extend(samples);
    let band = COR51_SIGMAS * se + 2.0 / (n * n);
    let diff = (mean - p.main_value).abs();
    (
        diff <= band,
        format!("measured {mean:.6e} +- {se:.1e}, predicted {:.6e}, |diff| {diff:.2e} <= {band:.2e}", p.main_value),
    )
}

fn c7(exec: &Parallel) -> (bool, String) {
    let target = 0.5f64.sqrt();
    let mut pass = true;
    let mut parts = Vec::new();
    for s in [System::cosine(16).unwrap(), System::chebyshev(16).unwrap()] {
        let e = sigma_2p(&s, 2.0, SIGMA4_SAMPLES, SEED, exec).unwrap();
        let z = (e.value - target).abs() / e.stderr;
        pass &= z <= SIGMA4_SIGMAS;
        parts.push(format!("{} {:.4} (z {z:.2})", s.name(), e.value));
    }
    for s in [System::trig(16).unwrap(), System::walsh(4).unwrap(), System::empirical(16).unwrap()] {
        let e = sigma_2p(&s, 2.0, SIGMA4_SAMPLES, SEED, exec).unwrap();
        pass &= e.value == 0.0 && e.stderr == 0.0;
    }
    parts.push("fixed-norm systems exactly 0".into());
    (pass, parts.join("; "))
}

fn c8a() -> (bool, String) {
    let mut worst = 0u64;
    let mut strict = 0u64;
    for count in 1..=20usize {
        let freqs: Vec<u64> = (1..=count as u32).map(|k| 1u64 << k).collect();
        worst = worst.max(sigma3_lacunary_count(&freqs).unwrap());
        strict = strict.max(triple_count(&freqs, TripleConvention::Strict).unwrap());
    }
    (
        worst == 0,
        format!(
            "max Sigma_3 over 2^k, n <= 20, is {worst} under i1 <= i2 < i3 (2^k + 2^k = 2^(k+1)); \
             the strict count is {strict}"
        ),
    )
}

fn c8b() -> (bool, String) {
    let mut fib = vec![1u64, 2];
    while fib.len() < 30 {
        let k = fib.len();
        fib.push(fib[k - 1] + fib[k - 2]);
    }
    let mut worst = 0.0f64;
    for n in 1..=30 {
        worst = worst.max(sigma3_lacunary_count(&fib[..n]).unwrap() as f64 / n as f64);
    }
    (worst <= FIBONACCI_RATIO, format!("max Sigma_3 / n over Fibonacci, n <= 30: {worst:.3}"))
}

fn c9(suite: &mut Suite) -> (bool, String) {
    let mut values = Vec::new();
    for n in [8usize, 16, 32, 64] {
        let s = System::trig(n).unwrap();
        let law = target_law(&s, Target::Normal, MixtureBudget::default()).unwrap();
        let samples = sphere_samples(&s, &law, TWO_SIDED_N_THETA, &InnerBudget::default(), SEED, &suite.exec).unwrap();
        values.push(n as f64 * summarize(&samples, Metric::OmegaSq).0);
        suite.chain_samples.extend(samples);
    }
    let lo = values.iter().cloned().fold(f64::INFINITY, f64::min);
    let hi = values.iter().cloned().fold(0.0, f64::max);
    (lo > 0.0 && hi / lo <= TWO_SIDED_BAND, format!("n*E omega^2 = {values:.4?}, max/min {:.3}", hi / lo))
}

fn c10() -> (bool, String) {
    let values: Vec<f64> =
        [20usize, 40, 80, 160].iter().map(|&n| n as f64 * rho_lower_sphere(n, 1.0).unwrap().value).collect();
    let lo = values.iter().cloned().fold(f64::INFINITY, f64::min);
    let hi = values.iter().cloned().fold(0.0, f64::max);
    (lo > 0.0 && hi / lo <= RHO_LOWER_BAND, format!("n * lower bound = {values:.5?}, max/min {:.3}", hi / lo))
}

fn c11() -> (bool, String) {
    let mut worst_min = 0.0f64;
    for eta in [0.1, 1.0, 7.0] {
        worst_min = worst_min.max((min_square_integral(eta).unwrap() - 4.0 * eta).abs());
    }
    let mut worst_psi = 0.0f64;
    for i in 0..=19 {
        let alpha = 0.1 + 0.1 * i as f64;
        for j in 0..=8 {
            let r = -0.2 + 0.05 * j as f64;
            worst_psi = worst_psi.max((psi_r_quadrature(alpha, r).unwrap() - psi_r(alpha, r).unwrap()).abs());
        }
    }
    let violation = sandwich_violation(SANDWICH_POINTS);
    (
        worst_min <= TOL_QUADRATURE && worst_psi <= TOL_QUADRATURE && violation.is_none(),
        format!("min-square {worst_min:.1e}, psi_r {worst_psi:.1e}, sandwich violation {violation:?}"),
    )
}

fn c12(suite: &mut Suite) -> (bool, String) {
    let mut pass = true;
    let mut parts = Vec::new();
    for s in [System::walsh(4).unwrap(), System::empirical(32).unwrap()] {
        let n = s.n();
        let b = s.flags().norm_bound;
        let law = target_law(&s, Target::Typical, MixtureBudget::default()).unwrap();
        let samples = sphere_samples(&s, &law, AUDIT_N_THETA, &InnerBudget::default(), SEED, &suite.exec).unwrap();
        let a = omega_rho_audit(&samples, n, b).unwrap();
        let k = kantorovich_rho_audit(&samples, n, b).unwrap();
        pass &= a.satisfied && k.satisfied;
        parts.push(format!(
            "{} n={n}: omega-rho {:.2e} <= {:.2e}, W-rho {:.2e} <= {:.2e}",
            s.name(),
            a.lhs,
            a.rhs,
            k.lhs,
            k.rhs
        ));
        suite.chain_samples.extend(samples);
    }
    let mut ratio_ok = true;
    for chunk in suite.chain_samples.chunks(AUDIT_N_THETA) {
        let w: Vec<f64> = chunk.iter().map(|d| d.omega_sq).collect();
        let (mean, ratio) = moment_ratio_sides(&w).unwrap();
        ratio_ok &= ratio <= mean * (1.0 + 1e-12);
    }
    let chain = chain_audit(&suite.chain_samples, CHAIN_TOL);
    pass &= ratio_ok && chain.satisfied;
    parts.push(format!(
        "moment ratio on every sample set {ratio_ok}; chain over {} theta: max excess {:.1e}",
        suite.chain_samples.len(),
        chain.lhs
    ));
    (pass, parts.join("; "))
}

fn c13() -> (bool, String) {
    let s = System::trig(8).unwrap();
    let f = target_law(&s, Target::Typical, MixtureBudget::default()).unwrap();
    let theta = theta_for(8, SEED, 0).unwrap();
    let direct = l2_dist_sq(&theta_law(&s, &theta, &InnerBudget::default()).unwrap().cdf, &f).unwrap();
    let values = s.project_on_grid(theta.coords(), PLANCHEREL_GRID).unwrap().values;
    let cf = omega_sq_by_plancherel(&values, &f, PLANCHEREL_T).unwrap();
    let diff = (direct - cf.value).abs();
    (diff <= TOL_PLANCHEREL, format!("CDF {direct:.6e}, CF {:.6e}, |diff| {diff:.1e}", cf.value))
}

fn c14() -> (bool, String) {
    let run = |threads: &str| {
        let out = Command::new(env!("CARGO_BIN_EXE_randclt"))
            .args(["--seed", "11", "--threads", threads, "--format", "csv", "table", "--preset", "walsh"])
            .output()
            .expect("spawn randclt");
        assert!(out.status.success(), "{}", String::from_utf8_lossy(&out.stderr));
        out.stdout
    };
    let one = run("1");
    let two = run("2");
    (
        one == two && !one.is_empty(),
        format!("walsh preset, threads 1 vs 2: {} bytes, identical {}", one.len(), one == two),
    )
}

fn main() -> ExitCode {
    let mut suite =
        Suite { exec: Parallel::new(None).expect("thread pool"), outcomes: Vec::new(), chain_samples: Vec::new() };
    let t = Instant::now();
    suite.record("1", 1, t, c1());
    let t = Instant::now();
    suite.record("2", 5, t, c2());
    let t = Instant::now();
    suite.record("3", 30, t, c3());
    let t = Instant::now();
    let r = c4(&suite.exec);
    suite.record("4", 10, t, r);
    let t = Instant::now();
    let r = c5(&mut suite);
    suite.record("5", 60, t, r);
    let t = Instant::now();
    let r = c6(&mut suite);
    suite.record("6", 120, t, r);
    let t = Instant::now();
    let r = c7(&suite.exec);
    suite.record("7", 30, t, r);
    let t = Instant::now();
    let a = c8a();
    let b = c8b();
    suite.record("8a", 1, t, a);
    suite.record("8b", 1, t, b);
    let t = Instant::now();
    let r = c9(&mut suite);
    suite.record("9", 300, t, r);
    let t = Instant::now();
    suite.record("10", 10, t, c10());
    let t = Instant::now();
    suite.record("11", 10, t, c11());
    let t = Instant::now();
    let r = c12(&mut suite);
    suite.record("12", 120, t, r);
    let t = Instant::now();
    suite.record("13", 30, t, c13());
    let t = Instant::now();
    suite.record("14", 300, t, c14());

    let mut ok = true;
    for o in &suite.outcomes {
        let known = KNOWN_UNATTAINABLE.contains(&o.id);
        if known && o.pass {
            println!("criterion {} passed but is listed as unattainable", o.id);
            ok = false;
        }
        if !known && !o.pass {
            ok = false;
        }
    }
    let passed = suite.outcomes.iter().filter(|o| o.pass).count();
    println!("acceptance: {passed}/{} criteria pass; known unattainable: {KNOWN_UNATTAINABLE:?}", suite.outcomes.len());
    if ok {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
