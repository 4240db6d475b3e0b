//! Acceptance suite: one PASS/FAIL line per criterion, nonzero exit on any
//! failure. Run with `cargo test -p pde-consensus --test acceptance`.

use std::process::ExitCode;
use std::time::{Duration, Instant};

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use proptest::prelude::*;
use proptest::test_runner::{Config, TestRunner};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use pde_consensus::analysis::{alpha_power_chain, beta_power_chain, wirtinger_sides};
use pde_consensus::{
    bound_for, builtin, lambda2, lambda_omega, simulate, BalanceWeights, CommGraph, RunResult,
    Scenario, SpatialGrid,
};

const BOUND_TIME_LIMIT: Duration = Duration::from_secs(1);
const RUN_TIME_LIMIT: Duration = Duration::from_secs(60);
const PROPERTY_CASES: u32 = 256;

type Outcome = Result<String, String>;
type TimedRun = Result<(RunResult, Duration), String>;

struct Suite {
    failures: usize,
}

impl Suite {
    fn check(&mut self, id: u32, title: &str, f: impl FnOnce() -> Outcome) {
        let (tag, detail) = match f() {
            Ok(d) => ("PASS", d),
            Err(d) => {
                self.failures += 1;
                ("FAIL", d)
            }
        };
        println!("{tag} [{id:>2}] {title}: {detail}");
    }
}

fn ensure(ok: bool, detail: String) -> Outcome {
    if ok {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn bound_of(name: &str, cells: usize) -> Result<(f64, Duration), String> {
    let start = Instant::now();
    let mut s = builtin(name).map_err(|e| e.to_string())?;
    s.grid.cells = cells;
    let exp = s.validate().map_err(|e| e.to_string())?;
    let b = bound_for(&exp)
        .map_err(|e| e.to_string())?
        .ok_or_else(|| format!("{name}: no bound"))?;
    Ok((b.t_star_bound, start.elapsed()))
}

/// Runs a builtin with per-step recording.
fn run_every_step(mut s: Scenario) -> TimedRun {
    s.output.stride = s.dynamics.dt;
    let exp = s.validate().map_err(|e| e.to_string())?;
    let start = Instant::now();
    let r = simulate(&exp).map_err(|e| e.to_string())?;
    Ok((r, start.elapsed()))
}

fn settle_or_inf(r: &RunResult) -> f64 {
    r.settling.t_settle.unwrap_or(f64::INFINITY)
}

/// Largest one-step increase of V while V ≥ 1e-10.
fn max_energy_increase(r: &RunResult) -> f64 {
    r.records
        .windows(2)
        .take_while(|w| w[0].energy >= 1e-10)
        .map(|w| w[1].energy - w[0].energy)
        .fold(f64::NEG_INFINITY, f64::max)
}

#[allow(clippy::needless_range_loop)]
fn random_connected(rng: &mut ChaCha8Rng, n: usize) -> CommGraph {
    let mut a = vec![vec![0.0; n]; n];
    let mut order: Vec<usize> = (0..n).collect();
    for i in (1..n).rev() {
        order.swap(i, rng.gen_range(0..=i));
    }
    for k in 1..n {
        let (i, j) = (order[k], order[rng.gen_range(0..k)]);
        let w = rng.gen_range(0.1..5.0);
        a[i][j] = w;
        a[j][i] = w;
    }
    for i in 0..n {
        for j in (i + 1)..n {
            if a[i][j] == 0.0 && rng.gen_bool(0.4) {
                let w = rng.gen_range(0.1..5.0);
                a[i][j] = w;
                a[j][i] = w;
            }
        }
    }
    CommGraph::from_rows(&a).expect("valid random graph")
}

fn gaussian(rng: &mut ChaCha8Rng, n: usize) -> DVector<f64> {
    // Box-Muller; exact distribution is irrelevant, isotropy is what matters.
    DVector::from_iterator(
        n,
        (0..n).map(|_| {
            let u: f64 = rng.gen_range(f64::MIN_POSITIVE..1.0);
            let v: f64 = rng.gen();
            (-2.0 * u.ln()).sqrt() * (std::f64::consts::TAU * v).cos()
        }),
    )
}

fn project(x: &DVector<f64>, w: &DVector<f64>) -> DVector<f64> {
    x - w * (x.dot(w) / w.dot(w))
}

fn rayleigh(l: &DMatrix<f64>, x: &DVector<f64>) -> f64 {
    x.dot(&(l * x)) / x.dot(x)
}

/// Constrained Rayleigh minimum over `⟨x, w⟩ = 0`: the minimum over random
/// directions, and that sample refined by projected gradient descent.
fn brute_force_min(l: &DMatrix<f64>, w: &DVector<f64>, rng: &mut ChaCha8Rng) -> (f64, f64) {
    let n = l.nrows();
    let mut best = f64::INFINITY;
    let mut best_x = DVector::zeros(n);
    for _ in 0..10_000 {
        let x = project(&gaussian(rng, n), w);
        let r = rayleigh(l, &x);
        if r < best {
            best = r;
            best_x = x;
        }
    }
    let step = 1.0 / SymmetricEigen::new(l.clone()).eigenvalues.max().max(1e-12);
    let mut x = best_x.normalize();
    for _ in 0..20_000 {
        let r = rayleigh(l, &x);
        let grad = (l * &x - &x * r) * 2.0;
        x = project(&(&x - grad * (0.5 * step)), w).normalize();
    }
    (best, rayleigh(l, &x))
}

fn criterion_10() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed);
    let mut worst_gap: f64 = 0.0;
    for case in 0..20 {
        let n = rng.gen_range(2..=6);
        let g = random_connected(&mut rng, n);
        let l = g.laplacian().entries().clone();

        let ones = DVector::from_element(n, 1.0);
        let l2 = lambda2(g.laplacian()).map_err(|e| e.to_string())?;
        let (sampled, refined) = brute_force_min(&l, &ones, &mut rng);
        if sampled < l2 - 1e-9 || refined < l2 - 1e-9 || refined > l2 + 1e-6 {
            return Err(format!(
                "graph {case}: λ₂ = {l2}, sampled {sampled}, refined {refined}"
            ));
        }
        let eig = SymmetricEigen::new(l.clone());
        let mut idx: Vec<usize> = (0..n).collect();
        idx.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
        let v2 = eig.eigenvectors.column(idx[1]).into_owned();
        if (rayleigh(&l, &v2) - l2).abs() > 1e-9 {
            return Err(format!(
                "graph {case}: R(v₂) = {} vs λ₂ = {l2}",
                rayleigh(&l, &v2)
            ));
        }
        worst_gap = worst_gap.max(refined - l2);

        let omega: Vec<f64> = (0..n).map(|_| rng.gen_range(0.1..10.0)).collect();
        let w = DVector::from_vec(omega.clone());
        let lw = lambda_omega(g.laplacian(), &BalanceWeights::new(omega).unwrap())
            .map_err(|e| e.to_string())?;
        let (sampled, refined) = brute_force_min(&l, &w, &mut rng);
        if sampled < lw - 1e-9 || refined < lw - 1e-9 || refined > lw + 1e-6 {
            return Err(format!(
                "graph {case}: λ_ω = {lw}, sampled {sampled}, refined {refined}"
            ));
        }
        // Independent check: pushing ω out of the way with a large rank-one
        // shift leaves λ_ω as the smallest eigenvalue of the projected matrix.
        let wn = w.normalize();
        let p = DMatrix::identity(n, n) - &wn * wn.transpose();
        let shift = 2.0 * eig.eigenvalues.max() + 1.0;
        let shifted = &p * &l * &p + &wn * wn.transpose() * shift;
        let se = SymmetricEigen::new(shifted);
        let k = (0..n)
            .min_by(|&a, &b| se.eigenvalues[a].total_cmp(&se.eigenvalues[b]))
            .unwrap();
        let v = se.eigenvectors.column(k).into_owned();
        if (rayleigh(&l, &v) - lw).abs() > 1e-9 || v.dot(&wn).abs() > 1e-9 {
            return Err(format!(
                "graph {case}: R(v_ω) = {} vs λ_ω = {lw}",
                rayleigh(&l, &v)
            ));
        }
        worst_gap = worst_gap.max(refined - lw);
    }
    Ok(format!(
        "20 graphs, 10^4 directions each, max refined excess {worst_gap:.2e}"
    ))
}

fn graph_strategy() -> impl Strategy<Value = CommGraph> {
    (2usize..=8, any::<u64>())
        .prop_map(|(n, seed)| random_connected(&mut ChaCha8Rng::seed_from_u64(seed), n))
}

fn property(name: &str, result: Result<(), String>, log: &mut Vec<String>) -> Result<(), String> {
    result.map_err(|e| format!("{name}: {e}"))?;
    log.push(name.to_string());
    Ok(())
}

fn criterion_9() -> Outcome {
    let config = Config {
        cases: PROPERTY_CASES,
        failure_persistence: None,
        ..Config::default()
    };
    let mut runner = TestRunner::new(config);
    let mut passed = Vec::new();

    let r = runner
        .run(
            &(graph_strategy(), prop::collection::vec(-10.0f64..10.0, 8)),
            |(g, z)| {
                let z = &z[..g.n_agents()];
                let lhs = g.laplacian().quadratic_form(z);
                let rhs = g.disagreement_sum(z);
                prop_assert!(
                    (lhs - rhs).abs() <= 1e-10 * rhs.abs().max(1e-12),
                    "{lhs} vs {rhs}"
                );
                Ok(())
            },
        )
        .map_err(|e| e.to_string());
    property("quadratic-form identity", r, &mut passed)?;

    let r = runner
        .run(
            &(graph_strategy(), prop::collection::vec(-10.0f64..10.0, 8)),
            |(g, x)| {
                let n = g.n_agents();
                let mean = x[..n].iter().sum::<f64>() / n as f64;
                let x: Vec<f64> = x[..n].iter().map(|v| v - mean).collect();
                prop_assume!(x.iter().map(|v| v * v).sum::<f64>() > 1e-12);
                let l2 = lambda2(g.laplacian()).unwrap();
                let r = g.laplacian().rayleigh(&x);
                prop_assert!(r >= l2 - 1e-9 * l2.max(1.0), "R = {r} < λ₂ = {l2}");
                Ok(())
            },
        )
        .map_err(|e| e.to_string());
    property("Rayleigh lower bound", r, &mut passed)?;

    let r = runner
        .run(
            &(graph_strategy(), prop::collection::vec(0.05f64..20.0, 8)),
            |(g, w)| {
                let omega = BalanceWeights::new(w[..g.n_agents()].to_vec()).unwrap();
                let l2 = lambda2(g.laplacian()).unwrap();
                let lw = lambda_omega(g.laplacian(), &omega).unwrap();
                prop_assert!(
                    lw >= 0.0 && lw <= l2 + 1e-9 * l2.max(1.0),
                    "λ₂ = {l2}, λ_ω = {lw}"
                );
                Ok(())
            },
        )
        .map_err(|e| e.to_string());
    property("λ₂ ≥ λ_ω ≥ 0", r, &mut passed)?;

    let r = runner
        .run(
            &(
                prop::collection::vec(0.0f64..100.0, 1..=10),
                0.01f64..0.99,
                1.01f64..5.0,
            ),
            |(xs, alpha, beta)| {
                let tol = |v: f64| 1e-12 * v.abs().max(1.0);
                let (a0, a1, a2) = alpha_power_chain(&xs, alpha);
                prop_assert!(
                    a0 <= a1 + tol(a1) && a1 <= a2 + tol(a2),
                    "α-chain {a0} {a1} {a2}"
                );
                let (b0, b1, b2) = beta_power_chain(&xs, beta);
                prop_assert!(
                    b0 <= b1 + tol(b1) && b1 <= b2 + tol(b2),
                    "β-chain {b0} {b1} {b2}"
                );
                Ok(())
            },
        )
        .map_err(|e| e.to_string());
    property("power-sum chains", r, &mut passed)?;

    let r = runner
        .run(
            &(
                0.5f64..4.0,
                4usize..=200,
                prop::collection::vec(-5.0f64..5.0, 1..=12),
            ),
            |(length, cells, knots)| {
                let grid = SpatialGrid::new(length, cells).unwrap();
                // Piecewise-linear spline through zero, the knots, and zero.
                let mut ys = vec![0.0];
                ys.extend(&knots);
                ys.push(0.0);
                let segs = (ys.len() - 1) as f64;
                let field: Vec<f64> = grid
                    .nodes()
                    .iter()
                    .map(|&x| {
                        let s = (x / length * segs).min(segs);
                        let k = (s.floor() as usize).min(ys.len() - 2);
                        let t = s - k as f64;
                        ys[k] * (1.0 - t) + ys[k + 1] * t
                    })
                    .collect();
                let (lhs, rhs) = wirtinger_sides(&field, &grid);
                prop_assert!(lhs <= rhs + 1e-6, "{lhs} > {rhs}");
                Ok(())
            },
        )
        .map_err(|e| e.to_string());
    property("Wirtinger", r, &mut passed)?;

    Ok(format!(
        "{} suites × {PROPERTY_CASES} cases: {}",
        passed.len(),
        passed.join(", ")
    ))
}

fn main() -> ExitCode {
    let mut suite = Suite { failures: 0 };

    suite.check(1, "Example 1 finite-time bound", || {
        let (b, t) = bound_of("example1_ftc", 400)?;
        ensure(
            (b - 7.746).abs() <= 1e-3 && t < BOUND_TIME_LIMIT,
            format!("t* ≤ {b:.6} (target 7.746 ± 0.001, M = 400), {t:.2?}"),
        )
    });

    suite.check(2, "Example 1 fixed-time bound", || {
        let (b, t) = bound_of("example1_fxc", 400)?;
        ensure(
            (b - 7.226).abs() <= 1e-3 && t < BOUND_TIME_LIMIT,
            format!("T_max = {b:.6} (target 7.226 ± 0.001), {t:.2?}"),
        )
    });

    suite.check(3, "Example 2 directed bounds", || {
        let (ftc, t1) = bound_of("example2_ftc", 400)?;
        let (fxc, t2) = bound_of("example2_fxc", 400)?;
        ensure(
            (ftc - 4.15).abs() <= 0.05
                && (fxc - 3.92).abs() <= 0.05
                && t1.max(t2) < BOUND_TIME_LIMIT,
            format!(
                "t* ≤ {ftc:.4} (4.15 ± 0.05), T_max = {fxc:.4} (3.92 ± 0.05), {:.2?}",
                t1.max(t2)
            ),
        )
    });

    suite.check(4, "disturbance gain feasibility", || {
        let exp = builtin("example1_ftc")
            .unwrap()
            .validate()
            .map_err(|e| e.to_string())?;
        let req = exp.dbar_required.ok_or("no dbar_required")?;
        let conf = exp.scenario.controller.dbar;
        ensure(
            (req - 7.348).abs() <= 0.01 && conf >= req,
            format!("dbar_required = {req:.4} (7.348 ± 0.01), configured {conf}"),
        )
    });

    let protocols = [
        "example1_ftc",
        "example1_fxc",
        "example2_ftc",
        "example2_fxc",
    ];
    let mut runs: Vec<(&str, TimedRun)> = protocols
        .iter()
        .map(|&name| (name, run_every_step(builtin(name).unwrap())))
        .collect();

    suite.check(5, "nonlinear protocols settle before their bounds", || {
        let mut parts = Vec::new();
        let mut ok = true;
        for (name, run) in &runs {
            let (r, t) = run.as_ref().map_err(|e| format!("{name}: {e}"))?;
            let bound = r
                .bound
                .as_ref()
                .ok_or(format!("{name}: no bound"))?
                .t_star_bound;
            let settle = settle_or_inf(r);
            ok &= r.settling.settled && settle <= bound && *t < RUN_TIME_LIMIT;
            parts.push(format!("{name} {settle:.2}/{bound:.3} in {t:.1?}"));
        }
        ensure(ok, parts.join("; "))
    });

    suite.check(6, "uncontrolled agents stay apart", || {
        let mut parts = Vec::new();
        let mut ok = true;
        for name in ["example1_none", "example2_none"] {
            let (r, _) = run_every_step(builtin(name).unwrap())?;
            let min = r
                .records
                .iter()
                .map(|x| x.disagreement)
                .fold(f64::INFINITY, f64::min);
            ok &= !r.settling.settled && min > r.settling.threshold;
            parts.push(format!("{name} min disagreement {min:.3}"));
        }
        ensure(ok, parts.join("; "))
    });

    suite.check(7, "Lyapunov energy non-increasing", || {
        let mut parts = Vec::new();
        let mut ok = true;
        for (name, run) in &runs {
            let (r, _) = run.as_ref().map_err(|e| format!("{name}: {e}"))?;
            let inc = max_energy_increase(r);
            ok &= inc <= 1e-8;
            parts.push(format!("{name} {inc:.2e}"));
        }
        ensure(ok, format!("max per-step increase: {}", parts.join(", ")))
    });

    suite.check(8, "fixed-time bound ignores initial scale", || {
        let base = builtin("example1_fxc").unwrap();
        let mut scaled = base.clone();
        scaled.scale_initial(10.0);
        let b0 = bound_for(&base.validate().unwrap())
            .unwrap()
            .unwrap()
            .t_star_bound;
        let b1 = bound_for(&scaled.validate().map_err(|e| e.to_string())?)
            .unwrap()
            .unwrap()
            .t_star_bound;
        let (r, _) = run_every_step(scaled)?;
        let settle = settle_or_inf(&r);
        ensure(
            b0.to_bits() == b1.to_bits() && r.settling.settled && settle <= b1,
            format!("T_max {b0} vs {b1}, scaled run settles at {settle:.3}"),
        )
    });

    suite.check(9, "property suites", criterion_9);
    suite.check(
        10,
        "eigensolve matches brute-force Rayleigh minimum",
        criterion_10,
    );

    suite.check(11, "nonlinear protocols beat linear baselines", || {
        let mut fast = Vec::new();
        for (name, run) in runs.drain(..2) {
            let (r, _) = run.map_err(|e| format!("{name}: {e}"))?;
            fast.push((name, settle_or_inf(&r)));
        }
        let mut slow = Vec::new();
        for name in ["example1_linear", "example1_boundary"] {
            let (r, _) = run_every_step(builtin(name).unwrap())?;
            slow.push((name, settle_or_inf(&r)));
        }
        let ok = fast.iter().all(|f| slow.iter().all(|s| f.1 < s.1));
        let show = |v: &[(&str, f64)]| {
            v.iter()
                .map(|(n, t)| {
                    if t.is_finite() {
                        format!("{n} {t:.2}")
                    } else {
                        format!("{n} unsettled")
                    }
                })
                .collect::<Vec<_>>()
                .join(", ")
        };
        ensure(ok, format!("{} vs {}", show(&fast), show(&slow)))
    });

    if suite.failures == 0 {
        println!("acceptance: all criteria passed");
        ExitCode::SUCCESS
    } else {
        println!("acceptance: {} criteria failed", suite.failures);
        ExitCode::FAILURE
    }
}
