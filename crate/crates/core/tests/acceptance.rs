//! Acceptance suite: one PASS/FAIL line per criterion, non-zero exit if any
//! criterion fails. Every run uses master seed 1.

use std::process::ExitCode;
use std::time::{Duration, Instant};

use spinfluct::cycles::{cycle_counts_mobius, cycle_counts_naive, distinct_cycle_sum, DenseSym};
use spinfluct::harness::{
    cycles_p_checks, cycles_q_checks, fluct_checks, qn_mixture_check, residual_study, run_cycles_experiment,
    run_fluct_experiment, run_tilted_experiment, CriterionResult, ExperimentConfig, ExperimentKind, KPolicy,
};
use spinfluct::model::sample_goe;
use spinfluct::theory::{beta_xi, fluct_params, second_moment_exact, second_moment_limit, Mixture};
use spinfluct::wick::{cycle_count_polynomial, exact_moment, predicted_scaled_variance};

use num_rational::BigRational;
use num_traits::Zero;

const SEED: u64 = 1;

type Outcome = Result<(bool, String), String>;
type Criterion = (&'static str, &'static str, Duration, fn() -> Outcome);

fn all_passed(checks: &[CriterionResult]) -> (bool, String) {
    let failed: Vec<String> = checks.iter().filter(|c| !c.passed).map(|c| format!("{}: {}", c.id, c.detail)).collect();
    if failed.is_empty() {
        (true, format!("{} checks", checks.len()))
    } else {
        (false, failed.join("; "))
    }
}

fn config(kind: ExperimentKind, n: usize, replicas: usize, k: usize) -> ExperimentConfig {
    ExperimentConfig {
        kind,
        ns: vec![n],
        replicas,
        master_seed: SEED,
        k_policy: KPolicy::Explicit { k },
        ..ExperimentConfig::default()
    }
}

fn a1() -> Outcome {
    let p = fluct_params(&Mixture::sk(), 0.4, 3).map_err(|e| e.to_string())?;
    let formula = -0.5 * 0.68_f64.ln();
    let mut ok = (p.s2 - formula).abs() <= 1e-6 && (p.s2 - 0.192_831_240_4).abs() <= 1e-6 && (p.mu[1] - 0.32).abs() <= 4.0 * f64::EPSILON * 0.32;
    let mut detail = format!("s2 {:.10} (-ln(0.68)/2 = {formula:.10}), mu2 {}", p.s2, p.mu[1]);
    for a2 in [0.5, 1.0, 2.0] {
        let b = beta_xi(&Mixture::pure_two_spin(a2).map_err(|e| e.to_string())?, 1e-6).map_err(|e| e.to_string())?;
        let want = 1.0 / (2.0 * a2).sqrt();
        ok &= (b - want).abs() <= 1e-3;
        detail += &format!(", beta_xi({a2}) {b:.6}");
    }
    Ok((ok, detail))
}

fn a2() -> Outcome {
    let mut checked = 0;
    for n in 1..=5 {
        let polys = (1..=4).map(|k| cycle_count_polynomial(n, k)).collect::<Result<Vec<_>, _>>().map_err(|e| e.to_string())?;
        for k in 1..=4 {
            let pk = &polys[k - 1];
            if !exact_moment(std::slice::from_ref(pk)).map_err(|e| e.to_string())?.value.is_zero() {
                return Ok((false, format!("E[C_{{{n},{k}}}] != 0")));
            }
            for l in 1..=4 {
                let m = exact_moment(&[pk.clone(), polys[l - 1].clone()]).map_err(|e| e.to_string())?;
                let want = if k == l {
                    BigRational::from_integer(predicted_scaled_variance(n, k))
                } else {
                    BigRational::zero()
                };
                if m.value != want {
                    return Ok((false, format!("n {n} k {k} l {l}: {} != {want}", m.value)));
                }
                checked += 1;
            }
        }
    }
    Ok((true, format!("{checked} exact identities")))
}

fn a3() -> Outcome {
    let mut worst = 0.0_f64;
    for seed in 0..100 {
        let j = sample_goe(10, SEED.wrapping_add(seed));
        let a = cycle_counts_naive(&j, 5).map_err(|e| e.to_string())?;
        let b = cycle_counts_mobius(&j, 5).map_err(|e| e.to_string())?;
        for (x, y) in a.values.iter().zip(&b.values) {
            worst = worst.max((x - y).abs() / x.abs().max(y.abs()));
        }
    }
    let mut ok = worst <= 1e-10;
    for n in 1..=30usize {
        let ones = DenseSym::filled(n, 1i128);
        for k in 1..=6usize {
            let got = distinct_cycle_sum(&ones, k).map_err(|e| e.to_string())?;
            let want: i128 = if k > n { 0 } else { (0..k).map(|i| (n - i) as i128).product() };
            ok &= got == want;
        }
    }
    Ok((ok, format!("worst relative gap {worst:.3e}; all-ones falling factorials checked")))
}

fn a4() -> Outcome {
    let data = run_cycles_experiment(&config(ExperimentKind::CyclesP, 40, 20_000, 4)).map_err(|e| e.to_string())?;
    let checks: Vec<_> = cycles_p_checks(&data, 0.05, 0.0)
        .map_err(|e| e.to_string())?
        .into_iter()
        .filter(|c| !c.id.starts_with("ks"))
        .collect();
    Ok(all_passed(&checks))
}

fn a5() -> Outcome {
    let data = run_cycles_experiment(&config(ExperimentKind::CyclesP, 60, 5000, 3)).map_err(|e| e.to_string())?;
    let checks: Vec<_> = cycles_p_checks(&data, f64::INFINITY, 1e-3)
        .map_err(|e| e.to_string())?
        .into_iter()
        .filter(|c| c.id.starts_with("ks"))
        .collect();
    let (ok, _) = all_passed(&checks);
    let detail = checks.iter().map(|c| c.detail.clone()).collect::<Vec<_>>().join("; ");
    Ok((ok && checks.len() == 3, detail))
}

fn a6() -> Outcome {
    let data = run_fluct_experiment(&config(ExperimentKind::Fluct, 16, 1000, 1)).map_err(|e| e.to_string())?;
    let checks = fluct_checks(&data, 0.03, 0.25, 1e-2).map_err(|e| e.to_string())?;
    let (ok, _) = all_passed(&checks);
    let detail = checks.iter().map(|c| format!("{}: {}", c.id, c.detail)).collect::<Vec<_>>().join("; ");
    Ok((ok && checks.len() == 4, detail))
}

fn a7() -> Outcome {
    let cfg = ExperimentConfig {
        kind: ExperimentKind::Residual,
        ns: vec![8, 12, 16, 20],
        replicas: 500,
        master_seed: SEED,
        k_policy: KPolicy::Truncation { eps: 0.05, delta: 0.01 },
        ..ExperimentConfig::default()
    };
    let s = residual_study(&cfg).map_err(|e| e.to_string())?;
    let rows = s
        .rows
        .iter()
        .map(|r| format!("N={} median {:.5} p90 {:.5}", r.n, r.median_abs_residual, r.p90_abs_residual))
        .collect::<Vec<_>>()
        .join(", ");
    Ok((s.strictly_decreasing, format!("K={}; {rows}", s.k)))
}

fn a8() -> Outcome {
    let mut cfg = config(ExperimentKind::CyclesQ, 50, 5000, 3);
    cfg.beta = 0.5 / 2.0_f64.sqrt();
    let data = run_tilted_experiment(&cfg).map_err(|e| e.to_string())?;
    let params = fluct_params(&cfg.mixture, cfg.beta, 3).map_err(|e| e.to_string())?;
    let checks = cycles_q_checks(&data, &params, 0.10).map_err(|e| e.to_string())?;
    let (ok, _) = all_passed(&checks);
    let detail = checks.iter().map(|c| format!("{}: {}", c.id, c.detail)).collect::<Vec<_>>().join("; ");
    Ok((ok, detail))
}

fn a9() -> Outcome {
    let limit = second_moment_limit(1.0, 0.4);
    let errors = [1_000, 10_000, 100_000]
        .iter()
        .map(|&n| second_moment_exact(&Mixture::sk(), 0.4, n).map(|v| (v - limit).abs()))
        .collect::<Result<Vec<_>, _>>()
        .map_err(|e| e.to_string())?;
    let ok = errors.windows(2).all(|w| w[1] < w[0]) && errors[2] < 2e-3;
    Ok((ok, format!("errors {:.3e} {:.3e} {:.3e}", errors[0], errors[1], errors[2])))
}

fn a10() -> Outcome {
    let c = qn_mixture_check(&config(ExperimentKind::QnMixture, 8, 20_000, 1)).map_err(|e| e.to_string())?;
    Ok((
        c.passed,
        format!(
            "weighted P {:.5} ± {:.5}, direct Q {:.5} ± {:.5}",
            c.weighted_p, c.weighted_p_se, c.direct_q, c.direct_q_se
        ),
    ))
}

fn main() -> ExitCode {
    let criteria: [Criterion; 10] = [
        ("A1", "closed forms and beta_xi of pure 2-spin", Duration::from_secs(1), a1),
        ("A2", "exact cycle-count moments", Duration::from_secs(120), a2),
        ("A3", "naive vs Möbius cycle counts", Duration::from_secs(60), a3),
        ("A4", "cycle-count moments under P, N=40", Duration::from_secs(300), a4),
        ("A5", "cycle-count CLT under P, N=60", Duration::from_secs(300), a5),
        ("A6", "free-energy fluctuations, N=16", Duration::from_secs(600), a6),
        ("A7", "residual decreasing in N", Duration::from_secs(600), a7),
        ("A8", "cycle counts under Q, N=50", Duration::from_secs(180), a8),
        ("A9", "second moment convergence", Duration::from_secs(5), a9),
        ("A10", "Q mixture identity, N=8", Duration::from_secs(180), a10),
    ];
    let mut failures = 0;
    for (id, name, budget, run) in criteria {
        let start = Instant::now();
        let outcome = run();
        let elapsed = start.elapsed();
        let (ok, detail) = match outcome {
            Ok((ok, detail)) => (ok, detail),
            Err(e) => (false, format!("error: {e}")),
        };
        let in_time = elapsed <= budget;
        let pass = ok && in_time;
        failures += usize::from(!pass);
        println!(
            "{} {id} {name} [{:.2}s / {}s{}] {detail}",
            if pass { "PASS" } else { "FAIL" },
            elapsed.as_secs_f64(),
            budget.as_secs(),
            if in_time { "" } else { ", over budget" },
        );
    }
    if failures == 0 {
        println!("acceptance: all {} criteria passed", 10);
        ExitCode::SUCCESS
    } else {
        println!("acceptance: {failures} criteria failed");
        ExitCode::FAILURE
    }
}
