//! WebAssembly bindings for the browser demo in `www/`.
//!
//! Every export returns a JSON string; the page parses it and draws on a
//! canvas. The `*_json` functions hold the logic so they can be tested
//! natively.

use serde::Serialize;
use wasm_bindgen::prelude::*;

use spinfluct::cycles::cycle_counts_mobius;
use spinfluct::harness::stats::moment_summary;
use spinfluct::harness::{tilted_counts, tilted_mean, ExperimentConfig, ExperimentKind, KPolicy};
use spinfluct::model::{child_seed, sample_goe, DisorderRealization};
use spinfluct::partition::free_energy_exact;
use spinfluct::theory::{
    beta_xi, cycle_variance_exact, fluct_params, second_moment_limit, truncation_k, FluctParams, Mixture,
};
use spinfluct::{Error, Result};

/// Browser-side limits so a click never freezes the tab for long.
const MAX_N_FREE_ENERGY: usize = 16;
const MAX_N_CYCLES: usize = 60;
const MAX_REPLICAS: usize = 5000;

fn check_size(what: &str, value: usize, max: usize) -> Result<()> {
    if value == 0 || value > max {
        return Err(Error::InvalidParameter(format!("{what} must be in 1..={max}, got {value}")));
    }
    Ok(())
}

fn to_json<T: Serialize>(v: &T) -> Result<String> {
    serde_json::to_string(v).map_err(|e| Error::Format(e.to_string()))
}

#[derive(Serialize)]
struct TheoryCurve {
    mixture: String,
    beta_xi: f64,
    critical_beta: f64,
    beta: Vec<f64>,
    /// `None` past the critical load.
    s2: Vec<Option<f64>>,
    second_moment: Vec<Option<f64>>,
    recommended_k: Vec<Option<usize>>,
}

pub fn theory_curve_json(mixture: &str, beta_max: f64, points: usize) -> Result<String> {
    let mix: Mixture = mixture.parse()?;
    check_size("points", points, 2000)?;
    if !(beta_max > 0.0 && beta_max.is_finite()) {
        return Err(Error::Domain { value: beta_max, domain: "beta_max > 0" });
    }
    let a2 = mix.alpha2();
    let mut curve = TheoryCurve {
        mixture: mix.to_string(),
        beta_xi: beta_xi(&mix, 1e-6)?,
        critical_beta: 1.0 / (2.0 * a2).sqrt(),
        beta: Vec::with_capacity(points),
        s2: Vec::with_capacity(points),
        second_moment: Vec::with_capacity(points),
        recommended_k: Vec::with_capacity(points),
    };
    for i in 0..points {
        let beta = beta_max * i as f64 / (points.max(2) - 1) as f64;
        let params = fluct_params(&mix, beta, 1).ok();
        curve.beta.push(beta);
        curve.s2.push(params.as_ref().map(|p| p.s2));
        curve.second_moment.push(params.as_ref().map(|_| second_moment_limit(a2, beta)));
        curve.recommended_k.push(params.and_then(|p| truncation_k(&p, 0.05, 0.01).ok()));
    }
    to_json(&curve)
}

#[derive(Serialize)]
struct FreeEnergySample {
    n: usize,
    s2: f64,
    mean_shift: f64,
    recentered: Vec<f64>,
    residual: Vec<f64>,
    mean: f64,
    variance: f64,
}

/// Recentred free energies and residuals of `replicas` disorder draws.
pub fn free_energy_sample_json(mixture: &str, beta: f64, n: usize, replicas: usize, seed: u64) -> Result<String> {
    let mix: Mixture = mixture.parse()?;
    check_size("N", n, MAX_N_FREE_ENERGY)?;
    check_size("replicas", replicas, MAX_REPLICAS)?;
    let k = 6;
    let params = fluct_params(&mix, beta, k)?;
    let xi1 = mix.xi(1.0)?;
    let mut recentered = Vec::with_capacity(replicas);
    let mut residual = Vec::with_capacity(replicas);
    for r in 0..replicas {
        let d = DisorderRealization::sample(&mix, n, child_seed(seed, r as u64));
        let f = free_energy_exact(&d, beta)? - n as f64 * beta * beta * xi1 / 2.0;
        let counts = cycle_counts_mobius(d.goe(), k.min(n))?;
        let sum = spinfluct::cycles::fluctuation_sum(&counts, &params, k.min(n))?;
        recentered.push(f);
        residual.push(f - sum);
    }
    let (mean, variance) = summary(&recentered);
    to_json(&FreeEnergySample { n, s2: params.s2, mean_shift: params.mean_shift, recentered, residual, mean, variance })
}

fn summary(values: &[f64]) -> (f64, f64) {
    moment_summary(values).map_or((f64::NAN, f64::NAN), |s| (s.mean, s.variance))
}

#[derive(Serialize)]
struct CycleSample {
    n: usize,
    tilted: bool,
    /// `values[k-1]` holds `C_{N,k}` across replicas.
    values: Vec<Vec<f64>>,
    theory_mean: Vec<f64>,
    theory_variance: Vec<f64>,
    mean: Vec<f64>,
    variance: Vec<f64>,
}

/// Cycle counts `C_{N,1..=kmax}` under the GOE law, or under the tilted law
/// of the pure 2-spin model at inverse temperature `beta`.
pub fn cycle_sample_json(n: usize, kmax: usize, replicas: usize, beta: f64, tilted: bool, seed: u64) -> Result<String> {
    check_size("N", n, MAX_N_CYCLES)?;
    check_size("kmax", kmax, 4)?;
    check_size("replicas", replicas, MAX_REPLICAS)?;
    let cfg = ExperimentConfig {
        kind: ExperimentKind::CyclesQ,
        beta: if tilted { beta } else { 0.0 },
        ns: vec![n],
        k_policy: KPolicy::Explicit { k: kmax },
        ..ExperimentConfig::default()
    };
    let params: FluctParams = fluct_params(&cfg.mixture, cfg.beta, kmax)?;
    let mut values = vec![Vec::with_capacity(replicas); kmax];
    for r in 0..replicas {
        let s = child_seed(seed, r as u64);
        let counts = if tilted { tilted_counts(&cfg, n, kmax, s)? } else { cycle_counts_mobius(&sample_goe(n, s), kmax)? };
        for (col, v) in values.iter_mut().zip(counts.values) {
            col.push(v);
        }
    }
    let (mean, variance) = values.iter().map(|c| summary(c)).unzip();
    to_json(&CycleSample {
        n,
        tilted,
        theory_mean: (1..=kmax).map(|k| if tilted { tilted_mean(&params, n, k) } else { 0.0 }).collect(),
        theory_variance: (1..=kmax).map(|k| cycle_variance_exact(n, k)).collect(),
        values,
        mean,
        variance,
    })
}

fn js<T>(r: Result<T>) -> std::result::Result<T, JsError> {
    r.map_err(|e| JsError::new(&e.to_string()))
}

#[wasm_bindgen]
pub fn theory_curve(mixture: &str, beta_max: f64, points: usize) -> std::result::Result<String, JsError> {
    js(theory_curve_json(mixture, beta_max, points))
}

#[wasm_bindgen]
pub fn free_energy_sample(mixture: &str, beta: f64, n: usize, replicas: usize, seed: u64) -> std::result::Result<String, JsError> {
    js(free_energy_sample_json(mixture, beta, n, replicas, seed))
}

#[wasm_bindgen]
pub fn cycle_sample(n: usize, kmax: usize, replicas: usize, beta: f64, tilted: bool, seed: u64) -> std::result::Result<String, JsError> {
    js(cycle_sample_json(n, kmax, replicas, beta, tilted, seed))
}

#[cfg(test)]
mod tests {
    use super::*;
    use serde_json::Value;

    fn parse(s: &str) -> Value {
        serde_json::from_str(s).unwrap()
    }

    #[test]
    fn theory_curve_stops_at_critical_load() {
        let v = parse(&theory_curve_json("x2", 1.0, 11).unwrap());
        assert_eq!(v["beta"].as_array().unwrap().len(), 11);
        assert!((v["s2"][4].as_f64().unwrap() - 0.192_831_240_4).abs() < 1e-9);
        assert!(v["s2"][8].is_null());
        assert!((v["critical_beta"].as_f64().unwrap() - 0.5_f64.sqrt()).abs() < 1e-15);
        assert!(theory_curve_json("3:1", 1.0, 11).is_err());
        assert!(theory_curve_json("x2", -1.0, 11).is_err());
    }

    #[test]
    fn free_energy_sample_shape() {
        let v = parse(&free_energy_sample_json("x2", 0.4, 8, 40, 1).unwrap());
        assert_eq!(v["recentered"].as_array().unwrap().len(), 40);
        assert_eq!(v["residual"].as_array().unwrap().len(), 40);
        assert!(v["mean"].as_f64().unwrap().is_finite());
        assert!(free_energy_sample_json("x2", 0.4, 30, 10, 1).is_err());
        assert_eq!(
            free_energy_sample_json("x2", 0.4, 6, 5, 9).unwrap(),
            free_energy_sample_json("x2", 0.4, 6, 5, 9).unwrap()
        );
    }

    #[test]
    fn cycle_sample_means() {
        let v = parse(&cycle_sample_json(20, 3, 50, 0.35, true, 2).unwrap());
        assert_eq!(v["values"].as_array().unwrap().len(), 3);
        let mu1 = v["theory_mean"][0].as_f64().unwrap();
        assert!((mu1 - 0.35 * 2.0_f64.sqrt()).abs() < 1e-12);
        let p = parse(&cycle_sample_json(20, 2, 10, 0.35, false, 2).unwrap());
        assert_eq!(p["theory_mean"][0].as_f64().unwrap(), 0.0);
        assert!(cycle_sample_json(20, 5, 10, 0.3, false, 1).is_err());
    }
}
