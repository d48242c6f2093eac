//! Replica-parallel experiments and the checks that compare their empirical
//! distributions with the limiting laws.
//!
//! Replica `r` of a run draws everything from `child_seed(master_seed, r)`,
//! so results do not depend on the number of workers. Records are always
//! emitted in replica order.

pub mod config;
pub mod output;
pub mod stats;

use std::path::PathBuf;

use serde::Serialize;
use serde_json::{json, Value};

pub use config::{ExperimentConfig, ExperimentKind, KPolicy};
use output::{csv_document, fmt_sig, plot_data_csv, write_json, write_text};
use stats::{covariance_with_se, ks_test, moment_summary, quantile, KS_MIN_SAMPLE};

use crate::cycles::{cycle_counts_mobius, CycleCountVector, MAX_K};
use crate::error::{Error, Result};
use crate::model::{child_seed, sample_tilted_goe, splitmix64, DisorderRealization};
use crate::partition::{free_energy_exact, gibbs_sample_exact};
use crate::theory::{beta_xi, fluct_params, FluctParams};

/// Tolerance used when estimating `beta_xi` to gate assertions.
const BETA_XI_TOL: f64 = 1e-6;
/// Stream tags separating the seeds drawn inside one replica.
const TAG_TILDE: u64 = 0;
const TAG_GIBBS: u64 = 1;
const TAG_COUPLINGS: u64 = 2;
/// Offset separating the `Q_N` replicas of the mixture check from the `P_N`
/// ones.
const Q_STREAM: u64 = 0x51_7e57_0000_0000;

/// Outcome of one check against a theoretical prediction.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CriterionResult {
    pub id: String,
    pub description: String,
    pub passed: bool,
    pub detail: String,
}

impl CriterionResult {
    pub fn new(id: impl Into<String>, description: impl Into<String>, passed: bool, detail: impl Into<String>) -> Self {
        Self { id: id.into(), description: description.into(), passed, detail: detail.into() }
    }
}

/// `mu_k` for `k <= K` even past the critical load, where the Gaussian
/// limit no longer exists but the fluctuation sum is still defined.
fn params_or_partial(cfg: &ExperimentConfig, k: usize) -> Result<FluctParams> {
    match fluct_params(&cfg.mixture, cfg.beta, k) {
        Err(Error::BeyondCritical(_)) => {
            let alpha2 = cfg.mixture.alpha2();
            let ratio = (2.0 * alpha2).sqrt() * cfg.beta;
            Ok(FluctParams {
                beta: cfg.beta,
                alpha2,
                s2: f64::INFINITY,
                mean_shift: f64::NEG_INFINITY,
                mu: (1..=k as i32).map(|j| ratio.powi(j)).collect(),
            })
        }
        other => other,
    }
}

/// Whether limit-law checks apply: `2 alpha2 beta^2 < 1` and `beta` below
/// the estimated `beta_xi`.
pub fn assertions_enabled(cfg: &ExperimentConfig) -> Result<bool> {
    if cfg.load() >= 1.0 {
        return Ok(false);
    }
    Ok(cfg.beta < beta_xi(&cfg.mixture, BETA_XI_TOL)?)
}

/// Runs `f(replica_id, child_seed)` for every replica on the configured
/// worker pool and returns the results in replica order. The first failing
/// replica (by id) aborts the run.
pub fn run_replicas<T, F>(replicas: usize, master_seed: u64, workers: usize, f: F) -> Result<Vec<T>>
where
    T: Send,
    F: Fn(usize, u64) -> Result<T> + Sync + Send,
{
    let job = |r: usize| {
        let seed = child_seed(master_seed, r as u64);
        f(r, seed).map_err(|e| Error::Replica { replica_id: r, seed, source: Box::new(e) })
    };
    #[cfg(feature = "parallel")]
    let results: Vec<Result<T>> = {
        use rayon::prelude::*;
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(workers)
            .build()
            .map_err(|e| Error::InvalidParameter(format!("worker pool: {e}")))?;
        pool.install(|| (0..replicas).into_par_iter().map(job).collect())
    };
    #[cfg(not(feature = "parallel"))]
    let results: Vec<Result<T>> = {
        let _ = workers;
        (0..replicas).map(job).collect()
    };
    results.into_iter().collect()
}

/// One replica of the free-energy experiment.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ReplicaRecord {
    pub replica_id: usize,
    pub child_seed: u64,
    pub free_energy: f64,
    /// `F_N - N beta^2 xi(1) / 2 = log Zhat_N`.
    pub recentered: f64,
    /// `C_{N,1..=K}`.
    pub counts: Vec<f64>,
    pub fluct_sum: f64,
    /// `recentered - fluct_sum`.
    pub residual: f64,
}

impl ReplicaRecord {
    /// Recomputes the fluctuation sum from the stored counts.
    pub fn recompute_residual(&self, params: &FluctParams) -> f64 {
        let sum: f64 = self
            .counts
            .iter()
            .enumerate()
            .map(|(i, &c)| {
                let k = i + 1;
                let mu = params.mu_k(k);
                (2.0 * mu * c - mu * mu) / (4.0 * k as f64)
            })
            .sum();
        self.recentered - sum
    }

    pub fn zhat(&self) -> f64 {
        self.recentered.exp()
    }
}

fn fluct_replica(mixture_cfg: &ExperimentConfig, n: usize, k: usize, params: &FluctParams, r: usize, seed: u64) -> Result<ReplicaRecord> {
    let d = DisorderRealization::sample(&mixture_cfg.mixture, n, seed);
    let beta = mixture_cfg.beta;
    let free_energy = free_energy_exact(&d, beta)?;
    let recentered = free_energy - n as f64 * beta * beta * mixture_cfg.mixture.xi_unchecked(1.0) / 2.0;
    let counts = cycle_counts_mobius(d.goe(), k)?;
    let fluct_sum = crate::cycles::fluctuation_sum(&counts, params, k)?;
    Ok(ReplicaRecord {
        replica_id: r,
        child_seed: seed,
        free_energy,
        recentered,
        counts: counts.values,
        fluct_sum,
        residual: recentered - fluct_sum,
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct FluctDataset {
    pub n: usize,
    pub k: usize,
    pub params: FluctParams,
    pub records: Vec<ReplicaRecord>,
}

impl FluctDataset {
    pub fn recentered(&self) -> Vec<f64> {
        self.records.iter().map(|r| r.recentered).collect()
    }

    pub fn replicas_csv(&self) -> String {
        let mut header = vec!["replica_id".to_string(), "seed".into(), "F".into(), "recentered".into()];
        header.extend((1..=self.k).map(|k| format!("C{k}")));
        header.extend(["sum".to_string(), "residual".into()]);
        csv_document(
            &header,
            self.records.iter().map(|r| {
                let mut row = vec![
                    r.replica_id.to_string(),
                    r.child_seed.to_string(),
                    fmt_sig(r.free_energy),
                    fmt_sig(r.recentered),
                ];
                row.extend(r.counts.iter().map(|&c| fmt_sig(c)));
                row.extend([fmt_sig(r.fluct_sum), fmt_sig(r.residual)]);
                row
            }),
        )
    }
}

fn run_fluct_at(cfg: &ExperimentConfig, n: usize, master_seed: u64) -> Result<FluctDataset> {
    let k = cfg.resolve_k()?;
    let params = params_or_partial(cfg, k)?;
    let records = run_replicas(cfg.replicas, master_seed, cfg.workers, |r, seed| {
        fluct_replica(cfg, n, k, &params, r, seed)
    })?;
    Ok(FluctDataset { n, k, params, records })
}

/// Free energy, cycle counts and residual for every replica at the single
/// configured `N`.
pub fn run_fluct_experiment(cfg: &ExperimentConfig) -> Result<FluctDataset> {
    cfg.validate()?;
    run_fluct_at(cfg, cfg.single_n()?, cfg.master_seed)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CycleRecord {
    pub replica_id: usize,
    pub child_seed: u64,
    pub counts: Vec<f64>,
}

#[derive(Clone, Debug, Serialize)]
pub struct CycleDataset {
    pub n: usize,
    pub kmax: usize,
    pub tilted: bool,
    pub records: Vec<CycleRecord>,
}

impl CycleDataset {
    /// Values of `C_{N,k}` across replicas.
    pub fn column(&self, k: usize) -> Vec<f64> {
        self.records.iter().map(|r| r.counts[k - 1]).collect()
    }

    pub fn replicas_csv(&self) -> String {
        let mut header = vec!["replica_id".to_string(), "seed".into()];
        header.extend((1..=self.kmax).map(|k| format!("C{k}")));
        csv_document(
            &header,
            self.records.iter().map(|r| {
                let mut row = vec![r.replica_id.to_string(), r.child_seed.to_string()];
                row.extend(r.counts.iter().map(|&c| fmt_sig(c)));
                row
            }),
        )
    }
}

/// Cycle counts of independent GOE matrices (the law `P_N`).
pub fn run_cycles_experiment(cfg: &ExperimentConfig) -> Result<CycleDataset> {
    cfg.validate()?;
    let n = cfg.single_n()?;
    let kmax = cfg.resolve_k()?;
    let records = run_replicas(cfg.replicas, cfg.master_seed, cfg.workers, |r, seed| {
        let j = crate::model::sample_goe(n, seed);
        Ok(CycleRecord { replica_id: r, child_seed: seed, counts: cycle_counts_mobius(&j, kmax)?.values })
    })?;
    Ok(CycleDataset { n, kmax, tilted: false, records })
}

/// One draw of the GOE matrix under the tilted law `Q_N`: `σ` from the
/// Gibbs measure of the higher-order part, then the mean-shifted matrix.
pub fn tilted_counts(cfg: &ExperimentConfig, n: usize, kmax: usize, seed: u64) -> Result<CycleCountVector> {
    let tilde = DisorderRealization::sample(&cfg.mixture, n, child_seed(seed, TAG_TILDE));
    let sigma = gibbs_sample_exact(&tilde, cfg.beta, child_seed(seed, TAG_GIBBS))?;
    let j = sample_tilted_goe(n, &sigma, cfg.beta, cfg.mixture.alpha2(), child_seed(seed, TAG_COUPLINGS))?;
    cycle_counts_mobius(&j, kmax)
}

/// Cycle counts under the tilted law `Q_N`.
pub fn run_tilted_experiment(cfg: &ExperimentConfig) -> Result<CycleDataset> {
    cfg.validate()?;
    let n = cfg.single_n()?;
    let kmax = cfg.resolve_k()?;
    let records = run_replicas(cfg.replicas, cfg.master_seed, cfg.workers, |r, seed| {
        Ok(CycleRecord { replica_id: r, child_seed: seed, counts: tilted_counts(cfg, n, kmax, seed)?.values })
    })?;
    Ok(CycleDataset { n, kmax, tilted: true, records })
}

/// `E_Q[C_{N,k}] = mu_k N(N-1)...(N-k+1) / N^k`.
pub fn tilted_mean(params: &FluctParams, n: usize, k: usize) -> f64 {
    let nf = n as f64;
    params.mu_k(k) * (1..k).map(|i| 1.0 - i as f64 / nf).product::<f64>()
}

#[derive(Clone, Debug, Serialize)]
pub struct ResidualRow {
    pub n: usize,
    pub master_seed: u64,
    pub median_abs_residual: f64,
    pub p90_abs_residual: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct ResidualSummary {
    pub k: usize,
    pub rows: Vec<ResidualRow>,
    pub strictly_decreasing: bool,
    /// `sum_{K < k <= MAX_K} mu_k^2 / (4k)`: the deterministic part of what
    /// a larger `K` would change.
    pub deterministic_tail: f64,
    #[serde(skip)]
    pub datasets: Vec<FluctDataset>,
}

/// Sub-master seed of the size-`n` run of a sweep.
pub fn sweep_seed(master_seed: u64, n: usize) -> u64 {
    splitmix64(master_seed ^ splitmix64(!(n as u64)))
}

/// Median and 90th percentile of `|residual|` for each configured `N`.
pub fn residual_study(cfg: &ExperimentConfig) -> Result<ResidualSummary> {
    cfg.validate()?;
    let k = cfg.resolve_k()?;
    let params = params_or_partial(cfg, MAX_K)?;
    let deterministic_tail = (k + 1..=MAX_K)
        .map(|j| params.mu_k(j).powi(2) / (4.0 * j as f64))
        .sum();
    let mut ns = cfg.ns.clone();
    ns.sort_unstable();
    let mut rows = Vec::new();
    let mut datasets = Vec::new();
    for n in ns {
        let seed = sweep_seed(cfg.master_seed, n);
        let data = run_fluct_at(cfg, n, seed)?;
        let abs: Vec<f64> = data.records.iter().map(|r| r.residual.abs()).collect();
        rows.push(ResidualRow {
            n,
            master_seed: seed,
            median_abs_residual: quantile(&abs, 0.5)?,
            p90_abs_residual: quantile(&abs, 0.9)?,
        });
        datasets.push(data);
    }
    let strictly_decreasing = rows.windows(2).all(|w| w[1].median_abs_residual < w[0].median_abs_residual);
    Ok(ResidualSummary { k, rows, strictly_decreasing, deterministic_tail, datasets })
}

#[derive(Clone, Debug, Serialize)]
pub struct MixtureCheck {
    pub n: usize,
    pub replicas: usize,
    /// `E_P[Zhat 1_A]` with `A = {C_{N,1} > 0}`.
    pub weighted_p: f64,
    pub weighted_p_se: f64,
    /// Frequency of `A` under direct `Q_N` sampling.
    pub direct_q: f64,
    pub direct_q_se: f64,
    pub combined_se: f64,
    pub passed: bool,
}

/// Compares the importance-weighted `P_N` estimate of `Q_N[C_{N,1} > 0]`
/// with the frequency under direct sampling of `Q_N`.
pub fn qn_mixture_check(cfg: &ExperimentConfig) -> Result<MixtureCheck> {
    cfg.validate()?;
    let n = cfg.single_n()?;
    let beta = cfg.beta;
    let xi1 = cfg.mixture.xi_unchecked(1.0);
    let weighted = run_replicas(cfg.replicas, cfg.master_seed, cfg.workers, |_, seed| {
        let d = DisorderRealization::sample(&cfg.mixture, n, seed);
        let log_zhat = free_energy_exact(&d, beta)? - n as f64 * beta * beta * xi1 / 2.0;
        let c1 = cycle_counts_mobius(d.goe(), 1)?.values[0];
        Ok(if c1 > 0.0 { log_zhat.exp() } else { 0.0 })
    })?;
    let direct = run_replicas(cfg.replicas, cfg.master_seed ^ Q_STREAM, cfg.workers, |_, seed| {
        let c1 = tilted_counts(cfg, n, 1, seed)?.values[0];
        Ok(if c1 > 0.0 { 1.0 } else { 0.0 })
    })?;
    let w = moment_summary(&weighted)?;
    let q = moment_summary(&direct)?;
    let combined_se = (w.se_mean.powi(2) + q.se_mean.powi(2)).sqrt();
    Ok(MixtureCheck {
        n,
        replicas: cfg.replicas,
        weighted_p: w.mean,
        weighted_p_se: w.se_mean,
        direct_q: q.mean,
        direct_q_se: q.se_mean,
        combined_se,
        passed: (w.mean - q.mean).abs() <= 4.0 * combined_se,
    })
}

fn within_rel(value: f64, target: f64, rel: f64) -> bool {
    (value - target).abs() <= rel * target.abs()
}

/// Limit-law checks for a free-energy dataset: mean within `mean_tol` of
/// `-s^2/2`, variance within `var_rel` of `s^2`, KS p-value above `ks_p`,
/// and the mean of `Zhat` within 4 standard errors of one.
pub fn fluct_checks(data: &FluctDataset, mean_tol: f64, var_rel: f64, ks_p: f64) -> Result<Vec<CriterionResult>> {
    let p = &data.params;
    let values = data.recentered();
    let s = moment_summary(&values)?;
    let zhat: Vec<f64> = data.records.iter().map(ReplicaRecord::zhat).collect();
    let z = moment_summary(&zhat)?;
    let mut out = vec![
        CriterionResult::new(
            "mean",
            "mean of the recentred free energy near -s^2/2",
            (s.mean - p.mean_shift).abs() <= mean_tol,
            format!("mean {} vs {} (tol {})", fmt_sig(s.mean), fmt_sig(p.mean_shift), mean_tol),
        ),
        CriterionResult::new(
            "variance",
            "variance of the recentred free energy near s^2",
            within_rel(s.variance, p.s2, var_rel),
            format!("variance {} vs {} (rel tol {})", fmt_sig(s.variance), fmt_sig(p.s2), var_rel),
        ),
        CriterionResult::new(
            "zhat_mean",
            "mean of Zhat within 4 SE of 1",
            (z.mean - 1.0).abs() <= 4.0 * z.se_mean,
            format!("mean {} ± {}", fmt_sig(z.mean), fmt_sig(z.se_mean)),
        ),
    ];
    if values.len() >= KS_MIN_SAMPLE {
        let ks = ks_test(&values, p.mean_shift, p.s2)?;
        out.push(CriterionResult::new(
            "ks",
            "KS test against Normal(-s^2/2, s^2)",
            ks.p_value > ks_p,
            format!("D {} p {} (threshold {})", fmt_sig(ks.statistic), fmt_sig(ks.p_value), ks_p),
        ));
    }
    Ok(out)
}

/// Checks for cycle counts under `P_N`: centred means, variances within
/// `var_rel` of the exact value, vanishing cross-covariances and KS tests
/// against `Normal(0, exact variance)`.
pub fn cycles_p_checks(data: &CycleDataset, var_rel: f64, ks_p: f64) -> Result<Vec<CriterionResult>> {
    let n = data.n;
    let mut out = Vec::new();
    for k in 1..=data.kmax {
        let col = data.column(k);
        let s = moment_summary(&col)?;
        let exact = crate::theory::cycle_variance_exact(n, k);
        out.push(CriterionResult::new(
            format!("mean_k{k}"),
            format!("|mean of C_{k}| within 4 SE"),
            s.mean.abs() <= 4.0 * s.se_mean,
            format!("mean {} se {}", fmt_sig(s.mean), fmt_sig(s.se_mean)),
        ));
        out.push(CriterionResult::new(
            format!("variance_k{k}"),
            format!("variance of C_{k} near the exact finite-N value"),
            within_rel(s.variance, exact, var_rel),
            format!("variance {} vs {} (rel tol {})", fmt_sig(s.variance), fmt_sig(exact), var_rel),
        ));
        if col.len() >= KS_MIN_SAMPLE && exact > 0.0 {
            let ks = ks_test(&col, 0.0, exact)?;
            out.push(CriterionResult::new(
                format!("ks_k{k}"),
                format!("KS test of C_{k} against Normal(0, exact variance)"),
                ks.p_value > ks_p,
                format!("D {} p {} (threshold {})", fmt_sig(ks.statistic), fmt_sig(ks.p_value), ks_p),
            ));
        }
        for l in k + 1..=data.kmax {
            let (c, se) = covariance_with_se(&col, &data.column(l))?;
            out.push(CriterionResult::new(
                format!("cov_k{k}_l{l}"),
                format!("covariance of C_{k} and C_{l} within 4 SE of 0"),
                c.abs() <= 4.0 * se,
                format!("cov {} se {}", fmt_sig(c), fmt_sig(se)),
            ));
        }
    }
    Ok(out)
}

/// Checks for cycle counts under `Q_N`: means within 4 SE of the exact
/// shift and variances within `var_rel` of `2k`.
pub fn cycles_q_checks(data: &CycleDataset, params: &FluctParams, var_rel: f64) -> Result<Vec<CriterionResult>> {
    let mut out = Vec::new();
    for k in 1..=data.kmax {
        let s = moment_summary(&data.column(k))?;
        let want = tilted_mean(params, data.n, k);
        out.push(CriterionResult::new(
            format!("mean_k{k}"),
            format!("mean of C_{k} under Q within 4 SE of the shift"),
            (s.mean - want).abs() <= 4.0 * s.se_mean,
            format!("mean {} vs {} se {}", fmt_sig(s.mean), fmt_sig(want), fmt_sig(s.se_mean)),
        ));
        let var = 2.0 * k as f64;
        out.push(CriterionResult::new(
            format!("variance_k{k}"),
            format!("variance of C_{k} under Q near 2k"),
            within_rel(s.variance, var, var_rel),
            format!("variance {} vs {} (rel tol {})", fmt_sig(s.variance), var, var_rel),
        ));
    }
    Ok(out)
}

/// Summary document written next to the replica data.
#[derive(Clone, Debug, Serialize)]
pub struct Summary {
    pub kind: ExperimentKind,
    pub config: ExperimentConfig,
    pub effective_config: String,
    pub assertions_enabled: bool,
    pub theory: Value,
    pub empirical: Value,
    pub checks: Vec<CriterionResult>,
    pub passed: bool,
}

/// Files written by [`run_and_write`].
#[derive(Clone, Debug, Default, Serialize)]
pub struct OutputFiles {
    pub summary_json: PathBuf,
    pub replicas_csv: Option<PathBuf>,
    pub plot_csv: Option<PathBuf>,
}

fn theory_json(cfg: &ExperimentConfig, k: usize) -> Result<Value> {
    let params = params_or_partial(cfg, k)?;
    let bxi = beta_xi(&cfg.mixture, BETA_XI_TOL)?;
    Ok(json!({
        "load": cfg.load(),
        "s2": finite_or_null(params.s2),
        "mean_shift": finite_or_null(params.mean_shift),
        "mu": params.mu,
        "k": k,
        "beta_xi": bxi,
    }))
}

fn finite_or_null(x: f64) -> Value {
    if x.is_finite() {
        json!(x)
    } else {
        Value::Null
    }
}

fn moments_json(values: &[f64]) -> Result<Value> {
    serde_json::to_value(moment_summary(values)?).map_err(|e| Error::Format(e.to_string()))
}

/// Runs the configured experiment, writes the replica CSV, plot data and
/// summary JSON under `cfg.out_dir`, and returns the summary.
pub fn run_and_write(cfg: &ExperimentConfig) -> Result<(Summary, OutputFiles)> {
    cfg.validate()?;
    let enabled = assertions_enabled(cfg)?;
    let k = cfg.resolve_k()?;
    let mut files = OutputFiles { summary_json: cfg.summary_json_path(), ..Default::default() };
    let (empirical, checks) = match cfg.kind {
        ExperimentKind::Fluct => {
            let data = run_fluct_experiment(cfg)?;
            write_text(&cfg.replicas_csv_path(), &data.replicas_csv())?;
            files.replicas_csv = Some(cfg.replicas_csv_path());
            let values = data.recentered();
            if enabled {
                write_text(&cfg.plot_csv_path(), &plot_data_csv(&values, data.params.mean_shift, data.params.s2)?)?;
                files.plot_csv = Some(cfg.plot_csv_path());
            }
            let checks = if enabled && values.len() >= 2 { fluct_checks(&data, 0.03, 0.25, 1e-2)? } else { vec![] };
            (json!({ "n": data.n, "recentered": moments_json(&values)? }), checks)
        }
        ExperimentKind::CyclesP | ExperimentKind::CyclesQ => {
            let tilted = cfg.kind == ExperimentKind::CyclesQ;
            let data = if tilted { run_tilted_experiment(cfg)? } else { run_cycles_experiment(cfg)? };
            write_text(&cfg.replicas_csv_path(), &data.replicas_csv())?;
            files.replicas_csv = Some(cfg.replicas_csv_path());
            let per_k = (1..=data.kmax)
                .map(|k| moments_json(&data.column(k)))
                .collect::<Result<Vec<_>>>()?;
            let checks = if cfg.replicas < 2 {
                vec![]
            } else if tilted {
                if enabled {
                    cycles_q_checks(&data, &params_or_partial(cfg, k)?, 0.10)?
                } else {
                    vec![]
                }
            } else {
                cycles_p_checks(&data, 0.05, 1e-3)?
            };
            (json!({ "n": data.n, "counts": per_k }), checks)
        }
        ExperimentKind::Residual => {
            let summary = residual_study(cfg)?;
            let mut csv = String::new();
            for data in &summary.datasets {
                let doc = data.replicas_csv();
                // one header for the whole sweep, with N prepended
                for (i, line) in doc.lines().enumerate() {
                    if i == 0 {
                        if csv.is_empty() {
                            csv.push_str(&format!("n,{line}\n"));
                        }
                    } else {
                        csv.push_str(&format!("{},{line}\n", data.n));
                    }
                }
            }
            write_text(&cfg.replicas_csv_path(), &csv)?;
            files.replicas_csv = Some(cfg.replicas_csv_path());
            let checks = if enabled && summary.rows.len() >= 2 {
                vec![CriterionResult::new(
                    "decreasing",
                    "median |residual| strictly decreasing in N",
                    summary.strictly_decreasing,
                    summary
                        .rows
                        .iter()
                        .map(|r| format!("N={}: {}", r.n, fmt_sig(r.median_abs_residual)))
                        .collect::<Vec<_>>()
                        .join(", "),
                )]
            } else {
                vec![]
            };
            let empirical = serde_json::to_value(&summary).map_err(|e| Error::Format(e.to_string()))?;
            (empirical, checks)
        }
        ExperimentKind::QnMixture => {
            let check = qn_mixture_check(cfg)?;
            let checks = vec![CriterionResult::new(
                "mixture",
                "importance-weighted P estimate matches direct Q frequency",
                check.passed,
                format!(
                    "{} vs {} (combined se {})",
                    fmt_sig(check.weighted_p),
                    fmt_sig(check.direct_q),
                    fmt_sig(check.combined_se)
                ),
            )];
            (serde_json::to_value(&check).map_err(|e| Error::Format(e.to_string()))?, checks)
        }
    };
    let summary = Summary {
        kind: cfg.kind,
        config: cfg.clone(),
        effective_config: cfg.to_text(),
        assertions_enabled: enabled,
        theory: theory_json(cfg, k)?,
        empirical,
        passed: checks.iter().all(|c| c.passed),
        checks,
    };
    write_json(&files.summary_json, &summary)?;
    Ok((summary, files))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::theory::{s2_truncated, Mixture};

    fn small(kind: ExperimentKind) -> ExperimentConfig {
        ExperimentConfig {
            kind,
            ns: vec![6],
            replicas: 12,
            master_seed: 42,
            k_policy: KPolicy::Explicit { k: 3 },
            ..ExperimentConfig::default()
        }
    }

    #[test]
    fn zero_temperature_replica() {
        let mut cfg = small(ExperimentKind::Fluct);
        cfg.beta = 0.0;
        cfg.replicas = 1;
        let data = run_fluct_experiment(&cfg).unwrap();
        let r = &data.records[0];
        assert_eq!(r.free_energy, 0.0);
        assert_eq!(r.recentered, 0.0);
        assert!(r.counts.iter().all(|c| c.is_finite()));
        assert_eq!(r.residual, 0.0);
        assert_eq!(s2_truncated(&data.params, 3) / 2.0 * 0.0, 0.0);
    }

    #[test]
    fn deterministic_and_ordered() {
        let cfg = small(ExperimentKind::Fluct);
        let a = run_fluct_experiment(&cfg).unwrap();
        let b = run_fluct_experiment(&ExperimentConfig { workers: 3, ..cfg.clone() }).unwrap();
        assert_eq!(a.replicas_csv(), b.replicas_csv());
        assert!(a.records.iter().enumerate().all(|(i, r)| r.replica_id == i));
        assert_eq!(a.records[5].child_seed, child_seed(42, 5));
    }

    #[test]
    fn residual_recomputes() {
        let data = run_fluct_experiment(&small(ExperimentKind::Fluct)).unwrap();
        for r in &data.records {
            assert!((r.recompute_residual(&data.params) - r.residual).abs() < 1e-12);
        }
    }

    #[test]
    fn replica_failure_names_the_replica() {
        let err = run_replicas(5, 1, 1, |r, _| if r == 3 { Err(Error::Overflow("test")) } else { Ok(r) })
            .unwrap_err();
        match err {
            Error::Replica { replica_id, seed, .. } => {
                assert_eq!(replica_id, 3);
                assert_eq!(seed, child_seed(1, 3));
            }
            other => panic!("unexpected {other:?}"),
        }
        let mut cfg = small(ExperimentKind::Fluct);
        cfg.ns = vec![30];
        assert!(matches!(run_fluct_experiment(&cfg), Err(Error::Replica { replica_id: 0, .. })));
    }

    #[test]
    fn residual_vanishes_at_zero_temperature() {
        let mut cfg = small(ExperimentKind::Residual);
        cfg.beta = 0.0;
        cfg.ns = vec![4, 6];
        let s = residual_study(&cfg).unwrap();
        assert!(s.rows.iter().all(|r| r.median_abs_residual == 0.0 && r.p90_abs_residual == 0.0));
        assert_eq!(s.deterministic_tail, 0.0);
    }

    #[test]
    fn tilted_at_zero_temperature_matches_goe_law() {
        let mut cfg = small(ExperimentKind::CyclesQ);
        cfg.beta = 0.0;
        cfg.replicas = 4000;
        cfg.ns = vec![10];
        let data = run_tilted_experiment(&cfg).unwrap();
        let params = fluct_params(&Mixture::sk(), 0.0, 3).unwrap();
        // at beta = 0 the Q checks are the P checks with the limiting variance
        let checks = cycles_q_checks(&data, &params, 0.5).unwrap();
        assert!(checks.iter().all(|c| c.passed), "{checks:?}");
        // C_2 and C_3 are far from Gaussian at N = 10, so skip the KS rows
        let p = cycles_p_checks(&data, 0.1, 1e-4).unwrap();
        assert!(p.iter().filter(|c| !c.id.starts_with("ks")).all(|c| c.passed), "{p:?}");
    }

    #[test]
    fn tilted_mean_formula() {
        let params = fluct_params(&Mixture::sk(), 0.5 / 2.0_f64.sqrt(), 3).unwrap();
        assert!((tilted_mean(&params, 50, 1) - 0.5).abs() < 1e-15);
        assert!((tilted_mean(&params, 50, 3) - 0.125 * 0.98 * 0.96).abs() < 1e-15);
    }

    #[test]
    fn gating_follows_the_critical_load() {
        let mut cfg = ExperimentConfig::default();
        assert!(assertions_enabled(&cfg).unwrap());
        cfg.beta = 0.71;
        assert!(!assertions_enabled(&cfg).unwrap());
        cfg.beta = 0.8;
        assert!(!assertions_enabled(&cfg).unwrap());
        // runs above the threshold are still allowed
        cfg.ns = vec![5];
        cfg.replicas = 3;
        cfg.k_policy = KPolicy::Explicit { k: 2 };
        let data = run_fluct_experiment(&cfg).unwrap();
        assert!(data.params.s2.is_infinite());
        assert!(data.records.iter().all(|r| r.fluct_sum.is_finite()));
    }

    #[test]
    fn sweep_seeds_differ() {
        assert_ne!(sweep_seed(1, 8), sweep_seed(1, 12));
        assert_ne!(sweep_seed(1, 8), sweep_seed(2, 8));
    }
}
