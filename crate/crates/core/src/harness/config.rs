//! Experiment configuration and its flat `key = value` text form.
//!
//! ```text
//! # desk-scale defaults
//! kind = fluct
//! mixture = 2:1
//! beta = 0.4
//! n = 16
//! replicas = 1000
//! seed = 7
//! eps = 0.05
//! delta = 0.01
//! ```

use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

use serde::Serialize;

use crate::cycles::MAX_K;
use crate::error::{Error, Result};
use crate::theory::{fluct_params, truncation_k, Mixture};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum ExperimentKind {
    Fluct,
    CyclesP,
    CyclesQ,
    Residual,
    QnMixture,
}

impl ExperimentKind {
    pub fn as_str(self) -> &'static str {
        match self {
            Self::Fluct => "fluct",
            Self::CyclesP => "cycles-P",
            Self::CyclesQ => "cycles-Q",
            Self::Residual => "residual",
            Self::QnMixture => "qn-mixture",
        }
    }

    /// Stem used for output file names.
    pub fn file_stem(self) -> &'static str {
        match self {
            Self::Fluct => "fluct",
            Self::CyclesP => "cycles",
            Self::CyclesQ => "tilted",
            Self::Residual => "residual",
            Self::QnMixture => "qn_mixture",
        }
    }
}

impl fmt::Display for ExperimentKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for ExperimentKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "fluct" => Ok(Self::Fluct),
            "cycles-P" | "cycles" => Ok(Self::CyclesP),
            "cycles-Q" | "tilted" => Ok(Self::CyclesQ),
            "residual" => Ok(Self::Residual),
            "qn-mixture" => Ok(Self::QnMixture),
            other => Err(Error::Format(format!("unknown experiment kind {other:?}"))),
        }
    }
}

/// How many cycle counts enter the fluctuation sum.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
#[serde(tag = "policy", rename_all = "lowercase")]
pub enum KPolicy {
    Explicit { k: usize },
    /// Smallest `K` whose tail bound at `eps` is below `delta`, capped at
    /// the largest supported cycle length.
    Truncation { eps: f64, delta: f64 },
}

impl Default for KPolicy {
    fn default() -> Self {
        Self::Truncation { eps: 0.05, delta: 0.01 }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ExperimentConfig {
    pub kind: ExperimentKind,
    #[serde(serialize_with = "serialize_display")]
    pub mixture: Mixture,
    pub beta: f64,
    pub ns: Vec<usize>,
    pub replicas: usize,
    pub master_seed: u64,
    pub k_policy: KPolicy,
    /// Worker threads; `0` uses every available core.
    pub workers: usize,
    pub out_dir: PathBuf,
}

fn serialize_display<T: fmt::Display, S: serde::Serializer>(v: &T, s: S) -> std::result::Result<S::Ok, S::Error> {
    s.collect_str(v)
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            kind: ExperimentKind::Fluct,
            mixture: Mixture::sk(),
            beta: 0.4,
            ns: vec![16],
            replicas: 1000,
            master_seed: 0,
            k_policy: KPolicy::default(),
            workers: 0,
            out_dir: PathBuf::from("."),
        }
    }
}

impl ExperimentConfig {
    pub fn with_kind(kind: ExperimentKind) -> Self {
        Self { kind, ..Self::default() }
    }

    /// The single system size of a non-sweep experiment.
    pub fn single_n(&self) -> Result<usize> {
        match self.ns.as_slice() {
            [n] => Ok(*n),
            other => Err(Error::InvalidParameter(format!(
                "{} needs exactly one N, got {}",
                self.kind,
                other.len()
            ))),
        }
    }

    /// `2 alpha2 beta^2`.
    pub fn load(&self) -> f64 {
        2.0 * self.mixture.alpha2() * self.beta * self.beta
    }

    /// Number of cycle counts to use under the configured policy.
    pub fn resolve_k(&self) -> Result<usize> {
        match self.k_policy {
            KPolicy::Explicit { k } => {
                if (1..=MAX_K).contains(&k) {
                    Ok(k)
                } else {
                    Err(Error::KmaxOutOfRange(k, MAX_K))
                }
            }
            KPolicy::Truncation { eps, delta } => {
                if self.load() >= 1.0 {
                    return Ok(MAX_K);
                }
                let params = fluct_params(&self.mixture, self.beta, 1)?;
                Ok(truncation_k(&params, eps, delta)?.min(MAX_K))
            }
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.beta >= 0.0 && self.beta.is_finite()) {
            return Err(Error::Domain { value: self.beta, domain: "beta >= 0" });
        }
        if self.ns.is_empty() || self.ns.contains(&0) {
            return Err(Error::InvalidParameter("N must be a non-empty list of positive sizes".into()));
        }
        if self.replicas == 0 {
            return Err(Error::InvalidParameter("replicas must be positive".into()));
        }
        self.resolve_k()?;
        Ok(())
    }

    pub fn replicas_csv_path(&self) -> PathBuf {
        self.out_dir.join(format!("{}_replicas.csv", self.kind.file_stem()))
    }

    pub fn summary_json_path(&self) -> PathBuf {
        self.out_dir.join(format!("{}_summary.json", self.kind.file_stem()))
    }

    pub fn plot_csv_path(&self) -> PathBuf {
        self.out_dir.join(format!("{}_plot.csv", self.kind.file_stem()))
    }

    /// Applies one `key = value` setting.
    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        let value = value.trim();
        let bad = |what: &str, e: &dyn fmt::Display| Error::Format(format!("{what} = {value:?}: {e}"));
        match key.trim() {
            "kind" => self.kind = value.parse()?,
            "mixture" => self.mixture = value.parse()?,
            "beta" => self.beta = value.parse().map_err(|e| bad("beta", &e))?,
            "n" => {
                self.ns = value
                    .split(',')
                    .map(|s| s.trim().parse::<usize>())
                    .collect::<std::result::Result<_, _>>()
                    .map_err(|e| bad("n", &e))?
            }
            "replicas" => self.replicas = value.parse().map_err(|e| bad("replicas", &e))?,
            "seed" => self.master_seed = value.parse().map_err(|e| bad("seed", &e))?,
            "kmax" => self.k_policy = KPolicy::Explicit { k: value.parse().map_err(|e| bad("kmax", &e))? },
            "eps" | "delta" => {
                let x: f64 = value.parse().map_err(|e| bad(key, &e))?;
                let (mut eps, mut delta) = match self.k_policy {
                    KPolicy::Truncation { eps, delta } => (eps, delta),
                    KPolicy::Explicit { .. } => (0.05, 0.01),
                };
                if key.trim() == "eps" {
                    eps = x;
                } else {
                    delta = x;
                }
                self.k_policy = KPolicy::Truncation { eps, delta };
            }
            "workers" => self.workers = value.parse().map_err(|e| bad("workers", &e))?,
            "out" => self.out_dir = PathBuf::from(value),
            other => return Err(Error::Format(format!("unknown config key {other:?}"))),
        }
        Ok(())
    }

    /// Applies every setting of a config document on top of `self`.
    pub fn apply_text(&mut self, text: &str) -> Result<()> {
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| Error::Format(format!("line {}: expected key = value", lineno + 1)))?;
            self.set(key, value)
                .map_err(|e| Error::Format(format!("line {}: {e}", lineno + 1)))?;
        }
        Ok(())
    }

    pub fn from_text(text: &str) -> Result<Self> {
        let mut cfg = Self::default();
        cfg.apply_text(text)?;
        Ok(cfg)
    }

    /// The effective configuration in the text form accepted by
    /// [`from_text`](Self::from_text).
    pub fn to_text(&self) -> String {
        let ns: Vec<String> = self.ns.iter().map(|n| n.to_string()).collect();
        let mut out = format!(
            "kind = {}\nmixture = {}\nbeta = {}\nn = {}\nreplicas = {}\nseed = {}\n",
            self.kind,
            self.mixture,
            self.beta,
            ns.join(", "),
            self.replicas,
            self.master_seed
        );
        match self.k_policy {
            KPolicy::Explicit { k } => out.push_str(&format!("kmax = {k}\n")),
            KPolicy::Truncation { eps, delta } => out.push_str(&format!("eps = {eps}\ndelta = {delta}\n")),
        }
        out.push_str(&format!("workers = {}\nout = {}\n", self.workers, self.out_dir.display()));
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parse_example_document() {
        let cfg = ExperimentConfig::from_text(
            "# comment\nkind = residual\nmixture = 2:1.0, 3:0.5  # trailing\nbeta=0.3\nn = 8, 12\nreplicas = 20\nseed = 9\nkmax = 4\n",
        )
        .unwrap();
        assert_eq!(cfg.kind, ExperimentKind::Residual);
        assert_eq!(cfg.mixture.alpha(3), 0.5);
        assert_eq!(cfg.ns, vec![8, 12]);
        assert_eq!(cfg.k_policy, KPolicy::Explicit { k: 4 });
        assert_eq!(cfg.resolve_k().unwrap(), 4);
    }

    #[test]
    fn text_round_trip() {
        let mut cfg = ExperimentConfig::with_kind(ExperimentKind::CyclesQ);
        cfg.mixture = "2:0.5, 4:0.25".parse().unwrap();
        cfg.beta = 0.1 + 0.2;
        cfg.ns = vec![8, 12, 16];
        cfg.master_seed = u64::MAX;
        cfg.out_dir = PathBuf::from("out/run 1");
        let back = ExperimentConfig::from_text(&cfg.to_text()).unwrap();
        assert_eq!(back, cfg);
    }

    #[test]
    fn rejects_bad_input() {
        assert!(ExperimentConfig::from_text("beta 0.4").is_err());
        assert!(ExperimentConfig::from_text("colour = blue").is_err());
        assert!(ExperimentConfig::from_text("kind = magic").is_err());
        assert!(ExperimentConfig::from_text("n = 3, x").is_err());
        let cfg = ExperimentConfig { k_policy: KPolicy::Explicit { k: 9 }, ..ExperimentConfig::default() };
        assert!(cfg.validate().is_err());
    }

    #[test]
    fn truncation_policy() {
        let cfg = ExperimentConfig::default();
        // load 0.32 needs K = 8 before the cap would bind
        assert_eq!(cfg.resolve_k().unwrap(), 8);
        let mut hot = cfg.clone();
        hot.beta = 0.8;
        assert_eq!(hot.resolve_k().unwrap(), MAX_K);
        let mut cold = cfg;
        cold.beta = 0.1;
        assert!(cold.resolve_k().unwrap() < 8);
    }
}
