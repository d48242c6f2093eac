//! Exact free energies by full enumeration of `{±1}^N`.
//!
//! The Hamiltonian is first rewritten as a multilinear polynomial
//! `sum_S c_S prod_{i in S} σ_i` (using `σ_i^2 = 1`). The enumeration walks the
//! reflected binary Gray code; flipping spin `s` negates exactly the terms
//! with `s ∈ S`, so the energy update costs one pass over the terms incident
//! to `s`. For the 2-spin part this is `O(N)` per flip, and `O(N^{p-1})` for
//! an order-`p` tensor.

use std::collections::HashMap;

use crate::error::{Error, Result};
use crate::model::{hamiltonian_eval, DisorderRealization, GaussianStream, SpinConfig};
use crate::theory::LogSumExp;

/// Largest `N` that will be enumerated.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct EnumLimits {
    pub max_n_pure: usize,
    pub max_n_mixed: usize,
}

impl Default for EnumLimits {
    fn default() -> Self {
        Self { max_n_pure: 26, max_n_mixed: 20 }
    }
}

impl EnumLimits {
    fn check(&self, d: &DisorderRealization) -> Result<()> {
        let limit = if d.tensors().is_empty() { self.max_n_pure } else { self.max_n_mixed };
        if d.n() > limit || d.n() >= 63 {
            return Err(Error::EnumerationLimit { n: d.n(), limit });
        }
        Ok(())
    }
}

/// Steps between from-scratch recomputations of the running energy.
const SPOT_CHECK_INTERVAL: u64 = 1 << 16;
const SPOT_CHECK_RTOL: f64 = 1e-9;

/// Which part of the Hamiltonian to enumerate.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Part {
    Full,
    /// Only the tensors of order `p >= 3`.
    Tilde,
}

/// Multilinear form of the Hamiltonian with cached term values for the
/// current configuration.
struct EnumerationState<'a> {
    d: &'a DisorderRealization,
    part: Part,
    sigma: SpinConfig,
    constant: f64,
    /// `c_S prod_{i in S} σ_i` for the current `σ`.
    term_values: Vec<f64>,
    /// `incident[s]` lists the terms containing spin `s`.
    incident: Vec<Vec<u32>>,
    energy: f64,
}

impl<'a> EnumerationState<'a> {
    /// Reduces the Hamiltonian at the all-down configuration.
    fn new(d: &'a DisorderRealization, part: Part) -> Self {
        let n = d.n();
        let nf = n as f64;
        let mut coeffs: HashMap<Vec<u16>, f64> = HashMap::new();
        let mut constant = 0.0;

        let a2 = d.mixture().alpha2();
        if part == Part::Full && a2 > 0.0 {
            let scale = a2.sqrt() / (2.0 * nf).sqrt();
            let goe = d.goe();
            for i in 0..n {
                constant += scale * goe.get(i, i);
                for j in i + 1..n {
                    *coeffs.entry(vec![i as u16, j as u16]).or_default() += 2.0 * scale * goe.get(i, j);
                }
            }
        }

        let mut idx = Vec::new();
        for t in d.tensors() {
            let p = t.p();
            let scale = d.mixture().alpha(p).sqrt() * nf.powf(-((p - 1) as f64) / 2.0);
            for (flat, &g) in t.data().iter().enumerate() {
                // decode the multi-index and keep the indices of odd multiplicity
                idx.clear();
                let mut rest = flat;
                for _ in 0..p {
                    idx.push((rest % n) as u16);
                    rest /= n;
                }
                idx.sort_unstable();
                let mut odd: Vec<u16> = Vec::with_capacity(p);
                let mut k = 0;
                while k < idx.len() {
                    let mut run = 1;
                    while k + run < idx.len() && idx[k + run] == idx[k] {
                        run += 1;
                    }
                    if run % 2 == 1 {
                        odd.push(idx[k]);
                    }
                    k += run;
                }
                if odd.is_empty() {
                    constant += scale * g;
                } else {
                    *coeffs.entry(odd).or_default() += scale * g;
                }
            }
        }

        // sort for a deterministic term order independent of hashing
        let mut terms: Vec<(Vec<u16>, f64)> = coeffs.into_iter().collect();
        terms.sort_by(|a, b| a.0.len().cmp(&b.0.len()).then_with(|| a.0.cmp(&b.0)));

        let sigma = SpinConfig::from_index(0, n);
        let mut incident = vec![Vec::new(); n];
        let mut term_values = Vec::with_capacity(terms.len());
        for (t, (set, c)) in terms.iter().enumerate() {
            for &i in set {
                incident[i as usize].push(t as u32);
            }
            // all spins are -1
            term_values.push(if set.len() % 2 == 0 { *c } else { -*c });
        }
        let mut state = Self { d, part, sigma, constant, term_values, incident, energy: 0.0 };
        state.energy = state.summed_terms();
        state
    }

    fn summed_terms(&self) -> f64 {
        self.constant + self.term_values.iter().sum::<f64>()
    }

    #[inline]
    fn flip(&mut self, s: usize) {
        let mut delta = 0.0;
        for &t in &self.incident[s] {
            let v = &mut self.term_values[t as usize];
            delta -= 2.0 * *v;
            *v = -*v;
        }
        self.sigma.flip(s);
        self.energy += delta;
    }

    fn recompute_from_scratch(&self) -> Result<f64> {
        match self.part {
            Part::Full => hamiltonian_eval(self.d, &self.sigma),
            Part::Tilde => self.d.tilde_energy(&self.sigma),
        }
    }

    /// Compares the running energy with an independent evaluation and then
    /// resynchronises it with the cached terms.
    fn spot_check(&mut self) -> Result<()> {
        let recomputed = self.recompute_from_scratch()?;
        let scale = recomputed.abs().max(self.energy.abs()).max(self.d.n() as f64);
        if (recomputed - self.energy).abs() > SPOT_CHECK_RTOL * scale {
            return Err(Error::Drift { cached: self.energy, recomputed });
        }
        self.energy = self.summed_terms();
        Ok(())
    }

    /// Visits every configuration in Gray-code order, calling
    /// `visit(config_index, energy)`.
    fn enumerate(mut self, mut visit: impl FnMut(u64, f64)) -> Result<()> {
        let n = self.d.n();
        visit(0, self.energy);
        let total: u64 = 1 << n;
        for step in 1..total {
            let s = step.trailing_zeros() as usize;
            self.flip(s);
            if step % SPOT_CHECK_INTERVAL == 0 {
                self.spot_check()?;
            }
            visit(step ^ (step >> 1), self.energy);
        }
        Ok(())
    }
}

/// `log(mean(exp(x)))` over the values, via a running-max log-sum-exp.
pub fn log_average_exp<I: IntoIterator<Item = f64>>(values: I) -> f64 {
    let mut acc = LogSumExp::new();
    let mut count = 0usize;
    for v in values {
        acc.add(v);
        count += 1;
    }
    acc.value() - (count as f64).ln()
}

/// `F_N = log(2^{-N} sum_σ exp(beta H(σ)))` by Gray-code enumeration.
pub fn free_energy_exact(d: &DisorderRealization, beta: f64) -> Result<f64> {
    free_energy_exact_with(d, beta, &EnumLimits::default())
}

pub fn free_energy_exact_with(d: &DisorderRealization, beta: f64, limits: &EnumLimits) -> Result<f64> {
    if !(beta >= 0.0) {
        return Err(Error::Domain { value: beta, domain: "beta >= 0" });
    }
    limits.check(d)?;
    if beta == 0.0 {
        return Ok(0.0);
    }
    let mut acc = LogSumExp::new();
    EnumerationState::new(d, Part::Full).enumerate(|_, e| acc.add(beta * e))?;
    Ok(acc.value() - d.n() as f64 * std::f64::consts::LN_2)
}

/// Reference free energy that evaluates `H(σ)` from scratch for every `σ`.
pub fn free_energy_bruteforce(d: &DisorderRealization, beta: f64) -> Result<f64> {
    let n = d.n();
    if n >= 30 {
        return Err(Error::EnumerationLimit { n, limit: 29 });
    }
    let energies = (0..1u64 << n)
        .map(|idx| hamiltonian_eval(d, &SpinConfig::from_index(idx, n)))
        .collect::<Result<Vec<f64>>>()?;
    Ok(log_average_exp(energies.into_iter().map(|e| beta * e)))
}

/// `F_N - N beta^2 xi(1) / 2`, the logarithm of `Z_N / E[Z_N]`.
pub fn recentered_free_energy(d: &DisorderRealization, beta: f64) -> Result<f64> {
    let f = free_energy_exact(d, beta)?;
    Ok(f - d.n() as f64 * beta * beta * d.mixture().xi_unchecked(1.0) / 2.0)
}

/// Gibbs probabilities of `exp(beta H~(σ))` indexed by
/// [`SpinConfig::to_index`], where `H~` keeps only the orders `p >= 3`.
pub fn gibbs_probabilities(d: &DisorderRealization, beta: f64) -> Result<Vec<f64>> {
    EnumLimits::default().check(d)?;
    let n = d.n();
    let mut log_w = vec![0.0; 1 << n];
    if beta != 0.0 && !d.tensors().is_empty() {
        EnumerationState::new(d, Part::Tilde).enumerate(|idx, e| log_w[idx as usize] = beta * e)?;
    }
    Ok(normalize_log_weights(&log_w))
}

/// `exp(log_w - logsumexp(log_w))`.
pub fn normalize_log_weights(log_w: &[f64]) -> Vec<f64> {
    let mut acc = LogSumExp::new();
    log_w.iter().for_each(|&x| acc.add(x));
    let z = acc.value();
    log_w.iter().map(|&x| (x - z).exp()).collect()
}

/// Inverse-CDF draw from normalised probabilities with a uniform `u` in `[0, 1)`.
pub fn sample_index(probs: &[f64], u: f64) -> usize {
    let mut cum = 0.0;
    for (i, &p) in probs.iter().enumerate() {
        cum += p;
        if u < cum {
            return i;
        }
    }
    // rounding left the total a hair below one
    probs.iter().rposition(|&p| p > 0.0).unwrap_or(0)
}

/// Exact draw of `σ` with probability proportional to `exp(beta H~(σ))`.
/// Without tensors (or at `beta = 0`) this is a uniform spin vector.
pub fn gibbs_sample_exact(d: &DisorderRealization, beta: f64, seed: u64) -> Result<SpinConfig> {
    let n = d.n();
    let mut stream = GaussianStream::new(seed);
    if beta == 0.0 || d.tensors().is_empty() {
        return Ok(SpinConfig::uniform(n, &mut stream));
    }
    let probs = gibbs_probabilities(d, beta)?;
    Ok(SpinConfig::from_index(sample_index(&probs, stream.uniform()) as u64, n))
}
