//! Disorder sampling and Hamiltonian evaluation.
//!
//! The Hamiltonian is `H(σ) = sqrt(alpha2) H2(σ) + sum_{p>=3} sqrt(alpha_p) Hp(σ)`
//! with `H2(σ) = (2N)^{-1/2} sum_{i,j} J_ij σ_i σ_j` for a GOE matrix `J`, and
//! `Hp(σ) = N^{-(p-1)/2} sum g_{i1..ip} σ_i1 ... σ_ip` for an i.i.d. standard
//! Gaussian tensor `g`. Both pieces have variance `N` at every `σ`, so
//! `Cov(H(σ), H(σ')) = N xi(σ·σ'/N)`.

mod dump;
pub mod rng;

pub use dump::{read_disorder, write_disorder, DUMP_MAGIC, DUMP_VERSION};
pub use rng::{child_seed, splitmix64, GaussianStream};

use crate::error::{Error, Result};
use crate::theory::Mixture;

/// Real symmetric matrix with each `J_ij = J_ji` stored once.
#[derive(Clone, Debug, PartialEq)]
pub struct GoeMatrix {
    n: usize,
    /// Row-major upper triangle including the diagonal.
    upper: Vec<f64>,
}

impl GoeMatrix {
    /// Builds a matrix from its row-major upper triangle.
    pub fn from_upper(n: usize, upper: Vec<f64>) -> Result<Self> {
        let expected = n * (n + 1) / 2;
        if upper.len() != expected {
            return Err(Error::DimensionMismatch { expected, got: upper.len() });
        }
        Ok(Self { n, upper })
    }

    /// Builds a matrix from a dense row-major array, reading the upper
    /// triangle only.
    pub fn from_dense(n: usize, dense: &[f64]) -> Result<Self> {
        if dense.len() != n * n {
            return Err(Error::DimensionMismatch { expected: n * n, got: dense.len() });
        }
        let upper = (0..n).flat_map(|i| (i..n).map(move |j| dense[i * n + j])).collect();
        Ok(Self { n, upper })
    }

    /// Draws the upper triangle row by row from `stream`: `N(0, 2)` on the
    /// diagonal and `N(0, 1)` off it.
    pub fn sample_from(stream: &mut GaussianStream, n: usize) -> Self {
        let mut upper = Vec::with_capacity(n * (n + 1) / 2);
        for i in 0..n {
            for j in i..n {
                let z = stream.normal();
                upper.push(if i == j { std::f64::consts::SQRT_2 * z } else { z });
            }
        }
        Self { n, upper }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.upper[self.offset(i, j)]
    }

    #[inline]
    fn offset(&self, i: usize, j: usize) -> usize {
        let (i, j) = if i <= j { (i, j) } else { (j, i) };
        // rows 0..i hold n + (n-1) + ... + (n-i+1) entries
        i * self.n - i * i.saturating_sub(1) / 2 + (j - i)
    }

    pub fn upper(&self) -> &[f64] {
        &self.upper
    }

    pub fn to_dense(&self) -> Vec<f64> {
        let n = self.n;
        let mut out = vec![0.0; n * n];
        for i in 0..n {
            for j in i..n {
                let v = self.get(i, j);
                out[i * n + j] = v;
                out[j * n + i] = v;
            }
        }
        out
    }
}

pub fn sample_goe(n: usize, seed: u64) -> GoeMatrix {
    GoeMatrix::sample_from(&mut GaussianStream::new(seed), n)
}

/// GOE matrix whose entries carry the mean `beta sqrt(2 alpha2) σ_i σ_j / sqrt(N)`
/// (diagonal included). With the same seed the result equals
/// `sample_goe(n, seed)` plus that deterministic shift.
pub fn sample_tilted_goe(
    n: usize,
    sigma: &SpinConfig,
    beta: f64,
    alpha2: f64,
    seed: u64,
) -> Result<GoeMatrix> {
    if sigma.len() != n {
        return Err(Error::DimensionMismatch { expected: n, got: sigma.len() });
    }
    let mut j = sample_goe(n, seed);
    add_tilt(&mut j, sigma, beta, alpha2);
    Ok(j)
}

/// Adds `beta sqrt(2 alpha2) σ_i σ_j / sqrt(N)` to every stored entry.
pub fn add_tilt(j: &mut GoeMatrix, sigma: &SpinConfig, beta: f64, alpha2: f64) {
    let n = j.n;
    let m = tilt_strength(n, beta, alpha2);
    let mut idx = 0;
    for a in 0..n {
        for b in a..n {
            j.upper[idx] += m * sigma.spin_f64(a) * sigma.spin_f64(b);
            idx += 1;
        }
    }
}

/// `beta sqrt(2 alpha2) / sqrt(N)`.
pub fn tilt_strength(n: usize, beta: f64, alpha2: f64) -> f64 {
    beta * (2.0 * alpha2).sqrt() / (n as f64).sqrt()
}

/// A point of `{-1, +1}^N`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct SpinConfig(Vec<i8>);

impl SpinConfig {
    pub fn new(spins: Vec<i8>) -> Result<Self> {
        if let Some(&s) = spins.iter().find(|&&s| s != 1 && s != -1) {
            return Err(Error::InvalidParameter(format!("spin value {s} is not ±1")));
        }
        Ok(Self(spins))
    }

    pub fn all_up(n: usize) -> Self {
        Self(vec![1; n])
    }

    /// Spin `i` is `+1` exactly when bit `i` of `index` is set.
    pub fn from_index(index: u64, n: usize) -> Self {
        Self((0..n).map(|i| if index >> i & 1 == 1 { 1 } else { -1 }).collect())
    }

    pub fn to_index(&self) -> u64 {
        self.0
            .iter()
            .enumerate()
            .filter(|(_, &s)| s == 1)
            .fold(0, |acc, (i, _)| acc | 1 << i)
    }

    pub fn uniform(n: usize, stream: &mut GaussianStream) -> Self {
        Self((0..n).map(|_| if stream.bit() { 1 } else { -1 }).collect())
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn spins(&self) -> &[i8] {
        &self.0
    }

    #[inline]
    pub fn spin_f64(&self, i: usize) -> f64 {
        self.0[i] as f64
    }

    pub fn flipped(&self) -> Self {
        Self(self.0.iter().map(|s| -s).collect())
    }

    pub fn flip(&mut self, i: usize) {
        self.0[i] = -self.0[i];
    }

    /// `σ·σ' / N`.
    pub fn overlap(&self, other: &Self) -> f64 {
        let dot: i64 = self.0.iter().zip(&other.0).map(|(&a, &b)| (a * b) as i64).sum();
        dot as f64 / self.len() as f64
    }

    fn as_f64(&self) -> Vec<f64> {
        self.0.iter().map(|&s| s as f64).collect()
    }
}

/// `(2N)^{-1/2} sum_{i,j} J_ij σ_i σ_j`, diagonal included.
pub fn h2_eval(goe: &GoeMatrix, sigma: &SpinConfig) -> Result<f64> {
    let n = goe.n();
    if sigma.len() != n {
        return Err(Error::DimensionMismatch { expected: n, got: sigma.len() });
    }
    let mut sum = 0.0;
    let mut idx = 0;
    for i in 0..n {
        let si = sigma.spin_f64(i);
        sum += goe.upper[idx];
        idx += 1;
        let mut row = 0.0;
        for j in i + 1..n {
            row += goe.upper[idx] * sigma.spin_f64(j);
            idx += 1;
        }
        sum += 2.0 * si * row;
    }
    Ok(sum / (2.0 * n as f64).sqrt())
}

/// Order-`p` array of independent standard Gaussians, stored row-major with
/// `n^p` entries.
#[derive(Clone, Debug, PartialEq)]
pub struct CouplingTensor {
    p: usize,
    n: usize,
    data: Vec<f64>,
}

impl CouplingTensor {
    pub fn new(p: usize, n: usize, data: Vec<f64>) -> Result<Self> {
        let expected = n.pow(p as u32);
        if data.len() != expected {
            return Err(Error::DimensionMismatch { expected, got: data.len() });
        }
        Ok(Self { p, n, data })
    }

    pub fn sample_from(stream: &mut GaussianStream, p: usize, n: usize) -> Self {
        let data = (0..n.pow(p as u32)).map(|_| stream.normal()).collect();
        Self { p, n, data }
    }

    pub fn p(&self) -> usize {
        self.p
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    /// Entry at the multi-index `idx` (length `p`).
    pub fn get(&self, idx: &[usize]) -> f64 {
        self.data[idx.iter().fold(0, |acc, &i| acc * self.n + i)]
    }
}

/// `N^{-(p-1)/2} sum g_{i1..ip} σ_i1 ... σ_ip`.
pub fn hp_eval(tensor: &CouplingTensor, sigma: &SpinConfig) -> Result<f64> {
    let n = tensor.n;
    if sigma.len() != n {
        return Err(Error::DimensionMismatch { expected: n, got: sigma.len() });
    }
    let s = sigma.as_f64();
    // contract the last index repeatedly
    let mut cur: Vec<f64> = tensor
        .data
        .chunks_exact(n.max(1))
        .map(|row| row.iter().zip(&s).map(|(g, x)| g * x).sum())
        .collect();
    for _ in 1..tensor.p {
        cur = cur
            .chunks_exact(n.max(1))
            .map(|row| row.iter().zip(&s).map(|(g, x)| g * x).sum())
            .collect();
    }
    Ok(cur[0] * (n as f64).powf(-((tensor.p - 1) as f64) / 2.0))
}

/// One draw of the quenched randomness for a given mixture and size.
#[derive(Clone, Debug, PartialEq)]
pub struct DisorderRealization {
    goe: GoeMatrix,
    tensors: Vec<CouplingTensor>,
    mixture: Mixture,
    seed: u64,
}

impl DisorderRealization {
    /// Samples the GOE matrix and then one tensor per active order `p >= 3`
    /// (ascending) from a single stream seeded with `seed`. For a pure
    /// 2-spin mixture the matrix equals `sample_goe(n, seed)`.
    pub fn sample(mixture: &Mixture, n: usize, seed: u64) -> Self {
        let mut stream = GaussianStream::new(seed);
        let goe = GoeMatrix::sample_from(&mut stream, n);
        let tensors = mixture
            .higher_orders()
            .map(|(p, _)| CouplingTensor::sample_from(&mut stream, p, n))
            .collect();
        Self { goe, tensors, mixture: mixture.clone(), seed }
    }

    pub fn from_parts(
        mixture: Mixture,
        goe: GoeMatrix,
        tensors: Vec<CouplingTensor>,
        seed: u64,
    ) -> Result<Self> {
        let n = goe.n();
        let orders: Vec<usize> = mixture.higher_orders().map(|(p, _)| p).collect();
        let got: Vec<usize> = tensors.iter().map(|t| t.p).collect();
        if orders != got {
            return Err(Error::InvalidParameter(format!(
                "tensor orders {got:?} do not match the mixture's {orders:?}"
            )));
        }
        if let Some(t) = tensors.iter().find(|t| t.n != n) {
            return Err(Error::DimensionMismatch { expected: n, got: t.n });
        }
        Ok(Self { goe, tensors, mixture, seed })
    }

    pub fn n(&self) -> usize {
        self.goe.n()
    }

    pub fn goe(&self) -> &GoeMatrix {
        &self.goe
    }

    pub fn tensors(&self) -> &[CouplingTensor] {
        &self.tensors
    }

    pub fn mixture(&self) -> &Mixture {
        &self.mixture
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    /// `sum_{p>=3} sqrt(alpha_p) Hp(σ)`.
    pub fn tilde_energy(&self, sigma: &SpinConfig) -> Result<f64> {
        self.tensors.iter().try_fold(0.0, |acc, t| {
            Ok(acc + self.mixture.alpha(t.p).sqrt() * hp_eval(t, sigma)?)
        })
    }
}

pub fn hamiltonian_eval(d: &DisorderRealization, sigma: &SpinConfig) -> Result<f64> {
    let a2 = d.mixture.alpha2();
    let two = if a2 > 0.0 { a2.sqrt() * h2_eval(&d.goe, sigma)? } else { 0.0 };
    Ok(two + d.tilde_energy(sigma)?)
}
