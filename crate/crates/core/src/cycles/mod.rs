//! Centred weighted cycle counts
//! `C_{N,k} = N^{-k/2} sum_{i_0..i_{k-1} distinct} J_{i0 i1} ... J_{i_{k-1} i0} - (N-1) 1_{k=2}`.
//!
//! Two independent algorithms:
//!
//! * [`cycle_counts_naive`] enumerates one canonical representative per
//!   cycle (smallest vertex first, then the smaller of its two neighbours)
//!   and multiplies by the orbit size.
//! * [`cycle_counts_mobius`] drops the distinctness constraint with Möbius
//!   inversion on the lattice of set partitions of the `k` positions. Each
//!   partition contributes an unconstrained sum over labelings of its blocks,
//!   which is a tensor-network contraction of the quotient multigraph.

mod contract;
mod partitions;

pub use contract::{contract_all, DenseSym, Factor, Scalar};
pub use partitions::{
    partition_table, quotient_classes, set_partitions, PartitionDescriptor, QuotientClass, MAX_K,
};

use serde::Serialize;

use crate::error::{Error, Result};
use crate::harness::output::fmt_sig;
use crate::model::GoeMatrix;
use crate::theory::FluctParams;

/// Operation budget for the canonical enumeration.
pub const NAIVE_COST_GUARD: f64 = 5e9;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Algorithm {
    Naive,
    Mobius,
}

impl Algorithm {
    pub fn as_str(self) -> &'static str {
        match self {
            Algorithm::Naive => "naive",
            Algorithm::Mobius => "mobius",
        }
    }
}

pub const CSV_HEADER: &str = "replica_id,k,value,algorithm";

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CycleCountVector {
    pub n: usize,
    pub kmax: usize,
    /// `values[k-1] = C_{N,k}`.
    pub values: Vec<f64>,
    pub algorithm: Algorithm,
}

impl CycleCountVector {
    pub fn get(&self, k: usize) -> f64 {
        self.values[k - 1]
    }

    /// One CSV line per `k`: `replica_id,k,value,algorithm`.
    pub fn csv_rows(&self, replica_id: usize) -> String {
        self.values
            .iter()
            .enumerate()
            .map(|(i, v)| format!("{replica_id},{},{},{}\n", i + 1, fmt_sig(*v), self.algorithm.as_str()))
            .collect()
    }
}

fn scale_and_center(n: usize, k: usize, raw: f64) -> f64 {
    if k > n {
        return 0.0;
    }
    let c = raw * (n as f64).powf(-(k as f64) / 2.0);
    if k == 2 {
        c - (n as f64 - 1.0)
    } else {
        c
    }
}

fn falling_factorial_f64(n: usize, k: usize) -> f64 {
    (0..k).map(|i| n as f64 - i as f64).product::<f64>().max(0.0)
}

/// Canonical-representative enumeration.
pub fn cycle_counts_naive(j: &GoeMatrix, kmax: usize) -> Result<CycleCountVector> {
    let n = j.n();
    if kmax == 0 {
        return Err(Error::KmaxOutOfRange(0, usize::MAX));
    }
    let ops: f64 = (3..=kmax.min(n)).map(|k| falling_factorial_f64(n, k) / 2.0).sum();
    if ops > NAIVE_COST_GUARD {
        return Err(Error::CostGuard { ops, limit: NAIVE_COST_GUARD });
    }
    let dense = j.to_dense();
    let at = |a: usize, b: usize| dense[a * n + b];

    let mut values = Vec::with_capacity(kmax);
    for k in 1..=kmax {
        let raw = match k {
            _ if k > n => 0.0,
            1 => (0..n).map(|i| at(i, i)).sum(),
            2 => {
                let mut s = 0.0;
                for a in 0..n {
                    for b in a + 1..n {
                        s += at(a, b) * at(a, b);
                    }
                }
                2.0 * s
            }
            _ => {
                let mut total = 0.0;
                let mut path = Vec::with_capacity(k);
                let mut used = vec![false; n];
                for start in 0..n {
                    path.push(start);
                    used[start] = true;
                    total += extend_path(&at, n, k, &mut path, &mut used, 1.0);
                    used[start] = false;
                    path.pop();
                }
                2.0 * k as f64 * total
            }
        };
        values.push(scale_and_center(n, k, raw));
    }
    Ok(CycleCountVector { n, kmax, values, algorithm: Algorithm::Naive })
}

/// Sums the products of closed paths extending `path`, restricted to vertices
/// larger than `path[0]` and with `path[1] < path[k-1]`.
fn extend_path(
    at: &impl Fn(usize, usize) -> f64,
    n: usize,
    k: usize,
    path: &mut Vec<usize>,
    used: &mut [bool],
    prod: f64,
) -> f64 {
    let last = *path.last().expect("non-empty path");
    if path.len() == k {
        if path[1] < path[k - 1] {
            return prod * at(last, path[0]);
        }
        return 0.0;
    }
    let mut sum = 0.0;
    for next in path[0] + 1..n {
        if used[next] {
            continue;
        }
        used[next] = true;
        path.push(next);
        sum += extend_path(at, n, k, path, used, prod * at(last, next));
        path.pop();
        used[next] = false;
    }
    sum
}

/// Contraction value of one partition: the sum over all labelings of its
/// blocks of the product of matrix entries along the cycle.
pub fn partition_contraction<T: Scalar>(m: &DenseSym<T>, part: &PartitionDescriptor) -> T {
    let n = m.n;
    let factors = part
        .quotient
        .iter()
        .map(|&(a, b)| {
            if a == b {
                Factor { vars: vec![a], data: m.diagonal() }
            } else {
                // symmetric, so the orientation of the edge does not matter
                Factor { vars: vec![a.min(b), a.max(b)], data: m.data.clone() }
            }
        })
        .collect();
    contract_all(factors, n)
}

fn elementwise_power<T: Scalar>(data: &[T], power: u32) -> Vec<T> {
    data.iter()
        .map(|&x| (1..power).fold(x, |acc, _| acc * x))
        .collect()
}

/// Contraction of a quotient class with parallel edges merged into one
/// elementwise power.
fn class_contraction<T: Scalar>(m: &DenseSym<T>, class: &QuotientClass) -> T {
    let diag = m.diagonal();
    let factors = class
        .edges
        .iter()
        .map(|&((a, b), mult)| {
            if a == b {
                Factor { vars: vec![a], data: elementwise_power(&diag, mult) }
            } else {
                Factor { vars: vec![a, b], data: elementwise_power(&m.data, mult) }
            }
        })
        .collect();
    contract_all(factors, m.n)
}

/// `sum_{i_0..i_{k-1} distinct} M_{i0 i1} ... M_{i_{k-1} i0}` by Möbius
/// inversion over the partitions of the `k` positions.
pub fn distinct_cycle_sum<T: Scalar>(m: &DenseSym<T>, k: usize) -> Result<T> {
    if !(1..=MAX_K).contains(&k) {
        return Err(Error::KmaxOutOfRange(k, MAX_K));
    }
    if k > m.n {
        return Ok(T::zero());
    }
    Ok(quotient_classes(k).iter().fold(T::zero(), |acc, class| {
        acc + T::from_i64(class.weight) * class_contraction(m, class)
    }))
}

/// Same quantity summed partition by partition without merging classes.
pub fn distinct_cycle_sum_unmerged<T: Scalar>(m: &DenseSym<T>, k: usize) -> Result<T> {
    if !(1..=MAX_K).contains(&k) {
        return Err(Error::KmaxOutOfRange(k, MAX_K));
    }
    Ok(partition_table(k).iter().fold(T::zero(), |acc, part| {
        acc + T::from_i64(part.moebius_weight) * partition_contraction(m, part)
    }))
}

pub fn cycle_counts_mobius(j: &GoeMatrix, kmax: usize) -> Result<CycleCountVector> {
    if !(1..=MAX_K).contains(&kmax) {
        return Err(Error::KmaxOutOfRange(kmax, MAX_K));
    }
    let n = j.n();
    let m = DenseSym { n, data: j.to_dense() };
    let values = (1..=kmax)
        .map(|k| Ok(scale_and_center(n, k, distinct_cycle_sum(&m, k)?)))
        .collect::<Result<Vec<f64>>>()?;
    Ok(CycleCountVector { n, kmax, values, algorithm: Algorithm::Mobius })
}

/// `sum_{k<=K} (2 mu_k C_{N,k} - mu_k^2) / (4k)`.
pub fn fluctuation_sum(counts: &CycleCountVector, params: &FluctParams, k: usize) -> Result<f64> {
    if k > counts.kmax {
        return Err(Error::InvalidParameter(format!(
            "K = {k} exceeds the {} computed cycle counts",
            counts.kmax
        )));
    }
    Ok((1..=k)
        .map(|j| {
            let mu = params.mu_k(j);
            (2.0 * mu * counts.get(j) - mu * mu) / (4.0 * j as f64)
        })
        .sum())
}
