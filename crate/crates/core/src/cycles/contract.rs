//! Variable elimination over dense factors whose indices all range over
//! `0..n`.

use std::ops::{Add, Mul};

/// Ring the contraction runs over: `f64` for real matrices, `i128` for the
/// exact combinatorial self-test.
pub trait Scalar: Copy + Add<Output = Self> + Mul<Output = Self> + PartialEq + std::fmt::Debug {
    fn zero() -> Self;
    fn one() -> Self;
    fn from_i64(v: i64) -> Self;
}

impl Scalar for f64 {
    fn zero() -> Self {
        0.0
    }
    fn one() -> Self {
        1.0
    }
    fn from_i64(v: i64) -> Self {
        v as f64
    }
}

impl Scalar for i128 {
    fn zero() -> Self {
        0
    }
    fn one() -> Self {
        1
    }
    fn from_i64(v: i64) -> Self {
        v as i128
    }
}

/// Dense symmetric `n × n` matrix, row-major.
#[derive(Clone, Debug)]
pub struct DenseSym<T> {
    pub n: usize,
    pub data: Vec<T>,
}

impl<T: Scalar> DenseSym<T> {
    pub fn filled(n: usize, value: T) -> Self {
        Self { n, data: vec![value; n * n] }
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> T {
        self.data[i * self.n + j]
    }

    pub fn diagonal(&self) -> Vec<T> {
        (0..self.n).map(|i| self.get(i, i)).collect()
    }
}

/// Factor over the sorted variable list `vars`; entry index is the
/// row-major position of the assignment.
#[derive(Clone, Debug)]
pub struct Factor<T> {
    pub vars: Vec<usize>,
    pub data: Vec<T>,
}

impl<T: Scalar> Factor<T> {
    pub fn scalar(value: T) -> Self {
        Self { vars: Vec::new(), data: vec![value] }
    }
}

/// Sums the product of all factors over every variable, eliminating in
/// greedy min-degree order (ties to the lowest variable id).
pub fn contract_all<T: Scalar>(mut factors: Vec<Factor<T>>, n: usize) -> T {
    loop {
        let mut vars: Vec<usize> = factors.iter().flat_map(|f| f.vars.iter().copied()).collect();
        vars.sort_unstable();
        vars.dedup();
        let Some(&first) = vars.first() else { break };

        let mut best = (usize::MAX, first);
        for &v in &vars {
            let mut nb: Vec<usize> = factors
                .iter()
                .filter(|f| f.vars.contains(&v))
                .flat_map(|f| f.vars.iter().copied())
                .filter(|&u| u != v)
                .collect();
            nb.sort_unstable();
            nb.dedup();
            if nb.len() < best.0 {
                best = (nb.len(), v);
            }
        }
        let v = best.1;
        let (touching, rest): (Vec<_>, Vec<_>) = factors.into_iter().partition(|f| f.vars.contains(&v));
        factors = rest;
        factors.push(eliminate(&touching, v, n));
    }
    factors.iter().fold(T::one(), |acc, f| acc * f.data[0])
}

/// Multiplies `factors` and sums out `v`.
fn eliminate<T: Scalar>(factors: &[Factor<T>], v: usize, n: usize) -> Factor<T> {
    let mut union: Vec<usize> = factors.iter().flat_map(|f| f.vars.iter().copied()).collect();
    union.sort_unstable();
    union.dedup();
    let out_vars: Vec<usize> = union.iter().copied().filter(|&u| u != v).collect();

    // stride of each union variable inside each factor and inside the output
    let strides = |vars: &[usize]| -> Vec<usize> {
        union
            .iter()
            .map(|u| match vars.iter().position(|w| w == u) {
                Some(pos) => n.pow((vars.len() - 1 - pos) as u32),
                None => 0,
            })
            .collect()
    };
    let factor_strides: Vec<Vec<usize>> = factors.iter().map(|f| strides(&f.vars)).collect();
    let out_strides = strides(&out_vars);

    let mut out = vec![T::zero(); n.pow(out_vars.len() as u32)];
    let width = union.len();
    let mut assign = vec![0usize; width];
    let mut offsets = vec![0usize; factors.len()];
    let mut out_offset = 0usize;
    loop {
        let prod = factors
            .iter()
            .zip(&offsets)
            .fold(T::one(), |acc, (f, &o)| acc * f.data[o]);
        out[out_offset] = out[out_offset] + prod;

        // odometer increment, last variable fastest
        let mut pos = width;
        loop {
            if pos == 0 {
                return Factor { vars: out_vars, data: out };
            }
            pos -= 1;
            assign[pos] += 1;
            for (o, s) in offsets.iter_mut().zip(&factor_strides) {
                *o += s[pos];
            }
            out_offset += out_strides[pos];
            if assign[pos] < n {
                break;
            }
            for (o, s) in offsets.iter_mut().zip(&factor_strides) {
                *o -= n * s[pos];
            }
            out_offset -= n * out_strides[pos];
            assign[pos] = 0;
        }
    }
}
