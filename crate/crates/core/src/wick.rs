//! Exact expectations of polynomials in the independent GOE entries
//! `{J_ij : i <= j}`.
//!
//! Since the entries are independent centred Gaussians (variance 2 on the
//! diagonal, 1 off it), the expectation of a monomial factorises over its
//! distinct variables: `E[J_e^m] = (m-1)!! v_e^{m/2}` for even `m`, zero for
//! odd `m`. Coefficients are arbitrary-precision rationals. The cycle-count
//! normalisation `N^{-k/2}` is irrational for odd `N k`, so a polynomial
//! carries it as a separate prefactor `n^{-half_power/2}`.

use std::collections::BTreeMap;
use std::fmt;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::Serialize;

use crate::error::{Error, Result};

/// Largest dimension accepted by [`cycle_count_polynomial`].
pub const MAX_POLY_N: usize = 6;
/// Largest number of terms a product may expand to.
pub const MAX_PRODUCT_TERMS: usize = 2_000_000;

/// Variable `J_ij` with `i <= j`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Edge(pub u8, pub u8);

impl Edge {
    pub fn new(i: usize, j: usize) -> Self {
        Self(i.min(j) as u8, i.max(j) as u8)
    }

    pub fn is_diagonal(self) -> bool {
        self.0 == self.1
    }
}

/// Product of edge variables with positive exponents, sorted by edge.
#[derive(Clone, Debug, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Monomial(Vec<(Edge, u32)>);

impl Monomial {
    pub fn one() -> Self {
        Self(Vec::new())
    }

    pub fn from_powers<I: IntoIterator<Item = (Edge, u32)>>(powers: I) -> Self {
        let mut m = Self::one();
        for (e, p) in powers {
            m = m.mul(&Self(vec![(e, p)]));
        }
        m.0.retain(|&(_, p)| p > 0);
        m
    }

    pub fn powers(&self) -> &[(Edge, u32)] {
        &self.0
    }

    pub fn mul(&self, other: &Self) -> Self {
        let (a, b) = (&self.0, &other.0);
        let mut out = Vec::with_capacity(a.len() + b.len());
        let (mut i, mut j) = (0, 0);
        while i < a.len() && j < b.len() {
            match a[i].0.cmp(&b[j].0) {
                std::cmp::Ordering::Less => {
                    out.push(a[i]);
                    i += 1;
                }
                std::cmp::Ordering::Greater => {
                    out.push(b[j]);
                    j += 1;
                }
                std::cmp::Ordering::Equal => {
                    out.push((a[i].0, a[i].1 + b[j].1));
                    i += 1;
                    j += 1;
                }
            }
        }
        out.extend_from_slice(&a[i..]);
        out.extend_from_slice(&b[j..]);
        Self(out)
    }
}

fn double_factorial_odd(m: u32) -> BigInt {
    // (m-1)!! for even m
    let mut acc = BigInt::one();
    let mut f = m.saturating_sub(1);
    while f > 1 {
        acc *= f;
        f -= 2;
    }
    acc
}

/// `E[prod_e J_e^{m_e}]` under the GOE law in dimension `n`.
pub fn monomial_expectation(mono: &Monomial, n: usize) -> Result<BigRational> {
    let mut acc = BigInt::one();
    for &(e, m) in mono.powers() {
        if e.1 as usize >= n {
            return Err(Error::DimensionMismatch { expected: n, got: e.1 as usize + 1 });
        }
        if m % 2 == 1 {
            return Ok(BigRational::zero());
        }
        acc *= double_factorial_odd(m);
        if e.is_diagonal() {
            acc *= BigInt::from(2).pow(m / 2);
        }
    }
    Ok(BigRational::from_integer(acc))
}

#[derive(Clone, Debug, PartialEq)]
pub struct GaussianPolynomial {
    n: usize,
    /// The polynomial's value is `n^{-half_power/2}` times the sum of terms.
    half_power: u32,
    terms: BTreeMap<Monomial, BigRational>,
}

impl GaussianPolynomial {
    pub fn zero(n: usize) -> Self {
        Self { n, half_power: 0, terms: BTreeMap::new() }
    }

    pub fn constant(n: usize, c: BigRational) -> Self {
        let mut p = Self::zero(n);
        p.add_term(Monomial::one(), c);
        p
    }

    pub fn variable(n: usize, i: usize, j: usize) -> Self {
        let mut p = Self::zero(n);
        p.add_term(Monomial(vec![(Edge::new(i, j), 1)]), BigRational::one());
        p
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn half_power(&self) -> u32 {
        self.half_power
    }

    pub fn with_half_power(mut self, half_power: u32) -> Self {
        self.half_power = half_power;
        self
    }

    pub fn num_terms(&self) -> usize {
        self.terms.len()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Monomial, &BigRational)> {
        self.terms.iter()
    }

    pub fn coefficient(&self, mono: &Monomial) -> BigRational {
        self.terms.get(mono).cloned().unwrap_or_else(BigRational::zero)
    }

    fn add_term(&mut self, mono: Monomial, c: BigRational) {
        if c.is_zero() {
            return;
        }
        let entry = self.terms.entry(mono);
        match entry {
            std::collections::btree_map::Entry::Vacant(v) => {
                v.insert(c);
            }
            std::collections::btree_map::Entry::Occupied(mut o) => {
                *o.get_mut() += c;
                if o.get().is_zero() {
                    o.remove();
                }
            }
        }
    }

    fn compatible(&self, other: &Self) -> Result<()> {
        if self.n != other.n {
            return Err(Error::DimensionMismatch { expected: self.n, got: other.n });
        }
        Ok(())
    }

    /// Sum of two polynomials carrying the same prefactor.
    pub fn add(&self, other: &Self) -> Result<Self> {
        self.compatible(other)?;
        if self.half_power != other.half_power && !self.is_zero() && !other.is_zero() {
            return Err(Error::InvalidParameter(format!(
                "cannot add prefactors n^-{}/2 and n^-{}/2",
                self.half_power, other.half_power
            )));
        }
        let mut out = self.clone();
        out.half_power = if self.is_zero() { other.half_power } else { self.half_power };
        for (m, c) in &other.terms {
            out.add_term(m.clone(), c.clone());
        }
        Ok(out)
    }

    pub fn mul(&self, other: &Self) -> Result<Self> {
        self.compatible(other)?;
        let size = self.terms.len() * other.terms.len();
        if size > MAX_PRODUCT_TERMS {
            return Err(Error::PolynomialSize(size));
        }
        let mut out = Self::zero(self.n);
        out.half_power = self.half_power + other.half_power;
        for (ma, ca) in &self.terms {
            for (mb, cb) in &other.terms {
                out.add_term(ma.mul(mb), ca * cb);
            }
        }
        Ok(out)
    }

    /// Expectation of the sum of terms, without the `n^{-half_power/2}`
    /// prefactor.
    pub fn expectation_unscaled(&self) -> Result<BigRational> {
        self.terms.iter().try_fold(BigRational::zero(), |acc, (m, c)| {
            Ok(acc + c * monomial_expectation(m, self.n)?)
        })
    }
}

impl fmt::Display for GaussianPolynomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.half_power > 0 {
            write!(f, "{}^(-{}/2) * (", self.n, self.half_power)?;
        }
        if self.terms.is_empty() {
            f.write_str("0")?;
        }
        for (i, (m, c)) in self.terms.iter().enumerate() {
            if i > 0 {
                f.write_str(" + ")?;
            }
            write!(f, "{c}")?;
            for &(e, p) in m.powers() {
                write!(f, "*J{}{}", e.0, e.1)?;
                if p > 1 {
                    write!(f, "^{p}")?;
                }
            }
        }
        if self.half_power > 0 {
            f.write_str(")")?;
        }
        Ok(())
    }
}

/// Closed words `(i_0, .., i_{k-1}, i_0)` with distinct letters, stored
/// without the repeated final letter.
#[derive(Clone, Copy, Debug)]
pub struct CyclicWordSet {
    pub n: usize,
    pub k: usize,
}

impl CyclicWordSet {
    pub fn new(n: usize, k: usize) -> Self {
        Self { n, k }
    }

    /// `n (n-1) ... (n-k+1)`, zero for `k > n`.
    pub fn cardinality(&self) -> u128 {
        if self.k > self.n {
            return 0;
        }
        (0..self.k as u128).map(|i| self.n as u128 - i).product()
    }

    pub fn words(&self) -> Vec<Vec<usize>> {
        fn rec(n: usize, k: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
            if cur.len() == k {
                out.push(cur.clone());
                return;
            }
            for i in 0..n {
                if !cur.contains(&i) {
                    cur.push(i);
                    rec(n, k, cur, out);
                    cur.pop();
                }
            }
        }
        let mut out = Vec::new();
        if self.k > 0 && self.k <= self.n {
            rec(self.n, self.k, &mut Vec::with_capacity(self.k), &mut out);
        }
        out
    }
}

/// Edge set of the graph traced by a cyclic word.
pub fn word_graph(word: &[usize]) -> Vec<Edge> {
    let k = word.len();
    let mut edges: Vec<Edge> = (0..k).map(|m| Edge::new(word[m], word[(m + 1) % k])).collect();
    edges.sort_unstable();
    edges.dedup();
    edges
}

/// Centred weight of a cyclic word: the product of `J` along the cycle, or
/// `J_ab^2 - 1` for the words of length two.
pub fn centered_word_weight(n: usize, word: &[usize]) -> GaussianPolynomial {
    let k = word.len();
    let mono = Monomial::from_powers((0..k).map(|m| (Edge::new(word[m], word[(m + 1) % k]), 1)));
    let mut p = GaussianPolynomial::zero(n);
    p.add_term(mono, BigRational::one());
    if k == 2 {
        p.add_term(Monomial::one(), -BigRational::one());
    }
    p
}

/// `C_{n,k} = n^{-k/2} sum_{w} Jhat_w` as an exact polynomial.
pub fn cycle_count_polynomial(n: usize, k: usize) -> Result<GaussianPolynomial> {
    if n > MAX_POLY_N {
        return Err(Error::PolynomialSize(CyclicWordSet::new(n, k).cardinality() as usize));
    }
    if k == 0 {
        return Err(Error::InvalidParameter("k must be at least 1".into()));
    }
    let mut acc = GaussianPolynomial::zero(n);
    for w in CyclicWordSet::new(n, k).words() {
        acc = acc.add(&centered_word_weight(n, &w))?;
    }
    Ok(acc.with_half_power(k as u32))
}

/// `E[prod polys]` kept exact: `value * n^{-half_power/2}`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ExactMoment {
    #[serde(serialize_with = "serialize_rational")]
    pub value: BigRational,
    pub n: usize,
    pub half_power: u32,
}

fn serialize_rational<S: serde::Serializer>(r: &BigRational, s: S) -> std::result::Result<S::Ok, S::Error> {
    s.serialize_str(&r.to_string())
}

impl ExactMoment {
    pub fn is_zero(&self) -> bool {
        self.value.is_zero()
    }

    pub fn to_f64(&self) -> f64 {
        self.value.to_f64().unwrap_or(f64::NAN) * (self.n as f64).powf(-(self.half_power as f64) / 2.0)
    }

    /// Exact value of `n^{h/2} E[...]` if `h` is the stored half-power, or
    /// `E[...]` itself when the half-power is even.
    pub fn rational(&self) -> Option<BigRational> {
        if self.half_power % 2 == 1 && !self.value.is_zero() {
            return None;
        }
        let scale = BigInt::from(self.n).pow(self.half_power / 2);
        Some(&self.value / BigRational::from_integer(scale))
    }
}

/// Expectation of the product of `polys` by full expansion.
pub fn exact_moment(polys: &[GaussianPolynomial]) -> Result<ExactMoment> {
    let Some(first) = polys.first() else {
        return Err(Error::InvalidParameter("no polynomials".into()));
    };
    let mut prod = first.clone();
    for p in &polys[1..] {
        prod = prod.mul(p)?;
    }
    Ok(ExactMoment { value: prod.expectation_unscaled()?, n: prod.n, half_power: prod.half_power })
}

/// `2k n(n-1)...(n-k+1)`, the predicted value of `n^k E[C_{n,k}^2]`.
pub fn predicted_scaled_variance(n: usize, k: usize) -> BigInt {
    let ff: BigInt = if k > n {
        BigInt::zero()
    } else {
        (0..k).map(|i| BigInt::from(n - i)).product()
    };
    BigInt::from(2 * k) * ff
}

#[derive(Clone, Debug, Serialize)]
pub struct CovarianceViolation {
    pub w: Vec<usize>,
    pub v: Vec<usize>,
    pub expected: String,
    pub got: String,
}

#[derive(Clone, Debug, Serialize)]
pub struct CovarianceReport {
    pub n: usize,
    pub k: usize,
    pub pairs_checked: usize,
    pub same_graph_pairs: usize,
    pub violations: Vec<CovarianceViolation>,
}

impl CovarianceReport {
    pub fn passed(&self) -> bool {
        self.violations.is_empty()
    }
}

/// `a_1 = a_2 = 2`, `a_k = 1` for `k >= 3`.
pub fn same_graph_covariance(k: usize) -> i64 {
    if k <= 2 {
        2
    } else {
        1
    }
}

/// Checks `E[Jhat_w Jhat_v]` for every pair of cyclic words of length `k`:
/// zero when the graphs differ and `a_k` when they coincide.
pub fn word_weight_covariance_check(n: usize, k: usize) -> Result<CovarianceReport> {
    if n > 5 || k > 4 || k == 0 {
        return Err(Error::InvalidParameter(format!("need n <= 5 and 1 <= k <= 4, got n = {n}, k = {k}")));
    }
    let words = CyclicWordSet::new(n, k).words();
    let weights: Vec<GaussianPolynomial> = words.iter().map(|w| centered_word_weight(n, w)).collect();
    let graphs: Vec<Vec<Edge>> = words.iter().map(|w| word_graph(w)).collect();
    let a_k = BigRational::from_integer(BigInt::from(same_graph_covariance(k)));
    let mut report = CovarianceReport { n, k, pairs_checked: 0, same_graph_pairs: 0, violations: Vec::new() };
    for i in 0..words.len() {
        for j in 0..words.len() {
            let got = weights[i].mul(&weights[j])?.expectation_unscaled()?;
            let same = graphs[i] == graphs[j];
            let expected = if same { a_k.clone() } else { BigRational::zero() };
            report.pairs_checked += 1;
            report.same_graph_pairs += same as usize;
            if got != expected {
                report.violations.push(CovarianceViolation {
                    w: words[i].clone(),
                    v: words[j].clone(),
                    expected: expected.to_string(),
                    got: got.to_string(),
                });
            }
        }
    }
    Ok(report)
}

/// One line of the moment-verification table.
#[derive(Clone, Debug, Serialize)]
pub struct WickRow {
    pub n: usize,
    pub k: usize,
    /// `None` for the mean `E[C_{n,k}]`.
    pub l: Option<usize>,
    /// Exact value: `E[C_k]`, `E[C_k C_l]`, or `n^k E[C_k^2]` when `k == l`.
    pub exact: String,
    pub predicted: String,
    pub matches: bool,
}

/// Means, cross-moments and scaled variances of `C_{n,1..=kmax}`.
pub fn verify_table(n: usize, kmax: usize) -> Result<Vec<WickRow>> {
    let polys = (1..=kmax).map(|k| cycle_count_polynomial(n, k)).collect::<Result<Vec<_>>>()?;
    let mut rows = Vec::new();
    for k in 1..=kmax {
        let mean = exact_moment(&polys[k - 1..k])?;
        rows.push(WickRow {
            n,
            k,
            l: None,
            exact: mean.value.to_string(),
            predicted: "0".into(),
            matches: mean.is_zero(),
        });
        for l in k..=kmax {
            let m = exact_moment(&[polys[k - 1].clone(), polys[l - 1].clone()])?;
            let (exact, predicted, matches) = if k == l {
                // n^k E[C_k^2] is the unscaled value
                let want = predicted_scaled_variance(n, k);
                let ok = m.value == BigRational::from_integer(want.clone());
                (m.value.to_string(), want.to_string(), ok)
            } else {
                (m.value.to_string(), "0".to_string(), m.is_zero())
            };
            rows.push(WickRow { n, k, l: Some(l), exact, predicted, matches });
        }
    }
    Ok(rows)
}

/// `|value|` as a float, for display.
pub fn abs_f64(r: &BigRational) -> f64 {
    r.abs().to_f64().unwrap_or(f64::NAN)
}
