//! Closed-form quantities: the mixture `xi`, the limiting fluctuation
//! parameters, exact finite-N moments and the truncation bounds used to pick
//! how many cycle counts to keep.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Largest interaction order a [`Mixture`] may carry.
pub const MAX_P: usize = 6;

/// Finite mixture `xi(x) = sum_p alpha_p x^p` with `p >= 2` and `alpha_p >= 0`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Mixture {
    /// `coeffs[p]` is `alpha_p`; entries 0 and 1 are always zero.
    coeffs: Vec<f64>,
}

impl Mixture {
    /// Builds a mixture from `(p, alpha_p)` pairs. Repeated orders are summed.
    pub fn new<I: IntoIterator<Item = (usize, f64)>>(terms: I) -> Result<Self> {
        let mut coeffs = vec![0.0; MAX_P + 1];
        for (p, a) in terms {
            if !(2..=MAX_P).contains(&p) {
                return Err(Error::InvalidMixture(format!(
                    "order {p} outside 2..={MAX_P}"
                )));
            }
            if !a.is_finite() || a < 0.0 {
                return Err(Error::InvalidMixture(format!(
                    "alpha_{p} = {a} must be finite and non-negative"
                )));
            }
            coeffs[p] += a;
        }
        let max_p = match coeffs.iter().rposition(|&a| a > 0.0) {
            Some(p) => p,
            None => return Err(Error::InvalidMixture("all coefficients are zero".into())),
        };
        coeffs.truncate(max_p + 1);
        Ok(Self { coeffs })
    }

    /// `xi(x) = alpha2 x^2`.
    pub fn pure_two_spin(alpha2: f64) -> Result<Self> {
        Self::new([(2, alpha2)])
    }

    /// `xi(x) = x^2`, the Sherrington-Kirkpatrick mixture.
    pub fn sk() -> Self {
        Self { coeffs: vec![0.0, 0.0, 1.0] }
    }

    pub fn alpha(&self, p: usize) -> f64 {
        self.coeffs.get(p).copied().unwrap_or(0.0)
    }

    pub fn alpha2(&self) -> f64 {
        self.alpha(2)
    }

    pub fn max_p(&self) -> usize {
        self.coeffs.len() - 1
    }

    /// Orders `p >= 3` with a non-zero coefficient, ascending.
    pub fn higher_orders(&self) -> impl Iterator<Item = (usize, f64)> + '_ {
        self.terms().filter(|&(p, _)| p >= 3)
    }

    /// Non-zero `(p, alpha_p)` pairs, ascending in `p`.
    pub fn terms(&self) -> impl Iterator<Item = (usize, f64)> + '_ {
        self.coeffs
            .iter()
            .enumerate()
            .filter(|&(_, &a)| a > 0.0)
            .map(|(p, &a)| (p, a))
    }

    pub fn is_pure_two_spin(&self) -> bool {
        self.max_p() == 2
    }

    /// Evaluates `xi(x)` for `|x| <= 1`.
    pub fn xi(&self, x: f64) -> Result<f64> {
        if !(x.abs() <= 1.0) {
            return Err(Error::Domain { value: x, domain: "[-1, 1]" });
        }
        Ok(self.xi_unchecked(x))
    }

    pub(crate) fn xi_unchecked(&self, x: f64) -> f64 {
        // Horner from the top coefficient down.
        self.coeffs.iter().rev().fold(0.0, |acc, &a| acc * x + a)
    }

    /// `xi(x) - alpha2 x^2`, the covariance function of the part of the
    /// Hamiltonian that is independent of the GOE matrix.
    pub fn xi_tilde(&self, x: f64) -> Result<f64> {
        Ok(self.xi(x)? - self.alpha2() * x * x)
    }
}

impl fmt::Display for Mixture {
    /// Writes `p:alpha` pairs, e.g. `2:1, 3:0.5`. Round-trips through
    /// [`FromStr`].
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut first = true;
        for (p, a) in self.terms() {
            if !first {
                f.write_str(", ")?;
            }
            first = false;
            write!(f, "{p}:{a}")?;
        }
        Ok(())
    }
}

impl FromStr for Mixture {
    type Err = Error;

    /// Accepts `p:alpha` pairs separated by commas, or the shorthands `x2`
    /// (pure 2-spin) and `xN` for any single order.
    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        if let Some(p) = s.strip_prefix('x').and_then(|rest| rest.parse::<usize>().ok()) {
            return Self::new([(p, 1.0)]);
        }
        let mut terms = Vec::new();
        for part in s.split(',').map(str::trim).filter(|p| !p.is_empty()) {
            let (p, a) = part
                .split_once(':')
                .ok_or_else(|| Error::InvalidMixture(format!("expected p:alpha, got {part:?}")))?;
            let p = p
                .trim()
                .parse::<usize>()
                .map_err(|e| Error::InvalidMixture(format!("order {p:?}: {e}")))?;
            let a = a
                .trim()
                .parse::<f64>()
                .map_err(|e| Error::InvalidMixture(format!("coefficient {a:?}: {e}")))?;
            terms.push((p, a));
        }
        Self::new(terms)
    }
}

/// Parameters of the limiting Gaussian law of the recentred free energy.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct FluctParams {
    pub beta: f64,
    pub alpha2: f64,
    /// `s^2 = -log(1 - 2 alpha2 beta^2) / 2`.
    pub s2: f64,
    /// `-s^2 / 2`.
    pub mean_shift: f64,
    /// `mu[k-1] = (sqrt(2 alpha2) beta)^k` for `k = 1..=K`.
    pub mu: Vec<f64>,
}

impl FluctParams {
    /// `sqrt(2 alpha2) beta`, the common ratio of the `mu_k`.
    pub fn ratio(&self) -> f64 {
        (2.0 * self.alpha2).sqrt() * self.beta
    }

    /// `2 alpha2 beta^2`, which must stay below one.
    pub fn load(&self) -> f64 {
        2.0 * self.alpha2 * self.beta * self.beta
    }

    /// `mu_k` for any `k >= 1`, not limited to the stored prefix.
    pub fn mu_k(&self, k: usize) -> f64 {
        match self.mu.get(k.wrapping_sub(1)) {
            Some(&m) => m,
            None => self.ratio().powi(k as i32),
        }
    }
}

pub fn xi_eval(mixture: &Mixture, x: f64) -> Result<f64> {
    mixture.xi(x)
}

pub fn fluct_params(mixture: &Mixture, beta: f64, k: usize) -> Result<FluctParams> {
    if !(beta >= 0.0) || !beta.is_finite() {
        return Err(Error::Domain { value: beta, domain: "beta >= 0" });
    }
    if k == 0 {
        return Err(Error::InvalidParameter("K must be at least 1".into()));
    }
    let alpha2 = mixture.alpha2();
    if alpha2 <= 0.0 {
        return Err(Error::InvalidMixture("alpha2 must be positive".into()));
    }
    let load = 2.0 * alpha2 * beta * beta;
    if load >= 1.0 {
        return Err(Error::BeyondCritical(load));
    }
    let s2 = -0.5 * (-load).ln_1p();
    let ratio = (2.0 * alpha2).sqrt() * beta;
    // even powers straight from the load avoid squaring the rounded root
    let mu = (1..=k as i32)
        .map(|j| if j % 2 == 0 { load.powi(j / 2) } else { ratio * load.powi(j / 2) })
        .collect();
    Ok(FluctParams { beta, alpha2, s2, mean_shift: -0.5 * s2, mu })
}

/// Exact variance of `C_{N,k}` under the GOE law:
/// `2k N(N-1)...(N-k+1) / N^k`, and zero for `k > N`.
pub fn cycle_variance_exact(n: usize, k: usize) -> f64 {
    if k > n || k == 0 {
        return 0.0;
    }
    let nf = n as f64;
    let ratio: f64 = (0..k).map(|i| (nf - i as f64) / nf).product();
    2.0 * k as f64 * ratio
}

/// Exact `E[Zhat_N^2] = E[exp(beta^2 N xi(m))]` with `m` the magnetisation of
/// `N` independent uniform spins, summed in log space.
pub fn second_moment_exact(mixture: &Mixture, beta: f64, n: usize) -> Result<f64> {
    if n == 0 {
        return Err(Error::InvalidParameter("N must be at least 1".into()));
    }
    let nf = n as f64;
    // ln k! for k = 0..=n
    let mut log_fact = Vec::with_capacity(n + 1);
    log_fact.push(0.0_f64);
    for i in 1..=n {
        log_fact.push(log_fact[i - 1] + (i as f64).ln());
    }
    let b2n = beta * beta * nf;
    let log_half_pow = -nf * std::f64::consts::LN_2;
    let mut acc = LogSumExp::new();
    for l in 0..=n {
        let m = (2.0 * l as f64 - nf) / nf;
        let log_binom = log_fact[n] - log_fact[l] - log_fact[n - l];
        acc.add(log_binom + log_half_pow + b2n * mixture.xi_unchecked(m));
    }
    let log_value = acc.value();
    let value = log_value.exp();
    if !value.is_finite() {
        return Err(Error::Overflow("second_moment_exact"));
    }
    Ok(value)
}

/// Limit of [`second_moment_exact`] as `N -> infinity` below `beta_xi`.
pub fn second_moment_limit(alpha2: f64, beta: f64) -> f64 {
    1.0 / (1.0 - 2.0 * alpha2 * beta * beta).sqrt()
}

/// Large-deviation rate of the mean of `N` uniform spins,
/// with `0 log 0 = 0` at the end points.
pub fn rate_function(alpha: f64) -> Result<f64> {
    if !(alpha.abs() <= 1.0) {
        return Err(Error::Domain { value: alpha, domain: "[-1, 1]" });
    }
    Ok(rate_unchecked(alpha))
}

fn rate_unchecked(alpha: f64) -> f64 {
    fn xlogx_half(y: f64) -> f64 {
        // (y/2) ln y with the continuous extension at y = 0
        if y == 0.0 {
            0.0
        } else {
            0.5 * y * y.ln()
        }
    }
    xlogx_half(1.0 + alpha) + xlogx_half(1.0 - alpha)
}

const BETA_XI_GRID: usize = 4097;
const BETA_XI_MARGIN: f64 = 1e-12;
const REFINE_WINDOW: f64 = 1e-6;

/// Whether `g(a) = beta^2 xi(a) - I(a)` stays strictly below `g(0) = 0` at
/// every `a` at least one grid step away from the origin.
fn origin_is_unique_max(mixture: &Mixture, beta: f64) -> bool {
    let step = 2.0 / (BETA_XI_GRID - 1) as f64;
    let b2 = beta * beta;
    let g = |a: f64| b2 * mixture.xi_unchecked(a) - rate_unchecked(a);

    let grid: Vec<(f64, f64)> = (0..BETA_XI_GRID)
        .map(|i| -1.0 + i as f64 * step)
        .filter(|a| a.abs() >= step * (1.0 - 1e-9))
        .map(|a| (a, g(a)))
        .collect();
    let running_max = grid.iter().map(|&(_, v)| v).fold(f64::NEG_INFINITY, f64::max);
    if running_max >= -BETA_XI_MARGIN {
        return false;
    }
    for &(a, v) in &grid {
        if v < running_max - REFINE_WINDOW {
            continue;
        }
        let (lo, hi) = if a > 0.0 {
            ((a - step).max(step), (a + step).min(1.0))
        } else {
            ((a - step).max(-1.0), (a + step).min(-step))
        };
        let (_, best) = golden_section_max(g, lo, hi, 1e-12);
        if best >= -BETA_XI_MARGIN {
            return false;
        }
    }
    true
}

fn golden_section_max(f: impl Fn(f64) -> f64, mut lo: f64, mut hi: f64, tol: f64) -> (f64, f64) {
    let inv_phi = (5.0_f64.sqrt() - 1.0) / 2.0;
    let mut c = hi - inv_phi * (hi - lo);
    let mut d = lo + inv_phi * (hi - lo);
    let (mut fc, mut fd) = (f(c), f(d));
    while hi - lo > tol {
        if fc > fd {
            hi = d;
            d = c;
            fd = fc;
            c = hi - inv_phi * (hi - lo);
            fc = f(c);
        } else {
            lo = c;
            c = d;
            fc = fd;
            d = lo + inv_phi * (hi - lo);
            fd = f(d);
        }
    }
    // the end points are candidates too
    [(lo, f(lo)), (hi, f(hi)), (c, fc), (d, fd)]
        .into_iter()
        .fold((lo, f64::NEG_INFINITY), |best, cand| if cand.1 > best.1 { cand } else { best })
}

/// Numerical `beta_xi`: the largest `beta` for which `beta^2 xi(a) - I(a)`
/// is uniquely maximised at `a = 0`, located by bisection to within `tol`.
pub fn beta_xi(mixture: &Mixture, tol: f64) -> Result<f64> {
    if !(tol > 0.0) {
        return Err(Error::Domain { value: tol, domain: "tol > 0" });
    }
    let alpha2 = mixture.alpha2();
    if alpha2 <= 0.0 {
        return Err(Error::Bracket("alpha2 = 0 leaves the bracket unbounded".into()));
    }
    let mut lo = 0.0;
    let mut hi = 1.0 / (2.0 * alpha2).sqrt();
    if !origin_is_unique_max(mixture, lo) {
        return Err(Error::Bracket("the origin is not the unique maximiser at beta = 0".into()));
    }
    if origin_is_unique_max(mixture, hi) {
        return Ok(hi);
    }
    while hi - lo > tol {
        let mid = 0.5 * (lo + hi);
        if origin_is_unique_max(mixture, mid) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// Chebyshev bound on `P(|sum_{k>K} (C_k mu_k/(2k) - mu_k^2/(4k))| >= x)`,
/// uniform in `N`.
pub fn tail_bound(params: &FluctParams, k: usize, x: f64) -> Result<f64> {
    if !(x > 0.0) {
        return Err(Error::Domain { value: x, domain: "x > 0" });
    }
    let load = params.load();
    Ok(2.0 / (1.0 - load) * load.powi(k as i32 + 1) / (x * x))
}

/// Smallest `K >= 1` with `tail_bound(params, K, eps) <= delta`.
pub fn truncation_k(params: &FluctParams, eps: f64, delta: f64) -> Result<usize> {
    if !(eps > 0.0) {
        return Err(Error::Domain { value: eps, domain: "eps > 0" });
    }
    if !(delta > 0.0) {
        return Err(Error::Domain { value: delta, domain: "delta > 0" });
    }
    let mut k = 1;
    while tail_bound(params, k, eps)? > delta {
        k += 1;
    }
    Ok(k)
}

/// `s^2_K = sum_{k<=K} mu_k^2 / (2k)`.
pub fn s2_truncated(params: &FluctParams, k: usize) -> f64 {
    let load = params.load();
    (1..=k).map(|j| load.powi(j as i32) / (2.0 * j as f64)).sum()
}

/// Streaming log-sum-exp with a running maximum.
#[derive(Clone, Copy, Debug)]
pub struct LogSumExp {
    max: f64,
    sum: f64,
}

impl Default for LogSumExp {
    fn default() -> Self {
        Self::new()
    }
}

impl LogSumExp {
    pub fn new() -> Self {
        Self { max: f64::NEG_INFINITY, sum: 0.0 }
    }

    #[inline]
    pub fn add(&mut self, x: f64) {
        if x <= self.max {
            self.sum += (x - self.max).exp();
        } else {
            self.sum = self.sum * (self.max - x).exp() + 1.0;
            self.max = x;
        }
    }

    /// `log sum exp(x)` over everything added; `-inf` when empty.
    pub fn value(&self) -> f64 {
        if self.sum == 0.0 {
            f64::NEG_INFINITY
        } else {
            self.max + self.sum.ln()
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol
    }

    #[test]
    fn xi_examples() {
        let sk = Mixture::sk();
        assert_eq!(xi_eval(&sk, 1.0).unwrap(), 1.0);
        assert_eq!(xi_eval(&sk, 0.0).unwrap(), 0.0);
        let m = Mixture::new([(2, 1.0), (3, 0.5)]).unwrap();
        assert!(close(xi_eval(&m, 0.5).unwrap(), 0.3125, 1e-15));
        assert!(matches!(xi_eval(&m, 1.5), Err(Error::Domain { .. })));
        assert!(close(m.xi_tilde(1.0).unwrap(), 0.5, 1e-15));
    }

    #[test]
    fn mixture_validation() {
        assert!(Mixture::new([(1, 1.0)]).is_err());
        assert!(Mixture::new([(7, 1.0)]).is_err());
        assert!(Mixture::new([(2, -1.0)]).is_err());
        assert!(Mixture::new([(2, 0.0)]).is_err());
        let m = Mixture::new([(2, 0.0), (4, 2.0)]).unwrap();
        assert_eq!(m.max_p(), 4);
        assert_eq!(m.alpha2(), 0.0);
    }

    #[test]
    fn mixture_text_round_trip() {
        let m: Mixture = "2:1.0, 3:0.5".parse().unwrap();
        assert_eq!(m.alpha(3), 0.5);
        let again: Mixture = m.to_string().parse().unwrap();
        assert_eq!(m, again);
        assert_eq!("x2".parse::<Mixture>().unwrap(), Mixture::sk());
        assert!("2=1".parse::<Mixture>().is_err());
    }

    #[test]
    fn fluct_params_examples() {
        let p = fluct_params(&Mixture::sk(), 0.4, 3).unwrap();
        assert!(close(p.s2, -0.5 * 0.68_f64.ln(), 1e-15));
        assert!(close(p.s2, 0.192_831_240, 1e-9));
        assert!(close(p.mu[0], 0.565_685_424_949_238, 1e-12));
        assert!(close(p.mu[1], 0.32, 1e-15));
        assert!(close(p.mu[2], 0.181_019_335_983_756, 1e-12));
        assert!(close(p.mean_shift, -0.5 * p.s2, 0.0));
        let ratios: Vec<f64> = p.mu.windows(2).map(|w| w[1] / w[0]).collect();
        assert!(close(ratios[0], ratios[1], 1e-14));

        let zero = fluct_params(&Mixture::new([(2, 1.0), (4, 3.0)]).unwrap(), 0.0, 4).unwrap();
        assert_eq!(zero.s2, 0.0);
        assert!(zero.mu.iter().all(|&m| m == 0.0));

        let half = Mixture::pure_two_spin(0.5).unwrap();
        let near = fluct_params(&half, 1.0 - 1e-9, 1).unwrap();
        assert!(near.s2 > 5.0);
        assert!(matches!(fluct_params(&half, 1.0, 1), Err(Error::BeyondCritical(_))));
        assert!(fluct_params(&Mixture::new([(3, 1.0)]).unwrap(), 0.1, 1).is_err());
        assert!(fluct_params(&half, 0.1, 0).is_err());
    }

    #[test]
    fn cycle_variance_examples() {
        assert_eq!(cycle_variance_exact(4, 2), 3.0);
        assert_eq!(cycle_variance_exact(3, 5), 0.0);
        assert!(close(cycle_variance_exact(1_000_000, 3), 6.0 * (1.0 - 1e-6) * (1.0 - 2e-6), 1e-12));
        for k in 1..6 {
            assert!(close(cycle_variance_exact(1_000_000, k), 2.0 * k as f64, 1e-4));
        }
    }

    #[test]
    fn second_moment_examples() {
        let sk = Mixture::sk();
        for n in [1, 7, 100] {
            assert!(close(second_moment_exact(&sk, 0.0, n).unwrap(), 1.0, 1e-12));
        }
        assert!(close(second_moment_exact(&sk, 0.4, 1).unwrap(), 0.16_f64.exp(), 1e-12));
        // frozen from a 50-digit mpmath evaluation of the binomial sum
        assert!(close(second_moment_exact(&sk, 0.4, 100).unwrap(), 1.212_013_025_170_113_6, 1e-10));
        assert!(close(second_moment_exact(&sk, 0.4, 10_000).unwrap(), 1.212_671_412_030_713_3, 1e-9));
        let limit = second_moment_limit(1.0, 0.4);
        let e5 = second_moment_exact(&sk, 0.4, 100_000).unwrap();
        assert!((e5 - limit).abs() < 2e-3);
    }

    #[test]
    fn second_moment_overflow_is_reported() {
        // far above the threshold the sum is dominated by exp(beta^2 N)
        let res = second_moment_exact(&Mixture::sk(), 40.0, 1000);
        assert!(matches!(res, Err(Error::Overflow(_))));
    }

    #[test]
    fn rate_function_examples() {
        assert_eq!(rate_function(0.0).unwrap(), 0.0);
        assert!(close(rate_function(1.0).unwrap(), std::f64::consts::LN_2, 1e-15));
        assert!(close(rate_function(-1.0).unwrap(), std::f64::consts::LN_2, 1e-15));
        assert_eq!(rate_function(-0.5).unwrap(), rate_function(0.5).unwrap());
        assert!(rate_function(1.0 + 1e-12).is_err());
        let h = 1e-4;
        let second = (rate_function(h).unwrap() - 2.0 * rate_function(0.0).unwrap()
            + rate_function(-h).unwrap())
            / (h * h);
        assert!(close(second, 1.0, 1e-6));
    }

    #[test]
    fn beta_xi_pure_two_spin() {
        for a2 in [0.5, 1.0, 2.0] {
            let m = Mixture::pure_two_spin(a2).unwrap();
            let b = beta_xi(&m, 1e-3).unwrap();
            assert!(close(b, 1.0 / (2.0 * a2).sqrt(), 1e-3), "alpha2 = {a2}: {b}");
        }
    }

    #[test]
    fn beta_xi_with_quartic_term() {
        // Oracle: bisection on beta with g maximised over 2e6 points of
        // [1e-3, 1] (xi even, so the positive half suffices), computed with
        // numpy independently of this implementation: 0.5792287126.
        let m = Mixture::new([(2, 1.0), (4, 1.0)]).unwrap();
        let b = beta_xi(&m, 1e-4).unwrap();
        assert!(b > 0.0 && b <= 1.0 / 2.0_f64.sqrt());
        assert!(close(b, 0.579_228_712_6, 2e-4), "{b}");
        // same oracle for xi = x^2 + x^3 / 2: 0.6393391674
        let m = Mixture::new([(2, 1.0), (3, 0.5)]).unwrap();
        assert!(close(beta_xi(&m, 1e-4).unwrap(), 0.639_339_167_4, 2e-4));
    }

    #[test]
    fn tail_bound_and_truncation() {
        // 2 alpha2 beta^2 = 0.25
        let p = fluct_params(&Mixture::sk(), 0.125_f64.sqrt(), 1).unwrap();
        assert!(close(p.load(), 0.25, 1e-15));
        assert!(close(tail_bound(&p, 3, 0.1).unwrap(), 1.041_666_666_666_666_7, 1e-12));
        assert_eq!(truncation_k(&p, 0.05, 0.01).unwrap(), 8);
        let zero = fluct_params(&Mixture::sk(), 0.0, 1).unwrap();
        assert_eq!(tail_bound(&zero, 5, 0.3).unwrap(), 0.0);
        assert_eq!(truncation_k(&zero, 0.05, 0.01).unwrap(), 1);
        let mut prev = f64::INFINITY;
        for k in 1..40 {
            let b = tail_bound(&p, k, 0.1).unwrap();
            assert!(b < prev);
            prev = b;
        }
        let mut prev_k = 0;
        for eps in [0.5, 0.2, 0.1, 0.05, 0.01, 0.001] {
            let k = truncation_k(&p, eps, 0.01).unwrap();
            assert!(k >= prev_k);
            prev_k = k;
        }
    }

    #[test]
    fn s2_truncated_examples() {
        let p = fluct_params(&Mixture::sk(), 0.4, 1).unwrap();
        assert!(close(s2_truncated(&p, 1), 0.16, 1e-15));
        assert!(close(s2_truncated(&p, 200), p.s2, 1e-12));
        let zero = fluct_params(&Mixture::sk(), 0.0, 1).unwrap();
        assert_eq!(s2_truncated(&zero, 10), 0.0);
    }

    #[test]
    fn log_sum_exp_matches_direct_sum() {
        let xs = [0.3, -2.0, 5.0, 1.0, 4.9];
        let mut acc = LogSumExp::new();
        xs.iter().for_each(|&x| acc.add(x));
        let direct: f64 = xs.iter().map(|x| x.exp()).sum::<f64>().ln();
        assert!(close(acc.value(), direct, 1e-14));
        assert_eq!(LogSumExp::new().value(), f64::NEG_INFINITY);
    }
}
