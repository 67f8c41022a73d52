//! Truncated power series with complex coefficients.
//!
//! A [`TruncatedSeries`] stores `a_0..=a_N` of `f(z) = Σ a_k z^k`. Every
//! operation states how it moves the truncation degree `N`; nothing silently
//! invents coefficients beyond what is stored.

use std::f64::consts::TAU;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Number of angular samples used by [`Seminorm::SupDisk`].
pub const DEFAULT_SUP_SAMPLES: usize = 256;

#[derive(Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<Complex64>", into = "Vec<Complex64>")]
pub struct TruncatedSeries {
    coeffs: Vec<Complex64>,
}

impl fmt::Debug for TruncatedSeries {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "TruncatedSeries(N={}, ", self.truncation_degree())?;
        f.debug_list().entries(self.coeffs.iter()).finish()?;
        write!(f, ")")
    }
}

impl TryFrom<Vec<Complex64>> for TruncatedSeries {
    type Error = Error;

    fn try_from(coeffs: Vec<Complex64>) -> Result<Self> {
        TruncatedSeries::new(coeffs)
    }
}

impl From<TruncatedSeries> for Vec<Complex64> {
    fn from(s: TruncatedSeries) -> Self {
        s.coeffs
    }
}

impl TruncatedSeries {
    /// Builds a series from `a_0..=a_N`. Rejects an empty list and
    /// non-finite coefficients.
    pub fn new(coeffs: Vec<Complex64>) -> Result<Self> {
        if coeffs.is_empty() {
            return Err(Error::InvalidInput("a series needs at least one coefficient".into()));
        }
        if let Some(k) = coeffs.iter().position(|c| !c.re.is_finite() || !c.im.is_finite()) {
            return Err(Error::InvalidInput(format!("coefficient a_{k} is not finite")));
        }
        Ok(TruncatedSeries { coeffs })
    }

    /// Internal constructor for values already known to be finite.
    pub(crate) fn from_vec_unchecked(coeffs: Vec<Complex64>) -> Self {
        debug_assert!(!coeffs.is_empty());
        TruncatedSeries { coeffs }
    }

    pub fn from_real(coeffs: &[f64]) -> Result<Self> {
        Self::new(coeffs.iter().map(|&c| Complex64::new(c, 0.0)).collect())
    }

    pub fn zero(truncation: usize) -> Self {
        TruncatedSeries { coeffs: vec![Complex64::new(0.0, 0.0); truncation + 1] }
    }

    pub fn constant(c: Complex64, truncation: usize) -> Self {
        let mut s = Self::zero(truncation);
        s.coeffs[0] = c;
        s
    }

    /// `z^s` stored with truncation degree `max(s, truncation)`.
    pub fn monomial(s: usize, truncation: usize) -> Self {
        let mut out = Self::zero(truncation.max(s));
        out.coeffs[s] = Complex64::new(1.0, 0.0);
        out
    }

    /// Degree-`truncation` jet of `e^{az}`.
    pub fn exp_jet(a: Complex64, truncation: usize) -> Self {
        let mut coeffs = Vec::with_capacity(truncation + 1);
        let mut term = Complex64::new(1.0, 0.0);
        coeffs.push(term);
        for k in 1..=truncation {
            term = term * a / k as f64;
            coeffs.push(term);
        }
        TruncatedSeries { coeffs }
    }

    pub fn coeffs(&self) -> &[Complex64] {
        &self.coeffs
    }

    pub fn into_coeffs(self) -> Vec<Complex64> {
        self.coeffs
    }

    /// The stored truncation degree `N`.
    pub fn truncation_degree(&self) -> usize {
        self.coeffs.len() - 1
    }

    /// Index of the last nonzero coefficient; `None` for the zero series.
    pub fn degree(&self) -> Option<usize> {
        self.coeffs.iter().rposition(|c| *c != Complex64::new(0.0, 0.0))
    }

    pub fn is_zero(&self) -> bool {
        self.degree().is_none()
    }

    /// `a_k`, or zero beyond the stored range.
    pub fn coeff(&self, k: usize) -> Complex64 {
        self.coeffs.get(k).copied().unwrap_or_default()
    }

    /// Same coefficients with truncation degree `n` (padding with zeros or
    /// dropping the tail).
    pub fn resized(&self, n: usize) -> Self {
        let mut coeffs = self.coeffs.clone();
        coeffs.resize(n + 1, Complex64::new(0.0, 0.0));
        TruncatedSeries { coeffs }
    }

    /// Copy with truncation degree shrunk to the actual degree (at least 0).
    pub fn trimmed(&self) -> Self {
        self.resized(self.degree().unwrap_or(0))
    }

    pub fn scale(&self, c: Complex64) -> Self {
        TruncatedSeries { coeffs: self.coeffs.iter().map(|a| a * c).collect() }
    }

    /// Horner evaluation of the stored polynomial.
    pub fn evaluate(&self, z: Complex64) -> Complex64 {
        self.coeffs.iter().rev().fold(Complex64::new(0.0, 0.0), |acc, a| acc * z + a)
    }

    /// Cauchy product truncated at degree `n`.
    pub fn mul_truncated(&self, other: &Self, n: usize) -> Self {
        let mut out = vec![Complex64::new(0.0, 0.0); n + 1];
        for (i, a) in self.coeffs.iter().enumerate().take(n + 1) {
            if *a == Complex64::new(0.0, 0.0) {
                continue;
            }
            for (j, b) in other.coeffs.iter().enumerate().take(n + 1 - i) {
                out[i + j] += a * b;
            }
        }
        TruncatedSeries { coeffs: out }
    }

    /// `f′`: `a_k ← (k+1) a_{k+1}`, truncation degree `N−1` (at least 0).
    pub fn differentiate(&self) -> Self {
        if self.coeffs.len() == 1 {
            return Self::zero(0);
        }
        let coeffs = self
            .coeffs
            .iter()
            .enumerate()
            .skip(1)
            .map(|(k, a)| a * k as f64)
            .collect();
        TruncatedSeries { coeffs }
    }

    /// `D^j f`.
    pub fn differentiate_n(&self, j: usize) -> Self {
        (0..j).fold(self.clone(), |f, _| f.differentiate())
    }

    /// `R_λ f(z) = f(λz)`: `a_k ← λ^k a_k`, degree preserved.
    pub fn dilate(&self, lambda: Complex64) -> Self {
        let mut power = Complex64::new(1.0, 0.0);
        let coeffs = self
            .coeffs
            .iter()
            .map(|a| {
                let v = a * power;
                power *= lambda;
                v
            })
            .collect();
        TruncatedSeries { coeffs }
    }

    /// `g(z) = f(z + α)` by repeated synthetic division (Taylor shift).
    pub fn translate(&self, alpha: Complex64) -> Self {
        let mut c = self.coeffs.clone();
        let n = c.len() - 1;
        if alpha == Complex64::new(0.0, 0.0) {
            return self.clone();
        }
        for i in 0..n {
            for j in (i..n).rev() {
                let next = c[j + 1];
                c[j] += alpha * next;
            }
        }
        TruncatedSeries { coeffs: c }
    }

    /// Volterra operator `Vf(z) = ∫_0^z f`: `a_k ← a_{k−1}/k`, `a_0 = 0`,
    /// truncation degree `N+1`.
    pub fn integrate(&self) -> Self {
        let mut coeffs = Vec::with_capacity(self.coeffs.len() + 1);
        coeffs.push(Complex64::new(0.0, 0.0));
        coeffs.extend(self.coeffs.iter().enumerate().map(|(k, a)| a / (k + 1) as f64));
        TruncatedSeries { coeffs }
    }

    /// `V^j f`.
    pub fn integrate_n(&self, j: usize) -> Self {
        (0..j).fold(self.clone(), |f, _| f.integrate())
    }

    /// True iff `|a_k| ≤ tol` for every `k ≤ n`; coefficients beyond the
    /// stored range count as zero.
    pub fn jet_vanishes(&self, n: usize, tol: f64) -> bool {
        self.coeffs.iter().take(n + 1).all(|a| a.norm() <= tol)
    }

    pub fn seminorm(&self, s: Seminorm) -> Result<f64> {
        s.eval(self)
    }

    /// `ρ_M(f) = Σ |a_k| M^k` without validating `M`.
    pub(crate) fn rho_unchecked(&self, m: f64) -> f64 {
        let mut power = 1.0;
        let mut sum = 0.0;
        for a in &self.coeffs {
            sum += a.norm() * power;
            power *= m;
        }
        sum
    }

    /// Largest coefficient modulus.
    pub fn max_abs(&self) -> f64 {
        self.coeffs.iter().map(|a| a.norm()).fold(0.0, f64::max)
    }

    pub fn is_finite(&self) -> bool {
        self.coeffs.iter().all(|c| c.re.is_finite() && c.im.is_finite())
    }

    fn zip_with(&self, other: &Self, op: impl Fn(Complex64, Complex64) -> Complex64) -> Self {
        let n = self.coeffs.len().max(other.coeffs.len());
        let coeffs = (0..n).map(|k| op(self.coeff(k), other.coeff(k))).collect();
        TruncatedSeries { coeffs }
    }
}

impl Add for &TruncatedSeries {
    type Output = TruncatedSeries;

    fn add(self, rhs: &TruncatedSeries) -> TruncatedSeries {
        self.zip_with(rhs, |a, b| a + b)
    }
}

impl Sub for &TruncatedSeries {
    type Output = TruncatedSeries;

    fn sub(self, rhs: &TruncatedSeries) -> TruncatedSeries {
        self.zip_with(rhs, |a, b| a - b)
    }
}

impl Neg for &TruncatedSeries {
    type Output = TruncatedSeries;

    fn neg(self) -> TruncatedSeries {
        self.scale(Complex64::new(-1.0, 0.0))
    }
}

impl Mul<Complex64> for &TruncatedSeries {
    type Output = TruncatedSeries;

    fn mul(self, rhs: Complex64) -> TruncatedSeries {
        self.scale(rhs)
    }
}

/// Seminorms on entire functions, evaluated on stored coefficients.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "parameter", rename_all = "snake_case")]
pub enum Seminorm {
    /// `ρ_M(f) = Σ |a_k| M^k`.
    Rho(f64),
    /// `max_{|z| ≤ r} |f(z)|`, estimated from below by angular sampling.
    SupDisk(f64),
}

impl Seminorm {
    pub fn rho(m: f64) -> Result<Self> {
        Seminorm::Rho(m).validated()
    }

    pub fn sup_disk(r: f64) -> Result<Self> {
        Seminorm::SupDisk(r).validated()
    }

    pub fn parameter(&self) -> f64 {
        match *self {
            Seminorm::Rho(p) | Seminorm::SupDisk(p) => p,
        }
    }

    pub fn validated(self) -> Result<Self> {
        let p = self.parameter();
        if !(p > 0.0) || !p.is_finite() {
            return Err(Error::InvalidInput(format!("seminorm parameter must be positive, got {p}")));
        }
        Ok(self)
    }

    /// Short label such as `rho(2)` or `sup_disk(1.5)`.
    pub fn label(&self) -> String {
        match *self {
            Seminorm::Rho(m) => format!("rho({m})"),
            Seminorm::SupDisk(r) => format!("sup_disk({r})"),
        }
    }

    /// Value of the seminorm. For `SupDisk` this is the sampled lower
    /// estimate; see [`sup_disk_bracket`] for the two-sided version.
    pub fn eval(&self, f: &TruncatedSeries) -> Result<f64> {
        self.validated()?;
        Ok(match *self {
            Seminorm::Rho(m) => f.rho_unchecked(m),
            Seminorm::SupDisk(r) => sup_disk_bracket(f, r, DEFAULT_SUP_SAMPLES)?.0,
        })
    }
}

impl std::str::FromStr for Seminorm {
    type Err = Error;

    /// Parses `rho:M` or `sup_disk:r`.
    fn from_str(s: &str) -> Result<Self> {
        let (kind, value) = s
            .split_once(':')
            .ok_or_else(|| Error::InvalidInput(format!("seminorm `{s}` should look like rho:1 or sup_disk:2")))?;
        let p: f64 = value
            .parse()
            .map_err(|_| Error::InvalidInput(format!("seminorm parameter `{value}` is not a number")))?;
        match kind {
            "rho" => Seminorm::rho(p),
            "sup_disk" | "sup" => Seminorm::sup_disk(p),
            other => Err(Error::InvalidInput(format!("unknown seminorm kind `{other}`"))),
        }
    }
}

/// `(lower, upper)` bracket for `max_{|z|≤r}|f(z)|`: the lower value is the
/// maximum over `samples` equally spaced points of the circle `|z| = r`,
/// the upper value is the coefficient bound `ρ_r(f)`.
pub fn sup_disk_bracket(f: &TruncatedSeries, r: f64, samples: usize) -> Result<(f64, f64)> {
    Seminorm::SupDisk(r).validated()?;
    if samples == 0 {
        return Err(Error::InvalidInput("sup_disk needs at least one sample".into()));
    }
    let lower = (0..samples)
        .map(|j| {
            let z = Complex64::from_polar(r, TAU * j as f64 / samples as f64);
            f.evaluate(z).norm()
        })
        .fold(0.0, f64::max);
    let upper = f.rho_unchecked(r);
    Ok((lower.min(upper), upper))
}
