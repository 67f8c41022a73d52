//! Exponential-type symbols `φ(z) = P(z)·e^{bz}·g(z)` where `g` is either
//! 1 or a catalogued entire function with infinitely many zeros, together
//! with the iterated products `Φ_n(z) = φ(ωz)φ(ω²z)⋯φ(ωⁿz)`.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::budget::Budget;
use crate::error::{Error, Result};
use crate::series::TruncatedSeries;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);

/// Entire factors with infinitely many zeros. Every entry is nonzero at the
/// origin, so it never changes the order of vanishing of `φ` at 0.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Builtin {
    #[default]
    None,
    /// `cos z`, zeros at `π/2 + kπ`.
    Cos,
    /// `sin(z)/z`, zeros at `kπ`, `k ≠ 0`.
    SinOverZ,
    /// `cosh z`, zeros at `i(π/2 + kπ)`.
    Cosh,
}

impl Builtin {
    pub fn has_infinitely_many_zeros(self) -> bool {
        self != Builtin::None
    }

    /// Degree-`n` Taylor jet.
    pub fn jet(self, n: usize) -> TruncatedSeries {
        let mut coeffs = vec![ZERO; n + 1];
        coeffs[0] = ONE;
        if self == Builtin::None {
            return TruncatedSeries::from_vec_unchecked(coeffs);
        }
        // All three are even series Σ s_j z^{2j}; only the recurrence for s_j differs.
        let mut term = 1.0_f64;
        let mut j = 1;
        while 2 * j <= n {
            let (p, q) = match self {
                Builtin::Cos | Builtin::Cosh => ((2 * j - 1) as f64, (2 * j) as f64),
                Builtin::SinOverZ => ((2 * j) as f64, (2 * j + 1) as f64),
                Builtin::None => unreachable!(),
            };
            term /= p * q;
            let sign = if self == Builtin::Cosh || j % 2 == 0 { 1.0 } else { -1.0 };
            coeffs[2 * j] = Complex64::new(sign * term, 0.0);
            j += 1;
        }
        TruncatedSeries::from_vec_unchecked(coeffs)
    }
}

/// How many zeros `φ` has.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ZeroCount {
    ZeroFree,
    FiniteNonempty,
    Infinite,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ZeroMeta {
    pub count: ZeroCount,
    /// Multiplicity `m` of `z = 0` as a zero of `φ`, so `φ = z^m ψ`, `ψ(0) ≠ 0`.
    pub order_at_origin: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
struct PhiSpecRepr {
    poly: Vec<Complex64>,
    #[serde(default)]
    b: Complex64,
    #[serde(default)]
    builtin: Builtin,
}

/// Structured symbol `φ(z) = P(z)·e^{bz}·builtin(z)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "PhiSpecRepr", into = "PhiSpecRepr")]
pub struct PhiSpec {
    poly: Vec<Complex64>,
    b: Complex64,
    builtin: Builtin,
}

impl TryFrom<PhiSpecRepr> for PhiSpec {
    type Error = Error;

    fn try_from(r: PhiSpecRepr) -> Result<Self> {
        PhiSpec::new(r.poly, r.b, r.builtin)
    }
}

impl From<PhiSpec> for PhiSpecRepr {
    fn from(p: PhiSpec) -> Self {
        PhiSpecRepr { poly: p.poly, b: p.b, builtin: p.builtin }
    }
}

impl PhiSpec {
    /// `poly` lists `P`'s coefficients lowest degree first; its last entry
    /// must be nonzero.
    pub fn new(poly: Vec<Complex64>, b: Complex64, builtin: Builtin) -> Result<Self> {
        let finite = |c: &Complex64| c.re.is_finite() && c.im.is_finite();
        if poly.is_empty() {
            return Err(Error::InvalidInput("symbol polynomial has no coefficients".into()));
        }
        if !poly.iter().all(finite) || !finite(&b) {
            return Err(Error::InvalidInput("symbol data must be finite".into()));
        }
        if *poly.last().unwrap() == ZERO {
            if poly.iter().all(|c| *c == ZERO) {
                return Err(Error::InvalidInput("symbol is identically zero".into()));
            }
            return Err(Error::InvalidInput(
                "leading polynomial coefficient must be nonzero (drop trailing zeros)".into(),
            ));
        }
        Ok(PhiSpec { poly, b, builtin })
    }

    /// Plain polynomial symbol.
    pub fn polynomial(poly: Vec<Complex64>) -> Result<Self> {
        Self::new(poly, ZERO, Builtin::None)
    }

    /// Polynomial symbol from real coefficients.
    pub fn real_polynomial(poly: &[f64]) -> Result<Self> {
        Self::polynomial(poly.iter().map(|&c| Complex64::new(c, 0.0)).collect())
    }

    pub fn poly(&self) -> &[Complex64] {
        &self.poly
    }

    pub fn b(&self) -> Complex64 {
        self.b
    }

    pub fn builtin(&self) -> Builtin {
        self.builtin
    }

    /// `d = deg P`.
    pub fn degree(&self) -> usize {
        self.poly.len() - 1
    }

    /// No exponential and no catalogue factor: `φ = P`.
    pub fn is_polynomial(&self) -> bool {
        self.b == ZERO && self.builtin == Builtin::None
    }

    /// `φ` is a nonzero constant, so `φ(D)` is a scalar multiple of the identity.
    pub fn is_scalar(&self) -> bool {
        self.degree() == 0 && self.is_polynomial()
    }

    pub fn value_at_zero(&self) -> Complex64 {
        self.poly[0]
    }

    /// `c·φ`.
    pub fn scaled(&self, c: Complex64) -> Result<Self> {
        if c == ZERO {
            return Err(Error::InvalidInput("cannot scale a symbol by zero".into()));
        }
        Self::new(self.poly.iter().map(|a| a * c).collect(), self.b, self.builtin)
    }

    /// Same `P` and catalogue factor with a different exponent `b`.
    pub fn with_exponent(&self, b: Complex64) -> Self {
        PhiSpec { poly: self.poly.clone(), b, builtin: self.builtin }
    }

    pub fn zero_meta(&self) -> ZeroMeta {
        let count = if self.builtin.has_infinitely_many_zeros() {
            ZeroCount::Infinite
        } else if self.degree() == 0 {
            ZeroCount::ZeroFree
        } else {
            ZeroCount::FiniteNonempty
        };
        let order_at_origin = self.poly.iter().take_while(|c| **c == ZERO).count();
        ZeroMeta { count, order_at_origin }
    }

    /// Degree-`n` Taylor jet of `P(z)·e^{bz}·builtin(z)`.
    pub fn coefficients(&self, n: usize) -> TruncatedSeries {
        let p = TruncatedSeries::from_vec_unchecked(self.poly.clone()).resized(n);
        let mut jet = p;
        if self.b != ZERO {
            jet = jet.mul_truncated(&TruncatedSeries::exp_jet(self.b, n), n);
        }
        if self.builtin != Builtin::None {
            jet = jet.mul_truncated(&self.builtin.jet(n), n);
        }
        jet
    }
}

fn check_lambda(lambda: Complex64) -> Result<Complex64> {
    if lambda == ZERO || !lambda.re.is_finite() || !lambda.im.is_finite() {
        return Err(Error::InvalidInput(format!("λ must be finite and nonzero, got {lambda}")));
    }
    Ok(lambda.inv())
}

/// Degree-`n_trunc` jet of `Φ_n(z) = φ(ωz)φ(ω²z)⋯φ(ωⁿz)` with `ω = 1/λ`,
/// by repeated jet multiplication. Exact for polynomial `φ` once
/// `n_trunc ≥ n·deg P`.
pub fn iterated_symbol(phi: &PhiSpec, lambda: Complex64, n: usize, n_trunc: usize) -> Result<TruncatedSeries> {
    let omega = check_lambda(lambda)?;
    if n == 0 {
        return Err(Error::InvalidInput("iterated symbol needs n ≥ 1".into()));
    }
    Budget::current().check_degree(n_trunc, "iterated symbol")?;
    let jet = phi.coefficients(n_trunc);
    let mut scale = ONE;
    let mut acc = TruncatedSeries::constant(ONE, n_trunc);
    for _ in 0..n {
        scale *= omega;
        acc = acc.mul_truncated(&jet.dilate(scale), n_trunc);
    }
    if !acc.is_finite() {
        return Err(Error::Truncation(format!(
            "Φ_{n} overflows double precision at degree {n_trunc}"
        )));
    }
    Ok(acc)
}

/// `Φ_k^{(m)}(0)` for `m = 0..=max_m` via the multinomial Leibniz rule
///
/// `Φ_k^{(m)}(0) = Σ_{h_1+…+h_k=m} (m; h_1,…,h_k) Π_t ω^{t·h_t} φ^{(h_t)}(0)`.
///
/// The sum has `C(m+k−1, k−1)` terms, so `k·max_m` is capped by the
/// `leibniz` budget; [`iterated_symbol`] is the scalable route.
pub fn leibniz_coefficients(phi: &PhiSpec, lambda: Complex64, k: usize, max_m: usize) -> Result<Vec<Complex64>> {
    let omega = check_lambda(lambda)?;
    if k == 0 {
        return Err(Error::InvalidInput("Leibniz expansion needs k ≥ 1".into()));
    }
    let budget = Budget::current().leibniz;
    if k.saturating_mul(max_m) > budget {
        return Err(Error::Budget(format!(
            "Leibniz route with k·M = {} exceeds budget {budget}; use the product route",
            k * max_m
        )));
    }
    let jet = phi.coefficients(max_m);
    let derivs: Vec<Complex64> = (0..=max_m).map(|h| jet.coeff(h) * factorial(h)).collect();
    let omega_pows: Vec<Complex64> = (0..=k).map(|t| omega.powu(t as u32)).collect();

    let mut out = Vec::with_capacity(max_m + 1);
    let mut parts = vec![0usize; k];
    for m in 0..=max_m {
        let mut total = ZERO;
        for_each_composition(m, &mut parts, 0, &mut |h| {
            let mut term = Complex64::new(multinomial(m, h), 0.0);
            for (t, &ht) in h.iter().enumerate() {
                term *= omega_pows[t + 1].powu(ht as u32) * derivs[ht];
            }
            total += term;
        });
        out.push(total);
    }
    Ok(out)
}

/// Upper bounds for `|Φ_k^{(m)}(0)|`, `m = 0..=max_m`:
/// `|φ(0)|^k · C^m · (|ω| + … + |ω|^k)^m` with `C = max(1, max_t |φ^{(t)}(0)/φ(0)|)`
/// over the stored jet (or, when `φ(0) = 0`, `C^m (…)^m` with
/// `C = max(1, max_t |φ^{(t)}(0)|)`).
pub fn leibniz_majorant(phi: &PhiSpec, lambda: Complex64, k: usize, max_m: usize) -> Result<Vec<f64>> {
    let omega = check_lambda(lambda)?;
    let jet = phi.coefficients(max_m);
    let phi0 = jet.coeff(0).norm();
    let norm = if phi0 > 0.0 { phi0 } else { 1.0 };
    let c = (0..=max_m)
        .map(|t| jet.coeff(t).norm() * factorial(t) / norm)
        .fold(1.0_f64, f64::max);
    let w = omega.norm();
    let geometric: f64 = (1..=k).map(|t| w.powi(t as i32)).sum();
    let lead = if phi0 > 0.0 { phi0.powi(k as i32) } else { 1.0 };
    Ok((0..=max_m).map(|m| lead * (c * geometric).powi(m as i32)).collect())
}

pub(crate) fn factorial(n: usize) -> f64 {
    (1..=n).map(|i| i as f64).product()
}

fn multinomial(m: usize, parts: &[usize]) -> f64 {
    // Product of binomials keeps the intermediate values small.
    let mut remaining = m;
    let mut out = 1.0;
    for &h in parts {
        out *= binomial(remaining, h);
        remaining -= h;
    }
    out
}

pub(crate) fn binomial(n: usize, k: usize) -> f64 {
    if k > n {
        return 0.0;
    }
    let k = k.min(n - k);
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

fn for_each_composition(remaining: usize, parts: &mut [usize], idx: usize, f: &mut impl FnMut(&[usize])) {
    if idx + 1 == parts.len() {
        parts[idx] = remaining;
        f(parts);
        return;
    }
    for h in 0..=remaining {
        parts[idx] = h;
        for_each_composition(remaining - h, parts, idx + 1, f);
    }
}
