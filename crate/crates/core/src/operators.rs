//! Extended λ-eigenoperators `L = R_λ φ(D)` of the differentiation operator.
//!
//! On polynomials `φ(D)f = Σ_j c_j D^j f` is a finite sum, so `apply` is exact
//! up to floating point. Iterates can be formed either by applying `L`
//! repeatedly or through the closed form `Lⁿ = Φ_n(D) R_λⁿ`.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::budget::Budget;
use crate::error::{Error, Result};
use crate::series::TruncatedSeries;
use crate::symbols::{iterated_symbol, Builtin, PhiSpec, ZeroMeta};

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);

/// Relative gap below which `λ^j` and `λ^k` are treated as equal.
pub const DIAGONAL_GAP: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum IterateRoute {
    /// Apply `L` n times.
    Repeated,
    /// `Φ_n(D)` applied to `R_λⁿ f`.
    ClosedForm,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
struct EigenOpRepr {
    lambda: Complex64,
    phi: PhiSpec,
}

/// `L = R_λ φ(D)` with `λ ≠ 0`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "EigenOpRepr", into = "EigenOpRepr")]
pub struct EigenOp {
    lambda: Complex64,
    phi: PhiSpec,
    omega: Complex64,
    zero_meta: ZeroMeta,
}

impl TryFrom<EigenOpRepr> for EigenOp {
    type Error = Error;

    fn try_from(r: EigenOpRepr) -> Result<Self> {
        EigenOp::new(r.lambda, r.phi)
    }
}

impl From<EigenOp> for EigenOpRepr {
    fn from(op: EigenOp) -> Self {
        EigenOpRepr { lambda: op.lambda, phi: op.phi }
    }
}

impl EigenOp {
    pub fn new(lambda: Complex64, phi: PhiSpec) -> Result<Self> {
        if lambda == ZERO || !lambda.re.is_finite() || !lambda.im.is_finite() {
            return Err(Error::InvalidInput(format!("λ must be finite and nonzero, got {lambda}")));
        }
        let zero_meta = phi.zero_meta();
        Ok(EigenOp { lambda, omega: lambda.inv(), phi, zero_meta })
    }

    /// Shorthand for a polynomial symbol with real coefficients.
    pub fn polynomial(lambda: Complex64, poly: &[f64]) -> Result<Self> {
        Self::new(lambda, PhiSpec::real_polynomial(poly)?)
    }

    pub fn lambda(&self) -> Complex64 {
        self.lambda
    }

    /// `ω = 1/λ`.
    pub fn omega(&self) -> Complex64 {
        self.omega
    }

    pub fn phi(&self) -> &PhiSpec {
        &self.phi
    }

    /// `d = deg P`.
    pub fn degree(&self) -> usize {
        self.phi.degree()
    }

    /// `m`, the order of vanishing of `φ` at 0.
    pub fn order_at_origin(&self) -> usize {
        self.zero_meta.order_at_origin
    }

    pub fn zero_meta(&self) -> ZeroMeta {
        self.zero_meta
    }

    /// `L f = R_λ(φ(D) f)`, same truncation degree as `f`.
    pub fn apply(&self, f: &TruncatedSeries) -> TruncatedSeries {
        let jet = self.phi.coefficients(f.truncation_degree());
        symbol_action(&jet, f).dilate(self.lambda)
    }

    /// `Lⁿ f` by the chosen route; `n = 0` returns `f`.
    pub fn iterate(&self, f: &TruncatedSeries, n: usize, route: IterateRoute) -> Result<TruncatedSeries> {
        if n == 0 {
            return Ok(f.clone());
        }
        let out = match route {
            IterateRoute::Repeated => {
                let jet = self.phi.coefficients(f.truncation_degree());
                let mut g = f.clone();
                for _ in 0..n {
                    g = symbol_action(&jet, &g).dilate(self.lambda);
                }
                g
            }
            IterateRoute::ClosedForm => {
                let big_phi = iterated_symbol(&self.phi, self.lambda, n, f.truncation_degree())?;
                symbol_action(&big_phi, &f.dilate(self.lambda.powu(n as u32)))
            }
        };
        if !out.is_finite() {
            return Err(Error::Truncation(format!("L^{n} f overflows double precision")));
        }
        Ok(out)
    }

    /// `λ_k = (λ^m λ^{2m} ⋯ λ^{(k−1)m})^{-1}`; `λ_0 = λ_1 = 1`.
    pub fn normalizing_scalar(&self, k: usize) -> Complex64 {
        let m = self.order_at_origin();
        let step = self.omega.powu(m as u32);
        let mut out = ONE;
        let mut factor = ONE;
        for _ in 1..k {
            factor *= step;
            out *= factor;
        }
        out
    }

    /// `λ_k Lᵏ f`, with the scalar folded in step by step so intermediate
    /// values stay in range.
    pub fn normalized_iterate(&self, f: &TruncatedSeries, k: usize) -> Result<TruncatedSeries> {
        let jet = self.phi.coefficients(f.truncation_degree());
        let step = self.omega.powu(self.order_at_origin() as u32);
        let mut factor = ONE;
        let mut g = f.clone();
        for t in 0..k {
            g = symbol_action(&jet, &g).dilate(self.lambda);
            if t > 0 {
                factor *= step;
                g = g.scale(factor);
            }
        }
        if !g.is_finite() {
            return Err(Error::Truncation(format!("λ_{k} L^{k} f overflows double precision")));
        }
        Ok(g)
    }

    /// `max_{s ≤ max_degree} ρ_1(D L z^s − λ L D z^s) / max(1, ρ_1(L z^s))`.
    pub fn commutation_residual(&self, max_degree: usize) -> Result<f64> {
        if max_degree < 1 {
            return Err(Error::InvalidInput("commutation check needs max_degree ≥ 1".into()));
        }
        let mut worst: f64 = 0.0;
        for s in 0..=max_degree {
            let f = TruncatedSeries::monomial(s, s);
            let lf = self.apply(&f);
            let lhs = lf.differentiate();
            let rhs = self.apply(&f.differentiate()).scale(self.lambda);
            let r = (&lhs - &rhs).rho_unchecked(1.0) / lf.rho_unchecked(1.0).max(1.0);
            worst = worst.max(r);
        }
        Ok(worst)
    }

    /// Taylor jet of `ψ = φ / z^m` up to degree `n`.
    pub fn psi_coefficients(&self, n: usize) -> TruncatedSeries {
        let m = self.order_at_origin();
        let jet = self.phi.coefficients(n + m);
        TruncatedSeries::from_vec_unchecked(jet.coeffs()[m..].to_vec())
    }

    /// `A_λ f = R_λ ψ(D) f`.
    pub fn apply_psi_part(&self, f: &TruncatedSeries) -> TruncatedSeries {
        let jet = self.psi_coefficients(f.truncation_degree());
        symbol_action(&jet, f).dilate(self.lambda)
    }

    /// Monic eigenpolynomials `p_0..=p_K` of `A_λ = R_λ ψ(D)`,
    /// `A_λ p_k = ψ(0) λ^k p_k`, by back-substitution on the triangular
    /// coefficient matrix.
    pub fn eigen_basis(&self, max_k: usize) -> Result<EigenBasis> {
        Budget::current().check_degree(max_k, "eigen basis")?;
        let psi = self.psi_coefficients(max_k);
        let psi0 = psi.coeff(0);
        if psi0 == ZERO {
            return Err(Error::Precondition("ψ(0) = 0; the diagonal vanishes".into()));
        }
        // λ^j vs λ^k for j < k ≤ K only differ through λ^{k−j} − 1.
        let mut pow = ONE;
        let mut gaps = Vec::with_capacity(max_k + 1);
        gaps.push(ZERO);
        for r in 1..=max_k {
            pow *= self.lambda;
            let gap = pow - ONE;
            if gap.norm() < DIAGONAL_GAP {
                return Err(Error::Degenerate(format!(
                    "λ^{r} is within {DIAGONAL_GAP:e} of 1; eigenvalues ψ(0)λ^k are not simple up to k = {max_k}"
                )));
            }
            gaps.push(gap);
        }

        let mut polys = Vec::with_capacity(max_k + 1);
        for k in 0..=max_k {
            let mut p = vec![ZERO; k + 1];
            p[k] = ONE;
            for i in (0..k).rev() {
                let mut rhs = ZERO;
                let mut falling = 1.0;
                for j in 1..=(k - i) {
                    falling *= (i + j) as f64;
                    rhs += psi.coeff(j) * falling * p[i + j];
                }
                p[i] = rhs / (psi0 * gaps[k - i]);
            }
            polys.push(TruncatedSeries::from_vec_unchecked(p));
        }
        Ok(EigenBasis { polys, psi0, lambda: self.lambda })
    }

    /// `S_k p_n = V^{mk} p_n / (ψ(0) λ^n)^k`.
    pub fn right_inverse_on_basis(&self, basis: &EigenBasis, k: usize, n: usize) -> Result<TruncatedSeries> {
        let m = self.order_at_origin();
        if m == 0 {
            return Err(Error::Precondition("S_k needs φ(0) = 0 (order at origin m ≥ 1)".into()));
        }
        let p = basis
            .polys
            .get(n)
            .ok_or_else(|| Error::InvalidInput(format!("basis has no p_{n} (K = {})", basis.len() - 1)))?;
        Budget::current().check_degree(n + m * k, "right inverse")?;
        let denom = (basis.psi0 * self.lambda.powu(n as u32)).powu(k as u32);
        let out = p.integrate_n(m * k).scale(denom.inv());
        if !out.is_finite() {
            return Err(Error::Truncation(format!("S_{k} p_{n} overflows double precision")));
        }
        Ok(out)
    }
}

/// `φ(D) f = Σ_j c_j D^j f` for a symbol jet `c`, keeping `f`'s truncation
/// degree. `jet` must carry at least `deg f` coefficients.
pub(crate) fn symbol_action(jet: &TruncatedSeries, f: &TruncatedSeries) -> TruncatedSeries {
    let n = f.truncation_degree();
    let mut out = vec![ZERO; n + 1];
    let Some(top) = f.degree() else {
        return TruncatedSeries::zero(n);
    };
    let a = f.coeffs();
    for (q, slot) in out.iter_mut().enumerate().take(top + 1) {
        let mut acc = ZERO;
        let mut falling = 1.0;
        for j in 0..=(top - q) {
            if j > 0 {
                falling *= (q + j) as f64;
            }
            let c = jet.coeff(j);
            if c != ZERO {
                acc += c * falling * a[q + j];
            }
        }
        *slot = acc;
    }
    TruncatedSeries::from_vec_unchecked(out)
}

/// Monic eigenpolynomials of `A_λ = R_λψ(D)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EigenBasis {
    pub polys: Vec<TruncatedSeries>,
    /// `ψ(0)`.
    pub psi0: Complex64,
    pub lambda: Complex64,
}

impl EigenBasis {
    pub fn len(&self) -> usize {
        self.polys.len()
    }

    pub fn is_empty(&self) -> bool {
        self.polys.is_empty()
    }

    /// Eigenvalue attached to `p_k`.
    pub fn eigenvalue(&self, k: usize) -> Complex64 {
        self.psi0 * self.lambda.powu(k as u32)
    }

    /// Coordinates `c` with `g = Σ c_i p_i`; needs `deg g < len()`.
    pub fn expand(&self, g: &TruncatedSeries) -> Result<Vec<Complex64>> {
        let deg = g.degree().unwrap_or(0);
        if deg >= self.polys.len() {
            return Err(Error::InvalidInput(format!(
                "degree {deg} exceeds basis size {}",
                self.polys.len()
            )));
        }
        let mut rest: Vec<Complex64> = (0..=deg).map(|k| g.coeff(k)).collect();
        let mut coords = vec![ZERO; deg + 1];
        for i in (0..=deg).rev() {
            let c = rest[i];
            coords[i] = c;
            if c != ZERO {
                for (r, p) in rest.iter_mut().zip(self.polys[i].coeffs()) {
                    *r -= c * p;
                }
            }
        }
        Ok(coords)
    }

    /// `Σ c_i p_i`.
    pub fn combine(&self, coords: &[Complex64]) -> TruncatedSeries {
        let n = coords.len().saturating_sub(1);
        coords
            .iter()
            .zip(&self.polys)
            .fold(TruncatedSeries::zero(n), |acc, (c, p)| &acc + &p.scale(*c))
    }
}

/// Aron–Markose operator `T_{λ,b} f = f′(λz + b)`, i.e. `φ(z) = z e^{bz}`.
pub fn aron_markose(lambda: Complex64, b: Complex64) -> Result<EigenOp> {
    EigenOp::new(lambda, PhiSpec::new(vec![ZERO, ONE], b, Builtin::None)?)
}

/// Compares `R_λ P(D) e^{bD}` with `e^{−αD} R_λ P(D) e^{αD}`, `α = b/(1−λ)`,
/// on monomials `z^s`, `s ≤ max_degree`. Returns the largest relative
/// `ρ_1` residual.
pub fn similarity_check(lambda: Complex64, poly: &[Complex64], b: Complex64, max_degree: usize) -> Result<f64> {
    if (lambda - ONE).norm() <= 1e-12 {
        return Err(Error::InvalidInput("similarity needs λ ≠ 1 (α = b/(1−λ) is undefined)".into()));
    }
    let alpha = b / (ONE - lambda);
    let base = PhiSpec::polynomial(poly.to_vec())?;
    let shifted = EigenOp::new(lambda, base.with_exponent(b))?;
    let plain = EigenOp::new(lambda, base)?;
    let mut worst: f64 = 0.0;
    for s in 0..=max_degree {
        let f = TruncatedSeries::monomial(s, s);
        let lhs = shifted.apply(&f);
        let rhs = plain.apply(&f.translate(alpha)).translate(-alpha);
        let diff = (&lhs - &rhs).rho_unchecked(1.0);
        if diff > 0.0 {
            worst = worst.max(diff / lhs.rho_unchecked(1.0).max(f64::MIN_POSITIVE));
        }
    }
    Ok(worst)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn real(v: &[f64]) -> TruncatedSeries {
        TruncatedSeries::from_real(v).unwrap()
    }

    fn assert_close(a: &TruncatedSeries, b: &TruncatedSeries, tol: f64) {
        let d = (a - b).rho_unchecked(1.0);
        assert!(d <= tol, "{a:?} vs {b:?}: diff {d}");
    }

    #[test]
    fn apply_examples() {
        let l = EigenOp::polynomial(c(2., 0.), &[0., 1.]).unwrap();
        assert_eq!(l.apply(&real(&[0., 0., 1.])), real(&[0., 4., 0.]));

        let l = EigenOp::polynomial(c(2., 0.), &[1., 1.]).unwrap();
        assert_eq!(l.apply(&real(&[0., 1.])), real(&[1., 2.]));
        assert!(l.apply(&TruncatedSeries::zero(3)).is_zero());
    }

    #[test]
    fn iterate_examples() {
        let l = EigenOp::polynomial(c(2., 0.), &[1., 1.]).unwrap();
        let f = real(&[0., 1.]);
        assert_eq!(l.iterate(&f, 2, IterateRoute::Repeated).unwrap(), real(&[3., 4.]));
        assert_close(&l.iterate(&f, 2, IterateRoute::ClosedForm).unwrap(), &real(&[3., 4.]), 1e-15);
        assert_eq!(l.iterate(&f, 0, IterateRoute::ClosedForm).unwrap(), f);
    }

    #[test]
    fn commutation_examples() {
        let l = EigenOp::polynomial(c(2., 0.), &[0., 1.]).unwrap();
        assert_eq!(l.commutation_residual(2).unwrap(), 0.0);
        let id = EigenOp::polynomial(c(0.3, -0.8), &[1.]).unwrap();
        assert!(id.commutation_residual(40).unwrap() <= 1e-15);
        assert!(l.commutation_residual(0).is_err());
    }

    #[test]
    fn lambda_must_be_nonzero() {
        assert!(EigenOp::polynomial(c(0., 0.), &[1., 1.]).is_err());
        let json = r#"{"lambda":[0,0],"phi":{"poly":[[1,0]]}}"#;
        assert!(serde_json::from_str::<EigenOp>(json).is_err());
    }

    #[test]
    fn json_round_trip() {
        let l = EigenOp::new(c(0.5, 0.25), PhiSpec::new(vec![c(0., 0.), c(1., 0.)], c(1., 0.), Builtin::Cosh).unwrap())
            .unwrap();
        let json = serde_json::to_string(&l).unwrap();
        assert!(json.starts_with(r#"{"lambda":[0.5,0.25],"phi":{"poly""#));
        let back: EigenOp = serde_json::from_str(&json).unwrap();
        assert_eq!(back, l);
        assert_eq!(back.order_at_origin(), 1);
    }

    #[test]
    fn aron_markose_examples() {
        let t = aron_markose(c(2., 0.), c(0., 0.)).unwrap();
        assert_eq!(t.apply(&real(&[0., 0., 1.])), real(&[0., 4., 0.]));

        let t = aron_markose(c(1., 0.), c(0., 0.)).unwrap();
        let f = real(&[1., 2., 3., 4.]);
        assert_close(&t.apply(&f), &f.differentiate(), 0.0);

        let t = aron_markose(c(2., 0.), c(1., 0.)).unwrap();
        assert_close(&t.apply(&real(&[0., 1.])), &real(&[1.]), 1e-15);
    }

    #[test]
    fn similarity_examples() {
        // R_2 e^{D} z = 2z + 1 = e^{D} R_2 e^{-D} z
        let one = [c(1., 0.)];
        assert!(similarity_check(c(2., 0.), &one, c(1., 0.), 1).unwrap() <= 1e-15);
        let shifted = EigenOp::new(c(2., 0.), PhiSpec::new(one.to_vec(), c(1., 0.), Builtin::None).unwrap()).unwrap();
        assert_close(&shifted.apply(&real(&[0., 1.])), &real(&[1., 2.]), 1e-15);

        assert_eq!(similarity_check(c(3., 1.), &[c(1., 0.), c(2., 0.)], c(0., 0.), 10).unwrap(), 0.0);
        assert!(similarity_check(c(-1., 0.), &one, c(2., 0.), 0).unwrap() <= 1e-15);
        assert!(similarity_check(c(1., 0.), &one, c(2., 0.), 3).is_err());
    }

    #[test]
    fn similarity_display_sign_is_wrong() {
        // e^{αD} R_λ e^{αD} z with λ = 2, α = −1 gives 2z − 3, not R_2 e^{D} z = 2z + 1.
        let alpha = c(-1., 0.);
        let r2 = EigenOp::polynomial(c(2., 0.), &[1.]).unwrap();
        let displayed = r2.apply(&real(&[0., 1.]).translate(alpha)).translate(alpha);
        assert_close(&displayed, &real(&[-3., 2.]), 1e-15);
    }

    #[test]
    fn eigen_basis_examples() {
        let l = EigenOp::polynomial(c(0.5, 0.), &[0., 1., 1.]).unwrap();
        let basis = l.eigen_basis(3).unwrap();
        assert_eq!(basis.polys[0], real(&[1.]));
        assert_close(&basis.polys[1], &real(&[-2., 1.]), 1e-15);
        assert_eq!(basis.psi0, c(1., 0.));

        let l = EigenOp::polynomial(c(2., 0.), &[1., 1.]).unwrap();
        let basis = l.eigen_basis(4).unwrap();
        assert_close(&basis.polys[1], &real(&[1., 1.]), 1e-15);
        for (k, p) in basis.polys.iter().enumerate() {
            let r = &l.apply_psi_part(p) - &p.scale(basis.eigenvalue(k));
            assert!(r.rho_unchecked(1.0) <= 1e-12 * p.rho_unchecked(1.0));
            assert_eq!(p.degree(), Some(k));
            assert_eq!(p.coeff(k), c(1., 0.));
        }
    }

    #[test]
    fn eigen_basis_rejects_roots_of_unity() {
        let l = EigenOp::polynomial(c(-1., 0.), &[1., 1.]).unwrap();
        assert!(l.eigen_basis(1).is_ok());
        assert!(matches!(l.eigen_basis(2), Err(Error::Degenerate(_))));
        let l = EigenOp::polynomial(c(1., 0.), &[0., 1.]).unwrap();
        assert!(matches!(l.eigen_basis(1), Err(Error::Degenerate(_))));
    }

    #[test]
    fn expand_and_combine_invert() {
        let l = EigenOp::polynomial(c(0.6, 0.1), &[0., 2., 1., 0.5]).unwrap();
        let basis = l.eigen_basis(6).unwrap();
        let g = real(&[1., -2., 0.5, 3., 0., 1.]);
        let coords = basis.expand(&g).unwrap();
        assert_close(&basis.combine(&coords), &g, 1e-12);
        assert!(basis.expand(&TruncatedSeries::monomial(7, 7)).is_err());
    }

    #[test]
    fn right_inverse_examples() {
        let l = EigenOp::polynomial(c(0.5, 0.), &[0., 1.]).unwrap();
        let basis = l.eigen_basis(4).unwrap();
        assert_eq!(l.right_inverse_on_basis(&basis, 0, 2).unwrap(), basis.polys[2]);
        let s1 = l.right_inverse_on_basis(&basis, 1, 0).unwrap();
        assert_eq!(s1, real(&[0., 1.]));
        assert_eq!(l.apply(&s1).scale(l.normalizing_scalar(1)).trimmed(), real(&[1.]));
        assert_eq!(l.normalizing_scalar(2), c(2., 0.));
        assert_eq!(l.normalizing_scalar(0), c(1., 0.));

        let no_zero = EigenOp::polynomial(c(0.5, 0.), &[1., 1.]).unwrap();
        let b = no_zero.eigen_basis(2).unwrap();
        assert!(matches!(no_zero.right_inverse_on_basis(&b, 1, 0), Err(Error::Precondition(_))));
    }

    #[test]
    fn normalized_iterate_matches_scaled_iterate() {
        let l = EigenOp::polynomial(c(0.5, 0.2), &[0., 0., 1., 1.]).unwrap();
        let f = TruncatedSeries::exp_jet(c(1., 0.), 20);
        for k in 0..5 {
            let direct = l.iterate(&f, k, IterateRoute::Repeated).unwrap().scale(l.normalizing_scalar(k));
            let folded = l.normalized_iterate(&f, k).unwrap();
            let scale = direct.rho_unchecked(1.0).max(1.0);
            assert!((&direct - &folded).rho_unchecked(1.0) <= 1e-12 * scale);
        }
    }

    #[test]
    fn exp_of_root_is_annihilated() {
        // P(z) = (z − 1)(z + 2): both e^{z} and e^{−2z} lie in the kernel.
        let l = EigenOp::polynomial(c(1.7, 0.), &[-2., 1., 1.]).unwrap();
        for root in [c(1., 0.), c(-2., 0.)] {
            let mut prev = f64::INFINITY;
            for n in [10, 20, 30, 40] {
                let r = l.apply(&TruncatedSeries::exp_jet(root, n)).rho_unchecked(1.0);
                assert!(r < prev);
                prev = r;
            }
            assert!(prev < 1e-5);
        }
    }
}
