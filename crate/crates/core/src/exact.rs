//! Exact rational mirror of the eigen machinery for polynomial symbols.
//!
//! Every finite `f64` is a dyadic rational, so `λ` and the coefficients of `φ`
//! convert without loss. Eigenpolynomials rounded to doubles are not exact
//! eigenvectors, and `λ_k Lᵏ S_k` amplifies the rounding along the lower
//! eigen-directions by up to `|λ|^{−nk}`; this module checks the right-inverse
//! identity without that loss.

use num_complex::{Complex, Complex64};
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};

use crate::budget::Budget;
use crate::error::{Error, Result};
use crate::operators::EigenOp;
use crate::series::TruncatedSeries;

type Q = BigRational;
type C = Complex<Q>;

fn to_exact(z: Complex64) -> Result<C> {
    let conv = |x: f64| Q::from_float(x).ok_or_else(|| Error::InvalidInput(format!("{x} has no exact rational value")));
    Ok(C::new(conv(z.re)?, conv(z.im)?))
}

fn modulus(z: &C) -> f64 {
    let re = z.re.to_f64().unwrap_or(f64::INFINITY);
    let im = z.im.to_f64().unwrap_or(f64::INFINITY);
    re.hypot(im)
}

fn int(n: usize) -> C {
    C::new(Q::from_integer(n.into()), Q::zero())
}

fn pow(z: &C, e: usize) -> C {
    let mut out = C::one();
    for _ in 0..e {
        out = &out * z;
    }
    out
}

/// Polynomial with exact complex-rational coefficients, lowest degree first.
#[derive(Debug, Clone, PartialEq)]
pub struct ExactPoly(pub Vec<C>);

impl ExactPoly {
    pub fn rho1(&self) -> f64 {
        self.0.iter().map(modulus).sum()
    }

    pub fn to_series(&self) -> TruncatedSeries {
        let coeffs = self
            .0
            .iter()
            .map(|c| Complex64::new(c.re.to_f64().unwrap_or(f64::NAN), c.im.to_f64().unwrap_or(f64::NAN)))
            .collect();
        TruncatedSeries::new(coeffs).unwrap_or_else(|_| TruncatedSeries::zero(0))
    }

    fn sub(&self, other: &ExactPoly) -> ExactPoly {
        let n = self.0.len().max(other.0.len());
        let get = |v: &Vec<C>, i: usize| v.get(i).cloned().unwrap_or_else(C::zero);
        ExactPoly((0..n).map(|i| get(&self.0, i) - get(&other.0, i)).collect())
    }
}

/// `L = R_λ φ(D)` over `ℚ(i)`.
#[derive(Debug, Clone)]
pub struct ExactOp {
    lambda: C,
    phi: Vec<C>,
    m: usize,
}

impl ExactOp {
    pub fn new(op: &EigenOp) -> Result<Self> {
        if !op.phi().is_polynomial() {
            return Err(Error::Precondition("exact arithmetic needs a polynomial symbol".into()));
        }
        let phi = op.phi().poly().iter().map(|c| to_exact(*c)).collect::<Result<Vec<_>>>()?;
        Ok(ExactOp { lambda: to_exact(op.lambda())?, phi, m: op.order_at_origin() })
    }

    fn psi(&self) -> &[C] {
        &self.phi[self.m..]
    }

    /// `L f`, same length as `f`.
    pub fn apply(&self, f: &ExactPoly) -> ExactPoly {
        let n = f.0.len();
        let mut out = vec![C::zero(); n];
        let mut lam_q = C::one();
        for (q, slot) in out.iter_mut().enumerate() {
            let mut acc = C::zero();
            let mut falling = C::one();
            for (j, c) in self.phi.iter().enumerate() {
                if j > 0 {
                    falling *= int(q + j);
                }
                if q + j >= n {
                    break;
                }
                if !c.is_zero() {
                    acc += c * &falling * &f.0[q + j];
                }
            }
            *slot = acc * &lam_q;
            lam_q *= &self.lambda;
        }
        ExactPoly(out)
    }

    /// `λ_k Lᵏ f` with `λ_k = λ^{−m k(k−1)/2}`.
    pub fn normalized_iterate(&self, f: &ExactPoly, k: usize) -> ExactPoly {
        let mut g = f.clone();
        for _ in 0..k {
            g = self.apply(&g);
        }
        let e = self.m * k * k.saturating_sub(1) / 2;
        let scale = C::one() / pow(&self.lambda, e);
        ExactPoly(g.0.into_iter().map(|c| c * &scale).collect())
    }

    /// Monic `p_0..=p_K` with `A_λ p_k = ψ(0) λ^k p_k`.
    pub fn eigen_basis(&self, max_k: usize) -> Result<Vec<ExactPoly>> {
        Budget::current().check_degree(max_k, "exact eigen basis")?;
        let psi = self.psi();
        let psi0 = psi[0].clone();
        let powers: Vec<C> = (0..=max_k).map(|j| pow(&self.lambda, j)).collect();
        let mut basis = Vec::with_capacity(max_k + 1);
        for k in 0..=max_k {
            let mut p = vec![C::zero(); k + 1];
            p[k] = C::one();
            for i in (0..k).rev() {
                let mut rhs = C::zero();
                let mut falling = C::one();
                for t in 1..=(k - i) {
                    falling *= int(i + t);
                    if let Some(c) = psi.get(t) {
                        rhs += c * &falling * &p[i + t];
                    }
                }
                let gap = &psi0 * (&powers[k] - &powers[i]);
                if gap.is_zero() {
                    return Err(Error::Degenerate(format!("λ^{} = 1 exactly", k - i)));
                }
                p[i] = rhs * &powers[i] / gap;
            }
            basis.push(ExactPoly(p));
        }
        Ok(basis)
    }

    /// `S_k p = V^{mk} p / (ψ(0) λ^n)^k`.
    pub fn right_inverse(&self, p: &ExactPoly, n: usize, k: usize) -> Result<ExactPoly> {
        if self.m == 0 {
            return Err(Error::Precondition("S_k needs φ(0) = 0".into()));
        }
        let shift = self.m * k;
        let denom = pow(&(&self.psi()[0] * pow(&self.lambda, n)), k);
        let mut out = vec![C::zero(); p.0.len() + shift];
        for (j, c) in p.0.iter().enumerate() {
            let mut d = denom.clone();
            for i in 1..=shift {
                d *= int(j + i);
            }
            out[j + shift] = c / d;
        }
        Ok(ExactPoly(out))
    }

    /// `ρ_1(λ_k Lᵏ S_k p_n − p_n) / ρ_1(p_n)` in exact arithmetic.
    pub fn right_inverse_residual(&self, basis: &[ExactPoly], k: usize, n: usize) -> Result<f64> {
        let p = basis
            .get(n)
            .ok_or_else(|| Error::InvalidInput(format!("basis has no p_{n}")))?;
        let back = self.normalized_iterate(&self.right_inverse(p, n, k)?, k);
        Ok(back.sub(p).rho1() / p.rho1())
    }

    /// `ρ_1(A_λ p_k − ψ(0) λ^k p_k) / ρ_1(p_k)` in exact arithmetic.
    pub fn eigen_residual(&self, basis: &[ExactPoly], k: usize) -> Result<f64> {
        let p = basis
            .get(k)
            .ok_or_else(|| Error::InvalidInput(format!("basis has no p_{k}")))?;
        let psi_op = ExactOp { lambda: self.lambda.clone(), phi: self.psi().to_vec(), m: 0 };
        let ap = psi_op.apply(p);
        let ev = &self.psi()[0] * pow(&self.lambda, k);
        let scaled = ExactPoly(p.0.iter().map(|c| c * &ev).collect());
        Ok(ap.sub(&scaled).rho1() / p.rho1())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn op(lambda: f64, poly: &[f64]) -> ExactOp {
        ExactOp::new(&EigenOp::polynomial(Complex64::new(lambda, 0.0), poly).unwrap()).unwrap()
    }

    #[test]
    fn basis_examples() {
        // λ = 1/2, ψ = 1 + z: p_1 = z − 2
        let basis = op(0.5, &[1., 1.]).eigen_basis(1).unwrap();
        assert_eq!(basis[1].to_series().coeffs(), &[Complex64::new(-2.0, 0.0), Complex64::new(1.0, 0.0)]);
        let basis = op(2.0, &[1., 1.]).eigen_basis(1).unwrap();
        assert_eq!(basis[1].to_series().coeffs(), &[Complex64::new(1.0, 0.0), Complex64::new(1.0, 0.0)]);
    }

    #[test]
    fn identities_hold_exactly() {
        let o = op(0.7, &[0., 1., 1.]);
        let basis = o.eigen_basis(10).unwrap();
        for k in 0..=10 {
            assert_eq!(o.eigen_residual(&basis, k).unwrap(), 0.0);
        }
        for k in 1..=6 {
            for n in 0..=10 {
                assert_eq!(o.right_inverse_residual(&basis, k, n).unwrap(), 0.0);
            }
        }
    }

    #[test]
    fn double_basis_agrees_with_exact() {
        let d = EigenOp::polynomial(Complex64::new(0.7, 0.0), &[0., 1., 1.]).unwrap();
        let double = d.eigen_basis(10).unwrap();
        let exact = ExactOp::new(&d).unwrap().eigen_basis(10).unwrap();
        for (p, q) in double.polys.iter().zip(&exact) {
            let q = q.to_series();
            let err = (p - &q).seminorm(crate::Seminorm::Rho(1.0)).unwrap();
            assert!(err <= 1e-13 * q.seminorm(crate::Seminorm::Rho(1.0)).unwrap());
        }
    }

    #[test]
    fn apply_matches_double_route() {
        let d = EigenOp::polynomial(Complex64::new(0.5, 0.25), &[1., -2., 3.]).unwrap();
        let f = TruncatedSeries::from_real(&[1., 0.5, -0.25, 2., 1.]).unwrap();
        let e = ExactOp::new(&d).unwrap();
        let fe = ExactPoly(f.coeffs().iter().map(|c| to_exact(*c).unwrap()).collect());
        let got = e.apply(&fe).to_series();
        let want = d.apply(&f);
        assert!((&got - &want).max_abs() < 1e-14);
    }

    #[test]
    fn rejects_non_polynomial_and_exact_roots_of_unity() {
        let phi = crate::PhiSpec::real_polynomial(&[0., 1.]).unwrap().with_exponent(Complex64::new(1.0, 0.0));
        let d = EigenOp::new(Complex64::new(0.5, 0.0), phi).unwrap();
        assert!(ExactOp::new(&d).is_err());
        assert!(matches!(op(-1.0, &[0., 1., 1.]).eigen_basis(3), Err(Error::Degenerate(_))));
    }
}
