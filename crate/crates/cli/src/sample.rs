//! Seeded random inputs shared by `selftest` and the acceptance suite.

use eigenop_core::{EigenOp, PhiSpec, TruncatedSeries};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Generator for one named check: the run seed picks the key, the check
/// index picks the stream, so checks never share draws.
pub fn rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// Uniform on the square `[-1, 1]²`.
pub fn complex(rng: &mut impl Rng) -> Complex64 {
    Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))
}

/// `r e^{iθ}` with `r ∈ [lo, hi)` and uniform argument.
pub fn lambda(rng: &mut impl Rng, lo: f64, hi: f64) -> Complex64 {
    Complex64::from_polar(rng.gen_range(lo..hi), rng.gen_range(0.0..std::f64::consts::TAU))
}

/// Polynomial symbol of degree at most `max_deg` whose leading coefficient
/// has modulus at least 0.1.
pub fn poly_symbol(rng: &mut impl Rng, max_deg: usize) -> PhiSpec {
    let d = rng.gen_range(0..=max_deg);
    let mut coeffs: Vec<Complex64> = (0..d).map(|_| complex(rng)).collect();
    let mut lead = complex(rng);
    while lead.norm() < 0.1 {
        lead = complex(rng);
    }
    coeffs.push(lead);
    PhiSpec::polynomial(coeffs).expect("nonzero leading coefficient")
}

/// Random operator with polynomial symbol and `lo ≤ |λ| < hi`.
pub fn poly_op(rng: &mut impl Rng, max_deg: usize, lo: f64, hi: f64) -> EigenOp {
    let lam = lambda(rng, lo, hi);
    EigenOp::new(lam, poly_symbol(rng, max_deg)).expect("λ ≠ 0 and φ ≢ 0")
}

/// Series with exactly `deg + 1` random coefficients.
pub fn series(rng: &mut impl Rng, deg: usize) -> TruncatedSeries {
    TruncatedSeries::new((0..=deg).map(|_| complex(rng)).collect()).expect("finite coefficients")
}
