//! Numerical harnesses for the quantitative estimates used in the
//! hypercyclic-subspace arguments.
//!
//! Each harness evaluates both sides of an inequality by separate code paths
//! and aggregates a [`LemmaReport`]. Margins are RHS-normalized slack:
//! `(LHS − RHS)/RHS` for lower bounds, `(RHS − LHS)/RHS` for upper bounds.
//! Sampling is seeded so reports are reproducible.

use std::collections::BTreeMap;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::budget::Budget;
use crate::classify::UNIT_TOLERANCE;
use crate::error::{Error, Result};
use crate::operators::{EigenOp, IterateRoute};
use crate::series::TruncatedSeries;
use crate::symbols::iterated_symbol;

/// Relative slack below zero still counted as a pass (rounding).
pub const ROUNDING: f64 = 1e-9;

/// Monomials `z^p, p ∈ [m, m + WINDOW]` and random samples of that degree span.
pub const WINDOW: usize = 32;

pub mod lemma {
    pub const ITERACIONPOLINOMIO: &str = "iteracionpolinomio";
    pub const INFINF: &str = "infinf";
    pub const SUPSUP: &str = "supsup";
    pub const MODULO1_ESTIMATE: &str = "modulo1_estimate";
    pub const ALL: [&str; 4] = [ITERACIONPOLINOMIO, INFINF, SUPSUP, MODULO1_ESTIMATE];
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LemmaReport {
    pub lemma: String,
    pub parameters: BTreeMap<String, f64>,
    pub checked: usize,
    pub violations: usize,
    /// Minimum margin over checks with a nonzero right-hand side (0 if none).
    pub worst_margin: f64,
    pub notes: Vec<String>,
}

impl LemmaReport {
    pub fn passed(&self) -> bool {
        self.violations == 0
    }
}

#[derive(Debug, Default)]
struct Tally {
    checked: usize,
    violations: usize,
    worst: Option<f64>,
}

/// Margin of `LHS ≥ RHS` from logs (`-∞` for zero sides); `None` when
/// `RHS = 0`.
fn margin_at_least(ln_lhs: f64, ln_rhs: f64) -> Option<f64> {
    if ln_rhs == f64::NEG_INFINITY {
        None
    } else if ln_lhs == f64::NEG_INFINITY {
        Some(-1.0)
    } else {
        Some(capped_expm1(ln_lhs - ln_rhs))
    }
}

/// Margin of `LHS ≤ RHS`; `None` when both sides vanish.
fn margin_at_most(ln_lhs: f64, ln_rhs: f64) -> Option<f64> {
    if ln_lhs == f64::NEG_INFINITY {
        (ln_rhs != f64::NEG_INFINITY).then_some(1.0)
    } else if ln_rhs == f64::NEG_INFINITY {
        Some(f64::MIN)
    } else {
        Some(-capped_expm1(ln_lhs - ln_rhs))
    }
}

impl Tally {
    fn at_least(&mut self, ln_lhs: f64, ln_rhs: f64) -> bool {
        self.record(margin_at_least(ln_lhs, ln_rhs))
    }

    fn at_most(&mut self, ln_lhs: f64, ln_rhs: f64) -> bool {
        self.record(margin_at_most(ln_lhs, ln_rhs))
    }

    fn record(&mut self, margin: Option<f64>) -> bool {
        self.checked += 1;
        let Some(mut margin) = margin else { return true };
        let ok = margin >= -ROUNDING;
        if ok && margin <= 0.0 {
            margin = 0.0;
        }
        if !ok {
            self.violations += 1;
        }
        self.worst = Some(self.worst.map_or(margin, |w| w.min(margin)));
        ok
    }

    fn into_report(self, lemma: &str, parameters: BTreeMap<String, f64>, notes: Vec<String>) -> LemmaReport {
        LemmaReport {
            lemma: lemma.to_string(),
            parameters,
            checked: self.checked,
            violations: self.violations,
            worst_margin: self.worst.unwrap_or(0.0),
            notes,
        }
    }
}

fn capped_expm1(x: f64) -> f64 {
    x.exp_m1().clamp(-1.0, f64::MAX)
}

fn ln_abs(x: f64) -> f64 {
    if x == 0.0 {
        f64::NEG_INFINITY
    } else {
        x.abs().ln()
    }
}

/// `ln(p (p−1) ⋯ (p−k+1))`; `-∞` when `k > p`.
fn ln_falling(p: usize, k: usize) -> f64 {
    if k > p {
        return f64::NEG_INFINITY;
    }
    (0..k).map(|i| ((p - i) as f64).ln()).sum()
}

fn ln_factorial(n: usize) -> f64 {
    ln_falling(n, n)
}

fn logsumexp(terms: impl IntoIterator<Item = f64>) -> f64 {
    let terms: Vec<f64> = terms.into_iter().filter(|t| *t > f64::NEG_INFINITY).collect();
    let Some(top) = terms.iter().copied().reduce(f64::max) else {
        return f64::NEG_INFINITY;
    };
    top + terms.iter().map(|t| (t - top).exp()).sum::<f64>().ln()
}

fn random_unit(rng: &mut impl Rng) -> Complex64 {
    Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))
}

fn sampler(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

fn base_parameters(op: &EigenOp) -> BTreeMap<String, f64> {
    let mut p = BTreeMap::new();
    p.insert("lambda_re".into(), op.lambda().re);
    p.insert("lambda_im".into(), op.lambda().im);
    p.insert("d".into(), op.degree() as f64);
    p
}

fn require_polynomial(op: &EigenOp) -> Result<usize> {
    if !op.phi().is_polynomial() || op.degree() == 0 {
        return Err(Error::Precondition("φ must be a non-constant polynomial".into()));
    }
    Ok(op.degree())
}

/// Power series `Σ_{i} a_i z^{lo+i}` stored as `e^{ln_scale} · mantissas`, so
/// that dilations by `λⁿ` with large exponents stay representable.
#[derive(Debug, Clone)]
struct ScaledSeries {
    lo: usize,
    mant: Vec<Complex64>,
    ln_scale: f64,
}

impl ScaledSeries {
    fn new(lo: usize, mant: Vec<Complex64>, ln_scale: f64) -> Self {
        let mut s = ScaledSeries { lo, mant, ln_scale };
        s.normalize();
        s
    }

    fn normalize(&mut self) {
        let top = self.mant.iter().map(|c| c.norm()).fold(0.0, f64::max);
        if top > 0.0 && top.is_finite() {
            for c in &mut self.mant {
                *c /= top;
            }
            self.ln_scale += top.ln();
        }
    }

    /// `φ(D)` for a polynomial jet `c_0, …, c_d`.
    fn apply_symbol(&self, jet: &[Complex64]) -> Self {
        let d = jet.len() - 1;
        let hi = self.lo + self.mant.len() - 1;
        let lo = self.lo.saturating_sub(d);
        let mut out = vec![Complex64::new(0.0, 0.0); hi - lo + 1];
        for (q, slot) in (lo..=hi).zip(out.iter_mut()) {
            for (j, c) in jet.iter().enumerate() {
                let p = q + j;
                if p < self.lo || p > hi || *c == Complex64::new(0.0, 0.0) {
                    continue;
                }
                let falling: f64 = (0..j).map(|i| (p - i) as f64).product();
                *slot += c * falling * self.mant[p - self.lo];
            }
        }
        ScaledSeries::new(lo, out, self.ln_scale)
    }

    /// `f(λz)`; `|λ|^{lo}` goes into the scale.
    fn dilate(&self, lambda: Complex64) -> Self {
        let (r, theta) = lambda.to_polar();
        let mut w = Complex64::from_polar(1.0, theta * self.lo as f64);
        let mut mant = self.mant.clone();
        for c in &mut mant {
            *c *= w;
            w *= lambda;
        }
        ScaledSeries::new(self.lo, mant, self.ln_scale + self.lo as f64 * r.ln())
    }

    fn ln_rho(&self, m: f64) -> f64 {
        let lm = m.ln();
        self.ln_scale
            + logsumexp(
                self.mant
                    .iter()
                    .enumerate()
                    .map(|(i, c)| ln_abs(c.norm()) + (self.lo + i) as f64 * lm),
            )
    }

    fn ln_coeff_abs(&self, i: usize) -> f64 {
        ln_abs(self.mant[i].norm()) + self.ln_scale
    }
}

/// `ρ_M(Lⁿ h) ≥ cⁿ |λ|^{d(1+2+⋯+(n−1))} ρ_M(h^{(nd)}(λⁿ z))` for `h ∈ N_{m_n}`,
/// with `c = |a_d|/2`, `L = R_λ P(D)`, `|λ| > 1`.
///
/// For each `n ≤ n_max` the smallest `m_n ≥ max(m_{n−1}, nd)` is searched
/// such that the inequality holds on a seeded batch (monomials `z^p`,
/// `p ∈ [m, m + 32]`, and `samples` random elements of `N_m`). The found
/// `m_n` is then re-checked on a fresh batch; only that batch counts towards
/// `checked` and `violations`.
pub fn verify_iteracionpolinomio(op: &EigenOp, m_radius: f64, n_max: usize, samples: usize, seed: u64) -> Result<LemmaReport> {
    let d = require_polynomial(op)?;
    let lambda = op.lambda();
    if lambda.norm() <= 1.0 {
        return Err(Error::Precondition(format!("needs |λ| > 1, got {}", lambda.norm())));
    }
    if !(m_radius > 0.0) || !m_radius.is_finite() {
        return Err(Error::InvalidInput(format!("radius M must be positive, got {m_radius}")));
    }
    let jet = op.phi().poly().to_vec();
    let c = jet[d].norm() / 2.0;
    let cap = Budget::current().search_cap;
    let probe = IteracionProbe { lambda, jet: &jet, d, c, m_radius, samples, seed };

    let mut parameters = base_parameters(op);
    parameters.insert("M".into(), m_radius);
    parameters.insert("c".into(), c);
    parameters.insert("n_max".into(), n_max as f64);
    parameters.insert("samples_per_n".into(), (samples + WINDOW + 1) as f64);
    let mut notes = vec![format!(
        "samples: monomials z^p for p in [m_n, m_n + {WINDOW}], {} uniform and {} RHS-balanced random elements of N_m_n",
        samples.div_ceil(2),
        samples / 2
    )];

    let mut tally = Tally::default();
    let mut m_prev = 0;
    for n in 1..=n_max {
        let start = m_prev.max(n * d);
        let m_n = probe.search(n, start, cap)?;
        if m_n > start {
            notes.push(format!("n = {n}: m = {} fails on the search batch (informational)", m_n - 1));
        }
        probe.check(n, m_n, 1, &mut tally)?;
        parameters.insert(format!("m_{n}"), m_n as f64);
        m_prev = m_n;
    }
    Ok(tally.into_report(lemma::ITERACIONPOLINOMIO, parameters, notes))
}

struct IteracionProbe<'a> {
    lambda: Complex64,
    jet: &'a [Complex64],
    d: usize,
    c: f64,
    m_radius: f64,
    samples: usize,
    seed: u64,
}

impl IteracionProbe<'_> {
    fn search(&self, n: usize, start: usize, cap: usize) -> Result<usize> {
        search_threshold(start, cap, |m| {
            let mut t = Tally::default();
            self.check(n, m, 0, &mut t)?;
            Ok(t.violations == 0)
        })
        .map_err(|e| match e {
            Error::Budget(_) => Error::Budget(format!("m_{n} search exceeded cap {cap}")),
            other => other,
        })
    }

    fn check(&self, n: usize, m: usize, batch: u64, tally: &mut Tally) -> Result<()> {
        let mut rng = sampler(self.seed, (batch << 62) | ((n as u64) << 40) | m as u64);
        for p in m..=m + WINDOW {
            let mut mant = vec![Complex64::new(0.0, 0.0); p - m + 1];
            mant[p - m] = Complex64::new(1.0, 0.0);
            self.check_one(n, &ScaledSeries::new(m, mant, 0.0), tally)?;
        }
        for i in 0..self.samples {
            let mant: Vec<Complex64> = (0..=WINDOW).map(|_| random_unit(&mut rng)).collect();
            let h = if i % 2 == 0 {
                ScaledSeries::new(m, mant, 0.0)
            } else {
                self.balanced(n, m, mant)
            };
            self.check_one(n, &h, tally)?;
        }
        Ok(())
    }

    /// Reweights so every monomial contributes comparably to the RHS.
    fn balanced(&self, n: usize, m: usize, mut mant: Vec<Complex64>) -> ScaledSeries {
        let nd = n * self.d;
        let (ll, lm) = (self.lambda.norm().ln(), self.m_radius.ln());
        let weight = |p: usize| -(ln_falling(p, nd) + (n * (p - nd)) as f64 * ll + (p - nd) as f64 * lm);
        let w0 = weight(m);
        for (i, c) in mant.iter_mut().enumerate() {
            *c *= (weight(m + i) - w0).exp();
        }
        ScaledSeries::new(m, mant, w0)
    }

    fn check_one(&self, n: usize, h: &ScaledSeries, tally: &mut Tally) -> Result<()> {
        let (ln_lhs, ln_rhs) = self.sides(n, h)?;
        tally.at_least(ln_lhs, ln_rhs);
        Ok(())
    }

    /// LHS by repeated application on the scaled window, RHS from the
    /// coefficients of `h` directly.
    fn sides(&self, n: usize, h: &ScaledSeries) -> Result<(f64, f64)> {
        let mut g = h.clone();
        for _ in 0..n {
            g = g.apply_symbol(self.jet).dilate(self.lambda);
        }
        let ln_lhs = g.ln_rho(self.m_radius);

        let nd = n * self.d;
        let (ll, lm) = (self.lambda.norm().ln(), self.m_radius.ln());
        let ln_sum = logsumexp((0..h.mant.len()).filter(|i| h.lo + i >= nd).map(|i| {
            let p = h.lo + i;
            h.ln_coeff_abs(i) + ln_falling(p, nd) + (n * (p - nd)) as f64 * ll + (p - nd) as f64 * lm
        }));
        let ln_rhs = n as f64 * self.c.ln() + (self.d * n * (n - 1) / 2) as f64 * ll + ln_sum;
        if ln_lhs.is_nan() || ln_rhs.is_nan() {
            return Err(Error::Truncation("non-finite value in lower-bound harness".into()));
        }
        Ok((ln_lhs, ln_rhs))
    }
}

/// Margin of the `iteracionpolinomio` bound for a single `h` with
/// `c = |a_d|/2`; `None` when `h^{(nd)} = 0`.
pub fn iteracion_margin(op: &EigenOp, m_radius: f64, n: usize, h: &TruncatedSeries) -> Result<Option<f64>> {
    let d = require_polynomial(op)?;
    if !(m_radius > 0.0) || !m_radius.is_finite() {
        return Err(Error::InvalidInput(format!("radius M must be positive, got {m_radius}")));
    }
    let jet = op.phi().poly();
    let probe = IteracionProbe {
        lambda: op.lambda(),
        jet,
        d,
        c: jet[d].norm() / 2.0,
        m_radius,
        samples: 0,
        seed: 0,
    };
    let (l, r) = probe.sides(n, &ScaledSeries::new(0, h.coeffs().to_vec(), 0.0))?;
    Ok(margin_at_least(l, r))
}

/// Smallest `m ∈ [start, cap]` accepted by `passes`, by doubling then
/// bisection (assumes acceptance is monotone in `m`).
fn search_threshold(start: usize, cap: usize, mut passes: impl FnMut(usize) -> Result<bool>) -> Result<usize> {
    if passes(start)? {
        return Ok(start);
    }
    let mut bad = start;
    let mut step = 1;
    let mut good = loop {
        let m = (start + step).min(cap);
        if m <= bad {
            return Err(Error::Budget(format!("threshold search exceeded cap {cap}")));
        }
        if passes(m)? {
            break m;
        }
        bad = m;
        step *= 2;
    };
    while good - bad > 1 {
        let mid = bad + (good - bad) / 2;
        if passes(mid)? {
            good = mid;
        } else {
            bad = mid;
        }
    }
    Ok(good)
}

/// `ρ_1(f^{(nd)}(λⁿ z)) ≥ m!/(m−nd)! |λ|^{mn/2 − n²d} ρ_{|λ|^{n/2}}(f)` for
/// `f ∈ N_m`, `m > nd`, `|λ| > 1`.
///
/// Samples are `z^m` (where the chain is tight) and random `f` with
/// exponents in `[m, m + 32]`. The left side is formed with series
/// differentiation and dilation, the right side from raw coefficients in
/// log space.
pub fn verify_infinf(n: usize, d: usize, lambda: Complex64, samples: usize, m: usize, seed: u64) -> Result<LemmaReport> {
    check_infinf(n, d, lambda, m)?;
    let mut rng = sampler(seed, ((n as u64) << 40) | ((d as u64) << 20) | m as u64);
    let mut tally = Tally::default();
    let mut coeffs = vec![Complex64::new(0.0, 0.0); m + WINDOW + 1];
    coeffs[m] = Complex64::new(1.0, 0.0);
    for i in 0..=samples {
        if i > 0 {
            for c in coeffs.iter_mut().skip(m) {
                *c = random_unit(&mut rng);
            }
        }
        let (ln_lhs, ln_rhs) = infinf_sides(n, d, lambda, m, &TruncatedSeries::new(coeffs.clone())?)?;
        tally.at_least(ln_lhs, ln_rhs);
    }

    let mut parameters = BTreeMap::new();
    parameters.insert("n".into(), n as f64);
    parameters.insert("d".into(), d as f64);
    parameters.insert("m".into(), m as f64);
    parameters.insert("lambda_re".into(), lambda.re);
    parameters.insert("lambda_im".into(), lambda.im);
    let notes = vec![format!("samples: z^{m} and {samples} random elements of N_{m} of degree ≤ {}", m + WINDOW)];
    Ok(tally.into_report(lemma::INFINF, parameters, notes))
}

fn check_infinf(n: usize, d: usize, lambda: Complex64, m: usize) -> Result<()> {
    if m <= n * d {
        return Err(Error::Precondition(format!("needs m > nd, got m = {m}, nd = {}", n * d)));
    }
    if lambda.norm() <= 1.0 {
        return Err(Error::Precondition(format!("needs |λ| > 1, got {}", lambda.norm())));
    }
    Ok(())
}

/// Logs of both sides of the `infinf` bound for one `f ∈ N_m`.
fn infinf_sides(n: usize, d: usize, lambda: Complex64, m: usize, f: &TruncatedSeries) -> Result<(f64, f64)> {
    let nd = n * d;
    let ll = lambda.norm().ln();
    let lhs = f.differentiate_n(nd).dilate(lambda.powu(n as u32)).seminorm(crate::series::Seminorm::Rho(1.0))?;
    if !lhs.is_finite() {
        return Err(Error::Truncation("left side overflows double precision".into()));
    }
    let ln_front = ln_falling(m, nd) + (m as f64 * n as f64 / 2.0 - (n * n * d) as f64) * ll;
    let ln_rho = logsumexp(
        f.coeffs()
            .iter()
            .enumerate()
            .map(|(p, c)| ln_abs(c.norm()) + p as f64 * n as f64 / 2.0 * ll),
    );
    Ok((ln_abs(lhs), ln_front + ln_rho))
}

/// Margin of the `infinf` bound for a single `f`; `None` when `f = 0`.
pub fn infinf_margin(n: usize, d: usize, lambda: Complex64, m: usize, f: &TruncatedSeries) -> Result<Option<f64>> {
    check_infinf(n, d, lambda, m)?;
    if m > 0 && !f.jet_vanishes(m - 1, 0.0) {
        return Err(Error::Precondition(format!("f must vanish to order {m} at 0")));
    }
    let (l, r) = infinf_sides(n, d, lambda, m, f)?;
    Ok(margin_at_least(l, r))
}

/// Degree of the random polynomials sampled by [`verify_supsup`].
pub const SUPSUP_DEGREE: usize = 32;

/// `|Lⁿ f(0)| ≤ Bⁿ ((d+1)n − 1)!/(n−1)! |λ|^{d(1+2+⋯+(n−1))} ρ_1(f)` with
/// `B = max_k |p_k|`.
///
/// The left side uses the closed-form iterate, the right side log
/// factorials. `samples` random complex polynomials of degree ≤ 32 are
/// checked for every `n ≤ n_max`.
pub fn verify_supsup(op: &EigenOp, n_max: usize, samples: usize, seed: u64) -> Result<LemmaReport> {
    let d = require_polynomial(op)?;
    let b = supsup_b(op);
    let mut rng = sampler(seed, 0);
    let mut tally = Tally::default();
    for n in 1..=n_max {
        for _ in 0..samples {
            let deg = rng.gen_range(0..=SUPSUP_DEGREE);
            let coeffs: Vec<Complex64> = (0..=deg).map(|_| random_unit(&mut rng)).collect();
            let (ln_lhs, ln_rhs) = supsup_sides(op, d, b, n, &TruncatedSeries::new(coeffs)?)?;
            tally.at_most(ln_lhs, ln_rhs);
        }
    }
    let mut parameters = base_parameters(op);
    parameters.insert("B".into(), b);
    parameters.insert("n_max".into(), n_max as f64);
    parameters.insert("samples_per_n".into(), samples as f64);
    let notes = vec![format!("samples: random complex polynomials of degree ≤ {SUPSUP_DEGREE}")];
    Ok(tally.into_report(lemma::SUPSUP, parameters, notes))
}

fn supsup_b(op: &EigenOp) -> f64 {
    op.phi().poly().iter().map(|c| c.norm()).fold(0.0, f64::max)
}

fn supsup_sides(op: &EigenOp, d: usize, b: f64, n: usize, f: &TruncatedSeries) -> Result<(f64, f64)> {
    let lhs = op.iterate(f, n, IterateRoute::ClosedForm)?.coeff(0).norm();
    let ln_front = n as f64 * b.ln() + ln_factorial((d + 1) * n - 1) - ln_factorial(n - 1)
        + (d * n * (n - 1) / 2) as f64 * op.lambda().norm().ln();
    let ln_rho = logsumexp(f.coeffs().iter().map(|c| ln_abs(c.norm())));
    Ok((ln_abs(lhs), ln_front + ln_rho))
}

/// Margin of the `supsup` bound for a single `f` and `n ≥ 1`; `None` when
/// both sides vanish.
pub fn supsup_margin(op: &EigenOp, f: &TruncatedSeries, n: usize) -> Result<Option<f64>> {
    let d = require_polynomial(op)?;
    if n == 0 {
        return Err(Error::InvalidInput("n must be at least 1".into()));
    }
    let (l, r) = supsup_sides(op, d, supsup_b(op), n, f)?;
    Ok(margin_at_most(l, r))
}

/// Smallest integer `M_n ≥ 1` with `C̃ n d x^{dn} ≤ 2^x` for every real
/// `x ≥ M_n`. The log-gap `x ln 2 − ln(C̃nd) − dn ln x` is convex, so past
/// its minimizer it has at most one root.
pub fn threshold_m_n(c_tilde: f64, n: usize, d: usize) -> f64 {
    let dn = (d * n) as f64;
    let k = (c_tilde * n as f64 * d as f64).ln();
    let gap = |x: f64| x * std::f64::consts::LN_2 - k - dn * x.ln();
    let x_min = (dn / std::f64::consts::LN_2).max(1.0);
    if gap(x_min) >= 0.0 && gap(1.0) >= 0.0 {
        return 1.0;
    }
    let (mut lo, mut hi) = (x_min, x_min * 2.0);
    while gap(hi) < 0.0 {
        lo = hi;
        hi *= 2.0;
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if gap(mid) < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    hi.ceil()
}

/// `ρ_M((R_λP(D))ⁿ z^s) ≤ C̃_n n d s^{nd} M^s` for `s ≤ s_max`, `|λ| = 1`,
/// `M ≥ 1`, with `C̃_n = max{|b_k^{(r)}| : 1 ≤ r ≤ n, 1 ≤ k ≤ dr}` read off
/// the iterated symbols.
///
/// `ρ_M` majorizes the modulus on `|z| = M`. The left side is formed by
/// repeated application. The report also exhibits `M_n` with
/// `C̃_n n d x^{dn} ≤ 2^x` for `x ≥ M_n`, checked on `M_n, …, M_n + 63`.
///
/// The bound leaves out `b_0^{(n)}`, so symbols with `P(0) ≠ 0` are reported
/// as violating at small `s`.
pub fn verify_modulo1_estimate(op: &EigenOp, m_radius: f64, n: usize, s_max: usize) -> Result<LemmaReport> {
    let d = require_polynomial(op)?;
    if (op.lambda().norm() - 1.0).abs() > UNIT_TOLERANCE {
        return Err(Error::Precondition(format!("needs |λ| = 1, got {}", op.lambda().norm())));
    }
    if !(m_radius >= 1.0) || !m_radius.is_finite() {
        return Err(Error::Precondition(format!("needs M ≥ 1, got {m_radius}")));
    }
    if n == 0 {
        return Err(Error::InvalidInput("n must be at least 1".into()));
    }
    let mut c_tilde: f64 = 0.0;
    for r in 1..=n {
        let sym = iterated_symbol(op.phi(), op.lambda(), r, d * r)?;
        for k in 1..=d * r {
            c_tilde = c_tilde.max(sym.coeff(k).norm());
        }
    }
    let nd = n * d;
    let mut tally = Tally::default();
    for s in 0..=s_max {
        let image = op.iterate(&TruncatedSeries::monomial(s, s), n, IterateRoute::Repeated)?;
        let lhs = image.seminorm(crate::series::Seminorm::Rho(m_radius))?;
        let ln_rhs = ln_abs(c_tilde) + ((n * d) as f64).ln() + nd as f64 * ln_abs(s as f64) + s as f64 * m_radius.ln();
        tally.at_most(ln_abs(lhs), ln_rhs);
    }
    let m_n = threshold_m_n(c_tilde, n, d);
    for j in 0..64 {
        let x = m_n + j as f64;
        tally.at_most(c_tilde.ln() + ((n * d) as f64).ln() + nd as f64 * x.ln(), x * std::f64::consts::LN_2);
    }
    let mut parameters = base_parameters(op);
    parameters.insert("n".into(), n as f64);
    parameters.insert("M".into(), m_radius);
    parameters.insert("s_max".into(), s_max as f64);
    parameters.insert("C_tilde".into(), c_tilde);
    parameters.insert("M_n".into(), m_n);
    let mut notes = vec![format!("samples: z^s for s in [0, {s_max}], plus x = M_n + j for j < 64")];
    if op.phi().value_at_zero() != Complex64::new(0.0, 0.0) {
        notes.push("P(0) ≠ 0: the b_0 term is outside the bound".into());
    }
    Ok(tally.into_report(lemma::MODULO1_ESTIMATE, parameters, notes))
}
