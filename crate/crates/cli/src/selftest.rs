//! Invariant sweep across every module, reproducible from one seed.
//!
//! Each check reduces to a single number compared against a threshold
//! (smaller is better). The report holds no timings or other run-dependent
//! data, so equal seeds give byte-identical JSON.

use eigenop_core::classify::{citation, classify};
use eigenop_core::dynamics::{construct_supercyclic, super2_ratio_trace, Target};
use eigenop_core::exact::ExactOp;
use eigenop_core::symbols::{iterated_symbol, leibniz_coefficients};
use eigenop_core::verify::{verify_infinf, verify_iteracionpolinomio, verify_modulo1_estimate, verify_supsup};
use eigenop_core::{
    similarity_check, Builtin, Classification, EigenOp, IterateRoute, PhiSpec, Result, Seminorm, TruncatedSeries,
};
use num_complex::Complex64;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::sample;

#[derive(Debug, Clone, Serialize)]
pub struct Check {
    pub module: String,
    pub name: String,
    pub passed: bool,
    pub value: f64,
    pub threshold: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

#[derive(Debug, Clone, Serialize)]
pub struct SelftestReport {
    pub seed: u64,
    pub passed: bool,
    pub checks: Vec<Check>,
}

type CheckFn = fn(&mut ChaCha8Rng, u64) -> Result<f64>;

const CHECKS: &[(&str, &str, f64, CheckFn)] = &[
    ("series", "translate_round_trip", 1.0, translate_round_trip),
    ("series", "dilate_round_trip", 1e-12, dilate_round_trip),
    ("series", "rho_is_a_norm", 8.0 * f64::EPSILON, rho_is_a_norm),
    ("series", "dilation_commutation_on_monomials", 16.0 * f64::EPSILON, dilation_commutation),
    ("symbols", "leibniz_matches_product", 1e-9, leibniz_matches_product),
    ("operators", "commutation_residual", 1e-12, commutation_residual),
    ("operators", "iterate_route_agreement", 1e-9, route_agreement),
    ("operators", "eigen_residual", 1e-10, eigen_residual),
    ("operators", "right_inverse_exact", 1e-9, right_inverse_exact),
    ("operators", "similarity", 1e-10, similarity),
    ("classify", "table_examples", 0.0, table_examples),
    ("classify", "containment_and_biconditionals", 0.0, containment_and_biconditionals),
    ("dynamics", "construction_distance_over_tol", 1.0, construction),
    ("dynamics", "ratio_decay", 1e-3, ratio_decay),
    ("verify", "iteracionpolinomio_violations", 0.0, lemma_iteracion),
    ("verify", "infinf_violations", 0.0, lemma_infinf),
    ("verify", "supsup_violations", 0.0, lemma_supsup),
    ("verify", "modulo1_estimate_violations", 0.0, lemma_modulo1),
];

pub fn run(seed: u64) -> SelftestReport {
    let checks: Vec<Check> = CHECKS
        .iter()
        .enumerate()
        .map(|(i, &(module, name, threshold, f))| {
            let mut rng = sample::rng(seed, i as u64);
            let (value, error) = match f(&mut rng, seed) {
                Ok(v) => (v, None),
                Err(e) => (f64::NAN, Some(e.to_string())),
            };
            Check {
                module: module.into(),
                name: name.into(),
                passed: error.is_none() && value <= threshold,
                value,
                threshold,
                error,
            }
        })
        .collect();
    SelftestReport { seed, passed: checks.iter().all(|c| c.passed), checks }
}

fn c(re: f64) -> Complex64 {
    Complex64::new(re, 0.0)
}

fn rho1(f: &TruncatedSeries) -> Result<f64> {
    f.seminorm(Seminorm::Rho(1.0))
}

fn rel(a: &TruncatedSeries, b: &TruncatedSeries) -> Result<f64> {
    let scale = rho1(a)?.max(rho1(b)?).max(f64::MIN_POSITIVE);
    Ok(rho1(&(a - b))? / scale)
}

fn translate_round_trip(rng: &mut ChaCha8Rng, _: u64) -> Result<f64> {
    let mut worst: f64 = 0.0;
    for _ in 0..16 {
        let f = sample::series(rng, 32);
        let r = rng.gen_range(0.0..2.0);
        let alpha = Complex64::from_polar(r, rng.gen_range(0.0..std::f64::consts::TAU));
        let err = rho1(&(&f.translate(alpha).translate(-alpha) - &f))?;
        // storing f(z + α) costs about eps·ρ_{1+2|α|}(f) on the way back
        let conditioned = 64.0 * 32.0 * f64::EPSILON * f.seminorm(Seminorm::Rho(1.0 + 2.0 * r))?;
        worst = worst.max(err / (1e-10 * rho1(&f)?).max(conditioned));
    }
    Ok(worst)
}

fn dilate_round_trip(rng: &mut ChaCha8Rng, _: u64) -> Result<f64> {
    let mut worst: f64 = 0.0;
    for _ in 0..16 {
        let f = sample::series(rng, 32);
        let lam = sample::lambda(rng, 0.5, 2.0);
        worst = worst.max(rel(&f.dilate(lam).dilate(lam.inv()), &f)?);
    }
    Ok(worst)
}

fn rho_is_a_norm(rng: &mut ChaCha8Rng, _: u64) -> Result<f64> {
    let mut worst: f64 = 0.0;
    for _ in 0..16 {
        let (f, g) = (sample::series(rng, 24), sample::series(rng, 24));
        let s = Seminorm::Rho(rng.gen_range(0.5..3.0));
        let a = sample::complex(rng);
        let (rf, rg) = (s.eval(&f)?, s.eval(&g)?);
        let triangle = (s.eval(&(&f + &g))? - rf - rg) / (rf + rg);
        let homogeneity = (s.eval(&f.scale(a))? - a.norm() * rf).abs() / (a.norm() * rf);
        worst = worst.max(triangle).max(homogeneity);
    }
    Ok(worst)
}

fn dilation_commutation(rng: &mut ChaCha8Rng, _: u64) -> Result<f64> {
    let mut worst: f64 = 0.0;
    for _ in 0..4 {
        let lam = sample::lambda(rng, 0.5, 2.0);
        for s in 0..=64 {
            let z = TruncatedSeries::monomial(s, 64);
            let lhs = z.dilate(lam).differentiate();
            let rhs = z.differentiate().dilate(lam).scale(lam);
            worst = worst.max(rel(&lhs, &rhs)?);
        }
    }
    Ok(worst)
}

fn leibniz_matches_product(rng: &mut ChaCha8Rng, _: u64) -> Result<f64> {
    let mut worst: f64 = 0.0;
    for _ in 0..10 {
        let phi = sample::poly_symbol(rng, 3);
        let lam = sample::lambda(rng, 0.5, 2.0);
        for k in 1..=4 {
            let leib = leibniz_coefficients(&phi, lam, k, 12)?;
            let prod = iterated_symbol(&phi, lam, k, 12)?;
            let mut fact = 1.0;
            for (m, a) in leib.iter().enumerate() {
                if m > 0 {
                    fact *= m as f64;
                }
                let want = prod.coeff(m) * fact;
                let scale = want.norm().max(a.norm());
                if scale > 0.0 {
                    worst = worst.max((a - want).norm() / scale);
                }
            }
        }
    }
    Ok(worst)
}

fn commutation_residual(rng: &mut ChaCha8Rng, _: u64) -> Result<f64> {
    let mut ops: Vec<EigenOp> = (0..16).map(|_| sample::poly_op(rng, 4, 0.4, 2.5)).collect();
    for lam in [Complex64::new(0.0, 1.0), c(-1.0)] {
        ops.push(EigenOp::new(lam, sample::poly_symbol(rng, 4))?);
    }
    ops.iter().try_fold(0.0f64, |w, op| Ok(w.max(op.commutation_residual(64)?)))
}

fn route_agreement(rng: &mut ChaCha8Rng, _: u64) -> Result<f64> {
    let mut worst: f64 = 0.0;
    for _ in 0..10 {
        let op = sample::poly_op(rng, 4, 0.4, 2.5);
        let f = sample::series(rng, 32);
        let n = rng.gen_range(0..=8);
        let a = op.iterate(&f, n, IterateRoute::Repeated)?;
        let b = op.iterate(&f, n, IterateRoute::ClosedForm)?;
        worst = worst.max(rel(&a, &b)?);
    }
    Ok(worst)
}

/// The three operators of the eigen-machinery acceptance check.
pub fn eigen_ops() -> Vec<EigenOp> {
    [(0.5, vec![0., 1.]), (1.0 / 3.0, vec![0., 0., 1.]), (0.7, vec![0., 1., 1.])]
        .into_iter()
        .map(|(l, p)| EigenOp::polynomial(c(l), &p).expect("valid operator"))
        .collect()
}

fn eigen_residual(_: &mut ChaCha8Rng, _: u64) -> Result<f64> {
    let mut worst: f64 = 0.0;
    for op in eigen_ops() {
        let basis = op.eigen_basis(20)?;
        for (k, p) in basis.polys.iter().enumerate() {
            let r = &op.apply_psi_part(p) - &p.scale(basis.eigenvalue(k));
            worst = worst.max(rho1(&r)? / rho1(p)?);
        }
    }
    Ok(worst)
}

fn right_inverse_exact(_: &mut ChaCha8Rng, _: u64) -> Result<f64> {
    let mut worst: f64 = 0.0;
    for op in eigen_ops() {
        let exact = ExactOp::new(&op)?;
        let basis = exact.eigen_basis(6)?;
        for k in 1..=3 {
            for n in 0..=6 {
                worst = worst.max(exact.right_inverse_residual(&basis, k, n)?);
            }
        }
    }
    Ok(worst)
}

fn similarity(_: &mut ChaCha8Rng, _: u64) -> Result<f64> {
    let cases = [
        (c(2.0), vec![c(1.0)], c(1.0)),
        (c(0.5), vec![c(1.0), c(1.0)], c(0.5)),
        (Complex64::new(0.0, 1.0), vec![c(0.0), c(1.0)], c(-0.5)),
    ];
    cases
        .iter()
        .try_fold(0.0f64, |w, (l, p, b)| Ok(w.max(similarity_check(*l, p, *b, 16)?)))
}

fn sym(poly: &[f64], b: f64, builtin: Builtin) -> PhiSpec {
    PhiSpec::new(poly.iter().map(|&x| c(x)).collect(), c(b), builtin).expect("nonzero symbol")
}

fn verdicts(k: &Classification) -> [bool; 4] {
    [k.hc.verdict, k.sc.verdict, k.hc_inf.verdict, k.sc_inf.verdict]
}

/// Grid cases with the expected `[hc, sc, hc_inf, sc_inf]` verdicts and the
/// citation expected on the deciding class.
#[allow(clippy::type_complexity)]
pub fn table_cases() -> Vec<(Complex64, PhiSpec, [bool; 4], fn(&Classification) -> &str, &'static str)> {
    use citation::*;
    vec![
        (c(2.0), sym(&[0., 1.], 1., Builtin::None), [true, true, false, false], |k| &k.hc_inf.citation, MODULOMAYORUNO),
        (c(2.0), sym(&[0., 1.], 1., Builtin::None), [true, true, false, false], |k| &k.sc_inf.citation, GENERAL),
        (c(0.5), sym(&[0., 1.], 0., Builtin::None), [false, true, false, true], |k| &k.sc.citation, SUPER1),
        (c(0.5), sym(&[0., 1.], 0., Builtin::None), [false, true, false, true], |k| &k.sc_inf.citation, MODULOMENOR1),
        (c(0.5), sym(&[1., 1.], 0., Builtin::None), [false, false, false, false], |k| &k.sc.citation, SUPER2),
        (Complex64::new(0.0, 1.0), sym(&[0., 1.], 0., Builtin::None), [true, true, true, true], |k| &k.hc_inf.citation, MODULO1),
        (c(3.0), sym(&[1.], 0., Builtin::Cos), [true, true, true, true], |k| &k.hc_inf.citation, INFINITOSCEROS),
        (c(2.0), sym(&[1.], 1., Builtin::None), [false, false, false, false], |k| &k.sc.citation, BERNAL_BONILLA_CALDERON),
        (c(1.0), sym(&[0., 1.], 0., Builtin::None), [true, true, true, true], |k| &k.hc.citation, GODEFROY_SHAPIRO),
        (c(1.0), sym(&[2.], 0., Builtin::None), [false, false, false, false], |k| &k.hc.citation, GODEFROY_SHAPIRO),
        // remaining table cells
        (c(2.0), sym(&[1., 1.], 0., Builtin::None), [true, true, false, false], |k| &k.hc.citation, EXTENDED),
        (c(0.5), sym(&[1.], 0., Builtin::Cos), [false, false, false, false], |k| &k.sc.citation, SUPER2),
        (c(0.5), sym(&[0., 1.], 0., Builtin::SinOverZ), [false, true, false, true], |k| &k.sc.citation, SUPER1),
        (Complex64::from_polar(1.0, 0.3), sym(&[1.], 0., Builtin::Cosh), [true, true, true, true], |k| &k.hc_inf.citation, INFINITOSCEROS),
        (Complex64::new(0.0, 1.0), sym(&[1.], 2., Builtin::None), [false, false, false, false], |k| &k.sc.citation, BERNAL_BONILLA_CALDERON),
        (c(0.5), sym(&[3.], 0., Builtin::None), [false, false, false, false], |k| &k.sc.citation, BERNAL_BONILLA_CALDERON),
        (c(1.0), sym(&[0., 1.], 0.5, Builtin::Cos), [true, true, true, true], |k| &k.hc_inf.citation, MENET_PETERSSON_SHKARIN),
    ]
}

/// Number of table cases whose verdicts or citation differ from the tables.
pub fn table_mismatches() -> Result<usize> {
    let mut bad = 0;
    for (lam, phi, want, field, cite) in table_cases() {
        let k = classify(lam, &phi)?;
        if verdicts(&k) != want || field(&k) != cite {
            bad += 1;
        }
    }
    Ok(bad)
}

fn table_examples(_: &mut ChaCha8Rng, _: u64) -> Result<f64> {
    Ok(table_mismatches()? as f64)
}

/// Random `(λ, φ)` across every branch of the decision procedure.
pub fn random_case(rng: &mut impl Rng) -> (Complex64, PhiSpec) {
    let radii = [0.3, 0.5, 0.9, 1.0, 1.5, 2.0, 3.0];
    let lam = if rng.gen_bool(0.1) {
        c(1.0)
    } else {
        Complex64::from_polar(radii[rng.gen_range(0..radii.len())], rng.gen_range(0.0..std::f64::consts::TAU))
    };
    let mut poly: Vec<Complex64> = (0..=rng.gen_range(0..=3)).map(|_| sample::complex(rng)).collect();
    if poly.len() > 1 && rng.gen_bool(0.5) {
        poly[0] = c(0.0);
    }
    if poly.iter().all(|z| z.norm() == 0.0) {
        poly.push(c(1.0));
    }
    let b = if rng.gen_bool(0.5) { c(0.0) } else { sample::complex(rng) };
    let builtin = [Builtin::None, Builtin::None, Builtin::Cos, Builtin::SinOverZ, Builtin::Cosh][rng.gen_range(0..5)];
    (lam, PhiSpec::new(poly, b, builtin).expect("nonzero symbol"))
}

/// Failures of the containment chain and of the two biconditionals on
/// `samples` random cases.
pub fn grid_failures(rng: &mut impl Rng, samples: usize) -> Result<usize> {
    let mut bad = 0;
    for _ in 0..samples {
        let (lam, phi) = random_case(rng);
        let k = classify(lam, &phi)?;
        let inside = lam.norm() < 1.0 - eigenop_core::classify::UNIT_TOLERANCE;
        let vanishes = phi.zero_meta().order_at_origin >= 1;
        let ok = k.containment_holds()
            && k.is_sc_not_hc() == (inside && vanishes)
            && k.is_sc_inf_not_hc_inf() == (inside && vanishes)
            && classify(lam, &phi.scaled(c(-2.5))?)? == k;
        if !ok {
            bad += 1;
        }
    }
    Ok(bad)
}

fn containment_and_biconditionals(rng: &mut ChaCha8Rng, _: u64) -> Result<f64> {
    Ok(grid_failures(rng, 200)? as f64)
}

/// Degree-8 jet of `sin z`.
pub fn sin_jet(n: usize) -> TruncatedSeries {
    let mut coeffs = vec![c(0.0); n + 1];
    let mut term = 1.0;
    for (k, slot) in coeffs.iter_mut().enumerate().skip(1) {
        term /= k as f64;
        if k % 2 == 1 {
            *slot = c(if k % 4 == 1 { term } else { -term });
        }
    }
    TruncatedSeries::new(coeffs).expect("finite")
}

/// The constructive-supercyclicity instance: `λ = 1/2`, `φ = z`.
pub fn construction_instance() -> (EigenOp, Vec<Target>) {
    let op = EigenOp::polynomial(c(0.5), &[0., 1.]).expect("valid operator");
    let targets = vec![
        Target::new("exp", TruncatedSeries::exp_jet(c(1.0), 8)),
        Target::new("sin", sin_jet(8)),
        Target::new("1+3z^2", TruncatedSeries::from_real(&[1., 0., 3.]).expect("finite").resized(8)),
    ];
    (op, targets)
}

/// Largest `ρ_1` distance over the schedule, recomputed by the closed-form
/// iterate route rather than the builder's own normalized iterates.
pub fn reverified_distance(op: &EigenOp, report: &eigenop_core::ConstructionReport, targets: &[Target]) -> Result<f64> {
    let mut worst: f64 = 0.0;
    for (entry, t) in report.schedule.iter().zip(targets) {
        let image = op.iterate(&report.vector, entry.k, IterateRoute::ClosedForm)?.scale(entry.mu);
        worst = worst.max(rho1(&(&image - &t.series.resized(image.truncation_degree())))?);
    }
    Ok(worst)
}

fn construction(_: &mut ChaCha8Rng, _: u64) -> Result<f64> {
    let tol = 1e-3;
    let (op, targets) = construction_instance();
    let report = construct_supercyclic(&op, &targets, tol, Seminorm::Rho(1.0))?;
    let claimed = report.schedule.iter().map(|e| e.achieved_distance).fold(0.0, f64::max);
    Ok(claimed.max(reverified_distance(&op, &report, &targets)?) / tol)
}

fn ratio_decay(_: &mut ChaCha8Rng, _: u64) -> Result<f64> {
    let op = EigenOp::polynomial(c(0.5), &[1., 1.])?;
    let trace = super2_ratio_trace(&op, &TruncatedSeries::exp_jet(c(1.0), 12), c(1.0), 4, 25)?;
    match (trace[0].ratio, trace[24].ratio) {
        (Some(first), Some(last)) if trace.iter().all(|e| e.ratio.is_some()) => Ok(last / first),
        _ => Err(eigenop_core::Error::Degenerate("ratio trace has undefined entries".into())),
    }
}

fn lemma_iteracion(_: &mut ChaCha8Rng, seed: u64) -> Result<f64> {
    let op = EigenOp::polynomial(c(1.5), &[1., 0.5, 1.])?;
    Ok(verify_iteracionpolinomio(&op, 1.0, 3, 20, seed)?.violations as f64)
}

fn lemma_infinf(_: &mut ChaCha8Rng, seed: u64) -> Result<f64> {
    Ok(verify_infinf(2, 1, c(1.5), 20, 5, seed)?.violations as f64)
}

fn lemma_supsup(_: &mut ChaCha8Rng, seed: u64) -> Result<f64> {
    let op = EigenOp::polynomial(c(2.0), &[1., 1.])?;
    Ok(verify_supsup(&op, 4, 20, seed)?.violations as f64)
}

fn lemma_modulo1(_: &mut ChaCha8Rng, _: u64) -> Result<f64> {
    let op = EigenOp::new(Complex64::new(0.0, 1.0), PhiSpec::real_polynomial(&[0., 1.])?)?;
    Ok(verify_modulo1_estimate(&op, 1.0, 2, 64)?.violations as f64)
}
