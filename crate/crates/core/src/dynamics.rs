//! Orbit experiments for `L = R_λ φ(D)`.
//!
//! * [`orbit`] records (projective) orbits with seminorms and target distances.
//! * [`construct_supercyclic`] builds a vector whose normalized iterates
//!   `λ_k Lᵏ f` pass within a tolerance of each requested target, when
//!   `|λ| < 1` and `φ(0) = 0`.
//! * [`super2_ratio_trace`] follows `|(D^m Lᵏ f)(z_0)| / |(Lᵏ f)(0)|` in the
//!   regime `|λ| < 1`, `φ(0) ≠ 0`, where that ratio is the obstruction to
//!   supercyclicity.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::budget::Budget;
use crate::classify::{citation, classify_op};
use crate::error::{Error, Result};
use crate::operators::{EigenOp, IterateRoute};
use crate::series::{Seminorm, TruncatedSeries};

const ONE: Complex64 = Complex64::new(1.0, 0.0);

/// Denominators below this are reported as gaps in a ratio trace.
pub const RATIO_FLOOR: f64 = 1e-300;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Target {
    pub id: String,
    pub series: TruncatedSeries,
}

impl Target {
    pub fn new(id: impl Into<String>, series: TruncatedSeries) -> Self {
        Target { id: id.into(), series }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OrbitEntry {
    pub n: usize,
    pub scalar: Complex64,
    /// Aligned with [`OrbitRecord::seminorms`].
    pub seminorm_values: Vec<f64>,
    /// Aligned with [`OrbitRecord::target_ids`].
    pub target_distances: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OrbitRecord {
    pub op: EigenOp,
    pub start: TruncatedSeries,
    pub projective: bool,
    pub seminorms: Vec<Seminorm>,
    pub target_ids: Vec<String>,
    pub entries: Vec<OrbitEntry>,
}

impl OrbitRecord {
    /// `n, scalar_re, scalar_im`, then one column per seminorm and one
    /// `dist_<id>` column per target.
    pub fn csv_header(&self) -> Vec<String> {
        let mut cols = vec!["n".to_string(), "scalar_re".to_string(), "scalar_im".to_string()];
        cols.extend(self.seminorms.iter().map(Seminorm::label));
        cols.extend(self.target_ids.iter().map(|id| format!("dist_{id}")));
        cols
    }

    pub fn csv_rows(&self) -> Vec<Vec<String>> {
        self.entries
            .iter()
            .map(|e| {
                // `{:?}` round-trips and switches to exponent form for tiny values
                let num = |x: &f64| format!("{x:?}");
                let mut row = vec![e.n.to_string(), num(&e.scalar.re), num(&e.scalar.im)];
                row.extend(e.seminorm_values.iter().map(num));
                row.extend(e.target_distances.iter().map(num));
                row
            })
            .collect()
    }
}

/// Scalar `μ` minimizing `‖μ v − g‖₂` over coefficient vectors; 1 when the
/// minimizer is 0 or undefined.
pub fn least_squares_scalar(v: &TruncatedSeries, g: &TruncatedSeries) -> Complex64 {
    let n = v.coeffs().len().max(g.coeffs().len());
    let mut num = Complex64::new(0.0, 0.0);
    let mut den = 0.0;
    for k in 0..n {
        let a = v.coeff(k);
        num += a.conj() * g.coeff(k);
        den += a.norm_sqr();
    }
    let mu = if den > 0.0 { num / den } else { ONE };
    if mu == Complex64::new(0.0, 0.0) || !mu.re.is_finite() || !mu.im.is_finite() {
        ONE
    } else {
        mu
    }
}

/// Orbit `{μ_n Lⁿ f : n ≤ n_max}`. In projective mode `μ_n` is the
/// least-squares scalar towards the first target, otherwise 1.
pub fn orbit(
    op: &EigenOp,
    f: &TruncatedSeries,
    n_max: usize,
    seminorms: &[Seminorm],
    targets: &[Target],
    projective: bool,
) -> Result<OrbitRecord> {
    let budget = Budget::current();
    if n_max > budget.max_iterate {
        return Err(Error::Budget(format!("n_max = {n_max} exceeds iterate budget {}", budget.max_iterate)));
    }
    for s in seminorms {
        s.validated()?;
    }
    let rho1 = Seminorm::Rho(1.0);
    let mut entries = Vec::with_capacity(n_max + 1);
    let mut current = f.clone();
    for n in 0..=n_max {
        if n > 0 {
            current = op.apply(&current);
            if !current.is_finite() {
                return Err(Error::Truncation(format!("L^{n} f overflows double precision")));
            }
        }
        let scalar = match (projective, targets.first()) {
            (true, Some(t)) => least_squares_scalar(&current, &t.series),
            _ => ONE,
        };
        let point = current.scale(scalar);
        let seminorm_values = seminorms.iter().map(|s| s.eval(&point)).collect::<Result<Vec<_>>>()?;
        let target_distances = targets
            .iter()
            .map(|t| rho1.eval(&(&point - &t.series)))
            .collect::<Result<Vec<_>>>()?;
        entries.push(OrbitEntry { n, scalar, seminorm_values, target_distances });
    }
    Ok(OrbitRecord {
        op: op.clone(),
        start: f.clone(),
        projective,
        seminorms: seminorms.to_vec(),
        target_ids: targets.iter().map(|t| t.id.clone()).collect(),
        entries,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScheduleEntry {
    pub target_id: String,
    /// Iterate index `k_j`.
    pub k: usize,
    /// `μ_j = λ_{k_j}`.
    pub mu: Complex64,
    /// Degree `K_j` of the basis expansion used for this target.
    pub basis_degree: usize,
    /// `s(μ_j L^{k_j} f − g_j)` for the requested seminorm `s`.
    pub achieved_distance: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConstructionReport {
    pub vector: TruncatedSeries,
    pub schedule: Vec<ScheduleEntry>,
    pub tolerance: f64,
    pub seminorm: Seminorm,
    /// `S_{k_j} ĝ_j`, one per schedule entry; `vector` is their sum.
    pub blocks: Vec<TruncatedSeries>,
}

/// Greedy finite version of the hypercyclicity-criterion construction for
/// the normalized iterates `λ_k Lᵏ` when `|λ| < 1`, `φ(0) = 0`.
///
/// Each target `g_j` is cut to the shortest head `ĝ_j` whose tail is below
/// `tol/3`, expanded in the eigenpolynomials of `A_λ`, and lifted by `S_{k_j}`.
/// Indices satisfy `k_j·m > deg(block_i)` for all earlier blocks, so
/// `λ_{k_j} L^{k_j}` kills them exactly, and each later block is pushed far
/// enough out that its image under every earlier `λ_{k_i} L^{k_i}` stays
/// below `tol / (3·2^j)`.
pub fn construct_supercyclic(
    op: &EigenOp,
    targets: &[Target],
    tol: f64,
    seminorm: Seminorm,
) -> Result<ConstructionReport> {
    let verdict = classify_op(op).sc;
    if !(verdict.verdict && verdict.citation == citation::SUPER1) {
        return Err(Error::Precondition(format!(
            "constructive supercyclicity needs |λ| < 1 and φ(0) = 0 ({}: {})",
            verdict.citation, verdict.note
        )));
    }
    if !(tol > 0.0) || !tol.is_finite() {
        return Err(Error::InvalidInput(format!("tolerance must be positive, got {tol}")));
    }
    seminorm.validated()?;
    if targets.is_empty() {
        return Ok(ConstructionReport {
            vector: TruncatedSeries::zero(0),
            schedule: Vec::new(),
            tolerance: tol,
            seminorm,
            blocks: Vec::new(),
        });
    }

    let budget = Budget::current();
    let m = op.order_at_origin();

    let mut heads = Vec::with_capacity(targets.len());
    for t in targets {
        heads.push(shortest_head(&t.series, seminorm, tol / 3.0)?);
    }
    let k_max = heads.iter().map(|h| h.truncation_degree()).max().unwrap_or(0);
    let basis = op.eigen_basis(k_max)?;
    // λ_k Lᵏ S_k' p_n carries λ^{(k'−k)(mk − n)}; k·m ≥ K keeps that factor ≤ 1.
    let k_floor = k_max.div_ceil(m).max(1);

    let mut ks: Vec<usize> = Vec::with_capacity(targets.len());
    let mut blocks: Vec<TruncatedSeries> = Vec::with_capacity(targets.len());
    for (j, head) in heads.iter().enumerate() {
        let coords = basis.expand(head)?;
        let top_prev = blocks.iter().map(|b| b.truncation_degree()).max();
        let mut k = match (ks.last(), top_prev) {
            (Some(&k_prev), Some(deg)) => (deg / m + 1).max(k_prev + 1).max(k_floor),
            _ => k_floor,
        };
        let allowance = tol / (3.0 * 2f64.powi(j as i32));
        let block = loop {
            if k > budget.max_iterate {
                return Err(Error::Budget(format!(
                    "no iterate index ≤ {} separates target `{}` from earlier ones",
                    budget.max_iterate, targets[j].id
                )));
            }
            let block = lift(op, &basis, &coords, k)?;
            let mut fits = true;
            for &k_i in &ks {
                let leak = op.normalized_iterate(&block, k_i)?;
                if seminorm.eval(&leak)? >= allowance {
                    fits = false;
                    break;
                }
            }
            if fits {
                break block;
            }
            k += 1;
        };
        ks.push(k);
        blocks.push(block);
    }

    let top = blocks.iter().map(|b| b.truncation_degree()).max().unwrap_or(0);
    let vector = blocks.iter().fold(TruncatedSeries::zero(top), |acc, b| &acc + b);

    let mut schedule = Vec::with_capacity(targets.len());
    for ((t, &k), head) in targets.iter().zip(&ks).zip(&heads) {
        let image = op.normalized_iterate(&vector, k)?;
        let achieved_distance = seminorm.eval(&(&image - &t.series))?;
        if !(achieved_distance <= tol) {
            return Err(Error::Budget(format!(
                "target `{}` reached only {achieved_distance:e} at k = {k} (tolerance {tol:e})",
                t.id
            )));
        }
        schedule.push(ScheduleEntry {
            target_id: t.id.clone(),
            k,
            mu: op.normalizing_scalar(k),
            basis_degree: head.truncation_degree(),
            achieved_distance,
        });
    }
    Ok(ConstructionReport { vector, schedule, tolerance: tol, seminorm, blocks })
}

/// Shortest prefix `g_{≤K}` with `s(g − g_{≤K}) < bound`.
fn shortest_head(g: &TruncatedSeries, s: Seminorm, bound: f64) -> Result<TruncatedSeries> {
    let n = g.truncation_degree();
    for k in 0..=n {
        let head = g.resized(k);
        if s.eval(&(g - &head.resized(n)))? < bound {
            return Ok(head);
        }
    }
    Ok(g.clone())
}

/// `S_k(Σ c_i p_i) = Σ c_i S_k p_i`.
fn lift(
    op: &EigenOp,
    basis: &crate::operators::EigenBasis,
    coords: &[Complex64],
    k: usize,
) -> Result<TruncatedSeries> {
    let deg = coords.len().saturating_sub(1) + op.order_at_origin() * k;
    let mut out = TruncatedSeries::zero(deg);
    for (n, c) in coords.iter().enumerate() {
        if *c == Complex64::new(0.0, 0.0) {
            continue;
        }
        let s = op.right_inverse_on_basis(basis, k, n)?;
        out = &out + &s.scale(*c);
    }
    if !out.is_finite() {
        return Err(Error::Truncation(format!("S_{k} overflows double precision")));
    }
    Ok(out.resized(deg))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RatioEntry {
    pub k: usize,
    /// `|λ|^{mk} |(Lᵏ D^m f)(z_0)| = |(D^m Lᵏ f)(z_0)|`.
    pub numerator: f64,
    /// `|(Lᵏ f)(0)|`.
    pub denominator: f64,
    /// `None` when the denominator is below [`RATIO_FLOOR`].
    pub ratio: Option<f64>,
}

fn check_super2_regime(op: &EigenOp) -> Result<()> {
    if op.lambda().norm() >= 1.0 || op.phi().value_at_zero() == Complex64::new(0.0, 0.0) {
        return Err(Error::Precondition(format!(
            "ratio trace needs |λ| < 1 and φ(0) ≠ 0 (|λ| = {}, φ(0) = {})",
            op.lambda().norm(),
            op.phi().value_at_zero()
        )));
    }
    Ok(())
}

/// `|(D^m Lᵏ f)(z_0)| / |(Lᵏ f)(0)|` for `k = 1..=k_max`, with the numerator
/// formed as `|λ|^{mk} |(Lᵏ D^m f)(z_0)|` from `D L = λ L D`.
pub fn super2_ratio_trace(
    op: &EigenOp,
    f: &TruncatedSeries,
    z0: Complex64,
    m: usize,
    k_max: usize,
) -> Result<Vec<RatioEntry>> {
    check_super2_regime(op)?;
    let budget = Budget::current();
    if k_max > budget.max_iterate {
        return Err(Error::Budget(format!("k_max = {k_max} exceeds iterate budget {}", budget.max_iterate)));
    }
    let scale = op.lambda().norm().powi(m as i32);
    let mut top = f.clone();
    let mut derived = f.differentiate_n(m);
    let mut weight = 1.0;
    let mut out = Vec::with_capacity(k_max);
    for k in 1..=k_max {
        top = op.apply(&top);
        derived = op.apply(&derived);
        weight *= scale;
        let numerator = weight * derived.evaluate(z0).norm();
        let denominator = top.coeff(0).norm();
        let ratio = (denominator >= RATIO_FLOOR).then(|| numerator / denominator);
        out.push(RatioEntry { k, numerator, denominator, ratio });
    }
    Ok(out)
}

/// One ratio entry computed the other way round: `Lᵏ f` by the closed form,
/// then differentiated `m` times and evaluated at `z_0`.
pub fn super2_ratio_closed_form(
    op: &EigenOp,
    f: &TruncatedSeries,
    z0: Complex64,
    m: usize,
    k: usize,
) -> Result<RatioEntry> {
    check_super2_regime(op)?;
    let lk = op.iterate(f, k, IterateRoute::ClosedForm)?;
    let numerator = lk.differentiate_n(m).evaluate(z0).norm();
    let denominator = lk.coeff(0).norm();
    let ratio = (denominator >= RATIO_FLOOR).then(|| numerator / denominator);
    Ok(RatioEntry { k, numerator, denominator, ratio })
}

/// Suggests a derivative order for [`super2_ratio_trace`]: the smallest
/// `m ≥ 1` with `|λ|^m · g ≤ 1/2`, where `g ≥ 1` is the observed geometric
/// growth rate of `|(Lᵏ f)(z)|`-type quantities over `k ≤ k_probe`
/// (measured through `ρ_1(Lᵏ f)`).
pub fn suggest_derivative_order(op: &EigenOp, f: &TruncatedSeries, k_probe: usize) -> Result<usize> {
    check_super2_regime(op)?;
    let k_probe = k_probe.max(2);
    let mut g = f.clone();
    let first = op.apply(&g);
    g = first.clone();
    let start = first.rho_unchecked(1.0);
    for _ in 1..k_probe {
        g = op.apply(&g);
    }
    let end = g.rho_unchecked(1.0);
    let growth = if start > 0.0 && end > 0.0 {
        (end / start).powf(1.0 / (k_probe - 1) as f64).max(1.0)
    } else {
        1.0
    };
    let lam = op.lambda().norm();
    let mut m = 1;
    while lam.powi(m as i32) * growth > 0.5 {
        m += 1;
        if m > 4096 {
            return Err(Error::Budget("no reasonable derivative order found".into()));
        }
    }
    Ok(m)
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

    #[test]
    fn orbit_examples() {
        let op = EigenOp::polynomial(c(0.5, 0.), &[0., 1.]).unwrap();
        let rec = orbit(&op, &real(&[0., 1.]), 1, &[Seminorm::Rho(1.0)], &[], false).unwrap();
        assert_eq!(rec.entries.len(), 2);
        assert_eq!(rec.entries[1].n, 1);
        assert_eq!(rec.entries[1].seminorm_values, vec![1.0]);
        assert_eq!(rec.entries[1].scalar, ONE);

        let zero = orbit(&op, &TruncatedSeries::zero(5), 4, &[Seminorm::Rho(2.0), Seminorm::SupDisk(1.0)], &[], true)
            .unwrap();
        assert!(zero.entries.iter().all(|e| e.seminorm_values.iter().all(|v| *v == 0.0)));
        assert!(zero.entries.iter().all(|e| e.scalar != c(0., 0.)));
    }

    #[test]
    fn projective_scalar_recovers_multiple() {
        let op = EigenOp::polynomial(c(0.7, 0.2), &[0., 1., 3.]).unwrap();
        let f = real(&[1., 2., -1., 0.5, 3.]);
        let l2 = op.iterate(&f, 2, IterateRoute::Repeated).unwrap();
        let mu = c(-2., 1.5);
        let target = Target::new("g", l2.scale(mu));
        let rec = orbit(&op, &f, 2, &[], &[target], true).unwrap();
        let e = &rec.entries[2];
        assert!((e.scalar - mu).norm() < 1e-12);
        assert!(e.target_distances[0] < 1e-12);
    }

    #[test]
    fn csv_layout() {
        let op = EigenOp::polynomial(c(0.5, 0.), &[0., 1.]).unwrap();
        let t = Target::new("e", TruncatedSeries::exp_jet(ONE, 3));
        let rec = orbit(&op, &real(&[0., 1.]), 2, &[Seminorm::Rho(1.0)], &[t], false).unwrap();
        assert_eq!(rec.csv_header(), ["n", "scalar_re", "scalar_im", "rho(1)", "dist_e"]);
        let rows = rec.csv_rows();
        assert_eq!(rows.len(), 3);
        assert_eq!(rows[1][0], "1");
        assert_eq!(rows[1].len(), 5);
    }

    #[test]
    fn orbit_budget() {
        let op = EigenOp::polynomial(c(0.5, 0.), &[0., 1.]).unwrap();
        assert!(matches!(orbit(&op, &real(&[1.]), 100_000, &[], &[], false), Err(Error::Budget(_))));
    }

    #[test]
    fn construct_single_constant_target() {
        let op = EigenOp::polynomial(c(0.5, 0.), &[0., 1.]).unwrap();
        let report = construct_supercyclic(&op, &[Target::new("one", real(&[1.]))], 1e-6, Seminorm::Rho(1.0)).unwrap();
        assert_eq!(report.schedule.len(), 1);
        assert!(report.schedule[0].achieved_distance < 1e-12);
        assert_eq!(report.schedule[0].k, 1);
        assert_eq!(report.vector.trimmed(), real(&[0., 1.]));
    }

    #[test]
    fn construct_empty_targets() {
        let op = EigenOp::polynomial(c(0.5, 0.), &[0., 1.]).unwrap();
        let report = construct_supercyclic(&op, &[], 1e-3, Seminorm::Rho(1.0)).unwrap();
        assert!(report.schedule.is_empty());
        assert!(report.vector.is_zero());
    }

    #[test]
    fn construct_two_exponentials() {
        let op = EigenOp::polynomial(c(0.5, 0.), &[0., 1.]).unwrap();
        let targets = [
            Target::new("exp", TruncatedSeries::exp_jet(c(1., 0.), 8)),
            Target::new("2exp2", TruncatedSeries::exp_jet(c(2., 0.), 8).scale(c(2., 0.))),
        ];
        let tol = 1e-3;
        let report = construct_supercyclic(&op, &targets, tol, Seminorm::Rho(1.0)).unwrap();
        assert_eq!(report.schedule.len(), 2);
        assert!(report.schedule[0].k < report.schedule[1].k);
        for (entry, t) in report.schedule.iter().zip(&targets) {
            assert!(entry.achieved_distance < tol);
            let direct = op.iterate(&report.vector, entry.k, IterateRoute::Repeated).unwrap().scale(entry.mu);
            assert!((&direct - &t.series).rho_unchecked(1.0) < tol);
        }
    }

    #[test]
    fn construct_rejects_wrong_regime() {
        for (lambda, poly) in [(0.5, vec![1., 1.]), (2.0, vec![0., 1.]), (0.5, vec![3.])] {
            let op = EigenOp::polynomial(c(lambda, 0.), &poly).unwrap();
            let err = construct_supercyclic(&op, &[], 1e-3, Seminorm::Rho(1.0)).unwrap_err();
            assert!(matches!(err, Error::Precondition(_)), "{err}");
        }
    }

    #[test]
    fn ratio_trace_examples() {
        let op = EigenOp::polynomial(c(0.5, 0.), &[1., 1.]).unwrap();
        let f = TruncatedSeries::exp_jet(ONE, 6);
        let trace = super2_ratio_trace(&op, &f, c(0., 0.), 0, 5).unwrap();
        assert!(trace.iter().all(|e| (e.ratio.unwrap() - 1.0).abs() < 1e-14));

        let trace = super2_ratio_trace(&op, &real(&[1.]), c(1., 0.), 3, 5).unwrap();
        assert!(trace.iter().all(|e| e.ratio == Some(0.0)));
    }

    #[test]
    fn ratio_trace_reports_gaps() {
        let op = EigenOp::polynomial(c(0.5, 0.), &[1., 1.]).unwrap();
        let trace = super2_ratio_trace(&op, &TruncatedSeries::zero(3), c(1., 0.), 1, 3).unwrap();
        assert!(trace.iter().all(|e| e.ratio.is_none()));
    }

    #[test]
    fn ratio_routes_agree() {
        let op = EigenOp::polynomial(c(0.6, 0.1), &[1., -0.5, 0.25]).unwrap();
        let f = TruncatedSeries::exp_jet(c(0.3, 0.2), 16);
        let trace = super2_ratio_trace(&op, &f, c(0.4, -0.7), 2, 4).unwrap();
        for e in &trace {
            let other = super2_ratio_closed_form(&op, &f, c(0.4, -0.7), 2, e.k).unwrap();
            let (a, b) = (e.ratio.unwrap(), other.ratio.unwrap());
            assert!((a - b).abs() <= 1e-9 * a.abs().max(1e-300), "k={} {a} {b}", e.k);
        }
    }

    #[test]
    fn ratio_trace_precondition() {
        let op = EigenOp::polynomial(c(0.5, 0.), &[0., 1.]).unwrap();
        assert!(super2_ratio_trace(&op, &real(&[1.]), c(1., 0.), 1, 3).is_err());
        let op = EigenOp::polynomial(c(1.5, 0.), &[1., 1.]).unwrap();
        assert!(super2_ratio_trace(&op, &real(&[1.]), c(1., 0.), 1, 3).is_err());
    }

    #[test]
    fn suggested_order_is_positive_and_shrinks_growth() {
        let op = EigenOp::polynomial(c(0.5, 0.), &[1., 1.]).unwrap();
        let f = TruncatedSeries::exp_jet(ONE, 12);
        let m = suggest_derivative_order(&op, &f, 10).unwrap();
        assert!(m >= 1);
        let trace = super2_ratio_trace(&op, &f, ONE, m, 30).unwrap();
        assert!(trace[29].ratio.unwrap() < trace[0].ratio.unwrap());
    }
}
