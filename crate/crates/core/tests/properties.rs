use eigenop_core::classify::{citation, classify, classify_op};
use eigenop_core::dynamics::{construct_supercyclic, super2_ratio_trace, Target};
use eigenop_core::symbols::{iterated_symbol, leibniz_coefficients, leibniz_majorant};
use eigenop_core::{EigenOp, IterateRoute, PhiSpec, Seminorm, TruncatedSeries};
use num_complex::Complex64;
use proptest::prelude::*;

fn cx() -> impl Strategy<Value = Complex64> {
    (-1.0..1.0f64, -1.0..1.0f64).prop_map(|(re, im)| Complex64::new(re, im))
}

fn series(max_deg: usize) -> impl Strategy<Value = TruncatedSeries> {
    prop::collection::vec(cx(), 1..=max_deg + 1).prop_map(|v| TruncatedSeries::new(v).unwrap())
}

fn lambda_in(lo: f64, hi: f64) -> impl Strategy<Value = Complex64> {
    (lo..hi, 0.0..std::f64::consts::TAU).prop_map(|(r, t)| Complex64::from_polar(r, t))
}

/// Polynomial symbol of degree ≤ `d` with a nonzero leading coefficient.
fn poly_phi(d: usize) -> impl Strategy<Value = PhiSpec> {
    (prop::collection::vec(cx(), 0..=d), cx()).prop_map(|(mut v, lead)| {
        let lead = if lead.norm() < 0.1 { Complex64::new(1.0, 0.0) } else { lead };
        v.push(lead);
        PhiSpec::polynomial(v).unwrap()
    })
}

type SeriesMap = Box<dyn Fn(&TruncatedSeries) -> TruncatedSeries>;

fn rel_close(a: &TruncatedSeries, b: &TruncatedSeries, tol: f64) -> bool {
    let diff = (a - b).seminorm(Seminorm::Rho(1.0)).unwrap();
    let scale = a.seminorm(Seminorm::Rho(1.0)).unwrap().max(b.seminorm(Seminorm::Rho(1.0)).unwrap());
    diff <= tol * scale.max(f64::MIN_POSITIVE)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn series_operations_are_linear(f in series(24), g in series(24), a in cx(), lam in lambda_in(0.3, 2.0), alpha in cx()) {
        let n = f.truncation_degree().max(g.truncation_degree());
        let (f, g) = (f.resized(n), g.resized(n));
        let combo = &f.scale(a) + &g;
        let ops: Vec<SeriesMap> = vec![
            Box::new(|h| h.differentiate()),
            Box::new(|h| h.integrate()),
            Box::new(move |h| h.dilate(lam)),
            Box::new(move |h| h.translate(alpha)),
        ];
        for op in &ops {
            let lhs = op(&combo);
            let rhs = &op(&f).scale(a) + &op(&g);
            prop_assert!(rel_close(&lhs, &rhs, 1e-12));
        }
    }

    #[test]
    fn integrate_differentiate_round_trips(f in series(32)) {
        let back = f.integrate().differentiate();
        prop_assert!(rel_close(&back, &f, 1e-15));
        let mut no_const = f.coeffs().to_vec();
        no_const[0] = Complex64::new(0.0, 0.0);
        let expect = TruncatedSeries::new(no_const).unwrap();
        let got = f.differentiate().integrate();
        prop_assert!(rel_close(&got, &expect, 1e-15));
        prop_assert_eq!(got.coeff(0), Complex64::new(0.0, 0.0));
    }

    #[test]
    fn translate_round_trip(f in series(32), r in 0.0..2.0f64, t in 0.0..std::f64::consts::TAU) {
        let alpha = Complex64::from_polar(r, t);
        let back = f.translate(alpha).translate(-alpha);
        let err = (&back - &f).seminorm(Seminorm::Rho(1.0)).unwrap();
        // Storing f(z+α) in doubles costs up to eps·ρ_{1+2|α|}(f) on the way back.
        let n = f.truncation_degree().max(1) as f64;
        let conditioned = 64.0 * n * f64::EPSILON * f.seminorm(Seminorm::Rho(1.0 + 2.0 * r)).unwrap();
        prop_assert!(err <= (1e-10 * f.seminorm(Seminorm::Rho(1.0)).unwrap()).max(conditioned));
    }

    #[test]
    fn dilate_round_trip(f in series(32), lam in lambda_in(0.5, 2.0)) {
        prop_assert!(rel_close(&f.dilate(lam).dilate(lam.inv()), &f, 1e-12));
    }

    #[test]
    fn rho_is_a_norm(f in series(32), g in series(32), a in cx(), m in 0.1..3.0f64) {
        let s = Seminorm::Rho(m);
        let (rf, rg) = (s.eval(&f).unwrap(), s.eval(&g).unwrap());
        let sum = s.eval(&(&f + &g)).unwrap();
        prop_assert!(sum <= (rf + rg) * (1.0 + 1e-14));
        let scaled = s.eval(&f.scale(a)).unwrap();
        prop_assert!((scaled - a.norm() * rf).abs() <= 1e-14 * scaled.max(1e-300));
    }

    #[test]
    fn leibniz_matches_product(phi in poly_phi(3), lam in lambda_in(0.5, 2.0), k in 1usize..=4, max_m in 0usize..=12) {
        let leib = leibniz_coefficients(&phi, lam, k, max_m).unwrap();
        let prod = iterated_symbol(&phi, lam, k, max_m).unwrap();
        let majorant = leibniz_majorant(&phi, lam, k, max_m).unwrap();
        let mut fact = 1.0;
        for (m, a) in leib.iter().enumerate() {
            if m > 0 { fact *= m as f64; }
            let want = prod.coeff(m) * fact;
            prop_assert!((a - want).norm() <= 1e-9 * want.norm().max(a.norm()).max(1e-300), "m={} {} {}", m, a, want);
            prop_assert!(a.norm() <= majorant[m] * (1.0 + 1e-9));
        }
    }

    #[test]
    fn iterated_symbol_recursion(phi in poly_phi(4), lam in lambda_in(0.5, 2.0), n in 1usize..6) {
        let deg = 4 * (n + 1);
        let big = iterated_symbol(&phi, lam, n, deg).unwrap();
        let next = iterated_symbol(&phi, lam, n + 1, deg).unwrap();
        let factor = phi.coefficients(deg).dilate(lam.inv().powu(n as u32 + 1));
        prop_assert!(rel_close(&next, &big.mul_truncated(&factor, deg), 1e-12));
    }

    #[test]
    fn iterate_routes_agree(phi in poly_phi(4), lam in lambda_in(0.4, 2.5), f in series(32), n in 0usize..=8) {
        let op = EigenOp::new(lam, phi).unwrap();
        let a = op.iterate(&f, n, IterateRoute::Repeated).unwrap();
        let b = op.iterate(&f, n, IterateRoute::ClosedForm).unwrap();
        prop_assert!(rel_close(&a, &b, 1e-9));
    }

    #[test]
    fn commutation_law(phi in poly_phi(4), lam in lambda_in(0.4, 2.5)) {
        let op = EigenOp::new(lam, phi).unwrap();
        prop_assert!(op.commutation_residual(64).unwrap() <= 1e-12);
    }

    #[test]
    fn eigen_residuals(psi in poly_phi(2), m in 1usize..=2, lam in lambda_in(0.3, 0.8)) {
        prop_assume!(psi.value_at_zero().norm() > 0.1);
        let mut coeffs = vec![Complex64::new(0.0, 0.0); m];
        coeffs.extend_from_slice(psi.poly());
        let op = EigenOp::new(lam, PhiSpec::polynomial(coeffs).unwrap()).unwrap();
        let basis = op.eigen_basis(12).unwrap();
        for k in 0..basis.len() {
            let p = &basis.polys[k];
            let residual = &op.apply_psi_part(p) - &p.scale(basis.eigenvalue(k));
            prop_assert!(residual.seminorm(Seminorm::Rho(1.0)).unwrap() <= 1e-10 * p.seminorm(Seminorm::Rho(1.0)).unwrap());
        }
    }

    #[test]
    fn right_inverse_for_pure_powers(c in cx(), m in 1usize..=3, lam in lambda_in(0.3, 0.8)) {
        prop_assume!(c.norm() > 0.1);
        let mut coeffs = vec![Complex64::new(0.0, 0.0); m];
        coeffs.push(c);
        let op = EigenOp::new(lam, PhiSpec::polynomial(coeffs).unwrap()).unwrap();
        let basis = op.eigen_basis(10).unwrap();
        for k in 1..=6 {
            for n in 0..=10 {
                let back = op.normalized_iterate(&op.right_inverse_on_basis(&basis, k, n).unwrap(), k).unwrap();
                prop_assert!(rel_close(&back, &basis.polys[n].resized(back.truncation_degree()), 1e-9));
            }
        }
    }

    #[test]
    fn normalized_iterates_kill_low_polynomials(p in series(16), lam in lambda_in(0.2, 0.9), m in 1usize..=3) {
        let mut coeffs = vec![0.0; m];
        coeffs.push(1.0);
        let op = EigenOp::polynomial(lam, &coeffs).unwrap();
        let deg = p.truncation_degree();
        for k in 1..=deg / m + 2 {
            let image = op.normalized_iterate(&p, k).unwrap();
            if k * m > deg {
                prop_assert!(image.coeffs().iter().all(|c| *c == Complex64::new(0.0, 0.0)));
            }
        }
    }

    #[test]
    fn classifier_invariants(lam in lambda_in(0.05, 3.0), phi in poly_phi(3), scale in cx(), zero_at_origin in any::<bool>()) {
        let phi = if zero_at_origin {
            let mut v = phi.poly().to_vec();
            v[0] = Complex64::new(0.0, 0.0);
            if v.iter().all(|c| *c == Complex64::new(0.0, 0.0)) { v.push(Complex64::new(1.0, 0.0)); }
            PhiSpec::polynomial(v).unwrap()
        } else {
            phi
        };
        prop_assume!((lam - 1.0).norm() > 1e-9 && (lam.norm() - 1.0).abs() > 1e-9);
        let c = classify(lam, &phi).unwrap();
        prop_assert!(c.containment_holds());
        let m = phi.zero_meta().order_at_origin;
        let non_scalar = !phi.is_scalar();
        prop_assert_eq!(c.is_sc_not_hc(), non_scalar && lam.norm() < 1.0 && m >= 1);
        prop_assert_eq!(c.is_sc_inf_not_hc_inf(), non_scalar && lam.norm() < 1.0 && phi.value_at_zero() == Complex64::new(0.0, 0.0));
        prop_assume!(scale.norm() > 1e-3);
        prop_assert_eq!(classify(lam, &phi.scaled(scale).unwrap()).unwrap(), c);
    }
}

#[test]
fn commutation_on_monomials_up_to_64() {
    for lam in [Complex64::new(0.7, -0.4), Complex64::new(2.0, 0.0), Complex64::new(0.0, 1.0), Complex64::new(-1.3, 0.9)] {
        for s in 0..=64 {
            let z = TruncatedSeries::monomial(s, s);
            let lhs = z.dilate(lam).differentiate();
            let rhs = z.differentiate().dilate(lam).scale(lam);
            for (a, b) in lhs.coeffs().iter().zip(rhs.coeffs()) {
                // equal up to reassociating two roundings
                assert!((a - b).norm() <= 4.0 * f64::EPSILON * a.norm(), "s={s} {a} {b}");
            }
        }
    }
}

#[test]
fn construction_blocks_annihilate_exactly() {
    let op = EigenOp::polynomial(Complex64::new(0.5, 0.0), &[0., 0., 1.5]).unwrap();
    let targets = [
        Target::new("a", TruncatedSeries::exp_jet(Complex64::new(0.5, 0.0), 6)),
        Target::new("b", TruncatedSeries::from_real(&[0., 2., -1.]).unwrap()),
        Target::new("c", TruncatedSeries::exp_jet(Complex64::new(0.0, 1.0), 6)),
    ];
    let r = construct_supercyclic(&op, &targets, 1e-3, Seminorm::Rho(1.0)).unwrap();
    for (j, entry) in r.schedule.iter().enumerate() {
        for earlier in &r.blocks[..j] {
            let image = op.normalized_iterate(earlier, entry.k).unwrap();
            assert!(image.coeffs().iter().all(|c| *c == Complex64::new(0.0, 0.0)));
        }
        let direct = op.iterate(&r.vector, entry.k, IterateRoute::ClosedForm).unwrap().scale(entry.mu);
        let dist = (&direct - &targets[j].series).seminorm(Seminorm::Rho(1.0)).unwrap();
        assert!(dist <= 2.0 * r.tolerance, "{dist}");
    }
}

#[test]
fn ratio_tail_decays() {
    let op = EigenOp::polynomial(Complex64::new(0.5, 0.0), &[2., 1., 1.]).unwrap();
    let f = TruncatedSeries::exp_jet(Complex64::new(1.0, 0.0), 16);
    let k_max = 24;
    let trace = super2_ratio_trace(&op, &f, Complex64::new(1.0, 0.0), 6, k_max).unwrap();
    let tail = trace[k_max / 2 - 1..].iter().map(|e| e.ratio.unwrap()).fold(0.0, f64::max);
    assert!(tail < trace[0].ratio.unwrap());
}

#[test]
fn super1_regime_is_the_construction_regime() {
    for (lam, poly, ok) in [(0.5, vec![0., 1.]), (0.3, vec![0., 0., 2.]), (0.5, vec![1., 1.]), (1.5, vec![0., 1.])]
        .into_iter()
        .map(|(l, p)| (l, p.clone(), l < 1.0 && p[0] == 0.0))
    {
        let op = EigenOp::polynomial(Complex64::new(lam, 0.0), &poly).unwrap();
        assert_eq!(classify_op(&op).sc.citation == citation::SUPER1, ok);
        assert_eq!(construct_supercyclic(&op, &[], 1e-3, Seminorm::Rho(1.0)).is_ok(), ok);
    }
}

#[test]
fn right_inverse_with_mixing_symbol_is_exact_in_rationals() {
    use eigenop_core::exact::ExactOp;
    for (lam, poly) in [(Complex64::new(0.6, 0.2), vec![0., 2., -1.]), (Complex64::new(0.45, 0.0), vec![0., 0., 1., 1.])] {
        let op = EigenOp::polynomial(lam, &poly).unwrap();
        let exact = ExactOp::new(&op).unwrap();
        let basis = exact.eigen_basis(6).unwrap();
        for k in 1..=3 {
            for n in 0..=6 {
                assert_eq!(exact.right_inverse_residual(&basis, k, n).unwrap(), 0.0);
            }
        }
    }
}

#[test]
fn construction_with_mixing_symbol() {
    let op = EigenOp::polynomial(Complex64::new(0.5, 0.0), &[0., 1., 0.5]).unwrap();
    let targets = [
        Target::new("a", TruncatedSeries::exp_jet(Complex64::new(0.5, 0.0), 6)),
        Target::new("b", TruncatedSeries::from_real(&[0., 2., -1.]).unwrap()),
    ];
    let r = construct_supercyclic(&op, &targets, 1e-3, Seminorm::Rho(1.0)).unwrap();
    for (entry, t) in r.schedule.iter().zip(&targets) {
        let direct = op.iterate(&r.vector, entry.k, IterateRoute::ClosedForm).unwrap().scale(entry.mu);
        assert!((&direct - &t.series).seminorm(Seminorm::Rho(1.0)).unwrap() <= 2e-3);
    }
}
