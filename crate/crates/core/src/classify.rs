//! Decision procedure for hypercyclicity (HC), supercyclicity (SC) and the
//! existence of hypercyclic / supercyclic subspaces (HC∞ / SC∞) of
//! `L = R_λ φ(D)`. Each verdict carries the tag of the result that settles it.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::operators::EigenOp;
use crate::symbols::{PhiSpec, ZeroCount};

/// `|λ|` within this distance of 1 counts as unimodular; `λ` within it of 1
/// counts as `λ = 1`.
pub const UNIT_TOLERANCE: f64 = 1e-12;

/// Largest order probed when looking for `λ^j = 1`.
pub const ROOT_OF_UNITY_SEARCH: u32 = 64;

pub mod citation {
    pub const EXTENDED: &str = "Th. extended";
    pub const RAIZUNIDAD: &str = "Th. raizunidad";
    pub const INFINITOSCEROS: &str = "Prop. infinitosceros";
    pub const MODULO1: &str = "Th. modulo1";
    pub const MODULOMAYORUNO: &str = "Th. modulomayoruno";
    pub const SUPER1: &str = "Th. super1";
    pub const SUPER2: &str = "Th. super2";
    pub const MODULOMENOR1: &str = "Th. modulomenor1";
    pub const GENERAL: &str = "Th. general";
    pub const BERNAL_BONILLA_CALDERON: &str = "[bernalbonillacalderon]";
    pub const GODEFROY_SHAPIRO: &str = "Godefroy–Shapiro";
    pub const MENET_PETERSSON_SHKARIN: &str = "Menet–Petersson–Shkarin";
}

use citation::*;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Verdict {
    pub verdict: bool,
    pub citation: String,
    pub note: String,
}

impl Verdict {
    fn new(verdict: bool, citation: &str, note: impl Into<String>) -> Self {
        Verdict { verdict, citation: citation.to_string(), note: note.into() }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Classification {
    pub hc: Verdict,
    pub sc: Verdict,
    pub hc_inf: Verdict,
    pub sc_inf: Verdict,
}

impl Classification {
    /// `HC∞ ⊆ HC ⊆ SC`, `SC∞ ⊆ SC`, `HC∞ ⊆ SC∞`.
    pub fn containment_holds(&self) -> bool {
        let implies = |a: bool, b: bool| !a || b;
        implies(self.hc_inf.verdict, self.hc.verdict)
            && implies(self.hc.verdict, self.sc.verdict)
            && implies(self.sc_inf.verdict, self.sc.verdict)
            && implies(self.hc_inf.verdict, self.sc_inf.verdict)
    }

    pub fn is_sc_not_hc(&self) -> bool {
        self.sc.verdict && !self.hc.verdict
    }

    pub fn is_sc_inf_not_hc_inf(&self) -> bool {
        self.sc_inf.verdict && !self.hc_inf.verdict
    }
}

/// Smallest `j ≤ ROOT_OF_UNITY_SEARCH` with `|λ^j − 1| ≤ UNIT_TOLERANCE·j`.
pub fn root_of_unity_order(lambda: Complex64) -> Option<u32> {
    let one = Complex64::new(1.0, 0.0);
    let mut pow = one;
    for j in 1..=ROOT_OF_UNITY_SEARCH {
        pow *= lambda;
        if (pow - one).norm() <= UNIT_TOLERANCE * j as f64 {
            return Some(j);
        }
    }
    None
}

pub fn classify_op(op: &EigenOp) -> Classification {
    decide(op.lambda(), op.phi())
}

pub fn classify(lambda: Complex64, phi: &PhiSpec) -> Result<Classification> {
    if lambda == Complex64::new(0.0, 0.0) || !lambda.re.is_finite() || !lambda.im.is_finite() {
        return Err(Error::InvalidInput(format!("λ must be finite and nonzero, got {lambda}")));
    }
    Ok(decide(lambda, phi))
}

fn decide(lambda: Complex64, phi: &PhiSpec) -> Classification {
    let modulus = lambda.norm();
    let meta = phi.zero_meta();
    let at = format!("|λ| = {modulus}");

    if (lambda - 1.0).norm() <= UNIT_TOLERANCE {
        return commuting_case(phi, &at);
    }

    if meta.count == ZeroCount::ZeroFree {
        let why = format!("{at}; φ has no zeros, so L is a multiple of C_{{λ,b}}");
        return Classification {
            hc: Verdict::new(false, EXTENDED, why.clone()),
            sc: Verdict::new(false, BERNAL_BONILLA_CALDERON, why.clone()),
            hc_inf: Verdict::new(false, EXTENDED, why.clone()),
            sc_inf: Verdict::new(false, BERNAL_BONILLA_CALDERON, why),
        };
    }

    let infinite = meta.count == ZeroCount::Infinite;

    if (modulus - 1.0).abs() <= UNIT_TOLERANCE {
        let hc_inf_cite = if infinite { INFINITOSCEROS } else { MODULO1 };
        let mut inf_note = at.clone();
        if let Some(j) = root_of_unity_order(lambda) {
            inf_note.push_str(&format!("; λ^{j} = 1, so {RAIZUNIDAD} applies as well"));
        }
        return Classification {
            hc: Verdict::new(true, EXTENDED, at.clone()),
            sc: Verdict::new(true, EXTENDED, format!("{at}; hypercyclic, hence supercyclic")),
            hc_inf: Verdict::new(true, hc_inf_cite, inf_note.clone()),
            sc_inf: Verdict::new(true, hc_inf_cite, format!("{inf_note}; hypercyclic subspace is supercyclic")),
        };
    }

    if modulus > 1.0 {
        let (hc_inf, sc_inf) = if infinite {
            let why = format!("{at}; Ker L is infinite dimensional");
            (
                Verdict::new(true, INFINITOSCEROS, why.clone()),
                Verdict::new(true, INFINITOSCEROS, format!("{why}; hypercyclic subspace is supercyclic")),
            )
        } else {
            let why = format!("{at}; φ has finitely many zeros");
            (
                Verdict::new(false, MODULOMAYORUNO, why.clone()),
                Verdict::new(false, GENERAL, why),
            )
        };
        return Classification {
            hc: Verdict::new(true, EXTENDED, at.clone()),
            sc: Verdict::new(true, EXTENDED, format!("{at}; hypercyclic, hence supercyclic")),
            hc_inf,
            sc_inf,
        };
    }

    // 0 < |λ| < 1
    let m = meta.order_at_origin;
    let not_hc = format!("{at}; not hypercyclic for |λ| < 1");
    let (sc, sc_inf) = if m >= 1 {
        let why = format!("{at}; φ(0) = 0 with order {m}");
        (Verdict::new(true, SUPER1, why.clone()), Verdict::new(true, MODULOMENOR1, why))
    } else {
        let why = format!("{at}; φ(0) ≠ 0");
        (Verdict::new(false, SUPER2, why.clone()), Verdict::new(false, SUPER2, why))
    };
    Classification {
        hc: Verdict::new(false, EXTENDED, not_hc.clone()),
        sc,
        hc_inf: Verdict::new(false, EXTENDED, not_hc),
        sc_inf,
    }
}

/// `λ = 1`: `L = φ(D)` commutes with `D`.
fn commuting_case(phi: &PhiSpec, at: &str) -> Classification {
    let note = format!("{at}; λ = 1, L = φ(D) commutes with D");
    if phi.is_scalar() {
        let why = format!("{note}; L is a scalar multiple of the identity");
        return Classification {
            hc: Verdict::new(false, GODEFROY_SHAPIRO, why.clone()),
            sc: Verdict::new(false, GODEFROY_SHAPIRO, why.clone()),
            hc_inf: Verdict::new(false, GODEFROY_SHAPIRO, why.clone()),
            sc_inf: Verdict::new(false, GODEFROY_SHAPIRO, why),
        };
    }
    Classification {
        hc: Verdict::new(true, GODEFROY_SHAPIRO, note.clone()),
        sc: Verdict::new(true, GODEFROY_SHAPIRO, format!("{note}; hypercyclic, hence supercyclic")),
        hc_inf: Verdict::new(true, MENET_PETERSSON_SHKARIN, note.clone()),
        sc_inf: Verdict::new(true, MENET_PETERSSON_SHKARIN, format!("{note}; hypercyclic subspace is supercyclic")),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::symbols::Builtin;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn sym(poly: &[f64], b: f64, builtin: Builtin) -> PhiSpec {
        PhiSpec::new(poly.iter().map(|&x| c(x, 0.)).collect(), c(b, 0.), builtin).unwrap()
    }

    fn verdicts(k: &Classification) -> [bool; 4] {
        [k.hc.verdict, k.sc.verdict, k.hc_inf.verdict, k.sc_inf.verdict]
    }

    #[test]
    fn table_grid_examples() {
        let k = classify(c(2., 0.), &sym(&[0., 1.], 1., Builtin::None)).unwrap();
        assert_eq!(verdicts(&k), [true, true, false, false]);
        assert_eq!(k.hc_inf.citation, MODULOMAYORUNO);
        assert_eq!(k.sc_inf.citation, GENERAL);

        let k = classify(c(0.5, 0.), &sym(&[0., 1.], 0., Builtin::None)).unwrap();
        assert_eq!(verdicts(&k), [false, true, false, true]);
        assert_eq!(k.sc.citation, SUPER1);
        assert_eq!(k.sc_inf.citation, MODULOMENOR1);

        let k = classify(c(0.5, 0.), &sym(&[1., 1.], 0., Builtin::None)).unwrap();
        assert!(!k.sc.verdict);
        assert_eq!(k.sc.citation, SUPER2);

        let k = classify(c(0., 1.), &sym(&[0., 1.], 0., Builtin::None)).unwrap();
        assert!(k.hc_inf.verdict);
        assert_eq!(k.hc_inf.citation, MODULO1);
        assert!(k.hc_inf.note.contains(RAIZUNIDAD));

        let k = classify(c(3., 0.), &sym(&[1.], 0., Builtin::Cos)).unwrap();
        assert!(k.hc_inf.verdict && k.sc_inf.verdict);
        assert_eq!(k.hc_inf.citation, INFINITOSCEROS);

        let k = classify(c(2., 0.), &sym(&[1.], 1., Builtin::None)).unwrap();
        assert!(!k.sc.verdict);
        assert_eq!(k.sc.citation, BERNAL_BONILLA_CALDERON);

        let k = classify(c(1., 0.), &sym(&[0., 1.], 0., Builtin::None)).unwrap();
        assert!(k.hc.verdict && k.hc_inf.verdict);

        let k = classify(c(1., 0.), &sym(&[2.], 0., Builtin::None)).unwrap();
        assert!(!k.hc.verdict);
    }

    #[test]
    fn lambda_one_translation_is_hypercyclic() {
        let k = classify(c(1., 0.), &sym(&[3.], 0.5, Builtin::None)).unwrap();
        assert_eq!(verdicts(&k), [true; 4]);
        assert_eq!(k.hc_inf.citation, MENET_PETERSSON_SHKARIN);
    }

    #[test]
    fn zero_lambda_rejected() {
        assert!(classify(c(0., 0.), &sym(&[0., 1.], 0., Builtin::None)).is_err());
    }

    #[test]
    fn unit_circle_tolerance() {
        let phi = sym(&[0., 1.], 0., Builtin::None);
        let near = classify(c(1.0 + 1e-13, 0.).powu(1) * c(0., 1.), &phi).unwrap();
        assert!(near.hc_inf.verdict);
        let off = classify(c(0., 1.0 + 1e-9), &phi).unwrap();
        assert!(!off.hc_inf.verdict);
        assert!(off.hc.note.contains("|λ| = 1.000000001"));
    }

    #[test]
    fn root_of_unity_detection() {
        assert_eq!(root_of_unity_order(c(-1., 0.)), Some(2));
        assert_eq!(root_of_unity_order(Complex64::from_polar(1.0, std::f64::consts::TAU / 7.0)), Some(7));
        assert_eq!(root_of_unity_order(Complex64::from_polar(1.0, 1.0)), None);
        assert_eq!(root_of_unity_order(c(2., 0.)), None);
    }
}
