//! Restriction of degree-2 expansions to diag(z₁, z₂), cusp-support checks, and numeric
//! evaluation of the archimedean integrals I(ℓ, m).

use std::collections::BTreeMap;

use num_complex::Complex64;
use num_traits::Zero;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exactnum::rational::{self, Rational};
use crate::nearholo::{NHExpansion, NHPoly};

/// Σ c(a, b) q₁^a q₂^b, with c(a, b) a polynomial in W₁₁, W₂₂ (W₁₂ = 0 on the diagonal).
#[derive(Clone, Debug, PartialEq)]
pub struct PullbackExpansion {
    pub level: u64,
    pub coeffs: BTreeMap<(Rational, Rational), NHPoly>,
    /// per-r contributions, kept when requested
    pub breakdown: Option<BTreeMap<(Rational, Rational, Rational), NHPoly>>,
}

impl Serialize for PullbackExpansion {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        #[derive(Serialize)]
        struct Entry<'a> {
            a: String,
            b: String,
            value: &'a NHPoly,
        }
        #[derive(Serialize)]
        struct Repr<'a> {
            level: u64,
            coeffs: Vec<Entry<'a>>,
            cuspidal: bool,
        }
        Repr {
            level: self.level,
            coeffs: self
                .coeffs
                .iter()
                .map(|((a, b), v)| Entry { a: a.to_string(), b: b.to_string(), value: v })
                .collect(),
            cuspidal: cusp_support_check(self).pass,
        }
        .serialize(s)
    }
}

/// Drop every monomial containing an off-diagonal W entry.
fn diagonal_part(p: &NHPoly) -> NHPoly {
    let mut out = NHPoly::zero(2);
    for (e, c) in p.terms() {
        // variables ordered W11, W12, W22
        if e[1] == 0 {
            out.add_term(e.clone(), c.clone());
        }
    }
    out
}

pub fn restrict_diagonal(exp: &NHExpansion) -> Result<PullbackExpansion> {
    restrict_diagonal_with(exp, false)
}

pub fn restrict_diagonal_with(exp: &NHExpansion, keep_breakdown: bool) -> Result<PullbackExpansion> {
    if exp.degree != 2 {
        return Err(Error::Precondition("pullback is implemented for degree 2".into()));
    }
    let mut coeffs: BTreeMap<(Rational, Rational), NHPoly> = BTreeMap::new();
    let mut breakdown = BTreeMap::new();
    for c in &exp.coefficients {
        let e = c.s.entries();
        let (a, b, r) = (e[0][0].clone(), e[1][1].clone(), &e[0][1] * rational::int(2));
        let d = diagonal_part(&c.poly);
        let slot = coeffs.entry((a.clone(), b.clone())).or_insert_with(|| NHPoly::zero(2));
        *slot = slot.add(&d);
        if keep_breakdown {
            breakdown.insert((a, b, r), d);
        }
    }
    coeffs.retain(|_, v| !v.is_zero());
    Ok(PullbackExpansion { level: exp.level, coeffs, breakdown: keep_breakdown.then_some(breakdown) })
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct CuspVerdict {
    pub pass: bool,
    /// (a, b) of the first nonzero coefficient with a = 0 or b = 0
    pub witness: Option<(String, String)>,
    pub note: String,
}

/// Vanishing of every c(a, b) with a = 0 or b = 0.
pub fn cusp_support_check(pb: &PullbackExpansion) -> CuspVerdict {
    let witness = pb
        .coeffs
        .iter()
        .find(|((a, b), v)| (a.is_zero() || b.is_zero()) && !v.is_zero())
        .map(|((a, b), _)| (a.to_string(), b.to_string()));
    CuspVerdict {
        pass: witness.is_none(),
        witness,
        note: "support check on the computed ι-translate expansion; other translates are not recomputed".into(),
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ArchimedeanReport {
    pub l: i64,
    pub m: i64,
    pub z: (f64, f64),
    pub value: (f64, f64),
    pub abs: f64,
    /// |Q(M) − Q(2M)| between the two quadrature resolutions
    pub error_estimate: f64,
    /// |I(ℓ, m) − m/(ℓ − m − 1)·I(ℓ − 2, m − 1)| when m ≥ 1
    pub recursion_residual: Option<f64>,
}

pub const DEFAULT_NODES: usize = 4096;

/// ∫_ℝ (x + z)^{m−ℓ}(x + z̄)^m dx with x = Re z' + y tan θ mapping ℝ onto (−π/2, π/2); the
/// midpoint rule is used on the θ interval. Summed in index order so results do not depend
/// on the thread count.
fn quadrature(l: i64, m: i64, z: Complex64, nodes: usize) -> Complex64 {
    let (u, y) = (z.re, z.im.abs());
    let h = std::f64::consts::PI / nodes as f64;
    (0..nodes)
        .into_par_iter()
        .map(|j| {
            let theta = -std::f64::consts::FRAC_PI_2 + (j as f64 + 0.5) * h;
            let (s, c) = theta.sin_cos();
            let x = -u + y * s / c;
            let jac = y / (c * c);
            let xp = Complex64::new(x, 0.0);
            (xp + z).powi((m - l) as i32) * (xp + z.conj()).powi(m as i32) * jac
        })
        .collect::<Vec<_>>()
        .iter()
        .sum::<Complex64>()
        * h
}

pub fn archimedean_i_numeric(l: i64, m: i64, z: Complex64) -> Result<ArchimedeanReport> {
    if 2 * m - l >= -1 {
        return Err(Error::Precondition(format!("I({l},{m}) diverges: need 2m − ℓ < −1")));
    }
    if m < 0 || z.im == 0.0 {
        return Err(Error::Precondition("need m ≥ 0 and z non-real".into()));
    }
    let v = quadrature(l, m, z, DEFAULT_NODES);
    let v2 = quadrature(l, m, z, 2 * DEFAULT_NODES);
    let recursion_residual = (m >= 1).then(|| {
        let lower = quadrature(l - 2, m - 1, z, 2 * DEFAULT_NODES);
        (v2 - lower * (m as f64 / (l - m - 1) as f64)).norm()
    });
    Ok(ArchimedeanReport {
        l,
        m,
        z: (z.re, z.im),
        value: (v2.re, v2.im),
        abs: v2.norm(),
        error_estimate: (v - v2).norm(),
        recursion_residual,
    })
}

/// The grid ℓ ∈ {6, 8, 10}, m ∈ {0, 1, 2}, z ∈ {i, 1 + 2i} restricted to convergent cells.
pub fn archimedean_grid() -> Result<Vec<ArchimedeanReport>> {
    let mut out = Vec::new();
    for l in [6i64, 8, 10] {
        for m in 0..=2i64 {
            if 2 * m - l >= -1 {
                continue;
            }
            for z in [Complex64::new(0.0, 1.0), Complex64::new(1.0, 2.0)] {
                out.push(archimedean_i_numeric(l, m, z)?);
            }
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exactnum::rational::{int, rat};
    use crate::exactnum::CyclotomicNumber;
    use crate::nearholo::NHCoefficient;
    use crate::quadforms::HalfIntegralMatrix;

    fn hand_built(indices: &[(i64, i64, i64)]) -> NHExpansion {
        let coefficients = indices
            .iter()
            .map(|&(a, r, b)| NHCoefficient {
                s: HalfIntegralMatrix::binary(a, r, b, 1),
                poly: NHPoly::constant(2, CyclotomicNumber::from_int(1 + a + b)),
            })
            .collect();
        NHExpansion::new(2, 6, 1, coefficients)
    }

    #[test]
    fn aggregation_over_r() {
        let idx: Vec<(i64, i64, i64)> = (-1..=1).map(|r| (1, r, 1)).collect();
        let pb = restrict_diagonal(&hand_built(&idx)).unwrap();
        assert_eq!(pb.coeffs.len(), 1);
        let v = pb.coeffs.get(&(int(1), int(1))).unwrap();
        assert_eq!(v.constant_term(), CyclotomicNumber::from_int(9));
        assert!(cusp_support_check(&pb).pass);
    }

    #[test]
    fn negative_control_fails() {
        let pb = restrict_diagonal(&hand_built(&[(1, 0, 1), (0, 0, 1)])).unwrap();
        let v = cusp_support_check(&pb);
        assert!(!v.pass);
        assert_eq!(v.witness, Some(("0".to_string(), "1".to_string())));
    }

    #[test]
    fn off_diagonal_w_dropped() {
        let mut p = NHPoly::var(2, 0, 1);
        p = p.add(&NHPoly::var(2, 0, 0));
        let e = NHExpansion::new(2, 6, 2, vec![NHCoefficient { s: HalfIntegralMatrix::binary(1, 1, 1, 2), poly: p }]);
        let pb = restrict_diagonal(&e).unwrap();
        assert_eq!(pb.coeffs.get(&(rat(1, 2), rat(1, 2))).unwrap(), &NHPoly::var(2, 0, 0));
    }

    #[test]
    fn regression_level4_weight6() {
        use crate::characters::DirichletCharacter;
        use crate::eisenstein::EisensteinSpec;
        // χ must be even for k = 6, so the trivial character mod 4
        let spec = EisensteinSpec::new(1, 6, 4, DirichletCharacter::trivial(4), 0).unwrap();
        let r = crate::nearholo::eisenstein_at_minus_m0(&spec, 8).unwrap();
        let pb = restrict_diagonal(&r.expansion).unwrap();
        assert!(cusp_support_check(&pb).pass);
        let c = pb.coeffs.get(&(int(1), int(1))).unwrap();
        assert_eq!(c.terms().len(), 1);
        assert_eq!(c.constant_term(), CyclotomicNumber::from_rational(rat(31, 1536)));
    }

    #[test]
    fn i_3_0_vanishes() {
        let r = archimedean_i_numeric(3, 0, Complex64::new(0.0, 1.0)).unwrap();
        assert!(r.abs < 1e-10);
        assert!(archimedean_i_numeric(2, 1, Complex64::new(0.0, 1.0)).is_err());
    }

    #[test]
    fn grid_vanishes() {
        for r in archimedean_grid().unwrap() {
            assert!(r.abs < 1e-6, "{r:?}");
            assert!(r.recursion_residual.is_none_or(|x| x < 1e-6));
        }
    }
}
