//! Nearly holomorphic q-expansions in W = (4πY)⁻¹ and the Maass operator Δ_k acting on them.
//!
//! A function is stored as π^e Σ_S P_S(W) e^{2πi tr(SZ)} with algebraic coefficients. Δ_k is
//! computed by differentiating formal symbols D^β·T^a·e(SZ), D = det(Z − Z̄), T = (Z − Z̄)⁻¹,
//! and checked against the closed form π^{−m}Δ_k = i^m det(∇ + 2S − 2αW).

use std::collections::BTreeMap;

use num_traits::{One, Zero};
use rayon::prelude::*;
use serde::de::Error as _;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::eisenstein::{self, EisensteinSpec, NormalizedExpansion};
use crate::error::{Error, Result};
use crate::exactnum::rational::{self, int, Rational};
use crate::exactnum::CyclotomicNumber;
use crate::quadforms::{self, HalfIntegralMatrix, Mat};

/// Exponents of the variables X_ab (a ≤ b), in row-major order of the upper triangle.
pub type Monomial = Vec<u32>;

fn var_index(m: usize, a: usize, b: usize) -> usize {
    let (a, b) = if a <= b { (a, b) } else { (b, a) };
    a * m - a * (a + 1) / 2 + b
}

fn var_pairs(m: usize) -> Vec<(usize, usize)> {
    (0..m).flat_map(|a| (a..m).map(move |b| (a, b))).collect()
}

fn mono_mul(a: &Monomial, b: &Monomial) -> Monomial {
    a.iter().zip(b).map(|(x, y)| x + y).collect()
}

fn unit_mono(nvars: usize, v: usize) -> Monomial {
    let mut e = vec![0; nvars];
    e[v] = 1;
    e
}

fn degree(e: &Monomial) -> u32 {
    e.iter().sum()
}

/// Polynomial in the entries W_ab (a ≤ b) of a symmetric m×m matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct NHPoly {
    m: usize,
    terms: BTreeMap<Monomial, CyclotomicNumber>,
}

impl NHPoly {
    pub fn zero(m: usize) -> Self {
        Self { m, terms: BTreeMap::new() }
    }

    pub fn constant(m: usize, c: CyclotomicNumber) -> Self {
        let mut p = Self::zero(m);
        p.add_term(vec![0; m * (m + 1) / 2], c);
        p
    }

    /// W_ab (0-based indices).
    pub fn var(m: usize, a: usize, b: usize) -> Self {
        let mut p = Self::zero(m);
        p.add_term(unit_mono(m * (m + 1) / 2, var_index(m, a, b)), CyclotomicNumber::one());
        p
    }

    pub fn degree_m(&self) -> usize {
        self.m
    }

    pub fn terms(&self) -> &BTreeMap<Monomial, CyclotomicNumber> {
        &self.terms
    }

    pub fn add_term(&mut self, e: Monomial, c: CyclotomicNumber) {
        if c.is_zero() {
            return;
        }
        let slot = self.terms.entry(e.clone()).or_insert_with(CyclotomicNumber::zero);
        *slot = &*slot + &c;
        if slot.is_zero() {
            self.terms.remove(&e);
        }
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn total_degree(&self) -> Option<u32> {
        self.terms.keys().map(degree).max()
    }

    pub fn coeff(&self, e: &Monomial) -> CyclotomicNumber {
        self.terms.get(e).cloned().unwrap_or_else(CyclotomicNumber::zero)
    }

    pub fn constant_term(&self) -> CyclotomicNumber {
        self.coeff(&vec![0; self.m * (self.m + 1) / 2])
    }

    pub fn scale(&self, c: &CyclotomicNumber) -> Self {
        let mut p = Self::zero(self.m);
        for (e, v) in &self.terms {
            p.add_term(e.clone(), v * c);
        }
        p
    }

    pub fn add(&self, o: &Self) -> Self {
        let mut p = self.clone();
        for (e, v) in &o.terms {
            p.add_term(e.clone(), v.clone());
        }
        p
    }

    pub fn mul(&self, o: &Self) -> Self {
        let mut p = Self::zero(self.m);
        for (e1, v1) in &self.terms {
            for (e2, v2) in &o.terms {
                p.add_term(mono_mul(e1, e2), v1 * v2);
            }
        }
        p
    }

    pub fn minimize(&self) -> Self {
        Self { m: self.m, terms: self.terms.iter().map(|(e, v)| (e.clone(), v.minimize())).collect() }
    }

    pub fn is_p_integral(&self, p: u64) -> bool {
        self.terms.values().all(|v| v.minimize().is_p_integral(p))
    }

    /// Substitute W = c·V (so W^e ↦ c^{|e|} V^e).
    pub fn rescale_variables(&self, c: &Rational) -> Self {
        let mut p = Self::zero(self.m);
        for (e, v) in &self.terms {
            p.add_term(e.clone(), v.scale(&rational::pow_i(c, degree(e) as i64)));
        }
        p
    }

    /// ∇_ij, the derivation with ∇_ij W_ab = W_ai W_jb + W_aj W_ib.
    pub fn nabla(&self, i: usize, j: usize) -> Self {
        let m = self.m;
        let nv = m * (m + 1) / 2;
        let pairs = var_pairs(m);
        let mut out = Self::zero(m);
        for (e, c) in &self.terms {
            for (v, &(a, b)) in pairs.iter().enumerate() {
                if e[v] == 0 {
                    continue;
                }
                let mut rest = e.clone();
                rest[v] -= 1;
                let c = c.scale(&int(e[v] as i64));
                let t1 = mono_mul(&unit_mono(nv, var_index(m, a, i)), &unit_mono(nv, var_index(m, j, b)));
                let t2 = mono_mul(&unit_mono(nv, var_index(m, a, j)), &unit_mono(nv, var_index(m, i, b)));
                out.add_term(mono_mul(&rest, &t1), c.clone());
                out.add_term(mono_mul(&rest, &t2), c);
            }
        }
        out
    }
}

impl Serialize for NHPoly {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        #[derive(Serialize)]
        struct Term<'a> {
            monomial: BTreeMap<String, u32>,
            value: &'a CyclotomicNumber,
        }
        let pairs = var_pairs(self.m);
        let terms: Vec<Term> = self
            .terms
            .iter()
            .map(|(e, v)| Term {
                monomial: e
                    .iter()
                    .zip(&pairs)
                    .filter(|(x, _)| **x > 0)
                    .map(|(x, (a, b))| (format!("W_{}{}", a + 1, b + 1), *x))
                    .collect(),
                value: v,
            })
            .collect();
        terms.serialize(s)
    }
}

/// One Fourier coefficient of a nearly holomorphic expansion.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct NHCoefficient {
    #[serde(rename = "S")]
    pub s: HalfIntegralMatrix,
    pub poly: NHPoly,
}

/// π^{pi_exponent} Σ_S P_S(W) e^{2πi tr(SZ)}, W = (4πY)⁻¹.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct NHExpansion {
    pub degree: usize,
    pub weight: i64,
    pub level: u64,
    pub pi_exponent: i64,
    pub coefficients: Vec<NHCoefficient>,
}

impl NHExpansion {
    pub fn new(degree: usize, weight: i64, level: u64, coefficients: Vec<NHCoefficient>) -> Self {
        Self { degree, weight, level, pi_exponent: 0, coefficients }
    }

    /// Holomorphic expansion with W-degree 0 coefficients.
    pub fn from_holomorphic(exp: &NormalizedExpansion) -> Self {
        let m = 2 * exp.spec.n;
        let coefficients = exp
            .coeffs
            .iter()
            .map(|c| NHCoefficient { s: c.h.clone(), poly: NHPoly::constant(m, c.value.clone()) })
            .collect();
        Self { degree: m, weight: exp.spec.k, level: exp.spec.level, pi_exponent: 0, coefficients }
    }

    pub fn get(&self, s: &HalfIntegralMatrix) -> Option<&NHPoly> {
        self.coefficients.iter().find(|c| &c.s == s).map(|c| &c.poly)
    }

    pub fn max_w_degree(&self) -> u32 {
        self.coefficients.iter().filter_map(|c| c.poly.total_degree()).max().unwrap_or(0)
    }

    pub fn is_p_integral(&self, p: u64) -> bool {
        self.coefficients.iter().all(|c| c.poly.is_p_integral(p))
    }

    /// Coefficients as polynomials in V = (2πY)⁻¹ = 2W.
    pub fn in_two_pi_y_variable(&self) -> Self {
        let mut out = self.clone();
        for c in &mut out.coefficients {
            c.poly = c.poly.rescale_variables(&rational::rat(1, 2));
        }
        out
    }

    pub fn scale(&self, c: &CyclotomicNumber) -> Self {
        let mut out = self.clone();
        for co in &mut out.coefficients {
            co.poly = co.poly.scale(c).minimize();
        }
        out
    }
}

/// α = k − κ + 1 with κ = (m + 1)/2.
pub fn alpha(m: usize, k: i64) -> Rational {
    int(k + 1) - rational::rat(m as i64 + 1, 2)
}

// ---------------------------------------------------------------------------------------------
// symbol engine

/// Formal term coeff·π^{pi}·D^{d_power}·T^{t}; the exponential e(SZ) is implicit.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub struct DiffSymbol {
    pub d_power: Rational,
    pub t: Monomial,
    pub pi: i64,
}

#[derive(Clone, Debug, Default)]
pub struct SymbolSum {
    pub terms: BTreeMap<DiffSymbol, CyclotomicNumber>,
}

impl SymbolSum {
    fn add(&mut self, s: DiffSymbol, c: CyclotomicNumber) {
        if c.is_zero() {
            return;
        }
        let slot = self.terms.entry(s.clone()).or_insert_with(CyclotomicNumber::zero);
        *slot = &*slot + &c;
        if slot.is_zero() {
            self.terms.remove(&s);
        }
    }

    /// ∂_ij with ∂_ij D^β = β D^β T_ij, ∂_ij T_ab = −½(T_ai T_jb + T_aj T_ib),
    /// ∂_ij e(SZ) = 2πi S_ij e(SZ).
    pub fn partial(&self, i: usize, j: usize, m: usize, s: &Mat) -> SymbolSum {
        let nv = m * (m + 1) / 2;
        let pairs = var_pairs(m);
        let tij = unit_mono(nv, var_index(m, i, j));
        let mut out = SymbolSum::default();
        let two_i = CyclotomicNumber::i().scale(&int(2));
        for (sym, c) in &self.terms {
            if !sym.d_power.is_zero() {
                let t = mono_mul(&sym.t, &tij);
                out.add(DiffSymbol { t, ..sym.clone() }, c.scale(&sym.d_power));
            }
            for (v, &(a, b)) in pairs.iter().enumerate() {
                if sym.t[v] == 0 {
                    continue;
                }
                let mut rest = sym.t.clone();
                rest[v] -= 1;
                let cc = c.scale(&rational::rat(-(sym.t[v] as i64), 2));
                let t1 = mono_mul(&unit_mono(nv, var_index(m, a, i)), &unit_mono(nv, var_index(m, j, b)));
                let t2 = mono_mul(&unit_mono(nv, var_index(m, a, j)), &unit_mono(nv, var_index(m, i, b)));
                out.add(DiffSymbol { t: mono_mul(&rest, &t1), ..sym.clone() }, cc.clone());
                out.add(DiffSymbol { t: mono_mul(&rest, &t2), ..sym.clone() }, cc);
            }
            if !s[i][j].is_zero() {
                out.add(DiffSymbol { pi: sym.pi + 1, ..sym.clone() }, (c * &two_i).scale(&s[i][j]));
            }
        }
        out
    }
}

fn permutations(m: usize) -> Vec<(Vec<usize>, i64)> {
    fn rec(prefix: &mut Vec<usize>, left: &mut Vec<usize>, out: &mut Vec<(Vec<usize>, i64)>) {
        if left.is_empty() {
            let mut inv = 0;
            for a in 0..prefix.len() {
                for b in a + 1..prefix.len() {
                    if prefix[a] > prefix[b] {
                        inv += 1;
                    }
                }
            }
            out.push((prefix.clone(), if inv % 2 == 0 { 1 } else { -1 }));
            return;
        }
        for idx in 0..left.len() {
            let x = left.remove(idx);
            prefix.push(x);
            rec(prefix, left, out);
            prefix.pop();
            left.insert(idx, x);
        }
    }
    let mut out = Vec::new();
    rec(&mut vec![], &mut (0..m).collect(), &mut out);
    out
}

/// π^{−m}Δ_k(P(W)e(SZ)) / e(SZ) through the symbol engine.
pub fn delta_symbolic(p: &NHPoly, s: &Mat, k: i64) -> Result<NHPoly> {
    let m = p.m;
    let a = alpha(m, k);
    let minus_two_i = CyclotomicNumber::i().scale(&int(-2));
    // W^e = (−2πi)^{−|e|} T^e, times D^α
    let mut start = SymbolSum::default();
    for (e, c) in &p.terms {
        let d = degree(e) as i64;
        start.add(DiffSymbol { d_power: a.clone(), t: e.clone(), pi: -d }, c * &minus_two_i.pow(-d)?);
    }
    let mut total = SymbolSum::default();
    for (perm, sign) in permutations(m) {
        let mut cur = start.clone();
        for (i, &j) in perm.iter().enumerate() {
            cur = cur.partial(i, j, m, s);
        }
        for (sym, c) in cur.terms {
            total.add(sym, c.scale(&int(sign)));
        }
    }
    // multiply by D^{−α}, then T = −2πi W
    let mut out = NHPoly::zero(m);
    for (sym, c) in total.terms {
        let beta = &sym.d_power - &a;
        if !beta.is_zero() {
            return Err(Error::Internal(format!("residual D-power {beta} after Maass operator")));
        }
        let d = degree(&sym.t) as i64;
        if sym.pi + d != m as i64 {
            return Err(Error::Internal(format!("π-exponent {} after substitution, expected {m}", sym.pi + d)));
        }
        out.add_term(sym.t, &c * &minus_two_i.pow(d)?);
    }
    Ok(out.minimize())
}

/// π^{−m}Δ_k(P e(SZ)) / e(SZ) = i^m det(∇ + 2S − 2αW) P.
pub fn delta_closed_form(p: &NHPoly, s: &Mat, k: i64) -> Result<NHPoly> {
    let m = p.m;
    let two_a = alpha(m, k) * int(2);
    let apply = |i: usize, j: usize, q: &NHPoly| -> NHPoly {
        let mut r = q.nabla(i, j);
        r = r.add(&q.scale(&CyclotomicNumber::from_rational(&s[i][j] * int(2))));
        r.add(&q.mul(&NHPoly::var(m, i, j)).scale(&CyclotomicNumber::from_rational(-two_a.clone())))
    };
    let mut total = NHPoly::zero(m);
    for (perm, sign) in permutations(m) {
        let mut cur = p.clone();
        for (i, &j) in perm.iter().enumerate() {
            cur = apply(i, j, &cur);
        }
        total = total.add(&cur.scale(&CyclotomicNumber::from_int(sign)));
    }
    let im = CyclotomicNumber::i().pow(m as i64)?;
    Ok(total.scale(&im).minimize())
}

/// Δ_k f, stored as π^{pi_exponent + m} times an expansion with algebraic coefficients; the
/// symbol engine result is cross-checked against the closed form.
pub fn maass_delta(f: &NHExpansion) -> Result<NHExpansion> {
    let m = f.degree;
    let coefficients = f
        .coefficients
        .par_iter()
        .map(|c| {
            let s = c.s.entries();
            let sym = delta_symbolic(&c.poly, s, f.weight)?;
            let closed = delta_closed_form(&c.poly, s, f.weight)?;
            if sym != closed {
                return Err(Error::Internal(format!("Maass operator routes disagree at S = {:?}", s)));
            }
            Ok(NHCoefficient { s: c.s.clone(), poly: sym })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(NHExpansion {
        degree: m,
        weight: f.weight + 2,
        level: f.level,
        pi_exponent: f.pi_exponent + m as i64,
        coefficients: coefficients.into_iter().filter(|c| !c.poly.is_zero()).collect(),
    })
}

#[derive(Clone, Debug, Serialize)]
pub struct DeltaIterate {
    /// Δ_k^r f
    pub big_delta: NHExpansion,
    /// δ_k^r f = (−i/2)^{mr} π^{−mr} Δ_k^r f
    pub small_delta: NHExpansion,
}

pub fn delta_iterate(f: &NHExpansion, r: u32) -> Result<DeltaIterate> {
    if r == 0 {
        return Err(Error::Precondition("r must be positive".into()));
    }
    let mut cur = f.clone();
    for _ in 0..r {
        cur = maass_delta(&cur)?;
    }
    let mr = (f.degree as i64) * r as i64;
    let c = CyclotomicNumber::i().scale(&rational::rat(-1, 2)).pow(mr)?;
    let mut small = cur.scale(&c);
    small.pi_exponent -= mr;
    Ok(DeltaIterate { big_delta: cur, small_delta: small })
}

/// λ_i(Z) with det(tI + Z) = Σ λ_i(Z) t^{m−i}: the sum of the i×i principal minors.
pub fn lambda_i(z: &Mat, i: usize) -> Rational {
    let m = z.len();
    if i == 0 {
        return Rational::one();
    }
    let mut total = Rational::zero();
    let mut subset = Vec::new();
    fn rec(start: usize, m: usize, i: usize, subset: &mut Vec<usize>, z: &Mat, total: &mut Rational) {
        if subset.len() == i {
            let minor: Mat = subset.iter().map(|&a| subset.iter().map(|&b| z[a][b].clone()).collect()).collect();
            *total += quadforms::det(&minor);
            return;
        }
        for a in start..m {
            subset.push(a);
            rec(a + 1, m, i, subset, z, total);
            subset.pop();
        }
    }
    rec(0, m, i, &mut subset, z, &mut total);
    total
}

#[derive(Clone, Debug, Serialize)]
pub struct StructureRow {
    #[serde(rename = "S")]
    pub s: HalfIntegralMatrix,
    pub w_degree: u32,
    pub degree_ok: bool,
    pub integral_ok: bool,
    pub constant_term_ok: bool,
}

#[derive(Clone, Debug, Serialize)]
pub struct StructureReport {
    pub r: u32,
    pub primes: Vec<u64>,
    pub rows: Vec<StructureRow>,
    pub pass: bool,
}

/// Checks δ_k^r f against the shape of Panchishkin's expansion: W-degree ≤ mr, O_p-coefficients
/// for the given p ∤ 2N whenever the input has them, and constant term det(S)^r c(S).
pub fn panchishkin_structure_check(f: &NHExpansion, r: u32, primes: &[u64]) -> Result<StructureReport> {
    if f.max_w_degree() != 0 {
        return Err(Error::Precondition("input must be holomorphic".into()));
    }
    let m = f.degree as u32;
    let out = if r == 0 { f.clone() } else { delta_iterate(f, r)?.small_delta };
    let input_integral: Vec<u64> = primes.iter().copied().filter(|&p| p != 2 && !f.level.is_multiple_of(p) && f.is_p_integral(p)).collect();
    let mut rows = Vec::new();
    for c in &f.coefficients {
        let poly = out.get(&c.s).cloned().unwrap_or_else(|| NHPoly::zero(f.degree));
        let w_degree = poly.total_degree().unwrap_or(0);
        let expect = c.poly.constant_term().scale(&rational::pow_i(&c.s.det(), r as i64));
        rows.push(StructureRow {
            s: c.s.clone(),
            w_degree,
            degree_ok: w_degree <= m * r,
            integral_ok: input_integral.iter().all(|&p| poly.is_p_integral(p)),
            constant_term_ok: poly.constant_term().minimize() == expect.minimize(),
        });
    }
    let pass = rows.iter().all(|r| r.degree_ok && r.integral_ok && r.constant_term_ok);
    Ok(StructureReport { r, primes: input_integral, rows, pass })
}

/// d = ∏_{a=1}^{2n} ∏_{b=1}^{m0} (2m0 − k − b + (a+1)/2).
pub fn raising_constant(n: usize, k: i64, m0: i64) -> Rational {
    let mut d = Rational::one();
    for a in 1..=2 * n as i64 {
        for b in 1..=m0 {
            d *= int(2 * m0 - k - b) + rational::rat(a + 1, 2);
        }
    }
    d
}

/// Exponent of π in the normalization of E_{k,N}^χ(Z, −m0): n + n² − (2n+1)k + (2n+2)m0.
pub fn target_pi_exponent(n: usize, k: i64, m0: i64) -> i64 {
    let n = n as i64;
    n + n * n - (2 * n + 1) * k + (2 * n + 2) * m0
}

#[derive(Clone, Debug, Serialize)]
pub struct RaisedExpansion {
    pub spec: EisensteinSpec,
    pub expansion: NHExpansion,
    #[serde(with = "rational::serde_rational")]
    pub d: Rational,
    pub pi_exponent_ledger: i64,
    /// primes p ≥ 2k with p ∤ 2N up to the checked bound for which p | d (must be empty)
    pub primes_dividing_d: Vec<u64>,
}

/// π^{n+n²−(2n+1)k+(2n+2)m0} Λ^N((k−2m0)/2) E_{k,N}^χ(Z, −m0) as d⁻¹(−4)^{n m0} applied to
/// Δ^{m0} of the normalized holomorphic expansion of weight k − 2m0.
pub fn eisenstein_at_minus_m0(spec: &EisensteinSpec, bound: u64) -> Result<RaisedExpansion> {
    spec.validate()?;
    let (n, k, m0) = (spec.n, spec.k, spec.m0);
    if 2 * m0 > k - n as i64 - 1 {
        return Err(Error::Precondition("m0 must be at most (k − n − 1)/2".into()));
    }
    let base = spec.holomorphic_part()?;
    let hol = NHExpansion::from_holomorphic(&eisenstein::build_expansion(&base, bound)?);
    if m0 == 0 {
        return Ok(RaisedExpansion {
            spec: spec.clone(),
            expansion: hol,
            d: Rational::one(),
            pi_exponent_ledger: 0,
            primes_dividing_d: vec![],
        });
    }
    let d = raising_constant(n, k, m0);
    if d.is_zero() {
        return Err(Error::Internal("raising constant d vanishes".into()));
    }
    let raised = delta_iterate(&hol, m0 as u32)?.big_delta;
    let e_base = eisenstein::base_pi_exponent(n, k - 2 * m0);
    let ledger = target_pi_exponent(n, k, m0) - e_base + raised.pi_exponent;
    if ledger != 0 {
        return Err(Error::PiExponentMismatch(ledger, 0));
    }
    let factor = rational::pow_i(&int(-4), n as i64 * m0) / &d;
    let mut expansion = raised.scale(&CyclotomicNumber::from_rational(factor));
    expansion.pi_exponent = 0;
    let primes_dividing_d: Vec<u64> = (2 * k as u64..=1000)
        .filter(|&p| rational::is_prime(p) && !spec.level.is_multiple_of(p))
        .filter(|&p| rational::v_p(&d, p).is_some_and(|v| v != 0))
        .collect();
    if !primes_dividing_d.is_empty() {
        return Err(Error::Internal(format!("p | d for p ≥ 2k: {primes_dividing_d:?}")));
    }
    Ok(RaisedExpansion { spec: spec.clone(), expansion, d, pi_exponent_ledger: ledger, primes_dividing_d })
}

impl<'de> Deserialize<'de> for NHExpansion {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        struct Term {
            monomial: BTreeMap<String, u32>,
            value: CyclotomicNumber,
        }
        #[derive(Deserialize)]
        struct Coef {
            #[serde(rename = "S")]
            s: HalfIntegralMatrix,
            poly: Vec<Term>,
        }
        #[derive(Deserialize)]
        struct Repr {
            degree: usize,
            weight: i64,
            level: u64,
            pi_exponent: i64,
            coefficients: Vec<Coef>,
        }
        let r = Repr::deserialize(d)?;
        let m = r.degree;
        let nv = m * (m + 1) / 2;
        let mut coefficients = Vec::new();
        for c in r.coefficients {
            let mut poly = NHPoly::zero(m);
            for t in c.poly {
                let mut e = vec![0u32; nv];
                for (name, x) in t.monomial {
                    let digits: Vec<usize> = name
                        .strip_prefix("W_")
                        .map(|s| s.chars().filter_map(|ch| ch.to_digit(10).map(|d| d as usize)).collect())
                        .unwrap_or_default();
                    if digits.len() != 2 || digits[0] == 0 || digits[1] == 0 || digits[0] > m || digits[1] > m {
                        return Err(D::Error::custom(format!("bad variable {name}")));
                    }
                    e[var_index(m, digits[0] - 1, digits[1] - 1)] += x;
                }
                poly.add_term(e, t.value);
            }
            coefficients.push(NHCoefficient { s: c.s, poly });
        }
        Ok(NHExpansion { degree: m, weight: r.weight, level: r.level, pi_exponent: r.pi_exponent, coefficients })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::characters::DirichletCharacter;

    fn one_var(coeffs: &[i64]) -> NHPoly {
        let mut p = NHPoly::zero(1);
        for (d, &c) in coeffs.iter().enumerate() {
            p.add_term(vec![d as u32], CyclotomicNumber::from_int(c));
        }
        p
    }

    #[test]
    fn delta_of_constant_degree_one() {
        // Δ_k(1) = k(z − z̄)⁻¹ = k(−2πi)W
        let k = 6;
        let out = delta_symbolic(&one_var(&[1]), &vec![vec![int(0)]], k).unwrap();
        let expect = one_var(&[0]).add(&NHPoly::var(1, 0, 0).scale(&CyclotomicNumber::i().scale(&int(-2 * k))));
        assert_eq!(out, expect.minimize());
    }

    #[test]
    fn delta_of_exponential_degree_one() {
        // (2πih + k(z − z̄)⁻¹) e(hz), divided by π
        let (k, h) = (4, rational::rat(3, 2));
        let out = delta_symbolic(&one_var(&[1]), &vec![vec![h.clone()]], k).unwrap();
        let two_i = CyclotomicNumber::i().scale(&int(2));
        let mut expect = NHPoly::constant(1, two_i.scale(&h));
        expect.add_term(vec![1], two_i.scale(&int(-k)));
        assert_eq!(out, expect.minimize());
    }

    #[test]
    fn delta_of_zero() {
        let f = NHExpansion::new(2, 4, 3, vec![]);
        assert!(maass_delta(&f).unwrap().coefficients.is_empty());
    }

    #[test]
    fn degree_two_routes_agree() {
        let s = quadforms::mat_from_ints(&[&[1, 0], &[0, 2]]);
        let mut p = NHPoly::constant(2, CyclotomicNumber::from_int(3));
        p = p.add(&NHPoly::var(2, 0, 1).scale(&CyclotomicNumber::from_int(5)));
        p = p.add(&NHPoly::var(2, 0, 0).mul(&NHPoly::var(2, 1, 1)));
        for k in [3, 4, 7] {
            let a = delta_symbolic(&p, &s, k).unwrap();
            let b = delta_closed_form(&p, &s, k).unwrap();
            assert_eq!(a, b);
            assert!(a.total_degree().unwrap() <= p.total_degree().unwrap() + 2);
        }
    }

    #[test]
    fn symbol_axioms() {
        // ∂_ij det M = det(M) (M⁻¹)_ij and ∂_ij tr(SZ) = S_ij, with the ½ off-diagonal convention
        let s = vec![vec![int(1), rational::rat(1, 2)], vec![rational::rat(1, 2), int(3)]];
        let mut d = SymbolSum::default();
        d.add(DiffSymbol { d_power: int(1), t: vec![0, 0, 0], pi: 0 }, CyclotomicNumber::one());
        let zero = vec![vec![int(0); 2]; 2];
        for (i, j) in [(0, 0), (0, 1), (1, 1)] {
            let out = d.partial(i, j, 2, &zero);
            assert_eq!(out.terms.len(), 1);
            let (sym, c) = out.terms.iter().next().unwrap();
            assert_eq!(sym.t, unit_mono(3, var_index(2, i, j)));
            assert_eq!(c, &CyclotomicNumber::one());
        }
        let mut e = SymbolSum::default();
        e.add(DiffSymbol { d_power: int(0), t: vec![0, 0, 0], pi: 0 }, CyclotomicNumber::one());
        let out = e.partial(0, 1, 2, &s);
        let (sym, c) = out.terms.iter().next().unwrap();
        assert_eq!(sym.pi, 1);
        assert_eq!(c, &CyclotomicNumber::i());
    }

    #[test]
    fn nabla_axioms() {
        let p = NHPoly::var(2, 0, 1);
        let out = p.nabla(0, 0);
        let expect = NHPoly::var(2, 0, 0).mul(&NHPoly::var(2, 0, 1)).scale(&CyclotomicNumber::from_int(2));
        assert_eq!(out, expect);
    }

    #[test]
    fn lambda_examples() {
        let z = quadforms::mat_from_ints(&[&[1, 2, 0], &[3, 4, 1], &[0, 5, 6]]);
        assert_eq!(lambda_i(&z, 0), int(1));
        assert_eq!(lambda_i(&z, 1), int(11));
        assert_eq!(lambda_i(&z, 3), quadforms::det(&z));
    }

    #[test]
    fn raising_constant_example() {
        for k in [5i64, 7, 9] {
            let expect = (int(2 - k)) * (rational::rat(5, 2) - int(k));
            assert_eq!(raising_constant(1, k, 1), expect);
        }
    }

    #[test]
    fn iterate_composes() {
        let s = vec![vec![int(2)]];
        let f = NHExpansion::new(1, 4, 3, vec![NHCoefficient { s: HalfIntegralMatrix::new(s, 3).unwrap(), poly: one_var(&[1]) }]);
        let twice = maass_delta(&maass_delta(&f).unwrap()).unwrap();
        let it = delta_iterate(&f, 2).unwrap();
        assert_eq!(it.big_delta, twice);
        assert_eq!(it.big_delta.weight, 8);
    }

    #[test]
    fn raised_odd4_weight7() {
        let chi = DirichletCharacter::kronecker(-4).unwrap();
        let spec = EisensteinSpec::new(1, 7, 4, chi, 1).unwrap();
        let r = eisenstein_at_minus_m0(&spec, 6).unwrap();
        assert!(r.expansion.is_p_integral(17));
        assert!(r.expansion.max_w_degree() <= 2);
        assert_eq!(r.pi_exponent_ledger, 0);
    }

    #[test]
    fn structure_check_degree_two() {
        let spec = EisensteinSpec::new(1, 6, 3, DirichletCharacter::trivial(3), 0).unwrap();
        let f = NHExpansion::from_holomorphic(&eisenstein::build_expansion(&spec, 4).unwrap());
        let rep = panchishkin_structure_check(&f, 1, &[13, 17]).unwrap();
        assert!(rep.pass);
        assert!(panchishkin_structure_check(&f, 0, &[13]).unwrap().pass);
    }

    #[test]
    fn json_roundtrip() {
        let s = vec![vec![int(2)]];
        let f = NHExpansion::new(1, 4, 3, vec![NHCoefficient { s: HalfIntegralMatrix::new(s, 3).unwrap(), poly: one_var(&[1, 2]) }]);
        let g = maass_delta(&f).unwrap();
        let back: NHExpansion = serde_json::from_str(&serde_json::to_string(&g).unwrap()).unwrap();
        assert_eq!(back, g);
    }
}
