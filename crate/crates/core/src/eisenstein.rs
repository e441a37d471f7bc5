//! Normalized Fourier expansion of E*(Z, k/2), the per-prime integrality ledger, and two
//! numeric evaluations (Fourier side and a direct sum over cosets) used to cross-check it.

use num_bigint::BigInt;
use num_complex::Complex64;
use num_traits::{Signed, ToPrimitive, Zero};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::characters::{self, DirichletCharacter};
use crate::error::{Error, Result};
use crate::exactnum::rational::{self, int, Rational};
use crate::exactnum::{CyclotomicNumber, PiScalar, Valuation};
use crate::quadforms::{self, HalfIntegralMatrix, Mat};
use crate::siegelseries;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EisensteinSpec {
    pub n: usize,
    pub k: i64,
    #[serde(rename = "N")]
    pub level: u64,
    pub chi: DirichletCharacter,
    #[serde(default)]
    pub m0: i64,
}

impl EisensteinSpec {
    /// χ may be given modulo any divisor of the level; it is lifted.
    pub fn new(n: usize, k: i64, level: u64, chi: DirichletCharacter, m0: i64) -> Result<Self> {
        let chi = if chi.modulus() != level && level.is_multiple_of(chi.modulus()) { chi.lift(level)? } else { chi };
        let s = Self { n, k, level, chi, m0 };
        s.validate()?;
        Ok(s)
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::Precondition(m.to_string()));
        if self.n == 0 {
            return bad("n must be positive");
        }
        if self.level <= 1 {
            return bad("level N must exceed 1");
        }
        if self.chi.modulus() != self.level {
            return Err(Error::InvalidCharacter(format!(
                "character modulus {} does not match level {}",
                self.chi.modulus(),
                self.level
            )));
        }
        if self.chi.parity() as i64 != self.k.rem_euclid(2) {
            return Err(Error::InvalidCharacter("χ(−1) must equal (−1)^k".into()));
        }
        if self.m0 < 0 {
            return bad("m0 must be nonnegative");
        }
        let kk = self.k - 2 * self.m0;
        let n = self.n as i64;
        let quad = self.chi.pow(2).is_trivial();
        if kk < n + 1 {
            return bad("k − 2m0 must be at least n + 1");
        }
        if kk == n + 1 && quad {
            return bad("k − 2m0 = n + 1 requires χ² ≠ 1");
        }
        if self.m0 > 0 && 2 * self.m0 == self.k - n - 1 && quad {
            return bad("m0 = (k − n − 1)/2 with χ² = 1 is excluded");
        }
        Ok(())
    }

    /// The weight k − 2m0, m0 = 0 spec whose expansion is raised by the Maass operator.
    pub fn holomorphic_part(&self) -> Result<Self> {
        Self::new(self.n, self.k - 2 * self.m0, self.level, self.chi.clone(), 0)
    }
}

/// Exponent of π in the normalizing prefactor π^{n+n²−(2n+1)k}Λ^N(k/2).
pub fn base_pi_exponent(n: usize, k: i64) -> i64 {
    let n = n as i64;
    n + n * n - (2 * n + 1) * k
}

/// N^{−n(2n+1)}(−1)^{nk}2^k ∏_{j=1}^{n−1} 2^{2k−2j−2}/(2k−2j−2)!.
pub fn normalization_rational(n: usize, k: i64, level: u64) -> Rational {
    let n = n as i64;
    let mut r = rational::pow_i(&int(level as i64), -n * (2 * n + 1)) * rational::pow_i(&int(2), k);
    if (n * k) % 2 != 0 {
        r = -r;
    }
    for j in 1..n {
        let e = 2 * k - 2 * j - 2;
        r = r * rational::pow_i(&int(2), e) / rational::big(&rational::factorial(e as u64));
    }
    r
}

/// Ratio between the constant in Σ_{S∈Sym_{2n}(Z)} det(Z+S)^{−k} = c Σ_T det(T)^{k−(2n+1)/2}e(TZ)
/// and the constant (−1)^{nk}2^kπ^{2nk−n²}∏_{j=1}^{n−1}… of the normalization record. Both carry
/// π^{2nk−n²}, so the ratio is rational.
pub fn numeric_constant_ratio(n: usize, k: i64) -> Rational {
    let m = 2 * n as i64;
    // c = (−4π²)^{nk} 2^{−m(m−1)/2} / Γ_m(k), Γ_m(k) = π^{m(m−1)/4} ∏_{j<m} Γ(k − j/2)
    let mut c = rational::pow_i(&int(2), 2 * n as i64 * k - m * (m - 1) / 2);
    for j in 0..m {
        if j % 2 == 0 {
            c /= rational::big(&rational::factorial((k - j / 2 - 1) as u64));
        } else {
            // Γ(t + 1/2) = (2t)! √π / (4^t t!)
            let t = k - (j + 1) / 2;
            c = c * rational::pow_i(&int(4), t) * rational::big(&rational::factorial(t as u64))
                / rational::big(&rational::factorial(2 * t as u64));
        }
    }
    let recorded = normalization_rational(n, k, 1);
    let sign = if (n as i64 * k) % 2 != 0 { int(-1) } else { int(1) };
    sign * c / recorded
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct NormalizationRecord {
    /// exponent of π in the prefactor
    pub pi_exponent: i64,
    /// Λ^N(k/2), kept symbolic
    pub lambda: String,
    #[serde(with = "rational::serde_rational")]
    pub rational_factor: Rational,
    /// multiply by this to pass from the recorded normalization to the one measured numerically
    #[serde(with = "rational::serde_rational")]
    pub numeric_constant_ratio: Rational,
}

impl NormalizationRecord {
    pub fn for_spec(spec: &EisensteinSpec) -> Self {
        Self {
            pi_exponent: base_pi_exponent(spec.n, spec.k),
            lambda: format!(
                "L^N({}, χ)·∏_{{i=1}}^{} L^N({} − 2i, χ²)",
                spec.k,
                spec.n,
                2 * spec.k
            ),
            rational_factor: normalization_rational(spec.n, spec.k, spec.level),
            numeric_constant_ratio: numeric_constant_ratio(spec.n, spec.k),
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct FFactor {
    pub ell: u64,
    pub rho: i64,
    pub poly: String,
    pub value: CyclotomicNumber,
}

/// Factor-by-factor record of π^{n−k}b(h) = u^{n−k+1/2}·bracket1·bracket2.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct CoefficientLedger {
    /// det(2Nh)
    pub det_2nh: BigInt,
    pub c_set: Vec<u64>,
    pub f_factors: Vec<FFactor>,
    pub bracket1: CyclotomicNumber,
    pub bracket2: CyclotomicNumber,
    pub u_part: CyclotomicNumber,
    /// N_h, conductor of χρ_h
    pub conductor_chi_rho: u64,
    /// C_h, conductor of ρ_h
    pub conductor_rho: u64,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct CoefficientEntry {
    pub h: HalfIntegralMatrix,
    pub value: CyclotomicNumber,
    pub pi_exp: i64,
    pub ledger: CoefficientLedger,
}

/// π^{n−k}b(h) with its ledger; both assemblies of the square roots are computed and compared.
pub fn coefficient_record(h: &HalfIntegralMatrix, spec: &EisensteinSpec, budget: u128) -> Result<(CyclotomicNumber, CoefficientLedger)> {
    spec.validate()?;
    let (n, k, nl) = (spec.n, spec.k, spec.level);
    let ni = n as i64;
    if h.size() != 2 * n {
        return Err(Error::Precondition(format!("index must be {}×{}", 2 * n, 2 * n)));
    }
    if !h.is_positive_definite() {
        return Err(Error::Precondition("index h must be positive definite".into()));
    }
    let nh = HalfIntegralMatrix::new(quadforms::scale(h.entries(), &int(nl as i64)), 1)?;
    let dd = quadforms::discriminant_data(&nh)?;
    let det2 = dd.delta.abs();
    let det2_u = det2.to_u64().ok_or_else(|| Error::Precondition("det(2Nh) too large".into()))?;

    let mut f_factors = Vec::new();
    let mut prod_f = CyclotomicNumber::one();
    for (l, _) in rational::factorize(det2_u) {
        if nl % l == 0 {
            continue;
        }
        let rho = characters::kronecker_symbol(dd.fundamental_discriminant, l as i64) as i64;
        let f = siegelseries::extract_f_poly(nh.entries(), l, n, rho, budget)?.f;
        let x = siegelseries::kitaoka_point(&spec.chi.value(l as i64), l, k);
        let value = f.eval(&x).minimize();
        prod_f = &prod_f * &value;
        f_factors.push(FFactor { ell: l, rho, poly: f.to_string(), value });
    }
    let c_set: Vec<u64> = f_factors.iter().map(|f| f.ell).collect();
    if c_set.iter().any(|l| nl % l == 0) {
        return Err(Error::Internal("prime of C divides the level".into()));
    }

    // (det h / C_h)^{1/2} = f / (2^n N^n)
    let scale2 = rational::pow_i(&int(2 * nl as i64), ni);
    let ratio = rational::big(&dd.square_part.abs()) / &scale2;
    let bracket1 = prod_f.scale(&rational::pow_i(&ratio, 2 * k - 2 * ni - 1));
    let lb = characters::l_value_bracket(k, ni, &spec.chi, &dd.rho, nl)?;
    let bracket2 = lb.value.value.clone();
    let nh_c = lb.gauss_unit_part.conductor as i64;
    let ch = dd.conductor as i64;
    // u^{n−k+1/2} = u^{n−k} √(N_h C_h) / C_h
    let u = rational::rat(nh_c, ch);
    let u_part = characters::sqrt_int(nh_c * ch)?.scale(&(rational::pow_i(&u, ni - k) / int(ch))).minimize();
    let two = (&(&u_part * &bracket1) * &bracket2).minimize();

    // det(h)^{k−n−1} √det h · N_h^{n−k} √N_h · bracket2 · ∏ f
    let det_h = h.det();
    let sqrt_det_h = characters::sqrt_int(det2.to_i64().unwrap())?.scale(&(rational::pow_i(&det_h, k - ni - 1) / &scale2));
    let sqrt_nh = characters::sqrt_int(nh_c)?.scale(&rational::pow_i(&int(nh_c), ni - k));
    let direct = (&(&(&sqrt_det_h * &sqrt_nh) * &bracket2) * &prod_f).minimize();
    if two != direct {
        return Err(Error::Internal(format!("two-bracket assembly {two} differs from direct assembly {direct}")));
    }
    Ok((
        two,
        CoefficientLedger {
            det_2nh: det2,
            c_set,
            f_factors,
            bracket1: bracket1.minimize(),
            bracket2,
            u_part,
            conductor_chi_rho: nh_c as u64,
            conductor_rho: ch as u64,
        },
    ))
}

/// b(h) as an algebraic number times π^{k−n}.
pub fn coefficient_b(h: &HalfIntegralMatrix, spec: &EisensteinSpec) -> Result<PiScalar> {
    let (v, _) = coefficient_record(h, spec, siegelseries::budget_from_env())?;
    Ok(PiScalar::new(v, spec.k - spec.n as i64))
}

/// Positive definite h ∈ N⁻¹L with tr(Nh) ≤ bound, ordered by trace then entries.
pub fn enumerate_indices(n: usize, level: u64, bound: u64) -> Vec<HalfIntegralMatrix> {
    let m = 2 * n;
    let mut out = Vec::new();
    let mut diag = vec![0i64; m];
    enumerate_diag(0, bound as i64, &mut diag, &mut |d: &[i64]| {
        let pairs: Vec<(usize, usize)> = (0..m).flat_map(|i| (i + 1..m).map(move |j| (i, j))).collect();
        // |2h_ij| < 2√(h_ii h_jj)
        let ranges: Vec<i64> = pairs.iter().map(|&(i, j)| ((4 * d[i] * d[j]) as f64).sqrt().ceil() as i64).collect();
        let mut off = vec![0i64; pairs.len()];
        loop_offdiag(0, &ranges, &mut off, &mut |o: &[i64]| {
            let mut e: Mat = vec![vec![Rational::zero(); m]; m];
            for i in 0..m {
                e[i][i] = rational::rat(d[i], level as i64);
            }
            for (t, &(i, j)) in pairs.iter().enumerate() {
                e[i][j] = rational::rat(o[t], 2 * level as i64);
                e[j][i] = e[i][j].clone();
            }
            let h = HalfIntegralMatrix::new(e, level).unwrap();
            if h.is_positive_definite() {
                out.push(h);
            }
        });
    });
    out.sort_by(|a, b| a.trace().cmp(&b.trace()).then_with(|| a.cmp(b)));
    out
}

fn enumerate_diag(i: usize, left: i64, d: &mut Vec<i64>, f: &mut dyn FnMut(&[i64])) {
    if i == d.len() {
        f(d);
        return;
    }
    let rest = (d.len() - i - 1) as i64;
    for a in 1..=left - rest {
        d[i] = a;
        enumerate_diag(i + 1, left - a, d, f);
    }
}

fn loop_offdiag(t: usize, ranges: &[i64], o: &mut Vec<i64>, f: &mut dyn FnMut(&[i64])) {
    if t == ranges.len() {
        f(o);
        return;
    }
    for b in -ranges[t]..=ranges[t] {
        o[t] = b;
        loop_offdiag(t + 1, ranges, o, f);
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct NormalizedExpansion {
    pub spec: EisensteinSpec,
    pub bound: u64,
    pub coeffs: Vec<CoefficientEntry>,
    pub normalization: NormalizationRecord,
}

impl NormalizedExpansion {
    pub fn get(&self, h: &HalfIntegralMatrix) -> Option<&CyclotomicNumber> {
        self.coeffs.iter().find(|c| &c.h == h).map(|c| &c.value)
    }
}

/// Coefficients of π^{n+n²−(2n+1)k}Λ^N(k/2)E*(Z, k/2) for tr(Nh) ≤ bound.
pub fn build_expansion(spec: &EisensteinSpec, bound: u64) -> Result<NormalizedExpansion> {
    build_expansion_with_budget(spec, bound, siegelseries::budget_from_env())
}

pub fn build_expansion_with_budget(spec: &EisensteinSpec, bound: u64, budget: u128) -> Result<NormalizedExpansion> {
    spec.validate()?;
    let norm = NormalizationRecord::for_spec(spec);
    let n = spec.n as i64;
    // prefactor π-power, ξ-constant π^{2nk−n²}, and π^{k−n} from b(h)
    let pi_total = norm.pi_exponent + (2 * n * spec.k - n * n) + (spec.k - n);
    if pi_total != 0 {
        return Err(Error::PiExponentMismatch(pi_total, 0));
    }
    let indices = enumerate_indices(spec.n, spec.level, bound);
    let coeffs = indices
        .par_iter()
        .map(|h| {
            let (v, ledger) = coefficient_record(h, spec, budget)?;
            Ok(CoefficientEntry { h: h.clone(), value: v.scale(&norm.rational_factor).minimize(), pi_exp: 0, ledger })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(NormalizedExpansion { spec: spec.clone(), bound, coeffs, normalization: norm })
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct IntegralityRow {
    pub h: HalfIntegralMatrix,
    /// `None` when p ramifies in the coefficient field; `integral` is then decided coordinate-wise
    pub valuation: Option<Valuation>,
    pub integral: bool,
    pub bracket1_valuation: Option<Valuation>,
    pub bracket2_valuation: Option<Valuation>,
    pub pi_exp: i64,
    pub verdict: String,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct IntegralityReport {
    pub p: u64,
    pub within_hypotheses: bool,
    pub label: String,
    pub rows: Vec<IntegralityRow>,
    pub all_pass: bool,
}

pub fn within_hypotheses(spec: &EisensteinSpec, p: u64) -> bool {
    rational::is_prime(p) && p != 2 && !spec.level.is_multiple_of(p) && p as i64 >= 2 * spec.k
}

pub fn integrality_report(exp: &NormalizedExpansion, p: u64) -> IntegralityReport {
    let within = within_hypotheses(&exp.spec, p);
    let label = if within { "within theorem hypotheses" } else { "outside theorem hypotheses" };
    let val = |x: &CyclotomicNumber| x.p_valuation(p).ok();
    let rows: Vec<IntegralityRow> = exp
        .coeffs
        .iter()
        .map(|c| {
            let valuation = val(&c.value);
            let integral = match valuation {
                Some(v) => v.is_integral(),
                None => c.value.minimize().is_p_integral(p),
            };
            let ok = integral && c.pi_exp == 0;
            IntegralityRow {
                h: c.h.clone(),
                valuation,
                integral,
                bracket1_valuation: val(&c.ledger.bracket1),
                bracket2_valuation: val(&c.ledger.bracket2),
                pi_exp: c.pi_exp,
                verdict: if ok { "PASS".into() } else { "FAIL".into() },
            }
        })
        .collect();
    let all_pass = rows.iter().all(|r| r.verdict == "PASS");
    IntegralityReport { p, within_hypotheses: within, label: label.into(), rows, all_pass }
}

// ---------------------------------------------------------------------------------------------
// numeric side

pub type CMat = Vec<Vec<Complex64>>;

pub fn cdet(a: &CMat) -> Complex64 {
    let n = a.len();
    let mut m = a.clone();
    let mut d = Complex64::new(1.0, 0.0);
    for c in 0..n {
        let piv = (c..n).max_by(|&i, &j| m[i][c].norm().total_cmp(&m[j][c].norm())).unwrap();
        if m[piv][c].norm() == 0.0 {
            return Complex64::zero();
        }
        if piv != c {
            m.swap(piv, c);
            d = -d;
        }
        d *= m[c][c];
        for r in c + 1..n {
            let f = m[r][c] / m[c][c];
            for j in c..n {
                let x = f * m[c][j];
                m[r][j] -= x;
            }
        }
    }
    d
}

/// Checks symmetry and Im Z > 0.
pub fn validate_point(z: &CMat) -> Result<()> {
    let n = z.len();
    for i in 0..n {
        if z[i].len() != n {
            return Err(Error::Precondition("point must be square".into()));
        }
        for j in 0..n {
            if (z[i][j] - z[j][i]).norm() > 1e-12 {
                return Err(Error::Precondition("point must be symmetric".into()));
            }
        }
    }
    let y: Vec<Vec<f64>> = z.iter().map(|r| r.iter().map(|c| c.im).collect()).collect();
    if !(1..=n).all(|k| {
        let m: CMat = y[..k].iter().map(|r| r[..k].iter().map(|&x| Complex64::new(x, 0.0)).collect()).collect();
        cdet(&m).re > 0.0
    }) {
        return Err(Error::Precondition("Im Z must be positive definite".into()));
    }
    Ok(())
}

/// Σ a(h) e^{2πi tr(hZ)} over the stored coefficients.
pub fn fourier_sum(exp: &NormalizedExpansion, z: &CMat) -> Complex64 {
    exp.coeffs
        .iter()
        .map(|c| {
            let m = c.h.size();
            let mut tr = Complex64::zero();
            for i in 0..m {
                for j in 0..m {
                    tr += z[j][i] * rational::to_f64(c.h.get(i, j));
                }
            }
            c.value.to_complex() * (Complex64::new(0.0, 2.0 * std::f64::consts::PI) * tr).exp()
        })
        .sum()
}

fn primes_up_to(n: usize) -> Vec<u64> {
    let mut sieve = vec![true; n + 1];
    let mut out = Vec::new();
    for i in 2..=n {
        if sieve[i] {
            out.push(i as u64);
            let mut j = i * i;
            while j <= n {
                sieve[j] = false;
                j += i;
            }
        }
    }
    out
}

/// L^N(s, ψ) by a truncated Euler product (s ≥ 2).
pub fn l_function_numeric(s: i64, psi: &DirichletCharacter, level: u64) -> Complex64 {
    let mut acc = Complex64::new(1.0, 0.0);
    for p in primes_up_to(200_000) {
        if level.is_multiple_of(p) {
            continue;
        }
        let v = psi.value(p as i64).to_complex();
        acc /= Complex64::new(1.0, 0.0) - v * (p as f64).powi(-(s as i32));
    }
    acc
}

/// Λ^N(k/2) = L^N(k, χ) ∏_{i=1}^n L^N(2k − 2i, χ²).
pub fn lambda_numeric(spec: &EisensteinSpec) -> Complex64 {
    let chi2 = spec.chi.pow(2);
    let mut v = l_function_numeric(spec.k, &spec.chi, spec.level);
    for i in 1..=spec.n as i64 {
        v *= l_function_numeric(2 * spec.k - 2 * i, &chi2, spec.level);
    }
    v
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct NumericEval {
    pub re: f64,
    pub im: f64,
    /// value with the recorded normalization constant taken literally
    pub recorded_re: f64,
    pub recorded_im: f64,
    #[serde(with = "rational::serde_rational")]
    pub constant_ratio: Rational,
    pub terms: usize,
}

impl NumericEval {
    pub fn value(&self) -> Complex64 {
        Complex64::new(self.re, self.im)
    }
}

/// E*(Z, k/2) from the expansion: undo π-power and Λ^N, and apply the measured constant ratio.
pub fn eval_expansion_numeric(exp: &NormalizedExpansion, z: &CMat) -> Result<NumericEval> {
    validate_point(z)?;
    let s = fourier_sum(exp, z);
    let pi = std::f64::consts::PI;
    let recorded = if exp.coeffs.is_empty() {
        Complex64::zero()
    } else {
        s * pi.powi(-(exp.normalization.pi_exponent as i32)) / lambda_numeric(&exp.spec)
    };
    let r = rational::to_f64(&exp.normalization.numeric_constant_ratio);
    let v = recorded * r;
    Ok(NumericEval {
        re: v.re,
        im: v.im,
        recorded_re: recorded.re,
        recorded_im: recorded.im,
        constant_ratio: exp.normalization.numeric_constant_ratio.clone(),
        terms: exp.coeffs.len(),
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Translate {
    /// E_{k,N}^χ(Z, 0; 1): sum over Γ_∞ \ Γ₀(N)
    Identity,
    /// E_{k,N}^χ(Z, 0; ι) = E*(Z, k/2)
    Iota,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct DirectSeriesResult {
    pub re: f64,
    pub im: f64,
    pub tail_estimate: f64,
    pub terms: u64,
    pub warning: Option<String>,
}

impl DirectSeriesResult {
    pub fn value(&self) -> Complex64 {
        Complex64::new(self.re, self.im)
    }
}

/// ν(S) = ∏ p^{e_p(S)} over primes p dividing `nu`, for S with denominators dividing nu.
fn denominator_product(s: &Mat, nu: u64) -> u64 {
    rational::factorize(nu)
        .into_iter()
        .map(|(p, _)| p.pow(quadforms::elementary_divisor_exponent(s, p) as u32))
        .product()
}

/// Representatives S0 ∈ Sym_m(Q)/Sym_m(Z) with ν(S0) = ν.
fn classes_with_nu(m: usize, nu: u64) -> Vec<Mat> {
    let pos: Vec<(usize, usize)> = (0..m).flat_map(|i| (i..m).map(move |j| (i, j))).collect();
    let total = nu.pow(pos.len() as u32);
    (0..total)
        .filter_map(|mut idx| {
            let mut s: Mat = vec![vec![Rational::zero(); m]; m];
            for &(i, j) in &pos {
                let x = rational::rat((idx % nu) as i64, nu as i64);
                idx /= nu;
                s[i][j] = x.clone();
                s[j][i] = x;
            }
            (denominator_product(&s, nu) == nu).then_some(s)
        })
        .collect()
}

fn to_cmat(s: &Mat) -> CMat {
    s.iter().map(|r| r.iter().map(|x| Complex64::new(rational::to_f64(x), 0.0)).collect()).collect()
}

/// Σ_{T ∈ Sym_m(Z), |T_ij| ≤ R} det(W + c·T)^{−k}, with the magnitude of the outer shell.
fn translate_sum(w: &CMat, c: f64, k: i64, radius: i64) -> (Complex64, f64) {
    let m = w.len();
    let pos: Vec<(usize, usize)> = (0..m).flat_map(|i| (i..m).map(move |j| (i, j))).collect();
    let side = (2 * radius + 1) as u64;
    let total = side.pow(pos.len() as u32);
    let mut sum = Complex64::zero();
    let mut shell = 0.0;
    let mut a = w.clone();
    for mut idx in 0..total {
        let mut edge = false;
        for &(i, j) in &pos {
            let t = (idx % side) as i64 - radius;
            idx /= side;
            edge |= t.abs() == radius;
            a[i][j] = w[i][j] + c * t as f64;
            a[j][i] = a[i][j];
        }
        let term = cdet(&a).powi(-(k as i32));
        sum += term;
        if edge {
            shell += term.norm();
        }
    }
    (sum, shell)
}

pub const DEFAULT_TRANSLATE_RADIUS: i64 = 12;

/// Direct evaluation of the Eisenstein series at s = 0 by summing over (C, D), truncated at
/// ν = |det C| ≤ `height` (full-rank part) and c ≤ `height` (rank-one part).
pub fn direct_series_numeric(
    spec: &EisensteinSpec,
    z: &CMat,
    height: u64,
    translate: Translate,
) -> Result<DirectSeriesResult> {
    spec.validate()?;
    validate_point(z)?;
    let m = 2 * spec.n;
    if z.len() != m {
        return Err(Error::Precondition(format!("point must be {m}×{m}")));
    }
    if spec.k < m as i64 + 2 {
        return Err(Error::Precondition("direct series needs k ≥ 2n + 2 for absolute convergence".into()));
    }
    let k = spec.k;
    let nl = spec.level;
    let radius = DEFAULT_TRANSLATE_RADIUS;
    let mut total = Complex64::zero();
    let mut shell_tail = 0.0;
    let mut last_layer: f64 = 0.0;
    let mut terms = 0u64;
    match translate {
        Translate::Iota => {
            // Σ_{ν(S) prime to N} χ(ν) ν^{−k} det(Z + N S)^{−k}
            for nu in 1..=height {
                if rational::gcd(nu, nl) != 1 {
                    continue;
                }
                let classes = classes_with_nu(m, nu);
                let chi_nu = spec.chi.value(nu as i64).to_complex();
                let parts: Vec<(Complex64, f64)> = classes
                    .par_iter()
                    .map(|s0| {
                        let ns = to_cmat(&quadforms::scale(s0, &int(nl as i64)));
                        let w: CMat = (0..m).map(|i| (0..m).map(|j| z[i][j] + ns[i][j]).collect()).collect();
                        translate_sum(&w, nl as f64, k, radius)
                    })
                    .collect();
                let f = chi_nu * (nu as f64).powi(-(k as i32));
                let layer: Complex64 = parts.iter().map(|p| p.0).sum::<Complex64>() * f;
                shell_tail += parts.iter().map(|p| p.1).sum::<f64>() * f.norm();
                terms += classes.len() as u64 * (2 * radius as u64 + 1).pow((m * (m + 1) / 2) as u32);
                total += layer;
                last_layer = layer.norm();
            }
        }
        Translate::Identity => {
            if m != 2 {
                return Err(Error::Precondition("identity translate is implemented for degree 2".into()));
            }
            total += Complex64::new(1.0, 0.0);
            terms += 1;
            let (one, rank_one_terms) = rank_one_stratum(spec, z, height);
            total += one.0;
            last_layer = one.1;
            terms += rank_one_terms;
            // full rank: N divides the smaller elementary denominator, so ν ≥ N²
            for nu in (nl * nl..=height).step_by(1) {
                let classes: Vec<Mat> = classes_with_nu(m, nu)
                    .into_iter()
                    .filter(|s| {
                        rational::factorize(nl).into_iter().all(|(p, e)| {
                            quadforms::elementary_divisors(s, p).iter().all(|x| x.is_some_and(|v| v <= -(e as i64)))
                        })
                    })
                    .collect();
                for s0 in &classes {
                    let (layer, shell) = identity_full_rank(spec, z, s0, nu, radius);
                    total += layer;
                    shell_tail += shell;
                    last_layer = last_layer.max(layer.norm());
                }
                terms += classes.len() as u64 * (2 * radius as u64 + 1).pow(3);
            }
        }
    }
    let tail_estimate = shell_tail * radius as f64 + last_layer;
    let warning = (tail_estimate > 1e-4 * total.norm().max(1e-300))
        .then(|| format!("tail estimate {tail_estimate:.3e} exceeds 1e-4 relative; raise the height bound"));
    Ok(DirectSeriesResult { re: total.re, im: total.im, tail_estimate, terms, warning })
}

/// Σ_u Σ_{N | c ≤ height} Σ_{(c,d)=1} χ(d)(c·ᵗuZu + d)^{−k} over primitive u up to sign;
/// returns (sum, magnitude of the c = max layer) and the term count.
fn rank_one_stratum(spec: &EisensteinSpec, z: &CMat, height: u64) -> ((Complex64, f64), u64) {
    let nl = spec.level;
    let k = spec.k as i32;
    let umax = 12i64;
    let dmax = 400i64;
    let mut total = Complex64::zero();
    let mut last: f64 = 0.0;
    let mut count = 0;
    for u1 in 0..=umax {
        for u2 in -umax..=umax {
            if (u1 == 0 && u2 <= 0) || rational::gcd(u1.unsigned_abs(), u2.unsigned_abs()) != 1 {
                continue;
            }
            let (a, b) = (u1 as f64, u2 as f64);
            let zu = z[0][0] * a * a + z[0][1] * (2.0 * a * b) + z[1][1] * b * b;
            for c in (nl..=height).step_by(nl as usize) {
                let mut layer = Complex64::zero();
                for d in -dmax..=dmax {
                    if rational::gcd(c, d.unsigned_abs()) != 1 {
                        continue;
                    }
                    let chi = spec.chi.value(d).to_complex();
                    layer += chi * (zu * c as f64 + d as f64).powi(-k);
                    count += 1;
                }
                total += layer;
                if c + nl > height {
                    last = last.max(layer.norm());
                }
            }
        }
    }
    ((total, last), count)
}

fn identity_full_rank(spec: &EisensteinSpec, z: &CMat, s0: &Mat, nu: u64, radius: i64) -> (Complex64, f64) {
    let k = spec.k as i32;
    let mut sum = Complex64::zero();
    let mut shell = 0.0;
    for t0 in -radius..=radius {
        for t1 in -radius..=radius {
            for t2 in -radius..=radius {
                let s: Mat = vec![
                    vec![&s0[0][0] + int(t0), &s0[0][1] + int(t1)],
                    vec![&s0[1][0] + int(t1), &s0[1][1] + int(t2)],
                ];
                // det D = ν det S for the pair with det C = ν
                let det_d = (quadforms::det(&s) * int(nu as i64)).to_integer();
                let chi = spec.chi.value(det_d.to_i64().unwrap()).to_complex();
                let w: CMat = (0..2).map(|i| (0..2).map(|j| z[i][j] + rational::to_f64(&s[i][j])).collect()).collect();
                let term = chi * (cdet(&w) * nu as f64).powi(-k);
                sum += term;
                if t0.abs() == radius || t1.abs() == radius || t2.abs() == radius {
                    shell += term.norm();
                }
            }
        }
    }
    (sum, shell)
}

/// Parse "a+bi,c+di;e+fi,g+hi" style points (entries like `2i`, `0.5`, `0.1+2i`).
pub fn parse_point(s: &str) -> Result<CMat> {
    s.split(';')
        .map(|row| row.split(',').map(|e| parse_complex(e.trim())).collect::<Result<Vec<_>>>())
        .collect()
}

fn parse_complex(s: &str) -> Result<Complex64> {
    let err = || Error::Parse(format!("cannot parse complex number '{s}'"));
    let s = s.replace(' ', "");
    if let Some(body) = s.strip_suffix('i') {
        // split at the last sign that is not the leading one or part of an exponent
        let bytes = body.as_bytes();
        let mut split = None;
        for idx in (1..bytes.len()).rev() {
            if (bytes[idx] == b'+' || bytes[idx] == b'-') && !matches!(bytes[idx - 1], b'e' | b'E') {
                split = Some(idx);
                break;
            }
        }
        let (re, im) = match split {
            Some(i) => (&body[..i], &body[i..]),
            None => ("0", body),
        };
        let im = match im {
            "" | "+" => 1.0,
            "-" => -1.0,
            x => x.parse::<f64>().map_err(|_| err())?,
        };
        Ok(Complex64::new(re.parse::<f64>().map_err(|_| err())?, im))
    } else {
        Ok(Complex64::new(s.parse::<f64>().map_err(|_| err())?, 0.0))
    }
}
