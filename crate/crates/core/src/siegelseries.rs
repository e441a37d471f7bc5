//! Local Siegel series B_p(X, h): Kitaoka's closed form, brute-force coset sums, the
//! primitive polynomial f_{h,p} and the valuation inequality built on them.

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exactnum::rational::{self, int, Rational};
use crate::exactnum::{CyclotomicNumber, UniPoly, Valuation};
use crate::quadforms::{self, Mat};

/// Default cap on the number of terms a brute-force sum may visit.
pub const DEFAULT_BUDGET: u128 = 10_000_000;

/// Budget from `SIEGEL_EIS_BUDGET` when set, else the default.
pub fn budget_from_env() -> u128 {
    std::env::var("SIEGEL_EIS_BUDGET").ok().and_then(|s| s.parse().ok()).unwrap_or(DEFAULT_BUDGET)
}

/// Upper-triangular representative of GL(Z_p)·G: diagonal p^{a_i}, entries above the diagonal
/// reduced modulo the diagonal entry of their column.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct HnfCoset {
    pub matrix: Vec<Vec<u64>>,
    pub det_valuation: u32,
}

impl HnfCoset {
    pub fn as_rational(&self) -> Mat {
        self.matrix.iter().map(|r| r.iter().map(|&x| int(x as i64)).collect()).collect()
    }
}

/// All cosets with v_p(det G) ≤ `max_v`, ordered by det valuation, then diagonal shape, then entries.
pub fn enumerate_hnf_cosets(size: usize, p: u64, max_v: u32) -> Vec<HnfCoset> {
    let mut out = Vec::new();
    for v in 0..=max_v {
        let mut shapes = Vec::new();
        compositions(size, v, &mut vec![], &mut shapes);
        shapes.sort();
        for shape in shapes {
            let free: Vec<(usize, usize)> =
                (0..size).flat_map(|i| (i + 1..size).map(move |j| (i, j))).filter(|&(_, j)| shape[j] > 0).collect();
            let radix: Vec<u64> = free.iter().map(|&(_, j)| p.pow(shape[j])).collect();
            let total: u64 = radix.iter().product();
            for mut idx in 0..total {
                let mut g = vec![vec![0u64; size]; size];
                for i in 0..size {
                    g[i][i] = p.pow(shape[i]);
                }
                for (&(i, j), &r) in free.iter().zip(&radix) {
                    g[i][j] = idx % r;
                    idx /= r;
                }
                out.push(HnfCoset { matrix: g, det_valuation: v });
            }
        }
    }
    out
}

fn compositions(parts: usize, total: u32, cur: &mut Vec<u32>, out: &mut Vec<Vec<u32>>) {
    if cur.len() == parts - 1 {
        let mut c = cur.clone();
        c.push(total - cur.iter().sum::<u32>());
        out.push(c);
        return;
    }
    let used: u32 = cur.iter().sum();
    for a in 0..=total - used {
        cur.push(a);
        compositions(parts, total, cur, out);
        cur.pop();
    }
}

/// X = χ(p) p^{−k}.
pub fn kitaoka_point(chi_at_p: &CyclotomicNumber, p: u64, k: i64) -> CyclotomicNumber {
    chi_at_p.scale(&rational::pow_i(&int(p as i64), -k))
}

/// Kitaoka's local density factor α_{χ_p}(S, k) at X = χ_p(p) p^{−k}.
pub fn alpha_chi_p(s: &Mat, k: i64, chi_at_p: &CyclotomicNumber, p: u64, n: usize) -> Result<CyclotomicNumber> {
    if !quadforms::is_p_integral(s, p) {
        return Ok(CyclotomicNumber::zero());
    }
    let x = kitaoka_point(chi_at_p, p, k);
    let c = quadforms::classify_mod_p(s, p)?;
    Ok(alpha_poly(c.rank, c.epsilon, p, n).eval(&x))
}

/// α as a polynomial in X for given rank d and sign ε.
pub fn alpha_poly(d: usize, eps: i8, p: u64, n: usize) -> UniPoly {
    let pp = |e: usize| rational::pow_i(&int(p as i64), e as i64);
    let one_minus_x = UniPoly::from_ints(&[1, -1]);
    let factor = |i: usize| UniPoly::from_rationals([int(1), int(0), -pp(2 * i)]);
    let two_n = 2 * n;
    if d.is_multiple_of(2) {
        let top = two_n - d / 2;
        let mut a = &one_minus_x * &UniPoly::from_rationals([int(1), int(eps as i64) * pp(top)]);
        for i in 1..top {
            a = &a * &factor(i);
        }
        a
    } else {
        let mut a = one_minus_x;
        for i in 1..=two_n - d.div_ceil(2) {
            a = &a * &factor(i);
        }
        a
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct KitaokaTerm {
    pub coset: HnfCoset,
    pub rank: usize,
    pub epsilon: i8,
    pub value: CyclotomicNumber,
}

/// Σ_G χ_p(p)^{2v} p^{v(2n+1−2k)} α(−ᵗG⁻¹hG⁻¹, k) over cosets with 2v ≤ v_p(det h).
pub fn kitaoka_bp(h: &Mat, k: i64, chi_at_p: &CyclotomicNumber, p: u64, n: usize) -> Result<CyclotomicNumber> {
    Ok(kitaoka_terms(h, k, chi_at_p, p, n)?.iter().map(|t| t.value.clone()).sum())
}

/// The nonzero terms of the Kitaoka sum; the bound v_p(det G) ≤ ⌊½v_p(det h) − n + d/2⌋ is
/// checked on each.
pub fn kitaoka_terms(h: &Mat, k: i64, chi_at_p: &CyclotomicNumber, p: u64, n: usize) -> Result<Vec<KitaokaTerm>> {
    if p == 2 {
        return Err(Error::Dyadic);
    }
    if h.len() != 2 * n || !quadforms::is_p_integral(h, p) {
        return Err(Error::Precondition("h must be a p-integral matrix of size 2n".into()));
    }
    let dh = quadforms::det(h);
    let vdet = rational::v_p(&dh, p).ok_or(Error::SingularMatrix)?;
    let mut terms = Vec::new();
    for g in enumerate_hnf_cosets(2 * n, p, (vdet / 2) as u32) {
        let gi = quadforms::inverse(&g.as_rational())?;
        let s = quadforms::scale(&quadforms::mat_mul(&quadforms::mat_mul(&quadforms::transpose(&gi), h), &gi), &int(-1));
        if !quadforms::is_p_integral(&s, p) {
            continue;
        }
        let c = quadforms::classify_mod_p(&s, p)?;
        let v = g.det_valuation as i64;
        // 2v ≤ vdet − 2n + d, i.e. v ≤ ⌊vdet/2 − n + d/2⌋
        if 2 * v > vdet - 2 * n as i64 + c.rank as i64 {
            return Err(Error::FactorizationViolated(format!(
                "coset bound violated: v = {v}, v_p(det h) = {vdet}, d = {}",
                c.rank
            )));
        }
        let alpha = alpha_chi_p(&s, k, chi_at_p, p, n)?;
        let weight = chi_at_p
            .pow(2 * v)?
            .scale(&rational::pow_i(&int(p as i64), v * (2 * n as i64 + 1 - 2 * k)));
        let value = &weight * &alpha;
        if !value.is_zero() {
            terms.push(KitaokaTerm { coset: g, rank: c.rank, epsilon: c.epsilon, value });
        }
    }
    Ok(terms)
}

/// The Kitaoka sum as a polynomial in X (with χ_p(p)^{2v}p^{−2vk} = X^{2v}).
pub fn kitaoka_poly(h: &Mat, p: u64, n: usize) -> Result<UniPoly> {
    if p == 2 {
        return Err(Error::Dyadic);
    }
    if h.len() != 2 * n || !quadforms::is_p_integral(h, p) {
        return Err(Error::Precondition("h must be a p-integral matrix of size 2n".into()));
    }
    let dh = quadforms::det(h);
    let vdet = rational::v_p(&dh, p).ok_or(Error::SingularMatrix)?;
    let mut acc = UniPoly::zero();
    for g in enumerate_hnf_cosets(2 * n, p, (vdet / 2) as u32) {
        let gi = quadforms::inverse(&g.as_rational())?;
        let s = quadforms::scale(&quadforms::mat_mul(&quadforms::mat_mul(&quadforms::transpose(&gi), h), &gi), &int(-1));
        if !quadforms::is_p_integral(&s, p) {
            continue;
        }
        let c = quadforms::classify_mod_p(&s, p)?;
        let v = g.det_valuation as usize;
        let w = UniPoly::monomial(
            CyclotomicNumber::from_rational(rational::pow_i(&int(p as i64), (v * (2 * n + 1)) as i64)),
            2 * v,
        );
        acc = &acc + &(&w * &alpha_poly(c.rank, c.epsilon, p, n));
    }
    Ok(acc)
}

/// Brute-force local Siegel series together with how it was computed.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SiegelSeriesPoly {
    pub poly: UniPoly,
    pub p: u64,
    #[serde(with = "mat_serde")]
    pub h: Mat,
    pub method: String,
}

mod mat_serde {
    use super::*;
    use serde::{Deserializer, Serializer};

    pub fn serialize<S: Serializer>(m: &Mat, s: S) -> std::result::Result<S::Ok, S::Error> {
        let v: Vec<Vec<String>> = m.iter().map(|r| r.iter().map(|x| x.to_string()).collect()).collect();
        v.serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> std::result::Result<Mat, D::Error> {
        let v = Vec::<Vec<String>>::deserialize(d)?;
        v.iter()
            .map(|r| r.iter().map(|x| rational::parse(x).map_err(serde::de::Error::custom)).collect())
            .collect()
    }
}

/// p-adic integer residue of a p-integral rational modulo p^j.
fn residue(x: &Rational, p: u64, j: u32) -> Result<u64> {
    let q = BigInt::from(p).pow(j);
    if (x.denom() % BigInt::from(p)).is_zero() {
        return Err(Error::Precondition(format!("{x} is not {p}-integral")));
    }
    let d = x.denom().mod_floor(&q);
    let e = d.extended_gcd(&q);
    let inv = e.x.mod_floor(&q);
    Ok((x.numer().mod_floor(&q) * inv).mod_floor(&q).to_u64().unwrap())
}

/// Diagonal entries and doubled off-diagonal entries are p-integral.
pub fn is_half_integral_at(h: &Mat, p: u64) -> bool {
    let doubled: Mat = (0..h.len())
        .map(|i| (0..h.len()).map(|j| if i == j { h[i][j].clone() } else { &h[i][j] * int(2) }).collect())
        .collect();
    quadforms::is_p_integral(&doubled, p)
}

/// Congruent diagonal form of a binary p-integral form for odd p.
fn diagonalize_binary(h: &Mat, p: u64) -> (Rational, Rational) {
    let (a, b, c) = (h[0][0].clone(), h[0][1].clone(), h[1][1].clone());
    let v = |x: &Rational| rational::v_p(x, p).unwrap_or(i64::MAX);
    if b.is_zero() {
        return (a, c);
    }
    let (a, b, c) = if v(&b) < v(&a) && v(&b) < v(&c) {
        // e1 → e1 + e2 gives an entry of valuation v(b)
        (&a + &b * int(2) + &c, &b + &c, c)
    } else if v(&c) < v(&a) {
        (c, b, a)
    } else {
        (a, b, c)
    };
    let c2 = &c - &b * &b / &a;
    (a, c2)
}

/// Counts N(T) = #{(x,y,z) mod p^j : xz ≡ y², a x + b y + c z ≡ T} for T ∈ {0, p^{j−1}}.
fn count_pair(abc: (u64, u64, u64), p: u64, j: u32, diagonal: bool) -> (u128, u128) {
    let q = p.pow(j);
    let t1 = p.pow(j - 1);
    let val = |x: u64| if x == 0 { j } else { rational::v_p_u64(x, p).unwrap() as u32 }.min(j);
    let (a, b, c) = abc;
    let mulm = |x: u64, y: u64| ((x as u128 * y as u128) % q as u128) as u64;
    if diagonal && b == 0 {
        let mut sq = vec![0u32; q as usize];
        for y in 0..q {
            sq[mulm(y, y) as usize] += 1;
        }
        // a has the smaller valuation
        let (a, c) = if val(a) <= val(c) { (a, c) } else { (c, a) };
        let alpha = val(a);
        let step = p.pow(j - alpha);
        let ared = a / p.pow(alpha);
        let ainv = if alpha == j { 0 } else { modinv(ared % step, step) };
        let count_t = |t: u64| -> u128 {
            (0..q)
                .into_par_iter()
                .map(|z| {
                    let rhs = (t + q - mulm(c, z)) % q;
                    if !rhs.is_multiple_of(p.pow(alpha)) {
                        return 0u128;
                    }
                    let x0 = if alpha == j { 0 } else { ((rhs / p.pow(alpha)) as u128 * ainv as u128 % step as u128) as u64 };
                    let mut s = 0u128;
                    let mut x = x0;
                    for _ in 0..p.pow(alpha) {
                        s += sq[mulm(x, z) as usize] as u128;
                        x += step;
                    }
                    s
                })
                .sum()
        };
        return (count_t(0), count_t(t1));
    }
    // general: solve for the variable with least-valuation coefficient
    let vals = [val(a), val(b), val(c)];
    let which = (0..3).min_by_key(|&i| vals[i]).unwrap();
    let coef = [a, b, c];
    let beta = vals[which];
    let step = p.pow(j - beta);
    let red = coef[which] / p.pow(beta);
    let inv = if beta == j { 0 } else { modinv(red % step, step) };
    let others: Vec<usize> = (0..3).filter(|&i| i != which).collect();
    let count_t = |t: u64| -> u128 {
        (0..q)
            .into_par_iter()
            .map(|u| {
                let mut s = 0u128;
                for w in 0..q {
                    let mut vars = [0u64; 3];
                    vars[others[0]] = u;
                    vars[others[1]] = w;
                    let partial = (mulm(coef[others[0]], u) + mulm(coef[others[1]], w)) % q;
                    let rhs = (t + q - partial) % q;
                    if !rhs.is_multiple_of(p.pow(beta)) {
                        continue;
                    }
                    let mut x = if beta == j { 0 } else { ((rhs / p.pow(beta)) as u128 * inv as u128 % step as u128) as u64 };
                    for _ in 0..p.pow(beta) {
                        vars[which] = x;
                        if mulm(vars[0], vars[2]) == mulm(vars[1], vars[1]) {
                            s += 1;
                        }
                        x += step;
                    }
                }
                s
            })
            .sum()
    };
    (count_t(0), count_t(t1))
}

fn modinv(a: u64, m: u64) -> u64 {
    if m == 1 {
        return 0;
    }
    let e = (a as i128).extended_gcd(&(m as i128));
    e.x.rem_euclid(m as i128) as u64
}

/// Brute-force B_p(X, h) for binary h up to X^{j_max}.
///
/// R ranges over symmetric matrices mod Z_p with e(R) ≤ j, written R = [[x,y],[y,z]]/p^j with
/// xz ≡ y² mod p^j. Scaling (x,y,z) by units permutes these sets, so the character sum over
/// e(R) ≤ j collapses to N(0) − N(p^{j−1}).
pub fn brute_force_bp(h: &Mat, p: u64, j_max: u32, budget: u128) -> Result<SiegelSeriesPoly> {
    if h.len() != 2 {
        return brute_force_bp_naive(h, p, j_max, budget);
    }
    if !is_half_integral_at(h, p) {
        return Err(Error::Precondition("h must be half-integral at p".into()));
    }
    let diag = p != 2;
    let (a, b, c) = if diag {
        let (d1, d2) = diagonalize_binary(h, p);
        (d1, Rational::zero(), d2)
    } else {
        (h[0][0].clone(), &h[0][1] * int(2), h[1][1].clone())
    };
    let mut s_prev = BigInt::one();
    let mut coeffs = vec![Rational::one()];
    for j in 1..=j_max {
        let q = p.pow(j) as u128;
        let abc = (residue(&a, p, j)?, residue(&b, p, j)?, residue(&c, p, j)?);
        let val = |x: u64| if x == 0 { j } else { rational::v_p_u64(x, p).unwrap() as u32 }.min(j);
        let cost = if diag {
            q * (p as u128).pow(val(abc.0).min(val(abc.2)))
        } else {
            q * q * (p as u128).pow(val(abc.0).min(val(abc.1)).min(val(abc.2)))
        };
        if cost > budget.saturating_mul(64) {
            return Err(Error::BudgetExceeded { needed: cost, cap: budget.saturating_mul(64) });
        }
        let (n0, n1) = count_pair(abc, p, j, diag);
        let s = BigInt::from(n0) - BigInt::from(n1);
        coeffs.push(Rational::from_integer(&s - &s_prev));
        s_prev = s;
    }
    Ok(SiegelSeriesPoly {
        poly: UniPoly::from_rationals(coeffs),
        p,
        h: h.clone(),
        method: if diag { "orbit-count, diagonalized".into() } else { "orbit-count".into() },
    })
}

/// Literal enumeration of R = M/p^m over all symmetric M mod p^m, any size; coefficients of
/// X^j for j ≤ m are exact. Character sums are formed in Q(ζ_{p^m}).
pub fn brute_force_bp_level(h: &Mat, p: u64, m: u32, budget: u128) -> Result<Vec<CyclotomicNumber>> {
    let s = h.len();
    let nvars = s * (s + 1) / 2;
    let q = p.pow(m);
    let total = (q as u128).checked_pow(nvars as u32).unwrap_or(u128::MAX);
    if total > budget {
        return Err(Error::BudgetExceeded { needed: total, cap: budget });
    }
    let pos: Vec<(usize, usize)> = (0..s).flat_map(|i| (i..s).map(move |j| (i, j))).collect();
    // tr(hR)·p^m mod p^m as an integer linear form in the entries of M
    let lin: Vec<u64> = pos
        .iter()
        .map(|&(i, j)| {
            let w = if i == j { h[i][i].clone() } else { &h[i][j] * int(2) };
            residue(&w, p, m)
        })
        .collect::<Result<_>>()?;
    let qr = int(q as i64);
    let hist: Vec<Vec<i128>> = (0..total as u64)
        .into_par_iter()
        .fold(
            || vec![vec![0i128; q as usize]; m as usize + 1],
            |mut acc, mut idx| {
                let mut r: Mat = vec![vec![Rational::zero(); s]; s];
                let mut phase = 0u128;
                for (k, &(i, j)) in pos.iter().enumerate() {
                    let x = idx % q;
                    idx /= q;
                    phase += x as u128 * lin[k] as u128;
                    let v = Rational::new(BigInt::from(x), BigInt::from(q));
                    r[i][j] = v.clone();
                    r[j][i] = v;
                }
                let _ = &qr;
                let e = quadforms::elementary_divisor_exponent(&r, p) as usize;
                if e <= m as usize {
                    acc[e][(phase % q as u128) as usize] += 1;
                }
                acc
            },
        )
        .reduce(
            || vec![vec![0i128; q as usize]; m as usize + 1],
            |mut a, b| {
                for (ra, rb) in a.iter_mut().zip(b) {
                    for (x, y) in ra.iter_mut().zip(rb) {
                        *x += y;
                    }
                }
                a
            },
        );
    Ok(hist.iter().map(|row| CyclotomicNumber::from_histogram(q, row).minimize()).collect())
}

/// Naive brute force with the stabilization check between levels m and m + 1.
pub fn brute_force_bp_naive(h: &Mat, p: u64, j_max: u32, budget: u128) -> Result<SiegelSeriesPoly> {
    let lo = brute_force_bp_level(h, p, j_max, budget)?;
    let hi = brute_force_bp_level(h, p, j_max + 1, budget)?;
    for j in 0..=j_max as usize {
        if lo[j] != hi[j] {
            return Err(Error::Internal(format!("coefficient of X^{j} did not stabilize")));
        }
    }
    Ok(SiegelSeriesPoly { poly: UniPoly::new(lo), p, h: h.clone(), method: "naive enumeration".into() })
}

/// f_{h,ℓ}(X) = B_ℓ(X,h)(1 − ρ_h(ℓ)ℓ^n X) / [(1 − X) ∏_{i=1}^n (1 − ℓ^{2i}X²)].
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct FPoly {
    pub f: UniPoly,
    pub b: SiegelSeriesPoly,
    pub degree_checked: u32,
}

/// Where B_ℓ(X, h) comes from when extracting f.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum SeriesSource {
    /// Kitaoka's closed form for odd ℓ, brute force at ℓ = 2
    Auto,
    Kitaoka,
    BruteForce,
}

/// ρ_h(ℓ) is passed as an integer in {−1, 0, 1}.
pub fn extract_f_poly(h: &Mat, l: u64, n: usize, rho_at_l: i64, budget: u128) -> Result<FPoly> {
    extract_f_poly_with(h, l, n, rho_at_l, SeriesSource::Auto, budget)
}

pub fn extract_f_poly_with(
    h: &Mat,
    l: u64,
    n: usize,
    rho_at_l: i64,
    source: SeriesSource,
    budget: u128,
) -> Result<FPoly> {
    let d2 = quadforms::det(&quadforms::scale(h, &int(2)));
    let v = rational::v_p(&d2, l).ok_or(Error::SingularMatrix)?;
    if v < 0 {
        return Err(Error::Precondition("h must be ℓ-integral".into()));
    }
    if v == 0 && l != 2 {
        return Ok(FPoly {
            f: UniPoly::one(),
            b: SiegelSeriesPoly { poly: UniPoly::one(), p: l, h: h.clone(), method: "unit discriminant".into() },
            degree_checked: 0,
        });
    }
    let jmax = (2 * n as i64 + 1 + v + 2) as u32;
    let use_kitaoka = match source {
        SeriesSource::Auto => l != 2,
        SeriesSource::Kitaoka => true,
        SeriesSource::BruteForce => false,
    };
    let b = if use_kitaoka {
        SiegelSeriesPoly { poly: kitaoka_poly(h, l, n)?, p: l, h: h.clone(), method: "kitaoka".into() }
    } else {
        brute_force_bp(h, l, jmax, budget)?
    };
    let lpow = |e: usize| rational::pow_i(&int(l as i64), e as i64);
    let num = (&b.poly * &UniPoly::from_rationals([int(1), -(int(rho_at_l) * lpow(n))])).truncate(jmax as usize);
    // the last two coefficients must already vanish
    for t in jmax - 1..=jmax {
        if !num.coeff(t as usize).is_zero() {
            return Err(Error::FactorizationViolated(format!(
                "B_{l}(X,h)(1 − ρℓ^nX) has a nonzero X^{t} coefficient"
            )));
        }
    }
    let mut den = UniPoly::from_ints(&[1, -1]);
    for i in 1..=n {
        den = &den * &UniPoly::from_rationals([int(1), int(0), -lpow(2 * i)]);
    }
    let f = num.div_exact(&den).map_err(|_| Error::FactorizationViolated(format!("inexact division at ℓ = {l}")))?;
    let rc = f.rational_coeffs().ok_or_else(|| Error::FactorizationViolated("non-rational coefficient".into()))?;
    if rc.iter().any(|c| !c.is_integer()) {
        return Err(Error::FactorizationViolated(format!("non-integral coefficient in f = {f}")));
    }
    if rc.first() != Some(&Rational::one()) {
        return Err(Error::FactorizationViolated(format!("constant term of f is not 1: {f}")));
    }
    Ok(FPoly { f, b, degree_checked: jmax })
}

/// Outcome of the valuation inequality at one (h, p, k).
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct KeyValuationReport {
    pub p: u64,
    pub k: i64,
    pub v_det_h: i64,
    pub e_ph: i64,
    pub f_poly: String,
    pub v_f_value: Valuation,
    /// (k − n − ½)(v_p(det h) − e) + v_p(f(χ(p)p^{−k})), as a string rational
    #[serde(with = "rational::serde_rational")]
    pub margin: Rational,
    /// v_p(f) − v_p(b_p) − (2nk − n² + e(k − n)); zero when the first identity holds
    pub firstineq_residual: Option<i64>,
    /// (v − e)(n − k + ½) + n(n − 2k) + e(n − k), the lower bound for v_p(f-value)
    #[serde(with = "rational::serde_rational")]
    pub kit5_bound: Rational,
    pub pass: bool,
    pub vacuous: bool,
}

pub fn check_key_valuation(
    h: &Mat,
    p: u64,
    k: i64,
    n: usize,
    chi_at_p: &CyclotomicNumber,
    rho_at_p: i64,
    budget: u128,
) -> Result<KeyValuationReport> {
    if p == 2 {
        return Err(Error::Precondition("p must be odd".into()));
    }
    let dh = quadforms::det(h);
    let vdet = rational::v_p(&dh, p).ok_or(Error::SingularMatrix)?;
    if vdet < 0 {
        return Err(Error::Precondition("h must be p-integral".into()));
    }
    let e = vdet.rem_euclid(2);
    let nn = n as i64;
    let kit5 = int((vdet - e) * (2 * nn - 2 * k + 1)) / int(2) + int(nn * (nn - 2 * k) + e * (nn - k));
    if vdet == 0 {
        return Ok(KeyValuationReport {
            p,
            k,
            v_det_h: 0,
            e_ph: 0,
            f_poly: "1".into(),
            v_f_value: Valuation::Finite(0),
            margin: Rational::zero(),
            firstineq_residual: None,
            kit5_bound: kit5,
            pass: true,
            vacuous: true,
        });
    }
    let fp = extract_f_poly(h, p, n, rho_at_p, budget)?;
    let x = kitaoka_point(chi_at_p, p, k);
    let fval = fp.f.eval(&x);
    let vf = fval.p_valuation(p)?;
    let margin = match vf {
        Valuation::Finite(v) => int(2 * k - 2 * nn - 1) * int(vdet - e) / int(2) + int(v),
        Valuation::Infinity => int(i64::MAX),
    };
    let bp = kitaoka_bp(h, k, chi_at_p, p, n)?;
    let firstineq_residual = match (vf, bp.p_valuation(p)?) {
        (Valuation::Finite(a), Valuation::Finite(b)) => Some(a - b - (2 * nn * k - nn * nn + e * (k - nn))),
        _ => None,
    };
    Ok(KeyValuationReport {
        p,
        k,
        v_det_h: vdet,
        e_ph: e,
        f_poly: fp.f.to_string(),
        v_f_value: vf,
        pass: !margin.is_negative(),
        margin,
        firstineq_residual,
        kit5_bound: kit5,
        vacuous: false,
    })
}

/// Smallest J such that B_p(X, h) is a polynomial of degree ≤ J, from the f-degree bound.
pub fn series_degree_bound(h: &Mat, p: u64, n: usize) -> Result<u32> {
    let d2 = quadforms::det(&quadforms::scale(h, &int(2)));
    let v = rational::v_p(&d2, p).ok_or(Error::SingularMatrix)?;
    Ok((2 * n as i64 + 1 + v.max(0) + 2) as u32)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quadforms::mat_from_ints;

    #[test]
    fn coset_counts() {
        assert_eq!(enumerate_hnf_cosets(2, 5, 0).len(), 1);
        let c = enumerate_hnf_cosets(2, 5, 1);
        assert_eq!(c.iter().filter(|g| g.det_valuation == 1).count(), 6);
        let c = enumerate_hnf_cosets(2, 3, 2);
        assert_eq!(c.iter().filter(|g| g.det_valuation == 2).count(), 13);
        // classical count: number of index-p^v sublattices of Z_p^2 is (p^{v+1} − 1)/(p − 1)
        for v in 0..4u32 {
            let got = enumerate_hnf_cosets(2, 3, v).iter().filter(|g| g.det_valuation == v).count() as u64;
            assert_eq!(got, (3u64.pow(v + 1) - 1) / 2);
        }
    }

    #[test]
    fn alpha_examples() {
        let one = CyclotomicNumber::one();
        let s = vec![vec![rational::rat(1, 3), int(0)], vec![int(0), int(1)]];
        assert!(alpha_chi_p(&s, 4, &one, 3, 1).unwrap().is_zero());
        let z = mat_from_ints(&[&[0, 0], &[0, 0]]);
        let p = |e: i64| rational::pow_i(&int(3), e);
        let expect = (int(1) - p(-4)) * (int(1) + p(-2)) * (int(1) - p(-6));
        assert_eq!(alpha_chi_p(&z, 4, &one, 3, 1).unwrap(), CyclotomicNumber::from_rational(expect));
        let i2 = mat_from_ints(&[&[1, 0], &[0, 1]]);
        let expect = (int(1) - p(-4)) * (int(1) - p(-3));
        assert_eq!(alpha_chi_p(&i2, 4, &one, 3, 1).unwrap(), CyclotomicNumber::from_rational(expect));
    }

    #[test]
    fn unimodular_kitaoka_is_single_term() {
        let h = mat_from_ints(&[&[1, 0], &[0, 1]]);
        let t = kitaoka_terms(&h, 6, &CyclotomicNumber::one(), 5, 1).unwrap();
        assert_eq!(t.len(), 1);
    }

    #[test]
    fn fast_matches_naive() {
        for (p, h) in [
            (3u64, mat_from_ints(&[&[1, 0], &[0, 3]])),
            (3, mat_from_ints(&[&[3, 0], &[0, 3]])),
            (2, mat_from_ints(&[&[1, 0], &[0, 1]])),
            (2, vec![vec![int(1), rational::rat(1, 2)], vec![rational::rat(1, 2), int(1)]]),
            (5, mat_from_ints(&[&[1, 2], &[2, 9]])),
        ] {
            let m = if p == 5 { 2 } else { 3 };
            let fast = brute_force_bp(&h, p, m, DEFAULT_BUDGET).unwrap();
            let naive = brute_force_bp_naive(&h, p, m, DEFAULT_BUDGET).unwrap();
            assert_eq!(fast.poly, naive.poly, "p = {p}, h = {h:?}");
        }
    }

    #[test]
    fn f_poly_examples() {
        let h = mat_from_ints(&[&[1, 0], &[0, 3]]);
        // ρ_h = (−3/·), ρ(3) = 0
        let f = extract_f_poly(&h, 3, 1, 0, DEFAULT_BUDGET).unwrap();
        assert_eq!(f.f, UniPoly::one());
        let h = mat_from_ints(&[&[1, 0], &[0, 9]]);
        let f = extract_f_poly(&h, 3, 1, -1, DEFAULT_BUDGET).unwrap();
        assert_eq!(f.f, UniPoly::from_ints(&[1, 3, 27]));
        let h = mat_from_ints(&[&[3, 0], &[0, 3]]);
        let f = extract_f_poly(&h, 3, 1, -1, DEFAULT_BUDGET).unwrap();
        assert_eq!(f.f, UniPoly::from_ints(&[1, 12, 27]));
        let bf = extract_f_poly_with(&h, 3, 1, -1, SeriesSource::BruteForce, DEFAULT_BUDGET).unwrap();
        assert_eq!(bf.f, f.f);
        let h = mat_from_ints(&[&[1, 0], &[0, 27]]);
        let f = extract_f_poly(&h, 3, 1, 0, DEFAULT_BUDGET).unwrap();
        assert_eq!(f.f, UniPoly::from_ints(&[1, 0, 27]));
        let h = mat_from_ints(&[&[3, 0], &[0, 9]]);
        let f = extract_f_poly(&h, 3, 1, 0, DEFAULT_BUDGET).unwrap();
        assert_eq!(f.f, UniPoly::from_ints(&[1, 9, 27]));
    }

    #[test]
    fn kitaoka_matches_brute_force_diag13() {
        let h = mat_from_ints(&[&[1, 0], &[0, 3]]);
        let one = CyclotomicNumber::one();
        let kit = kitaoka_bp(&h, 6, &one, 3, 1).unwrap();
        let b = brute_force_bp(&h, 3, 7, DEFAULT_BUDGET).unwrap();
        assert_eq!(kit, b.poly.eval(&kitaoka_point(&one, 3, 6)));
        assert_eq!(kitaoka_poly(&h, 3, 1).unwrap(), b.poly);
    }

    #[test]
    fn key_valuation_example() {
        let h = mat_from_ints(&[&[1, 0], &[0, 3]]);
        let r = check_key_valuation(&h, 3, 6, 1, &CyclotomicNumber::one(), 0, DEFAULT_BUDGET).unwrap();
        assert!(r.pass);
        assert_eq!(r.firstineq_residual, Some(0));
    }
}
