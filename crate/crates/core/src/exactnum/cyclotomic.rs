//! Elements of Q(ζ_M) in the power basis 1, ζ, …, ζ^{φ(M)−1}.

use std::collections::HashMap;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};
use std::sync::{Arc, Mutex, OnceLock};

use num_bigint::BigInt;
use num_complex::Complex64;
use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};

use super::rational::{self, Rational};
use crate::error::{Error, Result};

/// Reduction data for one modulus: `pow[e]` holds x^e mod Φ_M for 0 ≤ e < M.
struct Field {
    phi: usize,
    pow: Vec<Vec<i64>>,
}

fn cyclotomic_poly(m: u64) -> Vec<BigInt> {
    // x^m − 1 divided by Φ_d for every proper divisor d
    let mut num: Vec<BigInt> = vec![BigInt::zero(); m as usize + 1];
    num[0] = BigInt::from(-1);
    num[m as usize] = BigInt::one();
    for d in rational::divisors(m) {
        if d == m {
            continue;
        }
        let den = cyclotomic_poly_cached(d);
        num = int_poly_div(&num, &den);
    }
    num
}

fn int_poly_div(num: &[BigInt], den: &[BigInt]) -> Vec<BigInt> {
    // den is monic
    let mut rem = num.to_vec();
    let dd = den.len() - 1;
    let mut q = vec![BigInt::zero(); rem.len() - dd];
    for i in (0..q.len()).rev() {
        let c = rem[i + dd].clone();
        if c.is_zero() {
            continue;
        }
        for (j, dj) in den.iter().enumerate() {
            rem[i + j] -= &c * dj;
        }
        q[i] = c;
    }
    debug_assert!(rem.iter().all(|c| c.is_zero()));
    q
}

fn poly_cache() -> &'static Mutex<HashMap<u64, Vec<BigInt>>> {
    static CACHE: OnceLock<Mutex<HashMap<u64, Vec<BigInt>>>> = OnceLock::new();
    CACHE.get_or_init(|| Mutex::new(HashMap::new()))
}

fn cyclotomic_poly_cached(m: u64) -> Vec<BigInt> {
    if let Some(p) = poly_cache().lock().unwrap().get(&m) {
        return p.clone();
    }
    let p = cyclotomic_poly(m);
    poly_cache().lock().unwrap().insert(m, p.clone());
    p
}

/// Coefficients of Φ_M, constant term first.
pub fn cyclotomic_polynomial(m: u64) -> Vec<BigInt> {
    cyclotomic_poly_cached(m)
}

fn field(m: u64) -> Arc<Field> {
    static CACHE: OnceLock<Mutex<HashMap<u64, Arc<Field>>>> = OnceLock::new();
    let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
    if let Some(f) = cache.lock().unwrap().get(&m) {
        return f.clone();
    }
    let phi_poly: Vec<i64> = cyclotomic_poly_cached(m)
        .iter()
        .map(|c| i64::try_from(c).expect("cyclotomic coefficient overflow"))
        .collect();
    let phi = phi_poly.len() - 1;
    let mut pow = Vec::with_capacity(m as usize);
    let mut cur = vec![0i64; phi];
    cur[0] = 1;
    for _ in 0..m {
        pow.push(cur.clone());
        // multiply by x and reduce by the monic Φ_M
        let top = cur[phi - 1];
        for i in (1..phi).rev() {
            cur[i] = cur[i - 1];
        }
        cur[0] = 0;
        if top != 0 {
            for i in 0..phi {
                cur[i] -= top * phi_poly[i];
            }
        }
    }
    let f = Arc::new(Field { phi, pow });
    cache.lock().unwrap().insert(m, f.clone());
    f
}

pub fn phi(m: u64) -> usize {
    field(m).phi
}

#[derive(Clone, Debug)]
pub struct CyclotomicNumber {
    modulus: u64,
    coords: Vec<Rational>,
}

impl CyclotomicNumber {
    /// Build from power-basis coordinates; shorter vectors are zero padded.
    pub fn new(modulus: u64, mut coords: Vec<Rational>) -> Result<Self> {
        if modulus == 0 {
            return Err(Error::Precondition("cyclotomic modulus must be positive".into()));
        }
        let f = field(modulus);
        if coords.len() > f.phi {
            return Ok(Self::from_exponents(modulus, coords.into_iter().enumerate().map(|(e, c)| (e as u64, c))));
        }
        coords.resize(f.phi, Rational::zero());
        Ok(Self { modulus, coords })
    }

    pub fn zero() -> Self {
        Self::from_rational(Rational::zero())
    }

    pub fn one() -> Self {
        Self::from_rational(Rational::one())
    }

    pub fn from_rational(r: Rational) -> Self {
        Self { modulus: 1, coords: vec![r] }
    }

    pub fn from_int(n: i64) -> Self {
        Self::from_rational(rational::int(n))
    }

    /// ζ_M^e.
    pub fn zeta_pow(modulus: u64, e: i64) -> Self {
        let e = e.rem_euclid(modulus as i64) as u64;
        Self::from_exponents(modulus, std::iter::once((e, Rational::one())))
    }

    /// The imaginary unit ζ_4.
    pub fn i() -> Self {
        Self::zeta_pow(4, 1)
    }

    /// Σ c·ζ_M^e over arbitrary (possibly repeated) exponents.
    pub fn from_exponents(modulus: u64, terms: impl IntoIterator<Item = (u64, Rational)>) -> Self {
        let f = field(modulus);
        let mut acc: HashMap<u64, Rational> = HashMap::new();
        for (e, c) in terms {
            *acc.entry(e % modulus).or_insert_with(Rational::zero) += c;
        }
        let mut coords = vec![Rational::zero(); f.phi];
        for (e, c) in acc {
            if c.is_zero() {
                continue;
            }
            for (i, t) in f.pow[e as usize].iter().enumerate() {
                if *t != 0 {
                    coords[i] += &c * BigInt::from(*t);
                }
            }
        }
        Self { modulus, coords }
    }

    /// Σ n_e·ζ_M^e from an integer histogram indexed by exponent.
    pub fn from_histogram(modulus: u64, hist: &[i128]) -> Self {
        let f = field(modulus);
        let mut coords = vec![BigInt::zero(); f.phi];
        for (e, &n) in hist.iter().enumerate() {
            if n == 0 {
                continue;
            }
            for (i, t) in f.pow[e % modulus as usize].iter().enumerate() {
                if *t != 0 {
                    coords[i] += BigInt::from(n) * BigInt::from(*t);
                }
            }
        }
        Self { modulus, coords: coords.into_iter().map(Rational::from_integer).collect() }
    }

    pub fn modulus(&self) -> u64 {
        self.modulus
    }

    pub fn coords(&self) -> &[Rational] {
        &self.coords
    }

    pub fn is_zero(&self) -> bool {
        self.coords.iter().all(|c| c.is_zero())
    }

    /// `Some(q)` when the element lies in Q.
    pub fn as_rational(&self) -> Option<Rational> {
        if self.coords[1..].iter().all(|c| c.is_zero()) {
            Some(self.coords[0].clone())
        } else {
            None
        }
    }

    /// Image in Q(ζ_{M'}) for M | M'.
    pub fn embed(&self, target: u64) -> Result<Self> {
        if target == 0 || !target.is_multiple_of(self.modulus) {
            return Err(Error::IncompatibleModuli { from: self.modulus, to: target });
        }
        if target == self.modulus {
            return Ok(self.clone());
        }
        let step = target / self.modulus;
        Ok(Self::from_exponents(
            target,
            self.coords
                .iter()
                .enumerate()
                .filter(|(_, c)| !c.is_zero())
                .map(|(i, c)| (i as u64 * step, c.clone())),
        ))
    }

    fn lift_pair(&self, other: &Self) -> (Self, Self) {
        if self.modulus == other.modulus {
            return (self.clone(), other.clone());
        }
        let l = rational::lcm(self.modulus, other.modulus);
        (self.embed(l).unwrap(), other.embed(l).unwrap())
    }

    /// Galois conjugate σ_a: ζ ↦ ζ^a, gcd(a, M) = 1.
    pub fn galois(&self, a: i64) -> Self {
        let m = self.modulus as i64;
        Self::from_exponents(
            self.modulus,
            self.coords
                .iter()
                .enumerate()
                .filter(|(_, c)| !c.is_zero())
                .map(|(i, c)| (((i as i64 * a).rem_euclid(m)) as u64, c.clone())),
        )
    }

    /// Complex conjugation.
    pub fn conj(&self) -> Self {
        self.galois(-1)
    }

    pub fn scale(&self, r: &Rational) -> Self {
        Self { modulus: self.modulus, coords: self.coords.iter().map(|c| c * r).collect() }
    }

    /// Multiplication matrix of `self` acting on the power basis (column j = self·ζ^j).
    fn mult_matrix(&self) -> Vec<Vec<Rational>> {
        let n = self.coords.len();
        let mut cols = Vec::with_capacity(n);
        for j in 0..n {
            let z = Self::zeta_pow(self.modulus, j as i64);
            cols.push((self * &z).coords);
        }
        (0..n).map(|i| (0..n).map(|j| cols[j][i].clone()).collect()).collect()
    }

    pub fn inverse(&self) -> Result<Self> {
        if self.is_zero() {
            return Err(Error::DivisionByZero);
        }
        if let Some(r) = self.as_rational() {
            return Ok(Self::from_rational(r.recip()));
        }
        let a = self.mult_matrix();
        let mut b = vec![Rational::zero(); a.len()];
        b[0] = Rational::one();
        let x = solve(a, b).ok_or(Error::Internal("singular multiplication matrix".into()))?;
        Ok(Self { modulus: self.modulus, coords: x })
    }

    pub fn div(&self, other: &Self) -> Result<Self> {
        Ok(self * &other.inverse()?)
    }

    pub fn pow(&self, e: i64) -> Result<Self> {
        let base = if e < 0 { self.inverse()? } else { self.clone() };
        let mut e = e.unsigned_abs();
        let mut acc = Self::one();
        let mut b = base;
        while e > 0 {
            if e & 1 == 1 {
                acc = &acc * &b;
            }
            b = &b * &b;
            e >>= 1;
        }
        Ok(acc)
    }

    /// Smallest-modulus representation of the same element.
    pub fn minimize(&self) -> Self {
        if let Some(r) = self.as_rational() {
            return Self::from_rational(r);
        }
        for d in rational::divisors(self.modulus) {
            if d == self.modulus {
                break;
            }
            if d == 1 || d % 4 == 2 {
                continue;
            }
            // cheap necessary condition: fixed by σ_a for a ≡ 1 mod d
            let mut fixed = true;
            let mut a = 1 + d;
            while a < self.modulus {
                if rational::gcd(a, self.modulus) == 1 {
                    if self.galois(a as i64) != *self {
                        fixed = false;
                    }
                    break;
                }
                a += d;
            }
            if !fixed {
                continue;
            }
            if let Some(c) = self.express_in(d) {
                return c;
            }
        }
        self.clone()
    }

    fn express_in(&self, d: u64) -> Option<Self> {
        let pd = phi(d);
        let step = self.modulus / d;
        let n = self.coords.len();
        // columns are images of ζ_d^j
        let cols: Vec<Vec<Rational>> = (0..pd)
            .map(|j| Self::zeta_pow(self.modulus, (j as u64 * step) as i64).coords)
            .collect();
        let a: Vec<Vec<Rational>> = (0..n).map(|i| (0..pd).map(|j| cols[j][i].clone()).collect()).collect();
        let x = solve_overdetermined(a, self.coords.clone())?;
        Some(Self { modulus: d, coords: x })
    }

    pub fn to_complex(&self) -> Complex64 {
        let m = self.modulus as f64;
        self.coords
            .iter()
            .enumerate()
            .filter(|(_, c)| !c.is_zero())
            .map(|(i, c)| {
                let t = 2.0 * std::f64::consts::PI * i as f64 / m;
                Complex64::new(t.cos(), t.sin()) * rational::to_f64(c)
            })
            .sum()
    }

    /// Minimum p-adic valuation over power-basis coordinates, for p unramified.
    pub fn p_valuation(&self, p: u64) -> Result<Valuation> {
        let x = if self.modulus.is_multiple_of(p) { self.minimize() } else { self.clone() };
        if x.modulus % p == 0 {
            return Err(Error::RamifiedModulus { p, modulus: x.modulus });
        }
        Ok(x.coords
            .iter()
            .filter_map(|c| rational::v_p(c, p))
            .min()
            .map_or(Valuation::Infinity, Valuation::Finite))
    }

    /// Integral at every prime above p; the power basis of Z[ζ_M] is an integral basis, so this
    /// also works when p ramifies.
    pub fn is_p_integral(&self, p: u64) -> bool {
        self.coords.iter().all(|c| rational::v_p(c, p).is_none_or(|v| v >= 0))
    }
}

/// p-adic valuation with +∞ for zero.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Valuation {
    Finite(i64),
    Infinity,
}

impl Valuation {
    pub fn is_integral(&self) -> bool {
        !matches!(self, Valuation::Finite(v) if *v < 0)
    }

    pub fn finite(&self) -> Option<i64> {
        match self {
            Valuation::Finite(v) => Some(*v),
            Valuation::Infinity => None,
        }
    }
}

impl fmt::Display for Valuation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Valuation::Finite(v) => write!(f, "{v}"),
            Valuation::Infinity => write!(f, "inf"),
        }
    }
}

/// Gaussian elimination for a square nonsingular system.
fn solve(a: Vec<Vec<Rational>>, b: Vec<Rational>) -> Option<Vec<Rational>> {
    let n = b.len();
    let x = solve_overdetermined(a, b)?;
    (x.len() == n).then_some(x)
}

/// Solves A x = b for A with full column rank; `None` when inconsistent.
fn solve_overdetermined(mut a: Vec<Vec<Rational>>, mut b: Vec<Rational>) -> Option<Vec<Rational>> {
    let rows = a.len();
    let cols = if rows == 0 { 0 } else { a[0].len() };
    let mut r = 0;
    let mut pivots = Vec::new();
    for c in 0..cols {
        let Some(piv) = (r..rows).find(|&i| !a[i][c].is_zero()) else {
            return None;
        };
        a.swap(r, piv);
        b.swap(r, piv);
        let inv = a[r][c].recip();
        for j in c..cols {
            a[r][j] = &a[r][j] * &inv;
        }
        b[r] = &b[r] * &inv;
        for i in 0..rows {
            if i != r && !a[i][c].is_zero() {
                let f = a[i][c].clone();
                for j in c..cols {
                    let t = &f * &a[r][j];
                    a[i][j] -= t;
                }
                let t = &f * &b[r];
                b[i] -= t;
            }
        }
        pivots.push(c);
        r += 1;
    }
    if b[r..].iter().any(|x| !x.is_zero()) {
        return None;
    }
    Some(b[..cols].to_vec())
}

impl PartialEq for CyclotomicNumber {
    fn eq(&self, other: &Self) -> bool {
        if self.modulus == other.modulus {
            return self.coords == other.coords;
        }
        let (a, b) = self.lift_pair(other);
        a.coords == b.coords
    }
}

impl Eq for CyclotomicNumber {}

impl<'a> Add<&'a CyclotomicNumber> for &'a CyclotomicNumber {
    type Output = CyclotomicNumber;
    fn add(self, o: &CyclotomicNumber) -> CyclotomicNumber {
        if self.modulus == o.modulus {
            return CyclotomicNumber {
                modulus: self.modulus,
                coords: self.coords.iter().zip(&o.coords).map(|(a, b)| a + b).collect(),
            };
        }
        let (a, b) = self.lift_pair(o);
        &a + &b
    }
}

impl<'a> Sub<&'a CyclotomicNumber> for &'a CyclotomicNumber {
    type Output = CyclotomicNumber;
    fn sub(self, o: &CyclotomicNumber) -> CyclotomicNumber {
        self + &(-o)
    }
}

impl Neg for &CyclotomicNumber {
    type Output = CyclotomicNumber;
    fn neg(self) -> CyclotomicNumber {
        CyclotomicNumber { modulus: self.modulus, coords: self.coords.iter().map(|c| -c).collect() }
    }
}

impl<'a> Mul<&'a CyclotomicNumber> for &'a CyclotomicNumber {
    type Output = CyclotomicNumber;
    fn mul(self, o: &CyclotomicNumber) -> CyclotomicNumber {
        if self.modulus != o.modulus {
            if self.modulus == 1 {
                return o.scale(&self.coords[0]);
            }
            if o.modulus == 1 {
                return self.scale(&o.coords[0]);
            }
            let (a, b) = self.lift_pair(o);
            return &a * &b;
        }
        let m = self.modulus as usize;
        if m == 1 {
            return CyclotomicNumber::from_rational(&self.coords[0] * &o.coords[0]);
        }
        let mut acc = vec![Rational::zero(); m];
        for (i, a) in self.coords.iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            for (j, b) in o.coords.iter().enumerate() {
                if !b.is_zero() {
                    acc[(i + j) % m] += a * b;
                }
            }
        }
        let f = field(self.modulus);
        let mut coords = vec![Rational::zero(); f.phi];
        for (e, c) in acc.into_iter().enumerate() {
            if c.is_zero() {
                continue;
            }
            for (i, t) in f.pow[e].iter().enumerate() {
                if *t != 0 {
                    coords[i] += &c * BigInt::from(*t);
                }
            }
        }
        CyclotomicNumber { modulus: self.modulus, coords }
    }
}

macro_rules! forward_binop {
    ($tr:ident, $m:ident) => {
        impl $tr<CyclotomicNumber> for CyclotomicNumber {
            type Output = CyclotomicNumber;
            fn $m(self, o: CyclotomicNumber) -> CyclotomicNumber {
                (&self).$m(&o)
            }
        }
    };
}
forward_binop!(Add, add);
forward_binop!(Sub, sub);
forward_binop!(Mul, mul);

impl Neg for CyclotomicNumber {
    type Output = CyclotomicNumber;
    fn neg(self) -> CyclotomicNumber {
        -&self
    }
}

impl std::iter::Sum for CyclotomicNumber {
    fn sum<I: Iterator<Item = Self>>(iter: I) -> Self {
        iter.fold(Self::zero(), |a, b| &a + &b)
    }
}

impl std::iter::Product for CyclotomicNumber {
    fn product<I: Iterator<Item = Self>>(iter: I) -> Self {
        iter.fold(Self::one(), |a, b| &a * &b)
    }
}

impl From<Rational> for CyclotomicNumber {
    fn from(r: Rational) -> Self {
        Self::from_rational(r)
    }
}

impl fmt::Display for CyclotomicNumber {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let m = self.minimize();
        let mut parts = Vec::new();
        for (i, c) in m.coords.iter().enumerate() {
            if c.is_zero() {
                continue;
            }
            parts.push(match i {
                0 => c.to_string(),
                1 => format!("({c})*z{}", m.modulus),
                _ => format!("({c})*z{}^{i}", m.modulus),
            });
        }
        if parts.is_empty() {
            write!(f, "0")
        } else {
            write!(f, "{}", parts.join(" + "))
        }
    }
}

#[derive(Serialize, Deserialize)]
struct CycloRepr {
    modulus: u64,
    #[serde(with = "rational::serde_rational_vec")]
    coords: Vec<Rational>,
}

impl Serialize for CyclotomicNumber {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let m = self.minimize();
        CycloRepr { modulus: m.modulus, coords: m.coords }.serialize(s)
    }
}

impl<'de> Deserialize<'de> for CyclotomicNumber {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let r = CycloRepr::deserialize(d)?;
        CyclotomicNumber::new(r.modulus, r.coords).map_err(serde::de::Error::custom)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exactnum::rational::{int, rat};

    #[test]
    fn phi_polys() {
        let c: Vec<i64> = cyclotomic_polynomial(12).iter().map(|x| i64::try_from(x).unwrap()).collect();
        assert_eq!(c, vec![1, 0, -1, 0, 1]);
        assert_eq!(phi(15), 8);
        assert_eq!(phi(1), 1);
    }

    #[test]
    fn embed_examples() {
        let one = CyclotomicNumber::one().embed(4).unwrap();
        assert_eq!(one.coords(), &[int(1), int(0)]);
        let z2 = CyclotomicNumber::zeta_pow(2, 1).embed(4).unwrap();
        assert_eq!(z2.as_rational(), Some(int(-1)));
        let s = &CyclotomicNumber::zeta_pow(3, 1) + &CyclotomicNumber::zeta_pow(3, 2);
        assert_eq!(s.embed(12).unwrap().as_rational(), Some(int(-1)));
        assert!(matches!(
            CyclotomicNumber::zeta_pow(3, 1).embed(8),
            Err(Error::IncompatibleModuli { from: 3, to: 8 })
        ));
    }

    #[test]
    fn minimize_recovers_subfield() {
        let i = CyclotomicNumber::i();
        let x = i.embed(20).unwrap();
        let m = x.minimize();
        assert_eq!(m.modulus(), 4);
        assert_eq!(m, i);
        // ζ_3 lives in Q(ζ_6) = Q(ζ_3)
        let z = CyclotomicNumber::zeta_pow(6, 2).minimize();
        assert_eq!(z.modulus(), 3);
    }

    #[test]
    fn inverse_and_pow() {
        let x = &CyclotomicNumber::from_int(2) + &CyclotomicNumber::zeta_pow(5, 1);
        let y = x.inverse().unwrap();
        assert_eq!(&x * &y, CyclotomicNumber::one());
        let z = CyclotomicNumber::zeta_pow(7, 3);
        assert_eq!(z.pow(7).unwrap(), CyclotomicNumber::one());
        assert_eq!(z.pow(-1).unwrap(), z.conj());
    }

    #[test]
    fn valuation_examples() {
        let a = CyclotomicNumber::from_rational(rat(1, 6));
        assert_eq!(a.p_valuation(5).unwrap(), Valuation::Finite(0));
        let b = CyclotomicNumber::new(4, vec![rat(5, 3), rat(10, 7)]).unwrap();
        assert_eq!(b.p_valuation(5).unwrap(), Valuation::Finite(1));
        assert_eq!(CyclotomicNumber::zero().p_valuation(3).unwrap(), Valuation::Infinity);
        let c = CyclotomicNumber::zeta_pow(5, 1);
        assert!(matches!(c.p_valuation(5), Err(Error::RamifiedModulus { .. })));
        // ramified modulus but rational value: minimization rescues it
        let d = (&c + &c.conj()) + (&c.galois(2) + &c.galois(3));
        assert_eq!(d.p_valuation(5).unwrap(), Valuation::Finite(0));
    }

    #[test]
    fn complex_value() {
        let z = CyclotomicNumber::zeta_pow(8, 1).to_complex();
        assert!((z.re - 0.5f64.sqrt()).abs() < 1e-12 && (z.im - 0.5f64.sqrt()).abs() < 1e-12);
    }

    #[test]
    fn json_round_trip() {
        let x = CyclotomicNumber::new(4, vec![rat(5, 3), rat(-1, 2)]).unwrap();
        let s = serde_json::to_string(&x).unwrap();
        assert_eq!(s, r#"{"modulus":4,"coords":["5/3","-1/2"]}"#);
        let y: CyclotomicNumber = serde_json::from_str(&s).unwrap();
        assert_eq!(x, y);
    }
}
