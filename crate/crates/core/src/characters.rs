//! Dirichlet characters, Gauss sums, generalized Bernoulli numbers and the normalized
//! Dirichlet L-value at k − n.

use std::sync::OnceLock;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exactnum::rational::{self, int, Rational};
use crate::exactnum::{CyclotomicNumber, PiScalar};

/// A Dirichlet character stored through its values on a fixed generating set of
/// (Z/modulus)^×. Images are kept as "turns" t with χ(g) = exp(2πi t), 0 ≤ t < 1.
///
/// Generators, per prime power q ‖ modulus in increasing prime order and lifted by CRT
/// (≡ 1 modulo the other prime powers): for odd p the least primitive root mod q;
/// for q = 4 the class of −1; for q = 2^e, e ≥ 3, the classes of −1 and 5.
#[derive(Debug)]
pub struct DirichletCharacter {
    modulus: u64,
    gens: Vec<(u64, u64)>,
    turns: Vec<Rational>,
    table: OnceLock<Vec<Option<Rational>>>,
}

impl Clone for DirichletCharacter {
    fn clone(&self) -> Self {
        Self { modulus: self.modulus, gens: self.gens.clone(), turns: self.turns.clone(), table: OnceLock::new() }
    }
}

impl PartialEq for DirichletCharacter {
    fn eq(&self, o: &Self) -> bool {
        self.modulus == o.modulus && self.turns == o.turns
    }
}

impl Eq for DirichletCharacter {}

fn pow_mod(mut b: u64, mut e: u64, m: u64) -> u64 {
    let mut r = 1 % m;
    b %= m;
    while e > 0 {
        if e & 1 == 1 {
            r = (r as u128 * b as u128 % m as u128) as u64;
        }
        b = (b as u128 * b as u128 % m as u128) as u64;
        e >>= 1;
    }
    r
}

fn mult_order(g: u64, m: u64) -> u64 {
    let mut x = g % m;
    let mut k = 1;
    while x != 1 % m {
        x = (x as u128 * g as u128 % m as u128) as u64;
        k += 1;
    }
    k
}

fn primitive_root_prime_power(p: u64, e: u32) -> u64 {
    let q = p.pow(e);
    let phi = q / p * (p - 1);
    (2..q).find(|&g| g % p != 0 && mult_order(g, q) == phi).expect("odd prime powers are cyclic")
}

/// Chinese remainder lift: x ≡ a mod q and x ≡ 1 mod m/q.
fn crt_lift(a: u64, q: u64, m: u64) -> u64 {
    let r = m / q;
    if r == 1 {
        return a % q;
    }
    // x = 1 + r·t with 1 + r t ≡ a mod q
    let rinv = modinv(r % q, q);
    let t = ((a + q - 1 % q) % q) as u128 * rinv as u128 % q as u128;
    ((1 + r as u128 * t) % m as u128) as u64
}

fn modinv(a: u64, m: u64) -> u64 {
    let e = (a as i128).extended_gcd(&(m as i128));
    e.x.rem_euclid(m as i128) as u64
}

fn generators(m: u64) -> Vec<(u64, u64)> {
    let mut gens = Vec::new();
    for (p, e) in rational::factorize(m) {
        let q = p.pow(e);
        if p == 2 {
            match e {
                1 => {}
                2 => gens.push((crt_lift(3, q, m), 2)),
                _ => {
                    gens.push((crt_lift(q - 1, q, m), 2));
                    gens.push((crt_lift(5, q, m), q / 4));
                }
            }
        } else {
            gens.push((crt_lift(primitive_root_prime_power(p, e), q, m), q / p * (p - 1)));
        }
    }
    gens
}

fn frac_part(r: &Rational) -> Rational {
    r - r.floor()
}

fn turn_to_cyclo(t: &Rational) -> CyclotomicNumber {
    let d = u64::try_from(t.denom()).expect("character order fits in u64");
    let n = i64::try_from(t.numer()).expect("turn numerator fits in i64");
    CyclotomicNumber::zeta_pow(d, n)
}

/// Turn t ∈ [0,1) with ζ = exp(2πi t), if `x` is a root of unity of order dividing `ord`.
fn cyclo_to_turn(x: &CyclotomicNumber, ord: u64) -> Option<Rational> {
    (0..ord).find(|&a| CyclotomicNumber::zeta_pow(ord, a as i64) == *x).map(|a| rational::rat(a as i64, ord as i64))
}

impl DirichletCharacter {
    pub fn trivial(modulus: u64) -> Self {
        let gens = generators(modulus);
        let turns = vec![Rational::zero(); gens.len()];
        Self { modulus, gens, turns, table: OnceLock::new() }
    }

    /// From turns on the canonical generators.
    pub fn from_turns(modulus: u64, turns: Vec<Rational>) -> Result<Self> {
        if modulus == 0 {
            return Err(Error::InvalidCharacter("modulus must be positive".into()));
        }
        let gens = generators(modulus);
        if turns.len() != gens.len() {
            return Err(Error::InvalidCharacter(format!(
                "modulus {modulus} has {} generators, got {} images",
                gens.len(),
                turns.len()
            )));
        }
        let turns: Vec<Rational> = turns.iter().map(frac_part).collect();
        for (t, (g, ord)) in turns.iter().zip(&gens) {
            if !(t * BigInt::from(*ord)).is_integer() {
                return Err(Error::InvalidCharacter(format!(
                    "image of generator {g} has order not dividing {ord}"
                )));
            }
        }
        Ok(Self { modulus, gens, turns, table: OnceLock::new() })
    }

    /// From a multiplicative function given as turns on units; used for lifts and products.
    fn from_turn_fn(modulus: u64, f: impl Fn(u64) -> Rational) -> Self {
        let gens = generators(modulus);
        let turns = gens.iter().map(|(g, _)| frac_part(&f(*g))).collect();
        Self { modulus, gens, turns, table: OnceLock::new() }
    }

    pub fn modulus(&self) -> u64 {
        self.modulus
    }

    pub fn generators(&self) -> Vec<u64> {
        self.gens.iter().map(|g| g.0).collect()
    }

    pub fn generator_images(&self) -> Vec<CyclotomicNumber> {
        self.turns.iter().map(turn_to_cyclo).collect()
    }

    fn table(&self) -> &Vec<Option<Rational>> {
        self.table.get_or_init(|| {
            let m = self.modulus;
            let mut tab: Vec<Option<Rational>> = vec![None; m as usize];
            tab[(1 % m) as usize] = Some(Rational::zero());
            // walk the group generated one generator at a time
            let mut elems: Vec<(u64, Rational)> = vec![(1 % m, Rational::zero())];
            for ((g, ord), t) in self.gens.iter().zip(&self.turns) {
                let mut next = Vec::with_capacity(elems.len() * *ord as usize);
                for (x, tx) in &elems {
                    let mut y = *x;
                    let mut ty = tx.clone();
                    for _ in 0..*ord {
                        next.push((y, frac_part(&ty)));
                        y = (y as u128 * *g as u128 % m as u128) as u64;
                        ty += t;
                    }
                }
                elems = next;
            }
            for (x, t) in elems {
                tab[x as usize] = Some(t);
            }
            tab
        })
    }

    /// χ(a) as a turn, `None` when gcd(a, modulus) > 1.
    pub fn turn(&self, a: i64) -> Option<Rational> {
        let r = a.rem_euclid(self.modulus as i64) as usize;
        self.table()[r].clone()
    }

    pub fn value(&self, a: i64) -> CyclotomicNumber {
        self.turn(a).map_or_else(CyclotomicNumber::zero, |t| turn_to_cyclo(&t))
    }

    pub fn is_trivial(&self) -> bool {
        self.turns.iter().all(|t| t.is_zero())
    }

    /// Order of χ in the character group.
    pub fn order(&self) -> u64 {
        self.turns
            .iter()
            .fold(1u64, |acc, t| rational::lcm(acc, u64::try_from(t.denom()).unwrap()))
    }

    /// ε with χ(−1) = (−1)^ε.
    pub fn parity(&self) -> u8 {
        match self.turn(-1) {
            Some(t) if t.is_zero() => 0,
            Some(_) => 1,
            None => 0,
        }
    }

    pub fn conj(&self) -> Self {
        Self {
            modulus: self.modulus,
            gens: self.gens.clone(),
            turns: self.turns.iter().map(|t| frac_part(&-t)).collect(),
            table: OnceLock::new(),
        }
    }

    /// Induced character on a multiple of the modulus.
    pub fn lift(&self, modulus: u64) -> Result<Self> {
        if !modulus.is_multiple_of(self.modulus) {
            return Err(Error::IncompatibleModuli { from: self.modulus, to: modulus });
        }
        Ok(Self::from_turn_fn(modulus, |g| self.turn(g as i64).expect("lifted generator is a unit")))
    }

    /// Product character modulo lcm of the moduli.
    pub fn mul(&self, o: &Self) -> Self {
        let m = rational::lcm(self.modulus, o.modulus);
        Self::from_turn_fn(m, |g| {
            self.turn(g as i64).expect("unit") + o.turn(g as i64).expect("unit")
        })
    }

    pub fn pow(&self, e: i64) -> Self {
        Self {
            modulus: self.modulus,
            gens: self.gens.clone(),
            turns: self.turns.iter().map(|t| frac_part(&(t * BigInt::from(e)))).collect(),
            table: OnceLock::new(),
        }
    }

    fn units(&self) -> impl Iterator<Item = u64> + '_ {
        (1..=self.modulus).filter(move |&a| rational::gcd(a, self.modulus) == 1)
    }

    /// Restriction to a divisor `d` of the modulus, if χ factors through (Z/d)^×.
    fn descend(&self, d: u64) -> Option<Self> {
        let m = self.modulus;
        for a in self.units() {
            if a % d == 1 % d && !self.turn(a as i64).unwrap().is_zero() {
                return None;
            }
        }
        Some(Self::from_turn_fn(d, |g| {
            // a unit mod m congruent to g mod d
            let mut y = g % d;
            if y == 0 {
                y = d;
            }
            while rational::gcd(y, m) != 1 {
                y += d;
            }
            self.turn(y as i64).unwrap()
        }))
    }

    /// Conductor and the primitive character inducing χ.
    pub fn conductor_and_primitive(&self) -> (u64, Self) {
        for d in rational::divisors(self.modulus) {
            if let Some(c) = self.descend(d) {
                return (d, c);
            }
        }
        unreachable!("χ descends to its own modulus")
    }

    pub fn is_primitive(&self) -> bool {
        self.conductor_and_primitive().0 == self.modulus
    }

    /// Local component at p (a character modulo the p-part of the modulus).
    pub fn local_component(&self, p: u64) -> Self {
        let m = self.modulus;
        let q = p.pow(rational::v_p_u64(m, p).unwrap_or(0) as u32);
        Self::from_turn_fn(q, |g| self.turn(crt_lift(g, q, m) as i64).unwrap())
    }

    /// Quadratic character of a fundamental discriminant D, modulo |D|.
    pub fn kronecker(d: i64) -> Result<Self> {
        if !is_fundamental_discriminant(d) && d != 1 {
            return Err(Error::InvalidCharacter(format!("{d} is not a fundamental discriminant")));
        }
        let m = d.unsigned_abs();
        Ok(Self::from_turn_fn(m, |g| {
            if kronecker_symbol(d, g as i64) == 1 {
                Rational::zero()
            } else {
                rational::rat(1, 2)
            }
        }))
    }
}

impl Serialize for DirichletCharacter {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        #[derive(Serialize)]
        struct Repr {
            modulus: u64,
            generator_images: Vec<CyclotomicNumber>,
        }
        Repr { modulus: self.modulus, generator_images: self.generator_images() }.serialize(s)
    }
}

impl<'de> Deserialize<'de> for DirichletCharacter {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        struct Repr {
            modulus: u64,
            generator_images: Vec<CyclotomicNumber>,
        }
        let r = Repr::deserialize(d)?;
        make_character(r.modulus, &r.generator_images).map_err(serde::de::Error::custom)
    }
}

/// Character from images of the canonical generators.
pub fn make_character(modulus: u64, images: &[CyclotomicNumber]) -> Result<DirichletCharacter> {
    let gens = generators(modulus.max(1));
    if images.len() != gens.len() {
        return Err(Error::InvalidCharacter(format!(
            "modulus {modulus} needs {} generator images, got {}",
            gens.len(),
            images.len()
        )));
    }
    let mut turns = Vec::new();
    for (x, (g, ord)) in images.iter().zip(&gens) {
        let t = cyclo_to_turn(x, *ord).ok_or_else(|| {
            Error::InvalidCharacter(format!("image {x} of generator {g} is not a root of unity of order dividing {ord}"))
        })?;
        turns.push(t);
    }
    DirichletCharacter::from_turns(modulus, turns)
}

pub fn conductor_and_primitive(chi: &DirichletCharacter) -> (u64, DirichletCharacter) {
    chi.conductor_and_primitive()
}

/// Kronecker symbol (d/n) for n ≥ 1 coprime or not to d.
pub fn kronecker_symbol(d: i64, n: i64) -> i32 {
    assert!(n >= 1, "kronecker symbol needs n ≥ 1");
    let mut s = 1;
    for (p, e) in rational::factorize(n as u64) {
        let v = if p == 2 {
            if d % 2 == 0 {
                0
            } else if matches!(d.rem_euclid(8), 1 | 7) {
                1
            } else {
                -1
            }
        } else {
            legendre(d, p)
        };
        if v == 0 {
            return 0;
        }
        if v == -1 && e % 2 == 1 {
            s = -s;
        }
    }
    s
}

/// Legendre symbol (a/p) for odd prime p.
pub fn legendre(a: i64, p: u64) -> i32 {
    let a = a.rem_euclid(p as i64) as u64;
    if a == 0 {
        return 0;
    }
    if pow_mod(a, (p - 1) / 2, p) == 1 {
        1
    } else {
        -1
    }
}

pub fn is_fundamental_discriminant(d: i64) -> bool {
    if d == 0 || d == 1 {
        return false;
    }
    let squarefree = |n: u64| rational::factorize(n).iter().all(|&(_, e)| e == 1);
    match d.rem_euclid(4) {
        1 => squarefree(d.unsigned_abs()),
        0 => {
            let m = d / 4;
            matches!(m.rem_euclid(4), 2 | 3) && squarefree(m.unsigned_abs())
        }
        _ => false,
    }
}

/// Fundamental discriminant D and f ≥ 1 with Δ = D·f²; D = 1 when Δ is a square.
pub fn fundamental_discriminant(delta: &BigInt) -> Result<(i64, BigInt)> {
    if delta.is_zero() {
        return Err(Error::SingularMatrix);
    }
    let sign: i64 = if delta.is_negative() { -1 } else { 1 };
    let mut n = delta.abs();
    // squarefree part by trial division
    let mut s = BigInt::one();
    let mut f = BigInt::one();
    let mut p = BigInt::from(2);
    while &p * &p <= n {
        let mut e = 0;
        while (&n % &p).is_zero() {
            n /= &p;
            e += 1;
        }
        for _ in 0..e / 2 {
            f *= &p;
        }
        if e % 2 == 1 {
            s *= &p;
        }
        p += 1;
    }
    s *= n;
    let s = i64::try_from(&s).map_err(|_| Error::Internal("squarefree part overflows".into()))? * sign;
    if s.rem_euclid(4) == 1 {
        Ok((s, f))
    } else {
        if !(&f % 2u32).is_zero() {
            return Err(Error::Precondition(format!("{delta} is not a discriminant (≢ 0, 1 mod 4)")));
        }
        Ok((4 * s, f / 2))
    }
}

/// G(η) = Σ_{ν mod F} η(ν) e^{2πiν/F} for primitive η.
pub fn gauss_sum(eta: &DirichletCharacter) -> Result<CyclotomicNumber> {
    let (c, _) = eta.conductor_and_primitive();
    if c != eta.modulus {
        return Err(Error::ImprimitiveCharacter { modulus: eta.modulus, conductor: c });
    }
    let f = eta.modulus;
    if f == 1 {
        return Ok(CyclotomicNumber::one());
    }
    let l = rational::lcm(f, eta.order());
    let terms = (1..f).filter_map(|nu| {
        eta.turn(nu as i64).map(|t| {
            let e = (rational::rat(nu as i64, f as i64) + t) * BigInt::from(l);
            (u64::try_from(e.to_integer()).unwrap() % l, Rational::one())
        })
    });
    Ok(CyclotomicNumber::from_exponents(l, terms).minimize())
}

/// √n (n ≠ 0) inside a cyclotomic field, through quadratic Gauss sums.
pub fn sqrt_int(n: i64) -> Result<CyclotomicNumber> {
    if n == 0 {
        return Ok(CyclotomicNumber::zero());
    }
    let (mut s, mut t) = (1i64, 1i64);
    for (p, e) in rational::factorize(n.unsigned_abs()) {
        t *= (p as i64).pow(e / 2);
        if e % 2 == 1 {
            s *= p as i64;
        }
    }
    let root = if s == 1 {
        CyclotomicNumber::one()
    } else {
        // G(χ_D) = √D for D > 0, and D = 4s unless s ≡ 1 mod 4
        let d = if s % 4 == 1 { s } else { 4 * s };
        let g = gauss_sum(&DirichletCharacter::kronecker(d)?)?;
        if d == s { g } else { g.scale(&rational::rat(1, 2)) }
    };
    let out = root.scale(&int(t));
    Ok(if n < 0 { &out * &CyclotomicNumber::i() } else { out })
}

/// Bernoulli numbers B_0..=B_n with B_1 = −1/2.
pub fn bernoulli_numbers(n: usize) -> Vec<Rational> {
    let mut b = vec![Rational::zero(); n + 1];
    b[0] = Rational::one();
    for m in 1..=n {
        let mut s = Rational::zero();
        for (j, bj) in b.iter().enumerate().take(m) {
            s += bj * rational::big(&rational::binomial(m as u64 + 1, j as u64));
        }
        b[m] = -s / int(m as i64 + 1);
    }
    b
}

/// B_n(x) = Σ_j C(n,j) B_j x^{n−j}.
pub fn bernoulli_poly(n: usize, x: &Rational) -> Rational {
    let b = bernoulli_numbers(n);
    (0..=n)
        .map(|j| &b[j] * rational::big(&rational::binomial(n as u64, j as u64)) * rational::pow_i(x, (n - j) as i64))
        .sum()
}

/// B_{n,η} = F^{n−1} Σ_{a=1}^{F} η(a) B_n(a/F), F the modulus of η.
pub fn generalized_bernoulli(n: usize, eta: &DirichletCharacter) -> CyclotomicNumber {
    let f = eta.modulus as i64;
    let b = bernoulli_numbers(n);
    let bn = |x: &Rational| -> Rational {
        (0..=n)
            .map(|j| &b[j] * rational::big(&rational::binomial(n as u64, j as u64)) * rational::pow_i(x, (n - j) as i64))
            .sum()
    };
    let scale = rational::pow_i(&int(f), n as i64 - 1);
    let mut terms: Vec<CyclotomicNumber> = Vec::new();
    for a in 1..=f {
        let v = eta.value(a);
        if v.is_zero() {
            continue;
        }
        terms.push(v.scale(&(bn(&rational::rat(a, f)) * &scale)));
    }
    terms.into_iter().sum::<CyclotomicNumber>().minimize()
}

/// Normalized L-value π^{n−k} N_h^{k−n−1/2} L^N(k−n, χρ_h) with its factorization record.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct LValueBracket {
    pub value: PiScalar,
    pub bernoulli_part: CyclotomicNumber,
    pub gauss_unit_part: GaussUnitRecord,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct GaussUnitRecord {
    pub gauss_sum: CyclotomicNumber,
    pub conductor: u64,
    pub n1: u64,
    pub n2: u64,
    /// μ with G(η_h) = μ G(χ₁) G(χ₂)
    pub mu: CyclotomicNumber,
    /// Euler factors at primes dividing the level, ∏ (1 − η_h(ℓ) ℓ^{n−k})
    pub euler_part: CyclotomicNumber,
    /// ε with η_h(−1) = (−1)^ε
    pub parity: u8,
    pub eta: DirichletCharacter,
}

/// Assemble the bracket for η_h the primitive character attached to χρ_h.
pub fn l_value_bracket(
    k: i64,
    n: i64,
    chi: &DirichletCharacter,
    rho: &DirichletCharacter,
    level: u64,
) -> Result<LValueBracket> {
    let s = k - n;
    if s < 1 {
        return Err(Error::Precondition(format!("k − n = {s} must be at least 1")));
    }
    let (nh, eta) = chi.mul(rho).conductor_and_primitive();
    let eps = eta.parity();
    if (s - eps as i64).rem_euclid(2) != 0 {
        return Err(Error::ParityMismatch);
    }
    let g = gauss_sum(&eta)?;
    let bern = generalized_bernoulli(s as usize, &eta.conj());

    // (−1)^{1+(s−ε)/2} G / (2 i^ε) · 2^s · N_h^{−1/2} · B / s!
    let sign = if (1 + (s - eps as i64) / 2) % 2 == 0 { 1 } else { -1 };
    let i_eps = if eps == 1 { CyclotomicNumber::i() } else { CyclotomicNumber::one() };
    let sqrt_nh = sqrt_int(nh as i64)?;
    let denom = &(&i_eps * &sqrt_nh) * &CyclotomicNumber::from_int(2);
    let rat_part = int(sign) * rational::pow_i(&int(2), s) / rational::big(&rational::factorial(s as u64));
    let core = (&g * &bern).scale(&rat_part).div(&denom)?;

    let mut euler = CyclotomicNumber::one();
    for (l, _) in rational::factorize(level) {
        let term = eta.value(l as i64).scale(&rational::pow_i(&int(l as i64), -s));
        euler = &euler * &(&CyclotomicNumber::one() - &term);
    }
    let value = (&core * &euler).minimize();

    let (n1, n2, mu) = gauss_factorization(&eta, level, &g)?;
    Ok(LValueBracket {
        value: PiScalar::algebraic(value),
        bernoulli_part: bern,
        gauss_unit_part: GaussUnitRecord {
            gauss_sum: g,
            conductor: nh,
            n1,
            n2,
            mu,
            euler_part: euler.minimize(),
            parity: eps,
            eta,
        },
    })
}

/// Split η = χ₁χ₂ by primes dividing the level or not and return (N₁, N₂, μ).
fn gauss_factorization(
    eta: &DirichletCharacter,
    level: u64,
    g: &CyclotomicNumber,
) -> Result<(u64, u64, CyclotomicNumber)> {
    let m = eta.modulus;
    let mut n1 = 1;
    for (p, e) in rational::factorize(m) {
        if level.is_multiple_of(p) {
            n1 *= p.pow(e);
        }
    }
    let n2 = m / n1;
    let chi1 = DirichletCharacter::from_turn_fn(n1, |x| eta.turn(crt_lift(x, n1, m) as i64).unwrap());
    let chi2 = DirichletCharacter::from_turn_fn(n2, |x| eta.turn(crt_lift(x, n2, m) as i64).unwrap());
    let g12 = &gauss_sum(&chi1)? * &gauss_sum(&chi2)?;
    let mu = g.div(&g12)?.minimize();
    // μ = χ₁(N₂) χ₂(N₁)
    let expect = &chi1.value(n2 as i64) * &chi2.value(n1 as i64);
    if mu != expect {
        return Err(Error::Internal(format!("Gauss sum factorization: μ = {mu}, expected {expect}")));
    }
    Ok((n1, n2, mu))
}

/// Truncated Σ_a η(a) t e^{at}/(e^{Ft} − 1) coefficients times n!: an independent route to
/// B_{n,η} used as a test oracle.
pub fn bernoulli_by_generating_series(max_n: usize, eta: &DirichletCharacter) -> Vec<CyclotomicNumber> {
    let f = eta.modulus as i64;
    // (e^{Ft} − 1)/t = Σ F^{j+1} t^j/(j+1)!; invert as a power series
    let den: Vec<Rational> = (0..=max_n)
        .map(|j| rational::pow_i(&int(f), j as i64 + 1) / rational::big(&rational::factorial(j as u64 + 1)))
        .collect();
    let mut inv = vec![Rational::zero(); max_n + 1];
    inv[0] = den[0].recip();
    for i in 1..=max_n {
        let s: Rational = (1..=i).map(|j| &den[j] * &inv[i - j]).sum();
        inv[i] = -s / &den[0];
    }
    let mut out = vec![CyclotomicNumber::zero(); max_n + 1];
    for a in 1..=f {
        let v = eta.value(a);
        if v.is_zero() {
            continue;
        }
        // e^{at}·inv, coefficient of t^n
        for (nn, slot) in out.iter_mut().enumerate() {
            let c: Rational = (0..=nn)
                .map(|i| rational::pow_i(&int(a), i as i64) / rational::big(&rational::factorial(i as u64)) * &inv[nn - i])
                .sum();
            *slot = &*slot + &v.scale(&(c * rational::big(&rational::factorial(nn as u64))));
        }
    }
    out.into_iter().map(|x| x.minimize()).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::exactnum::rational::rat;

    fn odd4() -> DirichletCharacter {
        make_character(4, &[CyclotomicNumber::from_int(-1)]).unwrap()
    }

    #[test]
    fn construction_examples() {
        let t = make_character(1, &[]).unwrap();
        assert!(t.is_trivial());
        assert_eq!(t.value(7), CyclotomicNumber::one());
        let c = odd4();
        assert_eq!(c.value(3), CyclotomicNumber::from_int(-1));
        assert_eq!(c.value(2), CyclotomicNumber::zero());
        assert_eq!(c.parity(), 1);
        let c5 = make_character(5, &[CyclotomicNumber::i()]).unwrap();
        assert_eq!(c5.value(2).pow(4).unwrap(), CyclotomicNumber::one());
        assert_eq!(c5.value(4), CyclotomicNumber::from_int(-1));
        assert_eq!(c5.order(), 4);
        assert!(make_character(5, &[CyclotomicNumber::zeta_pow(3, 1)]).is_err());
        assert!(make_character(5, &[]).is_err());
    }

    #[test]
    fn conductors() {
        let (c, p) = DirichletCharacter::trivial(12).conductor_and_primitive();
        assert_eq!((c, p.modulus()), (1, 1));
        let lifted = odd4().lift(8).unwrap();
        let (c, p) = lifted.conductor_and_primitive();
        assert_eq!(c, 4);
        assert_eq!(p, odd4());
        let c5 = make_character(5, &[CyclotomicNumber::i()]).unwrap();
        assert_eq!(c5.conductor_and_primitive().1, c5);
    }

    #[test]
    fn gauss_sums() {
        assert_eq!(gauss_sum(&DirichletCharacter::trivial(1)).unwrap(), CyclotomicNumber::one());
        let g = gauss_sum(&odd4()).unwrap();
        assert_eq!(g, CyclotomicNumber::i().scale(&int(2)));
        let q5 = DirichletCharacter::kronecker(5).unwrap();
        let g5 = gauss_sum(&q5).unwrap();
        assert_eq!(&g5 * &g5, CyclotomicNumber::from_int(5));
        assert!(matches!(gauss_sum(&odd4().lift(8).unwrap()), Err(Error::ImprimitiveCharacter { .. })));
    }

    #[test]
    fn square_roots() {
        for n in [2i64, 3, 5, 8, 12, 20, 49, 6] {
            let r = sqrt_int(n).unwrap();
            assert_eq!(&r * &r, CyclotomicNumber::from_int(n), "n = {n}");
            assert!(r.to_complex().re > 0.0);
        }
        let r = sqrt_int(-3).unwrap();
        assert_eq!(&r * &r, CyclotomicNumber::from_int(-3));
    }

    #[test]
    fn bernoulli_examples() {
        let c = odd4();
        assert!(generalized_bernoulli(0, &c).is_zero());
        assert_eq!(generalized_bernoulli(1, &c), CyclotomicNumber::from_rational(rat(-1, 2)));
        let t = DirichletCharacter::trivial(1);
        assert_eq!(generalized_bernoulli(2, &t), CyclotomicNumber::from_rational(rat(1, 6)));
        assert_eq!(generalized_bernoulli(1, &t), CyclotomicNumber::from_rational(rat(1, 2)));
        assert_eq!(bernoulli_by_generating_series(2, &t)[2], CyclotomicNumber::from_rational(rat(1, 6)));
    }

    #[test]
    fn discriminants() {
        assert_eq!(fundamental_discriminant(&BigInt::from(-4)).unwrap(), (-4, BigInt::from(1)));
        assert_eq!(fundamental_discriminant(&BigInt::from(16)).unwrap(), (1, BigInt::from(4)));
        assert_eq!(fundamental_discriminant(&BigInt::from(-12)).unwrap(), (-3, BigInt::from(2)));
        assert_eq!(fundamental_discriminant(&BigInt::from(-32)).unwrap(), (-8, BigInt::from(2)));
        assert!(fundamental_discriminant(&BigInt::from(-6)).is_err());
        let k = DirichletCharacter::kronecker(-3).unwrap();
        assert_eq!(k.value(2), CyclotomicNumber::from_int(-1));
        assert_eq!(k.parity(), 1);
    }

    #[test]
    fn bracket_example() {
        let chi = DirichletCharacter::trivial(4);
        let b = l_value_bracket(2, 1, &chi, &odd4(), 4).unwrap();
        assert_eq!(b.value.value, CyclotomicNumber::from_rational(rat(1, 2)));
        assert_eq!(b.value.pi_exponent, 0);
        assert_eq!(b.value.value.p_valuation(7).unwrap().finite(), Some(0));
        assert_eq!(l_value_bracket(3, 1, &chi, &odd4(), 4).unwrap_err(), Error::ParityMismatch);
    }
}
