//! Half-integral symmetric matrices, discriminant data, quadratic spaces over F_p and
//! elementary divisors over Z_p.

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::characters::{self, DirichletCharacter};
use crate::error::{Error, Result};
use crate::exactnum::rational::{self, int, Rational};

pub type Mat = Vec<Vec<Rational>>;

pub fn mat_from_ints(rows: &[&[i64]]) -> Mat {
    rows.iter().map(|r| r.iter().map(|&x| int(x)).collect()).collect()
}

pub fn identity(n: usize) -> Mat {
    (0..n).map(|i| (0..n).map(|j| if i == j { int(1) } else { int(0) }).collect()).collect()
}

pub fn mat_mul(a: &Mat, b: &Mat) -> Mat {
    let (n, m, k) = (a.len(), b.len(), b[0].len());
    (0..n)
        .map(|i| (0..k).map(|j| (0..m).map(|l| &a[i][l] * &b[l][j]).sum()).collect())
        .collect()
}

pub fn transpose(a: &Mat) -> Mat {
    (0..a[0].len()).map(|j| a.iter().map(|r| r[j].clone()).collect()).collect()
}

pub fn scale(a: &Mat, s: &Rational) -> Mat {
    a.iter().map(|r| r.iter().map(|x| x * s).collect()).collect()
}

pub fn det(a: &Mat) -> Rational {
    let n = a.len();
    let mut m = a.clone();
    let mut d = Rational::one();
    for c in 0..n {
        let Some(p) = (c..n).find(|&i| !m[i][c].is_zero()) else {
            return Rational::zero();
        };
        if p != c {
            m.swap(p, c);
            d = -d;
        }
        d *= &m[c][c];
        let inv = m[c][c].recip();
        for i in c + 1..n {
            if m[i][c].is_zero() {
                continue;
            }
            let f = &m[i][c] * &inv;
            for j in c..n {
                let t = &f * &m[c][j];
                m[i][j] -= t;
            }
        }
    }
    d
}

pub fn inverse(a: &Mat) -> Result<Mat> {
    let n = a.len();
    let mut m: Mat = a
        .iter()
        .enumerate()
        .map(|(i, r)| {
            let mut r = r.clone();
            r.extend((0..n).map(|j| if i == j { int(1) } else { int(0) }));
            r
        })
        .collect();
    for c in 0..n {
        let p = (c..n).find(|&i| !m[i][c].is_zero()).ok_or(Error::SingularMatrix)?;
        m.swap(p, c);
        let inv = m[c][c].recip();
        for x in m[c].iter_mut() {
            *x = &*x * &inv;
        }
        for i in 0..n {
            if i != c && !m[i][c].is_zero() {
                let f = m[i][c].clone();
                for j in 0..2 * n {
                    let t = &f * &m[c][j];
                    m[i][j] -= t;
                }
            }
        }
    }
    Ok(m.into_iter().map(|r| r[n..].to_vec()).collect())
}

/// Symmetric matrix h with diagonal in (1/N)Z and off-diagonal entries in (1/2N)Z.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct HalfIntegralMatrix {
    entries: Mat,
    level: u64,
}

impl HalfIntegralMatrix {
    pub fn new(entries: Mat, level: u64) -> Result<Self> {
        let n = entries.len();
        if n == 0 || entries.iter().any(|r| r.len() != n) {
            return Err(Error::Precondition("matrix must be square and nonempty".into()));
        }
        if level == 0 {
            return Err(Error::Precondition("level must be positive".into()));
        }
        let nn = int(level as i64);
        for i in 0..n {
            for j in 0..n {
                if entries[i][j] != entries[j][i] {
                    return Err(Error::Precondition("matrix is not symmetric".into()));
                }
                let scaled = &entries[i][j] * &nn * if i == j { int(1) } else { int(2) };
                if !scaled.is_integer() {
                    return Err(Error::Precondition(format!(
                        "entry ({i},{j}) = {} is not in the half-integral lattice of level {level}",
                        entries[i][j]
                    )));
                }
            }
        }
        Ok(Self { entries, level })
    }

    /// 2×2 matrix [[a, b/2],[b/2, c]] / N from integers a, b, c.
    pub fn binary(a: i64, b: i64, c: i64, level: u64) -> Self {
        let n = level as i64;
        let e = vec![
            vec![rational::rat(a, n), rational::rat(b, 2 * n)],
            vec![rational::rat(b, 2 * n), rational::rat(c, n)],
        ];
        Self::new(e, level).expect("binary form is half-integral by construction")
    }

    pub fn diag(ds: &[i64]) -> Self {
        let n = ds.len();
        let e = (0..n).map(|i| (0..n).map(|j| if i == j { int(ds[i]) } else { int(0) }).collect()).collect();
        Self::new(e, 1).unwrap()
    }

    pub fn size(&self) -> usize {
        self.entries.len()
    }

    pub fn level(&self) -> u64 {
        self.level
    }

    pub fn entries(&self) -> &Mat {
        &self.entries
    }

    pub fn get(&self, i: usize, j: usize) -> &Rational {
        &self.entries[i][j]
    }

    pub fn det(&self) -> Rational {
        det(&self.entries)
    }

    pub fn two_h(&self) -> Mat {
        scale(&self.entries, &int(2))
    }

    pub fn det_2h(&self) -> Rational {
        det(&self.two_h())
    }

    pub fn trace(&self) -> Rational {
        (0..self.size()).map(|i| self.entries[i][i].clone()).sum()
    }

    /// N·h, a half-integral matrix of level 1.
    pub fn integral_scaling(&self) -> HalfIntegralMatrix {
        Self { entries: scale(&self.entries, &int(self.level as i64)), level: 1 }
    }

    /// Integer matrix 2Nh.
    pub fn even_integral(&self) -> Vec<Vec<BigInt>> {
        let s = int(2 * self.level as i64);
        self.entries.iter().map(|r| r.iter().map(|x| (x * &s).to_integer()).collect()).collect()
    }

    /// Leading principal minors all positive.
    pub fn is_positive_definite(&self) -> bool {
        (1..=self.size()).all(|k| {
            let m: Mat = self.entries[..k].iter().map(|r| r[..k].to_vec()).collect();
            det(&m).is_positive()
        })
    }

    /// Positive semidefinite: every principal minor nonnegative.
    pub fn is_positive_semidefinite(&self) -> bool {
        let n = self.size();
        (1u32..(1 << n)).all(|mask| {
            let idx: Vec<usize> = (0..n).filter(|i| mask & (1 << i) != 0).collect();
            let m: Mat = idx.iter().map(|&i| idx.iter().map(|&j| self.entries[i][j].clone()).collect()).collect();
            !det(&m).is_negative()
        })
    }
}

impl Serialize for HalfIntegralMatrix {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        #[derive(Serialize)]
        struct Repr {
            two_h: bool,
            level: u64,
            rows: Vec<Vec<String>>,
        }
        Repr {
            two_h: false,
            level: self.level,
            rows: self.entries.iter().map(|r| r.iter().map(|x| x.to_string()).collect()).collect(),
        }
        .serialize(s)
    }
}

impl<'de> Deserialize<'de> for HalfIntegralMatrix {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        struct Repr {
            two_h: bool,
            level: u64,
            rows: Vec<Vec<String>>,
        }
        let r = Repr::deserialize(d)?;
        let mut m: Mat = r
            .rows
            .iter()
            .map(|row| row.iter().map(|x| rational::parse(x)).collect::<Result<Vec<_>>>())
            .collect::<Result<_>>()
            .map_err(serde::de::Error::custom)?;
        if r.two_h {
            m = scale(&m, &rational::rat(1, 2));
        }
        HalfIntegralMatrix::new(m, r.level).map_err(serde::de::Error::custom)
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct DiscriminantData {
    /// fundamental discriminant D_h (1 when Δ is a square)
    pub fundamental_discriminant: i64,
    /// conductor C_h = |D_h|
    pub conductor: u64,
    /// f with Δ = D_h f²
    pub square_part: BigInt,
    /// Δ = (−1)^n det(2h)
    pub delta: BigInt,
    pub rho: DirichletCharacter,
}

/// Discriminant data of a level-one half-integral h of size 2n.
pub fn discriminant_data(h: &HalfIntegralMatrix) -> Result<DiscriminantData> {
    if h.level() != 1 {
        return Err(Error::Precondition("discriminant_data expects a level-one matrix".into()));
    }
    if h.size() % 2 == 1 {
        return Err(Error::Precondition("matrix size must be even".into()));
    }
    let n = h.size() / 2;
    let d2 = h.det_2h();
    if d2.is_zero() {
        return Err(Error::SingularMatrix);
    }
    let delta = if n.is_multiple_of(2) { d2.to_integer() } else { -d2.to_integer() };
    let (d, f) = characters::fundamental_discriminant(&delta)?;
    let rho = if d == 1 { DirichletCharacter::trivial(1) } else { DirichletCharacter::kronecker(d)? };
    Ok(DiscriminantData { fundamental_discriminant: d, conductor: d.unsigned_abs(), square_part: f, delta, rho })
}

/// Rank and Witt sign of the quadratic space (F_p^{size}, S mod p).
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct QuadSpaceClass {
    pub rank: usize,
    pub epsilon: i8,
}

fn mod_p(x: &Rational, p: u64) -> Result<i64> {
    let pb = BigInt::from(p);
    if (x.denom() % &pb).is_zero() {
        return Err(Error::Precondition(format!("{x} is not {p}-integral")));
    }
    let n = x.numer().mod_floor(&pb);
    let d = x.denom().mod_floor(&pb);
    let dinv = d.modpow(&BigInt::from(p - 2), &pb);
    Ok(i64::try_from((n * dinv) % &pb).unwrap())
}

/// Diagonal entries of a congruent diagonalization of S mod p (odd p).
fn diagonalize_mod_p(s: &Mat, p: u64) -> Result<Vec<i64>> {
    let n = s.len();
    let pi = p as i64;
    let mut a: Vec<Vec<i64>> = s.iter().map(|r| r.iter().map(|x| mod_p(x, p)).collect()).collect::<Result<_>>()?;
    let inv = |x: i64| -> i64 { BigInt::from(x).modpow(&BigInt::from(p - 2), &BigInt::from(p)).try_into().unwrap() };
    let mut diag = Vec::new();
    let mut active: Vec<usize> = (0..n).collect();
    while !active.is_empty() {
        // find an anisotropic basis vector, or make one from e_i + e_j
        let piv = active.iter().copied().find(|&i| a[i][i] != 0);
        let piv = match piv {
            Some(i) => i,
            None => {
                let pair = active
                    .iter()
                    .flat_map(|&i| active.iter().map(move |&j| (i, j)))
                    .find(|&(i, j)| i != j && a[i][j] != 0);
                let Some((i, j)) = pair else {
                    diag.extend(active.iter().map(|_| 0));
                    break;
                };
                // replace e_i by e_i + e_j: row/col i += row/col j
                for k in 0..n {
                    a[i][k] = (a[i][k] + a[j][k]).rem_euclid(pi);
                }
                for k in 0..n {
                    a[k][i] = (a[k][i] + a[k][j]).rem_euclid(pi);
                }
                i
            }
        };
        let d = a[piv][piv];
        let dinv = inv(d);
        for &i in &active {
            if i == piv || a[i][piv] == 0 {
                continue;
            }
            let f = a[i][piv] * dinv % pi;
            for k in 0..n {
                a[i][k] = (a[i][k] - f * a[piv][k]).rem_euclid(pi);
            }
            for k in 0..n {
                a[k][i] = (a[k][i] - f * a[k][piv]).rem_euclid(pi);
            }
        }
        diag.push(d);
        active.retain(|&i| i != piv);
    }
    Ok(diag)
}

/// Rank d of S mod p and, for even d, ε = ((−1)^{d/2} det N₁ / p) with N₁ the nondegenerate
/// part (the quotient by the radical). ε = +1 for d = 0 and by convention for odd d.
pub fn classify_mod_p(s: &Mat, p: u64) -> Result<QuadSpaceClass> {
    if p == 2 {
        return Err(Error::Dyadic);
    }
    let diag = diagonalize_mod_p(s, p)?;
    let nz: Vec<i64> = diag.into_iter().filter(|&x| x != 0).collect();
    let d = nz.len();
    if d == 0 || d % 2 == 1 {
        return Ok(QuadSpaceClass { rank: d, epsilon: 1 });
    }
    let mut prod = if (d / 2).is_multiple_of(2) { 1i64 } else { p as i64 - 1 };
    for x in nz {
        prod = prod * x % p as i64;
    }
    Ok(QuadSpaceClass { rank: d, epsilon: characters::legendre(prod, p) as i8 })
}

/// Elementary divisor exponents e_1 ≤ … ≤ e_m of R over Z_p (`None` for zero divisors).
pub fn elementary_divisors(r: &Mat, p: u64) -> Vec<Option<i64>> {
    let n = r.len();
    let m = if n == 0 { 0 } else { r[0].len() };
    let mut a = r.clone();
    let mut out = Vec::new();
    for t in 0..n.min(m) {
        let mut best: Option<(i64, usize, usize)> = None;
        for i in t..n {
            for j in t..m {
                if let Some(v) = rational::v_p(&a[i][j], p) {
                    if best.is_none_or(|b| v < b.0) {
                        best = Some((v, i, j));
                    }
                }
            }
        }
        let Some((v, bi, bj)) = best else {
            out.extend((t..n.min(m)).map(|_| None));
            break;
        };
        a.swap(t, bi);
        for row in a.iter_mut() {
            row.swap(t, bj);
        }
        let inv = a[t][t].recip();
        for i in t + 1..n {
            if a[i][t].is_zero() {
                continue;
            }
            let f = &a[i][t] * &inv;
            for j in t..m {
                let x = &f * &a[t][j];
                a[i][j] -= x;
            }
        }
        for j in t + 1..m {
            if a[t][j].is_zero() {
                continue;
            }
            let f = &a[t][j] * &inv;
            for i in t..n {
                let x = &f * &a[i][t];
                a[i][j] -= x;
            }
        }
        out.push(Some(v));
    }
    out.sort_by_key(|x| x.unwrap_or(i64::MAX));
    out
}

/// e(R) = −Σ_{e_i ≤ 0} e_i.
pub fn elementary_divisor_exponent(r: &Mat, p: u64) -> u64 {
    elementary_divisors(r, p)
        .into_iter()
        .flatten()
        .filter(|&e| e < 0)
        .map(|e| (-e) as u64)
        .sum()
}

/// Entries of the 2×2 symmetric matrix as a Z_p-integral check.
pub fn is_p_integral(m: &Mat, p: u64) -> bool {
    m.iter().flatten().all(|x| rational::v_p(x, p).is_none_or(|v| v >= 0))
}

/// Smallest positive integer c with c·x integral for every entry.
pub fn common_denominator(m: &Mat) -> BigInt {
    m.iter().flatten().fold(BigInt::one(), |acc, x| acc.lcm(x.denom()))
}

/// Random positive definite level-one binary forms [[a, b/2], [b/2, c]] with b ≠ 0 and
/// v_p(det 2h) ≤ max_v.
pub fn random_binary_forms<R: rand::Rng>(rng: &mut R, count: usize, p: u64, max_v: i64) -> Vec<HalfIntegralMatrix> {
    let mut out: Vec<HalfIntegralMatrix> = Vec::with_capacity(count);
    while out.len() < count {
        let a = rng.gen_range(1..=12i64);
        let c = rng.gen_range(1..=12i64);
        let b = rng.gen_range(-8..=8i64);
        let disc = 4 * a * c - b * b;
        if b == 0 || disc <= 0 {
            continue;
        }
        if rational::v_p_u64(disc as u64, p).unwrap_or(0) > max_v {
            continue;
        }
        let h = HalfIntegralMatrix::binary(a, b, c, 1);
        if !out.contains(&h) {
            out.push(h);
        }
    }
    out
}
