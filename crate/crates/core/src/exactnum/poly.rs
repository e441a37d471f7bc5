use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use serde::{Deserialize, Serialize};

use super::cyclotomic::CyclotomicNumber;
use super::rational::Rational;
use crate::error::{Error, Result};

/// Univariate polynomial in X with cyclotomic coefficients, constant term first.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct UniPoly {
    coeffs: Vec<CyclotomicNumber>,
}

impl UniPoly {
    pub fn new(mut coeffs: Vec<CyclotomicNumber>) -> Self {
        while coeffs.last().is_some_and(|c| c.is_zero()) {
            coeffs.pop();
        }
        Self { coeffs }
    }

    pub fn from_rationals(cs: impl IntoIterator<Item = Rational>) -> Self {
        Self::new(cs.into_iter().map(CyclotomicNumber::from_rational).collect())
    }

    pub fn from_ints(cs: &[i64]) -> Self {
        Self::new(cs.iter().map(|&c| CyclotomicNumber::from_int(c)).collect())
    }

    pub fn zero() -> Self {
        Self { coeffs: vec![] }
    }

    pub fn one() -> Self {
        Self::constant(CyclotomicNumber::one())
    }

    pub fn constant(c: CyclotomicNumber) -> Self {
        Self::new(vec![c])
    }

    /// `c·X^d`.
    pub fn monomial(c: CyclotomicNumber, d: usize) -> Self {
        let mut v = vec![CyclotomicNumber::zero(); d];
        v.push(c);
        Self::new(v)
    }

    pub fn coeffs(&self) -> &[CyclotomicNumber] {
        &self.coeffs
    }

    pub fn coeff(&self, i: usize) -> CyclotomicNumber {
        self.coeffs.get(i).cloned().unwrap_or_else(CyclotomicNumber::zero)
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// Degree, with `None` for the zero polynomial.
    pub fn degree(&self) -> Option<usize> {
        self.coeffs.len().checked_sub(1)
    }

    pub fn eval(&self, x: &CyclotomicNumber) -> CyclotomicNumber {
        self.coeffs
            .iter()
            .rev()
            .fold(CyclotomicNumber::zero(), |acc, c| &(&acc * x) + c)
    }

    /// Keep terms of degree ≤ d.
    pub fn truncate(&self, d: usize) -> Self {
        Self::new(self.coeffs.iter().take(d + 1).cloned().collect())
    }

    /// Rational coefficients, when every coefficient is rational.
    pub fn rational_coeffs(&self) -> Option<Vec<Rational>> {
        self.coeffs.iter().map(|c| c.as_rational()).collect()
    }

    /// Exact quotient `num / den`; a nonzero remainder is an error.
    pub fn div_exact(&self, den: &Self) -> Result<Self> {
        let Some(dd) = den.degree() else {
            return Err(Error::DivisionByZero);
        };
        let lead_inv = den.coeffs[dd].inverse()?;
        let mut rem = self.coeffs.clone();
        if rem.len() < dd + 1 {
            return if self.is_zero() { Ok(Self::zero()) } else { Err(Error::InexactDivision) };
        }
        let mut q = vec![CyclotomicNumber::zero(); rem.len() - dd];
        for i in (0..q.len()).rev() {
            let c = &rem[i + dd] * &lead_inv;
            if c.is_zero() {
                continue;
            }
            for (j, dj) in den.coeffs.iter().enumerate() {
                rem[i + j] = &rem[i + j] - &(&c * dj);
            }
            q[i] = c;
        }
        if rem.iter().any(|c| !c.is_zero()) {
            return Err(Error::InexactDivision);
        }
        Ok(Self::new(q))
    }
}

impl Add<&UniPoly> for &UniPoly {
    type Output = UniPoly;
    fn add(self, o: &UniPoly) -> UniPoly {
        let n = self.coeffs.len().max(o.coeffs.len());
        UniPoly::new((0..n).map(|i| &self.coeff(i) + &o.coeff(i)).collect())
    }
}

impl Sub<&UniPoly> for &UniPoly {
    type Output = UniPoly;
    fn sub(self, o: &UniPoly) -> UniPoly {
        self + &(-o)
    }
}

impl Neg for &UniPoly {
    type Output = UniPoly;
    fn neg(self) -> UniPoly {
        UniPoly::new(self.coeffs.iter().map(|c| -c).collect())
    }
}

impl Mul<&UniPoly> for &UniPoly {
    type Output = UniPoly;
    fn mul(self, o: &UniPoly) -> UniPoly {
        if self.is_zero() || o.is_zero() {
            return UniPoly::zero();
        }
        let mut out = vec![CyclotomicNumber::zero(); self.coeffs.len() + o.coeffs.len() - 1];
        for (i, a) in self.coeffs.iter().enumerate() {
            if a.is_zero() {
                continue;
            }
            for (j, b) in o.coeffs.iter().enumerate() {
                out[i + j] = &out[i + j] + &(a * b);
            }
        }
        UniPoly::new(out)
    }
}

impl fmt::Display for UniPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        let terms: Vec<String> = self
            .coeffs
            .iter()
            .enumerate()
            .filter(|(_, c)| !c.is_zero())
            .map(|(i, c)| match i {
                0 => format!("{c}"),
                1 => format!("({c})X"),
                _ => format!("({c})X^{i}"),
            })
            .collect();
        write!(f, "{}", terms.join(" + "))
    }
}
