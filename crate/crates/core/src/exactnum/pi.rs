use std::ops::Mul;

use serde::{Deserialize, Serialize};

use super::cyclotomic::CyclotomicNumber;
use crate::error::{Error, Result};

/// `value · π^pi_exponent`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PiScalar {
    pub value: CyclotomicNumber,
    pub pi_exponent: i64,
}

impl PiScalar {
    pub fn new(value: CyclotomicNumber, pi_exponent: i64) -> Self {
        Self { value, pi_exponent }
    }

    pub fn algebraic(value: CyclotomicNumber) -> Self {
        Self::new(value, 0)
    }

    pub fn pi_pow(e: i64) -> Self {
        Self::new(CyclotomicNumber::one(), e)
    }

    pub fn try_add(&self, other: &Self) -> Result<Self> {
        if self.value.is_zero() {
            return Ok(other.clone());
        }
        if other.value.is_zero() {
            return Ok(self.clone());
        }
        if self.pi_exponent != other.pi_exponent {
            return Err(Error::PiExponentMismatch(self.pi_exponent, other.pi_exponent));
        }
        Ok(Self::new(&self.value + &other.value, self.pi_exponent))
    }

    pub fn to_complex(&self) -> num_complex::Complex64 {
        self.value.to_complex() * std::f64::consts::PI.powi(self.pi_exponent as i32)
    }
}

impl Mul<&PiScalar> for &PiScalar {
    type Output = PiScalar;
    fn mul(self, o: &PiScalar) -> PiScalar {
        PiScalar::new(&self.value * &o.value, self.pi_exponent + o.pi_exponent)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exponents() {
        let a = PiScalar::new(CyclotomicNumber::from_int(2), 3);
        let b = PiScalar::new(CyclotomicNumber::from_int(5), -1);
        let c = &a * &b;
        assert_eq!(c.pi_exponent, 2);
        assert_eq!(c.value, CyclotomicNumber::from_int(10));
        assert_eq!(a.try_add(&b), Err(Error::PiExponentMismatch(3, -1)));
        assert_eq!(a.try_add(&a).unwrap().value, CyclotomicNumber::from_int(4));
    }
}
