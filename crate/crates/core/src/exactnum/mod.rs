//! Exact scalars: rationals, cyclotomic numbers, π-tagged scalars and polynomials.

pub mod cyclotomic;
pub mod pi;
pub mod poly;
pub mod rational;

pub use cyclotomic::{CyclotomicNumber, Valuation};
pub use pi::PiScalar;
pub use poly::UniPoly;
pub use rational::Rational;

use crate::error::Result;

pub fn cyclo_embed(x: &CyclotomicNumber, target: u64) -> Result<CyclotomicNumber> {
    x.embed(target)
}

pub fn p_valuation(x: &CyclotomicNumber, p: u64) -> Result<Valuation> {
    x.p_valuation(p)
}

pub fn poly_div_exact(num: &UniPoly, den: &UniPoly) -> Result<UniPoly> {
    num.div_exact(den)
}
