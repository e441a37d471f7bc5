//! Fourier expansions of Siegel Eisenstein series of level N with nebentypus, their nearly
//! holomorphic specializations and the p-integrality checks around them.

pub mod error;
pub mod characters;
pub mod cli;
pub mod eisenstein;
pub mod exactnum;
pub mod nearholo;
pub mod pullback;
pub mod quadforms;
pub mod siegelseries;

pub use error::{Error, Result};
