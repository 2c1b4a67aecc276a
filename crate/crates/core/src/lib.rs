//! Bi-orthogonal polynomial systems on the unit circle with 2j−k and j−2k
//! moment structure: moments, structured determinants, the four monic
//! families and their norms, recurrences, reproducing kernels, associated
//! functions and a multiple-integral oracle.

pub mod associated;
pub mod determinants;
pub mod error;
pub mod expweight;
pub mod grid;
pub mod kernels;
pub mod linalg;
pub mod oracle;
pub mod poly;
pub mod polynomials;
pub mod recurrences;
pub mod special;
pub mod verify;
pub mod weights;

use std::fmt;

pub use num_complex::Complex64 as C64;

pub use determinants::{MasterMatrix, MinorSpec, StructuredMatrix};
pub use error::{Error, Result};
pub use poly::{ComplexPoly, Laurent};
pub use polynomials::{BiorthSystem, Systems};

pub use weights::{FourierSeries, MomentTable, QuadratureWeight, Weight};

/// Moment structure of a system: entries w_{offset+2j−k} or w_{offset+j−2k}.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Kind {
    TwoJK,
    JTwoK,
}

impl Kind {
    /// Moment index of entry (j, k).
    pub fn idx(self, offset: i64, j: i64, k: i64) -> i64 {
        match self {
            Kind::TwoJK => offset + 2 * j - k,
            Kind::JTwoK => offset + j - 2 * k,
        }
    }

    /// Power of ζ substituted into the first (P or R) and second (Q or S) family
    /// inside the pairing integral.
    pub fn first_power(self) -> i64 {
        match self {
            Kind::TwoJK => 1,
            Kind::JTwoK => 2,
        }
    }

    pub fn second_power(self) -> i64 {
        match self {
            Kind::TwoJK => -2,
            Kind::JTwoK => -1,
        }
    }
}

impl fmt::Display for Kind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Kind::TwoJK => "2j-k",
            Kind::JTwoK => "j-2k",
        })
    }
}

#[cfg(test)]
pub(crate) fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

pub(crate) const ZERO: C64 = C64::new(0.0, 0.0);
pub(crate) const ONE: C64 = C64::new(1.0, 0.0);
