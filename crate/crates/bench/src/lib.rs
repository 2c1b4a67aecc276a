//! Shared inputs for the benchmarks.

use biocirc::{FourierSeries, Systems, Weight, C64};

pub fn exp() -> Systems {
    Systems::new(Weight::ExpLinear)
}

pub fn random(seed: u64) -> Systems {
    Systems::new(Weight::FourierSeries(FourierSeries::random(seed, -12, 16, 0.8)))
}

pub fn points() -> [C64; 2] {
    [C64::from_polar(0.6, 0.4), C64::from_polar(1.4, 2.3)]
}
