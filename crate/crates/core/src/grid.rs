//! Evaluation grid and residual normalization shared by the checks.

use crate::C64;

pub const GRID_MODULI: [f64; 2] = [0.5, 1.5];
pub const GRID_PHASES: [f64; 4] = [0.3, 1.9, 3.5, 5.1];

/// Eight points off the unit circle: moduli 0.5 and 1.5 at four phases.
pub fn off_circle() -> Vec<C64> {
    GRID_MODULI
        .iter()
        .flat_map(|&m| GRID_PHASES.iter().map(move |&t| C64::from_polar(m, t)))
        .collect()
}

/// The eight off-circle points followed by the origin.
pub fn with_origin() -> Vec<C64> {
    let mut g = off_circle();
    g.push(C64::new(0.0, 0.0));
    g
}

/// |Σ terms| divided by the largest |term|; 0 when every term vanishes.
pub fn residual(terms: &[C64]) -> f64 {
    let scale = terms.iter().map(|t| t.norm()).fold(0.0, f64::max);
    let sum: C64 = terms.iter().sum();
    if scale == 0.0 {
        0.0
    } else {
        sum.norm() / scale
    }
}

/// |a − b| / max(|a|, |b|), 0 when both vanish.
pub fn rel_diff(a: C64, b: C64) -> f64 {
    residual(&[a, -b])
}
