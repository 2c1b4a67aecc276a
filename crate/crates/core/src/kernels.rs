//! Reproducing kernels K_n (2j−k) and L_n (j−2k).
//!
//! K_n(x, y; r) = Σ_{j≤n} Q_j(x) P_j(y)/h_j and L_n(x, y; s) = Σ_{j≤n} S_j(x) R_j(y)/g_j
//! throughout; the first argument carries the second family.

use crate::determinants::MasterMatrix;
use crate::grid;
use crate::linalg::{self, CMatrix};
use crate::poly::Laurent;
use crate::polynomials::{integrate, integrate_scale, Systems};
use crate::{Error, Kind, Result, C64, ZERO};
use std::fmt;

/// Absolute window on the Christoffel–Darboux denominator.
pub const CD_DEGENERATE: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Method {
    Sum,
    MasterDet,
    Cd,
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Method::Sum => "sum",
            Method::MasterDet => "master",
            Method::Cd => "cd",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KernelEval {
    pub kind: Kind,
    pub n: usize,
    pub offset: i64,
    pub x: C64,
    pub y: C64,
    pub value: C64,
    pub method: Method,
}

/// The defining sum.
pub fn kernel_sum(sys: &Systems, kind: Kind, n: usize, offset: i64, x: C64, y: C64) -> Result<C64> {
    let s = sys.system(kind, offset, n)?;
    let mut acc = ZERO;
    for j in 0..=n {
        acc += s.second(j)?.eval(x) * s.first(j)?.eval(y) / s.norm(j)?;
    }
    Ok(acc)
}

/// From the bordered master determinant with border variable 1/x:
/// x^{-n} K_n(x, y) = −det(master of parameter n−1 at (1/x, y)) / D_{n+1}.
pub fn kernel_master(sys: &Systems, kind: Kind, n: usize, offset: i64, x: C64, y: C64) -> Result<C64> {
    if x == ZERO {
        return Err(Error::ZeroArgument);
    }
    let m = n as i64 - 1;
    let d = sys.det_nonzero(kind, n + 1, offset)?;
    // K_j for j ≤ n needs every norm up to n
    sys.system(kind, offset, n)?.norm(n)?;
    let (lo, hi) = crate::determinants::master_window(kind, offset, m.max(0));
    let table = sys.moments(lo.min(offset), hi.max(offset))?;
    let master = MasterMatrix::build(kind, offset, m, x.inv(), y, &table)?;
    Ok(-linalg::det(&master.entries) / d * x.powi(n as i32))
}

/// K_n(z2², z1; r) from the 3×3 determinant of P_n, P_{n+1}, P_{n+2} at offset r+2
/// (2j−k), or L_n(z2, z1²; s) from S at offset s−2 (j−2k).
pub fn kernel_cd(sys: &Systems, kind: Kind, n: usize, offset: i64, z1: C64, z2: C64) -> Result<C64> {
    let ni = n as i64;
    match kind {
        Kind::TwoJK => {
            let den = z1 * z1 - z2.powi(-2);
            if !den.norm().is_finite() || den.norm() < CD_DEGENERATE || z2 == ZERO {
                return Err(Error::DegenerateCdPoint);
            }
            let o = offset + 2;
            let rows = [-z2.inv(), z2.inv(), z1];
            let m = CMatrix::from_fn(3, 3, |i, j| sys.ep(n + j, o, rows[i]).unwrap_or(C64::new(f64::NAN, 0.0)));
            for j in 0..3 {
                sys.p(n + j, o)?;
            }
            let pre = sys.d(n, offset + 2)? / sys.det_nonzero(kind, n + 1, offset)? * 0.5;
            // K_n needs every norm through degree n
            sys.system(kind, offset, n)?.norm(n)?;
            Ok(pre * z2.powi(2 * ni as i32 + 1) / den * linalg::det(&m))
        }
        Kind::JTwoK => {
            let den = z1.powi(-2) - z2 * z2;
            if !den.norm().is_finite() || den.norm() < CD_DEGENERATE || z1 == ZERO {
                return Err(Error::DegenerateCdPoint);
            }
            let o = offset - 2;
            for j in 0..3 {
                sys.s(n + j, o)?;
            }
            let rows = [z1.inv(), -z1.inv(), z2];
            let m = CMatrix::from_fn(3, 3, |i, j| sys.es(n + j, o, rows[i]).unwrap_or(C64::new(f64::NAN, 0.0)));
            let pre = sys.e(n, offset - 2)? / sys.det_nonzero(kind, n + 1, offset)? * 0.5;
            sys.system(kind, offset, n)?.norm(n)?;
            Ok(pre * z1.powi(2 * ni as i32 + 1) / den * linalg::det(&m))
        }
    }
}

/// K_n(x, y) (or L_n) by the chosen method. For `Cd` the square root of x
/// (2j−k) or of y (j−2k) is taken on the principal branch; the result does
/// not depend on the branch.
pub fn kernel(sys: &Systems, method: Method, kind: Kind, n: usize, offset: i64, x: C64, y: C64) -> Result<KernelEval> {
    let value = match method {
        Method::Sum => kernel_sum(sys, kind, n, offset, x, y)?,
        Method::MasterDet => kernel_master(sys, kind, n, offset, x, y)?,
        Method::Cd => match kind {
            Kind::TwoJK => kernel_cd(sys, kind, n, offset, y, x.sqrt())?,
            Kind::JTwoK => kernel_cd(sys, kind, n, offset, y.sqrt(), x)?,
        },
    };
    Ok(KernelEval { kind, n, offset, x, y, value, method })
}

/// x ↦ Σ_j c_j f_j(ζ^power): a kernel with one argument fixed, as a Laurent polynomial in ζ.
fn kernel_slice(sys: &Systems, kind: Kind, n: usize, offset: i64, fixed: C64, fix_second: bool) -> Result<Laurent> {
    let s = sys.system(kind, offset, n)?;
    let mut acc = Laurent::new(0, vec![]);
    for j in 0..=n {
        let h = s.norm(j)?;
        let (c, p, pow) = if fix_second {
            (s.second(j)?.eval(fixed) / h, s.first(j)?, kind.first_power())
        } else {
            (s.first(j)?.eval(fixed) / h, s.second(j)?, kind.second_power())
        };
        acc = &acc + &p.substitute(pow).scale(c);
    }
    Ok(acc)
}

fn integral_residual(f: &Laurent, offset: i64, target: C64, sys: &Systems) -> Result<f64> {
    let t = sys.moments(offset - f.max_pow(), offset - f.min_pow)?;
    let v = integrate(f, offset, &t)?;
    let scale = integrate_scale(f, offset, &t)?.max(target.norm());
    Ok(if scale == 0.0 { 0.0 } else { (v - target).norm() / scale })
}

/// Reproducing residuals at degree ℓ: ∮ K_n(x, ζ) Q_ℓ(ζ^{-2}) − Q_ℓ(x) and
/// ∮ K_n(ζ^{-2}, y) P_ℓ(ζ) − P_ℓ(y); the targets are 0 for ℓ > n. L_n uses
/// S_ℓ(ζ^{-1}) and R_ℓ(ζ²).
pub fn reproducing_residuals(sys: &Systems, kind: Kind, n: usize, offset: i64, ell: usize, x: C64, y: C64) -> Result<[f64; 2]> {
    let s = sys.system(kind, offset, n.max(ell))?;
    let a = kernel_slice(sys, kind, n, offset, x, true)?;
    let b = kernel_slice(sys, kind, n, offset, y, false)?;
    let sec = s.second(ell)?;
    let fir = s.first(ell)?;
    let (ta, tb) = if ell <= n { (sec.eval(x), fir.eval(y)) } else { (ZERO, ZERO) };
    let ra = integral_residual(&(&a * &sec.substitute(kind.second_power())), offset, ta, sys)?;
    let rb = integral_residual(&(&b * &fir.substitute(kind.first_power())), offset, tb, sys)?;
    Ok([ra, rb])
}

/// ∮ K_n(ζ^{-2}, ζ) ζ^{-r} w dζ/(2πiζ) (L_n(ζ^{-1}, ζ²) for j−2k).
pub fn normalization(sys: &Systems, kind: Kind, n: usize, offset: i64) -> Result<C64> {
    let s = sys.system(kind, offset, n)?;
    let mut acc = ZERO;
    for j in 0..=n {
        let f = &s.first(j)?.substitute(kind.first_power()) * &s.second(j)?.substitute(kind.second_power());
        let t = sys.moments(offset - f.max_pow(), offset - f.min_pow)?;
        acc += integrate(&f, offset, &t)? / s.norm(j)?;
    }
    Ok(acc)
}

/// |∮ K_n(z1, ζ) K_n(ζ^{-2}, z2) − K_n(z1, z2)| normalized.
pub fn projection_residual(sys: &Systems, kind: Kind, n: usize, offset: i64, z1: C64, z2: C64) -> Result<f64> {
    let a = kernel_slice(sys, kind, n, offset, z1, true)?;
    let b = kernel_slice(sys, kind, n, offset, z2, false)?;
    let target = kernel_sum(sys, kind, n, offset, z1, z2)?;
    integral_residual(&(&a * &b), offset, target, sys)
}

/// L_n(z2, z1; s) against (z1 z2)^n K_n(1/z1, 1/z2; s−n).
pub fn cross_residual(sys: &Systems, n: usize, s: i64, z1: C64, z2: C64) -> Result<f64> {
    if z1 == ZERO || z2 == ZERO {
        return Err(Error::ZeroArgument);
    }
    let l = kernel_sum(sys, Kind::JTwoK, n, s, z2, z1)?;
    let k = kernel_sum(sys, Kind::TwoJK, n, s - n as i64, z1.inv(), z2.inv())? * (z1 * z2).powi(n as i32);
    Ok(grid::rel_diff(l, k))
}

/// Largest pairwise gap between the three evaluation methods at (x, y);
/// CD is skipped at its degenerate points.
pub fn method_agreement(sys: &Systems, kind: Kind, n: usize, offset: i64, x: C64, y: C64) -> Result<f64> {
    let a = kernel_sum(sys, kind, n, offset, x, y)?;
    let b = kernel_master(sys, kind, n, offset, x, y)?;
    let mut worst = grid::rel_diff(a, b);
    match kernel(sys, Method::Cd, kind, n, offset, x, y) {
        Ok(c) => worst = worst.max(grid::rel_diff(a, c.value)).max(grid::rel_diff(b, c.value)),
        Err(Error::DegenerateCdPoint) => {}
        Err(e) => return Err(e),
    }
    Ok(worst)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::c;
    use crate::weights::{FourierSeries, Weight};

    #[test]
    fn small_values() {
        let s = Systems::new(Weight::ExpLinear);
        let k0 = kernel_sum(&s, Kind::TwoJK, 0, 3, c(0.2, 0.1), c(0.5, 0.0)).unwrap();
        assert!((k0 - c(6.0, 0.0)).norm() < 1e-14);
        let k1 = kernel_sum(&s, Kind::TwoJK, 1, 0, c(0.3, 0.0), c(0.4, 0.0)).unwrap();
        assert!((k1 - c(0.92, 0.0)).norm() < 1e-14);
        let m0 = kernel_master(&s, Kind::TwoJK, 0, 3, c(0.2, 0.1), c(0.5, 0.0)).unwrap();
        assert!((m0 - k0).norm() < 1e-14);
        assert!(matches!(kernel_master(&s, Kind::TwoJK, 1, 0, ZERO, c(1.0, 0.0)), Err(Error::ZeroArgument)));
        let z2 = c(0.8, 0.3);
        assert!(matches!(kernel_cd(&s, Kind::TwoJK, 1, 0, z2.inv(), z2), Err(Error::DegenerateCdPoint)));
    }

    #[test]
    fn three_methods_agree() {
        let weights = [Weight::ExpLinear, Weight::FourierSeries(FourierSeries::random(5, -12, 16, 0.8))];
        for w in weights {
            let s = Systems::new(w);
            for n in 0..5 {
                for o in 0..4 {
                    for kind in [Kind::TwoJK, Kind::JTwoK] {
                        let o = if kind == Kind::JTwoK { o + 2 * n as i64 + 2 } else { o };
                        for &x in &grid::off_circle() {
                            for &y in &grid::off_circle()[..4] {
                                match method_agreement(&s, kind, n, o, x, y) {
                                    Ok(v) => assert!(v < 1e-9, "{kind} n={n} o={o}: {v}"),
                                    Err(Error::SingularDeterminant { .. }) => {}
                                    Err(e) => panic!("{e}"),
                                }
                            }
                        }
                    }
                }
            }
        }
    }

    #[test]
    fn reproducing_and_projection() {
        let s = Systems::new(Weight::FourierSeries(FourierSeries::random(9, -12, 16, 0.8)));
        for kind in [Kind::TwoJK, Kind::JTwoK] {
            for n in 0..4 {
                for ell in 0..=n + 1 {
                    let r = reproducing_residuals(&s, kind, n, 1, ell, c(0.4, 0.3), c(-1.2, 0.5)).unwrap();
                    assert!(r[0] < 1e-10 && r[1] < 1e-10, "{kind} n={n} l={ell}: {r:?}");
                }
                let v = normalization(&s, kind, n, 1).unwrap();
                assert!((v - c((n + 1) as f64, 0.0)).norm() < 1e-10);
                assert!(projection_residual(&s, kind, n, 1, c(0.4, 0.3), c(-1.2, 0.5)).unwrap() < 1e-9);
            }
        }
    }

    #[test]
    fn cross_identity_and_leading_term() {
        let s = Systems::new(Weight::FourierSeries(FourierSeries::random(2, -12, 16, 0.8)));
        for n in 0..5 {
            for z in grid::off_circle() {
                assert!(cross_residual(&s, n, 2, z, c(0.7, -0.4)).unwrap() < 1e-9);
            }
            // the gap to P_n decays like 1/|x| with a weight-dependent constant
            let y = c(0.3, 0.9);
            let gap = |x: C64| {
                let k = kernel_sum(&s, Kind::TwoJK, n, 1, x, y).unwrap() * s.h(n, 1).unwrap() / x.powi(n as i32);
                grid::rel_diff(k, s.ep(n, 1, y).unwrap())
            };
            let (g6, g7) = (gap(c(1e6, 0.0)), gap(c(1e7, 0.0)));
            assert!(g6 < 1e-4 && g7 <= 0.2 * g6 + 1e-12, "n={n}: {g6} {g7}");
        }
        let e = Systems::new(Weight::ExpLinear);
        for n in 0..5 {
            let (x, y) = (c(1e6, 0.0), c(0.3, 0.9));
            let k = kernel_sum(&e, Kind::TwoJK, n, 1, x, y).unwrap() * e.h(n, 1).unwrap() / x.powi(n as i32);
            assert!(grid::rel_diff(k, e.ep(n, 1, y).unwrap()) < 1e-6);
        }
    }
}
