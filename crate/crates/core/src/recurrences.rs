//! Recurrence coefficients and residuals of the recurrence relations.
//!
//! Every residual is |Σ terms| over the largest |term| (see `grid::residual`).
//! Functions return `SingularDeterminant` when an ingredient does not exist.

use crate::grid::{self, residual};
use crate::polynomials::{sign, Systems};
use crate::{Kind, Result, C64, ONE};
use std::fmt;

/// D_{n+1}/D_n requiring only D_n ≠ 0.
fn ratio(sys: &Systems, kind: Kind, n: usize, offset: i64) -> Result<C64> {
    let lo = sys.det_nonzero(kind, n, offset)?;
    Ok(sys.det(kind, n + 1, offset)? / lo)
}

/// δ_n^(r) = −h_n^(r−1)/h_n^(r)
pub fn delta(sys: &Systems, n: usize, r: i64) -> Result<C64> {
    Ok(-ratio(sys, Kind::TwoJK, n, r - 1)? / sys.h(n, r)?)
}

/// η_n^(r) = D_n^(r+2) D_{n+1}^(r−1) / (D_{n+1}^(r) D_n^(r+1))
pub fn eta(sys: &Systems, n: usize, r: i64) -> Result<C64> {
    let a = sys.d(n, r + 2)? / sys.det_nonzero(Kind::TwoJK, n, r + 1)?;
    Ok(a * (sys.d(n + 1, r - 1)? / sys.det_nonzero(Kind::TwoJK, n + 1, r)?))
}

/// β_n^(r) = −h_n^(r+2)/h_n^(r)
pub fn beta(sys: &Systems, n: usize, r: i64) -> Result<C64> {
    Ok(-ratio(sys, Kind::TwoJK, n, r + 2)? / sys.h(n, r)?)
}

/// α_n^(r) = D_n^(r−1) D_{n+1}^(r+2) / (D_{n+1}^(r) D_n^(r+1))
pub fn alpha(sys: &Systems, n: usize, r: i64) -> Result<C64> {
    let a = sys.d(n, r - 1)? / sys.det_nonzero(Kind::TwoJK, n, r + 1)?;
    Ok(a * (sys.d(n + 1, r + 2)? / sys.det_nonzero(Kind::TwoJK, n + 1, r)?))
}

/// κ_n^(s) = −g_n^(s−2)/g_n^(s)
pub fn kappa(sys: &Systems, n: usize, s: i64) -> Result<C64> {
    Ok(-ratio(sys, Kind::JTwoK, n, s - 2)? / sys.g(n, s)?)
}

/// ρ_n^(s) = E_n^(s+1) E_{n+1}^(s−2) / (E_{n+1}^(s) E_n^(s−1))
pub fn rho(sys: &Systems, n: usize, s: i64) -> Result<C64> {
    let a = sys.e(n, s + 1)? / sys.det_nonzero(Kind::JTwoK, n, s - 1)?;
    Ok(a * (sys.e(n + 1, s - 2)? / sys.det_nonzero(Kind::JTwoK, n + 1, s)?))
}

/// γ_n^(s) = −g_n^(s+1)/g_n^(s)
pub fn gamma(sys: &Systems, n: usize, s: i64) -> Result<C64> {
    Ok(-ratio(sys, Kind::JTwoK, n, s + 1)? / sys.g(n, s)?)
}

/// θ_n^(s) = E_n^(s−2) E_{n+1}^(s+1) / (E_{n+1}^(s) E_n^(s−1))
pub fn theta(sys: &Systems, n: usize, s: i64) -> Result<C64> {
    let a = sys.e(n, s - 2)? / sys.det_nonzero(Kind::JTwoK, n, s - 1)?;
    Ok(a * (sys.e(n + 1, s + 1)? / sys.det_nonzero(Kind::JTwoK, n + 1, s)?))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TwoJKCoeffs {
    pub delta: C64,
    pub eta: C64,
    pub beta: C64,
    pub alpha: C64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct JTwoKCoeffs {
    pub kappa: C64,
    pub rho: C64,
    pub gamma: C64,
    pub theta: C64,
}

/// All eight coefficients at one (n, offset); the j−2k ones use s = offset.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RecCoeffs {
    pub two_jk: TwoJKCoeffs,
    pub j_two_k: JTwoKCoeffs,
}

pub fn coeffs_2jk(sys: &Systems, n: usize, r: i64) -> Result<TwoJKCoeffs> {
    Ok(TwoJKCoeffs { delta: delta(sys, n, r)?, eta: eta(sys, n, r)?, beta: beta(sys, n, r)?, alpha: alpha(sys, n, r)? })
}

pub fn coeffs_j2k(sys: &Systems, n: usize, s: i64) -> Result<JTwoKCoeffs> {
    Ok(JTwoKCoeffs { kappa: kappa(sys, n, s)?, rho: rho(sys, n, s)?, gamma: gamma(sys, n, s)?, theta: theta(sys, n, s)? })
}

pub fn coeffs(sys: &Systems, n: usize, offset: i64) -> Result<RecCoeffs> {
    Ok(RecCoeffs { two_jk: coeffs_2jk(sys, n, offset)?, j_two_k: coeffs_j2k(sys, n, offset)? })
}

/// Residuals of δα = βη, β = −1/(δ^(r+1)δ^(r+2)) and α = −η/(δ^(r)δ^(r+1)δ^(r+2)).
pub fn interrelation_residuals_2jk(sys: &Systems, n: usize, r: i64) -> Result<[f64; 3]> {
    let c = coeffs_2jk(sys, n, r)?;
    let d1 = delta(sys, n, r + 1)?;
    let d2 = delta(sys, n, r + 2)?;
    Ok([
        grid::rel_diff(c.delta * c.alpha, c.beta * c.eta),
        grid::residual(&[c.beta * d1 * d2, ONE]),
        grid::residual(&[c.alpha * c.delta * d1 * d2, c.eta]),
    ])
}

/// Residuals of κθ = γρ, κ = −1/(γ^(s−1)γ^(s−2)) and ρ = −θ/(γ^(s)γ^(s−1)γ^(s−2)).
pub fn interrelation_residuals_j2k(sys: &Systems, n: usize, s: i64) -> Result<[f64; 3]> {
    let c = coeffs_j2k(sys, n, s)?;
    let g1 = gamma(sys, n, s - 1)?;
    let g2 = gamma(sys, n, s - 2)?;
    Ok([
        grid::rel_diff(c.kappa * c.theta, c.gamma * c.rho),
        grid::residual(&[c.kappa * g1 * g2, ONE]),
        grid::residual(&[c.rho * c.gamma * g1 * g2, c.theta]),
    ])
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Family {
    P,
    QStar,
    R,
    SStar,
}

impl Family {
    pub const ALL: [Family; 4] = [Family::P, Family::QStar, Family::R, Family::SStar];
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Family::P => "P",
            Family::QStar => "Q*",
            Family::R => "R",
            Family::SStar => "S*",
        })
    }
}

/// Terms of the third-order recurrence in the degree at fixed offset.
pub fn degree_terms(sys: &Systems, family: Family, n: usize, o: i64, z: C64) -> Result<Vec<C64>> {
    let z2 = z * z;
    Ok(match family {
        Family::P => {
            let a = delta(sys, n + 2, o)? + delta(sys, n + 1, o - 1)?;
            let b = delta(sys, n + 1, o - 1)? * delta(sys, n + 1, o)? - z2;
            let c = delta(sys, n, o)? + eta(sys, n, o - 2)?;
            vec![sys.ep(n + 3, o, z)?, -a * sys.ep(n + 2, o, z)?, b * sys.ep(n + 1, o, z)?, c * z2 * sys.ep(n, o, z)?]
        }
        Family::QStar => {
            let a = ONE + beta(sys, n + 2, o)? * z;
            let b = beta(sys, n + 1, o)? + alpha(sys, n + 1, o + 1)? + beta(sys, n + 1, o + 1)? + alpha(sys, n + 1, o + 2)?;
            let c = (beta(sys, n + 1, o + 1)? + alpha(sys, n + 1, o + 2)?) * (beta(sys, n, o)? + alpha(sys, n, o + 1)?);
            vec![sys.eqs(n + 3, o, z)?, -a * sys.eqs(n + 2, o, z)?, b * z * sys.eqs(n + 1, o, z)?, -c * z2 * sys.eqs(n, o, z)?]
        }
        Family::R => {
            let a = z + kappa(sys, n + 2, o)?;
            let b = kappa(sys, n + 1, o)? + rho(sys, n + 1, o - 1)? + rho(sys, n + 2, o)? + kappa(sys, n + 2, o)?;
            let c = (rho(sys, n + 2, o)? + kappa(sys, n + 2, o)?) * (kappa(sys, n, o)? + rho(sys, n, o - 1)?);
            vec![sys.er(n + 3, o, z)?, -a * sys.er(n + 2, o, z)?, b * z * sys.er(n + 1, o, z)?, -c * z * sys.er(n, o, z)?]
        }
        Family::SStar => {
            let g = gamma(sys, n + 1, o + 1)?;
            let a = gamma(sys, n + 2, o)? + g;
            let b = ONE - g * gamma(sys, n + 1, o)? * z2;
            let c = theta(sys, n + 1, o + 1)? + g;
            vec![sys.ess(n + 3, o, z)?, -a * z * sys.ess(n + 2, o, z)?, -b * sys.ess(n + 1, o, z)?, c * z * sys.ess(n, o, z)?]
        }
    })
}

pub fn degree_residual(sys: &Systems, family: Family, n: usize, offset: i64, z: C64) -> Result<f64> {
    Ok(residual(&degree_terms(sys, family, n, offset, z)?))
}

/// Terms of the third-order recurrence in the offset at fixed degree.
pub fn offset_terms(sys: &Systems, family: Family, n: usize, o: i64, z: C64) -> Result<Vec<C64>> {
    Ok(match family {
        Family::P => vec![
            eta(sys, n, o + 1)? * sys.ep(n, o + 3, z)?,
            -z * sys.ep(n, o + 2, z)?,
            delta(sys, n, o + 1)? * sys.ep(n, o + 1, z)?,
            z * sys.ep(n, o, z)?,
        ],
        Family::QStar => vec![
            sys.eqs(n, o + 3, z)?,
            -sys.eqs(n, o + 2, z)?,
            beta(sys, n, o + 1)? * z * sys.eqs(n, o + 1, z)?,
            alpha(sys, n, o + 1)? * z * sys.eqs(n, o, z)?,
        ],
        Family::R => vec![
            rho(sys, n, o + 2)? * sys.er(n, o + 3, z)?,
            kappa(sys, n, o + 2)? * sys.er(n, o + 2, z)?,
            -z * sys.er(n, o + 1, z)?,
            z * sys.er(n, o, z)?,
        ],
        Family::SStar => vec![
            sys.ess(n, o + 3, z)?,
            gamma(sys, n, o + 2)? * z * sys.ess(n, o + 2, z)?,
            -sys.ess(n, o + 1, z)?,
            theta(sys, n, o + 2)? * z * sys.ess(n, o, z)?,
        ],
    })
}

pub fn offset_residual(sys: &Systems, family: Family, n: usize, offset: i64, z: C64) -> Result<f64> {
    Ok(residual(&offset_terms(sys, family, n, offset, z)?))
}

/// Named residual; `Err` carries the reason it could not be evaluated.
pub type Named = (&'static str, Result<f64>);

/// The eight two-term relations between neighbouring degrees and offsets;
/// P, Q* at offset r and R, S* at offset s.
pub fn first_order_residuals(sys: &Systems, n: usize, r: i64, s: i64, z: C64) -> Vec<Named> {
    let f = |terms: Result<Vec<C64>>| terms.map(|t| residual(&t));
    vec![
        ("P: z P_n(r-1) + delta P_n(r)", f((|| Ok(vec![sys.ep(n + 1, r, z)?, -z * sys.ep(n, r - 1, z)?, -delta(sys, n, r)? * sys.ep(n, r, z)?]))())),
        ("P: z P_n(r+1) - eta P_n(r+2)", f((|| Ok(vec![sys.ep(n + 1, r, z)?, -z * sys.ep(n, r + 1, z)?, eta(sys, n, r)? * sys.ep(n, r + 2, z)?]))())),
        ("Q*: Q*_n(r+2) + beta z Q*_n(r)", f((|| Ok(vec![sys.eqs(n + 1, r, z)?, -sys.eqs(n, r + 2, z)?, -beta(sys, n, r)? * z * sys.eqs(n, r, z)?]))())),
        ("Q*: Q*_n(r+1) - alpha z Q*_n(r-1)", f((|| Ok(vec![sys.eqs(n + 1, r, z)?, -sys.eqs(n, r + 1, z)?, alpha(sys, n, r)? * z * sys.eqs(n, r - 1, z)?]))())),
        ("R: z R_n(s-2) + kappa R_n(s)", f((|| Ok(vec![sys.er(n + 1, s, z)?, -z * sys.er(n, s - 2, z)?, -kappa(sys, n, s)? * sys.er(n, s, z)?]))())),
        ("R: z R_n(s-1) - rho R_n(s+1)", f((|| Ok(vec![sys.er(n + 1, s, z)?, -z * sys.er(n, s - 1, z)?, rho(sys, n, s)? * sys.er(n, s + 1, z)?]))())),
        ("S*: S*_n(s+1) + gamma z S*_n(s)", f((|| Ok(vec![sys.ess(n + 1, s, z)?, -sys.ess(n, s + 1, z)?, -gamma(sys, n, s)? * z * sys.ess(n, s, z)?]))())),
        ("S*: S*_n(s-1) - theta z S*_n(s-2)", f((|| Ok(vec![sys.ess(n + 1, s, z)?, -sys.ess(n, s - 1, z)?, theta(sys, n, s)? * z * sys.ess(n, s - 2, z)?]))())),
    ]
}

/// (−1)^n E_n^(a)/D_n^(b)
fn ed(sys: &Systems, n: usize, a: i64, b: i64) -> Result<C64> {
    Ok(sys.e(n, a)? / sys.det_nonzero(Kind::TwoJK, n, b)? * sign(n))
}

/// (−1)^n D_n^(a)/E_n^(b)
fn de(sys: &Systems, n: usize, a: i64, b: i64) -> Result<C64> {
    Ok(sys.d(n, a)? / sys.det_nonzero(Kind::JTwoK, n, b)? * sign(n))
}

/// The sixteen identities mixing the two structures; P, Q* at offset r and
/// R, S* at offset s.
pub fn mixed_residuals(sys: &Systems, n: usize, r: i64, s: i64, z: C64) -> Vec<Named> {
    let ni = n as i64;
    let f = |terms: Result<Vec<C64>>| terms.map(|t| residual(&t));
    vec![
        ("P1", f((|| Ok(vec![sys.ep(n + 1, r, z)?, -ed(sys, n, r + ni - 3, r - 1)? * z * sys.ess(n, r + ni - 3, z)?, -delta(sys, n, r)? * sys.ep(n, r, z)?]))())),
        ("P2", f((|| Ok(vec![sys.ep(n + 1, r, z)?, -ed(sys, n, r + ni - 1, r + 1)? * z * sys.ess(n, r + ni - 1, z)?, eta(sys, n, r)? * sys.ep(n, r + 2, z)?]))())),
        ("P3", f((|| Ok(vec![sys.ep(n + 1, r, z)?, -z * sys.ep(n, r + 1, z)?, eta(sys, n, r)? * ed(sys, n, r + ni, r + 2)? * sys.ess(n, r + ni, z)?]))())),
        ("P4", f((|| Ok(vec![sys.ep(n + 1, r, z)?, -ed(sys, n, r + ni - 1, r + 1)? * z * sys.ess(n, r + ni - 1, z)?, eta(sys, n, r)? * ed(sys, n, r + ni, r + 2)? * sys.ess(n, r + ni, z)?]))())),
        ("Q*1", f((|| Ok(vec![sys.eqs(n + 1, r, z)?, -ed(sys, n, r + ni + 3, r + 2)? * sys.er(n, r + ni + 3, z)?, -beta(sys, n, r)? * z * sys.eqs(n, r, z)?]))())),
        ("Q*2", f((|| Ok(vec![sys.eqs(n + 1, r, z)?, -ed(sys, n, r + ni + 2, r + 1)? * sys.er(n, r + ni + 2, z)?, alpha(sys, n, r)? * z * sys.eqs(n, r - 1, z)?]))())),
        ("Q*3", f((|| Ok(vec![sys.eqs(n + 1, r, z)?, -sys.eqs(n, r + 1, z)?, alpha(sys, n, r)? * ed(sys, n, r + ni, r - 1)? * z * sys.er(n, r + ni, z)?]))())),
        ("Q*4", f((|| Ok(vec![sys.eqs(n + 1, r, z)?, -ed(sys, n, r + ni + 2, r + 1)? * sys.er(n, r + ni + 2, z)?, alpha(sys, n, r)? * ed(sys, n, r + ni, r - 1)? * z * sys.er(n, r + ni, z)?]))())),
        ("R1", f((|| Ok(vec![sys.er(n + 1, s, z)?, -de(sys, n, s - ni - 3, s - 2)? * z * sys.eqs(n, s - ni - 3, z)?, -kappa(sys, n, s)? * sys.er(n, s, z)?]))())),
        ("R2", f((|| Ok(vec![sys.er(n + 1, s, z)?, -de(sys, n, s - ni - 2, s - 1)? * z * sys.eqs(n, s - ni - 2, z)?, rho(sys, n, s)? * sys.er(n, s + 1, z)?]))())),
        ("R3", f((|| Ok(vec![sys.er(n + 1, s, z)?, -z * sys.er(n, s - 1, z)?, rho(sys, n, s)? * de(sys, n, s - ni, s + 1)? * sys.eqs(n, s - ni, z)?]))())),
        ("R4", f((|| Ok(vec![sys.er(n + 1, s, z)?, -de(sys, n, s - ni - 2, s - 1)? * z * sys.eqs(n, s - ni - 2, z)?, rho(sys, n, s)? * de(sys, n, s - ni, s + 1)? * sys.eqs(n, s - ni, z)?]))())),
        ("S*1", f((|| Ok(vec![sys.ess(n + 1, s, z)?, -de(sys, n, s - ni + 3, s + 1)? * sys.ep(n, s - ni + 3, z)?, -gamma(sys, n, s)? * z * sys.ess(n, s, z)?]))())),
        ("S*2", f((|| Ok(vec![sys.ess(n + 1, s, z)?, -de(sys, n, s - ni + 1, s - 1)? * sys.ep(n, s - ni + 1, z)?, theta(sys, n, s)? * z * sys.ess(n, s - 2, z)?]))())),
        ("S*3", f((|| Ok(vec![sys.ess(n + 1, s, z)?, -sys.ess(n, s - 1, z)?, theta(sys, n, s)? * de(sys, n, s - ni, s - 2)? * z * sys.ep(n, s - ni, z)?]))())),
        ("S*4", f((|| Ok(vec![sys.ess(n + 1, s, z)?, -de(sys, n, s - ni + 1, s - 1)? * sys.ep(n, s - ni + 1, z)?, theta(sys, n, s)? * de(sys, n, s - ni, s - 2)? * z * sys.ep(n, s - ni, z)?]))())),
    ]
}

/// Q_n(z²;r) against (D_n^(r+2)/D_n^(r)) (z^{2n+1}/2)
/// [P_{n+1}(1/z) P_n(−1/z) − P_{n+1}(−1/z) P_n(1/z)] at offset r+2; z ≠ 0.
pub fn bilinear_q_from_p(sys: &Systems, n: usize, r: i64, z: C64) -> Result<f64> {
    if z == C64::new(0.0, 0.0) {
        return Err(crate::Error::ZeroArgument);
    }
    let c = sys.d(n, r + 2)? / sys.det_nonzero(Kind::TwoJK, n, r)? * z.powi(2 * n as i32 + 1) * 0.5;
    let (u, v) = (z.inv(), -z.inv());
    let a = c * sys.ep(n + 1, r + 2, u)? * sys.ep(n, r + 2, v)?;
    let b = c * sys.ep(n + 1, r + 2, v)? * sys.ep(n, r + 2, u)?;
    Ok(residual(&[sys.eq(n, r, z * z)?, -a, b]))
}

/// R_n(z²;s) against (E_n^(s−2)/E_n^(s)) (z^{2n+1}/2)
/// [S_{n+1}(1/z) S_n(−1/z) − S_{n+1}(−1/z) S_n(1/z)] at offset s−2; z ≠ 0.
pub fn bilinear_r_from_s(sys: &Systems, n: usize, s: i64, z: C64) -> Result<f64> {
    if z == C64::new(0.0, 0.0) {
        return Err(crate::Error::ZeroArgument);
    }
    let c = sys.e(n, s - 2)? / sys.det_nonzero(Kind::JTwoK, n, s)? * z.powi(2 * n as i32 + 1) * 0.5;
    let (u, v) = (z.inv(), -z.inv());
    let a = c * sys.es(n + 1, s - 2, u)? * sys.es(n, s - 2, v)?;
    let b = c * sys.es(n + 1, s - 2, v)? * sys.es(n, s - 2, u)?;
    Ok(residual(&[sys.er(n, s, z * z)?, -a, b]))
}

/// D_n^(r) from the tails of P at offsets r, r+1, r+2 (E_n^(s) from S at
/// s, s−1, s−2 for j−2k).
pub fn reconstruct_det_from_tails(sys: &Systems, kind: Kind, n: usize, offset: i64) -> Result<C64> {
    let (t, a, b) = match kind {
        Kind::TwoJK => (1, 0, 2),
        Kind::JTwoK => (-1, 0, -2),
    };
    let tail = |deg: usize, o: i64| -> Result<C64> {
        match kind {
            Kind::TwoJK => Ok(sys.p(deg, o)?.coeff(0)),
            Kind::JTwoK => Ok(sys.s(deg, o)?.coeff(0)),
        }
    };
    let w = sys.moment(offset)?;
    let mut acc = w.powi(n as i32);
    for l in 0..n {
        let mut term = ONE / tail(l, offset + t)?;
        for nu in 1..=l {
            term *= tail(nu, offset + a)? / tail(nu, offset + b)? - ONE;
        }
        acc *= term;
    }
    Ok(acc)
}

/// Tail products: P_n(0;r) = ∏ δ_ℓ^(r), Q_n(0;r) = ∏ β_ℓ^(r) for 2j−k;
/// R_n(0;s) = ∏ κ_ℓ^(s), S_n(0;s) = ∏ γ_ℓ^(s) for j−2k. Returns the larger
/// of the two relative gaps.
pub fn tail_product_residual(sys: &Systems, kind: Kind, n: usize, offset: i64) -> Result<f64> {
    let (mut a, mut b) = (ONE, ONE);
    for l in 0..n {
        match kind {
            Kind::TwoJK => {
                a *= delta(sys, l, offset)?;
                b *= beta(sys, l, offset)?;
            }
            Kind::JTwoK => {
                a *= kappa(sys, l, offset)?;
                b *= gamma(sys, l, offset)?;
            }
        }
    }
    let f = sys.first(kind, n, offset)?.coeff(0);
    let g = sys.second(kind, n, offset)?.coeff(0);
    Ok(grid::rel_diff(f, a).max(grid::rel_diff(g, b)))
}

/// Constant-term relations of the pure-offset recurrences:
/// P_n(0;r+2) = −(δ/η) P_n(0;r), Q_n(0;r−1) = −(β/α) Q_n(0;r),
/// R_n(0;s+1) = −(κ/ρ) R_n(0;s), S_n(0;s−2) = −(γ/θ) S_n(0;s).
pub fn offset_tail_residuals(sys: &Systems, n: usize, offset: i64) -> Vec<Named> {
    let (o, zero) = (offset, C64::new(0.0, 0.0));
    vec![
        ("P tail", (|| Ok(residual(&[eta(sys, n, o)? * sys.ep(n, o + 2, zero)?, delta(sys, n, o)? * sys.ep(n, o, zero)?])))()),
        ("Q tail", (|| Ok(residual(&[alpha(sys, n, o)? * sys.eq(n, o - 1, zero)?, beta(sys, n, o)? * sys.eq(n, o, zero)?])))()),
        ("R tail", (|| Ok(residual(&[rho(sys, n, o)? * sys.er(n, o + 1, zero)?, kappa(sys, n, o)? * sys.er(n, o, zero)?])))()),
        ("S tail", (|| Ok(residual(&[theta(sys, n, o)? * sys.es(n, o - 2, zero)?, gamma(sys, n, o)? * sys.es(n, o, zero)?])))()),
    ]
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::weights::{FourierSeries, Weight};
    use crate::{c, Error};

    fn exp() -> Systems {
        Systems::new(Weight::ExpLinear)
    }

    fn random(seed: u64) -> Systems {
        Systems::new(Weight::FourierSeries(FourierSeries::random(seed, -12, 16, 0.8)))
    }

    fn close(a: C64, b: f64) -> bool {
        (a - c(b, 0.0)).norm() <= 1e-10 * b.abs().max(1.0)
    }

    #[test]
    fn exp_coefficients() {
        let s = exp();
        assert!(close(delta(&s, 2, 1).unwrap(), -5.0));
        assert!(close(eta(&s, 3, 0).unwrap(), 0.0));
        assert!(close(beta(&s, 0, 0).unwrap(), -0.5));
        assert!(close(alpha(&s, 1, 2).unwrap(), 1.0 / 60.0));
    }

    fn check_all(named: Vec<Named>, tol: f64) -> usize {
        let mut ok = 0;
        for (name, v) in named {
            match v {
                Ok(x) => {
                    assert!(x <= tol, "{name}: {x}");
                    ok += 1;
                }
                Err(Error::SingularDeterminant { .. }) => {}
                Err(e) => panic!("{name}: {e}"),
            }
        }
        ok
    }

    #[test]
    fn generic_identities_random_weights() {
        for seed in 0..4 {
            let s = random(seed);
            for n in 0..4 {
                for o in -1..3 {
                    for z in grid::with_origin() {
                        for fam in Family::ALL {
                            let d = degree_residual(&s, fam, n, o, z).unwrap();
                            assert!(d <= 1e-9, "degree {fam} n={n} o={o} z={z}: {d}");
                            let d = offset_residual(&s, fam, n, o, z).unwrap();
                            assert!(d <= 1e-9, "offset {fam} n={n} o={o} z={z}: {d}");
                        }
                        assert_eq!(check_all(first_order_residuals(&s, n, o, o, z), 1e-9), 8);
                        assert_eq!(check_all(mixed_residuals(&s, n, o, o, z), 1e-9), 16);
                    }
                }
            }
        }
    }

    #[test]
    fn exp_identities() {
        let s = exp();
        let z = c(0.7, 0.2);
        assert!(degree_residual(&s, Family::P, 1, 2, z).unwrap() < 1e-10);
        assert!(offset_residual(&s, Family::P, 2, 1, c(1.1, 0.0)).unwrap() < 1e-10);
        assert!(check_all(first_order_residuals(&s, 1, 1, 3, c(0.5, 0.0)), 1e-10) >= 4);
        assert!(check_all(mixed_residuals(&s, 1, 4, 6, z), 1e-10) >= 8);
        assert!(bilinear_q_from_p(&s, 1, 0, c(0.8, 0.0)).unwrap() < 1e-10);
        assert!(bilinear_q_from_p(&s, 2, 1, c(1.3, 0.1)).unwrap() < 1e-10);
        assert!(bilinear_q_from_p(&s, 0, 0, c(0.6, 0.3)).unwrap() < 1e-12);
    }

    #[test]
    fn interrelations_and_tails() {
        for s in [exp(), random(7)] {
            for n in 0..5 {
                for o in 1..4 {
                    for v in interrelation_residuals_2jk(&s, n, o).into_iter().flatten() {
                        assert!(v < 1e-10);
                    }
                    if let Ok(vs) = interrelation_residuals_j2k(&s, n, o + 3) {
                        assert!(vs.iter().all(|&v| v < 1e-10), "{vs:?}");
                    }
                    for kind in [Kind::TwoJK, Kind::JTwoK] {
                        if let Ok(v) = tail_product_residual(&s, kind, n, o + 2) {
                            assert!(v < 1e-10);
                        }
                    }
                    check_all(offset_tail_residuals(&s, n, o + 2), 1e-10);
                }
            }
        }
    }

    #[test]
    fn tails_rebuild_determinants() {
        let s = exp();
        assert!((reconstruct_det_from_tails(&s, Kind::TwoJK, 1, 2).unwrap() - s.moment(2).unwrap()).norm() < 1e-16);
        let d = reconstruct_det_from_tails(&s, Kind::TwoJK, 3, 0).unwrap();
        assert!(grid::rel_diff(d, s.d(3, 0).unwrap()) < 1e-9);
        let e = reconstruct_det_from_tails(&s, Kind::JTwoK, 2, 2).unwrap();
        assert!(grid::rel_diff(e, s.e(2, 2).unwrap()) < 1e-9);
        let r = random(3);
        for n in 0..7 {
            for kind in [Kind::TwoJK, Kind::JTwoK] {
                if let Ok(v) = reconstruct_det_from_tails(&r, kind, n, 1) {
                    assert!(grid::rel_diff(v, r.det(kind, n, 1).unwrap()) < 1e-9);
                }
            }
        }
    }

    #[test]
    fn bilinear_random() {
        let s = random(11);
        for n in 0..5 {
            for z in grid::off_circle() {
                assert!(bilinear_q_from_p(&s, n, 1, z).unwrap() < 1e-9);
                assert!(bilinear_r_from_s(&s, n, 1, z).unwrap() < 1e-9);
            }
        }
    }
}
