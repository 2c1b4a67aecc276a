//! Closed forms for w(ζ) = e^ζ at non-negative offsets.

use crate::associated::{region, Region};
use crate::grid::residual;
use crate::poly::ComplexPoly;
use crate::special::{binomial, factorial, hyp_pfq, poch};
use crate::{Result, C64, ONE, ZERO};
use statrs::function::gamma::ln_gamma;
use std::fmt;

/// D_n^(r) = 2^{n(n−1)/2} ∏_{j=1}^{n−1} Γ(1+j) / ∏_{j=0}^{n−1} Γ(1+r+2j), summed in logs.
pub fn det_closed(n: usize, r: u32) -> f64 {
    let r = r as f64;
    let mut l = (n * n.saturating_sub(1)) as f64 / 2.0 * std::f64::consts::LN_2;
    for j in 1..n {
        l += ln_gamma(1.0 + j as f64);
    }
    for j in 0..n {
        l -= ln_gamma(1.0 + r + 2.0 * j as f64);
    }
    l.exp()
}

/// h_n^(r) = 2^n n!/(2n+r)!
pub fn norm_closed(n: usize, r: u32) -> f64 {
    2f64.powi(n as i32) * factorial(n as u64) / factorial(2 * n as u64 + r as u64)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Coef {
    Delta,
    Eta,
    Beta,
    Alpha,
}

impl Coef {
    pub const ALL: [Coef; 4] = [Coef::Delta, Coef::Eta, Coef::Beta, Coef::Alpha];
}

impl fmt::Display for Coef {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Coef::Delta => "delta",
            Coef::Eta => "eta",
            Coef::Beta => "beta",
            Coef::Alpha => "alpha",
        })
    }
}

/// δ = −2n−r, η = r, β = −1/((2n+r+1)(2n+r+2)), α = r/((2n+r)(2n+r+1)(2n+r+2)).
/// At n = r = 0 the α formula is 0/0; D_0 = 1 gives α_0^(r) = 1/((r+1)(r+2)),
/// its limit.
pub fn reccoeff_closed(which: Coef, n: usize, r: u32) -> f64 {
    let m = 2.0 * n as f64 + r as f64;
    let r = r as f64;
    match which {
        Coef::Delta => -m,
        Coef::Eta => r,
        Coef::Beta => -1.0 / ((m + 1.0) * (m + 2.0)),
        Coef::Alpha => {
            if n == 0 {
                1.0 / ((r + 1.0) * (r + 2.0))
            } else if r == 0.0 {
                0.0
            } else {
                r / (m * (m + 1.0) * (m + 2.0))
            }
        }
    }
}

/// Q_n(z;r) = (−1)^n / (4^n ((r+1)/2)_n ((r+2)/2)_n) · ₃F₀(−n, (r+1)/2, (r+2)/2;; 4z).
pub fn q_closed(n: usize, r: u32, z: C64) -> C64 {
    let a = (r as f64 + 1.0) / 2.0;
    let b = (r as f64 + 2.0) / 2.0;
    let f = hyp_pfq(&[-(n as f64), a, b], &[], z * 4.0, 0.0, n + 1).expect("terminating series");
    let pre = if n.is_multiple_of(2) { 1.0 } else { -1.0 } / (4f64.powi(n as i32) * poch(a, n) * poch(b, n));
    f * pre
}

/// Coefficient of z^ℓ in Q_n(z;r):
/// (−1)^n 4^{ℓ−n} (−n)_ℓ ((r+1)/2)_ℓ ((r+2)/2)_ℓ / (ℓ! ((r+1)/2)_n ((r+2)/2)_n).
pub fn q_coeff_closed(n: usize, ell: usize, r: u32) -> f64 {
    if ell > n {
        return 0.0;
    }
    let a = (r as f64 + 1.0) / 2.0;
    let b = (r as f64 + 2.0) / 2.0;
    let sign = if n.is_multiple_of(2) { 1.0 } else { -1.0 };
    sign * 4f64.powi(ell as i32 - n as i32) * poch(-(n as f64), ell) * poch(a, ell) * poch(b, ell)
        / (factorial(ell as u64) * poch(a, n) * poch(b, n))
}

pub fn q_poly_closed(n: usize, r: u32) -> ComplexPoly {
    ComplexPoly::new((0..=n).map(|l| C64::new(q_coeff_closed(n, l, r), 0.0)).collect())
}

/// 𝓅_{n,ℓ} = (2^n/ℓ!) Σ_m (−1)^{n+ℓ+m} C(ℓ,m) ((r−m)/2)_n. Takes any integer r
/// so that the shifted coefficients 𝓅^(r−2) are available.
pub fn p_coeff_closed(n: usize, ell: usize, r: i64) -> f64 {
    if ell > n {
        return 0.0;
    }
    let mut acc = 0.0;
    for m in 0..=ell {
        let sign = if (n + ell + m).is_multiple_of(2) { 1.0 } else { -1.0 };
        acc += sign * binomial(ell as u64, m as u64) * poch((r - m as i64) as f64 / 2.0, n);
    }
    acc * 2f64.powi(n as i32) / factorial(ell as u64)
}

/// 𝓅_{n,ℓ} = (2^n/ℓ!) (−1)^{n+ℓ} ∇_r^ℓ (r/2)_n, with ∇ applied as ℓ rounds of
/// backward differences of the table t ↦ (t/2)_n on t = r−ℓ..r.
pub fn p_coeff_nabla(n: usize, ell: usize, r: i64) -> f64 {
    if ell > n {
        return 0.0;
    }
    // vals[i] = f(r − ℓ + i)
    let mut vals: Vec<f64> = (0..=ell).map(|i| poch((r - ell as i64 + i as i64) as f64 / 2.0, n)).collect();
    for _ in 0..ell {
        vals = vals.windows(2).map(|w| w[1] - w[0]).collect();
    }
    let sign = if (n + ell).is_multiple_of(2) { 1.0 } else { -1.0 };
    sign * vals[0] * 2f64.powi(n as i32) / factorial(ell as u64)
}

pub fn p_poly_closed(n: usize, r: u32) -> ComplexPoly {
    ComplexPoly::new((0..=n).map(|l| C64::new(p_coeff_closed(n, l, r as i64), 0.0)).collect())
}

/// Residuals of the coefficient recurrence read off z^{ℓ+2}:
/// 𝓅_{n+1,ℓ} + (2n+2)𝓅_{n,ℓ} = 𝓅_{n+3,ℓ+2} + (4n+2r+5)𝓅_{n+2,ℓ+2} + (2n+r+1)(2n+r+2)𝓅_{n+1,ℓ+2},
/// and of each side against 𝓅^(r−2)_{n+1,ℓ}. Returns [lhs vs rhs, lhs vs reduced, rhs vs reduced].
pub fn p_coeff_recurrence(n: usize, ell: usize, r: i64) -> [f64; 3] {
    let p = |n, l| C64::new(p_coeff_closed(n, l, r), 0.0);
    let nf = n as f64;
    let rf = r as f64;
    let lhs = p(n + 1, ell) + p(n, ell) * (2.0 * nf + 2.0);
    let rhs = p(n + 3, ell + 2)
        + p(n + 2, ell + 2) * (4.0 * nf + 2.0 * rf + 5.0)
        + p(n + 1, ell + 2) * ((2.0 * nf + rf + 1.0) * (2.0 * nf + rf + 2.0));
    let red = C64::new(p_coeff_closed(n + 1, ell, r - 2), 0.0);
    [residual(&[lhs, -rhs]), residual(&[lhs, -red]), residual(&[rhs, -red])]
}

/// F₂(z;r) for e^ζ: 2z^{-r}[e^z − Σ_{m<r} z^m/m!] − 1/r! inside the circle
/// (1/r! at z = 0), −2z^{-r} Σ_{m<r} z^m/m! − 1/r! outside.
pub fn f2_closed(r: u32, z: C64) -> Result<C64> {
    let reg = region(z)?;
    let inv_r = 1.0 / factorial(r as u64);
    if z == ZERO {
        return Ok(C64::new(inv_r, 0.0));
    }
    let mut partial = ZERO;
    let mut t = ONE;
    for m in 0..r {
        partial += t;
        t *= z / (m as f64 + 1.0);
    }
    let zr = z.powi(-(r as i32));
    Ok(match reg {
        Region::Inside => zr * (z.exp() - partial) * 2.0 - inv_r,
        Region::Outside => -zr * partial * 2.0 - inv_r,
    })
}

/// Terms of the pure-degree P recurrence for e^ζ:
/// P_{n+3} + (4n+2r+5)P_{n+2} + ((2n+r+1)(2n+r+2) − z²)P_{n+1} − (2n+2)z²P_n.
pub fn p_degree_terms(p: &dyn Fn(usize) -> C64, n: usize, r: u32, z: C64) -> [C64; 4] {
    let (nf, rf) = (n as f64, r as f64);
    let z2 = z * z;
    [
        p(n + 3),
        p(n + 2) * (4.0 * nf + 2.0 * rf + 5.0),
        p(n + 1) * (C64::new((2.0 * nf + rf + 1.0) * (2.0 * nf + rf + 2.0), 0.0) - z2),
        -p(n) * z2 * (2.0 * nf + 2.0),
    ]
}

/// Terms of the pure-degree Q* recurrence for e^ζ, a_k = 2n+r+k:
/// Q*_{n+3} − (1 − z/(a_5 a_6))Q*_{n+2} − (2n+4)(4n+2r+9) z/(a_3 a_4 a_5 a_6) Q*_{n+1}
/// − 4(n+1)(n+2) z²/(a_1⋯a_6) Q*_n.
pub fn qstar_degree_terms(q: &dyn Fn(usize) -> C64, n: usize, r: u32, z: C64) -> [C64; 4] {
    let nf = n as f64;
    let a = |k: f64| 2.0 * nf + r as f64 + k;
    [
        q(n + 3),
        -q(n + 2) * (ONE - z / (a(5.0) * a(6.0))),
        -q(n + 1) * z * ((2.0 * nf + 4.0) * (4.0 * nf + 2.0 * r as f64 + 9.0) / (a(3.0) * a(4.0) * a(5.0) * a(6.0))),
        -q(n) * z * z * (4.0 * (nf + 1.0) * (nf + 2.0) / (a(1.0) * a(2.0) * a(3.0) * a(4.0) * a(5.0) * a(6.0))),
    ]
}

/// Terms of (r+1)P_n(r+3) − zP_n(r+2) − (2n+r+1)P_n(r+1) + zP_n(r); `p(k)` = P_n(z; r+k).
pub fn p_offset_terms(p: &dyn Fn(u32) -> C64, n: usize, r: u32, z: C64) -> [C64; 4] {
    let rf = r as f64;
    [p(3) * (rf + 1.0), -z * p(2), -p(1) * (2.0 * n as f64 + rf + 1.0), z * p(0)]
}

/// Terms of Q*_n(r+3) − Q*_n(r+2) − z/((2n+r+2)(2n+r+3)) Q*_n(r+1)
/// + (r+1)z/((2n+r+1)(2n+r+2)(2n+r+3)) Q*_n(r); `q(k)` = Q*_n(z; r+k).
pub fn qstar_offset_terms(q: &dyn Fn(u32) -> C64, n: usize, r: u32, z: C64) -> [C64; 4] {
    let a = |k: f64| 2.0 * n as f64 + r as f64 + k;
    [
        q(3),
        -q(2),
        -q(1) * z / (a(2.0) * a(3.0)),
        q(0) * z * ((r as f64 + 1.0) / (a(1.0) * a(2.0) * a(3.0))),
    ]
}

/// Quantities with a closed form.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Quantity {
    Det,
    Norm,
    Coef(Coef),
    QPoly,
    PCoeff,
    F2,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ClosedForm {
    pub quantity: Quantity,
    pub n: usize,
    pub r: u32,
    pub ell: usize,
    pub z: C64,
    pub value: C64,
}

/// Evaluates one closed form; `ell` is used by PCoeff, `z` by QPoly and F2.
pub fn closed_form(quantity: Quantity, n: usize, r: u32, ell: usize, z: C64) -> Result<ClosedForm> {
    let re = |x: f64| C64::new(x, 0.0);
    let value = match quantity {
        Quantity::Det => re(det_closed(n, r)),
        Quantity::Norm => re(norm_closed(n, r)),
        Quantity::Coef(c) => re(reccoeff_closed(c, n, r)),
        Quantity::QPoly => q_closed(n, r, z),
        Quantity::PCoeff => re(p_coeff_closed(n, ell, r as i64)),
        Quantity::F2 => f2_closed(r, z)?,
    };
    Ok(ClosedForm { quantity, n, r, ell, z, value })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::c;
    use crate::grid;

    #[test]
    fn examples() {
        assert!((det_closed(2, 0) - 1.0).abs() < 1e-14);
        assert_eq!(det_closed(0, 3), 1.0);
        assert!((det_closed(3, 1) - 1.0 / 45.0).abs() < 1e-15);
        assert!((norm_closed(2, 0) - 1.0 / 3.0).abs() < 1e-16);
        assert!((norm_closed(1, 2) - 1.0 / 12.0).abs() < 1e-16);
        assert_eq!(norm_closed(0, 3), 1.0 / 6.0);
        assert_eq!(reccoeff_closed(Coef::Delta, 2, 1), -5.0);
        assert_eq!(reccoeff_closed(Coef::Eta, 4, 0), 0.0);
        assert!((reccoeff_closed(Coef::Alpha, 1, 2) - 1.0 / 60.0).abs() < 1e-17);
    }

    #[test]
    fn q_small() {
        let z = c(0.7, -0.2);
        assert!((q_closed(1, 0, z) - (z - 0.5)).norm() < 1e-15);
        assert_eq!(q_closed(0, 3, z), ONE);
        let p = q_poly_closed(3, 2);
        assert!((p.eval(z) - q_closed(3, 2, z)).norm() < 1e-14);
        assert!(p.is_monic(1e-15));
    }

    #[test]
    fn p_coefficients() {
        for r in 0..5i64 {
            for n in 0..8 {
                let sign = if n % 2 == 0 { 1.0 } else { -1.0 };
                let p0 = sign * 2f64.powi(n as i32) * poch(r as f64 / 2.0, n);
                assert!((p_coeff_closed(n, 0, r) - p0).abs() <= 1e-12 * p0.abs().max(1.0));
                let p1 = sign * 2f64.powi(n as i32) * (poch((r as f64 - 1.0) / 2.0, n) - poch(r as f64 / 2.0, n));
                if n >= 1 {
                    assert!((p_coeff_closed(n, 1, r) - p1).abs() <= 1e-12 * p1.abs().max(1.0));
                }
                assert_eq!(p_coeff_closed(n, n, r), 1.0);
                for l in 0..=n {
                    let a = p_coeff_closed(n, l, r);
                    assert!((a - p_coeff_nabla(n, l, r)).abs() <= 1e-13 * a.abs().max(1.0));
                }
            }
        }
    }

    #[test]
    fn coefficient_recurrence() {
        for r in 0..5i64 {
            for n in 0..=6 {
                for l in 0..=n + 1 {
                    let res = p_coeff_recurrence(n, l, r);
                    assert!(res.iter().all(|&x| x < 1e-12), "n={n} l={l} r={r}: {res:?}");
                }
            }
        }
    }

    #[test]
    fn f2_branches() {
        assert_eq!(f2_closed(0, c(2.0, 1.0)).unwrap(), -ONE);
        let z = c(0.3, 0.4);
        assert!((f2_closed(1, z).unwrap() - ((z.exp() - ONE) * 2.0 / z - ONE)).norm() < 1e-15);
    }

    #[test]
    fn exp_recurrences_on_closed_forms() {
        for z in grid::with_origin() {
            for r in 0..4u32 {
                for n in 0..4 {
                    let p = |k| p_poly_closed(k, r).eval(z);
                    assert!(residual(&p_degree_terms(&p, n, r, z)) < 1e-12);
                    let q = |k| q_poly_closed(k, r).eval_reciprocal(z);
                    assert!(residual(&qstar_degree_terms(&q, n, r, z)) < 1e-12);
                    let po = |k| p_poly_closed(n, r + k).eval(z);
                    assert!(residual(&p_offset_terms(&po, n, r, z)) < 1e-12);
                    let qo = |k| q_poly_closed(n, r + k).eval_reciprocal(z);
                    assert!(residual(&qstar_offset_terms(&qo, n, r, z)) < 1e-12);
                }
            }
        }
    }
}
