//! Carathéodory functions, associated functions, the third-order difference
//! operators and their Casorati matrices.

use crate::grid::{self, residual};
use crate::linalg::{self, CMatrix};
use crate::poly::ComplexPoly;
use crate::polynomials::Systems;
use crate::recurrences::{alpha, beta, delta, eta, gamma, kappa, rho, theta};
use crate::special::Kahan;
use crate::{Error, Result, Weight, C64, ONE, ZERO};
use std::f64::consts::PI;
use std::fmt;

/// Half-width of the excluded annulus around |z| = 1.
pub const ANNULUS_EPS: f64 = 1e-3;
pub const SERIES_REL_TOL: f64 = 1e-16;
pub const SERIES_MAX_TERMS: usize = 10_000;
/// Moments fetched per block while summing an infinite series.
const BLOCK: i64 = 64;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Carath {
    F1,
    F2,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Region {
    Inside,
    Outside,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CaratheodoryEval {
    pub which: Carath,
    pub offset: i64,
    pub z: C64,
    pub region: Region,
    pub value: C64,
}

pub fn region(z: C64) -> Result<Region> {
    let m = z.norm();
    if m <= 1.0 - ANNULUS_EPS {
        Ok(Region::Inside)
    } else if m >= 1.0 + ANNULUS_EPS {
        Ok(Region::Outside)
    } else {
        Err(Error::AnnulusExcluded { modulus: m })
    }
}

/// F₂(z;r) = ∮ w ζ^{-r} (ζ+z)/(ζ−z): w_r + 2Σ_{m≥1} w_{r+m} z^m inside the
/// circle, −w_r − 2Σ_{m≥1} w_{r−m} z^{-m} outside.
pub fn f2(sys: &Systems, offset: i64, z: C64) -> Result<C64> {
    let reg = region(z)?;
    let (step, x) = match reg {
        Region::Inside => (1, z),
        Region::Outside => (-1, z.inv()),
    };
    let sign = if reg == Region::Inside { 1.0 } else { -1.0 };
    let w0 = sys.moment(offset)?;
    let mut acc = Kahan::default();
    acc.add(w0);
    // Finite band: the sum is a polynomial in x.
    let last = sys.weight().band().map(|(lo, hi)| if step > 0 { hi - offset } else { offset - lo });
    let mut scale = w0.norm();
    let mut quiet = 0;
    let mut xm = ONE;
    let mut table = sys.moments(offset.min(offset + step * BLOCK), offset.max(offset + step * BLOCK))?;
    for m in 1..=SERIES_MAX_TERMS as i64 {
        if let Some(l) = last {
            if m > l {
                return Ok(acc.value() * sign);
            }
        }
        let k = offset + step * m;
        if !table.covers(k, k) {
            let far = k + step * BLOCK * (1 + m / BLOCK);
            table = sys.moments(k.min(far), k.max(far))?;
        }
        xm *= x;
        let term = table.get(k)? * xm * 2.0;
        acc.add(term);
        scale = scale.max(term.norm());
        if last.is_none() {
            if term.norm() <= SERIES_REL_TOL * scale.max(acc.value().norm()) {
                quiet += 1;
                if quiet >= 3 {
                    return Ok(acc.value() * sign);
                }
            } else {
                quiet = 0;
            }
        }
    }
    Err(Error::SeriesNotConverged { what: "Caratheodory series", terms: SERIES_MAX_TERMS })
}

/// F₁(z;r) = ½(F₂(z;r) + F₂(−z;r)), the transform with kernel (ζ²+z²)/(ζ²−z²).
pub fn f1(sys: &Systems, offset: i64, z: C64) -> Result<C64> {
    Ok((f2(sys, offset, z)? + f2(sys, offset, -z)?) * 0.5)
}

pub fn caratheodory(sys: &Systems, which: Carath, offset: i64, z: C64) -> Result<CaratheodoryEval> {
    let value = match which {
        Carath::F1 => f1(sys, offset, z)?,
        Carath::F2 => f2(sys, offset, z)?,
    };
    Ok(CaratheodoryEval { which, offset, z, region: region(z)?, value })
}

/// F₂ by the M-point trapezoid rule applied to the defining integral.
pub fn f2_quadrature(w: &Weight, offset: i64, z: C64, points: usize) -> C64 {
    let mut acc = Kahan::default();
    for j in 0..points {
        let zeta = C64::from_polar(1.0, 2.0 * PI * j as f64 / points as f64);
        acc.add(w.eval(zeta) * zeta.powi(-offset as i32) * (zeta + z) / (zeta - z));
    }
    acc.value() / points as f64
}

/// The associated functions: P̂, Q̂, R̂, Ŝ and the un-symmetrized P†, S†.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Hat {
    P,
    Q,
    R,
    S,
    PDagger,
    SDagger,
}

impl Hat {
    pub const PRIMARY: [Hat; 4] = [Hat::P, Hat::Q, Hat::R, Hat::S];

    pub fn parse(s: &str) -> Option<Hat> {
        Some(match s {
            "P" | "p" => Hat::P,
            "Q" | "q" => Hat::Q,
            "R" | "r" => Hat::R,
            "S" | "s" => Hat::S,
            "Pdagger" | "P+" | "pdagger" => Hat::PDagger,
            "Sdagger" | "S+" | "sdagger" => Hat::SDagger,
            _ => return None,
        })
    }
}

impl fmt::Display for Hat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Hat::P => "P",
            Hat::Q => "Q",
            Hat::R => "R",
            Hat::S => "S",
            Hat::PDagger => "Pdagger",
            Hat::SDagger => "Sdagger",
        })
    }
}

/// Polynomial of the family and the ζ-power its variable is replaced by
/// inside the associated integral.
fn family_poly(sys: &Systems, which: Hat, n: usize, offset: i64) -> Result<(ComplexPoly, i64)> {
    Ok(match which {
        Hat::P | Hat::PDagger => (sys.p(n, offset)?, 1),
        Hat::Q => (sys.q(n, offset)?, -2),
        Hat::R => (sys.r(n, offset)?, 2),
        Hat::S | Hat::SDagger => (sys.s(n, offset)?, -1),
    })
}

/// Σ_j c_j ∮ w ζ^{-offset} ζ^{pow·j} K(ζ, z), with the kernel of F₁ for P̂, Ŝ
/// and of F₂ otherwise.
///
/// Summed as one series in x = z (inside) or 1/z (outside) with coefficients
/// μ_m = Σ_j c_j w_{offset−pow·j±m}. Summing c_j F(z; offset−pow·j) instead
/// loses nearly every digit: the result is O(|x|^{2n}) while the terms are
/// O(|c_j|). The μ_m that bi-orthogonality makes vanish are skipped, since
/// their rounding noise would dominate.
pub fn hat(sys: &Systems, which: Hat, n: usize, offset: i64, z: C64) -> Result<C64> {
    let reg = region(z)?;
    let (poly, pow) = family_poly(sys, which, n, offset)?;
    let even_only = matches!(which, Hat::P | Hat::S);
    let (step, x, sign) = match reg {
        Region::Inside => (1i64, z, 1.0),
        Region::Outside => (-1i64, z.inv(), -1.0),
    };
    let idx: Vec<(C64, i64)> = poly
        .coeffs
        .iter()
        .enumerate()
        .filter(|(_, c)| **c != ZERO)
        .map(|(j, &c)| (c, offset - pow * j as i64))
        .collect();
    let (kmin, kmax) = idx.iter().fold((i64::MAX, i64::MIN), |(a, b), &(_, k)| (a.min(k), b.max(k)));
    // last m with any moment inside the band
    let last = sys.weight().band().map(|(lo, hi)| if step > 0 { hi - kmin } else { kmax - lo });
    let vanishes = |m: usize| -> bool {
        n >= 1
            && match (which, reg) {
                (Hat::P | Hat::PDagger, Region::Inside) => m.is_multiple_of(2) && m < 2 * n,
                (Hat::Q, Region::Outside) | (Hat::R, Region::Inside) => m < n,
                (Hat::S | Hat::SDagger, Region::Outside) => m.is_multiple_of(2) && m < 2 * n,
                _ => m == 0,
            }
    };
    let window = |m: i64| {
        let a = kmin + step * m;
        let b = kmax + step * m;
        let far = step * BLOCK;
        (a.min(b).min(a + far), a.max(b).max(b + far))
    };
    let (lo, hi) = window(0);
    let mut table = sys.moments(lo, hi)?;
    let mut acc = Kahan::default();
    let mut quiet = 0;
    let mut xm = ONE;
    for m in 0..=SERIES_MAX_TERMS as i64 {
        if m > 0 {
            xm *= x;
        }
        if let Some(l) = last {
            if m > l {
                return Ok(acc.value() * sign);
            }
        }
        if (even_only && m % 2 == 1) || vanishes(m as usize) {
            continue;
        }
        if !table.covers(kmin + step * m, kmax + step * m) {
            let (lo, hi) = window(m);
            table = sys.moments(lo, hi)?;
        }
        let mut mu = Kahan::default();
        for &(c, k) in &idx {
            mu.add(c * table.get(k + step * m)?);
        }
        let term = mu.value() * xm * if m == 0 { 1.0 } else { 2.0 };
        acc.add(term);
        if last.is_none() {
            if term.norm() <= SERIES_REL_TOL * acc.value().norm() {
                quiet += 1;
                if quiet >= 3 {
                    return Ok(acc.value() * sign);
                }
            } else {
                quiet = 0;
            }
        }
    }
    Err(Error::SeriesNotConverged { what: "associated function series", terms: SERIES_MAX_TERMS })
}

/// The check functions P̌ = P̂ − F₁P_n(z), Q̌ = Q̂ − F₂Q_n(z^{-2}),
/// Ř = R̂ − F₂R_n(z²), Š = Ŝ − F₁S_n(z^{-1}).
pub fn check(sys: &Systems, which: Hat, n: usize, offset: i64, z: C64) -> Result<C64> {
    let h = hat(sys, which, n, offset, z)?;
    Ok(match which {
        Hat::P => h - f1(sys, offset, z)? * sys.ep(n, offset, z)?,
        Hat::Q => h - f2(sys, offset, z)? * sys.eq(n, offset, inv_pow(z, 2)?)?,
        Hat::R => h - f2(sys, offset, z)? * sys.er(n, offset, z * z)?,
        Hat::S => h - f1(sys, offset, z)? * sys.es(n, offset, inv_pow(z, 1)?)?,
        Hat::PDagger | Hat::SDagger => {
            return Err(Error::InvalidMinor("check functions exist for P, Q, R, S only".into()))
        }
    })
}

fn inv_pow(z: C64, k: i32) -> Result<C64> {
    if z == ZERO {
        Err(Error::ZeroArgument)
    } else {
        Ok(z.powi(-k))
    }
}

/// The four difference operators.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Op {
    L1,
    L2,
    L3,
    L4,
}

impl Op {
    pub const ALL: [Op; 4] = [Op::L1, Op::L2, Op::L3, Op::L4];
}

impl fmt::Display for Op {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Op::L1 => "L1",
            Op::L2 => "L2",
            Op::L3 => "L3",
            Op::L4 => "L4",
        })
    }
}

/// Coefficients of f_{n+3}, f_{n+2}, f_{n+1}, f_n.
pub fn op_coeffs(sys: &Systems, op: Op, n: usize, o: i64, z: C64) -> Result<[C64; 4]> {
    let z2 = z * z;
    Ok(match op {
        Op::L1 => {
            let d = delta(sys, n + 1, o - 1)?;
            [
                ONE,
                -(delta(sys, n + 2, o)? + d),
                d * delta(sys, n + 1, o)? - z2,
                (delta(sys, n, o)? + eta(sys, n, o - 2)?) * z2,
            ]
        }
        Op::L2 => {
            let ba = beta(sys, n + 1, o + 1)? + alpha(sys, n + 1, o + 2)?;
            [
                z2,
                -(ONE + beta(sys, n + 2, o)? * z2),
                beta(sys, n + 1, o)? + alpha(sys, n + 1, o + 1)? + ba,
                -ba * (beta(sys, n, o)? + alpha(sys, n, o + 1)?),
            ]
        }
        Op::L3 => {
            let rk = rho(sys, n + 2, o)? + kappa(sys, n + 2, o)?;
            [
                ONE,
                -(z2 + kappa(sys, n + 2, o)?),
                (kappa(sys, n + 1, o)? + rho(sys, n + 1, o - 1)? + rk) * z2,
                -rk * (kappa(sys, n, o)? + rho(sys, n, o - 1)?) * z2,
            ]
        }
        Op::L4 => {
            let zi2 = inv_pow(z, 2)?;
            let g = gamma(sys, n + 1, o + 1)?;
            [
                ONE,
                -(gamma(sys, n + 2, o)? + g),
                -(zi2 - g * gamma(sys, n + 1, o)?),
                (theta(sys, n + 1, o + 1)? + g) * zi2,
            ]
        }
    })
}

/// Value of the operator on the sequence f evaluated at n..n+3.
pub fn apply_op(sys: &Systems, op: Op, f: &dyn Fn(usize) -> Result<C64>, n: usize, offset: i64, z: C64) -> Result<C64> {
    Ok(op_terms(sys, op, f, n, offset, z)?.iter().sum())
}

/// |operator value| over the largest of its four terms.
pub fn op_residual(sys: &Systems, op: Op, f: &dyn Fn(usize) -> Result<C64>, n: usize, offset: i64, z: C64) -> Result<f64> {
    Ok(residual(&op_terms(sys, op, f, n, offset, z)?))
}

fn op_terms(sys: &Systems, op: Op, f: &dyn Fn(usize) -> Result<C64>, n: usize, offset: i64, z: C64) -> Result<[C64; 4]> {
    let c = op_coeffs(sys, op, n, offset, z)?;
    Ok([c[0] * f(n + 3)?, c[1] * f(n + 2)?, c[2] * f(n + 1)?, c[3] * f(n)?])
}

/// A named sequence in the fundamental set of an operator.
pub type Solution = (&'static str, Box<dyn Fn(usize) -> Result<C64> + Sync + Send>);

/// The operator annihilating a Casorati family, and its three solutions
/// {P(z), P(−z), P̂(z)}, {Q(z^{-2}), Q̂(z), Q̂(−z)}, {R(z²), R̂(z), R̂(−z)},
/// {S(z^{-1}), S(−z^{-1}), Ŝ(z)}, plus Q̌, Ř, P̌, Š.
pub fn solutions<'a>(sys: &'a Systems, op: Op, offset: i64, z: C64) -> Vec<(&'static str, Box<dyn Fn(usize) -> Result<C64> + 'a>)> {
    let h = move |which: Hat, x: C64| move |n: usize| hat(sys, which, n, offset, x);
    let c = move |which: Hat| move |n: usize| check(sys, which, n, offset, z);
    match op {
        Op::L1 => vec![
            ("P(z)", Box::new(move |n| sys.ep(n, offset, z)) as Box<dyn Fn(usize) -> Result<C64>>),
            ("P(-z)", Box::new(move |n| sys.ep(n, offset, -z))),
            ("Phat(z)", Box::new(h(Hat::P, z))),
            ("Pcheck(z)", Box::new(c(Hat::P))),
        ],
        Op::L2 => vec![
            ("Q(z^-2)", Box::new(move |n| sys.eq(n, offset, inv_pow(z, 2)?)) as Box<dyn Fn(usize) -> Result<C64>>),
            ("Qhat(z)", Box::new(h(Hat::Q, z))),
            ("Qhat(-z)", Box::new(h(Hat::Q, -z))),
            ("Qcheck(z)", Box::new(c(Hat::Q))),
        ],
        Op::L3 => vec![
            ("R(z^2)", Box::new(move |n| sys.er(n, offset, z * z)) as Box<dyn Fn(usize) -> Result<C64>>),
            ("Rhat(z)", Box::new(h(Hat::R, z))),
            ("Rhat(-z)", Box::new(h(Hat::R, -z))),
            ("Rcheck(z)", Box::new(c(Hat::R))),
        ],
        Op::L4 => vec![
            ("S(z^-1)", Box::new(move |n| sys.es(n, offset, inv_pow(z, 1)?)) as Box<dyn Fn(usize) -> Result<C64>>),
            ("S(-z^-1)", Box::new(move |n| sys.es(n, offset, -inv_pow(z, 1)?))),
            ("Shat(z)", Box::new(h(Hat::S, z))),
            ("Scheck(z)", Box::new(c(Hat::S))),
        ],
    }
}

/// The Casorati family attached to each operator.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum CasFamily {
    P,
    Q,
    R,
    S,
}

impl CasFamily {
    pub const ALL: [CasFamily; 4] = [CasFamily::P, CasFamily::Q, CasFamily::R, CasFamily::S];

    pub fn op(self) -> Op {
        match self {
            CasFamily::P => Op::L1,
            CasFamily::Q => Op::L2,
            CasFamily::R => Op::L3,
            CasFamily::S => Op::L4,
        }
    }
}

impl fmt::Display for CasFamily {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            CasFamily::P => "P",
            CasFamily::Q => "Q",
            CasFamily::R => "R",
            CasFamily::S => "S",
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CasoratiMatrix {
    pub family: CasFamily,
    pub n: usize,
    pub offset: i64,
    pub z: C64,
    pub entries: CMatrix,
}

impl CasoratiMatrix {
    pub fn det(&self) -> C64 {
        linalg::det(&self.entries)
    }

    /// per|𝔉| / |det𝔉|: the factor by which entry errors grow in the determinant.
    pub fn condition(&self) -> f64 {
        let a = |i: usize, j: usize| self.entries[(i, j)].norm();
        let per = a(0, 0) * (a(1, 1) * a(2, 2) + a(1, 2) * a(2, 1))
            + a(0, 1) * (a(1, 0) * a(2, 2) + a(1, 2) * a(2, 0))
            + a(0, 2) * (a(1, 0) * a(2, 1) + a(1, 1) * a(2, 0));
        per / self.det().norm()
    }
}

/// Rows n, n+1, n+2 of the fundamental set (first three solutions).
pub fn casorati(sys: &Systems, family: CasFamily, n: usize, offset: i64, z: C64) -> Result<CasoratiMatrix> {
    let sols = solutions(sys, family.op(), offset, z);
    let mut m = CMatrix::zeros(3, 3);
    for i in 0..3 {
        for (j, (_, f)) in sols.iter().take(3).enumerate() {
            m[(i, j)] = f(n + i)?;
        }
    }
    Ok(CasoratiMatrix { family, n, offset, z, entries: m })
}

/// Companion matrix T_n with 𝔉_{n+1} = T_n 𝔉_n; its last row is the
/// operator solved for f_{n+3}.
pub fn transfer_matrix(sys: &Systems, family: CasFamily, n: usize, offset: i64, z: C64) -> Result<CMatrix> {
    let c = op_coeffs(sys, family.op(), n, offset, z)?;
    let mut t = CMatrix::zeros(3, 3);
    t[(0, 1)] = ONE;
    t[(1, 2)] = ONE;
    t[(2, 0)] = -c[3] / c[0];
    t[(2, 1)] = -c[2] / c[0];
    t[(2, 2)] = -c[1] / c[0];
    Ok(t)
}

/// max|𝔉_{n+1} − T_n 𝔉_n| over max|𝔉_{n+1}|.
pub fn first_order_casorati_step(sys: &Systems, family: CasFamily, n: usize, offset: i64, z: C64) -> Result<f64> {
    let next = casorati(sys, family, n + 1, offset, z)?.entries;
    let prod = transfer_matrix(sys, family, n, offset, z)? * casorati(sys, family, n, offset, z)?.entries;
    let scale = next.iter().map(|v| v.norm()).fold(0.0, f64::max);
    let diff = (&next - &prod).iter().map(|v| v.norm()).fold(0.0, f64::max);
    Ok(if scale == 0.0 { diff } else { diff / scale })
}

/// det𝔉_n/det𝔉_base predicted by Abel's lemma, ℓ running over base..n:
/// 𝔓: (−1)^{n−base} z^{2(n−base)} ∏(δ_ℓ^(r)+η_ℓ^(r−2));
/// 𝔔: z^{−2(n−base)} ∏(β_{ℓ+1}^(r+1)+α_{ℓ+1}^(r+2))(β_ℓ^(r)+α_ℓ^(r+1));
/// ℜ: z^{2(n−base)} ∏(ρ_{ℓ+2}^(s)+κ_{ℓ+2}^(s))(κ_ℓ^(s)+ρ_ℓ^(s−1));
/// 𝔖: (−1)^{n−base} z^{−2(n−base)} ∏(θ_{ℓ+1}^(s+1)+γ_{ℓ+1}^(s+1)).
pub fn abel_ratio(sys: &Systems, family: CasFamily, base: usize, n: usize, o: i64, z: C64) -> Result<C64> {
    let mut acc = ONE;
    let z2 = z * z;
    for l in base..n {
        acc *= match family {
            CasFamily::P => -(delta(sys, l, o)? + eta(sys, l, o - 2)?) * z2,
            CasFamily::Q => {
                (beta(sys, l + 1, o + 1)? + alpha(sys, l + 1, o + 2)?) * (beta(sys, l, o)? + alpha(sys, l, o + 1)?) / z2
            }
            CasFamily::R => (rho(sys, l + 2, o)? + kappa(sys, l + 2, o)?) * (kappa(sys, l, o)? + rho(sys, l, o - 1)?) * z2,
            CasFamily::S => -(theta(sys, l + 1, o + 1)? + gamma(sys, l + 1, o + 1)?) / z2,
        };
    }
    Ok(acc)
}

/// Relative gap between det𝔉_n/det𝔉_base and the Abel product.
///
/// With base 0 this is the lemma as usually stated. The hat columns are only
/// annihilated by the operators from degree 1 on (at degree 0 the moment
/// ∮ w ζ^{-r} P_0 = w_r survives), so the step from 𝔉_0 to 𝔉_1 picks up an
/// extra term and only bases ≥ 1 give a vanishing residual in general.
pub fn casoratian_ratio(sys: &Systems, family: CasFamily, base: usize, n: usize, offset: i64, z: C64) -> Result<f64> {
    Ok(casoratian_ratio_bounded(sys, family, base, n, offset, z)?.0)
}

/// The ratio residual and its rounding bound, taking entries good to 64ε.
pub fn casoratian_ratio_bounded(sys: &Systems, family: CasFamily, base: usize, n: usize, offset: i64, z: C64) -> Result<(f64, f64)> {
    let m0 = casorati(sys, family, base, offset, z)?;
    let mn = casorati(sys, family, n, offset, z)?;
    let r = grid::rel_diff(mn.det() / m0.det(), abel_ratio(sys, family, base, n, offset, z)?);
    Ok((r, 64.0 * f64::EPSILON * (m0.condition() + mn.condition())))
}

/// det𝔉_0 in terms of moments and F₂:
/// 𝔓: −2z(w_{r−2} + w_r z²); 𝔖: 2z^{−3}(w_s + z² w_{s+2});
/// 𝔔, ℜ: 3×3 determinants of F₂ values at shifted offsets.
pub fn casoratian_zero(sys: &Systems, family: CasFamily, o: i64, z: C64) -> Result<C64> {
    let z2 = z * z;
    Ok(match family {
        CasFamily::P => z * (-2.0) * (sys.moment(o - 2)? + sys.moment(o)? * z2),
        CasFamily::S => inv_pow(z, 3)? * 2.0 * (sys.moment(o)? + z2 * sys.moment(o + 2)?),
        CasFamily::Q | CasFamily::R => {
            let (step, x) = if family == CasFamily::Q { (2, inv_pow(z, 2)?) } else { (-2, z2) };
            let mut m = CMatrix::zeros(3, 3);
            for k in 0..3 {
                m[(0, k)] = x.powi(k as i32);
                m[(1, k)] = f2(sys, o + step * k as i64, z)?;
                m[(2, k)] = f2(sys, o + step * k as i64, -z)?;
            }
            linalg::det(&m)
        }
    })
}

pub fn casoratian_zero_residual(sys: &Systems, family: CasFamily, offset: i64, z: C64) -> Result<f64> {
    Ok(grid::rel_diff(casorati(sys, family, 0, offset, z)?.det(), casoratian_zero(sys, family, offset, z)?))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::c;
    use crate::weights::FourierSeries;

    fn exp() -> Systems {
        Systems::new(Weight::ExpLinear)
    }

    fn random() -> Systems {
        Systems::new(Weight::FourierSeries(FourierSeries::random(7, -12, 16, 0.8)))
    }

    #[test]
    fn f2_examples() {
        let s = exp();
        assert!((f2(&s, 0, c(1.7, 0.4)).unwrap() - c(-1.0, 0.0)).norm() < 1e-15);
        assert!((f2(&s, 0, ZERO).unwrap() - ONE).norm() < 1e-15);
        let z = c(0.4, 0.2);
        let want = (z.exp() - ONE) * 2.0 / z - ONE;
        assert!((f2(&s, 1, z).unwrap() - want).norm() < 1e-14);
        let one = Systems::new(Weight::FourierSeries(FourierSeries::from_pairs(&[(0, ONE)])));
        assert_eq!(f2(&one, 0, c(0.3, 0.0)).unwrap(), ONE);
        assert_eq!(f2(&one, 0, c(3.0, 0.0)).unwrap(), -ONE);
        assert!(matches!(f2(&s, 0, c(1.0005, 0.0)), Err(Error::AnnulusExcluded { .. })));
    }

    #[test]
    fn f2_against_quadrature() {
        for s in [exp(), random()] {
            for z in grid::with_origin() {
                for r in -1..3 {
                    let a = f2(&s, r, z).unwrap();
                    let b = f2_quadrature(s.weight(), r, z, 512);
                    assert!((a - b).norm() <= 1e-10 * a.norm().max(1.0), "r={r} z={z}");
                }
            }
        }
    }

    #[test]
    fn hats_resist_cancellation() {
        // 50-digit values of Σ p_j F₁(z; 2−j) for e^ζ
        let s = exp();
        let z = C64::from_polar(0.5, 0.3);
        let want = [(3, c(-8.759_210_226_062_765e-6, 3.650_893_368_242_332e-5)), (6, c(-2.323_680_576_772_247e-10, -1.1585725814317033e-10))];
        for (n, v) in want {
            assert!(grid::rel_diff(hat(&s, Hat::P, n, 2, z).unwrap(), v) < 1e-11, "n={n}");
        }
        let out = hat(&s, Hat::P, 4, 2, C64::from_polar(1.5, 1.9)).unwrap();
        assert!(grid::rel_diff(out, c(269.9836456667876, -208.8474934417814)) < 1e-13);
    }

    #[test]
    fn hats_at_degree_zero() {
        let s = random();
        let z = c(0.3, -0.4);
        for r in [-1, 0, 2] {
            assert!(grid::rel_diff(hat(&s, Hat::Q, 0, r, z).unwrap(), f2(&s, r, z).unwrap()) < 1e-15);
            assert!(grid::rel_diff(hat(&s, Hat::P, 0, r, z).unwrap(), f1(&s, r, z).unwrap()) < 1e-15);
            for h in Hat::PRIMARY {
                assert!(check(&s, h, 0, r, z).unwrap().norm() < 1e-15);
            }
        }
    }

    #[test]
    fn even_symmetrization() {
        let s = random();
        for z in grid::off_circle() {
            let p = hat(&s, Hat::P, 2, 1, z).unwrap();
            let pd = (hat(&s, Hat::PDagger, 2, 1, z).unwrap() + hat(&s, Hat::PDagger, 2, 1, -z).unwrap()) * 0.5;
            assert!(grid::rel_diff(p, pd) < 1e-12);
            let sh = hat(&s, Hat::S, 2, 1, z).unwrap();
            let sd = (hat(&s, Hat::SDagger, 2, 1, z).unwrap() + hat(&s, Hat::SDagger, 2, 1, -z).unwrap()) * 0.5;
            assert!(grid::rel_diff(sh, sd) < 1e-12);
            assert_eq!(p, hat(&s, Hat::P, 2, 1, -z).unwrap());
        }
    }

    #[test]
    fn operators_annihilate_fundamental_sets() {
        let s = random();
        for z in grid::off_circle() {
            for op in Op::ALL {
                for (name, f) in solutions(&s, op, 1, z) {
                    for n in 1..4 {
                        let res = op_residual(&s, op, &*f, n, 1, z).unwrap();
                        assert!(res < 1e-9, "{op} {name} n={n} z={z}: {res}");
                    }
                }
            }
        }
    }

    #[test]
    fn degree_zero_defect() {
        // L1 on P̂ at n = 0 leaves −z²(δ_0+η_0^(r−2)) w_r.
        let s = random();
        for z in grid::off_circle() {
            for r in 0..3 {
                let f = |n| hat(&s, Hat::P, n, r, z);
                let v = apply_op(&s, Op::L1, &f, 0, r, z).unwrap();
                let want = -z * z * (delta(&s, 0, r).unwrap() + eta(&s, 0, r - 2).unwrap()) * s.moment(r).unwrap();
                assert!(grid::rel_diff(v, want) < 1e-10);
            }
        }
    }

    #[test]
    fn operator_negative_control() {
        let s = exp();
        let one = |_| Ok(ONE);
        assert!(op_residual(&s, Op::L1, &one, 1, 2, c(1.5, 0.0)).unwrap() > 1e-3);
    }

    #[test]
    fn casoratians() {
        let s = exp();
        let z = c(1.5, 0.3);
        let d0 = casorati(&s, CasFamily::P, 0, 0, z).unwrap().det();
        assert!(grid::rel_diff(d0, z.powi(3) * -2.0) < 1e-12);
        assert!(casoratian_ratio(&s, CasFamily::P, 1, 3, 2, c(1.4, 0.0)).unwrap() < 1e-8);
        assert!(casoratian_ratio(&s, CasFamily::P, 0, 0, 2, c(1.4, 0.0)).unwrap() == 0.0);
        let r = random();
        for fam in CasFamily::ALL {
            for z in [c(0.45, 0.2), c(1.3, -0.6)] {
                assert!(casoratian_zero_residual(&r, fam, 1, z).unwrap() < 1e-8, "{fam} {z}");
                for n in 1..4 {
                    assert!(casoratian_ratio(&r, fam, 1, n, 1, z).unwrap() < 1e-8, "{fam} n={n}");
                    assert!(first_order_casorati_step(&r, fam, n, 1, z).unwrap() < 1e-9);
                }
                assert!(casoratian_ratio(&r, fam, 0, 2, 1, z).unwrap() > 1e-6);
            }
        }
    }
}
