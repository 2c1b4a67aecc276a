//! Brute-force evaluation of the n-fold torus integrals
//!
//!   𝒟_n[f] = (1/n!) ∮…∮ ∏ f(ζ_j) ∏_{j<k} (ζ_k − ζ_j)(ζ_k^{-2} − ζ_j^{-2})
//!   ℰ_n[f] = (1/n!) ∮…∮ ∏ f(ζ_j) ∏_{j<k} (ζ_k² − ζ_j²)(ζ_k^{-1} − ζ_j^{-1})
//!
//! by the tensor-product trapezoid rule. Every integrand here is a Laurent
//! polynomial per variable, so the rule is exact once M exceeds the largest
//! frequency; exponential weights are cut to a finite band first.

use crate::kernels::kernel_sum;
use crate::linalg::{self, CMatrix};
use crate::poly::Laurent;
use crate::polynomials::Systems;
use crate::recurrences::Family;
use crate::special::{factorial, Kahan};
use crate::{Error, Kind, Result, Weight, C64, ONE, ZERO};
use rayon::prelude::*;
use std::f64::consts::PI;

/// Band used to cut weights with infinitely many modes.
pub const EXP_BAND: i64 = 24;
/// Largest number of grid points M^n per integral.
pub const DEFAULT_BUDGET: u128 = 1 << 24;
/// Terms kept in the geometric expansion of a Cauchy factor.
pub const CAUCHY_TERMS: usize = 64;
pub const CAUCHY_TOL: f64 = 1e-10;

#[derive(Debug, Clone)]
pub struct Oracle {
    /// The weight as a Laurent polynomial in ζ.
    pub weight: Laurent,
    pub budget: u128,
}

impl Oracle {
    pub fn new(w: &Weight) -> Result<Self> {
        let (lo, hi) = match w.band() {
            Some(b) => b,
            None => (-EXP_BAND, EXP_BAND),
        };
        let coeffs = (lo..=hi).map(|k| w.moment(k)).collect::<Result<Vec<_>>>()?;
        Ok(Oracle { weight: Laurent::new(lo, coeffs), budget: DEFAULT_BUDGET })
    }

    pub fn with_budget(mut self, budget: u128) -> Self {
        self.budget = budget;
        self
    }

    /// w(ζ) ζ^{-offset} f(ζ)
    fn integrand(&self, offset: i64, extra: &Laurent) -> Laurent {
        &(&self.weight * &Laurent::monomial(-offset, ONE)) * extra
    }

    /// 𝒟_n or ℰ_n of w ζ^{-offset} · extra.
    pub fn multi(&self, kind: Kind, offset: i64, extra: &Laurent, n: usize, points: Option<usize>) -> Result<C64> {
        Ok(self.multi_est(kind, offset, extra, n, points)?.value)
    }

    pub fn multi_est(&self, kind: Kind, offset: i64, extra: &Laurent, n: usize, points: Option<usize>) -> Result<Estimate> {
        multi_estimate(kind, &self.integrand(offset, extra), n, points, self.budget)
    }

    pub fn d_multi(&self, offset: i64, extra: &Laurent, n: usize) -> Result<C64> {
        self.multi(Kind::TwoJK, offset, extra, n, None)
    }

    pub fn e_multi(&self, offset: i64, extra: &Laurent, n: usize) -> Result<C64> {
        self.multi(Kind::JTwoK, offset, extra, n, None)
    }

    /// D_n^(r) or E_n^(s).
    pub fn det(&self, kind: Kind, n: usize, offset: i64) -> Result<C64> {
        Ok(self.det_est(kind, n, offset)?.value)
    }

    pub fn det_est(&self, kind: Kind, n: usize, offset: i64) -> Result<Estimate> {
        self.multi_est(kind, offset, &Laurent::constant(ONE), n, None)
    }

    /// P_n(z;r) = 𝒟_n[wζ^{-r}(z−ζ)]/D_n, Q_n with (z−ζ^{-2}), R_n = ℰ_n[wζ^{-s}(z−ζ²)]/E_n,
    /// S_n with (z−ζ^{-1}). Q and S are returned in the plain variable (not starred).
    pub fn poly(&self, family: Family, n: usize, offset: i64, z: C64) -> Result<C64> {
        Ok(self.poly_est(family, n, offset, z)?.value)
    }

    pub fn poly_est(&self, family: Family, n: usize, offset: i64, z: C64) -> Result<Estimate> {
        let (kind, pow) = match family {
            Family::P => (Kind::TwoJK, 1),
            Family::QStar => (Kind::TwoJK, -2),
            Family::R => (Kind::JTwoK, 2),
            Family::SStar => (Kind::JTwoK, -1),
        };
        let lin = &Laurent::constant(z) + &Laurent::monomial(pow, -ONE);
        Ok(self.multi_est(kind, offset, &lin, n, None)?.over(self.det_est(kind, n, offset)?))
    }

    /// K_n(z2, z1; r) = 𝒟_n[wζ^{-r}(z1−ζ)(z2−ζ^{-2})]/D_{n+1}^(r), or
    /// L_n(z2, z1; s) = ℰ_n[wζ^{-s}(z1−ζ²)(z2−ζ^{-1})]/E_{n+1}^(s).
    pub fn kernel(&self, kind: Kind, n: usize, offset: i64, z1: C64, z2: C64) -> Result<C64> {
        Ok(self.kernel_est(kind, n, offset, z1, z2)?.value)
    }

    pub fn kernel_est(&self, kind: Kind, n: usize, offset: i64, z1: C64, z2: C64) -> Result<Estimate> {
        let (a, b) = match kind {
            Kind::TwoJK => (1, -2),
            Kind::JTwoK => (2, -1),
        };
        let f = &(&Laurent::constant(z1) + &Laurent::monomial(a, -ONE)) * &(&Laurent::constant(z2) + &Laurent::monomial(b, -ONE));
        Ok(self.multi_est(kind, offset, &f, n, None)?.over(self.det_est(kind, n + 1, offset)?))
    }

    /// The hat functions from averages of Cauchy factors:
    /// P̂_n = (2z^{-2}/D_n) 𝒟_{n+1}[wζ^{-r}/(z^{-2}−ζ^{-2})] − w_r δ_{n0},
    /// Q̂_n = −(2z/D_n) 𝒟_{n+1}[wζ^{-r}/(z−ζ)] + w_r δ_{n0},
    /// R̂_n = (2z^{-1}/E_n) ℰ_{n+1}[wζ^{-s}/(z^{-1}−ζ^{-1})] − w_s δ_{n0},
    /// Ŝ_n = −(2z²/E_n) ℰ_{n+1}[wζ^{-s}/(z²−ζ²)] + w_s δ_{n0}.
    pub fn assoc(&self, family: Family, n: usize, offset: i64, z: C64) -> Result<C64> {
        Ok(self.assoc_est(family, n, offset, z)?.value)
    }

    pub fn assoc_est(&self, family: Family, n: usize, offset: i64, z: C64) -> Result<Estimate> {
        if z == ZERO {
            return Err(Error::ZeroArgument);
        }
        let (kind, u, pow, pre, sign) = match family {
            Family::P => (Kind::TwoJK, z.powi(-2), -2, 2.0 * z.powi(-2), -1.0),
            Family::QStar => (Kind::TwoJK, z, 1, -2.0 * z, 1.0),
            Family::R => (Kind::JTwoK, z.inv(), -1, 2.0 * z.inv(), -1.0),
            Family::SStar => (Kind::JTwoK, z * z, 2, -2.0 * z * z, 1.0),
        };
        let cauchy = cauchy_series(u, pow)?;
        let total = self.multi_est(kind, offset, &cauchy, n + 1, None)?;
        let mut v = total.over(self.det_est(kind, n, offset)?);
        v.value *= pre;
        v.floor *= pre.norm();
        if n == 0 {
            let w = self.weight.coeff(offset) * sign;
            v.floor += 4.0 * f64::EPSILON * w.norm().max(v.value.norm());
            v.value += w;
        }
        Ok(v)
    }

    /// Largest relative gap of 𝒟_n[wζ^{-r}f] = ℰ_n[wζ^{-n-r+1}f] over f ∈ {1, ζ, z−ζ};
    /// gaps within the two rounding floors count as agreement.
    pub fn transfer_check(&self, n: usize, r: i64, z: C64) -> Result<f64> {
        let fs = [
            Laurent::constant(ONE),
            Laurent::monomial(1, ONE),
            &Laurent::constant(z) + &Laurent::monomial(1, -ONE),
        ];
        let mut worst = 0.0f64;
        for f in &fs {
            let a = self.multi_est(Kind::TwoJK, r, f, n, None)?;
            let b = self.multi_est(Kind::JTwoK, n as i64 + r - 1, f, n, None)?;
            if (a.value - b.value).norm() > a.floor + b.floor {
                worst = worst.max(crate::grid::rel_diff(a.value, b.value));
            }
        }
        Ok(worst)
    }
}


/// 1/(u − t) with t = ζ^pow, expanded in the region of u. Raises
/// `RegionTooCloseToCircle` when the truncation bound exceeds `CAUCHY_TOL`.
pub fn cauchy_series(u: C64, pow: i64) -> Result<Laurent> {
    let m = u.norm();
    let ratio = if m > 1.0 { 1.0 / m } else { m };
    let bound = if ratio < 1.0 { ratio.powi(CAUCHY_TERMS as i32 + 1) / (1.0 - ratio) } else { f64::INFINITY };
    if !(bound < CAUCHY_TOL) {
        return Err(Error::RegionTooCloseToCircle { bound });
    }
    let mut acc = Laurent::new(0, vec![]);
    for k in 0..CAUCHY_TERMS as i64 {
        let term = if m > 1.0 {
            // (1/u) Σ (t/u)^k
            Laurent::monomial(pow * k, u.powi(-(k as i32) - 1))
        } else {
            // −Σ u^k t^{-k-1}
            Laurent::monomial(-pow * (k + 1), -u.powi(k as i32))
        };
        acc = &acc + &term;
    }
    Ok(acc)
}

/// Powers of ζ_j carried by one pairwise factor.
fn pair_band(kind: Kind) -> (i64, i64) {
    match kind {
        Kind::TwoJK => (-2, 1),
        Kind::JTwoK => (-1, 2),
    }
}

/// Smallest point count for which the trapezoid rule is exact on this integrand.
pub fn exact_points(kind: Kind, f: &Laurent, n: usize) -> usize {
    let (lo, hi) = pair_band(kind);
    let k = n.saturating_sub(1) as i64;
    let top = (f.max_pow() + hi * k).abs().max((f.min_pow + lo * k).abs());
    (top + 1) as usize
}

fn pair_factor(kind: Kind, a: C64, b: C64) -> C64 {
    match kind {
        Kind::TwoJK => (b - a) * (b.powi(-2) - a.powi(-2)),
        Kind::JTwoK => (b * b - a * a) * (b.inv() - a.inv()),
    }
}

/// A multiple integral and a bound on its rounding error.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Estimate {
    pub value: C64,
    /// Absolute; a small multiple of ε times the integral of |integrand|.
    pub floor: f64,
}

impl Estimate {
    fn exact(value: C64) -> Estimate {
        Estimate { value, floor: 0.0 }
    }

    /// Quotient, with first-order propagation of both floors.
    pub fn over(self, d: Estimate) -> Estimate {
        let value = self.value / d.value;
        let dn = d.value.norm();
        Estimate { value, floor: self.floor / dn + value.norm() * d.floor / dn }
    }
}

/// (1/n!) M^{-n} Σ_grid ∏ f(ζ_j) ∏_{j<k} V(ζ_j, ζ_k), parallel over the first
/// variable with compensated sums combined in index order.
pub fn multi_integral(kind: Kind, f: &Laurent, n: usize, points: Option<usize>, budget: u128) -> Result<C64> {
    Ok(multi_estimate(kind, f, n, points, budget)?.value)
}

pub fn multi_estimate(kind: Kind, f: &Laurent, n: usize, points: Option<usize>, budget: u128) -> Result<Estimate> {
    if n == 0 {
        return Ok(Estimate::exact(ONE));
    }
    let m = points.unwrap_or_else(|| exact_points(kind, f, n)).max(1);
    let evals = (m as u128).checked_pow(n as u32).unwrap_or(u128::MAX);
    if evals > budget {
        return Err(Error::CostLimitExceeded { evals, budget });
    }
    let nodes: Vec<C64> = (0..m).map(|j| C64::from_polar(1.0, 2.0 * PI * j as f64 / m as f64)).collect();
    let fv: Vec<C64> = nodes.iter().map(|&z| f.eval(z)).collect();
    let v: Vec<C64> = (0..m * m).map(|i| pair_factor(kind, nodes[i / m], nodes[i % m])).collect();
    let partials: Vec<(C64, f64)> = (0..m)
        .into_par_iter()
        .map(|i0| {
            let mut acc = Kahan::default();
            let mut abs = 0.0;
            let mut idx = vec![i0; n];
            accumulate(1, fv[i0], &mut idx, &fv, &v, m, &mut acc, &mut abs);
            (acc.value(), abs)
        })
        .collect();
    let mut total = Kahan::default();
    let mut abs = 0.0;
    for (p, a) in partials {
        total.add(p);
        abs += a;
    }
    let norm = factorial(n as u64) * (m as f64).powi(n as i32);
    // each product carries about n² + len(f) roundings
    let ops = (n * n + f.coeffs.len()) as f64;
    Ok(Estimate { value: total.value() / norm, floor: 4.0 * ops * f64::EPSILON * abs / norm })
}

#[allow(clippy::too_many_arguments)]
fn accumulate(depth: usize, prod: C64, idx: &mut [usize], fv: &[C64], v: &[C64], m: usize, acc: &mut Kahan, abs: &mut f64) {
    if depth == idx.len() {
        acc.add(prod);
        *abs += prod.norm();
        return;
    }
    for i in 0..m {
        let mut p = prod * fv[i];
        for &j in &idx[..depth] {
            p *= v[j * m + i];
        }
        idx[depth] = i;
        accumulate(depth + 1, p, idx, fv, v, m, acc, abs);
    }
}

/// ∏_{j<k}(ζ_k−ζ_j)(ζ_k^{-2}−ζ_j^{-2}) against ψ ∏_{j<k}(ζ_k^{-1}−ζ_j^{-1})(ζ_k²−ζ_j²),
/// ψ = ∏ ζ_j^{1−n}.
pub fn density_identity_residual(zetas: &[C64]) -> f64 {
    let n = zetas.len();
    let mut a = ONE;
    let mut b = ONE;
    for k in 0..n {
        for j in 0..k {
            a *= pair_factor(Kind::TwoJK, zetas[j], zetas[k]);
            b *= pair_factor(Kind::JTwoK, zetas[j], zetas[k]);
        }
    }
    let psi: C64 = zetas.iter().map(|z| z.powi(1 - n as i32)).product();
    crate::grid::rel_diff(a, psi * b)
}

/// Residual of integrating the m×m kernel determinant over its last variable:
/// ∮ w ζ_m^{-r} det[K_n(ζ_k^{-2}, ζ_j)] = (n−m+2) det_{m−1} (L_n(ζ_k^{-1}, ζ_j²) for
/// j−2k). `fixed` holds ζ_1..ζ_{m−1}; the integral uses `points` trapezoid nodes.
pub fn gaudin_residual(sys: &Systems, kind: Kind, n: usize, offset: i64, fixed: &[C64], points: usize) -> Result<f64> {
    let m = fixed.len() + 1;
    let entry = |k: C64, j: C64| -> Result<C64> {
        match kind {
            Kind::TwoJK => kernel_sum(sys, kind, n, offset, k.powi(-2), j),
            Kind::JTwoK => kernel_sum(sys, kind, n, offset, k.inv(), j * j),
        }
    };
    let det_of = |zs: &[C64]| -> Result<C64> {
        let k = zs.len();
        let mut mat = CMatrix::zeros(k, k);
        for j in 0..k {
            for l in 0..k {
                mat[(j, l)] = entry(zs[l], zs[j])?;
            }
        }
        Ok(linalg::det(&mat))
    };
    let oracle = Oracle::new(sys.weight())?;
    let mut acc = Kahan::default();
    let mut scale = 0.0f64;
    let mut zs = fixed.to_vec();
    zs.push(ONE);
    for i in 0..points {
        let z = C64::from_polar(1.0, 2.0 * PI * i as f64 / points as f64);
        zs[m - 1] = z;
        let t = oracle.weight.eval(z) * z.powi(-offset as i32) * det_of(&zs)?;
        scale = scale.max(t.norm());
        acc.add(t);
    }
    let lhs = acc.value() / points as f64;
    let rhs = det_of(fixed)? * (n as f64 - m as f64 + 2.0);
    Ok((lhs - rhs).norm() / scale.max(rhs.norm()).max(f64::MIN_POSITIVE))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::c;
    use crate::grid;
    use crate::weights::FourierSeries;

    #[test]
    fn small_cases() {
        let o = Oracle::new(&Weight::ExpLinear).unwrap();
        assert!((o.det(Kind::TwoJK, 2, 0).unwrap() - c(1.0, 0.0)).norm() < 1e-10);
        assert!((o.det(Kind::TwoJK, 1, 3).unwrap() - c(1.0 / 6.0, 0.0)).norm() < 1e-15);
        assert!((o.det(Kind::JTwoK, 2, 1).unwrap() - c(1.0, 0.0)).norm() < 1e-10);
        assert_eq!(o.poly(Family::P, 0, 2, c(0.3, 0.0)).unwrap(), c(1.0, 0.0));
        let fixed = [c(0.3, 0.0)];
        let p = o.poly(Family::P, 2, 0, c(0.7, 0.0)).unwrap();
        let sys = Systems::new(Weight::ExpLinear);
        assert!(grid::rel_diff(p, sys.ep(2, 0, c(0.7, 0.0)).unwrap()) < 1e-8);
        assert!(gaudin_residual(&sys, Kind::TwoJK, 2, 0, &fixed, 256).unwrap() < 1e-8);
    }

    #[test]
    fn budget_and_region() {
        let o = Oracle::new(&Weight::ExpLinear).unwrap().with_budget(1000);
        assert!(matches!(o.det(Kind::TwoJK, 3, 0), Err(Error::CostLimitExceeded { .. })));
        assert!(matches!(cauchy_series(c(0.95, 0.0), 1), Err(Error::RegionTooCloseToCircle { .. })));
        assert!(cauchy_series(c(1.5, 0.0), 1).is_ok());
    }

    #[test]
    fn cauchy_expansion() {
        for (u, pow) in [(c(1.6, 0.3), 1), (c(0.4, -0.2), -2), (c(0.1, 0.5), 2)] {
            let s = cauchy_series(u, pow).unwrap();
            for t in [0.2, 1.7, 4.0] {
                let zeta = C64::from_polar(1.0, t);
                let want = (u - zeta.powi(pow as i32)).inv();
                assert!((s.eval(zeta) - want).norm() < 1e-9 * want.norm());
            }
        }
    }

    #[test]
    fn determinants_match_random() {
        let w = Weight::FourierSeries(FourierSeries::random(4, -6, 8, 0.8));
        let o = Oracle::new(&w).unwrap();
        let sys = Systems::new(w);
        for n in 0..=3 {
            for r in -1..3 {
                for kind in [Kind::TwoJK, Kind::JTwoK] {
                    let a = o.det(kind, n, r).unwrap();
                    let b = sys.det(kind, n, r).unwrap();
                    assert!((a - b).norm() <= 1e-12 * b.norm().max(1.0), "{kind} n={n} r={r}");
                }
            }
        }
    }

    #[test]
    fn density_identity() {
        let zs: Vec<C64> = [0.3, 1.1, 2.9, 4.4].iter().map(|&t| C64::from_polar(1.0, t)).collect();
        for k in 1..=4 {
            assert!(density_identity_residual(&zs[..k]) < 1e-12);
        }
    }
}
