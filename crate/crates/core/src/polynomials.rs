//! The monic bi-orthogonal families, their norms and the LDU factorization.
//!
//! A `BiorthSystem` holds one offset of one kind: P, Q and h for 2j−k, R, S
//! and g for j−2k. `Systems` caches them per weight and grows the moment
//! window on demand.

use crate::determinants::{self, required_window};
use crate::grid;
use crate::linalg::{self, CMatrix};
use crate::poly::{ComplexPoly, Laurent};
use crate::weights::{MomentTable, Weight};
use crate::{Error, Kind, Result, C64, ONE, ZERO};
use std::collections::HashMap;
use std::sync::{Arc, Mutex, RwLock};

#[derive(Debug, Clone)]
pub struct BiorthSystem {
    pub kind: Kind,
    pub offset: i64,
    pub n_max: usize,
    pub moments: Arc<MomentTable>,
    dets: Vec<C64>,
    singular: Vec<bool>,
    first: Vec<ComplexPoly>,
    second: Vec<ComplexPoly>,
}

impl BiorthSystem {
    /// Determinants for sizes 0..=n_max+1 and polynomials for degrees
    /// 0..=n_max, stopping at the first vanishing determinant.
    pub fn new(kind: Kind, offset: i64, n_max: usize, moments: Arc<MomentTable>) -> Result<Self> {
        let (lo, hi) = required_window(kind, offset, n_max + 1);
        moments.require(lo.min(offset), hi.max(offset))?;
        let mut dets = Vec::with_capacity(n_max + 2);
        let mut singular = Vec::with_capacity(n_max + 2);
        for k in 0..=n_max + 1 {
            let m = determinants::build(kind, offset, k, &moments)?;
            let d = m.det();
            singular.push(linalg::is_negligible(d, &m.entries));
            dets.push(d);
        }
        let mut first = Vec::new();
        let mut second = Vec::new();
        for n in 0..=n_max {
            if singular[n] {
                break;
            }
            let (p, q) = solve_degree(kind, offset, n, &moments)?;
            first.push(p);
            second.push(q);
        }
        Ok(BiorthSystem { kind, offset, n_max, moments, dets, singular, first, second })
    }

    fn singular_err(&self, n: usize) -> Error {
        Error::SingularDeterminant { kind: self.kind, n, offset: self.offset }
    }

    fn check_range(&self, n: usize) -> Result<()> {
        if n > self.n_max + 1 {
            let (lo, hi) = required_window(self.kind, self.offset, n);
            return Err(Error::MomentWindowTooSmall {
                need_lo: lo,
                need_hi: hi,
                have_lo: self.moments.kmin,
                have_hi: self.moments.kmax,
            });
        }
        Ok(())
    }

    /// D_n (or E_n) as computed, possibly negligible.
    pub fn det(&self, n: usize) -> Result<C64> {
        self.check_range(n)?;
        Ok(self.dets[n])
    }

    pub fn is_singular(&self, n: usize) -> Result<bool> {
        self.check_range(n)?;
        Ok(self.singular[n])
    }

    /// The determinant, or `SingularDeterminant` when it vanishes.
    pub fn det_nonzero(&self, n: usize) -> Result<C64> {
        self.check_range(n)?;
        if self.singular[n] {
            return Err(self.singular_err(n));
        }
        Ok(self.dets[n])
    }

    fn poisoned_at(&self, n: usize) -> Error {
        self.singular_err(self.first.len().min(n))
    }

    /// P_n (2j−k) or R_n (j−2k).
    pub fn first(&self, n: usize) -> Result<&ComplexPoly> {
        self.check_range(n)?;
        self.first.get(n).ok_or_else(|| self.poisoned_at(n))
    }

    /// Q_n (2j−k) or S_n (j−2k).
    pub fn second(&self, n: usize) -> Result<&ComplexPoly> {
        self.check_range(n)?;
        self.second.get(n).ok_or_else(|| self.poisoned_at(n))
    }

    /// h_n = D_{n+1}/D_n (g_n for j−2k).
    pub fn norm(&self, n: usize) -> Result<C64> {
        let lo = self.det_nonzero(n)?;
        let hi = self.det_nonzero(n + 1)?;
        Ok(hi / lo)
    }

    fn expect(&self, kind: Kind) -> Result<()> {
        if self.kind != kind {
            return Err(Error::KindMismatch { expected: kind });
        }
        Ok(())
    }

    pub fn poly_p(&self, n: usize) -> Result<&ComplexPoly> {
        self.expect(Kind::TwoJK)?;
        self.first(n)
    }

    pub fn poly_q(&self, n: usize) -> Result<&ComplexPoly> {
        self.expect(Kind::TwoJK)?;
        self.second(n)
    }

    pub fn poly_r(&self, n: usize) -> Result<&ComplexPoly> {
        self.expect(Kind::JTwoK)?;
        self.first(n)
    }

    pub fn poly_s(&self, n: usize) -> Result<&ComplexPoly> {
        self.expect(Kind::JTwoK)?;
        self.second(n)
    }

    /// Pairing of a first-family and a second-family polynomial by moments.
    pub fn pair(&self, first: &ComplexPoly, second: &ComplexPoly) -> Result<C64> {
        pair(self.kind, self.offset, first, second, &self.moments)
    }

    /// Largest |⟨first_m, second_n⟩ − norm_n δ_{mn}| over m, n ≤ n_max,
    /// relative to the absolute size of the pairing sum.
    pub fn biorthogonality_residual(&self, n_max: usize) -> Result<f64> {
        let mut worst = 0.0f64;
        for m in 0..=n_max {
            for n in 0..=n_max {
                let p = self.first(m)?;
                let q = self.second(n)?;
                let v = self.pair(p, q)?;
                let want = if m == n { self.norm(n)? } else { ZERO };
                let scale = pair_scale(self.kind, self.offset, p, q, &self.moments)?.max(want.norm());
                worst = worst.max((v - want).norm() / scale.max(f64::MIN_POSITIVE));
            }
        }
        Ok(worst)
    }

    /// Coefficient matrices of the LDU factorization of the (n+1)×(n+1) moment
    /// matrix: rows of `second` hold Q_0..Q_n (S for j−2k), `first_t` is 𝒫ᵀ.
    pub fn ldu(&self, n: usize) -> Result<Ldu> {
        let mut second = CMatrix::zeros(n + 1, n + 1);
        let mut first_t = CMatrix::zeros(n + 1, n + 1);
        let mut diag = Vec::with_capacity(n + 1);
        for m in 0..=n {
            let p = self.first(m)?;
            let q = self.second(m)?;
            for l in 0..=m {
                first_t[(l, m)] = p.coeff(l);
                second[(m, l)] = q.coeff(l);
            }
            diag.push(self.norm(m)?);
        }
        let d = determinants::build(self.kind, self.offset, n + 1, &self.moments)?.entries;
        Ok(Ldu { second, diag, first_t, moment_matrix: d })
    }
}

#[derive(Debug, Clone)]
pub struct Ldu {
    pub second: CMatrix,
    pub diag: Vec<C64>,
    pub first_t: CMatrix,
    pub moment_matrix: CMatrix,
}

impl Ldu {
    /// Largest entry of |𝒬·D·𝒫ᵀ − diag(h)|, each relative to Σ|q||d||p|.
    pub fn residual(&self) -> f64 {
        let prod = &self.second * &self.moment_matrix * &self.first_t;
        let abs = |m: &CMatrix| m.map(|c| C64::new(c.norm(), 0.0));
        let scale = abs(&self.second) * abs(&self.moment_matrix) * abs(&self.first_t);
        let n = prod.nrows();
        let mut worst = 0.0f64;
        for i in 0..n {
            for j in 0..n {
                let want = if i == j { self.diag[i] } else { ZERO };
                let s = scale[(i, j)].re.max(want.norm()).max(f64::MIN_POSITIVE);
                worst = worst.max((prod[(i, j)] - want).norm() / s);
            }
        }
        worst
    }
}

/// Coefficients of the degree-n pair from the linear systems expressing
/// orthogonality against the lower-degree monomials.
fn solve_degree(kind: Kind, offset: i64, n: usize, moments: &MomentTable) -> Result<(ComplexPoly, ComplexPoly)> {
    if n == 0 {
        return Ok((ComplexPoly::one(), ComplexPoly::one()));
    }
    let a = determinants::build(kind, offset, n, moments)?.entries;
    let ni = n as i64;
    let b1: Vec<C64> = (0..ni).map(|l| -moments.at(kind.idx(offset, l, ni))).collect();
    let b2: Vec<C64> = (0..ni).map(|m| -moments.at(kind.idx(offset, ni, m))).collect();
    let singular = || Error::SingularDeterminant { kind, n, offset };
    let mut p = linalg::solve(&a, &b1).ok_or_else(singular)?;
    let mut q = linalg::solve(&a.transpose(), &b2).ok_or_else(singular)?;
    p.push(ONE);
    q.push(ONE);
    Ok((ComplexPoly::new(p), ComplexPoly::new(q)))
}

/// Σ f_j s_k w_{idx(k, j)}: the pairing integral evaluated through moments.
pub fn pair(kind: Kind, offset: i64, first: &ComplexPoly, second: &ComplexPoly, moments: &MomentTable) -> Result<C64> {
    let mut acc = ZERO;
    for (j, &f) in first.coeffs.iter().enumerate() {
        for (k, &s) in second.coeffs.iter().enumerate() {
            acc += f * s * moments.get(kind.idx(offset, k as i64, j as i64))?;
        }
    }
    Ok(acc)
}

fn pair_scale(kind: Kind, offset: i64, first: &ComplexPoly, second: &ComplexPoly, moments: &MomentTable) -> Result<f64> {
    let mut acc = 0.0;
    for (j, f) in first.coeffs.iter().enumerate() {
        for (k, s) in second.coeffs.iter().enumerate() {
            acc += f.norm() * s.norm() * moments.get(kind.idx(offset, k as i64, j as i64))?.norm();
        }
    }
    Ok(acc)
}

/// ∮ f(ζ) ζ^{-offset} w(ζ) dζ/(2πiζ) = Σ_j f_j w_{offset−j} for a Laurent polynomial f.
pub fn integrate(f: &Laurent, offset: i64, moments: &MomentTable) -> Result<C64> {
    let mut acc = ZERO;
    for (j, c) in f.terms() {
        acc += c * moments.get(offset - j)?;
    }
    Ok(acc)
}

/// Σ_j |f_j w_{offset−j}|, the natural magnitude of `integrate`.
pub fn integrate_scale(f: &Laurent, offset: i64, moments: &MomentTable) -> Result<f64> {
    let mut acc = 0.0;
    for (j, c) in f.terms() {
        acc += c.norm() * moments.get(offset - j)?.norm();
    }
    Ok(acc)
}

/// Per-weight cache of systems keyed by (kind, offset).
pub struct Systems {
    weight: Weight,
    table: RwLock<Arc<MomentTable>>,
    cache: Mutex<HashMap<(Kind, i64), Arc<BiorthSystem>>>,
}

impl std::fmt::Debug for Systems {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Systems").field("weight", &self.weight).finish()
    }
}

impl Systems {
    pub fn new(weight: Weight) -> Self {
        let table = MomentTable::new(&weight, 0, 0).expect("w_0 exists for every weight");
        Systems { weight, table: RwLock::new(Arc::new(table)), cache: Mutex::new(HashMap::new()) }
    }

    pub fn weight(&self) -> &Weight {
        &self.weight
    }

    /// A moment table covering [lo, hi], extending the shared one if needed.
    pub fn moments(&self, lo: i64, hi: i64) -> Result<Arc<MomentTable>> {
        {
            let t = self.table.read().expect("moment table lock");
            if t.covers(lo, hi) {
                return Ok(t.clone());
            }
        }
        let mut t = self.table.write().expect("moment table lock");
        if !t.covers(lo, hi) {
            let new = MomentTable::new(&self.weight, lo.min(t.kmin), hi.max(t.kmax))?;
            *t = Arc::new(new);
        }
        Ok(t.clone())
    }

    pub fn moment(&self, k: i64) -> Result<C64> {
        self.moments(k, k)?.get(k)
    }

    /// The system for (kind, offset) with degrees up to at least `n_max`.
    pub fn system(&self, kind: Kind, offset: i64, n_max: usize) -> Result<Arc<BiorthSystem>> {
        let mut cache = self.cache.lock().expect("system cache lock");
        if let Some(s) = cache.get(&(kind, offset)) {
            if s.n_max >= n_max {
                return Ok(s.clone());
            }
        }
        let target = cache.get(&(kind, offset)).map_or(n_max, |s| s.n_max.max(n_max));
        let (lo, hi) = required_window(kind, offset, target + 1);
        let table = self.moments(lo.min(offset), hi.max(offset))?;
        let sys = Arc::new(BiorthSystem::new(kind, offset, target, table)?);
        cache.insert((kind, offset), sys.clone());
        Ok(sys)
    }

    /// Size-n determinant at `offset`, possibly negligible.
    pub fn det(&self, kind: Kind, n: usize, offset: i64) -> Result<C64> {
        self.system(kind, offset, n.saturating_sub(1))?.det(n)
    }

    pub fn det_nonzero(&self, kind: Kind, n: usize, offset: i64) -> Result<C64> {
        self.system(kind, offset, n.saturating_sub(1))?.det_nonzero(n)
    }

    /// D_n^(r)
    pub fn d(&self, n: usize, r: i64) -> Result<C64> {
        self.det(Kind::TwoJK, n, r)
    }

    /// E_n^(s)
    pub fn e(&self, n: usize, s: i64) -> Result<C64> {
        self.det(Kind::JTwoK, n, s)
    }

    pub fn first(&self, kind: Kind, n: usize, offset: i64) -> Result<ComplexPoly> {
        Ok(self.system(kind, offset, n)?.first(n)?.clone())
    }

    pub fn second(&self, kind: Kind, n: usize, offset: i64) -> Result<ComplexPoly> {
        Ok(self.system(kind, offset, n)?.second(n)?.clone())
    }

    pub fn p(&self, n: usize, r: i64) -> Result<ComplexPoly> {
        self.first(Kind::TwoJK, n, r)
    }

    pub fn q(&self, n: usize, r: i64) -> Result<ComplexPoly> {
        self.second(Kind::TwoJK, n, r)
    }

    pub fn r(&self, n: usize, s: i64) -> Result<ComplexPoly> {
        self.first(Kind::JTwoK, n, s)
    }

    pub fn s(&self, n: usize, s: i64) -> Result<ComplexPoly> {
        self.second(Kind::JTwoK, n, s)
    }

    pub fn norm(&self, kind: Kind, n: usize, offset: i64) -> Result<C64> {
        self.system(kind, offset, n)?.norm(n)
    }

    /// h_n^(r)
    pub fn h(&self, n: usize, r: i64) -> Result<C64> {
        self.norm(Kind::TwoJK, n, r)
    }

    /// g_n^(s)
    pub fn g(&self, n: usize, s: i64) -> Result<C64> {
        self.norm(Kind::JTwoK, n, s)
    }

    fn eval_first(&self, kind: Kind, n: usize, offset: i64, z: C64) -> Result<C64> {
        Ok(self.system(kind, offset, n)?.first(n)?.eval(z))
    }

    fn eval_second(&self, kind: Kind, n: usize, offset: i64, z: C64) -> Result<C64> {
        Ok(self.system(kind, offset, n)?.second(n)?.eval(z))
    }

    fn eval_second_star(&self, kind: Kind, n: usize, offset: i64, z: C64) -> Result<C64> {
        Ok(self.system(kind, offset, n)?.second(n)?.eval_reciprocal(z))
    }

    /// P_n(z;r)
    pub fn ep(&self, n: usize, r: i64, z: C64) -> Result<C64> {
        self.eval_first(Kind::TwoJK, n, r, z)
    }

    /// Q_n(z;r)
    pub fn eq(&self, n: usize, r: i64, z: C64) -> Result<C64> {
        self.eval_second(Kind::TwoJK, n, r, z)
    }

    /// Q*_n(z;r) = z^n Q_n(1/z;r)
    pub fn eqs(&self, n: usize, r: i64, z: C64) -> Result<C64> {
        self.eval_second_star(Kind::TwoJK, n, r, z)
    }

    /// R_n(z;s)
    pub fn er(&self, n: usize, s: i64, z: C64) -> Result<C64> {
        self.eval_first(Kind::JTwoK, n, s, z)
    }

    /// S_n(z;s)
    pub fn es(&self, n: usize, s: i64, z: C64) -> Result<C64> {
        self.eval_second(Kind::JTwoK, n, s, z)
    }

    /// S*_n(z;s) = z^n S_n(1/z;s)
    pub fn ess(&self, n: usize, s: i64, z: C64) -> Result<C64> {
        self.eval_second_star(Kind::JTwoK, n, s, z)
    }
}

pub fn reciprocal(p: &ComplexPoly) -> ComplexPoly {
    p.reciprocal()
}

pub(crate) fn sign(n: usize) -> f64 {
    if n.is_multiple_of(2) {
        1.0
    } else {
        -1.0
    }
}

/// Largest relative gap on the grid between S*_n(z;s) and
/// ((−1)^n D_n^(s−n+2)/E_n^(s)) P_n(z;s−n+2).
pub fn duality_s_p(sys: &Systems, n: usize, s: i64) -> Result<f64> {
    let r = s - n as i64 + 2;
    let c = sys.d(n, r)? / sys.det_nonzero(Kind::JTwoK, n, s)? * sign(n);
    let sp = sys.s(n, s)?;
    let p = sys.p(n, r)?;
    Ok(grid::with_origin()
        .into_iter()
        .map(|z| grid::rel_diff(sp.eval_reciprocal(z), c * p.eval(z)))
        .fold(0.0, f64::max))
}

/// Largest relative gap on the grid between R_n(z;s) and
/// ((−1)^n D_n^(s−n−1)/E_n^(s)) Q*_n(z;s−n−1).
pub fn duality_r_q(sys: &Systems, n: usize, s: i64) -> Result<f64> {
    let r = s - n as i64 - 1;
    let c = sys.d(n, r)? / sys.det_nonzero(Kind::JTwoK, n, s)? * sign(n);
    let rp = sys.r(n, s)?;
    let q = sys.q(n, r)?;
    Ok(grid::with_origin()
        .into_iter()
        .map(|z| grid::rel_diff(rp.eval(z), c * q.eval_reciprocal(z)))
        .fold(0.0, f64::max))
}

/// Constant terms of both families, from the polynomials and from
/// determinant ratios.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tails {
    pub first: C64,
    pub first_ratio: C64,
    pub second: C64,
    pub second_ratio: C64,
}

impl Tails {
    pub fn residual(&self) -> f64 {
        grid::rel_diff(self.first, self.first_ratio).max(grid::rel_diff(self.second, self.second_ratio))
    }
}

/// P_n(0;r) = (−1)^n D_n^(r−1)/D_n^(r), Q_n(0;r) = (−1)^n D_n^(r+2)/D_n^(r),
/// R_n(0;s) = (−1)^n E_n^(s−2)/E_n^(s), S_n(0;s) = (−1)^n E_n^(s+1)/E_n^(s).
pub fn tails(sys: &Systems, kind: Kind, n: usize, offset: i64) -> Result<Tails> {
    let d = sys.det_nonzero(kind, n, offset)?;
    let first = sys.first(kind, n, offset)?.coeff(0);
    let second = sys.second(kind, n, offset)?.coeff(0);
    let first_ratio = sys.det(kind, n, offset - kind.first_power())? / d * sign(n);
    let second_ratio = sys.det(kind, n, offset - kind.second_power())? / d * sign(n);
    Ok(Tails { first, first_ratio, second, second_ratio })
}
