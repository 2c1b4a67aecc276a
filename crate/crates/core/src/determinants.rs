//! Structured moment matrices, master matrices, their minors and the
//! Dodgson condensation identity.

use crate::linalg::{self, CMatrix};
use crate::weights::{MomentTable, Weight};
use crate::{Error, Kind, Result, C64, ONE, ZERO};

/// n×n matrix with entries w_{idx(offset, j, k)}.
#[derive(Debug, Clone, PartialEq)]
pub struct StructuredMatrix {
    pub kind: Kind,
    pub offset: i64,
    pub n: usize,
    pub entries: CMatrix,
}

/// Moment indices touched by the size-n structured matrix.
pub fn required_window(kind: Kind, offset: i64, n: usize) -> (i64, i64) {
    let n = n as i64;
    if n == 0 {
        return (offset, offset);
    }
    match kind {
        Kind::TwoJK => (offset - n + 1, offset + 2 * n - 2),
        Kind::JTwoK => (offset - 2 * n + 2, offset + n - 1),
    }
}

/// Moment indices touched by the master matrix of parameter n (size n+3).
pub fn master_window(kind: Kind, offset: i64, n: i64) -> (i64, i64) {
    match kind {
        Kind::TwoJK => (offset - n - 1, offset + 2 * n + 2),
        Kind::JTwoK => (offset - 2 * n - 2, offset + n + 1),
    }
}

pub fn build(kind: Kind, offset: i64, n: usize, moments: &MomentTable) -> Result<StructuredMatrix> {
    if n > 0 {
        let (lo, hi) = required_window(kind, offset, n);
        moments.require(lo, hi)?;
    }
    let entries = CMatrix::from_fn(n, n, |j, k| moments.at(kind.idx(offset, j as i64, k as i64)));
    Ok(StructuredMatrix { kind, offset, n, entries })
}

pub fn det(m: &StructuredMatrix) -> C64 {
    linalg::det(&m.entries)
}

impl StructuredMatrix {
    pub fn det(&self) -> C64 {
        det(self)
    }

    /// True when the determinant falls under the singularity threshold.
    pub fn is_singular(&self) -> bool {
        linalg::is_negligible(self.det(), &self.entries)
    }
}

/// (n+3)×(n+3) bordered moment matrix. Rows 0..=n+1 hold moments in columns
/// 0..=n+1 and z^{n+1−j} in the last column; the last row is 1, ζ, …, ζ^{n+1}
/// followed by the ⋆ entry, fixed to 0.
#[derive(Debug, Clone, PartialEq)]
pub struct MasterMatrix {
    pub kind: Kind,
    pub offset: i64,
    pub n: i64,
    pub z: C64,
    pub zeta: C64,
    pub entries: CMatrix,
}

impl MasterMatrix {
    /// `n` may be −1 (a 2×2 matrix) for the lowest kernel.
    pub fn build(kind: Kind, offset: i64, n: i64, z: C64, zeta: C64, moments: &MomentTable) -> Result<Self> {
        if n < -1 {
            return Err(Error::InvalidMinor(format!("master matrix parameter {n} < -1")));
        }
        let size = (n + 3) as usize;
        if n >= 0 {
            let (lo, hi) = master_window(kind, offset, n);
            moments.require(lo, hi)?;
        } else {
            moments.require(offset, offset)?;
        }
        let last = size - 1;
        let entries = CMatrix::from_fn(size, size, |j, k| match (j == last, k == last) {
            (false, false) => moments.at(kind.idx(offset, j as i64, k as i64)),
            (false, true) => z.powi((n + 1 - j as i64) as i32),
            (true, false) => zeta.powi(k as i32),
            (true, true) => ZERO,
        });
        Ok(MasterMatrix { kind, offset, n, z, zeta, entries })
    }

    pub fn size(&self) -> usize {
        self.entries.nrows()
    }

    pub fn minor(&self, spec: &MinorSpec) -> Result<C64> {
        spec.check(self.size())?;
        Ok(linalg::det(&linalg::remove_rows_cols(&self.entries, &spec.removed_rows, &spec.removed_cols)))
    }
}

/// Rows and columns deleted from a master matrix.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MinorSpec {
    pub removed_rows: Vec<usize>,
    pub removed_cols: Vec<usize>,
}

impl MinorSpec {
    pub fn new(mut rows: Vec<usize>, mut cols: Vec<usize>) -> Result<Self> {
        rows.sort_unstable();
        cols.sort_unstable();
        let s = MinorSpec { removed_rows: rows, removed_cols: cols };
        if s.removed_rows.len() != s.removed_cols.len() {
            return Err(Error::InvalidMinor("row and column counts differ".into()));
        }
        for v in [&s.removed_rows, &s.removed_cols] {
            if v.windows(2).any(|w| w[0] == w[1]) {
                return Err(Error::InvalidMinor(format!("repeated index in {v:?}")));
            }
        }
        Ok(s)
    }

    pub fn empty() -> Self {
        MinorSpec { removed_rows: vec![], removed_cols: vec![] }
    }

    fn check(&self, size: usize) -> Result<()> {
        if self.removed_rows.iter().chain(&self.removed_cols).any(|&i| i >= size) {
            return Err(Error::InvalidMinor(format!(
                "index out of range for a {size}x{size} matrix: {self:?}"
            )));
        }
        Ok(())
    }

    /// The union with further deletions.
    pub fn with(&self, rows: &[usize], cols: &[usize]) -> Result<Self> {
        let mut r = self.removed_rows.clone();
        r.extend_from_slice(rows);
        let mut c = self.removed_cols.clone();
        c.extend_from_slice(cols);
        MinorSpec::new(r, c)
    }
}

#[allow(clippy::too_many_arguments)]
pub fn master_minor(
    kind: Kind,
    offset: i64,
    n: i64,
    z: C64,
    zeta: C64,
    spec: &MinorSpec,
    moments: &MomentTable,
) -> Result<C64> {
    MasterMatrix::build(kind, offset, n, z, zeta, moments)?.minor(spec)
}

/// Dodgson residual of the matrix `m` with `base` already deleted; the extra
/// rows and columns are given in the indexing of `m`.
pub fn dodgson_residual_in(
    m: &CMatrix,
    base: &MinorSpec,
    rows: (usize, usize),
    cols: (usize, usize),
) -> Result<f64> {
    let (j1, j2) = rows;
    let (k1, k2) = cols;
    if j1 >= j2 || k1 >= k2 {
        return Err(Error::InvalidMinor("Dodgson indices must satisfy j1<j2, k1<k2".into()));
    }
    base.check(m.nrows())?;
    let d = |r: &[usize], c: &[usize]| -> Result<C64> {
        let s = base.with(r, c)?;
        s.check(m.nrows())?;
        Ok(linalg::det(&linalg::remove_rows_cols(m, &s.removed_rows, &s.removed_cols)))
    };
    let lhs = d(&[], &[])? * d(&[j1, j2], &[k1, k2])?;
    let t1 = d(&[j1], &[k1])? * d(&[j2], &[k2])?;
    let t2 = d(&[j1], &[k2])? * d(&[j2], &[k1])?;
    let scale = lhs.norm().max(t1.norm()).max(t2.norm());
    let res = (lhs - t1 + t2).norm();
    Ok(if scale == 0.0 { res } else { res / scale })
}

#[allow(clippy::too_many_arguments)]
pub fn dodgson_residual(
    kind: Kind,
    offset: i64,
    n: i64,
    z: C64,
    zeta: C64,
    rows: (usize, usize),
    cols: (usize, usize),
    moments: &MomentTable,
) -> Result<f64> {
    let m = MasterMatrix::build(kind, offset, n, z, zeta, moments)?;
    dodgson_residual_in(&m.entries, &MinorSpec::empty(), rows, cols)
}

/// A condensation identity applied inside a master matrix after deleting `base`.
#[derive(Debug, Clone, PartialEq)]
pub struct DodgsonInstance {
    pub name: String,
    pub kind: Kind,
    pub base: MinorSpec,
    pub rows: (usize, usize),
    pub cols: (usize, usize),
}

impl DodgsonInstance {
    fn new(name: &str, kind: Kind, base: (usize, usize), rows: (usize, usize), cols: (usize, usize)) -> Self {
        DodgsonInstance {
            name: name.to_string(),
            kind,
            base: MinorSpec { removed_rows: vec![base.0], removed_cols: vec![base.1] },
            rows,
            cols,
        }
    }

    pub fn residual(&self, offset: i64, n: i64, z: C64, zeta: C64, moments: &MomentTable) -> Result<f64> {
        let m = MasterMatrix::build(self.kind, offset, n, z, zeta, moments)?;
        dodgson_residual_in(&m.entries, &self.base, self.rows, self.cols)
    }
}

/// The condensation instances behind the recurrence relations, the tail
/// products and the associated-function recurrences, for master parameter n ≥ 1.
pub fn recurrence_instances(n: usize) -> Vec<DodgsonInstance> {
    let (a, b, c) = (n, n + 1, n + 2);
    let mut v = Vec::new();
    for kind in [Kind::TwoJK, Kind::JTwoK] {
        let tag = match kind {
            Kind::TwoJK => "D",
            Kind::JTwoK => "E",
        };
        let mut add = |label: &str, base, rows, cols| {
            v.push(DodgsonInstance::new(&format!("{tag}:{label}"), kind, base, rows, cols));
        };
        add("degree-a", (b, c), (a, c), (0, b));
        add("degree-b", (b, c), (0, c), (0, b));
        add("degree-c", (c, b), (0, b), (a, c));
        add("degree-d", (c, b), (0, b), (0, c));
        add("offset-row", (0, c), (b, c), (0, b));
        add("offset-col", (c, 0), (0, b), (b, c));
        add("shift-row", (0, c), (1, c), (0, b));
        add("shift-col", (c, 0), (0, b), (1, c));
        add("tail", (c, c), (0, b), (0, b));
    }
    v
}

/// |D_n^(r) − E_n^(r+n−1)| / max(1, |D_n^(r)|).
pub fn duality_check(r: i64, n: usize, moments: &MomentTable) -> Result<f64> {
    let d = build(Kind::TwoJK, r, n, moments)?.det();
    let e = build(Kind::JTwoK, r + n as i64 - 1, n, moments)?.det();
    Ok((d - e).norm() / d.norm().max(1.0))
}

/// 𝒯_{n,ℓ}(u) = det(g_{2j−k+ℓ}(u)) over 0 ≤ j,k ≤ n−1.
pub fn tau(n: usize, ell: i64, u: C64) -> Result<C64> {
    if n == 0 {
        return Ok(ONE);
    }
    let (lo, hi) = required_window(Kind::TwoJK, ell, n);
    let table = MomentTable::new(&Weight::ExpDeformed { u }, lo, hi)?;
    Ok(build(Kind::TwoJK, ell, n, &table)?.det())
}
