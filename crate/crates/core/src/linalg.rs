//! Dense complex LU helpers on top of nalgebra.

use crate::C64;
use nalgebra::DMatrix;
use num_complex::Complex;
use twofloat::TwoFloat;

pub type CMatrix = DMatrix<C64>;

/// Complex double-double used inside the factorization.
type Cdd = Complex<TwoFloat>;

fn widen(z: C64) -> Cdd {
    Complex::new(TwoFloat::from(z.re), TwoFloat::from(z.im))
}

fn narrow(z: Cdd) -> C64 {
    C64::new(z.re.hi() + z.re.lo(), z.im.hi() + z.im.lo())
}

fn magnitude(z: &Cdd) -> f64 {
    z.re.hi().hypot(z.im.hi())
}

/// a/b with both scaled by a power of two first, so |b|² cannot underflow.
fn divide(a: Cdd, b: Cdd) -> Cdd {
    let m = b.re.hi().abs().max(b.im.hi().abs());
    let s = TwoFloat::from(2f64.powi(-(m.log2().floor() as i32)));
    let (a, b) = (Complex::new(a.re * s, a.im * s), Complex::new(b.re * s, b.im * s));
    a / b
}

/// Row-pivoted LU carried out in double-double. Moment matrices of fast
/// decaying weights lose most of their digits to cancellation in plain
/// double LU; here the error is set by the rounding of the entries alone.
struct Lu {
    /// L below the diagonal (unit diagonal implied), U on and above.
    a: Vec<Vec<Cdd>>,
    perm: Vec<usize>,
    sign: f64,
    zero_pivot: bool,
}

impl Lu {
    fn new(m: &CMatrix) -> Lu {
        let n = m.nrows();
        let mut a: Vec<Vec<Cdd>> = (0..n).map(|i| (0..n).map(|j| widen(m[(i, j)])).collect()).collect();
        let mut perm: Vec<usize> = (0..n).collect();
        let mut sign = 1.0;
        let mut zero_pivot = false;
        for k in 0..n {
            let p = (k..n).max_by(|&i, &j| magnitude(&a[i][k]).total_cmp(&magnitude(&a[j][k]))).unwrap_or(k);
            if magnitude(&a[p][k]) == 0.0 {
                zero_pivot = true;
                continue;
            }
            if p != k {
                a.swap(p, k);
                perm.swap(p, k);
                sign = -sign;
            }
            let pivot = a[k][k];
            for i in k + 1..n {
                let l = divide(a[i][k], pivot);
                a[i][k] = l;
                for j in k + 1..n {
                    let t = l * a[k][j];
                    a[i][j] -= t;
                }
            }
        }
        Lu { a, perm, sign, zero_pivot }
    }

    fn det(&self) -> C64 {
        if self.zero_pivot {
            return C64::new(0.0, 0.0);
        }
        let mut d = Complex::new(TwoFloat::from(self.sign), TwoFloat::from(0.0));
        for (k, row) in self.a.iter().enumerate() {
            d *= row[k];
        }
        narrow(d)
    }

    fn solve(&self, b: &[C64]) -> Option<Vec<C64>> {
        if self.zero_pivot {
            return None;
        }
        let n = self.a.len();
        let mut x: Vec<Cdd> = self.perm.iter().map(|&i| widen(b[i])).collect();
        for i in 0..n {
            for j in 0..i {
                let t = self.a[i][j] * x[j];
                x[i] -= t;
            }
        }
        for i in (0..n).rev() {
            for j in i + 1..n {
                let t = self.a[i][j] * x[j];
                x[i] -= t;
            }
            x[i] = divide(x[i], self.a[i][i]);
        }
        Some(x.into_iter().map(narrow).collect())
    }
}

/// Determinant by partial-pivot LU in double-double; the empty determinant is 1.
pub fn det(m: &CMatrix) -> C64 {
    if m.nrows() == 0 {
        return C64::new(1.0, 0.0);
    }
    Lu::new(m).det()
}

/// Solves m x = b; `None` when an exact zero pivot appears.
pub fn solve(m: &CMatrix, b: &[C64]) -> Option<Vec<C64>> {
    if m.nrows() == 0 {
        return Some(vec![]);
    }
    Lu::new(m).solve(b)
}

/// Product of the Euclidean row norms (Hadamard bound on |det|).
pub fn row_norm_product(m: &CMatrix) -> f64 {
    (0..m.nrows())
        .map(|i| m.row(i).iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt())
        .product()
}

/// Relative threshold below which a determinant is treated as vanishing.
pub const SINGULAR_REL: f64 = 1e-13;

/// Mean absolute size of the cofactor expansion, (1/n) Σ_ij |a_ij C_ij|; equals
/// |det| when nothing cancels.
pub fn expansion_scale(d: C64, m: &CMatrix) -> Option<f64> {
    let n = m.nrows();
    if n == 0 {
        return Some(1.0);
    }
    let inv = m.clone().try_inverse()?;
    let mut s = 0.0;
    for i in 0..n {
        for j in 0..n {
            s += (m[(i, j)] * inv[(j, i)]).norm();
        }
    }
    let s = s * d.norm() / n as f64;
    s.is_finite().then_some(s)
}

/// True when |det| is within `SINGULAR_REL` of the cancellation in its own
/// cofactor expansion, i.e. when relative perturbations of the entries at that
/// level could make it vanish. Insensitive to row and column scaling.
pub fn is_negligible(d: C64, m: &CMatrix) -> bool {
    if m.nrows() == 0 {
        return false;
    }
    if d == C64::new(0.0, 0.0) || !d.is_finite() {
        return true;
    }
    match expansion_scale(d, m) {
        Some(s) => d.norm() <= SINGULAR_REL * s,
        None => true,
    }
}

/// Removes the listed rows and columns (each sorted, strictly increasing).
pub fn remove_rows_cols(m: &CMatrix, rows: &[usize], cols: &[usize]) -> CMatrix {
    let keep_r: Vec<usize> = (0..m.nrows()).filter(|i| !rows.contains(i)).collect();
    let keep_c: Vec<usize> = (0..m.ncols()).filter(|j| !cols.contains(j)).collect();
    CMatrix::from_fn(keep_r.len(), keep_c.len(), |i, j| m[(keep_r[i], keep_c[j])])
}

/// A Mᵀ A with A the exchange matrix: reflection across the anti-diagonal.
pub fn reflect_antidiagonal(m: &CMatrix) -> CMatrix {
    let n = m.nrows();
    CMatrix::from_fn(n, n, |j, k| m[(n - 1 - k, n - 1 - j)])
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn arb_matrix(n: usize) -> impl Strategy<Value = CMatrix> {
        prop::collection::vec((-1.0f64..1.0, -1.0f64..1.0), n * n)
            .prop_map(move |v| CMatrix::from_iterator(n, n, v.into_iter().map(|(a, b)| C64::new(a, b))))
    }

    #[test]
    fn empty_det_is_one() {
        assert_eq!(det(&CMatrix::zeros(0, 0)), C64::new(1.0, 0.0));
    }

    #[test]
    fn small_det() {
        let m = CMatrix::from_row_slice(
            2,
            2,
            &[C64::new(1.0, 0.0), C64::new(0.0, 0.0), C64::new(0.5, 0.0), C64::new(1.0, 0.0)],
        );
        assert!((det(&m) - C64::new(1.0, 0.0)).norm() < 1e-15);
    }

    #[test]
    fn matches_partial_pivot_lu() {
        let m = CMatrix::from_fn(5, 5, |i, j| C64::new(((i * 7 + j * 3) % 5) as f64 - 2.0, (i as f64 - j as f64) * 0.25));
        let plain = m.clone().lu().determinant();
        assert!((det(&m) - plain).norm() <= 1e-13 * plain.norm());
    }

    #[test]
    fn tiny_pivots_do_not_underflow() {
        let m = CMatrix::from_row_slice(2, 2, &[C64::new(1e-170, 0.0), C64::new(1.0, 0.0), C64::new(0.0, 0.0), C64::new(1e-170, 1e-170)]);
        let d = det(&m);
        assert!(d.is_finite());
        let x = solve(&m, &[C64::new(1.0, 0.0), C64::new(1e-170, 0.0)]).unwrap();
        assert!(x.iter().all(|c| c.is_finite()));
    }

    proptest! {
        #[test]
        fn antidiagonal_reflection_preserves_det(m in (1usize..6).prop_flat_map(arb_matrix)) {
            let a = det(&m);
            let b = det(&reflect_antidiagonal(&m));
            prop_assert!((a - b).norm() <= 1e-12 * row_norm_product(&m).max(1.0));
        }

        #[test]
        fn solve_residual(m in arb_matrix(4), b in prop::collection::vec((-1.0f64..1.0, -1.0f64..1.0), 4)) {
            let b: Vec<C64> = b.into_iter().map(|(x, y)| C64::new(x, y)).collect();
            prop_assume!(!is_negligible(det(&m), &m));
            let x = solve(&m, &b).unwrap();
            let r = &m * nalgebra::DVector::from_column_slice(&x) - nalgebra::DVector::from_column_slice(&b);
            let scale = x.iter().map(|c| c.norm()).fold(1.0, f64::max);
            prop_assert!(r.iter().all(|c| c.norm() <= 1e-9 * scale));
        }
    }
}
