//! Small special-function helpers: factorials, Pochhammer symbols, terminating
//! hypergeometric sums, compensated summation.

use crate::C64;

/// 1/k! with the Gamma-pole convention 1/k! = 0 for k < 0.
pub fn inv_factorial(k: i64) -> f64 {
    if k < 0 {
        return 0.0;
    }
    let mut v = 1.0f64;
    for i in 2..=k {
        v /= i as f64;
    }
    v
}

pub fn factorial(k: u64) -> f64 {
    (2..=k).fold(1.0, |acc, i| acc * i as f64)
}

/// Rising factorial (a)_n by direct product.
pub fn poch(a: f64, n: usize) -> f64 {
    (0..n).fold(1.0, |acc, i| acc * (a + i as f64))
}

pub fn binomial(n: u64, k: u64) -> f64 {
    if k > n {
        return 0.0;
    }
    let k = k.min(n - k);
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

/// pFq with real parameters, summed term by term. Terminates when a numerator
/// parameter is a non-positive integer, otherwise stops once the term falls
/// below `rel_tol` relative to the partial sum or `max_terms` is reached.
/// Returns `None` when the series has not settled.
pub fn hyp_pfq(a: &[f64], b: &[f64], x: C64, rel_tol: f64, max_terms: usize) -> Option<C64> {
    let mut term = C64::new(1.0, 0.0);
    let mut sum = term;
    for m in 0..max_terms {
        let mf = m as f64;
        let num: f64 = a.iter().map(|&ai| ai + mf).product();
        let den: f64 = b.iter().map(|&bi| bi + mf).product::<f64>() * (mf + 1.0);
        if num == 0.0 {
            return Some(sum);
        }
        term *= x * (num / den);
        sum += term;
        if term.norm() < rel_tol * sum.norm() || term.norm() == 0.0 {
            return Some(sum);
        }
    }
    None
}

/// Kahan-compensated complex accumulator.
#[derive(Debug, Clone, Copy, Default)]
pub struct Kahan {
    sum: C64,
    comp: C64,
}

impl Kahan {
    pub fn add(&mut self, x: C64) {
        let y = x - self.comp;
        let t = self.sum + y;
        self.comp = (t - self.sum) - y;
        self.sum = t;
    }

    pub fn value(&self) -> C64 {
        self.sum
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn factorial_values() {
        assert_eq!(inv_factorial(-1), 0.0);
        assert_eq!(inv_factorial(0), 1.0);
        assert!((inv_factorial(5) - 1.0 / 120.0).abs() < 1e-18);
        assert_eq!(factorial(6), 720.0);
        assert_eq!(binomial(6, 2), 15.0);
        assert_eq!(binomial(2, 3), 0.0);
    }

    #[test]
    fn pochhammer() {
        assert_eq!(poch(0.5, 0), 1.0);
        assert!((poch(0.5, 3) - 0.5 * 1.5 * 2.5).abs() < 1e-15);
        assert_eq!(poch(-2.0, 3), 0.0);
    }

    #[test]
    fn terminating_pfq() {
        // 2F0(-2, 1;; x) = 1 - 2x + 2x^2
        let x = C64::new(0.3, -0.1);
        let v = hyp_pfq(&[-2.0, 1.0], &[], x, 1e-18, 10).unwrap();
        let want = 1.0 - 2.0 * x + 2.0 * x * x;
        assert!((v - want).norm() < 1e-15);
    }

    #[test]
    fn exp_series() {
        let x = C64::new(0.7, 0.2);
        let v = hyp_pfq(&[], &[], x, 1e-18, 200).unwrap();
        assert!((v - x.exp()).norm() < 1e-14);
    }
}
