//! Dense complex polynomials and Laurent polynomials.

use crate::C64;
use std::ops::{Add, Mul, Sub};

/// Dense polynomial, coefficients in ascending degree.
#[derive(Debug, Clone, PartialEq)]
pub struct ComplexPoly {
    pub coeffs: Vec<C64>,
}

impl ComplexPoly {
    pub fn new(coeffs: Vec<C64>) -> Self {
        ComplexPoly { coeffs }
    }

    pub fn one() -> Self {
        ComplexPoly::new(vec![C64::new(1.0, 0.0)])
    }

    /// z^n
    pub fn monomial(n: usize) -> Self {
        let mut c = vec![C64::new(0.0, 0.0); n + 1];
        c[n] = C64::new(1.0, 0.0);
        ComplexPoly::new(c)
    }

    /// Degree implied by the coefficient vector length.
    pub fn degree(&self) -> usize {
        self.coeffs.len().saturating_sub(1)
    }

    pub fn coeff(&self, k: usize) -> C64 {
        self.coeffs.get(k).copied().unwrap_or_default()
    }

    pub fn eval(&self, z: C64) -> C64 {
        self.coeffs
            .iter()
            .rev()
            .fold(C64::new(0.0, 0.0), |acc, &c| acc * z + c)
    }

    /// p*(z) = z^n p(1/z), n = deg p.
    pub fn reciprocal(&self) -> Self {
        let mut c = self.coeffs.clone();
        c.reverse();
        ComplexPoly::new(c)
    }

    /// Evaluates the reciprocal polynomial without building it.
    pub fn eval_reciprocal(&self, z: C64) -> C64 {
        self.coeffs
            .iter()
            .fold(C64::new(0.0, 0.0), |acc, &c| acc * z + c)
    }

    pub fn scale(&self, s: C64) -> Self {
        ComplexPoly::new(self.coeffs.iter().map(|&c| c * s).collect())
    }

    pub fn is_monic(&self, tol: f64) -> bool {
        match self.coeffs.last() {
            Some(&c) => (c - C64::new(1.0, 0.0)).norm() <= tol,
            None => false,
        }
    }

    /// The polynomial in ζ obtained by substituting ζ^power for the variable.
    pub fn substitute(&self, power: i64) -> Laurent {
        Laurent::from_poly_power(self, power)
    }
}

impl Add for &ComplexPoly {
    type Output = ComplexPoly;
    fn add(self, o: &ComplexPoly) -> ComplexPoly {
        let n = self.coeffs.len().max(o.coeffs.len());
        ComplexPoly::new((0..n).map(|k| self.coeff(k) + o.coeff(k)).collect())
    }
}

impl Sub for &ComplexPoly {
    type Output = ComplexPoly;
    fn sub(self, o: &ComplexPoly) -> ComplexPoly {
        let n = self.coeffs.len().max(o.coeffs.len());
        ComplexPoly::new((0..n).map(|k| self.coeff(k) - o.coeff(k)).collect())
    }
}

impl Mul for &ComplexPoly {
    type Output = ComplexPoly;
    fn mul(self, o: &ComplexPoly) -> ComplexPoly {
        if self.coeffs.is_empty() || o.coeffs.is_empty() {
            return ComplexPoly::new(vec![]);
        }
        let mut c = vec![C64::new(0.0, 0.0); self.coeffs.len() + o.coeffs.len() - 1];
        for (i, &a) in self.coeffs.iter().enumerate() {
            for (j, &b) in o.coeffs.iter().enumerate() {
                c[i + j] += a * b;
            }
        }
        ComplexPoly::new(c)
    }
}

/// Laurent polynomial Σ c_j ζ^(min_pow + j).
#[derive(Debug, Clone, PartialEq)]
pub struct Laurent {
    pub min_pow: i64,
    pub coeffs: Vec<C64>,
}

impl Laurent {
    pub fn new(min_pow: i64, coeffs: Vec<C64>) -> Self {
        Laurent { min_pow, coeffs }
    }

    pub fn constant(c: C64) -> Self {
        Laurent::new(0, vec![c])
    }

    pub fn monomial(power: i64, c: C64) -> Self {
        Laurent::new(power, vec![c])
    }

    /// p(ζ^power) as a Laurent polynomial in ζ.
    pub fn from_poly_power(p: &ComplexPoly, power: i64) -> Self {
        if p.coeffs.is_empty() {
            return Laurent::new(0, vec![]);
        }
        let n = p.degree() as i64;
        let lo = if power >= 0 { 0 } else { n * power };
        let hi = if power >= 0 { n * power } else { 0 };
        let mut c = vec![C64::new(0.0, 0.0); (hi - lo + 1) as usize];
        for (j, &a) in p.coeffs.iter().enumerate() {
            c[(j as i64 * power - lo) as usize] += a;
        }
        Laurent::new(lo, c)
    }

    pub fn max_pow(&self) -> i64 {
        self.min_pow + self.coeffs.len() as i64 - 1
    }

    pub fn coeff(&self, power: i64) -> C64 {
        let i = power - self.min_pow;
        if i < 0 {
            return C64::new(0.0, 0.0);
        }
        self.coeffs.get(i as usize).copied().unwrap_or_default()
    }

    /// (power, coefficient) pairs.
    pub fn terms(&self) -> impl Iterator<Item = (i64, C64)> + '_ {
        self.coeffs
            .iter()
            .enumerate()
            .map(move |(i, &c)| (self.min_pow + i as i64, c))
    }

    pub fn eval(&self, z: C64) -> C64 {
        let mut acc = C64::new(0.0, 0.0);
        for &c in self.coeffs.iter().rev() {
            acc = acc * z + c;
        }
        acc * z.powi(self.min_pow as i32)
    }

    pub fn scale(&self, s: C64) -> Self {
        Laurent::new(self.min_pow, self.coeffs.iter().map(|&c| c * s).collect())
    }
}

impl Add for &Laurent {
    type Output = Laurent;
    fn add(self, o: &Laurent) -> Laurent {
        if self.coeffs.is_empty() {
            return o.clone();
        }
        if o.coeffs.is_empty() {
            return self.clone();
        }
        let lo = self.min_pow.min(o.min_pow);
        let hi = self.max_pow().max(o.max_pow());
        Laurent::new(lo, (lo..=hi).map(|p| self.coeff(p) + o.coeff(p)).collect())
    }
}

impl Mul for &Laurent {
    type Output = Laurent;
    fn mul(self, o: &Laurent) -> Laurent {
        if self.coeffs.is_empty() || o.coeffs.is_empty() {
            return Laurent::new(0, vec![]);
        }
        let mut c = vec![C64::new(0.0, 0.0); self.coeffs.len() + o.coeffs.len() - 1];
        for (i, &a) in self.coeffs.iter().enumerate() {
            for (j, &b) in o.coeffs.iter().enumerate() {
                c[i + j] += a * b;
            }
        }
        Laurent::new(self.min_pow + o.min_pow, c)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    #[test]
    fn reciprocal_reverses() {
        let p = ComplexPoly::new(vec![c(-0.5, 0.0), c(1.0, 0.0)]);
        assert_eq!(p.reciprocal().coeffs, vec![c(1.0, 0.0), c(-0.5, 0.0)]);
        assert_eq!(ComplexPoly::one().reciprocal(), ComplexPoly::one());
    }

    #[test]
    fn substitution_negative_power() {
        let p = ComplexPoly::new(vec![c(1.0, 0.0), c(2.0, 0.0), c(3.0, 0.0)]);
        let l = p.substitute(-2);
        assert_eq!(l.min_pow, -4);
        assert_eq!(l.coeff(-4), c(3.0, 0.0));
        assert_eq!(l.coeff(-2), c(2.0, 0.0));
        assert_eq!(l.coeff(0), c(1.0, 0.0));
        let z = c(0.3, 0.8);
        assert!((l.eval(z) - p.eval(z.powi(-2))).norm() < 1e-12);
    }

    fn arb_poly() -> impl Strategy<Value = ComplexPoly> {
        prop::collection::vec((-2.0f64..2.0, -2.0f64..2.0), 1..7)
            .prop_map(|v| ComplexPoly::new(v.into_iter().map(|(a, b)| c(a, b)).collect()))
    }

    proptest! {
        #[test]
        fn reciprocal_is_involution(mut p in arb_poly()) {
            p.coeffs[0] = c(1.0, 0.5);
            prop_assert_eq!(p.reciprocal().reciprocal(), p);
        }

        #[test]
        fn reciprocal_matches_definition(p in arb_poly(), re in 0.2f64..1.5, im in -1.0f64..1.0) {
            let z = c(re, im);
            let n = p.degree() as i32;
            let lhs = p.reciprocal().eval(z);
            let rhs = z.powi(n) * p.eval(z.inv());
            prop_assert!((lhs - rhs).norm() <= 1e-10 * (1.0 + rhs.norm()));
            prop_assert!((p.eval_reciprocal(z) - lhs).norm() <= 1e-12 * (1.0 + lhs.norm()));
        }

        #[test]
        fn laurent_product_evaluates(p in arb_poly(), q in arb_poly(), th in 0.0f64..std::f64::consts::TAU) {
            let z = C64::from_polar(1.3, th);
            let a = p.substitute(1);
            let b = q.substitute(-2);
            let prod = &a * &b;
            let want = p.eval(z) * q.eval(z.powi(-2));
            prop_assert!((prod.eval(z) - want).norm() <= 1e-10 * (1.0 + want.norm()));
        }
    }
}
