//! Truncated odd power series.
//!
//! Every series in this crate is odd: it is stored as the coefficient vector
//! `c` of `f(x) = sum_k c[k] * x^(2k+1)`. Index `k` is called the *odd index*
//! and corresponds to degree `2k+1`; the truncation order `K` is the largest
//! odd index kept, so the series carries degrees up to `2K+1`.
//!
//! Products mix parities: odd*odd is even, odd*even is odd. The handful of
//! private helpers below implement truncated convolutions in these index
//! conventions; they are the workhorse of compositional inversion.

use num_complex::Complex64;

use crate::error::{Error, Result};

/// A truncated odd power series.
#[derive(Debug, Clone, PartialEq)]
pub struct OddSeries {
    coeffs: Vec<f64>,
}

impl OddSeries {
    /// Builds a series from coefficients of `x^(2k+1)`; must be nonempty and finite.
    pub fn new(coeffs: Vec<f64>) -> Result<Self> {
        if coeffs.is_empty() {
            return Err(Error::Precondition("odd series needs at least one coefficient".into()));
        }
        if coeffs.iter().any(|c| !c.is_finite()) {
            return Err(Error::Precondition("odd series coefficients must be finite".into()));
        }
        Ok(OddSeries { coeffs })
    }

    /// Coefficient of `x^(2k+1)`, or 0 beyond the truncation order.
    pub fn coeff(&self, k: usize) -> f64 {
        self.coeffs.get(k).copied().unwrap_or(0.0)
    }

    /// All stored coefficients, index `k` holding the coefficient of `x^(2k+1)`.
    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    /// Truncation order `K` (the series stores degrees up to `2K+1`).
    pub fn truncation(&self) -> usize {
        self.coeffs.len() - 1
    }

    /// Entrywise absolute value of the coefficients.
    pub fn abs(&self) -> OddSeries {
        OddSeries { coeffs: self.coeffs.iter().map(|c| c.abs()).collect() }
    }

    /// Evaluates the truncated series by Horner's rule in `x^2`.
    pub fn eval(&self, x: f64) -> f64 {
        let x2 = x * x;
        let mut acc = 0.0;
        for &c in self.coeffs.iter().rev() {
            acc = acc * x2 + c;
        }
        acc * x
    }

    /// Evaluates the truncated series at a complex point.
    pub fn eval_complex(&self, z: Complex64) -> Complex64 {
        let z2 = z * z;
        let mut acc = Complex64::new(0.0, 0.0);
        for &c in self.coeffs.iter().rev() {
            acc = acc * z2 + c;
        }
        acc * z
    }

    /// Value together with a geometric estimate of the dropped tail,
    /// `|c_K| * |x|^(2K+1) / (1 - x^2)`. The estimate is infinite at `|x| = 1`.
    pub fn eval_with_tail(&self, x: f64) -> (f64, f64) {
        let value = self.eval(x);
        let k = self.truncation();
        let head = self.coeffs[k].abs() * x.abs().powi(2 * k as i32 + 1);
        let tail = if x.abs() < 1.0 { head / (1.0 - x * x) } else { f64::INFINITY };
        (value, tail)
    }

}

/// odd * odd -> even: degrees (2i+1)+(2j+1) = 2(i+j+1), so the product's even
/// index is i+j+1. Truncated to `len` even coefficients (degrees < 2*len).
pub(crate) fn odd_mul_odd(a: &[f64], b: &[f64], len: usize) -> Vec<f64> {
    let mut out = vec![0.0; len];
    for (i, &ai) in a.iter().enumerate() {
        if i + 1 >= len {
            break;
        }
        for (j, &bj) in b.iter().enumerate() {
            let idx = i + j + 1;
            if idx >= len {
                break;
            }
            out[idx] += ai * bj;
        }
    }
    out
}

/// odd * even -> odd: degrees (2i+1)+2j = 2(i+j)+1, so indices add directly.
pub(crate) fn odd_mul_even(a: &[f64], b: &[f64], len: usize) -> Vec<f64> {
    let mut out = vec![0.0; len];
    for (i, &ai) in a.iter().enumerate() {
        if i >= len {
            break;
        }
        for (j, &bj) in b.iter().enumerate() {
            let idx = i + j;
            if idx >= len {
                break;
            }
            out[idx] += ai * bj;
        }
    }
    out
}

/// even * even -> even, indices add directly.
pub(crate) fn even_mul_even(a: &[f64], b: &[f64], len: usize) -> Vec<f64> {
    let mut out = vec![0.0; len];
    for (i, &ai) in a.iter().enumerate() {
        if i >= len {
            break;
        }
        for (j, &bj) in b.iter().enumerate() {
            let idx = i + j;
            if idx >= len {
                break;
            }
            out[idx] += ai * bj;
        }
    }
    out
}

/// odd / even -> odd by back-substitution; requires `den[0] != 0`.
pub(crate) fn odd_div_even(num: &[f64], den: &[f64], len: usize) -> Vec<f64> {
    debug_assert!(den[0] != 0.0);
    let mut out = vec![0.0; len];
    for i in 0..len {
        let mut acc = if i < num.len() { num[i] } else { 0.0 };
        for l in 1..=i.min(den.len() - 1) {
            acc -= den[l] * out[i - l];
        }
        out[i] = acc / den[0];
    }
    out
}

/// Composition `f(g(x))` of odd series, truncated to `len` odd coefficients.
///
/// Uses Horner's rule in `g^2`: `f(g) = g * (f_0 + e*(f_1 + e*(...)))` with
/// `e = g^2` an even series.
pub(crate) fn odd_compose(f: &[f64], g: &[f64], len: usize) -> Vec<f64> {
    let e = odd_mul_odd(g, g, len);
    let mut acc = vec![0.0; len];
    for &fj in f.iter().rev() {
        acc = even_mul_even(&e, &acc, len);
        acc[0] += fj;
    }
    odd_mul_even(g, &acc, len)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn sin_series(k_max: usize) -> Vec<f64> {
        // sin x = sum (-1)^k x^(2k+1)/(2k+1)!
        (0..=k_max)
            .map(|k| {
                let mut fact = 1.0;
                for i in 2..=(2 * k + 1) {
                    fact *= i as f64;
                }
                if k % 2 == 0 { 1.0 / fact } else { -1.0 / fact }
            })
            .collect()
    }

    #[test]
    fn eval_matches_sin() {
        let s = OddSeries::new(sin_series(20)).unwrap();
        for &x in &[-1.0, -0.3, 0.0, 0.5, 1.0] {
            assert_abs_diff_eq!(s.eval(x), x.sin(), epsilon = 1e-14);
        }
    }

    #[test]
    fn odd_times_odd_is_even() {
        // sin^2 x = (1 - cos 2x)/2 = x^2 - x^4/3 + 2x^6/45 - ...
        let s = sin_series(10);
        let sq = odd_mul_odd(&s, &s, 4);
        assert_abs_diff_eq!(sq[0], 0.0, epsilon = 1e-15);
        assert_abs_diff_eq!(sq[1], 1.0, epsilon = 1e-15);
        assert_abs_diff_eq!(sq[2], -1.0 / 3.0, epsilon = 1e-15);
        assert_abs_diff_eq!(sq[3], 2.0 / 45.0, epsilon = 1e-15);
    }

    #[test]
    fn compose_identity() {
        let s = sin_series(12);
        let id = {
            let mut v = vec![0.0; 13];
            v[0] = 1.0;
            v
        };
        let c = odd_compose(&s, &id, 13);
        for (k, &ck) in c.iter().enumerate() {
            assert_abs_diff_eq!(ck, s[k], epsilon = 1e-15);
        }
    }

    #[test]
    fn division_inverts_multiplication() {
        let odd = sin_series(8);
        let even = vec![1.0, 0.25, -0.125, 0.0625, 0.5, -0.3, 0.2, 0.1, 0.05];
        let prod = odd_mul_even(&odd, &even, 9);
        let back = odd_div_even(&prod, &even, 9);
        for k in 0..9 {
            assert_abs_diff_eq!(back[k], odd[k], epsilon = 1e-12);
        }
    }

    #[test]
    fn tail_estimate_bounds_truncation() {
        let full = OddSeries::new(sin_series(30)).unwrap();
        let short = OddSeries::new(sin_series(3)).unwrap();
        let x = 0.9;
        let (v, tail) = short.eval_with_tail(x);
        // sin has alternating coefficients, so the geometric estimate on the
        // first dropped magnitude dominates the true remainder.
        assert!((v - full.eval(x)).abs() <= tail * 10.0);
    }

    #[test]
    fn rejects_empty_and_nonfinite() {
        assert!(OddSeries::new(vec![]).is_err());
        assert!(OddSeries::new(vec![1.0, f64::NAN]).is_err());
    }
}
