//! Gamma function, Gaussian absolute moments, and the normalized correlation
//! series.
//!
//! The central object is the odd function
//!
//! ```text
//! f_{a,b}(rho) = E[ sgn(g1)|g1|^a sgn(g2)|g2|^b ] / (gamma_{a+1}^{a+1} gamma_{b+1}^{b+1})
//! ```
//!
//! for rho-correlated standard Gaussians `g1, g2` and `a, b` in `[0,1]`. Its
//! Taylor coefficient of `rho^(2k+1)` has the hypergeometric closed form
//!
//! ```text
//! f_k = ((1-a)/2)_k ((1-b)/2)_k / ((3/2)_k k!)
//! ```
//!
//! with `(t)_k` the rising factorial. All coefficients are nonnegative and
//! decreasing in `a` and `b`; at `a = b = 0` the series is `arcsin`, and at
//! `a = 1` or `b = 1` it collapses to the identity.

use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::series::OddSeries;

/// ln(pi)
const LN_PI: f64 = 1.144_729_885_849_400_2;
/// 2 * sqrt(e / pi)
const TWO_SQRT_E_OVER_PI: f64 = 1.860_382_734_205_265_7;

/// Lanczos partial-fraction coefficients (Pugh's thesis, r = 10.900511).
const LANCZOS_COEFFS: [f64; 11] = [
    2.485_740_891_387_535_5e-5,
    1.051_423_785_817_219_7,
    -3.456_870_972_220_162_5,
    4.512_277_094_668_948,
    -2.982_852_253_235_766_4,
    1.056_397_115_771_267,
    -1.954_287_731_916_458_7e-1,
    1.709_705_434_044_412e-2,
    -5.719_261_174_043_057e-4,
    4.633_994_733_599_057e-6,
    -2.719_949_084_886_077_2e-9,
];
const LANCZOS_R: f64 = 10.900_511;

/// Gamma function for positive arguments, accurate to better than 12
/// significant digits.
pub fn gamma(x: f64) -> Result<f64> {
    if !x.is_finite() || x <= 0.0 {
        return Err(Error::Domain(format!("gamma requires x > 0, got {x}")));
    }
    Ok(if x < 0.5 {
        // reflection through Gamma(x)Gamma(1-x) = pi/sin(pi x)
        let s: f64 = LANCZOS_COEFFS
            .iter()
            .enumerate()
            .skip(1)
            .fold(LANCZOS_COEFFS[0], |s, (i, c)| s + c / (i as f64 - x));
        std::f64::consts::PI
            / ((std::f64::consts::PI * x).sin()
                * s
                * TWO_SQRT_E_OVER_PI
                * ((0.5 - x + LANCZOS_R) / std::f64::consts::E).powf(0.5 - x))
    } else {
        let s: f64 = LANCZOS_COEFFS
            .iter()
            .enumerate()
            .skip(1)
            .fold(LANCZOS_COEFFS[0], |s, (i, c)| s + c / (x + i as f64 - 1.0));
        s * TWO_SQRT_E_OVER_PI * ((x - 0.5 + LANCZOS_R) / std::f64::consts::E).powf(x - 0.5)
    })
}

/// Natural log of the gamma function for positive arguments.
pub fn ln_gamma(x: f64) -> Result<f64> {
    if !x.is_finite() || x <= 0.0 {
        return Err(Error::Domain(format!("ln_gamma requires x > 0, got {x}")));
    }
    const LN_2_SQRT_E_OVER_PI: f64 = 0.620_782_237_635_245_2;
    Ok(if x < 0.5 {
        let s: f64 = LANCZOS_COEFFS
            .iter()
            .enumerate()
            .skip(1)
            .fold(LANCZOS_COEFFS[0], |s, (i, c)| s + c / (i as f64 - x));
        LN_PI
            - (std::f64::consts::PI * x).sin().ln()
            - s.ln()
            - LN_2_SQRT_E_OVER_PI
            - (0.5 - x) * ((0.5 - x + LANCZOS_R) / std::f64::consts::E).ln()
    } else {
        let s: f64 = LANCZOS_COEFFS
            .iter()
            .enumerate()
            .skip(1)
            .fold(LANCZOS_COEFFS[0], |s, (i, c)| s + c / (x + i as f64 - 1.0));
        s.ln()
            + LN_2_SQRT_E_OVER_PI
            + (x - 0.5) * ((x - 0.5 + LANCZOS_R) / std::f64::consts::E).ln()
    })
}

/// The r-th absolute Gaussian moment root `gamma_r = E[|g|^r]^(1/r)`,
/// computed from `gamma_r^r = 2^(r/2) Gamma((1+r)/2) / sqrt(pi)`.
///
/// `r = 0` returns the continuity limit 1.
pub fn gaussian_moment(r: f64) -> Result<f64> {
    if !r.is_finite() || r < 0.0 {
        return Err(Error::Domain(format!("gaussian_moment requires r >= 0, got {r}")));
    }
    if r == 0.0 {
        return Ok(1.0);
    }
    let moment = 2f64.powf(r / 2.0) * gamma((1.0 + r) / 2.0)? / std::f64::consts::PI.sqrt();
    Ok(moment.powf(1.0 / r))
}

/// Serde adapter for exponents that may be infinite: JSON has no literal for
/// infinities, so `inf` round-trips as the string `"inf"`.
pub mod extended_real {
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(v: &f64, s: S) -> Result<S::Ok, S::Error> {
        if v.is_infinite() {
            s.serialize_str("inf")
        } else {
            s.serialize_f64(*v)
        }
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<f64, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Num(f64),
            Str(String),
        }
        match Raw::deserialize(d)? {
            Raw::Num(x) => Ok(x),
            Raw::Str(s) if s == "inf" => Ok(f64::INFINITY),
            Raw::Str(s) => s.parse().map_err(serde::de::Error::custom),
        }
    }
}

/// The norm parameters `(p, q)` with `1 <= q <= 2 <= p <= inf`, together with
/// the derived exponents `a = p* - 1`, `b = q - 1` and the Gaussian moments
/// entering the approximation ratio.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ExponentPair {
    /// Source exponent, in `[2, inf]` (`f64::INFINITY` allowed).
    #[serde(with = "extended_real")]
    pub p: f64,
    /// Target exponent, in `[1, 2]`.
    pub q: f64,
    /// `p* - 1`, in `[0, 1]` (`p = inf` gives 0, `p = 2` gives 1).
    pub a: f64,
    /// `q - 1`, in `[0, 1]`.
    pub b: f64,
    /// `gamma_{p*}`.
    pub gamma_pstar: f64,
    /// `gamma_q`.
    pub gamma_q: f64,
}

/// Dual exponent `r* = r/(r-1)` with the usual conventions `1* = inf`, `inf* = 1`.
pub fn dual_exponent(r: f64) -> f64 {
    if r.is_infinite() {
        1.0
    } else if r == 1.0 {
        f64::INFINITY
    } else {
        r / (r - 1.0)
    }
}

impl ExponentPair {
    /// Validates `p in [2, inf]`, `q in [1, 2]` and derives the exponents.
    pub fn new(p: f64, q: f64) -> Result<Self> {
        if !(p >= 2.0) {
            return Err(Error::Domain(format!("p must lie in [2, inf], got {p}")));
        }
        if !(1.0..=2.0).contains(&q) {
            return Err(Error::Domain(format!("q must lie in [1, 2], got {q}")));
        }
        let pstar = dual_exponent(p);
        let a = pstar - 1.0;
        let b = q - 1.0;
        Ok(ExponentPair {
            p,
            q,
            a,
            b,
            gamma_pstar: gaussian_moment(pstar)?,
            gamma_q: gaussian_moment(q)?,
        })
    }

    /// Builds the pair from the derived exponents `a, b in [0, 1]`.
    pub fn from_ab(a: f64, b: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&a) || !(0.0..=1.0).contains(&b) {
            return Err(Error::Domain(format!("(a, b) must lie in [0,1]^2, got ({a}, {b})")));
        }
        ExponentPair::new(dual_exponent(a + 1.0), b + 1.0)
    }

    /// `p*`, the dual of `p`.
    pub fn pstar(&self) -> f64 {
        self.a + 1.0
    }

    /// `q*`, the dual of `q`.
    pub fn qstar(&self) -> f64 {
        dual_exponent(self.q)
    }
}

/// Coefficient of `rho^(2k+1)` in the normalized correlation series:
/// `((1-a)/2)_k ((1-b)/2)_k / ((3/2)_k k!)`.
pub fn f_coefficient(a: f64, b: f64, k: usize) -> Result<f64> {
    if !(0.0..=1.0).contains(&a) || !(0.0..=1.0).contains(&b) {
        return Err(Error::Domain(format!("(a, b) must lie in [0,1]^2, got ({a}, {b})")));
    }
    let alpha = (1.0 - a) / 2.0;
    let beta = (1.0 - b) / 2.0;
    let mut c = 1.0;
    for i in 0..k {
        let i = i as f64;
        c *= (alpha + i) * (beta + i) / ((1.5 + i) * (i + 1.0));
    }
    Ok(c)
}

/// The truncated correlation series with coefficients `f_0, ..., f_K`.
pub fn f_series_ab(a: f64, b: f64, k_max: usize) -> Result<OddSeries> {
    if k_max < 1 {
        return Err(Error::Precondition("series truncation K must be >= 1".into()));
    }
    let alpha = (1.0 - a) / 2.0;
    let beta = (1.0 - b) / 2.0;
    f_coefficient(a, b, 0)?; // domain check
    let mut coeffs = Vec::with_capacity(k_max + 1);
    let mut c = 1.0;
    coeffs.push(c);
    for i in 0..k_max {
        let i = i as f64;
        c *= (alpha + i) * (beta + i) / ((1.5 + i) * (i + 1.0));
        coeffs.push(c);
    }
    OddSeries::new(coeffs)
}

/// Series truncation used when callers do not pick one. Coefficients decay at
/// least geometrically away from `|rho| = 1`, and like `k^(-3/2)` at the
/// endpoint, so 150 terms keep interior evaluations at machine precision.
pub const DEFAULT_TRUNCATION: usize = 150;

/// [`f_series_ab`] for a validated exponent pair.
pub fn f_series(pair: &ExponentPair, k_max: usize) -> Result<OddSeries> {
    f_series_ab(pair.a, pair.b, k_max)
}

/// Evaluates the truncated correlation series at `rho in [-1, 1]`.
///
/// Near the endpoint (`|rho| >= 0.999`) the series converges slowly; a
/// truncation-remainder estimate is logged and can be recovered with
/// [`OddSeries::eval_with_tail`].
pub fn f_eval_ab(a: f64, b: f64, rho: f64, k_max: usize) -> Result<f64> {
    if !(-1.0..=1.0).contains(&rho) {
        return Err(Error::Domain(format!("rho must lie in [-1, 1], got {rho}")));
    }
    let series = f_series_ab(a, b, k_max)?;
    let (value, tail) = series.eval_with_tail(rho);
    if rho.abs() >= 0.999 {
        log::warn!(
            "correlation series converges slowly at rho = {rho}; \
             truncation remainder estimate {tail:.3e} after K = {k_max} terms"
        );
    }
    Ok(value)
}

/// [`f_eval_ab`] for a validated exponent pair.
pub fn f_eval(pair: &ExponentPair, rho: f64, k_max: usize) -> Result<f64> {
    f_eval_ab(pair.a, pair.b, rho, k_max)
}

/// Sample mean and standard error of a Monte-Carlo estimator.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct MonteCarloEstimate {
    pub mean: f64,
    pub std_error: f64,
    pub samples: usize,
}

impl MonteCarloEstimate {
    /// |mean - reference| measured in standard errors.
    pub fn sigmas_from(&self, reference: f64) -> f64 {
        if self.std_error == 0.0 {
            if (self.mean - reference).abs() == 0.0 { 0.0 } else { f64::INFINITY }
        } else {
            (self.mean - reference).abs() / self.std_error
        }
    }
}

/// Monte-Carlo estimate of `E[sgn(g1)|g1|^a sgn(g2)|g2|^b]` over rho-correlated
/// standard Gaussian pairs `g1 = rho g2 + sqrt(1-rho^2) g3`.
///
/// The exact value is `gamma_{a+1}^{a+1} gamma_{b+1}^{b+1} f_{a,b}(rho)`.
pub fn noise_correlation_mc<R: Rng + ?Sized>(
    a: f64,
    b: f64,
    rho: f64,
    samples: usize,
    rng: &mut R,
) -> Result<MonteCarloEstimate> {
    if !(0.0..=1.0).contains(&a) || !(0.0..=1.0).contains(&b) {
        return Err(Error::Domain(format!("(a, b) must lie in [0,1]^2, got ({a}, {b})")));
    }
    if !(-1.0..=1.0).contains(&rho) {
        return Err(Error::Domain(format!("rho must lie in [-1, 1], got {rho}")));
    }
    if samples == 0 {
        return Err(Error::Precondition("need at least one sample".into()));
    }
    let orth = (1.0 - rho * rho).sqrt();
    let mut sum = 0.0;
    let mut sum_sq = 0.0;
    for _ in 0..samples {
        let g2: f64 = rng.sample(StandardNormal);
        let g3: f64 = rng.sample(StandardNormal);
        let g1 = rho * g2 + orth * g3;
        let x = signed_power(g1, a) * signed_power(g2, b);
        sum += x;
        sum_sq += x * x;
    }
    let n = samples as f64;
    let mean = sum / n;
    let var = (sum_sq / n - mean * mean).max(0.0);
    Ok(MonteCarloEstimate { mean, std_error: (var / n).sqrt(), samples })
}

/// `sgn(x) |x|^e` with the convention `sgn(0) = 0`.
pub(crate) fn signed_power(x: f64, e: f64) -> f64 {
    if x == 0.0 {
        0.0
    } else if e == 0.0 {
        x.signum()
    } else if e == 1.0 {
        x
    } else {
        x.signum() * x.abs().powf(e)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::{assert_abs_diff_eq, assert_relative_eq};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn gamma_reference_points() {
        assert_abs_diff_eq!(gamma(1.0).unwrap(), 1.0, epsilon = 1e-13);
        assert_abs_diff_eq!(gamma(0.5).unwrap(), std::f64::consts::PI.sqrt(), epsilon = 1e-12);
        assert_abs_diff_eq!(gamma(5.0).unwrap(), 24.0, epsilon = 1e-10);
        // functional equation on a non-special point
        let x = 3.37;
        assert_relative_eq!(gamma(x + 1.0).unwrap(), x * gamma(x).unwrap(), epsilon = 1e-13);
        assert_relative_eq!(ln_gamma(7.5).unwrap(), gamma(7.5).unwrap().ln(), epsilon = 1e-13);
        assert!(gamma(0.0).is_err());
        assert!(gamma(-1.0).is_err());
    }

    #[test]
    fn gaussian_moment_reference_points() {
        assert_abs_diff_eq!(gaussian_moment(2.0).unwrap(), 1.0, epsilon = 1e-13);
        assert_abs_diff_eq!(
            gaussian_moment(1.0).unwrap(),
            (2.0 / std::f64::consts::PI).sqrt(),
            epsilon = 1e-13
        );
        // E[g^4] = 3
        assert_abs_diff_eq!(gaussian_moment(4.0).unwrap(), 3f64.powf(0.25), epsilon = 1e-13);
        assert_eq!(gaussian_moment(0.0).unwrap(), 1.0);
        assert!(gaussian_moment(-0.1).is_err());
    }

    #[test]
    fn exponent_pair_duality() {
        let pair = ExponentPair::new(f64::INFINITY, 1.0).unwrap();
        assert_eq!(pair.a, 0.0);
        assert_eq!(pair.b, 0.0);
        assert_eq!(pair.pstar(), 1.0);
        assert_eq!(pair.qstar(), f64::INFINITY);

        let pair = ExponentPair::new(2.0, 2.0).unwrap();
        assert_eq!(pair.a, 1.0);
        assert_eq!(pair.b, 1.0);
        assert_abs_diff_eq!(pair.gamma_pstar, 1.0, epsilon = 1e-13);

        let pair = ExponentPair::new(4.0, 4.0 / 3.0).unwrap();
        assert_abs_diff_eq!(pair.a, 1.0 / 3.0, epsilon = 1e-15);
        assert_abs_diff_eq!(pair.b, 1.0 / 3.0, epsilon = 1e-15);

        assert!(ExponentPair::new(1.5, 1.0).is_err());
        assert!(ExponentPair::new(4.0, 2.5).is_err());

        let pair = ExponentPair::from_ab(0.25, 0.75).unwrap();
        assert_abs_diff_eq!(pair.a, 0.25, epsilon = 1e-12);
        assert_abs_diff_eq!(pair.b, 0.75, epsilon = 1e-12);
    }

    #[test]
    fn coefficients_match_arcsin() {
        // k = 1 at a = b = 0: (1-a)(1-b)/6
        assert_abs_diff_eq!(f_coefficient(0.0, 0.0, 1).unwrap(), 1.0 / 6.0, epsilon = 1e-15);
        // vanishing beyond the linear term when a = 1
        assert_eq!(f_coefficient(1.0, 0.3, 1).unwrap(), 0.0);
        // arcsin coefficient of rho^5
        assert_abs_diff_eq!(f_coefficient(0.0, 0.0, 2).unwrap(), 3.0 / 40.0, epsilon = 1e-15);
        // closed form for a = b = 0.5: (1/4)^2 / (3/2)
        assert_abs_diff_eq!(f_coefficient(0.5, 0.5, 1).unwrap(), 1.0 / 24.0, epsilon = 1e-15);
        assert!(f_coefficient(1.5, 0.0, 1).is_err());
    }

    #[test]
    fn series_matches_arcsin_oracle() {
        // independent oracle: arcsin coefficients (2k)! / (4^k (k!)^2 (2k+1))
        let arcsin_coeff = |k: usize| -> f64 {
            let mut num = 1.0; // (2k)!
            for i in 2..=(2 * k) {
                num *= i as f64;
            }
            let mut fact = 1.0; // k!
            for i in 2..=k {
                fact *= i as f64;
            }
            num / (4f64.powi(k as i32) * fact * fact * (2 * k + 1) as f64)
        };
        let s = f_series_ab(0.0, 0.0, 15).unwrap();
        for k in 0..=15 {
            assert_abs_diff_eq!(s.coeff(k), arcsin_coeff(k), epsilon = 1e-15);
        }
        // identity series at a = b = 1
        let s = f_series_ab(1.0, 1.0, 3).unwrap();
        assert_eq!(s.coeffs(), &[1.0, 0.0, 0.0, 0.0]);
    }

    #[test]
    fn eval_matches_arcsin() {
        assert_abs_diff_eq!(f_eval_ab(0.0, 0.0, 0.5, 60).unwrap(), 0.5f64.asin(), epsilon = 1e-12);
        assert_eq!(f_eval_ab(0.3, 0.9, 0.0, 10).unwrap(), 0.0);
        // the endpoint converges like K^(-1/2): the tail behind K terms is
        // ~ sum_{k>K} 1/(2 sqrt(pi) k^(3/2)) ~ 1/sqrt(pi K), about 4e-2 at
        // K = 200, and shrinking with K
        let at_200 = f_eval_ab(0.0, 0.0, 1.0, 200).unwrap();
        let at_2000 = f_eval_ab(0.0, 0.0, 1.0, 2000).unwrap();
        let half_pi = std::f64::consts::FRAC_PI_2;
        assert_abs_diff_eq!(at_200, half_pi, epsilon = 0.05);
        assert!(at_200 < half_pi && at_2000 < half_pi);
        assert!(half_pi - at_2000 < (half_pi - at_200) / 2.0);
        assert!(f_eval_ab(0.0, 0.0, 1.2, 10).is_err());
    }

    #[test]
    fn coefficients_monotone_in_a_and_b() {
        // nonnegative, and nonincreasing in each argument on a 21x21 grid
        for k in 0..=20 {
            let mut prev_a: Option<f64> = None;
            for i in 0..=20 {
                let a = i as f64 / 20.0;
                let c = f_coefficient(a, 0.35, k).unwrap();
                assert!(c >= 0.0);
                if let Some(p) = prev_a {
                    assert!(c <= p + 1e-14, "k={k} a={a}: {c} > {p}");
                }
                prev_a = Some(c);
                let mut prev_b: Option<f64> = None;
                for j in 0..=20 {
                    let b = j as f64 / 20.0;
                    let cb = f_coefficient(a, b, k).unwrap();
                    assert!(cb >= 0.0);
                    if let Some(p) = prev_b {
                        assert!(cb <= p + 1e-14);
                    }
                    prev_b = Some(cb);
                }
            }
        }
    }

    #[test]
    fn monte_carlo_identity_spot_check() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let (a, b, rho) = (0.4, 0.8, 0.6);
        let est = noise_correlation_mc(a, b, rho, 200_000, &mut rng).unwrap();
        let scale = gaussian_moment(a + 1.0).unwrap().powf(a + 1.0)
            * gaussian_moment(b + 1.0).unwrap().powf(b + 1.0);
        let expected = scale * f_eval_ab(a, b, rho, DEFAULT_TRUNCATION).unwrap();
        assert!(
            est.sigmas_from(expected) < 4.0,
            "mean {} expected {expected} ({} sigmas)",
            est.mean,
            est.sigmas_from(expected)
        );
    }
}
