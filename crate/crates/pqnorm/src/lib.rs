//! Approximation of matrix `p -> q` operator norms, `1 <= q <= 2 <= p <= inf`.
//!
//! The pipeline has three legs:
//!
//! * [`relaxation`] solves Nesterov's convex program `CP(A)` over Gram
//!   vectors and produces a PSD dual certificate upper-bounding it;
//! * [`rounding`] turns a relaxation solution into a feasible pair on the
//!   unit `l_{q*}` and `l_p` spheres by generalized Krivine rounding —
//!   the compositional inverse of the Gaussian correlation series applied
//!   entrywise, followed by Holder duals of one Gaussian projection;
//! * [`inversion`] computes the rounding constant `c_{a,b}` and a certified
//!   approximation ratio `1/(h^-1(1) gamma_{p*} gamma_q)` from coefficient
//!   sign conditions and tail-decay bounds.
//!
//! [`specfn`] supplies the special functions (Gamma, Gaussian moments, the
//! hypergeometric coefficient formula) and [`oracle`] the ground-truth
//! heuristics used to sandwich everything in tests.
//!
//! ```
//! use pqnorm::{approx_ratio, ExponentPair};
//!
//! // the classical Grothendieck setting (p, q) = (inf, 1)
//! let pair = ExponentPair::new(f64::INFINITY, 1.0)?;
//! let report = approx_ratio(&pair, false)?;
//! let krivine = std::f64::consts::PI / (2.0 * (1.0 + 2f64.sqrt()).ln());
//! assert!((report.ratio - krivine).abs() < 1e-6);
//! # Ok::<(), pqnorm::Error>(())
//! ```

pub mod error;
pub mod inversion;
pub mod matrix;
pub mod oracle;
pub mod relaxation;
pub mod rounding;
pub mod series;
pub mod specfn;

mod book;

pub use error::{Error, Result};
pub use inversion::{
    abs_series, approx_ratio, approx_ratio_with_step, certified_hinv_lower_bound, compute_c,
    contour_coefficient, invert_odd_series, tail_bound, verify_sign_pattern, CertifiedBound,
    InverseReport, SignPatternReport,
};
pub use matrix::{lp_norm, DenseMatrix};
pub use oracle::{
    duality_check, embedding_experiment, kron_check, norm_grid, norm_power, DualityReport,
    EmbeddingReport, KronReport,
};
pub use relaxation::{solve_cp, solve_dual, DualCertificate, GramSolution, SolveOptions};
pub use rounding::{
    build_krivine_gram, gram_rows, holder_dual, round_best, round_once, GramRows, KrivineGram,
    RoundedPair,
};
pub use series::OddSeries;
pub use specfn::{
    dual_exponent, f_coefficient, f_eval, f_eval_ab, f_series, f_series_ab, gamma,
    gaussian_moment, noise_correlation_mc, ExponentPair, MonteCarloEstimate, DEFAULT_TRUNCATION,
};
