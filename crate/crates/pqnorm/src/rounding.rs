//! Generalized Krivine rounding with Gaussian Holder duals.
//!
//! Starting from a feasible Gram solution `(U, V)`, the inverse correlation
//! series is applied entrywise to the normalized Gram matrix at scale
//! `c = c_{a,b}`:
//!
//! ```text
//! M = [ abs(f^-1)[c UU^T]   f^-1[c UV^T] ]
//!     [ f^-1[c VU^T]        abs(f^-1)[c VV^T] ]
//! ```
//!
//! A Gram factorization of `M` realizes the transformed vectors in dimension
//! `m + n`; projecting them onto one Gaussian vector and taking Holder duals
//! yields a feasible pair `(y, x)` whose bilinear value recovers, in
//! expectation, a `c_{a,b}/(gamma_{p*}^a gamma_q^b)` fraction of the
//! relaxation value.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::inversion::{abs_series, compute_c, invert_odd_series};
use crate::matrix::{dot, lp_norm, DenseMatrix};
use crate::relaxation::GramSolution;
use crate::series::OddSeries;
use crate::specfn::{f_series, signed_power, ExponentPair};

/// The Holder dual `Psi_r(x) = sgn[x] o |x|^(r-1)` for finite `r >= 1`.
///
/// It satisfies `<Psi_r(x), x> = ||x||_r^r` and, for `r > 1`,
/// `||Psi_r(x)||_{r*} = ||x||_r^(r-1)`.
pub fn holder_dual(x: &[f64], r: f64) -> Result<Vec<f64>> {
    if !r.is_finite() || r < 1.0 {
        return Err(Error::Domain(format!("Holder dual needs finite r >= 1, got {r}")));
    }
    Ok(x.iter().map(|&v| signed_power(v, r - 1.0)).collect())
}

/// The Krivine Gram matrix together with the data needed to scale its rows.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct KrivineGram {
    /// Symmetric `(m+n) x (m+n)` matrix of transformed inner products.
    pub matrix: DenseMatrix,
    /// The rounding constant `c_{a,b}` used for the entries.
    pub c: f64,
    pub m: usize,
    pub n: usize,
    /// `||u_i||_2` of the source solution (zero rows stay zero).
    pub u_norms: Vec<f64>,
    /// `||v_j||_2` of the source solution.
    pub v_norms: Vec<f64>,
    pair: ExponentPair,
}

fn normalized_rows(rows: &[Vec<f64>]) -> (Vec<Vec<f64>>, Vec<f64>) {
    let norms: Vec<f64> = rows.iter().map(|r| lp_norm(r, 2.0)).collect();
    let unit = rows
        .iter()
        .zip(&norms)
        .map(|(r, &n)| {
            if n > 0.0 { r.iter().map(|x| x / n).collect() } else { r.clone() }
        })
        .collect();
    (unit, norms)
}

/// Builds the Krivine Gram matrix from a feasible relaxation solution.
///
/// The diagonal equals `h(c) = 1` (within 1e-8) on rows coming from nonzero
/// Gram vectors; zero rows map to zero, and their rounded coordinates vanish.
pub fn build_krivine_gram(
    sol: &GramSolution,
    pair: &ExponentPair,
    k_trunc: usize,
) -> Result<KrivineGram> {
    let c = compute_c(pair, k_trunc, 1e-12)?;
    let inverse = invert_odd_series(&f_series(pair, k_trunc)?)?;
    let h = abs_series(&inverse);
    let (u_hat, u_norms) = normalized_rows(&sol.u);
    let (v_hat, v_norms) = normalized_rows(&sol.v);
    let m = u_hat.len();
    let n = v_hat.len();
    let dim = m + n;

    let correlation = |x: &[f64], y: &[f64]| dot(x, y).clamp(-1.0, 1.0);
    let mut entries = vec![0.0; dim * dim];
    for i in 0..dim {
        for j in i..dim {
            let value = if i < m && j < m {
                h.eval(c * correlation(&u_hat[i], &u_hat[j]))
            } else if i >= m && j >= m {
                h.eval(c * correlation(&v_hat[i - m], &v_hat[j - m]))
            } else {
                inverse.eval(c * correlation(&u_hat[i], &v_hat[j - m]))
            };
            entries[i * dim + j] = value;
            entries[j * dim + i] = value;
        }
    }
    let matrix = DenseMatrix::new(dim, dim, entries)?;
    for i in 0..dim {
        let norm = if i < m { u_norms[i] } else { v_norms[i - m] };
        if norm > 0.0 && (matrix.get(i, i) - 1.0).abs() > 1e-8 {
            return Err(Error::Numerical(format!(
                "Krivine diagonal {i} is {} instead of 1; series truncation too coarse",
                matrix.get(i, i)
            )));
        }
    }
    Ok(KrivineGram { matrix, c, m, n, u_norms, v_norms, pair: *pair })
}

/// Finite-dimensional rows realizing the transformed vectors.
#[derive(Debug, Clone)]
pub struct GramRows {
    /// One row per matrix row of `A`; length `m + n` each.
    pub phi: Vec<Vec<f64>>,
    /// One row per matrix column of `A`.
    pub psi: Vec<Vec<f64>>,
    /// Total negative eigenvalue mass clipped during factorization.
    pub clipped_mass: f64,
    /// Set when a degenerate rescaling exponent (`a = 0` or `b = 0`) met a
    /// non-unit Gram row and the scale-invariance of the sign map was used
    /// instead of the singular exponent `1/b` (resp. `1/a`).
    pub rescale_fallback: bool,
}

/// Row-rescaling factor `norm^(1/exponent)`; for the degenerate exponent 0 the
/// Holder dual of the projection is scale-invariant, so unit scaling is used
/// and flagged unless the row already has unit (or zero) norm.
fn row_scale(norm: f64, exponent: f64, fallback: &mut bool) -> f64 {
    if norm <= 1e-12 {
        return 0.0;
    }
    if exponent == 0.0 {
        if (norm - 1.0).abs() > 1e-6 {
            *fallback = true;
        }
        1.0
    } else {
        norm.powf(1.0 / exponent)
    }
}

/// Factorizes the Krivine Gram matrix and rescales rows per the inversion
/// transformation (`phi_i` by `||u_i||^(1/b)`, `psi_j` by `||v_j||^(1/a)`).
///
/// Negative eigenvalues are clipped at zero; the factorization must reproduce
/// the mixed block within 1e-7 afterwards or an error is raised.
pub fn gram_rows(gram: &KrivineGram) -> Result<GramRows> {
    let dim = gram.m + gram.n;
    let mat = nalgebra::DMatrix::from_fn(dim, dim, |r, c| gram.matrix.get(r, c));
    let eig = nalgebra::SymmetricEigen::new(mat);
    let min_eig = eig.eigenvalues.iter().copied().fold(f64::INFINITY, f64::min);
    if min_eig < -1e-4 {
        return Err(Error::Numerical(format!(
            "Krivine Gram matrix is strongly indefinite (min eigenvalue {min_eig})"
        )));
    }
    let clipped_mass: f64 = eig.eigenvalues.iter().filter(|&&l| l < 0.0).map(|l| -l).sum();
    let roots: Vec<f64> = eig.eigenvalues.iter().map(|&l| l.max(0.0).sqrt()).collect();
    let rows: Vec<Vec<f64>> = (0..dim)
        .map(|i| (0..dim).map(|k| eig.eigenvectors[(i, k)] * roots[k]).collect())
        .collect();

    for i in 0..gram.m {
        for j in 0..gram.n {
            let got = dot(&rows[i], &rows[gram.m + j]);
            let want = gram.matrix.get(i, gram.m + j);
            if (got - want).abs() > 1e-7 {
                return Err(Error::Numerical(format!(
                    "Gram factorization error {:.3e} exceeds 1e-7 at ({i}, {j})",
                    (got - want).abs()
                )));
            }
        }
    }

    let mut rescale_fallback = false;
    let phi = rows[..gram.m]
        .iter()
        .zip(&gram.u_norms)
        .map(|(row, &norm)| {
            let scale = row_scale(norm, gram.pair.b, &mut rescale_fallback);
            row.iter().map(|x| scale * x).collect()
        })
        .collect();
    let psi = rows[gram.m..]
        .iter()
        .zip(&gram.v_norms)
        .map(|(row, &norm)| {
            let scale = row_scale(norm, gram.pair.a, &mut rescale_fallback);
            row.iter().map(|x| scale * x).collect()
        })
        .collect();
    Ok(GramRows { phi, psi, clipped_mass, rescale_fallback })
}

/// A feasible rounded pair on the unit `l_{q*}` and `l_p` spheres.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RoundedPair {
    pub y: Vec<f64>,
    pub x: Vec<f64>,
    /// `<y, A x>`.
    pub value: f64,
    /// Index of the Gaussian draw that produced this pair.
    pub trial: usize,
}

/// One Gaussian Holder-dual rounding draw:
/// `y = Psi_q(phi g) / ||phi g||_q^b` and `x = Psi_{p*}(psi g) / ||psi g||_{p*}^a`.
pub fn round_once<R: Rng + ?Sized>(
    phi: &[Vec<f64>],
    psi: &[Vec<f64>],
    a: &DenseMatrix,
    pair: &ExponentPair,
    rng: &mut R,
) -> Result<RoundedPair> {
    let dim = phi.first().map_or(0, Vec::len);
    let pstar = pair.pstar();
    for _attempt in 0..16 {
        let g: Vec<f64> = (0..dim).map(|_| rng.sample::<f64, _>(StandardNormal)).collect();
        let z: Vec<f64> = phi.iter().map(|row| dot(row, &g)).collect();
        let w: Vec<f64> = psi.iter().map(|row| dot(row, &g)).collect();
        let zq = lp_norm(&z, pair.q);
        let wp = lp_norm(&w, pstar);
        if zq == 0.0 || wp == 0.0 {
            if phi.iter().all(|row| lp_norm(row, 2.0) == 0.0)
                || psi.iter().all(|row| lp_norm(row, 2.0) == 0.0)
            {
                break; // degenerate transformation, fall through to the unit pair
            }
            continue; // measure-zero draw, resample
        }
        let zq_b = zq.powf(pair.b);
        let wp_a = wp.powf(pair.a);
        let y: Vec<f64> = holder_dual(&z, pair.q)?.iter().map(|v| v / zq_b).collect();
        let x: Vec<f64> = holder_dual(&w, pstar)?.iter().map(|v| v / wp_a).collect();
        let value = a.bilinear(&y, &x);
        return Ok(RoundedPair { y, x, value, trial: 0 });
    }
    // All-zero projections (A = 0 up to the solver): any unit pair is optimal.
    let mut y = vec![0.0; a.m];
    y[0] = 1.0;
    let mut x = vec![0.0; a.n];
    x[0] = 1.0;
    let value = a.bilinear(&y, &x);
    Ok(RoundedPair { y, x, value, trial: 0 })
}

/// Best-of-`trials` rounding of a relaxation solution; the sign of `y` is
/// flipped whenever the bilinear value comes out negative, so the result is
/// nonnegative. Bit-reproducible for a fixed seed.
pub fn round_best(
    a: &DenseMatrix,
    sol: &GramSolution,
    pair: &ExponentPair,
    trials: usize,
    seed: u64,
) -> Result<RoundedPair> {
    if trials == 0 {
        return Err(Error::Precondition("need at least one rounding trial".into()));
    }
    let gram = build_krivine_gram(sol, pair, crate::specfn::DEFAULT_TRUNCATION)?;
    let rows = gram_rows(&gram)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut best: Option<RoundedPair> = None;
    for trial in 0..trials {
        let mut pair_rounded = round_once(&rows.phi, &rows.psi, a, pair, &mut rng)?;
        if pair_rounded.value < 0.0 {
            for y in pair_rounded.y.iter_mut() {
                *y = -*y;
            }
            pair_rounded.value = -pair_rounded.value;
        }
        pair_rounded.trial = trial;
        if best.as_ref().is_none_or(|b| pair_rounded.value > b.value) {
            best = Some(pair_rounded);
        }
    }
    Ok(best.expect("at least one trial"))
}

/// Evaluates an odd series entrywise on a matrix of correlations; exposed for
/// verification code that needs the unnormalized rounding functionals.
pub fn series_map(series: &OddSeries, scale: f64, values: &[f64]) -> Vec<f64> {
    values.iter().map(|&v| series.eval(scale * v.clamp(-1.0, 1.0))).collect()
}
