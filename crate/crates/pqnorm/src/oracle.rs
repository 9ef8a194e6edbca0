//! Ground-truth and structural checks: heuristic and exhaustive norm
//! computation, transpose duality, Kronecker productivity, and the Gaussian
//! approximate-isometry experiment.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matrix::{lp_norm, normalize_lp, DenseMatrix};
use crate::rounding::holder_dual;
use crate::specfn::{dual_exponent, gaussian_moment};

/// The vector maximizing `<y, z>` over the unit `l_{q*}` ball, scaled so the
/// inner product equals `||z||_q` (the Holder witness).
fn dual_witness(z: &[f64], q: f64) -> Vec<f64> {
    if q.is_infinite() {
        // vertex of the l_1 ball at the largest coordinate
        let mut best = 0usize;
        for (i, v) in z.iter().enumerate() {
            if v.abs() > z[best].abs() {
                best = i;
            }
        }
        let mut y = vec![0.0; z.len()];
        y[best] = z[best].signum();
        y
    } else {
        // direction of Psi_q(z); any positive scale works for the iteration
        z.iter().map(|&v| crate::specfn::signed_power(v, q - 1.0)).collect()
    }
}

/// Best response on the unit `l_p` sphere to a linear objective `d`.
fn sphere_best_response(d: &[f64], p: f64) -> Vec<f64> {
    if p == 1.0 {
        let mut best = 0usize;
        for (i, v) in d.iter().enumerate() {
            if v.abs() > d[best].abs() {
                best = i;
            }
        }
        let mut x = vec![0.0; d.len()];
        x[best] = d[best].signum();
        x
    } else if p.is_infinite() {
        d.iter().map(|&v| if v == 0.0 { 1.0 } else { v.signum() }).collect()
    } else {
        let mut x = holder_dual(d, dual_exponent(p)).unwrap_or_else(|_| d.to_vec());
        normalize_lp(&mut x, p);
        x
    }
}

/// Lower-bound heuristic for `||A||_{p->q}` by alternating Holder-dual ascent:
/// `x <- best_response_p(A^T Psi_q(A x))`. The value is nondecreasing along
/// each start and every iterate is feasible, so the result never exceeds the
/// true norm. Returns the best value and its witness `x` (`||x||_p = 1`).
pub fn norm_power(
    a: &DenseMatrix,
    p: f64,
    q: f64,
    starts: usize,
    seed: u64,
) -> Result<(f64, Vec<f64>)> {
    if !(p >= 1.0) || !(q >= 1.0) {
        return Err(Error::Domain(format!("exponents must lie in [1, inf], got ({p}, {q})")));
    }
    if starts == 0 {
        return Err(Error::Precondition("need at least one start".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut best_value = f64::NEG_INFINITY;
    let mut best_x = vec![0.0; a.n];
    for start in 0..starts {
        let mut x: Vec<f64> = (0..a.n).map(|_| rng.sample::<f64, _>(StandardNormal)).collect();
        if start == 0 {
            // deterministic all-ones start picks up structured maximizers
            x = vec![1.0; a.n];
        }
        normalize_lp(&mut x, p);
        let mut value = lp_norm(&a.matvec(&x), q);
        for _ in 0..500 {
            let z = a.matvec(&x);
            if lp_norm(&z, q) == 0.0 {
                break;
            }
            let y = dual_witness(&z, q);
            let d = a.tr_matvec(&y);
            if lp_norm(&d, 2.0) == 0.0 {
                break;
            }
            let candidate = sphere_best_response(&d, p);
            let candidate_value = lp_norm(&a.matvec(&candidate), q);
            if candidate_value <= value + 1e-13 * value.abs().max(1.0) {
                if candidate_value > value {
                    x = candidate;
                    value = candidate_value;
                }
                break;
            }
            x = candidate;
            value = candidate_value;
        }
        if value > best_value {
            best_value = value;
            best_x = x;
        }
    }
    Ok((best_value, best_x))
}

/// Exhaustive angular-grid lower bound for matrices with at most 3 columns.
pub fn norm_grid(a: &DenseMatrix, p: f64, q: f64, resolution: usize) -> Result<f64> {
    if a.n > 3 {
        return Err(Error::Unsupported(format!(
            "grid search is limited to 3 columns, matrix has {}",
            a.n
        )));
    }
    if resolution < 4 {
        return Err(Error::Precondition("resolution must be at least 4".into()));
    }
    let mut best: f64 = 0.0;
    let mut eval = |dir: &mut Vec<f64>| {
        normalize_lp(dir, p);
        best = best.max(lp_norm(&a.matvec(dir), q));
    };
    match a.n {
        1 => {
            eval(&mut vec![1.0]);
        }
        2 => {
            for i in 0..resolution {
                let theta = 2.0 * std::f64::consts::PI * i as f64 / resolution as f64;
                eval(&mut vec![theta.cos(), theta.sin()]);
            }
        }
        _ => {
            for i in 0..resolution {
                let theta = std::f64::consts::PI * i as f64 / (resolution - 1) as f64;
                for j in 0..resolution {
                    let phi = 2.0 * std::f64::consts::PI * j as f64 / resolution as f64;
                    eval(&mut vec![
                        theta.sin() * phi.cos(),
                        theta.sin() * phi.sin(),
                        theta.cos(),
                    ]);
                }
            }
        }
    }
    Ok(best)
}

/// Two-sided transpose-duality check `||A||_{p->q} = ||A^T||_{q*->p*}`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DualityReport {
    #[serde(with = "crate::specfn::extended_real")]
    pub p: f64,
    #[serde(with = "crate::specfn::extended_real")]
    pub q: f64,
    pub value_pq: f64,
    pub value_dual: f64,
    pub rel_gap: f64,
    pub pass: bool,
}

pub fn duality_check(a: &DenseMatrix, p: f64, q: f64) -> Result<DualityReport> {
    const TOL: f64 = 1e-4;
    let (value_pq, _) = norm_power(a, p, q, 20, 0x0dd5)?;
    let (value_dual, _) =
        norm_power(&a.transpose(), dual_exponent(q), dual_exponent(p), 20, 0x0dd5)?;
    let scale = value_pq.abs().max(value_dual.abs()).max(1e-300);
    let rel_gap = (value_pq - value_dual).abs() / scale;
    Ok(DualityReport { p, q, value_pq, value_dual, rel_gap, pass: rel_gap <= TOL })
}

/// Multiplicativity check `||A (x) B|| = ||A|| ||B||` for `p <= q`.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct KronReport {
    #[serde(with = "crate::specfn::extended_real")]
    pub p: f64,
    #[serde(with = "crate::specfn::extended_real")]
    pub q: f64,
    pub norm_a: f64,
    pub norm_b: f64,
    pub norm_kron: f64,
    pub rel_gap: f64,
    pub pass: bool,
}

/// Verifies that hypercontractive norms multiply under the Kronecker product.
/// The upper bound is the productivity theorem for `p <= q`; the matching
/// lower bound comes from product vectors, so equality is checked.
pub fn kron_check(a: &DenseMatrix, b: &DenseMatrix, p: f64, q: f64) -> Result<KronReport> {
    if p > q {
        return Err(Error::Unsupported(format!(
            "productivity requires p <= q, got ({p}, {q})"
        )));
    }
    const TOL: f64 = 1e-3;
    let (norm_a, _) = norm_power(a, p, q, 20, 0xa0)?;
    let (norm_b, _) = norm_power(b, p, q, 20, 0xb0)?;
    let (norm_kron, _) = norm_power(&a.kron(b), p, q, 30, 0xab)?;
    let product = norm_a * norm_b;
    let rel_gap = (norm_kron - product).abs() / product.abs().max(1e-300);
    Ok(KronReport { p, q, norm_a, norm_b, norm_kron, rel_gap, pass: rel_gap <= TOL })
}

/// Result of the random-projection approximate-isometry experiment.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct EmbeddingReport {
    pub n: usize,
    pub m: usize,
    pub q: f64,
    pub trials: usize,
    /// Empirical min and max of `||Bx||_q / (m^(1/q) gamma_q)` over unit `x`.
    pub min_ratio: f64,
    pub max_ratio: f64,
    /// Ratio at the adversarial direction found by power iteration.
    pub adversarial_ratio: f64,
    /// Largest deviation `|ratio - 1|` observed.
    pub max_deviation: f64,
}

/// Draws a Gaussian `m x n` matrix and measures how far `||Bx||_q` strays
/// from `m^(1/q) gamma_q ||x||_2` over random and adversarial unit vectors.
pub fn embedding_experiment(
    n: usize,
    m: usize,
    q: f64,
    trials: usize,
    seed: u64,
) -> Result<EmbeddingReport> {
    if q < 2.0 {
        return Err(Error::Domain(format!("the isometry regime needs q >= 2, got {q}")));
    }
    if n == 0 || m == 0 || trials == 0 {
        return Err(Error::Precondition("n, m and trials must be positive".into()));
    }
    if m > 100_000 {
        return Err(Error::Unsupported("m capped at 100000 to keep the experiment desk-scale".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let b = DenseMatrix::gaussian(m, n, &mut rng);
    let denom = (m as f64).powf(1.0 / q) * gaussian_moment(q)?;
    let mut min_ratio = f64::INFINITY;
    let mut max_ratio = f64::NEG_INFINITY;
    for _ in 0..trials {
        let mut x: Vec<f64> = (0..n).map(|_| rng.sample::<f64, _>(StandardNormal)).collect();
        normalize_lp(&mut x, 2.0);
        let ratio = lp_norm(&b.matvec(&x), q) / denom;
        min_ratio = min_ratio.min(ratio);
        max_ratio = max_ratio.max(ratio);
    }
    let (adversarial_norm, _) = norm_power(&b, 2.0, q, 3, seed ^ 0x5eed)?;
    let adversarial_ratio = adversarial_norm / denom;
    let max_deviation = [min_ratio, max_ratio, adversarial_ratio]
        .iter()
        .fold(0.0f64, |acc, r| acc.max((r - 1.0).abs()));
    Ok(EmbeddingReport {
        n,
        m,
        q,
        trials,
        min_ratio,
        max_ratio,
        adversarial_ratio,
        max_deviation,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::{assert_abs_diff_eq, assert_relative_eq};

    fn rank_one(u: &[f64], v: &[f64]) -> DenseMatrix {
        let mut entries = Vec::with_capacity(u.len() * v.len());
        for &ui in u {
            for &vj in v {
                entries.push(ui * vj);
            }
        }
        DenseMatrix::new(u.len(), v.len(), entries).unwrap()
    }

    #[test]
    fn power_iteration_rank_one_closed_form() {
        // ||uv^T||_{p->q} = ||u||_q ||v||_{p*}
        let u = [1.0, -2.0, 0.5];
        let v = [0.3, 1.0];
        let a = rank_one(&u, &v);
        for &(p, q) in &[(f64::INFINITY, 1.0), (4.0, 4.0 / 3.0), (2.0, 2.0), (3.0, 1.5)] {
            let expected = lp_norm(&u, q) * lp_norm(&v, dual_exponent(p));
            let (value, x) = norm_power(&a, p, q, 10, 1).unwrap();
            assert_relative_eq!(value, expected, epsilon = 1e-9);
            assert_abs_diff_eq!(lp_norm(&x, p), 1.0, epsilon = 1e-12);
        }
    }

    #[test]
    fn identity_norm_is_counting_ratio() {
        // ||I_n||_{p->q} = n^(1/q - 1/p) for p >= q (all-ones maximizer)
        let id3 = DenseMatrix::new(
            3,
            3,
            vec![1.0, 0.0, 0.0, 0.0, 1.0, 0.0, 0.0, 0.0, 1.0],
        )
        .unwrap();
        for &(p, q) in &[(f64::INFINITY, 1.0), (4.0, 2.0), (3.0, 3.0)] {
            let inv_p = if p.is_infinite() { 0.0 } else { 1.0 / p };
            let expected = 3f64.powf(1.0 / q - inv_p);
            let (value, _) = norm_power(&id3, p, q, 10, 2).unwrap();
            assert_relative_eq!(value, expected, epsilon = 1e-9);
        }
    }

    #[test]
    fn grid_agrees_with_power_iteration() {
        let a = DenseMatrix::new(2, 2, vec![1.0, 0.0, 0.0, 1.0]).unwrap();
        assert_relative_eq!(
            norm_grid(&a, f64::INFINITY, 1.0, 2000).unwrap(),
            2.0,
            epsilon = 1e-5
        );
        assert_eq!(norm_grid(&DenseMatrix::new(1, 1, vec![-2.5]).unwrap(), 3.0, 1.5, 8).unwrap(), 2.5);

        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..5 {
            let a = DenseMatrix::gaussian(3, 2, &mut rng);
            let (power, _) = norm_power(&a, 3.0, 3.0, 20, 7).unwrap();
            let grid = norm_grid(&a, 3.0, 3.0, 4000).unwrap();
            assert!(grid <= power + 1e-6, "grid {grid} power {power}");
            assert!(grid >= power - 5e-3 * power, "grid {grid} power {power}");
        }
        let wide = DenseMatrix::zeros(2, 4);
        assert!(norm_grid(&wide, 2.0, 2.0, 16).is_err());
    }

    #[test]
    fn duality_on_random_instances() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for &(p, q) in &[(f64::INFINITY, 1.0), (4.0, 4.0 / 3.0), (2.0, 2.0)] {
            let a = DenseMatrix::gaussian(3, 3, &mut rng);
            let report = duality_check(&a, p, q).unwrap();
            assert!(report.pass, "{report:?}");
        }
    }

    #[test]
    fn kron_multiplicativity() {
        let id2 = DenseMatrix::new(2, 2, vec![1.0, 0.0, 0.0, 1.0]).unwrap();
        let report = kron_check(&id2, &id2, 3.0, 3.0).unwrap();
        assert!(report.pass);
        assert_relative_eq!(report.norm_kron, 1.0, epsilon = 1e-6);

        let scalar = DenseMatrix::new(1, 1, vec![-3.0]).unwrap();
        let other = DenseMatrix::new(1, 1, vec![0.5]).unwrap();
        let report = kron_check(&scalar, &other, 2.0, 4.0).unwrap();
        assert_relative_eq!(report.norm_kron, 1.5, epsilon = 1e-9);

        assert!(kron_check(&id2, &id2, 3.0, 2.0).is_err());
    }

    #[test]
    fn signed_permutation_invariance() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let a = DenseMatrix::gaussian(3, 3, &mut rng);
        // P A Q with P = row swap + sign flip, Q = column swap
        let p_mat =
            DenseMatrix::new(3, 3, vec![0.0, -1.0, 0.0, 1.0, 0.0, 0.0, 0.0, 0.0, 1.0]).unwrap();
        let q_mat =
            DenseMatrix::new(3, 3, vec![0.0, 0.0, 1.0, 0.0, -1.0, 0.0, 1.0, 0.0, 0.0]).unwrap();
        let mut permuted_entries = vec![0.0; 9];
        for i in 0..3 {
            for j in 0..3 {
                let mut acc = 0.0;
                for k in 0..3 {
                    for l in 0..3 {
                        acc += p_mat.get(i, k) * a.get(k, l) * q_mat.get(l, j);
                    }
                }
                permuted_entries[i * 3 + j] = acc;
            }
        }
        let permuted = DenseMatrix::new(3, 3, permuted_entries).unwrap();
        for &(p, q) in &[(f64::INFINITY, 1.0), (4.0, 1.5)] {
            let (v1, _) = norm_power(&a, p, q, 20, 9).unwrap();
            let (v2, _) = norm_power(&permuted, p, q, 20, 9).unwrap();
            assert_relative_eq!(v1, v2, epsilon = 1e-8);
        }
    }

    #[test]
    fn embedding_concentrates() {
        let report = embedding_experiment(1, 2000, 4.0, 20, 42).unwrap();
        assert!(report.max_deviation < 0.15, "{report:?}");
        // q = 2: ||Bx||_2 / sqrt(m) concentrates near 1
        let report = embedding_experiment(4, 4000, 2.0, 20, 43).unwrap();
        assert!(report.max_deviation < 0.1, "{report:?}");
        assert!(embedding_experiment(4, 4000, 1.5, 5, 0).is_err());
        assert!(embedding_experiment(4, 200_000, 4.0, 5, 0).is_err());
    }
}
