//! Nesterov's convex relaxation and its dual certificate.
//!
//! The primal program over Gram vectors `u_1..u_m, v_1..v_n` in `R^(m+n)` is
//!
//! ```text
//! CP(A) = max sum_ij A_ij <u_i, v_j>
//!         s.t. sum_i ||u_i||^(q*) <= 1,  sum_j ||v_j||^p <= 1
//! ```
//!
//! (`p = inf` and `q* = inf` turn the sum constraints into per-row unit-ball
//! constraints). The dual picks nonnegative diagonal scalings `(s, t)` making
//! `[[D_s, -A], [-A^T, D_t]]` PSD and pays `(||s||_ry + ||t||_rx)/2` with
//! `rx = (p/2)*`, `ry = (q*/2)*`; any PSD-feasible `(s, t)` upper-bounds
//! `CP(A)` by weak duality, and strong duality makes the optima equal.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matrix::{dot, lp_norm, DenseMatrix};
use crate::oracle::norm_power;
use crate::specfn::{dual_exponent, signed_power, ExponentPair};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

/// Solver knobs shared by the primal and dual routines.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SolveOptions {
    /// Gram dimension; `None` uses the lossless `m + n`.
    pub rank: Option<usize>,
    pub max_iters: usize,
    /// Relative objective-change threshold measured over 50 iterations.
    pub tol: f64,
    /// Random restarts beyond the oracle warm start.
    pub restarts: usize,
    pub seed: u64,
    /// Acceptable primal-dual gap when both sides converge.
    pub gap_tol: f64,
}

impl Default for SolveOptions {
    fn default() -> Self {
        SolveOptions {
            rank: None,
            max_iters: 2000,
            tol: 1e-8,
            restarts: 5,
            seed: 0,
            gap_tol: 1e-4,
        }
    }
}

/// A feasible Gram-vector solution of the relaxation.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GramSolution {
    /// Rows `u_i`, one per matrix row.
    pub u: Vec<Vec<f64>>,
    /// Rows `v_j`, one per matrix column.
    pub v: Vec<Vec<f64>>,
    /// `sum_ij A_ij <u_i, v_j>`.
    pub value: f64,
    pub converged: bool,
}

impl GramSolution {
    /// Worst constraint violation (positive means infeasible by that much).
    pub fn feasibility_slack(&self, pair: &ExponentPair) -> f64 {
        let qstar = pair.qstar();
        let u_slack = constraint_total(&self.u, qstar) - 1.0;
        let v_slack = constraint_total(&self.v, pair.p) - 1.0;
        u_slack.max(v_slack)
    }
}

/// `sum_i ||row_i||^r`, or `max_i ||row_i||` when `r = inf`.
fn constraint_total(rows: &[Vec<f64>], r: f64) -> f64 {
    let norms: Vec<f64> = rows.iter().map(|row| lp_norm(row, 2.0)).collect();
    if r.is_infinite() {
        norms.into_iter().fold(0.0, f64::max)
    } else {
        norms.into_iter().map(|s| s.powf(r)).sum()
    }
}

/// Exact block maximization over `U` for fixed directions `w_i` (the rows of
/// the gradient). Under `sum ||u_i||^r <= 1` the optimum is `u_i` parallel to
/// `w_i` with magnitudes given by the Holder dual of the norm profile; under
/// the `r = inf` per-row constraint every active row becomes a unit vector.
fn block_update(rows: &mut [Vec<f64>], grads: &[Vec<f64>], r: f64) {
    let norms: Vec<f64> = grads.iter().map(|g| lp_norm(g, 2.0)).collect();
    if r.is_infinite() {
        for ((row, grad), &norm) in rows.iter_mut().zip(grads).zip(&norms) {
            if norm > 0.0 {
                for (x, g) in row.iter_mut().zip(grad) {
                    *x = g / norm;
                }
            }
        }
        return;
    }
    let rdual = dual_exponent(r);
    let profile = lp_norm(&norms, rdual);
    if profile == 0.0 {
        return;
    }
    for ((row, grad), &norm) in rows.iter_mut().zip(grads).zip(&norms) {
        if norm == 0.0 {
            for x in row.iter_mut() {
                *x = 0.0;
            }
            continue;
        }
        // magnitude (norm/profile)^(rdual - 1) on the unit direction
        let magnitude = (norm / profile).powf(rdual - 1.0);
        for (x, g) in row.iter_mut().zip(grad) {
            *x = magnitude * g / norm;
        }
    }
}

fn gradient_rows_u(a: &DenseMatrix, v: &[Vec<f64>], rank: usize) -> Vec<Vec<f64>> {
    // (A V)_i = sum_j A_ij v_j
    (0..a.m)
        .map(|i| {
            let mut acc = vec![0.0; rank];
            for (j, vj) in v.iter().enumerate() {
                let aij = a.get(i, j);
                if aij == 0.0 {
                    continue;
                }
                for (x, vv) in acc.iter_mut().zip(vj) {
                    *x += aij * vv;
                }
            }
            acc
        })
        .collect()
}

fn gradient_rows_v(a: &DenseMatrix, u: &[Vec<f64>], rank: usize) -> Vec<Vec<f64>> {
    (0..a.n)
        .map(|j| {
            let mut acc = vec![0.0; rank];
            for (i, ui) in u.iter().enumerate() {
                let aij = a.get(i, j);
                if aij == 0.0 {
                    continue;
                }
                for (x, uu) in acc.iter_mut().zip(ui) {
                    *x += aij * uu;
                }
            }
            acc
        })
        .collect()
}

fn objective(a: &DenseMatrix, u: &[Vec<f64>], v: &[Vec<f64>]) -> f64 {
    let mut acc = 0.0;
    for (i, ui) in u.iter().enumerate() {
        for (j, vj) in v.iter().enumerate() {
            let aij = a.get(i, j);
            if aij != 0.0 {
                acc += aij * dot(ui, vj);
            }
        }
    }
    acc
}

/// Scales rows so their constraint holds with equality (or per-row for inf).
fn project_rows(rows: &mut [Vec<f64>], r: f64) {
    if r.is_infinite() {
        for row in rows.iter_mut() {
            let norm = lp_norm(row, 2.0);
            if norm > 0.0 {
                for x in row.iter_mut() {
                    *x /= norm;
                }
            }
        }
        return;
    }
    let total = constraint_total(rows, r);
    if total > 0.0 {
        let scale = total.powf(-1.0 / r);
        for row in rows.iter_mut() {
            for x in row.iter_mut() {
                *x *= scale;
            }
        }
    }
}

fn ascend(
    a: &DenseMatrix,
    pair: &ExponentPair,
    mut u: Vec<Vec<f64>>,
    mut v: Vec<Vec<f64>>,
    rank: usize,
    opts: &SolveOptions,
) -> (Vec<Vec<f64>>, Vec<Vec<f64>>, f64, bool) {
    let qstar = pair.qstar();
    let mut history: Vec<f64> = Vec::with_capacity(opts.max_iters);
    let mut value = objective(a, &u, &v);
    let mut converged = false;
    for iter in 0..opts.max_iters {
        let grads_u = gradient_rows_u(a, &v, rank);
        block_update(&mut u, &grads_u, qstar);
        let grads_v = gradient_rows_v(a, &u, rank);
        block_update(&mut v, &grads_v, pair.p);
        value = objective(a, &u, &v);
        history.push(value);
        if iter >= 50 {
            let past = history[iter - 50];
            if (value - past).abs() <= opts.tol * value.abs().max(1.0) {
                converged = true;
                break;
            }
        }
    }
    (u, v, value, converged)
}

/// Solves the relaxation by block-coordinate ascent on the Gram factors.
///
/// Each half-step is the exact constrained maximizer for its block, so the
/// objective is nondecreasing; one start is warm (rank-one lift of the power
/// iteration witness) and the rest are random. The best run is returned with
/// its convergence flag.
pub fn solve_cp(a: &DenseMatrix, pair: &ExponentPair, opts: &SolveOptions) -> Result<GramSolution> {
    let rank = opts.rank.unwrap_or(a.m + a.n).max(1);
    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed ^ 0x6c70_5f63);
    let qstar = pair.qstar();

    let mut best: Option<GramSolution> = None;
    let mut consider = |sol: GramSolution| {
        if best.as_ref().is_none_or(|b| sol.value > b.value) {
            best = Some(sol);
        }
    };

    // warm start: rank-one lift of the Holder ascent witness
    {
        let (_, x) = norm_power(a, pair.p, pair.q, 8, opts.seed ^ 0x6f72)?;
        let z = a.matvec(&x);
        let zq = lp_norm(&z, pair.q);
        if zq > 0.0 {
            let y: Vec<f64> = if pair.q == 1.0 {
                z.iter().map(|&zi| if zi == 0.0 { 0.0 } else { zi.signum() }).collect()
            } else {
                let scale = zq.powf(pair.q - 1.0);
                z.iter().map(|&zi| signed_power(zi, pair.q - 1.0) / scale).collect()
            };
            let mut u: Vec<Vec<f64>> = y
                .iter()
                .map(|&yi| {
                    let mut row = vec![0.0; rank];
                    row[0] = yi;
                    row
                })
                .collect();
            let mut v: Vec<Vec<f64>> = x
                .iter()
                .map(|&xj| {
                    let mut row = vec![0.0; rank];
                    row[0] = xj;
                    row
                })
                .collect();
            project_rows(&mut u, qstar);
            project_rows(&mut v, pair.p);
            let (u, v, value, converged) = ascend(a, pair, u, v, rank, opts);
            consider(GramSolution { u, v, value, converged });
        }
    }

    for _ in 0..opts.restarts {
        let mut u: Vec<Vec<f64>> = (0..a.m)
            .map(|_| (0..rank).map(|_| rng.sample::<f64, _>(StandardNormal)).collect())
            .collect();
        let mut v: Vec<Vec<f64>> = (0..a.n)
            .map(|_| (0..rank).map(|_| rng.sample::<f64, _>(StandardNormal)).collect())
            .collect();
        project_rows(&mut u, qstar);
        project_rows(&mut v, pair.p);
        let (u, v, value, converged) = ascend(a, pair, u, v, rank, opts);
        consider(GramSolution { u, v, value, converged });
    }

    best.ok_or_else(|| Error::Numerical("no feasible iterate produced".into()))
}

/// A dual scaling pair with its PSD diagnostic.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DualCertificate {
    pub s: Vec<f64>,
    pub t: Vec<f64>,
    /// `(||s||_ry + ||t||_rx) / 2`, an upper bound on `CP(A)` when valid.
    pub value: f64,
    /// Smallest eigenvalue of `[[D_s, -A], [-A^T, D_t]]`.
    pub min_eig: f64,
    /// Whether `min_eig >= -1e-7`, i.e. the bound may be trusted.
    pub valid: bool,
}

fn block_matrix(a: &DenseMatrix, s: &[f64], t: &[f64]) -> DMatrix<f64> {
    let dim = a.m + a.n;
    DMatrix::from_fn(dim, dim, |r, c| {
        if r < a.m && c < a.m {
            if r == c { s[r] } else { 0.0 }
        } else if r >= a.m && c >= a.m {
            if r == c { t[r - a.m] } else { 0.0 }
        } else if r < a.m {
            -a.get(r, c - a.m)
        } else {
            -a.get(c, r - a.m)
        }
    })
}

fn min_eig_with_vector(a: &DenseMatrix, s: &[f64], t: &[f64]) -> (f64, Vec<f64>) {
    let eig = nalgebra::SymmetricEigen::new(block_matrix(a, s, t));
    let mut min_idx = 0;
    for (i, &val) in eig.eigenvalues.iter().enumerate() {
        if val < eig.eigenvalues[min_idx] {
            min_idx = i;
        }
    }
    (eig.eigenvalues[min_idx], eig.eigenvectors.column(min_idx).iter().copied().collect())
}

struct DualObjective {
    rx: f64,
    ry: f64,
}

impl DualObjective {
    fn new(pair: &ExponentPair) -> Self {
        let half = |r: f64| if r.is_infinite() { f64::INFINITY } else { r / 2.0 };
        DualObjective {
            ry: dual_exponent(half(pair.qstar())),
            rx: dual_exponent(half(pair.p)),
        }
    }

    fn value(&self, s: &[f64], t: &[f64]) -> f64 {
        0.5 * (lp_norm(s, self.ry) + lp_norm(t, self.rx))
    }

    /// Repairs PSD by a uniform diagonal shift, then rebalances the two
    /// blocks (scaling `s` by `alpha` and `t` by `1/alpha` preserves PSD).
    fn normalize(&self, a: &DenseMatrix, s: &mut Vec<f64>, t: &mut Vec<f64>) {
        let (min_eig, _) = min_eig_with_vector(a, s, t);
        if min_eig < 0.0 {
            let shift = -min_eig + 1e-12;
            for x in s.iter_mut() {
                *x += shift;
            }
            for x in t.iter_mut() {
                *x += shift;
            }
        }
        let xi_y = lp_norm(s, self.ry);
        let xi_x = lp_norm(t, self.rx);
        if xi_y > 0.0 && xi_x > 0.0 {
            let alpha = (xi_x / xi_y).sqrt();
            for x in s.iter_mut() {
                *x *= alpha;
            }
            for x in t.iter_mut() {
                *x /= alpha;
            }
        }
        // numerical safety net after rescaling
        let (min_eig, _) = min_eig_with_vector(a, s, t);
        if min_eig < 0.0 {
            let shift = -min_eig + 1e-12;
            for x in s.iter_mut() {
                *x += shift;
            }
            for x in t.iter_mut() {
                *x += shift;
            }
        }
    }

    fn subgradient(&self, xs: &[f64], r: f64) -> Vec<f64> {
        if r == 1.0 {
            return vec![0.5; xs.len()];
        }
        if r.is_infinite() {
            let mut g = vec![0.0; xs.len()];
            let mut arg = 0usize;
            for (i, x) in xs.iter().enumerate() {
                if x.abs() > xs[arg].abs() {
                    arg = i;
                }
            }
            g[arg] = 0.5 * xs[arg].signum();
            return g;
        }
        let norm = lp_norm(xs, r);
        if norm == 0.0 {
            return vec![0.0; xs.len()];
        }
        xs.iter().map(|&x| 0.5 * x.signum() * (x.abs() / norm).powf(r - 1.0)).collect()
    }
}

/// Produces a dual certificate for `CP(A)`.
///
/// Candidates come from the stationarity relations of a primal solve
/// (`s_i = ||(AV)_i|| / ||u_i||`) and from diagonal dominance; both are made
/// PSD by a diagonal shift and rebalanced, then polished by projected
/// subgradient steps on the objective with an eigenvalue penalty. The best
/// valid iterate wins; validity is always re-checked via `min_eig`.
pub fn solve_dual(a: &DenseMatrix, pair: &ExponentPair, opts: &SolveOptions) -> Result<DualCertificate> {
    let objective = DualObjective::new(pair);

    let mut candidates: Vec<(Vec<f64>, Vec<f64>)> = Vec::new();

    // stationarity candidate from the primal solution
    let primal = solve_cp(a, pair, opts)?;
    let ratio_norm = |grad: &[Vec<f64>], rows: &[Vec<f64>]| -> Vec<f64> {
        grad.iter()
            .zip(rows)
            .map(|(g, row)| {
                let rn = lp_norm(row, 2.0);
                if rn <= 1e-12 { 0.0 } else { lp_norm(g, 2.0) / rn }
            })
            .collect()
    };
    let rank = primal.u.first().map_or(a.m + a.n, Vec::len);
    let s_kkt = ratio_norm(&gradient_rows_u(a, &primal.v, rank), &primal.u);
    let t_kkt = ratio_norm(&gradient_rows_v(a, &primal.u, rank), &primal.v);
    candidates.push((s_kkt, t_kkt));

    // diagonal dominance candidate
    let s_dom: Vec<f64> = (0..a.m).map(|i| a.row(i).iter().map(|x| x.abs()).sum()).collect();
    let t_dom: Vec<f64> =
        (0..a.n).map(|j| (0..a.m).map(|i| a.get(i, j).abs()).sum()).collect();
    candidates.push((s_dom, t_dom));

    let mut best: Option<(f64, Vec<f64>, Vec<f64>)> = None;
    for (mut s, mut t) in candidates {
        objective.normalize(a, &mut s, &mut t);
        let value = objective.value(&s, &t);
        if best.as_ref().is_none_or(|(bv, _, _)| value < *bv) {
            best = Some((value, s, t));
        }
    }
    let (_, mut s, mut t) = best.clone().expect("at least one candidate");

    // subgradient polish with eigenvalue penalty
    let scale = objective.value(&s, &t).max(1.0);
    let penalty = 10.0 * scale;
    let step0 = 0.05 * (s.iter().chain(t.iter()).sum::<f64>() / (a.m + a.n) as f64).max(1e-6);
    for iter in 0..200 {
        let (min_eig, vec) = min_eig_with_vector(a, &s, &t);
        let mut gs = objective.subgradient(&s, objective.ry);
        let mut gt = objective.subgradient(&t, objective.rx);
        if min_eig < 0.0 {
            for (i, g) in gs.iter_mut().enumerate() {
                *g -= penalty * vec[i] * vec[i];
            }
            for (j, g) in gt.iter_mut().enumerate() {
                *g -= penalty * vec[a.m + j] * vec[a.m + j];
            }
        }
        let step = step0 / ((iter + 1) as f64).sqrt();
        for (x, g) in s.iter_mut().zip(&gs) {
            *x = (*x - step * g).max(0.0);
        }
        for (x, g) in t.iter_mut().zip(&gt) {
            *x = (*x - step * g).max(0.0);
        }
        let mut cs = s.clone();
        let mut ct = t.clone();
        objective.normalize(a, &mut cs, &mut ct);
        let value = objective.value(&cs, &ct);
        if best.as_ref().is_none_or(|(bv, _, _)| value < *bv) {
            best = Some((value, cs, ct));
        }
    }

    let (value, s, t) = best.expect("candidate tracked");
    let (min_eig, _) = min_eig_with_vector(a, &s, &t);
    Ok(DualCertificate { s, t, value, min_eig, valid: min_eig >= -1e-7 })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::{assert_abs_diff_eq, assert_relative_eq};

    fn opts(seed: u64) -> SolveOptions {
        SolveOptions { seed, ..SolveOptions::default() }
    }

    #[test]
    fn trivial_one_by_one() {
        let a = DenseMatrix::new(1, 1, vec![1.0]).unwrap();
        let pair = ExponentPair::new(f64::INFINITY, 1.0).unwrap();
        let sol = solve_cp(&a, &pair, &opts(0)).unwrap();
        assert_relative_eq!(sol.value, 1.0, epsilon = 1e-8);
        assert!(sol.feasibility_slack(&pair) <= 1e-8);

        let dual = solve_dual(&a, &pair, &opts(0)).unwrap();
        assert!(dual.valid);
        assert_relative_eq!(dual.value, 1.0, epsilon = 1e-6);
        assert_abs_diff_eq!(dual.min_eig, 0.0, epsilon = 1e-6);
    }

    #[test]
    fn identity_two_by_two_grothendieck() {
        let a = DenseMatrix::new(2, 2, vec![1.0, 0.0, 0.0, 1.0]).unwrap();
        let pair = ExponentPair::new(f64::INFINITY, 1.0).unwrap();
        let sol = solve_cp(&a, &pair, &opts(1)).unwrap();
        // ||I_2||_{inf->1} = 2 and CP is sandwiched by the dual at 2
        assert!(sol.value >= 2.0 - 1e-6, "value {}", sol.value);
        let dual = solve_dual(&a, &pair, &opts(1)).unwrap();
        assert!(dual.valid);
        assert!(dual.value >= sol.value - 1e-6);
        assert_relative_eq!(dual.value, 2.0, epsilon = 1e-3);
    }

    #[test]
    fn rank_one_matches_closed_form() {
        let u = [0.8, -0.6, 1.2];
        let v = [1.0, 0.4];
        let mut entries = Vec::new();
        for &ui in &u {
            for &vj in &v {
                entries.push(ui * vj);
            }
        }
        let a = DenseMatrix::new(3, 2, entries).unwrap();
        for &(p, q) in &[(f64::INFINITY, 1.0), (4.0, 4.0 / 3.0)] {
            let pair = ExponentPair::new(p, q).unwrap();
            let expected = lp_norm(&u, q) * lp_norm(&v, dual_exponent(p));
            let sol = solve_cp(&a, &pair, &opts(2)).unwrap();
            // rank-one matrices have CP(A) = ||A||_{p->q}
            assert_relative_eq!(sol.value, expected, epsilon = 1e-5);
        }
    }

    #[test]
    fn weak_duality_on_random_instances() {
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        let pair = ExponentPair::new(4.0, 4.0 / 3.0).unwrap();
        for _ in 0..3 {
            let a = DenseMatrix::gaussian(3, 3, &mut rng);
            let sol = solve_cp(&a, &pair, &opts(3)).unwrap();
            let dual = solve_dual(&a, &pair, &opts(3)).unwrap();
            assert!(dual.valid, "{dual:?}");
            assert!(
                dual.value >= sol.value - 1e-7,
                "dual {} below primal {}",
                dual.value,
                sol.value
            );
            // strong duality should make them close after polish
            assert!(
                dual.value <= sol.value * 1.05 + 1e-6,
                "dual {} far above primal {}",
                dual.value,
                sol.value
            );
        }
    }

    #[test]
    fn scale_equivariance() {
        let mut rng = ChaCha8Rng::seed_from_u64(33);
        let a = DenseMatrix::gaussian(4, 3, &mut rng);
        let pair = ExponentPair::new(f64::INFINITY, 2.0).unwrap();
        let base = solve_cp(&a, &pair, &opts(4)).unwrap();
        for &c in &[2.5, -3.0] {
            let scaled = solve_cp(&a.scale(c), &pair, &opts(4)).unwrap();
            assert_relative_eq!(scaled.value, c.abs() * base.value, max_relative = 1e-6);
        }
    }

    #[test]
    fn constraints_active_at_convergence() {
        let mut rng = ChaCha8Rng::seed_from_u64(55);
        let a = DenseMatrix::gaussian(3, 4, &mut rng);
        let pair = ExponentPair::new(4.0, 1.5).unwrap();
        let sol = solve_cp(&a, &pair, &opts(5)).unwrap();
        assert!(sol.converged);
        let u_total = constraint_total(&sol.u, pair.qstar());
        let v_total = constraint_total(&sol.v, pair.p);
        assert_abs_diff_eq!(u_total, 1.0, epsilon = 1e-6);
        assert_abs_diff_eq!(v_total, 1.0, epsilon = 1e-6);
    }

    #[test]
    fn zero_matrix_is_handled() {
        let a = DenseMatrix::zeros(2, 3);
        let pair = ExponentPair::new(3.0, 1.5).unwrap();
        let sol = solve_cp(&a, &pair, &opts(6)).unwrap();
        assert_eq!(sol.value, 0.0);
        let dual = solve_dual(&a, &pair, &opts(6)).unwrap();
        assert!(dual.valid);
        assert!(dual.value <= 1e-9);
    }
}
