//! Dense matrices and the handful of vector-norm helpers the solvers share.

use std::path::Path;

use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A real `m x n` matrix stored row-major.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DenseMatrix {
    pub m: usize,
    pub n: usize,
    pub entries: Vec<f64>,
}

impl DenseMatrix {
    pub fn new(m: usize, n: usize, entries: Vec<f64>) -> Result<Self> {
        if m == 0 || n == 0 {
            return Err(Error::Domain("matrix dimensions must be at least 1x1".into()));
        }
        if entries.len() != m * n {
            return Err(Error::Domain(format!(
                "expected {} entries for a {m}x{n} matrix, got {}",
                m * n,
                entries.len()
            )));
        }
        if entries.iter().any(|e| !e.is_finite()) {
            return Err(Error::Domain("matrix entries must be finite".into()));
        }
        Ok(DenseMatrix { m, n, entries })
    }

    pub fn zeros(m: usize, n: usize) -> Self {
        DenseMatrix { m, n, entries: vec![0.0; m * n] }
    }

    /// Matrix with i.i.d. standard Gaussian entries.
    pub fn gaussian<R: Rng + ?Sized>(m: usize, n: usize, rng: &mut R) -> Self {
        let entries = (0..m * n).map(|_| rng.sample(StandardNormal)).collect();
        DenseMatrix { m, n, entries }
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.entries[i * self.n + j]
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.entries[i * self.n..(i + 1) * self.n]
    }

    pub fn transpose(&self) -> DenseMatrix {
        let mut entries = vec![0.0; self.m * self.n];
        for i in 0..self.m {
            for j in 0..self.n {
                entries[j * self.m + i] = self.get(i, j);
            }
        }
        DenseMatrix { m: self.n, n: self.m, entries }
    }

    pub fn scale(&self, c: f64) -> DenseMatrix {
        DenseMatrix { m: self.m, n: self.n, entries: self.entries.iter().map(|e| c * e).collect() }
    }

    /// `A x`.
    pub fn matvec(&self, x: &[f64]) -> Vec<f64> {
        debug_assert_eq!(x.len(), self.n);
        (0..self.m).map(|i| dot(self.row(i), x)).collect()
    }

    /// `A^T y`.
    pub fn tr_matvec(&self, y: &[f64]) -> Vec<f64> {
        debug_assert_eq!(y.len(), self.m);
        let mut out = vec![0.0; self.n];
        for (i, &yi) in y.iter().enumerate() {
            if yi == 0.0 {
                continue;
            }
            for (o, &aij) in out.iter_mut().zip(self.row(i)) {
                *o += yi * aij;
            }
        }
        out
    }

    /// `y^T A x`.
    pub fn bilinear(&self, y: &[f64], x: &[f64]) -> f64 {
        dot(y, &self.matvec(x))
    }

    /// Kronecker product, row index `i1 * B.m + i2`, column `j1 * B.n + j2`.
    pub fn kron(&self, other: &DenseMatrix) -> DenseMatrix {
        let m = self.m * other.m;
        let n = self.n * other.n;
        let mut entries = vec![0.0; m * n];
        for i1 in 0..self.m {
            for j1 in 0..self.n {
                let a = self.get(i1, j1);
                for i2 in 0..other.m {
                    for j2 in 0..other.n {
                        entries[(i1 * other.m + i2) * n + j1 * other.n + j2] = a * other.get(i2, j2);
                    }
                }
            }
        }
        DenseMatrix { m, n, entries }
    }

    /// Parses a dense CSV body, one row per line.
    pub fn from_csv_str(text: &str) -> Result<Self> {
        let mut reader = csv::ReaderBuilder::new()
            .has_headers(false)
            .trim(csv::Trim::All)
            .flexible(false)
            .from_reader(text.as_bytes());
        let mut entries = Vec::new();
        let mut n = None;
        let mut m = 0;
        for record in reader.records() {
            let record = record?;
            let row: Vec<f64> = record
                .iter()
                .map(|field| {
                    field
                        .parse::<f64>()
                        .map_err(|_| Error::Parse(format!("bad matrix entry {field:?}")))
                })
                .collect::<Result<_>>()?;
            match n {
                None => n = Some(row.len()),
                Some(cols) if cols != row.len() => {
                    return Err(Error::Parse(format!(
                        "ragged CSV: row {m} has {} columns, expected {cols}",
                        row.len()
                    )));
                }
                _ => {}
            }
            entries.extend(row);
            m += 1;
        }
        let n = n.ok_or_else(|| Error::Parse("empty CSV matrix".into()))?;
        DenseMatrix::new(m, n, entries)
    }

    /// Parses the JSON form `{"m": .., "n": .., "entries": [..]}`.
    pub fn from_json_str(text: &str) -> Result<Self> {
        let raw: DenseMatrix = serde_json::from_str(text)?;
        DenseMatrix::new(raw.m, raw.n, raw.entries)
    }

    /// Reads a matrix file, accepting either format; `.json` or a leading
    /// `{` selects JSON, anything else is parsed as CSV.
    pub fn from_path(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        let looks_json = path.extension().is_some_and(|e| e == "json")
            || text.trim_start().starts_with('{');
        if looks_json {
            DenseMatrix::from_json_str(&text)
        } else {
            DenseMatrix::from_csv_str(&text)
        }
    }
}

#[inline]
pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// `l_p` norm with the `p = inf` convention; counting measure.
pub fn lp_norm(xs: &[f64], p: f64) -> f64 {
    if p.is_infinite() {
        xs.iter().fold(0.0, |acc, x| acc.max(x.abs()))
    } else if p == 1.0 {
        xs.iter().map(|x| x.abs()).sum()
    } else if p == 2.0 {
        dot(xs, xs).sqrt()
    } else {
        xs.iter().map(|x| x.abs().powf(p)).sum::<f64>().powf(1.0 / p)
    }
}

/// Expectation-measure `l_p` norm, `(avg |x_i|^p)^(1/p)`.
pub fn lp_norm_expectation(xs: &[f64], p: f64) -> f64 {
    if p.is_infinite() {
        lp_norm(xs, p)
    } else {
        lp_norm(xs, p) / (xs.len() as f64).powf(1.0 / p)
    }
}

/// Scales `xs` onto the unit `l_p` sphere; zero vectors are left unchanged.
pub fn normalize_lp(xs: &mut [f64], p: f64) {
    let norm = lp_norm(xs, p);
    if norm > 0.0 {
        for x in xs {
            *x /= norm;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn csv_and_json_agree() {
        let csv = DenseMatrix::from_csv_str("1, 2.5, -3\n4, 5, 6\n").unwrap();
        let json =
            DenseMatrix::from_json_str(r#"{"m":2,"n":3,"entries":[1,2.5,-3,4,5,6]}"#).unwrap();
        assert_eq!(csv, json);
        assert_eq!(csv.get(1, 2), 6.0);
        assert!(DenseMatrix::from_csv_str("1,2\n3\n").is_err());
        assert!(DenseMatrix::from_json_str(r#"{"m":2,"n":2,"entries":[1]}"#).is_err());
    }

    #[test]
    fn matvec_and_bilinear() {
        let a = DenseMatrix::new(2, 3, vec![1.0, 0.0, 2.0, -1.0, 3.0, 1.0]).unwrap();
        assert_eq!(a.matvec(&[1.0, 1.0, 1.0]), vec![3.0, 3.0]);
        assert_eq!(a.tr_matvec(&[1.0, 2.0]), vec![-1.0, 6.0, 4.0]);
        assert_abs_diff_eq!(a.bilinear(&[1.0, -1.0], &[1.0, 1.0, 1.0]), 0.0);
        assert_eq!(a.transpose().transpose(), a);
    }

    #[test]
    fn kron_of_identities() {
        let id2 = DenseMatrix::new(2, 2, vec![1.0, 0.0, 0.0, 1.0]).unwrap();
        let k = id2.kron(&id2);
        for i in 0..4 {
            for j in 0..4 {
                assert_eq!(k.get(i, j), if i == j { 1.0 } else { 0.0 });
            }
        }
    }

    #[test]
    fn norms_and_conversion() {
        let x = [3.0, -4.0];
        assert_abs_diff_eq!(lp_norm(&x, 2.0), 5.0);
        assert_abs_diff_eq!(lp_norm(&x, 1.0), 7.0);
        assert_abs_diff_eq!(lp_norm(&x, f64::INFINITY), 4.0);
        // counting norm = expectation norm * n^(1/p)
        assert_abs_diff_eq!(
            lp_norm(&x, 3.0),
            lp_norm_expectation(&x, 3.0) * 2f64.powf(1.0 / 3.0),
            epsilon = 1e-14
        );
    }
}
