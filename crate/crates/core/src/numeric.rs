//! Dense linear-algebra kernel with a relative tolerance policy.
//!
//! SVD is the only primitive used for rank and null-space decisions. Every
//! threshold is scaled by the largest singular value (or largest entry) of
//! the matrix under test.

use itertools::Itertools;
use nalgebra::{DMatrix, DVector};
use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

pub type Matrix = DMatrix<f64>;
pub type Vector = DVector<f64>;

/// Largest number of row subsets an exhaustive regularity scan may visit.
pub const EXHAUSTIVE_SUBSET_CAP: u128 = 1_000_000;
/// Subsets drawn by a sampled scan when no other count is requested.
pub const DEFAULT_SAMPLE_SIZE: usize = 10_000;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum NumericError {
    #[error("matrix is {rows}x{cols}, expected a square matrix")]
    NotSquare { rows: usize, cols: usize },
    #[error("submatrix size {k} exceeds row count {n}")]
    TooManyColumns { k: usize, n: usize },
    #[error("matrix has no columns")]
    NoColumns,
    #[error("exhaustive scan needs C({n},{k}) = {count} subsets, cap is {cap}")]
    ExhaustiveCap { n: usize, k: usize, count: u128, cap: u128 },
    #[error("tolerance {name} = {value} must lie strictly between 0 and 1")]
    BadTolerance { name: &'static str, value: f64 },
}

/// Relative tolerances used by every numerical decision in the crate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ToleranceProfile {
    /// Singular values at or below `rank_rel_tol * sigma_max` count as zero.
    pub rank_rel_tol: f64,
    /// Entries and residuals at or below `zero_rel_tol * scale` count as zero.
    pub zero_rel_tol: f64,
    /// Smallest eigenvalue may dip to `-psd_rel_tol * lambda_max`.
    pub psd_rel_tol: f64,
    /// Every scaling entry must reach `xi_min_rel * max |xi|`.
    pub xi_min_rel: f64,
}

impl Default for ToleranceProfile {
    fn default() -> Self {
        Self {
            rank_rel_tol: 1e-9,
            zero_rel_tol: 1e-9,
            psd_rel_tol: 1e-9,
            xi_min_rel: 1e-6,
        }
    }
}

impl ToleranceProfile {
    pub fn validate(&self) -> Result<(), NumericError> {
        for (name, value) in [
            ("rank_rel_tol", self.rank_rel_tol),
            ("zero_rel_tol", self.zero_rel_tol),
            ("psd_rel_tol", self.psd_rel_tol),
            ("xi_min_rel", self.xi_min_rel),
        ] {
            if !(value > 0.0 && value < 1.0) {
                return Err(NumericError::BadTolerance { name, value });
            }
        }
        Ok(())
    }
}

/// Largest absolute entry, 0 for empty matrices.
pub fn max_abs(m: &Matrix) -> f64 {
    m.iter().fold(0.0, |acc, v| acc.max(v.abs()))
}

pub fn singular_values(m: &Matrix) -> Vector {
    if m.is_empty() {
        return Vector::zeros(0);
    }
    m.clone().svd(false, false).singular_values
}

fn sigma_max(sv: &Vector) -> f64 {
    sv.iter().fold(0.0, |acc: f64, &s| acc.max(s))
}

/// Number of singular values above `rank_rel_tol * sigma_max`.
pub fn numeric_rank(m: &Matrix, tol: &ToleranceProfile) -> usize {
    let sv = singular_values(m);
    let smax = sigma_max(&sv);
    if smax == 0.0 {
        return 0;
    }
    sv.iter().filter(|&&s| s > tol.rank_rel_tol * smax).count()
}

/// Orthonormal basis (as columns) of the numerical null space of `m`.
///
/// Wide matrices are padded with zero rows so the SVD yields a full set of
/// right singular vectors.
pub fn null_space_basis(m: &Matrix, tol: &ToleranceProfile) -> Matrix {
    let (rows, cols) = m.shape();
    if cols == 0 {
        return Matrix::zeros(0, 0);
    }
    let padded = if rows < cols {
        let mut p = Matrix::zeros(cols, cols);
        p.rows_mut(0, rows).copy_from(m);
        p
    } else {
        m.clone()
    };
    let svd = padded.svd(false, true);
    let v_t = svd.v_t.expect("right singular vectors requested");
    let smax = sigma_max(&svd.singular_values);
    let null_rows: Vec<usize> = if smax == 0.0 {
        (0..v_t.nrows()).collect()
    } else {
        (0..v_t.nrows())
            .filter(|&i| svd.singular_values[i] <= tol.rank_rel_tol * smax)
            .collect()
    };
    let mut basis = Matrix::zeros(cols, null_rows.len());
    for (c, &i) in null_rows.iter().enumerate() {
        basis.set_column(c, &v_t.row(i).transpose());
    }
    basis
}

/// Orthonormal basis (as columns) of the span of the rows of `m`.
pub fn row_space_basis(m: &Matrix, tol: &ToleranceProfile) -> Matrix {
    let cols = m.ncols();
    if m.nrows() == 0 || cols == 0 {
        return Matrix::zeros(cols, 0);
    }
    let svd = m.clone().svd(false, true);
    let v_t = svd.v_t.expect("right singular vectors requested");
    let smax = sigma_max(&svd.singular_values);
    let keep: Vec<usize> = (0..v_t.nrows())
        .filter(|&i| smax > 0.0 && svd.singular_values[i] > tol.rank_rel_tol * smax)
        .collect();
    let mut basis = Matrix::zeros(cols, keep.len());
    for (c, &i) in keep.iter().enumerate() {
        basis.set_column(c, &v_t.row(i).transpose());
    }
    basis
}

/// Extreme eigenvalues `(lambda_min, lambda_max)` of `(m + m^T) / 2`.
pub fn symmetric_eigen_bounds(m: &Matrix) -> Result<(f64, f64), NumericError> {
    let (rows, cols) = m.shape();
    if rows != cols {
        return Err(NumericError::NotSquare { rows, cols });
    }
    if rows == 0 {
        return Ok((0.0, 0.0));
    }
    let sym = (m + m.transpose()) * 0.5;
    let eig = sym.symmetric_eigen().eigenvalues;
    let lo = eig.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = eig.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    Ok((lo, hi))
}

/// Binomial coefficient, saturating at `u128::MAX`.
pub fn binomial(n: usize, k: usize) -> u128 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = match acc.checked_mul((n - i) as u128) {
            Some(v) => v / (i as u128 + 1),
            None => return u128::MAX,
        };
    }
    acc
}

/// How many maximal row subsets a regularity scan visits.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "mode")]
pub enum RegularityMode {
    /// Every k-subset of rows, in lexicographic order.
    Exhaustive,
    /// `samples` uniformly random k-subsets drawn from a ChaCha20 stream.
    Sampled { samples: usize, seed: u64 },
}

impl RegularityMode {
    /// Exhaustive when C(n, k) is within the cap, sampled otherwise.
    pub fn auto(n: usize, k: usize, seed: u64) -> Self {
        if binomial(n, k) <= EXHAUSTIVE_SUBSET_CAP {
            RegularityMode::Exhaustive
        } else {
            RegularityMode::Sampled {
                samples: DEFAULT_SAMPLE_SIZE,
                seed,
            }
        }
    }

    pub fn is_exhaustive(&self) -> bool {
        matches!(self, RegularityMode::Exhaustive)
    }
}

/// Outcome of a maximal-submatrix regularity scan.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegularityReport {
    pub mode: RegularityMode,
    pub subsets_tested: u64,
    /// Smallest `sigma_min / sigma_max` over the tested square submatrices.
    pub worst_ratio: f64,
    /// Row indices of the worst submatrix.
    pub worst_subset: Vec<usize>,
    pub threshold: f64,
    pub pass: bool,
}

/// `sigma_min / sigma_max` of a square matrix; 0 when it is the zero matrix.
pub fn conditioning_ratio(m: &Matrix) -> f64 {
    let sv = singular_values(m);
    let smax = sigma_max(&sv);
    if smax == 0.0 {
        return 0.0;
    }
    let smin = sv.iter().copied().fold(f64::INFINITY, f64::min);
    smin / smax
}

/// Checks that every k×k submatrix formed from k rows of the n×k matrix `m`
/// is nonsingular, recording the worst relative smallest singular value.
pub fn maximal_submatrix_regularity(
    m: &Matrix,
    mode: RegularityMode,
    tol: &ToleranceProfile,
) -> Result<RegularityReport, NumericError> {
    let (n, k) = m.shape();
    if k == 0 {
        return Err(NumericError::NoColumns);
    }
    if k > n {
        return Err(NumericError::TooManyColumns { k, n });
    }
    let subsets: Box<dyn Iterator<Item = Vec<usize>>> = match mode {
        RegularityMode::Exhaustive => {
            let count = binomial(n, k);
            if count > EXHAUSTIVE_SUBSET_CAP {
                return Err(NumericError::ExhaustiveCap {
                    n,
                    k,
                    count,
                    cap: EXHAUSTIVE_SUBSET_CAP,
                });
            }
            Box::new((0..n).combinations(k))
        }
        RegularityMode::Sampled { samples, seed } => {
            let mut rng = ChaCha20Rng::seed_from_u64(seed);
            Box::new((0..samples).map(move |_| {
                let mut rows = rand::seq::index::sample(&mut rng, n, k).into_vec();
                rows.sort_unstable();
                rows
            }))
        }
    };

    let mut tested = 0u64;
    let mut worst_ratio = f64::INFINITY;
    let mut worst_subset = Vec::new();
    for rows in subsets {
        let sub = m.select_rows(rows.iter());
        let ratio = conditioning_ratio(&sub);
        tested += 1;
        if ratio < worst_ratio {
            worst_ratio = ratio;
            worst_subset = rows;
        }
    }
    if tested == 0 {
        worst_ratio = 1.0;
    }
    Ok(RegularityReport {
        mode,
        subsets_tested: tested,
        worst_ratio,
        worst_subset,
        threshold: tol.rank_rel_tol,
        pass: worst_ratio > tol.rank_rel_tol,
    })
}

/// Random orthogonal matrix (QR of a Gaussian matrix), for tests and
/// invariance checks.
pub fn random_orthogonal(n: usize, seed: u64) -> Matrix {
    use rand_distr::{Distribution, StandardNormal};
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    let g = Matrix::from_fn(n, n, |_, _| StandardNormal.sample(&mut rng));
    g.qr().q()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol * a.abs().max(b.abs()).max(1.0)
    }

    fn tol() -> ToleranceProfile {
        ToleranceProfile::default()
    }

    fn assert_orthonormal(n: &Matrix) {
        let gram = n.transpose() * n;
        let eye = Matrix::identity(n.ncols(), n.ncols());
        assert!(max_abs(&(gram - eye)) < 1e-12);
    }

    #[test]
    fn null_space_of_ones_row() {
        let m = Matrix::from_row_slice(1, 3, &[1.0, 1.0, 1.0]);
        let n = null_space_basis(&m, &tol());
        assert_eq!(n.shape(), (3, 2));
        assert!(max_abs(&(&m * &n)) < 1e-14);
        assert_orthonormal(&n);
    }

    #[test]
    fn null_space_of_identity_is_empty() {
        let n = null_space_basis(&Matrix::identity(3, 3), &tol());
        assert_eq!(n.shape(), (3, 0));
    }

    #[test]
    fn null_space_of_wide_matrix() {
        let m = Matrix::from_row_slice(2, 4, &[1.0, 1.0, 0.0, 1.0, 0.0, 1.0, 1.0, -1.0]);
        let n = null_space_basis(&m, &tol());
        assert_eq!(n.shape(), (4, 2));
        assert!(max_abs(&(&m * &n)) <= 1e-12);
        assert_orthonormal(&n);
        // (-3, 2, -1, 1) solves both equations, so it lies in the span.
        let v = Vector::from_vec(vec![-3.0, 2.0, -1.0, 1.0]);
        assert_eq!(&m * &v, Vector::zeros(2));
        let proj = &n * (n.transpose() * &v);
        assert!((proj - v).norm() < 1e-12);
    }

    #[test]
    fn null_space_of_zero_matrix_is_everything() {
        let n = null_space_basis(&Matrix::zeros(2, 3), &tol());
        assert_eq!(n.shape(), (3, 3));
        assert_orthonormal(&n);
    }

    #[test]
    fn rank_examples() {
        assert_eq!(numeric_rank(&Matrix::zeros(3, 4), &tol()), 0);
        assert_eq!(numeric_rank(&Matrix::identity(3, 3), &tol()), 3);
        let v = Vector::from_vec(vec![1.0, -2.0, 0.5, 3.0]);
        assert_eq!(numeric_rank(&(&v * v.transpose()), &tol()), 1);
    }

    #[test]
    fn row_space_basis_spans_rows() {
        let m = Matrix::from_row_slice(3, 4, &[
            1.0, 0.0, 2.0, 0.0, //
            2.0, 0.0, 4.0, 0.0, //
            0.0, 1.0, 0.0, 1.0,
        ]);
        let b = row_space_basis(&m, &tol());
        assert_eq!(b.ncols(), 2);
        assert_orthonormal(&b);
        let residual = m.transpose() - &b * (b.transpose() * m.transpose());
        assert!(max_abs(&residual) < 1e-12);
    }

    #[test]
    fn eigen_bound_examples() {
        let d = Matrix::from_diagonal(&Vector::from_vec(vec![1.0, 2.0, 3.0]));
        let (lo, hi) = symmetric_eigen_bounds(&d).unwrap();
        assert!(close(lo, 1.0, 1e-14) && close(hi, 3.0, 1e-14));

        let swap = Matrix::from_row_slice(2, 2, &[0.0, 1.0, 1.0, 0.0]);
        let (lo, hi) = symmetric_eigen_bounds(&swap).unwrap();
        assert!(close(lo, -1.0, 1e-14) && close(hi, 1.0, 1e-14));

        assert_eq!(
            symmetric_eigen_bounds(&Matrix::zeros(2, 3)),
            Err(NumericError::NotSquare { rows: 2, cols: 3 })
        );
    }

    #[test]
    fn regularity_examples() {
        let m = Matrix::from_row_slice(4, 2, &[1.0, 0.0, 1.0, 1.0, 0.0, 1.0, 1.0, -1.0]);
        let rep = maximal_submatrix_regularity(&m, RegularityMode::Exhaustive, &tol()).unwrap();
        assert!(rep.pass);
        assert_eq!(rep.subsets_tested, 6);

        let dup = Matrix::from_row_slice(3, 2, &[1.0, 2.0, 3.0, 1.0, 1.0, 2.0]);
        let rep = maximal_submatrix_regularity(&dup, RegularityMode::Exhaustive, &tol()).unwrap();
        assert!(!rep.pass);
        assert_eq!(rep.worst_subset, vec![0, 2]);

        let col = Matrix::from_column_slice(4, 1, &[1.0, 2.0, 0.0, -1.0]);
        let rep = maximal_submatrix_regularity(&col, RegularityMode::Exhaustive, &tol()).unwrap();
        assert!(!rep.pass);
        assert_eq!(rep.worst_subset, vec![2]);

        assert_eq!(
            maximal_submatrix_regularity(&Matrix::zeros(2, 3), RegularityMode::Exhaustive, &tol()),
            Err(NumericError::TooManyColumns { k: 3, n: 2 })
        );
        assert!(matches!(
            maximal_submatrix_regularity(&Matrix::zeros(40, 20), RegularityMode::Exhaustive, &tol()),
            Err(NumericError::ExhaustiveCap { .. })
        ));
    }

    #[test]
    fn sampled_regularity_is_reproducible() {
        let m = random_orthogonal(9, 3).columns(0, 4).into_owned();
        let mode = RegularityMode::Sampled { samples: 50, seed: 11 };
        let a = maximal_submatrix_regularity(&m, mode, &tol()).unwrap();
        let b = maximal_submatrix_regularity(&m, mode, &tol()).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.subsets_tested, 50);
        assert!(a.pass);
    }

    #[test]
    fn auto_mode_switches_at_cap() {
        assert!(RegularityMode::auto(20, 10, 0).is_exhaustive());
        assert!(!RegularityMode::auto(40, 20, 0).is_exhaustive());
        assert_eq!(binomial(6, 3), 20);
        assert_eq!(binomial(3, 5), 0);
    }

    #[test]
    fn tolerance_validation() {
        assert!(tol().validate().is_ok());
        let bad = ToleranceProfile {
            psd_rel_tol: 0.0,
            ..tol()
        };
        assert!(matches!(
            bad.validate(),
            Err(NumericError::BadTolerance { name: "psd_rel_tol", .. })
        ));
    }
}
