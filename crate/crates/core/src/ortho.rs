//! Randomized general-position orthogonal representations.
//!
//! Node j receives a random unit vector in R^(n-r-1) orthogonal to the
//! vectors already assigned to its earlier non-neighbours. For an
//! (r+1)-connected graph every n-r-1 of the resulting vectors are linearly
//! independent with probability one; finite precision is handled by
//! re-checking and restarting from the next seed.

use nalgebra::RowDVector;
use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;
use rand_distr::{Distribution, StandardNormal};
use thiserror::Error;

use crate::graph::Graph;
use crate::numeric::{
    self, maximal_submatrix_regularity, Matrix, NumericError, RegularityMode, RegularityReport,
    ToleranceProfile,
};

/// Retries granted by callers that have no stronger opinion.
pub const DEFAULT_MAX_RETRIES: usize = 10;
/// Row norms must equal one to within this absolute amount.
pub const UNIT_NORM_TOL: f64 = 1e-12;
/// A projected draw shorter than this is discarded and redrawn.
const MIN_RESIDUAL_NORM: f64 = 1e-12;
const MAX_DRAWS_PER_NODE: usize = 100;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum OrthoError {
    #[error("dimension r = {r} out of range 1..={max} for a graph on {n} nodes")]
    DimensionOutOfRange { r: usize, n: usize, max: usize },
    #[error("complete graphs are not accepted")]
    CompleteGraph,
    #[error("node {node} has degree {degree}, need at least {required}")]
    DegreeTooLow {
        node: usize,
        degree: usize,
        required: usize,
    },
    #[error("node {node}: constraint span leaves no free direction")]
    NoFreeDirection { node: usize },
    #[error(
        "independence check still failing after {attempts} attempt(s); worst rows {worst_subset:?} \
         with ratio {worst_ratio:e}"
    )]
    IndependenceFailed {
        attempts: usize,
        worst_ratio: f64,
        worst_subset: Vec<usize>,
    },
    #[error("matrix is {rows}x{cols}, expected {expected_rows}x{expected_cols}")]
    ShapeMismatch {
        rows: usize,
        cols: usize,
        expected_rows: usize,
        expected_cols: usize,
    },
    #[error(transparent)]
    Numeric(#[from] NumericError),
}

/// Rows of `x` are the representing vectors x^1, …, x^n.
#[derive(Debug, Clone, PartialEq)]
pub struct OrthogonalRepresentation {
    pub graph: Graph,
    pub r: usize,
    pub x: Matrix,
    /// Seed passed by the caller; the successful attempt used
    /// `seed + retries_used`.
    pub seed: u64,
    pub retries_used: usize,
}

impl OrthogonalRepresentation {
    /// Dimension n-r-1 of the representing vectors.
    pub fn dim(&self) -> usize {
        self.x.ncols()
    }

    pub fn attempt_seed(&self) -> u64 {
        self.seed.wrapping_add(self.retries_used as u64)
    }
}

/// Checks 1 ≤ r ≤ n-2 and returns n-r-1.
pub fn representation_dim(n: usize, r: usize) -> Result<usize, OrthoError> {
    let max = n.saturating_sub(2);
    if r < 1 || r > max {
        return Err(OrthoError::DimensionOutOfRange { r, n, max });
    }
    Ok(n - r - 1)
}

pub fn build_orthogonal_representation(
    g: &Graph,
    r: usize,
    seed: u64,
    max_retries: usize,
    tol: &ToleranceProfile,
) -> Result<OrthogonalRepresentation, OrthoError> {
    let n = g.node_count();
    let dim = representation_dim(n, r)?;
    if g.is_complete() {
        return Err(OrthoError::CompleteGraph);
    }
    if let Some(node) = (0..n).find(|&v| g.degree(v) < r + 1) {
        return Err(OrthoError::DegreeTooLow {
            node: node + 1,
            degree: g.degree(node),
            required: r + 1,
        });
    }

    let mut worst: Option<RegularityReport> = None;
    for attempt in 0..=max_retries {
        let attempt_seed = seed.wrapping_add(attempt as u64);
        let x = draw_vectors(g, dim, attempt_seed, tol)?;
        let mode = RegularityMode::auto(n, dim, attempt_seed);
        let report = maximal_submatrix_regularity(&x, mode, tol)?;
        if report.pass {
            return Ok(OrthogonalRepresentation {
                graph: g.clone(),
                r,
                x,
                seed,
                retries_used: attempt,
            });
        }
        if worst.as_ref().is_none_or(|w| report.worst_ratio < w.worst_ratio) {
            worst = Some(report);
        }
    }
    let worst = worst.expect("at least one attempt");
    Err(OrthoError::IndependenceFailed {
        attempts: max_retries + 1,
        worst_ratio: worst.worst_ratio,
        worst_subset: worst.worst_subset.iter().map(|i| i + 1).collect(),
    })
}

/// One pass of the sequential construction in natural node order.
fn draw_vectors(
    g: &Graph,
    dim: usize,
    seed: u64,
    tol: &ToleranceProfile,
) -> Result<Matrix, OrthoError> {
    let n = g.node_count();
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    let mut x = Matrix::zeros(n, dim);
    for j in 0..n {
        let earlier: Vec<usize> = (0..j).filter(|&i| !g.has_edge(i, j)).collect();
        let constraints = x.select_rows(earlier.iter());
        let span = numeric::row_space_basis(&constraints, tol);
        // Degree >= r+1 bounds the span dimension by dim-1.
        if span.ncols() >= dim {
            return Err(OrthoError::NoFreeDirection { node: j + 1 });
        }
        let mut accepted = None;
        for _ in 0..MAX_DRAWS_PER_NODE {
            let mut v = numeric::Vector::from_fn(dim, |_, _| StandardNormal.sample(&mut rng));
            // Two projection passes keep the residual orthogonal to working precision.
            for _ in 0..2 {
                let coeff = span.transpose() * &v;
                v -= &span * coeff;
            }
            let norm = v.norm();
            if norm > MIN_RESIDUAL_NORM {
                accepted = Some(v / norm);
                break;
            }
        }
        let v = accepted.ok_or(OrthoError::NoFreeDirection { node: j + 1 })?;
        x.set_row(j, &RowDVector::from_iterator(dim, v.iter().copied()));
    }
    Ok(x)
}

/// Measurements backing an orthogonal-representation check.
#[derive(Debug, Clone, PartialEq)]
pub struct RepresentationReport {
    /// max |x^i · x^j| over non-edges, relative to max ‖x‖².
    pub max_non_edge_inner: f64,
    pub orthogonality_pass: bool,
    /// max |‖x^i‖ - 1|.
    pub max_norm_deviation: f64,
    pub norm_pass: bool,
    pub regularity: RegularityReport,
    pub pass: bool,
}

pub fn check_representation(
    rep: &OrthogonalRepresentation,
    tol: &ToleranceProfile,
    mode: RegularityMode,
) -> Result<RepresentationReport, OrthoError> {
    let n = rep.graph.node_count();
    let dim = representation_dim(n, rep.r)?;
    let (rows, cols) = rep.x.shape();
    if rows != n || cols != dim {
        return Err(OrthoError::ShapeMismatch {
            rows,
            cols,
            expected_rows: n,
            expected_cols: dim,
        });
    }
    let norms: Vec<f64> = rep.x.row_iter().map(|row| row.norm()).collect();
    let scale = norms.iter().fold(0.0f64, |a, &b| a.max(b * b));
    let max_inner = rep
        .graph
        .non_edges()
        .map(|(i, j)| rep.x.row(i).dot(&rep.x.row(j)).abs())
        .fold(0.0, f64::max);
    let max_non_edge_inner = if scale > 0.0 { max_inner / scale } else { 0.0 };
    let max_norm_deviation = norms.iter().fold(0.0f64, |a, &b| a.max((b - 1.0).abs()));
    let regularity = maximal_submatrix_regularity(&rep.x, mode, tol)?;

    let orthogonality_pass = max_non_edge_inner <= tol.zero_rel_tol;
    let norm_pass = max_norm_deviation <= UNIT_NORM_TOL;
    Ok(RepresentationReport {
        max_non_edge_inner,
        orthogonality_pass,
        max_norm_deviation,
        norm_pass,
        pass: orthogonality_pass && norm_pass && regularity.pass,
        regularity,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{generate, Family};

    fn tol() -> ToleranceProfile {
        ToleranceProfile::default()
    }

    fn hand_c4(third: [f64; 2]) -> OrthogonalRepresentation {
        let h = std::f64::consts::FRAC_1_SQRT_2;
        let x = Matrix::from_row_slice(4, 2, &[1.0, 0.0, h, h, third[0], third[1], h, -h]);
        OrthogonalRepresentation {
            graph: generate(Family::Cycle, &[4]).unwrap(),
            r: 1,
            x,
            seed: 0,
            retries_used: 0,
        }
    }

    #[test]
    fn four_cycle_representation() {
        let c4 = generate(Family::Cycle, &[4]).unwrap();
        for seed in 0..5 {
            let rep = build_orthogonal_representation(&c4, 1, seed, 3, &tol()).unwrap();
            assert_eq!(rep.x.shape(), (4, 2));
            assert!(rep.x.row(0).dot(&rep.x.row(2)).abs() < 1e-15);
            assert!(rep.x.row(1).dot(&rep.x.row(3)).abs() < 1e-15);
            let report = check_representation(&rep, &tol(), RegularityMode::Exhaustive).unwrap();
            assert!(report.pass, "{report:?}");
            assert_eq!(report.regularity.subsets_tested, 6);
        }
    }

    #[test]
    fn k33_classes_are_orthogonal_frames() {
        let k33 = generate(Family::CompleteBipartite, &[3, 3]).unwrap();
        let rep = build_orthogonal_representation(&k33, 2, 5, 3, &tol()).unwrap();
        assert_eq!(rep.x.shape(), (6, 3));
        for class in [[0, 1, 2], [3, 4, 5]] {
            let frame = rep.x.select_rows(class.iter());
            let gram = &frame * frame.transpose();
            assert!(numeric::max_abs(&(gram - Matrix::identity(3, 3))) < 1e-12);
        }
    }

    #[test]
    fn precondition_errors() {
        let p3 = generate(Family::Path, &[3]).unwrap();
        assert_eq!(
            build_orthogonal_representation(&p3, 1, 0, 3, &tol()),
            Err(OrthoError::DegreeTooLow {
                node: 1,
                degree: 1,
                required: 2
            })
        );
        let c5 = generate(Family::Cycle, &[5]).unwrap();
        assert!(matches!(
            build_orthogonal_representation(&c5, 0, 0, 3, &tol()),
            Err(OrthoError::DimensionOutOfRange { .. })
        ));
        assert!(matches!(
            build_orthogonal_representation(&c5, 4, 0, 3, &tol()),
            Err(OrthoError::DimensionOutOfRange { .. })
        ));
        let k5 = generate(Family::Complete, &[5]).unwrap();
        assert_eq!(
            build_orthogonal_representation(&k5, 2, 0, 3, &tol()),
            Err(OrthoError::CompleteGraph)
        );
    }

    #[test]
    fn deterministic_given_seed() {
        let g = generate(Family::Circulant, &[11, 2]).unwrap();
        let a = build_orthogonal_representation(&g, 3, 42, 3, &tol()).unwrap();
        let b = build_orthogonal_representation(&g, 3, 42, 3, &tol()).unwrap();
        assert_eq!(a, b);
        let c = build_orthogonal_representation(&g, 3, 43, 3, &tol()).unwrap();
        assert_ne!(a.x, c.x);
    }

    #[test]
    fn hand_representation_checks() {
        let good = hand_c4([0.0, 1.0]);
        let report = check_representation(&good, &tol(), RegularityMode::Exhaustive).unwrap();
        assert!(report.pass, "{report:?}");

        let bad = hand_c4([1.0, 0.0]);
        let report = check_representation(&bad, &tol(), RegularityMode::Exhaustive).unwrap();
        assert!(!report.pass);
        assert!(!report.orthogonality_pass);
        assert!(!report.regularity.pass);
        assert_eq!(report.regularity.worst_subset, vec![0, 2]);
    }

    #[test]
    fn shape_mismatch_is_an_error() {
        let mut rep = hand_c4([0.0, 1.0]);
        rep.x = Matrix::zeros(4, 3);
        assert!(matches!(
            check_representation(&rep, &tol(), RegularityMode::Exhaustive),
            Err(OrthoError::ShapeMismatch { .. })
        ));
    }

    #[test]
    fn disconnected_degree_ok_graph_fails_independence() {
        // Two disjoint K4's: min degree 3 but connectivity 0, so for r = 2
        // some 5 vectors must be dependent.
        let mut edges = Vec::new();
        for base in [0, 4] {
            for i in 0..4 {
                for j in i + 1..4 {
                    edges.push((base + i, base + j));
                }
            }
        }
        let g = Graph::from_edges(8, edges).unwrap();
        let err = build_orthogonal_representation(&g, 2, 0, 2, &tol()).unwrap_err();
        assert!(matches!(err, OrthoError::IndependenceFailed { attempts: 3, .. }), "{err}");
    }
}
