//! Reflection counterexamples for graphs below the connectivity bound.
//!
//! If at most r nodes separate the graph, their points lie on a hyperplane
//! H of R^r. Reflecting one side of the separation across H keeps every bar
//! length but moves some non-adjacent pair, so the framework is not
//! universally rigid.

use nalgebra::RowDVector;
use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::Serialize;
use thiserror::Error;

use crate::gale::Configuration;
use crate::graph::{self, Graph, GraphError, Separator};
use crate::numeric::{self, Matrix, ToleranceProfile, Vector};

/// Relative tolerance for edge-length preservation and congruence.
pub const DEFAULT_FALSIFIER_TOL: f64 = 1e-9;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum FalsifyError {
    #[error("graph is {kappa}-connected, at least r+1 = {}; no reflection counterexample exists", r + 1)]
    Connected { kappa: usize, r: usize },
    #[error("configuration is {rows}x{cols}, expected {expected_rows}x{expected_cols}")]
    ShapeMismatch {
        rows: usize,
        cols: usize,
        expected_rows: usize,
        expected_cols: usize,
    },
    #[error("need n >= r+2, got n = {n}, r = {r}")]
    TooFewNodes { n: usize, r: usize },
    #[error("separator points do not determine a hyperplane")]
    DegenerateSeparator,
    #[error("reflection left the configuration congruent (gap {gap:e})")]
    NoGap { gap: f64 },
    #[error(transparent)]
    Graph(#[from] GraphError),
}

/// Hyperplane {y : normal · y = offset} with a unit normal.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Hyperplane {
    pub normal: Vec<f64>,
    pub offset: f64,
}

impl Hyperplane {
    pub fn reflect(&self, point: &[f64]) -> Vec<f64> {
        let dist: f64 = self
            .normal
            .iter()
            .zip(point)
            .map(|(a, b)| a * b)
            .sum::<f64>()
            - self.offset;
        point
            .iter()
            .zip(&self.normal)
            .map(|(p, nv)| p - 2.0 * dist * nv)
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ReflectionWitness {
    pub separator: Separator,
    pub hyperplane: Hyperplane,
    /// True when the separator had fewer than r points and the hyperplane
    /// was completed with principal axes of the configuration.
    pub completed: bool,
    pub p_prime: Configuration,
    /// Largest |‖p'^i - p'^j‖² - ‖p^i - p^j‖²| over edges, relative to the
    /// largest squared edge length.
    pub max_edge_length_error: f64,
    /// Largest squared-distance change over non-edges, relative to the
    /// largest squared pairwise distance of p.
    pub congruence_gap: f64,
    pub gap_pair: (usize, usize),
}

fn sq_dist(p: &Matrix, i: usize, j: usize) -> f64 {
    (p.row(i) - p.row(j)).norm_squared()
}

/// Seeded Gaussian configuration; general position with probability one.
pub fn random_configuration(n: usize, r: usize, seed: u64) -> Configuration {
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    Configuration::new(Matrix::from_fn(n, r, |_, _| StandardNormal.sample(&mut rng)))
}

/// Principal axes of the point cloud, by decreasing variance.
fn principal_axes(p: &Matrix) -> Vec<Vector> {
    let n = p.nrows() as f64;
    let mean = p.row_mean();
    let mut centered = p.clone();
    for mut row in centered.row_iter_mut() {
        row -= &mean;
    }
    let cov = centered.transpose() * &centered / n;
    let eig = cov.symmetric_eigen();
    let mut order: Vec<usize> = (0..eig.eigenvalues.len()).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[b].total_cmp(&eig.eigenvalues[a]).then(a.cmp(&b)));
    order
        .into_iter()
        .map(|i| eig.eigenvectors.column(i).into_owned())
        .collect()
}

/// Hyperplane through the separator points; completed with principal axes
/// when the separator is smaller than r.
fn separator_hyperplane(
    p: &Matrix,
    separator: &[usize],
) -> Result<(Hyperplane, bool), FalsifyError> {
    let r = p.ncols();
    let tol = ToleranceProfile::default();
    let anchor: RowDVector<f64> = match separator.first() {
        Some(&s) => p.row(s).into_owned(),
        None => p.row_mean(),
    };
    let mut directions: Vec<Vector> = separator
        .iter()
        .skip(1)
        .map(|&s| (p.row(s) - &anchor).transpose())
        .collect();
    let completed = directions.len() + 1 < r;
    let mut axes = principal_axes(p).into_iter();
    while directions.len() < r - 1 {
        let axis = axes.next().ok_or(FalsifyError::DegenerateSeparator)?;
        let mut residual = axis.clone();
        for d in &directions {
            let d = d.normalize();
            residual -= &d * d.dot(&residual);
        }
        if residual.norm() > 1e-8 {
            directions.push(residual);
        }
    }
    let normal = if r == 1 {
        Vector::from_element(1, 1.0)
    } else {
        let mut dm = Matrix::zeros(r - 1, r);
        for (k, d) in directions.iter().enumerate() {
            dm.set_row(k, &d.transpose());
        }
        let null = numeric::null_space_basis(&dm, &tol);
        if null.ncols() != 1 || numeric::numeric_rank(&dm, &tol) != r - 1 {
            return Err(FalsifyError::DegenerateSeparator);
        }
        null.column(0).into_owned()
    };
    let offset = normal.dot(&anchor.transpose());
    Ok((
        Hyperplane {
            normal: normal.iter().copied().collect(),
            offset,
        },
        completed,
    ))
}

/// Builds an equivalent but non-congruent framework by reflecting one side
/// of a minimum separator across a hyperplane through the separator points.
pub fn reflection_counterexample(
    g: &Graph,
    p: &Configuration,
    r: usize,
    tol: f64,
) -> Result<ReflectionWitness, FalsifyError> {
    let n = g.node_count();
    if p.p.shape() != (n, r) {
        return Err(FalsifyError::ShapeMismatch {
            rows: p.p.nrows(),
            cols: p.p.ncols(),
            expected_rows: n,
            expected_cols: r,
        });
    }
    if r < 1 || n < r + 2 {
        return Err(FalsifyError::TooFewNodes { n, r });
    }
    let kappa = graph::vertex_connectivity(g)?;
    if kappa > r {
        return Err(FalsifyError::Connected { kappa, r });
    }
    let separator = graph::min_separator(g)?;
    let (hyperplane, completed) = separator_hyperplane(&p.p, &separator.nodes)?;

    let mut best: Option<ReflectionWitness> = None;
    for side in [&separator.part_two, &separator.part_one] {
        let mut moved = p.p.clone();
        for &v in side {
            let point: Vec<f64> = p.p.row(v).iter().copied().collect();
            let q = hyperplane.reflect(&point);
            moved.set_row(v, &RowDVector::from_vec(q));
        }
        let p_prime = Configuration::new(moved);
        let (edge_err, gap, gap_pair) = measure(g, &p.p, &p_prime.p);
        let witness = ReflectionWitness {
            separator: separator.clone(),
            hyperplane: hyperplane.clone(),
            completed,
            p_prime,
            max_edge_length_error: edge_err,
            congruence_gap: gap,
            gap_pair,
        };
        if gap > tol && edge_err <= tol {
            return Ok(witness);
        }
        if best.as_ref().is_none_or(|b| gap > b.congruence_gap) {
            best = Some(witness);
        }
    }
    Err(FalsifyError::NoGap {
        gap: best.map_or(0.0, |b| b.congruence_gap),
    })
}

/// (relative edge error, relative non-edge gap, pair attaining the gap)
fn measure(g: &Graph, p: &Matrix, q: &Matrix) -> (f64, f64, (usize, usize)) {
    let n = g.node_count();
    let edge_scale = g.edges().map(|(i, j)| sq_dist(p, i, j)).fold(0.0, f64::max);
    let edge_err = g
        .edges()
        .map(|(i, j)| (sq_dist(q, i, j) - sq_dist(p, i, j)).abs())
        .fold(0.0, f64::max);
    let pair_scale = (0..n)
        .flat_map(|i| (i + 1..n).map(move |j| (i, j)))
        .map(|(i, j)| sq_dist(p, i, j))
        .fold(0.0, f64::max);
    let (gap, pair) = g
        .non_edges()
        .map(|(i, j)| ((sq_dist(q, i, j) - sq_dist(p, i, j)).abs(), (i, j)))
        .fold((0.0, (0, 0)), |acc, cur| if cur.0 > acc.0 { cur } else { acc });
    let rel = |num: f64, den: f64| if den > 0.0 { num / den } else { num };
    (rel(edge_err, edge_scale), rel(gap, pair_scale), pair)
}

/// `(equivalent, congruent)`: squared lengths agree on every edge, resp. on
/// every pair, within `tol` relative to the largest squared edge (resp. pair)
/// length of `p`.
pub fn equivalence_and_congruence(
    g: &Graph,
    p: &Configuration,
    p_prime: &Configuration,
    tol: f64,
) -> Result<(bool, bool), FalsifyError> {
    let n = g.node_count();
    for q in [p, p_prime] {
        if q.p.nrows() != n || q.p.ncols() != p.p.ncols() {
            return Err(FalsifyError::ShapeMismatch {
                rows: q.p.nrows(),
                cols: q.p.ncols(),
                expected_rows: n,
                expected_cols: p.p.ncols(),
            });
        }
    }
    let (a, b) = (&p.p, &p_prime.p);
    let within = |pairs: &mut dyn Iterator<Item = (usize, usize)>| {
        let diffs: Vec<(f64, f64)> = pairs
            .map(|(i, j)| (sq_dist(a, i, j), (sq_dist(b, i, j) - sq_dist(a, i, j)).abs()))
            .collect();
        let scale = diffs.iter().map(|d| d.0).fold(0.0, f64::max);
        let bound = if scale > 0.0 { tol * scale } else { tol };
        diffs.iter().all(|d| d.1 <= bound)
    };
    let equivalent = within(&mut g.edges());
    let congruent = within(&mut (0..n).flat_map(|i| (i + 1..n).map(move |j| (i, j))));
    Ok((equivalent, congruent))
}

#[derive(Serialize)]
struct WitnessDoc<'a> {
    version: &'static str,
    separator: Vec<usize>,
    parts: [Vec<usize>; 2],
    hyperplane: &'a Hyperplane,
    hyperplane_completed: bool,
    p_prime: MatrixView,
    errors: ErrorsDoc,
}

#[derive(Serialize)]
struct MatrixView {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

#[derive(Serialize)]
struct ErrorsDoc {
    max_edge_length_error: f64,
    congruence_gap: f64,
    gap_pair: [usize; 2],
}

impl ReflectionWitness {
    /// JSON in the certificate conventions (1-based labels, row-major data).
    pub fn to_json(&self) -> String {
        let one_based = |v: &[usize]| v.iter().map(|i| i + 1).collect::<Vec<_>>();
        let p = &self.p_prime.p;
        let doc = WitnessDoc {
            version: crate::certificate::FORMAT_VERSION,
            separator: one_based(&self.separator.nodes),
            parts: [
                one_based(&self.separator.part_one),
                one_based(&self.separator.part_two),
            ],
            hyperplane: &self.hyperplane,
            hyperplane_completed: self.completed,
            p_prime: MatrixView {
                rows: p.nrows(),
                cols: p.ncols(),
                data: p.row_iter().flat_map(|r| r.iter().copied().collect::<Vec<_>>()).collect(),
            },
            errors: ErrorsDoc {
                max_edge_length_error: self.max_edge_length_error,
                congruence_gap: self.congruence_gap,
                gap_pair: [self.gap_pair.0 + 1, self.gap_pair.1 + 1],
            },
        };
        let mut out = serde_json::to_string_pretty(&doc).expect("witness serializes");
        out.push('\n');
        out
    }
}
