//! From an orthogonal representation X to a universally rigid framework.
//!
//! A nowhere-zero vector xi in the null space of X^T rescales the rows of X
//! into a Gale matrix Z = Diag(xi) X. The configuration P spans the null
//! space of [Z^T; e^T], and Omega = Z Z^T is a positive semidefinite stress
//! matrix of rank n-r-1 that vanishes on every non-edge.

use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;
use rand_distr::{Distribution, StandardNormal};
use thiserror::Error;

use crate::certificate::{verify_certificate, RigidityCertificate, VerificationReport};
use crate::graph::{self, Graph, GraphError, Separator};
use crate::numeric::{
    self, null_space_basis, Matrix, NumericError, RegularityMode, ToleranceProfile, Vector,
};
use crate::ortho::{self, OrthoError};

/// Redraws allowed when a random null-space combination has a tiny entry.
pub const XI_MAX_REDRAWS: usize = 100;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GaleError {
    #[error("null space of X^T has dimension {found}, expected {expected}")]
    NullSpaceDimension { expected: usize, found: usize },
    #[error("no nowhere-zero null vector found in {draws} draws")]
    RedrawBudgetExhausted { draws: usize },
    #[error("xi has length {found}, expected {expected}")]
    LengthMismatch { expected: usize, found: usize },
    #[error("xi entry {index} is {value:e}, below {threshold:e} relative to max |xi|")]
    SmallEntry {
        index: usize,
        value: f64,
        threshold: f64,
    },
    #[error("X^T xi residual {residual:e} exceeds {threshold:e}")]
    NotInNullSpace { residual: f64, threshold: f64 },
    #[error("Z^T e residual {residual:e} exceeds {threshold:e}")]
    ColumnSumsNonzero { residual: f64, threshold: f64 },
    #[error("null space of [Z^T; e^T] has dimension {found}, expected r = {expected}")]
    ConfigurationDimension { expected: usize, found: usize },
}

/// Nowhere-zero scaling vector and the Gale matrix built from it.
#[derive(Debug, Clone, PartialEq)]
pub struct GaleData {
    pub xi: Vector,
    pub z: Matrix,
}

/// Rows of `p` are the points p^1, …, p^n.
#[derive(Debug, Clone, PartialEq)]
pub struct Configuration {
    pub p: Matrix,
}

impl Configuration {
    pub fn new(p: Matrix) -> Self {
        Self { p }
    }

    pub fn point_count(&self) -> usize {
        self.p.nrows()
    }

    pub fn dim(&self) -> usize {
        self.p.ncols()
    }
}

fn xi_is_spread(xi: &Vector, tol: &ToleranceProfile) -> bool {
    let max = xi.amax();
    max > 0.0 && xi.iter().all(|v| v.abs() >= tol.xi_min_rel * max)
}

/// Largest singular value, used to scale residual thresholds.
fn spectral_norm(m: &Matrix) -> f64 {
    numeric::singular_values(m).iter().fold(0.0, |a: f64, &s| a.max(s))
}

/// Random combination of a null-space basis of X^T whose entries are all
/// bounded away from zero, scaled so that max |xi_i| = 1.
///
/// Coefficients come from stream 1 of a ChaCha20 generator seeded with
/// `seed`, so the draw is independent of the one that produced X.
pub fn nonzero_null_vector(
    x: &Matrix,
    seed: u64,
    tol: &ToleranceProfile,
) -> Result<Vector, GaleError> {
    let (n, k) = x.shape();
    let basis = null_space_basis(&x.transpose(), tol);
    let expected = n.saturating_sub(k);
    if basis.ncols() != expected || expected == 0 {
        return Err(GaleError::NullSpaceDimension {
            expected,
            found: basis.ncols(),
        });
    }
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    rng.set_stream(1);
    for _ in 0..XI_MAX_REDRAWS {
        let coeffs = Vector::from_fn(expected, |_, _| StandardNormal.sample(&mut rng));
        let xi = &basis * coeffs;
        if xi_is_spread(&xi, tol) {
            let xi = &xi / xi.amax();
            check_null_residual(x, &xi, tol)?;
            return Ok(xi);
        }
    }
    Err(GaleError::RedrawBudgetExhausted {
        draws: XI_MAX_REDRAWS,
    })
}

fn check_null_residual(x: &Matrix, xi: &Vector, tol: &ToleranceProfile) -> Result<(), GaleError> {
    let residual = (x.transpose() * xi).norm();
    let threshold = tol.rank_rel_tol * spectral_norm(x) * xi.norm();
    if residual > threshold {
        return Err(GaleError::NotInNullSpace {
            residual,
            threshold,
        });
    }
    Ok(())
}

/// Z = Diag(xi) X, after checking that xi is nowhere zero and annihilated
/// by X^T.
pub fn gale_from_representation(
    x: &Matrix,
    xi: &Vector,
    tol: &ToleranceProfile,
) -> Result<GaleData, GaleError> {
    let n = x.nrows();
    if xi.len() != n {
        return Err(GaleError::LengthMismatch {
            expected: n,
            found: xi.len(),
        });
    }
    let max = xi.amax();
    let threshold = tol.xi_min_rel * max;
    if let Some((index, &value)) = xi
        .iter()
        .enumerate()
        .find(|(_, v)| max == 0.0 || v.abs() < threshold)
    {
        return Err(GaleError::SmallEntry {
            index: index + 1,
            value,
            threshold,
        });
    }
    check_null_residual(x, xi, tol)?;

    let mut z = x.clone();
    for (mut row, &s) in z.row_iter_mut().zip(xi.iter()) {
        row *= s;
    }
    let col_sums = z.row_sum();
    let residual = col_sums.norm();
    let threshold = tol.rank_rel_tol * spectral_norm(&z) * (n as f64).sqrt();
    if residual > threshold {
        return Err(GaleError::ColumnSumsNonzero {
            residual,
            threshold,
        });
    }
    Ok(GaleData { xi: xi.clone(), z })
}

/// Configuration whose Gale matrix is `gd.z`: an orthonormal basis of the
/// null space of [Z^T; e^T], one point per row.
pub fn configuration_from_gale(
    gd: &GaleData,
    tol: &ToleranceProfile,
) -> Result<Configuration, GaleError> {
    let (n, k) = gd.z.shape();
    let expected = n.saturating_sub(k + 1);
    let mut stacked = Matrix::zeros(k + 1, n);
    stacked.rows_mut(0, k).copy_from(&gd.z.transpose());
    stacked.row_mut(k).fill(1.0);
    let p = null_space_basis(&stacked, tol);
    if p.ncols() != expected || expected == 0 {
        return Err(GaleError::ConfigurationDimension {
            expected,
            found: p.ncols(),
        });
    }
    Ok(Configuration { p })
}

/// Omega = Z Z^T, assembled entrywise so that it is exactly symmetric.
pub fn stress_from_gale(gd: &GaleData) -> Matrix {
    let n = gd.z.nrows();
    let mut omega = Matrix::zeros(n, n);
    for i in 0..n {
        for j in i..n {
            let v = gd.z.row(i).dot(&gd.z.row(j));
            omega[(i, j)] = v;
            omega[(j, i)] = v;
        }
    }
    omega
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ConstructError {
    #[error(
        "connectivity {kappa} is below the required {required}; separator {} leaves parts {} and {}",
        one_based(&separator.nodes), one_based(&separator.part_one), one_based(&separator.part_two)
    )]
    Hypothesis {
        kappa: usize,
        required: usize,
        separator: Separator,
    },
    #[error("complete graphs have no non-edges to certify")]
    CompleteGraph,
    #[error("graph stage: {0}")]
    Graph(#[from] GraphError),
    #[error("orthogonal representation stage: {0}")]
    Representation(#[from] OrthoError),
    #[error("gale stage: {0}")]
    Gale(#[from] GaleError),
    #[error("verification stage: {0}")]
    Numeric(#[from] NumericError),
    #[error("verification stage: constructed certificate failed checks {failed:?}")]
    SelfCheckFailed {
        failed: Vec<String>,
        report: Box<VerificationReport>,
    },
}

fn one_based(nodes: &[usize]) -> String {
    let labels: Vec<String> = nodes.iter().map(|v| (v + 1).to_string()).collect();
    format!("{{{}}}", labels.join(", "))
}

/// Options for [`construct_universally_rigid_framework`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConstructOptions {
    pub max_retries: usize,
    pub tolerances: ToleranceProfile,
    /// Force exhaustive general-position certification. Otherwise the scan
    /// is exhaustive below the subset cap and sampled above it.
    pub exhaustive_gp: bool,
}

impl Default for ConstructOptions {
    fn default() -> Self {
        Self {
            max_retries: ortho::DEFAULT_MAX_RETRIES,
            tolerances: ToleranceProfile::default(),
            exhaustive_gp: false,
        }
    }
}

/// A verified certificate plus construction diagnostics.
#[derive(Debug, Clone, PartialEq)]
pub struct Construction {
    pub certificate: RigidityCertificate,
    pub report: VerificationReport,
    pub retries_used: usize,
}

/// Full pipeline: orthogonal representation, scaling vector, Gale matrix,
/// configuration, stress matrix. The certificate is verified before it is
/// returned.
pub fn construct_universally_rigid_framework(
    g: &Graph,
    r: usize,
    seed: u64,
    opts: &ConstructOptions,
) -> Result<Construction, ConstructError> {
    let tol = &opts.tolerances;
    tol.validate()?;
    let n = g.node_count();
    let dim = ortho::representation_dim(n, r)?;
    if g.is_complete() {
        return Err(ConstructError::CompleteGraph);
    }
    let kappa = graph::vertex_connectivity(g)?;
    if kappa < r + 1 {
        return Err(ConstructError::Hypothesis {
            kappa,
            required: r + 1,
            separator: graph::min_separator(g)?,
        });
    }

    let rep = ortho::build_orthogonal_representation(g, r, seed, opts.max_retries, tol)?;
    let attempt_seed = rep.attempt_seed();
    let xi = nonzero_null_vector(&rep.x, attempt_seed, tol)?;
    let gale = gale_from_representation(&rep.x, &xi, tol)?;
    let config = configuration_from_gale(&gale, tol)?;
    let omega = stress_from_gale(&gale);

    let certificate = RigidityCertificate {
        graph: g.clone(),
        r,
        seed,
        tolerances: *tol,
        x: rep.x,
        xi: gale.xi,
        z: gale.z,
        p: config.p,
        omega,
    };
    let mode = if opts.exhaustive_gp {
        RegularityMode::Exhaustive
    } else {
        RegularityMode::auto(n, dim, attempt_seed)
    };
    let report = verify_certificate(&certificate, mode).map_err(|e| match e {
        crate::certificate::CertificateError::Numeric(e) => ConstructError::Numeric(e),
        other => unreachable!("freshly built certificate has consistent shapes: {other}"),
    })?;
    if !report.pass {
        return Err(ConstructError::SelfCheckFailed {
            failed: report.failed().map(|c| c.name.to_string()).collect(),
            report: Box::new(report),
        });
    }
    Ok(Construction {
        certificate,
        report,
        retries_used: rep.retries_used,
    })
}
