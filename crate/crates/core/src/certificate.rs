//! Rigidity certificates: verification and JSON serialization.
//!
//! Verification only looks at the stored matrices. It never depends on the
//! generator state or on which null-space basis produced them, so any
//! implementation that writes the same schema can be checked here.
//!
//! A failed check means the certificate is invalid. It says nothing about
//! whether the framework itself is universally rigid.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::graph::{Graph, GraphError};
use crate::numeric::{
    max_abs, maximal_submatrix_regularity, numeric_rank, symmetric_eigen_bounds, Matrix,
    NumericError, RegularityMode, RegularityReport, ToleranceProfile, Vector,
};

pub const FORMAT_VERSION: &str = "1";

#[derive(Debug, Error, Clone, PartialEq)]
pub enum CertificateError {
    #[error("{field} is {rows}x{cols}, expected {expected_rows}x{expected_cols}")]
    ShapeMismatch {
        field: &'static str,
        rows: usize,
        cols: usize,
        expected_rows: usize,
        expected_cols: usize,
    },
    #[error("schema violation: {0}")]
    Schema(String),
    #[error("unsupported certificate version {found:?}, expected {FORMAT_VERSION:?}")]
    Version { found: String },
    #[error("{field} contains a non-finite number")]
    NonFinite { field: &'static str },
    #[error("edge list: {0}")]
    Graph(#[from] GraphError),
    #[error(transparent)]
    Numeric(#[from] NumericError),
}

/// Everything needed to re-verify a universally rigid framework.
#[derive(Debug, Clone, PartialEq)]
pub struct RigidityCertificate {
    pub graph: Graph,
    pub r: usize,
    pub seed: u64,
    pub tolerances: ToleranceProfile,
    /// Orthogonal representation, n × (n-r-1).
    pub x: Matrix,
    pub xi: Vector,
    /// Gale matrix Diag(xi) X.
    pub z: Matrix,
    /// Configuration, n × r.
    pub p: Matrix,
    /// Stress matrix, n × n.
    pub omega: Matrix,
}

impl RigidityCertificate {
    pub fn node_count(&self) -> usize {
        self.graph.node_count()
    }

    /// Edge stresses ω_ij = -Ω_ij, keyed by 0-based edge.
    pub fn edge_stresses(&self) -> Vec<((usize, usize), f64)> {
        self.graph
            .edges()
            .map(|(i, j)| ((i, j), -self.omega[(i, j)]))
            .collect()
    }

    fn check_shapes(&self) -> Result<(), CertificateError> {
        let n = self.node_count();
        if self.r < 1 || self.r + 2 > n {
            return Err(CertificateError::Schema(format!(
                "r = {} out of range 1..={} for n = {n}",
                self.r,
                n.saturating_sub(2)
            )));
        }
        let k = n - self.r - 1;
        let expect = |field, m: &Matrix, rows, cols| {
            if m.shape() == (rows, cols) {
                Ok(())
            } else {
                Err(CertificateError::ShapeMismatch {
                    field,
                    rows: m.nrows(),
                    cols: m.ncols(),
                    expected_rows: rows,
                    expected_cols: cols,
                })
            }
        };
        expect("X", &self.x, n, k)?;
        expect("Z", &self.z, n, k)?;
        expect("P", &self.p, n, self.r)?;
        expect("Omega", &self.omega, n, n)?;
        if self.xi.len() != n {
            return Err(CertificateError::ShapeMismatch {
                field: "xi",
                rows: self.xi.len(),
                cols: 1,
                expected_rows: n,
                expected_cols: 1,
            });
        }
        Ok(())
    }
}

/// One measured check.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CheckRecord {
    pub name: &'static str,
    pub measured: f64,
    pub threshold: f64,
    pub pass: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VerificationReport {
    pub checks: Vec<CheckRecord>,
    pub general_position: RegularityReport,
    pub pass: bool,
}

impl VerificationReport {
    pub fn check(&self, name: &str) -> Option<&CheckRecord> {
        self.checks.iter().find(|c| c.name == name)
    }

    pub fn failed(&self) -> impl Iterator<Item = &CheckRecord> {
        self.checks.iter().filter(|c| !c.pass)
    }

    /// One line per check, then a verdict.
    pub fn summary(&self) -> String {
        let mut out = String::new();
        for c in &self.checks {
            out.push_str(&format!(
                "{} {:<28} measured {:<12.3e} threshold {:.3e}\n",
                if c.pass { "PASS" } else { "FAIL" },
                c.name,
                c.measured,
                c.threshold
            ));
        }
        let gp = &self.general_position;
        let mode = match gp.mode {
            RegularityMode::Exhaustive => "exhaustive".to_string(),
            RegularityMode::Sampled { samples, .. } => format!("sampled ({samples} draws)"),
        };
        out.push_str(&format!(
            "general position scan: {mode}, {} subsets\n",
            gp.subsets_tested
        ));
        out.push_str(if self.pass {
            "certificate valid: framework is universally rigid\n"
        } else {
            "certificate invalid\n"
        });
        out
    }
}

pub mod checks {
    pub const SYMMETRY: &str = "symmetry";
    pub const NON_EDGE_ZERO: &str = "non_edge_zero_pattern";
    pub const KERNEL_ONES: &str = "stress_kernel_ones";
    pub const KERNEL_CONFIGURATION: &str = "stress_kernel_configuration";
    pub const DIAGONAL: &str = "diagonal_consistency";
    pub const PSD: &str = "psd";
    pub const RANK: &str = "rank";
    pub const GENERAL_POSITION: &str = "general_position";
    pub const GALE_KERNEL: &str = "gale_kernel";
    pub const GALE_SCALING: &str = "gale_scaling";
    pub const AFFINE_SPAN: &str = "affine_span";
    pub const EQUILIBRIUM: &str = "equilibrium";

    pub const ALL: [&str; 12] = [
        SYMMETRY,
        NON_EDGE_ZERO,
        KERNEL_ONES,
        KERNEL_CONFIGURATION,
        DIAGONAL,
        PSD,
        RANK,
        GENERAL_POSITION,
        GALE_KERNEL,
        GALE_SCALING,
        AFFINE_SPAN,
        EQUILIBRIUM,
    ];
}

fn ratio(num: f64, den: f64) -> f64 {
    if den > 0.0 {
        num / den
    } else if num == 0.0 {
        0.0
    } else {
        f64::INFINITY
    }
}

fn at_most(name: &'static str, measured: f64, threshold: f64) -> CheckRecord {
    CheckRecord {
        name,
        measured,
        threshold,
        pass: measured <= threshold,
    }
}

/// Max absolute row sum.
fn inf_norm(m: &Matrix) -> f64 {
    m.row_iter()
        .map(|row| row.iter().map(|v| v.abs()).sum::<f64>())
        .fold(0.0, f64::max)
}

/// Runs every sufficiency check against the stored matrices. Mathematical
/// failures are report entries; only inconsistent shapes are errors.
pub fn verify_certificate(
    cert: &RigidityCertificate,
    mode: RegularityMode,
) -> Result<VerificationReport, CertificateError> {
    cert.check_shapes()?;
    let tol = &cert.tolerances;
    let g = &cert.graph;
    let n = g.node_count();
    let omega = &cert.omega;
    let omega_max = max_abs(omega);
    let omega_inf = inf_norm(omega);
    let p_max = max_abs(&cert.p);
    let z_max = max_abs(&cert.z);
    let mut records = Vec::new();

    let asym = max_abs(&(omega - omega.transpose()));
    records.push(at_most(checks::SYMMETRY, ratio(asym, omega_max), tol.zero_rel_tol));

    let off_pattern = g
        .non_edges()
        .map(|(i, j)| omega[(i, j)].abs().max(omega[(j, i)].abs()))
        .fold(0.0, f64::max);
    records.push(at_most(
        checks::NON_EDGE_ZERO,
        ratio(off_pattern, omega_max),
        tol.zero_rel_tol,
    ));

    let row_sums = omega.column_sum();
    records.push(at_most(
        checks::KERNEL_ONES,
        ratio(row_sums.amax(), omega_inf),
        tol.zero_rel_tol,
    ));
    let omega_p = omega * &cert.p;
    records.push(at_most(
        checks::KERNEL_CONFIGURATION,
        ratio(max_abs(&omega_p), omega_inf * p_max),
        tol.zero_rel_tol,
    ));

    // Ω_ii = Σ_{k ~ i} ω_ik with ω_ik = -Ω_ik, evaluated edge by edge.
    let diag_gap = (0..n)
        .map(|i| {
            let stress_sum: f64 = g.neighbors(i).map(|k| -omega[(i, k)]).sum();
            (omega[(i, i)] - stress_sum).abs()
        })
        .fold(0.0, f64::max);
    records.push(at_most(
        checks::DIAGONAL,
        ratio(diag_gap, omega_inf),
        tol.zero_rel_tol,
    ));

    let (lo, hi) = symmetric_eigen_bounds(omega)?;
    let scale = hi.abs().max(lo.abs());
    let psd_measure = if scale > 0.0 { lo / scale } else { 0.0 };
    records.push(CheckRecord {
        name: checks::PSD,
        measured: psd_measure,
        threshold: -tol.psd_rel_tol,
        pass: psd_measure >= -tol.psd_rel_tol,
    });

    let expected_rank = n - cert.r - 1;
    let rank = numeric_rank(omega, tol);
    records.push(CheckRecord {
        name: checks::RANK,
        measured: rank as f64,
        threshold: expected_rank as f64,
        pass: rank == expected_rank,
    });

    let general_position = maximal_submatrix_regularity(&cert.z, mode, tol)?;
    records.push(CheckRecord {
        name: checks::GENERAL_POSITION,
        measured: general_position.worst_ratio,
        threshold: general_position.threshold,
        pass: general_position.pass,
    });

    let zt_e = cert.z.row_sum().amax();
    let zt_p = max_abs(&(cert.z.transpose() * &cert.p));
    let gale_kernel = ratio(zt_e, n as f64 * z_max).max(ratio(zt_p, n as f64 * z_max * p_max));
    records.push(at_most(checks::GALE_KERNEL, gale_kernel, tol.zero_rel_tol));

    let mut scaled = cert.x.clone();
    for (mut row, &s) in scaled.row_iter_mut().zip(cert.xi.iter()) {
        row *= s;
    }
    let scaling_gap = max_abs(&(&cert.z - &scaled));
    records.push(at_most(
        checks::GALE_SCALING,
        ratio(scaling_gap, z_max.max(max_abs(&scaled))),
        tol.zero_rel_tol,
    ));

    let mut homogeneous = Matrix::from_element(n, cert.r + 1, 1.0);
    homogeneous.columns_mut(0, cert.r).copy_from(&cert.p);
    let affine_rank = numeric_rank(&homogeneous, tol);
    records.push(CheckRecord {
        name: checks::AFFINE_SPAN,
        measured: affine_rank as f64,
        threshold: (cert.r + 1) as f64,
        pass: affine_rank == cert.r + 1,
    });

    let eq = equilibrium_residual(g, &cert.p, omega)?;
    records.push(at_most(checks::EQUILIBRIUM, eq, tol.zero_rel_tol));

    let pass = records.iter().all(|c| c.pass);
    Ok(VerificationReport {
        checks: records,
        general_position,
        pass,
    })
}

/// max_i ‖Σ_{j ~ i} ω_ij (p^i - p^j)‖ with ω_ij = -Ω_ij, relative to
/// max |Ω| · max_i ‖p^i‖. Computed edge by edge from the definition of an
/// equilibrium stress, without matrix identities.
pub fn equilibrium_residual(
    g: &Graph,
    p: &Matrix,
    omega: &Matrix,
) -> Result<f64, CertificateError> {
    let n = g.node_count();
    if p.nrows() != n {
        return Err(CertificateError::ShapeMismatch {
            field: "P",
            rows: p.nrows(),
            cols: p.ncols(),
            expected_rows: n,
            expected_cols: p.ncols(),
        });
    }
    if omega.shape() != (n, n) {
        return Err(CertificateError::ShapeMismatch {
            field: "Omega",
            rows: omega.nrows(),
            cols: omega.ncols(),
            expected_rows: n,
            expected_cols: n,
        });
    }
    let point_scale = p.row_iter().map(|row| row.norm()).fold(0.0, f64::max);
    let scale = max_abs(omega) * point_scale;
    if scale == 0.0 {
        return Ok(0.0);
    }
    let worst = (0..n)
        .map(|i| {
            let mut force = nalgebra::RowDVector::<f64>::zeros(p.ncols());
            for j in g.neighbors(i) {
                force += (p.row(i) - p.row(j)) * -omega[(i, j)];
            }
            force.norm()
        })
        .fold(0.0, f64::max);
    Ok(worst / scale)
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct MatrixDoc {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl MatrixDoc {
    fn from_matrix(m: &Matrix) -> Self {
        Self {
            rows: m.nrows(),
            cols: m.ncols(),
            data: m.row_iter().flat_map(|r| r.iter().copied().collect::<Vec<_>>()).collect(),
        }
    }

    fn into_matrix(self, field: &'static str) -> Result<Matrix, CertificateError> {
        if self.data.len() != self.rows * self.cols {
            return Err(CertificateError::Schema(format!(
                "{field}: data has {} entries, rows*cols = {}",
                self.data.len(),
                self.rows * self.cols
            )));
        }
        if self.data.iter().any(|v| !v.is_finite()) {
            return Err(CertificateError::NonFinite { field });
        }
        Ok(Matrix::from_row_slice(self.rows, self.cols, &self.data))
    }
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct CertificateDoc {
    version: String,
    n: usize,
    r: usize,
    seed: u64,
    edges: Vec<[usize; 2]>,
    tolerances: ToleranceProfile,
    xi: Vec<f64>,
    #[serde(rename = "X")]
    x: MatrixDoc,
    #[serde(rename = "Z")]
    z: MatrixDoc,
    #[serde(rename = "P")]
    p: MatrixDoc,
    #[serde(rename = "Omega")]
    omega: MatrixDoc,
}

/// Pretty-printed JSON with LF newlines and a trailing newline. Reals use
/// the shortest decimal that parses back to the same bits.
pub fn serialize(cert: &RigidityCertificate) -> String {
    let doc = CertificateDoc {
        version: FORMAT_VERSION.to_string(),
        n: cert.node_count(),
        r: cert.r,
        seed: cert.seed,
        edges: cert.graph.edges().map(|(i, j)| [i + 1, j + 1]).collect(),
        tolerances: cert.tolerances,
        xi: cert.xi.iter().copied().collect(),
        x: MatrixDoc::from_matrix(&cert.x),
        z: MatrixDoc::from_matrix(&cert.z),
        p: MatrixDoc::from_matrix(&cert.p),
        omega: MatrixDoc::from_matrix(&cert.omega),
    };
    let mut out = serde_json::to_string_pretty(&doc).expect("certificate document serializes");
    out.push('\n');
    out
}

pub fn deserialize(text: &str) -> Result<RigidityCertificate, CertificateError> {
    let value: serde_json::Value =
        serde_json::from_str(text).map_err(|e| CertificateError::Schema(e.to_string()))?;
    // Check the version before the full schema so old or future files get a
    // version error rather than a field error.
    match value.get("version") {
        Some(serde_json::Value::String(v)) if v == FORMAT_VERSION => {}
        Some(serde_json::Value::String(v)) => {
            return Err(CertificateError::Version { found: v.clone() })
        }
        _ => {}
    }
    let doc: CertificateDoc =
        serde_json::from_value(value).map_err(|e| CertificateError::Schema(e.to_string()))?;
    if doc.xi.iter().any(|v| !v.is_finite()) {
        return Err(CertificateError::NonFinite { field: "xi" });
    }
    let mut edges = Vec::with_capacity(doc.edges.len());
    for [i, j] in doc.edges {
        if i == 0 || j == 0 || i > doc.n || j > doc.n {
            return Err(CertificateError::Schema(format!(
                "edge [{i}, {j}] out of range 1..={}",
                doc.n
            )));
        }
        edges.push((i - 1, j - 1));
    }
    doc.tolerances.validate()?;
    let cert = RigidityCertificate {
        graph: Graph::from_edges(doc.n, edges)?,
        r: doc.r,
        seed: doc.seed,
        tolerances: doc.tolerances,
        xi: Vector::from_vec(doc.xi),
        x: doc.x.into_matrix("X")?,
        z: doc.z.into_matrix("Z")?,
        p: doc.p.into_matrix("P")?,
        omega: doc.omega.into_matrix("Omega")?,
    };
    cert.check_shapes()?;
    Ok(cert)
}
