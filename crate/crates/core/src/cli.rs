//! Command-line front end.
//!
//! Exit codes: 0 success, 1 mathematical failure (hypothesis not met,
//! certificate invalid, no counterexample), 2 usage or I/O error.

use std::fs;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand};
use serde_json::json;

use crate::certificate::{self, verify_certificate};
use crate::falsifier::{self, FalsifyError, DEFAULT_FALSIFIER_TOL};
use crate::gale::{self, ConstructError, ConstructOptions, Configuration};
use crate::graph::{self, Family, Graph};
use crate::numeric::{Matrix, RegularityMode, DEFAULT_SAMPLE_SIZE};

pub const EXIT_OK: i32 = 0;
pub const EXIT_FAILURE: i32 = 1;
pub const EXIT_USAGE: i32 = 2;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CommandOutcome {
    pub code: i32,
    pub report: String,
    pub artifact: Option<PathBuf>,
}

impl CommandOutcome {
    fn new(code: i32, report: impl Into<String>) -> Self {
        Self {
            code,
            report: report.into(),
            artifact: None,
        }
    }

    fn usage(msg: impl std::fmt::Display) -> Self {
        Self::new(EXIT_USAGE, format!("error: {msg}\n"))
    }
}

#[derive(Parser, Debug)]
#[command(name = "rigidity", version, about = "Universally rigid frameworks from vertex-connected graphs")]
struct Cli {
    /// Emit machine-readable JSON reports.
    #[arg(long, global = true)]
    json: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Print the vertex connectivity of a graph.
    Connectivity { file: PathBuf },
    /// Build and verify a universally rigid framework in R^dim.
    Construct {
        file: PathBuf,
        #[arg(long)]
        dim: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Write the certificate here instead of standard output.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Certify general position over every maximal row subset.
        #[arg(long)]
        exhaustive_gp: bool,
    },
    /// Re-verify a certificate file.
    Verify {
        cert: PathBuf,
        /// Sample row subsets instead of enumerating them all.
        #[arg(long)]
        sampled: bool,
    },
    /// Reflect one side of a small separator to show non-rigidity.
    Falsify {
        file: PathBuf,
        #[arg(long)]
        dim: usize,
        /// Configuration as a JSON matrix {rows, cols, data}; random if absent.
        #[arg(long)]
        config: Option<PathBuf>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Write a graph family member as an edge list.
    Gen {
        family: String,
        params: Vec<usize>,
    },
}

/// Parses `args` (including the program name) and runs the subcommand.
pub fn run<I, T>(args: I) -> CommandOutcome
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            return CommandOutcome::new(code, e.to_string());
        }
    };
    let json = cli.json;
    match cli.command {
        Command::Connectivity { file } => connectivity(&file, json),
        Command::Construct {
            file,
            dim,
            seed,
            out,
            exhaustive_gp,
        } => construct(&file, dim, seed, out, exhaustive_gp, json),
        Command::Verify { cert, sampled } => verify(&cert, sampled, json),
        Command::Falsify {
            file,
            dim,
            config,
            seed,
        } => falsify(&file, dim, config.as_deref(), seed, json),
        Command::Gen { family, params } => gen(&family, &params),
    }
}

fn read_graph(path: &Path) -> Result<Graph, CommandOutcome> {
    let text = fs::read_to_string(path)
        .map_err(|e| CommandOutcome::usage(format!("{}: {e}", path.display())))?;
    graph::parse_graph(&text).map_err(|e| CommandOutcome::usage(format!("{}: {e}", path.display())))
}

fn labels(nodes: &[usize]) -> Vec<usize> {
    nodes.iter().map(|v| v + 1).collect()
}

fn connectivity(file: &Path, json: bool) -> CommandOutcome {
    let g = match read_graph(file) {
        Ok(g) => g,
        Err(out) => return out,
    };
    match graph::vertex_connectivity(&g) {
        Ok(k) if json => CommandOutcome::new(EXIT_OK, format!("{}\n", json!({ "connectivity": k }))),
        Ok(k) => CommandOutcome::new(EXIT_OK, format!("{k}\n")),
        Err(e) => CommandOutcome::usage(e),
    }
}

fn construct(
    file: &Path,
    dim: usize,
    seed: u64,
    out: Option<PathBuf>,
    exhaustive_gp: bool,
    json: bool,
) -> CommandOutcome {
    let g = match read_graph(file) {
        Ok(g) => g,
        Err(out) => return out,
    };
    let opts = ConstructOptions {
        exhaustive_gp,
        ..ConstructOptions::default()
    };
    match gale::construct_universally_rigid_framework(&g, dim, seed, &opts) {
        Ok(built) => {
            let text = certificate::serialize(&built.certificate);
            let Some(path) = out else {
                return CommandOutcome::new(EXIT_OK, text);
            };
            if let Err(e) = fs::write(&path, &text) {
                return CommandOutcome::usage(format!("{}: {e}", path.display()));
            }
            let report = if json {
                format!(
                    "{}\n",
                    json!({
                        "certificate": path.display().to_string(),
                        "retries_used": built.retries_used,
                        "verification": built.report,
                    })
                )
            } else {
                format!(
                    "wrote {} (retries used: {})\n{}",
                    path.display(),
                    built.retries_used,
                    built.report.summary()
                )
            };
            CommandOutcome {
                code: EXIT_OK,
                report,
                artifact: Some(path),
            }
        }
        Err(ConstructError::Hypothesis {
            kappa,
            required,
            separator,
        }) => {
            let report = if json {
                format!(
                    "{}\n",
                    json!({
                        "error": "connectivity",
                        "connectivity": kappa,
                        "required": required,
                        "separator": labels(&separator.nodes),
                        "parts": [labels(&separator.part_one), labels(&separator.part_two)],
                    })
                )
            } else {
                format!(
                    "connectivity κ = {kappa} < {required} = r+1\nseparator: {:?}\nparts: {:?} | {:?}\n",
                    labels(&separator.nodes),
                    labels(&separator.part_one),
                    labels(&separator.part_two)
                )
            };
            CommandOutcome::new(EXIT_FAILURE, report)
        }
        Err(e @ ConstructError::Representation(crate::ortho::OrthoError::DimensionOutOfRange { .. })) => {
            CommandOutcome::usage(e)
        }
        Err(e) => CommandOutcome::new(EXIT_FAILURE, format!("construction failed: {e}\n")),
    }
}

fn verify(path: &Path, sampled: bool, json: bool) -> CommandOutcome {
    let text = match fs::read_to_string(path) {
        Ok(t) => t,
        Err(e) => return CommandOutcome::usage(format!("{}: {e}", path.display())),
    };
    let cert = match certificate::deserialize(&text) {
        Ok(c) => c,
        Err(e) => return CommandOutcome::usage(format!("{}: {e}", path.display())),
    };
    let mode = if sampled {
        RegularityMode::Sampled {
            samples: DEFAULT_SAMPLE_SIZE,
            seed: cert.seed,
        }
    } else {
        RegularityMode::Exhaustive
    };
    let report = match verify_certificate(&cert, mode) {
        Ok(r) => r,
        Err(e) => {
            return CommandOutcome::usage(format!("{e} (use --sampled for large certificates)"))
        }
    };
    let code = if report.pass { EXIT_OK } else { EXIT_FAILURE };
    let text = if json {
        format!("{}\n", serde_json::to_string(&report).expect("report serializes"))
    } else {
        report.summary()
    };
    CommandOutcome::new(code, text)
}

fn read_configuration(path: &Path) -> Result<Configuration, String> {
    #[derive(serde::Deserialize)]
    struct Doc {
        rows: usize,
        cols: usize,
        data: Vec<f64>,
    }
    let text = fs::read_to_string(path).map_err(|e| format!("{}: {e}", path.display()))?;
    let doc: Doc = serde_json::from_str(&text).map_err(|e| format!("{}: {e}", path.display()))?;
    if doc.data.len() != doc.rows * doc.cols || doc.data.iter().any(|v| !v.is_finite()) {
        return Err(format!(
            "{}: expected {} finite entries",
            path.display(),
            doc.rows * doc.cols
        ));
    }
    Ok(Configuration::new(Matrix::from_row_slice(
        doc.rows, doc.cols, &doc.data,
    )))
}

fn falsify(file: &Path, dim: usize, config: Option<&Path>, seed: u64, json: bool) -> CommandOutcome {
    let g = match read_graph(file) {
        Ok(g) => g,
        Err(out) => return out,
    };
    let p = match config {
        Some(path) => match read_configuration(path) {
            Ok(p) => p,
            Err(e) => return CommandOutcome::usage(e),
        },
        None => falsifier::random_configuration(g.node_count(), dim, seed),
    };
    match falsifier::reflection_counterexample(&g, &p, dim, DEFAULT_FALSIFIER_TOL) {
        Ok(w) if json => CommandOutcome::new(EXIT_OK, w.to_json()),
        Ok(w) => {
            let mut report = format!(
                "separator {:?} splits {:?} | {:?}\nreflected {:?}\nmax edge length error {:.3e}\ncongruence gap {:.3e} at pair {:?}\n",
                labels(&w.separator.nodes),
                labels(&w.separator.part_one),
                labels(&w.separator.part_two),
                labels(&w.separator.part_two),
                w.max_edge_length_error,
                w.congruence_gap,
                (w.gap_pair.0 + 1, w.gap_pair.1 + 1),
            );
            if w.completed {
                report.push_str("separator smaller than r: hyperplane completed with principal axes\n");
            }
            report.push_str("equivalent but not congruent: framework is not universally rigid\n");
            CommandOutcome::new(EXIT_OK, report)
        }
        Err(e @ (FalsifyError::ShapeMismatch { .. } | FalsifyError::TooFewNodes { .. })) => {
            CommandOutcome::usage(e)
        }
        Err(e) => CommandOutcome::new(EXIT_FAILURE, format!("{e}\n")),
    }
}

fn gen(family: &str, params: &[usize]) -> CommandOutcome {
    let family: Family = match family.parse() {
        Ok(f) => f,
        Err(e) => return CommandOutcome::usage(e),
    };
    match graph::generate(family, params) {
        Ok(g) => CommandOutcome::new(EXIT_OK, g.to_edge_list()),
        Err(e) => CommandOutcome::usage(e),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gen_writes_edge_lists() {
        let out = run(["rigidity", "gen", "cycle", "4"]);
        assert_eq!(out.code, EXIT_OK);
        assert_eq!(out.report, "4 4\n1 2\n1 4\n2 3\n3 4\n");
        assert_eq!(run(["rigidity", "gen", "wheel", "4"]).code, EXIT_USAGE);
        assert_eq!(run(["rigidity", "gen", "cycle", "2"]).code, EXIT_USAGE);
    }

    #[test]
    fn usage_errors_exit_two() {
        assert_eq!(run(["rigidity"]).code, EXIT_USAGE);
        assert_eq!(run(["rigidity", "bogus"]).code, EXIT_USAGE);
        assert_eq!(run(["rigidity", "connectivity", "/no/such/file"]).code, EXIT_USAGE);
        assert_eq!(run(["rigidity", "construct", "x.txt", "--dim", "two"]).code, EXIT_USAGE);
        assert_eq!(run(["rigidity", "--help"]).code, EXIT_OK);
    }
}
