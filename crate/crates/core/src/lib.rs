//! Universally rigid bar frameworks for vertex-connected graphs.
//!
//! For an (r+1)-connected graph on n nodes the crate builds a configuration
//! in general position in R^r together with a positive semidefinite stress
//! matrix of rank n-r-1, and checks both against the standard sufficient
//! condition for universal rigidity. Graphs below the connectivity bound get
//! an explicit reflection counterexample instead.
//!
//! Pipeline: [`ortho`] builds a general-position orthogonal representation,
//! [`gale`] turns it into a Gale matrix, configuration and stress matrix,
//! and [`certificate`] verifies and serializes the result.

pub mod certificate;
pub mod cli;
pub mod falsifier;
pub mod gale;
pub mod graph;
pub mod numeric;
pub mod ortho;

pub use certificate::{
    deserialize, equilibrium_residual, serialize, verify_certificate, RigidityCertificate,
    VerificationReport,
};
pub use falsifier::{equivalence_and_congruence, reflection_counterexample, ReflectionWitness};
pub use gale::{
    construct_universally_rigid_framework, Configuration, ConstructOptions, Construction, GaleData,
};
pub use graph::{generate, parse_graph, vertex_connectivity, Family, Graph};
pub use numeric::{Matrix, RegularityMode, ToleranceProfile, Vector};
pub use ortho::OrthogonalRepresentation;
