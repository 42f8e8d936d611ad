//! Left-invariant Hermitian geometry on real Lie algebras given by structure
//! constants: Bismut torsion and curvature, pluriclosed, astheno-Kähler and
//! Strominger Kähler-like checks, feasibility of pluriclosed inner products,
//! and the pluriclosed flow.

pub mod catalog;
pub mod complex;
pub mod config;
pub mod error;
pub mod exterior;
pub mod feasibility;
pub mod flow;
pub mod hermitian;
pub mod io;
pub mod lie;
pub mod linalg;
pub mod structeq;
pub mod sweep;

pub use complex::ComplexStructure;
pub use config::Tolerances;
pub use error::{Error, Result};
pub use exterior::KForm;
pub use flow::{FlowConfig, FlowTrace};
pub use hermitian::{CanonicalSklData, Connection, CurvatureTensor, Metric, SklResiduals};
pub use lie::{LieAlgebra, Nilpotency, Subspace};
pub use structeq::StructureEquationSpec;

pub use nalgebra::{DMatrix, DVector};
pub use num_complex::Complex64;
