//! Hermitian structures on Lie algebras and the Bismut connection.

mod connection;
mod metric;
mod normal_form;
mod skl;
mod torsion;

pub use connection::{bismut_connection, curvature, levi_civita, Connection, CurvatureTensor};
pub use metric::{fundamental_form, Metric};
pub use normal_form::{skl_normal_form, verify as verify_normal_form, CanonicalSklData, NormalForm};
pub use skl::{
    bismut_curvature, bismut_ricci, bismut_ricci_two_step, nabla_torsion_residual, skl_residuals, two_form_matrix,
    SklResiduals,
};
pub(crate) use torsion::require_integrable;
pub use torsion::{
    astheno_form, astheno_of_form, astheno_residual, bismut_torsion, center_via_torsion, corollary_identity_residual, ddc_omega,
    dense_three_form, is_pluriclosed, min_self_bracket_on, pluriclosed_report, pluriclosed_residual, skt_quadruple,
    skt_quadruple_form, torsion_closed_form, PluriclosedReport,
};
