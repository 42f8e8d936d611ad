//! JSON formats. Indices are 0-based.
//!
//! * Lie algebra: `{"dim": 4, "brackets": [{"i": 0, "j": 2, "k": 1, "c": 1.0}]}`
//!   with `i < j` and zero terms omitted.
//! * Complex structure: `{"J": [[...], ...]}` (row-major).
//! * Metric: `{"G": [[...], ...]}`.
//! * A full structure file merges the three: `{"dim", "brackets", "J", "G"?}`.

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::complex::ComplexStructure;
use crate::error::{Error, Result};
use crate::hermitian::Metric;
use crate::lie::LieAlgebra;

pub mod matrix_rows {
    use nalgebra::DMatrix;
    use serde::{de::Error as _, Deserialize, Deserializer, Serialize, Serializer};

    pub fn to_rows(m: &DMatrix<f64>) -> Vec<Vec<f64>> {
        m.row_iter().map(|r| r.iter().cloned().collect()).collect()
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<DMatrix<f64>, String> {
        let r = rows.len();
        let c = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|row| row.len() != c) {
            return Err("ragged matrix".into());
        }
        Ok(DMatrix::from_fn(r, c, |a, b| rows[a][b]))
    }

    pub fn serialize<S: Serializer>(m: &DMatrix<f64>, s: S) -> Result<S::Ok, S::Error> {
        to_rows(m).serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<DMatrix<f64>, D::Error> {
        let rows = Vec::<Vec<f64>>::deserialize(d)?;
        from_rows(&rows).map_err(D::Error::custom)
    }
}

pub mod optional_matrix_rows {
    use nalgebra::DMatrix;
    use serde::{de::Error as _, Deserialize, Deserializer, Serialize, Serializer};

    pub fn serialize<S: Serializer>(m: &Option<DMatrix<f64>>, s: S) -> Result<S::Ok, S::Error> {
        m.as_ref().map(super::matrix_rows::to_rows).serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Option<DMatrix<f64>>, D::Error> {
        let rows = Option::<Vec<Vec<f64>>>::deserialize(d)?;
        rows.map(|r| super::matrix_rows::from_rows(&r)).transpose().map_err(D::Error::custom)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BracketJson {
    pub i: usize,
    pub j: usize,
    pub k: usize,
    pub c: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LieAlgebraJson {
    pub dim: usize,
    pub brackets: Vec<BracketJson>,
}

impl From<&LieAlgebra> for LieAlgebraJson {
    fn from(l: &LieAlgebra) -> Self {
        Self {
            dim: l.dim(),
            brackets: l.brackets().into_iter().map(|(i, j, k, c)| BracketJson { i, j, k, c }).collect(),
        }
    }
}

impl LieAlgebraJson {
    pub fn to_lie(&self) -> Result<LieAlgebra> {
        for b in &self.brackets {
            if b.i >= b.j {
                return Err(Error::InvalidParameters(format!("bracket ({}, {}) must have i < j", b.i, b.j)));
            }
            if b.j >= self.dim || b.k >= self.dim {
                return Err(Error::InvalidParameters(format!("bracket index out of range for dim {}", self.dim)));
            }
        }
        LieAlgebra::new(self.dim, self.brackets.iter().map(|b| (b.i, b.j, b.k, b.c)))
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ComplexStructureJson {
    #[serde(rename = "J", with = "matrix_rows")]
    pub j: DMatrix<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MetricJson {
    #[serde(rename = "G", with = "matrix_rows")]
    pub g: DMatrix<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StructureJson {
    pub dim: usize,
    pub brackets: Vec<BracketJson>,
    #[serde(rename = "J", with = "matrix_rows")]
    pub j: DMatrix<f64>,
    #[serde(rename = "G", default, skip_serializing_if = "Option::is_none", with = "optional_matrix_rows")]
    pub g: Option<DMatrix<f64>>,
}

/// A Lie algebra with complex structure and optional metric.
#[derive(Clone, Debug)]
pub struct Structure {
    pub lie: LieAlgebra,
    pub j: ComplexStructure,
    pub metric: Option<Metric>,
}

impl Structure {
    pub fn to_json(&self) -> StructureJson {
        let l = LieAlgebraJson::from(&self.lie);
        StructureJson { dim: l.dim, brackets: l.brackets, j: self.j.matrix().clone(), g: self.metric.as_ref().map(|m| m.matrix().clone()) }
    }

    pub fn from_json(s: &StructureJson) -> Result<Self> {
        let lie = LieAlgebraJson { dim: s.dim, brackets: s.brackets.clone() }.to_lie()?;
        let j = ComplexStructure::new(s.j.clone())?;
        if j.dim() != lie.dim() {
            return Err(Error::DimensionMismatch { expected: lie.dim(), found: j.dim() });
        }
        let metric = s.g.clone().map(Metric::new).transpose()?;
        if let Some(m) = &metric {
            if m.dim() != lie.dim() {
                return Err(Error::DimensionMismatch { expected: lie.dim(), found: m.dim() });
            }
        }
        Ok(Self { lie, j, metric })
    }
}

pub fn lie_to_json(l: &LieAlgebra) -> String {
    serde_json::to_string_pretty(&LieAlgebraJson::from(l)).expect("plain data serializes")
}

pub fn lie_from_json(text: &str) -> Result<LieAlgebra> {
    serde_json::from_str::<LieAlgebraJson>(text)?.to_lie()
}

pub fn complex_structure_to_json(j: &ComplexStructure) -> String {
    serde_json::to_string_pretty(&ComplexStructureJson { j: j.matrix().clone() }).expect("plain data serializes")
}

pub fn complex_structure_from_json(text: &str) -> Result<ComplexStructure> {
    ComplexStructure::new(serde_json::from_str::<ComplexStructureJson>(text)?.j)
}

pub fn metric_to_json(g: &Metric) -> String {
    serde_json::to_string_pretty(&MetricJson { g: g.matrix().clone() }).expect("plain data serializes")
}

pub fn metric_from_json(text: &str) -> Result<Metric> {
    Metric::new(serde_json::from_str::<MetricJson>(text)?.g)
}

pub fn structure_to_json(s: &Structure) -> String {
    serde_json::to_string_pretty(&s.to_json()).expect("plain data serializes")
}

pub fn structure_from_json(text: &str) -> Result<Structure> {
    Structure::from_json(&serde_json::from_str::<StructureJson>(text)?)
}
