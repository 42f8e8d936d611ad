//! Loading a structure from a JSON file, a structure-equation file or the
//! catalog, together with the declared expectations and an input hash.

use std::path::Path;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use sktlab::catalog::{self, CatalogOptions};
use sktlab::io::{Structure, StructureJson};
use sktlab::lie::Nilpotency;
use sktlab::{structeq, Error, Result};

/// What the input claims about itself. Every field is optional; only the
/// declared ones are checked.
#[derive(Clone, Debug, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Expectations {
    #[serde(default, deserialize_with = "step_declaration")]
    pub step: Option<Nilpotency>,
    pub unimodular: Option<bool>,
    pub integrable: Option<bool>,
    pub abelian_j: Option<bool>,
    pub kahler: Option<bool>,
    pub pluriclosed: Option<bool>,
    pub astheno: Option<bool>,
    pub skl: Option<bool>,
}

/// `"step": 3`, `"step": "not_nilpotent"` or the tagged form `{"step": 3}`.
fn step_declaration<'de, D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Option<Nilpotency>, D::Error> {
    #[derive(Deserialize)]
    #[serde(untagged)]
    enum Decl {
        Bare(usize),
        Tagged(Nilpotency),
    }
    Ok(Option::<Decl>::deserialize(d)?.map(|s| match s {
        Decl::Bare(n) => Nilpotency::Step(n),
        Decl::Tagged(n) => n,
    }))
}

#[derive(Clone, Debug, Serialize)]
pub struct InputInfo {
    pub source: String,
    pub sha256: String,
    #[serde(skip_serializing_if = "serde_json::Value::is_null")]
    pub params: serde_json::Value,
}

pub struct Loaded {
    pub info: InputInfo,
    pub structure: Structure,
    pub expected: Expectations,
}

#[derive(Deserialize)]
struct ExpectationsOnly {
    #[serde(default)]
    expected: Expectations,
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

pub fn load(input: Option<&str>, catalog_name: Option<&str>, opts: &CatalogOptions) -> Result<Loaded> {
    match (input, catalog_name) {
        (Some(_), Some(_)) => Err(Error::InvalidParameters("give either --input or --catalog, not both".into())),
        (None, None) => Err(Error::InvalidParameters("no input: use --input PATH or --catalog NAME".into())),
        (Some(i), None) => match i.strip_prefix("catalog:") {
            Some(name) => from_catalog(name, opts),
            None => from_file(Path::new(i)),
        },
        (None, Some(name)) => from_catalog(name, opts),
    }
}

fn from_catalog(name: &str, opts: &CatalogOptions) -> Result<Loaded> {
    let entry = catalog::by_name(name, opts)?;
    let text = sktlab::io::structure_to_json(&entry.structure);
    let e = &entry.expected;
    Ok(Loaded {
        info: InputInfo { source: format!("catalog:{name}"), sha256: sha256_hex(text.as_bytes()), params: entry.params.clone() },
        expected: Expectations {
            step: Some(e.step),
            unimodular: Some(e.unimodular),
            integrable: Some(true),
            abelian_j: Some(e.abelian_j),
            pluriclosed: e.pluriclosed,
            skl: e.skl,
            ..Expectations::default()
        },
        structure: entry.structure,
    })
}

fn from_file(path: &Path) -> Result<Loaded> {
    let bytes = std::fs::read(path)
        .map_err(|e| Error::InvalidParameters(format!("cannot read {}: {e}", path.display())))?;
    let text = String::from_utf8(bytes.clone())
        .map_err(|_| Error::InvalidParameters(format!("{} is not UTF-8", path.display())))?;
    let info = InputInfo { source: path.display().to_string(), sha256: sha256_hex(&bytes), params: serde_json::Value::Null };
    if text.trim_start().starts_with('{') {
        let json: StructureJson = serde_json::from_str(&text)?;
        let expected = serde_json::from_str::<ExpectationsOnly>(&text)?.expected;
        Ok(Loaded { info, structure: Structure::from_json(&json)?, expected })
    } else {
        let spec = structeq::parse(&text)?;
        let (lie, j) = structeq::realify(&spec)?;
        Ok(Loaded { info, structure: Structure { lie, j, metric: None }, expected: Expectations::default() })
    }
}
