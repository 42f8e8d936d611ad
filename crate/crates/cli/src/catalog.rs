use serde::Serialize;
use sktlab::catalog::{self, CatalogOptions, ListingItem};
use sktlab::io::StructureJson;
use sktlab::Result;

use crate::report::Lines;

#[derive(Serialize)]
#[serde(untagged)]
pub enum CatalogResult {
    Listing(Vec<ListingItem>),
    Entry { name: String, params: serde_json::Value, structure: StructureJson },
}

pub fn run(name: Option<&str>, opts: &CatalogOptions) -> Result<CatalogResult> {
    match name {
        Some(n) => {
            let e = catalog::by_name(n, opts)?;
            Ok(CatalogResult::Entry { name: e.name.clone(), params: e.params.clone(), structure: e.structure.to_json() })
        }
        None => Ok(CatalogResult::Listing(serde_json::from_str(&catalog::listing()?)?)),
    }
}

pub fn render(r: &CatalogResult) -> String {
    let mut l = Lines::new();
    match r {
        CatalogResult::Listing(items) => {
            for it in items {
                let e = &it.expected;
                l.kv(
                    &it.name,
                    format!(
                        "dim {}, {}, unimodular {}, abelian J {}, params {}",
                        it.dim,
                        match e.step.step() {
                            Some(s) => format!("step {s}"),
                            None => "not nilpotent".into(),
                        },
                        e.unimodular,
                        e.abelian_j,
                        it.params
                    ),
                );
            }
            l.raw("(pass --catalog NAME to print an entry as a structure file)");
        }
        CatalogResult::Entry { structure, .. } => {
            l.raw(serde_json::to_string_pretty(structure).expect("structure serializes"));
        }
    }
    l.0
}
