//! Dendrogram export: Newick text and a JSON merge list.
//!
//! Newick branch lengths are parent height minus child height, with leaves
//! at height 0. Names containing Newick punctuation, whitespace or
//! underscores are single-quoted with embedded quotes doubled.
//!
//! The JSON form mirrors [`Dendrogram`]:
//!
//! ```text
//! {"leaves": ["A", "B"],
//!  "merges": [{"left": 0, "right": 1, "height": 0.4}],
//!  "linkage": "average",
//!  "tie_rule": "lexicographic_node_pair"}
//! ```

use std::fmt::Write as _;
use std::path::Path;

use serde::de::DeserializeOwned;
use serde::Serialize;

use crate::clustering::Dendrogram;
use crate::error::Result;
use crate::scalar::Scalar;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DendrogramFormat {
    Newick,
    Json,
}

fn quote_name(name: &str) -> String {
    let needs_quotes = name
        .chars()
        .any(|c| c.is_whitespace() || "()[]':;,_".contains(c));
    if needs_quotes {
        format!("'{}'", name.replace('\'', "''"))
    } else {
        name.to_string()
    }
}

pub fn to_newick<T: Scalar>(dend: &Dendrogram<T>) -> String {
    fn node<T: Scalar>(dend: &Dendrogram<T>, id: usize, out: &mut String) {
        match dend.children(id) {
            None => out.push_str(&quote_name(dend.leaves()[id].as_str())),
            Some((l, r)) => {
                out.push('(');
                for (k, child) in [l, r].into_iter().enumerate() {
                    if k > 0 {
                        out.push(',');
                    }
                    node(dend, child, out);
                    let len = (dend.height(id) - dend.height(child)).max(T::zero());
                    write!(out, ":{len}").unwrap();
                }
                out.push(')');
            }
        }
    }
    let mut out = String::new();
    node(dend, dend.root(), &mut out);
    out.push(';');
    out
}

pub fn to_json<T: Scalar + Serialize>(dend: &Dendrogram<T>) -> String {
    serde_json::to_string_pretty(dend).expect("dendrogram serializes")
}

pub fn from_json<T: Scalar + DeserializeOwned>(text: &str) -> Result<Dendrogram<T>> {
    Ok(serde_json::from_str(text)?)
}

pub fn write_dendrogram<T: Scalar + Serialize>(
    dend: &Dendrogram<T>,
    path: impl AsRef<Path>,
    format: DendrogramFormat,
) -> Result<()> {
    let mut text = match format {
        DendrogramFormat::Newick => to_newick(dend),
        DendrogramFormat::Json => to_json(dend),
    };
    text.push('\n');
    std::fs::write(path, text)?;
    Ok(())
}

pub fn read_dendrogram_json<T: Scalar + DeserializeOwned>(path: impl AsRef<Path>) -> Result<Dendrogram<T>> {
    from_json(&std::fs::read_to_string(path)?)
}
