//! Policy source files (TOML).
//!
//! ```toml
//! format = "pbcap/1"
//!
//! [[policy]]
//! id = "1"
//! keywords = ["RecordedBy(Test, Nurse)", "DiagnosedBy(Report, Doctor)"]
//! priority = 10
//! category = "Medical Documents"
//! storage_unit = "Hospital"
//! ```
//!
//! Larger priorities take precedence.

use std::collections::BTreeSet;
use std::fs;
use std::ops::Range;
use std::path::Path;

use pbcap_core::{Policy, ProvenanceFragment};
use serde::Deserialize;
use toml::Spanned;

use crate::error::{CliError, Result};
use crate::formats::FORMAT_VERSION;
use crate::storage::check_unit_name;

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct PolicyDocument {
    format: Spanned<String>,
    #[serde(default)]
    policy: Vec<Spanned<PolicyEntry>>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct PolicyEntry {
    id: Spanned<String>,
    keywords: Spanned<Vec<Spanned<String>>>,
    priority: i64,
    category: Spanned<String>,
    storage_unit: Spanned<String>,
}

/// 1-based line and column of a byte offset.
fn line_col(text: &str, offset: usize) -> (usize, usize) {
    let offset = offset.min(text.len());
    let before = &text[..offset];
    let line = before.matches('\n').count() + 1;
    let column = before.rfind('\n').map_or(offset, |i| offset - i - 1) + 1;
    (line, column)
}

fn parse_error(path: &Path, text: &str, span: Range<usize>, message: impl Into<String>) -> CliError {
    let (line, column) = line_col(text, span.start);
    CliError::Parse { path: path.to_path_buf(), line, column, message: message.into() }
}

pub fn parse_policies(path: &Path, text: &str) -> Result<Vec<Policy>> {
    let doc: PolicyDocument = toml::from_str(text).map_err(|e| {
        let span = e.span().unwrap_or(0..0);
        parse_error(path, text, span, e.message().to_string())
    })?;
    if doc.format.get_ref() != FORMAT_VERSION {
        return Err(parse_error(
            path,
            text,
            doc.format.span(),
            format!("unsupported format `{}`, expected `{FORMAT_VERSION}`", doc.format.get_ref()),
        ));
    }
    let mut ids = BTreeSet::new();
    let mut out = Vec::with_capacity(doc.policy.len());
    for entry in doc.policy {
        let span = entry.span();
        let entry = entry.into_inner();
        let id = entry.id.get_ref().clone();
        if !ids.insert(id.clone()) {
            return Err(parse_error(path, text, entry.id.span(), format!("duplicate policy id `{id}`")));
        }
        if entry.keywords.get_ref().is_empty() {
            return Err(parse_error(path, text, entry.keywords.span(), format!("policy `{id}` has no keywords")));
        }
        let keywords = entry
            .keywords
            .get_ref()
            .iter()
            .map(|k| ProvenanceFragment::parse(k.get_ref()).map_err(|e| parse_error(path, text, k.span(), e.to_string())))
            .collect::<Result<Vec<_>>>()?;
        check_unit_name(entry.storage_unit.get_ref())
            .map_err(|m| parse_error(path, text, entry.storage_unit.span(), m))?;
        let policy = Policy::new(
            id,
            keywords,
            entry.priority,
            entry.category.into_inner(),
            entry.storage_unit.into_inner(),
        )
        .map_err(|e| parse_error(path, text, span.clone(), e.to_string()))?;
        out.push(policy);
    }
    Ok(out)
}

pub fn load_policies(path: &Path) -> Result<Vec<Policy>> {
    let text = fs::read_to_string(path).map_err(|e| CliError::io(path, e))?;
    parse_policies(path, &text)
}
