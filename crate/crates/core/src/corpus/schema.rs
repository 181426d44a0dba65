//! Column-mapping configuration for ingestion.
//!
//! No single file layout is canonical for annotation exports, so the mapping
//! from logical fields to column names (CSV) or keys (JSON lines) is a small
//! config document, loadable from JSON or TOML. Required fields must resolve
//! to a column; optional fields fall back to defaults when the column is
//! absent from the file.

use std::path::Path;

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Field mapping for raw annotation files.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default)]
pub struct AnnotationSchema {
    pub annotator_id: String,
    pub argument_id: String,
    pub quality_label: String,
    pub stance_label: String,
    pub text: Option<String>,
    pub topic: Option<String>,
    pub author: Option<String>,
    pub declared_stance: Option<String>,
    pub is_test_question: Option<String>,
    pub test_passed: Option<String>,
}

impl Default for AnnotationSchema {
    fn default() -> Self {
        Self {
            annotator_id: "annotator_id".into(),
            argument_id: "argument_id".into(),
            quality_label: "quality_label".into(),
            stance_label: "stance_label".into(),
            text: Some("text".into()),
            topic: Some("topic".into()),
            author: Some("author".into()),
            declared_stance: Some("declared_stance".into()),
            is_test_question: Some("is_test_question".into()),
            test_passed: Some("test_passed".into()),
        }
    }
}

/// Field mapping for the released scored-dataset layout. Defaults follow the
/// published IBM-Rank-30k column names.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default)]
pub struct ScoredCorpusSchema {
    /// Explicit id column; when `None`, row ids are synthesized from the row
    /// index.
    pub id: Option<String>,
    pub text: String,
    pub topic: String,
    pub split: Option<String>,
    pub wa_score: String,
    pub mace_p_score: String,
    pub stance: Option<String>,
}

impl Default for ScoredCorpusSchema {
    fn default() -> Self {
        Self {
            id: None,
            text: "argument".into(),
            topic: "topic".into(),
            split: Some("set".into()),
            wa_score: "WA".into(),
            mace_p_score: "MACE-P".into(),
            stance: Some("stance_WA".into()),
        }
    }
}

/// Loads a schema document, dispatching on the file extension
/// (`.toml` vs everything else = JSON).
pub fn load_schema<T: DeserializeOwned>(path: impl AsRef<Path>) -> Result<T> {
    let path = path.as_ref();
    let raw = std::fs::read_to_string(path)?;
    if path.extension().and_then(|e| e.to_str()) == Some("toml") {
        toml::from_str(&raw).map_err(|e| Error::Schema(format!("{}: {e}", path.display())))
    } else {
        serde_json::from_str(&raw).map_err(|e| Error::Schema(format!("{}: {e}", path.display())))
    }
}
