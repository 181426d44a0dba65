//! File ingestion and emission: CSV and JSON-lines annotation files, the
//! released scored-dataset layout, and the canonical annotation CSV format.
//!
//! Row-level failures carry the 1-based data row (CSV) or line (JSON lines)
//! of the offending record.

use std::collections::BTreeMap;
use std::path::Path;

use crate::corpus::schema::{AnnotationSchema, ScoredCorpusSchema};
use crate::corpus::{
    AnnotationRecord, AnnotationSet, AnnotatorId, Argument, ArgumentId, ResolvedStance,
    ScoredArgument, ScoredCorpus, Split, Stance,
};
use crate::error::{Error, Result};

fn row_err(row: usize, message: impl Into<String>) -> Error {
    Error::Row {
        row,
        message: message.into(),
    }
}

fn parse_quality(raw: &str, row: usize) -> Result<bool> {
    match raw.trim() {
        "0" => Ok(false),
        "1" => Ok(true),
        other => Err(row_err(
            row,
            format!("quality_label must be 0 or 1, got '{other}'"),
        )),
    }
}

fn parse_stance(raw: &str, row: usize) -> Result<Stance> {
    match raw.trim().to_ascii_lowercase().as_str() {
        "pro" => Ok(Stance::Pro),
        "con" => Ok(Stance::Con),
        other => Err(row_err(
            row,
            format!("stance must be 'pro' or 'con', got '{other}'"),
        )),
    }
}

fn parse_declared_stance(raw: &str, row: usize) -> Result<Option<Stance>> {
    match raw.trim().to_ascii_lowercase().as_str() {
        "" | "unknown" => Ok(None),
        other => parse_stance(other, row).map(Some),
    }
}

fn parse_flag(raw: &str, row: usize, field: &str) -> Result<bool> {
    match raw.trim().to_ascii_lowercase().as_str() {
        "true" | "1" | "yes" => Ok(true),
        "false" | "0" | "no" | "" => Ok(false),
        other => Err(row_err(row, format!("{field} must be boolean, got '{other}'"))),
    }
}

fn parse_opt_flag(raw: &str, row: usize, field: &str) -> Result<Option<bool>> {
    if raw.trim().is_empty() {
        Ok(None)
    } else {
        parse_flag(raw, row, field).map(Some)
    }
}

/// One parsed logical row, before set-level validation.
struct RawRow {
    row: usize,
    annotator_id: String,
    argument_id: String,
    quality_label: bool,
    stance_label: Stance,
    text: Option<String>,
    topic: Option<String>,
    author: Option<String>,
    declared_stance: Option<Stance>,
    is_test_question: bool,
    test_passed: Option<bool>,
}

fn assemble(rows: Vec<RawRow>) -> Result<AnnotationSet> {
    let mut arguments: BTreeMap<String, Argument> = BTreeMap::new();
    let mut records = Vec::with_capacity(rows.len());
    for raw in rows {
        if raw.is_test_question != raw.test_passed.is_some() {
            return Err(row_err(
                raw.row,
                "test_passed must be given exactly when is_test_question is true",
            ));
        }
        let candidate = Argument {
            id: ArgumentId::new(raw.argument_id.clone()),
            text: raw.text.clone().unwrap_or_default(),
            topic: raw.topic.clone().unwrap_or_default(),
            declared_stance: raw.declared_stance,
            author: raw.author.clone(),
        };
        match arguments.get(&raw.argument_id) {
            None => {
                arguments.insert(raw.argument_id.clone(), candidate);
            }
            Some(existing) => {
                if *existing != candidate {
                    return Err(row_err(
                        raw.row,
                        format!(
                            "argument '{}' has conflicting metadata across rows",
                            raw.argument_id
                        ),
                    ));
                }
            }
        }
        records.push(AnnotationRecord {
            annotator_id: AnnotatorId::new(raw.annotator_id),
            argument_id: ArgumentId::new(raw.argument_id),
            quality_label: raw.quality_label,
            stance_label: raw.stance_label,
            is_test_question: raw.is_test_question,
            test_passed: raw.test_passed,
        });
    }
    AnnotationSet::new(arguments.into_values().collect(), records)
}

struct HeaderMap {
    index: BTreeMap<String, usize>,
}

impl HeaderMap {
    fn new(headers: &csv::StringRecord) -> Self {
        let index = headers
            .iter()
            .enumerate()
            .map(|(i, name)| (name.to_string(), i))
            .collect();
        Self { index }
    }

    fn required(&self, name: &str) -> Result<usize> {
        self.index
            .get(name)
            .copied()
            .ok_or_else(|| Error::Schema(format!("required column '{name}' not found in header")))
    }

    fn optional(&self, name: Option<&String>) -> Option<usize> {
        name.and_then(|n| self.index.get(n).copied())
    }
}

fn field<'a>(record: &'a csv::StringRecord, idx: usize) -> &'a str {
    record.get(idx).unwrap_or("")
}

/// Loads and validates a raw annotation file. `.jsonl`/`.ndjson` files parse
/// as JSON lines; everything else parses as headered CSV.
pub fn load_annotations(path: impl AsRef<Path>, schema: &AnnotationSchema) -> Result<AnnotationSet> {
    let path = path.as_ref();
    match path.extension().and_then(|e| e.to_str()) {
        Some("jsonl") | Some("ndjson") => load_annotations_jsonl(path, schema),
        _ => load_annotations_csv(path, schema),
    }
}

fn load_annotations_csv(path: &Path, schema: &AnnotationSchema) -> Result<AnnotationSet> {
    let mut reader = csv::Reader::from_path(path)?;
    let headers = HeaderMap::new(reader.headers()?);
    let annotator_idx = headers.required(&schema.annotator_id)?;
    let argument_idx = headers.required(&schema.argument_id)?;
    let quality_idx = headers.required(&schema.quality_label)?;
    let stance_idx = headers.required(&schema.stance_label)?;
    let text_idx = headers.optional(schema.text.as_ref());
    let topic_idx = headers.optional(schema.topic.as_ref());
    let author_idx = headers.optional(schema.author.as_ref());
    let declared_idx = headers.optional(schema.declared_stance.as_ref());
    let test_q_idx = headers.optional(schema.is_test_question.as_ref());
    let test_p_idx = headers.optional(schema.test_passed.as_ref());

    let mut rows = Vec::new();
    for (i, record) in reader.records().enumerate() {
        let row = i + 1;
        let record = record?;
        let author = author_idx
            .map(|idx| field(&record, idx).to_string())
            .filter(|s| !s.is_empty());
        rows.push(RawRow {
            row,
            annotator_id: field(&record, annotator_idx).to_string(),
            argument_id: field(&record, argument_idx).to_string(),
            quality_label: parse_quality(field(&record, quality_idx), row)?,
            stance_label: parse_stance(field(&record, stance_idx), row)?,
            text: text_idx.map(|idx| field(&record, idx).to_string()),
            topic: topic_idx.map(|idx| field(&record, idx).to_string()),
            author,
            declared_stance: match declared_idx {
                Some(idx) => parse_declared_stance(field(&record, idx), row)?,
                None => None,
            },
            is_test_question: match test_q_idx {
                Some(idx) => parse_flag(field(&record, idx), row, "is_test_question")?,
                None => false,
            },
            test_passed: match test_p_idx {
                Some(idx) => parse_opt_flag(field(&record, idx), row, "test_passed")?,
                None => None,
            },
        });
    }
    assemble(rows)
}

fn json_str(value: &serde_json::Value) -> Option<String> {
    match value {
        serde_json::Value::String(s) => Some(s.clone()),
        serde_json::Value::Number(n) => Some(n.to_string()),
        serde_json::Value::Bool(b) => Some(b.to_string()),
        _ => None,
    }
}

fn load_annotations_jsonl(path: &Path, schema: &AnnotationSchema) -> Result<AnnotationSet> {
    let raw = std::fs::read_to_string(path)?;
    let mut rows = Vec::new();
    for (i, line) in raw.lines().enumerate() {
        let row = i + 1;
        if line.trim().is_empty() {
            continue;
        }
        let value: serde_json::Value = serde_json::from_str(line)
            .map_err(|e| row_err(row, format!("invalid JSON: {e}")))?;
        let obj = value
            .as_object()
            .ok_or_else(|| row_err(row, "line is not a JSON object"))?;
        let get = |key: &str| obj.get(key).and_then(json_str);
        let require = |key: &str| {
            get(key).ok_or_else(|| row_err(row, format!("required field '{key}' missing")))
        };
        let opt_key = |key: &Option<String>| key.as_ref().and_then(|k| get(k));
        let author = opt_key(&schema.author).filter(|s| !s.is_empty());
        rows.push(RawRow {
            row,
            annotator_id: require(&schema.annotator_id)?,
            argument_id: require(&schema.argument_id)?,
            quality_label: parse_quality(&require(&schema.quality_label)?, row)?,
            stance_label: parse_stance(&require(&schema.stance_label)?, row)?,
            text: opt_key(&schema.text),
            topic: opt_key(&schema.topic),
            author,
            declared_stance: match opt_key(&schema.declared_stance) {
                Some(s) => parse_declared_stance(&s, row)?,
                None => None,
            },
            is_test_question: match opt_key(&schema.is_test_question) {
                Some(s) => parse_flag(&s, row, "is_test_question")?,
                None => false,
            },
            test_passed: match opt_key(&schema.test_passed) {
                Some(s) => parse_opt_flag(&s, row, "test_passed")?,
                None => None,
            },
        });
    }
    assemble(rows)
}

/// Writes the canonical annotation CSV: one row per record in canonical
/// order, argument metadata denormalized onto each row. Loading the result
/// with the default schema reproduces the set exactly.
pub fn save_annotations(set: &AnnotationSet, path: impl AsRef<Path>) -> Result<()> {
    let mut writer = csv::Writer::from_path(path.as_ref())?;
    writer.write_record([
        "annotator_id",
        "argument_id",
        "text",
        "topic",
        "author",
        "declared_stance",
        "quality_label",
        "stance_label",
        "is_test_question",
        "test_passed",
    ])?;
    for rec in set.records() {
        let arg = set
            .argument(&rec.argument_id)
            .expect("record references a known argument");
        writer.write_record([
            rec.annotator_id.as_str(),
            rec.argument_id.as_str(),
            arg.text.as_str(),
            arg.topic.as_str(),
            arg.author.as_deref().unwrap_or(""),
            arg.declared_stance.map_or("unknown", Stance::as_str),
            if rec.quality_label { "1" } else { "0" },
            rec.stance_label.as_str(),
            if rec.is_test_question { "true" } else { "false" },
            match rec.test_passed {
                Some(true) => "true",
                Some(false) => "false",
                None => "",
            },
        ])?;
    }
    writer.flush()?;
    Ok(())
}

fn parse_score(raw: &str, row: usize, field_name: &str) -> Result<f64> {
    let value: f64 = raw
        .trim()
        .parse()
        .map_err(|_| row_err(row, format!("{field_name} is not a number: '{raw}'")))?;
    if !(0.0..=1.0).contains(&value) {
        return Err(row_err(
            row,
            format!("{field_name} must lie in [0,1], got {value}"),
        ));
    }
    Ok(value)
}

fn parse_resolved_stance(raw: &str, row: usize) -> Result<ResolvedStance> {
    match raw.trim().to_ascii_lowercase().as_str() {
        "pro" | "1" | "1.0" => Ok(ResolvedStance::Pro),
        "con" | "-1" | "-1.0" => Ok(ResolvedStance::Con),
        "" | "0" | "0.0" | "undetermined" => Ok(ResolvedStance::Undetermined),
        other => Err(row_err(row, format!("unrecognized stance value '{other}'"))),
    }
}

/// Loads a released scored-dataset CSV. Scores outside `[0,1]` and unknown
/// split labels are row-level validation errors.
pub fn load_scored_corpus(
    path: impl AsRef<Path>,
    schema: &ScoredCorpusSchema,
) -> Result<ScoredCorpus> {
    let mut reader = csv::Reader::from_path(path.as_ref())?;
    let headers = HeaderMap::new(reader.headers()?);
    let text_idx = headers.required(&schema.text)?;
    let topic_idx = headers.required(&schema.topic)?;
    let wa_idx = headers.required(&schema.wa_score)?;
    let mace_idx = headers.required(&schema.mace_p_score)?;
    let id_idx = match &schema.id {
        Some(name) => Some(headers.required(name)?),
        None => None,
    };
    let split_idx = headers.optional(schema.split.as_ref());
    let stance_idx = headers.optional(schema.stance.as_ref());

    let mut entries = Vec::new();
    for (i, record) in reader.records().enumerate() {
        let row = i + 1;
        let record = record?;
        let id = match id_idx {
            Some(idx) => field(&record, idx).to_string(),
            None => format!("row_{:06}", i),
        };
        let split = match split_idx {
            Some(idx) => {
                let raw = field(&record, idx);
                if raw.trim().is_empty() {
                    None
                } else {
                    Some(Split::parse(raw).ok_or_else(|| {
                        row_err(row, format!("unknown split label '{raw}'"))
                    })?)
                }
            }
            None => None,
        };
        let stance = match stance_idx {
            Some(idx) => parse_resolved_stance(field(&record, idx), row)?,
            None => ResolvedStance::Undetermined,
        };
        entries.push(ScoredArgument {
            id: ArgumentId::new(id),
            text: field(&record, text_idx).to_string(),
            topic: field(&record, topic_idx).to_string(),
            split,
            wa_score: parse_score(field(&record, wa_idx), row, "wa_score")?,
            mace_p_score: parse_score(field(&record, mace_idx), row, "mace_p_score")?,
            stance,
        });
    }
    ScoredCorpus::new(entries)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn write(path: &Path, content: &str) {
        std::fs::write(path, content).unwrap();
    }

    #[test]
    fn four_row_csv_parses() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("ann.csv");
        write(
            &path,
            "annotator_id,argument_id,quality_label,stance_label\n\
             u1,a1,1,pro\n\
             u1,a2,0,con\n\
             u2,a1,1,pro\n\
             u2,a2,1,con\n",
        );
        let set = load_annotations(&path, &AnnotationSchema::default()).unwrap();
        assert_eq!(set.n_records(), 4);
        assert_eq!(set.n_arguments(), 2);
        let labels: Vec<bool> = set.records().iter().map(|r| r.quality_label).collect();
        assert_eq!(labels.iter().filter(|&&l| l).count(), 3);
    }

    #[test]
    fn malformed_label_names_the_row() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("ann.csv");
        write(
            &path,
            "annotator_id,argument_id,quality_label,stance_label\n\
             u1,a1,1,pro\n\
             u2,a1,2,pro\n",
        );
        match load_annotations(&path, &AnnotationSchema::default()) {
            Err(Error::Row { row: 2, message }) => assert!(message.contains("quality_label")),
            other => panic!("expected row error, got {other:?}"),
        }
    }

    #[test]
    fn duplicate_key_is_conflict() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("ann.csv");
        write(
            &path,
            "annotator_id,argument_id,quality_label,stance_label\n\
             u1,a1,1,pro\n\
             u1,a1,0,pro\n",
        );
        assert!(matches!(
            load_annotations(&path, &AnnotationSchema::default()),
            Err(Error::DuplicateAnnotation { .. })
        ));
    }

    #[test]
    fn missing_required_column_is_schema_error() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("ann.csv");
        write(&path, "annotator_id,argument_id,quality_label\nu1,a1,1\n");
        assert!(matches!(
            load_annotations(&path, &AnnotationSchema::default()),
            Err(Error::Schema(_))
        ));
    }

    #[test]
    fn custom_schema_maps_columns() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("ann.csv");
        write(
            &path,
            "worker,item,ok,side\n\
             u1,a1,1,pro\n",
        );
        let schema = AnnotationSchema {
            annotator_id: "worker".into(),
            argument_id: "item".into(),
            quality_label: "ok".into(),
            stance_label: "side".into(),
            ..Default::default()
        };
        let set = load_annotations(&path, &schema).unwrap();
        assert_eq!(set.n_records(), 1);
    }

    #[test]
    fn jsonl_parses_native_types() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("ann.jsonl");
        write(
            &path,
            r#"{"annotator_id": "u1", "argument_id": "a1", "quality_label": 1, "stance_label": "pro", "is_test_question": true, "test_passed": false}
{"annotator_id": "u2", "argument_id": "a1", "quality_label": "0", "stance_label": "con"}
"#,
        );
        let set = load_annotations(&path, &AnnotationSchema::default()).unwrap();
        assert_eq!(set.n_records(), 2);
        let test_rec = set
            .records()
            .iter()
            .find(|r| r.annotator_id.as_str() == "u1")
            .unwrap();
        assert!(test_rec.is_test_question);
        assert_eq!(test_rec.test_passed, Some(false));
    }

    #[test]
    fn round_trip_is_identity() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("ann.csv");
        write(
            &path,
            "annotator_id,argument_id,text,topic,author,declared_stance,quality_label,stance_label,is_test_question,test_passed\n\
             u1,a1,some argument text that is long enough here,banning things,alice,pro,1,pro,true,true\n\
             u2,a1,some argument text that is long enough here,banning things,alice,pro,0,con,false,\n\
             u1,a2,another argument text that is long enough too,banning things,,unknown,0,con,false,\n",
        );
        let set = load_annotations(&path, &AnnotationSchema::default()).unwrap();
        let out = dir.path().join("out.csv");
        save_annotations(&set, &out).unwrap();
        let reloaded = load_annotations(&out, &AnnotationSchema::default()).unwrap();
        assert_eq!(set, reloaded);
    }

    #[test]
    fn scored_corpus_table_rows_parse() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("corpus.csv");
        write(
            &path,
            "argument,topic,set,WA,MACE-P,stance_WA\n\
             the interest rates are too high and trap people in debt,Payday loans should be banned,train,1,0.97,1\n\
             \"i think the same as you, they should ban\",Payday loans should be banned,train,0.09,0.03,1\n",
        );
        let corpus = load_scored_corpus(&path, &ScoredCorpusSchema::default()).unwrap();
        assert_eq!(corpus.len(), 2);
        let first = corpus.get(&"row_000000".into()).unwrap();
        assert_eq!(first.wa_score, 1.0);
        assert_eq!(first.split, Some(Split::Train));
        assert_eq!(first.stance, ResolvedStance::Pro);
        let second = corpus.get(&"row_000001".into()).unwrap();
        assert_eq!(second.wa_score, 0.09);
    }

    #[test]
    fn scored_corpus_rejects_out_of_range_score() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("corpus.csv");
        write(
            &path,
            "argument,topic,set,WA,MACE-P,stance_WA\n\
             text,topic,train,1.3,0.5,1\n",
        );
        match load_scored_corpus(&path, &ScoredCorpusSchema::default()) {
            Err(Error::Row { row: 1, message }) => assert!(message.contains("[0,1]")),
            other => panic!("expected row error, got {other:?}"),
        }
    }
}
