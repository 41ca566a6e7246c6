use std::collections::HashSet;
use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::types::Label;
use crate::error::{DeedError, Result};

/// One knowledge triplet with its original and (for edits) new object.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FactRecord {
    pub fact_id: u32,
    pub subject: String,
    pub relation: String,
    pub original_object: String,
    /// Empty for unedited facts.
    pub new_object: String,
    pub edit_prompt: String,
    /// Detection features are always computed from this prompt.
    pub paraphrase_prompt: String,
    pub label: Label,
}

impl FactRecord {
    /// The object the model retrieves for this fact: the new object for
    /// edited facts, the original one otherwise.
    pub fn retrieved_object(&self) -> &str {
        match self.label {
            Label::Edited => &self.new_object,
            Label::Unedited => &self.original_object,
        }
    }
}

pub fn validate_manifest(facts: &[FactRecord]) -> Result<()> {
    let mut seen = HashSet::with_capacity(facts.len());
    for (i, fact) in facts.iter().enumerate() {
        if !seen.insert(fact.fact_id) {
            return Err(DeedError::Validation(format!(
                "manifest line {}: duplicate fact_id {}",
                i + 1,
                fact.fact_id
            )));
        }
        if fact.label == Label::Edited && fact.new_object.is_empty() {
            return Err(DeedError::Validation(format!(
                "manifest line {}: edited fact {} has no new_object",
                i + 1,
                fact.fact_id
            )));
        }
        if fact.paraphrase_prompt.is_empty() {
            return Err(DeedError::Validation(format!(
                "manifest line {}: fact {} has an empty paraphrase_prompt",
                i + 1,
                fact.fact_id
            )));
        }
    }
    Ok(())
}

pub fn read_manifest(path: impl AsRef<Path>) -> Result<Vec<FactRecord>> {
    let reader = BufReader::new(File::open(path)?);
    let mut facts = Vec::new();
    for (i, line) in reader.lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let fact: FactRecord = serde_json::from_str(&line)
            .map_err(|e| DeedError::Format(format!("manifest line {}: {e}", i + 1)))?;
        facts.push(fact);
    }
    validate_manifest(&facts)?;
    Ok(facts)
}

pub fn write_manifest(facts: &[FactRecord], path: impl AsRef<Path>) -> Result<()> {
    validate_manifest(facts)?;
    let mut out = BufWriter::new(File::create(path)?);
    for fact in facts {
        let line = serde_json::to_string(fact)
            .map_err(|e| DeedError::Format(e.to_string()))?;
        writeln!(out, "{line}")?;
    }
    out.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn fact(id: u32, label: Label, new_object: &str) -> FactRecord {
        FactRecord {
            fact_id: id,
            subject: "Eiffel Tower".into(),
            relation: "located in".into(),
            original_object: "Paris".into(),
            new_object: new_object.into(),
            edit_prompt: "The Eiffel Tower is in the city of".into(),
            paraphrase_prompt: "The city where the Eiffel Tower is located is".into(),
            label,
        }
    }

    #[test]
    fn round_trip_and_keys() {
        let facts = vec![fact(1, Label::Edited, "Berlin"), fact(2, Label::Unedited, "")];
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("facts.jsonl");
        write_manifest(&facts, &path).unwrap();
        let text = std::fs::read_to_string(&path).unwrap();
        assert_eq!(text.lines().count(), 2);
        assert!(text.contains("\"label\":\"edited\""));
        assert_eq!(read_manifest(&path).unwrap(), facts);
        assert_eq!(facts[0].retrieved_object(), "Berlin");
        assert_eq!(facts[1].retrieved_object(), "Paris");
    }

    #[test]
    fn invariants() {
        assert!(validate_manifest(&[fact(1, Label::Edited, "")]).is_err());
        assert!(validate_manifest(&[fact(1, Label::Unedited, ""), fact(1, Label::Unedited, "")]).is_err());
        let mut f = fact(1, Label::Unedited, "");
        f.paraphrase_prompt.clear();
        assert!(validate_manifest(&[f]).is_err());
    }
}
