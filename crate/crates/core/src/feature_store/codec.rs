use std::fs;
use std::path::Path;

use super::types::{FeatureRecord, FeatureSet, FeatureSetHeader, Label};
use crate::error::{DeedError, Result};

pub const MAGIC: &[u8; 5] = b"DEED1";

fn record_stride(hs_dim: usize, pd_k: usize) -> Option<usize> {
    hs_dim.checked_add(pd_k)?.checked_mul(4)?.checked_add(5)
}

/// Serializes a validated set. The output is a pure function of the set.
pub fn encode_feature_set(set: &FeatureSet) -> Result<Vec<u8>> {
    set.validate()?;
    let header = serde_json::to_vec(&set.header)
        .map_err(|e| DeedError::Format(format!("header encoding failed: {e}")))?;
    let header_len = u32::try_from(header.len())
        .map_err(|_| DeedError::Validation("header too large".into()))?;
    let stride = record_stride(set.header.hs_dim, set.header.pd_k)
        .ok_or_else(|| DeedError::Validation("record stride overflows".into()))?;

    let mut out = Vec::with_capacity(MAGIC.len() + 4 + header.len() + stride * set.records.len());
    out.extend_from_slice(MAGIC);
    out.extend_from_slice(&header_len.to_le_bytes());
    out.extend_from_slice(&header);
    for rec in &set.records {
        out.extend_from_slice(&rec.fact_id.to_le_bytes());
        out.push(rec.label.to_byte());
        for v in rec.hs.iter().chain(rec.pd.iter()) {
            out.extend_from_slice(&v.to_le_bytes());
        }
    }
    Ok(out)
}

fn f32_at(bytes: &[u8], offset: usize) -> f32 {
    f32::from_le_bytes(bytes[offset..offset + 4].try_into().unwrap())
}

/// Parses and validates a `.deed` byte image.
pub fn decode_feature_set(bytes: &[u8]) -> Result<FeatureSet> {
    if bytes.len() < MAGIC.len() || &bytes[..MAGIC.len()] != MAGIC {
        return Err(DeedError::Format("bad magic, not a DEED1 feature file".into()));
    }
    let rest = &bytes[MAGIC.len()..];
    if rest.len() < 4 {
        return Err(DeedError::Corruption("truncated header length".into()));
    }
    let header_len = u32::from_le_bytes(rest[..4].try_into().unwrap()) as usize;
    let rest = &rest[4..];
    if rest.len() < header_len {
        return Err(DeedError::Corruption(format!(
            "header declares {header_len} bytes but only {} remain",
            rest.len()
        )));
    }
    let header: FeatureSetHeader = serde_json::from_slice(&rest[..header_len])
        .map_err(|e| DeedError::Format(format!("malformed header: {e}")))?;
    header.check()?;

    let payload = &rest[header_len..];
    let stride = record_stride(header.hs_dim, header.pd_k)
        .ok_or_else(|| DeedError::Corruption("record stride overflows".into()))?;
    let expected = stride
        .checked_mul(header.record_count)
        .ok_or_else(|| DeedError::Corruption("declared record_count overflows".into()))?;
    if payload.len() != expected {
        return Err(DeedError::Corruption(format!(
            "declared record_count {} needs {expected} payload bytes, found {}",
            header.record_count,
            payload.len()
        )));
    }

    let mut records = Vec::with_capacity(header.record_count);
    for (i, chunk) in payload.chunks_exact(stride).enumerate() {
        let fact_id = u32::from_le_bytes(chunk[..4].try_into().unwrap());
        let label = Label::from_byte(chunk[4]).ok_or_else(|| {
            DeedError::Validation(format!("record {i} (fact_id {fact_id}): invalid label byte {}", chunk[4]))
        })?;
        let hs = (0..header.hs_dim).map(|j| f32_at(chunk, 5 + 4 * j)).collect();
        let pd_start = 5 + 4 * header.hs_dim;
        let pd = (0..header.pd_k).map(|j| f32_at(chunk, pd_start + 4 * j)).collect();
        records.push(FeatureRecord { fact_id, label, hs, pd });
    }

    let set = FeatureSet { header, records };
    set.validate()?;
    Ok(set)
}

pub fn write_feature_file(set: &FeatureSet, path: impl AsRef<Path>) -> Result<()> {
    let bytes = encode_feature_set(set)?;
    fs::write(path, bytes)?;
    Ok(())
}

pub fn read_feature_file(path: impl AsRef<Path>) -> Result<FeatureSet> {
    let bytes = fs::read(path)?;
    decode_feature_set(&bytes)
}
