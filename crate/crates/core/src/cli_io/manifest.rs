use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::export::ExportSchema;
use crate::error::Result;
use crate::gf2m::Notation;

/// Everything needed to re-run a command and check that it reproduced.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub command: Vec<String>,
    pub m: u32,
    pub k: Option<usize>,
    pub modulus: String,
    pub alpha: String,
    pub seed: Option<u64>,
    pub tool_version: String,
    pub duration_secs: f64,
    /// SHA-256 of the hex-notation JSON export.
    pub digest: String,
}

/// Digest of a schema's canonical form. Schemas written in another notation
/// are re-rendered in hex first, so the digest only depends on content.
pub fn canonical_digest(schema: &ExportSchema) -> Result<String> {
    let canonical = if schema.header.notation == Notation::Hex {
        schema.to_json()?
    } else {
        let (ctx, content) = schema.to_content()?;
        ExportSchema::new(&ctx, &content, Notation::Hex)?.to_json()?
    };
    let digest = Sha256::digest(canonical.as_bytes());
    Ok(hex::encode(digest))
}

pub fn write_manifest(manifest: &RunManifest, path: &Path) -> Result<()> {
    let mut s = serde_json::to_string_pretty(manifest)?;
    s.push('\n');
    fs::write(path, s)?;
    Ok(())
}

pub fn read_manifest(path: &Path) -> Result<RunManifest> {
    Ok(serde_json::from_str(&fs::read_to_string(path)?)?)
}
