use std::fs;
use std::path::Path;
use std::str::FromStr;

use num_bigint::BigUint;
use serde::{Deserialize, Serialize};

use crate::closed_forms::ClosedFormParams;
use crate::construction::{Block, Group, GroupSet};
use crate::error::{GddError, Result};
use crate::gf2m::{build_field, FieldContext, FieldElement, Notation};
use crate::verifier::{BlockSource, DesignTriple, VerificationReport};

const LISTING_NOTE: &str = "element listings depend on the modulus and primitive element; \
     counts and parameters do not";

/// What a run produced, independent of how elements are written.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct ExportContent {
    pub k: Option<usize>,
    pub groups: Vec<Group>,
    /// Canonically sorted; empty when only counts were requested.
    pub blocks: Vec<Block>,
    pub block_count: u64,
    pub listed: bool,
    pub params: Option<ClosedFormParams>,
    pub report: Option<VerificationReport>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ExportHeader {
    pub m: u32,
    pub k: Option<usize>,
    pub modulus: String,
    pub alpha: String,
    pub notation: Notation,
    pub block_count: u64,
    /// False when the block list was left out (count-only runs).
    pub listed: bool,
    pub note: String,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ExportParams {
    pub lambda: String,
    pub r: String,
    pub b: String,
    pub conjectured: bool,
}

/// The file form of a run: header, groups, blocks, params, report.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ExportSchema {
    pub header: ExportHeader,
    pub groups: Vec<[String; 2]>,
    pub blocks: Vec<Vec<String>>,
    pub params: Option<ExportParams>,
    pub report: Option<VerificationReport>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ExportFormat {
    Json,
    Csv,
}

impl ExportSchema {
    pub fn new(ctx: &FieldContext, content: &ExportContent, notation: Notation) -> Result<Self> {
        let fmt = |a: FieldElement| ctx.format_element(a, notation);
        let mut groups = content.groups.clone();
        groups.sort_unstable();
        let mut blocks = content.blocks.clone();
        blocks.sort_unstable();
        Ok(ExportSchema {
            header: ExportHeader {
                m: ctx.m(),
                k: content.k,
                modulus: format!("{:#x}", ctx.modulus()),
                alpha: ctx.alpha().to_string(),
                notation,
                block_count: content.block_count,
                listed: content.listed,
                note: LISTING_NOTE.to_string(),
            },
            groups: groups
                .iter()
                .map(|g| Ok([fmt(g.low)?, fmt(g.high)?]))
                .collect::<Result<_>>()?,
            blocks: blocks
                .iter()
                .map(|b| b.iter().map(fmt).collect())
                .collect::<Result<_>>()?,
            params: content.params.as_ref().map(|p| ExportParams {
                lambda: p.lambda.to_string(),
                r: p.r.to_string(),
                b: p.b.to_string(),
                conjectured: p.conjectured,
            }),
            report: content.report.clone(),
        })
    }

    /// Rebuilds the field from the header and parses every element back.
    pub fn to_content(&self) -> Result<(FieldContext, ExportContent)> {
        let h = &self.header;
        let modulus = parse_hex_u32(&h.modulus)?;
        let ctx = build_field(h.m, Some(modulus))?;
        if ctx.alpha().to_string() != h.alpha {
            return Err(GddError::UniverseMismatch(format!(
                "header names primitive element {} but the modulus gives {}",
                h.alpha,
                ctx.alpha()
            )));
        }
        let parse = |s: &String| ctx.parse_element(s);
        let groups = self
            .groups
            .iter()
            .map(|[a, b]| {
                let (a, b) = (parse(a)?, parse(b)?);
                Ok(Group {
                    low: a.min(b),
                    high: a.max(b),
                })
            })
            .collect::<Result<Vec<_>>>()?;
        let blocks = self
            .blocks
            .iter()
            .map(|b| {
                Ok(Block::from_elements(
                    b.iter().map(parse).collect::<Result<_>>()?,
                ))
            })
            .collect::<Result<Vec<_>>>()?;
        let params = match &self.params {
            Some(p) => Some(ClosedFormParams {
                m: h.m,
                k: h.k
                    .ok_or_else(|| GddError::Usage("params without k".into()))?,
                lambda: parse_decimal(&p.lambda)?,
                r: parse_decimal(&p.r)?,
                b: parse_decimal(&p.b)?,
                conjectured: p.conjectured,
            }),
            None => None,
        };
        let content = ExportContent {
            k: h.k,
            groups,
            blocks,
            block_count: h.block_count,
            listed: h.listed,
            params,
            report: self.report.clone(),
        };
        Ok((ctx, content))
    }

    /// Pretty JSON with a trailing newline; field order is fixed by the
    /// struct layout, so equal schemas give equal bytes.
    pub fn to_json(&self) -> Result<String> {
        let mut s = serde_json::to_string_pretty(self)?;
        s.push('\n');
        Ok(s)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }

    /// One row per block, or one per group when the run has no block size.
    pub fn to_csv(&self) -> Result<Vec<u8>> {
        let mut w = csv::WriterBuilder::new()
            .has_headers(false)
            .flexible(true)
            .from_writer(Vec::new());
        if self.header.k.is_none() {
            for g in &self.groups {
                w.write_record(g)?;
            }
        } else {
            for b in &self.blocks {
                w.write_record(b)?;
            }
        }
        w.into_inner()
            .map_err(|e| GddError::Io(std::io::Error::other(e.to_string())))
    }
}

fn parse_hex_u32(s: &str) -> Result<u32> {
    let digits = s.trim().trim_start_matches("0x");
    u32::from_str_radix(digits, 16).map_err(|_| GddError::ParseElement(s.to_string()))
}

fn parse_decimal(s: &str) -> Result<BigUint> {
    BigUint::from_str(s).map_err(|_| GddError::Usage(format!("not a decimal integer: {s:?}")))
}

pub fn export_design(schema: &ExportSchema, format: ExportFormat, path: &Path) -> Result<()> {
    let bytes = match format {
        ExportFormat::Json => schema.to_json()?.into_bytes(),
        ExportFormat::Csv => schema.to_csv()?,
    };
    fs::write(path, bytes)?;
    Ok(())
}

/// Reads a JSON export back into the design it describes.
pub fn import_design(text: &str) -> Result<(FieldContext, DesignTriple<'static>)> {
    let schema = ExportSchema::from_json(text)?;
    let (ctx, content) = schema.to_content()?;
    let k = content
        .k
        .ok_or_else(|| GddError::Usage("export has no block size".into()))?;
    if !content.listed {
        return Err(GddError::Usage(
            "export was written count-only; it has no blocks to import".into(),
        ));
    }
    let triple = DesignTriple {
        universe: ctx.point_set().collect(),
        groups: GroupSet::from_groups(content.groups),
        k,
        blocks: BlockSource::Materialized(content.blocks),
    };
    Ok((ctx, triple))
}
