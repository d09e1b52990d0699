//! File formats: CSV point dumps, JSON system configuration, and
//! continuation ensemble bundles.
//!
//! Everything here builds strings and returns them; callers decide where
//! the bytes land. Identical inputs always produce identical text.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::attractor::ChaosGameParams;
use crate::continuation::{self, Address};
use crate::error::{Error, Result};
use crate::ifs::{ifs_from_data, DataNode, InterpolationIFS};
use crate::registry::{self, ExampleSystem};

/// Renders a tagged point cloud as CSV: header `x,y,branch`, one row per
/// point in the given order, LF line endings, and 17 significant digits so
/// [`parse_csv`] recovers every coordinate bit for bit.
pub fn csv_from_tagged(points: &[(f64, f64, u32)]) -> String {
    let mut out = String::with_capacity(16 + points.len() * 52);
    out.push_str("x,y,branch\n");
    for &(x, y, tag) in points {
        let _ = writeln!(out, "{x:.16e},{y:.16e},{tag}");
    }
    out
}

/// Tags graph samples with the branch interval containing each abscissa,
/// the natural branch column for function dumps sorted by x.
pub fn tag_by_branch(ifs: &InterpolationIFS, points: &[(f64, f64)]) -> Vec<(f64, f64, u32)> {
    points
        .iter()
        .map(|&(x, y)| (x, y, ifs.branch_containing(x) as u32))
        .collect()
}

/// Tags every point with the same value, used when the branch column
/// records a per-file label rather than a per-point one.
pub fn tag_all(points: &[(f64, f64)], tag: u32) -> Vec<(f64, f64, u32)> {
    points.iter().map(|&(x, y)| (x, y, tag)).collect()
}

/// Parses CSV produced by [`csv_from_tagged`].
pub fn parse_csv(text: &str) -> Result<Vec<(f64, f64, u32)>> {
    let mut lines = text.lines();
    match lines.next() {
        Some("x,y,branch") => {}
        other => {
            return Err(Error::Csv(format!(
                "expected header \"x,y,branch\", got {other:?}"
            )))
        }
    }
    lines
        .enumerate()
        .map(|(i, line)| {
            let bad = |what: &str| Error::Csv(format!("row {}: {what}: {line:?}", i + 2));
            let mut fields = line.split(',');
            let x: f64 = fields
                .next()
                .and_then(|f| f.parse().ok())
                .ok_or_else(|| bad("bad x field"))?;
            let y: f64 = fields
                .next()
                .and_then(|f| f.parse().ok())
                .ok_or_else(|| bad("bad y field"))?;
            let tag: u32 = fields
                .next()
                .and_then(|f| f.parse().ok())
                .ok_or_else(|| bad("bad branch field"))?;
            if fields.next().is_some() {
                return Err(bad("extra fields"));
            }
            Ok((x, y, tag))
        })
        .collect()
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    kind: String,
    nodes: Option<Vec<[f64; 2]>>,
    vertical_scaling: Option<Vec<f64>>,
    name: Option<String>,
    params: Option<BTreeMap<String, f64>>,
}

/// Builds a system from its JSON description. Two kinds are understood:
/// `affine_interpolation`, with explicit `nodes` and `vertical_scaling`
/// arrays, and `builtin`, naming a registry example with optional `params`
/// overrides. Unknown keys are rejected so typos fail loudly instead of
/// silently changing the system.
pub fn system_from_json(text: &str) -> Result<ExampleSystem> {
    let raw: RawConfig = serde_json::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
    match raw.kind.as_str() {
        "affine_interpolation" => {
            if raw.name.is_some() || raw.params.is_some() {
                return Err(Error::Config(
                    "name and params apply to kind \"builtin\" only".into(),
                ));
            }
            let nodes: Vec<DataNode> = raw
                .nodes
                .ok_or_else(|| Error::Config("missing nodes".into()))?
                .iter()
                .map(|&[x, y]| DataNode::new(x, y))
                .collect();
            let scalings = raw
                .vertical_scaling
                .ok_or_else(|| Error::Config("missing vertical_scaling".into()))?;
            Ok(ExampleSystem::Interpolation(ifs_from_data(
                &nodes, &scalings,
            )?))
        }
        "builtin" => {
            if raw.nodes.is_some() || raw.vertical_scaling.is_some() {
                return Err(Error::Config(
                    "nodes and vertical_scaling apply to kind \"affine_interpolation\" only".into(),
                ));
            }
            let name = raw
                .name
                .ok_or_else(|| Error::Config("missing name".into()))?;
            // Route through the selector grammar so both entry points
            // accept exactly the same parameters.
            let mut selector = name;
            if let Some(params) = raw.params {
                if !params.is_empty() {
                    let parts: Vec<String> =
                        params.iter().map(|(k, v)| format!("{k}={v}")).collect();
                    selector = format!("{selector}:{}", parts.join(","));
                }
            }
            Ok(registry::get_example(&selector)?.system)
        }
        other => Err(Error::Config(format!(
            "unknown kind {other:?}, expected \"affine_interpolation\" or \"builtin\""
        ))),
    }
}

/// One continuation prefix in an exported ensemble.
#[derive(Debug, Serialize)]
pub struct EnsembleEntry {
    pub prefix: String,
    pub file: String,
    pub domain: [f64; 2],
}

/// In-memory ensemble export: one CSV per prefix plus a JSON manifest
/// listing each prefix's file and domain interval.
#[derive(Debug)]
pub struct EnsembleBundle {
    /// `(file name, CSV text)` pairs in lexicographic prefix order.
    pub files: Vec<(String, String)>,
    pub manifest: String,
}

fn word_label(word: &[usize], n_branches: usize) -> String {
    if word.is_empty() {
        return "empty".into();
    }
    let sep = if n_branches > 9 { "-" } else { "" };
    word.iter()
        .map(|s| s.to_string())
        .collect::<Vec<_>>()
        .join(sep)
}

/// Builds the continuation ensemble of order `k`: every branch word of
/// length `k` becomes one CSV whose rows are that continuation's cloud,
/// tagged with the prefix's position in lexicographic order. A window
/// `[x_lo, x_hi, y_lo, y_hi]` drops rows outside it, keeping files small
/// when deep continuations fly far from the plotting region; the manifest
/// still records the full domain interval. Prefixes are computed in
/// parallel and assembled in lexicographic order, so the output does not
/// depend on the worker count.
pub fn ensemble_bundle(
    ifs: &InterpolationIFS,
    k: usize,
    params: &ChaosGameParams,
    window: Option<[f64; 4]>,
) -> Result<EnsembleBundle> {
    let words = continuation::ensemble_words(ifs.n_branches(), k)?;
    let per_word: Result<Vec<((String, String), EnsembleEntry)>> = words
        .par_iter()
        .enumerate()
        .map(|(i, word)| {
            let theta = Address::finite(word.clone());
            let mut cloud = continuation::continuation_cloud(ifs, &theta, k, params)?;
            if let Some([x_lo, x_hi, y_lo, y_hi]) = window {
                cloud.retain(|&(x, y)| x >= x_lo && x <= x_hi && y >= y_lo && y <= y_hi);
            }
            let domain = continuation::domain_interval(ifs, &theta, k)?;
            let label = word_label(word, ifs.n_branches());
            let file = format!("prefix-{label}.csv");
            Ok((
                (file.clone(), csv_from_tagged(&tag_all(&cloud, i as u32))),
                EnsembleEntry {
                    prefix: label,
                    file,
                    domain: [domain.lo, domain.hi],
                },
            ))
        })
        .collect();
    let (files, entries): (Vec<_>, Vec<_>) = per_word?.into_iter().unzip();
    let mut manifest =
        serde_json::to_string_pretty(&entries).map_err(|e| Error::Config(e.to_string()))?;
    manifest.push('\n');
    Ok(EnsembleBundle { files, manifest })
}
