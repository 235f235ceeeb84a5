//! File formats: spaces, product specs and pseudometrics as JSON, reports
//! as NDJSON.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use serde::{Deserialize, Serialize};

use opengame_core::metric::{parse_rational, PseudometricSpace, Rational};
use opengame_core::{FiniteSpace, PointSet};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SpaceFile {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub name: Option<String>,
    pub points: Vec<String>,
    pub opens: Vec<Vec<String>>,
}

impl SpaceFile {
    pub fn into_space(self, fallback_name: &str) -> Result<FiniteSpace> {
        let name = self.name.unwrap_or_else(|| fallback_name.to_string());
        Ok(FiniteSpace::validate_topology(&name, &self.points, &self.opens)?)
    }

    /// Opens listed by size, then by their labels in point order.
    pub fn of(space: &FiniteSpace) -> Result<SpaceFile> {
        let Some(opens) = space.opens() else {
            bail!("space {} has too many opens to write out", space.name());
        };
        let mut opens: Vec<Vec<String>> = opens.iter().map(|&o| space.set_labels(o)).collect();
        opens.sort_by(|a, b| a.len().cmp(&b.len()).then_with(|| a.cmp(b)));
        Ok(SpaceFile { name: Some(space.name().to_string()), points: space.labels().to_vec(), opens })
    }
}

fn stem(path: &Path) -> String {
    path.file_stem().map_or_else(|| "space".to_string(), |s| s.to_string_lossy().into_owned())
}

fn read(path: &Path) -> Result<String> {
    fs::read_to_string(path).with_context(|| format!("cannot read {}", path.display()))
}

pub fn read_space(path: &Path) -> Result<FiniteSpace> {
    let file: SpaceFile =
        serde_json::from_str(&read(path)?).with_context(|| format!("{} is not a space file", path.display()))?;
    file.into_space(&stem(path)).with_context(|| format!("{} is not a valid topology", path.display()))
}

#[derive(Debug, Deserialize)]
#[serde(untagged)]
enum FactorRef {
    Path(PathBuf),
    Inline(SpaceFile),
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct ProductSpecFile {
    factors: Vec<FactorRef>,
}

/// Reads `{"factors": [...]}` where each factor is a space object or a path
/// relative to the spec file.
pub fn read_factors(path: &Path) -> Result<Vec<FiniteSpace>> {
    let spec: ProductSpecFile =
        serde_json::from_str(&read(path)?).with_context(|| format!("{} is not a product spec", path.display()))?;
    let base = path.parent().unwrap_or_else(|| Path::new("."));
    spec.factors
        .into_iter()
        .enumerate()
        .map(|(i, f)| match f {
            FactorRef::Path(p) => read_space(&base.join(p)),
            FactorRef::Inline(s) => s.into_space(&format!("factor{i}")),
        })
        .collect()
}

#[derive(Debug, Deserialize)]
#[serde(untagged)]
enum RationalText {
    Text(String),
    Int(i64),
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct MetricFile {
    points: Vec<String>,
    dist: Vec<Vec<RationalText>>,
}

pub fn read_metric(path: &Path) -> Result<PseudometricSpace> {
    let file: MetricFile = serde_json::from_str(&read(path)?)
        .with_context(|| format!("{} is not a metric file (write fractional distances as strings)", path.display()))?;
    let dist = file
        .dist
        .iter()
        .map(|row| {
            row.iter()
                .map(|v| match v {
                    RationalText::Text(t) => Ok(parse_rational(t)?),
                    RationalText::Int(i) => Ok(Rational::from_integer(i128::from(*i))),
                })
                .collect::<Result<Vec<_>>>()
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(PseudometricSpace::new(file.points, dist)?)
}

pub fn point_labels(space: &FiniteSpace, set: PointSet) -> Vec<String> {
    space.set_labels(set)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Format {
    Ndjson,
    Pretty,
}

/// Record sink for the data stream.
pub struct Emitter<'w> {
    format: Format,
    out: &'w mut dyn Write,
}

impl<'w> Emitter<'w> {
    pub fn new(format: Format, out: &'w mut dyn Write) -> Self {
        Emitter { format, out }
    }

    pub fn emit<T: Serialize>(&mut self, record: &T) -> Result<()> {
        match self.format {
            Format::Ndjson => serde_json::to_writer(&mut *self.out, record)?,
            Format::Pretty => serde_json::to_writer_pretty(&mut *self.out, record)?,
        }
        self.out.write_all(b"\n")?;
        Ok(())
    }

    pub fn format(&self) -> Format {
        self.format
    }
}

/// Opens `path` for writing, or returns `None` for the data stream.
pub fn create(path: Option<&Path>) -> Result<Option<fs::File>> {
    path.map(|p| fs::File::create(p).with_context(|| format!("cannot create {}", p.display()))).transpose()
}
