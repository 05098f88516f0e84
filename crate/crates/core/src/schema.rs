//! Feature schemas, instances and CSV ingestion.
//!
//! A [`FeatureSchema`] is the contract between raw tabular data and every
//! later stage: it fixes the feature order, each feature's kind, which
//! directions an action may move it in, and how numeric features are binned.

use std::collections::{HashMap, HashSet};
use std::io::{Read, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{read_file, Error, Result};

/// Bin count used for numeric features that do not configure one.
pub const DEFAULT_BINS: usize = 10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FeatureKind {
    Numeric,
    Categorical,
    Binary,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Actionability {
    #[default]
    Free,
    Immutable,
    IncreaseOnly,
    DecreaseOnly,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FeatureSpec {
    pub name: String,
    pub kind: FeatureKind,
    #[serde(default)]
    pub actionability: Actionability,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub bins: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub max_bin_shift: Option<usize>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub categories: Vec<String>,
}

impl FeatureSpec {
    pub fn numeric(name: &str, bins: usize) -> Self {
        FeatureSpec {
            name: name.to_string(),
            kind: FeatureKind::Numeric,
            actionability: Actionability::Free,
            bins: Some(bins),
            max_bin_shift: None,
            categories: Vec::new(),
        }
    }

    pub fn categorical(name: &str, categories: &[&str]) -> Self {
        FeatureSpec {
            name: name.to_string(),
            kind: FeatureKind::Categorical,
            actionability: Actionability::Free,
            bins: None,
            max_bin_shift: None,
            categories: categories.iter().map(|c| c.to_string()).collect(),
        }
    }

    pub fn binary(name: &str) -> Self {
        FeatureSpec {
            name: name.to_string(),
            kind: FeatureKind::Binary,
            actionability: Actionability::Free,
            bins: None,
            max_bin_shift: None,
            categories: Vec::new(),
        }
    }

    pub fn with_actionability(mut self, actionability: Actionability) -> Self {
        self.actionability = actionability;
        self
    }

    pub fn with_max_bin_shift(mut self, shift: usize) -> Self {
        self.max_bin_shift = Some(shift);
        self
    }

    /// Number of equal-width bins; only meaningful for numeric features.
    pub fn bin_count(&self) -> usize {
        self.bins.unwrap_or(DEFAULT_BINS)
    }

    /// Largest admissible bin shift, defaulting to `bins - 1`.
    pub fn max_shift(&self) -> usize {
        self.max_bin_shift
            .unwrap_or_else(|| self.bin_count().saturating_sub(1))
    }

    pub fn category_index(&self, value: &str) -> Option<u32> {
        self.categories
            .iter()
            .position(|c| c == value)
            .map(|i| i as u32)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FeatureSchema {
    pub features: Vec<FeatureSpec>,
    /// Optional ground-truth label column in the dataset CSV.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub label: Option<String>,
}

impl FeatureSchema {
    pub fn new(features: Vec<FeatureSpec>) -> Result<Self> {
        let schema = FeatureSchema {
            features,
            label: None,
        };
        schema.validate()?;
        Ok(schema)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let schema: FeatureSchema =
            serde_json::from_str(text).map_err(|e| Error::Schema(e.to_string()))?;
        schema.validate()?;
        Ok(schema)
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::from_json(&read_file(path)?)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("schema serializes")
    }

    pub fn len(&self) -> usize {
        self.features.len()
    }

    pub fn is_empty(&self) -> bool {
        self.features.is_empty()
    }

    pub fn index_of(&self, name: &str) -> Option<usize> {
        self.features.iter().position(|f| f.name == name)
    }

    /// Overrides the bin count of every numeric feature. Shift limits that
    /// no longer fit the new bin count fall back to the default.
    pub fn override_bins(&mut self, bins: usize) -> Result<()> {
        for f in &mut self.features {
            if f.kind == FeatureKind::Numeric {
                f.bins = Some(bins);
                if f.max_bin_shift.is_some_and(|s| s + 1 > bins) {
                    f.max_bin_shift = None;
                }
            }
        }
        self.validate()
    }

    /// Hex SHA-256 of the canonical JSON encoding.
    pub fn hash(&self) -> String {
        let bytes = serde_json::to_vec(self).expect("schema serializes");
        hex::encode(Sha256::digest(&bytes))
    }

    pub fn validate(&self) -> Result<()> {
        if self.features.is_empty() {
            return Err(Error::Schema("schema has no features".into()));
        }
        let mut names = HashSet::new();
        for f in &self.features {
            if f.name.is_empty() {
                return Err(Error::Schema("feature with an empty name".into()));
            }
            if !names.insert(f.name.as_str()) {
                return Err(Error::Schema(format!("duplicate feature name '{}'", f.name)));
            }
            if self.label.as_deref() == Some(f.name.as_str()) {
                return Err(Error::Schema(format!(
                    "label column '{}' is also a feature",
                    f.name
                )));
            }
            match f.kind {
                FeatureKind::Numeric => {
                    let bins = f.bin_count();
                    if bins < 2 {
                        return Err(Error::Schema(format!(
                            "feature '{}': bins must be at least 2, got {bins}",
                            f.name
                        )));
                    }
                    if let Some(shift) = f.max_bin_shift {
                        if shift == 0 || shift > bins - 1 {
                            return Err(Error::Schema(format!(
                                "feature '{}': max_bin_shift must lie in 1..={}, got {shift}",
                                f.name,
                                bins - 1
                            )));
                        }
                    }
                    if !f.categories.is_empty() {
                        return Err(Error::Schema(format!(
                            "numeric feature '{}' lists categories",
                            f.name
                        )));
                    }
                }
                FeatureKind::Categorical | FeatureKind::Binary => {
                    if matches!(
                        f.actionability,
                        Actionability::IncreaseOnly | Actionability::DecreaseOnly
                    ) {
                        return Err(Error::Schema(format!(
                            "feature '{}': directional actionability needs a numeric feature",
                            f.name
                        )));
                    }
                    if f.bins.is_some() || f.max_bin_shift.is_some() {
                        return Err(Error::Schema(format!(
                            "feature '{}': bins apply to numeric features only",
                            f.name
                        )));
                    }
                    if f.kind == FeatureKind::Categorical {
                        if f.categories.is_empty() {
                            return Err(Error::Schema(format!(
                                "categorical feature '{}' has no categories",
                                f.name
                            )));
                        }
                        let unique: HashSet<_> = f.categories.iter().collect();
                        if unique.len() != f.categories.len() {
                            return Err(Error::Schema(format!(
                                "categorical feature '{}' repeats a category",
                                f.name
                            )));
                        }
                    } else if !f.categories.is_empty() {
                        return Err(Error::Schema(format!(
                            "binary feature '{}' lists categories",
                            f.name
                        )));
                    }
                }
            }
        }
        Ok(())
    }
}

/// One feature value. Categories are stored by index into the schema's list.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Value {
    Numeric(f64),
    Category(u32),
    Binary(bool),
}

impl Value {
    pub fn as_f64(&self) -> f64 {
        match *self {
            Value::Numeric(v) => v,
            Value::Category(c) => c as f64,
            Value::Binary(b) => b as u8 as f64,
        }
    }

    pub fn render(&self, spec: &FeatureSpec) -> String {
        match *self {
            Value::Numeric(v) => format!("{v}"),
            Value::Category(c) => spec.categories[c as usize].clone(),
            Value::Binary(b) => if b { "1" } else { "0" }.to_string(),
        }
    }

    pub fn parse(spec: &FeatureSpec, cell: &str) -> std::result::Result<Value, String> {
        let cell = cell.trim();
        match spec.kind {
            FeatureKind::Numeric => {
                let v: f64 = cell
                    .parse()
                    .map_err(|_| format!("cannot parse '{cell}' as a number"))?;
                if !v.is_finite() {
                    return Err(format!("non-finite number '{cell}'"));
                }
                Ok(Value::Numeric(v))
            }
            FeatureKind::Categorical => spec
                .category_index(cell)
                .map(Value::Category)
                .ok_or_else(|| format!("unknown category '{cell}'")),
            FeatureKind::Binary => match cell {
                "0" => Ok(Value::Binary(false)),
                "1" => Ok(Value::Binary(true)),
                _ => Err(format!("binary value must be 0 or 1, got '{cell}'")),
            },
        }
    }
}

/// A feature vector in schema order.
pub type Instance = Vec<Value>;

/// Checks that an instance matches the schema's kinds and category ranges.
pub fn conforms(schema: &FeatureSchema, x: &Instance) -> bool {
    x.len() == schema.len()
        && schema.features.iter().zip(x).all(|(f, v)| match (f.kind, v) {
            (FeatureKind::Numeric, Value::Numeric(v)) => v.is_finite(),
            (FeatureKind::Categorical, Value::Category(c)) => (*c as usize) < f.categories.len(),
            (FeatureKind::Binary, Value::Binary(_)) => true,
            _ => false,
        })
}

#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    pub schema: FeatureSchema,
    pub instances: Vec<Instance>,
    /// Ground-truth labels in {0, 1}, when the schema names a label column.
    pub labels: Option<Vec<u8>>,
}

impl Dataset {
    pub fn new(
        schema: FeatureSchema,
        instances: Vec<Instance>,
        labels: Option<Vec<u8>>,
    ) -> Result<Self> {
        for (i, x) in instances.iter().enumerate() {
            if !conforms(&schema, x) {
                return Err(Error::Data(format!("instance {i} does not conform to the schema")));
            }
        }
        if let Some(labels) = &labels {
            if labels.len() != instances.len() {
                return Err(Error::Data(format!(
                    "{} labels for {} instances",
                    labels.len(),
                    instances.len()
                )));
            }
            if labels.iter().any(|&l| l > 1) {
                return Err(Error::Data("labels must be 0 or 1".into()));
            }
        }
        Ok(Dataset {
            schema,
            instances,
            labels,
        })
    }

    pub fn len(&self) -> usize {
        self.instances.len()
    }

    pub fn is_empty(&self) -> bool {
        self.instances.is_empty()
    }

    /// Sub-dataset with the given rows, in the given order.
    pub fn select(&self, rows: &[usize]) -> Dataset {
        Dataset {
            schema: self.schema.clone(),
            instances: rows.iter().map(|&i| self.instances[i].clone()).collect(),
            labels: self
                .labels
                .as_ref()
                .map(|l| rows.iter().map(|&i| l[i]).collect()),
        }
    }

    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        write_instances_csv(&self.schema, &self.instances, self.labels.as_deref(), out)
    }

    pub fn save_csv(&self, path: &Path) -> Result<()> {
        let file = std::fs::File::create(path).map_err(|source| Error::File {
            path: path.to_path_buf(),
            source,
        })?;
        self.write_csv(std::io::BufWriter::new(file))
    }
}

/// Writes instances as CSV with a header row in schema order. Numbers use the
/// shortest representation that parses back to the same value.
pub fn write_instances_csv<W: Write>(
    schema: &FeatureSchema,
    instances: &[Instance],
    labels: Option<&[u8]>,
    out: W,
) -> Result<()> {
    let mut writer = csv::Writer::from_writer(out);
    let mut header: Vec<&str> = schema.features.iter().map(|f| f.name.as_str()).collect();
    let label_name = schema.label.as_deref().unwrap_or("label");
    if labels.is_some() {
        header.push(label_name);
    }
    writer.write_record(&header)?;
    let mut record = Vec::with_capacity(header.len());
    for (i, x) in instances.iter().enumerate() {
        record.clear();
        record.extend(schema.features.iter().zip(x).map(|(f, v)| v.render(f)));
        if let Some(labels) = labels {
            record.push(labels[i].to_string());
        }
        writer.write_record(&record)?;
    }
    writer.flush()?;
    Ok(())
}

/// Parses a CSV with a header row. Columns are matched by name, in any
/// order; extra columns are ignored. The schema's label column, if named,
/// must be present.
pub fn read_dataset<R: Read>(schema: &FeatureSchema, input: R) -> Result<Dataset> {
    schema.validate()?;
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .trim(csv::Trim::All)
        .from_reader(input);
    let header: HashMap<String, usize> = reader
        .headers()?
        .iter()
        .enumerate()
        .map(|(i, h)| (h.to_string(), i))
        .collect();
    let columns: Vec<usize> = schema
        .features
        .iter()
        .map(|f| {
            header
                .get(&f.name)
                .copied()
                .ok_or_else(|| Error::Data(format!("missing column '{}'", f.name)))
        })
        .collect::<Result<_>>()?;
    let label_column = match &schema.label {
        Some(name) => Some((
            name.clone(),
            header
                .get(name)
                .copied()
                .ok_or_else(|| Error::Data(format!("missing label column '{name}'")))?,
        )),
        None => None,
    };

    let mut instances = Vec::new();
    let mut labels = label_column.as_ref().map(|_| Vec::new());
    for (row, record) in reader.records().enumerate() {
        let record = record?;
        let cell = |col: usize, name: &str| {
            record.get(col).ok_or_else(|| Error::Cell {
                row,
                column: name.to_string(),
                message: "missing cell".into(),
            })
        };
        let mut x = Vec::with_capacity(schema.len());
        for (f, &col) in schema.features.iter().zip(&columns) {
            let text = cell(col, &f.name)?;
            let value = Value::parse(f, text).map_err(|message| Error::Cell {
                row,
                column: f.name.clone(),
                message,
            })?;
            x.push(value);
        }
        if let (Some((name, col)), Some(labels)) = (&label_column, labels.as_mut()) {
            let label = match cell(*col, name)? {
                "0" => 0,
                "1" => 1,
                other => {
                    return Err(Error::Cell {
                        row,
                        column: name.clone(),
                        message: format!("label must be 0 or 1, got '{other}'"),
                    })
                }
            };
            labels.push(label);
        }
        instances.push(x);
    }
    Ok(Dataset {
        schema: schema.clone(),
        instances,
        labels,
    })
}

pub fn load_dataset(path: &Path, schema: &FeatureSchema) -> Result<Dataset> {
    let file = std::fs::File::open(path).map_err(|source| Error::File {
        path: path.to_path_buf(),
        source,
    })?;
    read_dataset(schema, std::io::BufReader::new(file))
}
