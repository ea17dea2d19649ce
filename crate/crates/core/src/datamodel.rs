//! Tabular data: schema-typed ingestion, preparation, and synthesis.
//!
//! A [`Dataset`] is an immutable, column-major table whose categorical
//! cells are indices into per-column level dictionaries. Preparation
//! steps (rare-level bucketing, indicator encoding, splitting) all
//! produce new values rather than mutating in place, so datasets can be
//! shared freely across threads.

use std::collections::HashMap;
use std::fmt;
use std::io::Write;
use std::path::Path;

use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution;
use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::rng::substream;

/// The synthetic level that absorbs rare levels during bucketing.
pub const OTHER_LEVEL: &str = "Other";

// ---------------------------------------------------------------------------
// Schema
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ColumnKind {
    Numeric,
    Categorical,
    BinaryOutcome,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Role {
    Predictor,
    Outcome,
    ClusterTarget,
    Ignore,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ColumnSchema {
    pub name: String,
    pub kind: ColumnKind,
    pub role: Role,
}

impl ColumnSchema {
    pub fn new(name: impl Into<String>, kind: ColumnKind, role: Role) -> Self {
        ColumnSchema {
            name: name.into(),
            kind,
            role,
        }
    }
}

/// An ordered list of column descriptions.
///
/// A valid schema has unique names, exactly one binary outcome column
/// with role `Outcome`, and exactly one categorical column with role
/// `ClusterTarget`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Schema {
    pub columns: Vec<ColumnSchema>,
}

impl Schema {
    pub fn new(columns: Vec<ColumnSchema>) -> Result<Self> {
        let schema = Schema { columns };
        schema.validate()?;
        Ok(schema)
    }

    pub fn validate(&self) -> Result<()> {
        let mut seen = HashMap::new();
        for c in &self.columns {
            if seen.insert(c.name.clone(), ()).is_some() {
                return Err(Error::Schema(format!("duplicate column name '{}'", c.name)));
            }
        }
        let outcomes: Vec<_> = self.columns.iter().filter(|c| c.role == Role::Outcome).collect();
        if outcomes.len() != 1 || outcomes[0].kind != ColumnKind::BinaryOutcome {
            return Err(Error::Schema(
                "schema must have exactly one binary-outcome column with role 'outcome'".into(),
            ));
        }
        let targets: Vec<_> = self
            .columns
            .iter()
            .filter(|c| c.role == Role::ClusterTarget)
            .collect();
        if targets.len() != 1 || targets[0].kind != ColumnKind::Categorical {
            return Err(Error::Schema(
                "schema must have exactly one categorical column with role 'cluster_target'"
                    .into(),
            ));
        }
        for c in &self.columns {
            if c.role == Role::Outcome && c.kind != ColumnKind::BinaryOutcome {
                return Err(Error::Schema(format!("outcome column '{}' must be binary", c.name)));
            }
            if c.kind == ColumnKind::BinaryOutcome && c.role != Role::Outcome {
                return Err(Error::Schema(format!(
                    "binary-outcome column '{}' must have role 'outcome'",
                    c.name
                )));
            }
        }
        Ok(())
    }

    pub fn position(&self, name: &str) -> Option<usize> {
        self.columns.iter().position(|c| c.name == name)
    }

    pub fn outcome_position(&self) -> usize {
        self.columns
            .iter()
            .position(|c| c.role == Role::Outcome)
            .expect("validated schema has an outcome column")
    }

    pub fn cluster_target_position(&self) -> usize {
        self.columns
            .iter()
            .position(|c| c.role == Role::ClusterTarget)
            .expect("validated schema has a cluster-target column")
    }

    pub fn read_json(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let schema: Schema = serde_json::from_str(&text).map_err(|e| Error::Artifact {
            path: path.into(),
            message: e.to_string(),
        })?;
        schema.validate()?;
        Ok(schema)
    }
}

// ---------------------------------------------------------------------------
// Dataset
// ---------------------------------------------------------------------------

/// Column storage. Categorical cells are `u32` codes into `levels`.
#[derive(Debug, Clone, PartialEq)]
pub enum ColumnData {
    Numeric(Vec<f64>),
    Categorical { codes: Vec<u32>, levels: Vec<String> },
    Outcome(Vec<u8>),
}

impl ColumnData {
    fn len(&self) -> usize {
        match self {
            ColumnData::Numeric(v) => v.len(),
            ColumnData::Categorical { codes, .. } => codes.len(),
            ColumnData::Outcome(v) => v.len(),
        }
    }
}

/// An immutable table of typed observations.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    schema: Schema,
    columns: Vec<ColumnData>,
    n_rows: usize,
}

impl Dataset {
    pub fn new(schema: Schema, columns: Vec<ColumnData>) -> Result<Self> {
        schema.validate()?;
        if schema.columns.len() != columns.len() {
            return Err(Error::Schema(format!(
                "schema has {} columns but {} were supplied",
                schema.columns.len(),
                columns.len()
            )));
        }
        let n_rows = columns.first().map(|c| c.len()).unwrap_or(0);
        for (cs, col) in schema.columns.iter().zip(&columns) {
            if col.len() != n_rows {
                return Err(Error::Schema(format!(
                    "column '{}' has {} rows, expected {}",
                    cs.name,
                    col.len(),
                    n_rows
                )));
            }
            match (cs.kind, col) {
                (ColumnKind::Numeric, ColumnData::Numeric(_)) => {}
                (ColumnKind::Categorical, ColumnData::Categorical { codes, levels }) => {
                    if let Some(bad) = codes.iter().find(|&&c| c as usize >= levels.len()) {
                        return Err(Error::Schema(format!(
                            "column '{}' has code {} outside its {}-level dictionary",
                            cs.name,
                            bad,
                            levels.len()
                        )));
                    }
                }
                (ColumnKind::BinaryOutcome, ColumnData::Outcome(values)) => {
                    if values.iter().any(|&v| v > 1) {
                        return Err(Error::Schema(format!(
                            "outcome column '{}' contains values outside {{0, 1}}",
                            cs.name
                        )));
                    }
                }
                _ => {
                    return Err(Error::Schema(format!(
                        "column '{}' storage does not match its declared kind",
                        cs.name
                    )))
                }
            }
        }
        Ok(Dataset {
            schema,
            columns,
            n_rows,
        })
    }

    pub fn schema(&self) -> &Schema {
        &self.schema
    }

    pub fn n_rows(&self) -> usize {
        self.n_rows
    }

    pub fn column(&self, index: usize) -> &ColumnData {
        &self.columns[index]
    }

    pub fn column_by_name(&self, name: &str) -> Result<(usize, &ColumnData)> {
        let idx = self
            .schema
            .position(name)
            .ok_or_else(|| Error::Schema(format!("no column named '{}'", name)))?;
        Ok((idx, &self.columns[idx]))
    }

    pub fn outcome(&self) -> &[u8] {
        match &self.columns[self.schema.outcome_position()] {
            ColumnData::Outcome(v) => v,
            _ => unreachable!("outcome column validated at construction"),
        }
    }

    pub fn cluster_target(&self) -> (usize, &[u32], &[String]) {
        let idx = self.schema.cluster_target_position();
        match &self.columns[idx] {
            ColumnData::Categorical { codes, levels } => (idx, codes, levels),
            _ => unreachable!("cluster target validated at construction"),
        }
    }

    pub fn categorical(&self, name: &str) -> Result<(&[u32], &[String])> {
        match self.column_by_name(name)? {
            (_, ColumnData::Categorical { codes, levels }) => Ok((codes, levels)),
            _ => Err(Error::Schema(format!("column '{}' is not categorical", name))),
        }
    }

    /// Level frequencies of a categorical column, indexed by code.
    pub fn level_counts(&self, name: &str) -> Result<Vec<usize>> {
        let (codes, levels) = self.categorical(name)?;
        let mut counts = vec![0usize; levels.len()];
        for &c in codes {
            counts[c as usize] += 1;
        }
        Ok(counts)
    }

    /// A new dataset containing the given rows (in the given order).
    /// Level dictionaries are preserved.
    pub fn subset(&self, rows: &[usize]) -> Dataset {
        let columns = self
            .columns
            .iter()
            .map(|col| match col {
                ColumnData::Numeric(v) => ColumnData::Numeric(rows.iter().map(|&r| v[r]).collect()),
                ColumnData::Categorical { codes, levels } => ColumnData::Categorical {
                    codes: rows.iter().map(|&r| codes[r]).collect(),
                    levels: levels.clone(),
                },
                ColumnData::Outcome(v) => ColumnData::Outcome(rows.iter().map(|&r| v[r]).collect()),
            })
            .collect();
        Dataset {
            schema: self.schema.clone(),
            columns,
            n_rows: rows.len(),
        }
    }

    /// A new dataset with one column's values permuted: row `i` takes the
    /// value previously at `permutation[i]`. All other columns are fixed.
    pub fn with_column_permuted(&self, column: usize, permutation: &[usize]) -> Dataset {
        assert_eq!(permutation.len(), self.n_rows);
        let mut columns = self.columns.clone();
        columns[column] = match &self.columns[column] {
            ColumnData::Numeric(v) => {
                ColumnData::Numeric(permutation.iter().map(|&r| v[r]).collect())
            }
            ColumnData::Categorical { codes, levels } => ColumnData::Categorical {
                codes: permutation.iter().map(|&r| codes[r]).collect(),
                levels: levels.clone(),
            },
            ColumnData::Outcome(v) => {
                ColumnData::Outcome(permutation.iter().map(|&r| v[r]).collect())
            }
        };
        Dataset {
            schema: self.schema.clone(),
            columns,
            n_rows: self.n_rows,
        }
    }

    /// Replace a categorical column's levels through a code mapping, for
    /// example to collapse levels into their assigned groups. `mapping`
    /// sends old codes to new codes into `new_levels`.
    pub fn map_levels(&self, name: &str, mapping: &[u32], new_levels: Vec<String>) -> Result<Dataset> {
        let (idx, col) = self.column_by_name(name)?;
        let (codes, levels) = match col {
            ColumnData::Categorical { codes, levels } => (codes, levels),
            _ => return Err(Error::Schema(format!("column '{}' is not categorical", name))),
        };
        if mapping.len() != levels.len() {
            return Err(Error::InvalidArgument(format!(
                "mapping covers {} levels but column '{}' has {}",
                mapping.len(),
                name,
                levels.len()
            )));
        }
        if let Some(bad) = mapping.iter().find(|&&m| m as usize >= new_levels.len()) {
            return Err(Error::InvalidArgument(format!(
                "mapping target {} outside the new {}-level dictionary",
                bad,
                new_levels.len()
            )));
        }
        let mut columns = self.columns.clone();
        columns[idx] = ColumnData::Categorical {
            codes: codes.iter().map(|&c| mapping[c as usize]).collect(),
            levels: new_levels,
        };
        Ok(Dataset {
            schema: self.schema.clone(),
            columns,
            n_rows: self.n_rows,
        })
    }

    /// Re-export as CSV with level dictionaries rendered as strings.
    pub fn write_csv<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        let names: Vec<&str> = self.schema.columns.iter().map(|c| c.name.as_str()).collect();
        writeln!(w, "{}", names.join(","))?;
        let mut cell = String::new();
        for row in 0..self.n_rows {
            cell.clear();
            for (k, col) in self.columns.iter().enumerate() {
                if k > 0 {
                    cell.push(',');
                }
                match col {
                    ColumnData::Numeric(v) => {
                        let mut buf = ryu_format(v[row]);
                        cell.push_str(&buf);
                        buf.clear();
                    }
                    ColumnData::Categorical { codes, levels } => {
                        cell.push_str(&csv_escape(&levels[codes[row] as usize]))
                    }
                    ColumnData::Outcome(v) => cell.push_str(if v[row] == 1 { "1" } else { "0" }),
                }
            }
            writeln!(w, "{}", cell)?;
        }
        Ok(())
    }
}

fn ryu_format(v: f64) -> String {
    // Shortest round-trip formatting keeps re-exports loss-free.
    format!("{}", v)
}

fn csv_escape(field: &str) -> String {
    if field.contains([',', '"', '\n']) {
        format!("\"{}\"", field.replace('"', "\"\""))
    } else {
        field.to_string()
    }
}

// ---------------------------------------------------------------------------
// CSV ingestion
// ---------------------------------------------------------------------------

/// Load a comma-delimited UTF-8 file with a header row against a schema.
///
/// Level dictionaries are built in first-appearance order, so loading is
/// deterministic for a fixed file. Missing values, unparseable numeric
/// cells, and outcomes outside {0, 1} are rejected with the offending
/// row and column named. Rows are addressed 1-based, excluding the
/// header.
pub fn load_csv(path: impl AsRef<Path>, schema: &Schema) -> Result<Dataset> {
    let path = path.as_ref();
    let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
    load_csv_reader(file, schema)
}

/// Same as [`load_csv`] for any reader (used by tests and stdin).
pub fn load_csv_reader<R: std::io::Read>(reader: R, schema: &Schema) -> Result<Dataset> {
    schema.validate()?;
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(true)
        .comment(Some(b'#'))
        .from_reader(reader);
    let headers = rdr
        .headers()
        .map_err(|e| Error::Schema(format!("cannot read header row: {e}")))?
        .clone();
    let header_pos: HashMap<&str, usize> = headers.iter().enumerate().map(|(i, h)| (h, i)).collect();

    // Map each schema column to its position in the file.
    let mut positions = Vec::with_capacity(schema.columns.len());
    for c in &schema.columns {
        let pos = header_pos.get(c.name.as_str()).copied().ok_or_else(|| {
            Error::Schema(format!("column '{}' missing from CSV header", c.name))
        })?;
        positions.push(pos);
    }

    let mut builders: Vec<ColumnBuilder> = schema
        .columns
        .iter()
        .map(|c| ColumnBuilder::new(c.kind))
        .collect();

    for (row_idx, record) in rdr.records().enumerate() {
        let row = row_idx + 1;
        let record = record.map_err(|e| Error::ingest(row, "<record>", e.to_string()))?;
        for ((c, &pos), builder) in schema.columns.iter().zip(&positions).zip(&mut builders) {
            let raw = record.get(pos).unwrap_or("");
            builder.push(raw, row, &c.name)?;
        }
    }

    let columns = builders.into_iter().map(|b| b.finish()).collect();
    Dataset::new(schema.clone(), columns)
}

enum ColumnBuilder {
    Numeric(Vec<f64>),
    Categorical {
        codes: Vec<u32>,
        levels: Vec<String>,
        lookup: HashMap<String, u32>,
    },
    Outcome(Vec<u8>),
}

impl ColumnBuilder {
    fn new(kind: ColumnKind) -> Self {
        match kind {
            ColumnKind::Numeric => ColumnBuilder::Numeric(Vec::new()),
            ColumnKind::Categorical => ColumnBuilder::Categorical {
                codes: Vec::new(),
                levels: Vec::new(),
                lookup: HashMap::new(),
            },
            ColumnKind::BinaryOutcome => ColumnBuilder::Outcome(Vec::new()),
        }
    }

    fn push(&mut self, raw: &str, row: usize, column: &str) -> Result<()> {
        let value = raw.trim();
        if value.is_empty() {
            return Err(Error::ingest(row, column, "missing value"));
        }
        match self {
            ColumnBuilder::Numeric(values) => {
                let parsed: f64 = value
                    .parse()
                    .map_err(|_| Error::ingest(row, column, format!("unparseable numeric '{value}'")))?;
                if !parsed.is_finite() {
                    return Err(Error::ingest(row, column, "non-finite numeric value"));
                }
                values.push(parsed);
            }
            ColumnBuilder::Categorical { codes, levels, lookup } => {
                let code = match lookup.get(value) {
                    Some(&c) => c,
                    None => {
                        let c = levels.len() as u32;
                        levels.push(value.to_string());
                        lookup.insert(value.to_string(), c);
                        c
                    }
                };
                codes.push(code);
            }
            ColumnBuilder::Outcome(values) => match value {
                "0" => values.push(0),
                "1" => values.push(1),
                other => {
                    return Err(Error::ingest(
                        row,
                        column,
                        format!("outcome must be 0 or 1, got '{other}'"),
                    ))
                }
            },
        }
        Ok(())
    }

    fn finish(self) -> ColumnData {
        match self {
            ColumnBuilder::Numeric(v) => ColumnData::Numeric(v),
            ColumnBuilder::Categorical { codes, levels, .. } => {
                ColumnData::Categorical { codes, levels }
            }
            ColumnBuilder::Outcome(v) => ColumnData::Outcome(v),
        }
    }
}

// ---------------------------------------------------------------------------
// Rare-level bucketing
// ---------------------------------------------------------------------------

/// Remap every level of `column` appearing strictly fewer than
/// `min_count` times onto the single level [`OTHER_LEVEL`]. Levels at or
/// above the threshold are unchanged; the operation is idempotent and
/// preserves the row count.
pub fn bucket_rare_levels(d: &Dataset, column: &str, min_count: usize) -> Result<Dataset> {
    let (codes, levels) = d.categorical(column)?;
    let mut counts = vec![0usize; levels.len()];
    for &c in codes {
        counts[c as usize] += 1;
    }
    let rare: Vec<bool> = counts.iter().map(|&c| c < min_count).collect();
    if !rare.iter().any(|&r| r) {
        return Ok(d.clone());
    }

    let mut new_levels: Vec<String> = Vec::new();
    let mut mapping = vec![0u32; levels.len()];
    for (i, level) in levels.iter().enumerate() {
        if !rare[i] && level != OTHER_LEVEL {
            mapping[i] = new_levels.len() as u32;
            new_levels.push(level.clone());
        }
    }
    // All rare levels (and a pre-existing "Other") share one bucket.
    let other_code = new_levels.len() as u32;
    new_levels.push(OTHER_LEVEL.to_string());
    for (i, level) in levels.iter().enumerate() {
        if rare[i] || level == OTHER_LEVEL {
            mapping[i] = other_code;
        }
    }
    d.map_levels(column, &mapping, new_levels)
}

// ---------------------------------------------------------------------------
// Indicator encoding
// ---------------------------------------------------------------------------

/// What to do with the cluster-target column when building a design
/// matrix.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TargetPolicy {
    /// Encode it like any categorical predictor (one indicator per
    /// non-reference level).
    Indicators,
    /// Exclude it from the features and expose it as per-row stratum
    /// labels for clusterwise fitting.
    Strata,
    /// Exclude it entirely.
    Drop,
}

/// A numeric feature matrix with named columns, extracted outcome, and
/// optional per-row stratum labels.
#[derive(Debug, Clone, PartialEq)]
pub struct DesignMatrix {
    pub feature_names: Vec<String>,
    /// Column-major feature storage; every column has `n_rows` entries.
    pub columns: Vec<Vec<f64>>,
    pub outcome: Vec<u8>,
    pub group_labels: Option<Vec<usize>>,
    pub group_names: Option<Vec<String>>,
}

impl DesignMatrix {
    pub fn n_rows(&self) -> usize {
        self.outcome.len()
    }

    pub fn n_features(&self) -> usize {
        self.columns.len()
    }

    pub fn subset(&self, rows: &[usize]) -> DesignMatrix {
        DesignMatrix {
            feature_names: self.feature_names.clone(),
            columns: self
                .columns
                .iter()
                .map(|col| rows.iter().map(|&r| col[r]).collect())
                .collect(),
            outcome: rows.iter().map(|&r| self.outcome[r]).collect(),
            group_labels: self
                .group_labels
                .as_ref()
                .map(|g| rows.iter().map(|&r| g[r]).collect()),
            group_names: self.group_names.clone(),
        }
    }
}

/// Expand a dataset into a numeric design matrix: numeric predictors
/// pass through, each categorical predictor becomes one 0/1 indicator
/// per non-reference level. The reference level is the most frequent
/// (ties broken by dictionary order).
pub fn encode(d: &Dataset, target_policy: TargetPolicy) -> DesignMatrix {
    let target_idx = d.schema().cluster_target_position();
    let mut feature_names = Vec::new();
    let mut columns: Vec<Vec<f64>> = Vec::new();
    let mut group_labels = None;
    let mut group_names = None;

    for (idx, (cs, col)) in d.schema().columns.iter().zip(&d.columns).enumerate() {
        let is_target = idx == target_idx;
        match cs.role {
            Role::Ignore | Role::Outcome => continue,
            Role::Predictor | Role::ClusterTarget => {}
        }
        if is_target {
            match target_policy {
                TargetPolicy::Drop => continue,
                TargetPolicy::Strata => {
                    if let ColumnData::Categorical { codes, levels } = col {
                        group_labels = Some(codes.iter().map(|&c| c as usize).collect());
                        group_names = Some(levels.clone());
                    }
                    continue;
                }
                TargetPolicy::Indicators => {}
            }
        }
        match col {
            ColumnData::Numeric(v) => {
                feature_names.push(cs.name.clone());
                columns.push(v.clone());
            }
            ColumnData::Categorical { codes, levels } => {
                let reference = reference_level(codes, levels.len());
                for (code, level) in levels.iter().enumerate() {
                    if code == reference {
                        continue;
                    }
                    feature_names.push(format!("{}={}", cs.name, level));
                    columns.push(
                        codes
                            .iter()
                            .map(|&c| if c as usize == code { 1.0 } else { 0.0 })
                            .collect(),
                    );
                }
            }
            ColumnData::Outcome(_) => {}
        }
    }

    DesignMatrix {
        feature_names,
        columns,
        outcome: d.outcome().to_vec(),
        group_labels,
        group_names,
    }
}

/// Most frequent level; dictionary order breaks ties.
fn reference_level(codes: &[u32], n_levels: usize) -> usize {
    let mut counts = vec![0usize; n_levels];
    for &c in codes {
        counts[c as usize] += 1;
    }
    let mut best = 0;
    for (i, &c) in counts.iter().enumerate() {
        if c > counts[best] {
            best = i;
        }
    }
    best
}

// ---------------------------------------------------------------------------
// Train/test split
// ---------------------------------------------------------------------------

/// Seeded row-level partition. Train size is `round(fraction * n_rows)`;
/// both sides must end up non-empty.
pub fn split_train_test(d: &Dataset, train_fraction: f64, seed: u64) -> Result<(Dataset, Dataset)> {
    let (train_rows, test_rows) = split_indices(d.n_rows(), train_fraction, seed)?;
    Ok((d.subset(&train_rows), d.subset(&test_rows)))
}

/// The index-level version of [`split_train_test`], shared with the
/// evaluation harness so paired procedures see identical splits.
pub fn split_indices(n_rows: usize, train_fraction: f64, seed: u64) -> Result<(Vec<usize>, Vec<usize>)> {
    if !(train_fraction > 0.0 && train_fraction < 1.0) {
        return Err(Error::InvalidArgument(format!(
            "train fraction must be in (0, 1), got {train_fraction}"
        )));
    }
    let n_train = (train_fraction * n_rows as f64).round() as usize;
    if n_train == 0 || n_train == n_rows {
        return Err(Error::InvalidArgument(format!(
            "split of {n_rows} rows at fraction {train_fraction} leaves one side empty"
        )));
    }
    let mut order: Vec<usize> = (0..n_rows).collect();
    let mut rng = substream(seed, 0);
    order.shuffle(&mut rng);
    let test = order.split_off(n_train);
    Ok((order, test))
}

// ---------------------------------------------------------------------------
// Synthetic cohorts
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum CovariateDistribution {
    Normal { mean: f64, sd: f64 },
    Bernoulli { p: f64 },
    Uniform { low: f64, high: f64 },
}

/// Log-odds contribution of one covariate, either shared by all planted
/// groups or specific to each.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", untagged)]
pub enum CoefficientSpec {
    Global(f64),
    PerGroup(Vec<f64>),
}

impl CoefficientSpec {
    fn for_group(&self, group: usize) -> f64 {
        match self {
            CoefficientSpec::Global(c) => *c,
            CoefficientSpec::PerGroup(v) => v[group],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CovariateSpec {
    pub name: String,
    pub distribution: CovariateDistribution,
    pub coefficient: CoefficientSpec,
}

/// Recipe for a synthetic cohort with planted level groups.
///
/// Rows are drawn independently: a level is sampled by `level_weights`,
/// covariates from their distributions, and the outcome from a Bernoulli
/// whose logit is the level's group baseline plus the covariate
/// contributions.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SyntheticSpec {
    pub n_rows: usize,
    pub n_levels: usize,
    /// Planted group of each level, `0..n_groups`.
    pub planted_groups: Vec<usize>,
    /// Baseline outcome probability per group, each in (0, 1).
    pub group_event_rates: Vec<f64>,
    #[serde(default)]
    pub covariates: Vec<CovariateSpec>,
    /// Relative sampling weight of each level; positive and finite.
    pub level_weights: Vec<f64>,
    pub seed: u64,
}

impl SyntheticSpec {
    /// Equal-weight spec with the given per-level group assignment.
    pub fn new(n_rows: usize, planted_groups: Vec<usize>, group_event_rates: Vec<f64>, seed: u64) -> Self {
        let n_levels = planted_groups.len();
        SyntheticSpec {
            n_rows,
            n_levels,
            planted_groups,
            group_event_rates,
            covariates: Vec::new(),
            level_weights: vec![1.0; n_levels],
            seed,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_rows == 0 {
            return Err(Error::InvalidArgument("n_rows must be positive".into()));
        }
        if self.n_levels == 0 || self.planted_groups.len() != self.n_levels {
            return Err(Error::InvalidArgument(
                "planted_groups must assign every level to exactly one group".into(),
            ));
        }
        if self.level_weights.len() != self.n_levels
            || self.level_weights.iter().any(|w| !(w.is_finite() && *w > 0.0))
        {
            return Err(Error::InvalidArgument(
                "level_weights must be positive and finite, one per level".into(),
            ));
        }
        if self.group_event_rates.is_empty()
            || self.group_event_rates.iter().any(|r| !(*r > 0.0 && *r < 1.0))
        {
            return Err(Error::InvalidArgument("event rates must lie in (0, 1)".into()));
        }
        if let Some(&bad) = self
            .planted_groups
            .iter()
            .find(|&&g| g >= self.group_event_rates.len())
        {
            return Err(Error::InvalidArgument(format!(
                "level assigned to group {bad} but only {} rates given",
                self.group_event_rates.len()
            )));
        }
        for cov in &self.covariates {
            if let CoefficientSpec::PerGroup(v) = &cov.coefficient {
                if v.len() != self.group_event_rates.len() {
                    return Err(Error::InvalidArgument(format!(
                        "covariate '{}' has {} per-group coefficients, expected {}",
                        cov.name,
                        v.len(),
                        self.group_event_rates.len()
                    )));
                }
            }
        }
        Ok(())
    }

    /// Level names `L00`, `L01`, ... used in the generated dataset.
    pub fn level_names(&self) -> Vec<String> {
        (0..self.n_levels).map(|i| format!("L{:02}", i)).collect()
    }
}

/// Column names used by generated cohorts.
pub const SYNTHETIC_TARGET: &str = "level";
pub const SYNTHETIC_OUTCOME: &str = "outcome";

/// Draw a synthetic cohort. Deterministic for a fixed spec.
pub fn generate_synthetic(spec: &SyntheticSpec) -> Result<Dataset> {
    spec.validate()?;
    let mut rng = substream(spec.seed, 0);
    let weights = WeightedIndex::new(&spec.level_weights)
        .map_err(|e| Error::InvalidArgument(format!("bad level weights: {e}")))?;

    let samplers: Vec<CovariateSampler> = spec
        .covariates
        .iter()
        .map(|c| CovariateSampler::new(&c.distribution))
        .collect::<Result<_>>()?;

    let mut codes = Vec::with_capacity(spec.n_rows);
    let mut covariate_values: Vec<Vec<f64>> =
        spec.covariates.iter().map(|_| Vec::with_capacity(spec.n_rows)).collect();
    let mut outcomes = Vec::with_capacity(spec.n_rows);

    for _ in 0..spec.n_rows {
        let level = weights.sample(&mut rng);
        let group = spec.planted_groups[level];
        let rate = spec.group_event_rates[group];
        let mut logit = (rate / (1.0 - rate)).ln();
        for ((cov, sampler), column) in spec
            .covariates
            .iter()
            .zip(&samplers)
            .zip(covariate_values.iter_mut())
        {
            let x = sampler.sample(&mut rng);
            logit += cov.coefficient.for_group(group) * x;
            column.push(x);
        }
        let p = 1.0 / (1.0 + (-logit).exp());
        let y = if rng.random::<f64>() < p { 1 } else { 0 };
        codes.push(level as u32);
        outcomes.push(y);
    }

    let mut columns_schema = Vec::new();
    let mut columns = Vec::new();
    for (cov, values) in spec.covariates.iter().zip(covariate_values) {
        columns_schema.push(ColumnSchema::new(&cov.name, ColumnKind::Numeric, Role::Predictor));
        columns.push(ColumnData::Numeric(values));
    }
    columns_schema.push(ColumnSchema::new(
        SYNTHETIC_TARGET,
        ColumnKind::Categorical,
        Role::ClusterTarget,
    ));
    columns.push(ColumnData::Categorical {
        codes,
        levels: spec.level_names(),
    });
    columns_schema.push(ColumnSchema::new(
        SYNTHETIC_OUTCOME,
        ColumnKind::BinaryOutcome,
        Role::Outcome,
    ));
    columns.push(ColumnData::Outcome(outcomes));

    Dataset::new(Schema::new(columns_schema)?, columns)
}

enum CovariateSampler {
    Normal(rand_distr::Normal<f64>),
    Bernoulli(f64),
    Uniform { low: f64, span: f64 },
}

impl CovariateSampler {
    fn new(dist: &CovariateDistribution) -> Result<Self> {
        Ok(match *dist {
            CovariateDistribution::Normal { mean, sd } => CovariateSampler::Normal(
                rand_distr::Normal::new(mean, sd)
                    .map_err(|e| Error::InvalidArgument(format!("bad normal covariate: {e}")))?,
            ),
            CovariateDistribution::Bernoulli { p } => {
                if !(0.0..=1.0).contains(&p) {
                    return Err(Error::InvalidArgument(format!(
                        "bernoulli covariate probability {p} outside [0, 1]"
                    )));
                }
                CovariateSampler::Bernoulli(p)
            }
            CovariateDistribution::Uniform { low, high } => {
                if !(high > low) {
                    return Err(Error::InvalidArgument("uniform covariate needs high > low".into()));
                }
                CovariateSampler::Uniform { low, span: high - low }
            }
        })
    }

    fn sample<R: Rng>(&self, rng: &mut R) -> f64 {
        match self {
            CovariateSampler::Normal(n) => n.sample(rng),
            CovariateSampler::Bernoulli(p) => {
                if rng.random::<f64>() < *p {
                    1.0
                } else {
                    0.0
                }
            }
            CovariateSampler::Uniform { low, span } => low + span * rng.random::<f64>(),
        }
    }
}

impl fmt::Display for ColumnKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ColumnKind::Numeric => write!(f, "numeric"),
            ColumnKind::Categorical => write!(f, "categorical"),
            ColumnKind::BinaryOutcome => write!(f, "binary_outcome"),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn toy_schema() -> Schema {
        Schema::new(vec![
            ColumnSchema::new("age", ColumnKind::Numeric, Role::Predictor),
            ColumnSchema::new("dx", ColumnKind::Categorical, Role::ClusterTarget),
            ColumnSchema::new("readmit", ColumnKind::BinaryOutcome, Role::Outcome),
        ])
        .unwrap()
    }

    #[test]
    fn load_csv_builds_levels_in_first_appearance_order() {
        let csv = "age,dx,readmit\n64,flu,0\n41,sepsis,1\n77,flu,0\n";
        let d = load_csv_reader(csv.as_bytes(), &toy_schema()).unwrap();
        assert_eq!(d.n_rows(), 3);
        let (codes, levels) = d.categorical("dx").unwrap();
        assert_eq!(levels, &["flu".to_string(), "sepsis".to_string()]);
        assert_eq!(codes, &[0, 1, 0]);
    }

    #[test]
    fn load_csv_rejects_bad_outcome_with_row_and_column() {
        let csv = "age,dx,readmit\n64,flu,0\n41,sepsis,2\n";
        let err = load_csv_reader(csv.as_bytes(), &toy_schema()).unwrap_err();
        match err {
            Error::Ingest { row, column, .. } => {
                assert_eq!(row, 2);
                assert_eq!(column, "readmit");
            }
            other => panic!("expected ingest error, got {other:?}"),
        }
    }

    #[test]
    fn load_csv_rejects_missing_column() {
        let csv = "age,readmit\n64,0\n";
        let err = load_csv_reader(csv.as_bytes(), &toy_schema()).unwrap_err();
        assert!(matches!(err, Error::Schema(_)));
    }

    #[test]
    fn load_csv_rejects_missing_and_unparseable_cells() {
        let missing = "age,dx,readmit\n,flu,0\n";
        assert!(matches!(
            load_csv_reader(missing.as_bytes(), &toy_schema()).unwrap_err(),
            Error::Ingest { row: 1, .. }
        ));
        let garbled = "age,dx,readmit\nxx,flu,0\n";
        assert!(matches!(
            load_csv_reader(garbled.as_bytes(), &toy_schema()).unwrap_err(),
            Error::Ingest { row: 1, .. }
        ));
    }

    fn dataset_with_counts(counts: &[(&str, usize)]) -> Dataset {
        // outcome alternates so both classes appear
        let mut codes = Vec::new();
        let mut levels = Vec::new();
        for (i, (name, n)) in counts.iter().enumerate() {
            levels.push(name.to_string());
            codes.extend(std::iter::repeat(i as u32).take(*n));
        }
        let n = codes.len();
        let columns = vec![
            ColumnData::Numeric((0..n).map(|i| i as f64).collect()),
            ColumnData::Categorical { codes, levels },
            ColumnData::Outcome((0..n).map(|i| (i % 2) as u8).collect()),
        ];
        Dataset::new(toy_schema(), columns).unwrap()
    }

    #[test]
    fn bucket_rare_levels_uses_strict_threshold() {
        let d = dataset_with_counts(&[("big", 100), ("edge", 100), ("small", 99)]);
        let b = bucket_rare_levels(&d, "dx", 100).unwrap();
        let (_, levels) = b.categorical("dx").unwrap();
        assert_eq!(levels, &["big".to_string(), "edge".to_string(), OTHER_LEVEL.to_string()]);
        let counts = b.level_counts("dx").unwrap();
        assert_eq!(counts, vec![100, 100, 99]);
        assert_eq!(b.n_rows(), d.n_rows());
    }

    #[test]
    fn bucket_rare_levels_identity_when_all_frequent() {
        let d = dataset_with_counts(&[("a", 5), ("b", 6)]);
        let b = bucket_rare_levels(&d, "dx", 5).unwrap();
        assert_eq!(b, d);
        let (_, levels) = b.categorical("dx").unwrap();
        assert!(!levels.iter().any(|l| l == OTHER_LEVEL));
    }

    #[test]
    fn bucket_rare_levels_is_idempotent() {
        let d = dataset_with_counts(&[("a", 50), ("b", 3), ("c", 2), ("d", 7)]);
        let once = bucket_rare_levels(&d, "dx", 10).unwrap();
        let twice = bucket_rare_levels(&once, "dx", 10).unwrap();
        assert_eq!(once, twice);
        // 3 + 2 + 7 rare rows all land in Other
        let counts = once.level_counts("dx").unwrap();
        let (_, levels) = once.categorical("dx").unwrap();
        let other = levels.iter().position(|l| l == OTHER_LEVEL).unwrap();
        assert_eq!(counts[other], 12);
    }

    #[test]
    fn bucket_rare_levels_rejects_non_categorical() {
        let d = dataset_with_counts(&[("a", 5), ("b", 5)]);
        assert!(bucket_rare_levels(&d, "age", 3).is_err());
    }

    #[test]
    fn encode_drops_most_frequent_reference() {
        let d = dataset_with_counts(&[("A", 5), ("B", 3), ("C", 2)]);
        let x = encode(&d, TargetPolicy::Indicators);
        assert_eq!(x.feature_names, vec!["age", "dx=B", "dx=C"]);
        let b_sum: f64 = x.columns[1].iter().sum();
        let c_sum: f64 = x.columns[2].iter().sum();
        assert_eq!(b_sum, 3.0);
        assert_eq!(c_sum, 2.0);
    }

    #[test]
    fn encode_strata_exports_group_labels() {
        let d = dataset_with_counts(&[("A", 2), ("B", 2)]);
        let x = encode(&d, TargetPolicy::Strata);
        assert_eq!(x.feature_names, vec!["age"]);
        assert_eq!(x.group_labels.as_ref().unwrap().len(), 4);
        assert_eq!(x.group_names.as_ref().unwrap(), &["A".to_string(), "B".to_string()]);
    }

    #[test]
    fn encode_numeric_only_dataset_passes_through() {
        // Target exists but is dropped; remaining features are the numerics.
        let d = dataset_with_counts(&[("A", 4)]);
        let x = encode(&d, TargetPolicy::Drop);
        assert_eq!(x.feature_names, vec!["age"]);
        assert_eq!(x.columns.len(), 1);
    }

    #[test]
    fn split_sizes_follow_rounding() {
        let d = dataset_with_counts(&[("A", 5), ("B", 5)]);
        let (train, test) = split_train_test(&d, 0.8, 11).unwrap();
        assert_eq!((train.n_rows(), test.n_rows()), (8, 2));
        let (a, b) = split_indices(17_093, 0.8, 3).unwrap();
        assert_eq!((a.len(), b.len()), (13_674, 3_419));
    }

    #[test]
    fn split_is_deterministic_and_exact() {
        let (a1, b1) = split_indices(100, 0.8, 42).unwrap();
        let (a2, b2) = split_indices(100, 0.8, 42).unwrap();
        assert_eq!(a1, a2);
        assert_eq!(b1, b2);
        let mut all: Vec<usize> = a1.iter().chain(b1.iter()).copied().collect();
        all.sort_unstable();
        assert_eq!(all, (0..100).collect::<Vec<_>>());
    }

    #[test]
    fn split_rejects_empty_sides() {
        assert!(split_indices(3, 0.01, 1).is_err());
        assert!(split_indices(3, 0.99, 1).is_err());
        assert!(split_indices(10, 1.0, 1).is_err());
    }

    #[test]
    fn synthetic_group_rates_match_spec() {
        let spec = SyntheticSpec::new(
            100_000,
            vec![0, 0, 1, 1, 2, 2],
            vec![0.17, 0.33, 0.10],
            7,
        );
        let d = generate_synthetic(&spec).unwrap();
        let (_, codes, _) = d.cluster_target();
        let y = d.outcome();
        let mut events = vec![0.0; 3];
        let mut totals = vec![0.0; 3];
        for (c, &yi) in codes.iter().zip(y) {
            let g = spec.planted_groups[*c as usize];
            totals[g] += 1.0;
            events[g] += yi as f64;
        }
        for g in 0..3 {
            let rate = events[g] / totals[g];
            assert!(
                (rate - spec.group_event_rates[g]).abs() < 0.01,
                "group {g}: {rate} vs {}",
                spec.group_event_rates[g]
            );
        }
    }

    #[test]
    fn synthetic_single_level_rate_half() {
        let spec = SyntheticSpec::new(100_000, vec![0], vec![0.5], 3);
        let d = generate_synthetic(&spec).unwrap();
        let mean = d.outcome().iter().map(|&y| y as f64).sum::<f64>() / d.n_rows() as f64;
        assert!((mean - 0.5).abs() < 0.01, "outcome mean {mean}");
    }

    #[test]
    fn synthetic_zero_coefficient_covariate_is_independent_of_outcome() {
        let mut spec = SyntheticSpec::new(40_000, vec![0, 1], vec![0.3, 0.3], 5);
        spec.covariates.push(CovariateSpec {
            name: "noise".into(),
            distribution: CovariateDistribution::Bernoulli { p: 0.5 },
            coefficient: CoefficientSpec::Global(0.0),
        });
        let d = generate_synthetic(&spec).unwrap();
        let x = match d.column_by_name("noise").unwrap().1 {
            ColumnData::Numeric(v) => v,
            _ => unreachable!(),
        };
        let y = d.outcome();
        // 2x2 chi-square; under independence this is ~chi2(1), so a value
        // above 20 would be wildly unlikely.
        let n = y.len() as f64;
        let mut table = [[0.0f64; 2]; 2];
        for (xi, &yi) in x.iter().zip(y) {
            table[*xi as usize][yi as usize] += 1.0;
        }
        let row: Vec<f64> = (0..2).map(|i| table[i][0] + table[i][1]).collect();
        let col: Vec<f64> = (0..2).map(|j| table[0][j] + table[1][j]).collect();
        let mut chi2 = 0.0;
        for i in 0..2 {
            for j in 0..2 {
                let expected = row[i] * col[j] / n;
                chi2 += (table[i][j] - expected).powi(2) / expected;
            }
        }
        assert!(chi2 < 20.0, "chi-square {chi2} suggests dependence");
    }

    #[test]
    fn csv_roundtrip_preserves_levels_as_strings() {
        let d = dataset_with_counts(&[("flu", 3), ("sepsis", 2)]);
        let mut buf = Vec::new();
        d.write_csv(&mut buf).unwrap();
        let back = load_csv_reader(buf.as_slice(), d.schema()).unwrap();
        assert_eq!(back, d);
    }

    #[test]
    fn schema_validation_catches_shape_errors() {
        assert!(Schema::new(vec![ColumnSchema::new(
            "x",
            ColumnKind::Numeric,
            Role::Predictor
        )])
        .is_err());
        assert!(Schema::new(vec![
            ColumnSchema::new("dx", ColumnKind::Categorical, Role::ClusterTarget),
            ColumnSchema::new("dx", ColumnKind::BinaryOutcome, Role::Outcome),
        ])
        .is_err());
    }
}
