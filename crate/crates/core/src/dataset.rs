//! Schema-typed instance collections.
//!
//! A [`Dataset`] owns an ordered schema of nominal and numeric attributes,
//! a list of weighted instances and an optional class attribute. Every
//! operation returns a new value; datasets are never mutated in place once
//! built, so they can be shared freely between worker threads.
//!
//! Two text formats are understood:
//!
//! * CSV with a header row. Column types are inferred: a column is numeric
//!   iff every non-missing cell parses as a finite real, otherwise it is
//!   nominal with values in first-appearance order.
//! * A minimal ARFF subset (`@attribute name {a,b}` / `@attribute name
//!   numeric`, then `@data` and CSV rows). Rows may carry a trailing
//!   `{w}` cell holding the instance weight.
//!
//! In both formats the single character `?` marks a missing cell.

use std::collections::HashMap;
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Marker for a missing cell in every text format.
pub const MISSING: &str = "?";

#[derive(Debug, Error, PartialEq)]
pub enum DatasetError {
    #[error("empty input")]
    Empty,
    #[error("line {line}: expected {expected} cells, found {found}")]
    Arity {
        line: usize,
        expected: usize,
        found: usize,
    },
    #[error("line {line}: cannot parse {value:?} as a number for attribute {attr}")]
    NumericParse {
        line: usize,
        attr: String,
        value: String,
    },
    #[error("line {line}: value {value:?} is not declared for nominal attribute {attr}")]
    UndeclaredValue {
        line: usize,
        attr: String,
        value: String,
    },
    #[error("line {line}: {message}")]
    Syntax { line: usize, message: String },
    #[error("duplicate attribute name {0:?}")]
    DuplicateAttribute(String),
    #[error("nominal attribute {0:?} has an empty or duplicated value list")]
    BadValueList(String),
    #[error("unknown attribute {0:?}")]
    UnknownAttribute(String),
    #[error("attribute {0:?} is numeric; a class attribute must be nominal")]
    NumericClass(String),
    #[error("cannot remove the class attribute {0:?}")]
    RemoveClass(String),
    #[error("no class attribute assigned")]
    NoClass,
    #[error("instance {0} has a missing class value")]
    MissingClass(usize),
    #[error("instance {index}: {message}")]
    InvalidInstance { index: usize, message: String },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum AttributeKind {
    Nominal { values: Vec<String> },
    Numeric,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AttributeSpec {
    pub name: String,
    #[serde(flatten)]
    pub kind: AttributeKind,
    /// Position in the schema, recompacted whenever columns are removed.
    #[serde(skip)]
    pub index: usize,
}

impl AttributeSpec {
    pub fn nominal<S: Into<String>>(name: S, values: &[&str]) -> Self {
        Self {
            name: name.into(),
            kind: AttributeKind::Nominal {
                values: values.iter().map(|v| v.to_string()).collect(),
            },
            index: 0,
        }
    }

    pub fn numeric<S: Into<String>>(name: S) -> Self {
        Self {
            name: name.into(),
            kind: AttributeKind::Numeric,
            index: 0,
        }
    }

    pub fn is_nominal(&self) -> bool {
        matches!(self.kind, AttributeKind::Nominal { .. })
    }

    pub fn is_numeric(&self) -> bool {
        matches!(self.kind, AttributeKind::Numeric)
    }

    /// Declared values of a nominal attribute; empty for numeric ones.
    pub fn values(&self) -> &[String] {
        match &self.kind {
            AttributeKind::Nominal { values } => values,
            AttributeKind::Numeric => &[],
        }
    }

    pub fn value_index(&self, value: &str) -> Option<usize> {
        self.values().iter().position(|v| v == value)
    }
}

/// One cell of an instance.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Cell {
    /// Index into the attribute's declared value list.
    Nominal(usize),
    Numeric(f64),
    Missing,
}

impl Cell {
    pub fn is_missing(&self) -> bool {
        matches!(self, Cell::Missing)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Instance {
    pub values: Vec<Cell>,
    pub weight: f64,
}

impl Instance {
    pub fn new(values: Vec<Cell>) -> Self {
        Self {
            values,
            weight: 1.0,
        }
    }

    pub fn with_weight(values: Vec<Cell>, weight: f64) -> Self {
        Self { values, weight }
    }
}

/// Weighted class counts of a collection of instances.
#[derive(Debug, Clone, PartialEq)]
pub struct ClassFrequency {
    /// Class values in declaration order.
    pub classes: Vec<String>,
    /// Weight per class, parallel to `classes`.
    pub counts: Vec<f64>,
    pub total: f64,
}

impl ClassFrequency {
    pub fn from_counts(classes: Vec<String>, counts: Vec<f64>) -> Self {
        let total = counts.iter().sum();
        Self {
            classes,
            counts,
            total,
        }
    }

    pub fn get(&self, class: &str) -> Option<f64> {
        self.classes
            .iter()
            .position(|c| c == class)
            .map(|i| self.counts[i])
    }

    /// Proportions per class; all zero when the total is zero.
    pub fn proportions(&self) -> Vec<f64> {
        if self.total > 0.0 {
            self.counts.iter().map(|c| c / self.total).collect()
        } else {
            vec![0.0; self.counts.len()]
        }
    }
}

/// Input format selector for [`parse_dataset`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Format {
    Csv,
    Arff,
}

impl Format {
    /// `.arff` selects the attribute-declared format, anything else CSV.
    pub fn from_path(path: &std::path::Path) -> Self {
        match path.extension().and_then(|e| e.to_str()) {
            Some(ext) if ext.eq_ignore_ascii_case("arff") => Format::Arff,
            _ => Format::Csv,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    schema: Vec<AttributeSpec>,
    instances: Vec<Instance>,
    class_attr: Option<String>,
}

impl Dataset {
    /// Builds a dataset after checking every schema and instance invariant.
    pub fn new(
        mut schema: Vec<AttributeSpec>,
        instances: Vec<Instance>,
    ) -> Result<Self, DatasetError> {
        let mut seen = HashMap::new();
        for (i, attr) in schema.iter_mut().enumerate() {
            attr.index = i;
            if seen.insert(attr.name.clone(), i).is_some() {
                return Err(DatasetError::DuplicateAttribute(attr.name.clone()));
            }
            if let AttributeKind::Nominal { values } = &attr.kind {
                let mut distinct = values.clone();
                distinct.sort();
                distinct.dedup();
                if values.is_empty() || distinct.len() != values.len() {
                    return Err(DatasetError::BadValueList(attr.name.clone()));
                }
            }
        }
        for (index, inst) in instances.iter().enumerate() {
            check_instance(&schema, inst)
                .map_err(|message| DatasetError::InvalidInstance { index, message })?;
        }
        Ok(Self {
            schema,
            instances,
            class_attr: None,
        })
    }

    pub fn schema(&self) -> &[AttributeSpec] {
        &self.schema
    }

    pub fn instances(&self) -> &[Instance] {
        &self.instances
    }

    pub fn len(&self) -> usize {
        self.instances.len()
    }

    pub fn is_empty(&self) -> bool {
        self.instances.is_empty()
    }

    pub fn class_attr(&self) -> Option<&str> {
        self.class_attr.as_deref()
    }

    pub fn attribute(&self, name: &str) -> Option<&AttributeSpec> {
        self.schema.iter().find(|a| a.name == name)
    }

    /// Schema position of the class attribute.
    pub fn class_index(&self) -> Option<usize> {
        self.class_attr
            .as_deref()
            .and_then(|n| self.attribute(n))
            .map(|a| a.index)
    }

    /// Declared class values, in tie-break order.
    pub fn class_values(&self) -> Option<&[String]> {
        self.class_index().map(|i| self.schema[i].values())
    }

    /// Class value index of instance `i`, `None` when missing.
    pub fn class_of(&self, i: usize) -> Option<usize> {
        let ci = self.class_index()?;
        match self.instances[i].values[ci] {
            Cell::Nominal(v) => Some(v),
            _ => None,
        }
    }

    pub fn total_weight(&self) -> f64 {
        self.instances.iter().map(|i| i.weight).sum()
    }

    /// A dataset with the same schema and class, holding only `indices`.
    pub fn subset(&self, indices: &[usize]) -> Dataset {
        Dataset {
            schema: self.schema.clone(),
            instances: indices.iter().map(|&i| self.instances[i].clone()).collect(),
            class_attr: self.class_attr.clone(),
        }
    }

    /// Same dataset with every instance weight replaced by `f(i, weight)`.
    pub fn map_weights<F: Fn(usize, f64) -> f64>(&self, f: F) -> Dataset {
        let mut out = self.clone();
        for (i, inst) in out.instances.iter_mut().enumerate() {
            inst.weight = f(i, inst.weight);
            assert!(inst.weight >= 0.0, "instance weights must be nonnegative");
        }
        out
    }

    /// Renders a cell the way the text formats spell it.
    pub fn format_cell(&self, attr: usize, cell: Cell) -> String {
        match cell {
            Cell::Missing => MISSING.to_string(),
            Cell::Numeric(x) => format!("{x}"),
            Cell::Nominal(v) => self.schema[attr].values()[v].clone(),
        }
    }

    /// CSV text (header plus one row per instance). Weights are not written.
    pub fn to_csv(&self) -> String {
        let mut out = String::new();
        let header: Vec<&str> = self.schema.iter().map(|a| a.name.as_str()).collect();
        out.push_str(&header.join(","));
        out.push('\n');
        for inst in &self.instances {
            out.push_str(&self.row_text(inst));
            out.push('\n');
        }
        out
    }

    /// Attribute-declared text, including a `{w}` cell for non-unit weights.
    pub fn to_arff(&self, relation: &str) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "@relation {}", quote_name(relation));
        for attr in &self.schema {
            match &attr.kind {
                AttributeKind::Numeric => {
                    let _ = writeln!(out, "@attribute {} numeric", quote_name(&attr.name));
                }
                AttributeKind::Nominal { values } => {
                    let _ = writeln!(
                        out,
                        "@attribute {} {{{}}}",
                        quote_name(&attr.name),
                        values.join(",")
                    );
                }
            }
        }
        out.push_str("@data\n");
        for inst in &self.instances {
            out.push_str(&self.row_text(inst));
            if inst.weight != 1.0 {
                let _ = write!(out, ",{{{}}}", inst.weight);
            }
            out.push('\n');
        }
        out
    }

    fn row_text(&self, inst: &Instance) -> String {
        inst.values
            .iter()
            .enumerate()
            .map(|(a, &c)| self.format_cell(a, c))
            .collect::<Vec<_>>()
            .join(",")
    }
}

fn check_instance(schema: &[AttributeSpec], inst: &Instance) -> Result<(), String> {
    if inst.values.len() != schema.len() {
        return Err(format!(
            "{} cells for a schema of {} attributes",
            inst.values.len(),
            schema.len()
        ));
    }
    if !(inst.weight >= 0.0 && inst.weight.is_finite()) {
        return Err(format!("invalid weight {}", inst.weight));
    }
    for (attr, cell) in schema.iter().zip(&inst.values) {
        match (cell, &attr.kind) {
            (Cell::Missing, _) => {}
            (Cell::Nominal(v), AttributeKind::Nominal { values }) if *v < values.len() => {}
            (Cell::Numeric(x), AttributeKind::Numeric) if x.is_finite() => {}
            _ => {
                return Err(format!(
                    "cell {cell:?} does not fit attribute {}",
                    attr.name
                ))
            }
        }
    }
    Ok(())
}

fn quote_name(name: &str) -> String {
    if name.contains(|c: char| c.is_whitespace() || c == ',' || c == '{' || c == '\'') {
        format!("'{}'", name.replace('\'', "\\'"))
    } else {
        name.to_string()
    }
}

fn parse_real(token: &str) -> Option<f64> {
    token.parse::<f64>().ok().filter(|x| x.is_finite())
}

fn split_row(line: &str) -> Vec<&str> {
    line.split(',').map(str::trim).collect()
}

/// Parses a dataset from text. The result has unit weights (unless the ARFF
/// rows carry explicit weights) and no class attribute.
pub fn parse_dataset(source: &str, format: Format) -> Result<Dataset, DatasetError> {
    match format {
        Format::Csv => parse_csv(source),
        Format::Arff => parse_arff(source),
    }
}

fn data_lines(source: &str) -> impl Iterator<Item = (usize, &str)> {
    source
        .lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.trim()))
        .filter(|(_, l)| !l.is_empty())
}

fn parse_csv(source: &str) -> Result<Dataset, DatasetError> {
    let mut lines = data_lines(source);
    let (_, header) = lines.next().ok_or(DatasetError::Empty)?;
    let names: Vec<String> = split_row(header).into_iter().map(String::from).collect();

    let mut rows: Vec<(usize, Vec<&str>)> = Vec::new();
    for (line, text) in lines {
        let cells = split_row(text);
        if cells.len() != names.len() {
            return Err(DatasetError::Arity {
                line,
                expected: names.len(),
                found: cells.len(),
            });
        }
        rows.push((line, cells));
    }

    let mut schema = Vec::with_capacity(names.len());
    for (col, name) in names.iter().enumerate() {
        let numeric = rows
            .iter()
            .map(|(_, r)| r[col])
            .filter(|c| *c != MISSING)
            .all(|c| parse_real(c).is_some());
        if numeric {
            schema.push(AttributeSpec::numeric(name.clone()));
        } else {
            let mut values: Vec<String> = Vec::new();
            for (_, r) in &rows {
                let c = r[col];
                if c != MISSING && !values.iter().any(|v| v == c) {
                    values.push(c.to_string());
                }
            }
            schema.push(AttributeSpec {
                name: name.clone(),
                kind: AttributeKind::Nominal { values },
                index: 0,
            });
        }
    }

    let instances = rows
        .iter()
        .map(|(line, r)| parse_cells(&schema, r, *line).map(Instance::new))
        .collect::<Result<Vec<_>, _>>()?;
    Dataset::new(schema, instances)
}

fn parse_cells(
    schema: &[AttributeSpec],
    cells: &[&str],
    line: usize,
) -> Result<Vec<Cell>, DatasetError> {
    schema
        .iter()
        .zip(cells)
        .map(|(attr, &token)| {
            if token == MISSING {
                return Ok(Cell::Missing);
            }
            match &attr.kind {
                AttributeKind::Numeric => {
                    parse_real(token)
                        .map(Cell::Numeric)
                        .ok_or_else(|| DatasetError::NumericParse {
                            line,
                            attr: attr.name.clone(),
                            value: token.to_string(),
                        })
                }
                AttributeKind::Nominal { values } => values
                    .iter()
                    .position(|v| v == token)
                    .map(Cell::Nominal)
                    .ok_or_else(|| DatasetError::UndeclaredValue {
                        line,
                        attr: attr.name.clone(),
                        value: token.to_string(),
                    }),
            }
        })
        .collect()
}

/// Splits `@attribute <name> <rest>` where the name may be single-quoted.
fn split_declaration(rest: &str) -> Option<(String, &str)> {
    let rest = rest.trim_start();
    if let Some(stripped) = rest.strip_prefix('\'') {
        let mut name = String::new();
        let mut chars = stripped.char_indices();
        while let Some((i, c)) = chars.next() {
            match c {
                '\\' => {
                    if let Some((_, n)) = chars.next() {
                        name.push(n);
                    }
                }
                '\'' => return Some((name, stripped[i + 1..].trim())),
                _ => name.push(c),
            }
        }
        None
    } else {
        let end = rest.find(char::is_whitespace)?;
        Some((rest[..end].to_string(), rest[end..].trim()))
    }
}

fn parse_arff(source: &str) -> Result<Dataset, DatasetError> {
    let mut schema = Vec::new();
    let mut in_data = false;
    let mut instances = Vec::new();
    let mut saw_anything = false;

    for (line, text) in data_lines(source) {
        if text.starts_with('%') {
            continue;
        }
        saw_anything = true;
        if in_data {
            let mut cells = split_row(text);
            let mut weight = 1.0;
            if cells.len() == schema.len() + 1 {
                let last = cells.pop().unwrap_or_default();
                weight = last
                    .strip_prefix('{')
                    .and_then(|s| s.strip_suffix('}'))
                    .and_then(|w| parse_real(w.trim()))
                    .filter(|w| *w >= 0.0)
                    .ok_or_else(|| DatasetError::Syntax {
                        line,
                        message: format!("bad instance weight {last:?}"),
                    })?;
            }
            if cells.len() != schema.len() {
                return Err(DatasetError::Arity {
                    line,
                    expected: schema.len(),
                    found: cells.len(),
                });
            }
            let values = parse_cells(&schema, &cells, line)?;
            instances.push(Instance::with_weight(values, weight));
            continue;
        }

        let lower = text.to_ascii_lowercase();
        if lower.starts_with("@relation") {
            continue;
        }
        if lower.starts_with("@data") {
            in_data = true;
            continue;
        }
        if let Some(rest) = lower.strip_prefix("@attribute") {
            let offset = text.len() - rest.len();
            let (name, kind) =
                split_declaration(&text[offset..]).ok_or_else(|| DatasetError::Syntax {
                    line,
                    message: "malformed @attribute declaration".into(),
                })?;
            let spec = if let Some(list) = kind.strip_prefix('{') {
                let list = list.strip_suffix('}').ok_or_else(|| DatasetError::Syntax {
                    line,
                    message: "unterminated nominal value list".into(),
                })?;
                let values: Vec<String> = split_row(list).into_iter().map(String::from).collect();
                AttributeSpec {
                    name,
                    kind: AttributeKind::Nominal { values },
                    index: 0,
                }
            } else if ["numeric", "real", "integer"]
                .iter()
                .any(|k| kind.eq_ignore_ascii_case(k))
            {
                AttributeSpec::numeric(name)
            } else {
                return Err(DatasetError::Syntax {
                    line,
                    message: format!("unsupported attribute type {kind:?}"),
                });
            };
            schema.push(spec);
            continue;
        }
        return Err(DatasetError::Syntax {
            line,
            message: format!("unexpected line {text:?}"),
        });
    }

    if !saw_anything {
        return Err(DatasetError::Empty);
    }
    if !in_data {
        return Err(DatasetError::Syntax {
            line: 0,
            message: "missing @data section".into(),
        });
    }
    Dataset::new(schema, instances)
}

/// Designates `name` as the class attribute.
pub fn assign_class(ds: &Dataset, name: &str) -> Result<Dataset, DatasetError> {
    let attr = ds
        .attribute(name)
        .ok_or_else(|| DatasetError::UnknownAttribute(name.to_string()))?;
    if !attr.is_nominal() {
        return Err(DatasetError::NumericClass(name.to_string()));
    }
    let mut out = ds.clone();
    out.class_attr = Some(name.to_string());
    Ok(out)
}

/// Drops the named columns, keeping the remaining order.
pub fn remove_attributes<S: AsRef<str>>(
    ds: &Dataset,
    names: &[S],
) -> Result<Dataset, DatasetError> {
    let mut drop = vec![false; ds.schema.len()];
    for name in names {
        let name = name.as_ref();
        let attr = ds
            .attribute(name)
            .ok_or_else(|| DatasetError::UnknownAttribute(name.to_string()))?;
        if ds.class_attr.as_deref() == Some(name) {
            return Err(DatasetError::RemoveClass(name.to_string()));
        }
        drop[attr.index] = true;
    }

    let schema: Vec<AttributeSpec> = ds
        .schema
        .iter()
        .filter(|a| !drop[a.index])
        .cloned()
        .enumerate()
        .map(|(i, mut a)| {
            a.index = i;
            a
        })
        .collect();
    let instances = ds
        .instances
        .iter()
        .map(|inst| Instance {
            values: inst
                .values
                .iter()
                .zip(&drop)
                .filter(|(_, d)| !**d)
                .map(|(c, _)| *c)
                .collect(),
            weight: inst.weight,
        })
        .collect();
    Ok(Dataset {
        schema,
        instances,
        class_attr: ds.class_attr.clone(),
    })
}

/// Sums instance weights per class value.
pub fn class_frequency(ds: &Dataset) -> Result<ClassFrequency, DatasetError> {
    let ci = ds.class_index().ok_or(DatasetError::NoClass)?;
    let classes = ds.schema[ci].values().to_vec();
    let mut counts = vec![0.0; classes.len()];
    for (i, inst) in ds.instances.iter().enumerate() {
        match inst.values[ci] {
            Cell::Nominal(v) => counts[v] += inst.weight,
            _ => return Err(DatasetError::MissingClass(i)),
        }
    }
    Ok(ClassFrequency::from_counts(classes, counts))
}
