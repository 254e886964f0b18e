//! Batch command front end: load, drop attributes, assign class, then
//! train, cross-validate, classify, render or generate data.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use clap::{Parser, ValueEnum};
use thiserror::Error;

use crate::dataset::{
    assign_class, parse_dataset, remove_attributes, AttributeKind, Cell, Dataset, Format, Instance,
};
use crate::eval::cross_validate;
use crate::features::{
    advising_table, course_features, generate_synthetic, parse_course_records, AD_STATUS,
    ELIMINATED,
};
use crate::tree::{build_tree, render_graph, render_text, DecisionTree, InductionParams};

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Command {
    /// Induce a tree and write it as JSON.
    Train,
    /// Stratified cross-validation report.
    Evaluate,
    /// Predict every row of a data file with a saved model.
    Classify,
    /// Per-student features from raw course records.
    Features,
    /// Synthetic advising records.
    Generate,
    /// Print a saved model as text or DOT.
    Render,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum OutputFormat {
    Text,
    Json,
    Dot,
}

#[derive(Debug, Clone, Parser)]
#[command(
    name = "c45-advising",
    version,
    about = "C4.5 decision trees for academic advising"
)]
pub struct RunConfig {
    #[arg(value_enum)]
    pub command: Command,
    /// Input data (.arff for the attribute-declared format, CSV otherwise).
    #[arg(long)]
    pub data: Option<PathBuf>,
    #[arg(long)]
    pub model: Option<PathBuf>,
    /// Output file; standard output when absent.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Class attribute [default: Ad_STATUS].
    #[arg(long = "class")]
    pub class_attr: Option<String>,
    /// Comma-separated attributes to remove [default: SId,GEN,Sem_GPA,CUM_GPA when present].
    #[arg(long)]
    pub drop: Option<String>,
    /// Cross-validation folds [default: 10].
    #[arg(long)]
    pub folds: Option<usize>,
    /// Seed for fold assignment or data generation [default: 1].
    #[arg(long)]
    pub seed: Option<u64>,
    /// Minimum branch weight [default: 2].
    #[arg(long = "min-cases")]
    pub min_cases: Option<f64>,
    /// Pruning confidence factor [default: 0.25].
    #[arg(long)]
    pub cf: Option<f64>,
    #[arg(long = "no-prune")]
    pub no_prune: bool,
    /// Label noise rate for generate [default: 0].
    #[arg(long)]
    pub noise: Option<f64>,
    /// Number of records for generate.
    #[arg(long)]
    pub n: Option<usize>,
    #[arg(long, value_enum)]
    pub format: Option<OutputFormat>,
}

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("{0}")]
    Data(String),
    #[error("{0}")]
    Model(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => 2,
            CliError::Data(_) => 3,
            CliError::Model(_) => 4,
        }
    }
}

fn usage(msg: impl Into<String>) -> CliError {
    CliError::Usage(msg.into())
}

fn data_err(e: impl std::fmt::Display) -> CliError {
    CliError::Data(e.to_string())
}

impl RunConfig {
    fn flags_given(&self) -> Vec<&'static str> {
        let mut given = Vec::new();
        let mut note = |set: bool, name: &'static str| {
            if set {
                given.push(name)
            }
        };
        note(self.data.is_some(), "--data");
        note(self.model.is_some(), "--model");
        note(self.out.is_some(), "--out");
        note(self.class_attr.is_some(), "--class");
        note(self.drop.is_some(), "--drop");
        note(self.folds.is_some(), "--folds");
        note(self.seed.is_some(), "--seed");
        note(self.min_cases.is_some(), "--min-cases");
        note(self.cf.is_some(), "--cf");
        note(self.no_prune, "--no-prune");
        note(self.noise.is_some(), "--noise");
        note(self.n.is_some(), "--n");
        note(self.format.is_some(), "--format");
        given
    }

    fn allowed(&self) -> &'static [&'static str] {
        const INDUCTION: [&str; 7] = [
            "--data",
            "--out",
            "--class",
            "--drop",
            "--min-cases",
            "--cf",
            "--no-prune",
        ];
        match self.command {
            Command::Train => &INDUCTION,
            Command::Evaluate => &[
                "--data",
                "--out",
                "--class",
                "--drop",
                "--min-cases",
                "--cf",
                "--no-prune",
                "--folds",
                "--seed",
                "--format",
            ],
            Command::Classify => &["--data", "--model", "--out"],
            Command::Features => &["--data", "--out"],
            Command::Generate => &["--n", "--seed", "--noise", "--out"],
            Command::Render => &["--model", "--format", "--out"],
        }
    }

    /// Checks flag combinations and required flags without touching files.
    pub fn validate(&self) -> Result<(), CliError> {
        let name = format!("{:?}", self.command).to_lowercase();
        for flag in self.flags_given() {
            if !self.allowed().contains(&flag) {
                return Err(usage(format!("{flag} is not valid for {name}")));
            }
        }
        let require = |set: bool, flag: &str| {
            if set {
                Ok(())
            } else {
                Err(usage(format!("{name} requires {flag}")))
            }
        };
        match self.command {
            Command::Train | Command::Evaluate | Command::Features => {
                require(self.data.is_some(), "--data")?
            }
            Command::Classify => {
                require(self.data.is_some(), "--data")?;
                require(self.model.is_some(), "--model")?;
            }
            Command::Render => require(self.model.is_some(), "--model")?,
            Command::Generate => require(self.n.is_some(), "--n")?,
        }
        match (self.command, self.format) {
            (_, None) => {}
            (Command::Evaluate, Some(OutputFormat::Text | OutputFormat::Json)) => {}
            (Command::Render, Some(OutputFormat::Text | OutputFormat::Dot)) => {}
            (_, Some(f)) => {
                return Err(usage(
                    format!("--format {f:?} is not valid for {name}").to_lowercase(),
                ))
            }
        }
        if let Some(k) = self.folds {
            if k < 2 {
                return Err(usage("--folds must be at least 2"));
            }
        }
        if let Some(n) = self.n {
            if n == 0 {
                return Err(usage("--n must be at least 1"));
            }
        }
        if let Some(noise) = self.noise {
            if !(0.0..=1.0).contains(&noise) {
                return Err(usage("--noise must lie in [0, 1]"));
            }
        }
        self.params().validate().map_err(|e| usage(e.to_string()))?;
        Ok(())
    }

    pub fn params(&self) -> InductionParams {
        let defaults = InductionParams::default();
        InductionParams {
            min_cases: self.min_cases.unwrap_or(defaults.min_cases),
            confidence_factor: self.cf.unwrap_or(defaults.confidence_factor),
            prune: !self.no_prune,
        }
    }
}

fn read_text(path: &Path, as_model: bool) -> Result<String, CliError> {
    fs::read_to_string(path).map_err(|e| {
        let msg = format!("cannot read {}: {e}", path.display());
        if as_model {
            CliError::Model(msg)
        } else {
            CliError::Data(msg)
        }
    })
}

/// Loads the data file, removes attributes and assigns the class.
pub fn load_training_data(cfg: &RunConfig) -> Result<Dataset, CliError> {
    let path = cfg
        .data
        .as_deref()
        .ok_or_else(|| usage("--data is required"))?;
    let ds = parse_dataset(&read_text(path, false)?, Format::from_path(path)).map_err(data_err)?;
    let class = cfg.class_attr.as_deref().unwrap_or(AD_STATUS);
    let drop: Vec<String> = match &cfg.drop {
        Some(list) => list
            .split(',')
            .map(str::trim)
            .filter(|s| !s.is_empty())
            .map(String::from)
            .collect(),
        None => ELIMINATED
            .iter()
            .filter(|n| ds.attribute(n).is_some() && **n != class)
            .map(|n| n.to_string())
            .collect(),
    };
    let ds = assign_class(&ds, class).map_err(data_err)?;
    remove_attributes(&ds, &drop).map_err(data_err)
}

fn load_model(path: &Path) -> Result<DecisionTree, CliError> {
    DecisionTree::from_json(&read_text(path, true)?).map_err(|e| CliError::Model(e.to_string()))
}

/// Re-expresses each row of `data` in the model's schema, matching columns
/// by name. The class column may be absent.
fn align_to_model(
    tree: &DecisionTree,
    data: &Dataset,
) -> Result<Vec<(Instance, Option<usize>)>, CliError> {
    let mut columns = Vec::with_capacity(tree.schema().len());
    for attr in tree.schema() {
        let col = data.attribute(&attr.name).map(|a| a.index);
        if col.is_none() && attr.index != tree.class_index() {
            return Err(CliError::Data(format!(
                "data lacks attribute {:?}",
                attr.name
            )));
        }
        columns.push(col);
    }

    let mut rows = Vec::with_capacity(data.len());
    for (r, inst) in data.instances().iter().enumerate() {
        let mut values = Vec::with_capacity(columns.len());
        for (attr, col) in tree.schema().iter().zip(&columns) {
            let Some(col) = *col else {
                values.push(Cell::Missing);
                continue;
            };
            let cell = inst.values[col];
            if cell.is_missing() {
                values.push(Cell::Missing);
                continue;
            }
            let text = data.format_cell(col, cell);
            let converted = match &attr.kind {
                AttributeKind::Numeric => text.parse::<f64>().ok().map(Cell::Numeric),
                AttributeKind::Nominal { .. } => attr.value_index(&text).map(Cell::Nominal),
            };
            values.push(converted.ok_or_else(|| {
                CliError::Data(format!(
                    "row {}: value {text:?} does not fit attribute {:?}",
                    r + 1,
                    attr.name
                ))
            })?);
        }
        let actual = match values[tree.class_index()] {
            Cell::Nominal(c) => Some(c),
            _ => None,
        };
        rows.push((Instance::with_weight(values, inst.weight), actual));
    }
    Ok(rows)
}

fn classify_csv(tree: &DecisionTree, data: &Dataset) -> Result<String, CliError> {
    let rows = align_to_model(tree, data)?;
    let mut out = String::from("instance,actual,predicted");
    for c in tree.class_values() {
        let _ = write!(out, ",{c}");
    }
    out.push('\n');
    for (i, (inst, actual)) in rows.iter().enumerate() {
        let result = tree
            .classify(inst)
            .map_err(|e| CliError::Data(e.to_string()))?;
        let actual = actual.map_or("?", |c| tree.class_name(c));
        let _ = write!(out, "{},{actual},{}", i + 1, tree.class_name(result.class));
        for p in &result.distribution {
            let _ = write!(out, ",{p:.6}");
        }
        out.push('\n');
    }
    Ok(out)
}

/// Runs one command and returns the text destined for `--out` or stdout.
pub fn execute(cfg: &RunConfig) -> Result<String, CliError> {
    cfg.validate()?;
    match cfg.command {
        Command::Train => {
            let ds = load_training_data(cfg)?;
            let tree = build_tree(&ds, &cfg.params()).map_err(data_err)?;
            Ok(tree.to_json())
        }
        Command::Evaluate => {
            let ds = load_training_data(cfg)?;
            let report = cross_validate(
                &ds,
                cfg.folds.unwrap_or(10),
                cfg.seed.unwrap_or(1),
                &cfg.params(),
            )
            .map_err(data_err)?;
            Ok(match cfg.format.unwrap_or(OutputFormat::Text) {
                OutputFormat::Json => report.to_json(),
                _ => report.to_string(),
            })
        }
        Command::Classify => {
            let tree = load_model(cfg.model.as_deref().unwrap_or(Path::new("")))?;
            let path = cfg.data.as_deref().unwrap_or(Path::new(""));
            let data = parse_dataset(&read_text(path, false)?, Format::from_path(path))
                .map_err(data_err)?;
            classify_csv(&tree, &data)
        }
        Command::Features => {
            let path = cfg.data.as_deref().unwrap_or(Path::new(""));
            let rows = parse_course_records(&read_text(path, false)?).map_err(data_err)?;
            Ok(course_features(&rows).map_err(data_err)?.to_csv())
        }
        Command::Generate => {
            let records = generate_synthetic(
                cfg.n.unwrap_or(0),
                cfg.seed.unwrap_or(1),
                cfg.noise.unwrap_or(0.0),
            )
            .map_err(|e| usage(e.to_string()))?;
            Ok(advising_table(&records).map_err(data_err)?.to_csv())
        }
        Command::Render => {
            let tree = load_model(cfg.model.as_deref().unwrap_or(Path::new("")))?;
            Ok(match cfg.format.unwrap_or(OutputFormat::Text) {
                OutputFormat::Dot => render_graph(&tree),
                _ => render_text(&tree),
            })
        }
    }
}

/// Runs a command and delivers its output. Nothing is written when the
/// command fails.
pub fn run(cfg: &RunConfig) -> Result<Option<String>, CliError> {
    let output = execute(cfg)?;
    match &cfg.out {
        Some(path) => {
            fs::write(path, &output)
                .map_err(|e| CliError::Data(format!("cannot write {}: {e}", path.display())))?;
            Ok(None)
        }
        None => Ok(Some(output)),
    }
}
