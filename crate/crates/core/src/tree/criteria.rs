//! Entropy, information gain, split information and gain ratio.

use crate::dataset::{class_frequency, Cell, ClassFrequency, Dataset, DatasetError};

use super::{InductionParams, SplitTest, TreeError};

/// Gains closer than this are treated as equal, so ties resolve by order.
pub(crate) const TIE_EPS: f64 = 1e-12;

/// Class entropy in bits; zero for an empty frequency table.
pub fn entropy(freq: &ClassFrequency) -> f64 {
    info(&freq.counts)
}

pub(crate) fn info(counts: &[f64]) -> f64 {
    let total: f64 = counts.iter().sum();
    if total <= 0.0 {
        return 0.0;
    }
    counts
        .iter()
        .filter(|&&c| c > 0.0)
        .map(|&c| {
            let p = c / total;
            -p * p.log2()
        })
        .sum()
}

/// Entropy of the partition sizes themselves.
pub fn split_info(weights: &[f64]) -> Result<f64, TreeError> {
    let total: f64 = weights.iter().sum();
    if total.is_nan() || total <= 0.0 {
        return Err(TreeError::EmptyPartition);
    }
    Ok(info(weights))
}

/// Working view used during induction: instance index plus its current
/// (possibly fractional) weight.
pub(crate) type Items = [(usize, f64)];

pub(crate) fn all_items(ds: &Dataset) -> Vec<(usize, f64)> {
    ds.instances()
        .iter()
        .enumerate()
        .map(|(i, inst)| (i, inst.weight))
        .collect()
}

pub(crate) fn class_counts(
    ds: &Dataset,
    class: usize,
    n_classes: usize,
    items: &Items,
) -> Result<Vec<f64>, DatasetError> {
    let mut counts = vec![0.0; n_classes];
    for &(i, w) in items {
        match ds.instances()[i].values[class] {
            Cell::Nominal(c) => counts[c] += w,
            _ => return Err(DatasetError::MissingClass(i)),
        }
    }
    Ok(counts)
}

/// Class weights per branch, plus the class weights of instances whose test
/// value is missing.
#[derive(Debug, Clone)]
pub(crate) struct Partition {
    pub branches: Vec<Vec<f64>>,
    pub missing: Vec<f64>,
}

impl Partition {
    pub fn branch_weights(&self) -> Vec<f64> {
        self.branches.iter().map(|b| b.iter().sum()).collect()
    }

    pub fn missing_weight(&self) -> f64 {
        self.missing.iter().sum()
    }

    /// Gain over known values, scaled by the known fraction of the weight.
    pub fn gain(&self) -> f64 {
        let n_classes = self.missing.len();
        let mut known_counts = vec![0.0; n_classes];
        for b in &self.branches {
            for (k, x) in known_counts.iter_mut().zip(b) {
                *k += x;
            }
        }
        let known: f64 = known_counts.iter().sum();
        let total = known + self.missing_weight();
        if known <= 0.0 {
            return 0.0;
        }
        let remainder: f64 = self
            .branches
            .iter()
            .map(|b| {
                let w: f64 = b.iter().sum();
                if w > 0.0 {
                    w / known * info(b)
                } else {
                    0.0
                }
            })
            .sum();
        (known / total) * (info(&known_counts) - remainder)
    }

    /// Split information over the branches, with missing values as one more part.
    pub fn split_info(&self) -> f64 {
        let mut parts = self.branch_weights();
        parts.push(self.missing_weight());
        info(&parts)
    }

    /// At least two branches carry `min_cases` weight.
    pub fn admissible(&self, min_cases: f64) -> bool {
        self.branch_weights()
            .iter()
            .filter(|&&w| w >= min_cases)
            .count()
            >= 2
    }
}

pub(crate) fn partition(
    ds: &Dataset,
    class: usize,
    n_classes: usize,
    test: &SplitTest,
    items: &Items,
) -> Result<Partition, DatasetError> {
    let arity = test.arity(ds.schema());
    let mut branches = vec![vec![0.0; n_classes]; arity];
    let mut missing = vec![0.0; n_classes];
    for &(i, w) in items {
        let values = &ds.instances()[i].values;
        let c = match values[class] {
            Cell::Nominal(c) => c,
            _ => return Err(DatasetError::MissingClass(i)),
        };
        match test.branch(values[test.attr()]) {
            Some(b) => branches[b][c] += w,
            None => missing[c] += w,
        }
    }
    Ok(Partition { branches, missing })
}

fn prepared(ds: &Dataset, test: &SplitTest) -> Result<(usize, usize), TreeError> {
    let class = ds.class_index().ok_or(DatasetError::NoClass)?;
    test.check(ds.schema())?;
    if test.attr() == class {
        return Err(TreeError::WrongAttributeKind(
            ds.schema()[class].name.clone(),
        ));
    }
    Ok((class, ds.schema()[class].values().len()))
}

/// Information gain of `test` on `ds`. Instances with a missing test value
/// are left out of both entropy terms and the gain is scaled by the
/// fraction of weight whose value is known.
pub fn information_gain(ds: &Dataset, test: &SplitTest) -> Result<f64, TreeError> {
    let (class, k) = prepared(ds, test)?;
    class_frequency(ds)?;
    let p = partition(ds, class, k, test, &all_items(ds))?;
    Ok(p.gain())
}

/// Gain divided by split information; fails when the split information is zero.
pub fn gain_ratio(ds: &Dataset, test: &SplitTest) -> Result<f64, TreeError> {
    let (class, k) = prepared(ds, test)?;
    class_frequency(ds)?;
    let p = partition(ds, class, k, test, &all_items(ds))?;
    let si = p.split_info();
    if si <= TIE_EPS {
        return Err(TreeError::ZeroSplitInfo);
    }
    Ok(p.gain() / si)
}

/// Best binary cut of a numeric attribute.
///
/// Every midpoint between consecutive distinct known values is a candidate;
/// a candidate is admissible when both sides carry at least
/// `params.min_cases` weight. Returns the threshold as the largest observed
/// value not above the winning midpoint, with its gain. Equal gains keep the
/// smaller threshold.
pub fn best_threshold(
    ds: &Dataset,
    attr: &str,
    params: &InductionParams,
) -> Result<Option<(f64, f64)>, TreeError> {
    let spec = ds
        .attribute(attr)
        .ok_or_else(|| TreeError::UnknownAttribute(attr.to_string()))?;
    if !spec.is_numeric() {
        return Err(TreeError::WrongAttributeKind(attr.to_string()));
    }
    let class = ds.class_index().ok_or(DatasetError::NoClass)?;
    let k = ds.schema()[class].values().len();
    threshold_on(ds, class, k, spec.index, &all_items(ds), params.min_cases)
}

pub(crate) fn threshold_on(
    ds: &Dataset,
    class: usize,
    n_classes: usize,
    attr: usize,
    items: &Items,
    min_cases: f64,
) -> Result<Option<(f64, f64)>, TreeError> {
    let mut known: Vec<(f64, usize, f64)> = Vec::with_capacity(items.len());
    let mut missing = vec![0.0; n_classes];
    for &(i, w) in items {
        let values = &ds.instances()[i].values;
        let c = match values[class] {
            Cell::Nominal(c) => c,
            _ => return Err(DatasetError::MissingClass(i).into()),
        };
        match values[attr] {
            Cell::Numeric(x) => known.push((x, c, w)),
            _ => missing[c] += w,
        }
    }
    known.sort_by(|a, b| a.0.total_cmp(&b.0));

    let mut right = vec![0.0; n_classes];
    for &(_, c, w) in &known {
        right[c] += w;
    }
    let mut left = vec![0.0; n_classes];
    let mut best: Option<(f64, f64)> = None;
    for idx in 0..known.len().saturating_sub(1) {
        let (x, c, w) = known[idx];
        left[c] += w;
        right[c] -= w;
        let next = known[idx + 1].0;
        if next <= x {
            continue;
        }
        let p = Partition {
            branches: vec![left.clone(), right.iter().map(|r| r.max(0.0)).collect()],
            missing: missing.clone(),
        };
        let bw = p.branch_weights();
        if bw[0] < min_cases || bw[1] < min_cases {
            continue;
        }
        let gain = p.gain();
        if best.is_none_or(|(_, g)| gain > g + TIE_EPS) {
            best = Some((x, gain));
        }
    }
    Ok(best)
}
