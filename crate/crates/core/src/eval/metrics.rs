//! Confusion matrices and classifier metrics.

use serde::Serialize;

use crate::dataset::ClassFrequency;

use super::EvalError;

/// One scored instance. Classes are indices into the evaluation's class order.
#[derive(Debug, Clone, PartialEq)]
pub struct Prediction {
    pub actual: usize,
    pub predicted: usize,
    /// Probability per class; sums to one.
    pub distribution: Vec<f64>,
    pub weight: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConfusionMatrix {
    pub classes: Vec<String>,
    /// `cells[i][j]`: weight of true class `i` predicted as `j`.
    pub cells: Vec<Vec<f64>>,
}

impl ConfusionMatrix {
    pub fn total(&self) -> f64 {
        self.cells.iter().flatten().sum()
    }

    pub fn trace(&self) -> f64 {
        (0..self.cells.len()).map(|i| self.cells[i][i]).sum()
    }

    /// True support of class `i`.
    pub fn row_sum(&self, i: usize) -> f64 {
        self.cells[i].iter().sum()
    }

    pub fn col_sum(&self, j: usize) -> f64 {
        self.cells.iter().map(|r| r[j]).sum()
    }
}

pub fn confusion_matrix(
    preds: &[Prediction],
    classes: &[String],
) -> Result<ConfusionMatrix, EvalError> {
    let k = classes.len();
    let mut cells = vec![vec![0.0; k]; k];
    for p in preds {
        if p.actual >= k {
            return Err(EvalError::UnknownClass(p.actual));
        }
        if p.predicted >= k {
            return Err(EvalError::UnknownClass(p.predicted));
        }
        cells[p.actual][p.predicted] += p.weight;
    }
    Ok(ConfusionMatrix {
        classes: classes.to_vec(),
        cells,
    })
}

/// Percentage of correctly classified weight.
pub fn accuracy(cm: &ConfusionMatrix) -> Result<f64, EvalError> {
    let total = cm.total();
    if total <= 0.0 {
        return Err(EvalError::Empty);
    }
    Ok(100.0 * cm.trace() / total)
}

/// Cohen's kappa; zero when chance agreement is already perfect.
pub fn kappa(cm: &ConfusionMatrix) -> Result<f64, EvalError> {
    let total = cm.total();
    if total <= 0.0 {
        return Err(EvalError::Empty);
    }
    // (p_o - p_e) / (1 - p_e), scaled by total^2 to keep integer counts exact.
    let chance: f64 = (0..cm.classes.len())
        .map(|i| cm.row_sum(i) * cm.col_sum(i))
        .sum();
    let denom = total * total - chance;
    if denom <= 0.0 {
        return Ok(0.0);
    }
    Ok((cm.trace() * total - chance) / denom)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ErrorMetrics {
    pub mae: f64,
    pub rmse: f64,
    /// `None` when the prior baseline makes no error.
    pub rae_pct: Option<f64>,
    pub rrse_pct: Option<f64>,
}

/// Running sums for the probability-based error measures, allowing each
/// batch of predictions its own prior baseline.
#[derive(Debug, Clone, Default)]
pub struct ErrorAccumulator {
    abs: f64,
    sq: f64,
    prior_abs: f64,
    prior_sq: f64,
    weight: f64,
    classes: usize,
}

impl ErrorAccumulator {
    pub fn add(&mut self, preds: &[Prediction], prior: &ClassFrequency) -> Result<(), EvalError> {
        if prior.total <= 0.0 {
            return Err(EvalError::EmptyPrior);
        }
        let baseline = prior.proportions();
        self.classes = baseline.len();
        for p in preds {
            if p.distribution.len() != baseline.len() {
                return Err(EvalError::DistributionLength {
                    expected: baseline.len(),
                    found: p.distribution.len(),
                });
            }
            for (j, (&q, &b)) in p.distribution.iter().zip(&baseline).enumerate() {
                let a = if j == p.actual { 1.0 } else { 0.0 };
                self.abs += p.weight * (q - a).abs();
                self.sq += p.weight * (q - a).powi(2);
                self.prior_abs += p.weight * (b - a).abs();
                self.prior_sq += p.weight * (b - a).powi(2);
            }
            self.weight += p.weight;
        }
        Ok(())
    }

    pub fn finish(&self) -> Result<ErrorMetrics, EvalError> {
        if self.weight <= 0.0 || self.classes == 0 {
            return Err(EvalError::Empty);
        }
        let cells = self.weight * self.classes as f64;
        let ratio = |ours: f64, base: f64| (base > 0.0).then(|| 100.0 * ours / base);
        Ok(ErrorMetrics {
            mae: self.abs / cells,
            rmse: (self.sq / cells).sqrt(),
            rae_pct: ratio(self.abs, self.prior_abs),
            rrse_pct: ratio(self.sq.sqrt(), self.prior_sq.sqrt()),
        })
    }
}

/// Mean absolute and root mean squared error of the predicted class
/// probabilities against 0/1 indicators, and both relative to a predictor
/// that always outputs the training prior.
pub fn error_metrics(
    preds: &[Prediction],
    prior: &ClassFrequency,
) -> Result<ErrorMetrics, EvalError> {
    let mut acc = ErrorAccumulator::default();
    acc.add(preds, prior)?;
    acc.finish()
}

/// One-vs-rest area under the ROC curve for class `positive`, via the
/// weighted Mann-Whitney statistic with tied scores counting one half.
/// `None` when either side has no weight.
pub fn roc_area(preds: &[Prediction], positive: usize) -> Option<f64> {
    let mut scored: Vec<(f64, bool, f64)> = preds
        .iter()
        .map(|p| {
            let s = p.distribution.get(positive).copied().unwrap_or(0.0);
            (s, p.actual == positive, p.weight)
        })
        .collect();
    scored.sort_by(|a, b| a.0.total_cmp(&b.0));

    let mut pos_total = 0.0;
    let mut neg_total = 0.0;
    let mut concordant = 0.0;
    let mut i = 0;
    while i < scored.len() {
        let mut j = i;
        let (mut pos, mut neg) = (0.0, 0.0);
        while j < scored.len() && scored[j].0 == scored[i].0 {
            if scored[j].1 {
                pos += scored[j].2;
            } else {
                neg += scored[j].2;
            }
            j += 1;
        }
        concordant += pos * (neg_total + 0.5 * neg);
        pos_total += pos;
        neg_total += neg;
        i = j;
    }
    if pos_total <= 0.0 || neg_total <= 0.0 {
        return None;
    }
    Some(concordant / (pos_total * neg_total))
}

/// Table row for one class, or the weighted average over classes.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ClassMetrics {
    pub class: String,
    pub support: f64,
    pub tp_rate: f64,
    pub fp_rate: f64,
    pub precision: f64,
    pub recall: f64,
    pub f_measure: f64,
    pub roc_area: Option<f64>,
    /// Metrics whose denominator was zero and were reported as 0.
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub undefined: Vec<String>,
}

fn ratio_or_zero(num: f64, den: f64, name: &str, undefined: &mut Vec<String>) -> f64 {
    if den > 0.0 {
        num / den
    } else {
        undefined.push(name.to_string());
        0.0
    }
}

/// Per-class rows plus the support-weighted average row.
pub fn per_class_metrics(
    cm: &ConfusionMatrix,
    preds: &[Prediction],
) -> Result<(Vec<ClassMetrics>, ClassMetrics), EvalError> {
    let total = cm.total();
    if total <= 0.0 {
        return Err(EvalError::Empty);
    }
    let rows: Vec<ClassMetrics> = (0..cm.classes.len())
        .map(|c| {
            let mut undefined = Vec::new();
            let tp = cm.cells[c][c];
            let support = cm.row_sum(c);
            let predicted = cm.col_sum(c);
            let fp = predicted - tp;
            let negatives = total - support;
            let recall = ratio_or_zero(tp, support, "tp_rate", &mut undefined);
            let fp_rate = ratio_or_zero(fp, negatives, "fp_rate", &mut undefined);
            let precision = ratio_or_zero(tp, predicted, "precision", &mut undefined);
            let f_measure = if precision + recall > 0.0 {
                2.0 * precision * recall / (precision + recall)
            } else {
                undefined.push("f_measure".into());
                0.0
            };
            let roc = roc_area(preds, c);
            if roc.is_none() {
                undefined.push("roc_area".into());
            }
            ClassMetrics {
                class: cm.classes[c].clone(),
                support,
                tp_rate: recall,
                fp_rate,
                precision,
                recall,
                f_measure,
                roc_area: roc,
                undefined,
            }
        })
        .collect();
    let avg = weighted_average(&rows);
    Ok((rows, avg))
}

/// Support-weighted mean of each column; classes without a ROC area are
/// left out of the ROC average.
pub fn weighted_average(rows: &[ClassMetrics]) -> ClassMetrics {
    let support: f64 = rows.iter().map(|r| r.support).sum();
    let mean = |f: fn(&ClassMetrics) -> f64| {
        if support > 0.0 {
            rows.iter().map(|r| r.support * f(r)).sum::<f64>() / support
        } else {
            0.0
        }
    };
    let roc_support: f64 = rows
        .iter()
        .filter(|r| r.roc_area.is_some())
        .map(|r| r.support)
        .sum();
    let roc_area = (roc_support > 0.0).then(|| {
        rows.iter()
            .filter_map(|r| r.roc_area.map(|a| r.support * a))
            .sum::<f64>()
            / roc_support
    });
    ClassMetrics {
        class: "Weighted Avg.".into(),
        support,
        tp_rate: mean(|r| r.tp_rate),
        fp_rate: mean(|r| r.fp_rate),
        precision: mean(|r| r.precision),
        recall: mean(|r| r.recall),
        f_measure: mean(|r| r.f_measure),
        roc_area,
        undefined: Vec::new(),
    }
}
