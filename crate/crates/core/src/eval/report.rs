use std::fmt::{self, Write as _};

use super::{ClassMetrics, EvalReport};

const OVERALL: [&str; 6] = [
    "Correctly Classified Instances %",
    "Kappa statistic",
    "Mean absolute error",
    "Root mean squared error",
    "Relative absolute error %",
    "Root relative squared error %",
];

const DETAIL: [&str; 7] = [
    "TP Rate",
    "FP Rate",
    "Precision",
    "Recall",
    "F-Measure",
    "ROC Area",
    "Class",
];

fn pct(x: Option<f64>, decimals: usize) -> String {
    x.map_or_else(|| "?".to_string(), |v| format!("{v:.decimals$} %"))
}

fn detail_row(out: &mut String, row: &ClassMetrics) {
    let roc = row
        .roc_area
        .map_or_else(|| "?".to_string(), |a| format!("{a:.3}"));
    let _ = writeln!(
        out,
        "{:>10} {:>10} {:>10} {:>10} {:>10} {:>10}   {}",
        format!("{:.3}", row.tp_rate),
        format!("{:.3}", row.fp_rate),
        format!("{:.3}", row.precision),
        format!("{:.3}", row.recall),
        format!("{:.3}", row.f_measure),
        roc,
        row.class
    );
}

impl fmt::Display for EvalReport {
    /// Overall measures, the per-class table and the confusion matrix as
    /// fixed-width text.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut out = String::new();
        let _ = writeln!(
            out,
            "=== Performance measures ({} instances) ===",
            self.instances
        );
        let values = [
            format!("{:.3} %", self.accuracy_pct),
            format!("{:.4}", self.kappa),
            format!("{:.4}", self.mae),
            format!("{:.4}", self.rmse),
            pct(self.rae_pct, 2),
            pct(self.rrse_pct, 4),
        ];
        for (name, value) in OVERALL.iter().zip(&values) {
            let _ = writeln!(out, "{name:<34}{value:>14}");
        }

        out.push_str("\n=== Detailed accuracy by class ===\n");
        let _ = writeln!(
            out,
            "{:>10} {:>10} {:>10} {:>10} {:>10} {:>10}   {}",
            DETAIL[0], DETAIL[1], DETAIL[2], DETAIL[3], DETAIL[4], DETAIL[5], DETAIL[6]
        );
        for row in &self.per_class {
            detail_row(&mut out, row);
        }
        detail_row(&mut out, &self.weighted_avg);

        out.push_str("\n=== Confusion matrix ===\n");
        let k = self.confusion.classes.len();
        let width = self
            .confusion
            .cells
            .iter()
            .flatten()
            .map(|c| format!("{c}").len())
            .max()
            .unwrap_or(1)
            .max(3);
        let letters: Vec<String> = (0..k).map(column_label).collect();
        for l in &letters {
            let _ = write!(out, " {l:>width$}");
        }
        out.push_str("   <-- classified as\n");
        for (i, row) in self.confusion.cells.iter().enumerate() {
            for c in row {
                let _ = write!(out, " {:>width$}", format!("{c}"));
            }
            let _ = writeln!(out, " | {} = {}", letters[i], self.confusion.classes[i]);
        }
        f.write_str(&out)
    }
}

/// a, b, ..., z, aa, ab, ...
fn column_label(i: usize) -> String {
    let mut n = i;
    let mut s = Vec::new();
    loop {
        s.push(b'a' + (n % 26) as u8);
        if n < 26 {
            break;
        }
        n = n / 26 - 1;
    }
    s.reverse();
    String::from_utf8(s).unwrap_or_default()
}
