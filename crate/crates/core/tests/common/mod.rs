#![allow(dead_code)]

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use c45_advising::dataset::{assign_class, AttributeSpec, Cell, Dataset, Instance};
use c45_advising::tree::{DecisionNode, DecisionTree, SplitTest};

pub const LEARNING: &str = "Learning Status";
pub const DIFF_LONG: &str = "Different between Gained and Registered Credit hour";
pub const REG_LONG: &str = "Total Registered Credit Hour";

pub const ADVISING_RULES_TEXT: &str = "\
Learning Status = In Study
| Different between Gained and Registered Credit hour <= 36: Normal (180.0/19.0)
| Different between Gained and Registered Credit hour > 36
| | Total Registered Credit Hour <= 137: Near To Risk (8.0)
| | Total Registered Credit Hour > 137
| | | Total Registered Credit Hour <= 157: Normal (6.0/1.0)
| | | Total Registered Credit Hour > 157: Near To Risk (5.0)
";

fn internal(test: SplitTest, children: Vec<DecisionNode>) -> DecisionNode {
    let mut cw = vec![0.0; 3];
    for c in &children {
        for (a, b) in cw.iter_mut().zip(c.class_weights()) {
            *a += b;
        }
    }
    DecisionNode::Internal {
        test,
        children,
        weight: cw.iter().sum(),
        class_weights: cw,
    }
}

/// Hand-built tree with the structure and leaf counts of the advising rules.
pub fn advising_rules_tree() -> DecisionTree {
    let schema = vec![
        AttributeSpec::nominal(LEARNING, &["In Study"]),
        AttributeSpec::numeric(DIFF_LONG),
        AttributeSpec::numeric(REG_LONG),
        AttributeSpec::nominal("Ad_STATUS", &["Normal", "Near To Risk", "In Risk"]),
    ];
    let leaf = DecisionNode::leaf_from_weights;
    let reg_high = internal(
        SplitTest::NumericLe {
            attr: 2,
            threshold: 157.0,
        },
        vec![leaf(vec![5.0, 1.0, 0.0]), leaf(vec![0.0, 5.0, 0.0])],
    );
    let reg_low = internal(
        SplitTest::NumericLe {
            attr: 2,
            threshold: 137.0,
        },
        vec![leaf(vec![0.0, 8.0, 0.0]), reg_high],
    );
    let diff = internal(
        SplitTest::NumericLe {
            attr: 1,
            threshold: 36.0,
        },
        vec![leaf(vec![161.0, 19.0, 0.0]), reg_low],
    );
    let root = internal(SplitTest::Nominal { attr: 0 }, vec![diff]);
    DecisionTree::new(schema, "Ad_STATUS", root).expect("fixture is consistent")
}

pub fn rules_instance(diff: f64, reg: Option<f64>) -> Instance {
    Instance::new(vec![
        Cell::Nominal(0),
        Cell::Numeric(diff),
        reg.map_or(Cell::Missing, Cell::Numeric),
        Cell::Missing,
    ])
}

/// Options for [`random_dataset`].
#[derive(Clone, Copy)]
pub struct RandomSpec {
    pub max_instances: usize,
    pub max_attributes: usize,
    pub missing_rate: f64,
    /// Attribute 0 numeric with (almost surely) distinct values.
    pub distinct_numeric_first: bool,
}

/// Random dataset with a 2- or 3-valued class as last column. Numeric
/// attributes draw from a small integer grid so ties are common.
pub fn random_dataset(rng: &mut ChaCha8Rng, spec: RandomSpec) -> Dataset {
    let n = rng.gen_range(2..=spec.max_instances);
    let n_attrs = rng.gen_range(1..=spec.max_attributes);
    let n_classes = rng.gen_range(2..=3);
    let mut schema = Vec::new();
    let mut kinds = Vec::new();
    for a in 0..n_attrs {
        let numeric = (a == 0 && spec.distinct_numeric_first) || rng.gen_bool(0.5);
        if numeric {
            schema.push(AttributeSpec::numeric(format!("x{a}")));
            kinds.push(0);
        } else {
            let arity = rng.gen_range(2..=4);
            let names: Vec<String> = (0..arity).map(|v| format!("v{v}")).collect();
            let refs: Vec<&str> = names.iter().map(String::as_str).collect();
            schema.push(AttributeSpec::nominal(format!("x{a}"), &refs));
            kinds.push(arity);
        }
    }
    let classes = ["A", "B", "C"];
    schema.push(AttributeSpec::nominal("class", &classes[..n_classes]));

    let mut rows = Vec::with_capacity(n);
    for _ in 0..n {
        let mut values = Vec::with_capacity(n_attrs + 1);
        for (a, &arity) in kinds.iter().enumerate() {
            let distinct = a == 0 && spec.distinct_numeric_first;
            if !distinct && rng.gen_bool(spec.missing_rate) {
                values.push(Cell::Missing);
            } else if arity == 0 {
                let x = if distinct {
                    rng.gen_range(0.0..1000.0)
                } else {
                    rng.gen_range(0..8) as f64
                };
                values.push(Cell::Numeric(x));
            } else {
                values.push(Cell::Nominal(rng.gen_range(0..arity)));
            }
        }
        values.push(Cell::Nominal(rng.gen_range(0..n_classes)));
        rows.push(Instance::new(values));
    }
    let ds = Dataset::new(schema, rows).expect("random dataset is valid");
    assign_class(&ds, "class").expect("class is nominal")
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Brute-force split evaluation that reads raw cells and recomputes every
/// quantity from scratch for each candidate.
pub mod oracle {
    use super::*;

    pub fn entropy(counts: &[f64]) -> f64 {
        let total: f64 = counts.iter().sum();
        if total == 0.0 {
            return 0.0;
        }
        let mut h = 0.0;
        for &c in counts {
            if c > 0.0 {
                let p = c / total;
                h -= p * p.ln();
            }
        }
        h / std::f64::consts::LN_2
    }

    fn class_cell(ds: &Dataset, inst: &Instance) -> usize {
        let ci = ds.class_index().expect("class set");
        match inst.values[ci] {
            Cell::Nominal(c) => c,
            _ => panic!("missing class"),
        }
    }

    pub fn class_counts(ds: &Dataset) -> Vec<f64> {
        let k = ds.class_values().expect("class set").len();
        let mut counts = vec![0.0; k];
        for inst in ds.instances() {
            counts[class_cell(ds, inst)] += inst.weight;
        }
        counts
    }

    /// (gain, split info, branch weights) for a routing function.
    pub fn evaluate<F: Fn(&Instance) -> Option<usize>>(
        ds: &Dataset,
        arity: usize,
        route: F,
    ) -> (f64, f64, Vec<f64>) {
        let k = ds.class_values().expect("class set").len();
        let mut branch = vec![vec![0.0; k]; arity];
        let mut known = vec![0.0; k];
        let mut missing = 0.0;
        let mut total = 0.0;
        for inst in ds.instances() {
            let c = class_cell(ds, inst);
            total += inst.weight;
            match route(inst) {
                Some(b) => {
                    branch[b][c] += inst.weight;
                    known[c] += inst.weight;
                }
                None => missing += inst.weight,
            }
        }
        let known_total: f64 = known.iter().sum();
        let weights: Vec<f64> = branch.iter().map(|b| b.iter().sum()).collect();
        let gain = if known_total > 0.0 {
            let mut rest = 0.0;
            for (b, w) in branch.iter().zip(&weights) {
                rest += w / known_total * entropy(b);
            }
            known_total / total * (entropy(&known) - rest)
        } else {
            0.0
        };
        let mut parts = weights.clone();
        parts.push(missing);
        (gain, entropy(&parts), weights)
    }

    pub fn nominal(ds: &Dataset, attr: usize) -> (f64, f64) {
        let arity = ds.schema()[attr].values().len();
        let (g, s, _) = evaluate(ds, arity, |inst| match inst.values[attr] {
            Cell::Nominal(v) => Some(v),
            _ => None,
        });
        (g, s)
    }

    pub fn numeric_at(ds: &Dataset, attr: usize, cut: f64) -> (f64, f64, Vec<f64>) {
        evaluate(ds, 2, |inst| match inst.values[attr] {
            Cell::Numeric(x) => Some(usize::from(x > cut)),
            _ => None,
        })
    }

    /// Scans every midpoint; returns (largest value below the winning
    /// midpoint, gain).
    pub fn best_threshold(ds: &Dataset, attr: usize, min_cases: f64) -> Option<(f64, f64)> {
        let mut values: Vec<f64> = ds
            .instances()
            .iter()
            .filter_map(|i| match i.values[attr] {
                Cell::Numeric(x) => Some(x),
                _ => None,
            })
            .collect();
        values.sort_by(|a, b| a.partial_cmp(b).expect("finite"));
        values.dedup();
        let mut best: Option<(f64, f64)> = None;
        for pair in values.windows(2) {
            let mid = (pair[0] + pair[1]) / 2.0;
            let (gain, _, weights) = numeric_at(ds, attr, mid);
            if weights[0] < min_cases || weights[1] < min_cases {
                continue;
            }
            let reported = values
                .iter()
                .copied()
                .filter(|&v| v <= mid)
                .fold(f64::NEG_INFINITY, f64::max);
            match best {
                Some((_, g)) if gain <= g + 1e-12 => {}
                _ => best = Some((reported, gain)),
            }
        }
        best
    }
}
