//! Recursive tree growth.

use crate::dataset::{AttributeKind, Dataset, DatasetError};

use super::criteria::{
    all_items, class_counts, partition, threshold_on, Items, Partition, TIE_EPS,
};
use super::{argmax, prune, DecisionNode, DecisionTree, InductionParams, SplitTest, TreeError};

struct Candidate {
    test: SplitTest,
    gain: f64,
    split_info: f64,
}

/// Mean gain filter applies within this tolerance.
const MEAN_GAIN_EPS: f64 = 1e-9;

/// Picks the test for a node.
///
/// Every nominal attribute and the best cut of every numeric attribute is a
/// candidate when at least two branches receive `min_cases` weight. Among
/// candidates with positive gain no lower than the candidates' mean gain,
/// the highest gain ratio wins; ties keep the earlier attribute.
pub fn select_split(
    ds: &Dataset,
    params: &InductionParams,
) -> Result<Option<SplitTest>, TreeError> {
    params.validate()?;
    let class = ds.class_index().ok_or(DatasetError::NoClass)?;
    let k = ds.schema()[class].values().len();
    select_on(ds, class, k, &all_items(ds), params)
}

fn select_on(
    ds: &Dataset,
    class: usize,
    n_classes: usize,
    items: &Items,
    params: &InductionParams,
) -> Result<Option<SplitTest>, TreeError> {
    let mut candidates = Vec::new();
    for attr in ds.schema() {
        if attr.index == class {
            continue;
        }
        let test = match attr.kind {
            AttributeKind::Nominal { .. } => SplitTest::Nominal { attr: attr.index },
            AttributeKind::Numeric => {
                match threshold_on(ds, class, n_classes, attr.index, items, params.min_cases)? {
                    Some((threshold, _)) => SplitTest::NumericLe {
                        attr: attr.index,
                        threshold,
                    },
                    None => continue,
                }
            }
        };
        let p: Partition = partition(ds, class, n_classes, &test, items)?;
        if !p.admissible(params.min_cases) {
            continue;
        }
        candidates.push(Candidate {
            test,
            gain: p.gain(),
            split_info: p.split_info(),
        });
    }
    if candidates.is_empty() {
        return Ok(None);
    }

    let mean = candidates.iter().map(|c| c.gain).sum::<f64>() / candidates.len() as f64;
    let mut best: Option<(&Candidate, f64)> = None;
    for c in &candidates {
        if c.gain <= TIE_EPS || c.gain < mean - MEAN_GAIN_EPS || c.split_info <= TIE_EPS {
            continue;
        }
        let ratio = c.gain / c.split_info;
        if best.is_none_or(|(_, r)| ratio > r + TIE_EPS) {
            best = Some((c, ratio));
        }
    }
    Ok(best.map(|(c, _)| c.test))
}

/// Grows a tree from `ds` and prunes it when `params.prune` is set.
///
/// A node becomes a leaf when it holds a single class, when its weight is
/// below `2 * min_cases`, or when no admissible split exists. Instances with
/// a missing test value follow every branch with their weight scaled by the
/// branch's share of the known weight. Branches that receive nothing become
/// empty leaves labeled with the parent's majority class.
pub fn build_tree(ds: &Dataset, params: &InductionParams) -> Result<DecisionTree, TreeError> {
    params.validate()?;
    let class = ds.class_index().ok_or(DatasetError::NoClass)?;
    let k = ds.schema()[class].values().len();
    let items = all_items(ds);
    if items.is_empty() || ds.total_weight() <= 0.0 {
        return Err(TreeError::EmptyDataset);
    }
    let root = grow(ds, class, k, &items, params)?;
    let tree = DecisionTree::new(ds.schema().to_vec(), &ds.schema()[class].name, root)?;
    if params.prune {
        Ok(prune(&tree, params.confidence_factor))
    } else {
        Ok(tree)
    }
}

fn grow(
    ds: &Dataset,
    class: usize,
    n_classes: usize,
    items: &Items,
    params: &InductionParams,
) -> Result<DecisionNode, TreeError> {
    let counts = class_counts(ds, class, n_classes, items)?;
    let total: f64 = counts.iter().sum();
    let occupied = counts.iter().filter(|&&c| c > 0.0).count();
    if occupied <= 1 || total < 2.0 * params.min_cases {
        return Ok(DecisionNode::leaf_from_weights(counts));
    }
    let Some(test) = select_on(ds, class, n_classes, items, params)? else {
        return Ok(DecisionNode::leaf_from_weights(counts));
    };

    let arity = test.arity(ds.schema());
    let mut known: Vec<Vec<(usize, f64)>> = vec![Vec::new(); arity];
    let mut unknown = Vec::new();
    for &(i, w) in items {
        match test.branch(ds.instances()[i].values[test.attr()]) {
            Some(b) => known[b].push((i, w)),
            None => unknown.push((i, w)),
        }
    }
    let branch_weight: Vec<f64> = known
        .iter()
        .map(|b| b.iter().map(|(_, w)| w).sum())
        .collect();
    let known_total: f64 = branch_weight.iter().sum();

    let majority = argmax(&counts);
    let mut children = Vec::with_capacity(arity);
    for (mut subset, bw) in known.into_iter().zip(branch_weight) {
        if bw <= 0.0 {
            children.push(DecisionNode::Leaf {
                class: majority,
                n: 0.0,
                e: 0.0,
                class_weights: vec![0.0; n_classes],
            });
            continue;
        }
        let share = bw / known_total;
        subset.extend(unknown.iter().map(|&(i, w)| (i, w * share)));
        children.push(grow(ds, class, n_classes, &subset, params)?);
    }

    Ok(DecisionNode::Internal {
        test,
        children,
        weight: total,
        class_weights: counts,
    })
}
