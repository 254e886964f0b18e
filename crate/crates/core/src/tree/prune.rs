//! Pessimistic error pruning.

use statrs::distribution::{ContinuousCDF, Normal};

use super::{DecisionNode, DecisionTree};

/// Extra errors added to `e` observed errors out of `n`, so that `e + extra`
/// is the upper confidence bound (at level `cf`) on the number of errors.
///
/// Uses the exact binomial bound for `e = 0`, linear interpolation for
/// `0 < e < 1`, and the normal approximation with continuity correction
/// otherwise.
pub fn pessimistic_extra_errors(n: f64, e: f64, cf: f64) -> f64 {
    if n <= 0.0 {
        return 0.0;
    }
    if e < 1.0 {
        let base = n * (1.0 - cf.powf(1.0 / n));
        if e == 0.0 {
            return base;
        }
        return base + e * (pessimistic_extra_errors(n, 1.0, cf) - base);
    }
    if e + 0.5 >= n {
        return (n - e).max(0.0);
    }
    let z = upper_quantile(cf);
    let f = (e + 0.5) / n;
    let r = (f + z * z / (2.0 * n) + z * (f / n - f * f / n + z * z / (4.0 * n * n)).sqrt())
        / (1.0 + z * z / n);
    r * n - e
}

fn upper_quantile(cf: f64) -> f64 {
    Normal::standard().inverse_cdf(1.0 - cf)
}

/// Estimated error weight of a leaf covering `n` with `e` misclassified.
pub fn estimated_errors(n: f64, e: f64, cf: f64) -> f64 {
    e + pessimistic_extra_errors(n, e, cf)
}

/// Replaces subtrees by leaves, bottom-up, wherever that does not raise the
/// estimated error by more than 0.1. Subtrees that do not reduce training
/// error at all are collapsed first.
pub fn prune(tree: &DecisionTree, confidence_factor: f64) -> DecisionTree {
    tree.with_root(prune_node(tree.root(), confidence_factor))
}

fn prune_node(node: &DecisionNode, cf: f64) -> DecisionNode {
    let DecisionNode::Internal {
        test,
        children,
        weight,
        class_weights,
    } = node
    else {
        return node.clone();
    };
    let children: Vec<DecisionNode> = children.iter().map(|c| prune_node(c, cf)).collect();
    let pruned = DecisionNode::Internal {
        test: *test,
        children,
        weight: *weight,
        class_weights: class_weights.clone(),
    };
    let leaf = DecisionNode::leaf_from_weights(class_weights.clone());
    let DecisionNode::Leaf { n, e, .. } = leaf else {
        unreachable!()
    };

    let (subtree_training, subtree_estimate) = subtree_errors(&pruned, cf);
    if subtree_training >= e - 1e-3 {
        return leaf;
    }
    if estimated_errors(n, e, cf) <= subtree_estimate + 0.1 {
        return leaf;
    }
    pruned
}

/// (training errors, estimated errors) summed over the leaves of `node`.
fn subtree_errors(node: &DecisionNode, cf: f64) -> (f64, f64) {
    node.leaves()
        .into_iter()
        .fold((0.0, 0.0), |(t, s), leaf| match leaf {
            DecisionNode::Leaf { n, e, .. } => (t + e, s + estimated_errors(*n, *e, cf)),
            DecisionNode::Internal { .. } => (t, s),
        })
}
