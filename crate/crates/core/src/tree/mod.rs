//! C4.5 decision trees: split criteria, recursive growth, pessimistic
//! pruning, classification and rendering.

mod criteria;
mod grow;
mod model;
mod prune;
mod render;

use thiserror::Error;

use crate::dataset::{AttributeSpec, Cell, Dataset, DatasetError, Instance};

pub use criteria::{best_threshold, entropy, gain_ratio, information_gain, split_info};
pub use grow::{build_tree, select_split};
pub use prune::{estimated_errors, pessimistic_extra_errors, prune};
pub use render::{render_graph, render_text};

#[derive(Debug, Error, PartialEq)]
pub enum TreeError {
    #[error(transparent)]
    Dataset(#[from] DatasetError),
    #[error("unknown attribute {0:?}")]
    UnknownAttribute(String),
    #[error("attribute {0:?} cannot be used by this test")]
    WrongAttributeKind(String),
    #[error("split information is zero")]
    ZeroSplitInfo,
    #[error("partition weights sum to zero")]
    EmptyPartition,
    #[error("cannot induce a tree from an empty dataset")]
    EmptyDataset,
    #[error("invalid induction parameters: {0}")]
    InvalidParams(String),
    #[error("instance does not match the tree schema: {0}")]
    SchemaMismatch(String),
    #[error("invalid model: {0}")]
    Model(String),
}

/// Test applied at an internal node. Attributes are schema positions.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SplitTest {
    /// One branch per declared value.
    Nominal { attr: usize },
    /// Two branches: `value <= threshold`, `value > threshold`.
    NumericLe { attr: usize, threshold: f64 },
}

impl SplitTest {
    pub fn attr(&self) -> usize {
        match *self {
            SplitTest::Nominal { attr } | SplitTest::NumericLe { attr, .. } => attr,
        }
    }

    pub fn arity(&self, schema: &[AttributeSpec]) -> usize {
        match *self {
            SplitTest::Nominal { attr } => schema[attr].values().len(),
            SplitTest::NumericLe { .. } => 2,
        }
    }

    /// Branch taken by `cell`; `None` for a missing value.
    pub fn branch(&self, cell: Cell) -> Option<usize> {
        match (*self, cell) {
            (SplitTest::Nominal { .. }, Cell::Nominal(v)) => Some(v),
            (SplitTest::NumericLe { threshold, .. }, Cell::Numeric(x)) => {
                Some(if x <= threshold { 0 } else { 1 })
            }
            _ => None,
        }
    }

    pub(crate) fn check(&self, schema: &[AttributeSpec]) -> Result<(), TreeError> {
        let attr = schema
            .get(self.attr())
            .ok_or_else(|| TreeError::UnknownAttribute(format!("#{}", self.attr())))?;
        let ok = match self {
            SplitTest::Nominal { .. } => attr.is_nominal(),
            SplitTest::NumericLe { .. } => attr.is_numeric(),
        };
        if ok {
            Ok(())
        } else {
            Err(TreeError::WrongAttributeKind(attr.name.clone()))
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum DecisionNode {
    Internal {
        test: SplitTest,
        children: Vec<DecisionNode>,
        /// Training weight reaching this node.
        weight: f64,
        /// Training weight per class at this node.
        class_weights: Vec<f64>,
    },
    Leaf {
        class: usize,
        /// Covered training weight.
        n: f64,
        /// Misclassified training weight.
        e: f64,
        class_weights: Vec<f64>,
    },
}

impl DecisionNode {
    pub fn weight(&self) -> f64 {
        match self {
            DecisionNode::Internal { weight, .. } => *weight,
            DecisionNode::Leaf { n, .. } => *n,
        }
    }

    pub fn class_weights(&self) -> &[f64] {
        match self {
            DecisionNode::Internal { class_weights, .. }
            | DecisionNode::Leaf { class_weights, .. } => class_weights,
        }
    }

    pub fn is_leaf(&self) -> bool {
        matches!(self, DecisionNode::Leaf { .. })
    }

    /// A leaf predicting the majority class of `class_weights`.
    pub fn leaf_from_weights(class_weights: Vec<f64>) -> DecisionNode {
        let class = argmax(&class_weights);
        let n: f64 = class_weights.iter().sum();
        let e = (n - class_weights[class]).max(0.0);
        DecisionNode::Leaf {
            class,
            n,
            e,
            class_weights,
        }
    }

    pub fn leaves(&self) -> Vec<&DecisionNode> {
        let mut out = Vec::new();
        self.walk(&mut |n| {
            if n.is_leaf() {
                out.push(n)
            }
        });
        out
    }

    /// Preorder traversal.
    pub fn walk<'a, F: FnMut(&'a DecisionNode)>(&'a self, f: &mut F) {
        f(self);
        if let DecisionNode::Internal { children, .. } = self {
            for c in children {
                c.walk(f);
            }
        }
    }

    pub fn node_count(&self) -> usize {
        let mut n = 0;
        self.walk(&mut |_| n += 1);
        n
    }

    pub fn depth(&self) -> usize {
        match self {
            DecisionNode::Leaf { .. } => 0,
            DecisionNode::Internal { children, .. } => {
                1 + children.iter().map(|c| c.depth()).max().unwrap_or(0)
            }
        }
    }
}

/// Index of the first maximum, so ties resolve to declaration order.
pub fn argmax(xs: &[f64]) -> usize {
    let mut best = 0;
    for (i, &x) in xs.iter().enumerate() {
        if x > xs[best] {
            best = i;
        }
    }
    best
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InductionParams {
    /// Minimum weight a branch must receive for a split to be admissible.
    pub min_cases: f64,
    /// Confidence level for pessimistic pruning.
    pub confidence_factor: f64,
    pub prune: bool,
}

impl Default for InductionParams {
    fn default() -> Self {
        Self {
            min_cases: 2.0,
            confidence_factor: 0.25,
            prune: true,
        }
    }
}

impl InductionParams {
    pub fn validate(&self) -> Result<(), TreeError> {
        if !(self.min_cases >= 1.0 && self.min_cases.is_finite()) {
            return Err(TreeError::InvalidParams(format!(
                "min cases must be at least 1, got {}",
                self.min_cases
            )));
        }
        if !(self.confidence_factor > 0.0 && self.confidence_factor < 1.0) {
            return Err(TreeError::InvalidParams(format!(
                "confidence factor must lie in (0, 1), got {}",
                self.confidence_factor
            )));
        }
        Ok(())
    }
}

/// Result of routing one instance through a tree.
#[derive(Debug, Clone, PartialEq)]
pub struct Classification {
    pub class: usize,
    /// Class probabilities in declaration order; sums to one.
    pub distribution: Vec<f64>,
}

/// An induced tree together with the schema it was trained on.
#[derive(Debug, Clone, PartialEq)]
pub struct DecisionTree {
    schema: Vec<AttributeSpec>,
    class_index: usize,
    root: DecisionNode,
}

impl DecisionTree {
    /// Wraps a hand-built or deserialized root after checking that every
    /// test fits the schema and every node carries one weight per class.
    pub fn new(
        schema: Vec<AttributeSpec>,
        class_attr: &str,
        root: DecisionNode,
    ) -> Result<Self, TreeError> {
        let ds = Dataset::new(schema, Vec::new())?;
        let ds = crate::dataset::assign_class(&ds, class_attr)?;
        let class_index = ds.class_index().unwrap_or_default();
        let schema = ds.schema().to_vec();
        let n_classes = schema[class_index].values().len();
        check_node(&schema, class_index, n_classes, &root)?;
        Ok(Self {
            schema,
            class_index,
            root,
        })
    }

    pub fn schema(&self) -> &[AttributeSpec] {
        &self.schema
    }

    pub fn root(&self) -> &DecisionNode {
        &self.root
    }

    pub fn class_index(&self) -> usize {
        self.class_index
    }

    pub fn class_attr(&self) -> &str {
        &self.schema[self.class_index].name
    }

    pub fn class_values(&self) -> &[String] {
        self.schema[self.class_index].values()
    }

    pub fn class_name(&self, class: usize) -> &str {
        &self.class_values()[class]
    }

    pub(crate) fn with_root(&self, root: DecisionNode) -> Self {
        Self {
            schema: self.schema.clone(),
            class_index: self.class_index,
            root,
        }
    }

    /// Routes `inst` down the tree. A missing test value sends the instance
    /// down every branch, mixing the results by each branch's share of the
    /// training weight.
    pub fn classify(&self, inst: &Instance) -> Result<Classification, TreeError> {
        self.check_instance(inst)?;
        let distribution = self.distribution(&self.root, inst, None);
        Ok(Classification {
            class: argmax(&distribution),
            distribution,
        })
    }

    fn distribution(
        &self,
        node: &DecisionNode,
        inst: &Instance,
        parent: Option<&DecisionNode>,
    ) -> Vec<f64> {
        match node {
            DecisionNode::Leaf {
                class_weights, n, ..
            } => {
                if *n > 0.0 {
                    class_weights.iter().map(|w| w / n).collect()
                } else if let Some(p) = parent {
                    let total = p.weight();
                    p.class_weights().iter().map(|w| w / total).collect()
                } else {
                    // A root leaf without training weight still predicts its class.
                    let mut d = vec![0.0; class_weights.len()];
                    if let DecisionNode::Leaf { class, .. } = node {
                        d[*class] = 1.0;
                    }
                    d
                }
            }
            DecisionNode::Internal {
                test,
                children,
                weight,
                ..
            } => match test.branch(inst.values[test.attr()]) {
                Some(b) => self.distribution(&children[b], inst, Some(node)),
                None => {
                    let mut mixed = vec![0.0; self.class_values().len()];
                    for child in children {
                        let share = child.weight() / weight;
                        if share > 0.0 {
                            let d = self.distribution(child, inst, Some(node));
                            for (m, x) in mixed.iter_mut().zip(d) {
                                *m += share * x;
                            }
                        }
                    }
                    mixed
                }
            },
        }
    }

    fn check_instance(&self, inst: &Instance) -> Result<(), TreeError> {
        if inst.values.len() != self.schema.len() {
            return Err(TreeError::SchemaMismatch(format!(
                "{} cells for {} attributes",
                inst.values.len(),
                self.schema.len()
            )));
        }
        for (attr, cell) in self.schema.iter().zip(&inst.values) {
            let fits = match cell {
                Cell::Missing => true,
                Cell::Numeric(_) => attr.is_numeric(),
                Cell::Nominal(v) => *v < attr.values().len(),
            };
            if !fits {
                return Err(TreeError::SchemaMismatch(format!(
                    "cell {cell:?} for attribute {}",
                    attr.name
                )));
            }
        }
        Ok(())
    }
}

fn check_node(
    schema: &[AttributeSpec],
    class_index: usize,
    n_classes: usize,
    node: &DecisionNode,
) -> Result<(), TreeError> {
    if node.class_weights().len() != n_classes {
        return Err(TreeError::Model(format!(
            "node carries {} class weights, expected {n_classes}",
            node.class_weights().len()
        )));
    }
    match node {
        DecisionNode::Leaf { class, n, e, .. } => {
            if *class >= n_classes {
                return Err(TreeError::Model(format!(
                    "leaf class #{class} out of range"
                )));
            }
            if !(*n >= 0.0 && *e >= 0.0 && *e <= *n + 1e-9) {
                return Err(TreeError::Model(format!(
                    "leaf counts ({n}/{e}) are inconsistent"
                )));
            }
        }
        DecisionNode::Internal { test, children, .. } => {
            test.check(schema)?;
            if test.attr() == class_index {
                return Err(TreeError::Model("a test uses the class attribute".into()));
            }
            if children.len() != test.arity(schema) {
                return Err(TreeError::Model(format!(
                    "test on {} has {} children, expected {}",
                    schema[test.attr()].name,
                    children.len(),
                    test.arity(schema)
                )));
            }
            for c in children {
                check_node(schema, class_index, n_classes, c)?;
            }
        }
    }
    Ok(())
}
