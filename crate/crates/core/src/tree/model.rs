//! JSON model files.
//!
//! ```json
//! {
//!   "schema": [{"name": "L_STATUS", "kind": "nominal", "values": ["In Study"]}, ...],
//!   "class": "Ad_STATUS",
//!   "tree": {"test": {"attr": "Diff_G_R_C_H", "op": "<=", "threshold": 36.0},
//!            "weight": 199.0, "dist": [...], "children": [...]}
//! }
//! ```
//!
//! Leaves are `{"class", "n", "e", "dist"}`; `dist` holds the training
//! weight per class and is what classification reads.

use serde::{Deserialize, Serialize};

use crate::dataset::AttributeSpec;

use super::{DecisionNode, DecisionTree, SplitTest, TreeError};

#[derive(Serialize, Deserialize)]
struct ModelFile {
    schema: Vec<AttributeSpec>,
    class: String,
    tree: NodeJson,
}

#[derive(Serialize, Deserialize)]
struct TestJson {
    attr: String,
    op: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    threshold: Option<f64>,
}

#[derive(Serialize, Deserialize)]
#[serde(untagged)]
enum NodeJson {
    Internal {
        test: TestJson,
        weight: f64,
        dist: Vec<f64>,
        children: Vec<NodeJson>,
    },
    Leaf {
        class: String,
        n: f64,
        e: f64,
        dist: Vec<f64>,
    },
}

impl DecisionTree {
    pub fn to_json(&self) -> String {
        let file = ModelFile {
            schema: self.schema.clone(),
            class: self.class_attr().to_string(),
            tree: self.node_json(&self.root),
        };
        let mut text = serde_json::to_string_pretty(&file).expect("model serializes");
        text.push('\n');
        text
    }

    fn node_json(&self, node: &DecisionNode) -> NodeJson {
        match node {
            DecisionNode::Leaf {
                class,
                n,
                e,
                class_weights,
            } => NodeJson::Leaf {
                class: self.class_name(*class).to_string(),
                n: *n,
                e: *e,
                dist: class_weights.clone(),
            },
            DecisionNode::Internal {
                test,
                children,
                weight,
                class_weights,
            } => {
                let attr = self.schema[test.attr()].name.clone();
                let test = match *test {
                    SplitTest::Nominal { .. } => TestJson {
                        attr,
                        op: "=".into(),
                        threshold: None,
                    },
                    SplitTest::NumericLe { threshold, .. } => TestJson {
                        attr,
                        op: "<=".into(),
                        threshold: Some(threshold),
                    },
                };
                NodeJson::Internal {
                    test,
                    weight: *weight,
                    dist: class_weights.clone(),
                    children: children.iter().map(|c| self.node_json(c)).collect(),
                }
            }
        }
    }

    pub fn from_json(text: &str) -> Result<Self, TreeError> {
        let file: ModelFile =
            serde_json::from_str(text).map_err(|e| TreeError::Model(e.to_string()))?;
        let schema = file.schema;
        let class_values: Vec<String> = schema
            .iter()
            .find(|a| a.name == file.class)
            .map(|a| a.values().to_vec())
            .unwrap_or_default();
        let root = node_from_json(&schema, &class_values, file.tree)?;
        DecisionTree::new(schema, &file.class, root).map_err(|e| match e {
            TreeError::Model(_) => e,
            other => TreeError::Model(other.to_string()),
        })
    }
}

fn node_from_json(
    schema: &[AttributeSpec],
    classes: &[String],
    node: NodeJson,
) -> Result<DecisionNode, TreeError> {
    match node {
        NodeJson::Leaf { class, n, e, dist } => {
            let class = classes
                .iter()
                .position(|c| *c == class)
                .ok_or_else(|| TreeError::Model(format!("unknown class {class:?}")))?;
            Ok(DecisionNode::Leaf {
                class,
                n,
                e,
                class_weights: dist,
            })
        }
        NodeJson::Internal {
            test,
            weight,
            dist,
            children,
        } => {
            let attr = schema
                .iter()
                .position(|a| a.name == test.attr)
                .ok_or_else(|| TreeError::Model(format!("unknown attribute {:?}", test.attr)))?;
            let test = match (test.op.as_str(), test.threshold) {
                ("=", None) => SplitTest::Nominal { attr },
                ("<=", Some(threshold)) => SplitTest::NumericLe { attr, threshold },
                (op, _) => {
                    return Err(TreeError::Model(format!(
                        "bad test operator {op:?} on {:?}",
                        test.attr
                    )))
                }
            };
            let children = children
                .into_iter()
                .map(|c| node_from_json(schema, classes, c))
                .collect::<Result<_, _>>()?;
            Ok(DecisionNode::Internal {
                test,
                children,
                weight,
                class_weights: dist,
            })
        }
    }
}
