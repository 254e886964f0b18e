//! Text and DOT renderings of a tree.

use std::fmt::Write as _;

use super::{DecisionNode, DecisionTree, SplitTest};

fn leaf_annotation(tree: &DecisionTree, node: &DecisionNode) -> String {
    match node {
        DecisionNode::Leaf { class, n, e, .. } => {
            if *e > 0.0 {
                format!("{} ({n:.1}/{e:.1})", tree.class_name(*class))
            } else {
                format!("{} ({n:.1})", tree.class_name(*class))
            }
        }
        DecisionNode::Internal { .. } => String::new(),
    }
}

fn branch_condition(tree: &DecisionTree, test: &SplitTest, branch: usize) -> String {
    let attr = &tree.schema()[test.attr()];
    match *test {
        SplitTest::Nominal { .. } => format!("{} = {}", attr.name, attr.values()[branch]),
        SplitTest::NumericLe { threshold, .. } => {
            let op = if branch == 0 { "<=" } else { ">" };
            format!("{} {op} {threshold}", attr.name)
        }
    }
}

/// One line per branch, indented with `"| "` per level; branches ending in a
/// leaf carry `: class (n/e)`, with `/e` omitted when nothing is misclassified.
pub fn render_text(tree: &DecisionTree) -> String {
    let mut out = String::new();
    match tree.root() {
        leaf @ DecisionNode::Leaf { .. } => {
            let _ = writeln!(out, ": {}", leaf_annotation(tree, leaf));
        }
        root => text_branches(tree, root, 0, &mut out),
    }
    out
}

fn text_branches(tree: &DecisionTree, node: &DecisionNode, depth: usize, out: &mut String) {
    let DecisionNode::Internal { test, children, .. } = node else {
        return;
    };
    for (b, child) in children.iter().enumerate() {
        out.push_str(&"| ".repeat(depth));
        out.push_str(&branch_condition(tree, test, b));
        if child.is_leaf() {
            out.push_str(": ");
            out.push_str(&leaf_annotation(tree, child));
            out.push('\n');
        } else {
            out.push('\n');
            text_branches(tree, child, depth + 1, out);
        }
    }
}

fn escape(label: &str) -> String {
    label.replace('\\', "\\\\").replace('"', "\\\"")
}

/// A DOT digraph. Node ids are preorder positions.
pub fn render_graph(tree: &DecisionTree) -> String {
    let mut out = String::from("digraph DecisionTree {\n");
    out.push_str("  node [fontname=\"Helvetica\"];\n");
    let mut next = 0;
    graph_node(tree, tree.root(), &mut next, &mut out);
    out.push_str("}\n");
    out
}

fn graph_node(
    tree: &DecisionTree,
    node: &DecisionNode,
    next: &mut usize,
    out: &mut String,
) -> usize {
    let id = *next;
    *next += 1;
    match node {
        DecisionNode::Leaf { .. } => {
            let _ = writeln!(
                out,
                "  N{id} [label=\"{}\", shape=box];",
                escape(&leaf_annotation(tree, node))
            );
        }
        DecisionNode::Internal { test, children, .. } => {
            let name = &tree.schema()[test.attr()].name;
            let _ = writeln!(out, "  N{id} [label=\"{}\"];", escape(name));
            for (b, child) in children.iter().enumerate() {
                let child_id = graph_node(tree, child, next, out);
                let cond = branch_condition(tree, test, b);
                let edge = cond.strip_prefix(name.as_str()).unwrap_or(&cond).trim();
                let _ = writeln!(out, "  N{id} -> N{child_id} [label=\"{}\"];", escape(edge));
            }
        }
    }
    id
}
