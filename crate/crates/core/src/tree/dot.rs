use std::fmt::Write;

use super::{DecisionTree, SplitTest, TreeNode};
use crate::dataset::Dataset;

/// Graphviz rendering. Each node shows its id, test, impurity, sample count,
/// class counts and decision; `highlight` nodes are filled.
pub fn to_dot(tree: &DecisionTree, ds: &Dataset, highlight: &[usize]) -> String {
    let metric = tree.params.impurity.name();
    let mut out = String::new();
    out.push_str("digraph Tree {\n");
    out.push_str("node [shape=box, style=\"rounded\", fontname=\"helvetica\"];\n");
    out.push_str("edge [fontname=\"helvetica\"];\n");
    for node in &tree.nodes {
        let mut label = format!("#{}", node.id);
        if let Some(test) = test_text(node, ds) {
            let _ = write!(label, "\n{test}");
        }
        let counts: Vec<String> = node.class_counts.iter().map(usize::to_string).collect();
        let _ = write!(
            label,
            "\n{metric} = {:.4}\nsamples = {}\nvalue = [{}]\ndecision = {}",
            node.impurity,
            node.samples,
            counts.join(", "),
            tree.class_names.get(node.decision as usize).map_or("?", String::as_str),
        );
        let style = if highlight.contains(&node.id) {
            ", style=\"rounded,filled\", fillcolor=\"#fdd49e\", penwidth=2"
        } else {
            ""
        };
        let _ = writeln!(out, "{} [label=\"{}\"{}];", node.id, escape(&label), style);
    }
    for node in &tree.nodes {
        if let Some([l, r]) = node.children {
            let _ = writeln!(out, "{} -> {} [label=\"true\"];", node.id, l);
            let _ = writeln!(out, "{} -> {} [label=\"false\"];", node.id, r);
        }
    }
    out.push_str("}\n");
    out
}

fn test_text(node: &TreeNode, ds: &Dataset) -> Option<String> {
    let split = node.split.as_ref()?;
    let col = ds.columns.get(split.attribute)?;
    let value = col.value(split.pivot).unwrap_or("(missing)");
    let op = match split.test {
        SplitTest::Ordinal => "<=",
        SplitTest::Nominal => "=",
    };
    Some(format!("{} {} {}", split.attribute_name, op, value))
}

fn escape(s: &str) -> String {
    let mut out = String::with_capacity(s.len());
    for ch in s.chars() {
        match ch {
            '"' => out.push_str("\\\""),
            '\\' => out.push_str("\\\\"),
            '\n' => out.push_str("\\n"),
            c => out.push(c),
        }
    }
    out
}
