//! DOT, JSON and plain-text renderings of a fitted tree.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use serde::Serialize;

use crate::generator::Label;

use super::{gini, ColumnKind, Counts, LexTree, TreeNode};

/// One root-to-leaf path as a conjunction of per-column bounds.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PathPredicate {
    pub conjunction: String,
    /// Columns tested on the path, in path order.
    pub columns: Vec<String>,
    pub label: Label,
    pub counts: Counts,
    pub support: u64,
}

/// Nested JSON export schema.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(untagged)]
pub enum TreeJson {
    Split {
        feature: String,
        group: u8,
        threshold: i64,
        threshold_text: String,
        counts: Counts,
        gini: f64,
        left: Box<TreeJson>,
        right: Box<TreeJson>,
    },
    Leaf {
        label: Label,
        counts: Counts,
        support: u64,
        gini: f64,
    },
}

fn render_bounds(name: &str, kind: ColumnKind, lo: Option<i64>, hi: Option<i64>) -> String {
    if kind == ColumnKind::Flag {
        return match (lo, hi) {
            (_, Some(h)) if h < 1 => format!("{name} = 0"),
            (Some(l), _) if l >= 0 => format!("{name} = 1"),
            _ => format!("{name} ∈ {{0, 1}}"),
        };
    }
    match (lo, hi) {
        (Some(l), Some(h)) => format!("{} < {name} ≤ {}", kind.render(l), kind.render(h)),
        (Some(l), None) => format!("{name} > {}", kind.render(l)),
        (None, Some(h)) => format!("{name} ≤ {}", kind.render(h)),
        (None, None) => name.to_string(),
    }
}

impl LexTree {
    fn split_text(&self, column: usize, threshold: i64) -> String {
        format!("{} ≤ {}", self.names[column], self.kinds[column].render(threshold))
    }

    /// Root-to-leaf conjunctions, failing leaves first, largest failing support first.
    pub fn path_predicates(&self) -> Vec<PathPredicate> {
        fn walk(
            tree: &LexTree,
            node: &TreeNode,
            bounds: &mut Vec<(usize, Option<i64>, Option<i64>)>,
            out: &mut Vec<PathPredicate>,
        ) {
            match node {
                TreeNode::Leaf { label, counts } => {
                    // tighten repeated tests on the same column into one interval
                    let mut merged: BTreeMap<usize, (usize, Option<i64>, Option<i64>)> = BTreeMap::new();
                    for (order, &(c, lo, hi)) in bounds.iter().enumerate() {
                        let e = merged.entry(c).or_insert((order, None, None));
                        e.1 = match (e.1, lo) {
                            (Some(a), Some(b)) => Some(a.max(b)),
                            (a, b) => a.or(b),
                        };
                        e.2 = match (e.2, hi) {
                            (Some(a), Some(b)) => Some(a.min(b)),
                            (a, b) => a.or(b),
                        };
                    }
                    let mut parts: Vec<(usize, usize, Option<i64>, Option<i64>)> =
                        merged.into_iter().map(|(c, (o, lo, hi))| (o, c, lo, hi)).collect();
                    parts.sort();
                    let text: Vec<String> = parts
                        .iter()
                        .map(|&(_, c, lo, hi)| render_bounds(&tree.names[c], tree.kinds[c], lo, hi))
                        .collect();
                    out.push(PathPredicate {
                        conjunction: if text.is_empty() { "true".into() } else { text.join(" ∧ ") },
                        columns: bounds.iter().map(|&(c, _, _)| tree.names[c].clone()).collect(),
                        label: *label,
                        counts: *counts,
                        support: counts[0] + counts[1],
                    });
                }
                TreeNode::Split { column, threshold, left, right, .. } => {
                    bounds.push((*column, None, Some(*threshold)));
                    walk(tree, left, bounds, out);
                    bounds.pop();
                    bounds.push((*column, Some(*threshold), None));
                    walk(tree, right, bounds, out);
                    bounds.pop();
                }
            }
        }
        let mut out = Vec::new();
        walk(self, &self.root, &mut Vec::new(), &mut out);
        out.sort_by(|a, b| {
            (b.label == Label::Failed)
                .cmp(&(a.label == Label::Failed))
                .then(b.counts[1].cmp(&a.counts[1]))
                .then(b.support.cmp(&a.support))
        });
        out
    }

    /// Path predicates as plain text, one path per line.
    pub fn predicates_text(&self) -> String {
        let mut s = String::new();
        for p in self.path_predicates() {
            let tag = match p.label {
                Label::Failed => "FAILED",
                Label::Passed => "passed",
            };
            let _ = writeln!(s, "{tag:<6}  failed {:>6}  passed {:>6}  {}", p.counts[1], p.counts[0], p.conjunction);
        }
        s
    }

    /// Graphviz digraph; failing leaves orange, passing leaves green.
    pub fn to_dot(&self) -> String {
        fn walk(tree: &LexTree, node: &TreeNode, next: &mut usize, s: &mut String) -> usize {
            let id = *next;
            *next += 1;
            let counts = node.counts();
            let stats = format!(
                "gini = {:.4}\\nsamples = {}\\nvalue = [passed {}, failed {}]",
                gini(counts),
                counts[0] + counts[1],
                counts[0],
                counts[1]
            );
            match node {
                TreeNode::Leaf { label, .. } => {
                    let (text, color) = match label {
                        Label::Failed => ("failed", "#f5a623"),
                        Label::Passed => ("passed", "#7ed321"),
                    };
                    let _ = writeln!(s, "  n{id} [label=\"{text}\\n{stats}\", fillcolor=\"{color}\"];");
                }
                TreeNode::Split { column, threshold, left, right, .. } => {
                    let test = tree.split_text(*column, *threshold).replace('"', "\\\"");
                    let _ = writeln!(s, "  n{id} [label=\"{test}\\n{stats}\", fillcolor=\"#ffffff\"];");
                    let l = walk(tree, left, next, s);
                    let _ = writeln!(s, "  n{id} -> n{l} [label=\"true\"];");
                    let r = walk(tree, right, next, s);
                    let _ = writeln!(s, "  n{id} -> n{r} [label=\"false\"];");
                }
            }
            id
        }
        let mut s = String::from("digraph lextree {\n");
        s.push_str("  node [shape=box, style=\"rounded,filled\", fontname=\"Helvetica\"];\n");
        s.push_str("  edge [fontname=\"Helvetica\"];\n");
        walk(self, &self.root, &mut 0, &mut s);
        s.push_str("}\n");
        s
    }

    pub fn to_json(&self) -> TreeJson {
        fn conv(tree: &LexTree, node: &TreeNode) -> TreeJson {
            match node {
                TreeNode::Leaf { label, counts } => TreeJson::Leaf {
                    label: *label,
                    counts: *counts,
                    support: counts[0] + counts[1],
                    gini: gini(*counts),
                },
                TreeNode::Split { column, threshold, counts, left, right } => TreeJson::Split {
                    feature: tree.names[*column].clone(),
                    group: tree.groups[*column],
                    threshold: *threshold,
                    threshold_text: tree.kinds[*column].render(*threshold),
                    counts: *counts,
                    gini: gini(*counts),
                    left: Box::new(conv(tree, left)),
                    right: Box::new(conv(tree, right)),
                },
            }
        }
        conv(self, &self.root)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tree::{fit, FeatureFrame, TreeParams};

    fn frame() -> FeatureFrame {
        let n = 200;
        let a: Vec<i64> = (0..n).collect();
        let b: Vec<i64> = (0..n).map(|i| (i * 37) % 11).collect();
        let labels = (0..n)
            .map(|i| if i > 120 && (i * 37) % 11 > 3 { Label::Failed } else { Label::Passed })
            .collect();
        FeatureFrame::from_columns(vec!["a_1".into(), "b_3".into()], vec![1, 2], vec![None, None], vec![a, b], labels)
            .unwrap()
    }

    /// Minimal structural check of the DOT subset emitted here.
    fn check_dot(dot: &str) -> Result<(), String> {
        let mut lines = dot.lines();
        if lines.next() != Some("digraph lextree {") {
            return Err("bad header".into());
        }
        let body: Vec<&str> = lines.collect();
        if body.last() != Some(&"}") {
            return Err("unterminated graph".into());
        }
        let mut declared = std::collections::HashSet::new();
        for line in &body[..body.len() - 1] {
            let line = line.trim();
            let (head, attrs) = line.split_once(" [").ok_or(format!("no attribute list: {line}"))?;
            let attrs = attrs.strip_suffix("];").ok_or(format!("unterminated: {line}"))?;
            // every attribute value is quoted with escaped inner quotes
            let mut quotes = 0;
            let mut prev = ' ';
            for ch in attrs.chars() {
                if ch == '"' && prev != '\\' {
                    quotes += 1;
                }
                prev = ch;
            }
            if quotes % 2 != 0 {
                return Err(format!("unbalanced quotes: {line}"));
            }
            match head.split_once(" -> ") {
                Some((a, b)) => {
                    if !declared.contains(a) || !declared.contains(b) {
                        return Err(format!("edge before node: {line}"));
                    }
                }
                None if head == "node" || head == "edge" => {}
                None => {
                    if !head.starts_with('n') || !head[1..].chars().all(|c| c.is_ascii_digit()) {
                        return Err(format!("bad node id: {line}"));
                    }
                    declared.insert(head.to_string());
                }
            }
        }
        Ok(())
    }

    #[test]
    fn dot_is_well_formed() {
        let tree = fit(&frame(), &TreeParams { min_samples_leaf: 5, ..TreeParams::default() }).unwrap();
        let dot = tree.to_dot();
        check_dot(&dot).unwrap();
        assert!(dot.contains("#f5a623") && dot.contains("#7ed321"));
        assert_eq!(dot.matches(" -> ").count(), 2 * (tree.leaves() - 1));
        assert_eq!(dot, tree.to_dot());
    }

    #[test]
    fn predicates_sorted_by_failing_support() {
        let tree = fit(&frame(), &TreeParams { min_samples_leaf: 5, ..TreeParams::default() }).unwrap();
        let preds = tree.path_predicates();
        assert_eq!(preds.len(), tree.leaves());
        assert_eq!(preds.iter().map(|p| p.support).sum::<u64>(), 200);
        assert_eq!(preds[0].label, Label::Failed);
        assert!(preds[0].conjunction.contains("a_1 > "));
        let failing: Vec<u64> = preds.iter().filter(|p| p.label == Label::Failed).map(|p| p.counts[1]).collect();
        assert!(failing.windows(2).all(|w| w[0] >= w[1]));
    }

    #[test]
    fn bounds_render_as_intervals() {
        assert_eq!(render_bounds("AGI_1", ColumnKind::Money, Some(100), Some(250)), "1.00 < AGI_1 ≤ 2.50");
        assert_eq!(render_bounds("iz_1", ColumnKind::Flag, None, Some(0)), "iz_1 = 0");
        assert_eq!(render_bounds("iz_1", ColumnKind::Flag, Some(0), None), "iz_1 = 1");
        assert_eq!(render_bounds("QC_1", ColumnKind::Count, Some(2), None), "QC_1 > 2");
    }

    #[test]
    fn json_export_nests() {
        let tree = fit(&frame(), &TreeParams { min_samples_leaf: 5, ..TreeParams::default() }).unwrap();
        let v = serde_json::to_value(tree.to_json()).unwrap();
        assert_eq!(v["feature"], "a_1");
        assert_eq!(v["counts"][0].as_u64().unwrap() + v["counts"][1].as_u64().unwrap(), 200);
        assert!(v["left"].is_object() && v["right"].is_object());
    }
}
