//! Gini CART with the lexicographic eligibility rule.
//!
//! Each column is argsorted once; nodes carry one sorted index list per
//! column and hand stable partitions of them to their children. Candidate
//! splits are compared exactly: with `l`/`r` the child class counts, the
//! split minimizing weighted Gini is the one maximizing
//! `Σ l_k² / n_l + Σ r_k² / n_r`, evaluated as a `u128` fraction.

use std::cmp::Ordering;

use crate::generator::Label;

use super::{majority, Counts, FeatureFrame, LexTree, TreeError, TreeNode, TreeParams};

/// |Pearson r| between two whole columns; 0 if either is constant.
pub fn association(a: &[i64], b: &[i64]) -> f64 {
    association_rows(a, b, 0..a.len().min(b.len()))
}

pub(crate) fn association_rows(a: &[i64], b: &[i64], rows: impl Iterator<Item = usize>) -> f64 {
    let (mut n, mut sa, mut sb, mut saa, mut sbb, mut sab) = (0i128, 0i128, 0i128, 0i128, 0i128, 0i128);
    for r in rows {
        let (x, y) = (a[r] as i128, b[r] as i128);
        n += 1;
        sa += x;
        sb += y;
        saa += x * x;
        sbb += y * y;
        sab += x * y;
    }
    let vx = n * saa - sa * sa;
    let vy = n * sbb - sb * sb;
    if vx == 0 || vy == 0 {
        return 0.0;
    }
    let cov = n * sab - sa * sb;
    let r = cov as f64 / (vx as f64 * vy as f64).sqrt();
    r.abs().min(1.0)
}

fn eligible(frame: &FeatureFrame, params: &TreeParams, path: &[usize], c: usize, rows: &[u32]) -> bool {
    let g = frame.groups[c];
    if g == 1 || params.rho == 0.0 || path.iter().any(|&p| frame.groups[p] + 1 == g) {
        return true;
    }
    frame.prefix[c].is_some_and(|p| {
        let rows = rows.iter().map(|&r| r as usize);
        association_rows(&frame.columns[c], &frame.columns[p], rows) > params.rho
    })
}

/// Columns that may split a node reached by splitting on `path` and holding `rows`.
pub fn eligible_features(frame: &FeatureFrame, params: &TreeParams, path: &[usize], rows: &[u32]) -> Vec<usize> {
    (0..frame.n_cols()).filter(|&c| eligible(frame, params, path, c, rows)).collect()
}

/// Best split of one node: column, threshold and the `u128` score fraction.
#[derive(Clone, Copy)]
struct Candidate {
    column: usize,
    threshold: i64,
    num: u128,
    den: u128,
}

impl Candidate {
    fn beats(&self, other: &Candidate) -> bool {
        (self.num * other.den).cmp(&(other.num * self.den)) == Ordering::Greater
    }
}

struct Builder<'a> {
    frame: &'a FeatureFrame,
    params: TreeParams,
    failed: Vec<bool>,
    go_left: Vec<bool>,
}

impl Builder<'_> {
    fn counts(&self, rows: &[u32]) -> Counts {
        let f = rows.iter().filter(|&&r| self.failed[r as usize]).count() as u64;
        [rows.len() as u64 - f, f]
    }

    fn best_split(&self, sorted: &[Vec<u32>], path: &[usize], counts: Counts) -> Option<Candidate> {
        let n = sorted[0].len();
        let msl = self.params.min_samples_leaf;
        let (p_all, f_all) = (counts[0] as u128, counts[1] as u128);
        let mut best: Option<Candidate> = None;
        for c in 0..self.frame.n_cols() {
            if !eligible(self.frame, &self.params, path, c, &sorted[0]) {
                continue;
            }
            let col = &self.frame.columns[c];
            let order = &sorted[c];
            let (mut fl, mut pl) = (0u128, 0u128);
            for i in 0..n - 1 {
                let r = order[i] as usize;
                if self.failed[r] {
                    fl += 1;
                } else {
                    pl += 1;
                }
                let nl = i + 1;
                if nl < msl {
                    continue;
                }
                if n - nl < msl {
                    break;
                }
                let v = col[r];
                if v == col[order[i + 1] as usize] {
                    continue;
                }
                let (nl, nr) = (nl as u128, (n - nl) as u128);
                let (fr, pr) = (f_all - fl, p_all - pl);
                let cand = Candidate {
                    column: c,
                    threshold: v,
                    num: (fl * fl + pl * pl) * nr + (fr * fr + pr * pr) * nl,
                    den: nl * nr,
                };
                if best.as_ref().is_none_or(|b| cand.beats(b)) {
                    best = Some(cand);
                }
            }
        }
        best
    }

    fn node(&mut self, sorted: Vec<Vec<u32>>, depth: usize, path: &mut Vec<usize>) -> TreeNode {
        let counts = self.counts(&sorted[0]);
        let n = sorted[0].len();
        let leaf = TreeNode::Leaf { label: majority(counts), counts };
        if depth >= self.params.max_depth || counts[0] == 0 || counts[1] == 0 || n < 2 * self.params.min_samples_leaf {
            return leaf;
        }
        let Some(best) = self.best_split(&sorted, path, counts) else {
            return leaf;
        };
        let col = &self.frame.columns[best.column];
        for &r in &sorted[0] {
            self.go_left[r as usize] = col[r as usize] <= best.threshold;
        }
        let (mut left, mut right) = (Vec::with_capacity(sorted.len()), Vec::with_capacity(sorted.len()));
        for order in sorted {
            let (l, r): (Vec<u32>, Vec<u32>) = order.into_iter().partition(|&r| self.go_left[r as usize]);
            left.push(l);
            right.push(r);
        }
        path.push(best.column);
        let l = self.node(left, depth + 1, path);
        let r = self.node(right, depth + 1, path);
        path.pop();
        TreeNode::Split { column: best.column, threshold: best.threshold, counts, left: Box::new(l), right: Box::new(r) }
    }
}

/// Fits a tree to a mixed-label frame.
pub fn fit(frame: &FeatureFrame, params: &TreeParams) -> Result<LexTree, TreeError> {
    params.validate()?;
    frame.require_mixed()?;
    let n = frame.n_rows();
    let sorted: Vec<Vec<u32>> = frame
        .columns
        .iter()
        .map(|col| {
            let mut idx: Vec<u32> = (0..n as u32).collect();
            idx.sort_by_key(|&r| col[r as usize]);
            idx
        })
        .collect();
    let mut b = Builder {
        frame,
        params: *params,
        failed: frame.labels.iter().map(|l| *l == Label::Failed).collect(),
        go_left: vec![false; n],
    };
    let root = b.node(sorted, 0, &mut Vec::new());
    Ok(LexTree {
        root,
        names: frame.names.clone(),
        kinds: frame.kinds.clone(),
        groups: frame.groups.clone(),
        params: *params,
    })
}

/// Walks `frame` down `tree` and lists every split that the ordering rule
/// would not have allowed at its node. Empty for a well-formed tree.
pub fn ordering_violations(tree: &LexTree, frame: &FeatureFrame) -> Vec<String> {
    fn walk(
        node: &TreeNode,
        tree: &LexTree,
        frame: &FeatureFrame,
        rows: Vec<u32>,
        path: &mut Vec<usize>,
        out: &mut Vec<String>,
    ) {
        let TreeNode::Split { column, threshold, left, right, .. } = node else {
            return;
        };
        if !eligible(frame, &tree.params, path, *column, &rows) {
            let names: Vec<&str> = path.iter().map(|&p| frame.names[p].as_str()).collect();
            out.push(format!("{} split below [{}]", frame.names[*column], names.join(", ")));
        }
        let col = &frame.columns[*column];
        let (l, r): (Vec<u32>, Vec<u32>) = rows.into_iter().partition(|&r| col[r as usize] <= *threshold);
        path.push(*column);
        walk(left, tree, frame, l, path, out);
        walk(right, tree, frame, r, path, out);
        path.pop();
    }
    let mut out = Vec::new();
    walk(&tree.root, tree, frame, (0..frame.n_rows() as u32).collect(), &mut Vec::new(), &mut out);
    out
}
