//! Classification trees over labelled suites with a lexicographic ordering
//! constraint: a follow-up column may split a node only once the path holds
//! a source split, or when it is associated with its source column at that
//! node (|Pearson r| > ρ).

mod export;
mod fit;
mod frame;

pub use export::{PathPredicate, TreeJson};
pub use fit::{association, eligible_features, fit, ordering_violations};
pub use frame::{ColumnKind, FeatureFrame};

use serde::{Deserialize, Serialize};

use crate::generator::Label;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum TreeError {
    #[error("suite holds only {0:?} cases; nothing to separate")]
    Degenerate(Label),
    #[error("empty frame")]
    Empty,
    #[error("malformed frame: {0}")]
    Shape(String),
    #[error("invalid tree parameters: {0}")]
    Params(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TreeParams {
    pub max_depth: usize,
    pub min_samples_leaf: usize,
    /// Association threshold ρ. Zero disables the ordering constraint.
    pub rho: f64,
}

impl Default for TreeParams {
    fn default() -> Self {
        TreeParams { max_depth: 12, min_samples_leaf: 20, rho: 0.1 }
    }
}

impl TreeParams {
    pub fn unconstrained(self) -> TreeParams {
        TreeParams { rho: 0.0, ..self }
    }

    pub fn validate(&self) -> Result<(), TreeError> {
        if self.max_depth == 0 || self.min_samples_leaf == 0 {
            return Err(TreeError::Params("max_depth and min_samples_leaf must be positive".into()));
        }
        if !(0.0..=1.0).contains(&self.rho) {
            return Err(TreeError::Params(format!("rho {} outside [0, 1]", self.rho)));
        }
        Ok(())
    }
}

/// Class counts, `[passed, failed]`.
pub type Counts = [u64; 2];

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum TreeNode {
    /// Rows with `column ≤ threshold` go left.
    Split { column: usize, threshold: i64, counts: Counts, left: Box<TreeNode>, right: Box<TreeNode> },
    Leaf { label: Label, counts: Counts },
}

impl TreeNode {
    pub fn counts(&self) -> Counts {
        match self {
            TreeNode::Split { counts, .. } | TreeNode::Leaf { counts, .. } => *counts,
        }
    }

    pub fn support(&self) -> u64 {
        let [p, f] = self.counts();
        p + f
    }

    /// Height in edges; a single leaf has height 0.
    pub fn height(&self) -> usize {
        match self {
            TreeNode::Leaf { .. } => 0,
            TreeNode::Split { left, right, .. } => 1 + left.height().max(right.height()),
        }
    }

    pub fn leaves(&self) -> usize {
        match self {
            TreeNode::Leaf { .. } => 1,
            TreeNode::Split { left, right, .. } => left.leaves() + right.leaves(),
        }
    }
}

/// A fitted tree together with the frame metadata needed to report it.
#[derive(Debug, Clone, PartialEq)]
pub struct LexTree {
    pub root: TreeNode,
    pub names: Vec<String>,
    pub kinds: Vec<ColumnKind>,
    pub groups: Vec<u8>,
    pub params: TreeParams,
}

impl LexTree {
    pub fn predict(&self, row: &[i64]) -> Label {
        let mut node = &self.root;
        loop {
            match node {
                TreeNode::Leaf { label, .. } => return *label,
                TreeNode::Split { column, threshold, left, right, .. } => {
                    node = if row[*column] <= *threshold { left } else { right };
                }
            }
        }
    }

    /// Fraction of rows whose prediction matches their label.
    pub fn accuracy(&self, frame: &FeatureFrame) -> f64 {
        let hits = (0..frame.n_rows())
            .filter(|&r| self.predict(&frame.row(r)) == frame.labels[r])
            .count();
        hits as f64 / frame.n_rows() as f64
    }

    pub fn height(&self) -> usize {
        self.root.height()
    }

    pub fn leaves(&self) -> usize {
        self.root.leaves()
    }
}

/// Gini impurity `1 − p² − (1 − p)²` of a node with the given counts.
pub fn gini(counts: Counts) -> f64 {
    let n = (counts[0] + counts[1]) as f64;
    if n == 0.0 {
        return 0.0;
    }
    let p = counts[1] as f64 / n;
    1.0 - p * p - (1.0 - p) * (1.0 - p)
}

pub fn gini_of(labels: &[Label]) -> f64 {
    let failed = labels.iter().filter(|l| **l == Label::Failed).count() as u64;
    gini([labels.len() as u64 - failed, failed])
}

fn majority(counts: Counts) -> Label {
    if counts[1] >= counts[0] {
        Label::Failed
    } else {
        Label::Passed
    }
}
