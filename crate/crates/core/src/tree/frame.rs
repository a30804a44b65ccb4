//! Flattening labelled case tuples into a column-major feature frame.
//!
//! Every record contributes its 15 input fields plus the derived Schedule A
//! total (`L12`) and the engine output (`FTR`). Columns carry the record's
//! position as a suffix: `_1`/`_2` for the sources `x`/`x′`, `_3`/`_4` for
//! the follow-ups `y`/`y′`. Encodings: `sts` uses the filing-status code
//! (0 single, 1 MFJ, 2 MFS, 3 HOH), flags are 0/1, amounts are cents, ages
//! and dependent counts are plain integers.

use crate::generator::{Label, LabeledCase};
use crate::money::Money;
use crate::record::{Field, FieldKind};
use crate::relation::{schedule_a_total, MetamorphicRelation};

use super::TreeError;

/// Position suffixes of an arity-2 and an arity-4 tuple.
const SUFFIX_2: [u8; 2] = [1, 3];
const SUFFIX_4: [u8; 4] = [1, 2, 3, 4];

/// Value kind of a column, used to render thresholds.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ColumnKind {
    Status,
    Flag,
    Count,
    Money,
}

impl ColumnKind {
    fn of(f: Field) -> ColumnKind {
        match f.kind() {
            FieldKind::Status => ColumnKind::Status,
            FieldKind::Flag => ColumnKind::Flag,
            FieldKind::Years | FieldKind::Count => ColumnKind::Count,
            FieldKind::Money => ColumnKind::Money,
        }
    }

    pub fn render(self, v: i64) -> String {
        match self {
            ColumnKind::Money => Money::from_cents(v).to_string(),
            ColumnKind::Status => match crate::record::FilingStatus::from_code(v) {
                Some(s) => format!("{v} ({s})"),
                None => v.to_string(),
            },
            ColumnKind::Flag | ColumnKind::Count => v.to_string(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FeatureFrame {
    pub names: Vec<String>,
    pub kinds: Vec<ColumnKind>,
    /// Ordering group per column: 1 for sources, 2 for follow-ups.
    pub groups: Vec<u8>,
    /// Same feature one group lower (`AGI_3` → `AGI_1`).
    pub prefix: Vec<Option<usize>>,
    /// Column-major data, `columns[c][row]`.
    pub columns: Vec<Vec<i64>>,
    pub labels: Vec<Label>,
}

impl FeatureFrame {
    /// One row per case; fails on an empty or single-label input.
    pub fn flatten(cases: &[LabeledCase], rel: &MetamorphicRelation) -> Result<FeatureFrame, TreeError> {
        let frame = Self::flatten_any(cases, rel)?;
        frame.require_mixed()?;
        Ok(frame)
    }

    /// Like [`flatten`](Self::flatten) but accepts single-label inputs.
    pub fn flatten_any(cases: &[LabeledCase], rel: &MetamorphicRelation) -> Result<FeatureFrame, TreeError> {
        if cases.is_empty() {
            return Err(TreeError::Empty);
        }
        let suffixes: &[u8] = match rel.arity {
            2 => &SUFFIX_2,
            4 => &SUFFIX_4,
            a => return Err(TreeError::Shape(format!("unsupported arity {a}"))),
        };
        let per_record = Field::ALL.len() + 2;
        let mut names = Vec::new();
        let mut kinds = Vec::new();
        let mut groups = Vec::new();
        let mut prefix = Vec::new();
        for (pos, &sfx) in suffixes.iter().enumerate() {
            let group = if sfx <= 2 { 1 } else { 2 };
            let base = suffixes.iter().position(|&s| s + 2 == sfx);
            let feats = Field::ALL
                .iter()
                .map(|f| (f.name(), ColumnKind::of(*f)))
                .chain([("L12", ColumnKind::Money), ("FTR", ColumnKind::Money)]);
            for (i, (name, kind)) in feats.enumerate() {
                names.push(format!("{name}_{sfx}"));
                kinds.push(kind);
                groups.push(group);
                prefix.push(base.map(|b| b * per_record + i));
                debug_assert_eq!(names.len(), pos * per_record + i + 1);
            }
        }

        let mut columns = vec![Vec::with_capacity(cases.len()); names.len()];
        for (row, case) in cases.iter().enumerate() {
            let t = &case.tuple;
            if t.records.len() != rel.arity || t.outputs.len() != rel.arity {
                return Err(TreeError::Shape(format!("case {row} does not have {} records", rel.arity)));
            }
            for (pos, (r, out)) in t.records.iter().zip(&t.outputs).enumerate() {
                let base = pos * per_record;
                for (i, f) in Field::ALL.iter().enumerate() {
                    columns[base + i].push(r.get(*f));
                }
                columns[base + Field::ALL.len()].push(schedule_a_total(r).cents());
                columns[base + Field::ALL.len() + 1].push(out.cents());
            }
        }
        let labels = cases.iter().map(|c| c.label).collect();
        Ok(FeatureFrame { names, kinds, groups, prefix, columns, labels })
    }

    /// A frame from raw parts, for tests and external data.
    pub fn from_columns(
        names: Vec<String>,
        groups: Vec<u8>,
        prefix: Vec<Option<usize>>,
        columns: Vec<Vec<i64>>,
        labels: Vec<Label>,
    ) -> Result<FeatureFrame, TreeError> {
        let k = names.len();
        if groups.len() != k || prefix.len() != k || columns.len() != k {
            return Err(TreeError::Shape("column metadata lengths differ".into()));
        }
        if columns.iter().any(|c| c.len() != labels.len()) {
            return Err(TreeError::Shape("column lengths differ from label count".into()));
        }
        if groups.contains(&0) || groups.windows(2).any(|w| w[0] > w[1]) {
            return Err(TreeError::Shape("groups must be positive and non-decreasing".into()));
        }
        if prefix.iter().enumerate().any(|(c, p)| p.is_some_and(|p| p >= k || groups[p] >= groups[c])) {
            return Err(TreeError::Shape("a prefix must be a column of a lower group".into()));
        }
        if labels.is_empty() {
            return Err(TreeError::Empty);
        }
        Ok(FeatureFrame { kinds: vec![ColumnKind::Count; k], names, groups, prefix, columns, labels })
    }

    pub fn n_rows(&self) -> usize {
        self.labels.len()
    }

    pub fn n_cols(&self) -> usize {
        self.names.len()
    }

    pub fn column(&self, name: &str) -> Option<usize> {
        self.names.iter().position(|n| n == name)
    }

    pub fn row(&self, r: usize) -> Vec<i64> {
        self.columns.iter().map(|c| c[r]).collect()
    }

    pub fn count(&self, label: Label) -> usize {
        self.labels.iter().filter(|l| **l == label).count()
    }

    /// Puts every column into group 1, which turns the fit into plain CART.
    pub fn collapse_groups(&mut self) {
        self.groups.iter_mut().for_each(|g| *g = 1);
        self.prefix.iter_mut().for_each(|p| *p = None);
    }

    pub(crate) fn require_mixed(&self) -> Result<(), TreeError> {
        let failed = self.count(Label::Failed);
        if failed == 0 {
            return Err(TreeError::Degenerate(Label::Passed));
        }
        if failed == self.n_rows() {
            return Err(TreeError::Degenerate(Label::Failed));
        }
        Ok(())
    }
}
