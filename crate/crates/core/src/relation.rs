//! Metamorphic relations over Form 1040 records.
//!
//! A relation quantifies over a tuple of records: sources (`x`, or `x, x′`)
//! and follow-ups (`y`, or `y, y′`). Each follow-up is a metamorphose of its
//! source: every field outside the exception set `L` is identical
//! (`x ≡_L y`). Relations whose premise is a disjunction carry one
//! [`MetamorphoseSpec`] per disjunct.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::money::Money;
use crate::record::{Field, FieldKind, FilingStatus, TaxReturnInput};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum RelationError {
    #[error("relation {relation} expects {expected} records, got {got}")]
    ArityMismatch { relation: u8, expected: usize, got: usize },
    #[error("unknown relation id {0} (valid ids are 1-16)")]
    UnknownId(u32),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum DomainTag {
    Disability,
    #[serde(rename = "EITC")]
    Eitc,
    #[serde(rename = "CTC")]
    Ctc,
    #[serde(rename = "ETC")]
    Etc,
    #[serde(rename = "ID")]
    Id,
}

impl fmt::Display for DomainTag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            DomainTag::Disability => "Disability",
            DomainTag::Eitc => "EITC",
            DomainTag::Ctc => "CTC",
            DomainTag::Etc => "ETC",
            DomainTag::Id => "ID",
        })
    }
}

/// How the engine outputs of a case tuple must relate.
///
/// Outputs are ordered `x, y` for arity 2 and `x, x′, y, y′` for arity 4.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum OutputComparator {
    /// F(x) = F(y)
    #[serde(rename = "EQ")]
    Eq,
    /// F(x) ≥ F(y)
    #[serde(rename = "GEQ")]
    Geq,
    /// F(x) ≤ F(y)
    #[serde(rename = "LEQ")]
    Leq,
    /// F(x) − F(y) ≥ F(x′) − F(y′)
    #[serde(rename = "DIFF_GEQ")]
    DiffGeq,
}

impl OutputComparator {
    pub fn arity(self) -> usize {
        match self {
            OutputComparator::DiffGeq => 4,
            _ => 2,
        }
    }

    /// Non-negative violation size; zero exactly when the output relation holds.
    pub fn deviance(self, outputs: &[Money]) -> Result<Money, usize> {
        if outputs.len() != self.arity() {
            return Err(outputs.len());
        }
        let o = outputs;
        Ok(match self {
            OutputComparator::Eq => (o[0] - o[1]).abs(),
            OutputComparator::Geq => (o[1] - o[0]).max(Money::ZERO),
            OutputComparator::Leq => (o[0] - o[1]).max(Money::ZERO),
            // o = [x, x′, y, y′]
            OutputComparator::DiffGeq => ((o[1] - o[3]) - (o[0] - o[2])).max(Money::ZERO),
        })
    }

    pub fn conclusion(self) -> &'static str {
        match self {
            OutputComparator::Eq => "F(x) = F(y)",
            OutputComparator::Geq => "F(x) ≥ F(y)",
            OutputComparator::Leq => "F(x) ≤ F(y)",
            OutputComparator::DiffGeq => "F(x) − F(y) ≥ F(x′) − F(y′)",
        }
    }
}

impl fmt::Display for OutputComparator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            OutputComparator::Eq => "EQ",
            OutputComparator::Geq => "GEQ",
            OutputComparator::Leq => "LEQ",
            OutputComparator::DiffGeq => "DIFF_GEQ",
        })
    }
}

/// Allowed values of one field, in the field's integer encoding.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum FieldRange {
    /// Closed interval.
    Span(i64, i64),
    OneOf(Vec<i64>),
}

impl FieldRange {
    pub fn contains(&self, v: i64) -> bool {
        match self {
            FieldRange::Span(lo, hi) => (*lo..=*hi).contains(&v),
            FieldRange::OneOf(vals) => vals.contains(&v),
        }
    }

    pub fn is_empty(&self) -> bool {
        match self {
            FieldRange::Span(lo, hi) => lo > hi,
            FieldRange::OneOf(vals) => vals.is_empty(),
        }
    }

    pub fn is_singleton(&self) -> bool {
        match self {
            FieldRange::Span(lo, hi) => lo == hi,
            FieldRange::OneOf(vals) => vals.len() == 1,
        }
    }

    pub fn intersect(&self, other: &FieldRange) -> FieldRange {
        match (self, other) {
            (FieldRange::Span(a, b), FieldRange::Span(c, d)) => FieldRange::Span(*a.max(c), *b.min(d)),
            (FieldRange::OneOf(vals), r) | (r, FieldRange::OneOf(vals)) => {
                FieldRange::OneOf(vals.iter().copied().filter(|v| r.contains(*v)).collect())
            }
        }
    }
}

/// Default sampling range of every field, one entry per [`Field`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SamplingDomain {
    ranges: Vec<FieldRange>,
}

/// Bounds of the default sampling domain, in dollars.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct DomainBounds {
    pub agi_max: Money,
    pub max_withholding: Money,
    pub max_credit: Money,
    pub max_itemized: Money,
    pub max_age: u16,
}

impl Default for DomainBounds {
    fn default() -> Self {
        DomainBounds {
            agi_max: Money::dollars(500_000),
            max_withholding: Money::dollars(30_000),
            max_credit: Money::dollars(1_000),
            max_itemized: Money::dollars(100_000),
            max_age: 100,
        }
    }
}

impl SamplingDomain {
    pub fn new(b: &DomainBounds) -> SamplingDomain {
        let ranges = Field::ALL
            .iter()
            .map(|f| match f {
                Field::Sts => FieldRange::OneOf(FilingStatus::ALL.iter().map(|s| s.code()).collect()),
                Field::Age | Field::SAge => FieldRange::Span(18, b.max_age as i64),
                Field::Blind | Field::SBlind | Field::Iz => FieldRange::Span(0, 1),
                Field::Qc | Field::Od => FieldRange::Span(0, 10),
                Field::Agi => FieldRange::Span(0, b.agi_max.cents()),
                Field::Withholding => FieldRange::Span(0, b.max_withholding.cents()),
                Field::L27 | Field::L19 | Field::L29 => FieldRange::Span(0, b.max_credit.cents()),
                Field::Mde | Field::OtherItemized => FieldRange::Span(0, b.max_itemized.cents()),
            })
            .collect();
        SamplingDomain { ranges }
    }

    pub fn range(&self, f: Field) -> &FieldRange {
        &self.ranges[f.index()]
    }
}

impl Default for SamplingDomain {
    fn default() -> Self {
        SamplingDomain::new(&DomainBounds::default())
    }
}

/// Constraint on one exception field of a follow-up, relative to its source.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FollowRule {
    /// `y.f = v`
    Const(Field, i64),
    /// `y.f < v`
    Below(Field, i64),
    /// `y.f > v`
    Above(Field, i64),
    /// `0 ≤ y.f ≤ x.f`
    AtMostSource(Field),
}

impl FollowRule {
    pub fn field(self) -> Field {
        match self {
            FollowRule::Const(f, _)
            | FollowRule::Below(f, _)
            | FollowRule::Above(f, _)
            | FollowRule::AtMostSource(f) => f,
        }
    }

    pub fn holds(self, source: &TaxReturnInput, followup: &TaxReturnInput) -> bool {
        let y = followup.get(self.field());
        match self {
            FollowRule::Const(_, v) => y == v,
            FollowRule::Below(_, v) => y < v,
            FollowRule::Above(_, v) => y > v,
            FollowRule::AtMostSource(f) => 0 <= y && y <= source.get(f),
        }
    }

    /// Sampling range for the follow-up value, within the domain.
    pub fn range(self, source: &TaxReturnInput, domain: &SamplingDomain) -> FieldRange {
        let f = self.field();
        let rule = match self {
            FollowRule::Const(_, v) => FieldRange::Span(v, v),
            FollowRule::Below(_, v) => FieldRange::Span(i64::MIN, v - 1),
            FollowRule::Above(_, v) => FieldRange::Span(v + 1, i64::MAX),
            FollowRule::AtMostSource(_) => FieldRange::Span(0, source.get(f)),
        };
        rule.intersect(domain.range(f))
    }

    pub fn text(self) -> String {
        match self {
            FollowRule::Const(f, v) => format!("y.{f} = {}", fmt_value(f, v)),
            FollowRule::Below(f, v) => format!("y.{f} < {}", fmt_value(f, v)),
            FollowRule::Above(f, v) => format!("y.{f} > {}", fmt_value(f, v)),
            FollowRule::AtMostSource(f) => format!("y.{f} ≤ x.{f}"),
        }
    }
}

/// Human-readable value in a field's natural unit.
pub fn fmt_value(f: Field, v: i64) -> String {
    match f.kind() {
        FieldKind::Money => Money::from_cents(v).to_string(),
        FieldKind::Flag => (if v != 0 { "true" } else { "false" }).to_string(),
        FieldKind::Status => FilingStatus::from_code(v).map_or(v.to_string(), |s| s.to_string()),
        FieldKind::Years | FieldKind::Count => v.to_string(),
    }
}

/// Arity-4 relations draw `x′` as a metamorphose of `x` on `links`.
#[derive(Debug, Clone)]
pub struct PairSpec {
    pub links: Vec<Field>,
    pub ranges: Vec<(Field, FieldRange)>,
}

/// One disjunct of a relation premise.
#[derive(Debug, Clone)]
pub struct MetamorphoseSpec {
    /// The exception set `L`.
    pub exception_labels: Vec<Field>,
    /// Human-readable source constraint.
    pub source_text: &'static str,
    /// Narrowed sampling ranges for the source `x` (intersected with the domain).
    pub source_ranges: Vec<(Field, FieldRange)>,
    pub pair: Option<PairSpec>,
    source_holds: fn(&[TaxReturnInput]) -> bool,
    pub followup: Vec<FollowRule>,
}

impl MetamorphoseSpec {
    /// Source constraint on `[x]` or `[x, x′]`.
    pub fn source_constraints(&self, sources: &[TaxReturnInput]) -> bool {
        if let Some(pair) = &self.pair {
            if sources.len() != 2 || !sources[0].equal_except(&sources[1], &pair.links) {
                return false;
            }
        }
        (self.source_holds)(sources)
    }

    /// Follow-up constraints and `≡_L`, given sources.
    pub fn followup_constraints(&self, sources: &[TaxReturnInput], followups: &[TaxReturnInput]) -> bool {
        if sources.len() != followups.len() {
            return false;
        }
        let linked = sources.iter().zip(followups).all(|(x, y)| {
            x.equal_except(y, &self.exception_labels) && self.followup.iter().all(|r| r.holds(x, y))
        });
        // y and y′ share their exception values
        let shared = followups.windows(2).all(|w| {
            self.exception_labels.iter().all(|&f| w[0].get(f) == w[1].get(f))
        });
        linked && shared
    }

    /// Effective sampling range of each field of `x`.
    pub fn source_range(&self, f: Field, domain: &SamplingDomain) -> FieldRange {
        self.source_ranges
            .iter()
            .filter(|(g, _)| *g == f)
            .fold(domain.range(f).clone(), |acc, (_, r)| acc.intersect(r))
    }

    pub fn text(&self) -> String {
        let labels: Vec<_> = self.exception_labels.iter().map(|f| f.name()).collect();
        let mut parts = vec![self.source_text.to_string()];
        if let Some(pair) = &self.pair {
            let links: Vec<_> = pair.links.iter().map(|f| f.name()).collect();
            parts.push(format!("x ≡_{{{}}} x′", links.join(",")));
            parts.push(format!("x ≡_{{{0}}} y ∧ x′ ≡_{{{0}}} y′", labels.join(",")));
        } else {
            parts.push(format!("x ≡_{{{}}} y", labels.join(",")));
        }
        parts.extend(self.followup.iter().map(|r| r.text()));
        if self.pair.is_some() {
            parts.extend(self.exception_labels.iter().map(|f| format!("y.{f} = y′.{f}")));
        }
        parts.join(" ∧ ")
    }
}

#[derive(Debug, Clone)]
pub struct MetamorphicRelation {
    pub id: u8,
    pub domain_tag: DomainTag,
    pub arity: usize,
    /// Alternative metamorphoses; any one may generate a case.
    pub specs: Vec<MetamorphoseSpec>,
    pub comparator: OutputComparator,
}

impl MetamorphicRelation {
    /// Premise: some disjunct's source and follow-up constraints hold.
    pub fn premise_holds(&self, records: &[TaxReturnInput]) -> Result<bool, RelationError> {
        self.check_arity(records.len())?;
        let half = self.arity / 2;
        let (sources, followups) = records.split_at(half);
        Ok(self
            .specs
            .iter()
            .any(|s| s.source_constraints(sources) && s.followup_constraints(sources, followups)))
    }

    pub fn deviance(&self, outputs: &[Money]) -> Result<Money, RelationError> {
        self.check_arity(outputs.len())?;
        self.comparator
            .deviance(outputs)
            .map_err(|got| RelationError::ArityMismatch { relation: self.id, expected: self.arity, got })
    }

    fn check_arity(&self, got: usize) -> Result<(), RelationError> {
        if got != self.arity {
            return Err(RelationError::ArityMismatch { relation: self.id, expected: self.arity, got });
        }
        Ok(())
    }

    /// Position labels of the tuple, e.g. `["x", "y"]`.
    pub fn positions(&self) -> &'static [&'static str] {
        if self.arity == 4 {
            &["x", "x′", "y", "y′"]
        } else {
            &["x", "y"]
        }
    }

    pub fn premise_text(&self) -> String {
        let disjuncts: Vec<_> = self.specs.iter().map(|s| format!("({})", s.text())).collect();
        disjuncts.join(" ∨ ")
    }

    /// Full property, quantifiers included.
    pub fn formula(&self) -> String {
        let vars = self.positions().join(", ");
        format!("∀ {vars}: {} ⇒ {}", self.premise_text(), self.comparator.conclusion())
    }
}

// Premise constants, in cents.
const EITC_CAP_MFJ: i64 = 5_684_400;
const K160: i64 = 16_000_000;
const K180: i64 = 18_000_000;
const K200: i64 = 20_000_000;
const K400: i64 = 40_000_000;
const STANDARD_MFJ: i64 = 2_480_000;
const MDE_FLOOR_BP: i64 = 750;
const ONE_DOLLAR: i64 = 100;

const MFJ: i64 = 1;
const MFS: i64 = 2;

/// Schedule A total as the premises read it (7.5% medical floor).
pub fn schedule_a_total(r: &TaxReturnInput) -> Money {
    let floor = r.agi.mul_bp(MDE_FLOOR_BP);
    r.other_itemized + (r.mde - floor).max(Money::ZERO)
}

fn status(code: i64) -> (Field, FieldRange) {
    (Field::Sts, FieldRange::OneOf(vec![code]))
}

fn span(f: Field, lo: i64, hi: i64) -> (Field, FieldRange) {
    (f, FieldRange::Span(lo, hi))
}

fn spec(
    labels: &[Field],
    source_text: &'static str,
    source_ranges: Vec<(Field, FieldRange)>,
    source_holds: fn(&[TaxReturnInput]) -> bool,
    followup: Vec<FollowRule>,
) -> MetamorphoseSpec {
    MetamorphoseSpec {
        exception_labels: labels.to_vec(),
        source_text,
        source_ranges,
        pair: None,
        source_holds,
        followup,
    }
}

fn rel(id: u8, domain_tag: DomainTag, comparator: OutputComparator, specs: Vec<MetamorphoseSpec>) -> MetamorphicRelation {
    MetamorphicRelation { id, domain_tag, arity: comparator.arity(), specs, comparator }
}

/// The sixteen relations, ids 1-16.
pub fn catalog() -> Vec<MetamorphicRelation> {
    use DomainTag::*;
    use Field::*;
    use FollowRule::*;
    use OutputComparator as C;
    const MAX: i64 = i64::MAX;

    vec![
        rel(1, Disability, C::Geq, vec![
            spec(&[Age], "x.age ≥ 65", vec![span(Age, 65, MAX)], |s| s[0].age >= 65, vec![Below(Age, 65)]),
            spec(&[Blind], "x.blind", vec![span(Blind, 1, 1)], |s| s[0].blind, vec![Const(Blind, 0)]),
        ]),
        rel(2, Disability, C::Geq, vec![
            spec(
                &[SAge],
                "x.sts = MFJ ∧ x.s_age ≥ 65",
                vec![status(MFJ), span(SAge, 65, MAX)],
                |s| s[0].sts == FilingStatus::Mfj && s[0].s_age >= 65,
                vec![Below(SAge, 65)],
            ),
            spec(
                &[SBlind],
                "x.sts = MFJ ∧ x.s_blind",
                vec![status(MFJ), span(SBlind, 1, 1)],
                |s| s[0].sts == FilingStatus::Mfj && s[0].s_blind,
                vec![Const(SBlind, 0)],
            ),
        ]),
        rel(3, Eitc, C::Eq, vec![spec(
            &[L27],
            "x.sts = MFS ∧ x.L27 > 0",
            vec![status(MFS), span(L27, ONE_DOLLAR, MAX)],
            |s| s[0].sts == FilingStatus::Mfs && s[0].l27 > Money::ZERO,
            vec![Const(L27, 0)],
        )]),
        rel(4, Eitc, C::Eq, vec![spec(
            &[L27],
            "x.sts = MFJ ∧ x.AGI > 56844.00 ∧ x.L27 > 0",
            vec![status(MFJ), span(Agi, EITC_CAP_MFJ + 1, MAX), span(L27, ONE_DOLLAR, MAX)],
            |s| {
                s[0].sts == FilingStatus::Mfj
                    && s[0].agi.cents() > EITC_CAP_MFJ
                    && s[0].l27 > Money::ZERO
            },
            vec![Const(L27, 0)],
        )]),
        rel(5, Eitc, C::Geq, vec![
            spec(
                &[Agi],
                "x.sts = MFJ ∧ x.AGI ≤ 56844.00",
                vec![status(MFJ), span(Agi, 0, EITC_CAP_MFJ)],
                |s| s[0].sts == FilingStatus::Mfj && s[0].agi.cents() <= EITC_CAP_MFJ,
                vec![Above(Agi, EITC_CAP_MFJ)],
            ),
            spec(
                &[L27],
                "x.sts = MFJ ∧ x.L27 > 0",
                vec![status(MFJ), span(L27, ONE_DOLLAR, MAX)],
                |s| s[0].sts == FilingStatus::Mfj && s[0].l27 > Money::ZERO,
                vec![Const(L27, 0)],
            ),
            spec(
                &[Qc],
                "x.sts = MFJ ∧ x.QC ≥ 1",
                vec![status(MFJ), span(Qc, 1, MAX)],
                |s| s[0].sts == FilingStatus::Mfj && s[0].qc >= 1,
                vec![Const(Qc, 0)],
            ),
        ]),
        rel(6, Eitc, C::Geq, vec![spec(
            &[L27],
            "x.sts = MFJ ∧ x.AGI ≤ 56844.00 ∧ x.QC ≤ 3",
            vec![status(MFJ), span(Agi, 0, EITC_CAP_MFJ), span(Qc, 0, 3)],
            |s| s[0].sts == FilingStatus::Mfj && s[0].agi.cents() <= EITC_CAP_MFJ && s[0].qc <= 3,
            vec![AtMostSource(L27)],
        )]),
        rel(7, Ctc, C::Geq, vec![spec(
            &[L19],
            "x.sts = MFJ ∧ x.AGI ≤ 200000.00",
            vec![status(MFJ), span(Agi, 0, K200)],
            |s| s[0].sts == FilingStatus::Mfj && s[0].agi.cents() <= K200,
            vec![AtMostSource(L19)],
        )]),
        rel(8, Ctc, C::DiffGeq, vec![MetamorphoseSpec {
            exception_labels: vec![Qc, Od],
            source_text: "x.sts = x′.sts = MFJ ∧ x.AGI < 400000.00 ∧ x′.AGI ≥ 400000.00 \
                          ∧ ⌈x′.AGI − 400000⌉₁ₖ·0.05 < x′.QC·2000 + x.OD·500",
            // x income high enough that the nonrefundable credits are fully absorbed
            source_ranges: vec![status(MFJ), span(Agi, 10_000_000, K400 - 1), span(Iz, 0, 0)],
            pair: Some(PairSpec { links: vec![Agi], ranges: vec![span(Agi, K400, MAX)] }),
            source_holds: |s| {
                let (x, xp) = (&s[0], &s[1]);
                let steps = crate::money::div_ceil(xp.agi.cents() - K400, 100_000);
                let reduction = steps * 5_000;
                let cap = xp.qc as i64 * 200_000 + x.od as i64 * 50_000;
                x.sts == FilingStatus::Mfj
                    && xp.sts == FilingStatus::Mfj
                    && x.agi.cents() < K400
                    && xp.agi.cents() >= K400
                    && x.qc == xp.qc
                    && x.od == xp.od
                    && reduction < cap
            },
            followup: vec![AtMostSource(Qc), AtMostSource(Od)],
        }]),
        rel(9, Etc, C::Eq, vec![spec(
            &[L29],
            "x.sts = MFS ∧ x.L29 > 0",
            vec![status(MFS), span(L29, ONE_DOLLAR, MAX)],
            |s| s[0].sts == FilingStatus::Mfs && s[0].l29 > Money::ZERO,
            vec![Const(L29, 0)],
        )]),
        rel(10, Etc, C::Eq, vec![spec(
            &[L29],
            "x.sts = MFJ ∧ x.AGI > 180000.00 ∧ x.L29 > 0",
            vec![status(MFJ), span(Agi, K180 + 1, MAX), span(L29, ONE_DOLLAR, MAX)],
            |s| s[0].sts == FilingStatus::Mfj && s[0].agi.cents() > K180 && s[0].l29 > Money::ZERO,
            vec![Const(L29, 0)],
        )]),
        rel(11, Etc, C::Geq, vec![spec(
            &[L29],
            "x.sts = MFJ ∧ x.AGI < 160000.00",
            vec![status(MFJ), span(Agi, 0, K160 - 1)],
            |s| s[0].sts == FilingStatus::Mfj && s[0].agi.cents() < K160,
            vec![AtMostSource(L29)],
        )]),
        rel(12, Etc, C::DiffGeq, vec![MetamorphoseSpec {
            exception_labels: vec![L29],
            source_text: "x.sts = x′.sts = MFJ ∧ x.AGI ≤ 160000.00 ∧ 160000.00 ≤ x′.AGI ≤ 180000.00 \
                          ∧ x.L29 = x′.L29",
            source_ranges: vec![status(MFJ), span(Agi, 10_000_000, K160), span(Iz, 0, 0)],
            pair: Some(PairSpec { links: vec![Agi], ranges: vec![span(Agi, K160, K180)] }),
            source_holds: |s| {
                let (x, xp) = (&s[0], &s[1]);
                x.sts == FilingStatus::Mfj
                    && xp.sts == FilingStatus::Mfj
                    && x.agi.cents() <= K160
                    && (K160..=K180).contains(&xp.agi.cents())
                    && x.l29 == xp.l29
            },
            followup: vec![AtMostSource(L29)],
        }]),
        rel(13, Id, C::Eq, vec![spec(
            &[Mde],
            "x.iz ∧ x.other_itemized = 0 ∧ 0 < x.MDE ≤ 7.5%·x.AGI",
            vec![span(Iz, 1, 1), span(OtherItemized, 0, 0), span(Mde, 1, MAX)],
            |s| {
                let x = &s[0];
                x.iz && x.other_itemized == Money::ZERO
                    && x.mde > Money::ZERO
                    && x.mde.cents() as i128 * 10_000 <= x.agi.cents() as i128 * MDE_FLOOR_BP as i128
            },
            vec![Const(Mde, 0)],
        )]),
        rel(14, Id, C::Eq, vec![spec(
            &[Mde, OtherItemized],
            "¬x.iz ∧ x.L12 > 0",
            vec![span(Iz, 0, 0)],
            |s| !s[0].iz && schedule_a_total(&s[0]) > Money::ZERO,
            vec![Const(Mde, 0), Const(OtherItemized, 0)],
        )]),
        rel(15, Id, C::Leq, vec![spec(
            &[Iz, Mde, OtherItemized],
            "x.sts = MFJ ∧ x.iz ∧ x.L12 ≤ 24800.00",
            vec![status(MFJ), span(Iz, 1, 1), span(Mde, 0, STANDARD_MFJ), span(OtherItemized, 0, STANDARD_MFJ)],
            |s| s[0].sts == FilingStatus::Mfj && s[0].iz && schedule_a_total(&s[0]).cents() <= STANDARD_MFJ,
            vec![Const(Iz, 0), Const(Mde, 0), Const(OtherItemized, 0)],
        )]),
        rel(16, Id, C::Geq, vec![spec(
            &[Iz, Mde, OtherItemized],
            "x.sts = MFJ ∧ x.iz ∧ x.L12 > 24800.00 ∧ x.age < 65 ∧ ¬x.blind ∧ x.s_age < 65 ∧ ¬x.s_blind",
            vec![
                status(MFJ),
                span(Iz, 1, 1),
                span(Age, 0, 64),
                span(Blind, 0, 0),
                span(SAge, 0, 64),
                span(SBlind, 0, 0),
            ],
            |s| {
                let x = &s[0];
                x.sts == FilingStatus::Mfj
                    && x.iz
                    && schedule_a_total(x).cents() > STANDARD_MFJ
                    && x.age < 65
                    && !x.blind
                    && x.s_age < 65
                    && !x.s_blind
            },
            vec![Const(Iz, 0), Const(Mde, 0), Const(OtherItemized, 0)],
        )]),
    ]
}

/// Looks up one relation by id.
pub fn relation(id: u32) -> Result<MetamorphicRelation, RelationError> {
    catalog()
        .into_iter()
        .find(|r| r.id as u32 == id)
        .ok_or(RelationError::UnknownId(id))
}

/// One line per relation: id, domain, comparator, formula.
pub fn listing() -> String {
    let mut out = String::new();
    for r in catalog() {
        out.push_str(&format!(
            "{:>2}  {:<10} {:<8} {}\n",
            r.id,
            r.domain_tag.to_string(),
            r.comparator.to_string(),
            r.formula()
        ));
    }
    out
}
