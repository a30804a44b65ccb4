//! Simplified 2020 Form 1040 federal-return function and its seeded mutants.
//!
//! The engine models AGI as an input, treats the three credit lines as
//! claimed amounts checked for eligibility, and returns
//! `withholding + EITC − max(0, tax − CTC − ETC)` in cents. EITC is
//! refundable; CTC and ETC are not.

use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::money::{div_ceil, Money};
use crate::params::TaxParams;
use crate::record::{FilingStatus, TaxReturnInput};

/// A system under test: anything that maps a filing record to a return.
pub trait Sut {
    fn federal_tax_return(&mut self, record: &TaxReturnInput) -> Result<Money, SutError>;
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum SutError {
    #[error("engine reply is not a dollar amount: {0:?}")]
    BadReply(String),
    #[error("engine exited: {0}")]
    Exited(String),
    #[error("engine did not reply within {0:?}")]
    Timeout(std::time::Duration),
    #[error("engine i/o failure: {0}")]
    Io(String),
}

/// Seeded faults, one per failure class the harness must find and explain.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum MutantId {
    /// EITC granted to MFS filers.
    #[serde(rename = "M1_EITC_MFS")]
    M1EitcMfs,
    /// EITC ignores the MFJ AGI cap.
    #[serde(rename = "M2_EITC_AGI_CAP")]
    M2EitcAgiCap,
    /// Near-zero liabilities fold the credit remainder with `abs` instead of clamping.
    #[serde(rename = "M3_ZERO_CROSS")]
    M3ZeroCross,
    /// Medical expenses deducted without the AGI floor.
    #[serde(rename = "M4_MDE_FLOOR")]
    M4MdeFloor,
    /// Itemized totals just above the standard deduction are rounded down to whole ten-thousands.
    #[serde(rename = "M5_ITEMIZED_ROUND")]
    M5ItemizedRound,
}

impl MutantId {
    pub const ALL: [MutantId; 5] = [
        MutantId::M1EitcMfs,
        MutantId::M2EitcAgiCap,
        MutantId::M3ZeroCross,
        MutantId::M4MdeFloor,
        MutantId::M5ItemizedRound,
    ];

    pub fn code(self) -> &'static str {
        match self {
            MutantId::M1EitcMfs => "M1_EITC_MFS",
            MutantId::M2EitcAgiCap => "M2_EITC_AGI_CAP",
            MutantId::M3ZeroCross => "M3_ZERO_CROSS",
            MutantId::M4MdeFloor => "M4_MDE_FLOOR",
            MutantId::M5ItemizedRound => "M5_ITEMIZED_ROUND",
        }
    }

    pub fn short(self) -> &'static str {
        &self.code()[..2]
    }

    pub fn description(self) -> &'static str {
        match self {
            MutantId::M1EitcMfs => "EITC eligibility skips the MFS exclusion",
            MutantId::M2EitcAgiCap => "EITC eligibility skips the MFJ AGI cap",
            MutantId::M3ZeroCross => {
                "tax under $250 takes |tax - credits| instead of max(0, tax - credits)"
            }
            MutantId::M4MdeFloor => "itemized medical expenses skip the 7.5% AGI floor",
            MutantId::M5ItemizedRound => {
                "itemized totals below standard + $2,000 are rounded down to whole ten-thousands"
            }
        }
    }
}

impl fmt::Display for MutantId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.code())
    }
}

impl FromStr for MutantId {
    type Err = String;
    /// Accepts the full code (`M1_EITC_MFS`) or its short form (`M1`).
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let up = s.to_ascii_uppercase();
        MutantId::ALL
            .into_iter()
            .find(|m| m.code() == up || m.short() == up)
            .ok_or_else(|| format!("unknown mutant {s:?}"))
    }
}

/// Liability below which the M3 fault engages.
const M3_TRIGGER: Money = Money::dollars(250);
/// Width of the band above the standard deduction where the M5 fault engages.
const M5_BAND: Money = Money::dollars(2_000);

/// Reference engine, or a mutant of it. Immutable and cheap to clone.
#[derive(Debug, Clone)]
pub struct Engine {
    params: Arc<TaxParams>,
    mutant: Option<MutantId>,
}

impl Default for Engine {
    fn default() -> Self {
        Engine::reference()
    }
}

impl Engine {
    /// Reference engine on the embedded 2020 parameters.
    pub fn reference() -> Engine {
        Engine::with_params(Arc::new(TaxParams::tax_year_2020()))
    }

    pub fn with_params(params: Arc<TaxParams>) -> Engine {
        Engine { params, mutant: None }
    }

    /// Reference engine with one seeded fault.
    pub fn mutant(id: MutantId) -> Engine {
        Engine { mutant: Some(id), ..Engine::reference() }
    }

    pub fn with_mutant(&self, id: Option<MutantId>) -> Engine {
        Engine { params: Arc::clone(&self.params), mutant: id }
    }

    pub fn mutant_id(&self) -> Option<MutantId> {
        self.mutant
    }

    pub fn params(&self) -> &TaxParams {
        &self.params
    }

    fn is(&self, id: MutantId) -> bool {
        self.mutant == Some(id)
    }

    pub fn standard_deduction(&self, r: &TaxReturnInput) -> Money {
        let p = &*self.params;
        let senior = |age: u16| age >= p.senior_age;
        let mut flags = senior(r.age) as i64 + r.blind as i64;
        if r.sts == FilingStatus::Mfj {
            flags += senior(r.s_age) as i64 + r.s_blind as i64;
        }
        let addon = if r.sts == FilingStatus::Mfj { p.addon_mfj } else { p.addon_other };
        p.standard_base(r.sts) + Money::from_cents(addon.cents() * flags)
    }

    /// Schedule A total (L12): other itemized plus medical expenses over the AGI floor.
    pub fn schedule_a_total(&self, r: &TaxReturnInput) -> Money {
        let mde = if self.is(MutantId::M4MdeFloor) {
            r.mde
        } else {
            (r.mde - r.agi.mul_bp(self.params.mde_floor_bp)).max(Money::ZERO)
        };
        r.other_itemized + mde
    }

    /// Standard deduction, or the claimed Schedule A total when itemizing.
    pub fn deduction_amount(&self, r: &TaxReturnInput) -> Money {
        if !r.iz {
            return self.standard_deduction(r);
        }
        let l12 = self.schedule_a_total(r);
        if self.is(MutantId::M5ItemizedRound) && l12 < self.standard_deduction(r) + M5_BAND {
            let unit = Money::dollars(10_000).cents();
            return Money::from_cents(l12.cents() / unit * unit);
        }
        l12
    }

    /// Progressive bracket tax on `taxable`, rounded to cents.
    pub fn tax_before_credits(&self, taxable: Money, sts: FilingStatus) -> Money {
        let taxable = taxable.max(Money::ZERO);
        let mut tax = Money::ZERO;
        let mut lower = Money::ZERO;
        for b in self.params.brackets(sts) {
            let upper = b.upto.map_or(taxable, |u| u.min(taxable));
            if upper > lower {
                tax += (upper - lower).mul_bp(b.rate_bp);
            }
            match b.upto {
                Some(u) if u < taxable => lower = u,
                _ => break,
            }
        }
        tax
    }

    pub fn eligible_eitc(&self, r: &TaxReturnInput) -> Money {
        let p = &*self.params;
        let eligible = match r.sts {
            FilingStatus::Mfs => self.is(MutantId::M1EitcMfs),
            FilingStatus::Mfj => self.is(MutantId::M2EitcAgiCap) || r.agi <= p.eitc_cap_mfj,
            FilingStatus::Single | FilingStatus::Hoh => r.agi <= p.eitc_cap_other,
        };
        if eligible {
            r.l27
        } else {
            Money::ZERO
        }
    }

    pub fn eligible_ctc(&self, r: &TaxReturnInput) -> Money {
        let p = &*self.params;
        let cap = Money::from_cents(
            p.ctc_per_child.cents() * r.qc as i64 + p.ctc_per_other.cents() * r.od as i64,
        );
        let claim = r.l19.min(cap);
        if r.sts == FilingStatus::Mfj && r.agi > p.ctc_phaseout_start_mfj {
            let steps = div_ceil((r.agi - p.ctc_phaseout_start_mfj).cents(), p.ctc_step.cents());
            let reduction = Money::from_cents(steps * p.ctc_reduction_per_step.cents());
            (claim - reduction).max(Money::ZERO)
        } else {
            claim
        }
    }

    pub fn eligible_etc(&self, r: &TaxReturnInput) -> Money {
        let p = &*self.params;
        let (start, end) = match r.sts {
            FilingStatus::Mfs => return Money::ZERO,
            FilingStatus::Mfj => (p.etc_start_mfj, p.etc_end_mfj),
            FilingStatus::Single | FilingStatus::Hoh => (p.etc_start_other, p.etc_end_other),
        };
        if r.agi <= start {
            r.l29
        } else if r.agi >= end {
            Money::ZERO
        } else {
            r.l29.mul_ratio((end - r.agi).cents(), (end - start).cents())
        }
    }

    /// Federal tax return; negative means the filer owes.
    pub fn federal_tax_return(&self, r: &TaxReturnInput) -> Money {
        let taxable = (r.agi - self.deduction_amount(r)).max(Money::ZERO);
        let owed = self.tax_before_credits(taxable, r.sts);
        let credits = self.eligible_ctc(r) + self.eligible_etc(r);
        let owed = if self.is(MutantId::M3ZeroCross) && owed < M3_TRIGGER {
            (owed - credits).abs()
        } else {
            (owed - credits).max(Money::ZERO)
        };
        r.withholding + self.eligible_eitc(r) - owed
    }
}

impl Sut for Engine {
    fn federal_tax_return(&mut self, record: &TaxReturnInput) -> Result<Money, SutError> {
        Ok(Engine::federal_tax_return(self, record))
    }
}

impl<S: Sut + ?Sized> Sut for &mut S {
    fn federal_tax_return(&mut self, record: &TaxReturnInput) -> Result<Money, SutError> {
        (**self).federal_tax_return(record)
    }
}

impl<S: Sut + ?Sized> Sut for Box<S> {
    fn federal_tax_return(&mut self, record: &TaxReturnInput) -> Result<Money, SutError> {
        (**self).federal_tax_return(record)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::record::Field;

    fn d(x: i64) -> Money {
        Money::dollars(x)
    }

    fn mfj(agi: i64) -> TaxReturnInput {
        TaxReturnInput::new(FilingStatus::Mfj).with(Field::Agi, d(agi).cents())
    }

    /// Hand bracket evaluation, independent of the engine's loop.
    fn hand_tax(taxable_cents: i64, edges: &[(i64, i64)]) -> i64 {
        let mut tax = 0i128;
        let mut lo = 0i64;
        for &(hi, bp) in edges {
            if taxable_cents > lo {
                let span = taxable_cents.min(hi) - lo;
                tax += span as i128 * bp as i128;
            }
            lo = hi;
        }
        // sum of exact products, then round once; engine rounds per bracket,
        // so compare within a cent per bracket.
        (tax / 10_000) as i64
    }

    #[test]
    fn deduction_examples() {
        let e = Engine::reference();
        assert_eq!(e.deduction_amount(&mfj(50_000)), d(24_800));
        let mut r = mfj(100_000);
        r.iz = true;
        assert_eq!(e.deduction_amount(&r), Money::ZERO);
        r.mde = d(7_500);
        r.other_itemized = d(1_000);
        assert_eq!(e.deduction_amount(&r), d(1_000));
        r.mde = d(9_000);
        assert_eq!(e.deduction_amount(&r), d(2_500));
    }

    #[test]
    fn standard_addons() {
        let e = Engine::reference();
        let mut r = mfj(0);
        r.age = 70;
        r.s_blind = true;
        assert_eq!(e.deduction_amount(&r), d(24_800 + 2 * 1_300));
        let mut s = TaxReturnInput::new(FilingStatus::Single);
        s.age = 65;
        s.blind = true;
        assert_eq!(e.deduction_amount(&s), d(12_400 + 2 * 1_650));
        // spouse flags only count for MFJ
        let mut m = TaxReturnInput::new(FilingStatus::Mfs);
        m.s_age = 80;
        assert_eq!(e.deduction_amount(&m), d(12_400));
    }

    #[test]
    fn tax_examples() {
        let e = Engine::reference();
        assert_eq!(e.tax_before_credits(Money::ZERO, FilingStatus::Mfj), Money::ZERO);
        assert_eq!(e.tax_before_credits(d(5_200), FilingStatus::Mfj), d(520));
        assert_eq!(e.tax_before_credits(d(19_750), FilingStatus::Mfj), d(1_975));
        // 1,975 + 12% of 60,500 + 22% of 19,750
        assert_eq!(
            e.tax_before_credits(d(100_000), FilingStatus::Mfj),
            Money::from_cents(197_500 + 726_000 + 434_500)
        );
    }

    #[test]
    fn tax_matches_hand_brackets() {
        let e = Engine::reference();
        let edges: Vec<(i64, i64)> = e
            .params()
            .brackets(FilingStatus::Single)
            .iter()
            .map(|b| (b.upto.map_or(i64::MAX, Money::cents), b.rate_bp))
            .collect();
        for taxable in [0, 1, 987_500, 987_501, 4_012_500, 10_000_000, 60_000_000] {
            let got = e.tax_before_credits(Money::from_cents(taxable), FilingStatus::Single);
            let want = hand_tax(taxable, &edges);
            assert!((got.cents() - want).abs() <= 7, "{taxable}: {got} vs {want}");
        }
    }

    #[test]
    fn eitc_examples() {
        let e = Engine::reference();
        let mut r = TaxReturnInput::new(FilingStatus::Mfs);
        r.l27 = d(1_000);
        assert_eq!(e.eligible_eitc(&r), Money::ZERO);
        let mut r = mfj(56_845);
        r.l27 = d(1_000);
        assert_eq!(e.eligible_eitc(&r), Money::ZERO);
        r.agi = d(56_844);
        assert_eq!(e.eligible_eitc(&r), d(1_000));
        assert_eq!(e.eligible_eitc(&mfj(40_000)), Money::ZERO);
    }

    #[test]
    fn ctc_examples() {
        let e = Engine::reference();
        let mut r = mfj(50_000);
        r.l19 = d(500);
        assert_eq!(e.eligible_ctc(&r), Money::ZERO);
        let mut r = mfj(200_000);
        r.qc = 1;
        r.l19 = d(1_000);
        assert_eq!(e.eligible_ctc(&r), d(1_000));
        let mut r = mfj(401_000);
        r.qc = 2;
        r.l19 = d(1_000);
        assert_eq!(e.eligible_ctc(&r), d(950));
        r.agi = Money::from_cents(d(401_000).cents() + 1);
        assert_eq!(e.eligible_ctc(&r), d(900));
        r.agi = d(500_000);
        assert_eq!(e.eligible_ctc(&r), Money::ZERO);
    }

    #[test]
    fn etc_examples() {
        let e = Engine::reference();
        let mut r = TaxReturnInput::new(FilingStatus::Mfs);
        r.l29 = d(800);
        assert_eq!(e.eligible_etc(&r), Money::ZERO);
        let mut r = mfj(150_000);
        r.l29 = d(800);
        assert_eq!(e.eligible_etc(&r), d(800));
        r.agi = d(170_000);
        assert_eq!(e.eligible_etc(&r), d(400));
        r.agi = d(180_000);
        assert_eq!(e.eligible_etc(&r), Money::ZERO);
        let mut s = TaxReturnInput::new(FilingStatus::Single).with(Field::Agi, d(85_000).cents());
        s.l29 = d(800);
        assert_eq!(e.eligible_etc(&s), d(400));
    }

    #[test]
    fn return_examples() {
        let e = Engine::reference();
        assert_eq!(e.federal_tax_return(&mfj(24_800)), Money::ZERO);
        assert_eq!(e.federal_tax_return(&mfj(30_000)), d(-520));
        let x = TaxReturnInput::new(FilingStatus::Mfs)
            .with(Field::Agi, d(30_000).cents())
            .with(Field::L27, d(1_000).cents());
        let y = x.clone().with(Field::L27, 0);
        // taxable 17,600: 987.50 + 12% of 7,725
        assert_eq!(e.federal_tax_return(&y), Money::from_cents(-(98_750 + 92_700)));
        assert_eq!(e.federal_tax_return(&x), e.federal_tax_return(&y));
    }

    #[test]
    fn mutant_examples() {
        let e = Engine::reference();
        let x = TaxReturnInput::new(FilingStatus::Mfs)
            .with(Field::Agi, d(30_000).cents())
            .with(Field::L27, d(1_000).cents());
        let y = x.clone().with(Field::L27, 0);
        let m1 = Engine::mutant(MutantId::M1EitcMfs);
        assert_eq!(m1.federal_tax_return(&x) - m1.federal_tax_return(&y), d(1_000));

        let mut r = mfj(100_000);
        r.iz = true;
        r.mde = d(5_000);
        let m4 = Engine::mutant(MutantId::M4MdeFloor);
        assert_eq!(m4.deduction_amount(&r), d(5_000));
        assert_eq!(e.deduction_amount(&r), Money::ZERO);

        let mut r = mfj(60_000);
        r.l27 = d(1_000);
        assert_eq!(Engine::mutant(MutantId::M2EitcAgiCap).eligible_eitc(&r), d(1_000));
        assert_eq!(e.eligible_eitc(&r), Money::ZERO);

        let mut r = mfj(80_000);
        r.iz = true;
        r.other_itemized = d(25_500);
        let m5 = Engine::mutant(MutantId::M5ItemizedRound);
        assert_eq!(m5.deduction_amount(&r), d(20_000));
        assert_eq!(e.deduction_amount(&r), d(25_500));
        r.other_itemized = d(26_800);
        assert_eq!(m5.deduction_amount(&r), d(26_800));
        let mut y = r.clone();
        y.iz = false;
        y.other_itemized = Money::ZERO;
        r.other_itemized = d(25_000);
        // y takes the 24,800 standard deduction, x rounds down to 20,000
        assert!(m5.federal_tax_return(&r) < m5.federal_tax_return(&y));
        assert!(e.federal_tax_return(&r) >= e.federal_tax_return(&y));
    }

    #[test]
    fn mutant_codes_parse() {
        for m in MutantId::ALL {
            assert_eq!(m.code().parse::<MutantId>().unwrap(), m);
            assert_eq!(m.short().parse::<MutantId>().unwrap(), m);
            let json = serde_json::to_string(&m).unwrap();
            assert_eq!(json, format!("\"{}\"", m.code()));
        }
        assert!("M9".parse::<MutantId>().is_err());
    }
}
