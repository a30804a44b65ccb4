//! Versioned tax-parameter tables (brackets, deductions, credit thresholds).
//!
//! The 2020 table ships embedded; [`TaxParams::from_toml_str`] loads an
//! alternative file with the same schema.

use std::collections::BTreeMap;
use std::path::Path;

use serde::Deserialize;

use crate::money::Money;
use crate::record::FilingStatus;

pub const SCHEMA_VERSION: u32 = 1;

const TAX_2020: &str = include_str!("../data/tax2020.toml");

#[derive(Debug, thiserror::Error)]
pub enum ParamsError {
    #[error("cannot read parameter file: {0}")]
    Io(#[from] std::io::Error),
    #[error("malformed parameter file: {0}")]
    Toml(#[from] toml::de::Error),
    #[error("unsupported schema_version {0} (expected {SCHEMA_VERSION})")]
    Version(u32),
    #[error("invalid parameters: {0}")]
    Invalid(String),
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawParams {
    schema_version: u32,
    tax_year: u32,
    standard_deduction: RawStandard,
    itemized: RawItemized,
    eitc: RawEitc,
    ctc: RawCtc,
    etc: RawEtc,
    brackets: BTreeMap<String, Vec<RawBracket>>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawStandard {
    single: i64,
    mfj: i64,
    mfs: i64,
    hoh: i64,
    addon: RawAddon,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawAddon {
    mfj: i64,
    other: i64,
    age_threshold: u16,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawItemized {
    mde_floor_bp: i64,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawEitc {
    agi_cap_mfj: i64,
    agi_cap_other: i64,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawCtc {
    per_child: i64,
    per_other_dependent: i64,
    phaseout_start_mfj: i64,
    step: i64,
    reduction_per_step: i64,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawEtc {
    phaseout_start_mfj: i64,
    phaseout_end_mfj: i64,
    phaseout_start_other: i64,
    phaseout_end_other: i64,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawBracket {
    upto: Option<i64>,
    rate_bp: i64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Bracket {
    /// Upper edge of the bracket; `None` for the top bracket.
    pub upto: Option<Money>,
    pub rate_bp: i64,
}

/// Validated parameters for one tax year.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TaxParams {
    pub tax_year: u32,
    /// Indexed by [`FilingStatus::code`].
    pub standard: [Money; 4],
    pub addon_mfj: Money,
    pub addon_other: Money,
    pub senior_age: u16,
    pub mde_floor_bp: i64,
    pub eitc_cap_mfj: Money,
    pub eitc_cap_other: Money,
    pub ctc_per_child: Money,
    pub ctc_per_other: Money,
    pub ctc_phaseout_start_mfj: Money,
    pub ctc_step: Money,
    pub ctc_reduction_per_step: Money,
    pub etc_start_mfj: Money,
    pub etc_end_mfj: Money,
    pub etc_start_other: Money,
    pub etc_end_other: Money,
    /// Indexed by [`FilingStatus::code`].
    pub brackets: [Vec<Bracket>; 4],
}

impl TaxParams {
    /// The embedded 2020 table.
    pub fn tax_year_2020() -> TaxParams {
        Self::from_toml_str(TAX_2020).expect("embedded 2020 parameters are valid")
    }

    pub fn load(path: &Path) -> Result<TaxParams, ParamsError> {
        Self::from_toml_str(&std::fs::read_to_string(path)?)
    }

    pub fn from_toml_str(text: &str) -> Result<TaxParams, ParamsError> {
        let raw: RawParams = toml::from_str(text)?;
        if raw.schema_version != SCHEMA_VERSION {
            return Err(ParamsError::Version(raw.schema_version));
        }
        let d = Money::dollars;
        let mut brackets: [Vec<Bracket>; 4] = Default::default();
        for sts in FilingStatus::ALL {
            let key = sts.label().to_ascii_lowercase();
            let rows = raw
                .brackets
                .get(&key)
                .ok_or_else(|| ParamsError::Invalid(format!("no bracket table for {sts}")))?;
            brackets[sts.code() as usize] = validate_brackets(sts, rows)?;
        }
        if let Some(extra) = raw
            .brackets
            .keys()
            .find(|k| k.parse::<FilingStatus>().is_err())
        {
            return Err(ParamsError::Invalid(format!("unknown filing status table {extra:?}")));
        }
        let p = TaxParams {
            tax_year: raw.tax_year,
            standard: [
                d(raw.standard_deduction.single),
                d(raw.standard_deduction.mfj),
                d(raw.standard_deduction.mfs),
                d(raw.standard_deduction.hoh),
            ],
            addon_mfj: d(raw.standard_deduction.addon.mfj),
            addon_other: d(raw.standard_deduction.addon.other),
            senior_age: raw.standard_deduction.addon.age_threshold,
            mde_floor_bp: raw.itemized.mde_floor_bp,
            eitc_cap_mfj: d(raw.eitc.agi_cap_mfj),
            eitc_cap_other: d(raw.eitc.agi_cap_other),
            ctc_per_child: d(raw.ctc.per_child),
            ctc_per_other: d(raw.ctc.per_other_dependent),
            ctc_phaseout_start_mfj: d(raw.ctc.phaseout_start_mfj),
            ctc_step: d(raw.ctc.step),
            ctc_reduction_per_step: d(raw.ctc.reduction_per_step),
            etc_start_mfj: d(raw.etc.phaseout_start_mfj),
            etc_end_mfj: d(raw.etc.phaseout_end_mfj),
            etc_start_other: d(raw.etc.phaseout_start_other),
            etc_end_other: d(raw.etc.phaseout_end_other),
            brackets,
        };
        p.check()?;
        Ok(p)
    }

    fn check(&self) -> Result<(), ParamsError> {
        let bad = |m: &str| Err(ParamsError::Invalid(m.to_string()));
        let all_money = [
            self.addon_mfj,
            self.addon_other,
            self.eitc_cap_mfj,
            self.eitc_cap_other,
            self.ctc_per_child,
            self.ctc_per_other,
            self.ctc_phaseout_start_mfj,
            self.ctc_reduction_per_step,
            self.etc_start_mfj,
            self.etc_start_other,
        ];
        if self.standard.iter().chain(all_money.iter()).any(|m| *m < Money::ZERO) {
            return bad("amounts must be non-negative");
        }
        if !(0..=10_000).contains(&self.mde_floor_bp) {
            return bad("mde_floor_bp must lie in [0, 10000]");
        }
        if self.ctc_step <= Money::ZERO {
            return bad("ctc.step must be positive");
        }
        if self.etc_end_mfj <= self.etc_start_mfj || self.etc_end_other <= self.etc_start_other {
            return bad("etc phase-out end must exceed its start");
        }
        Ok(())
    }

    pub fn standard_base(&self, sts: FilingStatus) -> Money {
        self.standard[sts.code() as usize]
    }

    pub fn brackets(&self, sts: FilingStatus) -> &[Bracket] {
        &self.brackets[sts.code() as usize]
    }
}

fn validate_brackets(sts: FilingStatus, rows: &[RawBracket]) -> Result<Vec<Bracket>, ParamsError> {
    let invalid = |m: String| ParamsError::Invalid(format!("{sts} brackets: {m}"));
    if rows.is_empty() {
        return Err(invalid("empty table".into()));
    }
    let mut out = Vec::with_capacity(rows.len());
    let mut prev = 0;
    let mut prev_rate = 0;
    for (i, row) in rows.iter().enumerate() {
        let last = i + 1 == rows.len();
        match (row.upto, last) {
            (Some(_), true) => return Err(invalid("top bracket must omit `upto`".into())),
            (None, false) => return Err(invalid(format!("bracket {i} lacks `upto`"))),
            (Some(u), false) if u <= prev => {
                return Err(invalid(format!("bracket {i} edge {u} is not increasing")))
            }
            _ => {}
        }
        if !(0..=10_000).contains(&row.rate_bp) || row.rate_bp < prev_rate {
            return Err(invalid(format!("bracket {i} rate must be in [0, 10000] and non-decreasing")));
        }
        prev = row.upto.unwrap_or(prev);
        prev_rate = row.rate_bp;
        out.push(Bracket { upto: row.upto.map(Money::dollars), rate_bp: row.rate_bp });
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn embedded_table_loads() {
        let p = TaxParams::tax_year_2020();
        assert_eq!(p.tax_year, 2020);
        assert_eq!(p.standard_base(FilingStatus::Mfj), Money::dollars(24_800));
        assert_eq!(p.standard_base(FilingStatus::Mfs), Money::dollars(12_400));
        assert_eq!(p.standard_base(FilingStatus::Hoh), Money::dollars(18_650));
        assert_eq!(p.eitc_cap_mfj, Money::dollars(56_844));
        assert_eq!(p.brackets(FilingStatus::Mfj)[0].upto, Some(Money::dollars(19_750)));
        assert_eq!(p.brackets(FilingStatus::Mfj).len(), 7);
    }

    #[test]
    fn missing_status_table_rejected() {
        let text = TAX_2020.replace("[[brackets.hoh]]", "[[brackets.hxx]]");
        let err = TaxParams::from_toml_str(&text).unwrap_err();
        assert!(matches!(err, ParamsError::Invalid(_)), "{err}");
    }

    #[test]
    fn wrong_version_rejected() {
        let text = TAX_2020.replace("schema_version = 1", "schema_version = 9");
        assert!(matches!(TaxParams::from_toml_str(&text), Err(ParamsError::Version(9))));
    }

    #[test]
    fn non_monotone_brackets_rejected() {
        let text = TAX_2020.replacen("upto = 40125", "upto = 5000", 1);
        assert!(matches!(TaxParams::from_toml_str(&text), Err(ParamsError::Invalid(_))));
    }
}
