//! One individual's filing record and its field-level view.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::money::Money;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum FilingStatus {
    Single,
    #[serde(rename = "MFJ")]
    Mfj,
    #[serde(rename = "MFS")]
    Mfs,
    #[serde(rename = "HOH")]
    Hoh,
}

impl FilingStatus {
    pub const ALL: [FilingStatus; 4] = [
        FilingStatus::Single,
        FilingStatus::Mfj,
        FilingStatus::Mfs,
        FilingStatus::Hoh,
    ];

    /// Integer code used in feature frames: Single=0, MFJ=1, MFS=2, HOH=3.
    pub fn code(self) -> i64 {
        match self {
            FilingStatus::Single => 0,
            FilingStatus::Mfj => 1,
            FilingStatus::Mfs => 2,
            FilingStatus::Hoh => 3,
        }
    }

    pub fn from_code(code: i64) -> Option<Self> {
        Self::ALL.get(usize::try_from(code).ok()?).copied()
    }

    /// Spouse fields are meaningful only for the married statuses.
    pub fn is_married(self) -> bool {
        matches!(self, FilingStatus::Mfj | FilingStatus::Mfs)
    }

    pub fn label(self) -> &'static str {
        match self {
            FilingStatus::Single => "Single",
            FilingStatus::Mfj => "MFJ",
            FilingStatus::Mfs => "MFS",
            FilingStatus::Hoh => "HOH",
        }
    }
}

impl fmt::Display for FilingStatus {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

impl FromStr for FilingStatus {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_uppercase().as_str() {
            "SINGLE" => Ok(FilingStatus::Single),
            "MFJ" => Ok(FilingStatus::Mfj),
            "MFS" => Ok(FilingStatus::Mfs),
            "HOH" => Ok(FilingStatus::Hoh),
            _ => Err(format!("unknown filing status {s:?}")),
        }
    }
}

pub const MAX_DEPENDENTS: u8 = 10;
pub const MIN_AGE: u16 = 18;

/// A filing record. Dollar fields are cents; `agi` is a direct input.
///
/// The serde form doubles as the wire format for external engines and the
/// suite files: money as integer cents, flags as booleans, status as a
/// string code.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TaxReturnInput {
    pub sts: FilingStatus,
    pub age: u16,
    pub blind: bool,
    pub s_age: u16,
    pub s_blind: bool,
    pub agi: Money,
    pub withholding: Money,
    pub l27: Money,
    pub qc: u8,
    pub od: u8,
    pub l19: Money,
    pub l29: Money,
    pub mde: Money,
    pub other_itemized: Money,
    pub iz: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum InputError {
    #[error("{0} must be non-negative")]
    NegativeAmount(&'static str),
    #[error("{field} = {value} is below the minimum age {MIN_AGE}")]
    Underage { field: &'static str, value: u16 },
    #[error("{field} = {value} exceeds {MAX_DEPENDENTS}")]
    TooManyDependents { field: &'static str, value: u8 },
}

impl TaxReturnInput {
    /// A single, 40-year-old filer with every amount zero.
    pub fn new(sts: FilingStatus) -> Self {
        let mut r = TaxReturnInput {
            sts,
            age: 40,
            blind: false,
            s_age: 40,
            s_blind: false,
            agi: Money::ZERO,
            withholding: Money::ZERO,
            l27: Money::ZERO,
            qc: 0,
            od: 0,
            l19: Money::ZERO,
            l29: Money::ZERO,
            mde: Money::ZERO,
            other_itemized: Money::ZERO,
            iz: false,
        };
        r.canonicalize();
        r
    }

    /// Zeroes the spouse fields for unmarried statuses.
    pub fn canonicalize(&mut self) {
        if !self.sts.is_married() {
            self.s_age = 0;
            self.s_blind = false;
        }
    }

    pub fn canonicalized(mut self) -> Self {
        self.canonicalize();
        self
    }

    pub fn validate(&self) -> Result<(), InputError> {
        for (name, m) in [
            ("agi", self.agi),
            ("withholding", self.withholding),
            ("l27", self.l27),
            ("l19", self.l19),
            ("l29", self.l29),
            ("mde", self.mde),
            ("other_itemized", self.other_itemized),
        ] {
            if m < Money::ZERO {
                return Err(InputError::NegativeAmount(name));
            }
        }
        if self.age < MIN_AGE {
            return Err(InputError::Underage { field: "age", value: self.age });
        }
        if self.sts.is_married() && self.s_age < MIN_AGE {
            return Err(InputError::Underage { field: "s_age", value: self.s_age });
        }
        for (field, value) in [("qc", self.qc), ("od", self.od)] {
            if value > MAX_DEPENDENTS {
                return Err(InputError::TooManyDependents { field, value });
            }
        }
        Ok(())
    }

    pub fn get(&self, field: Field) -> i64 {
        match field {
            Field::Sts => self.sts.code(),
            Field::Age => self.age as i64,
            Field::Blind => self.blind as i64,
            Field::SAge => self.s_age as i64,
            Field::SBlind => self.s_blind as i64,
            Field::Agi => self.agi.cents(),
            Field::Withholding => self.withholding.cents(),
            Field::L27 => self.l27.cents(),
            Field::Qc => self.qc as i64,
            Field::Od => self.od as i64,
            Field::L19 => self.l19.cents(),
            Field::L29 => self.l29.cents(),
            Field::Mde => self.mde.cents(),
            Field::OtherItemized => self.other_itemized.cents(),
            Field::Iz => self.iz as i64,
        }
    }

    /// Sets a field from its integer encoding (see [`Field`]).
    ///
    /// Panics on a value outside the field's representable range; callers
    /// draw values from validated sampling ranges.
    pub fn set(&mut self, field: Field, value: i64) {
        let small = |v: i64| u16::try_from(v).expect("age out of range");
        match field {
            Field::Sts => self.sts = FilingStatus::from_code(value).expect("bad status code"),
            Field::Age => self.age = small(value),
            Field::Blind => self.blind = value != 0,
            Field::SAge => self.s_age = small(value),
            Field::SBlind => self.s_blind = value != 0,
            Field::Agi => self.agi = Money::from_cents(value),
            Field::Withholding => self.withholding = Money::from_cents(value),
            Field::L27 => self.l27 = Money::from_cents(value),
            Field::Qc => self.qc = u8::try_from(value).expect("count out of range"),
            Field::Od => self.od = u8::try_from(value).expect("count out of range"),
            Field::L19 => self.l19 = Money::from_cents(value),
            Field::L29 => self.l29 = Money::from_cents(value),
            Field::Mde => self.mde = Money::from_cents(value),
            Field::OtherItemized => self.other_itemized = Money::from_cents(value),
            Field::Iz => self.iz = value != 0,
        }
    }

    pub fn with(mut self, field: Field, value: i64) -> Self {
        self.set(field, value);
        self
    }

    /// `self ≡_L other`: every field outside `exceptions` is equal.
    pub fn equal_except(&self, other: &TaxReturnInput, exceptions: &[Field]) -> bool {
        Field::ALL
            .iter()
            .filter(|f| !exceptions.contains(f))
            .all(|&f| self.get(f) == other.get(f))
    }

    /// Fields on which the two records differ.
    pub fn diff(&self, other: &TaxReturnInput) -> Vec<Field> {
        Field::ALL.iter().copied().filter(|&f| self.get(f) != other.get(f)).collect()
    }
}

/// Labels of [`TaxReturnInput`] with their integer encodings:
/// money in cents, booleans as 0/1, status by [`FilingStatus::code`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Field {
    Sts,
    Age,
    Blind,
    SAge,
    SBlind,
    Agi,
    Withholding,
    L27,
    Qc,
    Od,
    L19,
    L29,
    Mde,
    OtherItemized,
    Iz,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FieldKind {
    Status,
    Years,
    Flag,
    Money,
    Count,
}

impl Field {
    pub const ALL: [Field; 15] = [
        Field::Sts,
        Field::Age,
        Field::Blind,
        Field::SAge,
        Field::SBlind,
        Field::Agi,
        Field::Withholding,
        Field::L27,
        Field::Qc,
        Field::Od,
        Field::L19,
        Field::L29,
        Field::Mde,
        Field::OtherItemized,
        Field::Iz,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Field::Sts => "sts",
            Field::Age => "age",
            Field::Blind => "blind",
            Field::SAge => "s_age",
            Field::SBlind => "s_blind",
            Field::Agi => "AGI",
            Field::Withholding => "withholding",
            Field::L27 => "L27",
            Field::Qc => "QC",
            Field::Od => "OD",
            Field::L19 => "L19",
            Field::L29 => "L29",
            Field::Mde => "MDE",
            Field::OtherItemized => "other_itemized",
            Field::Iz => "iz",
        }
    }

    pub fn kind(self) -> FieldKind {
        match self {
            Field::Sts => FieldKind::Status,
            Field::Age | Field::SAge => FieldKind::Years,
            Field::Blind | Field::SBlind | Field::Iz => FieldKind::Flag,
            Field::Qc | Field::Od => FieldKind::Count,
            _ => FieldKind::Money,
        }
    }

    pub fn index(self) -> usize {
        self as usize
    }
}

impl fmt::Display for Field {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn spouse_fields_canonicalized_for_unmarried() {
        let mut r = TaxReturnInput::new(FilingStatus::Mfj);
        r.s_age = 70;
        r.s_blind = true;
        r.sts = FilingStatus::Hoh;
        r.canonicalize();
        assert_eq!((r.s_age, r.s_blind), (0, false));
        assert!(r.validate().is_ok());
    }

    #[test]
    fn validation_rejects_bad_records() {
        let mut r = TaxReturnInput::new(FilingStatus::Mfj);
        r.qc = 11;
        assert!(matches!(r.validate(), Err(InputError::TooManyDependents { .. })));
        let mut r = TaxReturnInput::new(FilingStatus::Mfs);
        r.s_age = 0;
        assert!(matches!(r.validate(), Err(InputError::Underage { field: "s_age", .. })));
        let mut r = TaxReturnInput::new(FilingStatus::Single);
        r.mde = Money::from_cents(-1);
        assert_eq!(r.validate(), Err(InputError::NegativeAmount("mde")));
    }

    #[test]
    fn get_set_agree() {
        let mut r = TaxReturnInput::new(FilingStatus::Mfj);
        for (i, f) in Field::ALL.iter().enumerate() {
            let v = match f {
                Field::Sts => 2,
                Field::Blind | Field::SBlind | Field::Iz => 1,
                Field::Qc | Field::Od => 3,
                _ => 100 + i as i64,
            };
            r.set(*f, v);
            assert_eq!(r.get(*f), v, "{f}");
            assert_eq!(f.index(), i);
        }
    }

    #[test]
    fn metamorphose_relation() {
        let x = TaxReturnInput::new(FilingStatus::Mfs).with(Field::L27, 50_000);
        let y = x.clone().with(Field::L27, 0);
        assert!(x.equal_except(&y, &[Field::L27]));
        assert!(!x.equal_except(&y, &[Field::Agi]));
        assert_eq!(x.diff(&y), vec![Field::L27]);
    }

    #[test]
    fn wire_form_is_cents() {
        let r = TaxReturnInput::new(FilingStatus::Mfj).with(Field::Agi, 3_000_000);
        let s = serde_json::to_string(&r).unwrap();
        assert!(s.starts_with(r#"{"sts":"MFJ","age":40"#), "{s}");
        assert!(s.contains(r#""agi":3000000"#));
        let back: TaxReturnInput = serde_json::from_str(&s).unwrap();
        assert_eq!(back, r);
    }
}
