//! JSON-lines persistence of labelled test suites.
//!
//! Line 1 is a header naming the relation and the generator configuration;
//! every further line is one labelled case tuple. Reading a file and writing
//! it back reproduces it byte for byte.

use std::io::{BufRead, Write};

use serde::{Deserialize, Serialize};

use crate::generator::{CaseTuple, GeneratorConfig, Label, LabeledCase, RunResult};
use crate::money::Money;
use crate::record::TaxReturnInput;
use crate::relation::{relation, MetamorphicRelation};

pub const SUITE_SCHEMA: &str = "mm1040-suite";
pub const SUITE_VERSION: u32 = 1;

#[derive(Debug, thiserror::Error)]
pub enum SuiteError {
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
    #[error("line {line}: {msg}")]
    Corrupt { line: usize, msg: String },
    #[error("empty suite file")]
    Empty,
}

impl SuiteError {
    fn at(line: usize, msg: impl ToString) -> SuiteError {
        SuiteError::Corrupt { line, msg: msg.to_string() }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SuiteHeader {
    pub schema: String,
    pub version: u32,
    pub relation: u8,
    pub arity: usize,
    /// Identifies the engine under test, e.g. `builtin` or `mutant:M1`.
    pub sut: String,
    pub config: GeneratorConfig,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct CaseLine {
    seq: u64,
    t_us: u64,
    spec: usize,
    records: Vec<TaxReturnInput>,
    outputs: Vec<Money>,
    deviance: Money,
    label: Label,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Suite {
    pub header: SuiteHeader,
    pub cases: Vec<LabeledCase>,
}

impl Suite {
    pub fn from_run(result: &RunResult, sut: &str) -> Suite {
        let rel = relation(result.relation_id as u32).expect("result of a catalogued relation");
        Suite {
            header: SuiteHeader {
                schema: SUITE_SCHEMA.into(),
                version: SUITE_VERSION,
                relation: rel.id,
                arity: rel.arity,
                sut: sut.into(),
                config: result.config.clone(),
            },
            cases: result.cases.clone(),
        }
    }

    pub fn relation(&self) -> MetamorphicRelation {
        relation(self.header.relation as u32).expect("validated on read")
    }

    pub fn count(&self, label: Label) -> usize {
        self.cases.iter().filter(|c| c.label == label).count()
    }

    pub fn write_to<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        serde_json::to_writer(&mut w, &self.header)?;
        w.write_all(b"\n")?;
        for (seq, c) in self.cases.iter().enumerate() {
            let line = CaseLine {
                seq: seq as u64,
                t_us: c.t_us,
                spec: c.tuple.spec,
                records: c.tuple.records.clone(),
                outputs: c.tuple.outputs.clone(),
                deviance: c.deviance,
                label: c.label,
            };
            serde_json::to_writer(&mut w, &line)?;
            w.write_all(b"\n")?;
        }
        w.flush()
    }

    pub fn save(&self, path: &std::path::Path) -> std::io::Result<()> {
        let f = std::fs::File::create(path)?;
        self.write_to(std::io::BufWriter::new(f))
    }

    pub fn load(path: &std::path::Path) -> Result<Suite, SuiteError> {
        Suite::read_from(std::io::BufReader::new(std::fs::File::open(path)?))
    }

    /// Parses and validates a suite; errors carry the 1-based line number.
    pub fn read_from<R: BufRead>(r: R) -> Result<Suite, SuiteError> {
        let mut lines = r.lines();
        let first = lines.next().ok_or(SuiteError::Empty)??;
        let header: SuiteHeader = serde_json::from_str(&first).map_err(|e| SuiteError::at(1, e))?;
        if header.schema != SUITE_SCHEMA || header.version != SUITE_VERSION {
            return Err(SuiteError::at(
                1,
                format!("unsupported schema {:?} version {}", header.schema, header.version),
            ));
        }
        let rel = relation(header.relation as u32).map_err(|e| SuiteError::at(1, e))?;
        if rel.arity != header.arity {
            return Err(SuiteError::at(1, format!("relation {} has arity {}", rel.id, rel.arity)));
        }
        let mut cases = Vec::new();
        for (i, line) in lines.enumerate() {
            let n = i + 2;
            let line = line?;
            let c: CaseLine = serde_json::from_str(&line).map_err(|e| SuiteError::at(n, e))?;
            if c.seq != i as u64 {
                return Err(SuiteError::at(n, format!("expected seq {i}, found {}", c.seq)));
            }
            if c.spec >= rel.specs.len() {
                return Err(SuiteError::at(n, format!("relation {} has no disjunct {}", rel.id, c.spec)));
            }
            if c.records.len() != rel.arity || c.outputs.len() != rel.arity {
                return Err(SuiteError::at(n, format!("expected {} records and outputs", rel.arity)));
            }
            let deviance = rel.deviance(&c.outputs).map_err(|e| SuiteError::at(n, e))?;
            if deviance != c.deviance {
                return Err(SuiteError::at(n, format!("deviance {} does not match outputs", c.deviance)));
            }
            let expected = if deviance > header.config.delta { Label::Failed } else { Label::Passed };
            if expected != c.label {
                return Err(SuiteError::at(n, "label disagrees with deviance and delta"));
            }
            cases.push(LabeledCase {
                tuple: CaseTuple { spec: c.spec, records: c.records, outputs: c.outputs },
                deviance: c.deviance,
                label: c.label,
                t_us: c.t_us,
            });
        }
        Ok(Suite { header, cases })
    }
}

impl std::fmt::Display for Suite {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let mut buf = Vec::new();
        self.write_to(&mut buf).map_err(|_| std::fmt::Error)?;
        f.write_str(std::str::from_utf8(&buf).map_err(|_| std::fmt::Error)?)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::engine::{Engine, MutantId};
    use crate::generator::{run_relation, ClockMode};

    fn suite(id: u32, m: Option<MutantId>, seed: u64) -> Suite {
        let cfg = GeneratorConfig {
            seed,
            max_cases: 400,
            clock: ClockMode::Virtual { tick_us: 10 },
            ..GeneratorConfig::default()
        };
        let res = run_relation(&mut Engine::reference().with_mutant(m), &relation(id).unwrap(), &cfg).unwrap();
        Suite::from_run(&res, "test")
    }

    #[test]
    fn round_trip_is_byte_identical() {
        for (id, m) in [(3, Some(MutantId::M1EitcMfs)), (8, None), (11, Some(MutantId::M3ZeroCross))] {
            let s = suite(id, m, 42);
            let text = s.to_string();
            let back = Suite::read_from(text.as_bytes()).unwrap();
            assert_eq!(back, s);
            assert_eq!(back.to_string(), text);
        }
    }

    #[test]
    fn same_seed_same_bytes() {
        let a = suite(11, Some(MutantId::M3ZeroCross), 42).to_string();
        assert_eq!(a, suite(11, Some(MutantId::M3ZeroCross), 42).to_string());
        assert_ne!(a, suite(11, Some(MutantId::M3ZeroCross), 43).to_string());
    }

    #[test]
    fn corrupt_line_reports_position() {
        let text = suite(3, None, 1).to_string();
        let mut lines: Vec<&str> = text.lines().collect();
        lines[5] = "{\"seq\":4,";
        let err = Suite::read_from(lines.join("\n").as_bytes()).unwrap_err();
        assert!(matches!(err, SuiteError::Corrupt { line: 6, .. }), "{err}");

        let bad_label = text.replacen("\"label\":\"passed\"", "\"label\":\"failed\"", 1);
        let err = Suite::read_from(bad_label.as_bytes()).unwrap_err();
        assert!(matches!(err, SuiteError::Corrupt { line: 2, .. }), "{err}");

        assert!(matches!(Suite::read_from(&b""[..]), Err(SuiteError::Empty)));
        let err = Suite::read_from(&b"{\"schema\":\"other\"}\n"[..]).unwrap_err();
        assert!(matches!(err, SuiteError::Corrupt { line: 1, .. }));
    }
}
