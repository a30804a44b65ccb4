//! Per-relation run summaries and the aligned results table.

use serde::{Deserialize, Serialize};

use crate::generator::{RunResult, Verdict};
use crate::money::Money;
use crate::relation::relation;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunSummary {
    pub relation: u8,
    pub domain: String,
    pub sut: String,
    pub verdict: Verdict,
    pub cases: u64,
    pub passed: u64,
    pub failed: u64,
    pub first_failure_secs: Option<f64>,
    pub max_deviance: Money,
    pub required_passes: u64,
    pub sources_passed: u64,
    pub sources_failed: u64,
    pub truncated: bool,
    pub elapsed_secs: f64,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub explanation: Option<Explanation>,
    /// Training accuracy and size of the explanation tree, when one was fitted.
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub tree: Option<TreeSummary>,
}

/// How a suite's outcome is explained: by the relation premise when every
/// case carries the same label, otherwise by a fitted tree.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Explanation {
    Premise,
    Tree,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TreeSummary {
    pub accuracy: f64,
    pub height: usize,
    pub leaves: usize,
}

impl RunSummary {
    pub fn new(r: &RunResult, sut: &str) -> RunSummary {
        let domain = relation(r.relation_id as u32).map(|rel| rel.domain_tag.to_string()).unwrap_or_default();
        RunSummary {
            relation: r.relation_id,
            domain,
            sut: sut.to_string(),
            verdict: r.verdict,
            cases: r.n_pass + r.n_fail,
            passed: r.n_pass,
            failed: r.n_fail,
            first_failure_secs: r.first_failure_time,
            max_deviance: r.max_deviance,
            required_passes: r.required_passes,
            sources_passed: r.sources_passed,
            sources_failed: r.sources_failed,
            truncated: r.truncated,
            elapsed_secs: r.elapsed_secs,
            explanation: None,
            tree: None,
        }
    }
}

pub fn verdict_text(v: Verdict) -> &'static str {
    match v {
        Verdict::Falsified => "FALSIFIED",
        Verdict::StatisticallyPassed => "PASSED",
        Verdict::Inconclusive => "INCONCLUSIVE",
    }
}

/// Fixed-width table, one row per summary.
pub fn table(rows: &[RunSummary]) -> String {
    let header = [
        "rel", "domain", "verdict", "cases", "passed", "failed", "first fail (s)", "max ΔFTR", "expl", "tree acc", "height",
    ];
    let body: Vec<[String; 11]> = rows
        .iter()
        .map(|r| {
            [
                r.relation.to_string(),
                r.domain.clone(),
                verdict_text(r.verdict).to_string(),
                r.cases.to_string(),
                r.passed.to_string(),
                r.failed.to_string(),
                r.first_failure_secs.map_or("-".into(), |t| format!("{t:.3}")),
                r.max_deviance.to_string(),
                match r.explanation {
                    Some(Explanation::Premise) => "premise".into(),
                    Some(Explanation::Tree) => "tree".into(),
                    None => "-".into(),
                },
                r.tree.map_or("-".into(), |t| format!("{:.1}%", t.accuracy * 100.0)),
                r.tree.map_or("-".into(), |t| t.height.to_string()),
            ]
        })
        .collect();
    let mut widths: Vec<usize> = header.iter().map(|h| h.chars().count()).collect();
    for row in &body {
        for (w, cell) in widths.iter_mut().zip(row) {
            *w = (*w).max(cell.chars().count());
        }
    }
    let line = |cells: Vec<&str>| {
        let padded: Vec<String> = cells
            .iter()
            .zip(&widths)
            .enumerate()
            .map(|(i, (c, w))| {
                let pad = w - c.chars().count();
                if i < 3 {
                    format!("{c}{}", " ".repeat(pad))
                } else {
                    format!("{}{c}", " ".repeat(pad))
                }
            })
            .collect();
        padded.join("  ").trim_end().to_string() + "\n"
    };
    let mut out = line(header.to_vec());
    for row in &body {
        out += &line(row.iter().map(String::as_str).collect());
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::engine::{Engine, MutantId};
    use crate::generator::{run_relation, ClockMode, GeneratorConfig};

    #[test]
    fn table_lines_align() {
        let cfg = GeneratorConfig { max_cases: 300, clock: ClockMode::Virtual { tick_us: 1 }, ..Default::default() };
        let a = run_relation(&mut Engine::mutant(MutantId::M1EitcMfs), &relation(3).unwrap(), &cfg).unwrap();
        let b = run_relation(&mut Engine::reference(), &relation(14).unwrap(), &cfg).unwrap();
        let rows = vec![RunSummary::new(&a, "mutant:M1"), RunSummary::new(&b, "builtin")];
        let t = table(&rows);
        let lines: Vec<&str> = t.lines().collect();
        assert_eq!(lines.len(), 3);
        assert!(lines[1].starts_with("3 "), "{t}");
        assert!(lines[1].contains("FALSIFIED") && lines[2].contains("PASSED"));
        let col = lines[0].find("verdict").unwrap();
        assert_eq!(lines[1].find("FALSIFIED"), Some(col));
        let back: RunSummary = serde_json::from_str(&serde_json::to_string(&rows[0]).unwrap()).unwrap();
        assert_eq!(back, rows[0]);
    }
}
