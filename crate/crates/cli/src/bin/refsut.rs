//! Reference engine behind the external line protocol: one JSON record per
//! input line, one dollar amount per output line.
//!
//! `mm1040-refsut [--mutant M1]`

use std::io::{BufRead, BufWriter, Write};

use mm1040_core::{Engine, MutantId, TaxReturnInput};

fn main() {
    let args: Vec<String> = std::env::args().skip(1).collect();
    let engine = match args.as_slice() {
        [] => Engine::reference(),
        [flag, id] if flag == "--mutant" => match id.parse::<MutantId>() {
            Ok(m) => Engine::mutant(m),
            Err(e) => {
                eprintln!("mm1040-refsut: {e}");
                std::process::exit(64);
            }
        },
        _ => {
            eprintln!("usage: mm1040-refsut [--mutant <id>]");
            std::process::exit(64);
        }
    };
    let stdin = std::io::stdin().lock();
    let mut out = BufWriter::new(std::io::stdout().lock());
    for line in stdin.lines() {
        let Ok(line) = line else { break };
        let reply = match serde_json::from_str::<TaxReturnInput>(&line) {
            Ok(r) => engine.federal_tax_return(&r).to_string(),
            Err(e) => format!("error: {e}"),
        };
        if writeln!(out, "{reply}").and_then(|_| out.flush()).is_err() {
            break;
        }
    }
}
