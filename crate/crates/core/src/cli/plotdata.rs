//! Whitespace-delimited plot tables from ledgers and reports.
//!
//! | input                  | outputs                    |
//! |------------------------|----------------------------|
//! | energy ledger CSV      | `energy.dat`, `hsigma.dat` |
//! | convergence report CSV | `cauchy.dat`               |
//! | boundedness report CSV | `hsigma.dat`               |
//!
//! Each output starts with one `#` line naming its columns.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use crate::diagnostics::{BoundednessReport, ConvergenceReport};
use crate::dynamics::EnergyLedger;
use crate::error::{Error, Result};

pub const ENERGY_COLUMNS: &str =
    "# t e_u e_b e_total dissipation dissipation_integral e_plus_integral balance_residual";
pub const HSIGMA_COLUMNS: &str = "# t hs_u hs_b hs_total hs_dissipation_integral";
pub const ALPHA_HSIGMA_COLUMNS: &str = "# alpha t hs_norm hs_integral";
pub const CAUCHY_COLUMNS: &str = "# min_nm n m du db total";

/// The plot tables of a parsed ledger, as `(file name, contents)`.
pub fn ledger_tables(ledger: &EnergyLedger) -> Vec<(&'static str, String)> {
    let mut energy = format!("{ENERGY_COLUMNS}\n");
    let mut hs = format!("{HSIGMA_COLUMNS}\n");
    for r in &ledger.rows {
        let e = r.total_energy();
        let _ = writeln!(
            energy,
            "{:.17e} {:.17e} {:.17e} {:.17e} {:.17e} {:.17e} {:.17e} {:.17e}",
            r.t,
            r.e_u,
            r.e_b,
            e,
            r.dissipation,
            r.dissipation_integral,
            e + r.dissipation_integral,
            r.balance_residual
        );
        let _ = writeln!(
            hs,
            "{:.17e} {:.17e} {:.17e} {:.17e} {:.17e}",
            r.t,
            r.hs_u,
            r.hs_b,
            r.hs_total(),
            r.hs_dissipation_integral
        );
    }
    vec![("energy.dat", energy), ("hsigma.dat", hs)]
}

fn fields<'a>(line: &'a str, lineno: usize, expected: usize, what: &str) -> Result<Vec<&'a str>> {
    let f: Vec<&str> = line.split(',').map(str::trim).collect();
    if f.len() != expected {
        return Err(Error::format(
            what,
            format!("line {lineno}: expected {expected} fields, found {}", f.len()),
        ));
    }
    Ok(f)
}

fn number(s: &str, lineno: usize, column: &str, what: &str) -> Result<f64> {
    s.parse()
        .map_err(|_| Error::format(what, format!("line {lineno}, column {column}: {s:?} is not a number")))
}

/// `cauchy.dat` from a convergence report: the final-time row of each pair.
pub fn cauchy_table(text: &str) -> Result<String> {
    let what = "convergence report CSV";
    let mut finals: Vec<[f64; 6]> = Vec::new();
    for (i, line) in text.lines().enumerate().skip(1) {
        if line.trim().is_empty() {
            continue;
        }
        let f = fields(line, i + 1, 6, what)?;
        let cols = ["n", "m", "t", "du", "db", "total"];
        let mut v = [0.0; 6];
        for j in 0..6 {
            v[j] = number(f[j], i + 1, cols[j], what)?;
        }
        match finals.iter_mut().find(|r| r[0] == v[0] && r[1] == v[1]) {
            Some(r) if v[2] >= r[2] => *r = v,
            Some(_) => {}
            None => finals.push(v),
        }
    }
    finals.sort_by(|a, b| a[0].min(a[1]).total_cmp(&b[0].min(b[1])).then(a[1].total_cmp(&b[1])));
    let mut out = format!("{CAUCHY_COLUMNS}\n");
    for r in finals {
        let _ = writeln!(
            out,
            "{} {} {} {:.17e} {:.17e} {:.17e}",
            r[0].min(r[1]),
            r[0],
            r[1],
            r[3],
            r[4],
            r[5]
        );
    }
    Ok(out)
}

/// `hsigma.dat` from a boundedness report.
pub fn alpha_table(text: &str) -> Result<String> {
    let what = "boundedness report CSV";
    let mut out = format!("{ALPHA_HSIGMA_COLUMNS}\n");
    for (i, line) in text.lines().enumerate().skip(1) {
        if line.trim().is_empty() {
            continue;
        }
        let f = fields(line, i + 1, 4, what)?;
        let cols = ["alpha", "t", "hs_norm", "hs_integral"];
        let v: Vec<f64> = (0..4)
            .map(|j| number(f[j], i + 1, cols[j], what))
            .collect::<Result<_>>()?;
        let _ = writeln!(out, "{} {:.17e} {:.17e} {:.17e}", v[0], v[1], v[2], v[3]);
    }
    Ok(out)
}

/// Converts a ledger or report file into plot tables inside `out_dir`.
pub fn emit_plotdata(input: &Path, out_dir: &Path) -> Result<Vec<PathBuf>> {
    let text = fs::read_to_string(input).map_err(|e| Error::io(input, e))?;
    let header = text.lines().next().unwrap_or("").trim();
    let tables: Vec<(&str, String)> = if header == EnergyLedger::header() {
        ledger_tables(&EnergyLedger::parse_csv(&text)?)
    } else if header == ConvergenceReport::CSV_HEADER {
        vec![("cauchy.dat", cauchy_table(&text)?)]
    } else if header == BoundednessReport::CSV_HEADER {
        vec![("hsigma.dat", alpha_table(&text)?)]
    } else {
        return Err(Error::format(
            "plot input",
            format!(
                "{}: line 1 {header:?} is neither a ledger nor a report header",
                input.display()
            ),
        ));
    };
    fs::create_dir_all(out_dir).map_err(|e| Error::io(out_dir, e))?;
    let mut written = Vec::new();
    for (name, body) in tables {
        let p = out_dir.join(name);
        fs::write(&p, body).map_err(|e| Error::io(&p, e))?;
        written.push(p);
    }
    Ok(written)
}
