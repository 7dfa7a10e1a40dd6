//! Energy accounting rows and their CSV form.
//!
//! Columns, in order, are [`LEDGER_COLUMNS`]. Values are written with
//! seventeen digits after the point so a read-back is bit-exact.

use std::io::{BufRead, Write};
use std::path::Path;

use super::stepper::RunObserver;
use crate::error::{Error, Result};

pub const LEDGER_COLUMNS: [&str; 12] = [
    "t",
    "e_u",
    "e_b",
    "dissipation",
    "dissipation_integral",
    "hs_u",
    "hs_b",
    "hs_dissipation_integral",
    "div_u",
    "div_b",
    "hall_flux",
    "balance_residual",
];

#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct LedgerRow {
    pub t: f64,
    /// `½‖u‖²`
    pub e_u: f64,
    /// `½‖B‖²`
    pub e_b: f64,
    /// `‖Λ^α B‖²`
    pub dissipation: f64,
    /// `∫₀ᵗ ‖Λ^α B‖² dτ`
    pub dissipation_integral: f64,
    pub hs_u: f64,
    pub hs_b: f64,
    /// `∫₀ᵗ ‖Λ^α B‖²_{H^σ} dτ`
    pub hs_dissipation_integral: f64,
    pub div_u: f64,
    pub div_b: f64,
    /// `∫ ∇×((∇×B)×B) · B`
    pub hall_flux: f64,
    /// `|E(t) + ∫₀ᵗ D − E(0)|`
    pub balance_residual: f64,
}

impl LedgerRow {
    pub fn values(&self) -> [f64; 12] {
        [
            self.t,
            self.e_u,
            self.e_b,
            self.dissipation,
            self.dissipation_integral,
            self.hs_u,
            self.hs_b,
            self.hs_dissipation_integral,
            self.div_u,
            self.div_b,
            self.hall_flux,
            self.balance_residual,
        ]
    }

    pub fn from_values(v: [f64; 12]) -> Self {
        LedgerRow {
            t: v[0],
            e_u: v[1],
            e_b: v[2],
            dissipation: v[3],
            dissipation_integral: v[4],
            hs_u: v[5],
            hs_b: v[6],
            hs_dissipation_integral: v[7],
            div_u: v[8],
            div_b: v[9],
            hall_flux: v[10],
            balance_residual: v[11],
        }
    }

    pub fn total_energy(&self) -> f64 {
        self.e_u + self.e_b
    }

    /// `‖(u, B)‖_{H^σ}`
    pub fn hs_total(&self) -> f64 {
        self.hs_u.hypot(self.hs_b)
    }

    pub fn csv_line(&self) -> String {
        self.values().iter().map(|v| format!("{v:.17e}")).collect::<Vec<_>>().join(",")
    }
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct EnergyLedger {
    pub rows: Vec<LedgerRow>,
}

impl EnergyLedger {
    pub fn header() -> String {
        LEDGER_COLUMNS.join(",")
    }

    pub fn initial_energy(&self) -> Option<f64> {
        self.rows.first().map(LedgerRow::total_energy)
    }

    /// Largest `balance_residual / E(0)`; 0 when `E(0) = 0` and every
    /// residual is 0.
    pub fn max_relative_balance(&self) -> f64 {
        let e0 = self.initial_energy().unwrap_or(0.0);
        let worst = self.rows.iter().map(|r| r.balance_residual).fold(0.0, f64::max);
        if worst == 0.0 {
            0.0
        } else {
            worst / e0
        }
    }

    pub fn write_csv(&self, mut w: impl Write) -> std::io::Result<()> {
        writeln!(w, "{}", Self::header())?;
        for row in &self.rows {
            writeln!(w, "{}", row.csv_line())?;
        }
        Ok(())
    }

    pub fn to_csv_string(&self) -> String {
        let mut buf = Vec::new();
        self.write_csv(&mut buf).expect("writing to memory");
        String::from_utf8(buf).expect("ascii output")
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        let file = std::fs::File::create(path).map_err(|e| Error::io(path, e))?;
        let mut w = std::io::BufWriter::new(file);
        self.write_csv(&mut w).and_then(|_| w.flush()).map_err(|e| Error::io(path, e))
    }

    pub fn parse_csv(text: &str) -> Result<Self> {
        Self::read_csv(text.as_bytes())
    }

    pub fn read_csv(r: impl BufRead) -> Result<Self> {
        let bad = |m: String| Error::format("energy ledger CSV", m);
        let mut lines = r.lines().enumerate();
        let header = match lines.next() {
            Some((_, line)) => line.map_err(|e| bad(e.to_string()))?,
            None => return Err(bad("empty input, expected a header line".into())),
        };
        if header.trim() != Self::header() {
            return Err(bad(format!("line 1: header {:?} does not match {:?}", header.trim(), Self::header())));
        }
        let mut rows = Vec::new();
        for (i, line) in lines {
            let line = line.map_err(|e| bad(e.to_string()))?;
            if line.trim().is_empty() {
                continue;
            }
            let fields: Vec<&str> = line.split(',').collect();
            if fields.len() != LEDGER_COLUMNS.len() {
                return Err(bad(format!(
                    "line {}: expected {} fields, found {}",
                    i + 1,
                    LEDGER_COLUMNS.len(),
                    fields.len()
                )));
            }
            let mut v = [0.0; 12];
            for (j, f) in fields.iter().enumerate() {
                v[j] = f.trim().parse().map_err(|_| {
                    bad(format!("line {}, column {}: {:?} is not a number", i + 1, LEDGER_COLUMNS[j], f))
                })?;
            }
            rows.push(LedgerRow::from_values(v));
        }
        Ok(EnergyLedger { rows })
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
        Self::read_csv(std::io::BufReader::new(file))
    }
}

/// Streams ledger rows as CSV; the header is written on construction.
pub struct CsvLedgerWriter<W: Write> {
    out: W,
}

impl<W: Write> CsvLedgerWriter<W> {
    pub fn new(mut out: W) -> std::io::Result<Self> {
        writeln!(out, "{}", EnergyLedger::header())?;
        Ok(CsvLedgerWriter { out })
    }

    pub fn into_inner(self) -> W {
        self.out
    }
}

impl<W: Write> RunObserver for CsvLedgerWriter<W> {
    fn on_row(&mut self, row: &LedgerRow) -> Result<()> {
        writeln!(self.out, "{}", row.csv_line()).map_err(|e| Error::io("<ledger stream>", e))
    }
}
