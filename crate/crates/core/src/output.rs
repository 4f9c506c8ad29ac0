//! CSV and JSON writers.
//!
//! CSV numbers are plain decimals with 12 significant digits (no exponent).

use serde::{Deserialize, Serialize};
use std::io::Write;

use crate::error::Result;
use crate::modes::CollectiveMode;
use crate::sweep::SpectrumTable;

/// `x` rounded to 12 significant digits, written without an exponent.
pub fn format_decimal(x: f64) -> String {
    if !x.is_finite() {
        return if x.is_nan() { "NaN".into() } else if x > 0.0 { "inf".into() } else { "-inf".into() };
    }
    if x == 0.0 {
        return "0".into();
    }
    let sci = format!("{:.11e}", x);
    let (mantissa, exponent) = sci.split_once('e').expect("scientific format");
    let exponent: i32 = exponent.parse().expect("exponent");
    let negative = mantissa.starts_with('-');
    let digits: String = mantissa.chars().filter(char::is_ascii_digit).collect();
    // digits = d0 d1 ... d11 with value d0.d1...d11 × 10^exponent
    let point = exponent + 1;
    let mut out = String::new();
    if negative {
        out.push('-');
    }
    if point <= 0 {
        out.push_str("0.");
        out.extend(std::iter::repeat_n('0', (-point) as usize));
        out.push_str(&digits);
    } else if point as usize >= digits.len() {
        out.push_str(&digits);
        out.extend(std::iter::repeat_n('0', point as usize - digits.len()));
    } else {
        out.push_str(&digits[..point as usize]);
        out.push('.');
        out.push_str(&digits[point as usize..]);
    }
    out
}

/// A rectangular numeric table with named columns.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct DataTable {
    pub columns: Vec<String>,
    pub rows: Vec<Vec<f64>>,
}

impl DataTable {
    pub fn new(columns: Vec<String>) -> Self {
        Self {
            columns,
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<f64>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }

    pub fn append(&mut self, other: DataTable) {
        debug_assert_eq!(self.columns, other.columns);
        self.rows.extend(other.rows);
    }

    pub fn column(&self, name: &str) -> Option<Vec<f64>> {
        let k = self.columns.iter().position(|c| c == name)?;
        Some(self.rows.iter().map(|r| r[k]).collect())
    }

    pub fn write_csv<W: Write>(&self, mut w: W) -> Result<()> {
        writeln!(w, "{}", self.columns.join(","))?;
        for row in &self.rows {
            let line: Vec<String> = row.iter().map(|&x| format_decimal(x)).collect();
            writeln!(w, "{}", line.join(","))?;
        }
        Ok(())
    }

    pub fn to_csv_string(&self) -> String {
        let mut buf = Vec::new();
        self.write_csv(&mut buf).expect("writing to memory");
        String::from_utf8(buf).expect("ascii")
    }
}

pub const SPECTRUM_COLUMNS: [&str; 7] = ["delta", "re_t", "im_t", "re_r", "im_r", "T", "R"];

/// Spectrum rows with `Δ/γ`; optional leading `theta` and trailing `L_n` columns.
pub fn spectrum_data(table: &SpectrumTable, theta: Option<f64>) -> DataTable {
    let mut columns: Vec<String> = Vec::new();
    if theta.is_some() {
        columns.push("theta".into());
    }
    columns.extend(SPECTRUM_COLUMNS.iter().map(|s| s.to_string()));
    columns.extend((1..=table.mode_count()).map(|n| format!("L_{n}")));
    let mut out = DataTable::new(columns);
    for r in &table.rows {
        let mut row = Vec::with_capacity(out.columns.len());
        row.extend(theta);
        row.extend([
            r.delta / table.unit,
            r.t.re,
            r.t.im,
            r.r.re,
            r.r.im,
            r.transmittance,
            r.reflectance,
        ]);
        row.extend(&r.mode_weights);
        out.push(row);
    }
    out
}

pub const MODE_COLUMNS: [&str; 7] = ["mode", "delta_n", "decay_n", "re_eta", "im_eta", "re_eta_r", "im_eta_r"];

/// One row per collective mode; energies and rates in units of `unit`.
pub fn modes_data(modes: &[CollectiveMode], unit: f64, theta: Option<f64>) -> DataTable {
    let mut columns: Vec<String> = Vec::new();
    if theta.is_some() {
        columns.push("theta".into());
    }
    columns.extend(MODE_COLUMNS.iter().map(|s| s.to_string()));
    let mut out = DataTable::new(columns);
    for (k, m) in modes.iter().enumerate() {
        let mut row = Vec::with_capacity(out.columns.len());
        row.extend(theta);
        row.extend([
            (k + 1) as f64,
            m.energy_detuning / unit,
            m.decay / unit,
            m.weight_t.re / unit,
            m.weight_t.im / unit,
            m.weight_r.re / unit,
            m.weight_r.im / unit,
        ]);
        out.push(row);
    }
    out
}

pub fn write_json<W: Write, T: Serialize>(w: W, value: &T) -> Result<()> {
    serde_json::to_writer_pretty(w, value)?;
    Ok(())
}
