//! Minimal CSV writer: `#` comment header, one column line, rows of numbers
//! printed with 12 significant digits, `.` radix and `\n` line endings.

use std::fmt::Write;

/// Formats `v` with 12 significant digits, like C's `%.12g`.
pub fn fmt_num(v: f64) -> String {
    if v == 0.0 {
        return "0".to_string();
    }
    if !v.is_finite() {
        return if v.is_nan() {
            "nan".into()
        } else if v > 0.0 {
            "inf".into()
        } else {
            "-inf".into()
        };
    }
    // the exponent after rounding to 12 digits decides the notation
    let sci = format!("{v:.11e}");
    let (mantissa, exp) = sci.split_once('e').expect("scientific format");
    let exp: i32 = exp.parse().expect("exponent");
    if (-4..12).contains(&exp) {
        let decimals = (11 - exp).max(0) as usize;
        trim_zeros(format!("{v:.decimals$}"))
    } else {
        format!("{}e{exp}", trim_zeros(mantissa.to_string()))
    }
}

fn trim_zeros(s: String) -> String {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.').to_string()
    } else {
        s
    }
}

/// Accumulates one CSV document in memory.
#[derive(Debug, Default, Clone)]
pub struct CsvDoc {
    text: String,
}

impl CsvDoc {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn comment(&mut self, line: impl AsRef<str>) -> &mut Self {
        let _ = writeln!(self.text, "# {}", line.as_ref());
        self
    }

    pub fn columns(&mut self, names: &[&str]) -> &mut Self {
        self.text.push_str(&names.join(","));
        self.text.push('\n');
        self
    }

    pub fn row(&mut self, values: &[f64]) -> &mut Self {
        let cells: Vec<String> = values.iter().map(|v| fmt_num(*v)).collect();
        self.text.push_str(&cells.join(","));
        self.text.push('\n');
        self
    }

    /// Row whose leading columns are integer ids.
    pub fn id_row(&mut self, ids: &[usize], values: &[f64]) -> &mut Self {
        let cells: Vec<String> = ids
            .iter()
            .map(|i| i.to_string())
            .chain(values.iter().map(|v| fmt_num(*v)))
            .collect();
        self.text.push_str(&cells.join(","));
        self.text.push('\n');
        self
    }

    pub fn into_string(self) -> String {
        self.text
    }
}
