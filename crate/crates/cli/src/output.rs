use std::io::Write;

use anyhow::Result;
use serde_json::{Map, Number, Value as Json};

/// One output cell.
#[derive(Debug, Clone, PartialEq)]
pub enum Value {
    Num(f64),
    Text(String),
}

impl Value {
    fn csv(&self) -> String {
        match self {
            Value::Num(v) => fmt_num(*v),
            Value::Text(s) => s.clone(),
        }
    }

    fn json(&self) -> Json {
        match self {
            Value::Num(v) => Number::from_f64(*v).map_or(Json::Null, Json::Number),
            Value::Text(s) => Json::String(s.clone()),
        }
    }
}

impl From<f64> for Value {
    fn from(v: f64) -> Self {
        Value::Num(v)
    }
}

impl From<String> for Value {
    fn from(s: String) -> Self {
        Value::Text(s)
    }
}

impl From<&str> for Value {
    fn from(s: &str) -> Self {
        Value::Text(s.to_string())
    }
}

/// Named fields in output order.
pub type Record = Vec<(String, Value)>;

pub fn field(name: &str, v: impl Into<Value>) -> (String, Value) {
    (name.to_string(), v.into())
}

/// 12 significant digits in plain decimal notation, switching to scientific
/// notation only for very large or very small magnitudes.
pub fn fmt_num(v: f64) -> String {
    if v.is_nan() {
        return "nan".into();
    }
    if v.is_infinite() {
        return if v > 0.0 { "inf" } else { "-inf" }.into();
    }
    if v == 0.0 {
        return "0".into();
    }
    // Rounding to 12 digits first settles the exponent (9.9999999999996 -> 1e1).
    let sci = format!("{v:.11e}");
    let exp: i32 = sci[sci.find('e').unwrap() + 1..].parse().unwrap();
    if !(-6..=15).contains(&exp) {
        return sci;
    }
    let decimals = (11 - exp).max(0) as usize;
    let s = format!("{v:.decimals$}");
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.').to_string()
    } else {
        s
    }
}

/// Writes records as CSV, preceded by `# ` comment lines and a
/// `# columns:` line, then a header row.
pub fn write_csv<W: Write>(w: W, comments: &[String], records: &[Record]) -> Result<()> {
    let mut w = w;
    for c in comments {
        writeln!(w, "# {c}")?;
    }
    let header: Vec<&str> = records
        .first()
        .map(|r| r.iter().map(|(k, _)| k.as_str()).collect())
        .unwrap_or_default();
    writeln!(w, "# columns: {}", header.join(", "))?;
    let mut csv = csv::Writer::from_writer(w);
    csv.write_record(&header)?;
    for r in records {
        csv.write_record(r.iter().map(|(_, v)| v.csv()))?;
    }
    csv.flush()?;
    Ok(())
}

/// Writes a plain numeric table as CSV.
pub fn write_table_csv<W: Write>(
    w: W,
    comments: &[String],
    columns: &[String],
    rows: &[Vec<f64>],
) -> Result<()> {
    let records: Vec<Record> = rows
        .iter()
        .map(|row| {
            columns
                .iter()
                .zip(row)
                .map(|(c, &v)| (c.clone(), Value::Num(v)))
                .collect()
        })
        .collect();
    write_csv(w, comments, &records)
}

pub fn to_json(r: &Record) -> Json {
    Json::Object(
        r.iter()
            .map(|(k, v)| (k.clone(), v.json()))
            .collect::<Map<_, _>>(),
    )
}

/// Aligned `name  value` lines for a single record.
pub fn write_human<W: Write>(mut w: W, r: &Record) -> Result<()> {
    let width = r.iter().map(|(k, _)| k.len()).max().unwrap_or(0);
    for (k, v) in r {
        writeln!(w, "{k:<width$}  {}", v.csv())?;
    }
    Ok(())
}
