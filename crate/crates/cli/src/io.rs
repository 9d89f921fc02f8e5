//! CSV and JSON artifacts. Every file carries the config hash: CSV files on a
//! leading `# config_hash=<hex>` line, JSON files in a `config_hash` field.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use maxbranch_core::{Error, Result};
use serde::Serialize;
use serde_json::Value;

const HASH_PREFIX: &str = "# config_hash=";

/// 17 significant digits, enough to round-trip any `f64`.
pub fn fmt_f64(x: f64) -> String {
    if x.is_finite() {
        format!("{x:.16e}")
    } else {
        x.to_string()
    }
}

pub struct Csv {
    pub hash: String,
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
    path: PathBuf,
}

impl Csv {
    pub fn column(&self, name: &str) -> Result<usize> {
        self.header
            .iter()
            .position(|h| h == name)
            .ok_or_else(|| self.malformed(format!("missing column `{name}`")))
    }

    /// Column `name` parsed as floats.
    pub fn floats(&self, name: &str) -> Result<Vec<f64>> {
        let c = self.column(name)?;
        self.rows
            .iter()
            .enumerate()
            .map(|(i, r)| {
                r[c].parse::<f64>()
                    .map_err(|_| self.malformed(format!("row {}: `{}` is not a number", i + 1, r[c])))
            })
            .collect()
    }

    fn malformed(&self, reason: String) -> Error {
        Error::Malformed {
            file: self.path.display().to_string(),
            reason,
        }
    }
}

pub fn write_csv<I>(path: &Path, hash: &str, header: &[&str], rows: I) -> Result<()>
where
    I: IntoIterator<Item = Vec<String>>,
{
    let mut out = String::new();
    writeln!(out, "{HASH_PREFIX}{hash}").unwrap();
    writeln!(out, "{}", header.join(",")).unwrap();
    for row in rows {
        writeln!(out, "{}", row.join(",")).unwrap();
    }
    std::fs::write(path, out)?;
    Ok(())
}

pub fn read_csv(path: &Path) -> Result<Csv> {
    let text = std::fs::read_to_string(path)?;
    let malformed = |reason: &str| Error::Malformed {
        file: path.display().to_string(),
        reason: reason.into(),
    };
    let mut lines = text.lines();
    let hash = lines
        .next()
        .and_then(|l| l.strip_prefix(HASH_PREFIX))
        .ok_or_else(|| malformed("first line is not a config hash"))?
        .to_string();
    let header: Vec<String> = lines
        .next()
        .ok_or_else(|| malformed("missing header"))?
        .split(',')
        .map(str::to_string)
        .collect();
    let mut rows = Vec::new();
    for (i, line) in lines.enumerate() {
        let row: Vec<String> = line.split(',').map(str::to_string).collect();
        if row.len() != header.len() {
            return Err(malformed(&format!("row {} has {} fields, expected {}", i + 1, row.len(), header.len())));
        }
        rows.push(row);
    }
    Ok(Csv {
        hash,
        header,
        rows,
        path: path.to_path_buf(),
    })
}

/// Pretty JSON with `config_hash` inserted as the first key.
pub fn write_json<T: Serialize>(path: &Path, hash: &str, body: &T) -> Result<()> {
    let mut map = serde_json::Map::new();
    map.insert("config_hash".into(), Value::String(hash.into()));
    match serde_json::to_value(body)? {
        Value::Object(fields) => map.extend(fields),
        other => {
            map.insert("data".into(), other);
        }
    }
    let mut text = serde_json::to_string_pretty(&Value::Object(map))?;
    text.push('\n');
    std::fs::write(path, text)?;
    Ok(())
}

pub fn read_json(path: &Path) -> Result<Value> {
    let text = std::fs::read_to_string(path)?;
    Ok(serde_json::from_str(&text)?)
}

/// Refuse artifacts produced under a different configuration.
pub fn check_hash(expected: &str, found: &str, path: &Path) -> Result<()> {
    if expected != found {
        return Err(Error::HashMismatch {
            expected: expected.into(),
            found: found.into(),
            file: path.display().to_string(),
        });
    }
    Ok(())
}

pub fn json_hash(value: &Value, path: &Path) -> Result<String> {
    value
        .get("config_hash")
        .and_then(Value::as_str)
        .map(str::to_string)
        .ok_or_else(|| Error::Malformed {
            file: path.display().to_string(),
            reason: "missing config_hash".into(),
        })
}
