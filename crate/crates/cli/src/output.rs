use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use anyhow::Context;
use serde::Serialize;

/// Round-trippable rendering: 17 significant digits, `.` decimal point.
pub fn num(x: f64) -> String {
    if x.is_nan() {
        "nan".into()
    } else if x == f64::INFINITY {
        "inf".into()
    } else if x == f64::NEG_INFINITY {
        "-inf".into()
    } else {
        format!("{x:.16e}")
    }
}

/// CSV text with a leading tool-version comment line.
pub struct Csv {
    text: String,
}

impl Csv {
    pub fn new(header: &str) -> Self {
        let mut text = format!("# mvbvlab {}\n", mvbv_core::VERSION);
        text.push_str(header);
        text.push('\n');
        Self { text }
    }

    pub fn row(&mut self, cells: &[String]) {
        let _ = writeln!(self.text, "{}", cells.join(","));
    }

    pub fn as_str(&self) -> &str {
        &self.text
    }
}

fn with_ext(prefix: &Path, ext: &str) -> PathBuf {
    let mut name = prefix.as_os_str().to_owned();
    name.push(".");
    name.push(ext);
    PathBuf::from(name)
}

pub fn write_text(prefix: &Path, ext: &str, text: &str) -> anyhow::Result<PathBuf> {
    let path = with_ext(prefix, ext);
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    }
    fs::write(&path, text).with_context(|| format!("writing {}", path.display()))?;
    Ok(path)
}

pub fn to_json<T: Serialize>(value: &T) -> anyhow::Result<String> {
    let mut s = serde_json::to_string_pretty(value)?;
    s.push('\n');
    Ok(s)
}

/// Writes the CSV and JSON artifacts under `prefix`, or prints them when no
/// prefix is given (CSV first, then JSON).
pub fn emit(prefix: Option<&Path>, csv: Option<&Csv>, json: &str) -> anyhow::Result<()> {
    match prefix {
        Some(prefix) => {
            if let Some(csv) = csv {
                write_text(prefix, "csv", csv.as_str())?;
            }
            write_text(prefix, "json", json)?;
        }
        None => {
            if let Some(csv) = csv {
                print!("{}", csv.as_str());
            }
            print!("{json}");
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn numbers_round_trip() {
        for x in [0.1, 1.0 / 3.0, 1e-300, 6.02e23, 0.0, 5e-324] {
            assert_eq!(num(x).parse::<f64>().unwrap(), x);
        }
        assert_eq!(num(0.5), "5.0000000000000000e-1");
        assert_eq!(num(f64::INFINITY), "inf");
    }
}
