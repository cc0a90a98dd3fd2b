//! Input parsing and output writing.
//!
//! Counts are CSV with header `index,count` and 1-based contiguous
//! indices. A model is JSON: an array of probabilities, a family spec
//! `{"family": "power_law", "theta": 1.0}` (with `"theta": "fit"` to
//! estimate it), or the bare string `"fit"`.
//!
//! Every CSV output starts with a `#` line carrying the tool version, seed
//! and configuration hash; JSON outputs carry the same under
//! `"provenance"`.

use std::fs;
use std::io::Write;
use std::path::Path;

use dfgof_core::SampleCounts;
use serde::Serialize;
use serde_json::Value;
use sha2::{Digest, Sha256};

use crate::error::{CliError, CliResult};

pub const TOOL: &str = "dfgof";
pub const VERSION: &str = env!("CARGO_PKG_VERSION");

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

pub fn read_file(path: &Path) -> CliResult<Vec<u8>> {
    fs::read(path).map_err(|e| CliError::io(path, e))
}

/// Parses an `index,count` table.
pub fn parse_counts(text: &str, origin: &str) -> CliResult<SampleCounts> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .trim(csv::Trim::All)
        .from_reader(text.as_bytes());
    let header = reader
        .headers()
        .map_err(|e| CliError::input(format!("{origin}: {e}")))?
        .clone();
    if header.len() != 2 || &header[0] != "index" || &header[1] != "count" {
        return Err(CliError::input(format!(
            "{origin}:1:1: expected header 'index,count'"
        )));
    }
    let mut counts = Vec::new();
    for record in reader.records() {
        let record = record.map_err(|e| CliError::input(format!("{origin}: {e}")))?;
        let line = record.position().map_or(0, |p| p.line());
        if record.len() != 2 {
            return Err(CliError::input(format!(
                "{origin}:{line}:1: expected 2 fields, found {}",
                record.len()
            )));
        }
        let index: usize = record[0].parse().map_err(|_| {
            CliError::input(format!(
                "{origin}:{line}:1: index '{}' is not a positive integer",
                &record[0]
            ))
        })?;
        if index != counts.len() + 1 {
            return Err(CliError::input(format!(
                "{origin}:{line}:1: expected index {}, found {index}",
                counts.len() + 1
            )));
        }
        let count: u64 = record[1].parse().map_err(|_| {
            CliError::input(format!(
                "{origin}:{line}:2: count '{}' is not a non-negative integer",
                &record[1]
            ))
        })?;
        counts.push(count);
    }
    SampleCounts::new(counts).map_err(|e| CliError::input(format!("{origin}: {e}")))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(untagged)]
pub enum ThetaSpec {
    Value(f64),
    Fit,
}

#[derive(Debug, Clone, PartialEq)]
pub enum ModelSpec {
    Inline(Vec<f64>),
    Family {
        family: Option<String>,
        theta: ThetaSpec,
    },
}

/// Reads `--model`: inline JSON when it starts like JSON, otherwise a path
/// to a JSON file.
pub fn load_model_spec(arg: &str) -> CliResult<(ModelSpec, String)> {
    let trimmed = arg.trim_start();
    let (text, origin) = if trimmed.starts_with(['[', '{', '"']) {
        (arg.to_string(), "--model".to_string())
    } else {
        let path = Path::new(arg);
        let bytes = read_file(path)?;
        let text =
            String::from_utf8(bytes).map_err(|_| CliError::input(format!("{arg}: not UTF-8")))?;
        (text, arg.to_string())
    };
    let spec = parse_model_spec(&text, &origin)?;
    Ok((spec, text))
}

pub fn parse_model_spec(text: &str, origin: &str) -> CliResult<ModelSpec> {
    let value: Value = serde_json::from_str(text)
        .map_err(|e| CliError::input(format!("{origin}:{}:{}: {e}", e.line(), e.column())))?;
    match value {
        Value::Array(items) => {
            let probs = items
                .iter()
                .enumerate()
                .map(|(i, v)| {
                    v.as_f64().ok_or_else(|| {
                        CliError::input(format!("{origin}: entry {} is not a number", i + 1))
                    })
                })
                .collect::<CliResult<Vec<f64>>>()?;
            Ok(ModelSpec::Inline(probs))
        }
        Value::String(s) if s == "fit" => Ok(ModelSpec::Family {
            family: None,
            theta: ThetaSpec::Fit,
        }),
        Value::Object(map) => {
            let family = match map.get("family") {
                Some(Value::String(s)) => s.clone(),
                _ => {
                    return Err(CliError::input(format!(
                        "{origin}: family spec needs a string 'family'"
                    )))
                }
            };
            let theta = match map.get("theta") {
                Some(Value::String(s)) if s == "fit" => ThetaSpec::Fit,
                Some(v) => ThetaSpec::Value(v.as_f64().ok_or_else(|| {
                    CliError::input(format!("{origin}: 'theta' must be a number or \"fit\""))
                })?),
                None => ThetaSpec::Fit,
            };
            if let Some(extra) = map.keys().find(|k| *k != "family" && *k != "theta") {
                return Err(CliError::input(format!(
                    "{origin}: unknown field '{extra}'"
                )));
            }
            Ok(ModelSpec::Family {
                family: Some(family),
                theta,
            })
        }
        _ => Err(CliError::input(format!(
            "{origin}: expected an array of probabilities, a family spec or \"fit\""
        ))),
    }
}

/// Identity of a run, written into every output file.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunProvenance {
    pub tool: &'static str,
    pub version: &'static str,
    pub command: String,
    pub seed: Option<u64>,
    pub config_hash: String,
}

impl RunProvenance {
    /// Hashes the canonical JSON form of `config`.
    pub fn new(command: &str, seed: Option<u64>, config: &Value) -> Self {
        let canonical = serde_json::to_vec(config).expect("JSON values always serialize");
        Self {
            tool: TOOL,
            version: VERSION,
            command: command.to_string(),
            seed,
            config_hash: sha256_hex(&canonical),
        }
    }

    pub fn header_line(&self) -> String {
        let seed = self
            .seed
            .map_or_else(|| "none".to_string(), |s| s.to_string());
        format!(
            "# {} {} command={} seed={} config={}",
            self.tool, self.version, self.command, seed, self.config_hash
        )
    }
}

/// Shortest representation that parses back to the same value.
pub fn fmt_f64(x: f64) -> String {
    format!("{x:?}")
}

pub fn create_dir(dir: &Path) -> CliResult<()> {
    fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))
}

/// Writes a CSV file with the provenance line, a header and rows.
pub fn write_csv(
    path: &Path,
    prov: &RunProvenance,
    header: &[&str],
    rows: &[Vec<String>],
) -> CliResult<()> {
    let mut buf = Vec::new();
    writeln!(buf, "{}", prov.header_line()).expect("writing to memory");
    {
        let mut w = csv::Writer::from_writer(&mut buf);
        w.write_record(header).map_err(|e| CliError::io(path, e))?;
        for row in rows {
            w.write_record(row).map_err(|e| CliError::io(path, e))?;
        }
        w.flush().map_err(|e| CliError::io(path, e))?;
    }
    fs::write(path, buf).map_err(|e| CliError::io(path, e))
}

/// Reads a CSV written by [`write_csv`], skipping the provenance line.
pub fn read_csv_rows(path: &Path) -> CliResult<(Vec<String>, Vec<Vec<String>>)> {
    let text = String::from_utf8(read_file(path)?).map_err(|_| CliError::io(path, "not UTF-8"))?;
    let body: String = text
        .lines()
        .filter(|l| !l.starts_with('#'))
        .map(|l| format!("{l}\n"))
        .collect();
    let mut r = csv::Reader::from_reader(body.as_bytes());
    let header = r
        .headers()
        .map_err(|e| CliError::io(path, e))?
        .iter()
        .map(String::from)
        .collect();
    let rows = r
        .records()
        .map(|rec| {
            rec.map(|rec| rec.iter().map(String::from).collect())
                .map_err(|e| CliError::io(path, e))
        })
        .collect::<CliResult<Vec<Vec<String>>>>()?;
    Ok((header, rows))
}

pub fn write_json(path: &Path, value: &impl Serialize) -> CliResult<()> {
    let mut text = serde_json::to_string_pretty(value).map_err(|e| CliError::io(path, e))?;
    text.push('\n');
    fs::write(path, text).map_err(|e| CliError::io(path, e))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn counts_round_trip() {
        let c = parse_counts("index,count\n1,3\n2,0\n3,7\n", "t").unwrap();
        assert_eq!(c.counts(), &[3, 0, 7]);
        assert_eq!(c.n(), 10);
    }

    #[test]
    fn counts_diagnostics_name_line_and_column() {
        let e = parse_counts("index,count\n1,3\n2,x\n", "c.csv").unwrap_err();
        assert_eq!(e.exit_code(), 2);
        assert!(e.to_string().starts_with("c.csv:3:2:"), "{e}");
        let e = parse_counts("index,count\n1,3\n3,1\n", "c.csv").unwrap_err();
        assert!(e.to_string().starts_with("c.csv:3:1:"), "{e}");
        let e = parse_counts("idx,count\n1,3\n", "c.csv").unwrap_err();
        assert!(e.to_string().contains("index,count"));
        assert!(parse_counts("index,count\n1,-2\n2,1\n", "c").is_err());
        assert!(parse_counts("index,count\n1,0\n2,0\n", "c").is_err());
    }

    #[test]
    fn model_specs() {
        assert_eq!(
            parse_model_spec("[0.5, 0.5]", "m").unwrap(),
            ModelSpec::Inline(vec![0.5, 0.5])
        );
        assert_eq!(
            parse_model_spec(r#"{"family":"power_law","theta":1.0}"#, "m").unwrap(),
            ModelSpec::Family {
                family: Some("power_law".into()),
                theta: ThetaSpec::Value(1.0)
            }
        );
        assert_eq!(
            parse_model_spec(r#"{"family":"power_law","theta":"fit"}"#, "m").unwrap(),
            ModelSpec::Family {
                family: Some("power_law".into()),
                theta: ThetaSpec::Fit
            }
        );
        assert_eq!(
            parse_model_spec(r#""fit""#, "m").unwrap(),
            ModelSpec::Family {
                family: None,
                theta: ThetaSpec::Fit
            }
        );
        assert!(parse_model_spec("[0.5, \"a\"]", "m").is_err());
        assert!(parse_model_spec(r#"{"family":"power_law","beta":1}"#, "m").is_err());
        let e = parse_model_spec("[0.5,", "m").unwrap_err();
        assert!(e.to_string().starts_with("m:1:"));
    }

    #[test]
    fn provenance_hash_is_stable() {
        let cfg = serde_json::json!({"a": 1, "b": [1.5, 2]});
        let p1 = RunProvenance::new("test", Some(3), &cfg);
        let p2 = RunProvenance::new("test", Some(3), &cfg);
        assert_eq!(p1, p2);
        assert_eq!(p1.config_hash.len(), 64);
        assert!(p1.header_line().starts_with("# dfgof "));
    }

    #[test]
    fn floats_round_trip() {
        for x in [0.1, -1e-20, 1.0 / 3.0, 12345.678] {
            assert_eq!(fmt_f64(x).parse::<f64>().unwrap(), x);
        }
    }
}
