use std::fmt::Write as _;
use std::path::Path;
use std::time::{SystemTime, UNIX_EPOCH};

use serde::Serialize;
use sha2::{Digest, Sha256};

use super::config::ExperimentConfig;
use crate::error::Result;

/// Twelve significant digits: fixed notation for decimal exponents in
/// `[-5, 12)`, scientific otherwise. Negative zero prints as `0`.
pub fn format_number(x: f64) -> String {
    if x.is_nan() {
        return "NaN".into();
    }
    if x.is_infinite() {
        return if x > 0.0 { "inf".into() } else { "-inf".into() };
    }
    if x == 0.0 {
        return "0".into();
    }
    let sci = format!("{x:.11e}");
    let exp: i32 = sci[sci.find('e').expect("exponent present") + 1..]
        .parse()
        .expect("integer exponent");
    if (-5..12).contains(&exp) {
        let decimals = (11 - exp) as usize;
        format!("{x:.decimals$}")
    } else {
        sci
    }
}

/// Accumulates CSV text with LF line endings.
pub struct Csv {
    text: String,
}

impl Csv {
    pub fn new(header: &[String]) -> Self {
        let mut text = header.join(",");
        text.push('\n');
        Self { text }
    }

    pub fn row(&mut self, leading: &str, values: impl IntoIterator<Item = f64>) {
        self.text.push_str(leading);
        for v in values {
            self.text.push(',');
            self.text.push_str(&format_number(v));
        }
        self.text.push('\n');
    }

    pub fn into_string(self) -> String {
        self.text
    }
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    let digest = Sha256::digest(bytes);
    let mut out = String::with_capacity(64);
    for b in digest.iter() {
        write!(out, "{b:02x}").expect("writing to a String");
    }
    out
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OutputRecord {
    pub file: String,
    pub sha256: String,
}

/// Written once per run next to the outputs. Timestamps honour
/// `SOURCE_DATE_EPOCH`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunManifest {
    pub tool: String,
    pub version: String,
    pub command: String,
    pub config: ExperimentConfig,
    pub started_unix: u64,
    pub finished_unix: u64,
    pub outputs: Vec<OutputRecord>,
}

pub fn unix_now() -> u64 {
    if let Some(epoch) = std::env::var("SOURCE_DATE_EPOCH")
        .ok()
        .and_then(|s| s.trim().parse().ok())
    {
        return epoch;
    }
    SystemTime::now()
        .duration_since(UNIX_EPOCH)
        .map(|d| d.as_secs())
        .unwrap_or(0)
}

/// Collects output files, writes them and then the manifest.
pub struct OutputSet {
    files: Vec<(String, Vec<u8>)>,
}

impl OutputSet {
    pub fn new() -> Self {
        Self { files: Vec::new() }
    }

    pub fn add(&mut self, name: &str, contents: impl Into<Vec<u8>>) {
        self.files.push((name.to_string(), contents.into()));
    }

    pub fn add_json<T: Serialize>(&mut self, name: &str, value: &T) -> Result<()> {
        let mut text = serde_json::to_string_pretty(value)?;
        text.push('\n');
        self.add(name, text);
        Ok(())
    }

    pub fn names(&self) -> Vec<&str> {
        self.files.iter().map(|(n, _)| n.as_str()).collect()
    }

    pub fn write(self, dir: &Path, command: &str, config: &ExperimentConfig, started: u64) -> Result<RunManifest> {
        std::fs::create_dir_all(dir)?;
        let mut outputs = Vec::with_capacity(self.files.len());
        for (name, bytes) in &self.files {
            std::fs::write(dir.join(name), bytes)?;
            outputs.push(OutputRecord {
                file: name.clone(),
                sha256: sha256_hex(bytes),
            });
        }
        outputs.sort_by(|a, b| a.file.cmp(&b.file));
        let manifest = RunManifest {
            tool: env!("CARGO_PKG_NAME").into(),
            version: env!("CARGO_PKG_VERSION").into(),
            command: command.into(),
            config: config.clone(),
            started_unix: started,
            finished_unix: unix_now(),
            outputs,
        };
        let mut text = serde_json::to_string_pretty(&manifest)?;
        text.push('\n');
        std::fs::write(dir.join("manifest.json"), text)?;
        Ok(manifest)
    }
}

impl Default for OutputSet {
    fn default() -> Self {
        Self::new()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn number_format() {
        assert_eq!(format_number(0.8127), "0.812700000000");
        assert_eq!(format_number(-0.0), "0");
        assert_eq!(format_number(1.0), "1.00000000000");
        assert_eq!(format_number(std::f64::consts::PI), "3.14159265359");
        assert_eq!(format_number(1.5e-7), "1.50000000000e-7");
        assert_eq!(format_number(2.5e-5), "0.0000250000000000");
        assert_eq!(format_number(-123456.0), "-123456.000000");
        assert_eq!(format_number(3e12), "3.00000000000e12");
        assert_eq!(format_number(9.999999999999e-6), "0.0000100000000000");
        assert_eq!(format_number(f64::NAN), "NaN");
    }

    #[test]
    fn hex_digest() {
        assert_eq!(
            sha256_hex(b"abc"),
            "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad"
        );
    }

    #[test]
    fn csv_rows() {
        let mut csv = Csv::new(&["step".into(), "p_1".into()]);
        csv.row("0", [1.0]);
        assert_eq!(csv.into_string(), "step,p_1\n0,1.00000000000\n");
    }
}
