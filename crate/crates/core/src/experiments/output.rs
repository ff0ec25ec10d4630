use std::fmt::Write as _;
use std::io::Write;

use sha2::{Digest, Sha256};

use super::ExperimentSpec;
use crate::error::{Error, Result};
use crate::CODE_VERSION;

/// Provenance written as `#` comment lines above every CSV header.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RunMeta {
    pub command: String,
    pub source: String,
    /// SHA-256 of the canonical TOML of the resolved scenario.
    pub config_hash: String,
    pub seeds: Vec<u64>,
    pub version: String,
}

impl RunMeta {
    pub fn new(spec: &ExperimentSpec) -> Self {
        let digest = Sha256::digest(spec.scenario.to_toml().as_bytes());
        let config_hash = digest.iter().fold(String::with_capacity(64), |mut s, b| {
            let _ = write!(s, "{b:02x}");
            s
        });
        RunMeta {
            command: spec.command.to_string(),
            source: spec.source.to_string(),
            config_hash,
            seeds: spec.scenario.experiment.seeds.clone(),
            version: CODE_VERSION.to_string(),
        }
    }

    pub fn write_header<W: Write>(&self, out: &mut W) -> Result<()> {
        let io = |source| Error::Io { path: "<output>".into(), source };
        writeln!(out, "# version: {}", self.version).map_err(io)?;
        writeln!(out, "# command: {}", self.command).map_err(io)?;
        writeln!(out, "# source: {}", self.source).map_err(io)?;
        writeln!(out, "# config_sha256: {}", self.config_hash).map_err(io)?;
        writeln!(out, "# seeds: {}", compact_seeds(&self.seeds)).map_err(io)?;
        Ok(())
    }

    /// CSV writer positioned after the comment block.
    pub fn csv_writer<W: Write>(&self, mut out: W) -> Result<csv::Writer<W>> {
        self.write_header(&mut out)?;
        Ok(csv::Writer::from_writer(out))
    }
}

/// `0..200` style runs for consecutive seeds.
pub fn compact_seeds(seeds: &[u64]) -> String {
    let mut parts = Vec::new();
    let mut i = 0;
    while i < seeds.len() {
        let mut j = i;
        while j + 1 < seeds.len() && seeds[j + 1] == seeds[j] + 1 {
            j += 1;
        }
        if j - i >= 2 {
            parts.push(format!("{}..{}", seeds[i], seeds[j] + 1));
        } else {
            parts.extend(seeds[i..=j].iter().map(u64::to_string));
        }
        i = j + 1;
    }
    parts.join(",")
}

pub(crate) fn fmt_f64(v: f64) -> String {
    v.to_string()
}
