use std::path::PathBuf;

use latticeld::transforms::{write_sidecar, Provenance};
use serde_json::{json, Value};

use crate::config::RunConfig;
use crate::error::CliError;

/// Writes result files under one directory, each with a JSON provenance
/// sidecar carrying the command, the effective configuration and its hash.
/// Nothing time-dependent is recorded, so identical runs give identical
/// bytes.
pub struct Output {
    dir: PathBuf,
    command: String,
    config: RunConfig,
}

impl Output {
    pub fn new(dir: PathBuf, command: impl Into<String>, config: &RunConfig) -> Result<Self, CliError> {
        std::fs::create_dir_all(&dir)?;
        Ok(Self {
            dir,
            command: command.into(),
            config: config.clone(),
        })
    }

    /// Same settings, writing into a subdirectory.
    pub fn child(&self, name: &str) -> Result<Self, CliError> {
        Self::new(self.dir.join(name), self.command.clone(), &self.config)
    }

    pub fn provenance(&self, extra: Provenance) -> Provenance {
        let mut out = Provenance::new();
        out.insert("command".into(), self.command.clone().into());
        let mut config = serde_json::to_value(&self.config).expect("configuration serialises");
        if let Value::Object(map) = &mut config {
            map.remove("output_dir");
            map.remove("threads");
        }
        out.insert("config".into(), config);
        out.insert("config_hash".into(), self.config.hash().into());
        out.insert("version".into(), env!("CARGO_PKG_VERSION").into());
        if !extra.is_empty() {
            out.insert("details".into(), json!(extra));
        }
        out
    }

    /// Writes `name` from `body` plus its sidecar; returns the CSV path.
    pub fn csv(
        &self,
        name: &str,
        extra: Provenance,
        body: impl FnOnce(&mut Vec<u8>) -> latticeld::Result<()>,
    ) -> Result<PathBuf, CliError> {
        let path = self.dir.join(name);
        let mut buf = Vec::new();
        body(&mut buf)?;
        std::fs::write(&path, buf)?;
        write_sidecar(&path, &self.provenance(extra))?;
        log::info!("wrote {}", path.display());
        Ok(path)
    }

    /// Writes a JSON document that embeds its own provenance.
    pub fn json(&self, name: &str, value: Value) -> Result<PathBuf, CliError> {
        let path = self.dir.join(name);
        let doc = json!({ "result": value, "provenance": self.provenance(Provenance::new()) });
        let mut text = serde_json::to_string_pretty(&doc).map_err(latticeld::Error::from)?;
        text.push('\n');
        std::fs::write(&path, text)?;
        log::info!("wrote {}", path.display());
        Ok(path)
    }
}

/// Plain CSV from serialisable rows.
pub fn write_rows<T: serde::Serialize>(rows: &[T], w: &mut Vec<u8>) -> latticeld::Result<()> {
    let mut out = csv::Writer::from_writer(w);
    for r in rows {
        out.serialize(r).map_err(|e| latticeld::Error::Parse(e.to_string()))?;
    }
    out.flush()?;
    Ok(())
}
