use std::collections::BTreeMap;
use std::path::Path;

use serde::Serialize;
use serde_json::Value;
use sha2::{Digest, Sha256};

use hupa_core::variance::{OrderClass, ScalingFit, VarianceCurve};
use hupa_core::{BoxDomain, CellStats};

#[derive(Debug, Serialize)]
pub struct FileDigest {
    pub path: String,
    pub sha256: String,
}

#[derive(Debug, Serialize)]
pub struct DomainSummary {
    pub lengths: Vec<f64>,
    pub periodic: bool,
}

/// JSON record of one run: everything needed to reproduce it.
#[derive(Debug, Serialize)]
pub struct RunReport {
    pub tool: &'static str,
    pub version: &'static str,
    pub command: String,
    pub seed: u64,
    pub parameters: BTreeMap<String, Value>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub domain: Option<DomainSummary>,
    pub inputs: Vec<FileDigest>,
    pub outputs: Vec<FileDigest>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub curve: Option<VarianceCurve>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub fit: Option<ScalingFit>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub class: Option<OrderClass>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub cell_stats: Option<CellStats>,
    pub notes: Vec<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub duration_seconds: Option<f64>,
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    Sha256::digest(bytes).iter().map(|b| format!("{b:02x}")).collect()
}

impl RunReport {
    pub fn new(command: &str, seed: u64) -> Self {
        Self {
            tool: "hupa",
            version: env!("CARGO_PKG_VERSION"),
            command: command.to_string(),
            seed,
            parameters: BTreeMap::new(),
            domain: None,
            inputs: Vec::new(),
            outputs: Vec::new(),
            curve: None,
            fit: None,
            class: None,
            cell_stats: None,
            notes: Vec::new(),
            duration_seconds: None,
        }
    }

    pub fn param(&mut self, key: &str, value: Value) {
        self.parameters.insert(key.to_string(), value);
    }

    pub fn note(&mut self, text: &str) {
        self.notes.push(text.to_string());
    }

    pub fn set_domain(&mut self, domain: &BoxDomain) {
        self.domain = Some(DomainSummary {
            lengths: domain.lengths().to_vec(),
            periodic: domain.is_periodic(),
        });
    }

    pub fn add_input(&mut self, path: &Path, bytes: &[u8]) {
        self.inputs.push(FileDigest {
            path: path.display().to_string(),
            sha256: sha256_hex(bytes),
        });
    }

    pub fn add_output(&mut self, path: &Path, bytes: &[u8]) {
        self.outputs.push(FileDigest {
            path: path.display().to_string(),
            sha256: sha256_hex(bytes),
        });
    }

    pub fn to_json(&self) -> String {
        let mut text = serde_json::to_string_pretty(self).expect("report serializes");
        text.push('\n');
        text
    }
}
