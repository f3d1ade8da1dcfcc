//! CSV tables with a commented metadata header, and JSON detail files.

use serde::Serialize;
use sha2::{Digest, Sha256};

use divekit_core::graphnet::FEATURE_SET;

/// Provenance written at the top of every output file.
#[derive(Clone, Debug, Serialize)]
pub struct Metadata {
    pub tool: String,
    pub command: String,
    pub seed: u64,
    pub feature_set: String,
    pub config_hash: String,
    /// Free-form conventions the reader needs, such as tie handling.
    pub notes: Vec<String>,
}

impl Metadata {
    pub fn new<C: Serialize>(command: &str, seed: u64, config: &C) -> Self {
        let json = serde_json::to_vec(config).expect("configs serialize");
        let digest = Sha256::digest(&json);
        let config_hash = digest.iter().take(8).map(|b| format!("{b:02x}")).collect();
        Metadata {
            tool: format!("divekit {}", env!("CARGO_PKG_VERSION")),
            command: command.into(),
            seed,
            feature_set: FEATURE_SET.into(),
            config_hash,
            notes: Vec::new(),
        }
    }

    pub fn with_note(mut self, note: impl Into<String>) -> Self {
        self.notes.push(note.into());
        self
    }

    fn header(&self) -> String {
        let mut s = format!(
            "# {} command={} seed={} feature_set={} config_hash={}\n",
            self.tool, self.command, self.seed, self.feature_set, self.config_hash
        );
        for n in &self.notes {
            s.push_str(&format!("# {n}\n"));
        }
        s
    }
}

/// Header comment lines followed by the rows as CSV.
pub fn csv_bytes<T: Serialize>(meta: &Metadata, rows: &[T]) -> Result<Vec<u8>, csv::Error> {
    let mut out = meta.header().into_bytes();
    {
        let mut w = csv::Writer::from_writer(&mut out);
        for r in rows {
            w.serialize(r)?;
        }
        w.flush()?;
    }
    Ok(out)
}

#[derive(Serialize)]
struct Detail<'a, T> {
    meta: &'a Metadata,
    data: &'a T,
}

pub fn json_bytes<T: Serialize>(meta: &Metadata, data: &T) -> Vec<u8> {
    let mut v = serde_json::to_vec_pretty(&Detail { meta, data }).expect("reports serialize");
    v.push(b'\n');
    v
}
