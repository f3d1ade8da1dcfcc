//! Training corpus: per instance, the best known objective and a pool of
//! good feasible solutions.

use std::fs;
use std::path::Path;

use divekit_core::bnb::PoolEntry;
use serde::{Deserialize, Serialize};

use crate::format::FormatError;

pub const CORPUS_VERSION: u32 = 1;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PoolSolution {
    pub x: Vec<f64>,
    pub objective: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CorpusEntry {
    pub id: String,
    /// Best objective found; proven optimal when `proven` is set.
    pub optimum: f64,
    pub proven: bool,
    /// Whether the pool holds every optimal assignment found by enumeration.
    pub enumerated: bool,
    pub pool: Vec<PoolSolution>,
}

impl CorpusEntry {
    pub fn pool_entries(&self) -> Vec<PoolEntry> {
        self.pool.iter().map(|p| PoolEntry { x: p.x.clone(), objective: p.objective }).collect()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Corpus {
    pub version: u32,
    pub entries: Vec<CorpusEntry>,
}

impl Corpus {
    pub fn new(entries: Vec<CorpusEntry>) -> Self {
        Corpus { version: CORPUS_VERSION, entries }
    }

    pub fn get(&self, id: &str) -> Option<&CorpusEntry> {
        self.entries.iter().find(|e| e.id == id)
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string(self).expect("corpora serialize");
        s.push('\n');
        s
    }

    pub fn from_json(text: &str) -> Result<Self, FormatError> {
        let c: Corpus = serde_json::from_str(text)?;
        if c.version != CORPUS_VERSION {
            return Err(FormatError::Version { found: c.version.to_string(), expected: CORPUS_VERSION.to_string() });
        }
        Ok(c)
    }

    pub fn save(&self, path: &Path) -> Result<(), FormatError> {
        fs::write(path, self.to_json())?;
        Ok(())
    }

    pub fn load(path: &Path) -> Result<Self, FormatError> {
        Corpus::from_json(&fs::read_to_string(path)?)
    }
}
