//! Versioned JSON container for trained model parameters.

use std::fs;
use std::path::Path;

use divekit_core::graphnet::{GnnDims, GnnParams, NormStats, FEATURE_SET};
use serde::{Deserialize, Serialize};

use crate::format::FormatError;

const FORMAT_TAG: &str = "divekit-model";
pub const CHECKPOINT_VERSION: u32 = 1;

#[derive(Serialize, Deserialize)]
struct Dims {
    var_feats: usize,
    cons_feats: usize,
    hidden: usize,
    heads: usize,
}

#[derive(Serialize, Deserialize)]
struct Running {
    v_mean: Vec<f64>,
    v_var: Vec<f64>,
    c_mean: Vec<f64>,
    c_var: Vec<f64>,
    initialized: bool,
}

#[derive(Serialize, Deserialize)]
struct Checkpoint {
    format: String,
    version: u32,
    feature_set: String,
    dims: Dims,
    theta: Vec<f64>,
    running: Running,
}

pub fn model_to_json(p: &GnnParams) -> String {
    let ck = Checkpoint {
        format: FORMAT_TAG.into(),
        version: CHECKPOINT_VERSION,
        feature_set: FEATURE_SET.into(),
        dims: Dims {
            var_feats: p.dims.var_feats,
            cons_feats: p.dims.cons_feats,
            hidden: p.dims.hidden,
            heads: p.dims.heads,
        },
        theta: p.theta.clone(),
        running: Running {
            v_mean: p.running.v_mean.clone(),
            v_var: p.running.v_var.clone(),
            c_mean: p.running.c_mean.clone(),
            c_var: p.running.c_var.clone(),
            initialized: p.running_initialized,
        },
    };
    let mut s = serde_json::to_string(&ck).expect("checkpoints always serialize");
    s.push('\n');
    s
}

/// Parses a checkpoint, refusing other format versions or feature sets.
pub fn model_from_json(text: &str) -> Result<GnnParams, FormatError> {
    let ck: Checkpoint = serde_json::from_str(text)?;
    if ck.format != FORMAT_TAG || ck.version != CHECKPOINT_VERSION {
        return Err(FormatError::Version {
            found: format!("{} v{}", ck.format, ck.version),
            expected: format!("{FORMAT_TAG} v{CHECKPOINT_VERSION}"),
        });
    }
    if ck.feature_set != FEATURE_SET {
        return Err(FormatError::Version { found: ck.feature_set, expected: FEATURE_SET.into() });
    }
    let dims = GnnDims {
        var_feats: ck.dims.var_feats,
        cons_feats: ck.dims.cons_feats,
        hidden: ck.dims.hidden,
        heads: ck.dims.heads,
    };
    let p = GnnParams {
        dims,
        theta: ck.theta,
        running: NormStats {
            v_mean: ck.running.v_mean,
            v_var: ck.running.v_var,
            c_mean: ck.running.c_mean,
            c_var: ck.running.c_var,
        },
        running_initialized: ck.running.initialized,
    };
    p.validate().map_err(|e| FormatError::Invalid(e.to_string()))?;
    Ok(p)
}

pub fn save_model(p: &GnnParams, path: &Path) -> Result<(), FormatError> {
    fs::write(path, model_to_json(p))?;
    Ok(())
}

pub fn load_model(path: &Path) -> Result<GnnParams, FormatError> {
    model_from_json(&fs::read_to_string(path)?)
}
