//! Versioned JSON model files.
//!
//! A model file carries everything needed to reproduce inference: the task
//! direction, the full training configuration (seed included), both scalers,
//! and the layer parameters. Numbers are serialized with full round-trip
//! precision, so save -> load -> save is byte-identical.

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::neuralnet::{Layer, Network, NetworkConfig};
use crate::pipelines::{Scaler, TaskKind, TaskModel};

pub const MODEL_FORMAT_VERSION: u32 = 1;

#[derive(Serialize, Deserialize)]
struct ModelFile {
    format_version: u32,
    task: TaskKind,
    config: NetworkConfig,
    scalers: ScalerPair,
    layers: Vec<Layer>,
    dataset_fingerprint: String,
}

#[derive(Serialize, Deserialize)]
struct ScalerPair {
    input: Scaler,
    output: Scaler,
}

pub fn save_model(model: &TaskModel, path: &Path) -> Result<()> {
    let file = ModelFile {
        format_version: MODEL_FORMAT_VERSION,
        task: model.task,
        config: model.config.clone(),
        scalers: ScalerPair {
            input: model.input_scaler.clone(),
            output: model.output_scaler.clone(),
        },
        layers: model.net.layers.clone(),
        dataset_fingerprint: model.dataset_fingerprint.clone(),
    };
    validate(&file, path)?;
    let mut text = serde_json::to_string_pretty(&file).map_err(|e| Error::ModelFormat {
        path: path.to_path_buf(),
        message: e.to_string(),
    })?;
    text.push('\n');
    fs::write(path, text).map_err(|e| Error::io(path, e))
}

pub fn load_model(path: &Path) -> Result<TaskModel> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let file: ModelFile = serde_json::from_str(&text).map_err(|e| Error::ModelFormat {
        path: path.to_path_buf(),
        message: e.to_string(),
    })?;
    validate(&file, path)?;
    Ok(TaskModel {
        task: file.task,
        net: Network { layers: file.layers },
        input_scaler: file.scalers.input,
        output_scaler: file.scalers.output,
        config: file.config,
        dataset_fingerprint: file.dataset_fingerprint,
    })
}

fn validate(file: &ModelFile, path: &Path) -> Result<()> {
    let fail = |message: String| Error::ModelFormat {
        path: path.to_path_buf(),
        message,
    };

    if file.format_version != MODEL_FORMAT_VERSION {
        return Err(fail(format!(
            "unsupported format version {} (this build reads {})",
            file.format_version, MODEL_FORMAT_VERSION
        )));
    }
    let cfg = &file.config;
    cfg.validate()?;
    if cfg.input_dim != file.task.input_dim() || cfg.output_dim != file.task.output_dim() {
        return Err(fail(format!(
            "{} task requires {} -> {} dimensions, config says {} -> {}",
            file.task.as_str(),
            file.task.input_dim(),
            file.task.output_dim(),
            cfg.input_dim,
            cfg.output_dim
        )));
    }
    if file.layers.len() != cfg.hidden_layers + 1 {
        return Err(fail(format!(
            "expected {} layers, found {}",
            cfg.hidden_layers + 1,
            file.layers.len()
        )));
    }
    let mut fan_in = cfg.input_dim;
    let last = file.layers.len() - 1;
    for (i, layer) in file.layers.iter().enumerate() {
        if layer.cols != fan_in {
            return Err(fail(format!(
                "layer {i} expects {fan_in} inputs, has cols {}",
                layer.cols
            )));
        }
        let expected_rows = if i == last { cfg.output_dim } else { cfg.hidden_neurons };
        if layer.rows != expected_rows {
            return Err(fail(format!(
                "layer {i} has {} rows, expected {expected_rows}",
                layer.rows
            )));
        }
        if layer.weights.len() != layer.rows * layer.cols {
            return Err(fail(format!(
                "layer {i} has {} weights, dims say {}",
                layer.weights.len(),
                layer.rows * layer.cols
            )));
        }
        if layer.biases.len() != layer.rows {
            return Err(fail(format!(
                "layer {i} has {} biases, dims say {}",
                layer.biases.len(),
                layer.rows
            )));
        }
        let expected_activation = if i == last { cfg.output_activation } else { cfg.hidden_activation };
        if layer.activation != expected_activation {
            return Err(fail(format!("layer {i} activation tag does not match config")));
        }
        if layer.weights.iter().chain(&layer.biases).any(|v| !v.is_finite()) {
            return Err(fail(format!("layer {i} contains non-finite parameters")));
        }
        fan_in = layer.rows;
    }
    for (name, scaler, dim) in [
        ("input", &file.scalers.input, cfg.input_dim),
        ("output", &file.scalers.output, cfg.output_dim),
    ] {
        if scaler.len() != dim {
            return Err(fail(format!(
                "{name} scaler has {} entries, expected {dim}",
                scaler.len()
            )));
        }
        if scaler.means.iter().any(|v| !v.is_finite())
            || scaler.stds.iter().any(|v| !(v.is_finite() && *v > 0.0))
        {
            return Err(fail(format!("{name} scaler has invalid entries")));
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::neuralnet::init_network;
    use crate::pipelines::Scaler;

    fn test_model(task: TaskKind, seed: u64) -> TaskModel {
        let cfg = NetworkConfig::new(task.input_dim(), task.output_dim(), seed);
        let net = init_network(&cfg).unwrap();
        TaskModel {
            task,
            net,
            input_scaler: Scaler {
                means: vec![1.0; task.input_dim()],
                stds: vec![2.0; task.input_dim()],
            },
            output_scaler: Scaler {
                means: vec![0.5; task.output_dim()],
                stds: vec![3.0; task.output_dim()],
            },
            config: cfg,
            dataset_fingerprint: "00112233445566ff".into(),
        }
    }

    fn temp_path(name: &str) -> std::path::PathBuf {
        std::env::temp_dir().join(format!("fiberforge_io_{}_{name}", std::process::id()))
    }

    #[test]
    fn save_load_save_is_byte_identical() {
        let model = test_model(TaskKind::Predict, 4);
        let p1 = temp_path("a.json");
        let p2 = temp_path("b.json");
        save_model(&model, &p1).unwrap();
        let loaded = load_model(&p1).unwrap();
        save_model(&loaded, &p2).unwrap();
        assert_eq!(fs::read(&p1).unwrap(), fs::read(&p2).unwrap());
        fs::remove_file(&p1).ok();
        fs::remove_file(&p2).ok();
    }

    #[test]
    fn load_rejects_edited_dimensions() {
        let model = test_model(TaskKind::Design, 5);
        let path = temp_path("edited.json");
        save_model(&model, &path).unwrap();
        let text = fs::read_to_string(&path).unwrap();
        // Break the first layer's declared rows without touching its buffers.
        let broken = text.replacen("\"rows\": 14", "\"rows\": 13", 1);
        fs::write(&path, broken).unwrap();
        match load_model(&path) {
            Err(Error::ModelFormat { .. }) => {}
            other => panic!("expected ModelFormat error, got {other:?}"),
        }
        fs::remove_file(&path).ok();
    }

    #[test]
    fn load_rejects_wrong_version() {
        let model = test_model(TaskKind::Predict, 6);
        let path = temp_path("version.json");
        save_model(&model, &path).unwrap();
        let text = fs::read_to_string(&path).unwrap();
        let broken = text.replacen("\"format_version\": 1", "\"format_version\": 99", 1);
        fs::write(&path, broken).unwrap();
        assert!(matches!(load_model(&path), Err(Error::ModelFormat { .. })));
        fs::remove_file(&path).ok();
    }

    #[test]
    fn load_rejects_truncated_file() {
        let model = test_model(TaskKind::Predict, 7);
        let path = temp_path("trunc.json");
        save_model(&model, &path).unwrap();
        let text = fs::read_to_string(&path).unwrap();
        fs::write(&path, &text[..text.len() / 2]).unwrap();
        assert!(matches!(load_model(&path), Err(Error::ModelFormat { .. })));
        fs::remove_file(&path).ok();
    }

    #[test]
    fn load_missing_file_is_io_error() {
        assert!(matches!(
            load_model(Path::new("/nonexistent/model.json")),
            Err(Error::Io { .. })
        ));
    }
}
