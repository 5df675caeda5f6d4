//! Task assembly: feature standardization, training orchestration, the
//! batch-size sweep, and physical-unit inference.
//!
//! Two task directions share one network shape family. The predictive task
//! maps the three manufacturing inputs to the four fiber features; the
//! design task is the exact swap. Inputs and outputs are z-scored with
//! scalers fit on the training split only, and every public interface works
//! in physical units — standardized values never leak out.

use std::thread;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::evaluation::{evaluate_design, evaluate_predictive, ErrorReport};
use crate::neuralnet::{self, init_network, LossCurve, Network, NetworkConfig, Sample};
use crate::synthdata::{fingerprint, FiberFeatures, ManufacturingParams, SampleRecord};

/// Fraction of the model set reserved for validation during training.
pub const DEFAULT_VAL_FRACTION: f64 = 0.2;

/// Bath concentration is binary in the underlying experiments. The design
/// model emits a continuous value that is snapped to the nearer of {0, 5};
/// the tie at 2.5 goes to 5.
pub const BATH_SNAP_THRESHOLD: f64 = 2.5;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TaskKind {
    Predict,
    Design,
}

impl TaskKind {
    pub fn as_str(self) -> &'static str {
        match self {
            TaskKind::Predict => "predict",
            TaskKind::Design => "design",
        }
    }

    pub fn parse(s: &str) -> Option<TaskKind> {
        match s {
            "predict" => Some(TaskKind::Predict),
            "design" => Some(TaskKind::Design),
            _ => None,
        }
    }

    pub fn input_dim(self) -> usize {
        match self {
            TaskKind::Predict => 3,
            TaskKind::Design => 4,
        }
    }

    pub fn output_dim(self) -> usize {
        match self {
            TaskKind::Predict => 4,
            TaskKind::Design => 3,
        }
    }
}

/// Per-feature z-score transform, fit with the population (divide-by-n)
/// standard deviation. A constant feature gets std 1 so standardization
/// never divides by zero.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Scaler {
    pub means: Vec<f64>,
    pub stds: Vec<f64>,
}

impl Scaler {
    pub fn fit(rows: &[Vec<f64>]) -> Result<Scaler> {
        if rows.len() < 2 {
            return Err(Error::InvalidArgument(format!(
                "need at least 2 rows to fit a scaler, got {}",
                rows.len()
            )));
        }
        let dim = rows[0].len();
        if rows.iter().any(|r| r.len() != dim) {
            return Err(Error::DimensionMismatch("ragged rows".into()));
        }
        let n = rows.len() as f64;
        let mut means = vec![0.0; dim];
        for row in rows {
            for (m, v) in means.iter_mut().zip(row) {
                *m += v;
            }
        }
        for m in &mut means {
            *m /= n;
        }
        let mut stds = vec![0.0; dim];
        for row in rows {
            for ((s, v), m) in stds.iter_mut().zip(row).zip(&means) {
                *s += (v - m) * (v - m);
            }
        }
        for s in &mut stds {
            *s = (*s / n).sqrt();
            if *s == 0.0 {
                *s = 1.0;
            }
        }
        Ok(Scaler { means, stds })
    }

    pub fn len(&self) -> usize {
        self.means.len()
    }

    pub fn is_empty(&self) -> bool {
        self.means.is_empty()
    }

    pub fn apply(&self, x: &[f64]) -> Vec<f64> {
        assert_eq!(x.len(), self.len(), "scaler dimension mismatch");
        x.iter()
            .zip(&self.means)
            .zip(&self.stds)
            .map(|((v, m), s)| (v - m) / s)
            .collect()
    }

    pub fn invert(&self, z: &[f64]) -> Vec<f64> {
        assert_eq!(z.len(), self.len(), "scaler dimension mismatch");
        z.iter()
            .zip(&self.means)
            .zip(&self.stds)
            .map(|((v, m), s)| m + s * v)
            .collect()
    }
}

/// Column indices whose values are constant across `rows`; these get the
/// degenerate-std guard when a scaler is fit on them.
pub fn constant_columns(rows: &[Vec<f64>]) -> Vec<usize> {
    let Some(first) = rows.first() else {
        return Vec::new();
    };
    (0..first.len())
        .filter(|&c| rows.iter().all(|r| r[c] == first[c]))
        .collect()
}

const MANUFACTURING_COLUMNS: [&str; 3] = ["sheath_ul_min", "core_ul_min", "bath_pct"];
const FEATURE_COLUMNS: [&str; 4] = ["length_um", "width_um", "porosity_pct", "youngs_mpa"];

/// Names of the input and output columns that are constant across `records`
/// for `task` and will therefore train under the degenerate-std guard.
/// Callers can surface these as warnings; single-cell datasets hit this.
pub fn degenerate_feature_names(task: TaskKind, records: &[SampleRecord]) -> Vec<&'static str> {
    let (inputs, targets) = task_rows(task, records);
    let (input_names, output_names): (&[&'static str], &[&'static str]) = match task {
        TaskKind::Predict => (&MANUFACTURING_COLUMNS, &FEATURE_COLUMNS),
        TaskKind::Design => (&FEATURE_COLUMNS, &MANUFACTURING_COLUMNS),
    };
    let mut names: Vec<&'static str> = constant_columns(&inputs)
        .into_iter()
        .map(|c| input_names[c])
        .collect();
    names.extend(constant_columns(&targets).into_iter().map(|c| output_names[c]));
    names
}

/// A trained network bundled with its scalers and provenance.
#[derive(Clone, Debug, PartialEq)]
pub struct TaskModel {
    pub task: TaskKind,
    pub net: Network,
    pub input_scaler: Scaler,
    pub output_scaler: Scaler,
    pub config: NetworkConfig,
    pub dataset_fingerprint: String,
}

/// Design-model output: flows plus the raw and snapped bath concentration.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DesignedParams {
    pub sheath_flow: f64,
    pub core_flow: f64,
    /// Continuous bath output before snapping, kept for diagnostics.
    pub bath_raw: f64,
    /// Snapped to 0 or 5.
    pub bath_conc: f64,
}

pub fn snap_bath(raw: f64) -> f64 {
    if raw >= BATH_SNAP_THRESHOLD {
        5.0
    } else {
        0.0
    }
}

impl TaskModel {
    /// Forward task: manufacturing inputs to fiber features, in physical
    /// units.
    pub fn predict_features(&self, params: &ManufacturingParams) -> Result<FiberFeatures> {
        if self.task != TaskKind::Predict {
            return Err(Error::TaskMismatch {
                required: TaskKind::Predict.as_str(),
                actual: self.task.as_str(),
            });
        }
        let x = self
            .input_scaler
            .apply(&[params.sheath_flow, params.core_flow, params.bath_conc]);
        let (y, _) = neuralnet::forward(&self.net, &x)?;
        let out = self.output_scaler.invert(&y);
        Ok(FiberFeatures {
            length: out[0],
            width: out[1],
            porosity: out[2],
            youngs_modulus: out[3],
        })
    }

    /// Inverse task: desired fiber features to manufacturing inputs. The
    /// bath output is snapped to {0, 5}; the raw value is kept alongside.
    pub fn design_params(&self, features: &FiberFeatures) -> Result<DesignedParams> {
        if self.task != TaskKind::Design {
            return Err(Error::TaskMismatch {
                required: TaskKind::Design.as_str(),
                actual: self.task.as_str(),
            });
        }
        let x = self.input_scaler.apply(&features.as_array());
        let (y, _) = neuralnet::forward(&self.net, &x)?;
        let out = self.output_scaler.invert(&y);
        Ok(DesignedParams {
            sheath_flow: out[0],
            core_flow: out[1],
            bath_raw: out[2],
            bath_conc: snap_bath(out[2]),
        })
    }

    pub fn save(&self, path: &std::path::Path) -> Result<()> {
        neuralnet::io::save_model(self, path)
    }

    pub fn load(path: &std::path::Path) -> Result<TaskModel> {
        neuralnet::io::load_model(path)
    }
}

fn task_rows(task: TaskKind, records: &[SampleRecord]) -> (Vec<Vec<f64>>, Vec<Vec<f64>>) {
    let mut inputs = Vec::with_capacity(records.len());
    let mut targets = Vec::with_capacity(records.len());
    for r in records {
        let manufacturing = vec![r.params.sheath_flow, r.params.core_flow, r.params.bath_conc];
        let features = r.features.as_array().to_vec();
        match task {
            TaskKind::Predict => {
                inputs.push(manufacturing);
                targets.push(features);
            }
            TaskKind::Design => {
                inputs.push(features);
                targets.push(manufacturing);
            }
        }
    }
    (inputs, targets)
}

/// Train one task model on `records`. The config's dimensions are forced to
/// the task topology; everything else (seed, batch size, epochs, rate) is
/// taken as given. Scalers are fit on `records` only.
pub fn train_task(
    task: TaskKind,
    records: &[SampleRecord],
    cfg: &NetworkConfig,
) -> Result<(TaskModel, LossCurve)> {
    if records.is_empty() {
        return Err(Error::InvalidArgument("empty model set".into()));
    }
    let mut cfg = cfg.clone();
    cfg.input_dim = task.input_dim();
    cfg.output_dim = task.output_dim();

    let (inputs, targets) = task_rows(task, records);
    let input_scaler = Scaler::fit(&inputs)?;
    let output_scaler = Scaler::fit(&targets)?;
    let data: Vec<Sample> = inputs
        .iter()
        .zip(&targets)
        .map(|(x, t)| Sample {
            input: input_scaler.apply(x),
            target: output_scaler.apply(t),
        })
        .collect();

    let mut net = init_network(&cfg)?;
    let curve = neuralnet::train(&mut net, &data, &cfg, DEFAULT_VAL_FRACTION)?;
    let model = TaskModel {
        task,
        net,
        input_scaler,
        output_scaler,
        config: cfg,
        dataset_fingerprint: fingerprint(records),
    };
    Ok((model, curve))
}

pub fn train_predictive(
    records: &[SampleRecord],
    cfg: &NetworkConfig,
) -> Result<(TaskModel, LossCurve)> {
    train_task(TaskKind::Predict, records, cfg)
}

pub fn train_design(
    records: &[SampleRecord],
    cfg: &NetworkConfig,
) -> Result<(TaskModel, LossCurve)> {
    train_task(TaskKind::Design, records, cfg)
}

/// One sweep entry: the model trained at `batch_size`, its loss curve, and
/// its holdout error report.
#[derive(Clone, Debug, PartialEq)]
pub struct SweepEntry {
    pub batch_size: usize,
    pub model: TaskModel,
    pub curve: LossCurve,
    pub report: ErrorReport,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SweepReport {
    pub task: TaskKind,
    pub entries: Vec<SweepEntry>,
}

/// Seed for the independent model trained at one batch size:
/// `base_seed * 10_000 + batch_size` (wrapping), so serial and parallel
/// execution agree.
pub fn sweep_sub_seed(base_seed: u64, batch_size: usize) -> u64 {
    base_seed.wrapping_mul(10_000).wrapping_add(batch_size as u64)
}

fn sweep_entry(
    task: TaskKind,
    model_set: &[SampleRecord],
    holdout: &[SampleRecord],
    base_cfg: &NetworkConfig,
    batch_size: usize,
) -> Result<SweepEntry> {
    let mut cfg = base_cfg.clone();
    cfg.batch_size = batch_size;
    cfg.seed = sweep_sub_seed(base_cfg.seed, batch_size);
    let (model, curve) = train_task(task, model_set, &cfg)?;
    let report = match task {
        TaskKind::Predict => evaluate_predictive(&model, holdout)?,
        TaskKind::Design => evaluate_design(&model, holdout)?,
    };
    Ok(SweepEntry { batch_size, model, curve, report })
}

fn check_sweep_args(
    model_set: &[SampleRecord],
    holdout: &[SampleRecord],
    sizes: &[usize],
) -> Result<()> {
    if model_set.is_empty() || holdout.is_empty() {
        return Err(Error::InvalidArgument(
            "sweep needs nonempty model and holdout sets".into(),
        ));
    }
    if sizes.is_empty() {
        return Err(Error::InvalidArgument("no batch sizes given".into()));
    }
    if sizes.contains(&0) {
        return Err(Error::InvalidArgument("batch sizes must be at least 1".into()));
    }
    Ok(())
}

/// Train one independent model per batch size and evaluate each on the
/// holdout set. Entries come back in `sizes` order.
pub fn sweep_batch_sizes(
    task: TaskKind,
    model_set: &[SampleRecord],
    holdout: &[SampleRecord],
    base_cfg: &NetworkConfig,
    sizes: &[usize],
) -> Result<SweepReport> {
    check_sweep_args(model_set, holdout, sizes)?;
    let entries = sizes
        .iter()
        .map(|&b| sweep_entry(task, model_set, holdout, base_cfg, b))
        .collect::<Result<Vec<_>>>()?;
    Ok(SweepReport { task, entries })
}

/// Same result as [`sweep_batch_sizes`], with entries trained on one thread
/// each. Sub-seeding makes the outcome identical to the serial path.
pub fn sweep_batch_sizes_parallel(
    task: TaskKind,
    model_set: &[SampleRecord],
    holdout: &[SampleRecord],
    base_cfg: &NetworkConfig,
    sizes: &[usize],
) -> Result<SweepReport> {
    check_sweep_args(model_set, holdout, sizes)?;
    let entries = thread::scope(|scope| {
        let handles: Vec<_> = sizes
            .iter()
            .map(|&b| scope.spawn(move || sweep_entry(task, model_set, holdout, base_cfg, b)))
            .collect();
        handles
            .into_iter()
            .map(|h| h.join().expect("sweep worker panicked"))
            .collect::<Result<Vec<_>>>()
    })?;
    Ok(SweepReport { task, entries })
}
