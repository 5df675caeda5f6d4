//! Percentage-error evaluation against per-condition holdout references.
//!
//! The predictive task is scored once per cell: the model is queried at the
//! cell's deterministic manufacturing inputs and compared with that cell's
//! holdout feature means. The design task is scored per holdout record — its
//! inputs are the noisy fiber features — against the record's true flows,
//! then aggregated per cell; the binary bath output is tallied as a 2x2
//! confusion matrix over {0, 5}. Over-prediction yields positive error.

pub mod svg;

use std::fs;
use std::path::{Path, PathBuf};

use crate::error::{Error, Result};
use crate::neuralnet::LossCurve;
use crate::pipelines::{DesignedParams, SweepReport, TaskKind, TaskModel};
use crate::synthdata::{Cell, FiberFeature, FiberFeatures, ManufacturingParams, SampleRecord};

/// Relative percentage error `(predicted - reference) / reference * 100`.
pub fn percent_error(predicted: f64, reference: f64) -> Result<f64> {
    if reference == 0.0 {
        return Err(Error::ZeroReference);
    }
    Ok((predicted - reference) / reference * 100.0)
}

/// Per-cell reference values computed from holdout records only.
#[derive(Clone, Debug, PartialEq)]
pub enum CellReference {
    /// Holdout means of the four fiber features, indexed `[cell][feature]`.
    Predict { counts: [usize; 6], feature_means: [[f64; 4]; 6] },
    /// Holdout means of (sheath, core); these are deterministic per cell.
    Design { counts: [usize; 6], flow_means: [[f64; 2]; 6] },
}

impl CellReference {
    pub fn count(&self, cell: Cell) -> usize {
        match self {
            CellReference::Predict { counts, .. } | CellReference::Design { counts, .. } => {
                counts[cell.index()]
            }
        }
    }
}

pub fn cell_reference(holdout: &[SampleRecord], task: TaskKind) -> Result<CellReference> {
    let mut counts = [0usize; 6];
    let mut feature_sums = [[0.0f64; 4]; 6];
    let mut flow_sums = [[0.0f64; 2]; 6];
    for r in holdout {
        let i = r.cell.index();
        counts[i] += 1;
        for (s, v) in feature_sums[i].iter_mut().zip(r.features.as_array()) {
            *s += v;
        }
        flow_sums[i][0] += r.params.sheath_flow;
        flow_sums[i][1] += r.params.core_flow;
    }
    for cell in Cell::ALL {
        if counts[cell.index()] == 0 {
            return Err(Error::EmptyCell { cell_id: cell.id() });
        }
    }
    Ok(match task {
        TaskKind::Predict => {
            let mut feature_means = feature_sums;
            for (row, &n) in feature_means.iter_mut().zip(&counts) {
                for v in row {
                    *v /= n as f64;
                }
            }
            CellReference::Predict { counts, feature_means }
        }
        TaskKind::Design => {
            let mut flow_means = flow_sums;
            for (row, &n) in flow_means.iter_mut().zip(&counts) {
                for v in row {
                    *v /= n as f64;
                }
            }
            CellReference::Design { counts, flow_means }
        }
    })
}

/// Aggregated percentage errors of one (cell, output feature) pair.
#[derive(Clone, Debug, PartialEq)]
pub struct ErrorRow {
    pub cell: Cell,
    pub feature: &'static str,
    pub mean_signed_pct: f64,
    pub mean_abs_pct: f64,
    pub n: usize,
}

/// Predicted-vs-true bath counts over {0, 5}; index 0 is 0%, index 1 is 5%.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct BathConfusion {
    pub counts: [[usize; 2]; 2],
}

impl BathConfusion {
    pub fn total(&self) -> usize {
        self.counts.iter().flatten().sum()
    }

    pub fn correct(&self) -> usize {
        self.counts[0][0] + self.counts[1][1]
    }

    pub fn accuracy(&self) -> f64 {
        self.correct() as f64 / self.total() as f64
    }
}

pub const BATH_LEVELS: [f64; 2] = [0.0, 5.0];

/// Per-(cell, feature) percentage errors for one evaluated model, plus the
/// bath confusion matrix for design models.
#[derive(Clone, Debug, PartialEq)]
pub struct ErrorReport {
    pub task: TaskKind,
    /// Batch size of the evaluated model; 0 for oracle stubs.
    pub batch_size: usize,
    pub rows: Vec<ErrorRow>,
    pub bath_confusion: Option<BathConfusion>,
}

impl ErrorReport {
    pub fn row(&self, cell: Cell, feature: &str) -> Option<&ErrorRow> {
        self.rows.iter().find(|r| r.cell == cell && r.feature == feature)
    }

    /// Pooled (record-weighted) mean absolute percentage error of one
    /// feature across all cells.
    pub fn overall_abs(&self, feature: &str) -> Option<f64> {
        let rows: Vec<&ErrorRow> = self.rows.iter().filter(|r| r.feature == feature).collect();
        if rows.is_empty() {
            return None;
        }
        let total: usize = rows.iter().map(|r| r.n).sum();
        let sum: f64 = rows.iter().map(|r| r.mean_abs_pct * r.n as f64).sum();
        Some(sum / total as f64)
    }
}

/// The predictive feature names, in report order.
pub fn predict_feature_names() -> [&'static str; 4] {
    [
        FiberFeature::Length.csv_name(),
        FiberFeature::Width.csv_name(),
        FiberFeature::Porosity.csv_name(),
        FiberFeature::YoungsModulus.csv_name(),
    ]
}

/// The design flow names, in report order.
pub const DESIGN_FEATURES: [&str; 2] = ["sheath_ul_min", "core_ul_min"];

fn evaluate_predictive_with(
    holdout: &[SampleRecord],
    batch_size: usize,
    mut predict: impl FnMut(&ManufacturingParams) -> Result<FiberFeatures>,
) -> Result<ErrorReport> {
    let reference = cell_reference(holdout, TaskKind::Predict)?;
    let CellReference::Predict { counts, feature_means } = &reference else {
        unreachable!()
    };
    let mut rows = Vec::with_capacity(24);
    for cell in Cell::ALL {
        let predicted = predict(&cell.params())?;
        let predicted = predicted.as_array();
        for feature in FiberFeature::ALL {
            let reference_mean = feature_means[cell.index()][feature.index()];
            let e = percent_error(predicted[feature.index()], reference_mean)?;
            rows.push(ErrorRow {
                cell,
                feature: feature.csv_name(),
                mean_signed_pct: e,
                mean_abs_pct: e.abs(),
                n: counts[cell.index()],
            });
        }
    }
    Ok(ErrorReport { task: TaskKind::Predict, batch_size, rows, bath_confusion: None })
}

/// Score a predictive model: one query per cell at the cell's deterministic
/// inputs, compared against holdout feature means.
pub fn evaluate_predictive(model: &TaskModel, holdout: &[SampleRecord]) -> Result<ErrorReport> {
    if model.task != TaskKind::Predict {
        return Err(Error::TaskMismatch {
            required: TaskKind::Predict.as_str(),
            actual: model.task.as_str(),
        });
    }
    evaluate_predictive_with(holdout, model.config.batch_size, |p| model.predict_features(p))
}

/// Zero-error stub: "predicts" each cell's holdout means. Useful as a fixed
/// point for report plumbing.
pub fn evaluate_predictive_oracle(holdout: &[SampleRecord]) -> Result<ErrorReport> {
    let reference = cell_reference(holdout, TaskKind::Predict)?;
    let CellReference::Predict { feature_means, .. } = reference else {
        unreachable!()
    };
    evaluate_predictive_with(holdout, 0, move |params| {
        let cell = Cell::ALL
            .into_iter()
            .find(|c| c.params() == *params)
            .expect("oracle queried at a non-cell input");
        Ok(FiberFeatures::from_array(feature_means[cell.index()]))
    })
}

fn evaluate_design_with(
    holdout: &[SampleRecord],
    batch_size: usize,
    mut design: impl FnMut(&SampleRecord) -> Result<DesignedParams>,
) -> Result<ErrorReport> {
    // Validates that every cell is represented before any scoring.
    cell_reference(holdout, TaskKind::Design)?;

    let mut signed_sums = [[0.0f64; 2]; 6];
    let mut abs_sums = [[0.0f64; 2]; 6];
    let mut counts = [0usize; 6];
    let mut confusion = BathConfusion::default();
    for record in holdout {
        let designed = design(record)?;
        let i = record.cell.index();
        counts[i] += 1;
        for (k, (predicted, truth)) in [
            (designed.sheath_flow, record.params.sheath_flow),
            (designed.core_flow, record.params.core_flow),
        ]
        .into_iter()
        .enumerate()
        {
            let e = percent_error(predicted, truth)?;
            signed_sums[i][k] += e;
            abs_sums[i][k] += e.abs();
        }
        let true_idx = usize::from(record.params.bath_conc == 5.0);
        let pred_idx = usize::from(designed.bath_conc == 5.0);
        confusion.counts[true_idx][pred_idx] += 1;
    }

    let mut rows = Vec::with_capacity(12);
    for cell in Cell::ALL {
        let i = cell.index();
        for (k, feature) in DESIGN_FEATURES.into_iter().enumerate() {
            rows.push(ErrorRow {
                cell,
                feature,
                mean_signed_pct: signed_sums[i][k] / counts[i] as f64,
                mean_abs_pct: abs_sums[i][k] / counts[i] as f64,
                n: counts[i],
            });
        }
    }
    Ok(ErrorReport {
        task: TaskKind::Design,
        batch_size,
        rows,
        bath_confusion: Some(confusion),
    })
}

/// Score a design model: every holdout record's fiber features go in, the
/// recovered flows are compared with the record's true cell flows, and the
/// snapped bath output fills the confusion matrix.
pub fn evaluate_design(model: &TaskModel, holdout: &[SampleRecord]) -> Result<ErrorReport> {
    if model.task != TaskKind::Design {
        return Err(Error::TaskMismatch {
            required: TaskKind::Design.as_str(),
            actual: model.task.as_str(),
        });
    }
    evaluate_design_with(holdout, model.config.batch_size, |r| model.design_params(&r.features))
}

/// Zero-error stub: "designs" each record's true manufacturing inputs.
pub fn evaluate_design_oracle(holdout: &[SampleRecord]) -> Result<ErrorReport> {
    evaluate_design_with(holdout, 0, |record| {
        Ok(DesignedParams {
            sheath_flow: record.params.sheath_flow,
            core_flow: record.params.core_flow,
            bath_raw: record.params.bath_conc,
            bath_conc: record.params.bath_conc,
        })
    })
}

/// Loss-curve health summary.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct OverfitDiagnostic {
    pub final_training_loss: f64,
    pub final_validation_loss: f64,
    /// final validation / final training loss.
    pub ratio: f64,
    /// 0-based epoch of the (first) minimum validation loss.
    pub min_validation_epoch: usize,
    /// True when validation loss strictly rises across the last `k` epochs.
    pub rising_tail: bool,
}

pub const DEFAULT_OVERFIT_TAIL: usize = 5;

pub fn overfit_diagnostic(curve: &LossCurve, k: usize) -> Result<OverfitDiagnostic> {
    if k < 2 {
        return Err(Error::InvalidArgument(format!("tail length must be >= 2, got {k}")));
    }
    if curve.len() < k {
        return Err(Error::InvalidArgument(format!(
            "tail length {k} exceeds curve length {}",
            curve.len()
        )));
    }
    let final_training_loss = *curve.training.last().expect("nonempty");
    let final_validation_loss = *curve.validation.last().expect("nonempty");
    let min_validation_epoch = curve
        .validation
        .iter()
        .enumerate()
        .min_by(|a, b| a.1.partial_cmp(b.1).expect("finite losses"))
        .map(|(i, _)| i)
        .expect("nonempty");
    let tail = &curve.validation[curve.len() - k..];
    let rising_tail = tail.windows(2).all(|w| w[1] > w[0]);
    Ok(OverfitDiagnostic {
        final_training_loss,
        final_validation_loss,
        ratio: final_validation_loss / final_training_loss,
        min_validation_epoch,
        rising_tail,
    })
}

// ---------------------------------------------------------------------------
// Report emission: CSV tables and standalone SVG charts.
// ---------------------------------------------------------------------------

pub const ERROR_CSV_HEADER: &str = "task,batch_size,cell_id,feature,mean_signed_pct,mean_abs_pct,n";
pub const CONFUSION_CSV_HEADER: &str = "batch_size,true_bath,pred_bath,count";
pub const LOSS_CSV_HEADER: &str = "epoch,training_loss,validation_loss";

pub fn error_reports_csv(reports: &[&ErrorReport]) -> String {
    let mut out = String::from(ERROR_CSV_HEADER);
    out.push('\n');
    for report in reports {
        for row in &report.rows {
            out.push_str(&format!(
                "{},{},{},{},{},{},{}\n",
                report.task.as_str(),
                report.batch_size,
                row.cell.id(),
                row.feature,
                row.mean_signed_pct,
                row.mean_abs_pct,
                row.n
            ));
        }
    }
    out
}

pub fn confusion_csv(reports: &[&ErrorReport]) -> String {
    let mut out = String::from(CONFUSION_CSV_HEADER);
    out.push('\n');
    for report in reports {
        let Some(confusion) = &report.bath_confusion else {
            continue;
        };
        for (ti, &true_bath) in BATH_LEVELS.iter().enumerate() {
            for (pi, &pred_bath) in BATH_LEVELS.iter().enumerate() {
                out.push_str(&format!(
                    "{},{},{},{}\n",
                    report.batch_size, true_bath, pred_bath, confusion.counts[ti][pi]
                ));
            }
        }
    }
    out
}

pub fn loss_curve_csv(curve: &LossCurve) -> String {
    let mut out = String::from(LOSS_CSV_HEADER);
    out.push('\n');
    for (i, (t, v)) in curve.training.iter().zip(&curve.validation).enumerate() {
        out.push_str(&format!("{},{},{}\n", i + 1, t, v));
    }
    out
}

pub fn write_text(path: &Path, text: &str) -> Result<()> {
    fs::write(path, text).map_err(|e| Error::io(path, e))
}

/// Write `errors.csv` (and `confusion.csv` for design reports) under `dir`.
pub fn emit_error_report(report: &ErrorReport, dir: &Path) -> Result<Vec<PathBuf>> {
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let mut written = Vec::new();
    let errors_path = dir.join("errors.csv");
    write_text(&errors_path, &error_reports_csv(&[report]))?;
    written.push(errors_path);
    if report.bath_confusion.is_some() {
        let confusion_path = dir.join("confusion.csv");
        write_text(&confusion_path, &confusion_csv(&[report]))?;
        written.push(confusion_path);
    }
    Ok(written)
}

/// Write `<stem>.csv` and `<stem>.svg` for one loss curve under `dir`.
pub fn emit_loss_curve(curve: &LossCurve, title: &str, dir: &Path, stem: &str) -> Result<Vec<PathBuf>> {
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let csv_path = dir.join(format!("{stem}.csv"));
    write_text(&csv_path, &loss_curve_csv(curve))?;
    let svg_path = dir.join(format!("{stem}.svg"));
    write_text(&svg_path, &svg::loss_curve_svg(curve, title))?;
    Ok(vec![csv_path, svg_path])
}

/// Materialize a sweep: combined error CSV, confusion CSV for design, one
/// loss CSV/SVG pair per batch size, and one error-vs-batch-size SVG per
/// output feature.
pub fn emit_sweep_report(sweep: &SweepReport, dir: &Path) -> Result<Vec<PathBuf>> {
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let mut written = Vec::new();

    let reports: Vec<&ErrorReport> = sweep.entries.iter().map(|e| &e.report).collect();
    let errors_path = dir.join("errors.csv");
    write_text(&errors_path, &error_reports_csv(&reports))?;
    written.push(errors_path);

    if sweep.task == TaskKind::Design {
        let confusion_path = dir.join("confusion.csv");
        write_text(&confusion_path, &confusion_csv(&reports))?;
        written.push(confusion_path);
    }

    for entry in &sweep.entries {
        let stem = format!("loss_b{:02}", entry.batch_size);
        let title = format!(
            "{} task, batch size {}: loss per epoch",
            sweep.task.as_str(),
            entry.batch_size
        );
        written.extend(emit_loss_curve(&entry.curve, &title, dir, &stem)?);
    }

    let feature_names: Vec<&'static str> = match sweep.task {
        TaskKind::Predict => predict_feature_names().to_vec(),
        TaskKind::Design => DESIGN_FEATURES.to_vec(),
    };
    for feature in feature_names {
        let series: Vec<svg::Series> = Cell::ALL
            .into_iter()
            .map(|cell| svg::Series {
                label: cell.id().to_string(),
                points: sweep
                    .entries
                    .iter()
                    .map(|entry| {
                        let row = entry.report.row(cell, feature).expect("complete report");
                        (entry.batch_size as f64, row.mean_signed_pct)
                    })
                    .collect(),
            })
            .collect();
        let path = dir.join(format!("error_vs_batch_{feature}.svg"));
        let chart = svg::line_chart(
            &format!("{feature}: mean signed error vs batch size"),
            "batch size",
            "mean signed error (%)",
            &series,
        );
        write_text(&path, &chart)?;
        written.push(path);
    }
    Ok(written)
}
