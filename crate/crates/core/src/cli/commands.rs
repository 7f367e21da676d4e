//! Command implementations. Each returns a [`Report`]; printing and exit
//! codes are handled by the caller.

use std::fs;
use std::path::{Path, PathBuf};
use std::time::{Duration, Instant};

use super::config::{EvalOn, Grid, RunConfig};
use super::report::{sci, Report};
use crate::dataio::{self, synth, Dataset};
use crate::error::{Error, Result};
use crate::inference::{classify, evaluate, EncodeOptions};
use crate::linalg::Matrix;
use crate::model::{one_hot_encode, Hyperparams, SampleMode};
use crate::optimizer::{self, ModelLayout, TrainState};
use crate::patching::{build_patch_matrix, ConvGeometry};
use crate::persistence::{load_model, save_model, TrainedModel};

pub const DEFAULT_MODEL_PATH: &str = "model.dcadl";

pub fn load_dataset(cfg: &RunConfig) -> Result<Dataset> {
    let path = cfg
        .dataset
        .as_deref()
        .ok_or_else(|| Error::Config("no dataset given; set dataset = PATH or pass --dataset".into()))?;
    let mode = cfg
        .mode
        .unwrap_or(if path.is_dir() { SampleMode::Image2D } else { SampleMode::Feature1D });
    match mode {
        SampleMode::Image2D => dataio::load_image_dir(path, cfg.input_rows.zip(cfg.input_cols)),
        SampleMode::Feature1D => {
            let ds = dataio::load_feature_file(path)?;
            let (d, _) = ds.sample_shape();
            if let Some(want) = cfg.input_rows.filter(|&r| r != d) {
                return Err(Error::Data {
                    path: path.to_path_buf(),
                    message: format!("records have {d} features, configuration expects {want}"),
                });
            }
            Ok(ds)
        }
    }
}

fn geometry_for(cfg: &RunConfig, ds: &Dataset) -> Result<ConvGeometry> {
    let (r, c) = ds.sample_shape();
    cfg.geometry(r, c)
        .map_err(|e| Error::InvalidInput(format!("samples of size {r}x{c} do not fit the configured atoms: {e}")))
}

/// Trains a fresh model on `train` with the given hyperparameters.
pub fn fit(cfg: &RunConfig, hp: &Hyperparams, geom: ConvGeometry, train: &Dataset) -> Result<TrainState> {
    let xbar = build_patch_matrix(train.samples(), &geom)?;
    let y = one_hot_encode(train.labels(), train.classes())?;
    let layout = ModelLayout {
        geom,
        mode: train.mode(),
        atoms: cfg.atoms,
        class_names: train.classes().to_vec(),
    };
    optimizer::train(&xbar, &y, &layout, hp, cfg.seed)
}

#[derive(Debug, Clone)]
pub struct TrainRun {
    pub state: TrainState,
    pub train: Dataset,
    pub test: Dataset,
    pub elapsed: Duration,
}

/// Splits `ds` per the configuration and trains on the training part.
pub fn train_on(cfg: &RunConfig, ds: &Dataset) -> Result<TrainRun> {
    let geom = geometry_for(cfg, ds)?;
    let (train, test) = dataio::split(ds, cfg.split, cfg.seed)?;
    let start = Instant::now();
    let state = fit(cfg, &cfg.hyperparams, geom, &train)?;
    Ok(TrainRun {
        state,
        train,
        test,
        elapsed: start.elapsed(),
    })
}

pub fn write_trace_csv(path: &Path, trace: &[f64]) -> Result<()> {
    let mut text = String::from("iteration,objective\n");
    for (t, v) in trace.iter().enumerate() {
        text.push_str(&format!("{t},{v}\n"));
    }
    fs::write(path, text).map_err(|e| Error::io(path, e))
}

pub fn cmd_train(cfg: &RunConfig) -> Result<Report> {
    let ds = load_dataset(cfg)?;
    let run = train_on(cfg, &ds)?;
    let out = cfg.out.clone().unwrap_or_else(|| PathBuf::from(DEFAULT_MODEL_PATH));
    save_model(&run.state.dictionary, &run.state.classifier, &cfg.hyperparams, &out)?;
    if let Some(path) = &cfg.trace {
        write_trace_csv(path, &run.state.objective_trace)?;
    }
    let trace = &run.state.objective_trace;
    let mut r = Report::default();
    r.field("model", out.display())
        .field("train_samples", run.train.len())
        .field("test_samples", run.test.len())
        .field("atoms", cfg.atoms)
        .field("patches", run.state.dictionary.geom().patch_count())
        .field("iterations", run.state.iteration)
        .field("converged", run.state.converged)
        .field("objective_initial", trace[0])
        .field("objective_final", trace[trace.len() - 1])
        .field("train_time_s", format!("{:.6}", run.elapsed.as_secs_f64()));
    r.table(
        "objective_trace",
        &["iteration", "objective"],
        trace.iter().enumerate().map(|(t, v)| vec![t.to_string(), v.to_string()]).collect(),
    );
    Ok(r)
}

fn load_configured_model(cfg: &RunConfig) -> Result<(PathBuf, TrainedModel)> {
    let path = cfg
        .model
        .clone()
        .ok_or_else(|| Error::Config("no model given; set model = PATH or pass --model".into()))?;
    let model = load_model(&path)?;
    Ok((path, model))
}

fn encode_options(cfg: &RunConfig, model: &TrainedModel) -> EncodeOptions {
    EncodeOptions {
        lambda1: model.hyperparams.lambda1,
        apply_threshold: cfg.threshold_at_test,
    }
}

fn check_dataset_fits(model: &TrainedModel, ds: &Dataset) -> Result<()> {
    let g = model.dictionary.geom();
    let shape = ds.sample_shape();
    if shape != (g.input_rows, g.input_cols) || ds.mode() != model.dictionary.mode() {
        return Err(Error::dims(
            "eval",
            format!(
                "model expects {:?} samples of {}x{}, dataset holds {:?} samples of {}x{}",
                model.dictionary.mode(),
                g.input_rows,
                g.input_cols,
                ds.mode(),
                shape.0,
                shape.1
            ),
        ));
    }
    Ok(())
}

pub fn cmd_eval(cfg: &RunConfig) -> Result<Report> {
    let (path, model) = load_configured_model(cfg)?;
    let ds = load_dataset(cfg)?;
    check_dataset_fits(&model, &ds)?;
    let part = match cfg.eval_on {
        EvalOn::All => ds,
        on => {
            let (train, test) = dataio::split(&ds, cfg.split, cfg.seed)?;
            if on == EvalOn::Train {
                train
            } else {
                test
            }
        }
    };
    let rep = evaluate(
        part.samples(),
        part.labels(),
        &model.dictionary,
        &model.classifier,
        encode_options(cfg, &model),
    )?;
    let mut r = Report::default();
    r.field("model", path.display())
        .field(
            "on",
            match cfg.eval_on {
                EvalOn::Test => "test",
                EvalOn::Train => "train",
                EvalOn::All => "all",
            },
        )
        .field("samples", rep.samples)
        .field("correct", rep.correct)
        .field("accuracy", format!("{:.4}", rep.accuracy))
        .field("mean_time_per_sample_s", sci(rep.mean_time_per_sample.as_secs_f64()))
        .field("total_time_s", format!("{:.6}", rep.total_time.as_secs_f64()));
    Ok(r)
}

pub fn cmd_predict(cfg: &RunConfig, input: &Path, index: usize) -> Result<Report> {
    let (_, model) = load_configured_model(cfg)?;
    let sample = match model.dictionary.mode() {
        SampleMode::Image2D => dataio::load_image(input)?,
        SampleMode::Feature1D => {
            let ds = dataio::load_feature_file(input)?;
            ds.samples()
                .get(index)
                .cloned()
                .ok_or_else(|| Error::Data {
                    path: input.to_path_buf(),
                    message: format!("record {index} requested but the file holds {}", ds.len()),
                })?
        }
    };
    let g = model.dictionary.geom();
    if sample.shape() != (g.input_rows, g.input_cols) {
        return Err(Error::dims(
            "predict",
            format!(
                "model expects {}x{} samples, {} is {}x{}",
                g.input_rows,
                g.input_cols,
                input.display(),
                sample.rows(),
                sample.cols()
            ),
        ));
    }
    let pred = classify(&sample, &model.dictionary, &model.classifier, encode_options(cfg, &model))?;
    let mut r = Report::default();
    r.field("class", &pred.class_name);
    r.table(
        "scores",
        &["class", "score"],
        model
            .classifier
            .class_names()
            .iter()
            .zip(&pred.scores)
            .map(|(n, s)| vec![n.clone(), s.to_string()])
            .collect(),
    );
    Ok(r)
}

#[derive(Debug, Clone, PartialEq)]
pub struct GridCell {
    pub hyperparams: Hyperparams,
    pub fold_accuracy: Vec<f64>,
    pub mean_accuracy: f64,
}

/// Stratified k-fold cross-validation of every grid cell on `ds`.
/// Returns all cells in grid order and the index of the best one; the
/// earliest cell wins ties.
pub fn cross_validate(cfg: &RunConfig, grid: &Grid, ds: &Dataset) -> Result<(Vec<GridCell>, usize)> {
    let geom = geometry_for(cfg, ds)?;
    let folds = dataio::stratified_folds(ds, cfg.folds, cfg.seed)?;
    let mut cells: Vec<GridCell> = Vec::new();
    let mut best = 0;
    for hp in grid.cells(&cfg.hyperparams) {
        let mut accs = Vec::with_capacity(folds.len());
        for (f, held) in folds.iter().enumerate() {
            let rest: Vec<usize> = folds
                .iter()
                .enumerate()
                .filter(|&(g, _)| g != f)
                .flat_map(|(_, idx)| idx.iter().copied())
                .collect();
            let train = ds.subset(&rest)?;
            let val = ds.subset(held)?;
            let state = fit(cfg, &hp, geom, &train)?;
            let opts = EncodeOptions {
                lambda1: hp.lambda1,
                apply_threshold: cfg.threshold_at_test,
            };
            accs.push(evaluate(val.samples(), val.labels(), &state.dictionary, &state.classifier, opts)?.accuracy);
        }
        let mean = accs.iter().sum::<f64>() / accs.len() as f64;
        if !cells.is_empty() && mean > cells[best].mean_accuracy {
            best = cells.len();
        }
        cells.push(GridCell {
            hyperparams: hp,
            fold_accuracy: accs,
            mean_accuracy: mean,
        });
    }
    Ok((cells, best))
}

pub fn cmd_gridsearch(cfg: &RunConfig, grid: &Grid) -> Result<Report> {
    let n = grid.cell_count();
    if n > cfg.grid_cap {
        return Err(Error::Config(format!(
            "grid has {n} cells, above the cap of {}; shrink the value lists or raise grid_cap",
            cfg.grid_cap
        )));
    }
    let ds = load_dataset(cfg)?;
    let (train, _) = dataio::split(&ds, cfg.split, cfg.seed)?;
    let (cells, best) = cross_validate(cfg, grid, &train)?;
    let b = &cells[best].hyperparams;
    let mut r = Report::default();
    r.field("cells", cells.len())
        .field("folds", cfg.folds)
        .field("samples", train.len())
        .field("best_cell", best)
        .field("best_lambda1", b.lambda1)
        .field("best_lambda2", b.lambda2)
        .field("best_lambda3", b.lambda3)
        .field("best_lambda4", b.lambda4)
        .field("best_rho", b.rho)
        .field("best_accuracy", format!("{:.4}", cells[best].mean_accuracy));
    r.table(
        "grid",
        &["cell", "lambda1", "lambda2", "lambda3", "lambda4", "rho", "accuracy"],
        cells
            .iter()
            .enumerate()
            .map(|(i, c)| {
                let h = &c.hyperparams;
                vec![
                    i.to_string(),
                    h.lambda1.to_string(),
                    h.lambda2.to_string(),
                    h.lambda3.to_string(),
                    h.lambda4.to_string(),
                    h.rho.to_string(),
                    format!("{:.4}", c.mean_accuracy),
                ]
            })
            .collect(),
    );
    Ok(r)
}

fn min_mean_max(v: &[f64]) -> (f64, f64, f64) {
    let min = v.iter().copied().fold(f64::INFINITY, f64::min);
    let max = v.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    (min, v.iter().sum::<f64>() / v.len() as f64, max)
}

pub fn cmd_bench(cfg: &RunConfig) -> Result<Report> {
    if cfg.repetitions < 3 {
        return Err(Error::Config(format!(
            "bench needs at least 3 repetitions, got {}",
            cfg.repetitions
        )));
    }
    let ds = load_dataset(cfg)?;
    let mut train_times = Vec::new();
    let mut test_times = Vec::new();
    let mut accuracy = 0.0;
    for _ in 0..cfg.repetitions {
        let run = train_on(cfg, &ds)?;
        let opts = EncodeOptions {
            lambda1: cfg.hyperparams.lambda1,
            apply_threshold: cfg.threshold_at_test,
        };
        let rep = evaluate(
            run.test.samples(),
            run.test.labels(),
            &run.state.dictionary,
            &run.state.classifier,
            opts,
        )?;
        train_times.push(run.elapsed.as_secs_f64());
        test_times.push(rep.mean_time_per_sample.as_secs_f64());
        accuracy = rep.accuracy;
    }
    let (tmin, tmean, tmax) = min_mean_max(&train_times);
    let (smin, smean, smax) = min_mean_max(&test_times);
    let mut r = Report::default();
    r.field("repetitions", cfg.repetitions)
        .field("atoms", cfg.atoms)
        .field("accuracy", format!("{accuracy:.4}"))
        .field("train_time_min_s", sci(tmin))
        .field("train_time_mean_s", sci(tmean))
        .field("train_time_max_s", sci(tmax))
        .field("test_time_min_s", sci(smin))
        .field("test_time_mean_s", sci(smean))
        .field("test_time_max_s", sci(smax));
    r.table(
        "runs",
        &["run", "train_time_s", "test_time_per_sample_s"],
        train_times
            .iter()
            .zip(&test_times)
            .enumerate()
            .map(|(i, (a, b))| vec![i.to_string(), sci(*a), sci(*b)])
            .collect(),
    );
    Ok(r)
}

/// Synthetic dataset kinds offered by `gen-synth`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SynthKind {
    Stripes,
    Templates,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SynthFormat {
    Pgm,
    Feature,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SynthSpec {
    pub kind: SynthKind,
    pub format: SynthFormat,
    pub rows: usize,
    pub cols: usize,
    pub classes: usize,
    pub per_class: usize,
    pub noise: f64,
    pub period: usize,
    pub seed: u64,
}

fn flatten(ds: &Dataset) -> Result<Dataset> {
    let samples = ds
        .samples()
        .iter()
        .map(|m| Matrix::new(m.rows() * m.cols(), 1, m.as_slice().to_vec()))
        .collect::<Result<Vec<_>>>()?;
    Dataset::new(samples, ds.labels().to_vec(), ds.classes().to_vec(), SampleMode::Feature1D)
}

pub fn generate(spec: &SynthSpec) -> Result<Dataset> {
    if !(spec.noise.is_finite() && spec.noise >= 0.0) {
        return Err(Error::Config(format!("noise must be a finite nonnegative number, got {}", spec.noise)));
    }
    let ds = match spec.kind {
        SynthKind::Stripes => {
            if spec.classes != 2 {
                return Err(Error::Config("stripes always has 2 classes".into()));
            }
            let cfg = synth::StripeConfig {
                rows: spec.rows,
                cols: spec.cols,
                per_class: spec.per_class,
                noise: spec.noise,
                period: spec.period,
            };
            synth::stripes(&cfg, spec.seed)?
        }
        SynthKind::Templates => synth::templates(
            spec.rows,
            spec.cols,
            spec.classes,
            spec.per_class,
            spec.noise,
            SampleMode::Image2D,
            spec.seed,
        )?,
    };
    match spec.format {
        SynthFormat::Pgm => Ok(ds),
        SynthFormat::Feature => flatten(&ds),
    }
}

pub fn cmd_gen_synth(spec: &SynthSpec, out: &Path) -> Result<Report> {
    let ds = generate(spec).map_err(|e| match e {
        Error::InvalidInput(msg) => Error::Config(msg),
        other => other,
    })?;
    match spec.format {
        SynthFormat::Pgm => dataio::write_image_dir(out, &ds)?,
        SynthFormat::Feature => dataio::write_feature_file(out, &ds)?,
    }
    let (r, c) = ds.sample_shape();
    let mut rep = Report::default();
    rep.field("out", out.display())
        .field("samples", ds.len())
        .field("classes", ds.classes().join(","))
        .field("sample_rows", r)
        .field("sample_cols", c);
    Ok(rep)
}
