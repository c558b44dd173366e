use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::metrics::{dis_error, l1_error};
use crate::error::{Error, Result};
use crate::extract::{
    extract_jumps, extract_sharp_transition, filter_smeared, DiscontinuitySet, JumpConfig, MissingFronts, SmearMask,
    TransitionConfig,
};
use crate::io::ExperimentConfig;
use crate::lifting::{build_disc_dataset, build_lifted_dataset, DiscDataset, LiftedDataset};
use crate::operators::{baseline_predict, cut_predict, CuttingNet, DeepONetModel, PiecewiseSolution};
use crate::problems::{
    advection, advection_exact, burgers, burgers_exact, generate_dataset, parsimonious, Dataset, Problem, Resolution,
    Sample, SampleParams, SolutionField,
};
use crate::training::{train_baseline, train_cutnet, train_operator, TrainReport};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ModelKind {
    /// Cutting net + lifted DeepONet.
    Cut,
    /// Plain DeepONet.
    Baseline,
}

impl ModelKind {
    pub fn name(self) -> &'static str {
        match self {
            ModelKind::Cut => "cut",
            ModelKind::Baseline => "baseline",
        }
    }
}

impl fmt::Display for ModelKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for ModelKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "cut" | "cut-deeponet" => Ok(ModelKind::Cut),
            "baseline" | "deeponet" => Ok(ModelKind::Baseline),
            other => Err(Error::Config(format!("unknown model '{other}' (cut or baseline)"))),
        }
    }
}

/// Test errors of one model on one problem.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricReport {
    pub problem: Problem,
    pub model: ModelKind,
    /// Training-grid points along the front axis.
    pub nx: usize,
    pub l1: Vec<f64>,
    pub dis: Vec<f64>,
}

/// Mean and population standard deviation.
pub fn mean_std(v: &[f64]) -> (f64, f64) {
    if v.is_empty() {
        return (f64::NAN, f64::NAN);
    }
    let n = v.len() as f64;
    let mean = v.iter().sum::<f64>() / n;
    let var = v.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / n;
    (mean, var.sqrt())
}

impl MetricReport {
    pub fn l1_mean_std(&self) -> (f64, f64) {
        mean_std(&self.l1)
    }

    pub fn dis_mean_std(&self) -> (f64, f64) {
        mean_std(&self.dis)
    }
}

/// Extraction settings used by the pipeline for each problem.
pub fn jump_config(problem: Problem) -> JumpConfig {
    JumpConfig {
        // an advected pulse can start partly left of the domain
        missing: if problem == Problem::Advection {
            MissingFronts::PadLower
        } else {
            MissingFronts::Error
        },
        ..JumpConfig::new(problem.dis_n())
    }
}

/// Interval the fronts live in.
pub fn front_bounds(problem: Problem, res: &Resolution) -> (f64, f64) {
    match problem {
        Problem::Advection => advection::X_RANGE,
        Problem::BurgersExact | Problem::BurgersGodunov => burgers::X_RANGE,
        Problem::Parsimonious => (0.0, res.horizon),
    }
}

pub fn extract(problem: Problem, field: &SolutionField) -> Result<DiscontinuitySet> {
    if problem.is_time_series() {
        extract_sharp_transition(field, &TransitionConfig::default())
    } else {
        extract_jumps(field, &jump_config(problem))
    }
}

/// Discontinuities and smear masks of every sample, in sample order.
pub fn extract_all(problem: Problem, samples: &[&Sample], band_cells: usize) -> Result<Vec<(DiscontinuitySet, SmearMask)>> {
    samples
        .par_iter()
        .enumerate()
        .map(|(k, s)| {
            let d = extract(problem, &s.field).map_err(|e| match e {
                Error::Extraction { slice, reason } => Error::Extraction {
                    slice,
                    reason: format!("sample {k}: {reason}"),
                },
                other => other,
            })?;
            let m = filter_smeared(&s.field, &d, band_cells);
            Ok((d, m))
        })
        .collect()
}

/// Stage-1 and stage-2 training sets built from a list of samples.
pub fn stage_datasets(cfg: &ExperimentConfig, samples: &[&Sample]) -> Result<(DiscDataset, LiftedDataset)> {
    let extracted = extract_all(cfg.problem, samples, cfg.band_cells)?;
    let fields: Vec<&SolutionField> = samples.iter().map(|s| &s.field).collect();
    let (discs, masks): (Vec<_>, Vec<_>) = extracted.into_iter().unzip();
    Ok((build_disc_dataset(&fields, &discs)?, build_lifted_dataset(&fields, &discs, &masks)?))
}

#[derive(Debug, Clone)]
pub struct CutModels {
    pub cutnet: CuttingNet,
    pub operator: DeepONetModel,
    pub cutnet_report: TrainReport,
    pub operator_report: TrainReport,
}

fn split_stages(cfg: &ExperimentConfig, data: &Dataset) -> Result<((DiscDataset, LiftedDataset), Option<(DiscDataset, LiftedDataset)>)> {
    let train: Vec<&Sample> = data.train().collect();
    let val: Vec<&Sample> = data.val().collect();
    let val_sets = if val.is_empty() { None } else { Some(stage_datasets(cfg, &val)?) };
    Ok((stage_datasets(cfg, &train)?, val_sets))
}

fn fit_cutnet(
    cfg: &ExperimentConfig,
    data: &Dataset,
    disc: &DiscDataset,
    val: Option<&DiscDataset>,
) -> Result<(CuttingNet, TrainReport)> {
    let bounds = front_bounds(cfg.problem, &data.resolution);
    train_cutnet(disc, val, &cfg.arch.cutnet_hidden, bounds, &cfg.cutnet_train)
}

/// Stage 1 alone: the cutting net on fronts extracted from the training split.
pub fn train_cutnet_model(cfg: &ExperimentConfig, data: &Dataset) -> Result<(CuttingNet, TrainReport)> {
    let ((disc, _), val) = split_stages(cfg, data)?;
    fit_cutnet(cfg, data, &disc, val.as_ref().map(|v| &v.0))
}

/// Stage 2 alone: the lifted operator on the labelled training split.
pub fn train_operator_model(cfg: &ExperimentConfig, data: &Dataset) -> Result<(DeepONetModel, TrainReport)> {
    let ((_, lifted), val) = split_stages(cfg, data)?;
    train_operator(&lifted, val.as_ref().map(|v| &v.1), &cfg.arch.operator, &cfg.operator_train)
}

pub fn train_cut_models(cfg: &ExperimentConfig, data: &Dataset) -> Result<CutModels> {
    let ((disc, lifted), val) = split_stages(cfg, data)?;
    let (cutnet, cutnet_report) = fit_cutnet(cfg, data, &disc, val.as_ref().map(|v| &v.0))?;
    let (operator, operator_report) =
        train_operator(&lifted, val.as_ref().map(|v| &v.1), &cfg.arch.operator, &cfg.operator_train)?;
    Ok(CutModels {
        cutnet,
        operator,
        cutnet_report,
        operator_report,
    })
}

pub fn train_baseline_model(cfg: &ExperimentConfig, data: &Dataset) -> Result<(DeepONetModel, TrainReport)> {
    let train: Vec<&SolutionField> = data.train().map(|s| &s.field).collect();
    let val: Vec<&SolutionField> = data.val().map(|s| &s.field).collect();
    train_baseline(&train, &val, &cfg.arch.baseline, &cfg.baseline_train)
}

/// A held-out sample on the test grid with its true fronts.
#[derive(Debug, Clone)]
pub struct TestCase {
    pub params: SampleParams,
    pub field: SolutionField,
    pub fronts: Vec<Vec<f64>>,
}

/// Exact solution of a sample on `res`, with analytic fronts where they exist.
pub fn test_case(problem: Problem, sample: &Sample, res: &Resolution) -> Result<TestCase> {
    let (field, fronts) = match sample.params {
        SampleParams::Advection(ic) => {
            let f = advection_exact(&ic, res.nx, res.nt, res.sensors)?;
            let fronts = (0..f.domain.n_slices())
                .map(|j| ic.fronts(f.domain.slice_time(j).unwrap_or(0.0)).to_vec())
                .collect();
            (f, fronts)
        }
        SampleParams::Riemann(ic) => {
            let (f, path) = burgers_exact(&ic, res.nx, res.nt, res.sensors)?;
            let fronts = (0..f.domain.n_slices())
                .map(|j| vec![path.position(f.domain.slice_time(j).unwrap_or(0.0))])
                .collect();
            (f, fronts)
        }
        SampleParams::Stimulus(stim) => {
            let f = if res.dt == sample_dt(sample) {
                sample.field.clone()
            } else {
                parsimonious::parsimonious_simulate(&stim, res.horizon, res.dt, res.sensors)?
            };
            let fronts = extract(problem, &f)?.per_slice;
            (f, fronts)
        }
    };
    Ok(TestCase {
        params: sample.params,
        field,
        fronts,
    })
}

fn sample_dt(sample: &Sample) -> f64 {
    sample.field.domain.front_axis().step()
}

pub fn test_cases(cfg: &ExperimentConfig, data: &Dataset) -> Result<Vec<TestCase>> {
    let res = cfg.test_resolution();
    let tests: Vec<&Sample> = data.test().collect();
    tests.par_iter().map(|s| test_case(cfg.problem, s, &res)).collect()
}

fn score(pred: &[f64], case: &TestCase, window_frac: f64) -> Result<(f64, f64)> {
    let axis = case.field.domain.front_axis();
    Ok((
        l1_error(pred, &case.field.values)?,
        dis_error(pred, &case.field.values, &case.fronts, &axis, window_frac)?,
    ))
}

/// Cut-DeepONet predictions for every test case.
pub fn cut_predictions(models: &CutModels, cases: &[TestCase]) -> Result<Vec<PiecewiseSolution>> {
    cases
        .par_iter()
        .map(|c| cut_predict(&models.cutnet, &models.operator, &c.field.sensors, &c.field.domain))
        .collect()
}

pub fn baseline_predictions(model: &DeepONetModel, cases: &[TestCase]) -> Result<Vec<Vec<f64>>> {
    cases
        .par_iter()
        .map(|c| baseline_predict(model, &c.field.sensors, &c.field.domain))
        .collect()
}

/// Scores predictions (one per case) into a report.
pub fn score_predictions(
    problem: Problem,
    model: ModelKind,
    nx: usize,
    preds: &[&[f64]],
    cases: &[TestCase],
    window_frac: f64,
) -> Result<MetricReport> {
    if preds.len() != cases.len() {
        return Err(Error::Usage(format!("{} predictions for {} test cases", preds.len(), cases.len())));
    }
    let scores = preds
        .iter()
        .zip(cases)
        .map(|(p, c)| score(p, c, window_frac))
        .collect::<Result<Vec<_>>>()?;
    let (l1, dis) = scores.into_iter().unzip();
    Ok(MetricReport {
        problem,
        model,
        nx,
        l1,
        dis,
    })
}

/// Trained models for a benchmark run; whichever is present gets evaluated.
#[derive(Debug, Clone, Default)]
pub struct TrainedSet {
    pub cut: Option<CutModels>,
    pub baseline: Option<(DeepONetModel, TrainReport)>,
}

/// Evaluates trained models on the test split of `data`.
pub fn evaluate_models(cfg: &ExperimentConfig, data: &Dataset, models: &TrainedSet) -> Result<Vec<MetricReport>> {
    let cases = test_cases(cfg, data)?;
    if cases.is_empty() {
        return Err(Error::Config("the test split is empty".into()));
    }
    let nx = data.resolution.nx;
    let mut out = vec![];
    if let Some(cut) = &models.cut {
        let preds = cut_predictions(cut, &cases)?;
        let refs: Vec<&[f64]> = preds.iter().map(|p| p.values.as_slice()).collect();
        out.push(score_predictions(cfg.problem, ModelKind::Cut, nx, &refs, &cases, cfg.window_frac)?);
    }
    if let Some((model, _)) = &models.baseline {
        let preds = baseline_predictions(model, &cases)?;
        let refs: Vec<&[f64]> = preds.iter().map(Vec::as_slice).collect();
        out.push(score_predictions(cfg.problem, ModelKind::Baseline, nx, &refs, &cases, cfg.window_frac)?);
    }
    Ok(out)
}

/// Trains the requested models on `data` (generated from `cfg` when absent).
pub fn train_models(cfg: &ExperimentConfig, data: &Dataset, kinds: &[ModelKind]) -> Result<TrainedSet> {
    let mut set = TrainedSet::default();
    if kinds.contains(&ModelKind::Cut) {
        set.cut = Some(train_cut_models(cfg, data)?);
    }
    if kinds.contains(&ModelKind::Baseline) {
        set.baseline = Some(train_baseline_model(cfg, data)?);
    }
    Ok(set)
}

/// Generates data, trains and evaluates each requested model.
pub fn run_benchmark(cfg: &ExperimentConfig, kinds: &[ModelKind]) -> Result<Vec<MetricReport>> {
    cfg.validate()?;
    let data = generate_dataset(cfg.problem, cfg.n_samples, cfg.seed, &cfg.resolution)?;
    let models = train_models(cfg, &data, kinds)?;
    evaluate_models(cfg, &data, &models)
}

/// Repeats the benchmark with training data at each spatial resolution in
/// `nxs`; the test grid stays at `cfg.test_nx`.
pub fn resolution_sweep(cfg: &ExperimentConfig, nxs: &[usize], kinds: &[ModelKind]) -> Result<Vec<MetricReport>> {
    if cfg.problem.is_time_series() {
        return Err(Error::Config("the resolution sweep needs a spatial problem".into()));
    }
    let mut out = vec![];
    for &nx in nxs {
        let mut c = cfg.clone();
        c.resolution.nx = nx;
        out.extend(run_benchmark(&c, kinds)?);
    }
    Ok(out)
}
