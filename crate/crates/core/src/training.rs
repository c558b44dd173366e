//! Mini-batch Adam training for the cutting net and for DeepONets.

use std::time::Instant;

use ndarray::{Array1, Array2, Axis};
use rand::seq::{index, SliceRandom};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::lifting::{build_plain_dataset, DiscDataset, LiftedDataset};
use crate::numerics::{AdamConfig, AdamState, Batch, Gradients, Loss, MlpParams};
use crate::operators::{CuttingNet, DeepONetArch, DeepONetModel, OperatorMode, Standardizer, StandardizerFit};
use crate::problems::SolutionField;

/// Points per sample used for validation losses when no budget is set.
const VAL_POINTS: usize = 1024;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum LrSchedule {
    Constant,
    /// Multiply by `factor` every `every_frac * epochs` epochs.
    StepDecay { factor: f64, every_frac: f64 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainConfig {
    pub epochs: usize,
    /// Points (operators) or rows (cutting net) per optimizer step.
    pub batch_size: usize,
    pub lr: f64,
    pub schedule: LrSchedule,
    /// Points drawn from each sample per epoch; `None` uses every point.
    pub budget: Option<usize>,
    pub seed: u64,
    pub loss: Loss,
    /// Stop after this many epochs without a better validation loss.
    pub patience: Option<usize>,
    /// Draw points uniformly per region instead of uniformly per sample.
    pub stratified: bool,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            epochs: 2000,
            batch_size: 1024,
            lr: 1e-3,
            schedule: LrSchedule::StepDecay {
                factor: 0.5,
                every_frac: 0.25,
            },
            budget: None,
            seed: 0,
            loss: Loss::Mse,
            patience: None,
            stratified: false,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        if self.epochs == 0 || self.batch_size == 0 || self.budget == Some(0) || self.patience == Some(0) {
            return Err(Error::Config(format!("counts must be positive: {self:?}")));
        }
        if !(self.lr > 0.0 && self.lr.is_finite()) {
            return Err(Error::Config(format!("learning rate {} must be positive", self.lr)));
        }
        if let LrSchedule::StepDecay { factor, every_frac } = self.schedule {
            if !(factor > 0.0 && factor <= 1.0 && every_frac > 0.0 && every_frac <= 1.0) {
                return Err(Error::Config(format!("bad step decay {factor} / {every_frac}")));
            }
        }
        Ok(())
    }

    pub fn lr_at(&self, epoch: usize) -> f64 {
        match self.schedule {
            LrSchedule::Constant => self.lr,
            LrSchedule::StepDecay { factor, every_frac } => {
                let period = ((self.epochs as f64 * every_frac).round() as usize).max(1);
                self.lr * factor.powi((epoch / period) as i32)
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct TrainReport {
    pub train_loss: Vec<f64>,
    /// Empty when no validation data was given.
    pub val_loss: Vec<f64>,
    /// Epoch whose parameters were kept.
    pub best_epoch: usize,
    /// Fewest and most points any sample contributed, per epoch.
    pub points_per_sample: Vec<(usize, usize)>,
    pub wall_clock_secs: f64,
    pub checkpoint: Option<String>,
}

impl TrainReport {
    pub fn epochs_completed(&self) -> usize {
        self.train_loss.len()
    }
}

fn non_finite(e: Error, epoch: usize) -> Error {
    match e {
        Error::NonFiniteLayer { .. } => Error::NonFiniteLoss { epoch },
        other => other,
    }
}

/// Tracks the best validation epoch and decides when to stop.
struct EarlyStop<P> {
    best: f64,
    best_epoch: usize,
    best_params: Option<P>,
    patience: Option<usize>,
}

impl<P: Clone> EarlyStop<P> {
    fn new(patience: Option<usize>) -> Self {
        Self {
            best: f64::INFINITY,
            best_epoch: 0,
            best_params: None,
            patience,
        }
    }

    /// Records an epoch; returns true when training should stop.
    fn update(&mut self, epoch: usize, val: f64, params: &P) -> bool {
        if val < self.best {
            self.best = val;
            self.best_epoch = epoch;
            self.best_params = Some(params.clone());
        }
        self.patience.is_some_and(|p| epoch - self.best_epoch >= p)
    }
}

/// Fits a cutting net to front locations by mini-batch regression.
pub fn train_cutnet(
    disc: &DiscDataset,
    val: Option<&DiscDataset>,
    hidden: &[usize],
    bounds: (f64, f64),
    cfg: &TrainConfig,
) -> Result<(CuttingNet, TrainReport)> {
    cfg.validate()?;
    if disc.rows.is_empty() {
        return Err(Error::Usage("empty discontinuity dataset".into()));
    }
    let started = Instant::now();
    let m = disc.sensors[0].len();
    let mut cnet = CuttingNet::init(m, disc.with_time(), hidden, disc.dis_n, bounds, cfg.seed)?;
    let (x_raw, y_raw) = disc_matrices(disc, cnet.net.input_width())?;
    let mut in_fit = StandardizerFit::new(x_raw.ncols());
    x_raw.rows().into_iter().for_each(|r| in_fit.push(r.to_slice().expect("row")));
    cnet.input = in_fit.pool(0..m).finish();
    cnet.output = Standardizer::fit(y_raw.ncols(), y_raw.rows().into_iter().map(|r| r.to_slice().expect("row")));
    let standardize = |cnet: &CuttingNet, mut x: Array2<f64>, mut y: Array2<f64>| {
        x.rows_mut().into_iter().for_each(|mut r| cnet.input.apply(r.as_slice_mut().expect("row")));
        y.rows_mut().into_iter().for_each(|mut r| cnet.output.apply(r.as_slice_mut().expect("row")));
        (x, y)
    };
    let (x, y) = standardize(&cnet, x_raw, y_raw);
    let val_set = match val {
        Some(v) if !v.rows.is_empty() => {
            let (vx, vy) = disc_matrices(v, cnet.net.input_width())?;
            Some(standardize(&cnet, vx, vy))
        }
        _ => None,
    };

    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    rng.set_stream(1);
    let mut adam = AdamState::new(&cnet.net, AdamConfig { lr: cfg.lr, ..AdamConfig::default() });
    let mut report = TrainReport::default();
    let mut stop = EarlyStop::new(cfg.patience);
    let mut order: Vec<usize> = (0..x.nrows()).collect();
    for epoch in 0..cfg.epochs {
        adam.set_lr(cfg.lr_at(epoch));
        order.shuffle(&mut rng);
        let mut total = 0.0;
        for idx in order.chunks(cfg.batch_size) {
            let batch = Batch::new(x.select(Axis(0), idx), y.select(Axis(0), idx))?;
            let (loss, grads) = cnet.net.value_and_grad(&batch, cfg.loss).map_err(|e| non_finite(e, epoch))?;
            if !loss.is_finite() {
                return Err(Error::NonFiniteLoss { epoch });
            }
            adam.step(&mut cnet.net, &grads)?;
            total += loss * idx.len() as f64;
        }
        report.train_loss.push(total / x.nrows() as f64);
        if let Some((vx, vy)) = &val_set {
            let pred = cnet.net.forward_batch(vx.view()).map_err(|e| non_finite(e, epoch))?;
            let (vl, _) = cfg.loss.value_and_residual_grad(&(pred - vy));
            report.val_loss.push(vl);
            if stop.update(epoch, vl, &cnet.net) {
                break;
            }
        }
    }
    report.best_epoch = report.epochs_completed() - 1;
    if let Some(best) = stop.best_params {
        cnet.net = best;
        report.best_epoch = stop.best_epoch;
    }
    report.wall_clock_secs = started.elapsed().as_secs_f64();
    Ok((cnet, report))
}

fn disc_matrices(disc: &DiscDataset, width: usize) -> Result<(Array2<f64>, Array2<f64>)> {
    if disc.input_width() != width {
        return Err(Error::Shape(format!(
            "discontinuity data has input width {}, expected {width}",
            disc.input_width()
        )));
    }
    let mut x = Array2::zeros((disc.rows.len(), width));
    let mut y = Array2::zeros((disc.rows.len(), disc.dis_n));
    for (r, row) in disc.rows.iter().enumerate() {
        disc.write_input(r, x.row_mut(r).as_slice_mut().expect("row"));
        if row.fronts.len() != disc.dis_n {
            return Err(Error::Shape(format!("row {r} has {} fronts", row.fronts.len())));
        }
        y.row_mut(r).assign(&Array1::from(row.fronts.clone()));
    }
    Ok((x, y))
}

/// Trains the lifted DeepONet on labelled points.
pub fn train_operator(
    lifted: &LiftedDataset,
    val: Option<&LiftedDataset>,
    arch: &DeepONetArch,
    cfg: &TrainConfig,
) -> Result<(DeepONetModel, TrainReport)> {
    if !lifted.labelled {
        return Err(Error::Usage("operator training needs labelled points".into()));
    }
    train_deeponet(lifted, val, arch, cfg, OperatorMode::Lifted)
}

/// Trains a plain DeepONet on every grid point of the raw fields.
pub fn train_baseline(
    fields: &[&SolutionField],
    val: &[&SolutionField],
    arch: &DeepONetArch,
    cfg: &TrainConfig,
) -> Result<(DeepONetModel, TrainReport)> {
    if fields.is_empty() {
        return Err(Error::Usage("no training fields".into()));
    }
    let data = build_plain_dataset(fields)?;
    let val_data = if val.is_empty() { None } else { Some(build_plain_dataset(val)?) };
    train_deeponet(&data, val_data.as_ref(), arch, cfg, OperatorMode::Baseline)
}

/// Query rows, standardized targets and sample ids for a fixed point selection.
struct PointBatch {
    sample: Vec<usize>,
    queries: Array2<f64>,
    targets: Array2<f64>,
}

fn gather(model: &DeepONetModel, data: &LiftedDataset, picks: &[(u32, u32)]) -> PointBatch {
    let w = model.query_width();
    let labelled = model.mode == OperatorMode::Lifted;
    let mut queries = Array2::zeros((picks.len(), w));
    let mut targets = Array2::zeros((picks.len(), 1));
    let mut sample = Vec::with_capacity(picks.len());
    for (r, &(s, k)) in picks.iter().enumerate() {
        let smp = &data.samples[s as usize];
        let row = queries.row_mut(r).into_slice().expect("row");
        smp.write_query(k as usize, labelled, row);
        model.trunk_in.apply(row);
        targets[[r, 0]] = (smp.target[k as usize] - model.output.mean[0]) / model.output.scale[0];
        sample.push(s as usize);
    }
    PointBatch {
        sample,
        queries,
        targets,
    }
}

/// Loss and gradients of `branch(u) . trunk(y)` over a batch. Each sample's
/// branch output is computed once and shared by its points.
fn deeponet_step(
    model: &DeepONetModel,
    sensors: &Array2<f64>,
    batch: &PointBatch,
    loss: Loss,
) -> Result<(f64, Gradients, Gradients)> {
    let mut slot = std::collections::BTreeMap::new();
    let rows: Vec<usize> = batch
        .sample
        .iter()
        .map(|&s| {
            let n = slot.len();
            *slot.entry(s).or_insert(n)
        })
        .collect();
    let mut unique = vec![0; slot.len()];
    for (&s, &k) in &slot {
        unique[k] = s;
    }
    let bc = model.branch.forward_cached(sensors.select(Axis(0), &unique).view())?;
    let tc = model.trunk.forward_cached(batch.queries.view())?;
    let b_rows = bc.output().select(Axis(0), &rows);
    let t = tc.output();
    let pred = (&b_rows * t).sum_axis(Axis(1)).insert_axis(Axis(1));
    let (value, d_pred) = loss.value_and_residual_grad(&(pred - &batch.targets));
    let d_t = &b_rows * &d_pred;
    let scaled_t = t * &d_pred;
    let mut d_b = Array2::zeros(bc.output().dim());
    for (r, &u) in rows.iter().enumerate() {
        let mut dst = d_b.row_mut(u);
        dst += &scaled_t.row(r);
    }
    let (gb, _) = model.branch.backward(&bc, d_b.view(), false);
    let (gt, _) = model.trunk.backward(&tc, d_t.view(), false);
    Ok((value, gb, gt))
}

fn batch_loss(model: &DeepONetModel, sensors: &Array2<f64>, batch: &PointBatch, loss: Loss) -> Result<f64> {
    let b = model.branch.forward_batch(sensors.view())?;
    let t = model.trunk.forward_batch(batch.queries.view())?;
    let b_rows = b.select(Axis(0), &batch.sample);
    let pred = (&b_rows * &t).sum_axis(Axis(1)).insert_axis(Axis(1));
    Ok(loss.value_and_residual_grad(&(pred - &batch.targets)).0)
}

fn standardized_sensors(model: &DeepONetModel, data: &LiftedDataset) -> Array2<f64> {
    let m = model.sensor_count();
    let mut s = Array2::zeros((data.samples.len(), m));
    for (r, smp) in data.samples.iter().enumerate() {
        let row = s.row_mut(r).into_slice().expect("row");
        row.copy_from_slice(&smp.sensors);
        model.branch_in.apply(row);
    }
    s
}

/// Draws `count` point indices of sample `s`.
fn draw_points(rng: &mut ChaCha8Rng, data: &LiftedDataset, s: usize, count: usize, stratified: bool, out: &mut Vec<(u32, u32)>) {
    let smp = &data.samples[s];
    let n = smp.len();
    if stratified && data.region_count > 1 {
        let mut regions: Vec<Vec<u32>> = vec![vec![]; data.region_count];
        for (k, &l) in smp.label.iter().enumerate() {
            regions[l as usize].push(k as u32);
        }
        regions.retain(|r| !r.is_empty());
        for _ in 0..count {
            let r = &regions[rng.gen_range(0..regions.len())];
            out.push((s as u32, r[rng.gen_range(0..r.len())]));
        }
    } else if count == n {
        out.extend((0..n as u32).map(|k| (s as u32, k)));
    } else {
        out.extend(index::sample(rng, n, count).into_iter().map(|k| (s as u32, k as u32)));
    }
}

fn train_deeponet(
    data: &LiftedDataset,
    val: Option<&LiftedDataset>,
    arch: &DeepONetArch,
    cfg: &TrainConfig,
    mode: OperatorMode,
) -> Result<(DeepONetModel, TrainReport)> {
    cfg.validate()?;
    if data.samples.is_empty() || data.total_points() == 0 {
        return Err(Error::Usage("empty training set".into()));
    }
    let labelled = mode == OperatorMode::Lifted;
    for (k, s) in data.samples.iter().enumerate() {
        if labelled && s.label.iter().any(|&l| l as usize >= data.region_count) {
            return Err(Error::Usage(format!("sample {k} has a label outside 0..{}", data.region_count)));
        }
        if cfg.budget.is_some_and(|b| b > s.len()) {
            return Err(Error::Config(format!(
                "budget {:?} exceeds the {} points of sample {k}",
                cfg.budget,
                s.len()
            )));
        }
    }
    let started = Instant::now();
    let m = data.sensor_count();
    let mut model = DeepONetModel::init(arch, mode, m, data.coord_dims(), cfg.seed)?;
    let mut branch_fit = StandardizerFit::new(m);
    data.samples.iter().for_each(|s| branch_fit.push(&s.sensors));
    model.branch_in = branch_fit.pool(0..m).finish();
    let w = model.query_width();
    let mut trunk_fit = StandardizerFit::new(w);
    let mut out_fit = StandardizerFit::new(1);
    let mut q = vec![0.0; w];
    for s in &data.samples {
        for k in 0..s.len() {
            s.write_query(k, labelled, &mut q);
            trunk_fit.push(&q);
            out_fit.push(&[s.target[k]]);
        }
    }
    model.trunk_in = trunk_fit.finish();
    model.output = out_fit.finish();
    let sensors = standardized_sensors(&model, data);

    let val_set = match val {
        Some(v) if v.total_points() > 0 => {
            if v.query_width() != data.query_width() || v.sensor_count() != m {
                return Err(Error::Shape("validation data does not match the training layout".into()));
            }
            let mut vrng = ChaCha8Rng::seed_from_u64(cfg.seed);
            vrng.set_stream(2);
            let mut picks = vec![];
            for s in 0..v.samples.len() {
                let count = v.samples[s].len().min(cfg.budget.unwrap_or(VAL_POINTS));
                draw_points(&mut vrng, v, s, count, false, &mut picks);
            }
            Some((standardized_sensors(&model, v), gather(&model, v, &picks)))
        }
        _ => None,
    };

    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    rng.set_stream(1);
    let adam_cfg = AdamConfig { lr: cfg.lr, ..AdamConfig::default() };
    let mut adam_b = AdamState::new(&model.branch, adam_cfg);
    let mut adam_t = AdamState::new(&model.trunk, adam_cfg);
    let mut report = TrainReport::default();
    let mut stop = EarlyStop::new(cfg.patience);
    let mut picks: Vec<(u32, u32)> = vec![];
    for epoch in 0..cfg.epochs {
        let lr = cfg.lr_at(epoch);
        adam_b.set_lr(lr);
        adam_t.set_lr(lr);
        picks.clear();
        let mut counts = (usize::MAX, 0);
        for s in 0..data.samples.len() {
            let before = picks.len();
            let count = cfg.budget.unwrap_or(data.samples[s].len());
            draw_points(&mut rng, data, s, count, cfg.stratified, &mut picks);
            let got = picks.len() - before;
            counts = (counts.0.min(got), counts.1.max(got));
        }
        report.points_per_sample.push(counts);
        picks.shuffle(&mut rng);
        let mut total = 0.0;
        for chunk in picks.chunks(cfg.batch_size) {
            let batch = gather(&model, data, chunk);
            let (loss, gb, gt) = deeponet_step(&model, &sensors, &batch, cfg.loss).map_err(|e| non_finite(e, epoch))?;
            if !loss.is_finite() {
                return Err(Error::NonFiniteLoss { epoch });
            }
            adam_b.step(&mut model.branch, &gb)?;
            adam_t.step(&mut model.trunk, &gt)?;
            total += loss * chunk.len() as f64;
        }
        report.train_loss.push(total / picks.len() as f64);
        if let Some((vs, vb)) = &val_set {
            let vl = batch_loss(&model, vs, vb, cfg.loss).map_err(|e| non_finite(e, epoch))?;
            report.val_loss.push(vl);
            if stop.update(epoch, vl, &(model.branch.clone(), model.trunk.clone())) {
                break;
            }
        }
    }
    report.best_epoch = report.epochs_completed() - 1;
    if let Some((b, t)) = stop.best_params {
        model.branch = b;
        model.trunk = t;
        report.best_epoch = stop.best_epoch;
    }
    report.wall_clock_secs = started.elapsed().as_secs_f64();
    Ok((model, report))
}

/// Parameters of both networks; used to compare runs.
pub fn parameters_equal(a: &MlpParams, b: &MlpParams) -> bool {
    a == b
}
