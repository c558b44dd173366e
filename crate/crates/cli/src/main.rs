use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use cutop_core::evaluation::benchmark::{
    evaluate_models, extract_all, stage_datasets, train_baseline_model, train_cutnet_model, train_models,
    train_operator_model, CutModels, TrainedSet,
};
use cutop_core::evaluation::resolution_sweep;
use cutop_core::io::{
    emit_metrics_csv, emit_train_csv, load_cutnet, load_dataset, load_deeponet, save_cutnet, save_dataset,
    save_deeponet, save_json, write_config_echo, atomic_write, csv_string, fmt_f64,
};
use cutop_core::operators::{baseline_predict, cut_predict, OperatorMode};
use cutop_core::problems::{generate_dataset, Sample};
use cutop_core::{Dataset, Error, ExperimentConfig, ModelKind, Problem, Result, ScaleProfile, TrainReport};

#[derive(Parser, Debug)]
#[command(name = "cutop", version, about = "Cut-DeepONet data generation, training and evaluation")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Generate a dataset (manifest + binary blob).
    GenData(GenData),
    /// Extract discontinuity locations from every sample of a dataset.
    Extract(DataStage),
    /// Region labels of the lifted training points.
    Lift(DataStage),
    /// Train the cutting net.
    TrainCutnet(Train),
    /// Train the lifted DeepONet.
    TrainOperator(Train),
    /// Train the plain DeepONet baseline.
    TrainBaseline(Train),
    /// Predict one test sample from saved checkpoints.
    Predict(Predict),
    /// Train (or load) models and score them on the test split.
    Evaluate(Evaluate),
    /// Benchmark over several training resolutions.
    Sweep(Sweep),
}

fn parse_with<T: std::str::FromStr<Err = Error>>(s: &str) -> std::result::Result<T, String> {
    s.parse().map_err(|e: Error| e.to_string())
}

fn parse_problem(s: &str) -> std::result::Result<Problem, String> {
    parse_with(s)
}

fn parse_profile(s: &str) -> std::result::Result<ScaleProfile, String> {
    parse_with(s)
}

fn parse_model(s: &str) -> std::result::Result<ModelKind, String> {
    parse_with(s)
}

/// Settings shared by the commands that build a configuration.
#[derive(Args, Debug)]
struct ConfigArgs {
    /// Start from a config echo instead of the profile defaults.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long, value_parser = parse_profile, default_value = "desk")]
    profile: ScaleProfile,
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Args, Debug)]
struct GenData {
    #[arg(long, value_parser = parse_problem)]
    problem: Option<Problem>,
    #[arg(long)]
    n: Option<usize>,
    #[command(flatten)]
    cfg: ConfigArgs,
    /// Output directory.
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args, Debug)]
struct DataStage {
    /// Dataset manifest.
    #[arg(long)]
    data: PathBuf,
    #[command(flatten)]
    cfg: ConfigArgs,
    /// Output JSON file.
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args, Debug)]
struct Train {
    #[arg(long)]
    data: PathBuf,
    #[command(flatten)]
    cfg: ConfigArgs,
    /// Overrides the epoch count of the stage being trained.
    #[arg(long)]
    epochs: Option<usize>,
    /// Output directory (checkpoint, loss CSV, config echo).
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args, Debug)]
struct Predict {
    #[arg(long)]
    data: PathBuf,
    #[arg(long, requires = "operator", conflicts_with = "baseline")]
    cutnet: Option<PathBuf>,
    #[arg(long, requires = "cutnet")]
    operator: Option<PathBuf>,
    #[arg(long)]
    baseline: Option<PathBuf>,
    /// Position within the test split.
    #[arg(long, default_value_t = 0)]
    sample: usize,
    #[command(flatten)]
    cfg: ConfigArgs,
    /// Output CSV.
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args, Debug)]
struct Evaluate {
    #[arg(long, value_parser = parse_problem)]
    problem: Option<Problem>,
    #[arg(long, value_delimiter = ',', value_parser = parse_model, default_value = "cut,baseline")]
    models: Vec<ModelKind>,
    #[arg(long)]
    n: Option<usize>,
    /// Use this dataset instead of generating one.
    #[arg(long)]
    data: Option<PathBuf>,
    #[arg(long, requires = "operator")]
    cutnet: Option<PathBuf>,
    #[arg(long, requires = "cutnet")]
    operator: Option<PathBuf>,
    #[arg(long)]
    baseline: Option<PathBuf>,
    #[command(flatten)]
    cfg: ConfigArgs,
    /// Output CSV.
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args, Debug)]
struct Sweep {
    #[arg(long, value_parser = parse_problem)]
    problem: Option<Problem>,
    #[arg(long, value_delimiter = ',', default_value = "125,250,500")]
    nx: Vec<usize>,
    #[arg(long, value_delimiter = ',', value_parser = parse_model, default_value = "cut,baseline")]
    models: Vec<ModelKind>,
    #[arg(long)]
    n: Option<usize>,
    #[command(flatten)]
    cfg: ConfigArgs,
    #[arg(long)]
    out: PathBuf,
}

/// Config file or profile defaults, then command-line overrides.
fn resolve(args: &ConfigArgs, problem: Option<Problem>) -> Result<ExperimentConfig> {
    let mut cfg = match &args.config {
        Some(path) => {
            let cfg: ExperimentConfig = cutop_core::io::load_json(path)?;
            if let Some(p) = problem.filter(|&p| p != cfg.problem) {
                return Err(Error::Config(format!("config is for {}, not {p}", cfg.problem)));
            }
            cfg
        }
        None => {
            let p = problem.ok_or_else(|| Error::Usage("--problem or --config is required".into()))?;
            ExperimentConfig::for_profile(p, args.profile)
        }
    };
    if let Some(seed) = args.seed {
        cfg = cfg.with_seed(seed);
    }
    Ok(cfg)
}

/// Config for a stage that reads a dataset: grids, counts and seed follow the data.
fn resolve_for_data(args: &ConfigArgs, data_path: &Path) -> Result<(ExperimentConfig, Dataset)> {
    let data = load_dataset(data_path)?;
    let mut cfg = resolve(args, Some(data.problem))?;
    if args.config.is_none() && args.seed.is_none() {
        cfg = cfg.with_seed(data.seed);
    }
    cfg.n_samples = data.samples.len();
    cfg.resolution = data.resolution;
    cfg.paths.data = Some(data_path.to_owned());
    cfg.validate()?;
    Ok((cfg, data))
}

fn echo_beside(file: &Path, cfg: &ExperimentConfig) -> Result<()> {
    let mut name = file.file_stem().unwrap_or_default().to_owned();
    name.push(".config.json");
    save_json(&file.with_file_name(name), cfg)
}

fn gen_data(a: &GenData) -> Result<()> {
    let mut cfg = resolve(&a.cfg, a.problem)?;
    if let Some(n) = a.n {
        cfg.n_samples = n;
    }
    cfg.paths.out = Some(a.out.clone());
    cfg.validate()?;
    let data = generate_dataset(cfg.problem, cfg.n_samples, cfg.seed, &cfg.resolution)?;
    let manifest = save_dataset(&data, &a.out)?;
    write_config_echo(&a.out, &cfg)?;
    log::info!("wrote {} samples to {}", data.samples.len(), manifest.display());
    Ok(())
}

fn samples(data: &Dataset) -> Vec<&Sample> {
    data.samples.iter().collect()
}

fn extract_cmd(a: &DataStage) -> Result<()> {
    let (mut cfg, data) = resolve_for_data(&a.cfg, &a.data)?;
    cfg.paths.out = Some(a.out.clone());
    let sets: Vec<_> = extract_all(cfg.problem, &samples(&data), cfg.band_cells)?
        .into_iter()
        .map(|(d, _)| d)
        .collect();
    save_json(&a.out, &sets)?;
    echo_beside(&a.out, &cfg)
}

fn lift_cmd(a: &DataStage) -> Result<()> {
    let (mut cfg, data) = resolve_for_data(&a.cfg, &a.data)?;
    cfg.paths.out = Some(a.out.clone());
    let (_, lifted) = stage_datasets(&cfg, &samples(&data))?;
    let rows: Vec<serde_json::Value> = lifted
        .samples
        .iter()
        .map(|s| serde_json::json!({ "index": s.index, "label": s.label }))
        .collect();
    let doc = serde_json::json!({
        "region_count": lifted.region_count,
        "total_points": lifted.total_points(),
        "samples": rows,
    });
    save_json(&a.out, &doc)?;
    echo_beside(&a.out, &cfg)
}

fn finish_training(out: &Path, cfg: &ExperimentConfig, name: &str, report: &TrainReport) -> Result<()> {
    emit_train_csv(report, &out.join(format!("{name}_loss.csv")))?;
    save_json(&out.join(format!("{name}_report.json")), report)?;
    write_config_echo(out, cfg)?;
    log::info!(
        "{name}: {} epochs, best {}, {:.1}s",
        report.train_loss.len(),
        report.best_epoch,
        report.wall_clock_secs
    );
    Ok(())
}

fn train_cmd(a: &Train, kind: &str) -> Result<()> {
    let (mut cfg, data) = resolve_for_data(&a.cfg, &a.data)?;
    cfg.paths.out = Some(a.out.clone());
    if let Some(e) = a.epochs {
        match kind {
            "cutnet" => cfg.cutnet_train.epochs = e,
            "operator" => cfg.operator_train.epochs = e,
            _ => cfg.baseline_train.epochs = e,
        }
        cfg.validate()?;
    }
    let path = a.out.join(format!("{kind}.json"));
    let report = match kind {
        "cutnet" => {
            let (net, report) = train_cutnet_model(&cfg, &data)?;
            save_cutnet(&path, &net)?;
            report
        }
        "operator" => {
            let (model, report) = train_operator_model(&cfg, &data)?;
            save_deeponet(&path, &model)?;
            report
        }
        _ => {
            let (model, report) = train_baseline_model(&cfg, &data)?;
            save_deeponet(&path, &model)?;
            report
        }
    };
    let report = TrainReport {
        checkpoint: Some(path.display().to_string()),
        ..report
    };
    finish_training(&a.out, &cfg, kind, &report)
}

fn load_cut(cutnet: &Path, operator: &Path) -> Result<CutModels> {
    let op = load_deeponet(operator)?;
    if op.mode != OperatorMode::Lifted {
        return Err(Error::Usage(format!("{} is not a lifted operator", operator.display())));
    }
    Ok(CutModels {
        cutnet: load_cutnet(cutnet)?,
        operator: op,
        cutnet_report: TrainReport::default(),
        operator_report: TrainReport::default(),
    })
}

fn load_baseline(path: &Path) -> Result<cutop_core::DeepONetModel> {
    let m = load_deeponet(path)?;
    if m.mode != OperatorMode::Baseline {
        return Err(Error::Usage(format!("{} is not a baseline model", path.display())));
    }
    Ok(m)
}

fn predict_cmd(a: &Predict) -> Result<()> {
    let (mut cfg, data) = resolve_for_data(&a.cfg, &a.data)?;
    cfg.paths.out = Some(a.out.clone());
    let sample = data
        .test()
        .nth(a.sample)
        .ok_or_else(|| Error::Usage(format!("the test split has no sample {}", a.sample)))?;
    let f = &sample.field;
    let (values, labels) = match (&a.cutnet, &a.operator, &a.baseline) {
        (Some(c), Some(o), None) => {
            let m = load_cut(c, o)?;
            let p = cut_predict(&m.cutnet, &m.operator, &f.sensors, &f.domain)?;
            (p.values, Some(p.labels))
        }
        (None, None, Some(b)) => (baseline_predict(&load_baseline(b)?, &f.sensors, &f.domain)?, None),
        _ => return Err(Error::Usage("give --cutnet with --operator, or --baseline".into())),
    };
    let d = f.domain;
    let mut header = vec!["slice", "coord", "value", "truth"];
    if labels.is_some() {
        header.push("label");
    }
    let axis = d.front_axis();
    let rows: Vec<Vec<String>> = (0..d.len())
        .map(|k| {
            let (j, i) = (k / d.slice_len(), k % d.slice_len());
            let mut r = vec![j.to_string(), fmt_f64(axis.point(i)), fmt_f64(values[k]), fmt_f64(f.values[k])];
            if let Some(l) = &labels {
                r.push(l[k].to_string());
            }
            r
        })
        .collect();
    atomic_write(&a.out, csv_string(&header, &rows)?.as_bytes())?;
    echo_beside(&a.out, &cfg)
}

fn evaluate_cmd(a: &Evaluate) -> Result<()> {
    if a.models.is_empty() {
        return Err(Error::Usage("--models is empty".into()));
    }
    let (mut cfg, data) = match &a.data {
        Some(path) => {
            if a.n.is_some() {
                return Err(Error::Usage("--n cannot be combined with --data".into()));
            }
            resolve_for_data(&a.cfg, path)?
        }
        None => {
            let mut cfg = resolve(&a.cfg, a.problem)?;
            if let Some(n) = a.n {
                cfg.n_samples = n;
            }
            cfg.validate()?;
            let data = generate_dataset(cfg.problem, cfg.n_samples, cfg.seed, &cfg.resolution)?;
            (cfg, data)
        }
    };
    cfg.paths.out = Some(a.out.clone());
    let to_train: Vec<ModelKind> = a
        .models
        .iter()
        .copied()
        .filter(|k| match k {
            ModelKind::Cut => a.cutnet.is_none(),
            ModelKind::Baseline => a.baseline.is_none(),
        })
        .collect();
    let mut set: TrainedSet = train_models(&cfg, &data, &to_train)?;
    if a.models.contains(&ModelKind::Cut) {
        if let (Some(c), Some(o)) = (&a.cutnet, &a.operator) {
            set.cut = Some(load_cut(c, o)?);
        }
    }
    if a.models.contains(&ModelKind::Baseline) {
        if let Some(b) = &a.baseline {
            set.baseline = Some((load_baseline(b)?, TrainReport::default()));
        }
    }
    let reports = evaluate_models(&cfg, &data, &set)?;
    for r in &reports {
        let (l1, l1s) = r.l1_mean_std();
        let (dis, diss) = r.dis_mean_std();
        log::info!("{} {}: L1 {l1:.4} ± {l1s:.4}, Dis {dis:.4} ± {diss:.4}", r.problem, r.model);
    }
    emit_metrics_csv(&reports, &a.out)?;
    echo_beside(&a.out, &cfg)
}

fn sweep_cmd(a: &Sweep) -> Result<()> {
    if a.nx.is_empty() || a.models.is_empty() {
        return Err(Error::Usage("--nx and --models need at least one value".into()));
    }
    let mut cfg = resolve(&a.cfg, a.problem)?;
    if let Some(n) = a.n {
        cfg.n_samples = n;
    }
    cfg.paths.out = Some(a.out.clone());
    cfg.validate()?;
    let reports = resolution_sweep(&cfg, &a.nx, &a.models)?;
    emit_metrics_csv(&reports, &a.out)?;
    echo_beside(&a.out, &cfg)
}

fn run(cli: &Cli) -> Result<()> {
    match &cli.command {
        Command::GenData(a) => gen_data(a),
        Command::Extract(a) => extract_cmd(a),
        Command::Lift(a) => lift_cmd(a),
        Command::TrainCutnet(a) => train_cmd(a, "cutnet"),
        Command::TrainOperator(a) => train_cmd(a, "operator"),
        Command::TrainBaseline(a) => train_cmd(a, "baseline"),
        Command::Predict(a) => predict_cmd(a),
        Command::Evaluate(a) => evaluate_cmd(a),
        Command::Sweep(a) => sweep_cmd(a),
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(if e.is_user_error() { 1 } else { 2 })
        }
    }
}
