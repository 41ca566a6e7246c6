use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use deed_core::analysis::{class_densities, emit_kde_csv, emit_lda_csv, lda_project};
use deed_core::classifiers::{deserialize_detector, serialize_detector, AdaBoostConfig, DetectorConfig, LinearL1Config};
use deed_core::eval::{
    format_table, layer_sweep_files, make_split, merge_report_files, pair_same_object, predict_set, run_eval,
    sweep_training_size, train_detector, write_layer_csv, write_reports_csv, write_reports_jsonl, EvalConfig,
    EvalReport, ExperimentKind, SplitSpec, DEFAULT_SWEEP_SIZES,
};
use deed_core::feature_store::{read_manifest, write_manifest};
use deed_core::synthetic::{generate, generate_domain_shifted, synthetic_manifest, EditEffectProfile};
use deed_core::{read_feature_file, write_feature_file, DeedError, FeatureMode, FeatureSet, Label};

#[derive(Parser)]
#[command(name = "deed", version, about = "Detect knowledge edits from hidden-state and output-probability features")]
struct Cli {
    /// Directory for outputs that are not given an explicit path.
    #[arg(long, global = true, env = "DEED_OUT_DIR", default_value = ".")]
    out_dir: PathBuf,

    /// Worker threads for sweeps (default: number of processors).
    #[arg(long, global = true)]
    workers: Option<usize>,

    /// More log output on stderr (repeatable).
    #[arg(short, long, global = true, action = clap::ArgAction::Count)]
    verbose: u8,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a synthetic feature file.
    Gen(GenArgs),
    /// Print a feature file's header and per-class statistics.
    Inspect {
        file: PathBuf,
    },
    /// Fit a detector on a feature file and save it as JSON.
    Train(TrainArgs),
    /// Label every record of a feature file with a saved detector.
    Predict(PredictArgs),
    /// Train on one set and evaluate on another.
    Eval(EvalArgs),
    /// Evaluate over a grid of training sizes and seeds.
    Sweep(SweepArgs),
    /// F1 of an L1 logistic probe on each layer's hidden states.
    Layers(LayersArgs),
    /// Emit plot data.
    #[command(subcommand)]
    Analyze(AnalyzeCommand),
    /// Merge report files into one table.
    Report(ReportArgs),
    /// Split a feature file into balanced train and test files.
    Split(SplitArgs),
    /// Write a domain-shifted copy of a feature file.
    Shift(ShiftArgs),
}

#[derive(Args)]
struct GenArgs {
    /// Built-in profile: le-like, ml-like or none.
    #[arg(long, default_value = "le-like", conflicts_with = "profile")]
    preset: String,
    /// Profile JSON file instead of a preset.
    #[arg(long)]
    profile: Option<PathBuf>,
    /// Records per class.
    #[arg(long, default_value_t = 500)]
    n: usize,
    #[arg(long, default_value_t = 64)]
    hs_dim: usize,
    #[arg(long, default_value_t = 50)]
    pd_k: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(short, long)]
    output: Option<PathBuf>,
    /// Also write a synthetic fact manifest (JSON Lines).
    #[arg(long)]
    manifest: Option<PathBuf>,
    /// Number of distinct object strings in the manifest.
    #[arg(long, default_value_t = 20)]
    objects: usize,
}

#[derive(Clone, Copy, ValueEnum)]
enum DetectorKind {
    Adaboost,
    LinearL1,
}

#[derive(Args)]
struct DetectorArgs {
    #[arg(long, value_enum, default_value = "adaboost")]
    detector: DetectorKind,
    /// Boosting rounds.
    #[arg(long, default_value_t = 50)]
    rounds: usize,
    /// Depth of the boosted trees (1 = stumps).
    #[arg(long, default_value_t = 1)]
    depth: usize,
    /// L1 penalty of the linear detector.
    #[arg(long, default_value_t = 0.01)]
    lambda: f64,
    #[arg(long, default_value_t = 1000)]
    max_iter: usize,
}

impl DetectorArgs {
    fn config(&self) -> DetectorConfig {
        match self.detector {
            DetectorKind::Adaboost => DetectorConfig::AdaBoost(AdaBoostConfig { rounds: self.rounds, base_depth: self.depth }),
            DetectorKind::LinearL1 => DetectorConfig::LinearL1(LinearL1Config {
                lambda: self.lambda,
                max_iter: self.max_iter,
                ..Default::default()
            }),
        }
    }
}

#[derive(Args)]
struct FeatureArgs {
    /// HS, PD or HS_PD.
    #[arg(long, default_value = "HS_PD", value_parser = parse_mode)]
    mode: FeatureMode,
    /// Keep only the top-k probabilities.
    #[arg(long)]
    truncate_k: Option<usize>,
}

fn parse_mode(s: &str) -> std::result::Result<FeatureMode, String> {
    s.parse().map_err(|e: DeedError| e.to_string())
}

fn parse_kind(s: &str) -> std::result::Result<ExperimentKind, String> {
    s.parse().map_err(|e: DeedError| e.to_string())
}

#[derive(Args)]
struct SplitFlags {
    /// Training records (half per class).
    #[arg(long, default_value_t = 126)]
    n_train: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Keep the test set unbalanced.
    #[arg(long)]
    no_balance: bool,
}

impl SplitFlags {
    fn spec(&self) -> SplitSpec {
        SplitSpec { n_train: self.n_train, seed: self.seed, balance_test: !self.no_balance }
    }
}

#[derive(Args)]
struct TrainArgs {
    #[arg(long)]
    data: PathBuf,
    #[command(flatten)]
    features: FeatureArgs,
    #[command(flatten)]
    detector: DetectorArgs,
    #[arg(short, long)]
    output: Option<PathBuf>,
}

#[derive(Args)]
struct PredictArgs {
    #[arg(long)]
    model: PathBuf,
    #[arg(long)]
    data: PathBuf,
    /// CSV path; standard output when omitted.
    #[arg(short, long)]
    output: Option<PathBuf>,
}

#[derive(Args)]
struct EvalArgs {
    #[arg(long, requires = "test", conflicts_with = "data")]
    train: Option<PathBuf>,
    #[arg(long, requires = "train")]
    test: Option<PathBuf>,
    /// Single feature file to split into train and test.
    #[arg(long)]
    data: Option<PathBuf>,
    #[command(flatten)]
    split: SplitFlags,
    #[command(flatten)]
    features: FeatureArgs,
    #[command(flatten)]
    detector: DetectorArgs,
    /// Restrict the test set to same-object pairs using this fact manifest.
    #[arg(long)]
    same_object: Option<PathBuf>,
    /// Override the experiment kind inferred from the headers.
    #[arg(long, value_parser = parse_kind)]
    kind: Option<ExperimentKind>,
    /// Base name of the report files written to the output directory.
    #[arg(long, default_value = "eval")]
    name: String,
}

#[derive(Args)]
struct SweepArgs {
    #[arg(long)]
    data: PathBuf,
    /// Comma-separated even training sizes.
    #[arg(long, value_delimiter = ',', default_values_t = DEFAULT_SWEEP_SIZES)]
    sizes: Vec<usize>,
    /// Comma-separated seeds.
    #[arg(long, value_delimiter = ',', default_values_t = (0..10u64).collect::<Vec<_>>())]
    seeds: Vec<u64>,
    #[arg(long)]
    no_balance: bool,
    #[command(flatten)]
    features: FeatureArgs,
    #[command(flatten)]
    detector: DetectorArgs,
    #[arg(long, default_value = "sweep")]
    name: String,
}

#[derive(Args)]
struct LayersArgs {
    /// One feature file per layer.
    #[arg(required = true)]
    files: Vec<PathBuf>,
    #[arg(long, default_value_t = 0.01)]
    lambda: f64,
    #[command(flatten)]
    split: SplitFlags,
    #[arg(long, default_value = "layers")]
    name: String,
}

#[derive(Subcommand)]
enum AnalyzeCommand {
    /// Fisher LDA projection of the hidden states (fact_id,label,z,jitter).
    Lda {
        #[arg(long)]
        data: PathBuf,
        /// Seed of the jitter column.
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Per-class density of the mean top-10 probability (label,grid,density).
    Kde {
        #[arg(long)]
        data: PathBuf,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
}

#[derive(Args)]
struct ReportArgs {
    /// Report files (.csv or .jsonl).
    #[arg(required = true)]
    files: Vec<PathBuf>,
    /// Also write the merged reports (.csv or .jsonl by extension).
    #[arg(short, long)]
    output: Option<PathBuf>,
}

#[derive(Args)]
struct SplitArgs {
    #[arg(long)]
    data: PathBuf,
    #[command(flatten)]
    split: SplitFlags,
    #[arg(long)]
    train_out: PathBuf,
    #[arg(long)]
    test_out: PathBuf,
}

#[derive(Args)]
struct ShiftArgs {
    #[arg(long)]
    data: PathBuf,
    /// Rotation angle in radians.
    #[arg(long, default_value_t = 0.1)]
    angle: f64,
    #[arg(long, default_value_t = 0.05)]
    noise: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(short, long)]
    output: PathBuf,
}

struct Ctx {
    out_dir: PathBuf,
}

impl Ctx {
    fn output(&self, explicit: Option<&Path>, default_name: &str) -> Result<PathBuf> {
        if let Some(p) = explicit {
            return Ok(p.to_path_buf());
        }
        fs::create_dir_all(&self.out_dir).with_context(|| format!("creating {}", self.out_dir.display()))?;
        Ok(self.out_dir.join(default_name))
    }

    fn write_reports(&self, reports: &[EvalReport], name: &str) -> Result<()> {
        let csv = self.output(None, &format!("{name}.csv"))?;
        let jsonl = self.output(None, &format!("{name}.jsonl"))?;
        write_reports_csv(reports, &csv)?;
        write_reports_jsonl(reports, &jsonl)?;
        log::info!("wrote {} and {}", csv.display(), jsonl.display());
        print!("{}", format_table(reports));
        Ok(())
    }
}

fn load(path: &Path) -> Result<FeatureSet> {
    read_feature_file(path).with_context(|| format!("reading {}", path.display()))
}

fn cmd_gen(ctx: &Ctx, a: &GenArgs) -> Result<()> {
    let profile = match &a.profile {
        Some(p) => EditEffectProfile { seed: a.seed, ..EditEffectProfile::from_json_file(p)? },
        None => EditEffectProfile::preset(&a.preset, a.seed)?,
    };
    let set = generate(&profile, a.n, a.hs_dim, a.pd_k)?;
    let path = ctx.output(a.output.as_deref(), &format!("{}-{}.deed", profile.name, a.seed))?;
    write_feature_file(&set, &path)?;
    if let Some(m) = &a.manifest {
        write_manifest(&synthetic_manifest(&set, a.objects, a.seed)?, m)?;
    }
    log::info!("wrote {} records to {}", set.len(), path.display());
    Ok(())
}

fn cmd_inspect(path: &Path) -> Result<()> {
    let set = load(path)?;
    let mut out = io::stdout().lock();
    writeln!(out, "{}", serde_json::to_string_pretty(&set.header)?)?;
    for label in [Label::Unedited, Label::Edited] {
        let recs: Vec<_> = set.records.iter().filter(|r| r.label == label).collect();
        if recs.is_empty() {
            writeln!(out, "{label:?}: 0 records")?;
            continue;
        }
        let n = recs.len() as f64;
        let norm = recs.iter().map(|r| r.hs.iter().map(|&v| f64::from(v).powi(2)).sum::<f64>().sqrt()).sum::<f64>() / n;
        let top1 = recs.iter().map(|r| f64::from(r.pd[0])).sum::<f64>() / n;
        writeln!(out, "{label:?}: {} records, mean |hs| {norm:.4}, mean top-1 probability {top1:.4}", recs.len())?;
    }
    Ok(())
}

fn cmd_train(ctx: &Ctx, a: &TrainArgs) -> Result<()> {
    let set = load(&a.data)?;
    let config = EvalConfig {
        feature_mode: a.features.mode,
        truncate_k: a.features.truncate_k,
        detector: a.detector.config(),
        ..Default::default()
    };
    let detector = train_detector(&set, &config)?;
    let path = ctx.output(a.output.as_deref(), "model.json")?;
    fs::write(&path, serialize_detector(&detector)?)?;
    log::info!("wrote {} model to {}", config.detector, path.display());
    Ok(())
}

fn cmd_predict(a: &PredictArgs) -> Result<()> {
    let text = fs::read_to_string(&a.model).with_context(|| format!("reading {}", a.model.display()))?;
    let detector = deserialize_detector(&text)?;
    let set = load(&a.data)?;
    let preds = predict_set(&detector, &set)?;
    let mut w: Box<dyn Write> = match &a.output {
        Some(p) => Box::new(io::BufWriter::new(fs::File::create(p)?)),
        None => Box::new(io::stdout().lock()),
    };
    writeln!(w, "fact_id,label,predicted")?;
    for (r, p) in set.records.iter().zip(preds) {
        writeln!(w, "{},{},{}", r.fact_id, r.label.sign(), p)?;
    }
    w.flush()?;
    Ok(())
}

fn cmd_eval(ctx: &Ctx, a: &EvalArgs) -> Result<()> {
    let (train, mut test, seed) = match (&a.train, &a.test, &a.data) {
        (Some(tr), Some(te), None) => (load(tr)?, load(te)?, None),
        (None, None, Some(d)) => {
            let (tr, te) = make_split(&load(d)?, &a.split.spec())?;
            (tr, te, Some(a.split.seed))
        }
        _ => bail!(DeedError::Parameter("give either --train and --test, or --data".into())),
    };
    let mut kind = a.kind;
    if let Some(m) = &a.same_object {
        test = pair_same_object(&test, &read_manifest(m)?)?;
        kind = kind.or(Some(ExperimentKind::SameObject));
    }
    let config = EvalConfig {
        feature_mode: a.features.mode,
        truncate_k: a.features.truncate_k,
        detector: a.detector.config(),
        kind,
        seed,
    };
    let report = run_eval(&train, &test, &config)?;
    ctx.write_reports(&[report], &a.name)
}

fn cmd_sweep(ctx: &Ctx, a: &SweepArgs) -> Result<()> {
    let set = load(&a.data)?;
    let config = EvalConfig {
        feature_mode: a.features.mode,
        truncate_k: a.features.truncate_k,
        detector: a.detector.config(),
        ..Default::default()
    };
    let reports = sweep_training_size(&set, &a.sizes, &a.seeds, &config, !a.no_balance)?;
    ctx.write_reports(&reports, &a.name)
}

fn cmd_layers(ctx: &Ctx, a: &LayersArgs) -> Result<()> {
    let points = layer_sweep_files(&a.files, a.lambda, &a.split.spec())?;
    let grid = ctx.output(None, &format!("{}.csv", a.name))?;
    write_layer_csv(&points, &grid)?;
    let reports: Vec<EvalReport> = points.into_iter().map(|p| p.report).collect();
    ctx.write_reports(&reports, &format!("{}-reports", a.name))?;
    log::info!("wrote layer grid to {}", grid.display());
    Ok(())
}

fn cmd_analyze(ctx: &Ctx, c: &AnalyzeCommand) -> Result<()> {
    match c {
        AnalyzeCommand::Lda { data, seed, output } => {
            let proj = lda_project(&load(data)?)?;
            let path = ctx.output(output.as_deref(), "lda.csv")?;
            emit_lda_csv(&proj, *seed, &path)?;
            eprintln!("LDA separation {:.4}", proj.separation);
        }
        AnalyzeCommand::Kde { data, output } => {
            let curves = class_densities(&load(data)?)?;
            let path = ctx.output(output.as_deref(), "kde.csv")?;
            emit_kde_csv(&curves, &path)?;
        }
    }
    Ok(())
}

fn cmd_report(a: &ReportArgs) -> Result<()> {
    let reports = merge_report_files(&a.files)?;
    if let Some(out) = &a.output {
        if out.extension().is_some_and(|e| e == "jsonl") {
            write_reports_jsonl(&reports, out)?;
        } else {
            write_reports_csv(&reports, out)?;
        }
    }
    print!("{}", format_table(&reports));
    Ok(())
}

fn cmd_split(a: &SplitArgs) -> Result<()> {
    let (train, test) = make_split(&load(&a.data)?, &a.split.spec())?;
    write_feature_file(&train, &a.train_out)?;
    write_feature_file(&test, &a.test_out)?;
    Ok(())
}

fn cmd_shift(a: &ShiftArgs) -> Result<()> {
    let shifted = generate_domain_shifted(&load(&a.data)?, a.angle, a.noise, a.seed)?;
    write_feature_file(&shifted, &a.output)?;
    Ok(())
}

fn run(cli: Cli) -> Result<()> {
    if let Some(n) = cli.workers {
        rayon::ThreadPoolBuilder::new().num_threads(n).build_global()?;
    }
    let ctx = Ctx { out_dir: cli.out_dir };
    match &cli.command {
        Command::Gen(a) => cmd_gen(&ctx, a),
        Command::Inspect { file } => cmd_inspect(file),
        Command::Train(a) => cmd_train(&ctx, a),
        Command::Predict(a) => cmd_predict(a),
        Command::Eval(a) => cmd_eval(&ctx, a),
        Command::Sweep(a) => cmd_sweep(&ctx, a),
        Command::Layers(a) => cmd_layers(&ctx, a),
        Command::Analyze(c) => cmd_analyze(&ctx, c),
        Command::Report(a) => cmd_report(a),
        Command::Split(a) => cmd_split(a),
        Command::Shift(a) => cmd_shift(a),
    }
}

/// 2 for storage problems (I/O, format, corruption), 1 for everything else.
fn exit_code(err: &anyhow::Error) -> u8 {
    for cause in err.chain() {
        if let Some(e) = cause.downcast_ref::<DeedError>() {
            return if e.is_storage() { 2 } else { 1 };
        }
        if cause.is::<io::Error>() || cause.is::<serde_json::Error>() {
            return 2;
        }
    }
    1
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    let level = match cli.verbose {
        0 => "warn",
        1 => "info",
        _ => "debug",
    };
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level)).init();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(exit_code(&e))
        }
    }
}
