use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{anyhow, bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};

use tabml::classifiers::{registry, FeatureImportances, GridAxis};
use tabml::data::{
    derive_label, generate_synthetic, read_csv, sample_rows, train_test_split, write_csv, ColumnData, ColumnSpec,
    CsvOptions, DataTable, LabelRule, SynthSpec,
};
use tabml::evaluation::{pr_curve, roc_curve, timed_fit, write_curve_csv, EvalReport};
use tabml::model_selection::{
    benchmark, cross_validate, scored_columns, BenchmarkConfig, CvConfig, Metric, ParamGrid,
};
use tabml::persist::{load_model, load_table, save_model, save_table, table_fingerprint, ModelMetadata, Payload, SavedModel};
use tabml::pipeline::{FittedPipeline, PipelineSpec, StageSpec, PREDICTION_COL, PROBABILITY_COL, RAW_SCORE_COL};

#[derive(Parser)]
#[command(name = "tabml", version, about = "Train and evaluate binary classifiers on tabular data")]
struct Cli {
    /// Master seed for every random choice.
    #[arg(long, global = true, default_value_t = 1)]
    seed: u64,
    /// Worker threads (defaults to the number of cores).
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Read a CSV file against a JSON schema and write a table snapshot.
    Ingest(IngestArgs),
    /// Keep a seeded fraction of rows.
    Sample(SampleArgs),
    /// Seeded train/test split.
    Split(SplitArgs),
    /// Generate a synthetic CSV and its schema.
    Synth(SynthArgs),
    /// Cross-validate a pipeline and save the refit best model.
    Train(TrainArgs),
    /// Score a saved model on a table and report metrics.
    Evaluate(EvaluateArgs),
    /// Train and score several families on one split.
    Benchmark(BenchmarkArgs),
    /// Print ranked feature importances of a tree model.
    Importance(ImportanceArgs),
    /// Write per-row predictions of a saved model.
    Predict(PredictArgs),
}

#[derive(Args)]
struct IngestArgs {
    #[arg(long)]
    input: PathBuf,
    /// JSON array of column specs.
    #[arg(long)]
    schema: PathBuf,
    #[arg(long, default_value = ",")]
    delimiter: char,
    #[arg(long)]
    no_header: bool,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct SampleArgs {
    #[arg(long)]
    data: PathBuf,
    #[arg(long)]
    fraction: f64,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct SplitArgs {
    #[arg(long)]
    data: PathBuf,
    #[arg(long, default_value_t = 0.3)]
    test_fraction: f64,
    #[arg(long)]
    train_out: PathBuf,
    #[arg(long)]
    test_out: PathBuf,
}

#[derive(Clone, Copy, ValueEnum)]
enum Preset {
    Benefits,
    Interaction,
}

#[derive(Args)]
struct SynthArgs {
    #[arg(long, value_enum, default_value = "benefits")]
    preset: Preset,
    /// Full generator spec as JSON; overrides the preset, rows and rate.
    #[arg(long)]
    spec: Option<PathBuf>,
    #[arg(long, default_value_t = 10_000)]
    rows: usize,
    #[arg(long, default_value_t = 0.81)]
    positive_rate: f64,
    /// CSV output path.
    #[arg(long)]
    out: PathBuf,
    /// Where to write the schema (default: next to the CSV as `<stem>.schema.json`).
    #[arg(long)]
    schema_out: Option<PathBuf>,
}

#[derive(Args)]
struct LabelArgs {
    /// Text column the label is derived from when the table has no label column.
    #[arg(long, default_value = "IsCovered")]
    label_source: String,
    /// Values of the source column counted as positive (repeatable).
    #[arg(long = "positive", default_value = "Covered")]
    positive: Vec<String>,
}

impl LabelArgs {
    fn rule(&self) -> LabelRule {
        let values: Vec<&str> = self.positive.iter().map(String::as_str).collect();
        LabelRule::new(&self.label_source, &values)
    }
}

#[derive(Args)]
struct TrainArgs {
    #[arg(long)]
    data: PathBuf,
    /// Pipeline spec JSON; defaults to the benefit-plan feature pipeline.
    #[arg(long)]
    pipeline: Option<PathBuf>,
    /// Classifier family: lr, dt, rf, fm, gbt or svm.
    #[arg(long)]
    model: String,
    /// Base parameters JSON for the family (unlisted fields keep their defaults).
    #[arg(long)]
    params: Option<PathBuf>,
    /// Grid JSON: an array of {"name", "values"} axes. Defaults to the family grid.
    #[arg(long)]
    grid: Option<PathBuf>,
    /// Fit the base parameters once instead of cross-validating a grid.
    #[arg(long)]
    no_cv: bool,
    #[arg(long, default_value_t = 3)]
    folds: usize,
    #[arg(long, default_value = "auc_roc")]
    metric: Metric,
    /// Fraction held out before training; 0 trains on every row.
    #[arg(long, default_value_t = 0.3)]
    test_fraction: f64,
    #[arg(long)]
    train_out: Option<PathBuf>,
    #[arg(long)]
    test_out: Option<PathBuf>,
    #[command(flatten)]
    label: LabelArgs,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct EvaluateArgs {
    #[arg(long)]
    model: PathBuf,
    #[arg(long)]
    data: PathBuf,
    /// JSON report path.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Per-row CSV with features, prediction and trueLabel.
    #[arg(long)]
    predictions: Option<PathBuf>,
    #[arg(long)]
    roc_out: Option<PathBuf>,
    #[arg(long)]
    pr_out: Option<PathBuf>,
}

#[derive(Args)]
struct BenchmarkArgs {
    #[arg(long)]
    data: PathBuf,
    #[arg(long)]
    pipeline: Option<PathBuf>,
    /// Comma-separated families, in report order.
    #[arg(long, value_delimiter = ',', default_value = "lr,dt,rf,fm,gbt,svm")]
    models: Vec<String>,
    #[arg(long, default_value_t = 0.3)]
    test_fraction: f64,
    #[arg(long)]
    no_cv: bool,
    #[arg(long, default_value_t = 3)]
    folds: usize,
    #[arg(long, default_value = "auc_roc")]
    metric: Metric,
    #[command(flatten)]
    label: LabelArgs,
    /// Output directory for benchmark.json and benchmark.txt.
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct ImportanceArgs {
    #[arg(long)]
    model: PathBuf,
    /// JSON output path.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct PredictArgs {
    #[arg(long)]
    model: PathBuf,
    #[arg(long)]
    data: PathBuf,
    #[arg(long)]
    out: PathBuf,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    if let Some(n) = cli.threads {
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
            eprintln!("error: {e}");
            return ExitCode::FAILURE;
        }
    }
    match run(&cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}

fn run(cli: &Cli) -> Result<ExitCode> {
    match &cli.command {
        Command::Ingest(a) => ingest(a),
        Command::Sample(a) => {
            let table = read_table(&a.data)?;
            let out = sample_rows(&table, a.fraction, cli.seed)?;
            save_table(&out, &a.out)?;
            println!("kept {} of {} rows", out.row_count(), table.row_count());
            Ok(ExitCode::SUCCESS)
        }
        Command::Split(a) => {
            let table = read_table(&a.data)?;
            let (train, test) = train_test_split(&table, a.test_fraction, cli.seed)?;
            save_table(&train, &a.train_out)?;
            save_table(&test, &a.test_out)?;
            println!("train rows {}, test rows {}", train.row_count(), test.row_count());
            Ok(ExitCode::SUCCESS)
        }
        Command::Synth(a) => synth(a, cli.seed),
        Command::Train(a) => train(a, cli),
        Command::Evaluate(a) => evaluate(a),
        Command::Benchmark(a) => run_benchmark(a, cli),
        Command::Importance(a) => importance(a),
        Command::Predict(a) => predict(a),
    }
}

fn read_json<T: serde::de::DeserializeOwned>(path: &Path) -> Result<T> {
    let text = fs::read_to_string(path).with_context(|| format!("cannot read {}", path.display()))?;
    serde_json::from_str(&text).with_context(|| format!("invalid JSON in {}", path.display()))
}

fn write_json<T: serde::Serialize>(path: &Path, value: &T) -> Result<()> {
    let text = serde_json::to_string_pretty(value)?;
    fs::write(path, text + "\n").with_context(|| format!("cannot write {}", path.display()))
}

fn read_table(path: &Path) -> Result<DataTable> {
    load_table(path).with_context(|| format!("cannot load table {}", path.display()))
}

/// Adds the label column unless the table already has one.
fn ensure_label(table: DataTable, rule: &LabelRule) -> Result<(DataTable, Option<LabelRule>)> {
    if table.label_column().is_some() {
        return Ok((table, None));
    }
    let labelled = derive_label(&table, rule).context("cannot derive label")?;
    Ok((labelled, Some(rule.clone())))
}

fn ingest(a: &IngestArgs) -> Result<ExitCode> {
    let schema: Vec<ColumnSpec> = read_json(&a.schema)?;
    let delimiter = u8::try_from(a.delimiter).map_err(|_| anyhow!("delimiter must be a single byte"))?;
    let options = CsvOptions { delimiter, has_header: !a.no_header, ..CsvOptions::default() };
    let table = read_csv(&a.input, &schema, &options).with_context(|| format!("cannot ingest {}", a.input.display()))?;
    save_table(&table, &a.out)?;
    println!("rows {}", table.row_count());
    println!("{:<24} {:<18} nulls", "column", "kind");
    for (spec, col) in table.columns() {
        println!("{:<24} {:<18} {}", spec.name, format!("{:?}", spec.kind), col.null_count());
    }
    Ok(ExitCode::SUCCESS)
}

fn synth(a: &SynthArgs, seed: u64) -> Result<ExitCode> {
    let spec = match &a.spec {
        Some(p) => read_json::<SynthSpec>(p)?,
        None => match a.preset {
            Preset::Benefits => SynthSpec::benefits(a.rows, a.positive_rate, seed),
            Preset::Interaction => SynthSpec::interaction(a.rows, seed),
        },
    };
    let table = generate_synthetic(&spec)?;
    let file = fs::File::create(&a.out).with_context(|| format!("cannot write {}", a.out.display()))?;
    write_csv(&table, file, &CsvOptions::default())?;
    let schema_path = a.schema_out.clone().unwrap_or_else(|| {
        let stem = a.out.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_else(|| "synth".into());
        a.out.with_file_name(format!("{stem}.schema.json"))
    });
    write_json(&schema_path, &spec.schema())?;
    println!("wrote {} rows to {} (schema {})", table.row_count(), a.out.display(), schema_path.display());
    Ok(ExitCode::SUCCESS)
}

fn load_pipeline(path: Option<&PathBuf>) -> Result<PipelineSpec> {
    match path {
        Some(p) => read_json(p),
        None => Ok(PipelineSpec::benefits_default()),
    }
}

fn label_col(spec: &PipelineSpec) -> String {
    match spec.stages.last() {
        Some(StageSpec::Classifier { label_col, .. }) => label_col.clone(),
        _ => "label".into(),
    }
}

fn train(a: &TrainArgs, cli: &Cli) -> Result<ExitCode> {
    let trainer = registry().get(&a.model)?;
    let table = read_table(&a.data)?;
    let (table, label_rule) = ensure_label(table, &a.label.rule())?;
    let (train, test) = if a.test_fraction > 0.0 {
        train_test_split(&table, a.test_fraction, cli.seed)?
    } else {
        (table.clone(), table.take_rows(&[]))
    };
    if let Some(p) = &a.train_out {
        save_table(&train, p)?;
    }
    if let Some(p) = &a.test_out {
        save_table(&test, p)?;
    }

    let mut base = trainer.default_params();
    if let Some(p) = &a.params {
        let value: serde_json::Value = read_json(p)?;
        let serde_json::Value::Object(fields) = value else { bail!("{} must hold a JSON object", p.display()) };
        for (k, v) in fields.iter().filter(|(k, _)| *k != "family") {
            base = base.set(k, v)?;
        }
    }
    let spec = load_pipeline(a.pipeline.as_ref())?.with_classifier(base.clone());
    let axes: Vec<GridAxis> = match &a.grid {
        Some(p) => read_json(p)?,
        None => trainer.default_grid(),
    };
    let grid = ParamGrid { base, axes };

    let (model, params, minutes, cv_mean) = if a.no_cv {
        let (fitted, minutes) = timed_fit(|| spec.fit(&train));
        (fitted?, grid.base.clone(), minutes, None)
    } else {
        let config = CvConfig { folds: a.folds, metric: a.metric, seed: cli.seed, threads: cli.threads };
        let (outcome, minutes) = timed_fit(|| cross_validate(&spec, &grid, &train, &config));
        let outcome = outcome.context("cross-validation failed")?;
        let best = outcome.summary.best();
        (outcome.model, best.params.clone(), minutes, best.mean)
    };

    let saved = SavedModel {
        params: Some(params.clone()),
        metadata: ModelMetadata {
            seed: cli.seed,
            data_fingerprint: table_fingerprint(&train),
            training_rows: train.row_count(),
            label_column: label_col(&spec),
            label_rule,
        },
        payload: Payload::Pipeline { pipeline: model },
    };
    save_model(&saved, &a.out)?;
    println!("family       {}", params.family().display_name());
    println!("train rows   {}", train.row_count());
    println!("test rows    {}", test.row_count());
    println!("fit minutes  {minutes:.4}");
    if let Some(m) = cv_mean {
        println!("cv mean      {m:.6}");
    }
    println!("best params  {}", serde_json::to_string(&params)?);
    println!("model        {}", a.out.display());
    Ok(ExitCode::SUCCESS)
}

fn load_pipeline_model(path: &Path) -> Result<(SavedModel, FittedPipeline)> {
    let saved = load_model(path).with_context(|| format!("cannot load model {}", path.display()))?;
    match &saved.payload {
        Payload::Pipeline { pipeline } => {
            let pipeline = pipeline.clone();
            Ok((saved, pipeline))
        }
        Payload::Classifier { .. } => bail!("{} holds a bare classifier, not a pipeline", path.display()),
    }
}

/// Loads the table and derives its label the same way training did.
fn eval_table(path: &Path, saved: &SavedModel) -> Result<DataTable> {
    let table = read_table(path)?;
    match (&saved.metadata.label_rule, table.has_column(&saved.metadata.label_column)) {
        (Some(rule), false) => Ok(derive_label(&table, rule)?),
        _ => Ok(table),
    }
}

fn evaluate(a: &EvaluateArgs) -> Result<ExitCode> {
    let (saved, pipeline) = load_pipeline_model(&a.model)?;
    let table = eval_table(&a.data, &saved)?;
    let in_sample = table_fingerprint(&table) == saved.metadata.data_fingerprint;
    let scored = pipeline.transform(&table).context("cannot score table")?;
    let (scores, predictions, labels) = scored_columns(&scored, &saved.metadata.label_column)?;
    let mut report = EvalReport::compute(&scores, &predictions, &labels)?;
    report.in_sample = in_sample;

    print!("{}", report.summary_table());
    if in_sample {
        println!("note: in-sample evaluation (table matches the training data)");
    }
    if let Some(p) = &a.out {
        report.write_json(p)?;
    }
    if let Some(p) = &a.predictions {
        let features_col = pipeline.classifier().map(|c| c.features_col.clone()).unwrap_or_else(|| "features".into());
        let mut w = csv_writer(p)?;
        w.write_record(["features", "prediction", "trueLabel"])?;
        let features = scored.column(&features_col)?;
        for (row, (pred, label)) in predictions.iter().zip(&labels).enumerate() {
            let f = features.render(row).unwrap_or_default();
            w.write_record([f, format!("{:?}", f64::from(*pred)), format!("{:?}", f64::from(*label))])?;
        }
        w.flush()?;
    }
    if let Some(p) = &a.roc_out {
        write_curve_csv(&roc_curve(&scores, &labels)?.points, "fpr", "tpr", p)?;
    }
    if let Some(p) = &a.pr_out {
        write_curve_csv(&pr_curve(&scores, &labels)?.points, "recall", "precision", p)?;
    }
    Ok(ExitCode::SUCCESS)
}

fn csv_writer(path: &Path) -> Result<csv::Writer<fs::File>> {
    csv::Writer::from_path(path).with_context(|| format!("cannot write {}", path.display()))
}

fn run_benchmark(a: &BenchmarkArgs, cli: &Cli) -> Result<ExitCode> {
    let families = a
        .models
        .iter()
        .map(|m| m.trim().parse())
        .collect::<Result<Vec<_>, _>>()?;
    let table = read_table(&a.data)?;
    let (table, _) = ensure_label(table, &a.label.rule())?;
    let (train, test) = train_test_split(&table, a.test_fraction, cli.seed)?;
    let spec = load_pipeline(a.pipeline.as_ref())?;
    let config = BenchmarkConfig {
        families,
        cv: CvConfig { folds: a.folds, metric: a.metric, seed: cli.seed, threads: cli.threads },
        cross_validate: !a.no_cv,
    };
    let report = benchmark(&spec, &train, &test, &config);
    let text = report.to_table();
    fs::create_dir_all(&a.out).with_context(|| format!("cannot create {}", a.out.display()))?;
    write_json(&a.out.join("benchmark.json"), &report)?;
    fs::write(a.out.join("benchmark.txt"), &text)?;
    print!("{text}");
    if report.failures() > 0 {
        eprintln!("{} of {} families failed", report.failures(), report.rows.len());
        return Ok(ExitCode::FAILURE);
    }
    Ok(ExitCode::SUCCESS)
}

fn importance(a: &ImportanceArgs) -> Result<ExitCode> {
    let (_, pipeline) = load_pipeline_model(&a.model)?;
    let stage = pipeline.classifier().ok_or_else(|| anyhow!("model has no classifier stage"))?;
    let weights = stage.model.feature_importances()?;
    let mut names = pipeline.feature_names(&stage.features_col);
    if names.len() != weights.len() {
        names = (0..weights.len()).map(|i| format!("feature_{i}")).collect();
    }
    let fi = FeatureImportances::new(names, weights, 1e-6)?;
    println!("{:<8} {:<20} Importance value", "Ranking", "column");
    for (rank, (name, w)) in fi.ranked().into_iter().enumerate() {
        println!("{:<8} {:<20} {}", rank + 1, name, w);
    }
    if let Some(p) = &a.out {
        write_json(p, &fi)?;
    }
    Ok(ExitCode::SUCCESS)
}

fn predict(a: &PredictArgs) -> Result<ExitCode> {
    let (saved, pipeline) = load_pipeline_model(&a.model)?;
    let table = eval_table(&a.data, &saved)?;
    let scored = pipeline.transform(&table).context("cannot score table")?;
    let features_col = pipeline.classifier().map(|c| c.features_col.clone()).unwrap_or_else(|| "features".into());
    let cols = [features_col.as_str(), PREDICTION_COL, RAW_SCORE_COL, PROBABILITY_COL];
    let data: Vec<&ColumnData> = cols.iter().map(|c| scored.column(c)).collect::<Result<_, _>>()?;
    let mut w = csv_writer(&a.out)?;
    w.write_record(cols)?;
    for row in 0..scored.row_count() {
        w.write_record(data.iter().map(|c| c.render(row).unwrap_or_default()))?;
    }
    w.flush()?;
    println!("wrote {} predictions to {}", scored.row_count(), a.out.display());
    Ok(ExitCode::SUCCESS)
}
