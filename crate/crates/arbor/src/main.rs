//! Command-line front end: train, tune, predict, and bench over CSV data.
//!
//! Exit codes: 0 success, 1 usage or failed consistency check, 2 data error,
//! 3 model error.

use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Args, Parser, Subcommand};

use arbor::dataset::{parse_csv, parse_feature_csv, split_dataset, Column, Dataset, LabelColumn, Task};
use arbor::model::Model;
use arbor::tree::{build_tree, build_tree_limited, Limits};
use arbor::tuning::{evaluate, prune, tune, MetricKind, TuningConfig};
use arbor::Criterion;

#[derive(Parser)]
#[command(name = "arbor", version, about = "Decision-tree training and tuning for hybrid tabular data")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Train a full tree on a CSV file and write the model
    Train(TrainArgs),
    /// Train, sweep hyper-parameters on a validation split, prune, evaluate
    Tune(TuneArgs),
    /// Predict rows of a CSV file with a saved model
    Predict(PredictArgs),
    /// Compare the split-selection engines on synthetic data
    Bench(BenchArgs),
}

#[derive(Args)]
struct DataArgs {
    /// CSV file with a header row
    #[arg(long)]
    data: PathBuf,
    /// Label column, by header name or zero-based index
    #[arg(long)]
    label_column: String,
    #[arg(long, default_value = "classification", value_parser = parse_task)]
    task: Task,
    #[arg(long, default_value = "info-gain", value_parser = parse_criterion)]
    criterion: Criterion,
    /// Shuffle seed for partitioning
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

#[derive(Args)]
struct TrainArgs {
    #[command(flatten)]
    data: DataArgs,
    /// Optional train,valid,test fractions; trains on the train part only
    #[arg(long, value_parser = parse_fractions)]
    split: Option<(f64, f64, f64)>,
    #[arg(long)]
    model_out: Option<PathBuf>,
}

#[derive(Args)]
struct TuneArgs {
    #[command(flatten)]
    data: DataArgs,
    /// Train,valid,test fractions
    #[arg(long, default_value = "0.8,0.1,0.1", value_parser = parse_fractions)]
    split: (f64, f64, f64),
    #[arg(long)]
    model_out: Option<PathBuf>,
    /// Write the evaluated curves as TSV
    #[arg(long)]
    report: Option<PathBuf>,
    /// Rebuild with the tuned limits and verify it equals the pruned tree
    #[arg(long)]
    check_retrain_equivalence: bool,
}

#[derive(Args)]
struct PredictArgs {
    #[arg(long)]
    model_in: PathBuf,
    /// CSV file whose header contains every feature column of the model
    #[arg(long)]
    data: PathBuf,
}

#[derive(Args)]
struct BenchArgs {
    /// Example counts to measure, comma separated, each at least 1000
    #[arg(long, default_value = "10000,20000,40000,80000", value_parser = parse_sizes)]
    sizes: SizeList,
    #[arg(long, default_value_t = 10)]
    reps: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Write the timing table as TSV
    #[arg(long)]
    report: Option<PathBuf>,
}

#[derive(Clone)]
struct SizeList(Vec<usize>);

fn parse_task(s: &str) -> Result<Task, String> {
    s.parse()
}

fn parse_criterion(s: &str) -> Result<Criterion, String> {
    s.parse()
}

fn parse_fractions(s: &str) -> Result<(f64, f64, f64), String> {
    let parts: Vec<&str> = s.split(',').collect();
    let [train, valid, test] = parts.as_slice() else {
        return Err("expected three comma-separated fractions, e.g. 0.8,0.1,0.1".into());
    };
    let parse = |p: &str| p.trim().parse::<f64>().map_err(|e| format!("bad fraction {p:?}: {e}"));
    let f = (parse(train)?, parse(valid)?, parse(test)?);
    if !(f.0 > 0.0 && f.1 > 0.0 && f.2 > 0.0) || (f.0 + f.1 + f.2 - 1.0).abs() > 1e-9 {
        return Err("fractions must be positive and sum to 1".into());
    }
    Ok(f)
}

fn parse_sizes(s: &str) -> Result<SizeList, String> {
    let sizes = s
        .split(',')
        .map(|p| p.trim().parse::<usize>().map_err(|e| format!("bad size {p:?}: {e}")))
        .collect::<Result<Vec<_>, _>>()?;
    if sizes.is_empty() || sizes.iter().any(|&n| n < 1000) {
        return Err("sizes must each be at least 1000".into());
    }
    if sizes.windows(2).any(|w| w[0] >= w[1]) {
        return Err("sizes must be strictly increasing".into());
    }
    Ok(SizeList(sizes))
}

enum AppError {
    Usage(String),
    Data(String),
    Model(String),
    CheckFailed(String),
}

impl AppError {
    fn code(&self) -> i32 {
        match self {
            AppError::Usage(_) | AppError::CheckFailed(_) => 1,
            AppError::Data(_) => 2,
            AppError::Model(_) => 3,
        }
    }

    fn message(&self) -> &str {
        match self {
            AppError::Usage(m) | AppError::Data(m) | AppError::Model(m) | AppError::CheckFailed(m) => m,
        }
    }
}

impl From<arbor::dataset::IngestError> for AppError {
    fn from(e: arbor::dataset::IngestError) -> AppError {
        AppError::Data(e.to_string())
    }
}

impl From<arbor::dataset::SplitError> for AppError {
    fn from(e: arbor::dataset::SplitError) -> AppError {
        AppError::Data(e.to_string())
    }
}

impl From<arbor::model::ModelError> for AppError {
    fn from(e: arbor::model::ModelError) -> AppError {
        AppError::Model(e.to_string())
    }
}

fn main() {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            std::process::exit(code);
        }
    };
    let result = match cli.command {
        Command::Train(args) => cmd_train(args),
        Command::Tune(args) => cmd_tune(args),
        Command::Predict(args) => cmd_predict(args),
        Command::Bench(args) => cmd_bench(args),
    };
    if let Err(e) = result {
        eprintln!("error: {}", e.message());
        std::process::exit(e.code());
    }
}

fn load_dataset(args: &DataArgs) -> Result<Dataset, AppError> {
    let file = std::fs::File::open(&args.data)
        .map_err(|e| AppError::Data(format!("{}: {e}", args.data.display())))?;
    let label = LabelColumn::Name(args.label_column.clone());
    Ok(parse_csv(std::io::BufReader::new(file), &label, args.task)?)
}

fn write_data_file(path: &Path, contents: &str) -> Result<(), AppError> {
    std::fs::write(path, contents).map_err(|e| AppError::Data(format!("{}: {e}", path.display())))
}

fn cmd_train(args: TrainArgs) -> Result<(), AppError> {
    let data = load_dataset(&args.data)?;
    let train = match args.split {
        Some(fractions) => split_dataset(&data, fractions, args.data.seed)?.0,
        None => data,
    };

    let start = Instant::now();
    let tree = build_tree(&train, args.data.criterion);
    let train_ms = start.elapsed().as_secs_f64() * 1e3;

    println!("nodes {}", tree.n_nodes());
    println!("depth {}", tree.depth());
    println!("train_ms {train_ms:.1}");
    if let Some(path) = args.model_out {
        Model::new(tree, &train, args.data.criterion).save(&path)?;
        println!("model {}", path.display());
    }
    Ok(())
}

fn cmd_tune(args: TuneArgs) -> Result<(), AppError> {
    let data = load_dataset(&args.data)?;
    let (train, valid, test) = split_dataset(&data, args.split, args.data.seed)?;

    let start = Instant::now();
    let full = build_tree(&train, args.data.criterion);
    let train_ms = start.elapsed().as_secs_f64() * 1e3;
    println!("full_nodes {}", full.n_nodes());
    println!("full_depth {}", full.depth());
    println!("train_ms {train_ms:.1}");

    let start = Instant::now();
    let result = tune(&full, &valid);
    let pruned = prune(&full, result.best);
    let tune_ms = start.elapsed().as_secs_f64() * 1e3;
    println!("tune_ms {tune_ms:.1}");
    println!("configs_evaluated {}", result.n_configs_evaluated);
    println!("best_depth_max {}", result.best.depth_max);
    println!("best_split_min {}", result.best.split_min);

    let unrestricted = TuningConfig { depth_max: usize::MAX, split_min: 0 };
    match test.task() {
        Task::Classification => {
            let acc = evaluate(&pruned, &test, unrestricted, MetricKind::Accuracy)
                .expect("classification data");
            println!("test_accuracy {:.4}", acc.value);
        }
        Task::Regression => {
            let mae = evaluate(&pruned, &test, unrestricted, MetricKind::Mae).expect("regression data");
            let rmse = evaluate(&pruned, &test, unrestricted, MetricKind::Rmse).expect("regression data");
            println!("test_mae {:.4}", mae.value);
            println!("test_rmse {:.4}", rmse.value);
        }
    }
    println!("tuned_nodes {}", pruned.n_nodes());
    println!("tuned_depth {}", pruned.depth());

    if args.check_retrain_equivalence {
        let start = Instant::now();
        let rebuilt = build_tree_limited(
            &train,
            args.data.criterion,
            Limits::new(result.best.depth_max, result.best.split_min),
        );
        let retrain_ms = start.elapsed().as_secs_f64() * 1e3;
        println!("retrain_ms {retrain_ms:.1}");
        let equivalent = rebuilt == pruned;
        println!("retrain_equivalent {equivalent}");
        if !equivalent {
            return Err(AppError::CheckFailed(
                "retrained tree differs from the pruned tree".into(),
            ));
        }
    }

    if let Some(path) = args.report {
        write_data_file(&path, &result.to_tsv())?;
    }
    if let Some(path) = args.model_out {
        Model::new(pruned, &train, args.data.criterion).save(&path)?;
        println!("model {}", path.display());
    }
    Ok(())
}

fn cmd_predict(args: PredictArgs) -> Result<(), AppError> {
    let model = Model::load(&args.model_in)?;
    let text = std::fs::read_to_string(&args.data)
        .map_err(|e| AppError::Data(format!("{}: {e}", args.data.display())))?;
    if text.trim().is_empty() {
        return Ok(());
    }
    let columns = parse_feature_csv(text.as_bytes())?;
    let aligned: Vec<Column> = model
        .align_columns(&columns)
        .map_err(|e| AppError::Data(e.to_string()))?
        .into_iter()
        .cloned()
        .collect();
    let n_rows = aligned.first().map_or(0, |c| c.values.len());

    let stdout = std::io::stdout();
    let mut out = std::io::BufWriter::new(stdout.lock());
    use std::io::Write;
    for row in 0..n_rows {
        let label = model.tree.predict(&aligned, row, usize::MAX, 0);
        writeln!(out, "{}", model.format_label(&label))
            .map_err(|e| AppError::Data(e.to_string()))?;
    }
    Ok(())
}

fn cmd_bench(args: BenchArgs) -> Result<(), AppError> {
    if args.reps == 0 {
        return Err(AppError::Usage("reps must be at least 1".into()));
    }
    let report = arbor::bench::run(&args.sizes.0, args.reps, args.seed);
    println!("{:>10} {:>14} {:>14} {:>10}", "size", "rescan_ms", "prefix_ms", "speedup");
    for row in &report.rows {
        println!(
            "{:>10} {:>14.3} {:>14.3} {:>10.1}",
            row.size,
            row.rescan_ms,
            row.prefix_ms,
            row.rescan_ms / row.prefix_ms
        );
    }
    if let Some(path) = args.report {
        write_data_file(&path, &report.to_tsv())?;
    }
    Ok(())
}
