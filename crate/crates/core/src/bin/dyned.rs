use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use rayon::prelude::*;

use dyned::diversity::MeasureKind;
use dyned::eval::{
    friedman_nemenyi, parse_config, rank_table, read_results, result_row, run_experiment, temporal_path,
    write_results, ExperimentConfig, Method, ResultRow, Settings,
};
use dyned::Error;

const WORKERS_ENV: &str = "DYNED_WORKERS";

#[derive(Parser)]
#[command(name = "dyned", version, about = "Streaming ensemble with accuracy/diversity component selection")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one prequential experiment.
    Run(RunArgs),
    /// Run every generator x seed x method cell and write one results file.
    Bench(BenchArgs),
    /// Rank table, average ranks and Nemenyi critical distance from a results file.
    Stats(StatsArgs),
}

/// Settings shared by `run` and `bench`. Each flag mirrors a config-file key.
#[derive(Args, Default)]
struct Overrides {
    /// `key = value` file; flags given on the command line take precedence.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    samples: Option<String>,
    #[arg(long)]
    warmup: Option<String>,
    #[arg(long)]
    report_interval: Option<String>,
    /// Write 0 in the wall_time_s column.
    #[arg(long)]
    no_timing: bool,
    #[arg(long)]
    theta: Option<String>,
    #[arg(long)]
    lambda: Option<String>,
    #[arg(long)]
    delta_lambda: Option<String>,
    #[arg(long)]
    win_size: Option<String>,
    #[arg(long)]
    init_c: Option<String>,
    #[arg(long)]
    init_s: Option<String>,
    #[arg(long)]
    pool_size: Option<String>,
    #[arg(long)]
    add_size: Option<String>,
    #[arg(long)]
    cls_size: Option<String>,
    #[arg(long)]
    slc_size: Option<String>,
    #[arg(long)]
    error_size: Option<String>,
    #[arg(long)]
    grace_period: Option<String>,
    #[arg(long)]
    split_confidence: Option<String>,
    #[arg(long)]
    tie_threshold: Option<String>,
    #[arg(long)]
    max_depth: Option<String>,
    #[arg(long)]
    adwin_delta: Option<String>,
}

impl Overrides {
    fn apply(&self, settings: &mut Settings) {
        let pairs = [
            ("samples", &self.samples),
            ("warmup", &self.warmup),
            ("report-interval", &self.report_interval),
            ("theta", &self.theta),
            ("lambda", &self.lambda),
            ("delta-lambda", &self.delta_lambda),
            ("win-size", &self.win_size),
            ("init-c", &self.init_c),
            ("init-s", &self.init_s),
            ("pool-size", &self.pool_size),
            ("add-size", &self.add_size),
            ("cls-size", &self.cls_size),
            ("slc-size", &self.slc_size),
            ("error-size", &self.error_size),
            ("grace-period", &self.grace_period),
            ("split-confidence", &self.split_confidence),
            ("tie-threshold", &self.tie_threshold),
            ("max-depth", &self.max_depth),
            ("adwin-delta", &self.adwin_delta),
        ];
        for (key, value) in pairs {
            if let Some(v) = value {
                settings.insert(key.to_string(), v.clone());
            }
        }
        if self.no_timing {
            settings.insert("no-timing".into(), "true".into());
        }
    }

    fn settings(&self) -> Result<Settings, Failure> {
        let mut settings = match &self.config {
            Some(path) => {
                let text = std::fs::read_to_string(path)
                    .map_err(|e| Failure::usage(format!("{}: {e}", path.display())))?;
                parse_config(&text).map_err(|e| Failure::usage(format!("{}: {e}", path.display())))?
            }
            None => Settings::new(),
        };
        self.apply(&mut settings);
        Ok(settings)
    }
}

#[derive(Args)]
struct RunArgs {
    /// Named synthetic stream, e.g. sea-abrupt-012.
    #[arg(long, conflicts_with = "dataset")]
    generator: Option<String>,
    /// CSV file, one instance per line.
    #[arg(long)]
    dataset: Option<PathBuf>,
    /// Label column: index, header name, or `last`.
    #[arg(long)]
    label_column: Option<String>,
    /// Skip one header line in the dataset.
    #[arg(long)]
    header: bool,
    #[arg(long)]
    seed: Option<String>,
    /// dyned or ht.
    #[arg(long)]
    method: Option<String>,
    /// df, dm, q or cp.
    #[arg(long)]
    measure: Option<String>,
    /// Results CSV; the temporal series goes next to it.
    #[arg(long)]
    out: Option<PathBuf>,
    #[command(flatten)]
    overrides: Overrides,
}

#[derive(Args)]
struct BenchArgs {
    /// Comma-separated generator names.
    #[arg(long, value_delimiter = ',', required = true)]
    generators: Vec<String>,
    /// Comma-separated seeds.
    #[arg(long, value_delimiter = ',', default_value = "1")]
    seeds: Vec<u64>,
    /// Comma-separated methods: dyned, ht.
    #[arg(long, value_delimiter = ',', default_value = "dyned")]
    methods: Vec<String>,
    /// Comma-separated similarity measures used by dyned cells.
    #[arg(long, value_delimiter = ',', default_value = "df")]
    measures: Vec<String>,
    #[arg(long)]
    out: PathBuf,
    #[command(flatten)]
    overrides: Overrides,
}

#[derive(Args)]
struct StatsArgs {
    /// Results CSV.
    #[arg(long = "in")]
    input: PathBuf,
    #[arg(long, default_value_t = 0.05)]
    alpha: f64,
    /// Write the rank table as CSV.
    #[arg(long)]
    out: Option<PathBuf>,
}

struct Failure {
    code: u8,
    message: String,
}

impl Failure {
    fn usage(message: String) -> Self {
        Self { code: 2, message }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = match e {
            Error::Config(_) => 2,
            _ => 1,
        };
        Self {
            code,
            message: e.to_string(),
        }
    }
}

fn run(args: RunArgs) -> Result<(), Failure> {
    let mut settings = args.overrides.settings()?;
    if args.generator.is_some() || args.dataset.is_some() {
        settings.remove("generator");
        settings.remove("dataset");
    }
    let dataset = args.dataset.as_ref().map(|p| p.display().to_string());
    let flags = [
        ("generator", args.generator.as_ref()),
        ("dataset", dataset.as_ref()),
        ("label-column", args.label_column.as_ref()),
        ("seed", args.seed.as_ref()),
        ("method", args.method.as_ref()),
        ("measure", args.measure.as_ref()),
    ];
    for (key, value) in flags {
        if let Some(v) = value {
            settings.insert(key.to_string(), v.clone());
        }
    }
    if args.header {
        settings.insert("header".into(), "true".into());
    }
    if let Some(out) = &args.out {
        settings.insert("out".into(), out.display().to_string());
    }
    let config = ExperimentConfig::from_settings(&settings)?;
    let report = run_experiment(&config)?;
    let row = result_row(&config, &report);
    println!(
        "{} {} seed={} samples={} accuracy={:.4} drifts={} selections={}",
        row.dataset,
        row.method,
        row.seed,
        row.samples,
        row.accuracy * 100.0,
        row.drifts,
        report.selection_events.len()
    );
    if let Some(out) = &config.output {
        write_results(out, &[row], Some(&report))?;
        log::info!("wrote {} and {}", out.display(), temporal_path(out).display());
    }
    Ok(())
}

fn bench(args: BenchArgs) -> Result<(), Failure> {
    let base = args.overrides.settings()?;
    let mut cells = Vec::new();
    for generator in &args.generators {
        for method in &args.methods {
            let method: Method = method.parse()?;
            let measures: Vec<Option<&String>> = match method {
                Method::DynEd => args.measures.iter().map(Some).collect(),
                Method::HoeffdingTree => vec![None],
            };
            for measure in measures {
                for seed in &args.seeds {
                    let mut s = base.clone();
                    s.remove("dataset");
                    s.insert("generator".into(), generator.clone());
                    s.insert("method".into(), method.to_string());
                    s.insert("seed".into(), seed.to_string());
                    if let Some(m) = measure {
                        m.parse::<MeasureKind>()?;
                        s.insert("measure".into(), m.clone());
                    }
                    cells.push(ExperimentConfig::from_settings(&s)?);
                }
            }
        }
    }

    let workers = std::env::var(WORKERS_ENV)
        .ok()
        .map(|v| {
            v.parse::<usize>()
                .map_err(|_| Failure::usage(format!("{WORKERS_ENV} must be a positive integer, got {v:?}")))
        })
        .transpose()?
        .unwrap_or(0);
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .map_err(|e| Failure::usage(e.to_string()))?;
    let outcomes: Vec<Result<ResultRow, Error>> = pool.install(|| {
        cells
            .par_iter()
            .map(|config| {
                let report = run_experiment(config)?;
                let row = result_row(config, &report);
                eprintln!(
                    "{} {} seed={} accuracy={:.4}",
                    row.dataset,
                    row.method,
                    row.seed,
                    row.accuracy * 100.0
                );
                Ok(row)
            })
            .collect()
    });
    let rows = outcomes.into_iter().collect::<Result<Vec<_>, _>>()?;
    write_results(&args.out, &rows, None)?;
    print!("{}", rank_table(&rows)?.render());
    Ok(())
}

fn stats(args: StatsArgs) -> Result<(), Failure> {
    let rows = read_results(&args.input)?;
    let table = rank_table(&rows)?;
    print!("{}", table.render());
    println!();
    if table.methods.len() >= 2 && table.datasets.len() >= 2 {
        let fnm = friedman_nemenyi(&table.accuracy, args.alpha)?;
        println!("average ranks:");
        for (m, r) in table.methods.iter().zip(&fnm.average_ranks) {
            println!("  {m}: {r:.4}");
        }
        println!(
            "Friedman chi-square = {:.4} (k = {}, N = {})",
            fnm.chi_square, fnm.n_methods, fnm.n_datasets
        );
        println!("CD = {:.4} (alpha = {})", fnm.critical_distance, args.alpha);
    } else {
        println!("critical distance needs at least 2 methods and 2 datasets");
    }
    if let Some(out) = &args.out {
        std::fs::write(out, table.to_csv()).map_err(|e| Failure::from(Error::Io {
            path: out.clone(),
            source: e,
        }))?;
    }
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    let outcome = match cli.command {
        Command::Run(a) => run(a),
        Command::Bench(a) => bench(a),
        Command::Stats(a) => stats(a),
    };
    match outcome {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}
