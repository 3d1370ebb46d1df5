use std::fs;
use std::io::{self, Write as _};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use ownbm::generators::{GeneratorConfig, GeneratorKind};
use ownbm::oracle::{self, OracleConfig};
use ownbm::{
    format, validate_matching, validate_semi_matching, validate_three_matching, Matching, SemiMatching,
    ThreeMatching, ValidationReport,
};
use ownbm_harness::{
    aggregate, load_instance, read_report, read_rows, render_table, run_experiment, ExperimentConfig,
    HarnessError, PipelineChoice, Source, REPORT_FILE, TRIALS_FILE,
};

/// Online windowed bipartite matching: generators, pipelines, oracle and
/// experiment runner.
#[derive(Parser)]
#[command(name = "ownbm", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Write generated instances.
    Generate(GenerateArgs),
    /// Run seeded trials against the offline optimum.
    Run(RunArgs),
    /// Print the offline optimum of one instance as JSON.
    Oracle(OracleArgs),
    /// Check an instance and, optionally, structures on it.
    Validate(ValidateArgs),
    /// Render tables from stored reports.
    Report(ReportArgs),
}

#[derive(Args)]
struct GenerateArgs {
    /// Generator spec, e.g. `random:n=8,d=2,p=0.5,mode=edge,weights=int:1:10,seed=3`.
    #[arg(long = "gen", value_parser = parse_gen)]
    spec: GeneratorConfig,
    /// Number of instances; instance k uses seed + k.
    #[arg(long, default_value_t = 1)]
    count: u64,
    /// Output directory. Without it a single instance goes to stdout.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct RunArgs {
    #[arg(long = "instance")]
    instances: Vec<PathBuf>,
    #[arg(long = "gen", value_parser = parse_gen)]
    gens: Vec<GeneratorConfig>,
    #[arg(long, default_value = "both", value_parser = parse_pipeline)]
    pipeline: PipelineChoice,
    #[arg(long, default_value_t = 1000, value_parser = clap::value_parser!(u64).range(1..))]
    trials: u64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Directory for report.json and trials.csv.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Exit 1 on any validation failure, deadline violation or floor breach.
    #[arg(long)]
    strict: bool,
}

#[derive(Clone, Copy, ValueEnum)]
enum MethodArg {
    Auto,
    Exhaustive,
    Bnb,
}

#[derive(Args)]
struct OracleArgs {
    #[arg(required_unless_present = "spec", conflicts_with = "spec")]
    instance: Option<PathBuf>,
    #[arg(long = "gen", value_parser = parse_gen)]
    spec: Option<GeneratorConfig>,
    #[arg(long, value_enum, default_value = "auto")]
    method: MethodArg,
    /// Largest edge count exhaustive search accepts.
    #[arg(long)]
    cap: Option<usize>,
}

#[derive(Args)]
struct ValidateArgs {
    instance: PathBuf,
    #[arg(long)]
    semi: Option<PathBuf>,
    #[arg(long)]
    matching: Option<PathBuf>,
    #[arg(long)]
    three: Option<PathBuf>,
}

#[derive(Args)]
struct ReportArgs {
    /// Report files or the directories `run --out` wrote.
    #[arg(required = true)]
    paths: Vec<PathBuf>,
}

fn parse_gen(s: &str) -> Result<GeneratorConfig, String> {
    s.parse().map_err(|e| format!("{e}"))
}

fn parse_pipeline(s: &str) -> Result<PipelineChoice, String> {
    s.parse()
}

enum Failure {
    Harness(HarnessError),
    Invalid(String),
}

impl From<HarnessError> for Failure {
    fn from(e: HarnessError) -> Self {
        Failure::Harness(e)
    }
}

fn io_err(path: &Path) -> impl FnOnce(io::Error) -> HarnessError + '_ {
    move |source| HarnessError::Io {
        path: path.to_owned(),
        source,
    }
}

fn generate(args: GenerateArgs) -> Result<(), Failure> {
    let mut cfg = args.spec;
    let Some(dir) = args.out else {
        if args.count != 1 {
            return Err(Failure::Invalid("--count above 1 needs --out".into()));
        }
        print!("{}", format::serialize(&cfg.generate().map_err(HarnessError::from)?));
        return Ok(());
    };
    fs::create_dir_all(&dir).map_err(io_err(&dir))?;
    let kind = match &cfg.kind {
        GeneratorKind::Random { .. } => "random".to_owned(),
        GeneratorKind::Geometric { .. } => "geometric".to_owned(),
        GeneratorKind::Adversarial { name, .. } => name.clone(),
    };
    let base = cfg.seed;
    for k in 0..args.count {
        cfg.seed = base.wrapping_add(k);
        let inst = cfg.generate().map_err(HarnessError::from)?;
        let path = dir.join(format!("{kind}-{}.json", cfg.seed));
        fs::write(&path, format::serialize(&inst)).map_err(io_err(&path))?;
        println!("{}", path.display());
    }
    Ok(())
}

fn run(args: RunArgs) -> Result<(), Failure> {
    let sources: Vec<Source> = args
        .instances
        .into_iter()
        .map(Source::File)
        .chain(args.gens.into_iter().map(Source::Gen))
        .collect();
    let mut cfg = ExperimentConfig::new(sources, args.pipeline, args.trials, args.seed);
    cfg.strict = args.strict;
    let report = run_experiment(&cfg)?;
    if let Some(dir) = &args.out {
        report.write_to(dir)?;
    }
    print!("{}", render_table(&report));
    for line in report.breaches() {
        eprintln!("warning: {line}");
    }
    Ok(())
}

fn oracle_cmd(args: OracleArgs) -> Result<(), Failure> {
    let inst = match (&args.instance, args.spec) {
        (Some(path), _) => load_instance(path)?,
        (None, Some(spec)) => spec.generate().map_err(HarnessError::from)?,
        (None, None) => unreachable!("clap requires one source"),
    };
    let mut cfg = match args.method {
        MethodArg::Auto => OracleConfig::auto(),
        MethodArg::Exhaustive => OracleConfig::default(),
        MethodArg::Bnb => OracleConfig::branch_and_bound(),
    };
    if let Some(cap) = args.cap {
        cfg.exhaustive_cap = cap;
    }
    let result = oracle::opt(&inst, &cfg).map_err(|source| HarnessError::Oracle {
        id: args.instance.as_ref().map_or("generated".into(), |p| p.display().to_string()),
        source,
    })?;
    println!("{}", serde_json::to_string_pretty(&result.to_json()).map_err(HarnessError::from)?);
    Ok(())
}

fn read_json<T: serde::de::DeserializeOwned>(path: &Path) -> Result<T, Failure> {
    let text = fs::read_to_string(path).map_err(io_err(path))?;
    serde_json::from_str(&text).map_err(|e| Failure::Invalid(format!("{}: {e}", path.display())))
}

fn validate(args: ValidateArgs) -> Result<(), Failure> {
    let inst = match load_instance(&args.instance) {
        Ok(inst) => inst,
        Err(HarnessError::Parse { path, source }) => {
            return Err(Failure::Invalid(format!("{}:\n{source}", path.display())));
        }
        Err(e) => return Err(e.into()),
    };
    let graph = inst.index().map_err(|e| Failure::Invalid(e.to_string()))?;
    let mut reports: Vec<(&str, ValidationReport)> = Vec::new();
    if let Some(p) = &args.semi {
        reports.push(("semi-matching", validate_semi_matching(&graph, &read_json::<SemiMatching>(p)?)));
    }
    if let Some(p) = &args.matching {
        reports.push(("matching", validate_matching(&graph, &read_json::<Matching>(p)?)));
    }
    if let Some(p) = &args.three {
        reports.push(("3-matching", validate_three_matching(&graph, &read_json::<ThreeMatching>(p)?)));
    }
    let failed: Vec<String> = reports
        .iter()
        .filter(|(_, r)| !r.is_ok())
        .map(|(name, r)| format!("{name}:\n{r}"))
        .collect();
    if !failed.is_empty() {
        return Err(Failure::Invalid(failed.join("\n")));
    }
    println!("ok: n={} d={} mode={} edges={}", inst.n, inst.d, inst.mode, inst.edges.len());
    Ok(())
}

fn report(args: ReportArgs) -> Result<(), Failure> {
    let mut out = io::stdout().lock();
    for path in &args.paths {
        let (report_path, csv_path) = if path.is_dir() {
            (path.join(REPORT_FILE), Some(path.join(TRIALS_FILE)))
        } else {
            (path.clone(), path.parent().map(|d| d.join(TRIALS_FILE)))
        };
        let report = read_report(&report_path)?;
        let _ = writeln!(out, "{}", report_path.display());
        let _ = write!(out, "{}", render_table(&report));
        // cross-check aggregates against the stored rows when they are present
        if let Some(csv_path) = csv_path.filter(|p| p.exists()) {
            let rows = read_rows(&csv_path)?;
            for unit in &report.units {
                let mine: Vec<_> = rows.iter().filter(|r| r.instance_id == unit.instance_id).cloned().collect();
                if mine.len() as u64 != unit.trials || aggregate(&mine) != unit.aggregate {
                    return Err(Failure::Invalid(format!(
                        "{}: aggregates for {} do not match {}",
                        report_path.display(),
                        unit.instance_id,
                        csv_path.display()
                    )));
                }
            }
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Generate(a) => generate(a),
        Command::Run(a) => run(a),
        Command::Oracle(a) => oracle_cmd(a),
        Command::Validate(a) => validate(a),
        Command::Report(a) => report(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Harness(e)) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
        Err(Failure::Invalid(msg)) => {
            eprintln!("{msg}");
            ExitCode::from(1)
        }
    }
}
