use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use learnlab::classes::ClassSpec;
use learnlab::Loss;
use serde_json::Value;

use learnlab_cli::config::{
    read_file, read_json_arg, write_file, ComplexityKind, EstimationMode, Estimator, ExperimentConfig, ProcessSpec,
    RegretOptions, RuleSpec, SamplePoint, Task,
};
use learnlab_cli::run::{run, simulate, to_pretty};
use learnlab_cli::verify::{run_suite, VerifyOptions};
use learnlab_cli::{plot, CliError, CliResult};

/// Finite learning-theory experiments: dimensions, complexities, processes,
/// learning rules and regret estimates.
#[derive(Debug, Parser)]
#[command(name = "learnlab", version)]
struct Cli {
    /// Write the result here instead of stdout.
    #[arg(long, short, global = true)]
    output: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, clap::Args)]
struct Common {
    /// Class spec: inline JSON or a file.
    #[arg(long)]
    class: String,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Combinatorial dimension of a class.
    Dims {
        #[command(flatten)]
        common: Common,
        /// vc, ldim, fat or sfat.
        #[arg(long)]
        kind: String,
        #[arg(long)]
        gamma: Option<f64>,
        #[arg(long)]
        witness: bool,
    },
    /// Rademacher or sequential Rademacher complexity.
    Complexity {
        #[command(flatten)]
        common: Common,
        #[arg(long, value_enum)]
        kind: KindArg,
        #[arg(long)]
        n: Option<usize>,
        /// Needed for seqrad-loss.
        #[arg(long)]
        loss: Option<String>,
        /// Comma-separated domain indices for a fixed-sample value.
        #[arg(long, value_delimiter = ',')]
        sample: Option<Vec<usize>>,
        /// Tree as JSON (inline or file) mapping sign paths to points.
        #[arg(long)]
        tree: Option<String>,
        #[arg(long, value_enum, default_value = "auto")]
        mode: ModeArg,
        #[arg(long)]
        reps: Option<usize>,
        #[arg(long)]
        state_budget: Option<usize>,
    },
    /// Sample one path from a process.
    Simulate {
        #[command(flatten)]
        common: Common,
        /// Process spec: inline JSON or a file.
        #[arg(long)]
        process: String,
        #[arg(long)]
        n: Option<usize>,
        /// Emit the path as CSV instead of JSON.
        #[arg(long)]
        csv: bool,
    },
    /// Fit a rule to a sample.
    Learn {
        #[command(flatten)]
        common: Common,
        /// erm, hedge, ftl or a rule JSON object.
        #[arg(long)]
        rule: String,
        #[arg(long)]
        loss: String,
        /// Sample as JSON: [{"x": "1", "y": -1}, ...].
        #[arg(long)]
        sample: String,
    },
    /// Estimate a regret functional.
    Regret {
        #[command(flatten)]
        common: Common,
        #[arg(long, value_enum)]
        estimator: EstimatorArg,
        #[arg(long)]
        process: Option<String>,
        #[arg(long)]
        rule: Option<String>,
        #[arg(long)]
        loss: Option<String>,
        #[arg(long)]
        n: Option<usize>,
        #[arg(long)]
        reps: Option<usize>,
        #[arg(long)]
        keep_values: bool,
    },
    /// Run an experiment config file.
    Run {
        config: PathBuf,
    },
    /// Run built-in verification suites; exits 1 if any check fails.
    Verify {
        /// Suite name or "all".
        #[arg(long, default_value = "all")]
        suite: String,
        #[arg(long, default_value_t = 20_240_601)]
        seed: u64,
        /// Multiplier on the default replicate counts.
        #[arg(long, default_value_t = 1.0)]
        scale: f64,
    },
    /// Collect result files into tidy CSV.
    PlotData {
        /// Plot kind, e.g. regret-vs-n.
        #[arg(long)]
        kind: String,
        inputs: Vec<PathBuf>,
    },
}

#[derive(Debug, Clone, Copy, clap::ValueEnum)]
enum KindArg {
    Rad,
    Seqrad,
    SeqradLoss,
}

#[derive(Debug, Clone, Copy, clap::ValueEnum)]
enum ModeArg {
    Auto,
    Exact,
    Mc,
}

#[derive(Debug, Clone, Copy, clap::ValueEnum)]
enum EstimatorArg {
    Gen,
    Iid,
    Preq,
    Online,
    Umlln,
    Decomp,
    StationaryGap,
    MixtureArgmin,
    AdversarialRisk,
    RegressionRisk,
    RandomLevel,
}

impl From<EstimatorArg> for Estimator {
    fn from(e: EstimatorArg) -> Self {
        match e {
            EstimatorArg::Gen => Estimator::Gen,
            EstimatorArg::Iid => Estimator::Iid,
            EstimatorArg::Preq => Estimator::Preq,
            EstimatorArg::Online => Estimator::Online,
            EstimatorArg::Umlln => Estimator::Umlln,
            EstimatorArg::Decomp => Estimator::Decomp,
            EstimatorArg::StationaryGap => Estimator::StationaryGap,
            EstimatorArg::MixtureArgmin => Estimator::MixtureArgmin,
            EstimatorArg::AdversarialRisk => Estimator::AdversarialRisk,
            EstimatorArg::RegressionRisk => Estimator::RegressionRisk,
            EstimatorArg::RandomLevel => Estimator::RandomLevel,
        }
    }
}

fn base_config(task: Task, common: &Common) -> CliResult<ExperimentConfig> {
    let mut config = ExperimentConfig::new(task, common.seed);
    config.class = Some(read_json_arg::<ClassSpec>(&common.class)?);
    Ok(config)
}

fn parse_loss(s: Option<&str>) -> CliResult<Option<Loss>> {
    s.map(|s| Loss::parse(s).map_err(CliError::from)).transpose()
}

fn configure_threads() -> CliResult<()> {
    let Ok(raw) = std::env::var("LEARNLAB_THREADS") else {
        return Ok(());
    };
    let threads: usize = raw
        .trim()
        .parse()
        .ok()
        .filter(|&t| t >= 1)
        .ok_or_else(|| CliError::usage(format!("LEARNLAB_THREADS must be a positive integer, got {raw:?}")))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build_global()
        .map_err(|e| CliError::usage(e.to_string()))
}

fn emit(output: Option<&PathBuf>, text: &str) -> CliResult<()> {
    match output {
        Some(path) => write_file(path, text),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn execute(cli: Cli) -> CliResult<()> {
    configure_threads()?;
    let output = cli.output.as_ref();
    let config = match cli.command {
        Command::Dims {
            common,
            kind,
            gamma,
            witness,
        } => base_config(Task::Dims { kind, gamma, witness }, &common)?,
        Command::Complexity {
            common,
            kind,
            n,
            loss,
            sample,
            tree,
            mode,
            reps,
            state_budget,
        } => {
            let kind = match kind {
                KindArg::Rad => ComplexityKind::Rad,
                KindArg::Seqrad => ComplexityKind::Seqrad,
                KindArg::SeqradLoss => ComplexityKind::SeqradLoss,
            };
            let mode = match mode {
                ModeArg::Auto => EstimationMode::Auto,
                ModeArg::Exact => EstimationMode::Exact,
                ModeArg::Mc => EstimationMode::Mc,
            };
            let tree = tree.map(|t| read_json_arg(&t)).transpose()?;
            let mut config = base_config(
                Task::Complexity {
                    kind,
                    sample,
                    tree,
                    mode,
                    state_budget,
                },
                &common,
            )?;
            config.n = n;
            config.loss = parse_loss(loss.as_deref())?;
            config.reps = reps;
            config
        }
        Command::Simulate {
            common,
            process,
            n,
            csv,
        } => {
            let mut config = base_config(Task::Simulate, &common)?;
            config.process = Some(read_json_arg::<ProcessSpec>(&process)?);
            config.n = n;
            if csv {
                let (_, text) = simulate(&config)?;
                return emit(output, &text);
            }
            config
        }
        Command::Learn {
            common,
            rule,
            loss,
            sample,
        } => {
            let sample: Vec<SamplePoint> = read_json_arg(&sample)?;
            let mut config = base_config(Task::Learn { sample }, &common)?;
            config.rule = Some(RuleSpec::parse(&rule)?);
            config.loss = parse_loss(Some(&loss))?;
            config
        }
        Command::Regret {
            common,
            estimator,
            process,
            rule,
            loss,
            n,
            reps,
            keep_values,
        } => {
            let options = RegretOptions {
                keep_values,
                ..RegretOptions::default()
            };
            let mut config = base_config(
                Task::Regret {
                    estimator: estimator.into(),
                    options,
                },
                &common,
            )?;
            config.process = process.map(|p| read_json_arg::<ProcessSpec>(&p)).transpose()?;
            config.rule = rule.map(|r| RuleSpec::parse(&r)).transpose()?;
            config.loss = parse_loss(loss.as_deref())?;
            config.n = n;
            config.reps = reps;
            config
        }
        Command::Run { config } => {
            let mut config = ExperimentConfig::from_json(&read_file(&config)?)?;
            if output.is_none() {
                if let Some(path) = config.output.take() {
                    let doc = run(&config)?;
                    config.output = Some(path.clone());
                    return write_file(&path, &to_pretty(&doc)?);
                }
            }
            config
        }
        Command::Verify { suite, seed, scale } => {
            if !(scale > 0.0 && scale.is_finite()) {
                return Err(CliError::usage("--scale must be positive"));
            }
            let reports = run_suite(&suite, VerifyOptions { seed, scale })?;
            let text = to_pretty(&serde_json::to_value(&reports)?)?;
            emit(output, &text)?;
            for r in &reports {
                for c in &r.checks {
                    eprintln!(
                        "{} {} / {}: measured {} threshold {}",
                        if c.pass { "PASS" } else { "FAIL" },
                        r.suite,
                        c.name,
                        c.measured,
                        c.threshold
                    );
                }
            }
            let failed: Vec<&str> = reports.iter().filter(|r| !r.pass).map(|r| r.suite.as_str()).collect();
            if !failed.is_empty() {
                return Err(CliError::Verification(failed.join(", ")));
            }
            return Ok(());
        }
        Command::PlotData { kind, inputs } => {
            let docs = inputs
                .iter()
                .map(|p| {
                    let doc: Value = serde_json::from_str(&read_file(p)?)
                        .map_err(|e| CliError::usage(format!("{}: {e}", p.display())))?;
                    Ok((p.display().to_string(), doc))
                })
                .collect::<CliResult<Vec<_>>>()?;
            return emit(output, &plot::plot_data(&kind, &docs)?);
        }
    };
    emit(output, &to_pretty(&run(&config)?)?)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match execute(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("learnlab: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
