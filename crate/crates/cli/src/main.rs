use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use lpvident_core::analysis::{self, AnalysisConfig, Budgets, ModeKind, OutputFormat, Report};
use lpvident_core::identifiability::EngineRegistry;
use lpvident_core::model::{parse_model_with_diagnostics, LpvModel, ModelError};
use lpvident_core::stacking::DEFAULT_MAX_COLUMNS;

/// Structural identifiability of LPV and quasi-LPV state-space models.
#[derive(Parser)]
#[command(name = "lpvident", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Order sweep and Gröbner (or selected engine) classification.
    Analyze(Common),
    /// Order sweep with the Jacobian rank test only.
    Local(Common),
    /// Stack, null-space, Ψ and Π at one order.
    Iop {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        order: u32,
    },
    /// Back-substitution, exact trajectories and witnesses.
    Verify(Common),
}

#[derive(Clone, Copy, ValueEnum)]
enum Method {
    Groebner,
    Jacobian,
    Both,
}

#[derive(Clone, Copy, ValueEnum)]
enum ModeArg {
    Numeric,
    Symbolic,
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Text,
    Json,
}

#[derive(Args)]
struct Common {
    model: PathBuf,
    /// Highest derivative/shift order; defaults to the state count.
    #[arg(long, value_parser = clap::value_parser!(u32).range(1..))]
    max_order: Option<u32>,
    #[arg(long, value_enum, default_value = "groebner")]
    method: Method,
    #[arg(long, value_enum, default_value = "numeric")]
    mode: ModeArg,
    #[arg(long, default_value_t = 5, value_parser = clap::value_parser!(u32).range(1..))]
    trials: u32,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, value_enum, default_value = "text")]
    format: Format,
    /// S-pair cap for Buchberger.
    #[arg(long, default_value_t = Budgets::default().max_pairs)]
    max_pairs: usize,
    /// Degree cap for new basis elements.
    #[arg(long, default_value_t = Budgets::default().max_degree)]
    max_degree: u32,
    /// Cap on stacked state columns, (w+1)·n.
    #[arg(long, default_value_t = DEFAULT_MAX_COLUMNS)]
    max_columns: usize,
    /// Record per-stage wall-clock times (makes output nondeterministic).
    #[arg(long)]
    timings: bool,
}

impl Common {
    fn config(&self) -> AnalysisConfig {
        AnalysisConfig {
            max_order: self.max_order,
            method: match self.method {
                Method::Groebner => "groebner",
                Method::Jacobian => "jacobian",
                Method::Both => "both",
            }
            .into(),
            mode: match self.mode {
                ModeArg::Numeric => ModeKind::Numeric,
                ModeArg::Symbolic => ModeKind::Symbolic,
            },
            trials: self.trials,
            seed: self.seed,
            format: match self.format {
                Format::Text => OutputFormat::Text,
                Format::Json => OutputFormat::Json,
            },
            budgets: Budgets { max_pairs: self.max_pairs, max_degree: self.max_degree, max_columns: self.max_columns },
            timings: self.timings,
        }
    }
}

fn load(path: &Path) -> Result<LpvModel, String> {
    let source = std::fs::read_to_string(path).map_err(|e| format!("{}: {e}", path.display()))?;
    match parse_model_with_diagnostics(&source) {
        Ok((model, warnings)) => {
            for w in warnings {
                eprintln!("{}:{}:{}: warning: {}", path.display(), w.line, w.column, w.message);
            }
            Ok(model)
        }
        Err(e) => Err(describe(path, &e)),
    }
}

fn describe(path: &Path, e: &ModelError) -> String {
    let d = e.diagnostic();
    format!("{}:{}:{}: error: {}", path.display(), d.line, d.column, d.message)
}

fn emit(report: &Report, format: OutputFormat) {
    match format {
        OutputFormat::Text => print!("{}", report.render_text()),
        OutputFormat::Json => println!("{}", report.to_json()),
    }
}

/// 2 when a size budget blocked the verdict, 1 when verification failed.
fn status_code(report: &Report, check_verifier: bool) -> ExitCode {
    if report.verdict.budget_exceeded {
        ExitCode::from(2)
    } else if check_verifier && !report.verifier.passed() {
        ExitCode::from(1)
    } else {
        ExitCode::SUCCESS
    }
}

fn run(cli: Cli) -> Result<ExitCode, String> {
    let registry = EngineRegistry::builtin();
    match cli.command {
        Command::Analyze(c) => {
            let model = load(&c.model)?;
            let config = c.config();
            let report = analysis::analyze(&model, &config, &registry).map_err(|e| e.to_string())?;
            emit(&report, config.format);
            Ok(status_code(&report, false))
        }
        Command::Local(c) => {
            let model = load(&c.model)?;
            let config = c.config();
            let report = analysis::local(&model, &config, &registry).map_err(|e| e.to_string())?;
            emit(&report, config.format);
            Ok(status_code(&report, false))
        }
        Command::Verify(c) => {
            let model = load(&c.model)?;
            let config = c.config();
            let report = analysis::verify(&model, &config, &registry).map_err(|e| e.to_string())?;
            emit(&report, config.format);
            Ok(status_code(&report, true))
        }
        Command::Iop { common, order } => {
            let model = load(&common.model)?;
            let dump = analysis::iop_dump(&model, order, common.max_columns).map_err(|e| e.to_string())?;
            match common.format {
                Format::Text => print!("{}", dump.render_text()),
                Format::Json => println!("{}", dump.to_json()),
            }
            Ok(ExitCode::SUCCESS)
        }
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(code) => code,
        Err(msg) => {
            eprintln!("{msg}");
            ExitCode::from(1)
        }
    }
}
