use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use hetmeta::cli_io::{self, ExampleName, InputFile, ReportDocument};
use hetmeta::sim::{self, SimConfig};
use hetmeta::{EffectSizeKind, Error, SmdMethod};

#[derive(Parser)]
#[command(name = "hetmeta", version, about = "Heterogeneity statistics for meta-analysis")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum Kind {
    Mean,
    Md,
    Smd,
}

#[derive(Clone, Copy, ValueEnum)]
enum Method {
    Hedges,
    Cohen,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Table,
    Json,
    Csv,
}

#[derive(Clone, Copy, ValueEnum)]
enum Example {
    JeongMean,
    AveryMd,
    AverySmd,
    Motivating,
}

#[derive(Subcommand)]
enum Command {
    /// Analyse a CSV of study summaries.
    Analyze {
        input: PathBuf,
        #[arg(long, value_enum)]
        kind: Kind,
        #[arg(long, value_enum, default_value = "hedges")]
        smd_method: Method,
        #[arg(long, value_enum, default_value = "table")]
        format: Format,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run a Monte Carlo scenario described by a TOML file.
    Simulate {
        config: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
        /// Overrides the seed in the config file.
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        threads: Option<usize>,
        #[arg(long, value_enum, default_value = "csv")]
        format: Format,
    },
    /// Recompute a built-in analysis and compare it with published values.
    Example {
        #[arg(value_enum)]
        name: Example,
        #[arg(long, value_enum, default_value = "table")]
        format: Format,
    },
}

enum Failure {
    Input(Error),
    Compute(Error),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e.root() {
            Error::DegenerateWeights { .. }
            | Error::InvalidStatistic { .. }
            | Error::InvalidAdjustedSize { .. }
            | Error::DegenerateVariance
            | Error::InvalidEffect { .. } => Failure::Compute(e),
            _ => Failure::Input(e),
        }
    }
}

fn emit(out: Option<&Path>, text: &str) -> Result<(), Failure> {
    match out {
        Some(path) => std::fs::write(path, text).map_err(|e| {
            Failure::Input(Error::Io {
                path: path.display().to_string(),
                message: e.to_string(),
            })
        }),
        None => {
            let mut stdout = std::io::stdout().lock();
            // a closed pipe is not worth an error exit
            let _ = stdout.write_all(text.as_bytes());
            Ok(())
        }
    }
}

fn analyze(
    input: &Path,
    kind: Kind,
    method: Method,
    format: Format,
    out: Option<&Path>,
) -> Result<(), Failure> {
    let kind = match kind {
        Kind::Mean => EffectSizeKind::Mean,
        Kind::Md => EffectSizeKind::MeanDifference,
        Kind::Smd => EffectSizeKind::StandardizedMeanDifference,
    };
    let method = match method {
        Method::Hedges => SmdMethod::HedgesG,
        Method::Cohen => SmdMethod::CohensD,
    };
    let file = InputFile::load(input).map_err(Failure::Input)?;
    let doc = ReportDocument::analyze(&file, kind, method)?;
    let text = match format {
        Format::Table => doc.to_table(),
        Format::Json => doc.to_json() + "\n",
        Format::Csv => doc.to_csv(),
    };
    emit(out, &text)
}

fn simulate(
    path: &Path,
    out: Option<&Path>,
    seed: Option<u64>,
    threads: Option<usize>,
    format: Format,
) -> Result<(), Failure> {
    let text = std::fs::read_to_string(path).map_err(|e| {
        Failure::Input(Error::Io {
            path: path.display().to_string(),
            message: e.to_string(),
        })
    })?;
    let mut config = SimConfig::from_toml_str(&text).map_err(Failure::Input)?;
    if let Some(seed) = seed {
        config.seed = seed;
    }
    let results = sim::with_threads(threads, || sim::run_monte_carlo(&config))
        .map_err(Failure::Input)??;
    let text = match format {
        Format::Csv | Format::Table => cli_io::simulation_csv(&results),
        Format::Json => {
            let points: Vec<_> = results
                .iter()
                .map(|r| {
                    serde_json::json!({
                        "n_base": r.n_base,
                        "icc_ma_true": r.icc_ma_true,
                        "summaries": r.summaries,
                    })
                })
                .collect();
            let doc = serde_json::json!({ "config": config, "points": points });
            serde_json::to_string_pretty(&doc).expect("results serialize") + "\n"
        }
    };
    emit(out, &text)
}

fn example(name: Example, format: Format) -> Result<bool, Failure> {
    let name = match name {
        Example::JeongMean => ExampleName::JeongMean,
        Example::AveryMd => ExampleName::AveryMd,
        Example::AverySmd => ExampleName::AverySmd,
        Example::Motivating => ExampleName::Motivating,
    };
    let report = cli_io::run_example(name)?;
    let text = match format {
        Format::Json => serde_json::to_string_pretty(&report).expect("report serializes") + "\n",
        Format::Csv => {
            let mut s = String::from("statistic,reported,computed,tolerance,headline,pass\n");
            for c in &report.checks {
                s += &format!(
                    "{},{},{},{},{},{}\n",
                    c.name, c.reported, c.computed, c.tolerance, c.headline, c.pass
                );
            }
            s
        }
        Format::Table => report.to_table(),
    };
    emit(None, &text)?;
    Ok(report.headline_pass())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Analyze {
            input,
            kind,
            smd_method,
            format,
            out,
        } => analyze(&input, kind, smd_method, format, out.as_deref()).map(|_| true),
        Command::Simulate {
            config,
            out,
            seed,
            threads,
            format,
        } => simulate(&config, out.as_deref(), seed, threads, format).map(|_| true),
        Command::Example { name, format } => example(name, format),
    };
    match result {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(3),
        Err(Failure::Input(e)) => {
            eprintln!("error[{}]: {e}", e.code());
            ExitCode::from(2)
        }
        Err(Failure::Compute(e)) => {
            eprintln!("error[{}]: {e}", e.code());
            ExitCode::from(3)
        }
    }
}
