use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use jetforms_cli::{load_model, run_report, AnalysisRequest, Format, ReportOptions};

/// Symbolic analysis of balance systems on (partial) jet bundles.
#[derive(Parser)]
#[command(name = "jetforms", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(clap::Args)]
struct CommonArgs {
    /// Model file
    model: PathBuf,
    /// Output format
    #[arg(long, default_value = "text", value_parser = parse_format)]
    format: Format,
    /// Seed for sampled checks (recorded in the report header)
    #[arg(long, default_value_t = jetforms_core::expr::DEFAULT_EQUALITY_SEED)]
    seed: u64,
    /// Sample count for sign checks
    #[arg(long, default_value_t = 10_000)]
    samples: usize,
    /// Write the report to a file instead of stdout
    #[arg(long)]
    out: Option<PathBuf>,
}

fn parse_format(s: &str) -> Result<Format, String> {
    match s {
        "text" => Ok(Format::Text),
        "latex" => Ok(Format::Latex),
        other => Err(format!("unknown format `{}` (expected text|latex)", other)),
    }
}

#[derive(Subcommand)]
enum Command {
    /// Run the analyses requested in the model file (or via --analyses)
    Report {
        #[command(flatten)]
        common: CommonArgs,
        /// Comma-separated analyses overriding the model file, e.g.
        /// "balance,noether(xt)"
        #[arg(long)]
        analyses: Option<String>,
    },
    /// Print the balance system
    Balance(CommonArgs),
    /// Local variationality test
    Helmholtz(CommonArgs),
    /// Lepage test with associated-Lagrangian recovery
    Lepage(CommonArgs),
    /// Legendre coordinates and regularity
    Legendre(CommonArgs),
    /// Symmetry determining equations for the declared vector fields
    Symmetry(CommonArgs),
    /// Noether balance laws for the declared vector fields
    Noether(CommonArgs),
    /// Energy-momentum tensor and balance laws
    #[command(name = "energy-momentum")]
    EnergyMomentum(CommonArgs),
    /// Gauge balance laws for the declared vertical fields
    Gauge(CommonArgs),
    /// Verify the declared secondary-law candidate
    Secondary(CommonArgs),
    /// Built-in Cattaneo heat-propagation analysis (needs no model file)
    Cattaneo {
        #[arg(long, default_value = "text", value_parser = parse_format)]
        format: Format,
        #[arg(long, default_value_t = jetforms_core::expr::DEFAULT_EQUALITY_SEED)]
        seed: u64,
        #[arg(long, default_value_t = 10_000)]
        samples: usize,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn run_single(common: &CommonArgs, analysis: &str) -> ExitCode {
    run(common, vec![AnalysisRequest {
        name: analysis.to_string(),
        args: Vec::new(),
    }])
}

fn run(common: &CommonArgs, requests: Vec<AnalysisRequest>) -> ExitCode {
    let text = match std::fs::read_to_string(&common.model) {
        Ok(text) => text,
        Err(e) => {
            eprintln!("error: cannot read {}: {}", common.model.display(), e);
            return ExitCode::from(2);
        }
    };
    let model = match load_model(&text) {
        Ok(model) => model,
        Err(e) => {
            eprintln!("error: {}: {}", common.model.display(), e);
            return ExitCode::from(2);
        }
    };
    let requests = if requests.is_empty() {
        model.analyses.clone()
    } else {
        requests
    };
    if requests.is_empty() {
        // context summary only
    }
    let options = ReportOptions {
        format: common.format,
        seed: common.seed,
        samples: common.samples,
    };
    let report = run_report(&model, &requests, &options);
    emit(&report.text, common.out.as_deref());
    if report.all_passed {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(1)
    }
}

fn emit(text: &str, out: Option<&std::path::Path>) {
    match out {
        Some(path) => {
            if let Err(e) = std::fs::write(path, text) {
                eprintln!("error: cannot write {}: {}", path.display(), e);
            }
        }
        None => print!("{}", text),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match &cli.command {
        Command::Report { common, analyses } => {
            let requests = match analyses {
                None => Vec::new(),
                Some(list) => {
                    let mut parsed = Vec::new();
                    for item in list.split(',') {
                        let item = item.trim();
                        if item.is_empty() {
                            continue;
                        }
                        // re-join parenthesized arguments split by the comma
                        match AnalysisRequest::parse(item) {
                            Ok(r) if jetforms_cli::KNOWN_ANALYSES.contains(&r.name.as_str()) => {
                                parsed.push(r)
                            }
                            Ok(r) => {
                                eprintln!("error: unknown analysis `{}`", r.name);
                                return ExitCode::from(2);
                            }
                            Err(e) => {
                                eprintln!("error: {}", e);
                                return ExitCode::from(2);
                            }
                        }
                    }
                    parsed
                }
            };
            run(common, requests)
        }
        Command::Balance(c) => run_single(c, "balance"),
        Command::Helmholtz(c) => run_single(c, "helmholtz"),
        Command::Lepage(c) => run_single(c, "lepage"),
        Command::Legendre(c) => run_single(c, "legendre"),
        Command::Symmetry(c) => run_single(c, "symmetry"),
        Command::Noether(c) => run_single(c, "noether"),
        Command::EnergyMomentum(c) => run_single(c, "energy-momentum"),
        Command::Gauge(c) => run_single(c, "gauge"),
        Command::Secondary(c) => run_single(c, "secondary"),
        Command::Cattaneo {
            format,
            seed,
            samples,
            out,
        } => {
            // synthesize a minimal model carrying only the built-in analysis
            let text = "[context]\nbase = t x1 x2 x3\nfields = theta q1 q2 q3\norder = 1\n\
                        [functions]\ntau(theta)\nLambda(theta)\nepseq(theta)\nlam0(theta)\n\
                        [cr]\nkind = generic\n[analyses]\nrun = cattaneo\n";
            let model = load_model(text).expect("built-in model is well-formed");
            let options = ReportOptions {
                format: *format,
                seed: *seed,
                samples: *samples,
            };
            let report = run_report(&model, &model.analyses, &options);
            emit(&report.text, out.as_deref());
            if report.all_passed {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(1)
            }
        }
    }
}
