use std::fs;
use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde_json::json;

use niep::corpus::{parse_fixture, run_corpus};
use niep::realize::Strategy;
use niep::report::{self, Format};
use niep::runner::{self, parse_matrix, RunConfig};
use niep::scalar::Scalar;
use niep::spectrum::Mode;
use niep::template::parse_override;

#[derive(Parser)]
#[command(name = "niep", version, about = "Nonnegative matrices with a prescribed spectrum")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Build and verify a nonnegative matrix with the given spectrum.
    Realize(SpectrumArgs),
    /// Report the necessary conditions only.
    Check(SpectrumArgs),
    /// Verify a given matrix against a spectrum.
    Verify {
        #[command(flatten)]
        args: SpectrumArgs,
        /// Matrix file: whitespace/comma separated rows, or JSON (array or report with "C").
        #[arg(long)]
        matrix: PathBuf,
    },
    /// Run every `*.fixture` file in a directory.
    Corpus {
        #[arg(default_value = concat!(env!("CARGO_MANIFEST_DIR"), "/../core/corpus"))]
        path: PathBuf,
        #[arg(long, default_value = "text")]
        format: Format,
    },
}

#[derive(Args)]
struct SpectrumArgs {
    /// Spectrum, e.g. "7,3,-5,-5" or "6,-2,-2-i,-2+i".
    #[arg(long, conflicts_with = "file", required_unless_present = "file", allow_hyphen_values = true)]
    spectrum: Option<String>,
    /// Read the spectrum (or a whole fixture) from a file.
    #[arg(long)]
    file: Option<PathBuf>,
    /// Strategy id; automatic routing when omitted.
    #[arg(long)]
    strategy: Option<Strategy>,
    /// `exact` or `float`; inferred from the input when omitted.
    #[arg(long)]
    mode: Option<Mode>,
    /// Numeric tolerance for float checks [default: 1e-9].
    #[arg(long, allow_hyphen_values = true)]
    tol: Option<f64>,
    /// Diagonal order as 1-based indices into the descending real spectrum.
    #[arg(long, value_delimiter = ',', num_args = 1..)]
    order: Option<Vec<usize>>,
    /// Parameter override `key=value`, repeatable.
    #[arg(long = "set", value_parser = parse_set)]
    set: Vec<(String, Scalar)>,
    /// `json` or `text`.
    #[arg(long, default_value = "json")]
    format: Format,
    /// Largest k in the JLL family [default: n].
    #[arg(long)]
    jll_k: Option<usize>,
    /// Largest m in the JLL family.
    #[arg(long, default_value_t = 3)]
    jll_m: usize,
}

fn parse_set(text: &str) -> Result<(String, Scalar), String> {
    parse_override(text).map_err(|e| e.to_string())
}

impl SpectrumArgs {
    /// Flags win over directives read from a fixture file.
    fn config(&self) -> Result<RunConfig, String> {
        let mut cfg = match (&self.spectrum, &self.file) {
            (Some(s), _) => RunConfig::new(s.clone()),
            (None, Some(path)) => {
                let text = fs::read_to_string(path).map_err(|e| format!("{}: {e}", path.display()))?;
                parse_fixture(&text).map_err(|e| format!("{}: {e}", path.display()))?.config()
            }
            (None, None) => return Err("--spectrum or --file is required".into()),
        };
        if self.strategy.is_some() {
            cfg.strategy = self.strategy;
        }
        if self.mode.is_some() {
            cfg.mode = self.mode;
        }
        if let Some(tol) = self.tol {
            cfg.tol = tol;
        }
        if self.order.is_some() {
            cfg.order = self.order.clone();
        }
        cfg.overrides.extend(self.set.iter().cloned());
        cfg.jll_k = self.jll_k;
        cfg.jll_m = self.jll_m;
        Ok(cfg)
    }
}

fn emit(format: Format, json: serde_json::Value, text: impl FnOnce() -> String) {
    let out = match format {
        Format::Json => report::to_pretty(&json) + "\n",
        Format::Text => text(),
    };
    // A closed pipe (e.g. `| head`) is not an error worth reporting.
    let _ = std::io::stdout().lock().write_all(out.as_bytes());
}

fn input_error(message: String) -> ExitCode {
    eprintln!("error: {message}");
    ExitCode::from(1)
}

fn exit(code: i32) -> ExitCode {
    ExitCode::from(u8::try_from(code).unwrap_or(1))
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 1 } else { 0 });
        }
    };
    match cli.command {
        Command::Realize(args) => {
            let cfg = match args.config() {
                Ok(c) => c,
                Err(e) => return input_error(e),
            };
            let r = runner::run(&cfg);
            emit(args.format, report::run_json(&r), || report::run_text(&r));
            exit(r.exit_code())
        }
        Command::Check(args) => {
            let cfg = match args.config() {
                Ok(c) => c,
                Err(e) => return input_error(e),
            };
            let r = runner::check(&cfg);
            emit(args.format, report::check_json(&r), || report::check_text(&r));
            exit(r.exit_code())
        }
        Command::Verify { args, matrix } => {
            let cfg = match args.config() {
                Ok(c) => c,
                Err(e) => return input_error(e),
            };
            let m = match fs::read_to_string(&matrix).map_err(|e| e.to_string()).and_then(|t| parse_matrix(&t)) {
                Ok(m) => m,
                Err(e) => return input_error(format!("{}: {e}", matrix.display())),
            };
            match runner::verify_given(&cfg, &m) {
                Ok((c, v)) => {
                    emit(args.format, report::verify_json(&cfg.spectrum, &c, &m, &v), || report::verify_text(&c, &v));
                    exit(if v.passed { 0 } else { 2 })
                }
                Err(r) => {
                    emit(args.format, report::run_json(&r), || report::run_text(&r));
                    exit(r.exit_code())
                }
            }
        }
        Command::Corpus { path, format } => {
            let summary = match run_corpus(&path) {
                Ok(s) => s,
                Err(e) => return input_error(format!("{}: {e}", path.display())),
            };
            let rows: Vec<_> = summary
                .results
                .iter()
                .map(|r| json!({"fixture": r.name, "passed": r.passed, "exit": r.exit_code, "strategy": r.strategy, "detail": r.detail}))
                .collect();
            let value = json!({"fixtures": rows, "failed": summary.failures()});
            emit(format, value, || summary.table());
            exit(summary.exit_code())
        }
    }
}
