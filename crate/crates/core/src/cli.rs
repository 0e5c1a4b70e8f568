//! Command-line front end. [`run`] returns the process exit code: 0 on
//! success, 1 for usage or configuration errors, 2 for data errors.

use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand, ValueEnum};

use crate::bench::{emit_report, load_config, load_run, replay, run_matrix, save_run, BenchError, ReportFormat};
use crate::encoding::{
    amplitude_encode, angle_encode, basis_encode, basis_encode_text, readout, superposition_encode, AngleMap, Axis,
    ReadoutMode,
};
use crate::pipeline::{prepare, read_csv};
use crate::qsim::StateVector;
use crate::synthetic::telco_like_csv;

pub const OUT_DIR_ENV: &str = "QEMBED_OUT_DIR";
const DEFAULT_OUT_DIR: &str = "qembed-out";

#[derive(Parser, Debug)]
#[command(name = "qembed", version, about = "Quantum data encodings and a classical benchmark harness")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum SchemeArg {
    Basis,
    Superposition,
    Angle,
    Amplitude,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum AxisArg {
    X,
    Y,
    Z,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum FormatArg {
    Csv,
    Markdown,
}

impl From<FormatArg> for ReportFormat {
    fn from(f: FormatArg) -> Self {
        match f {
            FormatArg::Csv => ReportFormat::Csv,
            FormatArg::Markdown => ReportFormat::Markdown,
        }
    }
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Encode one input and print the state and its readout
    Encode {
        #[arg(long, value_enum)]
        scheme: SchemeArg,
        /// Bitstring for basis encoding, e.g. 101
        #[arg(long)]
        bits: Option<String>,
        /// ASCII text for basis encoding, 7 qubits per character
        #[arg(long)]
        text: Option<String>,
        /// Comma-separated bitstrings for superposition encoding
        #[arg(long, value_delimiter = ',')]
        strings: Vec<String>,
        /// Comma-separated values for angle or amplitude encoding
        #[arg(long, value_delimiter = ',', allow_negative_numbers = true)]
        vector: Vec<f64>,
        #[arg(long, value_enum, default_value = "x")]
        axis: AxisArg,
        /// Angle inputs are rotation angles in degrees
        #[arg(long)]
        degrees: bool,
        /// Angle inputs are rotation angles in radians
        #[arg(long, conflicts_with = "degrees")]
        raw: bool,
    },
    /// Run the preprocessing pipeline and write preprocess.json
    Preprocess {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run the encoding x model matrix and write results.json
    Bench {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long, value_enum, default_value = "csv")]
        format: FormatArg,
        #[arg(long)]
        repeat: Option<usize>,
        /// Re-run a results.json and check every MetricReport matches
        #[arg(long, conflicts_with_all = ["seed", "repeat"])]
        replay: bool,
    },
    /// Write a synthetic CSV in the Telco churn layout
    Synth {
        #[arg(long, default_value_t = 500)]
        rows: usize,
        #[arg(long, default_value_t = 7)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Re-render a persisted results.json
    Report {
        #[arg(long)]
        results: PathBuf,
        #[arg(long, value_enum, default_value = "csv")]
        format: FormatArg,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

struct Failure {
    code: i32,
    message: String,
}

impl From<BenchError> for Failure {
    fn from(e: BenchError) -> Self {
        Failure { code: e.exit_code(), message: e.to_string() }
    }
}

fn usage(message: impl Into<String>) -> Failure {
    Failure { code: 1, message: message.into() }
}

fn data(message: impl ToString) -> Failure {
    Failure { code: 2, message: message.to_string() }
}

fn io_failure(path: &Path, e: std::io::Error) -> Failure {
    data(format!("{}: {e}", path.display()))
}

fn out_dir(flag: Option<PathBuf>, config: Option<&PathBuf>) -> PathBuf {
    flag.or_else(|| config.cloned())
        .or_else(|| std::env::var_os(OUT_DIR_ENV).map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from(DEFAULT_OUT_DIR))
}

fn print_state(out: &mut dyn Write, state: &StateVector, mode: ReadoutMode) -> Result<(), Failure> {
    let values = readout(state, mode).map_err(data)?;
    let label = serde_json::to_string(&mode).expect("mode serializes");
    let _ = writeln!(out, "{state}");
    let _ = writeln!(out, "readout {}: {}", label.trim_matches('"'), serde_json::to_string(&values).expect("finite"));
    Ok(())
}

fn encode(out: &mut dyn Write, cmd: Command) -> Result<(), Failure> {
    let Command::Encode { scheme, bits, text, strings, vector, axis, degrees, raw } = cmd else {
        unreachable!()
    };
    match scheme {
        SchemeArg::Basis => match (bits, text) {
            (Some(b), None) => {
                let parsed: Vec<u8> = b
                    .chars()
                    .map(|c| match c {
                        '0' => Ok(0),
                        '1' => Ok(1),
                        _ => Err(data(format!("not a bitstring: {b:?}"))),
                    })
                    .collect::<Result<_, _>>()?;
                let state = basis_encode(&parsed).map_err(data)?;
                print_state(out, &state, ReadoutMode::ProbabilityVector)
            }
            (None, Some(t)) => {
                for (ch, state) in t.chars().zip(basis_encode_text(&t).map_err(data)?) {
                    let _ = writeln!(out, "{ch:?} {state}");
                }
                Ok(())
            }
            _ => Err(usage("basis encoding needs exactly one of --bits or --text")),
        },
        SchemeArg::Superposition => {
            if strings.is_empty() {
                return Err(usage("superposition encoding needs --strings"));
            }
            let state = superposition_encode(&strings).map_err(data)?;
            print_state(out, &state, ReadoutMode::ProbabilityVector)
        }
        SchemeArg::Angle => {
            if vector.is_empty() {
                return Err(usage("angle encoding needs --vector"));
            }
            let (values, map) = if degrees {
                (vector.iter().map(|d| d.to_radians()).collect(), AngleMap::Raw)
            } else if raw {
                (vector, AngleMap::Raw)
            } else {
                (vector, AngleMap::LinearPi)
            };
            let axis = match axis {
                AxisArg::X => Axis::X,
                AxisArg::Y => Axis::Y,
                AxisArg::Z => Axis::Z,
            };
            let state = angle_encode(&values, axis, map).map_err(data)?;
            print_state(out, &state, ReadoutMode::ZExpectations)
        }
        SchemeArg::Amplitude => {
            if vector.is_empty() {
                return Err(usage("amplitude encoding needs --vector"));
            }
            let state = amplitude_encode(&vector).map_err(data)?;
            print_state(out, &state, ReadoutMode::ProbabilityVector)
        }
    }
}

fn write_file(path: &Path, text: &str) -> Result<(), Failure> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir).map_err(|e| io_failure(dir, e))?;
    }
    std::fs::write(path, text).map_err(|e| io_failure(path, e))
}

fn dispatch(out: &mut dyn Write, err: &mut dyn Write, cli: Cli) -> Result<(), Failure> {
    match cli.command {
        cmd @ Command::Encode { .. } => encode(out, cmd),
        Command::Preprocess { config, seed, out: out_flag } => {
            let mut cfg = load_config(&config)?;
            if let Some(s) = seed {
                cfg.set_seed(s);
            }
            let schema = cfg.schema.resolve()?;
            let bytes = std::fs::read(&cfg.dataset).map_err(|e| io_failure(&cfg.dataset, e))?;
            let dataset = read_csv(&bytes[..], &schema).map_err(data)?;
            let prepared = prepare(&dataset, &cfg.pipeline).map_err(data)?;
            let dir = out_dir(out_flag, cfg.output_dir.as_ref());
            let path = dir.join("preprocess.json");
            let text = serde_json::to_string_pretty(&prepared.report).expect("report serializes");
            write_file(&path, &(text + "\n"))?;
            let r = &prepared.report;
            let _ = writeln!(
                out,
                "rows {} -> train {} / test {}; {} one-hot columns; {} components kept",
                r.rows_loaded, r.split_train_rows, r.split_test_rows, r.one_hot_columns, r.components_kept
            );
            let _ = writeln!(err, "wrote {}", path.display());
            Ok(())
        }
        Command::Bench { config, seed, out: out_flag, format, repeat, replay: check } => {
            if check {
                let run = load_run(&config)?;
                let diffs = replay(&run)?;
                if diffs.is_empty() {
                    let _ = writeln!(out, "reproduced {} cells", run.results.len());
                    return Ok(());
                }
                for (e, m) in &diffs {
                    let _ = writeln!(err, "mismatch: {e} / {m}");
                }
                return Err(data(format!("{} cells differ", diffs.len())));
            }
            let mut cfg = load_config(&config)?;
            if let Some(s) = seed {
                cfg.set_seed(s);
            }
            if let Some(r) = repeat {
                if r == 0 {
                    return Err(usage("--repeat must be >= 1"));
                }
                cfg.repeat = r;
            }
            let run = run_matrix(&cfg)?;
            for r in &run.results {
                if let Some(e) = &r.error {
                    let _ = writeln!(err, "cell {} / {} failed: {e}", r.encoding, r.model);
                }
            }
            let dir = out_dir(out_flag, cfg.output_dir.as_ref());
            let path = save_run(&run, &dir)?;
            let fmt: ReportFormat = format.into();
            let report = emit_report(&run.results, fmt)?;
            let ext = match fmt {
                ReportFormat::Csv => "csv",
                ReportFormat::Markdown => "md",
            };
            write_file(&dir.join(format!("report.{ext}")), &report)?;
            let _ = write!(out, "{report}");
            let _ = writeln!(err, "wrote {}", path.display());
            Ok(())
        }
        Command::Synth { rows, seed, out: path } => write_file(&path, &telco_like_csv(rows, seed)),
        Command::Report { results, format, out: out_file } => {
            let run = load_run(&results)?;
            let report = emit_report(&run.results, format.into())?;
            match out_file {
                Some(p) => write_file(&p, &report),
                None => {
                    let _ = write!(out, "{report}");
                    Ok(())
                }
            }
        }
    }
}

/// Parses `args` (including the program name) and runs the command.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let text = e.render().to_string();
            let _ = if code == 0 { write!(out, "{text}") } else { write!(err, "{text}") };
            return code;
        }
    };
    match dispatch(out, err, cli) {
        Ok(()) => 0,
        Err(f) => {
            let _ = writeln!(err, "error: {}", f.message);
            f.code
        }
    }
}
