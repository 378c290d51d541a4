//! `gpc`: Monte Carlo simulation and closed-form analysis of product-like
//! codes with BCH components.

mod error;
mod repro;
mod spec;

use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use gpc_core::analysis::{self, DeModel, FloorModel};
use gpc_core::sim::{run_trials_detailed, TrialConfig};
use gpc_core::{BchCode, BerRecord};

use crate::error::CliError;
use crate::spec::{OutputFormat, RunSpec, Settings};

#[derive(Parser, Debug)]
#[command(name = "gpc", version, about = "Iterative and anchor-based decoding of generalized product codes")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Monte Carlo BER simulation over a BSC.
    Simulate(Box<SimulateArgs>),
    /// Density-evolution prediction of the waterfall.
    De(DeArgs),
    /// Stopping-set error-floor estimate.
    Floor(FloorArgs),
    /// Net coding gain of a code reaching `p_out` at crossover `p`.
    Ncg(NcgArgs),
    /// Probability that bounded-distance decoding accepts a random syndrome.
    Mcprob(CodeArgs),
    /// Regenerates the curve data for the bundled figures at reduced depth.
    Repro(repro::ReproArgs),
}

/// Component code (ν, t, e, s).
#[derive(Args, Debug, Clone)]
struct CodeArgs {
    /// Field degree ν; mother length 2^ν − 1.
    #[arg(long, default_value_t = 7)]
    nu: u32,
    /// Designed error-correcting capability.
    #[arg(long, default_value_t = 2)]
    t: usize,
    /// Extension parity bits (0, 1 or 2).
    #[arg(long, default_value_t = 1)]
    e: usize,
    /// Shortened information bits.
    #[arg(long, default_value_t = 0)]
    s: usize,
}

impl CodeArgs {
    fn code(&self) -> Result<BchCode, CliError> {
        BchCode::new(self.nu, self.t, self.e, self.s).map_err(|e| CliError::Usage(format!("code parameters: {e}")))
    }
}

/// Flags override keys of the same name (dashes become underscores) in `--config`.
#[derive(Args, Debug, Default)]
struct SimulateArgs {
    /// Flat `key = value` file, or a JSON object, with any of the flags below.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Field degree ν [default: 7].
    #[arg(long)]
    nu: Option<u32>,
    /// Error-correcting capability [default: 2].
    #[arg(long)]
    t: Option<usize>,
    /// Extension bits [default: 1].
    #[arg(long)]
    e: Option<usize>,
    /// Shortening [default: 0].
    #[arg(long)]
    s: Option<usize>,
    /// product or staircase [default: product].
    #[arg(long)]
    layout: Option<String>,
    /// Staircase blocks [default: 16].
    #[arg(long)]
    blocks: Option<usize>,
    /// Staircase decoding window in blocks [default: 6].
    #[arg(long)]
    window: Option<usize>,
    /// iterative, anchor or genie [default: anchor].
    #[arg(long)]
    decoder: Option<String>,
    /// none, bitflip or erasure [default: none].
    #[arg(long)]
    pp: Option<String>,
    /// Extra iterations after bit-flip post-processing [default: 10].
    #[arg(long)]
    pp_iters: Option<usize>,
    /// Try subsets of suspicious anchors in erasure post-processing [default: false].
    #[arg(long, num_args = 0..=1, default_missing_value = "true")]
    exhaustive: Option<bool>,
    /// Conflict threshold, 0 to 3 [default: 1].
    #[arg(long)]
    delta: Option<usize>,
    /// Iterations [default: 10].
    #[arg(long)]
    ell: Option<usize>,
    /// Leading iterations decoded with capability t − 1 [default: 0].
    #[arg(long)]
    reduced_t_iters: Option<usize>,
    /// Crossover probabilities: `a,b,c` or log-spaced `a..b:N`.
    #[arg(long)]
    p: Option<String>,
    /// Stop a point after this many frame errors [default: 100].
    #[arg(long)]
    min_frame_errors: Option<u64>,
    /// Stop a point after this many frames [default: 10000000].
    #[arg(long)]
    max_frames: Option<u64>,
    /// Master seed [default: 1].
    #[arg(long)]
    seed: Option<u64>,
    /// Worker threads, 0 for all cores [default: 0].
    #[arg(long)]
    workers: Option<usize>,
    /// Output file [default: stdout].
    #[arg(long)]
    output: Option<PathBuf>,
    /// csv or json [default: csv].
    #[arg(long)]
    format: Option<String>,
    /// Emit per-frame decoder statistics (JSON).
    #[arg(long, num_args = 0..=1, default_missing_value = "true")]
    verbose_frames: Option<bool>,
}

impl SimulateArgs {
    fn settings(&self) -> Result<Settings, CliError> {
        let mut settings = match &self.config {
            Some(path) => Settings::from_file(path)?,
            None => Settings::default(),
        };
        let flags: [(&str, Option<String>); 22] = [
            ("nu", self.nu.map(|v| v.to_string())),
            ("t", self.t.map(|v| v.to_string())),
            ("e", self.e.map(|v| v.to_string())),
            ("s", self.s.map(|v| v.to_string())),
            ("layout", self.layout.clone()),
            ("blocks", self.blocks.map(|v| v.to_string())),
            ("window", self.window.map(|v| v.to_string())),
            ("decoder", self.decoder.clone()),
            ("pp", self.pp.clone()),
            ("pp_iters", self.pp_iters.map(|v| v.to_string())),
            ("exhaustive", self.exhaustive.map(|v| v.to_string())),
            ("delta", self.delta.map(|v| v.to_string())),
            ("ell", self.ell.map(|v| v.to_string())),
            ("reduced_t_iters", self.reduced_t_iters.map(|v| v.to_string())),
            ("p", self.p.clone()),
            ("min_frame_errors", self.min_frame_errors.map(|v| v.to_string())),
            ("max_frames", self.max_frames.map(|v| v.to_string())),
            ("seed", self.seed.map(|v| v.to_string())),
            ("workers", self.workers.map(|v| v.to_string())),
            ("output", self.output.as_ref().map(|v| v.display().to_string())),
            ("format", self.format.clone()),
            ("verbose_frames", self.verbose_frames.map(|v| v.to_string())),
        ];
        for (key, value) in flags {
            if let Some(value) = value {
                settings.set(key, &value)?;
            }
        }
        Ok(settings)
    }
}

#[derive(Args, Debug)]
struct DeArgs {
    #[command(flatten)]
    code: CodeArgs,
    /// Iterations.
    #[arg(long, default_value_t = 10)]
    ell: usize,
    /// Coupled types for a staircase model; omit for a product code.
    #[arg(long)]
    staircase_types: Option<usize>,
    /// Crossover probabilities: `a,b,c` or log-spaced `a..b:N`.
    #[arg(long)]
    p: String,
}

#[derive(Args, Debug)]
struct FloorArgs {
    #[command(flatten)]
    code: CodeArgs,
    /// minimal: (t+1)² sets; pp: the size-18 sets left by erasure post-processing (t = 2).
    #[arg(long, default_value = "minimal")]
    model: String,
    /// Crossover probabilities: `a,b,c` or log-spaced `a..b:N`.
    #[arg(long)]
    p: String,
}

#[derive(Args, Debug)]
struct NcgArgs {
    /// Code rate; defaults to the product-code rate of the given component code.
    #[arg(long)]
    rate: Option<f64>,
    #[command(flatten)]
    code: CodeArgs,
    /// Crossover probability at which `p_out` is reached.
    #[arg(long)]
    p: f64,
    /// Target output BER.
    #[arg(long, default_value_t = 1e-8)]
    p_out: f64,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("gpc: {e}");
            e.exit_code()
        }
    }
}

fn run(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Simulate(args) => simulate(&args.settings()?.to_run_spec()?),
        Command::De(args) => de(&args),
        Command::Floor(args) => floor(&args),
        Command::Ncg(args) => {
            let rate = match args.rate {
                Some(r) => r,
                None => args.code.code()?.rate().powi(2),
            };
            let gain = analysis::ncg(rate, args.p, args.p_out).map_err(|e| CliError::Usage(e.to_string()))?;
            println!("{gain:.4}");
            Ok(())
        }
        Command::Mcprob(args) => {
            let code = args.code()?;
            let (num, den) = analysis::miscorrection_fraction(&code);
            println!("{num}/{den} = {:.6e}", analysis::miscorrection_probability(&code));
            Ok(())
        }
        Command::Repro(args) => repro::run(&args),
    }
}

fn simulate(spec: &RunSpec) -> Result<(), CliError> {
    let layout = spec.build_layout()?;
    let mut records = Vec::new();
    let mut frames = Vec::new();
    for &p in &spec.p {
        let mut cfg = TrialConfig::new(spec.decoder, p, spec.params);
        cfg.pp = spec.pp;
        cfg.pp_iters = spec.pp_iters;
        cfg.exhaustive = spec.exhaustive;
        cfg.stop = spec.stop;
        cfg.seed = spec.seed;
        cfg.workers = spec.workers;
        cfg.record_frames = spec.verbose_frames;
        let (record, detail) = run_trials_detailed(&layout, &cfg)?;
        frames.push(serde_json::json!({ "p": p, "frames": detail }));
        records.push(record);
    }
    let mut out: Box<dyn Write> = match &spec.output {
        Some(path) => Box::new(std::fs::File::create(path)?),
        None => Box::new(std::io::stdout().lock()),
    };
    if spec.format == OutputFormat::Json || spec.verbose_frames {
        let mut doc = serde_json::json!({ "records": records });
        if spec.verbose_frames {
            doc["frames"] = serde_json::Value::Array(frames);
        }
        serde_json::to_writer_pretty(&mut out, &doc)?;
        writeln!(out)?;
    } else {
        BerRecord::write_csv(&records, &mut out)?;
    }
    Ok(())
}

/// An analytical BER prediction: model tag, crossover probability, BER and
/// the iteration count when the model has one.
pub type Prediction = (String, f64, f64, Option<usize>);

/// Writes predictions in the simulator's CSV schema, leaving the count
/// columns empty.
pub fn write_predictions(out: &mut dyn Write, rows: &[Prediction], header: bool) -> Result<(), CliError> {
    if header {
        writeln!(out, "variant,p,frames,bit_errors,frame_errors,ber,fer,ell,delta,seed")?;
    }
    for (tag, p, ber, ell) in rows {
        let ell = ell.map(|l| l.to_string()).unwrap_or_default();
        writeln!(out, "{tag},{p},,,,{ber:e},,{ell},,")?;
    }
    Ok(())
}

fn de(args: &DeArgs) -> Result<(), CliError> {
    let code = args.code.code()?;
    let p = spec::parse_p_sweep(&args.p).map_err(|e| CliError::Usage(format!("key 'p': {e}")))?;
    let model = match args.staircase_types {
        None => DeModel::product(code.n(), code.t() as u32),
        Some(types) => DeModel::staircase(types, code.n(), code.t() as u32).map_err(|e| CliError::Usage(e.to_string()))?,
    };
    let rows = p
        .iter()
        .map(|&p| Ok(("de".to_string(), p, analysis::density_evolution(&model, p, args.ell)?, Some(args.ell))))
        .collect::<Result<Vec<_>, gpc_core::Error>>()?;
    write_predictions(&mut std::io::stdout().lock(), &rows, true)
}

fn floor(args: &FloorArgs) -> Result<(), CliError> {
    let code = args.code.code()?;
    let p = spec::parse_p_sweep(&args.p).map_err(|e| CliError::Usage(format!("key 'p': {e}")))?;
    let (tag, model) = match args.model.as_str() {
        "minimal" => ("floor", FloorModel::minimal(code.n() as u64, code.t() as u32)),
        "pp" => {
            if code.t() != 2 || code.e() == 0 {
                return Err(CliError::Usage("key 'model': pp floor needs t = 2 and e >= 1".into()));
            }
            ("floor-pp", FloorModel::after_erasure_pp(code.n() as u64))
        }
        other => return Err(CliError::Usage(format!("invalid value '{other}' for key 'model'"))),
    };
    let rows = p
        .iter()
        .map(|&p| Ok((tag.to_string(), p, analysis::error_floor(&model, p)?, None)))
        .collect::<Result<Vec<_>, gpc_core::Error>>()?;
    write_predictions(&mut std::io::stdout().lock(), &rows, true)
}
