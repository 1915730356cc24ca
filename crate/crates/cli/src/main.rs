use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use rydberg_rx::commands::{
    cmd_calibrate, cmd_ser, cmd_spectrum, render_ser_rows, tagged_path, write_output, ReceiverKind, SpectrumSweep,
};
use rydberg_rx::config::{parse_quantity, Dimension, GridSpec, ScenarioConfig, DEFAULT_CONFIG};
use rydberg_rx::{Engine, Error, ErrorClass, Execution};

const EXIT_USAGE: u8 = 2;
const EXIT_VALIDATION: u8 = 3;
const EXIT_NUMERICAL: u8 = 4;
const EXIT_IO: u8 = 5;

/// Five-level Rydberg receiver simulator.
#[derive(Debug, Parser)]
#[command(name = "rydberg", version)]
struct Cli {
    #[command(flatten)]
    global: GlobalArgs,

    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Args)]
struct GlobalArgs {
    /// Scenario file; the bundled default is used when omitted.
    #[arg(long, global = true)]
    config: Option<PathBuf>,

    /// Run seed, overriding the scenario's.
    #[arg(long, global = true)]
    seed: Option<u64>,

    /// Coherence engine: numeric, weakprobe or stark.
    #[arg(long, global = true)]
    engine: Option<String>,

    /// Disable data-parallel execution.
    #[arg(long, global = true)]
    sequential: bool,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Probe transmission versus coupling detuning (CSV).
    Spectrum {
        /// Output path; tagged sweeps write `<stem>_<tag>.<ext>` next to it.
        #[arg(long)]
        out: Option<PathBuf>,
        /// single, pam or interference.
        #[arg(long, default_value = "single")]
        sweep: String,
        /// Override the number of grid points.
        #[arg(long)]
        points: Option<usize>,
        /// Override the RF field, e.g. "0 V/m".
        #[arg(long)]
        rf: Option<String>,
        /// Override the interference field, e.g. "0.5 V/m".
        #[arg(long)]
        interference: Option<String>,
    },
    /// Pilot calibration of the readout detuning (JSON).
    Calibrate {
        #[arg(long)]
        out: Option<PathBuf>,
        /// Override the pilot count.
        #[arg(long)]
        pilots: Option<usize>,
        /// Override the pilot jitter, e.g. "42.4 Hz"; "0 Hz" disables it.
        #[arg(long)]
        jitter: Option<String>,
    },
    /// Symbol error rate table (line-delimited JSON).
    Ser {
        #[arg(long)]
        out: Option<PathBuf>,
        /// rydberg, conventional or both.
        #[arg(long, default_value = "both")]
        receiver: String,
        /// Monte Carlo symbols per Rydberg row, overriding the scenario's.
        #[arg(long)]
        symbols: Option<u64>,
        /// Append to the output file instead of truncating it.
        #[arg(long)]
        append: bool,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(match e.class() {
                ErrorClass::Usage => EXIT_USAGE,
                ErrorClass::Validation => EXIT_VALIDATION,
                ErrorClass::Numerical => EXIT_NUMERICAL,
                ErrorClass::Io => EXIT_IO,
            })
        }
    }
}

fn usage_quantity(flag: &str, text: &str, dim: Dimension) -> Result<f64, Error> {
    parse_quantity(text, dim).map_err(|r| Error::Usage(format!("--{flag}: {r}")))
}

fn emit(out: Option<&Path>, content: &str, append: bool) -> Result<(), Error> {
    match out {
        Some(p) => write_output(p, content, append),
        None => std::io::stdout()
            .write_all(content.as_bytes())
            .map_err(|source| Error::Io {
                path: "<stdout>".into(),
                source,
            }),
    }
}

fn run(cli: Cli) -> Result<(), Error> {
    let g = cli.global;
    let mut config = match &g.config {
        Some(p) => ScenarioConfig::from_path(p)?,
        None => ScenarioConfig::from_toml(DEFAULT_CONFIG)?,
    };
    if let Some(seed) = g.seed {
        config = config.with_seed(seed);
    }
    if let Some(e) = &g.engine {
        config.engine = e
            .parse::<Engine>()
            .map_err(|_| Error::Usage(format!("unknown engine `{e}`; expected numeric, weakprobe or stark")))?;
    }
    let engine = config.engine;
    let exec = if g.sequential {
        Execution::Sequential
    } else {
        Execution::Parallel
    };

    match cli.command {
        Command::Spectrum {
            out,
            sweep,
            points,
            rf,
            interference,
        } => {
            let sweep: SpectrumSweep = sweep.parse()?;
            if let Some(rf) = rf {
                config.ladder.fields.rf = usage_quantity("rf", &rf, Dimension::Field)?;
            }
            if let Some(ei) = interference {
                let ei = usage_quantity("interference", &ei, Dimension::Field)?;
                config.ladder.fields.interference = ei;
                config.link.interference_field = ei;
            }
            let grid = match points {
                Some(points) => GridSpec {
                    points,
                    ..config.spectrum.grid
                }
                .values(),
                None => config.spectrum.grid.values(),
            };
            let files = cmd_spectrum(&config, &grid, sweep, engine, exec)?;
            if files.len() > 1 && out.is_none() {
                return Err(Error::Usage("multi-trace sweeps need --out".into()));
            }
            for f in &files {
                let path = out.as_deref().map(|o| tagged_path(o, f.tag.as_deref()));
                emit(path.as_deref(), &f.csv, false)?;
            }
        }
        Command::Calibrate { out, pilots, jitter } => {
            if let Some(p) = pilots {
                if p == 0 {
                    return Err(Error::Usage("--pilots must be at least 1".into()));
                }
                config.pilots = p;
            }
            if let Some(j) = jitter {
                let s = usage_quantity("jitter", &j, Dimension::Angular)?;
                if s < 0.0 {
                    return Err(Error::Usage("--jitter must be non-negative".into()));
                }
                config.jitter_sigma = (s > 0.0).then_some(s);
            }
            let (_, json) = cmd_calibrate(&config, engine, exec)?;
            emit(out.as_deref(), &json, false)?;
        }
        Command::Ser {
            out,
            receiver,
            symbols,
            append,
        } => {
            let receiver: ReceiverKind = receiver.parse()?;
            let n = symbols.unwrap_or(config.ser.symbols);
            let rows = cmd_ser(&config, receiver, engine, n, exec)?;
            emit(out.as_deref(), &render_ser_rows(&rows), append)?;
        }
    }
    Ok(())
}
