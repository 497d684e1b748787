//! Command-line front end. Data goes to files; the run summary and
//! generated fragments go to stdout; diagnostics go to stderr.

use std::ffi::OsString;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand};

use crate::error::Error;
use crate::protocol::{self, Mode};
use crate::scenario_io::{
    edge_list_fragment, parse_scenario, write_csv, write_svgs, Scenario, SimulationRecord,
    REFERENCE_SCENARIO,
};
use crate::topology::{generate, TopologyKind};

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_INVALID_SCENARIO: i32 = 2;
pub const EXIT_RUNTIME: i32 = 3;

/// File name written by `preset`.
pub const PRESET_FILE: &str = "ten_buildings.cfg";

#[derive(Debug, Parser)]
#[command(
    name = "microgrid",
    version,
    about = "Distributed demand-response microgrid simulator"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Run a scenario and write CSV (and optionally SVG) output.
    Run {
        #[arg(long)]
        scenario: PathBuf,
        /// Overrides `protocol.mode` from the scenario file.
        #[arg(long, value_parser = ["static", "dynamic"])]
        mode: Option<String>,
        /// Output directory; overrides `output.dir`.
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        emit_svg: bool,
        /// Draw initial demands uniformly from [50, 100] using the seed.
        #[arg(long)]
        sample_initial: bool,
        /// Overrides `seed` from the scenario file.
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Write the bundled ten-building scenario file.
    Preset {
        #[arg(long, default_value = ".")]
        out: PathBuf,
    },
    /// Emit an edge-list fragment for a generated topology.
    GenTopology {
        #[arg(long, value_parser = ["ring", "path", "complete", "erdos_renyi", "grid2d"])]
        kind: String,
        #[arg(long)]
        n: usize,
        /// Edge probability for erdos_renyi.
        #[arg(long)]
        p: Option<f64>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Write to this file instead of stdout.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Parse and validate a scenario without running it.
    Validate {
        #[arg(long)]
        scenario: PathBuf,
    },
}

struct Failure {
    code: i32,
    message: String,
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = if e.is_validation() {
            EXIT_INVALID_SCENARIO
        } else if matches!(e, Error::Argument(_)) {
            EXIT_USAGE
        } else {
            EXIT_RUNTIME
        };
        Failure {
            code,
            message: e.to_string(),
        }
    }
}

fn load(path: &Path) -> Result<Scenario<f64>, Failure> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    Ok(parse_scenario::<f64>(&text)?)
}

fn write_outputs(record: &SimulationRecord<f64>, dir: &Path, svg: bool) -> Result<(), Error> {
    write_csv(record, dir)?;
    if svg {
        write_svgs(record, dir)?;
    }
    Ok(())
}

fn execute(cli: Cli, stdout: &mut dyn Write) -> Result<(), Failure> {
    match cli.command {
        Command::Run {
            scenario,
            mode,
            out,
            emit_svg,
            sample_initial,
            seed,
        } => {
            let mut sc = load(&scenario)?;
            if let Some(seed) = seed {
                sc.seed = seed;
            }
            if sample_initial {
                let seed = sc.seed;
                sc = sc.with_sampled_initial_demand(seed);
            }
            if let Some(mode) = mode {
                sc.protocol.mode = mode.parse::<Mode>()?;
            }
            if let Some(out) = out {
                sc.output_dir = out;
            }
            sc.validate()?;
            let dir = sc.output_dir.clone();
            match protocol::run(&sc) {
                Ok(record) => {
                    write_outputs(&record, &dir, emit_svg)?;
                    let _ = writeln!(stdout, "{}", record.summary_line());
                    Ok(())
                }
                Err(failure) => {
                    if let Some(partial) = &failure.partial {
                        write_outputs(partial, &dir, emit_svg)?;
                    }
                    Err(failure.error.into())
                }
            }
        }
        Command::Preset { out } => {
            fs::create_dir_all(&out).map_err(|e| Error::io(&out, e))?;
            let path = out.join(PRESET_FILE);
            fs::write(&path, REFERENCE_SCENARIO).map_err(|e| Error::io(&path, e))?;
            Ok(())
        }
        Command::GenTopology {
            kind,
            n,
            p,
            seed,
            out,
        } => {
            let kind = TopologyKind::from_name(&kind, p)?;
            let g = generate(kind, n, seed)?;
            let text = format!(
                "# {kind} topology, n = {n}, seed = {seed}\n{}",
                edge_list_fragment(&g)
            );
            match out {
                Some(path) => fs::write(&path, text).map_err(|e| Error::io(&path, e))?,
                None => {
                    let _ = stdout.write_all(text.as_bytes());
                }
            }
            Ok(())
        }
        Command::Validate { scenario } => {
            let sc = load(&scenario)?;
            let g = sc.graph()?;
            let _ = writeln!(
                stdout,
                "valid n={} edges={} mode={} capacity={}",
                sc.n(),
                g.edges().len(),
                sc.protocol.mode,
                sc.pricing.capacity
            );
            Ok(())
        }
    }
}

/// Runs the CLI on `args` (including the program name) and returns the exit code.
pub fn main_with_args<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => {
                    let _ = write!(stdout, "{e}");
                    EXIT_OK
                }
                _ => {
                    let _ = write!(stderr, "{e}");
                    EXIT_USAGE
                }
            };
        }
    };
    match execute(cli, stdout) {
        Ok(()) => EXIT_OK,
        Err(f) => {
            let _ = writeln!(stderr, "error: {}", f.message);
            f.code
        }
    }
}
