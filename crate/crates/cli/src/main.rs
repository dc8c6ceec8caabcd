mod commands;
mod config;
mod error;
mod output;

use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use crate::config::ExperimentConfig;
use crate::error::CliError;
use crate::output::{Format, Sink};

/// Non-Abelian Aharonov-Bohm caging simulator.
#[derive(Debug, Parser)]
#[command(name = "abcage", version)]
struct Cli {
    /// JSON experiment config; defaults apply to every missing field.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Directory for artifacts and the manifest.
    #[arg(long, global = true, env = "ABCAGE_OUT_DIR", default_value = ".")]
    out_dir: PathBuf,
    /// Artifact format; `bands`, `evolve` and `fidelity` default to CSV, the rest to JSON.
    #[arg(long, global = true, value_enum)]
    format: Option<Format>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Bloch bands on a uniform k grid.
    Bands {
        #[arg(long)]
        n_k: Option<usize>,
    },
    /// Compact localized eigenstates at one energy.
    Cles {
        #[arg(long, allow_negative_numbers = true)]
        energy: Option<f64>,
        #[arg(long)]
        window: Option<usize>,
    },
    /// Cage extent of a single walker.
    Cage {
        /// Components; with --m selects the stride/shift family.
        #[arg(long)]
        n: Option<usize>,
        #[arg(long)]
        m: Option<usize>,
        #[arg(long)]
        l: Option<usize>,
        #[arg(long)]
        tmax: Option<f64>,
        #[arg(long)]
        threshold: Option<f64>,
    },
    /// Reconcile every walk against the cage-geometry table.
    TableCheck {
        /// Inclusive range, e.g. 2..6.
        #[arg(long)]
        n: Option<String>,
        #[arg(long)]
        m: Option<String>,
        #[arg(long)]
        tmax: Option<f64>,
        #[arg(long)]
        threshold: Option<f64>,
    },
    /// Driven-dissipative steady state.
    Steady {
        #[command(flatten)]
        drive: DriveArgs,
    },
    /// CLES fidelity of effective and time-dependent driven runs.
    Fidelity {
        /// 1-based band whose energy sets the pump detuning and target.
        #[arg(long)]
        band: Option<usize>,
        #[arg(long)]
        tier: Option<u8>,
        #[arg(long)]
        t_end: Option<f64>,
        #[arg(long)]
        samples: Option<usize>,
        #[command(flatten)]
        drive: DriveArgs,
    },
    /// Tone tables, detunings and a.c. Stark shifts of the resonator plan.
    Audit {
        #[arg(long)]
        omega0_ghz: Option<f64>,
        #[arg(long)]
        delta_ghz: Option<f64>,
        #[arg(long)]
        allow_out_of_range: bool,
    },
    /// Populations of a single-particle walk.
    Evolve {
        #[arg(long)]
        l: Option<usize>,
        #[arg(long, allow_negative_numbers = true)]
        start_cell: Option<i64>,
        #[arg(long)]
        tmax: Option<f64>,
        #[arg(long)]
        samples: Option<usize>,
    },
}

#[derive(Debug, Args)]
struct DriveArgs {
    #[arg(long, allow_negative_numbers = true)]
    pump_cell: Option<i64>,
    #[arg(long)]
    pump_site: Option<abcage::Site>,
    #[arg(long)]
    pump_mode: Option<usize>,
    #[arg(long, allow_negative_numbers = true)]
    omega_p: Option<f64>,
    #[arg(long)]
    kappa: Option<f64>,
}

fn set<T>(slot: &mut T, v: Option<T>) {
    if let Some(v) = v {
        *slot = v;
    }
}

impl DriveArgs {
    fn apply(self, cfg: &mut ExperimentConfig) {
        let d = &mut cfg.drive;
        set(&mut d.pump_cell, self.pump_cell);
        set(&mut d.pump_site, self.pump_site);
        set(&mut d.pump_mode, self.pump_mode);
        set(&mut d.omega_p, self.omega_p);
        set(&mut d.kappa, self.kappa);
    }
}

impl Command {
    fn name(&self) -> &'static str {
        match self {
            Command::Bands { .. } => "bands",
            Command::Cles { .. } => "cles",
            Command::Cage { .. } => "cage",
            Command::TableCheck { .. } => "table-check",
            Command::Steady { .. } => "steady",
            Command::Fidelity { .. } => "fidelity",
            Command::Audit { .. } => "audit",
            Command::Evolve { .. } => "evolve",
        }
    }

    fn default_format(&self) -> Format {
        match self {
            Command::Bands { .. } | Command::Evolve { .. } | Command::Fidelity { .. } => Format::Csv,
            _ => Format::Json,
        }
    }

    /// Fold flag overrides into the config.
    fn apply(self, cfg: &mut ExperimentConfig) {
        let r = &mut cfg.run;
        match self {
            Command::Bands { n_k } => set(&mut r.n_k, n_k),
            Command::Cles { energy, window } => {
                set(&mut r.energy, energy);
                set(&mut r.window_cells, window);
            }
            Command::Cage { n, m, l, tmax, threshold } => {
                if let Some(n) = n {
                    cfg.model.links = config::LinksConfig::Stride { n, m: m.unwrap_or(n) };
                }
                set(&mut r.l, l);
                set(&mut r.t_max, tmax);
                set(&mut r.threshold, threshold);
            }
            Command::TableCheck { n, m, tmax, threshold } => {
                set(&mut r.n_range, n);
                set(&mut r.m_range, m);
                set(&mut r.t_max, tmax);
                set(&mut r.threshold, threshold);
            }
            Command::Steady { drive } => drive.apply(cfg),
            Command::Fidelity { band, tier, t_end, samples, drive } => {
                r.band = band.or(r.band);
                set(&mut r.tier, tier);
                r.t_end = t_end.or(r.t_end);
                set(&mut r.n_samples, samples);
                drive.apply(cfg);
            }
            Command::Audit { omega0_ghz, delta_ghz, allow_out_of_range } => {
                set(&mut r.omega0_ghz, omega0_ghz);
                set(&mut r.delta_ghz, delta_ghz);
                r.allow_out_of_range |= allow_out_of_range;
            }
            Command::Evolve { l, start_cell, tmax, samples } => {
                set(&mut r.l, l);
                set(&mut r.start_cell, start_cell);
                set(&mut r.t_max, tmax);
                set(&mut r.n_samples, samples);
            }
        }
    }
}

fn run(cli: Cli) -> Result<(), CliError> {
    let mut cfg = config::load(cli.config.as_deref())?;
    let name = cli.command.name();
    let format = cli.format.unwrap_or(cli.command.default_format());
    cli.command.apply(&mut cfg);
    let inputs = serde_json::to_vec(&(name, format, &cfg)).map_err(|e| CliError::Config(e.to_string()))?;
    let mut sink = Sink::new(&cli.out_dir, format)?;
    commands::dispatch(name, &cfg, &mut sink)?;
    let manifest = sink.finish(name, &inputs)?;
    // Artifacts are already on disk; a closed stdout is not a failure.
    let text = serde_json::to_string_pretty(&manifest)?;
    match writeln!(std::io::stdout(), "{text}") {
        Err(e) if e.kind() != std::io::ErrorKind::BrokenPipe => Err(e.into()),
        _ => Ok(()),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("abcage: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
