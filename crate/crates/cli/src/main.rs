use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use tdsr_cli::presets::{self, Action, Scale, PRESETS};
use tdsr_cli::{converge_config, run_config, CliError, ConfigError, Overrides, RunConfig, RunOutcome, StudyOutcome};
use tdsr_core::etd::{alpha_scalar, beta_coeffs};
use tdsr_core::StepGeometry;

#[derive(Parser)]
#[command(name = "tdsr", version, about = "TDSR-ETD spectral solver for gradient flows")]
struct Cli {
    #[command(flatten)]
    flags: Flags,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Flags {
    /// Seed of the random initial data.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Output directory.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Accuracy order, 1 to 3.
    #[arg(long, global = true)]
    order: Option<usize>,
    /// Energy enforcing constant.
    #[arg(long, global = true)]
    theta: Option<f64>,
    /// Fixed step size (replaces adaptive stepping).
    #[arg(long, global = true)]
    dt: Option<f64>,
}

#[derive(Subcommand)]
enum Command {
    /// Integrate the problem a config describes.
    Run { config: PathBuf },
    /// Temporal order study from a config with a [study] section.
    Converge { config: PathBuf },
    /// Print ETD weights for a step (uses --order and --dt).
    Coeffs {
        /// Ratio of the new step to the previous one.
        #[arg(long, default_value_t = 1.0)]
        ratio: f64,
        /// Linear symbol values L.
        #[arg(long = "symbol", allow_negative_numbers = true, value_delimiter = ',', default_values_t = [0.0, -1.0, -100.0])]
        symbols: Vec<f64>,
    },
    /// Built-in experiment setups.
    Presets {
        #[command(subcommand)]
        action: PresetCommand,
    },
}

#[derive(Subcommand)]
enum PresetCommand {
    List,
    /// Print a preset's config.
    Show {
        name: String,
        #[arg(long, default_value = "desk")]
        scale: Scale,
    },
    Run {
        name: String,
        #[arg(long, default_value = "desk")]
        scale: Scale,
    },
}

impl Flags {
    fn overrides(&self) -> Overrides {
        Overrides {
            seed: self.seed,
            out: self.out.clone(),
            order: self.order,
            theta: self.theta,
            dt: self.dt,
        }
    }
}

fn load(path: &Path, flags: &Flags) -> Result<RunConfig, CliError> {
    let mut cfg = RunConfig::from_path(path)?;
    cfg.apply(&flags.overrides());
    Ok(cfg)
}

fn preset(name: &str) -> Result<presets::Preset, CliError> {
    presets::find(name).ok_or_else(|| {
        let names: Vec<&str> = PRESETS.iter().map(|p| p.name).collect();
        ConfigError::Invalid(vec![format!("unknown preset `{name}`; known: {}", names.join(", "))]).into()
    })
}

fn report_run(o: &RunOutcome) {
    let r = &o.last;
    println!("{} steps to t = {}", o.steps, r.t);
    println!(
        "E = {:e}  E_modified = {:e}  R = {}  mass = {:e}",
        r.energy, r.modified_energy, r.r, r.mass
    );
    println!("wrote {} ({} snapshots)", o.dir.display(), o.snapshots.len());
}

fn report_study(o: &StudyOutcome) {
    let rep = &o.report;
    println!(
        "order {} vs reference dt = {:e} at T = {}",
        rep.order + 1,
        rep.reference_dt,
        rep.final_time
    );
    println!(
        "{:>12} {:>14} {:>14} {:>8} {:>8}",
        "dt", "phi error", "R error", "phi", "R"
    );
    let rate = |v: Option<f64>| v.map_or("-".to_string(), |v| format!("{v:.2}"));
    for row in &rep.rows {
        println!(
            "{:>12.4e} {:>14.4e} {:>14.4e} {:>8} {:>8}",
            row.dt,
            row.phi_error,
            row.r_error,
            rate(row.phi_rate),
            rate(row.r_rate)
        );
    }
    let slope = |v: Option<f64>| v.map_or("saturated".to_string(), |v| format!("{v:.3}"));
    println!(
        "fitted slopes: phi {}  R {}",
        slope(rep.phi_slope()),
        slope(rep.r_slope())
    );
    println!("wrote {}", o.dir.display());
}

fn coeffs(flags: &Flags, ratio: f64, symbols: &[f64]) -> Result<(), CliError> {
    let order = flags.order.unwrap_or(3);
    if !(1..=3).contains(&order) {
        return Err(ConfigError::Invalid(vec![format!("--order must be 1, 2 or 3, got {order}")]).into());
    }
    let dt = flags.dt.unwrap_or(0.1);
    let geom = StepGeometry::new(dt, ratio, order - 1)
        .map_err(|e| CliError::Config(ConfigError::Invalid(vec![e.to_string()])))?;
    let beta = beta_coeffs(&geom);
    println!("L,j,alpha,beta");
    for &l in symbols {
        let alpha = alpha_scalar(&geom, l).map_err(|e| CliError::Config(ConfigError::Invalid(vec![e.to_string()])))?;
        for (k, (a, b)) in alpha.iter().zip(&beta).enumerate() {
            println!("{l:e},{},{a:.16e},{b:.16e}", k as isize - 1);
        }
    }
    Ok(())
}

fn dispatch(cli: Cli) -> Result<(), CliError> {
    let flags = &cli.flags;
    match &cli.command {
        Command::Run { config } => report_run(&run_config(&load(config, flags)?)?),
        Command::Converge { config } => report_study(&converge_config(&load(config, flags)?)?),
        Command::Coeffs { ratio, symbols } => coeffs(flags, *ratio, symbols)?,
        Command::Presets { action } => match action {
            PresetCommand::List => {
                for p in &PRESETS {
                    println!("{:<20} {}", p.name, p.summary);
                }
            }
            PresetCommand::Show { name, scale } => print!("{}", presets::config_text(&preset(name)?, *scale)),
            PresetCommand::Run { name, scale } => {
                let p = preset(name)?;
                let mut cfg = presets::config(&p, *scale);
                cfg.apply(&flags.overrides());
                match p.action {
                    Action::Run => report_run(&run_config(&cfg)?),
                    Action::Converge => report_study(&converge_config(&cfg)?),
                }
            }
        },
    }
    Ok(())
}

fn main() -> ExitCode {
    match dispatch(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
