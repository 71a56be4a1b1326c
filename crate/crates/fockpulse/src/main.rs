use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use fockpulse::commands::{self, Written};
use fockpulse::config::{self, RunConfig};
use fockpulse::Result;

#[derive(Parser)]
#[command(name = "fockpulse", version, about = "Fock-state generation from a Zeeman cascade in a cavity")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Common {
    /// Configuration file, or builtin:fig2.config | builtin:fig3.config | builtin:cs_f4.config
    #[arg(long, default_value = "builtin:fig3.config")]
    config: String,

    /// Output directory (defaults to outputs.dir of the configuration)
    #[arg(long)]
    out: Option<PathBuf>,

    /// Dot-path override, e.g. --set params.omega1=20 (repeatable)
    #[arg(long = "set", value_name = "KEY=VALUE")]
    overrides: Vec<String>,

    /// Skip SVG output
    #[arg(long)]
    no_svg: bool,
}

#[derive(Subcommand)]
enum Command {
    /// Integrate the rate equations over the configured pulses
    Simulate(Common),
    /// Closed-form lossless photon-number distribution
    Analytic(Common),
    /// Alternating sigma_plus/sigma_minus pulse train
    Train {
        #[command(flatten)]
        common: Common,
        /// Number of pulses (defaults to `cycles` in the configuration)
        #[arg(long)]
        cycles: Option<usize>,
    },
    /// Repeat the simulation over a grid of one parameter
    Sweep {
        #[command(flatten)]
        common: Common,
        /// Dot path of the swept parameter, e.g. params.omega1 or pulse.T
        #[arg(long)]
        param: String,
        /// Comma-separated grid values
        #[arg(long, value_delimiter = ',', required = true)]
        values: Vec<String>,
        /// Worker threads (capped by FOCKPULSE_THREADS)
        #[arg(long)]
        threads: Option<usize>,
    },
    /// Dump the coupling table of the configured atom and polarization
    Coeffs(Common),
    /// Evaluate a Wigner 3-j or 6-j symbol
    Wigner {
        /// Evaluate {j1 j2 j3; j4 j5 j6} instead of (j1 j2 j3; m1 m2 m3)
        #[arg(long)]
        six: bool,
        /// Six values such as 1 1/2 3/2 0 1/2 -1/2
        #[arg(num_args = 6, allow_hyphen_values = true)]
        values: Vec<String>,
    },
}

fn prepare(common: &Common) -> Result<(RunConfig, PathBuf, bool)> {
    let config = config::load(&common.config, &common.overrides)?;
    let out = common.out.clone().unwrap_or_else(|| PathBuf::from(&config.outputs.dir));
    let svg = config.outputs.svg && !common.no_svg;
    Ok((config, out, svg))
}

fn report(written: &Written) {
    for f in &written.files {
        println!("wrote {}", f.display());
    }
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Simulate(common) => {
            let (config, out, svg) = prepare(&common)?;
            let (result, written) = commands::simulate(&config, &out, svg)?;
            report(&written);
            println!("n_out(+inf) = {:.6}", result.final_photons());
            for c in result.validity.checks.iter().filter(|c| !c.passed) {
                eprintln!(
                    "warning: validity check {} failed (ratio {:.4}, threshold {})",
                    c.name, c.ratio, c.threshold
                );
            }
        }
        Command::Analytic(common) => {
            let (config, out, svg) = prepare(&common)?;
            let (_, written) = commands::analytic(&config, &out, svg)?;
            report(&written);
            println!("n_out(+inf) = {:.6}", written.summary["n_out_final"].as_f64().unwrap_or(f64::NAN));
        }
        Command::Train { common, cycles } => {
            let (config, out, svg) = prepare(&common)?;
            let cycles = cycles.unwrap_or(config.cycles);
            let (result, written) = commands::train(&config, cycles, &out, svg)?;
            report(&written);
            for c in &result.pulse_counts {
                println!("cycle {} ({}): {:.6}", c.index + 1, c.polarization.name(), c.photons);
            }
            println!(
                "max pairwise spread = {:.3e}",
                written.summary["max_pairwise_spread"].as_f64().unwrap_or(f64::NAN)
            );
        }
        Command::Sweep { common, param, values, threads } => {
            let (config, out, _) = prepare(&common)?;
            let threads = commands::sweep_threads(threads);
            let (rows, written) = commands::sweep(&config, &param, &values, threads, &out)?;
            report(&written);
            for r in &rows {
                println!("{param} = {}: n_out = {:.6}", r.value, r.n_out);
            }
        }
        Command::Coeffs(common) => {
            let (config, out, _) = prepare(&common)?;
            let (_, written) = commands::coeffs(&config, &out)?;
            report(&written);
        }
        Command::Wigner { six, values } => {
            let (value, zero) = commands::wigner(six, &values)?;
            println!("{value:.17e}{}", if zero { " (exact zero)" } else { "" });
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
