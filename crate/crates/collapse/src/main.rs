use clap::{Parser, Subcommand, ValueEnum};
use collapse::cli::commands::{self, CurveKind};
use collapse::model::{ForceSign, ModelParams};

/// Numerical laboratory for finite-time collapse of self-attracting
/// compressible flows.
#[derive(Parser)]
#[command(name = "collapse", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum Kind {
    /// Volume-averaged divergence curve (tangent closed form).
    Integration,
    /// Center-characteristic curve (rational closed form).
    Pointwise,
}

#[derive(Subcommand)]
enum Command {
    /// Print closed-form blowup-time predictions for given initial data.
    Predict {
        /// Spatial dimension N.
        #[arg(long, default_value_t = 3)]
        dim: usize,
        /// Force sign: -1 attractive, 0 free, +1 repulsive.
        #[arg(long, default_value_t = -1, allow_hyphen_values = true)]
        delta: i64,
        /// Field coupling override (defaults from the dimension).
        #[arg(long)]
        alpha: Option<f64>,
        /// Initial volume-averaged divergence H0.
        #[arg(long, allow_hyphen_values = true)]
        h0: f64,
        /// Fixed support volume.
        #[arg(long)]
        volume: f64,
        /// Total mass.
        #[arg(long)]
        mass: f64,
    },
    /// Dump closed form vs numeric comparison-curve values as CSV.
    Riccati {
        /// Which comparison curve to integrate.
        #[arg(long, value_enum)]
        kind: Kind,
        /// Initial curve value H0.
        #[arg(long, allow_hyphen_values = true)]
        h0: f64,
        /// Fixed support volume (integration kind).
        #[arg(long, default_value_t = 1.0)]
        volume: f64,
        /// Constant forcing, coupling times mass (integration kind).
        #[arg(long, default_value_t = 1.0)]
        forcing: f64,
        /// Spatial dimension N (pointwise kind).
        #[arg(long, default_value_t = 3)]
        dim: usize,
        /// Integrator step.
        #[arg(long, default_value_t = 1e-4)]
        dt: f64,
        /// End of the integration window.
        #[arg(long)]
        t_end: f64,
        /// |H| above this counts as numerical escape.
        #[arg(long, default_value_t = 1e9)]
        escape: f64,
    },
    /// Run a shell simulation from a config file; write trace and report.
    Simulate {
        /// Path to the run config document.
        #[arg(long)]
        config: String,
    },
    /// Evaluate the pressure functional against the force threshold.
    Functional {
        /// Path to the run config document (density and model sections).
        #[arg(long)]
        config: String,
        /// Slack constant in the threshold test.
        #[arg(long)]
        epsilon: f64,
        /// Lower end of the integration domain (default: 0).
        #[arg(long)]
        domain_lo: Option<f64>,
        /// Upper end of the integration domain (default: support radius).
        #[arg(long)]
        domain_hi: Option<f64>,
    },
    /// Tabulate the radial kernel and, with a config, the field it induces.
    Greens {
        /// Spatial dimension N.
        #[arg(long, default_value_t = 3)]
        dim: usize,
        /// First tabulated radius (default: 0 in 1-D, one spacing otherwise).
        #[arg(long)]
        r_min: Option<f64>,
        /// Last tabulated radius.
        #[arg(long)]
        r_max: f64,
        /// Number of table rows.
        #[arg(long, default_value_t = 50)]
        rows: usize,
        /// Optional config supplying a density profile.
        #[arg(long)]
        config: Option<String>,
    },
}

fn run(cli: Cli) -> collapse::Result<String> {
    match cli.command {
        Command::Predict {
            dim,
            delta,
            alpha,
            h0,
            volume,
            mass,
        } => {
            let mut params = ModelParams::pressureless(dim, ForceSign::from_int(delta)?)?;
            if let Some(alpha) = alpha {
                params = params.with_coupling(alpha)?;
            }
            commands::cmd_predict(&params, h0, volume, mass)
        }
        Command::Riccati {
            kind,
            h0,
            volume,
            forcing,
            dim,
            dt,
            t_end,
            escape,
        } => {
            let kind = match kind {
                Kind::Integration => CurveKind::Integration,
                Kind::Pointwise => CurveKind::Pointwise,
            };
            commands::cmd_riccati(kind, h0, volume, forcing, dim, dt, t_end, escape)
        }
        Command::Simulate { config } => commands::cmd_simulate(&config),
        Command::Functional {
            config,
            epsilon,
            domain_lo,
            domain_hi,
        } => commands::cmd_functional(&config, epsilon, domain_lo, domain_hi),
        Command::Greens {
            dim,
            r_min,
            r_max,
            rows,
            config,
        } => commands::cmd_greens(dim, r_min, r_max, rows, config.as_deref()),
    }
}

fn main() -> std::process::ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(doc) => {
            // a closed pipe downstream (`collapse riccati ... | head`) is the
            // consumer's business, not a failure of the run
            use std::io::Write;
            match std::io::stdout().write_all(doc.as_bytes()) {
                Ok(()) => std::process::ExitCode::SUCCESS,
                Err(e) if e.kind() == std::io::ErrorKind::BrokenPipe => {
                    std::process::ExitCode::SUCCESS
                }
                Err(e) => {
                    eprintln!("error: {e}");
                    std::process::ExitCode::FAILURE
                }
            }
        }
        Err(e) => {
            eprintln!("error: {e}");
            std::process::ExitCode::FAILURE
        }
    }
}
