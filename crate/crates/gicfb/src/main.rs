use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::Context;
use clap::{Args, Parser, Subcommand};
use gicfb::gdof::gdof_table;
use gicfb::report;
use gicfb::sweep::{self, SweepSpec};
use gicfb::trajectory;
use gicfb_core::montecarlo::{moment_check, run_batch_with, DEFAULT_SEED, DEFAULT_STEPS, DEFAULT_TRIALS};
use gicfb_core::rate::{best_at, kramer_solution, rho_max, symmetric_rate, DEFAULT_GRID_STEP};
use gicfb_core::{power_check, ChannelParams, Error, HalfWidthRule, SimConfig};

const EXIT_DOMAIN: u8 = 3;
const EXIT_INVARIANT: u8 = 4;

/// Moment trajectories must match the schedule to this many standard errors,
/// Bonferroni-adjusted for the number of compared points.
const MOMENT_FAMILY_ALPHA: f64 = 0.01;
/// Time-averaged power may exceed P by this fraction.
const POWER_TOLERANCE: f64 = 0.01;

#[derive(Parser)]
#[command(name = "gicfb", version, about = "Feedback coding for the symmetric Gaussian interference channel")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone, Copy)]
struct ChannelArgs {
    /// Interference gain a.
    #[arg(long = "a", allow_negative_numbers = true)]
    a: f64,
    /// SNR in dB (P = 10^(snr/10)).
    #[arg(long, allow_negative_numbers = true, conflicts_with = "power", required_unless_present = "power")]
    snr_db: Option<f64>,
    /// Linear power P, instead of --snr-db.
    #[arg(long, allow_negative_numbers = true)]
    power: Option<f64>,
}

impl ChannelArgs {
    fn channel(&self) -> Result<ChannelParams, Error> {
        match (self.power, self.snr_db) {
            (Some(p), _) => ChannelParams::new(self.a, p),
            (None, Some(db)) => ChannelParams::from_snr_db(self.a, db),
            (None, None) => unreachable!("clap requires one of --power / --snr-db"),
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Achievable symmetric rate and optimum (rho, b, beta).
    Rate {
        #[command(flatten)]
        channel: ChannelArgs,
        #[arg(long, default_value_t = DEFAULT_GRID_STEP, allow_negative_numbers = true)]
        grid_step: f64,
    },
    /// Rate versus alpha = log INR / log SNR at fixed SNR, as CSV.
    Sweep {
        #[arg(long, allow_negative_numbers = true)]
        snr_db: f64,
        #[arg(long, default_value_t = 0.5, allow_negative_numbers = true)]
        alpha_min: f64,
        #[arg(long, default_value_t = 2.5, allow_negative_numbers = true)]
        alpha_max: f64,
        #[arg(long, default_value_t = 0.1, allow_negative_numbers = true)]
        alpha_step: f64,
        #[arg(long, default_value_t = DEFAULT_GRID_STEP, allow_negative_numbers = true)]
        grid_step: f64,
        /// Use the negative interference gain.
        #[arg(long)]
        negative_a: bool,
        /// Output file; stdout when absent.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Finite-SNR degrees-of-freedom ratio R_sym / log2(SNR).
    Gdof {
        #[arg(long, default_value_t = 2.0, allow_negative_numbers = true)]
        alpha: f64,
        /// Linear powers.
        #[arg(long, value_delimiter = ',', default_values_t = [1e2, 1e4, 1e6], allow_negative_numbers = true)]
        powers: Vec<f64>,
        #[arg(long, default_value_t = DEFAULT_GRID_STEP, allow_negative_numbers = true)]
        grid_step: f64,
    },
    /// Monte Carlo run of the encoder/decoder pair.
    Simulate {
        #[command(flatten)]
        channel: ChannelArgs,
        /// Steady correlation; the rate-optimal value when absent.
        #[arg(long, allow_negative_numbers = true)]
        rho: Option<f64>,
        #[arg(long, default_value_t = DEFAULT_STEPS)]
        steps: usize,
        #[arg(long, default_value_t = DEFAULT_TRIALS)]
        trials: usize,
        #[arg(long, default_value_t = DEFAULT_SEED)]
        seed: u64,
        /// Target rate R for the geometric half-width rule; 0.8 R_sym when absent.
        #[arg(long, conflicts_with = "half_width")]
        target_rate: Option<f64>,
        /// Fixed half-width h instead of the geometric rule.
        #[arg(long, allow_negative_numbers = true)]
        half_width: Option<f64>,
        #[arg(long, default_value_t = DEFAULT_GRID_STEP, allow_negative_numbers = true)]
        grid_step: f64,
        /// Force all channel noise to zero.
        #[arg(long)]
        zero_noise: bool,
        /// Write per-step trajectories as CSV.
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

enum Failure {
    Domain(Error),
    Invariant(String),
    Other(anyhow::Error),
}

impl From<anyhow::Error> for Failure {
    fn from(e: anyhow::Error) -> Self {
        match e.downcast::<Error>() {
            Ok(core) => core.into(),
            Err(other) => Failure::Other(other),
        }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::Domain { .. }
            | Error::Infeasible { .. }
            | Error::DegenerateChannel
            | Error::BootstrapInfeasible { .. } => Failure::Domain(e),
            other => Failure::Other(other.into()),
        }
    }
}

impl From<io::Error> for Failure {
    fn from(e: io::Error) -> Self {
        Failure::Other(e.into())
    }
}

fn open_output(path: &Option<PathBuf>) -> anyhow::Result<Box<dyn Write>> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(
            File::create(p).with_context(|| format!("cannot create {}", p.display()))?,
        )),
        None => Box::new(BufWriter::new(io::stdout().lock())),
    })
}

fn run(cli: Cli) -> Result<(), Failure> {
    match cli.command {
        Command::Rate { channel, grid_step } => {
            let ch = channel.channel()?;
            let ours = symmetric_rate(&ch, grid_step)?;
            let kramer = if ch.a() == 0.0 { None } else { Some(kramer_solution(&ch)?) };
            print!("{}", report::rate_report(&ch, &ours, kramer.as_ref()));
        }
        Command::Sweep { snr_db, alpha_min, alpha_max, alpha_step, grid_step, negative_a, out } => {
            let spec = SweepSpec { snr_db, alpha_min, alpha_max, alpha_step, grid_step, negative_a };
            let rows = sweep::run_sweep(&spec)?;
            let mut w = open_output(&out)?;
            sweep::write_csv(&rows, &mut w)?;
            w.flush()?;
        }
        Command::Gdof { alpha, powers, grid_step } => {
            let rows = gdof_table(alpha, &powers, grid_step)?;
            print!("{}", report::gdof_report(alpha, &rows));
        }
        Command::Simulate {
            channel, rho, steps, trials, seed, target_rate, half_width, grid_step, zero_noise, out,
        } => {
            let ch = channel.channel()?;
            let rho = match rho {
                Some(r) => {
                    if ch.a() != 0.0 {
                        let bound = rho_max(&ch)?;
                        if r > bound {
                            return Err(Error::Infeasible { rho: r, rho_max: bound }.into());
                        }
                    }
                    r
                }
                None => symmetric_rate(&ch, grid_step)?.solution.rho,
            };
            let steady_rate = best_at(rho, &ch)?.rate_bits_per_use();
            let rule = match (half_width, target_rate) {
                (Some(h), _) => HalfWidthRule::Fixed(h),
                (None, Some(r)) => HalfWidthRule::Geometric { target_rate: r },
                (None, None) => HalfWidthRule::Geometric { target_rate: 0.8 * steady_rate },
            };
            let cfg = SimConfig {
                ch,
                rho,
                n_steps: steps,
                trials,
                seed,
                half_width: rule,
                zero_noise,
            };
            let sched = cfg.schedule()?;
            let stats = run_batch_with(&cfg, &sched)?;
            let moments = moment_check(&stats, &sched, 1..=steps);
            let power_avg = power_check(&stats);
            print!("{}", report::simulate_report(&cfg, &sched, &stats, &moments, power_avg));
            if let Some(path) = &out {
                let mut w = open_output(&Some(path.clone()))?;
                trajectory::write_csv(&stats, &sched, &mut w)?;
                w.flush()?;
            }

            let mut failures = Vec::new();
            if !zero_noise {
                // Two users' powers plus the correlation at every step.
                let k_se = bonferroni_z(MOMENT_FAMILY_ALPHA, 3 * steps);
                if !moments.passes(k_se) {
                    failures.push(format!("moment trajectories deviate beyond {k_se:.2} SE"));
                }
                if power_avg > ch.power() * (1.0 + POWER_TOLERANCE) {
                    failures.push(format!("average power {power_avg} exceeds P(1 + {POWER_TOLERANCE})"));
                }
            }
            if stats.trials_invalid > 0 {
                failures.push(format!("{} trials overflowed", stats.trials_invalid));
            }
            if !failures.is_empty() {
                return Err(Failure::Invariant(failures.join("; ")));
            }
            println!("invariants: ok");
        }
    }
    Ok(())
}

/// Two-sided normal quantile for a family-wise level split over `m` tests.
fn bonferroni_z(family_alpha: f64, m: usize) -> f64 {
    let p = 1.0 - family_alpha / (2.0 * m.max(1) as f64);
    let p = gicfb_core::Probability::open(p).expect("quantile level inside (0, 1)");
    gicfb_core::std_normal_inv_cdf(p).expect("valid probability")
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Domain(e)) => {
            eprintln!("error: {e}");
            ExitCode::from(EXIT_DOMAIN)
        }
        Err(Failure::Invariant(msg)) => {
            eprintln!("invariant failure: {msg}");
            ExitCode::from(EXIT_INVARIANT)
        }
        Err(Failure::Other(e)) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
