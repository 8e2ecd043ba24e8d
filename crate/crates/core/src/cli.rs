//! Command-line front end.
//!
//! Exit codes: 0 on success, 2 when the input data are degenerate (a
//! non-positive denominator or `Y` hitting zero), 1 for every other error.

use std::ffi::OsString;
use std::fs::File;
use std::io::{BufReader, BufWriter, Write};
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};
use serde::Serialize;

use crate::asymptotics::{moments_by_simulation, variance_orderings};
use crate::error::{Error, Result};
use crate::estimate::{Estimator, Observation};
use crate::experiment::{run_experiment, ExperimentConfig};
use crate::model::{default_t_max, stationary_char, stationary_moments_closed, ModelParams, DEFAULT_RICCATI_STEP};
use crate::output::to_json;
use crate::sim::{simulate, simulate_stationary_start, GridSpec, RngStream, SamplePath, Scheme};
use crate::stats::sufficient_stats;

#[derive(Debug, Parser)]
#[command(name = "affine2f", version, about = "Simulate and estimate a two-factor affine diffusion")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Args, Clone, Copy)]
struct ModelArgs {
    #[arg(long, default_value_t = 1.0, allow_negative_numbers = true)]
    a: f64,
    #[arg(long, default_value_t = 1.0, allow_negative_numbers = true)]
    b: f64,
    #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
    m: f64,
    #[arg(long, default_value_t = 1.0, allow_negative_numbers = true)]
    theta: f64,
}

impl ModelArgs {
    fn params(&self) -> Result<ModelParams> {
        ModelParams::new(self.a, self.b, self.m, self.theta)
    }
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Simulate one path and write it as CSV (`t,y,x`).
    Simulate {
        #[command(flatten)]
        model: ModelArgs,
        #[arg(long, default_value_t = 1.0)]
        y0: f64,
        #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
        x0: f64,
        /// Draw Y0 from the stationary law instead of using --y0/--x0.
        #[arg(long)]
        stationary: bool,
        /// Burn-in length used with --stationary.
        #[arg(long, default_value_t = 0.0)]
        burn_in: f64,
        #[arg(long = "T")]
        t_end: f64,
        #[arg(long, default_value_t = 0.01)]
        dt: f64,
        #[arg(long, default_value = "exact")]
        scheme: Scheme,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 0)]
        stream: u64,
        /// Output file; standard output when omitted.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Estimate drift parameters from a CSV path.
    Estimate {
        #[arg(long = "in")]
        input: PathBuf,
        #[arg(long)]
        estimator: Estimator,
        /// Known m; required by mle_theta and lse_theta, optional for lse_discrete.
        #[arg(long, allow_negative_numbers = true)]
        m_known: Option<f64>,
        /// Observation spacing for lse_discrete (a multiple of the path step).
        #[arg(long)]
        discrete_spacing: Option<f64>,
        /// Also print the sufficient statistics.
        #[arg(long)]
        stats: bool,
    },
    /// Stationary moments, in closed form or from a long simulation.
    Moments {
        #[command(flatten)]
        model: ModelArgs,
        #[arg(long, conflicts_with = "simulate", required_unless_present = "simulate")]
        closed: bool,
        #[arg(long)]
        simulate: bool,
        #[arg(long = "T", default_value_t = 1e4)]
        t_total: f64,
        #[arg(long, default_value_t = 0.01)]
        dt: f64,
        #[arg(long, default_value_t = 100.0)]
        burn_in: f64,
        #[arg(long, default_value_t = 1)]
        seed: u64,
    },
    /// Run a Monte Carlo experiment described by a JSON config.
    Experiment {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Characteristic function of the stationary law.
    Char {
        #[command(flatten)]
        model: ModelArgs,
        #[arg(long, default_value_t = 0.0)]
        lambda1: f64,
        #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
        lambda2: f64,
        #[arg(long)]
        t_max: Option<f64>,
        #[arg(long, default_value_t = DEFAULT_RICCATI_STEP)]
        h: f64,
    },
}

fn write_out(out: Option<&PathBuf>, text: &str) -> Result<()> {
    match out {
        Some(path) => std::fs::write(path, text).map_err(|e| Error::Io(format!("{}: {e}", path.display()))),
        None => {
            let mut stdout = std::io::stdout().lock();
            stdout.write_all(text.as_bytes())?;
            stdout.flush()?;
            Ok(())
        }
    }
}

fn print_json<T: Serialize>(value: &T) -> Result<()> {
    write_out(None, &to_json(value)?)
}

#[derive(Serialize)]
struct MomentsOutput {
    closed: crate::model::StationaryMoments,
    #[serde(skip_serializing_if = "Option::is_none")]
    simulated: Option<crate::asymptotics::SimulatedMoments>,
    #[serde(skip_serializing_if = "Option::is_none")]
    combined: Option<crate::model::StationaryMoments>,
    #[serde(skip_serializing_if = "Option::is_none")]
    orderings: Option<crate::asymptotics::VarianceOrderings>,
}

#[derive(Serialize)]
struct CharOutput {
    lambda1: f64,
    lambda2: f64,
    re: f64,
    im: f64,
    modulus: f64,
    t_max: f64,
    tail_bound: f64,
}

#[derive(Serialize)]
struct EstimateOutput {
    #[serde(flatten)]
    report: crate::estimate::EstimateReport,
    #[serde(skip_serializing_if = "Option::is_none")]
    stats: Option<crate::stats::SufficientStats>,
}

/// Outcome of a command that ran but found degenerate data.
struct Degenerate;

fn execute(cmd: Command) -> Result<std::result::Result<(), Degenerate>> {
    match cmd {
        Command::Simulate { model, y0, x0, stationary, burn_in, t_end, dt, scheme, seed, stream, out } => {
            let p = model.params()?;
            let grid = GridSpec::new(t_end, dt)?;
            let rng = RngStream::new(seed, stream);
            let path = if stationary {
                simulate_stationary_start(&p, grid, burn_in, scheme, rng)?
            } else {
                simulate(&p, y0, x0, grid, scheme, rng)?
            };
            match out {
                Some(file) => {
                    let f = File::create(&file).map_err(|e| Error::Io(format!("{}: {e}", file.display())))?;
                    path.write_csv(BufWriter::new(f))?;
                }
                None => path.write_csv(BufWriter::new(std::io::stdout().lock()))?,
            }
        }
        Command::Estimate { input, estimator, m_known, discrete_spacing, stats } => {
            let f = File::open(&input).map_err(|e| Error::Io(format!("{}: {e}", input.display())))?;
            let path = SamplePath::read_csv(BufReader::new(f))?;
            if estimator.needs_known_m() && m_known.is_none() {
                return Err(Error::Config(format!("{estimator} needs --m-known")));
            }
            let s = match sufficient_stats(&path) {
                Ok(s) => s,
                Err(e) if e.is_degenerate_input() => {
                    eprintln!("error: {e}");
                    return Ok(Err(Degenerate));
                }
                Err(e) => return Err(e),
            };
            let obs = Observation { stats: &s, x: &path.x, dt: path.grid.dt, discrete_spacing };
            let report = estimator.apply(&obs, m_known)?;
            let valid = report.valid;
            print_json(&EstimateOutput { report, stats: stats.then_some(s) })?;
            if !valid {
                return Ok(Err(Degenerate));
            }
        }
        Command::Moments { model, closed: _, simulate, t_total, dt, burn_in, seed } => {
            let p = model.params()?;
            let closed = stationary_moments_closed(&p)?;
            let output = if simulate {
                let sim = moments_by_simulation(&p, t_total, dt, burn_in, RngStream::new(seed, 0))?;
                for w in &sim.warnings {
                    eprintln!("warning: {w}");
                }
                let combined = sim.combined();
                let orderings = variance_orderings(&combined).ok();
                MomentsOutput { closed, simulated: Some(sim), combined: Some(combined), orderings }
            } else {
                MomentsOutput { closed, simulated: None, combined: None, orderings: None }
            };
            print_json(&output)?;
        }
        Command::Experiment { config, out } => {
            let text = std::fs::read_to_string(&config).map_err(|e| Error::Io(format!("{}: {e}", config.display())))?;
            let cfg = ExperimentConfig::from_json(&text)?;
            let report = run_experiment(&cfg)?;
            for w in &report.warnings {
                eprintln!("warning: {w}");
            }
            write_out(out.as_ref(), &to_json(&report)?)?;
        }
        Command::Char { model, lambda1, lambda2, t_max, h } => {
            let p = model.params()?;
            let t_max = t_max.unwrap_or_else(|| default_t_max(&p));
            let c = stationary_char(&p, lambda1, lambda2, t_max, h)?;
            print_json(&CharOutput {
                lambda1,
                lambda2,
                re: c.re,
                im: c.im,
                modulus: c.modulus(),
                t_max: c.t_max,
                tail_bound: c.tail_bound,
            })?;
        }
    }
    Ok(Ok(()))
}

/// Parse `argv` (including the program name), run, and return the exit code.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    match execute(cli.command) {
        Ok(Ok(())) => 0,
        Ok(Err(Degenerate)) => 2,
        Err(e) => {
            eprintln!("error: {e}");
            if e.is_degenerate_input() {
                2
            } else {
                1
            }
        }
    }
}
