//! `grl`: command-line checks for Green-function rigidity of the round
//! sphere. Every subcommand prints a JSON report and exits 0 when all of its
//! checks pass, 1 when one fails and 2 on bad input.

mod args;
mod cmd;
mod report;

use std::process::ExitCode;
use std::time::{Instant, SystemTime, UNIX_EPOCH};

use clap::{Parser, Subcommand};
use serde_json::json;

use args::ReportArgs;
use report::{write_text, Report};

#[derive(Debug, Parser)]
#[command(name = "grl", version, about = "Numerical checks for Green-function rigidity of the round sphere")]
struct Cli {
    #[command(flatten)]
    report: ReportArgs,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Build or load a mesh and check Gauss–Bonnet, star shape and curvature
    Mesh(cmd::mesh::MeshArgs),
    /// Solve for the discrete Green function and fit its logarithmic constant
    Green(cmd::green::GreenArgs),
    /// Pointwise rigidity identities on closed-form or mesh samples
    Rigidity(cmd::rigidity::RigidityArgs),
    /// Latitude ODE: shooting, residuals and the linearised operator
    #[command(subcommand)]
    Ode(cmd::ode::OdeCommand),
    /// Hemisphere PDE: residuals, Newton solves, asymptotics and lemmas
    #[command(subcommand)]
    Pde(cmd::pde::PdeCommand),
    /// Moving-plane reflection sweep on a radial solution
    MovingPlane(cmd::pde::MovingPlaneArgs),
    /// Kelvin transform: conformality and curvature correspondence
    Kelvin(cmd::kelvin::KelvinArgs),
    /// Run a battery of checks across all modules
    Suite(cmd::suite::SuiteArgs),
}

fn dispatch(cli: &Cli) -> anyhow::Result<Report> {
    let seed = cli.report.seed;
    match &cli.command {
        Command::Mesh(a) => cmd::mesh::run(a),
        Command::Green(a) => cmd::green::run(a),
        Command::Rigidity(a) => cmd::rigidity::run(a, seed),
        Command::Ode(c) => cmd::ode::run(c),
        Command::Pde(c) => cmd::pde::run(c, seed),
        Command::MovingPlane(a) => cmd::pde::moving_plane(a, seed),
        Command::Kelvin(a) => cmd::kelvin::run(a, seed),
        Command::Suite(a) => cmd::suite::run(a, seed, args::thread_cap()?),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let start = Instant::now();
    let report = match dispatch(&cli) {
        Ok(r) => r,
        Err(e) => {
            eprintln!("error: {e:#}");
            return ExitCode::from(2);
        }
    };
    let meta = (!cli.report.no_meta).then(|| {
        json!({
            "version": env!("CARGO_PKG_VERSION"),
            "seed": cli.report.seed,
            "threads": args::thread_cap().ok(),
            "elapsedSeconds": start.elapsed().as_secs_f64(),
            "unixTime": SystemTime::now().duration_since(UNIX_EPOCH).map_or(0, |d| d.as_secs()),
            "argv": std::env::args().collect::<Vec<_>>(),
        })
    });
    let written = write_text(cli.report.out.as_deref(), &report.to_json(meta)).and_then(|()| match &cli.report.csv {
        Some(p) => write_text(Some(p), &report.csv_text()),
        None => Ok(()),
    });
    if let Err(e) = written {
        eprintln!("error: {e:#}");
        return ExitCode::from(2);
    }
    if report.pass() {
        ExitCode::SUCCESS
    } else {
        eprintln!("failed checks: {}", report.failed().join(", "));
        ExitCode::from(1)
    }
}
