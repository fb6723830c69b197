use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use rphl::{run, Command, ExperimentConfig, HarnessError, RunReport};

#[derive(Parser)]
#[command(
    name = "rphl",
    version,
    about = "Exact-diagonalization checks for the Hubbard model coupled to photons"
)]
struct Cli {
    #[command(subcommand)]
    command: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// CAR, hole-particle and Peierls identities.
    VerifyIdentities(Args),
    /// Susceptibility bound over every temperature and grid momentum.
    BoundScan(Args),
    /// Partition-function ratios for random source fields.
    Domination(Args),
    /// Planck and Euclidean checks of the truncated photon sector.
    PhotonChecks(Args),
    /// Every check above.
    All(Args),
}

#[derive(clap::Args)]
struct Args {
    /// Experiment configuration (JSON).
    #[arg(long)]
    config: PathBuf,
    /// Report path; defaults to the configuration's `output`, else stdout.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Overrides `scan.seed`.
    #[arg(long)]
    seed: Option<u64>,
    /// Also write the per-momentum table as CSV.
    #[arg(long)]
    csv: Option<PathBuf>,
}

fn summary(report: &RunReport) {
    let mark = |ok: bool| if ok { "PASS" } else { "FAIL" };
    if let Some(s) = &report.identities {
        eprintln!(
            "[{}] identities: car {:.1e}, hole-particle {:.1e}",
            mark(s.pass),
            s.car_residual,
            s.hole_particle_residual
        );
    }
    if let Some(s) = &report.photon_checks {
        eprintln!(
            "[{}] photon-checks: {} mode records",
            mark(s.pass),
            s.modes.len()
        );
    }
    if let Some(s) = &report.bound_scan {
        let worst = s
            .records
            .iter()
            .map(|r| r.chi_times_u)
            .fold(f64::MIN, f64::max);
        eprintln!("[{}] bound-scan: max chi*U_hat = {worst:.6}", mark(s.pass));
    }
    if let Some(s) = &report.domination {
        let worst = s
            .records
            .iter()
            .map(|r| r.ratio_max)
            .fold(f64::MIN, f64::max);
        eprintln!("[{}] domination: max Z(h)/Z(0) = {worst:.6}", mark(s.pass));
    }
    if let Some(r) = &report.refusal {
        eprintln!("[REFUSED] {}", r.reason);
    }
}

fn execute(cmd: Command, args: &Args) -> Result<i32, HarnessError> {
    let cfg = ExperimentConfig::load(&args.config)?;
    let outcome = run(cmd, &cfg, args.seed)?;
    let json = outcome.report.to_json();
    match args.out.as_ref().or(cfg.output.as_ref()) {
        Some(path) => std::fs::write(path, json + "\n")?,
        None => println!("{json}"),
    }
    if let Some(path) = &args.csv {
        std::fs::write(path, outcome.report.bound_csv())?;
    }
    summary(&outcome.report);
    Ok(outcome.exit_code)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (cmd, args) = match &cli.command {
        Cmd::VerifyIdentities(a) => (Command::VerifyIdentities, a),
        Cmd::BoundScan(a) => (Command::BoundScan, a),
        Cmd::Domination(a) => (Command::Domination, a),
        Cmd::PhotonChecks(a) => (Command::PhotonChecks, a),
        Cmd::All(a) => (Command::All, a),
    };
    let code = execute(cmd, args).unwrap_or_else(|e| {
        eprintln!("rphl: {e}");
        e.exit_code()
    });
    ExitCode::from(code as u8)
}
