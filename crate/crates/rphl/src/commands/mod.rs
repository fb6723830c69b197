//! The harness commands. Each produces one report section; `run` assembles
//! them into a [`RunReport`].

mod bounds;
mod domination;
mod identities;
mod photon;

use std::time::Instant;

pub use bounds::bound_scan;
pub use domination::{complex_field, domination, real_field};
pub use identities::verify_identities;
pub use photon::photon_checks;

use crate::config::{dimension_limit, ExperimentConfig, Setup};
use crate::error::{HarnessError, Result};
use crate::report::{Refusal, RunReport, Timing};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Command {
    VerifyIdentities,
    BoundScan,
    Domination,
    PhotonChecks,
    All,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::VerifyIdentities => "verify-identities",
            Command::BoundScan => "bound-scan",
            Command::Domination => "domination",
            Command::PhotonChecks => "photon-checks",
            Command::All => "all",
        }
    }

    fn includes(self, other: Command) -> bool {
        self == Command::All || self == other
    }
}

/// A finished run and the exit code it maps to.
#[derive(Debug, Clone)]
pub struct Outcome {
    pub report: RunReport,
    pub exit_code: i32,
}

/// Runs `cmd` under the dimension guard from the environment.
pub fn run(cmd: Command, cfg: &ExperimentConfig, seed: Option<u64>) -> Result<Outcome> {
    run_with_limit(cmd, cfg, seed, dimension_limit()?)
}

pub fn run_with_limit(
    cmd: Command,
    cfg: &ExperimentConfig,
    seed: Option<u64>,
    limit: usize,
) -> Result<Outcome> {
    let start = Instant::now();
    let mut cfg = cfg.clone();
    if let Some(s) = seed {
        cfg.scan.seed = s;
    }
    let setup = Setup::resolve(&cfg, limit)?;
    let mut report = RunReport {
        version: env!("CARGO_PKG_VERSION").to_string(),
        command: cmd.name().to_string(),
        seed: cfg.scan.seed,
        config: cfg.clone(),
        identities: None,
        bound_scan: None,
        domination: None,
        photon_checks: None,
        refusal: None,
        pass: true,
        timing: Timing::default(),
    };

    let result = (|| -> Result<()> {
        if cmd.includes(Command::VerifyIdentities) {
            let t = Instant::now();
            let s = verify_identities(&setup)?;
            report.pass &= s.pass;
            report.identities = Some(s);
            report
                .timing
                .sections
                .insert("identities".into(), t.elapsed().as_secs_f64());
        }
        if cmd.includes(Command::PhotonChecks) {
            let t = Instant::now();
            let s = photon_checks(&setup)?;
            report.pass &= s.pass;
            report.photon_checks = Some(s);
            report
                .timing
                .sections
                .insert("photon_checks".into(), t.elapsed().as_secs_f64());
        }
        if cmd.includes(Command::BoundScan) {
            let t = Instant::now();
            let s = bound_scan(&setup)?;
            report.pass &= s.pass;
            report.bound_scan = Some(s);
            report
                .timing
                .sections
                .insert("bound_scan".into(), t.elapsed().as_secs_f64());
        }
        if cmd.includes(Command::Domination) {
            let t = Instant::now();
            let s = domination(&setup, &cfg.scan)?;
            report.pass &= s.pass;
            report.domination = Some(s);
            report
                .timing
                .sections
                .insert("domination".into(), t.elapsed().as_secs_f64());
        }
        Ok(())
    })();

    let exit_code = match result {
        Ok(()) if report.pass => 0,
        Ok(()) => 2,
        Err(HarnessError::Refusal {
            reason,
            momentum,
            value,
        }) => {
            report.pass = false;
            report.refusal = Some(Refusal {
                reason,
                momentum,
                value,
            });
            3
        }
        Err(e) => return Err(e),
    };
    report.timing.total_seconds = start.elapsed().as_secs_f64();
    Ok(Outcome { report, exit_code })
}
