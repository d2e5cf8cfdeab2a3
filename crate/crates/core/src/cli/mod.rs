//! `mkp` command line: load a scenario, run the check suite, report.

mod random;
mod run;
mod scenario;

use std::path::PathBuf;

use clap::Parser;

pub use random::{coefficient_pool, generate_random_clifford};
pub use run::{resolved_clifford, run_scenario, scenario_tau_table, CheckReport, ExitStatus, NegativeControl, Report, Stability};
pub use scenario::{
    CliffordSource, Coefficient, FactorEntry, Scenario, CHECK_IDS, DEFAULT_DEGREE, DEFAULT_K_TRUNC, DEFAULT_Z_MAX,
};

#[derive(Debug, Parser)]
#[command(name = "mkp", about = "Exact checks of the multicomponent KP hierarchy from fermionic tau-functions")]
pub struct Args {
    /// Scenario JSON file; without it the default three-component random scenario is used.
    #[arg(long)]
    pub scenario: Option<PathBuf>,
    /// Comma-separated check ids, or `all`. Overrides the scenario's suite.
    #[arg(long, value_delimiter = ',')]
    pub suite: Option<Vec<String>>,
    /// Write the JSON report here (`-` for stdout).
    #[arg(long)]
    pub report: Option<PathBuf>,
    /// Overrides the scenario seed.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Overrides the time-degree cap D.
    #[arg(long)]
    pub degree: Option<u32>,
    /// Corrupt the input on purpose: eps-sign or schur-coefficient.
    #[arg(long)]
    pub negative_control: Option<NegativeControl>,
    /// List check ids and exit.
    #[arg(long)]
    pub list_checks: bool,
}

impl Args {
    /// The scenario after command-line overrides.
    pub fn scenario(&self) -> crate::error::Result<Scenario> {
        let mut s = match &self.scenario {
            Some(path) => Scenario::load(path)?,
            None => Scenario::default_verification(0),
        };
        if let Some(suite) = &self.suite {
            s.suite = suite.clone();
        }
        if let Some(seed) = self.seed {
            s.seed = seed;
        }
        if let Some(d) = self.degree {
            s.degree = d;
        }
        Ok(s)
    }
}

/// Runs the CLI and returns the process exit code.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let args = match Args::try_parse_from(args) {
        Ok(a) => a,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitStatus::Config.code() } else { 0 };
        }
    };
    if args.list_checks {
        for id in CHECK_IDS {
            println!("{id}");
        }
        return 0;
    }
    let report = match args.scenario().and_then(|s| run_scenario(&s, args.negative_control)) {
        Ok(r) => r,
        Err(e) => {
            eprintln!("mkp: {e}");
            return ExitStatus::Config.code();
        }
    };
    match args.report.as_deref() {
        Some(p) if p.as_os_str() == "-" => println!("{}", report.to_json()),
        Some(p) => {
            if let Err(e) = std::fs::write(p, report.to_json()) {
                eprintln!("mkp: cannot write {}: {e}", p.display());
                return ExitStatus::Config.code();
            }
            print!("{}", report.to_human());
        }
        None => print!("{}", report.to_human()),
    }
    report.exit_code
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn overrides_apply() {
        let a = Args::try_parse_from(["mkp", "--suite", "bilinear,flow", "--seed", "9", "--degree", "5"]).unwrap();
        let s = a.scenario().unwrap();
        assert_eq!(s.suite, vec!["bilinear", "flow"]);
        assert_eq!((s.seed, s.degree), (9, 5));
        let a = Args::try_parse_from(["mkp", "--negative-control", "schur-coefficient"]).unwrap();
        assert_eq!(a.negative_control, Some(NegativeControl::SchurCoefficient));
        assert!(Args::try_parse_from(["mkp", "--negative-control", "nope"]).is_err());
    }

    #[test]
    fn bad_arguments_exit_with_config_code() {
        assert_eq!(main_with_args(["mkp", "--bogus"]), 2);
        assert_eq!(main_with_args(["mkp", "--scenario", "/nonexistent/s.json"]), 2);
    }
}
