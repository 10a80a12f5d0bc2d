mod args;
mod eval;
mod manifest;
mod register;
mod segment;
mod synth;

use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{CommandFactory, FromArgMatches};

use crate::args::{Cli, Command};

const THREADS_VAR: &str = "LSR_REGISTER_THREADS";

const EXIT_USAGE: u8 = 1;
const EXIT_UNREGISTERED: u8 = 2;

fn init_threads() -> Result<()> {
    let Ok(v) = std::env::var(THREADS_VAR) else {
        return Ok(());
    };
    let n: usize = v
        .trim()
        .parse()
        .ok()
        .filter(|&n| n > 0)
        .with_context(|| format!("{THREADS_VAR}={v:?} is not a positive integer"))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()?;
    Ok(())
}

fn dispatch(cli: &Cli, matches: &clap::ArgMatches) -> Result<ExitCode> {
    init_threads()?;
    match &cli.command {
        Command::Register(a) => {
            let sub = matches
                .subcommand_matches("register")
                .expect("register matches");
            let report = register::run(a, sub)?;
            let level = report.level_used.map_or("-".to_string(), |l| l.to_string());
            let rmse = report
                .scaled_rmse
                .map_or("-".to_string(), |e| format!("{e:.4}"));
            println!(
                "{:?}: level {level}, scaled rmse {rmse}, {} survivors of {} matches",
                report.status,
                report.survivors.len(),
                report.initial.len()
            );
            if report.is_success() {
                Ok(ExitCode::SUCCESS)
            } else {
                Ok(ExitCode::from(EXIT_UNREGISTERED))
            }
        }
        Command::Segment(a) => segment::run(a).map(|_| ExitCode::SUCCESS),
        Command::Eval(a) => {
            let rows = eval::run(a)?;
            let cell = |v: Option<f64>| v.map_or("-".to_string(), |x| format!("{x:.3}"));
            println!("fixture,method,recall,precision,n_red,rms_all,rms_loo,bpp2");
            for r in rows {
                println!(
                    "{},{},{:.3},{:.3},{:.1},{},{},{}",
                    r.fixture,
                    r.method,
                    r.recall,
                    r.precision,
                    r.n_red,
                    cell(r.rms_all),
                    cell(r.rms_loo),
                    cell(r.bpp2)
                );
            }
            Ok(ExitCode::SUCCESS)
        }
        Command::MakeFixtures(a) => synth::make_fixtures(a).map(|_| ExitCode::SUCCESS),
        Command::Synth(a) => synth::synth(a).map(|_| ExitCode::SUCCESS),
    }
}

fn main() -> ExitCode {
    let matches = match Cli::command().try_get_matches() {
        Ok(m) => m,
        Err(e) if e.use_stderr() => {
            let _ = e.print();
            return ExitCode::from(EXIT_USAGE);
        }
        Err(e) => e.exit(),
    };
    let cli = match Cli::from_arg_matches(&matches) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(EXIT_USAGE);
        }
    };
    match dispatch(&cli, &matches) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(EXIT_USAGE)
        }
    }
}
