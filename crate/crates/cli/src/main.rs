//! `netosc`: command-line front end. Every subcommand prints one JSON summary
//! on stdout and writes its tabular results as CSV files.
//!
//! Exit codes: 0 success, 1 usage error, 2 data error, 3 numerical failure.

mod commands;
mod report;

use std::io::Write;

use clap::{Parser, Subcommand};

use commands::*;
use report::{CliError, Report};

#[derive(Parser, Debug)]
#[command(name = "netosc", version, about = "Oscillation-model analysis of directed social networks")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Laplacian, symmetrizability verdict, Gershgorin disk and spectrum
    AnalyzeGraph(AnalyzeGraphArgs),
    /// Modal and numerical trajectories with the total energy series
    Simulate(SimulateArgs),
    /// Oscillation-energy centralities
    Centrality(CentralityArgs),
    /// Onset of non-real eigenvalues along lap0 + eps * lap_oneway
    CriticalEps(CriticalEpsArgs),
    /// Per-eps spectrum and amplitude records
    Sweep(SweepArgs),
    /// Normalized, smoothed spectrum of a series
    Spectrum(SpectrumArgs),
    /// Count events per fixed interval
    Bin(BinArgs),
    /// Chain overlapping max-100 trend segments
    FuseTrends(FuseTrendsArgs),
    /// Two-tone beat demonstration (ten CSV files)
    BeatDemo(BeatDemoArgs),
    /// Low-frequency shares of several periods of one series
    ComparePeriods(ComparePeriodsArgs),
    /// Seeded random graph document
    Generate(GenerateArgs),
}

fn dispatch(command: &Command) -> (&'static str, Result<Report, CliError>) {
    macro_rules! run {
        ($name:literal, $args:expr, $f:path) => {{
            let mut report = Report::new($name, $args);
            ($name, $f($args, &mut report).map(|_| report))
        }};
    }
    match command {
        Command::AnalyzeGraph(a) => run!("analyze-graph", a, analyze_graph),
        Command::Simulate(a) => run!("simulate", a, simulate),
        Command::Centrality(a) => run!("centrality", a, centrality),
        Command::CriticalEps(a) => run!("critical-eps", a, critical_eps),
        Command::Sweep(a) => run!("sweep", a, sweep),
        Command::Spectrum(a) => run!("spectrum", a, spectrum),
        Command::Bin(a) => run!("bin", a, bin),
        Command::FuseTrends(a) => run!("fuse-trends", a, fuse),
        Command::BeatDemo(a) => run!("beat-demo", a, beat),
        Command::ComparePeriods(a) => run!("compare-periods", a, compare_periods),
        Command::Generate(a) => run!("generate", a, generate),
    }
}

fn main() {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            std::process::exit(code);
        }
    };
    let (name, outcome) = dispatch(&cli.command);
    let (json, code) = match outcome {
        Ok(report) => (report.to_json(), 0),
        Err(e) => (e.to_json(name), e.exit_code()),
    };
    let text = serde_json::to_string_pretty(&json).expect("summary serializes");
    // a closed stdout (e.g. `| head`) must not turn into a panic
    let _ = writeln!(std::io::stdout().lock(), "{text}");
    std::process::exit(code);
}
