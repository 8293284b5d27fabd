use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use sparsedom::harness::{demo_scenario, load_scenarios, run_scenarios, write_outputs, Pipeline, RunFlags, RunSummary};
use sparsedom::Error;

#[derive(Parser)]
#[command(name = "sparsedom", version, about = "Sparse domination and matrix-weighted bounds on finite spaces")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Space, weight and operator constants of each instance.
    Constants(Flags),
    /// Constants and the sparse decomposition with its certificates.
    Decompose(Flags),
    /// The full pipeline including the weighted bounds.
    Verify(Flags),
    /// The built-in Petermichl scenario.
    Demo(DemoFlags),
}

#[derive(Args)]
struct Flags {
    #[arg(long)]
    scenario: PathBuf,
    #[command(flatten)]
    common: Common,
}

#[derive(Args)]
struct DemoFlags {
    #[command(flatten)]
    common: Common,
}

#[derive(Args)]
struct Common {
    #[arg(long)]
    seed: Option<u64>,
    /// Directory for report.csv and summary.json.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Stop at the first failed certificate.
    #[arg(long)]
    certify: bool,
    /// Instances per scenario.
    #[arg(long)]
    campaign: Option<usize>,
}

fn flags(pipeline: Pipeline, c: &Common) -> RunFlags {
    RunFlags { pipeline, seed: c.seed, campaign: c.campaign, certify: c.certify, out: c.out.clone(), threads: 0 }
}

fn print(summary: &RunSummary) {
    let passed = summary.certificates.iter().filter(|c| c.pass).count();
    println!("instances {} certificates {}/{}", summary.instances, passed, summary.certificates.len());
    for d in &summary.decompositions {
        println!("decomposition {} seed {}: cubes {} kappa {:.6e} certified {}", d.scenario_id, d.seed, d.cubes, d.kappa, d.certified);
    }
    for s in &summary.scalings {
        println!("a2 {} seed {}: slope {:.4} over {:.2} decades", s.scenario_id, s.seed, s.scaling.slope, s.decades);
    }
    for (k, v) in &summary.campaign_maxima {
        println!("max ratio {k}: {v:.6e}");
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (scenarios, flags) = match &cli.command {
        Command::Demo(d) => (Ok(demo_scenario()), flags(Pipeline::Verify, &d.common)),
        Command::Constants(f) => (load_scenarios(&f.scenario), flags(Pipeline::Constants, &f.common)),
        Command::Decompose(f) => (load_scenarios(&f.scenario), flags(Pipeline::Decompose, &f.common)),
        Command::Verify(f) => (load_scenarios(&f.scenario), flags(Pipeline::Verify, &f.common)),
    };
    let scenarios = match scenarios {
        Ok(s) => s,
        Err(e @ Error::Parse(_)) => {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::FAILURE;
        }
    };
    let summary = run_scenarios(&scenarios, &flags);
    print(&summary);
    if let Some(dir) = &flags.out {
        if let Err(e) = write_outputs(&summary, dir) {
            eprintln!("error: {e}");
            return ExitCode::FAILURE;
        }
    }
    match &summary.first_failure {
        None => ExitCode::SUCCESS,
        Some(f) => {
            eprintln!("certificate failed: {f}");
            ExitCode::FAILURE
        }
    }
}
