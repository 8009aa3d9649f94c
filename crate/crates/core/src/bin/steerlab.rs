use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, ValueEnum};
use serde_json::Value;

use steerlab::scenario::{run_scenario, Scenario, ScenarioReport, ScenarioRequest};
use steerlab::tol::TOLERANCE_ENV;
use steerlab::worlds::World;

const EXIT_FLAGS_FAILED: u8 = 1;
const EXIT_USAGE: u8 = 2;
const EXIT_INVALID: u8 = 3;
const EXIT_OUTPUT: u8 = 4;

#[derive(Debug, Clone, Copy, ValueEnum)]
enum ScenarioArg {
    Steer,
    Teleport,
    Bitcommit,
    Constraints,
    Chsh,
    Broadcast,
}

impl From<ScenarioArg> for Scenario {
    fn from(s: ScenarioArg) -> Self {
        match s {
            ScenarioArg::Steer => Scenario::Steer,
            ScenarioArg::Teleport => Scenario::Teleport,
            ScenarioArg::Bitcommit => Scenario::Bitcommit,
            ScenarioArg::Constraints => Scenario::Constraints,
            ScenarioArg::Chsh => Scenario::Chsh,
            ScenarioArg::Broadcast => Scenario::Broadcast,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, ValueEnum)]
enum WorldArg {
    Classical,
    Quantum,
    Dephased,
}

/// Run a named steering, teleportation, commitment or constraint scenario.
#[derive(Debug, Parser)]
#[command(name = "steerlab", version, about)]
struct Cli {
    #[arg(value_enum)]
    scenario: ScenarioArg,
    #[arg(long, value_enum, default_value = "quantum")]
    world: WorldArg,
    /// Dephasing strength in [0, 1]; only with `--world dephased` (default 1).
    #[arg(long)]
    lambda: Option<f64>,
    #[arg(long, default_value_t = 0.6, allow_negative_numbers = true)]
    alpha: f64,
    #[arg(long, default_value_t = 0.8, allow_negative_numbers = true)]
    beta: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 100)]
    trials: usize,
    /// Numerical tolerance τ.
    #[arg(long, env = TOLERANCE_ENV)]
    tol: Option<f64>,
    /// Write the JSON report here.
    #[arg(long, short)]
    output: Option<PathBuf>,
    /// Print the JSON report instead of the summary.
    #[arg(long)]
    json: bool,
}

fn request(cli: &Cli) -> Result<ScenarioRequest, String> {
    let world = match (cli.world, cli.lambda) {
        (WorldArg::Dephased, lambda) => World::Dephased {
            strength: lambda.unwrap_or(1.0),
        },
        (_, Some(_)) => return Err("--lambda applies only to --world dephased".into()),
        (WorldArg::Classical, None) => World::Classical,
        (WorldArg::Quantum, None) => World::Quantum,
    };
    Ok(ScenarioRequest {
        scenario: cli.scenario.into(),
        world,
        alpha: cli.alpha,
        beta: cli.beta,
        seed: cli.seed,
        trials: cli.trials,
        tol: cli.tol,
    })
}

fn scalar(v: &Value) -> Option<String> {
    match v {
        Value::Number(n) => Some(n.to_string()),
        Value::Bool(b) => Some(b.to_string()),
        Value::Array(items) if items.iter().all(|x| x.is_number()) => Some(
            items
                .iter()
                .map(|x| x.to_string())
                .collect::<Vec<_>>()
                .join(", "),
        ),
        _ => None,
    }
}

fn print_summary(report: &ScenarioReport) {
    println!("scenario  {}", report.scenario);
    println!("world     {}", report.params["world"]);
    println!("seed      {}", report.seed);
    if let Value::Object(results) = &report.results {
        for (k, v) in results {
            if let Some(s) = scalar(v) {
                println!("  {k}: {s}");
            }
        }
    }
    for (name, ok) in &report.flags {
        println!("[{}] {name}", if *ok { "PASS" } else { "FAIL" });
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let req = match request(&cli) {
        Ok(r) => r,
        Err(msg) => {
            eprintln!("error: {msg}");
            return ExitCode::from(EXIT_INVALID);
        }
    };
    let report = match run_scenario(&req) {
        Ok(r) => r,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(EXIT_INVALID);
        }
    };
    let text = report.to_json();
    if let Some(path) = &cli.output {
        if let Err(e) = std::fs::write(path, &text) {
            eprintln!("error: cannot write {}: {e}", path.display());
            return ExitCode::from(EXIT_OUTPUT);
        }
    }
    if cli.json {
        print!("{text}");
    } else {
        print_summary(&report);
    }
    if report.passed() {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(EXIT_FLAGS_FAILED)
    }
}
