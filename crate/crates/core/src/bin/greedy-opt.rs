use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use greedy_opt::cli::{execute, load_config};
use greedy_opt::problems::describe_problems;
use greedy_opt::verify::Criterion;

/// Approximate greedy optimization runs and verification suites.
#[derive(Parser)]
#[command(name = "greedy-opt", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Execute the runs described by a config file and write a CSV trace.
    Run { config: PathBuf },
    /// Run one verification suite; `--name value` pairs override its parameters.
    Verify {
        /// rate, recurrence, optimal, equiv, asj, asj-rate, asfw-a, asfw-b,
        /// arsfw, converge, core, or all
        suite: String,
        #[arg(trailing_var_arg = true, allow_hyphen_values = true)]
        params: Vec<String>,
    },
    /// List the problem identifiers accepted in configs.
    ListProblems,
}

fn parse_overrides(args: &[String]) -> Result<Vec<(String, f64)>, String> {
    if args.len() % 2 != 0 {
        return Err("parameters come in `--name value` pairs".into());
    }
    args.chunks(2)
        .map(|pair| {
            let name = pair[0]
                .strip_prefix("--")
                .ok_or_else(|| format!("expected `--name`, got `{}`", pair[0]))?;
            let value: f64 = pair[1]
                .parse()
                .map_err(|_| format!("--{name}: `{}` is not a number", pair[1]))?;
            Ok((name.to_string(), value))
        })
        .collect()
}

fn verify(suite: &str, params: &[String]) -> Result<bool, String> {
    let overrides = parse_overrides(params)?;
    let suites: Vec<Criterion> = if suite == "all" {
        Criterion::ALL.to_vec()
    } else {
        vec![suite.parse().map_err(|e: greedy_opt::Error| e.to_string())?]
    };
    let mut ok = true;
    for c in suites {
        let report = c.run(&overrides).map_err(|e| format!("{c}: {e}"))?;
        print!("{report}");
        ok &= report.passed();
    }
    Ok(ok)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = match cli.command {
        Command::Run { config } => load_config(&config)
            .and_then(|c| execute(&c))
            .map(|summary| {
                print!("{summary}");
                true
            })
            .map_err(|e| e.to_string()),
        Command::Verify { suite, params } => verify(&suite, &params),
        Command::ListProblems => {
            for (id, about) in describe_problems() {
                println!("{id:<40} {about}");
            }
            Ok(true)
        }
    };
    match outcome {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::FAILURE,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
