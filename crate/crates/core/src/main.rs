use circlelab::experiment::{builtin_config, list_builtin_examples, run_experiment, run_source, verify_report};
use circlelab::Error;
use clap::{Parser, Subcommand};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

const EXIT_ESTIMATOR: u8 = 2;
const EXIT_CONFIG: u8 = 3;

#[derive(Parser)]
#[command(name = "circlelab", version, about = "Random walks on groups of circle diffeomorphisms")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the scenario declared in a config file, or a bundled example by name.
    Run {
        config: String,
        #[arg(long)]
        seed: Option<u64>,
        /// Worker threads; results do not depend on it.
        #[arg(long)]
        workers: Option<usize>,
        #[arg(long, default_value = "out")]
        out: PathBuf,
    },
    /// List the bundled example configs.
    Examples {
        /// Print the source of one example instead.
        #[arg(long)]
        show: Option<String>,
    },
    /// Re-check the invariants and side-file hashes of a report.
    Verify { report: PathBuf },
}

fn exit_for(e: &Error) -> ExitCode {
    eprintln!("error: {e}");
    ExitCode::from(if e.is_config_error() { EXIT_CONFIG } else { EXIT_ESTIMATOR })
}

fn run(config: &str, seed: Option<u64>, workers: Option<usize>, out: &Path) -> ExitCode {
    let path = Path::new(config);
    let result = match builtin_config(config) {
        Some(text) if !path.exists() => run_source(config, text, seed, workers, out),
        _ => run_experiment(path, seed, workers, out),
    };
    match result {
        Ok((path, report)) => {
            for inv in &report.invariants {
                let mark = if inv.holds { "ok  " } else { "FAIL" };
                println!("{mark} {} = {} (bound {})", inv.name, inv.value, inv.bound);
            }
            println!("report: {}", path.display());
            ExitCode::SUCCESS
        }
        Err(e) => exit_for(&e),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match cli.command {
        Command::Run {
            config,
            seed,
            workers,
            out,
        } => run(&config, seed, workers, &out),
        Command::Examples { show: Some(name) } => match builtin_config(&name) {
            Some(text) => {
                print!("{text}");
                ExitCode::SUCCESS
            }
            None => exit_for(&Error::Config(format!("no bundled example named `{name}`"))),
        },
        Command::Examples { show: None } => match list_builtin_examples() {
            Ok(list) => {
                for e in list {
                    println!("{:<10} {:<14} {}", e.name, e.scenario.to_string(), e.description);
                }
                ExitCode::SUCCESS
            }
            Err(e) => exit_for(&e),
        },
        Command::Verify { report } => match verify_report(&report) {
            Ok(v) => {
                for name in &v.failed {
                    println!("failed: {name}");
                }
                for name in &v.inconsistent {
                    println!("inconsistent verdict: {name}");
                }
                for name in &v.side_file_mismatches {
                    println!("side file mismatch: {name}");
                }
                if v.ok() {
                    println!("ok: {}", report.display());
                    ExitCode::SUCCESS
                } else {
                    ExitCode::from(EXIT_ESTIMATOR)
                }
            }
            Err(e @ Error::Io(_)) => {
                eprintln!("error: {}: {e}", report.display());
                ExitCode::from(EXIT_CONFIG)
            }
            Err(e) => exit_for(&e),
        },
    }
}
