use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use kreinlab_cli::config::ExperimentConfig;
use kreinlab_cli::schema::{config_schema, report_schema};

#[derive(Parser)]
#[command(name = "kreinlab", version, about = "Spectral shift and trace formula experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the experiments described by a JSON config.
    Run {
        config: PathBuf,
        /// Output directory; overrides `output_dir` in the config.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Worker threads (default: all cores).
        #[arg(long, env = "KREINLAB_THREADS")]
        threads: Option<usize>,
    },
    /// Print the JSON Schema of the run summary.
    Schema {
        /// Print the config schema instead.
        #[arg(long)]
        config: bool,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match cli.command {
        Command::Schema { config } => {
            let s = if config { config_schema() } else { report_schema() };
            println!("{}", serde_json::to_string_pretty(&s).expect("schema serializes"));
            ExitCode::SUCCESS
        }
        Command::Run { config, out, threads } => {
            let cfg = match ExperimentConfig::load(&config) {
                Ok(c) => c,
                Err(e) => {
                    eprintln!("error: {e}");
                    return ExitCode::from(1);
                }
            };
            if let Some(n) = threads {
                if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
                    eprintln!("error: cannot configure {n} threads: {e}");
                    return ExitCode::from(1);
                }
            }
            match kreinlab_cli::run(cfg, out.as_deref()) {
                Ok((summary, dir)) => {
                    for f in &summary.failures {
                        eprintln!("gate failed: {f}");
                    }
                    println!("{} -> {}", if summary.pass { "PASS" } else { "FAIL" }, dir.join("summary.json").display());
                    if summary.pass {
                        ExitCode::SUCCESS
                    } else {
                        ExitCode::from(2)
                    }
                }
                Err(e) => {
                    eprintln!("error: {e:#}");
                    ExitCode::from(1)
                }
            }
        }
    }
}
