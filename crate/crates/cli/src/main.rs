use std::path::PathBuf;
use std::process::ExitCode;

use amt_cli::{
    load_config, resolve_out_dir, run_acceptance, run_to_dir, Error, Scenario, Tolerances,
    EXIT_CONFIG, PRIMARY_SUITE,
};
use clap::{Parser, Subcommand};

const DEFAULT_OUT: &str = "amt-out";

#[derive(Parser)]
#[command(
    name = "amt",
    version,
    about = "Adiabatic modulation theorem scenarios and acceptance suite"
)]
struct Cli {
    /// Output directory [default: $AMT_OUT, else ./amt-out]
    #[arg(long, global = true, value_name = "DIR")]
    out: Option<PathBuf>,

    /// Worker threads for independent runs
    #[arg(long, global = true, value_name = "N")]
    threads: Option<usize>,

    /// Reserved; every current scenario is deterministic
    #[arg(long, global = true, value_name = "N")]
    seed: Option<u64>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a scenario from a TOML config, or rerun one from its manifest.json
    Run { config: PathBuf },
    /// Run the acceptance suite and print one verdict per criterion
    Accept {
        #[arg(long, default_value = PRIMARY_SUITE)]
        suite: String,
        /// TOML file overriding individual tolerances
        #[arg(long, value_name = "FILE")]
        tolerances: Option<PathBuf>,
        /// Run only these criteria (repeatable), e.g. --only A8
        #[arg(long, value_name = "ID")]
        only: Vec<String>,
    },
    /// List the available scenarios
    ListScenarios,
}

fn env_out() -> PathBuf {
    std::env::var_os("AMT_OUT")
        .filter(|v| !v.is_empty())
        .map(PathBuf::from)
        .unwrap_or_else(|| PathBuf::from(DEFAULT_OUT))
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_CONFIG } else { 0 };
            let _ = e.print();
            return ExitCode::from(code as u8);
        }
    };
    if cli.seed.is_some() {
        eprintln!("note: --seed is reserved; all scenarios are deterministic");
    }
    let mut pool = rayon::ThreadPoolBuilder::new();
    if let Some(n) = cli.threads {
        if n == 0 {
            eprintln!("config error: --threads must be at least 1");
            return ExitCode::from(EXIT_CONFIG as u8);
        }
        pool = pool.num_threads(n);
    }
    let pool = match pool.build() {
        Ok(p) => p,
        Err(e) => {
            eprintln!("config error: {e}");
            return ExitCode::from(EXIT_CONFIG as u8);
        }
    };
    match pool.install(|| dispatch(cli)) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("{e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}

fn dispatch(cli: Cli) -> Result<(), Error> {
    match cli.command {
        Command::ListScenarios => {
            for s in Scenario::ALL {
                println!("{:<20} {}", s.name(), s.summary());
            }
            Ok(())
        }
        Command::Run { config } => {
            let cfg = load_config(&config)?;
            let out = resolve_out_dir(cli.out, &cfg, env_out());
            let manifest = run_to_dir(&cfg, &out)?;
            for w in &manifest.warnings {
                eprintln!("warning: {w}");
            }
            for f in &manifest.files {
                println!("{}", out.join(&f.name).display());
            }
            println!("{}", out.join(amt_cli::MANIFEST_NAME).display());
            Ok(())
        }
        Command::Accept {
            suite,
            tolerances,
            only,
        } => {
            let tol = match tolerances {
                Some(p) => Tolerances::load(&p)?,
                None => Tolerances::default(),
            };
            let only: Vec<String> = only.iter().map(|s| s.to_ascii_uppercase()).collect();
            let report = run_acceptance(&suite, tol, &only)?;
            for r in &report.results {
                println!("{}", r.line());
            }
            let out = cli.out.unwrap_or_else(env_out);
            std::fs::create_dir_all(&out)?;
            let path = out.join("acceptance.json");
            std::fs::write(
                &path,
                serde_json::to_string_pretty(&report).expect("report serializes"),
            )?;
            let failed: Vec<&str> = report
                .results
                .iter()
                .filter(|r| !r.passed)
                .map(|r| r.id)
                .collect();
            println!(
                "{}/{} criteria passed; report at {}",
                report.results.len() - failed.len(),
                report.results.len(),
                path.display()
            );
            if failed.is_empty() {
                Ok(())
            } else {
                Err(Error::Acceptance(format!("failed: {}", failed.join(", "))))
            }
        }
    }
}
