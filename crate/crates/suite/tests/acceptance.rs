//! The primary acceptance suite: one verdict line per criterion, non-zero
//! exit when any criterion fails.

use std::process::ExitCode;

use amt_cli::{run_acceptance, Tolerances, PRIMARY_SUITE};

fn main() -> ExitCode {
    // `cargo test -- --list` and filters come through as arguments
    if std::env::args().any(|a| a == "--list") {
        println!("acceptance: test");
        return ExitCode::SUCCESS;
    }
    let report = match run_acceptance(PRIMARY_SUITE, Tolerances::default(), &[]) {
        Ok(r) => r,
        Err(e) => {
            println!("acceptance suite did not run: {e}");
            return ExitCode::FAILURE;
        }
    };
    println!();
    for r in &report.results {
        println!("{}", r.line());
    }
    let failed = report.results.iter().filter(|r| !r.passed).count();
    println!(
        "\nacceptance: {} passed; {failed} failed\n",
        report.results.len() - failed
    );
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
