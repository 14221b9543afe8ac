//! Runs the eleven acceptance criteria and prints one line per criterion.
//! Exits with status 1 when any criterion fails.

use std::process::ExitCode;

use mfbo::verify::run_all_criteria;

fn main() -> ExitCode {
    let reports = run_all_criteria();
    for r in &reports {
        println!("{r}");
    }
    let failed: Vec<usize> = reports.iter().filter(|r| !r.passed).map(|r| r.id).collect();
    println!(
        "acceptance: {} passed, {} failed{}",
        reports.len() - failed.len(),
        failed.len(),
        if failed.is_empty() { String::new() } else { format!(" ({failed:?})") }
    );
    if failed.is_empty() { ExitCode::SUCCESS } else { ExitCode::FAILURE }
}
