//! Acceptance suite: runs E1..E12 at their fixed tolerances and seeds and
//! prints one line per criterion. Failing checks are listed under their
//! experiment. Exits nonzero if any experiment does not pass.

use std::process::ExitCode;
use std::time::Instant;

use fracbm::experiments::{run_experiment, Comparison, ExperimentOptions, EXPERIMENT_IDS};

fn main() -> ExitCode {
    let opts = ExperimentOptions::default();
    let mut failed = 0;
    println!("\nacceptance suite (root seed {})", opts.root);
    for id in EXPERIMENT_IDS {
        let start = Instant::now();
        let record = run_experiment(id, &opts).expect("known experiment id");
        let passed = record.checks.iter().filter(|c| c.passed).count();
        println!(
            "{:<4} {:<5} {} ({passed}/{} checks, {:.1}s)",
            record.id,
            record.verdict.as_str().to_uppercase(),
            record.title,
            record.checks.len(),
            start.elapsed().as_secs_f64()
        );
        if let Some(e) = &record.error {
            println!("       error: {e}");
        }
        for c in record.checks.iter().filter(|c| !c.passed) {
            let rule = match c.comparison {
                Comparison::Within => format!("|{:.6e} - {:.6e}| > {:.1e}", c.estimate, c.target, c.tolerance),
                Comparison::AtLeast => format!("{:.6e} < {:.6e}", c.estimate, c.target),
                Comparison::Below => format!("{:.6e} >= {:.6e}", c.estimate, c.target),
            };
            println!("       failed: {}: {rule}", c.name);
        }
        if !record.passed() {
            failed += 1;
        }
    }
    println!("{} of {} experiments passed\n", EXPERIMENT_IDS.len() - failed, EXPERIMENT_IDS.len());
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
