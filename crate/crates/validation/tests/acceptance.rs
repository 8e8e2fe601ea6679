//! Runs every acceptance criterion, printing one line per criterion.
//!
//! Numeric arguments select a subset, e.g. `cargo test -p fermigap-validation --test acceptance -- 5 6`.

use std::process::ExitCode;
use std::time::Instant;

fn main() -> ExitCode {
    let selected: Vec<u8> = std::env::args().skip(1).filter_map(|a| a.parse().ok()).collect();
    let mut failed = Vec::new();
    let mut ran = 0;
    for c in fermigap_validation::criteria() {
        if !selected.is_empty() && !selected.contains(&c.id) {
            continue;
        }
        ran += 1;
        let start = Instant::now();
        let outcome = (c.run)();
        let elapsed = start.elapsed();
        let in_budget = elapsed <= c.budget;
        let (pass, detail) = match outcome {
            Ok(o) => (o.pass && in_budget, o.detail),
            Err(e) => (false, format!("error: {e}")),
        };
        println!(
            "criterion {:>2} {:<34} {} | {} | {:.1} s of {} s",
            c.id,
            c.title,
            if pass { "PASS" } else { "FAIL" },
            detail,
            elapsed.as_secs_f64(),
            c.budget.as_secs()
        );
        if !pass {
            failed.push(c.id);
        }
    }
    println!("acceptance: {} of {ran} criteria passed; failed {failed:?}", ran - failed.len());
    if failed.is_empty() {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
