//! One line per acceptance criterion; exits nonzero if any fails.

use ar1_persistence::validation::{run_suite, Suite};

fn main() {
    let checks = run_suite(Suite::Full);
    for check in &checks {
        println!("{}", check.line());
    }
    let failed: Vec<u32> = checks.iter().filter(|c| !c.passed).map(|c| c.id).collect();
    println!(
        "acceptance: {} passed, {} failed{}",
        checks.len() - failed.len(),
        failed.len(),
        if failed.is_empty() {
            String::new()
        } else {
            format!(" (criteria {failed:?})")
        }
    );
    if !failed.is_empty() {
        std::process::exit(1);
    }
}
