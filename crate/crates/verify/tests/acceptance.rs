//! Prints one PASS/FAIL line per acceptance criterion.
//!
//! The target reports and exits successfully either way; `chemrep verify full`
//! runs the same checks with a failing exit status.

use chemrep_verify::{run, Level};

fn main() {
    let outcomes = run(Level::Full, |o| println!("{o}"));
    let passed = outcomes.iter().filter(|o| o.passed).count();
    println!("{passed} of {} criteria pass", outcomes.len());
}
