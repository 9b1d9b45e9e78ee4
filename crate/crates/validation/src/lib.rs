//! Reporting helpers for the acceptance suite in `tests/acceptance.rs`.
//!
//! Lines go straight to the process's standard error so they show up even when
//! the test harness captures output of passing tests.

use std::io::Write;

/// Prints `acceptance <id> PASS|FAIL <name>: <detail>` and returns `pass`.
pub fn report(id: &str, name: &str, pass: bool, detail: &str) -> bool {
    let verdict = if pass { "PASS" } else { "FAIL" };
    let line = format!("\nacceptance {id:<4} {verdict} {name}: {detail}\n");
    let _ = std::io::stderr().lock().write_all(line.as_bytes());
    pass
}
