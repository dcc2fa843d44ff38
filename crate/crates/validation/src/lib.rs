//! Runner for the acceptance suite in `tests/acceptance.rs`.
//!
//! Each criterion is a function returning a one-line detail on success or the
//! reason for failure. The runner prints one `[acceptance]` line per
//! criterion and reports whether all of them passed.

use std::panic::{catch_unwind, AssertUnwindSafe};
use std::time::Instant;

pub type Check = Result<String, String>;

pub struct Criterion {
    pub id: &'static str,
    pub title: &'static str,
    pub check: fn() -> Check,
}

/// Turns a false condition into a failure carrying `msg`.
pub fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn panic_message(panic: Box<dyn std::any::Any + Send>) -> String {
    panic
        .downcast_ref::<String>()
        .cloned()
        .or_else(|| panic.downcast_ref::<&str>().map(|s| s.to_string()))
        .unwrap_or_default()
}

/// Runs the criteria whose id equals `only`, or all of them, printing one
/// line each. A panicking criterion counts as failed. Returns the number of
/// failures.
pub fn run(criteria: &[Criterion], only: Option<&str>) -> usize {
    let mut failed = 0;
    let mut ran = 0;
    for criterion in criteria {
        if only.is_some_and(|o| o != criterion.id) {
            continue;
        }
        ran += 1;
        let started = Instant::now();
        let outcome = catch_unwind(AssertUnwindSafe(criterion.check))
            .unwrap_or_else(|panic| Err(format!("panicked: {}", panic_message(panic))));
        let secs = started.elapsed().as_secs_f64();
        let (verdict, detail) = match outcome {
            Ok(detail) => ("PASS", detail),
            Err(detail) => {
                failed += 1;
                ("FAIL", detail)
            }
        };
        println!(
            "[acceptance] {} {}: {verdict} ({detail}) [{secs:.1} s]",
            criterion.id, criterion.title
        );
    }
    println!("[acceptance] {}/{ran} criteria passed", ran - failed);
    failed
}
