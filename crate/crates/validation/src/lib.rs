//! Pass/fail bookkeeping for the acceptance run.

use std::time::{Duration, Instant};

pub struct Criterion {
    pub id: String,
    pub pass: bool,
    pub detail: String,
    pub elapsed: Duration,
}

/// Prints one line per criterion as it completes.
#[derive(Default)]
pub struct Report {
    rows: Vec<Criterion>,
}

impl Report {
    pub fn new() -> Self {
        Self::default()
    }

    /// Runs `check`, which returns `(pass, detail)`, and prints its line.
    pub fn run(&mut self, id: &str, check: impl FnOnce() -> (bool, String)) {
        let t0 = Instant::now();
        let (pass, detail) = check();
        let row = Criterion {
            id: id.to_string(),
            pass,
            detail,
            elapsed: t0.elapsed(),
        };
        println!("{}", format_row(&row));
        self.rows.push(row);
    }

    pub fn rows(&self) -> &[Criterion] {
        &self.rows
    }

    pub fn failures(&self) -> usize {
        self.rows.iter().filter(|r| !r.pass).count()
    }
}

pub fn format_row(r: &Criterion) -> String {
    format!(
        "criterion {:<6} {}  {}  [{:.1}s]",
        r.id,
        if r.pass { "PASS" } else { "FAIL" },
        r.detail,
        r.elapsed.as_secs_f64()
    )
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn counts_failures() {
        let mut rep = Report::new();
        rep.run("a", || (true, "ok".into()));
        rep.run("b", || (false, "bad".into()));
        assert_eq!(rep.failures(), 1);
        assert!(format_row(&rep.rows()[1]).contains("FAIL"));
    }
}
