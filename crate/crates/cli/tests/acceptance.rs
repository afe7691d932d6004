//! Acceptance criteria, run as registered experiments at their default
//! settings. Prints one line per criterion and exits nonzero if any fails.

use std::process::ExitCode;

use covoter_cli::{experiments, Config};

struct Criterion {
    id: u32,
    experiment: &'static str,
    /// Wall-clock limit in seconds, where one applies.
    max_runtime_s: Option<f64>,
}

const CRITERIA: &[Criterion] = &[
    Criterion { id: 1, experiment: "expm-check", max_runtime_s: Some(1.0) },
    Criterion { id: 2, experiment: "m1-fraction", max_runtime_s: None },
    Criterion { id: 3, experiment: "beta-m1", max_runtime_s: Some(60.0) },
    Criterion { id: 4, experiment: "stationary-check", max_runtime_s: None },
    Criterion { id: 5, experiment: "series-check", max_runtime_s: None },
    Criterion { id: 6, experiment: "fig4", max_runtime_s: Some(60.0) },
    Criterion { id: 7, experiment: "beta-m2", max_runtime_s: Some(60.0) },
    Criterion { id: 8, experiment: "lln", max_runtime_s: None },
    Criterion { id: 9, experiment: "coupling", max_runtime_s: None },
    Criterion { id: 10, experiment: "polarisation", max_runtime_s: None },
    Criterion { id: 11, experiment: "cutnorm-check", max_runtime_s: None },
    Criterion { id: 12, experiment: "kernel-check", max_runtime_s: None },
];

fn main() -> ExitCode {
    let root = tempfile::tempdir().expect("temporary directory");
    let mut failed = 0;
    for c in CRITERIA {
        let out = root.path().join(c.experiment);
        let line = match experiments::run(c.experiment, &Config::new(), &out) {
            Ok(v) => {
                let in_time = c.max_runtime_s.is_none_or(|m| v.runtime_s < m);
                let pass = v.pass && in_time;
                if !pass {
                    failed += 1;
                }
                let mut line = format!(
                    "{} criterion {:>2} {}: {} = {:e} (threshold {:e}), {:.2} s",
                    if pass { "PASS" } else { "FAIL" },
                    c.id,
                    c.experiment,
                    v.metric,
                    v.value,
                    v.threshold,
                    v.runtime_s
                );
                if !in_time {
                    line += &format!(" exceeds {} s", c.max_runtime_s.unwrap());
                }
                if let Some(note) = v.note {
                    line += &format!("\n     note: {note}");
                }
                line
            }
            Err(e) => {
                failed += 1;
                format!("FAIL criterion {:>2} {}: error: {e:#}", c.id, c.experiment)
            }
        };
        println!("{line}");
    }
    println!("acceptance: {} of {} criteria pass", CRITERIA.len() - failed, CRITERIA.len());
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
