// Bench all nine activations on the regression task across three seeds
// and print the report table.

use std::error::Error;

use kdac::commands::bench::run_bench;
use kdac::commands::{Command, RunConfig};

pub fn run_example() -> Result<(), Box<dyn Error>> {
    let mut cfg = RunConfig::defaults(Command::Bench);
    cfg.seeds = vec![1, 2, 3];
    cfg.repeats = 3;
    cfg.samples = 256;
    let report = run_bench(&cfg)?;
    for line in report
        .to_table(&cfg)
        .lines()
        .filter(|l| !l.starts_with("# ") && *l != "#")
    {
        println!("{line}");
    }
    let best = report
        .rows
        .iter()
        .min_by(|a, b| {
            a.block(report.metric)
                .unwrap()
                .summary
                .mean
                .total_cmp(&b.block(report.metric).unwrap().summary.mean)
        })
        .unwrap();
    println!("lowest {}: {}", report.metric, best.activation.label());
    Ok(())
}

#[allow(dead_code)]
fn main() -> Result<(), Box<dyn Error>> {
    run_example()
}
