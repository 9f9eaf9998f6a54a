// Verify analytic derivatives against finite differences: one activation
// by hand, then the full `gradcheck` suite, then a deliberately wrong
// derivative to see the suite fail.

use std::error::Error;

use kdac::commands::gradcheck::run_checks;
use kdac::commands::{Command, RunConfig};
use kdac::fdcheck::{check_activation, check_mlp_gradients};
use kdac::ActivationKind;

pub fn run_example() -> Result<(), Box<dyn Error>> {
    let kdac = ActivationKind::default_for("kdac")?;
    let points: Vec<f64> = (0..=400).map(|i| -4.0 + 0.02 * i as f64).collect();
    let c = check_activation(&kdac, |x| kdac.derivative(x), &points);
    println!(
        "kdac scalar: worst {:.2e} over {} central + {} one-sided stencils",
        c.worst(),
        c.central,
        c.one_sided
    );

    let m = check_mlp_gradients(kdac, &[2, 8, 8, 1], 3, 4)?;
    println!(
        "kdac 2-8-8-1 network: worst {:.2e} over {} parameters",
        m.worst, m.params
    );

    let mut cfg = RunConfig::defaults(Command::Gradcheck);
    cfg.activations = vec![ActivationKind::Tanh, kdac];
    let report = run_checks(&cfg, &|k: &ActivationKind, x| k.derivative(x))?;
    println!(
        "suite: {} checks, families {:?}, passed: {}",
        report.checks.len(),
        report.families(),
        report.passed()
    );

    // tanh' = 1 - tanh^2; dropping the square is caught
    let broken = run_checks(&cfg, &|k: &ActivationKind, x| match k {
        ActivationKind::Tanh => 1.0 - x.tanh(),
        _ => k.derivative(x),
    })?;
    for f in broken.failures() {
        println!(
            "negative control: {}/{} failed with worst error {:.3}",
            f.family, f.name, f.worst
        );
    }
    Ok(())
}

#[allow(dead_code)]
fn main() -> Result<(), Box<dyn Error>> {
    run_example()
}
