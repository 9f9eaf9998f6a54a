// Sample KDAC and its slope, locate the breakpoints, and watch the curve
// approach the hard max/min composition as μ shrinks.

use std::error::Error;

use kdac::kdac::{asymptotic_slopes, find_breakpoints, hard_composition, kdac_backward, sample_curve};

pub fn run_example() -> Result<(), Box<dyn Error>> {
    let (b1, b2) = (0.8, 0.5);
    let bp = find_breakpoints(b1, b2)?;
    println!("breakpoints for beta1={b1}, beta2={b2}: k={:?} t={:?}", bp.k, bp.t);
    let (left, right) = asymptotic_slopes(b1, b2);
    println!("limiting slopes: {left} (x -> -inf), {right} (x -> +inf)");
    println!(
        "d/dx at +-20: {:.6} {:.6}",
        kdac_backward(-20.0, b1, b2, 0.01)?.d_x,
        kdac_backward(20.0, b1, b2, 0.01)?.d_x
    );

    for mu in [0.5, 0.01, 0.0001] {
        let curve = sample_curve(b1, b2, mu, -5.0, 5.0, 2001)?;
        let (worst_x, worst) = curve
            .iter()
            .map(|s| (s.x, (s.y - hard_composition(s.x, b1, b2)).abs()))
            .fold((0.0, 0.0), |best, p| if p.1 > best.1 { p } else { best });
        println!(
            "mu={mu:<7} max |kdac - hard| = {worst:.3e} at x = {worst_x:+.3} (bound mu/2 = {:.1e})",
            mu / 2.0
        );
    }

    println!("{:>6} {:>10} {:>10}", "x", "y", "dy/dx");
    for s in sample_curve(1.2, 0.8, 0.01, -3.0, 3.0, 7)? {
        println!("{:>6.2} {:>10.5} {:>10.5}", s.x, s.y, s.dy_dx);
    }
    Ok(())
}

#[allow(dead_code)]
fn main() -> Result<(), Box<dyn Error>> {
    run_example()
}
