// The smoothed min/max blend: exact outside the μ-band, a quadratic
// bridge inside it, with the deepest deviation (μ/4) at a = b.

use std::error::Error;

use kdac::smooth::{blend_partials, smooth_max, smooth_min, switching_factor_min};

pub fn run_example() -> Result<(), Box<dyn Error>> {
    let mu = 0.5;
    println!("{:>6} {:>10} {:>10} {:>10} {:>10}", "a", "min", "smin", "max", "smax");
    for i in 0..=8 {
        let a = -1.0 + 0.25 * i as f64;
        let b = 0.0;
        println!(
            "{a:>6.2} {:>10.5} {:>10.5} {:>10.5} {:>10.5}",
            a.min(b),
            smooth_min(a, b, mu)?,
            a.max(b),
            smooth_max(a, b, mu)?
        );
    }

    let blend = switching_factor_min(0.1, 0.0, mu)?;
    let (da, db) = blend_partials(&blend);
    println!(
        "inside the band at a=0.1, b=0: zeta={:.3}, partials ({da:.3}, {db:.3})",
        blend.factor
    );
    println!("gap at a = b: {}", 0.0 - smooth_min(0.0, 0.0, mu)?);
    Ok(())
}

#[allow(dead_code)]
fn main() -> Result<(), Box<dyn Error>> {
    run_example()
}
