// Per-call forward cost of every activation, and how much KDAC's two
// blends cost relative to ReLU.

use std::error::Error;

use kdac::commands::timing::time_activations;
use kdac::list_registry;

pub fn run_example() -> Result<(), Box<dyn Error>> {
    let rows = time_activations(&list_registry(), 1_000_000);
    for r in &rows {
        println!(
            "{:<11} median {:>7.2} ns  p95 {:>7.2} ns",
            r.activation.tag(),
            r.median_ns,
            r.p95_ns
        );
    }
    let ns = |tag: &str| {
        rows.iter()
            .find(|r| r.activation.tag() == tag)
            .map(|r| r.median_ns)
            .unwrap()
    };
    println!("kdac/relu: {:.1}x", ns("kdac") / ns("relu"));
    Ok(())
}

#[allow(dead_code)]
fn main() -> Result<(), Box<dyn Error>> {
    run_example()
}
