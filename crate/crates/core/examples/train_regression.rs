// Train a small network on the synthetic regression task with every
// activation and print initial versus final loss.

use std::error::Error;

use kdac::list_registry;
use kdac::nn::tasks::{run_experiment, Task, TaskSpec};
use kdac::nn::TrainConfig;

pub fn run_example() -> Result<(), Box<dyn Error>> {
    let spec = TaskSpec {
        task: Task::Regression,
        samples: 512,
        hidden: 16,
        data_seed: 7,
    };
    let cfg = TrainConfig {
        seed: 1,
        ..TrainConfig::default()
    };
    println!(
        "{:<12} {:>12} {:>12} {:>12}",
        "activation", "train@0", "train@end", "test_mse"
    );
    for kind in list_registry() {
        let out = run_experiment(&spec, kind, &cfg)?;
        let h = &out.history;
        println!(
            "{:<12} {:>12.6} {:>12.6} {:>12.6}",
            kind.tag(),
            h.initial().loss,
            h.last().loss,
            out.final_metric
        );
    }
    Ok(())
}

#[allow(dead_code)]
fn main() -> Result<(), Box<dyn Error>> {
    run_example()
}
