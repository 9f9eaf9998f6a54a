// Train a window classifier on the toy BIO tagging task and compare its
// span F1 with the frequency and majority baselines.

use std::error::Error;

use kdac::nn::tasks::{
    frequency_baseline, majority_baseline, run_experiment, tagging_f1, tagging_split, Task, TaskSpec,
};
use kdac::nn::TrainConfig;
use kdac::ActivationKind;

pub fn run_example() -> Result<(), Box<dyn Error>> {
    let spec = TaskSpec {
        task: Task::Tagging,
        samples: 400,
        hidden: 32,
        data_seed: 11,
    };
    let (train, test) = tagging_split(&spec)?;
    println!(
        "majority baseline F1  {:.4}",
        tagging_f1(&test, &majority_baseline(&train, &test))?
    );
    println!(
        "frequency baseline F1 {:.4}",
        tagging_f1(&test, &frequency_baseline(&train, &test))?
    );

    let cfg = TrainConfig {
        seed: 1,
        ..TrainConfig::default()
    };
    for tag in ["kdac", "relu", "tanh"] {
        let out = run_experiment(&spec, ActivationKind::default_for(tag)?, &cfg)?;
        println!(
            "{tag:<8} window-MLP F1 {:.4} (train loss {:.4} -> {:.4})",
            out.final_metric,
            out.history.initial().loss,
            out.history.last().loss
        );
    }
    Ok(())
}

#[allow(dead_code)]
fn main() -> Result<(), Box<dyn Error>> {
    run_example()
}
