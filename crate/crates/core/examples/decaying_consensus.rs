//! Averaging with a decaying step: nodes agree, but on a random point near
//! the initial histogram rather than on the histogram itself.

use social_sampling::harness::{run_ensemble, ExperimentConfig, InitialLaw};
use social_sampling::protocol::VariantKind;
use social_sampling::{StepSchedule, TopologyKind};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let mut config = ExperimentConfig::new(
        TopologyKind::Grid { rows: 5, cols: 5 },
        InitialLaw::Explicit {
            weights: vec![0.5, 0.3, 0.2],
        },
        VariantKind::DecayingAveraging,
        StepSchedule::harmonic(10.0),
    );
    config.horizon = 20_000;
    config.trials = 20;
    config.seed = 2;

    let result = run_ensemble(&config, 0)?;
    println!("{:>8} {:>12} {:>12}", "t", "mse", "disagreement");
    for (k, t) in result.rounds.iter().enumerate().step_by(6) {
        println!("{t:>8} {:>12.4e} {:>12.4e}", result.mse_mean[k], result.disagreement_mean[k]);
    }
    for trial in result.trials.iter().take(5) {
        let mean: Vec<String> = trial.final_mean.iter().map(|x| format!("{x:.3}")).collect();
        let pi: Vec<String> = trial.pi.iter().map(|x| format!("{x:.3}")).collect();
        println!("trial {}: consensus [{}] vs histogram [{}]", trial.index, mean.join(" "), pi.join(" "));
    }
    Ok(())
}
