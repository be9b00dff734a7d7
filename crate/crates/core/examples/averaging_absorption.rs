//! Fixed-step averaging on a 5×5 grid: every trial collapses onto a single
//! opinion, chosen with probability close to its initial frequency.

use social_sampling::harness::{run_ensemble, ExperimentConfig, InitialLaw};
use social_sampling::protocol::VariantKind;
use social_sampling::{StepSchedule, TopologyKind};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let law = vec![0.5, 0.3, 0.2];
    let mut config = ExperimentConfig::new(
        TopologyKind::Grid { rows: 5, cols: 5 },
        InitialLaw::Explicit { weights: law.clone() },
        VariantKind::Averaging,
        StepSchedule::constant(1.0),
    );
    config.horizon = 5_000;
    config.trials = 200;
    config.seed = 1;

    let result = run_ensemble(&config, 0)?;
    let mut wins = vec![0usize; law.len()];
    let mut stuck = 0;
    for trial in &result.trials {
        match trial.absorbed_atom {
            Some(k) => wins[k] += 1,
            None => stuck += 1,
        }
    }
    println!("absorbed {} of {} trials", result.trials.len() - stuck, result.trials.len());
    for (k, (&w, &p)) in wins.iter().zip(&law).enumerate() {
        println!("opinion {k}: won {:.3}, initial law {p}", w as f64 / result.trials.len() as f64);
    }
    println!("final mse against the initial histogram: {:.3e}", result.final_mse_mean());
    Ok(())
}
