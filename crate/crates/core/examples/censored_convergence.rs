//! Censored mass exchange: estimates converge to the exact initial histogram
//! and total opinion mass never moves.

use social_sampling::harness::{run_ensemble, ExperimentConfig, InitialLaw};
use social_sampling::protocol::VariantKind;
use social_sampling::{StepSchedule, TopologyKind};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let mut config = ExperimentConfig::new(
        TopologyKind::Grid { rows: 5, cols: 5 },
        InitialLaw::Explicit {
            weights: vec![0.5, 0.3, 0.2],
        },
        VariantKind::CensoredExchange,
        StepSchedule::harmonic(10.0),
    );
    config.horizon = 30_000;
    config.trials = 20;
    config.seed = 3;
    config.fit_window = (100, 30_000);

    let result = run_ensemble(&config, 0)?;
    println!("{:>8} {:>12} {:>12}", "t", "mse", "mass drift");
    for (k, t) in result.rounds.iter().enumerate().step_by(6) {
        println!("{t:>8} {:>12.4e} {:>12.1e}", result.mse_mean[k], result.mass_drift_max[k]);
    }
    if let Some(slope) = result.rate_fit() {
        println!("log-log slope of mse: {slope:.3}");
    }
    let converged = result.trials.iter().filter(|t| t.final_mse < 1e-2).count();
    println!("{converged} of {} trials below 1e-2", result.trials.len());
    Ok(())
}
