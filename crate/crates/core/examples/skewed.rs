//! Two dominant opinions and a long tail of rare ones. Rare opinions are the
//! most likely to be censored early, so they converge last.

use social_sampling::harness::{run_trial, ExperimentConfig, InitialLaw};
use social_sampling::protocol::VariantKind;
use social_sampling::{StepSchedule, TopologyKind};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let mut config = ExperimentConfig::new(
        TopologyKind::PreferentialAttachment { n: 100, m_new: 3 },
        InitialLaw::Skewed { alphabet: 10 },
        VariantKind::CensoredExchange,
        StepSchedule::harmonic(1.0),
    );
    config.horizon = 10_000;
    config.seed = 7;

    let trial = run_trial(&config, 0)?;
    println!("{:>7} {:>10} {:>10} {:>10}", "opinion", "histogram", "mean est.", "error");
    for (k, (&p, &q)) in trial.pi.iter().zip(&trial.final_mean).enumerate() {
        println!("{k:>7} {p:>10.4} {q:>10.4} {:>10.2e}", (p - q).abs());
    }
    println!("final mse {:.3e}, disagreement {:.3e}", trial.final_mse, trial.final_disagreement);
    Ok(())
}
