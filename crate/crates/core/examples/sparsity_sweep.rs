//! 150 opinions of which only a few are held initially: the error depends on
//! how many opinions are present, not on the alphabet size.

use social_sampling::harness::{sweep, ExperimentConfig, InitialLaw, SweepAxis};
use social_sampling::protocol::VariantKind;
use social_sampling::{StepSchedule, TopologyKind};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let mut config = ExperimentConfig::new(
        TopologyKind::Grid { rows: 10, cols: 10 },
        InitialLaw::UniformSupport {
            alphabet: 150,
            support: 2,
        },
        VariantKind::CensoredExchange,
        StepSchedule::harmonic(1.0),
    );
    config.horizon = 3_000;
    config.trials = 4;
    config.seed = 6;
    config.sweep = Some(SweepAxis::Support(vec![2, 5, 10, 15]));

    for (result, support) in sweep(&config, 0)?.iter().zip([2, 5, 10, 15]) {
        println!(
            "support {support:>2}: final mse {:.3e}, median time to 1e-2 {:?}",
            result.final_mse_mean(),
            result.time_quantile(0.5)
        );
    }
    Ok(())
}
