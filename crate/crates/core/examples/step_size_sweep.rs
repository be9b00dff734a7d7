//! Censored exchange under harmonic, square-summable and constant steps on a star.

use social_sampling::harness::{sweep, ExperimentConfig, InitialLaw, SweepAxis};
use social_sampling::protocol::{ScheduleKind, VariantKind};
use social_sampling::{StepSchedule, TopologyKind};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let mut config = ExperimentConfig::new(
        TopologyKind::Star { n: 100 },
        InitialLaw::Explicit {
            weights: vec![0.5, 0.3, 0.2],
        },
        VariantKind::CensoredExchange,
        StepSchedule::harmonic(1.0),
    );
    config.horizon = 5_000;
    config.trials = 5;
    config.seed = 5;
    config.sweep = Some(SweepAxis::Schedule(vec![
        ScheduleKind::Harmonic(1.0),
        ScheduleKind::Square(1.0),
        ScheduleKind::Constant(0.005),
    ]));

    for result in sweep(&config, 0)? {
        println!(
            "{:<16} final mse {:.3e}  sum diverges {}  square summable {}",
            result.config.schedule.label(),
            result.final_mse_mean(),
            result.trials[0].report.step_size.sum_diverges,
            result.trials[0].report.step_size.square_summable,
        );
    }
    Ok(())
}
