//! Splits single rounds into drift, perturbation and noise, then checks by
//! exhaustive enumeration that the noise has zero conditional mean.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use social_sampling::analysis::{conditional_means_enumerated, decompose};
use social_sampling::protocol::{init_state, step};
use social_sampling::topology::generate;
use social_sampling::{AlgorithmVariant, OpinionSample, StepSchedule, TopologyKind};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let graph = generate(&TopologyKind::Grid { rows: 1, cols: 3 }, &mut ChaCha8Rng::seed_from_u64(0))?;
    let sample = OpinionSample::new(vec![0, 1, 1], 2)?;
    let schedule = StepSchedule::harmonic(1.0);
    let mut rng = ChaCha8Rng::seed_from_u64(4);

    for variant in [
        AlgorithmVariant::Averaging,
        AlgorithmVariant::DecayingAveraging,
        AlgorithmVariant::CensoredExchange,
    ] {
        println!("{}", variant.name());
        let mut state = init_state(&sample);
        for _ in 0..4 {
            let (next, record) = step(&state, &variant, &schedule, &graph, &mut rng)?;
            let parts = decompose(&record, &graph)?;
            let rebuilt = parts.reconstruct(&record.q_before, record.delta);
            let (mean_c, mean_m) = conditional_means_enumerated(&state, &variant, &schedule, &graph)?;
            println!(
                "  t={} δ={:.3} |C|={:.3e} |M|={:.3e} rebuild err={:.1e} |E[C]|={:.3e} |E[M]|={:.1e}",
                record.t,
                record.delta,
                parts.perturbation.frobenius_norm(),
                parts.noise.frobenius_norm(),
                rebuilt.max_abs_diff(&record.q_after),
                mean_c.frobenius_norm(),
                mean_m.max_abs(),
            );
            state = next;
        }
    }
    Ok(())
}
