//! Records a short trajectory for each variant and prints the condition report as JSON.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use social_sampling::analysis::check_conditions;
use social_sampling::protocol::init_state;
use social_sampling::simplex::make_distribution;
use social_sampling::topology::generate;
use social_sampling::{AlgorithmVariant, OpinionSample, Simulator, StepSchedule, TopologyKind};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let graph = generate(&TopologyKind::Grid { rows: 4, cols: 4 }, &mut ChaCha8Rng::seed_from_u64(0))?;
    let law = make_distribution(&[0.5, 0.3, 0.2])?;
    let sample = OpinionSample::draw(&law, graph.node_count(), &mut ChaCha8Rng::seed_from_u64(1));
    let schedule = StepSchedule::harmonic(2.0);

    for variant in [
        AlgorithmVariant::Averaging,
        AlgorithmVariant::DecayingAveraging,
        AlgorithmVariant::CensoredExchange,
    ] {
        let mut sim = Simulator::new(
            graph.clone(),
            variant.clone(),
            schedule,
            init_state(&sample),
            ChaCha8Rng::seed_from_u64(2),
        )?;
        let records = (0..300).map(|_| sim.step()).collect::<Result<Vec<_>, _>>()?;
        let report = check_conditions(&records, &variant, &schedule, &graph);
        println!("{} (all pass: {})", variant.name(), report.all_pass());
        println!("{}", serde_json::to_string_pretty(&report)?);
    }
    Ok(())
}
