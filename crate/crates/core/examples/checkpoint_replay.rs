//! Writes a trajectory file, then resumes from a mid-run checkpoint and
//! reproduces the remaining rounds bit for bit.

use std::io::BufReader;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use social_sampling::protocol::{init_state, TrajectoryReader, TrajectoryWriter};
use social_sampling::simplex::make_distribution;
use social_sampling::topology::generate;
use social_sampling::{AlgorithmVariant, OpinionSample, Simulator, StepSchedule, TopologyKind};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let graph = generate(&TopologyKind::Star { n: 12 }, &mut ChaCha8Rng::seed_from_u64(0))?;
    let law = make_distribution(&[0.25; 4])?;
    let sample = OpinionSample::draw(&law, graph.node_count(), &mut ChaCha8Rng::seed_from_u64(1));
    let fresh = || {
        Simulator::new(
            graph.clone(),
            AlgorithmVariant::CensoredExchange,
            StepSchedule::harmonic(1.0),
            init_state(&sample),
            ChaCha8Rng::seed_from_u64(8),
        )
    };

    let mut sim = fresh()?;
    let mut writer = TrajectoryWriter::new(Vec::new(), graph.node_count(), 4)?;
    for _ in 0..10 {
        sim.run_until(sim.state().t + 100)?;
        writer.write(&sim.checkpoint())?;
    }
    let text = writer.into_inner();
    println!("trajectory file: {} bytes", text.len());

    let checkpoints = TrajectoryReader::read(BufReader::new(text.as_slice()))?;
    let mid = &checkpoints[4];
    let mut resumed = fresh()?;
    resumed.restore(mid)?;
    resumed.run_until(1_000)?;
    let last = checkpoints.last().unwrap();
    println!(
        "resumed at t={} and reached t={}: identical = {}",
        mid.t,
        resumed.state().t,
        resumed.state().q == last.q
    );
    Ok(())
}
