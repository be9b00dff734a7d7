//! A user-defined instance of the linear update: lazy averaging, where each
//! node keeps half its estimate and spreads the rest over its neighbors'
//! messages. The condition checker accepts any rule that keeps the row identity.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use std::sync::Arc;

use social_sampling::analysis::check_conditions;
use social_sampling::protocol::{init_state, SamplingMatrix, UpdateRule, Weights};
use social_sampling::topology::generate;
use social_sampling::{
    AlgorithmVariant, Graph, Message, OpinionSample, Simulator, StepSchedule, SubDistribution, TopologyKind,
};

#[derive(Debug)]
struct LazyAveraging;

impl LazyAveraging {
    fn weights(&self, graph: &Graph) -> Weights {
        let mut w = Weights::zeros(graph);
        for i in 0..graph.node_count() {
            let share = 0.5 / graph.max_degree() as f64;
            for s in graph.slot_range(i) {
                w.receive[s] = share;
            }
            w.decay[i] = w.receive[graph.slot_range(i)].iter().sum();
        }
        w
    }
}

impl UpdateRule for LazyAveraging {
    fn name(&self) -> &str {
        "lazy_averaging"
    }

    fn sampling_row(&self, _graph: &Graph, _node: usize, estimate: &[f64], _delta: f64) -> SubDistribution {
        SubDistribution::new(estimate.to_vec()).expect("estimate rows are distributions")
    }

    fn realize(&self, graph: &Graph, _messages: &[Message], _delta: f64) -> Weights {
        self.weights(graph)
    }

    fn expected(&self, graph: &Graph, _sampling: &SamplingMatrix, _delta: f64) -> Weights {
        self.weights(graph)
    }

    fn limiting(&self, graph: &Graph) -> Weights {
        self.weights(graph)
    }

    fn preserves_simplex(&self) -> bool {
        true
    }
}

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let graph = generate(&TopologyKind::Grid { rows: 1, cols: 4 }, &mut ChaCha8Rng::seed_from_u64(0))?;
    let sample = OpinionSample::new(vec![0, 1, 2, 1], 3)?;
    let variant = AlgorithmVariant::Custom(Arc::new(LazyAveraging));
    let schedule = StepSchedule::harmonic(1.0);
    let mut sim = Simulator::new(
        graph.clone(),
        variant.clone(),
        schedule,
        init_state(&sample),
        ChaCha8Rng::seed_from_u64(9),
    )?;
    let records = (0..200).map(|_| sim.step()).collect::<Result<Vec<_>, _>>()?;
    let report = check_conditions(&records, &variant, &schedule, &graph);
    println!("mixing pass {} (residual {:.1e})", report.mixing.pass, report.mixing.max_residual);
    println!("limiting pass {}", report.limiting.pass);
    println!("perturbation pass {} (sup ratio {:.3e})", report.perturbation.pass, report.perturbation.sup_ratio);
    println!("mass drift {:.3e}", report.mass.max_drift);
    println!("final estimates:");
    for i in 0..graph.node_count() {
        let row: Vec<String> = sim.state().q.row(i).iter().map(|x| format!("{x:.3}")).collect();
        println!("  node {i}: [{}]", row.join(" "));
    }
    Ok(())
}
