//! The five built-in topologies and the spectra of their limiting mean dynamics.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use social_sampling::analysis::limiting_check_for;
use social_sampling::topology::generate;
use social_sampling::{AlgorithmVariant, TopologyKind};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let kinds = [
        TopologyKind::Grid { rows: 10, cols: 10 },
        TopologyKind::Star { n: 100 },
        TopologyKind::ErdosRenyi { n: 100, p: 0.6 },
        TopologyKind::PreferentialAttachment { n: 100, m_new: 3 },
        TopologyKind::WattsStrogatz {
            rows: 10,
            cols: 10,
            rewire_p: 0.1,
        },
    ];
    println!(
        "{:<28} {:>6} {:>6} {:>10} {:>12} {:>12}",
        "topology", "edges", "d_max", "components", "slowest", "fastest"
    );
    for (k, kind) in kinds.iter().enumerate() {
        let g = generate(kind, &mut ChaCha8Rng::seed_from_u64(k as u64))?;
        let check = limiting_check_for(&AlgorithmVariant::CensoredExchange, &g);
        println!(
            "{:<28} {:>6} {:>6} {:>10} {:>12.4} {:>12.4}",
            kind.to_string(),
            g.edge_count(),
            g.max_degree(),
            g.component_count(),
            check.max_nonzero_eigenvalue.unwrap_or(f64::NAN),
            check.min_eigenvalue,
        );
    }
    Ok(())
}
