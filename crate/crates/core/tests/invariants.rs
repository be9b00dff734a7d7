use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use social_sampling::analysis::decompose;
use social_sampling::protocol::{init_state, step};
use social_sampling::simplex::make_distribution;
use social_sampling::topology::{generate, TopologyKind};
use social_sampling::{AlgorithmVariant, OpinionSample, Simulator, StepSchedule};

fn topology() -> impl Strategy<Value = TopologyKind> {
    prop_oneof![
        (1usize..4, 2usize..5).prop_map(|(rows, cols)| TopologyKind::Grid { rows, cols }),
        (2usize..9).prop_map(|n| TopologyKind::Star { n }),
        (3usize..10).prop_map(|n| TopologyKind::ErdosRenyi { n, p: 0.5 }),
    ]
}

fn variant() -> impl Strategy<Value = AlgorithmVariant> {
    prop_oneof![
        Just(AlgorithmVariant::Averaging),
        Just(AlgorithmVariant::DecayingAveraging),
        Just(AlgorithmVariant::CensoredExchange),
    ]
}

fn schedule() -> impl Strategy<Value = StepSchedule> {
    prop_oneof![
        (0.1f64..5.0).prop_map(StepSchedule::harmonic),
        (0.1f64..5.0).prop_map(StepSchedule::square),
        (0.001f64..0.5).prop_map(StepSchedule::constant),
        (0.1f64..5.0).prop_map(|c| StepSchedule::harmonic(c).uncapped()),
    ]
}

fn sample(n: usize, m: usize, seed: u64) -> OpinionSample {
    let law = make_distribution(&vec![1.0 / m as f64; m]).unwrap();
    OpinionSample::draw(&law, n, &mut ChaCha8Rng::seed_from_u64(seed))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn rows_stay_on_simplex(kind in topology(), censored in any::<bool>(), s in schedule(), m in 2usize..6, seed in any::<u64>()) {
        let v = if censored { AlgorithmVariant::CensoredExchange } else { AlgorithmVariant::Averaging };
        let g = generate(&kind, &mut ChaCha8Rng::seed_from_u64(seed)).unwrap();
        let sample = sample(g.node_count(), m, seed ^ 1);
        let mut sim = Simulator::from_sample(g, v, s, &sample, ChaCha8Rng::seed_from_u64(seed ^ 2)).unwrap();
        for _ in 0..60 {
            sim.advance().unwrap();
            let q = &sim.state().q;
            for i in 0..q.rows() {
                let row = q.row(i);
                prop_assert!(row.iter().all(|&x| x >= -1e-12));
                prop_assert!((row.iter().sum::<f64>() - 1.0).abs() <= 1e-9);
            }
        }
    }

    #[test]
    fn censored_exchange_conserves_mass(kind in topology(), s in schedule(), m in 2usize..6, seed in any::<u64>()) {
        let g = generate(&kind, &mut ChaCha8Rng::seed_from_u64(seed)).unwrap();
        let sample = sample(g.node_count(), m, seed ^ 1);
        let before = init_state(&sample).mass();
        let mut sim = Simulator::from_sample(g, AlgorithmVariant::CensoredExchange, s, &sample, ChaCha8Rng::seed_from_u64(seed)).unwrap();
        sim.run_until(80).unwrap();
        for (a, b) in sim.state().mass().iter().zip(&before) {
            prop_assert!((a - b).abs() <= 1e-10);
        }
    }

    #[test]
    fn realized_weights_satisfy_row_identity(kind in topology(), v in variant(), s in schedule(), seed in any::<u64>()) {
        let g = generate(&kind, &mut ChaCha8Rng::seed_from_u64(seed)).unwrap();
        let mut state = init_state(&sample(g.node_count(), 3, seed));
        let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 3);
        for _ in 0..20 {
            let (next, record) = step(&state, &v, &s, &g, &mut rng).unwrap();
            prop_assert!(record.weights.max_row_identity_residual(&g) <= 1e-12);
            state = next;
        }
    }

    #[test]
    fn decomposition_reconstructs_each_round(kind in topology(), v in variant(), s in schedule(), seed in any::<u64>()) {
        let g = generate(&kind, &mut ChaCha8Rng::seed_from_u64(seed)).unwrap();
        let mut state = init_state(&sample(g.node_count(), 4, seed));
        let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 5);
        for _ in 0..20 {
            let (next, record) = step(&state, &v, &s, &g, &mut rng).unwrap();
            let d = decompose(&record, &g).unwrap();
            let rebuilt = d.reconstruct(&record.q_before, record.delta);
            prop_assert!(rebuilt.max_abs_diff(&record.q_after) <= 1e-12);
            state = next;
        }
    }
}
