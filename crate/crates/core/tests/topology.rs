use nalgebra::DMatrix;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use social_sampling::linalg::jacobi_eigenvalues;
use social_sampling::topology::{generate, generate_with, spectrum, TopologyKind};
use social_sampling::{AlgorithmVariant, Graph, Matrix};

fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

fn nalgebra_eigenvalues(m: &Matrix) -> Vec<f64> {
    let d = DMatrix::from_row_slice(m.rows(), m.cols(), m.as_slice());
    let mut v: Vec<f64> = d.symmetric_eigen().eigenvalues.iter().copied().collect();
    v.sort_by(f64::total_cmp);
    v
}

#[test]
fn grid_edge_count_formula() {
    for (r, c) in [(1, 1), (1, 7), (3, 4), (10, 10)] {
        let g = generate(&TopologyKind::Grid { rows: r, cols: c }, &mut rng(0)).unwrap();
        assert_eq!(g.edge_count(), r * (c - 1) + c * (r - 1));
    }
}

#[test]
fn watts_strogatz_preserves_counts() {
    let grid = generate(&TopologyKind::Grid { rows: 10, cols: 10 }, &mut rng(0)).unwrap();
    for seed in 0..20 {
        let g = generate_with(
            &TopologyKind::WattsStrogatz {
                rows: 10,
                cols: 10,
                rewire_p: 0.1,
            },
            &mut rng(seed),
            false,
        )
        .unwrap();
        assert_eq!(g.node_count(), 100);
        assert_eq!(g.edge_count(), grid.edge_count());
    }
}

#[test]
fn erdos_renyi_mean_edge_count() {
    let trials = 200;
    let total: usize = (0..trials)
        .map(|s| {
            generate(&TopologyKind::ErdosRenyi { n: 100, p: 0.6 }, &mut rng(s))
                .unwrap()
                .edge_count()
        })
        .sum();
    let mean = total as f64 / trials as f64;
    let pairs = 4950.0;
    let se = (pairs * 0.6 * 0.4 / trials as f64).sqrt();
    assert!((mean - 2970.0).abs() <= 3.0 * se, "{mean}");
}

#[test]
fn preferential_attachment_degrees() {
    let g = generate(&TopologyKind::PreferentialAttachment { n: 100, m_new: 3 }, &mut rng(4)).unwrap();
    assert!(g.is_connected());
    // seed clique of 3 nodes, then 97 nodes with 3 edges each
    assert_eq!(g.edge_count(), 3 + 97 * 3);
    assert!((3..100).all(|i| g.degree(i) >= 3));
}

#[test]
fn zero_eigenvalues_match_components() {
    let cases = [
        Graph::from_edges(6, &[(0, 1), (1, 2), (3, 4)]).unwrap(),
        Graph::empty(4),
        generate(&TopologyKind::Star { n: 9 }, &mut rng(0)).unwrap(),
        generate_with(&TopologyKind::ErdosRenyi { n: 30, p: 0.05 }, &mut rng(3), false).unwrap(),
    ];
    for g in cases {
        let eig = spectrum(&g.laplacian()).unwrap();
        let zeros = eig.iter().filter(|l| l.abs() < 1e-9).count();
        assert_eq!(zeros, g.component_count());
        assert!(eig.iter().all(|&l| l > -1e-9));
    }
}

#[test]
fn jacobi_matches_nalgebra() {
    let kinds = [
        TopologyKind::Grid { rows: 5, cols: 5 },
        TopologyKind::Star { n: 12 },
        TopologyKind::ErdosRenyi { n: 40, p: 0.3 },
        TopologyKind::PreferentialAttachment { n: 60, m_new: 3 },
        TopologyKind::WattsStrogatz {
            rows: 6,
            cols: 6,
            rewire_p: 0.2,
        },
    ];
    for (k, kind) in kinds.iter().enumerate() {
        let g = generate(kind, &mut rng(k as u64)).unwrap();
        let l = g.laplacian();
        let ours = jacobi_eigenvalues(&l);
        let theirs = nalgebra_eigenvalues(&l);
        for (a, b) in ours.iter().zip(&theirs) {
            assert!((a - b).abs() < 1e-8, "{kind}: {a} vs {b}");
        }
    }
}

#[test]
fn grid_mean_dynamics_is_scaled_laplacian() {
    let g = generate(&TopologyKind::Grid { rows: 5, cols: 5 }, &mut rng(0)).unwrap();
    let h = AlgorithmVariant::DecayingAveraging.limiting_weights(&g).drift_matrix(&g);
    let expect = g.laplacian().scale(-1.0 / 5.0);
    assert!(h.max_abs_diff(&expect) < 1e-15);
    let eig = nalgebra_eigenvalues(&h);
    // grid Laplacian eigenvalues are (2 - 2cos(πa/5)) + (2 - 2cos(πb/5))
    let mut analytic: Vec<f64> = (0..5)
        .flat_map(|a| (0..5).map(move |b| (a, b)))
        .map(|(a, b)| {
            let f = |k: i32| 2.0 - 2.0 * (std::f64::consts::PI * k as f64 / 5.0).cos();
            -(f(a) + f(b)) / 5.0
        })
        .collect();
    analytic.sort_by(f64::total_cmp);
    for (x, y) in eig.iter().zip(&analytic) {
        assert!((x - y).abs() < 1e-12);
    }
    let censored = AlgorithmVariant::CensoredExchange.limiting_weights(&g).drift_matrix(&g);
    assert!(censored.max_abs_diff(&g.laplacian().scale(-1.0)) == 0.0);
}

#[test]
fn edge_list_round_trip() {
    let g = generate(&TopologyKind::PreferentialAttachment { n: 30, m_new: 2 }, &mut rng(8)).unwrap();
    let back = Graph::from_edge_list_str(&g.to_edge_list()).unwrap();
    assert_eq!(back, g);
}
