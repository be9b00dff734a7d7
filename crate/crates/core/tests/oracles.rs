use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use social_sampling::analysis::{
    conditional_mean_noise, conditional_mean_perturbation, conditional_means_enumerated, disagreement, mse_per_node,
};
use social_sampling::protocol::{sampling_matrix, step, step_size, NetworkState, SamplingMatrix};
use social_sampling::topology::{generate, TopologyKind};
use social_sampling::{AlgorithmVariant, Graph, Matrix, StepSchedule};

fn path(n: usize) -> Graph {
    generate(&TopologyKind::Grid { rows: 1, cols: n }, &mut ChaCha8Rng::seed_from_u64(0)).unwrap()
}

fn random_state<R: Rng>(n: usize, m: usize, rng: &mut R) -> Matrix {
    let mut q = Matrix::zeros(n, m);
    for i in 0..n {
        let row = q.row_mut(i);
        for x in row.iter_mut() {
            *x = if rng.random_bool(0.3) { 0.0 } else { rng.random::<f64>() };
        }
        if row.iter().all(|&x| x == 0.0) {
            row[0] = 1.0;
        }
        let s: f64 = row.iter().sum();
        row.iter_mut().for_each(|x| *x /= s);
    }
    q
}

fn variants() -> [AlgorithmVariant; 3] {
    [
        AlgorithmVariant::Averaging,
        AlgorithmVariant::DecayingAveraging,
        AlgorithmVariant::CensoredExchange,
    ]
}

#[test]
fn noise_has_zero_mean_on_two_node_path() {
    let g = path(2);
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    for v in variants() {
        for _ in 0..50 {
            let s = NetworkState {
                t: rng.random_range(0..30),
                q: random_state(2, 2, &mut rng),
            };
            let m = conditional_mean_noise(&s, &v, &StepSchedule::harmonic(1.0), &g).unwrap();
            assert!(m.max_abs() <= 1e-12, "{}: {}", v.name(), m.max_abs());
        }
    }
}

#[test]
fn noise_has_zero_mean_on_three_node_path() {
    let g = path(3);
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    for v in variants() {
        for _ in 0..50 {
            let s = NetworkState {
                t: rng.random_range(0..30),
                q: random_state(3, 2, &mut rng),
            };
            let m = conditional_mean_noise(&s, &v, &StepSchedule::harmonic(2.0), &g).unwrap();
            assert!(m.max_abs() <= 1e-12);
        }
    }
}

#[test]
fn noise_has_zero_mean_on_small_grid_with_more_opinions() {
    // 4 nodes, 4 opinions: 5^4 joint outcomes
    let g = generate(&TopologyKind::Grid { rows: 2, cols: 2 }, &mut ChaCha8Rng::seed_from_u64(0)).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for v in variants() {
        for _ in 0..10 {
            let s = NetworkState {
                t: rng.random_range(0..10),
                q: random_state(4, 4, &mut rng),
            };
            let m = conditional_mean_noise(&s, &v, &StepSchedule::harmonic(1.0).uncapped(), &g).unwrap();
            assert!(m.max_abs() <= 1e-12);
        }
    }
}

#[test]
fn closed_form_perturbation_matches_enumeration() {
    let g = path(3);
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let schedule = StepSchedule::harmonic(1.0);
    for v in variants() {
        for _ in 0..30 {
            let s = NetworkState {
                t: rng.random_range(0..20),
                q: random_state(3, 3, &mut rng),
            };
            let (c_enum, _) = conditional_means_enumerated(&s, &v, &schedule, &g).unwrap();
            let sampling = SamplingMatrix::from_rows(&sampling_matrix(&s, &v, &schedule, &g).unwrap());
            let delta = step_size(&v, &schedule, s.t);
            let expected = v.expected_weights(&g, &sampling, delta);
            let c = conditional_mean_perturbation(&v, &g, &sampling, &expected, &s.q).unwrap();
            assert!(c.max_abs_diff(&c_enum) <= 1e-12);
        }
    }
}

#[test]
fn censored_perturbation_scales_with_step() {
    // each censored entry is below d_max·δ, so |E[C]|/δ stays bounded
    let g = path(3);
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let v = AlgorithmVariant::CensoredExchange;
    let schedule = StepSchedule::harmonic(1.0);
    for t in [10u64, 100, 1000, 10_000] {
        for _ in 0..20 {
            let s = NetworkState {
                t,
                q: random_state(3, 3, &mut rng),
            };
            let (c, _) = conditional_means_enumerated(&s, &v, &schedule, &g).unwrap();
            let delta = step_size(&v, &schedule, t);
            // |E[C]| ≤ Σ_i Σ_j over censored mass, at most 2·d_max·(M·d_max·δ) per row
            assert!(c.frobenius_norm() / delta <= 3.0 * 2.0 * 2.0 * 3.0 * 2.0);
        }
    }
}

#[test]
fn single_step_replays_preserve_mass_on_average() {
    let g = path(3);
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let q = random_state(3, 3, &mut rng);
    let state = NetworkState { t: 4, q };
    let before = state.mass();
    for v in [AlgorithmVariant::Averaging, AlgorithmVariant::DecayingAveraging] {
        let k = 40_000;
        let mut acc = [0.0; 3];
        let mut sq = [0.0; 3];
        for _ in 0..k {
            let (next, _) = step(&state, &v, &StepSchedule::harmonic(2.0), &g, &mut rng).unwrap();
            for (m, x) in next.mass().iter().enumerate() {
                acc[m] += x;
                sq[m] += x * x;
            }
        }
        for m in 0..3 {
            let mean = acc[m] / k as f64;
            let sd = (sq[m] / k as f64 - mean * mean).max(0.0).sqrt();
            let se = sd / (k as f64).sqrt();
            assert!((mean - before[m]).abs() <= 4.0 * se + 1e-12, "{} opinion {m}", v.name());
        }
    }
}

fn naive_mse(q: &Matrix, pi: &[f64]) -> f64 {
    let mut total = 0.0;
    for i in 0..q.rows() {
        for k in 0..q.cols() {
            let d = q[(i, k)] - pi[k];
            total += d * d;
        }
    }
    total / q.rows() as f64
}

fn naive_disagreement(q: &Matrix) -> f64 {
    let mut worst = 0.0f64;
    for i in 0..q.rows() {
        for j in 0..q.rows() {
            let mut d = 0.0;
            for k in 0..q.cols() {
                d += (q[(i, k)] - q[(j, k)]).powi(2);
            }
            worst = worst.max(d.sqrt());
        }
    }
    worst
}

#[test]
fn metrics_match_naive_loops() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for _ in 0..100 {
        let q = random_state(4, 3, &mut rng);
        let pi = random_state(1, 3, &mut rng).row(0).to_vec();
        assert!((mse_per_node(&q, &pi).unwrap() - naive_mse(&q, &pi)).abs() <= 1e-14);
        assert!((disagreement(&q) - naive_disagreement(&q)).abs() <= 1e-14);
    }
}

#[test]
fn small_disagreement_bounds_mse_under_conserved_mass() {
    // with 1ᵀQ = nΠ the row mean is Π, so every row is within the disagreement of Π
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    for _ in 0..200 {
        let n = 6;
        let base = random_state(1, 4, &mut rng).row(0).to_vec();
        let eps = 10f64.powi(-rng.random_range(2..8));
        let mut q = Matrix::zeros(n, 4);
        for i in 0..n {
            for k in 0..4 {
                q[(i, k)] = base[k];
            }
            // move mass between two coordinates, zero-sum across the network
            let shift = eps * if i % 2 == 0 { 0.5 } else { -0.5 };
            q[(i, 0)] += shift;
            q[(i, 1)] -= shift;
        }
        let pi: Vec<f64> = q.column_sums().iter().map(|s| s / n as f64).collect();
        let d = disagreement(&q);
        assert!(mse_per_node(&q, &pi).unwrap() <= d * d + 1e-15);
    }
}
