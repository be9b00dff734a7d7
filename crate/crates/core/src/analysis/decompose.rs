//! Splitting a realized round into mean drift, perturbation and martingale noise.
//!
//! With `(Ā, B̄, W̄)` the conditional expectations of the realized
//! coefficients, a round can be rewritten as
//!
//! ```text
//! Q(t+1) = Q(t) + δ(t) [ H̄(t) Q(t) + C(t) + M(t) ]
//! H̄(t) = W̄ − B̄ − Ā
//! C(t) = (W − B)(P − Q) + (W − B − W̄ + B̄) Y
//! M(t) = (W − B − A − W̄ + B̄ + Ā) Q + (W̄ − B̄)(Y − P) + (W̄ − B̄ − W + B) P
//! ```
//!
//! where `M(t)` has zero conditional mean.

use crate::linalg::Matrix;
use crate::protocol::{
    message_matrix, realize_weights, step_size, AlgorithmVariant, NetworkState, RoundRecord, SamplingMatrix,
    StepSchedule, Weights,
};
use crate::simplex::Message;
use crate::topology::Graph;

use super::AnalysisError;

/// Largest joint outcome space enumerated exactly.
pub const ENUMERATION_LIMIT: u128 = 1_000_000;
/// Entrywise tolerance for the reconstruction identity.
pub const RECONSTRUCTION_TOLERANCE: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq)]
pub struct StepDecomposition {
    /// `H̄(t)`, `n × n`.
    pub drift: Matrix,
    /// `C(t)`, `n × M`.
    pub perturbation: Matrix,
    /// `M(t)`, `n × M`.
    pub noise: Matrix,
    pub expected: Weights,
}

impl StepDecomposition {
    /// `Q + δ (H̄ Q + C + M)`.
    pub fn reconstruct(&self, q: &Matrix, delta: f64) -> Matrix {
        let inner = &(&self.drift.matmul(q) + &self.perturbation) + &self.noise;
        q + &inner.scale(delta)
    }
}

struct Dense {
    a: Matrix,
    b: Matrix,
    w: Matrix,
}

impl Dense {
    fn new(weights: &Weights, graph: &Graph) -> Self {
        let (a, b, w) = weights.to_dense(graph);
        Self { a, b, w }
    }

    fn w_minus_b(&self) -> Matrix {
        &self.w - &self.b
    }
}

fn perturbation_and_noise(
    realized: &Dense,
    expected: &Dense,
    q: &Matrix,
    p: &Matrix,
    y: &Matrix,
) -> (Matrix, Matrix) {
    let wb = realized.w_minus_b();
    let wb_bar = expected.w_minus_b();
    let wb_gap = &wb - &wb_bar;
    let perturbation = &wb.matmul(&(p - q)) + &wb_gap.matmul(y);

    let full_gap = &wb_gap - &(&realized.a - &expected.a);
    let noise = &(&full_gap.matmul(q) + &wb_bar.matmul(&(y - p))) - &wb_gap.matmul(p);
    (perturbation, noise)
}

/// Decomposes one recorded round and verifies the reconstruction identity.
pub fn decompose(record: &RoundRecord, graph: &Graph) -> Result<StepDecomposition, AnalysisError> {
    let realized = Dense::new(&record.weights, graph);
    let expected = Dense::new(&record.expected, graph);
    let y = record.message_matrix();
    let (perturbation, noise) =
        perturbation_and_noise(&realized, &expected, &record.q_before, &record.sampling.probs, &y);
    let drift = &(&expected.w - &expected.b) - &expected.a;
    let out = StepDecomposition {
        drift,
        perturbation,
        noise,
        expected: record.expected.clone(),
    };
    let err = out
        .reconstruct(&record.q_before, record.delta)
        .max_abs_diff(&record.q_after);
    if !(err <= RECONSTRUCTION_TOLERANCE) {
        return Err(AnalysisError::ReconstructionMismatch { t: record.t, error: err });
    }
    Ok(out)
}

/// Iterates over every joint outcome with positive probability.
fn for_each_outcome<F: FnMut(&[Message], f64)>(sampling: &SamplingMatrix, mut f: F) {
    let n = sampling.silent.len();
    let m = sampling.probs.cols();
    // per node: the outcomes with positive probability
    let support: Vec<Vec<(Message, f64)>> = (0..n)
        .map(|i| {
            let mut v: Vec<(Message, f64)> = sampling
                .probs
                .row(i)
                .iter()
                .enumerate()
                .filter(|(_, &p)| p > 0.0)
                .map(|(k, &p)| (Message::Opinion(k), p))
                .collect();
            if sampling.silent[i] > 0.0 {
                v.push((Message::Silent, sampling.silent[i]));
            }
            let _ = m;
            v
        })
        .collect();
    if support.iter().any(Vec::is_empty) {
        return;
    }
    let mut idx = vec![0usize; n];
    let mut msgs: Vec<Message> = support.iter().map(|s| s[0].0).collect();
    loop {
        let prob: f64 = (0..n).map(|i| support[i][idx[i]].1).product();
        f(&msgs, prob);
        let mut k = 0;
        loop {
            if k == n {
                return;
            }
            idx[k] += 1;
            if idx[k] < support[k].len() {
                msgs[k] = support[k][idx[k]].0;
                break;
            }
            idx[k] = 0;
            msgs[k] = support[k][0].0;
            k += 1;
        }
    }
}

fn enumeration_size(n: usize, m: usize) -> u128 {
    let base = m as u128 + 1;
    let mut size: u128 = 1;
    for _ in 0..n {
        size = size.saturating_mul(base);
        if size > ENUMERATION_LIMIT {
            return size;
        }
    }
    size
}

/// Sampling laws and expected weights at a frozen state.
fn frozen_round(
    state: &NetworkState,
    variant: &AlgorithmVariant,
    schedule: &StepSchedule,
    graph: &Graph,
) -> Result<(f64, SamplingMatrix, Weights), AnalysisError> {
    let delta = step_size(variant, schedule, state.t);
    let rows = crate::protocol::sampling_matrix(state, variant, schedule, graph)?;
    let sampling = SamplingMatrix::from_rows(&rows);
    let expected = variant.expected_weights(graph, &sampling, delta);
    Ok((delta, sampling, expected))
}

/// Exact `(E[C(t) | history], E[M(t) | history])` by summing over all joint messages.
pub fn conditional_means_enumerated(
    state: &NetworkState,
    variant: &AlgorithmVariant,
    schedule: &StepSchedule,
    graph: &Graph,
) -> Result<(Matrix, Matrix), AnalysisError> {
    let (n, m) = (state.node_count(), state.alphabet());
    let size = enumeration_size(n, m);
    if size > ENUMERATION_LIMIT {
        return Err(AnalysisError::TooLargeToEnumerate { outcomes: size });
    }
    let (delta, sampling, expected_w) = frozen_round(state, variant, schedule, graph)?;
    let expected = Dense::new(&expected_w, graph);
    let mut mean_c = Matrix::zeros(n, m);
    let mut mean_m = Matrix::zeros(n, m);
    let mut failure = None;
    for_each_outcome(&sampling, |msgs, prob| {
        if failure.is_some() {
            return;
        }
        let realized = match realize_weights(variant, graph, msgs, delta) {
            Ok(w) => Dense::new(&w, graph),
            Err(e) => {
                failure = Some(e);
                return;
            }
        };
        let y = message_matrix(msgs, m);
        let (c, noise) = perturbation_and_noise(&realized, &expected, &state.q, &sampling.probs, &y);
        for (acc, x) in mean_c.as_mut_slice().iter_mut().zip(c.as_slice()) {
            *acc += prob * x;
        }
        for (acc, x) in mean_m.as_mut_slice().iter_mut().zip(noise.as_slice()) {
            *acc += prob * x;
        }
    });
    if let Some(e) = failure {
        return Err(e.into());
    }
    Ok((mean_c, mean_m))
}

/// Exact `E[M(t) | history]` by outcome enumeration; zero up to rounding.
pub fn conditional_mean_noise(
    state: &NetworkState,
    variant: &AlgorithmVariant,
    schedule: &StepSchedule,
    graph: &Graph,
) -> Result<Matrix, AnalysisError> {
    conditional_means_enumerated(state, variant, schedule, graph).map(|(_, m)| m)
}

/// `E[C(t) | history]` in closed form: `E[(W − B) Y] − (W̄ − B̄) Q`.
///
/// Returns `None` for custom rules without a known message drive.
pub fn conditional_mean_perturbation(
    variant: &AlgorithmVariant,
    graph: &Graph,
    sampling: &SamplingMatrix,
    expected: &Weights,
    q: &Matrix,
) -> Option<Matrix> {
    let drive = variant.expected_message_drive(graph, sampling)?;
    let dense = Dense::new(expected, graph);
    Some(&drive - &dense.w_minus_b().matmul(q))
}
