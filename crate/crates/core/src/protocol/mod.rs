//! The social-sampling state machine.
//!
//! Each round every node draws one message (an opinion or silence) from a
//! law derived from its estimate, then all nodes apply the linear update
//!
//! ```text
//! Q_i(t+1) = (1 − δ A_ii) Q_i(t) − δ B_ii Y_i(t) + Σ_{j ∈ N_i} δ W_ij Y_j(t)
//! ```
//!
//! synchronously. [`Simulator`] owns a trial's graph, state and random stream;
//! the free functions expose the individual stages.

mod checkpoint;
mod schedule;
mod variant;

pub use checkpoint::{Checkpoint, TrajectoryReader, TrajectoryWriter};
pub use schedule::{eval_schedule, ScheduleKind, StepSchedule, DEFAULT_CAP};
pub use variant::{
    AlgorithmVariant, SamplingMatrix, UpdateRule, VariantKind, Weights, ROW_IDENTITY_TOLERANCE,
};

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::linalg::Matrix;
use crate::simplex::{
    sample_message, Message, OpinionSample, SubDistribution, NEGATIVITY_TOLERANCE, SUM_TOLERANCE,
};
use crate::topology::Graph;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ProtocolError {
    #[error("sampling row of node {node} is not a distribution")]
    InvalidRow { node: usize },
    #[error("row identity violated at node {node} (residual {residual:e})")]
    Condition1Violation { node: usize, residual: f64 },
    #[error("row {node} left the simplex at round {t}")]
    SimplexViolation { node: usize, t: u64 },
    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),
}

/// Round index plus the `n × M` estimate matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct NetworkState {
    pub t: u64,
    pub q: Matrix,
}

impl NetworkState {
    pub fn node_count(&self) -> usize {
        self.q.rows()
    }

    pub fn alphabet(&self) -> usize {
        self.q.cols()
    }

    /// `1ᵀ Q(t)`.
    pub fn mass(&self) -> Vec<f64> {
        self.q.column_sums()
    }
}

/// `Q_i(0) = e_{X_i}`.
pub fn init_state(sample: &OpinionSample) -> NetworkState {
    let m = sample.alphabet();
    let mut q = Matrix::zeros(sample.len(), m);
    for (i, &x) in sample.values().iter().enumerate() {
        q[(i, x)] = 1.0;
    }
    NetworkState { t: 0, q }
}

/// Everything realized in one round.
#[derive(Debug, Clone, PartialEq)]
pub struct RoundRecord {
    pub t: u64,
    pub delta: f64,
    pub sampling: SamplingMatrix,
    pub messages: Vec<Message>,
    pub weights: Weights,
    pub expected: Weights,
    pub q_before: Matrix,
    pub q_after: Matrix,
}

impl RoundRecord {
    /// `Y(t)` as a dense `n × M` matrix.
    pub fn message_matrix(&self) -> Matrix {
        message_matrix(&self.messages, self.q_before.cols())
    }
}

pub fn message_matrix(messages: &[Message], m: usize) -> Matrix {
    let mut y = Matrix::zeros(messages.len(), m);
    for (i, msg) in messages.iter().enumerate() {
        if let Message::Opinion(k) = *msg {
            y[(i, k)] = 1.0;
        }
    }
    y
}

/// Step size applied at round `t`.
pub fn step_size(variant: &AlgorithmVariant, schedule: &StepSchedule, t: u64) -> f64 {
    variant.fixed_step().unwrap_or_else(|| schedule.eval(t))
}

/// Sampling laws `P_i(t)` for every node.
pub fn sampling_matrix(
    state: &NetworkState,
    variant: &AlgorithmVariant,
    schedule: &StepSchedule,
    graph: &Graph,
) -> Result<Vec<SubDistribution>, ProtocolError> {
    let delta = step_size(variant, schedule, state.t);
    let mut out = SamplingMatrix::zeros(state.node_count(), state.alphabet());
    variant.sampling_into(graph, &state.q, delta, schedule.cap.is_none(), &mut out)?;
    Ok(out.rows())
}

/// Realized `(A(t), B(t), W(t))` for the drawn messages.
pub fn realize_weights(
    variant: &AlgorithmVariant,
    graph: &Graph,
    messages: &[Message],
    delta: f64,
) -> Result<Weights, ProtocolError> {
    if messages.len() != graph.node_count() {
        return Err(ProtocolError::DimensionMismatch(format!(
            "{} messages for {} nodes",
            messages.len(),
            graph.node_count()
        )));
    }
    let mut w = Weights::zeros(graph);
    variant.realize_into(graph, messages, delta, &mut w)?;
    Ok(w)
}

/// One application of the linear update. The row identity is checked first;
/// `check_simplex` additionally rejects rows that leave the simplex.
pub fn apply_update(
    state: &NetworkState,
    graph: &Graph,
    weights: &Weights,
    messages: &[Message],
    delta: f64,
    check_simplex: bool,
) -> Result<NetworkState, ProtocolError> {
    let n = state.node_count();
    if graph.node_count() != n || messages.len() != n {
        return Err(ProtocolError::DimensionMismatch(format!(
            "state has {n} rows, graph {} nodes, {} messages",
            graph.node_count(),
            messages.len()
        )));
    }
    for (node, r) in weights.row_identity_residuals(graph).into_iter().enumerate() {
        if r.abs() > ROW_IDENTITY_TOLERANCE {
            return Err(ProtocolError::Condition1Violation { node, residual: r });
        }
    }
    let mut next = Matrix::zeros(n, state.alphabet());
    update_into(&state.q, graph, weights, messages, delta, &mut next);
    let out = NetworkState { t: state.t + 1, q: next };
    if check_simplex {
        check_rows(&out.q, state.t)?;
    }
    Ok(out)
}

fn update_into(q: &Matrix, graph: &Graph, w: &Weights, messages: &[Message], delta: f64, next: &mut Matrix) {
    for i in 0..q.rows() {
        let keep = 1.0 - delta * w.decay[i];
        let row = next.row_mut(i);
        for (dst, &src) in row.iter_mut().zip(q.row(i)) {
            *dst = keep * src;
        }
        if let Message::Opinion(k) = messages[i] {
            row[k] -= delta * w.send[i];
        }
        for (s, &j) in graph.slot_range(i).zip(graph.neighbors(i)) {
            if let Message::Opinion(k) = messages[j] {
                row[k] += delta * w.receive[s];
            }
        }
    }
}

fn check_rows(q: &Matrix, t: u64) -> Result<(), ProtocolError> {
    for node in 0..q.rows() {
        let row = q.row(node);
        let ok = row.iter().all(|&x| x >= -NEGATIVITY_TOLERANCE)
            && (row.iter().sum::<f64>() - 1.0).abs() <= SUM_TOLERANCE;
        if !ok {
            return Err(ProtocolError::SimplexViolation { node, t });
        }
    }
    Ok(())
}

/// Advances one round on a borrowed state; see [`Simulator`] for the owning form.
pub fn step<R: Rng + ?Sized>(
    state: &NetworkState,
    variant: &AlgorithmVariant,
    schedule: &StepSchedule,
    graph: &Graph,
    rng: &mut R,
) -> Result<(NetworkState, RoundRecord), ProtocolError> {
    let mut scratch = Scratch::new(graph, state.node_count(), state.alphabet());
    let mut next = state.clone();
    let record = scratch.round(&mut next, variant, schedule, graph, rng, true)?;
    Ok((next, record.expect("record requested")))
}

/// Reusable per-trial buffers.
#[derive(Debug, Clone)]
struct Scratch {
    sampling: SamplingMatrix,
    messages: Vec<Message>,
    weights: Weights,
    next: Matrix,
}

impl Scratch {
    fn new(graph: &Graph, n: usize, m: usize) -> Self {
        Self {
            sampling: SamplingMatrix::zeros(n, m),
            messages: vec![Message::Silent; n],
            weights: Weights::zeros(graph),
            next: Matrix::zeros(n, m),
        }
    }

    fn round<R: Rng + ?Sized>(
        &mut self,
        state: &mut NetworkState,
        variant: &AlgorithmVariant,
        schedule: &StepSchedule,
        graph: &Graph,
        rng: &mut R,
        want_record: bool,
    ) -> Result<Option<RoundRecord>, ProtocolError> {
        let n = state.node_count();
        if graph.node_count() != n {
            return Err(ProtocolError::DimensionMismatch(format!(
                "state has {n} rows but graph has {} nodes",
                graph.node_count()
            )));
        }
        let t = state.t;
        let delta = step_size(variant, schedule, t);
        variant.sampling_into(graph, &state.q, delta, schedule.cap.is_none(), &mut self.sampling)?;
        for i in 0..n {
            self.messages[i] = draw(self.sampling.probs.row(i), self.sampling.silent[i], rng);
        }
        variant.realize_into(graph, &self.messages, delta, &mut self.weights)?;
        update_into(&state.q, graph, &self.weights, &self.messages, delta, &mut self.next);
        if variant.preserves_simplex() {
            check_rows(&self.next, t)?;
        }
        let record = want_record.then(|| RoundRecord {
            t,
            delta,
            sampling: self.sampling.clone(),
            messages: self.messages.clone(),
            weights: self.weights.clone(),
            expected: variant.expected_weights(graph, &self.sampling, delta),
            q_before: state.q.clone(),
            q_after: self.next.clone(),
        });
        std::mem::swap(&mut state.q, &mut self.next);
        state.t += 1;
        Ok(record)
    }
}

fn draw<R: Rng + ?Sized>(probs: &[f64], silent: f64, rng: &mut R) -> Message {
    crate::simplex::sample_slice(probs, silent, rng)
}

/// A single trial: graph, variant, schedule, state and its own random stream.
#[derive(Debug, Clone)]
pub struct Simulator {
    graph: Graph,
    variant: AlgorithmVariant,
    schedule: StepSchedule,
    state: NetworkState,
    rng: ChaCha8Rng,
    scratch: Scratch,
}

impl Simulator {
    pub fn new(
        graph: Graph,
        variant: AlgorithmVariant,
        schedule: StepSchedule,
        state: NetworkState,
        rng: ChaCha8Rng,
    ) -> Result<Self, ProtocolError> {
        if graph.node_count() != state.node_count() {
            return Err(ProtocolError::DimensionMismatch(format!(
                "state has {} rows but graph has {} nodes",
                state.node_count(),
                graph.node_count()
            )));
        }
        let scratch = Scratch::new(&graph, state.node_count(), state.alphabet());
        Ok(Self {
            graph,
            variant,
            schedule,
            state,
            rng,
            scratch,
        })
    }

    pub fn from_sample(
        graph: Graph,
        variant: AlgorithmVariant,
        schedule: StepSchedule,
        sample: &OpinionSample,
        rng: ChaCha8Rng,
    ) -> Result<Self, ProtocolError> {
        Self::new(graph, variant, schedule, init_state(sample), rng)
    }

    /// Advances one round without keeping intermediates.
    pub fn advance(&mut self) -> Result<(), ProtocolError> {
        self.scratch
            .round(&mut self.state, &self.variant, &self.schedule, &self.graph, &mut self.rng, false)
            .map(|_| ())
    }

    /// Advances one round and returns its full record. Consumes the random
    /// stream exactly like [`advance`](Self::advance).
    pub fn step(&mut self) -> Result<RoundRecord, ProtocolError> {
        self.scratch
            .round(&mut self.state, &self.variant, &self.schedule, &self.graph, &mut self.rng, true)
            .map(|r| r.expect("record requested"))
    }

    pub fn run_until(&mut self, t: u64) -> Result<(), ProtocolError> {
        while self.state.t < t {
            self.advance()?;
        }
        Ok(())
    }

    pub fn state(&self) -> &NetworkState {
        &self.state
    }

    pub fn graph(&self) -> &Graph {
        &self.graph
    }

    pub fn variant(&self) -> &AlgorithmVariant {
        &self.variant
    }

    pub fn schedule(&self) -> &StepSchedule {
        &self.schedule
    }

    pub fn rng(&self) -> &ChaCha8Rng {
        &self.rng
    }

    /// Replaces the interaction graph for subsequent rounds (time-varying topologies).
    pub fn set_graph(&mut self, graph: Graph) -> Result<(), ProtocolError> {
        if graph.node_count() != self.state.node_count() {
            return Err(ProtocolError::DimensionMismatch(format!(
                "new graph has {} nodes, state has {} rows",
                graph.node_count(),
                self.state.node_count()
            )));
        }
        self.scratch.weights = Weights::zeros(&graph);
        self.graph = graph;
        Ok(())
    }

    pub fn checkpoint(&self) -> Checkpoint {
        Checkpoint {
            t: self.state.t,
            rng_word_pos: self.rng.get_word_pos(),
            q: self.state.q.clone(),
        }
    }

    /// Restores state and stream position from a checkpoint taken on the same stream.
    pub fn restore(&mut self, cp: &Checkpoint) -> Result<(), ProtocolError> {
        if cp.q.rows() != self.state.node_count() || cp.q.cols() != self.state.alphabet() {
            return Err(ProtocolError::DimensionMismatch("checkpoint shape".into()));
        }
        self.state = NetworkState { t: cp.t, q: cp.q.clone() };
        self.rng.set_word_pos(cp.rng_word_pos);
        Ok(())
    }
}

/// Draws one message per node from the given laws.
pub fn draw_messages<R: Rng + ?Sized>(laws: &[SubDistribution], rng: &mut R) -> Vec<Message> {
    laws.iter().map(|p| sample_message(p, rng)).collect()
}
