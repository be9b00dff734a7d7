use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::linalg::Matrix;
use crate::simplex::{Message, SubDistribution, NEGATIVITY_TOLERANCE, SUM_TOLERANCE};
use crate::topology::Graph;

use super::ProtocolError;

/// Tolerance on the row identity `Σ_j W_ij − A_ii − B_ii = 0`.
pub const ROW_IDENTITY_TOLERANCE: f64 = 1e-12;

/// Coefficients of one linear update round.
///
/// `decay[i]` scales node `i`'s own estimate (`A_ii`), `send[i]` scales its own
/// outgoing message (`B_ii`) and `receive[s]` is the weight node `i` puts on
/// neighbor `j`'s message (`W_ij`), stored at slot `s` of the graph's
/// adjacency layout (see [`Graph::slot_range`]).
#[derive(Debug, Clone, PartialEq)]
pub struct Weights {
    pub decay: Vec<f64>,
    pub send: Vec<f64>,
    pub receive: Vec<f64>,
}

impl Weights {
    pub fn zeros(graph: &Graph) -> Self {
        let n = graph.node_count();
        Self {
            decay: vec![0.0; n],
            send: vec![0.0; n],
            receive: vec![0.0; graph.adjacency_slots()],
        }
    }

    /// Per-node value of `Σ_j W_ij − A_ii − B_ii`.
    pub fn row_identity_residuals(&self, graph: &Graph) -> Vec<f64> {
        (0..graph.node_count())
            .map(|i| {
                let incoming: f64 = self.receive[graph.slot_range(i)].iter().sum();
                incoming - self.decay[i] - self.send[i]
            })
            .collect()
    }

    pub fn max_row_identity_residual(&self, graph: &Graph) -> f64 {
        self.row_identity_residuals(graph)
            .into_iter()
            .fold(0.0, |m, r| m.max(r.abs()))
    }

    /// Dense `(A, B, W)`.
    pub fn to_dense(&self, graph: &Graph) -> (Matrix, Matrix, Matrix) {
        let n = graph.node_count();
        let mut w = Matrix::zeros(n, n);
        for i in 0..n {
            for (s, &j) in graph.slot_range(i).zip(graph.neighbors(i)) {
                w[(i, j)] = self.receive[s];
            }
        }
        (Matrix::diagonal(&self.decay), Matrix::diagonal(&self.send), w)
    }

    /// Dense `W − B − A`.
    pub fn drift_matrix(&self, graph: &Graph) -> Matrix {
        let (a, b, w) = self.to_dense(graph);
        &(&w - &b) - &a
    }
}

/// Sampling laws for all nodes, stored flat.
#[derive(Debug, Clone, PartialEq)]
pub struct SamplingMatrix {
    pub probs: Matrix,
    pub silent: Vec<f64>,
}

impl SamplingMatrix {
    pub fn zeros(n: usize, m: usize) -> Self {
        Self {
            probs: Matrix::zeros(n, m),
            silent: vec![0.0; n],
        }
    }

    pub fn row(&self, i: usize) -> SubDistribution {
        SubDistribution::from_parts(self.probs.row(i).to_vec(), self.silent[i])
    }

    pub fn rows(&self) -> Vec<SubDistribution> {
        (0..self.silent.len()).map(|i| self.row(i)).collect()
    }

    pub fn from_rows(rows: &[SubDistribution]) -> Self {
        let m = rows.first().map_or(0, SubDistribution::len);
        let mut out = Self::zeros(rows.len(), m);
        for (i, r) in rows.iter().enumerate() {
            out.probs.row_mut(i).copy_from_slice(r.weights());
            out.silent[i] = r.silent_mass();
        }
        out
    }
}

/// A user-supplied instance of the general linear update.
///
/// Implementations must keep the row identity `Σ_j W_ij − A_ii − B_ii = 0`;
/// it is checked on every realized round.
pub trait UpdateRule: Send + Sync + fmt::Debug {
    fn name(&self) -> &str;

    /// Message law of node `i` given its estimate row.
    fn sampling_row(&self, graph: &Graph, node: usize, estimate: &[f64], delta: f64) -> SubDistribution;

    /// Coefficients realized after the messages are drawn.
    fn realize(&self, graph: &Graph, messages: &[Message], delta: f64) -> Weights;

    /// Conditional expectation of the realized coefficients given the sampling laws.
    fn expected(&self, graph: &Graph, sampling: &SamplingMatrix, delta: f64) -> Weights;

    /// Time-invariant coefficients the expected ones approach as `δ(t) → 0`.
    fn limiting(&self, graph: &Graph) -> Weights;

    /// Step size that overrides the schedule, if any.
    fn fixed_step(&self) -> Option<f64> {
        None
    }

    fn preserves_simplex(&self) -> bool {
        false
    }
}

/// The protocol instances.
#[derive(Debug, Clone)]
pub enum AlgorithmVariant {
    /// `δ ≡ 1`, `A_ii = d_i/(d_max+1)`, `B = 0`, `W_ij = 1/(d_max+1)`.
    Averaging,
    /// Same coefficients as [`Averaging`](Self::Averaging) with the schedule's `δ(t)`.
    DecayingAveraging,
    /// Censored mass exchange with unit edge weights: opinions below
    /// `d_max·δ(t)` are never sent, and an edge is active only when both
    /// endpoints speak.
    CensoredExchange,
    Custom(Arc<dyn UpdateRule>),
}

/// Serializable name of a built-in variant.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum VariantKind {
    Averaging,
    DecayingAveraging,
    CensoredExchange,
}

impl VariantKind {
    pub fn as_str(self) -> &'static str {
        match self {
            VariantKind::Averaging => "averaging",
            VariantKind::DecayingAveraging => "decaying_averaging",
            VariantKind::CensoredExchange => "censored_exchange",
        }
    }
}

impl std::str::FromStr for VariantKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim() {
            "averaging" => Ok(VariantKind::Averaging),
            "decaying_averaging" => Ok(VariantKind::DecayingAveraging),
            "censored_exchange" => Ok(VariantKind::CensoredExchange),
            other => Err(format!(
                "unknown variant `{other}` (expected averaging, decaying_averaging or censored_exchange)"
            )),
        }
    }
}

impl From<VariantKind> for AlgorithmVariant {
    fn from(k: VariantKind) -> Self {
        match k {
            VariantKind::Averaging => AlgorithmVariant::Averaging,
            VariantKind::DecayingAveraging => AlgorithmVariant::DecayingAveraging,
            VariantKind::CensoredExchange => AlgorithmVariant::CensoredExchange,
        }
    }
}

fn averaging_weights(graph: &Graph) -> Weights {
    let denom = graph.max_degree() as f64 + 1.0;
    let n = graph.node_count();
    let receive = vec![1.0 / denom; graph.adjacency_slots()];
    Weights {
        decay: (0..n).map(|i| receive[graph.slot_range(i)].iter().sum()).collect(),
        send: vec![0.0; n],
        receive,
    }
}

fn exchange_weights(graph: &Graph) -> Weights {
    let n = graph.node_count();
    Weights {
        decay: vec![0.0; n],
        send: (0..n).map(|i| graph.degree(i) as f64).collect(),
        receive: vec![1.0; graph.adjacency_slots()],
    }
}

impl AlgorithmVariant {
    pub fn name(&self) -> &str {
        match self {
            AlgorithmVariant::Averaging => "averaging",
            AlgorithmVariant::DecayingAveraging => "decaying_averaging",
            AlgorithmVariant::CensoredExchange => "censored_exchange",
            AlgorithmVariant::Custom(rule) => rule.name(),
        }
    }

    pub fn kind(&self) -> Option<VariantKind> {
        match self {
            AlgorithmVariant::Averaging => Some(VariantKind::Averaging),
            AlgorithmVariant::DecayingAveraging => Some(VariantKind::DecayingAveraging),
            AlgorithmVariant::CensoredExchange => Some(VariantKind::CensoredExchange),
            AlgorithmVariant::Custom(_) => None,
        }
    }

    /// Step size that ignores the schedule (`δ ≡ 1` for plain averaging).
    pub fn fixed_step(&self) -> Option<f64> {
        match self {
            AlgorithmVariant::Averaging => Some(1.0),
            AlgorithmVariant::Custom(rule) => rule.fixed_step(),
            _ => None,
        }
    }

    /// Whether every row of `Q(t)` is guaranteed to stay a distribution.
    pub fn preserves_simplex(&self) -> bool {
        match self {
            AlgorithmVariant::Averaging | AlgorithmVariant::CensoredExchange => true,
            AlgorithmVariant::DecayingAveraging => false,
            AlgorithmVariant::Custom(rule) => rule.preserves_simplex(),
        }
    }

    /// Whether messages follow the estimates directly (`P(t) = Q(t)`).
    pub fn samples_estimates(&self) -> bool {
        matches!(self, AlgorithmVariant::Averaging | AlgorithmVariant::DecayingAveraging)
    }

    /// Censoring threshold `d_max·δ(t)`; `None` for uncensored variants.
    pub fn censor_threshold(&self, graph: &Graph, delta: f64) -> Option<f64> {
        match self {
            AlgorithmVariant::CensoredExchange => Some(graph.max_degree() as f64 * delta),
            _ => None,
        }
    }

    /// Fills the sampling laws for every node.
    ///
    /// `project` selects the replication behaviour for estimate-sampling
    /// variants whose rows may leave the simplex: negative entries are zeroed
    /// and the row renormalized. Without it such a row is an error.
    pub(crate) fn sampling_into(
        &self,
        graph: &Graph,
        q: &Matrix,
        delta: f64,
        project: bool,
        out: &mut SamplingMatrix,
    ) -> Result<(), ProtocolError> {
        let n = q.rows();
        match self {
            AlgorithmVariant::Averaging | AlgorithmVariant::DecayingAveraging => {
                for i in 0..n {
                    let src = q.row(i);
                    let dst = out.probs.row_mut(i);
                    dst.copy_from_slice(src);
                    out.silent[i] = 0.0;
                    let valid = src.iter().all(|&x| x >= -NEGATIVITY_TOLERANCE)
                        && (src.iter().sum::<f64>() - 1.0).abs() <= SUM_TOLERANCE;
                    if valid {
                        for x in dst.iter_mut() {
                            *x = x.max(0.0);
                        }
                    } else if project {
                        project_row(dst).ok_or(ProtocolError::InvalidRow { node: i })?;
                    } else {
                        return Err(ProtocolError::InvalidRow { node: i });
                    }
                }
            }
            AlgorithmVariant::CensoredExchange => {
                let threshold = graph.max_degree() as f64 * delta;
                for i in 0..n {
                    let src = q.row(i);
                    let dst = out.probs.row_mut(i);
                    let mut censored = false;
                    for (d, &x) in dst.iter_mut().zip(src) {
                        if x >= threshold {
                            *d = x;
                        } else {
                            *d = 0.0;
                            censored = true;
                        }
                    }
                    out.silent[i] = if censored {
                        (1.0 - dst.iter().sum::<f64>()).clamp(0.0, 1.0)
                    } else {
                        0.0
                    };
                }
            }
            AlgorithmVariant::Custom(rule) => {
                for i in 0..n {
                    let row = rule.sampling_row(graph, i, q.row(i), delta);
                    out.probs.row_mut(i).copy_from_slice(row.weights());
                    out.silent[i] = row.silent_mass();
                }
            }
        }
        Ok(())
    }

    /// Writes the realized coefficients for the drawn messages and checks the row identity.
    pub(crate) fn realize_into(
        &self,
        graph: &Graph,
        messages: &[Message],
        delta: f64,
        out: &mut Weights,
    ) -> Result<(), ProtocolError> {
        match self {
            AlgorithmVariant::Averaging | AlgorithmVariant::DecayingAveraging => {
                let denom = graph.max_degree() as f64 + 1.0;
                out.receive.fill(1.0 / denom);
                for i in 0..graph.node_count() {
                    out.decay[i] = out.receive[graph.slot_range(i)].iter().sum();
                    out.send[i] = 0.0;
                }
            }
            AlgorithmVariant::CensoredExchange => {
                for i in 0..graph.node_count() {
                    out.decay[i] = 0.0;
                    let speaks = !messages[i].is_silent();
                    let mut total = 0.0;
                    for (s, &j) in graph.slot_range(i).zip(graph.neighbors(i)) {
                        let w = if speaks && !messages[j].is_silent() { 1.0 } else { 0.0 };
                        out.receive[s] = w;
                        total += w;
                    }
                    out.send[i] = total;
                }
            }
            AlgorithmVariant::Custom(rule) => {
                *out = rule.realize(graph, messages, delta);
            }
        }
        check_row_identity(graph, out)
    }

    /// `(Ā, B̄, W̄)` given the sampling laws, assuming independent draws across nodes.
    pub fn expected_weights(&self, graph: &Graph, sampling: &SamplingMatrix, delta: f64) -> Weights {
        match self {
            AlgorithmVariant::Averaging | AlgorithmVariant::DecayingAveraging => averaging_weights(graph),
            AlgorithmVariant::CensoredExchange => {
                let n = graph.node_count();
                let mut w = Weights::zeros(graph);
                for i in 0..n {
                    let active_i = 1.0 - sampling.silent[i];
                    let mut total = 0.0;
                    for (s, &j) in graph.slot_range(i).zip(graph.neighbors(i)) {
                        let e = active_i * (1.0 - sampling.silent[j]);
                        w.receive[s] = e;
                        total += e;
                    }
                    w.send[i] = total;
                }
                w
            }
            AlgorithmVariant::Custom(rule) => rule.expected(graph, sampling, delta),
        }
    }

    /// Coefficients of the limiting mean dynamics.
    pub fn limiting_weights(&self, graph: &Graph) -> Weights {
        match self {
            AlgorithmVariant::Averaging | AlgorithmVariant::DecayingAveraging => averaging_weights(graph),
            AlgorithmVariant::CensoredExchange => exchange_weights(graph),
            AlgorithmVariant::Custom(rule) => rule.limiting(graph),
        }
    }

    /// Closed form of `E[(W(t) − B(t)) Y(t) | history]`, when one is known.
    pub fn expected_message_drive(&self, graph: &Graph, sampling: &SamplingMatrix) -> Option<Matrix> {
        let n = graph.node_count();
        let m = sampling.probs.cols();
        match self {
            AlgorithmVariant::Averaging | AlgorithmVariant::DecayingAveraging => {
                let w = averaging_weights(graph);
                let mut out = Matrix::zeros(n, m);
                for i in 0..n {
                    for (s, &j) in graph.slot_range(i).zip(graph.neighbors(i)) {
                        let wij = w.receive[s];
                        let pj = sampling.probs.row(j).to_vec();
                        for (o, p) in out.row_mut(i).iter_mut().zip(pj) {
                            *o += wij * p;
                        }
                    }
                }
                Some(out)
            }
            AlgorithmVariant::CensoredExchange => {
                let mut out = Matrix::zeros(n, m);
                for i in 0..n {
                    let active_i = 1.0 - sampling.silent[i];
                    let mut row = vec![0.0; m];
                    for &j in graph.neighbors(i) {
                        let active_j = 1.0 - sampling.silent[j];
                        let pi = sampling.probs.row(i);
                        let pj = sampling.probs.row(j);
                        for k in 0..m {
                            row[k] += active_i * pj[k] - active_j * pi[k];
                        }
                    }
                    out.row_mut(i).copy_from_slice(&row);
                }
                Some(out)
            }
            AlgorithmVariant::Custom(_) => None,
        }
    }
}

impl From<Arc<dyn UpdateRule>> for AlgorithmVariant {
    fn from(rule: Arc<dyn UpdateRule>) -> Self {
        AlgorithmVariant::Custom(rule)
    }
}

fn check_row_identity(graph: &Graph, w: &Weights) -> Result<(), ProtocolError> {
    for (node, r) in w.row_identity_residuals(graph).into_iter().enumerate() {
        if r.abs() > ROW_IDENTITY_TOLERANCE {
            return Err(ProtocolError::Condition1Violation { node, residual: r });
        }
    }
    Ok(())
}

/// Zeroes negative entries and renormalizes; `None` if nothing positive remains.
fn project_row(row: &mut [f64]) -> Option<()> {
    for x in row.iter_mut() {
        if !(*x > 0.0) {
            *x = 0.0;
        }
    }
    let sum: f64 = row.iter().sum();
    if !(sum > 0.0) || !sum.is_finite() {
        return None;
    }
    for x in row.iter_mut() {
        *x /= sum;
    }
    Some(())
}
