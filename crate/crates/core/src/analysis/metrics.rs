use serde::{Deserialize, Serialize};

use crate::linalg::Matrix;

use super::AnalysisError;

/// Rows within this max-abs distance of a common elementary vector count as absorbed.
pub const ABSORPTION_TOLERANCE: f64 = 1e-9;

/// `(1/n) Σ_i ‖Q_i − Π‖²`.
pub fn mse_per_node(q: &Matrix, pi: &[f64]) -> Result<f64, AnalysisError> {
    if q.cols() != pi.len() {
        return Err(AnalysisError::DimensionMismatch(format!(
            "estimates have {} columns, target has {}",
            q.cols(),
            pi.len()
        )));
    }
    if q.rows() == 0 {
        return Err(AnalysisError::DimensionMismatch("no nodes".into()));
    }
    let total: f64 = (0..q.rows())
        .map(|i| q.row(i).iter().zip(pi).map(|(a, b)| (a - b) * (a - b)).sum::<f64>())
        .sum();
    Ok(total / q.rows() as f64)
}

/// `max_{i,j} ‖Q_i − Q_j‖₂`.
pub fn disagreement(q: &Matrix) -> f64 {
    let n = q.rows();
    let mut worst = 0.0f64;
    for i in 0..n {
        let ri = q.row(i);
        for j in i + 1..n {
            let d: f64 = ri.iter().zip(q.row(j)).map(|(a, b)| (a - b) * (a - b)).sum();
            worst = worst.max(d);
        }
    }
    worst.sqrt()
}

/// `max_m |(1ᵀQ)_m − target_m|`.
pub fn mass_drift(q: &Matrix, target: &[f64]) -> f64 {
    q.column_sums()
        .iter()
        .zip(target)
        .map(|(a, b)| (a - b).abs())
        .fold(0.0, f64::max)
}

/// The opinion every row has collapsed onto, if any.
pub fn absorbed_atom(q: &Matrix) -> Option<usize> {
    if q.rows() == 0 {
        return None;
    }
    let first = q.row(0);
    let atom = (0..first.len()).find(|&k| (first[k] - 1.0).abs() <= ABSORPTION_TOLERANCE)?;
    for i in 0..q.rows() {
        for (k, &x) in q.row(i).iter().enumerate() {
            let e = if k == atom { 1.0 } else { 0.0 };
            if (x - e).abs() > ABSORPTION_TOLERANCE {
                return None;
            }
        }
    }
    Some(atom)
}

/// First recorded round whose value is at most `tau`.
pub fn time_to_threshold(rounds: &[u64], values: &[f64], tau: f64) -> Option<u64> {
    rounds.iter().zip(values).find(|(_, &v)| v <= tau).map(|(&t, _)| t)
}

/// Least-squares slope of `ln value` against `ln t` over rounds in `[lo, hi]`.
pub fn rate_fit(rounds: &[u64], values: &[f64], window: (u64, u64)) -> Result<f64, AnalysisError> {
    if rounds.len() != values.len() {
        return Err(AnalysisError::DimensionMismatch(format!(
            "{} rounds but {} values",
            rounds.len(),
            values.len()
        )));
    }
    let (lo, hi) = window;
    let mut pts = Vec::new();
    for (&t, &v) in rounds.iter().zip(values) {
        if t < lo || t > hi || t == 0 {
            continue;
        }
        if !(v > 0.0) || !v.is_finite() {
            return Err(AnalysisError::DegenerateWindow(format!("non-positive value {v} at round {t}")));
        }
        pts.push(((t as f64).ln(), v.ln()));
    }
    if pts.len() < 2 {
        return Err(AnalysisError::DegenerateWindow(format!(
            "{} usable points in [{lo}, {hi}]",
            pts.len()
        )));
    }
    let k = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / k;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / k;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    if sxx == 0.0 {
        return Err(AnalysisError::DegenerateWindow("all points at one round".into()));
    }
    Ok(sxy / sxx)
}

/// Metrics sampled at the recorded rounds of one trial.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct TraceMetrics {
    pub rounds: Vec<u64>,
    pub mse: Vec<f64>,
    pub disagreement: Vec<f64>,
    /// `1ᵀ Q(t)` per recorded round.
    pub mass: Vec<Vec<f64>>,
}

impl TraceMetrics {
    pub fn push(&mut self, t: u64, q: &Matrix, pi: &[f64]) -> Result<(), AnalysisError> {
        self.mse.push(mse_per_node(q, pi)?);
        self.rounds.push(t);
        self.disagreement.push(disagreement(q));
        self.mass.push(q.column_sums());
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.rounds.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rounds.is_empty()
    }

    /// Per-round `max_m |(1ᵀQ)_m − target_m|`.
    pub fn mass_drift(&self, target: &[f64]) -> Vec<f64> {
        self.mass
            .iter()
            .map(|m| m.iter().zip(target).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max))
            .collect()
    }

    pub fn time_to_threshold(&self, tau: f64) -> Option<u64> {
        time_to_threshold(&self.rounds, &self.mse, tau)
    }

    pub fn rate_fit(&self, window: (u64, u64)) -> Result<f64, AnalysisError> {
        rate_fit(&self.rounds, &self.mse, window)
    }
}
