use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::analysis::{absorbed_atom, disagreement, mse_per_node, rate_fit, ConditionMonitor, ConditionReport, TraceMetrics};
use crate::protocol::{init_state, Simulator};
use crate::simplex::{empirical_histogram, OpinionSample};
use crate::topology::generate;

use super::{ExperimentConfig, HarnessError};

pub const STREAM_GRAPH: u64 = 0;
pub const STREAM_OPINIONS: u64 = 1;
pub const STREAM_PROTOCOL: u64 = 2;
const STREAMS_PER_TRIAL: u64 = 4;

/// Independent stream `purpose` of trial `trial` under `base_seed`.
pub fn trial_rng(base_seed: u64, trial: usize, purpose: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(base_seed);
    rng.set_stream(trial as u64 * STREAMS_PER_TRIAL + purpose);
    rng
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrialResult {
    pub index: usize,
    pub edges: usize,
    /// Empirical histogram of the trial's initial opinions.
    pub pi: Vec<f64>,
    pub metrics: TraceMetrics,
    /// Per recorded round, `max_m |(1ᵀQ)_m − nΠ_m|`.
    pub mass_drift: Vec<f64>,
    pub report: ConditionReport,
    /// First round with mse at or below the configured threshold, checked every round.
    pub time_to_threshold: Option<u64>,
    pub final_mse: f64,
    pub final_disagreement: f64,
    /// Column means of `Q(T)`.
    pub final_mean: Vec<f64>,
    pub absorbed_atom: Option<usize>,
}

/// Runs one trial: fresh graph and opinions from the trial's streams, then `T` rounds.
pub fn run_trial(config: &ExperimentConfig, index: usize) -> Result<TrialResult, HarnessError> {
    let graph = generate(&config.topology, &mut trial_rng(config.seed, index, STREAM_GRAPH))?;
    let n = graph.node_count();
    let mut opinion_rng = trial_rng(config.seed, index, STREAM_OPINIONS);
    let law = config.initial.realize(&mut opinion_rng)?;
    let sample = OpinionSample::draw(&law, n, &mut opinion_rng);
    let pi = empirical_histogram(&sample)?.weights().to_vec();
    let state = init_state(&sample);
    let variant = config.algorithm();
    let mut monitor = ConditionMonitor::new(&variant, &config.schedule, &graph, &state.q);
    let edges = graph.edge_count();
    let mut sim = Simulator::new(
        graph,
        variant,
        config.schedule,
        state,
        trial_rng(config.seed, index, STREAM_PROTOCOL),
    )?;

    let rounds = config.stride.rounds(config.horizon);
    let mut metrics = TraceMetrics::default();
    let mut next = 0usize;
    let mut hit = None;
    for t in 0..=config.horizon {
        let q = &sim.state().q;
        if hit.is_none() && mse_per_node(q, &pi)? <= config.threshold {
            hit = Some(t);
        }
        let recorded = rounds.get(next) == Some(&t);
        if recorded {
            metrics.push(t, q, &pi)?;
            next += 1;
        }
        if t == config.horizon {
            break;
        }
        if recorded {
            let record = sim.step()?;
            monitor.observe(&record);
        } else {
            sim.advance()?;
            monitor.observe_mass(t + 1, &sim.state().q);
        }
    }

    let q = &sim.state().q;
    let target: Vec<f64> = pi.iter().map(|p| p * n as f64).collect();
    let mass_drift = metrics.mass_drift(&target);
    let final_mean = q.column_sums().iter().map(|s| s / n as f64).collect();
    Ok(TrialResult {
        index,
        edges,
        mass_drift,
        report: monitor.finish(),
        time_to_threshold: hit,
        final_mse: mse_per_node(q, &pi)?,
        final_disagreement: disagreement(q),
        final_mean,
        absorbed_atom: absorbed_atom(q),
        pi,
        metrics,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Provenance {
    /// SHA-256 of the canonical config text.
    pub config_hash: String,
    pub base_seed: u64,
    pub seed_scheme: String,
    pub version: String,
}

impl Provenance {
    pub fn of(config: &ExperimentConfig) -> Self {
        let digest = Sha256::digest(config.to_text().as_bytes());
        Self {
            config_hash: digest.iter().map(|b| format!("{b:02x}")).collect(),
            base_seed: config.seed,
            seed_scheme: format!(
                "chacha8 seed_from_u64(base_seed), stream {STREAMS_PER_TRIAL}*trial + k \
                 (k={STREAM_GRAPH} graph, {STREAM_OPINIONS} opinions, {STREAM_PROTOCOL} protocol)"
            ),
            version: env!("CARGO_PKG_VERSION").to_string(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnsembleResult {
    pub config: ExperimentConfig,
    pub rounds: Vec<u64>,
    pub mse_mean: Vec<f64>,
    pub mse_stderr: Vec<f64>,
    pub disagreement_mean: Vec<f64>,
    pub mass_drift_max: Vec<f64>,
    pub trials: Vec<TrialResult>,
    pub provenance: Provenance,
}

impl EnsembleResult {
    fn aggregate(config: &ExperimentConfig, trials: Vec<TrialResult>) -> Self {
        let rounds = trials[0].metrics.rounds.clone();
        let k = trials.len() as f64;
        let len = rounds.len();
        let mut mse_mean = vec![0.0; len];
        let mut mse_stderr = vec![0.0; len];
        let mut disagreement_mean = vec![0.0; len];
        let mut mass_drift_max = vec![0.0f64; len];
        for r in 0..len {
            let mean = trials.iter().map(|t| t.metrics.mse[r]).sum::<f64>() / k;
            mse_mean[r] = mean;
            if trials.len() > 1 {
                let var = trials.iter().map(|t| (t.metrics.mse[r] - mean).powi(2)).sum::<f64>() / (k - 1.0);
                mse_stderr[r] = (var / k).sqrt();
            }
            disagreement_mean[r] = trials.iter().map(|t| t.metrics.disagreement[r]).sum::<f64>() / k;
            mass_drift_max[r] = trials.iter().map(|t| t.mass_drift[r]).fold(0.0, f64::max);
        }
        Self {
            config: config.clone(),
            rounds,
            mse_mean,
            mse_stderr,
            disagreement_mean,
            mass_drift_max,
            trials,
            provenance: Provenance::of(config),
        }
    }

    pub fn time_to_threshold(&self) -> Vec<Option<u64>> {
        self.trials.iter().map(|t| t.time_to_threshold).collect()
    }

    /// Quantile of time-to-threshold with trials that never crossed counted as infinite.
    pub fn time_quantile(&self, q: f64) -> Option<u64> {
        let mut v: Vec<u64> = self
            .trials
            .iter()
            .map(|t| t.time_to_threshold.unwrap_or(u64::MAX))
            .collect();
        v.sort_unstable();
        let idx = ((q * (v.len() - 1) as f64).round() as usize).min(v.len() - 1);
        Some(v[idx]).filter(|&x| x != u64::MAX)
    }

    /// Log-log slope of the ensemble-mean mse over the configured window.
    pub fn rate_fit(&self) -> Option<f64> {
        rate_fit(&self.rounds, &self.mse_mean, self.config.fit_window).ok()
    }

    pub fn final_mse_mean(&self) -> f64 {
        *self.mse_mean.last().unwrap()
    }
}

/// Runs every trial of `config` on a pool of `threads` workers (`0` picks a default).
pub fn run_ensemble(config: &ExperimentConfig, threads: usize) -> Result<EnsembleResult, HarnessError> {
    config.validate()?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .map_err(|e| HarnessError::Io(std::io::Error::other(e)))?;
    let outcomes: Vec<Result<TrialResult, HarnessError>> =
        pool.install(|| (0..config.trials).into_par_iter().map(|i| run_trial(config, i)).collect());
    let mut trials = Vec::with_capacity(outcomes.len());
    for (index, r) in outcomes.into_iter().enumerate() {
        trials.push(r.map_err(|e| HarnessError::Trial {
            index,
            source: Box::new(e),
        })?);
    }
    Ok(EnsembleResult::aggregate(config, trials))
}

/// One ensemble per sweep point; every point reuses the same base seed.
pub fn sweep(config: &ExperimentConfig, threads: usize) -> Result<Vec<EnsembleResult>, HarnessError> {
    let Some(axis) = &config.sweep else {
        return Err(HarnessError::Config {
            line: None,
            field: "sweep".into(),
            msg: "config has no sweep axis".into(),
        });
    };
    (0..axis.len())
        .map(|k| run_ensemble(&config.sweep_point(k)?, threads))
        .collect()
}
