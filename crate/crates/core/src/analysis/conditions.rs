use serde::{Deserialize, Serialize};

use crate::linalg::{jacobi_eigenvalues, Matrix};
use crate::protocol::{
    AlgorithmVariant, NetworkState, RoundRecord, StepSchedule, Weights, ROW_IDENTITY_TOLERANCE,
};
use crate::topology::Graph;

use super::decompose::{conditional_mean_perturbation, conditional_means_enumerated};
use super::metrics::mass_drift;

/// Largest tolerated drift of `1ᵀQ(t)` from `nΠ`.
pub const MASS_TOLERANCE: f64 = 1e-10;
/// Eigenvalues of `H̄` below this magnitude (relative to `max|H̄|`) count as zero.
pub const ZERO_EIGENVALUE_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MixingCheck {
    pub pass: bool,
    pub max_residual: f64,
    pub worst_round: Option<u64>,
    pub rounds_checked: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StepSizeCheck {
    pub pass: bool,
    pub schedule: String,
    pub sum_diverges: bool,
    pub square_summable: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LimitingCheck {
    /// Symmetric, `H̄1 = 0`, nonzero eigenvalues negative, zero eigenvalue simple per component.
    pub pass: bool,
    pub symmetric: bool,
    /// `max_i |(H̄1)_i|`.
    pub null_residual: f64,
    pub min_eigenvalue: f64,
    /// Largest eigenvalue not counted as zero, if any.
    pub max_nonzero_eigenvalue: Option<f64>,
    pub zero_multiplicity: usize,
    pub components: usize,
    /// Every eigenvalue strictly inside `(-1, 1)`.
    pub literal_unit_bound: bool,
    /// `sup_t max_ij |H̄(t) − H̄|_ij / δ(t)` over checked rounds.
    pub deviation_ratio: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PerturbationCheck {
    pub pass: bool,
    /// `sup_t ‖E[C(t) | history]‖_F / δ(t)`.
    pub sup_ratio: f64,
    pub worst_round: Option<u64>,
    pub rounds_checked: u64,
    pub rounds_skipped: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MassCheck {
    pub pass: bool,
    /// `max_t max_m |(1ᵀQ(t))_m − nΠ_m|`.
    pub max_drift: f64,
    pub worst_round: Option<u64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConditionReport {
    pub variant: String,
    pub mixing: MixingCheck,
    pub step_size: StepSizeCheck,
    pub limiting: LimitingCheck,
    pub perturbation: PerturbationCheck,
    pub mass: MassCheck,
}

impl ConditionReport {
    pub fn all_pass(&self) -> bool {
        self.mixing.pass && self.step_size.pass && self.limiting.pass && self.perturbation.pass && self.mass.pass
    }
}

/// Accumulates condition measurements round by round.
#[derive(Debug, Clone)]
pub struct ConditionMonitor {
    graph: Graph,
    variant: AlgorithmVariant,
    schedule: StepSchedule,
    target: Vec<f64>,
    limiting: Weights,
    mixing: MixingCheck,
    perturbation: PerturbationCheck,
    mass: MassCheck,
    deviation_ratio: f64,
}

impl ConditionMonitor {
    /// `initial` fixes the mass target `nΠ = 1ᵀQ(0)`.
    pub fn new(variant: &AlgorithmVariant, schedule: &StepSchedule, graph: &Graph, initial: &Matrix) -> Self {
        Self {
            graph: graph.clone(),
            variant: variant.clone(),
            schedule: *schedule,
            target: initial.column_sums(),
            limiting: variant.limiting_weights(graph),
            mixing: MixingCheck {
                pass: true,
                max_residual: 0.0,
                worst_round: None,
                rounds_checked: 0,
            },
            perturbation: PerturbationCheck {
                pass: true,
                sup_ratio: 0.0,
                worst_round: None,
                rounds_checked: 0,
                rounds_skipped: 0,
            },
            mass: MassCheck {
                pass: true,
                max_drift: 0.0,
                worst_round: None,
            },
            deviation_ratio: 0.0,
        }
    }

    /// Mass drift only; cheap enough to call every round.
    pub fn observe_mass(&mut self, t: u64, q: &Matrix) {
        let d = mass_drift(q, &self.target);
        if !(d <= self.mass.max_drift) {
            self.mass.max_drift = d;
            self.mass.worst_round = Some(t);
        }
    }

    pub fn observe(&mut self, record: &RoundRecord) {
        let t = record.t;
        self.observe_mass(t, &record.q_before);
        self.observe_mass(t + 1, &record.q_after);

        let residual = record.weights.max_row_identity_residual(&self.graph);
        self.mixing.rounds_checked += 1;
        if !(residual <= self.mixing.max_residual) {
            self.mixing.max_residual = residual;
            self.mixing.worst_round = Some(t);
        }

        let delta = record.delta;
        let dev = weight_deviation(&self.graph, &record.expected, &self.limiting) / delta;
        if !(dev <= self.deviation_ratio) {
            self.deviation_ratio = dev;
        }

        let mean_c = conditional_mean_perturbation(
            &self.variant,
            &self.graph,
            &record.sampling,
            &record.expected,
            &record.q_before,
        )
        .or_else(|| {
            let state = NetworkState {
                t,
                q: record.q_before.clone(),
            };
            conditional_means_enumerated(&state, &self.variant, &self.schedule, &self.graph)
                .ok()
                .map(|(c, _)| c)
        });
        match mean_c {
            Some(c) => {
                self.perturbation.rounds_checked += 1;
                let ratio = c.frobenius_norm() / delta;
                if !(ratio <= self.perturbation.sup_ratio) {
                    self.perturbation.sup_ratio = ratio;
                    self.perturbation.worst_round = Some(t);
                }
            }
            None => self.perturbation.rounds_skipped += 1,
        }
    }

    pub fn finish(&self) -> ConditionReport {
        let mut mixing = self.mixing.clone();
        mixing.pass = mixing.max_residual <= ROW_IDENTITY_TOLERANCE;
        let mut perturbation = self.perturbation.clone();
        perturbation.pass = perturbation.rounds_checked > 0 && perturbation.sup_ratio.is_finite();
        let mut mass = self.mass.clone();
        mass.pass = mass.max_drift <= MASS_TOLERANCE;
        ConditionReport {
            variant: self.variant.name().to_string(),
            mixing,
            step_size: step_size_check(&self.variant, &self.schedule),
            limiting: limiting_check(&self.variant, &self.graph, self.deviation_ratio),
            perturbation,
            mass,
        }
    }
}

/// Runs every check over a recorded history; the first record supplies `Q(0)`.
///
/// # Panics
/// If `records` is empty.
pub fn check_conditions(
    records: &[RoundRecord],
    variant: &AlgorithmVariant,
    schedule: &StepSchedule,
    graph: &Graph,
) -> ConditionReport {
    let first = records.first().expect("at least one recorded round");
    let mut monitor = ConditionMonitor::new(variant, schedule, graph, &first.q_before);
    for r in records {
        monitor.observe(r);
    }
    monitor.finish()
}

fn step_size_check(variant: &AlgorithmVariant, schedule: &StepSchedule) -> StepSizeCheck {
    let effective = match variant.fixed_step() {
        Some(c) => StepSchedule::constant(c),
        None => *schedule,
    };
    let sum_diverges = effective.sum_diverges();
    let square_summable = effective.square_summable();
    StepSizeCheck {
        pass: sum_diverges && square_summable,
        schedule: effective.label(),
        sum_diverges,
        square_summable,
    }
}

fn weight_deviation(graph: &Graph, a: &Weights, b: &Weights) -> f64 {
    let mut worst = 0.0f64;
    for i in 0..graph.node_count() {
        let diag = (a.send[i] + a.decay[i]) - (b.send[i] + b.decay[i]);
        worst = worst.max(diag.abs());
    }
    for (x, y) in a.receive.iter().zip(&b.receive) {
        worst = worst.max((x - y).abs());
    }
    worst
}

/// Spectral checks on the limiting mean dynamics of `variant` on `graph`.
pub fn limiting_check_for(variant: &AlgorithmVariant, graph: &Graph) -> LimitingCheck {
    limiting_check(variant, graph, 0.0)
}

/// Spectral checks on the limiting mean dynamics `H̄ = W − B̄ − A`.
pub(crate) fn limiting_check(variant: &AlgorithmVariant, graph: &Graph, deviation_ratio: f64) -> LimitingCheck {
    let h = variant.limiting_weights(graph).drift_matrix(graph);
    let n = h.rows();
    let symmetric = h.is_symmetric(1e-12);
    let null_residual = h.row_sums().iter().fold(0.0f64, |a, x| a.max(x.abs()));
    let scale = h.max_abs().max(1.0);
    let sym = (&h + &h.transpose()).scale(0.5);
    let eig = if n == 0 { Vec::new() } else { jacobi_eigenvalues(&sym) };
    let zero_tol = ZERO_EIGENVALUE_TOLERANCE * scale;
    let zero_multiplicity = eig.iter().filter(|l| l.abs() <= zero_tol).count();
    let max_nonzero_eigenvalue = eig.iter().copied().filter(|l| l.abs() > zero_tol).fold(None, |acc: Option<f64>, l| {
        Some(acc.map_or(l, |a| a.max(l)))
    });
    let components = graph.component_count();
    let pass = symmetric
        && null_residual <= 1e-12
        && max_nonzero_eigenvalue.is_none_or(|l| l < 0.0)
        && zero_multiplicity == components;
    LimitingCheck {
        pass,
        symmetric,
        null_residual,
        min_eigenvalue: eig.first().copied().unwrap_or(0.0),
        max_nonzero_eigenvalue,
        zero_multiplicity,
        components,
        literal_unit_bound: eig.iter().all(|l| l.abs() < 1.0),
        deviation_ratio,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::protocol::{init_state, Simulator};
    use crate::simplex::OpinionSample;
    use crate::topology::{generate, TopologyKind};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn grid() -> Graph {
        generate(&TopologyKind::Grid { rows: 5, cols: 5 }, &mut ChaCha8Rng::seed_from_u64(0)).unwrap()
    }

    fn records(variant: AlgorithmVariant, schedule: StepSchedule, rounds: usize) -> (Graph, Vec<RoundRecord>) {
        let g = grid();
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let law = crate::simplex::make_distribution(&[0.4, 0.3, 0.2, 0.1]).unwrap();
        let sample = OpinionSample::draw(&law, 25, &mut rng);
        let mut sim = Simulator::new(g.clone(), variant, schedule, init_state(&sample), ChaCha8Rng::seed_from_u64(9)).unwrap();
        let recs = (0..rounds).map(|_| sim.step().unwrap()).collect();
        (g, recs)
    }

    #[test]
    fn step_size_classification() {
        let v = AlgorithmVariant::DecayingAveraging;
        assert!(step_size_check(&v, &StepSchedule::harmonic(10.0)).pass);
        assert!(!step_size_check(&v, &StepSchedule::square(1.0)).pass);
        assert!(!step_size_check(&v, &StepSchedule::constant(0.05)).pass);
        assert!(!step_size_check(&AlgorithmVariant::Averaging, &StepSchedule::harmonic(1.0)).pass);
    }

    #[test]
    fn averaging_report() {
        let (g, recs) = records(AlgorithmVariant::Averaging, StepSchedule::harmonic(1.0), 50);
        let r = check_conditions(&recs, &AlgorithmVariant::Averaging, &StepSchedule::harmonic(1.0), &g);
        assert!(r.mixing.pass);
        assert!(r.perturbation.sup_ratio < 1e-14);
        assert_eq!(r.perturbation.sup_ratio, 0.0);
        assert!(r.limiting.pass);
    }

    #[test]
    fn censored_report() {
        let s = StepSchedule::harmonic(10.0);
        let (g, recs) = records(AlgorithmVariant::CensoredExchange, s, 200);
        let r = check_conditions(&recs, &AlgorithmVariant::CensoredExchange, &s, &g);
        assert!(r.mixing.pass);
        assert!(r.mass.pass, "{}", r.mass.max_drift);
        assert!(r.perturbation.pass && r.perturbation.sup_ratio.is_finite());
        assert_eq!(r.perturbation.rounds_checked, 200);
        assert!(r.limiting.pass);
        assert!(!r.limiting.literal_unit_bound);
        assert!(r.limiting.deviation_ratio.is_finite());
        assert!(r.all_pass());
    }

    #[test]
    fn disconnected_graph_zero_multiplicity() {
        let g = Graph::from_edges(5, &[(0, 1), (2, 3)]).unwrap();
        let c = limiting_check(&AlgorithmVariant::DecayingAveraging, &g, 0.0);
        assert_eq!(c.components, 3);
        assert_eq!(c.zero_multiplicity, 3);
        assert!(c.pass);
    }
}
