use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

/// Default ceiling on the applied step size. Keeps `δ(t)·A_ii ≤ 1` for the
/// averaging weights, so every update is a convex combination.
pub const DEFAULT_CAP: f64 = 1.0;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "c", rename_all = "snake_case")]
pub enum ScheduleKind {
    /// `δ(t) = c`
    Constant(f64),
    /// `δ(t) = c / (t + 1)`
    Harmonic(f64),
    /// `δ(t) = c / (t + 1)²`
    Square(f64),
}

/// Step-size sequence `δ(t)` with an optional ceiling.
///
/// `cap: None` is the uncapped replication mode: the nominal formula is
/// applied even when it exceeds 1.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StepSchedule {
    pub kind: ScheduleKind,
    pub cap: Option<f64>,
}

impl StepSchedule {
    pub fn constant(c: f64) -> Self {
        Self::capped(ScheduleKind::Constant(c))
    }

    pub fn harmonic(c: f64) -> Self {
        Self::capped(ScheduleKind::Harmonic(c))
    }

    pub fn square(c: f64) -> Self {
        Self::capped(ScheduleKind::Square(c))
    }

    fn capped(kind: ScheduleKind) -> Self {
        Self {
            kind,
            cap: Some(DEFAULT_CAP),
        }
    }

    pub fn with_cap(mut self, cap: Option<f64>) -> Self {
        self.cap = cap;
        self
    }

    pub fn uncapped(self) -> Self {
        self.with_cap(None)
    }

    pub fn coefficient(&self) -> f64 {
        match self.kind {
            ScheduleKind::Constant(c) | ScheduleKind::Harmonic(c) | ScheduleKind::Square(c) => c,
        }
    }

    pub fn validate(&self) -> Result<(), String> {
        let c = self.coefficient();
        if !(c.is_finite() && c > 0.0) {
            return Err(format!("schedule coefficient must be positive, got {c}"));
        }
        if let Some(cap) = self.cap {
            if !(cap > 0.0 && cap <= 1.0) {
                return Err(format!("schedule cap must lie in (0, 1], got {cap}"));
            }
        }
        Ok(())
    }

    /// The nominal value before capping.
    pub fn nominal(&self, t: u64) -> f64 {
        let s = t as f64 + 1.0;
        match self.kind {
            ScheduleKind::Constant(c) => c,
            ScheduleKind::Harmonic(c) => c / s,
            ScheduleKind::Square(c) => c / (s * s),
        }
    }

    pub fn eval(&self, t: u64) -> f64 {
        let v = self.nominal(t);
        match self.cap {
            Some(cap) => v.min(cap),
            None => v,
        }
    }

    /// `Σ δ(t) = ∞`, decided in closed form. A cap changes finitely many
    /// terms, so it never changes either classification.
    pub fn sum_diverges(&self) -> bool {
        matches!(self.kind, ScheduleKind::Constant(_) | ScheduleKind::Harmonic(_))
    }

    /// `Σ δ(t)² < ∞`.
    pub fn square_summable(&self) -> bool {
        matches!(self.kind, ScheduleKind::Harmonic(_) | ScheduleKind::Square(_))
    }

    pub fn label(&self) -> String {
        match self.kind {
            ScheduleKind::Constant(c) => format!("constant_{c}"),
            ScheduleKind::Harmonic(c) => format!("harmonic_{c}"),
            ScheduleKind::Square(c) => format!("square_{c}"),
        }
    }
}

/// Applied step size for round `t`.
pub fn eval_schedule(schedule: &StepSchedule, t: u64) -> f64 {
    schedule.eval(t)
}

impl fmt::Display for ScheduleKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ScheduleKind::Constant(c) => write!(f, "constant {c:?}"),
            ScheduleKind::Harmonic(c) => write!(f, "harmonic {c:?}"),
            ScheduleKind::Square(c) => write!(f, "square {c:?}"),
        }
    }
}

impl FromStr for ScheduleKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let toks: Vec<&str> = s.split_whitespace().collect();
        let [name, c] = toks.as_slice() else {
            return Err(format!("expected `<constant|harmonic|square> <c>`, got `{s}`"));
        };
        let c: f64 = c.parse().map_err(|_| format!("bad schedule coefficient `{c}`"))?;
        match *name {
            "constant" => Ok(ScheduleKind::Constant(c)),
            "harmonic" => Ok(ScheduleKind::Harmonic(c)),
            "square" => Ok(ScheduleKind::Square(c)),
            other => Err(format!("unknown schedule `{other}`")),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn values() {
        assert_eq!(StepSchedule::harmonic(10.0).eval(4), 1.0);
        assert_eq!(StepSchedule::harmonic(10.0).uncapped().eval(4), 2.0);
        assert_eq!(StepSchedule::harmonic(10.0).eval(99), 0.1);
        for t in [0, 1, 1000] {
            assert_eq!(StepSchedule::constant(0.05).eval(t), 0.05);
        }
        assert_eq!(StepSchedule::square(1.0).eval(0), 1.0);
        assert_eq!(StepSchedule::square(1.0).eval(1), 0.25);
    }

    #[test]
    fn summability() {
        let h = StepSchedule::harmonic(10.0);
        assert!(h.sum_diverges() && h.square_summable());
        let s = StepSchedule::square(1.0);
        assert!(!s.sum_diverges() && s.square_summable());
        let c = StepSchedule::constant(0.05);
        assert!(c.sum_diverges() && !c.square_summable());
    }

    #[test]
    fn validation() {
        assert!(StepSchedule::harmonic(0.0).validate().is_err());
        assert!(StepSchedule::harmonic(1.0).with_cap(Some(1.5)).validate().is_err());
        assert!(StepSchedule::harmonic(10.0).uncapped().validate().is_ok());
    }

    #[test]
    fn text_round_trip() {
        for k in [ScheduleKind::Constant(0.05), ScheduleKind::Harmonic(10.0), ScheduleKind::Square(1.0)] {
            assert_eq!(k.to_string().parse::<ScheduleKind>().unwrap(), k);
        }
        assert!("linear 1".parse::<ScheduleKind>().is_err());
    }
}
