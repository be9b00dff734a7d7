//! Experiment configuration and its flat `key = value` text form.
//!
//! ```text
//! # comments start with '#'
//! name      = fig3
//! topology  = grid 5 5
//! initial   = explicit 0.4 0.3 0.2 0.1
//! variant   = censored_exchange
//! schedule  = harmonic 10
//! cap       = 1            # or `none` for the uncapped step size
//! horizon   = 100000
//! trials    = 50
//! seed      = 1
//! stride    = log 1.2      # or `linear 100`
//! threshold = 0.01
//! fit_window = 100 10000
//! sweep     = schedule: harmonic 1 | square 1 | constant 0.05
//! ```

use std::fmt;
use std::str::FromStr;

use rand::seq::index;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::protocol::{AlgorithmVariant, ScheduleKind, StepSchedule, VariantKind};
use crate::simplex::{Distribution, SimplexError};
use crate::topology::TopologyKind;

use super::HarnessError;

/// Distribution the initial opinions are drawn from.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "law", rename_all = "snake_case")]
pub enum InitialLaw {
    Explicit { weights: Vec<f64> },
    /// Uniform over `support` of `alphabet` opinions; the support is drawn per trial.
    UniformSupport { alphabet: usize, support: usize },
    /// `(0.38, 0.38, 0.24/(M−2), …)`.
    Skewed { alphabet: usize },
}

impl InitialLaw {
    pub fn alphabet(&self) -> usize {
        match self {
            InitialLaw::Explicit { weights } => weights.len(),
            InitialLaw::UniformSupport { alphabet, .. } | InitialLaw::Skewed { alphabet } => *alphabet,
        }
    }

    pub fn validate(&self) -> Result<(), String> {
        match self {
            InitialLaw::Explicit { weights } => Distribution::new(weights.clone())
                .map(|_| ())
                .map_err(|e: SimplexError| e.to_string()),
            InitialLaw::UniformSupport { alphabet, support } => {
                if *support == 0 || support > alphabet {
                    Err(format!("support {support} must lie in 1..={alphabet}"))
                } else {
                    Ok(())
                }
            }
            InitialLaw::Skewed { alphabet } => {
                if *alphabet < 3 {
                    Err("skewed law needs at least 3 opinions".into())
                } else {
                    Ok(())
                }
            }
        }
    }

    /// The law for one trial; only `UniformSupport` consumes randomness.
    pub fn realize<R: Rng + ?Sized>(&self, rng: &mut R) -> Result<Distribution, SimplexError> {
        match self {
            InitialLaw::Explicit { weights } => Distribution::new(weights.clone()),
            InitialLaw::UniformSupport { alphabet, support } => {
                let mut w = vec![0.0; *alphabet];
                for k in index::sample(rng, *alphabet, *support) {
                    w[k] = 1.0 / *support as f64;
                }
                Distribution::new(w)
            }
            InitialLaw::Skewed { alphabet } => {
                let rest = 0.24 / (*alphabet - 2) as f64;
                let mut w = vec![rest; *alphabet];
                w[0] = 0.38;
                w[1] = 0.38;
                Distribution::new(w)
            }
        }
    }
}

impl fmt::Display for InitialLaw {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            InitialLaw::Explicit { weights } => {
                write!(f, "explicit")?;
                for w in weights {
                    write!(f, " {w:?}")?;
                }
                Ok(())
            }
            InitialLaw::UniformSupport { alphabet, support } => write!(f, "uniform_support {alphabet} {support}"),
            InitialLaw::Skewed { alphabet } => write!(f, "skewed {alphabet}"),
        }
    }
}

impl FromStr for InitialLaw {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        let toks: Vec<&str> = s.split_whitespace().collect();
        let usize_at = |k: usize| -> Result<usize, String> {
            toks.get(k)
                .ok_or_else(|| format!("missing argument {k} in `{s}`"))?
                .parse()
                .map_err(|_| format!("bad integer `{}`", toks[k]))
        };
        let law = match toks.first().copied() {
            Some("explicit") => {
                let weights = toks[1..]
                    .iter()
                    .map(|t| t.parse::<f64>().map_err(|_| format!("bad weight `{t}`")))
                    .collect::<Result<Vec<_>, _>>()?;
                InitialLaw::Explicit { weights }
            }
            Some("uniform") if toks.len() == 2 => {
                let m = usize_at(1)?;
                InitialLaw::UniformSupport { alphabet: m, support: m }
            }
            Some("uniform_support") if toks.len() == 3 => InitialLaw::UniformSupport {
                alphabet: usize_at(1)?,
                support: usize_at(2)?,
            },
            Some("skewed") if toks.len() == 2 => InitialLaw::Skewed { alphabet: usize_at(1)? },
            _ => {
                return Err(format!(
                    "expected `explicit w..`, `uniform M`, `uniform_support M M*` or `skewed M`, got `{s}`"
                ))
            }
        };
        law.validate()?;
        Ok(law)
    }
}

/// Which rounds are recorded.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Stride {
    /// Rounds `0` and `⌈base^k⌉`, plus the horizon.
    Log { base: f64 },
    /// Every `every` rounds, plus the horizon.
    Linear { every: u64 },
}

impl Default for Stride {
    fn default() -> Self {
        Stride::Log { base: 1.2 }
    }
}

impl Stride {
    pub fn rounds(&self, horizon: u64) -> Vec<u64> {
        let mut out = vec![0u64];
        match *self {
            Stride::Log { base } => {
                let mut x = 1.0f64;
                loop {
                    let t = x.ceil() as u64;
                    if t > horizon {
                        break;
                    }
                    if t > *out.last().unwrap() {
                        out.push(t);
                    }
                    x *= base;
                }
            }
            Stride::Linear { every } => {
                let mut t = every;
                while t <= horizon {
                    out.push(t);
                    t += every;
                }
            }
        }
        if *out.last().unwrap() != horizon {
            out.push(horizon);
        }
        out
    }
}

impl fmt::Display for Stride {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Stride::Log { base } => write!(f, "log {base:?}"),
            Stride::Linear { every } => write!(f, "linear {every}"),
        }
    }
}

impl FromStr for Stride {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        let toks: Vec<&str> = s.split_whitespace().collect();
        match toks.as_slice() {
            ["log", b] => {
                let base: f64 = b.parse().map_err(|_| format!("bad log base `{b}`"))?;
                if !(base > 1.0 && base.is_finite()) {
                    return Err("log base must exceed 1".into());
                }
                Ok(Stride::Log { base })
            }
            ["linear", e] => {
                let every: u64 = e.parse().map_err(|_| format!("bad stride `{e}`"))?;
                if every == 0 {
                    return Err("linear stride must be positive".into());
                }
                Ok(Stride::Linear { every })
            }
            [n] => n
                .parse::<u64>()
                .ok()
                .filter(|&e| e > 0)
                .map(|every| Stride::Linear { every })
                .ok_or_else(|| format!("expected `log B`, `linear N` or `N`, got `{s}`")),
            _ => Err(format!("expected `log B`, `linear N` or `N`, got `{s}`")),
        }
    }
}

/// One swept parameter and its values.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "axis", content = "values", rename_all = "snake_case")]
pub enum SweepAxis {
    Schedule(Vec<ScheduleKind>),
    Topology(Vec<TopologyKind>),
    Alphabet(Vec<usize>),
    Support(Vec<usize>),
}

impl SweepAxis {
    pub fn name(&self) -> &'static str {
        match self {
            SweepAxis::Schedule(_) => "schedule",
            SweepAxis::Topology(_) => "topology",
            SweepAxis::Alphabet(_) => "alphabet",
            SweepAxis::Support(_) => "support",
        }
    }

    pub fn len(&self) -> usize {
        match self {
            SweepAxis::Schedule(v) => v.len(),
            SweepAxis::Topology(v) => v.len(),
            SweepAxis::Alphabet(v) => v.len(),
            SweepAxis::Support(v) => v.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn labels(&self) -> Vec<String> {
        match self {
            SweepAxis::Schedule(v) => v.iter().map(|k| k.to_string()).collect(),
            SweepAxis::Topology(v) => v.iter().map(|k| k.to_string()).collect(),
            SweepAxis::Alphabet(v) | SweepAxis::Support(v) => v.iter().map(|k| k.to_string()).collect(),
        }
    }
}

impl fmt::Display for SweepAxis {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.name(), self.labels().join(" | "))
    }
}

impl FromStr for SweepAxis {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        let (axis, rest) = s
            .split_once(':')
            .ok_or_else(|| format!("expected `axis: v1 | v2 ...`, got `{s}`"))?;
        let items: Vec<&str> = rest.split('|').map(str::trim).filter(|x| !x.is_empty()).collect();
        if items.is_empty() {
            return Err("sweep axis has no values".into());
        }
        let ints = || -> Result<Vec<usize>, String> {
            items
                .iter()
                .map(|x| x.parse::<usize>().map_err(|_| format!("bad integer `{x}`")))
                .collect()
        };
        match axis.trim() {
            "schedule" => Ok(SweepAxis::Schedule(
                items.iter().map(|x| x.parse()).collect::<Result<_, _>>()?,
            )),
            "topology" => Ok(SweepAxis::Topology(
                items
                    .iter()
                    .map(|x| x.parse::<TopologyKind>().map_err(|e| e.to_string()))
                    .collect::<Result<_, _>>()?,
            )),
            "alphabet" => Ok(SweepAxis::Alphabet(ints()?)),
            "support" => Ok(SweepAxis::Support(ints()?)),
            other => Err(format!("unknown sweep axis `{other}`")),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub name: String,
    pub topology: TopologyKind,
    pub initial: InitialLaw,
    pub variant: VariantKind,
    pub schedule: StepSchedule,
    pub horizon: u64,
    pub trials: usize,
    pub seed: u64,
    pub stride: Stride,
    /// MSE level for time-to-threshold.
    pub threshold: f64,
    /// Round window for the log-log rate fit.
    pub fit_window: (u64, u64),
    pub sweep: Option<SweepAxis>,
}

const KEYS: &[&str] = &[
    "name",
    "topology",
    "initial",
    "variant",
    "schedule",
    "cap",
    "horizon",
    "trials",
    "seed",
    "stride",
    "threshold",
    "fit_window",
    "sweep",
];

impl ExperimentConfig {
    pub fn new(topology: TopologyKind, initial: InitialLaw, variant: VariantKind, schedule: StepSchedule) -> Self {
        Self {
            name: "experiment".into(),
            topology,
            initial,
            variant,
            schedule,
            horizon: 10_000,
            trials: 1,
            seed: 0,
            stride: Stride::default(),
            threshold: 1e-2,
            fit_window: (100, 10_000),
            sweep: None,
        }
    }

    pub fn alphabet(&self) -> usize {
        self.initial.alphabet()
    }

    pub fn algorithm(&self) -> AlgorithmVariant {
        self.variant.into()
    }

    pub fn validate(&self) -> Result<(), HarnessError> {
        let bad = |field: &str, msg: String| HarnessError::Config {
            line: None,
            field: field.into(),
            msg,
        };
        self.topology.validate().map_err(|e| bad("topology", e.to_string()))?;
        self.initial.validate().map_err(|e| bad("initial", e))?;
        self.schedule.validate().map_err(|e| bad("schedule", e))?;
        if self.horizon == 0 {
            return Err(bad("horizon", "must be at least 1".into()));
        }
        if self.trials == 0 {
            return Err(bad("trials", "must be at least 1".into()));
        }
        if !(self.threshold > 0.0) {
            return Err(bad("threshold", "must be positive".into()));
        }
        if self.fit_window.0 >= self.fit_window.1 {
            return Err(bad("fit_window", "lower bound must be below upper bound".into()));
        }
        if let Some(axis) = &self.sweep {
            if axis.is_empty() {
                return Err(bad("sweep", "no values".into()));
            }
            for k in 0..axis.len() {
                self.sweep_point(k)?.validate()?;
            }
        }
        Ok(())
    }

    /// The configuration at one point of the sweep axis, with the axis removed.
    pub fn sweep_point(&self, k: usize) -> Result<Self, HarnessError> {
        let mut c = self.clone();
        c.sweep = None;
        let Some(axis) = &self.sweep else {
            return Ok(c);
        };
        let bad = |msg: String| HarnessError::Config {
            line: None,
            field: "sweep".into(),
            msg,
        };
        match axis {
            SweepAxis::Schedule(v) => c.schedule.kind = v[k],
            SweepAxis::Topology(v) => c.topology = v[k].clone(),
            SweepAxis::Alphabet(v) => {
                c.initial = match &self.initial {
                    InitialLaw::UniformSupport { alphabet, support } if alphabet == support => {
                        InitialLaw::UniformSupport {
                            alphabet: v[k],
                            support: v[k],
                        }
                    }
                    InitialLaw::UniformSupport { support, .. } => InitialLaw::UniformSupport {
                        alphabet: v[k],
                        support: *support,
                    },
                    InitialLaw::Skewed { .. } => InitialLaw::Skewed { alphabet: v[k] },
                    InitialLaw::Explicit { .. } => return Err(bad("alphabet sweep needs a parametric law".into())),
                }
            }
            SweepAxis::Support(v) => match &self.initial {
                InitialLaw::UniformSupport { alphabet, .. } => {
                    c.initial = InitialLaw::UniformSupport {
                        alphabet: *alphabet,
                        support: v[k],
                    }
                }
                _ => return Err(bad("support sweep needs `uniform_support`".into())),
            },
        }
        c.name = format!("{}[{}={}]", self.name, axis.name(), axis.labels()[k]);
        Ok(c)
    }

    pub fn parse(text: &str) -> Result<Self, HarnessError> {
        let mut fields: Vec<(usize, &str, &str)> = Vec::new();
        for (k, raw) in text.lines().enumerate() {
            let line = k + 1;
            let content = raw.split('#').next().unwrap_or("").trim();
            if content.is_empty() {
                continue;
            }
            let (key, value) = content.split_once('=').ok_or_else(|| HarnessError::Config {
                line: Some(line),
                field: content.to_string(),
                msg: "expected `key = value`".into(),
            })?;
            let (key, value) = (key.trim(), value.trim());
            if !KEYS.contains(&key) {
                return Err(HarnessError::Config {
                    line: Some(line),
                    field: key.into(),
                    msg: "unknown key".into(),
                });
            }
            if fields.iter().any(|(_, k, _)| *k == key) {
                return Err(HarnessError::Config {
                    line: Some(line),
                    field: key.into(),
                    msg: "duplicate key".into(),
                });
            }
            fields.push((line, key, value));
        }
        let find = |key: &str| fields.iter().find(|(_, k, _)| *k == key).map(|&(l, _, v)| (l, v));
        fn field<T>(
            found: Option<(usize, &str)>,
            key: &str,
            parse: impl Fn(&str) -> Result<T, String>,
        ) -> Result<Option<T>, HarnessError> {
            match found {
                None => Ok(None),
                Some((line, v)) => parse(v).map(Some).map_err(|msg| HarnessError::Config {
                    line: Some(line),
                    field: key.into(),
                    msg,
                }),
            }
        }
        let required = |key: &str| HarnessError::Config {
            line: None,
            field: key.into(),
            msg: "missing required key".into(),
        };
        let num = |v: &str| v.parse::<u64>().map_err(|_| format!("bad integer `{v}`"));

        let topology = field(find("topology"), "topology", |v| {
            v.parse::<TopologyKind>().map_err(|e| e.to_string())
        })?
        .ok_or_else(|| required("topology"))?;
        let initial = field(find("initial"), "initial", str::parse::<InitialLaw>)?.ok_or_else(|| required("initial"))?;
        let variant = field(find("variant"), "variant", |v| {
            v.parse::<VariantKind>()
        })?
        .ok_or_else(|| required("variant"))?;
        let kind = field(find("schedule"), "schedule", str::parse::<ScheduleKind>)?.unwrap_or(ScheduleKind::Harmonic(1.0));
        let cap = field(find("cap"), "cap", |v| {
            if v == "none" {
                Ok(None)
            } else {
                v.parse::<f64>().map(Some).map_err(|_| format!("bad cap `{v}`"))
            }
        })?
        .unwrap_or(Some(crate::protocol::DEFAULT_CAP));
        let schedule = StepSchedule { kind, cap };
        let horizon = field(find("horizon"), "horizon", num)?.ok_or_else(|| required("horizon"))?;

        let mut c = ExperimentConfig::new(topology, initial, variant, schedule);
        c.horizon = horizon;
        if let Some(name) = field(find("name"), "name", |v| Ok(v.to_string()))? {
            c.name = name;
        }
        if let Some(t) = field(find("trials"), "trials", num)? {
            c.trials = t as usize;
        }
        if let Some(s) = field(find("seed"), "seed", num)? {
            c.seed = s;
        }
        if let Some(s) = field(find("stride"), "stride", str::parse::<Stride>)? {
            c.stride = s;
        }
        if let Some(t) = field(find("threshold"), "threshold", |v| {
            v.parse::<f64>().map_err(|_| format!("bad number `{v}`"))
        })? {
            c.threshold = t;
        }
        if let Some(w) = field(find("fit_window"), "fit_window", |v| {
            let toks: Vec<&str> = v.split_whitespace().collect();
            match toks.as_slice() {
                [a, b] => Ok((num(a)?, num(b)?)),
                _ => Err("expected two round indices".into()),
            }
        })? {
            c.fit_window = w;
        }
        c.sweep = field(find("sweep"), "sweep", str::parse::<SweepAxis>)?;

        c.validate().map_err(|e| match e {
            HarnessError::Config { field, msg, .. } => HarnessError::Config {
                line: find(&field).map(|(l, _)| l),
                field,
                msg,
            },
            other => other,
        })?;
        Ok(c)
    }

    /// Canonical text form; `parse(to_text(c)) == c`.
    pub fn to_text(&self) -> String {
        let mut s = String::new();
        let mut put = |k: &str, v: String| {
            s.push_str(&format!("{k:<10} = {v}\n"));
        };
        put("name", self.name.clone());
        put("topology", self.topology.to_string());
        put("initial", self.initial.to_string());
        put("variant", self.variant.as_str().to_string());
        put("schedule", self.schedule.kind.to_string());
        put(
            "cap",
            match self.schedule.cap {
                Some(c) => format!("{c:?}"),
                None => "none".into(),
            },
        );
        put("horizon", self.horizon.to_string());
        put("trials", self.trials.to_string());
        put("seed", self.seed.to_string());
        put("stride", self.stride.to_string());
        put("threshold", format!("{:?}", self.threshold));
        put("fit_window", format!("{} {}", self.fit_window.0, self.fit_window.1));
        if let Some(axis) = &self.sweep {
            put("sweep", axis.to_string());
        }
        s
    }
}

impl FromStr for ExperimentConfig {
    type Err = HarnessError;

    fn from_str(s: &str) -> Result<Self, HarnessError> {
        Self::parse(s)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const SAMPLE: &str = "\
# censored exchange on a small grid
name = demo
topology = grid 5 5
initial = explicit 0.4 0.3 0.2 0.1
variant = censored_exchange
schedule = harmonic 10
horizon = 1000
trials = 4
seed = 7
sweep = schedule: harmonic 1 | square 1 | constant 0.05
";

    #[test]
    fn parse_and_round_trip() {
        let c = ExperimentConfig::parse(SAMPLE).unwrap();
        assert_eq!(c.alphabet(), 4);
        assert_eq!(c.schedule, StepSchedule::harmonic(10.0));
        assert_eq!(c.sweep.as_ref().unwrap().len(), 3);
        let again = ExperimentConfig::parse(&c.to_text()).unwrap();
        assert_eq!(again, c);
    }

    #[test]
    fn unknown_key_reports_line() {
        let text = format!("{SAMPLE}colour = blue\n");
        match ExperimentConfig::parse(&text) {
            Err(HarnessError::Config { line, field, .. }) => {
                assert_eq!(line, Some(11));
                assert_eq!(field, "colour");
            }
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn bad_value_reports_field() {
        let text = SAMPLE.replace("horizon = 1000", "horizon = soon");
        match ExperimentConfig::parse(&text) {
            Err(HarnessError::Config { line, field, .. }) => {
                assert_eq!(line, Some(7));
                assert_eq!(field, "horizon");
            }
            other => panic!("{other:?}"),
        }
        let text = SAMPLE.replace("0.4 0.3 0.2 0.1", "0.4 0.3 0.2 0.2");
        assert!(matches!(
            ExperimentConfig::parse(&text),
            Err(HarnessError::Config { line: Some(4), .. })
        ));
        let text = SAMPLE.replace("trials = 4", "trials = 0");
        assert!(matches!(
            ExperimentConfig::parse(&text),
            Err(HarnessError::Config { line: Some(8), .. })
        ));
    }

    #[test]
    fn missing_key() {
        let text = SAMPLE.replace("horizon = 1000\n", "");
        assert!(matches!(
            ExperimentConfig::parse(&text),
            Err(HarnessError::Config { line: None, .. })
        ));
    }

    #[test]
    fn log_stride_grid() {
        let r = Stride::Log { base: 1.2 }.rounds(100);
        assert_eq!(&r[..6], &[0, 1, 2, 3, 4, 5]);
        assert_eq!(*r.last().unwrap(), 100);
        assert!(r.windows(2).all(|w| w[0] < w[1]));
        assert_eq!(Stride::Linear { every: 30 }.rounds(100), vec![0, 30, 60, 90, 100]);
    }

    #[test]
    fn skewed_law() {
        let d = InitialLaw::Skewed { alphabet: 5 }
            .realize(&mut rand::rng())
            .unwrap();
        assert!((d.weights()[2] - 0.08).abs() < 1e-15);
    }

    #[test]
    fn sweep_points() {
        let c = ExperimentConfig::parse(SAMPLE).unwrap();
        let p = c.sweep_point(1).unwrap();
        assert_eq!(p.schedule, StepSchedule::square(1.0));
        assert!(p.sweep.is_none());
        let mut u = c.clone();
        u.initial = InitialLaw::UniformSupport {
            alphabet: 150,
            support: 5,
        };
        u.sweep = Some(SweepAxis::Support(vec![2, 15]));
        assert_eq!(
            u.sweep_point(1).unwrap().initial,
            InitialLaw::UniformSupport {
                alphabet: 150,
                support: 15
            }
        );
    }
}
