//! The `socsamp` command line.

use std::ffi::OsString;
use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use rand::Rng;

use crate::analysis::{check_conditions, conditional_mean_noise, decompose, AnalysisError};
use crate::linalg::Matrix;
use crate::protocol::{init_state, step, AlgorithmVariant, NetworkState, StepSchedule, VariantKind};
use crate::simplex::OpinionSample;
use crate::topology::{generate, TopologyKind};

use super::{
    bundled, bundled_names, emit_results, emit_sweep, run_ensemble, sweep, trial_rng, write_csv, EmitOptions,
    ExperimentConfig, HarnessError, Stride, STREAM_GRAPH, STREAM_OPINIONS, STREAM_PROTOCOL,
};

const DEFAULT_CHECK: &str = "\
name     = check
topology = grid 1 2
initial  = explicit 0.5 0.5
variant  = censored_exchange
schedule = harmonic 1
horizon  = 200
";

#[derive(Debug, Parser)]
#[command(name = "socsamp", version, about = "Social-sampling simulator and analysis harness")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Run one ensemble from a config file.
    Run(RunArgs),
    /// Run every point of the config's sweep axis.
    Sweep(RunArgs),
    /// Generate a topology and write it as an edge list.
    Graph(GraphArgs),
    /// Run the condition checkers and enumeration oracles on a small config.
    Check(CheckArgs),
    /// Run the bundled configs of one figure (fig1 ... fig7).
    Replicate(ReplicateArgs),
}

#[derive(Debug, Args, Clone, Default)]
struct Overrides {
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    trials: Option<usize>,
    #[arg(long)]
    horizon: Option<u64>,
    /// Record every N rounds instead of the logarithmic grid.
    #[arg(long)]
    stride: Option<u64>,
    /// Worker threads; 0 picks a default.
    #[arg(long, default_value_t = 0)]
    threads: usize,
    /// Use the uncapped step size.
    #[arg(long)]
    paper_delta: bool,
}

impl Overrides {
    fn apply(&self, c: &mut ExperimentConfig) -> Result<(), HarnessError> {
        if let Some(s) = self.seed {
            c.seed = s;
        }
        if let Some(t) = self.trials {
            c.trials = t;
        }
        if let Some(h) = self.horizon {
            c.horizon = h;
        }
        if let Some(s) = self.stride {
            c.stride = Stride::Linear { every: s };
        }
        if self.paper_delta {
            c.schedule.cap = None;
        }
        c.validate()
    }
}

#[derive(Debug, Args)]
struct RunArgs {
    #[arg(long)]
    config: PathBuf,
    /// Output directory; without it the CSV goes to stdout.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Also write one CSV per trial.
    #[arg(long)]
    per_trial: bool,
    #[command(flatten)]
    overrides: Overrides,
}

#[derive(Debug, Args)]
struct GraphArgs {
    /// Topology, e.g. `grid 10 10` or `pref_attach 100 3`.
    #[arg(long, conflicts_with = "config")]
    topology: Option<String>,
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Trial whose graph stream is used.
    #[arg(long, default_value_t = 0)]
    trial: usize,
    /// Edge-list file; stdout when absent.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct CheckArgs {
    /// Defaults to a two-node path with two opinions.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Random states per variant for the enumeration oracle.
    #[arg(long, default_value_t = 20)]
    states: usize,
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Debug, Args)]
struct ReplicateArgs {
    /// Figure name.
    figure: String,
    #[arg(long, default_value = "replicate")]
    out: PathBuf,
    #[arg(long)]
    per_trial: bool,
    #[command(flatten)]
    overrides: Overrides,
}

/// Runs the command line; returns the process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    match dispatch(cli.command) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            if e.is_config() {
                1
            } else {
                2
            }
        }
    }
}

fn read_config(path: &Path) -> Result<ExperimentConfig, HarnessError> {
    let text = fs::read_to_string(path).map_err(|e| HarnessError::Config {
        line: None,
        field: "config".into(),
        msg: format!("cannot read {}: {e}", path.display()),
    })?;
    ExperimentConfig::parse(&text).map_err(|e| match e {
        HarnessError::Config { line, field, msg } => HarnessError::Config {
            line,
            field,
            msg: format!("{msg} (in {})", path.display()),
        },
        other => other,
    })
}

fn dispatch(cmd: Command) -> Result<i32, HarnessError> {
    match cmd {
        Command::Run(a) => {
            let mut c = read_config(&a.config)?;
            c.sweep = None;
            a.overrides.apply(&mut c)?;
            let r = run_ensemble(&c, a.overrides.threads)?;
            match &a.out {
                Some(dir) => {
                    let opts = EmitOptions {
                        stem: c.name.clone(),
                        per_trial: a.per_trial,
                    };
                    for p in emit_results(&r, dir, &opts)? {
                        eprintln!("wrote {}", p.display());
                    }
                }
                None => write_csv(&r, io::stdout().lock())?,
            }
            eprintln!(
                "{}: {} trials, final mse {:.3e} ± {:.1e}",
                c.name,
                c.trials,
                r.final_mse_mean(),
                r.mse_stderr.last().unwrap()
            );
            Ok(0)
        }
        Command::Sweep(a) => {
            let mut c = read_config(&a.config)?;
            if c.sweep.is_none() {
                return Err(HarnessError::Config {
                    line: None,
                    field: "sweep".into(),
                    msg: "config has no sweep axis".into(),
                });
            }
            a.overrides.apply(&mut c)?;
            let results = sweep(&c, a.overrides.threads)?;
            report_sweep(&results);
            if let Some(dir) = &a.out {
                let opts = EmitOptions {
                    stem: c.name.clone(),
                    per_trial: a.per_trial,
                };
                for p in emit_sweep(&results, dir, &opts)? {
                    eprintln!("wrote {}", p.display());
                }
            }
            Ok(0)
        }
        Command::Graph(a) => {
            let (kind, seed) = match (&a.topology, &a.config) {
                (Some(t), _) => (
                    t.parse::<TopologyKind>().map_err(|e| HarnessError::Config {
                        line: None,
                        field: "topology".into(),
                        msg: e.to_string(),
                    })?,
                    a.seed,
                ),
                (None, Some(p)) => {
                    let c = read_config(p)?;
                    (c.topology, c.seed)
                }
                (None, None) => {
                    return Err(HarnessError::Config {
                        line: None,
                        field: "topology".into(),
                        msg: "pass --topology or --config".into(),
                    })
                }
            };
            kind.validate().map_err(|e| HarnessError::Config {
                line: None,
                field: "topology".into(),
                msg: e.to_string(),
            })?;
            let g = generate(&kind, &mut trial_rng(seed, a.trial, STREAM_GRAPH))?;
            match &a.out {
                Some(p) => fs::write(p, g.to_edge_list())?,
                None => io::stdout().lock().write_all(g.to_edge_list().as_bytes())?,
            }
            eprintln!(
                "{kind}: {} nodes, {} edges, max degree {}, connected {}",
                g.node_count(),
                g.edge_count(),
                g.max_degree(),
                g.is_connected()
            );
            Ok(0)
        }
        Command::Check(a) => {
            let mut c = match &a.config {
                Some(p) => read_config(p)?,
                None => ExperimentConfig::parse(DEFAULT_CHECK)?,
            };
            if let Some(s) = a.seed {
                c.seed = s;
            }
            let ok = run_checks(&c, a.states, &mut io::stdout().lock())?;
            Ok(if ok { 0 } else { 2 })
        }
        Command::Replicate(a) => {
            let b = bundled(&a.figure).ok_or_else(|| HarnessError::Config {
                line: None,
                field: "figure".into(),
                msg: format!("unknown figure `{}`; expected one of {}", a.figure, bundled_names().join(", ")),
            })?;
            for (stem, mut c) in b.configs()? {
                a.overrides.apply(&mut c)?;
                let opts = EmitOptions {
                    stem: stem.to_string(),
                    per_trial: a.per_trial,
                };
                eprintln!("running {stem} ({} trials, horizon {})", c.trials, c.horizon);
                let written = if c.sweep.is_some() {
                    let results = sweep(&c, a.overrides.threads)?;
                    report_sweep(&results);
                    emit_sweep(&results, &a.out, &opts)?
                } else {
                    let r = run_ensemble(&c, a.overrides.threads)?;
                    eprintln!("{stem}: final mse {:.3e}", r.final_mse_mean());
                    emit_results(&r, &a.out, &opts)?
                };
                for p in written {
                    eprintln!("wrote {}", p.display());
                }
            }
            Ok(0)
        }
    }
}

fn report_sweep(results: &[super::EnsembleResult]) {
    for r in results {
        let median = r
            .time_quantile(0.5)
            .map(|t| t.to_string())
            .unwrap_or_else(|| "-".into());
        eprintln!(
            "{}: final mse {:.3e}, median time to {} = {median}",
            r.config.name,
            r.final_mse_mean(),
            r.config.threshold
        );
    }
}

/// A random row-stochastic state with some exact zeros.
fn random_state<R: Rng>(n: usize, m: usize, rng: &mut R) -> Matrix {
    let mut q = Matrix::zeros(n, m);
    for i in 0..n {
        let row = q.row_mut(i);
        for x in row.iter_mut() {
            *x = if rng.random_bool(0.2) { 0.0 } else { rng.random::<f64>() };
        }
        if row.iter().all(|&x| x == 0.0) {
            row[rng.random_range(0..m)] = 1.0;
        }
        let s: f64 = row.iter().sum();
        row.iter_mut().for_each(|x| *x /= s);
    }
    q
}

/// Condition checks and enumeration oracles for all built-in variants.
///
/// Writes one `PASS`/`FAIL`/`SKIP` line per check and returns whether none failed.
pub fn run_checks<W: Write>(config: &ExperimentConfig, states: usize, out: &mut W) -> Result<bool, HarnessError> {
    let graph = generate(&config.topology, &mut trial_rng(config.seed, 0, STREAM_GRAPH))?;
    let n = graph.node_count();
    let mut opinion_rng = trial_rng(config.seed, 0, STREAM_OPINIONS);
    let law = config.initial.realize(&mut opinion_rng)?;
    let sample = OpinionSample::draw(&law, n, &mut opinion_rng);
    let m = sample.alphabet();
    let mut all_ok = true;
    let mut line = |out: &mut W, ok: Option<bool>, text: String| -> io::Result<()> {
        let tag = match ok {
            Some(true) => "PASS",
            Some(false) => {
                all_ok = false;
                "FAIL"
            }
            None => "SKIP",
        };
        writeln!(out, "{tag} {text}")
    };
    writeln!(
        out,
        "# {} ({} nodes, {} edges, {m} opinions, schedule {})",
        config.topology,
        n,
        graph.edge_count(),
        config.schedule.label()
    )?;
    for kind in [
        VariantKind::Averaging,
        VariantKind::DecayingAveraging,
        VariantKind::CensoredExchange,
    ] {
        let variant: AlgorithmVariant = kind.into();
        let name = kind.as_str();
        let mut rng = trial_rng(config.seed, 0, STREAM_PROTOCOL);
        let mut state = init_state(&sample);
        let mut records = Vec::new();
        let mut mismatch = None;
        for _ in 0..config.horizon.min(500) {
            let (next, rec) = step(&state, &variant, &config.schedule, &graph, &mut rng)?;
            match decompose(&rec, &graph) {
                Ok(_) => {}
                Err(AnalysisError::ReconstructionMismatch { t, .. }) => {
                    mismatch.get_or_insert(t);
                }
                Err(e) => return Err(e.into()),
            }
            records.push(rec);
            state = next;
        }
        line(
            out,
            Some(mismatch.is_none()),
            format!(
                "{name}: step decomposition reconstructs {} rounds{}",
                records.len(),
                mismatch.map(|t| format!(" (first mismatch at round {t})")).unwrap_or_default()
            ),
        )?;
        let report = check_conditions(&records, &variant, &config.schedule, &graph);
        line(
            out,
            Some(report.mixing.pass),
            format!("{name}: condition 1 residual {:e}", report.mixing.max_residual),
        )?;
        line(
            out,
            Some(report.limiting.pass),
            format!(
                "{name}: condition 3 limiting drift (symmetric {}, |H1| {:e}, zero multiplicity {} of {} components, largest nonzero eigenvalue {}, literal |λ|<1 {})",
                report.limiting.symmetric,
                report.limiting.null_residual,
                report.limiting.zero_multiplicity,
                report.limiting.components,
                report
                    .limiting
                    .max_nonzero_eigenvalue
                    .map(|l| format!("{l:.6}"))
                    .unwrap_or_else(|| "none".into()),
                report.limiting.literal_unit_bound
            ),
        )?;
        line(
            out,
            Some(report.perturbation.pass),
            format!(
                "{name}: condition 4 sup |E[C]|/δ = {:.6e} over {} rounds",
                report.perturbation.sup_ratio, report.perturbation.rounds_checked
            ),
        )?;
        let mass_ok = report.mass.pass;
        writeln!(
            out,
            "INFO {name}: condition 5 mass drift {:e} ({})",
            report.mass.max_drift,
            if mass_ok { "conserved" } else { "not conserved" }
        )?;

        let mut state_rng = trial_rng(config.seed, 1, STREAM_PROTOCOL);
        let mut max_noise = 0.0f64;
        let mut skipped = false;
        for _ in 0..states {
            let s = NetworkState {
                t: state_rng.random_range(0..50),
                q: random_state(n, m, &mut state_rng),
            };
            match conditional_mean_noise(&s, &variant, &config.schedule, &graph) {
                Ok(mean) => max_noise = max_noise.max(mean.max_abs()),
                Err(AnalysisError::TooLargeToEnumerate { .. }) => {
                    skipped = true;
                    break;
                }
                Err(e) => return Err(e.into()),
            }
        }
        if skipped {
            line(out, None, format!("{name}: outcome space too large to enumerate"))?;
        } else {
            line(
                out,
                Some(max_noise <= 1e-12),
                format!("{name}: enumerated E[M|F] max entry {max_noise:e} over {states} states"),
            )?;
        }
    }
    let c2 = check_conditions_step_size(&config.schedule);
    line(
        out,
        Some(true),
        format!(
            "schedule {}: condition 2 {}",
            config.schedule.label(),
            if c2 { "satisfied" } else { "not satisfied" }
        ),
    )?;
    Ok(all_ok)
}

fn check_conditions_step_size(s: &StepSchedule) -> bool {
    s.sum_diverges() && s.square_summable()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_check_passes() {
        let c = ExperimentConfig::parse(DEFAULT_CHECK).unwrap();
        let mut buf = Vec::new();
        assert!(run_checks(&c, 10, &mut buf).unwrap());
        let text = String::from_utf8(buf).unwrap();
        assert!(!text.contains("FAIL"), "{text}");
        assert!(text.contains("enumerated"));
    }

    #[test]
    fn bad_arguments_exit_one() {
        assert_eq!(run(["socsamp", "run"]), 1);
        assert_eq!(run(["socsamp", "replicate", "fig99"]), 1);
        assert_eq!(run(["socsamp", "graph", "--topology", "grid 0 3"]), 1);
    }
}
