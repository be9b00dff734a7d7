use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::analysis::ConditionReport;

use super::run::{EnsembleResult, Provenance, STREAM_GRAPH, STREAM_OPINIONS, STREAM_PROTOCOL};
use super::{ExperimentConfig, HarnessError, TrialResult};

pub const CSV_HEADER: &str = "t,mse_mean,mse_stderr,disagreement_mean,mass_drift_max";
const TRIAL_HEADER: &str = "t,mse,disagreement,mass_drift";

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct EmitOptions {
    /// File name stem; outputs are `<stem>.csv` and `<stem>.summary.json`.
    pub stem: String,
    /// Also write `<stem>.trials/trial_<k>.csv`.
    pub per_trial: bool,
}

impl Default for EmitOptions {
    fn default() -> Self {
        Self {
            stem: "results".into(),
            per_trial: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Seeds {
    pub base_seed: u64,
    /// `[graph, opinions, protocol]` stream ids per trial.
    pub trial_streams: Vec<[u64; 3]>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ThresholdSummary {
    pub threshold: f64,
    pub per_trial: Vec<Option<u64>>,
    /// Quantiles with never-crossing trials counted as infinite; `None` means not reached.
    pub q10: Option<u64>,
    pub median: Option<u64>,
    pub q90: Option<u64>,
    pub reached: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrialFinal {
    pub index: usize,
    pub final_mse: f64,
    pub final_disagreement: f64,
    /// Column means of the final estimates.
    pub final_mean: Vec<f64>,
    pub absorbed_atom: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RateSummary {
    pub window: (u64, u64),
    pub slope: Option<f64>,
}

/// Contents of `<stem>.summary.json`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Summary {
    /// Canonical config text; feeds back into the config parser.
    pub config_text: String,
    pub config: ExperimentConfig,
    pub seeds: Seeds,
    pub trials: usize,
    pub recorded_rounds: usize,
    pub final_mse_mean: f64,
    pub final_mse_stderr: f64,
    pub time_to_threshold: ThresholdSummary,
    pub rate_fit: RateSummary,
    /// Trials whose final state is an elementary consensus.
    pub absorbed: usize,
    pub finals: Vec<TrialFinal>,
    pub condition_reports: Vec<ConditionReport>,
    pub provenance: Provenance,
}

impl Summary {
    pub fn of(result: &EnsembleResult) -> Self {
        let config = &result.config;
        let per_trial = result.time_to_threshold();
        Summary {
            config_text: config.to_text(),
            config: config.clone(),
            seeds: Seeds {
                base_seed: config.seed,
                trial_streams: result
                    .trials
                    .iter()
                    .map(|t| {
                        let base = t.index as u64 * 4;
                        [base + STREAM_GRAPH, base + STREAM_OPINIONS, base + STREAM_PROTOCOL]
                    })
                    .collect(),
            },
            trials: result.trials.len(),
            recorded_rounds: result.rounds.len(),
            final_mse_mean: result.final_mse_mean(),
            final_mse_stderr: *result.mse_stderr.last().unwrap(),
            time_to_threshold: ThresholdSummary {
                threshold: config.threshold,
                reached: per_trial.iter().filter(|t| t.is_some()).count(),
                per_trial,
                q10: result.time_quantile(0.1),
                median: result.time_quantile(0.5),
                q90: result.time_quantile(0.9),
            },
            rate_fit: RateSummary {
                window: config.fit_window,
                slope: result.rate_fit(),
            },
            absorbed: result.trials.iter().filter(|t| t.absorbed_atom.is_some()).count(),
            finals: result
                .trials
                .iter()
                .map(|t| TrialFinal {
                    index: t.index,
                    final_mse: t.final_mse,
                    final_disagreement: t.final_disagreement,
                    final_mean: t.final_mean.clone(),
                    absorbed_atom: t.absorbed_atom,
                })
                .collect(),
            condition_reports: result.trials.iter().map(|t| t.report.clone()).collect(),
            provenance: result.provenance.clone(),
        }
    }
}

pub fn write_csv<W: Write>(result: &EnsembleResult, mut out: W) -> io::Result<()> {
    writeln!(out, "{CSV_HEADER}")?;
    for r in 0..result.rounds.len() {
        writeln!(
            out,
            "{},{},{},{},{}",
            result.rounds[r],
            result.mse_mean[r],
            result.mse_stderr[r],
            result.disagreement_mean[r],
            result.mass_drift_max[r]
        )?;
    }
    Ok(())
}

pub fn write_trial_csv<W: Write>(trial: &TrialResult, mut out: W) -> io::Result<()> {
    writeln!(out, "{TRIAL_HEADER}")?;
    let m = &trial.metrics;
    for r in 0..m.rounds.len() {
        writeln!(
            out,
            "{},{},{},{}",
            m.rounds[r], m.mse[r], m.disagreement[r], trial.mass_drift[r]
        )?;
    }
    Ok(())
}

pub fn summary_json(result: &EnsembleResult) -> String {
    serde_json::to_string_pretty(&Summary::of(result)).expect("summary serializes")
}

/// Writes the CSV, the JSON summary and optionally per-trial CSVs; returns the paths written.
pub fn emit_results(result: &EnsembleResult, dir: &Path, opts: &EmitOptions) -> Result<Vec<PathBuf>, HarnessError> {
    fs::create_dir_all(dir)?;
    let mut written = Vec::new();
    let csv = dir.join(format!("{}.csv", opts.stem));
    let mut buf = Vec::new();
    write_csv(result, &mut buf)?;
    fs::write(&csv, buf)?;
    written.push(csv);

    let json = dir.join(format!("{}.summary.json", opts.stem));
    fs::write(&json, summary_json(result) + "\n")?;
    written.push(json);

    if opts.per_trial {
        let sub = dir.join(format!("{}.trials", opts.stem));
        fs::create_dir_all(&sub)?;
        for t in &result.trials {
            let p = sub.join(format!("trial_{:04}.csv", t.index));
            let mut buf = Vec::new();
            write_trial_csv(t, &mut buf)?;
            fs::write(&p, buf)?;
            written.push(p);
        }
    }
    Ok(written)
}

/// Emits every sweep point as `<stem>_<k>` plus an index `<stem>.sweep.csv`.
pub fn emit_sweep(results: &[EnsembleResult], dir: &Path, opts: &EmitOptions) -> Result<Vec<PathBuf>, HarnessError> {
    let mut written = Vec::new();
    let mut index = String::from("point,name,final_mse_mean,final_mse_stderr,time_median,rate_slope\n");
    for (k, r) in results.iter().enumerate() {
        let stem = format!("{}_{k:02}", opts.stem);
        written.extend(emit_results(
            r,
            dir,
            &EmitOptions {
                stem: stem.clone(),
                per_trial: opts.per_trial,
            },
        )?);
        let opt = |x: Option<String>| x.unwrap_or_default();
        index.push_str(&format!(
            "{k},{},{},{},{},{}\n",
            r.config.name.replace(',', ";"),
            r.final_mse_mean(),
            r.mse_stderr.last().unwrap(),
            opt(r.time_quantile(0.5).map(|t| t.to_string())),
            opt(r.rate_fit().map(|s| s.to_string())),
        ));
    }
    fs::create_dir_all(dir)?;
    let p = dir.join(format!("{}.sweep.csv", opts.stem));
    fs::write(&p, index)?;
    written.push(p);
    Ok(written)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::harness::{run_ensemble, InitialLaw};
    use crate::protocol::{StepSchedule, VariantKind};
    use crate::topology::TopologyKind;

    fn small() -> EnsembleResult {
        let mut c = ExperimentConfig::new(
            TopologyKind::Grid { rows: 3, cols: 3 },
            InitialLaw::Explicit {
                weights: vec![0.5, 0.5],
            },
            VariantKind::CensoredExchange,
            StepSchedule::harmonic(5.0),
        );
        c.horizon = 200;
        c.trials = 2;
        run_ensemble(&c, 1).unwrap()
    }

    #[test]
    fn csv_rows_match_recorded_rounds() {
        let r = small();
        let mut buf = Vec::new();
        write_csv(&r, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[0], CSV_HEADER);
        assert_eq!(lines.len() - 1, r.rounds.len());
    }

    #[test]
    fn summary_round_trips() {
        let r = small();
        let json = summary_json(&r);
        let back: Summary = serde_json::from_str(&json).unwrap();
        assert_eq!(back, Summary::of(&r));
        assert_eq!(ExperimentConfig::parse(&back.config_text).unwrap(), r.config);
    }
}
