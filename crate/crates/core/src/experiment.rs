//! Config-driven Monte Carlo experiment runner: null calibration tables,
//! power grids, and phase-transition curves, with deterministic seeding
//! (every replication's stream is a pure function of (seed, cell, rep))
//! and CSV/JSON output.

use std::fmt::Write as _;
use std::io::Write;
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{generate_network, sample_memberships, MembershipSpec, MmsbmParams};
use crate::presets::{build_scenario, Preset, PresetKnobs, Scenario};
use crate::rng;
use crate::stats::{self, StatisticName, TestReport};
use crate::theory::{theory_report_for_params, TheoryReport};

/// Canonical knob ordering for grid expansion and CSV columns. Iteration
/// is row-major over this order, so output never depends on config map
/// ordering.
pub const KNOB_ORDER: [&str; 7] = ["n", "alpha", "a", "b", "c", "d", "eps"];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ExperimentKind {
    NullCalibration,
    PowerGrid,
    PhaseCurve,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OutputFormat {
    Csv,
    Json,
}

/// Scenario reference: a named preset or explicit model parameters.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ScenarioConfig {
    Preset(Preset),
    Explicit { params: MmsbmParams },
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub kind: ExperimentKind,
    pub scenario: ScenarioConfig,
    /// Grid of knob sweeps, keyed by knob name.
    #[serde(default)]
    pub grid: std::collections::BTreeMap<String, Vec<f64>>,
    pub replications: usize,
    #[serde(default = "default_level")]
    pub level: f64,
    #[serde(default)]
    pub seed: u64,
    /// Statistics to evaluate; defaults depend on the experiment kind.
    #[serde(default)]
    pub statistics: Vec<StatisticName>,
    /// Redraw random memberships for every replication (default) or fix
    /// one draw per cell.
    #[serde(default = "default_true")]
    pub resample_memberships: bool,
    /// Record wall time per cell in the `seconds` column. Off by default
    /// so output bytes are a pure function of (config, seed).
    #[serde(default)]
    pub timing: bool,
    #[serde(default)]
    pub output: Option<String>,
    #[serde(default)]
    pub format: Option<OutputFormat>,
}

fn default_level() -> f64 {
    0.05
}

fn default_true() -> bool {
    true
}

impl ExperimentConfig {
    pub fn from_toml_str(s: &str) -> Result<Self> {
        let config: ExperimentConfig =
            toml::from_str(s).map_err(|e| Error::Config(format!("bad experiment config: {e}")))?;
        config.validate()?;
        Ok(config)
    }

    pub fn validate(&self) -> Result<()> {
        if self.replications < 1 {
            return Err(Error::Config("replications must be >= 1".into()));
        }
        if !(self.level > 0.0 && self.level < 1.0) {
            return Err(Error::Config(format!(
                "level must lie strictly in (0, 1), got {}",
                self.level
            )));
        }
        if self.grid.is_empty() {
            return Err(Error::Config("grid must name at least one knob".into()));
        }
        for (name, values) in &self.grid {
            if values.is_empty() {
                return Err(Error::Config(format!("grid knob {name:?} has no values")));
            }
            if !KNOB_ORDER.contains(&name.as_str()) {
                return Err(Error::Config(format!(
                    "unknown grid knob {name:?}; knobs are {KNOB_ORDER:?}"
                )));
            }
        }
        for s in &self.statistics {
            if !matches!(s, StatisticName::Chi2 | StatisticName::Osq | StatisticName::Pe) {
                return Err(Error::Config(format!(
                    "experiment statistics must be chi2/osq/pe, got {s}"
                )));
            }
        }

        match &self.scenario {
            ScenarioConfig::Preset(preset) => {
                for name in self.grid.keys() {
                    if !preset.allowed_knobs().contains(&name.as_str()) {
                        return Err(Error::Config(format!(
                            "grid knob {name:?} unknown to scenario {}; it accepts {:?}",
                            preset.name(),
                            preset.allowed_knobs()
                        )));
                    }
                }
                match self.kind {
                    ExperimentKind::NullCalibration if !preset.is_null() => {
                        return Err(Error::Config(
                            "null calibration needs the null (K = 1) scenario".into(),
                        ));
                    }
                    ExperimentKind::PowerGrid | ExperimentKind::PhaseCurve
                        if preset.is_null() =>
                    {
                        return Err(Error::Config(
                            "power experiments need an alternative scenario".into(),
                        ));
                    }
                    _ => {}
                }
            }
            ScenarioConfig::Explicit { params } => {
                params.validate().map_err(|e| Error::Config(e.to_string()))?;
                for name in self.grid.keys() {
                    if name != "n" {
                        return Err(Error::Config(format!(
                            "explicit scenarios only accept the n knob, got {name:?}"
                        )));
                    }
                    if matches!(params.membership, MembershipSpec::Fixed { .. }) {
                        return Err(Error::Config(
                            "cannot sweep n with a fixed membership matrix".into(),
                        ));
                    }
                }
                match self.kind {
                    ExperimentKind::NullCalibration if params.k != 1 => {
                        return Err(Error::Config(
                            "null calibration needs the null (K = 1) scenario".into(),
                        ));
                    }
                    ExperimentKind::PowerGrid | ExperimentKind::PhaseCurve if params.k == 1 => {
                        return Err(Error::Config(
                            "power experiments need an alternative scenario".into(),
                        ));
                    }
                    _ => {}
                }
            }
        }

        if self.kind == ExperimentKind::PhaseCurve {
            let swept = self.grid.values().filter(|v| v.len() > 1).count();
            if swept > 1 || self.grid.len() > 2 {
                return Err(Error::Config(
                    "phase curves sweep a single knob (other grid entries must be single values)"
                        .into(),
                ));
            }
        }
        Ok(())
    }

    /// Statistics to run, after defaults: PE alone for calibration and
    /// phase curves, all three for power grids.
    pub fn effective_statistics(&self) -> Vec<StatisticName> {
        if !self.statistics.is_empty() {
            return self.statistics.clone();
        }
        match self.kind {
            ExperimentKind::NullCalibration | ExperimentKind::PhaseCurve => {
                vec![StatisticName::Pe]
            }
            ExperimentKind::PowerGrid => {
                vec![StatisticName::Chi2, StatisticName::Osq, StatisticName::Pe]
            }
        }
    }

    /// Grid keys in canonical order.
    pub fn ordered_keys(&self) -> Vec<String> {
        KNOB_ORDER
            .iter()
            .filter(|k| self.grid.contains_key(**k))
            .map(|k| k.to_string())
            .collect()
    }

    /// Cartesian product of grid values, row-major over the canonical
    /// key order.
    pub fn cells(&self) -> Vec<Vec<(String, f64)>> {
        let keys = self.ordered_keys();
        let mut cells: Vec<Vec<(String, f64)>> = vec![Vec::new()];
        for key in &keys {
            let values = &self.grid[key];
            let mut next = Vec::with_capacity(cells.len() * values.len());
            for cell in &cells {
                for &v in values {
                    let mut c = cell.clone();
                    c.push((key.clone(), v));
                    next.push(c);
                }
            }
            cells = next;
        }
        cells
    }
}

/// Per-statistic summary of one grid cell.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct StatSummary {
    pub statistic: StatisticName,
    /// Fraction of replications rejected at the configured level.
    pub power: f64,
    pub mean_norm: f64,
    pub sd_norm: f64,
}

/// One grid cell of an experiment.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CellResult {
    pub cell: Vec<(String, f64)>,
    pub stats: Vec<StatSummary>,
    pub replications: usize,
    pub delta_n: f64,
    pub tau_n: f64,
    pub beta_n: f64,
    pub seconds: f64,
}

fn scenario_for_cell(config: &ExperimentConfig, cell: &[(String, f64)]) -> Result<Scenario> {
    match &config.scenario {
        ScenarioConfig::Preset(preset) => {
            let mut knobs = PresetKnobs::default();
            for (name, value) in cell {
                knobs.set(name, *value)?;
            }
            build_scenario(*preset, &knobs)
        }
        ScenarioConfig::Explicit { params } => {
            let mut params = params.clone();
            for (name, value) in cell {
                if name == "n" {
                    params.n = *value as usize;
                }
            }
            params.validate()?;
            Ok(Scenario {
                preset: Preset::Null, // unused marker for explicit scenarios
                params,
                random_offdiag: None,
            })
        }
    }
}

fn run_one_replication(
    scenario: &Scenario,
    statistics: &[StatisticName],
    level: f64,
    seed: u64,
) -> Result<Vec<(f64, bool)>> {
    let mut scen_rng = rng::keyed_stream(seed, 0x5343_454e); // "SCEN"
    let params = scenario.replication_params(&mut scen_rng)?;
    let a = generate_network(&params, seed)?;

    let needs_pe = statistics.contains(&StatisticName::Pe);
    let reports: Vec<TestReport> = if needs_pe {
        stats::all_statistics(&a, level)?.into()
    } else {
        let mut out = Vec::new();
        for s in statistics {
            out.push(match s {
                StatisticName::Chi2 => stats::chi2_statistic(&a, level)?,
                StatisticName::Osq => stats::osq_statistic(&a, level)?,
                _ => unreachable!("validated statistics"),
            });
        }
        out
    };
    Ok(statistics
        .iter()
        .map(|s| {
            let r = reports
                .iter()
                .find(|r| r.statistic_name == *s)
                .expect("requested statistic computed");
            (r.normalized, r.reject)
        })
        .collect())
}

/// Run every cell of the experiment. Replications run in parallel; the
/// rayon pool in scope bounds the workers, and results are reduced in
/// replication order so output is schedule-independent.
pub fn run_experiment(config: &ExperimentConfig, progress: bool) -> Result<Vec<CellResult>> {
    config.validate()?;
    let statistics = config.effective_statistics();
    let cells = config.cells();
    let mut results = Vec::with_capacity(cells.len());

    for (cell_index, cell) in cells.iter().enumerate() {
        let start = Instant::now();
        let scenario = scenario_for_cell(config, cell)?;
        let theory: TheoryReport = theory_report_for_params(&scenario.params)?;

        // Fixed-membership mode: one membership draw per cell, shared by
        // every replication.
        let scenario = if !config.resample_memberships
            && !matches!(scenario.params.membership, MembershipSpec::Fixed { .. })
        {
            let cell_seed = rng::derive_seed(config.seed, cell_index as u64, u64::MAX);
            let pi = sample_memberships(&scenario.params, cell_seed)?;
            let mut params = scenario.params.clone();
            params.membership = MembershipSpec::Fixed { pi };
            Scenario { params, ..scenario }
        } else {
            scenario
        };

        let outcomes: Result<Vec<Vec<(f64, bool)>>> = (0..config.replications)
            .into_par_iter()
            .map(|rep| {
                let seed = rng::derive_seed(config.seed, cell_index as u64, rep as u64);
                run_one_replication(&scenario, &statistics, config.level, seed)
            })
            .collect();
        let outcomes = outcomes?;

        let mut stat_rows = Vec::with_capacity(statistics.len());
        for (si, statistic) in statistics.iter().enumerate() {
            let values: Vec<f64> = outcomes.iter().map(|o| o[si].0).collect();
            let rejects = outcomes.iter().filter(|o| o[si].1).count();
            let nreps = values.len() as f64;
            let mean = values.iter().sum::<f64>() / nreps;
            let sd = if values.len() > 1 {
                (values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (nreps - 1.0))
                    .sqrt()
            } else {
                0.0
            };
            stat_rows.push(StatSummary {
                statistic: *statistic,
                power: rejects as f64 / nreps,
                mean_norm: mean,
                sd_norm: sd,
            });
        }

        let seconds = if config.timing {
            start.elapsed().as_secs_f64()
        } else {
            0.0
        };
        if progress {
            eprintln!(
                "cell {}/{} {:?}: {} reps in {:.2}s",
                cell_index + 1,
                cells.len(),
                cell,
                config.replications,
                start.elapsed().as_secs_f64()
            );
        }
        results.push(CellResult {
            cell: cell.clone(),
            stats: stat_rows,
            replications: config.replications,
            delta_n: theory.delta_n,
            tau_n: theory.tau_n,
            beta_n: theory.beta_n,
            seconds,
        });
    }
    Ok(results)
}

fn run_kind(
    config: &ExperimentConfig,
    kind: ExperimentKind,
    what: &str,
    progress: bool,
) -> Result<Vec<CellResult>> {
    if config.kind != kind {
        return Err(Error::Config(format!(
            "{what} needs an experiment config with kind {kind:?}, got {:?}",
            config.kind
        )));
    }
    run_experiment(config, progress)
}

/// Type-I-error table on the flat (K = 1) model over a (n, alpha) grid.
pub fn run_null_calibration(config: &ExperimentConfig, progress: bool) -> Result<Vec<CellResult>> {
    run_kind(config, ExperimentKind::NullCalibration, "null calibration", progress)
}

/// Empirical power of the requested statistics over a scenario grid.
pub fn run_power_grid(config: &ExperimentConfig, progress: bool) -> Result<Vec<CellResult>> {
    run_kind(config, ExperimentKind::PowerGrid, "power grid", progress)
}

/// Power along a single swept knob, with the theory columns populated so
/// power can be plotted against beta_n directly.
pub fn run_phase_curve(config: &ExperimentConfig, progress: bool) -> Result<Vec<CellResult>> {
    run_kind(config, ExperimentKind::PhaseCurve, "phase curve", progress)
}

/// Format a float with 10 significant digits.
pub fn format_sig10(x: f64) -> String {
    format!("{x:.9e}")
}

/// CSV with one row per (cell, statistic). Knob values print in their
/// shortest round-trip form; measured values with 10 significant digits.
pub fn results_to_csv(results: &[CellResult]) -> String {
    let mut out = String::new();
    let keys: Vec<&str> = results
        .first()
        .map(|r| r.cell.iter().map(|(k, _)| k.as_str()).collect())
        .unwrap_or_default();
    for k in &keys {
        let _ = write!(out, "{k},");
    }
    out.push_str("statistic,power,mean_norm,sd_norm,reps,delta_n,tau_n,beta_n,seconds\n");
    for r in results {
        for s in &r.stats {
            for (_, v) in &r.cell {
                let _ = write!(out, "{v},");
            }
            let _ = writeln!(
                out,
                "{},{},{},{},{},{},{},{},{}",
                s.statistic,
                format_sig10(s.power),
                format_sig10(s.mean_norm),
                format_sig10(s.sd_norm),
                r.replications,
                format_sig10(r.delta_n),
                format_sig10(r.tau_n),
                format_sig10(r.beta_n),
                format_sig10(r.seconds),
            );
        }
    }
    out
}

pub fn results_to_json(results: &[CellResult]) -> Result<String> {
    serde_json::to_string_pretty(results)
        .map_err(|e| Error::Config(format!("serialization failed: {e}")))
}

/// Write experiment output in the configured format to `w`.
pub fn write_results<W: Write>(
    results: &[CellResult],
    format: OutputFormat,
    mut w: W,
) -> Result<()> {
    let body = match format {
        OutputFormat::Csv => results_to_csv(results),
        OutputFormat::Json => {
            let mut s = results_to_json(results)?;
            s.push('\n');
            s
        }
    };
    w.write_all(body.as_bytes())?;
    Ok(())
}

/// Load an edge-list file and run one named test on it.
pub fn test_file(path: &std::path::Path, statistic: StatisticName, level: f64) -> Result<TestReport> {
    let file = std::fs::File::open(path).map_err(|e| {
        Error::Config(format!("cannot open {}: {e}", path.display()))
    })?;
    let a = crate::model::AdjacencyMatrix::read_edgelist(std::io::BufReader::new(file))?;
    match statistic {
        StatisticName::Chi2 => stats::chi2_statistic(&a, level),
        StatisticName::Osq => stats::osq_statistic(&a, level),
        StatisticName::Pe => stats::pe_statistic(&a, level),
        other => Err(Error::InvalidParameter(format!(
            "the test command supports chi2/osq/pe, got {other}"
        ))),
    }
}
