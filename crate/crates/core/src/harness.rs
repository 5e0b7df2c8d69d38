//! Monte Carlo trials, risk and recovery-rate estimates, region labels for
//! the `(gamma, delta)` plane and phase-diagram sweeps.
//!
//! Trial `t` of arm `a` in cell `c` always uses
//! `seed::trial_seed(base_seed, c, a, t)`, and results are merged in trial
//! order, so output does not depend on the number of workers.

use std::io::Write;
use std::time::Instant;

use serde::Serialize;

use crate::detector::{derive_params, detect_with, DetectionParams, Statistic, SubsetMode};
use crate::error::{Error, Result};
use crate::fmt::{serialize_sig6, sig6};
use crate::oracle::{sample_instance, EdgeOracle, EdgeQuery, Hypothesis};
use crate::recoverer::{recover, verify_estimate};
use crate::seed::{trial_seed, ARM_NULL, ARM_PLANTED};

/// Two-sided 95% normal quantile.
pub const Z95: f64 = 1.959_963_984_540_054;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    Detection,
    Recovery,
}

impl Mode {
    pub fn as_str(self) -> &'static str {
        match self {
            Mode::Detection => "detection",
            Mode::Recovery => "recovery",
        }
    }
}

impl std::str::FromStr for Mode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "detection" | "detect" => Ok(Mode::Detection),
            "recovery" | "recover" => Ok(Mode::Recovery),
            _ => Err(Error::param(format!("unknown mode '{s}'"))),
        }
    }
}

/// Execution settings shared by all estimators.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RunConfig {
    /// Worker threads; 0 or 1 runs on the calling thread.
    pub workers: usize,
    pub statistic: Statistic,
    pub subset: SubsetMode,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            workers: 1,
            statistic: Statistic::Decision,
            subset: SubsetMode::FirstM,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TrialRecord {
    pub trial_id: u64,
    pub cell: u64,
    pub mode: Mode,
    pub hypothesis: Hypothesis,
    pub n: u32,
    pub k: u32,
    #[serde(serialize_with = "serialize_sig6")]
    pub eps0: f64,
    pub seed: u64,
    pub budget: Option<u64>,
    /// Detection decision; `None` in recovery mode.
    pub decision: Option<Hypothesis>,
    /// Clique size found in `S` (a lower bound when the budget ran out).
    pub witness_size: Option<u32>,
    /// Size of the recovered set; `None` in detection mode.
    pub estimate_size: Option<usize>,
    pub budget_exhausted: bool,
    pub success: bool,
    pub queries_charged: u64,
    #[serde(serialize_with = "serialize_sig6")]
    pub wall_time_ms: f64,
}

/// Wilson score interval `(low, high)` for `successes` out of `trials`.
pub fn wilson_interval(successes: u64, trials: u64, z: f64) -> (f64, f64) {
    if trials == 0 {
        return (0.0, 1.0);
    }
    let n = trials as f64;
    let p = successes as f64 / n;
    let z2 = z * z;
    let denom = 1.0 + z2 / n;
    let center = (p + z2 / (2.0 * n)) / denom;
    let half = z / denom * (p * (1.0 - p) / n + z2 / (4.0 * n * n)).sqrt();
    ((center - half).max(0.0), (center + half).min(1.0))
}

fn wilson_halfwidth(successes: u64, trials: u64) -> f64 {
    let (lo, hi) = wilson_interval(successes, trials, Z95);
    (hi - lo) / 2.0
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RiskEstimate {
    pub type1: f64,
    pub type2: f64,
    pub risk: f64,
    pub trials_per_arm: u64,
    /// Sum of the 95% Wilson half-widths of the two error rates.
    pub wilson_ci_halfwidth: f64,
    pub type1_ci: (f64, f64),
    pub type2_ci: (f64, f64),
}

impl RiskEstimate {
    fn from_records(records: &[TrialRecord], trials: u64) -> Self {
        let errors = |h| {
            records
                .iter()
                .filter(|r| r.hypothesis == h && !r.success)
                .count() as u64
        };
        let (e1, e2) = (errors(Hypothesis::Null), errors(Hypothesis::Planted));
        let t = trials.max(1) as f64;
        let (type1, type2) = (e1 as f64 / t, e2 as f64 / t);
        RiskEstimate {
            type1,
            type2,
            risk: type1 + type2,
            trials_per_arm: trials,
            wilson_ci_halfwidth: wilson_halfwidth(e1, trials) + wilson_halfwidth(e2, trials),
            type1_ci: wilson_interval(e1, trials, Z95),
            type2_ci: wilson_interval(e2, trials, Z95),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RateEstimate {
    pub rate: f64,
    pub trials: u64,
    pub successes: u64,
    pub wilson_ci_halfwidth: f64,
    pub ci: (f64, f64),
}

impl RateEstimate {
    fn from_records(records: &[TrialRecord]) -> Self {
        let trials = records.len() as u64;
        let successes = records.iter().filter(|r| r.success).count() as u64;
        RateEstimate {
            rate: successes as f64 / trials.max(1) as f64,
            trials,
            successes,
            wilson_ci_halfwidth: wilson_halfwidth(successes, trials),
            ci: wilson_interval(successes, trials, Z95),
        }
    }
}

/// Runs `f(0..count)` on `workers` threads and returns results in index order.
pub fn map_trials<T, F>(workers: usize, count: u64, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(u64) -> T + Sync + Send,
{
    #[cfg(feature = "parallel")]
    if workers > 1 {
        use rayon::prelude::*;
        match rayon::ThreadPoolBuilder::new().num_threads(workers).build() {
            Ok(pool) => return pool.install(|| (0..count).into_par_iter().map(&f).collect()),
            Err(e) => log::warn!("could not start {workers} workers ({e}); running sequentially"),
        }
    }
    #[cfg(not(feature = "parallel"))]
    if workers > 1 {
        log::debug!("built without the parallel feature; ignoring workers = {workers}");
    }
    (0..count).map(f).collect()
}

/// One detection trial against a fresh instance of hypothesis `h`.
#[allow(clippy::too_many_arguments)]
pub fn detection_trial(
    params: &DetectionParams,
    h: Hypothesis,
    budget: Option<u64>,
    statistic: Statistic,
    cell: u64,
    trial_id: u64,
    seed: u64,
) -> Result<TrialRecord> {
    let start = Instant::now();
    let inst = sample_instance(params.n, params.k, h, seed)?;
    let mut oracle = EdgeOracle::new(inst, budget);
    oracle.reserve(params.pair_count().min(budget.unwrap_or(u64::MAX)) as usize);
    let (decision, witness, exhausted) = match detect_with(&mut oracle, params, statistic) {
        Ok(out) => (out.decision, Some(out.witness_size), false),
        Err(e) if e.is_budget_exhausted() => (Hypothesis::Null, None, true),
        Err(e) => return Err(e),
    };
    Ok(TrialRecord {
        trial_id,
        cell,
        mode: Mode::Detection,
        hypothesis: h,
        n: params.n,
        k: params.k,
        eps0: params.eps0,
        seed,
        budget,
        decision: Some(decision),
        witness_size: witness,
        estimate_size: None,
        budget_exhausted: exhausted,
        success: decision == h,
        queries_charged: oracle.queries_used(),
        wall_time_ms: start.elapsed().as_secs_f64() * 1e3,
    })
}

/// One recovery trial against a fresh planted instance.
pub fn recovery_trial(
    params: &DetectionParams,
    budget: Option<u64>,
    cell: u64,
    trial_id: u64,
    seed: u64,
) -> Result<TrialRecord> {
    let start = Instant::now();
    let inst = sample_instance(params.n, params.k, Hypothesis::Planted, seed)?;
    let mut oracle = EdgeOracle::new(inst, budget);
    let (success, estimate, witness, exhausted) = match recover(&mut oracle, params, params.eps0) {
        Ok(out) => {
            let ok = verify_estimate(&out, oracle.instance())?;
            (
                ok,
                Some(out.estimate.len()),
                Some(out.d_set.len() as u32),
                false,
            )
        }
        Err(e) if e.is_budget_exhausted() => (false, None, None, true),
        Err(e) => return Err(e),
    };
    Ok(TrialRecord {
        trial_id,
        cell,
        mode: Mode::Recovery,
        hypothesis: Hypothesis::Planted,
        n: params.n,
        k: params.k,
        eps0: params.eps0,
        seed,
        budget,
        decision: None,
        witness_size: witness,
        estimate_size: estimate,
        budget_exhausted: exhausted,
        success,
        queries_charged: oracle.queries_used(),
        wall_time_ms: start.elapsed().as_secs_f64() * 1e3,
    })
}

/// Detection trials for both arms of one cell: `trials` null trials followed
/// by `trials` planted trials.
pub fn detection_cell(
    params: &DetectionParams,
    trials: u64,
    budget: Option<u64>,
    base_seed: u64,
    cell: u64,
    cfg: &RunConfig,
) -> Result<(RiskEstimate, Vec<TrialRecord>)> {
    let records = map_trials(cfg.workers, 2 * trials, |t| {
        let (h, arm, id) = if t < trials {
            (Hypothesis::Null, ARM_NULL, t)
        } else {
            (Hypothesis::Planted, ARM_PLANTED, t - trials)
        };
        let seed = trial_seed(base_seed, cell, arm, id);
        detection_trial(params, h, budget, cfg.statistic, cell, id, seed)
    })
    .into_iter()
    .collect::<Result<Vec<_>>>()?;
    Ok((RiskEstimate::from_records(&records, trials), records))
}

pub fn recovery_cell(
    params: &DetectionParams,
    trials: u64,
    budget: Option<u64>,
    base_seed: u64,
    cell: u64,
    cfg: &RunConfig,
) -> Result<(RateEstimate, Vec<TrialRecord>)> {
    let records = map_trials(cfg.workers, trials, |t| {
        let seed = trial_seed(base_seed, cell, ARM_PLANTED, t);
        recovery_trial(params, budget, cell, t, seed)
    })
    .into_iter()
    .collect::<Result<Vec<_>>>()?;
    Ok((RateEstimate::from_records(&records), records))
}

/// Empirical detection risk over `trials` null and `trials` planted runs with
/// an unlimited budget.
pub fn estimate_risk(
    n: u32,
    k: u32,
    eps0: f64,
    trials: u64,
    base_seed: u64,
) -> Result<RiskEstimate> {
    estimate_risk_with(n, k, eps0, trials, base_seed, &RunConfig::default()).map(|(r, _)| r)
}

pub fn estimate_risk_with(
    n: u32,
    k: u32,
    eps0: f64,
    trials: u64,
    base_seed: u64,
    cfg: &RunConfig,
) -> Result<(RiskEstimate, Vec<TrialRecord>)> {
    let params = derive_params(n, k, eps0, cfg.subset)?;
    detection_cell(&params, trials, None, base_seed, 0, cfg)
}

/// Fraction of planted trials recovered exactly, unlimited budget.
pub fn estimate_recovery_rate(
    n: u32,
    k: u32,
    eps0: f64,
    trials: u64,
    base_seed: u64,
) -> Result<RateEstimate> {
    estimate_recovery_rate_with(n, k, eps0, trials, base_seed, &RunConfig::default())
        .map(|(r, _)| r)
}

pub fn estimate_recovery_rate_with(
    n: u32,
    k: u32,
    eps0: f64,
    trials: u64,
    base_seed: u64,
    cfg: &RunConfig,
) -> Result<(RateEstimate, Vec<TrialRecord>)> {
    let params = derive_params(n, k, eps0, cfg.subset)?;
    recovery_cell(&params, trials, None, base_seed, 0, cfg)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Region {
    DetectionImpossible,
    DetectOnlyRecoverImpossible,
    RecoveryPossible,
    Boundary,
}

impl std::fmt::Display for Region {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s = match self {
            Region::DetectionImpossible => "DetectionImpossible",
            Region::DetectOnlyRecoverImpossible => "DetectOnlyRecoverImpossible",
            Region::RecoveryPossible => "RecoveryPossible",
            Region::Boundary => "Boundary",
        };
        f.write_str(s)
    }
}

/// Values closer than this to a boundary line count as on it.
const BOUNDARY_TOL: f64 = 1e-12;

/// Region of `k = n^gamma`, `q = n^delta` in the phase diagram. The detection
/// boundary is `delta = 2 - 2 gamma` and the recovery boundary `delta = 1`.
pub fn classify_region(gamma: f64, delta: f64) -> Result<Region> {
    if !(gamma > 0.0 && gamma < 1.0) {
        return Err(Error::param(format!(
            "gamma must lie in (0,1), got {gamma}"
        )));
    }
    if !(delta > 0.0 && delta < 2.0) {
        return Err(Error::param(format!(
            "delta must lie in (0,2), got {delta}"
        )));
    }
    let detect_line = 2.0 - 2.0 * gamma;
    if (delta - detect_line).abs() <= BOUNDARY_TOL {
        return Ok(Region::Boundary);
    }
    if delta < detect_line {
        return Ok(Region::DetectionImpossible);
    }
    if (delta - 1.0).abs() <= BOUNDARY_TOL {
        Ok(Region::Boundary)
    } else if delta < 1.0 {
        Ok(Region::DetectOnlyRecoverImpossible)
    } else {
        Ok(Region::RecoveryPossible)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepGrid {
    pub n: u32,
    pub gammas: Vec<f64>,
    pub deltas: Vec<f64>,
    /// Trials per arm (detection) or per cell (recovery).
    pub trials: u64,
    pub base_seed: u64,
    pub mode: Mode,
    pub eps0: f64,
}

impl SweepGrid {
    pub fn validate(&self) -> Result<()> {
        if self.n < 4 {
            return Err(Error::param("sweeps need n >= 4"));
        }
        if self.trials == 0 {
            return Err(Error::param("sweeps need at least one trial"));
        }
        if self.gammas.is_empty() || self.deltas.is_empty() {
            return Err(Error::param("sweep grid is empty"));
        }
        for &g in &self.gammas {
            if !(g > 0.0 && g < 1.0) {
                return Err(Error::param(format!("gamma must lie in (0,1), got {g}")));
            }
        }
        for &d in &self.deltas {
            if !(d > 0.0 && d < 2.0) {
                return Err(Error::param(format!("delta must lie in (0,2), got {d}")));
            }
        }
        if !(self.eps0.is_finite() && self.eps0 > 0.0) {
            return Err(Error::param(format!(
                "eps0 must be positive, got {}",
                self.eps0
            )));
        }
        Ok(())
    }

    /// `k = round(n^gamma)`, clamped to `[1, n]`.
    pub fn clique_size(&self, gamma: f64) -> u32 {
        (f64::from(self.n).powf(gamma).round() as u32).clamp(1, self.n)
    }

    /// `q = round(n^delta)`.
    pub fn budget(&self, delta: f64) -> u64 {
        f64::from(self.n).powf(delta).round() as u64
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepRow {
    #[serde(serialize_with = "serialize_sig6")]
    pub gamma: f64,
    #[serde(serialize_with = "serialize_sig6")]
    pub delta: f64,
    pub n: u32,
    pub k: u32,
    pub budget: u64,
    pub mode: Mode,
    pub trials: u64,
    /// Risk (detection) or exact recovery rate; NaN when the cell failed.
    #[serde(serialize_with = "serialize_sig6")]
    pub metric: f64,
    #[serde(serialize_with = "serialize_sig6")]
    pub ci: f64,
    pub classification: Region,
    pub error: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepResult {
    pub rows: Vec<SweepRow>,
    #[serde(skip)]
    pub records: Vec<TrialRecord>,
}

/// Runs every cell of `grid`, gamma-major. A cell whose parameters are
/// invalid is reported with a NaN metric and its error message.
pub fn run_sweep(grid: &SweepGrid, cfg: &RunConfig) -> Result<SweepResult> {
    grid.validate()?;
    let mut rows = Vec::new();
    let mut records = Vec::new();
    let mut cell = 0u64;
    for &gamma in &grid.gammas {
        let k = grid.clique_size(gamma);
        for &delta in &grid.deltas {
            let budget = grid.budget(delta);
            let classification = classify_region(gamma, delta)?;
            let outcome =
                derive_params(grid.n, k, grid.eps0, cfg.subset).and_then(|p| match grid.mode {
                    Mode::Detection => {
                        detection_cell(&p, grid.trials, Some(budget), grid.base_seed, cell, cfg)
                            .map(|(r, rec)| (r.risk, r.wilson_ci_halfwidth, rec))
                    }
                    Mode::Recovery => {
                        recovery_cell(&p, grid.trials, Some(budget), grid.base_seed, cell, cfg)
                            .map(|(r, rec)| (r.rate, r.wilson_ci_halfwidth, rec))
                    }
                });
            let (metric, ci, error) = match outcome {
                Ok((metric, ci, rec)) => {
                    records.extend(rec);
                    (metric, ci, None)
                }
                Err(e) => {
                    log::warn!("cell gamma = {gamma}, delta = {delta}: {e}");
                    (f64::NAN, f64::NAN, Some(e.to_string()))
                }
            };
            log::info!(
                "cell {cell}: gamma = {gamma} delta = {delta} k = {k} budget = {budget} metric = {}",
                sig6(metric)
            );
            rows.push(SweepRow {
                gamma,
                delta,
                n: grid.n,
                k,
                budget,
                mode: grid.mode,
                trials: grid.trials,
                metric,
                ci,
                classification,
                error,
            });
            cell += 1;
        }
    }
    Ok(SweepResult { rows, records })
}

pub const CSV_HEADER: &str = "gamma,delta,n,k,budget,mode,trials,metric,ci,classification";

pub fn write_csv<W: Write>(rows: &[SweepRow], mut out: W) -> std::io::Result<()> {
    writeln!(out, "{CSV_HEADER}")?;
    for r in rows {
        writeln!(
            out,
            "{},{},{},{},{},{},{},{},{},{}",
            sig6(r.gamma),
            sig6(r.delta),
            r.n,
            r.k,
            r.budget,
            r.mode.as_str(),
            r.trials,
            sig6(r.metric),
            sig6(r.ci),
            r.classification
        )?;
    }
    Ok(())
}

/// One JSON object per line.
pub fn write_json_lines<W: Write, T: Serialize>(items: &[T], mut out: W) -> std::io::Result<()> {
    for item in items {
        serde_json::to_writer(&mut out, item)?;
        out.write_all(b"\n")?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn regions() {
        use Region::*;
        assert_eq!(
            classify_region(0.75, 0.6).unwrap(),
            DetectOnlyRecoverImpossible
        );
        assert_eq!(classify_region(0.3, 0.5).unwrap(), DetectionImpossible);
        assert_eq!(classify_region(0.6, 1.2).unwrap(), RecoveryPossible);
        assert_eq!(classify_region(0.75, 0.5).unwrap(), Boundary);
        assert_eq!(classify_region(0.75, 1.0).unwrap(), Boundary);
        // below the detection line delta = 1 is not a boundary
        assert_eq!(classify_region(0.25, 1.0).unwrap(), DetectionImpossible);
        assert!(classify_region(1.0, 0.5).is_err());
        assert!(classify_region(0.5, 2.0).is_err());
        assert!(classify_region(f64::NAN, 0.5).is_err());
    }

    #[test]
    fn wilson_reference_values() {
        // 0 of 10: (0, z^2 / (n + z^2))
        let (lo, hi) = wilson_interval(0, 10, Z95);
        assert_eq!(lo, 0.0);
        assert!((hi - Z95 * Z95 / (10.0 + Z95 * Z95)).abs() < 1e-12);
        let (lo, hi) = wilson_interval(50, 100, Z95);
        assert!((lo - 0.403832).abs() < 1e-6);
        assert!((hi - 0.596168).abs() < 1e-6);
        assert_eq!(wilson_interval(0, 0, Z95), (0.0, 1.0));
    }

    #[test]
    fn whole_graph_clique_has_no_type2() {
        let r = estimate_risk(256, 256, 4.0, 10, 5).unwrap();
        assert_eq!(r.type2, 0.0);
        assert_eq!(r.type1, 0.0);
        assert_eq!(r.risk, r.type1 + r.type2);
        let rate = estimate_recovery_rate(256, 256, 4.0, 5, 5).unwrap();
        assert_eq!(rate.rate, 1.0);
    }

    #[test]
    fn sweep_sizes() {
        let grid = SweepGrid {
            n: 1 << 16,
            gammas: vec![0.6, 0.75],
            deltas: vec![0.4, 0.8, 1.2],
            trials: 1,
            base_seed: 0,
            mode: Mode::Detection,
            eps0: 4.0,
        };
        assert_eq!(grid.clique_size(0.75), 4096);
        assert_eq!(grid.clique_size(0.6), 776);
        assert_eq!(grid.budget(0.4), 84);
        assert_eq!(grid.budget(0.8), 7132);
        assert!(grid.validate().is_ok());
        let bad = SweepGrid {
            deltas: vec![2.0],
            ..grid
        };
        assert!(bad.validate().is_err());
    }

    #[test]
    fn starved_cells_decide_null() {
        let p = derive_params(4096, 512, 4.0, SubsetMode::FirstM).unwrap();
        let (r, recs) = detection_cell(&p, 3, Some(100), 1, 0, &RunConfig::default()).unwrap();
        assert_eq!(r.type1, 0.0);
        assert_eq!(r.type2, 1.0);
        assert!(recs
            .iter()
            .all(|t| t.budget_exhausted && t.queries_charged == 100));
    }

    #[test]
    fn workers_do_not_change_results() {
        let p = derive_params(1024, 128, 4.0, SubsetMode::FirstM).unwrap();
        let one = RunConfig::default();
        let four = RunConfig { workers: 4, ..one };
        let strip = |mut v: Vec<TrialRecord>| {
            v.iter_mut().for_each(|r| r.wall_time_ms = 0.0);
            v
        };
        let (a, ra) = detection_cell(&p, 6, None, 9, 2, &one).unwrap();
        let (b, rb) = detection_cell(&p, 6, None, 9, 2, &four).unwrap();
        assert_eq!(a, b);
        assert_eq!(strip(ra), strip(rb));
    }

    #[test]
    fn csv_layout() {
        let row = SweepRow {
            gamma: 0.75,
            delta: 0.4,
            n: 65536,
            k: 4096,
            budget: 84,
            mode: Mode::Detection,
            trials: 200,
            metric: 1.0,
            ci: 0.0095,
            classification: Region::DetectionImpossible,
            error: None,
        };
        let mut out = Vec::new();
        write_csv(&[row], &mut out).unwrap();
        let text = String::from_utf8(out).unwrap();
        assert_eq!(
            text,
            "gamma,delta,n,k,budget,mode,trials,metric,ci,classification\n\
             0.75,0.4,65536,4096,84,detection,200,1,0.0095,DetectionImpossible\n"
        );
    }
}
