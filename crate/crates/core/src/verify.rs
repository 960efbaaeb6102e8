//! Predicted decay exponents and the experiment runner that compares them
//! with measured ones.

use std::collections::BTreeMap;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;

use serde::{Deserialize, Serialize};

use crate::decay::{estimate_decay_character, ContinuumDatum, DecayCharacter};
use crate::error::{NsvError, Result};
use crate::fit::{classify_drift, decade_slopes, fit_decay_exponent, log_spaced, DecadeSlope, SlopeDrift, MIN_FIT_SAMPLES};
use crate::linear::{linear_norm_series, predicted_linear_exponent, LinearPrediction, NormSeries};
use crate::solver::{
    energy_resolving_schedule, fit_lemma_constant, max_trustworthy_time, run_simulation, scale_to_h1alpha, SolverConfig,
};
use crate::spectral::{Grid, PhysicsParams};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Annotation {
    /// r* = −3/2: the bound gives no algebraic rate at all.
    ArbitrarilySlow,
    /// r* = −1/2: the bound carries an extra ln²(1+t) factor.
    LogarithmicCorrection,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ExponentPrediction {
    pub exponent: f64,
    pub annotation: Option<Annotation>,
}

const NSV_FLOOR: f64 = -1.5;

fn check_nsv_character(r_star: f64) -> Result<()> {
    if r_star.is_nan() || r_star < NSV_FLOOR {
        return Err(NsvError::domain(format!("r* = {r_star} lies below −3/2")));
    }
    Ok(())
}

/// `min(3/2 + r*, 5/2)` for the nonlinear H¹_α decay.
pub fn predicted_nsv_exponent(r_star: f64) -> Result<ExponentPrediction> {
    check_nsv_character(r_star)?;
    let annotation = if r_star == NSV_FLOOR {
        Some(Annotation::ArbitrarilySlow)
    } else if r_star == -0.5 {
        Some(Annotation::LogarithmicCorrection)
    } else {
        None
    };
    Ok(ExponentPrediction { exponent: (1.5 + r_star).min(2.5), annotation })
}

/// `min(9/4 + 3r*/2, 13/4 + r*/2, 11/2)` for the difference `u − ū`.
pub fn predicted_difference_exponent(r_star: f64) -> Result<ExponentPrediction> {
    check_nsv_character(r_star)?;
    let exponent = (2.25 + 1.5 * r_star).min(3.25 + 0.5 * r_star).min(5.5);
    let annotation = (r_star == NSV_FLOOR).then_some(Annotation::ArbitrarilySlow);
    Ok(ExponentPrediction { exponent, annotation })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Mode {
    LinearContinuum,
    NsvGrid,
    Difference,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Verdict {
    Consistent,
    UpperBoundSatisfied,
    Inconsistent,
    OutsideHypotheses,
    WindowTooShort,
}

/// How a datum is placed on the periodic grid for nsv/difference cases.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridSetup {
    pub n_points: usize,
    pub box_length: f64,
    pub dt: f64,
    /// Initial ‖u₀‖_{H¹_α}.
    pub amplitude: f64,
    /// Width of the Gaussian envelope applied to the sampled spectrum.
    pub envelope: Option<f64>,
    /// Smallest spacing of the sample schedule.
    pub sample_spacing: f64,
    pub samples_per_decade: usize,
    /// Number of full-field snapshots kept for the lemma diagnostic.
    #[serde(default)]
    pub lemma_snapshots: usize,
}

impl GridSetup {
    pub fn desk_scale() -> Self {
        Self {
            n_points: 64,
            box_length: 128.0 * std::f64::consts::PI,
            dt: 16.0,
            amplitude: 0.1,
            envelope: Some(0.2),
            sample_spacing: 2.0,
            samples_per_decade: 64,
            lemma_snapshots: 8,
        }
    }

    pub fn grid(&self) -> Result<Grid> {
        Grid::new(self.n_points, self.box_length)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerificationCase {
    pub case_id: String,
    pub datum: ContinuumDatum,
    pub params: PhysicsParams,
    pub mode: Mode,
    /// Fit window; defaults depend on the mode.
    pub window: Option<(f64, f64)>,
    pub grid: Option<GridSetup>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Tolerances {
    /// Two-sided tolerance for linear cases.
    pub linear: f64,
    /// Slack below the predicted exponent for nonlinear bounds.
    pub upper_bound_slack: f64,
    /// Required excess of the difference exponent over the solution exponent.
    pub difference_gap: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self { linear: 0.1, upper_bound_slack: 0.15, difference_gap: 0.5 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerificationPlan {
    pub cases: Vec<VerificationCase>,
    #[serde(default)]
    pub tolerances: Tolerances,
}

/// Default fit window of linear continuum cases.
pub const LINEAR_WINDOW: (f64, f64) = (1e2, 1e4);
/// Range over which sentinel cases are classified by slope drift.
pub const SENTINEL_RANGE: (f64, f64) = (1e1, 1e4);

fn nsv_params() -> PhysicsParams {
    PhysicsParams::new(0.1, 0.05, 3).expect("valid")
}

fn linear_case(id: &str, datum: ContinuumDatum) -> VerificationCase {
    VerificationCase { case_id: id.into(), datum, params: nsv_params(), mode: Mode::LinearContinuum, window: None, grid: None }
}

fn grid_case(id: &str, q: f64, mode: Mode, grid: GridSetup, params: PhysicsParams) -> VerificationCase {
    VerificationCase {
        case_id: id.into(),
        datum: ContinuumDatum::power_law(3, q, 1.0).expect("valid"),
        params,
        mode,
        window: None,
        grid: Some(grid),
    }
}

impl VerificationPlan {
    /// Built-in experiment matrix.
    pub fn default_plan() -> Self {
        let mut cases: Vec<VerificationCase> = [-1.0, 0.0, 1.0, 2.0]
            .iter()
            .map(|&q| linear_case(&format!("linear-q{q}"), ContinuumDatum::power_law(3, q, 1.0).expect("valid")))
            .collect();
        cases.push(linear_case("linear-annulus", ContinuumDatum::annulus(3, 0.5, 1.0).expect("valid")));
        cases.push(linear_case("linear-critical-log", ContinuumDatum::critical_log(3, 1.0).expect("valid")));
        let desk = GridSetup::desk_scale();
        cases.push(grid_case("nsv-q0", 0.0, Mode::NsvGrid, desk, nsv_params()));
        cases.push(grid_case("nsv-q2", 2.0, Mode::NsvGrid, desk, nsv_params()));
        cases.push(grid_case("difference-q0", 0.0, Mode::Difference, desk, nsv_params()));
        Self { cases, tolerances: Tolerances::default() }
    }

    /// Small plan for smoke runs: two linear cases and a 16³ nonlinear case.
    pub fn quick_plan() -> Self {
        let params = PhysicsParams::new(0.5, 0.5, 3).expect("valid");
        let grid = GridSetup {
            n_points: 16,
            box_length: 32.0 * std::f64::consts::PI,
            dt: 1.0,
            amplitude: 0.1,
            envelope: Some(0.25),
            sample_spacing: 0.5,
            samples_per_decade: 32,
            lemma_snapshots: 2,
        };
        Self {
            cases: vec![
                linear_case("linear-q0", ContinuumDatum::power_law(3, 0.0, 1.0).expect("valid")),
                linear_case("linear-annulus", ContinuumDatum::annulus(3, 0.5, 1.0).expect("valid")),
                grid_case("nsv-q0-small", 0.0, Mode::NsvGrid, grid, params),
            ],
            tolerances: Tolerances::default(),
        }
    }

    pub fn by_name(name: &str) -> Result<Self> {
        match name {
            "default" => Ok(Self::default_plan()),
            "quick" => Ok(Self::quick_plan()),
            other => Err(NsvError::validation(format!("unknown built-in plan '{other}' (expected default or quick)"))),
        }
    }

    pub fn validate(&self) -> Result<()> {
        let mut ids = std::collections::BTreeSet::new();
        for case in &self.cases {
            if !ids.insert(case.case_id.as_str()) {
                return Err(NsvError::validation(format!("duplicate case id '{}'", case.case_id)));
            }
            case.datum.validated()?;
            if let Some((a, b)) = case.window {
                if !(a > 0.0 && b > a) {
                    return Err(NsvError::validation(format!("case '{}': invalid window ({a}, {b})", case.case_id)));
                }
            }
            if case.mode != Mode::LinearContinuum {
                let g = case
                    .grid
                    .ok_or_else(|| NsvError::validation(format!("case '{}': grid setup required", case.case_id)))?;
                g.grid()?;
                if case.datum.n != Grid::DIM {
                    return Err(NsvError::validation(format!("case '{}': grid cases need n = 3", case.case_id)));
                }
            }
        }
        Ok(())
    }
}

/// Predicted exponent, or the sentinel behaviour for limiting characters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Predicted {
    Exponent(f64),
    Sentinel(LinearPrediction),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CaseReport {
    pub case_id: String,
    pub mode: Mode,
    pub r_star: DecayCharacter,
    /// Estimate from the datum's low-frequency integrals.
    pub r_star_estimated: DecayCharacter,
    pub predicted: Predicted,
    pub measured: Option<f64>,
    pub residual: Option<f64>,
    pub verdict: Verdict,
    pub window: Option<(f64, f64)>,
    /// Cap on the fit window from the periodic box; none for continuum cases.
    pub trustworthy_time: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub reference_measured: Option<f64>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub decade_slopes: Vec<DecadeSlope>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub slope_drift: Option<SlopeDrift>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub energy_balance_max: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub lemma_constant: Option<f64>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub notes: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerificationReport {
    pub cases: Vec<CaseReport>,
    pub tolerances: Tolerances,
}

impl VerificationReport {
    pub fn any_inconsistent(&self) -> bool {
        self.cases.iter().any(|c| c.verdict == Verdict::Inconsistent)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }
}

/// Measured series of one grid run, shared by the cases that use it.
#[derive(Debug, Clone)]
struct GridRun {
    series: NormSeries,
    difference: Option<NormSeries>,
    balance_max: f64,
    lemma_constant: Option<f64>,
    trustworthy: f64,
    warnings: Vec<String>,
}

fn run_key(case: &VerificationCase) -> String {
    serde_json::to_string(&(&case.datum, &case.params, &case.grid)).expect("serialisable")
}

/// Requested window, capped at the box ceiling for grid cases.
fn case_window(case: &VerificationCase, trustworthy: f64) -> ((f64, f64), bool) {
    let default = match case.mode {
        Mode::LinearContinuum => LINEAR_WINDOW,
        Mode::NsvGrid => (trustworthy / 16.0, trustworthy),
        // w starts at zero; its growth phase has to be left behind first
        Mode::Difference => (trustworthy / 4.0, trustworthy),
    };
    let w = case.window.unwrap_or(default);
    if case.mode == Mode::LinearContinuum || w.1 <= trustworthy {
        (w, false)
    } else {
        ((w.0, trustworthy), true)
    }
}

fn execute_grid_run(case: &VerificationCase, need_difference: bool, t_end: f64) -> Result<GridRun> {
    let setup = case.grid.expect("validated");
    let grid = setup.grid()?;
    let trustworthy = max_trustworthy_time(&grid);
    let field = case.datum.sample_on_grid_with_envelope(&grid, setup.envelope)?;
    let field = scale_to_h1alpha(&field, &case.params, setup.amplitude)?;
    let sample_times = energy_resolving_schedule(t_end, setup.sample_spacing, setup.samples_per_decade);
    let snapshot_times = if setup.lemma_snapshots > 0 {
        let mut s = log_spaced(t_end / 16.0, t_end, 16);
        let stride = (s.len() / setup.lemma_snapshots).max(1);
        s = s.into_iter().rev().step_by(stride).take(setup.lemma_snapshots).collect();
        s.reverse();
        s
    } else {
        Vec::new()
    };
    let config = SolverConfig {
        grid,
        params: case.params,
        dt: setup.dt,
        t_end,
        sample_times,
        snapshot_times,
        nonlinearity: true,
        cfl_safety: 0.5,
        linear_companion: need_difference,
    };
    let traj = run_simulation(&config, &field)?;
    let lemma_constant = if traj.snapshots.is_empty() { None } else { Some(fit_lemma_constant(&traj)?) };
    Ok(GridRun {
        balance_max: traj.balance_residual.iter().fold(0.0f64, |m, r| m.max(r.abs())),
        series: traj.series,
        difference: traj.difference,
        lemma_constant,
        trustworthy,
        warnings: traj.warnings,
    })
}

fn linear_report(case: &VerificationCase, tol: &Tolerances, base: CaseReport) -> Result<CaseReport> {
    let mut report = base;
    let prediction = predicted_linear_exponent(case.datum.analytic_r_star(), case.datum.n)?;
    report.predicted = match prediction {
        LinearPrediction::Algebraic(p) => Predicted::Exponent(p),
        other => Predicted::Sentinel(other),
    };
    match prediction {
        LinearPrediction::Algebraic(p) => {
            let (window, _) = case_window(case, f64::INFINITY);
            let times = log_spaced(window.0, window.1, 16);
            let series = linear_norm_series(&case.datum, &times, &case.params)?;
            let fit = fit_decay_exponent(&series.times, &series.h1alpha_sq, window)?;
            report.measured = Some(fit.exponent);
            report.residual = Some(fit.residual);
            report.window = Some(fit.window);
            report.verdict = if (fit.exponent - p).abs() <= tol.linear { Verdict::Consistent } else { Verdict::Inconsistent };
        }
        sentinel => {
            let range = case.window.unwrap_or(SENTINEL_RANGE);
            let times = log_spaced(range.0, range.1, 16);
            let series = linear_norm_series(&case.datum, &times, &case.params)?;
            let slopes = decade_slopes(&series.times, &series.h1alpha_sq, range.0, range.1)?;
            let drift = classify_drift(&slopes);
            let expected = match sentinel {
                LinearPrediction::FasterThanAlgebraic => SlopeDrift::SuperAlgebraic,
                _ => SlopeDrift::SubAlgebraic,
            };
            report.measured = slopes.last().map(|s| s.slope);
            report.window = Some(range);
            report.verdict = if drift == expected { Verdict::Consistent } else { Verdict::Inconsistent };
            report.decade_slopes = slopes;
            report.slope_drift = Some(drift);
        }
    }
    Ok(report)
}

fn grid_report(case: &VerificationCase, tol: &Tolerances, run: &GridRun, base: CaseReport) -> Result<CaseReport> {
    let mut report = base;
    let r = case.datum.analytic_r_star().value(case.datum.n, 0.0);
    let prediction = match case.mode {
        Mode::Difference => predicted_difference_exponent(r)?,
        _ => predicted_nsv_exponent(r)?,
    };
    report.predicted = Predicted::Exponent(prediction.exponent);
    match prediction.annotation {
        Some(Annotation::LogarithmicCorrection) => {
            report.notes.push("r* = -1/2: bound carries a ln^2(1+t) correction; fitted exponent may read low".into())
        }
        Some(Annotation::ArbitrarilySlow) => report.notes.push("r* = -3/2: no algebraic rate is predicted".into()),
        None => {}
    }
    report.trustworthy_time = Some(run.trustworthy);
    report.energy_balance_max = Some(run.balance_max);
    report.lemma_constant = run.lemma_constant;
    report.notes.extend(run.warnings.iter().cloned());

    let (window, capped) = case_window(case, run.trustworthy);
    if capped {
        report.notes.push(format!("fit window capped at trustworthy time {}", run.trustworthy));
    }
    report.window = Some(window);
    let (series, reference) = match case.mode {
        Mode::Difference => {
            let diff = run
                .difference
                .as_ref()
                .ok_or_else(|| NsvError::structural(format!("case '{}': no matched linear run", case.case_id)))?;
            (diff, Some(&run.series))
        }
        _ => (&run.series, None),
    };
    let in_window = series.times.iter().filter(|&&t| t >= window.0 && t <= window.1).count();
    if window.1 <= window.0 || in_window < MIN_FIT_SAMPLES {
        report.verdict = Verdict::WindowTooShort;
        return Ok(report);
    }
    let fit = fit_decay_exponent(&series.times, &series.h1alpha_sq, window)?;
    report.measured = Some(fit.exponent);
    report.residual = Some(fit.residual);
    report.window = Some(fit.window);

    let pass = match reference {
        Some(u) => {
            let fu = fit_decay_exponent(&u.times, &u.h1alpha_sq, window)?;
            report.reference_measured = Some(fu.exponent);
            report.notes.push(format!(
                "absolute comparison (informational): measured {:.3} vs predicted {:.3}",
                fit.exponent, prediction.exponent
            ));
            fit.exponent >= fu.exponent + tol.difference_gap
        }
        None => fit.exponent >= prediction.exponent - tol.upper_bound_slack,
    };
    report.verdict = if !case.params.within_theorem_hypotheses() {
        Verdict::OutsideHypotheses
    } else if pass {
        Verdict::UpperBoundSatisfied
    } else if capped {
        Verdict::WindowTooShort
    } else {
        Verdict::Inconsistent
    };
    Ok(report)
}

fn blank_report(case: &VerificationCase) -> Result<CaseReport> {
    let estimate = estimate_decay_character(&case.datum, 0.0)?;
    Ok(CaseReport {
        case_id: case.case_id.clone(),
        mode: case.mode,
        r_star: case.datum.analytic_r_star(),
        r_star_estimated: estimate.r_star,
        predicted: Predicted::Exponent(f64::NAN),
        measured: None,
        residual: None,
        verdict: Verdict::WindowTooShort,
        window: None,
        trustworthy_time: None,
        reference_measured: None,
        decade_slopes: Vec::new(),
        slope_drift: None,
        energy_balance_max: None,
        lemma_constant: None,
        notes: Vec::new(),
    })
}

/// Runs `count` independent jobs on at most `workers` threads, returning
/// results in job order.
fn run_pool<T: Send>(count: usize, workers: usize, job: impl Fn(usize) -> T + Sync) -> Vec<T> {
    let next = AtomicUsize::new(0);
    let slots: Mutex<Vec<Option<T>>> = Mutex::new((0..count).map(|_| None).collect());
    std::thread::scope(|scope| {
        for _ in 0..workers.clamp(1, count.max(1)) {
            scope.spawn(|| loop {
                let i = next.fetch_add(1, Ordering::SeqCst);
                if i >= count {
                    break;
                }
                let out = job(i);
                slots.lock().expect("no poisoned workers")[i] = Some(out);
            });
        }
    });
    slots.into_inner().expect("no poisoned workers").into_iter().map(|s| s.expect("every job ran")).collect()
}

/// Executes every case of `plan` with up to `jobs` worker threads. Grid runs
/// shared between cases (same datum, physics and grid) are performed once.
pub fn run_verification(plan: &VerificationPlan, jobs: usize) -> Result<VerificationReport> {
    plan.validate()?;

    // distinct grid runs, each long enough for every case that uses it
    let mut runs: BTreeMap<String, (usize, bool, f64)> = BTreeMap::new();
    for (i, case) in plan.cases.iter().enumerate() {
        if case.mode == Mode::LinearContinuum {
            continue;
        }
        let trustworthy = max_trustworthy_time(&case.grid.expect("validated").grid()?);
        let (window, _) = case_window(case, trustworthy);
        let entry = runs.entry(run_key(case)).or_insert((i, false, 0.0));
        entry.1 |= case.mode == Mode::Difference;
        entry.2 = entry.2.max(window.1);
    }
    let run_list: Vec<(String, usize, bool, f64)> = runs.into_iter().map(|(k, (i, d, t))| (k, i, d, t)).collect();

    // grid runs first (they dominate the cost), then the linear cases
    let linear: Vec<usize> = (0..plan.cases.len()).filter(|&i| plan.cases[i].mode == Mode::LinearContinuum).collect();
    enum Out {
        Run(Result<GridRun>),
        Case(Result<CaseReport>),
    }
    let outputs = run_pool(run_list.len() + linear.len(), jobs, |j| {
        if j < run_list.len() {
            let (_, case_idx, diff, t_end) = &run_list[j];
            log::info!("grid run for case '{}' to t = {t_end}", plan.cases[*case_idx].case_id);
            Out::Run(execute_grid_run(&plan.cases[*case_idx], *diff, *t_end))
        } else {
            let case = &plan.cases[linear[j - run_list.len()]];
            log::info!("linear case '{}'", case.case_id);
            Out::Case(blank_report(case).and_then(|b| linear_report(case, &plan.tolerances, b)))
        }
    });

    let mut grid_runs: BTreeMap<String, GridRun> = BTreeMap::new();
    let mut linear_reports: BTreeMap<usize, CaseReport> = BTreeMap::new();
    for (j, out) in outputs.into_iter().enumerate() {
        match out {
            Out::Run(r) => {
                grid_runs.insert(run_list[j].0.clone(), r?);
            }
            Out::Case(r) => {
                linear_reports.insert(linear[j - run_list.len()], r?);
            }
        }
    }

    let mut cases = Vec::with_capacity(plan.cases.len());
    for (i, case) in plan.cases.iter().enumerate() {
        let report = match case.mode {
            Mode::LinearContinuum => linear_reports.remove(&i).expect("computed"),
            _ => grid_report(case, &plan.tolerances, &grid_runs[&run_key(case)], blank_report(case)?)?,
        };
        log::info!("case '{}': {:?}", report.case_id, report.verdict);
        cases.push(report);
    }
    Ok(VerificationReport { cases, tolerances: plan.tolerances })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn nsv_prediction_examples() {
        assert_eq!(predicted_nsv_exponent(0.0).unwrap().exponent, 1.5);
        assert_eq!(predicted_nsv_exponent(2.0).unwrap().exponent, 2.5);
        let slow = predicted_nsv_exponent(-1.5).unwrap();
        assert_eq!(slow.exponent, 0.0);
        assert_eq!(slow.annotation, Some(Annotation::ArbitrarilySlow));
        assert_eq!(predicted_nsv_exponent(-0.5).unwrap().annotation, Some(Annotation::LogarithmicCorrection));
        assert!(predicted_nsv_exponent(-1.6).is_err());
        assert_eq!(predicted_nsv_exponent(f64::INFINITY).unwrap().exponent, 2.5);
    }

    #[test]
    fn difference_prediction_examples() {
        assert_eq!(predicted_difference_exponent(0.0).unwrap().exponent, 2.25);
        assert_eq!(predicted_difference_exponent(3.0).unwrap().exponent, 4.75);
        assert_eq!(predicted_difference_exponent(5.0).unwrap().exponent, 5.5);
        assert_eq!(predicted_difference_exponent(-1.5).unwrap().exponent, 0.0);
        assert!(predicted_difference_exponent(-2.0).is_err());
    }

    #[test]
    fn saturation_points_are_exact() {
        assert_eq!(predicted_nsv_exponent(1.0).unwrap().exponent, 2.5);
        assert!(predicted_nsv_exponent(1.0 - 1e-9).unwrap().exponent < 2.5);
        assert_eq!(predicted_difference_exponent(4.5).unwrap().exponent, 5.5);
        assert!(predicted_difference_exponent(4.5 - 1e-9).unwrap().exponent < 5.5);
    }

    #[test]
    fn window_is_capped_for_grid_cases() {
        let mut case = VerificationPlan::default_plan().cases.into_iter().find(|c| c.mode == Mode::NsvGrid).unwrap();
        case.window = Some((100.0, 1e5));
        let (w, capped) = case_window(&case, 4096.0);
        assert!(capped);
        assert_eq!(w, (100.0, 4096.0));
    }

    #[test]
    fn plan_validation_catches_duplicates_and_missing_grid() {
        let mut plan = VerificationPlan::quick_plan();
        plan.cases.push(plan.cases[0].clone());
        assert!(plan.validate().is_err());
        let mut plan = VerificationPlan::quick_plan();
        plan.cases[2].grid = None;
        assert!(plan.validate().is_err());
        assert!(VerificationPlan::by_name("nope").is_err());
    }

    #[test]
    fn pool_preserves_order() {
        let out = run_pool(20, 3, |i| i * i);
        assert_eq!(out, (0..20).map(|i| i * i).collect::<Vec<_>>());
    }
}
