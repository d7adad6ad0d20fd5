//! Experiment, sweep, report and quadratic-form commands.

use std::fs;
use std::path::Path;

use kirchhoff_core::integrators::Termination;
use kirchhoff_core::verify::{
    audit_q_identities, check_case_bounds, check_lemma1, check_sandwich_i2, check_sandwich_i3, check_theorem4, drift,
    moment_series, CaseBound, LemmaVerdict, Theorem4Report,
};
use kirchhoff_core::{integrate, InvariantParams, ModeLattice, Params, SpectralMoments, Trajectory, VerifyError};
use rayon::prelude::*;

use crate::config::{Check, ExperimentConfig, SweepConfig};
use crate::error::RunError;
use crate::initial::build_initial;
use crate::output::{fmt_f64, read_timeseries, write_timeseries, CrossingEvent};

pub const TIMESERIES_FILE: &str = "timeseries.csv";
pub const REPORT_FILE: &str = "report.txt";
pub const MANIFEST_FILE: &str = "manifest.json";
pub const SUMMARY_FILE: &str = "summary.csv";

pub const AUDIT_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum VerdictStatus {
    Pass,
    Fail,
    NotApplicable,
    Skipped,
}

impl VerdictStatus {
    pub fn label(self) -> &'static str {
        match self {
            VerdictStatus::Pass => "PASS",
            VerdictStatus::Fail => "FAIL",
            VerdictStatus::NotApplicable => "N/A",
            VerdictStatus::Skipped => "SKIPPED",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Verdict {
    pub check: Check,
    pub status: VerdictStatus,
    pub detail: String,
}

impl Verdict {
    pub fn line(&self) -> String {
        format!("{:<12}{:<8}{}", self.check.name(), self.status.label(), self.detail)
            .trim_end()
            .to_string()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RunStatus {
    Ok,
    Degenerate,
    VerdictFailure,
}

impl RunStatus {
    pub fn exit_code(self) -> u8 {
        match self {
            RunStatus::Ok => 0,
            RunStatus::Degenerate => 3,
            RunStatus::VerdictFailure => 4,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            RunStatus::Ok => "ok",
            RunStatus::Degenerate => "degenerate",
            RunStatus::VerdictFailure => "verdict_failure",
        }
    }
}

/// A completed (possibly truncated) run, before anything touches disk.
#[derive(Debug, Clone)]
pub struct Simulation {
    pub config: ExperimentConfig,
    pub lattice: ModeLattice,
    pub params: Params,
    pub trajectory: Trajectory,
    pub series: Vec<SpectralMoments>,
    pub crossing: Option<CrossingEvent>,
}

pub fn simulate(config: &ExperimentConfig) -> Result<Simulation, RunError> {
    let config = config.clone().resolve()?;
    let lattice = config.lattice.build()?;
    let params = config.params();
    let initial = build_initial(&config.initial, &lattice, &params, config.seed)?;
    let control = config.control.step_control();
    let trajectory = integrate(
        &initial,
        &lattice,
        &params,
        &control,
        config.control.t_end,
        config.control.sample_every,
    )?;
    let series = moment_series(&trajectory, &lattice, &params).map_err(VerifyError::from)?;
    let crossing = match trajectory.termination {
        Termination::QCrossing => trajectory.events.iter().rev().find_map(|e| match e {
            kirchhoff_core::integrators::TrajectoryEvent::QCrossing { t, q } => Some(CrossingEvent { t: *t, q: *q }),
            _ => None,
        }),
        Termination::Completed => None,
    };
    Ok(Simulation {
        config,
        lattice,
        params,
        trajectory,
        series,
        crossing,
    })
}

fn lemma_detail(v: &LemmaVerdict) -> String {
    format!(
        "hypothesis={} conclusion={} gated={}/{} worst_margin={} t_worst={}",
        v.hypothesis,
        v.conclusion,
        v.gated_samples,
        v.samples,
        fmt_f64(v.worst_margin),
        fmt_f64(v.t_worst)
    )
}

fn lemma_verdict(check: Check, v: &LemmaVerdict) -> Verdict {
    let status = if !v.passed() {
        VerdictStatus::Fail
    } else if v.applicable() {
        VerdictStatus::Pass
    } else {
        VerdictStatus::NotApplicable
    };
    Verdict {
        check,
        status,
        detail: lemma_detail(v),
    }
}

fn unsupported(check: Check, e: VerifyError) -> Result<Verdict, VerifyError> {
    match e {
        VerifyError::Unsupported(why) => Ok(Verdict {
            check,
            status: VerdictStatus::NotApplicable,
            detail: why.to_string(),
        }),
        other => Err(other),
    }
}

fn evaluate(
    check: Check,
    series: &[SpectralMoments],
    params: &Params,
    inv: &InvariantParams,
    drift_tol: f64,
) -> Result<Verdict, VerifyError> {
    Ok(match check {
        Check::Drift => {
            let reports = drift(series, params, inv)?;
            let pass = reports.iter().all(|r| r.max_rel <= drift_tol);
            let detail = reports
                .iter()
                .map(|r| format!("{} rel={}", r.name, fmt_f64(r.max_rel)))
                .collect::<Vec<_>>()
                .join("; ");
            Verdict {
                check,
                status: if pass { VerdictStatus::Pass } else { VerdictStatus::Fail },
                detail: format!("tol={} {detail}", fmt_f64(drift_tol)),
            }
        }
        Check::Lemma1 => match check_lemma1(series, params) {
            Ok(v) => lemma_verdict(check, &v),
            Err(e) => return unsupported(check, e),
        },
        Check::Sandwich2 => lemma_verdict(check, &check_sandwich_i2(series, params)?),
        Check::Sandwich3 => lemma_verdict(check, &check_sandwich_i3(series, params)?),
        Check::Theorem4 => {
            let report = check_theorem4(series, params)?;
            match &report {
                Theorem4Report::NotApplicable(why) => Verdict {
                    check,
                    status: VerdictStatus::NotApplicable,
                    detail: why.to_string(),
                },
                Theorem4Report::Checked { q_in_band, entries } => Verdict {
                    check,
                    status: if report.passed() {
                        VerdictStatus::Pass
                    } else {
                        VerdictStatus::Fail
                    },
                    detail: std::iter::once(format!("q_in_band={q_in_band}"))
                        .chain(
                            entries
                                .iter()
                                .map(|e| format!("{} sup={} bound={}", e.name, fmt_f64(e.sup), fmt_f64(e.bound))),
                        )
                        .collect::<Vec<_>>()
                        .join("; "),
                },
            }
        }
        Check::AuditQ => {
            let worst = audit_q_identities(series, params)?;
            Verdict {
                check,
                status: if worst <= AUDIT_TOL {
                    VerdictStatus::Pass
                } else {
                    VerdictStatus::Fail
                },
                detail: format!("max_relerr={} tol={}", fmt_f64(worst), fmt_f64(AUDIT_TOL)),
            }
        }
        Check::CaseBounds => match check_case_bounds(series, params)? {
            None => Verdict {
                check,
                status: VerdictStatus::NotApplicable,
                detail: "requires a != 0 and b > 0".into(),
            },
            Some((case, v)) => {
                let mut out = lemma_verdict(check, &v);
                let name = match case {
                    CaseBound::GradVelocity => "b*norm_v1<=I2",
                    CaseBound::GradientRate => "s_prime^2<=4*I2/|a|",
                };
                out.detail = format!("case={name} {}", out.detail);
                out
            }
        },
    })
}

/// One verdict per default check plus any extra requested checks, in a
/// fixed order; checks not requested are reported as skipped.
pub fn evaluate_checks(
    series: &[SpectralMoments],
    params: &Params,
    config: &ExperimentConfig,
) -> Result<Vec<Verdict>, RunError> {
    let inv = InvariantParams::from(&config.invariant);
    let mut order: Vec<Check> = Check::DEFAULT.to_vec();
    if config.checks.contains(&Check::CaseBounds) {
        order.push(Check::CaseBounds);
    }
    order
        .into_iter()
        .map(|check| {
            if config.checks.contains(&check) {
                evaluate(check, series, params, &inv, config.drift_tol).map_err(RunError::from)
            } else {
                Ok(Verdict {
                    check,
                    status: VerdictStatus::Skipped,
                    detail: String::new(),
                })
            }
        })
        .collect()
}

pub fn render_report(verdicts: &[Verdict]) -> String {
    let mut out = String::new();
    for v in verdicts {
        out.push_str(&v.line());
        out.push('\n');
    }
    out
}

pub fn status_of(verdicts: &[Verdict], crossing: Option<CrossingEvent>) -> RunStatus {
    if crossing.is_some() {
        RunStatus::Degenerate
    } else if verdicts.iter().any(|v| v.status == VerdictStatus::Fail) {
        RunStatus::VerdictFailure
    } else {
        RunStatus::Ok
    }
}

#[derive(Debug, Clone)]
pub struct RunArtifacts {
    pub status: RunStatus,
    pub verdicts: Vec<Verdict>,
    pub timeseries: String,
    pub report: String,
    pub manifest: String,
}

pub fn manifest_json(config: &ExperimentConfig) -> String {
    let mut s = serde_json::to_string_pretty(config).expect("config serializes");
    s.push('\n');
    s
}

/// Runs the experiment and renders every artifact in memory.
pub fn run_in_memory(config: &ExperimentConfig) -> Result<(Simulation, RunArtifacts), RunError> {
    let sim = simulate(config)?;
    let inv = InvariantParams::from(&sim.config.invariant);
    let timeseries = write_timeseries(&sim.series, &sim.params, &inv, sim.crossing)?;
    let verdicts = evaluate_checks(&sim.series, &sim.params, &sim.config)?;
    let report = render_report(&verdicts);
    let status = status_of(&verdicts, sim.crossing);
    let manifest = manifest_json(&sim.config);
    Ok((
        sim,
        RunArtifacts {
            status,
            verdicts,
            timeseries,
            report,
            manifest,
        },
    ))
}

fn write_file(path: &Path, contents: &str) -> Result<(), RunError> {
    fs::write(path, contents).map_err(|e| RunError::io(path, e))
}

/// Writes `timeseries.csv`, `report.txt` and `manifest.json` into `out_dir`.
pub fn run_experiment(config: &ExperimentConfig, out_dir: &Path) -> Result<RunArtifacts, RunError> {
    let (_, artifacts) = run_in_memory(config)?;
    fs::create_dir_all(out_dir).map_err(|e| RunError::io(out_dir, e))?;
    write_file(&out_dir.join(TIMESERIES_FILE), &artifacts.timeseries)?;
    write_file(&out_dir.join(REPORT_FILE), &artifacts.report)?;
    write_file(&out_dir.join(MANIFEST_FILE), &artifacts.manifest)?;
    Ok(artifacts)
}

/// Recomputes the verdicts of a finished run from its manifest and time
/// series alone.
pub fn report_from_files(manifest: &Path, timeseries: &Path) -> Result<(RunStatus, String), RunError> {
    let config = crate::config::load_experiment(Some(manifest), &[])?;
    let text = fs::read_to_string(timeseries).map_err(|e| RunError::io(timeseries, e))?;
    let params = config.params();
    let (series, crossing) = read_timeseries(&text, &params)?;
    if series.is_empty() {
        return Err(RunError::Series("no samples".into()));
    }
    let verdicts = evaluate_checks(&series, &params, &config)?;
    Ok((status_of(&verdicts, crossing), render_report(&verdicts)))
}

pub const SUMMARY_HEADER: &str =
    "index,a,b,amplitude,h,rtol,status,drift_I1,drift_I2,drift_I3,drift_Q,drift,lemma1,sandwich2,sandwich3,theorem4,audit_q,error";

fn opt(x: Option<f64>) -> String {
    x.map(fmt_f64).unwrap_or_default()
}

fn csv_text(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

fn sweep_row(index: usize, point: &crate::config::GridPoint, base: &ExperimentConfig) -> String {
    let prefix = format!(
        "{index},{},{},{},{},{}",
        opt(point.a),
        opt(point.b),
        opt(point.amplitude),
        opt(point.h),
        opt(point.rtol)
    );
    let failed = |status: &str, msg: String| format!("{prefix},{status},,,,,,,,,,,{}", csv_text(&msg));
    let cfg = match point.apply(base) {
        Ok(cfg) => cfg,
        Err(e) => return failed("config_error", e.to_string()),
    };
    let (sim, artifacts) = match run_in_memory(&cfg) {
        Ok(x) => x,
        Err(e) => return failed("error", e.to_string()),
    };
    let inv = InvariantParams::from(&sim.config.invariant);
    let drifts = drift(&sim.series, &sim.params, &inv).ok();
    let drift_of = |name: &str| {
        drifts
            .as_ref()
            .and_then(|d| {
                d.iter()
                    .find(|r| r.name == name || (name == "Q" && r.name.starts_with("Q(")))
            })
            .map(|r| fmt_f64(r.max_rel))
            .unwrap_or_default()
    };
    let statuses: Vec<&str> = artifacts.verdicts.iter().take(6).map(|v| v.status.label()).collect();
    format!(
        "{prefix},{},{},{},{},{},{},",
        artifacts.status.name(),
        drift_of("I1"),
        drift_of("I2"),
        drift_of("I3"),
        drift_of("Q"),
        statuses.join(",")
    )
}

/// Runs every grid point on a pool of `sweep.workers` threads. Rows come
/// out in grid order regardless of completion order.
pub fn sweep_summary(sweep: &SweepConfig) -> Result<String, RunError> {
    let grid = sweep.axes.grid();
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(sweep.workers.max(1))
        .build()
        .map_err(|e| RunError::Series(format!("cannot start worker pool: {e}")))?;
    let rows: Vec<String> = pool.install(|| {
        grid.par_iter()
            .enumerate()
            .map(|(i, p)| sweep_row(i, p, &sweep.base))
            .collect()
    });
    let mut out = String::from(SUMMARY_HEADER);
    out.push('\n');
    for r in rows {
        out.push_str(&r);
        out.push('\n');
    }
    Ok(out)
}

pub fn run_sweep(sweep: &SweepConfig, out_dir: &Path) -> Result<String, RunError> {
    let summary = sweep_summary(sweep)?;
    fs::create_dir_all(out_dir).map_err(|e| RunError::io(out_dir, e))?;
    write_file(&out_dir.join(SUMMARY_FILE), &summary)?;
    let mut manifest = serde_json::to_string_pretty(sweep).expect("sweep serializes");
    manifest.push('\n');
    write_file(&out_dir.join(MANIFEST_FILE), &manifest)?;
    Ok(summary)
}
