//! Subcommand orchestration behind the `melchaos` binary.

use std::fs::File;
use std::io::BufWriter;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::Serialize;
use serde_json::{json, Value};

use crate::bernoulli::semi_conjugacy_check;
use crate::config::ExperimentConfig;
use crate::constructor::{
    aleph_diameter, alpha_bound_check, build_time_sequence, construct_backward, construct_nested, disjoint,
    fit_remainder_constant, null_construction, verify_shadowing, write_shadow_csv, NestedIntervals, ShadowReport,
    TimeSequence, TimeSide, C_STAR,
};
use crate::error::{Error, Result};
use crate::geometry::{calibrate_distance, compute_endpoints, derive_constants, write_endpoints_csv, EndpointRow, Geometry};
use crate::homoclinic::{compute_homoclinic, HomoclinicMethod, HomoclinicOrbit};
use crate::melnikov::{extract_zero_structure, Evaluator, MelnikovFunction, ZeroStructure};
use crate::poincare::{verify_scaling, write_scaling_csv, ScalingReport};
use crate::system::{check_hypotheses, classify_scenario, compute_saddle_data, PiecewiseSystem};
use crate::flow::IntegratorConfig;

pub const SUMMARY_SCHEMA: &str = "melchaos-summary/1";

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Command {
    Check,
    Melnikov,
    Zeros,
    Endpoints,
    Scaling,
    Construct,
    Shadow,
    Conjugacy,
    Sweep,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::Check => "check",
            Command::Melnikov => "melnikov",
            Command::Zeros => "zeros",
            Command::Endpoints => "endpoints",
            Command::Scaling => "scaling",
            Command::Construct => "construct",
            Command::Shadow => "shadow",
            Command::Conjugacy => "conjugacy",
            Command::Sweep => "sweep",
        }
    }
}

/// What a subcommand produced.
#[derive(Debug, Clone)]
pub struct Outcome {
    pub pass: bool,
    pub result: Value,
    pub artifacts: Vec<PathBuf>,
}

#[derive(Debug, Clone, Serialize)]
pub struct ErrorRecord {
    pub module: String,
    pub kind: String,
    pub message: String,
}

impl From<&Error> for ErrorRecord {
    fn from(e: &Error) -> Self {
        let debug = format!("{e:?}");
        let kind = debug.split(|c: char| !c.is_alphanumeric()).next().unwrap_or("").to_string();
        ErrorRecord {
            module: e.module().to_string(),
            kind,
            message: e.to_string(),
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct Summary {
    pub schema: &'static str,
    pub subcommand: &'static str,
    pub status: &'static str,
    pub exit_code: i32,
    pub artifacts: Vec<String>,
    pub error: Option<ErrorRecord>,
    pub result: Value,
}

/// Exit status of a finished run: `0` pass, `1` failed check or numerical error, `2` config error.
pub fn exit_code(outcome: &Result<Outcome>) -> i32 {
    match outcome {
        Ok(o) if o.pass => 0,
        Ok(_) => 1,
        Err(Error::Config(_)) => 2,
        Err(_) => 1,
    }
}

/// Runs `cmd` and writes `<output_dir>/<cmd>_summary.json`; returns the exit status.
///
/// A config that failed to load is passed as `Err` so that its summary is still written.
pub fn execute(cmd: Command, cfg: Result<ExperimentConfig>, fallback_dir: &Path) -> i32 {
    let (dir, outcome) = match cfg {
        Ok(cfg) => {
            let dir = cfg.output_dir.clone();
            (dir, run_in_pool(cmd, &cfg))
        }
        Err(e) => (fallback_dir.to_path_buf(), Err(e)),
    };
    let code = exit_code(&outcome);
    let summary = match &outcome {
        Ok(o) => Summary {
            schema: SUMMARY_SCHEMA,
            subcommand: cmd.name(),
            status: if o.pass { "pass" } else { "fail" },
            exit_code: code,
            artifacts: o.artifacts.iter().map(|p| p.display().to_string()).collect(),
            error: None,
            result: o.result.clone(),
        },
        Err(e) => Summary {
            schema: SUMMARY_SCHEMA,
            subcommand: cmd.name(),
            status: "error",
            exit_code: code,
            artifacts: Vec::new(),
            error: Some(ErrorRecord::from(e)),
            result: Value::Null,
        },
    };
    if let Err(e) = &outcome {
        eprintln!("melchaos {}: {e}", cmd.name());
    }
    let path = dir.join(format!("{}_summary.json", cmd.name()));
    match std::fs::create_dir_all(&dir).map_err(Error::from).and_then(|_| write_json(&path, &summary)) {
        Ok(()) => println!("{}", path.display()),
        Err(e) => eprintln!("melchaos: cannot write {}: {e}", path.display()),
    }
    code
}

fn run_in_pool(cmd: Command, cfg: &ExperimentConfig) -> Result<Outcome> {
    cfg.validate()?;
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(n) = cfg.workers {
        builder = builder.num_threads(n);
    }
    let pool = builder.build().map_err(|e| Error::Config(format!("worker pool: {e}")))?;
    pool.install(|| run(cmd, cfg))
}

/// Runs one subcommand; artifacts go to `cfg.output_dir`.
pub fn run(cmd: Command, cfg: &ExperimentConfig) -> Result<Outcome> {
    cfg.validate()?;
    std::fs::create_dir_all(&cfg.output_dir)?;
    match cmd {
        Command::Check => check(cfg),
        Command::Melnikov => melnikov(cfg),
        Command::Zeros => zeros(cfg),
        Command::Endpoints => endpoints(cfg),
        Command::Scaling => scaling(cfg),
        Command::Construct => construct(cfg),
        Command::Shadow => shadow(cfg),
        Command::Conjugacy => conjugacy(cfg),
        Command::Sweep => sweep(cfg),
    }
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    serde_json::to_writer_pretty(&mut w, value).map_err(|e| Error::Io(e.to_string()))?;
    std::io::Write::write_all(&mut w, b"\n")?;
    Ok(())
}

fn to_value<T: Serialize>(v: &T) -> Value {
    serde_json::to_value(v).unwrap_or(Value::Null)
}

fn eps_label(eps: f64) -> String {
    format!("{eps:e}")
}

fn method_for(sys: &PiecewiseSystem, cfg: &ExperimentConfig) -> HomoclinicMethod {
    cfg.homoclinic.unwrap_or(if sys.closed_form.is_some() {
        HomoclinicMethod::ClosedForm
    } else {
        HomoclinicMethod::Shooting
    })
}

/// Data shared by every `ε`: the system, `γ`, `M` and its zeros.
struct Setting {
    sys: PiecewiseSystem,
    method: HomoclinicMethod,
    m: MelnikovFunction,
    zs: ZeroStructure,
    period: Option<f64>,
}

impl Setting {
    fn new(cfg: &ExperimentConfig) -> Result<Self> {
        let sys = cfg.system.build();
        let method = method_for(&sys, cfg);
        let saddle = compute_saddle_data(&sys)?;
        let gamma = compute_homoclinic(&sys, &saddle, method, &IntegratorConfig::default())?;
        let m = MelnikovFunction::new(&sys, &saddle, &gamma, cfg.melnikov.tol)?;
        let [lo, hi] = cfg.zeros.range;
        let zs = extract_zero_structure(&m, (lo, hi), cfg.zeros.step, &cfg.zeros.scan)?;
        let period = m.period();
        Ok(Setting {
            sys,
            method,
            m,
            zs,
            period,
        })
    }

    fn geometry(&self, cfg: &ExperimentConfig, eps: f64) -> Result<Geometry> {
        Geometry::new(&self.sys, eps, self.method, cfg.geometry)
    }

    fn tau(&self, cfg: &ExperimentConfig) -> Result<f64> {
        if let Some(t) = cfg.tau {
            return Ok(t);
        }
        let p = self.period.unwrap_or(f64::INFINITY);
        self.zs
            .zeros()
            .into_iter()
            .find(|&z| z >= 0.0 && z < p)
            .ok_or(Error::NotEnoughZeros { needed: 1, found: 0 })
    }

    fn nu(&self, cfg: &ExperimentConfig, geo: &Geometry) -> Result<f64> {
        let nu0 = geo.constants.nu0;
        match cfg.nu {
            Some(nu) if nu < nu0 => Err(Error::Config(format!("nu = {nu} is below nu0 = {nu0}"))),
            Some(nu) => Ok(nu),
            None => Ok(nu0),
        }
    }

    fn times(&self, cfg: &ExperimentConfig, geo: &Geometry) -> Result<TimeSequence> {
        build_time_sequence(
            &self.zs,
            self.period,
            geo.eps,
            self.nu(cfg, geo)?,
            &geo.constants,
            self.tau(cfg)?,
            cfg.construction.mode,
            cfg.side,
            &cfg.times,
        )
    }

    fn family(&self, cfg: &ExperimentConfig, geo: &Geometry) -> Result<Vec<NestedIntervals>> {
        let times = self.times(cfg, geo)?;
        geo.prepare_endpoint_tables()?;
        cfg.sequences()?
            .par_iter()
            .map(|e| match (e.side, e.is_null()) {
                (TimeSide::Future, true) => null_construction(geo, e, &times, &cfg.construction),
                (TimeSide::Future, false) => construct_nested(geo, e, &times, &cfg.construction),
                (TimeSide::Past, _) => construct_backward(geo, e, &times, &cfg.construction),
            })
            .collect()
    }
}

fn c_star(cfg: &ExperimentConfig) -> f64 {
    cfg.shadow.c_star.unwrap_or(C_STAR)
}

fn shadow_all(geo: &Geometry, family: &[NestedIntervals], c: f64) -> Result<Vec<ShadowReport>> {
    let jobs: Vec<(&NestedIntervals, f64)> =
        family.iter().flat_map(|n| n.probe_points().into_iter().map(move |d| (n, d))).collect();
    jobs.into_par_iter().map(|(n, d)| verify_shadowing(geo, n, d, c)).collect()
}

fn write_csv_file(path: &Path, f: impl FnOnce(BufWriter<File>) -> Result<()>) -> Result<PathBuf> {
    f(BufWriter::new(File::create(path)?))?;
    Ok(path.to_path_buf())
}

fn check(cfg: &ExperimentConfig) -> Result<Outcome> {
    let sys = cfg.system.build();
    let saddle = compute_saddle_data(&sys)?;
    let method = method_for(&sys, cfg);
    let gamma: Option<HomoclinicOrbit> = compute_homoclinic(&sys, &saddle, method, &IntegratorConfig::default()).ok();
    let report = check_hypotheses(&sys, &saddle, gamma.as_ref());
    let scenario = gamma.as_ref().map(|g| classify_scenario(&saddle, g)).transpose()?;
    let constants = derive_constants(&saddle);
    let pass = report.all() && constants.is_admissible() && gamma.is_some();
    let result = json!({
        "system": sys.label,
        "hypotheses": to_value(&report),
        "homoclinic_found": gamma.is_some(),
        "scenario": to_value(&scenario),
        "saddle": to_value(&saddle),
        "constants": to_value(&constants),
        "constant_identities": to_value(&constants.identity_residuals()),
        "constants_admissible": constants.is_admissible(),
    });
    let path = cfg.output_dir.join("check.json");
    write_json(&path, &result)?;
    Ok(Outcome {
        pass,
        result,
        artifacts: vec![path],
    })
}

fn melnikov(cfg: &ExperimentConfig) -> Result<Outcome> {
    let sys = cfg.system.build();
    let saddle = compute_saddle_data(&sys)?;
    let gamma = compute_homoclinic(&sys, &saddle, method_for(&sys, cfg), &IntegratorConfig::default())?;
    let m = MelnikovFunction::new(&sys, &saddle, &gamma, cfg.melnikov.tol)?;
    let [lo, hi] = cfg.melnikov.range;
    let n = ((hi - lo) / cfg.melnikov.step).round() as usize;
    let alphas: Vec<f64> = (0..=n).map(|i| lo + (hi - lo) * i as f64 / n as f64).collect();
    let values = m.values(&alphas)?;
    let path = cfg.output_dir.join("melnikov.csv");
    write_csv_file(&path, |out| {
        let mut w = csv::Writer::from_writer(out);
        let io = |e: csv::Error| Error::Io(e.to_string());
        w.write_record(["alpha", "M_value"]).map_err(io)?;
        for (a, v) in alphas.iter().zip(&values) {
            w.write_record([format!("{a:.17e}"), format!("{v:.17e}")]).map_err(io)?;
        }
        w.flush()?;
        Ok(())
    })?;
    let result = json!({
        "samples": alphas.len(),
        "range": [lo, hi],
        "period": m.period(),
        "c_perp_minus": m.c_perp_minus,
        "c_perp_plus": m.c_perp_plus,
        "truncation_horizon": m.truncation_horizon,
        "max_abs": values.iter().fold(0.0f64, |a, v| a.max(v.abs())),
    });
    Ok(Outcome {
        pass: values.iter().all(|v| v.is_finite()),
        result,
        artifacts: vec![path],
    })
}

fn zeros(cfg: &ExperimentConfig) -> Result<Outcome> {
    let s = Setting::new(cfg)?;
    let path = cfg.output_dir.join("zeros.json");
    write_json(&path, &s.zs)?;
    Ok(Outcome {
        pass: true,
        result: json!({
            "class": to_value(&s.zs.class),
            "zeros": s.zs.zeros(),
            "lambda0": s.zs.lambda0,
            "lambda1": s.zs.lambda1,
            "derivative_bound": s.zs.derivative_bound,
        }),
        artifacts: vec![path],
    })
}

/// Largest relative error of the calibrated distance law where `|M|` is at least a quarter of its peak.
const DISTANCE_LAW_TOL: f64 = 0.1;

fn endpoints(cfg: &ExperimentConfig) -> Result<Outcome> {
    let s = Setting::new(cfg)?;
    let geo = s.geometry(cfg, cfg.epsilon[0])?;
    geo.prepare_endpoint_tables()?;
    let period = s.period.unwrap_or(1.0);
    let taus = cfg.endpoints.taus.clone().unwrap_or_else(|| {
        let n = cfg.endpoints.count;
        (0..n).map(|i| period * i as f64 / n as f64).collect()
    });
    let cal = calibrate_distance(&geo, &s.m, 0.0, period)?;
    let rows = taus
        .par_iter()
        .map(|&tau| {
            let ep = compute_endpoints(&geo, tau)?;
            let distance = ep.splitting(&geo.l0)?;
            let melnikov = s.m.value(tau)?;
            Ok(EndpointRow {
                tau,
                p_s: ep.p_s,
                p_u: ep.p_u,
                distance,
                melnikov,
                predicted: cal.c_hat * geo.eps * melnikov,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let peak = rows.iter().fold(0.0f64, |a, r| a.max(r.melnikov.abs()));
    let worst = rows
        .iter()
        .filter(|r| r.melnikov.abs() >= 0.25 * peak)
        .map(|r| (r.distance / r.predicted - 1.0).abs())
        .fold(0.0f64, f64::max);
    let path = cfg.output_dir.join("endpoints.csv");
    write_csv_file(&path, |out| write_endpoints_csv(&rows, out))?;
    Ok(Outcome {
        pass: worst <= DISTANCE_LAW_TOL,
        result: json!({
            "epsilon": geo.eps,
            "calibration": to_value(&cal),
            "worst_relative_error": worst,
            "tolerance": DISTANCE_LAW_TOL,
        }),
        artifacts: vec![path],
    })
}

fn scaling_at(cfg: &ExperimentConfig, s: &Setting, geo: &Geometry) -> Result<ScalingReport> {
    geo.prepare_endpoint_tables()?;
    let mu = cfg.scaling.mu.unwrap_or(0.5 * geo.constants.mu0);
    verify_scaling(geo, s.tau(cfg)?, &cfg.scaling.grid(), mu)
}

fn scaling_summary(r: &ScalingReport) -> Value {
    json!({
        "epsilon": r.epsilon,
        "tau": r.tau,
        "mu": r.mu_used,
        "bounds_pass": r.bounds_pass,
        "slopes_pass": r.slopes_pass,
        "slopes": to_value(&r.slopes),
        "expected": to_value(&r.expected),
        "failed_checks": r.rows.iter().map(|row| row.checks.iter().filter(|c| !c.pass).count()).sum::<usize>(),
    })
}

fn scaling(cfg: &ExperimentConfig) -> Result<Outcome> {
    let s = Setting::new(cfg)?;
    let geo = s.geometry(cfg, cfg.epsilon[0])?;
    let report = scaling_at(cfg, &s, &geo)?;
    let csv_path = cfg.output_dir.join("scaling.csv");
    write_csv_file(&csv_path, |out| write_scaling_csv(&report, out))?;
    let json_path = cfg.output_dir.join("scaling.json");
    write_json(&json_path, &report)?;
    Ok(Outcome {
        pass: report.bounds_pass && report.slopes_pass,
        result: scaling_summary(&report),
        artifacts: vec![csv_path, json_path],
    })
}

/// Construction, shadowing and time-shift checks of the configured family at one `ε`.
struct FamilyRun {
    family: Vec<NestedIntervals>,
    reports: Vec<ShadowReport>,
    summary: Value,
    pass: bool,
}

fn family_run(cfg: &ExperimentConfig, s: &Setting, geo: &Geometry) -> Result<FamilyRun> {
    let family = s.family(cfg, geo)?;
    let c = c_star(cfg);
    let reports = shadow_all(geo, &family, c)?;
    let loc = geo.constants.localization(geo.eps, s.nu(cfg, geo)?);
    let aleph = aleph_diameter(&family);
    let mut pairs = Vec::new();
    for (i, a) in family.iter().enumerate() {
        for b in &family[i + 1..] {
            pairs.push(json!({
                "a": a.sequence.label(),
                "b": b.sequence.label(),
                "disjoint": disjoint(a, b),
            }));
        }
    }
    let disjoint_pass = pairs.iter().all(|p| p["disjoint"] != Value::Bool(false));
    let period = s.period.unwrap_or(1.0);
    let cal = calibrate_distance(geo, &s.m, 0.0, period)?;
    let future: Vec<NestedIntervals> = family.iter().filter(|n| !n.levels.is_empty()).cloned().collect();
    let alpha = if future.is_empty() {
        None
    } else {
        let mut taus = s.zs.zeros();
        taus.extend((0..4).map(|i| period * (0.125 + 0.25 * i as f64)));
        let cm = fit_remainder_constant(geo, &s.m, cal.c_hat, &taus)?;
        Some(alpha_bound_check(&future, &s.zs, cal.c_hat, cm))
    };
    let depth_pass = family
        .iter()
        .all(|n| n.sequence.is_null() || (!n.levels.is_empty() && n.levels.iter().all(|l| l.sandwich)));
    let shadow_pass = reports.iter().all(|r| r.pass && r.localization_pass && r.manifold_pass);
    let max_ratio = reports
        .iter()
        .flat_map(|r| r.windows.iter().map(|w| w.sup_distance / r.epsilon))
        .fold(0.0f64, f64::max);
    let alpha_pass = alpha.as_ref().map_or(true, |a| a.pass);
    let pass = depth_pass && shadow_pass && alpha_pass && disjoint_pass && aleph <= loc;
    let summary = json!({
        "epsilon": geo.eps,
        "c_star": c,
        "c_hat": cal.c_hat,
        "localization": loc,
        "aleph_diameter": aleph,
        "aleph_pass": aleph <= loc,
        "depth_pass": depth_pass,
        "shadow_pass": shadow_pass,
        "max_shadow_ratio": max_ratio,
        "alpha": to_value(&alpha),
        "alpha_pass": alpha_pass,
        "disjointness": pairs,
        "disjoint_pass": disjoint_pass,
    });
    Ok(FamilyRun {
        family,
        reports,
        summary,
        pass,
    })
}

fn construct(cfg: &ExperimentConfig) -> Result<Outcome> {
    let s = Setting::new(cfg)?;
    let geo = s.geometry(cfg, cfg.epsilon[0])?;
    let run = family_run(cfg, &s, &geo)?;
    let json_path = cfg.output_dir.join("construct.json");
    write_json(&json_path, &json!({ "constructions": to_value(&run.family), "checks": run.summary }))?;
    let csv_path = cfg.output_dir.join("shadow.csv");
    write_csv_file(&csv_path, |out| write_shadow_csv(&run.reports, out))?;
    Ok(Outcome {
        pass: run.pass,
        result: run.summary,
        artifacts: vec![json_path, csv_path],
    })
}

fn shadow(cfg: &ExperimentConfig) -> Result<Outcome> {
    let s = Setting::new(cfg)?;
    let geo = s.geometry(cfg, cfg.epsilon[0])?;
    let family = s.family(cfg, &geo)?;
    let c = c_star(cfg);
    let reports = match cfg.shadow.d {
        Some(d) => vec![verify_shadowing(&geo, &family[0], d, c)?],
        None => shadow_all(&geo, &family, c)?,
    };
    let json_path = cfg.output_dir.join("shadow.json");
    write_json(&json_path, &reports)?;
    let csv_path = cfg.output_dir.join("shadow.csv");
    write_csv_file(&csv_path, |out| write_shadow_csv(&reports, out))?;
    let pass = reports.iter().all(|r| r.pass);
    Ok(Outcome {
        pass,
        result: json!({
            "epsilon": geo.eps,
            "c_star": c,
            "points": reports.len(),
            "pass": reports.iter().map(|r| json!({"sequence": r.sequence, "probe": r.probe, "pass": r.pass})).collect::<Vec<_>>(),
        }),
        artifacts: vec![json_path, csv_path],
    })
}

fn conjugacy(cfg: &ExperimentConfig) -> Result<Outcome> {
    if cfg.side != TimeSide::Future {
        return Err(Error::Config("conjugacy runs on future-side sequences".into()));
    }
    let s = Setting::new(cfg)?;
    let geo = s.geometry(cfg, cfg.epsilon[0])?;
    let family = s.family(cfg, &geo)?;
    let report = semi_conjugacy_check(&geo, &family, s.zs.lambda1, c_star(cfg), cfg.conjugacy.k_max)?;
    let path = cfg.output_dir.join("conjugacy.json");
    write_json(&path, &report)?;
    Ok(Outcome {
        pass: report.pass,
        result: json!({
            "epsilon": report.epsilon,
            "k_max": report.k_max,
            "readback": to_value(&report.readback),
            "points": report.points.len(),
            "pass": report.pass,
        }),
        artifacts: vec![path],
    })
}

#[derive(Debug, Clone, Serialize)]
struct SweepRow {
    epsilon: f64,
    scaling_bounds_pass: bool,
    scaling_slopes_pass: bool,
    construct_pass: bool,
    max_shadow_ratio: f64,
    pass: bool,
}

fn sweep(cfg: &ExperimentConfig) -> Result<Outcome> {
    let s = Setting::new(cfg)?;
    let mut rows = Vec::new();
    let mut details = Vec::new();
    let mut artifacts = Vec::new();
    for &eps in &cfg.epsilon {
        let geo = s.geometry(cfg, eps)?;
        let report = scaling_at(cfg, &s, &geo)?;
        let path = cfg.output_dir.join(format!("scaling_eps{}.csv", eps_label(eps)));
        artifacts.push(write_csv_file(&path, |out| write_scaling_csv(&report, out))?);
        let run = family_run(cfg, &s, &geo)?;
        rows.push(SweepRow {
            epsilon: eps,
            scaling_bounds_pass: report.bounds_pass,
            scaling_slopes_pass: report.slopes_pass,
            construct_pass: run.pass,
            max_shadow_ratio: run.summary["max_shadow_ratio"].as_f64().unwrap_or(f64::NAN),
            pass: report.bounds_pass && report.slopes_pass && run.pass,
        });
        details.push(json!({ "scaling": scaling_summary(&report), "construction": run.summary }));
    }
    let table = cfg.output_dir.join("sweep.csv");
    artifacts.push(write_csv_file(&table, |out| {
        let mut w = csv::Writer::from_writer(out);
        for r in &rows {
            w.serialize(r).map_err(|e| Error::Io(e.to_string()))?;
        }
        w.flush()?;
        Ok(())
    })?);
    let json_path = cfg.output_dir.join("sweep.json");
    write_json(&json_path, &details)?;
    artifacts.push(json_path);
    let passing: Vec<f64> = rows.iter().filter(|r| r.pass).map(|r| r.epsilon).collect();
    Ok(Outcome {
        pass: rows.iter().all(|r| r.pass),
        result: json!({ "rows": to_value(&rows), "passing_epsilon": passing }),
        artifacts,
    })
}
