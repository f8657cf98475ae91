//! Empirical check of the power laws of the loop maps in `d`.

use std::io::Write;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{loop_backward, loop_forward, LoopResult};
use crate::error::{Error, Result};
use crate::geometry::Geometry;
use crate::vec2::norm;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScalingCheck {
    pub name: String,
    pub value: f64,
    pub lo: f64,
    pub hi: f64,
    pub pass: bool,
}

fn check(name: &str, value: f64, lo: f64, hi: f64) -> ScalingCheck {
    ScalingCheck {
        name: name.to_string(),
        value,
        lo,
        hi,
        pass: value >= lo && value <= hi,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScalingRow {
    pub d: f64,
    pub forward: LoopResult,
    pub backward: LoopResult,
    pub checks: Vec<ScalingCheck>,
    pub pass: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScalingSlopes {
    /// `log D₁` against `log d`.
    pub distance: f64,
    /// `log ‖𝒫½‖` against `log d`.
    pub half_norm: f64,
    /// `𝒯₁ − τ` against `|ln d|`.
    pub time: f64,
    /// `𝒯½ − τ` against `|ln d|`.
    pub half_time: f64,
    pub backward_distance: f64,
    pub backward_half_norm: f64,
    pub backward_time: f64,
    pub backward_half_time: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScalingReport {
    pub tau: f64,
    pub epsilon: f64,
    pub d_grid: Vec<f64>,
    pub rows: Vec<ScalingRow>,
    pub slopes: ScalingSlopes,
    pub expected: ScalingSlopes,
    /// Each fitted slope within `μ` of its exponent.
    pub slopes_pass: bool,
    /// Every two-sided bound at every `d`.
    pub bounds_pass: bool,
    pub mu_used: f64,
}

/// Least-squares slope of `y` against `x`.
pub fn fit_slope(x: &[f64], y: &[f64]) -> f64 {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = x.iter().map(|a| (a - mx) * (a - mx)).sum();
    sxy / sxx
}

fn row(geo: &Geometry, tau: f64, d: f64, mu: f64) -> Result<ScalingRow> {
    let c = &geo.constants;
    let f = loop_forward(geo, d, tau)?;
    let b = loop_backward(geo, d, tau)?;
    let ln = d.ln().abs();
    let pw = |e: f64| d.powf(e);
    let checks = vec![
        check("D1", f.big_d1, pw(c.sigma_fwd + mu), pw(c.sigma_fwd - mu)),
        check("P_half", norm(f.p_half), pw(c.sigma_fwd_plus + mu), pw(c.sigma_fwd_plus - mu)),
        check("T1", f.t1 - tau, (c.big_sigma_fwd - mu) * ln, (c.big_sigma_fwd + mu) * ln),
        check("T_half", f.t_half - tau, (c.big_sigma_fwd_plus - mu) * ln, (c.big_sigma_fwd_plus + mu) * ln),
        check("D-1", b.big_d1, pw(c.sigma_bwd + mu), pw(c.sigma_bwd - mu)),
        check("P-half", norm(b.p_half), pw(c.sigma_bwd_minus + mu), pw(c.sigma_bwd_minus - mu)),
        check("T-1", tau - b.t1, (c.big_sigma_bwd - mu) * ln, (c.big_sigma_bwd + mu) * ln),
        check("T-half", tau - b.t_half, (c.big_sigma_bwd_minus - mu) * ln, (c.big_sigma_bwd_minus + mu) * ln),
    ];
    let pass = checks.iter().all(|k| k.pass);
    Ok(ScalingRow {
        d,
        forward: f,
        backward: b,
        checks,
        pass,
    })
}

/// Loops at every `d` of the grid, two-sided bounds with margin `μ`, and slope fits.
pub fn verify_scaling(geo: &Geometry, tau: f64, d_grid: &[f64], mu: f64) -> Result<ScalingReport> {
    let c = geo.constants;
    if !(mu > 0.0 && mu < c.mu0) {
        return Err(Error::Precondition(format!("mu = {mu} must lie in (0, {})", c.mu0)));
    }
    if d_grid.len() < 2 || d_grid.iter().any(|&d| !(d > 0.0 && d <= geo.delta())) {
        return Err(Error::Precondition("d grid needs two or more points in (0, δ]".into()));
    }
    let rows: Vec<ScalingRow> = d_grid.par_iter().map(|&d| row(geo, tau, d, mu)).collect::<Result<_>>()?;
    let logd: Vec<f64> = rows.iter().map(|r| r.d.ln()).collect();
    let lnd: Vec<f64> = rows.iter().map(|r| r.d.ln().abs()).collect();
    let col = |f: &dyn Fn(&ScalingRow) -> f64| -> Vec<f64> { rows.iter().map(f).collect() };
    let slopes = ScalingSlopes {
        distance: fit_slope(&logd, &col(&|r| r.forward.big_d1.ln())),
        half_norm: fit_slope(&logd, &col(&|r| norm(r.forward.p_half).ln())),
        time: fit_slope(&lnd, &col(&|r| r.forward.t1 - tau)),
        half_time: fit_slope(&lnd, &col(&|r| r.forward.t_half - tau)),
        backward_distance: fit_slope(&logd, &col(&|r| r.backward.big_d1.ln())),
        backward_half_norm: fit_slope(&logd, &col(&|r| norm(r.backward.p_half).ln())),
        backward_time: fit_slope(&lnd, &col(&|r| tau - r.backward.t1)),
        backward_half_time: fit_slope(&lnd, &col(&|r| tau - r.backward.t_half)),
    };
    let expected = ScalingSlopes {
        distance: c.sigma_fwd,
        half_norm: c.sigma_fwd_plus,
        time: c.big_sigma_fwd,
        half_time: c.big_sigma_fwd_plus,
        backward_distance: c.sigma_bwd,
        backward_half_norm: c.sigma_bwd_minus,
        backward_time: c.big_sigma_bwd,
        backward_half_time: c.big_sigma_bwd_minus,
    };
    let pairs = [
        (slopes.distance, expected.distance),
        (slopes.half_norm, expected.half_norm),
        (slopes.time, expected.time),
        (slopes.half_time, expected.half_time),
        (slopes.backward_distance, expected.backward_distance),
        (slopes.backward_half_norm, expected.backward_half_norm),
        (slopes.backward_time, expected.backward_time),
        (slopes.backward_half_time, expected.backward_half_time),
    ];
    let slopes_pass = pairs.iter().all(|(s, e)| (s - e).abs() <= mu);
    let bounds_pass = rows.iter().all(|r| r.pass);
    Ok(ScalingReport {
        tau,
        epsilon: geo.eps,
        d_grid: d_grid.to_vec(),
        rows,
        slopes,
        expected,
        slopes_pass,
        bounds_pass,
        mu_used: mu,
    })
}

/// Writes `d, D1, d1, T1_minus_tau, Thalf_minus_tau, bound_lo, bound_hi, pass`;
/// the bounds are those on `D₁` and `pass` covers every check of the row.
pub fn write_scaling_csv<W: Write>(report: &ScalingReport, out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    let io = |e: csv::Error| Error::Io(e.to_string());
    w.write_record(["d", "D1", "d1", "T1_minus_tau", "Thalf_minus_tau", "bound_lo", "bound_hi", "pass"])
        .map_err(io)?;
    for r in &report.rows {
        let b = &r.checks[0];
        let mut rec: Vec<String> = [
            r.d,
            r.forward.big_d1,
            r.forward.d1,
            r.forward.t1 - report.tau,
            r.forward.t_half - report.tau,
            b.lo,
            b.hi,
        ]
        .iter()
        .map(|v| format!("{v:.17e}"))
        .collect();
        rec.push(r.pass.to_string());
        w.write_record(&rec).map_err(io)?;
    }
    w.flush()?;
    Ok(())
}
