//! Shadowing of the homoclinic loop along the scheduled windows.
//!
//! The orbit of a probe is assembled level by level: each earlier level runs
//! from its landing coordinate `d*`, so the next loop starts exactly in its
//! chart; the junction defects are the residuals `|d_m(d*)|`.

use serde::{Deserialize, Serialize};

use super::nested::NestedIntervals;
use super::symbols::{Tail, TimeSide};
use crate::error::{Error, Result};
use crate::flow::{integrate, Control, Observer, Segment, Track};
use crate::geometry::Geometry;
use crate::poincare::loop_run;
use crate::vec2::{dist, norm, V2};

/// `c*`: 1.2 times the largest window ratio `sup/ε` measured on the `{1}`
/// prefix of the κ = 4 fixture at ε = 1e-2 (0.3091), rounded up and frozen.
pub const C_STAR: f64 = 0.372;

const SUBSAMPLES: usize = 4;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum WindowMode {
    /// `[τ, T_1]` against `γ(t − τ)`.
    Initial,
    /// Against `γ(t − T_{2j} − α_j)`.
    Loop,
    /// Against the origin.
    Rest,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ShadowWindow {
    /// `j`, zero for the initial window.
    pub j: usize,
    pub start: f64,
    pub end: f64,
    pub mode: WindowMode,
    /// Whether `end` was cut at the certified horizon.
    pub truncated: bool,
    pub sup_distance: f64,
    /// Loop windows: distance to `γ(t − T_{2j})` without the shift `α_j`.
    pub sup_distance_unshifted: f64,
    pub alpha: f64,
    /// `sup ‖x(t)‖` on the window.
    pub sup_norm: f64,
    pub pass: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ShadowReport {
    pub sequence: String,
    pub side: TimeSide,
    /// Chart coordinate of the probe in the deepest level.
    pub probe: f64,
    pub terminal: bool,
    pub epsilon: f64,
    pub windows: Vec<ShadowWindow>,
    pub c_star_used: f64,
    pub pass: bool,
    /// Spread of the deepest set on `L⁰`.
    pub aleph_diameter: f64,
    /// `‖x(T_{±1})‖` and its bound `ε^{(ν+1)/2}`.
    pub x_t1_norm: f64,
    pub localization_bound: f64,
    pub localization_pass: bool,
    /// Distances to the stable leaf at the start and at each return to `L⁰`.
    pub manifold_distances: Vec<f64>,
    pub manifold_bound: f64,
    pub manifold_pass: bool,
    pub junction_defects: Vec<f64>,
    /// End of the verified time range.
    pub horizon: f64,
}

/// Sampled orbit of one probe.
#[derive(Debug, Clone)]
pub struct ShadowOrbit {
    /// `(t, x(t))` in increasing `t`.
    pub path: Vec<(f64, V2)>,
    pub horizon: f64,
    pub terminal: bool,
    /// `α` of each loop, in schedule order.
    pub alphas: Vec<f64>,
    /// `|d|` at the start and `|d_m|` at each return.
    pub manifold_distances: Vec<f64>,
    pub junction_defects: Vec<f64>,
}

impl ShadowOrbit {
    /// Linear interpolation of the samples.
    pub fn state(&self, t: f64) -> Option<V2> {
        let i = self.path.partition_point(|(s, _)| *s < t);
        if i == 0 {
            return self.path.first().filter(|(s, _)| *s == t).map(|p| p.1);
        }
        let (t1, x1) = *self.path.get(i)?;
        let (t0, x0) = self.path[i - 1];
        let w = if t1 > t0 { (t - t0) / (t1 - t0) } else { 0.0 };
        Some([x0[0] + w * (x1[0] - x0[0]), x0[1] + w * (x1[1] - x0[1])])
    }

    /// Samples on `[a, b]`, including interpolated end points.
    pub fn samples(&self, a: f64, b: f64) -> Vec<(f64, V2)> {
        let mut out: Vec<(f64, V2)> = Vec::new();
        if let Some(x) = self.state(a) {
            out.push((a, x));
        }
        out.extend(self.path.iter().copied().filter(|(t, _)| *t > a && *t < b));
        if let Some(x) = self.state(b) {
            out.push((b, x));
        }
        out
    }
}

fn sample_track(track: &Track, from: f64, out: &mut Vec<(f64, V2)>) {
    for s in &track.steps {
        for k in 0..=SUBSAMPLES {
            let t = s.t0 + s.h * k as f64 / SUBSAMPLES as f64;
            if t > from {
                out.push((t, s.eval(t)));
            }
        }
    }
}

struct Recorder<'a>(&'a mut Vec<(f64, V2)>);

impl Observer for Recorder<'_> {
    fn on_step(&mut self, seg: &Segment) -> Result<Control> {
        let t0 = seg.t_start();
        for k in 1..=SUBSAMPLES {
            let t = t0 + (seg.t_end - t0) * k as f64 / SUBSAMPLES as f64;
            self.0.push((t, seg.eval(t)));
        }
        Ok(Control::Continue)
    }
}

fn sort_path(path: &mut Vec<(f64, V2)>) {
    path.sort_by(|a, b| a.0.total_cmp(&b.0));
    path.dedup_by(|a, b| a.0 == b.0);
}

fn tail_horizon(nested: &NestedIntervals, last_k: usize) -> Result<f64> {
    let j = 2 * (last_k + nested.tail_windows) + 1;
    nested.times.time(j).ok_or(Error::NotEnoughZeros {
        needed: j.div_ceil(2),
        found: nested.times.times.len() / 2,
    })
}

/// Orbit of the probe with deepest-chart coordinate `d`, in the future frame.
fn forward_orbit(geo: &Geometry, nested: &NestedIntervals, d: f64) -> Result<ShadowOrbit> {
    let mut path = Vec::new();
    if nested.levels.is_empty() {
        let shot = geo.stable_shot(nested.tau)?;
        sample_track(&shot.track, nested.tau - 1.0, &mut path);
        sort_path(&mut path);
        let horizon = tail_horizon(nested, 0)?;
        let end = path.last().map(|p| p.0).unwrap_or(nested.tau);
        // Beyond the seed radius the leaf is the saddle itself.
        let mut t = end;
        while t < horizon {
            t = (t + 0.5).min(horizon);
            path.push((t, [0.0, 0.0]));
        }
        return Ok(ShadowOrbit {
            path,
            horizon,
            terminal: true,
            alphas: Vec::new(),
            manifold_distances: vec![0.0],
            junction_defects: Vec::new(),
        });
    }
    let deepest = nested.levels.len();
    let inside = {
        let j = nested.levels[deepest - 1].j_n;
        (d >= j.0 && d <= j.1) || nested.terminal == Some(d)
    };
    if !inside {
        return Err(Error::Precondition(format!("probe {d:e} lies outside the deepest interval")));
    }
    let terminal = nested.terminal == Some(d);
    let mut alphas = Vec::new();
    let mut dists = Vec::new();
    let mut defects = Vec::new();
    let mut last = None;
    for (m, lvl) in nested.levels.iter().enumerate() {
        let dm = if m + 1 == deepest { d } else { lvl.d_star };
        if m == 0 {
            dists.push(dm.abs());
        }
        let run = loop_run(geo, dm, lvl.base_time, true)?;
        path.extend(run.path);
        let r = run.result;
        alphas.push(r.t1 - lvl.target_time);
        dists.push(r.d1.abs());
        if m + 1 < deepest {
            defects.push(r.d1.abs());
        }
        last = Some(r);
    }
    let r = last.expect("at least one level");
    let last_k = nested.levels[deepest - 1].k;
    let horizon = if terminal && nested.sequence.tail == Tail::Zeros {
        let shot = geo.stable_shot(r.t1)?;
        sample_track(&shot.track, r.t1, &mut path);
        defects.push(r.d1.abs());
        let h = tail_horizon(nested, last_k)?;
        let end = shot.track.span().1;
        let mut t = end;
        while t < h {
            t = (t + 0.5).min(h);
            path.push((t, [0.0, 0.0]));
        }
        h
    } else {
        let h = r.t1 + geo.constants.tb(geo.eps);
        integrate(&geo.sys, geo.eps, r.t1, r.p1, h, &geo.cfg, &mut Recorder(&mut path))?;
        h
    };
    sort_path(&mut path);
    Ok(ShadowOrbit {
        path,
        horizon,
        terminal,
        alphas,
        manifold_distances: dists,
        junction_defects: defects,
    })
}

/// Orbit of a probe, in the frame of the construction's own side.
pub fn shadow_orbit(geo: &Geometry, nested: &NestedIntervals, d: f64) -> Result<ShadowOrbit> {
    match nested.side() {
        TimeSide::Future => forward_orbit(geo, nested, d),
        TimeSide::Past => {
            let rev = geo.reversed()?;
            let mut o = forward_orbit(&rev, &nested.mirrored(), d)?;
            o.path = o.path.into_iter().rev().map(|(t, x)| (-t, x)).collect();
            o.horizon = -o.horizon;
            o.alphas = o.alphas.iter().map(|a| -a).collect();
            Ok(o)
        }
    }
}

fn window_report(
    geo: &Geometry,
    orbit: &ShadowOrbit,
    j: usize,
    (a, b): (f64, f64),
    mode: WindowMode,
    centre: f64,
    alpha: f64,
    truncated: bool,
    limit: f64,
) -> ShadowWindow {
    let samples = orbit.samples(a, b);
    let mut sup = 0.0f64;
    let mut sup_plain = 0.0f64;
    let mut sup_norm = 0.0f64;
    for (t, x) in samples {
        sup_norm = sup_norm.max(norm(x));
        match mode {
            WindowMode::Rest => sup = sup.max(norm(x)),
            WindowMode::Initial | WindowMode::Loop => {
                sup = sup.max(dist(x, geo.gamma.eval(t - centre - alpha)));
                sup_plain = sup_plain.max(dist(x, geo.gamma.eval(t - centre)));
            }
        }
    }
    ShadowWindow {
        j,
        start: a,
        end: b,
        mode,
        truncated,
        sup_distance: sup,
        sup_distance_unshifted: if mode == WindowMode::Rest { sup } else { sup_plain },
        alpha,
        sup_norm,
        pass: sup <= limit,
    }
}

/// Future-frame windows of a probe orbit.
fn forward_windows(geo: &Geometry, nested: &NestedIntervals, orbit: &ShadowOrbit, limit: f64) -> Vec<ShadowWindow> {
    let times = &nested.times;
    let mut out = Vec::new();
    let Some(t1) = times.time(1) else {
        return out;
    };
    let h = orbit.horizon;
    out.push(window_report(geo, orbit, 0, (nested.tau, t1.min(h)), WindowMode::Initial, nested.tau, 0.0, t1 > h, limit));
    let ks: Vec<usize> = nested.levels.iter().map(|l| l.k).collect();
    for j in 1.. {
        let (Some(a), Some(b), Some(c)) = (times.time(2 * j - 1), times.time(2 * j + 1), times.time(2 * j)) else {
            break;
        };
        if a >= h {
            break;
        }
        let Some(sym) = nested.sequence.symbol(j) else {
            break;
        };
        let (mode, alpha) = match ks.iter().position(|&k| k == j) {
            Some(m) => (WindowMode::Loop, orbit.alphas[m]),
            None if sym == 0 => (WindowMode::Rest, 0.0),
            // A `1` beyond the constructed levels is not certified.
            None => break,
        };
        out.push(window_report(geo, orbit, j, (a, b.min(h)), mode, c, alpha, b > h, limit));
    }
    out
}

/// Checks the window properties for the probe with deepest-chart coordinate `d`.
pub fn verify_shadowing(geo: &Geometry, nested: &NestedIntervals, d: f64, c_star: f64) -> Result<ShadowReport> {
    let limit = c_star * geo.eps;
    let (orbit, windows) = match nested.side() {
        TimeSide::Future => {
            let o = forward_orbit(geo, nested, d)?;
            let w = forward_windows(geo, nested, &o, limit);
            (o, w)
        }
        TimeSide::Past => {
            let rev = geo.reversed()?;
            let mirror = nested.mirrored();
            let o = forward_orbit(&rev, &mirror, d)?;
            let w = forward_windows(&rev, &mirror, &o, limit)
                .into_iter()
                .map(|w| ShadowWindow {
                    start: -w.end,
                    end: -w.start,
                    alpha: -w.alpha,
                    ..w
                })
                .collect();
            (o, w)
        }
    };
    let t1 = match nested.side() {
        TimeSide::Future => nested.times.time(1),
        TimeSide::Past => nested.times.time(1).map(|t| -t),
    }
    .ok_or(Error::NotEnoughZeros { needed: 1, found: 0 })?;
    let x_t1_norm = orbit.state(t1).map(norm).unwrap_or(f64::INFINITY);
    let localization_bound = geo.eps.powf(0.5 * (nested.nu + 1.0));
    let manifold_bound = localization_bound;
    let manifold_pass = orbit.manifold_distances.iter().all(|&m| m <= manifold_bound);
    Ok(ShadowReport {
        sequence: nested.sequence.label(),
        side: nested.side(),
        probe: d,
        terminal: orbit.terminal,
        epsilon: geo.eps,
        pass: windows.iter().all(|w| w.pass),
        windows,
        c_star_used: c_star,
        aleph_diameter: super::nested::aleph_diameter(std::slice::from_ref(nested)),
        x_t1_norm,
        localization_bound,
        localization_pass: x_t1_norm <= localization_bound,
        manifold_distances: orbit.manifold_distances,
        manifold_bound,
        manifold_pass,
        junction_defects: orbit.junction_defects,
        horizon: match nested.side() {
            TimeSide::Future => orbit.horizon,
            TimeSide::Past => -orbit.horizon,
        },
    })
}

/// `1.2 · max sup/ε` over the windows of calibration reports.
pub fn calibrate_c_star(reports: &[ShadowReport]) -> f64 {
    1.2 * reports
        .iter()
        .flat_map(|r| r.windows.iter().map(move |w| w.sup_distance / r.epsilon))
        .fold(0.0, f64::max)
}

/// Writes `sequence,probe,j,start,end,mode,alpha,sup_distance,sup_distance_unshifted,limit,pass`.
pub fn write_shadow_csv<W: std::io::Write>(reports: &[ShadowReport], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    let io = |e: csv::Error| Error::Io(e.to_string());
    w.write_record([
        "sequence",
        "probe",
        "j",
        "start",
        "end",
        "mode",
        "alpha",
        "sup_distance",
        "sup_distance_unshifted",
        "limit",
        "pass",
    ])
    .map_err(io)?;
    for r in reports {
        for win in &r.windows {
            let mode = match win.mode {
                WindowMode::Initial => "initial",
                WindowMode::Loop => "loop",
                WindowMode::Rest => "rest",
            };
            w.write_record([
                r.sequence.clone(),
                format!("{:.17e}", r.probe),
                win.j.to_string(),
                format!("{:.17e}", win.start),
                format!("{:.17e}", win.end),
                mode.to_string(),
                format!("{:.17e}", win.alpha),
                format!("{:.17e}", win.sup_distance),
                format!("{:.17e}", win.sup_distance_unshifted),
                format!("{:.17e}", r.c_star_used * r.epsilon),
                win.pass.to_string(),
            ])
            .map_err(io)?;
        }
    }
    w.flush()?;
    Ok(())
}
