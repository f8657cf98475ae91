use std::cell::Cell;

use serde::{Deserialize, Serialize};

use super::dopri::{fixed_step, Dopri};
use super::{CrossingDirection, CrossingEvent, IntegratorConfig, Segment, Trajectory};
use crate::error::{Error, Result};
use crate::system::{PiecewiseSystem, Side};
use crate::vec2::{norm, V2};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Control {
    Continue,
    Stop,
}

/// Receives accepted steps and located crossings during [`integrate`].
pub trait Observer {
    fn on_step(&mut self, _seg: &Segment) -> Result<Control> {
        Ok(Control::Continue)
    }

    fn on_crossing(&mut self, _ev: &CrossingEvent) -> Result<Control> {
        Ok(Control::Continue)
    }
}

impl Observer for () {}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum TimeDirection {
    Forward,
    Backward,
}

impl TimeDirection {
    pub fn sign(self) -> f64 {
        match self {
            TimeDirection::Forward => 1.0,
            TimeDirection::Backward => -1.0,
        }
    }
}

#[derive(Debug, Clone, Copy)]
pub struct RunOutcome {
    pub t: f64,
    pub x: V2,
    pub side: Side,
    /// True when an observer asked to stop before `t_end`.
    pub stopped: bool,
    pub steps: usize,
}

/// Side an orbit enters when it starts on the switching curve.
fn starting_side(sys: &PiecewiseSystem, eps: f64, t: f64, x: V2, dir: f64, cfg: &IntegratorConfig) -> Result<Side> {
    let g = sys.switching.value(x);
    if g.abs() > cfg.scaled_event_tol(x) {
        return Ok(if g > 0.0 { Side::Plus } else { Side::Minus });
    }
    let fp = sys.vector_field(Side::Plus, t, x, eps);
    let fm = sys.vector_field(Side::Minus, t, x, eps);
    if norm(fp) == 0.0 && norm(fm) == 0.0 {
        return Ok(if g >= 0.0 { Side::Plus } else { Side::Minus });
    }
    let tp = dir * sys.transversality(Side::Plus, t, x, eps);
    let tm = dir * sys.transversality(Side::Minus, t, x, eps);
    let tol = cfg.scaled_event_tol(x);
    if tp < 0.0 && tm > 0.0 {
        return Err(Error::SlidingEncountered {
            t,
            point: x,
            plus: tp * dir,
            minus: tm * dir,
        });
    }
    if tp > tol && tm > tol {
        Ok(Side::Plus)
    } else if tp < -tol && tm < -tol {
        Ok(Side::Minus)
    } else {
        Err(Error::TangencyUnresolved {
            t,
            point: x,
            transversality: if tp.abs() < tm.abs() { tp } else { tm },
        })
    }
}

/// Locates the crossing inside `[t0, t1]`: a coarse root of the dense
/// interpolant, then Illinois iterations on fresh steps from the step start.
fn locate_crossing<F: Fn(f64, &[f64; 2]) -> [f64; 2] + Copy>(
    sys: &PiecewiseSystem,
    rhs: F,
    seg: &Segment,
    t1: f64,
    x1: V2,
    cfg: &IntegratorConfig,
) -> (f64, V2) {
    let s = seg.side.sign();
    let t0 = seg.step.t0;
    let y0 = seg.step.y0;
    let psi_dense = |t: f64| s * sys.switching.value(seg.step.eval(t));
    let psi_fresh = |t: f64| {
        let p = fixed_step(rhs, t0, y0, t - t0);
        (s * sys.switching.value(p), p)
    };

    // Coarse bisection/secant on the interpolant.
    let (mut a, mut b) = (t0, t1);
    let (mut fa, mut fb) = (psi_dense(a).max(f64::MIN_POSITIVE), psi_dense(b));
    let mut side_flag = 0i8;
    for _ in 0..60 {
        let mut c = if fa != fb { b - fb * (b - a) / (fb - fa) } else { 0.5 * (a + b) };
        let (lo, hi) = if a < b { (a, b) } else { (b, a) };
        if !(c > lo && c < hi) {
            c = 0.5 * (a + b);
        }
        let fc = psi_dense(c);
        if fc > 0.0 {
            a = c;
            fa = fc;
            if side_flag == 1 {
                fb *= 0.5;
            }
            side_flag = 1;
        } else {
            b = c;
            fb = fc;
            if side_flag == -1 {
                fa *= 0.5;
            }
            side_flag = -1;
        }
        if (b - a).abs() <= 1e-3 * (t1 - t0).abs() {
            break;
        }
    }

    // Polish with exact steps from the segment start.
    let (mut a, mut b) = (a, b);
    let (mut fa, mut pa) = psi_fresh(a);
    let (mut fb, mut pb) = psi_fresh(b);
    if !(fa > 0.0 && fb <= 0.0) {
        a = t0;
        fa = psi_fresh(t0).0.max(f64::MIN_POSITIVE);
        pa = y0;
        b = t1;
        fb = s * sys.switching.value(x1);
        pb = x1;
    }
    side_flag = 0;
    for _ in 0..200 {
        if fa.abs() <= cfg.scaled_event_tol(pa) {
            return (a, pa);
        }
        if fb.abs() <= cfg.scaled_event_tol(pb) {
            return (b, pb);
        }
        let mut c = if fa != fb { b - fb * (b - a) / (fb - fa) } else { 0.5 * (a + b) };
        let (lo, hi) = if a < b { (a, b) } else { (b, a) };
        if !(c > lo && c < hi) {
            c = 0.5 * (a + b);
            if !(c > lo && c < hi) {
                break;
            }
        }
        let (fc, pc) = psi_fresh(c);
        if fc > 0.0 {
            a = c;
            fa = fc;
            pa = pc;
            if side_flag == 1 {
                fb *= 0.5;
            }
            side_flag = 1;
        } else {
            b = c;
            fb = fc;
            pb = pc;
            if side_flag == -1 {
                fa *= 0.5;
            }
            side_flag = -1;
        }
    }
    if fa.abs() <= fb.abs() {
        (a, pa)
    } else {
        (b, pb)
    }
}

/// Integrates from `(t0, x0)` towards `t_end`, handling every crossing of the
/// switching curve, and reports steps and crossings to `obs`.
pub fn integrate<O: Observer + ?Sized>(
    sys: &PiecewiseSystem,
    eps: f64,
    t0: f64,
    x0: V2,
    t_end: f64,
    cfg: &IntegratorConfig,
    obs: &mut O,
) -> Result<RunOutcome> {
    if t_end == t0 {
        return Err(Error::Precondition("integration interval is empty".into()));
    }
    if !sys.domain.contains(x0) {
        return Err(Error::LeftDomain { t: t0, point: x0 });
    }
    let dir = (t_end - t0).signum();
    let side = Cell::new(starting_side(sys, eps, t0, x0, dir, cfg)?);
    let rhs = |t: f64, y: &[f64; 2]| sys.vector_field(side.get(), t, *y, eps);
    let mut stepper = Dopri::new(rhs, t0, x0, dir, cfg.rel_tol, cfg.abs_tol, cfg.max_step);
    let mut steps = 0usize;

    loop {
        if steps >= cfg.max_steps {
            return Err(Error::StepLimit { t: stepper.t });
        }
        let step = stepper.step(t_end)?;
        steps += 1;
        let (t1, x1) = (step.t1(), step.y1);
        let cur = side.get();
        let mut seg = Segment {
            side: cur,
            step,
            t_end: t1,
        };
        let g1 = cur.sign() * sys.switching.value(x1);

        if g1 <= 0.0 {
            let (te, pe) = locate_crossing(sys, rhs, &seg, t1, x1, cfg);
            if !sys.domain.contains(pe) {
                return Err(Error::LeftDomain { t: te, point: pe });
            }
            seg.t_end = te;
            let tm = sys.transversality(Side::Minus, te, pe, eps);
            let tp = sys.transversality(Side::Plus, te, pe, eps);
            if dir * tp < 0.0 && dir * tm > 0.0 {
                return Err(Error::SlidingEncountered {
                    t: te,
                    point: pe,
                    plus: tp,
                    minus: tm,
                });
            }
            let (t_in, t_out) = match cur {
                Side::Minus => (tm, tp),
                Side::Plus => (tp, tm),
            };
            let incoming = -cur.sign() * dir * t_in;
            let outgoing = -cur.sign() * dir * t_out;
            let tol = cfg.scaled_event_tol(pe);
            if incoming < tol || outgoing < tol {
                return Err(Error::TangencyUnresolved {
                    t: te,
                    point: pe,
                    transversality: incoming.min(outgoing),
                });
            }
            let next = cur.other();
            let ev = CrossingEvent {
                time: te,
                point: pe,
                transversality_minus: tm,
                transversality_plus: tp,
                direction: match next {
                    Side::Plus => CrossingDirection::MinusToPlus,
                    Side::Minus => CrossingDirection::PlusToMinus,
                },
            };
            let c1 = obs.on_step(&seg)?;
            let c2 = obs.on_crossing(&ev)?;
            if c1 == Control::Stop || c2 == Control::Stop {
                return Ok(RunOutcome {
                    t: te,
                    x: pe,
                    side: next,
                    stopped: true,
                    steps,
                });
            }
            side.set(next);
            stepper.reset(te, pe);
            continue;
        }

        if !sys.domain.contains(x1) {
            return Err(Error::LeftDomain { t: t1, point: x1 });
        }
        if obs.on_step(&seg)? == Control::Stop {
            return Ok(RunOutcome {
                t: t1,
                x: x1,
                side: cur,
                stopped: true,
                steps,
            });
        }
        if t1 == t_end {
            return Ok(RunOutcome {
                t: t1,
                x: x1,
                side: cur,
                stopped: false,
                steps,
            });
        }
    }
}

struct Recorder {
    traj: Trajectory,
}

impl Observer for Recorder {
    fn on_step(&mut self, seg: &Segment) -> Result<Control> {
        self.traj.samples.push((seg.t_end, seg.end_point()));
        self.traj.segments.push(*seg);
        Ok(Control::Continue)
    }

    fn on_crossing(&mut self, ev: &CrossingEvent) -> Result<Control> {
        self.traj.events.push(*ev);
        if let Some(last) = self.traj.samples.last_mut() {
            if last.0 == ev.time {
                last.1 = ev.point;
            }
        }
        Ok(Control::Continue)
    }
}

/// Full trajectory from `(tau, xi)` to `t_end`.
pub fn advance(
    sys: &PiecewiseSystem,
    eps: f64,
    tau: f64,
    xi: V2,
    t_end: f64,
    cfg: &IntegratorConfig,
) -> Result<Trajectory> {
    let mut rec = Recorder {
        traj: Trajectory {
            samples: vec![(tau, xi)],
            events: Vec::new(),
            epsilon: eps,
            start: (tau, xi),
            segments: Vec::new(),
        },
    };
    if norm(sys.f_minus.eval(xi)) == 0.0 && norm(sys.f_plus.eval(xi)) == 0.0 && norm(sys.forcing.eval(tau, xi)) == 0.0 && xi == [0.0, 0.0] {
        // The saddle itself: a constant orbit.
        rec.traj.samples.push((t_end, xi));
        return Ok(rec.traj);
    }
    integrate(sys, eps, tau, xi, t_end, cfg, &mut rec)?;
    Ok(rec.traj)
}

/// An arc of the switching curve that can serve as a section.
pub trait SectionArc {
    fn contains(&self, p: V2) -> bool;
}

struct SectionStop<'a, S: SectionArc + ?Sized> {
    section: &'a S,
    hit: Option<(f64, V2)>,
}

impl<S: SectionArc + ?Sized> Observer for SectionStop<'_, S> {
    fn on_crossing(&mut self, ev: &CrossingEvent) -> Result<Control> {
        if self.section.contains(ev.point) {
            self.hit = Some((ev.time, ev.point));
            return Ok(Control::Stop);
        }
        Ok(Control::Continue)
    }
}

/// First transversal arrival at `section` in the given time direction.
pub fn flow_to_section<S: SectionArc + ?Sized>(
    sys: &PiecewiseSystem,
    eps: f64,
    tau: f64,
    xi: V2,
    section: &S,
    direction: TimeDirection,
    cfg: &IntegratorConfig,
) -> Result<(f64, V2)> {
    if sys.switching.value(xi).abs() <= cfg.scaled_event_tol(xi) && section.contains(xi) {
        return Err(Error::Precondition("start point already lies on the target section".into()));
    }
    let mut obs = SectionStop { section, hit: None };
    let t_end = tau + direction.sign() * cfg.max_time;
    let out = integrate(sys, eps, tau, xi, t_end, cfg, &mut obs)?;
    obs.hit.ok_or(Error::SectionMissed { t: out.t })
}
