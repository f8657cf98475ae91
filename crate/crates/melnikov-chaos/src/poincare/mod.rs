//! Loop maps: from a point at distance `d` inside the stable leaf on `L⁰`,
//! past the saddle through `L^in`, and back to `L⁰`.
//!
//! The start is represented as the leaf orbit plus a displacement, so `d` may
//! be far below the rounding level of the coordinates. Once the displacement
//! is comparable to the leaf orbit (near the saddle, where both are small) the
//! orbit is integrated directly with relative error control.

mod scaling;

pub use scaling::{fit_slope, verify_scaling, write_scaling_csv, ScalingCheck, ScalingReport, ScalingRow, ScalingSlopes};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::flow::{
    integrate, integrate_deviation, Control, CrossingDirection, CrossingEvent, DeviationStop, Observer, Segment,
    SectionArc,
};
use crate::geometry::Geometry;
use crate::system::Side;
use crate::vec2::{add, norm, scale, V2};

/// Departure threshold `‖δ‖ ≥ θ‖x_leaf‖`.
const DEPARTURE_RATIO: f64 = 1e-2;
/// Interior samples per accepted step in recorded paths.
const PATH_SUBSAMPLES: usize = 4;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LoopResult {
    /// Start displacement and base time.
    pub d: f64,
    pub tau: f64,
    /// `𝒫₁`, `𝒯₁`.
    pub p1: V2,
    pub t1: f64,
    /// `𝒫½ ∈ L^in`, `𝒯½`.
    pub p_half: V2,
    pub t_half: f64,
    /// `d₁ = 𝒟(𝒫₁, P_s(𝒯₁))` (forward) or `𝒟(𝒫₋₁, P_u(𝒯₋₁))` (backward).
    pub d1: f64,
    /// `𝒟(𝒫₁, P_u(𝒯₁))` (forward) or `𝒟(𝒫₋₁, P_s(𝒯₋₁))` (backward).
    pub big_d1: f64,
}

/// A loop together with its sampled orbit.
#[derive(Debug, Clone)]
pub struct LoopRun {
    pub result: LoopResult,
    /// `(t, x(t))` in time order from `τ` to `𝒯₁`.
    pub path: Vec<(f64, V2)>,
}

struct LoopObserver<'a> {
    geo: &'a Geometry,
    d: f64,
    half: Option<CrossingEvent>,
    end: Option<CrossingEvent>,
    failure: Option<String>,
    path: Option<&'a mut Vec<(f64, V2)>>,
}

impl Observer for LoopObserver<'_> {
    fn on_step(&mut self, seg: &Segment) -> Result<Control> {
        if let Some(path) = self.path.as_deref_mut() {
            let t0 = seg.t_start();
            for k in 1..=PATH_SUBSAMPLES {
                let t = t0 + (seg.t_end - t0) * k as f64 / PATH_SUBSAMPLES as f64;
                path.push((t, seg.eval(t)));
            }
        }
        Ok(Control::Continue)
    }

    fn on_crossing(&mut self, ev: &CrossingEvent) -> Result<Control> {
        if self.half.is_none() {
            let inside = self
                .geo
                .lin
                .coordinate(ev.point)
                .is_ok_and(|s| s > 0.0 && s <= self.geo.lin.half_width);
            if ev.direction == CrossingDirection::PlusToMinus && inside {
                self.half = Some(*ev);
                return Ok(Control::Continue);
            }
            self.failure = Some(format!("first crossing at {:?} is not on L^in", ev.point));
            return Ok(Control::Stop);
        }
        if ev.direction == CrossingDirection::MinusToPlus && self.geo.l0.contains(ev.point) {
            self.end = Some(*ev);
        } else {
            self.failure = Some(format!("return crossing at {:?} misses L⁰ (d = {:e})", ev.point, self.d));
        }
        Ok(Control::Stop)
    }
}

/// Forward loop from `Q_s(d, base)`, represented on the leaf orbit through `P_s(base)`.
pub fn loop_run(geo: &Geometry, d: f64, base: f64, record: bool) -> Result<LoopRun> {
    let escaped = |reason: String| Error::EscapedTube { d, reason };
    if !(d.abs() <= geo.delta()) || d == 0.0 {
        return Err(escaped(format!("start displacement outside (0, δ = {}]", geo.delta())));
    }
    let shot = geo.stable_shot(base)?;
    let delta0 = scale(-d, geo.l0.tangent_at(shot.point));
    let mut path = Vec::new();
    if record {
        path.push((base, add(shot.point, delta0)));
    }
    let (_, t_leaf_end) = shot.track.span();
    let dev = integrate_deviation(
        &geo.sys,
        geo.eps,
        Side::Plus,
        &shot.track,
        base,
        delta0,
        t_leaf_end,
        DEPARTURE_RATIO,
        &geo.cfg,
        |t, xr, dl| {
            if record {
                path.push((t, add(xr, dl)));
            }
        },
    )?;
    if dev.stop == DeviationStop::ReachedEnd {
        return Err(escaped("no departure from the stable leaf".into()));
    }
    let (t_dep, x_dep) = (dev.t, dev.state());
    if record {
        path.retain(|&(t, _)| t <= t_dep);
    }
    let flight = (geo.constants.big_sigma_hi + 1.0) * d.abs().ln().abs() + 60.0;
    let mut obs = LoopObserver {
        geo,
        d,
        half: None,
        end: None,
        failure: None,
        path: if record { Some(&mut path) } else { None },
    };
    match integrate(&geo.sys, geo.eps, t_dep, x_dep, t_dep + flight, &geo.cfg, &mut obs) {
        Ok(_) => {}
        Err(Error::LeftDomain { t, point }) => {
            return Err(escaped(format!("left the domain at t = {t}, point {point:?}")));
        }
        Err(e) => return Err(e),
    }
    if let Some(reason) = obs.failure {
        return Err(escaped(reason));
    }
    let (half, end) = match (obs.half, obs.end) {
        (Some(h), Some(e)) => (h, e),
        _ => return Err(escaped(format!("no return to L⁰ within {flight:.1} time units"))),
    };
    let ps = geo.stable_endpoint(end.time)?;
    let pu = geo.unstable_endpoint(end.time)?;
    let result = LoopResult {
        d,
        tau: base,
        p1: end.point,
        t1: end.time,
        p_half: half.point,
        t_half: half.time,
        d1: geo.l0.directed_distance(end.point, ps)?,
        big_d1: geo.l0.directed_distance(end.point, pu)?,
    };
    if record {
        if let Some(last) = path.last_mut() {
            if last.0 == end.time {
                last.1 = end.point;
            }
        }
    }
    Ok(LoopRun { result, path })
}

/// `(𝒫₁, 𝒯₁, 𝒫½, 𝒯½, d₁, D₁)` from `Q_s(d, τ)`.
pub fn loop_forward(geo: &Geometry, d: f64, tau: f64) -> Result<LoopResult> {
    Ok(loop_run(geo, d, tau, false)?.result)
}

/// Backward loop from `Q_u(d, τ)`: the forward loop of the reversed system.
pub fn loop_backward_run(geo: &Geometry, d: f64, tau: f64, record: bool) -> Result<LoopRun> {
    let rev = geo.reversed()?;
    let run = loop_run(&rev, d, -tau, record)?;
    let r = run.result;
    let mut path: Vec<(f64, V2)> = run.path.into_iter().map(|(t, x)| (-t, x)).collect();
    path.reverse();
    Ok(LoopRun {
        result: LoopResult {
            tau,
            t1: -r.t1,
            t_half: -r.t_half,
            ..r
        },
        path,
    })
}

/// `(𝒫₋₁, 𝒯₋₁, 𝒫₋½, 𝒯₋½, d₋₁, D₋₁)` from `Q_u(d, τ)`.
pub fn loop_backward(geo: &Geometry, d: f64, tau: f64) -> Result<LoopResult> {
    Ok(loop_backward_run(geo, d, tau, false)?.result)
}

/// `d₁(d, τ)`; its sign follows `−M(𝒯₁)` away from the zeros of `M`.
pub fn signed_return(geo: &Geometry, d: f64, tau: f64) -> Result<f64> {
    Ok(loop_forward(geo, d, tau)?.d1)
}

/// Largest `‖x(t)‖` of a path on `[a, b]`.
pub fn sup_norm_on(path: &[(f64, V2)], a: f64, b: f64) -> f64 {
    path.iter()
        .filter(|(t, _)| *t >= a && *t <= b)
        .map(|(_, x)| norm(*x))
        .fold(0.0, f64::max)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{compute_endpoints, point_at_distance, GeometryConfig, InnerSide};
    use crate::homoclinic::HomoclinicMethod;
    use crate::system::{duffing, DuffingParams, Region};
    use crate::vec2::dist;

    fn fixture(eps: f64) -> Geometry {
        let sys = duffing(&DuffingParams::default());
        Geometry::new(&sys, eps, HomoclinicMethod::ClosedForm, GeometryConfig::default()).unwrap()
    }

    #[test]
    fn unperturbed_loop_scaling() {
        let g = fixture(0.0);
        let r = loop_forward(&g, 1e-4, 0.0).unwrap();
        assert!(r.t_half > 0.0 && r.t_half < r.t1);
        let ln = (1e-4f64).ln().abs();
        // Flight time is Σ^fwd |ln d| plus a bounded offset.
        assert!((r.t1 - 0.75 * ln).abs() < 3.0, "T1 = {}", r.t1);
        assert!(r.big_d1 > 0.0 && (r.big_d1 / 1e-4 - 1.0).abs() < 0.5, "D1 = {}", r.big_d1);
        assert!((r.d1 - r.big_d1).abs() < 1e-10);
    }

    #[test]
    fn tiny_displacements_are_resolved() {
        let g = fixture(0.0);
        let a = loop_forward(&g, 1e-40, 0.0).unwrap();
        let b = loop_forward(&g, 2e-40, 0.0).unwrap();
        // 𝒯₁ decreases by Σ^fwd ln 2 when d doubles.
        assert!(((a.t1 - b.t1) - 0.75 * 2f64.ln()).abs() < 1e-3, "{} {}", a.t1, b.t1);
        assert!(norm(a.p_half) < 1e-18);
    }

    #[test]
    fn regions_along_the_loop() {
        let g = fixture(1e-2);
        let run = loop_run(&g, 1e-6, 0.2, true).unwrap();
        let r = run.result;
        for &(t, x) in &run.path {
            if t > r.tau + 1e-6 && t < r.t_half - 1e-6 {
                assert_eq!(g.sys.region(x), Region::Plus, "t = {t}");
            } else if t > r.t_half + 1e-6 && t < r.t1 - 1e-6 {
                assert_eq!(g.sys.region(x), Region::Minus, "t = {t}");
            }
        }
        assert!(run.path.windows(2).all(|w| w[0].0 <= w[1].0));
    }

    #[test]
    fn outer_side_escapes() {
        let g = fixture(1e-2);
        assert!(matches!(loop_forward(&g, -1e-3, 0.0), Err(Error::EscapedTube { .. })));
        assert!(matches!(loop_forward(&g, 2.0 * g.delta(), 0.0), Err(Error::EscapedTube { .. })));
    }

    #[test]
    fn return_point_is_the_unstable_inner_point() {
        let g = fixture(1e-2);
        let r = loop_forward(&g, 1e-5, 0.3).unwrap();
        let ep = compute_endpoints(&g, r.t1).unwrap();
        let q = point_at_distance(&ep, &g.l0, r.big_d1, InnerSide::UnstableInner).unwrap();
        assert!(dist(q, r.p1) < 1e-8, "{q:?} vs {:?}", r.p1);
    }

    #[test]
    fn backward_loop_undoes_the_forward_loop() {
        let g = fixture(0.0);
        let f = loop_forward(&g, 1e-5, 0.0).unwrap();
        let b = loop_backward(&g, f.big_d1, f.t1).unwrap();
        assert!((b.big_d1 / 1e-5 - 1.0).abs() < 1e-6, "{}", b.big_d1);
        assert!((b.t1 - 0.0).abs() < 1e-6);
    }

    #[test]
    fn sign_of_the_return_follows_the_melnikov_function() {
        let g = fixture(1e-2);
        // M peaks near phase 0.25 and dips near 0.75 (period 1).
        for (target, sign) in [(0.75, 1.0), (0.25, -1.0)] {
            let probe = loop_forward(&g, 1e-6, 0.0).unwrap();
            let tau = target - probe.t1.fract();
            let r = loop_forward(&g, 1e-6, tau).unwrap();
            assert!(r.d1 * sign > 0.0, "target {target}: d1 = {}", r.d1);
        }
    }
}
