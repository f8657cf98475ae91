//! The unperturbed homoclinic loop `γ`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::flow::{integrate, Control, IntegratorConfig, Observer, Segment, Track};
use crate::poly::Poly2;
use crate::system::{DuffingLoop, PiecewiseSystem, PolyField, Region, SaddleData, Side};
use crate::vec2::{add, dist, dot, norm, perp, scale, sub, V2};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum HomoclinicMethod {
    ClosedForm,
    EnergyLevel,
    Shooting,
}

#[derive(Debug, Clone)]
enum Repr {
    Closed(DuffingLoop),
    Sampled { minus: Track, plus: Track },
}

#[derive(Debug, Clone)]
pub struct HomoclinicOrbit {
    repr: Repr,
    pub method: HomoclinicMethod,
    /// `γ(0)`, the crossing point on the switching curve.
    pub crossing_point: V2,
    /// `c₀*` with `‖γ⁻(t)‖ ≤ (c₀*/4)e^{λ_u⁻ t}` and `‖γ⁺(t)‖ ≤ (c₀*/4)e^{λ_s⁺ t}`.
    pub decay_constant: f64,
    pub lambda_u_minus: f64,
    pub lambda_s_plus: f64,
    /// `|t|` beyond which `‖γ(t)‖ < 1e-8`.
    pub horizon: f64,
}

fn closed_form(c: &DuffingLoop, t: f64) -> V2 {
    let t = if c.reversed { -t } else { t };
    let k = if t <= 0.0 { c.kappa_minus } else { c.kappa_plus };
    let rk = k.sqrt();
    let s = (rk * t).cosh().recip();
    let th = (rk * t).tanh();
    [2f64.sqrt() * s, -(2.0 * k).sqrt() * s * th]
}

impl HomoclinicOrbit {
    pub fn eval(&self, t: f64) -> V2 {
        match &self.repr {
            Repr::Closed(c) => closed_form(c, t),
            Repr::Sampled { minus, plus } => {
                let (track, rate) = if t <= 0.0 {
                    (minus, self.lambda_u_minus)
                } else {
                    (plus, self.lambda_s_plus)
                };
                if let Some(p) = track.eval(t) {
                    return p;
                }
                let (te, pe) = track.start().expect("nonempty arc");
                scale((rate * (t - te)).exp(), pe)
            }
        }
    }

    /// `γ̇(t) = f±(γ(t))`.
    pub fn velocity(&self, sys: &PiecewiseSystem, t: f64) -> V2 {
        let side = if t < 0.0 { Side::Minus } else { Side::Plus };
        sys.field_of(side).eval(self.eval(t))
    }

    /// Closed polygon of `n` samples on `[−horizon, horizon]` plus the origin.
    pub fn polyline(&self, n: usize) -> Vec<V2> {
        let n = n.max(8);
        let mut pts = Vec::with_capacity(n + 1);
        pts.push([0.0, 0.0]);
        for i in 0..n {
            let t = -self.horizon + 2.0 * self.horizon * (i as f64) / ((n - 1) as f64);
            pts.push(self.eval(t));
        }
        pts
    }

    pub fn diameter(&self) -> f64 {
        let pts = self.polyline(400);
        let mut d: f64 = 0.0;
        for (i, a) in pts.iter().enumerate() {
            for b in &pts[i + 1..] {
                d = d.max(dist(*a, *b));
            }
        }
        d
    }

    /// `min ‖γ(t)‖` over `|t| ≤ half_width`.
    pub fn min_norm_on(&self, half_width: f64) -> f64 {
        (0..=2000)
            .map(|i| {
                let t = -half_width + 2.0 * half_width * f64::from(i) / 2000.0;
                norm(self.eval(t))
            })
            .fold(f64::INFINITY, f64::min)
    }

    fn finish(repr: Repr, method: HomoclinicMethod, saddle: &SaddleData) -> HomoclinicOrbit {
        let lu = saddle.lambda_u_minus;
        let ls = saddle.lambda_s_plus;
        let horizon = (1e8f64).ln() / lu.min(-ls) + 2.0;
        let mut orbit = HomoclinicOrbit {
            repr,
            method,
            crossing_point: [0.0, 0.0],
            decay_constant: 0.0,
            lambda_u_minus: lu,
            lambda_s_plus: ls,
            horizon,
        };
        orbit.crossing_point = orbit.eval(0.0);
        let mut c: f64 = 0.0;
        for i in 0..=4000 {
            let t = horizon * f64::from(i) / 4000.0;
            c = c.max(4.0 * norm(orbit.eval(-t)) * (lu * t).exp());
            c = c.max(4.0 * norm(orbit.eval(t)) * (-ls * t).exp());
        }
        orbit.decay_constant = c;
        orbit
    }
}

/// First integral `H` with `H_y = P`, `H_x = −Q` for a divergence-free field `(P, Q)`.
pub fn first_integral(f: &PolyField) -> Option<Poly2> {
    if !f.is_divergence_free() {
        return None;
    }
    let a = f.x.integrate_y();
    let rest = f.y.scaled(-1.0).plus(&a.d_dx().scaled(-1.0));
    Some(a.plus(&rest.at_y_zero().integrate_x()))
}

/// Orbit from a seed on an eigenvector up to its first switching crossing.
struct Shot {
    hit_point: V2,
    track: Track,
}

/// Records the steps of an orbit and stops it at its first switching crossing.
#[derive(Default)]
pub(crate) struct ShotRecorder {
    pub(crate) track: Track,
    pub(crate) hit: Option<(f64, V2)>,
}

impl Observer for ShotRecorder {
    fn on_step(&mut self, seg: &Segment) -> Result<Control> {
        self.track.push(seg.step);
        Ok(Control::Continue)
    }

    fn on_crossing(&mut self, ev: &crate::flow::CrossingEvent) -> Result<Control> {
        self.hit = Some((ev.time, ev.point));
        Ok(Control::Stop)
    }
}

fn shoot(sys: &PiecewiseSystem, seed: V2, dir: f64, cfg: &IntegratorConfig) -> Result<Option<Shot>> {
    let mut rec = ShotRecorder::default();
    integrate(sys, 0.0, 0.0, seed, dir * cfg.max_time.min(400.0), cfg, &mut rec)?;
    Ok(rec.hit.map(|(t, p)| Shot {
        hit_point: p,
        track: rec.track.shifted(-t),
    }))
}

/// Seed radius on the eigenvectors; the quadratic seed error stays below 1e-12.
const SEED_RADIUS: f64 = 1e-6;

fn check_pattern(sys: &PiecewiseSystem, orbit: &HomoclinicOrbit) -> Result<()> {
    for i in 1..=200 {
        let t = orbit.horizon * f64::from(i) / 200.0;
        if sys.region(orbit.eval(-t)) != Region::Minus {
            return Err(Error::WrongRegionPattern(format!("γ({}) is not in the minus region", -t)));
        }
        if sys.region(orbit.eval(t)) != Region::Plus {
            return Err(Error::WrongRegionPattern(format!("γ({t}) is not in the plus region")));
        }
    }
    let p0 = orbit.crossing_point;
    let g = sys.switching.value(p0).abs();
    if g > 1e-8 {
        return Err(Error::WrongRegionPattern(format!("|G(γ(0))| = {g:e}")));
    }
    for side in [Side::Minus, Side::Plus] {
        if sys.transversality(side, 0.0, p0, 0.0) <= 0.0 {
            return Err(Error::WrongRegionPattern(format!("{side} field is not transversal at γ(0)")));
        }
    }
    Ok(())
}

pub fn compute_homoclinic(
    sys: &PiecewiseSystem,
    saddle: &SaddleData,
    method: HomoclinicMethod,
    cfg: &IntegratorConfig,
) -> Result<HomoclinicOrbit> {
    let shots = |r0: f64| -> Result<Option<(Shot, Shot)>> {
        let a = shoot(sys, scale(r0, saddle.v_u_minus), 1.0, cfg)?;
        let b = shoot(sys, scale(r0, saddle.v_s_plus), -1.0, cfg)?;
        Ok(a.zip(b))
    };
    let build = |a: Shot, b: Shot, p0: V2| -> HomoclinicOrbit {
        let mut o = HomoclinicOrbit::finish(
            Repr::Sampled {
                minus: a.track,
                plus: b.track,
            },
            method,
            saddle,
        );
        o.crossing_point = p0;
        o
    };
    let orbit = match method {
        HomoclinicMethod::ClosedForm => {
            let c = sys.closed_form.ok_or_else(|| {
                Error::Precondition(format!("no closed-form loop is known for '{}'", sys.label))
            })?;
            HomoclinicOrbit::finish(Repr::Closed(c), method, saddle)
        }
        HomoclinicMethod::EnergyLevel => {
            let (hm, hp) = match (first_integral(&sys.f_minus), first_integral(&sys.f_plus)) {
                (Some(a), Some(b)) => (a, b),
                _ => {
                    return Err(Error::Precondition(
                        "energy-level tracing needs divergence-free halves".into(),
                    ))
                }
            };
            let (a, b) = shots(SEED_RADIUS)?.ok_or(Error::NoHomoclinic { mismatch: f64::INFINITY })?;
            // Newton along the switching curve onto H⁻ = 0, re-projecting on G = 0.
            let mut p = a.hit_point;
            for _ in 0..30 {
                let n = sys.switching.gradient(p);
                let tdir = perp(n);
                let slope = dot(hm.gradient(p), tdir);
                if slope == 0.0 {
                    break;
                }
                p = add(p, scale(-hm.eval(p) / slope, tdir));
                let n = sys.switching.gradient(p);
                p = sub(p, scale(sys.switching.value(p) / dot(n, n), n));
            }
            let level = hp.eval(p).abs() / norm(hp.gradient(p)).max(1e-300);
            let mismatch = level.max(dist(p, b.hit_point));
            if mismatch > 1e-9 {
                return Err(Error::NoHomoclinic { mismatch });
            }
            build(a, b, p)
        }
        HomoclinicMethod::Shooting => {
            let (a, b) = shots(SEED_RADIUS)?.ok_or(Error::NoHomoclinic { mismatch: f64::INFINITY })?;
            let mismatch = dist(a.hit_point, b.hit_point);
            if mismatch > 1e-9 {
                return Err(Error::NoHomoclinic { mismatch });
            }
            let p = scale(0.5, add(a.hit_point, b.hit_point));
            build(a, b, p)
        }
    };
    check_pattern(sys, &orbit)?;
    Ok(orbit)
}
