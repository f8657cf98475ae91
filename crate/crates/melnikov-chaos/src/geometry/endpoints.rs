//! Endpoints of the perturbed leaves on `L⁰` and the first-order splitting check.

use std::io::Write;

use serde::{Deserialize, Serialize};

use super::{EndpointMethod, Geometry, Section};
use crate::error::{Error, Result};
use crate::flow::{integrate, Control, CrossingDirection, CrossingEvent, Observer};
use crate::melnikov::Evaluator;
use crate::vec2::V2;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SeedLabel {
    /// First crossing lies between the saddle and `γ(0)`: the orbit turned inside the loop.
    Inner,
    /// First crossing elsewhere, or the orbit left the domain.
    Outer,
    /// No crossing within the horizon.
    Decay,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ManifoldEndpoints {
    pub tau: f64,
    pub epsilon: f64,
    pub p_s: V2,
    pub p_u: V2,
    pub bracket_width: f64,
    pub method: EndpointMethod,
}

impl ManifoldEndpoints {
    /// `𝒟(P_s, P_u)`.
    pub fn splitting(&self, section: &Section) -> Result<f64> {
        section.directed_distance(self.p_s, self.p_u)
    }
}

#[derive(Default)]
struct FirstCrossing {
    hit: Option<CrossingEvent>,
}

impl Observer for FirstCrossing {
    fn on_crossing(&mut self, ev: &CrossingEvent) -> Result<Control> {
        self.hit = Some(*ev);
        Ok(Control::Stop)
    }
}

pub(crate) fn classify_seed(geo: &Geometry, tau: f64, q: V2, horizon: f64) -> Result<SeedLabel> {
    let mut obs = FirstCrossing::default();
    match integrate(&geo.sys, geo.eps, tau, q, tau + horizon, &geo.cfg, &mut obs) {
        Ok(_) => {}
        Err(Error::LeftDomain { .. }) => return Ok(SeedLabel::Outer),
        Err(e) => return Err(e),
    }
    Ok(match obs.hit {
        None => SeedLabel::Decay,
        Some(ev) => {
            let inner = ev.direction == CrossingDirection::PlusToMinus
                && geo
                    .lin
                    .coordinate(ev.point)
                    .is_ok_and(|s| s > 0.0 && s < geo.l0.anchor_arclength);
            if inner {
                SeedLabel::Inner
            } else {
                SeedLabel::Outer
            }
        }
    })
}

const HORIZON_DOUBLINGS: usize = 3;

fn label_with_doubling(geo: &Geometry, tau: f64, q: V2, horizon: f64) -> Result<SeedLabel> {
    let mut h = horizon;
    for _ in 0..=HORIZON_DOUBLINGS {
        let l = classify_seed(geo, tau, q, h)?;
        if l != SeedLabel::Decay {
            return Ok(l);
        }
        h *= 2.0;
    }
    Ok(SeedLabel::Decay)
}

/// Target bracket width `ε^{(1+ν₀)/σ̲}/10`.
pub(crate) fn bracket_target(geo: &Geometry) -> f64 {
    if geo.eps == 0.0 {
        return 1e-12;
    }
    (geo.constants.localization(geo.eps, geo.constants.nu0) / 10.0).max(1e-14)
}

/// Stable endpoint by bisection of the seed labels along `L⁰(√ε)`.
pub(crate) fn classifier_stable_endpoint(geo: &Geometry, tau: f64) -> Result<(V2, f64)> {
    let w = geo.eps.sqrt().max(1e-2).min(geo.delta());
    let horizon = 2.0 * geo.constants.k0 * geo.eps.max(1e-4).ln().abs();
    let target = bracket_target(geo);
    let (mut lo, mut hi) = (-w, w);
    let label = |s: f64| -> Result<SeedLabel> { label_with_doubling(geo, tau, geo.l0.point_at(s)?, horizon) };
    if label(lo)? != SeedLabel::Inner || label(hi)? != SeedLabel::Outer {
        return Err(Error::NoBracket { tau });
    }
    while hi - lo > target {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        match label(mid)? {
            SeedLabel::Inner => lo = mid,
            SeedLabel::Outer => hi = mid,
            SeedLabel::Decay => {
                return Ok((geo.l0.point_at(mid)?, hi - lo));
            }
        }
    }
    Ok((geo.l0.point_at(0.5 * (lo + hi))?, hi - lo))
}

/// `P_s(τ)` and `P_u(τ)`; the unstable endpoint comes from the reversed system.
pub fn compute_endpoints(geo: &Geometry, tau: f64) -> Result<ManifoldEndpoints> {
    let method = geo.settings.endpoint_method;
    let (p_s, p_u, bracket_width) = match method {
        EndpointMethod::Classifier => {
            let rev = geo.reversed()?;
            let (ps, ws) = classifier_stable_endpoint(geo, tau)?;
            let (pu, wu) = classifier_stable_endpoint(&rev, -tau)?;
            (ps, pu, ws.max(wu))
        }
        EndpointMethod::Shooting => (
            geo.stable_endpoint(tau)?,
            geo.unstable_endpoint(tau)?,
            1e-12,
        ),
    };
    Ok(ManifoldEndpoints {
        tau,
        epsilon: geo.eps,
        p_s,
        p_u,
        bracket_width,
        method,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InnerSide {
    StableInner,
    UnstableInner,
}

/// `Q_s(d, τ)` or `Q_u(d, τ)`: the point of `L⁰` at distance `d` from the
/// endpoint towards the origin-end.
pub fn point_at_distance(ep: &ManifoldEndpoints, section: &Section, d: f64, side: InnerSide) -> Result<V2> {
    if !(d > 0.0 && d <= section.half_width) {
        return Err(Error::OutOfSection {
            d,
            half_width: section.half_width,
        });
    }
    let base = match side {
        InnerSide::StableInner => ep.p_s,
        InnerSide::UnstableInner => ep.p_u,
    };
    let s = section.coordinate(base)? - d;
    section.point_at(s).map_err(|_| Error::OutOfSection {
        d,
        half_width: section.half_width,
    })
}

/// `ĉ` in `𝒟(P_s(τ), P_u(τ)) ≈ ĉ ε M(τ)`, fixed at the phase where `|M|` peaks.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DistanceCalibration {
    pub tau_star: f64,
    pub melnikov_star: f64,
    pub measured_star: f64,
    pub c_hat: f64,
}

const CALIBRATION_GRID: usize = 64;
const CALIBRATION_FLOOR: f64 = 1e-6;

/// Locates `τ*` maximizing `|M|` on `[lo, hi]` and fits `ĉ` there.
pub fn calibrate_distance(geo: &Geometry, m: &dyn Evaluator, lo: f64, hi: f64) -> Result<DistanceCalibration> {
    let taus: Vec<f64> = (0..=CALIBRATION_GRID)
        .map(|i| lo + (hi - lo) * i as f64 / CALIBRATION_GRID as f64)
        .collect();
    let vals = m.values(&taus)?;
    let (imax, _) = vals
        .iter()
        .enumerate()
        .fold((0, 0.0f64), |acc, (i, v)| if v.abs() > acc.1 { (i, v.abs()) } else { acc });
    let h = (hi - lo) / CALIBRATION_GRID as f64;
    let (mut a, mut b) = (taus[imax] - h, taus[imax] + h);
    let phi = 0.5 * (5f64.sqrt() - 1.0);
    for _ in 0..60 {
        let c = b - phi * (b - a);
        let d = a + phi * (b - a);
        if m.value(c)?.abs() > m.value(d)?.abs() {
            b = d;
        } else {
            a = c;
        }
    }
    let tau_star = 0.5 * (a + b);
    let melnikov_star = m.value(tau_star)?;
    if geo.eps == 0.0 || melnikov_star.abs() < CALIBRATION_FLOOR {
        return Err(Error::CalibrationDegenerate {
            value: melnikov_star * geo.eps,
        });
    }
    let measured_star = compute_endpoints(geo, tau_star)?.splitting(&geo.l0)?;
    Ok(DistanceCalibration {
        tau_star,
        melnikov_star,
        measured_star,
        c_hat: measured_star / (geo.eps * melnikov_star),
    })
}

/// `(measured, predicted)` splitting at `τ`.
pub fn predict_distance(
    geo: &Geometry,
    cal: &DistanceCalibration,
    m: &dyn Evaluator,
    tau: f64,
) -> Result<(f64, f64)> {
    let measured = compute_endpoints(geo, tau)?.splitting(&geo.l0)?;
    Ok((measured, cal.c_hat * geo.eps * m.value(tau)?))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EndpointRow {
    pub tau: f64,
    pub p_s: V2,
    pub p_u: V2,
    pub distance: f64,
    pub melnikov: f64,
    pub predicted: f64,
}

/// Writes `tau, Ps_x, Ps_y, Pu_x, Pu_y, D, M, predicted`.
pub fn write_endpoints_csv<W: Write>(rows: &[EndpointRow], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    let io = |e: csv::Error| Error::Io(e.to_string());
    w.write_record(["tau", "Ps_x", "Ps_y", "Pu_x", "Pu_y", "D", "M", "predicted"])
        .map_err(io)?;
    for r in rows {
        w.write_record(
            [r.tau, r.p_s[0], r.p_s[1], r.p_u[0], r.p_u[1], r.distance, r.melnikov, r.predicted]
                .iter()
                .map(|v| format!("{v:.17e}")),
        )
        .map_err(io)?;
    }
    w.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::super::tests::fixture;
    use super::*;
    use crate::vec2::dist;

    #[test]
    fn unperturbed_endpoints_coincide_with_the_loop() {
        let g = fixture(0.0);
        let ep = compute_endpoints(&g, 0.4).unwrap();
        assert!(dist(ep.p_s, g.gamma.crossing_point) <= 2.0 * ep.bracket_width);
        assert!(dist(ep.p_u, g.gamma.crossing_point) <= 2.0 * ep.bracket_width);
        assert!(ep.splitting(&g.l0).unwrap().abs() <= 2.0 * ep.bracket_width);
    }

    #[test]
    fn classifier_agrees_with_shooting() {
        let g = fixture(1e-2);
        let ep = compute_endpoints(&g, 0.1).unwrap();
        assert!(ep.bracket_width <= bracket_target(&g));
        let ps = g.stable_endpoint(0.1).unwrap();
        let pu = g.unstable_endpoint(0.1).unwrap();
        assert!(dist(ep.p_s, ps) <= 2.0 * ep.bracket_width + 1e-12, "{:?} {:?}", ep.p_s, ps);
        assert!(dist(ep.p_u, pu) <= 2.0 * ep.bracket_width + 1e-12, "{:?} {:?}", ep.p_u, pu);
    }

    #[test]
    fn inner_points() {
        let g = fixture(0.0);
        let ep = compute_endpoints(&g, 0.0).unwrap();
        let q = point_at_distance(&ep, &g.l0, 1e-3, InnerSide::StableInner).unwrap();
        assert!((g.l0.directed_distance(q, ep.p_s).unwrap() - 1e-3).abs() < 1e-12);
        assert!(q[0] < ep.p_s[0]);
        assert!(point_at_distance(&ep, &g.l0, 2.0 * g.delta(), InnerSide::StableInner).is_err());
        assert!(point_at_distance(&ep, &g.l0, 0.0, InnerSide::UnstableInner).is_err());
    }

    #[test]
    fn csv_header() {
        let mut buf = Vec::new();
        write_endpoints_csv(&[], &mut buf).unwrap();
        assert_eq!(String::from_utf8(buf).unwrap(), "tau,Ps_x,Ps_y,Pu_x,Pu_y,D,M,predicted\n");
    }
}
