use serde::{Deserialize, Serialize};

use super::SaddleData;
use crate::error::{Error, Result};
use crate::homoclinic::HomoclinicOrbit;
use crate::vec2::{dist_to_segment, scale, V2};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Scenario {
    S1,
    S2,
    S3,
    S4,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ScenarioClass {
    pub scenario: Scenario,
    pub sliding_near_origin: bool,
}

/// Number of loop samples in the membership polygon.
pub const POLYGON_POINTS: usize = 4000;

/// Even-odd rule against a closed polygon.
pub fn inside_polygon(poly: &[V2], p: V2) -> bool {
    let mut inside = false;
    let n = poly.len();
    let mut j = n - 1;
    for i in 0..n {
        let (a, b) = (poly[i], poly[j]);
        if (a[1] > p[1]) != (b[1] > p[1]) {
            let x = a[0] + (p[1] - a[1]) / (b[1] - a[1]) * (b[0] - a[0]);
            if p[0] < x {
                inside = !inside;
            }
        }
        j = i;
    }
    inside
}

fn distance_to_polygon(poly: &[V2], p: V2) -> f64 {
    let n = poly.len();
    (0..n)
        .map(|i| dist_to_segment(p, poly[i], poly[(i + 1) % n]))
        .fold(f64::INFINITY, f64::min)
}

fn probe_inside(poly: &[V2], dir: V2, rho: f64) -> Result<bool> {
    let mut verdict = None;
    for k in 0..3 {
        let d = rho / f64::from(1 << k);
        let p = scale(d, dir);
        let gap = distance_to_polygon(poly, p);
        if gap <= 1e-6 * d {
            return Err(Error::AmbiguousMembership { probe: p, distance: gap });
        }
        let inside = inside_polygon(poly, p);
        match verdict {
            None => verdict = Some(inside),
            Some(v) if v != inside => {
                return Err(Error::AmbiguousMembership { probe: p, distance: gap })
            }
            _ => {}
        }
    }
    Ok(verdict.unwrap_or(false))
}

pub fn classify_scenario_with_radius(
    saddle: &SaddleData,
    gamma: &HomoclinicOrbit,
    rho: f64,
) -> Result<ScenarioClass> {
    let poly = gamma.polyline(POLYGON_POINTS);
    let u_in = probe_inside(&poly, saddle.v_u_plus, rho)?;
    let s_in = probe_inside(&poly, saddle.v_s_minus, rho)?;
    let scenario = match (u_in, s_in) {
        (false, false) => Scenario::S1,
        (true, true) => Scenario::S2,
        (true, false) => Scenario::S3,
        (false, true) => Scenario::S4,
    };
    Ok(ScenarioClass {
        scenario,
        sliding_near_origin: matches!(scenario, Scenario::S3 | Scenario::S4),
    })
}

/// Classifies with the default probe radius, `1e-3` of the loop diameter.
pub fn classify_scenario(saddle: &SaddleData, gamma: &HomoclinicOrbit) -> Result<ScenarioClass> {
    classify_scenario_with_radius(saddle, gamma, 1e-3 * gamma.diameter())
}
