//! Leaves of the perturbed stable manifold integrated backward from a seed on
//! the saddle eigenvector, and an interpolated table of their endpoints.

use rayon::prelude::*;

use super::Geometry;
use crate::error::{Error, Result};
use crate::flow::{integrate, SectionArc, Track};
use crate::homoclinic::ShotRecorder;
use crate::system::Temporal;
use crate::vec2::{dot, norm, scale, V2};

/// Stable leaf orbit whose first switching crossing (backward in time) is at `time`.
#[derive(Debug, Clone)]
pub struct LeafShot {
    pub time: f64,
    /// `P_s(time)`.
    pub point: V2,
    /// The orbit on `[time, time + flight]`, where it reaches the seed radius.
    pub track: Track,
}

const SECANT_ITERATIONS: usize = 12;
const LAGRANGE_POINTS: i64 = 8;

fn seed_and_lead(geo: &Geometry, r0: f64) -> (V2, f64) {
    let ls = geo.saddle.lambda_s_plus.abs();
    let tc = 0.5 * geo.gamma.horizon;
    let gc = geo.gamma.eval(tc);
    let v = geo.saddle.v_s_plus;
    let v = if dot(v, gc) < 0.0 { scale(-1.0, v) } else { v };
    (scale(r0, v), tc + (norm(gc) / r0).ln() / ls)
}

fn shoot(geo: &Geometry, t_far: f64, seed: V2, lead: f64) -> Result<(f64, V2, Track)> {
    let mut rec = ShotRecorder::default();
    let t_end = t_far - 2.0 * lead - 50.0;
    let out = integrate(&geo.sys, geo.eps, t_far, seed, t_end, &geo.cfg, &mut rec)?;
    let (t, p) = rec.hit.ok_or(Error::SectionMissed { t: out.t })?;
    if !geo.l0.contains(p) {
        return Err(Error::SectionMissed { t });
    }
    Ok((t, p, rec.track))
}

/// Secant iteration on the seed time so that the leaf crosses `L⁰` at `t`;
/// the residual mismatch (a few ulps) is removed by shifting the track.
pub(super) fn stable_shot(geo: &Geometry, t: f64, r0: f64) -> Result<LeafShot> {
    let (seed, lead) = seed_and_lead(geo, r0);
    let tol = 1e-12 * t.abs().max(1.0);
    let mut a = t + lead;
    let (ha, mut pa, mut tra) = shoot(geo, a, seed, lead)?;
    let mut fa = ha - t;
    let mut b = a - fa;
    for _ in 0..SECANT_ITERATIONS {
        if fa.abs() <= tol {
            break;
        }
        let (hb, pb, trb) = shoot(geo, b, seed, lead)?;
        let fb = hb - t;
        let next = if fb != fa { b - fb * (b - a) / (fb - fa) } else { b - fb };
        a = b;
        fa = fb;
        pa = pb;
        tra = trb;
        b = next;
    }
    if fa.abs() > 1e3 * tol {
        return Err(Error::SectionMissed { t });
    }
    Ok(LeafShot {
        time: t,
        point: pa,
        track: tra.shifted(-fa),
    })
}

fn is_autonomous(geo: &Geometry) -> bool {
    geo.eps == 0.0
        || geo.sys.forcing.is_zero()
        || geo
            .sys
            .forcing
            .terms
            .iter()
            .all(|term| matches!(term.temporal, Temporal::Const))
}

/// `(node spacing, number of nodes per period)`.
fn grid(geo: &Geometry) -> (f64, Option<i64>) {
    match geo.sys.forcing.period() {
        Some(p) => {
            let n = ((p / geo.settings.node_spacing).round() as i64).max(16);
            (p / n as f64, Some(n))
        }
        None => (geo.settings.node_spacing, None),
    }
}

fn nodes(geo: &Geometry, idx: &[i64], h: f64) -> Result<Vec<V2>> {
    let missing: Vec<i64> = {
        let cache = geo.nodes.lock().expect("node cache");
        let mut m: Vec<i64> = idx.iter().copied().filter(|k| !cache.contains_key(k)).collect();
        m.sort_unstable();
        m.dedup();
        m
    };
    let fresh: Vec<(i64, V2)> = missing
        .par_iter()
        .map(|&k| stable_shot(geo, k as f64 * h, geo.settings.table_radius).map(|s| (k, s.point)))
        .collect::<Result<_>>()?;
    let mut cache = geo.nodes.lock().expect("node cache");
    cache.extend(fresh);
    Ok(idx.iter().map(|k| cache[k]).collect())
}

/// Fills every node of one forcing period; a no-op for aperiodic forcing.
pub(super) fn fill_period(geo: &Geometry) -> Result<()> {
    if is_autonomous(geo) {
        return nodes(geo, &[0], 1.0).map(|_| ());
    }
    if let (h, Some(n)) = grid(geo) {
        let all: Vec<i64> = (0..n).collect();
        nodes(geo, &all, h)?;
    }
    Ok(())
}

/// Eight-point Lagrange interpolation of the leaf-shot endpoints.
pub(super) fn interpolated_endpoint(geo: &Geometry, t: f64) -> Result<V2> {
    if is_autonomous(geo) {
        return Ok(nodes(geo, &[0], 1.0)?[0]);
    }
    let (h, per) = grid(geo);
    let u = t / h;
    let k0 = u.floor() as i64;
    let ks: Vec<i64> = (k0 - LAGRANGE_POINTS / 2 + 1..=k0 + LAGRANGE_POINTS / 2).collect();
    let keys: Vec<i64> = match per {
        Some(n) => ks.iter().map(|k| k.rem_euclid(n)).collect(),
        None => ks.clone(),
    };
    let vals = nodes(geo, &keys, h)?;
    if let Some(i) = ks.iter().position(|&k| k as f64 == u) {
        return Ok(vals[i]);
    }
    let mut out = [0.0, 0.0];
    for (i, &ki) in ks.iter().enumerate() {
        let mut w = 1.0;
        for &kj in &ks {
            if kj != ki {
                w *= (u - kj as f64) / (ki - kj) as f64;
            }
        }
        out[0] += w * vals[i][0];
        out[1] += w * vals[i][1];
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::super::tests::fixture;
    use crate::vec2::dist;

    #[test]
    fn unperturbed_shot_hits_the_loop_crossing() {
        let g = fixture(0.0);
        let s = g.stable_shot(0.3).unwrap();
        assert!(dist(s.point, g.gamma.crossing_point) < 1e-10, "{:?}", s.point);
        let later = s.track.eval(1.3).unwrap();
        assert!(dist(later, g.gamma.eval(1.0)) < 1e-9);
    }

    #[test]
    fn interpolation_matches_direct_shots() {
        let g = fixture(1e-2);
        for t in [0.123, 0.77, 3.4] {
            let direct = g.stable_shot(t).unwrap().point;
            let table = g.stable_endpoint(t).unwrap();
            assert!(dist(direct, table) < 1e-12, "t = {t}: {direct:?} vs {table:?}");
            assert!(direct[1] == 0.0 || direct[1].abs() < 1e-13);
        }
        let a = g.stable_endpoint(0.25).unwrap();
        let b = g.stable_endpoint(1.25).unwrap();
        assert!(dist(a, b) < 1e-13);
    }
}
