//! Symbol space metric, the shift, and the finite-horizon check that the
//! constructed orbits conjugate the time map to the shift.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::constructor::{shadow_orbit, NestedIntervals, ShadowOrbit, SymbolSequence, Tail, TimeSide};
use crate::error::{Error, Result};
use crate::geometry::Geometry;
use crate::homoclinic::HomoclinicOrbit;
use crate::vec2::{norm, V2};

/// Drops the `k` symbols nearest to the present. The tail is preserved.
pub fn shift(e: &SymbolSequence, k: usize) -> SymbolSequence {
    let prefix: Vec<u8> = e.prefix.iter().skip(k).copied().collect();
    let prefix = match (prefix.is_empty(), e.tail) {
        (true, Tail::Zeros) => vec![0],
        _ => prefix,
    };
    SymbolSequence { prefix, ..e.clone() }
}

/// `Σ_m |e′_m − e″_m| / 2^{|m|+1}` over `|m| ≥ 1`.
///
/// Positions where either sequence is unspecified contribute nothing, so the
/// value is a lower bound for every completion of the sequences.
pub fn distance(a: &SymbolSequence, b: &SymbolSequence) -> Result<f64> {
    if a.side != b.side {
        return Err(Error::Precondition("symbol sequences lie on different sides".into()));
    }
    let len = a.prefix.len().max(b.prefix.len());
    let mut sum = 0.0;
    for m in 1..=len {
        if let (Some(x), Some(y)) = (a.symbol(m), b.symbol(m)) {
            if x != y {
                sum += 0.5f64.powi(m as i32 + 1);
            }
        }
    }
    Ok(sum)
}

/// Largest possible distance on one side.
pub const DIAMETER: f64 = 0.5;

/// Window classification levels.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Readback {
    /// `c*ε`: a `0` window stays this close to the origin.
    pub zero_limit: f64,
    /// `K = min_{|t|≤Λ¹} ‖γ(t)‖ / 4`.
    pub separation: f64,
    /// `K − c*ε`: a `1` window reaches at least this far from the origin.
    pub one_limit: f64,
    /// `(c*ε + K)/2`, reported for reference.
    pub threshold: f64,
}

impl Readback {
    pub fn new(gamma: &HomoclinicOrbit, lambda1: f64, c_star: f64, eps: f64) -> Result<Self> {
        let n = 64;
        let separation = (0..=n)
            .map(|i| norm(gamma.eval(-lambda1 + 2.0 * lambda1 * i as f64 / n as f64)))
            .fold(f64::INFINITY, f64::min)
            / 4.0;
        let zero_limit = c_star * eps;
        let one_limit = separation - zero_limit;
        if one_limit <= zero_limit {
            return Err(Error::Precondition(format!(
                "readback levels overlap: c*ε = {zero_limit:e}, K = {separation:e}"
            )));
        }
        Ok(Readback {
            zero_limit,
            separation,
            one_limit,
            threshold: 0.5 * (zero_limit + separation),
        })
    }

    /// Symbol of a window from `sup ‖x‖` over it.
    pub fn classify(&self, window: usize, sup: f64) -> Result<u8> {
        if sup <= self.zero_limit {
            Ok(0)
        } else if sup >= self.one_limit {
            Ok(1)
        } else {
            Err(Error::ReadbackAmbiguous { window, value: sup })
        }
    }
}

/// `Ψ` applied to the orbit segment that starts at `T_{2k}`: symbols of the
/// windows `[T_{2j−1}, T_{2j+1}]` for `j = k+1, …, last`.
fn read_symbols(
    orbit: &ShadowOrbit,
    windows: &[(f64, f64)],
    k: usize,
    last: usize,
    rb: &Readback,
) -> Result<Vec<u8>> {
    (k + 1..=last)
        .map(|j| {
            let (a, b) = windows[j - 1];
            let sup = orbit.samples(a, b).iter().map(|(_, x)| norm(*x)).fold(0.0, f64::max);
            rb.classify(j, sup)
        })
        .collect()
}

fn word(s: &[u8]) -> String {
    s.iter().map(|&b| char::from(b'0' + b)).collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConjugacyStep {
    pub k: usize,
    /// `ξ_k = x(T_{2k})`.
    pub xi: V2,
    /// `Ψ_k(ξ_k)`.
    pub readback: String,
    /// `σ(Ψ_k(ξ_k))`.
    pub shifted: String,
    /// `Ψ_{k+1}(F_k(ξ_k))`.
    pub image_readback: String,
    pub commutes: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConjugacyPoint {
    pub sequence: String,
    pub probe: f64,
    pub terminal: bool,
    /// Number of complete windows on the orbit horizon.
    pub certified_windows: usize,
    /// `Ψ_0(ξ_0)` agrees with the prescribed symbols.
    pub consistent: bool,
    pub steps: Vec<ConjugacyStep>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConjugacyReport {
    pub epsilon: f64,
    pub c_star: f64,
    pub k_max: usize,
    pub readback: Readback,
    pub points: Vec<ConjugacyPoint>,
    pub pass: bool,
}

fn check_point(geo: &Geometry, nested: &NestedIntervals, d: f64, k_max: usize, rb: &Readback) -> Result<ConjugacyPoint> {
    let orbit = shadow_orbit(geo, nested, d)?;
    let times = &nested.times;
    let mut windows = Vec::new();
    for j in 1.. {
        let (Some(a), Some(b)) = (times.time(2 * j - 1), times.time(2 * j + 1)) else {
            break;
        };
        if b > orbit.horizon || nested.sequence.symbol(j).is_none() {
            break;
        }
        windows.push((a, b));
    }
    let last = windows.len();
    let psi0 = read_symbols(&orbit, &windows, 0, last, rb)?;
    let consistent = psi0.iter().enumerate().all(|(i, &s)| nested.sequence.symbol(i + 1) == Some(s));
    let mut steps = Vec::new();
    for k in 0..last.min(k_max + 1) {
        let t = times.time(2 * k).ok_or_else(|| Error::Precondition(format!("no time T_{}", 2 * k)))?;
        let xi = orbit.state(t).ok_or_else(|| Error::Precondition(format!("orbit misses t = {t}")))?;
        let psi = read_symbols(&orbit, &windows, k, last, rb)?;
        // `F_k(ξ_k)` is the orbit point at `T_{2k+2}`; its readback starts one window later.
        let image = read_symbols(&orbit, &windows, k + 1, last, rb)?;
        let shifted = psi[1..].to_vec();
        steps.push(ConjugacyStep {
            k,
            xi,
            readback: word(&psi),
            shifted: word(&shifted),
            image_readback: word(&image),
            commutes: shifted == image,
        });
    }
    Ok(ConjugacyPoint {
        sequence: nested.sequence.label(),
        probe: d,
        terminal: nested.terminal == Some(d),
        certified_windows: last,
        consistent,
        steps,
    })
}

/// Checks `Ψ_{k+1} ∘ F_k = σ ∘ Ψ_k` for `k ≤ k_max` at every probe point of
/// every future-side construction in `family`.
pub fn semi_conjugacy_check(
    geo: &Geometry,
    family: &[NestedIntervals],
    lambda1: f64,
    c_star: f64,
    k_max: usize,
) -> Result<ConjugacyReport> {
    if family.iter().any(|n| n.side() != TimeSide::Future) {
        return Err(Error::Precondition("semi-conjugacy check runs on future-side constructions".into()));
    }
    let rb = Readback::new(&geo.gamma, lambda1, c_star, geo.eps)?;
    let jobs: Vec<(&NestedIntervals, f64)> =
        family.iter().flat_map(|n| n.probe_points().into_iter().map(move |d| (n, d))).collect();
    let points = jobs
        .into_par_iter()
        .map(|(n, d)| check_point(geo, n, d, k_max, &rb))
        .collect::<Result<Vec<_>>>()?;
    let pass = points.iter().all(|p| p.consistent && p.steps.iter().all(|s| s.commutes));
    Ok(ConjugacyReport {
        epsilon: geo.eps,
        c_star,
        k_max,
        readback: rb,
        points,
        pass,
    })
}
