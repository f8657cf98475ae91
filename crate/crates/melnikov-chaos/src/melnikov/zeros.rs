//! Zero structure of a Melnikov function on a finite range.

use serde::{Deserialize, Serialize};

use super::Evaluator;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub enum ZeroClass {
    P1Only,
    Minimal,
    Isolated,
    NonDegenerate,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ZeroScanConfig {
    /// Level `|M| = δ·c̄` defining `a↑`, `a↓`.
    pub delta: f64,
    /// Sign bands whose extremum is below this fraction of the largest are
    /// treated as ripples inside a zero cluster.
    pub band_fraction: f64,
    /// Minimal spacing of the alternating sequence.
    pub min_spacing: f64,
    /// Widths `a↓ − a↑` that trend upwards (Kendall τ ≥ 0.6) with a mean growing
    /// by this factor from the first to the second half are not uniform in `j`.
    pub width_growth: f64,
    /// Samples of the modulus model per bracket side.
    pub modulus_samples: usize,
}

impl Default for ZeroScanConfig {
    fn default() -> Self {
        ZeroScanConfig {
            delta: 0.5,
            band_fraction: 0.5,
            min_spacing: 0.1,
            width_growth: 1.25,
            modulus_samples: 8,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ZeroBracket {
    pub beta: f64,
    pub beta_prime: f64,
    /// Centre `T` of the zero set inside the bracket.
    pub zero: f64,
    /// Half-width of the zero set; `0` for a single sign change.
    pub cluster_half_width: f64,
    pub a_up: f64,
    pub a_down: f64,
    /// Sign of `M` at `beta`.
    pub rising: bool,
}

impl ZeroBracket {
    pub fn width(&self) -> f64 {
        self.beta_prime - self.beta
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ZeroStructure {
    pub b_sequence: Vec<f64>,
    /// `M` at each `b_i`.
    pub b_values: Vec<f64>,
    pub c_bar: f64,
    pub delta: f64,
    pub zero_brackets: Vec<ZeroBracket>,
    pub lambda0: f64,
    pub lambda1: f64,
    /// Lower envelope `(h, ω_M(h))` of `|M(T ± h)|`; empty unless zeros are isolated.
    pub omega_m: Vec<(f64, f64)>,
    /// `(zero, M′)` at each zero when the class is non-degenerate.
    pub derivatives: Vec<(f64, f64)>,
    /// Lower bound `C` on `|M′|` at the zeros.
    pub derivative_bound: Option<f64>,
    pub class: ZeroClass,
}

impl ZeroStructure {
    pub fn zeros(&self) -> Vec<f64> {
        self.zero_brackets.iter().map(|b| b.zero).collect()
    }
}

fn bisect(m: &dyn Evaluator, mut a: f64, mut b: f64, f: impl Fn(f64) -> f64, tol: f64) -> Result<f64> {
    let mut fa = f(m.value(a)?);
    for _ in 0..200 {
        if (b - a).abs() <= tol {
            break;
        }
        let c = 0.5 * (a + b);
        let fc = f(m.value(c)?);
        if (fc > 0.0) == (fa > 0.0) {
            a = c;
            fa = fc;
        } else {
            b = c;
        }
    }
    Ok(0.5 * (a + b))
}

/// Kendall rank correlation of `w` against its index.
fn kendall(w: &[f64]) -> f64 {
    let n = w.len();
    let mut s = 0.0;
    for i in 0..n {
        for j in i + 1..n {
            s += (w[j] - w[i]).signum();
        }
    }
    2.0 * s / (n * (n - 1)) as f64
}

fn widths_grow(w: &[f64], factor: f64) -> bool {
    if w.len() < 4 {
        return false;
    }
    let (a, b) = w.split_at(w.len() / 2);
    let mean = |x: &[f64]| x.iter().sum::<f64>() / x.len() as f64;
    kendall(w) >= 0.6 && mean(b) >= factor * mean(a)
}

/// Scans `m` on `[range.0, range.1]` with step `grid_step` and builds the
/// alternating sequence, the zero brackets, and the strongest verifiable class.
pub fn extract_zero_structure(
    m: &dyn Evaluator,
    range: (f64, f64),
    grid_step: f64,
    cfg: &ZeroScanConfig,
) -> Result<ZeroStructure> {
    let (lo, hi) = range;
    if !(grid_step > 0.0) || !(hi > lo) {
        return Err(Error::Precondition(format!("bad scan range [{lo}, {hi}] step {grid_step}")));
    }
    let n = ((hi - lo) / grid_step).round() as usize;
    let grid: Vec<f64> = (0..=n).map(|i| lo + (hi - lo) * i as f64 / n as f64).collect();
    let vals = m.values(&grid)?;
    let noise = 10.0 * m.tolerance();

    // Sign bands and their extrema.
    let mut bands: Vec<(usize, f64)> = Vec::new();
    let mut start = 0;
    for i in 1..=grid.len() {
        if i == grid.len() || (vals[i] > 0.0) != (vals[start] > 0.0) {
            let k = (start..i).max_by(|&a, &b| vals[a].abs().total_cmp(&vals[b].abs())).unwrap();
            // An extremum on the range boundary belongs to a truncated band.
            if k != 0 && k != grid.len() - 1 {
                bands.push((k, vals[k]));
            }
            start = i;
        }
    }
    let top = bands.iter().map(|b| b.1.abs()).fold(0.0, f64::max);
    let mut kept: Vec<(usize, f64)> = Vec::new();
    for &(k, v) in bands.iter().filter(|b| b.1.abs() >= cfg.band_fraction * top && b.1.abs() > noise) {
        match kept.last_mut() {
            Some(last) if (last.1 > 0.0) == (v > 0.0) => {
                if v.abs() > last.1.abs() {
                    *last = (k, v);
                }
            }
            _ => kept.push((k, v)),
        }
    }
    if kept.len() < 2 {
        return Err(Error::NoSignChange { lo, hi });
    }
    for w in kept.windows(2) {
        if grid[w[1].0] - grid[w[0].0] < cfg.min_spacing {
            return Err(Error::SpacingViolation { min_spacing: cfg.min_spacing });
        }
    }
    let c_bar = 0.5 * kept.iter().map(|b| b.1.abs()).fold(f64::INFINITY, f64::min);
    let level = cfg.delta * c_bar;
    let ztol = grid_step * 1e-9;

    let mut brackets = Vec::new();
    for w in kept.windows(2) {
        let (i0, i1) = (w[0].0, w[1].0);
        let rising = w[0].1 < 0.0;
        let changes: Vec<usize> = (i0..i1).filter(|&i| (vals[i] > 0.0) != (vals[i + 1] > 0.0)).collect();
        let first = *changes.first().expect("opposite signs");
        let last = *changes.last().expect("opposite signs");
        let z_first = bisect(m, grid[first], grid[first + 1], |v| v, ztol)?;
        let z_last = if last == first {
            z_first
        } else {
            bisect(m, grid[last], grid[last + 1], |v| v, ztol)?
        };
        let zero = 0.5 * (z_first + z_last);
        let half = 0.5 * (z_last - z_first);
        // Walk outwards from the zero set to the level δ·c̄.
        let up_idx = (i0..=first).rev().find(|&i| vals[i].abs() >= level).expect("|M(β)| ≥ 2c̄");
        let a_up = bisect(m, grid[up_idx], z_first, |v| v.abs() - level, ztol)?;
        let down_idx = (last + 1..=i1).find(|&i| vals[i].abs() >= level).expect("|M(β′)| ≥ 2c̄");
        let a_down = bisect(m, z_last, grid[down_idx], |v| v.abs() - level, ztol)?;
        brackets.push(ZeroBracket {
            beta: grid[i0],
            beta_prime: grid[i1],
            zero,
            cluster_half_width: half,
            a_up,
            a_down,
            rising,
        });
    }
    let lambda0 = brackets.iter().map(|b| b.cluster_half_width).fold(0.0, f64::max);
    let widths: Vec<f64> = brackets.iter().map(|b| b.a_down - b.a_up).collect();
    let lambda1 = widths.iter().copied().fold(0.0, f64::max);
    let uniform = !widths_grow(&widths, cfg.width_growth);
    let minimal = uniform && lambda1 > 2.0 * lambda0;
    let mut class = if minimal { ZeroClass::Minimal } else { ZeroClass::P1Only };

    let mut omega_m = Vec::new();
    if minimal && lambda0 == 0.0 {
        let reach = brackets
            .iter()
            .map(|b| (b.zero - b.a_up).min(b.a_down - b.zero))
            .fold(f64::INFINITY, f64::min);
        let k = cfg.modulus_samples.max(2);
        let mut isolated = true;
        for s in 1..=k {
            let h = reach * s as f64 / k as f64;
            let mut w = f64::INFINITY;
            for b in &brackets {
                w = w.min(m.value(b.zero - h)?.abs()).min(m.value(b.zero + h)?.abs());
            }
            if let Some(&(_, prev)) = omega_m.last() {
                if w <= prev {
                    isolated = false;
                }
            }
            if w <= noise {
                isolated = false;
            }
            omega_m.push((h, w));
        }
        if isolated {
            class = ZeroClass::Isolated;
        } else {
            omega_m.clear();
        }
    }
    let mut derivatives = Vec::new();
    let mut derivative_bound = None;
    if class == ZeroClass::Isolated {
        for b in &brackets {
            let (_, d) = super::verify_nondegenerate_zero(m, b.zero)?;
            derivatives.push((b.zero, d));
        }
        let min_d = derivatives.iter().map(|d| d.1.abs()).fold(f64::INFINITY, f64::min);
        let fd_noise = m.tolerance() / m.tolerance().cbrt();
        if min_d > 100.0 * fd_noise {
            derivative_bound = Some(0.5 * min_d);
            class = ZeroClass::NonDegenerate;
        } else {
            derivatives.clear();
        }
    }
    Ok(ZeroStructure {
        b_sequence: kept.iter().map(|b| grid[b.0]).collect(),
        b_values: kept.iter().map(|b| b.1).collect(),
        c_bar,
        delta: cfg.delta,
        zero_brackets: brackets,
        lambda0,
        lambda1,
        omega_m,
        derivatives,
        derivative_bound,
        class,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::melnikov::Analytic;
    use std::f64::consts::PI;

    #[test]
    fn pure_sine_is_nondegenerate() {
        let f = Analytic(|t: f64| 2.0 * t.sin());
        let z = extract_zero_structure(&f, (0.5, 20.0), 0.01, &ZeroScanConfig::default()).unwrap();
        assert_eq!(z.class, ZeroClass::NonDegenerate);
        for (zero, d) in &z.derivatives {
            assert!(((zero / PI).round() * PI - zero).abs() < 1e-9);
            assert!((d.abs() - 2.0).abs() < 1e-6);
        }
        assert!((z.c_bar - 1.0).abs() < 1e-3);
        for w in z.b_sequence.windows(2) {
            assert!(w[1] - w[0] >= 0.1);
        }
    }

    #[test]
    fn rippled_sine_is_at_least_minimal() {
        let f = Analytic(|t: f64| 3.0 * t.sin() + 2.0 * (10.0 * t).sin());
        let z = extract_zero_structure(&f, (0.0, 40.0), 0.005, &ZeroScanConfig::default()).unwrap();
        assert!(z.class >= ZeroClass::Minimal, "{:?}", z.class);
        assert!(z.c_bar > 0.0);
        for (b, v) in z.b_sequence.iter().zip(&z.b_values) {
            let k = (b / (PI / 2.0)).round() as i64;
            assert!(k % 2 != 0 && (b - k as f64 * PI / 2.0).abs() < 0.5, "b = {b}, M = {v}");
        }
    }

    #[test]
    fn slowing_sine_is_p1_only_with_growing_brackets() {
        let f = Analytic(|t: f64| 3.0 * (1.0 + t * t).cbrt().sin() + 2.0 * (10.0 * t).sin());
        let z = extract_zero_structure(&f, (0.0, 400.0), 0.01, &ZeroScanConfig::default()).unwrap();
        assert_eq!(z.class, ZeroClass::P1Only);
        let w: Vec<f64> = z.zero_brackets.iter().map(|b| b.width()).collect();
        assert!(w.last().unwrap() > &(2.0 * w[1]));
    }

    #[test]
    fn no_sign_change_is_an_error() {
        let f = Analytic(|t: f64| 2.0 + t.sin());
        assert!(matches!(
            extract_zero_structure(&f, (0.0, 10.0), 0.1, &ZeroScanConfig::default()),
            Err(Error::NoSignChange { .. })
        ));
    }
}
