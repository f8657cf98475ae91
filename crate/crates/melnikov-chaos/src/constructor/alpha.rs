//! Bounds on the time shifts `α = 𝒯_n − 𝒮_n` according to the zero class of `M`.

use serde::{Deserialize, Serialize};

use super::nested::NestedIntervals;
use crate::error::{Error, Result};
use crate::geometry::Geometry;
use crate::melnikov::{Evaluator, ZeroClass, ZeroStructure};

/// `C_M` with `|𝒟(P_s, P_u)(τ) − ĉεM(τ)| ≤ ĉ C_M ε²` on the sample `taus`.
pub fn fit_remainder_constant(geo: &Geometry, m: &dyn Evaluator, c_hat: f64, taus: &[f64]) -> Result<f64> {
    if geo.eps == 0.0 || taus.is_empty() {
        return Err(Error::Precondition("remainder fit needs eps > 0 and sample times".into()));
    }
    let vals = m.values(taus)?;
    let mut worst = 0.0f64;
    for (&t, &mv) in taus.iter().zip(&vals) {
        let measured = geo.splitting(t)?;
        worst = worst.max((measured - c_hat * geo.eps * mv).abs() / (c_hat * geo.eps * geo.eps));
    }
    Ok(worst)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AlphaLevel {
    pub sequence: String,
    pub n: usize,
    pub alpha_min: f64,
    pub alpha_max: f64,
    pub bound: f64,
    pub pass: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AlphaCheck {
    pub class: ZeroClass,
    pub epsilon: f64,
    /// `ω_T(ε) = ε^{(1+ν)/σ̲}/(ĉε) + C_M ε`, the bound on `|M(𝒯_n)|`.
    pub omega_t: f64,
    pub bound_kind: String,
    pub max_abs_alpha: f64,
    pub levels: Vec<AlphaLevel>,
    pub pass: bool,
}

/// Smallest `h` with `ω_M(h) ≥ w` on the tabulated envelope.
fn invert_envelope(omega_m: &[(f64, f64)], w: f64) -> Option<f64> {
    let i = omega_m.iter().position(|&(_, v)| v >= w)?;
    if i == 0 {
        return Some(omega_m[0].0);
    }
    let (h0, v0) = omega_m[i - 1];
    let (h1, v1) = omega_m[i];
    Some(h0 + (h1 - h0) * (w - v0) / (v1 - v0))
}

/// Checks `|α|` on every level of `results` against the bound of `zs.class`.
pub fn alpha_bound_check(results: &[NestedIntervals], zs: &ZeroStructure, c_hat: f64, remainder: f64) -> AlphaCheck {
    let eps = results.first().map(|r| r.epsilon).unwrap_or(0.0);
    let loc = results.first().map(|r| r.localization).unwrap_or(0.0);
    let omega_t = if eps > 0.0 { loc / (c_hat * eps) + remainder * eps } else { 0.0 };
    let class_bound = match zs.class {
        ZeroClass::NonDegenerate => zs.derivative_bound.map(|c| (2.0 * omega_t / c, "2ω_T/C")),
        ZeroClass::Isolated => invert_envelope(&zs.omega_m, omega_t).map(|h| (h, "ω_M⁻¹(ω_T)")),
        ZeroClass::Minimal => Some((zs.lambda1, "Λ¹")),
        ZeroClass::P1Only => None,
    };
    let mut levels = Vec::new();
    for r in results {
        for (n, l) in r.levels.iter().enumerate() {
            let bound = match class_bound {
                Some((b, _)) => b,
                None => r.schedule.as_ref().map(|s| s.brackets[n + 1].width()).unwrap_or(0.0),
            };
            let worst = l.alpha_min.abs().max(l.alpha_max.abs());
            levels.push(AlphaLevel {
                sequence: r.sequence.label(),
                n: n + 1,
                alpha_min: l.alpha_min,
                alpha_max: l.alpha_max,
                bound,
                pass: worst <= bound,
            });
        }
    }
    let max_abs_alpha = levels
        .iter()
        .map(|l| l.alpha_min.abs().max(l.alpha_max.abs()))
        .fold(0.0, f64::max);
    AlphaCheck {
        class: zs.class,
        epsilon: eps,
        omega_t,
        bound_kind: class_bound.map(|(_, k)| k).unwrap_or("B_2k").to_string(),
        max_abs_alpha,
        pass: levels.iter().all(|l| l.pass),
        levels,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn envelope_inversion() {
        let env = [(0.0, 0.0), (0.1, 0.2), (0.2, 0.4)];
        assert!((invert_envelope(&env, 0.3).unwrap() - 0.15).abs() < 1e-15);
        assert!(invert_envelope(&env, 1.0).is_none());
    }
}
