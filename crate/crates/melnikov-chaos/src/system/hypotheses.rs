use serde::{Deserialize, Serialize};

use super::{PiecewiseSystem, Region, SaddleData, TOL_ZERO};
use crate::homoclinic::HomoclinicOrbit;
use crate::vec2::{add, dot, norm, V2};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Diagnostic {
    pub hypothesis: String,
    pub measured: f64,
    pub threshold: f64,
    pub note: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HypothesisReport {
    pub f0: bool,
    pub f1: bool,
    pub f2: bool,
    pub k: bool,
    pub g_ok: bool,
    pub diagnostics: Vec<Diagnostic>,
}

impl HypothesisReport {
    pub fn all(&self) -> bool {
        self.f0 && self.f1 && self.f2 && self.k && self.g_ok
    }
}

fn angle(v: V2) -> f64 {
    v[1].atan2(v[0])
}

/// Counter-clockwise angle from `from` to `to`, in `[0, 2π)`.
fn ccw(from: V2, to: V2) -> f64 {
    (angle(to) - angle(from)).rem_euclid(2.0 * std::f64::consts::PI)
}

/// Whether `v` lies in the sector swept counter-clockwise from `v_u⁻` to `v_u⁺`.
pub(crate) fn in_first_sector(s: &SaddleData, v: V2) -> bool {
    ccw(s.v_u_minus, v) < ccw(s.v_u_minus, s.v_u_plus)
}

/// Sampled times used for the forcing checks.
const T_SAMPLES: [f64; 7] = [-3.1, -1.0, -0.37, 0.0, 0.25, 1.7, 12.9];

pub fn check_hypotheses(
    sys: &PiecewiseSystem,
    saddle: &SaddleData,
    gamma: Option<&HomoclinicOrbit>,
) -> HypothesisReport {
    let mut diagnostics = Vec::new();
    let mut push = |tag: &str, measured: f64, threshold: f64, note: &str| {
        diagnostics.push(Diagnostic {
            hypothesis: tag.into(),
            measured,
            threshold,
            note: note.into(),
        })
    };
    let origin = [0.0, 0.0];

    let g0 = sys.switching.value(origin).abs();
    let fm = norm(sys.f_minus.eval(origin));
    let fp = norm(sys.f_plus.eval(origin));
    let saddle_ok = saddle.lambda_s_minus < 0.0
        && saddle.lambda_u_minus > 0.0
        && saddle.lambda_s_plus < 0.0
        && saddle.lambda_u_plus > 0.0;
    let f0 = g0 <= TOL_ZERO && fm <= TOL_ZERO && fp <= TOL_ZERO && saddle_ok;
    if g0 > TOL_ZERO {
        push("F0", g0, TOL_ZERO, "|G(0)|: origin off the switching curve");
    }
    if fm.max(fp) > TOL_ZERO {
        push("F0", fm.max(fp), TOL_ZERO, "max |f(0)|");
    }
    if !saddle_ok {
        push("F0", 0.0, 0.0, "eigenvalue signs");
    }

    let grad = sys.switching.gradient(origin);
    let signs = [
        -dot(grad, saddle.v_u_minus),
        dot(grad, saddle.v_u_plus),
        -dot(grad, saddle.v_s_minus),
        dot(grad, saddle.v_s_plus),
    ];
    let worst = signs.iter().cloned().fold(f64::INFINITY, f64::min);
    let f1 = worst > 0.0;
    if !f1 {
        push("F1", worst, 0.0, "smallest signed ∇G(0)·v over the four eigenvectors");
    }

    let f2 = in_first_sector(saddle, saddle.v_s_plus) != in_first_sector(saddle, saddle.v_s_minus);
    if !f2 {
        push(
            "F2",
            ccw(saddle.v_u_minus, saddle.v_s_plus),
            ccw(saddle.v_u_minus, saddle.v_u_plus),
            "stable directions on the same side of the unstable polyline",
        );
    }

    let mut g_at_origin: f64 = 0.0;
    for &t in &T_SAMPLES {
        g_at_origin = g_at_origin.max(norm(sys.forcing.eval(t, origin)));
    }
    let mut g_ok = g_at_origin <= TOL_ZERO;
    if !g_ok {
        push("G", g_at_origin, TOL_ZERO, "max |g(t, 0)| over sampled t");
    }

    let k = match gamma {
        None => {
            push("K", 0.0, 0.0, "deferred: no homoclinic attached");
            false
        }
        Some(h) => {
            let p0 = h.crossing_point;
            let trans_m = dot(sys.switching.gradient(p0), sys.f_minus.eval(p0));
            let trans_p = dot(sys.switching.gradient(p0), sys.f_plus.eval(p0));
            let mut ok = trans_m > 0.0 && trans_p > 0.0;
            if !ok {
                push("K", trans_m.min(trans_p), 0.0, "∇G·f± at the crossing point");
            }
            let mut bad = 0usize;
            for i in 1..400 {
                let t = 0.05 * f64::from(i);
                if sys.region(h.eval(-t)) != Region::Minus || sys.region(h.eval(t)) != Region::Plus {
                    bad += 1;
                }
            }
            if bad > 0 {
                ok = false;
                push("K", bad as f64, 0.0, "samples of the loop in the wrong region");
            }

            // Boundedness of g on samples of B(Γ, 1).
            let mut g_max: f64 = 0.0;
            for p in h.polyline(200) {
                for k in 0..8 {
                    let a = f64::from(k) * std::f64::consts::FRAC_PI_4;
                    let q = add(p, [a.cos(), a.sin()]);
                    for &t in &T_SAMPLES {
                        let v = norm(sys.forcing.eval(t, q));
                        g_max = g_max.max(if v.is_finite() { v } else { f64::INFINITY });
                    }
                }
            }
            if !(g_max < 1e6) {
                g_ok = false;
                push("G", g_max, 1e6, "sup |g| on samples of the unit tube around the loop");
            }
            ok
        }
    };

    HypothesisReport {
        f0,
        f1,
        f2,
        k,
        g_ok,
        diagnostics,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::system::{compute_saddle_data, duffing, DuffingParams};

    #[test]
    fn fixture_passes_without_homoclinic_except_k() {
        let sys = duffing(&DuffingParams::default());
        let s = compute_saddle_data(&sys).unwrap();
        let r = check_hypotheses(&sys, &s, None);
        assert!(r.f0 && r.f1 && r.f2 && r.g_ok);
        assert!(!r.k);
        assert!(r.diagnostics.iter().any(|d| d.hypothesis == "K"));
    }

    #[test]
    fn reflected_stable_direction_breaks_f2() {
        let sys = duffing(&DuffingParams::default());
        let mut s = compute_saddle_data(&sys).unwrap();
        // Move v_s⁺ into the sector that already holds v_s⁻.
        s.v_s_plus = crate::vec2::normalize([-0.2, 1.0]);
        let r = check_hypotheses(&sys, &s, None);
        assert!(!r.f2);
        assert!(r.diagnostics.iter().any(|d| d.hypothesis == "F2"));
    }

    #[test]
    fn smooth_system_satisfies_f2() {
        let sys = duffing(&DuffingParams { kappa: 1.0, ..Default::default() });
        let s = compute_saddle_data(&sys).unwrap();
        assert!(check_hypotheses(&sys, &s, None).f2);
    }
}
