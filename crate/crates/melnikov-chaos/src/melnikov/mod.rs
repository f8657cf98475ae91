//! Melnikov function of the discontinuous system and its zero structure.
//!
//! `M(α) = c⊥⁻ ∫_{−∞}^0 w(t) f⁻(γ)∧g(t+α, γ) dt + c⊥⁺ ∫_0^{∞} w(t) f⁺(γ)∧g(t+α, γ) dt`
//! with the trace weight `w(t) = exp(−∫₀ᵗ tr f_x(γ(s)) ds)` and
//! `c⊥± = ‖∇G(γ(0))‖ / (∇G(γ(0))·f±(γ(0)))`.

pub mod quadrature;
mod zeros;

pub use zeros::{extract_zero_structure, ZeroBracket, ZeroClass, ZeroStructure, ZeroScanConfig};

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::homoclinic::HomoclinicOrbit;
use crate::system::{PiecewiseSystem, SaddleData, Side};
use crate::vec2::{dot, norm, wedge};
use quadrature::{gk15, integrate_adaptive, uniform_breaks};

/// A scalar function of the phase, as consumed by the zero analysis.
pub trait Evaluator: Sync {
    fn value(&self, alpha: f64) -> Result<f64>;

    /// Absolute accuracy of a single value.
    fn tolerance(&self) -> f64;

    fn values(&self, alphas: &[f64]) -> Result<Vec<f64>> {
        alphas.par_iter().map(|&a| self.value(a)).collect()
    }
}

/// Closed-form function, used for synthetic zero-structure inputs.
pub struct Analytic<F>(pub F);

impl<F: Fn(f64) -> f64 + Sync> Evaluator for Analytic<F> {
    fn value(&self, alpha: f64) -> Result<f64> {
        Ok((self.0)(alpha))
    }

    fn tolerance(&self) -> f64 {
        1e-14
    }
}

/// Spacing of the knots carrying the accumulated trace integral.
const TRACE_KNOT: f64 = 0.25;
/// `ln` of the largest admissible weight.
const WEIGHT_GUARD: f64 = 600.0;

#[derive(Debug, Clone)]
pub struct MelnikovFunction {
    sys: PiecewiseSystem,
    gamma: HomoclinicOrbit,
    pub c_perp_minus: f64,
    pub c_perp_plus: f64,
    pub truncation_horizon: f64,
    pub quadrature_tol: f64,
    /// `∫₀^{t_k} tr f_x(γ)` at `t_k = k·TRACE_KNOT`, indexed from `−T`; empty when
    /// both halves are divergence-free.
    trace_knots: Vec<f64>,
}

impl MelnikovFunction {
    pub fn new(sys: &PiecewiseSystem, saddle: &SaddleData, gamma: &HomoclinicOrbit, tol: f64) -> Result<Self> {
        if !(tol > 0.0) {
            return Err(Error::Precondition(format!("quadrature tolerance must be positive, got {tol}")));
        }
        let p0 = gamma.crossing_point;
        let n = sys.switching.gradient(p0);
        let c_perp = |side: Side| norm(n) / dot(n, sys.field_of(side).eval(p0));
        let (c_perp_minus, c_perp_plus) = (c_perp(Side::Minus), c_perp(Side::Plus));
        if !(c_perp_minus > 0.0 && c_perp_plus > 0.0) {
            return Err(Error::WrongRegionPattern(format!(
                "c_perp must be positive, got ({c_perp_minus}, {c_perp_plus})"
            )));
        }
        let mut m = MelnikovFunction {
            sys: sys.clone(),
            gamma: gamma.clone(),
            c_perp_minus,
            c_perp_plus,
            truncation_horizon: 30.0,
            quadrature_tol: tol,
            trace_knots: Vec::new(),
        };
        let trace_free = sys.f_minus.is_divergence_free() && sys.f_plus.is_divergence_free();
        let rate = saddle.lambda_u_plus.min(-saddle.lambda_s_minus);
        // Tail bound: c⊥ · Lip · ‖γ‖ · sup‖g‖ · sup w, integrated from T to ∞.
        let lip = [Side::Minus, Side::Plus]
            .iter()
            .map(|&s| {
                let j = sys.jacobian(s, [0.0, 0.0]);
                j.iter().flatten().map(|x| x * x).sum::<f64>().sqrt()
            })
            .fold(0.0, f64::max)
            * 2.0;
        let reach = gamma.diameter() + 1.0;
        let g_max: f64 = sys
            .forcing
            .terms
            .iter()
            .map(|term| {
                let deg = term.spatial.degree() as i32;
                term.spatial.terms().iter().map(|m| m.coeff.abs()).sum::<f64>() * reach.max(1.0).powi(deg)
            })
            .sum();
        let mut w_max: f64 = 1.0;
        if !trace_free {
            m.truncation_horizon = gamma.horizon.max(30.0);
            m.build_trace_knots()?;
            w_max = m.trace_knots.iter().map(|i| (-i).exp()).fold(1.0, f64::max);
        }
        let c = c_perp_minus.max(c_perp_plus) * lip * gamma.decay_constant / 4.0 * g_max * w_max;
        if c > 0.0 {
            let t = (10.0 * c / (rate * tol)).ln() / rate;
            if t > m.truncation_horizon {
                m.truncation_horizon = t;
                if !trace_free {
                    m.build_trace_knots()?;
                }
            }
        }
        Ok(m)
    }

    fn trace_at(&self, side: Side, t: f64) -> f64 {
        self.sys.field_of(side).divergence().eval(self.gamma.eval(t))
    }

    fn build_trace_knots(&mut self) -> Result<()> {
        let n = (self.truncation_horizon / TRACE_KNOT).ceil() as usize;
        let mut knots = vec![0.0; 2 * n + 1];
        for k in 1..=n {
            for (sign, side) in [(1.0, Side::Plus), (-1.0, Side::Minus)] {
                let (a, b) = (sign * (k - 1) as f64 * TRACE_KNOT, sign * k as f64 * TRACE_KNOT);
                let (v, _) = gk15(&|s| self.trace_at(side, s), a, b);
                let prev = knots[(n as isize + sign as isize * (k as isize - 1)) as usize];
                let idx = (n as isize + sign as isize * k as isize) as usize;
                knots[idx] = prev + v;
                if knots[idx].abs() > WEIGHT_GUARD {
                    return Err(Error::DivergentWeight { t: b });
                }
            }
        }
        self.trace_knots = knots;
        Ok(())
    }

    /// `exp(−∫₀ᵗ tr f_x(γ))`.
    pub fn weight(&self, t: f64) -> Result<f64> {
        if self.trace_knots.is_empty() {
            return Ok(1.0);
        }
        let n = (self.trace_knots.len() - 1) / 2;
        let k = ((t / TRACE_KNOT).trunc() as isize).clamp(-(n as isize), n as isize);
        let tk = k as f64 * TRACE_KNOT;
        let side = if t < 0.0 { Side::Minus } else { Side::Plus };
        let (rest, _) = gk15(&|s| self.trace_at(side, s), tk, t);
        let integral = self.trace_knots[(n as isize + k) as usize] + rest;
        if integral.abs() > WEIGHT_GUARD {
            return Err(Error::DivergentWeight { t });
        }
        Ok((-integral).exp())
    }

    fn integrand(&self, side: Side, t: f64, alpha: f64) -> f64 {
        let p = self.gamma.eval(t);
        let w = self.weight(t).unwrap_or(f64::NAN);
        w * wedge(self.sys.field_of(side).eval(p), self.sys.forcing.eval(t + alpha, p))
    }

    /// Both half-line contributions, unscaled by `c⊥±`.
    pub fn halves(&self, alpha: f64) -> Result<(f64, f64)> {
        let t = self.truncation_horizon;
        let tol_m = 0.5 * self.quadrature_tol / self.c_perp_minus;
        let tol_p = 0.5 * self.quadrature_tol / self.c_perp_plus;
        let minus = integrate_adaptive(
            &|s| self.integrand(Side::Minus, s, alpha),
            &uniform_breaks(-t, 0.0, 0.5),
            tol_m,
            20_000,
        )?;
        let plus = integrate_adaptive(
            &|s| self.integrand(Side::Plus, s, alpha),
            &uniform_breaks(0.0, t, 0.5),
            tol_p,
            20_000,
        )?;
        Ok((minus.value, plus.value))
    }

    pub fn eval(&self, alpha: f64) -> Result<f64> {
        let (m, p) = self.halves(alpha)?;
        Ok(self.c_perp_minus * m + self.c_perp_plus * p)
    }

    /// Same function with the truncation horizon replaced.
    pub fn with_horizon(&self, horizon: f64) -> Result<Self> {
        let mut m = self.clone();
        m.truncation_horizon = horizon;
        if !m.trace_knots.is_empty() {
            m.build_trace_knots()?;
        }
        Ok(m)
    }

    pub fn period(&self) -> Option<f64> {
        self.sys.forcing.period()
    }
}

impl Evaluator for MelnikovFunction {
    fn value(&self, alpha: f64) -> Result<f64> {
        self.eval(alpha)
    }

    fn tolerance(&self) -> f64 {
        self.quadrature_tol
    }
}

/// `(M(τ₀), M′(τ₀))`, the derivative by a central difference with step `tol^{1/3}`.
pub fn verify_nondegenerate_zero(m: &dyn Evaluator, tau0: f64) -> Result<(f64, f64)> {
    let h = m.tolerance().cbrt();
    let v = m.value(tau0)?;
    let d = (m.value(tau0 + h)? - m.value(tau0 - h)?) / (2.0 * h);
    Ok((v, d))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::flow::IntegratorConfig;
    use crate::homoclinic::{compute_homoclinic, HomoclinicMethod};
    use crate::system::{compute_saddle_data, duffing, DuffingParams, Forcing};

    fn fixture(kappa: f64) -> (PiecewiseSystem, MelnikovFunction) {
        let sys = duffing(&DuffingParams { kappa, ..Default::default() });
        let s = compute_saddle_data(&sys).unwrap();
        let g = compute_homoclinic(&sys, &s, HomoclinicMethod::ClosedForm, &IntegratorConfig::default()).unwrap();
        let m = MelnikovFunction::new(&sys, &s, &g, 1e-11).unwrap();
        (sys, m)
    }

    #[test]
    fn c_perp_values() {
        let (_, m) = fixture(4.0);
        assert!((m.c_perp_minus - 1.0 / 2f64.sqrt()).abs() < 1e-15);
        assert!((m.c_perp_plus - 1.0 / (4.0 * 2f64.sqrt())).abs() < 1e-15);
        assert!(m.truncation_horizon >= 30.0);
    }

    #[test]
    fn zero_forcing_gives_zero() {
        let mut sys = duffing(&DuffingParams::default());
        sys.forcing = Forcing::none();
        let s = compute_saddle_data(&sys).unwrap();
        let g = compute_homoclinic(&sys, &s, HomoclinicMethod::ClosedForm, &IntegratorConfig::default()).unwrap();
        let m = MelnikovFunction::new(&sys, &s, &g, 1e-11).unwrap();
        assert_eq!(m.eval(0.3).unwrap(), 0.0);
    }

    #[test]
    fn weight_is_one_for_divergence_free_halves() {
        let (_, m) = fixture(4.0);
        assert_eq!(m.weight(-3.0).unwrap(), 1.0);
        assert_eq!(m.weight(7.0).unwrap(), 1.0);
    }

    #[test]
    fn periodic_forcing_gives_periodic_function() {
        let (_, m) = fixture(4.0);
        for a in [0.1, 0.45, 0.8] {
            assert!((m.eval(a).unwrap() - m.eval(a + 1.0).unwrap()).abs() <= 2.0 * m.quadrature_tol);
        }
    }

    #[test]
    fn doubling_the_horizon_changes_little() {
        let (_, m) = fixture(4.0);
        let m2 = m.with_horizon(2.0 * m.truncation_horizon).unwrap();
        for a in [0.05, 0.33, 0.71] {
            assert!((m.eval(a).unwrap() - m2.eval(a).unwrap()).abs() <= m.quadrature_tol);
        }
    }

    #[test]
    fn sine_derivative_by_central_difference() {
        let f = Analytic(|t: f64| 2.5 * t.sin());
        let (v, d) = verify_nondegenerate_zero(&f, 0.0).unwrap();
        assert!(v.abs() < 1e-15 && (d - 2.5).abs() < 1e-8);
        let (v, d) = verify_nondegenerate_zero(&f, std::f64::consts::FRAC_PI_2).unwrap();
        assert!((v - 2.5).abs() < 1e-14 && d.abs() < 1e-8);
    }
}
