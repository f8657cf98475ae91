//! `M(α)` against quadratures of the closed-form loop that share no code with the library.

use std::f64::consts::PI;

use approx::assert_abs_diff_eq;
use melnikov_chaos::homoclinic::{compute_homoclinic, HomoclinicMethod};
use melnikov_chaos::melnikov::MelnikovFunction;
use melnikov_chaos::system::{compute_saddle_data, duffing, DuffingParams};
use melnikov_chaos::flow::IntegratorConfig;
use proptest::prelude::*;

fn library(kappa: f64, amplitude: f64) -> MelnikovFunction {
    let sys = duffing(&DuffingParams {
        kappa,
        amplitude,
        ..Default::default()
    });
    let saddle = compute_saddle_data(&sys).unwrap();
    let gamma = compute_homoclinic(&sys, &saddle, HomoclinicMethod::ClosedForm, &IntegratorConfig::default()).unwrap();
    MelnikovFunction::new(&sys, &saddle, &gamma, 1e-12).unwrap()
}

/// Loop `x = √2 sech(√κ t)` with `κ = 1` before and `κ` after the crossing.
fn loop_point(kappa: f64, t: f64) -> (f64, f64) {
    let k = if t <= 0.0 { 1.0 } else { kappa };
    let r = k.sqrt();
    let s = 1.0 / (r * t).cosh();
    (2f64.sqrt() * s, -(2.0 * k).sqrt() * s * (r * t).tanh())
}

fn simpson(f: &dyn Fn(f64) -> f64, a: f64, b: f64, tol: f64) -> f64 {
    fn rec(f: &dyn Fn(f64) -> f64, a: f64, b: f64, fa: f64, fm: f64, fb: f64, whole: f64, tol: f64, depth: u32) -> f64 {
        let m = 0.5 * (a + b);
        let (lm, rm) = (0.5 * (a + m), 0.5 * (m + b));
        let (flm, frm) = (f(lm), f(rm));
        let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
        let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
        if depth == 0 || (left + right - whole).abs() <= 15.0 * tol {
            return left + right + (left + right - whole) / 15.0;
        }
        rec(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1) + rec(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1)
    }
    let (fa, fb, fm) = (f(a), f(b), f(0.5 * (a + b)));
    let whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    rec(f, a, b, fa, fm, fb, whole, tol, 50)
}

/// `Σ± c± ∫ y·x·cos(2π(t+α))` with `c± = 1/(κ±√2)` and the halves split at the crossing.
fn oracle(kappa: f64, alpha: f64) -> f64 {
    let w = 2.0 * PI;
    let integrand = |t: f64| {
        let (x, y) = loop_point(kappa, t);
        y * x * (w * (t + alpha)).cos()
    };
    let mut minus = 0.0;
    let mut plus = 0.0;
    for k in 0..40 {
        let a = -(k as f64 + 1.0);
        minus += simpson(&integrand, a, a + 1.0, 1e-15);
        plus += simpson(&integrand, -a - 1.0, -a, 1e-15);
    }
    minus / 2f64.sqrt() + plus / (kappa * 2f64.sqrt())
}

/// `π ω² sin(ωα) / (√2 sinh(πω/2))` for the smooth loop.
fn closed_form_smooth(alpha: f64) -> f64 {
    let w = 2.0 * PI;
    PI * w * w * (w * alpha).sin() / (2f64.sqrt() * (PI * w / 2.0).sinh())
}

fn alphas() -> Vec<f64> {
    (0..20).map(|i| -0.45 + 0.0731 * i as f64).collect()
}

#[test]
fn smooth_loop_matches_the_closed_form() {
    let m = library(1.0, 1.0);
    for a in alphas() {
        assert_abs_diff_eq!(m.eval(a).unwrap(), closed_form_smooth(a), epsilon = 1e-8);
        assert_abs_diff_eq!(oracle(1.0, a), closed_form_smooth(a), epsilon = 1e-10);
    }
}

#[test]
fn piecewise_loop_matches_simpson() {
    let m = library(4.0, 1.0);
    for a in alphas() {
        assert_abs_diff_eq!(m.eval(a).unwrap(), oracle(4.0, a), epsilon = 1e-8);
    }
}

#[test]
fn no_forcing_gives_zero() {
    let m = library(4.0, 0.0);
    for a in alphas() {
        assert!(m.eval(a).unwrap().abs() <= 1e-12);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(5))]

    #[test]
    fn time_shift_of_the_forcing_shifts_the_phase(alpha in -1.0f64..1.0, s in -1.0f64..1.0) {
        let base = duffing(&DuffingParams::default());
        let shifted = base.forcing_shifted(s);
        let saddle = compute_saddle_data(&base).unwrap();
        let gamma = compute_homoclinic(&base, &saddle, HomoclinicMethod::ClosedForm, &IntegratorConfig::default()).unwrap();
        let m = MelnikovFunction::new(&base, &saddle, &gamma, 1e-12).unwrap();
        let ms = MelnikovFunction::new(&shifted, &saddle, &gamma, 1e-12).unwrap();
        prop_assert!((ms.eval(alpha).unwrap() - m.eval(alpha + s).unwrap()).abs() <= 1e-9);
    }
}
