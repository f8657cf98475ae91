//! Dormand–Prince 5(4) with Hairer's fourth-order continuous extension.
//!
//! The error norm is taken on whole vectors, `‖err‖ / (atol + rtol·max(‖y₀‖, ‖y₁‖))`,
//! so a state that is tiny in every component (an orbit deep inside a saddle
//! neighbourhood) keeps full relative accuracy when `atol` is negligible.

use crate::error::{Error, Result};

const C2: f64 = 1.0 / 5.0;
const C3: f64 = 3.0 / 10.0;
const C4: f64 = 4.0 / 5.0;
const C5: f64 = 8.0 / 9.0;

const A21: f64 = 1.0 / 5.0;
const A31: f64 = 3.0 / 40.0;
const A32: f64 = 9.0 / 40.0;
const A41: f64 = 44.0 / 45.0;
const A42: f64 = -56.0 / 15.0;
const A43: f64 = 32.0 / 9.0;
const A51: f64 = 19372.0 / 6561.0;
const A52: f64 = -25360.0 / 2187.0;
const A53: f64 = 64448.0 / 6561.0;
const A54: f64 = -212.0 / 729.0;
const A61: f64 = 9017.0 / 3168.0;
const A62: f64 = -355.0 / 33.0;
const A63: f64 = 46732.0 / 5247.0;
const A64: f64 = 49.0 / 176.0;
const A65: f64 = -5103.0 / 18656.0;
const A71: f64 = 35.0 / 384.0;
const A73: f64 = 500.0 / 1113.0;
const A74: f64 = 125.0 / 192.0;
const A75: f64 = -2187.0 / 6784.0;
const A76: f64 = 11.0 / 84.0;

const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;

const D1: f64 = -12715105075.0 / 11282082432.0;
const D3: f64 = 87487479700.0 / 32700410799.0;
const D4: f64 = -10690763975.0 / 1880347072.0;
const D5: f64 = 701980252875.0 / 199316789632.0;
const D6: f64 = -1453857185.0 / 822651844.0;
const D7: f64 = 69997945.0 / 29380423.0;

/// Euclidean norm, rescaled so that states near the underflow limit keep their size.
fn vnorm<const N: usize>(v: &[f64; N]) -> f64 {
    let m = v.iter().fold(0.0f64, |a, x| a.max(x.abs()));
    if m == 0.0 || !m.is_finite() {
        return m;
    }
    m * v.iter().map(|x| (x / m) * (x / m)).sum::<f64>().sqrt()
}

fn axpy<const N: usize>(y: &[f64; N], h: f64, terms: &[(f64, &[f64; N])]) -> [f64; N] {
    let mut out = *y;
    for (c, k) in terms {
        for i in 0..N {
            out[i] += h * c * k[i];
        }
    }
    out
}

/// One accepted step together with its interpolant.
#[derive(Debug, Clone, Copy)]
pub struct DenseStep<const N: usize> {
    pub t0: f64,
    pub h: f64,
    pub y0: [f64; N],
    pub y1: [f64; N],
    rc: [[f64; N]; 4],
}

impl<const N: usize> DenseStep<N> {
    pub fn t1(&self) -> f64 {
        self.t0 + self.h
    }

    pub fn eval(&self, t: f64) -> [f64; N] {
        if t == self.t0 {
            return self.y0;
        }
        if t == self.t1() {
            return self.y1;
        }
        let th = (t - self.t0) / self.h;
        let th1 = 1.0 - th;
        let mut out = [0.0; N];
        for i in 0..N {
            out[i] = self.y0[i]
                + th * (self.rc[0][i]
                    + th1 * (self.rc[1][i] + th * (self.rc[2][i] + th1 * self.rc[3][i])));
        }
        out
    }

    pub fn shifted(&self, dt: f64) -> Self {
        DenseStep { t0: self.t0 + dt, ..*self }
    }

    /// Whether `t` lies in the closed step interval.
    pub fn covers(&self, t: f64) -> bool {
        let (a, b) = if self.h >= 0.0 {
            (self.t0, self.t1())
        } else {
            (self.t1(), self.t0)
        };
        t >= a && t <= b
    }
}

/// Adaptive Dormand–Prince stepper for `y' = rhs(t, y)`.
pub struct Dopri<const N: usize, F> {
    rhs: F,
    pub t: f64,
    pub y: [f64; N],
    k1: [f64; N],
    h: f64,
    pub rel_tol: f64,
    pub abs_tol: f64,
    pub max_step: f64,
    dir: f64,
    pub steps: usize,
}

impl<const N: usize, F: Fn(f64, &[f64; N]) -> [f64; N]> Dopri<N, F> {
    pub fn new(rhs: F, t: f64, y: [f64; N], dir: f64, rel_tol: f64, abs_tol: f64, max_step: f64) -> Self {
        let k1 = rhs(t, &y);
        let mut s = Dopri {
            rhs,
            t,
            y,
            k1,
            h: 0.0,
            rel_tol,
            abs_tol,
            max_step,
            dir: dir.signum(),
            steps: 0,
        };
        s.h = s.initial_step();
        s
    }

    pub fn direction(&self) -> f64 {
        self.dir
    }

    fn scale(&self, y: &[f64; N]) -> f64 {
        self.abs_tol + self.rel_tol * vnorm(y)
    }

    fn initial_step(&self) -> f64 {
        let sc = self.scale(&self.y);
        let d0 = vnorm(&self.y) / sc;
        let d1 = vnorm(&self.k1) / sc;
        let h0 = if d0 < 1e-5 || d1 < 1e-5 { 1e-6 } else { 0.01 * d0 / d1 };
        let h0 = h0.min(self.max_step);
        let y1 = axpy(&self.y, self.dir * h0, &[(1.0, &self.k1)]);
        let k = (self.rhs)(self.t + self.dir * h0, &y1);
        let mut diff = [0.0; N];
        for i in 0..N {
            diff[i] = k[i] - self.k1[i];
        }
        let d2 = vnorm(&diff) / sc / h0;
        let h1 = if d1.max(d2) <= 1e-15 {
            (h0 * 1e-3).max(1e-6)
        } else {
            (0.01 / d1.max(d2)).powf(0.2)
        };
        (100.0 * h0).min(h1).min(self.max_step)
    }

    /// Restart from a new state, e.g. after switching the right-hand side.
    pub fn reset(&mut self, t: f64, y: [f64; N]) {
        self.t = t;
        self.y = y;
        self.k1 = (self.rhs)(t, &y);
        let h = self.initial_step();
        self.h = h;
    }

    pub fn replace_rhs(&mut self, rhs: F) {
        self.rhs = rhs;
        self.k1 = (self.rhs)(self.t, &self.y);
    }

    /// One trial step of signed size `h` from the current state.
    fn attempt(&self, h: f64) -> ([f64; N], [f64; N], f64, [[f64; N]; 4]) {
        let (t, y, k1) = (self.t, &self.y, &self.k1);
        let f = &self.rhs;
        let k2 = f(t + C2 * h, &axpy(y, h, &[(A21, k1)]));
        let k3 = f(t + C3 * h, &axpy(y, h, &[(A31, k1), (A32, &k2)]));
        let k4 = f(t + C4 * h, &axpy(y, h, &[(A41, k1), (A42, &k2), (A43, &k3)]));
        let k5 = f(
            t + C5 * h,
            &axpy(y, h, &[(A51, k1), (A52, &k2), (A53, &k3), (A54, &k4)]),
        );
        let k6 = f(
            t + h,
            &axpy(y, h, &[(A61, k1), (A62, &k2), (A63, &k3), (A64, &k4), (A65, &k5)]),
        );
        let y1 = axpy(y, h, &[(A71, k1), (A73, &k3), (A74, &k4), (A75, &k5), (A76, &k6)]);
        let k7 = f(t + h, &y1);
        let mut err = [0.0; N];
        for i in 0..N {
            err[i] = h
                * (E1 * k1[i] + E3 * k3[i] + E4 * k4[i] + E5 * k5[i] + E6 * k6[i] + E7 * k7[i]);
        }
        let sc = self.abs_tol + self.rel_tol * vnorm(y).max(vnorm(&y1));
        let e = vnorm(&err) / sc;

        let mut rc = [[0.0; N]; 4];
        for i in 0..N {
            let ydiff = y1[i] - y[i];
            let bspl = h * k1[i] - ydiff;
            rc[0][i] = ydiff;
            rc[1][i] = bspl;
            rc[2][i] = ydiff - h * k7[i] - bspl;
            rc[3][i] = h
                * (D1 * k1[i] + D3 * k3[i] + D4 * k4[i] + D5 * k5[i] + D6 * k6[i] + D7 * k7[i]);
        }
        (y1, k7, e, rc)
    }

    /// Takes one accepted step, never going past `t_limit`.
    pub fn step(&mut self, t_limit: f64) -> Result<DenseStep<N>> {
        loop {
            let remaining = (t_limit - self.t) * self.dir;
            if remaining <= 0.0 {
                return Err(Error::Precondition(format!(
                    "step requested at t = {} beyond the limit {}",
                    self.t, t_limit
                )));
            }
            let mut habs = self.h.min(self.max_step);
            let last = habs >= remaining;
            if last {
                habs = remaining;
            }
            if habs <= 1e-15 * self.t.abs().max(1.0) && !last {
                return Err(Error::StepSizeUnderflow { t: self.t });
            }
            let h = self.dir * habs;
            let (y1, k7, e, rc) = self.attempt(h);
            if !e.is_finite() {
                self.h = habs * 0.1;
                continue;
            }
            if e <= 1.0 {
                let fac = if e == 0.0 { 5.0 } else { (0.9 * e.powf(-0.2)).clamp(0.2, 5.0) };
                let t0 = self.t;
                let y0 = self.y;
                self.t = if last { t_limit } else { t0 + h };
                self.y = y1;
                self.k1 = k7;
                self.h = (habs * fac).min(self.max_step);
                self.steps += 1;
                return Ok(DenseStep {
                    t0,
                    h: self.t - t0,
                    y0,
                    y1,
                    rc,
                });
            }
            self.h = habs * (0.9 * e.powf(-0.2)).clamp(0.1, 0.9);
        }
    }

    /// Single step of exactly `h` from the current state without error control,
    /// used to polish event locations.
    pub fn probe(&self, h: f64) -> [f64; N] {
        if h == 0.0 {
            return self.y;
        }
        self.attempt(h).0
    }
}

/// A single fixed step of size `h` from `(t, y)`.
pub fn fixed_step<const N: usize, F: Fn(f64, &[f64; N]) -> [f64; N]>(
    rhs: F,
    t: f64,
    y: [f64; N],
    h: f64,
) -> [f64; N] {
    if h == 0.0 {
        return y;
    }
    let s = Dopri {
        k1: rhs(t, &y),
        rhs,
        t,
        y,
        h,
        rel_tol: 1.0,
        abs_tol: 1.0,
        max_step: h.abs(),
        dir: h.signum(),
        steps: 0,
    };
    s.attempt(h).0
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn exponential_growth_is_accurate() {
        let mut s = Dopri::new(|_t, y: &[f64; 1]| [y[0]], 0.0, [1.0], 1.0, 1e-12, 1e-14, 0.5);
        while s.t < 2.0 {
            s.step(2.0).unwrap();
        }
        assert!((s.y[0] - 2f64.exp()).abs() < 1e-10);
    }

    #[test]
    fn backward_harmonic_oscillator() {
        let rhs = |_t: f64, y: &[f64; 2]| [y[1], -y[0]];
        let mut s = Dopri::new(rhs, 0.0, [1.0, 0.0], -1.0, 1e-12, 1e-14, 0.1);
        let mut steps = Vec::new();
        while s.t > -3.0 {
            steps.push(s.step(-3.0).unwrap());
        }
        assert!((s.y[0] - 3f64.cos()).abs() < 1e-10);
        // Dense output in the middle of a step.
        let st = steps[steps.len() / 2];
        let tm = st.t0 + 0.37 * st.h;
        let ym = st.eval(tm);
        assert!((ym[0] - tm.cos()).abs() < 1e-9);
        assert!((ym[1] + tm.sin()).abs() < 1e-9);
    }

    #[test]
    fn relative_control_handles_tiny_states() {
        let rhs = |_t: f64, y: &[f64; 2]| [-y[0], 2.0 * y[1]];
        let mut s = Dopri::new(rhs, 0.0, [1e-200, 1e-203], 1.0, 1e-12, 1e-300, 0.1);
        while s.t < 2.0 {
            s.step(2.0).unwrap();
        }
        let exact = [1e-200 * (-2f64).exp(), 1e-203 * 4f64.exp()];
        let scale = exact[0].hypot(exact[1]);
        assert!((s.y[0] - exact[0]).abs() < 1e-9 * scale, "{:?} {:?}", s.y, exact);
        assert!((s.y[1] - exact[1]).abs() < 1e-9 * scale);
    }
}
