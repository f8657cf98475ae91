//! Integration of an orbit as a displacement from a reference orbit.
//!
//! The displacement obeys `δ' = F(t, x_ref + δ) − F(t, x_ref)`, evaluated with
//! the exact polynomial increment, so displacements far below the rounding
//! level of the state itself are followed with relative accuracy.

use super::dopri::Dopri;
use super::{IntegratorConfig, Track};
use crate::error::{Error, Result};
use crate::system::{PiecewiseSystem, Side};
use crate::vec2::{add, norm, V2};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DeviationStop {
    /// `‖δ‖` reached `theta·‖x_ref‖`.
    Departed,
    /// `x_ref + δ` would leave the reference's region within the next step.
    RegionChange,
    ReachedEnd,
}

#[derive(Debug, Clone, Copy)]
pub struct DeviationOutcome {
    pub t: f64,
    pub delta: V2,
    pub reference: V2,
    pub stop: DeviationStop,
    pub steps: usize,
}

impl DeviationOutcome {
    pub fn state(&self) -> V2 {
        add(self.reference, self.delta)
    }
}

/// Follows `x_ref(t) + δ(t)` from `t0` towards `t_end` using the field of `side`.
/// `on_step` sees `(t, x_ref, δ)` after every accepted step.
#[allow(clippy::too_many_arguments)]
pub fn integrate_deviation(
    sys: &PiecewiseSystem,
    eps: f64,
    side: Side,
    reference: &Track,
    t0: f64,
    delta0: V2,
    t_end: f64,
    theta: f64,
    cfg: &IntegratorConfig,
    mut on_step: impl FnMut(f64, V2, V2),
) -> Result<DeviationOutcome> {
    let (lo, hi) = reference.span();
    let t_end = t_end.clamp(lo, hi);
    let r_at = |t: f64| -> V2 {
        reference
            .eval(t.clamp(lo, hi))
            .expect("time inside reference span")
    };
    let rhs = |t: f64, d: &[f64; 2]| sys.field_increment(side, t, r_at(t), *d, eps);
    let dir = (t_end - t0).signum();
    if dir == 0.0 {
        return Err(Error::Precondition("deviation run has an empty interval".into()));
    }
    let mut stepper = Dopri::new(rhs, t0, delta0, dir, cfg.rel_tol, cfg.abs_tol, cfg.max_step);
    let mut steps = 0;
    let mut prev = (t0, delta0);
    loop {
        if steps >= cfg.max_steps {
            return Err(Error::StepLimit { t: stepper.t });
        }
        let st = stepper.step(t_end)?;
        steps += 1;
        let t1 = st.t1();
        let xr = r_at(t1);
        let z = add(xr, st.y1);
        if side.sign() * sys.switching.value(z) <= 0.0 {
            let (t, d) = prev;
            return Ok(DeviationOutcome {
                t,
                delta: d,
                reference: r_at(t),
                stop: DeviationStop::RegionChange,
                steps,
            });
        }
        on_step(t1, xr, st.y1);
        if norm(st.y1) >= theta * norm(xr) {
            return Ok(DeviationOutcome {
                t: t1,
                delta: st.y1,
                reference: xr,
                stop: DeviationStop::Departed,
                steps,
            });
        }
        if t1 == t_end {
            return Ok(DeviationOutcome {
                t: t1,
                delta: st.y1,
                reference: xr,
                stop: DeviationStop::ReachedEnd,
                steps,
            });
        }
        prev = (t1, st.y1);
    }
}
