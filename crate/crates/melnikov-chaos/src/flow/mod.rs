//! Event-driven integration of piecewise-smooth systems.
//!
//! Orbits are integrated with one smooth field at a time. When the switching
//! function changes sign inside a step the crossing is located on the dense
//! output, polished with fresh steps, checked for transversality, and the
//! integration restarts from the crossing point with the other field.

mod deviation;
pub mod dopri;
mod engine;
mod export;

pub use deviation::{integrate_deviation, DeviationOutcome, DeviationStop};
pub use engine::{advance, flow_to_section, integrate, Control, Observer, RunOutcome, SectionArc, TimeDirection};
pub use export::write_trajectory_csv;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::system::{PiecewiseSystem, Side};
use crate::vec2::{norm, V2};
use dopri::DenseStep;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct IntegratorConfig {
    pub rel_tol: f64,
    pub abs_tol: f64,
    pub max_step: f64,
    /// Tolerance on `|G|` at located crossings and on transversality values;
    /// both are scaled by `min(1, ‖x‖)`.
    pub event_tol: f64,
    pub max_time: f64,
    pub max_steps: usize,
}

impl Default for IntegratorConfig {
    fn default() -> Self {
        IntegratorConfig {
            rel_tol: 1e-11,
            abs_tol: 1e-12,
            max_step: 0.05,
            event_tol: 1e-13,
            max_time: 1e4,
            max_steps: 2_000_000,
        }
    }
}

impl IntegratorConfig {
    /// Pure relative error control, for orbits that pass arbitrarily close to
    /// the saddle.
    pub fn relative() -> Self {
        IntegratorConfig {
            rel_tol: 1e-12,
            abs_tol: 1e-300,
            event_tol: 1e-13,
            ..Default::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("rel_tol", self.rel_tol),
            ("abs_tol", self.abs_tol),
            ("max_step", self.max_step),
            ("event_tol", self.event_tol),
            ("max_time", self.max_time),
        ];
        for (name, v) in positive {
            if !(v > 0.0) || !v.is_finite() {
                return Err(Error::Config(format!("integrator {name} must be positive, got {v}")));
            }
        }
        if self.event_tol > self.abs_tol.max(self.rel_tol) {
            return Err(Error::Config(format!(
                "event_tol {} exceeds the integration tolerance",
                self.event_tol
            )));
        }
        if self.max_steps == 0 {
            return Err(Error::Config("integrator max_steps must be positive".into()));
        }
        Ok(())
    }

    pub(crate) fn scaled_event_tol(&self, p: V2) -> f64 {
        self.event_tol * norm(p).min(1.0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum CrossingDirection {
    MinusToPlus,
    PlusToMinus,
}

impl CrossingDirection {
    pub fn into_side(self) -> Side {
        match self {
            CrossingDirection::MinusToPlus => Side::Plus,
            CrossingDirection::PlusToMinus => Side::Minus,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CrossingEvent {
    pub time: f64,
    pub point: V2,
    pub transversality_minus: f64,
    pub transversality_plus: f64,
    pub direction: CrossingDirection,
}

/// Part of an accepted step integrated with a single field.
#[derive(Debug, Clone, Copy)]
pub struct Segment {
    pub side: Side,
    pub step: DenseStep<2>,
    /// End of the valid part of the step; earlier than `step.t1()` when the
    /// step was cut at a crossing.
    pub t_end: f64,
}

impl Segment {
    pub fn t_start(&self) -> f64 {
        self.step.t0
    }

    pub fn eval(&self, t: f64) -> V2 {
        self.step.eval(t)
    }

    pub fn end_point(&self) -> V2 {
        self.step.eval(self.t_end)
    }
}

/// Dense record of an orbit as consecutive steps, usable in either time direction.
#[derive(Debug, Clone, Default)]
pub struct Track {
    pub steps: Vec<DenseStep<2>>,
}

impl Track {
    pub fn push(&mut self, s: DenseStep<2>) {
        self.steps.push(s);
    }

    pub fn is_empty(&self) -> bool {
        self.steps.is_empty()
    }

    /// `(earliest, latest)` covered time.
    pub fn span(&self) -> (f64, f64) {
        let a = self.steps.first().map(|s| s.t0).unwrap_or(f64::NAN);
        let b = self.steps.last().map(|s| s.t1()).unwrap_or(f64::NAN);
        (a.min(b), a.max(b))
    }

    /// Interpolated state, or `None` outside the covered span.
    pub fn eval(&self, t: f64) -> Option<V2> {
        let n = self.steps.len();
        if n == 0 {
            return None;
        }
        let forward = self.steps[0].h >= 0.0;
        // Index of the first step whose far end reaches `t`.
        let idx = self.steps.partition_point(|s| if forward { s.t1() < t } else { s.t1() > t });
        let s = self.steps.get(idx)?;
        if s.covers(t) {
            Some(s.eval(t))
        } else {
            None
        }
    }

    /// Same orbit with every time shifted by `dt`.
    pub fn shifted(&self, dt: f64) -> Track {
        Track {
            steps: self.steps.iter().map(|s| s.shifted(dt)).collect(),
        }
    }

    pub fn start(&self) -> Option<(f64, V2)> {
        self.steps.first().map(|s| (s.t0, s.y0))
    }

    pub fn end(&self) -> Option<(f64, V2)> {
        self.steps.last().map(|s| (s.t1(), s.y1))
    }
}

/// Filippov test for attracting sliding at a point of the switching curve.
pub fn detect_sliding(sys: &PiecewiseSystem, eps: f64, t: f64, p: V2, cfg: &IntegratorConfig) -> Result<bool> {
    let g = sys.switching.value(p);
    if g.abs() > cfg.event_tol.max(cfg.scaled_event_tol(p)) {
        return Err(Error::Precondition(format!(
            "detect_sliding called off the switching curve (|G| = {:e})",
            g.abs()
        )));
    }
    Ok(sys.transversality(Side::Plus, t, p, eps) < 0.0 && sys.transversality(Side::Minus, t, p, eps) > 0.0)
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Trajectory {
    pub samples: Vec<(f64, V2)>,
    pub events: Vec<CrossingEvent>,
    pub epsilon: f64,
    pub start: (f64, V2),
    #[serde(skip)]
    pub segments: Vec<Segment>,
}

impl Trajectory {
    pub fn final_state(&self) -> (f64, V2) {
        *self.samples.last().unwrap_or(&self.start)
    }

    /// Dense evaluation inside the integrated span.
    pub fn eval(&self, t: f64) -> Option<V2> {
        self.segments
            .iter()
            .find(|s| {
                let (a, b) = if s.t_end >= s.step.t0 { (s.step.t0, s.t_end) } else { (s.t_end, s.step.t0) };
                t >= a && t <= b
            })
            .map(|s| s.eval(t))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::system::{duffing, sliding_pair, DuffingParams};

    #[test]
    fn default_config_is_valid() {
        IntegratorConfig::default().validate().unwrap();
        IntegratorConfig::relative().validate().unwrap();
        let bad = IntegratorConfig { rel_tol: -1.0, ..Default::default() };
        assert!(bad.validate().is_err());
    }

    #[test]
    fn sliding_detection() {
        let cfg = IntegratorConfig::default();
        let sys = sliding_pair();
        assert!(detect_sliding(&sys, 0.0, 0.0, [0.3, 0.0], &cfg).unwrap());
        let duff = duffing(&DuffingParams::default());
        let p0 = [2f64.sqrt(), 0.0];
        assert!(!detect_sliding(&duff, 0.0, 0.0, p0, &cfg).unwrap());
        assert!(detect_sliding(&duff, 0.0, 0.0, [0.2, 0.5], &cfg).is_err());
    }
}
