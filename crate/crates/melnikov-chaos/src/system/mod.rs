//! Piecewise-smooth planar systems `ẋ = f±(x) + ε g(t, x, ε)` on `Ω± = {±G > 0}`.

mod fixtures;
mod hypotheses;
mod saddle;
mod scenario;

pub use fixtures::{duffing, scenario4_variant, sliding_pair, DuffingParams};
pub use hypotheses::{check_hypotheses, Diagnostic, HypothesisReport};
pub use saddle::{compute_saddle_data, eigen_2x2, eigen_residual, SaddleData};
pub use scenario::{
    classify_scenario, classify_scenario_with_radius, inside_polygon, Scenario, ScenarioClass, POLYGON_POINTS,
};

use serde::{Deserialize, Serialize};

use crate::poly::Poly2;
use crate::vec2::{add, scale, M2, V2};

/// Tolerance for "vanishes at the origin" checks on `f±` and `g`.
pub const TOL_ZERO: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Side {
    Minus,
    Plus,
}

impl Side {
    pub fn other(self) -> Side {
        match self {
            Side::Minus => Side::Plus,
            Side::Plus => Side::Minus,
        }
    }

    /// Sign of `G` on this side.
    pub fn sign(self) -> f64 {
        match self {
            Side::Minus => -1.0,
            Side::Plus => 1.0,
        }
    }
}

impl std::fmt::Display for Side {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Side::Minus => "minus",
            Side::Plus => "plus",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Region {
    Minus,
    Zero,
    Plus,
}

/// A polynomial vector field.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PolyField {
    pub x: Poly2,
    pub y: Poly2,
}

impl PolyField {
    pub fn eval(&self, p: V2) -> V2 {
        [self.x.eval(p), self.y.eval(p)]
    }

    pub fn jacobian(&self, p: V2) -> M2 {
        [self.x.gradient(p), self.y.gradient(p)]
    }

    /// `tr f_x`, the divergence.
    pub fn divergence(&self) -> Poly2 {
        self.x.d_dx().plus(&self.y.d_dy())
    }

    pub fn is_divergence_free(&self) -> bool {
        self.divergence().is_zero()
    }

    pub fn increment(&self, p: V2, h: V2) -> V2 {
        [self.x.increment(p, h), self.y.increment(p, h)]
    }

    pub fn negated(&self) -> PolyField {
        PolyField {
            x: self.x.scaled(-1.0),
            y: self.y.scaled(-1.0),
        }
    }
}

/// The switching function `G`; `Ω⁰ = {G = 0}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct SwitchingFunction {
    pub g: Poly2,
}

impl SwitchingFunction {
    pub fn value(&self, p: V2) -> f64 {
        self.g.eval(p)
    }

    pub fn gradient(&self, p: V2) -> V2 {
        self.g.gradient(p)
    }

    pub fn is_linear(&self) -> bool {
        self.g.degree() <= 1
    }

    pub fn region(&self, p: V2) -> Region {
        let v = self.value(p);
        if v > 0.0 {
            Region::Plus
        } else if v < 0.0 {
            Region::Minus
        } else {
            Region::Zero
        }
    }
}

/// Time profile of one forcing term.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
pub enum Temporal {
    Const,
    Cos { omega: f64, phase: f64 },
}

impl Temporal {
    pub fn eval(&self, t: f64) -> f64 {
        match *self {
            Temporal::Const => 1.0,
            Temporal::Cos { omega, phase } => (omega * t + phase).cos(),
        }
    }
}

/// `e_component · temporal(t) · spatial(x)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ForcingTerm {
    pub component: usize,
    pub temporal: Temporal,
    pub spatial: Poly2,
}

/// The perturbation `g(t, x)`; it does not depend on `ε`.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Forcing {
    pub terms: Vec<ForcingTerm>,
}

impl Forcing {
    pub fn none() -> Self {
        Forcing { terms: Vec::new() }
    }

    pub fn is_zero(&self) -> bool {
        self.terms.iter().all(|t| t.spatial.is_zero())
    }

    pub fn eval(&self, t: f64, p: V2) -> V2 {
        let mut out = [0.0, 0.0];
        for term in &self.terms {
            out[term.component] += term.temporal.eval(t) * term.spatial.eval(p);
        }
        out
    }

    pub fn increment(&self, t: f64, p: V2, h: V2) -> V2 {
        let mut out = [0.0, 0.0];
        for term in &self.terms {
            out[term.component] += term.temporal.eval(t) * term.spatial.increment(p, h);
        }
        out
    }

    /// `x`-Jacobian of `g(t, ·)` at `p`.
    pub fn jacobian(&self, t: f64, p: V2) -> M2 {
        let mut m = [[0.0; 2]; 2];
        for term in &self.terms {
            let g = term.spatial.gradient(p);
            let a = term.temporal.eval(t);
            m[term.component][0] += a * g[0];
            m[term.component][1] += a * g[1];
        }
        m
    }

    /// `g(t + s, x)`.
    pub fn time_shifted(&self, s: f64) -> Forcing {
        Forcing {
            terms: self
                .terms
                .iter()
                .map(|term| ForcingTerm {
                    temporal: match term.temporal {
                        Temporal::Const => Temporal::Const,
                        Temporal::Cos { omega, phase } => Temporal::Cos {
                            omega,
                            phase: phase + omega * s,
                        },
                    },
                    ..term.clone()
                })
                .collect(),
        }
    }

    /// `−g(−t, x)`.
    pub fn time_reversed(&self) -> Forcing {
        Forcing {
            terms: self
                .terms
                .iter()
                .map(|term| ForcingTerm {
                    component: term.component,
                    temporal: match term.temporal {
                        Temporal::Const => Temporal::Const,
                        Temporal::Cos { omega, phase } => Temporal::Cos { omega, phase: -phase },
                    },
                    spatial: term.spatial.scaled(-1.0),
                })
                .collect(),
        }
    }

    /// Common period of all time profiles, if there is one.
    pub fn period(&self) -> Option<f64> {
        let mut period: Option<f64> = None;
        for term in &self.terms {
            if let Temporal::Cos { omega, .. } = term.temporal {
                let p = 2.0 * std::f64::consts::PI / omega.abs();
                match period {
                    None => period = Some(p),
                    Some(q) if (q - p).abs() <= 1e-12 * q => {}
                    Some(_) => return None,
                }
            }
        }
        period
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DomainBox {
    pub x_min: f64,
    pub x_max: f64,
    pub y_min: f64,
    pub y_max: f64,
}

impl DomainBox {
    pub fn contains(&self, p: V2) -> bool {
        p[0] >= self.x_min && p[0] <= self.x_max && p[1] >= self.y_min && p[1] <= self.y_max
    }
}

/// Closed-form homoclinic of the piecewise Duffing family
/// `ẋ = y, ẏ = κ±(x − x³)`; `reversed` marks the time-reversed system.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DuffingLoop {
    pub kappa_minus: f64,
    pub kappa_plus: f64,
    pub reversed: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PiecewiseSystem {
    pub label: String,
    pub f_minus: PolyField,
    pub f_plus: PolyField,
    pub switching: SwitchingFunction,
    pub forcing: Forcing,
    pub domain: DomainBox,
    pub closed_form: Option<DuffingLoop>,
}

impl PiecewiseSystem {
    pub fn field_of(&self, side: Side) -> &PolyField {
        match side {
            Side::Minus => &self.f_minus,
            Side::Plus => &self.f_plus,
        }
    }

    /// `f±(p) + ε g(t, p)`.
    pub fn vector_field(&self, side: Side, t: f64, p: V2, eps: f64) -> V2 {
        let f = self.field_of(side).eval(p);
        if eps == 0.0 {
            f
        } else {
            add(f, scale(eps, self.forcing.eval(t, p)))
        }
    }

    /// `F(p + h) − F(p)` evaluated without cancellation.
    pub fn field_increment(&self, side: Side, t: f64, p: V2, h: V2, eps: f64) -> V2 {
        let df = self.field_of(side).increment(p, h);
        if eps == 0.0 {
            df
        } else {
            add(df, scale(eps, self.forcing.increment(t, p, h)))
        }
    }

    pub fn jacobian(&self, side: Side, p: V2) -> M2 {
        self.field_of(side).jacobian(p)
    }

    /// `∇G(p)·(f±(p) + ε g(t, p))`.
    pub fn transversality(&self, side: Side, t: f64, p: V2, eps: f64) -> f64 {
        crate::vec2::dot(self.switching.gradient(p), self.vector_field(side, t, p, eps))
    }

    pub fn region(&self, p: V2) -> Region {
        self.switching.region(p)
    }

    /// The system solved by `x(−t)`, with the `±` labels swapped so that the
    /// homoclinic again leaves the origin through `Ω⁻`.
    pub fn time_reversed(&self) -> PiecewiseSystem {
        PiecewiseSystem {
            label: format!("{} (reversed)", self.label),
            f_minus: self.f_plus.negated(),
            f_plus: self.f_minus.negated(),
            switching: SwitchingFunction {
                g: self.switching.g.scaled(-1.0),
            },
            forcing: self.forcing.time_reversed(),
            domain: self.domain,
            closed_form: self.closed_form.map(|c| DuffingLoop {
                reversed: !c.reversed,
                ..c
            }),
        }
    }

    /// Same system with `g(t, x)` replaced by `g(t + s, x)`.
    pub fn forcing_shifted(&self, s: f64) -> PiecewiseSystem {
        PiecewiseSystem {
            forcing: self.forcing.time_shifted(s),
            ..self.clone()
        }
    }

    pub fn without_forcing(&self) -> PiecewiseSystem {
        PiecewiseSystem {
            forcing: Forcing::none(),
            ..self.clone()
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reversal_is_an_involution() {
        let sys = duffing(&DuffingParams::default());
        let twice = sys.time_reversed().time_reversed();
        assert_eq!(twice.f_minus, sys.f_minus);
        assert_eq!(twice.f_plus, sys.f_plus);
        assert_eq!(twice.switching, sys.switching);
        assert_eq!(twice.forcing, sys.forcing);
        assert_eq!(twice.closed_form, sys.closed_form);
    }

    #[test]
    fn reversed_field_runs_backward() {
        let sys = duffing(&DuffingParams::default());
        let rev = sys.time_reversed();
        let p = [0.4, 0.3];
        let t = 0.37;
        let eps = 0.01;
        // p lies in Ω⁻ of the original, which is Ω⁺ of the reversed system.
        let fwd = sys.vector_field(Side::Minus, t, p, eps);
        let bwd = rev.vector_field(Side::Plus, -t, p, eps);
        assert!((fwd[0] + bwd[0]).abs() < 1e-15 && (fwd[1] + bwd[1]).abs() < 1e-15);
    }

    #[test]
    fn shifted_forcing_matches_translation() {
        let sys = duffing(&DuffingParams::default());
        let shifted = sys.forcing_shifted(0.3);
        let p = [0.8, -0.1];
        let a = shifted.forcing.eval(1.1, p);
        let b = sys.forcing.eval(1.4, p);
        assert!((a[1] - b[1]).abs() < 1e-14);
    }

    #[test]
    fn fixture_period_is_one() {
        let sys = duffing(&DuffingParams::default());
        assert!((sys.forcing.period().unwrap() - 1.0).abs() < 1e-15);
    }
}
