use serde::{Deserialize, Serialize};

use super::{
    DomainBox, DuffingLoop, Forcing, ForcingTerm, PiecewiseSystem, PolyField, SwitchingFunction,
    Temporal,
};
use crate::poly::Poly2;

/// Parameters of the piecewise Duffing fixture
/// `ẋ = y, ẏ = κ±(x − x³)` with `κ⁻ = 1`, `κ⁺ = kappa`, `G = −y` and
/// forcing `g = (0, a·x·cos(ωt))`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct DuffingParams {
    pub kappa: f64,
    pub amplitude: f64,
    pub omega: f64,
    pub phase: f64,
}

impl Default for DuffingParams {
    fn default() -> Self {
        DuffingParams {
            kappa: 4.0,
            amplitude: 1.0,
            omega: 2.0 * std::f64::consts::PI,
            phase: 0.0,
        }
    }
}

fn duffing_half(k: f64) -> PolyField {
    PolyField {
        x: Poly2::new([(1.0, 0, 1)]),
        y: Poly2::new([(k, 1, 0), (-k, 3, 0)]),
    }
}

fn default_box() -> DomainBox {
    DomainBox {
        x_min: -4.0,
        x_max: 4.0,
        y_min: -6.0,
        y_max: 6.0,
    }
}

pub fn duffing(p: &DuffingParams) -> PiecewiseSystem {
    let forcing = if p.amplitude == 0.0 {
        Forcing::none()
    } else {
        Forcing {
            terms: vec![ForcingTerm {
                component: 1,
                temporal: Temporal::Cos {
                    omega: p.omega,
                    phase: p.phase,
                },
                spatial: Poly2::new([(p.amplitude, 1, 0)]),
            }],
        }
    };
    PiecewiseSystem {
        label: format!("piecewise duffing (kappa = {})", p.kappa),
        f_minus: duffing_half(1.0),
        f_plus: duffing_half(p.kappa),
        switching: SwitchingFunction {
            g: Poly2::new([(-1.0, 0, 1)]),
        },
        forcing,
        domain: default_box(),
        closed_form: Some(DuffingLoop {
            kappa_minus: 1.0,
            kappa_plus: p.kappa,
            reversed: false,
        }),
    }
}

/// Constant fields pointing at `{y = 0}` from both sides.
pub fn sliding_pair() -> PiecewiseSystem {
    PiecewiseSystem {
        label: "sliding pair".into(),
        f_minus: PolyField {
            x: Poly2::zero(),
            y: Poly2::constant(1.0),
        },
        f_plus: PolyField {
            x: Poly2::zero(),
            y: Poly2::constant(-1.0),
        },
        switching: SwitchingFunction {
            g: Poly2::new([(1.0, 0, 1)]),
        },
        forcing: Forcing::none(),
        domain: default_box(),
        closed_form: None,
    }
}

/// The Duffing fixture with the `Ω⁻` field replaced by one whose stable
/// direction `(2, 1)/√5` points into the region enclosed by the loop.
pub fn scenario4_variant(p: &DuffingParams) -> PiecewiseSystem {
    let base = duffing(p);
    PiecewiseSystem {
        label: format!("scenario-4 variant (kappa = {})", p.kappa),
        f_minus: PolyField {
            x: Poly2::new([(-3.0, 1, 0), (4.0, 0, 1)]),
            y: Poly2::new([(-2.0, 1, 0), (3.0, 0, 1), (-1.0, 3, 0)]),
        },
        closed_form: None,
        ..base
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn duffing_vanishes_at_origin() {
        let sys = duffing(&DuffingParams::default());
        for f in [&sys.f_minus, &sys.f_plus] {
            assert_eq!(f.eval([0.0, 0.0]), [0.0, 0.0]);
        }
        assert_eq!(sys.forcing.eval(0.3, [0.0, 0.0]), [0.0, 0.0]);
    }

    #[test]
    fn duffing_halves_are_divergence_free() {
        let sys = duffing(&DuffingParams::default());
        assert!(sys.f_minus.is_divergence_free());
        assert!(sys.f_plus.is_divergence_free());
    }
}
