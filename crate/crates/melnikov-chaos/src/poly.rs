//! Bivariate polynomials.
//!
//! Besides plain evaluation, [`Poly2::increment`] computes `p(x + h) − p(x)`
//! term by term so that every summand carries at least one factor of `h`.
//! The loop maps rely on this to follow orbits whose distance from a
//! reference orbit is far below double-precision resolution of the state.

use serde::{Deserialize, Serialize};

use crate::vec2::V2;

/// `coeff · x^px · y^py`, written in configs as `[coeff, px, py]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(from = "(f64, u32, u32)", into = "(f64, u32, u32)")]
pub struct Monomial {
    pub coeff: f64,
    pub px: u32,
    pub py: u32,
}

impl From<(f64, u32, u32)> for Monomial {
    fn from((coeff, px, py): (f64, u32, u32)) -> Self {
        Monomial { coeff, px, py }
    }
}

impl From<Monomial> for (f64, u32, u32) {
    fn from(m: Monomial) -> Self {
        (m.coeff, m.px, m.py)
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Poly2 {
    terms: Vec<Monomial>,
}

fn binomial(n: u32, k: u32) -> f64 {
    let mut c = 1.0;
    for i in 0..k {
        c = c * f64::from(n - i) / f64::from(i + 1);
    }
    c
}

impl Poly2 {
    /// Builds a polynomial from `(coeff, px, py)` triples, merging equal powers
    /// and dropping zero coefficients.
    pub fn new<I: IntoIterator<Item = (f64, u32, u32)>>(terms: I) -> Self {
        let mut out: Vec<Monomial> = Vec::new();
        for (c, px, py) in terms {
            if let Some(m) = out.iter_mut().find(|m| m.px == px && m.py == py) {
                m.coeff += c;
            } else {
                out.push(Monomial { coeff: c, px, py });
            }
        }
        out.retain(|m| m.coeff != 0.0);
        out.sort_by_key(|m| (m.px + m.py, m.px, m.py));
        Poly2 { terms: out }
    }

    pub fn zero() -> Self {
        Poly2 { terms: Vec::new() }
    }

    pub fn constant(c: f64) -> Self {
        Poly2::new([(c, 0, 0)])
    }

    pub fn terms(&self) -> &[Monomial] {
        &self.terms
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn degree(&self) -> u32 {
        self.terms.iter().map(|m| m.px + m.py).max().unwrap_or(0)
    }

    pub fn eval(&self, p: V2) -> f64 {
        self.terms
            .iter()
            .map(|m| m.coeff * p[0].powi(m.px as i32) * p[1].powi(m.py as i32))
            .sum()
    }

    pub fn d_dx(&self) -> Poly2 {
        Poly2::new(
            self.terms
                .iter()
                .filter(|m| m.px > 0)
                .map(|m| (m.coeff * f64::from(m.px), m.px - 1, m.py)),
        )
    }

    pub fn d_dy(&self) -> Poly2 {
        Poly2::new(
            self.terms
                .iter()
                .filter(|m| m.py > 0)
                .map(|m| (m.coeff * f64::from(m.py), m.px, m.py - 1)),
        )
    }

    pub fn gradient(&self, p: V2) -> V2 {
        let mut g = [0.0, 0.0];
        for m in &self.terms {
            if m.px > 0 {
                g[0] += m.coeff
                    * f64::from(m.px)
                    * p[0].powi(m.px as i32 - 1)
                    * p[1].powi(m.py as i32);
            }
            if m.py > 0 {
                g[1] += m.coeff
                    * f64::from(m.py)
                    * p[0].powi(m.px as i32)
                    * p[1].powi(m.py as i32 - 1);
            }
        }
        g
    }

    /// `p(x + h) − p(x)` without cancellation between large equal terms.
    pub fn increment(&self, x: V2, h: V2) -> f64 {
        let mut total = 0.0;
        for m in &self.terms {
            for k in 0..=m.px {
                let ak = binomial(m.px, k) * x[0].powi((m.px - k) as i32) * h[0].powi(k as i32);
                if ak == 0.0 {
                    continue;
                }
                for l in 0..=m.py {
                    if k == 0 && l == 0 {
                        continue;
                    }
                    let bl = binomial(m.py, l)
                        * x[1].powi((m.py - l) as i32)
                        * h[1].powi(l as i32);
                    total += m.coeff * ak * bl;
                }
            }
        }
        total
    }

    pub fn scaled(&self, k: f64) -> Poly2 {
        Poly2::new(self.terms.iter().map(|m| (k * m.coeff, m.px, m.py)))
    }

    pub fn plus(&self, other: &Poly2) -> Poly2 {
        Poly2::new(
            self.terms
                .iter()
                .chain(other.terms.iter())
                .map(|m| (m.coeff, m.px, m.py)),
        )
    }

    /// Antiderivative in `y` vanishing on `y = 0`.
    pub fn integrate_y(&self) -> Poly2 {
        Poly2::new(
            self.terms
                .iter()
                .map(|m| (m.coeff / f64::from(m.py + 1), m.px, m.py + 1)),
        )
    }

    /// Antiderivative in `x` vanishing on `x = 0`.
    pub fn integrate_x(&self) -> Poly2 {
        Poly2::new(
            self.terms
                .iter()
                .map(|m| (m.coeff / f64::from(m.px + 1), m.px + 1, m.py)),
        )
    }

    /// Restriction to `y = 0`, still as a bivariate polynomial.
    pub fn at_y_zero(&self) -> Poly2 {
        Poly2::new(
            self.terms
                .iter()
                .filter(|m| m.py == 0)
                .map(|m| (m.coeff, m.px, 0)),
        )
    }
}
