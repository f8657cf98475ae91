//! Arcs of the switching curve used as Poincaré sections, with an arclength
//! coordinate and the directed distance between points on them.

use crate::error::{Error, Result};
use crate::flow::SectionArc;
use crate::system::SwitchingFunction;
use crate::vec2::{add, dot, norm, normalize, perp, scale, sub, V2};

/// Largest `|G(p)|/‖∇G(p)‖` accepted for a point on the arc.
pub const ON_ARC_TOL: f64 = 1e-9;

const TRACE_STEP: f64 = 1e-3;

#[derive(Debug, Clone)]
pub struct Section {
    /// Point with coordinate zero.
    pub anchor: V2,
    /// Unit tangent at the anchor, pointing away from the origin-end of the arc.
    pub tangent: V2,
    pub half_width: f64,
    /// Arclength of the anchor measured from the origin-end.
    pub anchor_arclength: f64,
    switching: SwitchingFunction,
    linear: bool,
}

impl Section {
    /// Arc of `{G = 0}` through `anchor`; `outward` selects the orientation.
    pub fn new(
        switching: &SwitchingFunction,
        anchor: V2,
        outward: V2,
        half_width: f64,
        anchor_arclength: f64,
    ) -> Section {
        let t = normalize(perp(switching.gradient(anchor)));
        let tangent = if dot(t, outward) >= 0.0 { t } else { scale(-1.0, t) };
        Section {
            anchor,
            tangent,
            half_width,
            anchor_arclength,
            switching: switching.clone(),
            linear: switching.is_linear(),
        }
    }

    /// Oriented unit tangent at a point of the arc.
    pub fn tangent_at(&self, p: V2) -> V2 {
        if self.linear {
            return self.tangent;
        }
        let t = normalize(perp(self.switching.gradient(p)));
        if dot(t, self.tangent) >= 0.0 {
            t
        } else {
            scale(-1.0, t)
        }
    }

    fn project(&self, mut p: V2) -> V2 {
        for _ in 0..8 {
            let g = self.switching.value(p);
            let dg = self.switching.gradient(p);
            let n2 = dot(dg, dg);
            if n2 == 0.0 {
                break;
            }
            p = sub(p, scale(g / n2, dg));
            if g.abs() <= 1e-15 * n2.sqrt() {
                break;
            }
        }
        p
    }

    fn trace(&self, s: f64) -> V2 {
        if self.linear {
            return add(self.anchor, scale(s, self.tangent));
        }
        let n = ((s.abs() / TRACE_STEP).ceil() as usize).max(1);
        let h = s / n as f64;
        let mut p = self.anchor;
        for _ in 0..n {
            let k1 = self.tangent_at(p);
            let k2 = self.tangent_at(add(p, scale(0.5 * h, k1)));
            let k3 = self.tangent_at(add(p, scale(0.5 * h, k2)));
            let k4 = self.tangent_at(add(p, scale(h, k3)));
            let dp = scale(h / 6.0, add(add(k1, scale(2.0, k2)), add(scale(2.0, k3), k4)));
            p = self.project(add(p, dp));
        }
        p
    }

    /// Point at arclength `s` from the anchor.
    pub fn point_at(&self, s: f64) -> Result<V2> {
        if !(s.abs() <= self.half_width) {
            return Err(Error::OutOfSection {
                d: s,
                half_width: self.half_width,
            });
        }
        Ok(self.trace(s))
    }

    fn residual(&self, p: V2) -> f64 {
        let g = self.switching.value(p);
        let n = norm(self.switching.gradient(p));
        if n > 0.0 {
            g.abs() / n
        } else {
            g.abs()
        }
    }

    fn check_on_arc(&self, p: V2) -> Result<()> {
        let residual = self.residual(p);
        if residual <= ON_ARC_TOL {
            Ok(())
        } else {
            Err(Error::OffSection { point: p, residual })
        }
    }

    /// Arclength coordinate of `p` relative to the anchor.
    pub fn coordinate(&self, p: V2) -> Result<f64> {
        self.check_on_arc(p)?;
        let mut s = dot(self.tangent, sub(p, self.anchor));
        if !self.linear {
            for _ in 0..20 {
                let q = self.trace(s);
                let ds = dot(self.tangent_at(q), sub(p, q));
                s += ds;
                if ds.abs() <= 1e-15 * (1.0 + s.abs()) {
                    break;
                }
            }
        }
        Ok(s)
    }

    /// Arclength `ℓ(p)` from the origin-end.
    pub fn arclength(&self, p: V2) -> Result<f64> {
        Ok(self.anchor_arclength + self.coordinate(p)?)
    }

    /// `𝒟(q, p) = ℓ(p) − ℓ(q)`; positive when `q` lies between the origin-end and `p`.
    pub fn directed_distance(&self, q: V2, p: V2) -> Result<f64> {
        if self.linear {
            self.check_on_arc(q)?;
            self.check_on_arc(p)?;
            return Ok(dot(self.tangent, sub(p, q)));
        }
        Ok(self.coordinate(p)? - self.coordinate(q)?)
    }
}

impl SectionArc for Section {
    fn contains(&self, p: V2) -> bool {
        self.coordinate(p)
            .map(|s| s.abs() <= self.half_width)
            .unwrap_or(false)
    }
}
