//! Derived constants, the sections `L⁰`/`L^in`, and the endpoints `P_s(τ)`,
//! `P_u(τ)` of the perturbed stable and unstable leaves.

mod constants;
mod endpoints;
mod section;
mod shots;

pub use constants::{constants_from_eigenvalues, derive_constants, ChaosConstants};
pub use endpoints::{
    calibrate_distance, compute_endpoints, point_at_distance, predict_distance, write_endpoints_csv,
    DistanceCalibration, EndpointRow, InnerSide, ManifoldEndpoints, SeedLabel,
};
pub use section::{Section, ON_ARC_TOL};
pub use shots::LeafShot;

use std::collections::HashMap;
use std::sync::{Arc, Mutex, OnceLock};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::flow::IntegratorConfig;
use crate::homoclinic::{compute_homoclinic, HomoclinicMethod, HomoclinicOrbit};
use crate::system::{compute_saddle_data, inside_polygon, PiecewiseSystem, SaddleData, POLYGON_POINTS};
use crate::vec2::{norm, normalize, perp, scale, sub, V2};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EndpointMethod {
    /// Bisection between seeds that pass inside and outside the saddle.
    Classifier,
    /// Integration of the leaf from a seed on the saddle eigenvector.
    Shooting,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct GeometryConfig {
    /// Section half-width as a fraction of the loop diameter.
    pub section_fraction: f64,
    pub eps_min: f64,
    pub eps_max: f64,
    /// Decay ball radius `ε^{decay_exponent}` for the classifier.
    pub decay_exponent: f64,
    pub endpoint_method: EndpointMethod,
    /// Distance from the saddle of the seeds of leaf shots.
    pub shot_radius: f64,
    /// Seed distance for the endpoint table, which needs absolute accuracy only.
    pub table_radius: f64,
    /// Node spacing of the interpolated endpoint table.
    pub node_spacing: f64,
    /// Replaces the pure relative error control of the loop integrations.
    pub integrator: Option<IntegratorConfig>,
}

impl Default for GeometryConfig {
    fn default() -> Self {
        GeometryConfig {
            section_fraction: 0.2,
            eps_min: 1e-3,
            eps_max: 2e-2,
            decay_exponent: 0.9,
            endpoint_method: EndpointMethod::Classifier,
            shot_radius: 1e-150,
            table_radius: 1e-24,
            node_spacing: 1.0 / 128.0,
            integrator: None,
        }
    }
}

impl GeometryConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.section_fraction > 0.0 && self.section_fraction < 0.5) {
            return Err(Error::Config(format!(
                "section_fraction must lie in (0, 0.5), got {}",
                self.section_fraction
            )));
        }
        if !(self.eps_min > 0.0 && self.eps_min <= self.eps_max) {
            return Err(Error::Config(format!(
                "need 0 < eps_min <= eps_max, got {} and {}",
                self.eps_min, self.eps_max
            )));
        }
        if !(self.decay_exponent > 0.0 && self.decay_exponent < 1.0) {
            return Err(Error::Config("decay_exponent must lie in (0, 1)".into()));
        }
        if !(self.shot_radius > 0.0 && self.shot_radius < 1e-6) {
            return Err(Error::Config("shot_radius must lie in (0, 1e-6)".into()));
        }
        if !(self.table_radius >= self.shot_radius && self.table_radius < 1e-6) {
            return Err(Error::Config("table_radius must lie in [shot_radius, 1e-6)".into()));
        }
        if !(self.node_spacing > 0.0 && self.node_spacing <= 0.125) {
            return Err(Error::Config("node_spacing must lie in (0, 1/8]".into()));
        }
        if let Some(cfg) = &self.integrator {
            cfg.validate()?;
        }
        Ok(())
    }
}

/// Cached leaf shots keyed by the bit pattern of their crossing time.
const SHOT_CACHE_LIMIT: usize = 64;

/// A system at fixed `ε` together with everything the loop maps need.
pub struct Geometry {
    pub sys: PiecewiseSystem,
    pub eps: f64,
    pub saddle: SaddleData,
    pub gamma: HomoclinicOrbit,
    pub constants: ChaosConstants,
    /// `L⁰(δ)` around `γ(0)`.
    pub l0: Section,
    /// `L^in(δ)` from the origin into the region enclosed by the loop.
    pub lin: Section,
    pub diameter: f64,
    pub cfg: IntegratorConfig,
    pub settings: GeometryConfig,
    method: HomoclinicMethod,
    shots: Mutex<HashMap<u64, Arc<LeafShot>>>,
    nodes: Mutex<HashMap<i64, V2>>,
    reversed: OnceLock<Arc<Geometry>>,
    reversed_flag: bool,
}

impl std::fmt::Debug for Geometry {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Geometry")
            .field("system", &self.sys.label)
            .field("eps", &self.eps)
            .field("reversed", &self.reversed_flag)
            .finish()
    }
}

impl Geometry {
    pub fn new(
        sys: &PiecewiseSystem,
        eps: f64,
        method: HomoclinicMethod,
        settings: GeometryConfig,
    ) -> Result<Geometry> {
        settings.validate()?;
        if !(eps == 0.0 || (eps >= settings.eps_min && eps <= settings.eps_max)) {
            return Err(Error::Config(format!(
                "epsilon {eps} outside [{}, {}] (or zero)",
                settings.eps_min, settings.eps_max
            )));
        }
        Self::build(sys, eps, method, settings, false)
    }

    fn build(
        sys: &PiecewiseSystem,
        eps: f64,
        method: HomoclinicMethod,
        settings: GeometryConfig,
        reversed_flag: bool,
    ) -> Result<Geometry> {
        let saddle = compute_saddle_data(sys)?;
        let gamma = compute_homoclinic(sys, &saddle, method, &IntegratorConfig::default())?;
        let constants = derive_constants(&saddle);
        let diameter = gamma.diameter();
        let delta = settings.section_fraction * diameter;
        let poly = gamma.polyline(POLYGON_POINTS);
        let h = 1e-3 * diameter;
        let p0 = gamma.crossing_point;

        let t0 = normalize(perp(sys.switching.gradient(p0)));
        let outward0 = if inside_polygon(&poly, sub(p0, scale(h, t0))) { t0 } else { scale(-1.0, t0) };
        let l0 = Section::new(&sys.switching, p0, outward0, delta, norm(p0));

        let origin = [0.0, 0.0];
        let ti = normalize(perp(sys.switching.gradient(origin)));
        let outward_in = if inside_polygon(&poly, scale(h, ti)) { ti } else { scale(-1.0, ti) };
        let lin = Section::new(&sys.switching, origin, outward_in, delta, 0.0);

        Ok(Geometry {
            sys: sys.clone(),
            eps,
            saddle,
            gamma,
            constants,
            l0,
            lin,
            diameter,
            cfg: settings.integrator.unwrap_or(IntegratorConfig {
                max_steps: 4_000_000,
                ..IntegratorConfig::relative()
            }),
            settings,
            method,
            shots: Mutex::new(HashMap::new()),
            nodes: Mutex::new(HashMap::new()),
            reversed: OnceLock::new(),
            reversed_flag,
        })
    }

    /// Section half-width `δ`.
    pub fn delta(&self) -> f64 {
        self.l0.half_width
    }

    /// Whether this is the time-reversed copy of a user system.
    pub fn is_reversed(&self) -> bool {
        self.reversed_flag
    }

    pub fn homoclinic_method(&self) -> HomoclinicMethod {
        self.method
    }

    /// The same setting for the time-reversed system, built on first use.
    pub fn reversed(&self) -> Result<Arc<Geometry>> {
        if let Some(g) = self.reversed.get() {
            return Ok(g.clone());
        }
        let g = Arc::new(Self::build(
            &self.sys.time_reversed(),
            self.eps,
            self.method,
            self.settings,
            !self.reversed_flag,
        )?);
        Ok(self.reversed.get_or_init(|| g).clone())
    }

    /// Same system at another `ε`.
    pub fn with_epsilon(&self, eps: f64) -> Result<Geometry> {
        Geometry::new(&self.sys, eps, self.method, self.settings)
    }

    /// Stable leaf through `L⁰` at time `t`, integrated from the saddle.
    pub fn stable_shot(&self, t: f64) -> Result<Arc<LeafShot>> {
        let key = t.to_bits();
        if let Some(s) = self.shots.lock().expect("shot cache").get(&key) {
            return Ok(s.clone());
        }
        let shot = Arc::new(shots::stable_shot(self, t, self.settings.shot_radius)?);
        let mut cache = self.shots.lock().expect("shot cache");
        if cache.len() >= SHOT_CACHE_LIMIT {
            cache.clear();
        }
        cache.insert(key, shot.clone());
        Ok(shot)
    }

    /// Computes the whole endpoint table of both directions up front.
    pub fn prepare_endpoint_tables(&self) -> Result<()> {
        let rev = self.reversed()?;
        let (a, b) = rayon::join(|| shots::fill_period(self), || shots::fill_period(&rev));
        a.and(b)
    }

    /// `P_s(t)` from the interpolated table of leaf shots.
    pub fn stable_endpoint(&self, t: f64) -> Result<V2> {
        shots::interpolated_endpoint(self, t)
    }

    /// `P_u(t)`, the stable endpoint of the reversed system at `−t`.
    pub fn unstable_endpoint(&self, t: f64) -> Result<V2> {
        self.reversed()?.stable_endpoint(-t)
    }

    /// `𝒟(P_s(t), P_u(t))` from the shooting endpoints.
    pub fn splitting(&self, t: f64) -> Result<f64> {
        let ps = self.stable_endpoint(t)?;
        let pu = self.unstable_endpoint(t)?;
        self.l0.directed_distance(ps, pu)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::system::{duffing, DuffingParams};

    pub(crate) fn fixture(eps: f64) -> Geometry {
        let sys = duffing(&DuffingParams::default());
        Geometry::new(&sys, eps, HomoclinicMethod::ClosedForm, GeometryConfig::default()).unwrap()
    }

    #[test]
    fn sections_of_the_fixture() {
        let g = fixture(0.0);
        assert_eq!(g.l0.tangent, [1.0, 0.0]);
        assert_eq!(g.lin.tangent, [1.0, 0.0]);
        assert!((g.delta() - 0.2 * g.diameter).abs() < 1e-15);
        let r = g.reversed().unwrap();
        assert_eq!(r.l0.tangent, [1.0, 0.0]);
        assert_eq!(r.lin.tangent, [1.0, 0.0]);
        assert!(r.is_reversed());
    }

    #[test]
    fn epsilon_range_is_enforced() {
        let sys = duffing(&DuffingParams::default());
        let err = Geometry::new(&sys, 0.5, HomoclinicMethod::ClosedForm, GeometryConfig::default()).unwrap_err();
        assert!(matches!(err, Error::Config(_)));
    }
}
