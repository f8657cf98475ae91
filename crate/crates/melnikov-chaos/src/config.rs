//! Experiment configuration, read from TOML or JSON.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::constructor::{ConstructionConfig, SymbolSequence, Tail, TimeOptions, TimeSide};
use crate::error::{Error, Result};
use crate::geometry::GeometryConfig;
use crate::homoclinic::HomoclinicMethod;
use crate::melnikov::ZeroScanConfig;
use crate::poly::Poly2;
use crate::system::{
    duffing, scenario4_variant, sliding_pair, DomainBox, DuffingParams, Forcing, PiecewiseSystem, PolyField,
    SwitchingFunction,
};

/// A builtin fixture or a system given by polynomial coefficients.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "fixture", rename_all = "snake_case", deny_unknown_fields)]
pub enum SystemSpec {
    Duffing(DuffingParams),
    Scenario4(DuffingParams),
    Sliding,
    Polynomial {
        #[serde(default)]
        label: Option<String>,
        f_minus: PolyField,
        f_plus: PolyField,
        switching: Poly2,
        #[serde(default)]
        forcing: Forcing,
        domain: DomainBox,
    },
}

impl Default for SystemSpec {
    fn default() -> Self {
        SystemSpec::Duffing(DuffingParams::default())
    }
}

impl SystemSpec {
    pub fn build(&self) -> PiecewiseSystem {
        match self {
            SystemSpec::Duffing(p) => duffing(p),
            SystemSpec::Scenario4(p) => scenario4_variant(p),
            SystemSpec::Sliding => sliding_pair(),
            SystemSpec::Polynomial {
                label,
                f_minus,
                f_plus,
                switching,
                forcing,
                domain,
            } => PiecewiseSystem {
                label: label.clone().unwrap_or_else(|| "polynomial system".into()),
                f_minus: f_minus.clone(),
                f_plus: f_plus.clone(),
                switching: SwitchingFunction { g: switching.clone() },
                forcing: forcing.clone(),
                domain: *domain,
                closed_form: None,
            },
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct MelnikovOptions {
    /// Absolute quadrature tolerance.
    pub tol: f64,
    /// Phase range of the `melnikov` table.
    pub range: [f64; 2],
    pub step: f64,
}

impl Default for MelnikovOptions {
    fn default() -> Self {
        MelnikovOptions {
            tol: 1e-11,
            range: [0.0, 1.0],
            step: 1e-2,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ZeroOptions {
    /// Phase range scanned for zeros.
    pub range: [f64; 2],
    pub step: f64,
    pub scan: ZeroScanConfig,
}

impl Default for ZeroOptions {
    fn default() -> Self {
        ZeroOptions {
            range: [-0.3, 2.3],
            step: 1e-2,
            scan: ZeroScanConfig::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct EndpointOptions {
    /// Phases of the `endpoints` table; `count` equally spaced phases over one period when absent.
    pub taus: Option<Vec<f64>>,
    pub count: usize,
}

impl Default for EndpointOptions {
    fn default() -> Self {
        EndpointOptions { taus: None, count: 16 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ScalingOptions {
    pub d_min: f64,
    pub d_max: f64,
    /// Log-spaced grid points.
    pub points: usize,
    /// Bound margin; `μ₀/2` when absent.
    pub mu: Option<f64>,
}

impl Default for ScalingOptions {
    fn default() -> Self {
        ScalingOptions {
            d_min: 1e-7,
            d_max: 1e-4,
            points: 13,
            mu: None,
        }
    }
}

impl ScalingOptions {
    pub fn grid(&self) -> Vec<f64> {
        let (a, b) = (self.d_min.ln(), self.d_max.ln());
        let n = self.points - 1;
        (0..=n).map(|i| (a + (b - a) * i as f64 / n as f64).exp()).collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ShadowOptions {
    /// Deepest-chart coordinate to re-verify; all probe points when absent.
    pub d: Option<f64>,
    /// Shadowing constant; the frozen `c*` when absent.
    pub c_star: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ConjugacyOptions {
    pub k_max: usize,
}

impl Default for ConjugacyOptions {
    fn default() -> Self {
        ConjugacyOptions { k_max: 2 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ExperimentConfig {
    pub system: SystemSpec,
    /// `γ` from the closed form when the fixture has one, else by shooting.
    pub homoclinic: Option<HomoclinicMethod>,
    /// The first value is used by single-`ε` subcommands; `sweep` runs all.
    pub epsilon: Vec<f64>,
    /// `ν₀` when absent.
    pub nu: Option<f64>,
    /// First zero of `M` in `[0, period)` when absent.
    pub tau: Option<f64>,
    pub symbols: Vec<String>,
    pub tail: Tail,
    pub side: TimeSide,
    pub construction: ConstructionConfig,
    pub times: TimeOptions,
    pub geometry: GeometryConfig,
    pub melnikov: MelnikovOptions,
    pub zeros: ZeroOptions,
    pub endpoints: EndpointOptions,
    pub scaling: ScalingOptions,
    pub shadow: ShadowOptions,
    pub conjugacy: ConjugacyOptions,
    pub output_dir: PathBuf,
    /// Size of the worker pool; all cores when absent.
    pub workers: Option<usize>,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            system: SystemSpec::default(),
            homoclinic: None,
            epsilon: vec![1e-2],
            nu: None,
            tau: None,
            symbols: ["1", "01", "11", "101"].iter().map(|s| s.to_string()).collect(),
            tail: Tail::Zeros,
            side: TimeSide::Future,
            construction: ConstructionConfig::default(),
            times: TimeOptions::default(),
            geometry: GeometryConfig::default(),
            melnikov: MelnikovOptions::default(),
            zeros: ZeroOptions::default(),
            endpoints: EndpointOptions::default(),
            scaling: ScalingOptions::default(),
            shadow: ShadowOptions::default(),
            conjugacy: ConjugacyOptions::default(),
            output_dir: PathBuf::from("out"),
            workers: None,
        }
    }
}

fn range_ok(r: [f64; 2], step: f64) -> bool {
    r[0].is_finite() && r[1].is_finite() && r[0] < r[1] && step > 0.0 && step <= r[1] - r[0]
}

impl ExperimentConfig {
    /// Parses TOML, or JSON when the text starts with `{`.
    pub fn from_str(text: &str) -> Result<Self> {
        let cfg: ExperimentConfig = if text.trim_start().starts_with('{') {
            serde_json::from_str(text).map_err(|e| Error::Config(e.to_string()))?
        } else {
            toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?
        };
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::from_str(&text)
    }

    pub fn sequences(&self) -> Result<Vec<SymbolSequence>> {
        self.symbols
            .iter()
            .map(|s| SymbolSequence::parse(s, self.tail, self.side))
            .collect()
    }

    /// Checks everything that does not need the system itself.
    pub fn validate(&self) -> Result<()> {
        self.geometry.validate()?;
        self.construction.validate()?;
        if self.epsilon.is_empty() {
            return Err(Error::Config("epsilon list is empty".into()));
        }
        for &e in &self.epsilon {
            if !(e > 0.0 && e >= self.geometry.eps_min && e <= self.geometry.eps_max) {
                return Err(Error::Config(format!(
                    "epsilon {e} outside [{}, {}]",
                    self.geometry.eps_min, self.geometry.eps_max
                )));
            }
        }
        if let Some(nu) = self.nu {
            if !(nu > 0.0 && nu.is_finite()) {
                return Err(Error::Config(format!("nu must be positive, got {nu}")));
            }
        }
        if self.tau.is_some_and(|t| !t.is_finite()) {
            return Err(Error::Config("tau must be finite".into()));
        }
        if self.symbols.is_empty() {
            return Err(Error::Config("symbol list is empty".into()));
        }
        self.sequences()?;
        if self.times.count == 0 || self.times.gap.is_some_and(|g| !(g > 0.0)) {
            return Err(Error::Config("times need count >= 1 and a positive gap".into()));
        }
        if !(self.melnikov.tol > 0.0) || !range_ok(self.melnikov.range, self.melnikov.step) {
            return Err(Error::Config("melnikov needs tol > 0 and a nonempty range with 0 < step <= width".into()));
        }
        if !range_ok(self.zeros.range, self.zeros.step) {
            return Err(Error::Config("zeros need a nonempty range with 0 < step <= width".into()));
        }
        if self.endpoints.taus.as_ref().is_some_and(|t| t.is_empty() || t.iter().any(|x| !x.is_finite()))
            || (self.endpoints.taus.is_none() && self.endpoints.count == 0)
        {
            return Err(Error::Config("endpoints need finite phases or count >= 1".into()));
        }
        let s = &self.scaling;
        if !(s.d_min > 0.0 && s.d_min < s.d_max && s.d_max < 1.0 && s.points >= 3) {
            return Err(Error::Config("scaling needs 0 < d_min < d_max < 1 and points >= 3".into()));
        }
        if s.mu.is_some_and(|m| !(m > 0.0)) {
            return Err(Error::Config("scaling mu must be positive".into()));
        }
        if self.shadow.d.is_some_and(|d| !(d.is_finite() && d >= 0.0))
            || self.shadow.c_star.is_some_and(|c| !(c > 0.0))
        {
            return Err(Error::Config("shadow needs d >= 0 and c_star > 0".into()));
        }
        if self.workers == Some(0) {
            return Err(Error::Config("workers must be at least 1".into()));
        }
        Ok(())
    }
}
