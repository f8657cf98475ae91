//! Admissible time sequences `T_j` built on the zeros of the Melnikov function,
//! and the loop schedule `𝒮_j` selected by a symbol sequence.

use serde::{Deserialize, Serialize};

use super::symbols::{SymbolSequence, TimeSide};
use crate::error::{Error, Result};
use crate::geometry::ChaosConstants;
use crate::melnikov::{ZeroBracket, ZeroClass, ZeroStructure};

/// Required relative slack on every gap inequality.
pub const GAP_SLACK: f64 = 1.01;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GapMode {
    /// Targets `[a↑, a↓]` and the uniform width `Λ¹`.
    Lambda,
    /// Targets `[β, β′]` and the bracket widths `B_j`.
    Bj,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Spacing {
    /// `T_j = t₀ + j·g` with `g` a multiple of the forcing period.
    Arithmetic,
    /// Gaps alternating between `g` and `2g`.
    Alternating,
    /// Each even time is the first zero far enough from the previous one.
    Greedy,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ZeroWindow {
    pub zero: f64,
    pub beta: f64,
    pub beta_prime: f64,
    pub a_up: f64,
    pub a_down: f64,
}

impl ZeroWindow {
    pub fn from_bracket(b: &ZeroBracket) -> Self {
        ZeroWindow {
            zero: b.zero,
            beta: b.beta,
            beta_prime: b.beta_prime,
            a_up: b.a_up,
            a_down: b.a_down,
        }
    }

    pub fn shifted(&self, dt: f64) -> Self {
        ZeroWindow {
            zero: self.zero + dt,
            beta: self.beta + dt,
            beta_prime: self.beta_prime + dt,
            a_up: self.a_up + dt,
            a_down: self.a_down + dt,
        }
    }

    /// The window of `t ↦ M(−t)`.
    pub fn reflected(&self) -> Self {
        ZeroWindow {
            zero: -self.zero,
            beta: -self.beta_prime,
            beta_prime: -self.beta,
            a_up: -self.a_down,
            a_down: -self.a_up,
        }
    }

    /// Interval the return time must reach.
    pub fn target(&self, mode: GapMode) -> (f64, f64) {
        match mode {
            GapMode::Lambda => (self.a_up, self.a_down),
            GapMode::Bj => (self.beta, self.beta_prime),
        }
    }

    /// `B`, the width of `[β, β′]`.
    pub fn width(&self) -> f64 {
        self.beta_prime - self.beta
    }

    pub fn contains(&self, t: f64) -> bool {
        t >= self.beta && t <= self.beta_prime
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct TimeOptions {
    pub spacing: Spacing,
    /// Overrides the computed gap in the arithmetic and alternating spacings.
    pub gap: Option<f64>,
    /// Number of times `T_1 … T_count`.
    pub count: usize,
}

impl Default for TimeOptions {
    fn default() -> Self {
        TimeOptions {
            spacing: Spacing::Arithmetic,
            gap: None,
            count: 12,
        }
    }
}

/// Zero windows of `M`, periodically continued when the forcing is periodic.
struct ZeroSource {
    base: Vec<ZeroWindow>,
    period: Option<f64>,
}

impl ZeroSource {
    fn new(zs: &ZeroStructure, period: Option<f64>) -> Result<Self> {
        let all: Vec<ZeroWindow> = zs.zero_brackets.iter().map(ZeroWindow::from_bracket).collect();
        if all.is_empty() {
            return Err(Error::NotEnoughZeros { needed: 1, found: 0 });
        }
        let base = match period {
            Some(p) => {
                let z0 = all[0].zero;
                let one: Vec<ZeroWindow> = all.iter().copied().filter(|w| w.zero < z0 + p - 1e-9 * p).collect();
                if all.last().map(|w| w.zero).unwrap_or(z0) < z0 + p - 1e-9 * p {
                    return Err(Error::Precondition(
                        "the zero scan must cover a full forcing period".into(),
                    ));
                }
                one
            }
            None => all,
        };
        Ok(ZeroSource { base, period })
    }

    /// Windows with zero in `[a, b]`, in increasing order.
    fn between(&self, a: f64, b: f64) -> Vec<ZeroWindow> {
        let mut out = Vec::new();
        match self.period {
            Some(p) => {
                let z0 = self.base[0].zero;
                let k0 = ((a - z0) / p).floor() as i64 - 1;
                let k1 = ((b - z0) / p).ceil() as i64 + 1;
                for k in k0..=k1 {
                    for w in &self.base {
                        let s = w.shifted(k as f64 * p);
                        if s.zero >= a && s.zero <= b {
                            out.push(s);
                        }
                    }
                }
            }
            None => out.extend(self.base.iter().copied().filter(|w| w.zero >= a && w.zero <= b)),
        }
        out.sort_by(|x, y| x.zero.total_cmp(&y.zero));
        out
    }

    fn containing(&self, t: f64) -> Option<ZeroWindow> {
        let reach = self.base.iter().map(|w| w.width()).fold(0.0, f64::max) + 1.0;
        self.between(t - reach, t + reach)
            .into_iter()
            .filter(|w| w.contains(t))
            .min_by(|x, y| (x.zero - t).abs().total_cmp(&(y.zero - t).abs()))
    }
}

/// `T_j` with the zero windows of the even times, for one side of `τ`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TimeSequence {
    pub side: TimeSide,
    /// `T_{±1}, T_{±2}, …`, moving away from `τ`.
    pub times: Vec<f64>,
    /// Zero window of each `T_j`, absent for times that are not zeros.
    pub windows: Vec<Option<ZeroWindow>>,
    pub tau: f64,
    pub nu: f64,
    pub epsilon: f64,
    pub gap_mode: GapMode,
    pub spacing: Spacing,
    /// `[b₀, b₁]` containing `τ`, with its zero `t₀`.
    pub initial: ZeroWindow,
    pub lambda1: f64,
    /// `K₀(1+ν)|ln ε|`.
    pub loop_time: f64,
}

impl TimeSequence {
    /// `T_{±j}`; `j = 0` gives the zero `t₀` next to `τ`.
    pub fn time(&self, j: usize) -> Option<f64> {
        if j == 0 {
            Some(self.initial.zero)
        } else {
            self.times.get(j - 1).copied()
        }
    }

    pub fn window(&self, j: usize) -> Option<ZeroWindow> {
        if j == 0 {
            Some(self.initial)
        } else {
            self.windows.get(j - 1).copied().flatten()
        }
    }

    /// `B_j`; zero for times that are not zeros of `M`.
    pub fn b(&self, j: usize) -> f64 {
        self.window(j).map(|w| w.width()).unwrap_or(0.0)
    }

    /// Lower bound of `|T_{j+1} − T_j|` (for `j = 0`, of `|T_{±1} − b_{1/0}|`).
    pub fn required_gap(&self, j: usize) -> f64 {
        let floor = match self.gap_mode {
            GapMode::Lambda => self.lambda1,
            GapMode::Bj => self.b(j).max(self.b(j + 1)),
        };
        floor + self.loop_time
    }

    /// `|T_{±(j+1)} − T_{±j}|`, or the boundary distance for `j = 0`.
    pub fn gap(&self, j: usize) -> Option<f64> {
        let next = self.time(j + 1)?;
        if j == 0 {
            let edge = match self.side {
                TimeSide::Future => self.initial.beta_prime,
                TimeSide::Past => self.initial.beta,
            };
            return Some((next - edge).abs());
        }
        Some((next - self.time(j)?).abs())
    }

    /// Every gap inequality with the slack [`GAP_SLACK`].
    pub fn validate(&self) -> Result<()> {
        for j in 0..self.times.len() {
            let gap = self.gap(j).expect("index in range");
            let required = self.required_gap(j);
            if gap < GAP_SLACK * required {
                let floor = required - self.loop_time;
                let max_log = (gap / GAP_SLACK - floor) / (self.loop_time / self.epsilon.ln().abs());
                return Err(Error::GapTooSmall { gap, required, max_log });
            }
        }
        Ok(())
    }

    /// `T̲_j = −T_{−j}` for the time-reversed system.
    pub fn reflected(&self) -> TimeSequence {
        TimeSequence {
            side: self.side.other(),
            times: self.times.iter().map(|t| -t).collect(),
            windows: self.windows.iter().map(|w| w.map(|w| w.reflected())).collect(),
            tau: -self.tau,
            initial: self.initial.reflected(),
            ..self.clone()
        }
    }
}

/// Builds `T_1 … T_count` on the side `side` of `τ`.
#[allow(clippy::too_many_arguments)]
pub fn build_time_sequence(
    zs: &ZeroStructure,
    period: Option<f64>,
    eps: f64,
    nu: f64,
    constants: &ChaosConstants,
    tau: f64,
    mode: GapMode,
    side: TimeSide,
    opts: &TimeOptions,
) -> Result<TimeSequence> {
    if nu < constants.nu0 {
        return Err(Error::Precondition(format!("nu = {nu} is below nu0 = {}", constants.nu0)));
    }
    if !(eps > 0.0 && eps < 1.0) {
        return Err(Error::Precondition(format!("epsilon {eps} must lie in (0, 1)")));
    }
    if opts.count == 0 {
        return Err(Error::Precondition("time sequence needs count >= 1".into()));
    }
    if mode == GapMode::Lambda && zs.class < ZeroClass::Minimal {
        return Err(Error::Precondition("the Λ construction needs zeros of minimal class".into()));
    }
    let source = ZeroSource::new(zs, period)?;
    if side == TimeSide::Past {
        // Build on the reflected zero set and reflect the result back.
        let reflected = ZeroSource {
            base: source.base.iter().map(|w| w.reflected()).collect(),
            period,
        };
        let seq = build_future(&reflected, zs.lambda1, eps, nu, constants, -tau, mode, opts)?;
        return Ok(seq.reflected());
    }
    build_future(&source, zs.lambda1, eps, nu, constants, tau, mode, opts)
}

#[allow(clippy::too_many_arguments)]
fn build_future(
    source: &ZeroSource,
    lambda1: f64,
    eps: f64,
    nu: f64,
    constants: &ChaosConstants,
    tau: f64,
    mode: GapMode,
    opts: &TimeOptions,
) -> Result<TimeSequence> {
    let initial = source
        .containing(tau)
        .ok_or_else(|| Error::Precondition(format!("tau = {tau} lies in no zero bracket")))?;
    let loop_time = constants.loop_time(eps, nu);
    let mut seq = TimeSequence {
        side: TimeSide::Future,
        times: Vec::with_capacity(opts.count),
        windows: Vec::with_capacity(opts.count),
        tau,
        nu,
        epsilon: eps,
        gap_mode: mode,
        spacing: opts.spacing,
        initial,
        lambda1,
        loop_time,
    };
    let t0 = initial.zero;
    match opts.spacing {
        Spacing::Arithmetic | Spacing::Alternating => {
            let p = source.period.ok_or_else(|| {
                Error::Precondition("arithmetic spacing needs periodic forcing".into())
            })?;
            let g = match opts.gap {
                Some(g) => g,
                None => p * ((loop_time + 2.0) / p).ceil(),
            };
            if !(g > 0.0) || ((g / p) - (g / p).round()).abs() > 1e-9 {
                return Err(Error::Config(format!("gap {g} must be a positive multiple of the period {p}")));
            }
            let mut t = 0.0;
            for j in 1..=opts.count {
                let step = if opts.spacing == Spacing::Alternating && j % 2 == 0 { 2.0 * g } else { g };
                t += step;
                seq.times.push(t0 + t);
                seq.windows.push(Some(initial.shifted(t)));
            }
        }
        Spacing::Greedy => {
            let floor = |a: &ZeroWindow, b: &ZeroWindow| match mode {
                GapMode::Lambda => lambda1,
                GapMode::Bj => a.width().max(b.width()),
            };
            let mut prev = initial;
            let mut edge = initial.beta_prime;
            let search = 4.0 * (loop_time + lambda1) + 2.0 + source.period.unwrap_or(0.0);
            while seq.times.len() < opts.count {
                let found = source
                    .between(prev.zero, prev.zero + 2.0 * search)
                    .into_iter()
                    .find(|z| {
                        let need = GAP_SLACK * (floor(&prev, z) + loop_time);
                        let mid = 0.5 * (prev.zero + z.zero);
                        mid - edge >= need && z.zero - mid >= need
                    });
                let z = match found {
                    Some(z) => z,
                    None => {
                        return Err(Error::NotEnoughZeros {
                            needed: opts.count.div_ceil(2),
                            found: seq.times.len() / 2,
                        })
                    }
                };
                seq.times.push(0.5 * (prev.zero + z.zero));
                seq.windows.push(None);
                if seq.times.len() < opts.count {
                    seq.times.push(z.zero);
                    seq.windows.push(Some(z));
                }
                edge = z.zero;
                prev = z;
            }
        }
    }
    seq.validate()?;
    Ok(seq)
}

/// `𝒮₀ = τ` and the times `𝒮_j = T_{2k_j}` of the loops required by `e`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LoopSchedule {
    /// `𝒮₀, 𝒮₁, …`.
    pub s: Vec<f64>,
    /// `Δ_j = |𝒮_j − 𝒮_{j−1}|` for `j ≥ 1` (`delta[0]` is unused and zero).
    pub delta: Vec<f64>,
    /// `k_j` with `k₀ = 0`.
    pub k: Vec<usize>,
    /// `(β_{2k_j}, β′_{2k_j})`, with `(b₀, b₁)` at `j = 0`.
    pub brackets: Vec<ZeroWindow>,
}

impl LoopSchedule {
    pub fn loops(&self) -> usize {
        self.s.len() - 1
    }
}

/// Loop schedule of `e` on `times`.
pub fn loop_schedule(e: &SymbolSequence, times: &TimeSequence) -> Result<LoopSchedule> {
    if e.side != times.side {
        return Err(Error::Precondition("symbol and time sequences lie on different sides".into()));
    }
    let ks = e.one_indices();
    if ks.is_empty() {
        return Err(Error::EmptySchedule);
    }
    let mut sched = LoopSchedule {
        s: vec![times.tau],
        delta: vec![0.0],
        k: vec![0],
        brackets: vec![times.initial],
    };
    let floor = |w: &ZeroWindow| match times.gap_mode {
        GapMode::Lambda => times.lambda1,
        GapMode::Bj => w.width(),
    };
    for k in ks {
        let t = times.time(2 * k).ok_or(Error::NotEnoughZeros {
            needed: k,
            found: times.times.len() / 2,
        })?;
        let w = times.window(2 * k).ok_or_else(|| {
            Error::Precondition(format!("T_{} is not a zero of the Melnikov function", 2 * k))
        })?;
        let prev = *sched.brackets.last().expect("nonempty");
        let delta = (t - sched.s.last().expect("nonempty")).abs();
        let need = 2.0 * times.loop_time + floor(&w) + floor(&prev);
        if delta < need {
            return Err(Error::GapTooSmall {
                gap: delta,
                required: need,
                max_log: (delta - floor(&w) - floor(&prev)) / (2.0 * times.loop_time / times.epsilon.ln().abs()),
            });
        }
        sched.s.push(t);
        sched.delta.push(delta);
        sched.k.push(k);
        sched.brackets.push(w);
    }
    Ok(sched)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::constants_from_eigenvalues;
    use crate::melnikov::{extract_zero_structure, Analytic, ZeroScanConfig};
    use crate::constructor::Tail;

    fn sine_zeros() -> ZeroStructure {
        let m = Analytic(|t: f64| (2.0 * std::f64::consts::PI * t + 0.4).sin());
        extract_zero_structure(&m, (-0.3, 2.3), 1e-3, &ZeroScanConfig::default()).unwrap()
    }

    fn fixture_constants() -> ChaosConstants {
        constants_from_eigenvalues(-2.0, 2.0, -1.0, 1.0)
    }

    fn opts(spacing: Spacing, count: usize) -> TimeOptions {
        TimeOptions { spacing, gap: None, count }
    }

    #[test]
    fn arithmetic_sequence_has_the_integer_gap() {
        let zs = sine_zeros();
        let c = fixture_constants();
        let t0 = zs.zero_brackets[1].zero;
        let seq = build_time_sequence(&zs, Some(1.0), 1e-2, 1.0, &c, t0, GapMode::Lambda, TimeSide::Future, &opts(Spacing::Arithmetic, 6))
            .unwrap();
        assert_eq!(c.periodic_gap(1e-2, 1.0), 23.0);
        for j in 1..=6 {
            assert!((seq.time(j).unwrap() - t0 - 23.0 * j as f64).abs() < 1e-12);
            assert!((seq.window(j).unwrap().zero - seq.time(j).unwrap()).abs() < 1e-12);
        }
    }

    #[test]
    fn short_gap_is_rejected() {
        let zs = sine_zeros();
        let c = fixture_constants();
        let t0 = zs.zero_brackets[1].zero;
        let o = TimeOptions { gap: Some(5.0), ..opts(Spacing::Arithmetic, 4) };
        let err = build_time_sequence(&zs, Some(1.0), 1e-2, 1.0, &c, t0, GapMode::Lambda, TimeSide::Future, &o)
            .unwrap_err();
        assert!(matches!(err, Error::GapTooSmall { .. }), "{err:?}");
    }

    #[test]
    fn alternating_and_greedy_sequences() {
        let zs = sine_zeros();
        let c = fixture_constants();
        let t0 = zs.zero_brackets[1].zero;
        let alt = build_time_sequence(&zs, Some(1.0), 1e-2, 1.0, &c, t0, GapMode::Lambda, TimeSide::Future, &opts(Spacing::Alternating, 5))
            .unwrap();
        let gaps: Vec<f64> = (1..5).map(|j| alt.gap(j).unwrap()).collect();
        assert_eq!(gaps, vec![46.0, 23.0, 46.0, 23.0]);
        let greedy = build_time_sequence(&zs, Some(1.0), 1e-2, 1.0, &c, t0, GapMode::Bj, TimeSide::Future, &opts(Spacing::Greedy, 6))
            .unwrap();
        greedy.validate().unwrap();
        assert!(greedy.window(2).is_some() && greedy.window(1).is_none());
    }

    #[test]
    fn past_sequence_mirrors_the_future_one() {
        let zs = sine_zeros();
        let c = fixture_constants();
        let t0 = zs.zero_brackets[1].zero;
        let past = build_time_sequence(&zs, Some(1.0), 1e-2, 1.0, &c, t0, GapMode::Lambda, TimeSide::Past, &opts(Spacing::Arithmetic, 4))
            .unwrap();
        assert_eq!(past.side, TimeSide::Past);
        assert!((past.time(1).unwrap() - (t0 - 23.0)).abs() < 1e-9);
        let w = past.window(2).unwrap();
        assert!(w.beta < w.zero && w.zero < w.beta_prime);
        assert_eq!(past.reflected().reflected(), past);
    }

    #[test]
    fn schedules() {
        let zs = sine_zeros();
        let c = fixture_constants();
        let t0 = zs.zero_brackets[1].zero;
        let seq = build_time_sequence(&zs, Some(1.0), 1e-2, 1.0, &c, t0, GapMode::Lambda, TimeSide::Future, &opts(Spacing::Arithmetic, 8))
            .unwrap();
        let e = SymbolSequence::parse("110", Tail::Zeros, TimeSide::Future).unwrap();
        let s = loop_schedule(&e, &seq).unwrap();
        assert_eq!(s.k, vec![0, 1, 2]);
        assert_eq!(s.s[1], seq.time(2).unwrap());
        assert_eq!(s.s[2], seq.time(4).unwrap());
        let e = SymbolSequence::parse("01", Tail::Zeros, TimeSide::Future).unwrap();
        let s = loop_schedule(&e, &seq).unwrap();
        assert_eq!(s.k, vec![0, 2]);
        assert_eq!(s.s[1], seq.time(4).unwrap());
        let z = SymbolSequence::parse("000", Tail::Zeros, TimeSide::Future).unwrap();
        assert!(matches!(loop_schedule(&z, &seq), Err(Error::EmptySchedule)));
    }
}
