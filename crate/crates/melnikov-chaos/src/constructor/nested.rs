//! Nested intervals of start displacements whose loops return at the scheduled times.
//!
//! Level `n` is solved in its own chart: the coordinate is the displacement
//! from the stable leaf crossing `L⁰` at `A_{n−1}`, where `A_{n−1}` is the
//! return time of the previous level's orbit that lands on that leaf. On a
//! level's interval the return displacement is affine in the chart coordinate,
//! so the next chart is that affine image.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::symbols::{SymbolSequence, Tail, TimeSide};
use super::times::{loop_schedule, GapMode, LoopSchedule, TimeSequence, ZeroWindow};
use crate::error::{Error, Result};
use crate::geometry::Geometry;
use crate::poincare::{loop_forward, LoopResult};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ConstructionConfig {
    pub mode: GapMode,
    /// Largest number of levels.
    pub levels: usize,
    /// Initial grid of return times per level.
    pub grid_points: usize,
    /// Iteration cap of every one-dimensional root solve.
    pub max_depth: usize,
    /// Smallest chart coordinate probed.
    pub min_displacement: f64,
    /// Windows checked after the last loop of a zero-tail sequence.
    pub tail_windows: usize,
}

impl Default for ConstructionConfig {
    fn default() -> Self {
        ConstructionConfig {
            mode: GapMode::Lambda,
            levels: 3,
            grid_points: 64,
            max_depth: 40,
            min_displacement: 1e-120,
            tail_windows: 2,
        }
    }
}

impl ConstructionConfig {
    pub fn validate(&self) -> Result<()> {
        if self.levels == 0 {
            return Err(Error::Config("levels must be at least 1".into()));
        }
        if self.grid_points < 8 {
            return Err(Error::Config("grid_points must be at least 8".into()));
        }
        if self.max_depth < 8 {
            return Err(Error::Config("max_depth must be at least 8".into()));
        }
        if !(self.min_displacement > 0.0 && self.min_displacement < 1e-20) {
            return Err(Error::Config("min_displacement must lie in (0, 1e-20)".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Level {
    pub n: usize,
    pub k: usize,
    /// `𝒮_n`.
    pub target_time: f64,
    /// Interval the return time must reach.
    pub target: (f64, f64),
    /// `A_{n−1}`, base time of the chart.
    pub base_time: f64,
    /// `I_n` in chart coordinates.
    pub i_n: (f64, f64),
    /// Whether the lower end of `I_n` lies below `ε^{(1+ν)/σ̲}` before clamping.
    pub lower_end_feasible: bool,
    pub grid_points: usize,
    /// Number of grid brackets on which the return time crosses the target.
    pub brackets_found: usize,
    /// `Ǐ_n = [a′_n, b′_n]`.
    pub i_check: (f64, f64),
    /// `Ǎ⁺_n`, `Ǎ⁻_n` with `d_n = ±ε^{(1+ν)/σ̲}`.
    pub a_plus: f64,
    pub a_minus: f64,
    /// `J_n = [D̲_n, D̄_n]`.
    pub j_n: (f64, f64),
    /// `J_n` in the previous level's chart.
    pub j_parent: Option<(f64, f64)>,
    /// Return times at `D̲_n`, the midpoint, `D̄_n`.
    pub return_times: [f64; 3],
    /// `α = 𝒯_n − 𝒮_n` at the midpoint, and its range over the three probes.
    pub alpha_mid: f64,
    pub alpha_min: f64,
    pub alpha_max: f64,
    /// Chart coordinate with `d_n = 0`, its residual, and its return time `A_n`.
    pub d_star: f64,
    pub d_star_residual: f64,
    pub t_star: f64,
    /// `∂d_n/∂D` on `J_n`.
    pub slope: f64,
    /// `[T_{2k_{n−1}+1}, T_{2k_n−1}] ⊂ [A_{n−1} + T_b, 𝒯_n − T_a]`.
    pub sandwich: bool,
}

impl Level {
    pub fn midpoint(&self) -> f64 {
        0.5 * (self.j_n.0 + self.j_n.1)
    }

    /// `D̲_n`, the midpoint, `D̄_n`.
    pub fn probes(&self) -> [f64; 3] {
        [self.j_n.0, self.midpoint(), self.j_n.1]
    }

    fn mirrored(&self) -> Level {
        Level {
            target_time: -self.target_time,
            target: (-self.target.1, -self.target.0),
            base_time: -self.base_time,
            return_times: [-self.return_times[0], -self.return_times[1], -self.return_times[2]],
            alpha_mid: -self.alpha_mid,
            alpha_min: -self.alpha_max,
            alpha_max: -self.alpha_min,
            t_star: -self.t_star,
            ..self.clone()
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NestedIntervals {
    pub sequence: SymbolSequence,
    pub times: TimeSequence,
    /// Absent for the all-zero sequence.
    pub schedule: Option<LoopSchedule>,
    pub mode: GapMode,
    pub epsilon: f64,
    pub nu: f64,
    pub tau: f64,
    /// `ε^{(1+ν)/σ̲}`.
    pub localization: f64,
    pub levels: Vec<Level>,
    pub n_reached: usize,
    /// Lower end of the deepest `J`, in its chart.
    pub d_star: f64,
    /// Chart coordinate of the deepest level whose orbit lands on the stable
    /// leaf, for zero-tail sequences whose `1`s are all realized.
    pub terminal: Option<f64>,
    pub tail_windows: usize,
}

impl NestedIntervals {
    pub fn deepest(&self) -> Option<&Level> {
        self.levels.last()
    }

    /// Chart coordinates that `verify_shadowing` is run at.
    pub fn probe_points(&self) -> Vec<f64> {
        let mut out: Vec<f64> = self.deepest().map(|l| l.probes().to_vec()).unwrap_or_default();
        if let Some(t) = self.terminal {
            out.push(t);
        }
        if self.levels.is_empty() {
            out.push(0.0);
        }
        out
    }

    pub fn side(&self) -> TimeSide {
        self.sequence.side
    }

    /// The same construction expressed in the time-reversed frame.
    pub fn mirrored(&self) -> NestedIntervals {
        NestedIntervals {
            sequence: self.sequence.reflected(),
            times: self.times.reflected(),
            schedule: self.schedule.as_ref().map(|s| LoopSchedule {
                s: s.s.iter().map(|t| -t).collect(),
                brackets: s.brackets.iter().map(|w| w.reflected()).collect(),
                ..s.clone()
            }),
            tau: -self.tau,
            levels: self.levels.iter().map(Level::mirrored).collect(),
            ..self.clone()
        }
    }

    /// Deepest set projected into the first chart (displacement from `P_s(τ)` on `L⁰`).
    pub fn first_chart_extent(&self) -> Vec<f64> {
        let Some(deep) = self.deepest() else {
            return vec![0.0];
        };
        let mut pts = vec![deep.j_n.0, deep.j_n.1];
        if let Some(t) = self.terminal {
            pts.push(t);
        }
        for lvl in self.levels.iter().rev().skip(1) {
            for p in pts.iter_mut() {
                *p = lvl.d_star + *p / lvl.slope;
            }
        }
        pts
    }

    /// `(chart base time, interval)` per level, ending with the landing point
    /// `{0}` for a terminal construction.
    pub fn address(&self) -> Vec<(f64, (f64, f64))> {
        let mut out: Vec<(f64, (f64, f64))> = self.levels.iter().map(|l| (l.base_time, l.j_n)).collect();
        if self.terminal.is_some() {
            let last = self.levels.last().expect("terminal needs a level");
            out.push((last.t_star, (0.0, 0.0)));
        }
        out
    }
}

/// Whether two constructions certify disjoint sets; `None` if they are not comparable.
pub fn disjoint(a: &NestedIntervals, b: &NestedIntervals) -> Option<bool> {
    if a.levels.is_empty() || b.levels.is_empty() {
        return Some(!(a.levels.is_empty() && b.levels.is_empty()));
    }
    let (x, y) = (a.address(), b.address());
    for (p, q) in x.iter().zip(&y) {
        if p.0.to_bits() != q.0.to_bits() {
            return None;
        }
        let (i, j) = (p.1, q.1);
        if i.1 < j.0 || j.1 < i.0 {
            return Some(true);
        }
        if i != j {
            return Some(false);
        }
    }
    Some(false)
}

/// Spread on `L⁰` of the deepest sets of a family, in the first chart.
pub fn aleph_diameter(results: &[NestedIntervals]) -> f64 {
    let pts: Vec<f64> = results.iter().flat_map(|r| r.first_chart_extent()).collect();
    if pts.is_empty() {
        return 0.0;
    }
    let lo = pts.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = pts.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    hi - lo
}

/// Illinois iteration on `f(x) = g(x) − target` in `x = ln D`.
struct Root {
    x: f64,
    value: f64,
    result: LoopResult,
}

fn solve<F>(f: F, mut a: (f64, f64, LoopResult), mut b: (f64, f64, LoopResult), depth: usize, level: usize) -> Result<Root>
where
    F: Fn(f64) -> Result<(f64, LoopResult)>,
{
    if a.1 == 0.0 {
        return Ok(Root { x: a.0, value: 0.0, result: a.2 });
    }
    if b.1 == 0.0 {
        return Ok(Root { x: b.0, value: 0.0, result: b.2 });
    }
    if (a.1 > 0.0) == (b.1 > 0.0) {
        return Err(Error::BracketLost {
            level,
            reason: format!("no sign change on [{:e}, {:e}]", a.0.exp(), b.0.exp()),
        });
    }
    let xtol = 1e-13 * a.0.abs().max(b.0.abs()).max(1.0);
    let mut side = 0i8;
    for _ in 0..depth {
        if (b.0 - a.0).abs() <= xtol {
            break;
        }
        let mut x = b.0 - b.1 * (b.0 - a.0) / (b.1 - a.1);
        let (lo, hi) = if a.0 < b.0 { (a.0, b.0) } else { (b.0, a.0) };
        if !(x > lo && x < hi) {
            x = 0.5 * (a.0 + b.0);
        }
        let (v, r) = f(x)?;
        if v == 0.0 {
            return Ok(Root { x, value: v, result: r });
        }
        if (v > 0.0) == (b.1 > 0.0) {
            b = (x, v, r);
            if side == 1 {
                a.1 *= 0.5;
            }
            side = 1;
        } else {
            a = (x, v, r);
            if side == -1 {
                b.1 *= 0.5;
            }
            side = -1;
        }
    }
    if (b.0 - a.0).abs() > xtol {
        return Err(Error::BracketLost {
            level,
            reason: format!("refinement depth {depth} exhausted near D = {:e}", a.0.exp()),
        });
    }
    let best = if a.1.abs() <= b.1.abs() { a } else { b };
    Ok(Root {
        x: best.0,
        value: best.1,
        result: best.2,
    })
}

struct Chart<'a> {
    geo: &'a Geometry,
    base: f64,
    n: usize,
}

impl Chart<'_> {
    fn eval(&self, x: f64) -> Result<LoopResult> {
        loop_forward(self.geo, x.exp(), self.base).map_err(|e| match e {
            Error::EscapedTube { d, reason } => Error::EscapedTube {
                d,
                reason: format!("level {}: {reason}", self.n),
            },
            other => other,
        })
    }

    fn time_root(&self, lo: (f64, LoopResult), hi: (f64, LoopResult), target: f64, depth: usize) -> Result<Root> {
        solve(
            |x| self.eval(x).map(|r| (r.t1 - target, r)),
            (lo.0, lo.1.t1 - target, lo.1),
            (hi.0, hi.1.t1 - target, hi.1),
            depth,
            self.n,
        )
    }

    fn distance_root(&self, lo: (f64, LoopResult), hi: (f64, LoopResult), target: f64, depth: usize) -> Result<Root> {
        solve(
            |x| self.eval(x).map(|r| (r.d1 - target, r)),
            (lo.0, lo.1.d1 - target, lo.1),
            (hi.0, hi.1.d1 - target, hi.1),
            depth,
            self.n,
        )
    }
}

struct LevelInput {
    n: usize,
    k: usize,
    target_time: f64,
    window: ZeroWindow,
    prev_window: ZeroWindow,
    delta: f64,
    base: f64,
    prev_odd: f64,
    next_odd: f64,
}

fn build_level(geo: &Geometry, inp: &LevelInput, mode: GapMode, loc: f64, lambda1: f64, cfg: &ConstructionConfig) -> Result<Level> {
    let c = &geo.constants;
    let n = inp.n;
    let lost = |reason: String| Error::BracketLost { level: n, reason };
    let floors = match mode {
        GapMode::Lambda => 2.0 * lambda1,
        GapMode::Bj => inp.window.width() + inp.prev_window.width(),
    };
    let lower = (-5.0 * (inp.delta + floors) / (2.0 * c.big_sigma_fwd)).exp();
    let lower_end_feasible = lower < loc;
    let i_n = (lower.max(cfg.min_displacement), loc);
    if !(i_n.0 < i_n.1) {
        return Err(lost(format!("I_n = [{:e}, {:e}] is empty", i_n.0, i_n.1)));
    }
    let chart = Chart { geo, base: inp.base, n };
    let (x0, x1) = (i_n.0.ln(), i_n.1.ln());
    let m = cfg.grid_points;
    let xs: Vec<f64> = (0..m).map(|i| x0 + (x1 - x0) * i as f64 / (m - 1) as f64).collect();
    let grid: Vec<LoopResult> = xs.par_iter().map(|&x| chart.eval(x)).collect::<Result<_>>()?;
    let (t_lo, t_hi) = inp.window.target(mode);

    // b′: first crossing of the early end of the target, scanning up from small D.
    let crossings: Vec<usize> = (0..m - 1).filter(|&i| grid[i].t1 >= t_lo && grid[i + 1].t1 < t_lo).collect();
    let &ib = crossings.first().ok_or_else(|| {
        lost(format!(
            "return times [{:.3}, {:.3}] never reach {t_lo:.3}",
            grid[m - 1].t1, grid[0].t1
        ))
    })?;
    let b_root = chart.time_root((xs[ib], grid[ib]), (xs[ib + 1], grid[ib + 1]), t_lo, cfg.max_depth)?;

    // a′: last crossing of the late end below b′.
    let mut pts: Vec<(f64, LoopResult)> = (0..=ib).map(|i| (xs[i], grid[i])).collect();
    pts.push((b_root.x, b_root.result));
    let ia = (0..pts.len() - 1)
        .rev()
        .find(|&i| pts[i].1.t1 >= t_hi && pts[i + 1].1.t1 < t_hi)
        .ok_or_else(|| lost(format!("return times never reach {t_hi:.3} below b′")))?;
    let a_root = chart.time_root(pts[ia], pts[ia + 1], t_hi, cfg.max_depth)?;
    let (xa, ra) = (a_root.x, a_root.result);
    let (xb, rb) = (b_root.x, b_root.result);
    if (ra.d1 > 0.0) == (rb.d1 > 0.0) || ra.d1.abs() < loc || rb.d1.abs() < loc {
        return Err(lost(format!(
            "return displacement does not cover [−{loc:e}, {loc:e}] on Ǐ (ends {:e}, {:e})",
            ra.d1, rb.d1
        )));
    }
    let plus = chart.distance_root((xa, ra), (xb, rb), loc, cfg.max_depth)?;
    let minus = chart.distance_root((xa, ra), (xb, rb), -loc, cfg.max_depth)?;
    let (a_plus, a_minus) = (plus.x.exp(), minus.x.exp());
    let (lo, hi) = if plus.x < minus.x { (&plus, &minus) } else { (&minus, &plus) };
    let j_n = (lo.x.exp(), hi.x.exp());
    let star = chart.distance_root((lo.x, lo.result), (hi.x, hi.result), 0.0, cfg.max_depth)?;
    let mid = chart.eval((0.5 * (j_n.0 + j_n.1)).ln())?;
    let return_times = [lo.result.t1, mid.t1, hi.result.t1];
    let alphas: Vec<f64> = return_times.iter().map(|t| t - inp.target_time).collect();
    let slope = (plus.result.d1 - minus.result.d1) / (a_plus - a_minus);
    let sandwich = inp.prev_odd >= inp.base + c.tb(geo.eps) && inp.next_odd <= mid.t1 - c.ta(geo.eps);
    Ok(Level {
        n,
        k: inp.k,
        target_time: inp.target_time,
        target: (t_lo, t_hi),
        base_time: inp.base,
        i_n,
        lower_end_feasible,
        grid_points: m,
        brackets_found: crossings.len(),
        i_check: (xa.exp(), xb.exp()),
        a_plus,
        a_minus,
        j_n,
        j_parent: None,
        return_times,
        alpha_mid: alphas[1],
        alpha_min: alphas.iter().copied().fold(f64::INFINITY, f64::min),
        alpha_max: alphas.iter().copied().fold(f64::NEG_INFINITY, f64::max),
        d_star: star.x.exp(),
        d_star_residual: star.value,
        t_star: star.result.t1,
        slope,
        sandwich,
    })
}

/// Nested intervals for a future-side sequence, up to `cfg.levels` loops.
pub fn construct_nested(
    geo: &Geometry,
    e: &SymbolSequence,
    times: &TimeSequence,
    cfg: &ConstructionConfig,
) -> Result<NestedIntervals> {
    cfg.validate()?;
    if e.side != TimeSide::Future || times.side != TimeSide::Future {
        return Err(Error::Precondition("construct_nested takes future-side inputs".into()));
    }
    if times.gap_mode != cfg.mode {
        return Err(Error::Precondition("time sequence was built for another gap mode".into()));
    }
    if (times.epsilon - geo.eps).abs() > 1e-15 * geo.eps {
        return Err(Error::Precondition("time sequence was built for another epsilon".into()));
    }
    let schedule = loop_schedule(e, times)?;
    let loc = geo.constants.localization(geo.eps, times.nu);
    let n_levels = cfg.levels.min(schedule.loops());
    let mut levels: Vec<Level> = Vec::with_capacity(n_levels);
    for n in 1..=n_levels {
        let k = schedule.k[n];
        let prev_k = schedule.k[n - 1];
        let odd = |j: usize| -> Result<f64> {
            times.time(j).ok_or(Error::NotEnoughZeros {
                needed: j.div_ceil(2),
                found: times.times.len() / 2,
            })
        };
        let inp = LevelInput {
            n,
            k,
            target_time: schedule.s[n],
            window: schedule.brackets[n],
            prev_window: schedule.brackets[n - 1],
            delta: schedule.delta[n],
            base: levels.last().map(|l| l.t_star).unwrap_or(times.tau),
            prev_odd: odd(2 * prev_k + 1)?,
            next_odd: odd(2 * k - 1)?,
        };
        let mut level = build_level(geo, &inp, cfg.mode, loc, times.lambda1, cfg)?;
        if let Some(prev) = levels.last() {
            let a = prev.d_star + level.j_n.0 / prev.slope;
            let b = prev.d_star + level.j_n.1 / prev.slope;
            level.j_parent = Some((a.min(b), a.max(b)));
        }
        levels.push(level);
    }
    let deepest = levels.last().expect("at least one level");
    let terminal = (e.tail == Tail::Zeros && n_levels == schedule.loops()).then_some(deepest.d_star);
    Ok(NestedIntervals {
        sequence: e.clone(),
        times: times.clone(),
        schedule: Some(schedule),
        mode: cfg.mode,
        epsilon: geo.eps,
        nu: times.nu,
        tau: times.tau,
        localization: loc,
        d_star: deepest.j_n.0,
        n_reached: levels.len(),
        levels,
        terminal,
        tail_windows: cfg.tail_windows,
    })
}

/// The construction for a sequence without `1`s: the orbit of `P_s(τ)` itself.
pub fn null_construction(
    geo: &Geometry,
    e: &SymbolSequence,
    times: &TimeSequence,
    cfg: &ConstructionConfig,
) -> Result<NestedIntervals> {
    if !e.is_null() || e.side != times.side {
        return Err(Error::Precondition("null construction needs an all-zero sequence".into()));
    }
    Ok(NestedIntervals {
        sequence: e.clone(),
        times: times.clone(),
        schedule: None,
        mode: cfg.mode,
        epsilon: geo.eps,
        nu: times.nu,
        tau: times.tau,
        localization: geo.constants.localization(geo.eps, times.nu),
        levels: Vec::new(),
        n_reached: 0,
        d_star: 0.0,
        terminal: None,
        tail_windows: cfg.tail_windows,
    })
}

/// Nested intervals of `Q_u(d, τ)` for a past-side sequence, by running the
/// forward construction on the time-reversed system.
pub fn construct_backward(
    geo: &Geometry,
    e: &SymbolSequence,
    times: &TimeSequence,
    cfg: &ConstructionConfig,
) -> Result<NestedIntervals> {
    if e.side != TimeSide::Past || times.side != TimeSide::Past {
        return Err(Error::Precondition("construct_backward takes past-side inputs".into()));
    }
    let rev = geo.reversed()?;
    let (fe, ft) = (e.reflected(), times.reflected());
    let forward = if e.is_null() {
        null_construction(&rev, &fe, &ft, cfg)?
    } else {
        construct_nested(&rev, &fe, &ft, cfg)?
    };
    Ok(forward.mirrored())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn level(base: f64, j: (f64, f64)) -> Level {
        Level {
            n: 1,
            k: 1,
            target_time: 0.0,
            target: (0.0, 0.0),
            base_time: base,
            i_n: (0.0, 1.0),
            lower_end_feasible: true,
            grid_points: 64,
            brackets_found: 1,
            i_check: j,
            a_plus: j.0,
            a_minus: j.1,
            j_n: j,
            j_parent: None,
            return_times: [0.0; 3],
            alpha_mid: 0.0,
            alpha_min: 0.0,
            alpha_max: 0.0,
            d_star: 0.5 * (j.0 + j.1),
            d_star_residual: 0.0,
            t_star: base + 10.0,
            slope: 1e10,
            sandwich: true,
        }
    }

    #[test]
    fn illinois_finds_a_root() {
        let r = LoopResult {
            d: 0.0,
            tau: 0.0,
            p1: [0.0; 2],
            t1: 0.0,
            p_half: [0.0; 2],
            t_half: 0.0,
            d1: 0.0,
            big_d1: 0.0,
        };
        let f = |x: f64| Ok((x * x * x - 2.0, r));
        let root = solve(f, (0.0, -2.0, r), (2.0, 6.0, r), 60, 1).unwrap();
        assert!((root.x - 2f64.cbrt()).abs() < 1e-12);
        assert!(matches!(solve(f, (2.0, 6.0, r), (3.0, 25.0, r), 60, 1), Err(Error::BracketLost { .. })));
    }

    #[test]
    fn addresses_decide_disjointness() {
        use crate::constructor::times::{Spacing, ZeroWindow};
        let w = ZeroWindow { zero: 0.0, beta: -0.2, beta_prime: 0.2, a_up: -0.1, a_down: 0.1 };
        let times = TimeSequence {
            side: TimeSide::Future,
            times: vec![],
            windows: vec![],
            tau: 0.0,
            nu: 1.0,
            epsilon: 1e-2,
            gap_mode: GapMode::Lambda,
            spacing: Spacing::Arithmetic,
            initial: w,
            lambda1: 0.2,
            loop_time: 20.0,
        };
        let make = |levels: Vec<Level>, terminal: Option<f64>| NestedIntervals {
            sequence: SymbolSequence::parse("1", Tail::Zeros, TimeSide::Future).unwrap(),
            times: times.clone(),
            schedule: None,
            mode: GapMode::Lambda,
            epsilon: 1e-2,
            nu: 1.0,
            tau: 0.0,
            localization: 1e-8,
            n_reached: levels.len(),
            d_star: 0.0,
            levels,
            terminal,
            tail_windows: 2,
        };
        let one = make(vec![level(0.0, (1.0, 2.0))], Some(1.5));
        let one_one = make(vec![level(0.0, (1.0, 2.0)), level(10.0, (1e-3, 2e-3))], None);
        let other = make(vec![level(0.0, (3.0, 4.0))], None);
        assert_eq!(disjoint(&one, &one_one), Some(true));
        assert_eq!(disjoint(&one, &other), Some(true));
        assert_eq!(disjoint(&one_one, &one_one), Some(false));
        let d = aleph_diameter(&[one, other]);
        assert!((d - 3.0).abs() < 1e-15);
    }
}
