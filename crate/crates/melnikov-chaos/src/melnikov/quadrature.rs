//! Globally adaptive Gauss–Kronrod (7, 15) quadrature on finite intervals.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use crate::error::{Error, Result};

const XGK: [f64; 8] = [
    0.991_455_371_120_812_639_206_854_697_526_329,
    0.949_107_912_342_758_524_526_189_684_047_851,
    0.864_864_423_359_769_072_789_712_788_640_926,
    0.741_531_185_599_394_439_863_864_773_280_788,
    0.586_087_235_467_691_130_294_144_845_693_013,
    0.405_845_151_377_397_166_906_606_412_076_961,
    0.207_784_955_007_898_467_600_689_403_773_245,
    0.0,
];

const WGK: [f64; 8] = [
    0.022_935_322_010_529_224_963_732_008_058_970,
    0.063_092_092_629_978_553_290_700_663_189_204,
    0.104_790_010_322_250_183_839_876_322_541_518,
    0.140_653_259_715_525_918_745_189_590_510_238,
    0.169_004_726_639_267_902_826_583_426_598_550,
    0.190_350_578_064_785_409_913_256_402_421_014,
    0.204_432_940_075_298_892_414_161_999_234_649,
    0.209_482_141_084_727_828_012_999_174_891_714,
];

/// Gauss weights for the odd-indexed Kronrod nodes.
const WG: [f64; 4] = [
    0.129_484_966_168_869_693_270_611_432_679_082,
    0.279_705_391_489_276_667_901_467_771_423_780,
    0.381_830_050_505_118_944_950_369_775_488_975,
    0.417_959_183_673_469_387_755_102_040_816_327,
];

/// `(Kronrod value, |Kronrod − Gauss|)` on `[a, b]`.
pub fn gk15(f: &impl Fn(f64) -> f64, a: f64, b: f64) -> (f64, f64) {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let fc = f(c);
    let mut k = WGK[7] * fc;
    let mut g = WG[3] * fc;
    for i in 0..7 {
        let x = h * XGK[i];
        let s = f(c - x) + f(c + x);
        k += WGK[i] * s;
        if i % 2 == 1 {
            g += WG[i / 2] * s;
        }
    }
    (k * h, ((k - g) * h).abs())
}

#[derive(Debug, Clone, Copy)]
struct Piece {
    a: f64,
    b: f64,
    value: f64,
    error: f64,
}

impl PartialEq for Piece {
    fn eq(&self, other: &Self) -> bool {
        self.error == other.error
    }
}

impl Eq for Piece {}

impl PartialOrd for Piece {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Piece {
    fn cmp(&self, other: &Self) -> Ordering {
        self.error.total_cmp(&other.error)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Quadrature {
    pub value: f64,
    pub error: f64,
    pub intervals: usize,
}

/// Integrates `f` over `[breaks[0], breaks[last]]` until the summed error
/// estimate is below `tol`, always splitting the worst piece.
pub fn integrate_adaptive(
    f: &impl Fn(f64) -> f64,
    breaks: &[f64],
    tol: f64,
    max_intervals: usize,
) -> Result<Quadrature> {
    let mut heap = BinaryHeap::new();
    for w in breaks.windows(2) {
        let (value, error) = gk15(f, w[0], w[1]);
        heap.push(Piece { a: w[0], b: w[1], value, error });
    }
    loop {
        let error: f64 = heap.iter().map(|p| p.error).sum();
        let value: f64 = heap.iter().map(|p| p.value).sum();
        if !value.is_finite() {
            return Err(Error::QuadratureNotConverged { tol, estimate: value });
        }
        if error <= tol {
            return Ok(Quadrature { value, error, intervals: heap.len() });
        }
        if heap.len() >= max_intervals {
            return Err(Error::QuadratureNotConverged { tol, estimate: error });
        }
        let worst = heap.pop().expect("nonempty");
        let m = 0.5 * (worst.a + worst.b);
        if m <= worst.a.min(worst.b) || m >= worst.a.max(worst.b) {
            return Err(Error::QuadratureNotConverged { tol, estimate: error });
        }
        for (a, b) in [(worst.a, m), (m, worst.b)] {
            let (value, error) = gk15(f, a, b);
            heap.push(Piece { a, b, value, error });
        }
    }
}

/// Evenly spaced break points with spacing at most `max_len`.
pub fn uniform_breaks(a: f64, b: f64, max_len: f64) -> Vec<f64> {
    let n = (((b - a).abs() / max_len).ceil() as usize).max(1);
    (0..=n).map(|i| a + (b - a) * (i as f64) / (n as f64)).collect()
}
