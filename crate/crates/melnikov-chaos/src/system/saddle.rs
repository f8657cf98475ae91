use serde::{Deserialize, Serialize};

use super::{PiecewiseSystem, Side};
use crate::error::{Error, Result};
use crate::vec2::{dot, mat_vec, norm, normalize, sub, scale, M2, V2};

/// Below this `|∇G(0)·v|` an eigenvector counts as tangent to the switching curve.
pub const F1_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SaddleData {
    pub lambda_s_minus: f64,
    pub lambda_u_minus: f64,
    pub lambda_s_plus: f64,
    pub lambda_u_plus: f64,
    pub v_s_minus: V2,
    pub v_u_minus: V2,
    pub v_s_plus: V2,
    pub v_u_plus: V2,
}

impl SaddleData {
    pub fn lambda_s(&self, side: Side) -> f64 {
        match side {
            Side::Minus => self.lambda_s_minus,
            Side::Plus => self.lambda_s_plus,
        }
    }

    pub fn lambda_u(&self, side: Side) -> f64 {
        match side {
            Side::Minus => self.lambda_u_minus,
            Side::Plus => self.lambda_u_plus,
        }
    }

    pub fn v_s(&self, side: Side) -> V2 {
        match side {
            Side::Minus => self.v_s_minus,
            Side::Plus => self.v_s_plus,
        }
    }

    pub fn v_u(&self, side: Side) -> V2 {
        match side {
            Side::Minus => self.v_u_minus,
            Side::Plus => self.v_u_plus,
        }
    }
}

/// Eigenvalues (ascending) and unit eigenvectors of a real 2×2 matrix, or
/// `None` when the eigenvalues are complex or repeated.
pub fn eigen_2x2(a: &M2) -> Option<[(f64, V2); 2]> {
    let tr = a[0][0] + a[1][1];
    let det = a[0][0] * a[1][1] - a[0][1] * a[1][0];
    let disc = tr * tr / 4.0 - det;
    if disc <= 0.0 {
        return None;
    }
    let r = disc.sqrt();
    let half = tr / 2.0;
    // Avoid cancellation in the smaller-magnitude root.
    let big = if half >= 0.0 { half + r } else { half - r };
    let small = if big != 0.0 { det / big } else { half - r };
    let (lo, hi) = if big < small { (big, small) } else { (small, big) };
    let vec_for = |lam: f64| -> V2 {
        let c1 = [a[0][1], lam - a[0][0]];
        let c2 = [lam - a[1][1], a[1][0]];
        if norm(c1) >= norm(c2) {
            normalize(c1)
        } else {
            normalize(c2)
        }
    };
    Some([(lo, vec_for(lo)), (hi, vec_for(hi))])
}

fn oriented(v: V2, grad: V2, positive: bool, which: &str) -> Result<V2> {
    let s = dot(grad, v);
    if s.abs() < F1_TOL {
        return Err(Error::F1Violated {
            which: which.into(),
            value: s.abs(),
        });
    }
    Ok(if (s > 0.0) == positive { v } else { scale(-1.0, v) })
}

/// Eigen-data of both halves at the origin, with eigenvector signs fixed so
/// that `∇G(0)·v_u⁻ < 0 < ∇G(0)·v_u⁺` and `∇G(0)·v_s⁻ < 0 < ∇G(0)·v_s⁺`.
pub fn compute_saddle_data(sys: &PiecewiseSystem) -> Result<SaddleData> {
    let origin = [0.0, 0.0];
    let grad = sys.switching.gradient(origin);
    let mut pairs = [[(0.0, [0.0; 2]); 2]; 2];
    for (i, side) in [Side::Minus, Side::Plus].into_iter().enumerate() {
        let jac = sys.jacobian(side, origin);
        let eig = eigen_2x2(&jac);
        match eig {
            Some(e) if e[0].0 < 0.0 && e[1].0 > 0.0 => pairs[i] = e,
            _ => {
                let tr = jac[0][0] + jac[1][1];
                let det = jac[0][0] * jac[1][1] - jac[0][1] * jac[1][0];
                return Err(Error::NotASaddle {
                    side: side.to_string(),
                    eigenvalues: format!("trace {tr}, determinant {det}"),
                });
            }
        }
    }
    let [minus, plus] = pairs;
    Ok(SaddleData {
        lambda_s_minus: minus[0].0,
        lambda_u_minus: minus[1].0,
        lambda_s_plus: plus[0].0,
        lambda_u_plus: plus[1].0,
        v_s_minus: oriented(minus[0].1, grad, false, "v_s_minus")?,
        v_u_minus: oriented(minus[1].1, grad, false, "v_u_minus")?,
        v_s_plus: oriented(plus[0].1, grad, true, "v_s_plus")?,
        v_u_plus: oriented(plus[1].1, grad, true, "v_u_plus")?,
    })
}

/// `‖J v − λ v‖` for an eigenpair.
pub fn eigen_residual(jac: &M2, lambda: f64, v: V2) -> f64 {
    norm(sub(mat_vec(jac, v), scale(lambda, v)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::poly::Poly2;
    use crate::system::{duffing, DuffingParams, PolyField};

    fn close(a: V2, b: V2) -> bool {
        (a[0] - b[0]).abs() < 1e-14 && (a[1] - b[1]).abs() < 1e-14
    }

    #[test]
    fn duffing_kappa4_eigendata() {
        let s = compute_saddle_data(&duffing(&DuffingParams::default())).unwrap();
        let r2 = 2f64.sqrt();
        let r5 = 5f64.sqrt();
        assert_eq!((s.lambda_s_minus, s.lambda_u_minus), (-1.0, 1.0));
        assert_eq!((s.lambda_s_plus, s.lambda_u_plus), (-2.0, 2.0));
        assert!(close(s.v_u_minus, [1.0 / r2, 1.0 / r2]));
        assert!(close(s.v_s_minus, [-1.0 / r2, 1.0 / r2]));
        assert!(close(s.v_u_plus, [-1.0 / r5, -2.0 / r5]));
        assert!(close(s.v_s_plus, [1.0 / r5, -2.0 / r5]));
    }

    #[test]
    fn source_is_not_a_saddle() {
        let mut sys = duffing(&DuffingParams::default());
        sys.f_plus = PolyField {
            x: Poly2::new([(1.0, 1, 0)]),
            y: Poly2::new([(2.0, 0, 1)]),
        };
        assert!(matches!(
            compute_saddle_data(&sys),
            Err(Error::NotASaddle { .. })
        ));
    }

    #[test]
    fn eigenvector_along_switching_line_violates_f1() {
        let mut sys = duffing(&DuffingParams::default());
        // Unstable direction (1, 0) lies on {y = 0}.
        sys.f_plus = PolyField {
            x: Poly2::new([(1.0, 1, 0)]),
            y: Poly2::new([(-1.0, 0, 1)]),
        };
        assert!(matches!(
            compute_saddle_data(&sys),
            Err(Error::F1Violated { .. })
        ));
    }

    #[test]
    fn residuals_are_small() {
        let sys = duffing(&DuffingParams { kappa: 2.7, ..Default::default() });
        let s = compute_saddle_data(&sys).unwrap();
        for side in [Side::Minus, Side::Plus] {
            let j = sys.jacobian(side, [0.0, 0.0]);
            assert!(eigen_residual(&j, s.lambda_s(side), s.v_s(side)) < 1e-10);
            assert!(eigen_residual(&j, s.lambda_u(side), s.v_u(side)) < 1e-10);
        }
    }
}
