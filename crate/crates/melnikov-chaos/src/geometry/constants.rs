//! Exponents, time constants and tuning parameters derived from the saddle eigenvalues.

use serde::{Deserialize, Serialize};

use crate::system::SaddleData;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ChaosConstants {
    pub sigma_fwd_plus: f64,
    pub sigma_fwd_minus: f64,
    pub sigma_fwd: f64,
    pub sigma_bwd_plus: f64,
    pub sigma_bwd_minus: f64,
    pub sigma_bwd: f64,
    pub sigma_lo: f64,
    pub sigma_hi: f64,
    pub big_sigma_fwd_plus: f64,
    pub big_sigma_bwd_minus: f64,
    pub big_sigma_fwd: f64,
    pub big_sigma_bwd: f64,
    pub big_sigma_lo: f64,
    pub big_sigma_hi: f64,
    pub k0: f64,
    pub nu0: f64,
    pub mu0: f64,
    pub lambda_u_minus: f64,
    pub lambda_s_plus: f64,
}

/// Evaluates every constant from the four eigenvalues `(λ_s⁺, λ_u⁺, λ_s⁻, λ_u⁻)`.
pub fn constants_from_eigenvalues(ls_plus: f64, lu_plus: f64, ls_minus: f64, lu_minus: f64) -> ChaosConstants {
    let (sp, up, sm, um) = (ls_plus.abs(), lu_plus, ls_minus.abs(), lu_minus);
    let sigma_fwd_plus = sp / (up + sp);
    let sigma_fwd_minus = (um + sm) / um;
    let sigma_fwd = sigma_fwd_plus * sigma_fwd_minus;
    let sigma_bwd_plus = 1.0 / sigma_fwd_plus;
    let sigma_bwd_minus = 1.0 / sigma_fwd_minus;
    let sigma_bwd = 1.0 / sigma_fwd;
    let sigma_lo = sigma_fwd_plus.min(sigma_bwd_minus);
    let sigma_hi = sigma_fwd_plus.max(sigma_bwd_minus);
    let big_sigma_fwd_plus = 1.0 / (up + sp);
    let big_sigma_bwd_minus = 1.0 / (um + sm);
    let big_sigma_fwd = (um + sp) / (um * (up + sp));
    let big_sigma_bwd = (um + sp) / (sp * (um + sm));
    let big_sigma_lo = big_sigma_fwd.min(big_sigma_bwd);
    let big_sigma_hi = big_sigma_fwd.max(big_sigma_bwd);
    ChaosConstants {
        sigma_fwd_plus,
        sigma_fwd_minus,
        sigma_fwd,
        sigma_bwd_plus,
        sigma_bwd_minus,
        sigma_bwd,
        sigma_lo,
        sigma_hi,
        big_sigma_fwd_plus,
        big_sigma_bwd_minus,
        big_sigma_fwd,
        big_sigma_bwd,
        big_sigma_lo,
        big_sigma_hi,
        k0: 3.0 * big_sigma_hi / (2.0 * sigma_lo),
        nu0: (3.0 * sigma_hi - 1.0).max(1.0),
        mu0: 0.25 * big_sigma_fwd_plus.min(big_sigma_bwd_minus).min(sigma_lo * sigma_lo),
        lambda_u_minus: lu_minus,
        lambda_s_plus: ls_plus,
    }
}

pub fn derive_constants(saddle: &SaddleData) -> ChaosConstants {
    constants_from_eigenvalues(
        saddle.lambda_s_plus,
        saddle.lambda_u_plus,
        saddle.lambda_s_minus,
        saddle.lambda_u_minus,
    )
}

impl ChaosConstants {
    /// `T_a(ε) = |ln ε| / λ_u⁻`.
    pub fn ta(&self, eps: f64) -> f64 {
        eps.ln().abs() / self.lambda_u_minus
    }

    /// `T_b(ε) = |ln ε| / |λ_s⁺|`.
    pub fn tb(&self, eps: f64) -> f64 {
        eps.ln().abs() / self.lambda_s_plus.abs()
    }

    /// `ε^{(1+ν)/σ̲}`, the admissible size of the displacements.
    pub fn localization(&self, eps: f64, nu: f64) -> f64 {
        eps.powf((1.0 + nu) / self.sigma_lo)
    }

    /// `K₀(1+ν)|ln ε|`, the time needed for one loop.
    pub fn loop_time(&self, eps: f64, nu: f64) -> f64 {
        self.k0 * (1.0 + nu) * eps.ln().abs()
    }

    /// Integer gap `⌈K₀(1+ν)|ln ε| + 2⌉` for periodic time sequences.
    pub fn periodic_gap(&self, eps: f64, nu: f64) -> f64 {
        (self.loop_time(eps, nu) + 2.0).ceil()
    }

    /// Identities that must hold for every admissible saddle, as `(name, residual)`.
    pub fn identity_residuals(&self) -> Vec<(&'static str, f64)> {
        vec![
            ("sigma_fwd*sigma_bwd", self.sigma_fwd * self.sigma_bwd - 1.0),
            ("sigma_fwd_plus*sigma_bwd_plus", self.sigma_fwd_plus * self.sigma_bwd_plus - 1.0),
            ("sigma_fwd_minus*sigma_bwd_minus", self.sigma_fwd_minus * self.sigma_bwd_minus - 1.0),
            ("sigma_fwd=plus*minus", self.sigma_fwd - self.sigma_fwd_plus * self.sigma_fwd_minus),
        ]
    }

    /// `σ̲ ≤ σ̄ < 1` and all `Σ > 0`.
    pub fn is_admissible(&self) -> bool {
        self.sigma_lo <= self.sigma_hi
            && self.sigma_hi < 1.0
            && [
                self.big_sigma_fwd_plus,
                self.big_sigma_bwd_minus,
                self.big_sigma_fwd,
                self.big_sigma_bwd,
            ]
            .iter()
            .all(|&s| s > 0.0)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn unit_eigenvalues() {
        let c = constants_from_eigenvalues(-1.0, 1.0, -1.0, 1.0);
        assert_eq!(c.sigma_fwd_plus, 0.5);
        assert_eq!(c.sigma_bwd_minus, 0.5);
        assert_eq!((c.sigma_lo, c.sigma_hi), (0.5, 0.5));
        assert_eq!((c.big_sigma_fwd, c.big_sigma_bwd), (1.0, 1.0));
        assert_eq!((c.k0, c.nu0, c.mu0), (3.0, 1.0, 1.0 / 16.0));
        assert!(c.is_admissible());
    }

    #[test]
    fn asymmetric_eigenvalues() {
        let c = constants_from_eigenvalues(-2.0, 1.0, -1.0, 3.0);
        let close = |a: f64, b: f64| (a - b).abs() < 1e-14;
        assert!(close(c.sigma_fwd_plus, 2.0 / 3.0));
        assert!(close(c.sigma_fwd, 8.0 / 9.0));
        assert!(close(c.sigma_bwd_minus, 3.0 / 4.0));
        assert!(close(c.sigma_lo, 2.0 / 3.0) && close(c.sigma_hi, 3.0 / 4.0));
        assert!(close(c.big_sigma_fwd, 5.0 / 9.0) && close(c.big_sigma_bwd, 5.0 / 8.0));
        assert!(close(c.k0, 45.0 / 32.0) && close(c.nu0, 5.0 / 4.0) && close(c.mu0, 1.0 / 16.0));
    }

    #[test]
    fn smooth_case_reduces_to_eigenvalue_ratio() {
        let c = constants_from_eigenvalues(-1.5, 2.5, -1.5, 2.5);
        assert!((c.sigma_fwd - 1.5 / 2.5).abs() < 1e-15);
        assert!((c.big_sigma_fwd - 1.0 / 2.5).abs() < 1e-15);
    }

    #[test]
    fn fixture_gap() {
        let c = constants_from_eigenvalues(-2.0, 2.0, -1.0, 1.0);
        assert_eq!(c.k0, 2.25);
        assert_eq!(c.periodic_gap(1e-2, 1.0), 23.0);
        assert!(c.ta(1e-2).max(c.tb(1e-2)) <= 2.0 * c.k0 * (1e-2f64).ln().abs());
    }
}
