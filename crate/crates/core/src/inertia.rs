//! Moment-of-inertia parametrizations.
//!
//! A rotationally symmetric mass distribution on a ball of radius `r` has
//! second-moment matrix `λ I`. Everything downstream uses one of three
//! dimensionless proxies for `λ`:
//!
//! * `γ = √(2λ)/r`, the canonical stored value;
//! * the characteristic angle `β` with `cos β = (1-γ²)/(1+γ²)`,
//!   `sin β = 2γ/(1+γ²)`, which drives the no-slip collision map;
//! * `η = γ/√(1+γ²)`, the deformation parameter of the rolling equations.
//!
//! The no-slip map in dimension `n` and the rolling-over-the-edge map in
//! dimension `n+1` agree when `β = π η` ([`match_inertia`]).

use crate::error::{Error, Result};
use crate::math::{atan, sqrt, tan, PI};

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct InertiaParams {
    gamma: f64,
    c_beta: f64,
    s_beta: f64,
    eta: f64,
}

/// `(cos β, sin β)` for a given `γ`.
pub fn beta_from_gamma(gamma: f64) -> Result<(f64, f64)> {
    check_gamma(gamma)?;
    let g2 = gamma * gamma;
    Ok(((1.0 - g2) / (1.0 + g2), 2.0 * gamma / (1.0 + g2)))
}

pub fn eta_from_gamma(gamma: f64) -> Result<f64> {
    check_gamma(gamma)?;
    Ok(gamma / sqrt(1.0 + gamma * gamma))
}

pub fn gamma_from_eta(eta: f64) -> Result<f64> {
    check_eta(eta)?;
    Ok(eta / sqrt(1.0 - eta * eta))
}

/// Rolling parameter `η` of an `(n+1)`-ball → no-slip `γ` of the `n`-ball
/// whose collision map equals the edge-rolling map, i.e. `β = π η`.
pub fn match_inertia(eta_roll: f64) -> Result<f64> {
    check_eta(eta_roll)?;
    Ok(tan(0.5 * PI * eta_roll))
}

/// Inverse of [`match_inertia`].
pub fn unmatch_inertia(gamma_noslip: f64) -> Result<f64> {
    check_gamma(gamma_noslip)?;
    Ok(2.0 * atan(gamma_noslip) / PI)
}

/// `γ` of a uniform solid ball in dimension `n`.
pub fn uniform_ball_gamma(n: u32) -> f64 {
    sqrt(2.0 / (n as f64 + 2.0))
}

/// `η` of a ball in dimension `n` with all mass on its surface. This is the
/// largest value reachable by a mass distribution confined to the ball.
pub fn thin_shell_eta(n: u32) -> f64 {
    sqrt(2.0 / (2.0 + n as f64))
}

fn check_gamma(gamma: f64) -> Result<()> {
    if !gamma.is_finite() || gamma < 0.0 {
        return Err(Error::Domain("gamma must be finite and non-negative"));
    }
    Ok(())
}

fn check_eta(eta: f64) -> Result<()> {
    if !eta.is_finite() || !(0.0..1.0).contains(&eta) {
        return Err(Error::Domain("eta must lie in [0, 1)"));
    }
    Ok(())
}

impl InertiaParams {
    pub fn from_gamma(gamma: f64) -> Result<Self> {
        let (c_beta, s_beta) = beta_from_gamma(gamma)?;
        Ok(Self { gamma, c_beta, s_beta, eta: eta_from_gamma(gamma)? })
    }

    /// `β` in radians, `0 ≤ β < π`.
    pub fn from_beta(beta: f64) -> Result<Self> {
        if !beta.is_finite() || !(0.0..PI).contains(&beta) {
            return Err(Error::Domain("beta must lie in [0, pi)"));
        }
        Self::from_gamma(tan(0.5 * beta))
    }

    pub fn from_eta(eta: f64) -> Result<Self> {
        Self::from_gamma(gamma_from_eta(eta)?)
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }
    pub fn c_beta(&self) -> f64 {
        self.c_beta
    }
    pub fn s_beta(&self) -> f64 {
        self.s_beta
    }
    pub fn eta(&self) -> f64 {
        self.eta
    }
    pub fn beta(&self) -> f64 {
        2.0 * atan(self.gamma)
    }

    /// Parameters of the lower-dimensional no-slip ball matched to this rolling ball.
    pub fn matched_noslip(&self) -> Result<Self> {
        Self::from_gamma(match_inertia(self.eta)?)
    }

    /// True when `η` exceeds the thin-shell bound of an `n`-ball (a "yo-yo"
    /// mass distribution reaching beyond the contact radius).
    pub fn beyond_thin_shell(&self, n: u32) -> bool {
        self.eta > thin_shell_eta(n) + 1e-12
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn beta_examples() {
        assert_eq!(beta_from_gamma(0.0).unwrap(), (1.0, 0.0));
        assert_eq!(beta_from_gamma(1.0).unwrap(), (0.0, 1.0));
        let (c, s) = beta_from_gamma(1.0 / sqrt(2.0)).unwrap();
        assert!((c - 1.0 / 3.0).abs() < 1e-15);
        assert!((s - 2.0 * sqrt(2.0) / 3.0).abs() < 1e-15);
        assert!((s - 0.94281).abs() < 1e-5);
    }

    #[test]
    fn beta_domain_errors() {
        assert!(beta_from_gamma(-0.1).is_err());
        assert!(beta_from_gamma(f64::NAN).is_err());
        assert!(beta_from_gamma(f64::INFINITY).is_err());
        assert!(eta_from_gamma(-1.0).is_err());
    }

    #[test]
    fn eta_examples() {
        assert_eq!(eta_from_gamma(0.0).unwrap(), 0.0);
        assert!((eta_from_gamma(sqrt(1.0 / 3.0)).unwrap() - 0.5).abs() < 1e-15);
        assert!((thin_shell_eta(4) - 0.57735).abs() < 1e-5);
    }

    #[test]
    fn match_examples() {
        assert_eq!(match_inertia(0.0).unwrap(), 0.0);
        assert!((match_inertia(0.5).unwrap() - 1.0).abs() < 1e-15);
        let eta = unmatch_inertia(1.0 / sqrt(2.0)).unwrap();
        assert!((eta - crate::math::acos(1.0 / 3.0) / PI).abs() < 1e-15);
        assert!((eta - 0.39183).abs() < 1e-5);
        assert!(match_inertia(1.0).is_err());
        assert!(match_inertia(-0.01).is_err());
    }

    #[test]
    fn constructors_agree() {
        let a = InertiaParams::from_gamma(0.8).unwrap();
        let b = InertiaParams::from_beta(a.beta()).unwrap();
        let c = InertiaParams::from_eta(a.eta()).unwrap();
        for p in [b, c] {
            assert!((p.gamma() - a.gamma()).abs() < 1e-14);
            assert!((p.c_beta() - a.c_beta()).abs() < 1e-14);
        }
        assert!(InertiaParams::from_eta(1.0).is_err());
        assert!(InertiaParams::from_beta(PI).is_err());
    }

    #[test]
    fn thin_shell_flag() {
        let p = InertiaParams::from_eta(0.9).unwrap();
        assert!(p.beyond_thin_shell(4));
        assert!(!InertiaParams::from_eta(0.5).unwrap().beyond_thin_shell(4));
    }

    #[test]
    fn uniform_ball() {
        assert!((uniform_ball_gamma(2) - 1.0 / sqrt(2.0)).abs() < 1e-15);
    }

    proptest::proptest! {
        #[test]
        fn beta_on_unit_circle(g in 0.0f64..1e3) {
            let (c, s) = beta_from_gamma(g).unwrap();
            proptest::prop_assert!((c * c + s * s - 1.0).abs() < 1e-14);
        }

        #[test]
        fn match_round_trip(eta in 0.0f64..0.999) {
            let g = match_inertia(eta).unwrap();
            proptest::prop_assert!((unmatch_inertia(g).unwrap() - eta).abs() < 1e-12);
            // cos β(γ_n) = cos(π η)
            let (c, _) = beta_from_gamma(g).unwrap();
            proptest::prop_assert!((c - crate::math::cos(PI * eta)).abs() < 1e-12);
        }

        #[test]
        fn eta_increasing(a in 0.0f64..100.0, d in 1e-6f64..10.0) {
            let e1 = eta_from_gamma(a).unwrap();
            let e2 = eta_from_gamma(a + d).unwrap();
            proptest::prop_assert!(e2 > e1 && e2 < 1.0);
        }
    }
}
