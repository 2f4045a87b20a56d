//! Closed forms for the four-qubit example family at β = 1.
//!
//! The distances and time-averaged trace norms below are order-1 (p = 1)
//! quantities of the seven-term example Hamiltonian (no bath-system
//! coupling), except [`cmaybe_system_with_bath_coupling`]. They share
//! nothing with the numerical pipeline beyond the elliptic integral, which is
//! evaluated by its own quadrature.

use serde::Serialize;

use crate::quadrature::{integrate, QuadratureConfig};
use crate::speed_limits::LAMBDA_FLOOR;
use crate::{Error, Result};

/// Euler's number, from e^{β} with β = 1 in the example family.
pub const EULER_E: f64 = std::f64::consts::E;

const ELLIPTIC_TOL: f64 = 1e-13;
const HALF_PI: f64 = std::f64::consts::FRAC_PI_2;
const PI: f64 = std::f64::consts::PI;

/// Amplitude φ and parameter m = k² of 𝔈[φ|m] = ∫₀^φ √(1 − m sin²x) dx.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EllipticArgs {
    pub phi: f64,
    pub m: f64,
}

impl EllipticArgs {
    pub fn new(phi: f64, m: f64) -> Self {
        Self { phi, m }
    }
}

fn elliptic_panel(phi: f64, m: f64) -> Result<f64> {
    let cfg = QuadratureConfig {
        tol: ELLIPTIC_TOL,
        max_depth: 50,
    };
    Ok(integrate(|x: f64| (1.0 - m * x.sin().powi(2)).max(0.0).sqrt(), 0.0, phi, &cfg)?.value)
}

/// Incomplete elliptic integral of the second kind by adaptive quadrature.
///
/// For m ≤ 1 any φ ≥ 0 is accepted; the integrand has period π, so only a
/// quarter period is ever integrated. For m > 1 the integrand turns
/// imaginary past sin²φ = 1/m, which is a domain error.
pub fn ellipe_incomplete(args: EllipticArgs) -> Result<f64> {
    let EllipticArgs { phi, m } = args;
    if !(phi.is_finite() && m.is_finite()) {
        return Err(Error::Parameter(format!("elliptic arguments must be finite, got φ={phi}, m={m}")));
    }
    if phi < 0.0 {
        return Err(Error::Domain(format!("elliptic amplitude must be non-negative, got {phi}")));
    }
    if m > 1.0 {
        if phi >= HALF_PI || m * phi.sin().powi(2) >= 1.0 {
            return Err(Error::Domain(format!("1 − m sin²x reaches zero on [0, {phi}] for m = {m}")));
        }
        return elliptic_panel(phi, m);
    }
    // φ = nπ + r with |r| ≤ π/2; 𝔈 is odd in r and gains 2𝔈[π/2] per period
    let n = (phi / PI).round();
    let r = phi - n * PI;
    let mut value = 0.0;
    if n > 0.0 {
        value += 2.0 * n * elliptic_panel(HALF_PI, m)?;
    }
    if r != 0.0 {
        value += r.signum() * elliptic_panel(r.abs(), m)?;
    }
    Ok(value)
}

fn parity_sign(n: f64) -> f64 {
    if n.rem_euclid(2.0) == 0.0 {
        1.0
    } else {
        -1.0
    }
}

/// ∫₀^τ |cos 2t| dt = N + (−1)^N sin(2τ)/2 with N = ⌊2τ/π + ½⌋; odd in τ.
pub fn abs_cos_integral(tau: f64) -> f64 {
    if tau < 0.0 {
        return -abs_cos_integral(-tau);
    }
    let n = (2.0 * tau / PI + 0.5).floor();
    n + parity_sign(n) * (2.0 * tau).sin() / 2.0
}

/// ∫₀^τ |sin 2t| dt = N + (1 − (−1)^N cos 2τ)/2 with N = ⌊2τ/π⌋; odd in τ.
pub fn abs_sin_integral(tau: f64) -> f64 {
    if tau < 0.0 {
        return -abs_sin_integral(-tau);
    }
    let n = (2.0 * tau / PI).floor();
    n + (1.0 - parity_sign(n) * (2.0 * tau).cos()) / 2.0
}

/// Scale below which a reference time is treated as zero when forming a
/// relative deviation. At full revivals the exact time is 0 and both sides
/// are rounding noise.
pub const TIME_SCALE_FLOOR: f64 = 1e-8;

/// |value − reference| / max(|reference|, [`TIME_SCALE_FLOOR`]).
pub fn relative_time_deviation(value: f64, reference: f64) -> f64 {
    (value - reference).abs() / reference.abs().max(TIME_SCALE_FLOOR)
}

/// Order-1 distances and averaged norms of system and memory, plus the
/// QTSL time in the ratio form printed for each family.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ClosedForms {
    pub dist_s: f64,
    pub dist_m: f64,
    pub lambda_s: f64,
    pub lambda_m: f64,
    /// Numerator of the printed ratio: dist_s + dist_m with common factors removed.
    pub scaled_distance: f64,
    /// Denominator of the printed ratio: lambda_s + lambda_m with the same factors removed.
    pub scaled_norm: f64,
    /// scaled_distance / scaled_norm; `None` when scaled_norm ≤ [`LAMBDA_FLOOR`].
    pub qtsl: Option<f64>,
}

impl ClosedForms {
    /// lambda_s + lambda_m, the denominator of T₁* for two qubits.
    pub fn norm_sum(&self) -> f64 {
        self.lambda_s + self.lambda_m
    }
}

fn check_tau(tau: f64) -> Result<()> {
    if !(tau > 0.0 && tau.is_finite()) {
        return Err(Error::Parameter(format!("closed forms need τ > 0, got {tau}")));
    }
    Ok(())
}

fn ratio(num: f64, den: f64) -> Option<f64> {
    (den > LAMBDA_FLOOR).then(|| num / den)
}

/// C-maybe initial state.
pub fn cmaybe_closed_forms(theta: f64, tau: f64) -> Result<ClosedForms> {
    check_tau(tau)?;
    let e = EULER_E;
    let e2 = e * e;
    let (s, c) = theta.sin_cos();
    let sin2t = (2.0 * tau).sin();
    let root = (2.0 * (1.0 - e2 * e2) * c + (1.0 + e2 * e2) / 2.0 * (3.0 + (2.0 * theta).cos())
        + 2.0 * e2 * s * s * (4.0 * tau).cos())
    .max(0.0)
    .sqrt();
    let dist_s = (s * c * sin2t).abs();
    let dist_m = (c * sin2t).abs() / (1.0 + e2) * root;
    let lobes = 2.0 * abs_cos_integral(tau);
    let g = 1.0 + e2 + (1.0 - e2) * c;
    let ell = ellipe_incomplete(EllipticArgs::new(4.0 * tau, (2.0 * e * s / g).powi(2)))?;
    let lambda_s = (s * c).abs() * lobes / tau;
    let lambda_m = c.abs() * g / (2.0 * (1.0 + e2) * tau) * ell;
    let scaled_distance = sin2t.abs() * (s.abs() + root / (1.0 + e2));
    let scaled_norm = (lobes * s.abs() + g / (2.0 * (1.0 + e2)) * ell) / tau;
    Ok(ClosedForms {
        dist_s,
        dist_m,
        lambda_s,
        lambda_m,
        scaled_distance,
        scaled_norm,
        qtsl: ratio(scaled_distance, scaled_norm),
    })
}

/// Werner-like state on the Z_s ⊗ X_m basis pair.
pub fn werner_zx_closed_forms(lambda: f64, phi: f64, tau: f64) -> Result<ClosedForms> {
    check_tau(tau)?;
    let e = EULER_E;
    let e2 = e * e;
    let (s, c) = phi.sin_cos();
    let sin2p = (2.0 * phi).sin();
    let sin2t = (2.0 * tau).sin();
    let root = (c.powi(4) + e2 * e2 * s.powi(4) + e2 * sin2p * sin2p / 2.0 * (4.0 * tau).cos())
        .max(0.0)
        .sqrt();
    let g = c * c + e2 * s * s;
    let ell = ellipe_incomplete(EllipticArgs::new(4.0 * tau, (e * sin2p / g).powi(2)))?;
    let lobes = 2.0 * abs_cos_integral(tau);
    let scaled_dist_s = (sin2p * sin2t).abs();
    let scaled_dist_m = 2.0 / (1.0 + e2) * sin2t.abs() * root;
    let scaled_lambda_s = lobes * sin2p.abs() / tau;
    let scaled_lambda_m = g / (tau * (1.0 + e2)) * ell;
    let scaled_distance = scaled_dist_s + scaled_dist_m;
    let scaled_norm = scaled_lambda_s + scaled_lambda_m;
    Ok(ClosedForms {
        dist_s: lambda * scaled_dist_s,
        dist_m: lambda * scaled_dist_m,
        lambda_s: lambda * scaled_lambda_s,
        lambda_m: lambda * scaled_lambda_m,
        scaled_distance,
        scaled_norm,
        qtsl: ratio(scaled_distance, scaled_norm),
    })
}

/// |cos 2φ| / (|sin φ + cos φ| √(1 − sin 2φ)), identically 1. At the removable
/// singularities φ = π/4, 3π/4 (mod π) the limit 1 is returned.
pub fn phi_independence_ratio(phi: f64) -> f64 {
    let (s, c) = phi.sin_cos();
    let den = (s + c).abs() * (1.0 - (2.0 * phi).sin()).max(0.0).sqrt();
    if den <= f64::EPSILON {
        return 1.0;
    }
    (2.0 * phi).cos().abs() / den
}

/// Werner-like state on the X_s ⊗ X_m basis pair. The printed ratio is free
/// of both λ and φ.
pub fn werner_xx_closed_forms(lambda: f64, phi: f64, tau: f64) -> Result<ClosedForms> {
    check_tau(tau)?;
    let e = EULER_E;
    let e2 = e * e;
    let sin2t = (2.0 * tau).sin();
    let prefactor = (phi.sin() + phi.cos()).abs() * (1.0 - (2.0 * phi).sin()).max(0.0).sqrt();
    let root = (1.0 + e2 * e2 - 2.0 * e2 * (4.0 * tau).cos()).max(0.0).sqrt();
    let lobes = 2.0 * abs_sin_integral(tau);
    let ell = ellipe_incomplete(EllipticArgs::new(4.0 * tau, -(2.0 * e / (e2 - 1.0)).powi(2)))?;
    let memory_norm = (e2 - 1.0) / (2.0 * (e2 + 1.0)) * ell;
    let scaled_distance = 2.0 * tau.sin().powi(2) + sin2t.abs() * root / (e2 + 1.0);
    let scaled_norm = (lobes + memory_norm) / tau;
    let cos2p = (2.0 * phi).cos().abs();
    Ok(ClosedForms {
        dist_s: 2.0 * lambda * cos2p * tau.sin().powi(2),
        dist_m: lambda * cos2p * sin2t.abs() * root / (e2 + 1.0),
        lambda_s: lambda * prefactor * lobes / tau,
        lambda_m: lambda * prefactor * memory_norm / tau,
        scaled_distance,
        scaled_norm,
        qtsl: ratio(scaled_distance, scaled_norm),
    })
}

/// System distance and averaged norm for the C-maybe state when the bath
/// couples to the system through Z_b Z_s. Memory quantities are unchanged.
pub fn cmaybe_system_with_bath_coupling(theta: f64, tau: f64) -> Result<(f64, f64)> {
    check_tau(tau)?;
    let e2 = EULER_E * EULER_E;
    let sc = (theta.sin() * theta.cos()).abs();
    let dist = sc * (2.0 * tau).sin().abs() * (1.0 + e2 * e2 + 2.0 * e2 * (4.0 * tau).cos()).max(0.0).sqrt() / (1.0 + e2);
    let ell = ellipe_incomplete(EllipticArgs::new(4.0 * tau, (2.0 * EULER_E / (1.0 + e2)).powi(2)))?;
    Ok((dist, sc / (2.0 * tau) * ell))
}

/// Closed forms for one of the built-in families; `params` as in
/// [`crate::hamiltonian::Builtin`].
pub fn family_closed_forms(which: &crate::hamiltonian::Builtin, tau: f64) -> Result<ClosedForms> {
    use crate::hamiltonian::Builtin;
    match *which {
        Builtin::Cmaybe { theta } => cmaybe_closed_forms(theta, tau),
        Builtin::WernerZx { lambda, phi } => werner_zx_closed_forms(lambda, phi, tau),
        Builtin::WernerXx { lambda, phi } => werner_xx_closed_forms(lambda, phi, tau),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::{FRAC_PI_2, FRAC_PI_4};

    fn ellipe(phi: f64, m: f64) -> f64 {
        ellipe_incomplete(EllipticArgs::new(phi, m)).unwrap()
    }

    #[test]
    fn elliptic_special_values() {
        assert_eq!(ellipe(0.0, 0.3), 0.0);
        assert!((ellipe(FRAC_PI_2, 0.0) - FRAC_PI_2).abs() < 1e-14);
        assert!((ellipe(FRAC_PI_2, 1.0) - 1.0).abs() < 1e-13);
        // complete integral E(0.5)
        assert!((ellipe(FRAC_PI_2, 0.5) - 1.350_643_881_047_675_5).abs() < 1e-13);
        // m > 1 inside its domain: 𝔈[φ|m] with sin²φ < 1/m
        let v = ellipe(0.3, 2.0);
        assert!(v > 0.0 && v < 0.3);
    }

    #[test]
    fn elliptic_domain_and_quasi_periodicity() {
        assert!(matches!(ellipe_incomplete(EllipticArgs::new(1.0, 2.0)), Err(Error::Domain(_))));
        assert!(matches!(ellipe_incomplete(EllipticArgs::new(-0.1, 0.5)), Err(Error::Domain(_))));
        assert!(ellipe_incomplete(EllipticArgs::new(f64::NAN, 0.5)).is_err());
        for (phi, m) in [(0.4, -3.0), (2.0, 0.9), (5.5, -10.0), (1.0, 1.0)] {
            let lhs = ellipe(phi + PI, m);
            let rhs = ellipe(phi, m) + 2.0 * ellipe(FRAC_PI_2, m);
            assert!((lhs - rhs).abs() < 1e-11, "φ={phi}, m={m}");
        }
    }

    #[test]
    fn piecewise_trig_integrals() {
        assert!((abs_cos_integral(FRAC_PI_4) - 0.5).abs() < 1e-15);
        assert!((abs_cos_integral(FRAC_PI_2) - 1.0).abs() < 1e-15);
        assert!((abs_sin_integral(FRAC_PI_2) - 1.0).abs() < 1e-15);
        assert_eq!(abs_sin_integral(0.0), 0.0);
        let cfg = QuadratureConfig { tol: 1e-13, max_depth: 64 };
        for tau in [0.1, 0.8, 1.9, 3.3, 6.0, 11.7] {
            let c = integrate(|t: f64| (2.0 * t).cos().abs(), 0.0, tau, &cfg).unwrap().value;
            let s = integrate(|t: f64| (2.0 * t).sin().abs(), 0.0, tau, &cfg).unwrap().value;
            assert!((abs_cos_integral(tau) - c).abs() < 1e-12);
            assert!((abs_sin_integral(tau) - s).abs() < 1e-12);
        }
        // continuity across the lobe boundaries
        for k in 1..6 {
            let edge = k as f64 * FRAC_PI_4;
            assert!((abs_cos_integral(edge - 1e-12) - abs_cos_integral(edge + 1e-12)).abs() < 1e-11);
            assert!((abs_sin_integral(edge - 1e-12) - abs_sin_integral(edge + 1e-12)).abs() < 1e-11);
        }
    }

    #[test]
    fn cmaybe_reference_point() {
        let f = cmaybe_closed_forms(0.7, 1.1).unwrap();
        assert!((f.dist_s - 0.398_366_28).abs() < 1e-8);
        assert!((f.dist_m - 0.151_942_47).abs() < 1e-8);
        assert!((f.lambda_s - 0.533_712_23).abs() < 1e-8);
        assert!((f.lambda_m - 0.428_468_85).abs() < 1e-8);
        // the printed ratio divides numerator and denominator by |cos θ|
        let t = f.qtsl.unwrap();
        assert!((t - (f.dist_s + f.dist_m) / f.norm_sum()).abs() < 1e-12);
        let q = cmaybe_closed_forms(FRAC_PI_4, FRAC_PI_4).unwrap();
        assert!((q.dist_s - 0.5).abs() < 1e-15);
        let z = cmaybe_closed_forms(0.0, 0.9).unwrap();
        assert_eq!(z.dist_s, 0.0);
        assert!((z.dist_m - 2.0 * (1.8f64).sin().abs() / (1.0 + EULER_E * EULER_E)).abs() < 1e-14);
        assert!(cmaybe_closed_forms(FRAC_PI_2, 0.9).unwrap().dist_m < 1e-16);
        assert!(cmaybe_closed_forms(0.3, 0.0).is_err());
    }

    #[test]
    fn werner_zx_reference_point() {
        let f = werner_zx_closed_forms(0.6, 0.7, 1.1).unwrap();
        for (got, want) in [(f.dist_s, 0.478_039_5), (f.dist_m, 0.340_008_9), (f.lambda_s, 0.640_454_7), (f.lambda_m, 0.896_836_2)] {
            assert!((got - want).abs() < 1e-7, "{got} vs {want}");
        }
        let g = werner_zx_closed_forms(1.0, FRAC_PI_4, FRAC_PI_4).unwrap();
        assert!((g.dist_s - 1.0).abs() < 1e-15);
        assert_eq!(werner_zx_closed_forms(1.0, 0.0, 1.0).unwrap().dist_s, 0.0);
        let h = werner_zx_closed_forms(0.2, 0.7, 1.1).unwrap();
        assert_eq!(h.qtsl, f.qtsl);
    }

    #[test]
    fn werner_xx_is_phi_free() {
        let l = werner_xx_closed_forms(1.0, 0.3, FRAC_PI_2).unwrap();
        assert!((l.scaled_distance - 2.0).abs() < 1e-15);
        let small = werner_xx_closed_forms(1.0, 0.3, 1e-6).unwrap();
        assert!(small.qtsl.unwrap() < 1e-5);
        let base = werner_xx_closed_forms(1.0, 0.1, 2.0).unwrap().qtsl.unwrap();
        for phi in [0.5, 1.3, 2.9] {
            let f = werner_xx_closed_forms(0.4, phi, 2.0).unwrap();
            assert_eq!(f.qtsl.unwrap(), base);
            assert!(((f.dist_s + f.dist_m) / f.norm_sum() - base).abs() < 1e-12);
        }
    }

    #[test]
    fn independence_ratio_is_one() {
        for k in 0..400 {
            let phi = 0.013 + k as f64 * 0.0157;
            assert!((phi_independence_ratio(phi) - 1.0).abs() < 1e-12, "φ={phi}");
        }
        assert_eq!(phi_independence_ratio(3.0 * FRAC_PI_4), 1.0);
    }

    #[test]
    fn bath_coupled_system_form_reduces_without_thermal_factor() {
        // at τ = π/4 the thermal factor is (e² − 1)/(e² + 1)
        let (d, _) = cmaybe_system_with_bath_coupling(0.7, FRAC_PI_4).unwrap();
        let e2 = EULER_E * EULER_E;
        let plain = cmaybe_closed_forms(0.7, FRAC_PI_4).unwrap().dist_s;
        assert!((d - plain * (e2 - 1.0) / (e2 + 1.0)).abs() < 1e-14);
    }
}
