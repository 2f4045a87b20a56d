//! Adaptive bisection with a 10-point Gauss–Legendre rule on each panel.
//!
//! A panel is accepted when the rule on the whole panel and on its two
//! halves agree to the panel's share of the tolerance. Kinks such as those
//! of |cos 2t| get isolated by repeated bisection.

use crate::{Error, Result};

/// Nodes on [−1, 1] (positive half) of the 10-point Gauss–Legendre rule.
const NODES: [f64; 5] = [
    0.148_874_338_981_631_22,
    0.433_395_394_129_247_2,
    0.679_409_568_299_024_4,
    0.865_063_366_688_984_5,
    0.973_906_528_517_171_7,
];
const WEIGHTS: [f64; 5] = [
    0.295_524_224_714_752_87,
    0.269_266_719_309_996_35,
    0.219_086_362_515_982_04,
    0.149_451_349_150_580_6,
    0.066_671_344_308_688_14,
];

const ROUNDOFF: f64 = 16.0 * f64::EPSILON;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadratureConfig {
    /// Absolute tolerance on the integral.
    pub tol: f64,
    /// Maximum bisection depth.
    pub max_depth: u32,
}

impl Default for QuadratureConfig {
    fn default() -> Self {
        Self {
            tol: 1e-9,
            max_depth: 40,
        }
    }
}

impl QuadratureConfig {
    pub fn with_tol(tol: f64) -> Self {
        Self { tol, ..Self::default() }
    }

    fn validate(&self) -> Result<()> {
        if !(self.tol > 0.0 && self.tol.is_finite()) {
            return Err(Error::Parameter(format!("quadrature tolerance must be positive, got {}", self.tol)));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Quadrature {
    pub value: f64,
    /// Sum of the accepted panels' whole-vs-halves differences.
    pub error_estimate: f64,
    pub evaluations: usize,
}

/// 10-point Gauss–Legendre rule on [a, b].
pub fn gauss_legendre<F: FnMut(f64) -> f64>(f: &mut F, a: f64, b: f64) -> f64 {
    let c = 0.5 * (a + b);
    let h = 0.5 * (b - a);
    let mut s = 0.0;
    for (x, w) in NODES.iter().zip(WEIGHTS) {
        s += w * (f(c - h * x) + f(c + h * x));
    }
    s * h
}

struct State<F> {
    f: F,
    value: f64,
    error: f64,
    evaluations: usize,
    converged: bool,
    max_depth: u32,
}

impl<F: FnMut(f64) -> f64> State<F> {
    fn panel(&mut self, a: f64, b: f64, whole: f64, tol: f64, depth: u32) {
        let m = 0.5 * (a + b);
        let left = gauss_legendre(&mut self.f, a, m);
        let right = gauss_legendre(&mut self.f, m, b);
        self.evaluations += 20;
        let halves = left + right;
        let err = (whole - halves).abs();
        // below a few ulps of the panel the difference is round-off
        let floor = ROUNDOFF * (left.abs() + right.abs());
        if err <= tol.max(floor) || m <= a || m >= b {
            self.value += halves;
            self.error += err;
        } else if depth >= self.max_depth {
            self.value += halves;
            self.error += err;
            self.converged = false;
        } else {
            self.panel(a, m, left, 0.5 * tol, depth + 1);
            self.panel(m, b, right, 0.5 * tol, depth + 1);
        }
    }
}

/// ∫_a^b f. Fails with [`Error::Quadrature`], carrying the partial sum, if
/// some panel is still unresolved at the depth limit.
pub fn integrate<F: FnMut(f64) -> f64>(f: F, a: f64, b: f64, config: &QuadratureConfig) -> Result<Quadrature> {
    config.validate()?;
    if !(a.is_finite() && b.is_finite()) {
        return Err(Error::Parameter(format!("integration bounds must be finite, got [{a}, {b}]")));
    }
    if a == b {
        return Ok(Quadrature {
            value: 0.0,
            error_estimate: 0.0,
            evaluations: 0,
        });
    }
    let mut st = State {
        f,
        value: 0.0,
        error: 0.0,
        evaluations: 10,
        converged: true,
        max_depth: config.max_depth,
    };
    let whole = gauss_legendre(&mut st.f, a, b);
    st.panel(a, b, whole, config.tol, 0);
    if !st.converged || !st.value.is_finite() {
        return Err(Error::Quadrature {
            partial: st.value,
            error_estimate: st.error,
        });
    }
    Ok(Quadrature {
        value: st.value,
        error_estimate: st.error,
        evaluations: st.evaluations,
    })
}
