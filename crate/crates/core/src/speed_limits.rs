//! Time-averaged Schatten norms, QSL and QTSL times, and the audits of the
//! entropy inequalities built on them.
//!
//! Per-subsystem weights are c_x = d_x^{1−1/p} ln d_x. With w_x = c_x Λ_x the
//! QTSL time is T* = Σ w_x T_x / Σ w_x and B* = Σ w_x, so T*·B* = Σ c_x ℓ_x
//! whenever T* is defined.

use std::io::Write;

use serde::Serialize;

use crate::dynamics::{csv_err, Evolution};
use crate::output::format_float;
use crate::quadrature::{integrate, QuadratureConfig};
use crate::states::DensityMatrix;
use crate::tensor::{check_p, schatten_from_singular, singular_values, MEMORY, SYSTEM};
use crate::thermo::{ledger, ThermoLedger};
use crate::{Error, Result};

/// Λ at or below this leaves T = ℓ/Λ undefined.
pub const LAMBDA_FLOOR: f64 = 1e-12;
/// Margins in (−AUDIT_TOL, 0) are flagged, not failed.
pub const AUDIT_TOL: f64 = 1e-9;
/// The Fannes-type constant 2/e.
pub const FANNES_CONSTANT: f64 = 2.0 / std::f64::consts::E;

/// ℓ_p(ρ₁, ρ₂) = ‖ρ₁ − ρ₂‖_p.
pub fn schatten_distance(a: &DensityMatrix, b: &DensityMatrix, p: f64) -> Result<f64> {
    check_p(p)?;
    if a.layout() != b.layout() {
        return Err(Error::Shape(format!("distance between {} and {}", a.layout(), b.layout())));
    }
    Ok(schatten_from_singular(&singular_values(&(a.matrix() - b.matrix())), p))
}

/// d^{1−1/p} ln d.
pub fn dimension_weight(dim: usize, p: f64) -> f64 {
    let d = dim as f64;
    let expo = if p.is_infinite() { 1.0 } else { 1.0 - 1.0 / p };
    d.powf(expo) * d.ln()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TimeAverage {
    pub value: f64,
    /// Absolute error estimate on `value`.
    pub error_estimate: f64,
}

/// Λ^(p) = (1/τ)∫₀^τ ‖∂_t ρ_x‖_p dt, with `quad.tol` an absolute tolerance on Λ.
pub fn time_averaged_norm(evo: &Evolution, label: &str, p: f64, tau: f64, quad: &QuadratureConfig) -> Result<TimeAverage> {
    check_p(p)?;
    if !(tau > 0.0 && tau.is_finite()) {
        return Err(Error::Parameter(format!("averaging time must be positive, got {tau}")));
    }
    evo.reduced_derivative(0.0, label)?;
    let integrand = |t: f64| {
        let d = evo.reduced_derivative(t, label).expect("label checked above");
        schatten_from_singular(&singular_values(d.matrix()), p)
    };
    let cfg = QuadratureConfig {
        tol: quad.tol * tau,
        ..*quad
    };
    match integrate(integrand, 0.0, tau, &cfg) {
        Ok(q) => Ok(TimeAverage {
            value: q.value / tau,
            error_estimate: q.error_estimate / tau,
        }),
        Err(Error::Quadrature { partial, error_estimate }) => Err(Error::Quadrature {
            partial: partial / tau,
            error_estimate: error_estimate / tau,
        }),
        Err(e) => Err(e),
    }
}

/// Distance travelled, averaged speed and their ratio for one subsystem.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SubsystemSpeed {
    pub distance: f64,
    pub lambda: f64,
    /// ℓ/Λ; `None` when Λ ≤ [`LAMBDA_FLOOR`].
    pub time: Option<f64>,
    pub error_estimate: f64,
}

/// At τ = 0 the average is replaced by its limit ‖∂_t ρ_x(0)‖_p and the
/// distance is zero.
pub fn subsystem_speed(evo: &Evolution, label: &str, p: f64, tau: f64, quad: &QuadratureConfig) -> Result<SubsystemSpeed> {
    if tau == 0.0 {
        check_p(p)?;
        let lambda = schatten_from_singular(&singular_values(evo.reduced_derivative(0.0, label)?.matrix()), p);
        return Ok(SubsystemSpeed {
            distance: 0.0,
            lambda,
            time: (lambda > LAMBDA_FLOOR).then_some(0.0),
            error_estimate: 0.0,
        });
    }
    let distance = schatten_distance(&evo.reduced_state(tau, label)?, &evo.reduced_state(0.0, label)?, p)?;
    let avg = time_averaged_norm(evo, label, p, tau, quad)?;
    Ok(SubsystemSpeed {
        distance,
        lambda: avg.value,
        time: (avg.value > LAMBDA_FLOOR).then(|| distance / avg.value),
        error_estimate: avg.error_estimate,
    })
}

/// T^(p) = ℓ_p(E(ρ), ρ)/Λ^(p); `None` for frozen dynamics.
pub fn qsl_time(evo: &Evolution, label: &str, p: f64, tau: f64, quad: &QuadratureConfig) -> Result<Option<f64>> {
    Ok(subsystem_speed(evo, label, p, tau, quad)?.time)
}

/// Speed-limit quantities of system and memory at one (p, τ).
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Qtsl {
    pub p: f64,
    pub tau: f64,
    pub dist_s: f64,
    pub dist_m: f64,
    pub lambda_s: f64,
    pub lambda_m: f64,
    pub t_s: Option<f64>,
    pub t_m: Option<f64>,
    pub lambda_star: f64,
    pub t_star: Option<f64>,
    pub b_star: f64,
    /// Σ c_x ℓ_x, equal to T*·B* when T* is defined.
    pub weighted_distance: f64,
    pub quadrature_error_estimate: f64,
    /// |T* − Σc_xℓ_x / Σc_xΛ_x|, zero when T* is undefined.
    pub identity_residual: f64,
}

impl Qtsl {
    /// T*·B*, falling back to Σ c_x ℓ_x when T* is undefined.
    pub fn rate_bound(&self) -> f64 {
        self.t_star.map_or(self.weighted_distance, |t| t * self.b_star)
    }
}

fn combine(p: f64, tau: f64, d_s: usize, d_m: usize, s: SubsystemSpeed, m: SubsystemSpeed) -> Qtsl {
    let (c_s, c_m) = (dimension_weight(d_s, p), dimension_weight(d_m, p));
    let b_star = c_s * s.lambda + c_m * m.lambda;
    let mut num = 0.0;
    let mut den = 0.0;
    for (c, x) in [(c_s, s), (c_m, m)] {
        if let Some(t) = x.time {
            num += c * x.lambda * t;
            den += c * x.lambda;
        }
    }
    let t_star = (den > 0.0).then(|| num / den);
    let weighted_distance = c_s * s.distance + c_m * m.distance;
    let identity_residual = t_star.map_or(0.0, |t| (t - weighted_distance / b_star).abs());
    let c_total = dimension_weight(d_s * d_m, p);
    Qtsl {
        p,
        tau,
        dist_s: s.distance,
        dist_m: m.distance,
        lambda_s: s.lambda,
        lambda_m: m.lambda,
        t_s: s.time,
        t_m: m.time,
        lambda_star: if c_total > 0.0 { b_star / c_total } else { 0.0 },
        t_star,
        b_star,
        weighted_distance,
        quadrature_error_estimate: s.error_estimate.max(m.error_estimate),
        identity_residual,
    }
}

/// QTSL time T*_p together with Λ*_p and B*_p.
pub fn qtsl_time(evo: &Evolution, p: f64, tau: f64, quad: &QuadratureConfig) -> Result<Qtsl> {
    let layout = evo.scenario().layout();
    let s = subsystem_speed(evo, SYSTEM, p, tau, quad)?;
    let m = subsystem_speed(evo, MEMORY, p, tau, quad)?;
    Ok(combine(p, tau, layout.dim_of(SYSTEM)?, layout.dim_of(MEMORY)?, s, m))
}

/// B*_p = ln(d) d^{1−1/p} Λ*_p with d = d_s d_m.
pub fn bekenstein_bound(evo: &Evolution, p: f64, tau: f64, quad: &QuadratureConfig) -> Result<f64> {
    Ok(qtsl_time(evo, p, tau, quad)?.b_star)
}

/// Stein exponent S(ρ_tot(τ)‖σ_tot(τ)) against T*B* − βQ_eff + 2/e.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct HypothesisTest {
    /// +∞ when ρ_tot(τ) has weight outside the support of σ_tot(τ).
    pub stein_exponent: f64,
    pub upper_bound: f64,
    pub margin: f64,
}

/// Σ c_x ℓ_x + 2/e − |ΔS_s + ΔS_m|.
pub fn fannes_margin(q: &Qtsl, l: &ThermoLedger) -> f64 {
    q.weighted_distance + FANNES_CONSTANT - (l.entropy_change_system + l.entropy_change_memory).abs()
}

/// T*B* + 2/e − (S(ρ_tot(τ)‖σ_tot(τ)) + βQ_eff).
pub fn dynamical_landauer_margin(q: &Qtsl, l: &ThermoLedger, beta: f64) -> f64 {
    q.rate_bound() + FANNES_CONSTANT - (l.relative_entropy_final.nats + beta * l.effective_heat)
}

pub fn hypothesis_test(q: &Qtsl, l: &ThermoLedger, beta: f64) -> HypothesisTest {
    let upper_bound = q.rate_bound() - beta * l.effective_heat + FANNES_CONSTANT;
    let stein_exponent = l.relative_entropy_final.nats;
    HypothesisTest {
        stein_exponent,
        upper_bound,
        margin: upper_bound - stein_exponent,
    }
}

pub fn fannes_audit(evo: &Evolution, p: f64, tau: f64, quad: &QuadratureConfig) -> Result<f64> {
    Ok(fannes_margin(&qtsl_time(evo, p, tau, quad)?, &ledger(evo, tau)?))
}

pub fn dynamical_landauer_audit(evo: &Evolution, p: f64, tau: f64, quad: &QuadratureConfig) -> Result<f64> {
    let beta = evo.scenario().beta();
    Ok(dynamical_landauer_margin(&qtsl_time(evo, p, tau, quad)?, &ledger(evo, tau)?, beta))
}

pub fn hypothesis_testing_bound(evo: &Evolution, p: f64, tau: f64, quad: &QuadratureConfig) -> Result<HypothesisTest> {
    let beta = evo.scenario().beta();
    Ok(hypothesis_test(&qtsl_time(evo, p, tau, quad)?, &ledger(evo, tau)?, beta))
}

/// Speed limits plus every audit at one (p, τ).
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct QtslReport {
    #[serde(flatten)]
    pub qtsl: Qtsl,
    pub fannes_margin: f64,
    pub dynamical_landauer_margin: f64,
    #[serde(flatten)]
    pub hypothesis: HypothesisTest,
}

impl QtslReport {
    /// Audits with a margin below −[`AUDIT_TOL`].
    pub fn violations(&self) -> Vec<&'static str> {
        let mismatch = self.support_mismatch();
        self.margins()
            .into_iter()
            .filter(|(n, m)| !(*m >= -AUDIT_TOL) && !(mismatch && *n != "fannes"))
            .map(|(n, _)| n)
            .collect()
    }

    /// The reference state misses part of the support of the evolved one, so
    /// the relative entropy, and both margins built on it, are infinite.
    pub fn support_mismatch(&self) -> bool {
        self.hypothesis.stein_exponent == f64::INFINITY
    }

    /// Audits with a margin in (−[`AUDIT_TOL`], 0): tolerated, but worth a look.
    pub fn flagged(&self) -> Vec<&'static str> {
        self.margins().into_iter().filter(|(_, m)| *m < 0.0 && *m >= -AUDIT_TOL).map(|(n, _)| n).collect()
    }

    fn margins(&self) -> [(&'static str, f64); 3] {
        [
            ("fannes", self.fannes_margin),
            ("dynamical_landauer", self.dynamical_landauer_margin),
            ("hypothesis_testing", self.hypothesis.margin),
        ]
    }
}

pub fn qtsl_report(evo: &Evolution, p: f64, tau: f64, quad: &QuadratureConfig) -> Result<QtslReport> {
    let q = qtsl_time(evo, p, tau, quad)?;
    let l = ledger(evo, tau)?;
    let beta = evo.scenario().beta();
    Ok(report_from_parts(q, &l, beta))
}

pub fn report_from_parts(q: Qtsl, l: &ThermoLedger, beta: f64) -> QtslReport {
    QtslReport {
        qtsl: q,
        fannes_margin: fannes_margin(&q, l),
        dynamical_landauer_margin: dynamical_landauer_margin(&q, l, beta),
        hypothesis: hypothesis_test(&q, l, beta),
    }
}

/// Columns after the sweep parameters in [`write_sweep_csv`].
pub const SWEEP_COLUMNS: [&str; 17] = [
    "tau",
    "p",
    "dist_s",
    "dist_m",
    "lambda_s",
    "lambda_m",
    "t_s",
    "t_m",
    "lambda_star",
    "t_star",
    "b_star",
    "fannes_margin",
    "dynamical_landauer_margin",
    "stein_exponent",
    "hypothesis_bound",
    "hypothesis_margin",
    "quadrature_error_estimate",
];

/// One row per (parameters, report); undefined times are written as `nan`.
pub fn write_sweep_csv<W: Write>(param_names: &[String], rows: &[(Vec<f64>, QtslReport)], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    let header: Vec<&str> = param_names.iter().map(String::as_str).chain(SWEEP_COLUMNS).collect();
    w.write_record(&header).map_err(csv_err)?;
    for (params, r) in rows {
        if params.len() != param_names.len() {
            return Err(Error::Shape(format!("{} parameter values for {} names", params.len(), param_names.len())));
        }
        let q = &r.qtsl;
        let nums = [
            q.tau,
            q.p,
            q.dist_s,
            q.dist_m,
            q.lambda_s,
            q.lambda_m,
            q.t_s.unwrap_or(f64::NAN),
            q.t_m.unwrap_or(f64::NAN),
            q.lambda_star,
            q.t_star.unwrap_or(f64::NAN),
            q.b_star,
            r.fannes_margin,
            r.dynamical_landauer_margin,
            r.hypothesis.stein_exponent,
            r.hypothesis.upper_bound,
            r.hypothesis.margin,
            q.quadrature_error_estimate,
        ];
        let rec: Vec<String> = params.iter().chain(nums.iter()).map(|&x| format_float(x)).collect();
        w.write_record(&rec).map_err(csv_err)?;
    }
    w.flush()?;
    Ok(())
}
