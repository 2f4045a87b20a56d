//! Heat, work, entropy changes and the Landauer quantities at one time.
//!
//! Sign conventions: heat and work are positive when the bath or the work
//! source releases energy. The reference state is
//! σ_tot(τ) = ρ_b^eq ⊗ E_s(ρ_s) ⊗ E_m(ρ_m) ⊗ E_w(ρ_w).

use std::io::Write;

use serde::Serialize;

use crate::dynamics::{csv_err, Evolution};
use crate::hamiltonian::{check_energy_conservation, Scenario};
use crate::output::format_float;
use crate::states::{relative_entropy, von_neumann_entropy, DensityMatrix, RelativeEntropy};
use crate::tensor::{CompositeOperator, BATH, MEMORY, SYSTEM, WORK};
use crate::Result;

/// Absolute tolerance of the ledger identities.
pub const LEDGER_TOL: f64 = 1e-8;
/// ‖[H_tot, H₀]‖_∞ above this marks the first law as not applicable.
pub const ENERGY_CONSERVATION_TOL: f64 = 1e-9;

fn energy(rho: &DensityMatrix, h: &CompositeOperator) -> f64 {
    (rho.matrix() * h.matrix()).trace().re
}

/// tr{(ρ_x(0) − ρ_x(τ)) H_x}: energy released by subsystem `label`.
fn released(evo: &Evolution, tau: f64, label: &str) -> Result<f64> {
    let h = evo.built().local(label)?;
    Ok(energy(&evo.reduced_state(0.0, label)?, h) - energy(&evo.reduced_state(tau, label)?, h))
}

fn entropy_change(evo: &Evolution, tau: f64, label: &str) -> Result<f64> {
    Ok(von_neumann_entropy(&evo.reduced_state(tau, label)?).nats - von_neumann_entropy(&evo.reduced_state(0.0, label)?).nats)
}

/// Q = tr{(ρ_b^eq − E_b(ρ_b^eq)) H_b}.
pub fn heat(evo: &Evolution, tau: f64) -> Result<f64> {
    released(evo, tau, BATH)
}

/// W = tr{(ρ_w − E_w(ρ_w)) H_w}.
pub fn work(evo: &Evolution, tau: f64) -> Result<f64> {
    released(evo, tau, WORK)
}

/// ΔE = tr{(E_s(ρ_s) − ρ_s) H_s}.
pub fn internal_energy_change(evo: &Evolution, tau: f64) -> Result<f64> {
    Ok(-released(evo, tau, SYSTEM)?)
}

/// tr{(ρ_m − E_m(ρ_m)) H_m}; vanishes for an ideal memory.
pub fn memory_energy_change(evo: &Evolution, tau: f64) -> Result<f64> {
    released(evo, tau, MEMORY)
}

/// |ΔE − Q − W|.
pub fn first_law_residual(evo: &Evolution, tau: f64) -> Result<f64> {
    Ok((internal_energy_change(evo, tau)? - heat(evo, tau)? - work(evo, tau)?).abs())
}

/// Entropy changes of system, memory and work source.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EntropyChanges {
    pub system: f64,
    pub memory: f64,
    pub work: f64,
}

pub fn entropy_changes(evo: &Evolution, tau: f64) -> Result<EntropyChanges> {
    Ok(EntropyChanges {
        system: entropy_change(evo, tau, SYSTEM)?,
        memory: entropy_change(evo, tau, MEMORY)?,
        work: entropy_change(evo, tau, WORK)?,
    })
}

/// S(ρ_tot(t) ‖ σ_tot(t)).
pub fn reference_relative_entropy(evo: &Evolution, t: f64) -> Result<RelativeEntropy> {
    relative_entropy(&evo.total_state(t), &evo.weak_coupling_reference(t)?)
}

/// S(ρ_b) + S(ρ_s) + S(ρ_m) − S(ρ_w̄) of the initial state.
pub fn initial_mutual_information(scenario: &Scenario) -> Result<f64> {
    let wbar = scenario.initial_wbar();
    let mut s = -von_neumann_entropy(wbar).nats;
    for l in [BATH, SYSTEM, MEMORY] {
        s += von_neumann_entropy(&wbar.reduce(&[l])?).nats;
    }
    Ok(s)
}

/// Every thermodynamic quantity of a scenario at time `tau`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ThermoLedger {
    pub tau: f64,
    pub heat: f64,
    pub work: f64,
    pub energy_change: f64,
    pub entropy_change_system: f64,
    pub entropy_change_memory: f64,
    pub entropy_change_work: f64,
    /// S(ρ_tot(τ)‖σ_tot(τ)) − S(ρ_tot(0)‖σ_tot(0)), when both are finite.
    pub delta_rel: Option<f64>,
    /// ΔS_s + ΔS_m − βQ, the form that stays defined when `delta_rel` is not.
    pub entropy_production: f64,
    pub effective_heat: f64,
    /// ΔS_s + ΔS_m − βQ_eff − S(ρ_tot(τ)‖σ_tot(τ)).
    pub landauer_gap: f64,
    /// ΔS_s + ΔS_m − βQ_eff.
    pub landauer_margin: f64,
    pub mutual_information: f64,
    pub relative_entropy_final: RelativeEntropyValue,
    pub relative_entropy_initial: RelativeEntropyValue,
    pub first_law_residual: f64,
    /// |ΔS_s + ΔS_m − βQ − δ_rel|; NaN when δ_rel is unavailable.
    pub second_law_residual: f64,
    pub memory_energy_residual: f64,
    /// ‖[H_tot, H₀]‖_∞.
    pub energy_conservation_residual: f64,
}

/// Serialisable copy of [`RelativeEntropy`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RelativeEntropyValue {
    pub nats: f64,
    pub kernel_mass: f64,
}

impl From<RelativeEntropy> for RelativeEntropyValue {
    fn from(r: RelativeEntropy) -> Self {
        Self {
            nats: r.nats,
            kernel_mass: r.kernel_mass,
        }
    }
}

impl ThermoLedger {
    /// Energy conservation holds, so the first law is expected to close.
    pub fn energy_conserved(&self) -> bool {
        self.energy_conservation_residual <= ENERGY_CONSERVATION_TOL
    }

    /// Which support condition failed, if δ_rel is unavailable.
    pub fn support_failure(&self) -> Option<String> {
        let mut parts = Vec::new();
        if !self.relative_entropy_initial.nats.is_finite() {
            parts.push(format!("initial state has weight {:.3e} on the reference kernel", self.relative_entropy_initial.kernel_mass));
        }
        if !self.relative_entropy_final.nats.is_finite() {
            parts.push(format!("final state has weight {:.3e} on the reference kernel", self.relative_entropy_final.kernel_mass));
        }
        (!parts.is_empty()).then(|| parts.join("; "))
    }
}

/// Assembles the ledger at `tau`.
pub fn ledger(evo: &Evolution, tau: f64) -> Result<ThermoLedger> {
    let scenario = evo.scenario();
    let beta = scenario.beta();
    let q = heat(evo, tau)?;
    let w = work(evo, tau)?;
    let de = internal_energy_change(evo, tau)?;
    let dm = memory_energy_change(evo, tau)?;
    let ds = entropy_changes(evo, tau)?;
    let mi0 = initial_mutual_information(scenario)?;
    let rel0 = reference_relative_entropy(evo, 0.0)?;
    let rel = reference_relative_entropy(evo, tau)?;
    let delta_rel = (rel.is_finite() && rel0.is_finite()).then_some(rel.nats - rel0.nats);
    let production = ds.system + ds.memory - beta * q;
    let q_eff = q - mi0 / beta;
    let margin = ds.system + ds.memory - beta * q_eff;
    Ok(ThermoLedger {
        tau,
        heat: q,
        work: w,
        energy_change: de,
        entropy_change_system: ds.system,
        entropy_change_memory: ds.memory,
        entropy_change_work: ds.work,
        delta_rel,
        entropy_production: production,
        effective_heat: q_eff,
        landauer_gap: margin - rel.nats,
        landauer_margin: margin,
        mutual_information: mi0,
        relative_entropy_final: rel.into(),
        relative_entropy_initial: rel0.into(),
        first_law_residual: (de - q - w).abs(),
        second_law_residual: delta_rel.map_or(f64::NAN, |d| (production - d).abs()),
        memory_energy_residual: dm.abs(),
        energy_conservation_residual: check_energy_conservation(evo.built()),
    })
}

/// Column order of [`write_ledger_csv`].
pub const LEDGER_COLUMNS: [&str; 17] = [
    "tau",
    "Q",
    "W",
    "dE",
    "dS_s",
    "dS_m",
    "dS_w",
    "delta_rel",
    "Q_eff",
    "gap",
    "margin",
    "mi0",
    "first_law_residual",
    "second_law_residual",
    "memory_energy_residual",
    "energy_conservation_residual",
    "energy_conserved",
];

/// One row per ledger; unavailable values are written as `nan`.
pub fn write_ledger_csv<W: Write>(rows: &[ThermoLedger], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(LEDGER_COLUMNS).map_err(csv_err)?;
    for r in rows {
        let nums = [
            r.tau,
            r.heat,
            r.work,
            r.energy_change,
            r.entropy_change_system,
            r.entropy_change_memory,
            r.entropy_change_work,
            r.delta_rel.unwrap_or(f64::NAN),
            r.effective_heat,
            r.landauer_gap,
            r.landauer_margin,
            r.mutual_information,
            r.first_law_residual,
            r.second_law_residual,
            r.memory_energy_residual,
            r.energy_conservation_residual,
        ];
        let mut rec: Vec<String> = nums.iter().map(|&x| format_float(x)).collect();
        rec.push(r.energy_conserved().to_string());
        w.write_record(&rec).map_err(csv_err)?;
    }
    w.flush()?;
    Ok(())
}
