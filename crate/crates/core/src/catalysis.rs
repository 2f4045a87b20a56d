//! Numerical checks that the work source acts as an entropy-preserving
//! catalyst.
//!
//! Structural checks look only at H_tot and ρ_w. Dynamical checks look at
//! the evolution at a given time. The two groups are reported separately:
//! a fixed scenario can pass the dynamical checks while failing the
//! structural ones.

use std::fmt::Write as _;
use std::io::Write;

use serde::Serialize;

use crate::dynamics::{csv_err, Evolution};
use crate::hamiltonian::{Scenario, WBAR};
use crate::output::format_float;
use crate::states::{maximally_mixed, von_neumann_entropy, DensityMatrix};
use crate::tensor::{
    commutator, embed, evolution_operator, operator_schmidt, partial_transpose, schatten_norm, CompositeOperator,
    SubsystemLayout, WORK,
};
use crate::{CMatrix, Error, Result, C64};

/// Default pass threshold on every residual.
pub const CATALYSIS_THRESHOLD: f64 = 1e-9;
/// Default highest power in the multiplicativity check.
pub const DEFAULT_N_MAX: usize = 4;
/// Inputs to [`check_pt_unitarity`] must be unitary to this tolerance.
pub const UNITARY_TOL: f64 = 1e-9;

/// ‖(U^{T_A})† U^{T_A} − 1‖_∞, where T_A transposes the listed factors.
pub fn check_pt_unitarity<S: AsRef<str>>(u: &CompositeOperator, transposed: &[S]) -> Result<f64> {
    let r = u.unitarity_residual();
    if r > UNITARY_TOL {
        return Err(Error::Contract {
            what: "operator is not unitary",
            residual: r,
            tolerance: UNITARY_TOL,
        });
    }
    Ok(partial_transpose(u, transposed)?.unitarity_residual())
}

/// ‖[H_tot, 1 ⊗ ρ_w]‖_∞.
pub fn check_state_compatibility(h_total: &CompositeOperator, rho_w: &DensityMatrix) -> Result<f64> {
    let lifted = embed(rho_w.op(), h_total.layout())?;
    Ok(commutator(h_total, &lifted)?.op_norm())
}

/// Residuals of the operator-Schmidt structure across the cut between the
/// work factors and the rest.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SchmidtResiduals {
    /// max_{i<j} ‖[A_i, A_j]‖_∞.
    pub schmidt_commutator: f64,
    /// max_j ‖[B_j, ρ_w]‖_∞.
    pub work_factor: f64,
    pub terms: usize,
}

/// Decomposes H_tot = Σ A_j ⊗ B_j with each B_j scaled to ‖B_j‖₂² = d_w
/// (Pauli normalisation) and checks the commutation conditions.
pub fn check_schmidt_structure(h_total: &CompositeOperator, rho_w: &DensityMatrix) -> Result<SchmidtResiduals> {
    let layout = h_total.layout();
    let right: Vec<String> = rho_w.layout().labels().map(str::to_string).collect();
    let left = layout.complement(&right);
    let terms = operator_schmidt(h_total, &left, &right)?;
    let dw = rho_w.dim() as f64;
    let a: Vec<CompositeOperator> = terms.iter().map(|t| t.left.scale(t.weight / dw.sqrt())).collect();
    let b: Vec<CompositeOperator> = terms.iter().map(|t| t.right.scale(dw.sqrt())).collect();
    let mut schmidt_commutator: f64 = 0.0;
    for i in 0..a.len() {
        for j in i + 1..a.len() {
            schmidt_commutator = schmidt_commutator.max(commutator(&a[i], &a[j])?.op_norm());
        }
    }
    let mut work_factor: f64 = 0.0;
    for bj in &b {
        let rw = rho_w.op().relabel(bj.layout().clone())?;
        work_factor = work_factor.max(commutator(bj, &rw)?.op_norm());
    }
    Ok(SchmidtResiduals {
        schmidt_commutator,
        work_factor,
        terms: terms.len(),
    })
}

/// ‖(Hⁿ)^{T_A} − (H^{T_A})ⁿ‖_∞ for n = 2..=n_max.
pub fn check_power_multiplicativity<S: AsRef<str>>(
    h_total: &CompositeOperator,
    transposed: &[S],
    n_max: usize,
) -> Result<Vec<f64>> {
    if n_max < 2 {
        return Err(Error::Parameter(format!("n_max must be at least 2, got {n_max}")));
    }
    let pt = partial_transpose(h_total, transposed)?;
    let mut h_pow = h_total.matrix().clone();
    let mut pt_pow = pt.matrix().clone();
    let mut out = Vec::with_capacity(n_max - 1);
    for _ in 2..=n_max {
        h_pow = &h_pow * h_total.matrix();
        pt_pow = &pt_pow * pt.matrix();
        let lhs = partial_transpose(&h_total.with_matrix(h_pow.clone()), transposed)?;
        out.push(crate::tensor::op_norm(&(lhs.matrix() - &pt_pow)));
    }
    Ok(out)
}

/// ‖E_w̄(1/D_w̄) − 1/D_w̄‖₁ with E_w̄(X) = tr_w U(τ)(X ⊗ ρ_w)U(τ)†.
pub fn check_unitality(scenario: &Scenario, tau: f64) -> Result<f64> {
    let wbar_layout = scenario.initial_wbar().layout().clone();
    let flat = maximally_mixed(wbar_layout);
    let initial = flat.tensor(scenario.initial_work())?;
    let evo = Evolution::with_initial(scenario, initial)?;
    let out = evo.marginal(tau, &WBAR)?;
    schatten_norm(&out.op().checked_sub(flat.op())?, 1.0)
}

/// |S(E_w(ρ_w)) − S(ρ_w)|.
pub fn check_work_entropy(scenario: &Scenario, tau: f64) -> Result<f64> {
    work_entropy_drift(&Evolution::new(scenario)?, tau)
}

fn work_entropy_drift(evo: &Evolution, tau: f64) -> Result<f64> {
    let before = von_neumann_entropy(evo.scenario().initial_work()).nats;
    let after = von_neumann_entropy(&evo.reduced_state(tau, WORK)?).nats;
    Ok((after - before).abs())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum CheckKind {
    Structural,
    Dynamical,
}

/// One line of a catalysis report.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CheckRecord {
    pub name: String,
    pub residual: f64,
    pub threshold: f64,
    pub pass: bool,
    #[serde(skip)]
    pub kind: CheckKind,
}

impl CheckRecord {
    fn new(name: impl Into<String>, residual: f64, threshold: f64, kind: CheckKind) -> Self {
        Self {
            name: name.into(),
            residual,
            threshold,
            pass: residual <= threshold,
            kind,
        }
    }
}

/// All catalysis residuals of a scenario at one time.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CatalysisReport {
    pub tau: f64,
    pub n_max: usize,
    pub pt_unitarity_residual: f64,
    pub state_compatibility_residual: f64,
    pub schmidt_commutator_residual: f64,
    pub work_factor_residual: f64,
    /// Entry k is the residual for power n = k + 2.
    pub power_residuals: Vec<f64>,
    pub unitality_residual: f64,
    pub work_entropy_drift: f64,
    pub threshold: f64,
}

impl CatalysisReport {
    pub fn records(&self) -> Vec<CheckRecord> {
        use CheckKind::*;
        let th = self.threshold;
        let mut v = vec![
            CheckRecord::new("state_compatibility", self.state_compatibility_residual, th, Structural),
            CheckRecord::new("schmidt_commutator", self.schmidt_commutator_residual, th, Structural),
            CheckRecord::new("work_factor", self.work_factor_residual, th, Structural),
        ];
        for (k, &r) in self.power_residuals.iter().enumerate() {
            v.push(CheckRecord::new(format!("power_multiplicativity_n{}", k + 2), r, th, Structural));
        }
        v.push(CheckRecord::new("pt_unitarity", self.pt_unitarity_residual, th, Dynamical));
        v.push(CheckRecord::new("unitality", self.unitality_residual, th, Dynamical));
        v.push(CheckRecord::new("work_entropy", self.work_entropy_drift, th, Dynamical));
        v
    }

    pub fn structural_pass(&self) -> bool {
        self.records().iter().filter(|r| r.kind == CheckKind::Structural).all(|r| r.pass)
    }

    pub fn dynamical_pass(&self) -> bool {
        self.records().iter().filter(|r| r.kind == CheckKind::Dynamical).all(|r| r.pass)
    }

    pub fn failures(&self) -> Vec<String> {
        self.records().into_iter().filter(|r| !r.pass).map(|r| r.name).collect()
    }

    pub fn to_json(&self) -> String {
        #[derive(Serialize)]
        struct Doc<'a> {
            tau: f64,
            n_max: usize,
            structural_pass: bool,
            dynamical_pass: bool,
            structural: Vec<&'a CheckRecord>,
            dynamical: Vec<&'a CheckRecord>,
        }
        let records = self.records();
        let doc = Doc {
            tau: self.tau,
            n_max: self.n_max,
            structural_pass: self.structural_pass(),
            dynamical_pass: self.dynamical_pass(),
            structural: records.iter().filter(|r| r.kind == CheckKind::Structural).collect(),
            dynamical: records.iter().filter(|r| r.kind == CheckKind::Dynamical).collect(),
        };
        serde_json::to_string_pretty(&doc).expect("report serialises")
    }

    pub fn to_text(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "catalysis report at tau = {}", format_float(self.tau));
        for (kind, title) in [(CheckKind::Structural, "structural"), (CheckKind::Dynamical, "dynamical")] {
            let _ = writeln!(s, "[{title}]");
            for r in self.records().iter().filter(|r| r.kind == kind) {
                let _ = writeln!(
                    s,
                    "  {:<28} {}  residual {}  threshold {}",
                    r.name,
                    if r.pass { "PASS" } else { "FAIL" },
                    format_float(r.residual),
                    format_float(r.threshold)
                );
            }
        }
        s
    }

    /// CSV with columns kind,name,residual,threshold,pass.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["kind", "name", "residual", "threshold", "pass"]).map_err(csv_err)?;
        for r in self.records() {
            let kind = match r.kind {
                CheckKind::Structural => "structural",
                CheckKind::Dynamical => "dynamical",
            };
            w.write_record([
                kind.to_string(),
                r.name.clone(),
                format_float(r.residual),
                format_float(r.threshold),
                r.pass.to_string(),
            ])
            .map_err(csv_err)?;
        }
        w.flush()?;
        Ok(())
    }
}

/// Runs every check at time `tau` with the default threshold.
pub fn verify(scenario: &Scenario, tau: f64, n_max: usize) -> Result<CatalysisReport> {
    verify_with_threshold(scenario, tau, n_max, CATALYSIS_THRESHOLD)
}

pub fn verify_with_threshold(scenario: &Scenario, tau: f64, n_max: usize, threshold: f64) -> Result<CatalysisReport> {
    if !tau.is_finite() {
        return Err(Error::Parameter(format!("tau must be finite, got {tau}")));
    }
    let evo = Evolution::new(scenario)?;
    let h = &evo.built().h_total;
    let rho_w = scenario.initial_work();
    let u = evolution_operator(h, tau)?;
    let schmidt = check_schmidt_structure(h, rho_w)?;
    Ok(CatalysisReport {
        tau,
        n_max,
        pt_unitarity_residual: check_pt_unitarity(&u, &WBAR)?,
        state_compatibility_residual: check_state_compatibility(h, rho_w)?,
        schmidt_commutator_residual: schmidt.schmidt_commutator,
        work_factor_residual: schmidt.work_factor,
        power_residuals: check_power_multiplicativity(h, &WBAR, n_max)?,
        unitality_residual: check_unitality(scenario, tau)?,
        work_entropy_drift: work_entropy_drift(&evo, tau)?,
        threshold,
    })
}

/// The two-qubit swap, useful as a non-catalytic reference unitary.
pub fn swap_operator(left: &str, right: &str) -> Result<CompositeOperator> {
    let layout = SubsystemLayout::qubits(&[left, right])?;
    let mut m = CMatrix::zeros(4, 4);
    for (i, j) in [(0, 0), (1, 2), (2, 1), (3, 3)] {
        m[(i, j)] = C64::new(1.0, 0.0);
    }
    CompositeOperator::new(m, layout)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hamiltonian::{builtin_scenario, builtin_spec, Builtin, BuiltinOptions};
    use crate::tensor::{pauli_matrix, tensor_product, Pauli};
    use std::f64::consts::{FRAC_PI_3, FRAC_PI_4};

    fn q(label: &str, p: Pauli) -> CompositeOperator {
        CompositeOperator::new(pauli_matrix(p), SubsystemLayout::qubits(&[label]).unwrap()).unwrap()
    }

    fn toy() -> CompositeOperator {
        &tensor_product(&q("system", Pauli::X), &q("work", Pauli::I)).unwrap()
            + &tensor_product(&q("system", Pauli::Z), &q("work", Pauli::Z)).unwrap()
    }

    #[test]
    fn swap_partial_transpose_is_not_unitary() {
        let s = swap_operator("a", "b").unwrap();
        assert!((check_pt_unitarity(&s, &["a"]).unwrap() - 3.0).abs() < 1e-12);
        let prod = tensor_product(&q("a", Pauli::X), &q("b", Pauli::Y)).unwrap();
        assert!(check_pt_unitarity(&prod, &["a"]).unwrap() < 1e-14);
        let bad = q("a", Pauli::Z).scale(2.0);
        assert!(matches!(check_pt_unitarity(&bad, &["a"]), Err(Error::Contract { .. })));
    }

    #[test]
    fn compatibility_with_x_coupling() {
        let s = builtin_scenario(Builtin::Cmaybe { theta: 0.2 }, BuiltinOptions::default()).unwrap();
        let mut spec = s.spec().clone();
        spec.hamiltonian.interaction.terms.push("0.5 * Xw".into());
        let s2 = Scenario::from_spec(spec).unwrap();
        let h = crate::hamiltonian::build(&s2).unwrap().h_total;
        let r = check_state_compatibility(&h, s2.initial_work()).unwrap();
        assert!((r - 0.5).abs() < 1e-12, "{r}");
        let flat = maximally_mixed(SubsystemLayout::qubits(&[WORK]).unwrap());
        assert!(check_state_compatibility(&h, &flat).unwrap() < 1e-14);
    }

    #[test]
    fn toy_schmidt_and_power_residuals() {
        let h = toy();
        let rho = maximally_mixed(SubsystemLayout::qubits(&[WORK]).unwrap());
        let r = check_schmidt_structure(&h, &rho).unwrap();
        assert_eq!(r.terms, 2);
        assert!((r.schmidt_commutator - 2.0).abs() < 1e-12, "{r:?}");
        assert!(r.work_factor < 1e-14);
        let p = check_power_multiplicativity(&h, &["system"], 4).unwrap();
        // brute force n = 2
        let pt = partial_transpose(&h, &["system"]).unwrap();
        let h2 = partial_transpose(&h.powi(2), &["system"]).unwrap();
        let brute = (&h2 - &pt.powi(2)).op_norm();
        assert!((p[0] - brute).abs() < 1e-12);
        // the work-side factors 1 and Z commute, so every power is block
        // diagonal in the work basis and transposes factor by factor
        assert!(p.iter().all(|&r| r < 1e-12));
        assert!(check_power_multiplicativity(&h, &["system"], 1).is_err());

        let heis = [Pauli::X, Pauli::Y, Pauli::Z]
            .iter()
            .map(|&p| tensor_product(&q("system", p), &q("work", p)).unwrap())
            .fold(toy(), |acc, t| &acc + &t);
        let p = check_power_multiplicativity(&heis, &["system"], 3).unwrap();
        let pt = partial_transpose(&heis, &["system"]).unwrap();
        let brute = (&partial_transpose(&heis.powi(2), &["system"]).unwrap() - &pt.powi(2)).op_norm();
        assert!((p[0] - brute).abs() < 1e-12);
        assert!(p[0] > 1.0, "{p:?}");
    }

    #[test]
    fn single_product_has_zero_schmidt_residual() {
        let h = tensor_product(&q("system", Pauli::X), &q("work", Pauli::Z)).unwrap();
        let rho = maximally_mixed(SubsystemLayout::qubits(&[WORK]).unwrap());
        assert_eq!(check_schmidt_structure(&h, &rho).unwrap().schmidt_commutator, 0.0);
    }

    #[test]
    fn builtins_pass_everything() {
        for b in [
            Builtin::Cmaybe { theta: FRAC_PI_3 },
            Builtin::WernerZx { lambda: 0.0, phi: 0.4 },
            Builtin::WernerXx { lambda: 0.6, phi: 2.0 },
        ] {
            for sb in [false, true] {
                let s = builtin_scenario(b, BuiltinOptions { system_bath_coupling: sb }).unwrap();
                let r = verify(&s, 1.3, DEFAULT_N_MAX).unwrap();
                assert!(r.structural_pass() && r.dynamical_pass(), "{}", r.to_text());
                assert!(r.records().iter().all(|c| c.residual <= 1e-10));
            }
        }
    }

    #[test]
    fn zero_time_is_trivially_catalytic() {
        let mut spec = builtin_spec(Builtin::Cmaybe { theta: 1.0 }, BuiltinOptions::default());
        spec.hamiltonian.interaction.terms = vec!["1.0 * Xs Xw".into(), "1.0 * Ys Yw".into()];
        let s = Scenario::from_spec(spec).unwrap();
        assert!(check_unitality(&s, 0.0).unwrap() < 1e-14);
        assert!(check_work_entropy(&s, 0.0).unwrap() < 1e-14);
    }

    #[test]
    fn report_formats() {
        let s = builtin_scenario(Builtin::Cmaybe { theta: 0.5 }, BuiltinOptions::default()).unwrap();
        let r = verify(&s, FRAC_PI_4, 3).unwrap();
        let json: serde_json::Value = serde_json::from_str(&r.to_json()).unwrap();
        let first = &json["structural"][0];
        assert_eq!(first["name"], "state_compatibility");
        for k in ["name", "residual", "threshold", "pass"] {
            assert!(first.get(k).is_some());
        }
        assert_eq!(json["dynamical"].as_array().unwrap().len(), 3);
        assert!(r.to_text().contains("power_multiplicativity_n3"));
        let mut buf = Vec::new();
        r.write_csv(&mut buf).unwrap();
        assert_eq!(String::from_utf8(buf).unwrap().lines().count(), 1 + r.records().len());
    }
}
