//! Scenario descriptions, Hamiltonian assembly and the four-qubit example
//! family.

mod file;
mod scenario;
mod terms;

use std::collections::BTreeMap;

pub use file::{
    DenseEntry, HamiltonianSection, InitialSection, LayoutSection, ScenarioSpec, StateBlock, SubsystemEntry,
    TermSection,
};
pub use scenario::{Scenario, MARGINAL_TOL, WBAR};
pub use terms::{DenseTerm, PauliTerm, Term};

use crate::states::WernerBasis;
use crate::tensor::{commutator, CompositeOperator, BATH, CANONICAL_ORDER, MEMORY, SYSTEM, WORK};
use crate::{Error, Result};

/// Tolerance of [`check_ideal_memory`].
pub const IDEAL_MEMORY_TOL: f64 = 1e-12;

/// Dense Hamiltonians of a scenario on its canonical layout.
#[derive(Debug, Clone)]
pub struct BuiltHamiltonians {
    /// H₀, the sum of the bare terms.
    pub h_bare: CompositeOperator,
    /// H₀ plus all interaction terms.
    pub h_total: CompositeOperator,
    /// Term groups keyed `bare:<label>` or `interaction:<label>+<label>...`.
    pub parts: BTreeMap<String, CompositeOperator>,
    /// Bare Hamiltonian of each subsystem on its own factor.
    pub local: BTreeMap<String, CompositeOperator>,
}

fn group_key(kind: &str, support: &[String]) -> String {
    let mut s: Vec<&String> = support.iter().collect();
    s.sort_by_key(|l| CANONICAL_ORDER.iter().position(|c| c == l));
    let names: Vec<&str> = s.iter().map(|l| l.as_str()).collect();
    format!("{kind}:{}", names.join("+"))
}

pub fn build(scenario: &Scenario) -> Result<BuiltHamiltonians> {
    let layout = scenario.layout();
    let mut parts: BTreeMap<String, CompositeOperator> = BTreeMap::new();
    let mut h_bare = CompositeOperator::zeros(layout.clone());
    let mut h_int = CompositeOperator::zeros(layout.clone());
    for (kind, terms, acc) in [
        ("bare", scenario.bare_terms(), &mut h_bare),
        ("interaction", scenario.interaction_terms(), &mut h_int),
    ] {
        for t in terms {
            let op = t.operator(layout)?;
            *acc = acc.checked_add(&op)?;
            let part = parts
                .entry(group_key(kind, &t.support()))
                .or_insert_with(|| CompositeOperator::zeros(layout.clone()));
            *part = part.checked_add(&op)?;
        }
    }
    let h_total = h_bare.checked_add(&h_int)?;
    let mut local = BTreeMap::new();
    for label in CANONICAL_ORDER {
        local.insert(label.to_string(), scenario.local_hamiltonian(label)?);
    }
    Ok(BuiltHamiltonians {
        h_bare,
        h_total,
        parts,
        local,
    })
}

impl BuiltHamiltonians {
    pub fn local(&self, label: &str) -> Result<&CompositeOperator> {
        self.local
            .get(label)
            .ok_or_else(|| Error::Layout(format!("unknown label '{label}'")))
    }
}

/// ‖[H_tot, H₀]‖_∞; zero when the dynamics conserves the bare energy.
pub fn check_energy_conservation(built: &BuiltHamiltonians) -> f64 {
    commutator(&built.h_total, &built.h_bare)
        .expect("same layout")
        .op_norm()
}

/// Whether the memory Hamiltonian is a multiple of the identity.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MemoryCheck {
    pub ideal: bool,
    /// ‖H_m − c·1‖_∞ with c = tr H_m / d_m.
    pub deviation: f64,
}

pub fn check_ideal_memory(built: &BuiltHamiltonians) -> MemoryCheck {
    let hm = &built.local[MEMORY];
    let d = hm.dim() as f64;
    let c = hm.trace().re / d;
    let shifted = hm.checked_sub(&CompositeOperator::identity(hm.layout().clone()).scale(c)).expect("same layout");
    let deviation = shifted.op_norm();
    MemoryCheck {
        ideal: deviation <= IDEAL_MEMORY_TOL,
        deviation,
    }
}

/// The four-qubit example family.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Builtin {
    Cmaybe { theta: f64 },
    WernerZx { lambda: f64, phi: f64 },
    WernerXx { lambda: f64, phi: f64 },
}

/// Family names accepted by [`Builtin::from_name`].
pub const BUILTIN_FAMILIES: [&str; 3] = ["cmaybe", "werner_zx", "werner_xx"];

impl Builtin {
    /// Builds a family member from its name and named parameters
    /// (`theta`, or `lambda` and `phi`).
    pub fn from_name(name: &str, params: &BTreeMap<String, f64>) -> Result<Self> {
        let get = |k: &str| {
            params
                .get(k)
                .copied()
                .ok_or_else(|| Error::Parameter(format!("family '{name}' needs parameter '{k}'")))
        };
        let allowed: &[&str] = match name {
            "cmaybe" => &["theta"],
            "werner_zx" | "werner_xx" => &["lambda", "phi"],
            _ => {
                return Err(Error::Parameter(format!(
                    "unknown family '{name}', expected one of {BUILTIN_FAMILIES:?}"
                )))
            }
        };
        if let Some(extra) = params.keys().find(|k| !allowed.contains(&k.as_str())) {
            return Err(Error::Parameter(format!("family '{name}' has no parameter '{extra}'")));
        }
        Ok(match name {
            "cmaybe" => Builtin::Cmaybe { theta: get("theta")? },
            "werner_zx" => Builtin::WernerZx {
                lambda: get("lambda")?,
                phi: get("phi")?,
            },
            _ => Builtin::WernerXx {
                lambda: get("lambda")?,
                phi: get("phi")?,
            },
        })
    }

    pub fn family(&self) -> &'static str {
        match self {
            Builtin::Cmaybe { .. } => "cmaybe",
            Builtin::WernerZx { .. } => "werner_zx",
            Builtin::WernerXx { .. } => "werner_xx",
        }
    }
}

/// Coupling choices for the example family.
///
/// The default omits the bath–system term `Zb Zs`; set
/// `system_bath_coupling` to include it.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct BuiltinOptions {
    pub system_bath_coupling: bool,
}

pub fn builtin_spec(which: Builtin, options: BuiltinOptions) -> ScenarioSpec {
    let sub = |label: &str| SubsystemEntry {
        label: label.to_string(),
        dim: 2,
    };
    let mut interaction = vec!["1.0 * Zs Zw".to_string(), "1.0 * Zs Zm".to_string()];
    if options.system_bath_coupling {
        interaction.push("1.0 * Zb Zs".to_string());
    }
    interaction.push("1.0 * Zb Zm".to_string());
    let sm = vec![SYSTEM.to_string(), MEMORY.to_string()];
    let sm_block = match which {
        Builtin::Cmaybe { theta } => StateBlock::Cmaybe { labels: sm, theta },
        Builtin::WernerZx { lambda, phi } => StateBlock::Werner {
            labels: sm,
            lambda,
            phi,
            basis: WernerBasis::Zx,
        },
        Builtin::WernerXx { lambda, phi } => StateBlock::Werner {
            labels: sm,
            lambda,
            phi,
            basis: WernerBasis::Xx,
        },
    };
    ScenarioSpec {
        beta: 1.0,
        description: None,
        layout: LayoutSection {
            subsystems: CANONICAL_ORDER.iter().map(|l| sub(l)).collect(),
        },
        hamiltonian: HamiltonianSection {
            bare: TermSection {
                terms: ["1.0 * Zs", "1.0 * Zb", "1.0 * Im", "1.0 * Zw"].map(String::from).to_vec(),
                dense: Vec::new(),
            },
            interaction: TermSection {
                terms: interaction,
                dense: Vec::new(),
            },
        },
        initial: InitialSection {
            blocks: vec![
                StateBlock::Gibbs {
                    labels: vec![BATH.to_string()],
                },
                sm_block,
                StateBlock::Basis {
                    labels: vec![WORK.to_string()],
                    index: 1,
                },
            ],
        },
    }
}

/// Four qubits at β = 1, work source in |1⟩, thermal bath e^{−Z}/tr e^{−Z}
/// and the named system–memory state.
pub fn builtin_scenario(which: Builtin, options: BuiltinOptions) -> Result<Scenario> {
    Scenario::from_spec(builtin_spec(which, options))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::states::DensityMatrix;
    use std::f64::consts::PI;

    fn cmaybe(theta: f64) -> Scenario {
        builtin_scenario(Builtin::Cmaybe { theta }, BuiltinOptions::default()).unwrap()
    }

    #[test]
    fn example_hamiltonians() {
        for sb in [false, true] {
            let s = builtin_scenario(Builtin::Cmaybe { theta: 0.4 }, BuiltinOptions { system_bath_coupling: sb }).unwrap();
            let b = build(&s).unwrap();
            assert_eq!(b.h_bare.trace().re, 16.0);
            assert_eq!(b.h_total.max_abs_off_diagonal(), 0.0);
            assert_eq!(check_energy_conservation(&b), 0.0);
            let mem = check_ideal_memory(&b);
            assert!(mem.ideal && mem.deviation == 0.0);
            assert_eq!(b.parts.contains_key("interaction:bath+system"), sb);
            let sum = b.parts.values().fold(CompositeOperator::zeros(s.layout().clone()), |a, p| &a + p);
            assert_eq!(sum, b.h_total);
            let hm = &b.parts["bare:memory"];
            assert_eq!(hm, &CompositeOperator::identity(s.layout().clone()));
        }
    }

    #[test]
    fn empty_terms_build_zero() {
        let mut spec = builtin_spec(Builtin::Cmaybe { theta: 0.0 }, BuiltinOptions::default());
        spec.hamiltonian = HamiltonianSection::default();
        let s = Scenario::from_spec(spec).unwrap();
        let b = build(&s).unwrap();
        assert_eq!(b.h_total.max_abs_entry(), 0.0);
        assert_eq!(b.h_bare.max_abs_entry(), 0.0);
    }

    #[test]
    fn builtin_marginals() {
        let s = cmaybe(0.0);
        let rs = s.initial_wbar().reduce(&[SYSTEM]).unwrap();
        assert!((rs.matrix()[(0, 0)].re - 1.0).abs() < 1e-15);
        let w = builtin_scenario(Builtin::WernerZx { lambda: 0.0, phi: 1.1 }, BuiltinOptions::default()).unwrap();
        let sm = w.initial_wbar().reduce(&[SYSTEM, MEMORY]).unwrap();
        assert!(sm.matrix().iter().enumerate().all(|(k, z)| {
            let expect = if k % 5 == 0 { 0.25 } else { 0.0 };
            (z.re - expect).abs() < 1e-15 && z.im == 0.0
        }));
        assert_eq!(s.initial_work().matrix()[(1, 1)].re, 1.0);
    }

    #[test]
    fn energy_violation_is_twice_the_coefficient() {
        let mut spec = builtin_spec(Builtin::Cmaybe { theta: 0.3 }, BuiltinOptions::default());
        spec.hamiltonian.interaction.terms.push("0.7 * Xs".into());
        let b = build(&Scenario::from_spec(spec).unwrap()).unwrap();
        // only H_s = Zs fails to commute with the added term
        let r = check_energy_conservation(&b);
        assert!((r - 2.0 * 0.7).abs() < 1e-12, "{r}");
    }

    #[test]
    fn memory_checks() {
        for (term, ideal, dev) in [("3.0 * Im", true, 0.0), ("1.0 * Zm", false, 1.0)] {
            let mut spec = builtin_spec(Builtin::Cmaybe { theta: 0.3 }, BuiltinOptions::default());
            spec.hamiltonian.bare.terms[2] = term.into();
            let m = check_ideal_memory(&build(&Scenario::from_spec(spec).unwrap()).unwrap());
            assert_eq!(m.ideal, ideal);
            assert!((m.deviation - dev).abs() < 1e-12);
        }
    }

    #[test]
    fn linear_in_coefficients() {
        let s = cmaybe(0.2);
        let base = build(&s).unwrap();
        let mut spec = s.spec().clone();
        for sec in [&mut spec.hamiltonian.bare, &mut spec.hamiltonian.interaction] {
            sec.terms = sec.terms.iter().map(|t| t.replacen("1.0", "2.5", 1)).collect();
        }
        spec.initial.blocks[0] = StateBlock::Matrix {
            labels: vec![BATH.into()],
            rows: file::rows_of(
                crate::states::gibbs_state(&base.local[BATH].scale(2.5), 1.0).unwrap().matrix(),
            ),
        };
        let scaled = build(&Scenario::from_spec(spec).unwrap()).unwrap();
        let diff = (&scaled.h_total - &base.h_total.scale(2.5)).max_abs_entry();
        assert_eq!(diff, 0.0);
    }

    #[test]
    fn validation_errors() {
        let good = builtin_spec(Builtin::Cmaybe { theta: 0.3 }, BuiltinOptions::default());

        let mut s = good.clone();
        s.initial.blocks[0] = StateBlock::MaximallyMixed { labels: vec![BATH.into()] };
        assert!(matches!(Scenario::from_spec(s), Err(Error::Scenario(_))));

        let mut s = good.clone();
        s.layout.subsystems.pop();
        assert!(Scenario::from_spec(s).is_err());

        let mut s = good.clone();
        s.hamiltonian.bare.terms.push("1.0 * Zs Zm".into());
        assert!(Scenario::from_spec(s).is_err());

        let mut s = good.clone();
        s.hamiltonian.interaction.terms.push("1.0 * Zq".into());
        assert!(Scenario::from_spec(s).is_err());

        let mut s = good.clone();
        s.initial.blocks.pop();
        assert!(Scenario::from_spec(s).is_err());

        let mut s = good.clone();
        s.beta = -1.0;
        assert!(Scenario::from_spec(s).is_err());

        let mut s = good;
        s.initial.blocks = vec![
            StateBlock::Gibbs { labels: vec![BATH.into()] },
            StateBlock::MaximallyMixed { labels: vec![SYSTEM.into(), WORK.into()] },
            StateBlock::MaximallyMixed { labels: vec![MEMORY.into()] },
        ];
        assert!(Scenario::from_spec(s).is_err());

        assert!(Builtin::from_name("nope", &BTreeMap::new()).is_err());
        let mut p = BTreeMap::new();
        p.insert("theta".to_string(), 1.0);
        assert_eq!(Builtin::from_name("cmaybe", &p).unwrap(), Builtin::Cmaybe { theta: 1.0 });
        assert!(Builtin::from_name("werner_zx", &p).is_err());
    }

    #[test]
    fn toml_round_trip_is_exact() {
        let mut spec = builtin_spec(Builtin::WernerXx { lambda: 0.3, phi: PI / 7.0 }, BuiltinOptions { system_bath_coupling: true });
        spec.description = Some("round trip".into());
        spec.hamiltonian.interaction.dense.push(DenseEntry {
            labels: vec![SYSTEM.into(), WORK.into()],
            matrix: file::rows_of(&(crate::CMatrix::identity(4, 4) * crate::C64::new(0.1, 0.0))),
        });
        let s = Scenario::from_spec(spec).unwrap();
        let text = s.to_toml().unwrap();
        let back = Scenario::from_toml_str(&text).unwrap();
        assert_eq!(back, s);
        assert_eq!(back.initial_wbar(), s.initial_wbar());
        assert_eq!(build(&back).unwrap().h_total, build(&s).unwrap().h_total);
    }

    #[test]
    fn layout_order_in_file_does_not_matter() {
        let mut spec = builtin_spec(Builtin::Cmaybe { theta: 0.9 }, BuiltinOptions::default());
        spec.layout.subsystems.reverse();
        let a = Scenario::from_spec(spec).unwrap();
        let b = cmaybe(0.9);
        assert_eq!(a.layout(), b.layout());
        assert_eq!(build(&a).unwrap().h_total, build(&b).unwrap().h_total);
        let _: &DensityMatrix = a.initial_wbar();
        assert_eq!(a.initial_wbar(), b.initial_wbar());
    }
}
