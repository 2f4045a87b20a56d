use std::path::Path;

use super::file::{complex_rows, DenseEntry, ScenarioSpec, StateBlock};
use super::terms::{DenseTerm, PauliTerm, Term};
use crate::states::{
    basis_state, cmaybe_state, gibbs_state, maximally_mixed, pure_state_from_amplitudes, werner_like_state,
    DensityMatrix,
};
use crate::tensor::{permute, tensor_product_all, CompositeOperator, SubsystemLayout, BATH, CANONICAL_ORDER, MEMORY, SYSTEM, WORK};
use crate::{Error, Result, C64};

/// Largest allowed ‖ρ_b − Gibbs(H_b, β)‖_∞ for the initial bath marginal.
pub const MARGINAL_TOL: f64 = 1e-9;

/// A validated experiment: four-role layout in canonical order, inverse
/// temperature, Hamiltonian terms and the initial product ρ_w̄ ⊗ ρ_w.
#[derive(Debug, Clone)]
pub struct Scenario {
    spec: ScenarioSpec,
    layout: SubsystemLayout,
    bare: Vec<Term>,
    interaction: Vec<Term>,
    initial_wbar: DensityMatrix,
    initial_work: DensityMatrix,
    bath_gibbs: DensityMatrix,
}

impl PartialEq for Scenario {
    fn eq(&self, other: &Self) -> bool {
        self.spec == other.spec
    }
}

/// The bath ⊗ system ⊗ memory labels.
pub const WBAR: [&str; 3] = [BATH, SYSTEM, MEMORY];

fn parse_terms(section: &super::file::TermSection, layout: &SubsystemLayout) -> Result<Vec<Term>> {
    let mut out = Vec::new();
    for t in &section.terms {
        out.push(Term::Pauli(PauliTerm::parse(t, layout)?));
    }
    for DenseEntry { labels, matrix } in &section.dense {
        out.push(Term::Dense(DenseTerm {
            labels: labels.clone(),
            matrix: complex_rows(matrix)?,
        }));
    }
    for t in &out {
        t.operator(layout)?;
    }
    Ok(out)
}

fn sub_layout_of(layout: &SubsystemLayout, labels: &[String]) -> Result<SubsystemLayout> {
    SubsystemLayout::new(
        labels
            .iter()
            .map(|l| layout.dim_of(l).map(|d| (l.clone(), d)))
            .collect::<Result<Vec<_>>>()?,
    )
}

/// Sum of the bare terms supported inside `labels`, as an operator on
/// those factors.
fn local_bare(bare: &[Term], layout: &SubsystemLayout, labels: &[String]) -> Result<CompositeOperator> {
    let sub = sub_layout_of(layout, labels)?;
    let mut acc = CompositeOperator::zeros(sub.clone());
    for t in bare {
        if t.support().iter().all(|l| labels.contains(l)) {
            acc = acc.checked_add(&t.operator(&sub)?)?;
        }
    }
    Ok(acc)
}

fn two_qubit_block(labels: &[String], layout: &SubsystemLayout, kind: &str) -> Result<SubsystemLayout> {
    let sub = sub_layout_of(layout, labels)?;
    if sub.dims() != [2, 2] {
        return Err(Error::Scenario(format!("'{kind}' block needs two qubits, got {sub}")));
    }
    Ok(sub)
}

fn realize_block(block: &StateBlock, layout: &SubsystemLayout, bare: &[Term], beta: f64) -> Result<DensityMatrix> {
    let labels = block.labels();
    let sub = sub_layout_of(layout, labels)?;
    let state = match block {
        StateBlock::Gibbs { .. } => gibbs_state(&local_bare(bare, layout, labels)?, beta)?,
        StateBlock::MaximallyMixed { .. } => maximally_mixed(sub),
        StateBlock::Basis { index, .. } => basis_state(*index, sub)?,
        StateBlock::Pure { amplitudes, normalize, .. } => {
            let a: Vec<C64> = amplitudes.iter().map(|z| C64::new(z[0], z[1])).collect();
            pure_state_from_amplitudes(&a, sub, *normalize)?
        }
        StateBlock::Matrix { rows, .. } => DensityMatrix::new(CompositeOperator::new(complex_rows(rows)?, sub)?)?,
        StateBlock::Cmaybe { theta, .. } => cmaybe_state(*theta).relabel(two_qubit_block(labels, layout, "cmaybe")?)?,
        StateBlock::Werner { lambda, phi, basis, .. } => {
            werner_like_state(*lambda, *phi, *basis)?.relabel(two_qubit_block(labels, layout, "werner")?)?
        }
    };
    Ok(state)
}

impl Scenario {
    pub fn from_spec(spec: ScenarioSpec) -> Result<Self> {
        if !(spec.beta > 0.0 && spec.beta.is_finite()) {
            return Err(Error::Scenario(format!("beta must be positive and finite, got {}", spec.beta)));
        }
        let given = SubsystemLayout::new(spec.layout.subsystems.iter().map(|e| (e.label.clone(), e.dim)))?;
        if given.len() != 4 || CANONICAL_ORDER.iter().any(|l| !given.contains(l)) {
            return Err(Error::Scenario(format!(
                "layout must consist of exactly the subsystems {CANONICAL_ORDER:?}, got {given}"
            )));
        }
        let layout = given.sub_layout(&CANONICAL_ORDER.map(|l| given.position(l).expect("checked")));

        let bare = parse_terms(&spec.hamiltonian.bare, &layout)?;
        let interaction = parse_terms(&spec.hamiltonian.interaction, &layout)?;
        for t in &bare {
            if t.support().len() != 1 {
                return Err(Error::Scenario(format!(
                    "bare term acts on {:?}; bare terms must be local to one subsystem",
                    t.support()
                )));
            }
        }

        let mut seen: Vec<&str> = Vec::new();
        let mut wbar_blocks = Vec::new();
        let mut work = None;
        for block in &spec.initial.blocks {
            let labels = block.labels();
            if labels.is_empty() {
                return Err(Error::Scenario("initial block without labels".into()));
            }
            for l in labels {
                if seen.contains(&l.as_str()) {
                    return Err(Error::Scenario(format!("'{l}' appears in two initial blocks")));
                }
                seen.push(l);
            }
            let state = realize_block(block, &layout, &bare, spec.beta)?;
            if labels.iter().any(|l| l == WORK) {
                if labels.len() != 1 {
                    return Err(Error::Scenario(
                        "the work source must be uncorrelated: give it a block of its own".into(),
                    ));
                }
                work = Some(state);
            } else {
                wbar_blocks.push(state);
            }
        }
        if let Some(missing) = CANONICAL_ORDER.iter().find(|l| !seen.contains(l)) {
            return Err(Error::Scenario(format!("no initial state given for '{missing}'")));
        }
        let initial_work = work.expect("work covered");
        let wbar = tensor_product_all(wbar_blocks.iter().map(|b| b.op()))?;
        let initial_wbar = DensityMatrix::from_trusted(permute(&wbar, &WBAR)?);

        let bath_h = local_bare(&bare, &layout, &[BATH.to_string()])?;
        let bath_gibbs = gibbs_state(&bath_h, spec.beta)?;
        let bath_marginal = initial_wbar.reduce(&[BATH])?;
        let dev = bath_marginal.op().checked_sub(bath_gibbs.op())?.op_norm();
        if dev > MARGINAL_TOL {
            return Err(Error::Scenario(format!(
                "initial bath marginal deviates from the Gibbs state of the bath Hamiltonian by {dev:.3e}"
            )));
        }

        Ok(Self {
            spec,
            layout,
            bare,
            interaction,
            initial_wbar,
            initial_work,
            bath_gibbs,
        })
    }

    pub fn from_toml_str(text: &str) -> Result<Self> {
        Self::from_spec(ScenarioSpec::from_toml(text)?)
    }

    pub fn from_path(path: impl AsRef<Path>) -> Result<Self> {
        Self::from_toml_str(&std::fs::read_to_string(path)?)
    }

    pub fn to_toml(&self) -> Result<String> {
        self.spec.to_toml()
    }

    pub fn spec(&self) -> &ScenarioSpec {
        &self.spec
    }

    /// Canonical layout bath ⊗ system ⊗ memory ⊗ work.
    pub fn layout(&self) -> &SubsystemLayout {
        &self.layout
    }

    pub fn beta(&self) -> f64 {
        self.spec.beta
    }

    pub fn bare_terms(&self) -> &[Term] {
        &self.bare
    }

    pub fn interaction_terms(&self) -> &[Term] {
        &self.interaction
    }

    /// ρ_w̄ on bath ⊗ system ⊗ memory.
    pub fn initial_wbar(&self) -> &DensityMatrix {
        &self.initial_wbar
    }

    pub fn initial_work(&self) -> &DensityMatrix {
        &self.initial_work
    }

    /// Gibbs state of the bare bath Hamiltonian at β.
    pub fn bath_gibbs(&self) -> &DensityMatrix {
        &self.bath_gibbs
    }

    /// ρ_w̄ ⊗ ρ_w.
    pub fn initial_total(&self) -> DensityMatrix {
        self.initial_wbar.tensor(&self.initial_work).expect("disjoint labels")
    }

    /// Bare Hamiltonian of one subsystem, on that factor alone.
    pub fn local_hamiltonian(&self, label: &str) -> Result<CompositeOperator> {
        if !self.layout.contains(label) {
            return Err(Error::Layout(format!("unknown label '{label}'")));
        }
        local_bare(&self.bare, &self.layout, &[label.to_string()])
    }

    pub fn dim(&self, label: &str) -> Result<usize> {
        self.layout.dim_of(label)
    }
}
