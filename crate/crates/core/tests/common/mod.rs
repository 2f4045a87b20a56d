//! Random matrices and scenarios shared by the integration tests.
#![allow(dead_code)]

use autotherm::hamiltonian::{
    DenseEntry, HamiltonianSection, InitialSection, LayoutSection, Scenario, ScenarioSpec, StateBlock,
    SubsystemEntry, TermSection,
};
use autotherm::tensor::{CompositeOperator, SubsystemLayout};
use autotherm::{CMatrix, C64};
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};
use rand_distr::StandardNormal;

pub const LABELS: [&str; 4] = ["bath", "system", "memory", "work"];

pub fn rng(seed: u64) -> StdRng {
    StdRng::seed_from_u64(seed)
}

/// Complex Ginibre matrix with unit-variance entries.
pub fn ginibre(rng: &mut StdRng, d: usize) -> CMatrix {
    CMatrix::from_fn(d, d, |_, _| {
        C64::new(rng.sample::<f64, _>(StandardNormal), rng.sample::<f64, _>(StandardNormal))
    })
}

pub fn hermitian(rng: &mut StdRng, d: usize) -> CMatrix {
    let g = ginibre(rng, d);
    (&g + g.adjoint()).scale(0.5)
}

/// Haar unitary from the QR decomposition of a Ginibre matrix.
pub fn unitary(rng: &mut StdRng, d: usize) -> CMatrix {
    let qr = ginibre(rng, d).qr();
    let (mut q, r) = (qr.q(), qr.r());
    for j in 0..d {
        let z = r[(j, j)];
        let phase = if z.norm() > 0.0 { z / z.norm() } else { C64::new(1.0, 0.0) };
        for i in 0..d {
            q[(i, j)] *= phase;
        }
    }
    q
}

/// Full-rank density matrix G G† / tr.
pub fn density(rng: &mut StdRng, d: usize) -> CMatrix {
    let g = ginibre(rng, d);
    let m = &g * g.adjoint();
    let tr = m.trace();
    m.map(|z| z / tr)
}

pub fn layout16() -> SubsystemLayout {
    SubsystemLayout::qubits(&LABELS).unwrap()
}

pub fn operator16(m: CMatrix) -> CompositeOperator {
    CompositeOperator::new(m, layout16()).unwrap()
}

fn rows(m: &CMatrix) -> Vec<Vec<[f64; 2]>> {
    (0..m.nrows()).map(|i| (0..m.ncols()).map(|j| [m[(i, j)].re, m[(i, j)].im]).collect()).collect()
}

fn strings(labels: &[&str]) -> Vec<String> {
    labels.iter().map(|s| s.to_string()).collect()
}

fn diag(values: &[f64]) -> CMatrix {
    CMatrix::from_fn(values.len(), values.len(), |i, j| {
        if i == j { C64::new(values[i], 0.0) } else { C64::new(0.0, 0.0) }
    })
}

/// Four-qubit scenario with H_tot = H_b ⊗ 1 + Σ_k A_k ⊗ B_k where every
/// A_k (and H_b ⊗ 1) is diagonal in one product basis of bath ⊗ (system,
/// memory), and every B_k commutes with ρ_w. Half of the draws use a
/// maximally mixed work state with arbitrary Hermitian B_k, the other half a
/// diagonal work state with diagonal B_k. The bath is Gibbs, system and
/// memory start in a random correlated state.
pub fn commuting_structure_scenario(rng: &mut StdRng) -> Scenario {
    let vb = unitary(rng, 2);
    let vsm = unitary(rng, 4);
    let basis = vb.kronecker(&vsm);
    let bath_levels: [f64; 2] = [rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)];
    let h_b = &vb * diag(&bath_levels) * vb.adjoint();

    let flat_work = rng.gen_bool(0.5);
    let pop: f64 = rng.gen_range(0.05..0.95);
    let terms = rng.gen_range(1..=3);
    let mut h_struct = CMatrix::zeros(16, 16);
    for _ in 0..terms {
        let spectrum: Vec<f64> = (0..8).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let a = &basis * diag(&spectrum) * basis.adjoint();
        let b = if flat_work {
            hermitian(rng, 2)
        } else {
            diag(&[rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)])
        };
        h_struct += a.kronecker(&b);
    }
    let work_block = if flat_work {
        StateBlock::MaximallyMixed { labels: strings(&["work"]) }
    } else {
        StateBlock::Matrix {
            labels: strings(&["work"]),
            rows: rows(&diag(&[pop, 1.0 - pop])),
        }
    };

    let spec = ScenarioSpec {
        beta: rng.gen_range(0.2..3.0),
        description: Some("random commuting-structure scenario".into()),
        layout: LayoutSection {
            subsystems: LABELS.iter().map(|l| SubsystemEntry { label: l.to_string(), dim: 2 }).collect(),
        },
        hamiltonian: HamiltonianSection {
            bare: TermSection {
                terms: Vec::new(),
                dense: vec![DenseEntry { labels: strings(&["bath"]), matrix: rows(&h_b) }],
            },
            interaction: TermSection {
                terms: Vec::new(),
                dense: vec![DenseEntry { labels: strings(&LABELS), matrix: rows(&h_struct) }],
            },
        },
        initial: InitialSection {
            blocks: vec![
                StateBlock::Gibbs { labels: strings(&["bath"]) },
                StateBlock::Matrix {
                    labels: strings(&["system", "memory"]),
                    rows: rows(&density(rng, 4)),
                },
                work_block,
            ],
        },
    };
    Scenario::from_spec(spec).expect("generated scenario is valid")
}
