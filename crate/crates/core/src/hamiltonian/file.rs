//! Scenario file format (TOML).
//!
//! ```toml
//! beta = 1.0
//!
//! [layout]
//! subsystems = [
//!     { label = "bath", dim = 2 },
//!     { label = "system", dim = 2 },
//!     { label = "memory", dim = 2 },
//!     { label = "work", dim = 2 },
//! ]
//!
//! [hamiltonian.bare]
//! terms = ["1.0 * Zb", "1.0 * Zs", "1.0 * Im", "1.0 * Zw"]
//!
//! [hamiltonian.interaction]
//! terms = ["1.0 * Zs Zw", "1.0 * Zs Zm", "1.0 * Zb Zm"]
//!
//! [[initial.blocks]]
//! state = "gibbs"
//! labels = ["bath"]
//!
//! [[initial.blocks]]
//! state = "cmaybe"
//! labels = ["system", "memory"]
//! theta = 1.0471975511965976
//!
//! [[initial.blocks]]
//! state = "basis"
//! labels = ["work"]
//! index = 1
//! ```
//!
//! Terms are Pauli strings (`coefficient * factors`, see
//! [`PauliTerm::parse`](super::PauliTerm::parse)). Factors of dimension
//! other than 2 need dense blocks:
//!
//! ```toml
//! [[hamiltonian.bare.dense]]
//! labels = ["bath"]
//! matrix = [[[1.0, 0.0], [0.0, 0.0], [0.0, 0.0]],
//!           [[0.0, 0.0], [2.0, 0.0], [0.0, 0.0]],
//!           [[0.0, 0.0], [0.0, 0.0], [3.0, 0.0]]]
//! ```
//!
//! Each entry is `[re, im]`. The initial state is the tensor product of the
//! blocks; blocks must cover every subsystem exactly once and the work
//! source must sit in a block of its own. Block kinds:
//!
//! | `state`           | extra keys                                  |
//! |-------------------|---------------------------------------------|
//! | `gibbs`           | none; thermal state of the bare terms on the block |
//! | `maximally_mixed` | none                                        |
//! | `basis`           | `index`                                     |
//! | `pure`            | `amplitudes = [[re, im], ...]`, optional `normalize` |
//! | `matrix`          | `rows = [[[re, im], ...], ...]`             |
//! | `cmaybe`          | `theta` (two qubits)                        |
//! | `werner`          | `lambda`, `phi`, `basis = "zx" \| "xx"` (two qubits) |
//!
//! Unknown keys anywhere are rejected.

use serde::{Deserialize, Serialize};

use crate::states::WernerBasis;
use crate::{CMatrix, Error, Result, C64};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioSpec {
    pub beta: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub description: Option<String>,
    pub layout: LayoutSection,
    #[serde(default)]
    pub hamiltonian: HamiltonianSection,
    pub initial: InitialSection,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LayoutSection {
    pub subsystems: Vec<SubsystemEntry>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SubsystemEntry {
    pub label: String,
    pub dim: usize,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct HamiltonianSection {
    #[serde(default)]
    pub bare: TermSection,
    #[serde(default)]
    pub interaction: TermSection,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TermSection {
    #[serde(default)]
    pub terms: Vec<String>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub dense: Vec<DenseEntry>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DenseEntry {
    pub labels: Vec<String>,
    pub matrix: Vec<Vec<[f64; 2]>>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InitialSection {
    pub blocks: Vec<StateBlock>,
}

/// One factor of the initial product state.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "state", rename_all = "snake_case", deny_unknown_fields)]
pub enum StateBlock {
    Gibbs {
        labels: Vec<String>,
    },
    MaximallyMixed {
        labels: Vec<String>,
    },
    Basis {
        labels: Vec<String>,
        index: usize,
    },
    Pure {
        labels: Vec<String>,
        amplitudes: Vec<[f64; 2]>,
        #[serde(default, skip_serializing_if = "std::ops::Not::not")]
        normalize: bool,
    },
    Matrix {
        labels: Vec<String>,
        rows: Vec<Vec<[f64; 2]>>,
    },
    Cmaybe {
        labels: Vec<String>,
        theta: f64,
    },
    Werner {
        labels: Vec<String>,
        lambda: f64,
        phi: f64,
        basis: WernerBasis,
    },
}

impl StateBlock {
    pub fn labels(&self) -> &[String] {
        match self {
            StateBlock::Gibbs { labels }
            | StateBlock::MaximallyMixed { labels }
            | StateBlock::Basis { labels, .. }
            | StateBlock::Pure { labels, .. }
            | StateBlock::Matrix { labels, .. }
            | StateBlock::Cmaybe { labels, .. }
            | StateBlock::Werner { labels, .. } => labels,
        }
    }
}

impl ScenarioSpec {
    pub fn from_toml(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Parse(e.to_string()))
    }

    pub fn to_toml(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| Error::Parse(e.to_string()))
    }
}

pub(crate) fn complex_rows(rows: &[Vec<[f64; 2]>]) -> Result<CMatrix> {
    let n = rows.len();
    if n == 0 || rows.iter().any(|r| r.len() != n) {
        return Err(Error::Parse("matrix rows must form a non-empty square array".into()));
    }
    Ok(CMatrix::from_fn(n, n, |i, j| C64::new(rows[i][j][0], rows[i][j][1])))
}

#[cfg(test)]
pub(crate) fn rows_of(m: &CMatrix) -> Vec<Vec<[f64; 2]>> {
    (0..m.nrows())
        .map(|i| (0..m.ncols()).map(|j| [m[(i, j)].re, m[(i, j)].im]).collect())
        .collect()
}
