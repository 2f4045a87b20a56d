use std::collections::BTreeMap;
use std::fmt;

use crate::tensor::{embed, pauli_matrix, CompositeOperator, Pauli, SubsystemLayout, BATH, MEMORY, SYSTEM, WORK};
use crate::{CMatrix, Error, Result, C64};

/// A real multiple of a tensor product of Pauli operators. Labels absent
/// from `factors` carry the identity.
#[derive(Debug, Clone, PartialEq)]
pub struct PauliTerm {
    pub coefficient: f64,
    pub factors: BTreeMap<String, Pauli>,
}

/// Short suffixes accepted for the four roles, e.g. `Zb` for `Z` on the bath.
const ROLE_SUFFIXES: [(&str, &str); 4] = [("b", BATH), ("s", SYSTEM), ("m", MEMORY), ("w", WORK)];

fn resolve_suffix(suffix: &str, layout: &SubsystemLayout) -> Option<String> {
    if layout.contains(suffix) {
        return Some(suffix.to_string());
    }
    ROLE_SUFFIXES
        .iter()
        .find(|(short, full)| *short == suffix && layout.contains(full))
        .map(|(_, full)| full.to_string())
}

fn suffix_for(label: &str) -> &str {
    ROLE_SUFFIXES
        .iter()
        .find(|(_, full)| *full == label)
        .map(|(short, _)| *short)
        .unwrap_or(label)
}

impl PauliTerm {
    pub fn new<S: Into<String>>(coefficient: f64, factors: impl IntoIterator<Item = (S, Pauli)>) -> Result<Self> {
        if !coefficient.is_finite() {
            return Err(Error::Parse(format!("non-finite coefficient {coefficient}")));
        }
        let mut map = BTreeMap::new();
        for (label, p) in factors {
            let label = label.into();
            if map.insert(label.clone(), p).is_some() {
                return Err(Error::Parse(format!("label '{label}' appears twice in one term")));
            }
        }
        if map.is_empty() {
            return Err(Error::Parse("term has no factors".into()));
        }
        Ok(Self { coefficient, factors: map })
    }

    /// Parses `"0.5 * Zb Zs"`. The coefficient and `*` are optional; each
    /// factor is a Pauli letter followed by a layout label or one of the
    /// role suffixes `b`, `s`, `m`, `w`.
    pub fn parse(text: &str, layout: &SubsystemLayout) -> Result<Self> {
        let (coef, body) = match text.split_once('*') {
            Some((c, rest)) => {
                let c = c.trim();
                let v: f64 = c
                    .parse()
                    .map_err(|_| Error::Parse(format!("bad coefficient '{c}' in term '{text}'")))?;
                (v, rest)
            }
            None => (1.0, text),
        };
        let mut factors = Vec::new();
        for tok in body.split_whitespace() {
            let mut chars = tok.chars();
            let letter = chars.next().and_then(Pauli::from_char);
            let suffix = chars.as_str();
            let (Some(p), false) = (letter, suffix.is_empty()) else {
                return Err(Error::Parse(format!("bad factor '{tok}' in term '{text}'")));
            };
            let label = resolve_suffix(suffix, layout)
                .ok_or_else(|| Error::Parse(format!("factor '{tok}' names no subsystem of {layout}")))?;
            factors.push((label, p));
        }
        Self::new(coef, factors)
    }

    /// Dense operator on `layout`.
    pub fn operator(&self, layout: &SubsystemLayout) -> Result<CompositeOperator> {
        for label in self.factors.keys() {
            let d = layout.dim_of(label)?;
            if d != 2 {
                return Err(Error::Scenario(format!(
                    "Pauli factor on '{label}' of dimension {d}; use a dense block instead"
                )));
            }
        }
        let mut m = CMatrix::identity(1, 1);
        for e in layout.entries() {
            let f = match self.factors.get(&e.label) {
                Some(&p) => pauli_matrix(p),
                None => CMatrix::identity(e.dim, e.dim),
            };
            m = m.kronecker(&f);
        }
        CompositeOperator::new(m * C64::new(self.coefficient, 0.0), layout.clone())
    }
}

impl fmt::Display for PauliTerm {
    /// Shortest round-trip coefficient, then the factors.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:?} *", self.coefficient)?;
        for (label, p) in &self.factors {
            write!(f, " {}{}", p.as_char(), suffix_for(label))?;
        }
        Ok(())
    }
}

/// A Hermitian matrix acting on the listed factors, in the listed order.
#[derive(Debug, Clone, PartialEq)]
pub struct DenseTerm {
    pub labels: Vec<String>,
    pub matrix: CMatrix,
}

impl DenseTerm {
    pub fn operator(&self, layout: &SubsystemLayout) -> Result<CompositeOperator> {
        let dims = self
            .labels
            .iter()
            .map(|l| layout.dim_of(l).map(|d| (l.clone(), d)))
            .collect::<Result<Vec<_>>>()?;
        let local_layout = SubsystemLayout::new(dims)?;
        let local = CompositeOperator::new(self.matrix.clone(), local_layout)?;
        let scale = local.op_norm().max(1.0);
        let herm = local.hermiticity_residual();
        if herm > crate::tensor::HERM_TOL * scale {
            return Err(Error::Contract {
                what: "dense Hamiltonian block is not Hermitian",
                residual: herm,
                tolerance: crate::tensor::HERM_TOL * scale,
            });
        }
        embed(&local, layout)
    }
}

/// One Hamiltonian term.
#[derive(Debug, Clone, PartialEq)]
pub enum Term {
    Pauli(PauliTerm),
    Dense(DenseTerm),
}

impl Term {
    /// Labels the term acts on, sorted.
    pub fn support(&self) -> Vec<String> {
        match self {
            Term::Pauli(p) => p.factors.keys().cloned().collect(),
            Term::Dense(d) => {
                let mut v = d.labels.clone();
                v.sort();
                v
            }
        }
    }

    pub fn operator(&self, layout: &SubsystemLayout) -> Result<CompositeOperator> {
        match self {
            Term::Pauli(p) => p.operator(layout),
            Term::Dense(d) => d.operator(layout),
        }
    }
}
