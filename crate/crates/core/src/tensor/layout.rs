use std::fmt;

use crate::{Error, Result};

pub const BATH: &str = "bath";
pub const SYSTEM: &str = "system";
pub const MEMORY: &str = "memory";
pub const WORK: &str = "work";

/// Factor order of the four roles in every composite built by this crate.
pub const CANONICAL_ORDER: [&str; 4] = [BATH, SYSTEM, MEMORY, WORK];

/// One tensor factor: a label and its Hilbert-space dimension.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Subsystem {
    pub label: String,
    pub dim: usize,
}

/// Ordered list of tensor factors. The first entry varies slowest in the
/// composite index.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct SubsystemLayout {
    entries: Vec<Subsystem>,
}

impl SubsystemLayout {
    pub fn new<I, S>(entries: I) -> Result<Self>
    where
        I: IntoIterator<Item = (S, usize)>,
        S: Into<String>,
    {
        let entries: Vec<Subsystem> = entries
            .into_iter()
            .map(|(label, dim)| Subsystem {
                label: label.into(),
                dim,
            })
            .collect();
        for (i, e) in entries.iter().enumerate() {
            if e.label.is_empty() {
                return Err(Error::Layout("empty subsystem label".into()));
            }
            if e.dim == 0 {
                return Err(Error::Layout(format!("subsystem '{}' has dimension 0", e.label)));
            }
            if entries[..i].iter().any(|o| o.label == e.label) {
                return Err(Error::Layout(format!("duplicate label '{}'", e.label)));
            }
        }
        Ok(Self { entries })
    }

    /// Layout made of qubits with the given labels.
    pub fn qubits<S: AsRef<str>>(labels: &[S]) -> Result<Self> {
        Self::new(labels.iter().map(|l| (l.as_ref().to_string(), 2)))
    }

    /// Single-factor layout.
    pub fn single(label: &str, dim: usize) -> Result<Self> {
        Self::new([(label, dim)])
    }

    /// The empty layout (total dimension 1).
    pub fn scalar() -> Self {
        Self { entries: Vec::new() }
    }

    pub fn entries(&self) -> &[Subsystem] {
        &self.entries
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn total_dim(&self) -> usize {
        self.entries.iter().map(|e| e.dim).product()
    }

    pub fn dims(&self) -> Vec<usize> {
        self.entries.iter().map(|e| e.dim).collect()
    }

    pub fn labels(&self) -> impl Iterator<Item = &str> {
        self.entries.iter().map(|e| e.label.as_str())
    }

    pub fn position(&self, label: &str) -> Option<usize> {
        self.entries.iter().position(|e| e.label == label)
    }

    pub fn contains(&self, label: &str) -> bool {
        self.position(label).is_some()
    }

    pub fn dim_of(&self, label: &str) -> Result<usize> {
        self.position(label)
            .map(|p| self.entries[p].dim)
            .ok_or_else(|| unknown_label(label, self))
    }

    /// Positions of `labels` in layout order. Every label must exist and
    /// appear at most once.
    pub fn positions<S: AsRef<str>>(&self, labels: &[S]) -> Result<Vec<usize>> {
        let mut out = Vec::with_capacity(labels.len());
        for l in labels {
            let l = l.as_ref();
            let p = self.position(l).ok_or_else(|| unknown_label(l, self))?;
            if out.contains(&p) {
                return Err(Error::Layout(format!("label '{l}' listed twice")));
            }
            out.push(p);
        }
        out.sort_unstable();
        Ok(out)
    }

    /// Layout restricted to the given positions (kept in the given order).
    pub fn sub_layout(&self, positions: &[usize]) -> Self {
        Self {
            entries: positions.iter().map(|&p| self.entries[p].clone()).collect(),
        }
    }

    /// Labels not in `labels`, in layout order.
    pub fn complement<S: AsRef<str>>(&self, labels: &[S]) -> Vec<String> {
        self.labels()
            .filter(|l| !labels.iter().any(|k| k.as_ref() == *l))
            .map(str::to_string)
            .collect()
    }

    pub fn concat(&self, other: &Self) -> Result<Self> {
        Self::new(
            self.entries
                .iter()
                .chain(other.entries.iter())
                .map(|e| (e.label.clone(), e.dim)),
        )
    }

    /// Row-major digits of a composite index.
    pub(crate) fn digits(&self, mut index: usize, out: &mut [usize]) {
        for (k, e) in self.entries.iter().enumerate().rev() {
            out[k] = index % e.dim;
            index /= e.dim;
        }
    }

    pub(crate) fn compose(&self, digits: &[usize]) -> usize {
        self.entries
            .iter()
            .zip(digits)
            .fold(0, |acc, (e, &d)| acc * e.dim + d)
    }
}

impl fmt::Display for SubsystemLayout {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self
            .entries
            .iter()
            .map(|e| format!("{}:{}", e.label, e.dim))
            .collect();
        write!(f, "[{}]", parts.join(" ⊗ "))
    }
}

fn unknown_label(label: &str, layout: &SubsystemLayout) -> Error {
    Error::Layout(format!("unknown label '{label}' in layout {layout}"))
}
