//! Dense complex multipartite linear algebra.

mod layout;
mod operator;
mod ops;
mod schmidt;
mod spectral;

pub use layout::{Subsystem, SubsystemLayout, BATH, CANONICAL_ORDER, MEMORY, SYSTEM, WORK};
pub use operator::CompositeOperator;
pub(crate) use operator::op_norm;
pub use ops::{commutator, embed, partial_trace, partial_transpose, permute, tensor_product, tensor_product_all};
pub use schmidt::{operator_schmidt, SchmidtTerm, SCHMIDT_TOL};
pub use spectral::{
    evolution_operator, hermitian_eig, schatten_norm, HermitianEigen, Propagator, EIG_TOL, HERM_TOL,
};
pub(crate) use spectral::{check_p, hermitian_eig_matrix, schatten_from_singular, singular_values};

use crate::{CMatrix, C64};

/// Single-qubit Pauli operators.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Pauli {
    I,
    X,
    Y,
    Z,
}

impl Pauli {
    pub fn from_char(c: char) -> Option<Self> {
        match c {
            'I' => Some(Self::I),
            'X' => Some(Self::X),
            'Y' => Some(Self::Y),
            'Z' => Some(Self::Z),
            _ => None,
        }
    }

    pub fn as_char(self) -> char {
        match self {
            Self::I => 'I',
            Self::X => 'X',
            Self::Y => 'Y',
            Self::Z => 'Z',
        }
    }
}

/// 2×2 matrix of a Pauli operator.
pub fn pauli_matrix(p: Pauli) -> CMatrix {
    let o = C64::new(0.0, 0.0);
    let one = C64::new(1.0, 0.0);
    let i = C64::new(0.0, 1.0);
    let e = match p {
        Pauli::I => [one, o, o, one],
        Pauli::X => [o, one, one, o],
        Pauli::Y => [o, -i, i, o],
        Pauli::Z => [one, o, o, -one],
    };
    CMatrix::from_row_slice(2, 2, &e)
}
