use std::ops::{Add, Mul, Sub};

use nalgebra::DMatrix;

use super::SubsystemLayout;
use crate::{CMatrix, Error, Result, C64};

/// A square complex matrix acting on the Hilbert space described by a layout.
///
/// Hermitian, unitary and density tags are never assumed; use the residual
/// accessors to check them.
#[derive(Debug, Clone, PartialEq)]
pub struct CompositeOperator {
    matrix: CMatrix,
    layout: SubsystemLayout,
}

impl CompositeOperator {
    pub fn new(matrix: CMatrix, layout: SubsystemLayout) -> Result<Self> {
        let d = layout.total_dim();
        if matrix.nrows() != d || matrix.ncols() != d {
            return Err(Error::Shape(format!(
                "matrix is {}x{} but layout {layout} has dimension {d}",
                matrix.nrows(),
                matrix.ncols()
            )));
        }
        Ok(Self { matrix, layout })
    }

    pub fn identity(layout: SubsystemLayout) -> Self {
        let d = layout.total_dim();
        Self {
            matrix: DMatrix::identity(d, d),
            layout,
        }
    }

    pub fn zeros(layout: SubsystemLayout) -> Self {
        let d = layout.total_dim();
        Self {
            matrix: DMatrix::zeros(d, d),
            layout,
        }
    }

    /// Diagonal operator from real entries.
    pub fn from_real_diagonal(diag: &[f64], layout: SubsystemLayout) -> Result<Self> {
        let m = DMatrix::from_diagonal(&nalgebra::DVector::from_iterator(
            diag.len(),
            diag.iter().map(|&x| C64::new(x, 0.0)),
        ));
        Self::new(m, layout)
    }

    /// Row-major construction from complex entries.
    pub fn from_rows(rows: &[Vec<C64>], layout: SubsystemLayout) -> Result<Self> {
        let n = rows.len();
        if rows.iter().any(|r| r.len() != n) {
            return Err(Error::Shape("rows must form a square matrix".into()));
        }
        let m = DMatrix::from_fn(n, n, |i, j| rows[i][j]);
        Self::new(m, layout)
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.matrix
    }

    pub fn layout(&self) -> &SubsystemLayout {
        &self.layout
    }

    pub fn into_matrix(self) -> CMatrix {
        self.matrix
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn trace(&self) -> C64 {
        self.matrix.trace()
    }

    pub fn adjoint(&self) -> Self {
        Self {
            matrix: self.matrix.adjoint(),
            layout: self.layout.clone(),
        }
    }

    pub fn scale(&self, s: f64) -> Self {
        Self {
            matrix: self.matrix.scale(s),
            layout: self.layout.clone(),
        }
    }

    pub fn scale_complex(&self, s: C64) -> Self {
        Self {
            matrix: &self.matrix * s,
            layout: self.layout.clone(),
        }
    }

    /// Same matrix, different labels. Dimensions must agree factor by factor.
    pub fn relabel(&self, layout: SubsystemLayout) -> Result<Self> {
        if layout.dims() != self.layout.dims() {
            return Err(Error::Layout(format!(
                "cannot relabel {} as {layout}",
                self.layout
            )));
        }
        Ok(Self {
            matrix: self.matrix.clone(),
            layout,
        })
    }

    pub(crate) fn with_matrix(&self, matrix: CMatrix) -> Self {
        debug_assert_eq!(matrix.nrows(), self.dim());
        Self {
            matrix,
            layout: self.layout.clone(),
        }
    }

    /// Largest singular value.
    pub fn op_norm(&self) -> f64 {
        op_norm(&self.matrix)
    }

    /// ‖A − A†‖_∞.
    pub fn hermiticity_residual(&self) -> f64 {
        op_norm(&(&self.matrix - self.matrix.adjoint()))
    }

    /// ‖U†U − 1‖_∞.
    pub fn unitarity_residual(&self) -> f64 {
        let d = self.dim();
        op_norm(&(self.matrix.adjoint() * &self.matrix - CMatrix::identity(d, d)))
    }

    pub fn is_hermitian(&self, tol: f64) -> bool {
        self.hermiticity_residual() <= tol
    }

    pub fn is_unitary(&self, tol: f64) -> bool {
        self.unitarity_residual() <= tol
    }

    /// Largest entry modulus.
    pub fn max_abs_entry(&self) -> f64 {
        self.matrix.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    /// Largest off-diagonal entry modulus.
    pub fn max_abs_off_diagonal(&self) -> f64 {
        let n = self.dim();
        let mut m: f64 = 0.0;
        for i in 0..n {
            for j in 0..n {
                if i != j {
                    m = m.max(self.matrix[(i, j)].norm());
                }
            }
        }
        m
    }

    fn check_same_layout(&self, other: &Self, op: &str) -> Result<()> {
        if self.layout != other.layout {
            return Err(Error::Shape(format!(
                "{op}: layouts differ ({} vs {})",
                self.layout, other.layout
            )));
        }
        Ok(())
    }

    pub fn checked_add(&self, other: &Self) -> Result<Self> {
        self.check_same_layout(other, "add")?;
        Ok(self.with_matrix(&self.matrix + &other.matrix))
    }

    pub fn checked_sub(&self, other: &Self) -> Result<Self> {
        self.check_same_layout(other, "sub")?;
        Ok(self.with_matrix(&self.matrix - &other.matrix))
    }

    pub fn checked_mul(&self, other: &Self) -> Result<Self> {
        self.check_same_layout(other, "mul")?;
        Ok(self.with_matrix(&self.matrix * &other.matrix))
    }

    pub fn powi(&self, n: u32) -> Self {
        let d = self.dim();
        let mut acc = CMatrix::identity(d, d);
        for _ in 0..n {
            acc = &acc * &self.matrix;
        }
        self.with_matrix(acc)
    }
}

/// Spectral norm of a dense matrix.
pub(crate) fn op_norm(m: &CMatrix) -> f64 {
    if m.is_empty() {
        return 0.0;
    }
    if m.iter().all(|z| *z == C64::new(0.0, 0.0)) {
        return 0.0;
    }
    super::spectral::singular_values(m).into_iter().fold(0.0, f64::max)
}

impl<'a> Add<&'a CompositeOperator> for &'a CompositeOperator {
    type Output = CompositeOperator;

    /// Panics when the layouts differ; use [`CompositeOperator::checked_add`]
    /// for a fallible version.
    fn add(self, rhs: &'a CompositeOperator) -> CompositeOperator {
        self.checked_add(rhs).expect("operator addition")
    }
}

impl<'a> Sub<&'a CompositeOperator> for &'a CompositeOperator {
    type Output = CompositeOperator;

    fn sub(self, rhs: &'a CompositeOperator) -> CompositeOperator {
        self.checked_sub(rhs).expect("operator subtraction")
    }
}

impl<'a> Mul<&'a CompositeOperator> for &'a CompositeOperator {
    type Output = CompositeOperator;

    fn mul(self, rhs: &'a CompositeOperator) -> CompositeOperator {
        self.checked_mul(rhs).expect("operator product")
    }
}
