use nalgebra::{DVector, SymmetricEigen};

use super::CompositeOperator;
use crate::{CMatrix, Error, Result, C64};

/// Relative hermiticity tolerance: inputs must satisfy
/// ‖A − A†‖_∞ ≤ HERM_TOL·max(‖A‖_∞, 1).
pub const HERM_TOL: f64 = 1e-10;
/// Relative reconstruction tolerance of the eigensolver.
pub const EIG_TOL: f64 = 1e-12;

/// Spectral decomposition A = V diag(values) V† of a Hermitian operator.
#[derive(Debug, Clone)]
pub struct HermitianEigen {
    /// Ascending eigenvalues.
    pub values: DVector<f64>,
    /// Unitary matrix whose columns are the eigenvectors.
    pub vectors: CMatrix,
}

impl HermitianEigen {
    /// V f(Λ) V† for a real function of the spectrum.
    pub fn apply<F: Fn(f64) -> C64>(&self, f: F) -> CMatrix {
        let n = self.values.len();
        let mut scaled = self.vectors.clone();
        for j in 0..n {
            let fj = f(self.values[j]);
            for i in 0..n {
                scaled[(i, j)] *= fj;
            }
        }
        scaled * self.vectors.adjoint()
    }

    pub fn reconstruct(&self) -> CMatrix {
        self.apply(|x| C64::new(x, 0.0))
    }
}

/// Eigendecomposition of a Hermitian operator.
///
/// Fails with a contract error if the hermiticity residual exceeds
/// [`HERM_TOL`] relative to the operator norm.
pub fn hermitian_eig(op: &CompositeOperator) -> Result<HermitianEigen> {
    hermitian_eig_matrix(op.matrix())
}

pub(crate) fn hermitian_eig_matrix(m: &CMatrix) -> Result<HermitianEigen> {
    let n = m.nrows();
    if n == 0 {
        return Ok(HermitianEigen {
            values: DVector::zeros(0),
            vectors: CMatrix::zeros(0, 0),
        });
    }
    let scale = super::operator::op_norm(m).max(1.0);
    let residual = super::operator::op_norm(&(m - m.adjoint()));
    if residual > HERM_TOL * scale {
        return Err(Error::Contract {
            what: "operator is not Hermitian",
            residual,
            tolerance: HERM_TOL * scale,
        });
    }
    let sym = (m + m.adjoint()).scale(0.5);
    let eig = SymmetricEigen::new(sym);
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let values = DVector::from_iterator(n, order.iter().map(|&k| eig.eigenvalues[k]));
    let vectors = CMatrix::from_fn(n, n, |i, j| eig.eigenvectors[(i, order[j])]);
    Ok(HermitianEigen { values, vectors })
}

/// Time evolution operators e^{−iHt} built from one eigendecomposition of H.
#[derive(Debug, Clone)]
pub struct Propagator {
    eig: HermitianEigen,
    layout: super::SubsystemLayout,
}

impl Propagator {
    pub fn new(h: &CompositeOperator) -> Result<Self> {
        Ok(Self {
            eig: hermitian_eig(h)?,
            layout: h.layout().clone(),
        })
    }

    pub fn eigen(&self) -> &HermitianEigen {
        &self.eig
    }

    pub fn at(&self, t: f64) -> CompositeOperator {
        let m = self.eig.apply(|e| C64::from_polar(1.0, -e * t));
        CompositeOperator::new(m, self.layout.clone()).expect("propagator dimension")
    }
}

/// U(t) = e^{−iHt} via the Hermitian eigendecomposition of `h`.
pub fn evolution_operator(h: &CompositeOperator, t: f64) -> Result<CompositeOperator> {
    Ok(Propagator::new(h)?.at(t))
}

/// Schatten p-norm, p ∈ [1, ∞]. Pass `f64::INFINITY` for the spectral norm.
pub fn schatten_norm(op: &CompositeOperator, p: f64) -> Result<f64> {
    check_p(p)?;
    Ok(schatten_from_singular(&singular_values(op.matrix()), p))
}

pub(crate) fn check_p(p: f64) -> Result<()> {
    if p.is_nan() || p < 1.0 {
        return Err(Error::Parameter(format!("Schatten index p must be in [1, ∞], got {p}")));
    }
    Ok(())
}

/// Singular values; Hermitian inputs use |eigenvalues|.
pub(crate) fn singular_values(m: &CMatrix) -> Vec<f64> {
    if m.is_empty() {
        return Vec::new();
    }
    let n = m.nrows();
    let scale = m.iter().map(|z| z.norm()).fold(0.0, f64::max);
    if scale == 0.0 {
        return vec![0.0; n];
    }
    let mut herm = true;
    'outer: for i in 0..n {
        for j in i..n {
            if (m[(i, j)] - m[(j, i)].conj()).norm() > 1e-14 * scale {
                herm = false;
                break 'outer;
            }
        }
    }
    if herm {
        if n == 2 {
            return hermitian_2x2_abs_eigs(m);
        }
        let sym = (m + m.adjoint()).scale(0.5);
        SymmetricEigen::new(sym)
            .eigenvalues
            .iter()
            .map(|x| x.abs())
            .collect()
    } else {
        thin_svd(m).values
    }
}

/// Thin SVD M = Σ_k values[k]·u_k v_k†, values descending.
pub(crate) struct ThinSvd {
    pub values: Vec<f64>,
    pub u: CMatrix,
    pub v: CMatrix,
}

/// Read off the Hermitian eigenproblem of [[0, M], [M†, 0]], whose eigenpairs
/// are (±σ, [u; ±v]/√2). nalgebra's complex SVD can lose several digits on
/// rank-deficient input; the Hermitian solver does not.
pub(crate) fn thin_svd(m: &CMatrix) -> ThinSvd {
    let (r, c) = m.shape();
    let k = r.min(c);
    let mut big = CMatrix::zeros(r + c, r + c);
    big.view_mut((0, r), (r, c)).copy_from(m);
    big.view_mut((r, 0), (c, r)).copy_from(&m.adjoint());
    let eig = SymmetricEigen::new(big);
    let mut order: Vec<usize> = (0..r + c).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[b].total_cmp(&eig.eigenvalues[a]));
    let top = &order[..k];
    let root2 = C64::new(std::f64::consts::SQRT_2, 0.0);
    ThinSvd {
        values: top.iter().map(|&j| eig.eigenvalues[j].max(0.0)).collect(),
        u: CMatrix::from_fn(r, k, |i, j| eig.eigenvectors[(i, top[j])] * root2),
        v: CMatrix::from_fn(c, k, |i, j| eig.eigenvectors[(r + i, top[j])] * root2),
    }
}

fn hermitian_2x2_abs_eigs(m: &CMatrix) -> Vec<f64> {
    let a = 0.5 * (m[(0, 0)].re + m[(1, 1)].re);
    let d = 0.5 * (m[(0, 0)].re - m[(1, 1)].re);
    let b = 0.5 * (m[(0, 1)] + m[(1, 0)].conj());
    let r = d.hypot(b.norm());
    vec![(a + r).abs(), (a - r).abs()]
}

pub(crate) fn schatten_from_singular(s: &[f64], p: f64) -> f64 {
    let max = s.iter().cloned().fold(0.0, f64::max);
    if max == 0.0 {
        return 0.0;
    }
    if p.is_infinite() {
        return max;
    }
    if p == 1.0 {
        return s.iter().sum();
    }
    if p == 2.0 {
        return s.iter().map(|x| x * x).sum::<f64>().sqrt();
    }
    max * s.iter().map(|x| (x / max).powf(p)).sum::<f64>().powf(1.0 / p)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tensor::{pauli_matrix, Pauli, SubsystemLayout};

    fn qubit(p: Pauli) -> CompositeOperator {
        CompositeOperator::new(pauli_matrix(p), SubsystemLayout::qubits(&["a"]).unwrap()).unwrap()
    }

    #[test]
    fn z_spectrum() {
        let e = hermitian_eig(&qubit(Pauli::Z)).unwrap();
        assert_eq!(e.values.as_slice(), &[-1.0, 1.0]);
    }

    #[test]
    fn non_hermitian_rejected_with_residual() {
        let l = SubsystemLayout::qubits(&["a"]).unwrap();
        let m = CMatrix::from_row_slice(2, 2, &[C64::new(0., 0.), C64::new(1., 0.), C64::new(0., 0.), C64::new(0., 0.)]);
        match hermitian_eig(&CompositeOperator::new(m, l).unwrap()) {
            Err(Error::Contract { residual, .. }) => assert!((residual - 1.0).abs() < 1e-12),
            other => panic!("expected contract error, got {other:?}"),
        }
    }

    #[test]
    fn z_rotation_at_quarter_period() {
        let u = evolution_operator(&qubit(Pauli::Z), std::f64::consts::FRAC_PI_2).unwrap();
        let expect = [C64::from_polar(1.0, -std::f64::consts::FRAC_PI_2), C64::from_polar(1.0, std::f64::consts::FRAC_PI_2)];
        assert!((u.matrix()[(0, 0)] - expect[0]).norm() < 1e-15);
        assert!((u.matrix()[(1, 1)] - expect[1]).norm() < 1e-15);
        assert!(u.matrix()[(0, 1)].norm() < 1e-15);
    }

    #[test]
    fn schatten_diag_values() {
        let l = SubsystemLayout::qubits(&["a"]).unwrap();
        let a = CompositeOperator::from_real_diagonal(&[3.0, -4.0], l).unwrap();
        assert!((schatten_norm(&a, 1.0).unwrap() - 7.0).abs() < 1e-14);
        assert!((schatten_norm(&a, 2.0).unwrap() - 5.0).abs() < 1e-14);
        assert!((schatten_norm(&a, f64::INFINITY).unwrap() - 4.0).abs() < 1e-14);
        assert!(matches!(schatten_norm(&a, 0.5), Err(Error::Parameter(_))));
    }

    #[test]
    fn identity_trace_norm() {
        let l = SubsystemLayout::new([("a", 5)]).unwrap();
        assert!((schatten_norm(&CompositeOperator::identity(l), 1.0).unwrap() - 5.0).abs() < 1e-14);
    }

    #[test]
    fn thin_svd_handles_rank_deficient_complex_input() {
        // rank 2, 6×3, with irrational complex entries
        let col = |k: f64| CMatrix::from_fn(6, 1, |i, _| C64::new((k * (i as f64 + 1.0)).sin(), (k + i as f64).cos()));
        let row = |k: f64| CMatrix::from_fn(1, 3, |_, j| C64::new((k * j as f64).cos(), (k - j as f64).sin()));
        let m = col(0.7) * row(1.3) + col(2.1) * row(0.4);
        let svd = thin_svd(&m);
        let mut rebuilt = CMatrix::zeros(6, 3);
        for k in 0..3 {
            rebuilt += svd.u.column(k) * svd.v.column(k).adjoint() * C64::new(svd.values[k], 0.0);
        }
        assert!((rebuilt - &m).norm() < 1e-12);
        assert!(svd.values[2] < 1e-12 && svd.values[1] > 1e-3);
        let frob: f64 = svd.values.iter().map(|s| s * s).sum::<f64>().sqrt();
        assert!((frob - m.norm()).abs() < 1e-12);
    }
}
