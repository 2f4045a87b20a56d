//! Density matrices, named state families and entropy functionals.
//!
//! Entropies are in nats.

use std::f64::consts::FRAC_1_SQRT_2;

use crate::tensor::{
    hermitian_eig, hermitian_eig_matrix, partial_trace, tensor_product, CompositeOperator, SubsystemLayout,
    MEMORY, SYSTEM,
};
use crate::{CMatrix, Error, Result, C64};

/// Tolerance on hermiticity, unit trace and negative eigenvalues of a
/// density matrix.
pub const DENSITY_TOL: f64 = 1e-10;
/// Eigenvalues below this are treated as exact zeros in entropies.
pub const EIG_FLOOR: f64 = 1e-14;
/// Largest weight a state may put on the kernel of the reference state
/// before the relative entropy is declared infinite.
pub const SUPPORT_TOL: f64 = 1e-10;

/// A validated density matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix {
    op: CompositeOperator,
}

impl DensityMatrix {
    /// Validates hermiticity, unit trace and positivity to [`DENSITY_TOL`].
    pub fn new(op: CompositeOperator) -> Result<Self> {
        let herm = op.hermiticity_residual();
        if herm > DENSITY_TOL {
            return Err(Error::Contract {
                what: "density matrix is not Hermitian",
                residual: herm,
                tolerance: DENSITY_TOL,
            });
        }
        let tr = op.trace();
        let trace_dev = (tr - C64::new(1.0, 0.0)).norm();
        if trace_dev > DENSITY_TOL {
            return Err(Error::Contract {
                what: "density matrix trace differs from 1",
                residual: trace_dev,
                tolerance: DENSITY_TOL,
            });
        }
        let min = hermitian_eig(&op)?.values.iter().cloned().fold(f64::INFINITY, f64::min);
        if min < -DENSITY_TOL {
            return Err(Error::Contract {
                what: "density matrix has a negative eigenvalue",
                residual: -min,
                tolerance: DENSITY_TOL,
            });
        }
        Ok(Self { op })
    }

    /// Wraps an operator known to be a state by construction (unitary
    /// conjugates, partial traces and products of states).
    pub(crate) fn from_trusted(op: CompositeOperator) -> Self {
        Self { op }
    }

    pub fn op(&self) -> &CompositeOperator {
        &self.op
    }

    pub fn matrix(&self) -> &CMatrix {
        self.op.matrix()
    }

    pub fn layout(&self) -> &SubsystemLayout {
        self.op.layout()
    }

    pub fn dim(&self) -> usize {
        self.op.dim()
    }

    pub fn into_op(self) -> CompositeOperator {
        self.op
    }

    /// tr ρ².
    pub fn purity(&self) -> f64 {
        let m = self.op.matrix();
        m.iter().map(|z| z.norm_sqr()).sum()
    }

    /// Ascending eigenvalues.
    pub fn eigenvalues(&self) -> Vec<f64> {
        hermitian_eig_matrix(self.op.matrix())
            .map(|e| e.values.iter().cloned().collect())
            .unwrap_or_default()
    }

    /// Marginal on the listed factors.
    pub fn reduce<S: AsRef<str>>(&self, keep: &[S]) -> Result<Self> {
        Ok(Self::from_trusted(partial_trace(&self.op, keep)?))
    }

    pub fn tensor(&self, other: &Self) -> Result<Self> {
        Ok(Self::from_trusted(tensor_product(&self.op, &other.op)?))
    }

    /// Same state with relabelled factors.
    pub fn relabel(&self, layout: SubsystemLayout) -> Result<Self> {
        Ok(Self::from_trusted(self.op.relabel(layout)?))
    }
}

/// Entropy in nats.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd)]
pub struct EntropyValue {
    pub nats: f64,
}

/// Relative entropy S(ρ‖σ) together with the weight of ρ on the numerical
/// kernel of σ. `nats` is +∞ when that weight exceeds [`SUPPORT_TOL`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RelativeEntropy {
    pub nats: f64,
    pub kernel_mass: f64,
}

impl RelativeEntropy {
    pub fn is_finite(&self) -> bool {
        self.nats.is_finite()
    }
}

/// e^{−βh}/tr e^{−βh}, with the spectrum shifted by its minimum before
/// exponentiating.
pub fn gibbs_state(h: &CompositeOperator, beta: f64) -> Result<DensityMatrix> {
    if !(beta > 0.0 && beta.is_finite()) {
        return Err(Error::Parameter(format!("inverse temperature must be positive, got {beta}")));
    }
    let eig = hermitian_eig(h)?;
    let min = eig.values.iter().cloned().fold(f64::INFINITY, f64::min);
    let z: f64 = eig.values.iter().map(|e| (-beta * (e - min)).exp()).sum();
    let m = eig.apply(|e| C64::new((-beta * (e - min)).exp() / z, 0.0));
    let m = (&m + m.adjoint()).scale(0.5);
    Ok(DensityMatrix::from_trusted(CompositeOperator::new(m, h.layout().clone())?))
}

/// −Σ λ ln λ over eigenvalues above [`EIG_FLOOR`].
pub fn entropy_of_spectrum(values: impl IntoIterator<Item = f64>) -> f64 {
    values
        .into_iter()
        .filter(|&x| x > EIG_FLOOR)
        .map(|x| -x * x.ln())
        .sum()
}

pub fn von_neumann_entropy(rho: &DensityMatrix) -> EntropyValue {
    let nats = entropy_of_spectrum(rho.eigenvalues()).max(0.0);
    EntropyValue { nats }
}

/// S(ρ‖σ) = −S(ρ) − tr ρ ln σ, evaluated in the eigenbasis of σ.
pub fn relative_entropy(rho: &DensityMatrix, sigma: &DensityMatrix) -> Result<RelativeEntropy> {
    if rho.layout() != sigma.layout() {
        return Err(Error::Shape(format!(
            "relative entropy between states on {} and {}",
            rho.layout(),
            sigma.layout()
        )));
    }
    let eig = hermitian_eig_matrix(sigma.matrix())?;
    let w = &eig.vectors;
    let rotated = w.adjoint() * rho.matrix() * w;
    let mut kernel_mass = 0.0;
    let mut cross = 0.0;
    for (k, &s) in eig.values.iter().enumerate() {
        let pk = rotated[(k, k)].re;
        if s < EIG_FLOOR {
            kernel_mass += pk;
        } else {
            cross -= pk * s.ln();
        }
    }
    let kernel_mass = kernel_mass.max(0.0);
    if kernel_mass > SUPPORT_TOL {
        return Ok(RelativeEntropy {
            nats: f64::INFINITY,
            kernel_mass,
        });
    }
    let nats = cross - von_neumann_entropy(rho).nats;
    Ok(RelativeEntropy { nats, kernel_mass })
}

/// 1/D on a layout.
pub fn maximally_mixed(layout: SubsystemLayout) -> DensityMatrix {
    let d = layout.total_dim() as f64;
    DensityMatrix::from_trusted(CompositeOperator::identity(layout).scale(1.0 / d))
}

/// Computational basis projector |index⟩⟨index|.
pub fn basis_state(index: usize, layout: SubsystemLayout) -> Result<DensityMatrix> {
    let d = layout.total_dim();
    if index >= d {
        return Err(Error::Parameter(format!("basis index {index} out of range for dimension {d}")));
    }
    let mut m = CMatrix::zeros(d, d);
    m[(index, index)] = C64::new(1.0, 0.0);
    Ok(DensityMatrix::from_trusted(CompositeOperator::new(m, layout)?))
}

/// |ψ⟩⟨ψ| from amplitudes. Without `normalize`, the norm must be 1 within
/// [`DENSITY_TOL`].
pub fn pure_state_from_amplitudes(amps: &[C64], layout: SubsystemLayout, normalize: bool) -> Result<DensityMatrix> {
    if amps.len() != layout.total_dim() {
        return Err(Error::Shape(format!(
            "{} amplitudes for layout {layout} of dimension {}",
            amps.len(),
            layout.total_dim()
        )));
    }
    let norm2: f64 = amps.iter().map(|a| a.norm_sqr()).sum();
    if norm2 == 0.0 {
        return Err(Error::Parameter("zero state vector".into()));
    }
    let scale = if normalize {
        1.0 / norm2.sqrt()
    } else {
        if (norm2.sqrt() - 1.0).abs() > DENSITY_TOL {
            return Err(Error::Parameter(format!("state vector has norm {}", norm2.sqrt())));
        }
        1.0
    };
    let v: Vec<C64> = amps.iter().map(|a| a * scale).collect();
    let d = v.len();
    let m = CMatrix::from_fn(d, d, |i, j| v[i] * v[j].conj());
    Ok(DensityMatrix::from_trusted(CompositeOperator::new(m, layout)?))
}

fn system_memory() -> SubsystemLayout {
    SubsystemLayout::qubits(&[SYSTEM, MEMORY]).expect("static layout")
}

/// Two-qubit amplitudes of |a⟩⊗|b⟩ for real single-qubit vectors.
fn product2(a: [f64; 2], b: [f64; 2]) -> [f64; 4] {
    [a[0] * b[0], a[0] * b[1], a[1] * b[0], a[1] * b[1]]
}

const PLUS: [f64; 2] = [FRAC_1_SQRT_2, FRAC_1_SQRT_2];
const MINUS: [f64; 2] = [FRAC_1_SQRT_2, -FRAC_1_SQRT_2];
const ZERO: [f64; 2] = [1.0, 0.0];
const ONE: [f64; 2] = [0.0, 1.0];

fn real_pure(amps: [f64; 4]) -> DensityMatrix {
    let c: Vec<C64> = amps.iter().map(|&x| C64::new(x, 0.0)).collect();
    pure_state_from_amplitudes(&c, system_memory(), true).expect("nonzero amplitudes")
}

/// Pure system⊗memory state produced by a controlled partial flip of a
/// memory prepared in |+⟩, controlled by a system in |±⟩:
/// (|−⟩|+⟩ + |+⟩(cosθ|+⟩ + sinθ|−⟩))/√2.
///
/// Marginals: ρ_s = diag(cos²(θ/2), sin²(θ/2)),
/// ρ_m = ½[[1 + sinθcosθ, cos²θ], [cos²θ, 1 − sinθcosθ]].
pub fn cmaybe_state(theta: f64) -> DensityMatrix {
    let (s, c) = theta.sin_cos();
    let first = product2(MINUS, PLUS);
    let a = product2(PLUS, PLUS);
    let b = product2(PLUS, MINUS);
    let mut amps = [0.0; 4];
    for k in 0..4 {
        amps[k] = (first[k] + c * a[k] + s * b[k]) * FRAC_1_SQRT_2;
    }
    real_pure(amps)
}

/// Basis pair of the Werner-like family.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum WernerBasis {
    /// |ψ⟩ = cosφ|0⟩|+⟩ + sinφ|1⟩|−⟩
    Zx,
    /// |ψ⟩ = cosφ|+⟩|+⟩ + sinφ|−⟩|−⟩
    Xx,
}

/// (1−λ)/4·1 + λ|ψ(φ)⟩⟨ψ(φ)| on system⊗memory.
pub fn werner_like_state(lambda: f64, phi: f64, basis: WernerBasis) -> Result<DensityMatrix> {
    if !(0.0..=1.0).contains(&lambda) {
        return Err(Error::Parameter(format!("mixing weight must lie in [0, 1], got {lambda}")));
    }
    let (s, c) = phi.sin_cos();
    let (a, b) = match basis {
        WernerBasis::Zx => (product2(ZERO, PLUS), product2(ONE, MINUS)),
        WernerBasis::Xx => (product2(PLUS, PLUS), product2(MINUS, MINUS)),
    };
    let mut amps = [0.0; 4];
    for k in 0..4 {
        amps[k] = c * a[k] + s * b[k];
    }
    let psi = real_pure(amps);
    let mixed = maximally_mixed(system_memory());
    let m = mixed.matrix().scale(1.0 - lambda) + psi.matrix().scale(lambda);
    Ok(DensityMatrix::from_trusted(CompositeOperator::new(m, system_memory())?))
}

/// Mixing weight λ = 1/(1 + 2 sin 2φ) at which the Werner-like family
/// crosses from separable to entangled. Informational only.
pub fn werner_separability_edge(phi: f64) -> f64 {
    1.0 / (1.0 + 2.0 * (2.0 * phi).sin())
}
