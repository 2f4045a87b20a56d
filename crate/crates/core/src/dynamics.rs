//! Exact unitary evolution of the composite and its marginals.
//!
//! H_tot is diagonalised once. Marginals are kept as a spectral series
//! ρ_x(t) = Σ_ij c_ij e^{−iω_ij t} K_ij with K_ij = tr_{¬x}|v_i⟩⟨v_j|, so a
//! reduced state or its exact time derivative costs one pass over the
//! series.

use std::collections::BTreeMap;
use std::io::Write;

use crate::hamiltonian::{build, BuiltHamiltonians, Scenario};
use crate::output::format_float;
use crate::states::DensityMatrix;
use crate::tensor::{
    hermitian_eig, partial_trace, tensor_product_all, CompositeOperator, SubsystemLayout, BATH, MEMORY,
    SYSTEM, WORK,
};
use crate::{CMatrix, Error, Result, C64};

#[derive(Debug, Clone)]
struct SpectralSeries {
    layout: SubsystemLayout,
    omegas: Vec<f64>,
    coefficients: Vec<CMatrix>,
}

impl SpectralSeries {
    fn eval(&self, t: f64, derivative: bool) -> CMatrix {
        let d = self.layout.total_dim();
        let mut acc = CMatrix::zeros(d, d);
        for (w, c) in self.omegas.iter().zip(&self.coefficients) {
            let mut phase = C64::from_polar(1.0, -w * t);
            if derivative {
                phase *= C64::new(0.0, -w);
            }
            acc.zip_apply(c, |a, b| *a += b * phase);
        }
        (&acc + acc.adjoint()).scale(0.5)
    }
}

/// Evolution of one scenario from a given initial total state.
#[derive(Debug, Clone)]
pub struct Evolution {
    scenario: Scenario,
    built: BuiltHamiltonians,
    energies: Vec<f64>,
    vectors: CMatrix,
    /// Initial state in the energy eigenbasis.
    rotated: CMatrix,
    initial: DensityMatrix,
    series: BTreeMap<String, SpectralSeries>,
}

impl Evolution {
    /// Evolution of ρ_w̄ ⊗ ρ_w.
    pub fn new(scenario: &Scenario) -> Result<Self> {
        Self::with_initial(scenario, scenario.initial_total())
    }

    /// Evolution of an arbitrary initial state on the scenario layout.
    pub fn with_initial(scenario: &Scenario, initial: DensityMatrix) -> Result<Self> {
        if initial.layout() != scenario.layout() {
            return Err(Error::Shape(format!(
                "initial state on {} but scenario layout is {}",
                initial.layout(),
                scenario.layout()
            )));
        }
        let built = build(scenario)?;
        let eig = hermitian_eig(&built.h_total)?;
        let vectors = eig.vectors;
        let energies: Vec<f64> = eig.values.iter().cloned().collect();
        let rotated = vectors.adjoint() * initial.matrix() * &vectors;
        let mut evo = Self {
            scenario: scenario.clone(),
            built,
            energies,
            vectors,
            rotated,
            initial,
            series: BTreeMap::new(),
        };
        for label in [BATH, SYSTEM, MEMORY, WORK] {
            let s = evo.make_series(label)?;
            evo.series.insert(label.to_string(), s);
        }
        Ok(evo)
    }

    fn make_series(&self, label: &str) -> Result<SpectralSeries> {
        let layout = self.scenario.layout();
        let pos = layout
            .position(label)
            .ok_or_else(|| Error::Layout(format!("unknown label '{label}'")))?;
        let dx = layout.entries()[pos].dim;
        let dim = layout.total_dim();
        // strides of the kept factor in the composite index
        let inner: usize = layout.entries()[pos + 1..].iter().map(|e| e.dim).product();
        let outer = dim / (dx * inner);
        let index = |a: usize, rest: usize| {
            let (hi, lo) = (rest / inner, rest % inner);
            (hi * dx + a) * inner + lo
        };
        let n = self.energies.len();
        let mut omegas = Vec::new();
        let mut coefficients = Vec::new();
        let v = &self.vectors;
        for i in 0..n {
            for j in 0..n {
                let c = self.rotated[(i, j)];
                if c == C64::new(0.0, 0.0) {
                    continue;
                }
                let mut k = CMatrix::zeros(dx, dx);
                for a in 0..dx {
                    for b in 0..dx {
                        let mut s = C64::new(0.0, 0.0);
                        for r in 0..outer * inner {
                            s += v[(index(a, r), i)] * v[(index(b, r), j)].conj();
                        }
                        k[(a, b)] = s * c;
                    }
                }
                omegas.push(self.energies[i] - self.energies[j]);
                coefficients.push(k);
            }
        }
        Ok(SpectralSeries {
            layout: layout.sub_layout(&[pos]),
            omegas,
            coefficients,
        })
    }

    fn series(&self, label: &str) -> Result<&SpectralSeries> {
        self.series
            .get(label)
            .ok_or_else(|| Error::Layout(format!("unknown label '{label}'")))
    }

    pub fn scenario(&self) -> &Scenario {
        &self.scenario
    }

    pub fn built(&self) -> &BuiltHamiltonians {
        &self.built
    }

    pub fn initial_state(&self) -> &DensityMatrix {
        &self.initial
    }

    /// Eigenvalues of H_tot, ascending.
    pub fn energies(&self) -> &[f64] {
        &self.energies
    }

    fn rotated_at(&self, t: f64, derivative: bool) -> CMatrix {
        let n = self.energies.len();
        let phases: Vec<C64> = self.energies.iter().map(|&e| C64::from_polar(1.0, -e * t)).collect();
        CMatrix::from_fn(n, n, |i, j| {
            let mut z = self.rotated[(i, j)] * phases[i] * phases[j].conj();
            if derivative {
                z *= C64::new(0.0, -(self.energies[i] - self.energies[j]));
            }
            z
        })
    }

    fn back_rotate(&self, m: CMatrix) -> CompositeOperator {
        let full = &self.vectors * m * self.vectors.adjoint();
        let full = (&full + full.adjoint()).scale(0.5);
        CompositeOperator::new(full, self.scenario.layout().clone()).expect("scenario dimension")
    }

    /// ρ_tot(t) = U(t) ρ_tot(0) U(t)†.
    pub fn total_state(&self, t: f64) -> DensityMatrix {
        DensityMatrix::from_trusted(self.back_rotate(self.rotated_at(t, false)))
    }

    /// ∂_t ρ_tot = −i[H_tot, ρ_tot(t)], evaluated in the energy basis.
    pub fn total_derivative(&self, t: f64) -> CompositeOperator {
        self.back_rotate(self.rotated_at(t, true))
    }

    /// Marginal of ρ_tot(t) on one subsystem.
    pub fn reduced_state(&self, t: f64, label: &str) -> Result<DensityMatrix> {
        let s = self.series(label)?;
        Ok(DensityMatrix::from_trusted(CompositeOperator::new(s.eval(t, false), s.layout.clone())?))
    }

    /// Exact derivative of one marginal.
    pub fn reduced_derivative(&self, t: f64, label: &str) -> Result<CompositeOperator> {
        let s = self.series(label)?;
        CompositeOperator::new(s.eval(t, true), s.layout.clone())
    }

    /// Marginal of ρ_tot(t) on several subsystems.
    pub fn marginal<S: AsRef<str>>(&self, t: f64, keep: &[S]) -> Result<DensityMatrix> {
        Ok(DensityMatrix::from_trusted(partial_trace(self.total_state(t).op(), keep)?))
    }

    /// σ_tot(t) = ρ_b^eq ⊗ E_s(ρ_s) ⊗ E_m(ρ_m) ⊗ E_w(ρ_w): the frozen Gibbs
    /// bath times the evolved system, memory and work marginals.
    pub fn weak_coupling_reference(&self, t: f64) -> Result<DensityMatrix> {
        let parts = [
            self.scenario.bath_gibbs().clone(),
            self.reduced_state(t, SYSTEM)?,
            self.reduced_state(t, MEMORY)?,
            self.reduced_state(t, WORK)?,
        ];
        Ok(DensityMatrix::from_trusted(tensor_product_all(parts.iter().map(|p| p.op()))?))
    }

    /// Samples the evolution on a caller-supplied time grid.
    pub fn trajectory<S: AsRef<str>>(&self, times: &[f64], labels: &[S]) -> Result<Trajectory> {
        if times.windows(2).any(|w| !(w[0] <= w[1])) {
            return Err(Error::Parameter("trajectory times must be ascending".into()));
        }
        let mut reduced: BTreeMap<String, Vec<DensityMatrix>> = BTreeMap::new();
        let mut order = Vec::new();
        for l in labels {
            let l = l.as_ref();
            self.series(l)?;
            order.push(l.to_string());
            reduced.insert(l.to_string(), times.iter().map(|&t| self.reduced_state(t, l)).collect::<Result<_>>()?);
        }
        Ok(Trajectory {
            times: times.to_vec(),
            total_states: times.iter().map(|&t| self.total_state(t)).collect(),
            labels: order,
            reduced,
        })
    }
}

/// States sampled on a time grid.
#[derive(Debug, Clone)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub total_states: Vec<DensityMatrix>,
    /// Requested labels, in request order.
    pub labels: Vec<String>,
    pub reduced: BTreeMap<String, Vec<DensityMatrix>>,
}

impl Trajectory {
    /// CSV: `time`, then `<label>_re_<i>_<j>` and `<label>_im_<i>_<j>` for
    /// each requested marginal, row-major.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        let mut header = vec!["time".to_string()];
        for l in &self.labels {
            let d = self.reduced[l].first().map(|r| r.dim()).unwrap_or(0);
            for i in 0..d {
                for j in 0..d {
                    header.push(format!("{l}_re_{i}_{j}"));
                    header.push(format!("{l}_im_{i}_{j}"));
                }
            }
        }
        w.write_record(&header).map_err(csv_err)?;
        for (k, &t) in self.times.iter().enumerate() {
            let mut row = vec![format_float(t)];
            for l in &self.labels {
                let m = self.reduced[l][k].matrix();
                for i in 0..m.nrows() {
                    for j in 0..m.ncols() {
                        row.push(format_float(m[(i, j)].re));
                        row.push(format_float(m[(i, j)].im));
                    }
                }
            }
            w.write_record(&row).map_err(csv_err)?;
        }
        w.flush()?;
        Ok(())
    }
}

pub(crate) fn csv_err(e: csv::Error) -> Error {
    Error::Io(std::io::Error::other(e))
}

/// ρ_tot(t) of a scenario.
pub fn total_state(scenario: &Scenario, t: f64) -> Result<DensityMatrix> {
    Ok(Evolution::new(scenario)?.total_state(t))
}

pub fn reduced_state(scenario: &Scenario, t: f64, label: &str) -> Result<DensityMatrix> {
    Evolution::new(scenario)?.reduced_state(t, label)
}

/// What [`state_derivative`] differentiates.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum DerivativeTarget {
    Total,
    Label(String),
}

pub fn state_derivative(scenario: &Scenario, t: f64, target: &DerivativeTarget) -> Result<CompositeOperator> {
    let evo = Evolution::new(scenario)?;
    match target {
        DerivativeTarget::Total => Ok(evo.total_derivative(t)),
        DerivativeTarget::Label(l) => evo.reduced_derivative(t, l),
    }
}

pub fn weak_coupling_reference(scenario: &Scenario, t: f64) -> Result<DensityMatrix> {
    Evolution::new(scenario)?.weak_coupling_reference(t)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hamiltonian::{builtin_scenario, builtin_spec, Builtin, BuiltinOptions, HamiltonianSection};
    use crate::tensor::schatten_norm;

    fn cmaybe(theta: f64) -> Scenario {
        builtin_scenario(Builtin::Cmaybe { theta }, BuiltinOptions::default()).unwrap()
    }

    fn close(a: &CMatrix, b: &CMatrix, tol: f64) -> bool {
        (a - b).iter().all(|z| z.norm() <= tol)
    }

    #[test]
    fn initial_time_reproduces_initial_state() {
        let s = cmaybe(0.8);
        let e = Evolution::new(&s).unwrap();
        assert!(close(e.total_state(0.0).matrix(), s.initial_total().matrix(), 1e-14));
        let rm = e.reduced_state(0.0, MEMORY).unwrap();
        let direct = s.initial_wbar().reduce(&[MEMORY]).unwrap();
        assert!(close(rm.matrix(), direct.matrix(), 1e-14));
        let sigma0 = e.weak_coupling_reference(0.0).unwrap();
        let expect = tensor_product_all([
            s.bath_gibbs().op(),
            s.initial_wbar().reduce(&[SYSTEM]).unwrap().op(),
            direct.op(),
            s.initial_work().op(),
        ])
        .unwrap();
        assert!(close(sigma0.matrix(), expect.matrix(), 1e-14));
    }

    #[test]
    fn diagonal_hamiltonian_keeps_populations_and_work() {
        let s = cmaybe(1.0);
        let e = Evolution::new(&s).unwrap();
        let p0: Vec<f64> = (0..16).map(|i| e.total_state(0.0).matrix()[(i, i)].re).collect();
        for t in [0.3, 1.7, 4.4] {
            let r = e.total_state(t);
            for (i, p) in p0.iter().enumerate() {
                assert!((r.matrix()[(i, i)].re - p).abs() < 1e-13);
            }
            assert!((r.purity() - e.total_state(0.0).purity()).abs() < 1e-13);
            let w = e.reduced_state(t, WORK).unwrap();
            assert!((w.matrix()[(1, 1)].re - 1.0).abs() < 1e-14);
        }
    }

    #[test]
    fn system_marginal_matches_closed_form() {
        let (theta, t) = (0.9f64, 0.65f64);
        let e = Evolution::new(&cmaybe(theta)).unwrap();
        let r = e.reduced_state(t, SYSTEM).unwrap();
        let off = (2.0 * theta).sin() * (2.0 * t).sin() / 4.0;
        assert!((r.matrix()[(0, 0)].re - (theta / 2.0).cos().powi(2)).abs() < 1e-13);
        assert!((r.matrix()[(0, 1)].im.abs() - off.abs()).abs() < 1e-13);
        assert!(r.matrix()[(0, 1)].re.abs() < 1e-13);
        let d = e.reduced_derivative(t, SYSTEM).unwrap();
        let expect = 2.0 * (theta.sin() * theta.cos() * (2.0 * t).cos()).abs();
        assert!((schatten_norm(&d, 1.0).unwrap() - expect).abs() < 1e-13);
    }

    #[test]
    fn derivative_matches_finite_difference() {
        let s = builtin_scenario(Builtin::WernerXx { lambda: 0.7, phi: 0.4 }, BuiltinOptions { system_bath_coupling: true }).unwrap();
        let e = Evolution::new(&s).unwrap();
        let h = 1e-6;
        for t in [0.2, 1.1, 3.7] {
            for l in [BATH, SYSTEM, MEMORY, WORK] {
                let fd = (e.reduced_state(t + h, l).unwrap().matrix() - e.reduced_state(t - h, l).unwrap().matrix()) / C64::new(2.0 * h, 0.0);
                assert!(close(&fd, e.reduced_derivative(t, l).unwrap().matrix(), 1e-8));
            }
            let fd = (e.total_state(t + h).matrix() - e.total_state(t - h).matrix()) / C64::new(2.0 * h, 0.0);
            let exact = e.total_derivative(t);
            assert!(close(&fd, exact.matrix(), 1e-8));
            assert!(exact.trace().norm() < 1e-12);
            // against the commutator form
            let comm = crate::tensor::commutator(&e.built().h_total, e.total_state(t).op()).unwrap();
            assert!(close(exact.matrix(), &(comm.matrix() * C64::new(0.0, -1.0)), 1e-12));
        }
    }

    #[test]
    fn series_marginals_agree_with_partial_trace() {
        let s = builtin_scenario(Builtin::WernerZx { lambda: 0.4, phi: 1.3 }, BuiltinOptions { system_bath_coupling: true }).unwrap();
        let e = Evolution::new(&s).unwrap();
        for l in [BATH, SYSTEM, MEMORY, WORK] {
            let a = e.reduced_state(2.3, l).unwrap();
            let b = e.marginal(2.3, &[l]).unwrap();
            assert!(close(a.matrix(), b.matrix(), 1e-13));
        }
    }

    #[test]
    fn zero_hamiltonian_is_frozen() {
        let mut spec = builtin_spec(Builtin::Cmaybe { theta: 0.5 }, BuiltinOptions::default());
        spec.hamiltonian = HamiltonianSection::default();
        let s = Scenario::from_spec(spec).unwrap();
        let d = state_derivative(&s, 1.3, &DerivativeTarget::Total).unwrap();
        assert_eq!(d.max_abs_entry(), 0.0);
        assert!(reduced_state(&s, 1.0, "nope").is_err());
    }

    #[test]
    fn trajectory_csv_layout() {
        let e = Evolution::new(&cmaybe(0.3)).unwrap();
        let tr = e.trajectory(&[0.0, 0.5], &[SYSTEM]).unwrap();
        let mut buf = Vec::new();
        tr.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines.len(), 3);
        assert!(lines[0].starts_with("time,system_re_0_0,system_im_0_0"));
        assert_eq!(lines[1].split(',').count(), 9);
        assert!(e.trajectory(&[1.0, 0.5], &[SYSTEM]).is_err());
    }
}
