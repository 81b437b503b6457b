use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::graph::{scaled_laplacian, LaplacianMatrix, SymmetrizableDecomposition};
use crate::spectral::{eigendecompose, mode_frequencies, EigenFrequencies, EigenSystem, C64};

/// Initial user states and their rates of change.
#[derive(Debug, Clone, PartialEq)]
pub struct InitialCondition {
    pub x0: Vec<f64>,
    pub v0: Vec<f64>,
}

impl InitialCondition {
    pub fn new(x0: Vec<f64>, v0: Vec<f64>) -> Result<Self> {
        if x0.is_empty() {
            return Err(Error::EmptyInput);
        }
        if x0.len() != v0.len() {
            return Err(Error::DimensionMismatch { expected: x0.len(), got: v0.len() });
        }
        if x0.iter().chain(&v0).any(|v| !v.is_finite()) {
            return Err(Error::InvalidInput("initial condition has non-finite entries".into()));
        }
        Ok(Self { x0, v0 })
    }

    /// Zero initial velocity.
    pub fn at_rest(x0: Vec<f64>) -> Result<Self> {
        let v0 = vec![0.0; x0.len()];
        Self::new(x0, v0)
    }

    pub fn dim(&self) -> usize {
        self.x0.len()
    }

    pub(crate) fn check_dim(&self, n: usize) -> Result<()> {
        if self.dim() != n {
            return Err(Error::DimensionMismatch { expected: n, got: self.dim() });
        }
        Ok(())
    }
}

/// Coefficients of a mode with `omega = 0`: `a(t) = offset + drift * t`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ZeroMode {
    pub mode: usize,
    pub offset: f64,
    pub drift: f64,
}

/// Closed-form solution `x(t) = M^{-1/2} sum_mu a_mu(t) v_mu` with
/// `a_mu(t) = c+ e^{i w t} + c- e^{-i w t}`.
#[derive(Debug, Clone)]
pub struct ModalSolution {
    mass: Vec<f64>,
    eig: EigenSystem,
    omegas: EigenFrequencies,
    c_plus: Vec<C64>,
    c_minus: Vec<C64>,
    zero_modes: Vec<ZeroMode>,
}

/// Solves `x'' = -L x` by mode expansion.
///
/// With a decomposition the symmetric matrix `M^{1/2} L M^{-1/2}` is
/// diagonalized and the basis is orthonormal; without one `L` itself is
/// diagonalized (unit masses) and the basis may be oblique.
pub fn modal_solve(
    lap: &LaplacianMatrix,
    ic: &InitialCondition,
    sym: Option<&SymmetrizableDecomposition>,
) -> Result<ModalSolution> {
    let n = lap.dim();
    ic.check_dim(n)?;
    let (mass, mat) = match sym {
        Some(dec) => {
            if dec.mass().len() != n {
                return Err(Error::DimensionMismatch { expected: n, got: dec.mass().len() });
            }
            if !dec.decomposes(lap) {
                return Err(Error::InvalidInput("decomposition does not match the Laplacian".into()));
            }
            (dec.mass().to_vec(), scaled_laplacian(dec))
        }
        None => (vec![1.0; n], lap.matrix().clone()),
    };
    solve_matrix(mass, &mat, ic)
}

fn solve_matrix(mass: Vec<f64>, mat: &DMatrix<f64>, ic: &InitialCondition) -> Result<ModalSolution> {
    let eig = eigendecompose(mat)?;
    let omegas = mode_frequencies(&eig);
    let n = mass.len();
    let y0 = DVector::from_iterator(n, (0..n).map(|i| C64::new(mass[i].sqrt() * ic.x0[i], 0.0)));
    let yd0 = DVector::from_iterator(n, (0..n).map(|i| C64::new(mass[i].sqrt() * ic.v0[i], 0.0)));
    let (a, ad) = if eig.is_symmetric() {
        let vh = eig.eigenvectors().adjoint();
        (&vh * y0, &vh * yd0)
    } else {
        let lu = eig.eigenvectors().clone().lu();
        let a = lu.solve(&y0).ok_or(Error::DefectiveMatrix { condition: f64::INFINITY })?;
        let ad = lu.solve(&yd0).ok_or(Error::DefectiveMatrix { condition: f64::INFINITY })?;
        (a, ad)
    };
    let mut c_plus = vec![C64::new(0.0, 0.0); n];
    let mut c_minus = vec![C64::new(0.0, 0.0); n];
    let mut zero_modes = Vec::new();
    let i = C64::new(0.0, 1.0);
    for mu in 0..n {
        let w = omegas.omegas[mu];
        if omegas.is_zero_mode(mu) {
            zero_modes.push(ZeroMode { mode: mu, offset: a[mu].re, drift: ad[mu].re });
        } else {
            c_plus[mu] = (a[mu] - i * ad[mu] / w) * 0.5;
            c_minus[mu] = (a[mu] + i * ad[mu] / w) * 0.5;
        }
    }
    Ok(ModalSolution { mass, eig, omegas, c_plus, c_minus, zero_modes })
}

impl ModalSolution {
    pub fn mass(&self) -> &[f64] {
        &self.mass
    }

    pub fn eigensystem(&self) -> &EigenSystem {
        &self.eig
    }

    pub fn omegas(&self) -> &EigenFrequencies {
        &self.omegas
    }

    pub fn c_plus(&self) -> &[C64] {
        &self.c_plus
    }

    pub fn c_minus(&self) -> &[C64] {
        &self.c_minus
    }

    pub fn zero_modes(&self) -> &[ZeroMode] {
        &self.zero_modes
    }

    pub fn dim(&self) -> usize {
        self.mass.len()
    }

    /// `a_mu(t)` for every mode.
    pub fn modal_coordinates(&self, t: f64) -> Vec<C64> {
        let i = C64::new(0.0, 1.0);
        let mut a: Vec<C64> = (0..self.dim())
            .map(|mu| {
                let iwt = i * self.omegas.omegas[mu] * t;
                self.c_plus[mu] * iwt.exp() + self.c_minus[mu] * (-iwt).exp()
            })
            .collect();
        for z in &self.zero_modes {
            a[z.mode] = C64::new(z.offset + z.drift * t, 0.0);
        }
        a
    }

    fn modal_velocities(&self, t: f64) -> Vec<C64> {
        let i = C64::new(0.0, 1.0);
        let mut a: Vec<C64> = (0..self.dim())
            .map(|mu| {
                let w = self.omegas.omegas[mu];
                let iwt = i * w * t;
                i * w * (self.c_plus[mu] * iwt.exp() - self.c_minus[mu] * (-iwt).exp())
            })
            .collect();
        for z in &self.zero_modes {
            a[z.mode] = C64::new(z.drift, 0.0);
        }
        a
    }

    fn reconstruct(&self, a: &[C64]) -> Vec<C64> {
        let y = self.eig.eigenvectors() * DVector::from_column_slice(a);
        y.iter().zip(&self.mass).map(|(z, m)| z / m.sqrt()).collect()
    }

    /// `x(t)` with its complex reconstruction residue.
    pub fn evaluate_complex(&self, t: f64) -> Vec<C64> {
        self.reconstruct(&self.modal_coordinates(t))
    }

    pub fn evaluate_state(&self, t: f64) -> Vec<f64> {
        self.evaluate_complex(t).iter().map(|z| z.re).collect()
    }

    pub fn evaluate_velocity(&self, t: f64) -> Vec<f64> {
        self.reconstruct(&self.modal_velocities(t)).iter().map(|z| z.re).collect()
    }

    /// Contribution of the zero modes to `x(t)`.
    pub fn zero_mode_part(&self, t: f64) -> Vec<f64> {
        let mut a = vec![C64::new(0.0, 0.0); self.dim()];
        for z in &self.zero_modes {
            a[z.mode] = C64::new(z.offset + z.drift * t, 0.0);
        }
        self.reconstruct(&a).iter().map(|z| z.re).collect()
    }

    /// Upper bound on `max_i sup_t |x_i(t)|`, available when every frequency
    /// is real and no zero mode drifts.
    pub fn amplitude_bound(&self) -> Option<f64> {
        if self.omegas.max_imag() > 0.0 || self.zero_modes.iter().any(|z| z.drift != 0.0) {
            return None;
        }
        let v = self.eig.eigenvectors();
        let offset = self.zero_mode_part(0.0);
        let bound = (0..self.dim())
            .map(|i| {
                let osc: f64 = (0..self.dim())
                    .filter(|&mu| !self.omegas.is_zero_mode(mu))
                    .map(|mu| (self.c_plus[mu].norm() + self.c_minus[mu].norm()) * v[(i, mu)].norm())
                    .sum();
                offset[i].abs() + osc / self.mass[i].sqrt()
            })
            .fold(0.0, f64::max);
        Some(bound)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{check_symmetrizable, DEFAULT_SYMMETRIZABLE_TOL};
    use crate::model;
    use approx::assert_abs_diff_eq;

    fn max_diff(a: &[f64], b: &[f64]) -> f64 {
        a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
    }

    #[test]
    fn two_node_spring() {
        let lap = LaplacianMatrix::from_rows(&[vec![1.0, -1.0], vec![-1.0, 1.0]]).unwrap();
        let sol = modal_solve(&lap, &InitialCondition::at_rest(vec![1.0, -1.0]).unwrap(), None).unwrap();
        for t in [0.0, 0.3, 1.7, 12.0] {
            let x = sol.evaluate_state(t);
            assert_abs_diff_eq!(x[0], (2f64.sqrt() * t).cos(), epsilon = 1e-12);
            assert_abs_diff_eq!(x[1], -(2f64.sqrt() * t).cos(), epsilon = 1e-12);
        }
    }

    #[test]
    fn equilibrium_stays_put() {
        let lap = model::lap0();
        let dec = check_symmetrizable(&lap, DEFAULT_SYMMETRIZABLE_TOL).unwrap();
        let sol = modal_solve(&lap, &InitialCondition::at_rest(vec![4.0; 5]).unwrap(), Some(&dec)).unwrap();
        assert!(sol.c_plus().iter().chain(sol.c_minus()).all(|c| c.norm() < 1e-12));
        assert_eq!(sol.zero_modes().len(), 1);
        assert!(max_diff(&sol.evaluate_state(37.0), &[4.0; 5]) < 1e-12);
    }

    #[test]
    fn reconstructs_initial_condition() {
        let ic = InitialCondition::new(model::INITIAL_STATE.to_vec(), vec![0.5, -1.0, 0.0, 2.0, 0.1]).unwrap();
        let lap = model::lap0();
        let dec = check_symmetrizable(&lap, DEFAULT_SYMMETRIZABLE_TOL).unwrap();
        for sol in [
            modal_solve(&lap, &ic, Some(&dec)).unwrap(),
            modal_solve(&lap, &ic, None).unwrap(),
            modal_solve(&model::composite(), &ic, None).unwrap(),
        ] {
            assert!(max_diff(&sol.evaluate_state(0.0), &ic.x0) < 1e-8);
            assert!(max_diff(&sol.evaluate_velocity(0.0), &ic.v0) < 1e-8);
        }
    }

    #[test]
    fn symmetrized_and_direct_paths_agree() {
        let ic = InitialCondition::at_rest(model::INITIAL_STATE.to_vec()).unwrap();
        let lap = model::lap0();
        let dec = check_symmetrizable(&lap, DEFAULT_SYMMETRIZABLE_TOL).unwrap();
        let a = modal_solve(&lap, &ic, Some(&dec)).unwrap();
        let b = modal_solve(&lap, &ic, None).unwrap();
        for t in [1.0, 10.0, 100.0] {
            assert!(max_diff(&a.evaluate_state(t), &b.evaluate_state(t)) < 1e-9);
        }
    }

    #[test]
    fn bounded_at_zero_eps() {
        let ic = InitialCondition::at_rest(model::INITIAL_STATE.to_vec()).unwrap();
        let sol = modal_solve(&model::lap0(), &ic, None).unwrap();
        let bound = sol.amplitude_bound().unwrap();
        for k in 0..=2000 {
            let x = sol.evaluate_state(k as f64 * 0.1);
            assert!(x[0].abs() <= bound + 1e-9);
        }
    }

    #[test]
    fn mismatched_decomposition_rejected() {
        let dec = check_symmetrizable(&model::lap0(), DEFAULT_SYMMETRIZABLE_TOL).unwrap();
        let ic = InitialCondition::at_rest(model::INITIAL_STATE.to_vec()).unwrap();
        assert!(modal_solve(&model::composite(), &ic, Some(&dec)).is_err());
        assert!(matches!(InitialCondition::new(vec![1.0], vec![]), Err(Error::DimensionMismatch { .. })));
    }
}
