use std::io::Write;

use crate::error::{Error, Result, SymmetrizableViolation};
use crate::graph::io::fmt_f64;
use crate::signal::TimeSeries;
use crate::spectral::EigenSystem;

use super::modal::ModalSolution;

/// Tolerance on `|V^H V - I|` for the per-node energy formula.
pub const ORTHONORMAL_TOL: f64 = 1e-8;

#[derive(Debug, Clone, PartialEq)]
pub struct EnergyReport {
    /// `E_i`; empty when the basis is oblique and only the total is defined.
    pub per_node: Vec<f64>,
    pub total: f64,
    pub series: Option<TimeSeries>,
}

pub(crate) fn require_orthonormal(es: &EigenSystem) -> Result<()> {
    let defect = es.orthonormality_defect();
    if defect > ORTHONORMAL_TOL {
        return Err(Error::NotSymmetrizable(SymmetrizableViolation::NonOrthogonalBasis { max_deviation: defect }));
    }
    Ok(())
}

/// `E_i = sum_mu lambda_mu w_mu |v_mu(i)|^2`.
pub(crate) fn weighted_mode_energies(es: &EigenSystem, weights: &[f64]) -> Vec<f64> {
    let v = es.eigenvectors();
    (0..es.dim())
        .map(|i| (0..es.dim()).map(|mu| es.eigenvalues()[mu].re * weights[mu] * v[(i, mu)].norm_sqr()).sum())
        .collect()
}

/// Per-node energies `E_i = sum_mu lambda_mu (|c+|^2 + |c-|^2) |v_mu(i)|^2`.
pub fn node_energies(sol: &ModalSolution) -> Result<EnergyReport> {
    let es = sol.eigensystem();
    require_orthonormal(es)?;
    if sol.omegas().max_imag() > 0.0 {
        return Err(Error::ComplexSpectrum { max_imag: es.max_imag() });
    }
    let weights: Vec<f64> = sol.c_plus().iter().zip(sol.c_minus()).map(|(p, m)| p.norm_sqr() + m.norm_sqr()).collect();
    let per_node = weighted_mode_energies(es, &weights);
    let total = per_node.iter().sum();
    Ok(EnergyReport { per_node, total, series: None })
}

/// Total energy
/// `E(t) = 1/2 sum_{mu,nu} A_mu A_nu |w_mu| |w_nu| Re(v_mu^H v_nu) cos((Re w_mu - Re w_nu) t)`
/// with `A_mu(t) = |c+ e^{i w t}| + |c- e^{-i w t}|`.
///
/// `times` must be evenly spaced. For an orthonormal basis the cross terms
/// vanish and the series is constant.
pub fn total_energy_series(sol: &ModalSolution, times: &[f64]) -> Result<EnergyReport> {
    if times.len() < 2 {
        return Err(Error::TooShort { len: times.len(), min: 2 });
    }
    let dt = times[1] - times[0];
    let span = (times[times.len() - 1] - times[0]).abs().max(f64::MIN_POSITIVE);
    if !(dt > 0.0) || times.windows(2).any(|w| ((w[1] - w[0]) - dt).abs() > 1e-9 * span) {
        return Err(Error::InvalidInput("energy series needs evenly spaced increasing times".into()));
    }
    let n = sol.dim();
    let omegas = &sol.omegas().omegas;
    let v = sol.eigensystem().eigenvectors();
    let gram = v.adjoint() * v;
    let active: Vec<usize> = (0..n).filter(|&mu| !sol.omegas().is_zero_mode(mu)).collect();
    let values: Vec<f64> = times
        .iter()
        .map(|&t| {
            let amp: Vec<f64> = active
                .iter()
                .map(|&mu| {
                    let w = omegas[mu];
                    let growth = (-w.im * t).exp();
                    sol.c_plus()[mu].norm() * growth + sol.c_minus()[mu].norm() / growth
                })
                .collect();
            let mut e = 0.0;
            for (a, &mu) in active.iter().enumerate() {
                for (b, &nu) in active.iter().enumerate() {
                    let phase = (omegas[mu].re - omegas[nu].re) * t;
                    e += amp[a] * amp[b] * omegas[mu].norm() * omegas[nu].norm() * gram[(mu, nu)].re * phase.cos();
                }
            }
            0.5 * e
        })
        .collect();
    let per_node = match node_energies(sol) {
        Ok(r) => r.per_node,
        Err(_) => Vec::new(),
    };
    let total = values[0];
    let series = TimeSeries::new(values, dt, times[0])?;
    Ok(EnergyReport { per_node, total, series: Some(series) })
}

/// CSV with columns `t,E`.
pub fn write_energy_csv<W: Write>(series: &TimeSeries, mut out: W) -> Result<()> {
    writeln!(out, "t,E")?;
    for (k, e) in series.values().iter().enumerate() {
        writeln!(out, "{},{}", fmt_f64(series.time(k)), fmt_f64(*e))?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dynamics::{modal_solve, InitialCondition};
    use crate::graph::{check_symmetrizable, compose_epsilon, LaplacianMatrix, DEFAULT_SYMMETRIZABLE_TOL};
    use crate::model;
    use approx::assert_relative_eq;

    fn model_solution(eps: f64, symmetrized: bool) -> ModalSolution {
        let ic = InitialCondition::at_rest(model::INITIAL_STATE.to_vec()).unwrap();
        let lap = compose_epsilon(&model::split(), eps).unwrap();
        if symmetrized {
            let dec = check_symmetrizable(&lap, DEFAULT_SYMMETRIZABLE_TOL).unwrap();
            modal_solve(&lap, &ic, Some(&dec)).unwrap()
        } else {
            modal_solve(&lap, &ic, None).unwrap()
        }
    }

    #[test]
    fn per_node_sums_to_mode_total() {
        let sol = model_solution(0.0, true);
        let report = node_energies(&sol).unwrap();
        let lambdas = sol.eigensystem().eigenvalues();
        let expected: f64 =
            (0..5).map(|mu| lambdas[mu].re * (sol.c_plus()[mu].norm_sqr() + sol.c_minus()[mu].norm_sqr())).sum();
        assert_relative_eq!(report.total, expected, max_relative = 1e-10);
        assert!(report.per_node.iter().all(|&e| e >= -1e-12));
    }

    #[test]
    fn rest_state_has_no_energy() {
        let lap = model::lap0();
        let dec = check_symmetrizable(&lap, DEFAULT_SYMMETRIZABLE_TOL).unwrap();
        let sol = modal_solve(&lap, &InitialCondition::at_rest(vec![2.0; 5]).unwrap(), Some(&dec)).unwrap();
        assert!(node_energies(&sol).unwrap().per_node.iter().all(|e| e.abs() < 1e-20));
    }

    #[test]
    fn oblique_basis_rejected() {
        let sol = model_solution(1.5, false);
        assert!(matches!(
            node_energies(&sol),
            Err(Error::NotSymmetrizable(SymmetrizableViolation::NonOrthogonalBasis { .. }))
        ));
    }

    #[test]
    fn conserved_for_orthonormal_basis() {
        let sol = model_solution(0.0, true);
        let times: Vec<f64> = (0..=1000).map(|k| k as f64 * 0.1).collect();
        let series = total_energy_series(&sol, &times).unwrap().series.unwrap();
        let (lo, hi) = series.values().iter().fold((f64::MAX, f64::MIN), |(a, b), &e| (a.min(e), b.max(e)));
        assert!((hi - lo) / hi <= 1e-9, "spread {}", (hi - lo) / hi);
    }

    #[test]
    fn oscillates_for_oblique_basis() {
        let sol = model_solution(1.5, false);
        let times: Vec<f64> = (0..=1000).map(|k| k as f64 * 0.1).collect();
        let series = total_energy_series(&sol, &times).unwrap().series.unwrap();
        let (lo, hi) = series.values().iter().fold((f64::MAX, f64::MIN), |(a, b), &e| (a.min(e), b.max(e)));
        assert!((hi - lo) / hi > 1e-3);
    }

    #[test]
    fn uneven_times_rejected() {
        let lap = LaplacianMatrix::from_rows(&[vec![1.0, -1.0], vec![-1.0, 1.0]]).unwrap();
        let sol = modal_solve(&lap, &InitialCondition::at_rest(vec![1.0, 0.0]).unwrap(), None).unwrap();
        assert!(total_energy_series(&sol, &[0.0, 1.0, 3.0]).is_err());
        let r = total_energy_series(&sol, &[0.0, 1.0, 2.0]).unwrap();
        let s = r.series.unwrap();
        assert!(s.values().iter().all(|&e| (e - s.values()[0]).abs() < 1e-12));
    }
}
