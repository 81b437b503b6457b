use rayon::prelude::*;
use serde::Serialize;

use super::analysis::estimate_beat_frequency;
use super::integrate::{integrate_numeric, Trajectory};
use super::modal::{modal_solve, InitialCondition};
use crate::error::{Error, Result};
use crate::graph::{compose_epsilon, OneWaySplit};
use crate::spectral::{eigenvalues, min_neighbor_gap, principal_sqrt, IMAG_TOL_REL, ZERO_MODE_TOL_REL};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepError {
    pub kind: String,
    pub message: String,
}

impl From<&Error> for SweepError {
    fn from(e: &Error) -> Self {
        Self { kind: e.kind().to_string(), message: e.to_string() }
    }
}

/// Summary of the dynamics at one value of eps.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepRecord {
    pub eps: f64,
    pub spectrum_real: Option<bool>,
    pub max_im_omega: Option<f64>,
    pub eigen_gap: Option<f64>,
    /// `max_i max_k |x_i(k dt)|` over `[0, t_end]`.
    pub peak_amplitude: Option<f64>,
    /// Modal envelope bound on the peak (real spectra only).
    pub amplitude_bound: Option<f64>,
    /// Envelope modulation frequency of `x_0(t)` (real spectra only).
    pub beat_frequency: Option<f64>,
    /// `"modal"` or `"numeric"`.
    pub method: Option<String>,
    pub error: Option<SweepError>,
}

impl SweepRecord {
    fn empty(eps: f64) -> Self {
        Self {
            eps,
            spectrum_real: None,
            max_im_omega: None,
            eigen_gap: None,
            peak_amplitude: None,
            amplitude_bound: None,
            beat_frequency: None,
            method: None,
            error: None,
        }
    }
}

/// Evaluates every eps independently (in parallel); output order follows
/// `eps_list`. Failures are recorded per point.
pub fn epsilon_sweep(
    split: &OneWaySplit,
    eps_list: &[f64],
    ic: &InitialCondition,
    t_end: f64,
    dt: f64,
) -> Vec<SweepRecord> {
    eps_list
        .par_iter()
        .map(|&eps| {
            let mut rec = SweepRecord::empty(eps);
            if let Err(e) = sweep_point(split, eps, ic, t_end, dt, &mut rec) {
                rec.error = Some(SweepError::from(&e));
            }
            rec
        })
        .collect()
}

fn sweep_point(
    split: &OneWaySplit,
    eps: f64,
    ic: &InitialCondition,
    t_end: f64,
    dt: f64,
    rec: &mut SweepRecord,
) -> Result<()> {
    let lap = compose_epsilon(split, eps)?;
    let d_max = lap.max_degree();
    let lambdas = eigenvalues(lap.matrix())?;
    let max_im_lambda = lambdas.iter().fold(0.0f64, |a, l| a.max(l.im.abs()));
    let real = max_im_lambda <= IMAG_TOL_REL * d_max;
    let omegas: Vec<_> = lambdas.iter().map(|&l| principal_sqrt(l, ZERO_MODE_TOL_REL * d_max)).collect();
    rec.spectrum_real = Some(real);
    rec.max_im_omega = Some(omegas.iter().fold(0.0f64, |a, w| a.max(w.im.abs())));
    if real {
        rec.eigen_gap = Some(min_neighbor_gap(&lambdas.iter().map(|l| l.re).collect::<Vec<_>>()));
    }

    let sol = match modal_solve(&lap, ic, None) {
        Ok(sol) => sol,
        Err(Error::DefectiveMatrix { .. }) => {
            rec.method = Some("numeric".into());
            let traj = integrate_numeric(&lap, ic, dt, t_end)?;
            rec.peak_amplitude = Some(traj.peak_amplitude());
            return Ok(());
        }
        Err(e) => return Err(e),
    };
    rec.method = Some("modal".into());
    let traj = Trajectory::from_modal(&sol, dt, t_end)?;
    rec.peak_amplitude = Some(traj.peak_amplitude());
    rec.amplitude_bound = sol.amplitude_bound();
    if real {
        let omega_min = sol.omegas().omegas.iter().filter(|w| w.re > 0.0).map(|w| w.re).fold(f64::INFINITY, f64::min);
        if omega_min.is_finite() {
            let signal: Vec<f64> =
                traj.times.iter().zip(&traj.states).map(|(&t, x)| x[0] - sol.zero_mode_part(t)[0]).collect();
            rec.beat_frequency = estimate_beat_frequency(&signal, dt, omega_min).ok();
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model;

    #[test]
    fn model_regimes_in_order() {
        let ic = InitialCondition::at_rest(model::INITIAL_STATE.to_vec()).unwrap();
        let recs = epsilon_sweep(&model::split(), &[0.0, 1.5, 1.65, 1.66], &ic, 200.0, 0.05);
        let real: Vec<bool> = recs.iter().map(|r| r.spectrum_real.unwrap()).collect();
        assert_eq!(real, vec![true, true, true, false]);
        assert_eq!(recs.iter().map(|r| r.eps).collect::<Vec<_>>(), vec![0.0, 1.5, 1.65, 1.66]);
        let peaks: Vec<f64> = recs.iter().map(|r| r.peak_amplitude.unwrap()).collect();
        assert!(peaks[0] <= peaks[1] && peaks[1] <= peaks[2], "{peaks:?}");
        assert!(peaks[0] <= recs[0].amplitude_bound.unwrap() + 1e-9);
        assert!(recs[3].amplitude_bound.is_none());
        assert!(recs[3].eigen_gap.is_none());
    }

    #[test]
    fn bad_point_does_not_stop_sweep() {
        let ic = InitialCondition::at_rest(model::INITIAL_STATE.to_vec()).unwrap();
        let recs = epsilon_sweep(&model::split(), &[-1.0, 0.0], &ic, 10.0, 0.05);
        assert!(recs[0].error.is_some());
        assert!(recs[1].error.is_none());
    }
}
