use std::io::Write;

use nalgebra::DVector;

use super::modal::{InitialCondition, ModalSolution};
use crate::error::{Error, Result};
use crate::graph::{io::fmt_f64, LaplacianMatrix};

/// States beyond this magnitude are reported as divergence.
pub const DIVERGENCE_THRESHOLD: f64 = 1e12;

/// Sampled states and velocities at `t_k = k dt`.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub states: Vec<Vec<f64>>,
    pub velocities: Vec<Vec<f64>>,
}

impl Trajectory {
    /// Samples a modal solution on the same grid as [`integrate_numeric`].
    pub fn from_modal(sol: &ModalSolution, dt: f64, t_end: f64) -> Result<Self> {
        let steps = step_count(dt, t_end)?;
        let times: Vec<f64> = (0..=steps).map(|k| k as f64 * dt).collect();
        let states = times.iter().map(|&t| sol.evaluate_state(t)).collect();
        let velocities = times.iter().map(|&t| sol.evaluate_velocity(t)).collect();
        Ok(Self { times, states, velocities })
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    /// Time series of one node.
    pub fn node(&self, i: usize) -> Vec<f64> {
        self.states.iter().map(|x| x[i]).collect()
    }

    /// Largest `|x_i(t) - y_i(t)|` over shared samples.
    pub fn max_deviation(&self, other: &Trajectory) -> f64 {
        self.states
            .iter()
            .zip(&other.states)
            .flat_map(|(a, b)| a.iter().zip(b).map(|(x, y)| (x - y).abs()))
            .fold(0.0, f64::max)
    }

    /// Largest `|x_i(t)|` over all samples.
    pub fn peak_amplitude(&self) -> f64 {
        self.states.iter().flatten().fold(0.0, |a, x| a.max(x.abs()))
    }
}

fn step_count(dt: f64, t_end: f64) -> Result<usize> {
    if !(dt.is_finite() && dt > 0.0) {
        return Err(Error::InvalidInput(format!("time step must be positive, got {dt}")));
    }
    if !(t_end.is_finite() && t_end >= 0.0) {
        return Err(Error::InvalidInput(format!("end time must be non-negative, got {t_end}")));
    }
    Ok((t_end / dt).round() as usize)
}

/// Largest admissible step, `0.2 / sqrt(2 d_max)`.
pub fn stability_bound(lap: &LaplacianMatrix) -> f64 {
    let d = lap.max_degree();
    if d > 0.0 {
        0.2 / (2.0 * d).sqrt()
    } else {
        f64::INFINITY
    }
}

/// Velocity Verlet for `x'' = -L x`.
pub fn integrate_numeric(lap: &LaplacianMatrix, ic: &InitialCondition, dt: f64, t_end: f64) -> Result<Trajectory> {
    ic.check_dim(lap.dim())?;
    let steps = step_count(dt, t_end)?;
    let bound = stability_bound(lap);
    if dt > bound {
        return Err(Error::StepTooLarge { dt, bound });
    }
    let l = lap.matrix();
    let mut x = DVector::from_column_slice(&ic.x0);
    let mut v = DVector::from_column_slice(&ic.v0);
    let mut acc = -(l * &x);
    let mut times = Vec::with_capacity(steps + 1);
    let mut states = Vec::with_capacity(steps + 1);
    let mut velocities = Vec::with_capacity(steps + 1);
    times.push(0.0);
    states.push(x.as_slice().to_vec());
    velocities.push(v.as_slice().to_vec());
    for k in 1..=steps {
        v.axpy(0.5 * dt, &acc, 1.0);
        x.axpy(dt, &v, 1.0);
        acc = -(l * &x);
        v.axpy(0.5 * dt, &acc, 1.0);
        let t = k as f64 * dt;
        if x.iter().any(|xi| !(xi.abs() <= DIVERGENCE_THRESHOLD)) {
            return Err(Error::Unstable { time: t, threshold: DIVERGENCE_THRESHOLD });
        }
        times.push(t);
        states.push(x.as_slice().to_vec());
        velocities.push(v.as_slice().to_vec());
    }
    Ok(Trajectory { times, states, velocities })
}

/// CSV with columns `t,x_0,...,x_{n-1}`.
pub fn write_trajectory_csv<W: Write>(traj: &Trajectory, mut out: W) -> Result<()> {
    let n = traj.states.first().map_or(0, Vec::len);
    let header: Vec<String> = std::iter::once("t".to_string()).chain((0..n).map(|i| format!("x_{i}"))).collect();
    writeln!(out, "{}", header.join(","))?;
    for (t, x) in traj.times.iter().zip(&traj.states) {
        let row: Vec<String> = std::iter::once(fmt_f64(*t)).chain(x.iter().map(|&v| fmt_f64(v))).collect();
        writeln!(out, "{}", row.join(","))?;
    }
    Ok(())
}
