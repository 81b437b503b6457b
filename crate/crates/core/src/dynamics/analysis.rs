//! Envelope measurements on trajectories: exponential growth rates and beat
//! frequencies.

use serde::Serialize;

use super::integrate::Trajectory;
use super::modal::ModalSolution;
use crate::error::{Error, Result};
use crate::graph::{left_null_vector, LaplacianMatrix};
use crate::signal::fft_magnitudes;

/// `max_i |x_i(t) - xbar_i(t)|` where `xbar` is the zero-mode part.
pub fn modal_amplitudes(sol: &ModalSolution, times: &[f64]) -> Vec<f64> {
    times
        .iter()
        .map(|&t| {
            let x = sol.evaluate_state(t);
            let bar = sol.zero_mode_part(t);
            x.iter().zip(&bar).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max)
        })
        .collect()
}

/// Same measure for a numerical trajectory. The conserved consensus part is
/// `1 (l . x) / (l . 1)` with `l` the left null vector of `lap`.
pub fn trajectory_amplitudes(traj: &Trajectory, lap: &LaplacianMatrix) -> Result<Vec<f64>> {
    let l = left_null_vector(lap)?;
    let norm: f64 = l.iter().sum();
    Ok(traj
        .states
        .iter()
        .map(|x| {
            let bar = l.iter().zip(x).map(|(a, b)| a * b).sum::<f64>() / norm;
            x.iter().map(|xi| (xi - bar).abs()).fold(0.0, f64::max)
        })
        .collect())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GrowthFit {
    /// Fitted `b` in `A(t) ~ exp(b t)`.
    pub rate: f64,
    pub intercept: f64,
    /// Number of window maxima used.
    pub points: usize,
    pub t_start: f64,
    pub t_end: f64,
}

/// Least-squares fit of `ln A` against `t` through the maxima of
/// consecutive windows of length `window` inside `[t_start, t_end]`.
pub fn fit_growth_rate(times: &[f64], amplitudes: &[f64], window: f64, t_start: f64, t_end: f64) -> Result<GrowthFit> {
    if times.len() != amplitudes.len() {
        return Err(Error::DimensionMismatch { expected: times.len(), got: amplitudes.len() });
    }
    if !(window > 0.0 && t_end > t_start) {
        return Err(Error::InvalidInput(format!("bad fit window {window} over [{t_start}, {t_end}]")));
    }
    let buckets = ((t_end - t_start) / window).floor() as usize;
    let mut best: Vec<Option<(f64, f64)>> = vec![None; buckets];
    for (&t, &a) in times.iter().zip(amplitudes) {
        if t < t_start || t > t_end {
            continue;
        }
        let b = ((t - t_start) / window).floor() as usize;
        if b >= buckets || !(a > 0.0) {
            continue;
        }
        if best[b].is_none_or(|(_, m)| a > m) {
            best[b] = Some((t, a));
        }
    }
    let pts: Vec<(f64, f64)> = best.into_iter().flatten().map(|(t, a)| (t, a.ln())).collect();
    if pts.len() < 2 {
        return Err(Error::TooShort { len: pts.len(), min: 2 });
    }
    let k = pts.len() as f64;
    let mt = pts.iter().map(|p| p.0).sum::<f64>() / k;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / k;
    let sxy: f64 = pts.iter().map(|p| (p.0 - mt) * (p.1 - my)).sum();
    let sxx: f64 = pts.iter().map(|p| (p.0 - mt).powi(2)).sum();
    let rate = sxy / sxx;
    Ok(GrowthFit { rate, intercept: my - rate * mt, points: pts.len(), t_start, t_end })
}

/// Modulation frequency of a beating signal.
///
/// The envelope is taken as the maximum of `|signal|` over windows of one
/// period of the slowest carrier (`2 pi / omega_min`); the dominant angular
/// frequency `Omega` of the envelope is located by a zero-padded FFT and
/// `Omega / 2` is returned.
pub fn estimate_beat_frequency(signal: &[f64], dt: f64, omega_min: f64) -> Result<f64> {
    if !(dt > 0.0 && omega_min > 0.0) {
        return Err(Error::InvalidInput(format!("need positive dt and carrier, got {dt}, {omega_min}")));
    }
    let w = ((2.0 * std::f64::consts::PI / omega_min / dt).round() as usize).max(1);
    let env: Vec<f64> = signal.chunks_exact(w).map(|c| c.iter().fold(0.0f64, |a, x| a.max(x.abs()))).collect();
    if env.len() < 8 {
        return Err(Error::TooShort { len: env.len(), min: 8 });
    }
    let mean = env.iter().sum::<f64>() / env.len() as f64;
    let centered: Vec<f64> = env.iter().map(|e| e - mean).collect();
    let padded = env.len().next_power_of_two() * 16;
    let mags = fft_magnitudes(&centered, padded);
    let (k, _) =
        mags.iter().enumerate().skip(1).fold((0, f64::MIN), |best, (k, &m)| if m > best.1 { (k, m) } else { best });
    let step = w as f64 * dt;
    let omega = 2.0 * std::f64::consts::PI * k as f64 / (padded as f64 * step);
    Ok(0.5 * omega)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn exact_exponential() {
        let times: Vec<f64> = (0..2000).map(|k| k as f64 * 0.1).collect();
        let amps: Vec<f64> =
            times.iter().map(|t| 3.0 * (0.02 * t).exp() * (1.0 + 0.5 * (2.0 * t).cos().abs())).collect();
        let fit = fit_growth_rate(&times, &amps, 10.0, 20.0, 180.0).unwrap();
        assert_relative_eq!(fit.rate, 0.02, max_relative = 1e-3);
        assert_eq!(fit.points, 16);
    }

    #[test]
    fn two_tone_beat() {
        let dt = 0.05;
        let (w1, w2) = (2.0, 2.2);
        let sig: Vec<f64> = (0..40000)
            .map(|k| {
                let t = k as f64 * dt;
                (w1 * t).cos() + (w2 * t).cos()
            })
            .collect();
        let beat = estimate_beat_frequency(&sig, dt, w1).unwrap();
        assert_relative_eq!(beat, 0.1, max_relative = 0.05);
    }

    #[test]
    fn short_signal_rejected() {
        assert!(matches!(estimate_beat_frequency(&[1.0; 10], 0.1, 1.0), Err(Error::TooShort { .. })));
    }
}
