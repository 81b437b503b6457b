//! Dense eigendecomposition of real, generally nonsymmetric matrices.
//!
//! Symmetric input goes through the symmetric QR algorithm and comes back with
//! an orthonormal basis. Anything else is reduced to complex Schur form
//! `A = Q T Q*` and the eigenvectors of the triangular factor are recovered by
//! back-substitution, then mapped back through `Q`.
//!
//! For real input the complex eigenvalues are made exactly conjugate in pairs
//! and eigenvalues whose imaginary part is pure rounding noise are snapped onto
//! the real axis with real eigenvectors.

use std::io::Write;

use nalgebra::{Complex, DMatrix, DVector, Schur, SymmetricEigen};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::graph::{compose_epsilon, io::fmt_f64, LaplacianMatrix, OneWaySplit};

pub type C64 = Complex<f64>;

/// Basis condition numbers above this make the modal expansion unusable.
pub const DEFECTIVE_CONDITION: f64 = 1e12;

/// Relative (to `d_max`) threshold separating real from non-real eigenvalues.
pub const IMAG_TOL_REL: f64 = 1e-8;

/// Relative (to `d_max`) threshold below which an eigenvalue counts as zero.
pub const ZERO_MODE_TOL_REL: f64 = 1e-9;

const SCHUR_MAX_ITER: usize = 10_000;

/// Eigenvalues sorted by `(re, im)`, unit eigenvectors in matching columns
/// and the condition number of the eigenvector matrix.
#[derive(Debug, Clone)]
pub struct EigenSystem {
    eigenvalues: Vec<C64>,
    eigenvectors: DMatrix<C64>,
    basis_condition: f64,
    d_max: f64,
    symmetric: bool,
}

impl EigenSystem {
    pub fn eigenvalues(&self) -> &[C64] {
        &self.eigenvalues
    }

    pub fn eigenvectors(&self) -> &DMatrix<C64> {
        &self.eigenvectors
    }

    pub fn eigenvector(&self, mu: usize) -> DVector<C64> {
        self.eigenvectors.column(mu).into_owned()
    }

    pub fn basis_condition(&self) -> f64 {
        self.basis_condition
    }

    /// Largest diagonal magnitude of the decomposed matrix.
    pub fn d_max(&self) -> f64 {
        self.d_max
    }

    /// True when the input was symmetric and the basis is orthonormal.
    pub fn is_symmetric(&self) -> bool {
        self.symmetric
    }

    pub fn dim(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn max_imag(&self) -> f64 {
        self.eigenvalues.iter().fold(0.0, |a, l| a.max(l.im.abs()))
    }

    /// Real parts, for spectra already known to be real.
    pub fn real_eigenvalues(&self) -> Vec<f64> {
        self.eigenvalues.iter().map(|l| l.re).collect()
    }

    /// Largest `|<v_mu, v_nu> - delta_mu_nu|` over the basis.
    pub fn orthonormality_defect(&self) -> f64 {
        let gram = self.eigenvectors.adjoint() * &self.eigenvectors;
        let n = self.dim();
        let mut worst = 0.0f64;
        for i in 0..n {
            for j in 0..n {
                let target = if i == j { 1.0 } else { 0.0 };
                worst = worst.max((gram[(i, j)] - C64::new(target, 0.0)).norm());
            }
        }
        worst
    }
}

/// `omega_mu = sqrt(lambda_mu)` on the principal branch (`Re omega >= 0`).
#[derive(Debug, Clone, PartialEq)]
pub struct EigenFrequencies {
    pub omegas: Vec<C64>,
}

impl EigenFrequencies {
    pub fn is_zero_mode(&self, mu: usize) -> bool {
        self.omegas[mu] == C64::new(0.0, 0.0)
    }

    /// Largest `|Im omega|`, the exponential growth rate of the fastest mode.
    pub fn max_imag(&self) -> f64 {
        self.omegas.iter().fold(0.0, |a, w| a.max(w.im.abs()))
    }

    /// Smallest `|omega_mu - omega_nu|` over distinct nonzero modes.
    pub fn min_pair_difference(&self) -> Option<f64> {
        let nonzero: Vec<C64> = self.omegas.iter().copied().filter(|w| w.norm() > 0.0).collect();
        let mut best: Option<f64> = None;
        for i in 0..nonzero.len() {
            for j in (i + 1)..nonzero.len() {
                let d = (nonzero[i] - nonzero[j]).norm();
                best = Some(best.map_or(d, |b: f64| b.min(d)));
            }
        }
        best
    }
}

fn is_numerically_symmetric(a: &DMatrix<f64>) -> bool {
    let scale = a.amax();
    if scale == 0.0 {
        return true;
    }
    let n = a.nrows();
    (0..n).all(|i| ((i + 1)..n).all(|j| (a[(i, j)] - a[(j, i)]).abs() <= 4.0 * f64::EPSILON * scale))
}

/// Rotates `v` so that its largest-magnitude component (first one on ties)
/// is real and positive.
fn fix_phase(v: &mut DVector<C64>) {
    let max = v.iter().fold(0.0f64, |a, z| a.max(z.norm()));
    if max == 0.0 {
        return;
    }
    let idx = v.iter().position(|z| z.norm() >= max * (1.0 - 1e-9)).expect("maximum exists");
    let unit = v[idx] / v[idx].norm();
    let rot = unit.conj();
    for z in v.iter_mut() {
        *z *= rot;
    }
    v[idx] = C64::new(v[idx].norm(), 0.0);
}

fn normalize(v: &mut DVector<C64>) {
    let norm = v.norm();
    if norm > 0.0 {
        v.unscale_mut(norm);
    }
}

fn validate_square(mat: &DMatrix<f64>) -> Result<()> {
    if !mat.is_square() || mat.nrows() == 0 {
        return Err(Error::InvalidInput(format!(
            "expected a non-empty square matrix, got {} x {}",
            mat.nrows(),
            mat.ncols()
        )));
    }
    if mat.iter().any(|x| !x.is_finite()) {
        return Err(Error::InvalidInput("matrix has non-finite entries".into()));
    }
    Ok(())
}

fn max_diag(mat: &DMatrix<f64>) -> f64 {
    mat.diagonal().iter().fold(0.0f64, |a, x| a.max(x.abs()))
}

/// Eigenvalues and eigenvectors of a dense real matrix.
///
/// Fails with [`Error::DefectiveMatrix`] when the eigenvectors are numerically
/// dependent (condition number above [`DEFECTIVE_CONDITION`]).
pub fn eigendecompose(mat: &DMatrix<f64>) -> Result<EigenSystem> {
    validate_square(mat)?;
    let d_max = max_diag(mat);
    let (values, vectors, symmetric) = if is_numerically_symmetric(mat) {
        let (v, w) = symmetric_pairs(mat);
        (v, w, true)
    } else {
        let (v, w) = general_pairs(mat)?;
        (v, w, false)
    };

    let n = values.len();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| values[a].re.total_cmp(&values[b].re).then(values[a].im.total_cmp(&values[b].im)));
    let eigenvalues: Vec<C64> = order.iter().map(|&i| values[i]).collect();
    let mut eigenvectors = DMatrix::zeros(n, n);
    for (col, &i) in order.iter().enumerate() {
        eigenvectors.set_column(col, &vectors[i]);
    }

    let basis_condition = if symmetric {
        1.0
    } else {
        let sv = eigenvectors.clone().svd(false, false).singular_values;
        let hi = sv.iter().fold(0.0f64, |a, &x| a.max(x));
        let lo = sv.iter().fold(f64::INFINITY, |a, &x| a.min(x));
        if lo > 0.0 {
            hi / lo
        } else {
            f64::INFINITY
        }
    };
    if basis_condition > DEFECTIVE_CONDITION {
        return Err(Error::DefectiveMatrix { condition: basis_condition });
    }

    // residual guard: every pair must satisfy A v = lambda v to working accuracy
    let ac = mat.map(|x| C64::new(x, 0.0));
    let fro = mat.norm().max(f64::MIN_POSITIVE);
    for mu in 0..n {
        let v = eigenvectors.column(mu);
        let r = (&ac * v - v * eigenvalues[mu]).norm();
        if r > 1e-8 * fro {
            return Err(Error::NoConvergence);
        }
    }

    Ok(EigenSystem { eigenvalues, eigenvectors, basis_condition, d_max, symmetric })
}

fn symmetric_pairs(mat: &DMatrix<f64>) -> (Vec<C64>, Vec<DVector<C64>>) {
    let n = mat.nrows();
    let sym = DMatrix::from_fn(n, n, |i, j| 0.5 * (mat[(i, j)] + mat[(j, i)]));
    let eig = SymmetricEigen::new(sym);
    let values = eig.eigenvalues.iter().map(|&l| C64::new(l, 0.0)).collect();
    let vectors = (0..n)
        .map(|k| {
            let mut v: DVector<C64> = eig.eigenvectors.column(k).map(|x| C64::new(x, 0.0));
            normalize(&mut v);
            fix_phase(&mut v);
            v
        })
        .collect();
    (values, vectors)
}

fn general_pairs(mat: &DMatrix<f64>) -> Result<(Vec<C64>, Vec<DVector<C64>>)> {
    let n = mat.nrows();
    let ac = mat.map(|x| C64::new(x, 0.0));
    let schur = Schur::try_new(ac, f64::EPSILON, SCHUR_MAX_ITER).ok_or(Error::NoConvergence)?;
    let (q, t) = schur.unpack();
    let t_norm = t.norm();
    let small = (f64::EPSILON * t_norm).max(f64::MIN_POSITIVE);

    let mut values: Vec<C64> = (0..n).map(|k| t[(k, k)]).collect();
    let mut vectors: Vec<DVector<C64>> = Vec::with_capacity(n);
    for k in 0..n {
        let lambda = values[k];
        let mut x = DVector::<C64>::zeros(n);
        x[k] = C64::new(1.0, 0.0);
        for i in (0..k).rev() {
            let mut s = C64::new(0.0, 0.0);
            for j in (i + 1)..=k {
                s += t[(i, j)] * x[j];
            }
            let mut d = t[(i, i)] - lambda;
            if d.norm() < small {
                d = C64::new(small, 0.0);
            }
            x[i] = -s / d;
            let big = x.iter().fold(0.0f64, |a, z| a.max(z.norm()));
            if big > 1e100 {
                x.unscale_mut(big);
            }
        }
        let mut v = &q * x;
        normalize(&mut v);
        fix_phase(&mut v);
        vectors.push(v);
    }

    // real input: snap rounding-level imaginary parts and pair conjugates exactly
    let snap = 1e-13 * mat.norm().max(f64::MIN_POSITIVE);
    for k in 0..n {
        if values[k].im.abs() <= snap {
            values[k].im = 0.0;
            let mut v = vectors[k].map(|z| C64::new(z.re, 0.0));
            normalize(&mut v);
            fix_phase(&mut v);
            vectors[k] = v;
        }
    }
    let mut upper: Vec<usize> = (0..n).filter(|&k| values[k].im > 0.0).collect();
    upper.sort_by(|&a, &b| values[a].re.total_cmp(&values[b].re).then(values[a].im.total_cmp(&values[b].im)));
    let mut lower: Vec<usize> = (0..n).filter(|&k| values[k].im < 0.0).collect();
    for p in upper {
        let target = values[p].conj();
        let best = lower
            .iter()
            .enumerate()
            .min_by(|(_, &a), (_, &b)| (values[a] - target).norm().total_cmp(&(values[b] - target).norm()))
            .map(|(pos, &k)| (pos, k));
        if let Some((pos, k)) = best {
            lower.swap_remove(pos);
            values[k] = target;
            vectors[k] = vectors[p].map(|z| z.conj());
        }
    }
    Ok((values, vectors))
}

/// Eigenvalues only, via the real Schur form (conjugate pairs are exact).
pub fn eigenvalues(mat: &DMatrix<f64>) -> Result<Vec<C64>> {
    validate_square(mat)?;
    if is_numerically_symmetric(mat) {
        let n = mat.nrows();
        let sym = DMatrix::from_fn(n, n, |i, j| 0.5 * (mat[(i, j)] + mat[(j, i)]));
        let mut v: Vec<C64> = sym.symmetric_eigenvalues().iter().map(|&l| C64::new(l, 0.0)).collect();
        v.sort_by(|a, b| a.re.total_cmp(&b.re));
        return Ok(v);
    }
    let schur = Schur::try_new(mat.clone(), f64::EPSILON, SCHUR_MAX_ITER).ok_or(Error::NoConvergence)?;
    let mut v: Vec<C64> = schur.complex_eigenvalues().iter().copied().collect();
    v.sort_by(|a, b| a.re.total_cmp(&b.re).then(a.im.total_cmp(&b.im)));
    Ok(v)
}

/// Default non-real threshold for a matrix with largest diagonal `d_max`.
pub fn default_imag_tol(d_max: f64) -> f64 {
    IMAG_TOL_REL * d_max
}

/// True iff every `|Im lambda| <= tol_im` (default `1e-8 * d_max`).
pub fn spectrum_is_real(es: &EigenSystem, tol_im: Option<f64>) -> bool {
    es.max_imag() <= tol_im.unwrap_or_else(|| default_imag_tol(es.d_max))
}

fn matrix_spectrum_is_real(mat: &DMatrix<f64>) -> Result<bool> {
    let values = eigenvalues(mat)?;
    let max_imag = values.iter().fold(0.0f64, |a, l| a.max(l.im.abs()));
    Ok(max_imag <= default_imag_tol(max_diag(mat)))
}

/// Smallest distance between neighbouring eigenvalues of a real spectrum.
pub fn eigen_gap(es: &EigenSystem) -> Result<f64> {
    if !spectrum_is_real(es, None) {
        return Err(Error::ComplexSpectrum { max_imag: es.max_imag() });
    }
    Ok(min_neighbor_gap(&es.real_eigenvalues()))
}

/// Minimum gap between consecutive sorted values; infinite below two values.
pub fn min_neighbor_gap(values: &[f64]) -> f64 {
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    v.windows(2).map(|w| w[1] - w[0]).fold(f64::INFINITY, f64::min)
}

/// Principal square roots of the eigenvalues; eigenvalues within
/// `1e-9 * d_max` of zero map to exactly zero.
pub fn mode_frequencies(es: &EigenSystem) -> EigenFrequencies {
    let zero_tol = ZERO_MODE_TOL_REL * es.d_max;
    EigenFrequencies { omegas: es.eigenvalues.iter().map(|&l| principal_sqrt(l, zero_tol)).collect() }
}

pub(crate) fn principal_sqrt(lambda: C64, zero_tol: f64) -> C64 {
    if lambda.norm() <= zero_tol {
        return C64::new(0.0, 0.0);
    }
    // +0 imaginary part keeps negative reals on the +i branch
    let l = if lambda.im == 0.0 { C64::new(lambda.re, 0.0) } else { lambda };
    let w = l.sqrt();
    if w.re < 0.0 {
        -w
    } else {
        w
    }
}

/// Result of locating the real-to-complex transition of `lap0 + eps lap_oneway`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CriticalEpsilon {
    /// Midpoint of the final bracket.
    pub eps_star: f64,
    /// Largest probed eps with a real spectrum.
    pub lo: f64,
    /// Smallest probed eps with a non-real spectrum.
    pub hi: f64,
    pub iterations: usize,
}

/// Bisection on eps for the onset of non-real eigenvalues.
///
/// The spectrum must be real at `bracket.0` and non-real at `bracket.1`;
/// the transition is assumed to be unique inside the bracket.
pub fn critical_epsilon(
    lap0: &LaplacianMatrix,
    lap_oneway: &LaplacianMatrix,
    bracket: (f64, f64),
    tol: f64,
) -> Result<CriticalEpsilon> {
    let (mut lo, mut hi) = bracket;
    if !(lo.is_finite() && hi.is_finite() && lo >= 0.0 && lo < hi) {
        return Err(Error::BadBracket(format!("need 0 <= lo < hi, got ({lo}, {hi})")));
    }
    if !(tol.is_finite() && tol > 0.0) {
        return Err(Error::InvalidInput(format!("tolerance must be positive, got {tol}")));
    }
    let split = OneWaySplit::from_parts(lap0.clone(), lap_oneway.clone())?;
    let real_at = |eps: f64| -> Result<bool> {
        let lap = compose_epsilon(&split, eps)?;
        matrix_spectrum_is_real(lap.matrix())
    };
    if !real_at(lo)? {
        return Err(Error::BadBracket(format!("spectrum is already non-real at eps = {lo}")));
    }
    if real_at(hi)? {
        return Err(Error::NoTransition { hi });
    }
    let mut iterations = 0;
    while hi - lo > tol {
        let mid = 0.5 * (lo + hi);
        if real_at(mid)? {
            lo = mid;
        } else {
            hi = mid;
        }
        iterations += 1;
    }
    Ok(CriticalEpsilon { eps_star: 0.5 * (lo + hi), lo, hi, iterations })
}

/// CSV with columns `mu,re_lambda,im_lambda,re_omega,im_omega`.
pub fn write_spectrum_report<W: Write>(es: &EigenSystem, mut out: W) -> Result<()> {
    let freqs = mode_frequencies(es);
    writeln!(out, "mu,re_lambda,im_lambda,re_omega,im_omega")?;
    for (mu, (l, w)) in es.eigenvalues.iter().zip(&freqs.omegas).enumerate() {
        writeln!(out, "{mu},{},{},{},{}", fmt_f64(l.re), fmt_f64(l.im), fmt_f64(w.re), fmt_f64(w.im))?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{compose_epsilon, laplacian_of, WeightedDigraph};
    use crate::model;
    use approx::assert_abs_diff_eq;

    fn model_at(eps: f64) -> DMatrix<f64> {
        compose_epsilon(&model::split(), eps).unwrap().into_matrix()
    }

    #[test]
    fn diagonal_matrix() {
        let es = eigendecompose(&DMatrix::from_diagonal(&DVector::from_vec(vec![5.0, 2.0]))).unwrap();
        assert_eq!(es.eigenvalues(), &[C64::new(2.0, 0.0), C64::new(5.0, 0.0)]);
        assert_abs_diff_eq!(es.eigenvectors()[(1, 0)].re, 1.0, epsilon = 1e-15);
        assert_abs_diff_eq!(es.eigenvectors()[(0, 1)].re, 1.0, epsilon = 1e-15);
    }

    #[test]
    fn three_cycle_spectrum() {
        let g = WeightedDigraph::from_triples(3, &[(0, 1, 1.0), (1, 2, 1.0), (2, 0, 1.0)]).unwrap();
        let es = eigendecompose(laplacian_of(&g).matrix()).unwrap();
        let l = es.eigenvalues();
        let h = 3f64.sqrt() / 2.0;
        assert_abs_diff_eq!(l[0].norm(), 0.0, epsilon = 1e-12);
        assert_abs_diff_eq!(l[1].re, 1.5, epsilon = 1e-12);
        assert_abs_diff_eq!(l[1].im, -h, epsilon = 1e-12);
        assert_eq!(l[2], l[1].conj());
    }

    #[test]
    fn model_regimes() {
        let es = eigendecompose(&model_at(1.66)).unwrap();
        assert!(es.max_imag() > 0.0);
        assert!(!spectrum_is_real(&es, None));
        let es = eigendecompose(&model_at(1.5)).unwrap();
        assert!(spectrum_is_real(&es, None));
        assert_abs_diff_eq!(es.eigenvalues()[0].re, 0.0, epsilon = 1e-9 * es.d_max());
        assert!(spectrum_is_real(&eigendecompose(&model_at(0.0)).unwrap(), None));
        assert!(spectrum_is_real(&eigendecompose(&model_at(1.65)).unwrap(), None));
    }

    #[test]
    fn eigenvector_phase_convention() {
        let es = eigendecompose(&model_at(1.66)).unwrap();
        for mu in 0..es.dim() {
            let v = es.eigenvector(mu);
            let max = v.iter().fold(0.0f64, |a, z| a.max(z.norm()));
            let idx = v.iter().position(|z| z.norm() >= max * (1.0 - 1e-9)).unwrap();
            assert_eq!(v[idx].im, 0.0);
            assert!(v[idx].re > 0.0);
            assert_abs_diff_eq!(v.norm(), 1.0, epsilon = 1e-12);
        }
    }

    #[test]
    fn gap_examples() {
        assert_eq!(min_neighbor_gap(&[0.0, 1.0, 3.0]), 1.0);
        assert_eq!(min_neighbor_gap(&[0.0, 2.0, 2.0]), 0.0);
        let g0 = eigen_gap(&eigendecompose(&model_at(0.0)).unwrap()).unwrap();
        let g16 = eigen_gap(&eigendecompose(&model_at(1.6)).unwrap()).unwrap();
        assert!(g16 < g0, "{g16} !< {g0}");
        assert!(matches!(eigen_gap(&eigendecompose(&model_at(1.7)).unwrap()), Err(Error::ComplexSpectrum { .. })));
    }

    #[test]
    fn frequencies() {
        let es = eigendecompose(&DMatrix::from_diagonal(&DVector::from_vec(vec![0.0, 0.01, 4.0]))).unwrap();
        let f = mode_frequencies(&es);
        assert_eq!(f.omegas[0], C64::new(0.0, 0.0));
        assert_abs_diff_eq!(f.omegas[1].re, 0.1, epsilon = 1e-15);
        assert_abs_diff_eq!(f.omegas[2].re, 2.0, epsilon = 1e-15);
        let w = principal_sqrt(C64::new(-1.0, -0.0), 0.0);
        assert_eq!(w, C64::new(0.0, 1.0));
    }

    #[test]
    fn critical_epsilon_on_model() {
        let c = critical_epsilon(&model::lap0(), &model::lap_oneway(), (0.0, 3.0), 1e-3).unwrap();
        assert!(c.eps_star > 1.65 && c.eps_star < 1.66, "{c:?}");
        assert!(c.hi - c.lo <= 1e-3);
    }

    #[test]
    fn critical_epsilon_errors() {
        let null = LaplacianMatrix::zeros(5);
        assert!(matches!(critical_epsilon(&model::lap0(), &null, (0.0, 3.0), 1e-3), Err(Error::NoTransition { .. })));
        assert!(matches!(
            critical_epsilon(&model::lap0(), &model::lap_oneway(), (2.0, 3.0), 1e-3),
            Err(Error::BadBracket(_))
        ));
        assert!(matches!(
            critical_epsilon(&model::lap0(), &model::lap_oneway(), (3.0, 1.0), 1e-3),
            Err(Error::BadBracket(_))
        ));
    }

    #[test]
    fn report_columns() {
        let es = eigendecompose(&model_at(1.66)).unwrap();
        let mut buf = Vec::new();
        write_spectrum_report(&es, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.starts_with("mu,re_lambda,im_lambda,re_omega,im_omega\n"));
        assert_eq!(text.lines().count(), 6);
    }
}
