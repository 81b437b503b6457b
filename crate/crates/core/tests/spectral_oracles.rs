//! Eigen-solver checks against closed forms and characteristic polynomials.

use nalgebra::DMatrix;
use netosc::graph::{laplacian_of, LaplacianMatrix, WeightedDigraph};
use netosc::model;
use netosc::random::{random_digraph, seeded};
use netosc::spectral::{critical_epsilon, eigendecompose, spectrum_is_real, C64};
use proptest::prelude::*;

/// Discriminant of the characteristic cubic of a 3x3 matrix; negative iff
/// there is a complex-conjugate pair.
fn cubic_discriminant(m: &DMatrix<f64>) -> f64 {
    let a = -m.trace();
    let b = m[(0, 0)] * m[(1, 1)] - m[(0, 1)] * m[(1, 0)] + m[(0, 0)] * m[(2, 2)] - m[(0, 2)] * m[(2, 0)]
        + m[(1, 1)] * m[(2, 2)]
        - m[(1, 2)] * m[(2, 1)];
    let c = -m.determinant();
    18.0 * a * b * c - 4.0 * a.powi(3) * c + a * a * b * b - 4.0 * b.powi(3) - 27.0 * c * c
}

fn lap(n: usize, triples: &[(usize, usize, f64)]) -> LaplacianMatrix {
    laplacian_of(&WeightedDigraph::from_triples(n, triples).unwrap())
}

fn triangle_parts() -> (LaplacianMatrix, LaplacianMatrix) {
    let sym = lap(3, &[(0, 1, 1.0), (1, 0, 1.0), (0, 2, 3.0), (2, 0, 3.0), (1, 2, 2.0), (2, 1, 2.0)]);
    let cycle = lap(3, &[(0, 1, 1.0), (1, 2, 1.0), (2, 0, 1.0)]);
    (sym, cycle)
}

#[test]
fn triangle_transition_matches_discriminant() {
    let (sym, cycle) = triangle_parts();
    let at = |e: f64| sym.matrix() + cycle.matrix() * e;
    // the two non-zero eigenvalues coalesce exactly at eps = 2
    let (mut lo, mut hi) = (0.0, 3.0);
    assert!(cubic_discriminant(&at(lo)) > 0.0 && cubic_discriminant(&at(hi)) < 0.0);
    for _ in 0..60 {
        let mid = 0.5 * (lo + hi);
        if cubic_discriminant(&at(mid)) >= 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    assert!((lo - 2.0).abs() < 1e-6, "oracle {lo}");
    let c = critical_epsilon(&sym, &cycle, (0.0, 3.0), 1e-6).unwrap();
    // the coalescence is a square-root branch point, so the detectable
    // onset sits slightly past the exact double root
    assert!(c.eps_star > 2.0 - 1e-6 && c.eps_star < 2.0 + 1e-3, "{c:?}");
}

#[test]
fn uniform_cycle_is_complex_immediately() {
    let sym = lap(3, &[(0, 1, 1.0), (1, 0, 1.0), (0, 2, 1.0), (2, 0, 1.0), (1, 2, 1.0), (2, 1, 1.0)]);
    let cycle = lap(3, &[(0, 1, 1.0), (1, 2, 1.0), (2, 0, 1.0)]);
    for eps in [0.1, 0.5, 2.0] {
        let es = eigendecompose(&(sym.matrix() + cycle.matrix() * eps)).unwrap();
        let h = 3f64.sqrt() / 2.0 * eps;
        let l = es.eigenvalues();
        assert!((l[1] - C64::new(3.0 + 1.5 * eps, -h)).norm() < 1e-12);
        assert!((l[2] - C64::new(3.0 + 1.5 * eps, h)).norm() < 1e-12);
    }
    let c = critical_epsilon(&sym, &cycle, (0.0, 1.0), 1e-6).unwrap();
    assert!(c.eps_star < 1e-5);
}

#[test]
fn model_bisection_bracket() {
    let c = critical_epsilon(&model::lap0(), &model::lap_oneway(), (0.0, 3.0), 1e-9).unwrap();
    assert!(c.hi - c.lo <= 1e-9);
    let real = |e: f64| {
        let es = eigendecompose(&(model::lap0().matrix() + model::lap_oneway().matrix() * e)).unwrap();
        spectrum_is_real(&es, None)
    };
    assert!(real(c.eps_star - 1e-6));
    assert!(!real(c.eps_star + 1e-6));
}

#[test]
fn model_eigenvalues_at_zero_eps() {
    // roots of the characteristic polynomial of the symmetrizable part
    let expected = [0.0, 5.4538, 9.6925, 12.2217, 25.8821];
    let es = eigendecompose(model::lap0().matrix()).unwrap();
    for (l, e) in es.eigenvalues().iter().zip(expected) {
        assert!((l.re - e).abs() < 1e-3 && l.im == 0.0, "{l} vs {e}");
    }
}

fn residual_ok(m: &DMatrix<f64>) -> Result<(), TestCaseError> {
    let es = eigendecompose(m).unwrap();
    let mc = m.map(|x| C64::new(x, 0.0));
    let scale = 1.0 + m.norm();
    let mut trace = C64::new(0.0, 0.0);
    for mu in 0..es.dim() {
        let v = es.eigenvector(mu);
        let l = es.eigenvalues()[mu];
        prop_assert!((&mc * &v - &v * l).norm() <= 1e-9 * scale);
        prop_assert!((v.norm() - 1.0).abs() < 1e-12);
        trace += l;
        if l.im != 0.0 {
            let partner = es.eigenvalues().iter().position(|&k| k == l.conj());
            prop_assert!(partner.is_some(), "unpaired {l}");
        }
    }
    prop_assert!((trace.re - m.trace()).abs() <= 1e-9 * scale);
    prop_assert!(trace.im.abs() <= 1e-9 * scale);
    Ok(())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn random_laplacians_decompose(seed in any::<u64>(), n in 2usize..10) {
        let g = random_digraph(&mut seeded(seed), n, 0.5, 4.0);
        let l = laplacian_of(&g);
        match eigendecompose(l.matrix()) {
            Ok(_) => residual_ok(l.matrix())?,
            Err(netosc::Error::DefectiveMatrix { .. }) => {}
            Err(e) => prop_assert!(false, "{e}"),
        }
    }

    #[test]
    fn symmetric_input_is_orthonormal(entries in proptest::collection::vec(-5.0f64..5.0, 36)) {
        let a = DMatrix::from_vec(6, 6, entries);
        let s = &a + a.transpose();
        let es = eigendecompose(&s).unwrap();
        prop_assert!(es.is_symmetric());
        prop_assert!(es.orthonormality_defect() < 1e-10);
        prop_assert!(es.eigenvalues().windows(2).all(|w| w[0].re <= w[1].re));
    }
}
