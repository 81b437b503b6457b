use nalgebra::DMatrix;
use netosc::graph::{
    canonical_split, check_symmetrizable, compose_epsilon, gershgorin_disk, laplacian_of, left_null_vector,
    scaled_laplacian, WeightedDigraph, DEFAULT_SYMMETRIZABLE_TOL,
};
use netosc::random::{random_symmetrizable, seeded};
use netosc::spectral::eigenvalues;
use proptest::prelude::*;

fn digraph_strategy(max_n: usize) -> impl Strategy<Value = WeightedDigraph> {
    (2..=max_n).prop_flat_map(|n| {
        proptest::collection::vec(proptest::option::weighted(0.4, 0.05f64..5.0), n * n).prop_map(move |cells| {
            let triples: Vec<(usize, usize, f64)> = cells
                .iter()
                .enumerate()
                .filter_map(|(k, w)| {
                    let (i, j) = (k / n, k % n);
                    w.filter(|_| i != j).map(|w| (i, j, w))
                })
                .collect();
            WeightedDigraph::from_triples(n, &triples).unwrap()
        })
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn laplacian_shape(g in digraph_strategy(9)) {
        let lap = laplacian_of(&g);
        let m = lap.matrix();
        let scale = 1.0 + m.amax();
        for i in 0..lap.dim() {
            prop_assert!(m.row(i).sum().abs() <= 1e-12 * scale);
            prop_assert!(m[(i, i)] >= 0.0);
            for j in 0..lap.dim() {
                if i != j {
                    prop_assert!(m[(i, j)] <= 0.0);
                }
            }
        }
    }

    #[test]
    fn spectrum_inside_gershgorin_disk(g in digraph_strategy(9)) {
        let lap = laplacian_of(&g);
        let disk = gershgorin_disk(&lap);
        for l in eigenvalues(lap.matrix()).unwrap() {
            prop_assert!(disk.contains(l.re, l.im, 1e-8 * (1.0 + disk.radius)), "{l} outside {disk:?}");
            prop_assert!(l.re >= -1e-9 * (1.0 + disk.radius));
        }
    }

    #[test]
    fn split_recomposes(g in digraph_strategy(9)) {
        let lap = laplacian_of(&g);
        let split = canonical_split(&lap);
        let sum = compose_epsilon(&split, 1.0).unwrap();
        let tol = 4.0 * f64::EPSILON * (1.0 + lap.matrix().amax());
        prop_assert!((sum.matrix() - lap.matrix()).amax() <= tol);
        prop_assert!(split.lap_sym_part.is_symmetric());
        let ow = split.lap_oneway.matrix();
        for i in 0..lap.dim() {
            for j in 0..lap.dim() {
                if i != j {
                    prop_assert!(ow[(i, j)] == 0.0 || ow[(j, i)] == 0.0);
                }
            }
        }
        prop_assert_eq!(compose_epsilon(&split, 0.0).unwrap(), split.lap_sym_part.clone());
    }

    #[test]
    fn symmetrizable_instances_recover_mass(seed in any::<u64>(), n in 2usize..10) {
        let (lap, mass) = random_symmetrizable(&mut seeded(seed), n, 0.3);
        let dec = check_symmetrizable(&lap, DEFAULT_SYMMETRIZABLE_TOL).unwrap();
        let ratio = dec.mass()[0] / mass[0];
        for (a, b) in dec.mass().iter().zip(&mass) {
            prop_assert!((a / b - ratio).abs() <= 1e-9 * ratio);
        }
        prop_assert!(dec.lap_sym().is_symmetric());
        prop_assert!(dec.decomposes(&lap));
        let s = scaled_laplacian(&dec);
        prop_assert_eq!(&s, &s.transpose());
    }

    #[test]
    fn left_null_vector_annihilates(seed in any::<u64>(), n in 2usize..10) {
        let (lap, _) = random_symmetrizable(&mut seeded(seed), n, 0.5);
        let m = left_null_vector(&lap).unwrap();
        let row = DMatrix::from_row_slice(1, n, &m) * lap.matrix();
        prop_assert!(row.amax() <= 1e-9 * lap.matrix().amax() * m.iter().cloned().fold(0.0, f64::max));
        let min = m.iter().cloned().filter(|&x| x > 0.0).fold(f64::INFINITY, f64::min);
        prop_assert!((min - 1.0).abs() < 1e-12);
    }
}
