//! The five-node reference network: a symmetrizable directed graph with
//! masses `(3, 4, 1, 2, 4)` plus a one-way link graph. Its blend
//! `lap0 + eps * lap_oneway` keeps a real spectrum up to eps ~ 1.653 and
//! acquires a complex-conjugate pair just beyond.

use crate::graph::{LaplacianMatrix, OneWaySplit};

/// Initial user states used with this network.
pub const INITIAL_STATE: [f64; 5] = [10.0, 2.0, 7.0, 5.0, 6.0];

/// Masses of the symmetrizable part.
pub const MASS: [f64; 5] = [3.0, 4.0, 1.0, 2.0, 4.0];

pub fn lap0_rows() -> Vec<Vec<f64>> {
    vec![
        vec![11.0, -3.0, -10.0 / 3.0, -5.0 / 3.0, -3.0],
        vec![-9.0 / 4.0, 23.0 / 4.0, -5.0 / 4.0, 0.0, -9.0 / 4.0],
        vec![-10.0, -5.0, 23.0, 0.0, -8.0],
        vec![-5.0 / 2.0, 0.0, 0.0, 11.0 / 2.0, -3.0],
        vec![-9.0 / 4.0, -9.0 / 4.0, -2.0, -3.0 / 2.0, 8.0],
    ]
}

/// `diag(MASS) * lap0`.
pub fn lap_sym_rows() -> Vec<Vec<f64>> {
    vec![
        vec![33.0, -9.0, -10.0, -5.0, -9.0],
        vec![-9.0, 23.0, -5.0, 0.0, -9.0],
        vec![-10.0, -5.0, 23.0, 0.0, -8.0],
        vec![-5.0, 0.0, 0.0, 11.0, -6.0],
        vec![-9.0, -9.0, -8.0, -6.0, 32.0],
    ]
}

pub fn lap_oneway_rows() -> Vec<Vec<f64>> {
    vec![
        vec![1.0, 0.0, 0.0, 0.0, -1.0],
        vec![0.0, 2.0, -1.0, -1.0, 0.0],
        vec![0.0, 0.0, 1.0, 0.0, -1.0],
        vec![-1.0, 0.0, 0.0, 1.0, 0.0],
        vec![0.0, -1.0, 0.0, 0.0, 1.0],
    ]
}

pub fn lap0() -> LaplacianMatrix {
    LaplacianMatrix::from_rows(&lap0_rows()).expect("fixture is a valid Laplacian")
}

pub fn lap_oneway() -> LaplacianMatrix {
    LaplacianMatrix::from_rows(&lap_oneway_rows()).expect("fixture is a valid Laplacian")
}

pub fn split() -> OneWaySplit {
    OneWaySplit { lap_sym_part: lap0(), lap_oneway: lap_oneway() }
}

/// `lap0 + lap_oneway`, the network at eps = 1.
pub fn composite() -> LaplacianMatrix {
    let m = lap0().matrix() + lap_oneway().matrix();
    LaplacianMatrix::from_matrix(m).expect("sum of Laplacians is a Laplacian")
}
