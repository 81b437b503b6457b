//! Directed social graphs and their Laplacians.
//!
//! A graph is a set of positively weighted directed links `i -> j`. Its
//! Laplacian `D - A` carries the weighted out-degrees on the diagonal and the
//! negated link weights off the diagonal, so every row sums to zero.
//!
//! A Laplacian is *symmetrizable* when a positive mass vector `m` exists with
//! `m_i w_ij = m_j w_ji` on every adjacent pair. Then `diag(m) * lap` is a
//! symmetric Laplacian and the wave dynamics behave like masses on springs.
//! Any Laplacian can be split into a symmetrizable part and a one-way part,
//! and [`compose_epsilon`] blends the two to walk away from the conservative
//! regime.

pub mod io;

use std::collections::HashSet;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result, SymmetrizableViolation};

/// Default relative tolerance for the detailed-balance check.
pub const DEFAULT_SYMMETRIZABLE_TOL: f64 = 1e-9;

/// A directed link `src -> dst` with positive weight.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Edge {
    pub src: usize,
    pub dst: usize,
    pub weight: f64,
}

/// Node count plus positively weighted directed edges.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightedDigraph {
    n: usize,
    edges: Vec<Edge>,
}

impl WeightedDigraph {
    /// Builds a graph, rejecting self-loops, duplicate `(src, dst)` pairs,
    /// out-of-range endpoints and non-positive or non-finite weights.
    pub fn new(n: usize, edges: Vec<Edge>) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidGraph("graph must have at least one node".into()));
        }
        let mut seen = HashSet::with_capacity(edges.len());
        for e in &edges {
            if e.src >= n || e.dst >= n {
                return Err(Error::InvalidGraph(format!(
                    "edge ({}, {}) references a node outside 0..{n}",
                    e.src, e.dst
                )));
            }
            if e.src == e.dst {
                return Err(Error::InvalidGraph(format!("self-loop on node {}", e.src)));
            }
            if !(e.weight.is_finite() && e.weight > 0.0) {
                return Err(Error::InvalidGraph(format!(
                    "edge ({}, {}) has non-positive weight {}",
                    e.src, e.dst, e.weight
                )));
            }
            if !seen.insert((e.src, e.dst)) {
                return Err(Error::InvalidGraph(format!("duplicate edge ({}, {})", e.src, e.dst)));
            }
        }
        Ok(Self { n, edges })
    }

    /// Convenience constructor from `(src, dst, weight)` triples.
    pub fn from_triples(n: usize, triples: &[(usize, usize, f64)]) -> Result<Self> {
        let edges = triples.iter().map(|&(src, dst, weight)| Edge { src, dst, weight }).collect();
        Self::new(n, edges)
    }

    /// Reads the off-diagonal pattern of a Laplacian back into a graph.
    pub fn from_laplacian(lap: &LaplacianMatrix) -> Self {
        let n = lap.dim();
        let mut edges = Vec::new();
        for i in 0..n {
            for j in 0..n {
                let w = -lap.matrix()[(i, j)];
                if i != j && w > 0.0 {
                    edges.push(Edge { src: i, dst: j, weight: w });
                }
            }
        }
        Self { n, edges }
    }

    pub fn node_count(&self) -> usize {
        self.n
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    /// Out-neighbours of `node`.
    pub fn out_neighbors(&self, node: usize) -> impl Iterator<Item = usize> + '_ {
        self.edges.iter().filter(move |e| e.src == node).map(|e| e.dst)
    }
}

/// Dense real Laplacian: zero row sums, non-positive off-diagonal entries,
/// non-negative diagonal.
#[derive(Debug, Clone, PartialEq)]
pub struct LaplacianMatrix {
    entries: DMatrix<f64>,
}

impl LaplacianMatrix {
    /// Validates a dense matrix against the Laplacian invariants.
    pub fn from_matrix(entries: DMatrix<f64>) -> Result<Self> {
        if !entries.is_square() {
            return Err(Error::InvalidLaplacian(format!(
                "matrix is {} x {}, not square",
                entries.nrows(),
                entries.ncols()
            )));
        }
        if entries.iter().any(|x| !x.is_finite()) {
            return Err(Error::InvalidLaplacian("non-finite entry".into()));
        }
        let max_abs = entries.amax();
        let row_tol = 1e-12 * (1.0 + max_abs);
        for i in 0..entries.nrows() {
            let row_sum: f64 = entries.row(i).iter().sum();
            if row_sum.abs() > row_tol {
                return Err(Error::InvalidLaplacian(format!("row {i} sums to {row_sum:e}")));
            }
            for j in 0..entries.ncols() {
                let x = entries[(i, j)];
                if i == j && x < 0.0 {
                    return Err(Error::InvalidLaplacian(format!("negative diagonal at {i}")));
                }
                if i != j && x > 0.0 {
                    return Err(Error::InvalidLaplacian(format!("positive off-diagonal entry at ({i}, {j})")));
                }
            }
        }
        Ok(Self { entries })
    }

    /// Row-major constructor, mostly for fixtures.
    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let n = rows.len();
        if rows.iter().any(|r| r.len() != n) {
            return Err(Error::InvalidLaplacian("rows have unequal length".into()));
        }
        Self::from_matrix(DMatrix::from_fn(n, n, |i, j| rows[i][j]))
    }

    /// The `n x n` null matrix, a valid Laplacian of the edgeless graph.
    pub fn zeros(n: usize) -> Self {
        Self { entries: DMatrix::zeros(n, n) }
    }

    pub fn dim(&self) -> usize {
        self.entries.nrows()
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.entries
    }

    pub fn into_matrix(self) -> DMatrix<f64> {
        self.entries
    }

    /// Weighted out-degrees.
    pub fn degrees(&self) -> Vec<f64> {
        self.entries.diagonal().iter().copied().collect()
    }

    pub fn max_degree(&self) -> f64 {
        self.entries.diagonal().iter().copied().fold(0.0, f64::max)
    }

    pub fn is_null(&self) -> bool {
        self.entries.iter().all(|&x| x == 0.0)
    }

    pub fn is_symmetric(&self) -> bool {
        self.entries == self.entries.transpose()
    }

    /// Number of weakly connected components of the nonzero off-diagonal pattern.
    pub fn weak_components(&self) -> usize {
        let n = self.dim();
        let mut label = vec![usize::MAX; n];
        let mut components = 0;
        for root in 0..n {
            if label[root] != usize::MAX {
                continue;
            }
            let mut stack = vec![root];
            label[root] = components;
            while let Some(u) = stack.pop() {
                for v in 0..n {
                    if v != u && label[v] == usize::MAX && (self.entries[(u, v)] != 0.0 || self.entries[(v, u)] != 0.0)
                    {
                        label[v] = components;
                        stack.push(v);
                    }
                }
            }
            components += 1;
        }
        components
    }
}

/// Positive masses `m` and a symmetric Laplacian `L` with `lap0 = diag(m)^-1 L`.
#[derive(Debug, Clone, PartialEq)]
pub struct SymmetrizableDecomposition {
    mass: Vec<f64>,
    lap_sym: LaplacianMatrix,
}

impl SymmetrizableDecomposition {
    pub fn mass(&self) -> &[f64] {
        &self.mass
    }

    pub fn lap_sym(&self) -> &LaplacianMatrix {
        &self.lap_sym
    }

    /// Reassembles `diag(m)^-1 L`.
    pub fn lap0(&self) -> DMatrix<f64> {
        let mut out = self.lap_sym.matrix().clone();
        for (i, mut row) in out.row_iter_mut().enumerate() {
            row /= self.mass[i];
        }
        out
    }

    /// True when `diag(m) * lap` reproduces `lap_sym` within `rel_tol`.
    pub fn decomposes(&self, lap: &LaplacianMatrix) -> bool {
        if lap.dim() != self.mass.len() {
            return false;
        }
        let sym = self.lap_sym.matrix();
        let scale = sym.amax().max(f64::MIN_POSITIVE);
        let n = lap.dim();
        (0..n).all(|i| (0..n).all(|j| (self.mass[i] * lap.matrix()[(i, j)] - sym[(i, j)]).abs() <= 1e-10 * scale))
    }
}

/// A Laplacian split into a symmetrizable part and a one-way part.
#[derive(Debug, Clone, PartialEq)]
pub struct OneWaySplit {
    pub lap_sym_part: LaplacianMatrix,
    pub lap_oneway: LaplacianMatrix,
}

impl OneWaySplit {
    /// Pairs explicit parts, checking only that the dimensions agree.
    pub fn from_parts(lap_sym_part: LaplacianMatrix, lap_oneway: LaplacianMatrix) -> Result<Self> {
        if lap_sym_part.dim() != lap_oneway.dim() {
            return Err(Error::DimensionMismatch { expected: lap_sym_part.dim(), got: lap_oneway.dim() });
        }
        Ok(Self { lap_sym_part, lap_oneway })
    }
}

/// The largest Gershgorin disk of a Laplacian: centre and radius both `d_max`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GershgorinDisk {
    pub center: f64,
    pub radius: f64,
}

impl GershgorinDisk {
    pub fn contains(&self, re: f64, im: f64, slack: f64) -> bool {
        ((re - self.center).powi(2) + im * im).sqrt() <= self.radius + slack
    }
}

/// `D - A` for the given graph.
pub fn laplacian_of(g: &WeightedDigraph) -> LaplacianMatrix {
    let n = g.node_count();
    let mut m = DMatrix::zeros(n, n);
    for e in g.edges() {
        m[(e.src, e.dst)] -= e.weight;
        m[(e.src, e.src)] += e.weight;
    }
    LaplacianMatrix { entries: m }
}

pub fn gershgorin_disk(lap: &LaplacianMatrix) -> GershgorinDisk {
    let d = lap.max_degree();
    GershgorinDisk { center: d, radius: d }
}

/// Left eigenvector for the zero eigenvalue, scaled so that its smallest
/// nonzero component has magnitude one and its dominant component is positive.
pub fn left_null_vector(lap: &LaplacianMatrix) -> Result<Vec<f64>> {
    let n = lap.dim();
    let components = lap.weak_components();
    if components > 1 {
        return Err(Error::DisconnectedGraph { components });
    }
    if n == 1 {
        return Ok(vec![1.0]);
    }
    let norm = lap.matrix().amax();
    if norm == 0.0 {
        return Err(Error::DisconnectedGraph { components: n });
    }
    let svd = lap.matrix().transpose().svd(false, true);
    let v_t = svd.v_t.ok_or(Error::NoConvergence)?;
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| svd.singular_values[a].total_cmp(&svd.singular_values[b]));
    let null_tol = 1e-10 * norm * n as f64;
    if svd.singular_values[order[1]] <= null_tol {
        // zero eigenvalue is not simple: several sink components
        let k = order.iter().take_while(|&&i| svd.singular_values[i] <= null_tol).count();
        return Err(Error::DisconnectedGraph { components: k });
    }
    let mut m: Vec<f64> = v_t.row(order[0]).iter().copied().collect();
    let max_abs = m.iter().fold(0.0f64, |a, &x| a.max(x.abs()));
    let dominant = m.iter().copied().fold(0.0f64, |a, x| if x.abs() > a.abs() { x } else { a });
    let sign = dominant.signum();
    for x in &mut m {
        *x *= sign;
        if x.abs() <= 1e-12 * max_abs {
            *x = 0.0;
        }
    }
    let min_nonzero = m.iter().filter(|x| **x != 0.0).fold(f64::INFINITY, |a, &x| a.min(x.abs()));
    for x in &mut m {
        *x /= min_nonzero;
    }
    Ok(m)
}

/// Tests `m_i > 0` and detailed balance `m_i w_ij = m_j w_ji`; on success
/// returns `m` with `L = diag(m) * lap`.
pub fn check_symmetrizable(lap: &LaplacianMatrix, tol: f64) -> Result<SymmetrizableDecomposition> {
    let m = left_null_vector(lap)?;
    let n = lap.dim();
    let m_max = m.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if let Some((node, &value)) = m.iter().enumerate().find(|(_, &x)| x <= tol * m_max) {
        return Err(Error::NotSymmetrizable(SymmetrizableViolation::NonPositiveMass { node, value }));
    }
    let a = lap.matrix();
    let w_max = (0..n)
        .flat_map(|i| (0..n).map(move |j| (i, j)))
        .filter(|(i, j)| i != j)
        .fold(0.0f64, |acc, (i, j)| acc.max(-a[(i, j)]));
    let balance_tol = tol * w_max * m_max;
    for i in 0..n {
        for j in (i + 1)..n {
            let (w_ij, w_ji) = (-a[(i, j)], -a[(j, i)]);
            if w_ij == 0.0 && w_ji == 0.0 {
                continue;
            }
            let residual = m[i] * w_ij - m[j] * w_ji;
            if residual.abs() > balance_tol {
                return Err(Error::NotSymmetrizable(SymmetrizableViolation::DetailedBalance { i, j, residual }));
            }
        }
    }
    let mut sym = DMatrix::from_fn(n, n, |i, j| m[i] * a[(i, j)]);
    // average away the rounding asymmetry, then re-derive the diagonal
    for i in 0..n {
        for j in (i + 1)..n {
            let avg = 0.5 * (sym[(i, j)] + sym[(j, i)]);
            sym[(i, j)] = avg;
            sym[(j, i)] = avg;
        }
    }
    for i in 0..n {
        let off: f64 = (0..n).filter(|&j| j != i).map(|j| sym[(i, j)]).sum();
        sym[(i, i)] = -off;
    }
    Ok(SymmetrizableDecomposition { mass: m, lap_sym: LaplacianMatrix { entries: sym } })
}

/// Builds a decomposition from explicit masses and a symmetric Laplacian.
pub fn decomposition_from_parts(mass: Vec<f64>, lap_sym: LaplacianMatrix) -> Result<SymmetrizableDecomposition> {
    if mass.len() != lap_sym.dim() {
        return Err(Error::DimensionMismatch { expected: lap_sym.dim(), got: mass.len() });
    }
    if mass.iter().any(|&x| !(x.is_finite() && x > 0.0)) {
        return Err(Error::InvalidInput("masses must be positive".into()));
    }
    let a = lap_sym.matrix();
    let scale = a.amax().max(f64::MIN_POSITIVE);
    if (a - a.transpose()).amax() > 1e-12 * scale {
        return Err(Error::InvalidInput("lap_sym is not symmetric".into()));
    }
    Ok(SymmetrizableDecomposition { mass, lap_sym })
}

/// `diag(m)^-1/2 L diag(m)^-1/2`, a symmetric matrix similar to `lap0`.
pub fn scaled_laplacian(dec: &SymmetrizableDecomposition) -> DMatrix<f64> {
    let inv_sqrt: DVector<f64> = DVector::from_iterator(dec.mass.len(), dec.mass.iter().map(|m| m.sqrt().recip()));
    let l = dec.lap_sym.matrix();
    let n = l.nrows();
    let mut s = DMatrix::from_fn(n, n, |i, j| inv_sqrt[i] * l[(i, j)] * inv_sqrt[j]);
    for i in 0..n {
        for j in (i + 1)..n {
            let avg = 0.5 * (s[(i, j)] + s[(j, i)]);
            s[(i, j)] = avg;
            s[(j, i)] = avg;
        }
    }
    s
}

/// Symmetric-min split: each unordered pair keeps `min(w_ij, w_ji)` in both
/// directions in the undirected part, and the excess `|w_ij - w_ji|` goes to
/// the one-way part along the heavier direction.
pub fn canonical_split(lap: &LaplacianMatrix) -> OneWaySplit {
    let n = lap.dim();
    let a = lap.matrix();
    let mut sym = DMatrix::zeros(n, n);
    for i in 0..n {
        for j in (i + 1)..n {
            let w = (-a[(i, j)]).min(-a[(j, i)]);
            sym[(i, j)] = -w;
            sym[(j, i)] = -w;
        }
    }
    for i in 0..n {
        let off: f64 = (0..n).filter(|&j| j != i).map(|j| sym[(i, j)]).sum();
        sym[(i, i)] = -off;
    }
    let oneway = a - &sym;
    OneWaySplit { lap_sym_part: LaplacianMatrix { entries: sym }, lap_oneway: LaplacianMatrix { entries: oneway } }
}

/// `lap0 + eps * lap_oneway`.
pub fn compose_epsilon(split: &OneWaySplit, eps: f64) -> Result<LaplacianMatrix> {
    if !(eps.is_finite() && eps >= 0.0) {
        return Err(Error::InvalidInput(format!("eps must be a non-negative number, got {eps}")));
    }
    if split.lap_sym_part.dim() != split.lap_oneway.dim() {
        return Err(Error::DimensionMismatch { expected: split.lap_sym_part.dim(), got: split.lap_oneway.dim() });
    }
    if eps == 0.0 {
        return Ok(split.lap_sym_part.clone());
    }
    let entries = split.lap_sym_part.matrix() + split.lap_oneway.matrix() * eps;
    Ok(LaplacianMatrix { entries })
}
