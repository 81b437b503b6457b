//! Seeded random graph instances for tests, sweeps and the command line.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::dynamics::UndirectedGraph;
use crate::graph::{LaplacianMatrix, WeightedDigraph};

pub type GraphRng = ChaCha8Rng;

pub fn seeded(seed: u64) -> GraphRng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Each ordered pair gets a link with probability `p` and a weight in
/// `[0.1, w_max)`.
pub fn random_digraph<R: Rng>(rng: &mut R, n: usize, p: f64, w_max: f64) -> WeightedDigraph {
    let mut triples = Vec::new();
    for i in 0..n {
        for j in 0..n {
            if i != j && rng.random_bool(p) {
                triples.push((i, j, rng.random_range(0.1..w_max.max(0.2))));
            }
        }
    }
    WeightedDigraph::from_triples(n, &triples).expect("generated edges are valid")
}

/// Uniform labelled tree from a random Pruefer sequence.
pub fn random_tree<R: Rng>(rng: &mut R, n: usize) -> UndirectedGraph {
    if n < 2 {
        return UndirectedGraph::new(n, &[]).expect("empty graph");
    }
    let seq: Vec<usize> = (0..n - 2).map(|_| rng.random_range(0..n)).collect();
    UndirectedGraph::new(n, &prufer_edges(&seq, n)).expect("Pruefer decoding yields a tree")
}

/// Decodes a Pruefer sequence of length `n - 2`.
pub fn prufer_edges(seq: &[usize], n: usize) -> Vec<(usize, usize)> {
    let mut degree = vec![1usize; n];
    for &s in seq {
        degree[s] += 1;
    }
    let mut edges = Vec::with_capacity(n - 1);
    for &s in seq {
        let leaf = (0..n).find(|&i| degree[i] == 1).expect("a leaf always exists");
        edges.push((leaf, s));
        degree[leaf] -= 1;
        degree[s] -= 1;
    }
    let rest: Vec<usize> = (0..n).filter(|&i| degree[i] == 1).collect();
    edges.push((rest[0], rest[1]));
    edges
}

/// Random spanning tree plus each remaining pair with probability `p`.
pub fn random_connected_graph<R: Rng>(rng: &mut R, n: usize, p: f64) -> UndirectedGraph {
    let mut edges: Vec<(usize, usize)> = random_tree(rng, n).edges().to_vec();
    for i in 0..n {
        for j in (i + 1)..n {
            if !edges.contains(&(i, j)) && rng.random_bool(p) {
                edges.push((i, j));
            }
        }
    }
    edges.shuffle(rng);
    UndirectedGraph::new(n, &edges).expect("generated edges are valid")
}

/// Connected symmetrizable Laplacian with masses in `[0.5, 3)`: symmetric
/// couplings `s_ij` become rates `w_ij = s_ij / m_i`.
pub fn random_symmetrizable<R: Rng>(rng: &mut R, n: usize, p: f64) -> (LaplacianMatrix, Vec<f64>) {
    let g = random_connected_graph(rng, n, p);
    let mass: Vec<f64> = (0..n).map(|_| rng.random_range(0.5..3.0)).collect();
    let mut triples = Vec::new();
    for &(a, b) in g.edges() {
        let s = rng.random_range(0.2..2.0);
        triples.push((a, b, s / mass[a]));
        triples.push((b, a, s / mass[b]));
    }
    let lap = crate::graph::laplacian_of(&WeightedDigraph::from_triples(n, &triples).expect("valid"));
    (lap, mass)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn prufer_known_tree() {
        // sequence (3, 3, 3) on 5 nodes is the star centred at 3
        let e = prufer_edges(&[3, 3, 3], 5);
        assert_eq!(e.len(), 4);
        assert!(e.iter().all(|&(a, b)| a == 3 || b == 3));
    }

    #[test]
    fn seeded_is_reproducible() {
        let a = random_digraph(&mut seeded(7), 6, 0.4, 3.0);
        let b = random_digraph(&mut seeded(7), 6, 0.4, 3.0);
        assert_eq!(a, b);
    }

    #[test]
    fn connected_generator() {
        let mut rng = seeded(1);
        for n in 1..10 {
            assert_eq!(random_connected_graph(&mut rng, n, 0.3).component_count(), 1);
        }
    }
}
