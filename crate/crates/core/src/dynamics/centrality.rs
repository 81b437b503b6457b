use std::collections::{BTreeSet, VecDeque};

use crate::error::{Error, Result};
use crate::graph::{
    check_symmetrizable, scaled_laplacian, LaplacianMatrix, WeightedDigraph, DEFAULT_SYMMETRIZABLE_TOL,
};
use crate::spectral::{eigendecompose, ZERO_MODE_TOL_REL};

use super::energy::weighted_mode_energies;

/// Simple undirected graph with unit weights.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct UndirectedGraph {
    n: usize,
    edges: Vec<(usize, usize)>,
    adj: Vec<Vec<usize>>,
}

impl UndirectedGraph {
    /// Edges are stored as `(min, max)`; loops and repeated pairs are rejected.
    pub fn new(n: usize, edges: &[(usize, usize)]) -> Result<Self> {
        let mut seen = BTreeSet::new();
        let mut adj = vec![Vec::new(); n];
        let mut stored = Vec::with_capacity(edges.len());
        for &(a, b) in edges {
            if a >= n || b >= n {
                return Err(Error::InvalidGraph(format!("edge ({a}, {b}) out of range for {n} nodes")));
            }
            if a == b {
                return Err(Error::InvalidGraph(format!("self-loop at node {a}")));
            }
            let key = (a.min(b), a.max(b));
            if !seen.insert(key) {
                return Err(Error::InvalidGraph(format!("duplicate edge ({a}, {b})")));
            }
            adj[a].push(b);
            adj[b].push(a);
            stored.push(key);
        }
        adj.iter_mut().for_each(|l| l.sort_unstable());
        Ok(Self { n, edges: stored, adj })
    }

    pub fn node_count(&self) -> usize {
        self.n
    }

    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    pub fn neighbors(&self, i: usize) -> &[usize] {
        &self.adj[i]
    }

    pub fn degrees(&self) -> Vec<f64> {
        self.adj.iter().map(|l| l.len() as f64).collect()
    }

    /// Both orientations of every edge with weight 1.
    pub fn to_digraph(&self) -> WeightedDigraph {
        let triples: Vec<(usize, usize, f64)> =
            self.edges.iter().flat_map(|&(a, b)| [(a, b, 1.0), (b, a, 1.0)]).collect();
        WeightedDigraph::from_triples(self.n, &triples).expect("validated edges")
    }

    /// Hop distances and shortest-path counts from `s`.
    fn bfs(&self, s: usize) -> (Vec<Option<usize>>, Vec<f64>) {
        let mut dist = vec![None; self.n];
        let mut sigma = vec![0.0; self.n];
        dist[s] = Some(0);
        sigma[s] = 1.0;
        let mut queue = VecDeque::from([s]);
        while let Some(u) = queue.pop_front() {
            let du = dist[u].expect("queued nodes are reached");
            for &v in &self.adj[u] {
                match dist[v] {
                    None => {
                        dist[v] = Some(du + 1);
                        sigma[v] = sigma[u];
                        queue.push_back(v);
                    }
                    Some(dv) if dv == du + 1 => sigma[v] += sigma[u],
                    _ => {}
                }
            }
        }
        (dist, sigma)
    }

    pub fn component_count(&self) -> usize {
        let mut seen = vec![false; self.n];
        let mut count = 0;
        for s in 0..self.n {
            if seen[s] {
                continue;
            }
            count += 1;
            let (dist, _) = self.bfs(s);
            for (i, d) in dist.iter().enumerate() {
                if d.is_some() {
                    seen[i] = true;
                }
            }
        }
        count
    }
}

/// Number of shortest paths, over all unordered node pairs, that use each
/// edge. Returned in the order of [`UndirectedGraph::edges`].
pub fn link_betweenness(g: &UndirectedGraph) -> Result<Vec<f64>> {
    let components = g.component_count();
    if components > 1 {
        return Err(Error::DisconnectedGraph { components });
    }
    let bfs: Vec<(Vec<usize>, Vec<f64>)> = (0..g.n)
        .map(|s| {
            let (d, sigma) = g.bfs(s);
            (d.into_iter().map(|x| x.expect("connected")).collect(), sigma)
        })
        .collect();
    let weights = g
        .edges
        .iter()
        .map(|&(a, b)| {
            let mut total = 0.0;
            for s in 0..g.n {
                for t in (s + 1)..g.n {
                    let dst = bfs[s].0[t];
                    for (u, v) in [(a, b), (b, a)] {
                        if bfs[s].0[u] + 1 + bfs[t].0[v] == dst {
                            total += bfs[s].1[u] * bfs[t].1[v];
                        }
                    }
                }
            }
            total
        })
        .collect();
    Ok(weights)
}

/// The graph re-weighted by [`link_betweenness`], both orientations equal.
pub fn betweenness_weights(g: &UndirectedGraph) -> Result<WeightedDigraph> {
    let w = link_betweenness(g)?;
    let triples: Vec<(usize, usize, f64)> =
        g.edges.iter().zip(&w).flat_map(|(&(a, b), &w)| [(a, b, w), (b, a, w)]).collect();
    WeightedDigraph::from_triples(g.n, &triples)
}

/// Node energies with every non-zero mode weighted equally,
/// `E_i = sum_{lambda_mu != 0} lambda_mu v_mu(i)^2` of the symmetrized
/// Laplacian.
pub fn oscillation_centrality(lap: &LaplacianMatrix) -> Result<Vec<f64>> {
    let dec = check_symmetrizable(lap, DEFAULT_SYMMETRIZABLE_TOL)?;
    let es = eigendecompose(&scaled_laplacian(&dec))?;
    let zero_tol = ZERO_MODE_TOL_REL * es.d_max();
    let weights: Vec<f64> = es.eigenvalues().iter().map(|l| if l.norm() <= zero_tol { 0.0 } else { 1.0 }).collect();
    Ok(weighted_mode_energies(&es, &weights))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::laplacian_of;
    use approx::assert_abs_diff_eq;

    #[test]
    fn link_weights_small_graphs() {
        let path = UndirectedGraph::new(3, &[(0, 1), (1, 2)]).unwrap();
        assert_eq!(link_betweenness(&path).unwrap(), vec![2.0, 2.0]);
        let tri = UndirectedGraph::new(3, &[(0, 1), (1, 2), (0, 2)]).unwrap();
        assert_eq!(link_betweenness(&tri).unwrap(), vec![1.0; 3]);
        let star = UndirectedGraph::new(5, &[(0, 1), (0, 2), (0, 3), (0, 4)]).unwrap();
        assert_eq!(link_betweenness(&star).unwrap(), vec![4.0; 4]);
        // square: each opposite pair has two shortest paths
        let sq = UndirectedGraph::new(4, &[(0, 1), (1, 2), (2, 3), (0, 3)]).unwrap();
        assert_eq!(link_betweenness(&sq).unwrap(), vec![3.0; 4]);
    }

    #[test]
    fn disconnected_rejected() {
        let g = UndirectedGraph::new(4, &[(0, 1), (2, 3)]).unwrap();
        assert!(matches!(link_betweenness(&g), Err(Error::DisconnectedGraph { components: 2 })));
        assert!(UndirectedGraph::new(2, &[(0, 1), (1, 0)]).is_err());
    }

    #[test]
    fn single_edge_energy() {
        let g = UndirectedGraph::new(2, &[(0, 1)]).unwrap();
        let e = oscillation_centrality(&laplacian_of(&g.to_digraph())).unwrap();
        assert_abs_diff_eq!(e[0], 1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(e[1], 1.0, epsilon = 1e-12);
    }

    #[test]
    fn degrees_on_star() {
        let g = UndirectedGraph::new(5, &[(0, 1), (0, 2), (0, 3), (0, 4)]).unwrap();
        let e = oscillation_centrality(&laplacian_of(&g.to_digraph())).unwrap();
        for (ei, di) in e.iter().zip(g.degrees()) {
            assert_abs_diff_eq!(*ei, di, epsilon = 1e-12);
        }
    }
}
