//! Undirected simple graphs stored as dense symmetric adjacency, plus the
//! deterministic generators used throughout: Cartesian grids, bridged cycle
//! chains, and stars.

use std::collections::VecDeque;

use nalgebra::DMatrix;

use crate::error::{Error, Result};

/// Undirected simple graph: symmetric boolean adjacency with an empty diagonal.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Graph {
    n: usize,
    adj: Vec<bool>,
}

impl Graph {
    /// Edgeless graph on `n` nodes.
    pub fn empty(n: usize) -> Result<Self> {
        if n == 0 {
            return Err(Error::invalid("node count must be positive"));
        }
        Ok(Graph {
            n,
            adj: vec![false; n * n],
        })
    }

    pub fn node_count(&self) -> usize {
        self.n
    }

    pub fn has_edge(&self, u: usize, v: usize) -> bool {
        u != v && self.adj[u * self.n + v]
    }

    /// Inserts the undirected edge {u, v}. Self-loops are rejected.
    pub fn add_edge(&mut self, u: usize, v: usize) -> Result<()> {
        if u == v {
            return Err(Error::invalid(format!("self-loop on node {u}")));
        }
        if u >= self.n || v >= self.n {
            return Err(Error::invalid(format!(
                "edge ({u}, {v}) out of range for {} nodes",
                self.n
            )));
        }
        self.adj[u * self.n + v] = true;
        self.adj[v * self.n + u] = true;
        Ok(())
    }

    pub fn degree(&self, u: usize) -> usize {
        (0..self.n).filter(|&v| self.has_edge(u, v)).count()
    }

    pub fn neighbors(&self, u: usize) -> impl Iterator<Item = usize> + '_ {
        (0..self.n).filter(move |&v| self.has_edge(u, v))
    }

    /// All edges as (u, v) pairs with u < v, in lexicographic order.
    pub fn edges(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        (0..self.n)
            .flat_map(move |u| ((u + 1)..self.n).map(move |v| (u, v)))
            .filter(move |&(u, v)| self.has_edge(u, v))
    }

    pub fn edge_count(&self) -> usize {
        self.edges().count()
    }

    /// Dense 0/1 adjacency matrix.
    pub fn adjacency_matrix(&self) -> DMatrix<f64> {
        DMatrix::from_fn(self.n, self.n, |i, j| {
            if self.has_edge(i, j) {
                1.0
            } else {
                0.0
            }
        })
    }

    /// BFS connectivity check.
    pub fn is_connected(&self) -> bool {
        let mut seen = vec![false; self.n];
        let mut queue = VecDeque::from([0usize]);
        seen[0] = true;
        let mut count = 1;
        while let Some(u) = queue.pop_front() {
            for v in self.neighbors(u) {
                if !seen[v] {
                    seen[v] = true;
                    count += 1;
                    queue.push_back(v);
                }
            }
        }
        count == self.n
    }

    /// The {Plus, Minus} pattern with Plus exactly on edges.
    pub fn sign_pattern(&self) -> SignPattern {
        SignPattern {
            n: self.n,
            plus: self.adj.clone(),
        }
    }
}

/// Symmetric pattern over {Plus, Minus}; the diagonal is stored but excluded
/// from equality and from the dedup key.
#[derive(Debug, Clone)]
pub struct SignPattern {
    n: usize,
    plus: Vec<bool>,
}

impl SignPattern {
    pub fn new(n: usize, plus: Vec<bool>) -> Result<Self> {
        if n == 0 || plus.len() != n * n {
            return Err(Error::invalid("pattern storage must be n*n"));
        }
        for i in 0..n {
            for j in (i + 1)..n {
                if plus[i * n + j] != plus[j * n + i] {
                    return Err(Error::invalid(format!("pattern not symmetric at ({i}, {j})")));
                }
            }
        }
        Ok(SignPattern { n, plus })
    }

    pub fn size(&self) -> usize {
        self.n
    }

    pub fn is_plus(&self, i: usize, j: usize) -> bool {
        self.plus[i * self.n + j]
    }

    /// Off-diagonal upper-triangle bits in row-major order; the canonical
    /// dedup key for labeled pattern equality.
    pub fn key(&self) -> Vec<bool> {
        let mut bits = Vec::with_capacity(self.n * (self.n - 1) / 2);
        for i in 0..self.n {
            for j in (i + 1)..self.n {
                bits.push(self.plus[i * self.n + j]);
            }
        }
        bits
    }

    /// Graph whose edges are exactly the off-diagonal Plus entries.
    pub fn to_graph(&self) -> Graph {
        let mut g = Graph::empty(self.n).expect("pattern size is positive");
        for i in 0..self.n {
            for j in (i + 1)..self.n {
                if self.plus[i * self.n + j] {
                    g.add_edge(i, j).expect("indices in range");
                }
            }
        }
        g
    }
}

/// Equality over off-diagonal entries only.
impl PartialEq for SignPattern {
    fn eq(&self, other: &Self) -> bool {
        self.n == other.n && self.key() == other.key()
    }
}

impl Eq for SignPattern {}

/// Cartesian grid graph over the given extents. Nodes are coordinate tuples
/// indexed row-major; two nodes are adjacent iff their tuples differ by one
/// in exactly one coordinate.
pub fn grid_graph(dims: &[usize]) -> Result<Graph> {
    if dims.is_empty() {
        return Err(Error::invalid("grid dims must be nonempty"));
    }
    if let Some(&d) = dims.iter().find(|&&d| d < 2) {
        return Err(Error::invalid(format!("grid dim {d} < 2")));
    }
    let n: usize = dims.iter().product();
    let mut g = Graph::empty(n)?;
    // strides[k] = product of dims after k, so index = sum coord[k] * strides[k]
    let mut strides = vec![1usize; dims.len()];
    for k in (0..dims.len().saturating_sub(1)).rev() {
        strides[k] = strides[k + 1] * dims[k + 1];
    }
    let mut coord = vec![0usize; dims.len()];
    for idx in 0..n {
        for k in 0..dims.len() {
            if coord[k] + 1 < dims[k] {
                g.add_edge(idx, idx + strides[k])?;
            }
        }
        for k in (0..dims.len()).rev() {
            coord[k] += 1;
            if coord[k] < dims[k] {
                break;
            }
            coord[k] = 0;
        }
    }
    Ok(g)
}

/// One cycle per entry, consecutive cycles joined by a single bridge edge
/// from node floor(size_i / 2) of cycle i to node 0 of cycle i + 1.
pub fn chain_of_cycles(cycle_sizes: &[usize]) -> Result<Graph> {
    if cycle_sizes.is_empty() {
        return Err(Error::invalid("cycle list must be nonempty"));
    }
    if let Some(&s) = cycle_sizes.iter().find(|&&s| s < 3) {
        return Err(Error::invalid(format!("cycle size {s} < 3")));
    }
    let n: usize = cycle_sizes.iter().sum();
    let mut g = Graph::empty(n)?;
    let mut offset = 0;
    let mut prev_anchor = None;
    for &size in cycle_sizes {
        for j in 0..size {
            g.add_edge(offset + j, offset + (j + 1) % size)?;
        }
        if let Some(anchor) = prev_anchor {
            g.add_edge(anchor, offset)?;
        }
        prev_anchor = Some(offset + size / 2);
        offset += size;
    }
    Ok(g)
}

/// Star graph: node 0 is the center, adjacent to nodes 1..=leaves.
pub fn star_graph(leaves: usize) -> Result<Graph> {
    if leaves < 1 {
        return Err(Error::invalid("star needs at least one leaf"));
    }
    let mut g = Graph::empty(leaves + 1)?;
    for leaf in 1..=leaves {
        g.add_edge(0, leaf)?;
    }
    Ok(g)
}

/// Subgraph on the listed nodes preserving all edges among them; node order
/// follows the input list.
pub fn induced_subgraph(g: &Graph, nodes: &[usize]) -> Result<Graph> {
    if nodes.is_empty() {
        return Err(Error::invalid("node list must be nonempty"));
    }
    let mut seen = vec![false; g.node_count()];
    for &u in nodes {
        if u >= g.node_count() {
            return Err(Error::invalid(format!("node {u} out of range")));
        }
        if seen[u] {
            return Err(Error::invalid(format!("duplicate node {u}")));
        }
        seen[u] = true;
    }
    let mut sub = Graph::empty(nodes.len())?;
    for (i, &u) in nodes.iter().enumerate() {
        for (j, &v) in nodes.iter().enumerate().skip(i + 1) {
            if g.has_edge(u, v) {
                sub.add_edge(i, j)?;
            }
        }
    }
    Ok(sub)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grid_edge_count_formula() {
        // sum over k of (dims[k]-1) * prod of the other dims
        for dims in [vec![2], vec![3, 3], vec![27, 27], vec![3, 3, 3, 3], vec![8, 8, 2]] {
            let g = grid_graph(&dims).unwrap();
            let expected: usize = (0..dims.len())
                .map(|k| {
                    (dims[k] - 1)
                        * dims
                            .iter()
                            .enumerate()
                            .filter(|&(j, _)| j != k)
                            .map(|(_, &d)| d)
                            .product::<usize>()
                })
                .sum();
            assert_eq!(g.edge_count(), expected, "dims {dims:?}");
            assert!(g.is_connected());
        }
    }

    #[test]
    fn grid_small_cases() {
        let g = grid_graph(&[2]).unwrap();
        assert_eq!(g.node_count(), 2);
        assert_eq!(g.edge_count(), 1);

        let g = grid_graph(&[27, 27]).unwrap();
        assert_eq!(g.node_count(), 729);
        assert_eq!(g.edge_count(), 1404);

        let g = grid_graph(&[3, 3, 3, 3]).unwrap();
        assert_eq!(g.node_count(), 81);
    }

    #[test]
    fn grid_rejects_bad_dims() {
        assert!(grid_graph(&[]).is_err());
        assert!(grid_graph(&[3, 1]).is_err());
        assert!(grid_graph(&[0]).is_err());
    }

    #[test]
    fn grid_adjacency_is_coordinate_difference() {
        let dims = [3, 4, 2];
        let g = grid_graph(&dims).unwrap();
        let coords: Vec<[usize; 3]> = {
            let mut v = Vec::new();
            for a in 0..dims[0] {
                for b in 0..dims[1] {
                    for c in 0..dims[2] {
                        v.push([a, b, c]);
                    }
                }
            }
            v
        };
        for i in 0..g.node_count() {
            for j in 0..g.node_count() {
                let diff: usize = (0..3)
                    .map(|k| coords[i][k].abs_diff(coords[j][k]))
                    .sum();
                let one_step = diff == 1;
                assert_eq!(g.has_edge(i, j), one_step, "{i} {j}");
            }
        }
    }

    #[test]
    fn chain_counts() {
        let g = chain_of_cycles(&[3]).unwrap();
        assert_eq!((g.node_count(), g.edge_count()), (3, 3));

        let g = chain_of_cycles(&[6, 6]).unwrap();
        assert_eq!((g.node_count(), g.edge_count()), (12, 13));
        assert!(g.is_connected());

        // 45 fours + 80 sixes + 45 twelves
        let mut sizes = vec![4; 45];
        sizes.extend(vec![6; 80]);
        sizes.extend(vec![12; 45]);
        let g = chain_of_cycles(&sizes).unwrap();
        assert_eq!(g.node_count(), 1200);
        assert_eq!(g.edge_count(), 1200 + sizes.len() - 1);
        assert!(g.is_connected());
    }

    #[test]
    fn chain_bridge_anchors() {
        let g = chain_of_cycles(&[6, 6]).unwrap();
        // bridge runs from node 3 (= floor(6/2)) of cycle 0 to node 6 (offset of cycle 1)
        assert!(g.has_edge(3, 6));
        assert_eq!(g.degree(3), 3);
        assert_eq!(g.degree(6), 3);
    }

    #[test]
    fn chain_rejects_small_cycles() {
        assert!(chain_of_cycles(&[2]).is_err());
        assert!(chain_of_cycles(&[]).is_err());
    }

    #[test]
    fn star_shapes() {
        let g = star_graph(3).unwrap();
        assert_eq!((g.node_count(), g.edge_count()), (4, 3));
        assert_eq!(g.degree(0), 3);

        let g = star_graph(1).unwrap();
        assert_eq!((g.node_count(), g.edge_count()), (2, 1));

        let g = star_graph(7).unwrap();
        let mut degs: Vec<usize> = (0..8).map(|u| g.degree(u)).collect();
        degs.sort_unstable_by(|a, b| b.cmp(a));
        assert_eq!(degs, vec![7, 1, 1, 1, 1, 1, 1, 1]);
        assert!(star_graph(0).is_err());
    }

    #[test]
    fn induced_subgraph_cases() {
        let star = star_graph(3).unwrap();
        let sub = induced_subgraph(&star, &[0, 1, 2]).unwrap();
        assert_eq!(sub, star_graph(2).unwrap());

        // middle of the 3x3 grid plus its four neighbors is a 4-star
        let grid = grid_graph(&[3, 3]).unwrap();
        let sub = induced_subgraph(&grid, &[4, 1, 3, 5, 7]).unwrap();
        assert_eq!(sub, star_graph(4).unwrap());

        // first cycle of a two-cycle chain is a 6-cycle
        let chain = chain_of_cycles(&[6, 6]).unwrap();
        let sub = induced_subgraph(&chain, &[0, 1, 2, 3, 4, 5]).unwrap();
        assert_eq!(sub.edge_count(), 6);
        for u in 0..6 {
            assert_eq!(sub.degree(u), 2);
        }

        assert!(induced_subgraph(&star, &[0, 0]).is_err());
        assert!(induced_subgraph(&star, &[9]).is_err());
    }

    #[test]
    fn generators_produce_valid_connected_graphs() {
        let graphs = [
            grid_graph(&[3, 3, 3, 3]).unwrap(),
            chain_of_cycles(&[4, 6, 12]).unwrap(),
            star_graph(7).unwrap(),
        ];
        for g in &graphs {
            for i in 0..g.node_count() {
                assert!(!g.has_edge(i, i));
                for j in 0..g.node_count() {
                    assert_eq!(g.has_edge(i, j), g.has_edge(j, i));
                }
            }
            assert!(g.is_connected());
        }
    }

    #[test]
    fn sign_pattern_ignores_diagonal_in_equality() {
        let g = star_graph(2).unwrap();
        let mut plus = g.sign_pattern().key();
        assert_eq!(plus.len(), 3);
        assert_eq!(plus, vec![true, true, false]);

        // same off-diagonal content, different diagonal
        let n = 3;
        let mut a = vec![false; n * n];
        let mut b = vec![false; n * n];
        for (i, j) in [(0, 1), (1, 0), (0, 2), (2, 0)] {
            a[i * n + j] = true;
            b[i * n + j] = true;
        }
        for d in 0..n {
            b[d * n + d] = true;
        }
        let pa = SignPattern::new(n, a).unwrap();
        let pb = SignPattern::new(n, b).unwrap();
        assert_eq!(pa, pb);

        plus[2] = true;
        assert_ne!(pa.key(), plus);
    }

    #[test]
    fn pattern_round_trips_through_graph() {
        let g = chain_of_cycles(&[4, 5]).unwrap();
        assert_eq!(g.sign_pattern().to_graph(), g);
    }
}
