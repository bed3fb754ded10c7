//! Undirected graphs with a certified maximum-degree bound.
//!
//! A [`Graph`] is immutable once built. Every constructor validates symmetry,
//! simplicity and the degree bound, and neighbor lists are kept sorted so that
//! iteration order (and therefore every seeded run) is canonical.

mod generate;
mod io;

use std::collections::HashSet;

use serde::{Deserialize, Serialize};

use crate::error::{vertex_out_of_range, Error, Result};
use crate::seed::Seed;

pub use generate::{
    gen_capped_random, gen_cycle, gen_grid, gen_random_regular, gen_random_regular_with_budget,
    DEFAULT_RETRY_BUDGET,
};
pub use io::{load_graph, parse_edge_list, save_graph, write_edge_list};

pub type Vertex = usize;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Graph {
    adj: Vec<Vec<Vertex>>,
    d_bound: usize,
}

impl Graph {
    /// Builds a graph from an undirected edge list. Each edge must appear once
    /// (in either orientation).
    pub fn from_edges<I>(n: usize, d_bound: usize, edges: I) -> Result<Self>
    where
        I: IntoIterator<Item = (Vertex, Vertex)>,
    {
        let mut adj = vec![Vec::new(); n];
        for (u, v) in edges {
            if u >= n || v >= n {
                return Err(vertex_out_of_range(u.max(v), n));
            }
            if u == v {
                return Err(Error::Input(format!("self-loop at vertex {u}")));
            }
            adj[u].push(v);
            adj[v].push(u);
        }
        Self::from_adjacency(adj, d_bound)
    }

    /// Builds a graph from per-vertex neighbor lists, sorting them and checking
    /// every invariant.
    pub fn from_adjacency(mut adj: Vec<Vec<Vertex>>, d_bound: usize) -> Result<Self> {
        for list in &mut adj {
            list.sort_unstable();
        }
        let g = Graph { adj, d_bound };
        g.validate()?;
        Ok(g)
    }

    pub(crate) fn from_sorted_adjacency_unchecked(adj: Vec<Vec<Vertex>>, d_bound: usize) -> Self {
        let g = Graph { adj, d_bound };
        debug_assert!(g.validate().is_ok());
        g
    }

    /// Checks symmetry, absence of self-loops and duplicate edges, sorted
    /// neighbor lists and the degree bound.
    pub fn validate(&self) -> Result<()> {
        let n = self.n();
        for (v, list) in self.adj.iter().enumerate() {
            if list.len() > self.d_bound {
                return Err(Error::Input(format!(
                    "vertex {v} has degree {} above the bound {}",
                    list.len(),
                    self.d_bound
                )));
            }
            for pair in list.windows(2) {
                if pair[0] >= pair[1] {
                    return Err(Error::Input(format!(
                        "neighbor list of {v} is unsorted or has duplicate edge to {}",
                        pair[1]
                    )));
                }
            }
            for &u in list {
                if u >= n {
                    return Err(vertex_out_of_range(u, n));
                }
                if u == v {
                    return Err(Error::Input(format!("self-loop at vertex {v}")));
                }
                if self.adj[u].binary_search(&v).is_err() {
                    return Err(Error::Input(format!("edge {v}-{u} is not symmetric")));
                }
            }
        }
        Ok(())
    }

    /// Number of vertices. Vertex ids are `0..n`.
    #[inline]
    pub fn n(&self) -> usize {
        self.adj.len()
    }

    /// The declared maximum degree `d`.
    #[inline]
    pub fn d_bound(&self) -> usize {
        self.d_bound
    }

    #[inline]
    pub fn neighbors(&self, v: Vertex) -> &[Vertex] {
        &self.adj[v]
    }

    #[inline]
    pub fn degree(&self, v: Vertex) -> usize {
        self.adj[v].len()
    }

    pub fn max_degree(&self) -> usize {
        self.adj.iter().map(Vec::len).max().unwrap_or(0)
    }

    pub fn edge_count(&self) -> usize {
        self.adj.iter().map(Vec::len).sum::<usize>() / 2
    }

    /// Edges `(u, v)` with `u < v`, in lexicographic order.
    pub fn edges(&self) -> impl Iterator<Item = (Vertex, Vertex)> + '_ {
        self.adj
            .iter()
            .enumerate()
            .flat_map(|(u, list)| list.iter().filter(move |&&v| u < v).map(move |&v| (u, v)))
    }

    pub fn has_edge(&self, u: Vertex, v: Vertex) -> bool {
        u < self.n() && self.adj[u].binary_search(&v).is_ok()
    }

    pub fn check_vertex(&self, v: Vertex) -> Result<()> {
        if v < self.n() {
            Ok(())
        } else {
            Err(vertex_out_of_range(v, self.n()))
        }
    }

    /// Vertices of the connected component containing `v`, sorted.
    pub fn component(&self, v: Vertex) -> Result<Vec<Vertex>> {
        self.check_vertex(v)?;
        let mut seen = vec![false; self.n()];
        let mut stack = vec![v];
        seen[v] = true;
        let mut out = Vec::new();
        while let Some(w) = stack.pop() {
            out.push(w);
            for &u in self.neighbors(w) {
                if !seen[u] {
                    seen[u] = true;
                    stack.push(u);
                }
            }
        }
        out.sort_unstable();
        Ok(out)
    }

    pub fn is_connected(&self) -> bool {
        self.n() == 0 || self.component(0).map(|c| c.len() == self.n()).unwrap_or(false)
    }
}

/// `N(S)`: vertices outside `s` adjacent to at least one vertex of `s`.
/// Returned sorted ascending.
pub fn boundary(g: &Graph, s: &[Vertex]) -> Result<Vec<Vertex>> {
    for &v in s {
        g.check_vertex(v)?;
    }
    let inside: HashSet<Vertex> = s.iter().copied().collect();
    let mut out: Vec<Vertex> = inside
        .iter()
        .flat_map(|&v| g.neighbors(v).iter().copied())
        .filter(|u| !inside.contains(u))
        .collect::<HashSet<_>>()
        .into_iter()
        .collect();
    out.sort_unstable();
    Ok(out)
}

/// Declarative description of a graph to build.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum GraphSpec {
    Regular {
        n: usize,
        d: usize,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        seed: Option<Seed>,
    },
    Cycle {
        n: usize,
    },
    Grid {
        rows: usize,
        cols: usize,
    },
    CappedRandom {
        n: usize,
        p: f64,
        d: usize,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        seed: Option<Seed>,
    },
    File {
        path: std::path::PathBuf,
    },
}

impl GraphSpec {
    /// Checks the parameters are admissible for the kind without building anything.
    pub fn check(&self) -> Result<()> {
        match *self {
            GraphSpec::Regular { n, d, .. } => generate::check_regular(n, d),
            GraphSpec::Cycle { n } => generate::check_cycle(n),
            GraphSpec::Grid { rows, cols } => generate::check_grid(rows, cols),
            GraphSpec::CappedRandom { p, .. } => generate::check_probability(p),
            GraphSpec::File { .. } => Ok(()),
        }
    }

    /// Builds the graph. Randomized kinds use their own `seed` when present and
    /// `fallback_seed` otherwise.
    pub fn build(&self, fallback_seed: u64) -> Result<Graph> {
        match self {
            GraphSpec::Regular { n, d, seed } => {
                gen_random_regular(*n, *d, seed.map_or(fallback_seed, |s| s.0))
            }
            GraphSpec::Cycle { n } => gen_cycle(*n),
            GraphSpec::Grid { rows, cols } => gen_grid(*rows, *cols),
            GraphSpec::CappedRandom { n, p, d, seed } => {
                gen_capped_random(*n, *p, *d, seed.map_or(fallback_seed, |s| s.0))
            }
            GraphSpec::File { path } => load_graph(path),
        }
    }

    /// Declared degree bound, when it is known without building the graph.
    pub fn degree_bound(&self) -> Option<usize> {
        match *self {
            GraphSpec::Regular { d, .. } | GraphSpec::CappedRandom { d, .. } => Some(d),
            GraphSpec::Cycle { .. } => Some(2),
            GraphSpec::Grid { .. } => Some(4),
            GraphSpec::File { .. } => None,
        }
    }

    pub fn vertex_count(&self) -> Option<usize> {
        match *self {
            GraphSpec::Regular { n, .. }
            | GraphSpec::Cycle { n }
            | GraphSpec::CappedRandom { n, .. } => Some(n),
            GraphSpec::Grid { rows, cols } => Some(rows * cols),
            GraphSpec::File { .. } => None,
        }
    }

    /// The same family at a different vertex count. Grids become square-ish
    /// `rows × ceil(n/rows)`; files cannot be resized.
    pub fn with_n(&self, new_n: usize) -> Result<GraphSpec> {
        let mut out = self.clone();
        match &mut out {
            GraphSpec::Regular { n, .. }
            | GraphSpec::Cycle { n }
            | GraphSpec::CappedRandom { n, .. } => *n = new_n,
            GraphSpec::Grid { rows, cols } => {
                let r = (new_n as f64).sqrt().floor().max(1.0) as usize;
                *rows = r;
                *cols = new_n.div_ceil(r);
            }
            GraphSpec::File { .. } => {
                return Err(Error::Config("a file graph cannot be resized for an n list".into()))
            }
        }
        Ok(out)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn boundary_on_cycle() {
        let g = gen_cycle(4).unwrap();
        assert_eq!(boundary(&g, &[0]).unwrap(), vec![1, 3]);
        assert!(boundary(&g, &[0, 1, 2, 3]).unwrap().is_empty());
        assert!(boundary(&g, &[]).unwrap().is_empty());
    }

    #[test]
    fn boundary_of_grid_center() {
        let g = gen_grid(3, 3).unwrap();
        assert_eq!(boundary(&g, &[4]).unwrap(), vec![1, 3, 5, 7]);
    }

    #[test]
    fn boundary_rejects_out_of_range() {
        let g = gen_cycle(4).unwrap();
        assert!(matches!(boundary(&g, &[4]), Err(Error::Input(_))));
    }

    #[test]
    fn from_edges_rejects_bad_input() {
        assert!(Graph::from_edges(3, 2, [(0, 0)]).is_err());
        assert!(Graph::from_edges(3, 2, [(0, 1), (1, 0)]).is_err());
        assert!(Graph::from_edges(3, 1, [(0, 1), (1, 2)]).is_err());
        assert!(Graph::from_edges(3, 2, [(0, 3)]).is_err());
        let g = Graph::from_edges(3, 2, [(2, 1), (0, 1)]).unwrap();
        assert_eq!(g.neighbors(1), &[0, 2]);
        assert_eq!(g.edges().collect::<Vec<_>>(), vec![(0, 1), (1, 2)]);
    }

    #[test]
    fn spec_json_shape() {
        let spec: GraphSpec =
            serde_json::from_str(r#"{"kind":"regular","n":10,"d":3,"seed":"0x10"}"#).unwrap();
        assert_eq!(
            spec,
            GraphSpec::Regular { n: 10, d: 3, seed: Some(Seed(16)) }
        );
        let capped: GraphSpec =
            serde_json::from_str(r#"{"kind":"capped-random","n":10,"p":0.5,"d":3}"#).unwrap();
        assert_eq!(capped.degree_bound(), Some(3));
        assert!(serde_json::from_str::<GraphSpec>(r#"{"kind":"cycle","n":3,"x":1}"#).is_err());
    }

    #[test]
    fn spec_check_catches_inadmissible_parameters() {
        assert!(GraphSpec::Regular { n: 5, d: 3, seed: None }.check().is_err());
        assert!(GraphSpec::Cycle { n: 2 }.check().is_err());
        assert!(GraphSpec::Grid { rows: 0, cols: 2 }.check().is_err());
        assert!(GraphSpec::CappedRandom { n: 3, p: 1.5, d: 2, seed: None }.check().is_err());
        assert!(GraphSpec::Regular { n: 6, d: 3, seed: None }.check().is_ok());
    }
}
