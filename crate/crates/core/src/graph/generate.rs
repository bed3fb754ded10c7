use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::{Graph, Vertex};
use crate::error::{Error, Result};

/// Configuration-model attempts before [`gen_random_regular`] gives up.
///
/// A pairing is simple with probability about `exp(-(d²-1)/4)`, so the
/// expected number of attempts is ~7 at d=3 and ~40 at d=4; d ≥ 7 is out of
/// reach of whole-sample rejection.
pub const DEFAULT_RETRY_BUDGET: u64 = 100_000;

pub(super) fn check_regular(n: usize, d: usize) -> Result<()> {
    if d >= n && !(n == 0 && d == 0) {
        return Err(Error::Parameter(format!("regular graph needs d < n (n={n}, d={d})")));
    }
    if (n * d) % 2 != 0 {
        return Err(Error::Parameter(format!("n·d must be even (n={n}, d={d})")));
    }
    Ok(())
}

pub(super) fn check_cycle(n: usize) -> Result<()> {
    if n < 3 {
        return Err(Error::Parameter(format!("cycle needs n >= 3, got {n}")));
    }
    Ok(())
}

pub(super) fn check_grid(rows: usize, cols: usize) -> Result<()> {
    if rows == 0 || cols == 0 {
        return Err(Error::Parameter(format!("grid dimensions must be positive, got {rows}x{cols}")));
    }
    Ok(())
}

pub(super) fn check_probability(p: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::Parameter(format!("edge probability must lie in [0,1], got {p}")));
    }
    Ok(())
}

/// Uniform simple `d`-regular graph on `n` vertices via the configuration
/// model with whole-sample rejection.
pub fn gen_random_regular(n: usize, d: usize, seed: u64) -> Result<Graph> {
    gen_random_regular_with_budget(n, d, seed, DEFAULT_RETRY_BUDGET)
}

pub fn gen_random_regular_with_budget(n: usize, d: usize, seed: u64, budget: u64) -> Result<Graph> {
    check_regular(n, d)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut stubs: Vec<Vertex> = (0..n).flat_map(|v| std::iter::repeat(v).take(d)).collect();
    let mut adj: Vec<Vec<Vertex>> = vec![Vec::with_capacity(d); n];

    for _ in 0..budget {
        stubs.shuffle(&mut rng);
        adj.iter_mut().for_each(Vec::clear);
        let simple = stubs.chunks_exact(2).all(|pair| {
            let (u, v) = (pair[0], pair[1]);
            if u == v || adj[u].contains(&v) {
                return false;
            }
            adj[u].push(v);
            adj[v].push(u);
            true
        });
        if simple {
            adj.iter_mut().for_each(|l| l.sort_unstable());
            return Ok(Graph::from_sorted_adjacency_unchecked(adj, d));
        }
    }
    Err(Error::GenerationFailure { n, d, attempts: budget })
}

pub fn gen_cycle(n: usize) -> Result<Graph> {
    check_cycle(n)?;
    Graph::from_edges(n, 2, (0..n).map(|v| (v, (v + 1) % n)))
}

/// `rows × cols` lattice; vertex `(r, c)` has id `r * cols + c`. The declared
/// degree bound is always 4.
pub fn gen_grid(rows: usize, cols: usize) -> Result<Graph> {
    check_grid(rows, cols)?;
    let id = |r: usize, c: usize| r * cols + c;
    let mut edges = Vec::new();
    for r in 0..rows {
        for c in 0..cols {
            if c + 1 < cols {
                edges.push((id(r, c), id(r, c + 1)));
            }
            if r + 1 < rows {
                edges.push((id(r, c), id(r + 1, c)));
            }
        }
    }
    Graph::from_edges(rows * cols, 4, edges)
}

/// G(n, p) sampled over pairs `u < v` in lexicographic order; an edge whose
/// insertion would push either endpoint above `d` is skipped. One coin is
/// drawn per pair whether or not the cap binds.
pub fn gen_capped_random(n: usize, p: f64, d: usize, seed: u64) -> Result<Graph> {
    check_probability(p)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut adj: Vec<Vec<Vertex>> = vec![Vec::new(); n];
    for u in 0..n {
        for v in u + 1..n {
            if rng.gen_bool(p) && adj[u].len() < d && adj[v].len() < d {
                adj[u].push(v);
                adj[v].push(u);
            }
        }
    }
    // Lexicographic insertion keeps every list sorted.
    Ok(Graph::from_sorted_adjacency_unchecked(adj, d))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn assert_regular(g: &Graph, d: usize) {
        g.validate().unwrap();
        assert!((0..g.n()).all(|v| g.degree(v) == d));
    }

    #[test]
    fn regular_degree_zero_is_empty() {
        let g = gen_random_regular(4, 0, 0).unwrap();
        assert_eq!(g.n(), 4);
        assert_eq!(g.edge_count(), 0);
    }

    #[test]
    fn regular_six_three() {
        let g = gen_random_regular(6, 3, 1).unwrap();
        assert_eq!(g.edge_count(), 9);
        assert_regular(&g, 3);
    }

    #[test]
    fn regular_rejects_odd_handshake_and_large_d() {
        assert!(matches!(gen_random_regular(5, 3, 0), Err(Error::Parameter(_))));
        assert!(matches!(gen_random_regular(4, 4, 0), Err(Error::Parameter(_))));
    }

    #[test]
    fn regular_reports_exhausted_budget() {
        // K4 minus nothing: 3-regular on 4 vertices is K4, which rarely comes out of one pairing.
        match gen_random_regular_with_budget(4, 3, 0, 0) {
            Err(Error::GenerationFailure { attempts: 0, .. }) => {}
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn regular_is_deterministic_and_seed_sensitive() {
        let a = gen_random_regular(200, 3, 9).unwrap();
        assert_eq!(a, gen_random_regular(200, 3, 9).unwrap());
        assert_ne!(a, gen_random_regular(200, 3, 10).unwrap());
        assert_regular(&a, 3);
        assert_regular(&gen_random_regular(1000, 4, 3).unwrap(), 4);
    }

    #[test]
    fn cycles() {
        let tri = gen_cycle(3).unwrap();
        assert_eq!(tri.edge_count(), 3);
        let sq = gen_cycle(4).unwrap();
        assert_eq!(sq.edges().collect::<Vec<_>>(), vec![(0, 1), (0, 3), (1, 2), (2, 3)]);
        assert!(gen_cycle(2).is_err());
    }

    #[test]
    fn grids() {
        let one = gen_grid(1, 1).unwrap();
        assert_eq!((one.n(), one.edge_count()), (1, 0));
        let sq = gen_grid(2, 2).unwrap();
        assert_eq!(sq.edge_count(), 4);
        assert!((0..4).all(|v| sq.degree(v) == 2));
        let g = gen_grid(3, 3).unwrap();
        assert_eq!((g.n(), g.edge_count(), g.degree(4)), (9, 12, 4));
        assert_eq!(g.d_bound(), 4);
        assert!(gen_grid(0, 3).is_err());
    }

    #[test]
    fn capped_random() {
        assert_eq!(gen_capped_random(10, 0.0, 3, 0).unwrap().edge_count(), 0);
        let k10 = gen_capped_random(10, 1.0, 9, 0).unwrap();
        assert_eq!(k10.edge_count(), 45);
        let capped = gen_capped_random(10, 1.0, 2, 0).unwrap();
        assert!(capped.max_degree() <= 2);
        capped.validate().unwrap();
        assert!(gen_capped_random(10, -0.1, 2, 0).is_err());
        let a = gen_capped_random(300, 0.02, 4, 5).unwrap();
        assert_eq!(a, gen_capped_random(300, 0.02, 4, 5).unwrap());
        assert!(a.max_degree() <= 4);
    }
}
