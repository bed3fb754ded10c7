//! Fixtures shared by the criterion benchmarks.

use qtree_core::graph::gen_random_regular;
use qtree_core::{Graph, RankOracle};

/// A random `d`-regular graph on `n` vertices with a fully random ranking.
pub fn regular_instance(n: usize, d: usize, seed: u64) -> (Graph, RankOracle) {
    let g = gen_random_regular(n, d, seed).expect("feasible regular graph");
    let o = RankOracle::full(seed ^ 0x5eed, n);
    (g, o)
}

/// Roots spread evenly over the vertex set, so each batch touches a
/// different part of the graph.
pub fn roots(n: usize, count: usize) -> Vec<usize> {
    (0..count).map(|i| i * n / count).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fixtures() {
        let (g, o) = regular_instance(100, 3, 1);
        assert_eq!(g.n(), 100);
        assert!(o.rank(99).is_ok());
        assert_eq!(roots(100, 4), vec![0, 25, 50, 75]);
    }
}
