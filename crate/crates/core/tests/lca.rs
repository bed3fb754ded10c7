//! Local MIS queries against whole-graph quantities.

use rayon::prelude::*;

use qtree_core::graph::{gen_cycle, gen_random_regular};
use qtree_core::query_tree::TreeSizer;
use qtree_core::seed::child_seed;
use qtree_core::stats::{linear_fit, median};
use qtree_core::{global_greedy_mis, mis_query, verify_consistency, Graph, RankOracle};

fn t_max(g: &Graph, o: &RankOracle) -> u64 {
    let mut sizer = TreeSizer::new(g.n());
    (0..g.n()).map(|v| sizer.exact_size(g, o, v) as u64).max().unwrap_or(0)
}

#[test]
fn max_explored_tracks_t_max_across_sizes() {
    let mut explored_medians = Vec::new();
    let mut tmax_medians = Vec::new();
    for e in 10..=14u32 {
        let n = 1usize << e;
        let pairs: Vec<(f64, f64)> = (0..20u64)
            .into_par_iter()
            .map(|s| {
                let seed = child_seed(e as u64, s);
                let g = gen_random_regular(n, 3, seed).unwrap();
                let o = RankOracle::full(child_seed(seed, 1), n);
                let report = verify_consistency(&g, &o).unwrap();
                assert!(report.ok());
                (report.max_explored as f64, t_max(&g, &o) as f64)
            })
            .collect();
        let (explored, tmax): (Vec<f64>, Vec<f64>) = pairs.into_iter().unzip();
        explored_medians.push(median(&explored));
        tmax_medians.push(median(&tmax));
    }
    let fit = linear_fit(&tmax_medians, &explored_medians).unwrap();
    assert!(
        fit.correlation >= 0.9,
        "max explored {explored_medians:?} vs T_max {tmax_medians:?}: r = {}",
        fit.correlation
    );
}

#[test]
fn answers_do_not_depend_on_rank_seed_layout() {
    // The same ranking, materialized or evaluated on demand, yields the same MIS.
    let g = gen_cycle(300).unwrap();
    let o = RankOracle::full(11, g.n());
    let table: Vec<f64> = (0..g.n()).map(|v| o.rank(v).unwrap()).collect();
    let t = RankOracle::from_ranks(&table).unwrap();
    let greedy = global_greedy_mis(&g, &o).unwrap();
    assert_eq!(greedy, global_greedy_mis(&g, &t).unwrap());
    for v in 0..g.n() {
        assert_eq!(mis_query(&g, &o, v).unwrap().in_mis, mis_query(&g, &t, v).unwrap().in_mis);
    }
}
