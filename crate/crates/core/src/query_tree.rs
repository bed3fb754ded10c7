//! Rank-induced orientation and query-tree exploration.
//!
//! The edge `{u, v}` is oriented `u → v` when `rank(u) ≤ rank(v)` (both ways on
//! a tie), and the query tree of `v` is the set reachable from `v`. Two lazy
//! explorers compute it: [`query_tree_exact`] under the raw ranks and
//! [`query_tree_quantized`] under the layers `f = quantize(rank)`, the latter
//! recording the full exposure process. [`query_tree_bfs_oracle`] computes the
//! same sets by materializing the orientation first and is kept only as an
//! independent check.

use std::cmp::Reverse;
use std::collections::{BTreeSet, BinaryHeap, HashMap, HashSet, VecDeque};

use rustc_hash::{FxHashMap, FxHashSet};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{boundary, Graph, Vertex};
use crate::rank::{Quantizer, Rank, Ranking};

/// A total preorder on vertices that decides edge direction.
pub(crate) trait VertexOrder {
    type Key: Ord + Copy;
    fn key(&self, v: Vertex) -> Self::Key;
}

pub(crate) struct Exact<'a, R: ?Sized>(pub &'a R);

impl<R: Ranking + ?Sized> VertexOrder for Exact<'_, R> {
    type Key = Rank;
    #[inline]
    fn key(&self, v: Vertex) -> Rank {
        self.0.rank_of(v)
    }
}

pub(crate) struct Layered<'a, R: ?Sized>(pub &'a R, pub Quantizer);

impl<R: Ranking + ?Sized> VertexOrder for Layered<'_, R> {
    type Key = u32;
    #[inline]
    fn key(&self, v: Vertex) -> u32 {
        self.1.layer_of(self.0.rank_of(v))
    }
}

pub(crate) fn check_instance<R: Ranking + ?Sized>(g: &Graph, r: &R, v: Vertex) -> Result<()> {
    if r.n() < g.n() {
        return Err(Error::Input(format!(
            "rank oracle covers {} vertices but the graph has {}",
            r.n(),
            g.n()
        )));
    }
    g.check_vertex(v)
}

/// A fully materialized orientation: `out(v)` lists the heads of the arcs
/// leaving `v`, sorted.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OrientedGraph {
    out: Vec<Vec<Vertex>>,
}

impl OrientedGraph {
    pub fn n(&self) -> usize {
        self.out.len()
    }

    pub fn out_neighbors(&self, v: Vertex) -> &[Vertex] {
        &self.out[v]
    }

    pub fn has_arc(&self, from: Vertex, to: Vertex) -> bool {
        self.out.get(from).is_some_and(|l| l.binary_search(&to).is_ok())
    }

    pub fn arcs(&self) -> impl Iterator<Item = (Vertex, Vertex)> + '_ {
        self.out.iter().enumerate().flat_map(|(u, l)| l.iter().map(move |&v| (u, v)))
    }

    pub fn arc_count(&self) -> usize {
        self.out.iter().map(Vec::len).sum()
    }

    /// Vertices reachable from `v` along arcs, by breadth-first search.
    pub fn reachable(&self, v: Vertex) -> Result<BTreeSet<Vertex>> {
        if v >= self.n() {
            return Err(crate::error::vertex_out_of_range(v, self.n()));
        }
        let mut visited = vec![false; self.n()];
        let mut queue = VecDeque::from([v]);
        visited[v] = true;
        while let Some(w) = queue.pop_front() {
            for &u in &self.out[w] {
                if !visited[u] {
                    visited[u] = true;
                    queue.push_back(u);
                }
            }
        }
        Ok(visited.iter().enumerate().filter_map(|(u, &s)| s.then_some(u)).collect())
    }
}

fn orient_by<O: VertexOrder>(g: &Graph, order: &O) -> OrientedGraph {
    let keys: Vec<O::Key> = (0..g.n()).map(|v| order.key(v)).collect();
    let out = (0..g.n())
        .map(|u| g.neighbors(u).iter().copied().filter(|&v| keys[u] <= keys[v]).collect())
        .collect();
    OrientedGraph { out }
}

/// Orientation of `g` under the exact ranks of `o`.
pub fn orient<R: Ranking + ?Sized>(g: &Graph, o: &R) -> Result<OrientedGraph> {
    if g.n() > 0 {
        check_instance(g, o, 0)?;
    }
    Ok(orient_by(g, &Exact(o)))
}

/// Orientation of `g` under the quantized layers of `o`.
pub fn orient_quantized<R: Ranking + ?Sized>(g: &Graph, o: &R, q: Quantizer) -> Result<OrientedGraph> {
    if g.n() > 0 {
        check_instance(g, o, 0)?;
    }
    Ok(orient_by(g, &Layered(o, q)))
}

fn reachable_lazy<O: VertexOrder>(g: &Graph, order: &O, root: Vertex) -> BTreeSet<Vertex> {
    let mut seen = FxHashSet::default();
    seen.insert(root);
    let mut stack = vec![(root, order.key(root))];
    while let Some((w, kw)) = stack.pop() {
        for &u in g.neighbors(w) {
            if seen.contains(&u) {
                continue;
            }
            let ku = order.key(u);
            if ku >= kw {
                seen.insert(u);
                stack.push((u, ku));
            }
        }
    }
    seen.into_iter().collect()
}

/// `T_v` under exact ranks, explored lazily: only the result and its
/// neighbors have their ranks evaluated.
pub fn query_tree_exact<R: Ranking + ?Sized>(g: &Graph, o: &R, v: Vertex) -> Result<BTreeSet<Vertex>> {
    check_instance(g, o, v)?;
    Ok(reachable_lazy(g, &Exact(o), v))
}

/// Reachable set from `v` computed by materializing the whole orientation
/// and running a breadth-first search over its arcs. Quantized when `q` is
/// given.
pub fn query_tree_bfs_oracle<R: Ranking + ?Sized>(
    g: &Graph,
    o: &R,
    v: Vertex,
    q: Option<Quantizer>,
) -> Result<BTreeSet<Vertex>> {
    check_instance(g, o, v)?;
    let oriented = match q {
        None => orient(g, o)?,
        Some(q) => orient_quantized(g, o, q)?,
    };
    oriented.reachable(v)
}

/// Which unprocessed vertex of `T` the exposure process expands next.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum WorkOrder {
    /// The one whose layer was revealed earliest.
    #[default]
    Fifo,
    /// The one added to `T` most recently.
    Lifo,
}

/// Record of one run of the quantized exploration from `root`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ExplorationTrace {
    pub root: Vertex,
    /// Layer of the root, reported separately from the prefix counts.
    pub root_layer: u32,
    #[serde(rename = "L")]
    pub layers: u32,
    /// The query tree under `f`, sorted.
    #[serde(rename = "T")]
    pub tree: Vec<Vertex>,
    /// `T` plus its boundary, sorted.
    #[serde(rename = "R")]
    pub reached: Vec<Vertex>,
    /// Vertices in the order their layers were revealed. Its set equals `R`.
    pub exposure_order: Vec<Vertex>,
    /// `f` of each entry of `exposure_order`.
    pub exposure_layers: Vec<u32>,
    /// Entry `l` is `|T_{≤l}|`, for `l = 0..=L`.
    pub layer_prefix_sizes: Vec<usize>,
    /// Neighbor lists read, one per processed vertex of `T`.
    pub probes: usize,
    /// Edge `(w, u)` whenever `u` joined `T` while `w` was being processed.
    #[serde(skip)]
    pub tree_edges: Vec<(Vertex, Vertex)>,
}

impl ExplorationTrace {
    /// Layer of an exposed vertex.
    pub fn layer_of(&self, v: Vertex) -> Option<u32> {
        self.exposure_order.iter().position(|&u| u == v).map(|i| self.exposure_layers[i])
    }

    pub fn layer_map(&self) -> HashMap<Vertex, u32> {
        self.exposure_order.iter().copied().zip(self.exposure_layers.iter().copied()).collect()
    }

    pub fn tree_size(&self) -> usize {
        self.tree.len()
    }
}

/// The quantized query tree of `v` together with its exposure trace.
///
/// Starting from `T = R = {v}`, repeatedly take an unprocessed `w ∈ T`, reveal
/// the layers of all its neighbors and add them to `R`, and add those with
/// `f(u) ≥ f(w)` to `T`, until nothing changes.
pub fn query_tree_quantized<R: Ranking + ?Sized>(
    g: &Graph,
    o: &R,
    q: Quantizer,
    v: Vertex,
) -> Result<ExplorationTrace> {
    query_tree_quantized_ordered(g, o, q, v, WorkOrder::Fifo)
}

pub fn query_tree_quantized_ordered<R: Ranking + ?Sized>(
    g: &Graph,
    o: &R,
    q: Quantizer,
    root: Vertex,
    order: WorkOrder,
) -> Result<ExplorationTrace> {
    check_instance(g, o, root)?;
    let layer = |u: Vertex| q.layer_of(o.rank_of(u));

    // exposure index and layer of every vertex in R
    let mut exposed: FxHashMap<Vertex, (usize, u32)> = FxHashMap::default();
    let mut exposure_order = vec![root];
    let mut exposure_layers = vec![layer(root)];
    exposed.insert(root, (0, exposure_layers[0]));

    // indexed like exposure_order
    let mut in_tree = vec![true];
    let mut layer_counts = vec![0usize; q.layers() as usize + 1];
    layer_counts[exposure_layers[0] as usize] += 1;
    let mut tree_edges = Vec::new();
    let mut fifo = BinaryHeap::new();
    let mut lifo = Vec::new();
    match order {
        WorkOrder::Fifo => fifo.push(Reverse(0usize)),
        WorkOrder::Lifo => lifo.push(0usize),
    }
    let mut probes = 0;

    loop {
        let next = match order {
            WorkOrder::Fifo => fifo.pop().map(|Reverse(i)| i),
            WorkOrder::Lifo => lifo.pop(),
        };
        let Some(idx) = next else { break };
        let w = exposure_order[idx];
        let fw = exposure_layers[idx];
        probes += 1;
        for &u in g.neighbors(w) {
            let (ui, fu) = *exposed.entry(u).or_insert_with(|| {
                let fu = layer(u);
                exposure_order.push(u);
                exposure_layers.push(fu);
                in_tree.push(false);
                (exposure_order.len() - 1, fu)
            });
            if fu >= fw && !in_tree[ui] {
                in_tree[ui] = true;
                layer_counts[fu as usize] += 1;
                tree_edges.push((w, u));
                match order {
                    WorkOrder::Fifo => fifo.push(Reverse(ui)),
                    WorkOrder::Lifo => lifo.push(ui),
                }
            }
        }
    }

    let mut tree: Vec<Vertex> =
        exposure_order.iter().zip(&in_tree).filter_map(|(&v, &t)| t.then_some(v)).collect();
    tree.sort_unstable();
    let mut reached = exposure_order.clone();
    reached.sort_unstable();

    let mut acc = 0;
    for c in layer_counts.iter_mut() {
        acc += *c;
        *c = acc;
    }
    Ok(ExplorationTrace {
        root,
        root_layer: exposure_layers[0],
        layers: q.layers(),
        tree,
        reached,
        exposure_order,
        exposure_layers,
        layer_prefix_sizes: layer_counts,
        probes,
        tree_edges,
    })
}

/// `|T_{≤l}|` for `l = 0..=L`. Layers start at 1, so entry 0 is always 0.
pub fn layer_prefix_sizes(trace: &ExplorationTrace, q: Quantizer) -> Vec<usize> {
    let l = q.layers() as usize;
    let layers = trace.layer_map();
    let mut counts = vec![0usize; l + 1];
    for v in &trace.tree {
        let f = layers[v] as usize;
        counts[f.min(l)] += 1;
    }
    let mut acc = 0;
    for c in counts.iter_mut() {
        acc += *c;
        *c = acc;
    }
    counts
}

/// Vertices `u ∈ R \ T` with `f(u) = i` that lie on the boundary of `T_{≤i}`,
/// as `(i, u)` pairs. A finished exploration has none.
pub fn layer_identity_violations(g: &Graph, trace: &ExplorationTrace) -> Result<Vec<(u32, Vertex)>> {
    let layers = trace.layer_map();
    let in_tree: HashSet<Vertex> = trace.tree.iter().copied().collect();
    let mut violations = Vec::new();
    for i in 1..=trace.layers {
        let prefix: Vec<Vertex> = trace.tree.iter().copied().filter(|v| layers[v] <= i).collect();
        for u in boundary(g, &prefix)? {
            if !in_tree.contains(&u) && layers.get(&u) == Some(&i) {
                violations.push((i, u));
            }
        }
    }
    Ok(violations)
}

/// Counts, for `k = 0..=k_max`, the walks of length `k` from `v` along which
/// ranks strictly increase. Such walks never revisit a vertex.
///
/// Increasing-from-the-root matches the direction of reachability; since ranks
/// are i.i.d. uniform, the count of strictly decreasing walks has the same
/// distribution.
pub fn count_monotone_paths<R: Ranking + ?Sized>(
    g: &Graph,
    o: &R,
    v: Vertex,
    k_max: usize,
) -> Result<Vec<u64>> {
    check_instance(g, o, v)?;
    let mut counts = vec![0u64; k_max + 1];
    counts[0] = 1;
    let mut stack = vec![(v, o.rank_of(v), 0usize)];
    while let Some((w, rw, k)) = stack.pop() {
        if k == k_max {
            continue;
        }
        for &u in g.neighbors(w) {
            let ru = o.rank_of(u);
            if ru > rw {
                counts[k + 1] += 1;
                stack.push((u, ru, k + 1));
            }
        }
    }
    Ok(counts)
}

/// Reusable scratch space for computing many exact query-tree sizes on one
/// graph without per-query allocation.
#[derive(Debug, Clone)]
pub struct TreeSizer {
    stamp: Vec<u32>,
    epoch: u32,
    stack: Vec<Vertex>,
}

impl TreeSizer {
    pub fn new(n: usize) -> TreeSizer {
        TreeSizer { stamp: vec![0; n], epoch: 0, stack: Vec::new() }
    }

    fn next_epoch(&mut self) -> u32 {
        self.epoch = self.epoch.wrapping_add(1);
        if self.epoch == 0 {
            self.stamp.fill(0);
            self.epoch = 1;
        }
        self.epoch
    }

    /// `|T_v|` under exact ranks. The caller guarantees `v < g.n() <= r.n()`
    /// and that this sizer was built for `g.n()` vertices.
    pub fn exact_size<R: Ranking + ?Sized>(&mut self, g: &Graph, r: &R, v: Vertex) -> usize {
        self.size_by(g, &Exact(r), v)
    }

    pub fn quantized_size<R: Ranking + ?Sized>(&mut self, g: &Graph, r: &R, q: Quantizer, v: Vertex) -> usize {
        self.size_by(g, &Layered(r, q), v)
    }

    fn size_by<O: VertexOrder>(&mut self, g: &Graph, order: &O, v: Vertex) -> usize {
        let epoch = self.next_epoch();
        self.stamp[v] = epoch;
        self.stack.clear();
        self.stack.push(v);
        let mut size = 1;
        while let Some(w) = self.stack.pop() {
            let kw = order.key(w);
            for &u in g.neighbors(w) {
                if self.stamp[u] != epoch && order.key(u) >= kw {
                    self.stamp[u] = epoch;
                    size += 1;
                    self.stack.push(u);
                }
            }
        }
        size
    }
}

#[cfg(test)]
mod tests {
    use std::sync::Mutex;

    use proptest::prelude::*;

    use super::*;
    use crate::graph::{gen_capped_random, gen_cycle, gen_random_regular};
    use crate::rank::RankOracle;

    // a - b - c with ranks 0.5, 0.3, 0.7
    fn path_abc() -> (Graph, RankOracle) {
        let g = Graph::from_edges(3, 2, [(0, 1), (1, 2)]).unwrap();
        (g, RankOracle::from_ranks(&[0.5, 0.3, 0.7]).unwrap())
    }

    fn set(v: &[Vertex]) -> BTreeSet<Vertex> {
        v.iter().copied().collect()
    }

    #[test]
    fn orient_path() {
        let (g, o) = path_abc();
        let og = orient(&g, &o).unwrap();
        assert_eq!(og.arcs().collect::<Vec<_>>(), vec![(1, 0), (1, 2)]);
    }

    #[test]
    fn orient_equal_layers_is_bidirectional() {
        let g = gen_cycle(7).unwrap();
        let o = RankOracle::full(3, 7);
        let og = orient_quantized(&g, &o, Quantizer::new(1).unwrap()).unwrap();
        assert_eq!(og.arc_count(), 2 * g.edge_count());
        for (u, v) in g.edges() {
            assert!(og.has_arc(u, v) && og.has_arc(v, u));
        }
        // Exact ties behave the same way.
        let tied = RankOracle::from_ranks(&[0.5; 7]).unwrap();
        assert_eq!(orient(&g, &tied).unwrap().arc_count(), 14);
    }

    #[test]
    fn orient_empty_graph() {
        let g = Graph::from_edges(5, 0, []).unwrap();
        assert_eq!(orient(&g, &RankOracle::full(0, 5)).unwrap().arc_count(), 0);
    }

    #[test]
    fn exact_tree_on_path() {
        let (g, o) = path_abc();
        assert_eq!(query_tree_exact(&g, &o, 0).unwrap(), set(&[0]));
        assert_eq!(query_tree_exact(&g, &o, 1).unwrap(), set(&[0, 1, 2]));
        assert_eq!(query_tree_exact(&g, &o, 2).unwrap(), set(&[2]));
        for v in 0..3 {
            assert_eq!(query_tree_exact(&g, &o, v).unwrap(), query_tree_bfs_oracle(&g, &o, v, None).unwrap());
        }
        assert!(matches!(query_tree_exact(&g, &o, 3), Err(Error::Input(_))));
    }

    #[test]
    fn isolated_vertex_tree() {
        let g = Graph::from_edges(1, 0, []).unwrap();
        assert_eq!(query_tree_exact(&g, &RankOracle::full(1, 1), 0).unwrap(), set(&[0]));
    }

    #[test]
    fn oracle_smaller_than_graph_is_rejected() {
        let g = gen_cycle(5).unwrap();
        assert!(query_tree_exact(&g, &RankOracle::full(1, 4), 0).is_err());
    }

    #[test]
    fn quantized_path_with_literal_ranks() {
        // 0.5 sits on the boundary of I_1 = [0, 0.5) and lands in layer 2.
        let (g, o) = path_abc();
        let q = Quantizer::new(2).unwrap();
        assert_eq!((0..3).map(|v| o.layer(q, v).unwrap()).collect::<Vec<_>>(), vec![2, 1, 2]);

        let tb = query_tree_quantized(&g, &o, q, 1).unwrap();
        assert_eq!(tb.tree, vec![0, 1, 2]);
        assert_eq!(tb.reached, vec![0, 1, 2]);
        assert_eq!(tb.layer_prefix_sizes, vec![0, 1, 3]);
        assert_eq!(tb.probes, 3);

        let ta = query_tree_quantized(&g, &o, q, 0).unwrap();
        assert_eq!(ta.tree, vec![0]);
        assert_eq!(ta.reached, vec![0, 1]);
    }

    #[test]
    fn quantized_path_with_layers_one_one_two() {
        let g = Graph::from_edges(3, 2, [(0, 1), (1, 2)]).unwrap();
        let o = RankOracle::from_ranks(&[0.49, 0.3, 0.7]).unwrap();
        let q = Quantizer::new(2).unwrap();
        assert_eq!((0..3).map(|v| o.layer(q, v).unwrap()).collect::<Vec<_>>(), vec![1, 1, 2]);

        let tb = query_tree_quantized(&g, &o, q, 1).unwrap();
        assert_eq!(tb.tree, vec![0, 1, 2]);
        assert_eq!(tb.reached, vec![0, 1, 2]);
        assert_eq!(tb.layer_prefix_sizes, vec![0, 2, 3]);

        // from a: b shares layer 1, then c
        let ta = query_tree_quantized(&g, &o, q, 0).unwrap();
        assert_eq!(ta.tree, vec![0, 1, 2]);
        assert_eq!(ta.exposure_order, vec![0, 1, 2]);
        // the exact tree from a is only {a}
        assert_eq!(query_tree_exact(&g, &o, 0).unwrap(), set(&[0]));
    }

    #[test]
    fn single_vertex_prefix_sizes() {
        // Rank 0.6 with L = 4 lands in layer 3.
        let g = Graph::from_edges(1, 0, []).unwrap();
        let o = RankOracle::from_ranks(&[0.6]).unwrap();
        let t = query_tree_quantized(&g, &o, Quantizer::new(4).unwrap(), 0).unwrap();
        assert_eq!(t.root_layer, 3);
        assert_eq!(t.layer_prefix_sizes, vec![0, 0, 0, 1, 1]);
    }

    #[test]
    fn single_layer_covers_component() {
        let a = gen_cycle(6).unwrap();
        let g = Graph::from_edges(9, 2, a.edges().chain([(6, 7)])).unwrap();
        let o = RankOracle::full(11, 9);
        let t = query_tree_quantized(&g, &o, Quantizer::new(1).unwrap(), 2).unwrap();
        assert_eq!(t.tree, g.component(2).unwrap());
        assert_eq!(
            t.tree.iter().copied().collect::<BTreeSet<_>>(),
            query_tree_bfs_oracle(&g, &o, 2, Some(Quantizer::new(1).unwrap())).unwrap()
        );
    }

    #[test]
    fn trace_json_shape() {
        let (g, o) = path_abc();
        let t = query_tree_quantized(&g, &o, Quantizer::new(2).unwrap(), 1).unwrap();
        let json: serde_json::Value = serde_json::to_value(&t).unwrap();
        for key in ["root", "T", "R", "exposure_order", "layer_prefix_sizes", "probes"] {
            assert!(json.get(key).is_some(), "missing {key}");
        }
        assert!(json.get("tree_edges").is_none());
    }

    #[test]
    fn monotone_paths_on_path() {
        let (g, o) = path_abc();
        // Oracle: enumerate every walk of length <= 2 from b and classify it.
        let rank = |v: Vertex| o.rank(v).unwrap();
        let mut inc = [0u64; 3];
        let mut dec = [0u64; 3];
        inc[0] = 1;
        dec[0] = 1;
        for &x in g.neighbors(1) {
            inc[1] += (rank(x) > rank(1)) as u64;
            dec[1] += (rank(x) < rank(1)) as u64;
            for &y in g.neighbors(x) {
                inc[2] += (rank(x) > rank(1) && rank(y) > rank(x)) as u64;
                dec[2] += (rank(x) < rank(1) && rank(y) < rank(x)) as u64;
            }
        }
        assert_eq!(inc, [1, 2, 0]);
        assert_eq!(dec, [1, 0, 0]);
        assert_eq!(count_monotone_paths(&g, &o, 1, 2).unwrap(), inc.to_vec());
        assert_eq!(count_monotone_paths(&g, &o, 0, 0).unwrap(), vec![1]);
        assert_eq!(count_monotone_paths(&g, &o, 0, 3).unwrap(), vec![1, 0, 0, 0]);
    }

    #[test]
    fn monotone_paths_match_brute_force() {
        fn brute(g: &Graph, o: &RankOracle, path: &mut Vec<Vertex>, k_max: usize, out: &mut [u64]) {
            out[path.len() - 1] += 1;
            if path.len() - 1 == k_max {
                return;
            }
            let last = *path.last().unwrap();
            for &u in g.neighbors(last) {
                if !path.contains(&u) && o.rank(u).unwrap() > o.rank(last).unwrap() {
                    path.push(u);
                    brute(g, o, path, k_max, out);
                    path.pop();
                }
            }
        }
        let g = gen_random_regular(60, 4, 2).unwrap();
        for seed in 0..20 {
            let o = RankOracle::full(seed, 60);
            let v = seed as usize;
            let mut expect = vec![0; 7];
            brute(&g, &o, &mut vec![v], 6, &mut expect);
            assert_eq!(count_monotone_paths(&g, &o, v, 6).unwrap(), expect);
        }
    }

    struct Recording<'a> {
        inner: &'a RankOracle,
        seen: Mutex<HashSet<Vertex>>,
    }

    impl Ranking for Recording<'_> {
        fn n(&self) -> usize {
            self.inner.n()
        }
        fn rank_of(&self, v: Vertex) -> Rank {
            self.seen.lock().unwrap().insert(v);
            self.inner.rank_of(v)
        }
    }

    #[test]
    fn exact_explorer_is_local() {
        let g = gen_random_regular(2000, 3, 4).unwrap();
        let o = RankOracle::full(8, 2000);
        for v in [0, 17, 999] {
            let rec = Recording { inner: &o, seen: Mutex::new(HashSet::new()) };
            let t = query_tree_exact(&g, &rec, v).unwrap();
            let mut allowed: HashSet<Vertex> = t.iter().copied().collect();
            allowed.extend(boundary(&g, &t.iter().copied().collect::<Vec<_>>()).unwrap());
            assert!(rec.seen.lock().unwrap().is_subset(&allowed));
        }
    }

    #[test]
    fn tree_sizer_matches_lazy_explorer() {
        let g = gen_random_regular(500, 3, 1).unwrap();
        let o = RankOracle::full(5, 500);
        let table = o.materialize();
        let q = Quantizer::for_degree(3);
        let mut sizer = TreeSizer::new(500);
        for v in 0..500 {
            assert_eq!(sizer.exact_size(&g, &table, v), query_tree_exact(&g, &o, v).unwrap().len());
            assert_eq!(
                sizer.quantized_size(&g, &table, q, v),
                query_tree_quantized(&g, &o, q, v).unwrap().tree.len()
            );
        }
    }

    fn arb_instance() -> impl Strategy<Value = (Graph, u64, usize, usize)> {
        (2usize..40, 0.0f64..0.3, 1usize..5, any::<u64>(), 1usize..=20).prop_flat_map(
            |(n, p, d, seed, l)| {
                let g = gen_capped_random(n, p, d, seed).unwrap();
                (Just(g), any::<u64>(), 0..n, Just(l))
            },
        )
    }

    proptest! {
        #[test]
        fn trace_invariants((g, seed, root, l) in arb_instance()) {
            let o = RankOracle::full(seed, g.n());
            let q = Quantizer::new(l).unwrap();
            let t = query_tree_quantized(&g, &o, q, root).unwrap();
            let layers = t.layer_map();

            prop_assert!(t.tree.binary_search(&root).is_ok());
            prop_assert!(t.tree.iter().all(|v| t.reached.binary_search(v).is_ok()));
            // R = T ∪ N(T)
            let mut expect_r: Vec<Vertex> = boundary(&g, &t.tree).unwrap();
            expect_r.extend(&t.tree);
            expect_r.sort_unstable();
            prop_assert_eq!(&t.reached, &expect_r);
            prop_assert!(t.reached.len() <= (g.d_bound() + 1) * t.tree.len());
            // prefix sizes
            prop_assert_eq!(t.layer_prefix_sizes.len(), l + 1);
            prop_assert_eq!(t.layer_prefix_sizes[0], 0);
            prop_assert!(t.layer_prefix_sizes.windows(2).all(|w| w[0] <= w[1]));
            prop_assert_eq!(t.layer_prefix_sizes[l], t.tree.len());
            prop_assert_eq!(&t.layer_prefix_sizes, &layer_prefix_sizes(&t, q));
            // layer identity
            prop_assert!(layer_identity_violations(&g, &t).unwrap().is_empty());
            // layers never decrease along discovery edges
            prop_assert!(t.tree_edges.iter().all(|(w, u)| layers[w] <= layers[u]));
            prop_assert_eq!(t.tree_edges.len() + 1, t.tree.len());
            // every processed vertex read its neighbor list once
            prop_assert_eq!(t.probes, t.tree.len());
            // exposure order lists R once each
            let mut exp = t.exposure_order.clone();
            exp.sort_unstable();
            prop_assert_eq!(exp, t.reached.clone());
        }

        #[test]
        fn work_order_does_not_change_result((g, seed, root, l) in arb_instance()) {
            let o = RankOracle::full(seed, g.n());
            let q = Quantizer::new(l).unwrap();
            let fifo = query_tree_quantized_ordered(&g, &o, q, root, WorkOrder::Fifo).unwrap();
            let lifo = query_tree_quantized_ordered(&g, &o, q, root, WorkOrder::Lifo).unwrap();
            prop_assert_eq!(&fifo.tree, &lifo.tree);
            prop_assert_eq!(&fifo.reached, &lifo.reached);
            prop_assert_eq!(&fifo.layer_prefix_sizes, &lifo.layer_prefix_sizes);
        }

        #[test]
        fn containment_and_oracle_agreement((g, seed, root, l) in arb_instance()) {
            let o = RankOracle::full(seed, g.n());
            let q = Quantizer::new(l).unwrap();
            let exact = query_tree_exact(&g, &o, root).unwrap();
            let quantized: BTreeSet<Vertex> =
                query_tree_quantized(&g, &o, q, root).unwrap().tree.into_iter().collect();
            prop_assert!(exact.is_subset(&quantized));
            prop_assert_eq!(&exact, &query_tree_bfs_oracle(&g, &o, root, None).unwrap());
            prop_assert_eq!(&quantized, &query_tree_bfs_oracle(&g, &o, root, Some(q)).unwrap());
        }

        #[test]
        fn layer_is_monotone_in_rank(x in 0.0f64..=1.0, y in 0.0f64..=1.0, l in 1usize..64) {
            let q = Quantizer::new(l).unwrap();
            let (lo, hi) = if x <= y { (x, y) } else { (y, x) };
            prop_assert!(q.quantize(lo).unwrap() <= q.quantize(hi).unwrap());
            let (rl, rh) = (Rank::from_f64(lo).unwrap(), Rank::from_f64(hi).unwrap());
            prop_assert!(q.layer_of(rl) <= q.layer_of(rh));
        }
    }
}
