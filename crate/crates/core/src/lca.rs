//! Local computation of the random-order greedy maximal independent set.
//!
//! The greedy MIS processes vertices in increasing `(rank, id)` order and keeps
//! a vertex iff none of its neighbors was kept before it. [`mis_query`] decides
//! membership of one vertex by recursing only into neighbors that precede it,
//! so its work is bounded by the query tree of the reversed orientation.

use std::collections::HashMap;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::graph::{Graph, Vertex};
use crate::query_tree::check_instance;
use crate::rank::{Rank, Ranking};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct LcaAnswer {
    pub vertex: Vertex,
    pub in_mis: bool,
    /// Neighbor lists read.
    pub probes: usize,
    /// Distinct vertices whose rank was evaluated.
    pub explored: usize,
}

struct Frame {
    v: Vertex,
    /// Neighbors preceding `v`, in increasing `(rank, id)` order.
    earlier: Vec<Vertex>,
    next: usize,
}

/// Whether `v` belongs to the greedy MIS under `(rank, id)` order.
///
/// Uses a memo table local to this call and an explicit stack, so long
/// decreasing chains do not exhaust the call stack.
pub fn mis_query<R: Ranking + ?Sized>(g: &Graph, o: &R, v: Vertex) -> Result<LcaAnswer> {
    check_instance(g, o, v)?;
    let mut ranks: HashMap<Vertex, Rank> = HashMap::new();
    let mut key = |u: Vertex| (*ranks.entry(u).or_insert_with(|| o.rank_of(u)), u);
    let mut memo: HashMap<Vertex, bool> = HashMap::new();
    let mut probes = 0usize;

    let mut expand = |v: Vertex, probes: &mut usize| {
        *probes += 1;
        let kv = key(v);
        let mut earlier: Vec<(Rank, Vertex)> =
            g.neighbors(v).iter().map(|&u| key(u)).filter(|&ku| ku < kv).collect();
        earlier.sort_unstable();
        Frame { v, earlier: earlier.into_iter().map(|(_, u)| u).collect(), next: 0 }
    };

    let mut stack = vec![expand(v, &mut probes)];
    while let Some(top) = stack.last_mut() {
        if top.next == top.earlier.len() {
            memo.insert(top.v, true);
            stack.pop();
            continue;
        }
        let u = top.earlier[top.next];
        match memo.get(&u) {
            Some(true) => {
                memo.insert(top.v, false);
                stack.pop();
            }
            Some(false) => top.next += 1,
            None => {
                let frame = expand(u, &mut probes);
                stack.push(frame);
            }
        }
    }

    drop(expand);
    Ok(LcaAnswer { vertex: v, in_mis: memo[&v], probes, explored: ranks.len() })
}

/// Reference greedy MIS: scan all vertices in increasing `(rank, id)` order.
/// Returned sorted by id.
pub fn global_greedy_mis<R: Ranking + ?Sized>(g: &Graph, o: &R) -> Result<Vec<Vertex>> {
    if g.n() > 0 {
        check_instance(g, o, 0)?;
    }
    let mut order: Vec<(Rank, Vertex)> = (0..g.n()).map(|v| (o.rank_of(v), v)).collect();
    order.sort_unstable();
    let mut taken = vec![false; g.n()];
    for (_, v) in order {
        if !g.neighbors(v).iter().any(|&u| taken[u]) {
            taken[v] = true;
        }
    }
    Ok((0..g.n()).filter(|&v| taken[v]).collect())
}

/// Outcome of checking every local answer against the global greedy MIS.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConsistencyReport {
    pub n: usize,
    pub mis_size: usize,
    /// The local answers assemble exactly into the global greedy MIS.
    pub consistent: bool,
    pub independent: bool,
    pub maximal: bool,
    /// Vertices whose local answer disagrees with the global set.
    pub mismatches: Vec<Vertex>,
    pub mean_probes: f64,
    pub max_probes: usize,
    pub mean_explored: f64,
    pub max_explored: usize,
}

impl ConsistencyReport {
    pub fn ok(&self) -> bool {
        self.consistent && self.independent && self.maximal
    }
}

pub fn verify_consistency<R: Ranking + ?Sized>(g: &Graph, o: &R) -> Result<ConsistencyReport> {
    let global = global_greedy_mis(g, o)?;
    let answers: Vec<LcaAnswer> =
        (0..g.n()).into_par_iter().map(|v| mis_query(g, o, v)).collect::<Result<_>>()?;

    let mut in_global = vec![false; g.n()];
    global.iter().for_each(|&v| in_global[v] = true);
    let mismatches: Vec<Vertex> =
        answers.iter().filter(|a| a.in_mis != in_global[a.vertex]).map(|a| a.vertex).collect();

    let local: Vec<bool> = answers.iter().map(|a| a.in_mis).collect();
    let independent = g.edges().all(|(u, v)| !(local[u] && local[v]));
    let maximal = (0..g.n()).all(|v| local[v] || g.neighbors(v).iter().any(|&u| local[u]));

    let n = g.n().max(1) as f64;
    Ok(ConsistencyReport {
        n: g.n(),
        mis_size: local.iter().filter(|&&b| b).count(),
        consistent: mismatches.is_empty(),
        independent,
        maximal,
        mismatches,
        mean_probes: answers.iter().map(|a| a.probes).sum::<usize>() as f64 / n,
        max_probes: answers.iter().map(|a| a.probes).max().unwrap_or(0),
        mean_explored: answers.iter().map(|a| a.explored).sum::<usize>() as f64 / n,
        max_explored: answers.iter().map(|a| a.explored).max().unwrap_or(0),
    })
}
