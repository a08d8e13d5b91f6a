//! The weighted Markov graph of an affine Markov map and exact rotation-set
//! computations on it.
//!
//! Nodes are the edges (basic intervals) of the underlying lifted graph; an
//! arrow `i -> j` with weight `n` records that the image chain of interval
//! `i` contains the translate of interval `j` by `n`. For a transitive map
//! the rotation set is the closed interval spanned by the mean weights of
//! the elementary loops; we compute its endpoints exactly with Karp's
//! minimum-cycle-mean algorithm and certify each endpoint with an explicit
//! loop witness.

use std::collections::HashSet;

use num_bigint::BigInt;
use num_traits::Zero;

use crate::markov_map::MarkovMap;
use crate::rational::Rational;

/// A weighted arrow of the Markov graph.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Arrow {
    pub from: usize,
    pub to: usize,
    pub weight: i64,
}

/// A closed loop given by its arrows, with cached node sequence and weight.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LoopWitness {
    /// Arrow indices into the graph, in traversal order.
    pub arrows: Vec<usize>,
    /// Node sequence `v_0, v_1, ..., v_{k-1}` (closing back to `v_0`).
    pub nodes: Vec<usize>,
    /// Total weight of the loop.
    pub weight: i64,
}

impl LoopWitness {
    /// Mean weight `W / L` of the loop.
    pub fn mean(&self) -> Rational {
        Rational::new(BigInt::from(self.weight), BigInt::from(self.arrows.len()))
    }
    pub fn len(&self) -> usize {
        self.arrows.len()
    }
    pub fn is_empty(&self) -> bool {
        self.arrows.is_empty()
    }
}

/// The rotation set computed from the Markov graph.
#[derive(Debug, Clone)]
pub enum RotationSet {
    /// The graph has no closed loop (only possible for non-transitive maps).
    NoLoop,
    /// Interval `[min, max]` with loop witnesses attaining the endpoints.
    /// When `transitive` is false the interval is the convex hull of the
    /// per-component rotation sets and need not equal the true rotation set.
    Interval {
        min: Rational,
        max: Rational,
        min_witness: LoopWitness,
        max_witness: LoopWitness,
        transitive: bool,
    },
}

/// A finite weighted multigraph with named nodes.
#[derive(Debug, Clone)]
pub struct MarkovGraph {
    names: Vec<String>,
    arrows: Vec<Arrow>,
    adj: Vec<Vec<usize>>, // outgoing arrow indices per node
}

impl MarkovGraph {
    /// Builds a graph from explicit arrows. Panics on out-of-range indices.
    pub fn new(names: Vec<String>, arrows: Vec<Arrow>) -> Self {
        let n = names.len();
        let mut adj = vec![Vec::new(); n];
        for (i, a) in arrows.iter().enumerate() {
            assert!(a.from < n && a.to < n, "arrow endpoint out of range");
            adj[a.from].push(i);
        }
        MarkovGraph { names, arrows, adj }
    }

    /// The Markov graph of an affine Markov map: one node per basic interval,
    /// one arrow per whole translated interval in each image chain.
    pub fn from_map(map: &MarkovMap) -> Self {
        let g = map.graph();
        let names = g.edges().iter().map(|e| e.name.clone()).collect();
        let mut arrows = Vec::new();
        for e in 0..g.edges().len() {
            for entry in map.image(e) {
                arrows.push(Arrow {
                    from: e,
                    to: entry.edge,
                    weight: entry.shift,
                });
            }
        }
        MarkovGraph::new(names, arrows)
    }

    pub fn node_count(&self) -> usize {
        self.names.len()
    }
    pub fn node_name(&self, i: usize) -> &str {
        &self.names[i]
    }
    pub fn node_index(&self, name: &str) -> Option<usize> {
        self.names.iter().position(|n| n == name)
    }
    pub fn arrows(&self) -> &[Arrow] {
        &self.arrows
    }
    pub fn out_arrows(&self, v: usize) -> &[usize] {
        &self.adj[v]
    }

    /// Strongly connected components (each as a sorted node list).
    pub fn sccs(&self) -> Vec<Vec<usize>> {
        let n = self.node_count();
        let mut index = vec![usize::MAX; n];
        let mut low = vec![0usize; n];
        let mut on_stack = vec![false; n];
        let mut stack: Vec<usize> = Vec::new();
        let mut next_index = 0usize;
        let mut out: Vec<Vec<usize>> = Vec::new();
        for root in 0..n {
            if index[root] != usize::MAX {
                continue;
            }
            let mut call: Vec<(usize, usize)> = vec![(root, 0)];
            index[root] = next_index;
            low[root] = next_index;
            next_index += 1;
            stack.push(root);
            on_stack[root] = true;
            while let Some(&mut (v, ref mut pos)) = call.last_mut() {
                if *pos < self.adj[v].len() {
                    let a = self.adj[v][*pos];
                    *pos += 1;
                    let w = self.arrows[a].to;
                    if index[w] == usize::MAX {
                        index[w] = next_index;
                        low[w] = next_index;
                        next_index += 1;
                        stack.push(w);
                        on_stack[w] = true;
                        call.push((w, 0));
                    } else if on_stack[w] && index[w] < low[v] {
                        low[v] = index[w];
                    }
                } else {
                    call.pop();
                    if let Some(&mut (p, _)) = call.last_mut() {
                        if low[v] < low[p] {
                            low[p] = low[v];
                        }
                    }
                    if low[v] == index[v] {
                        let mut comp = Vec::new();
                        loop {
                            let w = stack.pop().unwrap();
                            on_stack[w] = false;
                            comp.push(w);
                            if w == v {
                                break;
                            }
                        }
                        comp.sort_unstable();
                        out.push(comp);
                    }
                }
            }
        }
        out.sort_by_key(|c| c[0]);
        out
    }

    /// Whether the graph is strongly connected (transitive map).
    pub fn is_strongly_connected(&self) -> bool {
        self.node_count() > 0 && self.sccs().len() == 1
    }

    /// Minimum (or maximum) cycle mean within one SCC, with a loop witness.
    /// Returns `None` when the component has no arrow staying inside it.
    fn cycle_mean_scc(&self, scc: &[usize], maximize: bool) -> Option<(Rational, LoopWitness)> {
        let m = scc.len();
        let mut local = vec![usize::MAX; self.node_count()];
        for (i, &v) in scc.iter().enumerate() {
            local[v] = i;
        }
        // Arrows inside the component as (arrow index, from, to, weight),
        // with weights negated when maximizing.
        let inner: Vec<(usize, usize, usize, i64)> = self
            .arrows
            .iter()
            .enumerate()
            .filter(|(_, a)| local[a.from] != usize::MAX && local[a.to] != usize::MAX)
            .map(|(i, a)| {
                let w = if maximize { -a.weight } else { a.weight };
                (i, local[a.from], local[a.to], w)
            })
            .collect();
        if inner.is_empty() {
            return None;
        }
        // A single node needs a self-loop to carry a cycle.
        if m == 1 {
            // Best self-loop directly.
            let best = inner
                .iter()
                .min_by_key(|&&(_, _, _, w)| w)
                .copied()
                .unwrap();
            let mean = Rational::from_integer(BigInt::from(if maximize {
                -best.3
            } else {
                best.3
            }));
            let a = &self.arrows[best.0];
            return Some((
                mean,
                LoopWitness {
                    arrows: vec![best.0],
                    nodes: vec![a.from],
                    weight: a.weight,
                },
            ));
        }
        // Karp: d[k][v] = min weight of a k-arrow walk from node 0 to v.
        let inf = i64::MAX;
        let mut d = vec![vec![inf; m]; m + 1];
        d[0][0] = 0;
        for k in 1..=m {
            for &(_, u, v, w) in &inner {
                if d[k - 1][u] != inf && d[k - 1][u] + w < d[k][v] {
                    d[k][v] = d[k - 1][u] + w;
                }
            }
        }
        let mut best: Option<Rational> = None;
        for v in 0..m {
            if d[m][v] == inf {
                continue;
            }
            let mut worst: Option<Rational> = None;
            for k in 0..m {
                if d[k][v] == inf {
                    continue;
                }
                let mean = Rational::new(
                    BigInt::from(d[m][v] - d[k][v]),
                    BigInt::from((m - k) as i64),
                );
                if worst.as_ref().is_none_or(|cur| &mean > cur) {
                    worst = Some(mean);
                }
            }
            if let Some(w) = worst {
                if best.as_ref().is_none_or(|b| &w < b) {
                    best = Some(w);
                }
            }
        }
        let mu = best?;
        // Witness: subtract mu from every weight (scaled by the denominator
        // to stay in integers); every cycle now has nonnegative weight and a
        // minimum-mean cycle becomes a zero-weight cycle. Shortest-path
        // potentials expose the tight arcs, and any cycle inside the tight
        // subgraph realizes the minimum mean.
        let mu_den = mu.denom().clone();
        let to_scaled = |w: i64| -> BigInt { BigInt::from(w) * &mu_den - mu.numer() };
        let mut pot: Vec<Option<BigInt>> = vec![None; m];
        pot[0] = Some(BigInt::zero());
        for _ in 0..m {
            let mut changed = false;
            for &(_, u, v, w) in &inner {
                if let Some(pu) = pot[u].clone() {
                    let cand = pu + to_scaled(w);
                    if pot[v].as_ref().is_none_or(|pv| &cand < pv) {
                        pot[v] = Some(cand);
                        changed = true;
                    }
                }
            }
            if !changed {
                break;
            }
        }
        let mut tight: Vec<Vec<(usize, usize)>> = vec![Vec::new(); m]; // (arrow, to)
        for &(idx, u, v, w) in &inner {
            let (Some(pu), Some(pv)) = (&pot[u], &pot[v]) else {
                continue;
            };
            if pu + to_scaled(w) == *pv {
                tight[u].push((idx, v));
            }
        }
        // Find a cycle in the tight subgraph: a minimum-mean cycle has all
        // its arcs tight, so one exists. DFS with back-edge detection.
        let mut color = vec![0u8; m]; // 0 white, 1 on stack, 2 done
        let mut pos_in_path = vec![usize::MAX; m];
        for root in 0..m {
            if color[root] != 0 {
                continue;
            }
            let mut nodes_path = vec![root];
            let mut arrows_path: Vec<usize> = Vec::new();
            let mut iters = vec![0usize];
            color[root] = 1;
            pos_in_path[root] = 0;
            while let Some(pos) = iters.last_mut() {
                let v = *nodes_path.last().unwrap();
                if *pos < tight[v].len() {
                    let (a, w) = tight[v][*pos];
                    *pos += 1;
                    if color[w] == 1 {
                        // Back edge closes a cycle.
                        let start = pos_in_path[w];
                        let mut cyc_arrows = arrows_path[start..].to_vec();
                        cyc_arrows.push(a);
                        let cyc_nodes: Vec<usize> =
                            nodes_path[start..].iter().map(|&lv| scc[lv]).collect();
                        let weight: i64 =
                            cyc_arrows.iter().map(|&x| self.arrows[x].weight).sum();
                        let witness = LoopWitness {
                            arrows: cyc_arrows,
                            nodes: cyc_nodes,
                            weight,
                        };
                        let mean = if maximize { -mu.clone() } else { mu.clone() };
                        debug_assert_eq!(
                            witness.mean(),
                            mean,
                            "tight cycle must attain the optimum"
                        );
                        return Some((mean, witness));
                    } else if color[w] == 0 {
                        color[w] = 1;
                        pos_in_path[w] = nodes_path.len();
                        nodes_path.push(w);
                        arrows_path.push(a);
                        iters.push(0);
                    }
                } else {
                    iters.pop();
                    let v = nodes_path.pop().unwrap();
                    color[v] = 2;
                    arrows_path.pop();
                }
            }
        }
        unreachable!("tight subgraph of a minimum-mean reduction always contains a cycle")
    }

    /// Minimum cycle mean over the whole graph, with witness.
    pub fn min_cycle_mean(&self) -> Option<(Rational, LoopWitness)> {
        self.sccs()
            .iter()
            .filter_map(|scc| self.cycle_mean_scc(scc, false))
            .min_by(|a, b| a.0.cmp(&b.0))
    }

    /// Maximum cycle mean over the whole graph, with witness.
    pub fn max_cycle_mean(&self) -> Option<(Rational, LoopWitness)> {
        self.sccs()
            .iter()
            .filter_map(|scc| self.cycle_mean_scc(scc, true))
            .max_by(|a, b| a.0.cmp(&b.0))
    }

    /// All elementary loops (no repeated node), as arrow sequences. Intended
    /// for small graphs; enumeration is exponential in general.
    pub fn elementary_loops(&self) -> Vec<LoopWitness> {
        let n = self.node_count();
        // Cycles whose minimal node is `s` are independent per `s`; the
        // enumeration runs data-parallel and is flattened in root order.
        crate::par::map_collect((0..n).collect(), |s| self.loops_from_root(s))
            .into_iter()
            .flatten()
            .collect()
    }

    /// All elementary loops whose minimal node is `s` (visiting nodes
    /// `>= s` only).
    fn loops_from_root(&self, s: usize) -> Vec<LoopWitness> {
        let n = self.node_count();
        let mut out = Vec::new();
        {
            let mut on_path = vec![false; n];
            let mut arrows_path: Vec<usize> = Vec::new();
            let mut nodes_path: Vec<usize> = vec![s];
            on_path[s] = true;
            // DFS with explicit stack of arrow iterators.
            let mut iters: Vec<usize> = vec![0];
            while let Some(pos) = iters.last_mut() {
                let v = *nodes_path.last().unwrap();
                if *pos < self.adj[v].len() {
                    let a = self.adj[v][*pos];
                    *pos += 1;
                    let w = self.arrows[a].to;
                    if w == s {
                        let mut arrows = arrows_path.clone();
                        arrows.push(a);
                        let weight: i64 = arrows.iter().map(|&x| self.arrows[x].weight).sum();
                        out.push(LoopWitness {
                            arrows,
                            nodes: nodes_path.clone(),
                            weight,
                        });
                    } else if w > s && !on_path[w] {
                        on_path[w] = true;
                        nodes_path.push(w);
                        arrows_path.push(a);
                        iters.push(0);
                    }
                } else {
                    iters.pop();
                    if let Some(v) = nodes_path.pop() {
                        on_path[v] = false;
                    }
                    arrows_path.pop();
                }
            }
        }
        out
    }

    /// The rotation set `[min W/L, max W/L]` over loops, exact. For a
    /// transitive (strongly connected) map this equals `Rot(F)`.
    pub fn rotation_set(&self) -> RotationSet {
        let Some((min, min_witness)) = self.min_cycle_mean() else {
            return RotationSet::NoLoop;
        };
        let (max, max_witness) = self.max_cycle_mean().unwrap();
        RotationSet::Interval {
            min,
            max,
            min_witness,
            max_witness,
            transitive: self.is_strongly_connected(),
        }
    }

    /// The rotation set of the `n`-th power restricted to the given nodes
    /// (typically the spine intervals): the derived graph has an arrow
    /// `i -> j` of weight `w` for every length-`n` path from `i` to `j` of
    /// total weight `w` (intermediate nodes unrestricted), deduplicated.
    /// Means are *not* divided by `n`; the caller compares `Rot(F^n)/n`.
    pub fn power_rotation_set(&self, nodes: &[usize], n: u32) -> RotationSet {
        assert!(n >= 1, "power must be positive");
        let keep: HashSet<usize> = nodes.iter().copied().collect();
        // Per-start BFS layers are independent; run them data-parallel and
        // assemble arrows in start order for a deterministic result.
        let reached: Vec<Vec<(usize, i64)>> =
            crate::par::map_collect(nodes.to_vec(), |start| {
                // BFS over (node, accumulated weight) for exactly n steps.
                let mut layer: HashSet<(usize, i64)> = HashSet::new();
                layer.insert((start, 0));
                for _ in 0..n {
                    let mut next = HashSet::new();
                    for (v, w) in layer {
                        for &a in &self.adj[v] {
                            next.insert((self.arrows[a].to, w + self.arrows[a].weight));
                        }
                    }
                    layer = next;
                }
                let mut v: Vec<(usize, i64)> = layer.into_iter().collect();
                v.sort_unstable();
                v
            });
        let mut arrows: Vec<Arrow> = Vec::new();
        let mut seen: HashSet<(usize, usize, i64)> = HashSet::new();
        for ((new_from, &start), layer) in nodes.iter().enumerate().zip(reached) {
            for (v, w) in layer {
                if keep.contains(&v) && seen.insert((start, v, w)) {
                    let new_to = nodes.iter().position(|&x| x == v).unwrap();
                    arrows.push(Arrow {
                        from: new_from,
                        to: new_to,
                        weight: w,
                    });
                }
            }
        }
        let names = nodes
            .iter()
            .map(|&v| self.names[v].clone())
            .collect::<Vec<_>>();
        MarkovGraph::new(names, arrows).rotation_set()
    }

    /// Rotation set of the spine restriction of the `n`-th power, already
    /// divided by `n`: `(1/n) Rot(F^r_n)`, where the derived graph keeps
    /// only loops whose every `n`-th node is a spine interval.
    pub fn rotation_set_of_power(map: &MarkovMap, n: u32) -> RotationSet {
        let graph = MarkovGraph::from_map(map);
        let spine: Vec<usize> = map.graph().spine_edges().to_vec();
        match graph.power_rotation_set(&spine, n) {
            RotationSet::NoLoop => RotationSet::NoLoop,
            RotationSet::Interval {
                min,
                max,
                min_witness,
                max_witness,
                transitive,
            } => {
                let d = Rational::from_integer(BigInt::from(n));
                RotationSet::Interval {
                    min: min / &d,
                    max: max / &d,
                    min_witness,
                    max_witness,
                    transitive,
                }
            }
        }
    }

    /// Graphviz rendering of the weighted graph.
    pub fn export_dot(&self) -> String {
        let mut s = String::from("digraph markov {\n");
        for name in &self.names {
            s.push_str(&format!("  \"{}\";\n", name));
        }
        for a in &self.arrows {
            s.push_str(&format!(
                "  \"{}\" -> \"{}\" [label=\"{}\"];\n",
                self.names[a.from], self.names[a.to], a.weight
            ));
        }
        s.push_str("}\n");
        s
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn graph(n: usize, arrows: &[(usize, usize, i64)]) -> MarkovGraph {
        MarkovGraph::new(
            (0..n).map(|i| format!("P{i}")).collect(),
            arrows
                .iter()
                .map(|&(from, to, weight)| Arrow { from, to, weight })
                .collect(),
        )
    }

    #[test]
    fn two_cycle_means() {
        // Cycle 0->1->0 with weights 1, 0 (mean 1/2) and self-loop at 0
        // with weight -1 (mean -1).
        let g = graph(2, &[(0, 1, 1), (1, 0, 0), (0, 0, -1)]);
        let (min, wmin) = g.min_cycle_mean().unwrap();
        let (max, wmax) = g.max_cycle_mean().unwrap();
        assert_eq!(min, Rational::from_integer(BigInt::from(-1)));
        assert_eq!(max, Rational::new(BigInt::from(1), BigInt::from(2)));
        assert_eq!(wmin.mean(), min);
        assert_eq!(wmax.mean(), max);
        assert!(g.is_strongly_connected());
    }

    #[test]
    fn elementary_loops_multigraph() {
        // Parallel arrows 0->1 of weights 0 and 2 give two distinct loops.
        let g = graph(2, &[(0, 1, 0), (0, 1, 2), (1, 0, 0)]);
        let loops = g.elementary_loops();
        assert_eq!(loops.len(), 2);
        let mut means: Vec<Rational> = loops.iter().map(|l| l.mean()).collect();
        means.sort();
        assert_eq!(means[0], Rational::from_integer(BigInt::from(0)));
        assert_eq!(means[1], Rational::from_integer(BigInt::from(1)));
    }

    #[test]
    fn acyclic_has_no_loop() {
        let g = graph(3, &[(0, 1, 1), (1, 2, 1)]);
        assert!(matches!(g.rotation_set(), RotationSet::NoLoop));
        assert!(g.min_cycle_mean().is_none());
    }
}
