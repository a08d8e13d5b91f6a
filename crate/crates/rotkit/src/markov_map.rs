//! Affine Markov degree-one liftings on lifted graph spaces.
//!
//! A Markov map sends each edge (basic interval) of the fundamental domain
//! monotonically and affinely onto a *chain*: a simple path made of whole
//! translated edges. Degree one means `F(x + 1) = F(x) + 1`, so the chain of
//! each fundamental-domain edge determines the whole map.

use std::collections::BTreeMap;
use std::sync::Arc;

use num_traits::{One, Zero};
use thiserror::Error;

use crate::lifted_graph::{EdgeId, LiftedGraph, NodePosition, Point};
use crate::rational::Rational;

/// One whole translated edge inside the image chain of an interval.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct ChainEntry {
    /// Edge of the fundamental domain being covered.
    pub edge: EdgeId,
    /// Integer translation applied to that edge.
    pub shift: i64,
    /// `true` if the chain traverses the edge from `to` to `from`.
    pub reversed: bool,
}

impl ChainEntry {
    pub fn new(edge: EdgeId, shift: i64, reversed: bool) -> Self {
        ChainEntry {
            edge,
            shift,
            reversed,
        }
    }
}

/// Validation errors for Markov maps.
#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum MapError {
    #[error("edge {0:?} has an empty image chain")]
    EmptyChain(String),
    #[error("image chain of edge {0:?} breaks between entries {1} and {2}")]
    BrokenChain(String, usize, usize),
    #[error("image chain of edge {0:?} revisits a translated edge (not an interval)")]
    SelfOverlappingChain(String),
    #[error("image chain of edge {0:?} revisits a node (not an interval)")]
    SelfIntersectingChain(String),
    #[error("node {0:?} has inconsistent images across its incident edges")]
    InconsistentAtNode(String),
    #[error("wrong number of image chains: got {0}, expected one per edge ({1})")]
    WrongChainCount(usize, usize),
}

/// The start node position of a chain entry, in the chain's direction.
fn entry_start(g: &LiftedGraph, c: &ChainEntry) -> NodePosition {
    let e = &g.edges()[c.edge];
    let n = if c.reversed { e.to } else { e.from };
    g.canonical_node_position(n, c.shift)
}

/// The end node position of a chain entry, in the chain's direction.
fn entry_end(g: &LiftedGraph, c: &ChainEntry) -> NodePosition {
    let e = &g.edges()[c.edge];
    let n = if c.reversed { e.from } else { e.to };
    g.canonical_node_position(n, c.shift)
}

/// A validated affine Markov degree-one lifting.
#[derive(Debug, Clone)]
pub struct MarkovMap {
    graph: Arc<LiftedGraph>,
    /// Image chain of each edge, indexed by `EdgeId`. The chain runs from the
    /// image of `from` to the image of `to`.
    images: Vec<Vec<ChainEntry>>,
    /// Total length of each image chain.
    chain_len: Vec<Rational>,
}

impl MarkovMap {
    /// Validates and builds a Markov map from per-edge image chains.
    pub fn new(graph: Arc<LiftedGraph>, images: Vec<Vec<ChainEntry>>) -> Result<Self, MapError> {
        if images.len() != graph.edges().len() {
            return Err(MapError::WrongChainCount(
                images.len(),
                graph.edges().len(),
            ));
        }
        let name = |e: EdgeId| graph.edges()[e].name.clone();
        for (ei, chain) in images.iter().enumerate() {
            if chain.is_empty() {
                return Err(MapError::EmptyChain(name(ei)));
            }
            // Consecutive entries must share endpoints.
            for i in 1..chain.len() {
                if entry_end(&graph, &chain[i - 1]) != entry_start(&graph, &chain[i]) {
                    return Err(MapError::BrokenChain(name(ei), i - 1, i));
                }
            }
            // The chain must be an interval: no repeated translated edge and
            // no repeated node position.
            let mut seen_edges = BTreeMap::new();
            for c in chain {
                if seen_edges.insert((c.edge, c.shift), ()).is_some() {
                    return Err(MapError::SelfOverlappingChain(name(ei)));
                }
            }
            let mut seen_nodes = BTreeMap::new();
            seen_nodes.insert(entry_start(&graph, &chain[0]), ());
            for c in chain {
                if seen_nodes.insert(entry_end(&graph, c), ()).is_some() {
                    return Err(MapError::SelfIntersectingChain(name(ei)));
                }
            }
        }
        // Node images must be consistent: every occurrence of a node as an
        // edge endpoint yields the same image position (with the degree-one
        // identification of node 1 with node 0 shifted by +1).
        let mut node_image: BTreeMap<NodePosition, NodePosition> = BTreeMap::new();
        for (ei, chain) in images.iter().enumerate() {
            let e = &graph.edges()[ei];
            for (node, img) in [
                (e.from, entry_start(&graph, &chain[0])),
                (e.to, entry_end(&graph, chain.last().unwrap())),
            ] {
                let pos = graph.canonical_node_position(node, 0);
                // Reduce to the canonical representative: F(n + k) = F(n) + k.
                let img = NodePosition {
                    node: img.node,
                    shift: img.shift - pos.shift,
                };
                let base = NodePosition {
                    node: pos.node,
                    shift: 0,
                };
                if let Some(prev) = node_image.get(&base) {
                    if *prev != img {
                        return Err(MapError::InconsistentAtNode(
                            graph.nodes()[pos.node].name.clone(),
                        ));
                    }
                } else {
                    node_image.insert(base, img);
                }
            }
        }
        let chain_len = images
            .iter()
            .map(|chain| {
                chain
                    .iter()
                    .map(|c| graph.edges()[c.edge].length.clone())
                    .sum()
            })
            .collect();
        Ok(MarkovMap {
            graph,
            images,
            chain_len,
        })
    }

    /// The underlying lifted graph.
    pub fn graph(&self) -> &LiftedGraph {
        &self.graph
    }
    /// Shared handle to the underlying lifted graph.
    pub fn graph_arc(&self) -> Arc<LiftedGraph> {
        Arc::clone(&self.graph)
    }
    /// Image chain of an edge.
    pub fn image(&self, e: EdgeId) -> &[ChainEntry] {
        &self.images[e]
    }
    /// Total length of the image chain of an edge.
    pub fn chain_length(&self, e: EdgeId) -> &Rational {
        &self.chain_len[e]
    }
    /// Expansion slope of the map on edge `e` (chain length / edge length).
    pub fn slope(&self, e: EdgeId) -> Rational {
        &self.chain_len[e] / &self.graph.edges()[e].length
    }

    /// Image of a node position.
    pub fn node_image(&self, pos: NodePosition) -> NodePosition {
        let pos = self.graph.canonical_node_position(pos.node, pos.shift);
        // Any incident edge occurrence determines the image.
        for (ei, chain) in self.images.iter().enumerate() {
            let e = &self.graph.edges()[ei];
            if self.graph.canonical_node_position(e.from, 0).node == pos.node {
                let delta = self.graph.canonical_node_position(e.from, 0).shift;
                let img = entry_start(&self.graph, &chain[0]);
                return NodePosition {
                    node: img.node,
                    shift: img.shift - delta + pos.shift,
                };
            }
            if self.graph.canonical_node_position(e.to, 0).node == pos.node {
                let delta = self.graph.canonical_node_position(e.to, 0).shift;
                let img = entry_end(&self.graph, chain.last().unwrap());
                return NodePosition {
                    node: img.node,
                    shift: img.shift - delta + pos.shift,
                };
            }
        }
        unreachable!("every node is an edge endpoint");
    }

    /// Evaluates the map at a point, exactly.
    pub fn evaluate(&self, p: &Point) -> Point {
        let e = p.edge();
        let lambda = self.slope(e);
        // Arc-length distance travelled along the chain.
        let mut d = self.graph.arc_on_edge(p) * &lambda;
        let chain = &self.images[e];
        for (i, c) in chain.iter().enumerate() {
            let len = &self.graph.edges()[c.edge].length;
            // Land inside this entry (or exactly at its end for the last).
            if &d < len || (i + 1 == chain.len() && &d <= len) {
                let t = if c.reversed {
                    Rational::one() - &d / len
                } else {
                    &d / len
                };
                return self.graph.point(c.edge, t, c.shift + p.shift());
            }
            if &d == len {
                // Exactly at the shared endpoint of entries i and i+1.
                let pos = entry_end(&self.graph, c);
                return self.graph.node_point(NodePosition {
                    node: pos.node,
                    shift: pos.shift + p.shift(),
                });
            }
            d -= len;
        }
        unreachable!("arc position exceeds chain length");
    }

    /// The orbit `F(p), F^2(p), ..., F^n(p)`.
    pub fn iterate(&self, p: &Point, n: usize) -> Vec<Point> {
        let mut out = Vec::with_capacity(n);
        let mut cur = p.clone();
        for _ in 0..n {
            cur = self.evaluate(&cur);
            out.push(cur.clone());
        }
        out
    }

    /// The circle restriction `r . F` on the spine, as an exact
    /// piecewise-linear lifting of degree one: breakpoints `(x, y)` with
    /// `x` ranging over `[0, 1]`.
    pub fn circle_restriction(&self) -> crate::circle_lift::PlLift {
        let g = &self.graph;
        let mut pts: Vec<(Rational, Rational)> = Vec::new();
        for &ei in g.spine_edges() {
            let e = &g.edges()[ei];
            let x0 = g.nodes()[e.from].spine_coord.clone().unwrap();
            let lambda = self.slope(ei);
            // Breakpoints at the chain's internal nodes, pulled back to the
            // source edge.
            let chain = &self.images[ei];
            let mut cum = Rational::zero();
            let start = entry_start(g, &chain[0]);
            let mut ys = vec![g.r_of_position(start)];
            let mut xs = vec![x0.clone()];
            for c in chain {
                cum += &g.edges()[c.edge].length;
                xs.push(&x0 + &cum / &lambda);
                ys.push(g.r_of_position(entry_end(g, c)));
            }
            for (x, y) in xs.into_iter().zip(ys) {
                if pts.last().map(|l: &(Rational, Rational)| l.0 != x) != Some(false) {
                    pts.push((x, y));
                } else {
                    debug_assert_eq!(pts.last().unwrap().1, y, "circle restriction continuity");
                }
            }
        }
        crate::circle_lift::PlLift::new(pts).expect("circle restriction is a valid degree-one lift")
    }

    /// For each branching point `z` (by spine coordinate), the set
    /// `r(F(r^{-1}(z)))`: the union, over all edges of the components attached
    /// at `z`, of the retraction of their image chains, as a sorted list of
    /// disjoint closed intervals (possibly degenerate).
    pub fn branch_value_ranges(&self) -> BTreeMap<Rational, Vec<(Rational, Rational)>> {
        let g = &self.graph;
        let mut out: BTreeMap<Rational, Vec<(Rational, Rational)>> = BTreeMap::new();
        for comp in g.components() {
            let z = g.nodes()[comp.attachment].spine_coord.clone().unwrap();
            let acc = out.entry(z).or_default();
            for &ei in &comp.edges {
                let chain = &self.images[ei];
                let mut pos = entry_start(g, &chain[0]);
                for c in chain {
                    let next = entry_end(g, c);
                    let a = g.r_of_position(pos);
                    let b = g.r_of_position(next);
                    let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
                    acc.push((lo, hi));
                    pos = next;
                }
            }
        }
        for intervals in out.values_mut() {
            *intervals = merge_intervals(std::mem::take(intervals));
        }
        out
    }
}

/// Merges a list of closed intervals into a sorted disjoint union.
pub fn merge_intervals(mut v: Vec<(Rational, Rational)>) -> Vec<(Rational, Rational)> {
    v.sort_by(|a, b| (&a.0, &a.1).cmp(&(&b.0, &b.1)));
    let mut out: Vec<(Rational, Rational)> = Vec::new();
    for (lo, hi) in v {
        match out.last_mut() {
            Some(last) if lo <= last.1 => {
                if hi > last.1 {
                    last.1 = hi;
                }
            }
            _ => out.push((lo, hi)),
        }
    }
    out
}
