//! Fundamental domains of lifted graph spaces.
//!
//! A lifted space is an infinite graph `T` containing a distinguished copy of
//! the real line (the *spine*), invariant under the unit translation
//! `x -> x + 1`, such that every connected component of `T` minus the spine is
//! a finite graph whose closure meets the spine at exactly one point, and
//! there are finitely many such components per unit period. This module
//! stores one fundamental domain: the spine segment `[0, 1]` subdivided into
//! edges, plus the off-spine components attached in `(0, 1)`.
//!
//! Points of the infinite space are addressed as [`Point`]s: an edge of the
//! fundamental domain, a parameter `t` in `[0, 1]` along it, and an integer
//! translation `shift`. The node at coordinate `1` is the `+1` translate of
//! the node at coordinate `0`.

use std::collections::{BTreeMap, VecDeque};
use std::fmt::Write as _;

use num_traits::{One, Signed, Zero};
use thiserror::Error;

use crate::rational::{abs, rational_to_string, Rational};

/// Index of a node in the fundamental domain.
pub type NodeId = usize;
/// Index of an edge in the fundamental domain.
pub type EdgeId = usize;

/// A node of the fundamental domain.
#[derive(Debug, Clone)]
pub struct Node {
    /// Unique human-readable identifier.
    pub name: String,
    /// Spine coordinate in `[0, 1]`, or `None` for off-spine nodes.
    pub spine_coord: Option<Rational>,
}

/// An edge (basic interval) of the fundamental domain.
#[derive(Debug, Clone)]
pub struct Edge {
    /// Unique human-readable identifier.
    pub name: String,
    /// Start node. For spine edges this is the endpoint with the smaller
    /// spine coordinate.
    pub from: NodeId,
    /// End node.
    pub to: NodeId,
    /// Positive length. For spine edges this must equal the coordinate span.
    pub length: Rational,
    /// Whether the edge lies on the spine.
    pub on_spine: bool,
}

/// An off-spine connected component of the fundamental domain.
#[derive(Debug, Clone)]
pub struct Component {
    /// Edges of the component.
    pub edges: Vec<EdgeId>,
    /// Nodes of the component, including the attachment node.
    pub nodes: Vec<NodeId>,
    /// The unique spine node where the component meets the spine.
    pub attachment: NodeId,
}

/// Problems detected while validating a candidate lifted graph.
#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ValidationError {
    #[error("duplicate node name {0:?}")]
    DuplicateNodeName(String),
    #[error("duplicate edge name {0:?}")]
    DuplicateEdgeName(String),
    #[error("edge {0:?} has non-positive length")]
    NonPositiveLength(String),
    #[error("edge {0:?} references a missing node")]
    DanglingEdge(String),
    #[error("spine coordinate of node {0:?} is outside [0, 1]")]
    CoordOutOfRange(String),
    #[error("two nodes share spine coordinate {0}")]
    DuplicateCoord(String),
    #[error("no node at spine coordinate 0 (or none at 1)")]
    MissingSpineEnds,
    #[error("spine edge {0:?} must join consecutive spine nodes with matching length")]
    BadSpineEdge(String),
    #[error("the spine edges do not tile [0, 1]: {0}")]
    SpineNotTiled(String),
    #[error("off-spine component containing edge {0:?} meets the spine at {1} points (expected 1)")]
    MultiAttachComponent(String, usize),
    #[error("off-spine component containing edge {0:?} is attached at coordinate 0 (mod 1)")]
    AttachAtZero(String),
    #[error("node {0:?} is not reachable from the spine")]
    Disconnected(String),
}

/// Errors from path straightening.
#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum PathError {
    #[error("path step {0} does not start where step {1} ended")]
    Broken(usize, usize),
    #[error("path is empty")]
    Empty,
    #[error(
        "path does not escape to the right: its endpoint must be a spine point strictly \
         to the right of every earlier position"
    )]
    NotEscaping,
}

/// A point of the infinite lifted space, in canonical form.
///
/// Canonical form: if the point is interior to an edge, `t` is in `(0, 1)`;
/// if it is a node, it is hosted on the smallest-index incident edge with the
/// smallest `t`, and node `1` is rewritten as node `0` with `shift + 1`.
/// Canonical points compare equal iff they are the same point of the space.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Point {
    edge: EdgeId,
    t: Rational,
    shift: i64,
}

impl Point {
    /// Hosting edge in the fundamental domain.
    pub fn edge(&self) -> EdgeId {
        self.edge
    }
    /// Parameter along the hosting edge, in `[0, 1]`.
    pub fn t(&self) -> &Rational {
        &self.t
    }
    /// Integer translation applied to the fundamental domain.
    pub fn shift(&self) -> i64 {
        self.shift
    }
}

/// One whole-edge step of a path.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct PathStep {
    pub edge: EdgeId,
    /// `true` to traverse from `from` to `to`.
    pub forward: bool,
    /// Translation applied to the edge.
    pub shift: i64,
}

impl PathStep {
    pub fn new(edge: EdgeId, forward: bool, shift: i64) -> Self {
        PathStep {
            edge,
            forward,
            shift,
        }
    }
}

/// A combinatorial path traversing whole edges of the lifted space.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GraphPath {
    pub steps: Vec<PathStep>,
}

/// A node of the infinite space: a fundamental-domain node plus a shift, in
/// canonical form (node `1` is rewritten as node `0` shifted by `+1`).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct NodePosition {
    pub node: NodeId,
    pub shift: i64,
}

/// A validated fundamental domain of a lifted space.
#[derive(Debug, Clone)]
pub struct LiftedGraph {
    nodes: Vec<Node>,
    edges: Vec<Edge>,
    /// Node at spine coordinate 0.
    node0: NodeId,
    /// Node at spine coordinate 1 (the `+1` translate of `node0`).
    node1: NodeId,
    /// Spine edges ordered by increasing coordinate.
    spine_order: Vec<EdgeId>,
    /// Component index of each edge (`None` for spine edges).
    component_of_edge: Vec<Option<usize>>,
    components: Vec<Component>,
    /// Per component: distances between component nodes (dense matrix keyed
    /// by position in `Component::nodes`).
    component_dist: Vec<Vec<Vec<Rational>>>,
    /// For each node, incident `(edge, is_from_end)` pairs sorted by edge id.
    incidence: Vec<Vec<(EdgeId, bool)>>,
}

impl LiftedGraph {
    /// Validates and builds a lifted graph from raw nodes and edges.
    pub fn new(nodes: Vec<Node>, edges: Vec<Edge>) -> Result<Self, ValidationError> {
        // Unique names, sane references and lengths.
        let mut seen = BTreeMap::new();
        for n in &nodes {
            if seen.insert(n.name.clone(), ()).is_some() {
                return Err(ValidationError::DuplicateNodeName(n.name.clone()));
            }
        }
        let mut seen = BTreeMap::new();
        for e in &edges {
            if seen.insert(e.name.clone(), ()).is_some() {
                return Err(ValidationError::DuplicateEdgeName(e.name.clone()));
            }
            if e.from >= nodes.len() || e.to >= nodes.len() {
                return Err(ValidationError::DanglingEdge(e.name.clone()));
            }
            if !e.length.is_positive() {
                return Err(ValidationError::NonPositiveLength(e.name.clone()));
            }
        }

        // Spine coordinates: all in [0, 1], pairwise distinct, with both ends.
        let mut coords: Vec<(Rational, NodeId)> = Vec::new();
        for (i, n) in nodes.iter().enumerate() {
            if let Some(c) = &n.spine_coord {
                if c.is_negative() || c > &Rational::one() {
                    return Err(ValidationError::CoordOutOfRange(n.name.clone()));
                }
                coords.push((c.clone(), i));
            }
        }
        coords.sort_by(|a, b| a.0.cmp(&b.0));
        for w in coords.windows(2) {
            if w[0].0 == w[1].0 {
                return Err(ValidationError::DuplicateCoord(rational_to_string(&w[0].0)));
            }
        }
        let node0 = coords
            .first()
            .filter(|(c, _)| c.is_zero())
            .map(|&(_, i)| i)
            .ok_or(ValidationError::MissingSpineEnds)?;
        let node1 = coords
            .last()
            .filter(|(c, _)| c.is_one())
            .map(|&(_, i)| i)
            .ok_or(ValidationError::MissingSpineEnds)?;

        // Spine edges must join consecutive coordinates and tile [0, 1].
        let coord_of = |n: NodeId| nodes[n].spine_coord.clone();
        let mut spine: Vec<(Rational, EdgeId)> = Vec::new();
        for (i, e) in edges.iter().enumerate() {
            if e.on_spine {
                let (cf, ct) = match (coord_of(e.from), coord_of(e.to)) {
                    (Some(a), Some(b)) => (a, b),
                    _ => return Err(ValidationError::BadSpineEdge(e.name.clone())),
                };
                if &ct - &cf != e.length {
                    return Err(ValidationError::BadSpineEdge(e.name.clone()));
                }
                spine.push((cf, i));
            }
        }
        spine.sort_by(|a, b| a.0.cmp(&b.0));
        if spine.is_empty() {
            return Err(ValidationError::SpineNotTiled("no spine edges".into()));
        }
        // Tiling: edge i must start where edge i-1 ended; first at 0, last at 1.
        let mut cursor = Rational::zero();
        for &(ref cf, e) in &spine {
            if cf != &cursor {
                return Err(ValidationError::SpineNotTiled(format!(
                    "gap or overlap at coordinate {}",
                    rational_to_string(&cursor)
                )));
            }
            cursor = cf + &edges[e].length;
        }
        if !cursor.is_one() {
            return Err(ValidationError::SpineNotTiled(format!(
                "spine ends at {}",
                rational_to_string(&cursor)
            )));
        }
        // Every spine-coordinate node must actually be a spine-edge endpoint.
        for &(_, n) in &coords {
            let used = edges
                .iter()
                .any(|e| e.on_spine && (e.from == n || e.to == n));
            if !used {
                return Err(ValidationError::SpineNotTiled(format!(
                    "node {:?} has a spine coordinate but no spine edge",
                    nodes[n].name
                )));
            }
        }
        let spine_order: Vec<EdgeId> = spine.iter().map(|&(_, e)| e).collect();

        // Off-spine components via union over off-spine edges.
        let mut comp_of_node: Vec<Option<usize>> = vec![None; nodes.len()];
        let mut components: Vec<Component> = Vec::new();
        let mut component_of_edge: Vec<Option<usize>> = vec![None; edges.len()];
        for (i, e) in edges.iter().enumerate() {
            if e.on_spine || component_of_edge[i].is_some() {
                continue;
            }
            // Flood fill over off-spine edges, not crossing through the spine
            // (spine nodes are absorbing: they join the component but do not
            // propagate it along spine edges).
            let cid = components.len();
            let mut comp_edges = Vec::new();
            let mut comp_nodes = Vec::new();
            let mut queue = VecDeque::from([i]);
            component_of_edge[i] = Some(cid);
            while let Some(ei) = queue.pop_front() {
                comp_edges.push(ei);
                for n in [edges[ei].from, edges[ei].to] {
                    if nodes[n].spine_coord.is_some() {
                        // Spine nodes may attach several components; record
                        // membership locally but do not cross the spine.
                        if !comp_nodes.contains(&n) {
                            comp_nodes.push(n);
                        }
                        continue;
                    }
                    if comp_of_node[n].is_none() {
                        comp_of_node[n] = Some(cid);
                        comp_nodes.push(n);
                    }
                    for (j, e2) in edges.iter().enumerate() {
                        if !e2.on_spine
                            && component_of_edge[j].is_none()
                            && (e2.from == n || e2.to == n)
                        {
                            component_of_edge[j] = Some(cid);
                            queue.push_back(j);
                        }
                    }
                }
            }
            let attachments: Vec<NodeId> = comp_nodes
                .iter()
                .copied()
                .filter(|&n| nodes[n].spine_coord.is_some())
                .collect();
            if attachments.len() != 1 {
                return Err(ValidationError::MultiAttachComponent(
                    edges[i].name.clone(),
                    attachments.len(),
                ));
            }
            let attachment = attachments[0];
            let c = nodes[attachment].spine_coord.clone().unwrap();
            if c.is_zero() || c.is_one() {
                return Err(ValidationError::AttachAtZero(edges[i].name.clone()));
            }
            comp_nodes.sort_unstable();
            comp_edges.sort_unstable();
            components.push(Component {
                edges: comp_edges,
                nodes: comp_nodes,
                attachment,
            });
        }

        // Every node must be on the spine or in a component.
        for (n, node) in nodes.iter().enumerate() {
            if node.spine_coord.is_none() && comp_of_node[n].is_none() {
                return Err(ValidationError::Disconnected(node.name.clone()));
            }
        }

        // Per-component all-pairs shortest paths (Floyd-Warshall; components
        // are tiny). Distances use edge lengths.
        let mut component_dist = Vec::new();
        for comp in &components {
            let idx: BTreeMap<NodeId, usize> = comp
                .nodes
                .iter()
                .enumerate()
                .map(|(k, &n)| (n, k))
                .collect();
            let m = comp.nodes.len();
            let inf = Rational::from_integer(num_bigint::BigInt::from(1_000_000_000i64));
            let mut d = vec![vec![inf.clone(); m]; m];
            for (k, row) in d.iter_mut().enumerate() {
                row[k] = Rational::zero();
            }
            for &ei in &comp.edges {
                let a = idx[&edges[ei].from];
                let b = idx[&edges[ei].to];
                if edges[ei].length < d[a][b] {
                    d[a][b] = edges[ei].length.clone();
                    d[b][a] = edges[ei].length.clone();
                }
            }
            for k in 0..m {
                for a in 0..m {
                    for b in 0..m {
                        let via = &d[a][k] + &d[k][b];
                        if via < d[a][b] {
                            d[a][b] = via;
                        }
                    }
                }
            }
            component_dist.push(d);
        }

        // Incidence lists sorted by edge id.
        let mut incidence: Vec<Vec<(EdgeId, bool)>> = vec![Vec::new(); nodes.len()];
        for (i, e) in edges.iter().enumerate() {
            incidence[e.from].push((i, true));
            incidence[e.to].push((i, false));
        }

        Ok(LiftedGraph {
            nodes,
            edges,
            node0,
            node1,
            spine_order,
            component_of_edge,
            components,
            component_dist,
            incidence,
        })
    }

    /// All nodes.
    pub fn nodes(&self) -> &[Node] {
        &self.nodes
    }
    /// All edges.
    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }
    /// Node at spine coordinate 0.
    pub fn node0(&self) -> NodeId {
        self.node0
    }
    /// Node at spine coordinate 1 (identified with `node0 + 1`).
    pub fn node1(&self) -> NodeId {
        self.node1
    }
    /// Spine edges in increasing coordinate order.
    pub fn spine_edges(&self) -> &[EdgeId] {
        &self.spine_order
    }
    /// Off-spine components.
    pub fn components(&self) -> &[Component] {
        &self.components
    }
    /// Component index of an edge (`None` for spine edges).
    pub fn component_of_edge(&self, e: EdgeId) -> Option<usize> {
        self.component_of_edge[e]
    }

    /// Branching points of the fundamental domain: attachment nodes of the
    /// off-spine components, with their spine coordinates, sorted by
    /// coordinate.
    pub fn branching_points(&self) -> Vec<(NodeId, Rational)> {
        let mut out: Vec<(NodeId, Rational)> = self
            .components
            .iter()
            .map(|c| {
                (
                    c.attachment,
                    self.nodes[c.attachment].spine_coord.clone().unwrap(),
                )
            })
            .collect();
        out.sort_by(|a, b| a.1.cmp(&b.1));
        out.dedup_by(|a, b| a.0 == b.0);
        out
    }

    /// Edge lookup by name.
    pub fn edge_by_name(&self, name: &str) -> Option<EdgeId> {
        self.edges.iter().position(|e| e.name == name)
    }
    /// Node lookup by name.
    pub fn node_by_name(&self, name: &str) -> Option<NodeId> {
        self.nodes.iter().position(|n| n.name == name)
    }

    /// Canonicalizes a node-plus-shift: node `1` becomes node `0` with
    /// `shift + 1`.
    pub fn canonical_node_position(&self, node: NodeId, shift: i64) -> NodePosition {
        if node == self.node1 {
            NodePosition {
                node: self.node0,
                shift: shift + 1,
            }
        } else {
            NodePosition { node, shift }
        }
    }

    /// Builds a canonical [`Point`] on edge `e` at parameter `t` (in `[0, 1]`)
    /// translated by `shift`.
    ///
    /// # Panics
    /// Panics if `t` is outside `[0, 1]`.
    pub fn point(&self, e: EdgeId, t: Rational, shift: i64) -> Point {
        assert!(
            !t.is_negative() && t <= Rational::one(),
            "point parameter outside [0, 1]"
        );
        if t.is_positive() && t < Rational::one() {
            return Point { edge: e, t, shift };
        }
        let node = if t.is_zero() {
            self.edges[e].from
        } else {
            self.edges[e].to
        };
        self.node_point(self.canonical_node_position(node, shift))
    }

    /// The canonical [`Point`] at a node position.
    pub fn node_point(&self, pos: NodePosition) -> Point {
        let pos = self.canonical_node_position(pos.node, pos.shift);
        // Occurrences of this node among edge endpoints; node0 also occurs as
        // node1 on edges one shift lower.
        let mut best: Option<(EdgeId, u8, i64)> = None; // (edge, t01, shift)
        let mut consider = |edge: EdgeId, t01: u8, shift: i64| {
            let cand = (edge, t01, shift);
            if best.is_none() || (cand.0, cand.1) < (best.unwrap().0, best.unwrap().1) {
                best = Some(cand);
            }
        };
        for &(e, is_from) in &self.incidence[pos.node] {
            consider(e, if is_from { 0 } else { 1 }, pos.shift);
        }
        if pos.node == self.node0 {
            for &(e, is_from) in &self.incidence[self.node1] {
                consider(e, if is_from { 0 } else { 1 }, pos.shift - 1);
            }
        }
        let (edge, t01, shift) = best.expect("node has no incident edge");
        Point {
            edge,
            t: if t01 == 0 {
                Rational::zero()
            } else {
                Rational::one()
            },
            shift,
        }
    }

    /// If the point is a node of the space, returns its canonical position.
    pub fn node_position_of(&self, p: &Point) -> Option<NodePosition> {
        if p.t.is_zero() {
            Some(self.canonical_node_position(self.edges[p.edge].from, p.shift))
        } else if p.t.is_one() {
            Some(self.canonical_node_position(self.edges[p.edge].to, p.shift))
        } else {
            None
        }
    }

    /// All representations `(edge, t, shift)` of a point (one per hosting
    /// edge endpoint for nodes; singleton for interior points), sorted by
    /// `(edge, t)`.
    pub fn representations(&self, p: &Point) -> Vec<(EdgeId, Rational, i64)> {
        match self.node_position_of(p) {
            None => vec![(p.edge, p.t.clone(), p.shift)],
            Some(pos) => {
                let mut out = Vec::new();
                for &(e, is_from) in &self.incidence[pos.node] {
                    out.push((
                        e,
                        if is_from {
                            Rational::zero()
                        } else {
                            Rational::one()
                        },
                        pos.shift,
                    ));
                }
                if pos.node == self.node0 {
                    for &(e, is_from) in &self.incidence[self.node1] {
                        out.push((
                            e,
                            if is_from {
                                Rational::zero()
                            } else {
                                Rational::one()
                            },
                            pos.shift - 1,
                        ));
                    }
                }
                out.sort_by(|a, b| (a.0, &a.1).cmp(&(b.0, &b.1)));
                out
            }
        }
    }

    /// Retraction to the spine: identity on the spine, constant equal to the
    /// attachment coordinate on each off-spine component. Returns the global
    /// real coordinate (shift applied).
    pub fn retract(&self, p: &Point) -> Rational {
        let e = &self.edges[p.edge];
        let base = if e.on_spine {
            let cf = self.nodes[e.from].spine_coord.clone().unwrap();
            cf + &p.t * &e.length
        } else {
            let cid = self.component_of_edge[p.edge].unwrap();
            self.nodes[self.components[cid].attachment]
                .spine_coord
                .clone()
                .unwrap()
        };
        base + Rational::from_integer(num_bigint::BigInt::from(p.shift))
    }

    /// Translates a point by `k` unit shifts.
    pub fn translate(&self, p: &Point, k: i64) -> Point {
        Point {
            edge: p.edge,
            t: p.t.clone(),
            shift: p.shift + k,
        }
    }

    /// The spine point with global real coordinate `x`, as a canonical point.
    pub fn spine_point(&self, x: &Rational) -> Point {
        let shift = crate::rational::floor_i64(x);
        let frac = x - Rational::from_integer(num_bigint::BigInt::from(shift));
        // Find the spine edge containing `frac`.
        for &e in &self.spine_order {
            let cf = self.nodes[self.edges[e].from].spine_coord.clone().unwrap();
            let ct = self.nodes[self.edges[e].to].spine_coord.clone().unwrap();
            if frac >= cf && frac <= ct {
                let t = (&frac - &cf) / &self.edges[e].length;
                return self.point(e, t, shift);
            }
        }
        unreachable!("spine tiles [0,1]")
    }

    /// Arc-length position of `p` along its hosting edge, measured from the
    /// `from` endpoint.
    pub fn arc_on_edge(&self, p: &Point) -> Rational {
        &p.t * &self.edges[p.edge].length
    }

    /// Distance from an off-spine point to its component's attachment node,
    /// measured inside the component.
    fn dist_to_attachment(&self, p: &Point) -> Rational {
        let e = &self.edges[p.edge];
        debug_assert!(!e.on_spine);
        let cid = self.component_of_edge[p.edge].unwrap();
        let comp = &self.components[cid];
        let idx = |n: NodeId| comp.nodes.iter().position(|&m| m == n).unwrap();
        let att = idx(comp.attachment);
        let d = &self.component_dist[cid];
        let s = self.arc_on_edge(p);
        let via_from = &s + &d[idx(e.from)][att];
        let via_to = (&e.length - &s) + &d[idx(e.to)][att];
        via_from.min(via_to)
    }

    /// The taxicab-through-spine metric of the lifted space.
    pub fn distance(&self, p: &Point, q: &Point) -> Rational {
        let ep = &self.edges[p.edge];
        let eq = &self.edges[q.edge];
        let comp_p = if ep.on_spine {
            None
        } else {
            Some((self.component_of_edge[p.edge].unwrap(), p.shift))
        };
        let comp_q = if eq.on_spine {
            None
        } else {
            Some((self.component_of_edge[q.edge].unwrap(), q.shift))
        };
        match (comp_p, comp_q) {
            (Some(a), Some(b)) if a == b => {
                // Same component copy: geodesic stays inside the component.
                let cid = a.0;
                let comp = &self.components[cid];
                let idx = |n: NodeId| comp.nodes.iter().position(|&m| m == n).unwrap();
                let d = &self.component_dist[cid];
                let sp = self.arc_on_edge(p);
                let sq = self.arc_on_edge(q);
                let mut best: Option<Rational> = None;
                if p.edge == q.edge {
                    best = Some(abs(&(&sp - &sq)));
                }
                let pf = idx(ep.from);
                let pt = idx(ep.to);
                let qf = idx(eq.from);
                let qt = idx(eq.to);
                let lp = &ep.length;
                let lq = &eq.length;
                for (dp, np) in [(sp.clone(), pf), (lp - &sp, pt)] {
                    for (dq, nq) in [(sq.clone(), qf), (lq - &sq, qt)] {
                        let cand = &dp + &d[np][nq] + &dq;
                        if best.as_ref().is_none_or(|b| &cand < b) {
                            best = Some(cand);
                        }
                    }
                }
                best.unwrap()
            }
            _ => {
                // Route through the spine.
                let mut total = abs(&(self.retract(p) - self.retract(q)));
                if comp_p.is_some() {
                    total += self.dist_to_attachment(p);
                }
                if comp_q.is_some() {
                    total += self.dist_to_attachment(q);
                }
                total
            }
        }
    }

    /// Start node position of a path step.
    pub fn step_start(&self, s: &PathStep) -> NodePosition {
        let e = &self.edges[s.edge];
        let n = if s.forward { e.from } else { e.to };
        self.canonical_node_position(n, s.shift)
    }

    /// End node position of a path step.
    pub fn step_end(&self, s: &PathStep) -> NodePosition {
        let e = &self.edges[s.edge];
        let n = if s.forward { e.to } else { e.from };
        self.canonical_node_position(n, s.shift)
    }

    /// Checks that consecutive steps share endpoints; returns the node
    /// position sequence (length = steps + 1).
    pub fn path_positions(&self, path: &GraphPath) -> Result<Vec<NodePosition>, PathError> {
        if path.steps.is_empty() {
            return Err(PathError::Empty);
        }
        let mut out = vec![self.step_start(&path.steps[0])];
        for (i, s) in path.steps.iter().enumerate() {
            if self.step_start(s) != *out.last().unwrap() {
                return Err(PathError::Broken(i, i.saturating_sub(1)));
            }
            out.push(self.step_end(s));
        }
        Ok(out)
    }

    /// Retraction value of a node position.
    pub fn r_of_position(&self, pos: NodePosition) -> Rational {
        let base = match &self.nodes[pos.node].spine_coord {
            Some(c) => c.clone(),
            None => {
                let cid = (0..self.components.len())
                    .find(|&c| self.components[c].nodes.contains(&pos.node))
                    .expect("off-spine node belongs to a component");
                self.nodes[self.components[cid].attachment]
                    .spine_coord
                    .clone()
                    .unwrap()
            }
        };
        base + Rational::from_integer(num_bigint::BigInt::from(pos.shift))
    }

    /// Straightens a path by cutting out backtracking, for paths that escape
    /// to the right.
    ///
    /// Precondition: the path is connected and its final position is a spine
    /// node strictly to the right (in retraction value) of every earlier
    /// position. The result is the unique direct path with the same
    /// endpoints: it visits no node position twice.
    pub fn straighten_path(&self, path: &GraphPath) -> Result<GraphPath, PathError> {
        let positions = self.path_positions(path)?;
        let end = *positions.last().unwrap();
        if self.nodes[end.node].spine_coord.is_none() {
            return Err(PathError::NotEscaping);
        }
        let r_end = self.r_of_position(end);
        for pos in &positions[..positions.len() - 1] {
            if self.r_of_position(*pos) >= r_end {
                return Err(PathError::NotEscaping);
            }
        }
        // Stack cut: whenever a node position repeats, drop the loop between
        // the two visits.
        let mut stack_steps: Vec<PathStep> = Vec::new();
        let mut stack_pos: Vec<NodePosition> = vec![positions[0]];
        for s in &path.steps {
            let end_pos = self.step_end(s);
            if let Some(k) = stack_pos.iter().position(|&p| p == end_pos) {
                stack_steps.truncate(k);
                stack_pos.truncate(k + 1);
            } else {
                stack_steps.push(s.clone());
                stack_pos.push(end_pos);
            }
        }
        debug_assert!(!stack_steps.is_empty(), "escaping path cannot collapse");
        Ok(GraphPath { steps: stack_steps })
    }

    /// GraphViz DOT rendering of the fundamental domain.
    pub fn export_dot(&self) -> String {
        let mut s = String::from("graph lifted_space {\n");
        for n in &self.nodes {
            match &n.spine_coord {
                Some(c) => {
                    let _ = writeln!(
                        s,
                        "  \"{}\" [label=\"{} ({})\", shape=box];",
                        n.name,
                        n.name,
                        rational_to_string(c)
                    );
                }
                None => {
                    let _ = writeln!(s, "  \"{}\";", n.name);
                }
            }
        }
        for e in &self.edges {
            let style = if e.on_spine { "bold" } else { "solid" };
            let _ = writeln!(
                s,
                "  \"{}\" -- \"{}\" [label=\"{} ({})\", style={}];",
                self.nodes[e.from].name,
                self.nodes[e.to].name,
                e.name,
                rational_to_string(&e.length),
                style
            );
        }
        s.push_str("}\n");
        s
    }
}
