//! Orbit-based computations: rotation numbers of individual points and the
//! set of minimal periods (mod 1) realised inside a rational rotation class.
//!
//! Periodic points of an affine Markov map are found symbolically: every
//! periodic (mod 1) point is either a vertex of the partition or the unique
//! fixed point of the affine composition along the closed walk given by its
//! itinerary in the Markov graph. Each candidate is re-verified by exact
//! iteration on the lifted space, so the reported periods are certified; the
//! search is exhaustive unless the expansion budget runs out.

use std::collections::{BTreeMap, BTreeSet, HashMap, HashSet};

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Zero};

use crate::lifted_graph::{NodePosition, Point};
use crate::markov_graph::MarkovGraph;
use crate::markov_map::MarkovMap;
use crate::rational::Rational;

/// A rotation-number estimate for a single point.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum RhoEstimate {
    /// The orbit was detected to be eventually periodic (mod 1); the
    /// rotation number is exact.
    Exact {
        value: Rational,
        preperiod: u32,
        period: u32,
    },
    /// Finite-horizon estimate `(r(F^n x) - r(x)) / n`.
    Empirical { value: Rational, horizon: u32 },
}

impl RhoEstimate {
    pub fn value(&self) -> &Rational {
        match self {
            RhoEstimate::Exact { value, .. } => value,
            RhoEstimate::Empirical { value, .. } => value,
        }
    }
}

/// Rotation number of the orbit of `x`, by exact iteration up to `horizon`
/// steps. If the orbit revisits a point mod 1 the limit is exact:
/// `F^{s2}(x) = F^{s1}(x) + k` gives rotation number `k / (s2 - s1)`.
pub fn rho_point(map: &MarkovMap, x: &Point, horizon: u32) -> RhoEstimate {
    let g = map.graph_arc();
    let mut seen: HashMap<Point, (u32, i64)> = HashMap::new();
    let mut cur = x.clone();
    for step in 0..=horizon {
        let class = g.translate(&cur, -cur.shift());
        let k = cur.shift();
        if let Some(&(s1, k1)) = seen.get(&class) {
            let period = step - s1;
            return RhoEstimate::Exact {
                value: Rational::new(BigInt::from(k - k1), BigInt::from(period)),
                preperiod: s1,
                period,
            };
        }
        seen.insert(class, (step, k));
        if step < horizon {
            cur = map.evaluate(&cur);
        }
    }
    let r0 = g.retract(x);
    let rn = g.retract(&cur);
    RhoEstimate::Empirical {
        value: (rn - r0) / Rational::from_integer(BigInt::from(horizon)),
        horizon,
    }
}

/// A periodic vertex orbit: the partition vertices form a finite functional
/// graph under `F` (mod 1), and each of its cycles is a periodic orbit.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct VertexOrbit {
    /// A representative vertex on the cycle.
    pub representative: NodePosition,
    /// Minimal period (mod 1).
    pub period: u64,
    /// Total translation over one period: `F^period(v) = v + shift`.
    pub shift: i64,
}

impl VertexOrbit {
    /// The rotation number `shift / period` of the orbit.
    pub fn rotation(&self) -> Rational {
        Rational::new(BigInt::from(self.shift), BigInt::from(self.period))
    }
}

/// All periodic vertex orbits (one entry per cycle of the vertex dynamics).
pub fn vertex_periodic_orbits(map: &MarkovMap) -> Vec<VertexOrbit> {
    let g = map.graph();
    let n = g.nodes().len();
    // Functional graph on canonical vertices at shift 0 (node1 is the +1
    // copy of node0 and is skipped).
    let node1 = g.node1();
    let mut done = vec![false; n];
    let mut out = Vec::new();
    for v0 in 0..n {
        if done[v0] || v0 == node1 {
            continue;
        }
        // Walk the orbit of vertex v0, recording visit steps and shifts.
        let mut visit: HashMap<usize, (u64, i64)> = HashMap::new();
        let mut cur = g.canonical_node_position(v0, 0);
        let mut acc: i64 = 0;
        let mut step: u64 = 0;
        loop {
            let key = cur.node;
            if let Some(&(s1, a1)) = visit.get(&key) {
                // Cycle of length step - s1 detected; report it once, from
                // its smallest-index node.
                let period = step - s1;
                let shift = acc - a1;
                let cycle_nodes: Vec<usize> = visit
                    .iter()
                    .filter(|(_, &(s, _))| s >= s1)
                    .map(|(&v, _)| v)
                    .collect();
                let new = cycle_nodes.iter().any(|&v| !done[v]);
                for &v in &cycle_nodes {
                    done[v] = true;
                }
                if new {
                    let repr = *cycle_nodes.iter().min().unwrap();
                    out.push(VertexOrbit {
                        representative: g
                            .canonical_node_position(repr, 0),
                        period,
                        shift,
                    });
                }
                break;
            }
            visit.insert(key, (step, acc));
            done[key] = true;
            let img = map.node_image(cur);
            acc += img.shift;
            cur = NodePosition {
                node: img.node,
                shift: 0,
            };
            step += 1;
        }
    }
    out
}

/// A certified periodic point: `F^period(point) = point + shift` exactly and
/// no smaller iterate returns to `point` modulo integer translation.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PeriodWitness {
    pub point: Point,
    /// Minimal period (mod 1).
    pub period: u64,
    /// Total translation over one period.
    pub shift: i64,
}

/// Result of a period search in a rotation class.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PeriodSearch {
    /// Certified minimal periods found (each verified by exact iteration).
    pub periods: BTreeSet<u64>,
    /// One certified witness per confirmed period.
    pub witnesses: BTreeMap<u64, PeriodWitness>,
    /// Whether the search was exhaustive. If false, `periods` is a certified
    /// subset of the true set but absences are not certified.
    pub complete: bool,
    /// Number of DFS arrow expansions consumed.
    pub expansions: u64,
}

/// The set of minimal periods (mod 1) of periodic points with rotation
/// number `p/q` (in lowest terms), intersected with `[1, n_max]`.
///
/// Candidates come from (a) periodic vertex orbits and (b) fixed points of
/// affine compositions along closed walks of length `nq` and weight `np` in
/// the Markov graph. Every candidate's minimal period is re-verified by
/// exact iteration. `budget` bounds the total number of DFS expansions.
pub fn periods_for_rotation(
    map: &MarkovMap,
    p: i64,
    q: u64,
    n_max: u64,
    budget: u64,
) -> PeriodSearch {
    assert!(q >= 1, "denominator must be positive");
    let gcd = (p.unsigned_abs()).gcd(&q);
    let (p, q) = if gcd > 1 {
        (p / gcd as i64, q / gcd)
    } else {
        (p, q)
    };
    let mut periods = BTreeSet::new();
    let mut witnesses: BTreeMap<u64, PeriodWitness> = BTreeMap::new();
    // (a) Vertex orbits.
    for orbit in vertex_periodic_orbits(map) {
        if orbit.period <= n_max
            && orbit.shift * q as i64 == p * orbit.period as i64
            && periods.insert(orbit.period)
        {
            witnesses.insert(
                orbit.period,
                PeriodWitness {
                    point: map.graph().node_point(orbit.representative),
                    period: orbit.period,
                    shift: orbit.shift,
                },
            );
        }
    }
    // (b) Closed-walk search per candidate period nq <= n_max.
    let graph = MarkovGraph::from_map(map);
    let mut expansions: u64 = 0;
    let mut complete = true;
    let mut n = 1u64;
    while n * q <= n_max {
        let target_len = (n * q) as usize;
        let target_weight = p * n as i64;
        if !periods.contains(&(n * q)) {
            match search_period(
                map,
                &graph,
                target_len,
                target_weight,
                budget,
                &mut expansions,
            ) {
                Some(Some(x)) => {
                    periods.insert(n * q);
                    witnesses.insert(
                        n * q,
                        PeriodWitness {
                            point: x,
                            period: n * q,
                            shift: target_weight,
                        },
                    );
                }
                Some(None) => {}
                None => {
                    complete = false;
                }
            }
        }
        n += 1;
    }
    PeriodSearch {
        periods,
        witnesses,
        complete,
        expansions,
    }
}

/// Searches for a periodic point of minimal period `len` realising total
/// shift `weight`. Returns `Some(Some(x))` when a certified witness `x`
/// exists, `Some(None)` when the exhaustive walk enumeration excludes one,
/// `None` when the budget ran out first.
fn search_period(
    map: &MarkovMap,
    graph: &MarkovGraph,
    len: usize,
    weight: i64,
    budget: u64,
    expansions: &mut u64,
) -> Option<Option<Point>> {
    let nv = graph.node_count();
    let mut seen_walks: HashSet<Vec<u32>> = HashSet::new();
    for root in 0..nv {
        // Backward reachability bounds: b[k][v] = (min, max) weight over
        // k-step walks from v to root visiting only nodes >= root.
        let mut b: Vec<Vec<Option<(i64, i64)>>> = vec![vec![None; nv]; len + 1];
        b[0][root] = Some((0, 0));
        for k in 1..=len {
            for (ai, a) in graph.arrows().iter().enumerate() {
                let _ = ai;
                if a.from < root || a.to < root {
                    continue;
                }
                if let Some((lo, hi)) = b[k - 1][a.to] {
                    let cand = (lo + a.weight, hi + a.weight);
                    b[k][a.from] = Some(match b[k][a.from] {
                        None => cand,
                        Some((l, h)) => (l.min(cand.0), h.max(cand.1)),
                    });
                }
            }
        }
        let Some((lo, hi)) = b[len][root] else {
            continue;
        };
        if weight < lo || weight > hi {
            continue;
        }
        // DFS over walks of length `len` from root back to root, visiting
        // only nodes >= root (each closed walk has a rotation starting at
        // its minimal node, so this enumeration is exhaustive up to
        // rotation).
        let mut arrows_path: Vec<u32> = Vec::new();
        let mut iters: Vec<usize> = vec![0];
        let mut nodes_path: Vec<usize> = vec![root];
        let mut acc: i64 = 0;
        while let Some(pos) = iters.last_mut() {
            let v = *nodes_path.last().unwrap();
            let depth = arrows_path.len();
            if depth == len {
                if v == root && acc == weight {
                    if seen_walks.insert(canonical_rotation(&arrows_path)) {
                        for x in walk_fixed_points(map, graph, root, &arrows_path, len) {
                            if verify_minimal_period(map, &x, len, weight) {
                                return Some(Some(x));
                            }
                        }
                    }
                }
                // Backtrack.
                iters.pop();
                nodes_path.pop();
                if let Some(&a) = arrows_path.last() {
                    acc -= graph.arrows()[a as usize].weight;
                }
                arrows_path.pop();
                continue;
            }
            let out = graph.out_arrows(v);
            if *pos < out.len() {
                let a = out[*pos];
                *pos += 1;
                let arrow = &graph.arrows()[a];
                if arrow.to < root {
                    continue;
                }
                let remaining = len - depth - 1;
                let Some((lo, hi)) = b[remaining][arrow.to] else {
                    continue;
                };
                let need = weight - acc - arrow.weight;
                if need < lo || need > hi {
                    continue;
                }
                *expansions += 1;
                if *expansions > budget {
                    return None;
                }
                arrows_path.push(a as u32);
                nodes_path.push(arrow.to);
                acc += arrow.weight;
                iters.push(0);
            } else {
                iters.pop();
                nodes_path.pop();
                if let Some(&a) = arrows_path.last() {
                    acc -= graph.arrows()[a as usize].weight;
                }
                arrows_path.pop();
            }
        }
    }
    Some(None)
}

/// Booth's lexicographically-minimal rotation, used to deduplicate closed
/// walks that differ only by their starting point.
fn canonical_rotation(seq: &[u32]) -> Vec<u32> {
    let n = seq.len();
    if n == 0 {
        return Vec::new();
    }
    let mut best = 0usize;
    for cand in 1..n {
        for k in 0..n {
            let a = seq[(best + k) % n];
            let c = seq[(cand + k) % n];
            if c < a {
                best = cand;
                break;
            }
            if c > a {
                break;
            }
        }
    }
    (0..n).map(|k| seq[(best + k) % n]).collect()
}

/// Composes the affine maps along a closed walk (given by arrow indices
/// starting at `root`) and solves for fixed points of the composition. When
/// the composition is the identity on a whole arc, several sample points are
/// returned: the finitely many arc points with a smaller minimal period can
/// invalidate at most one sample each.
fn walk_fixed_points(
    map: &MarkovMap,
    graph: &MarkovGraph,
    root: usize,
    arrows: &[u32],
    len: usize,
) -> Vec<Point> {
    let g = map.graph();
    // psi(t) = alpha t + beta maps the sub-arc [a, b] of the root edge
    // bijectively onto [0, 1] of the current edge.
    let mut alpha = Rational::one();
    let mut beta = Rational::zero();
    let mut a = Rational::zero();
    let mut b = Rational::one();
    let mut cur = root;
    for &ai in arrows {
        let arrow = &graph.arrows()[ai as usize];
        debug_assert_eq!(arrow.from, cur);
        let chain = map.image(cur);
        let total = map.chain_length(cur).clone();
        // Locate the unique chain entry matching this arrow.
        let mut cum = Rational::zero();
        let mut found = None;
        for entry in chain {
            let l = g.edges()[entry.edge].length.clone();
            if entry.edge == arrow.to && entry.shift == arrow.weight {
                found = Some((cum.clone(), l.clone()));
                break;
            }
            cum += l;
        }
        let (cum, l) = found.expect("arrow corresponds to a chain entry");
        // Pre-arc in t-coordinates of the current edge.
        let t0 = &cum / &total;
        let t1 = (&cum + &l) / &total;
        // Restrict [a, b] to psi^{-1}([t0, t1]).
        let inv = |y: &Rational| (y - &beta) / &alpha;
        let (mut na, mut nb) = (inv(&t0), inv(&t1));
        if na > nb {
            std::mem::swap(&mut na, &mut nb);
        }
        if na > a {
            a = na;
        }
        if nb < b {
            b = nb;
        }
        if a > b {
            return Vec::new(); // numerically impossible for a valid walk
        }
        // Next-edge coordinate: m(t) = (t * total - cum) / l, reflected when
        // the chain traverses the edge backwards.
        let m_slope = &total / &l;
        let m_off = -&cum / &l;
        let entry_reversed = map
            .image(cur)
            .iter()
            .find(|e| e.edge == arrow.to && e.shift == arrow.weight)
            .unwrap()
            .reversed;
        let (ms, mo) = if entry_reversed {
            (-m_slope.clone(), Rational::one() - m_off.clone())
        } else {
            (m_slope.clone(), m_off.clone())
        };
        alpha = &ms * &alpha;
        beta = ms * beta + mo;
        cur = arrow.to;
    }
    debug_assert_eq!(cur, root);
    // Solve alpha t + beta = t on [a, b].
    let one = Rational::one();
    if alpha == one {
        if !beta.is_zero() {
            return Vec::new();
        }
        // The whole arc is fixed. Sample len + 1 distinct interior points:
        // at most d(len) <= len of them can sit on an exceptional point of
        // smaller minimal period.
        let denom = Rational::from_integer(BigInt::from(len as i64 + 2));
        return (1..=len as i64 + 1)
            .map(|j| {
                let t = &a + (&b - &a) * Rational::from_integer(BigInt::from(j)) / &denom;
                g.point(root, t, 0)
            })
            .collect();
    }
    let t = &beta / (&one - &alpha);
    if t < a || t > b {
        return Vec::new();
    }
    vec![g.point(root, t, 0)]
}

/// Verifies by exact iteration that `x` has minimal period `len` (mod 1)
/// with total shift `weight`.
fn verify_minimal_period(map: &MarkovMap, x: &Point, len: usize, weight: i64) -> bool {
    let g = map.graph_arc();
    let orbit = map.iterate(x, len);
    for (k, pt) in orbit.iter().enumerate() {
        let step = k + 1;
        // Does F^step(x) equal x + s for some integer s?
        let shifted = g.translate(pt, -(pt.shift() - x.shift()));
        if &shifted == x {
            let s = pt.shift() - x.shift();
            return step == len && s == weight;
        }
    }
    false
}

#[cfg(test)]
mod tests {
    use super::canonical_rotation;

    #[test]
    fn canonical_rotation_minimal() {
        assert_eq!(canonical_rotation(&[2, 1, 3]), vec![1, 3, 2]);
        assert_eq!(canonical_rotation(&[1, 1, 1]), vec![1, 1, 1]);
        assert_eq!(canonical_rotation(&[]), Vec::<u32>::new());
    }
}
