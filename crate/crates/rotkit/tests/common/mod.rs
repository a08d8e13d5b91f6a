//! Shared helpers for integration tests: fixture loading, independent
//! re-verification oracles, and seeded random generators.

#![allow(dead_code)]

use std::collections::HashSet;

use num_traits::{One, Signed, Zero};
use rand::Rng;

use rotkit::circle_lift::{PlJump, PlLift};
use rotkit::covering_arith::{positively_covers, ChainStep, CoveringChain};
use rotkit::markov_graph::{Arrow, MarkovGraph};
use rotkit::markov_map::MarkovMap;
use rotkit::model::ModelFile;
use rotkit::orbit_engine::PeriodWitness;
use rotkit::{rat, Rational};

pub const FIXTURES: &[&str] = &["example-6-1", "example-6-2", "ex-1-8", "fig-4-combed"];

/// Loads a bundled fixture by stem name.
pub fn load_fixture(name: &str) -> MarkovMap {
    let path = format!("{}/../../fixtures/{name}.json", env!("CARGO_MANIFEST_DIR"));
    let text = std::fs::read_to_string(&path).unwrap_or_else(|e| panic!("{path}: {e}"));
    let model = ModelFile::from_json(&text).unwrap();
    let (_, map) = model.build().unwrap();
    map
}

/// Independent re-verification of a period witness by exact iteration: the
/// orbit must first return to the start, modulo integer translation, exactly
/// at `period`, and with translation `shift`.
pub fn verify_witness(map: &MarkovMap, w: &PeriodWitness) -> bool {
    let g = map.graph_arc();
    let orbit = map.iterate(&w.point, w.period as usize);
    for (k, pt) in orbit.iter().enumerate() {
        let back = g.translate(pt, -(pt.shift() - w.point.shift()));
        if back == w.point {
            return k + 1 == w.period as usize && pt.shift() - w.point.shift() == w.shift;
        }
    }
    false
}

/// Random labeled digraph with up to 8 nodes and labels in `[-3, 3]`.
pub fn random_digraph<R: Rng>(rng: &mut R) -> (Vec<String>, Vec<Arrow>) {
    let n = rng.gen_range(1..=8usize);
    let names = (0..n).map(|i| format!("n{i}")).collect();
    let mut arrows = Vec::new();
    for from in 0..n {
        for to in 0..n {
            if rng.gen_bool(0.3) {
                arrows.push(Arrow {
                    from,
                    to,
                    weight: rng.gen_range(-3..=3),
                });
            }
        }
    }
    (names, arrows)
}

/// Random nondecreasing piecewise-linear degree-one lift, with occasional
/// flat segments (so that rational rotation numbers actually occur).
pub fn random_monotone_lift<R: Rng>(rng: &mut R) -> PlLift {
    loop {
        let k = rng.gen_range(2..=6usize);
        let mut xs: Vec<Rational> = (0..k - 1).map(|_| rat(rng.gen_range(1..64), 64)).collect();
        xs.push(Rational::zero());
        xs.push(Rational::one());
        xs.sort();
        xs.dedup();
        let segs = xs.len() - 1;
        let weights: Vec<i64> = (0..segs).map(|_| rng.gen_range(0..=3i64)).collect();
        let total: i64 = weights.iter().sum();
        if total == 0 {
            continue;
        }
        let y0 = rat(rng.gen_range(-8..=8), 8);
        let mut pts = vec![(xs[0].clone(), y0.clone())];
        let mut acc = 0i64;
        for (i, w) in weights.iter().enumerate() {
            acc += w;
            pts.push((xs[i + 1].clone(), &y0 + rat(acc, total)));
        }
        return PlLift::new(pts).unwrap();
    }
}

/// Extracts a random closed covering chain of length at most `max_len` from
/// the spine part of the Markov graph (each arrow there is a positive
/// covering with power one). Returns `None` when the random walk fails to
/// close quickly.
pub fn spine_cycle_chain<R: Rng>(
    map: &MarkovMap,
    rng: &mut R,
    max_len: usize,
) -> Option<CoveringChain> {
    let g = map.graph();
    let graph = MarkovGraph::from_map(map);
    let spine: HashSet<usize> = g.spine_edges().iter().copied().collect();
    let start = *g
        .spine_edges()
        .get(rng.gen_range(0..g.spine_edges().len()))
        .unwrap();
    let mut path: Vec<(usize, i64)> = vec![(start, 0)];
    for _ in 0..max_len {
        let v = path.last().unwrap().0;
        let outs: Vec<&Arrow> = graph
            .arrows()
            .iter()
            .filter(|a| a.from == v && spine.contains(&a.to))
            .filter(|a| {
                // Keep only genuine positive coverings: an arrow can also come
                // from an orientation-reversing cover, which no closed
                // covering chain may use.
                let ev = &g.edges()[v];
                let et = &g.edges()[a.to];
                let (vl, vh) = (
                    g.nodes()[ev.from].spine_coord.as_ref().unwrap(),
                    g.nodes()[ev.to].spine_coord.as_ref().unwrap(),
                );
                let (tl, th) = (
                    g.nodes()[et.from].spine_coord.as_ref().unwrap(),
                    g.nodes()[et.to].spine_coord.as_ref().unwrap(),
                );
                matches!(
                    positively_covers(map, (vl, vh), (tl, th), 1, a.weight),
                    Ok(Some(_))
                )
            })
            .collect();
        if outs.is_empty() {
            return None;
        }
        let a = outs[rng.gen_range(0..outs.len())];
        if let Some(pos) = path.iter().position(|&(n, _)| n == a.to) {
            // Closed: nodes path[pos..] with the arrow shifts between them.
            let mut steps = Vec::new();
            for i in pos..path.len() {
                let node = path[i].0;
                let shift = if i + 1 < path.len() {
                    path[i + 1].1
                } else {
                    a.weight
                };
                let e = &g.edges()[node];
                let lo = g.nodes()[e.from].spine_coord.clone().unwrap();
                let hi = g.nodes()[e.to].spine_coord.clone().unwrap();
                steps.push(ChainStep {
                    interval: (lo, hi),
                    power: 1,
                    shift,
                });
            }
            return Some(CoveringChain { steps });
        }
        path.push((a.to, a.weight));
    }
    None
}

/// Independent checker for a divisor-hitting decomposition: (a) the parts sum
/// to `m`, (b) every part is at least `n`, (c) every proper divisor of `m`
/// divides some proper prefix sum.
pub fn check_decomposition(n: u64, m: u64, parts: &[u64]) -> bool {
    if parts.is_empty() || parts.iter().sum::<u64>() != m {
        return false;
    }
    if parts.iter().any(|&p| p < n) {
        return false;
    }
    let mut prefix = Vec::new();
    let mut s = 0u64;
    for &p in &parts[..parts.len() - 1] {
        s += p;
        prefix.push(s);
    }
    (1..m)
        .filter(|d| m % d == 0)
        .all(|d| prefix.iter().any(|&s| s % d == 0))
}

/// Brute-force existence oracle: is there any decomposition of `m` into
/// parts `>= n` passing the (a)(b)(c) checker? Dynamic programming over
/// checkpoint sums, keeping only maximal divisor-coverage masks.
pub fn decomposition_exists(n: u64, m: u64) -> bool {
    if m < n {
        return false;
    }
    let divisors: Vec<u64> = (1..m).filter(|d| m % d == 0).collect();
    if divisors.is_empty() {
        return true; // single part [m]
    }
    let full: u32 = (1u32 << divisors.len()) - 1;
    let mask_of = |s: u64| -> u32 {
        divisors
            .iter()
            .enumerate()
            .filter(|(_, &d)| s % d == 0)
            .map(|(i, _)| 1u32 << i)
            .fold(0, |a, b| a | b)
    };
    // masks[s]: maximal coverage masks over checkpoint chains ending at s.
    let mut masks: Vec<Vec<u32>> = vec![Vec::new(); m as usize];
    let insert_maximal = |v: &mut Vec<u32>, cand: u32| {
        if v.iter().any(|&x| x & cand == cand) {
            return;
        }
        v.retain(|&x| cand & x != x);
        v.push(cand);
    };
    for s in n..m {
        let bit = mask_of(s);
        let mut cands = vec![bit]; // chain starting at s
        for prev in n..=s.saturating_sub(n) {
            for &pm in &masks[prev as usize] {
                cands.push(pm | bit);
            }
        }
        let mut v = Vec::new();
        for c in cands {
            insert_maximal(&mut v, c);
        }
        if s + n <= m && v.iter().any(|&x| x == full) {
            return true;
        }
        masks[s as usize] = v;
    }
    false
}

/// Whether a one-sided piecewise-linear function has degree one.
pub fn degree_one(f: &PlJump) -> bool {
    let pts = f.breakpoints();
    let (x0, l0, r0) = &pts[0];
    let (x1, l1, r1) = pts.last().unwrap();
    x0.is_zero()
        && x1.is_one()
        && l1 == &(l0 + Rational::one())
        && r1 == &(r0 + Rational::one())
}

fn union_xs(a: &PlJump, b: &PlJump) -> Vec<Rational> {
    let mut xs: Vec<Rational> = a
        .breakpoints()
        .iter()
        .chain(b.breakpoints().iter())
        .map(|(x, _, _)| x.clone())
        .collect();
    xs.sort();
    xs.dedup();
    xs
}

/// Pointwise `a <= b` on `[0, 1]`, exact (both are piecewise linear between
/// the union of their breakpoints, so one-sided checks there suffice).
pub fn pointwise_le(a: &PlJump, b: &PlJump) -> bool {
    union_xs(a, b).iter().all(|x| {
        a.eval_left(x) <= b.eval_left(x) && a.eval_right(x) <= b.eval_right(x)
    })
}

/// Exact sup distance between two one-sided piecewise-linear functions.
pub fn sup_distance(a: &PlJump, b: &PlJump) -> Rational {
    union_xs(a, b)
        .iter()
        .map(|x| {
            let l = (a.eval_left(x) - b.eval_left(x)).abs();
            let r = (a.eval_right(x) - b.eval_right(x)).abs();
            if l >= r {
                l
            } else {
                r
            }
        })
        .max()
        .unwrap()
}
