//! Positive covering between spine intervals, covering-chain periodic
//! witnesses, and the arithmetic toolkit (the threshold function `chi`, the
//! divisor-hitting decomposition, and divisor fractions).

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, Zero};
use thiserror::Error;

use crate::lifted_graph::{EdgeId, Point};
use crate::markov_map::MarkovMap;
use crate::rational::{floor_i64, Rational};

/// Errors for covering computations.
#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum CoveringError {
    #[error("interval is empty or degenerate")]
    DegenerateInterval,
    #[error("chain is empty")]
    EmptyChain,
    #[error("chain step {0} fails positive-covering verification")]
    ChainBroken(usize),
    #[error("no periodic witness found on the restricted domain")]
    WitnessNotFound,
}

/// Errors for the arithmetic constructions.
#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ArithError {
    #[error("precondition violated: m = {m} is below chi(N) = {chi}")]
    PreconditionViolated { m: u64, chi: u64 },
    #[error("internal construction failed verification")]
    ConstructionFailed,
}

// ---------------------------------------------------------------------------
// Exact piecewise tracking of F^n restricted to a spine interval.
// ---------------------------------------------------------------------------

/// One affine piece of `F^n` restricted to a real interval: for `x` in
/// `[a, b]` the image is the point `(edge, u(x), shift)` where `u` is the
/// affine map with `u(a) = u_a`, `u(b) = u_b`.
#[derive(Debug, Clone)]
struct Piece {
    a: Rational,
    b: Rational,
    edge: EdgeId,
    shift: i64,
    u_a: Rational,
    u_b: Rational,
}

impl Piece {
    fn u_at(&self, x: &Rational) -> Rational {
        &self.u_a + (x - &self.a) * (&self.u_b - &self.u_a) / (&self.b - &self.a)
    }
}

/// Initial pieces: the identity on `[a, b]`, expressed on the spine edges.
fn initial_pieces(map: &MarkovMap, a: &Rational, b: &Rational) -> Vec<Piece> {
    let g = map.graph();
    let mut out = Vec::new();
    let k_lo = floor_i64(a);
    let k_hi = floor_i64(b) + 1;
    for k in k_lo..=k_hi {
        for &e in g.spine_edges() {
            let edge = &g.edges()[e];
            let c0 = g.nodes()[edge.from].spine_coord.clone().unwrap();
            let len = edge.length.clone();
            let lo = &c0 + Rational::from_integer(BigInt::from(k));
            let hi = &lo + &len;
            let x0 = if a > &lo { a.clone() } else { lo.clone() };
            let x1 = if b < &hi { b.clone() } else { hi.clone() };
            if x0 >= x1 {
                continue;
            }
            out.push(Piece {
                u_a: (&x0 - &lo) / &len,
                u_b: (&x1 - &lo) / &len,
                a: x0,
                b: x1,
                edge: e,
                shift: k,
            });
        }
    }
    out.sort_by(|p, q| p.a.cmp(&q.a));
    out
}

/// Applies `F` once to every piece, splitting at chain-entry boundaries.
fn step_pieces(map: &MarkovMap, pieces: Vec<Piece>) -> Vec<Piece> {
    let g = map.graph();
    let mut out = Vec::new();
    for p in pieces {
        let chain = map.image(p.edge);
        let total = map.chain_length(p.edge).clone();
        // Cumulative chain-parameter boundaries.
        let mut cum = vec![Rational::zero()];
        for entry in chain {
            let l = g.edges()[entry.edge].length.clone();
            cum.push(cum.last().unwrap() + l);
        }
        let s_a = &p.u_a * &total;
        let s_b = &p.u_b * &total;
        let (s_lo, s_hi) = if s_a <= s_b {
            (s_a.clone(), s_b.clone())
        } else {
            (s_b.clone(), s_a.clone())
        };
        // Domain cut points at interior chain boundaries.
        let mut xs = vec![p.a.clone(), p.b.clone()];
        for c in &cum[1..cum.len() - 1] {
            if c > &s_lo && c < &s_hi {
                let x = &p.a + (c - &s_a) * (&p.b - &p.a) / (&s_b - &s_a);
                xs.push(x);
            }
        }
        xs.sort();
        xs.dedup();
        for w in xs.windows(2) {
            let (x0, x1) = (&w[0], &w[1]);
            let s0 = &s_a + (x0 - &p.a) * (&s_b - &s_a) / (&p.b - &p.a);
            let s1 = &s_a + (x1 - &p.a) * (&s_b - &s_a) / (&p.b - &p.a);
            // Locate the entry containing the open segment via its midpoint.
            let mid = (&s0 + &s1) / Rational::from_integer(BigInt::from(2));
            let i = (0..chain.len())
                .find(|&i| cum[i] <= mid && mid <= cum[i + 1])
                .expect("segment lies inside the chain");
            let entry = &chain[i];
            let l = &cum[i + 1] - &cum[i];
            let w0 = (&s0 - &cum[i]) / &l;
            let w1 = (&s1 - &cum[i]) / &l;
            let (u0, u1) = if entry.reversed {
                (Rational::one() - w0, Rational::one() - w1)
            } else {
                (w0, w1)
            };
            out.push(Piece {
                a: x0.clone(),
                b: x1.clone(),
                edge: entry.edge,
                shift: p.shift + entry.shift,
                u_a: u0,
                u_b: u1,
            });
        }
    }
    out
}

/// The real coordinate of a spine piece at `x`, or `None` off the spine.
fn piece_position(map: &MarkovMap, p: &Piece, x: &Rational) -> Option<Rational> {
    let g = map.graph();
    let edge = &g.edges()[p.edge];
    if !edge.on_spine {
        return None;
    }
    let c0 = g.nodes()[edge.from].spine_coord.clone().unwrap();
    Some(c0 + p.u_at(x) * &edge.length + Rational::from_integer(BigInt::from(p.shift)))
}

/// The retraction value of a piece at `x` (constant for branch pieces).
fn piece_retract(map: &MarkovMap, p: &Piece, x: &Rational) -> Rational {
    if let Some(pos) = piece_position(map, p, x) {
        return pos;
    }
    let g = map.graph();
    let comp = g.component_of_edge(p.edge).expect("off-spine edge");
    let att = g.components()[comp].attachment;
    g.nodes()[att].spine_coord.clone().unwrap() + Rational::from_integer(BigInt::from(p.shift))
}

/// Restricts pieces to the spine sub-domain where the image position lies in
/// `[lo, hi]`; branch pieces are dropped.
fn restrict_pieces(
    map: &MarkovMap,
    pieces: Vec<Piece>,
    lo: &Rational,
    hi: &Rational,
) -> Vec<Piece> {
    let mut out = Vec::new();
    for p in pieces {
        let Some(pos_a) = piece_position(map, &p, &p.a) else {
            continue;
        };
        let pos_b = piece_position(map, &p, &p.b).unwrap();
        // pos is affine on [a, b]; solve pos(x) in [lo, hi].
        let (min_p, max_p) = if pos_a <= pos_b {
            (&pos_a, &pos_b)
        } else {
            (&pos_b, &pos_a)
        };
        if max_p < lo || min_p > hi {
            continue;
        }
        let slope = (&pos_b - &pos_a) / (&p.b - &p.a);
        let solve = |target: &Rational| -> Rational {
            if slope.is_zero() {
                p.a.clone()
            } else {
                &p.a + (target - &pos_a) / &slope
            }
        };
        let (mut x0, mut x1) = (p.a.clone(), p.b.clone());
        if slope.is_positive() {
            if &pos_a < lo {
                x0 = solve(lo);
            }
            if &pos_b > hi {
                x1 = solve(hi);
            }
        } else if slope.is_negative() {
            if &pos_a > hi {
                x0 = solve(hi);
            }
            if &pos_b < lo {
                x1 = solve(lo);
            }
        }
        if x0 >= x1 {
            continue;
        }
        out.push(Piece {
            u_a: p.u_at(&x0),
            u_b: p.u_at(&x1),
            a: x0,
            b: x1,
            edge: p.edge,
            shift: p.shift,
        });
    }
    out
}

fn pieces_power(map: &MarkovMap, a: &Rational, b: &Rational, n: u32) -> Vec<Piece> {
    let mut pieces = initial_pieces(map, a, b);
    for _ in 0..n {
        pieces = step_pieces(map, pieces);
    }
    pieces
}

// ---------------------------------------------------------------------------
// Positive covering.
// ---------------------------------------------------------------------------

/// Outcome of a positive-covering test: the witnesses `x <= y` in `I` with
/// `r(F^n(x)) - p <= min J` and `r(F^n(y)) - p >= max J`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CoverWitness {
    pub x: Rational,
    pub y: Rational,
}

/// Decides whether `I` positively `(F^n - p)`-covers `J`: there must exist
/// `x <= y` in `I` with `r(F^n(x)) - p <= min J` and `r(F^n(y)) - p >= max J`.
/// Exact on the piecewise-affine data; returns the witness pair when true.
pub fn positively_covers(
    map: &MarkovMap,
    i: (&Rational, &Rational),
    j: (&Rational, &Rational),
    n: u32,
    p: i64,
) -> Result<Option<CoverWitness>, CoveringError> {
    if i.0 >= i.1 || j.0 >= j.1 {
        return Err(CoveringError::DegenerateInterval);
    }
    let pieces = pieces_power(map, i.0, i.1, n);
    let shift = Rational::from_integer(BigInt::from(p));
    // r(F^n) - p is continuous and piecewise affine; its breakpoint values
    // carry all extremes, so witnesses can be searched on breakpoints only.
    let mut samples: Vec<(Rational, Rational)> = Vec::new();
    for piece in &pieces {
        for x in [&piece.a, &piece.b] {
            let v = piece_retract(map, piece, x) - &shift;
            samples.push((x.clone(), v));
        }
    }
    samples.sort_by(|a, b| a.0.cmp(&b.0));
    samples.dedup_by(|a, b| a.0 == b.0);
    // Suffix maxima: for each index, the best later value.
    let mut best_after: Vec<usize> = vec![0; samples.len()];
    let mut best = samples.len() - 1;
    for idx in (0..samples.len()).rev() {
        if samples[idx].1 >= samples[best].1 {
            best = idx;
        }
        best_after[idx] = best;
    }
    for (idx, (x, v)) in samples.iter().enumerate() {
        if v <= j.0 {
            let y_idx = best_after[idx];
            if &samples[y_idx].1 >= j.1 {
                return Ok(Some(CoverWitness {
                    x: x.clone(),
                    y: samples[y_idx].0.clone(),
                }));
            }
        }
    }
    Ok(None)
}

// ---------------------------------------------------------------------------
// Covering chains and periodic witnesses.
// ---------------------------------------------------------------------------

/// One step of a covering chain: the interval `I` together with the power and
/// shift of the arrow leading to the next interval in the chain.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ChainStep {
    pub interval: (Rational, Rational),
    pub power: u32,
    pub shift: i64,
}

/// A closed covering chain `I_0 -> I_1 -> ... -> I_0`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CoveringChain {
    pub steps: Vec<ChainStep>,
}

impl CoveringChain {
    /// Total power of the full cycle.
    pub fn total_power(&self) -> u32 {
        self.steps.iter().map(|s| s.power).sum()
    }
    /// Total shift of the full cycle.
    pub fn total_shift(&self) -> i64 {
        self.steps.iter().map(|s| s.shift).sum()
    }
}

/// A certified periodic witness for a closed covering chain.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PeriodicWitness {
    /// Spine coordinate of the witness.
    pub x0: Rational,
    /// The witness as a point of the lifted space.
    pub point: Point,
    /// Total power `m` with `F^m(x0) = x0 + total_shift`.
    pub power: u32,
    /// Total shift.
    pub shift: i64,
}

/// Finds a point `x0` in `I_0` whose orbit follows the closed chain:
/// `F^{m_i}(x0)` lies in `I_i + (p_1 + ... + p_i)` at every stage and
/// `F^{m}(x0) = x0 + (p_1 + ... + p_k)` exactly. Every step is first checked
/// with [`positively_covers`], and the returned witness is re-verified by
/// exact iteration on the lifted space.
pub fn chain_periodic_witness(
    map: &MarkovMap,
    chain: &CoveringChain,
) -> Result<PeriodicWitness, CoveringError> {
    let k = chain.steps.len();
    if k == 0 {
        return Err(CoveringError::EmptyChain);
    }
    // Verify every covering step.
    for (idx, step) in chain.steps.iter().enumerate() {
        let next = &chain.steps[(idx + 1) % k].interval;
        let ok = positively_covers(
            map,
            (&step.interval.0, &step.interval.1),
            (&next.0, &next.1),
            step.power,
            step.shift,
        )?;
        if ok.is_none() {
            return Err(CoveringError::ChainBroken(idx));
        }
    }
    // Track F^{m_i} on a shrinking sub-domain of I_0, restricting to the
    // required translated interval after each stage.
    let i0 = &chain.steps[0].interval;
    let mut pieces = initial_pieces(map, &i0.0, &i0.1);
    let mut cum_shift: i64 = 0;
    for (idx, step) in chain.steps.iter().enumerate() {
        for _ in 0..step.power {
            pieces = step_pieces(map, pieces);
        }
        cum_shift += step.shift;
        let target = &chain.steps[(idx + 1) % k].interval;
        let s = Rational::from_integer(BigInt::from(cum_shift));
        let lo = &target.0 + &s;
        let hi = &target.1 + &s;
        pieces = restrict_pieces(map, pieces, &lo, &hi);
        if pieces.is_empty() {
            return Err(CoveringError::WitnessNotFound);
        }
    }
    // Solve pos(x) = x + cum_shift on each remaining affine piece.
    let total_power = chain.total_power();
    let shift_rat = Rational::from_integer(BigInt::from(cum_shift));
    let mut candidates: Vec<Rational> = Vec::new();
    for p in &pieces {
        let Some(pos_a) = piece_position(map, p, &p.a) else {
            continue;
        };
        let pos_b = piece_position(map, p, &p.b).unwrap();
        let slope = (&pos_b - &pos_a) / (&p.b - &p.a);
        if slope == Rational::one() {
            if &pos_a - &p.a == shift_rat {
                candidates.push((&p.a + &p.b) / Rational::from_integer(BigInt::from(2)));
            }
            continue;
        }
        // pos(x) - x - shift has slope != 0; unique root.
        let x = (&pos_a - &shift_rat - &slope * &p.a) / (Rational::one() - &slope);
        if x >= p.a && x <= p.b {
            candidates.push(x);
        }
    }
    candidates.sort();
    candidates.dedup();
    let g = map.graph_arc();
    for x0 in candidates {
        if x0 < i0.0 || x0 > i0.1 {
            continue;
        }
        let start = g.spine_point(&x0);
        let orbit = map.iterate(&start, total_power as usize);
        // Check stage containments and the exact closing identity.
        let mut ok = true;
        let mut m = 0usize;
        let mut acc = 0i64;
        for (idx, step) in chain.steps.iter().enumerate() {
            m += step.power as usize;
            acc += step.shift;
            let pt = &orbit[m - 1];
            let target = &chain.steps[(idx + 1) % k].interval;
            let s = Rational::from_integer(BigInt::from(acc));
            let r = g.retract(pt);
            if r < &target.0 + &s || r > &target.1 + &s {
                ok = false;
                break;
            }
        }
        if ok && orbit[total_power as usize - 1] == g.translate(&start, cum_shift) {
            return Ok(PeriodicWitness {
                point: start,
                x0,
                power: total_power,
                shift: cum_shift,
            });
        }
    }
    Err(CoveringError::WitnessNotFound)
}

// ---------------------------------------------------------------------------
// Arithmetic toolkit.
// ---------------------------------------------------------------------------

/// The threshold function: `1` for `t <= 1`, else `max(ceil(t)^2, 51 ceil(t))`.
pub fn chi(t: &Rational) -> u64 {
    if t <= &Rational::one() {
        return 1;
    }
    let c = t.ceil().to_integer();
    let c: u64 = u64::try_from(&c).expect("chi argument too large");
    (c * c).max(51 * c)
}

/// Convenience for integer arguments.
pub fn chi_int(n: u64) -> u64 {
    chi(&Rational::from_integer(BigInt::from(n)))
}

/// A divisor-hitting decomposition of `m` into parts of size at least `N`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Decomposition {
    pub n_min: u64,
    pub m: u64,
    pub parts: Vec<u64>,
}

impl Decomposition {
    /// Verifies conditions (a) the parts sum to `m`, (b) every part is at
    /// least `n_min`, (c) every proper divisor of `m` divides some proper
    /// prefix sum.
    pub fn verify(&self) -> bool {
        if self.parts.iter().sum::<u64>() != self.m {
            return false;
        }
        if self.parts.iter().any(|&p| p < self.n_min) {
            return false;
        }
        let mut prefixes = Vec::new();
        let mut s = 0u64;
        for &p in &self.parts[..self.parts.len() - 1] {
            s += p;
            prefixes.push(s);
        }
        for d in 1..self.m {
            if self.m % d == 0 && !prefixes.iter().any(|&s| s % d == 0) {
                return false;
            }
        }
        true
    }
}

fn distinct_primes(mut m: u64) -> Vec<u64> {
    let mut out = Vec::new();
    let mut p = 2u64;
    while p * p <= m {
        if m % p == 0 {
            out.push(p);
            while m % p == 0 {
                m /= p;
            }
        }
        p += 1;
    }
    if m > 1 {
        out.push(m);
    }
    out
}

/// Constructs a decomposition of `m >= chi(N)` into parts `>= N` whose proper
/// prefix sums hit a multiple of every proper divisor of `m`: the maximal
/// divisors `m/p` large enough appear directly as prefix sums (consecutive
/// differences as parts), and each small one is hit by inserting a part in
/// `[N, N + d)` that rounds the running sum up to a multiple of `d`.
pub fn decompose(n_min: u64, m: u64) -> Result<Decomposition, ArithError> {
    assert!(n_min >= 1 && m >= 1);
    let bound = chi_int(n_min);
    if m < bound {
        return Err(ArithError::PreconditionViolated { m, chi: bound });
    }
    if n_min == 1 {
        return Ok(Decomposition {
            n_min,
            m,
            parts: vec![1; m as usize],
        });
    }
    // Distinct primes in descending order give the maximal proper divisors
    // d_i = m / p_i in ascending order.
    let mut primes = distinct_primes(m);
    primes.sort_unstable_by(|a, b| b.cmp(a));
    let ds: Vec<u64> = primes.iter().map(|&p| m / p).collect();
    let eps = primes
        .iter()
        .take_while(|&&p| p.saturating_mul(p).saturating_mul(n_min) > m)
        .count();
    let mut parts: Vec<u64> = Vec::new();
    let mut s = 0u64;
    // Large divisors become prefix sums directly.
    for i in eps..ds.len() {
        let part = ds[i] - s;
        parts.push(part);
        s = ds[i];
    }
    // Small divisors (largest first): round the running sum up to the next
    // multiple of d that is at least s + N.
    for i in (0..eps).rev() {
        let d = ds[i];
        let part = d * (s + n_min).div_ceil(d) - s;
        parts.push(part);
        s += part;
    }
    // Remainder.
    if s < m {
        parts.push(m - s);
    }
    let dec = Decomposition { n_min, m, parts };
    if dec.verify() {
        Ok(dec)
    } else {
        Err(ArithError::ConstructionFailed)
    }
}

/// Finds a coprime fraction `p/q` in `[a, b]` with `q >= N` and `q` dividing
/// `n`, scanning the divisors of `n` in increasing order.
pub fn divisor_fraction(
    n_min: u64,
    a: &Rational,
    b: &Rational,
    n: u64,
) -> Option<(BigInt, u64)> {
    assert!(a < b);
    let mut divisors: Vec<u64> = (1..=n).filter(|d| n % d == 0).collect();
    divisors.sort_unstable();
    for q in divisors {
        if q < n_min {
            continue;
        }
        let qr = Rational::from_integer(BigInt::from(q));
        let lo = a * &qr;
        let hi = b * &qr;
        let p_lo = lo.ceil().to_integer();
        let p_hi = hi.floor().to_integer();
        let mut p = p_lo.clone();
        while p <= p_hi {
            if p.gcd(&BigInt::from(q)).is_one() || (q == 1) {
                return Some((p, q));
            }
            p += 1;
        }
    }
    None
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::rat;

    #[test]
    fn chi_values() {
        assert_eq!(chi(&rat(1, 2)), 1);
        assert_eq!(chi_int(1), 1);
        assert_eq!(chi_int(2), 102);
        assert_eq!(chi_int(60), 3600);
    }

    #[test]
    fn decompose_unit_parts() {
        let d = decompose(1, 5).unwrap();
        assert_eq!(d.parts, vec![1, 1, 1, 1, 1]);
        assert!(d.verify());
    }

    #[test]
    fn decompose_verified_range() {
        for n in 2..=4u64 {
            let base = chi_int(n);
            for m in base..base + 40 {
                let d = decompose(n, m).unwrap_or_else(|e| {
                    panic!("decompose({n}, {m}) failed: {e}");
                });
                assert!(d.verify(), "invalid decomposition for N={n}, m={m}");
            }
        }
    }

    #[test]
    fn decompose_rejects_small_m() {
        assert!(matches!(
            decompose(2, 101),
            Err(ArithError::PreconditionViolated { .. })
        ));
    }

    #[test]
    fn divisor_fraction_examples() {
        let (p, q) = divisor_fraction(2, &rat(1, 3), &rat(1, 2), 12).unwrap();
        let f = Rational::new(p, BigInt::from(q));
        assert!(f >= rat(1, 3) && f <= rat(1, 2));
        assert!(q >= 2 && 12 % q == 0);

        let (_, q) = divisor_fraction(5, &rat(0, 1), &rat(1, 1), 7).unwrap();
        assert_eq!(q, 7);

        assert!(divisor_fraction(10, &rat(1, 3), &rat(1, 2), 4).is_none());
    }
}
