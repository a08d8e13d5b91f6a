//! Exact piecewise-linear liftings of circle maps and monotone envelopes.
//!
//! A degree-one lifting of a circle map is represented by its breakpoints on
//! the fundamental interval `[0, 1]`; values elsewhere follow from
//! `f(x + 1) = f(x) + 1`. Two flavours are provided:
//!
//! * [`PlLift`]: continuous piecewise-linear lifts, with exact composition
//!   and rotation-number computation for the nondecreasing case;
//! * [`PlJump`]: piecewise-linear functions with one-sided values at
//!   breakpoints, used for the monotone upper/lower envelopes of a map on a
//!   lifted space (which jump exactly at the branching points) and for the
//!   interpolating water family between them.

use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};
use thiserror::Error;

use crate::rational::{floor_i64, Rational};

/// Errors for circle-lift computations.
#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum LiftError {
    #[error("breakpoints do not describe a degree-one lift: {0}")]
    BadBreakpoints(String),
    #[error("map is not nondecreasing; rotation number undefined")]
    NotMonotone,
    #[error("map is not combed at spine coordinate {0}")]
    NotCombed(String),
}

fn int(k: i64) -> Rational {
    Rational::from_integer(BigInt::from(k))
}

/// A continuous piecewise-linear degree-one lifting, stored as breakpoints
/// `(x, f(x))` with `0 = x_0 < ... < x_n = 1` and `f(1) = f(0) + 1`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PlLift {
    pts: Vec<(Rational, Rational)>,
}

impl PlLift {
    /// Validates breakpoints and builds a lift.
    pub fn new(mut pts: Vec<(Rational, Rational)>) -> Result<Self, LiftError> {
        if pts.len() < 2 {
            return Err(LiftError::BadBreakpoints("need at least two points".into()));
        }
        for w in pts.windows(2) {
            if w[0].0 >= w[1].0 {
                return Err(LiftError::BadBreakpoints(
                    "x coordinates must be strictly increasing".into(),
                ));
            }
        }
        if !pts[0].0.is_zero() || !pts.last().unwrap().0.is_one() {
            return Err(LiftError::BadBreakpoints(
                "breakpoints must span exactly [0, 1]".into(),
            ));
        }
        if &pts[0].1 + Rational::one() != pts.last().unwrap().1 {
            return Err(LiftError::BadBreakpoints("f(1) must equal f(0) + 1".into()));
        }
        // Drop collinear interior points for canonical form.
        let mut canon: Vec<(Rational, Rational)> = Vec::with_capacity(pts.len());
        for p in pts.drain(..) {
            while canon.len() >= 2 {
                let b = &canon[canon.len() - 1];
                let a = &canon[canon.len() - 2];
                // Collinear iff (b-a) x (p-a) == 0.
                let lhs = (&b.0 - &a.0) * (&p.1 - &a.1);
                let rhs = (&b.1 - &a.1) * (&p.0 - &a.0);
                if lhs == rhs {
                    canon.pop();
                } else {
                    break;
                }
            }
            canon.push(p);
        }
        Ok(PlLift { pts: canon })
    }

    /// The identity lift.
    pub fn identity() -> Self {
        PlLift::new(vec![
            (Rational::zero(), Rational::zero()),
            (Rational::one(), Rational::one()),
        ])
        .unwrap()
    }

    /// Breakpoints on `[0, 1]`.
    pub fn breakpoints(&self) -> &[(Rational, Rational)] {
        &self.pts
    }

    /// Exact evaluation.
    pub fn eval(&self, x: &Rational) -> Rational {
        let k = floor_i64(x);
        let f = x - int(k);
        // Binary search for the segment containing `f`.
        let i = match self.pts.binary_search_by(|p| p.0.cmp(&f)) {
            Ok(i) => return &self.pts[i].1 + int(k),
            Err(i) => i - 1,
        };
        let (x0, y0) = &self.pts[i];
        let (x1, y1) = &self.pts[i + 1];
        y0 + (&f - x0) * (y1 - y0) / (x1 - x0) + int(k)
    }

    /// Whether the lift is nondecreasing.
    pub fn is_nondecreasing(&self) -> bool {
        self.pts.windows(2).all(|w| w[0].1 <= w[1].1)
    }

    /// Exact composition `self . g` (apply `g` first).
    pub fn compose(&self, g: &PlLift) -> PlLift {
        let mut xs: Vec<Rational> = g.pts.iter().map(|p| p.0.clone()).collect();
        // Pull back the breakpoints of `self` through every linear piece of g.
        for w in g.pts.windows(2) {
            let (x0, y0) = &w[0];
            let (x1, y1) = &w[1];
            if y0 == y1 {
                continue;
            }
            let (lo, hi) = if y0 < y1 { (y0, y1) } else { (y1, y0) };
            let m_lo = floor_i64(lo);
            let m_hi = floor_i64(hi) + 1;
            for m in m_lo..=m_hi {
                for (bx, _) in &self.pts[..self.pts.len() - 1] {
                    let target = bx + int(m);
                    if &target > lo && &target < hi {
                        let x = x0 + (&target - y0) * (x1 - x0) / (y1 - y0);
                        xs.push(x);
                    }
                }
            }
        }
        xs.sort();
        xs.dedup();
        let pts = xs
            .into_iter()
            .map(|x| {
                let y = self.eval(&g.eval(&x));
                (x, y)
            })
            .collect();
        PlLift::new(pts).expect("composition of degree-one lifts is a degree-one lift")
    }

    /// The `q`-th compositional power.
    pub fn power(&self, q: u32) -> PlLift {
        let mut acc = PlLift::identity();
        for _ in 0..q {
            acc = self.compose(&acc);
        }
        acc
    }

    /// Minimum and maximum of the displacement `f(x) - x` over the circle.
    pub fn displacement_range(&self) -> (Rational, Rational) {
        let mut lo: Option<Rational> = None;
        let mut hi: Option<Rational> = None;
        for (x, y) in &self.pts {
            let d = y - x;
            if lo.as_ref().is_none_or(|v| &d < v) {
                lo = Some(d.clone());
            }
            if hi.as_ref().is_none_or(|v| &d > v) {
                hi = Some(d);
            }
        }
        (lo.unwrap(), hi.unwrap())
    }
}

/// Result of a rotation-number computation.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum RhoResult {
    /// Exact rational rotation number `p/q`, certified via the `q`-th power.
    Exact(Rational),
    /// Certified enclosure `[lo, hi]` of width `2/n` from `n` exact iterates.
    Enclosure {
        lo: Rational,
        hi: Rational,
        iterates: u32,
    },
}

impl RhoResult {
    /// The enclosure as an interval (degenerate when exact).
    pub fn interval(&self) -> (Rational, Rational) {
        match self {
            RhoResult::Exact(r) => (r.clone(), r.clone()),
            RhoResult::Enclosure { lo, hi, .. } => (lo.clone(), hi.clone()),
        }
    }
}

/// Rotation number of a *nondecreasing* degree-one lift.
///
/// Searches exhaustively for a rational value `p/q` with `q <= qmax` by exact
/// composition (smallest denominator first); if none is found, returns a
/// certified enclosure of width `2/enclosure_iterates`.
pub fn rho_nondecreasing(
    g: &PlLift,
    qmax: u32,
    enclosure_iterates: u32,
) -> Result<RhoResult, LiftError> {
    if !g.is_nondecreasing() {
        return Err(LiftError::NotMonotone);
    }
    let mut gq = PlLift::identity();
    for q in 1..=qmax {
        gq = g.compose(&gq);
        let (lo, hi) = gq.displacement_range();
        let p_lo = floor_i64(&lo) + if lo.is_integer() { 0 } else { 1 };
        let p_hi = floor_i64(&hi);
        if p_lo <= p_hi {
            // A nondecreasing lift has a unique rotation number, so at most
            // one integer can admit a fixed point of g^q - p.
            debug_assert_eq!(p_lo, p_hi, "monotone lift with ambiguous rotation number");
            return Ok(RhoResult::Exact(Rational::new(
                BigInt::from(p_lo),
                BigInt::from(q),
            )));
        }
    }
    let n = enclosure_iterates.max(1);
    let mut x = Rational::zero();
    for _ in 0..n {
        x = g.eval(&x);
    }
    Ok(RhoResult::Enclosure {
        lo: (&x - Rational::one()) / int(n as i64),
        hi: (&x + Rational::one()) / int(n as i64),
        iterates: n,
    })
}

/// A piecewise-linear degree-one function with one-sided values at
/// breakpoints: linear between `(x_i, right_i)` and `(x_{i+1}, left_{i+1})`,
/// with possible jumps at the breakpoints themselves.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PlJump {
    /// `(x, left limit, right limit)`, with `0 = x_0 < ... < x_n = 1`; the
    /// values at `x = 1` equal those at `x = 0` plus one.
    pts: Vec<(Rational, Rational, Rational)>,
}

impl PlJump {
    /// Builds from raw one-sided breakpoint data (must span `[0, 1]`).
    pub fn new(pts: Vec<(Rational, Rational, Rational)>) -> Result<Self, LiftError> {
        if pts.len() < 2 {
            return Err(LiftError::BadBreakpoints("need at least two points".into()));
        }
        for w in pts.windows(2) {
            if w[0].0 >= w[1].0 {
                return Err(LiftError::BadBreakpoints(
                    "x coordinates must be strictly increasing".into(),
                ));
            }
        }
        if !pts[0].0.is_zero() || !pts.last().unwrap().0.is_one() {
            return Err(LiftError::BadBreakpoints(
                "breakpoints must span exactly [0, 1]".into(),
            ));
        }
        let last = pts.last().unwrap();
        if &pts[0].1 + Rational::one() != last.1 || &pts[0].2 + Rational::one() != last.2 {
            return Err(LiftError::BadBreakpoints(
                "values at 1 must equal values at 0 plus one".into(),
            ));
        }
        Ok(PlJump { pts })
    }

    /// Embeds a continuous lift.
    pub fn from_pl(f: &PlLift) -> Self {
        PlJump {
            pts: f
                .breakpoints()
                .iter()
                .map(|(x, y)| (x.clone(), y.clone(), y.clone()))
                .collect(),
        }
    }

    /// Breakpoint data `(x, left limit, right limit)`.
    pub fn breakpoints(&self) -> &[(Rational, Rational, Rational)] {
        &self.pts
    }

    /// One-sided limits `(left, right)` at a point.
    pub fn limits(&self, x: &Rational) -> (Rational, Rational) {
        let k = floor_i64(x);
        let f = x - int(k);
        match self.pts.binary_search_by(|p| p.0.cmp(&f)) {
            Ok(i) => (&self.pts[i].1 + int(k), &self.pts[i].2 + int(k)),
            Err(i) => {
                let (x0, _, y0) = &self.pts[i - 1];
                let (x1, y1, _) = &self.pts[i];
                let y = y0 + (&f - x0) * (y1 - y0) / (x1 - x0);
                (&y + int(k), y + int(k))
            }
        }
    }

    /// Left limit at `x`.
    pub fn eval_left(&self, x: &Rational) -> Rational {
        self.limits(x).0
    }
    /// Right limit at `x`.
    pub fn eval_right(&self, x: &Rational) -> Rational {
        self.limits(x).1
    }

    /// Whether the function has no jumps.
    pub fn is_continuous(&self) -> bool {
        self.pts.iter().all(|(_, l, r)| l == r)
    }

    /// Whether the function is nondecreasing (including across jumps).
    pub fn is_nondecreasing(&self) -> bool {
        self.pts.iter().all(|(_, l, r)| l <= r)
            && self.pts.windows(2).all(|w| w[0].2 <= w[1].1)
    }

    /// Converts to a continuous lift; requires no jumps.
    pub fn to_pl(&self) -> Result<PlLift, LiftError> {
        if !self.is_continuous() {
            return Err(LiftError::BadBreakpoints(
                "function has jumps; not a continuous lift".into(),
            ));
        }
        PlLift::new(
            self.pts
                .iter()
                .map(|(x, y, _)| (x.clone(), y.clone()))
                .collect(),
        )
    }

    /// Adds a constant.
    pub fn add_const(&self, c: &Rational) -> PlJump {
        PlJump {
            pts: self
                .pts
                .iter()
                .map(|(x, l, r)| (x.clone(), l + c, r + c))
                .collect(),
        }
    }

    /// Refines two functions onto a common grid including all crossings of
    /// their interiors, so that pointwise min/max stay piecewise linear.
    fn refine_pair(a: &PlJump, b: &PlJump) -> (Vec<Rational>, Vec<(Rational, Rational)>, Vec<(Rational, Rational)>) {
        let mut xs: Vec<Rational> = a.pts.iter().map(|p| p.0.clone()).collect();
        xs.extend(b.pts.iter().map(|p| p.0.clone()));
        xs.sort();
        xs.dedup();
        // Insert interior crossings segment by segment.
        let mut extra = Vec::new();
        for w in xs.windows(2) {
            let (x0, x1) = (&w[0], &w[1]);
            let a0 = a.eval_right(x0);
            let a1 = a.eval_left(x1);
            let b0 = b.eval_right(x0);
            let b1 = b.eval_left(x1);
            let d0 = &a0 - &b0;
            let d1 = &a1 - &b1;
            if (d0.is_positive() && d1.is_negative()) || (d0.is_negative() && d1.is_positive()) {
                // Linear crossing at x0 + t (x1 - x0) with t = d0 / (d0 - d1).
                let t = &d0 / (&d0 - &d1);
                extra.push(x0 + t * (x1 - x0));
            }
        }
        xs.extend(extra);
        xs.sort();
        xs.dedup();
        let va = xs.iter().map(|x| a.limits(x)).collect();
        let vb = xs.iter().map(|x| b.limits(x)).collect();
        (xs, va, vb)
    }

    fn combine(a: &PlJump, b: &PlJump, max: bool) -> PlJump {
        let (xs, va, vb) = PlJump::refine_pair(a, b);
        let pick = |p: &Rational, q: &Rational| {
            if (p >= q) == max {
                p.clone()
            } else {
                q.clone()
            }
        };
        let pts = xs
            .into_iter()
            .zip(va)
            .zip(vb)
            .map(|((x, (al, ar)), (bl, br))| (x, pick(&al, &bl), pick(&ar, &br)))
            .collect();
        PlJump::new(pts).expect("combination of degree-one functions is degree-one")
    }

    /// Pointwise maximum.
    pub fn max(&self, other: &PlJump) -> PlJump {
        PlJump::combine(self, other, true)
    }
    /// Pointwise minimum.
    pub fn min(&self, other: &PlJump) -> PlJump {
        PlJump::combine(self, other, false)
    }

    /// Supremum over one period of all one-sided values.
    pub fn sup_period(&self) -> Rational {
        self.pts
            .iter()
            .flat_map(|(_, l, r)| [l, r])
            .max()
            .unwrap()
            .clone()
    }
    /// Infimum over one period of all one-sided values.
    pub fn inf_period(&self) -> Rational {
        self.pts
            .iter()
            .flat_map(|(_, l, r)| [l, r])
            .min()
            .unwrap()
            .clone()
    }

    /// The running supremum `x -> sup { f(y) : y <= x }`, a nondecreasing
    /// function with the same breakpoints. By degree one the supremum over
    /// all `y <= x` equals the supremum over `[x - 1, x]`.
    pub fn running_sup(&self) -> PlJump {
        // Sweep [-1, 1]; initialise with sup over (-inf, -1] = sup_period - 2.
        let mut grid: Vec<(Rational, Rational, Rational)> = Vec::new();
        for (x, l, r) in &self.pts[..self.pts.len() - 1] {
            grid.push((x - Rational::one(), l - Rational::one(), r - Rational::one()));
        }
        grid.extend(self.pts.iter().cloned());
        let mut m = self.sup_period() - int(2);
        let mut out: Vec<(Rational, Rational, Rational)> = Vec::new();
        for (i, (x, l, r)) in grid.iter().enumerate() {
            // Left limit: running sup just before x, including f's left limit.
            let m_left = if &m >= l { m.clone() } else { l.clone() };
            let m_right = if &m_left >= r { m_left.clone() } else { r.clone() };
            if !x.is_negative() {
                out.push((x.clone(), m_left.clone(), m_right.clone()));
            }
            m = m_right;
            // On the following segment f runs linearly from r to the next
            // left limit nl, starting at or below m. If it rises above m the
            // running sup plateaus until the crossing, then follows f.
            if let Some((nx, nl, _)) = grid.get(i + 1) {
                if nl > &m {
                    if r < &m {
                        // Crossing at x + t (nx - x) with t = (m - r)/(nl - r).
                        let t = (&m - r) / (nl - r);
                        let xc = x + t * (nx - x);
                        if !xc.is_negative() {
                            out.push((xc, m.clone(), m.clone()));
                        }
                    }
                    m = nl.clone();
                }
            }
        }
        PlJump::new(out).expect("running sup is degree-one")
    }

    /// The running infimum `x -> inf { f(y) : y >= x }`, nondecreasing.
    pub fn running_inf(&self) -> PlJump {
        // Mirror trick: inf_{y >= x} f(y) = -sup_{u <= -x} g(u) with
        // g(u) = -f(-u), which is again degree-one.
        let neg = self.negate_reflect();
        let sup = neg.running_sup();
        sup.negate_reflect()
    }

    /// The function `x -> -f(-x)` (degree-one again), used to mirror
    /// suprema into infima.
    fn negate_reflect(&self) -> PlJump {
        let mut pts: Vec<(Rational, Rational, Rational)> = Vec::new();
        // f on [0,1] gives g on [-1, 0]; shift by +1 using degree one.
        for (x, l, r) in self.pts.iter().rev() {
            // At u = -x: left limit of g is -right limit of f, and vice versa.
            let u = Rational::one() - x;
            let gl = Rational::one() - r;
            let gr = Rational::one() - l;
            pts.push((u, gl, gr));
        }
        // pts now runs from u = 0 (x = 1) to u = 1 (x = 0); values already
        // adjusted by the +1 shift in both axes.
        PlJump::new(pts).expect("reflection of a degree-one function is degree-one")
    }
}

/// Branch data: for each branching-point spine coordinate `z` in `(0, 1)`,
/// the closed-interval union of retracted image values of its fiber.
pub type BranchData = BTreeMap<Rational, Vec<(Rational, Rational)>>;

fn branch_extremes(branches: &BranchData) -> Vec<(Rational, Rational, Rational)> {
    branches
        .iter()
        .filter(|(_, ivals)| !ivals.is_empty())
        .map(|(z, ivals)| {
            let lo = ivals.first().unwrap().0.clone();
            let hi = ivals.last().unwrap().1.clone();
            (z.clone(), lo, hi)
        })
        .collect()
}

/// The step function `x -> max_z (b_u(z) + floor(x - z))` contributed by the
/// branch fibers to the upper envelope. Returns `None` if there are no
/// branches.
fn upper_steps(branches: &BranchData) -> Option<PlJump> {
    let ext = branch_extremes(branches);
    if ext.is_empty() {
        return None;
    }
    let value_at = |x: &Rational, strict_left: bool| -> Rational {
        ext.iter()
            .map(|(z, _, hi)| {
                let passed = if strict_left { x > z } else { x >= z };
                if passed {
                    hi.clone()
                } else {
                    hi - Rational::one()
                }
            })
            .max()
            .unwrap()
    };
    let mut xs: Vec<Rational> = vec![Rational::zero()];
    xs.extend(ext.iter().map(|(z, _, _)| z.clone()));
    xs.push(Rational::one());
    xs.sort();
    xs.dedup();
    let pts = xs
        .into_iter()
        .map(|x| {
            let l = value_at(&x, true);
            let r = value_at(&x, false);
            (x, l, r)
        })
        .collect();
    Some(PlJump::new(pts).expect("branch steps are degree-one"))
}

/// The step function `x -> min_z (b_l(z) + ceil(x - z))` for the lower
/// envelope.
fn lower_steps(branches: &BranchData) -> Option<PlJump> {
    let ext = branch_extremes(branches);
    if ext.is_empty() {
        return None;
    }
    let value_at = |x: &Rational, strict_left: bool| -> Rational {
        ext.iter()
            .map(|(z, lo, _)| {
                // ceil(x - z) is 0 for x <= z and 1 for z < x <= z + 1.
                let passed = if strict_left { x >= z } else { x > z };
                if passed {
                    lo + Rational::one()
                } else {
                    lo.clone()
                }
            })
            .min()
            .unwrap()
    };
    let mut xs: Vec<Rational> = vec![Rational::zero()];
    xs.extend(ext.iter().map(|(z, _, _)| z.clone()));
    xs.push(Rational::one());
    xs.sort();
    xs.dedup();
    let pts = xs
        .into_iter()
        .map(|x| {
            let l = value_at(&x, false);
            let r = value_at(&x, true);
            (x, l, r)
        })
        .collect();
    Some(PlJump::new(pts).expect("branch steps are degree-one"))
}

/// The monotone upper envelope `F_u` of a map on a lifted space, described by
/// its circle restriction `l` and branch data. Nondecreasing; jumps can occur
/// only at branching coordinates, and never when the map is combed.
pub fn upper_map(l: &PlLift, branches: &BranchData) -> PlJump {
    let spine = PlJump::from_pl(l).running_sup();
    match upper_steps(branches) {
        Some(steps) => spine.max(&steps),
        None => spine,
    }
}

/// The monotone lower envelope `F_l`.
pub fn lower_map(l: &PlLift, branches: &BranchData) -> PlJump {
    let spine = PlJump::from_pl(l).running_inf();
    match lower_steps(branches) {
        Some(steps) => spine.min(&steps),
        None => spine,
    }
}

/// Combedness status at a point.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CombedStatus {
    Combed,
    LeftOnly,
    RightOnly,
    Neither,
}

/// Tests combedness at spine coordinate `x`: the fiber values over `x` must
/// not exceed the running spine maximum (left-combed) nor undercut the
/// forward spine minimum (right-combed). Points without a fiber are combed.
pub fn is_combed_at(l: &PlLift, branches: &BranchData, x: &Rational) -> CombedStatus {
    let Some(ivals) = branches.get(x) else {
        return CombedStatus::Combed;
    };
    if ivals.is_empty() {
        return CombedStatus::Combed;
    }
    let b_lo = ivals.first().unwrap().0.clone();
    let b_hi = ivals.last().unwrap().1.clone();
    let spine = PlJump::from_pl(l);
    let r_max = spine.running_sup().eval_left(x); // continuous: either limit
    let l_min = spine.running_inf().eval_left(x);
    let left_ok = b_hi <= r_max;
    let right_ok = b_lo >= l_min;
    match (left_ok, right_ok) {
        (true, true) => CombedStatus::Combed,
        (true, false) => CombedStatus::LeftOnly,
        (false, true) => CombedStatus::RightOnly,
        (false, false) => CombedStatus::Neither,
    }
}

/// The water family `mu -> F_mu` interpolating monotonically between the
/// lower and upper envelopes as the parameter rises from `0` to `mu1`.
#[derive(Debug, Clone)]
pub struct WaterFamily {
    l: PlLift,
    branches: BranchData,
    f_l: PlJump,
    mu1: Rational,
}

impl WaterFamily {
    pub fn new(l: PlLift, branches: BranchData) -> Self {
        let f_l = lower_map(&l, &branches);
        // mu1 is the smallest parameter at which the truncation min(., F_l+mu)
        // no longer bites, neither on the spine nor on the fibers.
        let mut mu1 = Rational::zero();
        // Spine gap: sup_x ( L(x) - F_l(x) ) over a merged grid.
        let (xs, vl, vf) = PlJump::refine_pair(&PlJump::from_pl(&l), &f_l);
        for ((_, (ll, lr)), (fl, fr)) in xs.iter().zip(&vl).zip(&vf) {
            for d in [ll - fl, lr - fr] {
                if d > mu1 {
                    mu1 = d;
                }
            }
        }
        // Fiber gap: b_u(z) - F_l(z) at each branching point.
        for (z, _, hi) in branch_extremes(&branches) {
            let d = hi - f_l.eval_left(&z);
            if d > mu1 {
                mu1 = d;
            }
        }
        WaterFamily {
            l,
            branches,
            f_l,
            mu1,
        }
    }

    /// The water level at which the family reaches the upper envelope.
    pub fn mu1(&self) -> &Rational {
        &self.mu1
    }
    /// The lower envelope (`F_0`).
    pub fn lower(&self) -> &PlJump {
        &self.f_l
    }

    /// The member `F_mu` of the family: the upper envelope of the map
    /// truncated at height `F_l + mu`.
    pub fn at(&self, mu: &Rational) -> PlJump {
        let cap = self.f_l.add_const(mu);
        let spine = PlJump::from_pl(&self.l).min(&cap).running_sup();
        // Truncated fiber contributions.
        let ext = branch_extremes(&self.branches);
        if ext.is_empty() {
            return spine;
        }
        let truncated: BranchData = ext
            .into_iter()
            .map(|(z, lo, hi)| {
                let capz = self.f_l.eval_left(&z) + mu;
                let hi = if hi <= capz { hi } else { capz.clone() };
                let lo = if lo <= hi { lo } else { hi.clone() };
                (z.clone(), vec![(lo, hi)])
            })
            .collect();
        match upper_steps(&truncated) {
            Some(steps) => spine.max(&steps),
            None => spine,
        }
    }
}

/// Exact rotation interval of a combed map, computed from the monotone
/// envelopes: `Rot(F) = [rho(F_l), rho(F_u)]`.
pub struct CombedRotation {
    pub lower: RhoResult,
    pub upper: RhoResult,
}

/// Computes the rotation interval of a combed map given its circle
/// restriction and branch data. Fails with [`LiftError::NotCombed`] if the
/// map is not combed at some branching point.
pub fn rotation_interval_combed(
    l: &PlLift,
    branches: &BranchData,
    qmax: u32,
    enclosure_iterates: u32,
) -> Result<CombedRotation, LiftError> {
    for z in branches.keys() {
        if is_combed_at(l, branches, z) != CombedStatus::Combed {
            return Err(LiftError::NotCombed(crate::rational::rational_to_string(z)));
        }
    }
    let f_u = upper_map(l, branches).to_pl()?;
    let f_l = lower_map(l, branches).to_pl()?;
    Ok(CombedRotation {
        lower: rho_nondecreasing(&f_l, qmax, enclosure_iterates)?,
        upper: rho_nondecreasing(&f_u, qmax, enclosure_iterates)?,
    })
}

/// The set `M(a, b) = { n : (a, b) contains a fraction with denominator n }`,
/// intersected with `[1, n_max]`.
pub fn m_set(a: &Rational, b: &Rational, n_max: u64) -> Vec<u64> {
    let mut out = Vec::new();
    for n in 1..=n_max {
        let na = a * int(n as i64);
        let nb = b * int(n as i64);
        // Smallest integer strictly above n*a.
        let k = floor_i64(&na) + 1;
        if int(k) < nb {
            out.push(n);
        }
    }
    out
}
