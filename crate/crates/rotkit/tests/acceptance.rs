//! End-to-end acceptance checks, one test per criterion. Each test prints a
//! single `PASS`/`FAIL` line (visible with `--nocapture`, and in the failure
//! report otherwise).

use std::collections::BTreeSet;

use num_traits::{One, Signed, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use rotkit::circle_lift::{
    lower_map, rho_nondecreasing, rotation_interval_combed, upper_map, LiftError, PlLift,
    RhoResult, WaterFamily,
};
use rotkit::covering_arith::{chain_periodic_witness, chi_int, decompose};
use rotkit::markov_graph::{MarkovGraph, RotationSet};
use rotkit::markov_map::MarkovMap;
use rotkit::orbit_engine::{periods_for_rotation, rho_point, RhoEstimate};
use rotkit::{rat, Rational};

mod common;
use common::{
    check_decomposition, load_fixture, random_digraph, random_monotone_lift,
    spine_cycle_chain, verify_witness,
};

fn verdict(name: &str, ok: bool, detail: &str) {
    println!(
        "criterion {name}: {} — {detail}",
        if ok { "PASS" } else { "FAIL" }
    );
    assert!(ok, "criterion {name} failed: {detail}");
}

fn interval(map: &MarkovMap) -> (Rational, Rational, bool) {
    match MarkovGraph::from_map(map).rotation_set() {
        RotationSet::Interval {
            min,
            max,
            transitive,
            ..
        } => (min, max, transitive),
        RotationSet::NoLoop => panic!("unexpected loop-free graph"),
    }
}

fn power_interval(map: &MarkovMap, n: u32) -> (Rational, Rational) {
    match MarkovGraph::rotation_set_of_power(map, n) {
        RotationSet::Interval { min, max, .. } => (min, max),
        RotationSet::NoLoop => panic!("unexpected loop-free power graph"),
    }
}

#[test]
fn criterion_1_first_example() {
    let map = load_fixture("example-6-1");
    let (min, max, _) = interval(&map);
    let mut ok = min == rat(-1, 2) && max == rat(1, 2);

    let p0 = periods_for_rotation(&map, 0, 1, 20, 10_000_000);
    let want0: BTreeSet<u64> = std::iter::once(1).chain(4..=20).collect();
    ok &= p0.complete && p0.periods == want0;

    let ph = periods_for_rotation(&map, 1, 2, 20, 10_000_000);
    let wanth: BTreeSet<u64> = (1..=10).map(|n| 2 * n).collect();
    ok &= ph.complete && ph.periods == wanth;

    ok &= power_interval(&map, 2) == (rat(-1, 2), rat(1, 2));
    ok &= power_interval(&map, 3) == (rat(-1, 3), rat(1, 3));
    verdict(
        "1 (first example)",
        ok,
        "rotation set [-1/2,1/2]; Per(0), Per(1/2) tables; scaled power rotation sets",
    );
}

#[test]
fn criterion_2_second_example() {
    let map = load_fixture("example-6-2");
    let (min, max, transitive) = interval(&map);
    let mut ok = min == Rational::zero() && max == Rational::one() && transitive;

    let budget = 50_000_000;
    let table: &[(i64, u64, u64, &[u64])] = &[
        (0, 1, 12, &[3]),
        (1, 1, 12, &[1]),
        (1, 3, 24, &[9, 12, 15, 18, 21, 24]),
        (1, 4, 24, &[4, 8, 12, 16, 20, 24]),
        (1, 2, 24, &[4, 6, 8, 10, 12, 14, 16, 18, 20, 22, 24]),
        (2, 3, 24, &[6, 9, 12, 15, 18, 21, 24]),
        (2, 5, 24, &[5, 10, 15, 20]),
    ];
    for &(p, q, n_max, want) in table {
        let search = periods_for_rotation(&map, p, q, n_max, budget);
        let want: BTreeSet<u64> = want.iter().copied().collect();
        ok &= search.complete && search.periods == want;
    }
    verdict(
        "2 (second example)",
        ok,
        "rotation set [0,1] transitive; Per(0)={3}, Per(1)={1}; period table spot checks",
    );
}

#[test]
fn criterion_3_disconnected_rotation_values() {
    let map = load_fixture("ex-1-8");
    let g = map.graph_arc();
    let exact0 = |e: RhoEstimate| match e {
        RhoEstimate::Exact { value, .. } => Some(value),
        RhoEstimate::Empirical { .. } => None,
    };
    let pt = |name: &str| {
        let n = g.node_by_name(name).unwrap();
        g.node_point(g.canonical_node_position(n, 0))
    };
    let mut ok = exact0(rho_point(&map, &pt("tA"), 50)) == Some(rat(-1, 1));
    ok &= exact0(rho_point(&map, &pt("tB"), 50)) == Some(rat(1, 1));
    for k in 0..16 {
        let x = g.spine_point(&rat(k, 16));
        ok &= exact0(rho_point(&map, &x, 50)) == Some(Rational::zero());
    }
    verdict(
        "3 (pointwise rotation values)",
        ok,
        "rho(tA) = -1, rho(tB) = +1, 16 spine samples rho = 0, horizon 50",
    );
}

#[test]
fn criterion_4_cycle_mean_oracle() {
    let mut rng = ChaCha8Rng::seed_from_u64(0x6f72_6163);
    let mut ok = true;
    for _ in 0..200 {
        let (names, arrows) = random_digraph(&mut rng);
        let graph = MarkovGraph::new(names, arrows);
        let loops = graph.elementary_loops();
        match graph.min_cycle_mean() {
            None => ok &= loops.is_empty(),
            Some((min, min_w)) => {
                let (max, max_w) = graph.max_cycle_mean().unwrap();
                let lo = loops.iter().map(|l| l.mean()).min().unwrap();
                let hi = loops.iter().map(|l| l.mean()).max().unwrap();
                ok &= min == lo && max == hi;
                ok &= min_w.mean() == min && max_w.mean() == max;
            }
        }
    }
    verdict(
        "4 (cycle-mean oracle)",
        ok,
        "Karp min/max cycle mean equals extremes over elementary loops on 200 random digraphs",
    );
}

#[test]
fn criterion_5_chi_and_decompose() {
    let mut ok = true;
    for n in 1..=6u64 {
        let chi = chi_int(n);
        for m in chi..=chi + 200 {
            match decompose(n, m) {
                Ok(d) => ok &= check_decomposition(n, m, &d.parts),
                Err(_) => ok = false,
            }
        }
    }
    // Brute-force existence oracle on small sizes.
    for n in 1..=6u64 {
        let chi = chi_int(n);
        for m in 1..=120u64 {
            let exists = common::decomposition_exists(n, m);
            if m >= chi {
                // decompose must succeed and the oracle must agree.
                ok &= exists && decompose(n, m).is_ok();
            } else if let Ok(d) = decompose(n, m) {
                // Not required below chi, but must still be sound if present.
                ok &= exists && check_decomposition(n, m, &d.parts);
            }
        }
    }
    verdict(
        "5 (chi and decomposition)",
        ok,
        "decompose passes the independent (a)(b)(c) checker for N <= 6 up to chi+200; \
         brute-force existence oracle agrees for m <= 120",
    );
}

#[test]
fn criterion_6_envelopes() {
    let mut ok = true;
    for name in common::FIXTURES {
        let map = load_fixture(name);
        let g = map.graph_arc();
        let l = map.circle_restriction();
        let branches = map.branch_value_ranges();
        let f_u = upper_map(&l, &branches);
        let f_l = lower_map(&l, &branches);
        ok &= f_u.is_nondecreasing() && f_l.is_nondecreasing();
        ok &= common::degree_one(&f_u) && common::degree_one(&f_l);
        // F_l <= r o F <= F_u on the spine, at 1000 rational samples.
        for k in 0..1000i64 {
            let x = rat(k, 1009);
            let v = g.retract(&map.evaluate(&g.spine_point(&x)));
            ok &= f_l.eval_left(&x) <= v || f_l.eval_right(&x) <= v;
            ok &= v <= f_u.eval_left(&x) || v <= f_u.eval_right(&x);
        }
        // Monotone family on a 16-point parameter grid.
        let fam = WaterFamily::new(l.clone(), branches.clone());
        let mu1 = fam.mu1().clone();
        let grid: Vec<Rational> = (0..16).map(|i| &mu1 * rat(i, 15)).collect();
        let members: Vec<_> = grid.iter().map(|mu| fam.at(mu)).collect();
        for w in members.windows(2) {
            ok &= common::pointwise_le(&w[0], &w[1]);
        }
        ok &= common::pointwise_le(fam.lower(), &members[0])
            && common::pointwise_le(&members[0], fam.lower());
        ok &= common::pointwise_le(&members[15], &f_u) && common::pointwise_le(&f_u, &members[15]);
        // Lipschitz in the parameter: ||F_mu - F_lambda|| <= |mu - lambda|.
        for (i, fi) in members.iter().enumerate() {
            for (j, fj) in members.iter().enumerate().skip(i + 1) {
                let gap = (&grid[j] - &grid[i]).abs();
                ok &= common::sup_distance(fi, fj) <= gap;
            }
        }
    }
    verdict(
        "6 (envelopes)",
        ok,
        "envelope bounds at 1000 samples, monotone degree-one envelopes, \
         monotone 16-point water family, parameter-Lipschitz",
    );
}

#[test]
fn criterion_7_combed_cross_check() {
    let map = load_fixture("fig-4-combed");
    let l = map.circle_restriction();
    let branches = map.branch_value_ranges();
    let (min, max, _) = interval(&map);
    let mut ok = false;
    if let Ok(cr) = rotation_interval_combed(&l, &branches, 64, 256) {
        if let (RhoResult::Exact(lo), RhoResult::Exact(hi)) = (cr.lower, cr.upper) {
            ok = lo == min && hi == max;
        }
    }
    // A deliberately non-combed map: the combed path must refuse while the
    // loop-based computation still succeeds.
    let nc = load_fixture("example-6-1");
    let ncl = nc.circle_restriction();
    let ncb = nc.branch_value_ranges();
    match rotation_interval_combed(&ncl, &ncb, 64, 256) {
        Err(LiftError::NotCombed(_)) => {
            let (min, max, _) = interval(&nc);
            ok &= min == rat(-1, 2) && max == rat(1, 2);
        }
        _ => ok = false,
    }
    verdict(
        "7 (combed cross-check)",
        ok,
        "combed fixture: envelope interval equals loop interval exactly; \
         non-combed fixture refused with NotCombed",
    );
}

#[test]
fn criterion_8_witness_soundness() {
    let mut ok = true;
    for name in common::FIXTURES {
        let map = load_fixture(name);
        for (p, q) in [(0i64, 1u64), (1, 2), (-1, 3), (1, 1), (1, 3)] {
            let search = periods_for_rotation(&map, p, q, 12, 5_000_000);
            ok &= search.periods == search.witnesses.keys().copied().collect();
            for w in search.witnesses.values() {
                ok &= verify_witness(&map, w);
            }
        }
    }
    // 50 random short covering chains, across fixtures.
    let mut rng = ChaCha8Rng::seed_from_u64(0x6368_6169);
    let mut produced = 0;
    while produced < 50 {
        let name = common::FIXTURES[rng.gen_range(0..common::FIXTURES.len())];
        let map = load_fixture(name);
        let Some(chain) = spine_cycle_chain(&map, &mut rng, 4) else {
            continue;
        };
        produced += 1;
        match chain_periodic_witness(&map, &chain) {
            Ok(w) => {
                let g = map.graph_arc();
                let steps = w.power as usize;
                let end = map.iterate(&w.point, steps).pop().unwrap();
                ok &= g.translate(&w.point, w.shift) == end;
                ok &= (chain.total_power(), chain.total_shift()) == (w.power, w.shift);
            }
            Err(_) => ok = false,
        }
    }
    verdict(
        "8 (witness soundness)",
        ok,
        "all period witnesses and 50 random covering-chain witnesses re-verify by exact iteration",
    );
}

#[test]
fn criterion_9_rho_enclosures() {
    let mut rng = ChaCha8Rng::seed_from_u64(0x7268_6f21);
    let mut ok = true;
    let mut exact_seen = 0;
    for _ in 0..20 {
        let lift: PlLift = random_monotone_lift(&mut rng);
        let exact = match rho_nondecreasing(&lift, 12, 256).unwrap() {
            RhoResult::Exact(r) => {
                exact_seen += 1;
                Some(r)
            }
            RhoResult::Enclosure { .. } => None,
        };
        for n in [16u32, 64, 256] {
            match rho_nondecreasing(&lift, 0, n).unwrap() {
                RhoResult::Enclosure { lo, hi, .. } => {
                    ok &= &hi - &lo <= rat(2, n as i64);
                    if let Some(r) = &exact {
                        ok &= &lo <= r && r <= &hi;
                    }
                }
                RhoResult::Exact(_) => ok = false,
            }
        }
    }
    ok &= exact_seen > 0;
    verdict(
        "9 (rho enclosure soundness)",
        ok,
        "20 random monotone PL lifts: exact value inside every enclosure, widths <= 2/n",
    );
}
