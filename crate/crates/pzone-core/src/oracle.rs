//! Independent brute-force validation: instantiate the PTA at sampled
//! parameter valuations and model-check each concrete TA with a classical
//! zone algorithm (global passed list, per-clock extrapolation).
//!
//! This is the ground truth the synthesis results are compared against;
//! it deliberately shares only the geometry kernel with the engine.

use std::collections::{BTreeMap, BTreeSet, HashMap, VecDeque};

use num_bigint::BigInt;
use num_traits::{Signed, ToPrimitive, Zero};
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::engine::ParamConstraint;
use crate::extrapolation::{extrapolate, ClockBound, ClockBounds, ModeSelection};
use crate::geometry::{Bound, ConvexPolyhedron, LinearInequality, Rational, Relation, VarId};
use crate::model::{ConcreteEdge, LocId, Pta};

pub use crate::model::ConcreteTa;

/// Ground-truth answer for one concrete TA.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct Verdict {
    pub reachable: bool,
    pub has_accepting_lasso: bool,
    pub states_explored: usize,
}

/// Canonical key of a concrete zone: the tightest bound of every
/// difference `u - v` over clocks and the zero "variable". Concrete zones
/// are difference-bound sets, so this determines them exactly.
type ZoneKey = Vec<Option<Bound>>;

fn zone_key(zone: &ConvexPolyhedron, clocks: &[VarId]) -> ZoneKey {
    let one = Rational::one;
    let mut key = Vec::new();
    for u in clocks {
        key.push(zone.sup_of_term(&[(*u, one())]));
        key.push(zone.sup_of_term(&[(*u, -one())]));
        for v in clocks {
            if u != v {
                key.push(zone.sup_of_term(&[(*u, one()), (*v, -one())]));
            }
        }
    }
    key
}

fn concrete_invariant_rows(t: &ConcreteTa, loc: LocId) -> Vec<LinearInequality> {
    t.locations[loc.0]
        .invariant
        .iter()
        .flat_map(|g| g.to_rows())
        .collect()
}

fn concrete_initial(t: &ConcreteTa) -> ConvexPolyhedron {
    let clocks = t.clock_ids();
    let mut rows = Vec::new();
    for x in &clocks {
        rows.push(LinearInequality::upper_bound(*x, Rational::zero(), Relation::LessEq));
        rows.push(LinearInequality::lower_bound(*x, Rational::zero(), Relation::LessEq));
    }
    ConvexPolyhedron::new(t.roster(), rows)
        .expect("origin rows are well-formed")
        .time_elapse(&clocks)
        .conjoin(concrete_invariant_rows(t, t.initial))
}

fn concrete_succ(
    t: &ConcreteTa,
    loc: LocId,
    zone: &ConvexPolyhedron,
    e: &ConcreteEdge,
) -> Option<ConvexPolyhedron> {
    debug_assert_eq!(e.source, loc);
    let guarded = zone.conjoin(e.guard.iter().flat_map(|g| g.to_rows()));
    if guarded.is_empty() {
        return None;
    }
    let resets: Vec<VarId> = e.resets.iter().copied().collect();
    let inv = concrete_invariant_rows(t, e.target);
    let next = guarded
        .reset(&resets)
        .conjoin(inv.clone())
        .time_elapse(&t.clock_ids())
        .conjoin(inv);
    if next.is_empty() {
        None
    } else {
        Some(next)
    }
}

/// Explores the concrete zone graph with per-clock maximal-constant
/// extrapolation (finite by the bisimulation property of the per-clock
/// bound) and reports target reachability and the existence of a cycle
/// through an accepting location.
pub fn check_concrete(
    t: &ConcreteTa,
    targets: &BTreeSet<LocId>,
    accepting: &BTreeSet<LocId>,
) -> Verdict {
    let clocks = t.clock_ids();
    let bounds = ClockBounds::new(
        clocks
            .iter()
            .map(|x| ClockBound::Finite(t.max_constant(*x)))
            .collect(),
    );
    explore_concrete(t, targets, accepting, Some(&bounds), usize::MAX)
}

/// The same exploration without extrapolation, cut at a depth bound; used
/// to cross-check the extrapolated oracle on small models.
pub fn check_concrete_plain(
    t: &ConcreteTa,
    targets: &BTreeSet<LocId>,
    accepting: &BTreeSet<LocId>,
    max_depth: usize,
) -> Verdict {
    explore_concrete(t, targets, accepting, None, max_depth)
}

fn explore_concrete(
    t: &ConcreteTa,
    targets: &BTreeSet<LocId>,
    accepting: &BTreeSet<LocId>,
    bounds: Option<&ClockBounds>,
    max_depth: usize,
) -> Verdict {
    let clocks = t.clock_ids();
    let mut nodes: Vec<(LocId, ConvexPolyhedron)> = Vec::new();
    let mut succs: Vec<Vec<usize>> = Vec::new();
    let mut index: HashMap<(usize, ZoneKey), usize> = HashMap::new();
    let mut queue: VecDeque<(usize, usize)> = VecDeque::new();
    let mut reachable = false;

    let init = concrete_initial(t);
    if !init.is_empty() {
        let key = (t.initial.0, zone_key(&init, &clocks));
        index.insert(key, 0);
        nodes.push((t.initial, init));
        succs.push(Vec::new());
        reachable |= targets.contains(&t.initial);
        queue.push_back((0, 1));
    }

    while let Some((id, depth)) = queue.pop_front() {
        if depth >= max_depth {
            continue;
        }
        let (loc, zone) = nodes[id].clone();
        for e in t.edges_from(loc) {
            let Some(zone) = concrete_succ(t, loc, &zone, e) else { continue };
            let members = match bounds {
                Some(b) => extrapolate(&zone, b),
                None => crate::geometry::PolySet::from_members([zone]),
            };
            for member in members.members() {
                let key = (e.target.0, zone_key(member, &clocks));
                let to = match index.get(&key) {
                    Some(&i) => i,
                    None => {
                        let i = nodes.len();
                        index.insert(key, i);
                        nodes.push((e.target, member.clone()));
                        succs.push(Vec::new());
                        reachable |= targets.contains(&e.target);
                        queue.push_back((i, depth + 1));
                        i
                    }
                };
                succs[id].push(to);
            }
        }
    }

    let has_accepting_lasso = accepting_cycle_exists(&nodes, &succs, accepting);
    Verdict { reachable, has_accepting_lasso, states_explored: nodes.len() }
}

/// A cycle through an accepting location exists iff some strongly
/// connected component is non-trivial (more than one node, or a self-loop)
/// and contains an accepting-location node. Iterative Tarjan.
fn accepting_cycle_exists(
    nodes: &[(LocId, ConvexPolyhedron)],
    succs: &[Vec<usize>],
    accepting: &BTreeSet<LocId>,
) -> bool {
    let n = nodes.len();
    let mut ids = vec![usize::MAX; n];
    let mut low = vec![0usize; n];
    let mut on_stack = vec![false; n];
    let mut stack: Vec<usize> = Vec::new();
    let mut next_id = 0usize;

    for start in 0..n {
        if ids[start] != usize::MAX {
            continue;
        }
        // (node, next successor index)
        let mut call: Vec<(usize, usize)> = vec![(start, 0)];
        while let Some(&(v, i)) = call.last() {
            if ids[v] == usize::MAX {
                ids[v] = next_id;
                low[v] = next_id;
                next_id += 1;
                stack.push(v);
                on_stack[v] = true;
            }
            if i < succs[v].len() {
                call.last_mut().expect("nonempty").1 += 1;
                let w = succs[v][i];
                if ids[w] == usize::MAX {
                    call.push((w, 0));
                } else if on_stack[w] {
                    low[v] = low[v].min(ids[w]);
                }
                continue;
            }
            call.pop();
            if let Some(&(u, _)) = call.last() {
                low[u] = low[u].min(low[v]);
            }
            if low[v] == ids[v] {
                let mut component = Vec::new();
                loop {
                    let w = stack.pop().expect("tarjan stack");
                    on_stack[w] = false;
                    component.push(w);
                    if w == v {
                        break;
                    }
                }
                let nontrivial = component.len() > 1
                    || component
                        .iter()
                        .any(|&w| succs[w].iter().any(|&s| s == w));
                if nontrivial && component.iter().any(|&w| accepting.contains(&nodes[w].0)) {
                    return true;
                }
            }
        }
    }
    false
}

/// The property a synthesis result claims to solve.
#[derive(Clone, PartialEq, Eq, Debug)]
pub enum Property {
    Reach(BTreeSet<LocId>),
    Cycle(BTreeSet<LocId>),
}

#[derive(Clone, PartialEq, Eq, Debug, Serialize)]
pub struct Counterexample {
    pub valuation: BTreeMap<String, String>,
    pub expected: bool,
    pub got: bool,
}

/// Outcome of comparing a synthesis result against the oracle on a set of
/// sampled valuations.
#[derive(Clone, PartialEq, Eq, Debug, Serialize)]
pub struct ValidationReport {
    pub samples: usize,
    pub agreements: usize,
    pub counterexamples: Vec<Counterexample>,
}

impl ValidationReport {
    pub fn all_agree(&self) -> bool {
        self.counterexamples.is_empty()
    }
}

/// Checks, for every sampled valuation, that membership in the synthesized
/// constraint agrees with the oracle verdict on the instantiated TA.
pub fn validate(
    a: &Pta,
    result: &ParamConstraint,
    property: &Property,
    samples: &[BTreeMap<VarId, Rational>],
) -> ValidationReport {
    let mut report =
        ValidationReport { samples: 0, agreements: 0, counterexamples: Vec::new() };
    let inv_scale = Rational::from_bigint(a.scale.clone()).recip();
    for v in samples {
        report.samples += 1;
        let expected = result.contains_valuation(v);
        let t = a.instantiate(v).expect("sampler yields in-domain valuations");
        let got = match property {
            Property::Reach(targets) => {
                check_concrete(&t, targets, &BTreeSet::new()).reachable
            }
            Property::Cycle(accepting) => {
                check_concrete(&t, &BTreeSet::new(), accepting).has_accepting_lasso
            }
        };
        if expected == got {
            report.agreements += 1;
        } else {
            report.counterexamples.push(Counterexample {
                valuation: v
                    .iter()
                    .map(|(p, value)| {
                        (a.params[p.index].clone(), (value * &inv_scale).to_string())
                    })
                    .collect(),
                expected,
                got,
            });
        }
    }
    report
}

/// Default sampling strategy: an integer grid per parameter from
/// `max(lower, 0)` up to `min(upper, lp + 2)` (so the uniform regime past
/// the parameter bound is spot-checked), evenly thinned to at most 64
/// points per parameter, plus 50 seeded random rationals with small
/// denominators near the low end of the box, where the guard constants
/// live. Yields only in-domain valuations.
pub fn default_sampler(
    a: &Pta,
    sel: &ModeSelection,
    seed: u64,
) -> Vec<BTreeMap<VarId, Rational>> {
    const MAX_GRID_PER_PARAM: usize = 64;
    const MAX_GRID_TOTAL: usize = 200;
    const RANDOM_SAMPLES: usize = 50;
    const RATIONAL_WINDOW: i64 = 16;

    if a.params.is_empty() {
        return vec![BTreeMap::new()];
    }

    // Fallback cap for unbounded parameters outside the lp-bearing modes:
    // a little past every finite clock bound and guard constant.
    let fallback_span = {
        let mut m = BigInt::zero();
        for (_, b) in sel.bounds.iter() {
            if let ClockBound::Finite(f) = b {
                if *f > m {
                    m = f.clone();
                }
            }
        }
        let mut z = BigInt::zero();
        for g in a.guard_set() {
            let abs = g.constant.abs();
            if abs > z {
                z = abs;
            }
        }
        let span = m + z + BigInt::from(2);
        span.max(BigInt::from(5))
    };

    let mut per_param_grids: Vec<Vec<Rational>> = Vec::new();
    let mut windows: Vec<(Rational, Rational)> = Vec::new();
    for p in a.param_ids() {
        let lo = match a.domain.lower(p) {
            Some(l) => l.clone().max(Rational::zero()),
            None => Rational::zero(),
        };
        let hi = match (a.domain.upper(p), &sel.lp) {
            (Some(u), Some(lp)) => u.clone().min(&Rational::from_bigint(lp.ceil_int()) + &Rational::from_int(2)),
            (Some(u), None) => u.clone(),
            (None, Some(lp)) => &Rational::from_bigint(lp.ceil_int()) + &Rational::from_int(2),
            (None, None) => &lo + &Rational::from_bigint(fallback_span.clone()),
        };
        let lo = if lo > hi { hi.clone() } else { lo };
        let ints = integer_grid(&lo, &hi, MAX_GRID_PER_PARAM);
        windows.push((lo, hi));
        per_param_grids.push(ints);
    }

    let mut samples: Vec<BTreeMap<VarId, Rational>> = Vec::new();
    let mut product: Vec<BTreeMap<VarId, Rational>> = vec![BTreeMap::new()];
    for (j, grid) in per_param_grids.iter().enumerate() {
        let mut next = Vec::new();
        for base in &product {
            for v in grid {
                let mut m = base.clone();
                m.insert(VarId::parameter(j), v.clone());
                next.push(m);
            }
        }
        product = next;
    }
    if product.len() > MAX_GRID_TOTAL {
        let step = product.len().div_ceil(MAX_GRID_TOTAL);
        let last = product.len() - 1;
        product = product
            .into_iter()
            .enumerate()
            .filter(|(i, _)| i % step == 0 || *i == last)
            .map(|(_, v)| v)
            .collect();
    }
    samples.extend(product);

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for _ in 0..RANDOM_SAMPLES {
        let mut v = BTreeMap::new();
        for (j, (lo, hi)) in windows.iter().enumerate() {
            let span = (hi - lo).min(Rational::from_int(RATIONAL_WINDOW));
            let denom = rng.random_range(1..=4u64);
            let steps = (&span * &Rational::from_int(denom as i64)).floor_int();
            let steps = steps.to_u64().unwrap_or(0);
            let k = if steps == 0 { 0 } else { rng.random_range(0..=steps) };
            let value = lo + &Rational::new(k as i64, denom as i64);
            v.insert(VarId::parameter(j), value);
        }
        samples.push(v);
    }
    samples
}

/// Integers in `[lo, hi]`, evenly thinned to at most `max_points` while
/// keeping the three lowest and three highest (the guard-constant region
/// and the beyond-the-bound tail).
fn integer_grid(lo: &Rational, hi: &Rational, max_points: usize) -> Vec<Rational> {
    let first = lo.ceil_int();
    let last = hi.floor_int();
    let mut out: Vec<BigInt> = Vec::new();
    if first > last {
        return vec![lo.clone()];
    }
    let count = (&last - &first) + BigInt::from(1);
    match count.to_usize() {
        Some(n) if n <= max_points => {
            let mut v = first.clone();
            while v <= last {
                out.push(v.clone());
                v += 1;
            }
        }
        _ => {
            let keep_edges = 3usize;
            for i in 0..keep_edges {
                out.push(&first + BigInt::from(i));
                out.push(&last - BigInt::from(i));
            }
            let inner = max_points - 2 * keep_edges;
            for i in 0..inner {
                // Evenly spaced interior points.
                let num = &count * BigInt::from(i + 1);
                let den = BigInt::from(inner + 1);
                out.push(&first + num / den);
            }
            out.sort();
            out.dedup();
        }
    }
    out.into_iter().map(Rational::from_bigint).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::extrapolation::{select_mode, RequestedMode};
    use crate::model::parse_model;

    fn fig1a() -> Pta {
        parse_model(include_str!("../../../fixtures/paper/fig1a.pta")).unwrap()
    }

    fn fig4c() -> Pta {
        parse_model(include_str!("../../../fixtures/paper/fig4c.pta")).unwrap()
    }

    fn val(a: &Pta, entries: &[(usize, i64)]) -> BTreeMap<VarId, Rational> {
        let _ = a;
        entries
            .iter()
            .map(|(j, v)| (VarId::parameter(*j), Rational::from_int(*v)))
            .collect()
    }

    #[test]
    fn fig1a_reachability_verdicts() {
        let a = fig1a();
        let l1 = BTreeSet::from([a.location_named("l1").unwrap()]);
        let none = BTreeSet::new();
        // At p = 3 the target is reachable after two loops.
        let t = a.instantiate(&val(&a, &[(0, 3)])).unwrap();
        assert!(check_concrete(&t, &l1, &none).reachable);
        // At p = 0 the guard x < 0 never fires.
        let t = a.instantiate(&val(&a, &[(0, 0)])).unwrap();
        assert!(!check_concrete(&t, &l1, &none).reachable);
    }

    #[test]
    fn fig4c_has_no_accepting_lasso_but_loops_exist() {
        let a = fig4c();
        let l0 = BTreeSet::from([a.location_named("l0").unwrap()]);
        let l1 = BTreeSet::from([a.location_named("l1").unwrap()]);
        let t = a.instantiate(&val(&a, &[(0, 600)])).unwrap();
        // The invariant y <= p caps loop iterations, so no infinite run
        // through l0 (or anywhere) exists.
        let v = check_concrete(&t, &BTreeSet::new(), &l0);
        assert!(!v.has_accepting_lasso);
        let v = check_concrete(&t, &BTreeSet::new(), &l1);
        assert!(!v.has_accepting_lasso);
    }

    #[test]
    fn unguarded_self_loop_is_an_accepting_lasso() {
        let a = parse_model(
            "clocks x;\nloc l0 [accepting] { on a goto l0; }\ninit l0;\n",
        )
        .unwrap();
        let t = a.instantiate(&BTreeMap::new()).unwrap();
        let l0 = BTreeSet::from([LocId(0)]);
        assert!(check_concrete(&t, &BTreeSet::new(), &l0).has_accepting_lasso);
    }

    #[test]
    fn extrapolated_oracle_matches_plain_search() {
        let a = parse_model(include_str!("../../../fixtures/aux/param_free.pta")).unwrap();
        let t = a.instantiate(&BTreeMap::new()).unwrap();
        let l1 = BTreeSet::from([a.location_named("l1").unwrap()]);
        let acc = BTreeSet::from([a.location_named("l0").unwrap()]);
        let fast = check_concrete(&t, &l1, &acc);
        let slow = check_concrete_plain(&t, &l1, &acc, 2 * fast.states_explored);
        assert_eq!(fast.reachable, slow.reachable);
        assert_eq!(fast.has_accepting_lasso, slow.has_accepting_lasso);
    }

    #[test]
    fn rescaling_invariance() {
        // The same model with all constants scaled by 3, checked at the
        // correspondingly scaled valuation, gives identical verdicts.
        let base = parse_model(include_str!("../../../fixtures/paper/fig1a.pta")).unwrap();
        let scaled = parse_model(
            "clocks x, y;\n\
             params p in [0, 15];\n\
             loc l0 [inv: x <= 3] {\n\
               on a reset {x} goto l0;\n\
               on b when 3 < y && x < p goto l1;\n\
             }\n\
             loc l1 [accepting] {}\n\
             init l0;\n",
        )
        .unwrap();
        let l1 = BTreeSet::from([base.location_named("l1").unwrap()]);
        let none = BTreeSet::new();
        for v in [0i64, 1, 2, 5] {
            let tb = base.instantiate(&val(&base, &[(0, v)])).unwrap();
            let ts = scaled.instantiate(&val(&scaled, &[(0, 3 * v)])).unwrap();
            assert_eq!(
                check_concrete(&tb, &l1, &none).reachable,
                check_concrete(&ts, &l1, &none).reachable,
                "verdicts diverge at p = {v}"
            );
        }
    }

    #[test]
    fn validate_agrees_on_fig1a_grid() {
        use crate::engine::{eef, Caps};
        let a = fig1a();
        let sel = select_mode(&a, RequestedMode::Auto);
        let l1 = BTreeSet::from([a.location_named("l1").unwrap()]);
        let (k, _) = eef(&a, &l1, &sel.bounds, Caps::unlimited());
        let samples = default_sampler(&a, &sel, 0);
        assert!(samples.len() >= 56, "sampler yields {} points", samples.len());
        let report = validate(&a, &k, &Property::Reach(l1), &samples);
        assert!(report.all_agree(), "counterexamples: {:?}", report.counterexamples);
        // Integer grid endpoints behave as expected: 0 excluded, 1..5 in.
        assert!(!k.contains_valuation(&val(&a, &[(0, 0)])));
        for v in 1..=5 {
            assert!(k.contains_valuation(&val(&a, &[(0, v)])));
        }
    }

    #[test]
    fn validate_reports_corrupted_results() {
        use crate::engine::{eef, Caps};
        use crate::geometry::Relation;
        let a = fig1a();
        let sel = select_mode(&a, RequestedMode::Auto);
        let l1 = BTreeSet::from([a.location_named("l1").unwrap()]);
        let (_, _) = eef(&a, &l1, &sel.bounds, Caps::unlimited());
        // Deliberately wrong result: p >= 2 instead of p > 0.
        let mut corrupted = ParamConstraint::bottom();
        corrupted.push(
            ConvexPolyhedron::new(
                a.roster().params_only(),
                vec![LinearInequality::lower_bound(
                    VarId::parameter(0),
                    Rational::from_int(2),
                    Relation::LessEq,
                )],
            )
            .unwrap(),
        );
        let samples = default_sampler(&a, &sel, 0);
        let report = validate(&a, &corrupted, &Property::Reach(l1), &samples);
        assert!(!report.all_agree());
        // The violating valuation is named: p = 1 is reachable but excluded.
        assert!(report
            .counterexamples
            .iter()
            .any(|c| c.valuation["p"] == "1" && c.got && !c.expected));
    }

    #[test]
    fn empty_result_for_unreachable_target_agrees_vacuously() {
        let a = parse_model(
            "clocks x;\n\
             params p in [0, 3];\n\
             loc l0 { on a when x < 0 goto l1; }\n\
             loc l1 {}\n\
             init l0;\n",
        )
        .unwrap();
        let sel = select_mode(&a, RequestedMode::Auto);
        let l1 = BTreeSet::from([a.location_named("l1").unwrap()]);
        let report = validate(
            &a,
            &ParamConstraint::bottom(),
            &Property::Reach(l1),
            &default_sampler(&a, &sel, 0),
        );
        assert!(report.all_agree());
    }
}
