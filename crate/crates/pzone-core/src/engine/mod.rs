//! Symbolic semantics of PTAs and the synthesis traversals.
//!
//! The reachability traversal is a post-order depth-first walk of the
//! symbolic reachability tree where each successor is extrapolated before
//! the recursive step and split member-wise into convex states. The passed
//! set is path-local: a state is skipped only when an equal state (same
//! location, equal zone) lies on the current path. Cycle synthesis reuses
//! the walk and reports a lasso when a successor equals one of its path
//! ancestors with an accepting location on the loop segment.

mod export;

pub use export::{export_graph, GraphDoc, GraphEdge, GraphFormat, GraphNode};

use std::collections::{BTreeMap, BTreeSet};

use serde::Serialize;

use crate::extrapolation::{extrapolate, ClockBounds, ModeSelection, Side};
use crate::geometry::{
    ConvexPolyhedron, LinearInequality, PolySet, Rational, Relation, VarId, VarInterval,
};
use crate::model::{Edge, LocId, ParamDomain, Pta};

/// A pair of a location and a non-empty parametric zone over clocks and
/// parameters, included in the location's invariant.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct SymbolicState {
    pub location: LocId,
    pub zone: ConvexPolyhedron,
}

/// A finite union of convex polyhedra over the parameters only: the result
/// of a synthesis run. Disjuncts are pruned by pairwise containment.
#[derive(Clone, PartialEq, Eq, Debug, Default)]
pub struct ParamConstraint {
    disjuncts: PolySet,
}

impl ParamConstraint {
    /// The empty constraint, usually written bottom.
    pub fn bottom() -> Self {
        ParamConstraint { disjuncts: PolySet::empty() }
    }

    pub fn push(&mut self, disjunct: ConvexPolyhedron) {
        debug_assert!(
            disjunct.roster().vars().iter().all(|v| v.is_parameter()),
            "parameter constraints live on parameter-only rosters"
        );
        self.disjuncts.push(disjunct);
    }

    pub fn is_bottom(&self) -> bool {
        self.disjuncts.is_empty()
    }

    pub fn disjuncts(&self) -> &PolySet {
        &self.disjuncts
    }

    pub fn contains_valuation(&self, v: &BTreeMap<VarId, Rational>) -> bool {
        self.disjuncts.contains_point(v)
    }

    /// Exact set equality of the two unions.
    pub fn set_equal(&self, other: &ParamConstraint) -> bool {
        self.disjuncts.set_equal(&other.disjuncts)
    }

    /// Membership agreement on a rational grid: `ranges` gives the
    /// inclusive box per parameter, walked with the given step.
    pub fn equivalent_on_grid(
        &self,
        other: &ParamConstraint,
        ranges: &[(Rational, Rational)],
        step: &Rational,
    ) -> bool {
        let mut point: BTreeMap<VarId, Rational> = BTreeMap::new();
        self.grid_walk(other, ranges, step, 0, &mut point)
    }

    fn grid_walk(
        &self,
        other: &ParamConstraint,
        ranges: &[(Rational, Rational)],
        step: &Rational,
        dim: usize,
        point: &mut BTreeMap<VarId, Rational>,
    ) -> bool {
        if dim == ranges.len() {
            return self.contains_valuation(point) == other.contains_valuation(point);
        }
        let (lo, hi) = &ranges[dim];
        let mut v = lo.clone();
        while v <= *hi {
            point.insert(VarId::parameter(dim), v.clone());
            if !self.grid_walk(other, ranges, step, dim + 1, point) {
                return false;
            }
            v = &v + step;
        }
        point.remove(&VarId::parameter(dim));
        true
    }

    /// One rendered constraint per disjunct; empty for bottom.
    pub fn render_disjuncts(&self) -> Vec<String> {
        self.disjuncts.render_disjuncts()
    }

    /// Maps a constraint over internal (rescaled) parameter units back to
    /// source units: each internal parameter is `scale` times the source
    /// one, so parameter coefficients are multiplied by `scale`.
    pub fn in_source_units(&self, scale: &num_bigint::BigInt) -> ParamConstraint {
        use num_traits::One;
        if scale.is_one() {
            return self.clone();
        }
        let factor = Rational::from_bigint(scale.clone());
        let mut out = PolySet::empty();
        for member in self.disjuncts.members() {
            let rows: Vec<LinearInequality> = member
                .rows()
                .iter()
                .map(|row| {
                    LinearInequality::new(
                        row.coeffs().iter().map(|(v, c)| (*v, c * &factor)),
                        row.constant().clone(),
                        row.relation(),
                    )
                })
                .collect();
            out.push(
                ConvexPolyhedron::new(member.roster().clone(), rows)
                    .expect("rows keep their roster"),
            );
        }
        ParamConstraint { disjuncts: out }
    }
}

impl From<PolySet> for ParamConstraint {
    fn from(disjuncts: PolySet) -> Self {
        ParamConstraint { disjuncts }
    }
}

/// Whether a traversal ran to exhaustion or hit a cap.
#[derive(Clone, Copy, PartialEq, Eq, Debug, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Termination {
    Complete,
    CapReached,
}

/// Counters of a traversal. `states_explored` counts every symbolic state
/// the walk visited (including target hits and passed-set skips);
/// `split_states` counts the convex members produced by extrapolating
/// successors; `max_depth` is the longest path from the root.
#[derive(Clone, PartialEq, Eq, Debug, Serialize)]
pub struct ExplorationStats {
    pub states_explored: usize,
    pub split_states: usize,
    pub max_depth: usize,
    pub termination: Termination,
}

impl ExplorationStats {
    pub(crate) fn new() -> Self {
        ExplorationStats {
            states_explored: 0,
            split_states: 0,
            max_depth: 0,
            termination: Termination::Complete,
        }
    }
}

/// Exploration caps; zero means unlimited.
#[derive(Clone, Copy, PartialEq, Eq, Debug, Default)]
pub struct Caps {
    pub max_states: usize,
    pub max_depth: usize,
}

impl Caps {
    pub fn unlimited() -> Self {
        Caps::default()
    }

    pub(crate) fn states_hit(&self, n: usize) -> bool {
        self.max_states > 0 && n >= self.max_states
    }

    pub(crate) fn depth_hit(&self, d: usize) -> bool {
        self.max_depth > 0 && d >= self.max_depth
    }
}

/// The initial symbolic state: the time-elapsed origin intersected with the
/// initial invariant and the (finite sides of the) domain box. `None` when
/// that zone is empty, which makes any analysis trivially bottom.
pub fn initial_state(a: &Pta) -> Option<SymbolicState> {
    let roster = a.roster().clone();
    let clocks = a.clock_ids();
    let mut rows = Vec::new();
    for x in &clocks {
        rows.push(LinearInequality::upper_bound(*x, Rational::zero(), Relation::LessEq));
        rows.push(LinearInequality::lower_bound(*x, Rational::zero(), Relation::LessEq));
    }
    let origin = ConvexPolyhedron::new(roster, rows).expect("origin rows are well-formed");
    let zone = origin
        .time_elapse(&clocks)
        .conjoin(invariant_rows(a, a.initial))
        .conjoin(a.domain.to_rows());
    if zone.is_empty() {
        None
    } else {
        Some(SymbolicState { location: a.initial, zone })
    }
}

fn invariant_rows(a: &Pta, loc: LocId) -> Vec<LinearInequality> {
    a.locations[loc.0]
        .invariant
        .iter()
        .flat_map(|g| g.to_rows())
        .collect()
}

/// The symbolic successor along one edge:
/// `elapse(reset(zone and guard, R) and I(target)) and I(target)`,
/// or `None` when unsatisfiable.
pub fn succ(a: &Pta, s: &SymbolicState, e: &Edge) -> Option<SymbolicState> {
    debug_assert_eq!(e.source, s.location);
    let guarded = s.zone.conjoin(e.guard.iter().flat_map(|g| g.to_rows()));
    if guarded.is_empty() {
        return None;
    }
    let resets: Vec<VarId> = e.resets.iter().copied().collect();
    let inv = invariant_rows(a, e.target);
    let zone = guarded
        .reset(&resets)
        .conjoin(inv.clone())
        .time_elapse(&a.clock_ids())
        .conjoin(inv);
    if zone.is_empty() {
        None
    } else {
        Some(SymbolicState { location: e.target, zone })
    }
}

/// What a traversal is looking for.
enum Goal {
    Reach(BTreeSet<LocId>),
    Cycle(BTreeSet<LocId>),
}

pub(crate) type Fingerprint = Vec<VarInterval>;

pub(crate) fn fingerprint(zone: &ConvexPolyhedron) -> Fingerprint {
    zone.roster()
        .vars()
        .iter()
        .map(|v| zone.interval_of(*v))
        .collect()
}

struct PathEntry {
    state: SymbolicState,
    fingerprint: Fingerprint,
}

struct Frame {
    children: Vec<SymbolicState>,
    next: usize,
}

/// The shared depth-first walk. Successors are extrapolated and expanded
/// member-wise; the passed set is the current path.
fn explore(a: &Pta, goal: Goal, bounds: &ClockBounds, caps: Caps) -> (ParamConstraint, ExplorationStats) {
    let mut k = ParamConstraint::bottom();
    let mut stats = ExplorationStats::new();
    let Some(root) = initial_state(a) else {
        return (k, stats);
    };

    let expand = |state: &SymbolicState, stats: &mut ExplorationStats| -> Vec<SymbolicState> {
        let mut children = Vec::new();
        for e in a.edges_from(state.location) {
            if let Some(s) = succ(a, state, e) {
                let members = extrapolate(&s.zone, bounds);
                stats.split_states += members.len();
                for zone in members.members() {
                    children.push(SymbolicState { location: s.location, zone: zone.clone() });
                }
            }
        }
        children
    };

    stats.states_explored += 1;
    stats.max_depth = 1;
    if let Goal::Reach(targets) = &goal {
        if targets.contains(&root.location) {
            k.push(root.zone.project_to_params());
            return (k, stats);
        }
    }

    let mut frames: Vec<Frame> = Vec::new();
    let mut path: Vec<PathEntry> = Vec::new();
    let children = expand(&root, &mut stats);
    let fp = fingerprint(&root.zone);
    frames.push(Frame { children, next: 0 });
    path.push(PathEntry { state: root, fingerprint: fp });

    'walk: while let Some(frame) = frames.last_mut() {
        if frame.next >= frame.children.len() {
            frames.pop();
            path.pop();
            continue;
        }
        if caps.states_hit(stats.states_explored) {
            stats.termination = Termination::CapReached;
            break 'walk;
        }
        let child = frame.children[frame.next].clone();
        frame.next += 1;
        stats.states_explored += 1;

        if let Goal::Reach(targets) = &goal {
            if targets.contains(&child.location) {
                k.push(child.zone.project_to_params());
                continue;
            }
        }

        let fp = fingerprint(&child.zone);
        let ancestor = path.iter().position(|entry| {
            entry.state.location == child.location
                && entry.fingerprint == fp
                && entry.state.zone.equal(&child.zone)
        });
        if let Some(i) = ancestor {
            if let Goal::Cycle(accepting) = &goal {
                let loops_through_accepting = path[i..]
                    .iter()
                    .map(|e| e.state.location)
                    .chain(std::iter::once(child.location))
                    .any(|l| accepting.contains(&l));
                if loops_through_accepting {
                    k.push(child.zone.project_to_params());
                }
            }
            continue;
        }

        if caps.depth_hit(path.len() + 1) {
            stats.termination = Termination::CapReached;
            continue;
        }
        let children = expand(&child, &mut stats);
        frames.push(Frame { children, next: 0 });
        path.push(PathEntry { state: child, fingerprint: fp });
        stats.max_depth = stats.max_depth.max(path.len());
    }

    (k, stats)
}

/// Reachability synthesis: the union over the traversal of the parameter
/// projections of the zones reaching a target location. Sound, and complete
/// when the traversal terminates without caps.
pub fn eef(
    a: &Pta,
    targets: &BTreeSet<LocId>,
    bounds: &ClockBounds,
    caps: Caps,
) -> (ParamConstraint, ExplorationStats) {
    explore(a, Goal::Reach(targets.clone()), bounds, caps)
}

/// Options of [`cycle_synth`].
#[derive(Clone, Copy, Debug)]
pub struct CycleOptions {
    /// Apply the parameter-bounding correction when the extrapolation
    /// bounds came from a syntactic parameter bound. Disabling this
    /// reproduces the documented false-positive pathology.
    pub apply_correction: bool,
    /// Extend the correction to the L side. The published argument spells
    /// out the upper-bound (U) side; the L side is an interpretation and
    /// stays opt-in.
    pub l_side: bool,
}

impl Default for CycleOptions {
    fn default() -> Self {
        CycleOptions { apply_correction: true, l_side: false }
    }
}

/// Result of a cycle synthesis.
#[derive(Clone, Debug)]
pub struct CycleRun {
    pub constraint: ParamConstraint,
    pub stats: ExplorationStats,
    /// Whether the parameter-bounding correction was in effect.
    pub correction_applied: bool,
}

/// Cycle (liveness) synthesis: parameter projections of the zones closing a
/// lasso through an accepting location.
///
/// When the bounds of `sel` were derived from a parameter bound, the domain
/// is first tightened by that bound on every parameter with an infinite
/// upper side (the zone above it would otherwise lose its invariants to
/// cylindrification and produce spurious cycles). Any synthesized disjunct
/// whose closure reaches the bound then has its pure upper bounds on that
/// parameter removed, since accepting-run existence is uniform beyond it.
pub fn cycle_synth(
    a: &Pta,
    accepting: &BTreeSet<LocId>,
    sel: &ModeSelection,
    caps: Caps,
    opts: CycleOptions,
) -> CycleRun {
    let correction = match (&sel.lp, sel.side) {
        (Some(lp), Some(side)) if opts.apply_correction => match side {
            Side::U => Some(lp.clone()),
            Side::L if opts.l_side => Some(lp.clone()),
            Side::L => None,
        },
        _ => None,
    };
    let Some(lp) = correction else {
        let (constraint, stats) = explore(a, Goal::Cycle(accepting.clone()), &sel.bounds, caps);
        return CycleRun { constraint, stats, correction_applied: false };
    };

    // Tighten the domain at the parameter bound on unbounded-above sides.
    let affected: Vec<VarId> = a
        .param_ids()
        .into_iter()
        .filter(|p| a.domain.upper(*p).is_none())
        .collect();
    let bounded_domain = ParamDomain::new(
        a.param_ids()
            .into_iter()
            .map(|p| {
                let lo = a.domain.lower(p).cloned();
                let hi = a.domain.upper(p).cloned().or_else(|| Some(lp.clone()));
                (lo, hi)
            })
            .collect(),
    );
    let tightened = Pta::new(
        a.clocks.clone(),
        a.params.clone(),
        bounded_domain,
        a.locations.clone(),
        a.initial,
        a.edges.clone(),
        a.scale.clone(),
    );
    let (constraint, stats) = explore(&tightened, Goal::Cycle(accepting.clone()), &sel.bounds, caps);

    // Bound removal: a disjunct whose closure admits p = lp extends
    // uniformly beyond the bound.
    let mut removed = ParamConstraint::bottom();
    for member in constraint.disjuncts().members() {
        let mut current = member.clone();
        for p in &affected {
            let at_bound = current.closure().conjoin([
                LinearInequality::upper_bound(*p, lp.clone(), Relation::LessEq),
                LinearInequality::lower_bound(*p, lp.clone(), Relation::LessEq),
            ]);
            if !at_bound.is_empty() {
                current = drop_pure_upper_bounds(&current, *p);
            }
        }
        removed.push(current);
    }
    CycleRun { constraint: removed, stats, correction_applied: true }
}

/// Removes rows that are upper bounds on `p` alone (`c*p + k REL 0` with
/// `c > 0` and no other variable).
fn drop_pure_upper_bounds(d: &ConvexPolyhedron, p: VarId) -> ConvexPolyhedron {
    let rows: Vec<LinearInequality> = d
        .rows()
        .iter()
        .filter(|row| !(row.coeffs().len() == 1 && row.coeff(p).is_positive()))
        .cloned()
        .collect();
    ConvexPolyhedron::new(d.roster().clone(), rows).expect("rows come from the same roster")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::extrapolation::{select_mode, RequestedMode};
    use crate::model::parse_model;

    fn fig1a() -> Pta {
        parse_model(include_str!("../../../../fixtures/paper/fig1a.pta")).unwrap()
    }

    fn fig4a() -> Pta {
        parse_model(include_str!("../../../../fixtures/paper/fig4a.pta")).unwrap()
    }

    fn fig4c() -> Pta {
        parse_model(include_str!("../../../../fixtures/paper/fig4c.pta")).unwrap()
    }

    fn fig3() -> Pta {
        parse_model(include_str!("../../../../fixtures/paper/fig3.pta")).unwrap()
    }

    fn param_poly(a: &Pta, rows: Vec<LinearInequality>) -> ConvexPolyhedron {
        ConvexPolyhedron::new(a.roster().params_only(), rows).unwrap()
    }

    fn p() -> VarId {
        VarId::parameter(0)
    }

    fn r(n: i64) -> Rational {
        Rational::from_int(n)
    }

    #[test]
    fn initial_state_fig1a() {
        let a = fig1a();
        let s = initial_state(&a).unwrap();
        assert_eq!(s.location, a.initial);
        // x = y <= 1 with the domain box 0 <= p <= 5.
        let x = VarId::clock(0);
        let y = VarId::clock(1);
        let want = ConvexPolyhedron::new(
            a.roster().clone(),
            vec![
                LinearInequality::new([(x, r(1)), (y, r(-1))], r(0), Relation::LessEq),
                LinearInequality::new([(y, r(1)), (x, r(-1))], r(0), Relation::LessEq),
                LinearInequality::lower_bound(x, r(0), Relation::LessEq),
                LinearInequality::upper_bound(x, r(1), Relation::LessEq),
                LinearInequality::lower_bound(p(), r(0), Relation::LessEq),
                LinearInequality::upper_bound(p(), r(5), Relation::LessEq),
            ],
        )
        .unwrap();
        assert!(s.zone.equal(&want));
    }

    #[test]
    fn initial_state_fig4a() {
        let a = fig4a();
        let s = initial_state(&a).unwrap();
        let x = VarId::clock(0);
        let y = VarId::clock(1);
        let want = ConvexPolyhedron::new(
            a.roster().clone(),
            vec![
                LinearInequality::new([(x, r(1)), (y, r(-1))], r(0), Relation::LessEq),
                LinearInequality::new([(y, r(1)), (x, r(-1))], r(0), Relation::LessEq),
                LinearInequality::lower_bound(x, r(0), Relation::LessEq),
                LinearInequality::upper_bound(x, r(1), Relation::LessEq),
                LinearInequality::lower_bound(p(), r(0), Relation::LessEq),
            ],
        )
        .unwrap();
        assert!(s.zone.equal(&want));
    }

    #[test]
    fn initial_state_pinned_at_origin() {
        let a = parse_model(
            "clocks x, y;\n\
             loc l0 [inv: x <= 0] { }\n\
             init l0;\n",
        )
        .unwrap();
        let s = initial_state(&a).unwrap();
        let x = VarId::clock(0);
        let y = VarId::clock(1);
        let want = ConvexPolyhedron::new(
            a.roster().clone(),
            vec![
                LinearInequality::upper_bound(x, r(0), Relation::LessEq),
                LinearInequality::lower_bound(x, r(0), Relation::LessEq),
                LinearInequality::upper_bound(y, r(0), Relation::LessEq),
                LinearInequality::lower_bound(y, r(0), Relation::LessEq),
            ],
        )
        .unwrap();
        assert!(s.zone.equal(&want));
    }

    #[test]
    fn succ_fig1a_loop_from_root() {
        let a = fig1a();
        let root = initial_state(&a).unwrap();
        let loop_edge = &a.edges[0];
        let s = succ(&a, &root, loop_edge).unwrap();
        let x = VarId::clock(0);
        let y = VarId::clock(1);
        // x <= y <= x + 1, x <= 1 (plus the domain box).
        let want = ConvexPolyhedron::new(
            a.roster().clone(),
            vec![
                LinearInequality::new([(x, r(1)), (y, r(-1))], r(0), Relation::LessEq),
                LinearInequality::new([(y, r(1)), (x, r(-1))], r(-1), Relation::LessEq),
                LinearInequality::lower_bound(x, r(0), Relation::LessEq),
                LinearInequality::upper_bound(x, r(1), Relation::LessEq),
                LinearInequality::lower_bound(p(), r(0), Relation::LessEq),
                LinearInequality::upper_bound(p(), r(5), Relation::LessEq),
            ],
        )
        .unwrap();
        assert!(s.zone.equal(&want));
    }

    #[test]
    fn succ_fig1a_to_target_from_root_is_empty() {
        let a = fig1a();
        let root = initial_state(&a).unwrap();
        // Guard 1 < y against x = y <= 1 is unsatisfiable.
        assert!(succ(&a, &root, &a.edges[1]).is_none());
    }

    #[test]
    fn succ_false_guard_is_none() {
        let a = parse_model(
            "clocks x;\n\
             loc l0 { on a when x < 0 goto l0; }\n\
             init l0;\n",
        )
        .unwrap();
        let root = initial_state(&a).unwrap();
        assert!(succ(&a, &root, &a.edges[0]).is_none());
    }

    #[test]
    fn eef_fig1a_auto() {
        let a = fig1a();
        let sel = select_mode(&a, RequestedMode::Auto);
        let targets = BTreeSet::from([a.location_named("l1").unwrap()]);
        let (k, stats) = eef(&a, &targets, &sel.bounds, Caps::unlimited());
        assert_eq!(stats.termination, Termination::Complete);
        let want = param_poly(
            &a,
            vec![
                LinearInequality::lower_bound(p(), r(0), Relation::StrictLess),
                LinearInequality::upper_bound(p(), r(5), Relation::LessEq),
            ],
        );
        assert_eq!(k.disjuncts().len(), 1);
        assert!(k.disjuncts().members()[0].equal(&want));
    }

    #[test]
    fn eef_fig1a_without_extrapolation_hits_cap() {
        let a = fig1a();
        let sel = select_mode(&a, RequestedMode::None);
        let targets = BTreeSet::from([a.location_named("l1").unwrap()]);
        let caps = Caps { max_states: 1000, max_depth: 0 };
        let (_, stats) = eef(&a, &targets, &sel.bounds, caps);
        assert_eq!(stats.termination, Termination::CapReached);
    }

    #[test]
    fn eef_fig3_partial() {
        let a = fig3();
        let sel = select_mode(&a, RequestedMode::Auto);
        let targets = BTreeSet::from([a.location_named("l1").unwrap()]);
        let (k, stats) = eef(&a, &targets, &sel.bounds, Caps::unlimited());
        assert_eq!(stats.termination, Termination::Complete);
        let want = param_poly(
            &a,
            vec![
                LinearInequality::lower_bound(p(), r(0), Relation::LessEq),
                LinearInequality::upper_bound(p(), r(1), Relation::LessEq),
            ],
        );
        assert_eq!(k.disjuncts().len(), 1);
        assert!(k.disjuncts().members()[0].equal(&want));
    }

    #[test]
    fn eef_fig4a_mhat() {
        let a = fig4a();
        let sel = select_mode(&a, RequestedMode::Auto);
        let targets = BTreeSet::from([a.location_named("l1").unwrap()]);
        let (k, stats) = eef(&a, &targets, &sel.bounds, Caps::unlimited());
        assert_eq!(stats.termination, Termination::Complete);
        assert!(stats.max_depth > 1030);
        let want = param_poly(
            &a,
            vec![LinearInequality::lower_bound(p(), r(1), Relation::LessEq)],
        );
        assert_eq!(k.disjuncts().len(), 1);
        assert!(k.disjuncts().members()[0].equal(&want));
    }

    #[test]
    fn eef_unreachable_target_is_bottom() {
        let a = parse_model(
            "clocks x, y;\n\
             params p in [0, 5];\n\
             loc l0 [inv: x <= 1] { on a reset {x} goto l0; }\n\
             loc l2 {}\n\
             init l0;\n",
        )
        .unwrap();
        let sel = select_mode(&a, RequestedMode::Auto);
        let targets = BTreeSet::from([a.location_named("l2").unwrap()]);
        let (k, stats) = eef(&a, &targets, &sel.bounds, Caps::unlimited());
        assert_eq!(stats.termination, Termination::Complete);
        assert!(k.is_bottom());
    }

    #[test]
    fn eef_counts_distinct_loop_states_of_fig1a() {
        // The vec-M state space of the bounded toy model has four distinct
        // symbolic states at the looping location.
        let a = fig1a();
        let sel = select_mode(&a, RequestedMode::Auto);
        let targets = BTreeSet::from([a.location_named("l1").unwrap()]);
        let doc = export_graph(&a, &sel.bounds, Caps::unlimited(), GraphFormat::Json);
        let parsed: serde_json::Value = serde_json::from_str(&doc).unwrap();
        let nodes = parsed["nodes"].as_array().unwrap();
        let l0_nodes = nodes
            .iter()
            .filter(|n| n["location"] == serde_json::json!("l0"))
            .count();
        assert_eq!(l0_nodes, 4);
        let _ = targets;
    }

    #[test]
    fn cycle_synth_fig4c_corrected_is_bottom() {
        let a = fig4c();
        let sel = select_mode(&a, RequestedMode::Auto);
        let accepting = BTreeSet::from([a.location_named("l0").unwrap()]);
        let run = cycle_synth(&a, &accepting, &sel, Caps::unlimited(), CycleOptions::default());
        assert!(run.correction_applied);
        assert_eq!(run.stats.termination, Termination::Complete);
        assert!(run.constraint.is_bottom());
    }

    #[test]
    fn cycle_synth_fig4c_uncorrected_synthesizes_spurious_tail() {
        // Without the parameter-bounding correction the cylindrification
        // erases the invariant above the bound and a self-looping state
        // appears for p > 523. Kept as a regression expectation.
        let a = fig4c();
        let sel = select_mode(&a, RequestedMode::Auto);
        let accepting = BTreeSet::from([a.location_named("l0").unwrap()]);
        let opts = CycleOptions { apply_correction: false, l_side: false };
        let run = cycle_synth(&a, &accepting, &sel, Caps::unlimited(), opts);
        assert!(!run.correction_applied);
        assert_eq!(run.stats.termination, Termination::Complete);
        let want = param_poly(
            &a,
            vec![LinearInequality::lower_bound(p(), r(523), Relation::StrictLess)],
        );
        assert_eq!(run.constraint.disjuncts().len(), 1);
        assert!(run.constraint.disjuncts().members()[0].equal(&want));
    }

    #[test]
    fn cycle_synth_unguarded_accepting_self_loop_is_universe() {
        let a = parse_model(
            "clocks x;\n\
             params p in [0, 5];\n\
             loc l0 [accepting] { on a goto l0; }\n\
             init l0;\n",
        )
        .unwrap();
        let sel = select_mode(&a, RequestedMode::Auto);
        let accepting = BTreeSet::from([a.location_named("l0").unwrap()]);
        let run = cycle_synth(&a, &accepting, &sel, Caps::unlimited(), CycleOptions::default());
        let want = param_poly(
            &a,
            vec![
                LinearInequality::lower_bound(p(), r(0), Relation::LessEq),
                LinearInequality::upper_bound(p(), r(5), Relation::LessEq),
            ],
        );
        assert_eq!(run.constraint.disjuncts().len(), 1);
        assert!(run.constraint.disjuncts().members()[0].equal(&want));
    }

    #[test]
    fn bound_removal_drops_the_upper_bound_at_the_parameter_bound() {
        // A disjunct like 400 < p <= 522 whose closure contains p = 522
        // loses its upper bound.
        let a = fig4c();
        let d = param_poly(
            &a,
            vec![
                LinearInequality::lower_bound(p(), r(400), Relation::StrictLess),
                LinearInequality::upper_bound(p(), r(522), Relation::LessEq),
            ],
        );
        let lp = r(522);
        let at_bound = d.closure().conjoin([
            LinearInequality::upper_bound(p(), lp.clone(), Relation::LessEq),
            LinearInequality::lower_bound(p(), lp, Relation::LessEq),
        ]);
        assert!(!at_bound.is_empty());
        let dropped = drop_pure_upper_bounds(&d, p());
        let want = param_poly(
            &a,
            vec![LinearInequality::lower_bound(p(), r(400), Relation::StrictLess)],
        );
        assert!(dropped.equal(&want));
    }

    #[test]
    fn empty_initial_zone_is_trivially_bottom() {
        // Initial invariant x <= 0 and x >= 2 cannot be entered.
        let a = parse_model(
            "clocks x;\n\
             loc l0 [inv: x <= 0 && x >= 2] { on a goto l0; }\n\
             init l0;\n",
        )
        .unwrap();
        assert!(initial_state(&a).is_none());
        let sel = select_mode(&a, RequestedMode::Auto);
        let (k, stats) = eef(
            &a,
            &BTreeSet::from([LocId(0)]),
            &sel.bounds,
            Caps::unlimited(),
        );
        assert!(k.is_bottom());
        assert_eq!(stats.states_explored, 0);
        assert_eq!(stats.termination, Termination::Complete);
    }
}
