//! Constant-bound computations and zone extrapolation.
//!
//! A clock whose constraints can never exceed an integer bound `M` may be
//! "unconstrained" above it: the `(M,x)`-extrapolation splits a zone into
//! the part with `x <= M` (kept exact) and the cylindrified part with
//! `x > M`. Per-clock bounds come from the guard constants over the
//! parameter domain; for subclasses with unbounded lower/upper-bound
//! parameters a syntactic bound on the parameters themselves makes the
//! per-clock bounds finite.

use std::collections::BTreeMap;
use std::fmt;

use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};
use serde::Serialize;
use thiserror::Error;

use crate::geometry::{
    ConvexPolyhedron, LinearInequality, PolySet, Rational, Relation, VarId,
};
use crate::model::{ParamDomain, Pta, SimpleClockGuard};

/// Extrapolation bound of one clock. `Infinite` means the clock is never
/// extrapolated (partial mode).
#[derive(Clone, PartialEq, Eq, Debug)]
pub enum ClockBound {
    Finite(BigInt),
    Infinite,
}

impl fmt::Display for ClockBound {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ClockBound::Finite(m) => write!(f, "{m}"),
            ClockBound::Infinite => write!(f, "inf"),
        }
    }
}

/// Per-clock extrapolation bounds, indexed by clock ordinal.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct ClockBounds {
    bounds: Vec<ClockBound>,
}

impl ClockBounds {
    pub fn new(bounds: Vec<ClockBound>) -> Self {
        ClockBounds { bounds }
    }

    pub fn all_infinite(clock_count: usize) -> Self {
        ClockBounds { bounds: vec![ClockBound::Infinite; clock_count] }
    }

    pub fn get(&self, x: VarId) -> &ClockBound {
        debug_assert!(x.is_clock());
        &self.bounds[x.index]
    }

    pub fn iter(&self) -> impl Iterator<Item = (VarId, &ClockBound)> {
        self.bounds
            .iter()
            .enumerate()
            .map(|(i, b)| (VarId::clock(i), b))
    }

    pub fn finite_count(&self) -> usize {
        self.bounds
            .iter()
            .filter(|b| matches!(b, ClockBound::Finite(_)))
            .count()
    }

    pub fn len(&self) -> usize {
        self.bounds.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bounds.is_empty()
    }
}

/// Maximum value of a guard expression over a domain; `PosInfinity` when an
/// unbounded parameter side is involved.
#[derive(Clone, PartialEq, Eq, Debug)]
pub enum MaxConst {
    Finite(Rational),
    PosInfinity,
}

/// Maximum of `sum(alpha_i * p_i) + z` over the domain box: each parameter
/// contributes its upper bound when its coefficient is positive and its
/// lower bound when negative.
pub fn max_over_domain(g: &SimpleClockGuard, d: &ParamDomain) -> MaxConst {
    let mut acc = Rational::from_bigint(g.constant.clone());
    for (p, a) in &g.param_coeffs {
        if a.is_zero() {
            continue;
        }
        let bound = if a.is_positive() { d.upper(*p) } else { d.lower(*p) };
        match bound {
            None => return MaxConst::PosInfinity,
            Some(b) => acc += &Rational::from_bigint(a.clone()) * b,
        }
    }
    MaxConst::Finite(acc)
}

/// Per-clock maximal constants over `d`, ceiled to integers and clamped at
/// zero; infinite when any guard over the clock is unbounded over `d`.
pub fn clock_bounds(a: &Pta, d: &ParamDomain) -> ClockBounds {
    let bounds = a
        .clock_ids()
        .into_iter()
        .map(|x| {
            let mut best = BigInt::zero();
            for g in a.guard_set_for_clock(x) {
                match max_over_domain(g, d) {
                    MaxConst::PosInfinity => return ClockBound::Infinite,
                    MaxConst::Finite(v) => {
                        let ceiled = v.ceil_int();
                        if ceiled > best {
                            best = ceiled;
                        }
                    }
                }
            }
            ClockBound::Finite(best)
        })
        .collect();
    ClockBounds::new(bounds)
}

/// The side of the lower/upper-bound parameter subclasses.
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum Side {
    L,
    U,
}

/// Ingredients of the syntactic parameter bound: `k` parametric clocks,
/// greatest non-parametric constant `c`, clock-region over-approximation
/// `r_hat`, and the resulting bound `lp_hat`.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct BoundInputs {
    pub k: usize,
    pub c: BigInt,
    pub r_hat: BigInt,
    pub lp_hat: BigInt,
}

#[derive(Error, Debug, Clone, PartialEq, Eq)]
pub enum BoundError {
    #[error("the automaton is not an {side:?}-PTA")]
    SideMismatch { side: Side },
    #[error("the automaton has no unbounded lower/upper-bound decomposition")]
    NotBptaLU,
}

/// The parameter bound beyond which accepting-run existence is uniform:
/// `k*(r_hat+1) + c + 1` on the L side, `8k*(r_hat+1) + c + 1` on the U
/// side, with `r_hat = 2^n * n! * prod(2c_x + 2)` over-approximating the
/// number of clock regions at parameter valuation zero.
pub fn compute_lp_hat(a: &Pta, side: Side) -> Result<BoundInputs, BoundError> {
    let cls = a.classify();
    let ok = match side {
        Side::L => cls.is_l,
        Side::U => cls.is_u,
    };
    if !ok {
        return Err(BoundError::SideMismatch { side });
    }
    let k = cls.parametric_clocks.len();
    let mut c = BigInt::zero();
    for g in a.guard_set() {
        let abs = g.constant.abs();
        if abs > c {
            c = abs;
        }
    }
    let mut r_hat = BigInt::one() << a.clocks.len();
    for i in 1..=a.clocks.len() {
        r_hat *= BigInt::from(i);
    }
    for x in a.clock_ids() {
        // Greatest constant over x with all parameters valuated to zero,
        // clamped at zero.
        let mut cx = BigInt::zero();
        for g in a.guard_set_for_clock(x) {
            if g.constant > cx {
                cx = g.constant.clone();
            }
        }
        r_hat *= BigInt::from(2) * cx + BigInt::from(2);
    }
    let base = BigInt::from(k) * (&r_hat + BigInt::one());
    let lp_hat = match side {
        Side::L => base + &c + BigInt::one(),
        Side::U => BigInt::from(8) * base + &c + BigInt::one(),
    };
    Ok(BoundInputs { k, c, r_hat, lp_hat })
}

/// Substitutes every bounded parameter by the domain bound maximizing each
/// guard constant: the lower bound when its coefficient is negative, the
/// upper bound otherwise. The result is an L-PTA (resp. U-PTA) when the
/// input is a bPTA+L (resp. bPTA+U); it is only used to compute a
/// parameter bound and is never explored.
pub fn bounded_valuation(a: &Pta) -> Result<Pta, BoundError> {
    let cls = a.classify();
    if !cls.is_bpta_l && !cls.is_bpta_u {
        return Err(BoundError::NotBptaLU);
    }
    let bounded: Vec<VarId> = a
        .param_ids()
        .into_iter()
        .filter(|p| a.domain.is_bounded_param(*p))
        .collect();
    if bounded.is_empty() {
        return Ok(a.clone());
    }
    // Remaining parameters keep their order; indices are remapped.
    let mut remap: BTreeMap<VarId, VarId> = BTreeMap::new();
    let mut params = Vec::new();
    let mut domain = Vec::new();
    for p in a.param_ids() {
        if !a.domain.is_bounded_param(p) {
            remap.insert(p, VarId::parameter(params.len()));
            params.push(a.params[p.index].clone());
            domain.push((a.domain.lower(p).cloned(), a.domain.upper(p).cloned()));
        }
    }
    let substitute = |g: &SimpleClockGuard| -> (VarId, super::model::GuardRel, BTreeMap<VarId, BigInt>, Rational) {
        let mut constant = Rational::from_bigint(g.constant.clone());
        let mut coeffs = BTreeMap::new();
        for (p, alpha) in &g.param_coeffs {
            if a.domain.is_bounded_param(*p) {
                let bound = if alpha.is_negative() {
                    a.domain.lower(*p).expect("bounded")
                } else {
                    a.domain.upper(*p).expect("bounded")
                };
                constant += &Rational::from_bigint(alpha.clone()) * bound;
            } else {
                coeffs.insert(remap[p], alpha.clone());
            }
        }
        (g.clock, g.relation, coeffs, constant)
    };
    // Substituted constants may be rational; rescale globally to integers.
    let mut denom = BigInt::one();
    let collect = |gs: &[SimpleClockGuard]| -> Vec<(VarId, super::model::GuardRel, BTreeMap<VarId, BigInt>, Rational)> {
        gs.iter().map(&substitute).collect()
    };
    let locs: Vec<_> = a
        .locations
        .iter()
        .map(|l| (l.name.clone(), l.accepting, collect(&l.invariant)))
        .collect();
    let edges: Vec<_> = a
        .edges
        .iter()
        .map(|e| {
            (
                e.source,
                e.action.clone(),
                collect(&e.guard),
                e.resets.clone(),
                e.target,
            )
        })
        .collect();
    for (_, _, gs) in &locs {
        for g in gs {
            denom = crate::geometry::lcm(&denom, g.3.denom());
        }
    }
    for (_, _, gs, _, _) in &edges {
        for g in gs {
            denom = crate::geometry::lcm(&denom, g.3.denom());
        }
    }
    let scale = Rational::from_bigint(denom.clone());
    let finish = |gs: Vec<(VarId, super::model::GuardRel, BTreeMap<VarId, BigInt>, Rational)>| {
        gs.into_iter()
            .map(|(clock, relation, param_coeffs, constant)| SimpleClockGuard {
                clock,
                relation,
                param_coeffs,
                constant: (&constant * &scale).numer().clone(),
            })
            .collect::<Vec<_>>()
    };
    Ok(Pta::new(
        a.clocks.clone(),
        params,
        ParamDomain::new(
            domain
                .into_iter()
                .map(|(lo, hi)| (lo.map(|b| &b * &scale), hi.map(|b| &b * &scale)))
                .collect(),
        ),
        locs.into_iter()
            .map(|(name, accepting, inv)| crate::model::Location {
                name,
                accepting,
                invariant: finish(inv),
            })
            .collect(),
        a.initial,
        edges
            .into_iter()
            .map(|(source, action, guard, resets, target)| crate::model::Edge {
                source,
                action,
                guard: finish(guard),
                resets,
                target,
            })
            .collect(),
        &a.scale * &denom,
    ))
}

/// The `(M,x)`-extrapolation: the part of the zone with `x <= M`, plus the
/// cylindrification of the part with `x > M` restricted back to `x > M`.
/// Up to two convex members; empty members are dropped.
pub fn extrapolate_clock(c: &ConvexPolyhedron, x: VarId, m: &BigInt) -> PolySet {
    debug_assert!(x.is_clock());
    debug_assert!(!m.is_negative());
    let m = Rational::from_bigint(m.clone());
    let below = c.conjoin([LinearInequality::upper_bound(x, m.clone(), Relation::LessEq)]);
    let strictly_above = LinearInequality::lower_bound(x, m, Relation::StrictLess);
    let above = c
        .conjoin([strictly_above.clone()])
        .cylindrify(x)
        .conjoin([strictly_above]);
    PolySet::from_members([below, above])
}

/// Composition of per-clock extrapolations in clock roster order, skipping
/// clocks with an infinite bound and distributing over the members.
pub fn extrapolate(c: &ConvexPolyhedron, bounds: &ClockBounds) -> PolySet {
    let mut set = PolySet::from_members([c.clone()]);
    let clocks: Vec<VarId> = c.roster().clocks().collect();
    for x in clocks {
        let m = match bounds.get(x) {
            ClockBound::Finite(m) => m,
            ClockBound::Infinite => continue,
        };
        let mut next = PolySet::empty();
        for member in set.members() {
            next = next.union(extrapolate_clock(member, x, m));
        }
        set = next;
    }
    set
}

/// How the caller asked extrapolation bounds to be chosen.
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum RequestedMode {
    None,
    M,
    VecM,
    Auto,
}

impl RequestedMode {
    pub fn name(self) -> &'static str {
        match self {
            RequestedMode::None => "none",
            RequestedMode::M => "m",
            RequestedMode::VecM => "vecm",
            RequestedMode::Auto => "auto",
        }
    }
}

/// Syntactic class the bound selection was based on.
#[derive(Clone, Copy, PartialEq, Eq, Debug, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum PtaClass {
    Bounded,
    LPta,
    UPta,
    BptaL,
    BptaU,
    General,
}

/// Machine-readable account of the bound selection.
#[derive(Clone, PartialEq, Eq, Debug, Serialize)]
pub struct ModeReport {
    pub requested: String,
    pub class: PtaClass,
    pub mode: String,
    /// Set when the requested mode is inapplicable and the selection fell
    /// back to partial (possibly no-op) extrapolation.
    pub fallback: bool,
    pub bounds: BTreeMap<String, String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub k: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub c: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub r_hat: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub lp_hat: Option<String>,
}

/// Bounds plus everything the engine needs to honor them (the parameter
/// bound for the liveness correction, and the side it applies to).
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct ModeSelection {
    pub bounds: ClockBounds,
    pub report: ModeReport,
    /// The parameter bound (in internal units) when the clock bounds were
    /// derived from one, i.e. in L/U and bPTA+L/U modes.
    pub lp: Option<Rational>,
    pub side: Option<Side>,
}

/// Replaces infinite domain sides by `+lp` (upper) or `-lp` (lower).
fn bound_domain(d: &ParamDomain, param_count: usize, lp: &Rational) -> ParamDomain {
    ParamDomain::new(
        (0..param_count)
            .map(|j| {
                let p = VarId::parameter(j);
                let lo = d.lower(p).cloned().unwrap_or_else(|| -lp.clone());
                let hi = d.upper(p).cloned().unwrap_or_else(|| lp.clone());
                (Some(lo), Some(hi))
            })
            .collect(),
    )
}

/// Chooses extrapolation bounds for `a`: individual maximal constants for
/// bounded PTAs, constants derived from the syntactic parameter bound for
/// (b)PTA+L/U classes, and partial extrapolation otherwise. Mode `m`
/// collapses the finite bounds to their maximum; mode `none` disables
/// extrapolation.
pub fn select_mode(a: &Pta, requested: RequestedMode) -> ModeSelection {
    let cls = a.classify();
    let class = if cls.is_bounded {
        PtaClass::Bounded
    } else if cls.is_l {
        PtaClass::LPta
    } else if cls.is_u {
        PtaClass::UPta
    } else if cls.is_bpta_l {
        PtaClass::BptaL
    } else if cls.is_bpta_u {
        PtaClass::BptaU
    } else {
        PtaClass::General
    };
    let clock_count = a.clocks.len();
    let mut lp_value: Option<Rational> = None;
    let mut side: Option<Side> = None;
    let mut inputs: Option<BoundInputs> = None;

    let (mut bounds, mut mode) = if requested == RequestedMode::None {
        (ClockBounds::all_infinite(clock_count), "none".to_string())
    } else {
        match class {
            PtaClass::Bounded => (clock_bounds(a, &a.domain), "vecm".to_string()),
            PtaClass::LPta | PtaClass::UPta => {
                let s = if class == PtaClass::LPta { Side::L } else { Side::U };
                let bi = compute_lp_hat(a, s).expect("classification matches side");
                let lp = Rational::from_bigint(bi.lp_hat.clone());
                let d = bound_domain(&a.domain, a.params.len(), &lp);
                lp_value = Some(lp);
                side = Some(s);
                inputs = Some(bi);
                (clock_bounds(a, &d), "mhat".to_string())
            }
            PtaClass::BptaL | PtaClass::BptaU => {
                let s = if class == PtaClass::BptaL { Side::L } else { Side::U };
                let abar = bounded_valuation(a).expect("classification is bPTA+L/U");
                let bi = compute_lp_hat(&abar, s).expect("bounded valuation is an L/U-PTA");
                // The bounded valuation may have been rescaled; its bound
                // is brought back to the units of `a`.
                let extra_scale = &abar.scale / &a.scale;
                let lp = Rational::from_parts(bi.lp_hat.clone(), extra_scale);
                let d = bound_domain(&a.domain, a.params.len(), &lp);
                lp_value = Some(lp);
                side = Some(s);
                inputs = Some(bi);
                (clock_bounds(a, &d), "mbar".to_string())
            }
            PtaClass::General => (clock_bounds(a, &a.domain), "partial".to_string()),
        }
    };

    let mut fallback = false;
    match requested {
        RequestedMode::None => {}
        RequestedMode::M => {
            let global = bounds
                .iter()
                .filter_map(|(_, b)| match b {
                    ClockBound::Finite(m) => Some(m.clone()),
                    ClockBound::Infinite => None,
                })
                .max();
            match global {
                Some(global) => {
                    bounds = ClockBounds::new(
                        bounds
                            .iter()
                            .map(|(_, b)| match b {
                                ClockBound::Finite(_) => ClockBound::Finite(global.clone()),
                                ClockBound::Infinite => ClockBound::Infinite,
                            })
                            .collect(),
                    );
                    mode = "m".to_string();
                }
                None => {
                    fallback = true;
                    mode = "partial".to_string();
                }
            }
        }
        RequestedMode::VecM | RequestedMode::Auto => {
            if requested == RequestedMode::VecM && bounds.finite_count() == 0 {
                fallback = true;
                mode = "partial".to_string();
            }
        }
    }

    let report = ModeReport {
        requested: requested.name().to_string(),
        class,
        mode,
        fallback,
        bounds: a
            .clocks
            .iter()
            .enumerate()
            .map(|(i, name)| (name.clone(), bounds.get(VarId::clock(i)).to_string()))
            .collect(),
        k: inputs.as_ref().map(|b| b.k),
        c: inputs.as_ref().map(|b| b.c.to_string()),
        r_hat: inputs.as_ref().map(|b| b.r_hat.to_string()),
        lp_hat: inputs.as_ref().map(|b| b.lp_hat.to_string()),
    };
    ModeSelection { bounds, report, lp: lp_value, side }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{parse_model, GuardRel};

    fn fig1a() -> Pta {
        parse_model(
            "clocks x, y;\n\
             params p in [0, 5];\n\
             loc l0 [inv: x <= 1] {\n\
               on a reset {x} goto l0;\n\
               on b when 1 < y && x < p goto l1;\n\
             }\n\
             loc l1 [accepting] {}\n\
             init l0;\n",
        )
        .unwrap()
    }

    fn fig4a() -> Pta {
        parse_model(
            "clocks x, y;\n\
             params p in [0, inf);\n\
             loc l0 [inv: x <= 1] {\n\
               on a when x = 1 reset {x} goto l0;\n\
               on b when y >= 1 goto l1;\n\
             }\n\
             loc l1 [accepting, inv: y <= p] {}\n\
             init l0;\n",
        )
        .unwrap()
    }

    fn fig4c() -> Pta {
        parse_model(
            "clocks x, y;\n\
             params p in [0, inf);\n\
             loc l0 [accepting, inv: x <= 1 && y <= p] {\n\
               on a when x = 1 reset {x} goto l0;\n\
               on b when y <= p goto l1;\n\
             }\n\
             loc l1 {}\n\
             init l0;\n",
        )
        .unwrap()
    }

    fn fig3() -> Pta {
        parse_model(
            "clocks x, y;\n\
             params p in [0, inf);\n\
             loc l0 [inv: x <= 1] {\n\
               on a reset {x} goto l0;\n\
               on b when 1 < y && x = p goto l1;\n\
             }\n\
             loc l1 [accepting] {}\n\
             init l0;\n",
        )
        .unwrap()
    }

    fn fig6a() -> Pta {
        parse_model(
            "clocks x, y;\n\
             params p in [0, inf), q in [1, 2];\n\
             loc l0 [inv: x <= 1] {\n\
               on a when x = 2 - q reset {x} goto l0;\n\
               on b when y >= q goto l1;\n\
             }\n\
             loc l1 [accepting, inv: y <= p] {}\n\
             init l0;\n",
        )
        .unwrap()
    }

    #[test]
    fn max_over_domain_examples() {
        // x <= 2*p1 - p2 + 1 with p1 in [2,5], p2 in [-3,4] maxes at 14.
        let d = ParamDomain::new(vec![
            (Some(Rational::from_int(2)), Some(Rational::from_int(5))),
            (Some(Rational::from_int(-3)), Some(Rational::from_int(4))),
        ]);
        let g = SimpleClockGuard {
            clock: VarId::clock(0),
            relation: GuardRel::Le,
            param_coeffs: BTreeMap::from([
                (VarId::parameter(0), BigInt::from(2)),
                (VarId::parameter(1), BigInt::from(-1)),
            ]),
            constant: BigInt::one(),
        };
        assert_eq!(
            max_over_domain(&g, &d),
            MaxConst::Finite(Rational::from_int(14))
        );

        let plain = SimpleClockGuard {
            clock: VarId::clock(0),
            relation: GuardRel::Le,
            param_coeffs: BTreeMap::new(),
            constant: BigInt::from(7),
        };
        assert_eq!(
            max_over_domain(&plain, &d),
            MaxConst::Finite(Rational::from_int(7))
        );

        let unbounded = ParamDomain::new(vec![(Some(Rational::zero()), None)]);
        let g = SimpleClockGuard {
            clock: VarId::clock(0),
            relation: GuardRel::Lt,
            param_coeffs: BTreeMap::from([(VarId::parameter(0), BigInt::one())]),
            constant: BigInt::zero(),
        };
        assert_eq!(max_over_domain(&g, &unbounded), MaxConst::PosInfinity);
    }

    #[test]
    fn clock_bounds_fig1a() {
        let a = fig1a();
        let b = clock_bounds(&a, &a.domain);
        assert_eq!(*b.get(VarId::clock(0)), ClockBound::Finite(BigInt::from(5)));
        assert_eq!(*b.get(VarId::clock(1)), ClockBound::Finite(BigInt::from(1)));
    }

    #[test]
    fn clock_bounds_unused_clock_and_ceil() {
        let a = parse_model(
            "clocks x, z;\n\
             loc l0 { on a when x <= 3/2 goto l0; }\n\
             init l0;\n",
        )
        .unwrap();
        // The model rescales 3/2 to 3 with scale 2; in internal units the
        // bound is 3. A clock never compared to anything gets bound zero.
        assert_eq!(a.scale, BigInt::from(2));
        let b = clock_bounds(&a, &a.domain);
        assert_eq!(*b.get(VarId::clock(0)), ClockBound::Finite(BigInt::from(3)));
        assert_eq!(*b.get(VarId::clock(1)), ClockBound::Finite(BigInt::zero()));
    }

    #[test]
    fn lp_hat_fig4a() {
        let a = fig4a();
        let bi = compute_lp_hat(&a, Side::U).unwrap();
        assert_eq!(bi.k, 1);
        assert_eq!(bi.c, BigInt::one());
        assert_eq!(bi.r_hat, BigInt::from(128));
        assert_eq!(bi.lp_hat, BigInt::from(1034));
    }

    #[test]
    fn lp_hat_fig4c() {
        let a = fig4c();
        let bi = compute_lp_hat(&a, Side::U).unwrap();
        assert_eq!(bi.k, 1);
        assert_eq!(bi.c, BigInt::one());
        assert_eq!(bi.r_hat, BigInt::from(64));
        assert_eq!(bi.lp_hat, BigInt::from(522));
    }

    #[test]
    fn lp_hat_parameter_free() {
        let a = parse_model(
            "clocks x;\n\
             loc l0 [inv: x <= 3] { on a reset {x} goto l0; }\n\
             init l0;\n",
        )
        .unwrap();
        let bi = compute_lp_hat(&a, Side::U).unwrap();
        assert_eq!(bi.k, 0);
        assert_eq!(bi.lp_hat, &bi.c + BigInt::one());
    }

    #[test]
    fn lp_hat_side_mismatch() {
        let a = fig4a();
        assert_eq!(
            compute_lp_hat(&a, Side::L),
            Err(BoundError::SideMismatch { side: Side::L })
        );
    }

    #[test]
    fn bounded_valuation_fig6() {
        let a = fig6a();
        let abar = bounded_valuation(&a).unwrap();
        assert_eq!(abar.params, vec!["p".to_string()]);
        // Loop guard becomes x = 1, edge guard becomes y >= 2.
        let loop_guard = &abar.edges[0].guard[0];
        assert_eq!(loop_guard.relation, GuardRel::Eq);
        assert!(loop_guard.param_coeffs.is_empty());
        assert_eq!(loop_guard.constant, BigInt::one());
        let edge_guard = &abar.edges[1].guard[0];
        assert_eq!(edge_guard.relation, GuardRel::Ge);
        assert!(edge_guard.param_coeffs.is_empty());
        assert_eq!(edge_guard.constant, BigInt::from(2));
        // The invariant y <= p keeps the unbounded parameter, remapped.
        let inv = &abar.locations[1].invariant[0];
        assert_eq!(inv.param_coeffs.len(), 1);
        assert!(inv.param_coeffs.contains_key(&VarId::parameter(0)));
        assert!(abar.classify().is_u);
    }

    #[test]
    fn bounded_valuation_identity_without_bounded_params() {
        let a = fig4a();
        assert_eq!(bounded_valuation(&a).unwrap(), a);
    }

    #[test]
    fn bounded_valuation_all_bounded_gives_parameter_free() {
        let a = fig1a();
        let abar = bounded_valuation(&a).unwrap();
        assert!(abar.params.is_empty());
        // x < p becomes x < 5.
        let g = &abar.edges[1].guard[1];
        assert!(g.param_coeffs.is_empty());
        assert_eq!(g.constant, BigInt::from(5));
    }

    #[test]
    fn extrapolate_clock_splits_at_the_bound() {
        use crate::geometry::Roster;
        let roster = Roster::new(&["x", "y"], &[]);
        let r = Rational::from_int;
        let x = VarId::clock(0);
        let y = VarId::clock(1);
        // x >= 0, x <= y <= x + 5, x <= 1 (the running clock-zone example).
        let c = ConvexPolyhedron::new(
            roster.clone(),
            vec![
                LinearInequality::lower_bound(x, r(0), Relation::LessEq),
                LinearInequality::upper_bound(x, r(1), Relation::LessEq),
                LinearInequality::new([(x, r(1)), (y, r(-1))], r(0), Relation::LessEq),
                LinearInequality::new([(y, r(1)), (x, r(-1))], r(-5), Relation::LessEq),
            ],
        )
        .unwrap();
        let set = extrapolate_clock(&c, y, &BigInt::from(5));
        assert_eq!(set.len(), 2);
        let below = ConvexPolyhedron::new(
            roster.clone(),
            vec![
                LinearInequality::lower_bound(x, r(0), Relation::LessEq),
                LinearInequality::upper_bound(x, r(1), Relation::LessEq),
                LinearInequality::new([(x, r(1)), (y, r(-1))], r(0), Relation::LessEq),
                LinearInequality::upper_bound(y, r(5), Relation::LessEq),
            ],
        )
        .unwrap();
        let above = ConvexPolyhedron::new(
            roster.clone(),
            vec![
                LinearInequality::lower_bound(x, r(0), Relation::StrictLess),
                LinearInequality::upper_bound(x, r(1), Relation::LessEq),
                LinearInequality::lower_bound(y, r(5), Relation::StrictLess),
            ],
        )
        .unwrap();
        assert!(set.members().iter().any(|m| m.equal(&below)));
        assert!(set.members().iter().any(|m| m.equal(&above)));

        // Already below the bound: single unchanged member.
        let low = ConvexPolyhedron::new(
            roster.clone(),
            vec![
                LinearInequality::lower_bound(y, r(0), Relation::LessEq),
                LinearInequality::upper_bound(y, r(3), Relation::LessEq),
            ],
        )
        .unwrap();
        let set = extrapolate_clock(&low, y, &BigInt::from(5));
        assert_eq!(set.len(), 1);
        assert!(set.members()[0].equal(&low));

        // Empty input: empty output.
        let empty = ConvexPolyhedron::new(
            roster,
            vec![
                LinearInequality::upper_bound(y, r(0), Relation::StrictLess),
                LinearInequality::lower_bound(y, r(0), Relation::LessEq),
            ],
        )
        .unwrap();
        assert!(extrapolate_clock(&empty, y, &BigInt::from(5)).is_empty());
    }

    #[test]
    fn extrapolate_with_all_infinite_bounds_is_identity() {
        use crate::geometry::Roster;
        let roster = Roster::new(&["x", "y"], &[]);
        let c = ConvexPolyhedron::new(
            roster,
            vec![LinearInequality::lower_bound(VarId::clock(0), Rational::zero(), Relation::LessEq)],
        )
        .unwrap();
        let set = extrapolate(&c, &ClockBounds::all_infinite(2));
        assert_eq!(set.len(), 1);
        assert!(set.members()[0].equal(&c));
    }

    #[test]
    fn select_mode_fig1a_auto_is_vecm() {
        let sel = select_mode(&fig1a(), RequestedMode::Auto);
        assert_eq!(sel.report.class, PtaClass::Bounded);
        assert_eq!(sel.report.mode, "vecm");
        assert!(!sel.report.fallback);
        assert_eq!(*sel.bounds.get(VarId::clock(0)), ClockBound::Finite(BigInt::from(5)));
        assert_eq!(*sel.bounds.get(VarId::clock(1)), ClockBound::Finite(BigInt::from(1)));
        assert!(sel.lp.is_none());
    }

    #[test]
    fn select_mode_fig4a_auto_is_mhat() {
        let sel = select_mode(&fig4a(), RequestedMode::Auto);
        assert_eq!(sel.report.class, PtaClass::UPta);
        assert_eq!(sel.report.mode, "mhat");
        assert_eq!(*sel.bounds.get(VarId::clock(0)), ClockBound::Finite(BigInt::one()));
        assert_eq!(
            *sel.bounds.get(VarId::clock(1)),
            ClockBound::Finite(BigInt::from(1034))
        );
        assert_eq!(sel.lp, Some(Rational::from_int(1034)));
        assert_eq!(sel.side, Some(Side::U));
    }

    #[test]
    fn select_mode_fig3_auto_is_partial() {
        let sel = select_mode(&fig3(), RequestedMode::Auto);
        assert_eq!(sel.report.class, PtaClass::General);
        assert_eq!(sel.report.mode, "partial");
        assert_eq!(*sel.bounds.get(VarId::clock(0)), ClockBound::Infinite);
        assert_eq!(*sel.bounds.get(VarId::clock(1)), ClockBound::Finite(BigInt::one()));
    }

    #[test]
    fn select_mode_fig6a_auto_is_mbar() {
        let sel = select_mode(&fig6a(), RequestedMode::Auto);
        assert_eq!(sel.report.class, PtaClass::BptaU);
        assert_eq!(sel.report.mode, "mbar");
        assert_eq!(sel.report.lp_hat.as_deref(), Some("1547"));
        assert_eq!(*sel.bounds.get(VarId::clock(0)), ClockBound::Finite(BigInt::one()));
        assert_eq!(
            *sel.bounds.get(VarId::clock(1)),
            ClockBound::Finite(BigInt::from(1547))
        );
    }

    #[test]
    fn select_mode_m_collapses_to_global_constant() {
        let sel = select_mode(&fig1a(), RequestedMode::M);
        assert_eq!(sel.report.mode, "m");
        assert_eq!(*sel.bounds.get(VarId::clock(0)), ClockBound::Finite(BigInt::from(5)));
        assert_eq!(*sel.bounds.get(VarId::clock(1)), ClockBound::Finite(BigInt::from(5)));
    }

    #[test]
    fn select_mode_vecm_falls_back_to_partial() {
        // One clock compared to an unbounded two-sided parameter: no class
        // applies and no clock is extrapolable.
        let a = parse_model(
            "clocks x;\n\
             params p in (-inf, inf);\n\
             loc l0 { on a when x = p goto l0; }\n\
             init l0;\n",
        )
        .unwrap();
        let sel = select_mode(&a, RequestedMode::VecM);
        assert_eq!(sel.report.class, PtaClass::General);
        assert!(sel.report.fallback);
        assert_eq!(sel.report.mode, "partial");
        assert_eq!(sel.bounds.finite_count(), 0);
    }

    #[test]
    fn select_mode_none_disables_extrapolation() {
        let sel = select_mode(&fig1a(), RequestedMode::None);
        assert_eq!(sel.report.mode, "none");
        assert_eq!(sel.bounds.finite_count(), 0);
    }
}
