//! PTA abstract syntax, parameter domains, subclass classification, and
//! concrete instantiation.

mod parser;

pub use parser::{parse_model, ParseError};

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::sync::Arc;

use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};
use thiserror::Error;

use crate::geometry::{lcm, LinearInequality, Rational, Relation, Roster, VarId};

/// Identifier of a location within its [`Pta`].
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub struct LocId(pub usize);

/// Comparison operator of a simple clock guard.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub enum GuardRel {
    Lt,
    Le,
    Eq,
    Ge,
    Gt,
}

impl GuardRel {
    /// Whether the right-hand side acts as an upper bound on the clock.
    /// Equality counts as both an upper and a lower bound.
    pub fn is_upper(self) -> bool {
        matches!(self, GuardRel::Lt | GuardRel::Le | GuardRel::Eq)
    }

    pub fn is_lower(self) -> bool {
        matches!(self, GuardRel::Gt | GuardRel::Ge | GuardRel::Eq)
    }

    pub fn render(self) -> &'static str {
        match self {
            GuardRel::Lt => "<",
            GuardRel::Le => "<=",
            GuardRel::Eq => "=",
            GuardRel::Ge => ">=",
            GuardRel::Gt => ">",
        }
    }
}

/// A simple clock guard `clock REL sum(alpha_i * p_i) + z` with integer
/// coefficients and constant.
#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub struct SimpleClockGuard {
    pub clock: VarId,
    pub relation: GuardRel,
    pub param_coeffs: BTreeMap<VarId, BigInt>,
    pub constant: BigInt,
}

impl SimpleClockGuard {
    /// The geometric form: equalities expand to a pair of inequalities.
    pub fn to_rows(&self) -> Vec<LinearInequality> {
        let upper = |rel: Relation| {
            // clock - sum - z REL 0
            LinearInequality::new(
                std::iter::once((self.clock, Rational::one())).chain(
                    self.param_coeffs
                        .iter()
                        .map(|(p, a)| (*p, -Rational::from_bigint(a.clone()))),
                ),
                -Rational::from_bigint(self.constant.clone()),
                rel,
            )
        };
        let lower = |rel: Relation| {
            // sum + z - clock REL 0
            LinearInequality::new(
                std::iter::once((self.clock, -Rational::one())).chain(
                    self.param_coeffs
                        .iter()
                        .map(|(p, a)| (*p, Rational::from_bigint(a.clone()))),
                ),
                Rational::from_bigint(self.constant.clone()),
                rel,
            )
        };
        match self.relation {
            GuardRel::Lt => vec![upper(Relation::StrictLess)],
            GuardRel::Le => vec![upper(Relation::LessEq)],
            GuardRel::Eq => vec![upper(Relation::LessEq), lower(Relation::LessEq)],
            GuardRel::Ge => vec![lower(Relation::LessEq)],
            GuardRel::Gt => vec![lower(Relation::StrictLess)],
        }
    }

    pub fn render(&self, pta: &Pta) -> String {
        let mut rhs = String::new();
        for (p, a) in &self.param_coeffs {
            let name = &pta.params[p.index];
            if rhs.is_empty() {
                if *a == BigInt::one() {
                    rhs = name.clone();
                } else if *a == -BigInt::one() {
                    rhs = format!("-{name}");
                } else {
                    rhs = format!("{a}*{name}");
                }
            } else if a.is_negative() {
                if *a == -BigInt::one() {
                    rhs.push_str(&format!(" - {name}"));
                } else {
                    rhs.push_str(&format!(" - {}*{}", a.magnitude(), name));
                }
            } else if *a == BigInt::one() {
                rhs.push_str(&format!(" + {name}"));
            } else {
                rhs.push_str(&format!(" + {a}*{name}"));
            }
        }
        let constant = &Rational::from_bigint(self.constant.clone()) / &self.scale_unit(pta);
        if rhs.is_empty() {
            rhs = constant.to_string();
        } else if constant.is_positive() {
            rhs.push_str(&format!(" + {constant}"));
        } else if constant.is_negative() {
            rhs.push_str(&format!(" - {}", -&constant));
        }
        format!(
            "{} {} {}",
            pta.clocks[self.clock.index],
            self.relation.render(),
            rhs
        )
    }

    fn scale_unit(&self, pta: &Pta) -> Rational {
        Rational::from_bigint(pta.scale.clone())
    }
}

/// Per-parameter admissible interval, closed at finite bounds. `None`
/// stands for an infinite side.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct ParamDomain {
    bounds: Vec<(Option<Rational>, Option<Rational>)>,
}

impl ParamDomain {
    pub fn new(bounds: Vec<(Option<Rational>, Option<Rational>)>) -> Self {
        for (lo, hi) in &bounds {
            if let (Some(lo), Some(hi)) = (lo, hi) {
                assert!(lo <= hi, "parameter domain with lower > upper");
            }
        }
        ParamDomain { bounds }
    }

    pub fn len(&self) -> usize {
        self.bounds.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bounds.is_empty()
    }

    pub fn lower(&self, p: VarId) -> Option<&Rational> {
        self.bounds[p.index].0.as_ref()
    }

    pub fn upper(&self, p: VarId) -> Option<&Rational> {
        self.bounds[p.index].1.as_ref()
    }

    pub fn is_bounded_param(&self, p: VarId) -> bool {
        let (lo, hi) = &self.bounds[p.index];
        lo.is_some() && hi.is_some()
    }

    pub fn admits(&self, p: VarId, value: &Rational) -> bool {
        let (lo, hi) = &self.bounds[p.index];
        lo.as_ref().is_none_or(|l| l <= value) && hi.as_ref().is_none_or(|h| value <= h)
    }

    /// The box constraints as inequality rows, finite sides only.
    pub fn to_rows(&self) -> Vec<LinearInequality> {
        let mut rows = Vec::new();
        for (j, (lo, hi)) in self.bounds.iter().enumerate() {
            let p = VarId::parameter(j);
            if let Some(lo) = lo {
                rows.push(LinearInequality::lower_bound(p, lo.clone(), Relation::LessEq));
            }
            if let Some(hi) = hi {
                rows.push(LinearInequality::upper_bound(p, hi.clone(), Relation::LessEq));
            }
        }
        rows
    }
}

/// An edge `(source, guard, action, resets, target)`.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct Edge {
    pub source: LocId,
    pub guard: Vec<SimpleClockGuard>,
    pub action: String,
    pub resets: BTreeSet<VarId>,
    pub target: LocId,
}

/// A location with its invariant and acceptance flag.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct Location {
    pub name: String,
    pub invariant: Vec<SimpleClockGuard>,
    pub accepting: bool,
}

/// A parametric timed automaton. Guard coefficients and constants are
/// integers; rational constants in the source are normalized away by a
/// global rescaling recorded in `scale` (internal units = source units
/// times `scale`).
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct Pta {
    pub clocks: Vec<String>,
    pub params: Vec<String>,
    pub domain: ParamDomain,
    pub locations: Vec<Location>,
    pub initial: LocId,
    pub edges: Vec<Edge>,
    pub scale: BigInt,
    roster: Arc<Roster>,
}

impl Pta {
    pub fn new(
        clocks: Vec<String>,
        params: Vec<String>,
        domain: ParamDomain,
        locations: Vec<Location>,
        initial: LocId,
        edges: Vec<Edge>,
        scale: BigInt,
    ) -> Self {
        assert_eq!(params.len(), domain.len());
        let roster = Roster::from_names(clocks.clone(), params.clone());
        Pta { clocks, params, domain, locations, initial, edges, scale, roster }
    }

    /// The full roster: clocks first, then parameters.
    pub fn roster(&self) -> &Arc<Roster> {
        &self.roster
    }

    pub fn clock_ids(&self) -> Vec<VarId> {
        (0..self.clocks.len()).map(VarId::clock).collect()
    }

    pub fn param_ids(&self) -> Vec<VarId> {
        (0..self.params.len()).map(VarId::parameter).collect()
    }

    pub fn location_named(&self, name: &str) -> Option<LocId> {
        self.locations.iter().position(|l| l.name == name).map(LocId)
    }

    pub fn accepting_locations(&self) -> Vec<LocId> {
        self.locations
            .iter()
            .enumerate()
            .filter(|(_, l)| l.accepting)
            .map(|(i, _)| LocId(i))
            .collect()
    }

    pub fn edges_from(&self, loc: LocId) -> impl Iterator<Item = &Edge> {
        self.edges.iter().filter(move |e| e.source == loc)
    }

    /// All simple clock guards appearing as conjuncts in invariants or
    /// edge guards, invariants first, in declaration order.
    pub fn guard_set(&self) -> Vec<&SimpleClockGuard> {
        let mut out = Vec::new();
        for loc in &self.locations {
            out.extend(loc.invariant.iter());
        }
        for e in &self.edges {
            out.extend(e.guard.iter());
        }
        out
    }

    /// The guards of `guard_set` where `x` appears (nonzero coefficient;
    /// the clock side always has coefficient one).
    pub fn guard_set_for_clock(&self, x: VarId) -> Vec<&SimpleClockGuard> {
        self.guard_set().into_iter().filter(|g| g.clock == x).collect()
    }

    /// Syntactic subclass facts of this PTA.
    pub fn classify(&self) -> Classification {
        let mut is_l = true;
        let mut is_u = true;
        let mut is_bpta_l = true;
        let mut is_bpta_u = true;
        let mut parametric_clocks = BTreeSet::new();
        let mut unbounded_compared: BTreeSet<VarId> = BTreeSet::new();
        for g in self.guard_set() {
            for (p, a) in &g.param_coeffs {
                if a.is_zero() {
                    continue;
                }
                parametric_clocks.insert(g.clock);
                let bounded = self.domain.is_bounded_param(*p);
                if !bounded {
                    unbounded_compared.insert(g.clock);
                }
                let l_pattern = (a.is_positive() && matches!(g.relation, GuardRel::Ge | GuardRel::Gt))
                    || (a.is_negative() && matches!(g.relation, GuardRel::Lt | GuardRel::Le));
                let u_pattern = (a.is_positive() && matches!(g.relation, GuardRel::Lt | GuardRel::Le))
                    || (a.is_negative() && matches!(g.relation, GuardRel::Ge | GuardRel::Gt));
                is_l &= l_pattern;
                is_u &= u_pattern;
                is_bpta_l &= bounded || l_pattern;
                is_bpta_u &= bounded || u_pattern;
            }
        }
        let is_bounded = self
            .param_ids()
            .iter()
            .all(|p| self.domain.is_bounded_param(*p));
        let bounded_only_clocks = self
            .clock_ids()
            .into_iter()
            .filter(|x| !unbounded_compared.contains(x))
            .collect();
        Classification {
            is_bounded,
            is_l,
            is_u,
            is_bpta_l,
            is_bpta_u,
            parametric_clocks,
            bounded_only_clocks,
        }
    }

    /// Instantiates at a parameter valuation, rescaling to an integer TA.
    pub fn instantiate(
        &self,
        v: &BTreeMap<VarId, Rational>,
    ) -> Result<ConcreteTa, InstantiationError> {
        for p in self.param_ids() {
            let value = v
                .get(&p)
                .ok_or_else(|| InstantiationError::MissingParameter(self.params[p.index].clone()))?;
            if !self.domain.admits(p, value) {
                return Err(InstantiationError::OutsideDomain {
                    param: self.params[p.index].clone(),
                    value: value.clone(),
                });
            }
        }
        let valuate = |g: &SimpleClockGuard| -> Rational {
            let mut c = Rational::from_bigint(g.constant.clone());
            for (p, a) in &g.param_coeffs {
                c += &Rational::from_bigint(a.clone()) * &v[p];
            }
            c
        };
        let mut denom = BigInt::one();
        for g in self.guard_set() {
            denom = lcm(&denom, valuate(g).denom());
        }
        let factor = Rational::from_bigint(denom.clone());
        let concretize = |gs: &[SimpleClockGuard]| -> Vec<ConcreteGuard> {
            gs.iter()
                .map(|g| ConcreteGuard {
                    clock: g.clock,
                    relation: g.relation,
                    constant: (&valuate(g) * &factor).numer().clone(),
                })
                .collect()
        };
        Ok(ConcreteTa {
            clocks: self.clocks.clone(),
            locations: self
                .locations
                .iter()
                .map(|l| ConcreteLocation {
                    name: l.name.clone(),
                    invariant: concretize(&l.invariant),
                    accepting: l.accepting,
                })
                .collect(),
            initial: self.initial,
            edges: self
                .edges
                .iter()
                .map(|e| ConcreteEdge {
                    source: e.source,
                    guard: concretize(&e.guard),
                    action: e.action.clone(),
                    resets: e.resets.clone(),
                    target: e.target,
                })
                .collect(),
            scale: &self.scale * &denom,
        })
    }

    /// Renders back to the model language, in source units (the global
    /// rescaling is undone).
    pub fn render(&self) -> String {
        let mut out = String::new();
        let inv_scale = Rational::from_bigint(self.scale.clone()).recip();
        if !self.clocks.is_empty() {
            out.push_str(&format!("clocks {};\n", self.clocks.join(", ")));
        }
        if !self.params.is_empty() {
            let decls: Vec<String> = self
                .params
                .iter()
                .enumerate()
                .map(|(j, name)| {
                    let p = VarId::parameter(j);
                    let lo = match self.domain.lower(p) {
                        Some(b) => format!("[{}", b * &inv_scale),
                        None => "(-inf".to_string(),
                    };
                    let hi = match self.domain.upper(p) {
                        Some(b) => format!("{}]", b * &inv_scale),
                        None => "inf)".to_string(),
                    };
                    format!("{name} in {lo}, {hi}")
                })
                .collect();
            out.push_str(&format!("params {};\n", decls.join(", ")));
        }
        for (i, loc) in self.locations.iter().enumerate() {
            out.push_str(&format!("loc {}", loc.name));
            let mut attrs = Vec::new();
            if loc.accepting {
                attrs.push("accepting".to_string());
            }
            if !loc.invariant.is_empty() {
                let inv: Vec<String> = loc.invariant.iter().map(|g| g.render(self)).collect();
                attrs.push(format!("inv: {}", inv.join(" && ")));
            }
            if !attrs.is_empty() {
                out.push_str(&format!(" [{}]", attrs.join(", ")));
            }
            out.push_str(" {\n");
            for e in self.edges.iter().filter(|e| e.source == LocId(i)) {
                out.push_str(&format!("  on {}", e.action));
                if !e.guard.is_empty() {
                    let g: Vec<String> = e.guard.iter().map(|g| g.render(self)).collect();
                    out.push_str(&format!(" when {}", g.join(" && ")));
                }
                if !e.resets.is_empty() {
                    let names: Vec<&str> = e
                        .resets
                        .iter()
                        .map(|x| self.clocks[x.index].as_str())
                        .collect();
                    out.push_str(&format!(" reset {{{}}}", names.join(", ")));
                }
                out.push_str(&format!(" goto {};\n", self.locations[e.target.0].name));
            }
            out.push_str("}\n");
        }
        out.push_str(&format!("init {};\n", self.locations[self.initial.0].name));
        out
    }
}

/// Syntactic subclass facts per the lower/upper-bound sign patterns.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct Classification {
    pub is_bounded: bool,
    pub is_l: bool,
    pub is_u: bool,
    pub is_bpta_l: bool,
    pub is_bpta_u: bool,
    pub parametric_clocks: BTreeSet<VarId>,
    pub bounded_only_clocks: BTreeSet<VarId>,
}

#[derive(Error, Debug, Clone, PartialEq, Eq)]
pub enum InstantiationError {
    #[error("no value supplied for parameter `{0}`")]
    MissingParameter(String),
    #[error("value {value} for parameter `{param}` is outside the domain")]
    OutsideDomain { param: String, value: Rational },
}

/// A parameter-free clock constraint `clock REL constant` with an integer
/// constant (after rescaling).
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct ConcreteGuard {
    pub clock: VarId,
    pub relation: GuardRel,
    pub constant: BigInt,
}

impl ConcreteGuard {
    pub fn to_rows(&self) -> Vec<LinearInequality> {
        SimpleClockGuard {
            clock: self.clock,
            relation: self.relation,
            param_coeffs: BTreeMap::new(),
            constant: self.constant.clone(),
        }
        .to_rows()
    }
}

#[derive(Clone, PartialEq, Eq, Debug)]
pub struct ConcreteLocation {
    pub name: String,
    pub invariant: Vec<ConcreteGuard>,
    pub accepting: bool,
}

#[derive(Clone, PartialEq, Eq, Debug)]
pub struct ConcreteEdge {
    pub source: LocId,
    pub guard: Vec<ConcreteGuard>,
    pub action: String,
    pub resets: BTreeSet<VarId>,
    pub target: LocId,
}

/// A concrete (parameter-free, integer-valued) timed automaton obtained by
/// instantiating a PTA. `scale` relates its time unit to the source model.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct ConcreteTa {
    pub clocks: Vec<String>,
    pub locations: Vec<ConcreteLocation>,
    pub initial: LocId,
    pub edges: Vec<ConcreteEdge>,
    pub scale: BigInt,
}

impl ConcreteTa {
    pub fn roster(&self) -> Arc<Roster> {
        Roster::from_names(self.clocks.clone(), Vec::new())
    }

    pub fn clock_ids(&self) -> Vec<VarId> {
        (0..self.clocks.len()).map(VarId::clock).collect()
    }

    pub fn edges_from(&self, loc: LocId) -> impl Iterator<Item = &ConcreteEdge> {
        self.edges.iter().filter(move |e| e.source == loc)
    }

    /// Greatest constant clock `x` is compared to, clamped at zero.
    pub fn max_constant(&self, x: VarId) -> BigInt {
        let mut best = BigInt::zero();
        for loc in &self.locations {
            for g in &loc.invariant {
                if g.clock == x && g.constant > best {
                    best = g.constant.clone();
                }
            }
        }
        for e in &self.edges {
            for g in &e.guard {
                if g.clock == x && g.constant > best {
                    best = g.constant.clone();
                }
            }
        }
        best
    }
}

impl fmt::Display for LocId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}
