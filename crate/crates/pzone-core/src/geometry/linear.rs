//! Variables, rosters and linear inequalities over clocks and parameters.

use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

use num_bigint::BigInt;
use num_traits::{One, Signed};

use super::rational::{lcm, Rational};

/// Kind of a dimension: clocks evolve with time, parameters do not.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub enum VarKind {
    Clock,
    Parameter,
}

/// A variable identifier: its kind plus a 0-based ordinal within that kind.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub struct VarId {
    pub kind: VarKind,
    pub index: usize,
}

impl VarId {
    pub fn clock(index: usize) -> Self {
        VarId { kind: VarKind::Clock, index }
    }

    pub fn parameter(index: usize) -> Self {
        VarId { kind: VarKind::Parameter, index }
    }

    pub fn is_clock(&self) -> bool {
        self.kind == VarKind::Clock
    }

    pub fn is_parameter(&self) -> bool {
        self.kind == VarKind::Parameter
    }
}

/// Ordered list of dimensions of a polyhedron, with display names.
/// Clocks come first, then parameters, each in index order.
#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub struct Roster {
    vars: Vec<VarId>,
    names: Vec<String>,
}

impl Roster {
    pub fn new(clock_names: &[&str], param_names: &[&str]) -> Arc<Self> {
        Self::from_names(
            clock_names.iter().map(|s| s.to_string()).collect(),
            param_names.iter().map(|s| s.to_string()).collect(),
        )
    }

    pub fn from_names(clock_names: Vec<String>, param_names: Vec<String>) -> Arc<Self> {
        let mut vars = Vec::with_capacity(clock_names.len() + param_names.len());
        let mut names = Vec::with_capacity(vars.capacity());
        for (i, n) in clock_names.into_iter().enumerate() {
            vars.push(VarId::clock(i));
            names.push(n);
        }
        for (j, n) in param_names.into_iter().enumerate() {
            vars.push(VarId::parameter(j));
            names.push(n);
        }
        Arc::new(Roster { vars, names })
    }

    /// The parameter-only roster obtained by dropping all clocks.
    pub fn params_only(&self) -> Arc<Self> {
        let mut vars = Vec::new();
        let mut names = Vec::new();
        for (v, n) in self.vars.iter().zip(&self.names) {
            if v.is_parameter() {
                vars.push(*v);
                names.push(n.clone());
            }
        }
        Arc::new(Roster { vars, names })
    }

    /// The clock-only roster obtained by dropping all parameters.
    pub fn clocks_only(&self) -> Arc<Self> {
        let mut vars = Vec::new();
        let mut names = Vec::new();
        for (v, n) in self.vars.iter().zip(&self.names) {
            if v.is_clock() {
                vars.push(*v);
                names.push(n.clone());
            }
        }
        Arc::new(Roster { vars, names })
    }

    pub fn vars(&self) -> &[VarId] {
        &self.vars
    }

    pub fn len(&self) -> usize {
        self.vars.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vars.is_empty()
    }

    pub fn contains(&self, v: VarId) -> bool {
        self.vars.contains(&v)
    }

    pub fn clocks(&self) -> impl Iterator<Item = VarId> + '_ {
        self.vars.iter().copied().filter(VarId::is_clock)
    }

    pub fn parameters(&self) -> impl Iterator<Item = VarId> + '_ {
        self.vars.iter().copied().filter(VarId::is_parameter)
    }

    pub fn name_of(&self, v: VarId) -> &str {
        match self.vars.iter().position(|w| *w == v) {
            Some(i) => &self.names[i],
            None => "?",
        }
    }

    /// Position of `v` in the roster order, used for deterministic sorting.
    pub fn position(&self, v: VarId) -> Option<usize> {
        self.vars.iter().position(|w| *w == v)
    }
}

/// Relation of a normalized inequality `lt < 0` or `lt <= 0`.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub enum Relation {
    StrictLess,
    LessEq,
}

impl Relation {
    /// Combining a strict bound with anything yields a strict bound.
    pub fn combine(self, other: Relation) -> Relation {
        if self == Relation::StrictLess || other == Relation::StrictLess {
            Relation::StrictLess
        } else {
            Relation::LessEq
        }
    }
}

/// A linear inequality `sum(coeffs) + constant REL 0` over a roster.
/// Zero coefficients are never stored.
#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub struct LinearInequality {
    coeffs: BTreeMap<VarId, Rational>,
    constant: Rational,
    relation: Relation,
}

impl LinearInequality {
    pub fn new(
        coeffs: impl IntoIterator<Item = (VarId, Rational)>,
        constant: Rational,
        relation: Relation,
    ) -> Self {
        let mut map = BTreeMap::new();
        for (v, c) in coeffs {
            if !c.is_zero() {
                let entry = map.entry(v).or_insert_with(Rational::zero);
                *entry += c;
                if entry.is_zero() {
                    map.remove(&v);
                }
            }
        }
        LinearInequality { coeffs: map, constant, relation }.normalized()
    }

    /// The trivially false inequality `1 <= 0`.
    pub fn falsum() -> Self {
        LinearInequality {
            coeffs: BTreeMap::new(),
            constant: Rational::one(),
            relation: Relation::LessEq,
        }
    }

    /// Bound `v REL c`, e.g. `upper_bound(x, 5, LessEq)` is `x <= 5`.
    pub fn upper_bound(v: VarId, c: Rational, relation: Relation) -> Self {
        LinearInequality::new([(v, Rational::one())], -c, relation)
    }

    /// Bound `v REL' c` from below, e.g. `lower_bound(x, 5, StrictLess)` is `x > 5`.
    pub fn lower_bound(v: VarId, c: Rational, relation: Relation) -> Self {
        LinearInequality::new([(v, -Rational::one())], c, relation)
    }

    pub fn coeffs(&self) -> &BTreeMap<VarId, Rational> {
        &self.coeffs
    }

    pub fn coeff(&self, v: VarId) -> Rational {
        self.coeffs.get(&v).cloned().unwrap_or_else(Rational::zero)
    }

    pub fn constant(&self) -> &Rational {
        &self.constant
    }

    pub fn relation(&self) -> Relation {
        self.relation
    }

    pub fn mentions(&self, v: VarId) -> bool {
        self.coeffs.contains_key(&v)
    }

    pub fn is_constant(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// For a constant inequality, whether it holds.
    pub fn constant_holds(&self) -> bool {
        debug_assert!(self.is_constant());
        match self.relation {
            Relation::StrictLess => self.constant.is_negative(),
            Relation::LessEq => !self.constant.is_positive(),
        }
    }

    /// The negation: `!(lt <= 0)` is `-lt < 0`, `!(lt < 0)` is `-lt <= 0`.
    pub fn negated(&self) -> Self {
        let coeffs = self.coeffs.iter().map(|(v, c)| (*v, -c));
        let relation = match self.relation {
            Relation::StrictLess => Relation::LessEq,
            Relation::LessEq => Relation::StrictLess,
        };
        LinearInequality::new(coeffs, -&self.constant, relation)
    }

    /// Evaluates at a point. `None` when a mentioned variable is missing.
    pub fn holds_at(&self, point: &BTreeMap<VarId, Rational>) -> Option<bool> {
        let mut acc = self.constant.clone();
        for (v, c) in &self.coeffs {
            acc += c * point.get(v)?;
        }
        Some(match self.relation {
            Relation::StrictLess => acc.is_negative(),
            Relation::LessEq => !acc.is_positive(),
        })
    }

    /// Substitutes `v := value` and drops the dimension.
    pub fn substitute(&self, v: VarId, value: &Rational) -> Self {
        match self.coeffs.get(&v) {
            None => self.clone(),
            Some(c) => {
                let coeffs = self
                    .coeffs
                    .iter()
                    .filter(|(w, _)| **w != v)
                    .map(|(w, c)| (*w, c.clone()));
                LinearInequality::new(coeffs, &self.constant + &(c * value), self.relation)
            }
        }
    }

    /// Scales to the canonical representative: integer coefficients with
    /// overall gcd 1. The scale factor is positive, so the set is unchanged.
    fn normalized(mut self) -> Self {
        let mut denoms = BigInt::one();
        for c in self.coeffs.values() {
            denoms = lcm(&denoms, c.denom());
        }
        denoms = lcm(&denoms, self.constant.denom());
        let mut gcd: Option<BigInt> = None;
        let scaled: Vec<BigInt> = self
            .coeffs
            .values()
            .chain(std::iter::once(&self.constant))
            .map(|c| (c * &Rational::from_bigint(denoms.clone())).numer().clone())
            .collect();
        for n in &scaled {
            if !num_traits::Zero::is_zero(n) {
                let a = n.abs();
                gcd = Some(match gcd {
                    None => a,
                    Some(g) => num_integer::Integer::gcd(&g, &a),
                });
            }
        }
        let factor = Rational::from_parts(denoms, gcd.unwrap_or_else(BigInt::one));
        if factor != Rational::one() {
            for c in self.coeffs.values_mut() {
                *c = &*c * &factor;
            }
            self.constant = &self.constant * &factor;
        }
        self
    }

    /// Renders as `lhs REL rhs`: negative terms move to the right-hand side.
    pub fn render(&self, roster: &Roster) -> String {
        let mut lhs: Vec<String> = Vec::new();
        let mut rhs: Vec<String> = Vec::new();
        let mut ordered: Vec<(&VarId, &Rational)> = self.coeffs.iter().collect();
        ordered.sort_by_key(|(v, _)| roster.position(**v).unwrap_or(usize::MAX));
        for (v, c) in ordered {
            let name = roster.name_of(*v);
            let (side, mag) = if c.is_positive() {
                (&mut lhs, c.clone())
            } else {
                (&mut rhs, -c)
            };
            if mag == Rational::one() {
                side.push(name.to_string());
            } else {
                side.push(format!("{mag}*{name}"));
            }
        }
        if self.constant.is_positive() {
            lhs.push(self.constant.to_string());
        } else if self.constant.is_negative() {
            rhs.push((-&self.constant).to_string());
        }
        let join = |side: Vec<String>| {
            if side.is_empty() {
                "0".to_string()
            } else {
                side.join(" + ")
            }
        };
        let rel = match self.relation {
            Relation::StrictLess => "<",
            Relation::LessEq => "<=",
        };
        format!("{} {} {}", join(lhs), rel, join(rhs))
    }
}

impl fmt::Display for LinearInequality {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut first = true;
        for (v, c) in &self.coeffs {
            if !first {
                write!(f, " + ")?;
            }
            first = false;
            let kind = if v.is_clock() { "x" } else { "p" };
            write!(f, "{}*{}{}", c, kind, v.index)?;
        }
        if !first {
            write!(f, " + ")?;
        }
        let rel = match self.relation {
            Relation::StrictLess => "<",
            Relation::LessEq => "<=",
        };
        write!(f, "{} {} 0", self.constant, rel)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn x() -> VarId {
        VarId::clock(0)
    }

    #[test]
    fn zero_coefficients_absent() {
        let i = LinearInequality::new(
            [(x(), Rational::from_int(1)), (x(), Rational::from_int(-1))],
            Rational::zero(),
            Relation::LessEq,
        );
        assert!(i.is_constant());
        assert!(i.constant_holds());
    }

    #[test]
    fn normalization_scales_to_coprime_integers() {
        // x/2 - 3/2 <= 0  ~  x - 3 <= 0
        let a = LinearInequality::new(
            [(x(), Rational::new(1, 2))],
            Rational::new(-3, 2),
            Relation::LessEq,
        );
        let b = LinearInequality::upper_bound(x(), Rational::from_int(3), Relation::LessEq);
        assert_eq!(a, b);
    }

    #[test]
    fn negation_flips_strictness() {
        let le = LinearInequality::upper_bound(x(), Rational::from_int(1), Relation::LessEq);
        let neg = le.negated();
        // !(x <= 1) is x > 1.
        assert_eq!(neg.relation(), Relation::StrictLess);
        let pt = |v: i64| BTreeMap::from([(x(), Rational::from_int(v))]);
        assert_eq!(neg.holds_at(&pt(2)), Some(true));
        assert_eq!(neg.holds_at(&pt(1)), Some(false));
        assert_eq!(le.holds_at(&pt(1)), Some(true));
    }

    #[test]
    fn render_moves_negative_terms() {
        let roster = Roster::new(&["x", "y"], &["p"]);
        // 0 < p  stored as  -p < 0
        let i = LinearInequality::lower_bound(
            VarId::parameter(0),
            Rational::zero(),
            Relation::StrictLess,
        );
        assert_eq!(i.render(&roster), "0 < p");
        let j = LinearInequality::upper_bound(VarId::parameter(0), Rational::from_int(5), Relation::LessEq);
        assert_eq!(j.render(&roster), "p <= 5");
        // y <= x + 5
        let k = LinearInequality::new(
            [
                (VarId::clock(1), Rational::from_int(1)),
                (VarId::clock(0), Rational::from_int(-1)),
            ],
            Rational::from_int(-5),
            Relation::LessEq,
        );
        assert_eq!(k.render(&roster), "y <= x + 5");
    }
}
