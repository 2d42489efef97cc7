//! Finite unions of convex polyhedra.

use std::collections::BTreeMap;

use super::linear::VarId;
use super::poly::{difference, ConvexPolyhedron};
use super::rational::Rational;

/// A finite union of non-empty convex polyhedra over a shared roster,
/// pruned of members contained in another member. Different decompositions
/// of the same set may differ structurally; use [`PolySet::set_equal`] for
/// semantic comparison.
#[derive(Clone, PartialEq, Eq, Debug, Default)]
pub struct PolySet {
    members: Vec<ConvexPolyhedron>,
}

impl PolySet {
    /// The empty union.
    pub fn empty() -> Self {
        PolySet { members: Vec::new() }
    }

    pub fn from_members(members: impl IntoIterator<Item = ConvexPolyhedron>) -> Self {
        let mut set = PolySet::empty();
        for m in members {
            set.push(m);
        }
        set
    }

    /// Inserts a member, dropping it if empty or contained in an existing
    /// member, and evicting existing members it contains.
    pub fn push(&mut self, poly: ConvexPolyhedron) {
        if poly.is_empty() {
            return;
        }
        debug_assert!(
            self.members.is_empty() || self.members[0].roster() == poly.roster(),
            "polyset members must share a roster"
        );
        if self.members.iter().any(|m| m.contains(&poly)) {
            return;
        }
        self.members.retain(|m| !poly.contains(m));
        self.members.push(poly);
    }

    pub fn union(mut self, other: PolySet) -> PolySet {
        for m in other.members {
            self.push(m);
        }
        self
    }

    pub fn members(&self) -> &[ConvexPolyhedron] {
        &self.members
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn contains_point(&self, point: &BTreeMap<VarId, Rational>) -> bool {
        self.members
            .iter()
            .any(|m| m.sample_membership(point).unwrap_or(false))
    }

    /// True iff `poly` is included in the union of the members.
    pub fn covers(&self, poly: &ConvexPolyhedron) -> bool {
        let mut pieces = vec![poly.clone()];
        for m in &self.members {
            pieces = pieces.iter().flat_map(|p| difference(p, m)).collect();
            if pieces.is_empty() {
                return true;
            }
        }
        pieces.is_empty()
    }

    /// Exact set equality of the two unions.
    pub fn set_equal(&self, other: &PolySet) -> bool {
        self.members.iter().all(|m| other.covers(m))
            && other.members.iter().all(|m| self.covers(m))
    }

    /// One rendered constraint per disjunct; "false" when empty.
    pub fn render_disjuncts(&self) -> Vec<String> {
        self.members.iter().map(|m| m.render()).collect()
    }
}

impl FromIterator<ConvexPolyhedron> for PolySet {
    fn from_iter<T: IntoIterator<Item = ConvexPolyhedron>>(iter: T) -> Self {
        PolySet::from_members(iter)
    }
}
