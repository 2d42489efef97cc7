//! Convex polyhedra over clocks and parameters, with exact Fourier-Motzkin
//! elimination as the single decision procedure.

use std::collections::BTreeMap;
use std::sync::{Arc, OnceLock};

use super::linear::{LinearInequality, Relation, Roster, VarId};
use super::rational::Rational;
use super::GeometryError;

/// Variable id reserved for short-lived auxiliary dimensions (the delay of
/// time elapsing, the value of a linear term). Never part of a roster.
const AUX: VarId = VarId { kind: super::linear::VarKind::Clock, index: usize::MAX };

/// An inclusive-or-strict bound on a single variable or linear term.
pub type Bound = (Rational, Relation);

/// A conjunction of linear inequalities over a fixed roster. Immutable after
/// construction; all operations are pure functions returning new values.
#[derive(Debug)]
pub struct ConvexPolyhedron {
    roster: Arc<Roster>,
    rows: Vec<LinearInequality>,
    empty: OnceLock<bool>,
}

impl Clone for ConvexPolyhedron {
    fn clone(&self) -> Self {
        ConvexPolyhedron {
            roster: self.roster.clone(),
            rows: self.rows.clone(),
            empty: self.empty.clone(),
        }
    }
}

/// Value equality is syntactic (same normalized inequality list); use
/// [`ConvexPolyhedron::equal`] for set equality.
impl PartialEq for ConvexPolyhedron {
    fn eq(&self, other: &Self) -> bool {
        self.roster == other.roster && self.rows == other.rows
    }
}

impl Eq for ConvexPolyhedron {}

impl std::hash::Hash for ConvexPolyhedron {
    fn hash<H: std::hash::Hasher>(&self, state: &mut H) {
        self.roster.hash(state);
        self.rows.hash(state);
    }
}

impl ConvexPolyhedron {
    /// The universe over `roster` (no constraints).
    pub fn universe(roster: Arc<Roster>) -> Self {
        ConvexPolyhedron { roster, rows: Vec::new(), empty: OnceLock::new() }
    }

    /// Builds from inequalities, validating that they only mention roster
    /// variables. Redundant inequalities are pruned.
    pub fn new(
        roster: Arc<Roster>,
        rows: impl IntoIterator<Item = LinearInequality>,
    ) -> Result<Self, GeometryError> {
        let rows: Vec<_> = rows.into_iter().collect();
        for row in &rows {
            for v in row.coeffs().keys() {
                if !roster.contains(*v) {
                    return Err(GeometryError::UnknownVariable);
                }
            }
        }
        Ok(Self::from_rows(roster, rows))
    }

    /// Internal constructor: syntactic reduction, semantic redundancy
    /// pruning, canonical row order.
    pub(crate) fn from_rows(roster: Arc<Roster>, rows: Vec<LinearInequality>) -> Self {
        let mut rows = reduce(rows);
        if !rows.iter().any(|r| r.is_constant()) {
            semantic_prune(&mut rows);
        }
        sort_rows(&roster, &mut rows);
        ConvexPolyhedron { roster, rows, empty: OnceLock::new() }
    }

    pub fn roster(&self) -> &Arc<Roster> {
        &self.roster
    }

    pub fn rows(&self) -> &[LinearInequality] {
        &self.rows
    }

    /// True iff no rational point satisfies the conjunction. Memoized.
    pub fn is_empty(&self) -> bool {
        *self.empty.get_or_init(|| raw_is_empty(self.rows.clone()))
    }

    /// Conjunction of both inequality lists. Errors on roster mismatch.
    pub fn intersect(&self, other: &ConvexPolyhedron) -> Result<ConvexPolyhedron, GeometryError> {
        if self.roster != other.roster {
            return Err(GeometryError::RosterMismatch);
        }
        let mut rows = self.rows.clone();
        rows.extend(other.rows.iter().cloned());
        Ok(Self::from_rows(self.roster.clone(), rows))
    }

    /// Conjoins extra inequalities (same roster implied).
    pub fn conjoin(&self, extra: impl IntoIterator<Item = LinearInequality>) -> ConvexPolyhedron {
        let mut rows = self.rows.clone();
        rows.extend(extra);
        Self::from_rows(self.roster.clone(), rows)
    }

    /// Exact projection shadow: eliminates `v` by Fourier-Motzkin.
    pub fn eliminate(&self, v: VarId) -> ConvexPolyhedron {
        debug_assert!(self.roster.contains(v), "eliminating a variable outside the roster");
        let rows = fm_step(self.rows.clone(), v);
        Self::from_rows(self.roster.clone(), rows)
    }

    /// Eliminates every clock; the result lives on the parameter-only roster.
    pub fn project_to_params(&self) -> ConvexPolyhedron {
        let clocks: Vec<VarId> = self.roster.clocks().collect();
        let mut rows = self.rows.clone();
        for x in clocks {
            rows = fm_step(rows, x);
            rows = reduce(rows);
        }
        Self::from_rows(self.roster.params_only(), rows)
    }

    /// Time elapsing: every clock in `clocks` is delayed by a common, fresh
    /// non-negative amount; parameters are unchanged.
    pub fn time_elapse(&self, clocks: &[VarId]) -> ConvexPolyhedron {
        debug_assert!(clocks.iter().all(|x| self.roster.contains(*x)));
        // Substitute x -> x - d for each clock, constrain d >= 0, eliminate d.
        let mut rows: Vec<LinearInequality> = self
            .rows
            .iter()
            .map(|row| {
                let d_coeff: Rational = clocks
                    .iter()
                    .fold(Rational::zero(), |acc, x| acc - row.coeff(*x));
                if d_coeff.is_zero() {
                    row.clone()
                } else {
                    let coeffs = row
                        .coeffs()
                        .iter()
                        .map(|(v, c)| (*v, c.clone()))
                        .chain(std::iter::once((AUX, d_coeff)));
                    LinearInequality::new(coeffs, row.constant().clone(), row.relation())
                }
            })
            .collect();
        rows.push(LinearInequality::lower_bound(AUX, Rational::zero(), Relation::LessEq));
        let rows = fm_step(rows, AUX);
        Self::from_rows(self.roster.clone(), rows)
    }

    /// Reset: eliminates each clock in `r`, then conjoins it to zero.
    pub fn reset(&self, r: &[VarId]) -> ConvexPolyhedron {
        debug_assert!(r.iter().all(|x| x.is_clock() && self.roster.contains(*x)));
        let mut rows = self.rows.clone();
        for x in r {
            rows = fm_step(rows, *x);
        }
        for x in r {
            rows.push(LinearInequality::upper_bound(*x, Rational::zero(), Relation::LessEq));
            rows.push(LinearInequality::lower_bound(*x, Rational::zero(), Relation::LessEq));
        }
        Self::from_rows(self.roster.clone(), rows)
    }

    /// Cylindrification: unconstrains clock `x`, keeping `x >= 0`.
    pub fn cylindrify(&self, x: VarId) -> ConvexPolyhedron {
        debug_assert!(x.is_clock());
        let mut rows = fm_step(self.rows.clone(), x);
        rows.push(LinearInequality::lower_bound(x, Rational::zero(), Relation::LessEq));
        Self::from_rows(self.roster.clone(), rows)
    }

    /// Topological closure: every strict inequality relaxed to non-strict.
    pub fn closure(&self) -> ConvexPolyhedron {
        let rows = self
            .rows
            .iter()
            .map(|r| {
                LinearInequality::new(
                    r.coeffs().iter().map(|(v, c)| (*v, c.clone())),
                    r.constant().clone(),
                    Relation::LessEq,
                )
            })
            .collect();
        Self::from_rows(self.roster.clone(), rows)
    }

    /// True iff `other` is included in `self`: every inequality of `self`,
    /// negated, is unsatisfiable together with `other`.
    pub fn contains(&self, other: &ConvexPolyhedron) -> bool {
        debug_assert!(self.roster == other.roster, "containment across rosters");
        self.rows.iter().all(|row| {
            let mut rows = other.rows.clone();
            rows.push(row.negated());
            raw_is_empty(rows)
        })
    }

    /// Set equality by mutual containment.
    pub fn equal(&self, other: &ConvexPolyhedron) -> bool {
        self.contains(other) && other.contains(self)
    }

    /// Substitutes every parameter by its value; the result lives on the
    /// clock-only roster.
    pub fn valuate_params(&self, v: &BTreeMap<VarId, Rational>) -> ConvexPolyhedron {
        debug_assert!(
            self.roster.parameters().all(|p| v.contains_key(&p)),
            "valuation must cover all parameters"
        );
        let mut rows = self.rows.clone();
        for (p, value) in v {
            rows = rows.into_iter().map(|row| row.substitute(*p, value)).collect();
        }
        Self::from_rows(self.roster.clocks_only(), rows)
    }

    /// Evaluates every inequality at the point.
    pub fn sample_membership(
        &self,
        point: &BTreeMap<VarId, Rational>,
    ) -> Result<bool, GeometryError> {
        for row in &self.rows {
            match row.holds_at(point) {
                Some(true) => {}
                Some(false) => return Ok(false),
                None => return Err(GeometryError::MissingCoordinate),
            }
        }
        Ok(true)
    }

    /// Tightest lower and upper bounds of a single variable over the set.
    /// `None` on an unbounded side. The empty polyhedron yields `(None, None)`
    /// with `empty` set in the result.
    pub fn interval_of(&self, v: VarId) -> VarInterval {
        if self.is_empty() {
            return VarInterval { empty: true, lower: None, upper: None };
        }
        let mut rows = self.rows.clone();
        for w in self.roster.vars() {
            if *w != v {
                rows = fm_step(rows, *w);
                rows = reduce(rows);
            }
        }
        let (lower, upper) = single_var_bounds(&rows, v);
        VarInterval { empty: false, lower, upper }
    }

    /// Least upper bound of a linear term over the set, or `None` if
    /// unbounded above. Must not be called on an empty polyhedron.
    pub fn sup_of_term(&self, term: &[(VarId, Rational)]) -> Option<Bound> {
        debug_assert!(!self.is_empty());
        let mut rows = self.rows.clone();
        // t = term, encoded as two non-strict inequalities.
        rows.push(LinearInequality::new(
            term.iter()
                .map(|(v, c)| (*v, -c))
                .chain(std::iter::once((AUX, Rational::one()))),
            Rational::zero(),
            Relation::LessEq,
        ));
        rows.push(LinearInequality::new(
            term.iter()
                .map(|(v, c)| (*v, c.clone()))
                .chain(std::iter::once((AUX, -Rational::one()))),
            Rational::zero(),
            Relation::LessEq,
        ));
        for w in self.roster.vars() {
            rows = fm_step(rows, *w);
            rows = reduce(rows);
        }
        let (_, upper) = single_var_bounds(&rows, AUX);
        upper
    }

    /// Renders inequalities joined by " & "; `true` for the universe and
    /// `false` for a syntactically contradictory polyhedron.
    pub fn render(&self) -> String {
        if self.rows.is_empty() {
            return "true".to_string();
        }
        if self.rows.iter().any(|r| r.is_constant() && !r.constant_holds()) {
            return "false".to_string();
        }
        self.rows
            .iter()
            .map(|r| r.render(&self.roster))
            .collect::<Vec<_>>()
            .join(" & ")
    }
}

/// The interval of one variable over a polyhedron.
#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub struct VarInterval {
    pub empty: bool,
    pub lower: Option<Bound>,
    pub upper: Option<Bound>,
}

/// Difference `a \ b` as a finite list of disjoint convex pieces.
pub fn difference(a: &ConvexPolyhedron, b: &ConvexPolyhedron) -> Vec<ConvexPolyhedron> {
    debug_assert!(a.roster() == b.roster());
    let mut pieces = Vec::new();
    let mut carried: Vec<LinearInequality> = Vec::new();
    for row in b.rows() {
        let mut rows = a.rows().to_vec();
        rows.extend(carried.iter().cloned());
        rows.push(row.negated());
        let piece = ConvexPolyhedron::from_rows(a.roster().clone(), rows);
        if !piece.is_empty() {
            pieces.push(piece);
        }
        carried.push(row.clone());
    }
    pieces
}

fn sort_rows(roster: &Roster, rows: &mut [LinearInequality]) {
    let key = |row: &LinearInequality| {
        let coeffs: Vec<(usize, Rational)> = row
            .coeffs()
            .iter()
            .map(|(v, c)| (roster.position(*v).unwrap_or(usize::MAX), c.clone()))
            .collect();
        (coeffs, row.constant().clone(), row.relation())
    };
    rows.sort_by(|a, b| key(a).cmp(&key(b)));
}

/// One Fourier-Motzkin step: eliminates `v`, combining each lower bound with
/// each upper bound. Strict dominates in combinations.
fn fm_step(rows: Vec<LinearInequality>, v: VarId) -> Vec<LinearInequality> {
    let mut lowers = Vec::new();
    let mut uppers = Vec::new();
    let mut rest = Vec::new();
    for row in rows {
        let c = row.coeff(v);
        if c.is_zero() {
            rest.push(row);
        } else if c.is_positive() {
            uppers.push((row, c));
        } else {
            lowers.push((row, c));
        }
    }
    for (lo, cl) in &lowers {
        for (up, cu) in &uppers {
            // Positive combination (1/cu)*up + (-1/cl)*lo cancels v.
            let fu = cu.recip();
            let fl = -cl.recip();
            let mut coeffs: BTreeMap<VarId, Rational> = BTreeMap::new();
            for (w, c) in up.coeffs() {
                coeffs.insert(*w, c * &fu);
            }
            for (w, c) in lo.coeffs() {
                let entry = coeffs.entry(*w).or_insert_with(Rational::zero);
                *entry += c * &fl;
            }
            coeffs.remove(&v);
            let constant = &(up.constant() * &fu) + &(lo.constant() * &fl);
            rest.push(LinearInequality::new(
                coeffs,
                constant,
                up.relation().combine(lo.relation()),
            ));
        }
    }
    rest
}

/// Syntactic reduction: drops satisfied constant rows, collapses the system
/// to `false` when a contradictory constant row appears, deduplicates, and
/// keeps only the tightest of parallel rows.
fn reduce(rows: Vec<LinearInequality>) -> Vec<LinearInequality> {
    // Tightest bound per direction: rows are keyed by their coefficient
    // vector scaled to coprime integers, so parallel rows collide. For a
    // common direction, the larger constant is the tighter bound
    // (lt + c REL 0 means lt REL -c); strict wins ties.
    let mut best: BTreeMap<Vec<(VarId, Rational)>, (Rational, Relation)> = BTreeMap::new();
    for row in rows {
        if row.is_constant() {
            if row.constant_holds() {
                continue;
            }
            return vec![LinearInequality::falsum()];
        }
        let mut gcd: Option<num_bigint::BigInt> = None;
        for c in row.coeffs().values() {
            let a = num_traits::Signed::abs(c.numer());
            gcd = Some(match gcd {
                None => a,
                Some(g) => num_integer::Integer::gcd(&g, &a),
            });
        }
        let scale = Rational::from_bigint(gcd.expect("non-constant row")).recip();
        let key: Vec<(VarId, Rational)> =
            row.coeffs().iter().map(|(v, c)| (*v, c * &scale)).collect();
        let cand = (row.constant() * &scale, row.relation());
        match best.get_mut(&key) {
            None => {
                best.insert(key, cand);
            }
            Some(existing) => {
                let tighter = cand.0 > existing.0
                    || (cand.0 == existing.0
                        && cand.1 == Relation::StrictLess
                        && existing.1 == Relation::LessEq);
                if tighter {
                    *existing = cand;
                }
            }
        }
    }
    best.into_iter()
        .map(|(coeffs, (constant, relation))| LinearInequality::new(coeffs, constant, relation))
        .collect()
}

/// Satisfiability by exhaustive elimination down to a variable-free system.
/// No semantic pruning; used as the primitive everything else reduces to.
fn raw_is_empty(mut rows: Vec<LinearInequality>) -> bool {
    loop {
        rows = reduce(rows);
        if rows.iter().any(|r| r.is_constant() && !r.constant_holds()) {
            return true;
        }
        // Eliminate the variable with the fewest lower*upper combinations.
        let mut counts: BTreeMap<VarId, (usize, usize)> = BTreeMap::new();
        for row in &rows {
            for (v, c) in row.coeffs() {
                let e = counts.entry(*v).or_insert((0, 0));
                if c.is_positive() {
                    e.1 += 1;
                } else {
                    e.0 += 1;
                }
            }
        }
        let next = counts
            .into_iter()
            .min_by_key(|(_, (lo, up))| lo * up)
            .map(|(v, _)| v);
        match next {
            None => return false,
            Some(v) => rows = fm_step(rows, v),
        }
    }
}

/// Drops every row implied by the remaining ones.
fn semantic_prune(rows: &mut Vec<LinearInequality>) {
    let mut i = 0;
    while i < rows.len() {
        let mut test: Vec<LinearInequality> = Vec::with_capacity(rows.len());
        for (j, row) in rows.iter().enumerate() {
            if j != i {
                test.push(row.clone());
            }
        }
        test.push(rows[i].negated());
        if raw_is_empty(test) {
            rows.remove(i);
        } else {
            i += 1;
        }
    }
}

/// Tightest bounds of `v` in a system whose rows mention `v` alone.
fn single_var_bounds(rows: &[LinearInequality], v: VarId) -> (Option<Bound>, Option<Bound>) {
    let mut lower: Option<Bound> = None;
    let mut upper: Option<Bound> = None;
    for row in rows {
        let c = row.coeff(v);
        if c.is_zero() {
            continue;
        }
        // c*v + k REL 0 bounds v by -k/c, from above when c > 0.
        let value = &(-row.constant().clone()) / &c;
        let rel = row.relation();
        if c.is_positive() {
            let tighter = match &upper {
                None => true,
                Some((u, ur)) => {
                    value < *u
                        || (value == *u && rel == Relation::StrictLess && *ur == Relation::LessEq)
                }
            };
            if tighter {
                upper = Some((value, rel));
            }
        } else {
            let tighter = match &lower {
                None => true,
                Some((l, lr)) => {
                    value > *l
                        || (value == *l && rel == Relation::StrictLess && *lr == Relation::LessEq)
                }
            };
            if tighter {
                lower = Some((value, rel));
            }
        }
    }
    (lower, upper)
}
