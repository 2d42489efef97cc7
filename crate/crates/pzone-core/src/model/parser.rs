//! Parser for the textual model language.
//!
//! ```text
//! # toy model
//! clocks x, y;
//! params p in [0,5], q in [1,inf);
//! loc l0 [inv: x <= 1] {
//!   on a when x = 1 reset {x} goto l0;
//!   on b when 1 < y && x < p goto l1;
//! }
//! loc l1 [accepting] {}
//! init l0;
//! ```
//!
//! Guards are conjunctions (`&&`) of simple clock guards: one bare clock
//! compared to an integer combination of parameters plus a rational
//! constant. Rational constants are normalized away by a global rescaling
//! recorded in the automaton's `scale`. Domain bounds are closed unless
//! infinite (`inf` / `-inf`).

use std::collections::{BTreeMap, BTreeSet};

use num_bigint::BigInt;
use num_traits::{One, Zero};
use thiserror::Error;

use super::{Edge, GuardRel, LocId, Location, ParamDomain, Pta, SimpleClockGuard};
use crate::geometry::{lcm, Rational, VarId};

#[derive(Error, Debug, Clone, PartialEq, Eq)]
#[error("{line}:{col}: {message}")]
pub struct ParseError {
    pub line: usize,
    pub col: usize,
    pub message: String,
}

/// Parses a model file into a well-formed [`Pta`].
pub fn parse_model(text: &str) -> Result<Pta, ParseError> {
    let tokens = lex(text)?;
    Parser { tokens, pos: 0 }.model()
}

#[derive(Clone, PartialEq, Eq, Debug)]
enum Tok {
    Ident(String),
    Number(BigInt),
    Sym(&'static str),
}

#[derive(Clone, Debug)]
struct Token {
    tok: Tok,
    line: usize,
    col: usize,
}

const SYMBOLS2: [&str; 3] = ["<=", ">=", "&&"];
const SYMBOLS1: [char; 14] =
    [',', ';', '{', '}', '[', ']', '(', ')', ':', '<', '=', '>', '+', '-'];

fn lex(text: &str) -> Result<Vec<Token>, ParseError> {
    let mut out = Vec::new();
    let mut chars = text.chars().peekable();
    let (mut line, mut col) = (1usize, 1usize);
    let bump = |c: char, line: &mut usize, col: &mut usize| {
        if c == '\n' {
            *line += 1;
            *col = 1;
        } else {
            *col += 1;
        }
    };
    while let Some(&c) = chars.peek() {
        if c.is_whitespace() {
            chars.next();
            bump(c, &mut line, &mut col);
            continue;
        }
        if c == '#' {
            while let Some(&c) = chars.peek() {
                chars.next();
                bump(c, &mut line, &mut col);
                if c == '\n' {
                    break;
                }
            }
            continue;
        }
        let (tline, tcol) = (line, col);
        if c.is_ascii_alphabetic() || c == '_' {
            let mut s = String::new();
            while let Some(&c) = chars.peek() {
                if c.is_ascii_alphanumeric() || c == '_' {
                    s.push(c);
                    chars.next();
                    bump(c, &mut line, &mut col);
                } else {
                    break;
                }
            }
            out.push(Token { tok: Tok::Ident(s), line: tline, col: tcol });
            continue;
        }
        if c.is_ascii_digit() {
            let mut s = String::new();
            while let Some(&c) = chars.peek() {
                if c.is_ascii_digit() {
                    s.push(c);
                    chars.next();
                    bump(c, &mut line, &mut col);
                } else {
                    break;
                }
            }
            let n: BigInt = s.parse().expect("digits");
            out.push(Token { tok: Tok::Number(n), line: tline, col: tcol });
            continue;
        }
        chars.next();
        bump(c, &mut line, &mut col);
        let two = chars.peek().map(|&d| {
            let mut s = String::new();
            s.push(c);
            s.push(d);
            s
        });
        if let Some(two) = two {
            if let Some(sym) = SYMBOLS2.iter().find(|s| **s == two) {
                let d = chars.next().unwrap();
                bump(d, &mut line, &mut col);
                out.push(Token { tok: Tok::Sym(sym), line: tline, col: tcol });
                continue;
            }
        }
        if c == '*' || c == '/' {
            out.push(Token {
                tok: Tok::Sym(if c == '*' { "*" } else { "/" }),
                line: tline,
                col: tcol,
            });
            continue;
        }
        match SYMBOLS1.iter().find(|s| **s == c) {
            Some(_) => {
                let sym: &'static str = match c {
                    ',' => ",",
                    ';' => ";",
                    '{' => "{",
                    '}' => "}",
                    '[' => "[",
                    ']' => "]",
                    '(' => "(",
                    ')' => ")",
                    ':' => ":",
                    '<' => "<",
                    '=' => "=",
                    '>' => ">",
                    '+' => "+",
                    '-' => "-",
                    _ => unreachable!(),
                };
                out.push(Token { tok: Tok::Sym(sym), line: tline, col: tcol });
            }
            None => {
                return Err(ParseError {
                    line: tline,
                    col: tcol,
                    message: format!("unexpected character `{c}`"),
                })
            }
        }
    }
    Ok(out)
}

/// A linear expression over declared variables with rational coefficients,
/// before validation into a simple clock guard.
#[derive(Default)]
struct LinExpr {
    coeffs: BTreeMap<String, Rational>,
    constant: Rational,
}

impl LinExpr {
    fn add(&mut self, other: LinExpr, sign: i64) {
        let s = Rational::from_int(sign);
        for (n, c) in other.coeffs {
            let e = self.coeffs.entry(n).or_insert_with(Rational::zero);
            *e += &c * &s;
        }
        self.constant += &other.constant * &s;
    }
}

struct RawGuard {
    lhs: LinExpr,
    rel: GuardRel,
    rhs: LinExpr,
    line: usize,
    col: usize,
}

struct RawEdge {
    action: String,
    guard: Vec<RawGuard>,
    resets: Vec<(String, usize, usize)>,
    target: (String, usize, usize),
}

struct RawLoc {
    name: String,
    line: usize,
    col: usize,
    accepting: bool,
    invariant: Vec<RawGuard>,
    edges: Vec<RawEdge>,
}

struct Parser {
    tokens: Vec<Token>,
    pos: usize,
}

impl Parser {
    fn here(&self) -> (usize, usize) {
        match self.tokens.get(self.pos) {
            Some(t) => (t.line, t.col),
            None => self
                .tokens
                .last()
                .map(|t| (t.line, t.col + 1))
                .unwrap_or((1, 1)),
        }
    }

    fn fail<T>(&self, message: impl Into<String>) -> Result<T, ParseError> {
        let (line, col) = self.here();
        Err(ParseError { line, col, message: message.into() })
    }

    fn peek(&self) -> Option<&Tok> {
        self.tokens.get(self.pos).map(|t| &t.tok)
    }

    fn eat_sym(&mut self, sym: &str) -> bool {
        match self.peek() {
            Some(Tok::Sym(s)) if *s == sym => {
                self.pos += 1;
                true
            }
            _ => false,
        }
    }

    fn expect_sym(&mut self, sym: &'static str) -> Result<(), ParseError> {
        match self.peek() {
            Some(Tok::Sym(s)) if *s == sym => {
                self.pos += 1;
                Ok(())
            }
            _ => self.fail(format!("expected `{sym}`")),
        }
    }

    fn eat_keyword(&mut self, kw: &str) -> bool {
        match self.peek() {
            Some(Tok::Ident(s)) if s == kw => {
                self.pos += 1;
                true
            }
            _ => false,
        }
    }

    fn expect_keyword(&mut self, kw: &str) -> Result<(), ParseError> {
        if self.eat_keyword(kw) {
            Ok(())
        } else {
            self.fail(format!("expected `{kw}`"))
        }
    }

    fn expect_ident(&mut self) -> Result<(String, usize, usize), ParseError> {
        let (line, col) = self.here();
        match self.peek() {
            Some(Tok::Ident(s)) => {
                let s = s.clone();
                self.pos += 1;
                Ok((s, line, col))
            }
            _ => self.fail("expected an identifier"),
        }
    }

    fn model(&mut self) -> Result<Pta, ParseError> {
        let mut clocks: Vec<String> = Vec::new();
        let mut params: Vec<String> = Vec::new();
        let mut domain: Vec<(Option<Rational>, Option<Rational>)> = Vec::new();
        let mut locs: Vec<RawLoc> = Vec::new();
        let mut init: Option<(String, usize, usize)> = None;
        while self.peek().is_some() {
            if self.eat_keyword("clocks") {
                loop {
                    let (name, line, col) = self.expect_ident()?;
                    if clocks.contains(&name) {
                        return Err(ParseError {
                            line,
                            col,
                            message: format!("duplicate clock `{name}`"),
                        });
                    }
                    clocks.push(name);
                    if !self.eat_sym(",") {
                        break;
                    }
                }
                self.expect_sym(";")?;
            } else if self.eat_keyword("params") {
                loop {
                    let (name, line, col) = self.expect_ident()?;
                    if params.contains(&name) || clocks.contains(&name) {
                        return Err(ParseError {
                            line,
                            col,
                            message: format!("duplicate variable `{name}`"),
                        });
                    }
                    self.expect_keyword("in")?;
                    let bounds = self.domain_interval()?;
                    params.push(name);
                    domain.push(bounds);
                    if !self.eat_sym(",") {
                        break;
                    }
                }
                self.expect_sym(";")?;
            } else if self.eat_keyword("loc") {
                locs.push(self.location()?);
            } else if self.eat_keyword("init") {
                let id = self.expect_ident()?;
                self.expect_sym(";")?;
                init = Some(id);
            } else {
                return self.fail("expected `clocks`, `params`, `loc` or `init`");
            }
        }
        self.build(clocks, params, domain, locs, init)
    }

    fn domain_interval(
        &mut self,
    ) -> Result<(Option<Rational>, Option<Rational>), ParseError> {
        let open_lo = if self.eat_sym("[") {
            false
        } else if self.eat_sym("(") {
            true
        } else {
            return self.fail("expected `[` or `(`");
        };
        let lo = self.domain_bound(true)?;
        if lo.is_some() && open_lo {
            return self.fail("domain is closed at finite bounds; use `[`");
        }
        if lo.is_none() && !open_lo {
            return self.fail("an infinite bound is open; use `(`");
        }
        self.expect_sym(",")?;
        let hi = self.domain_bound(false)?;
        let open_hi = if self.eat_sym("]") {
            false
        } else if self.eat_sym(")") {
            true
        } else {
            return self.fail("expected `]` or `)`");
        };
        if hi.is_some() && open_hi {
            return self.fail("domain is closed at finite bounds; use `]`");
        }
        if hi.is_none() && !open_hi {
            return self.fail("an infinite bound is open; use `)`");
        }
        if let (Some(lo), Some(hi)) = (&lo, &hi) {
            if lo > hi {
                return self.fail("malformed domain: lower bound exceeds upper bound");
            }
        }
        Ok((lo, hi))
    }

    /// `inf`, `-inf`, or a rational; `None` encodes the infinite side.
    fn domain_bound(&mut self, lower: bool) -> Result<Option<Rational>, ParseError> {
        let negative = self.eat_sym("-");
        if self.eat_keyword("inf") {
            if negative && !lower {
                return self.fail("-inf is not a valid upper bound");
            }
            if !negative && lower {
                return self.fail("inf is not a valid lower bound");
            }
            return Ok(None);
        }
        let r = self.rational()?;
        Ok(Some(if negative { -r } else { r }))
    }

    fn rational(&mut self) -> Result<Rational, ParseError> {
        let n = match self.peek() {
            Some(Tok::Number(n)) => n.clone(),
            _ => return self.fail("expected a number"),
        };
        self.pos += 1;
        if self.eat_sym("/") {
            let d = match self.peek() {
                Some(Tok::Number(d)) => d.clone(),
                _ => return self.fail("expected a denominator"),
            };
            self.pos += 1;
            if d.is_zero() {
                return self.fail("zero denominator");
            }
            Ok(Rational::from_parts(n, d))
        } else {
            Ok(Rational::from_bigint(n))
        }
    }

    fn location(&mut self) -> Result<RawLoc, ParseError> {
        let (name, line, col) = self.expect_ident()?;
        let mut accepting = false;
        let mut invariant = Vec::new();
        if self.eat_sym("[") {
            loop {
                if self.eat_keyword("accepting") {
                    accepting = true;
                } else if self.eat_keyword("inv") {
                    self.expect_sym(":")?;
                    invariant = self.guard()?;
                } else {
                    return self.fail("expected `accepting` or `inv:`");
                }
                if !self.eat_sym(",") {
                    break;
                }
            }
            self.expect_sym("]")?;
        }
        self.expect_sym("{")?;
        let mut edges = Vec::new();
        while self.eat_keyword("on") {
            let (action, _, _) = self.expect_ident()?;
            let guard = if self.eat_keyword("when") {
                self.guard()?
            } else {
                Vec::new()
            };
            let mut resets = Vec::new();
            if self.eat_keyword("reset") {
                self.expect_sym("{")?;
                if !self.eat_sym("}") {
                    loop {
                        resets.push(self.expect_ident()?);
                        if !self.eat_sym(",") {
                            break;
                        }
                    }
                    self.expect_sym("}")?;
                }
            }
            self.expect_keyword("goto")?;
            let target = self.expect_ident()?;
            self.expect_sym(";")?;
            edges.push(RawEdge { action, guard, resets, target });
        }
        self.expect_sym("}")?;
        Ok(RawLoc { name, line, col, accepting, invariant, edges })
    }

    fn guard(&mut self) -> Result<Vec<RawGuard>, ParseError> {
        let mut out = Vec::new();
        loop {
            let (line, col) = self.here();
            let lhs = self.expr()?;
            let rel = match self.peek() {
                Some(Tok::Sym("<")) => GuardRel::Lt,
                Some(Tok::Sym("<=")) => GuardRel::Le,
                Some(Tok::Sym("=")) => GuardRel::Eq,
                Some(Tok::Sym(">=")) => GuardRel::Ge,
                Some(Tok::Sym(">")) => GuardRel::Gt,
                _ => return self.fail("expected a comparison operator"),
            };
            self.pos += 1;
            let rhs = self.expr()?;
            out.push(RawGuard { lhs, rel, rhs, line, col });
            if !self.eat_sym("&&") {
                break;
            }
        }
        Ok(out)
    }

    fn expr(&mut self) -> Result<LinExpr, ParseError> {
        let mut acc = LinExpr::default();
        let mut sign = 1i64;
        if self.eat_sym("-") {
            sign = -1;
        }
        loop {
            let term = self.term()?;
            acc.add(term, sign);
            if self.eat_sym("+") {
                sign = 1;
            } else if self.eat_sym("-") {
                sign = -1;
            } else {
                break;
            }
        }
        Ok(acc)
    }

    /// `rational ["*"] ident | rational | ident`. Keywords of the model
    /// language are not valid variable names.
    fn term(&mut self) -> Result<LinExpr, ParseError> {
        const KEYWORDS: [&str; 12] = [
            "clocks", "params", "loc", "init", "on", "when", "reset", "goto", "in", "inf",
            "accepting", "inv",
        ];
        let var_name = |t: Option<&Tok>| match t {
            Some(Tok::Ident(name)) if !KEYWORDS.contains(&name.as_str()) => {
                Some(name.clone())
            }
            _ => None,
        };
        let mut e = LinExpr::default();
        if matches!(self.peek(), Some(Tok::Number(_))) {
            let r = self.rational()?;
            let starred = self.eat_sym("*");
            if let Some(name) = var_name(self.peek()) {
                self.pos += 1;
                e.coeffs.insert(name, r);
            } else if starred {
                return self.fail("expected a variable after `*`");
            } else {
                e.constant = r;
            }
        } else if let Some(name) = var_name(self.peek()) {
            self.pos += 1;
            e.coeffs.insert(name, Rational::one());
        } else {
            return self.fail("expected a term");
        }
        Ok(e)
    }

    fn build(
        &self,
        clocks: Vec<String>,
        params: Vec<String>,
        domain: Vec<(Option<Rational>, Option<Rational>)>,
        locs: Vec<RawLoc>,
        init: Option<(String, usize, usize)>,
    ) -> Result<Pta, ParseError> {
        let loc_id = |name: &str, line: usize, col: usize| -> Result<LocId, ParseError> {
            locs.iter()
                .position(|l| l.name == name)
                .map(LocId)
                .ok_or_else(|| ParseError {
                    line,
                    col,
                    message: format!("undeclared location `{name}`"),
                })
        };
        for (i, l) in locs.iter().enumerate() {
            if locs[..i].iter().any(|m| m.name == l.name) {
                return Err(ParseError {
                    line: l.line,
                    col: l.col,
                    message: format!("duplicate location `{}`", l.name),
                });
            }
        }
        let (init_name, init_line, init_col) = match init {
            Some(i) => i,
            None => {
                return Err(ParseError {
                    line: 1,
                    col: 1,
                    message: "missing `init` declaration".to_string(),
                })
            }
        };
        let initial = loc_id(&init_name, init_line, init_col)?;

        // Resolve guards into clock-left simple guards with rational
        // constants, then find the global rescaling making them integral.
        let resolve = |g: &RawGuard| -> Result<(VarId, GuardRel, BTreeMap<VarId, BigInt>, Rational), ParseError>
        {
            let mut net = LinExpr::default();
            net.add(
                LinExpr { coeffs: g.lhs.coeffs.clone(), constant: g.lhs.constant.clone() },
                1,
            );
            net.add(
                LinExpr { coeffs: g.rhs.coeffs.clone(), constant: g.rhs.constant.clone() },
                -1,
            );
            let err = |message: String| ParseError { line: g.line, col: g.col, message };
            let mut clock: Option<(VarId, Rational)> = None;
            let mut pcoeffs: BTreeMap<VarId, Rational> = BTreeMap::new();
            for (name, c) in &net.coeffs {
                if c.is_zero() {
                    continue;
                }
                if let Some(i) = clocks.iter().position(|n| n == name) {
                    if clock.is_some() {
                        return Err(err("diagonal clock guards are not supported".into()));
                    }
                    clock = Some((VarId::clock(i), c.clone()));
                } else if let Some(j) = params.iter().position(|n| n == name) {
                    pcoeffs.insert(VarId::parameter(j), c.clone());
                } else {
                    return Err(err(format!("undeclared variable `{name}`")));
                }
            }
            let (clock, ccoeff) = match clock {
                Some(c) => c,
                None => return Err(err("a guard must compare a clock".into())),
            };
            // Normalize to clock on the left with coefficient one.
            let (rel, flip) = if ccoeff == Rational::one() {
                (g.rel, false)
            } else if ccoeff == -Rational::one() {
                let rel = match g.rel {
                    GuardRel::Lt => GuardRel::Gt,
                    GuardRel::Le => GuardRel::Ge,
                    GuardRel::Eq => GuardRel::Eq,
                    GuardRel::Ge => GuardRel::Le,
                    GuardRel::Gt => GuardRel::Lt,
                };
                (rel, true)
            } else {
                return Err(err("the clock must appear with unit coefficient".into()));
            };
            let sign = Rational::from_int(if flip { 1 } else { -1 });
            let mut int_coeffs = BTreeMap::new();
            for (p, c) in pcoeffs {
                let c = &c * &sign;
                if !c.is_integer() {
                    return Err(err("parameter coefficients must be integers".into()));
                }
                int_coeffs.insert(p, c.numer().clone());
            }
            let constant = &net.constant * &sign;
            Ok((clock, rel, int_coeffs, constant))
        };

        let mut resolved_locs: Vec<(String, bool, Vec<(VarId, GuardRel, BTreeMap<VarId, BigInt>, Rational)>)> =
            Vec::new();
        let mut resolved_edges: Vec<(
            LocId,
            String,
            Vec<(VarId, GuardRel, BTreeMap<VarId, BigInt>, Rational)>,
            BTreeSet<VarId>,
            LocId,
        )> = Vec::new();
        let mut denom = BigInt::one();
        for (i, l) in locs.iter().enumerate() {
            let inv = l.invariant.iter().map(&resolve).collect::<Result<Vec<_>, _>>()?;
            for g in &inv {
                denom = lcm(&denom, g.3.denom());
            }
            resolved_locs.push((l.name.clone(), l.accepting, inv));
            for e in &l.edges {
                let guard = e.guard.iter().map(&resolve).collect::<Result<Vec<_>, _>>()?;
                for g in &guard {
                    denom = lcm(&denom, g.3.denom());
                }
                let mut resets = BTreeSet::new();
                for (name, line, col) in &e.resets {
                    match clocks.iter().position(|n| n == name) {
                        Some(i) => {
                            resets.insert(VarId::clock(i));
                        }
                        None => {
                            return Err(ParseError {
                                line: *line,
                                col: *col,
                                message: format!("undeclared clock `{name}`"),
                            })
                        }
                    }
                }
                let target = loc_id(&e.target.0, e.target.1, e.target.2)?;
                resolved_edges.push((LocId(i), e.action.clone(), guard, resets, target));
            }
        }

        let scale = Rational::from_bigint(denom.clone());
        let finish = |gs: Vec<(VarId, GuardRel, BTreeMap<VarId, BigInt>, Rational)>| {
            gs.into_iter()
                .map(|(clock, relation, param_coeffs, constant)| SimpleClockGuard {
                    clock,
                    relation,
                    param_coeffs,
                    constant: (&constant * &scale).numer().clone(),
                })
                .collect::<Vec<_>>()
        };
        let locations: Vec<Location> = resolved_locs
            .into_iter()
            .map(|(name, accepting, inv)| Location {
                name,
                accepting,
                invariant: finish(inv),
            })
            .collect();
        let edges: Vec<Edge> = resolved_edges
            .into_iter()
            .map(|(source, action, guard, resets, target)| Edge {
                source,
                action,
                guard: finish(guard),
                resets,
                target,
            })
            .collect();
        let domain = ParamDomain::new(
            domain
                .into_iter()
                .map(|(lo, hi)| (lo.map(|b| &b * &scale), hi.map(|b| &b * &scale)))
                .collect(),
        );
        Ok(Pta::new(clocks, params, domain, locations, initial, edges, denom))
    }
}
