//! Boolean expressions, a small text grammar for them, and brute-force satisfiability.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Enumeration ceiling for [`satisfying_assignments`].
pub const MAX_ENUM_VARS: usize = 24;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ExprError {
    #[error("syntax error at position {pos}: {msg}")]
    Syntax { pos: usize, msg: String },
    #[error("variable `{0}` has no value")]
    Unbound(String),
    #[error("{0} variables exceed the enumeration limit of {MAX_ENUM_VARS}")]
    TooManyVariables(usize),
    #[error("variable `{0}` is missing from the variable order")]
    MissingFromOrder(String),
    #[error("variable `{0}` appears twice in the variable order")]
    DuplicateInOrder(String),
    #[error("expected 3 clauses, found {0}")]
    ClauseCount(usize),
    #[error("clause {clause} repeats variable {var}")]
    RepeatedVariable { clause: usize, var: Var },
    #[error("variable `{0}` is not one of A, B, C")]
    ForeignVariable(String),
    #[error("clause {clause}: {msg}")]
    Shape { clause: usize, msg: String },
    #[error("expression is not a conjunction of clauses")]
    NotConjunction,
}

pub type Result<T> = std::result::Result<T, ExprError>;

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Expression {
    Var(String),
    Not(Box<Expression>),
    And(Vec<Expression>),
    Or(Vec<Expression>),
}

impl Expression {
    pub fn var(name: impl Into<String>) -> Expression {
        Expression::Var(name.into())
    }

    #[allow(clippy::should_implement_trait)]
    pub fn not(e: Expression) -> Expression {
        Expression::Not(Box::new(e))
    }

    /// Flattening conjunction. A single operand is returned as is.
    ///
    /// Panics on an empty operand list.
    pub fn and(items: impl IntoIterator<Item = Expression>) -> Expression {
        let mut out = Vec::new();
        for e in items {
            match e {
                Expression::And(inner) => out.extend(inner),
                other => out.push(other),
            }
        }
        assert!(!out.is_empty(), "empty conjunction");
        if out.len() == 1 {
            out.pop().unwrap()
        } else {
            Expression::And(out)
        }
    }

    /// Flattening disjunction. A single operand is returned as is.
    ///
    /// Panics on an empty operand list.
    pub fn or(items: impl IntoIterator<Item = Expression>) -> Expression {
        let mut out = Vec::new();
        for e in items {
            match e {
                Expression::Or(inner) => out.extend(inner),
                other => out.push(other),
            }
        }
        assert!(!out.is_empty(), "empty disjunction");
        if out.len() == 1 {
            out.pop().unwrap()
        } else {
            Expression::Or(out)
        }
    }

    /// Rebuilds the tree through the flattening constructors.
    pub fn canonical(&self) -> Expression {
        match self {
            Expression::Var(v) => Expression::Var(v.clone()),
            Expression::Not(e) => Expression::not(e.canonical()),
            Expression::And(es) => Expression::and(es.iter().map(|e| e.canonical())),
            Expression::Or(es) => Expression::or(es.iter().map(|e| e.canonical())),
        }
    }

    /// Variables in order of first appearance.
    pub fn variables(&self) -> Vec<String> {
        fn walk(e: &Expression, seen: &mut BTreeSet<String>, out: &mut Vec<String>) {
            match e {
                Expression::Var(v) => {
                    if seen.insert(v.clone()) {
                        out.push(v.clone());
                    }
                }
                Expression::Not(c) => walk(c, seen, out),
                Expression::And(cs) | Expression::Or(cs) => {
                    for c in cs {
                        walk(c, seen, out);
                    }
                }
            }
        }
        let mut out = Vec::new();
        walk(self, &mut BTreeSet::new(), &mut out);
        out
    }

    pub fn evaluate(&self, a: &Assignment) -> Result<bool> {
        self.eval_with(&|name| a.get(name).copied())
    }

    fn eval_with(&self, lookup: &dyn Fn(&str) -> Option<bool>) -> Result<bool> {
        Ok(match self {
            Expression::Var(v) => lookup(v).ok_or_else(|| ExprError::Unbound(v.clone()))?,
            Expression::Not(e) => !e.eval_with(lookup)?,
            Expression::And(es) => {
                let mut acc = true;
                for e in es {
                    acc &= e.eval_with(lookup)?;
                }
                acc
            }
            Expression::Or(es) => {
                let mut acc = false;
                for e in es {
                    acc |= e.eval_with(lookup)?;
                }
                acc
            }
        })
    }
}

pub type Assignment = BTreeMap<String, bool>;

pub fn evaluate(expr: &Expression, a: &Assignment) -> Result<bool> {
    expr.evaluate(a)
}

/// All satisfying assignments as integers, bit `i` holding `var_order[i]`, ascending.
pub fn satisfying_assignments(expr: &Expression, var_order: &[&str]) -> Result<Vec<u64>> {
    if var_order.len() > MAX_ENUM_VARS {
        return Err(ExprError::TooManyVariables(var_order.len()));
    }
    let mut index = BTreeMap::new();
    for (i, v) in var_order.iter().enumerate() {
        if index.insert(*v, i).is_some() {
            return Err(ExprError::DuplicateInOrder(v.to_string()));
        }
    }
    for v in expr.variables() {
        if !index.contains_key(v.as_str()) {
            return Err(ExprError::MissingFromOrder(v));
        }
    }
    let mut out = Vec::new();
    for bits in 0..(1u64 << var_order.len()) {
        let lookup = |name: &str| index.get(name).map(|&i| (bits >> i) & 1 == 1);
        if expr.eval_with(&lookup)? {
            out.push(bits);
        }
    }
    Ok(out)
}

/// Writes with ASCII operators: `~`, `&`, `|`. Compound operands are parenthesised.
impl fmt::Display for Expression {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fn operand(e: &Expression, f: &mut fmt::Formatter<'_>) -> fmt::Result {
            match e {
                Expression::And(_) | Expression::Or(_) => write!(f, "({e})"),
                _ => write!(f, "{e}"),
            }
        }
        match self {
            Expression::Var(v) => f.write_str(v),
            Expression::Not(e) => {
                f.write_str("~")?;
                operand(e, f)
            }
            Expression::And(es) | Expression::Or(es) => {
                let sep = if matches!(self, Expression::And(_)) {
                    " & "
                } else {
                    " | "
                };
                for (i, e) in es.iter().enumerate() {
                    if i > 0 {
                        f.write_str(sep)?;
                    }
                    operand(e, f)?;
                }
                Ok(())
            }
        }
    }
}

impl FromStr for Expression {
    type Err = ExprError;

    fn from_str(s: &str) -> Result<Expression> {
        parse(s)
    }
}

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Ident(String),
    Not,
    And,
    Or,
    LParen,
    RParen,
}

fn is_ident_char(c: char) -> bool {
    c.is_alphanumeric() || c == '_' || c == '.'
}

fn lex(text: &str) -> Result<Vec<(usize, Tok)>> {
    let mut toks = Vec::new();
    let mut chars = text.char_indices().peekable();
    while let Some(&(pos, c)) = chars.peek() {
        let tok = match c {
            c if c.is_whitespace() => {
                chars.next();
                continue;
            }
            '¬' | '~' | '!' => Tok::Not,
            '∧' | '&' => Tok::And,
            '∨' | '|' => Tok::Or,
            '(' => Tok::LParen,
            ')' => Tok::RParen,
            c if is_ident_char(c) => {
                let mut name = String::new();
                while let Some(&(_, c)) = chars.peek() {
                    if !is_ident_char(c) {
                        break;
                    }
                    name.push(c);
                    chars.next();
                }
                toks.push((pos, Tok::Ident(name)));
                continue;
            }
            other => {
                return Err(ExprError::Syntax {
                    pos,
                    msg: format!("unexpected character `{other}`"),
                })
            }
        };
        chars.next();
        toks.push((pos, tok));
    }
    Ok(toks)
}

struct Parser {
    toks: Vec<(usize, Tok)>,
    at: usize,
    end: usize,
}

impl Parser {
    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.at).map(|(_, t)| t)
    }

    fn pos(&self) -> usize {
        self.toks.get(self.at).map_or(self.end, |(p, _)| *p)
    }

    fn error<T>(&self, msg: impl Into<String>) -> Result<T> {
        Err(ExprError::Syntax {
            pos: self.pos(),
            msg: msg.into(),
        })
    }

    fn disjunction(&mut self) -> Result<Expression> {
        let mut items = vec![self.conjunction()?];
        while self.peek() == Some(&Tok::Or) {
            self.at += 1;
            items.push(self.conjunction()?);
        }
        Ok(Expression::or(items))
    }

    fn conjunction(&mut self) -> Result<Expression> {
        let mut items = vec![self.unary()?];
        while self.peek() == Some(&Tok::And) {
            self.at += 1;
            items.push(self.unary()?);
        }
        Ok(Expression::and(items))
    }

    fn unary(&mut self) -> Result<Expression> {
        match self.peek().cloned() {
            Some(Tok::Not) => {
                self.at += 1;
                Ok(Expression::not(self.unary()?))
            }
            Some(Tok::LParen) => {
                self.at += 1;
                let inner = self.disjunction()?;
                if self.peek() != Some(&Tok::RParen) {
                    return self.error("expected `)`");
                }
                self.at += 1;
                Ok(inner)
            }
            Some(Tok::Ident(name)) => {
                self.at += 1;
                Ok(Expression::Var(name))
            }
            Some(_) => self.error("expected a variable, `(` or a negation"),
            None => self.error("unexpected end of input"),
        }
    }
}

/// Parses `¬ ~ !` (negation), `∧ &` (and), `∨ |` (or) and parentheses.
///
/// Conjunction binds tighter than disjunction. Positions in errors are byte offsets.
pub fn parse(text: &str) -> Result<Expression> {
    let toks = lex(text)?;
    let mut p = Parser {
        toks,
        at: 0,
        end: text.len(),
    };
    let e = p.disjunction()?;
    if p.at != p.toks.len() {
        return p.error("unexpected trailing input");
    }
    Ok(e)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Var {
    A,
    B,
    C,
}

impl Var {
    pub const ALL: [Var; 3] = [Var::A, Var::B, Var::C];

    /// Qubit (and bit position) holding this variable.
    pub fn index(self) -> usize {
        self as usize
    }

    pub fn name(self) -> &'static str {
        ["A", "B", "C"][self.index()]
    }

    pub fn from_name(name: &str) -> Option<Var> {
        match name {
            "A" => Some(Var::A),
            "B" => Some(Var::B),
            "C" => Some(Var::C),
            _ => None,
        }
    }
}

impl fmt::Display for Var {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Literal {
    pub var: Var,
    pub negated: bool,
}

impl Literal {
    pub fn pos(var: Var) -> Literal {
        Literal {
            var,
            negated: false,
        }
    }

    pub fn neg(var: Var) -> Literal {
        Literal { var, negated: true }
    }

    pub fn value(self, bits: u64) -> bool {
        ((bits >> self.var.index()) & 1 == 1) != self.negated
    }

    pub fn to_expression(self) -> Expression {
        let v = Expression::var(self.var.name());
        if self.negated {
            Expression::not(v)
        } else {
            v
        }
    }
}

/// Two-literal disjunction over distinct variables.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Clause(pub [Literal; 2]);

impl Clause {
    pub fn new(a: Literal, b: Literal) -> Result<Clause> {
        if a.var == b.var {
            return Err(ExprError::RepeatedVariable {
                clause: 1,
                var: a.var,
            });
        }
        Ok(Clause([a, b]))
    }

    pub fn literals(&self) -> &[Literal; 2] {
        &self.0
    }

    pub fn value(&self, bits: u64) -> bool {
        self.0[0].value(bits) || self.0[1].value(bits)
    }

    pub fn to_expression(&self) -> Expression {
        Expression::Or(self.0.iter().map(|l| l.to_expression()).collect())
    }
}

/// Conjunction of exactly three two-literal clauses over A, B, C.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub struct Cnf3Expression {
    pub clauses: [Clause; 3],
}

impl Cnf3Expression {
    pub fn new(clauses: [Clause; 3]) -> Result<Cnf3Expression> {
        for (i, c) in clauses.iter().enumerate() {
            if c.0[0].var == c.0[1].var {
                return Err(ExprError::RepeatedVariable {
                    clause: i + 1,
                    var: c.0[0].var,
                });
            }
        }
        Ok(Cnf3Expression { clauses })
    }

    pub fn value(&self, bits: u64) -> bool {
        self.clauses.iter().all(|c| c.value(bits))
    }

    /// Satisfying assignments of (A, B, C) as 3-bit integers, A in bit 0.
    pub fn satisfying_set(&self) -> Vec<u64> {
        (0..8).filter(|&b| self.value(b)).collect()
    }

    pub fn to_expression(&self) -> Expression {
        Expression::And(self.clauses.iter().map(|c| c.to_expression()).collect())
    }
}

impl fmt::Display for Cnf3Expression {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.to_expression())
    }
}

impl FromStr for Cnf3Expression {
    type Err = ExprError;

    fn from_str(s: &str) -> Result<Self> {
        to_cnf3(&parse(s)?)
    }
}

impl TryFrom<String> for Cnf3Expression {
    type Error = ExprError;

    fn try_from(s: String) -> Result<Self> {
        s.parse()
    }
}

impl From<Cnf3Expression> for String {
    fn from(e: Cnf3Expression) -> String {
        e.to_string()
    }
}

fn literal_of(e: &Expression, clause: usize) -> Result<Literal> {
    let (name, negated) = match e {
        Expression::Var(v) => (v, false),
        Expression::Not(inner) => match inner.as_ref() {
            Expression::Var(v) => (v, true),
            _ => {
                return Err(ExprError::Shape {
                    clause,
                    msg: "negation of a compound term".into(),
                })
            }
        },
        _ => {
            return Err(ExprError::Shape {
                clause,
                msg: format!("`{e}` is not a literal"),
            })
        }
    };
    let var = Var::from_name(name).ok_or_else(|| ExprError::ForeignVariable(name.clone()))?;
    Ok(Literal { var, negated })
}

/// Validates the three-clause, two-literal shape over A, B, C and keeps literal order.
pub fn to_cnf3(expr: &Expression) -> Result<Cnf3Expression> {
    let expr = expr.canonical();
    let clauses = match &expr {
        Expression::And(cs) => cs.clone(),
        _ => return Err(ExprError::NotConjunction),
    };
    if clauses.len() != 3 {
        return Err(ExprError::ClauseCount(clauses.len()));
    }
    let mut out = Vec::with_capacity(3);
    for (i, c) in clauses.iter().enumerate() {
        let n = i + 1;
        let lits = match c {
            Expression::Or(ls) if ls.len() == 2 => ls,
            Expression::Or(ls) => {
                return Err(ExprError::Shape {
                    clause: n,
                    msg: format!("{} terms instead of 2", ls.len()),
                })
            }
            _ => {
                return Err(ExprError::Shape {
                    clause: n,
                    msg: "not a disjunction of two terms".into(),
                })
            }
        };
        let a = literal_of(&lits[0], n)?;
        let b = literal_of(&lits[1], n)?;
        if a.var == b.var {
            return Err(ExprError::RepeatedVariable {
                clause: n,
                var: a.var,
            });
        }
        out.push(Clause([a, b]));
    }
    Cnf3Expression::new([out[0], out[1], out[2]])
}

/// Every ordered three-clause expression: 24 ordered clauses per slot, 24³ in total.
pub fn all_cnf3() -> impl Iterator<Item = Cnf3Expression> {
    let mut clauses = Vec::with_capacity(24);
    for a in Var::ALL {
        for b in Var::ALL {
            if a == b {
                continue;
            }
            for na in [false, true] {
                for nb in [false, true] {
                    clauses.push(Clause([
                        Literal {
                            var: a,
                            negated: na,
                        },
                        Literal {
                            var: b,
                            negated: nb,
                        },
                    ]));
                }
            }
        }
    }
    let c2 = clauses.clone();
    let c3 = clauses.clone();
    clauses.into_iter().flat_map(move |x| {
        let c3 = c3.clone();
        c2.clone().into_iter().flat_map(move |y| {
            c3.clone()
                .into_iter()
                .map(move |z| Cnf3Expression { clauses: [x, y, z] })
        })
    })
}
