//! Symbolic radial profiles in one variable.
//!
//! A [`ProfileExpr`] is an immutable expression tree with shared subtrees.
//! Derivatives are exact and stay in the same class; evaluation goes
//! through a [`Tape`], which flattens the tree once and removes repeated
//! subexpressions.
//!
//! ```
//! use hardy_rellich::profile::ProfileExpr;
//! let f: ProfileExpr = "r^(-1/2)".parse().unwrap();
//! let d4 = f.derivative(4);
//! let expected = (-0.5) * (-1.5) * (-2.5) * (-3.5) * 2f64.powf(-4.5);
//! assert!((d4.eval(2.0) - expected).abs() < 1e-14);
//! ```
//!
//! Grammar (`r` and `rho` name the same variable):
//!
//! ```text
//! expr   := term (('+'|'-') term)*
//! term   := factor (('*'|'/') factor)*
//! factor := '-' factor | base ('^' exponent)?
//! base   := number | 'r' | 'rho' | func '(' expr ')' | '(' expr ')'
//! exponent := signed_number | '(' constant expr ')'
//! func   := 'exp' | 'ln' | 'sinh' | 'cosh' | 'coth'
//! ```

use std::collections::HashMap;
use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Func {
    Exp,
    Ln,
    Sinh,
    Cosh,
    Coth,
}

impl Func {
    fn name(self) -> &'static str {
        match self {
            Func::Exp => "exp",
            Func::Ln => "ln",
            Func::Sinh => "sinh",
            Func::Cosh => "cosh",
            Func::Coth => "coth",
        }
    }

    fn apply(self, x: f64) -> f64 {
        match self {
            Func::Exp => x.exp(),
            Func::Ln => x.ln(),
            Func::Sinh => x.sinh(),
            Func::Cosh => x.cosh(),
            Func::Coth => 1.0 / x.tanh(),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Node {
    Const(f64),
    Var,
    Neg(ProfileExpr),
    Add(ProfileExpr, ProfileExpr),
    Sub(ProfileExpr, ProfileExpr),
    Mul(ProfileExpr, ProfileExpr),
    Div(ProfileExpr, ProfileExpr),
    Pow(ProfileExpr, f64),
    Func(Func, ProfileExpr),
}

/// Expression in the radial variable.
#[derive(Clone, PartialEq)]
pub struct ProfileExpr(Arc<Node>);

impl fmt::Debug for ProfileExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "ProfileExpr({self})")
    }
}

impl ProfileExpr {
    pub fn node(&self) -> &Node {
        &self.0
    }

    fn key(&self) -> usize {
        Arc::as_ptr(&self.0) as usize
    }

    pub fn constant(c: f64) -> Self {
        Self(Arc::new(Node::Const(if c == 0.0 { 0.0 } else { c })))
    }

    pub fn var() -> Self {
        Self(Arc::new(Node::Var))
    }

    pub fn as_const(&self) -> Option<f64> {
        match *self.0 {
            Node::Const(c) => Some(c),
            _ => None,
        }
    }

    pub fn is_const(&self, c: f64) -> bool {
        self.as_const() == Some(c)
    }

    /// Whether the variable does not occur.
    pub fn is_constant(&self) -> bool {
        match self.node() {
            Node::Const(_) => true,
            Node::Var => false,
            Node::Neg(a) | Node::Pow(a, _) | Node::Func(_, a) => a.is_constant(),
            Node::Add(a, b) | Node::Sub(a, b) | Node::Mul(a, b) | Node::Div(a, b) => a.is_constant() && b.is_constant(),
        }
    }

    pub fn neg(&self) -> Self {
        match self.node() {
            Node::Const(c) => Self::constant(-c),
            Node::Neg(a) => a.clone(),
            _ => Self(Arc::new(Node::Neg(self.clone()))),
        }
    }

    pub fn add(&self, other: &Self) -> Self {
        match (self.as_const(), other.as_const()) {
            (Some(a), Some(b)) => Self::constant(a + b),
            (Some(z), _) if z == 0.0 => other.clone(),
            (_, Some(z)) if z == 0.0 => self.clone(),
            _ => Self(Arc::new(Node::Add(self.clone(), other.clone()))),
        }
    }

    pub fn sub(&self, other: &Self) -> Self {
        match (self.as_const(), other.as_const()) {
            (Some(a), Some(b)) => Self::constant(a - b),
            (Some(z), _) if z == 0.0 => other.neg(),
            (_, Some(z)) if z == 0.0 => self.clone(),
            _ => Self(Arc::new(Node::Sub(self.clone(), other.clone()))),
        }
    }

    pub fn mul(&self, other: &Self) -> Self {
        match (self.as_const(), other.as_const()) {
            (Some(a), Some(b)) => Self::constant(a * b),
            (Some(z), _) | (_, Some(z)) if z == 0.0 => Self::constant(0.0),
            (Some(o), _) if o == 1.0 => other.clone(),
            (_, Some(o)) if o == 1.0 => self.clone(),
            (Some(m), _) if m == -1.0 => other.neg(),
            (_, Some(m)) if m == -1.0 => self.neg(),
            _ => Self(Arc::new(Node::Mul(self.clone(), other.clone()))),
        }
    }

    /// Quotient; a zero numerator folds to zero, a constant zero
    /// denominator is kept and evaluates to a non-finite value.
    pub fn div(&self, other: &Self) -> Self {
        match (self.as_const(), other.as_const()) {
            (Some(z), _) if z == 0.0 => Self::constant(0.0),
            (Some(a), Some(b)) if b != 0.0 => Self::constant(a / b),
            (_, Some(o)) if o == 1.0 => self.clone(),
            _ => Self(Arc::new(Node::Div(self.clone(), other.clone()))),
        }
    }

    pub fn powf(&self, p: f64) -> Self {
        if p == 0.0 {
            return Self::constant(1.0);
        }
        if p == 1.0 {
            return self.clone();
        }
        match self.node() {
            Node::Const(c) => Self::constant(c.powf(p)),
            Node::Pow(a, q) if p.fract() == 0.0 && q.fract() == 0.0 => a.powf(p * q),
            _ => Self(Arc::new(Node::Pow(self.clone(), p))),
        }
    }

    pub fn apply(&self, func: Func) -> Self {
        match self.as_const() {
            Some(c) => Self::constant(func.apply(c)),
            None => Self(Arc::new(Node::Func(func, self.clone()))),
        }
    }

    pub fn scale(&self, c: f64) -> Self {
        Self::constant(c).mul(self)
    }

    /// `r^p`.
    pub fn power(p: f64) -> Self {
        Self::var().powf(p)
    }

    /// `((r-a)(b-r))^k`, meant to be evaluated on `[a, b]` only.
    pub fn polybump(a: f64, b: f64, k: u32) -> Self {
        let r = Self::var();
        r.sub(&Self::constant(a)).mul(&Self::constant(b).sub(&r)).powf(f64::from(k))
    }

    /// Derivative of order `order`.
    pub fn derivative(&self, order: u32) -> Self {
        (0..order).fold(self.clone(), |e, _| e.d1(&mut HashMap::new()))
    }

    fn d1(&self, memo: &mut HashMap<usize, ProfileExpr>) -> Self {
        if let Some(d) = memo.get(&self.key()) {
            return d.clone();
        }
        let d = match self.node() {
            Node::Const(_) => Self::constant(0.0),
            Node::Var => Self::constant(1.0),
            Node::Neg(a) => a.d1(memo).neg(),
            Node::Add(a, b) => a.d1(memo).add(&b.d1(memo)),
            Node::Sub(a, b) => a.d1(memo).sub(&b.d1(memo)),
            Node::Mul(a, b) => a.d1(memo).mul(b).add(&a.mul(&b.d1(memo))),
            Node::Div(a, b) => {
                // (a' b - a b') / b²
                let num = a.d1(memo).mul(b).sub(&a.mul(&b.d1(memo)));
                num.div(&b.powf(2.0))
            }
            Node::Pow(a, p) => Self::constant(*p).mul(&a.powf(p - 1.0)).mul(&a.d1(memo)),
            Node::Func(func, a) => {
                let outer = match func {
                    Func::Exp => self.clone(),
                    Func::Ln => Self::constant(1.0).div(a),
                    Func::Sinh => a.apply(Func::Cosh),
                    Func::Cosh => a.apply(Func::Sinh),
                    Func::Coth => Self::constant(1.0).sub(&self.powf(2.0)),
                };
                outer.mul(&a.d1(memo))
            }
        };
        memo.insert(self.key(), d.clone());
        d
    }

    /// Pointwise value; compiles a tape each call, so prefer [`Tape`] in loops.
    pub fn eval(&self, t: f64) -> f64 {
        Tape::new(self).eval(t)
    }

    /// Number of distinct subexpressions.
    pub fn size(&self) -> usize {
        Tape::new(self).len()
    }
}

impl From<f64> for ProfileExpr {
    fn from(c: f64) -> Self {
        Self::constant(c)
    }
}

// printing: precedence levels 1 (+,-), 2 (*,/), 3 (unary -), 4 (^), 5 (atoms)
fn prec(e: &ProfileExpr) -> u8 {
    match e.node() {
        Node::Add(..) | Node::Sub(..) => 1,
        Node::Mul(..) | Node::Div(..) => 2,
        Node::Neg(_) => 3,
        Node::Pow(..) => 4,
        Node::Const(c) if *c < 0.0 => 3,
        Node::Const(_) | Node::Var | Node::Func(..) => 5,
    }
}

fn write_at(f: &mut fmt::Formatter<'_>, e: &ProfileExpr, min: u8) -> fmt::Result {
    if prec(e) < min {
        write!(f, "({e})")
    } else {
        write!(f, "{e}")
    }
}

fn write_number(f: &mut fmt::Formatter<'_>, c: f64) -> fmt::Result {
    if c.fract() == 0.0 && c.abs() < 1e15 {
        write!(f, "{}", c as i64)
    } else {
        write!(f, "{c:?}")
    }
}

impl fmt::Display for ProfileExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.node() {
            Node::Const(c) => write_number(f, *c),
            Node::Var => f.write_str("r"),
            Node::Neg(a) => write!(f, "-({a})"),
            Node::Add(a, b) | Node::Sub(a, b) => {
                write_at(f, a, 1)?;
                f.write_str(if matches!(self.node(), Node::Add(..)) { " + " } else { " - " })?;
                write_at(f, b, 2)
            }
            Node::Mul(a, b) | Node::Div(a, b) => {
                write_at(f, a, 2)?;
                f.write_str(if matches!(self.node(), Node::Mul(..)) { "*" } else { "/" })?;
                write_at(f, b, 3)
            }
            Node::Pow(a, p) => {
                // a negative constant base would read as a signed number
                if matches!(a.node(), Node::Const(c) if *c < 0.0) || prec(a) < 5 {
                    write!(f, "({a})")?;
                } else {
                    write!(f, "{a}")?;
                }
                f.write_str("^")?;
                write_number(f, *p)
            }
            Node::Func(func, a) => write!(f, "{}({a})", func.name()),
        }
    }
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum ParseError {
    #[error("syntax error at offset {offset}: expected {expected}")]
    Syntax { offset: usize, expected: &'static str },
    #[error("unknown identifier `{name}` at offset {offset}")]
    UnknownIdentifier { offset: usize, name: String },
    #[error("exponent at offset {offset} must not depend on r")]
    NonConstantExponent { offset: usize },
}

impl ParseError {
    pub fn offset(&self) -> usize {
        match self {
            Self::Syntax { offset, .. } | Self::UnknownIdentifier { offset, .. } | Self::NonConstantExponent { offset } => *offset,
        }
    }
}

struct Parser<'a> {
    src: &'a [u8],
    pos: usize,
}

impl<'a> Parser<'a> {
    fn skip_ws(&mut self) {
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
    }

    fn peek(&mut self) -> Option<u8> {
        self.skip_ws();
        self.src.get(self.pos).copied()
    }

    fn eat(&mut self, c: u8) -> bool {
        if self.peek() == Some(c) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn expect(&mut self, c: u8, what: &'static str) -> Result<(), ParseError> {
        if self.eat(c) {
            Ok(())
        } else {
            Err(self.syntax(what))
        }
    }

    fn syntax(&mut self, expected: &'static str) -> ParseError {
        self.skip_ws();
        ParseError::Syntax { offset: self.pos, expected }
    }

    fn expr(&mut self) -> Result<ProfileExpr, ParseError> {
        let mut lhs = self.term()?;
        loop {
            if self.eat(b'+') {
                lhs = ProfileExpr(Arc::new(Node::Add(lhs, self.term()?)));
            } else if self.eat(b'-') {
                lhs = ProfileExpr(Arc::new(Node::Sub(lhs, self.term()?)));
            } else {
                return Ok(lhs);
            }
        }
    }

    fn term(&mut self) -> Result<ProfileExpr, ParseError> {
        let mut lhs = self.factor()?;
        loop {
            if self.eat(b'*') {
                lhs = ProfileExpr(Arc::new(Node::Mul(lhs, self.factor()?)));
            } else if self.eat(b'/') {
                lhs = ProfileExpr(Arc::new(Node::Div(lhs, self.factor()?)));
            } else {
                return Ok(lhs);
            }
        }
    }

    fn factor(&mut self) -> Result<ProfileExpr, ParseError> {
        if self.peek() == Some(b'-') && !self.src.get(self.pos + 1).is_some_and(|c| c.is_ascii_digit() || *c == b'.') {
            self.pos += 1;
            return Ok(ProfileExpr(Arc::new(Node::Neg(self.factor()?))));
        }
        let base = self.base()?;
        if self.eat(b'^') {
            let p = self.exponent()?;
            return Ok(ProfileExpr(Arc::new(Node::Pow(base, p))));
        }
        Ok(base)
    }

    fn exponent(&mut self) -> Result<f64, ParseError> {
        match self.peek() {
            Some(b'(') => {
                self.pos += 1;
                let start = self.pos;
                let e = self.expr()?;
                self.expect(b')', "`)`")?;
                if !e.is_constant() {
                    return Err(ParseError::NonConstantExponent { offset: start });
                }
                Ok(e.eval(0.0))
            }
            _ => self.number().ok_or_else(|| self.syntax("exponent")),
        }
    }

    fn number(&mut self) -> Option<f64> {
        self.skip_ws();
        let start = self.pos;
        let mut end = start;
        let s = self.src;
        if end < s.len() && (s[end] == b'-' || s[end] == b'+') {
            end += 1;
        }
        let digits_from = end;
        while end < s.len() && (s[end].is_ascii_digit() || s[end] == b'.') {
            end += 1;
        }
        if end == digits_from {
            return None;
        }
        if end < s.len() && (s[end] == b'e' || s[end] == b'E') {
            let mut e = end + 1;
            if e < s.len() && (s[e] == b'-' || s[e] == b'+') {
                e += 1;
            }
            if e < s.len() && s[e].is_ascii_digit() {
                while e < s.len() && s[e].is_ascii_digit() {
                    e += 1;
                }
                end = e;
            }
        }
        let v = std::str::from_utf8(&s[start..end]).ok()?.parse().ok()?;
        self.pos = end;
        Some(v)
    }

    fn base(&mut self) -> Result<ProfileExpr, ParseError> {
        match self.peek() {
            Some(b'(') => {
                self.pos += 1;
                let e = self.expr()?;
                self.expect(b')', "`)`")?;
                Ok(e)
            }
            Some(c) if c.is_ascii_digit() || c == b'.' || c == b'-' || c == b'+' => {
                let v = self.number().ok_or_else(|| self.syntax("number"))?;
                Ok(ProfileExpr(Arc::new(Node::Const(v))))
            }
            Some(c) if c.is_ascii_alphabetic() => {
                let start = self.pos;
                while self.pos < self.src.len() && self.src[self.pos].is_ascii_alphanumeric() {
                    self.pos += 1;
                }
                let name = std::str::from_utf8(&self.src[start..self.pos]).expect("ascii");
                let func = match name {
                    "r" | "rho" => return Ok(ProfileExpr::var()),
                    "exp" => Func::Exp,
                    "ln" => Func::Ln,
                    "sinh" => Func::Sinh,
                    "cosh" => Func::Cosh,
                    "coth" => Func::Coth,
                    _ => return Err(ParseError::UnknownIdentifier { offset: start, name: name.to_owned() }),
                };
                self.expect(b'(', "`(`")?;
                let arg = self.expr()?;
                self.expect(b')', "`)`")?;
                Ok(ProfileExpr(Arc::new(Node::Func(func, arg))))
            }
            _ => Err(self.syntax("number, variable, function or `(`")),
        }
    }
}

/// Parses a profile expression.
pub fn parse_profile(text: &str) -> Result<ProfileExpr, ParseError> {
    let mut p = Parser { src: text.as_bytes(), pos: 0 };
    let e = p.expr()?;
    if p.peek().is_some() {
        return Err(p.syntax("operator or end of input"));
    }
    Ok(e)
}

impl FromStr for ProfileExpr {
    type Err = ParseError;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        parse_profile(s)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
enum Op {
    Const(f64),
    Var,
    Neg(usize),
    Add(usize, usize),
    Sub(usize, usize),
    Mul(usize, usize),
    Div(usize, usize),
    Pow(usize, f64),
    Func(Func, usize),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
enum OpKey {
    Const(u64),
    Var,
    Neg(usize),
    Add(usize, usize),
    Sub(usize, usize),
    Mul(usize, usize),
    Div(usize, usize),
    Pow(usize, u64),
    Func(Func, usize),
}

/// Straight-line program for one or more expressions, with structurally
/// equal subexpressions merged.
#[derive(Debug, Clone)]
pub struct Tape {
    ops: Vec<Op>,
    outputs: Vec<usize>,
}

struct TapeBuilder {
    ops: Vec<Op>,
    by_ptr: HashMap<usize, usize>,
    by_key: HashMap<OpKey, usize>,
}

impl TapeBuilder {
    fn push(&mut self, op: Op) -> usize {
        let key = match op {
            Op::Const(c) => OpKey::Const(c.to_bits()),
            Op::Var => OpKey::Var,
            Op::Neg(a) => OpKey::Neg(a),
            Op::Add(a, b) => OpKey::Add(a, b),
            Op::Sub(a, b) => OpKey::Sub(a, b),
            Op::Mul(a, b) => OpKey::Mul(a, b),
            Op::Div(a, b) => OpKey::Div(a, b),
            Op::Pow(a, p) => OpKey::Pow(a, p.to_bits()),
            Op::Func(f, a) => OpKey::Func(f, a),
        };
        *self.by_key.entry(key).or_insert_with(|| {
            self.ops.push(op);
            self.ops.len() - 1
        })
    }

    fn visit(&mut self, e: &ProfileExpr) -> usize {
        if let Some(&i) = self.by_ptr.get(&e.key()) {
            return i;
        }
        let op = match e.node() {
            Node::Const(c) => Op::Const(*c),
            Node::Var => Op::Var,
            Node::Neg(a) => Op::Neg(self.visit(a)),
            Node::Add(a, b) => Op::Add(self.visit(a), self.visit(b)),
            Node::Sub(a, b) => Op::Sub(self.visit(a), self.visit(b)),
            Node::Mul(a, b) => Op::Mul(self.visit(a), self.visit(b)),
            Node::Div(a, b) => Op::Div(self.visit(a), self.visit(b)),
            Node::Pow(a, p) => Op::Pow(self.visit(a), *p),
            Node::Func(f, a) => Op::Func(*f, self.visit(a)),
        };
        let i = self.push(op);
        self.by_ptr.insert(e.key(), i);
        i
    }
}

impl Tape {
    pub fn new(e: &ProfileExpr) -> Self {
        Self::many(std::slice::from_ref(e))
    }

    /// One tape for several expressions; shared parts are evaluated once.
    pub fn many(exprs: &[ProfileExpr]) -> Self {
        let mut b = TapeBuilder { ops: Vec::new(), by_ptr: HashMap::new(), by_key: HashMap::new() };
        let outputs = exprs.iter().map(|e| b.visit(e)).collect();
        Self { ops: b.ops, outputs }
    }

    pub fn len(&self) -> usize {
        self.ops.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ops.is_empty()
    }

    /// Values of all outputs at `t`, written into `out`.
    pub fn eval_into(&self, t: f64, scratch: &mut Vec<f64>, out: &mut [f64]) {
        scratch.clear();
        for op in &self.ops {
            let v = match *op {
                Op::Const(c) => c,
                Op::Var => t,
                Op::Neg(a) => -scratch[a],
                Op::Add(a, b) => scratch[a] + scratch[b],
                Op::Sub(a, b) => scratch[a] - scratch[b],
                Op::Mul(a, b) => scratch[a] * scratch[b],
                Op::Div(a, b) => scratch[a] / scratch[b],
                Op::Pow(a, p) => pow(scratch[a], p),
                Op::Func(f, a) => f.apply(scratch[a]),
            };
            scratch.push(v);
        }
        for (o, &i) in out.iter_mut().zip(&self.outputs) {
            *o = scratch[i];
        }
    }

    /// Value of the first output.
    pub fn eval(&self, t: f64) -> f64 {
        let mut out = [0.0];
        self.eval_into(t, &mut Vec::with_capacity(self.ops.len()), &mut out);
        out[0]
    }
}

fn pow(x: f64, p: f64) -> f64 {
    if p.fract() == 0.0 && p.abs() <= 64.0 {
        x.powi(p as i32)
    } else {
        x.powf(p)
    }
}

/// A profile together with a compact support `[a, b] ⊂ (0, ∞)`; the
/// expression is only ever evaluated inside the support.
#[derive(Debug, Clone, PartialEq)]
pub struct CompactProfile {
    pub expr: ProfileExpr,
    pub a: f64,
    pub b: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, thiserror::Error)]
#[error("support [{a}, {b}] is not a compact interval of (0, inf)")]
pub struct SupportError {
    pub a: f64,
    pub b: f64,
}

impl CompactProfile {
    pub fn new(expr: ProfileExpr, a: f64, b: f64) -> Result<Self, SupportError> {
        if !(a > 0.0 && a < b && b.is_finite()) {
            return Err(SupportError { a, b });
        }
        Ok(Self { expr, a, b })
    }

    /// `((r-a)(b-r))^k` on `[a, b]`.
    pub fn bump(a: f64, b: f64, k: u32) -> Result<Self, SupportError> {
        Self::new(ProfileExpr::polybump(a, b, k), a, b)
    }

    /// The same profile as a [`crate::families::TestFunction`].
    pub fn from_test_function(t: &crate::families::TestFunction) -> Result<Self, SupportError> {
        let mut e = ProfileExpr::polybump(t.a, t.b, t.k);
        if !t.multiplier.is_empty() {
            let r = ProfileExpr::var();
            let poly = t
                .multiplier
                .iter()
                .rev()
                .fold(ProfileExpr::constant(0.0), |acc, &c| acc.mul(&r).add(&ProfileExpr::constant(c)));
            e = e.mul(&poly);
        }
        if t.power != 0.0 {
            e = e.mul(&ProfileExpr::power(t.power));
        }
        Self::new(e, t.a, t.b)
    }

    pub fn scale(&self, c: f64) -> Self {
        Self { expr: self.expr.scale(c), ..self.clone() }
    }
}
