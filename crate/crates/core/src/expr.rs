//! Scalar expressions in ambient coordinates: parsing, evaluation, and exact
//! symbolic differentiation.
//!
//! This is the input language for expression vector fields and for conserved
//! quantities. The grammar has the usual precedence order (`^`, then unary
//! `-`, then `*` `/`, then `+` `-`), is left-associative, and allows
//! parentheses; `^` takes an integer literal exponent so differentiation
//! stays exact. Variables are `x1..xn`, with `x, y, z, w` accepted as
//! aliases when the dimension is at most 4. Supported functions: `sin`,
//! `cos`, `exp`.
//!
//! Expressions are immutable after construction and safe to evaluate from
//! concurrent callers. There is no simplifier beyond constant folding;
//! expression equality is a matter of evaluation, not structure.

use std::fmt;

use thiserror::Error;

/// Error produced while parsing an expression, with the byte offset of the
/// offending input.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("parse error at byte {offset}: {message}")]
pub struct ParseError {
    pub offset: usize,
    pub message: String,
}

/// Error produced while evaluating an expression.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum EvalError {
    /// A division (or a negative power of zero) hit a zero denominator.
    #[error("division by zero")]
    DivisionByZero,
    #[error("point has dimension {got}, expression expects {expected}")]
    DimensionMismatch { expected: usize, got: usize },
}

#[derive(Debug, Clone, PartialEq)]
enum Node {
    Const(f64),
    Var(usize),
    Neg(Box<Node>),
    Add(Box<Node>, Box<Node>),
    Sub(Box<Node>, Box<Node>),
    Mul(Box<Node>, Box<Node>),
    Div(Box<Node>, Box<Node>),
    Pow(Box<Node>, i32),
    Sin(Box<Node>),
    Cos(Box<Node>),
    Exp(Box<Node>),
}

/// A scalar expression over the coordinates of `R^dim`.
#[derive(Debug, Clone, PartialEq)]
pub struct Expression {
    dim: usize,
    root: Node,
}

// Smart constructors with constant folding. Literal-only subtrees collapse to
// constants; the obvious unit/zero identities keep derivatives readable.
// `x/0` is deliberately left unfolded so evaluation reports the error, and a
// fold that would overflow to a non-finite value (which the grammar has no
// literal for) is left unfolded too.

fn fold_or(value: f64, unfolded: impl FnOnce() -> Node) -> Node {
    if value.is_finite() {
        Node::Const(value)
    } else {
        unfolded()
    }
}

fn nadd(a: Node, b: Node) -> Node {
    match (a, b) {
        (Node::Const(x), Node::Const(y)) => fold_or(x + y, || {
            Node::Add(Node::Const(x).into(), Node::Const(y).into())
        }),
        (Node::Const(0.0), e) | (e, Node::Const(0.0)) => e,
        (a, b) => Node::Add(a.into(), b.into()),
    }
}

fn nsub(a: Node, b: Node) -> Node {
    match (a, b) {
        (Node::Const(x), Node::Const(y)) => fold_or(x - y, || {
            Node::Sub(Node::Const(x).into(), Node::Const(y).into())
        }),
        (e, Node::Const(0.0)) => e,
        (Node::Const(0.0), e) => nneg(e),
        (a, b) => Node::Sub(a.into(), b.into()),
    }
}

fn nmul(a: Node, b: Node) -> Node {
    match (a, b) {
        (Node::Const(x), Node::Const(y)) => fold_or(x * y, || {
            Node::Mul(Node::Const(x).into(), Node::Const(y).into())
        }),
        (Node::Const(0.0), _) | (_, Node::Const(0.0)) => Node::Const(0.0),
        (Node::Const(1.0), e) | (e, Node::Const(1.0)) => e,
        (a, b) => Node::Mul(a.into(), b.into()),
    }
}

fn ndiv(a: Node, b: Node) -> Node {
    match (a, b) {
        (Node::Const(x), Node::Const(y)) if y != 0.0 => fold_or(x / y, || {
            Node::Div(Node::Const(x).into(), Node::Const(y).into())
        }),
        (e, Node::Const(1.0)) => e,
        (a, b) => Node::Div(a.into(), b.into()),
    }
}

fn nneg(a: Node) -> Node {
    match a {
        Node::Const(x) => Node::Const(-x),
        Node::Neg(e) => *e,
        a => Node::Neg(a.into()),
    }
}

fn npow(a: Node, k: i32) -> Node {
    match (a, k) {
        (Node::Const(x), k) if k >= 0 || x != 0.0 => {
            fold_or(x.powi(k), || Node::Pow(Node::Const(x).into(), k))
        }
        (_, 0) => Node::Const(1.0),
        (a, 1) => a,
        (a, k) => Node::Pow(a.into(), k),
    }
}

fn nsin(a: Node) -> Node {
    match a {
        Node::Const(x) => Node::Const(x.sin()),
        a => Node::Sin(a.into()),
    }
}

fn ncos(a: Node) -> Node {
    match a {
        Node::Const(x) => Node::Const(x.cos()),
        a => Node::Cos(a.into()),
    }
}

fn nexp(a: Node) -> Node {
    match a {
        Node::Const(x) => fold_or(x.exp(), || Node::Exp(Node::Const(x).into())),
        a => Node::Exp(a.into()),
    }
}

fn eval_node(node: &Node, p: &[f64]) -> Result<f64, EvalError> {
    match node {
        Node::Const(c) => Ok(*c),
        Node::Var(i) => Ok(p[*i]),
        Node::Neg(e) => Ok(-eval_node(e, p)?),
        Node::Add(a, b) => Ok(eval_node(a, p)? + eval_node(b, p)?),
        Node::Sub(a, b) => Ok(eval_node(a, p)? - eval_node(b, p)?),
        Node::Mul(a, b) => Ok(eval_node(a, p)? * eval_node(b, p)?),
        Node::Div(a, b) => {
            let denom = eval_node(b, p)?;
            if denom == 0.0 {
                return Err(EvalError::DivisionByZero);
            }
            Ok(eval_node(a, p)? / denom)
        }
        Node::Pow(e, k) => {
            let base = eval_node(e, p)?;
            if *k < 0 && base == 0.0 {
                return Err(EvalError::DivisionByZero);
            }
            Ok(base.powi(*k))
        }
        Node::Sin(e) => Ok(eval_node(e, p)?.sin()),
        Node::Cos(e) => Ok(eval_node(e, p)?.cos()),
        Node::Exp(e) => Ok(eval_node(e, p)?.exp()),
    }
}

fn diff_node(node: &Node, var: usize) -> Node {
    match node {
        Node::Const(_) => Node::Const(0.0),
        Node::Var(i) => Node::Const(if *i == var { 1.0 } else { 0.0 }),
        Node::Neg(e) => nneg(diff_node(e, var)),
        Node::Add(a, b) => nadd(diff_node(a, var), diff_node(b, var)),
        Node::Sub(a, b) => nsub(diff_node(a, var), diff_node(b, var)),
        Node::Mul(a, b) => nadd(
            nmul(diff_node(a, var), (**b).clone()),
            nmul((**a).clone(), diff_node(b, var)),
        ),
        Node::Div(a, b) => ndiv(
            nsub(
                nmul(diff_node(a, var), (**b).clone()),
                nmul((**a).clone(), diff_node(b, var)),
            ),
            npow((**b).clone(), 2),
        ),
        Node::Pow(e, k) => nmul(
            nmul(Node::Const(f64::from(*k)), npow((**e).clone(), k - 1)),
            diff_node(e, var),
        ),
        Node::Sin(e) => nmul(ncos((**e).clone()), diff_node(e, var)),
        Node::Cos(e) => nneg(nmul(nsin((**e).clone()), diff_node(e, var))),
        Node::Exp(e) => nmul(nexp((**e).clone()), diff_node(e, var)),
    }
}

impl Expression {
    /// Parse `text` as an expression over the coordinates of `R^dim`.
    pub fn parse(text: &str, dim: usize) -> Result<Expression, ParseError> {
        if dim == 0 {
            return Err(ParseError {
                offset: 0,
                message: "dimension must be at least 1".into(),
            });
        }
        let mut parser = Parser {
            src: text.as_bytes(),
            pos: 0,
            dim,
        };
        parser.skip_ws();
        if parser.at_end() {
            return Err(ParseError {
                offset: parser.pos,
                message: "empty expression".into(),
            });
        }
        let root = parser.expr()?;
        parser.skip_ws();
        if !parser.at_end() {
            return Err(parser.err("unexpected trailing input"));
        }
        Ok(Expression { dim, root })
    }

    /// The literal constant `value` as an expression on `R^dim`.
    pub fn constant(dim: usize, value: f64) -> Expression {
        assert!(dim >= 1);
        Expression {
            dim,
            root: Node::Const(value),
        }
    }

    /// The coordinate function `x_{index+1}` on `R^dim` (`index` is 0-based).
    pub fn var(dim: usize, index: usize) -> Expression {
        assert!(
            index < dim,
            "variable index {index} out of range for dimension {dim}"
        );
        Expression {
            dim,
            root: Node::Var(index),
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Evaluate at `p` in IEEE double precision. Division by zero is
    /// reported explicitly, never as a silent non-finite value.
    pub fn eval(&self, p: &[f64]) -> Result<f64, EvalError> {
        if p.len() != self.dim {
            return Err(EvalError::DimensionMismatch {
                expected: self.dim,
                got: p.len(),
            });
        }
        eval_node(&self.root, p)
    }

    /// Exact symbolic partial derivative with respect to variable `var`
    /// (0-based). Only literal subtrees are folded; no other simplification
    /// is guaranteed.
    pub fn differentiate(&self, var: usize) -> Expression {
        assert!(
            var < self.dim,
            "variable index {var} out of range for dimension {}",
            self.dim
        );
        Expression {
            dim: self.dim,
            root: diff_node(&self.root, var),
        }
    }

    pub fn pow(self, exponent: i32) -> Expression {
        Expression {
            dim: self.dim,
            root: npow(self.root, exponent),
        }
    }

    pub fn sin(self) -> Expression {
        Expression {
            dim: self.dim,
            root: nsin(self.root),
        }
    }

    pub fn cos(self) -> Expression {
        Expression {
            dim: self.dim,
            root: ncos(self.root),
        }
    }

    pub fn exp(self) -> Expression {
        Expression {
            dim: self.dim,
            root: nexp(self.root),
        }
    }

    fn combine(self, rhs: Expression, op: fn(Node, Node) -> Node) -> Expression {
        assert_eq!(self.dim, rhs.dim, "expression dimensions differ");
        Expression {
            dim: self.dim,
            root: op(self.root, rhs.root),
        }
    }
}

impl std::ops::Add for Expression {
    type Output = Expression;

    fn add(self, rhs: Expression) -> Expression {
        self.combine(rhs, nadd)
    }
}

impl std::ops::Sub for Expression {
    type Output = Expression;

    fn sub(self, rhs: Expression) -> Expression {
        self.combine(rhs, nsub)
    }
}

impl std::ops::Mul for Expression {
    type Output = Expression;

    fn mul(self, rhs: Expression) -> Expression {
        self.combine(rhs, nmul)
    }
}

impl std::ops::Div for Expression {
    type Output = Expression;

    fn div(self, rhs: Expression) -> Expression {
        self.combine(rhs, ndiv)
    }
}

impl std::ops::Neg for Expression {
    type Output = Expression;

    fn neg(self) -> Expression {
        Expression {
            dim: self.dim,
            root: nneg(self.root),
        }
    }
}

// Precedence levels used both by the parser and the printer.
const PREC_ADD: u8 = 1;
const PREC_MUL: u8 = 2;
const PREC_NEG: u8 = 3;
const PREC_POW: u8 = 4;
const PREC_ATOM: u8 = 5;

fn node_prec(node: &Node) -> u8 {
    match node {
        Node::Add(..) | Node::Sub(..) => PREC_ADD,
        Node::Mul(..) | Node::Div(..) => PREC_MUL,
        Node::Neg(..) => PREC_NEG,
        Node::Pow(..) => PREC_POW,
        Node::Const(c) if *c < 0.0 => PREC_NEG,
        _ => PREC_ATOM,
    }
}

fn write_node(f: &mut fmt::Formatter<'_>, node: &Node, min_prec: u8) -> fmt::Result {
    let prec = node_prec(node);
    let parens = prec < min_prec;
    if parens {
        write!(f, "(")?;
    }
    match node {
        Node::Const(c) => write!(f, "{c}")?,
        Node::Var(i) => write!(f, "x{}", i + 1)?,
        Node::Neg(e) => {
            write!(f, "-")?;
            write_node(f, e, PREC_NEG)?;
        }
        Node::Add(a, b) => {
            write_node(f, a, PREC_ADD)?;
            write!(f, " + ")?;
            write_node(f, b, PREC_ADD + 1)?;
        }
        Node::Sub(a, b) => {
            write_node(f, a, PREC_ADD)?;
            write!(f, " - ")?;
            write_node(f, b, PREC_ADD + 1)?;
        }
        Node::Mul(a, b) => {
            write_node(f, a, PREC_MUL)?;
            write!(f, "*")?;
            write_node(f, b, PREC_MUL + 1)?;
        }
        Node::Div(a, b) => {
            write_node(f, a, PREC_MUL)?;
            write!(f, "/")?;
            write_node(f, b, PREC_MUL + 1)?;
        }
        Node::Pow(e, k) => {
            write_node(f, e, PREC_ATOM)?;
            write!(f, "^{k}")?;
        }
        Node::Sin(e) => {
            write!(f, "sin(")?;
            write_node(f, e, 0)?;
            write!(f, ")")?;
        }
        Node::Cos(e) => {
            write!(f, "cos(")?;
            write_node(f, e, 0)?;
            write!(f, ")")?;
        }
        Node::Exp(e) => {
            write!(f, "exp(")?;
            write_node(f, e, 0)?;
            write!(f, ")")?;
        }
    }
    if parens {
        write!(f, ")")?;
    }
    Ok(())
}

impl fmt::Display for Expression {
    /// Prints a form that re-parses to an expression with identical values.
    /// Variables always print positionally (`x1`, `x2`, ...).
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write_node(f, &self.root, 0)
    }
}

struct Parser<'a> {
    src: &'a [u8],
    pos: usize,
    dim: usize,
}

impl<'a> Parser<'a> {
    fn err(&self, message: impl Into<String>) -> ParseError {
        ParseError {
            offset: self.pos,
            message: message.into(),
        }
    }

    fn at_end(&self) -> bool {
        self.pos >= self.src.len()
    }

    fn peek(&self) -> Option<u8> {
        self.src.get(self.pos).copied()
    }

    fn skip_ws(&mut self) {
        while matches!(self.peek(), Some(b) if b.is_ascii_whitespace()) {
            self.pos += 1;
        }
    }

    fn expr(&mut self) -> Result<Node, ParseError> {
        let mut lhs = self.term()?;
        loop {
            self.skip_ws();
            match self.peek() {
                Some(b'+') => {
                    self.pos += 1;
                    lhs = nadd(lhs, self.term()?);
                }
                Some(b'-') => {
                    self.pos += 1;
                    lhs = nsub(lhs, self.term()?);
                }
                _ => return Ok(lhs),
            }
        }
    }

    fn term(&mut self) -> Result<Node, ParseError> {
        let mut lhs = self.unary()?;
        loop {
            self.skip_ws();
            match self.peek() {
                Some(b'*') => {
                    self.pos += 1;
                    lhs = nmul(lhs, self.unary()?);
                }
                Some(b'/') => {
                    self.pos += 1;
                    lhs = ndiv(lhs, self.unary()?);
                }
                _ => return Ok(lhs),
            }
        }
    }

    fn unary(&mut self) -> Result<Node, ParseError> {
        self.skip_ws();
        if self.peek() == Some(b'-') {
            self.pos += 1;
            return Ok(nneg(self.unary()?));
        }
        self.power()
    }

    fn power(&mut self) -> Result<Node, ParseError> {
        let mut base = self.atom()?;
        loop {
            self.skip_ws();
            if self.peek() == Some(b'^') {
                self.pos += 1;
                base = npow(base, self.integer()?);
            } else {
                return Ok(base);
            }
        }
    }

    fn integer(&mut self) -> Result<i32, ParseError> {
        self.skip_ws();
        let start = self.pos;
        if matches!(self.peek(), Some(b'+') | Some(b'-')) {
            self.pos += 1;
        }
        let digits = self.pos;
        while matches!(self.peek(), Some(b) if b.is_ascii_digit()) {
            self.pos += 1;
        }
        if self.pos == digits {
            self.pos = start;
            return Err(self.err("expected integer exponent after `^`"));
        }
        let text = std::str::from_utf8(&self.src[start..self.pos]).unwrap();
        text.parse::<i32>().map_err(|_| ParseError {
            offset: start,
            message: format!("exponent `{text}` out of range"),
        })
    }

    fn atom(&mut self) -> Result<Node, ParseError> {
        self.skip_ws();
        match self.peek() {
            Some(b'(') => {
                self.pos += 1;
                let inner = self.expr()?;
                self.skip_ws();
                if self.peek() != Some(b')') {
                    return Err(self.err("expected `)`"));
                }
                self.pos += 1;
                Ok(inner)
            }
            Some(b) if b.is_ascii_digit() || b == b'.' => self.number(),
            Some(b) if b.is_ascii_alphabetic() || b == b'_' => self.ident(),
            Some(b) => Err(self.err(format!("unexpected character `{}`", b as char))),
            None => Err(self.err("unexpected end of input")),
        }
    }

    fn number(&mut self) -> Result<Node, ParseError> {
        let start = self.pos;
        while matches!(self.peek(), Some(b) if b.is_ascii_digit()) {
            self.pos += 1;
        }
        if self.peek() == Some(b'.') {
            self.pos += 1;
            while matches!(self.peek(), Some(b) if b.is_ascii_digit()) {
                self.pos += 1;
            }
        }
        // Exponent part only when digits actually follow, so `2exp(x)` fails
        // cleanly at the identifier instead of eating the `e`.
        if matches!(self.peek(), Some(b'e') | Some(b'E')) {
            let mut probe = self.pos + 1;
            if matches!(self.src.get(probe), Some(b'+') | Some(b'-')) {
                probe += 1;
            }
            if matches!(self.src.get(probe), Some(b) if b.is_ascii_digit()) {
                self.pos = probe;
                while matches!(self.peek(), Some(b) if b.is_ascii_digit()) {
                    self.pos += 1;
                }
            }
        }
        let text = std::str::from_utf8(&self.src[start..self.pos]).unwrap();
        match text.parse::<f64>() {
            Ok(v) => Ok(Node::Const(v)),
            Err(_) => Err(ParseError {
                offset: start,
                message: format!("invalid number `{text}`"),
            }),
        }
    }

    fn ident(&mut self) -> Result<Node, ParseError> {
        let start = self.pos;
        while matches!(self.peek(), Some(b) if b.is_ascii_alphanumeric() || b == b'_') {
            self.pos += 1;
        }
        let name = std::str::from_utf8(&self.src[start..self.pos]).unwrap();
        match name {
            "sin" | "cos" | "exp" => {
                self.skip_ws();
                if self.peek() != Some(b'(') {
                    return Err(self.err(format!("expected `(` after `{name}`")));
                }
                self.pos += 1;
                let arg = self.expr()?;
                self.skip_ws();
                if self.peek() != Some(b')') {
                    return Err(self.err("expected `)`"));
                }
                self.pos += 1;
                Ok(match name {
                    "sin" => nsin(arg),
                    "cos" => ncos(arg),
                    _ => nexp(arg),
                })
            }
            _ => self.variable(name, start),
        }
    }

    fn variable(&mut self, name: &str, start: usize) -> Result<Node, ParseError> {
        let alias = |idx: usize| -> Result<Node, ParseError> {
            if idx < self.dim {
                Ok(Node::Var(idx))
            } else {
                Err(ParseError {
                    offset: start,
                    message: format!(
                        "variable `{name}` needs dimension at least {}, expression has {}",
                        idx + 1,
                        self.dim
                    ),
                })
            }
        };
        if self.dim <= 4 {
            match name {
                "x" => return alias(0),
                "y" => return alias(1),
                "z" => return alias(2),
                "w" => return alias(3),
                _ => {}
            }
        }
        if let Some(digits) = name.strip_prefix('x') {
            if !digits.is_empty() && digits.bytes().all(|b| b.is_ascii_digit()) {
                let k: usize = digits.parse().map_err(|_| ParseError {
                    offset: start,
                    message: format!("variable index `{digits}` out of range"),
                })?;
                if k == 0 {
                    return Err(ParseError {
                        offset: start,
                        message: "variable indices start at x1".into(),
                    });
                }
                if k > self.dim {
                    return Err(ParseError {
                        offset: start,
                        message: format!("variable `{name}` exceeds dimension {}", self.dim),
                    });
                }
                return Ok(Node::Var(k - 1));
            }
        }
        Err(ParseError {
            offset: start,
            message: format!("unknown identifier `{name}`"),
        })
    }
}
