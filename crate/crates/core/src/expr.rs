//! A tiny one-variable expression language for user-defined dispersion
//! relations and potentials.
//!
//! Supported syntax: numbers (`2`, `0.5`, `1e-3`), the free variable, named
//! constants bound at parse time, `+ - * / ^`, unary minus, parentheses and
//! the functions `exp`, `ln` and `sqrt`. `^` binds tightest and is
//! right-associative, so `-p^2` is `-(p^2)` and `2^3^2` is `2^9`.
//!
//! Derivatives are symbolic with light constant folding. Evaluation never
//! returns NaN: leaving the domain of `ln`, `sqrt`, `/` or `^` is reported as
//! an [`EvalError`].

use std::fmt;

use thiserror::Error;

/// Node of an expression tree. Trees are immutable once built.
#[derive(Debug, Clone, PartialEq)]
pub enum ExprNode {
    Constant(f64),
    Variable,
    Neg(Box<ExprNode>),
    Add(Box<ExprNode>, Box<ExprNode>),
    Sub(Box<ExprNode>, Box<ExprNode>),
    Mul(Box<ExprNode>, Box<ExprNode>),
    Div(Box<ExprNode>, Box<ExprNode>),
    Pow(Box<ExprNode>, Box<ExprNode>),
    Exp(Box<ExprNode>),
    Ln(Box<ExprNode>),
    Sqrt(Box<ExprNode>),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Error)]
pub enum EvalError {
    #[error("division by zero")]
    DivisionByZero,
    #[error("logarithm of a non-positive number")]
    LogOfNonPositive,
    #[error("square root of a negative number")]
    SqrtOfNegative,
    #[error("negative base raised to a non-integer power")]
    PowDomain,
    #[error("result is not a finite number")]
    NonFinite,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ParseErrorKind {
    Empty,
    UnexpectedChar(char),
    UnexpectedToken(String),
    UnexpectedEnd,
    InvalidNumber(String),
    UnknownIdentifier(String),
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("{kind} at position {position}")]
pub struct ParseError {
    pub kind: ParseErrorKind,
    /// Byte offset into the source.
    pub position: usize,
}

impl fmt::Display for ParseErrorKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ParseErrorKind::Empty => write!(f, "empty expression"),
            ParseErrorKind::UnexpectedChar(c) => write!(f, "unexpected character '{c}'"),
            ParseErrorKind::UnexpectedToken(t) => write!(f, "unexpected token '{t}'"),
            ParseErrorKind::UnexpectedEnd => write!(f, "unexpected end of input"),
            ParseErrorKind::InvalidNumber(s) => write!(f, "invalid number '{s}'"),
            ParseErrorKind::UnknownIdentifier(s) => write!(f, "unknown identifier '{s}'"),
        }
    }
}

/// A parsed expression in one named variable.
#[derive(Debug, Clone, PartialEq)]
pub struct Expr {
    root: ExprNode,
    variable: String,
}

impl Expr {
    pub fn new(root: ExprNode, variable: impl Into<String>) -> Self {
        Self {
            root,
            variable: variable.into(),
        }
    }

    pub fn root(&self) -> &ExprNode {
        &self.root
    }

    pub fn variable(&self) -> &str {
        &self.variable
    }

    pub fn eval(&self, x: f64) -> Result<f64, EvalError> {
        self.root.eval(x)
    }

    pub fn derivative(&self) -> Expr {
        Expr {
            root: self.root.derivative(),
            variable: self.variable.clone(),
        }
    }
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.root.write(f, &self.variable)
    }
}

/// Parses `source` with `variable_name` as the free variable. `pi` and `e`
/// are predefined.
pub fn parse(source: &str, variable_name: &str) -> Result<Expr, ParseError> {
    parse_with_constants(source, variable_name, &[])
}

/// Like [`parse`], additionally binding each `(name, value)` pair. Bindings
/// shadow the predefined constants.
pub fn parse_with_constants(
    source: &str,
    variable_name: &str,
    constants: &[(&str, f64)],
) -> Result<Expr, ParseError> {
    let tokens = tokenize(source)?;
    if tokens.is_empty() {
        return Err(ParseError {
            kind: ParseErrorKind::Empty,
            position: 0,
        });
    }
    let mut parser = Parser {
        tokens,
        pos: 0,
        end: source.len(),
        variable: variable_name,
        constants,
    };
    let root = parser.expression()?;
    if let Some((tok, at)) = parser.tokens.get(parser.pos) {
        return Err(ParseError {
            kind: ParseErrorKind::UnexpectedToken(tok.to_string()),
            position: *at,
        });
    }
    Ok(Expr::new(root, variable_name))
}

/// Symbolic derivative with respect to the expression's variable.
pub fn differentiate(e: &Expr) -> Expr {
    e.derivative()
}

fn finite(v: f64) -> Result<f64, EvalError> {
    if v.is_finite() {
        Ok(v)
    } else {
        Err(EvalError::NonFinite)
    }
}

impl ExprNode {
    pub fn eval(&self, x: f64) -> Result<f64, EvalError> {
        use ExprNode::*;
        let v = match self {
            Constant(c) => *c,
            Variable => x,
            Neg(a) => -a.eval(x)?,
            Add(a, b) => a.eval(x)? + b.eval(x)?,
            Sub(a, b) => a.eval(x)? - b.eval(x)?,
            Mul(a, b) => a.eval(x)? * b.eval(x)?,
            Div(a, b) => {
                let num = a.eval(x)?;
                let den = b.eval(x)?;
                if den == 0.0 {
                    return Err(EvalError::DivisionByZero);
                }
                num / den
            }
            Pow(a, b) => {
                let base = a.eval(x)?;
                let exponent = b.eval(x)?;
                if base < 0.0 && exponent.fract() != 0.0 {
                    return Err(EvalError::PowDomain);
                }
                if base == 0.0 && exponent < 0.0 {
                    return Err(EvalError::DivisionByZero);
                }
                base.powf(exponent)
            }
            Exp(a) => a.eval(x)?.exp(),
            Ln(a) => {
                let v = a.eval(x)?;
                if v <= 0.0 {
                    return Err(EvalError::LogOfNonPositive);
                }
                v.ln()
            }
            Sqrt(a) => {
                let v = a.eval(x)?;
                if v < 0.0 {
                    return Err(EvalError::SqrtOfNegative);
                }
                v.sqrt()
            }
        };
        finite(v)
    }

    pub fn derivative(&self) -> ExprNode {
        use ExprNode::*;
        match self {
            Constant(_) => Constant(0.0),
            Variable => Constant(1.0),
            Neg(a) => neg(a.derivative()),
            Add(a, b) => add(a.derivative(), b.derivative()),
            Sub(a, b) => sub(a.derivative(), b.derivative()),
            Mul(a, b) => add(
                mul(a.derivative(), (**b).clone()),
                mul((**a).clone(), b.derivative()),
            ),
            Div(a, b) => div(
                sub(
                    mul(a.derivative(), (**b).clone()),
                    mul((**a).clone(), b.derivative()),
                ),
                pow((**b).clone(), Constant(2.0)),
            ),
            Pow(a, b) => match (&**a, &**b) {
                (_, Constant(c)) => mul(
                    mul(Constant(*c), pow((**a).clone(), Constant(c - 1.0))),
                    a.derivative(),
                ),
                (Constant(base), _) if *base > 0.0 => mul(
                    mul(self.clone(), Constant(base.ln())),
                    b.derivative(),
                ),
                _ => mul(
                    self.clone(),
                    add(
                        mul(b.derivative(), ln((**a).clone())),
                        div(mul((**b).clone(), a.derivative()), (**a).clone()),
                    ),
                ),
            },
            Exp(a) => mul(self.clone(), a.derivative()),
            Ln(a) => div(a.derivative(), (**a).clone()),
            Sqrt(a) => div(a.derivative(), mul(Constant(2.0), self.clone())),
        }
    }

    fn write(&self, f: &mut fmt::Formatter<'_>, var: &str) -> fmt::Result {
        use ExprNode::*;
        let binary = |f: &mut fmt::Formatter<'_>, a: &ExprNode, op: &str, b: &ExprNode| {
            write!(f, "(")?;
            a.write(f, var)?;
            write!(f, " {op} ")?;
            b.write(f, var)?;
            write!(f, ")")
        };
        let call = |f: &mut fmt::Formatter<'_>, name: &str, a: &ExprNode| {
            write!(f, "{name}(")?;
            a.write(f, var)?;
            write!(f, ")")
        };
        match self {
            Constant(c) if *c < 0.0 => write!(f, "(-{:?})", -c),
            Constant(c) => write!(f, "{c:?}"),
            Variable => write!(f, "{var}"),
            Neg(a) => {
                write!(f, "(-")?;
                a.write(f, var)?;
                write!(f, ")")
            }
            Add(a, b) => binary(f, a, "+", b),
            Sub(a, b) => binary(f, a, "-", b),
            Mul(a, b) => binary(f, a, "*", b),
            Div(a, b) => binary(f, a, "/", b),
            Pow(a, b) => binary(f, a, "^", b),
            Exp(a) => call(f, "exp", a),
            Ln(a) => call(f, "ln", a),
            Sqrt(a) => call(f, "sqrt", a),
        }
    }
}

// Smart constructors with constant folding. Folding is skipped whenever it
// would hide a domain error.

fn constant(n: &ExprNode) -> Option<f64> {
    match n {
        ExprNode::Constant(c) => Some(*c),
        _ => None,
    }
}

fn fold(n: ExprNode) -> ExprNode {
    match n.eval(0.0) {
        Ok(v) if !contains_variable(&n) => ExprNode::Constant(v),
        _ => n,
    }
}

fn contains_variable(n: &ExprNode) -> bool {
    use ExprNode::*;
    match n {
        Constant(_) => false,
        Variable => true,
        Neg(a) | Exp(a) | Ln(a) | Sqrt(a) => contains_variable(a),
        Add(a, b) | Sub(a, b) | Mul(a, b) | Div(a, b) | Pow(a, b) => {
            contains_variable(a) || contains_variable(b)
        }
    }
}

fn neg(a: ExprNode) -> ExprNode {
    match a {
        ExprNode::Constant(c) => ExprNode::Constant(-c),
        ExprNode::Neg(inner) => *inner,
        a => ExprNode::Neg(Box::new(a)),
    }
}

fn add(a: ExprNode, b: ExprNode) -> ExprNode {
    match (constant(&a), constant(&b)) {
        (Some(x), _) if x == 0.0 => b,
        (_, Some(y)) if y == 0.0 => a,
        _ => fold(ExprNode::Add(Box::new(a), Box::new(b))),
    }
}

fn sub(a: ExprNode, b: ExprNode) -> ExprNode {
    match (constant(&a), constant(&b)) {
        (_, Some(y)) if y == 0.0 => a,
        (Some(x), _) if x == 0.0 => neg(b),
        _ => fold(ExprNode::Sub(Box::new(a), Box::new(b))),
    }
}

fn mul(a: ExprNode, b: ExprNode) -> ExprNode {
    match (constant(&a), constant(&b)) {
        (Some(x), _) | (_, Some(x)) if x == 0.0 => ExprNode::Constant(0.0),
        (Some(x), _) if x == 1.0 => b,
        (_, Some(y)) if y == 1.0 => a,
        _ => fold(ExprNode::Mul(Box::new(a), Box::new(b))),
    }
}

fn div(a: ExprNode, b: ExprNode) -> ExprNode {
    match (constant(&a), constant(&b)) {
        (Some(x), Some(y)) if x == 0.0 && y != 0.0 => ExprNode::Constant(0.0),
        (_, Some(y)) if y == 1.0 => a,
        _ => fold(ExprNode::Div(Box::new(a), Box::new(b))),
    }
}

fn pow(a: ExprNode, b: ExprNode) -> ExprNode {
    match constant(&b) {
        Some(y) if y == 1.0 => a,
        Some(y) if y == 0.0 => ExprNode::Constant(1.0),
        _ => fold(ExprNode::Pow(Box::new(a), Box::new(b))),
    }
}

fn ln(a: ExprNode) -> ExprNode {
    fold(ExprNode::Ln(Box::new(a)))
}

#[derive(Debug, Clone, PartialEq)]
enum Token {
    Number(f64),
    Ident(String),
    Op(char),
    LParen,
    RParen,
}

impl fmt::Display for Token {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Token::Number(v) => write!(f, "{v}"),
            Token::Ident(s) => write!(f, "{s}"),
            Token::Op(c) => write!(f, "{c}"),
            Token::LParen => write!(f, "("),
            Token::RParen => write!(f, ")"),
        }
    }
}

fn tokenize(source: &str) -> Result<Vec<(Token, usize)>, ParseError> {
    let bytes = source.as_bytes();
    let mut tokens = Vec::new();
    let mut i = 0;
    while i < bytes.len() {
        let c = bytes[i] as char;
        let start = i;
        if c.is_ascii_whitespace() {
            i += 1;
        } else if c.is_ascii_digit() || c == '.' {
            while i < bytes.len() && (bytes[i].is_ascii_digit() || bytes[i] == b'.') {
                i += 1;
            }
            // exponent only when a digit follows, so `2*e` stays an identifier
            if i < bytes.len() && (bytes[i] == b'e' || bytes[i] == b'E') {
                let mut j = i + 1;
                if j < bytes.len() && (bytes[j] == b'+' || bytes[j] == b'-') {
                    j += 1;
                }
                if j < bytes.len() && bytes[j].is_ascii_digit() {
                    i = j;
                    while i < bytes.len() && bytes[i].is_ascii_digit() {
                        i += 1;
                    }
                }
            }
            let text = &source[start..i];
            let value = text.parse::<f64>().map_err(|_| ParseError {
                kind: ParseErrorKind::InvalidNumber(text.to_string()),
                position: start,
            })?;
            tokens.push((Token::Number(value), start));
        } else if c.is_ascii_alphabetic() || c == '_' {
            while i < bytes.len() && (bytes[i].is_ascii_alphanumeric() || bytes[i] == b'_') {
                i += 1;
            }
            tokens.push((Token::Ident(source[start..i].to_string()), start));
        } else {
            let tok = match c {
                '+' | '-' | '*' | '/' | '^' => Token::Op(c),
                '(' => Token::LParen,
                ')' => Token::RParen,
                _ => {
                    let ch = source[start..].chars().next().unwrap_or(c);
                    return Err(ParseError {
                        kind: ParseErrorKind::UnexpectedChar(ch),
                        position: start,
                    });
                }
            };
            tokens.push((tok, start));
            i += 1;
        }
    }
    Ok(tokens)
}

struct Parser<'a> {
    tokens: Vec<(Token, usize)>,
    pos: usize,
    end: usize,
    variable: &'a str,
    constants: &'a [(&'a str, f64)],
}

impl Parser<'_> {
    fn peek(&self) -> Option<&Token> {
        self.tokens.get(self.pos).map(|(t, _)| t)
    }

    fn next(&mut self) -> Result<(Token, usize), ParseError> {
        let tok = self.tokens.get(self.pos).cloned().ok_or(ParseError {
            kind: ParseErrorKind::UnexpectedEnd,
            position: self.end,
        })?;
        self.pos += 1;
        Ok(tok)
    }

    fn expression(&mut self) -> Result<ExprNode, ParseError> {
        let mut lhs = self.term()?;
        while let Some(Token::Op(op @ ('+' | '-'))) = self.peek() {
            let op = *op;
            self.pos += 1;
            let rhs = self.term()?;
            lhs = if op == '+' {
                ExprNode::Add(Box::new(lhs), Box::new(rhs))
            } else {
                ExprNode::Sub(Box::new(lhs), Box::new(rhs))
            };
        }
        Ok(lhs)
    }

    fn term(&mut self) -> Result<ExprNode, ParseError> {
        let mut lhs = self.unary()?;
        while let Some(Token::Op(op @ ('*' | '/'))) = self.peek() {
            let op = *op;
            self.pos += 1;
            let rhs = self.unary()?;
            lhs = if op == '*' {
                ExprNode::Mul(Box::new(lhs), Box::new(rhs))
            } else {
                ExprNode::Div(Box::new(lhs), Box::new(rhs))
            };
        }
        Ok(lhs)
    }

    fn unary(&mut self) -> Result<ExprNode, ParseError> {
        match self.peek() {
            Some(Token::Op('-')) => {
                self.pos += 1;
                Ok(ExprNode::Neg(Box::new(self.unary()?)))
            }
            Some(Token::Op('+')) => {
                self.pos += 1;
                self.unary()
            }
            _ => self.power(),
        }
    }

    fn power(&mut self) -> Result<ExprNode, ParseError> {
        let base = self.atom()?;
        if let Some(Token::Op('^')) = self.peek() {
            self.pos += 1;
            let exponent = self.unary()?;
            return Ok(ExprNode::Pow(Box::new(base), Box::new(exponent)));
        }
        Ok(base)
    }

    fn atom(&mut self) -> Result<ExprNode, ParseError> {
        let (tok, at) = self.next()?;
        match tok {
            Token::Number(v) => Ok(ExprNode::Constant(v)),
            Token::LParen => {
                let inner = self.expression()?;
                self.expect_rparen()?;
                Ok(inner)
            }
            Token::Ident(name) => {
                if matches!(self.peek(), Some(Token::LParen)) {
                    let make: fn(Box<ExprNode>) -> ExprNode = match name.as_str() {
                        "exp" => ExprNode::Exp,
                        "ln" => ExprNode::Ln,
                        "sqrt" => ExprNode::Sqrt,
                        _ => {
                            return Err(ParseError {
                                kind: ParseErrorKind::UnknownIdentifier(name),
                                position: at,
                            })
                        }
                    };
                    self.pos += 1;
                    let arg = self.expression()?;
                    self.expect_rparen()?;
                    return Ok(make(Box::new(arg)));
                }
                if name == self.variable {
                    return Ok(ExprNode::Variable);
                }
                if let Some((_, v)) = self.constants.iter().find(|(n, _)| *n == name) {
                    return Ok(ExprNode::Constant(*v));
                }
                match name.as_str() {
                    "pi" => Ok(ExprNode::Constant(std::f64::consts::PI)),
                    "e" => Ok(ExprNode::Constant(std::f64::consts::E)),
                    _ => Err(ParseError {
                        kind: ParseErrorKind::UnknownIdentifier(name),
                        position: at,
                    }),
                }
            }
            other => Err(ParseError {
                kind: ParseErrorKind::UnexpectedToken(other.to_string()),
                position: at,
            }),
        }
    }

    fn expect_rparen(&mut self) -> Result<(), ParseError> {
        match self.next()? {
            (Token::RParen, _) => Ok(()),
            (tok, at) => Err(ParseError {
                kind: ParseErrorKind::UnexpectedToken(tok.to_string()),
                position: at,
            }),
        }
    }
}
