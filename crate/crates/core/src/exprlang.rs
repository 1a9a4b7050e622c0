//! A small expression language for real-valued formulas in named variables.
//!
//! ```text
//! expr    := term (('+' | '-') term)*
//! term    := unary (('*' | '/') unary)*
//! unary   := '-' unary | power
//! power   := primary ('^' unary)?          right-associative
//! primary := number | 'pi' | var | func '(' expr ')' | '(' expr ')'
//! func    := sin | cos | tan | exp | ln | sqrt | abs
//! ```
//!
//! `^` binds tighter than unary minus, so `-a^2` is `-(a^2)`. Whitespace is ignored.
//! Domain violations (`ln` of a non-positive number, division by zero, `0^negative`,
//! `sqrt` of a negative number, any non-finite result) are errors, never NaN.

use std::collections::HashMap;
use std::fmt;

use crate::algebra::{Complex64, Matrix};
use crate::error::{Error, Result};
use crate::functional::MatrixFunction;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Func {
    Sin,
    Cos,
    Tan,
    Exp,
    Ln,
    Sqrt,
    Abs,
}

impl Func {
    fn from_name(name: &str) -> Option<Self> {
        Some(match name {
            "sin" => Func::Sin,
            "cos" => Func::Cos,
            "tan" => Func::Tan,
            "exp" => Func::Exp,
            "ln" => Func::Ln,
            "sqrt" => Func::Sqrt,
            "abs" => Func::Abs,
            _ => return None,
        })
    }

    pub fn name(self) -> &'static str {
        match self {
            Func::Sin => "sin",
            Func::Cos => "cos",
            Func::Tan => "tan",
            Func::Exp => "exp",
            Func::Ln => "ln",
            Func::Sqrt => "sqrt",
            Func::Abs => "abs",
        }
    }

    fn apply(self, x: f64) -> Result<f64> {
        let y = match self {
            Func::Sin => x.sin(),
            Func::Cos => x.cos(),
            Func::Tan => x.tan(),
            Func::Exp => x.exp(),
            Func::Ln if x <= 0.0 => {
                return Err(Error::Domain {
                    op: "ln",
                    operands: vec![x],
                })
            }
            Func::Ln => x.ln(),
            Func::Sqrt if x < 0.0 => {
                return Err(Error::Domain {
                    op: "sqrt",
                    operands: vec![x],
                })
            }
            Func::Sqrt => x.sqrt(),
            Func::Abs => x.abs(),
        };
        finite(y, self.name(), vec![x])
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum BinOp {
    Add,
    Sub,
    Mul,
    Div,
    Pow,
}

impl BinOp {
    fn symbol(self) -> char {
        match self {
            BinOp::Add => '+',
            BinOp::Sub => '-',
            BinOp::Mul => '*',
            BinOp::Div => '/',
            BinOp::Pow => '^',
        }
    }

    fn apply(self, a: f64, b: f64) -> Result<f64> {
        let y = match self {
            BinOp::Add => a + b,
            BinOp::Sub => a - b,
            BinOp::Mul => a * b,
            BinOp::Div if b == 0.0 => {
                return Err(Error::Domain {
                    op: "/",
                    operands: vec![a, b],
                })
            }
            BinOp::Div => a / b,
            BinOp::Pow if a == 0.0 && b < 0.0 => {
                return Err(Error::Domain {
                    op: "^",
                    operands: vec![a, b],
                })
            }
            BinOp::Pow => a.powf(b),
        };
        finite(
            y,
            match self {
                BinOp::Add => "+",
                BinOp::Sub => "-",
                BinOp::Mul => "*",
                BinOp::Div => "/",
                BinOp::Pow => "^",
            },
            vec![a, b],
        )
    }
}

fn finite(y: f64, op: &'static str, operands: Vec<f64>) -> Result<f64> {
    if y.is_finite() {
        Ok(y)
    } else {
        Err(Error::Domain { op, operands })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Expr {
    Num(f64),
    Pi,
    /// Variable by name and its position in the declared variable list.
    Var(String, usize),
    Neg(Box<Expr>),
    Binary(BinOp, Box<Expr>, Box<Expr>),
    Call(Func, Box<Expr>),
}

impl Expr {
    /// Evaluates with variables bound by position in the declared list.
    pub fn eval_slice(&self, args: &[f64]) -> Result<f64> {
        match self {
            Expr::Num(x) => Ok(*x),
            Expr::Pi => Ok(std::f64::consts::PI),
            Expr::Var(name, i) => args
                .get(*i)
                .copied()
                .ok_or_else(|| Error::UnboundVariable { name: name.clone() }),
            Expr::Neg(e) => Ok(-e.eval_slice(args)?),
            Expr::Binary(op, a, b) => op.apply(a.eval_slice(args)?, b.eval_slice(args)?),
            Expr::Call(f, a) => f.apply(a.eval_slice(args)?),
        }
    }
}

impl fmt::Display for Expr {
    /// Fully parenthesized; reparsing gives back the same tree.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Expr::Num(x) => write!(f, "{x}"),
            Expr::Pi => f.write_str("pi"),
            Expr::Var(name, _) => f.write_str(name),
            Expr::Neg(e) => write!(f, "(-{e})"),
            Expr::Binary(op, a, b) => write!(f, "({a} {} {b})", op.symbol()),
            Expr::Call(func, a) => write!(f, "{}({a})", func.name()),
        }
    }
}

pub fn eval_expr(e: &Expr, env: &HashMap<String, f64>) -> Result<f64> {
    match e {
        Expr::Num(x) => Ok(*x),
        Expr::Pi => Ok(std::f64::consts::PI),
        Expr::Var(name, _) => env
            .get(name)
            .copied()
            .ok_or_else(|| Error::UnboundVariable { name: name.clone() }),
        Expr::Neg(a) => Ok(-eval_expr(a, env)?),
        Expr::Binary(op, a, b) => op.apply(eval_expr(a, env)?, eval_expr(b, env)?),
        Expr::Call(func, a) => func.apply(eval_expr(a, env)?),
    }
}

#[derive(Debug, Clone, PartialEq)]
enum Token {
    Num(f64),
    Ident(String),
    Op(char),
    LParen,
    RParen,
}

fn tokenize(src: &str) -> Result<Vec<(usize, Token)>> {
    let bytes = src.as_bytes();
    let mut out = Vec::new();
    let mut i = 0;
    while i < bytes.len() {
        let c = bytes[i] as char;
        if c.is_ascii_whitespace() {
            i += 1;
        } else if c.is_ascii_digit() || c == '.' {
            let start = i;
            while i < bytes.len() && (bytes[i].is_ascii_digit() || bytes[i] == b'.') {
                i += 1;
            }
            if i < bytes.len() && (bytes[i] == b'e' || bytes[i] == b'E') {
                let mut j = i + 1;
                if j < bytes.len() && (bytes[j] == b'+' || bytes[j] == b'-') {
                    j += 1;
                }
                if j < bytes.len() && bytes[j].is_ascii_digit() {
                    while j < bytes.len() && bytes[j].is_ascii_digit() {
                        j += 1;
                    }
                    i = j;
                }
            }
            let text = &src[start..i];
            let x: f64 = text.parse().map_err(|_| Error::Parse {
                position: start,
                expected: "number".into(),
            })?;
            out.push((start, Token::Num(x)));
        } else if c.is_ascii_alphabetic() || c == '_' {
            let start = i;
            while i < bytes.len() && (bytes[i].is_ascii_alphanumeric() || bytes[i] == b'_') {
                i += 1;
            }
            out.push((start, Token::Ident(src[start..i].to_string())));
        } else if "+-*/^".contains(c) {
            out.push((i, Token::Op(c)));
            i += 1;
        } else if c == '(' {
            out.push((i, Token::LParen));
            i += 1;
        } else if c == ')' {
            out.push((i, Token::RParen));
            i += 1;
        } else {
            return Err(Error::Parse {
                position: i,
                expected: "operand or operator".into(),
            });
        }
    }
    Ok(out)
}

struct Parser<'a> {
    tokens: Vec<(usize, Token)>,
    pos: usize,
    end: usize,
    vars: &'a [String],
}

impl Parser<'_> {
    fn peek(&self) -> Option<&Token> {
        self.tokens.get(self.pos).map(|(_, t)| t)
    }

    fn position(&self) -> usize {
        self.tokens.get(self.pos).map_or(self.end, |(p, _)| *p)
    }

    fn error<T>(&self, expected: &str) -> Result<T> {
        Err(Error::Parse {
            position: self.position(),
            expected: expected.into(),
        })
    }

    fn eat_op(&mut self, ops: &str) -> Option<char> {
        match self.peek() {
            Some(Token::Op(c)) if ops.contains(*c) => {
                let c = *c;
                self.pos += 1;
                Some(c)
            }
            _ => None,
        }
    }

    fn expr(&mut self) -> Result<Expr> {
        let mut lhs = self.term()?;
        while let Some(c) = self.eat_op("+-") {
            let op = if c == '+' { BinOp::Add } else { BinOp::Sub };
            lhs = Expr::Binary(op, Box::new(lhs), Box::new(self.term()?));
        }
        Ok(lhs)
    }

    fn term(&mut self) -> Result<Expr> {
        let mut lhs = self.unary()?;
        while let Some(c) = self.eat_op("*/") {
            let op = if c == '*' { BinOp::Mul } else { BinOp::Div };
            lhs = Expr::Binary(op, Box::new(lhs), Box::new(self.unary()?));
        }
        Ok(lhs)
    }

    fn unary(&mut self) -> Result<Expr> {
        if self.eat_op("-").is_some() {
            return Ok(Expr::Neg(Box::new(self.unary()?)));
        }
        self.power()
    }

    fn power(&mut self) -> Result<Expr> {
        let base = self.primary()?;
        if self.eat_op("^").is_some() {
            let exponent = self.unary()?;
            return Ok(Expr::Binary(BinOp::Pow, Box::new(base), Box::new(exponent)));
        }
        Ok(base)
    }

    fn primary(&mut self) -> Result<Expr> {
        match self.peek().cloned() {
            Some(Token::Num(x)) => {
                self.pos += 1;
                Ok(Expr::Num(x))
            }
            Some(Token::LParen) => {
                self.pos += 1;
                let e = self.expr()?;
                if self.peek() != Some(&Token::RParen) {
                    return self.error("')'");
                }
                self.pos += 1;
                Ok(e)
            }
            Some(Token::Ident(name)) => {
                self.pos += 1;
                if let Some(func) = Func::from_name(&name) {
                    if self.peek() != Some(&Token::LParen) {
                        return self.error("'(' after function name");
                    }
                    self.pos += 1;
                    let arg = self.expr()?;
                    if self.peek() != Some(&Token::RParen) {
                        return self.error("')'");
                    }
                    self.pos += 1;
                    return Ok(Expr::Call(func, Box::new(arg)));
                }
                if let Some(i) = self.vars.iter().position(|v| *v == name) {
                    return Ok(Expr::Var(name, i));
                }
                if name == "pi" {
                    return Ok(Expr::Pi);
                }
                Err(Error::UnknownIdentifier { name })
            }
            _ => self.error("operand"),
        }
    }
}

/// Parses `src` with the declared variable names.
pub fn parse(src: &str, vars: &[String]) -> Result<Expr> {
    let tokens = tokenize(src)?;
    let mut p = Parser {
        tokens,
        pos: 0,
        end: src.len(),
        vars,
    };
    let e = p.expr()?;
    if p.pos != p.tokens.len() {
        return p.error("operator or end of input");
    }
    Ok(e)
}

/// Parses a formula without variables and evaluates it.
pub fn eval_constant(src: &str) -> Result<f64> {
    parse(src, &[])?.eval_slice(&[])
}

/// Square matrix of formulas over one variable list.
#[derive(Debug, Clone, PartialEq)]
pub struct MatrixExpr {
    m: usize,
    vars: Vec<String>,
    entries: Vec<Expr>,
}

impl MatrixExpr {
    pub fn parse(rows: &[Vec<String>], vars: &[String]) -> Result<Self> {
        let m = rows.len();
        if m == 0 {
            return Err(Error::Invalid("empty matrix expression".into()));
        }
        let mut entries = Vec::with_capacity(m * m);
        for (i, row) in rows.iter().enumerate() {
            if row.len() != m {
                return Err(Error::DimensionMismatch {
                    left: m,
                    right: row.len(),
                });
            }
            for (j, src) in row.iter().enumerate() {
                let e = parse(src, vars).map_err(|e| Error::Entry {
                    row: i,
                    col: j,
                    source: Box::new(e),
                })?;
                entries.push(e);
            }
        }
        Ok(Self {
            m,
            vars: vars.to_vec(),
            entries,
        })
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn vars(&self) -> &[String] {
        &self.vars
    }

    pub fn entry(&self, row: usize, col: usize) -> &Expr {
        &self.entries[row * self.m + col]
    }

    pub fn eval(&self, args: &[f64]) -> Result<Matrix<Complex64>> {
        if args.len() != self.vars.len() {
            return Err(Error::DimensionMismatch {
                left: self.vars.len(),
                right: args.len(),
            });
        }
        let mut values = Vec::with_capacity(self.entries.len());
        for (k, e) in self.entries.iter().enumerate() {
            let v = e.eval_slice(args).map_err(|err| Error::Entry {
                row: k / self.m,
                col: k % self.m,
                source: Box::new(err),
            })?;
            values.push(Complex64::new(v, 0.0));
        }
        Ok(Matrix::from_fn(self.m, |i, j| values[i * self.m + j]))
    }

    pub fn to_matrix_function(&self) -> ExprFunction {
        ExprFunction { expr: self.clone() }
    }
}

/// [`MatrixFunction`] backed by a [`MatrixExpr`]; no analytic gradient.
#[derive(Debug, Clone, PartialEq)]
pub struct ExprFunction {
    expr: MatrixExpr,
}

impl MatrixFunction for ExprFunction {
    fn dim_in(&self) -> usize {
        self.expr.vars.len()
    }

    fn m(&self) -> usize {
        self.expr.m
    }

    fn eval(&self, point: &[f64]) -> Result<Matrix<Complex64>> {
        self.expr.eval(point)
    }
}

pub fn to_matrix_function(me: &MatrixExpr) -> ExprFunction {
    me.to_matrix_function()
}
