//! A small expression language for user-supplied functions of x and y:
//! `+ - * /`, `^` with integer-literal exponents, unary minus, parentheses,
//! and the functions `abs`, `sin`, `cos`, `exp`. Precedence is
//! `^` > unary minus > `* /` > `+ -`, with left associativity for the
//! binary operators. Errors carry the 1-based column they were found at.

use std::fmt;

use crate::cheb::TargetFunction;
use crate::error::{Error, Result};

/// Built-in unary functions.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Func {
    Abs,
    Sin,
    Cos,
    Exp,
}

impl Func {
    fn name(self) -> &'static str {
        match self {
            Func::Abs => "abs",
            Func::Sin => "sin",
            Func::Cos => "cos",
            Func::Exp => "exp",
        }
    }

    fn from_name(name: &str) -> Option<Func> {
        match name {
            "abs" => Some(Func::Abs),
            "sin" => Some(Func::Sin),
            "cos" => Some(Func::Cos),
            "exp" => Some(Func::Exp),
            _ => None,
        }
    }

    fn apply(self, t: f64) -> f64 {
        match self {
            Func::Abs => t.abs(),
            Func::Sin => t.sin(),
            Func::Cos => t.cos(),
            Func::Exp => t.exp(),
        }
    }
}

/// Parsed expression tree. Constants are always finite and nonnegative
/// (negation is an explicit node), which keeps printing and re-parsing
/// structurally faithful.
#[derive(Debug, Clone, PartialEq)]
pub enum Expr {
    Const(f64),
    X,
    Y,
    Neg(Box<Expr>),
    Call(Func, Box<Expr>),
    Add(Box<Expr>, Box<Expr>),
    Sub(Box<Expr>, Box<Expr>),
    Mul(Box<Expr>, Box<Expr>),
    Div(Box<Expr>, Box<Expr>),
    Pow(Box<Expr>, i32),
}

impl Expr {
    /// Recursive evaluation at a point of the square. Division by zero (and
    /// a zero base under a negative exponent, which is the same thing) is
    /// reported with the offending point.
    pub fn eval(&self, x: f64, y: f64) -> Result<f64> {
        match self {
            Expr::Const(c) => Ok(*c),
            Expr::X => Ok(x),
            Expr::Y => Ok(y),
            Expr::Neg(a) => Ok(-a.eval(x, y)?),
            Expr::Call(func, a) => Ok(func.apply(a.eval(x, y)?)),
            Expr::Add(a, b) => Ok(a.eval(x, y)? + b.eval(x, y)?),
            Expr::Sub(a, b) => Ok(a.eval(x, y)? - b.eval(x, y)?),
            Expr::Mul(a, b) => Ok(a.eval(x, y)? * b.eval(x, y)?),
            Expr::Div(a, b) => {
                let d = b.eval(x, y)?;
                if d == 0.0 {
                    return Err(Error::DivisionByZero { x, y });
                }
                Ok(a.eval(x, y)? / d)
            }
            Expr::Pow(a, e) => {
                let base = a.eval(x, y)?;
                if base == 0.0 && *e < 0 {
                    return Err(Error::DivisionByZero { x, y });
                }
                Ok(base.powi(*e))
            }
        }
    }

    fn precedence(&self) -> u8 {
        match self {
            Expr::Add(..) | Expr::Sub(..) => 1,
            Expr::Mul(..) | Expr::Div(..) => 2,
            Expr::Neg(..) => 3,
            Expr::Pow(..) => 4,
            _ => 5,
        }
    }
}

fn write_prec(f: &mut fmt::Formatter<'_>, e: &Expr, min: u8) -> fmt::Result {
    if e.precedence() < min {
        write!(f, "(")?;
        write_prec(f, e, 0)?;
        return write!(f, ")");
    }
    match e {
        Expr::Const(c) => write!(f, "{c}"),
        Expr::X => write!(f, "x"),
        Expr::Y => write!(f, "y"),
        Expr::Neg(a) => {
            write!(f, "-")?;
            write_prec(f, a, 3)
        }
        Expr::Call(func, a) => {
            write!(f, "{}(", func.name())?;
            write_prec(f, a, 0)?;
            write!(f, ")")
        }
        Expr::Add(a, b) => {
            write_prec(f, a, 1)?;
            write!(f, "+")?;
            write_prec(f, b, 2)
        }
        Expr::Sub(a, b) => {
            write_prec(f, a, 1)?;
            write!(f, "-")?;
            write_prec(f, b, 2)
        }
        Expr::Mul(a, b) => {
            write_prec(f, a, 2)?;
            write!(f, "*")?;
            write_prec(f, b, 3)
        }
        Expr::Div(a, b) => {
            write_prec(f, a, 2)?;
            write!(f, "/")?;
            write_prec(f, b, 3)
        }
        Expr::Pow(a, e) => {
            write_prec(f, a, 5)?;
            write!(f, "^{e}")
        }
    }
}

impl fmt::Display for Expr {
    /// Prints with the fewest parentheses that still re-parse to a
    /// structurally identical tree.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write_prec(f, self, 0)
    }
}

/// A parse failure at a 1-based column of the input.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ParseError {
    pub column: usize,
    pub message: String,
}

impl fmt::Display for ParseError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "column {}: {}", self.column, self.message)
    }
}

impl std::error::Error for ParseError {}

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Num { value: f64, integer: bool },
    Ident(String),
    Plus,
    Minus,
    Star,
    Slash,
    Caret,
    LParen,
    RParen,
}

impl Tok {
    fn describe(&self) -> String {
        match self {
            Tok::Num { value, .. } => format!("number {value}"),
            Tok::Ident(s) => format!("identifier '{s}'"),
            Tok::Plus => "'+'".into(),
            Tok::Minus => "'-'".into(),
            Tok::Star => "'*'".into(),
            Tok::Slash => "'/'".into(),
            Tok::Caret => "'^'".into(),
            Tok::LParen => "'('".into(),
            Tok::RParen => "')'".into(),
        }
    }
}

fn err(column: usize, message: impl Into<String>) -> ParseError {
    ParseError { column, message: message.into() }
}

fn lex(text: &str) -> std::result::Result<Vec<(usize, Tok)>, ParseError> {
    let chars: Vec<char> = text.chars().collect();
    let mut out = Vec::new();
    let mut pos = 0;
    while pos < chars.len() {
        let col = pos + 1;
        let c = chars[pos];
        if c.is_whitespace() {
            pos += 1;
            continue;
        }
        let simple = match c {
            '+' => Some(Tok::Plus),
            '-' => Some(Tok::Minus),
            '*' => Some(Tok::Star),
            '/' => Some(Tok::Slash),
            '^' => Some(Tok::Caret),
            '(' => Some(Tok::LParen),
            ')' => Some(Tok::RParen),
            _ => None,
        };
        if let Some(tok) = simple {
            out.push((col, tok));
            pos += 1;
            continue;
        }
        if c.is_ascii_digit() {
            let start = pos;
            let mut integer = true;
            while pos < chars.len() && chars[pos].is_ascii_digit() {
                pos += 1;
            }
            if pos < chars.len() && chars[pos] == '.' {
                integer = false;
                pos += 1;
                while pos < chars.len() && chars[pos].is_ascii_digit() {
                    pos += 1;
                }
            }
            if pos < chars.len() && (chars[pos] == 'e' || chars[pos] == 'E') {
                let mut probe = pos + 1;
                if probe < chars.len() && (chars[probe] == '+' || chars[probe] == '-') {
                    probe += 1;
                }
                if probe < chars.len() && chars[probe].is_ascii_digit() {
                    integer = false;
                    pos = probe;
                    while pos < chars.len() && chars[pos].is_ascii_digit() {
                        pos += 1;
                    }
                }
            }
            let lexeme: String = chars[start..pos].iter().collect();
            let value: f64 = lexeme
                .parse()
                .map_err(|_| err(start + 1, format!("invalid numeric literal '{lexeme}'")))?;
            if !value.is_finite() {
                return Err(err(start + 1, format!("numeric literal '{lexeme}' overflows")));
            }
            out.push((start + 1, Tok::Num { value, integer }));
            continue;
        }
        if c.is_ascii_alphabetic() || c == '_' {
            let start = pos;
            while pos < chars.len() && (chars[pos].is_ascii_alphanumeric() || chars[pos] == '_') {
                pos += 1;
            }
            out.push((start + 1, Tok::Ident(chars[start..pos].iter().collect())));
            continue;
        }
        return Err(err(col, format!("unexpected character '{c}'")));
    }
    Ok(out)
}

const MAX_DEPTH: usize = 200;

struct Parser {
    tokens: Vec<(usize, Tok)>,
    pos: usize,
    end_col: usize,
    depth: usize,
}

impl Parser {
    fn peek(&self) -> Option<&(usize, Tok)> {
        self.tokens.get(self.pos)
    }

    fn here(&self) -> usize {
        self.peek().map_or(self.end_col, |&(c, _)| c)
    }

    fn eat(&mut self, want: &Tok) -> bool {
        if self.peek().map(|(_, t)| t) == Some(want) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn enter(&mut self) -> std::result::Result<(), ParseError> {
        self.depth += 1;
        if self.depth > MAX_DEPTH {
            return Err(err(self.here(), "expression nests too deeply"));
        }
        Ok(())
    }

    fn expr(&mut self) -> std::result::Result<Expr, ParseError> {
        self.enter()?;
        let mut lhs = self.term()?;
        loop {
            if self.eat(&Tok::Plus) {
                lhs = Expr::Add(lhs.into(), self.term()?.into());
            } else if self.eat(&Tok::Minus) {
                lhs = Expr::Sub(lhs.into(), self.term()?.into());
            } else {
                break;
            }
        }
        self.depth -= 1;
        Ok(lhs)
    }

    fn term(&mut self) -> std::result::Result<Expr, ParseError> {
        self.enter()?;
        let mut lhs = self.unary()?;
        loop {
            if self.eat(&Tok::Star) {
                lhs = Expr::Mul(lhs.into(), self.unary()?.into());
            } else if self.eat(&Tok::Slash) {
                lhs = Expr::Div(lhs.into(), self.unary()?.into());
            } else {
                break;
            }
        }
        self.depth -= 1;
        Ok(lhs)
    }

    fn unary(&mut self) -> std::result::Result<Expr, ParseError> {
        self.enter()?;
        let e = if self.eat(&Tok::Minus) {
            Expr::Neg(self.unary()?.into())
        } else {
            self.power()?
        };
        self.depth -= 1;
        Ok(e)
    }

    fn power(&mut self) -> std::result::Result<Expr, ParseError> {
        self.enter()?;
        let mut base = self.atom()?;
        while self.eat(&Tok::Caret) {
            base = Expr::Pow(base.into(), self.exponent()?);
        }
        self.depth -= 1;
        Ok(base)
    }

    fn exponent(&mut self) -> std::result::Result<i32, ParseError> {
        let negative = self.eat(&Tok::Minus);
        let col = self.here();
        match self.peek() {
            Some((_, Tok::Num { value, integer: true })) => {
                let v = *value;
                self.pos += 1;
                if v > i32::MAX as f64 {
                    return Err(err(col, "integer exponent is too large"));
                }
                let e = v as i32;
                Ok(if negative { -e } else { e })
            }
            Some((_, Tok::Num { integer: false, .. })) => {
                Err(err(col, "exponent must be an integer literal"))
            }
            Some((_, t)) => Err(err(col, format!("expected an integer exponent, found {}", t.describe()))),
            None => Err(err(col, "expected an integer exponent, found end of input")),
        }
    }

    fn atom(&mut self) -> std::result::Result<Expr, ParseError> {
        let col = self.here();
        let tok = match self.peek() {
            Some((_, t)) => t.clone(),
            None => return Err(err(col, "expected an operand, found end of input")),
        };
        match tok {
            Tok::Num { value, .. } => {
                self.pos += 1;
                Ok(Expr::Const(value))
            }
            Tok::Ident(name) => {
                self.pos += 1;
                match name.as_str() {
                    "x" => Ok(Expr::X),
                    "y" => Ok(Expr::Y),
                    _ => {
                        let func = Func::from_name(&name).ok_or_else(|| {
                            err(col, format!("unknown function or variable '{name}'"))
                        })?;
                        let open = self.here();
                        if !self.eat(&Tok::LParen) {
                            return Err(err(open, format!("expected '(' after '{name}'")));
                        }
                        let arg = self.expr()?;
                        let close = self.here();
                        if !self.eat(&Tok::RParen) {
                            return Err(err(close, "expected ')' to close the call"));
                        }
                        Ok(Expr::Call(func, arg.into()))
                    }
                }
            }
            Tok::LParen => {
                self.pos += 1;
                let inner = self.expr()?;
                let close = self.here();
                if !self.eat(&Tok::RParen) {
                    return Err(err(close, "expected ')'"));
                }
                Ok(inner)
            }
            other => Err(err(col, format!("expected an operand, found {}", other.describe()))),
        }
    }
}

/// Parses an expression in x and y; errors carry the 1-based column.
pub fn parse_expression(text: &str) -> std::result::Result<Expr, ParseError> {
    let tokens = lex(text)?;
    if tokens.is_empty() {
        return Err(err(1, "empty expression"));
    }
    let end_col = text.chars().count() + 1;
    let mut parser = Parser { tokens, pos: 0, end_col, depth: 0 };
    let expr = parser.expr()?;
    if let Some((col, t)) = parser.peek() {
        return Err(err(*col, format!("unexpected trailing input: {}", t.describe())));
    }
    Ok(expr)
}

/// Wraps an AST as a [`TargetFunction`] for the approximation pipeline.
/// Runtime domain failures (division by zero) surface as NaN samples, which
/// the quadrature layer reports together with the offending node.
pub fn ast_to_function(ast: Expr) -> TargetFunction {
    TargetFunction::new(move |x, y| ast.eval(x, y).unwrap_or(f64::NAN))
}
