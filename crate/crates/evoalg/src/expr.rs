//! A small expression language for user-supplied scalar functions of time,
//! parsed once and evaluated many times.
//!
//! Grammar (whitespace-insensitive):
//!
//! ```text
//! expr   := term (('+' | '-') term)*
//! term   := power (('*' | '/') power)*
//! power  := unary ('^' power)?          -- right-associative
//! unary  := '-' unary | atom            -- unary minus binds tighter than ^
//! atom   := number | 'pi' | var | func '(' expr ')' | '(' expr ')'
//! ```
//!
//! Domain violations during evaluation (log of a non-positive value, division
//! by zero, any non-finite intermediate) surface as errors rather than
//! propagating NaN into classification.

use std::collections::HashMap;
use std::fmt;

use thiserror::Error;

#[derive(Debug, Error, PartialEq)]
pub enum ExprError {
    #[error("syntax error at byte {offset}: expected {expected}")]
    Syntax { offset: usize, expected: String },
    #[error("unknown identifier `{name}` at byte {offset}")]
    UnknownIdentifier { name: String, offset: usize },
    #[error("domain error evaluating {what} at {at}")]
    Domain { what: String, at: f64 },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum BinOp {
    Add,
    Sub,
    Mul,
    Div,
    Pow,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Func {
    Exp,
    Log,
    Sin,
    Cos,
    Tan,
    Sqrt,
    Cbrt,
}

impl Func {
    fn name(self) -> &'static str {
        match self {
            Func::Exp => "exp",
            Func::Log => "log",
            Func::Sin => "sin",
            Func::Cos => "cos",
            Func::Tan => "tan",
            Func::Sqrt => "sqrt",
            Func::Cbrt => "cbrt",
        }
    }

    fn from_name(name: &str) -> Option<Func> {
        Some(match name {
            "exp" => Func::Exp,
            "log" => Func::Log,
            "sin" => Func::Sin,
            "cos" => Func::Cos,
            "tan" => Func::Tan,
            "sqrt" => Func::Sqrt,
            "cbrt" => Func::Cbrt,
            _ => return None,
        })
    }
}

/// Parsed expression tree. Immutable and shareable; evaluation is pure.
#[derive(Clone, Debug, PartialEq)]
pub enum Expr {
    Num(f64),
    Pi,
    Var(String),
    Neg(Box<Expr>),
    Bin(BinOp, Box<Expr>, Box<Expr>),
    Call(Func, Box<Expr>),
}

/// Parses an expression over the given variable names (typically `["t"]`,
/// or `["s", "t"]` for custom family entries).
pub fn parse(source: &str, vars: &[&str]) -> Result<Expr, ExprError> {
    let mut p = Parser {
        src: source.as_bytes(),
        pos: 0,
        vars,
    };
    let e = p.expr()?;
    p.skip_ws();
    if p.pos != p.src.len() {
        return Err(ExprError::Syntax {
            offset: p.pos,
            expected: "end of input".to_string(),
        });
    }
    Ok(e)
}

struct Parser<'a> {
    src: &'a [u8],
    pos: usize,
    vars: &'a [&'a str],
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

    fn expect(&mut self, c: u8, expected: &str) -> Result<(), ExprError> {
        if self.eat(c) {
            Ok(())
        } else {
            Err(ExprError::Syntax {
                offset: self.pos,
                expected: expected.to_string(),
            })
        }
    }

    fn expr(&mut self) -> Result<Expr, ExprError> {
        let mut lhs = self.term()?;
        loop {
            match self.peek() {
                Some(b'+') => {
                    self.pos += 1;
                    let rhs = self.term()?;
                    lhs = Expr::Bin(BinOp::Add, Box::new(lhs), Box::new(rhs));
                }
                Some(b'-') => {
                    self.pos += 1;
                    let rhs = self.term()?;
                    lhs = Expr::Bin(BinOp::Sub, Box::new(lhs), Box::new(rhs));
                }
                _ => return Ok(lhs),
            }
        }
    }

    fn term(&mut self) -> Result<Expr, ExprError> {
        let mut lhs = self.power()?;
        loop {
            match self.peek() {
                Some(b'*') => {
                    self.pos += 1;
                    let rhs = self.power()?;
                    lhs = Expr::Bin(BinOp::Mul, Box::new(lhs), Box::new(rhs));
                }
                Some(b'/') => {
                    self.pos += 1;
                    let rhs = self.power()?;
                    lhs = Expr::Bin(BinOp::Div, Box::new(lhs), Box::new(rhs));
                }
                _ => return Ok(lhs),
            }
        }
    }

    fn power(&mut self) -> Result<Expr, ExprError> {
        let base = self.unary()?;
        if self.peek() == Some(b'^') {
            self.pos += 1;
            let exp = self.power()?; // right-associative
            Ok(Expr::Bin(BinOp::Pow, Box::new(base), Box::new(exp)))
        } else {
            Ok(base)
        }
    }

    fn unary(&mut self) -> Result<Expr, ExprError> {
        if self.peek() == Some(b'-') {
            self.pos += 1;
            let inner = self.unary()?;
            Ok(Expr::Neg(Box::new(inner)))
        } else {
            self.atom()
        }
    }

    fn atom(&mut self) -> Result<Expr, ExprError> {
        match self.peek() {
            Some(b'(') => {
                self.pos += 1;
                let e = self.expr()?;
                self.expect(b')', "closing parenthesis")?;
                Ok(e)
            }
            Some(c) if c.is_ascii_digit() || c == b'.' => self.number(),
            Some(c) if c.is_ascii_alphabetic() || c == b'_' => self.identifier(),
            _ => Err(ExprError::Syntax {
                offset: self.pos,
                expected: "number, identifier, or parenthesized expression".to_string(),
            }),
        }
    }

    fn number(&mut self) -> Result<Expr, ExprError> {
        let start = self.pos;
        while self
            .src
            .get(self.pos)
            .is_some_and(|c| c.is_ascii_digit() || *c == b'.')
        {
            self.pos += 1;
        }
        // optional exponent
        if self.src.get(self.pos).is_some_and(|c| *c == b'e' || *c == b'E') {
            let mark = self.pos;
            self.pos += 1;
            if self.src.get(self.pos).is_some_and(|c| *c == b'+' || *c == b'-') {
                self.pos += 1;
            }
            if self.src.get(self.pos).is_some_and(|c| c.is_ascii_digit()) {
                while self.src.get(self.pos).is_some_and(|c| c.is_ascii_digit()) {
                    self.pos += 1;
                }
            } else {
                self.pos = mark; // `e` belongs to an identifier, not this number
            }
        }
        let text = std::str::from_utf8(&self.src[start..self.pos]).unwrap();
        text.parse::<f64>().map(Expr::Num).map_err(|_| ExprError::Syntax {
            offset: start,
            expected: "numeric literal".to_string(),
        })
    }

    fn identifier(&mut self) -> Result<Expr, ExprError> {
        let start = self.pos;
        while self
            .src
            .get(self.pos)
            .is_some_and(|c| c.is_ascii_alphanumeric() || *c == b'_')
        {
            self.pos += 1;
        }
        let name = std::str::from_utf8(&self.src[start..self.pos])
            .unwrap()
            .to_string();
        if name == "pi" {
            return Ok(Expr::Pi);
        }
        if let Some(func) = Func::from_name(&name) {
            self.expect(b'(', "opening parenthesis after function name")?;
            let arg = self.expr()?;
            self.expect(b')', "closing parenthesis")?;
            return Ok(Expr::Call(func, Box::new(arg)));
        }
        if self.vars.contains(&name.as_str()) {
            return Ok(Expr::Var(name));
        }
        Err(ExprError::UnknownIdentifier {
            name,
            offset: start,
        })
    }
}

/// Evaluates an expression with the given variable bindings.
pub fn eval_env(e: &Expr, env: &HashMap<&str, f64>) -> Result<f64, ExprError> {
    let v = eval_inner(e, env)?;
    if !v.is_finite() {
        return Err(ExprError::Domain {
            what: "non-finite result".to_string(),
            at: *env.values().next().unwrap_or(&f64::NAN),
        });
    }
    Ok(v)
}

/// Evaluates an expression of the single variable `t`.
pub fn eval(e: &Expr, t: f64) -> Result<f64, ExprError> {
    let mut env = HashMap::new();
    env.insert("t", t);
    eval_env(e, &env)
}

fn eval_inner(e: &Expr, env: &HashMap<&str, f64>) -> Result<f64, ExprError> {
    let domain = |what: &str, at: f64| ExprError::Domain {
        what: what.to_string(),
        at,
    };
    let check = |v: f64, what: &str, at: f64| {
        if v.is_finite() {
            Ok(v)
        } else {
            Err(domain(what, at))
        }
    };
    match e {
        Expr::Num(v) => Ok(*v),
        Expr::Pi => Ok(std::f64::consts::PI),
        Expr::Var(name) => env
            .get(name.as_str())
            .copied()
            .ok_or_else(|| ExprError::UnknownIdentifier {
                name: name.clone(),
                offset: 0,
            }),
        Expr::Neg(inner) => Ok(-eval_inner(inner, env)?),
        Expr::Bin(op, lhs, rhs) => {
            let a = eval_inner(lhs, env)?;
            let b = eval_inner(rhs, env)?;
            match op {
                BinOp::Add => Ok(a + b),
                BinOp::Sub => Ok(a - b),
                BinOp::Mul => check(a * b, "multiplication overflow", a),
                BinOp::Div => {
                    if b == 0.0 {
                        Err(domain("division by zero", a))
                    } else {
                        check(a / b, "division", a)
                    }
                }
                BinOp::Pow => check(a.powf(b), "power", a),
            }
        }
        Expr::Call(func, arg) => {
            let x = eval_inner(arg, env)?;
            match func {
                Func::Exp => check(x.exp(), "exp overflow", x),
                Func::Log => {
                    if x <= 0.0 {
                        Err(domain("log of non-positive value", x))
                    } else {
                        Ok(x.ln())
                    }
                }
                Func::Sin => Ok(x.sin()),
                Func::Cos => Ok(x.cos()),
                Func::Tan => check(x.tan(), "tan", x),
                Func::Sqrt => {
                    if x < 0.0 {
                        Err(domain("sqrt of negative value", x))
                    } else {
                        Ok(x.sqrt())
                    }
                }
                Func::Cbrt => Ok(x.cbrt()),
            }
        }
    }
}

impl Expr {
    fn precedence(&self) -> u8 {
        match self {
            Expr::Bin(BinOp::Add | BinOp::Sub, ..) => 1,
            Expr::Bin(BinOp::Mul | BinOp::Div, ..) => 2,
            Expr::Bin(BinOp::Pow, ..) => 3,
            Expr::Neg(_) => 4,
            _ => 5,
        }
    }
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fn paren(f: &mut fmt::Formatter<'_>, e: &Expr, min_prec: u8) -> fmt::Result {
            if e.precedence() < min_prec {
                write!(f, "({})", e)
            } else {
                write!(f, "{}", e)
            }
        }
        match self {
            Expr::Num(v) => write!(f, "{}", v),
            Expr::Pi => write!(f, "pi"),
            Expr::Var(name) => write!(f, "{}", name),
            Expr::Neg(inner) => {
                write!(f, "-")?;
                paren(f, inner, 5)
            }
            Expr::Bin(op, lhs, rhs) => {
                let (sym, prec) = match op {
                    BinOp::Add => ("+", 1),
                    BinOp::Sub => ("-", 1),
                    BinOp::Mul => ("*", 2),
                    BinOp::Div => ("/", 2),
                    BinOp::Pow => ("^", 3),
                };
                // left operand needs strictly higher precedence for the
                // right-associative `^` and for `-`/`/` on the right
                match op {
                    BinOp::Pow => {
                        paren(f, lhs, prec + 1)?;
                        write!(f, " {} ", sym)?;
                        paren(f, rhs, prec)
                    }
                    _ => {
                        paren(f, lhs, prec)?;
                        write!(f, " {} ", sym)?;
                        paren(f, rhs, prec + 1)
                    }
                }
            }
            Expr::Call(func, arg) => write!(f, "{}({})", func.name(), arg),
        }
    }
}
