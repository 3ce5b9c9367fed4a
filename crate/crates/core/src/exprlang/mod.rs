//! Expression language for metric components, potentials, force
//! coefficients and vector fields.
//!
//! Grammar (whitespace insignificant, no implicit multiplication):
//!
//! ```text
//! expr   := term (('+' | '-') term)*
//! term   := unary (('*' | '/') unary)*
//! unary  := '-' unary | power
//! power  := atom ('^' int)*          // right associative, integer exponents
//! atom   := number | name | 'qd' '(' int ',' int ')'
//!         | func '(' expr ')' | 'pow' '(' expr ',' int ')' | '(' expr ')'
//! int    := '-'? digits
//! ```
//!
//! `-q1^2` parses as `-(q1^2)`. Functions: sin cos tan exp log sqrt sinh
//! cosh recip, plus `pow(e, n)`. Velocity variables `qd(i, a)` (1-based)
//! are only accepted where the scope allows them.

mod eval;
mod lexer;
mod parser;

use std::fmt;

use crate::jets::Func;

pub use eval::EvalEnv;
pub use parser::parse;

/// Binary operators.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BinOp {
    Add,
    Sub,
    Mul,
    Div,
}

impl BinOp {
    fn symbol(self) -> char {
        match self {
            BinOp::Add => '+',
            BinOp::Sub => '-',
            BinOp::Mul => '*',
            BinOp::Div => '/',
        }
    }
}

/// Expression tree. Coordinate and velocity indices are 0-based.
#[derive(Debug, Clone, PartialEq)]
pub enum Expr {
    Num(f64),
    Coord(usize),
    Vel { i: usize, a: usize },
    Neg(Box<Expr>),
    Binary(BinOp, Box<Expr>, Box<Expr>),
    Pow(Box<Expr>, i32),
    Call(Func, Box<Expr>),
}

/// Names an expression may refer to.
#[derive(Debug, Clone, PartialEq)]
pub struct Scope {
    pub names: Vec<String>,
    /// `Some(k)` when velocity variables `qd(i, a)` with `a ≤ k` are allowed.
    pub velocities: Option<usize>,
}

impl Scope {
    pub fn coords(names: Vec<String>) -> Self {
        Self { names, velocities: None }
    }

    pub fn with_velocities(names: Vec<String>, k: usize) -> Self {
        Self { names, velocities: Some(k) }
    }

    /// `q1..qn`.
    pub fn standard(n: usize) -> Self {
        Self::coords((1..=n).map(|i| format!("q{i}")).collect())
    }
}

impl Expr {
    pub fn num(v: f64) -> Self {
        Expr::Num(v)
    }

    pub fn coord(i: usize) -> Self {
        Expr::Coord(i)
    }

    pub fn add(a: Expr, b: Expr) -> Self {
        Expr::Binary(BinOp::Add, Box::new(a), Box::new(b))
    }

    pub fn sub(a: Expr, b: Expr) -> Self {
        Expr::Binary(BinOp::Sub, Box::new(a), Box::new(b))
    }

    pub fn mul(a: Expr, b: Expr) -> Self {
        Expr::Binary(BinOp::Mul, Box::new(a), Box::new(b))
    }

    pub fn div(a: Expr, b: Expr) -> Self {
        Expr::Binary(BinOp::Div, Box::new(a), Box::new(b))
    }

    pub fn pow(a: Expr, n: i32) -> Self {
        Expr::Pow(Box::new(a), n)
    }

    pub fn call(f: Func, a: Expr) -> Self {
        Expr::Call(f, Box::new(a))
    }

    fn any(&self, pred: &dyn Fn(&Expr) -> bool) -> bool {
        if pred(self) {
            return true;
        }
        match self {
            Expr::Num(_) | Expr::Coord(_) | Expr::Vel { .. } => false,
            Expr::Neg(a) | Expr::Pow(a, _) | Expr::Call(_, a) => a.any(pred),
            Expr::Binary(_, a, b) => a.any(pred) || b.any(pred),
        }
    }

    pub fn uses_velocities(&self) -> bool {
        self.any(&|e| matches!(e, Expr::Vel { .. }))
    }

    /// True when the expression references no variables at all.
    pub fn is_constant(&self) -> bool {
        !self.any(&|e| matches!(e, Expr::Coord(_) | Expr::Vel { .. }))
    }

    /// Largest coordinate index referenced, if any.
    pub fn max_coord(&self) -> Option<usize> {
        match self {
            Expr::Coord(i) => Some(*i),
            Expr::Vel { i, .. } => Some(*i),
            Expr::Num(_) => None,
            Expr::Neg(a) | Expr::Pow(a, _) | Expr::Call(_, a) => a.max_coord(),
            Expr::Binary(_, a, b) => a.max_coord().max(b.max_coord()),
        }
    }

    /// Renumbers coordinates `i ↦ i + offset` (used for product metrics).
    pub fn shift_coords(&self, offset: usize) -> Expr {
        match self {
            Expr::Coord(i) => Expr::Coord(i + offset),
            Expr::Vel { i, a } => Expr::Vel { i: i + offset, a: *a },
            Expr::Num(v) => Expr::Num(*v),
            Expr::Neg(a) => Expr::Neg(Box::new(a.shift_coords(offset))),
            Expr::Pow(a, n) => Expr::Pow(Box::new(a.shift_coords(offset)), *n),
            Expr::Call(f, a) => Expr::Call(*f, Box::new(a.shift_coords(offset))),
            Expr::Binary(op, a, b) => {
                Expr::Binary(*op, Box::new(a.shift_coords(offset)), Box::new(b.shift_coords(offset)))
            }
        }
    }

    /// Fully parenthesized rendering using the names of `scope`; parsing
    /// the result with the same scope gives back an identical tree.
    pub fn display<'a>(&'a self, scope: &'a Scope) -> ExprDisplay<'a> {
        ExprDisplay { expr: self, scope }
    }
}

pub struct ExprDisplay<'a> {
    expr: &'a Expr,
    scope: &'a Scope,
}

impl<'a> fmt::Display for ExprDisplay<'a> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let sub = |e: &'a Expr| ExprDisplay { expr: e, scope: self.scope };
        match self.expr {
            Expr::Num(v) => write!(f, "{v:?}"),
            Expr::Coord(i) => match self.scope.names.get(*i) {
                Some(name) => f.write_str(name),
                None => write!(f, "q{}", i + 1),
            },
            Expr::Vel { i, a } => write!(f, "qd({},{})", i + 1, a + 1),
            Expr::Neg(a) => write!(f, "(-{})", sub(a)),
            Expr::Binary(op, a, b) => write!(f, "({}{}{})", sub(a), op.symbol(), sub(b)),
            Expr::Pow(a, n) => write!(f, "({}^{})", sub(a), n),
            Expr::Call(func, a) => write!(f, "{}({})", func.name(), sub(a)),
        }
    }
}
