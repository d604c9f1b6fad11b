use std::fmt;

/// Built-in unary functions. `abs` is deliberately absent: it is not
/// twice differentiable.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Func {
    Sin,
    Cos,
    Tan,
    Exp,
    Log,
    Sqrt,
}

impl Func {
    pub fn from_name(name: &str) -> Option<Self> {
        Some(match name {
            "sin" => Func::Sin,
            "cos" => Func::Cos,
            "tan" => Func::Tan,
            "exp" => Func::Exp,
            "log" => Func::Log,
            "sqrt" => Func::Sqrt,
            _ => return None,
        })
    }

    pub fn name(self) -> &'static str {
        match self {
            Func::Sin => "sin",
            Func::Cos => "cos",
            Func::Tan => "tan",
            Func::Exp => "exp",
            Func::Log => "log",
            Func::Sqrt => "sqrt",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum NamedConst {
    Pi,
    E,
}

impl NamedConst {
    pub fn value(self) -> f64 {
        match self {
            NamedConst::Pi => std::f64::consts::PI,
            NamedConst::E => std::f64::consts::E,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            NamedConst::Pi => "pi",
            NamedConst::E => "e",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
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

#[derive(Debug, Clone)]
pub enum ExprKind {
    Num(f64),
    Const(NamedConst),
    /// One-based variable index: `u1` is `Var(1)`.
    Var(usize),
    Neg(Box<Expr>),
    Call(Func, Box<Expr>),
    Binary(BinOp, Box<Expr>, Box<Expr>),
    /// Base and a variable-free exponent.
    Pow(Box<Expr>, Box<Expr>),
}

/// A parsed expression node. `offset` is the byte offset in the source
/// text and takes no part in equality, so a tree compares equal to the
/// re-parse of its own pretty-printed form.
#[derive(Debug, Clone)]
pub struct Expr {
    pub kind: ExprKind,
    pub offset: usize,
}

impl PartialEq for Expr {
    fn eq(&self, other: &Self) -> bool {
        use ExprKind::*;
        match (&self.kind, &other.kind) {
            (Num(a), Num(b)) => a.to_bits() == b.to_bits(),
            (Const(a), Const(b)) => a == b,
            (Var(a), Var(b)) => a == b,
            (Neg(a), Neg(b)) => a == b,
            (Call(f, a), Call(g, b)) => f == g && a == b,
            (Binary(o, a, b), Binary(p, c, d)) => o == p && a == c && b == d,
            (Pow(a, b), Pow(c, d)) => a == c && b == d,
            _ => false,
        }
    }
}

impl Expr {
    pub fn new(kind: ExprKind, offset: usize) -> Self {
        Self { kind, offset }
    }

    pub fn num(v: f64) -> Self {
        Self::new(ExprKind::Num(v), 0)
    }

    pub fn var(index: usize) -> Self {
        Self::new(ExprKind::Var(index), 0)
    }

    pub fn call(f: Func, arg: Expr) -> Self {
        Self::new(ExprKind::Call(f, Box::new(arg)), 0)
    }

    pub fn binary(op: BinOp, lhs: Expr, rhs: Expr) -> Self {
        Self::new(ExprKind::Binary(op, Box::new(lhs), Box::new(rhs)), 0)
    }

    #[allow(clippy::should_implement_trait)]
    pub fn neg(inner: Expr) -> Self {
        Self::new(ExprKind::Neg(Box::new(inner)), 0)
    }

    pub fn pow(base: Expr, exponent: Expr) -> Self {
        Self::new(ExprKind::Pow(Box::new(base), Box::new(exponent)), 0)
    }

    /// Largest variable index referenced (0 if none).
    pub fn max_var(&self) -> usize {
        use ExprKind::*;
        match &self.kind {
            Num(_) | Const(_) => 0,
            Var(i) => *i,
            Neg(a) | Call(_, a) => a.max_var(),
            Binary(_, a, b) | Pow(a, b) => a.max_var().max(b.max_var()),
        }
    }

    /// First variable node, if any, as (index, offset).
    pub fn first_var(&self) -> Option<(usize, usize)> {
        use ExprKind::*;
        match &self.kind {
            Num(_) | Const(_) => None,
            Var(i) => Some((*i, self.offset)),
            Neg(a) | Call(_, a) => a.first_var(),
            Binary(_, a, b) | Pow(a, b) => a.first_var().or_else(|| b.first_var()),
        }
    }

    fn precedence(&self) -> u8 {
        match &self.kind {
            ExprKind::Binary(BinOp::Add | BinOp::Sub, ..) => 1,
            ExprKind::Binary(BinOp::Mul | BinOp::Div, ..) => 2,
            ExprKind::Neg(_) => 3,
            ExprKind::Pow(..) => 4,
            _ => 5,
        }
    }
}

fn write_wrapped(f: &mut fmt::Formatter<'_>, e: &Expr, wrap: bool) -> fmt::Result {
    if wrap {
        write!(f, "({e})")
    } else {
        write!(f, "{e}")
    }
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.kind {
            // Shortest representation that round-trips; always non-negative
            // because the parser produces negation as a separate node.
            ExprKind::Num(v) => write!(f, "{v:?}"),
            ExprKind::Const(c) => f.write_str(c.name()),
            ExprKind::Var(i) => write!(f, "u{i}"),
            ExprKind::Neg(a) => {
                f.write_str("-")?;
                write_wrapped(f, a, a.precedence() < 3)
            }
            ExprKind::Call(func, a) => write!(f, "{}({a})", func.name()),
            ExprKind::Binary(op, a, b) => {
                let prec = self.precedence();
                write_wrapped(f, a, a.precedence() < prec)?;
                write!(f, " {} ", op.symbol())?;
                write_wrapped(f, b, b.precedence() <= prec)
            }
            ExprKind::Pow(a, b) => {
                write_wrapped(f, a, a.precedence() < 5)?;
                f.write_str("^")?;
                write_wrapped(f, b, b.precedence() < 3)
            }
        }
    }
}
