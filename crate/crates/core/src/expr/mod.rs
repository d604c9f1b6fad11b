//! Coordinate expressions: parsing, pretty-printing and hyper-dual
//! evaluation.

mod ast;
mod hyperdual;
mod parser;

pub use ast::{BinOp, Expr, ExprKind, Func, NamedConst};
pub use hyperdual::HyperDual;
pub use parser::parse;

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ExprError {
    #[error("syntax error at offset {offset}: {message}")]
    Syntax { offset: usize, message: String },
    #[error("unknown identifier '{name}' at offset {offset}")]
    UnknownIdentifier { offset: usize, name: String },
    #[error("function '{function}' takes 1 argument, found {found} (at offset {offset})")]
    Arity {
        offset: usize,
        function: String,
        found: usize,
    },
    #[error("variable 'u{index}' at offset {offset} exceeds dimension {dim}")]
    VariableOutOfRange { offset: usize, index: usize, dim: usize },
    #[error("domain error at offset {offset}: {message}")]
    Domain { offset: usize, message: String },
}

impl ExprError {
    pub fn offset(&self) -> usize {
        match self {
            ExprError::Syntax { offset, .. }
            | ExprError::UnknownIdentifier { offset, .. }
            | ExprError::Arity { offset, .. }
            | ExprError::VariableOutOfRange { offset, .. }
            | ExprError::Domain { offset, .. } => *offset,
        }
    }
}

/// Checks that every variable index is at most `dim`.
pub fn check_dimension(expr: &Expr, dim: usize) -> Result<(), ExprError> {
    fn walk(e: &Expr, dim: usize) -> Result<(), ExprError> {
        match &e.kind {
            ExprKind::Var(i) if *i > dim => Err(ExprError::VariableOutOfRange {
                offset: e.offset,
                index: *i,
                dim,
            }),
            ExprKind::Num(_) | ExprKind::Const(_) | ExprKind::Var(_) => Ok(()),
            ExprKind::Neg(a) | ExprKind::Call(_, a) => walk(a, dim),
            ExprKind::Binary(_, a, b) | ExprKind::Pow(a, b) => {
                walk(a, dim)?;
                walk(b, dim)
            }
        }
    }
    walk(expr, dim)
}

fn domain(offset: usize, message: &str) -> ExprError {
    ExprError::Domain {
        offset,
        message: message.to_string(),
    }
}

/// Evaluates `expr` at `u` with direction 1 seeded on coordinate `i` and
/// direction 2 on coordinate `j` (both zero-based), returning
/// `(f, ∂ᵢf, ∂ⱼf, ∂ᵢ∂ⱼf)`.
pub fn eval_jet(expr: &Expr, u: &[f64], i: usize, j: usize) -> Result<HyperDual, ExprError> {
    eval_with(expr, &|idx| {
        let k = idx - 1;
        HyperDual::variable(u[k], k == i, k == j)
    })
}

/// Plain evaluation without derivatives.
pub fn eval(expr: &Expr, u: &[f64]) -> Result<f64, ExprError> {
    eval_with(expr, &|idx| HyperDual::constant(u[idx - 1])).map(|h| h.value)
}

fn eval_with(expr: &Expr, var: &dyn Fn(usize) -> HyperDual) -> Result<HyperDual, ExprError> {
    let off = expr.offset;
    Ok(match &expr.kind {
        ExprKind::Num(v) => HyperDual::constant(*v),
        ExprKind::Const(c) => HyperDual::constant(c.value()),
        ExprKind::Var(i) => var(*i),
        ExprKind::Neg(a) => -eval_with(a, var)?,
        ExprKind::Call(f, a) => {
            let x = eval_with(a, var)?;
            match f {
                Func::Sin => x.sin(),
                Func::Cos => x.cos(),
                Func::Tan => {
                    if x.value.cos() == 0.0 {
                        return Err(domain(off, "tan at a pole"));
                    }
                    x.tan()
                }
                Func::Exp => x.exp(),
                Func::Log => {
                    if x.value <= 0.0 {
                        return Err(domain(off, "log of non-positive value"));
                    }
                    x.ln()
                }
                Func::Sqrt => {
                    if x.value <= 0.0 {
                        return Err(domain(off, "sqrt of non-positive value"));
                    }
                    x.sqrt()
                }
            }
        }
        ExprKind::Binary(op, a, b) => {
            let x = eval_with(a, var)?;
            let y = eval_with(b, var)?;
            match op {
                BinOp::Add => x + y,
                BinOp::Sub => x - y,
                BinOp::Mul => x * y,
                BinOp::Div => {
                    if y.value == 0.0 {
                        return Err(domain(off, "division by zero"));
                    }
                    x / y
                }
            }
        }
        ExprKind::Pow(a, b) => {
            let base = eval_with(a, var)?;
            // The exponent is variable-free, so only its value matters.
            let p = eval_with(b, var)?.value;
            if p.fract() == 0.0 && p.abs() <= f64::from(i32::MAX) {
                if base.value == 0.0 && p < 0.0 {
                    return Err(domain(off, "zero raised to a negative power"));
                }
                base.powi(p as i32)
            } else {
                if base.value <= 0.0 {
                    return Err(domain(off, "non-integer power of non-positive base"));
                }
                base.powf(p)
            }
        }
    })
}
