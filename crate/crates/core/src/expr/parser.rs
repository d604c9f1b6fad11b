//! Recursive-descent parser for coordinate expressions.
//!
//! ```text
//! expr    := term (('+' | '-') term)*
//! term    := unary (('*' | '/') unary)*
//! unary   := '-' unary | power
//! power   := primary ('^' unary)?
//! primary := number | 'pi' | 'e' | 'u'<index> | func '(' expr ')' | '(' expr ')'
//! ```
//!
//! `^` binds tighter than unary minus and is right associative; its
//! exponent must not reference any variable. There is no implicit
//! multiplication.

use super::ast::{BinOp, Expr, ExprKind, Func, NamedConst};
use super::ExprError;

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Num(f64),
    Ident(String),
    Plus,
    Minus,
    Star,
    Slash,
    Caret,
    LParen,
    RParen,
    Comma,
    End,
}

impl Tok {
    fn describe(&self) -> String {
        match self {
            Tok::Num(v) => format!("number {v}"),
            Tok::Ident(s) => format!("identifier '{s}'"),
            Tok::Plus => "'+'".into(),
            Tok::Minus => "'-'".into(),
            Tok::Star => "'*'".into(),
            Tok::Slash => "'/'".into(),
            Tok::Caret => "'^'".into(),
            Tok::LParen => "'('".into(),
            Tok::RParen => "')'".into(),
            Tok::Comma => "','".into(),
            Tok::End => "end of input".into(),
        }
    }
}

fn lex(src: &str) -> Result<Vec<(Tok, usize)>, ExprError> {
    let bytes = src.as_bytes();
    let mut out = Vec::new();
    let mut i = 0;
    while i < bytes.len() {
        let c = bytes[i];
        let start = i;
        let tok = match c {
            b' ' | b'\t' | b'\n' | b'\r' => {
                i += 1;
                continue;
            }
            b'+' => Tok::Plus,
            b'-' => Tok::Minus,
            b'*' => Tok::Star,
            b'/' => Tok::Slash,
            b'^' => Tok::Caret,
            b'(' => Tok::LParen,
            b')' => Tok::RParen,
            b',' => Tok::Comma,
            b'0'..=b'9' | b'.' => {
                while i < bytes.len() && (bytes[i].is_ascii_digit() || bytes[i] == b'.') {
                    i += 1;
                }
                // Exponent part only when followed by digits, so "2e" stays
                // a number followed by the identifier `e`.
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
                let v: f64 = text
                    .parse()
                    .ok()
                    .filter(|v: &f64| v.is_finite())
                    .ok_or_else(|| ExprError::Syntax {
                        offset: start,
                        message: format!("malformed number '{text}'"),
                    })?;
                out.push((Tok::Num(v), start));
                continue;
            }
            c if c.is_ascii_alphabetic() || c == b'_' => {
                while i < bytes.len() && (bytes[i].is_ascii_alphanumeric() || bytes[i] == b'_') {
                    i += 1;
                }
                out.push((Tok::Ident(src[start..i].to_string()), start));
                continue;
            }
            _ => {
                let ch = src[start..].chars().next().unwrap_or('?');
                return Err(ExprError::Syntax {
                    offset: start,
                    message: format!("unexpected character '{ch}'"),
                });
            }
        };
        out.push((tok, start));
        i += 1;
    }
    out.push((Tok::End, src.len()));
    Ok(out)
}

struct Parser {
    toks: Vec<(Tok, usize)>,
    pos: usize,
}

impl Parser {
    fn peek(&self) -> &Tok {
        &self.toks[self.pos].0
    }

    fn offset(&self) -> usize {
        self.toks[self.pos].1
    }

    fn bump(&mut self) -> (Tok, usize) {
        let t = self.toks[self.pos].clone();
        if self.pos + 1 < self.toks.len() {
            self.pos += 1;
        }
        t
    }

    fn unexpected(&self, expected: &str) -> ExprError {
        ExprError::Syntax {
            offset: self.offset(),
            message: format!("expected {expected}, found {}", self.peek().describe()),
        }
    }

    fn expr(&mut self) -> Result<Expr, ExprError> {
        let mut lhs = self.term()?;
        loop {
            let op = match self.peek() {
                Tok::Plus => BinOp::Add,
                Tok::Minus => BinOp::Sub,
                _ => return Ok(lhs),
            };
            let (_, off) = self.bump();
            let rhs = self.term()?;
            lhs = Expr::new(ExprKind::Binary(op, Box::new(lhs), Box::new(rhs)), off);
        }
    }

    fn term(&mut self) -> Result<Expr, ExprError> {
        let mut lhs = self.unary()?;
        loop {
            let op = match self.peek() {
                Tok::Star => BinOp::Mul,
                Tok::Slash => BinOp::Div,
                _ => return Ok(lhs),
            };
            let (_, off) = self.bump();
            let rhs = self.unary()?;
            lhs = Expr::new(ExprKind::Binary(op, Box::new(lhs), Box::new(rhs)), off);
        }
    }

    fn unary(&mut self) -> Result<Expr, ExprError> {
        if *self.peek() == Tok::Minus {
            let (_, off) = self.bump();
            let inner = self.unary()?;
            return Ok(Expr::new(ExprKind::Neg(Box::new(inner)), off));
        }
        self.power()
    }

    fn power(&mut self) -> Result<Expr, ExprError> {
        let base = self.primary()?;
        if *self.peek() != Tok::Caret {
            return Ok(base);
        }
        let (_, off) = self.bump();
        let exponent = self.unary()?;
        if let Some((idx, var_off)) = exponent.first_var() {
            return Err(ExprError::Syntax {
                offset: var_off,
                message: format!("exponent must be constant, found variable 'u{idx}'"),
            });
        }
        Ok(Expr::new(ExprKind::Pow(Box::new(base), Box::new(exponent)), off))
    }

    fn primary(&mut self) -> Result<Expr, ExprError> {
        let off = self.offset();
        match self.peek().clone() {
            Tok::Num(v) => {
                self.bump();
                Ok(Expr::new(ExprKind::Num(v), off))
            }
            Tok::LParen => {
                self.bump();
                let inner = self.expr()?;
                if *self.peek() != Tok::RParen {
                    return Err(self.unexpected("')'"));
                }
                self.bump();
                Ok(inner)
            }
            Tok::Ident(name) => {
                self.bump();
                self.identifier(&name, off)
            }
            _ => Err(self.unexpected("expression")),
        }
    }

    fn identifier(&mut self, name: &str, off: usize) -> Result<Expr, ExprError> {
        if let Some(func) = Func::from_name(name) {
            if *self.peek() != Tok::LParen {
                return Err(self.unexpected(&format!("'(' after function '{name}'")));
            }
            self.bump();
            let mut args = Vec::new();
            if *self.peek() != Tok::RParen {
                args.push(self.expr()?);
                while *self.peek() == Tok::Comma {
                    self.bump();
                    args.push(self.expr()?);
                }
            }
            if *self.peek() != Tok::RParen {
                return Err(self.unexpected("',' or ')'"));
            }
            self.bump();
            if args.len() != 1 {
                return Err(ExprError::Arity {
                    offset: off,
                    function: name.to_string(),
                    found: args.len(),
                });
            }
            let arg = args.pop().expect("exactly one argument");
            return Ok(Expr::new(ExprKind::Call(func, Box::new(arg)), off));
        }
        let kind = match name {
            "pi" => ExprKind::Const(NamedConst::Pi),
            "e" => ExprKind::Const(NamedConst::E),
            _ => match variable_index(name) {
                Some(i) => ExprKind::Var(i),
                None => {
                    return Err(ExprError::UnknownIdentifier {
                        offset: off,
                        name: name.to_string(),
                    })
                }
            },
        };
        Ok(Expr::new(kind, off))
    }
}

fn variable_index(name: &str) -> Option<usize> {
    let digits = name.strip_prefix('u')?;
    if digits.is_empty() || digits.starts_with('0') || !digits.bytes().all(|b| b.is_ascii_digit()) {
        return None;
    }
    digits.parse().ok()
}

/// Parses `src` into an expression tree.
pub fn parse(src: &str) -> Result<Expr, ExprError> {
    let mut p = Parser {
        toks: lex(src)?,
        pos: 0,
    };
    let e = p.expr()?;
    if *p.peek() != Tok::End {
        return Err(p.unexpected("operator or end of input"));
    }
    Ok(e)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn call_of_variable() {
        let e = parse("cos(u1)").unwrap();
        assert_eq!(e, Expr::call(Func::Cos, Expr::var(1)));
    }

    #[test]
    fn precedence_is_forced_by_grammar() {
        let e = parse("u1^2 + 4*u2^2 - 1").unwrap();
        let expected = Expr::binary(
            BinOp::Sub,
            Expr::binary(
                BinOp::Add,
                Expr::pow(Expr::var(1), Expr::num(2.0)),
                Expr::binary(BinOp::Mul, Expr::num(4.0), Expr::pow(Expr::var(2), Expr::num(2.0))),
            ),
            Expr::num(1.0),
        );
        assert_eq!(e, expected);
    }

    #[test]
    fn unary_minus_binds_looser_than_power() {
        let e = parse("-u1^2").unwrap();
        assert_eq!(e, Expr::neg(Expr::pow(Expr::var(1), Expr::num(2.0))));
        let e = parse("u1^-2").unwrap();
        assert_eq!(e, Expr::pow(Expr::var(1), Expr::neg(Expr::num(2.0))));
    }

    #[test]
    fn power_is_right_associative() {
        let e = parse("u1^2^3").unwrap();
        assert_eq!(e, Expr::pow(Expr::var(1), Expr::pow(Expr::num(2.0), Expr::num(3.0))));
    }

    #[test]
    fn subtraction_is_left_associative() {
        let e = parse("u1 - u2 - u3").unwrap();
        assert_eq!(
            e,
            Expr::binary(
                BinOp::Sub,
                Expr::binary(BinOp::Sub, Expr::var(1), Expr::var(2)),
                Expr::var(3)
            )
        );
    }

    #[test]
    fn incomplete_input_reports_end_offset() {
        let err = parse("2 +").unwrap_err();
        assert_eq!(err.offset(), 3);
        assert_eq!(
            err.to_string(),
            "syntax error at offset 3: expected expression, found end of input"
        );
    }

    #[test]
    fn implicit_multiplication_rejected() {
        let err = parse("2u1").unwrap_err();
        assert_eq!(
            err.to_string(),
            "syntax error at offset 1: expected operator or end of input, found identifier 'u1'"
        );
    }

    #[test]
    fn unknown_identifier_and_arity() {
        let err = parse("abs(u1)").unwrap_err();
        assert_eq!(err.to_string(), "unknown identifier 'abs' at offset 0");
        let err = parse("1 + sin(u1, u2)").unwrap_err();
        assert_eq!(
            err.to_string(),
            "function 'sin' takes 1 argument, found 2 (at offset 4)"
        );
        assert!(matches!(parse("u0"), Err(ExprError::UnknownIdentifier { .. })));
    }

    #[test]
    fn variable_exponent_rejected() {
        let err = parse("2^u1").unwrap_err();
        assert_eq!(
            err.to_string(),
            "syntax error at offset 2: exponent must be constant, found variable 'u1'"
        );
    }

    #[test]
    fn scientific_literals() {
        assert_eq!(parse("1.5e-3").unwrap(), Expr::num(1.5e-3));
        // `2e` is the literal 2 followed by the constant e: implicit product.
        assert!(parse("2e").is_err());
    }
}
