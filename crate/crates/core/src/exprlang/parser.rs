use super::lexer::{syntax, tokenize, Tok, Token};
use super::{BinOp, Expr, Scope};
use crate::error::{Error, Result};
use crate::jets::Func;

const UNARY_BP: u8 = 5;
const POW_BP: u8 = 7;

/// Parses `text` against the variable names of `scope`.
pub fn parse(text: &str, scope: &Scope) -> Result<Expr> {
    if text.trim().is_empty() {
        return Err(syntax(0, "empty expression"));
    }
    let tokens = tokenize(text)?;
    let mut p = Parser { tokens, pos: 0, scope };
    let e = p.expr(0)?;
    let t = p.peek();
    if t.tok != Tok::Eof {
        return Err(syntax(t.offset, "unexpected trailing input"));
    }
    Ok(e)
}

struct Parser<'s> {
    tokens: Vec<Token>,
    pos: usize,
    scope: &'s Scope,
}

fn infix_bp(tok: &Tok) -> Option<(BinOp, u8, u8)> {
    Some(match tok {
        Tok::Plus => (BinOp::Add, 1, 2),
        Tok::Minus => (BinOp::Sub, 1, 2),
        Tok::Star => (BinOp::Mul, 3, 4),
        Tok::Slash => (BinOp::Div, 3, 4),
        _ => return None,
    })
}

fn starts_operand(tok: &Tok) -> bool {
    matches!(tok, Tok::Num(_) | Tok::Int(_) | Tok::Minus | Tok::LParen | Tok::Ident(_))
}

impl Parser<'_> {
    fn peek(&self) -> &Token {
        &self.tokens[self.pos]
    }

    fn next(&mut self) -> Token {
        let t = self.tokens[self.pos].clone();
        if t.tok != Tok::Eof {
            self.pos += 1;
        }
        t
    }

    fn expect(&mut self, tok: Tok, what: &str) -> Result<Token> {
        let t = self.next();
        if t.tok != tok {
            return Err(syntax(t.offset, format!("expected {what}")));
        }
        Ok(t)
    }

    fn expr(&mut self, min_bp: u8) -> Result<Expr> {
        let mut lhs = self.prefix()?;
        loop {
            let t = self.peek().clone();
            if t.tok == Tok::Caret {
                if POW_BP < min_bp {
                    break;
                }
                self.next();
                let n = self.exponent()?;
                lhs = Expr::Pow(Box::new(lhs), n);
                continue;
            }
            let Some((op, l_bp, r_bp)) = infix_bp(&t.tok) else { break };
            if l_bp < min_bp {
                break;
            }
            self.next();
            if !starts_operand(&self.peek().tok) {
                return Err(syntax(t.offset, "operator is missing its right operand"));
            }
            let rhs = self.expr(r_bp)?;
            lhs = Expr::Binary(op, Box::new(lhs), Box::new(rhs));
        }
        Ok(lhs)
    }

    fn prefix(&mut self) -> Result<Expr> {
        let t = self.next();
        match t.tok {
            Tok::Num(v) => Ok(Expr::Num(v)),
            Tok::Int(v) => Ok(Expr::Num(v as f64)),
            Tok::Minus => Ok(Expr::Neg(Box::new(self.expr(UNARY_BP)?))),
            Tok::LParen => {
                let e = self.expr(0)?;
                self.expect(Tok::RParen, "`)`")?;
                Ok(e)
            }
            Tok::Ident(name) => self.identifier(name, t.offset),
            Tok::Eof => Err(syntax(t.offset, "unexpected end of input")),
            _ => Err(syntax(t.offset, "expected an operand")),
        }
    }

    fn identifier(&mut self, name: String, offset: usize) -> Result<Expr> {
        if let Some(i) = self.scope.names.iter().position(|n| *n == name) {
            return Ok(Expr::Coord(i));
        }
        if name == "qd" {
            return self.velocity(offset);
        }
        if name == "pow" {
            self.expect(Tok::LParen, "`(` after `pow`")?;
            let base = self.expr(0)?;
            self.expect(Tok::Comma, "`,` in pow(base, n)")?;
            let n = self.signed_int()?;
            self.expect(Tok::RParen, "`)`")?;
            return Ok(Expr::Pow(Box::new(base), n));
        }
        if let Some(f) = Func::from_name(&name) {
            self.expect(Tok::LParen, &format!("`(` after `{name}`"))?;
            let arg = self.expr(0)?;
            self.expect(Tok::RParen, "`)`")?;
            return Ok(Expr::Call(f, Box::new(arg)));
        }
        Err(Error::UnknownIdentifier { name, offset })
    }

    fn velocity(&mut self, offset: usize) -> Result<Expr> {
        let Some(k) = self.scope.velocities else {
            return Err(syntax(offset, "velocity variables are not allowed in this expression"));
        };
        let n = self.scope.names.len();
        self.expect(Tok::LParen, "`(` after `qd`")?;
        let it = self.next();
        let Tok::Int(i) = it.tok else { return Err(syntax(it.offset, "expected coordinate index")) };
        self.expect(Tok::Comma, "`,`")?;
        let at = self.next();
        let Tok::Int(a) = at.tok else { return Err(syntax(at.offset, "expected slot index")) };
        self.expect(Tok::RParen, "`)`")?;
        if i < 1 || i as usize > n {
            return Err(syntax(it.offset, format!("coordinate index {i} outside 1..={n}")));
        }
        if a < 1 || a as usize > k {
            return Err(syntax(at.offset, format!("slot index {a} outside 1..={k}")));
        }
        Ok(Expr::Vel { i: i as usize - 1, a: a as usize - 1 })
    }

    fn signed_int(&mut self) -> Result<i32> {
        let mut sign = 1i64;
        if self.peek().tok == Tok::Minus {
            self.next();
            sign = -1;
        }
        let t = self.next();
        match t.tok {
            Tok::Int(v) => i32::try_from(sign * v).map_err(|_| syntax(t.offset, "exponent out of range")),
            _ => Err(syntax(t.offset, "exponent must be an integer literal")),
        }
    }

    /// `int ('^' exponent)?`, folded right to left.
    fn exponent(&mut self) -> Result<i32> {
        let base = self.signed_int()?;
        if self.peek().tok != Tok::Caret {
            return Ok(base);
        }
        let at = self.next().offset;
        let e = self.exponent()?;
        if e < 0 {
            return Err(syntax(at, "integer exponent of an exponent must be non-negative"));
        }
        (base as i64)
            .checked_pow(e as u32)
            .and_then(|v| i32::try_from(v).ok())
            .ok_or_else(|| syntax(at, "exponent out of range"))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn scope2() -> Scope {
        Scope::standard(2)
    }

    #[test]
    fn function_times_power() {
        let e = parse("sin(q1)*q2^2", &scope2()).unwrap();
        assert_eq!(e, Expr::mul(Expr::call(Func::Sin, Expr::coord(0)), Expr::pow(Expr::coord(1), 2)));
    }

    #[test]
    fn malformed_reports_offset() {
        match parse("q1 +* q2", &scope2()) {
            Err(Error::Syntax { offset, .. }) => assert_eq!(offset, 3),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn unary_minus_below_power() {
        let e = parse("-q1^2", &scope2()).unwrap();
        assert_eq!(e, Expr::Neg(Box::new(Expr::pow(Expr::coord(0), 2))));
        let e = parse("-q1*q2", &scope2()).unwrap();
        assert_eq!(e, Expr::mul(Expr::Neg(Box::new(Expr::coord(0))), Expr::coord(1)));
    }

    #[test]
    fn left_and_right_associativity() {
        let e = parse("q1-q2-1", &scope2()).unwrap();
        assert_eq!(e, Expr::sub(Expr::sub(Expr::coord(0), Expr::coord(1)), Expr::num(1.0)));
        let e = parse("q1^2^3", &scope2()).unwrap();
        assert_eq!(e, Expr::pow(Expr::coord(0), 8));
        let e = parse("q1^-2", &scope2()).unwrap();
        assert_eq!(e, Expr::pow(Expr::coord(0), -2));
    }

    #[test]
    fn unknown_identifier() {
        match parse("q1 + theta", &scope2()) {
            Err(Error::UnknownIdentifier { name, offset }) => {
                assert_eq!(name, "theta");
                assert_eq!(offset, 5);
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn velocities_need_permission() {
        assert!(parse("qd(1,2)", &scope2()).is_err());
        let s = Scope::with_velocities(vec!["q1".into(), "q2".into()], 2);
        assert_eq!(parse("qd(2,1)", &s).unwrap(), Expr::Vel { i: 1, a: 0 });
        assert!(parse("qd(3,1)", &s).is_err());
        assert!(parse("qd(1,3)", &s).is_err());
    }

    #[test]
    fn fractional_exponent_rejected() {
        assert!(parse("q1^0.5", &scope2()).is_err());
        assert!(parse("q1^q2", &scope2()).is_err());
    }

    #[test]
    fn misc_errors() {
        assert!(parse("", &scope2()).is_err());
        assert!(parse("(q1", &scope2()).is_err());
        assert!(parse("q1 q2", &scope2()).is_err());
        assert!(parse("sin q1", &scope2()).is_err());
        assert!(parse("q1 $ 2", &scope2()).is_err());
    }

    #[test]
    fn pow_call_and_scientific_literals() {
        let e = parse("pow(q1, -3) + 1.5e-3", &scope2()).unwrap();
        assert_eq!(e, Expr::add(Expr::pow(Expr::coord(0), -3), Expr::num(1.5e-3)));
    }

    #[test]
    fn custom_names() {
        let s = Scope::coords(vec!["theta".into(), "phi".into()]);
        let e = parse("sin(theta)^2", &s).unwrap();
        assert_eq!(e, Expr::pow(Expr::call(Func::Sin, Expr::coord(0)), 2));
        assert_eq!(e.display(&s).to_string(), "(sin(theta)^2)");
    }
}
