use std::fmt;

use super::Scalar;
use crate::error::{Error, Result};

/// Smooth univariate functions that can be lifted to jets.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Func {
    Sin,
    Cos,
    Tan,
    Exp,
    Log,
    Sqrt,
    Sinh,
    Cosh,
    Recip,
    Powi(i32),
}

impl Func {
    /// Looks up a single-argument function by its expression-language name.
    pub fn from_name(name: &str) -> Option<Func> {
        Some(match name {
            "sin" => Func::Sin,
            "cos" => Func::Cos,
            "tan" => Func::Tan,
            "exp" => Func::Exp,
            "log" => Func::Log,
            "sqrt" => Func::Sqrt,
            "sinh" => Func::Sinh,
            "cosh" => Func::Cosh,
            "recip" => Func::Recip,
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
            Func::Sinh => "sinh",
            Func::Cosh => "cosh",
            Func::Recip => "recip",
            Func::Powi(_) => "pow",
        }
    }

    /// Evaluates on a real argument. The accepted domain is the one on which
    /// the function and its first two derivatives are finite, so real and
    /// jet evaluation fail at exactly the same points.
    pub fn apply_real(self, x: f64) -> Result<f64> {
        let out = match self {
            Func::Sin => x.sin(),
            Func::Cos => x.cos(),
            Func::Tan => {
                if x.cos() == 0.0 {
                    return Err(Error::domain(format!("tan pole at {x}")));
                }
                x.tan()
            }
            Func::Exp => x.exp(),
            Func::Log => {
                if x <= 0.0 {
                    return Err(Error::domain(format!("log of non-positive value {x}")));
                }
                x.ln()
            }
            Func::Sqrt => {
                if x <= 0.0 {
                    return Err(Error::domain(format!("sqrt of non-positive value {x}")));
                }
                x.sqrt()
            }
            Func::Sinh => x.sinh(),
            Func::Cosh => x.cosh(),
            Func::Recip => {
                if x == 0.0 {
                    return Err(Error::domain("reciprocal of zero"));
                }
                1.0 / x
            }
            Func::Powi(n) => {
                if n < 0 && x == 0.0 {
                    return Err(Error::domain(format!("zero raised to negative power {n}")));
                }
                x.powi(n)
            }
        };
        Ok(out)
    }

    /// Value, first and second derivative at `x`, evaluated in `x`'s own
    /// number system.
    pub(crate) fn derivatives<S: Scalar>(self, x: &S) -> Result<(S, S, S)> {
        Ok(match self {
            Func::Sin => {
                let s = x.lift(Func::Sin)?;
                let c = x.lift(Func::Cos)?;
                (s.clone(), c, -s)
            }
            Func::Cos => {
                let s = x.lift(Func::Sin)?;
                let c = x.lift(Func::Cos)?;
                (c.clone(), -s, -c)
            }
            Func::Tan => {
                let t = x.lift(Func::Tan)?;
                let d1 = t.constant_like(1.0) + t.clone() * t.clone();
                let d2 = (t.clone() * d1.clone()).scale(2.0);
                (t, d1, d2)
            }
            Func::Exp => {
                let e = x.lift(Func::Exp)?;
                (e.clone(), e.clone(), e)
            }
            Func::Log => {
                let r = x.lift(Func::Recip)?;
                (x.lift(Func::Log)?, r.clone(), -(r.clone() * r))
            }
            Func::Sqrt => {
                let s = x.lift(Func::Sqrt)?;
                let d1 = s.lift(Func::Recip)?.scale(0.5);
                let d2 = -(d1.clone() * x.lift(Func::Recip)?).scale(0.5);
                (s, d1, d2)
            }
            Func::Sinh => {
                let sh = x.lift(Func::Sinh)?;
                let ch = x.lift(Func::Cosh)?;
                (sh.clone(), ch, sh)
            }
            Func::Cosh => {
                let sh = x.lift(Func::Sinh)?;
                let ch = x.lift(Func::Cosh)?;
                (ch.clone(), sh, ch)
            }
            Func::Recip => {
                let r = x.lift(Func::Recip)?;
                let r2 = r.clone() * r.clone();
                let r3 = r2.clone() * r.clone();
                (r, -r2, r3.scale(2.0))
            }
            Func::Powi(n) => {
                let f0 = x.lift(Func::Powi(n))?;
                let f1 = if n == 0 {
                    x.zero_like()
                } else {
                    x.lift(Func::Powi(n - 1))?.scale(n as f64)
                };
                let f2 = if n == 0 || n == 1 {
                    x.zero_like()
                } else {
                    x.lift(Func::Powi(n - 2))?.scale((n as f64) * (n as f64 - 1.0))
                };
                (f0, f1, f2)
            }
        })
    }
}

impl fmt::Display for Func {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// `f(a₀) + f′(a₀)·ā + ½f″(a₀)·ā²`, truncated at the order of `a`.
pub fn lift_function<S: Scalar>(f: Func, a: &S) -> Result<S> {
    a.lift(f)
}
