use super::{BinOp, Expr};
use crate::error::{Error, Result};
use crate::jets::{Func, Scalar};

/// Variable bindings for one evaluation: coordinates and, optionally, the
/// velocity matrix `q̇ⁱ_α` stored row-major (`i·k + α`).
#[derive(Debug, Clone, Copy)]
pub struct EvalEnv<'a, S> {
    pub coords: &'a [S],
    pub velocities: Option<(&'a [S], usize)>,
}

impl<'a, S: Scalar> EvalEnv<'a, S> {
    pub fn coords(coords: &'a [S]) -> Self {
        Self { coords, velocities: None }
    }

    pub fn with_velocities(coords: &'a [S], qdot: &'a [S], k: usize) -> Self {
        Self { coords, velocities: Some((qdot, k)) }
    }

    fn template(&self) -> Result<&S> {
        self.coords
            .first()
            .ok_or_else(|| Error::Unbound("no coordinates bound".into()))
    }
}

impl Expr {
    /// Evaluates in the number system of the bindings.
    pub fn eval<S: Scalar>(&self, env: &EvalEnv<'_, S>) -> Result<S> {
        Ok(match self {
            Expr::Num(v) => env.template()?.constant_like(*v),
            Expr::Coord(i) => env
                .coords
                .get(*i)
                .cloned()
                .ok_or_else(|| Error::Unbound(format!("coordinate q{}", i + 1)))?,
            Expr::Vel { i, a } => {
                let (qdot, k) = env
                    .velocities
                    .ok_or_else(|| Error::Unbound(format!("velocity qd({},{})", i + 1, a + 1)))?;
                if *a >= k {
                    return Err(Error::Unbound(format!("velocity qd({},{})", i + 1, a + 1)));
                }
                qdot.get(i * k + a)
                    .cloned()
                    .ok_or_else(|| Error::Unbound(format!("velocity qd({},{})", i + 1, a + 1)))?
            }
            Expr::Neg(a) => -a.eval(env)?,
            Expr::Binary(op, a, b) => {
                let x = a.eval(env)?;
                let y = b.eval(env)?;
                match op {
                    BinOp::Add => x + y,
                    BinOp::Sub => x - y,
                    BinOp::Mul => x * y,
                    BinOp::Div => x.try_div(&y)?,
                }
            }
            Expr::Pow(a, n) => a.eval(env)?.lift(Func::Powi(*n))?,
            Expr::Call(f, a) => a.eval(env)?.lift(*f)?,
        })
    }

    /// Real value of a variable-free expression.
    pub fn const_value(&self) -> Result<f64> {
        if !self.is_constant() {
            return Err(Error::pre("expression is not constant"));
        }
        self.eval(&EvalEnv::coords(&[0.0]))
    }
}
