//! The traced theory: Lagrangian and Hamiltonian scalars, the
//! Hamilton–De Donder–Weyl equations, infinitesimal symmetries and
//! their Noether currents, and a discrete Hamilton principle.

use std::f64::consts::PI;

use nalgebra::DMatrix;

use crate::bundles::{metric_iso, KVelocity};
use crate::dynamics::{gradient, state_jets, ForceField, Sopde};
use crate::error::{Error, Result};
use crate::exprlang::{parse, EvalEnv, Expr};
use crate::geometry::{invert, Chart, MetricField};
use crate::jets::{Scalar, TruncatedPolynomial};
use crate::solve::{newton_residual, sheet_prolong, Sheet, SheetResidual};

/// Tolerance of the check `F_α^α = −dU`.
pub const CONSERVATIVE_TOL: f64 = 1e-10;

/// A potential U(q).
#[derive(Debug, Clone, PartialEq)]
pub struct Potential {
    expr: Expr,
}

impl Potential {
    pub fn from_expr(expr: Expr) -> Result<Self> {
        if expr.uses_velocities() {
            return Err(Error::Scenario("a potential may not depend on velocities".into()));
        }
        Ok(Self { expr })
    }

    pub fn parse(chart: &Chart, text: &str) -> Result<Self> {
        Self::from_expr(parse(text, &chart.scope())?)
    }

    pub fn zero() -> Self {
        Self { expr: Expr::num(0.0) }
    }

    pub fn expr(&self) -> &Expr {
        &self.expr
    }

    pub fn eval<S: Scalar>(&self, q: &[S]) -> Result<S> {
        self.expr.eval(&EvalEnv::coords(q))
    }

    /// ∂U/∂qʲ.
    pub fn gradient(&self, q: &[f64]) -> Result<Vec<f64>> {
        let n = q.len();
        let seeds = q
            .iter()
            .enumerate()
            .map(|(i, v)| TruncatedPolynomial::variable(n, 1, *v, i))
            .collect::<Result<Vec<_>>>()?;
        let u = self.eval(&seeds)?;
        Ok((0..n).map(|i| *u.linear(i)).collect())
    }
}

/// A vector field v = vⁱ(q) ∂/∂qⁱ and its prolongation
/// `δ_v = vⁱ ∂/∂qⁱ + v̇ⁱ_α ∂/∂q̇ⁱ_α` with `v̇ⁱ_α = q̇ʲ_α ∂_j vⁱ`.
#[derive(Debug, Clone, PartialEq)]
pub struct ProlongedVector {
    exprs: Vec<Expr>,
}

impl ProlongedVector {
    pub fn from_exprs(exprs: Vec<Expr>) -> Result<Self> {
        if exprs.is_empty() {
            return Err(Error::dim("a vector field needs at least one component"));
        }
        if exprs.iter().any(Expr::uses_velocities) {
            return Err(Error::Scenario("vector field components may not depend on velocities".into()));
        }
        let n = exprs.len();
        if exprs.iter().any(|e| e.max_coord().is_some_and(|i| i >= n)) {
            return Err(Error::dim("vector field component refers to a coordinate outside the chart"));
        }
        Ok(Self { exprs })
    }

    pub fn parse(chart: &Chart, entries: &[String]) -> Result<Self> {
        if entries.len() != chart.dim() {
            return Err(Error::Scenario(format!("vector field needs {} components", chart.dim())));
        }
        let scope = chart.scope();
        Self::from_exprs(entries.iter().map(|s| parse(s, &scope)).collect::<Result<_>>()?)
    }

    pub fn n(&self) -> usize {
        self.exprs.len()
    }

    pub fn scaled(&self, c: f64) -> Self {
        Self { exprs: self.exprs.iter().map(|e| Expr::mul(Expr::num(c), e.clone())).collect() }
    }

    pub fn eval<S: Scalar>(&self, q: &[S]) -> Result<Vec<S>> {
        if q.len() != self.n() {
            return Err(Error::dim("vector field evaluated at a point of the wrong dimension"));
        }
        let env = EvalEnv::coords(q);
        self.exprs.iter().map(|e| e.eval(&env)).collect()
    }

    /// `(vⁱ, ∂_j vⁱ)` at q.
    pub fn jacobian(&self, q: &[f64]) -> Result<(Vec<f64>, DMatrix<f64>)> {
        let n = self.n();
        let seeds = q
            .iter()
            .enumerate()
            .map(|(i, v)| TruncatedPolynomial::variable(n, 1, *v, i))
            .collect::<Result<Vec<_>>>()?;
        let vj = self.eval(&seeds)?;
        let v = vj.iter().map(|c| *c.constant_term()).collect();
        Ok((v, DMatrix::from_fn(n, n, |i, j| *vj[i].linear(j))))
    }

    /// `(vⁱ, v̇ⁱ_α)` at x.
    pub fn at(&self, x: &KVelocity) -> Result<(Vec<f64>, DMatrix<f64>)> {
        let (v, jac) = self.jacobian(x.q())?;
        Ok((v, jac * x.qdot()))
    }

    /// δ_v as n + n·k components ordered like [`KVelocity::coords`].
    pub fn components(&self, x: &KVelocity) -> Result<Vec<f64>> {
        let (mut v, vdot) = self.at(x)?;
        v.extend(vdot.transpose().iter().copied());
        Ok(v)
    }
}

fn check(g: &MetricField, x: &KVelocity) -> Result<()> {
    if g.dim() != x.n() {
        return Err(Error::dim("k-velocity and metric dimensions differ"));
    }
    Ok(())
}

/// H = T + U.
pub fn hamiltonian(g: &MetricField, u: &Potential, x: &KVelocity) -> Result<f64> {
    check(g, x)?;
    Ok(g.k_kinetic_energy(x)? + u.eval(x.q())?)
}

/// L = T − U.
pub fn lagrangian(g: &MetricField, u: &Potential, x: &KVelocity) -> Result<f64> {
    check(g, x)?;
    Ok(g.k_kinetic_energy(x)? - u.eval(x.q())?)
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// dL as n + n·k components.
fn lagrangian_differential(g: &MetricField, u: &Potential, x: &KVelocity) -> Result<Vec<f64>> {
    let (qj, vj) = state_jets(x)?;
    let l = g.k_kinetic_generic(&qj, &vj, x.k())? - u.eval(&qj)?;
    Ok(gradient(&l))
}

/// `(∂H/∂qⁱ, ∂H/∂p_i^α)` for `H = ½ Σ_α g^{ij} p_i^α p_j^α + U` in
/// covelocity coordinates, α contracted with the Euclidean metric of ℝᵏ.
fn hamiltonian_gradient(g: &MetricField, u: &Potential, q: &[f64], p: &DMatrix<f64>) -> Result<(Vec<f64>, DMatrix<f64>)> {
    let (n, k) = p.shape();
    let m = n + n * k;
    let var = |c: usize, v: f64| TruncatedPolynomial::variable(m, 1, v, c);
    let qj = (0..n).map(|i| var(i, q[i])).collect::<Result<Vec<_>>>()?;
    let pj = (0..n * k).map(|c| var(n + c, p[(c / k, c % k)])).collect::<Result<Vec<_>>>()?;
    let ginv = invert(&g.eval_entries(&qj)?, n).map_err(|e| match e {
        Error::DegenerateMetric { det, .. } => Error::DegenerateMetric { point: q.to_vec(), det },
        other => other,
    })?;
    let mut h = u.eval(&qj)?;
    for a in 0..k {
        for i in 0..n {
            for j in 0..n {
                h = h + (ginv[i * n + j].clone() * pj[i * k + a].clone() * pj[j * k + a].clone()).scale(0.5);
            }
        }
    }
    let grad = gradient(&h);
    Ok((grad[..n].to_vec(), DMatrix::from_row_slice(n, k, &grad[n..])))
}

#[derive(Debug, Clone, PartialEq)]
pub struct DdwNode {
    pub node: usize,
    /// `∂qⁱ/∂tᵅ − ∂H/∂p_i^α`.
    pub r_q: DMatrix<f64>,
    /// `Σ_α ∂p_i^α/∂tᵅ + ∂H/∂qⁱ`.
    pub r_p: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DdwResidual {
    pub nodes: Vec<DdwNode>,
    pub max_q: f64,
    pub max_p: f64,
    pub skipped: usize,
}

impl DdwResidual {
    pub fn max(&self) -> f64 {
        self.max_q.max(self.max_p)
    }
}

/// Hamilton–De Donder–Weyl residuals at nodes with a two-node margin.
pub fn ddw_residual(g: &MetricField, u: &Potential, sheet: &Sheet) -> Result<DdwResidual> {
    if sheet.n() != g.dim() {
        return Err(Error::dim("sheet and metric dimensions differ"));
    }
    let grid = sheet.grid();
    let k = sheet.k();
    let momenta = |node: usize| -> Result<DMatrix<f64>> { Ok(metric_iso(g, &sheet_prolong(sheet, node)?)?.p().clone()) };
    let mut out = DdwResidual { nodes: Vec::new(), max_q: 0.0, max_p: 0.0, skipped: 0 };
    for node in 0..grid.len() {
        if !grid.is_interior(node, 2) {
            out.skipped += 1;
            continue;
        }
        let x = sheet_prolong(sheet, node)?;
        let sigma = metric_iso(g, &x)?;
        let (dh_dq, dh_dp) = hamiltonian_gradient(g, u, x.q(), sigma.p())?;
        let r_q = x.qdot() - dh_dp;
        let mut r_p = dh_dq;
        for a in 0..k {
            let h = grid.spacing(a);
            let pp = momenta(grid.shift(node, a, 1).expect("interior"))?;
            let pm = momenta(grid.shift(node, a, -1).expect("interior"))?;
            for (i, r) in r_p.iter_mut().enumerate() {
                *r += (pp[(i, a)] - pm[(i, a)]) / (2.0 * h);
            }
        }
        out.max_q = out.max_q.max(r_q.amax());
        out.max_p = out.max_p.max(r_p.iter().fold(0.0_f64, |m, v| m.max(v.abs())));
        out.nodes.push(DdwNode { node, r_q, r_p });
    }
    Ok(out)
}

/// Largest |Σ_α F_{jαα} + ∂_j U| over the interior nodes of a sheet.
pub fn trace_defect(f: &ForceField, u: &Potential, sheet: &Sheet) -> Result<f64> {
    let mut worst = 0.0_f64;
    for node in 0..sheet.grid().len() {
        if !sheet.grid().is_interior(node, 1) {
            continue;
        }
        let x = sheet_prolong(sheet, node)?;
        let fx = f.eval_at(&x)?;
        let du = u.gradient(x.q())?;
        for (j, duj) in du.iter().enumerate() {
            let tr: f64 = (0..x.k()).map(|a| fx.get(j, a, a)).sum();
            worst = worst.max((tr + duj).abs());
        }
    }
    Ok(worst)
}

/// Newton and DDW residuals of the same sheet.
#[derive(Debug, Clone, PartialEq)]
pub struct NewtonDdwReport {
    pub newton: SheetResidual,
    pub ddw: DdwResidual,
    pub trace_defect: f64,
}

impl NewtonDdwReport {
    pub fn summary(&self) -> (f64, f64) {
        (self.newton.max, self.ddw.max())
    }
}

/// Pairs the Newton residual with the DDW residual. The force trace must be
/// exact, `F_α^α = −dU` (U = 0 when absent), checked at the sheet nodes.
pub fn newton_vs_ddw_report(
    g: &MetricField,
    f: &ForceField,
    u: Option<&Potential>,
    sheet: &Sheet,
) -> Result<NewtonDdwReport> {
    let zero = Potential::zero();
    let u = u.unwrap_or(&zero);
    let defect = trace_defect(f, u, sheet)?;
    if defect > CONSERVATIVE_TOL {
        return Err(Error::pre(format!("force trace is not −dU (defect {defect:e})")));
    }
    Ok(NewtonDdwReport {
        newton: newton_residual(g, f, sheet)?,
        ddw: ddw_residual(g, u, sheet)?,
        trace_defect: defect,
    })
}

/// Both sides of `D_α⟨θ^α, δ_v⟩ = ⟨dT + F_α^α, δ_v⟩` at x, summed over α.
pub fn hamilton_noether_check(
    g: &MetricField,
    f: &ForceField,
    d: &Sopde,
    v: &ProlongedVector,
    x: &KVelocity,
) -> Result<(f64, f64)> {
    check(g, x)?;
    let (n, k) = (x.n(), x.k());
    let (qj, vj) = state_jets(x)?;
    let gj = g.eval_entries(&qj)?;
    let vv = v.eval(&qj)?;
    let a = d.coefficients_at(x)?;
    let mut lhs = 0.0;
    for al in 0..k {
        let mut phi = qj[0].zero_like();
        for i in 0..n {
            for j in 0..n {
                phi = phi + gj[i * n + j].clone() * vj[j * k + al].clone() * vv[i].clone();
            }
        }
        let mut dir = x.column(al);
        for j in 0..n {
            for b in 0..k {
                dir.push(a.get(j, al, b));
            }
        }
        lhs += dot(&gradient(&phi), &dir);
    }
    let delta = v.components(x)?;
    let dt = gradient(&g.k_kinetic_generic(&qj, &vj, k)?);
    let fx = f.eval_at(x)?;
    let mut rhs = dot(&dt, &delta);
    for i in 0..n {
        for al in 0..k {
            rhs += fx.get(i, al, al) * delta[i];
        }
    }
    Ok((lhs, rhs))
}

/// δ_v L at x.
pub fn variation_of_lagrangian(g: &MetricField, u: &Potential, v: &ProlongedVector, x: &KVelocity) -> Result<f64> {
    check(g, x)?;
    Ok(dot(&lagrangian_differential(g, u, x)?, &v.components(x)?))
}

/// max |δ_v L| over the samples.
pub fn symmetry_defect(g: &MetricField, u: &Potential, v: &ProlongedVector, samples: &[KVelocity]) -> Result<f64> {
    let mut worst = 0.0_f64;
    for x in samples {
        worst = worst.max(variation_of_lagrangian(g, u, v, x)?.abs());
    }
    Ok(worst)
}

/// The Noether current `J^α = p_i^α vⁱ` at a node with a one-node margin.
pub fn noether_current(g: &MetricField, v: &ProlongedVector, sheet: &Sheet, node: usize) -> Result<Vec<f64>> {
    let x = sheet_prolong(sheet, node)?;
    let p = metric_iso(g, &x)?.p().clone();
    let vq = v.eval(x.q())?;
    Ok((0..x.k()).map(|a| (0..x.n()).map(|i| p[(i, a)] * vq[i]).sum()).collect())
}

#[derive(Debug, Clone, PartialEq)]
pub struct NoetherDivergence {
    pub nodes: Vec<(usize, f64)>,
    pub max: f64,
    pub skipped: usize,
}

/// Central-difference divergence `Σ_α ∂J^α/∂tᵅ` at nodes with a two-node margin.
pub fn noether_divergence(g: &MetricField, v: &ProlongedVector, sheet: &Sheet) -> Result<NoetherDivergence> {
    if sheet.n() != g.dim() || v.n() != g.dim() {
        return Err(Error::dim("sheet, vector field and metric dimensions differ"));
    }
    let grid = sheet.grid();
    let mut out = NoetherDivergence { nodes: Vec::new(), max: 0.0, skipped: 0 };
    for node in 0..grid.len() {
        if !grid.is_interior(node, 2) {
            out.skipped += 1;
            continue;
        }
        let mut div = 0.0;
        for a in 0..sheet.k() {
            let jp = noether_current(g, v, sheet, grid.shift(node, a, 1).expect("interior"))?;
            let jm = noether_current(g, v, sheet, grid.shift(node, a, -1).expect("interior"))?;
            div += (jp[a] - jm[a]) / (2.0 * grid.spacing(a));
        }
        out.max = out.max.max(div.abs());
        out.nodes.push((node, div));
    }
    Ok(out)
}

/// Scalar factor applied to a variation field over the grid rectangle.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Bump {
    /// b ≡ 1: the field itself must vanish on the boundary.
    One,
    /// b(t) = Π_α sin²(π u_α) with u_α = (tᵅ − lo_α)/(hi_α − lo_α).
    SinSquared,
    /// b(t) = Π_α exp(4 − 1/(u_α(1 − u_α))), flat to all orders at the
    /// boundary, so the trapezoid rule converges faster than any power of h.
    Smooth,
}

impl Bump {
    /// `(b, ∂b/∂tᵅ)`.
    pub fn eval(self, t: &[f64], lower: &[f64], upper: &[f64]) -> (f64, Vec<f64>) {
        let k = t.len();
        // per-axis factor and its derivative in u
        let factor = |u: f64| -> (f64, f64) {
            match self {
                Bump::One => (1.0, 0.0),
                Bump::SinSquared => ((PI * u).sin().powi(2), PI * (2.0 * PI * u).sin()),
                Bump::Smooth => {
                    if u <= 0.0 || u >= 1.0 {
                        return (0.0, 0.0);
                    }
                    let w = u * (1.0 - u);
                    let b = (4.0 - 1.0 / w).exp();
                    (b, b * (1.0 - 2.0 * u) / (w * w))
                }
            }
        };
        let (f, df): (Vec<f64>, Vec<f64>) = (0..k)
            .map(|a| {
                let len = upper[a] - lower[a];
                let (v, d) = factor((t[a] - lower[a]) / len);
                (v, d / len)
            })
            .unzip();
        let b = f.iter().product();
        let grad = (0..k)
            .map(|a| (0..k).map(|c| if c == a { df[c] } else { f[c] }).product())
            .collect();
        (b, grad)
    }
}

/// Second-order first derivatives at every node: central inside, one-sided
/// at the edges.
fn sheet_velocity(sheet: &Sheet, node: usize) -> Result<KVelocity> {
    let grid = sheet.grid();
    let (n, k) = (sheet.n(), sheet.k());
    let mut qdot = DMatrix::zeros(n, k);
    let q = |m: usize| sheet.value(m);
    for a in 0..k {
        let h = grid.spacing(a);
        let s = |o: isize| grid.shift(node, a, o);
        let col: Vec<f64> = match (s(-1), s(1)) {
            (Some(m), Some(p)) => (0..n).map(|i| (q(p)[i] - q(m)[i]) / (2.0 * h)).collect(),
            (None, Some(p)) => {
                let p2 = s(2).expect("at least five nodes");
                (0..n).map(|i| (-3.0 * q(node)[i] + 4.0 * q(p)[i] - q(p2)[i]) / (2.0 * h)).collect()
            }
            (Some(m), None) => {
                let m2 = s(-2).expect("at least five nodes");
                (0..n).map(|i| (3.0 * q(node)[i] - 4.0 * q(m)[i] + q(m2)[i]) / (2.0 * h)).collect()
            }
            (None, None) => unreachable!("grids have at least five nodes per axis"),
        };
        for (i, c) in col.into_iter().enumerate() {
            qdot[(i, a)] = c;
        }
    }
    KVelocity::new(q(node).to_vec(), qdot)
}

/// Trapezoid-rule value of `∫_𝒰 (γ¹)* δL dt` for the variation `V = b·v`
/// over the grid rectangle. V must vanish on the boundary.
pub fn hamilton_principle_defect(
    g: &MetricField,
    u: &Potential,
    sheet: &Sheet,
    v: &ProlongedVector,
    bump: Bump,
) -> Result<f64> {
    if sheet.n() != g.dim() || v.n() != g.dim() {
        return Err(Error::dim("sheet, vector field and metric dimensions differ"));
    }
    let grid = sheet.grid();
    let (n, k) = (sheet.n(), sheet.k());
    let mut total = 0.0;
    for node in 0..grid.len() {
        let t = grid.point(node);
        let (b, db) = bump.eval(&t, grid.lower(), grid.upper());
        let x = sheet_velocity(sheet, node)?;
        let (vq, jac) = v.jacobian(x.q())?;
        if grid.is_boundary(node) {
            let worst = vq.iter().fold(0.0_f64, |m, c| m.max((b * c).abs()));
            if worst > 1e-12 {
                return Err(Error::pre(format!("variation does not vanish on the boundary (|b·v| = {worst:e} at node {node})")));
            }
        }
        let dv = &jac * x.qdot();
        let mut comp: Vec<f64> = vq.iter().map(|c| b * c).collect();
        for i in 0..n {
            for a in 0..k {
                comp.push(db[a] * vq[i] + b * dv[(i, a)]);
            }
        }
        let integrand = dot(&lagrangian_differential(g, u, &x)?, &comp);
        let weight: f64 = grid
            .multi_index(node)
            .iter()
            .enumerate()
            .map(|(a, &i)| {
                let h = grid.spacing(a);
                if i == 0 || i + 1 == grid.nodes()[a] {
                    0.5 * h
                } else {
                    h
                }
            })
            .product();
        total += weight * integrand;
    }
    Ok(total)
}
