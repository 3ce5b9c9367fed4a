//! Charts, pseudo-Riemannian metrics, Levi-Civita connection coefficients
//! and kinetic energies.
//!
//! Metric derivatives are never approximated: components are evaluated on
//! first-order jets seeded with one generator per coordinate, and the
//! coefficient of εᵐ is ∂_m g_ij.

use nalgebra::DMatrix;

use crate::bundles::KVelocity;
use crate::error::{Error, Result};
use crate::exprlang::{parse, EvalEnv, Expr, Scope};
use crate::jets::{Func, Scalar, TruncatedPolynomial};

const RESERVED: &[&str] = &["qd", "pow", "sin", "cos", "tan", "exp", "log", "sqrt", "sinh", "cosh", "recip"];

/// Relative determinant threshold below which a metric counts as degenerate.
pub const DEGENERACY_TOL: f64 = 1e-12;

/// A single coordinate chart with named coordinates.
#[derive(Debug, Clone, PartialEq)]
pub struct Chart {
    names: Vec<String>,
}

impl Chart {
    /// Coordinates `q1..qn`.
    pub fn standard(n: usize) -> Self {
        Self { names: (1..=n).map(|i| format!("q{i}")).collect() }
    }

    pub fn new(names: Vec<String>) -> Result<Self> {
        if names.is_empty() {
            return Err(Error::dim("a chart needs at least one coordinate"));
        }
        for (i, name) in names.iter().enumerate() {
            let valid = name.chars().next().is_some_and(|c| c.is_ascii_alphabetic() || c == '_')
                && name.chars().all(|c| c.is_ascii_alphanumeric() || c == '_');
            if !valid || RESERVED.contains(&name.as_str()) {
                return Err(Error::Scenario(format!("invalid coordinate name `{name}`")));
            }
            if names[..i].contains(name) {
                return Err(Error::Scenario(format!("duplicate coordinate name `{name}`")));
            }
        }
        Ok(Self { names })
    }

    pub fn dim(&self) -> usize {
        self.names.len()
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn scope(&self) -> Scope {
        Scope::coords(self.names.clone())
    }

    pub fn scope_with_velocities(&self, k: usize) -> Scope {
        Scope::with_velocities(self.names.clone(), k)
    }
}

/// Metric and inverse at a point.
#[derive(Debug, Clone, PartialEq)]
pub struct MetricAtPoint {
    pub g: DMatrix<f64>,
    pub inv: DMatrix<f64>,
}

/// Christoffel symbols Γ^l_ij at a base point.
#[derive(Debug, Clone, PartialEq)]
pub struct ChristoffelTensor {
    q: Vec<f64>,
    gamma: Vec<f64>,
}

impl ChristoffelTensor {
    pub fn q(&self) -> &[f64] {
        &self.q
    }

    pub fn n(&self) -> usize {
        self.q.len()
    }

    /// Γ^l_ij.
    pub fn get(&self, l: usize, i: usize, j: usize) -> f64 {
        let n = self.n();
        self.gamma[(l * n + i) * n + j]
    }

    /// −Γ^l_ij uⁱ wʲ.
    pub fn contract(&self, u: &[f64], w: &[f64]) -> Vec<f64> {
        let n = self.n();
        (0..n)
            .map(|l| {
                let mut s = 0.0;
                for i in 0..n {
                    for j in 0..n {
                        s += self.get(l, i, j) * u[i] * w[j];
                    }
                }
                -s
            })
            .collect()
    }
}

/// Metric, inverse, first derivatives and Christoffel symbols evaluated in
/// an arbitrary number system. Flat storage: `g[i·n + j]`,
/// `dg[(i·n + j)·n + m] = ∂_m g_ij`, `gamma[(l·n + i)·n + j] = Γ^l_ij`.
#[derive(Debug, Clone)]
pub struct Connection<S> {
    pub g: Vec<S>,
    pub ginv: Vec<S>,
    pub dg: Vec<S>,
    pub gamma: Vec<S>,
}

/// A pseudo-Riemannian metric g = g_ij dqⁱ dqʲ of any signature.
#[derive(Debug, Clone, PartialEq)]
pub struct MetricField {
    chart: Chart,
    entries: Vec<Expr>,
    tree_symmetric: bool,
    label: String,
}

fn diag(n: usize, f: impl Fn(usize) -> Expr) -> Vec<Expr> {
    let mut out = Vec::with_capacity(n * n);
    for i in 0..n {
        for j in 0..n {
            out.push(if i == j { f(i) } else { Expr::num(0.0) });
        }
    }
    out
}

impl MetricField {
    /// Custom metric from `n × n` component expressions (row-major).
    pub fn from_exprs(chart: Chart, entries: Vec<Expr>, label: impl Into<String>) -> Result<Self> {
        let n = chart.dim();
        if entries.len() != n * n {
            return Err(Error::dim(format!("metric needs {} components, got {}", n * n, entries.len())));
        }
        for e in &entries {
            if e.uses_velocities() {
                return Err(Error::Scenario("metric components may not depend on velocities".into()));
            }
            if e.max_coord().is_some_and(|i| i >= n) {
                return Err(Error::dim("metric component refers to a coordinate outside the chart"));
            }
        }
        let tree_symmetric = (0..n).all(|i| (0..i).all(|j| entries[i * n + j] == entries[j * n + i]));
        Ok(Self { chart, entries, tree_symmetric, label: label.into() })
    }

    /// Custom metric from component strings.
    pub fn parse(chart: Chart, rows: &[Vec<String>]) -> Result<Self> {
        let n = chart.dim();
        if rows.len() != n || rows.iter().any(|r| r.len() != n) {
            return Err(Error::Scenario(format!("metric must be an {n}×{n} array of expressions")));
        }
        let scope = chart.scope();
        let entries = rows
            .iter()
            .flatten()
            .map(|s| parse(s, &scope))
            .collect::<Result<Vec<_>>>()?;
        Self::from_exprs(chart, entries, "custom")
    }

    /// Euclidean metric on ℝⁿ.
    pub fn flat(n: usize) -> Self {
        Self::from_exprs(Chart::standard(n), diag(n, |_| Expr::num(1.0)), format!("flat({n})"))
            .expect("well-formed")
    }

    /// diag(−1, 1, …, 1) on ℝⁿ.
    pub fn minkowski(n: usize) -> Self {
        let entries = diag(n, |i| Expr::num(if i == 0 { -1.0 } else { 1.0 }));
        Self::from_exprs(Chart::standard(n), entries, format!("minkowski({n})")).expect("well-formed")
    }

    /// Round sphere of radius r in chart (θ, φ): diag(r², r² sin²θ).
    pub fn sphere(radius: f64) -> Self {
        let r2 = radius * radius;
        let entries = vec![
            Expr::num(r2),
            Expr::num(0.0),
            Expr::num(0.0),
            Expr::mul(Expr::num(r2), Expr::pow(Expr::call(Func::Sin, Expr::coord(0)), 2)),
        ];
        Self::from_exprs(Chart::standard(2), entries, format!("sphere2(r={radius})")).expect("well-formed")
    }

    /// Poincaré half-plane (x, y), y > 0: diag(1/y², 1/y²).
    pub fn hyperbolic() -> Self {
        let inv_y2 = || Expr::pow(Expr::coord(1), -2);
        let entries = vec![inv_y2(), Expr::num(0.0), Expr::num(0.0), inv_y2()];
        Self::from_exprs(Chart::standard(2), entries, "hyperbolic2").expect("well-formed")
    }

    /// Block-diagonal product; coordinates of `b` follow those of `a`.
    pub fn product(a: &MetricField, b: &MetricField) -> Self {
        let (na, nb) = (a.dim(), b.dim());
        let n = na + nb;
        let mut entries = vec![Expr::num(0.0); n * n];
        for i in 0..na {
            for j in 0..na {
                entries[i * n + j] = a.entries[i * na + j].clone();
            }
        }
        for i in 0..nb {
            for j in 0..nb {
                entries[(na + i) * n + na + j] = b.entries[i * nb + j].shift_coords(na);
            }
        }
        let label = format!("{}×{}", a.label, b.label);
        Self::from_exprs(Chart::standard(n), entries, label).expect("well-formed")
    }

    /// Renames the coordinates; the dimension must match.
    pub fn with_chart(mut self, chart: Chart) -> Result<Self> {
        if chart.dim() != self.dim() {
            return Err(Error::dim(format!("chart has {} coordinates, metric has {}", chart.dim(), self.dim())));
        }
        self.chart = chart;
        Ok(self)
    }

    pub fn dim(&self) -> usize {
        self.chart.dim()
    }

    pub fn chart(&self) -> &Chart {
        &self.chart
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn entry(&self, i: usize, j: usize) -> &Expr {
        &self.entries[i * self.dim() + j]
    }

    /// True when no component depends on the coordinates.
    pub fn is_constant(&self) -> bool {
        self.entries.iter().all(Expr::is_constant)
    }

    fn check_point<S>(&self, q: &[S]) -> Result<()> {
        if q.len() != self.dim() {
            return Err(Error::dim(format!("point has {} coordinates, chart has {}", q.len(), self.dim())));
        }
        Ok(())
    }

    /// Components g_ij(q), row-major, in the number system of `q`.
    pub fn eval_entries<S: Scalar>(&self, q: &[S]) -> Result<Vec<S>> {
        self.check_point(q)?;
        let env = EvalEnv::coords(q);
        let g = self.entries.iter().map(|e| e.eval(&env)).collect::<Result<Vec<S>>>()?;
        if !self.tree_symmetric {
            let n = self.dim();
            let scale = g.iter().fold(1.0_f64, |m, x| m.max(x.value().abs()));
            for i in 0..n {
                for j in 0..i {
                    let (a, b) = (g[i * n + j].value(), g[j * n + i].value());
                    if (a - b).abs() > 1e-12 * scale {
                        return Err(Error::NonSymmetricMetric { i, j, gij: a, gji: b });
                    }
                }
            }
        }
        Ok(g)
    }

    /// g(q) and g⁻¹(q).
    pub fn eval(&self, q: &[f64]) -> Result<MetricAtPoint> {
        let n = self.dim();
        let g = self.eval_entries(q)?;
        let inv = invert(&g, n).map_err(|e| with_point(e, q))?;
        Ok(MetricAtPoint {
            g: DMatrix::from_row_slice(n, n, &g),
            inv: DMatrix::from_row_slice(n, n, &inv),
        })
    }

    /// g_ij and ∂_m g_ij in the number system of `q`.
    pub fn metric_jet<S: Scalar>(&self, q: &[S]) -> Result<(Vec<S>, Vec<S>)> {
        self.check_point(q)?;
        let n = self.dim();
        let seeds = q
            .iter()
            .enumerate()
            .map(|(i, qi)| TruncatedPolynomial::variable(n, 1, qi.clone(), i))
            .collect::<Result<Vec<_>>>()?;
        let entries = self.eval_entries(&seeds)?;
        let mut g = Vec::with_capacity(n * n);
        let mut dg = Vec::with_capacity(n * n * n);
        for e in &entries {
            g.push(e.constant_term().clone());
            for m in 0..n {
                dg.push(e.linear(m).clone());
            }
        }
        Ok((g, dg))
    }

    /// Levi-Civita data in the number system of `q`:
    /// Γ^l_ij = ½ g^{lm}(∂_i g_jm + ∂_j g_im − ∂_m g_ij).
    pub fn connection<S: Scalar>(&self, q: &[S]) -> Result<Connection<S>> {
        let n = self.dim();
        let (g, dg) = self.metric_jet(q)?;
        let ginv = invert(&g, n).map_err(|e| with_point(e, &q.iter().map(S::value).collect::<Vec<_>>()))?;
        let d = |i: usize, j: usize, m: usize| dg[(i * n + j) * n + m].clone();
        let zero = g[0].zero_like();
        // lowered symbols Γ_{m,ij}
        let mut lowered = vec![zero.clone(); n * n * n];
        for m in 0..n {
            for i in 0..n {
                for j in i..n {
                    let v = (d(j, m, i) + d(i, m, j) - d(i, j, m)).scale(0.5);
                    lowered[(m * n + i) * n + j] = v.clone();
                    lowered[(m * n + j) * n + i] = v;
                }
            }
        }
        let mut gamma = vec![zero.clone(); n * n * n];
        for l in 0..n {
            for i in 0..n {
                for j in i..n {
                    let mut s = zero.clone();
                    for m in 0..n {
                        s = s + ginv[l * n + m].clone() * lowered[(m * n + i) * n + j].clone();
                    }
                    gamma[(l * n + i) * n + j] = s.clone();
                    gamma[(l * n + j) * n + i] = s;
                }
            }
        }
        Ok(Connection { g, ginv, dg, gamma })
    }

    pub fn christoffel(&self, q: &[f64]) -> Result<ChristoffelTensor> {
        let c = self.connection(q)?;
        Ok(ChristoffelTensor { q: q.to_vec(), gamma: c.gamma })
    }

    /// ½ g(v, v) for a single tangent vector (k = 1).
    pub fn kinetic_energy(&self, x: &KVelocity) -> Result<f64> {
        if x.k() != 1 {
            return Err(Error::dim("kinetic energy takes a (1,1)-velocity"));
        }
        self.k_kinetic_energy(x)
    }

    /// ½ Σ_α g(X_α, X_α).
    pub fn k_kinetic_energy(&self, x: &KVelocity) -> Result<f64> {
        let m = self.eval(x.q())?;
        let gq = &m.g * x.qdot();
        Ok(0.5 * gq.component_mul(x.qdot()).sum())
    }

    /// ½ Σ_α g_ij q̇ⁱ_α q̇ʲ_α with `qdot` row-major `n × k`.
    pub fn k_kinetic_generic<S: Scalar>(&self, q: &[S], qdot: &[S], k: usize) -> Result<S> {
        let n = self.dim();
        if qdot.len() != n * k {
            return Err(Error::dim("velocity block has the wrong size"));
        }
        let g = self.eval_entries(q)?;
        let mut s = q[0].zero_like();
        for a in 0..k {
            for i in 0..n {
                for j in 0..n {
                    s = s + g[i * n + j].clone() * qdot[i * k + a].clone() * qdot[j * k + a].clone();
                }
            }
        }
        Ok(s.scale(0.5))
    }
}

fn with_point(e: Error, q: &[f64]) -> Error {
    match e {
        Error::DegenerateMetric { det, .. } => Error::DegenerateMetric { point: q.to_vec(), det },
        other => other,
    }
}

/// Inverse of a row-major `n × n` matrix by Gauss–Jordan elimination with
/// partial pivoting on real parts. Fails when |det| falls below
/// [`DEGENERACY_TOL`] relative to the largest entry.
pub fn invert<S: Scalar>(m: &[S], n: usize) -> Result<Vec<S>> {
    assert_eq!(m.len(), n * n);
    let scale = m.iter().fold(0.0_f64, |acc, x| acc.max(x.value().abs()));
    let degenerate = |det: f64| Error::DegenerateMetric { point: Vec::new(), det };
    if scale == 0.0 {
        return Err(degenerate(0.0));
    }
    let zero = m[0].zero_like();
    let one = m[0].constant_like(1.0);
    let mut a = m.to_vec();
    let mut inv: Vec<S> = (0..n * n).map(|idx| if idx / n == idx % n { one.clone() } else { zero.clone() }).collect();
    let mut det = 1.0_f64;
    for col in 0..n {
        let piv = (col..n)
            .max_by(|&r, &s| a[r * n + col].value().abs().total_cmp(&a[s * n + col].value().abs()))
            .expect("non-empty");
        if a[piv * n + col].value() == 0.0 {
            return Err(degenerate(0.0));
        }
        if piv != col {
            for c in 0..n {
                a.swap(piv * n + c, col * n + c);
                inv.swap(piv * n + c, col * n + c);
            }
            det = -det;
        }
        let p = a[col * n + col].clone();
        det *= p.value();
        for c in 0..n {
            a[col * n + c] = a[col * n + c].try_div(&p)?;
            inv[col * n + c] = inv[col * n + c].try_div(&p)?;
        }
        for r in 0..n {
            if r == col {
                continue;
            }
            let f = a[r * n + col].clone();
            for c in 0..n {
                a[r * n + c] = a[r * n + c].clone() - f.clone() * a[col * n + c].clone();
                inv[r * n + c] = inv[r * n + c].clone() - f.clone() * inv[col * n + c].clone();
            }
        }
    }
    if det.abs() < DEGENERACY_TOL * scale.powi(n as i32) {
        return Err(degenerate(det));
    }
    Ok(inv)
}
