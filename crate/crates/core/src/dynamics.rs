//! Second-order partial differential equations on Q_k^1, the geodesic
//! k-field, the End ℝᵏ-valued form 𝒯 and the correspondence between
//! symmetric horizontal forces and SOPDEs.

use nalgebra::DMatrix;

use crate::array::Tensor3;
use crate::bundles::{metric_iso, polysymplectic_eval, BundleTangent, KVelocity};
use crate::error::{Error, Result};
use crate::exprlang::{parse, EvalEnv, Expr};
use crate::geometry::{Chart, MetricField};
use crate::jets::{Scalar, TruncatedPolynomial};
use crate::solve::exp_displacement;

/// First-order jet over the n + n·k coordinates of Q_k^1.
pub(crate) type StateJet = TruncatedPolynomial<f64>;

/// Seeds `(qⁱ, q̇ⁱ_α)` as independent generators, ordered like
/// [`KVelocity::coords`].
pub(crate) fn state_jets(x: &KVelocity) -> Result<(Vec<StateJet>, Vec<StateJet>)> {
    let coords = x.coords();
    let m = coords.len();
    let n = x.n();
    let seeds = coords
        .iter()
        .enumerate()
        .map(|(c, v)| TruncatedPolynomial::variable(m, 1, *v, c))
        .collect::<Result<Vec<_>>>()?;
    Ok((seeds[..n].to_vec(), seeds[n..].to_vec()))
}

pub(crate) fn gradient(j: &StateJet) -> Vec<f64> {
    (0..j.k()).map(|c| *j.linear(c)).collect()
}

fn check_velocity(g: &MetricField, x: &KVelocity) -> Result<()> {
    if x.n() != g.dim() {
        return Err(Error::dim(format!("k-velocity has n = {}, metric has n = {}", x.n(), g.dim())));
    }
    Ok(())
}

fn flat_qdot(x: &KVelocity) -> Vec<f64> {
    x.coords()[x.n()..].to_vec()
}

fn check_symmetric_exprs(entries: &[Expr], n: usize, k: usize) -> Result<()> {
    for i in 0..n {
        for a in 0..k {
            for b in a + 1..k {
                if entries[(i * k + a) * k + b] != entries[(i * k + b) * k + a] {
                    return Err(Error::AsymmetricForce { i: i + 1, alpha: a + 1, beta: b + 1 });
                }
            }
        }
    }
    Ok(())
}

fn parse_nkk(chart: &Chart, k: usize, entries: &[Vec<Vec<String>>], what: &str) -> Result<Vec<Expr>> {
    let n = chart.dim();
    if entries.len() != n || entries.iter().any(|m| m.len() != k || m.iter().any(|r| r.len() != k)) {
        return Err(Error::Scenario(format!("{what} must be an {n}×{k}×{k} array of expressions")));
    }
    let scope = chart.scope_with_velocities(k);
    entries.iter().flatten().flatten().map(|s| parse(s, &scope)).collect()
}

/// A horizontal End ℝᵏ-valued 1-form `F_α^β = F_{jαβ} dqʲ`, symmetric in
/// (α, β). Coefficients may depend on q and q̇.
#[derive(Debug, Clone, PartialEq)]
pub struct ForceField {
    n: usize,
    k: usize,
    entries: Vec<Expr>,
}

impl ForceField {
    /// Entries indexed `(j·k + α)·k + β`. The expressions for (α, β) and
    /// (β, α) must be identical trees.
    pub fn from_exprs(n: usize, k: usize, entries: Vec<Expr>) -> Result<Self> {
        if n == 0 || k == 0 || entries.len() != n * k * k {
            return Err(Error::dim(format!("force needs {} component expressions", n * k * k)));
        }
        for e in &entries {
            if e.max_coord().is_some_and(|i| i >= n) {
                return Err(Error::dim("force component refers to a coordinate outside the chart"));
            }
        }
        check_symmetric_exprs(&entries, n, k)?;
        Ok(Self { n, k, entries })
    }

    /// Parses `entries[j][α][β]`.
    pub fn parse(chart: &Chart, k: usize, entries: &[Vec<Vec<String>>]) -> Result<Self> {
        let exprs = parse_nkk(chart, k, entries, "force")?;
        Self::from_exprs(chart.dim(), k, exprs)
    }

    pub fn zero(n: usize, k: usize) -> Self {
        Self { n, k, entries: vec![Expr::num(0.0); n * k * k] }
    }

    /// Constant coefficients; rejects arrays that are not exactly symmetric.
    pub fn constant(f: &Tensor3) -> Result<Self> {
        let entries = f.as_slice().iter().map(|v| Expr::num(*v)).collect();
        Self::from_exprs(f.n(), f.k(), entries)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn entry(&self, j: usize, a: usize, b: usize) -> &Expr {
        &self.entries[(j * self.k + a) * self.k + b]
    }

    pub fn is_constant(&self) -> bool {
        self.entries.iter().all(Expr::is_constant)
    }

    pub fn is_zero(&self) -> bool {
        self.entries.iter().all(|e| *e == Expr::Num(0.0))
    }

    pub fn uses_velocities(&self) -> bool {
        self.entries.iter().any(Expr::uses_velocities)
    }

    /// Coefficients in the number system of the arguments; `qdot` row-major.
    pub fn eval<S: Scalar>(&self, q: &[S], qdot: &[S]) -> Result<Vec<S>> {
        if q.len() != self.n || qdot.len() != self.n * self.k {
            return Err(Error::dim("force evaluated at a point of the wrong shape"));
        }
        let env = EvalEnv::with_velocities(q, qdot, self.k);
        self.entries.iter().map(|e| e.eval(&env)).collect()
    }

    pub fn eval_at(&self, x: &KVelocity) -> Result<Tensor3> {
        if x.k() != self.k {
            return Err(Error::dim(format!("force has k = {}, k-velocity has k = {}", self.k, x.k())));
        }
        Tensor3::from_vec(self.n, self.k, self.eval(x.q(), &flat_qdot(x))?)
    }
}

/// How the coefficients of a SOPDE are produced.
#[derive(Debug, Clone, PartialEq)]
pub enum SopdeKind {
    Geodesic,
    Newton(ForceField),
    /// User coefficients `A^i_{αβ}`, indexed like a force.
    Custom { k: usize, entries: Vec<Expr> },
}

/// A SOPDE `D_α = q̇ⁱ_α ∂/∂qⁱ + A^i_{αβ} ∂/∂q̇ⁱ_β` on Q_k^1.
#[derive(Debug, Clone, PartialEq)]
pub struct Sopde {
    metric: MetricField,
    kind: SopdeKind,
}

impl Sopde {
    /// The geodesic k-field, `A^i_{αβ} = −Γ^i_{jh} q̇ʲ_α q̇ʰ_β`. Valid for every k.
    pub fn geodesic(g: &MetricField) -> Self {
        Self { metric: g.clone(), kind: SopdeKind::Geodesic }
    }

    /// Generalized Newton law, `A = −Γ q̇_α q̇_β + g^{ij} F_{jαβ}`.
    pub fn newton(g: &MetricField, f: &ForceField) -> Result<Self> {
        if f.n() != g.dim() {
            return Err(Error::dim("force and metric dimensions differ"));
        }
        Ok(Self { metric: g.clone(), kind: SopdeKind::Newton(f.clone()) })
    }

    pub fn custom(g: &MetricField, k: usize, entries: Vec<Expr>) -> Result<Self> {
        let n = g.dim();
        if k == 0 || entries.len() != n * k * k {
            return Err(Error::dim(format!("SOPDE needs {} coefficient expressions", n * k * k)));
        }
        check_symmetric_exprs(&entries, n, k)?;
        Ok(Self { metric: g.clone(), kind: SopdeKind::Custom { k, entries } })
    }

    pub fn metric(&self) -> &MetricField {
        &self.metric
    }

    pub fn kind(&self) -> &SopdeKind {
        &self.kind
    }

    /// The number of slots this SOPDE is tied to; `None` for the geodesic
    /// k-field, which is defined for every k.
    pub fn k(&self) -> Option<usize> {
        match &self.kind {
            SopdeKind::Geodesic => None,
            SopdeKind::Newton(f) => Some(f.k()),
            SopdeKind::Custom { k, .. } => Some(*k),
        }
    }

    pub fn tag(&self) -> &'static str {
        match self.kind {
            SopdeKind::Geodesic => "geodesic",
            SopdeKind::Newton(_) => "newton",
            SopdeKind::Custom { .. } => "custom",
        }
    }

    /// `A^i_{αβ}` at `(q, q̇)` in any number system, indexed `(i·k + α)·k + β`.
    pub fn coefficients<S: Scalar>(&self, q: &[S], qdot: &[S], k: usize) -> Result<Vec<S>> {
        let n = self.metric.dim();
        if q.len() != n || qdot.len() != n * k {
            return Err(Error::dim("SOPDE evaluated at a point of the wrong shape"));
        }
        if let Some(kk) = self.k() {
            if kk != k {
                return Err(Error::dim(format!("SOPDE has k = {kk}, point has k = {k}")));
            }
        }
        if let SopdeKind::Custom { entries, .. } = &self.kind {
            let env = EvalEnv::with_velocities(q, qdot, k);
            return entries.iter().map(|e| e.eval(&env)).collect();
        }
        let conn = self.metric.connection(q)?;
        let zero = q[0].zero_like();
        let mut out = vec![zero.clone(); n * k * k];
        for i in 0..n {
            for a in 0..k {
                for b in a..k {
                    let mut s = zero.clone();
                    for j in 0..n {
                        for h in 0..n {
                            s = s + conn.gamma[(i * n + j) * n + h].clone()
                                * qdot[j * k + a].clone()
                                * qdot[h * k + b].clone();
                        }
                    }
                    out[(i * k + a) * k + b] = -s.clone();
                    out[(i * k + b) * k + a] = -s;
                }
            }
        }
        if let SopdeKind::Newton(f) = &self.kind {
            let fv = f.eval(q, qdot)?;
            for i in 0..n {
                for a in 0..k {
                    for b in 0..k {
                        let mut s = out[(i * k + a) * k + b].clone();
                        for j in 0..n {
                            s = s + conn.ginv[i * n + j].clone() * fv[(j * k + a) * k + b].clone();
                        }
                        out[(i * k + a) * k + b] = s;
                    }
                }
            }
        }
        Ok(out)
    }

    pub fn coefficients_at(&self, x: &KVelocity) -> Result<Tensor3> {
        check_velocity(&self.metric, x)?;
        let a = self.coefficients(x.q(), &flat_qdot(x), x.k())?;
        Tensor3::from_vec(x.n(), x.k(), a)
    }

    /// Component α of the section as a tangent vector `(δq, δq̇)` at `x`:
    /// `δq = q̇_α`, `δq̇ʲ_β = Aʲ_{αβ}`. The q-part is fixed by construction.
    pub fn direction(&self, x: &KVelocity, alpha: usize) -> Result<(Vec<f64>, DMatrix<f64>)> {
        let a = self.coefficients_at(x)?;
        Ok(direction_from(x, &a, alpha))
    }
}

fn direction_from(x: &KVelocity, a: &Tensor3, alpha: usize) -> (Vec<f64>, DMatrix<f64>) {
    let dq = x.column(alpha);
    let dqdot = DMatrix::from_fn(x.n(), x.k(), |j, b| a.get(j, alpha, b));
    (dq, dqdot)
}

/// Geodesic second derivatives by exponential-map sampling: second central
/// differences of `t ↦ exp_q(tᵅ X_α)` at t = 0 with step `h`, each map
/// evaluated with `steps` fixed integrator substeps over [0, 1].
pub fn geodesic_oracle(g: &MetricField, x: &KVelocity, h: f64, steps: usize) -> Result<Tensor3> {
    check_velocity(g, x)?;
    if !(h > 0.0) {
        return Err(Error::pre("oracle step must be positive"));
    }
    let (n, k) = (x.n(), x.k());
    let q0 = x.q().to_vec();
    // displacements from q keep the differences free of cancellation in q
    let point = |t: &[f64]| -> Result<Vec<f64>> {
        let v: Vec<f64> = (0..n).map(|i| (0..k).map(|a| t[a] * x.qdot()[(i, a)]).sum()).collect();
        exp_displacement(g, &q0, &v, steps)
    };
    let mut out = Tensor3::zeros(n, k);
    for a in 0..k {
        let mut t = vec![0.0; k];
        t[a] = h;
        let plus = point(&t)?;
        t[a] = -h;
        let minus = point(&t)?;
        for i in 0..n {
            out.set(i, a, a, (plus[i] + minus[i]) / (h * h));
        }
        for b in a + 1..k {
            let corner = |sa: f64, sb: f64| {
                let mut t = vec![0.0; k];
                t[a] = sa * h;
                t[b] = sb * h;
                point(&t)
            };
            let pp = corner(1.0, 1.0)?;
            let pm = corner(1.0, -1.0)?;
            let mp = corner(-1.0, 1.0)?;
            let mm = corner(-1.0, -1.0)?;
            for i in 0..n {
                let v = (pp[i] - pm[i] - mp[i] + mm[i]) / (4.0 * h * h);
                out.set(i, a, b, v);
                out.set(i, b, a, v);
            }
        }
    }
    Ok(out)
}

/// An End ℝᵏ-valued 1-form on Q_k^1 at a point: for each (α, β) a
/// covector `a_{iα}^β dqⁱ + b_{iα}^{βγ} dq̇ⁱ_γ`.
#[derive(Debug, Clone, PartialEq)]
pub struct EndValuedOneForm {
    base: KVelocity,
    dq: Vec<f64>,
    dqdot: Vec<f64>,
}

impl EndValuedOneForm {
    pub fn zeros(base: &KVelocity) -> Self {
        let (n, k) = (base.n(), base.k());
        Self { base: base.clone(), dq: vec![0.0; k * k * n], dqdot: vec![0.0; k * k * n * k] }
    }

    pub fn base(&self) -> &KVelocity {
        &self.base
    }

    fn slot(&self, a: usize, b: usize) -> usize {
        a * self.base.k() + b
    }

    /// Coefficient of dqⁱ in 𝒯_α^β.
    pub fn dq(&self, a: usize, b: usize, i: usize) -> f64 {
        self.dq[self.slot(a, b) * self.base.n() + i]
    }

    /// Coefficient of dq̇ʲ_γ in 𝒯_α^β.
    pub fn dqdot(&self, a: usize, b: usize, j: usize, c: usize) -> f64 {
        let (n, k) = (self.base.n(), self.base.k());
        self.dqdot[(self.slot(a, b) * n + j) * k + c]
    }

    /// All n + n·k components of the (α, β) covector, ordered like
    /// [`KVelocity::coords`].
    pub fn covector(&self, a: usize, b: usize) -> Vec<f64> {
        let (n, k) = (self.base.n(), self.base.k());
        let s = self.slot(a, b);
        let mut out = self.dq[s * n..(s + 1) * n].to_vec();
        out.extend_from_slice(&self.dqdot[s * n * k..(s + 1) * n * k]);
        out
    }

    fn set_covector(&mut self, a: usize, b: usize, c: &[f64]) {
        let (n, k) = (self.base.n(), self.base.k());
        let s = self.slot(a, b);
        self.dq[s * n..(s + 1) * n].copy_from_slice(&c[..n]);
        self.dqdot[s * n * k..(s + 1) * n * k].copy_from_slice(&c[n..]);
    }

    /// Σ_α of the (α, α) covectors.
    pub fn trace(&self) -> Vec<f64> {
        let k = self.base.k();
        let mut out = vec![0.0; self.base.n() * (1 + k)];
        for a in 0..k {
            for (o, c) in out.iter_mut().zip(self.covector(a, a)) {
                *o += c;
            }
        }
        out
    }

    pub fn is_horizontal(&self) -> bool {
        self.dqdot.iter().all(|x| *x == 0.0)
    }

    pub fn max_abs(&self) -> f64 {
        self.dq.iter().chain(&self.dqdot).fold(0.0_f64, |m, x| m.max(x.abs()))
    }

    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        self.dq
            .iter()
            .zip(&other.dq)
            .chain(self.dqdot.iter().zip(&other.dqdot))
            .fold(0.0_f64, |m, (a, b)| m.max((a - b).abs()))
    }
}

/// 𝒯 = −ι_{D_G}dθ, expanded in coordinates:
/// `𝒯_α^β = −D_α(p_i^β) dqⁱ + q̇ⁱ_α dp_i^β` with `p_i^β = g_ij q̇ʲ_β`
/// differentiated by jets and `D_α` the geodesic k-field.
pub fn calt(g: &MetricField, x: &KVelocity) -> Result<EndValuedOneForm> {
    check_velocity(g, x)?;
    let (n, k) = (x.n(), x.k());
    let (qj, vj) = state_jets(x)?;
    let gj = g.eval_entries(&qj)?;
    let a_geo = Sopde::geodesic(g).coefficients_at(x)?;
    // grad p_i^β over (q, q̇)
    let mut dp = vec![Vec::new(); n * k];
    for i in 0..n {
        for b in 0..k {
            let mut s = qj[0].zero_like();
            for j in 0..n {
                s = s + gj[i * n + j].clone() * vj[j * k + b].clone();
            }
            dp[i * k + b] = gradient(&s);
        }
    }
    let mut out = EndValuedOneForm::zeros(x);
    for a in 0..k {
        let (dq_a, dqdot_a) = direction_from(x, &a_geo, a);
        let mut dir = dq_a.clone();
        dir.extend(dqdot_a.transpose().iter().copied());
        for b in 0..k {
            let mut cov = vec![0.0; n * (1 + k)];
            for i in 0..n {
                let grad = &dp[i * k + b];
                let d_alpha_p: f64 = grad.iter().zip(&dir).map(|(x, y)| x * y).sum();
                cov[i] -= d_alpha_p;
                for (c, gc) in cov.iter_mut().zip(grad) {
                    *c += dq_a[i] * gc;
                }
            }
            out.set_covector(a, b, &cov);
        }
    }
    Ok(out)
}

/// The expanded expression
/// `𝒯_α^β = d(½g_jh q̇ʲ_α q̇ʰ_β) + ½(∂_h g_ij − ∂_j g_ih) q̇ʲ_α q̇ʰ_β dqⁱ
///          + ½g_jh (q̇ʲ_α dq̇ʰ_β − q̇ʲ_β dq̇ʰ_α)`,
/// evaluated term by term as an independent witness for [`calt`].
pub fn calt_closed_form(g: &MetricField, x: &KVelocity) -> Result<EndValuedOneForm> {
    check_velocity(g, x)?;
    let (n, k) = (x.n(), x.k());
    let (qj, vj) = state_jets(x)?;
    let gj = g.eval_entries(&qj)?;
    let (gm, dg) = g.metric_jet(x.q())?;
    let qd = x.qdot();
    let mut out = EndValuedOneForm::zeros(x);
    for a in 0..k {
        for b in 0..k {
            let mut e = qj[0].zero_like();
            for j in 0..n {
                for h in 0..n {
                    e = e + gj[j * n + h].clone() * vj[j * k + a].clone() * vj[h * k + b].clone();
                }
            }
            let mut cov: Vec<f64> = gradient(&e).iter().map(|c| 0.5 * c).collect();
            for i in 0..n {
                let mut s = 0.0;
                for j in 0..n {
                    for h in 0..n {
                        let d = dg[(i * n + j) * n + h] - dg[(i * n + h) * n + j];
                        s += 0.5 * d * qd[(j, a)] * qd[(h, b)];
                    }
                }
                cov[i] += s;
            }
            for j in 0..n {
                for h in 0..n {
                    let gjh = 0.5 * gm[j * n + h];
                    cov[n + h * k + b] += gjh * qd[(j, a)];
                    cov[n + h * k + a] -= gjh * qd[(j, b)];
                }
            }
            out.set_covector(a, b, &cov);
        }
    }
    Ok(out)
}

fn basis_tangents(g: &MetricField, x: &KVelocity) -> Result<Vec<BundleTangent>> {
    let (n, k) = (x.n(), x.k());
    let mut out = Vec::with_capacity(n * (1 + k));
    for c in 0..n * (1 + k) {
        let mut dq = vec![0.0; n];
        let mut dqdot = DMatrix::zeros(n, k);
        if c < n {
            dq[c] = 1.0;
        } else {
            dqdot[((c - n) / k, (c - n) % k)] = 1.0;
        }
        out.push(BundleTangent::from_velocity(g, x, &dq, &dqdot)?);
    }
    Ok(out)
}

/// `ι_{D_α}dθ^β` at `x` for the SOPDE with coefficients `a`, contracted
/// against every coordinate direction of Q_k^1 through the polysymplectic
/// form in covelocity coordinates.
pub fn interior_dtheta(g: &MetricField, x: &KVelocity, a: &Tensor3) -> Result<EndValuedOneForm> {
    check_velocity(g, x)?;
    if a.n() != x.n() || a.k() != x.k() {
        return Err(Error::dim("SOPDE coefficients do not match the k-velocity"));
    }
    let k = x.k();
    let sigma = metric_iso(g, x)?;
    let basis = basis_tangents(g, x)?;
    let mut out = EndValuedOneForm::zeros(x);
    for al in 0..k {
        let (dq, dqdot) = direction_from(x, a, al);
        let d = BundleTangent::from_velocity(g, x, &dq, &dqdot)?;
        let mut rows = vec![vec![0.0; basis.len()]; k];
        for (c, e) in basis.iter().enumerate() {
            let w = polysymplectic_eval(&sigma, &d, e)?;
            for (b, wb) in w.iter().enumerate() {
                rows[b][c] = *wb;
            }
        }
        for (b, row) in rows.iter().enumerate() {
            out.set_covector(al, b, row);
        }
    }
    Ok(out)
}

/// Pointwise Newton coefficients for a force given as an array at `x`.
pub fn newton_coefficients(g: &MetricField, f: &Tensor3, x: &KVelocity) -> Result<Tensor3> {
    check_velocity(g, x)?;
    let geo = Sopde::geodesic(g).coefficients_at(x)?;
    let m = g.eval(x.q())?;
    let (n, k) = (x.n(), x.k());
    Ok(Tensor3::from_fn(n, k, |i, a, b| {
        geo.get(i, a, b) + (0..n).map(|j| m.inv[(i, j)] * f.get(j, a, b)).sum::<f64>()
    }))
}

/// `F_{iαβ} = g_ij (Aʲ_{αβ} − A_geoʲ_{αβ})` at `x`.
pub fn force_from_sopde(g: &MetricField, d: &Sopde, x: &KVelocity) -> Result<Tensor3> {
    check_velocity(g, x)?;
    let a = d.coefficients_at(x)?;
    if a.asymmetry() > 1e-12 * a.max_abs().max(1.0) {
        return Err(Error::pre("SOPDE coefficients are not symmetric in (α, β)"));
    }
    let geo = Sopde::geodesic(g).coefficients_at(x)?;
    let m = g.eval(x.q())?;
    let (n, k) = (x.n(), x.k());
    Ok(Tensor3::from_fn(n, k, |i, al, b| {
        (0..n).map(|j| m.g[(i, j)] * (a.get(j, al, b) - geo.get(j, al, b))).sum()
    }))
}

/// Residual of `ι_D dθ + 𝒯 − F` at `x`.
pub fn newton_identity_check(
    g: &MetricField,
    d: &Sopde,
    f: &ForceField,
    x: &KVelocity,
) -> Result<EndValuedOneForm> {
    let a = d.coefficients_at(x)?;
    let mut r = interior_dtheta(g, x, &a)?;
    let t = calt(g, x)?;
    let fx = f.eval_at(x)?;
    let (n, k) = (x.n(), x.k());
    for al in 0..k {
        for b in 0..k {
            let mut c = r.covector(al, b);
            for (ci, ti) in c.iter_mut().zip(t.covector(al, b)) {
                *ci += ti;
            }
            for i in 0..n {
                c[i] -= fx.get(i, al, b);
            }
            r.set_covector(al, b, &c);
        }
    }
    Ok(r)
}

/// dT for T = ½ Σ_α g(q̇_α, q̇_α), as n + n·k components.
pub fn kinetic_differential(g: &MetricField, x: &KVelocity) -> Result<Vec<f64>> {
    check_velocity(g, x)?;
    let (qj, vj) = state_jets(x)?;
    Ok(gradient(&g.k_kinetic_generic(&qj, &vj, x.k())?))
}

/// The k = 1 law `ι_D dθ + dT − F`, returned as n + n components.
pub fn classical_newton_residual(
    g: &MetricField,
    d: &Sopde,
    f: &ForceField,
    x: &KVelocity,
) -> Result<Vec<f64>> {
    if x.k() != 1 {
        return Err(Error::dim("the classical law is stated for k = 1"));
    }
    let a = d.coefficients_at(x)?;
    let i_d = interior_dtheta(g, x, &a)?.covector(0, 0);
    let dt = kinetic_differential(g, x)?;
    let fx = f.eval_at(x)?;
    Ok(i_d
        .iter()
        .zip(&dt)
        .enumerate()
        .map(|(c, (u, v))| u + v - if c < x.n() { fx.get(c, 0, 0) } else { 0.0 })
        .collect())
}
