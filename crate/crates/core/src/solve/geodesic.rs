use crate::bundles::KVelocity;
use crate::error::{Error, Result};
use crate::geometry::MetricField;

use super::sheet::{Grid, Sheet};

fn accel(g: &MetricField, q: &[f64], v: &[f64]) -> Result<Vec<f64>> {
    Ok(g.christoffel(q)?.contract(v, v))
}

fn axpy(a: f64, x: &[f64], y: &[f64]) -> Vec<f64> {
    x.iter().zip(y).map(|(xi, yi)| yi + a * xi).collect()
}

/// One classical fourth-order Runge–Kutta step of q̈ = −Γ(q)(q̇, q̇).
fn rk4_step(g: &MetricField, q: &[f64], v: &[f64], dt: f64) -> Result<(Vec<f64>, Vec<f64>)> {
    let k1q = v.to_vec();
    let k1v = accel(g, q, v)?;
    let q2 = axpy(0.5 * dt, &k1q, q);
    let v2 = axpy(0.5 * dt, &k1v, v);
    let k2v = accel(g, &q2, &v2)?;
    let q3 = axpy(0.5 * dt, &v2, q);
    let v3 = axpy(0.5 * dt, &k2v, v);
    let k3v = accel(g, &q3, &v3)?;
    let q4 = axpy(dt, &v3, q);
    let v4 = axpy(dt, &k3v, v);
    let k4v = accel(g, &q4, &v4)?;
    let n = q.len();
    let mut qn = vec![0.0; n];
    let mut vn = vec![0.0; n];
    for i in 0..n {
        qn[i] = q[i] + dt / 6.0 * (k1q[i] + 2.0 * v2[i] + 2.0 * v3[i] + v4[i]);
        vn[i] = v[i] + dt / 6.0 * (k1v[i] + 2.0 * k2v[i] + 2.0 * k3v[i] + k4v[i]);
    }
    Ok((qn, vn))
}

fn check_state(g: &MetricField, q: &[f64], v: &[f64]) -> Result<()> {
    if q.len() != g.dim() || v.len() != g.dim() {
        return Err(Error::dim("geodesic initial data do not match the metric dimension"));
    }
    Ok(())
}

/// Advances `(q, v)` by parameter length `ds` in `ceil(ds / max_step)` equal steps.
fn advance(g: &MetricField, q: &[f64], v: &[f64], ds: f64, max_step: f64) -> Result<(Vec<f64>, Vec<f64>)> {
    let steps = (ds / max_step).ceil().max(1.0) as usize;
    let dt = ds / steps as f64;
    let (mut q, mut v) = (q.to_vec(), v.to_vec());
    for _ in 0..steps {
        (q, v) = rk4_step(g, &q, &v, dt)?;
    }
    Ok((q, v))
}

/// exp_q(v): the geodesic from `q` with initial velocity `v`, evaluated at
/// parameter 1 with `steps` fixed RK4 steps.
pub fn exp_map(g: &MetricField, q: &[f64], v: &[f64], steps: usize) -> Result<Vec<f64>> {
    let d = exp_displacement(g, q, v, steps)?;
    Ok(q.iter().zip(&d).map(|(a, b)| a + b).collect())
}

/// exp_q(v) − q, integrated as a displacement so that short geodesics keep
/// full relative precision.
pub fn exp_displacement(g: &MetricField, q: &[f64], v: &[f64], steps: usize) -> Result<Vec<f64>> {
    check_state(g, q, v)?;
    if steps == 0 {
        return Err(Error::pre("exp_map needs at least one step"));
    }
    let dt = 1.0 / steps as f64;
    let n = q.len();
    let at = |d: &[f64]| -> Vec<f64> { q.iter().zip(d).map(|(a, b)| a + b).collect() };
    let (mut d, mut v) = (vec![0.0; n], v.to_vec());
    for _ in 0..steps {
        let k1v = accel(g, &at(&d), &v)?;
        let d2 = axpy(0.5 * dt, &v, &d);
        let v2 = axpy(0.5 * dt, &k1v, &v);
        let k2v = accel(g, &at(&d2), &v2)?;
        let d3 = axpy(0.5 * dt, &v2, &d);
        let v3 = axpy(0.5 * dt, &k2v, &v);
        let k3v = accel(g, &at(&d3), &v3)?;
        let d4 = axpy(dt, &v3, &d);
        let v4 = axpy(dt, &k3v, &v);
        let k4v = accel(g, &at(&d4), &v4)?;
        for i in 0..n {
            d[i] += dt / 6.0 * (v[i] + 2.0 * v2[i] + 2.0 * v3[i] + v4[i]);
            v[i] += dt / 6.0 * (k1v[i] + 2.0 * k2v[i] + 2.0 * k3v[i] + k4v[i]);
        }
    }
    Ok(d)
}

/// Samples `(s, q(s), q̇(s))` along one integrated geodesic.
#[derive(Debug, Clone, PartialEq)]
pub struct GeodesicPath {
    pub s: Vec<f64>,
    pub q: Vec<Vec<f64>>,
    pub v: Vec<Vec<f64>>,
    pub step: f64,
    pub method: &'static str,
}

impl GeodesicPath {
    /// Largest |½g(q̇,q̇)(s) − ½g(q̇,q̇)(0)| along the path.
    pub fn energy_drift(&self, g: &MetricField) -> Result<f64> {
        let energy = |q: &[f64], v: &[f64]| -> Result<f64> {
            let m = g.eval(q)?;
            let mut e = 0.0;
            for i in 0..q.len() {
                for j in 0..q.len() {
                    e += 0.5 * m.g[(i, j)] * v[i] * v[j];
                }
            }
            Ok(e)
        };
        let e0 = energy(&self.q[0], &self.v[0])?;
        let mut drift = 0.0_f64;
        for (q, v) in self.q.iter().zip(&self.v) {
            drift = drift.max((energy(q, v)? - e0).abs());
        }
        Ok(drift)
    }
}

/// Integrates over `[0, length]` with fixed step `step`, recording every step.
pub fn integrate_geodesic(g: &MetricField, q: &[f64], v: &[f64], length: f64, step: f64) -> Result<GeodesicPath> {
    check_state(g, q, v)?;
    if !(step > 0.0) || !(length >= 0.0) {
        return Err(Error::pre("geodesic integration needs a positive step and non-negative length"));
    }
    let steps = (length / step).ceil() as usize;
    let dt = if steps == 0 { step } else { length / steps as f64 };
    let mut path = GeodesicPath { s: vec![0.0], q: vec![q.to_vec()], v: vec![v.to_vec()], step: dt, method: "rk4" };
    for m in 0..steps {
        let (qn, vn) = rk4_step(g, path.q.last().unwrap(), path.v.last().unwrap(), dt)?;
        path.s.push((m + 1) as f64 * dt);
        path.q.push(qn);
        path.v.push(vn);
    }
    Ok(path)
}

/// Splits the columns of `x` as `X_α = λ_α w`, or fails when rank > 1.
fn rank1_split(x: &KVelocity) -> Result<(Vec<f64>, Vec<f64>)> {
    let (n, k) = (x.n(), x.k());
    let cols: Vec<Vec<f64>> = (0..k).map(|a| x.column(a)).collect();
    let norm2 = |c: &[f64]| c.iter().map(|v| v * v).sum::<f64>();
    let (best, _) = cols
        .iter()
        .enumerate()
        .map(|(a, c)| (a, norm2(c)))
        .fold((0, -1.0), |acc, cur| if cur.1 > acc.1 { cur } else { acc });
    let w = cols[best].clone();
    let ww = norm2(&w);
    if ww == 0.0 {
        return Ok((vec![0.0; n], vec![0.0; k]));
    }
    let mut lambda = vec![0.0; k];
    for (a, c) in cols.iter().enumerate() {
        let l = c.iter().zip(&w).map(|(u, v)| u * v).sum::<f64>() / ww;
        let off = c.iter().zip(&w).map(|(u, v)| (u - l * v).abs()).fold(0.0, f64::max);
        if off > 1e-12 * ww.sqrt() {
            return Err(Error::pre("rank-1 sheets need pairwise proportional columns X_α = λ_α w"));
        }
        lambda[a] = l;
    }
    Ok((w, lambda))
}

/// The sheet `γ(t) = c(λ_α tᵅ)` where c is the geodesic with c(0) = q and
/// ċ(0) = w, for `X_α = λ_α w`. The geodesic is integrated once outward
/// from s = 0 in each direction, stopping exactly at every needed s.
pub fn rank1_sheet(g: &MetricField, x: &KVelocity, grid: Grid, step: f64) -> Result<Sheet> {
    if x.n() != g.dim() || x.k() != grid.k() {
        return Err(Error::dim("k-velocity does not match metric or grid"));
    }
    if !(step > 0.0) {
        return Err(Error::pre("integrator step must be positive"));
    }
    let n = x.n();
    let (w, lambda) = rank1_split(x)?;
    let s_of = |node: usize| grid.point(node).iter().zip(&lambda).map(|(t, l)| t * l).sum::<f64>();
    let mut nodes: Vec<(f64, usize)> = (0..grid.len()).map(|m| (s_of(m), m)).collect();
    nodes.sort_by(|a, b| a.0.total_cmp(&b.0));
    let mut values = vec![0.0; grid.len() * n];
    let neg_w: Vec<f64> = w.iter().map(|v| -v).collect();
    let forward: Vec<&(f64, usize)> = nodes.iter().filter(|(s, _)| *s >= 0.0).collect();
    let backward: Vec<&(f64, usize)> = nodes.iter().rev().filter(|(s, _)| *s < 0.0).collect();
    for (dir, list) in [(&w, forward), (&neg_w, backward)] {
        let (mut q, mut v) = (x.q().to_vec(), dir.clone());
        let mut at = 0.0;
        for &&(s, node) in &list {
            let target = s.abs();
            if target > at {
                (q, v) = advance(g, &q, &v, target - at, step)?;
                at = target;
            }
            values[node * n..(node + 1) * n].copy_from_slice(&q);
        }
    }
    Sheet::new(grid, n, values)
}
