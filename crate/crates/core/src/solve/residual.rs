use nalgebra::DMatrix;

use crate::array::Tensor3;
use crate::bundles::{K2Velocity, KVelocity};
use crate::dynamics::{gradient, state_jets, ForceField, Sopde};
use crate::error::{Error, Result};
use crate::geometry::MetricField;

use super::sheet::Sheet;

fn margin_error(node: usize) -> Error {
    Error::pre(format!("node {node} lacks a central-difference stencil"))
}

/// Central-difference first prolongation at an interior node.
pub fn sheet_prolong(sheet: &Sheet, node: usize) -> Result<KVelocity> {
    let grid = sheet.grid();
    if node >= grid.len() || !grid.is_interior(node, 1) {
        return Err(margin_error(node));
    }
    let (n, k) = (sheet.n(), sheet.k());
    let mut qdot = DMatrix::zeros(n, k);
    for a in 0..k {
        let p = sheet.value(grid.shift(node, a, 1).expect("interior"));
        let m = sheet.value(grid.shift(node, a, -1).expect("interior"));
        let h = grid.spacing(a);
        for i in 0..n {
            qdot[(i, a)] = (p[i] - m[i]) / (2.0 * h);
        }
    }
    KVelocity::new(sheet.value(node).to_vec(), qdot)
}

/// Central-difference second prolongation at an interior node.
pub fn sheet_prolong2(sheet: &Sheet, node: usize) -> Result<K2Velocity> {
    let base = sheet_prolong(sheet, node)?;
    let grid = sheet.grid();
    let (n, k) = (sheet.n(), sheet.k());
    let q0 = sheet.value(node);
    let mut qddot = Tensor3::zeros(n, k);
    for a in 0..k {
        let ha = grid.spacing(a);
        let p = sheet.value(grid.shift(node, a, 1).expect("interior"));
        let m = sheet.value(grid.shift(node, a, -1).expect("interior"));
        for i in 0..n {
            qddot.set(i, a, a, (p[i] - 2.0 * q0[i] + m[i]) / (ha * ha));
        }
        for b in a + 1..k {
            let hb = grid.spacing(b);
            let corner = |sa: isize, sb: isize| {
                let first = grid.shift(node, a, sa).expect("interior");
                sheet.value(grid.shift(first, b, sb).expect("interior"))
            };
            let (pp, pm, mp, mm) = (corner(1, 1), corner(1, -1), corner(-1, 1), corner(-1, -1));
            for i in 0..n {
                let v = (pp[i] - pm[i] - mp[i] + mm[i]) / (4.0 * ha * hb);
                qddot.set(i, a, b, v);
                qddot.set(i, b, a, v);
            }
        }
    }
    K2Velocity::new(base, qddot)
}

#[derive(Debug, Clone, PartialEq)]
pub struct NodeResidual {
    pub node: usize,
    pub r: Tensor3,
}

/// Residuals at interior nodes; boundary nodes are counted, not evaluated.
#[derive(Debug, Clone, PartialEq)]
pub struct SheetResidual {
    pub nodes: Vec<NodeResidual>,
    pub max: f64,
    pub skipped: usize,
}

/// `∂²qⁱ/∂tᵅ∂tᵝ − Aⁱ_{αβ}(q, ∂q/∂t)` at every interior node.
pub fn sopde_residual(d: &Sopde, sheet: &Sheet) -> Result<SheetResidual> {
    if sheet.n() != d.metric().dim() {
        return Err(Error::dim("sheet and SOPDE dimensions differ"));
    }
    let mut out = SheetResidual { nodes: Vec::new(), max: 0.0, skipped: 0 };
    for node in 0..sheet.grid().len() {
        if !sheet.grid().is_interior(node, 1) {
            out.skipped += 1;
            continue;
        }
        let x2 = sheet_prolong2(sheet, node)?;
        let a = d.coefficients_at(x2.base())?;
        let r = x2.qddot() - &a;
        out.max = out.max.max(r.max_abs());
        out.nodes.push(NodeResidual { node, r });
    }
    Ok(out)
}

/// Residual of the generalized Newton system
/// `∂²qⁱ/∂tᵅ∂tᵝ = −Γⁱ_{jh} ∂qʲ/∂tᵅ ∂qʰ/∂tᵝ + g^{ij} F_{jαβ}`.
pub fn newton_residual(g: &MetricField, f: &ForceField, sheet: &Sheet) -> Result<SheetResidual> {
    sopde_residual(&Sopde::newton(g, f)?, sheet)
}

/// max |D_α Aⁱ_{βγ} − D_β Aⁱ_{αγ}|: the symmetry of third derivatives that
/// any integral sheet through `x` must have.
pub fn compatibility_defect(d: &Sopde, x: &KVelocity) -> Result<f64> {
    let (n, k) = (x.n(), x.k());
    let a = d.coefficients_at(x)?;
    let (qj, vj) = state_jets(x)?;
    let aj = d.coefficients(&qj, &vj, k)?;
    let dirs: Vec<Vec<f64>> = (0..k)
        .map(|al| {
            let mut v = x.column(al);
            for j in 0..n {
                for be in 0..k {
                    v.push(a.get(j, al, be));
                }
            }
            v
        })
        .collect();
    let along = |al: usize, i: usize, be: usize, ga: usize| -> f64 {
        gradient(&aj[(i * k + be) * k + ga]).iter().zip(&dirs[al]).map(|(u, v)| u * v).sum()
    };
    let mut worst = 0.0_f64;
    for i in 0..n {
        for al in 0..k {
            for be in al + 1..k {
                for ga in 0..k {
                    worst = worst.max((along(al, i, be, ga) - along(be, i, al, ga)).abs());
                }
            }
        }
    }
    Ok(worst)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::solve::Grid;

    fn grid2(h: f64) -> Grid {
        Grid::centered(&[0.3, -0.2], h, 5).unwrap()
    }

    #[test]
    fn affine_prolongation_exact() {
        let s = Sheet::from_fn(grid2(0.25), 2, |t| Ok(vec![1.0 + 2.0 * t[0] - t[1], 0.5 * t[1]])).unwrap();
        let node = s.grid().linear_index(&[2, 2]);
        let x2 = sheet_prolong2(&s, node).unwrap();
        let expect = [[2.0, -1.0], [0.0, 0.5]];
        for i in 0..2 {
            for a in 0..2 {
                assert!((x2.base().qdot()[(i, a)] - expect[i][a]).abs() < 1e-14);
            }
        }
        assert!(x2.qddot().max_abs() < 1e-13);
    }

    #[test]
    fn quadratic_second_derivatives_exact() {
        let s = Sheet::from_fn(grid2(0.25), 1, |t| Ok(vec![t[0] * t[0] + 3.0 * t[0] * t[1]])).unwrap();
        let x2 = sheet_prolong2(&s, s.grid().linear_index(&[1, 3])).unwrap();
        assert!((x2.qddot().get(0, 0, 0) - 2.0).abs() < 1e-13);
        assert!((x2.qddot().get(0, 0, 1) - 3.0).abs() < 1e-13);
        assert!(x2.qddot().get(0, 1, 1).abs() < 1e-13);
    }

    #[test]
    fn sine_first_derivative() {
        let grid = Grid::centered(&[0.7], 1e-2, 5).unwrap();
        let s = Sheet::from_fn(grid, 1, |t| Ok(vec![t[0].sin()])).unwrap();
        let x = sheet_prolong(&s, 2).unwrap();
        assert!((x.qdot()[(0, 0)] - 0.7_f64.cos()).abs() < 1e-4);
    }

    #[test]
    fn boundary_rejected() {
        let s = Sheet::from_fn(grid2(0.1), 1, |t| Ok(vec![t[0]])).unwrap();
        assert!(sheet_prolong(&s, 0).is_err());
        let r = sopde_residual(&Sopde::geodesic(&MetricField::flat(1)), &s).unwrap();
        assert_eq!(r.skipped, 16);
        assert_eq!(r.nodes.len(), 9);
    }

    #[test]
    fn compatibility_trivial_cases() {
        let x = KVelocity::new(vec![0.1, 0.2], DMatrix::from_row_slice(2, 2, &[1.0, 0.3, -0.4, 2.0])).unwrap();
        let flat = MetricField::flat(2);
        assert_eq!(compatibility_defect(&Sopde::geodesic(&flat), &x).unwrap(), 0.0);
        let mut f = Tensor3::zeros(2, 2);
        f.set(1, 0, 1, 0.7);
        f.set(1, 1, 0, 0.7);
        let d = Sopde::newton(&flat, &ForceField::constant(&f).unwrap()).unwrap();
        assert_eq!(compatibility_defect(&d, &x).unwrap(), 0.0);
    }

    #[test]
    fn sphere_rank_two_obstruction() {
        let g = MetricField::sphere(1.0);
        let x = KVelocity::new(vec![1.0, 0.3], DMatrix::from_row_slice(2, 2, &[0.5, 0.2, -0.1, 0.8])).unwrap();
        assert!(compatibility_defect(&Sopde::geodesic(&g), &x).unwrap() > 1e-3);
    }
}
