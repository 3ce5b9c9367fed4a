use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::array::Tensor3;
use crate::bundles::KVelocity;
use crate::dynamics::{
    calt, calt_closed_form, classical_newton_residual, force_from_sopde, geodesic_oracle,
    kinetic_differential, newton_coefficients, newton_identity_check, ForceField, Sopde,
};
use crate::error::Result;
use crate::exprlang::Expr;
use crate::geometry::{invert, MetricField};
use crate::solve::{
    compatibility_defect, flat_newton_sheet, integrate_geodesic, newton_residual, rank1_sheet,
    sopde_residual, Sheet,
};
use crate::variational::{
    ddw_residual, hamilton_noether_check, noether_divergence, symmetry_defect, Potential,
    ProlongedVector,
};

use super::report::{Check, Report};
use super::scenario::{Expect, Scenario, Task};

const FD_STEP: f64 = 1e-5;
const ORACLE_STEP: f64 = 1e-3;
const ORACLE_SUBSTEPS: usize = 1000;
const INTEGRATOR_STEP: f64 = 1e-3;

type Artifacts = Vec<(String, Sheet)>;

pub(super) fn execute(sc: &Scenario, name: &str) -> Result<(Report, Artifacts)> {
    let mut report = Report {
        task: sc.task.name().to_string(),
        scenario: name.to_string(),
        metric: sc.metric.label().to_string(),
        seed: sc.seed,
        n: sc.metric.dim(),
        k: sc.k,
        tolerance_overrides: sc.tolerances.overrides().into_iter().map(|(k, v)| (k.to_string(), v)).collect(),
        notes: Vec::new(),
        checks: Vec::new(),
        artifacts: Vec::new(),
    };
    let mut artifacts = Vec::new();
    match sc.task {
        Task::Christoffel => christoffel(sc, &mut report)?,
        Task::Geodesic => geodesic(sc, &mut report, &mut artifacts)?,
        Task::Newton => newton(sc, &mut report, &mut artifacts)?,
        Task::Ddw => sheets(sc, &mut report, true)?,
        Task::Noether => noether(sc, &mut report)?,
        Task::Verify => verify(sc, &mut report)?,
    }
    Ok((report, artifacts))
}

fn initial(sc: &Scenario) -> &KVelocity {
    sc.initial.as_ref().expect("validated by the scenario loader")
}

/// Seeded points around the initial data: q perturbed by up to ±0.2 per
/// coordinate, velocities uniform in [−1, 1].
fn sample_points(sc: &Scenario, count: usize) -> Result<Vec<KVelocity>> {
    let x0 = initial(sc);
    let mut rng = ChaCha8Rng::seed_from_u64(sc.seed);
    let (n, k) = (x0.n(), x0.k());
    (0..count)
        .map(|_| {
            let q: Vec<f64> = x0.q().iter().map(|v| v + rng.gen_range(-0.2..0.2)).collect();
            let qdot = DMatrix::from_fn(n, k, |_, _| rng.gen_range(-1.0..1.0));
            KVelocity::new(q, qdot)
        })
        .collect()
}

fn christoffel_fd(g: &MetricField, q: &[f64]) -> Result<Vec<f64>> {
    let n = g.dim();
    let mut dg = vec![0.0; n * n * n];
    for m in 0..n {
        let mut qp = q.to_vec();
        let mut qm = q.to_vec();
        qp[m] += FD_STEP;
        qm[m] -= FD_STEP;
        let gp = g.eval_entries(&qp)?;
        let gm = g.eval_entries(&qm)?;
        for ij in 0..n * n {
            dg[ij * n + m] = (gp[ij] - gm[ij]) / (2.0 * FD_STEP);
        }
    }
    let ginv = invert(&g.eval_entries(q)?, n)?;
    let d = |i: usize, j: usize, m: usize| dg[(i * n + j) * n + m];
    let mut gamma = vec![0.0; n * n * n];
    for l in 0..n {
        for i in 0..n {
            for j in 0..n {
                gamma[(l * n + i) * n + j] = (0..n)
                    .map(|m| 0.5 * ginv[l * n + m] * (d(j, m, i) + d(i, m, j) - d(i, j, m)))
                    .sum();
            }
        }
    }
    Ok(gamma)
}

fn christoffel(sc: &Scenario, r: &mut Report) -> Result<()> {
    let g = &sc.metric;
    let q = initial(sc).q();
    let n = g.dim();
    let c = g.christoffel(q)?;
    let names = g.chart().names();
    r.notes.push(format!("Christoffel symbols at q = {q:?} (nonzero, i <= j):"));
    let mut asym = 0.0_f64;
    let mut fd_err = 0.0_f64;
    let fd = christoffel_fd(g, q)?;
    for l in 0..n {
        for i in 0..n {
            for j in 0..n {
                asym = asym.max((c.get(l, i, j) - c.get(l, j, i)).abs());
                fd_err = fd_err.max((c.get(l, i, j) - fd[(l * n + i) * n + j]).abs());
                if i <= j && c.get(l, i, j) != 0.0 {
                    r.notes.push(format!("  Γ^{}_{{{} {}}} = {:.15e}", names[l], names[i], names[j], c.get(l, i, j)));
                }
            }
        }
    }
    r.checks.push(Check::at_most("Γ^l_ij − Γ^l_ji", asym, 0.0));
    r.checks.push(Check::at_most(
        "Γ vs central-difference ½g^{lm}(∂_i g_jm + ∂_j g_im − ∂_m g_ij)",
        fd_err,
        sc.tolerances.get("christoffel_fd"),
    ));
    Ok(())
}

fn geodesic(sc: &Scenario, r: &mut Report, artifacts: &mut Artifacts) -> Result<()> {
    let g = &sc.metric;
    let x = initial(sc);
    let formula = Sopde::geodesic(g).coefficients_at(x)?;
    let oracle = geodesic_oracle(g, x, ORACLE_STEP, ORACLE_SUBSTEPS)?;
    r.checks.push(Check::at_most(
        "A = −Γ(q̇_α, q̇_β) vs second differences of exp_q(tᵅX_α)",
        (&formula - &oracle).max_abs(),
        sc.tolerances.get("oracle"),
    ));
    let path = integrate_geodesic(g, x.q(), &x.column(0), 1.0, INTEGRATOR_STEP)?;
    r.checks.push(Check::at_most(
        "energy drift of ½g(q̇,q̇) along exp_q(sX_1), s ∈ [0,1]",
        path.energy_drift(g)?,
        sc.tolerances.get("energy_drift"),
    ));
    let d = Sopde::geodesic(g);
    match &sc.grid {
        Some(grid) => match rank1_sheet(g, x, grid.clone(), INTEGRATOR_STEP) {
            Ok(sheet) => {
                let res = sopde_residual(&d, &sheet)?;
                r.notes.push(format!("rank-1 sheet: {} interior nodes, {} boundary nodes skipped", res.nodes.len(), res.skipped));
                r.checks.push(Check::at_most(
                    "rank-1 sheet: ∂²q/∂tᵅ∂tᵝ + Γ(∂_αq, ∂_βq)",
                    res.max,
                    sc.tolerances.get("rank1_newton"),
                ));
                artifacts.push(("rank1_sheet.csv".into(), sheet));
            }
            Err(crate::Error::Precondition(msg)) => r.notes.push(format!("no rank-1 sheet: {msg}")),
            Err(e) => return Err(e),
        },
        None => r.notes.push("no [grid]: rank-1 sheet skipped".into()),
    }
    r.checks.push(Check::info("compatibility defect |D_αA_βγ − D_βA_αγ|", compatibility_defect(&d, x)?));
    Ok(())
}

fn newton(sc: &Scenario, r: &mut Report, artifacts: &mut Artifacts) -> Result<()> {
    let g = &sc.metric;
    let x = initial(sc);
    let f = sc.force_or_zero();
    let d = Sopde::newton(g, &f)?;
    let fx = f.eval_at(x)?;
    let back = force_from_sopde(g, &d, x)?;
    r.checks.push(Check::at_most("F → SOPDE → F", (&back - &fx).max_abs(), sc.tolerances.get("roundtrip")));
    let res = newton_identity_check(g, &d, &f, x)?;
    r.checks.push(Check::at_most("ι_D dθ + 𝒯 − F", res.max_abs(), sc.tolerances.get("identity")));
    r.checks.push(Check::info("compatibility defect |D_αA_βγ − D_βA_αγ|", compatibility_defect(&d, x)?));
    if let Some(grid) = &sc.grid {
        if g.is_constant() && f.is_constant() {
            let sheet = flat_newton_sheet(g, &f, x.q(), x.qdot(), grid.clone())?;
            let res = newton_residual(g, &f, &sheet)?;
            r.checks.push(Check::at_most(
                "closed-form sheet a + b_αtᵅ + ½g⁻¹F_αβtᵅtᵝ: Newton residual",
                res.max,
                sc.tolerances.get("newton"),
            ));
            artifacts.push(("newton_sheet.csv".into(), sheet));
        } else {
            r.notes.push("closed-form sheet needs a constant metric and force: skipped".into());
        }
    }
    sheets(sc, r, false)
}

/// Per-sheet Newton (and optionally DDW) residual checks.
fn sheets(sc: &Scenario, r: &mut Report, with_ddw: bool) -> Result<()> {
    let g = &sc.metric;
    let f = sc.force_or_zero();
    let zero = Potential::zero();
    let u = sc.potential.as_ref().unwrap_or(&zero);
    let tol = &sc.tolerances;
    if with_ddw && !sc.sheets.is_empty() {
        let defect = sc
            .sheets
            .iter()
            .map(|s| crate::variational::trace_defect(&f, u, &s.sheet))
            .collect::<Result<Vec<_>>>()?
            .into_iter()
            .fold(0.0_f64, f64::max);
        r.checks.push(Check::at_most("F_α^α + dU at sheet nodes", defect, crate::variational::CONSERVATIVE_TOL));
        if defect > crate::variational::CONSERVATIVE_TOL {
            return Ok(());
        }
    }
    for entry in &sc.sheets {
        let nr = newton_residual(g, &f, &entry.sheet)?;
        let label = format!("sheet `{}`", entry.name);
        r.notes.push(format!("{label}: {} boundary nodes skipped for Newton residual", nr.skipped));
        let newton_name = format!("{label}: Newton ∂²q/∂tᵅ∂tᵝ = −Γ(∂_αq, ∂_βq) + g⁻¹F_αβ");
        match entry.expect {
            Expect::Solution => r.checks.push(Check::at_most(newton_name.clone(), nr.max, tol.get("newton"))),
            Expect::DdwOnly => r.checks.push(Check::above(newton_name.clone(), nr.max, tol.get("newton"))),
            Expect::None => r.checks.push(Check::info(newton_name.clone(), nr.max)),
        }
        if let Some(v) = entry.newton_value {
            r.checks.push(Check::near(format!("{label}: max Newton residual"), nr.max, v, tol.get("newton_value")));
        }
        if with_ddw {
            let dr = ddw_residual(g, u, &entry.sheet)?;
            let name = format!("{label}: DDW ∂_αq = ∂H/∂p^α, ∂_αp^α = −∂H/∂q");
            match entry.expect {
                Expect::Solution | Expect::DdwOnly => r.checks.push(Check::at_most(name, dr.max(), tol.get("ddw"))),
                Expect::None => r.checks.push(Check::info(name, dr.max())),
            }
        }
    }
    Ok(())
}

fn noether(sc: &Scenario, r: &mut Report) -> Result<()> {
    let g = &sc.metric;
    let v = sc.symmetry.as_ref().expect("validated by the scenario loader");
    let zero = Potential::zero();
    let u = sc.potential.as_ref().unwrap_or(&zero);
    if sc.initial.is_some() {
        let samples = sample_points(sc, sc.samples)?;
        r.checks.push(Check::at_most(
            format!("δ_v L at {} seeded points", samples.len()),
            symmetry_defect(g, u, v, &samples)?,
            sc.tolerances.get("symmetry"),
        ));
    }
    for entry in &sc.sheets {
        let d = noether_divergence(g, v, &entry.sheet)?;
        let name = format!("sheet `{}`: Σ_α ∂J^α/∂tᵅ, J^α = p_i^α vⁱ", entry.name);
        match entry.expect {
            Expect::Solution => r.checks.push(Check::at_most(name, d.max, sc.tolerances.get("divergence"))),
            _ => r.checks.push(Check::info(name, d.max)),
        }
    }
    Ok(())
}

fn default_field(n: usize) -> Result<ProlongedVector> {
    ProlongedVector::from_exprs(
        (0..n)
            .map(|i| Expr::add(Expr::num(1.0), Expr::mul(Expr::coord((i + 1) % n), Expr::coord(i))))
            .collect(),
    )
}

fn verify(sc: &Scenario, r: &mut Report) -> Result<()> {
    let g = &sc.metric;
    let tol = &sc.tolerances;
    let n = g.dim();
    let points = sample_points(sc, sc.samples)?;
    let f = sc.force_or_zero();
    let geo = Sopde::geodesic(g);
    let newton = Sopde::newton(g, &f)?;
    let zero_f = ForceField::zero(n, sc.k);
    let v = match &sc.symmetry {
        Some(v) => v.clone(),
        None => default_field(n)?,
    };
    let f1 = if sc.k == 1 { f.clone() } else { ForceField::zero(n, 1) };
    let d1 = Sopde::newton(g, &f1)?;
    let mut worst = [0.0_f64; 8];
    let mut rng = ChaCha8Rng::seed_from_u64(sc.seed ^ 0x5eed);
    for x in &points {
        let bump = |w: &mut f64, v: f64| *w = w.max(v);
        bump(&mut worst[0], newton_identity_check(g, &geo, &zero_f, x)?.max_abs());
        let t = calt(g, x)?;
        bump(&mut worst[1], t.max_abs_diff(&calt_closed_form(g, x)?));
        bump(&mut worst[2], newton_identity_check(g, &newton, &f, x)?.max_abs());
        let dt = kinetic_differential(g, x)?;
        bump(&mut worst[3], t.trace().iter().zip(&dt).fold(0.0, |m, (a, b)| m.max((a - b).abs())));
        let fx = f.eval_at(x)?;
        bump(&mut worst[4], (&force_from_sopde(g, &newton, x)? - &fx).max_abs());
        let a_rand = random_symmetric(&mut rng, n, sc.k);
        let f_back = {
            let geo_a = geo.coefficients_at(x)?;
            let sum = Tensor3::from_fn(n, sc.k, |i, al, be| geo_a.get(i, al, be) + a_rand.get(i, al, be));
            let m = g.eval(x.q())?;
            Tensor3::from_fn(n, sc.k, |i, al, be| (0..n).map(|j| m.g[(i, j)] * (sum.get(j, al, be) - geo_a.get(j, al, be))).sum())
        };
        let a_again = newton_coefficients(g, &f_back, x)?;
        let geo_a = geo.coefficients_at(x)?;
        let a_expect = Tensor3::from_fn(n, sc.k, |i, al, be| geo_a.get(i, al, be) + a_rand.get(i, al, be));
        bump(&mut worst[5], (&a_again - &a_expect).max_abs());
        let x1 = KVelocity::new(x.q().to_vec(), DMatrix::from_column_slice(n, 1, &x.column(0)))?;
        bump(&mut worst[6], classical_newton_residual(g, &d1, &f1, &x1)?.iter().fold(0.0, |m, c| m.max(c.abs())));
        let (lhs, rhs) = hamilton_noether_check(g, &f, &newton, &v, x)?;
        bump(&mut worst[7], (lhs - rhs).abs());
    }
    let count = points.len();
    r.notes.push(format!("{count} seeded points around the initial data"));
    let c = &mut r.checks;
    c.push(Check::at_most("ι_{D_G}dθ + 𝒯 = 0", worst[0], tol.get("identity")));
    c.push(Check::at_most("𝒯 expanded form vs 𝒯 = −ι_{D_G}dθ", worst[1], tol.get("closed_form")));
    c.push(Check::at_most("ι_D dθ + 𝒯 = F", worst[2], tol.get("identity")));
    c.push(Check::at_most("tr 𝒯 = dT", worst[3], tol.get("trace")));
    c.push(Check::at_most("F → SOPDE → F", worst[4], tol.get("roundtrip")));
    c.push(Check::at_most("SOPDE → F → SOPDE", worst[5], tol.get("roundtrip")));
    c.push(Check::at_most("k = 1: ι_D dθ + dT = F", worst[6], tol.get("identity")));
    c.push(Check::at_most("D_α⟨θ^α, δ_v⟩ = ⟨dT + F_α^α, δ_v⟩", worst[7], tol.get("noether_identity")));
    Ok(())
}

fn random_symmetric(rng: &mut ChaCha8Rng, n: usize, k: usize) -> Tensor3 {
    let mut t = Tensor3::zeros(n, k);
    for i in 0..n {
        for a in 0..k {
            for b in a..k {
                let v = rng.gen_range(-1.0..1.0);
                t.set(i, a, b, v);
                t.set(i, b, a, v);
            }
        }
    }
    t
}
