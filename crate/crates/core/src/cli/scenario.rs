//! Scenario files (TOML).
//!
//! ```toml
//! task = "verify"            # christoffel | geodesic | newton | ddw | noether | verify
//! seed = 7                   # optional, default 0; --seed overrides
//! samples = 100              # optional, random points for verify
//!
//! [chart]                    # optional coordinate names
//! names = ["theta", "phi"]
//!
//! [metric]                   # catalog: flat | minkowski | sphere | hyperbolic | product | custom
//! catalog = "sphere"
//! radius = 1.0               # sphere; `n` for flat and minkowski
//! # factors = [{ catalog = "sphere" }, { catalog = "flat", n = 1 }]   (product)
//! # entries = [["1", "0"], ["0", "sin(theta)^2"]]                      (custom)
//!
//! [force]                    # optional, F[j][α][β]; may use qd(i, a)
//! entries = [[["0", "0"], ["0", "0"]], [["0", "0"], ["0", "0"]]]
//!
//! [potential]                # optional
//! u = "0"
//!
//! [symmetry]                 # optional vector field v
//! v = ["0", "1"]
//!
//! [initial]                  # base point and velocity matrix (n rows, k columns)
//! q = [1.0, 0.0]
//! qdot = [[0.3, 0.1], [0.5, -0.2]]
//!
//! [grid]                     # parameter rectangle, ≥ 5 nodes per axis
//! lower = [-0.5, -0.5]
//! upper = [0.5, 0.5]
//! nodes = [9, 9]
//!
//! [[sheets]]                 # optional user sheets over the grid
//! name = "affine"
//! q = ["1 + t1", "2 - t2"]   # expressions in t1..tk, or csv = "file.csv"
//! expect = "solution"        # solution | ddw-only | none
//! newton = 2.0               # optional expected max Newton residual
//!
//! [tolerances]               # optional overrides
//! identity = 1e-9
//! ```

use std::collections::BTreeMap;
use std::path::Path;

use nalgebra::DMatrix;
use serde::Deserialize;

use crate::bundles::KVelocity;
use crate::dynamics::ForceField;
use crate::error::{Error, Result};
use crate::exprlang::{parse, EvalEnv, Scope};
use crate::geometry::{Chart, MetricField};
use crate::solve::{read_sheet, Grid, Sheet};
use crate::variational::{Potential, ProlongedVector};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Task {
    Christoffel,
    Geodesic,
    Newton,
    Ddw,
    Noether,
    Verify,
}

impl Task {
    fn parse(s: &str) -> Result<Self> {
        Ok(match s {
            "christoffel" => Task::Christoffel,
            "geodesic" => Task::Geodesic,
            "newton" => Task::Newton,
            "ddw" => Task::Ddw,
            "noether" => Task::Noether,
            "verify" => Task::Verify,
            other => {
                return Err(Error::Scenario(format!(
                    "unknown task `{other}` (expected christoffel, geodesic, newton, ddw, noether or verify)"
                )))
            }
        })
    }

    pub fn name(self) -> &'static str {
        match self {
            Task::Christoffel => "christoffel",
            Task::Geodesic => "geodesic",
            Task::Newton => "newton",
            Task::Ddw => "ddw",
            Task::Noether => "noether",
            Task::Verify => "verify",
        }
    }
}

/// What a user sheet is expected to satisfy.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Expect {
    /// Newton and DDW residuals both small.
    Solution,
    /// DDW residual small, Newton residual above tolerance.
    DdwOnly,
    /// Residuals reported only.
    None,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SheetSpec {
    pub name: String,
    pub sheet: Sheet,
    pub expect: Expect,
    pub newton_value: Option<f64>,
}

/// Tolerances with their defaults; every key can be overridden.
#[derive(Debug, Clone, PartialEq)]
pub struct Tolerances {
    values: BTreeMap<&'static str, f64>,
}

const DEFAULT_TOLERANCES: &[(&str, f64)] = &[
    ("christoffel_fd", 1e-6),
    ("oracle", 1e-5),
    ("energy_drift", 1e-8),
    ("identity", 1e-9),
    ("closed_form", 1e-9),
    ("trace", 1e-10),
    ("roundtrip", 1e-12),
    ("noether_identity", 1e-9),
    ("newton", 1e-10),
    ("newton_value", 1e-8),
    ("ddw", 1e-8),
    ("rank1_newton", 1e-5),
    ("symmetry", 1e-12),
    ("divergence", 1e-8),
];

impl Default for Tolerances {
    fn default() -> Self {
        Self { values: DEFAULT_TOLERANCES.iter().copied().collect() }
    }
}

impl Tolerances {
    pub fn get(&self, key: &str) -> f64 {
        self.values[key]
    }

    /// Keys whose value differs from the default.
    pub fn overrides(&self) -> Vec<(&'static str, f64)> {
        DEFAULT_TOLERANCES
            .iter()
            .filter(|(k, v)| self.values[k] != *v)
            .map(|(k, _)| (*k, self.values[k]))
            .collect()
    }

    fn set(&mut self, key: &str, value: f64) -> Result<()> {
        let Some((k, _)) = DEFAULT_TOLERANCES.iter().find(|(k, _)| *k == key) else {
            let known: Vec<&str> = DEFAULT_TOLERANCES.iter().map(|(k, _)| *k).collect();
            return Err(Error::Scenario(format!("unknown tolerance `{key}` (known: {})", known.join(", "))));
        };
        if !(value > 0.0 && value.is_finite()) {
            return Err(Error::Scenario(format!("tolerance `{key}` must be positive")));
        }
        self.values.insert(k, value);
        Ok(())
    }
}

/// A validated scenario.
#[derive(Debug, Clone)]
pub struct Scenario {
    pub task: Task,
    pub seed: u64,
    pub samples: usize,
    pub k: usize,
    pub metric: MetricField,
    pub force: Option<ForceField>,
    pub potential: Option<Potential>,
    pub symmetry: Option<ProlongedVector>,
    pub initial: Option<KVelocity>,
    pub grid: Option<Grid>,
    pub sheets: Vec<SheetSpec>,
    pub tolerances: Tolerances,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawScenario {
    task: String,
    seed: Option<u64>,
    samples: Option<usize>,
    chart: Option<RawChart>,
    metric: RawMetric,
    force: Option<RawForce>,
    potential: Option<RawPotential>,
    symmetry: Option<RawSymmetry>,
    initial: Option<RawInitial>,
    grid: Option<RawGrid>,
    #[serde(default)]
    sheets: Vec<RawSheet>,
    #[serde(default)]
    tolerances: BTreeMap<String, f64>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawChart {
    names: Vec<String>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawMetric {
    catalog: String,
    n: Option<usize>,
    radius: Option<f64>,
    factors: Option<Vec<RawMetric>>,
    entries: Option<Vec<Vec<String>>>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawForce {
    entries: Vec<Vec<Vec<String>>>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawPotential {
    u: String,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawSymmetry {
    v: Vec<String>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawInitial {
    q: Vec<f64>,
    qdot: Vec<Vec<f64>>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawGrid {
    lower: Vec<f64>,
    upper: Vec<f64>,
    nodes: Vec<usize>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawSheet {
    name: String,
    q: Option<Vec<String>>,
    csv: Option<String>,
    expect: Option<String>,
    newton: Option<f64>,
}

fn context(what: &str, e: Error) -> Error {
    match e {
        Error::Scenario(m) => Error::Scenario(format!("{what}: {m}")),
        other => Error::Scenario(format!("{what}: {other}")),
    }
}

fn build_catalog(m: &RawMetric, chart: Option<&Chart>) -> Result<MetricField> {
    let unused = |field: bool, name: &str| -> Result<()> {
        if field {
            return Err(Error::Scenario(format!("metric `{}` does not take `{name}`", m.catalog)));
        }
        Ok(())
    };
    let g = match m.catalog.as_str() {
        "flat" | "minkowski" => {
            unused(m.radius.is_some(), "radius")?;
            unused(m.factors.is_some(), "factors")?;
            unused(m.entries.is_some(), "entries")?;
            let n = m.n.or(chart.map(Chart::dim)).ok_or_else(|| Error::Scenario(format!("metric `{}` needs `n`", m.catalog)))?;
            if n == 0 {
                return Err(Error::Scenario("metric dimension must be at least 1".into()));
            }
            if m.catalog == "flat" {
                MetricField::flat(n)
            } else {
                MetricField::minkowski(n)
            }
        }
        "sphere" => {
            unused(m.n.is_some(), "n")?;
            unused(m.factors.is_some(), "factors")?;
            unused(m.entries.is_some(), "entries")?;
            let r = m.radius.unwrap_or(1.0);
            if !(r > 0.0 && r.is_finite()) {
                return Err(Error::Scenario("sphere radius must be positive".into()));
            }
            MetricField::sphere(r)
        }
        "hyperbolic" => {
            unused(m.n.is_some(), "n")?;
            unused(m.radius.is_some(), "radius")?;
            unused(m.factors.is_some(), "factors")?;
            unused(m.entries.is_some(), "entries")?;
            MetricField::hyperbolic()
        }
        "product" => {
            unused(m.entries.is_some(), "entries")?;
            let factors = m.factors.as_ref().filter(|f| f.len() >= 2).ok_or_else(|| {
                Error::Scenario("metric `product` needs at least two `factors`".into())
            })?;
            let mut g = build_catalog(&factors[0], None)?;
            for f in &factors[1..] {
                g = MetricField::product(&g, &build_catalog(f, None)?);
            }
            g
        }
        "custom" => {
            let entries = m.entries.as_ref().ok_or_else(|| Error::Scenario("metric `custom` needs `entries`".into()))?;
            let chart = chart.cloned().unwrap_or_else(|| Chart::standard(entries.len()));
            return MetricField::parse(chart, entries).map_err(|e| context("metric.entries", e));
        }
        other => {
            return Err(Error::Scenario(format!(
                "unknown metric catalog `{other}` (expected flat, minkowski, sphere, hyperbolic, product or custom)"
            )))
        }
    };
    match chart {
        Some(c) => g.with_chart(c.clone()).map_err(|e| context("chart", e)),
        None => Ok(g),
    }
}

fn parse_expect(s: Option<&str>) -> Result<Expect> {
    Ok(match s {
        None | Some("none") => Expect::None,
        Some("solution") => Expect::Solution,
        Some("ddw-only") => Expect::DdwOnly,
        Some(other) => {
            return Err(Error::Scenario(format!("unknown sheet expectation `{other}` (expected solution, ddw-only or none)")))
        }
    })
}

impl Scenario {
    /// Reads and validates a scenario file. Relative CSV paths are resolved
    /// against the scenario's directory.
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Io { path: path.to_path_buf(), message: e.to_string() })?;
        Self::from_toml(&text, path.parent().unwrap_or(Path::new(".")))
    }

    pub fn from_toml(text: &str, base_dir: &Path) -> Result<Self> {
        let raw: RawScenario = toml::from_str(text).map_err(|e| Error::Scenario(e.to_string().trim_end().to_string()))?;
        let task = Task::parse(&raw.task)?;
        let chart = match &raw.chart {
            Some(c) => Some(Chart::new(c.names.clone()).map_err(|e| context("chart.names", e))?),
            None => None,
        };
        let metric = build_catalog(&raw.metric, chart.as_ref())?;
        let chart = metric.chart().clone();
        let n = chart.dim();

        let initial = match &raw.initial {
            Some(init) => {
                if init.q.len() != n || init.qdot.len() != n {
                    return Err(Error::Scenario(format!("initial: q and qdot need {n} rows")));
                }
                let k = init.qdot[0].len();
                if k == 0 || init.qdot.iter().any(|r| r.len() != k) {
                    return Err(Error::Scenario("initial.qdot rows must all have the same length k ≥ 1".into()));
                }
                let flat: Vec<f64> = init.qdot.iter().flatten().copied().collect();
                Some(KVelocity::new(init.q.clone(), DMatrix::from_row_slice(n, k, &flat)).map_err(|e| context("initial", e))?)
            }
            None => None,
        };
        let grid = match &raw.grid {
            Some(gr) => Some(Grid::new(gr.lower.clone(), gr.upper.clone(), gr.nodes.clone()).map_err(|e| context("grid", e))?),
            None => None,
        };
        let k = match (&initial, &grid) {
            (Some(x), Some(gr)) if x.k() != gr.k() => {
                return Err(Error::Scenario(format!("initial.qdot has k = {} columns but the grid has k = {} axes", x.k(), gr.k())))
            }
            (Some(x), _) => x.k(),
            (None, Some(gr)) => gr.k(),
            (None, None) => raw.force.as_ref().and_then(|f| f.entries.first()).map_or(1, |m| m.len().max(1)),
        };
        let force = match &raw.force {
            Some(f) => Some(ForceField::parse(&chart, k, &f.entries).map_err(|e| context("force.entries", e))?),
            None => None,
        };
        let potential = match &raw.potential {
            Some(p) => Some(Potential::parse(&chart, &p.u).map_err(|e| context("potential.u", e))?),
            None => None,
        };
        let symmetry = match &raw.symmetry {
            Some(s) => Some(ProlongedVector::parse(&chart, &s.v).map_err(|e| context("symmetry.v", e))?),
            None => None,
        };

        let mut sheets = Vec::new();
        for (idx, rs) in raw.sheets.iter().enumerate() {
            let what = format!("sheets[{idx}] `{}`", rs.name);
            let sheet = match (&rs.q, &rs.csv) {
                (Some(exprs), None) => {
                    let grid = grid.clone().ok_or_else(|| Error::Scenario(format!("{what}: expression sheets need a [grid]")))?;
                    if exprs.len() != n {
                        return Err(Error::Scenario(format!("{what}: needs {n} expressions")));
                    }
                    let scope = Scope::coords((1..=k).map(|a| format!("t{a}")).collect());
                    let parsed = exprs.iter().map(|s| parse(s, &scope)).collect::<Result<Vec<_>>>().map_err(|e| context(&what, e))?;
                    Sheet::from_fn(grid, n, |t| parsed.iter().map(|e| e.eval(&EvalEnv::coords(t))).collect())
                        .map_err(|e| context(&what, e))?
                }
                (None, Some(file)) => {
                    let s = read_sheet(&base_dir.join(file)).map_err(|e| context(&what, e))?;
                    if s.n() != n || s.k() != k {
                        return Err(Error::Scenario(format!("{what}: CSV has n = {}, k = {}, scenario has n = {n}, k = {k}", s.n(), s.k())));
                    }
                    s
                }
                _ => return Err(Error::Scenario(format!("{what}: give exactly one of `q` or `csv`"))),
            };
            sheets.push(SheetSpec {
                name: rs.name.clone(),
                sheet,
                expect: parse_expect(rs.expect.as_deref()).map_err(|e| context(&what, e))?,
                newton_value: rs.newton,
            });
        }

        let mut tolerances = Tolerances::default();
        for (key, v) in &raw.tolerances {
            tolerances.set(key, *v)?;
        }

        let scenario = Self {
            task,
            seed: raw.seed.unwrap_or(0),
            samples: raw.samples.unwrap_or(100),
            k,
            metric,
            force,
            potential,
            symmetry,
            initial,
            grid,
            sheets,
            tolerances,
        };
        scenario.check_requirements()?;
        Ok(scenario)
    }

    fn check_requirements(&self) -> Result<()> {
        let need = |ok: bool, what: &str| -> Result<()> {
            if !ok {
                return Err(Error::Scenario(format!("task `{}` needs {what}", self.task.name())));
            }
            Ok(())
        };
        match self.task {
            Task::Christoffel | Task::Geodesic | Task::Newton | Task::Verify => need(self.initial.is_some(), "[initial]"),
            Task::Ddw => need(!self.sheets.is_empty(), "at least one [[sheets]] entry"),
            Task::Noether => {
                need(self.symmetry.is_some(), "[symmetry]")?;
                need(self.initial.is_some() || !self.sheets.is_empty(), "[initial] or [[sheets]]")
            }
        }
    }

    /// The force, or zero when none is given.
    pub fn force_or_zero(&self) -> ForceField {
        self.force.clone().unwrap_or_else(|| ForceField::zero(self.metric.dim(), self.k))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn load(text: &str) -> Result<Scenario> {
        Scenario::from_toml(text, Path::new("."))
    }

    #[test]
    fn minimal_scenario() {
        let s = load("task = \"christoffel\"\n[metric]\ncatalog = \"sphere\"\n[initial]\nq = [1.0, 0.0]\nqdot = [[0.0], [1.0]]\n").unwrap();
        assert_eq!(s.task, Task::Christoffel);
        assert_eq!(s.k, 1);
        assert_eq!(s.tolerances.get("identity"), 1e-9);
    }

    #[test]
    fn asymmetric_force_diagnostic() {
        let text = "task = \"newton\"\n[metric]\ncatalog = \"flat\"\nn = 1\n[initial]\nq = [0.0]\nqdot = [[1.0, 0.0]]\n[force]\nentries = [[[\"0\", \"1\"], [\"0\", \"0\"]]]\n";
        let err = load(text).unwrap_err();
        assert!(err.to_string().contains("force not symmetric in (α,β)"), "{err}");
    }

    #[test]
    fn expression_errors_carry_offsets() {
        let text = "task = \"noether\"\n[metric]\ncatalog = \"flat\"\nn = 2\n[initial]\nq = [0.0, 0.0]\nqdot = [[1.0], [0.0]]\n[symmetry]\nv = [\"q1 +* q2\", \"0\"]\n";
        let err = load(text).unwrap_err().to_string();
        assert!(err.contains("symmetry.v") && err.contains("offset 3"), "{err}");
    }

    #[test]
    fn unknown_keys_rejected() {
        assert!(load("task = \"verify\"\ncolour = 1\n[metric]\ncatalog = \"flat\"\nn = 1\n").is_err());
        assert!(load("task = \"fly\"\n[metric]\ncatalog = \"flat\"\nn = 1\n").is_err());
        let t = "task = \"christoffel\"\n[metric]\ncatalog = \"flat\"\nn = 1\n[initial]\nq = [0.0]\nqdot = [[1.0]]\n[tolerances]\nbogus = 1.0\n";
        assert!(load(t).is_err());
    }

    #[test]
    fn chart_names_apply_to_catalog() {
        let t = "task = \"christoffel\"\n[chart]\nnames = [\"theta\", \"phi\"]\n[metric]\ncatalog = \"sphere\"\n[initial]\nq = [1.0, 0.0]\nqdot = [[0.0], [1.0]]\n[symmetry]\nv = [\"0\", \"sin(theta)\"]\n";
        let s = load(t).unwrap();
        assert_eq!(s.metric.chart().names()[0], "theta");
    }

    #[test]
    fn product_and_custom_metrics() {
        let t = "task = \"christoffel\"\n[metric]\ncatalog = \"product\"\nfactors = [{ catalog = \"sphere\", radius = 2.0 }, { catalog = \"flat\", n = 1 }]\n[initial]\nq = [1.0, 0.0, 0.0]\nqdot = [[0.0], [1.0], [0.0]]\n";
        assert_eq!(load(t).unwrap().metric.dim(), 3);
        let t = "task = \"christoffel\"\n[metric]\ncatalog = \"custom\"\nentries = [[\"1\", \"0\"], [\"0\", \"q1^2\"]]\n[initial]\nq = [1.0, 0.0]\nqdot = [[0.0], [1.0]]\n";
        assert_eq!(load(t).unwrap().metric.label(), "custom");
    }
}
