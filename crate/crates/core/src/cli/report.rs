use std::fmt::Write as _;

/// Pass rule of a check.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Criterion {
    AtMost(f64),
    /// Strictly above the bound: a residual that must not vanish.
    Above(f64),
    Near { expected: f64, tol: f64 },
    /// Reported, never fails.
    Info,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Check {
    pub name: String,
    pub value: f64,
    pub criterion: Criterion,
}

impl Check {
    pub fn at_most(name: impl Into<String>, value: f64, tol: f64) -> Self {
        Self { name: name.into(), value, criterion: Criterion::AtMost(tol) }
    }

    pub fn above(name: impl Into<String>, value: f64, bound: f64) -> Self {
        Self { name: name.into(), value, criterion: Criterion::Above(bound) }
    }

    pub fn near(name: impl Into<String>, value: f64, expected: f64, tol: f64) -> Self {
        Self { name: name.into(), value, criterion: Criterion::Near { expected, tol } }
    }

    pub fn info(name: impl Into<String>, value: f64) -> Self {
        Self { name: name.into(), value, criterion: Criterion::Info }
    }

    pub fn passed(&self) -> bool {
        match self.criterion {
            Criterion::AtMost(t) => self.value <= t,
            Criterion::Above(b) => self.value > b,
            Criterion::Near { expected, tol } => (self.value - expected).abs() <= tol,
            Criterion::Info => true,
        }
    }

    fn render(&self) -> String {
        let status = match self.criterion {
            Criterion::Info => "INFO",
            _ if self.passed() => "PASS",
            _ => "FAIL",
        };
        let rule = match self.criterion {
            Criterion::AtMost(t) => format!("<= {t:.1e}"),
            Criterion::Above(b) => format!("> {b:.1e}"),
            Criterion::Near { expected, tol } => format!("= {expected} ± {tol:.1e}"),
            Criterion::Info => String::new(),
        };
        format!("[{status}] {}: {:.6e} {rule}", self.name, self.value).trim_end().to_string()
    }
}

/// Outcome of one scenario run. The rendering contains no timestamps or
/// absolute paths, so identical inputs give identical bytes.
#[derive(Debug, Clone, PartialEq)]
pub struct Report {
    pub task: String,
    pub scenario: String,
    pub metric: String,
    pub seed: u64,
    pub n: usize,
    pub k: usize,
    pub tolerance_overrides: Vec<(String, f64)>,
    pub notes: Vec<String>,
    pub checks: Vec<Check>,
    pub artifacts: Vec<String>,
}

impl Report {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(Check::passed)
    }

    /// 0 when every check passes, 1 otherwise.
    pub fn exit_code(&self) -> i32 {
        if self.passed() {
            0
        } else {
            1
        }
    }

    pub fn check(&self, name: &str) -> Option<&Check> {
        self.checks.iter().find(|c| c.name == name)
    }

    pub fn render(&self) -> String {
        let mut out = String::new();
        let w = &mut out;
        writeln!(w, "task: {}", self.task).unwrap();
        writeln!(w, "scenario: {}", self.scenario).unwrap();
        writeln!(w, "metric: {} (n = {}, k = {})", self.metric, self.n, self.k).unwrap();
        writeln!(w, "seed: {}", self.seed).unwrap();
        for (k, v) in &self.tolerance_overrides {
            writeln!(w, "tolerance override: {k} = {v:e}").unwrap();
        }
        for note in &self.notes {
            writeln!(w, "  {note}").unwrap();
        }
        writeln!(w, "checks:").unwrap();
        for c in &self.checks {
            writeln!(w, "  {}", c.render()).unwrap();
        }
        if !self.artifacts.is_empty() {
            writeln!(w, "artifacts:").unwrap();
            for a in &self.artifacts {
                writeln!(w, "  {a}").unwrap();
            }
        }
        let failed = self.checks.iter().filter(|c| !c.passed()).count();
        if failed == 0 {
            writeln!(w, "status: PASS").unwrap();
        } else {
            writeln!(w, "status: FAIL ({failed} of {} checks failed)", self.checks.len()).unwrap();
        }
        out
    }
}
