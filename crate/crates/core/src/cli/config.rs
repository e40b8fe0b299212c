//! Run configuration: a strict `key = value` format with `[equation]`,
//! `[perturbation]` and `[run]` sections. `#` starts a comment.
//!
//! ```text
//! [equation]
//! name = digamma
//!
//! [perturbation]
//! form = geometric 1 2        # f = ψ₀ + 2^{−x}
//! budget = geometric 0.5 2    # ε(x) = 2^{−x−1}
//!
//! [run]
//! points = 0.5, 1.0, 3.7
//! tol = 1e-9
//! ```

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use thiserror::Error;

use crate::group::GroupKind;
use crate::instances::{EquationKind, PhiSpec};
use crate::stabilizer::StabilizerConfig;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ConfigError {
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("`{key}`: {message}")]
    Semantic { key: String, message: String },
}

fn semantic(key: &str, message: impl Into<String>) -> ConfigError {
    ConfigError::Semantic { key: key.to_string(), message: message.into() }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Mode {
    Stabilize,
    Verify,
    Demo,
}

impl FromStr for Mode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "stabilize" => Ok(Mode::Stabilize),
            "verify" => Ok(Mode::Verify),
            _ => Err(format!("unknown mode {s:?}; expected stabilize or verify")),
        }
    }
}

/// `g` for a custom equation.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum CoefficientSpec {
    Const(f64),
    /// `1/x`
    Reciprocal,
    /// `x`
    Identity,
    /// `ln x`
    Log,
}

impl FromStr for CoefficientSpec {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let words: Vec<&str> = s.split_whitespace().collect();
        match words.as_slice() {
            ["const", c] => c.parse().map(CoefficientSpec::Const).map_err(|_| format!("bad constant {c:?}")),
            ["reciprocal"] => Ok(CoefficientSpec::Reciprocal),
            ["identity"] => Ok(CoefficientSpec::Identity),
            ["log"] => Ok(CoefficientSpec::Log),
            _ => Err(format!("unknown coefficient {s:?}; expected `const <c>`, `reciprocal`, `identity` or `log`")),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum EquationSpec {
    Abel { c: f64, phi: PhiSpec },
    Schroeder { c: f64, phi: PhiSpec },
    Gamma,
    Digamma,
    Custom { phi: PhiSpec, g: CoefficientSpec },
}

impl EquationSpec {
    pub fn name(&self) -> &'static str {
        match self {
            EquationSpec::Abel { .. } => "abel",
            EquationSpec::Schroeder { .. } => "schroeder",
            EquationSpec::Gamma => "gamma",
            EquationSpec::Digamma => "digamma",
            EquationSpec::Custom { .. } => "custom",
        }
    }
}

/// The unperturbed part of the approximate solution.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum BaseFunction {
    /// The built-in equation's reference solution.
    Exact,
    Zero,
    Digamma,
    LogGamma,
}

impl FromStr for BaseFunction {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "exact" => Ok(BaseFunction::Exact),
            "zero" => Ok(BaseFunction::Zero),
            "digamma" => Ok(BaseFunction::Digamma),
            "log-gamma" => Ok(BaseFunction::LogGamma),
            _ => Err(format!("unknown base {s:?}; expected exact, zero, digamma or log-gamma")),
        }
    }
}

/// A real profile `x ↦ p(x)` used for perturbations and budgets.
#[derive(Clone, Debug, PartialEq)]
pub enum Profile {
    Zero,
    Constant(f64),
    /// `a·b^{−x}`
    Geometric(f64, f64),
    /// `a·e^{−r·x}`
    ExpDecay(f64, f64),
    /// `a·x·b^{−x}`
    PolyGeometric(f64, f64),
    /// `a·x`
    Linear(f64),
    /// Listed values at exactly these points, zero elsewhere.
    Table(Vec<(f64, f64)>),
}

impl Profile {
    pub fn eval(&self, x: f64) -> f64 {
        match self {
            Profile::Zero => 0.0,
            Profile::Constant(a) => *a,
            Profile::Geometric(a, b) => a * b.powf(-x),
            Profile::ExpDecay(a, r) => a * (-r * x).exp(),
            Profile::PolyGeometric(a, b) => a * x * b.powf(-x),
            Profile::Linear(a) => a * x,
            Profile::Table(rows) => rows.iter().find(|(p, _)| *p == x).map_or(0.0, |(_, v)| *v),
        }
    }

    fn is_nonnegative(&self) -> bool {
        match self {
            Profile::Zero => true,
            Profile::Constant(a) | Profile::Geometric(a, _) | Profile::ExpDecay(a, _) => *a >= 0.0,
            // x may take either sign; only the caller's points decide.
            Profile::PolyGeometric(a, _) | Profile::Linear(a) => *a >= 0.0,
            Profile::Table(rows) => rows.iter().all(|(_, v)| *v >= 0.0),
        }
    }
}

impl FromStr for Profile {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let words: Vec<&str> = s.split_whitespace().collect();
        let num = |w: &str| w.parse::<f64>().ok().filter(|v| v.is_finite()).ok_or_else(|| format!("bad number {w:?}"));
        let positive_base = |w: &str| {
            num(w).and_then(|b| if b > 0.0 { Ok(b) } else { Err(format!("base must be positive, got {b}")) })
        };
        match words.as_slice() {
            ["zero"] => Ok(Profile::Zero),
            ["constant", a] => Ok(Profile::Constant(num(a)?)),
            ["geometric", a, b] => Ok(Profile::Geometric(num(a)?, positive_base(b)?)),
            ["exp-decay", a, r] => Ok(Profile::ExpDecay(num(a)?, num(r)?)),
            ["poly-geometric", a, b] => Ok(Profile::PolyGeometric(num(a)?, positive_base(b)?)),
            ["linear", a] => Ok(Profile::Linear(num(a)?)),
            ["table", rows @ ..] if !rows.is_empty() => rows
                .iter()
                .map(|r| {
                    let (x, v) = r.split_once(':').ok_or_else(|| format!("table entry {r:?} is not x:value"))?;
                    Ok((num(x)?, num(v)?))
                })
                .collect::<Result<Vec<_>, String>>()
                .map(Profile::Table),
            _ => Err(format!(
                "unknown profile {s:?}; expected zero, constant A, geometric A B, exp-decay A R, \
                 poly-geometric A B, linear A or table x:v ..."
            )),
        }
    }
}

impl fmt::Display for Profile {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Profile::Zero => write!(f, "zero"),
            Profile::Constant(a) => write!(f, "constant {a}"),
            Profile::Geometric(a, b) => write!(f, "geometric {a} {b}"),
            Profile::ExpDecay(a, r) => write!(f, "exp-decay {a} {r}"),
            Profile::PolyGeometric(a, b) => write!(f, "poly-geometric {a} {b}"),
            Profile::Linear(a) => write!(f, "linear {a}"),
            Profile::Table(rows) => {
                write!(f, "table")?;
                for (x, v) in rows {
                    write!(f, " {x}:{v}")?;
                }
                Ok(())
            }
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum BudgetSpec {
    Profile(Profile),
    /// `ε(x)` is the observed defect of `f` at `x`.
    Defect,
}

#[derive(Clone, Debug, PartialEq)]
pub struct RunConfig {
    pub equation: EquationSpec,
    pub group: GroupKind,
    pub base: BaseFunction,
    pub perturbation: Profile,
    pub budget: BudgetSpec,
    pub points: Vec<f64>,
    pub tol: f64,
    pub max_iterations: usize,
    pub mode: Mode,
    /// Worker threads for the point batch; `0` uses the runtime default.
    pub threads: usize,
    pub stabilizer: StabilizerConfig,
}

impl RunConfig {
    /// The flagship digamma scenario: `f = ψ₀ + 2^{−x}` with its exact
    /// defect `ε(x) = 2^{−x−1}` as budget.
    pub fn digamma_demo(points: Vec<f64>, tol: f64) -> Self {
        Self {
            equation: EquationSpec::Digamma,
            group: GroupKind::AdditiveReals,
            base: BaseFunction::Exact,
            perturbation: Profile::Geometric(1.0, 2.0),
            budget: BudgetSpec::Profile(Profile::Geometric(0.5, 2.0)),
            points,
            tol,
            max_iterations: StabilizerConfig::default().max_iterations,
            mode: Mode::Demo,
            threads: 0,
            stabilizer: StabilizerConfig::default(),
        }
    }

    /// Applies `ULAM_MAX_ITER` and `ULAM_TOL` from `lookup`.
    pub fn apply_env(&mut self, lookup: impl Fn(&str) -> Option<String>) -> Result<(), ConfigError> {
        if let Some(v) = lookup("ULAM_MAX_ITER") {
            self.max_iterations = parse_max_iterations("ULAM_MAX_ITER", &v)?;
        }
        if let Some(v) = lookup("ULAM_TOL") {
            self.tol = parse_tol("ULAM_TOL", &v)?;
        }
        self.stabilizer.max_iterations = self.max_iterations;
        Ok(())
    }
}

pub(crate) const DEFAULT_TOL: f64 = 1e-9;

const SECTIONS: [(&str, &[&str]); 3] = [
    ("equation", &["name", "group", "c", "phi", "g", "base"]),
    ("perturbation", &["form", "budget"]),
    (
        "run",
        &[
            "points",
            "tol",
            "max_iterations",
            "mode",
            "threads",
            "ratio_window",
            "ratio_ceiling",
            "zero_run",
            "divergence_window",
        ],
    ),
];

type Entries = BTreeMap<(&'static str, &'static str), (usize, String)>;

fn tokenize(text: &str) -> Result<Entries, ConfigError> {
    let mut entries = Entries::new();
    let mut section: Option<(&'static str, &'static [&'static str])> = None;
    for (idx, raw) in text.lines().enumerate() {
        let line_no = idx + 1;
        let err = |message: String| ConfigError::Parse { line: line_no, message };
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        if let Some(name) = line.strip_prefix('[') {
            let name = name.strip_suffix(']').ok_or_else(|| err(format!("malformed section header {line:?}")))?.trim();
            section = Some(
                SECTIONS
                    .iter()
                    .copied()
                    .find(|(s, _)| *s == name)
                    .ok_or_else(|| err(format!("unknown section [{name}]")))?,
            );
            continue;
        }
        let (key, value) = line.split_once('=').ok_or_else(|| err(format!("expected `key = value`, got {line:?}")))?;
        let (key, value) = (key.trim(), value.trim());
        let (sec, keys) = section.ok_or_else(|| err(format!("key `{key}` appears before any section")))?;
        let key = keys.iter().copied().find(|k| *k == key).ok_or_else(|| err(format!("unknown key `{key}` in [{sec}]")))?;
        if value.is_empty() {
            return Err(err(format!("empty value for `{key}`")));
        }
        if entries.insert((sec, key), (line_no, value.to_string())).is_some() {
            return Err(err(format!("duplicate key `{key}` in [{sec}]")));
        }
    }
    Ok(entries)
}

fn parse_tol(key: &str, v: &str) -> Result<f64, ConfigError> {
    let tol: f64 = v.trim().parse().map_err(|_| semantic(key, format!("not a number: {v:?}")))?;
    if tol > 0.0 && tol.is_finite() {
        Ok(tol)
    } else {
        Err(semantic(key, "tol must be positive"))
    }
}

fn parse_max_iterations(key: &str, v: &str) -> Result<usize, ConfigError> {
    match v.trim().parse::<usize>() {
        Ok(n) if n > 0 => Ok(n),
        _ => Err(semantic(key, format!("max_iterations must be a positive integer, got {v:?}"))),
    }
}

fn parse_points(v: &str) -> Result<Vec<f64>, ConfigError> {
    let points = v
        .split(|c: char| c == ',' || c.is_whitespace())
        .filter(|s| !s.is_empty())
        .map(|s| s.parse::<f64>().ok().filter(|p| p.is_finite()).ok_or_else(|| semantic("points", format!("bad point {s:?}"))))
        .collect::<Result<Vec<_>, _>>()?;
    if points.is_empty() {
        return Err(semantic("points", "points must be non-empty"));
    }
    Ok(points)
}

/// Parses and validates a configuration document.
pub fn parse_config(text: &str) -> Result<RunConfig, ConfigError> {
    let mut entries = tokenize(text)?;
    let mut take = |sec: &'static str, key: &'static str| entries.remove(&(sec, key)).map(|(_, v)| v);

    let name = take("equation", "name").ok_or_else(|| semantic("name", "[equation] name is required"))?;
    let c = take("equation", "c");
    let phi = take("equation", "phi");
    let g = take("equation", "g");
    let group = take("equation", "group");
    let base = take("equation", "base");

    let parse_c = |c: Option<String>| -> Result<f64, ConfigError> {
        let c = c.ok_or_else(|| semantic("c", format!("{name} requires `c`")))?;
        c.parse::<f64>().ok().filter(|v| v.is_finite()).ok_or_else(|| semantic("c", format!("not a number: {c:?}")))
    };
    let parse_phi = |phi: Option<String>| -> Result<PhiSpec, ConfigError> {
        let phi = phi.ok_or_else(|| semantic("phi", format!("{name} requires `phi`")))?;
        phi.parse().map_err(|e: crate::instances::InstanceError| semantic("phi", e.to_string()))
    };
    let reject = |key: &str, present: bool| -> Result<(), ConfigError> {
        if present {
            Err(semantic(key, format!("`{key}` is not a parameter of {name}")))
        } else {
            Ok(())
        }
    };

    let (equation, natural_group) = if name == "custom" {
        reject("c", c.is_some())?;
        let g = g.ok_or_else(|| semantic("g", "custom requires `g`"))?;
        let g: CoefficientSpec = g.parse().map_err(|e: String| semantic("g", e))?;
        (EquationSpec::Custom { phi: parse_phi(phi)?, g }, None)
    } else {
        let kind: EquationKind = name.parse().map_err(|e: crate::instances::InstanceError| semantic("name", e.to_string()))?;
        reject("g", g.is_some())?;
        let spec = match kind {
            EquationKind::Abel => EquationSpec::Abel { c: parse_c(c)?, phi: parse_phi(phi)? },
            EquationKind::Schroeder => {
                let c = parse_c(c)?;
                if c <= 0.0 {
                    return Err(semantic("c", "schroeder requires c > 0"));
                }
                EquationSpec::Schroeder { c, phi: parse_phi(phi)? }
            }
            EquationKind::Gamma | EquationKind::Digamma => {
                reject("c", c.is_some())?;
                reject("phi", phi.is_some())?;
                if kind == EquationKind::Gamma { EquationSpec::Gamma } else { EquationSpec::Digamma }
            }
        };
        (spec, Some(kind.group()))
    };

    let group = match (group, natural_group) {
        (Some(gname), natural) => {
            let gk: GroupKind = gname.parse().map_err(|e: crate::group::UnknownGroup| semantic("group", e.to_string()))?;
            if let Some(natural) = natural {
                if gk != natural {
                    return Err(semantic(
                        "group",
                        format!("{} lives in {natural}, not {gk}", equation.name()),
                    ));
                }
            } else if !matches!(gk, GroupKind::AdditiveReals | GroupKind::MultPositiveReals) {
                return Err(semantic("group", format!("custom equations support additive-reals or mult-positive-reals, not {gk}")));
            }
            gk
        }
        (None, Some(natural)) => natural,
        (None, None) => return Err(semantic("group", "custom requires `group`")),
    };

    if let EquationSpec::Custom { g: CoefficientSpec::Const(c), .. } = equation {
        if group == GroupKind::MultPositiveReals && c <= 0.0 {
            return Err(semantic("g", "constant coefficient must be positive in mult-positive-reals"));
        }
    }

    let base = match base {
        Some(b) => b.parse().map_err(|e: String| semantic("base", e))?,
        None if matches!(equation, EquationSpec::Custom { .. }) => {
            return Err(semantic("base", "custom requires `base` (zero, digamma or log-gamma)"))
        }
        None => BaseFunction::Exact,
    };
    if base == BaseFunction::Exact && matches!(equation, EquationSpec::Custom { .. }) {
        return Err(semantic("base", "custom equations have no built-in exact solution"));
    }

    let perturbation = match take("perturbation", "form") {
        Some(p) => p.parse().map_err(|e: String| semantic("form", e))?,
        None => Profile::Zero,
    };
    let budget = match take("perturbation", "budget").as_deref() {
        Some("defect") => BudgetSpec::Defect,
        Some(b) => {
            let p: Profile = b.parse().map_err(|e: String| semantic("budget", e))?;
            if !p.is_nonnegative() {
                return Err(semantic("budget", "budget must be nonnegative"));
            }
            BudgetSpec::Profile(p)
        }
        None => BudgetSpec::Profile(Profile::Zero),
    };

    let points = parse_points(&take("run", "points").ok_or_else(|| semantic("points", "[run] points is required"))?)?;
    let tol = match take("run", "tol") {
        Some(v) => parse_tol("tol", &v)?,
        None => DEFAULT_TOL,
    };
    let mut stabilizer = StabilizerConfig::default();
    let max_iterations = match take("run", "max_iterations") {
        Some(v) => parse_max_iterations("max_iterations", &v)?,
        None => stabilizer.max_iterations,
    };
    stabilizer.max_iterations = max_iterations;
    let mode = match take("run", "mode") {
        Some(m) => m.parse().map_err(|e: String| semantic("mode", e))?,
        None => Mode::Stabilize,
    };
    let uint = |key: &str, v: Option<String>, default: usize| -> Result<usize, ConfigError> {
        v.map_or(Ok(default), |v| v.parse().map_err(|_| semantic(key, format!("expected a nonnegative integer, got {v:?}"))))
    };
    let threads = uint("threads", take("run", "threads"), 0)?;
    stabilizer.ratio_window = uint("ratio_window", take("run", "ratio_window"), stabilizer.ratio_window)?;
    stabilizer.zero_run = uint("zero_run", take("run", "zero_run"), stabilizer.zero_run)?;
    stabilizer.divergence_window =
        uint("divergence_window", take("run", "divergence_window"), stabilizer.divergence_window)?;
    if let Some(v) = take("run", "ratio_ceiling") {
        match v.parse::<f64>() {
            Ok(r) if r > 0.0 && r < 1.0 => stabilizer.ratio_ceiling = r,
            _ => return Err(semantic("ratio_ceiling", "ratio_ceiling must lie in (0, 1)")),
        }
    }

    debug_assert!(entries.is_empty(), "every accepted key is consumed");
    Ok(RunConfig {
        equation,
        group,
        base,
        perturbation,
        budget,
        points,
        tol,
        max_iterations,
        mode,
        threads,
        stabilizer,
    })
}
