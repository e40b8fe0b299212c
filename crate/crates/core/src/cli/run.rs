//! Executes a [`RunConfig`] and renders the CSV report.
//!
//! Multiplicative values are printed as their `ln` carrier.

use std::fmt::Write as _;
use std::sync::Arc;

use rayon::prelude::*;
use thiserror::Error;

use super::config::{BaseFunction, BudgetSpec, CoefficientSpec, ConfigError, EquationSpec, Mode, RunConfig};
use crate::equation::{ApproximateSolution, EquationInstance, PerturbationBudget};
use crate::group::{AdditiveReals, GroupKind, LogPositive, MetricGroup, MultPositiveReals};
use crate::instances;
use crate::special;
use crate::stabilizer::{StabilizationResult, Stabilizer};

pub const STABILIZE_HEADER: &str = "x,f,f0,dist,phi_hat,strategy,iterations,last_step,residual,status";
pub const VERIFY_HEADER: &str = "x,f,residual,status";

pub const EXIT_OK: i32 = 0;
pub const EXIT_CONFIG: i32 = 1;
pub const EXIT_FAILURE: i32 = 2;

#[derive(Debug, Error)]
pub enum RunError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error("could not start worker pool: {0}")]
    Pool(String),
}

impl RunError {
    pub fn exit_code(&self) -> i32 {
        EXIT_CONFIG
    }
}

/// CSV output plus a one-line summary for stderr.
#[derive(Clone, Debug, PartialEq)]
pub struct Report {
    pub csv: String,
    pub summary: String,
    pub exit_code: i32,
}

/// Real carrier of a group element.
trait Carrier: Sized {
    fn to_carrier(&self) -> f64;
    fn from_carrier(v: f64) -> Self;
}

impl Carrier for f64 {
    fn to_carrier(&self) -> f64 {
        *self
    }
    fn from_carrier(v: f64) -> Self {
        v
    }
}

impl Carrier for LogPositive {
    fn to_carrier(&self) -> f64 {
        self.ln()
    }
    fn from_carrier(v: f64) -> Self {
        LogPositive::from_ln(v)
    }
}

type RealFn = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

fn num(v: f64) -> String {
    format!("{v:.16e}")
}

#[derive(Clone, Debug)]
struct StabilizeRow {
    x: f64,
    f: f64,
    f0: f64,
    dist: f64,
    phi_hat: f64,
    strategy: &'static str,
    iterations: usize,
    last_step: f64,
    residual: f64,
    status: String,
}

impl StabilizeRow {
    fn render(&self) -> String {
        format!(
            "{},{},{},{},{},{},{},{},{},{}",
            num(self.x),
            num(self.f),
            num(self.f0),
            num(self.dist),
            num(self.phi_hat),
            self.strategy,
            self.iterations,
            num(self.last_step),
            num(self.residual),
            self.status
        )
    }

    fn ok(&self) -> bool {
        self.status == "converged"
    }
}

fn base_function(base: BaseFunction, exact: Option<RealFn>) -> RealFn {
    match base {
        BaseFunction::Exact => exact.expect("exact base is rejected for custom equations"),
        BaseFunction::Zero => Arc::new(|_| 0.0),
        BaseFunction::Digamma => Arc::new(|x| special::digamma(x).unwrap_or(f64::NAN)),
        BaseFunction::LogGamma => Arc::new(|x| special::log_gamma(x).unwrap_or(f64::NAN)),
    }
}

fn coefficient(g: CoefficientSpec, group: GroupKind) -> RealFn {
    let mult = group == GroupKind::MultPositiveReals;
    match (g, mult) {
        (CoefficientSpec::Const(c), false) => Arc::new(move |_| c),
        (CoefficientSpec::Const(c), true) => {
            let l = c.ln();
            Arc::new(move |_| l)
        }
        (CoefficientSpec::Reciprocal, false) => Arc::new(|x| 1.0 / x),
        (CoefficientSpec::Reciprocal, true) => Arc::new(|x| -x.ln()),
        (CoefficientSpec::Identity, false) => Arc::new(|x| x),
        (CoefficientSpec::Identity, true) => Arc::new(|x| x.ln()),
        (CoefficientSpec::Log, false) => Arc::new(|x| x.ln()),
        (CoefficientSpec::Log, true) => Arc::new(|x| x.ln().ln()),
    }
}

fn custom_instance<G>(group: G, phi: crate::instances::PhiSpec, coef: RealFn) -> EquationInstance<G>
where
    G: MetricGroup,
    G::Element: Carrier,
{
    let c2 = Arc::clone(&coef);
    EquationInstance::new(
        format!("custom({phi})"),
        group,
        move |x| phi.apply(*x),
        move |x| G::Element::from_carrier(coef(*x)),
    )
    .with_domain(move |x| phi.contains(*x) && c2(*x).is_finite())
}

fn instance_error(e: crate::instances::InstanceError) -> ConfigError {
    ConfigError::Semantic { key: "equation".into(), message: e.to_string() }
}

/// Runs `cfg` and returns the rendered report.
pub fn execute(cfg: &RunConfig) -> Result<Report, RunError> {
    let carrier_of = |s: ApproximateSolution<f64>| -> RealFn { Arc::new(move |x| s.eval(&x)) };
    let log_carrier_of = |s: ApproximateSolution<LogPositive>| -> RealFn { Arc::new(move |x| s.eval(&x).ln()) };
    match &cfg.equation {
        EquationSpec::Abel { c, phi } => {
            let inst = instances::abel(*c, *phi).map_err(instance_error)?;
            run_with(cfg, &inst, Some(carrier_of(instances::abel_solution(*c, *phi))))
        }
        EquationSpec::Digamma => run_with(cfg, &instances::digamma(), Some(carrier_of(instances::digamma_solution()))),
        EquationSpec::Schroeder { c, phi } => {
            let inst = instances::schroeder(*c, *phi).map_err(instance_error)?;
            run_with(cfg, &inst, Some(log_carrier_of(instances::schroeder_solution(*c, *phi))))
        }
        EquationSpec::Gamma => run_with(cfg, &instances::gamma(), Some(log_carrier_of(instances::gamma_solution()))),
        EquationSpec::Custom { phi, g } => {
            let coef = coefficient(*g, cfg.group);
            match cfg.group {
                GroupKind::AdditiveReals => run_with(cfg, &custom_instance(AdditiveReals::new(), *phi, coef), None),
                GroupKind::MultPositiveReals => {
                    run_with(cfg, &custom_instance(MultPositiveReals::new(), *phi, coef), None)
                }
                other => Err(ConfigError::Semantic {
                    key: "group".into(),
                    message: format!("custom equations support additive-reals or mult-positive-reals, not {other}"),
                }
                .into()),
            }
        }
    }
}

fn run_with<G>(cfg: &RunConfig, inst: &EquationInstance<G>, exact: Option<RealFn>) -> Result<Report, RunError>
where
    G: MetricGroup + Clone + 'static,
    G::Element: Carrier,
{
    if let Some(x) = cfg.points.iter().find(|x| !inst.contains(x)) {
        return Err(ConfigError::Semantic {
            key: "points".into(),
            message: format!("point {x} is outside the domain of {}", cfg.equation.name()),
        }
        .into());
    }

    let base = base_function(cfg.base, exact);
    let pert = cfg.perturbation.clone();
    let f = ApproximateSolution::new(move |x: &f64| G::Element::from_carrier(base(*x) + pert.eval(*x)));
    let eps = match &cfg.budget {
        BudgetSpec::Profile(p) => {
            let p = p.clone();
            PerturbationBudget::new(move |x: &f64| p.eval(*x))
        }
        BudgetSpec::Defect => {
            let (inst, f) = (inst.clone(), f.clone());
            PerturbationBudget::new(move |x: &f64| inst.defect(&f, x).unwrap_or(f64::NAN))
        }
    };

    let mut stab_cfg = cfg.stabilizer.clone();
    stab_cfg.max_iterations = cfg.max_iterations;
    let stabilizer = Stabilizer::new(stab_cfg);
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(cfg.threads)
        .build()
        .map_err(|e| RunError::Pool(e.to_string()))?;

    match cfg.mode {
        Mode::Verify => {
            let rows: Vec<(String, bool)> = pool.install(|| {
                cfg.points
                    .par_iter()
                    .map(|x| {
                        let fx = f.eval(x).to_carrier();
                        let (residual, pass) = match inst.defect(&f, x) {
                            Ok(r) => (r, r <= cfg.tol),
                            Err(_) => (f64::NAN, false),
                        };
                        let status = if pass { "pass" } else { "fail" };
                        (format!("{},{},{},{}", num(*x), num(fx), num(residual), status), pass)
                    })
                    .collect()
            });
            let passed = rows.iter().filter(|(_, ok)| *ok).count();
            Ok(finish(VERIFY_HEADER, rows, format!("{passed}/{} points pass at tol {:e}", cfg.points.len(), cfg.tol)))
        }
        Mode::Stabilize | Mode::Demo => {
            let rows: Vec<StabilizeRow> = pool.install(|| {
                cfg.points.par_iter().map(|x| stabilize_row(&stabilizer, inst, &f, &eps, *x, cfg.tol)).collect()
            });
            let converged = rows.iter().filter(|r| r.ok()).count();
            let summary = format!("{converged}/{} points converged at tol {:e}", cfg.points.len(), cfg.tol);
            Ok(finish(STABILIZE_HEADER, rows.iter().map(|r| (r.render(), r.ok())).collect(), summary))
        }
    }
}

fn finish(header: &str, rows: Vec<(String, bool)>, summary: String) -> Report {
    let mut csv = String::with_capacity(64 * (rows.len() + 1));
    csv.push_str(header);
    csv.push('\n');
    let mut all_ok = true;
    for (line, ok) in rows {
        all_ok &= ok;
        let _ = writeln!(csv, "{line}");
    }
    Report { csv, summary, exit_code: if all_ok { EXIT_OK } else { EXIT_FAILURE } }
}

fn stabilize_row<G>(
    stabilizer: &Stabilizer,
    inst: &EquationInstance<G>,
    f: &ApproximateSolution<G::Element>,
    eps: &PerturbationBudget,
    x: f64,
    tol: f64,
) -> StabilizeRow
where
    G: MetricGroup,
    G::Element: Carrier,
{
    let grp = inst.group();
    let fx = f.eval(&x);
    let mut row = StabilizeRow {
        x,
        f: fx.to_carrier(),
        f0: f64::NAN,
        dist: f64::NAN,
        phi_hat: f64::INFINITY,
        strategy: "none",
        iterations: 0,
        last_step: f64::NAN,
        residual: f64::NAN,
        status: "error".into(),
    };
    let r: StabilizationResult<G::Element> = match stabilizer.stabilize(inst, f, eps, &x, tol) {
        Ok(r) => r,
        Err(_) => return row,
    };
    row.f0 = r.value.to_carrier();
    row.dist = grp.dist(&fx, &r.value);
    row.phi_hat = r.certified_bound;
    row.strategy = r.certificate.as_ref().map_or("none", |c| c.strategy.name());
    row.iterations = r.iterations;
    row.last_step = r.last_step;
    row.status = r.status.name().to_string();
    if r.status.is_converged() {
        let y = inst.phi(&x);
        if let Ok(next) = stabilizer.stabilize(inst, f, eps, &y, tol) {
            if next.status.is_converged() {
                row.residual = grp.dist(&next.value, &grp.op(&inst.g(&x), &r.value));
            }
        }
        if !(row.dist <= row.phi_hat + tol && row.residual <= 2.0 * tol) {
            row.status = "invariant_violated".into();
        }
    }
    row
}
