//! One function per subcommand. Each returns its report and the path written.

use balayage_core::balayage::{
    mass_bound_check, pseudo_balayage, verify_ii1, BalayageResult, InequalityCheck, MassBoundCheck,
};
use balayage_core::energy::strong_distance;
use balayage_core::experiments::{monotone_down, monotone_up, solvability_scan, InvariantCheck};
use balayage_core::gauss::{
    capacitary_measure, extremal_diagnostic, solvability_check, solve_gauss, CapacityResult, GaussResult,
};
use balayage_core::instances::thinness_series;
use balayage_core::tolerances::{CERTIFICATE_FACTOR, DISCRETIZATION_SLACK};
use balayage_core::{Measure, SupportSet};
use serde::{Deserialize, Serialize};

use crate::config::{InstanceSource, Loaded, Problem, SetSpec};
use crate::report::{Output, Report};
use crate::CliError;

pub struct Context<'a> {
    pub loaded: &'a Loaded,
    pub tol: f64,
    pub out: &'a Output,
}

/// What a command hands back to `main`.
pub struct Outcome {
    pub summary: String,
    pub checks: Vec<InvariantCheck>,
}

impl Context<'_> {
    fn problem_and_set(&self) -> Result<(Problem, SupportSet, Measure), CliError> {
        let problem = self.loaded.problem()?;
        let set = problem.set(self.loaded.config.set.as_ref().unwrap_or(&SetSpec::All))?;
        let mut omega = problem.omega.clone();
        if self.loaded.config.unit_balayage_mass {
            let hat = pseudo_balayage(&problem.kernel, &omega, &set, self.tol)?;
            if !(hat.mass > 0.0) {
                return Err(CliError::Config("unit_balayage_mass: the charge sweeps to zero mass".into()));
            }
            omega = omega.scaled(1.0 / hat.mass);
        }
        Ok((problem, set, omega))
    }

    fn chain(&self, problem: &Problem) -> Result<Vec<SupportSet>, CliError> {
        let specs = self
            .loaded
            .config
            .chain
            .as_ref()
            .ok_or_else(|| CliError::Config("at `chain`: this command needs a chain of sets".into()))?;
        specs.iter().map(|s| problem.set(s)).collect()
    }

    fn emit<T: Serialize>(&self, command: &str, result: T, checks: Vec<InvariantCheck>, summary: String) -> Result<Outcome, CliError> {
        let report = Report::new(command, &self.loaded.sha256, self.tol, result, checks);
        self.out.write_report(command, &report)?;
        Ok(Outcome {
            summary,
            checks: report.checks,
        })
    }
}

#[derive(Serialize, Deserialize)]
pub struct BalayageOutput {
    pub balayage: BalayageResult,
    pub inequality_check: InequalityCheck,
    pub mass_bound: MassBoundCheck,
}

pub fn balayage(ctx: &Context) -> Result<Outcome, CliError> {
    let (problem, set, omega) = ctx.problem_and_set()?;
    let res = pseudo_balayage(&problem.kernel, &omega, &set, ctx.tol)?;
    let limit = CERTIFICATE_FACTOR * ctx.tol;
    let ii1 = verify_ii1(&problem.kernel, &omega, &set, &res.measure, limit)?;
    let h = problem.instance.as_ref().map(|i| i.ugaheri_h());
    let bound = mass_bound_check(&res, h, &omega, DISCRETIZATION_SLACK);
    let mut checks = vec![
        InvariantCheck::at_most("U^ω̂ ≥ U^ω at every node of A", -res.residuals.domination_min, limit),
        InvariantCheck::at_most("U^ω̂ = U^ω on the support of ω̂", res.residuals.support_equality_max, limit),
        InvariantCheck::at_most("∫U^(ω̂−ω) dω̂ = 0", res.residuals.orthogonality.abs(), limit),
        InvariantCheck::at_most("ŵ_f(A) ≤ 0", res.value, limit),
        InvariantCheck::at_most("variational inequalities hold", if ii1.holds { 0.0 } else { 1.0 }, 0.0),
    ];
    if let MassBoundCheck::Holds { mass, bound } | MassBoundCheck::Violated { mass, bound } = bound {
        let excess = if bound > 0.0 { mass / bound - 1.0 } else { mass };
        checks.push(InvariantCheck::at_most("ω̂^A(X) ≤ h·ω⁺(X)", excess, DISCRETIZATION_SLACK));
    }
    let summary = format!(
        "balayage: |A| = {}, ω̂^A(X) = {:.6}, ŵ_f(A) = {:.6e}, KKT residual {:.2e}",
        set.len(),
        res.mass,
        res.value,
        res.kkt.worst()
    );
    let out = BalayageOutput {
        balayage: res,
        inequality_check: ii1,
        mass_bound: bound,
    };
    ctx.emit("balayage", out, checks, summary)
}

#[derive(Serialize, Deserialize)]
pub struct GaussOutput {
    pub gauss: GaussResult,
    pub balayage_mass: f64,
    pub balayage_value: f64,
    /// `ω̂^A(X) = 1` within 1e−9 and λ coincides with ω̂^A.
    pub lambda_is_balayage: bool,
}

pub fn gauss(ctx: &Context) -> Result<Outcome, CliError> {
    let (problem, set, omega) = ctx.problem_and_set()?;
    if ctx.loaded.config.chain.is_some() {
        return gauss_chain(ctx, &problem, &omega);
    }
    let g = solve_gauss(&problem.kernel, &omega, &set, ctx.tol)?;
    let hat = pseudo_balayage(&problem.kernel, &omega, &set, ctx.tol)?;
    let lambda_is_balayage =
        (hat.mass - 1.0).abs() <= 1e-9 && strong_distance(&problem.kernel, &g.measure, &hat.measure)? <= 1e-7;
    let limit = CERTIFICATE_FACTOR * ctx.tol;
    let checks = vec![
        InvariantCheck::at_most("U_f^λ ≥ c at every node of A", -g.ch1_min, limit),
        InvariantCheck::at_most("U_f^λ = c on the support of λ", g.ch2_max, limit),
        InvariantCheck::at_most("multiplier agrees with ∫U_f^λ dλ", (g.multiplier - g.equilibrium_constant).abs(), limit),
        InvariantCheck::at_most("ŵ_f(A) ≤ w_f(A)", hat.value - g.value, balayage_core::tolerances::ARITHMETIC),
    ];
    let summary = format!(
        "gauss: w_f(A) = {:.6e}, c = {:.6e}, ω̂^A(X) = {:.6}{}",
        g.value,
        g.equilibrium_constant,
        hat.mass,
        if lambda_is_balayage { ", λ = ω̂^A" } else { "" }
    );
    let out = GaussOutput {
        balayage_mass: hat.mass,
        balayage_value: hat.value,
        gauss: g,
        lambda_is_balayage,
    };
    ctx.emit("gauss", out, checks, summary)
}

fn gauss_chain(ctx: &Context, problem: &Problem, omega: &Measure) -> Result<Outcome, CliError> {
    let chain = ctx.chain(problem)?;
    let d = extremal_diagnostic(&problem.kernel, omega, &chain, ctx.tol)?;
    let mut w = csv::Writer::from_writer(ctx.out.create_csv("gauss")?);
    w.write_record(["stage", "size", "value", "constant", "mass"]).map_err(balayage_core::Error::from)?;
    for (j, set) in chain.iter().enumerate() {
        w.write_record([
            j.to_string(),
            set.len().to_string(),
            d.sequence_values[j].to_string(),
            d.constants[j].to_string(),
            "1".to_string(),
        ])
        .map_err(balayage_core::Error::from)?;
    }
    w.flush().map_err(balayage_core::Error::from)?;
    let increase = d.sequence_values.windows(2).map(|p| p[1] - p[0]).fold(0.0, f64::max);
    let checks = vec![
        InvariantCheck::at_most("w_f(K_j) nonincreasing", increase, CERTIFICATE_FACTOR * ctx.tol),
        InvariantCheck::at_most("ξ(X) ≤ 1", d.limit_mass - 1.0, ctx.tol),
    ];
    let summary = format!(
        "gauss chain: {} stages, final w_f = {:.6e}, C_ξ = {:.6e}",
        chain.len(),
        d.sequence_values.last().copied().unwrap_or(f64::NAN),
        d.c_xi
    );
    ctx.emit("gauss", d, checks, summary)
}

pub fn capacity(ctx: &Context) -> Result<Outcome, CliError> {
    let (problem, set, _) = ctx.problem_and_set()?;
    let cap: CapacityResult = capacitary_measure(&problem.kernel, &set, ctx.tol)?;
    let (lo, hi) = cap.equilibrium_potential_range;
    let checks = vec![InvariantCheck::at_most("U^γ ≥ 1 on the set", 1.0 - lo, CERTIFICATE_FACTOR * ctx.tol * cap.capacity.max(1.0))];
    let summary = format!("capacity: c = {:.6}, U^γ on the set in [{lo:.6}, {hi:.6}]", cap.capacity);
    ctx.emit("capacity", cap, checks, summary)
}

pub fn solvability(ctx: &Context) -> Result<Outcome, CliError> {
    if let Some(family) = &ctx.loaded.config.family {
        let mut opts = ctx.loaded.config.scan.clone().unwrap_or_default();
        opts.tol = ctx.tol;
        let table = solvability_scan(family, &opts)?;
        table.write_csv(ctx.out.create_csv("solvability")?)?;
        let summary = table
            .rows
            .iter()
            .map(|r| format!("{}: {:?}", r.scaling.map(|q| format!("q={q}")).unwrap_or_else(|| "unit".into()), r.signature))
            .collect::<Vec<_>>()
            .join(", ");
        let checks = table.checks.clone();
        return ctx.emit("solvability", table, checks, format!("solvability scan: {summary}"));
    }
    let (problem, set, omega) = ctx.problem_and_set()?;
    let verdict = solvability_check(&problem.kernel, &omega, &set, ctx.tol, ctx.loaded.config.capacity_finite)?;
    let summary = format!("solvability: {}", if verdict.is_solvable() { "solvable" } else { "unsolvable" });
    ctx.emit("solvability", verdict, vec![], summary)
}

pub fn converge(ctx: &Context, up: bool) -> Result<Outcome, CliError> {
    let (problem, _, omega) = ctx.problem_and_set()?;
    let chain = ctx.chain(&problem)?;
    let report = if up {
        monotone_up(&problem.kernel, &omega, &chain, ctx.tol)?
    } else {
        monotone_down(&problem.kernel, &omega, &chain, ctx.tol)?
    };
    let name = if up { "converge-up" } else { "converge-down" };
    report.write_csv(ctx.out.create_csv(name)?)?;
    let summary = format!(
        "{name}: {} stages, values {:.6e} → {:.6e}",
        chain.len(),
        report.stage_values[0],
        report.stage_values[report.stage_values.len() - 1]
    );
    let checks = report.checks.clone();
    ctx.emit(name, report, checks, summary)
}

pub fn thinness(ctx: &Context) -> Result<Outcome, CliError> {
    let Some(InstanceSource::Spec(spec)) = &ctx.loaded.config.instance else {
        return Err(CliError::Config("at `instance`: thinness needs a generated shell_union instance".into()));
    };
    let rep = thinness_series(spec, ctx.tol)?;
    let mut w = csv::Writer::from_writer(ctx.out.create_csv("thinness")?);
    w.write_record(["shell", "capacity", "partial_sum"]).map_err(balayage_core::Error::from)?;
    for (j, (c, s)) in rep.shell_capacities.iter().zip(&rep.partial_sums).enumerate() {
        w.write_record([j.to_string(), c.to_string(), s.to_string()]).map_err(balayage_core::Error::from)?;
    }
    w.flush().map_err(balayage_core::Error::from)?;
    let decrease = rep.partial_sums.windows(2).map(|p| p[0] - p[1]).fold(0.0, f64::max);
    let checks = vec![InvariantCheck::at_most("partial sums nondecreasing", decrease, 0.0)];
    let summary = format!(
        "thinness: {:?} (growth exponent {}, critical {})",
        rep.verdict,
        rep.growth_exponent.map(|b| format!("{b:.3}")).unwrap_or_else(|| "n/a".into()),
        rep.critical_exponent
    );
    ctx.emit("thinness", rep, checks, summary)
}
