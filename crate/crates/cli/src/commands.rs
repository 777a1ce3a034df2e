use std::fmt::{self, Write as _};

use spdelab::analysis::{
    bound_heat_dirichlet, bound_heat_neumann, bound_wave, estimate_energy_mc, fit_excitation_index,
    map_replicates, moment_apriori_set, BoundSet, EnergyCurve, McSettings, Model, SandwichModel,
    SandwichSettings, SolverRun, Verdict,
};
use spdelab::analysis::NeumannData;
use spdelab::solvers::{
    moment_slope, sigma_constants, solve_heat_picard, solve_wave_energy_volterra, Field,
    MomentProblem, VolterraKernel,
};
use spdelab::noise::sample_noise;
use spdelab::verification::{run_verification, VerifySettings};

use crate::config::{ConfigError, Equation, ExperimentConfig, MethodKind, VerifyKeys};
use crate::output::{num, Csv, Outputs, Seed};

#[derive(Debug)]
pub enum CliError {
    Validation(String),
    Io(String),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Validation(_) => 1,
            CliError::Io(_) => 3,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Validation(m) => f.write_str(m),
            CliError::Io(m) => write!(f, "i/o error: {m}"),
        }
    }
}

impl From<ConfigError> for CliError {
    fn from(e: ConfigError) -> Self {
        CliError::Validation(e.0)
    }
}

impl From<spdelab::Error> for CliError {
    fn from(e: spdelab::Error) -> Self {
        CliError::Validation(e.to_string())
    }
}

/// What a command produced. `failed` marks a check failure (exit 2); the
/// outputs are still written.
#[derive(Default)]
pub struct Report {
    pub outputs: Outputs,
    pub stdout: String,
    pub failed: bool,
}

pub struct RunOptions {
    pub seed: Seed,
    pub workers: usize,
}

fn solver_run(cfg: &ExperimentConfig) -> Result<SolverRun, CliError> {
    let heat = cfg.heat_problem()?;
    Ok(match (cfg.method, heat) {
        (MethodKind::Oracle, _) => {
            return Err(CliError::Validation(
                "method oracle computes moments, not sample paths; use em or picard".into(),
            ))
        }
        (MethodKind::Em, Some(p)) => SolverRun::HeatEm(p),
        (MethodKind::Picard, Some(p)) => SolverRun::HeatPicard {
            problem: p,
            iterations: cfg.picard_iterations,
        },
        (_, None) => SolverRun::WaveEm(cfg.wave_problem()?),
    })
}

fn sorted(mut v: Vec<f64>) -> Vec<f64> {
    v.sort_by(f64::total_cmp);
    v.dedup();
    v
}

/// `t_list` if given, otherwise `snapshots + 1` evenly spaced steps.
fn snapshot_times(cfg: &ExperimentConfig) -> Vec<f64> {
    if let Some(t) = &cfg.t_list {
        return sorted(t.clone());
    }
    let nt = cfg.spec.nt();
    let count = cfg.snapshots.min(nt);
    let mut steps: Vec<usize> = (0..=count).map(|k| k * nt / count).collect();
    steps.dedup();
    steps.into_iter().map(|n| cfg.spec.time(n)).collect()
}

fn median(values: &mut [f64]) -> f64 {
    values.sort_by(f64::total_cmp);
    let n = values.len();
    if n == 0 {
        return f64::NAN;
    }
    if n % 2 == 1 {
        values[n / 2]
    } else {
        0.5 * (values[n / 2 - 1] + values[n / 2])
    }
}

fn describe_grid(cfg: &ExperimentConfig, out: &mut String) {
    let s = &cfg.spec;
    let _ = writeln!(
        out,
        "grid origin={} length={} horizon={} nx={} nt={} dx={} dt={}",
        num(s.origin()),
        num(s.length()),
        num(s.horizon()),
        s.nx(),
        s.nt(),
        num(s.dx()),
        num(s.dt())
    );
}

pub fn simulate(cfg: &ExperimentConfig, opts: &RunOptions) -> Result<Report, CliError> {
    let run = solver_run(cfg)?;
    let times = snapshot_times(cfg);
    for &t in &times {
        cfg.spec.step_of(t)?;
    }
    let seed = opts.seed;
    let mut summary = String::new();
    let _ = writeln!(
        summary,
        "equation={} method={} lambda={} replicate={}",
        cfg.equation.name(),
        cfg.method.name(),
        num(cfg.lambda),
        cfg.replicate
    );
    summary.push_str(&seed.comment()[2..]);
    describe_grid(cfg, &mut summary);

    let fields: Vec<Field> = match &run {
        SolverRun::HeatPicard {
            problem,
            iterations,
        } => {
            let noise = sample_noise(problem.spec, seed.value, cfg.replicate);
            let r = solve_heat_picard(problem, cfg.lambda, &noise, *iterations, &times)?;
            for (k, d) in r.differences.iter().enumerate() {
                let _ = writeln!(summary, "picard iteration={} difference={}", k + 1, num(*d));
            }
            if r.warning {
                summary.push_str("warning: picard differences did not decrease over the last three iterations\n");
            }
            r.fields
        }
        _ => run.fields(cfg.lambda, seed.value, cfg.replicate, &times)?,
    };
    if let Some(f) = fields.iter().find(|f| !f.is_finite()) {
        return Err(CliError::Validation(format!(
            "solution is not finite at t={}; refine the grid or lower lambda",
            f.t
        )));
    }

    let mut csv = Csv::new(Some(seed), &["t", "x", "value"]);
    for f in &fields {
        for (x, v) in f.points().iter().zip(&f.values) {
            csv.row(&[num(f.t), num(*x), num(*v)]);
        }
        let _ = writeln!(summary, "snapshot t={} max={}", num(f.t), num(f.max()));
    }
    let mut report = Report::default();
    report.outputs.add("fields.csv", csv.finish());

    if let Some(lambdas) = &cfg.lambda_list {
        let lambdas = sorted(lambdas.clone());
        let mut heights = Csv::new(Some(seed), &["lambda", "replicate", "max"]);
        let mut medians = Vec::new();
        for &lambda in &lambdas {
            let maxima = map_replicates(cfg.replicates, opts.workers, |r| {
                run.path_max(lambda, seed.value, r)
            })?;
            for (r, m) in maxima.iter().enumerate() {
                heights.row(&[num(lambda), r.to_string(), num(*m)]);
            }
            let med = median(&mut maxima.clone());
            let _ = writeln!(summary, "heights lambda={} median_max={}", num(lambda), num(med));
            medians.push(med);
        }
        let increasing = medians.windows(2).all(|w| w[1] > w[0]);
        let _ = writeln!(
            summary,
            "heights median strictly increasing in lambda: {}",
            if increasing { "yes" } else { "no" }
        );
        report.outputs.add("heights.csv", heights.finish());
    }
    report.stdout = summary.clone();
    report.outputs.add("summary.txt", summary);
    Ok(report)
}

fn sandwich_model(cfg: &ExperimentConfig) -> Result<SandwichModel, CliError> {
    let model = match cfg.boundary() {
        Some(boundary) => Model::Heat {
            boundary,
            length: cfg.length(),
            diffusion: cfg.diffusion,
            u0: cfg.u0.clone(),
            sigma: cfg.sigma.clone(),
        },
        None => Model::Wave {
            v0: cfg.v0.clone(),
            sigma: cfg.sigma.clone(),
        },
    };
    let settings = SandwichSettings {
        epsilon: cfg.bound_epsilon,
        delta: cfg.bound_delta,
        terms: cfg.bound_terms,
    };
    Ok(SandwichModel::new(model, settings)?)
}

fn oracle_curve(cfg: &ExperimentConfig, times: &[f64], lambdas: &[f64]) -> Result<EnergyCurve, CliError> {
    let mut curve = EnergyCurve::new();
    match cfg.boundary() {
        Some(boundary) => {
            let c = moment_slope(&cfg.sigma)?;
            let problem = MomentProblem::new(
                cfg.length(),
                boundary,
                cfg.diffusion,
                cfg.u0.clone(),
                cfg.spec.horizon(),
            )?
            .with_resolution(cfg.oracle_cells, cfg.oracle_steps)?;
            let kernel = VolterraKernel::new(&problem)?;
            for &lambda in lambdas {
                let sol = kernel.solve(lambda * c)?;
                for &t in times {
                    curve.push_oracle(t, lambda, sol.energy_sq(t)?.sqrt());
                }
            }
        }
        None => {
            for &lambda in lambdas {
                let values = solve_wave_energy_volterra(&cfg.v0, &cfg.sigma, lambda, times)?;
                for (&t, f) in times.iter().zip(values) {
                    curve.push_oracle(t, lambda, f.sqrt());
                }
            }
        }
    }
    Ok(curve)
}

pub fn sweep(cfg: &ExperimentConfig, opts: &RunOptions) -> Result<Report, CliError> {
    let times = sorted(cfg.times());
    let lambdas = sorted(cfg.lambdas());
    if times.iter().any(|&t| t <= 0.0) {
        return Err(CliError::Validation("t_list: sweep times must be positive".into()));
    }
    let seed = opts.seed;
    let sandwich = sandwich_model(cfg)?;
    let mut curve = match cfg.method {
        MethodKind::Oracle => oracle_curve(cfg, &times, &lambdas)?,
        _ => {
            let run = solver_run(cfg)?;
            let settings = McSettings {
                replicates: cfg.replicates,
                seed: seed.value,
                workers: opts.workers,
            };
            let mut curve = EnergyCurve::new();
            for &lambda in &lambdas {
                curve.extend(estimate_energy_mc(&run, &times, lambda, settings)?);
            }
            curve
        }
    };
    curve.sort();

    let csv_seed = (cfg.method != MethodKind::Oracle).then_some(seed);
    let mut csv = Csv::new(csv_seed, &["t", "lambda", "energy", "stderr", "method", "replicates"]);
    for p in curve.entries() {
        csv.row(&[
            num(p.t),
            num(p.lambda),
            num(p.energy),
            num(p.stderr),
            p.method.name().to_string(),
            p.replicates.to_string(),
        ]);
    }

    let mut summary = String::new();
    let mut failed = false;
    let _ = writeln!(
        summary,
        "equation={} method={} lambdas={} times={}",
        cfg.equation.name(),
        cfg.method.name(),
        lambdas.len(),
        times.len()
    );
    if let Some(s) = csv_seed {
        summary.push_str(&s.comment()[2..]);
    }
    for &t in &times {
        match fit_excitation_index(&curve, t) {
            Ok(fit) => {
                let _ = writeln!(
                    summary,
                    "fit t={} slope={} intercept={} r2={} used={} dropped={}",
                    num(t),
                    num(fit.slope),
                    num(fit.intercept),
                    num(fit.r2),
                    fit.used.len(),
                    fit.dropped.len()
                );
            }
            Err(e) => {
                failed = true;
                let _ = writeln!(summary, "fit t={} FAILED: {e}", num(t));
            }
        }
    }
    summary.push_str("sandwich t lambda energy_sq log_lower log_upper lower upper\n");
    for p in curve.entries() {
        let b = sandwich.bounds(p.t, p.lambda)?;
        let (lo, hi) = b.judge(p);
        failed |= lo == Verdict::Fail || hi == Verdict::Fail;
        let _ = write!(
            summary,
            "sandwich {} {} {} {} {} {} {}",
            num(p.t),
            num(p.lambda),
            num(p.energy * p.energy),
            b.log_lower.map_or("-".into(), num),
            b.log_upper.map_or("-".into(), num),
            lo.name(),
            hi.name()
        );
        match &b.note {
            Some(n) => {
                let _ = writeln!(summary, " # {n}");
            }
            None => summary.push('\n'),
        }
    }
    let mut report = Report {
        failed,
        ..Report::default()
    };
    report.outputs.add("energy.csv", csv.finish());
    report.stdout = summary.clone();
    report.outputs.add("summary.txt", summary);
    Ok(report)
}

fn bound_sets(cfg: &ExperimentConfig, t: f64, lambda: f64) -> Result<Vec<BoundSet>, CliError> {
    let (ell, lip) = sigma_constants(&cfg.sigma);
    let l = cfg.length();
    let delta = cfg.bound_delta;
    Ok(match cfg.equation {
        Equation::HeatDirichlet | Equation::Pam => vec![
            bound_heat_dirichlet(t, lambda, ell, lip)?,
            moment_apriori_set(t, lambda, lip, 2.0, delta, cfg.u0.sup_value(l))?,
        ],
        Equation::HeatNeumann => {
            let data = NeumannData {
                length: l,
                u0_inf: cfg.u0.inf_value(l),
                u0_sup: cfg.u0.sup_value(l),
                epsilon: cfg.bound_epsilon,
                delta,
            };
            vec![
                bound_heat_neumann(t, lambda, ell, lip, &data)?,
                moment_apriori_set(t, lambda, lip, 2.0, delta, data.u0_sup)?,
            ]
        }
        Equation::Wave => vec![bound_wave(
            t,
            lambda,
            ell,
            lip,
            cfg.v0.l1_norm(),
            cfg.v0.l2_norm_sq(),
            delta,
        )?],
    })
}

pub fn bounds(cfg: &ExperimentConfig) -> Result<Report, CliError> {
    let header = [
        "theorem",
        "t",
        "lambda",
        "lower_coefficient",
        "lower_exponent",
        "upper_coefficient",
        "upper_exponent",
        "log_lower",
        "log_upper",
        "note",
    ];
    let mut csv = Csv::new(None, &header);
    let mut table = format!(
        "{:<18} {:>10} {:>10} {:>24} {:>24} {:>24} {:>24}\n",
        "theorem", "t", "lambda", "lower rate", "upper rate", "log lower", "log upper"
    );
    let rate = |r: Option<spdelab::analysis::RateBound>| match r {
        Some(r) => (num(r.coefficient), r.exponent.to_string()),
        None => ("-".into(), "-".into()),
    };
    for t in sorted(cfg.times()) {
        for lambda in sorted(cfg.lambdas()) {
            for b in bound_sets(cfg, t, lambda)? {
                let (lc, le) = rate(b.lower_rate);
                let (uc, ue) = rate(b.upper_rate);
                let note = b.note.clone().unwrap_or_default().replace(',', ";");
                csv.row(&[
                    b.theorem.name().into(),
                    num(t),
                    num(lambda),
                    lc.clone(),
                    le.clone(),
                    uc.clone(),
                    ue.clone(),
                    num(b.log_lower),
                    num(b.log_upper),
                    note.clone(),
                ]);
                let fmt_rate = |c: &str, e: &str| {
                    if c == "-" {
                        "-".to_string()
                    } else {
                        format!("{:.6e}*l^{e}", c.parse::<f64>().unwrap_or(f64::NAN))
                    }
                };
                let _ = writeln!(
                    table,
                    "{:<18} {:>10.4} {:>10.4} {:>24} {:>24} {:>24.10e} {:>24.10e}{}",
                    b.theorem.name(),
                    t,
                    lambda,
                    fmt_rate(&lc, &le),
                    fmt_rate(&uc, &ue),
                    b.log_lower,
                    b.log_upper,
                    if note.is_empty() { String::new() } else { format!("  # {note}") }
                );
            }
        }
    }
    let mut report = Report::default();
    report.outputs.add("bounds.csv", csv.finish());
    report.stdout = table;
    Ok(report)
}

pub fn verify(keys: &VerifyKeys) -> Result<Report, CliError> {
    let d = VerifySettings::default();
    let settings = VerifySettings {
        length: keys.length.unwrap_or(d.length),
        images: keys.images.unwrap_or(d.images),
        modes: keys.modes.unwrap_or(d.modes),
        epsilon: keys.epsilon.unwrap_or(d.epsilon),
        betas: keys.betas.clone().unwrap_or(d.betas),
        resolvent_t: keys.resolvent_t.unwrap_or(d.resolvent_t),
        taus: keys.taus.clone().unwrap_or(d.taus),
    };
    let checks = run_verification(&settings)?;
    let mut text = String::new();
    for c in &checks {
        let _ = writeln!(text, "{c}");
    }
    let failed = checks.iter().any(|c| !c.passed());
    let passed = checks.iter().filter(|c| c.passed()).count();
    let _ = writeln!(text, "{passed}/{} checks passed", checks.len());
    text.push_str(if failed { "FAIL\n" } else { "PASS\n" });
    let mut report = Report {
        failed,
        ..Report::default()
    };
    report.stdout = text.clone();
    report.outputs.add("verify.txt", text);
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn snapshot_times_are_on_the_grid() {
        let cfg = ExperimentConfig::from_text("equation = heat_neumann\nmethod = picard\ngrid.nx = 8\ngrid.nt = 7\nsnapshots = 3\n")
            .unwrap();
        let t = snapshot_times(&cfg);
        assert_eq!(t.len(), 4);
        assert_eq!(t[0], 0.0);
        assert_eq!(*t.last().unwrap(), 1.0);
        for x in t {
            cfg.spec.step_of(x).unwrap();
        }
    }

    #[test]
    fn median_of_even_and_odd() {
        assert_eq!(median(&mut [3.0, 1.0, 2.0]), 2.0);
        assert_eq!(median(&mut [4.0, 1.0, 2.0, 3.0]), 2.5);
    }

    #[test]
    fn oracle_is_not_a_path_solver() {
        let cfg = ExperimentConfig::from_text("equation = heat_neumann\nmethod = oracle\n").unwrap();
        assert!(matches!(solver_run(&cfg), Err(CliError::Validation(_))));
    }

    #[test]
    fn dirichlet_bounds_come_with_apriori_upper() {
        let cfg = ExperimentConfig::from_text("equation = heat_dirichlet\n").unwrap();
        let sets = bound_sets(&cfg, 1.0, 2.0).unwrap();
        assert_eq!(sets.len(), 2);
        assert!(sets[1].log_upper.is_finite());
    }
}
