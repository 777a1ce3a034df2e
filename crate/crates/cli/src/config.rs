//! Flat `key = value` experiment files.
//!
//! ```text
//! # PAM sweep
//! equation = pam
//! lambda_list = 0, 0.1, 2
//! grid.nx = 50
//! ```
//!
//! Lists are comma separated; tables are `x:y` pairs separated by commas.
//! Blank lines and lines starting with `#` are ignored. Unknown keys and
//! repeated keys are errors.

use std::collections::BTreeMap;
use std::fmt;
use std::path::PathBuf;

use spdelab::kernels::Boundary;
use spdelab::noise::GridSpec;
use spdelab::solvers::{HeatProblem, InitialData, SigmaSpec, Velocity, WaveProblem};

const KEYS: &[&str] = &[
    "equation",
    "method",
    "seed",
    "replicates",
    "replicate",
    "lambda",
    "lambda_list",
    "t_list",
    "snapshots",
    "workers",
    "output",
    "diffusion",
    "grid.L",
    "grid.X",
    "grid.T",
    "grid.nx",
    "grid.nt",
    "grid.ratio",
    "sigma.kind",
    "sigma.c",
    "sigma.knots",
    "sigma.left_slope",
    "sigma.right_slope",
    "u0.kind",
    "u0.value",
    "u0.table",
    "v0.kind",
    "v0.half_width",
    "v0.table",
    "picard.iterations",
    "oracle.cells",
    "oracle.steps",
    "bounds.epsilon",
    "bounds.delta",
    "bounds.terms",
    "verify.epsilon",
    "verify.betas",
    "verify.taus",
    "verify.images",
    "verify.modes",
    "verify.resolvent_t",
];

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConfigError(pub String);

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for ConfigError {}

impl From<spdelab::Error> for ConfigError {
    fn from(e: spdelab::Error) -> Self {
        ConfigError(e.to_string())
    }
}

fn fail<T>(msg: impl Into<String>) -> Result<T, ConfigError> {
    Err(ConfigError(msg.into()))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Equation {
    HeatDirichlet,
    HeatNeumann,
    Wave,
    Pam,
}

impl Equation {
    pub fn name(self) -> &'static str {
        match self {
            Equation::HeatDirichlet => "heat_dirichlet",
            Equation::HeatNeumann => "heat_neumann",
            Equation::Wave => "wave",
            Equation::Pam => "pam",
        }
    }

    pub fn boundary(self) -> Option<Boundary> {
        match self {
            Equation::HeatDirichlet | Equation::Pam => Some(Boundary::Dirichlet),
            Equation::HeatNeumann => Some(Boundary::Neumann),
            Equation::Wave => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MethodKind {
    Em,
    Picard,
    Oracle,
}

impl MethodKind {
    pub fn name(self) -> &'static str {
        match self {
            MethodKind::Em => "em",
            MethodKind::Picard => "picard",
            MethodKind::Oracle => "oracle",
        }
    }
}

/// Raw `key = value` pairs, in file order.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct RawConfig {
    values: BTreeMap<String, String>,
}

impl RawConfig {
    pub fn parse(text: &str) -> Result<Self, ConfigError> {
        let mut values = BTreeMap::new();
        for (i, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let Some((key, value)) = line.split_once('=') else {
                return fail(format!("line {}: expected `key = value`", i + 1));
            };
            let (key, value) = (key.trim(), value.trim());
            if !KEYS.contains(&key) {
                return fail(format!("line {}: unknown key `{key}`", i + 1));
            }
            if values.insert(key.to_string(), value.to_string()).is_some() {
                return fail(format!("line {}: key `{key}` given twice", i + 1));
            }
        }
        Ok(Self { values })
    }

    fn get(&self, key: &str) -> Option<&str> {
        self.values.get(key).map(String::as_str)
    }

    fn has(&self, key: &str) -> bool {
        self.values.contains_key(key)
    }

    fn real(&self, key: &str) -> Result<Option<f64>, ConfigError> {
        self.get(key).map(|v| parse_real(key, v)).transpose()
    }

    fn int(&self, key: &str) -> Result<Option<u64>, ConfigError> {
        self.get(key)
            .map(|v| {
                v.parse::<u64>()
                    .map_err(|_| ConfigError(format!("{key}: `{v}` is not a non-negative integer")))
            })
            .transpose()
    }

    fn list(&self, key: &str) -> Result<Option<Vec<f64>>, ConfigError> {
        self.get(key)
            .map(|v| {
                v.split(',')
                    .map(|s| parse_real(key, s.trim()))
                    .collect::<Result<Vec<_>, _>>()
            })
            .transpose()
    }

    fn table(&self, key: &str) -> Result<Option<Vec<(f64, f64)>>, ConfigError> {
        self.get(key)
            .map(|v| {
                v.split(',')
                    .map(|pair| {
                        let Some((x, y)) = pair.split_once(':') else {
                            return fail(format!("{key}: expected `x:y`, got `{}`", pair.trim()));
                        };
                        Ok((parse_real(key, x.trim())?, parse_real(key, y.trim())?))
                    })
                    .collect::<Result<Vec<_>, _>>()
            })
            .transpose()
    }
}

fn parse_real(key: &str, v: &str) -> Result<f64, ConfigError> {
    match v.parse::<f64>() {
        Ok(x) if x.is_finite() => Ok(x),
        _ => fail(format!("{key}: `{v}` is not a finite number")),
    }
}

fn usize_of(v: u64) -> usize {
    usize::try_from(v).unwrap_or(usize::MAX)
}

#[derive(Debug, Clone, PartialEq)]
pub struct VerifyKeys {
    pub length: Option<f64>,
    pub epsilon: Option<f64>,
    pub betas: Option<Vec<f64>>,
    pub taus: Option<Vec<f64>>,
    pub images: Option<usize>,
    pub modes: Option<usize>,
    pub resolvent_t: Option<f64>,
}

impl VerifyKeys {
    /// Reads the `verify.*` keys and `grid.L`, ignoring everything else.
    pub fn from_raw(raw: &RawConfig) -> Result<Self, ConfigError> {
        Ok(Self {
            length: raw.real("grid.L")?,
            epsilon: raw.real("verify.epsilon")?,
            betas: raw.list("verify.betas")?,
            taus: raw.list("verify.taus")?,
            images: raw.int("verify.images")?.map(usize_of),
            modes: raw.int("verify.modes")?.map(usize_of),
            resolvent_t: raw.real("verify.resolvent_t")?,
        })
    }
}

/// A validated experiment. Every grid is stability-checked here, before
/// anything runs.
#[derive(Debug, Clone)]
pub struct ExperimentConfig {
    pub equation: Equation,
    pub method: MethodKind,
    pub seed: Option<u64>,
    pub replicates: u64,
    pub replicate: u64,
    pub lambda: f64,
    pub lambda_list: Option<Vec<f64>>,
    pub t_list: Option<Vec<f64>>,
    pub snapshots: usize,
    pub workers: Option<usize>,
    pub output: Option<PathBuf>,
    pub spec: GridSpec,
    pub diffusion: f64,
    pub sigma: SigmaSpec,
    pub u0: InitialData,
    pub v0: Velocity,
    pub picard_iterations: usize,
    pub oracle_cells: usize,
    pub oracle_steps: usize,
    pub bound_epsilon: f64,
    pub bound_delta: f64,
    pub bound_terms: usize,
}

impl ExperimentConfig {
    #[cfg(test)]
    pub fn from_text(text: &str) -> Result<Self, ConfigError> {
        Self::from_raw(&RawConfig::parse(text)?)
    }

    pub fn from_raw(raw: &RawConfig) -> Result<Self, ConfigError> {
        let equation = match raw.get("equation") {
            None => return fail("missing key `equation`"),
            Some("heat_dirichlet") => Equation::HeatDirichlet,
            Some("heat_neumann") => Equation::HeatNeumann,
            Some("wave") => Equation::Wave,
            Some("pam") => Equation::Pam,
            Some(other) => {
                return fail(format!(
                    "equation: `{other}` is not one of heat_dirichlet, heat_neumann, wave, pam"
                ))
            }
        };
        let method = match raw.get("method").unwrap_or("em") {
            "em" => MethodKind::Em,
            "picard" => MethodKind::Picard,
            "oracle" => MethodKind::Oracle,
            other => return fail(format!("method: `{other}` is not one of em, picard, oracle")),
        };
        if equation == Equation::Wave && method == MethodKind::Picard {
            return fail("method: picard is only available for heat equations");
        }

        if equation == Equation::Pam {
            for key in ["diffusion", "u0.kind", "u0.value", "u0.table", "grid.L"] {
                if raw.has(key) {
                    return fail(format!(
                        "{key}: the pam preset fixes diffusion 1/2, Dirichlet walls, L = 1 and u0 = sin(pi x)"
                    ));
                }
            }
        }
        if equation == Equation::Wave {
            for key in ["diffusion", "u0.kind", "u0.value", "u0.table", "grid.L"] {
                if raw.has(key) {
                    return fail(format!("{key}: not used by the wave equation"));
                }
            }
        } else {
            for key in ["v0.kind", "v0.half_width", "v0.table", "grid.X"] {
                if raw.has(key) {
                    return fail(format!("{key}: only used by the wave equation"));
                }
            }
        }

        let sigma = match raw.get("sigma.kind").unwrap_or("linear") {
            "linear" => {
                for key in ["sigma.knots", "sigma.left_slope", "sigma.right_slope"] {
                    if raw.has(key) {
                        return fail(format!("{key}: only used with sigma.kind = piecewise"));
                    }
                }
                SigmaSpec::linear(raw.real("sigma.c")?.unwrap_or(1.0))?
            }
            "piecewise" => {
                if raw.has("sigma.c") {
                    return fail("sigma.c: only used with sigma.kind = linear");
                }
                let Some(knots) = raw.table("sigma.knots")? else {
                    return fail("sigma.knots: required for sigma.kind = piecewise");
                };
                let left = raw.real("sigma.left_slope")?.unwrap_or(0.0);
                let right = raw.real("sigma.right_slope")?.unwrap_or(0.0);
                SigmaSpec::piecewise(knots, left, right)?
            }
            other => return fail(format!("sigma.kind: `{other}` is not one of linear, piecewise")),
        };

        let u0 = match (equation, raw.get("u0.kind")) {
            (Equation::Pam, _) => InitialData::Sine,
            (_, None) if equation == Equation::HeatDirichlet => InitialData::Sine,
            (_, None) => InitialData::constant(raw.real("u0.value")?.unwrap_or(1.0))?,
            (_, Some("sine")) => InitialData::Sine,
            (_, Some("constant")) => InitialData::constant(raw.real("u0.value")?.unwrap_or(1.0))?,
            (_, Some("table")) => match raw.table("u0.table")? {
                Some(t) => InitialData::table(t)?,
                None => return fail("u0.table: required for u0.kind = table"),
            },
            (_, Some(other)) => {
                return fail(format!("u0.kind: `{other}` is not one of sine, constant, table"))
            }
        };

        let v0 = match raw.get("v0.kind").unwrap_or("indicator") {
            "indicator" => Velocity::indicator(raw.real("v0.half_width")?.unwrap_or(1.0))?,
            "bump" => Velocity::bump(raw.real("v0.half_width")?.unwrap_or(1.0))?,
            "table" => match raw.table("v0.table")? {
                Some(t) => Velocity::table(t)?,
                None => return fail("v0.table: required for v0.kind = table"),
            },
            other => return fail(format!("v0.kind: `{other}` is not one of indicator, bump, table")),
        };

        let diffusion = match equation {
            Equation::Pam => 0.5,
            _ => raw.real("diffusion")?.unwrap_or(1.0),
        };
        let horizon = raw.real("grid.T")?.unwrap_or(1.0);
        if !(horizon > 0.0) {
            return fail(format!("grid.T: must be positive, got {horizon}"));
        }
        let default_nx = if equation == Equation::Pam { 200 } else { 64 };
        let nx = usize_of(raw.int("grid.nx")?.unwrap_or(default_nx));
        let nt = raw.int("grid.nt")?.map(usize_of);
        let spec = match equation {
            Equation::Wave => {
                let ratio = raw.real("grid.ratio")?.unwrap_or(0.5);
                if !(ratio > 0.0 && ratio <= 1.0) {
                    return fail(format!("grid.ratio: Courant number must lie in (0, 1], got {ratio}"));
                }
                let x = raw.real("grid.X")?.unwrap_or(v0.support_radius() + horizon + 1.0);
                let nt = match nt {
                    Some(n) => n,
                    None => {
                        let dx = 2.0 * x / nx.max(1) as f64;
                        (horizon / (ratio * dx) * (1.0 - 1e-12)).ceil().max(1.0) as usize
                    }
                };
                GridSpec::centered(x, horizon, nx, nt)?
            }
            _ => {
                let ratio = raw.real("grid.ratio")?.unwrap_or(0.25);
                if !(ratio > 0.0 && ratio <= 0.5) {
                    return fail(format!("grid.ratio: mesh ratio must lie in (0, 1/2], got {ratio}"));
                }
                let l = raw.real("grid.L")?.unwrap_or(1.0);
                let nt = match nt {
                    Some(n) => n,
                    None if l > 0.0 && nx > 0 && diffusion > 0.0 => {
                        HeatProblem::steps_for_ratio(l, horizon, nx, diffusion, ratio)
                    }
                    None => 1,
                };
                GridSpec::new(l, horizon, nx, nt)?
            }
        };

        let replicates = raw.int("replicates")?.unwrap_or(100);
        let replicate = raw.int("replicate")?.unwrap_or(0);
        let lambda = raw.real("lambda")?.unwrap_or(0.0);
        let lambda_list = raw.list("lambda_list")?;
        for &l in std::iter::once(&lambda).chain(lambda_list.iter().flatten()) {
            if l < 0.0 {
                return fail(format!("lambda: must be >= 0, got {l}"));
            }
        }
        let t_list = raw.list("t_list")?;
        for &t in t_list.iter().flatten() {
            if !(t >= 0.0 && t <= horizon * (1.0 + 1e-12)) {
                return fail(format!("t_list: time {t} is outside [0, grid.T = {horizon}]"));
            }
        }
        let snapshots = usize_of(raw.int("snapshots")?.unwrap_or(10));
        if snapshots == 0 {
            return fail("snapshots: must be at least 1");
        }
        let picard_iterations = usize_of(raw.int("picard.iterations")?.unwrap_or(8));
        if picard_iterations == 0 {
            return fail("picard.iterations: must be at least 1");
        }
        let bound_epsilon = raw.real("bounds.epsilon")?.unwrap_or(1.0);
        let bound_delta = raw.real("bounds.delta")?.unwrap_or(0.5);
        if !(bound_epsilon > 0.0) {
            return fail("bounds.epsilon: must be positive");
        }
        if !(bound_delta > 0.0 && bound_delta < 1.0) {
            return fail("bounds.delta: must lie in (0, 1)");
        }
        let bound_terms = usize_of(raw.int("bounds.terms")?.unwrap_or(50));
        if bound_terms < 2 {
            return fail("bounds.terms: must be at least 2");
        }

        let cfg = ExperimentConfig {
            equation,
            method,
            seed: raw.int("seed")?,
            replicates,
            replicate,
            lambda,
            lambda_list,
            t_list,
            snapshots,
            workers: raw.int("workers")?.map(usize_of),
            output: raw.get("output").map(PathBuf::from),
            spec,
            diffusion,
            sigma,
            u0,
            v0,
            picard_iterations,
            oracle_cells: usize_of(raw.int("oracle.cells")?.unwrap_or(32)),
            oracle_steps: usize_of(raw.int("oracle.steps")?.unwrap_or(200)),
            bound_epsilon,
            bound_delta,
            bound_terms,
        };
        if cfg.method == MethodKind::Em {
            match cfg.heat_problem()? {
                Some(p) => p.check_stability()?,
                None => cfg.wave_problem()?.check_cfl()?,
            }
        }
        Ok(cfg)
    }

    pub fn boundary(&self) -> Option<Boundary> {
        self.equation.boundary()
    }

    pub fn length(&self) -> f64 {
        self.spec.length()
    }

    pub fn heat_problem(&self) -> Result<Option<HeatProblem>, ConfigError> {
        let Some(boundary) = self.boundary() else {
            return Ok(None);
        };
        Ok(Some(HeatProblem::new(
            self.spec,
            boundary,
            self.sigma.clone(),
            self.u0.clone(),
            self.diffusion,
        )?))
    }

    pub fn wave_problem(&self) -> Result<WaveProblem, ConfigError> {
        Ok(WaveProblem::new(self.spec, self.sigma.clone(), self.v0.clone())?)
    }

    /// `lambda_list`, falling back to the single `lambda`.
    pub fn lambdas(&self) -> Vec<f64> {
        self.lambda_list.clone().unwrap_or_else(|| vec![self.lambda])
    }

    /// `t_list`, falling back to the horizon.
    pub fn times(&self) -> Vec<f64> {
        self.t_list.clone().unwrap_or_else(|| vec![self.spec.horizon()])
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_lists_tables_and_comments() {
        let raw = RawConfig::parse(
            "# comment\n\nequation = wave\nlambda_list = 1, 2.5,4\nv0.table = -1:0, 0:1, 1:0\n",
        )
        .unwrap();
        assert_eq!(raw.list("lambda_list").unwrap().unwrap(), vec![1.0, 2.5, 4.0]);
        assert_eq!(
            raw.table("v0.table").unwrap().unwrap(),
            vec![(-1.0, 0.0), (0.0, 1.0), (1.0, 0.0)]
        );
    }

    #[test]
    fn rejects_unknown_and_repeated_keys() {
        let e = RawConfig::parse("equation = pam\ngrid.ny = 3\n").unwrap_err();
        assert!(e.0.contains("unknown key `grid.ny`"), "{e}");
        let e = RawConfig::parse("seed = 1\nseed = 2\n").unwrap_err();
        assert!(e.0.contains("twice"));
        assert!(RawConfig::parse("equation pam\n").is_err());
    }

    #[test]
    fn pam_preset() {
        let c = ExperimentConfig::from_text("equation = pam\n").unwrap();
        assert_eq!(c.diffusion, 0.5);
        assert_eq!(c.u0, InitialData::Sine);
        assert_eq!(c.boundary(), Some(Boundary::Dirichlet));
        assert_eq!((c.spec.length(), c.spec.horizon(), c.spec.nx()), (1.0, 1.0, 200));
        let e = ExperimentConfig::from_text("equation = pam\ndiffusion = 1\n").unwrap_err();
        assert!(e.0.contains("pam preset"));
    }

    #[test]
    fn stability_is_checked_up_front() {
        let e = ExperimentConfig::from_text("equation = heat_neumann\ngrid.nx = 100\ngrid.nt = 10\n")
            .unwrap_err();
        assert!(e.0.contains("unstable"), "{e}");
        let e = ExperimentConfig::from_text("equation = wave\ngrid.nx = 400\ngrid.nt = 10\n")
            .unwrap_err();
        assert!(e.0.contains("unstable"), "{e}");
        // the oracle never builds the explicit grid
        ExperimentConfig::from_text(
            "equation = heat_neumann\nmethod = oracle\ngrid.nx = 100\ngrid.nt = 10\n",
        )
        .unwrap();
    }

    #[test]
    fn zero_steps_rejected() {
        let e = ExperimentConfig::from_text("equation = pam\ngrid.nt = 0\n").unwrap_err();
        assert!(e.0.contains("nt=0"), "{e}");
    }

    #[test]
    fn cross_field_errors() {
        for text in [
            "equation = wave\nmethod = picard\n",
            "equation = wave\nu0.kind = sine\n",
            "equation = heat_neumann\nv0.kind = bump\n",
            "equation = heat_neumann\nsigma.kind = piecewise\n",
            "equation = heat_neumann\nsigma.c = 1\nsigma.knots = 1:1\n",
            "equation = heat_neumann\nlambda = -1\n",
            "equation = heat_neumann\nt_list = 2\n",
            "equation = heat_neumann\nmethod = magic\n",
            "equation = heat\n",
            "seed = 1\n",
        ] {
            assert!(ExperimentConfig::from_text(text).is_err(), "{text}");
        }
    }

    #[test]
    fn wave_domain_defaults_cover_the_light_cone() {
        let c = ExperimentConfig::from_text("equation = wave\ngrid.T = 0.5\n").unwrap();
        let p = c.wave_problem().unwrap();
        assert!(p.half_width() >= 1.5);
        assert!(p.courant() <= 0.5 + 1e-12);
    }
}
