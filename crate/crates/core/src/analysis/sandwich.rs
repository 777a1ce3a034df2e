use crate::error::Result;
use crate::kernels::{eigenpair, Boundary, KernelParams};
use crate::quad::adaptive;
use crate::solvers::{sigma_constants, InitialData, SigmaSpec, Velocity};

use super::bounds::{
    bound_prop_energy, bound_wave_upper_closed, dirichlet_mode_lower, log_moment_apriori,
    neumann_log_upper, NeumannData,
};
use super::convolution::empirical_a1;
use super::energy::{EnergyPoint, Method};
use super::renewal::renewal_series_wave;

/// Multiplicative slack on explicit lower bounds, covering oracle discretisation.
pub const LOWER_SLACK: f64 = 0.95;
/// Monte Carlo estimates are widened by this many standard errors.
pub const MC_SIGMAS: f64 = 3.0;
const DIRICHLET_MODES: usize = 10;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Verdict {
    Pass,
    Fail,
    NotAsserted,
}

impl Verdict {
    pub fn name(self) -> &'static str {
        match self {
            Verdict::Pass => "pass",
            Verdict::Fail => "fail",
            Verdict::NotAsserted => "n/a",
        }
    }
}

/// The equation an energy was computed for, as far as the bounds care.
#[derive(Debug, Clone)]
pub enum Model {
    Heat {
        boundary: Boundary,
        length: f64,
        diffusion: f64,
        u0: InitialData,
        sigma: SigmaSpec,
    },
    Wave {
        v0: Velocity,
        sigma: SigmaSpec,
    },
}

/// Explicit bounds on `E ||u_t||^2` in log form; `None` where nothing is proved.
#[derive(Debug, Clone, PartialEq)]
pub struct Sandwich {
    pub log_lower: Option<f64>,
    pub log_upper: Option<f64>,
    pub note: Option<String>,
}

impl Sandwich {
    /// Compares an energy estimate with the bounds.
    pub fn judge(&self, point: &EnergyPoint) -> (Verdict, Verdict) {
        let widen = match point.method {
            Method::Mc => MC_SIGMAS * point.stderr,
            Method::Oracle => 0.0,
        };
        let high = (point.energy + widen).powi(2);
        let low = (point.energy - widen).max(0.0).powi(2);
        let lower = match self.log_lower {
            None => Verdict::NotAsserted,
            Some(b) if high.ln() >= LOWER_SLACK.ln() + b => Verdict::Pass,
            Some(_) => Verdict::Fail,
        };
        let upper = match self.log_upper {
            None => Verdict::NotAsserted,
            Some(b) if low.ln() <= b => Verdict::Pass,
            Some(_) => Verdict::Fail,
        };
        (lower, upper)
    }
}

/// Tuning of the explicit bounds.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SandwichSettings {
    pub epsilon: f64,
    pub delta: f64,
    pub terms: usize,
}

impl Default for SandwichSettings {
    fn default() -> Self {
        Self {
            epsilon: 1.0,
            delta: 0.5,
            terms: 50,
        }
    }
}

/// Precomputed pieces of the bounds that do not depend on `(t, lambda)`.
#[derive(Debug, Clone)]
pub struct SandwichModel {
    model: Model,
    settings: SandwichSettings,
    ell: f64,
    lip: f64,
    /// Dirichlet `(u_0, phi_n)`, or the wave `A_1`.
    coefficients: Vec<f64>,
}

impl SandwichModel {
    pub fn new(model: Model, settings: SandwichSettings) -> Result<Self> {
        let (ell, lip) = match &model {
            Model::Heat { sigma, .. } | Model::Wave { sigma, .. } => sigma_constants(sigma),
        };
        let coefficients = match &model {
            Model::Heat {
                boundary: Boundary::Dirichlet,
                length,
                u0,
                ..
            } => {
                let p = KernelParams::new(*length, Boundary::Dirichlet)?;
                (1..=DIRICHLET_MODES)
                    .map(|n| {
                        let (_, phi) = eigenpair(&p, n)?;
                        Ok(adaptive(&|x| u0.eval(x, *length) * phi.eval(x), 0.0, *length, 1e-13))
                    })
                    .collect::<Result<Vec<f64>>>()?
            }
            Model::Heat { .. } => Vec::new(),
            Model::Wave { v0, .. } => vec![empirical_a1(v0)?],
        };
        Ok(Self {
            model,
            settings,
            ell,
            lip,
            coefficients,
        })
    }

    pub fn bounds(&self, t: f64, lambda: f64) -> Result<Sandwich> {
        let s = self.settings;
        let (ell, lip) = (self.ell, self.lip);
        match &self.model {
            Model::Heat { diffusion, .. } if *diffusion != 1.0 => Ok(Sandwich {
                log_lower: None,
                log_upper: None,
                note: Some("explicit bounds are stated for unit diffusion".into()),
            }),
            Model::Heat {
                boundary: Boundary::Neumann,
                length,
                u0,
                ..
            } => {
                let data = NeumannData {
                    length: *length,
                    u0_inf: u0.inf_value(*length),
                    u0_sup: u0.sup_value(*length),
                    epsilon: s.epsilon,
                    delta: s.delta,
                };
                let lower = bound_prop_energy(t, lambda, ell, data.u0_inf, *length)?;
                let (log_upper, asserted) = neumann_log_upper(t, lambda, lip, &data)?;
                let mut notes = Vec::new();
                let log_lower = lower.log_lower.is_finite().then_some(lower.log_lower);
                if log_lower.is_none() {
                    notes.push("lower needs inf u0 > 0 and lambda ell > 0");
                }
                if !asserted {
                    notes.push("upper below kernel threshold");
                }
                Ok(Sandwich {
                    log_lower,
                    log_upper: asserted.then_some(log_upper),
                    note: (!notes.is_empty()).then(|| notes.join("; ")),
                })
            }
            Model::Heat { length, u0, .. } => {
                let lower = dirichlet_mode_lower(&self.coefficients, *length, t, lambda, ell);
                let apriori =
                    log_moment_apriori(t, lambda, lip, 2.0, s.delta, u0.sup_value(*length))?;
                Ok(Sandwich {
                    log_lower: (lower > 0.0).then(|| lower.ln()),
                    log_upper: Some(length.ln() + apriori),
                    note: None,
                })
            }
            Model::Wave { v0, .. } => {
                let a1 = self.coefficients[0];
                let series = renewal_series_wave(t, lambda, ell, a1, v0.l2_norm_sq(), s.terms)?;
                let upper =
                    bound_wave_upper_closed(t, lambda, lip, v0.l1_norm(), v0.l2_norm_sq(), s.delta)?;
                let mut notes = Vec::new();
                let log_lower = (series.asserted && series.partial > 0.0).then(|| series.partial.ln());
                if log_lower.is_none() {
                    notes.push(format!("lower needs lambda >= {:.6}", series.threshold));
                }
                let log_upper = upper.log_upper.is_finite().then_some(upper.log_upper);
                if let Some(n) = upper.note {
                    notes.push(n);
                }
                Ok(Sandwich {
                    log_lower,
                    log_upper,
                    note: (!notes.is_empty()).then(|| notes.join("; ")),
                })
            }
        }
    }
}
