use std::f64::consts::{E, PI};

use crate::error::{domain, Result};
use crate::kernels::{neumann_threshold, Boundary, KernelParams};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Theorem {
    HeatDirichlet,
    HeatNeumann,
    Wave,
    PropEnergy,
    MomentApriori,
    WaveUpperClosed,
}

impl Theorem {
    pub fn name(self) -> &'static str {
        match self {
            Theorem::HeatDirichlet => "heat_dirichlet",
            Theorem::HeatNeumann => "heat_neumann",
            Theorem::Wave => "wave",
            Theorem::PropEnergy => "prop_energy",
            Theorem::MomentApriori => "moment_apriori",
            Theorem::WaveUpperClosed => "wave_upper_closed",
        }
    }
}

/// `log E_t(lambda) ~ coefficient * lambda^exponent` as `lambda -> infinity`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RateBound {
    pub coefficient: f64,
    pub exponent: u32,
}

#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct BoundParams {
    pub t: f64,
    pub lambda: f64,
    pub ell: f64,
    pub lip: f64,
    pub length: Option<f64>,
    pub epsilon: Option<f64>,
    pub delta: Option<f64>,
    pub m: Option<f64>,
    pub u0_inf: Option<f64>,
    pub u0_sup: Option<f64>,
    pub v0_l1: Option<f64>,
    pub v0_l2_sq: Option<f64>,
}

/// Asymptotic rates and explicit bounds of one theorem at one parameter point.
///
/// `lower` and `upper` bound the squared energy (or, for the a-priori
/// estimate, the moment) and are `-inf` / `+inf` when the theorem gives no
/// explicit value; `log_lower` and `log_upper` are their logarithms, kept
/// separately because the values themselves overflow easily.
#[derive(Debug, Clone, PartialEq)]
pub struct BoundSet {
    pub theorem: Theorem,
    pub params: BoundParams,
    pub lower_rate: Option<RateBound>,
    pub upper_rate: Option<RateBound>,
    pub log_lower: f64,
    pub log_upper: f64,
    pub note: Option<String>,
}

impl BoundSet {
    fn new(theorem: Theorem, params: BoundParams) -> Self {
        Self {
            theorem,
            params,
            lower_rate: None,
            upper_rate: None,
            log_lower: f64::NEG_INFINITY,
            log_upper: f64::INFINITY,
            note: None,
        }
    }

    pub fn lower(&self) -> f64 {
        self.log_lower.exp()
    }

    pub fn upper(&self) -> f64 {
        self.log_upper.exp()
    }
}

fn check_time(t: f64) -> Result<()> {
    if !(t.is_finite() && t > 0.0) {
        return domain(format!("t must be positive, got {t}"));
    }
    Ok(())
}

fn check_delta(delta: f64) -> Result<()> {
    if !(delta > 0.0 && delta < 1.0) {
        return domain(format!("delta must lie in (0, 1), got {delta}"));
    }
    Ok(())
}

fn check_constants(ell: f64, lip: f64) -> Result<()> {
    if !(ell >= 0.0 && lip >= ell && lip.is_finite()) {
        return domain(format!("need 0 <= ell <= lip < inf, got ell={ell}, lip={lip}"));
    }
    Ok(())
}

/// Dirichlet heat equation: `log E` grows at least like `ell^2 t / 2 * lambda^2`
/// and at most like `8 lip^4 t * lambda^4`. The lower rate is stated for
/// `L = 1`; see [`dirichlet_mode_lower`] for general `L`.
pub fn bound_heat_dirichlet(t: f64, lambda: f64, ell: f64, lip: f64) -> Result<BoundSet> {
    check_time(t)?;
    check_constants(ell, lip)?;
    let mut b = BoundSet::new(
        Theorem::HeatDirichlet,
        BoundParams {
            t,
            lambda,
            ell,
            lip,
            ..Default::default()
        },
    );
    b.lower_rate = Some(RateBound {
        coefficient: ell * ell * t / 2.0,
        exponent: 2,
    });
    b.upper_rate = Some(RateBound {
        coefficient: 8.0 * lip.powi(4) * t,
        exponent: 4,
    });
    Ok(b)
}

/// Explicit Dirichlet lower bound on `E ||u_t||^2` from the first `modes`
/// eigenmodes: `sum_n (u_0, phi_n)^2 exp((lambda^2 ell^2 / L - 2 mu_n) t)`.
/// `coefficients[n-1]` is `(u_0, phi_n)`.
pub fn dirichlet_mode_lower(coefficients: &[f64], length: f64, t: f64, lambda: f64, ell: f64) -> f64 {
    coefficients
        .iter()
        .enumerate()
        .map(|(k, c)| {
            let mu = ((k + 1) as f64 * PI / length).powi(2);
            c * c * ((lambda * ell).powi(2) / length * t - 2.0 * mu * t).exp()
        })
        .sum()
}

/// Data the Neumann bounds need beyond the rate constants.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NeumannData {
    pub length: f64,
    pub u0_inf: f64,
    pub u0_sup: f64,
    pub epsilon: f64,
    pub delta: f64,
}

/// Neumann heat equation: `log E` between `ell^4 t / (8 pi e) * lambda^4`
/// and `9 lip^4 t / 16 * lambda^4`. Also returns the explicit lower value
/// `inf(u_0)^2 L (exp((lambda ell)^4 t / (4 pi e)) - 1)` and the explicit upper
/// value `L sup(u_0)^2 / delta * exp((3 + eps)^2 (lambda lip)^4 t / (8 (1 - delta)^2))`;
/// the latter only when its exponent rate clears the kernel threshold.
pub fn bound_heat_neumann(
    t: f64,
    lambda: f64,
    ell: f64,
    lip: f64,
    data: &NeumannData,
) -> Result<BoundSet> {
    check_time(t)?;
    check_constants(ell, lip)?;
    check_delta(data.delta)?;
    let mut b = BoundSet::new(
        Theorem::HeatNeumann,
        BoundParams {
            t,
            lambda,
            ell,
            lip,
            length: Some(data.length),
            epsilon: Some(data.epsilon),
            delta: Some(data.delta),
            u0_inf: Some(data.u0_inf),
            u0_sup: Some(data.u0_sup),
            ..Default::default()
        },
    );
    b.lower_rate = Some(RateBound {
        coefficient: ell.powi(4) * t / (8.0 * PI * E),
        exponent: 4,
    });
    b.upper_rate = Some(RateBound {
        coefficient: 9.0 * lip.powi(4) * t / 16.0,
        exponent: 4,
    });
    let mut notes = Vec::new();
    if data.u0_inf > 0.0 {
        b.log_lower = log_heat_renewal_closed(t, lambda, ell, data.u0_inf, data.length);
    } else {
        notes.push("inf u0 = 0: explicit lower bound not asserted".to_string());
    }
    let (log_upper, asserted) = neumann_log_upper(t, lambda, lip, data)?;
    if asserted {
        b.log_upper = log_upper;
    } else {
        notes.push("beta* below kernel threshold: explicit upper bound not asserted".to_string());
    }
    if !notes.is_empty() {
        b.note = Some(notes.join("; "));
    }
    Ok(b)
}

/// `log` of the explicit Neumann upper bound, and whether
/// `beta* = (3 + eps)^2 (lambda lip)^4 / (8 (1 - delta)^2)` reaches the
/// threshold where the resolvent estimate is proved.
pub fn neumann_log_upper(t: f64, lambda: f64, lip: f64, data: &NeumannData) -> Result<(f64, bool)> {
    check_delta(data.delta)?;
    let params = KernelParams::new(data.length, Boundary::Neumann)?;
    let threshold = neumann_threshold(&params, data.epsilon)?;
    let beta_star =
        (3.0 + data.epsilon).powi(2) * (lambda * lip).powi(4) / (8.0 * (1.0 - data.delta).powi(2));
    let log = (data.length * data.u0_sup * data.u0_sup / data.delta).ln() + beta_star * t;
    Ok((log, beta_star >= threshold))
}

/// `log(eps^2 L (exp(x) - 1))` with `x = (lambda ell)^4 t / (4 pi e)`.
pub(crate) fn log_heat_renewal_closed(t: f64, lambda: f64, ell: f64, eps: f64, length: f64) -> f64 {
    let x = (lambda * ell).powi(4) * t / (4.0 * PI * E);
    let log_series = if x > 30.0 { x + (-(-x).exp()).ln_1p() } else { x.exp_m1().ln() };
    (eps * eps * length).ln() + log_series
}

/// Lower bound of the renewal argument for the Neumann energy:
/// `E_t^2 >= eps^2 L (exp((lambda ell)^4 t / (4 pi e)) - 1)`, rate `ell^4 t / (8 pi e)`.
pub fn bound_prop_energy(t: f64, lambda: f64, ell: f64, eps: f64, length: f64) -> Result<BoundSet> {
    check_time(t)?;
    let mut b = BoundSet::new(
        Theorem::PropEnergy,
        BoundParams {
            t,
            lambda,
            ell,
            lip: f64::NAN,
            length: Some(length),
            u0_inf: Some(eps),
            ..Default::default()
        },
    );
    b.lower_rate = Some(RateBound {
        coefficient: ell.powi(4) * t / (8.0 * PI * E),
        exponent: 4,
    });
    if eps > 0.0 && lambda * ell > 0.0 {
        b.log_lower = log_heat_renewal_closed(t, lambda, ell, eps, length);
    }
    Ok(b)
}

/// `A_2 = 16 min(||v_0||_2^2, ||v_0||_1^2)`.
pub fn wave_a2(v0_l1: f64, v0_l2_sq: f64) -> f64 {
    16.0 * v0_l2_sq.min(v0_l1 * v0_l1)
}

/// Closed upper bound on the wave energy:
/// `E_t^2 <= 8 A_2 ||v_0||_2^2 / (delta (e lambda lip)^2) * exp(lambda lip t / sqrt(2 (1 - delta)))`.
pub fn bound_wave_upper_closed(
    t: f64,
    lambda: f64,
    lip: f64,
    v0_l1: f64,
    v0_l2_sq: f64,
    delta: f64,
) -> Result<BoundSet> {
    check_time(t)?;
    check_delta(delta)?;
    let mut b = BoundSet::new(
        Theorem::WaveUpperClosed,
        BoundParams {
            t,
            lambda,
            ell: f64::NAN,
            lip,
            delta: Some(delta),
            v0_l1: Some(v0_l1),
            v0_l2_sq: Some(v0_l2_sq),
            ..Default::default()
        },
    );
    if lambda * lip > 0.0 {
        let a2 = wave_a2(v0_l1, v0_l2_sq);
        b.log_upper = (8.0 * a2 * v0_l2_sq / delta).ln()
            - 2.0 * (E * lambda * lip).ln()
            + lambda * lip * t / (2.0 * (1.0 - delta)).sqrt();
    } else {
        b.note = Some("lambda * lip = 0: closed upper bound undefined".into());
    }
    Ok(b)
}

/// Wave equation: `log E` between `ell t / (4 sqrt 8) * lambda` and
/// `lip t / sqrt 8 * lambda`, plus the closed upper bound.
pub fn bound_wave(
    t: f64,
    lambda: f64,
    ell: f64,
    lip: f64,
    v0_l1: f64,
    v0_l2_sq: f64,
    delta: f64,
) -> Result<BoundSet> {
    check_constants(ell, lip)?;
    let closed = bound_wave_upper_closed(t, lambda, lip, v0_l1, v0_l2_sq, delta)?;
    let mut b = BoundSet::new(
        Theorem::Wave,
        BoundParams {
            ell,
            ..closed.params
        },
    );
    b.lower_rate = Some(RateBound {
        coefficient: ell * t / (4.0 * 8f64.sqrt()),
        exponent: 1,
    });
    b.upper_rate = Some(RateBound {
        coefficient: lip * t / 8f64.sqrt(),
        exponent: 1,
    });
    b.log_upper = closed.log_upper;
    b.note = closed.note;
    Ok(b)
}

/// `log` of the a-priori moment bound
/// `delta^{-m/2} sup(u_0)^m exp(2 t m^3 (lambda lip / (1 - delta))^4)`.
pub fn log_moment_apriori(t: f64, lambda: f64, lip: f64, m: f64, delta: f64, u0_sup: f64) -> Result<f64> {
    if !(m >= 2.0) {
        return domain(format!("moment order must be >= 2, got {m}"));
    }
    check_delta(delta)?;
    if !(t >= 0.0) {
        return domain(format!("t must be >= 0, got {t}"));
    }
    Ok(-0.5 * m * delta.ln()
        + m * u0_sup.ln()
        + 2.0 * t * m.powi(3) * (lambda * lip / (1.0 - delta)).powi(4))
}

pub fn bound_moment_apriori(t: f64, lambda: f64, lip: f64, m: f64, delta: f64, u0_sup: f64) -> Result<f64> {
    Ok(log_moment_apriori(t, lambda, lip, m, delta, u0_sup)?.exp())
}

pub fn moment_apriori_set(t: f64, lambda: f64, lip: f64, m: f64, delta: f64, u0_sup: f64) -> Result<BoundSet> {
    let log = log_moment_apriori(t, lambda, lip, m, delta, u0_sup)?;
    let mut b = BoundSet::new(
        Theorem::MomentApriori,
        BoundParams {
            t,
            lambda,
            ell: f64::NAN,
            lip,
            delta: Some(delta),
            m: Some(m),
            u0_sup: Some(u0_sup),
            ..Default::default()
        },
    );
    b.log_upper = log;
    Ok(b)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn neumann_data() -> NeumannData {
        NeumannData {
            length: 1.0,
            u0_inf: 1.0,
            u0_sup: 1.0,
            epsilon: 1.0,
            delta: 0.5,
        }
    }

    #[test]
    fn dirichlet_rates() {
        let b = bound_heat_dirichlet(1.0, 3.0, 1.0, 1.0).unwrap();
        assert_eq!(b.lower_rate.unwrap().coefficient, 0.5);
        assert_eq!(b.upper_rate.unwrap().coefficient, 8.0);
        let z = bound_heat_dirichlet(1.0, 3.0, 0.0, 1.0).unwrap();
        assert_eq!(z.lower_rate.unwrap().coefficient, 0.0);
        let d = bound_heat_dirichlet(2.0, 3.0, 1.0, 1.0).unwrap();
        assert_eq!(d.lower_rate.unwrap().coefficient, 1.0);
        assert_eq!(d.upper_rate.unwrap().coefficient, 16.0);
        assert!(bound_heat_dirichlet(0.0, 1.0, 1.0, 1.0).is_err());
    }

    #[test]
    fn neumann_rates() {
        let b = bound_heat_neumann(1.0, 3.0, 1.0, 1.0, &neumann_data()).unwrap();
        let lo = b.lower_rate.unwrap().coefficient;
        assert!((lo - 0.0146374578810798).abs() < 1e-15, "{lo}");
        assert_eq!(b.upper_rate.unwrap().coefficient, 0.5625);
        let x = 81.0 / (4.0 * PI * E);
        assert!((b.lower() - x.exp_m1()).abs() < 1e-12 * x.exp());
        assert!(b.log_lower <= b.log_upper);
    }

    #[test]
    fn neumann_upper_needs_threshold() {
        let b = bound_heat_neumann(1.0, 0.1, 1.0, 1.0, &neumann_data()).unwrap();
        assert!(b.log_upper.is_infinite());
        assert!(b.note.unwrap().contains("not asserted"));
        let mut d = neumann_data();
        d.u0_inf = 0.0;
        let b = bound_heat_neumann(1.0, 3.0, 1.0, 1.0, &d).unwrap();
        assert!(b.log_lower == f64::NEG_INFINITY);
    }

    #[test]
    fn wave_rates() {
        let b = bound_wave(1.0, 10.0, 1.0, 1.0, 2.0, 2.0, 0.5).unwrap();
        let (lo, hi) = (b.lower_rate.unwrap().coefficient, b.upper_rate.unwrap().coefficient);
        assert!((lo - 0.0883883).abs() < 1e-7);
        assert!((hi - 0.3535534).abs() < 1e-7);
        assert!((hi - 4.0 * lo).abs() < 1e-15);
        assert!(bound_wave(1.0, 10.0, 1.0, 1.0, 2.0, 2.0, 1.0).is_err());
        assert!(bound_wave(1.0, 10.0, 1.0, 1.0, 2.0, 2.0, 0.0).is_err());
        let closed = bound_wave_upper_closed(1.0, 10.0, 1.0, 2.0, 2.0, 0.5).unwrap();
        let want = 8.0 * 32.0 * 2.0 / (0.5 * (E * 10.0).powi(2)) * (10.0f64).exp();
        assert!((closed.upper() - want).abs() < 1e-9 * want);
    }

    #[test]
    fn apriori_values() {
        assert!((bound_moment_apriori(0.0, 7.0, 1.0, 2.0, 0.5, 1.0).unwrap() - 2.0).abs() < 1e-14);
        let log = log_moment_apriori(1.0, 1.0, 1.0, 2.0, 0.5, 1.0).unwrap();
        assert!((log - (2f64.ln() + 256.0)).abs() < 1e-12);
        assert!(log_moment_apriori(1.0, 1.0, 1.0, 1.5, 0.5, 1.0).is_err());
    }

    #[test]
    fn mode_lower_bound_for_sine() {
        // u_0 = sin(pi x) on [0, 1] has (u_0, phi_1) = 1/sqrt 2 and no other modes
        let c = [0.5f64.sqrt()];
        let v = dirichlet_mode_lower(&c, 1.0, 0.2, 2.0, 1.0);
        assert!((v - 0.5 * ((4.0 - 2.0 * PI * PI) * 0.2f64).exp()).abs() < 1e-15);
    }
}
