use crate::error::{domain, Result};

use super::{moment_slope, SigmaSpec, Velocity};

/// Squared energy `F(t) = E ||w_t||^2` of the wave problem with
/// `|sigma(z)| = c |z|`, which solves
/// `F(t) = ||W_t||^2 / 4 + (lambda c)^2 / 2 int_0^t (t - s) F(s) ds`.
#[derive(Debug, Clone)]
pub struct WaveEnergy {
    pub dt: f64,
    /// `values[n]` is `F(n dt)`.
    pub values: Vec<f64>,
}

impl WaveEnergy {
    pub fn final_value(&self) -> f64 {
        *self.values.last().expect("at least one step")
    }
}

/// Step count used when none is given: enough to resolve the growth rate
/// `lambda c / sqrt(2)` with a hundred steps per e-fold.
pub fn default_wave_steps(strength: f64, horizon: f64) -> usize {
    let rate = strength / 2f64.sqrt();
    (100.0 * rate * horizon).ceil().max(2000.0) as usize
}

/// Trapezoid-rule time stepping. The kernel vanishes on the diagonal, so
/// every step is explicit.
pub fn wave_energy_path(
    v0: &Velocity,
    strength: f64,
    horizon: f64,
    steps: usize,
) -> Result<WaveEnergy> {
    if !(horizon.is_finite() && horizon > 0.0) {
        return domain(format!("horizon must be positive, got {horizon}"));
    }
    if steps == 0 {
        return domain("need at least one time step");
    }
    let k = horizon / steps as f64;
    let a2 = 0.5 * strength * strength;
    let mut values = Vec::with_capacity(steps + 1);
    values.push(0.0);
    // conv = sum_{m<n} w_m (t_n - t_m) F_m, mass = sum_{m<n} w_m F_m,
    // trapezoid weights w_0 = 1/2 and 1 otherwise; F_0 = 0 anyway
    let (mut conv, mut mass) = (0.0, 0.0);
    for n in 1..=steps {
        let last = values[n - 1];
        let w = if n == 1 { 0.5 } else { 1.0 };
        conv += k * (mass + w * last);
        mass += w * last;
        let t = if n == steps { horizon } else { n as f64 * k };
        let f = 0.25 * v0.window_norm_sq(t) + a2 * k * conv;
        if !f.is_finite() {
            return domain(format!("wave energy overflowed at t={t}"));
        }
        values.push(f);
    }
    Ok(WaveEnergy { dt: k, values })
}

/// `|E_t|^2` at each requested time.
pub fn solve_wave_energy_volterra(
    v0: &Velocity,
    sigma: &SigmaSpec,
    lambda: f64,
    times: &[f64],
) -> Result<Vec<f64>> {
    let c = moment_slope(sigma)?;
    if !(lambda.is_finite() && lambda >= 0.0) {
        return domain(format!("lambda must be finite and >= 0, got {lambda}"));
    }
    let strength = lambda * c;
    times
        .iter()
        .map(|&t| {
            if !(t.is_finite() && t >= 0.0) {
                return domain(format!("time must be >= 0, got {t}"));
            }
            if t == 0.0 {
                return Ok(0.0);
            }
            let path = wave_energy_path(v0, strength, t, default_wave_steps(strength, t))?;
            Ok(path.final_value())
        })
        .collect()
}
