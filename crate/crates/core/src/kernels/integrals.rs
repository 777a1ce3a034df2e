//! Time integrals of the diagonal `p_{2s}(x, x)`.

use std::f64::consts::PI;

use super::{Boundary, KernelAt, KernelParams};
use crate::error::{domain, Result};
use crate::quad::adaptive;

const TOL: f64 = 1e-13;
const SUP_POINTS: usize = 200;

/// `p_{2s}(y, y)`, which equals `int_0^L [p_s(y, z)]^2 dz`.
pub fn diagonal_double_time(p: &KernelParams, s: f64, y: f64) -> Result<f64> {
    p.check_position(y)?;
    let k = p.at(2.0 * s)?;
    Ok(k.eval(y, y))
}

/// `int_0^L p_{2s}(x, x) dx`.
pub fn trace_double_time(p: &KernelParams, s: f64) -> Result<f64> {
    Ok(p.at(2.0 * s)?.trace())
}

/// `int_0^tau int_0^L p_{2s}(x, x) dx ds`.
///
/// The integrand grows like `s^{-1/2}` at the origin; substituting `s = u^2`
/// leaves a bounded integrand.
pub fn phi_integral(p: &KernelParams, tau: f64) -> Result<f64> {
    if !(tau.is_finite() && tau >= 0.0) {
        return domain(format!("tau must be non-negative, got {tau}"));
    }
    if tau == 0.0 {
        return Ok(0.0);
    }
    let f = |u: f64| {
        if u == 0.0 {
            return p.length() / (8.0 * PI).sqrt() * 2.0;
        }
        2.0 * u * trace_at(p, u * u)
    };
    Ok(adaptive(&f, 0.0, tau.sqrt(), TOL * tau.sqrt().max(1.0)))
}

fn trace_at(p: &KernelParams, s: f64) -> f64 {
    KernelAt::new(p, 2.0 * s).trace()
}

fn diag_at(p: &KernelParams, s: f64, x: f64) -> f64 {
    KernelAt::new(p, 2.0 * s).eval(x, x)
}

/// `int_0^t e^{-beta s} p_{2s}(x, x) ds`.
fn laplace_diagonal(p: &KernelParams, beta: f64, t: f64, x: f64) -> f64 {
    let f = |u: f64| {
        if u == 0.0 {
            // 2u p_{2u^2}(x, x) tends to (2 pi)^{-1/2} in the interior
            // and twice that on a Neumann wall
            let base = 2.0 / (8.0 * PI).sqrt();
            let on_wall = x == 0.0 || x == p.length();
            return match (p.boundary(), on_wall) {
                (Boundary::Neumann, true) => 2.0 * base,
                (Boundary::Dirichlet, true) => 0.0,
                _ => base,
            };
        }
        2.0 * u * (-beta * u * u).exp() * diag_at(p, u * u, x)
    };
    let end = t.sqrt();
    // split where the weight has decayed so the adaptive rule sees the bulk
    let knee = (8.0 / beta).sqrt().min(end);
    let mut breaks = vec![0.0, knee];
    if knee < end {
        breaks.push(end);
    }
    crate::quad::adaptive_panels(&f, &breaks, TOL)
}

/// Outcome of comparing a resolvent integral to its bound.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ResolventCheck {
    pub boundary: Boundary,
    pub beta: f64,
    pub t: f64,
    /// Largest value of `int_0^t e^{-beta s} p_{2s}(x, x) ds` over a grid in `x`.
    pub lhs: f64,
    pub argmax: f64,
    pub bound: f64,
    /// False when `beta` is below the threshold where the Neumann bound is proved.
    pub asserted: bool,
    /// Neumann only: the computed threshold on `beta`.
    pub threshold: Option<f64>,
    /// Dirichlet only: `(1/L) sum_n 1 / (beta + mu_n)`.
    pub series_bound: Option<f64>,
}

impl ResolventCheck {
    pub fn margin(&self) -> f64 {
        self.bound - self.lhs
    }

    /// True unless the bound is asserted and violated.
    pub fn holds(&self) -> bool {
        !self.asserted || self.lhs <= self.bound
    }
}

/// Compares the resolvent integral of the squared kernel with its bound:
/// `1 / (2 sqrt(beta))` for Dirichlet, `(3 + epsilon) / sqrt(8 beta)` for
/// Neumann once `beta` exceeds [`neumann_threshold`].
pub fn resolvent_check(p: &KernelParams, beta: f64, t: f64, epsilon: f64) -> Result<ResolventCheck> {
    if !(beta.is_finite() && beta > 0.0) {
        return domain(format!("beta must be positive, got {beta}"));
    }
    if !(t.is_finite() && t > 0.0) {
        return domain(format!("t must be positive, got {t}"));
    }
    let l = p.length();
    let (mut lhs, mut argmax) = (f64::NEG_INFINITY, 0.0);
    for i in 0..=SUP_POINTS {
        let x = l * i as f64 / SUP_POINTS as f64;
        let v = laplace_diagonal(p, beta, t, x);
        if v > lhs {
            lhs = v;
            argmax = x;
        }
    }
    Ok(match p.boundary() {
        Boundary::Dirichlet => ResolventCheck {
            boundary: Boundary::Dirichlet,
            beta,
            t,
            lhs,
            argmax,
            bound: 0.5 / beta.sqrt(),
            asserted: true,
            threshold: None,
            series_bound: Some(dirichlet_resolvent_series(l, beta)),
        },
        Boundary::Neumann => {
            if !(epsilon.is_finite() && epsilon > 0.0) {
                return domain(format!("epsilon must be positive, got {epsilon}"));
            }
            let k = neumann_threshold(p, epsilon)?;
            ResolventCheck {
                boundary: Boundary::Neumann,
                beta,
                t,
                lhs,
                argmax,
                bound: (3.0 + epsilon) / (8.0 * beta).sqrt(),
                asserted: beta >= k,
                threshold: Some(k),
                series_bound: None,
            }
        }
    })
}

/// `(1/L) sum_{n>=1} 1 / (beta + (n pi / L)^2)` in closed form.
pub(crate) fn dirichlet_resolvent_series(l: f64, beta: f64) -> f64 {
    let a = beta.sqrt() * l / PI;
    let pa = PI * a;
    let inner = if pa < 1e-4 {
        // pi a coth(pi a) - 1 = (pi a)^2 / 3 - (pi a)^4 / 45 + ...
        PI * PI / 6.0 - pa.powi(2) * PI * PI / 90.0
    } else {
        (pa / pa.tanh() - 1.0) / (2.0 * a * a)
    };
    (l / PI).powi(2) * inner / l
}

/// Constant `C` with `p_{2s}(x, x) <= 3 Gamma_{2s}(0) + C` for all `s, x`,
/// found by scanning a grid (it can be no smaller than `1/L`, the large-time limit).
pub fn neumann_constant(p: &KernelParams) -> f64 {
    let l = p.length();
    let mut c = 1.0 / l;
    let (lo, hi) = ((1e-6 * l * l).ln(), (1e3 * l * l).ln());
    let steps = 240;
    for j in 0..=steps {
        let s = (lo + (hi - lo) * j as f64 / steps as f64).exp();
        let k = KernelAt::new(p, 2.0 * s);
        let free = 3.0 / (8.0 * PI * s).sqrt();
        for i in 0..=100 {
            let x = l * i as f64 / 100.0;
            c = c.max(k.eval(x, x) - free);
        }
    }
    c
}

/// Threshold `8 C^2 / epsilon^2` above which
/// `int_0^infty e^{-beta s} p_{2s}(x, x) ds <= (3 + epsilon) / sqrt(8 beta)`
/// follows from [`neumann_constant`].
pub fn neumann_threshold(p: &KernelParams, epsilon: f64) -> Result<f64> {
    if p.boundary() != Boundary::Neumann {
        return domain("the threshold applies to the Neumann kernel");
    }
    if !(epsilon.is_finite() && epsilon > 0.0) {
        return domain(format!("epsilon must be positive, got {epsilon}"));
    }
    let c = neumann_constant(p);
    Ok(8.0 * c * c / (epsilon * epsilon))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kernels::gamma_unchecked;
    use crate::quad::adaptive;

    fn neumann() -> KernelParams {
        KernelParams::new(1.0, Boundary::Neumann).unwrap()
    }

    fn dirichlet() -> KernelParams {
        KernelParams::new(1.0, Boundary::Dirichlet).unwrap()
    }

    /// `int_0^tau s^{-1/2} e^{-a/s} ds`.
    fn singular_exp_integral(a: f64, tau: f64) -> f64 {
        if a == 0.0 {
            return 2.0 * tau.sqrt();
        }
        2.0 * tau.sqrt() * (-a / tau).exp() - 2.0 * (PI * a).sqrt() * libm::erfc((a / tau).sqrt())
    }

    /// Image-sum closed form: trace is L sum Gamma_{2s}(2nL) + 1/2.
    fn phi_closed(l: f64, tau: f64) -> f64 {
        let mut acc = 0.5 * tau;
        for n in -30i64..=30 {
            let a = (n as f64 * l).powi(2) / 2.0;
            acc += l / (8.0 * PI).sqrt() * singular_exp_integral(a, tau);
        }
        acc
    }

    #[test]
    fn diagonal_matches_squared_kernel() {
        let p = neumann();
        let k = p.at(0.05).unwrap();
        let q = adaptive(&|z| k.eval(0.3, z).powi(2), 0.0, 1.0, 1e-15);
        let d = diagonal_double_time(&p, 0.05, 0.3).unwrap();
        assert!((q - d).abs() < 1e-8);
        assert!((diagonal_double_time(&p, 50.0, 0.4).unwrap() - 1.0).abs() < 1e-8);
        assert!(diagonal_double_time(&p, 0.0, 0.4).is_err());
        for &s in &[1e-4, 1e-2, 0.3, 2.0] {
            for i in 0..=20 {
                let y = i as f64 / 20.0;
                let v = diagonal_double_time(&p, s, y).unwrap();
                assert!(v >= gamma_unchecked(2.0 * s, 0.0));
            }
        }
    }

    #[test]
    fn trace_matches_quadrature() {
        for p in [neumann(), dirichlet()] {
            for &s in &[1e-3, 0.04, 0.7] {
                let k = p.at(2.0 * s).unwrap();
                let q = adaptive(&|x| k.eval(x, x), 0.0, 1.0, 1e-14);
                assert!((trace_double_time(&p, s).unwrap() - q).abs() < 1e-11);
            }
        }
    }

    #[test]
    fn phi_matches_closed_form() {
        for &l in &[1.0, 2.0] {
            let p = KernelParams::new(l, Boundary::Neumann).unwrap();
            assert_eq!(phi_integral(&p, 0.0).unwrap(), 0.0);
            for &tau in &[1e-3, 0.01, 0.1, 1.0, 5.0] {
                let got = phi_integral(&p, tau).unwrap();
                let want = phi_closed(l, tau);
                assert!((got - want).abs() < 1e-10 * want.max(1.0), "{l} {tau}");
                assert!(got >= l * (tau / (2.0 * PI)).sqrt());
            }
        }
        // free-space term plus the half from the reflected images
        let v = phi_integral(&neumann(), 0.01).unwrap();
        assert!((v - 0.0448942280).abs() < 1e-9, "{v}");
        assert!(phi_integral(&neumann(), -1.0).is_err());
    }

    #[test]
    fn series_closed_form() {
        for &(l, beta) in &[(1.0, 10.0), (1.0, 1e3), (2.0, 0.5), (0.5, 1e-9)] {
            let direct: f64 = (1..2_000_000)
                .map(|n| 1.0 / (beta + (n as f64 * PI / l).powi(2)))
                .sum::<f64>()
                / l;
            let tail = l / (PI * PI * 2_000_000.0);
            let got = dirichlet_resolvent_series(l, beta);
            assert!((got - direct - tail).abs() < 1e-10 * got, "{l} {beta}");
        }
    }

    #[test]
    fn dirichlet_resolvent_below_bounds() {
        let p = dirichlet();
        for &beta in &[10.0, 100.0, 1000.0] {
            let r = resolvent_check(&p, beta, 1.0, 1.0).unwrap();
            assert!(r.asserted && r.holds());
            assert!(r.lhs <= r.series_bound.unwrap());
        }
        let r = resolvent_check(&p, 100.0, 1.0, 1.0).unwrap();
        assert!(r.lhs <= 0.05);
    }

    #[test]
    fn neumann_threshold_gates_the_bound() {
        let p = neumann();
        let c = neumann_constant(&p);
        assert!(c >= 1.0);
        let k = neumann_threshold(&p, 1.0).unwrap();
        let low = resolvent_check(&p, 0.5 * k, 1.0, 1.0).unwrap();
        assert!(!low.asserted && low.holds());
        let high = resolvent_check(&p, 2.0 * k, 1.0, 1.0).unwrap();
        assert!(high.asserted && high.holds());
        assert!(neumann_threshold(&dirichlet(), 1.0).is_err());
    }
}
