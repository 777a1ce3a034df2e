use std::f64::consts::{E, PI};

use crate::error::{domain, Result};

/// A truncated series together with its full sum.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RenewalSum {
    pub partial: f64,
    pub closed: f64,
}

/// `eps^2 L sum_{j=1}^J x^j / j!` with `x = (lambda ell)^4 t / (4 pi e)`;
/// the full sum is `eps^2 L (e^x - 1)`.
pub fn renewal_series_heat(
    t: f64,
    lambda: f64,
    ell: f64,
    eps: f64,
    length: f64,
    terms: usize,
) -> Result<RenewalSum> {
    if terms == 0 {
        return domain("need at least one term");
    }
    let x = (lambda * ell).powi(4) * t / (4.0 * PI * E);
    let scale = eps * eps * length;
    Ok(RenewalSum {
        partial: scale * exp_tail(x, 1, terms),
        closed: scale * x.exp_m1(),
    })
}

/// `sum_{j=from}^{to} x^j / j!`.
fn exp_tail(x: f64, from: usize, to: usize) -> f64 {
    let mut term = 1.0;
    let mut acc = 0.0;
    for j in 1..=to {
        term *= x / j as f64;
        if j >= from {
            acc += term;
        }
    }
    acc
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WaveRenewal {
    pub partial: f64,
    pub closed: f64,
    /// False when `lambda < 2 sqrt(8) / (t ell)`, below which the series is
    /// not a proved lower bound.
    pub asserted: bool,
    pub threshold: f64,
}

/// `A_1 ||v_0||_2^2 H(t) / 2 * sum_{j=2}^J x^j / j!` with
/// `x = lambda ell t / (2 sqrt 8)`; the full sum is `e^x - 1 - x`.
pub fn renewal_series_wave(
    t: f64,
    lambda: f64,
    ell: f64,
    a1: f64,
    v0_norm2: f64,
    terms: usize,
) -> Result<WaveRenewal> {
    let h = super::h_function(t)?;
    if terms < 2 {
        return domain("the wave series starts at j = 2");
    }
    let x = lambda * ell * t / (2.0 * 8f64.sqrt());
    let scale = 0.5 * a1 * v0_norm2 * h;
    let threshold = 2.0 * 8f64.sqrt() / (t * ell);
    Ok(WaveRenewal {
        partial: scale * exp_tail(x, 2, terms),
        closed: scale * (x.exp_m1() - x),
        asserted: lambda >= threshold,
        threshold,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quad::adaptive;

    #[test]
    fn heat_series_converges_to_closed_form() {
        assert_eq!(renewal_series_heat(1.0, 0.0, 1.0, 1.0, 1.0, 10).unwrap().closed, 0.0);
        assert_eq!(renewal_series_heat(1.0, 0.0, 1.0, 1.0, 1.0, 10).unwrap().partial, 0.0);
        for lambda in [0.5, 2.0, 3.0, 4.0] {
            let r = renewal_series_heat(0.5, lambda, 1.0, 1.0, 1.0, 50).unwrap();
            let x = lambda.powi(4) * 0.5 / (4.0 * PI * E);
            if x <= 20.0 {
                assert!(((r.partial - r.closed) / r.closed).abs() <= 1e-12, "{lambda}");
            }
        }
    }

    #[test]
    fn wave_series_closed_form() {
        let r = renewal_series_wave(1.0, 20.0, 1.0, 10.0, 2.0, 80).unwrap();
        assert!(r.asserted);
        assert!(((r.partial - r.closed) / r.closed).abs() < 1e-12);
        let low = renewal_series_wave(1.0, 1.0, 1.0, 10.0, 2.0, 10).unwrap();
        assert!(!low.asserted);
    }

    fn nested(t: f64, shrink: f64) -> f64 {
        let inner = |s2: f64| s2 * adaptive(&|s3| s3, 0.0, s2 * shrink, 1e-14);
        let middle = |s1: f64| s1 * adaptive(&inner, 0.0, s1 * shrink, 1e-14);
        adaptive(&middle, 0.0, t * shrink, 1e-14)
    }

    #[test]
    fn simplex_double_factorial() {
        let t: f64 = 1.3;
        // 4^{-3} int_0^t int_0^{s1} int_0^{s2} s1 s2 s3 = t^6 / (4^3 * 6!!)
        let v = nested(t, 1.0) / 64.0;
        let want = t.powi(6) / (64.0 * 48.0);
        assert!((v - want).abs() < 1e-12 * want);
    }

    #[test]
    fn halved_limits_shrink_faster() {
        // with every upper limit halved the 3-fold integral is t^6 / 196608,
        // well below t^6 / (4^3 * 48)
        let t: f64 = 1.3;
        let v = nested(t, 0.5);
        let want = t.powi(6) / 196608.0;
        assert!((v - want).abs() < 1e-12 * want);
        assert!(v < t.powi(6) / (64.0 * 48.0));
    }
}
