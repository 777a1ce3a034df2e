use crate::error::{domain, Result};
use crate::quad::adaptive_panels;
use crate::solvers::Velocity;

use super::bounds::wave_a2;

/// `H(r) = min(r/2, r^2/4)`.
pub fn h_function(r: f64) -> Result<f64> {
    if !(r > 0.0) {
        return domain(format!("H needs r > 0, got {r}"));
    }
    Ok((0.5 * r).min(0.25 * r * r))
}

/// Autocorrelation `h(r) = int v_0(x) v_0(x + r) dx`.
pub fn autocorrelation(v0: &Velocity, r: f64) -> f64 {
    let mut breaks: Vec<f64> = v0
        .breakpoints()
        .iter()
        .flat_map(|&b| [b, b - r])
        .collect();
    breaks.sort_by(f64::total_cmp);
    breaks.dedup();
    adaptive_panels(&|x| v0.eval(x) * v0.eval(x + r), &breaks, 1e-15)
}

/// `int_{-t}^t int_{-t}^t h(y - z) dy dz = int (2t - |r|)_+ h(r) dr`.
pub fn window_integral(v0: &Velocity, t: f64) -> f64 {
    let b = v0.breakpoints();
    let mut breaks = vec![0.0, 2.0 * t];
    for &p in &b {
        for &q in &b {
            let d = p - q;
            if d > 0.0 && d < 2.0 * t {
                breaks.push(d);
            }
        }
    }
    breaks.sort_by(f64::total_cmp);
    breaks.dedup();
    2.0 * adaptive_panels(&|r| (2.0 * t - r) * autocorrelation(v0, r), &breaks, 1e-13)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConvolutionBoundResult {
    pub t: f64,
    pub integral: f64,
    pub h: f64,
    /// `integral / H(t)`.
    pub a1_empirical: f64,
    pub a2: f64,
    /// `integral <= A_2 H(t)`.
    pub upper_holds: bool,
}

pub fn convolution_bound(v0: &Velocity, t: f64) -> Result<ConvolutionBoundResult> {
    let h = h_function(t)?;
    let l2 = v0.l2_norm_sq();
    if !(l2 > 0.0) {
        return domain("initial velocity must have positive L2 norm");
    }
    let integral = window_integral(v0, t);
    let a2 = wave_a2(v0.l1_norm(), l2);
    Ok(ConvolutionBoundResult {
        t,
        integral,
        h,
        a1_empirical: integral / h,
        a2,
        upper_holds: integral <= a2 * h * (1.0 + 1e-12),
    })
}

/// Smallest `integral / H(t)` over 81 log-spaced times in `[1e-2, 1e2]`.
pub fn empirical_a1(v0: &Velocity) -> Result<f64> {
    let mut best = f64::INFINITY;
    for k in 0..=80 {
        let t = 10f64.powf(-2.0 + 4.0 * k as f64 / 80.0);
        best = best.min(convolution_bound(v0, t)?.a1_empirical);
    }
    Ok(best)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn h_values() {
        assert_eq!(h_function(1.0).unwrap(), 0.25);
        assert_eq!(h_function(2.0).unwrap(), 1.0);
        assert_eq!(h_function(4.0).unwrap(), 2.0);
        assert!(h_function(0.0).is_err());
    }

    #[test]
    fn integral_equals_window_norm() {
        for v in [
            Velocity::indicator(1.0).unwrap(),
            Velocity::bump(0.6).unwrap(),
            Velocity::table(vec![(-0.5, 1.0), (0.2, 2.0), (1.0, 0.0)]).unwrap(),
        ] {
            for t in [0.05, 0.7, 3.0] {
                let a = window_integral(&v, t);
                let b = v.window_norm_sq(t);
                assert!((a - b).abs() < 1e-10 * b, "{} {t}: {a} {b}", v.name());
            }
        }
    }

    #[test]
    fn indicator_asymptotics() {
        let v = Velocity::indicator(1.0).unwrap();
        assert!((autocorrelation(&v, 0.0) - 2.0).abs() < 1e-14);
        assert!((autocorrelation(&v, 0.5) - 1.5).abs() < 1e-14);
        // small t: 4 t^2 h(0) = 8 t^2
        let t = 1e-3;
        assert!((window_integral(&v, t) / (8.0 * t * t) - 1.0).abs() < 1e-3);
        // large t: 2 t ||h||_1 = 2 t ||v0||_1^2 = 8 t
        let t = 1e3;
        assert!((window_integral(&v, t) / (8.0 * t) - 1.0).abs() < 1e-3);
        for t in [0.1, 1.0, 10.0] {
            let r = convolution_bound(&v, t).unwrap();
            assert!(r.upper_holds);
            assert_eq!(r.a2, 32.0);
        }
    }

    #[test]
    fn a1_is_positive_and_below_a2() {
        let v = Velocity::indicator(1.0).unwrap();
        let a1 = empirical_a1(&v).unwrap();
        assert!(a1 > 0.0 && a1 <= 32.0);
        // both ends of the log grid: 8t^2 / (t^2/4) and 8t / (t/2)
        assert!(a1 <= 16.0 + 1e-6);
        for t in [0.01, 0.1, 1.0, 10.0, 100.0] {
            assert!(convolution_bound(&v, t).unwrap().a1_empirical >= a1);
        }
    }
}
