use std::f64::consts::PI;

use crate::error::{config, domain, Result};
use crate::noise::{GridSpec, NoiseGrid};
use crate::quad::adaptive_panels;
use crate::space::{Layout, SpaceGrid};

use super::{snapshot_steps, Field, SigmaSpec};

/// Non-negative initial velocity `v_0` with compact support.
#[derive(Debug, Clone, PartialEq)]
pub enum Velocity {
    /// Indicator of `[-a, a]`.
    Indicator { half_width: f64 },
    /// `cos^2(pi x / 2a)` on `[-a, a]`.
    Bump { half_width: f64 },
    /// Piecewise linear through `(x, value)` pairs, zero outside the table.
    Table(Vec<(f64, f64)>),
}

impl Velocity {
    pub fn indicator(half_width: f64) -> Result<Self> {
        check_half_width(half_width)?;
        Ok(Velocity::Indicator { half_width })
    }

    pub fn bump(half_width: f64) -> Result<Self> {
        check_half_width(half_width)?;
        Ok(Velocity::Bump { half_width })
    }

    pub fn table(points: Vec<(f64, f64)>) -> Result<Self> {
        if points.len() < 2 {
            return config("velocity table needs at least two points");
        }
        if points
            .iter()
            .any(|(x, v)| !x.is_finite() || !v.is_finite() || *v < 0.0)
        {
            return config("velocity table values must be finite and >= 0");
        }
        if points.windows(2).any(|w| w[1].0 <= w[0].0) {
            return config("velocity table positions must be strictly increasing");
        }
        let v = Velocity::Table(points);
        if v.l2_norm_sq() <= 0.0 {
            return domain("initial velocity must have positive L2 norm");
        }
        Ok(v)
    }

    pub fn eval(&self, x: f64) -> f64 {
        match self {
            Velocity::Indicator { half_width: a } => {
                if x.abs() <= *a {
                    1.0
                } else {
                    0.0
                }
            }
            Velocity::Bump { half_width: a } => {
                if x.abs() <= *a {
                    (PI * x / (2.0 * a)).cos().powi(2)
                } else {
                    0.0
                }
            }
            Velocity::Table(p) => {
                if x < p[0].0 || x > p[p.len() - 1].0 {
                    0.0
                } else {
                    super::initial::interpolate(p, x)
                }
            }
        }
    }

    /// `int_{-infinity}^x v_0(y) dy`.
    pub fn primitive(&self, x: f64) -> f64 {
        match self {
            Velocity::Indicator { half_width: a } => x.clamp(-a, *a) + a,
            Velocity::Bump { half_width: a } => {
                let y = x.clamp(-a, *a);
                0.5 * (y + a) + a / (2.0 * PI) * (PI * y / a).sin()
            }
            Velocity::Table(p) => {
                let mut acc = 0.0;
                for w in p.windows(2) {
                    let ((xa, va), (xb, vb)) = (w[0], w[1]);
                    if x <= xa {
                        break;
                    }
                    let end = x.min(xb);
                    let vend = va + (vb - va) * (end - xa) / (xb - xa);
                    acc += 0.5 * (va + vend) * (end - xa);
                }
                acc
            }
        }
    }

    /// Points where `v_0` or its derivative jumps.
    pub fn breakpoints(&self) -> Vec<f64> {
        match self {
            Velocity::Indicator { half_width: a } | Velocity::Bump { half_width: a } => {
                vec![-a, *a]
            }
            Velocity::Table(p) => p.iter().map(|&(x, _)| x).collect(),
        }
    }

    /// Radius of the smallest centred interval containing the support.
    pub fn support_radius(&self) -> f64 {
        match self {
            Velocity::Indicator { half_width: a } | Velocity::Bump { half_width: a } => *a,
            Velocity::Table(p) => p[0].0.abs().max(p[p.len() - 1].0.abs()),
        }
    }

    pub fn l1_norm(&self) -> f64 {
        match self {
            Velocity::Indicator { half_width: a } => 2.0 * a,
            Velocity::Bump { half_width: a } => *a,
            Velocity::Table(_) => self.primitive(f64::INFINITY),
        }
    }

    pub fn l2_norm_sq(&self) -> f64 {
        match self {
            Velocity::Indicator { half_width: a } => 2.0 * a,
            Velocity::Bump { half_width: a } => 0.75 * a,
            Velocity::Table(p) => p
                .windows(2)
                .map(|w| {
                    let ((xa, va), (xb, vb)) = (w[0], w[1]);
                    (va * va + va * vb + vb * vb) / 3.0 * (xb - xa)
                })
                .sum(),
        }
    }

    /// `W_t(x) = int_{x-t}^{x+t} v_0(y) dy`.
    pub fn window(&self, t: f64, x: f64) -> f64 {
        self.primitive(x + t) - self.primitive(x - t)
    }

    /// `int W_t(x)^2 dx`.
    pub fn window_norm_sq(&self, t: f64) -> f64 {
        if t <= 0.0 {
            return 0.0;
        }
        let mut breaks: Vec<f64> = self
            .breakpoints()
            .iter()
            .flat_map(|&b| [b - t, b + t])
            .collect();
        breaks.sort_by(f64::total_cmp);
        breaks.dedup();
        adaptive_panels(&|x| self.window(t, x).powi(2), &breaks, 1e-15)
    }

    pub fn name(&self) -> &'static str {
        match self {
            Velocity::Indicator { .. } => "indicator",
            Velocity::Bump { .. } => "bump",
            Velocity::Table(_) => "table",
        }
    }
}

fn check_half_width(a: f64) -> Result<()> {
    if !(a.is_finite() && a > 0.0) {
        return config(format!("velocity half-width must be positive, got {a}"));
    }
    Ok(())
}

/// Wave equation `w_tt = w_xx + lambda sigma(w) xi` on the line with
/// `w_0 = 0` and initial velocity `v_0`, computed on `[-X, X]`.
#[derive(Debug, Clone)]
pub struct WaveProblem {
    pub spec: GridSpec,
    pub sigma: SigmaSpec,
    pub v0: Velocity,
}

impl WaveProblem {
    /// The domain must contain the support of `v_0` widened by the horizon,
    /// so that (with unit propagation speed) the walls are never reached.
    pub fn new(spec: GridSpec, sigma: SigmaSpec, v0: Velocity) -> Result<Self> {
        let half = 0.5 * spec.length();
        if (spec.origin() + half).abs() > 1e-12 * half {
            return config("wave problems are posed on a centred interval [-X, X]");
        }
        let need = v0.support_radius() + spec.horizon();
        if half < need * (1.0 - 1e-12) {
            return config(format!(
                "half-width {half} is below support radius + horizon = {need}"
            ));
        }
        Ok(Self { spec, sigma, v0 })
    }

    pub fn half_width(&self) -> f64 {
        0.5 * self.spec.length()
    }

    pub fn space_grid(&self) -> SpaceGrid {
        SpaceGrid::new(self.spec.origin(), self.spec.length(), self.spec.nx(), Layout::Nodes)
            .expect("grid spec already validated")
    }

    /// `dt / dx`; must not exceed one.
    pub fn courant(&self) -> f64 {
        self.spec.dt() / self.spec.dx()
    }

    pub fn check_cfl(&self) -> Result<()> {
        let c = self.courant();
        if c > 1.0 + 1e-12 {
            return config(format!(
                "leapfrog unstable: dt/dx = {c:.6} exceeds 1 (dt={}, dx={})",
                self.spec.dt(),
                self.spec.dx()
            ));
        }
        Ok(())
    }
}

/// Leapfrog scheme for the wave equation. The first step is taken from the
/// exact free solution `W_dt / 2`; afterwards
/// `w^{n+1} = 2 w^n - w^{n-1} + (dt/dx)^2 (centred second difference)
///  + dt lambda sigma(w^n) xi^n / dx`.
pub fn solve_wave_em(
    problem: &WaveProblem,
    lambda: f64,
    noise: &NoiseGrid,
    times: &[f64],
) -> Result<Vec<Field>> {
    let spec = problem.spec;
    let steps = snapshot_steps(&spec, times)?;
    let grid = problem.space_grid();
    let last = steps.iter().copied().max().unwrap_or(0);
    let mut out: Vec<Option<Field>> = vec![None; steps.len()];
    run_wave(problem, lambda, noise, last, |n, w| {
        for (slot, &s) in out.iter_mut().zip(&steps) {
            if s == n {
                *slot = Some(Field {
                    t: spec.time(n),
                    grid: grid.clone(),
                    values: w.to_vec(),
                });
            }
        }
    })?;
    Ok(out.into_iter().map(|f| f.expect("every step recorded")).collect())
}

/// Largest value taken by the leapfrog solution over the whole grid.
pub fn wave_em_path_max(problem: &WaveProblem, lambda: f64, noise: &NoiseGrid) -> Result<f64> {
    let mut top = f64::NEG_INFINITY;
    run_wave(problem, lambda, noise, problem.spec.nt(), |_, w| {
        top = w.iter().copied().fold(top, f64::max);
    })?;
    Ok(top)
}

fn run_wave<F: FnMut(usize, &[f64])>(
    problem: &WaveProblem,
    lambda: f64,
    noise: &NoiseGrid,
    last: usize,
    mut observe: F,
) -> Result<()> {
    if !(lambda.is_finite() && lambda >= 0.0) {
        return domain(format!("lambda must be finite and >= 0, got {lambda}"));
    }
    let spec = problem.spec;
    if *noise.spec() != spec {
        return config("noise grid does not match the problem grid");
    }
    problem.check_cfl()?;
    let grid = problem.space_grid();
    let (nx, dt, dx) = (spec.nx(), spec.dt(), spec.dx());
    let rho2 = (dt / dx).powi(2);
    let gain = dt * lambda / dx;

    let mut prev = vec![0.0; nx + 1];
    observe(0, &prev);
    if last == 0 {
        return Ok(());
    }
    // sigma(w_0) = sigma(0) = 0, so the first step carries no noise
    let mut cur: Vec<f64> = (0..=nx)
        .map(|i| {
            if i == 0 || i == nx {
                0.0
            } else {
                0.5 * problem.v0.window(dt, grid.point(i))
            }
        })
        .collect();
    observe(1, &cur);
    let mut next = vec![0.0; nx + 1];
    for n in 1..last {
        let row = noise.row(n);
        for i in 1..nx {
            let lap = cur[i - 1] - 2.0 * cur[i] + cur[i + 1];
            next[i] =
                2.0 * cur[i] - prev[i] + rho2 * lap + gain * problem.sigma.eval(cur[i]) * row[i];
        }
        std::mem::swap(&mut prev, &mut cur);
        std::mem::swap(&mut cur, &mut next);
        if cur.iter().any(|v| !v.is_finite()) {
            return domain(format!("solution blew up at step {}", n + 1));
        }
        observe(n + 1, &cur);
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::noise::sample_noise;
    use crate::quad::adaptive;

    #[test]
    fn profile_norms_and_primitives() {
        let profiles = [
            Velocity::indicator(1.0).unwrap(),
            Velocity::bump(0.7).unwrap(),
            Velocity::table(vec![(-1.0, 0.0), (0.0, 2.0), (0.5, 1.0), (1.5, 0.0)]).unwrap(),
        ];
        for v in &profiles {
            let mut breaks = v.breakpoints();
            breaks.insert(0, -5.0);
            breaks.push(5.0);
            let l1 = adaptive_panels(&|x| v.eval(x), &breaks, 1e-14);
            let l2 = adaptive_panels(&|x| v.eval(x).powi(2), &breaks, 1e-14);
            assert!((l1 - v.l1_norm()).abs() < 1e-12, "{}", v.name());
            assert!((l2 - v.l2_norm_sq()).abs() < 1e-12, "{}", v.name());
            for &x in &[-0.8, -0.1, 0.3, 1.2] {
                let p = adaptive(&|y| v.eval(y), -5.0, x, 1e-14);
                assert!((p - v.primitive(x)).abs() < 1e-6, "{} {x}", v.name());
            }
        }
        assert!(Velocity::table(vec![(0.0, 0.0), (1.0, 0.0)]).is_err());
        assert!(Velocity::indicator(0.0).is_err());
    }

    #[test]
    fn window_norm_of_indicator() {
        // |W_t|^2 = int (2t - |r|)_+ h(r) dr with h(r) = (2 - |r|)_+
        let v = Velocity::indicator(1.0).unwrap();
        for t in [0.2f64, 0.5, 1.0] {
            let s = 2.0 * t;
            let exact = 2.0 * (s * s - s.powi(3) / 6.0);
            assert!((v.window_norm_sq(t) - exact).abs() < 1e-12);
        }
    }

    fn indicator_problem(dx: f64, courant: f64, t: f64) -> WaveProblem {
        let x = 2.0;
        let nx = (2.0 * x / dx).round() as usize;
        let nt = (t / (courant * dx)).round() as usize;
        let spec = GridSpec::centered(x, t, nx, nt).unwrap();
        WaveProblem::new(spec, SigmaSpec::linear(1.0).unwrap(), Velocity::indicator(1.0).unwrap())
            .unwrap()
    }

    #[test]
    fn free_wave_matches_dalembert() {
        let p = indicator_problem(1e-2, 0.5, 0.5);
        let f = solve_wave_em(&p, 0.0, &NoiseGrid::quiet(p.spec), &[0.5]).unwrap();
        let err = f[0]
            .points()
            .iter()
            .zip(&f[0].values)
            .map(|(&x, w)| (w - 0.5 * p.v0.window(0.5, x)).abs())
            .fold(0.0, f64::max);
        assert!(err < 5e-3, "{err}");
    }

    #[test]
    fn finite_propagation_speed() {
        let p = indicator_problem(1e-2, 1.0, 0.5);
        let f = solve_wave_em(&p, 0.0, &NoiseGrid::quiet(p.spec), &[0.5]).unwrap();
        for (x, w) in f[0].points().iter().zip(&f[0].values) {
            if x.abs() > 1.5 + 1e-9 {
                assert_eq!(*w, 0.0, "x={x}");
            }
        }
    }

    #[test]
    fn zero_velocity_stays_zero() {
        let spec = GridSpec::centered(2.0, 0.5, 100, 50).unwrap();
        let p = WaveProblem::new(
            spec,
            SigmaSpec::linear(1.0).unwrap(),
            Velocity::Table(vec![(-1.0, 0.0), (1.0, 0.0)]),
        )
        .unwrap();
        let f = solve_wave_em(&p, 3.0, &sample_noise(spec, 9, 0), &[0.5]).unwrap();
        assert!(f[0].values.iter().all(|&w| w == 0.0));
    }

    #[test]
    fn refuses_bad_setups() {
        let spec = GridSpec::centered(2.0, 0.5, 100, 10).unwrap();
        let p = WaveProblem::new(spec, SigmaSpec::linear(1.0).unwrap(), Velocity::indicator(1.0).unwrap())
            .unwrap();
        assert!(solve_wave_em(&p, 0.0, &NoiseGrid::quiet(spec), &[0.5]).is_err());
        let narrow = GridSpec::centered(1.2, 0.5, 100, 100).unwrap();
        assert!(WaveProblem::new(narrow, SigmaSpec::linear(1.0).unwrap(), Velocity::indicator(1.0).unwrap()).is_err());
    }
}
