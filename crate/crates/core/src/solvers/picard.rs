use crate::error::{config, domain, Result};
use crate::kernels::{semigroup_apply, Boundary};
use crate::noise::NoiseGrid;
use crate::space::SpaceGrid;

use super::heat::noise_column;
use super::{snapshot_steps, Field, HeatProblem};

/// Space-time values of one iterate, indexed `[step][point]`.
pub type Path = Vec<Vec<f64>>;

const MAX_KERNEL_ENTRIES: usize = 50_000_000;

/// Discretized mild-form map
/// `u -> P_t u_0 + lambda int p_{t-s}(x, y) sigma(u_s(y)) xi(ds dy)`
/// on the heat problem's grid, for one fixed noise realization.
///
/// The stochastic integral uses left-point time sampling and the kernel
/// averaged over each point's control volume, with the same point-to-noise
/// assignment as [`super::solve_heat_em`].
pub struct PicardScheme<'a> {
    problem: &'a HeatProblem,
    lambda: f64,
    noise: &'a NoiseGrid,
    grid: SpaceGrid,
    free: Path,
    /// `lags[d - 1][i * m + j]`: averaged kernel at time lag `d dt`.
    lags: Vec<Vec<f64>>,
}

impl<'a> PicardScheme<'a> {
    pub fn new(problem: &'a HeatProblem, lambda: f64, noise: &'a NoiseGrid) -> Result<Self> {
        if !(lambda.is_finite() && lambda >= 0.0) {
            return domain(format!("lambda must be finite and >= 0, got {lambda}"));
        }
        let spec = problem.spec;
        if *noise.spec() != spec {
            return config("noise grid does not match the problem grid");
        }
        let grid = problem.space_grid();
        let m = grid.len();
        let nt = spec.nt();
        if nt.saturating_mul(m * m) > MAX_KERNEL_ENTRIES {
            return config(format!(
                "grid too large for Picard iteration ({nt} steps x {m}^2 kernel entries)"
            ));
        }
        let params = problem.kernel();
        let u0 = problem.u0.sample(&grid);
        let mut free = Vec::with_capacity(nt + 1);
        for n in 0..=nt {
            let t = problem.diffusion * spec.time(n);
            let mut row = semigroup_apply(&params, t, &grid, &u0)?;
            if problem.boundary == Boundary::Dirichlet {
                row[0] = 0.0;
                row[m - 1] = 0.0;
            }
            free.push(row);
        }
        let points = grid.points();
        let volumes: Vec<(f64, f64)> = (0..m).map(|j| grid.control_volume(j)).collect();
        let mut lags = Vec::with_capacity(nt);
        for d in 1..=nt {
            let k = params.at(problem.diffusion * d as f64 * spec.dt())?;
            let mut mat = vec![0.0; m * m];
            for (i, &x) in points.iter().enumerate() {
                for (j, &(a, b)) in volumes.iter().enumerate() {
                    if noise_column(problem.boundary, spec.nx(), j).is_some() {
                        mat[i * m + j] = k.box_integral(x, a, b) / (b - a);
                    }
                }
            }
            lags.push(mat);
        }
        Ok(Self {
            problem,
            lambda,
            noise,
            grid,
            free,
            lags,
        })
    }

    pub fn grid(&self) -> &SpaceGrid {
        &self.grid
    }

    /// The starting iterate: `u_0` at every time.
    pub fn initial(&self) -> Path {
        let mut u0 = self.problem.u0.sample(&self.grid);
        if self.problem.boundary == Boundary::Dirichlet {
            let m = u0.len();
            u0[0] = 0.0;
            u0[m - 1] = 0.0;
        }
        vec![u0; self.free.len()]
    }

    /// Applies the mild-form map once.
    pub fn step(&self, prev: &Path) -> Path {
        let spec = self.problem.spec;
        let m = self.grid.len();
        let nt = spec.nt();
        // forcing[m][j] = sigma(u(t_m, x_j)) * noise mass feeding x_j
        let forcing: Vec<Vec<f64>> = (0..nt)
            .map(|s| {
                let row = self.noise.row(s);
                (0..m)
                    .map(|j| match noise_column(self.problem.boundary, spec.nx(), j) {
                        Some(c) => self.problem.sigma.eval(prev[s][j]) * row[c],
                        None => 0.0,
                    })
                    .collect()
            })
            .collect();
        let mut next = self.free.clone();
        if self.lambda == 0.0 {
            return next;
        }
        for n in 1..=nt {
            let out = &mut next[n];
            for (s, f) in forcing.iter().enumerate().take(n) {
                let mat = &self.lags[n - s - 1];
                for (i, o) in out.iter_mut().enumerate() {
                    let row = &mat[i * m..(i + 1) * m];
                    *o += self.lambda * row.iter().zip(f).map(|(k, v)| k * v).sum::<f64>();
                }
            }
        }
        next
    }

    /// `max_n || a_n - b_n ||_{L2}`.
    pub fn distance(&self, a: &Path, b: &Path) -> f64 {
        a.iter()
            .zip(b)
            .map(|(x, y)| {
                let d: Vec<f64> = x.iter().zip(y).map(|(p, q)| (p - q).powi(2)).collect();
                self.grid.integrate(&d).sqrt()
            })
            .fold(0.0, f64::max)
    }
}

#[derive(Debug, Clone)]
pub struct PicardResult {
    /// Final iterate at the requested times.
    pub fields: Vec<Field>,
    /// `max_t || u^{(k+1)}_t - u^{(k)}_t ||_{L2}` for each iteration.
    pub differences: Vec<f64>,
    /// Set when the last three differences fail to decrease.
    pub warning: bool,
}

/// Runs `iterations` Picard steps from `u^{(0)} = u_0`.
pub fn solve_heat_picard(
    problem: &HeatProblem,
    lambda: f64,
    noise: &NoiseGrid,
    iterations: usize,
    times: &[f64],
) -> Result<PicardResult> {
    if iterations == 0 {
        return config("Picard iteration needs at least one step");
    }
    let steps = snapshot_steps(&problem.spec, times)?;
    let scheme = PicardScheme::new(problem, lambda, noise)?;
    let mut u = scheme.initial();
    let mut differences = Vec::with_capacity(iterations);
    for _ in 0..iterations {
        let next = scheme.step(&u);
        differences.push(scheme.distance(&next, &u));
        u = next;
    }
    if u.iter().flatten().any(|v| !v.is_finite()) {
        return domain("Picard iterate is not finite");
    }
    let warning = differences.len() >= 3 && {
        let tail = &differences[differences.len() - 3..];
        tail[2] > 0.0 && tail[1] >= tail[0] && tail[2] >= tail[1]
    };
    let fields = steps
        .iter()
        .map(|&n| Field {
            t: problem.spec.time(n),
            grid: scheme.grid().clone(),
            values: u[n].clone(),
        })
        .collect();
    Ok(PicardResult {
        fields,
        differences,
        warning,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::noise::{sample_noise, GridSpec};
    use crate::solvers::{solve_heat_em, InitialData, SigmaSpec};

    fn problem(boundary: Boundary, nx: usize, horizon: f64) -> HeatProblem {
        let d = 0.5;
        let nt = HeatProblem::steps_for_ratio(1.0, horizon, nx, d, 0.25);
        let u0 = match boundary {
            Boundary::Dirichlet => InitialData::Sine,
            Boundary::Neumann => InitialData::constant(1.0).unwrap(),
        };
        HeatProblem::new(
            GridSpec::new(1.0, horizon, nx, nt).unwrap(),
            boundary,
            SigmaSpec::linear(1.0).unwrap(),
            u0,
            d,
        )
        .unwrap()
    }

    #[test]
    fn quiet_iterate_is_the_semigroup() {
        for b in [Boundary::Dirichlet, Boundary::Neumann] {
            let p = problem(b, 16, 0.1);
            let noise = sample_noise(p.spec, 4, 0);
            let r = solve_heat_picard(&p, 0.0, &noise, 1, &[0.1]).unwrap();
            let grid = p.space_grid();
            let mut want =
                semigroup_apply(&p.kernel(), 0.5 * 0.1, &grid, &p.u0.sample(&grid)).unwrap();
            if b == Boundary::Dirichlet {
                let m = want.len();
                want[0] = 0.0;
                want[m - 1] = 0.0;
            }
            assert_eq!(r.fields[0].values, want);
            assert!(!r.warning);
        }
    }

    #[test]
    fn zeroth_iterate_is_constant_in_time() {
        let p = problem(Boundary::Dirichlet, 10, 0.05);
        let noise = sample_noise(p.spec, 1, 0);
        let s = PicardScheme::new(&p, 1.0, &noise).unwrap();
        let u = s.initial();
        assert!(u.windows(2).all(|w| w[0] == w[1]));
        let x = s.grid().point(3);
        assert!((u[0][3] - (std::f64::consts::PI * x).sin()).abs() < 1e-15);
    }

    #[test]
    fn differences_contract() {
        let p = problem(Boundary::Neumann, 12, 0.1);
        let noise = sample_noise(p.spec, 7, 0);
        let r = solve_heat_picard(&p, 0.5, &noise, 6, &[0.1]).unwrap();
        for w in r.differences[1..].windows(2) {
            assert!(w[1] < 0.5 * w[0], "{:?}", r.differences);
        }
        assert!(!r.warning);
    }

    #[test]
    fn agrees_with_euler_on_shared_noise() {
        let p = problem(Boundary::Dirichlet, 20, 0.1);
        let noise = sample_noise(p.spec, 11, 0);
        let pic = solve_heat_picard(&p, 1.0, &noise, 12, &[0.1]).unwrap();
        let em = solve_heat_em(&p, 1.0, &noise, &[0.1]).unwrap();
        let d: Vec<f64> = pic.fields[0]
            .values
            .iter()
            .zip(&em[0].values)
            .map(|(a, b)| (a - b).powi(2))
            .collect();
        let dist = p.space_grid().integrate(&d).sqrt();
        let (dx, dt) = (p.spec.dx(), p.spec.dt());
        assert!(dist <= 10.0 * (dx + dt.sqrt()), "{dist}");
    }

    #[test]
    fn rejects_zero_iterations() {
        let p = problem(Boundary::Neumann, 8, 0.05);
        let noise = sample_noise(p.spec, 1, 0);
        assert!(solve_heat_picard(&p, 1.0, &noise, 0, &[0.05]).is_err());
    }
}
