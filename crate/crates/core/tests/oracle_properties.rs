use spdelab::analysis::{
    estimate_energy_mc, fit_points, McSettings, Model, SandwichModel, SandwichSettings, SolverRun,
    Verdict, EnergyCurve,
};
use spdelab::kernels::Boundary;
use spdelab::noise::GridSpec;
use spdelab::solvers::{
    solve_heat_moment_volterra, solve_wave_energy_volterra, HeatProblem, InitialData,
    MomentProblem, SigmaSpec, Velocity, VolterraKernel,
};

fn linear() -> SigmaSpec {
    SigmaSpec::linear(1.0).unwrap()
}

fn neumann(horizon: f64) -> MomentProblem {
    MomentProblem::new(1.0, Boundary::Neumann, 1.0, InitialData::constant(1.0).unwrap(), horizon)
        .unwrap()
}

fn heat_energies(horizon: f64, times: &[f64], lambdas: &[f64]) -> Vec<Vec<f64>> {
    let k = VolterraKernel::new(&neumann(horizon)).unwrap();
    lambdas
        .iter()
        .map(|&l| {
            let s = k.solve(l).unwrap();
            times.iter().map(|&t| s.energy_sq(t).unwrap().sqrt()).collect()
        })
        .collect()
}

fn wave_energy(lambda: f64, t: f64) -> f64 {
    let v = Velocity::indicator(1.0).unwrap();
    solve_wave_energy_volterra(&v, &linear(), lambda, &[t]).unwrap()[0].sqrt()
}

#[test]
fn wave_growth_rate_between_theorem_constants() {
    let (lambda, t) = (100.0, 1.0);
    let rate = wave_energy(lambda, t).ln() / lambda;
    let lo = t / (4.0 * 8f64.sqrt()) * 0.9;
    let hi = t / 8f64.sqrt() * 1.1;
    assert!(rate >= lo && rate <= hi, "{rate} not in [{lo}, {hi}]");
}

#[test]
fn heat_index_exceeds_wave_index_by_two() {
    let hl = [2.0, 3.0, 4.0, 5.0];
    let he = heat_energies(0.5, &[0.5], &hl);
    let heat: Vec<(f64, f64)> = hl.iter().zip(&he).map(|(&l, e)| (l, e[0])).collect();
    let wl = [20.0, 40.0, 80.0, 160.0];
    let wave: Vec<(f64, f64)> = wl.iter().map(|&l| (l, wave_energy(l, 1.0))).collect();
    let (h, w) = (fit_points(&heat).unwrap(), fit_points(&wave).unwrap());
    assert!(h.slope - w.slope >= 2.0, "heat {} wave {}", h.slope, w.slope);
}

#[test]
fn wave_energy_nondecreasing_in_lambda() {
    let mut last = 0.0;
    for l in [0.0, 0.5, 1.0, 2.0, 5.0, 10.0, 20.0] {
        let e = wave_energy(l, 0.7);
        assert!(e >= last, "lambda {l}");
        last = e;
    }
}

#[test]
fn neumann_sandwich_on_experiment_grid() {
    let times = [0.25, 0.5];
    let lambdas = [2.0, 3.0, 4.0, 5.0];
    let model = SandwichModel::new(
        Model::Heat {
            boundary: Boundary::Neumann,
            length: 1.0,
            diffusion: 1.0,
            u0: InitialData::constant(1.0).unwrap(),
            sigma: linear(),
        },
        SandwichSettings::default(),
    )
    .unwrap();
    let energies = heat_energies(0.5, &times, &lambdas);
    let mut curve = EnergyCurve::new();
    for (&l, row) in lambdas.iter().zip(&energies) {
        for (&t, &e) in times.iter().zip(row) {
            curve.push_oracle(t, l, e);
            // log E <= 9 lambda^4 t / 16 + log of the prefactor sqrt(L sup u0^2 / delta)
            assert!(e.ln() <= 9.0 * l.powi(4) * t / 16.0 + 0.5 * 2f64.ln(), "t={t} lambda={l}");
        }
    }
    for p in curve.entries() {
        let b = model.bounds(p.t, p.lambda).unwrap();
        assert_eq!(b.judge(p), (Verdict::Pass, Verdict::Pass), "{p:?} {b:?}");
    }
}

#[test]
fn dirichlet_monte_carlo_matches_oracle() {
    let t = 0.2;
    let nt = HeatProblem::steps_for_ratio(1.0, t, 32, 1.0, 0.25);
    let run = SolverRun::HeatEm(
        HeatProblem::new(
            GridSpec::new(1.0, t, 32, nt).unwrap(),
            Boundary::Dirichlet,
            linear(),
            InitialData::Sine,
            1.0,
        )
        .unwrap(),
    );
    let settings = McSettings {
        replicates: 4000,
        seed: 99,
        workers: 0,
    };
    let mc = estimate_energy_mc(&run, &[t], 2.0, settings).unwrap().entries()[0];
    let problem =
        MomentProblem::new(1.0, Boundary::Dirichlet, 1.0, InitialData::Sine, t).unwrap();
    let oracle = solve_heat_moment_volterra(&problem, &linear(), 2.0)
        .unwrap()
        .energy_sq(t)
        .unwrap()
        .sqrt();
    let z = (mc.energy - oracle) / mc.stderr;
    assert!(z.abs() <= 3.0, "mc {} oracle {oracle} z {z}", mc.energy);
}
