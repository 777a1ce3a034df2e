use std::f64::consts::PI;

use crate::error::{config, Result};
use crate::space::SpaceGrid;

/// Initial profile `u_0` on `[0, L]`.
#[derive(Debug, Clone, PartialEq)]
pub enum InitialData {
    /// `sin(pi x / L)`.
    Sine,
    Constant(f64),
    /// Piecewise linear through `(x, value)` pairs, constant beyond the ends.
    Table(Vec<(f64, f64)>),
}

impl InitialData {
    pub fn constant(value: f64) -> Result<Self> {
        if !(value.is_finite() && value >= 0.0) {
            return config(format!("initial value must be finite and >= 0, got {value}"));
        }
        Ok(InitialData::Constant(value))
    }

    pub fn table(points: Vec<(f64, f64)>) -> Result<Self> {
        if points.is_empty() {
            return config("initial table is empty");
        }
        if points
            .iter()
            .any(|(x, v)| !x.is_finite() || !v.is_finite() || *v < 0.0)
        {
            return config("initial table values must be finite and >= 0");
        }
        if points.windows(2).any(|w| w[1].0 <= w[0].0) {
            return config("initial table positions must be strictly increasing");
        }
        Ok(InitialData::Table(points))
    }

    pub fn eval(&self, x: f64, length: f64) -> f64 {
        match self {
            InitialData::Sine => (PI * x / length).sin().max(0.0),
            InitialData::Constant(c) => *c,
            InitialData::Table(p) => interpolate(p, x),
        }
    }

    pub fn sample(&self, grid: &SpaceGrid) -> Vec<f64> {
        grid.sample(|x| self.eval(x, grid.length()))
    }

    /// `inf_x u_0(x)` over `[0, L]`.
    pub fn inf_value(&self, length: f64) -> f64 {
        match self {
            InitialData::Sine => 0.0,
            InitialData::Constant(c) => *c,
            InitialData::Table(p) => self.extremes(p, length).0,
        }
    }

    /// `sup_x u_0(x)` over `[0, L]`.
    pub fn sup_value(&self, length: f64) -> f64 {
        match self {
            InitialData::Sine => 1.0,
            InitialData::Constant(c) => *c,
            InitialData::Table(p) => self.extremes(p, length).1,
        }
    }

    fn extremes(&self, p: &[(f64, f64)], length: f64) -> (f64, f64) {
        // a piecewise linear function attains its extremes at knots or ends
        p.iter()
            .filter(|(x, _)| (0.0..=length).contains(x))
            .map(|&(_, v)| v)
            .chain([interpolate(p, 0.0), interpolate(p, length)])
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| {
                (lo.min(v), hi.max(v))
            })
    }

    /// `int_0^L u_0(x)^2 dx`.
    pub fn l2_norm_sq(&self, length: f64) -> f64 {
        match self {
            InitialData::Sine => 0.5 * length,
            InitialData::Constant(c) => c * c * length,
            InitialData::Table(p) => {
                let mut breaks = vec![0.0];
                breaks.extend(p.iter().map(|&(x, _)| x).filter(|&x| x > 0.0 && x < length));
                breaks.push(length);
                breaks
                    .windows(2)
                    .map(|w| {
                        crate::quad::gl10().integrate(w[0], w[1], |x| self.eval(x, length).powi(2))
                    })
                    .sum()
            }
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            InitialData::Sine => "sine",
            InitialData::Constant(_) => "constant",
            InitialData::Table(_) => "table",
        }
    }
}

pub(crate) fn interpolate(p: &[(f64, f64)], x: f64) -> f64 {
    let first = p[0];
    let last = p[p.len() - 1];
    if x <= first.0 {
        return first.1;
    }
    if x >= last.0 {
        return last.1;
    }
    let k = p.partition_point(|&(xk, _)| xk <= x);
    let (xa, va) = p[k - 1];
    let (xb, vb) = p[k];
    va + (vb - va) * (x - xa) / (xb - xa)
}
