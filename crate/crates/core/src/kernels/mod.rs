//! Heat kernels of the Dirichlet and Neumann Laplacian on `[0, L]`.
//!
//! Every value is summed from whichever of the eigenfunction expansion or
//! the method of images has the smaller tail at the requested time, and
//! carries a bound on the discarded tail.

mod fixed;
mod integrals;

use std::f64::consts::PI;

use crate::error::{domain, Result};
use crate::space::{Layout, SpaceGrid};

pub use fixed::{KernelAt, Representation};
pub use integrals::{
    diagonal_double_time, neumann_constant, neumann_threshold, phi_integral, resolvent_check, trace_double_time,
    ResolventCheck,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Boundary {
    Dirichlet,
    Neumann,
}

impl Boundary {
    pub fn name(self) -> &'static str {
        match self {
            Boundary::Dirichlet => "dirichlet",
            Boundary::Neumann => "neumann",
        }
    }
}

pub const DEFAULT_MODES: usize = 50;
pub const DEFAULT_IMAGES: usize = 20;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KernelParams {
    length: f64,
    boundary: Boundary,
    modes: usize,
    images: usize,
}

impl KernelParams {
    pub fn new(length: f64, boundary: Boundary) -> Result<Self> {
        if !(length.is_finite() && length > 0.0) {
            return domain(format!("domain length must be positive, got {length}"));
        }
        Ok(Self {
            length,
            boundary,
            modes: DEFAULT_MODES,
            images: DEFAULT_IMAGES,
        })
    }

    /// Caps both series at `n` terms.
    pub fn with_truncation(self, n: usize) -> Result<Self> {
        self.with_modes(n)?.with_images(n)
    }

    pub fn with_modes(mut self, modes: usize) -> Result<Self> {
        if modes == 0 {
            return domain("at least one eigenmode is required");
        }
        self.modes = modes;
        Ok(self)
    }

    pub fn with_images(mut self, images: usize) -> Result<Self> {
        if images == 0 {
            return domain("at least one image term is required");
        }
        self.images = images;
        Ok(self)
    }

    pub fn length(&self) -> f64 {
        self.length
    }

    pub fn boundary(&self) -> Boundary {
        self.boundary
    }

    pub fn modes(&self) -> usize {
        self.modes
    }

    pub fn images(&self) -> usize {
        self.images
    }

    /// Kernel frozen at time `t`, for repeated evaluation.
    pub fn at(&self, t: f64) -> Result<KernelAt> {
        if !(t.is_finite() && t > 0.0) {
            return domain(format!("kernel time must be positive, got {t}"));
        }
        Ok(KernelAt::new(self, t))
    }

    fn check_position(&self, x: f64) -> Result<()> {
        let slack = 1e-12 * self.length;
        if !(x >= -slack && x <= self.length + slack) {
            return domain(format!("position {x} outside [0, {}]", self.length));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KernelValue {
    pub t: f64,
    pub x: f64,
    pub y: f64,
    pub value: f64,
    pub truncation_error_bound: f64,
    pub representation: Representation,
}

/// Free-space heat kernel `(4 pi t)^{-1/2} exp(-z^2 / 4t)`.
pub fn gamma(t: f64, z: f64) -> Result<f64> {
    if !(t.is_finite() && t > 0.0) {
        return domain(format!("gamma requires t > 0, got {t}"));
    }
    Ok(gamma_unchecked(t, z))
}

#[inline]
pub(crate) fn gamma_unchecked(t: f64, z: f64) -> f64 {
    (-z * z / (4.0 * t)).exp() / (4.0 * PI * t).sqrt()
}

pub fn heat_kernel(p: &KernelParams, t: f64, x: f64, y: f64) -> Result<KernelValue> {
    p.check_position(x)?;
    p.check_position(y)?;
    let k = p.at(t)?;
    Ok(KernelValue {
        t,
        x,
        y,
        // the truncated sums can dip a rounding error below zero near the walls
        value: k.eval(x, y).max(0.0),
        truncation_error_bound: k.tail_bound(),
        representation: k.representation(),
    })
}

/// Dirichlet eigenfunction `sqrt(2/L) sin(n pi x / L)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Eigenfunction {
    length: f64,
    n: usize,
}

impl Eigenfunction {
    pub fn eval(&self, x: f64) -> f64 {
        (2.0 / self.length).sqrt() * (self.n as f64 * PI * x / self.length).sin()
    }

    pub fn index(&self) -> usize {
        self.n
    }
}

/// Eigenvalue `(n pi / L)^2` and eigenfunction of the Dirichlet Laplacian.
pub fn eigenpair(p: &KernelParams, n: usize) -> Result<(f64, Eigenfunction)> {
    if p.boundary != Boundary::Dirichlet {
        return domain("eigenpair is defined for the Dirichlet Laplacian");
    }
    if n == 0 {
        return domain("eigenpair index starts at 1");
    }
    let mu = (n as f64 * PI / p.length).powi(2);
    Ok((
        mu,
        Eigenfunction {
            length: p.length,
            n,
        },
    ))
}

/// `(P_t h)(x_i) = int p_t(x_i, y) h(y) dy` on the points of `grid`.
///
/// On a node grid `h` is read as its piecewise quadratic interpolant over
/// pairs of cells (a trailing odd cell borrows the node before it); on a
/// cell grid it is piecewise constant. The kernel is integrated exactly
/// against that interpolant, so the result stays accurate when `t` is far
/// below the squared grid spacing. The grid must span `[0, L]`.
pub fn semigroup_apply(p: &KernelParams, t: f64, grid: &SpaceGrid, h: &[f64]) -> Result<Vec<f64>> {
    if h.len() != grid.len() {
        return domain(format!(
            "sampled function has {} values, grid has {}",
            h.len(),
            grid.len()
        ));
    }
    let span_err = grid.origin().abs() + (grid.length() - p.length).abs();
    if span_err > 1e-12 * p.length {
        return domain("grid must span the kernel domain");
    }
    if t == 0.0 {
        return Ok(h.to_vec());
    }
    let k = p.at(t)?;
    Ok(grid
        .points()
        .iter()
        .map(|&x| apply_at(&k, grid, h, x))
        .collect())
}

pub(crate) fn apply_at(k: &KernelAt, grid: &SpaceGrid, h: &[f64], x: f64) -> f64 {
    let cells = grid.cells();
    let mut acc = 0.0;
    match grid.layout() {
        Layout::Cells => {
            for c in 0..cells {
                acc += h[c] * k.box_integral(x, grid.edge(c), grid.edge(c + 1));
            }
        }
        Layout::Nodes if cells == 1 => {
            let [m0, m1, _] = k.moments(x, grid.edge(0), grid.edge(1));
            acc += h[0] * (m0 - m1) + h[1] * m1;
        }
        Layout::Nodes => {
            let mut c = 0;
            while c + 2 <= cells {
                let [m0, m1, m2] = k.moments(x, grid.edge(c), grid.edge(c + 2));
                acc += h[c] * (m0 - 3.0 * m1 + 2.0 * m2)
                    + h[c + 1] * 4.0 * (m1 - m2)
                    + h[c + 2] * (2.0 * m2 - m1);
                c += 2;
            }
            if c < cells {
                // quadratic through the last three nodes, on the last cell only
                let [m0, m1, m2] = k.moments(x, grid.edge(c), grid.edge(c + 1));
                acc += h[c - 1] * 0.5 * (m2 - m1) + h[c] * (m0 - m2) + h[c + 1] * 0.5 * (m2 + m1);
            }
        }
    }
    acc
}
