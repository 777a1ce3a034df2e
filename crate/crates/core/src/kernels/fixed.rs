//! Heat kernel frozen at one time: representation choice, truncation and
//! closed-form integrals against box and hat functions.

use std::f64::consts::PI;

use super::{gamma_unchecked, Boundary, KernelParams};

/// Which series a kernel value was summed from.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Representation {
    Eigen,
    Images,
}

/// `p_t(., .)` for one fixed `t > 0`.
#[derive(Debug, Clone)]
pub struct KernelAt {
    length: f64,
    boundary: Boundary,
    t: f64,
    rep: Representation,
    terms: usize,
    tail_bound: f64,
    /// `e^{-mu_n t}` for the retained modes (index = mode number).
    decay: Vec<f64>,
}

const RELATIVE_TARGET: f64 = 1e-17;

fn ln_eigen_tail(length: f64, t: f64, modes: usize) -> f64 {
    let n1 = (modes + 1) as f64;
    let mu = (n1 * PI / length).powi(2);
    let q = (2.0 * modes as f64 + 3.0) * PI * PI * t / (length * length);
    (2.0 / length).ln() - mu * t - (-(-q).exp_m1()).ln()
}

fn ln_image_tail(length: f64, t: f64, images: usize) -> f64 {
    let n = images as f64;
    let q = (2.0 * n + 1.0) * length * length / t;
    4f64.ln() - 0.5 * (4.0 * PI * t).ln() - n * n * length * length / t - (-(-q).exp_m1()).ln()
}

impl KernelAt {
    pub(crate) fn new(params: &KernelParams, t: f64) -> Self {
        debug_assert!(t > 0.0);
        let l = params.length;
        let eig = ln_eigen_tail(l, t, params.modes);
        let img = ln_image_tail(l, t, params.images);
        let (rep, max_terms, ln_tail): (Representation, usize, fn(f64, f64, usize) -> f64) =
            if img <= eig {
                (Representation::Images, params.images, ln_image_tail)
            } else {
                (Representation::Eigen, params.modes, ln_eigen_tail)
            };
        let scale = (1.0 / l).max((4.0 * PI * t).powf(-0.5));
        let target = (RELATIVE_TARGET * scale).ln();
        let mut terms = max_terms;
        for k in 1..=max_terms {
            if ln_tail(l, t, k) <= target {
                terms = k;
                break;
            }
        }
        let tail_bound = ln_tail(l, t, terms).exp();
        let decay = match rep {
            Representation::Eigen => (0..=terms)
                .map(|n| (-(n as f64 * PI / l).powi(2) * t).exp())
                .collect(),
            Representation::Images => Vec::new(),
        };
        Self {
            length: l,
            boundary: params.boundary,
            t,
            rep,
            terms,
            tail_bound,
            decay,
        }
    }

    pub fn t(&self) -> f64 {
        self.t
    }

    pub fn representation(&self) -> Representation {
        self.rep
    }

    /// Number of retained modes (eigen) or image shifts `|n| <= terms`.
    pub fn terms(&self) -> usize {
        self.terms
    }

    pub fn tail_bound(&self) -> f64 {
        self.tail_bound
    }

    fn sign(&self) -> f64 {
        match self.boundary {
            Boundary::Dirichlet => -1.0,
            Boundary::Neumann => 1.0,
        }
    }

    /// Image centres `(c, sign)`: `p_t(x, y) = sum sign * Gamma_t(y - c)`.
    fn for_each_image<F: FnMut(f64, f64)>(&self, x: f64, mut f: F) {
        let n = self.terms as i64;
        let s = self.sign();
        for k in -n..=n {
            let shift = 2.0 * k as f64 * self.length;
            f(x - shift, 1.0);
            f(shift - x, s);
        }
    }

    pub fn eval(&self, x: f64, y: f64) -> f64 {
        let l = self.length;
        match self.rep {
            Representation::Images => {
                let mut acc = 0.0;
                self.for_each_image(x, |c, s| acc += s * gamma_unchecked(self.t, y - c));
                acc
            }
            Representation::Eigen => {
                let w = PI / l;
                match self.boundary {
                    Boundary::Dirichlet => {
                        (1..=self.terms)
                            .map(|n| {
                                let k = n as f64 * w;
                                self.decay[n] * (k * x).sin() * (k * y).sin()
                            })
                            .sum::<f64>()
                            * 2.0
                            / l
                    }
                    Boundary::Neumann => {
                        1.0 / l
                            + (1..=self.terms)
                                .map(|n| {
                                    let k = n as f64 * w;
                                    self.decay[n] * (k * x).cos() * (k * y).cos()
                                })
                                .sum::<f64>()
                                * 2.0
                                / l
                    }
                }
            }
        }
    }

    /// `int_a^b p_t(x, y) s^k dy` for `k = 0, 1, 2`, where `s = (y - a) / (b - a)`.
    pub fn moments(&self, x: f64, a: f64, b: f64) -> [f64; 3] {
        let h = b - a;
        if h <= 0.0 {
            return [0.0; 3];
        }
        let l = self.length;
        match self.rep {
            Representation::Images => {
                let mut m = [0.0; 3];
                let t = self.t;
                self.for_each_image(x, |c, s| {
                    // z = y - c, y - a = z + d
                    let (za, zb, d) = (a - c, b - c, c - a);
                    let (ga, gb) = (gamma_unchecked(t, za), gamma_unchecked(t, zb));
                    let i0 = gaussian_mass(t, za, zb);
                    let i1 = 2.0 * t * (ga - gb);
                    let i2 = 2.0 * t * (i0 - (zb * gb - za * ga));
                    m[0] += s * i0;
                    m[1] += s * (i1 + d * i0) / h;
                    m[2] += s * (i2 + 2.0 * d * i1 + d * d * i0) / (h * h);
                });
                m
            }
            Representation::Eigen => {
                let w = PI / l;
                let mut m = match self.boundary {
                    Boundary::Dirichlet => [0.0; 3],
                    Boundary::Neumann => [h / l, 0.5 * h / l, h / (3.0 * l)],
                };
                for n in 1..=self.terms {
                    let k = n as f64 * w;
                    let coef = self.decay[n] * 2.0 / l;
                    let (sa, ca) = (k * a).sin_cos();
                    let (sb, cb) = (k * b).sin_cos();
                    // successive antiderivatives F1, F2, F3 of the trig factor
                    let (fx, f1a, f1b, f2b, f3a, f3b) = match self.boundary {
                        Boundary::Dirichlet => (
                            (k * x).sin(),
                            -ca / k,
                            -cb / k,
                            -sb / (k * k),
                            ca / (k * k * k),
                            cb / (k * k * k),
                        ),
                        Boundary::Neumann => (
                            (k * x).cos(),
                            sa / k,
                            sb / k,
                            -cb / (k * k),
                            -sa / (k * k * k),
                            -sb / (k * k * k),
                        ),
                    };
                    let f2a = match self.boundary {
                        Boundary::Dirichlet => -sa / (k * k),
                        Boundary::Neumann => -ca / (k * k),
                    };
                    let c = coef * fx;
                    let j0 = f1b - f1a;
                    let j1 = h * f1b - (f2b - f2a);
                    let j2 = h * h * f1b - 2.0 * h * f2b + 2.0 * (f3b - f3a);
                    m[0] += c * j0;
                    m[1] += c * j1 / h;
                    m[2] += c * j2 / (h * h);
                }
                m
            }
        }
    }

    /// `int_0^L p_t(x, x) dx`.
    pub fn trace(&self) -> f64 {
        let l = self.length;
        match self.rep {
            Representation::Eigen => {
                let head = match self.boundary {
                    Boundary::Dirichlet => 0.0,
                    Boundary::Neumann => 1.0,
                };
                head + self.decay[1..].iter().sum::<f64>()
            }
            Representation::Images => {
                let n = self.terms as i64;
                let s = self.sign();
                let mut acc = 0.0;
                for k in -n..=n {
                    let shift = 2.0 * k as f64 * l;
                    // direct term is constant in x; the reflected one is Gamma_t(2x - shift)
                    acc += l * gamma_unchecked(self.t, shift);
                    acc += s * 0.5 * gaussian_mass(self.t, -shift, 2.0 * l - shift);
                }
                acc
            }
        }
    }

    /// `int_a^b p_t(x, y) dy`.
    pub fn box_integral(&self, x: f64, a: f64, b: f64) -> f64 {
        self.moments(x, a, b)[0]
    }
}

/// `int_{lo}^{hi} Gamma_t(z) dz`, computed without cancellation in the tails.
pub(crate) fn gaussian_mass(t: f64, lo: f64, hi: f64) -> f64 {
    let s = (4.0 * t).sqrt();
    let (a, b) = (lo / s, hi / s);
    if a >= 0.0 {
        0.5 * (libm::erfc(a) - libm::erfc(b))
    } else if b <= 0.0 {
        0.5 * (libm::erfc(-b) - libm::erfc(-a))
    } else {
        0.5 * (libm::erf(b) - libm::erf(a))
    }
}
