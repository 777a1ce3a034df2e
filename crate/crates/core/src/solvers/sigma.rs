use crate::error::{config, Error, Result};

/// Noise coefficient `sigma` with `sigma(0) = 0`.
#[derive(Debug, Clone, PartialEq)]
pub enum SigmaSpec {
    Linear {
        slope: f64,
    },
    /// Linear interpolation between knots `(z, sigma(z))`, extended by the
    /// given slopes beyond the outermost knots.
    PiecewiseLinear {
        knots: Vec<(f64, f64)>,
        left_slope: f64,
        right_slope: f64,
    },
}

impl SigmaSpec {
    pub fn linear(slope: f64) -> Result<Self> {
        if !slope.is_finite() {
            return config(format!("sigma slope must be finite, got {slope}"));
        }
        Ok(SigmaSpec::Linear { slope })
    }

    pub fn piecewise(knots: Vec<(f64, f64)>, left_slope: f64, right_slope: f64) -> Result<Self> {
        if knots.is_empty() {
            return config("piecewise sigma needs at least one knot");
        }
        if knots
            .iter()
            .any(|(z, s)| !z.is_finite() || !s.is_finite())
            || !left_slope.is_finite()
            || !right_slope.is_finite()
        {
            return config("piecewise sigma has non-finite entries");
        }
        if knots.windows(2).any(|w| w[1].0 <= w[0].0) {
            return config("piecewise sigma knots must be strictly increasing");
        }
        let spec = SigmaSpec::PiecewiseLinear {
            knots,
            left_slope,
            right_slope,
        };
        let at_zero = spec.eval(0.0);
        let scale = match &spec {
            SigmaSpec::PiecewiseLinear { knots, .. } => knots
                .iter()
                .fold(1.0f64, |m, (z, s)| m.max(z.abs()).max(s.abs())),
            SigmaSpec::Linear { .. } => 1.0,
        };
        if at_zero.abs() > 1e-12 * scale {
            return Err(Error::Unsupported(format!(
                "sigma(0) must vanish, got {at_zero}"
            )));
        }
        Ok(spec)
    }

    #[inline]
    pub fn eval(&self, z: f64) -> f64 {
        match self {
            SigmaSpec::Linear { slope } => slope * z,
            SigmaSpec::PiecewiseLinear {
                knots,
                left_slope,
                right_slope,
            } => {
                let (z0, s0) = knots[0];
                let (zn, sn) = knots[knots.len() - 1];
                if z <= z0 {
                    return s0 + left_slope * (z - z0);
                }
                if z >= zn {
                    return sn + right_slope * (z - zn);
                }
                let k = knots.partition_point(|&(zk, _)| zk <= z);
                let (za, sa) = knots[k - 1];
                let (zb, sb) = knots[k];
                sa + (sb - sa) * (z - za) / (zb - za)
            }
        }
    }

    /// Slope when `sigma` is linear.
    pub fn linear_slope(&self) -> Option<f64> {
        match self {
            SigmaSpec::Linear { slope } => Some(*slope),
            SigmaSpec::PiecewiseLinear { .. } => None,
        }
    }
}

/// `(inf |sigma(z)/z|, sup |sigma(z)/z|)` over `z != 0`.
///
/// On each half-line `sigma(z)/z` is continuous and monotone between knots,
/// so its range there is spanned by the knot ratios, the outer slope and the
/// slope of the piece touching the origin. The infimum of the absolute value
/// is zero when that range straddles zero.
pub fn sigma_constants(s: &SigmaSpec) -> (f64, f64) {
    match s {
        SigmaSpec::Linear { slope } => (slope.abs(), slope.abs()),
        SigmaSpec::PiecewiseLinear {
            knots,
            left_slope,
            right_slope,
        } => {
            let piece_slope = |k: usize| {
                if k == 0 {
                    *left_slope
                } else if k == knots.len() {
                    *right_slope
                } else {
                    let ((za, sa), (zb, sb)) = (knots[k - 1], knots[k]);
                    (sb - sa) / (zb - za)
                }
            };
            let below = knots.partition_point(|&(z, _)| z < 0.0);
            let above = knots.partition_point(|&(z, _)| z <= 0.0);
            let negative = knots[..below]
                .iter()
                .map(|(z, v)| v / z)
                .chain([*left_slope, piece_slope(below)]);
            let positive = knots[above..]
                .iter()
                .map(|(z, v)| v / z)
                .chain([*right_slope, piece_slope(above)]);
            let mut ell = f64::INFINITY;
            let mut lip = 0.0f64;
            for half in [negative.collect::<Vec<_>>(), positive.collect::<Vec<_>>()] {
                let lo = half.iter().copied().fold(f64::INFINITY, f64::min);
                let hi = half.iter().copied().fold(f64::NEG_INFINITY, f64::max);
                lip = lip.max(lo.abs()).max(hi.abs());
                ell = ell.min(if lo <= 0.0 && hi >= 0.0 {
                    0.0
                } else {
                    lo.abs().min(hi.abs())
                });
            }
            (ell, lip)
        }
    }
}
