use crate::space::SpaceGrid;

/// Solution values on a spatial grid at one time.
#[derive(Debug, Clone, PartialEq)]
pub struct Field {
    pub t: f64,
    pub grid: SpaceGrid,
    pub values: Vec<f64>,
}

impl Field {
    /// `int u(x)^2 dx` with the grid's quadrature rule.
    pub fn l2_norm_sq(&self) -> f64 {
        let sq: Vec<f64> = self.values.iter().map(|v| v * v).collect();
        self.grid.integrate(&sq)
    }

    pub fn max(&self) -> f64 {
        self.values.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn points(&self) -> Vec<f64> {
        self.grid.points()
    }

    pub fn is_finite(&self) -> bool {
        self.values.iter().all(|v| v.is_finite())
    }
}
