use num_complex::Complex;

use crate::error::{Error, Result};
use crate::grid::Grid;
use crate::params::ProblemParams;
use crate::scalar::Real;

/// Complex samples of `u(x)` on a periodic grid, tagged with the problem
/// parameters they belong to.
#[derive(Debug, Clone, PartialEq)]
pub struct Field<T: Real> {
    values: Vec<Complex<T>>,
    grid: Grid<T>,
    params: ProblemParams<T>,
}

impl<T: Real> Field<T> {
    pub fn new(values: Vec<Complex<T>>, grid: Grid<T>, params: ProblemParams<T>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::InvalidGrid(format!(
                "{} samples for a grid of {}",
                values.len(),
                grid.len()
            )));
        }
        if grid.dim() != params.dim {
            return Err(Error::Mismatch { what: "problem dimension" });
        }
        if values.iter().any(|v| !v.re.is_finite() || !v.im.is_finite()) {
            return Err(Error::NonFinite("field samples"));
        }
        Ok(Self { values, grid, params })
    }

    pub(crate) fn from_parts_unchecked(
        values: Vec<Complex<T>>,
        grid: Grid<T>,
        params: ProblemParams<T>,
    ) -> Self {
        debug_assert_eq!(values.len(), grid.len());
        Self { values, grid, params }
    }

    pub fn zeros(grid: Grid<T>, params: ProblemParams<T>) -> Self {
        let values = vec![Complex::new(T::zero(), T::zero()); grid.len()];
        Self { values, grid, params }
    }

    /// Samples `f(x)` at every node.
    pub fn from_fn<F>(grid: Grid<T>, params: ProblemParams<T>, f: F) -> Result<Self>
    where
        F: Fn([T; 3]) -> Complex<T>,
    {
        let values = (0..grid.len()).map(|i| f(grid.position(i))).collect();
        Self::new(values, grid, params)
    }

    pub fn values(&self) -> &[Complex<T>] {
        &self.values
    }

    pub fn into_values(self) -> Vec<Complex<T>> {
        self.values
    }

    pub fn grid(&self) -> &Grid<T> {
        &self.grid
    }

    pub fn params(&self) -> &ProblemParams<T> {
        &self.params
    }

    /// Same grid and parameters, new samples.
    pub fn with_values(&self, values: Vec<Complex<T>>) -> Result<Self> {
        Self::new(values, self.grid.clone(), self.params)
    }

    pub(crate) fn with_values_unchecked(&self, values: Vec<Complex<T>>) -> Self {
        Self::from_parts_unchecked(values, self.grid.clone(), self.params)
    }

    pub fn is_finite(&self) -> bool {
        self.values.iter().all(|v| v.re.is_finite() && v.im.is_finite())
    }

    pub fn scaled(&self, c: T) -> Self {
        self.with_values_unchecked(self.values.iter().map(|v| *v * c).collect())
    }

    /// Multiplies by the unit phase `e^{iα}`.
    pub fn rotated(&self, alpha: T) -> Self {
        let ph = Complex::new(alpha.cos(), alpha.sin());
        self.with_values_unchecked(self.values.iter().map(|v| *v * ph).collect())
    }

    pub fn conj(&self) -> Self {
        self.with_values_unchecked(self.values.iter().map(|v| v.conj()).collect())
    }

    /// Spectral translation, `u(x - a)`.
    pub fn translated(&self, shift: [T; 3]) -> Self {
        self.with_values_unchecked(self.grid.translate(&self.values, shift))
    }

    pub fn max_abs(&self) -> T {
        self.values.iter().fold(T::zero(), |m, v| m.max(v.norm()))
    }

    /// `‖u‖₂²` on the whole box.
    pub fn mass(&self) -> T {
        self.values.iter().map(|v| v.norm_sqr()).sum::<T>() * self.grid.cell_volume()
    }

    /// `∫_{|x| ≥ r} |u|²`.
    pub fn mass_outside(&self, r: T) -> T {
        let r2 = r * r;
        (0..self.values.len())
            .filter(|&i| self.grid.radius_sq(i) >= r2)
            .map(|i| self.values[i].norm_sqr())
            .sum::<T>()
            * self.grid.cell_volume()
    }

    /// Fraction of the mass sitting at or beyond the half-box radius `L/2`.
    pub fn boundary_mass_fraction(&self) -> T {
        let m = self.mass();
        if m == T::zero() {
            return T::zero();
        }
        self.mass_outside(self.grid.half_box_radius()) / m
    }

    pub(crate) fn ensure_compatible(&self, other: &Field<T>, what: &'static str) -> Result<()> {
        self.grid.ensure_same(&other.grid, what)?;
        if self.params != other.params {
            return Err(Error::Mismatch { what });
        }
        Ok(())
    }

    /// Largest pointwise difference to another field on the same grid.
    pub fn sup_distance(&self, other: &Field<T>) -> T {
        self.values
            .iter()
            .zip(&other.values)
            .fold(T::zero(), |m, (a, b)| m.max((*a - *b).norm()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_non_finite_and_wrong_length() {
        let g = Grid::<f64>::new(1, 5.0, 16).unwrap();
        let pp = ProblemParams::new(1, 7.0).unwrap();
        let mut v = vec![Complex::new(0.0, 0.0); 16];
        v[3].re = f64::NAN;
        assert_eq!(Field::new(v, g.clone(), pp).unwrap_err(), Error::NonFinite("field samples"));
        assert!(Field::new(vec![Complex::new(0.0, 0.0); 8], g, pp).is_err());
    }

    #[test]
    fn gaussian_mass() {
        let g = Grid::<f64>::new(2, 8.0, 64).unwrap();
        let pp = ProblemParams::new(2, 5.0).unwrap();
        let u = Field::from_fn(g, pp, |x| Complex::new((-(x[0] * x[0] + x[1] * x[1])).exp(), 0.0))
            .unwrap();
        // ∫ e^{-2|x|²} = π/2 in 2D
        assert!((u.mass() - std::f64::consts::FRAC_PI_2).abs() < 1e-13);
        assert!(u.boundary_mass_fraction() < 1e-12);
    }
}
