//! Conserved quantities of the flow: mass, energy and momentum.

use num_complex::Complex;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::field::Field;
use crate::scalar::Real;

/// Mass, energy, momentum and the two norms the energy is built from.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConservedQuantities<T> {
    pub mass: T,
    pub energy: T,
    pub momentum: Vec<T>,
    pub grad_norm_sq: T,
    pub lp1_norm: T,
}

impl<T: Real> ConservedQuantities<T> {
    /// `‖∇u‖₂`.
    pub fn grad_norm(&self) -> T {
        self.grad_norm_sq.sqrt()
    }

    pub fn momentum_norm(&self) -> T {
        self.momentum.iter().map(|&m| m * m).sum::<T>().sqrt()
    }
}

/// `|u|^{p+1}` evaluated without a complex power.
#[inline]
pub(crate) fn abs_pow<T: Real>(v: Complex<T>, power: T) -> T {
    let a2 = v.norm_sqr();
    if a2 == T::zero() {
        T::zero()
    } else {
        a2.powf(power / T::two())
    }
}

/// Computes M, E, P, `‖∇u‖₂²` and `‖u‖_{p+1}^{p+1}` by spectral
/// differentiation and grid quadrature.
pub fn conserved<T: Real>(u: &Field<T>) -> Result<ConservedQuantities<T>> {
    let grad = u.grid().gradient(u.values());
    conserved_with_gradient(u, &grad)
}

pub(crate) fn conserved_with_gradient<T: Real>(
    u: &Field<T>,
    grad: &[Vec<Complex<T>>],
) -> Result<ConservedQuantities<T>> {
    let w = u.grid().cell_volume();
    let p = u.params().p;
    let vals = u.values();
    let mass = vals.iter().map(|v| v.norm_sqr()).sum::<T>() * w;
    let lp1_norm = vals.iter().map(|&v| abs_pow(v, p + T::one())).sum::<T>() * w;
    let mut grad_norm_sq = T::zero();
    let mut momentum = Vec::with_capacity(grad.len());
    // a real field has zero momentum; skip the FFT round-off
    let real = vals.iter().all(|v| v.im == T::zero());
    for component in grad {
        grad_norm_sq += component.iter().map(|g| g.norm_sqr()).sum::<T>() * w;
        momentum.push(if real {
            T::zero()
        } else {
            vals.iter().zip(component).map(|(v, g)| (v.conj() * g).im).sum::<T>() * w
        });
    }
    let energy = grad_norm_sq / T::two() - lp1_norm / (p + T::one());
    let finite = [mass, lp1_norm, grad_norm_sq, energy].iter().all(|x| x.is_finite())
        && momentum.iter().all(|x| x.is_finite());
    if !finite {
        return Err(Error::NonFinite("conserved-quantity integrands"));
    }
    Ok(ConservedQuantities { mass, energy, momentum, grad_norm_sq, lp1_norm })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::Grid;
    use crate::params::ProblemParams;

    fn setup() -> (Grid<f64>, ProblemParams<f64>) {
        (Grid::new(1, 10.0, 128).unwrap(), ProblemParams::new(1, 7.0).unwrap())
    }

    #[test]
    fn zero_field() {
        let (g, pp) = setup();
        let c = conserved(&Field::zeros(g, pp)).unwrap();
        assert_eq!(c.mass, 0.0);
        assert_eq!(c.energy, 0.0);
        assert_eq!(c.grad_norm_sq, 0.0);
        assert_eq!(c.lp1_norm, 0.0);
        assert_eq!(c.momentum, vec![0.0]);
    }

    #[test]
    fn real_field_has_no_momentum() {
        let (g, pp) = setup();
        let u = Field::from_fn(g, pp, |x| Complex::new((-x[0] * x[0]).exp() * (1.0 + x[0]), 0.0))
            .unwrap();
        let c = conserved(&u).unwrap();
        assert!(c.momentum[0].abs() < 1e-15);
    }

    #[test]
    fn gaussian_closed_forms() {
        // u = e^{-x²/2} e^{i k x}: M = √π, ‖∇u‖² = √π (1/2 + k²), P = k √π
        let (g, pp) = setup();
        let k = 1.25;
        let u = Field::from_fn(g, pp, |x| {
            Complex::from_polar((-x[0] * x[0] / 2.0).exp(), k * x[0])
        })
        .unwrap();
        let c = conserved(&u).unwrap();
        let sp = std::f64::consts::PI.sqrt();
        assert!((c.mass - sp).abs() < 1e-12);
        assert!((c.grad_norm_sq - sp * (0.5 + k * k)).abs() < 1e-11);
        assert!((c.momentum[0] - k * sp).abs() < 1e-12);
        // ∫ e^{-4x²} = √(π/4)
        assert!((c.lp1_norm - (std::f64::consts::PI / 4.0).sqrt()).abs() < 1e-12);
        assert!((c.energy - (c.grad_norm_sq / 2.0 - c.lp1_norm / 8.0)).abs() < 1e-15);
    }
}
