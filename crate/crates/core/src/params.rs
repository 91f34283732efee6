//! Problem parameterization: dimension, power and the derived exponents.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::scalar::Real;

/// Dimension and nonlinearity power of `i u_t + Δu + |u|^{p-1} u = 0`,
/// restricted to the mass-supercritical, energy-subcritical window.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ProblemParams<T> {
    #[serde(rename = "N")]
    pub dim: usize,
    pub p: T,
    /// Critical Sobolev index `N/2 - 2/(p-1)`.
    pub s_c: T,
    pub omega1: T,
    pub omega2: T,
}

impl<T: Real> ProblemParams<T> {
    pub fn new(dim: usize, p: T) -> Result<Self> {
        if !(1..=3).contains(&dim) {
            return Err(Error::UnsupportedDimension(dim));
        }
        let (lo, hi) = admissible_window(dim);
        let pf = p.as_f64();
        if !(pf.is_finite() && pf > lo && pf < hi) {
            return Err(Error::OutOfRange { dim, p: pf, lo, hi });
        }
        let n = T::of_usize(dim);
        let two = T::two();
        let four = T::lit(4.0);
        let s_c = n / two - two / (p - T::one());
        let npm1 = n * (p - T::one());
        let omega1 = npm1 / (npm1 - four);
        let omega2 = four / (npm1 - four);
        Ok(Self { dim, p, s_c, omega1, omega2 })
    }

    /// `N(p-1)`.
    #[inline]
    pub fn n_pm1(&self) -> T {
        T::of_usize(self.dim) * (self.p - T::one())
    }

    /// Exponent `N(p-1)/2` of the nonlinear term in the dichotomy polynomial.
    #[inline]
    pub fn poly_exponent(&self) -> T {
        self.n_pm1() / T::two()
    }

    /// Exponent `(1-s_c)/s_c` attached to the mass in the scale-invariant products.
    #[inline]
    pub fn mass_exponent(&self) -> T {
        (T::one() - self.s_c) / self.s_c
    }

    /// Exponent `2/(p-1)` of the amplitude under the NLS scaling.
    #[inline]
    pub fn scaling_exponent(&self) -> T {
        T::two() / (self.p - T::one())
    }

    /// Exponent of `‖u‖₂` in the Gagliardo–Nirenberg inequality.
    #[inline]
    pub fn gn_mass_power(&self) -> T {
        T::two() - (T::of_usize(self.dim) - T::two()) * (self.p - T::one()) / T::two()
    }

    /// `f(λ) = ω₁λ² − ω₂λ^{N(p−1)/2}`.
    #[inline]
    pub fn dichotomy_poly(&self, lambda: T) -> T {
        self.omega1 * lambda * lambda - self.omega2 * lambda.powf(self.poly_exponent())
    }

    /// Linear coefficient `1 - s_c` of the ground-state equation.
    #[inline]
    pub fn critical_frequency(&self) -> T {
        T::one() - self.s_c
    }

    /// Exponent `(N(p-1)-4)/(p-1)` relating mass ratios to the scaling factor `β`.
    #[inline]
    pub fn beta_exponent(&self) -> T {
        (self.p - T::one()) / (self.n_pm1() - T::lit(4.0))
    }
}

/// Open interval of admissible powers for the given dimension.
pub fn admissible_window(dim: usize) -> (f64, f64) {
    let n = dim as f64;
    let lo = 1.0 + 4.0 / n;
    let hi = if dim <= 2 { f64::INFINITY } else { 1.0 + 4.0 / (n - 2.0) };
    (lo, hi)
}
