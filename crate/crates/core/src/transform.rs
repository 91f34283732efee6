//! Symmetries used to normalize data before comparing it with `Q`: the
//! Galilean boost at `t = 0` and the NLS scaling that matches `M(Q)`.

use num_complex::Complex;

use crate::error::{Error, Result};
use crate::field::Field;
use crate::groundstate::GroundState;
use crate::invariants::conserved;
use crate::params::ProblemParams;
use crate::scalar::Real;

/// `ũ(x) = e^{i x·ξ₀} u(x)`. A zero boost returns `u` untouched.
pub fn galilean_boost<T: Real>(u: &Field<T>, xi0: &[T]) -> Result<Field<T>> {
    let dim = u.grid().dim();
    if xi0.len() != dim {
        return Err(Error::InvalidOption(format!(
            "boost has {} components, field has dimension {dim}",
            xi0.len()
        )));
    }
    if xi0.iter().any(|x| !x.is_finite()) {
        return Err(Error::NonFinite("boost vector"));
    }
    if xi0.iter().all(|&x| x == T::zero()) {
        return Ok(u.clone());
    }
    let grid = u.grid();
    let values = u
        .values()
        .iter()
        .enumerate()
        .map(|(i, v)| {
            let x = grid.position(i);
            let phase = (0..dim).map(|a| x[a] * xi0[a]).sum::<T>();
            *v * Complex::new(phase.cos(), phase.sin())
        })
        .collect();
    u.with_values(values)
}

/// Boosts `u` by `ξ₀ = −P(u)/M(u)`, the frame of zero momentum and least
/// energy. Returns the boosted field and `ξ₀`.
pub fn zero_momentum_frame<T: Real>(u: &Field<T>) -> Result<(Field<T>, Vec<T>)> {
    let c = conserved(u)?;
    if !(c.mass > T::zero()) {
        return Err(Error::ZeroMass);
    }
    let xi0: Vec<T> = c.momentum.iter().map(|&p| -p / c.mass).collect();
    Ok((galilean_boost(u, &xi0)?, xi0))
}

/// Factor `β = (M(u)/M(Q))^{(p−1)/(N(p−1)−4)}` of the mass-matching scaling.
pub fn scaling_factor<T: Real>(mass: T, q_mass: T, params: &ProblemParams<T>) -> Result<T> {
    if !(mass > T::zero()) {
        return Err(Error::ZeroMass);
    }
    Ok((mass / q_mass).powf(params.beta_exponent()))
}

/// Samples `amplitude · u(factor · x)` by band-limited interpolation.
pub fn dilated<T: Real>(u: &Field<T>, factor: T, amplitude: T) -> Field<T> {
    let vals = if factor == T::one() {
        u.values().to_vec()
    } else {
        u.grid().dilate(u.values(), factor)
    };
    u.with_values_unchecked(vals.into_iter().map(|v| v * amplitude).collect())
}

/// NLS scaling `λ^{2/(p−1)} u(λx)`, which leaves η and the energy ratio
/// unchanged.
pub fn nls_rescale<T: Real>(u: &Field<T>, lambda: T) -> Field<T> {
    let a = u.params().scaling_exponent();
    dilated(u, lambda, lambda.powf(a))
}

/// Mass-preserving scaling `λ^{N/2} u(λx)`.
pub fn l2_rescale<T: Real>(u: &Field<T>, lambda: T) -> Field<T> {
    let half_n = T::of_usize(u.grid().dim()) / T::two();
    dilated(u, lambda, lambda.powf(half_n))
}

/// Guard settings for [`mass_rescale`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RescaleOptions<T> {
    /// Smallest admissible RMS width of the rescaled field, in grid cells.
    pub min_points_per_width: T,
    /// Largest admissible relative error of `M(v)` against `M(Q)`.
    pub mass_tolerance: T,
}

impl<T: Real> Default for RescaleOptions<T> {
    fn default() -> Self {
        Self { min_points_per_width: T::lit(2.0), mass_tolerance: T::lit(1e-8) }
    }
}

/// Per-axis RMS width `sqrt(∫|x|²|u|² / (N M))`.
pub fn rms_width<T: Real>(u: &Field<T>) -> T {
    let grid = u.grid();
    let m = u.mass();
    if m == T::zero() {
        return T::zero();
    }
    let second = u
        .values()
        .iter()
        .enumerate()
        .map(|(i, v)| grid.radius_sq(i) * v.norm_sqr())
        .sum::<T>()
        * grid.cell_volume();
    (second / (m * T::of_usize(grid.dim()))).sqrt()
}

/// `v(x) = β^{2/(p−1)} u(βx)` with `β` chosen so that `M(v) = M(Q)`.
pub fn mass_rescale<T: Real>(u: &Field<T>, q: &GroundState<T>) -> Result<Field<T>> {
    mass_rescale_with(u, q, &RescaleOptions::default())
}

pub fn mass_rescale_with<T: Real>(
    u: &Field<T>,
    q: &GroundState<T>,
    opts: &RescaleOptions<T>,
) -> Result<Field<T>> {
    u.ensure_compatible(&q.profile, "ground state")?;
    let beta = scaling_factor(u.mass(), q.norms.mass, u.params())?;
    if beta == T::one() {
        return Ok(u.clone());
    }
    let ppw = rms_width(u) / (beta * u.grid().spacing());
    if ppw < opts.min_points_per_width {
        return Err(Error::AliasRisk {
            beta: beta.as_f64(),
            points_per_width: ppw.as_f64(),
            minimum: opts.min_points_per_width.as_f64(),
        });
    }
    let v = nls_rescale(u, beta);
    let err = ((v.mass() - q.norms.mass) / q.norms.mass).abs();
    if !(err <= opts.mass_tolerance) {
        return Err(Error::ResampleLoss(err.as_f64()));
    }
    Ok(v)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::Grid;

    fn gaussian(k: f64) -> Field<f64> {
        let g = Grid::<f64>::new(1, 12.0, 256).unwrap();
        let pp = ProblemParams::new(1, 7.0).unwrap();
        Field::from_fn(g, pp, |x| Complex::from_polar((-x[0] * x[0]).exp(), k * x[0])).unwrap()
    }

    #[test]
    fn zero_boost_is_identity() {
        let u = gaussian(0.7);
        assert_eq!(galilean_boost(&u, &[0.0]).unwrap(), u);
        assert!(galilean_boost(&u, &[0.0, 1.0]).is_err());
    }

    #[test]
    fn boost_shifts_momentum() {
        let u = gaussian(0.0);
        let c0 = conserved(&u).unwrap();
        let c1 = conserved(&galilean_boost(&u, &[1.5]).unwrap()).unwrap();
        assert!((c1.mass - c0.mass).abs() < 1e-14);
        assert!((c1.momentum[0] - 1.5 * c0.mass).abs() < 1e-12);
        let want = c0.energy + 0.5 * 1.5 * 1.5 * c0.mass;
        assert!((c1.energy - want).abs() < 1e-12 * want.abs());
    }

    #[test]
    fn zero_momentum_undoes_boost() {
        let u = gaussian(0.0);
        let (w, xi) = zero_momentum_frame(&galilean_boost(&u, &[2.0]).unwrap()).unwrap();
        assert!((xi[0] + 2.0).abs() < 1e-12);
        assert!(w.sup_distance(&u) < 1e-12);
        let z = Field::zeros(u.grid().clone(), *u.params());
        assert_eq!(zero_momentum_frame(&z).unwrap_err(), Error::ZeroMass);
    }

    #[test]
    fn integer_dilation_subsamples() {
        let u = gaussian(0.3);
        let v = nls_rescale(&u, 2.0);
        let g = u.grid();
        for i in 64..192 {
            let j = 2 * i - 128;
            let want = u.values()[j] * 2f64.powf(1.0 / 3.0);
            assert!((v.values()[i] - want).norm() < 1e-13);
        }
        assert!(g.points() == 256);
    }
}
