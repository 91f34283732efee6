//! Ground state `Q` of `−ωQ + ΔQ + |Q|^{p−1}Q = 0`, the sharp
//! Gagliardo–Nirenberg constant it realizes, and a closed-form 1D oracle.
//!
//! The default frequency is `ω = 1 − s_c`, for which the Pohozaev identities
//! read `‖Q‖₂² = (2/N)‖∇Q‖₂²`. The unit frequency `ω = 1` is available through
//! [`Normalization::Unit`]; scale-invariant quantities do not depend on the
//! choice.

use num_complex::Complex;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::field::Field;
use crate::grid::Grid;
use crate::invariants::{abs_pow, conserved, ConservedQuantities};
use crate::params::ProblemParams;
use crate::scalar::Real;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize)]
pub enum Normalization {
    /// Linear coefficient `1 − s_c`.
    #[default]
    CriticalIndex,
    /// Linear coefficient `1`.
    Unit,
}

impl Normalization {
    pub fn frequency<T: Real>(self, params: &ProblemParams<T>) -> T {
        match self {
            Normalization::CriticalIndex => params.critical_frequency(),
            Normalization::Unit => T::one(),
        }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct SolverOptions<T> {
    pub normalization: Normalization,
    /// Stationary residual tolerance, relative to `‖Q‖∞`.
    pub tolerance: T,
    /// Successive-iterate sup-norm change tolerance, relative to `‖Q‖∞`.
    pub step_tolerance: T,
    pub max_iterations: usize,
    /// Minimum grid points across the estimated half-maximum width.
    pub min_points_across: T,
}

impl<T: Real> Default for SolverOptions<T> {
    fn default() -> Self {
        Self {
            normalization: Normalization::CriticalIndex,
            tolerance: T::lit(1e-10),
            step_tolerance: T::lit(1e-12),
            max_iterations: 2000,
            min_points_across: T::lit(16.0),
        }
    }
}

/// Converged ground state with its norms and sharp constant.
#[derive(Debug, Clone)]
pub struct GroundState<T: Real> {
    pub profile: Field<T>,
    pub norms: ConservedQuantities<T>,
    pub cgn: T,
    /// Sup-norm of the stationary residual away from the box edge, relative
    /// to `‖Q‖∞`.
    pub residual: T,
    pub iterations: usize,
    /// Linear coefficient `ω` of the stationary equation.
    pub frequency: T,
    /// Relative residual after each iteration.
    pub residual_history: Vec<T>,
}

/// Relative deviations from the three Pohozaev identities.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PohozaevResiduals<T> {
    /// `‖Q‖₂² = (2/N)‖∇Q‖₂²`.
    pub mass_gradient: T,
    /// `‖Q‖_{p+1}^{p+1} = 2(p+1)/(N(p−1)) ‖∇Q‖₂²`.
    pub potential_gradient: T,
    /// `E(Q) = (N(p−1)−4)/(2N(p−1)) ‖∇Q‖₂²`.
    pub energy_gradient: T,
}

impl<T: Real> PohozaevResiduals<T> {
    pub fn max(&self) -> T {
        self.mass_gradient.max(self.potential_gradient).max(self.energy_gradient)
    }
}

impl<T: Real> GroundState<T> {
    pub fn params(&self) -> &ProblemParams<T> {
        self.profile.params()
    }

    pub fn grid(&self) -> &Grid<T> {
        self.profile.grid()
    }

    /// Pohozaev identities for the `1 − s_c` normalization. For the unit
    /// normalization the mass identity picks up a factor `(1 − s_c)`.
    pub fn pohozaev(&self) -> PohozaevResiduals<T> {
        let pp = self.params();
        let n = T::of_usize(pp.dim);
        let g = self.norms.grad_norm_sq;
        let npm1 = pp.n_pm1();
        let mass_factor = pp.critical_frequency() / self.frequency;
        let rel = |got: T, want: T| ((got - want) / want).abs();
        PohozaevResiduals {
            mass_gradient: rel(self.norms.mass, mass_factor * T::two() / n * g),
            potential_gradient: rel(self.norms.lp1_norm, T::two() * (pp.p + T::one()) / npm1 * g),
            energy_gradient: rel(self.norms.energy, (npm1 - T::lit(4.0)) / (T::two() * npm1) * g),
        }
    }

    /// Assembles a ground state from a profile, recomputing its norms.
    pub fn from_profile(profile: Field<T>, frequency: T, iterations: usize) -> Result<Self> {
        let norms = conserved(&profile)?;
        let cgn = gn_constant_from(&norms, profile.params());
        let residual = stationary_residual(&profile, frequency);
        Ok(Self {
            profile,
            norms,
            cgn,
            residual,
            iterations,
            frequency,
            residual_history: Vec::new(),
        })
    }
}

/// Full width at half maximum of the 1D closed-form soliton at frequency `ω`.
pub fn width_estimate<T: Real>(params: &ProblemParams<T>, frequency: T) -> T {
    let pm1 = params.p - T::one();
    let y = T::two().powf(pm1 / T::two()).acosh();
    T::lit(4.0) * y / (frequency.sqrt() * pm1)
}

fn edge_interior<T: Real>(grid: &Grid<T>, flat: usize) -> bool {
    let x = grid.position(flat);
    let lim = T::lit(0.95) * grid.half_len();
    (0..grid.dim()).all(|a| x[a].abs() <= lim)
}

/// Sup-norm of `−ωQ + ΔQ + |Q|^{p−1}Q` over the box minus a 5% edge band,
/// relative to `‖Q‖∞`.
pub fn stationary_residual<T: Real>(q: &Field<T>, frequency: T) -> T {
    let grid = q.grid();
    let p = q.params().p;
    let lap = grid.laplacian(q.values());
    let peak = q.max_abs();
    if peak == T::zero() {
        return T::zero();
    }
    let mut worst = T::zero();
    for (i, (v, l)) in q.values().iter().zip(&lap).enumerate() {
        if !edge_interior(grid, i) {
            continue;
        }
        let nl = *v * abs_pow(*v, p - T::one());
        let r = (*l - *v * frequency + nl).norm();
        worst = worst.max(r);
    }
    worst / peak
}

/// Petviashvili iteration `Q ← M^{p/(p−1)} (ω − Δ)^{-1} |Q|^{p−1}Q` with the
/// stabilizing factor `M = ⟨Q,(ω−Δ)Q⟩ / ⟨Q,|Q|^{p−1}Q⟩`.
pub fn solve_ground_state<T: Real>(
    params: ProblemParams<T>,
    grid: Grid<T>,
    opts: &SolverOptions<T>,
) -> Result<GroundState<T>> {
    if grid.dim() != params.dim {
        return Err(Error::Mismatch { what: "grid dimension" });
    }
    let omega = opts.normalization.frequency(&params);
    let width = width_estimate(&params, omega);
    let across = width / grid.spacing();
    if across < opts.min_points_across {
        return Err(Error::GridTooCoarse {
            points_across: across.as_f64(),
            required: opts.min_points_across.as_f64(),
        });
    }
    let p = params.p;
    let gamma = p / (p - T::one());

    // Gaussian seed with the estimated half-maximum width
    let sigma = width / T::lit(2.354_820_045);
    let amp = (omega * (p + T::one()) / T::two()).powf(T::one() / (p - T::one()));
    let mut q: Vec<Complex<T>> = (0..grid.len())
        .map(|i| {
            let r2 = grid.radius_sq(i);
            Complex::new(amp * (-r2 / (T::two() * sigma * sigma)).exp(), T::zero())
        })
        .collect();
    let symbol: Vec<T> = (0..grid.len()).map(|i| omega + grid.k_sq(i)).collect();

    let mut history = Vec::new();
    let mut q_hat = q.clone();
    grid.forward(&mut q_hat);
    let mut iterations = 0;
    let mut last_change = T::infinity();
    let mut last_residual = T::infinity();
    while iterations < opts.max_iterations {
        iterations += 1;
        let mut n_hat: Vec<Complex<T>> =
            q.iter().map(|v| *v * abs_pow(*v, p - T::one())).collect();
        grid.forward(&mut n_hat);
        let mut num = T::zero();
        let mut den = T::zero();
        for i in 0..q_hat.len() {
            num += symbol[i] * q_hat[i].norm_sqr();
            den += (q_hat[i].conj() * n_hat[i]).re;
        }
        if !(den > T::zero()) || !num.is_finite() {
            return Err(Error::NonFinite("Petviashvili stabilizing factor"));
        }
        let factor = (num / den).powf(gamma);

        // residual of the current iterate
        let mut res: Vec<Complex<T>> =
            (0..q_hat.len()).map(|i| n_hat[i] - q_hat[i] * symbol[i]).collect();
        grid.inverse(&mut res);
        let peak = q.iter().fold(T::zero(), |m, v| m.max(v.norm()));
        let mut worst = T::zero();
        for (i, r) in res.iter().enumerate() {
            if edge_interior(&grid, i) {
                worst = worst.max(r.norm());
            }
        }
        last_residual = worst / peak;
        history.push(last_residual);

        let mut next_hat: Vec<Complex<T>> =
            (0..q_hat.len()).map(|i| n_hat[i] * (factor / symbol[i])).collect();
        let mut next = next_hat.clone();
        grid.inverse(&mut next);
        for v in next.iter_mut() {
            *v = Complex::new(v.re.max(T::zero()), T::zero());
        }
        last_change = q
            .iter()
            .zip(&next)
            .fold(T::zero(), |m, (a, b)| m.max((*a - *b).norm()))
            / peak;
        if !last_change.is_finite() {
            return Err(Error::NonFinite("Petviashvili iterate"));
        }
        q = next;
        std::mem::swap(&mut q_hat, &mut next_hat);
        if last_change < opts.step_tolerance && last_residual < opts.tolerance {
            break;
        }
    }
    let profile = Field::new(q, grid, params)?;
    let mut gs = GroundState::from_profile(profile, omega, iterations)?;
    gs.residual_history = history;
    if !(last_change < opts.step_tolerance && gs.residual < opts.tolerance) {
        return Err(Error::NoConvergence {
            iterations,
            change: last_change.as_f64(),
            residual: gs.residual.as_f64().max(last_residual.as_f64()),
        });
    }
    Ok(gs)
}

/// Samples the exact 1D soliton at frequency `1 − s_c`.
pub fn soliton_1d_closed_form<T: Real>(params: ProblemParams<T>, grid: Grid<T>) -> Result<Field<T>> {
    soliton_1d_at_frequency(params, grid, params.critical_frequency())
}

/// `Q(x) = (ω(p+1)/2)^{1/(p−1)} sech^{2/(p−1)}(√ω (p−1) x / 2)`.
pub fn soliton_1d_at_frequency<T: Real>(
    params: ProblemParams<T>,
    grid: Grid<T>,
    omega: T,
) -> Result<Field<T>> {
    if params.dim != 1 || grid.dim() != 1 {
        return Err(Error::WrongDimension(params.dim));
    }
    let pm1 = params.p - T::one();
    let amp = (omega * (params.p + T::one()) / T::two()).powf(T::one() / pm1);
    let rate = omega.sqrt() * pm1 / T::two();
    let expo = T::two() / pm1;
    Field::from_fn(grid, params, |x| {
        let s = T::one() / (rate * x[0].abs()).cosh();
        Complex::new(amp * s.powf(expo), T::zero())
    })
}

fn gn_constant_from<T: Real>(norms: &ConservedQuantities<T>, params: &ProblemParams<T>) -> T {
    let grad_pow = norms.grad_norm_sq.powf(params.poly_exponent() / T::two());
    let mass_pow = norms.mass.powf(params.gn_mass_power() / T::two());
    norms.lp1_norm / (grad_pow * mass_pow)
}

/// `C_GN = ‖Q‖_{p+1}^{p+1} / (‖∇Q‖₂^{N(p−1)/2} ‖Q‖₂^{2−(N−2)(p−1)/2})`.
pub fn sharp_gn_constant<T: Real>(q: &GroundState<T>) -> T {
    gn_constant_from(&q.norms, q.params())
}

/// Slack of the Gagliardo–Nirenberg inequality,
/// `C_GN ‖∇u‖₂^{N(p−1)/2} ‖u‖₂^{2−(N−2)(p−1)/2} − ‖u‖_{p+1}^{p+1}`.
pub fn gn_check<T: Real>(u: &Field<T>, cgn: T) -> Result<T> {
    let c = conserved(u)?;
    Ok(gn_slack_from(&c, u.params(), cgn))
}

pub(crate) fn gn_slack_from<T: Real>(c: &ConservedQuantities<T>, params: &ProblemParams<T>, cgn: T) -> T {
    let grad_pow = c.grad_norm_sq.powf(params.poly_exponent() / T::two());
    let mass_pow = c.mass.powf(params.gn_mass_power() / T::two());
    cgn * grad_pow * mass_pow - c.lp1_norm
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn closed_form_peak_and_symmetry() {
        let pp = ProblemParams::<f64>::new(1, 7.0).unwrap();
        let g = Grid::new(1, 30.0, 1024).unwrap();
        let q = soliton_1d_closed_form(pp, g.clone()).unwrap();
        let c = g.center_index();
        assert!((q.values()[c].re - (10.0f64 / 3.0).powf(1.0 / 6.0)).abs() < 1e-15);
        for k in 1..512 {
            assert_eq!(q.values()[c + k], q.values()[c - k]);
        }
        let r = stationary_residual(&q, pp.critical_frequency());
        assert!(r < 1e-10, "residual {r:e}");
    }

    #[test]
    fn closed_form_needs_one_dimension() {
        let pp = ProblemParams::<f64>::new(2, 5.0).unwrap();
        let g = Grid::new(2, 10.0, 16).unwrap();
        assert_eq!(soliton_1d_closed_form(pp, g).unwrap_err(), Error::WrongDimension(2));
    }

    #[test]
    fn coarse_grid_rejected() {
        let pp = ProblemParams::<f64>::new(1, 7.0).unwrap();
        let g = Grid::new(1, 20.0, 64).unwrap();
        assert!(matches!(
            solve_ground_state(pp, g, &SolverOptions::default()),
            Err(Error::GridTooCoarse { .. })
        ));
    }

    #[test]
    fn iteration_cap_reports_no_convergence() {
        let pp = ProblemParams::<f64>::new(1, 7.0).unwrap();
        let g = Grid::new(1, 20.0, 512).unwrap();
        let opts = SolverOptions { max_iterations: 3, ..SolverOptions::default() };
        assert!(matches!(solve_ground_state(pp, g, &opts), Err(Error::NoConvergence { .. })));
    }

    #[test]
    fn zero_field_has_zero_slack() {
        let pp = ProblemParams::<f64>::new(1, 7.0).unwrap();
        let g = Grid::new(1, 20.0, 64).unwrap();
        assert_eq!(gn_check(&Field::zeros(g, pp), 1.0).unwrap(), 0.0);
    }
}
