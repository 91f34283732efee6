//! Distance from a field to the orbit `e^{iθ}λ^{N/2}Q(λ(· − x₀))` and the
//! hypotheses under which that distance is controlled.

use num_complex::Complex;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::field::Field;
use crate::groundstate::{width_estimate, GroundState};
use crate::invariants::conserved;
use crate::scalar::Real;
use crate::transform::{dilated, l2_rescale, scaling_factor};

/// Relative mass mismatch tolerated by [`hypotheses_check`].
pub const MASS_MATCH_TOL: f64 = 1e-6;

/// Whether `u` (with `M(u) = M(Q)`) satisfies the energy and gradient
/// closeness conditions at scale `λ` and tolerance `ρ`.
pub fn hypotheses_check<T: Real>(u: &Field<T>, q: &GroundState<T>, lambda: T, rho: T) -> Result<(bool, bool)> {
    u.ensure_compatible(&q.profile, "ground state")?;
    let c = conserved(u)?;
    let target = q.norms.mass;
    if !(((c.mass - target) / target).abs() <= T::lit(MASS_MATCH_TOL)) {
        return Err(Error::MassMismatch { mass: c.mass.as_f64(), target: target.as_f64() });
    }
    if !(lambda > T::zero()) || !(rho >= T::zero()) {
        return Err(Error::InvalidOption("lambda must be positive and rho nonnegative".into()));
    }
    let pp = u.params();
    let k = pp.poly_exponent();
    let energy_gap = (c.energy / q.norms.energy - pp.dichotomy_poly(lambda)).abs();
    let energy_ok = energy_gap <= rho * lambda.powf(k);
    let grad_gap = (c.grad_norm() / q.norms.grad_norm() - lambda).abs();
    let scale = if lambda >= T::one() { lambda } else { lambda * lambda };
    Ok((energy_ok, grad_gap <= rho * scale))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ModulationFit<T> {
    /// Phase in `[0, 2π)`.
    pub theta: T,
    pub x0: Vec<T>,
    pub lambda: T,
    pub dist_l2: T,
    pub dist_h1dot: T,
}

/// Cross-correlation `C(s) = ⟨u, ψ(· − s)⟩` as a trigonometric polynomial in
/// the shift `s`, with its first and second derivatives.
struct Correlation<T: Real> {
    coef: Vec<Complex<T>>,
    k: Vec<[T; 3]>,
    dim: usize,
}

impl<T: Real> Correlation<T> {
    fn new(u: &Field<T>, template: &[Complex<T>]) -> (Self, Vec<Complex<T>>) {
        let grid = u.grid();
        let mut uh = u.values().to_vec();
        let mut th = template.to_vec();
        grid.forward(&mut uh);
        grid.forward(&mut th);
        let scale = grid.cell_volume() / T::of_usize(grid.len());
        let n = grid.points();
        let nyq = grid.wavenumbers()[n / 2];
        let mut coef = Vec::with_capacity(uh.len());
        let mut k = Vec::with_capacity(uh.len());
        let mut prod = Vec::with_capacity(uh.len());
        for (i, (a, b)) in uh.iter().zip(&th).enumerate() {
            let c = *a * b.conj();
            prod.push(c);
            let kv = grid.wavevector(i);
            // shifts are ambiguous on the Nyquist mode
            let on_nyq = (0..grid.dim()).any(|d| kv[d] == nyq);
            coef.push(if on_nyq { Complex::new(T::zero(), T::zero()) } else { c * scale });
            k.push(kv);
        }
        // sampled correlation on the grid of shifts
        grid.inverse(&mut prod);
        let w = grid.cell_volume();
        for v in prod.iter_mut() {
            *v = *v * w;
        }
        (Self { coef, k, dim: grid.dim() }, prod)
    }

    /// `C(s)`, `∂C/∂s_j`, `∂²C/∂s_j∂s_l`.
    fn eval(&self, s: &[T; 3]) -> (Complex<T>, [Complex<T>; 3], [[Complex<T>; 3]; 3]) {
        let zero = Complex::new(T::zero(), T::zero());
        let mut c = zero;
        let mut d1 = [zero; 3];
        let mut d2 = [[zero; 3]; 3];
        for (a, k) in self.coef.iter().zip(&self.k) {
            if a.re == T::zero() && a.im == T::zero() {
                continue;
            }
            let ph = (0..self.dim).map(|j| k[j] * s[j]).sum::<T>();
            let term = *a * Complex::new(ph.cos(), ph.sin());
            c += term;
            for j in 0..self.dim {
                d1[j] += term * Complex::new(T::zero(), k[j]);
                for l in 0..self.dim {
                    d2[j][l] += term * (-k[j] * k[l]);
                }
            }
        }
        (c, d1, d2)
    }
}

fn solve_small<T: Real>(m: [[T; 3]; 3], b: [T; 3], dim: usize) -> Option<[T; 3]> {
    // Gaussian elimination with partial pivoting on the leading block
    let mut a = m;
    let mut r = b;
    for col in 0..dim {
        let piv = (col..dim).max_by(|&i, &j| a[i][col].abs().partial_cmp(&a[j][col].abs()).unwrap())?;
        if a[piv][col].abs() == T::zero() {
            return None;
        }
        a.swap(col, piv);
        r.swap(col, piv);
        for row in col + 1..dim {
            let f = a[row][col] / a[col][col];
            for c in col..dim {
                let v = a[col][c];
                a[row][c] -= f * v;
            }
            let v = r[col];
            r[row] -= f * v;
        }
    }
    let mut x = [T::zero(); 3];
    for col in (0..dim).rev() {
        let mut acc = r[col];
        for c in col + 1..dim {
            acc -= a[col][c] * x[c];
        }
        x[col] = acc / a[col][col];
    }
    Some(x)
}

/// Fits `e^{iθ}ψ(· − x₀)` to `u` for a fixed template `ψ` on the same grid.
pub fn fit_template<T: Real>(u: &Field<T>, template: &Field<T>, lambda: T) -> Result<ModulationFit<T>> {
    u.ensure_compatible(template, "template")?;
    let grid = u.grid();
    let dim = grid.dim();
    let n = grid.points();
    let h = grid.spacing();
    let (corr, sampled) = Correlation::new(u, template.values());

    // coarse peak over grid shifts
    let (best, _) = sampled
        .iter()
        .enumerate()
        .fold((0usize, T::neg_infinity()), |acc, (i, v)| {
            let m = v.norm_sqr();
            if m > acc.1 {
                (i, m)
            } else {
                acc
            }
        });
    let idx = grid.unravel(best);
    let signed = |m: usize| if m < n / 2 { T::of_usize(m) } else { -T::of_usize(n - m) };
    let mut s = [T::zero(); 3];
    for a in 0..dim {
        // parabolic refinement along each axis
        let mut lo = idx;
        let mut hi = idx;
        lo[a] = (idx[a] + n - 1) % n;
        hi[a] = (idx[a] + 1) % n;
        let f0 = sampled[best].norm_sqr();
        let fm = sampled[grid.ravel(lo)].norm_sqr();
        let fp = sampled[grid.ravel(hi)].norm_sqr();
        let den = fm - T::two() * f0 + fp;
        let off = if den < T::zero() { (fm - fp) / (T::two() * den) } else { T::zero() };
        let off = off.max(-T::half()).min(T::half());
        s[a] = (signed(idx[a]) + off) * h;
    }

    // Newton on |C(s)|² with spectral derivatives
    for _ in 0..30 {
        let (c, d1, d2) = corr.eval(&s);
        let mut g = [T::zero(); 3];
        let mut hess = [[T::zero(); 3]; 3];
        for j in 0..dim {
            g[j] = T::two() * (c.conj() * d1[j]).re;
            for l in 0..dim {
                hess[j][l] = T::two() * ((d1[j].conj() * d1[l]).re + (c.conj() * d2[j][l]).re);
            }
        }
        let Some(delta) = solve_small(hess, g, dim) else { break };
        let size = (0..dim).map(|j| delta[j] * delta[j]).sum::<T>().sqrt();
        if !size.is_finite() || size > h {
            break;
        }
        for j in 0..dim {
            s[j] -= delta[j];
        }
        if size < T::lit(1e-15) * grid.half_len() {
            break;
        }
    }
    let (c, _, _) = corr.eval(&s);
    let tau = T::two() * T::PI();
    let mut theta = c.im.atan2(c.re);
    if theta < T::zero() {
        theta += tau;
    }
    if theta >= tau {
        theta -= tau;
    }

    let fitted = template.translated(s).rotated(theta);
    let diff: Vec<Complex<T>> = u.values().iter().zip(fitted.values()).map(|(a, b)| *a - *b).collect();
    let w = grid.cell_volume();
    let dist_l2 = (diff.iter().map(|v| v.norm_sqr()).sum::<T>() * w).sqrt();
    let grad = grid.gradient(&diff);
    let dist_h1dot =
        (grad.iter().flat_map(|comp| comp.iter()).map(|v| v.norm_sqr()).sum::<T>() * w).sqrt();
    Ok(ModulationFit { theta, x0: s[..dim].to_vec(), lambda, dist_l2, dist_h1dot })
}

fn check_resolved<T: Real>(q: &GroundState<T>, lambda: T) -> Result<()> {
    let width = width_estimate(q.params(), q.frequency);
    let cells = width / (lambda * q.grid().spacing());
    if !(cells >= T::lit(4.0)) {
        return Err(Error::ScaleUnresolvable { cells: cells.as_f64() });
    }
    Ok(())
}

/// Minimizes `‖u − e^{iθ}λ^{N/2}Q(λ(· − x₀))‖₂` over `(θ, x₀)`.
pub fn fit<T: Real>(u: &Field<T>, q: &GroundState<T>, lambda: T) -> Result<ModulationFit<T>> {
    if !(lambda > T::zero()) {
        return Err(Error::InvalidOption("lambda must be positive".into()));
    }
    check_resolved(q, lambda)?;
    u.ensure_compatible(&q.profile, "ground state")?;
    let template = l2_rescale(&q.profile, lambda);
    fit_template(u, &template, lambda)
}

/// Fit of data with arbitrary mass, expressed in the original frame.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct UnscaledFit<T> {
    /// Fit of the mass-normalized data `v`.
    pub normalized: ModulationFit<T>,
    pub beta: T,
    /// Center of the fitted profile in the original frame, `β x₀`.
    pub x0: Vec<T>,
    /// `β^{N/2 − 2/(p−1)}` times the normalized L² distance.
    pub dist_l2: T,
    /// `β^{N/2 − 2/(p−1) − 1}` times the normalized Ḣ¹ distance.
    pub dist_h1dot: T,
}

/// Rescales `u` to `M(Q)`, fits, and carries the distances back with the
/// `β` factors of the unscaled statement.
pub fn fit_unscaled<T: Real>(u: &Field<T>, q: &GroundState<T>, lambda: T) -> Result<UnscaledFit<T>> {
    u.ensure_compatible(&q.profile, "ground state")?;
    let beta = scaling_factor(u.mass(), q.norms.mass, u.params())?;
    let v = crate::transform::mass_rescale(u, q)?;
    let normalized = fit(&v, q, lambda)?;
    let e = T::of_usize(u.grid().dim()) / T::two() - u.params().scaling_exponent();
    Ok(UnscaledFit {
        beta,
        x0: normalized.x0.iter().map(|&x| beta * x).collect(),
        dist_l2: beta.powf(e) * normalized.dist_l2,
        dist_h1dot: beta.powf(e - T::one()) * normalized.dist_h1dot,
        normalized,
    })
}

/// Unscaled orbit element `λ^{N/2}β^{−2/(p−1)}Q(λx/β)` centered at the origin.
pub fn unscaled_template<T: Real>(q: &GroundState<T>, lambda: T, beta: T) -> Field<T> {
    let half_n = T::of_usize(q.grid().dim()) / T::two();
    let amp = lambda.powf(half_n) * beta.powf(-q.params().scaling_exponent());
    dilated(&q.profile, lambda / beta, amp)
}
