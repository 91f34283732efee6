//! Scale-invariant comparison of a field with the ground state: the energy
//! ratio, the gradient quantity η, the roots λ± of the dichotomy polynomial
//! and the resulting verdict.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::field::Field;
use crate::groundstate::GroundState;
use crate::invariants::{conserved, ConservedQuantities};
use crate::params::ProblemParams;
use crate::scalar::Real;

/// Deadband applied to the strict inequalities `η ≠ 1` and `ratio < 1`.
pub const BOUNDARY_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Verdict {
    /// `ratio < 1`, `η < 1`: global and bounded in `H¹`.
    GlobalBounded,
    /// `ratio < 1`, `η > 1`: `η(t)` stays above `λ₊` for as long as the
    /// solution exists.
    PossibleDivergence,
    /// `η` or `ratio` within [`BOUNDARY_TOL`] of one.
    BoundaryIndeterminate,
    /// `ratio ≥ 1`: outside the regime the dichotomy speaks about.
    AboveThreshold,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DichotomyReport<T> {
    pub ratio: T,
    pub eta: T,
    pub lambda_minus: Option<T>,
    pub lambda_plus: Option<T>,
    /// Set when `E(u) < 0`; `λ₋` is then reported as zero.
    pub negative_energy: bool,
    pub verdict: Verdict,
}

/// Normalized energy ratio `M(u)^{(1-s_c)/s_c} E(u) / (M(Q)^{(1-s_c)/s_c} E(Q))`.
pub fn energy_ratio<T: Real>(
    u: &ConservedQuantities<T>,
    q: &ConservedQuantities<T>,
    params: &ProblemParams<T>,
) -> T {
    (u.mass / q.mass).powf(params.mass_exponent()) * u.energy / q.energy
}

/// `η = ‖∇u‖₂‖u‖₂^{(1-s_c)/s_c} / (‖∇Q‖₂‖Q‖₂^{(1-s_c)/s_c})`.
pub fn eta_from<T: Real>(
    u: &ConservedQuantities<T>,
    q: &ConservedQuantities<T>,
    params: &ProblemParams<T>,
) -> T {
    let g = (u.grad_norm_sq / q.grad_norm_sq).sqrt();
    g * (u.mass / q.mass).powf(params.mass_exponent() / T::two())
}

pub fn eta<T: Real>(u: &Field<T>, q: &GroundState<T>) -> Result<T> {
    let cu = conserved(u)?;
    Ok(eta_from(&cu, &q.norms, u.params()))
}

fn bisect<T: Real, F: Fn(T) -> T>(g: F, mut lo: T, mut hi: T) -> T {
    // g(lo) and g(hi) have opposite signs; iterate to full precision
    let glo_pos = g(lo) > T::zero();
    for _ in 0..2000 {
        let mid = (lo + hi) / T::two();
        if mid <= lo || mid >= hi {
            break;
        }
        if (g(mid) > T::zero()) == glo_pos {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let (glo, ghi) = (g(lo).abs(), g(hi).abs());
    if glo <= ghi {
        lo
    } else {
        hi
    }
}

/// Root of `f(λ) = ratio` on `[1, ∞)`; defined for every `ratio < 1`,
/// including negative ratios.
pub fn upper_root<T: Real>(ratio: T, params: &ProblemParams<T>) -> Result<T> {
    if !ratio.is_finite() || ratio >= T::one() {
        return Err(Error::RatioOutOfRange(ratio.as_f64()));
    }
    let g = |l: T| params.dichotomy_poly(l) - ratio;
    let mut hi = T::two();
    while g(hi) >= T::zero() {
        hi = hi * T::two();
        if !hi.is_finite() {
            return Err(Error::RatioOutOfRange(ratio.as_f64()));
        }
    }
    Ok(bisect(g, T::one(), hi))
}

/// The two solutions `0 ≤ λ₋ < 1 < λ₊` of `ω₁λ² − ω₂λ^{N(p−1)/2} = ratio`.
pub fn lambda_roots<T: Real>(ratio: T, params: &ProblemParams<T>) -> Result<(T, T)> {
    if !ratio.is_finite() || ratio < T::zero() || ratio >= T::one() {
        return Err(Error::RatioOutOfRange(ratio.as_f64()));
    }
    let lower = if ratio == T::zero() {
        T::zero()
    } else {
        bisect(|l| params.dichotomy_poly(l) - ratio, T::zero(), T::one())
    };
    Ok((lower, upper_root(ratio, params)?))
}

/// Classification from precomputed conserved quantities.
pub fn classify_quantities<T: Real>(
    u: &ConservedQuantities<T>,
    q: &ConservedQuantities<T>,
    params: &ProblemParams<T>,
) -> DichotomyReport<T> {
    let ratio = energy_ratio(u, q, params);
    let eta = eta_from(u, q, params);
    let tol = T::lit(BOUNDARY_TOL);
    let negative_energy = u.energy < T::zero();
    let (lambda_minus, lambda_plus) = if ratio >= T::zero() && ratio < T::one() {
        match lambda_roots(ratio, params) {
            Ok((lo, hi)) => (Some(lo), Some(hi)),
            Err(_) => (None, None),
        }
    } else if ratio < T::zero() {
        (Some(T::zero()), upper_root(ratio, params).ok())
    } else {
        (None, None)
    };
    let verdict = if (eta - T::one()).abs() < tol || (ratio - T::one()).abs() < tol {
        Verdict::BoundaryIndeterminate
    } else if ratio >= T::one() {
        Verdict::AboveThreshold
    } else if eta < T::one() {
        Verdict::GlobalBounded
    } else {
        Verdict::PossibleDivergence
    };
    DichotomyReport { ratio, eta, lambda_minus, lambda_plus, negative_energy, verdict }
}

/// Places `u` in the global/blow-up dichotomy relative to `Q`.
pub fn classify<T: Real>(u: &Field<T>, q: &GroundState<T>) -> Result<DichotomyReport<T>> {
    u.ensure_compatible(&q.profile, "ground state")?;
    let cu = conserved(u)?;
    Ok(classify_quantities(&cu, &q.norms, u.params()))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cubic() -> ProblemParams<f64> {
        ProblemParams::new(3, 3.0).unwrap()
    }

    #[test]
    fn roots_at_zero_ratio() {
        let (lo, hi) = lambda_roots(0.0, &cubic()).unwrap();
        assert_eq!(lo, 0.0);
        assert!((hi - 1.5).abs() < 1e-12);
    }

    #[test]
    fn roots_from_cubic_factorization() {
        // 4λ³ − 6λ² + 1 = (2λ − 1)(2λ² − 2λ − 1)
        let pp = cubic();
        let (lo, hi) = lambda_roots(0.5, &pp).unwrap();
        assert!((lo - 0.5).abs() < 1e-12);
        assert!((hi - (1.0 + 3f64.sqrt()) / 2.0).abs() < 1e-12);
        assert!((pp.dichotomy_poly(lo) - 0.5).abs() < 1e-12);
        assert!((pp.dichotomy_poly(hi) - 0.5).abs() < 1e-12);
    }

    #[test]
    fn ratio_out_of_range() {
        let pp = cubic();
        assert!(matches!(lambda_roots(1.0, &pp), Err(Error::RatioOutOfRange(_))));
        assert!(matches!(lambda_roots(-0.1, &pp), Err(Error::RatioOutOfRange(_))));
        assert!(matches!(lambda_roots(f64::NAN, &pp), Err(Error::RatioOutOfRange(_))));
    }

    #[test]
    fn negative_ratio_has_upper_root() {
        let pp = cubic();
        let hi = upper_root(-4.0, &pp).unwrap();
        // 3λ² − 2λ³ = −4 at λ = 2
        assert!((hi - 2.0).abs() < 1e-12);
    }

    #[test]
    fn verdicts_from_quantities() {
        let pp = cubic();
        let q = ConservedQuantities {
            mass: 2.0,
            energy: 1.0,
            momentum: vec![0.0; 3],
            grad_norm_sq: 6.0,
            lp1_norm: 8.0,
        };
        assert_eq!(classify_quantities(&q, &q, &pp).verdict, Verdict::BoundaryIndeterminate);
        let mut big = q.clone();
        big.energy = 2.0;
        big.grad_norm_sq = 7.0;
        assert_eq!(classify_quantities(&big, &q, &pp).verdict, Verdict::AboveThreshold);
        let mut low = q.clone();
        low.energy = 0.5;
        low.grad_norm_sq = 1.0;
        let r = classify_quantities(&low, &q, &pp);
        assert_eq!(r.verdict, Verdict::GlobalBounded);
        assert!(r.lambda_minus.unwrap() < 1.0 && r.lambda_plus.unwrap() > 1.0);
        let mut neg = q.clone();
        neg.energy = -1.0;
        neg.grad_norm_sq = 20.0;
        let r = classify_quantities(&neg, &q, &pp);
        assert_eq!(r.verdict, Verdict::PossibleDivergence);
        assert!(r.negative_energy);
        assert_eq!(r.lambda_minus, Some(0.0));
        assert!(r.lambda_plus.unwrap() > 1.5);
    }
}
