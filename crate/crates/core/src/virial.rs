//! Variance and localized variance, the virial identities, the admissible
//! `(γ, R)` window and the three blow-up-time bounds.
//!
//! The bounds are stated for data normalized to `M(Q)`. Instead of
//! resampling, every quantity is carried to the normalized frame
//! `v(x) = β^{2/(p−1)} u(βx)` through its exact scaling law, so large `β`
//! costs nothing in resolution. Times in that frame are `τ = t/β²`.

use num_complex::Complex;
use serde::Serialize;

use crate::dichotomy::{classify_quantities, upper_root, Verdict};
use crate::error::{Error, Result};
use crate::field::Field;
use crate::grid::Grid;
use crate::groundstate::GroundState;
use crate::invariants::{abs_pow, conserved_with_gradient, ConservedQuantities};
use crate::params::ProblemParams;
use crate::scalar::Real;
use crate::transform::scaling_factor;

/// Mass fraction beyond the half-box radius above which non-periodic
/// weights are not trusted.
pub const BOUNDARY_MASS_LIMIT: f64 = 1e-6;

fn check_boundary<T: Real>(u: &Field<T>) -> Result<()> {
    let fraction = u.boundary_mass_fraction();
    if fraction >= T::lit(BOUNDARY_MASS_LIMIT) {
        return Err(Error::BoundaryMass {
            fraction: fraction.as_f64(),
            limit: BOUNDARY_MASS_LIMIT,
        });
    }
    Ok(())
}

pub(crate) fn variance_unchecked<T: Real>(u: &Field<T>) -> T {
    let g = u.grid();
    u.values()
        .iter()
        .enumerate()
        .map(|(i, v)| g.radius_sq(i) * v.norm_sqr())
        .sum::<T>()
        * g.cell_volume()
}

/// `∫|x|²|u|²`, with `x` measured from the box center.
pub fn variance<T: Real>(u: &Field<T>) -> Result<T> {
    check_boundary(u)?;
    Ok(variance_unchecked(u))
}

fn rate_from<T: Real>(u: &Field<T>, grad: &[Vec<Complex<T>>], weight_grad: impl Fn(usize, usize) -> T) -> T {
    let vals = u.values();
    if vals.iter().all(|v| v.im == T::zero()) {
        return T::zero();
    }
    let mut acc = T::zero();
    for (a, comp) in grad.iter().enumerate() {
        acc += vals
            .iter()
            .zip(comp)
            .enumerate()
            .map(|(i, (v, g))| weight_grad(i, a) * (v.conj() * g).im)
            .sum::<T>();
    }
    acc * u.grid().cell_volume()
}

/// `Im ∫ (x·∇u) ū`; the variance changes at four times this rate.
pub fn variance_rate<T: Real>(u: &Field<T>) -> Result<T> {
    check_boundary(u)?;
    let grad = u.grid().gradient(u.values());
    let g = u.grid();
    Ok(rate_from(u, &grad, |i, a| g.position(i)[a]))
}

/// Radial bridge `g(s)` of the cutoff, `s = |x|²`: `s` inside the unit
/// ball, zero beyond radius 2, and a degree-9 smoothstep blend in between
/// that is C⁴ at both junctions.
fn bridge(s: f64) -> [f64; 5] {
    if s <= 1.0 {
        return [s, 1.0, 0.0, 0.0, 0.0];
    }
    if s >= 4.0 {
        return [0.0; 5];
    }
    let t = (s - 1.0) / 3.0;
    let t2 = t * t;
    let t4 = t2 * t2;
    // S(t) = 126t⁵ − 420t⁶ + 540t⁷ − 315t⁸ + 70t⁹ and derivatives
    let sm = [
        t4 * t * (126.0 + t * (-420.0 + t * (540.0 + t * (-315.0 + 70.0 * t)))),
        t4 * (630.0 + t * (-2520.0 + t * (3780.0 + t * (-2520.0 + 630.0 * t)))),
        t2 * t * (2520.0 + t * (-12600.0 + t * (22680.0 + t * (-17640.0 + 5040.0 * t)))),
        t2 * (7560.0 + t * (-50400.0 + t * (113400.0 + t * (-105840.0 + 35280.0 * t)))),
        t * (15120.0 + t * (-151200.0 + t * (453600.0 + t * (-529200.0 + 211680.0 * t)))),
    ];
    // d^k/ds^k of S((s−1)/3) = S^{(k)}/3^k; g = s(1 − S)
    let d = |k: usize| sm[k] / 3f64.powi(k as i32);
    [
        s * (1.0 - d(0)),
        1.0 - d(0) - s * d(1),
        -2.0 * d(1) - s * d(2),
        -3.0 * d(2) - s * d(3),
        -4.0 * d(3) - s * d(4),
    ]
}

/// Sampled cutoff `R²φ(x/R)` and the derivatives that enter the localized
/// virial identity.
#[derive(Debug, Clone)]
pub struct CutoffProfile<T: Real> {
    pub radius: T,
    /// `R²φ(x/R)`.
    pub phi: Vec<T>,
    /// `∇[R²φ(x/R)] = R(∇φ)(x/R)`, one array per axis.
    pub grad_phi: Vec<Vec<T>>,
    /// `(Δφ)(x/R)`.
    pub lap_phi: Vec<T>,
    /// `(∂ⱼ∂ₖφ)(x/R)`, indexed `[j][k]`.
    pub hess_phi: Vec<Vec<Vec<T>>>,
    /// `R⁻²(Δ²φ)(x/R)`.
    pub bilap_phi: Vec<T>,
    grid: Grid<T>,
}

impl<T: Real> CutoffProfile<T> {
    pub fn grid(&self) -> &Grid<T> {
        &self.grid
    }
}

pub fn make_cutoff<T: Real>(grid: &Grid<T>, radius: T) -> Result<CutoffProfile<T>> {
    let limit = grid.half_len();
    if !(radius > T::zero()) {
        return Err(Error::RadiusTooSmall { radius: radius.as_f64(), minimum: 0.0 });
    }
    if T::two() * radius > limit {
        return Err(Error::RadiusTooLarge { radius: radius.as_f64(), limit: limit.as_f64() });
    }
    let dim = grid.dim();
    let nf = dim as f64;
    let r = radius.as_f64();
    let len = grid.len();
    let mut phi = vec![T::zero(); len];
    let mut grad_phi = vec![vec![T::zero(); len]; dim];
    let mut lap_phi = vec![T::zero(); len];
    let mut hess_phi = vec![vec![vec![T::zero(); len]; dim]; dim];
    let mut bilap_phi = vec![T::zero(); len];
    for i in 0..len {
        let x = grid.position(i);
        let r2 = grid.radius_sq(i);
        let y: Vec<f64> = (0..dim).map(|a| x[a].as_f64() / r).collect();
        let s = r2.as_f64() / (r * r);
        let [g0, g1, g2, g3, g4] = bridge(s);
        // exact |x|² inside the ball
        phi[i] = if s <= 1.0 { r2 } else { T::lit(r * r * g0) };
        for a in 0..dim {
            grad_phi[a][i] = T::lit(r * 2.0 * y[a] * g1);
            for b in 0..dim {
                let delta = if a == b { 2.0 * g1 } else { 0.0 };
                hess_phi[a][b][i] = T::lit(delta + 4.0 * y[a] * y[b] * g2);
            }
        }
        lap_phi[i] = T::lit(2.0 * nf * g1 + 4.0 * s * g2);
        let bl = 4.0 * nf * (nf + 2.0) * g2 + 16.0 * (nf + 2.0) * s * g3 + 16.0 * s * s * g4;
        bilap_phi[i] = T::lit(bl / (r * r));
    }
    Ok(CutoffProfile { radius, phi, grad_phi, lap_phi, hess_phi, bilap_phi, grid: grid.clone() })
}

/// Localized variance, its second derivative from the local virial identity
/// and the localization error against the global identity.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LocalVirial<T> {
    pub z_r: T,
    /// `d/dt z_R = 2 Im ∫ ū ∇(R²φ(x/R))·∇u`.
    pub z_r_prime: T,
    pub z_r_second: T,
    /// Global virial right-hand side `4N(p−1)E − (2N(p−1)−8)‖∇u‖²`.
    pub global_rhs: T,
    pub a_r: T,
    /// `R⁻²‖u‖²_{L²(|x|≥R)} + ‖u‖^{p+1}_{L^{p+1}(|x|≥R)}`; `A_R` is
    /// expected to stay below `C₁` times this.
    pub exterior_bound: T,
}

impl<T: Real> LocalVirial<T> {
    /// One-sided control `A_R ≤ C₁ · exterior_bound`. The exterior kinetic
    /// part of `A_R` is nonpositive and is not bounded by the right side.
    pub fn within(&self, c1: T) -> bool {
        self.a_r <= c1 * self.exterior_bound
    }

    /// Two-sided variant `|A_R| ≤ C₁ · exterior_bound`.
    pub fn within_abs(&self, c1: T) -> bool {
        self.a_r.abs() <= c1 * self.exterior_bound
    }
}

/// `4N(p−1)E − (2N(p−1)−8)‖∇u‖²`, the second derivative of `‖xu‖²`.
pub fn global_virial_rhs<T: Real>(c: &ConservedQuantities<T>, params: &ProblemParams<T>) -> T {
    let npm1 = params.n_pm1();
    T::lit(4.0) * npm1 * c.energy - (T::two() * npm1 - T::lit(8.0)) * c.grad_norm_sq
}

pub fn local_virial<T: Real>(u: &Field<T>, cut: &CutoffProfile<T>) -> Result<LocalVirial<T>> {
    u.grid().ensure_same(cut.grid(), "cutoff")?;
    let grid = u.grid();
    let grad = grid.gradient(u.values());
    let c = conserved_with_gradient(u, &grad)?;
    let params = u.params();
    let p = params.p;
    let w = grid.cell_volume();
    let vals = u.values();
    let dim = grid.dim();
    let r = cut.radius;
    let r2 = r * r;

    let mut z = T::zero();
    let mut hess_term = T::zero();
    let mut lap_term = T::zero();
    let mut bilap_term = T::zero();
    let mut ext_mass = T::zero();
    let mut ext_lp1 = T::zero();
    for (i, v) in vals.iter().enumerate() {
        let m = v.norm_sqr();
        let lp1 = abs_pow(*v, p + T::one());
        z += cut.phi[i] * m;
        lap_term += cut.lap_phi[i] * lp1;
        bilap_term += cut.bilap_phi[i] * m;
        for a in 0..dim {
            for b in 0..dim {
                hess_term += cut.hess_phi[a][b][i] * (grad[a][i].conj() * grad[b][i]).re;
            }
        }
        if grid.radius_sq(i) >= r2 {
            ext_mass += m;
            ext_lp1 += lp1;
        }
    }
    let z_r_prime = T::two() * rate_from(u, &grad, |i, a| cut.grad_phi[a][i]);
    let nl = T::two() * (p - T::one()) / (p + T::one());
    let z_r_second = (T::lit(4.0) * hess_term - nl * lap_term - bilap_term) * w;
    let global_rhs = global_virial_rhs(&c, params);
    let out = LocalVirial {
        z_r: z * w,
        z_r_prime,
        z_r_second,
        global_rhs,
        a_r: z_r_second - global_rhs,
        exterior_bound: (ext_mass / r2 + ext_lp1) * w,
    };
    if [out.z_r, out.z_r_prime, out.z_r_second, out.a_r].iter().any(|x| !x.is_finite()) {
        return Err(Error::NonFinite("local virial integrals"));
    }
    Ok(out)
}

/// `γ_max = min(2ω₁(2N(p−1)−8), 4N(p−1)ω₂λ₊^{(N(p−1)−4)/2} − 16ω₁)`.
pub fn gamma_window<T: Real>(lambda_plus: T, params: &ProblemParams<T>) -> Result<T> {
    if !(lambda_plus > T::one()) {
        return Err(Error::LambdaNotSupercritical(lambda_plus.as_f64()));
    }
    let npm1 = params.n_pm1();
    let first = T::two() * params.omega1 * (T::two() * npm1 - T::lit(8.0));
    let second = T::lit(4.0) * npm1 * params.omega2 * lambda_plus.powf((npm1 - T::lit(4.0)) / T::two())
        - T::lit(16.0) * params.omega1;
    Ok(first.min(second))
}

/// `−16ω₁λ² + 4N(p−1)ω₂λ^{N(p−1)/2} − γλ²`; the variance bound uses `γ = 0`.
pub fn virial_denominator<T: Real>(lambda: T, gamma: T, params: &ProblemParams<T>) -> T {
    let l2 = lambda * lambda;
    -T::lit(16.0) * params.omega1 * l2
        + T::lit(4.0) * params.n_pm1() * params.omega2 * lambda.powf(params.poly_exponent())
        - gamma * l2
}

/// Positive root of `−t²/2 + r′t + r`.
pub fn blowup_time<T: Real>(r0: T, r0_prime: T) -> T {
    r0_prime + (r0_prime * r0_prime + T::two() * r0).sqrt()
}

/// Exterior `L²` and gradient norms squared on `|x| ≥ R`. The gradient is
/// computed on the whole box and masked afterwards.
fn exterior_norms<T: Real>(u: &Field<T>, grad: &[Vec<Complex<T>>], radius: T) -> (T, T, T) {
    let grid = u.grid();
    let r2 = radius * radius;
    let p = u.params().p;
    let (mut m, mut g, mut l) = (T::zero(), T::zero(), T::zero());
    for (i, v) in u.values().iter().enumerate() {
        if grid.radius_sq(i) >= r2 {
            m += v.norm_sqr();
            l += abs_pow(*v, p + T::one());
            for comp in grad {
                g += comp[i].norm_sqr();
            }
        }
    }
    let w = grid.cell_volume();
    (m * w, g * w, l * w)
}

fn eta_exterior_from<T: Real>(mass: T, grad_sq: T, q: &GroundState<T>) -> T {
    let pp = q.params();
    let a = pp.s_c * (pp.p - T::one()) / T::two();
    let b = (T::one() - pp.s_c) * (pp.p - T::one()) / T::two();
    (mass / q.norms.mass).powf(a) * (grad_sq / q.norms.grad_norm_sq).powf(b)
}

/// `‖u‖^{s_c(p−1)}_{L²(|x|≥R)} ‖∇u‖^{(1−s_c)(p−1)}_{L²(|x|≥R)}` over the same
/// product for `Q` on the whole space.
pub fn eta_exterior<T: Real>(u: &Field<T>, q: &GroundState<T>, radius: T) -> Result<T> {
    u.ensure_compatible(&q.profile, "ground state")?;
    let grad = u.grid().gradient(u.values());
    let (m, g, _) = exterior_norms(u, &grad, radius);
    let out = eta_exterior_from(m, g, q);
    if !out.is_finite() {
        return Err(Error::NonFinite("exterior norms"));
    }
    Ok(out)
}

/// `sup_{R′ ≥ R} R′^{−2s_c} ∫_{R′≤|x|≤2R′} |u|²` over the ladder
/// `R′ = R·2^{j/4}`, `R′ ≤ L/2`.
pub fn rho_dyadic<T: Real>(u: &Field<T>, radius: T) -> Result<T> {
    if !(radius > T::zero()) {
        return Err(Error::RadiusTooSmall { radius: radius.as_f64(), minimum: 0.0 });
    }
    let grid = u.grid();
    let top = grid.half_box_radius();
    let two_sc = T::two() * u.params().s_c;
    let step = T::two().powf(T::lit(0.25));
    let mut best = T::zero();
    let mut r = radius;
    while r <= top {
        let (lo, hi) = (r * r, T::lit(4.0) * r * r);
        let ann = u
            .values()
            .iter()
            .enumerate()
            .filter(|(i, _)| {
                let s = grid.radius_sq(*i);
                s >= lo && s <= hi
            })
            .map(|(_, v)| v.norm_sqr())
            .sum::<T>()
            * grid.cell_volume();
        best = best.max(ann / r.powf(two_sc));
        r = r * step;
    }
    Ok(best)
}

/// Free constants of the localized bounds. None has a value in the theory;
/// these are configuration defaults.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LocalizationConstants<T> {
    pub c1: T,
    pub c2: T,
    pub c_gamma: T,
    pub c_q: T,
    /// Constant `C` multiplying the localized denominator.
    pub c: T,
}

impl<T: Real> Default for LocalizationConstants<T> {
    fn default() -> Self {
        Self { c1: T::lit(10.0), c2: T::one(), c_gamma: T::one(), c_q: T::one(), c: T::one() }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum BoundVariant {
    Variance,
    Localized,
    Radial,
}

/// Radial Gagliardo–Nirenberg inequality
/// `∫_{|x|≥R}|u|^{p+1} ≤ γ∫_{|x|≥R}|∇u|² + C_γC_Q/R^{2(1−s_c)}`, evaluated in
/// the normalized frame.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RadialGnReport<T> {
    pub lhs: T,
    pub rhs: T,
    pub holds: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VirialReport<T> {
    /// Scaled (local) variance at `τ = 0` in the normalized frame.
    pub r0: T,
    pub r0_prime: T,
    /// Bound in normalized time.
    pub t_b: T,
    /// Bound in the time of the original data, `β² t_b`.
    pub t_b_unscaled: T,
    pub beta: T,
    pub lambda_plus: T,
    /// Denominator multiplying the raw (local) variance, including `E(Q)`
    /// and any constant.
    pub denominator: T,
    pub gamma: Option<T>,
    pub gamma_max: Option<T>,
    /// Radius in the normalized frame.
    #[serde(rename = "R")]
    pub radius: Option<T>,
    pub variant: BoundVariant,
    /// `η_{≥R}` of the normalized data at `τ = 0`, compared against `γ`.
    pub eta_exterior: Option<T>,
    pub eta_exterior_below_gamma: Option<bool>,
    pub radial_gn: Option<RadialGnReport<T>>,
}

struct Case2<T> {
    grad: Vec<Vec<Complex<T>>>,
    lambda_plus: T,
    beta: T,
}

fn case2<T: Real>(u: &Field<T>, q: &GroundState<T>) -> Result<Case2<T>> {
    u.ensure_compatible(&q.profile, "ground state")?;
    let grad = u.grid().gradient(u.values());
    let c = conserved_with_gradient(u, &grad)?;
    let report = classify_quantities(&c, &q.norms, u.params());
    if report.verdict != Verdict::PossibleDivergence {
        return Err(Error::NotCase2(format!(
            "verdict {:?} (ratio {:e}, eta {:e})",
            report.verdict,
            report.ratio.as_f64(),
            report.eta.as_f64()
        )));
    }
    let lambda_plus = upper_root(report.ratio, u.params())?;
    let beta = scaling_factor(c.mass, q.norms.mass, u.params())?;
    Ok(Case2 { grad, lambda_plus, beta })
}

/// Exponents of `β` in the exact scaling laws of `v = β^{2/(p−1)}u(β·)`.
struct Laws<T> {
    mass: T,
    grad: T,
}

impl<T: Real> Laws<T> {
    fn new(params: &ProblemParams<T>) -> Self {
        let mass = T::two() * params.scaling_exponent() - T::of_usize(params.dim);
        Self { mass, grad: mass + T::two() }
    }
    /// Weighted second moments such as `‖xv‖²` or `z_R[v]`.
    fn moment(&self) -> T {
        self.mass - T::two()
    }
}

/// Blow-up-time bound from the scaled variance.
pub fn tb_variance<T: Real>(u: &Field<T>, q: &GroundState<T>) -> Result<VirialReport<T>> {
    let d = case2(u, q)?;
    check_boundary(u)?;
    let params = u.params();
    let raw = virial_denominator(d.lambda_plus, T::zero(), params);
    if !(raw > T::zero()) {
        return Err(Error::NegativeDenominator(raw.as_f64()));
    }
    let denominator = raw * q.norms.energy;
    let g = u.grid();
    let rate = rate_from(u, &d.grad, |i, a| g.position(i)[a]);
    let laws = Laws::new(params);
    let var_v = variance_unchecked(u) * d.beta.powf(laws.moment());
    let rate_v = rate * d.beta.powf(laws.mass);
    let r0 = var_v / denominator;
    let r0_prime = T::lit(4.0) * rate_v / denominator;
    let t_b = blowup_time(r0, r0_prime);
    Ok(VirialReport {
        r0,
        r0_prime,
        t_b,
        t_b_unscaled: d.beta * d.beta * t_b,
        beta: d.beta,
        lambda_plus: d.lambda_plus,
        denominator,
        gamma: None,
        gamma_max: None,
        radius: None,
        variant: BoundVariant::Variance,
        eta_exterior: None,
        eta_exterior_below_gamma: None,
        radial_gn: None,
    })
}

fn check_gamma<T: Real>(gamma: T, gamma_max: T) -> Result<()> {
    if !(gamma > T::zero() && gamma < gamma_max) {
        return Err(Error::GammaOutOfWindow { gamma: gamma.as_f64(), gamma_max: gamma_max.as_f64() });
    }
    Ok(())
}

struct Localized<T> {
    r0: T,
    r0_prime: T,
    raw: T,
    eta_ext: T,
    ext_grad_v: T,
    ext_lp1_v: T,
}

/// Localized variance of the normalized data with radius `R`, computed on
/// `u` with radius `βR`.
fn localized_parts<T: Real>(
    u: &Field<T>,
    q: &GroundState<T>,
    d: &Case2<T>,
    gamma: T,
    radius: T,
    scale: T,
) -> Result<Localized<T>> {
    let params = u.params();
    let raw = virial_denominator(d.lambda_plus, gamma, params);
    if !(raw > T::zero()) {
        return Err(Error::NegativeDenominator(raw.as_f64()));
    }
    let cut = make_cutoff(u.grid(), d.beta * radius)?;
    let lv = local_virial(u, &cut)?;
    let laws = Laws::new(params);
    let z_v = lv.z_r * d.beta.powf(laws.moment());
    let zp_v = lv.z_r_prime * d.beta.powf(laws.mass);
    let den = scale * q.norms.energy * raw;
    let (m, g, l) = exterior_norms(u, &d.grad, d.beta * radius);
    let m_v = m * d.beta.powf(laws.mass);
    let g_v = g * d.beta.powf(laws.grad);
    let l_v = l * d.beta.powf(laws.grad);
    Ok(Localized {
        r0: z_v / den,
        r0_prime: zp_v / den,
        raw,
        eta_ext: eta_exterior_from(m_v, g_v, q),
        ext_grad_v: g_v,
        ext_lp1_v: l_v,
    })
}

/// Blow-up-time bound from the localized variance.
pub fn tb_localized<T: Real>(
    u: &Field<T>,
    q: &GroundState<T>,
    gamma: T,
    radius: T,
    consts: &LocalizationConstants<T>,
) -> Result<VirialReport<T>> {
    let d = case2(u, q)?;
    let gamma_max = gamma_window(d.lambda_plus, u.params())?;
    check_gamma(gamma, gamma_max)?;
    let minimum = consts.c2 / gamma.sqrt();
    if radius < minimum {
        return Err(Error::RadiusTooSmall { radius: radius.as_f64(), minimum: minimum.as_f64() });
    }
    let parts = localized_parts(u, q, &d, gamma, radius, consts.c)?;
    Ok(VirialReport {
        r0: parts.r0,
        r0_prime: parts.r0_prime,
        t_b: blowup_time(parts.r0, parts.r0_prime),
        t_b_unscaled: d.beta * d.beta * blowup_time(parts.r0, parts.r0_prime),
        beta: d.beta,
        lambda_plus: d.lambda_plus,
        denominator: consts.c * q.norms.energy * parts.raw,
        gamma: Some(gamma),
        gamma_max: Some(gamma_max),
        radius: Some(radius),
        variant: BoundVariant::Localized,
        eta_exterior: Some(parts.eta_ext),
        eta_exterior_below_gamma: Some(parts.eta_ext <= gamma),
        radial_gn: None,
    })
}

/// Largest relative deviation of `u` from its images under coordinate
/// reflections and permutations of the grid about its center.
pub fn radial_asymmetry<T: Real>(u: &Field<T>) -> T {
    let grid = u.grid();
    let n = grid.points();
    let dim = grid.dim();
    let peak = u.max_abs();
    if peak == T::zero() {
        return T::zero();
    }
    // index n/2 is the origin; index 0 (x = −L) has no mirror partner
    let mirror = |m: usize| if m == 0 { 0 } else { n - m };
    let perms: &[[usize; 3]] = match dim {
        1 => &[[0, 1, 2]],
        2 => &[[0, 1, 2], [1, 0, 2]],
        _ => &[[0, 1, 2], [0, 2, 1], [1, 0, 2], [1, 2, 0], [2, 0, 1], [2, 1, 0]],
    };
    let mut worst = T::zero();
    for (flat, v) in u.values().iter().enumerate() {
        let idx = grid.unravel(flat);
        for perm in perms {
            for signs in 0..(1usize << dim) {
                let mut img = [0usize; 3];
                for a in 0..dim {
                    let m = idx[perm[a]];
                    img[a] = if signs >> a & 1 == 1 { mirror(m) } else { m };
                }
                let w = u.values()[grid.ravel(img)];
                worst = worst.max((*v - w).norm());
            }
        }
    }
    worst / peak
}

pub const RADIAL_TOL: f64 = 1e-8;

/// Blow-up-time bound for radial data, with the radial GN inequality
/// reported as a checkable statement.
pub fn tb_radial<T: Real>(
    u: &Field<T>,
    q: &GroundState<T>,
    gamma: T,
    radius: T,
    consts: &LocalizationConstants<T>,
) -> Result<VirialReport<T>> {
    let asym = radial_asymmetry(u);
    if !(asym < T::lit(RADIAL_TOL)) {
        return Err(Error::NotRadial(asym.as_f64()));
    }
    let d = case2(u, q)?;
    let params = u.params();
    let gamma_max = gamma_window(d.lambda_plus, params)?;
    check_gamma(gamma, gamma_max)?;
    let raw = virial_denominator(d.lambda_plus, gamma, params);
    let one_minus = T::one() - params.s_c;
    let from_gamma = T::one() / gamma.sqrt();
    let from_gn = (T::two() * consts.c_gamma / raw).powf(T::one() / (T::two() * one_minus));
    let minimum = from_gamma.max(from_gn);
    if !(radius > minimum) {
        return Err(Error::RadiusTooSmall { radius: radius.as_f64(), minimum: minimum.as_f64() });
    }
    let c_tilde = T::two() * consts.c_q;
    let parts = localized_parts(u, q, &d, gamma, radius, c_tilde)?;
    let lhs = parts.ext_lp1_v;
    let rhs = gamma * parts.ext_grad_v
        + consts.c_gamma * consts.c_q / radius.powf(T::two() * one_minus);
    let t_b = blowup_time(parts.r0, parts.r0_prime);
    Ok(VirialReport {
        r0: parts.r0,
        r0_prime: parts.r0_prime,
        t_b,
        t_b_unscaled: d.beta * d.beta * t_b,
        beta: d.beta,
        lambda_plus: d.lambda_plus,
        denominator: c_tilde * q.norms.energy * raw,
        gamma: Some(gamma),
        gamma_max: Some(gamma_max),
        radius: Some(radius),
        variant: BoundVariant::Radial,
        eta_exterior: Some(parts.eta_ext),
        eta_exterior_below_gamma: Some(parts.eta_ext <= gamma),
        radial_gn: Some(RadialGnReport { lhs, rhs, holds: lhs <= rhs }),
    })
}

/// Scaled variance `r(τ) = β^{2a−N−2}‖xu(t)‖² / D` with `τ = t/β²`, from a
/// series of `(t, ‖xu(t)‖²)` samples.
pub fn scaled_variance_series<T: Real>(
    samples: &[(T, T)],
    params: &ProblemParams<T>,
    beta: T,
    denominator: T,
) -> Vec<(T, T)> {
    let k = Laws::new(params).moment();
    let scale = beta.powf(k) / denominator;
    samples.iter().map(|&(t, v)| (t / (beta * beta), v * scale)).collect()
}

/// Centered second differences on a possibly nonuniform grid, reported at
/// the interior abscissae.
pub fn second_differences<T: Real>(series: &[(T, T)]) -> Vec<(T, T)> {
    series
        .windows(3)
        .filter_map(|w| {
            let (t0, y0) = w[0];
            let (t1, y1) = w[1];
            let (t2, y2) = w[2];
            let (h0, h1) = (t1 - t0, t2 - t1);
            if !(h0 > T::zero() && h1 > T::zero()) {
                return None;
            }
            let d = T::two() * (h0 * y2 - (h0 + h1) * y1 + h1 * y0) / (h0 * h1 * (h0 + h1));
            Some((t1, d))
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bridge_matches_at_junctions() {
        let lo = bridge(1.0 + 1e-9);
        let hi = bridge(4.0 - 1e-9);
        let want_lo = [1.0, 1.0, 0.0, 0.0, 0.0];
        for k in 0..5 {
            assert!((lo[k] - want_lo[k]).abs() < 1e-6, "{k}: {}", lo[k]);
            assert!(hi[k].abs() < 1e-6, "{k}: {}", hi[k]);
        }
    }

    #[test]
    fn bridge_derivatives_consistent() {
        // finite differences of each derivative reproduce the next
        for &s in &[1.3, 2.0, 2.7, 3.5] {
            let h = 1e-5;
            let (a, b) = (bridge(s - h), bridge(s + h));
            let c = bridge(s);
            for k in 0..4 {
                let fd = (b[k] - a[k]) / (2.0 * h);
                assert!((fd - c[k + 1]).abs() < 1e-4 * (1.0 + c[k + 1].abs()), "s={s} k={k}");
            }
        }
    }

    #[test]
    fn gamma_window_arithmetic() {
        let pp = ProblemParams::<f64>::new(3, 3.0).unwrap();
        assert!((gamma_window(1.5, &pp).unwrap() - 24.0).abs() < 1e-12);
        assert!(gamma_window(1.0 + 1e-9, &pp).unwrap() < 1e-6);
        assert!(matches!(gamma_window(1.0, &pp), Err(Error::LambdaNotSupercritical(_))));
    }

    #[test]
    fn root_of_quadratic() {
        for &(r, rp) in &[(1.0, 0.0), (0.3, -2.0), (2.0, 1.5)] {
            let t: f64 = blowup_time(r, rp);
            assert!((-t * t / 2.0 + rp * t + r).abs() < 1e-12);
            assert!(t > 0.0);
        }
    }

    #[test]
    fn second_difference_of_parabola() {
        let s: Vec<(f64, f64)> = [0.0, 0.1, 0.25, 0.3, 0.7]
            .iter()
            .map(|&t| (t, 1.0 + 2.0 * t - 0.5 * t * t))
            .collect();
        for (_, d) in second_differences(&s) {
            assert!((d + 1.0).abs() < 1e-12);
        }
    }
}
