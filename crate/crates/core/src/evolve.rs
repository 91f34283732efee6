//! Strang split-step Fourier integration of `i u_t + Δu + |u|^{p−1}u = 0`
//! with conservation monitoring and blow-up detection.

use std::io::Write;

use num_complex::Complex;
use serde::Serialize;

use crate::dichotomy::eta_from;
use crate::error::{Error, Result};
use crate::field::Field;
use crate::grid::Grid;
use crate::groundstate::GroundState;
use crate::invariants::{abs_pow, conserved, ConservedQuantities};
use crate::scalar::Real;
use crate::virial::{make_cutoff, variance_unchecked, BOUNDARY_MASS_LIMIT};

/// Time integrator. Both are built from the same Strang step.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Scheme {
    /// Second-order Strang splitting.
    #[default]
    Strang,
    /// Fourth-order triple-jump composition of three Strang steps.
    TripleJump,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EvolveOptions<T> {
    pub scheme: Scheme,
    pub dt0: T,
    /// Steps forced below this are read as blow-up.
    pub dt_min: T,
    /// Cap on the nonlinear phase `dt·max|u|^{p−1}` taken in one step.
    pub cfl_nl: T,
    pub record_every: usize,
    pub t_max: T,
    /// Growth of `‖∇u‖₂` over its initial value that is read as blow-up.
    pub blowup_factor: T,
    pub track_variance: bool,
    /// Radius of the localized variance `z_R` to record, if any.
    pub cutoff_radius: Option<T>,
}

impl<T: Real> Default for EvolveOptions<T> {
    fn default() -> Self {
        Self {
            scheme: Scheme::Strang,
            dt0: T::lit(1e-3),
            dt_min: T::lit(1e-9),
            cfl_nl: T::lit(0.05),
            record_every: 20,
            t_max: T::one(),
            blowup_factor: T::lit(10.0),
            track_variance: true,
            cutoff_radius: None,
        }
    }
}

impl<T: Real> EvolveOptions<T> {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::InvalidOption(m.to_string()));
        if !(self.dt0 > T::zero() && self.dt0.is_finite()) {
            return bad("dt0 must be positive");
        }
        if !(self.dt_min > T::zero() && self.dt_min < self.dt0) {
            return bad("dt_min must lie in (0, dt0)");
        }
        if !(self.cfl_nl > T::zero() && self.cfl_nl <= T::one()) {
            return bad("cfl_nl must lie in (0, 1]");
        }
        if self.record_every == 0 {
            return bad("record_every must be at least 1");
        }
        if !(self.t_max > T::zero() && self.t_max.is_finite()) {
            return bad("t_max must be positive");
        }
        if !(self.blowup_factor > T::one()) {
            return bad("blowup_factor must exceed 1");
        }
        if let Some(r) = self.cutoff_radius {
            if !(r > T::zero()) {
                return bad("cutoff_radius must be positive");
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TrajectoryRecord<T> {
    pub t: T,
    pub conserved: ConservedQuantities<T>,
    pub eta: T,
    pub variance: Option<T>,
    #[serde(rename = "z_R")]
    pub z_r: Option<T>,
    pub dt: T,
    pub max_abs: T,
    /// Fraction of the mass beyond the half-box radius.
    pub boundary_mass: T,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "kind")]
pub enum Termination<T> {
    HorizonReached,
    BlowupDetected { t: T },
    NonFinite { t: T },
}

#[derive(Debug, Clone, Serialize)]
pub struct EvolveOutcome<T: Real> {
    #[serde(skip)]
    pub final_state: Field<T>,
    pub records: Vec<TrajectoryRecord<T>>,
    pub termination: Termination<T>,
    pub steps: usize,
    /// Largest relative mass drift over the records.
    pub mass_drift: T,
    /// Largest relative energy drift over records with `max|u|` within ten
    /// times its initial value.
    pub energy_drift: T,
    /// Largest `|P(t) − P(0)| / M(0)` over the records.
    pub momentum_drift: T,
    /// First record time at which the boundary-mass validity flag tripped.
    pub boundary_flag_time: Option<T>,
}

/// Split-step propagator with cached linear multipliers.
struct Stepper<T: Real> {
    grid: Grid<T>,
    p: T,
    k_sq: Vec<T>,
    keep: Vec<bool>,
    /// Linear multipliers for the most recent substep sizes.
    lin: Vec<(T, Vec<Complex<T>>)>,
}

impl<T: Real> Stepper<T> {
    fn new(grid: &Grid<T>, p: T) -> Self {
        let k_sq = (0..grid.len()).map(|i| grid.k_sq(i)).collect();
        let keep = (0..grid.len()).map(|i| grid.dealias_keep(i)).collect();
        Self { grid: grid.clone(), p, k_sq, keep, lin: Vec::new() }
    }

    fn nonlinear(&self, u: &mut [Complex<T>], dt: T) {
        let e = self.p - T::one();
        for v in u.iter_mut() {
            let phase = dt * abs_pow(*v, e);
            *v = *v * Complex::new(phase.cos(), phase.sin());
        }
    }

    fn multiplier(&mut self, dt: T) -> usize {
        if let Some(i) = self.lin.iter().position(|(d, _)| *d == dt) {
            return i;
        }
        let m = self
            .k_sq
            .iter()
            .map(|&k2| {
                let ph = -dt * k2;
                Complex::new(ph.cos(), ph.sin())
            })
            .collect();
        if self.lin.len() == 3 {
            self.lin.remove(0);
        }
        self.lin.push((dt, m));
        self.lin.len() - 1
    }

    fn advance(&mut self, u: &mut [Complex<T>], dt: T, scheme: Scheme) {
        match scheme {
            Scheme::Strang => self.strang(u, dt),
            Scheme::TripleJump => {
                let cbrt2 = T::two().cbrt();
                let outer = T::one() / (T::two() - cbrt2);
                let inner = -cbrt2 * outer;
                self.strang(u, outer * dt);
                self.strang(u, inner * dt);
                self.strang(u, outer * dt);
            }
        }
    }

    fn strang(&mut self, u: &mut [Complex<T>], dt: T) {
        let slot = self.multiplier(dt);
        let half = dt / T::two();
        let zero = Complex::new(T::zero(), T::zero());
        self.nonlinear(u, half);
        self.grid.forward(u);
        for ((v, &keep), m) in u.iter_mut().zip(&self.keep).zip(&self.lin[slot].1) {
            *v = if keep { *v * m } else { zero };
        }
        self.grid.inverse(u);
        self.nonlinear(u, half);
        self.grid.forward(u);
        for (v, &keep) in u.iter_mut().zip(&self.keep) {
            if !keep {
                *v = zero;
            }
        }
        self.grid.inverse(u);
    }
}

/// One Strang step: half nonlinear phase, exact linear flow, half nonlinear
/// phase, with 2/3-rule dealiasing after each nonlinear substep.
pub fn step<T: Real>(u: &Field<T>, dt: T) -> Result<Field<T>> {
    if !(dt > T::zero() && dt.is_finite()) {
        return Err(Error::InvalidOption("time step must be positive".into()));
    }
    let mut s = Stepper::new(u.grid(), u.params().p);
    let mut vals = u.values().to_vec();
    s.advance(&mut vals, dt, Scheme::Strang);
    u.with_values(vals).map_err(|_| Error::NonFinite("time step"))
}

fn max_amp<T: Real>(u: &[Complex<T>], e: T) -> T {
    u.iter().fold(T::zero(), |m, v| m.max(abs_pow(*v, e)))
}

fn all_finite<T: Real>(u: &[Complex<T>]) -> bool {
    u.iter().all(|v| v.re.is_finite() && v.im.is_finite())
}

/// Integrates from `u0` until `t_max`, detected blow-up, or a non-finite
/// state. Blow-up is declared when `‖∇u‖₂` reaches `blowup_factor` times its
/// initial value at a record, or when the adaptive step would fall below
/// `dt_min`.
pub fn evolve<T: Real>(
    u0: &Field<T>,
    opts: &EvolveOptions<T>,
    q: &GroundState<T>,
) -> Result<EvolveOutcome<T>> {
    evolve_observed(u0, opts, q, |_| {})
}

/// [`evolve`] with a callback that sees the state at every record.
pub fn evolve_observed<T: Real, F>(
    u0: &Field<T>,
    opts: &EvolveOptions<T>,
    q: &GroundState<T>,
    mut observe: F,
) -> Result<EvolveOutcome<T>>
where
    F: FnMut(&Field<T>),
{
    opts.validate()?;
    u0.ensure_compatible(&q.profile, "ground state")?;
    if !u0.is_finite() {
        return Err(Error::NonFinite("initial data"));
    }
    let grid = u0.grid().clone();
    let params = *u0.params();
    let cutoff = opts.cutoff_radius.map(|r| make_cutoff(&grid, r)).transpose()?;
    let w = grid.cell_volume();

    let make_record = |field: &Field<T>, t: T, dt: T| -> Result<TrajectoryRecord<T>> {
        let c = conserved(field)?;
        let eta = eta_from(&c, &q.norms, &params);
        let variance = opts.track_variance.then(|| variance_unchecked(field));
        let z_r = cutoff.as_ref().map(|cut| {
            field.values().iter().zip(&cut.phi).map(|(v, f)| *f * v.norm_sqr()).sum::<T>() * w
        });
        Ok(TrajectoryRecord {
            t,
            conserved: c,
            eta,
            variance,
            z_r,
            dt,
            max_abs: field.max_abs(),
            boundary_mass: field.boundary_mass_fraction(),
        })
    };

    let mut stepper = Stepper::new(&grid, params.p);
    let mut vals = u0.values().to_vec();
    let e = params.p - T::one();
    let mut records = vec![make_record(u0, T::zero(), opts.dt0)?];
    observe(u0);
    let g0 = records[0].conserved.grad_norm();
    let mut t = T::zero();
    let mut steps = 0usize;
    let mut dt = opts.dt0;
    let end_slack = opts.t_max * T::lit(1e-14);
    let termination;
    loop {
        if opts.t_max - t <= end_slack {
            termination = Termination::HorizonReached;
            break;
        }
        let amp = max_amp(&vals, e);
        dt = if amp > T::zero() { opts.dt0.min(opts.cfl_nl / amp) } else { opts.dt0 };
        if dt < opts.dt_min {
            termination = Termination::BlowupDetected { t };
            break;
        }
        let remaining = opts.t_max - t;
        let last = dt >= remaining;
        if last {
            dt = remaining;
        }
        stepper.advance(&mut vals, dt, opts.scheme);
        t = if last { opts.t_max } else { t + dt };
        steps += 1;
        if !all_finite(&vals) {
            termination = Termination::NonFinite { t };
            break;
        }
        if steps % opts.record_every == 0 {
            let field = u0.with_values_unchecked(vals.clone());
            let rec = make_record(&field, t, dt)?;
            observe(&field);
            let grown = rec.conserved.grad_norm() >= opts.blowup_factor * g0;
            records.push(rec);
            if grown {
                termination = Termination::BlowupDetected { t };
                break;
            }
        }
    }
    let final_state = u0.with_values_unchecked(vals);
    let last_t = records.last().map(|r| r.t).unwrap_or(T::zero());
    if last_t < t && final_state.is_finite() {
        records.push(make_record(&final_state, t, dt)?);
        observe(&final_state);
    }

    let first = &records[0];
    let (m0, e0) = (first.conserved.mass, first.conserved.energy);
    let p0 = first.conserved.momentum.clone();
    let amp0 = first.max_abs;
    let mut mass_drift = T::zero();
    let mut energy_drift = T::zero();
    let mut momentum_drift = T::zero();
    let mut boundary_flag_time = None;
    for r in &records {
        if m0 > T::zero() {
            mass_drift = mass_drift.max(((r.conserved.mass - m0) / m0).abs());
            let dp = r
                .conserved
                .momentum
                .iter()
                .zip(&p0)
                .map(|(a, b)| (*a - *b) * (*a - *b))
                .sum::<T>()
                .sqrt();
            momentum_drift = momentum_drift.max(dp / m0);
        }
        if r.max_abs <= T::lit(10.0) * amp0 && e0 != T::zero() {
            energy_drift = energy_drift.max(((r.conserved.energy - e0) / e0).abs());
        }
        if boundary_flag_time.is_none() && r.boundary_mass >= T::lit(BOUNDARY_MASS_LIMIT) {
            boundary_flag_time = Some(r.t);
        }
    }
    Ok(EvolveOutcome {
        final_state,
        records,
        termination,
        steps,
        mass_drift,
        energy_drift,
        momentum_drift,
        boundary_flag_time,
    })
}

fn fmt<T: Real>(x: T) -> String {
    format!("{:.16e}", x.as_f64())
}

/// Writes records as CSV:
/// `t,mass,energy,px[,py,pz],grad_norm,eta,variance,z_R,dt`. Untracked
/// columns are left empty.
pub fn write_csv<T: Real, W: Write>(records: &[TrajectoryRecord<T>], dim: usize, mut w: W) -> std::io::Result<()> {
    let axes = ["px", "py", "pz"];
    let mut header = vec!["t", "mass", "energy"];
    header.extend_from_slice(&axes[..dim]);
    header.extend_from_slice(&["grad_norm", "eta", "variance", "z_R", "dt"]);
    writeln!(w, "{}", header.join(","))?;
    for r in records {
        let mut row = vec![fmt(r.t), fmt(r.conserved.mass), fmt(r.conserved.energy)];
        row.extend(r.conserved.momentum.iter().map(|&p| fmt(p)));
        row.push(fmt(r.conserved.grad_norm()));
        row.push(fmt(r.eta));
        row.push(r.variance.map(fmt).unwrap_or_default());
        row.push(r.z_r.map(fmt).unwrap_or_default());
        row.push(fmt(r.dt));
        writeln!(w, "{}", row.join(","))?;
    }
    Ok(())
}
