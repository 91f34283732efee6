//! Cubic NLS in three dimensions on one shared 128³ ground state.

mod common;

use std::sync::OnceLock;

use common::rel;
use nls_virial_core::dichotomy::eta;
use nls_virial_core::transform::{mass_rescale_with, scaling_factor, RescaleOptions};
use nls_virial_core::*;

fn cubic() -> &'static GroundState<f64> {
    static Q: OnceLock<GroundState<f64>> = OnceLock::new();
    Q.get_or_init(|| common::ground_state(3, 3.0, 13.0, 128))
}

#[test]
fn pohozaev_and_energy_coefficient() {
    let q = cubic();
    assert!(q.pohozaev().max() < 1e-6, "{:?}", q.pohozaev());
    assert!(rel(q.norms.energy, q.norms.grad_norm_sq / 6.0) < 1e-6);
}

#[test]
fn half_ground_state_is_global() {
    let q = cubic();
    let r = classify(&q.profile.scaled(0.5), q).unwrap();
    assert_eq!(r.verdict, Verdict::GlobalBounded);
    assert!(rel(r.eta, 0.25) < 1e-10);
}

#[test]
fn supercritical_scaled_ground_state() {
    let q = cubic();
    let r = classify(&q.profile.scaled(1.2), q).unwrap();
    assert_eq!(r.verdict, Verdict::PossibleDivergence);
    assert!(rel(r.ratio, 0.248832) < 1e-6, "{}", r.ratio);
    assert!(rel(r.eta, 1.44) < 1e-10);
}

#[test]
fn mass_rescale_of_doubled_ground_state() {
    let q = cubic();
    let u = q.profile.scaled(2.0);
    let beta = scaling_factor(u.mass(), q.norms.mass, u.params()).unwrap();
    assert!(rel(beta, 4.0) < 1e-12);
    // v = 4·u(4x) is four times narrower than Q and cannot live on Q's grid
    let err = mass_rescale(&u, q).unwrap_err();
    assert!(matches!(err, Error::AliasRisk { .. } | Error::ResampleLoss(_)), "{err:?}");
    // on the 4× finer grid the samples of v are those of u, times β
    let fine = Grid::new(3, 13.0 / 4.0, 128).unwrap();
    let v = Field::new(u.values().iter().map(|z| z * beta).collect(), fine, *u.params()).unwrap();
    assert!(rel(v.mass(), q.norms.mass) < 1e-12);
    assert!(rel(eta(&v, q).unwrap(), eta(&u, q).unwrap()) < 1e-10);
    let loose = RescaleOptions { min_points_per_width: 0.0, mass_tolerance: 1.0 };
    let coarse = mass_rescale_with(&u, q, &loose).unwrap();
    assert!(rel(coarse.mass(), q.norms.mass) > 1e-3);
}
