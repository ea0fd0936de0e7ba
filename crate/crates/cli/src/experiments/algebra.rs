use super::{Outcome, Params};
use crate::error::Result;
use qstruct_core::linalg::{self, c, CMat};
use qstruct_core::second_quant::{
    bogoliubov_apply, build_fock_ops, car_residual, fermion_fourier, holstein_primakoff, jordan_wigner, BogoliubovSpec,
    ModeSet, BOGOLIUBOV_TOL,
};
use qstruct_core::Error;

const CAR_TOL: f64 = 1e-12;
/// `√n·√n` need not round to `n`, so the truncated commutator is checked to
/// a few ulps rather than bit-for-bit.
const COMMUTATOR_TOL: f64 = 1e-13;

fn invalid_specs() -> Vec<(usize, BogoliubovSpec)> {
    let z = |x: f64| c(x, 0.0);
    vec![
        (1, BogoliubovSpec::Single { u: z(1.0), v: z(0.5) }),
        (1, BogoliubovSpec::Single { u: z(0.5), v: z(0.0) }),
        (1, BogoliubovSpec::Single { u: c(0.0, 1.2), v: z(0.6) }),
        (2, BogoliubovSpec::Multi { u: linalg::identity(2).scale(1.1), v: CMat::zeros(2, 2) }),
    ]
}

/// Largest deviation of `σ = 2S` from `σ_i² = I` and `σ_iσ_j = iε_ijk σ_k`.
fn pauli_residual(sx: &CMat, sy: &CMat, sz: &CMat) -> f64 {
    let two = c(2.0, 0.0);
    let (x, y, z) = (sx * two, sy * two, sz * two);
    let id = linalg::identity(2);
    let i = c(0.0, 1.0);
    [
        &x * &x - &id,
        &y * &y - &id,
        &z * &z - &id,
        &x * &y - &z * i,
        &y * &z - &x * i,
        &z * &x - &y * i,
    ]
    .iter()
    .map(linalg::max_abs)
    .fold(0.0, f64::max)
}

pub(super) fn supplement_algebra(p: &Params, _seed: u64) -> Result<Outcome> {
    let sites = p.count("sites", 1, 10)?;
    let d = p.count("fock_dim", 2, 64)?;

    let jw = car_residual(&jordan_wigner(sites)?);
    let fourier = car_residual(&fermion_fourier(sites)?.modes);

    let mut rejected = 0usize;
    let specs = invalid_specs();
    for (modes, spec) in &specs {
        if matches!(bogoliubov_apply(&ModeSet::bosons(*modes, d), spec), Err(Error::InvalidSpec(_))) {
            rejected += 1;
        }
    }
    let valid = bogoliubov_apply(&ModeSet::bosons(1, d), &BogoliubovSpec::squeeze(0.4, 0.3, -0.2))?;

    let hp = holstein_primakoff(0.5, 2, 1.0)?;
    let pauli = pauli_residual(&hp.sx(), &hp.sy(), &hp.sz);
    let raising = linalg::max_abs(&(linalg::commutator(&hp.sz, &hp.s_plus) - &hp.s_plus));

    let ops = build_fock_ops(d);
    let mut expected = linalg::identity(d);
    expected[(d - 1, d - 1)] = c(-((d - 1) as f64), 0.0);
    let truncated = linalg::max_abs(&(ops.commutator() - expected));

    let mut out = Outcome::default();
    out.metric("jw_car_residual", jw)
        .metric("fourier_car_residual", fourier)
        .metric("bogoliubov_invalid_rejected", rejected as f64)
        .metric("bogoliubov_invalid_total", specs.len() as f64)
        .metric("bogoliubov_valid_residual", valid.mixed_residual)
        .metric("hp_pauli_residual", pauli)
        .metric("hp_raising_residual", raising)
        .metric("truncated_commutator_residual", truncated)
        .check("jw_car", jw < CAR_TOL)
        .check("fourier_car", fourier < CAR_TOL)
        .check("bogoliubov_rejects_invalid", rejected == specs.len() && valid.mixed_residual <= BOGOLIUBOV_TOL)
        .check("hp_pauli_exact", pauli == 0.0 && raising == 0.0)
        .check("truncated_commutator", truncated <= COMMUTATOR_TOL);
    Ok(out)
}
