use super::{Outcome, Params};
use crate::error::{CliError, Result};
use qstruct_core::cv::{
    caldeira_leggett_restructure, full_qbm_pipeline, normal_modes, transform_hamiltonian, CaldeiraLeggettModel, CouplingSign,
};
use qstruct_core::dynamics::{ohmic_model, parallel_decoherence_experiment, MAX_ENV_MODES};

const COEFFICIENT_TOL: f64 = 1e-10;
const FREQUENCY_TOL: f64 = 1e-8;
const DECOHERED_PURITY: f64 = 0.999;
const FLOOR_TOL: f64 = 1e-9;

fn model(p: &Params, n_env: usize, sign: CouplingSign) -> Result<CaldeiraLeggettModel> {
    ohmic_model(
        n_env,
        p.positive("system_mass")?,
        p.positive("system_frequency")?,
        p.positive("gamma")?,
        p.positive("omega_cut")?,
        p.positive("env_mass")?,
        sign,
    )
    .map_err(|e| CliError::Config(e.to_string()))
}

pub(super) fn restructure(p: &Params, _seed: u64) -> Result<Outcome> {
    let sign = match p.text("coupling_sign") {
        "plus" => CouplingSign::Plus,
        "minus" => CouplingSign::Minus,
        other => return Err(CliError::Config(format!("coupling_sign must be plus or minus, got {other:?}"))),
    };
    let mut sizes = Vec::new();
    for x in p.reals("sizes", None)? {
        if x.fract() != 0.0 || !(1.0..=MAX_ENV_MODES as f64).contains(&x) {
            return Err(CliError::Config(format!("sizes must be integers in 1..={MAX_ENV_MODES}, got {x}")));
        }
        sizes.push(x as usize);
    }

    let (mut coeff, mut env, mut freq) = (Vec::new(), Vec::new(), Vec::new());
    for &n in &sizes {
        let m = model(p, n, sign)?;
        let coords = m.default_coordinates();
        let direct = transform_hamiltonian(&m.hamiltonian(), &coords.lct())?;
        let restructured = caldeira_leggett_restructure(&m, &coords)?.hamiltonian();
        coeff.push((direct.quadratic() - restructured.quadratic()).abs().max());

        let pipe = full_qbm_pipeline(&m, &coords)?;
        env.push(pipe.env_coupling_residual());
        let before = normal_modes(&m.hamiltonian())?.frequencies;
        let after = normal_modes(&pipe.hamiltonian)?.frequencies;
        freq.push(before.iter().zip(&after).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max));
    }
    let worst = |v: &[f64]| v.iter().copied().fold(0.0, f64::max);
    let (c, e, f) = (worst(&coeff), worst(&env), worst(&freq));

    let mut out = Outcome::default();
    out.metric("restructure_residual", c)
        .metric("env_coupling_residual", e)
        .metric("frequency_residual", f)
        .check("coefficients_agree", c <= COEFFICIENT_TOL)
        .check("environment_decoupled", e <= COEFFICIENT_TOL)
        .check("frequencies_preserved", f <= FREQUENCY_TOL)
        .series("sizes", sizes.iter().map(|&n| n as f64).collect())
        .series("restructure_residual", coeff)
        .series("env_coupling_residual", env)
        .series("frequency_residual", freq);
    Ok(out)
}

pub(super) fn parallel_decoherence(p: &Params, _seed: u64) -> Result<Outcome> {
    let n_env = p.count("n_env", 1, MAX_ENV_MODES as i64)?;
    let m = model(p, n_env, CouplingSign::Plus)?;
    let kt = match p.optional_real("kt") {
        Some(kt) if kt >= 0.0 => kt,
        Some(kt) => return Err(CliError::Config(format!("parameter `kt` must be non-negative, got {kt}"))),
        None => 10.0 * p.positive("omega_cut")?,
    };
    let (dt, t_end) = (p.positive("dt")?, p.positive("t_end")?);
    let steps = (t_end / dt).round() as usize;
    if steps > 100_000 {
        return Err(CliError::Config(format!("t_end / dt = {steps} time points is too many")));
    }
    let times: Vec<f64> = (0..=steps).map(|i| i as f64 * dt).collect();
    let trace = parallel_decoherence_experiment(&m, &m.default_coordinates(), kt, &times)?;

    let min = |v: &[f64]| v.iter().copied().fold(f64::INFINITY, f64::min);
    let (ps, psp, floor) = (min(&trace.purity_s), min(&trace.purity_s_prime), min(&trace.symplectic_floor));
    let mut out = Outcome::default();
    out.metric("kt", kt)
        .metric("min_purity_s", ps)
        .metric("min_purity_s_prime", psp)
        .metric("initial_purity_s_prime", trace.purity_s_prime[0])
        .metric("min_symplectic_floor", floor)
        .check("s_decoheres", ps < DECOHERED_PURITY)
        .check("s_prime_decoheres", psp < DECOHERED_PURITY)
        .check("symplectic_floor", floor >= 0.5 - FLOOR_TOL)
        .series("times", trace.times)
        .series("purity_s", trace.purity_s)
        .series("purity_s_prime", trace.purity_s_prime)
        .series("position_variance_s", trace.position_variance_s)
        .series("position_variance_s_prime", trace.position_variance_s_prime)
        .series("symplectic_floor", trace.symplectic_floor);
    Ok(out)
}
