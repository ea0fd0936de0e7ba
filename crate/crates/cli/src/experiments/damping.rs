use super::{pair, Outcome, Params};
use crate::error::{CliError, Result};
use qstruct_core::dynamics::{
    apply_channel, asymptotic_uncertainty, cat_coherence_decay, coherent_state, covariance_asymptotic, heisenberg_moments,
    preferred_structure_scan, simulate_two_mode, AltCoefficients, ModePair, Moments, QbmMaster,
};
use qstruct_core::linalg;
use qstruct_core::tensor::DensityMatrix;
use qstruct_core::C64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

const MOMENT_TOL: f64 = 1e-8;
const LATE_UNCERTAINTY_TOL: f64 = 1e-4;
const FLOOR_TOL: f64 = 1e-9;
const SIMULATION_TOL: f64 = 1e-3;
const SCALING_TOL: f64 = 0.05;

pub(super) fn amplitude_damping(p: &Params, _seed: u64) -> Result<Outcome> {
    let dim = p.count("dim", 2, 400)?;
    let (mass, omega, k) = (p.positive("mass")?, p.positive("omega")?, p.positive("k")?);
    let times = p.reals("times", None)?;
    let late_t = p.positive("late_kt")? / k;

    let psi = coherent_state(C64::new(p.real("alpha"), 0.0), dim);
    let rho = DensityMatrix::new(linalg::projector(&psi))?;
    let initial = Moments::from_density(rho.matrix(), mass, omega);

    let mut worst = 0.0_f64;
    let mut products = Vec::with_capacity(times.len());
    for &t in &times {
        let got = Moments::from_density(apply_channel(&rho, k, t)?.matrix(), mass, omega);
        let want = heisenberg_moments(&initial, mass, omega, k, t);
        for (a, b) in [(got.x, want.x), (got.p, want.p), (got.x2, want.x2), (got.p2, want.p2), (got.xp, want.xp)] {
            worst = worst.max((a - b).abs());
        }
        products.push(got.uncertainty_product());
    }
    let late = Moments::from_density(apply_channel(&rho, k, late_t)?.matrix(), mass, omega).uncertainty_product();

    let mut out = Outcome::default();
    out.metric("moment_error_max", worst)
        .metric("late_uncertainty_product", late)
        .metric("late_uncertainty_error", (late - 0.5).abs())
        .check("moments_match", worst <= MOMENT_TOL)
        .check("late_minimum_uncertainty", (late - 0.5).abs() <= LATE_UNCERTAINTY_TOL)
        .series("times", times)
        .series("uncertainty_product", products);
    Ok(out)
}

fn mode_pair(p: &Params) -> Result<ModePair> {
    let masses = p.reals("masses", Some(2))?;
    let omegas = p.reals("omegas", Some(2))?;
    let damping = p.reals("damping", Some(2))?;
    ModePair::new(pair(&masses), pair(&omegas), pair(&damping)).map_err(|e| CliError::Config(e.to_string()))
}

fn resonant(pair: &ModePair) -> bool {
    pair.mass[0] == pair.mass[1] && pair.omega[0] == pair.omega[1]
}

pub(super) fn two_mode_asymptotics(p: &Params, seed: u64) -> Result<Outcome> {
    let pair = mode_pair(p)?;
    let dim = p.count("dim", 2, 24)?;
    let a = p.reals("alphas", Some(4))?;
    let t = p.positive("kt")? / pair.damping[0].min(pair.damping[1]);
    let mode = p.text("coefficients");
    let coeffs: Vec<AltCoefficients> = match mode {
        "random" => {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            (0..p.count("samples", 1, 10_000)?).map(|_| AltCoefficients::random(&mut rng)).collect()
        }
        "cm-relative" => vec![AltCoefficients::cm_relative()],
        "identity" => vec![AltCoefficients::identity()],
        other => {
            return Err(CliError::Config(format!(
                "coefficients must be random, cm-relative or identity, got {other:?}"
            )))
        }
    };

    let run = simulate_two_mode(&pair, [C64::new(a[0], a[1]), C64::new(a[2], a[3])], dim, t)?;
    let mut product_err = 0.0_f64;
    let mut cov_err = 0.0_f64;
    let mut min_product = f64::INFINITY;
    let mut closed = Vec::with_capacity(coeffs.len());
    for c in &coeffs {
        let (pa, pb) = asymptotic_uncertainty(&pair, c)?;
        let cinf = covariance_asymptotic(&pair, c)?;
        let (sa, sb, scov) = run.moments.structure_moments(c);
        product_err = product_err.max((sa - pa).abs()).max((sb - pb).abs());
        cov_err = cov_err.max((scov - cinf).abs());
        min_product = min_product.min(pa).min(pb);
        closed.push((pa, pb, cinf));
    }

    let mut out = Outcome::default();
    out.metric("samples", coeffs.len() as f64)
        .metric("simulated_time", t)
        .metric("max_product_error", product_err)
        .metric("max_covariance_error", cov_err)
        .metric("min_product", min_product)
        .check("uncertainty_floor", min_product >= 0.5 - FLOOR_TOL)
        .check("simulation_agrees", product_err <= SIMULATION_TOL && cov_err <= SIMULATION_TOL);
    if mode != "random" {
        let (pa, pb, cinf) = closed[0];
        out.metric("product_a", pa).metric("product_b", pb).metric("C_infinity", cinf);
        if resonant(&pair) {
            let attained = (pa - 0.5).abs() <= FLOOR_TOL && (pb - 0.5).abs() <= FLOOR_TOL && cinf.abs() <= FLOOR_TOL;
            out.check("floor_attained", attained);
        }
    }
    Ok(out)
}

pub(super) fn preferred_structure(p: &Params, seed: u64) -> Result<Outcome> {
    let pair = mode_pair(p)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut candidates = vec![("cm-relative".to_string(), AltCoefficients::cm_relative())];
    for i in 0..p.count("candidates", 0, 1000)? {
        candidates.push((format!("random-{i:03}"), AltCoefficients::random(&mut rng)));
    }
    let scan = preferred_structure_scan(&pair, &candidates);
    let find = |label: &str| scan.iter().find(|e| e.label == label).expect("candidate present");
    let (id, cm) = (find("identity"), find("cm-relative"));
    let best_random = scan.iter().filter(|e| e.label.starts_with("random-")).map(|e| e.score).fold(f64::INFINITY, f64::min);

    let mut out = Outcome::default();
    out.metric("preferred_count", scan.iter().filter(|e| e.preferred).count() as f64)
        .metric("identity_score", id.score)
        .metric("cm_relative_score", cm.score)
        .metric("cm_relative_product_a", cm.product_a)
        .metric("cm_relative_product_b", cm.product_b)
        .metric("cm_relative_C_infinity", cm.c_infinity)
        .check("identity_preferred", id.preferred)
        .series("ranked_scores", scan.iter().map(|e| e.score).collect());
    if best_random.is_finite() {
        out.metric("best_random_score", best_random);
    }
    if resonant(&pair) {
        out.check("cm_relative_preferred", cm.preferred);
    }
    Ok(out)
}

pub(super) fn master_equation_scaling(p: &Params, _seed: u64) -> Result<Outcome> {
    let params = QbmMaster::new(p.positive("mass")?, p.positive("gamma")?, p.positive("kt")?, p.positive("basis_frequency")?)
        .map_err(|e| CliError::Config(e.to_string()))?;
    let dim = p.count("dim", 4, 200)?;
    let samples = p.count("samples", 4, 100_000)?;
    let d = p.positive("separation")?;
    let (w, window) = (p.real("system_frequency"), p.positive("window")?);
    let near = cat_coherence_decay(&params, w, d, dim, window, samples)?;
    let far = cat_coherence_decay(&params, w, 2.0 * d, dim, window, samples)?;
    let ratio = far.rate / near.rate;

    let mut out = Outcome::default();
    out.metric("rate_d", near.rate)
        .metric("rate_2d", far.rate)
        .metric("rate_ratio", ratio)
        .metric("ratio_deviation", (ratio / 4.0 - 1.0).abs())
        .check("quadratic_scaling", (ratio / 4.0 - 1.0).abs() <= SCALING_TOL)
        .series("times_d", near.times)
        .series("coherence_d", near.coherence)
        .series("times_2d", far.times)
        .series("coherence_2d", far.coherence);
    Ok(out)
}
