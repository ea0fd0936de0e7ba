use super::{Outcome, Params};
use crate::error::{CliError, Result};
use qstruct_core::correlations::{
    classify_zero_discord, conditional_entropy, discord_relativity_experiment, vn_entropy, DiscordReport, OptimizerConfig,
};
use qstruct_core::linalg::{self, c, CMat};
use qstruct_core::projections::{nz_sweep, NzProjector};
use qstruct_core::tensor::{partial_trace, DensityMatrix, StructureMap, TensorFactorization};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::f64::consts::{FRAC_PI_2, PI};

const ZERO_DISCORD_TOL: f64 = 1e-6;
const POSITIVE_DISCORD_TOL: f64 = 1e-3;
const GRID_TOL: f64 = 2e-6;
const LEMMA_TOL: f64 = 1e-6;
const TRACE_IDENTITY_TOL: f64 = 1e-10;

fn probability(p: &Params, name: &str) -> Result<f64> {
    let x = p.real(name);
    if x > 0.0 && x < 1.0 {
        Ok(x)
    } else {
        Err(CliError::Config(format!("parameter `{name}` must lie strictly between 0 and 1, got {x}")))
    }
}

/// Smallest conditional entropy over the qubit bases with Bloch angles
/// `θ_i = i(π/2)/(n−1)`, `φ_j = 2πj/n`: `(cos θ/2, e^{iφ} sin θ/2)` and its
/// orthogonal partner. The upper hemisphere already contains every basis.
fn grid_minimum(rho: &DensityMatrix, f: &TensorFactorization, measured: usize, n: usize) -> Result<f64> {
    let mut best = f64::INFINITY;
    for i in 0..n {
        let half = 0.5 * i as f64 * FRAC_PI_2 / (n - 1) as f64;
        for j in 0..n {
            let ph = 2.0 * PI * j as f64 / n as f64;
            let e = c(ph.cos(), ph.sin());
            let basis = CMat::from_row_slice(2, 2, &[c(half.cos(), 0.0), -e.conj() * half.sin(), e * half.sin(), c(half.cos(), 0.0)]);
            best = best.min(conditional_entropy(rho, f, measured, &basis)?);
        }
    }
    Ok(best)
}

fn grid_discord(rho: &DensityMatrix, f: &TensorFactorization, rep: &DiscordReport, n: usize) -> Result<f64> {
    let other = 1 - rep.measured_factor;
    let s_other = vn_entropy(&partial_trace(rho, f, &[other])?);
    Ok(rep.mutual_information - s_other + grid_minimum(rho, f, rep.measured_factor, n)?)
}

pub(super) fn discord_relativity(p: &Params, seed: u64) -> Result<Outcome> {
    let (pa, pb) = (probability(p, "p_a")?, probability(p, "p_b")?);
    let n = p.count("grid", 2, 2000)?;
    let cfg = OptimizerConfig { restarts: p.count("restarts", 1, 10_000)?, seed, ..OptimizerConfig::default() };
    let rho_a = DensityMatrix::diagonal(&[pa, 1.0 - pa])?;
    let rho_b = DensityMatrix::diagonal(&[pb, 1.0 - pb])?;
    let map = StructureMap::partial_swap(2, p.real("theta"))?;
    let rep = discord_relativity_experiment(&rho_a, &rho_b, &map, &cfg)?;

    let f = map.factorization();
    let after = &rep.discord_after;
    let grid_first = grid_discord(&rep.state_after, f, &after.measuring_first, n)?;
    let grid_second = grid_discord(&rep.state_after, f, &after.measuring_second, n)?;
    let gap = (after.measuring_first.one_way_discord - grid_first)
        .abs()
        .max((after.measuring_second.one_way_discord - grid_second).abs());

    let mut out = Outcome::default();
    out.metric("discord_before", rep.discord_before.value)
        .metric("discord_after", after.measuring_second.one_way_discord)
        .metric("discord_after_measure_first", after.measuring_first.one_way_discord)
        .metric("grid_discord_after", grid_second)
        .metric("grid_discord_after_measure_first", grid_first)
        .metric("grid_gap", gap)
        .metric("mutual_information_after", after.measuring_second.mutual_information)
        .metric("classical_classical_residual", rep.classical_classical_residual)
        .metric("classical_quantum_residual", rep.classical_quantum_residual)
        .check("before_zero", rep.discord_before.value <= ZERO_DISCORD_TOL)
        .check("after_positive", after.measuring_second.one_way_discord >= POSITIVE_DISCORD_TOL)
        .check("grid_agreement", gap <= GRID_TOL);
    Ok(out)
}

fn weights(rng: &mut ChaCha8Rng, n: usize) -> Vec<f64> {
    let w: Vec<f64> = (0..n).map(|_| 0.05 + rng.random::<f64>()).collect();
    let z: f64 = w.iter().sum();
    w.into_iter().map(|x| x / z).collect()
}

pub(super) fn zero_discord_classifier(p: &Params, seed: u64) -> Result<Outcome> {
    let count = p.count("count", 1, 100_000)?;
    let (da, db) = (p.count("dim_a", 2, 6)?, p.count("dim_b", 2, 6)?);
    let tol = p.positive("tol")?;
    let f = TensorFactorization::bipartite(da, db)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (mut cq_bad, mut cc_bad, mut ent_bad) = (0usize, 0usize, 0usize);

    for _ in 0..count {
        let ua = linalg::haar_unitary(da, &mut rng);
        let mut m = CMat::zeros(da * db, da * db);
        for (k, w) in weights(&mut rng, da).into_iter().enumerate() {
            let cond = linalg::random_density(db, &mut rng);
            m += linalg::kron(&linalg::projector(&ua.column(k).into_owned()), &cond).scale(w);
        }
        let class = classify_zero_discord(&DensityMatrix::new(linalg::hermitian_part(&m))?, &f, tol)?;
        cq_bad += usize::from(!class.classical_quantum);
    }

    for _ in 0..count {
        let ua = linalg::haar_unitary(da, &mut rng);
        let ub = linalg::haar_unitary(db, &mut rng);
        let w = weights(&mut rng, da * db);
        let mut m = CMat::zeros(da * db, da * db);
        for k in 0..da {
            for l in 0..db {
                let ket = linalg::kron_vec(&ua.column(k).into_owned(), &ub.column(l).into_owned());
                m += linalg::projector(&ket).scale(w[k * db + l]);
            }
        }
        let class = classify_zero_discord(&DensityMatrix::new(linalg::hermitian_part(&m))?, &f, tol)?;
        cc_bad += usize::from(!(class.classical_quantum && class.classical_classical));
    }

    for _ in 0..count {
        let psi = linalg::random_unit_vector(da * db, &mut rng);
        let class = classify_zero_discord(&DensityMatrix::new(linalg::projector(&psi))?, &f, tol)?;
        ent_bad += usize::from(class.classical_quantum || class.classical_classical);
    }

    let total = cq_bad + cc_bad + ent_bad;
    let mut out = Outcome::default();
    out.metric("states_per_family", count as f64)
        .metric("cq_misclassified", cq_bad as f64)
        .metric("cc_misclassified", cc_bad as f64)
        .metric("entangled_misclassified", ent_bad as f64)
        .metric("misclassified_total", total as f64)
        .check("no_misclassification", total == 0);
    Ok(out)
}

pub(super) fn nz_lemmas(p: &Params, seed: u64) -> Result<Outcome> {
    let count = p.count("count", 1, 100_000)?;
    let w = probability(p, "env_weight")?;
    let f = TensorFactorization::bipartite(2, 2)?;
    let proj = NzProjector::new(f, DensityMatrix::diagonal(&[w, 1.0 - w])?)?;
    let map = StructureMap::partial_swap(2, p.real("theta"))?;
    let sweep = nz_sweep(count, seed, &proj, &map, &proj)?;

    // at most one state in a hundred may fall below the threshold
    let required = count - count / 100;
    let (above62, above63) = (sweep.count_lemma62_above(LEMMA_TOL), sweep.count_lemma63_above(LEMMA_TOL));
    let r62: Vec<f64> = sweep.lemma62.iter().map(|r| r.residual).collect();
    let mut out = Outcome::default();
    out.metric("count", count as f64)
        .metric("lemma62_above", above62 as f64)
        .metric("lemma63_above", above63 as f64)
        .metric("min_lemma62", r62.iter().copied().fold(f64::INFINITY, f64::min))
        .metric("min_lemma63", sweep.lemma63.iter().copied().fold(f64::INFINITY, f64::min))
        .metric("max_trace_identity", sweep.max_trace_identity())
        .check("lemma62_generic", above62 >= required)
        .check("lemma63_generic", above63 >= required)
        .check("trace_identity", sweep.max_trace_identity() <= TRACE_IDENTITY_TOL)
        .series("lemma62_residual", r62)
        .series("lemma63_commutator", sweep.lemma63);
    Ok(out)
}
