use super::classify::{classify_zero_discord, ZeroDiscordClass};
use super::discord::{two_way_discord, OptimizerConfig, TwoWayDiscord};
use crate::error::{Error, Result};
use crate::linalg::{self, CMat, CVec};
use crate::tensor::{permute_density, refactorize, DensityMatrix, StructureMap, TensorFactorization, TensorProduct};

/// Tolerance used for the after-map zero-discord classification.
pub const CLASSIFY_TOL: f64 = 1e-8;

#[derive(Debug, Clone)]
pub struct DiscordRelativityReport {
    pub discord_before: TwoWayDiscord,
    pub discord_after: TwoWayDiscord,
    /// `max |Σ_kl p_k ω_l C^{kl}_{αβ} C^{kl*}_{α'β'}|` over `(α,β) ≠ (α',β')`:
    /// vanishes iff the re-factorized state is classical-classical.
    pub classical_classical_residual: f64,
    /// Same sum restricted to `α ≠ α'`, all `β, β'`: vanishes iff the state is
    /// classical on the first new factor.
    pub classical_quantum_residual: f64,
    pub classification_after: ZeroDiscordClass,
    pub state_after: DensityMatrix,
}

/// Discord of `ρ_A ⊗ ρ_B` in its own structure and after re-factorization by `map`.
pub fn discord_relativity_experiment(
    rho_a: &DensityMatrix,
    rho_b: &DensityMatrix,
    map: &StructureMap,
    cfg: &OptimizerConfig,
) -> Result<DiscordRelativityReport> {
    let (da, db) = (rho_a.dim(), rho_b.dim());
    if da * db != map.dim() {
        return Err(Error::DimensionMismatch { expected: map.dim(), found: da * db });
    }
    let new_f = map.factorization();
    new_f.check_bipartite()?;
    let old_f = TensorFactorization::bipartite(da, db)?;

    let rho = rho_a.tensor(rho_b);
    let after = refactorize(&rho, map)?;
    let discord_before = two_way_discord(&rho, &old_f, cfg)?;
    let discord_after = two_way_discord(&after, new_f, cfg)?;

    let classification_after = classify_zero_discord(&after, new_f, CLASSIFY_TOL)?;
    let swapped = permute_density(&after, new_f, &[1, 0])?;
    let classification_b = classify_zero_discord(&swapped, &new_f.permuted(&[1, 0])?, CLASSIFY_TOL)?;

    // C^{kl}_{αβ} = ⟨α β| W† |k l⟩ with |k⟩, |l⟩ eigenvectors of the inputs
    // and |α⟩, |β⟩ the bases selected by the classifier for each new factor.
    let (pk, vk) = linalg::eigh(rho_a.matrix());
    let (wl, vl) = linalg::eigh(rho_b.matrix());
    let new_basis = linalg::kron(&classification_after.basis, &classification_b.basis);
    let to_new = new_basis.adjoint() * map.unitary().adjoint();
    let d = da * db;
    let nb = new_f.dims()[1];
    let mut sums = CMat::zeros(d, d);
    for k in 0..da {
        for l in 0..db {
            let p = pk[k] * wl[l];
            if p == 0.0 {
                continue;
            }
            let ket: CVec = linalg::kron_vec(&vk.column(k).into_owned(), &vl.column(l).into_owned());
            let coeff = &to_new * ket;
            sums += (&coeff * coeff.adjoint()).scale(p);
        }
    }
    let mut cc = 0.0_f64;
    let mut cq = 0.0_f64;
    for i in 0..d {
        for j in 0..d {
            if i == j {
                continue;
            }
            let v = sums[(i, j)].norm();
            cc = cc.max(v);
            if i / nb != j / nb {
                cq = cq.max(v);
            }
        }
    }

    Ok(DiscordRelativityReport {
        discord_before,
        discord_after,
        classical_classical_residual: cc,
        classical_quantum_residual: cq,
        classification_after,
        state_after: after,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::haar_unitary;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use std::f64::consts::FRAC_PI_4;

    fn cfg() -> OptimizerConfig {
        OptimizerConfig { restarts: 8, ..OptimizerConfig::default() }
    }

    #[test]
    fn maximally_mixed_stays_classical() {
        let half = DensityMatrix::maximally_mixed(2);
        let map = StructureMap::partial_swap(2, 0.4).unwrap();
        let r = discord_relativity_experiment(&half, &half, &map, &cfg()).unwrap();
        assert!(r.discord_after.value.abs() < 1e-8);
        assert!(r.classical_classical_residual < 1e-12);
    }

    #[test]
    fn partial_swap_creates_discord() {
        let a = DensityMatrix::diagonal(&[0.3, 0.7]).unwrap();
        let b = DensityMatrix::diagonal(&[0.4, 0.6]).unwrap();
        let map = StructureMap::partial_swap(2, FRAC_PI_4).unwrap();
        let r = discord_relativity_experiment(&a, &b, &map, &cfg()).unwrap();
        assert!(r.discord_before.value.abs() < 1e-8);
        assert!(r.discord_after.value > 1e-3);
        assert!(!r.classification_after.classical_quantum);
        assert!(r.classical_quantum_residual > 1e-8);
        assert!(r.classical_classical_residual > 1e-8);
    }

    #[test]
    fn local_map_preserves_zero_discord() {
        let mut rng = ChaCha8Rng::seed_from_u64(51);
        let a = DensityMatrix::diagonal(&[0.3, 0.7]).unwrap();
        let b = DensityMatrix::diagonal(&[0.1, 0.5, 0.4]).unwrap();
        let map = StructureMap::local(&[haar_unitary(2, &mut rng), haar_unitary(3, &mut rng)]).unwrap();
        let r = discord_relativity_experiment(&a, &b, &map, &cfg()).unwrap();
        assert!(r.discord_after.value.abs() < 1e-6);
        assert!(r.classification_after.classical_classical);
        assert!(r.classical_classical_residual < 1e-8);
        assert!(r.classical_quantum_residual < 1e-8);
    }

    #[test]
    fn dimension_mismatch() {
        let a = DensityMatrix::maximally_mixed(2);
        let map = StructureMap::partial_swap(3, 0.4).unwrap();
        assert!(discord_relativity_experiment(&a, &a, &map, &cfg()).is_err());
    }
}
