//! Entropies, Schmidt decomposition, mutual information, classical
//! correlation and discord, zero-discord classification, and the
//! structure dependence of discord.

mod classify;
mod discord;
mod relativity;

pub use classify::{classify_zero_discord, ZeroDiscordClass, ZeroDiscordWitness};
pub use discord::{
    classical_correlation, conditional_entropy, measurement_basis, one_way_discord, two_way_discord, DiscordReport,
    OptimizerConfig, TraceEntry, TwoWayDiscord,
};
pub use relativity::{discord_relativity_experiment, DiscordRelativityReport};

use crate::error::{Error, Result};
use crate::linalg::{self, CMat, CVec};
use crate::tensor::{partial_trace, DensityMatrix, PureState, TensorFactorization};

/// Von Neumann entropy `−tr ρ ln ρ` in nats.
pub fn vn_entropy(rho: &DensityMatrix) -> f64 {
    entropy_of(rho.matrix())
}

/// Entropy of a positive matrix of unit trace, eigenvalues below zero ignored.
pub(crate) fn entropy_of(m: &CMat) -> f64 {
    linalg::shannon_nats(&linalg::eigvalsh(m))
}

#[derive(Debug, Clone)]
pub struct SchmidtDecomposition {
    /// Non-negative, descending.
    pub coefficients: Vec<f64>,
    pub left: Vec<CVec>,
    pub right: Vec<CVec>,
}

impl SchmidtDecomposition {
    pub fn rank(&self, tol: f64) -> usize {
        self.coefficients.iter().filter(|&&c| c > tol).count()
    }

    pub fn reconstruct(&self) -> CVec {
        let dim = self.left[0].len() * self.right[0].len();
        self.coefficients
            .iter()
            .zip(self.left.iter().zip(&self.right))
            .fold(CVec::zeros(dim), |acc, (&c, (l, r))| acc + linalg::kron_vec(l, r).scale(c))
    }

    /// Entanglement entropy `−Σ c² ln c²`.
    pub fn entropy(&self) -> f64 {
        let probs: Vec<f64> = self.coefficients.iter().map(|c| c * c).collect();
        linalg::shannon_nats(&probs)
    }
}

pub fn schmidt(psi: &PureState, f: &TensorFactorization) -> Result<SchmidtDecomposition> {
    f.check_bipartite()?;
    f.check_dim(psi.dim())?;
    let (da, db) = (f.dims()[0], f.dims()[1]);
    let m = CMat::from_fn(da, db, |i, j| psi.amplitudes()[i * db + j]);
    let svd = m.svd(true, true);
    let u = svd.u.expect("requested U");
    let v_t = svd.v_t.expect("requested Vᵀ");
    let mut order: Vec<usize> = (0..svd.singular_values.len()).collect();
    order.sort_by(|&a, &b| svd.singular_values[b].total_cmp(&svd.singular_values[a]));
    let coefficients = order.iter().map(|&k| svd.singular_values[k]).collect();
    let left = order.iter().map(|&k| u.column(k).into_owned()).collect();
    // Row k of V† is ⟨v_k|; the right Schmidt vector is its transpose (no conjugation).
    let right = order.iter().map(|&k| v_t.row(k).transpose()).collect();
    Ok(SchmidtDecomposition { coefficients, left, right })
}

/// `I(A:B) = S(ρ_A) + S(ρ_B) − S(ρ)`.
pub fn mutual_information(rho: &DensityMatrix, f: &TensorFactorization) -> Result<f64> {
    f.check_bipartite()?;
    let a = partial_trace(rho, f, &[0])?;
    let b = partial_trace(rho, f, &[1])?;
    Ok(vn_entropy(&a) + vn_entropy(&b) - vn_entropy(rho))
}

pub(crate) fn bipartite_dims(rho: &DensityMatrix, f: &TensorFactorization) -> Result<(usize, usize)> {
    f.check_bipartite()?;
    f.check_dim(rho.dim())?;
    Ok((f.dims()[0], f.dims()[1]))
}

pub(crate) fn check_factor(f: &TensorFactorization, factor: usize) -> Result<()> {
    if factor < f.len() {
        Ok(())
    } else {
        Err(Error::FactorizationMismatch(format!("factor {factor} out of range for {} factors", f.len())))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{c, random_unit_vector, ONE, ZERO};
    use crate::tensor::{BellLabel, TensorProduct};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use std::f64::consts::{FRAC_1_SQRT_2, LN_2};

    #[test]
    fn entropy_examples() {
        assert!(vn_entropy(&PureState::basis(3, 1).density()).abs() < 1e-14);
        assert!((vn_entropy(&DensityMatrix::maximally_mixed(2)) - LN_2).abs() < 1e-14);
        let expected = -0.25 * 0.25f64.ln() - 0.75 * 0.75f64.ln();
        assert!((vn_entropy(&DensityMatrix::diagonal(&[0.25, 0.75]).unwrap()) - expected).abs() < 1e-14);
    }

    #[test]
    fn schmidt_of_bell_and_product() {
        let f = TensorFactorization::qubits(2);
        let s = schmidt(&BellLabel::PhiPlus.state(), &f).unwrap();
        assert!((s.coefficients[0] - FRAC_1_SQRT_2).abs() < 1e-14);
        assert!((s.coefficients[1] - FRAC_1_SQRT_2).abs() < 1e-14);

        let prod = PureState::from_slice(&[c(0.6, 0.0), c(0.0, 0.8)])
            .unwrap()
            .tensor(&PureState::from_slice(&[ONE, ZERO]).unwrap());
        let s = schmidt(&prod, &f).unwrap();
        assert_eq!(s.rank(1e-12), 1);
        assert!((s.coefficients[0] - 1.0).abs() < 1e-14);
    }

    #[test]
    fn schmidt_reconstructs_rectangular_states() {
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        let f = TensorFactorization::new(vec![3, 5]).unwrap();
        let psi = PureState::new(random_unit_vector(15, &mut rng)).unwrap();
        let s = schmidt(&psi, &f).unwrap();
        assert!((s.reconstruct() - psi.amplitudes()).norm() < 1e-12);
        let total: f64 = s.coefficients.iter().map(|c| c * c).sum();
        assert!((total - 1.0).abs() < 1e-12);
        assert!(s.coefficients.windows(2).all(|w| w[0] >= w[1]));
    }

    #[test]
    fn schmidt_rejects_three_factors() {
        let f = TensorFactorization::qubits(3);
        assert!(matches!(schmidt(&PureState::basis(8, 0), &f), Err(Error::FactorizationMismatch(_))));
    }

    #[test]
    fn teleportation_state_schmidt_matches_reduced_spectrum() {
        // |+⟩₁ ⊗ singlet₂₃ split as (12)|(3); oracle: eigenvalues of ρ₁₂.
        let s2 = FRAC_1_SQRT_2;
        let plus = PureState::from_slice(&[c(s2, 0.0), c(s2, 0.0)]).unwrap();
        let psi = plus.tensor(&BellLabel::PsiMinus.state());
        let f = TensorFactorization::new(vec![4, 2]).unwrap();
        let s = schmidt(&psi, &f).unwrap();
        let rho12 = partial_trace(&psi.density(), &TensorFactorization::qubits(3), &[0, 1]).unwrap();
        let mut spectrum = rho12.eigenvalues();
        spectrum.sort_by(|a, b| b.total_cmp(a));
        for (c, lam) in s.coefficients.iter().zip(&spectrum) {
            assert!((c * c - lam).abs() < 1e-12);
        }
    }

    #[test]
    fn mutual_information_examples() {
        let f = TensorFactorization::qubits(2);
        let prod = DensityMatrix::diagonal(&[0.3, 0.7]).unwrap().tensor(&DensityMatrix::diagonal(&[0.4, 0.6]).unwrap());
        assert!(mutual_information(&prod, &f).unwrap().abs() < 1e-12);
        let bell = BellLabel::PhiPlus.state().density();
        assert!((mutual_information(&bell, &f).unwrap() - 2.0 * LN_2).abs() < 1e-12);
        let cc = DensityMatrix::diagonal(&[0.5, 0.0, 0.0, 0.5]).unwrap();
        assert!((mutual_information(&cc, &f).unwrap() - LN_2).abs() < 1e-12);
    }
}
