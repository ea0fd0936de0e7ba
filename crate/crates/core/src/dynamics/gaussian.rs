//! Gaussian states of the closed Caldeira–Leggett system and the parallel
//! decoherence of the Brownian particle and the total center of mass.

use crate::cv::{
    caldeira_leggett_restructure, symplectic_eigenvalues, symplectic_form, CaldeiraLeggettModel, CouplingSign, Lct,
    QuadraticHamiltonian, RelativeCoordinates,
};
use crate::error::{Error, Result};
use crate::linalg::{self, RMat, RVec};

/// Slack on `σ + (i/2)J ≥ 0`.
pub const UNCERTAINTY_TOL: f64 = 1e-9;

/// First moments and symmetrized covariance `σ_ij = ½⟨{Δξ_i, Δξ_j}⟩` of
/// `ξ = (x…, p…)`, ħ = 1.
#[derive(Debug, Clone, PartialEq)]
pub struct GaussianState {
    mean: RVec,
    covariance: RMat,
}

impl GaussianState {
    pub fn new(mean: RVec, covariance: RMat) -> Result<Self> {
        let n2 = covariance.nrows();
        if !covariance.is_square() || n2 % 2 != 0 || n2 == 0 {
            return Err(Error::DimensionError("covariance must be 2n × 2n".into()));
        }
        if mean.len() != n2 {
            return Err(Error::DimensionMismatch { expected: n2, found: mean.len() });
        }
        let asym = linalg::max_abs_real(&(&covariance - covariance.transpose()));
        if asym > 1e-12 * linalg::max_abs_real(&covariance).max(1.0) {
            return Err(Error::InvalidState(format!("covariance not symmetric ({asym:e})")));
        }
        let s = Self { mean, covariance };
        let m = s.uncertainty_margin();
        if m < -UNCERTAINTY_TOL {
            return Err(Error::InvalidState(format!("uncertainty relation violated by {:e}", -m)));
        }
        Ok(s)
    }

    /// Ground state of `p²/2m + mω²x²/2` for each listed mode.
    pub fn vacuum(masses: &[f64], omegas: &[f64]) -> Result<Self> {
        Self::thermal(masses, omegas, 0.0)
    }

    /// Product of oscillator Gibbs states: `⟨x²⟩ = coth(ω/2k_BT)/2mω`,
    /// `⟨p²⟩ = mω coth(ω/2k_BT)/2`; `kt = 0` gives the vacuum.
    pub fn thermal(masses: &[f64], omegas: &[f64], kt: f64) -> Result<Self> {
        let n = masses.len();
        if omegas.len() != n || n == 0 {
            return Err(Error::DimensionMismatch { expected: n, found: omegas.len() });
        }
        if masses.iter().chain(omegas).any(|&v| !(v > 0.0)) || !(kt >= 0.0) {
            return Err(Error::DomainError("masses and frequencies must be positive, temperature nonnegative".into()));
        }
        let mut cov = RMat::zeros(2 * n, 2 * n);
        for i in 0..n {
            let coth = if kt == 0.0 { 1.0 } else { 1.0 / (omegas[i] / (2.0 * kt)).tanh() };
            cov[(i, i)] = 0.5 * coth / (masses[i] * omegas[i]);
            cov[(n + i, n + i)] = 0.5 * coth * masses[i] * omegas[i];
        }
        Self::new(RVec::zeros(2 * n), cov)
    }

    pub fn n_modes(&self) -> usize {
        self.mean.len() / 2
    }

    pub fn mean(&self) -> &RVec {
        &self.mean
    }

    pub fn covariance(&self) -> &RMat {
        &self.covariance
    }

    /// Smallest eigenvalue of the Hermitian `σ + (i/2)J`.
    pub fn uncertainty_margin(&self) -> f64 {
        let j = symplectic_form(self.n_modes());
        let m = crate::linalg::to_complex(&self.covariance) + j.map(|v| crate::linalg::c(0.0, 0.5 * v));
        linalg::eigvalsh(&m)[0]
    }

    /// Modes of `self` followed by modes of `other`, keeping `(x…, p…)` order.
    pub fn direct_sum(&self, other: &GaussianState) -> GaussianState {
        let (a, b) = (self.n_modes(), other.n_modes());
        let n = a + b;
        let mut mean = RVec::zeros(2 * n);
        let mut cov = RMat::zeros(2 * n, 2 * n);
        let idx = |k: usize, block: usize, off: usize| block * n + off + k;
        for (src, cnt, off) in [(self, a, 0), (other, b, a)] {
            for bi in 0..2 {
                for i in 0..cnt {
                    mean[idx(i, bi, off)] = src.mean[bi * cnt + i];
                    for bj in 0..2 {
                        for j in 0..cnt {
                            cov[(idx(i, bi, off), idx(j, bj, off))] = src.covariance[(bi * cnt + i, bj * cnt + j)];
                        }
                    }
                }
            }
        }
        GaussianState { mean, covariance: cov }
    }

    /// `ξ → S ξ` for any real `S` (not checked for canonicity).
    pub fn transformed(&self, s: &RMat) -> GaussianState {
        let cov = s * &self.covariance * s.transpose();
        GaussianState { mean: s * &self.mean, covariance: (&cov + cov.transpose()) * 0.5 }
    }

    pub fn apply_lct(&self, lct: &Lct) -> GaussianState {
        self.transformed(lct.matrix())
    }

    /// Reduced state of the listed modes.
    pub fn marginal(&self, modes: &[usize]) -> Result<GaussianState> {
        let n = self.n_modes();
        if modes.is_empty() || modes.iter().any(|&m| m >= n) {
            return Err(Error::InvalidPartition(format!("modes {modes:?} out of range for {n}")));
        }
        let idx: Vec<usize> = modes.iter().copied().chain(modes.iter().map(|m| m + n)).collect();
        let k = idx.len();
        Ok(GaussianState {
            mean: RVec::from_fn(k, |i, _| self.mean[idx[i]]),
            covariance: RMat::from_fn(k, k, |i, j| self.covariance[(idx[i], idx[j])]),
        })
    }

    pub fn symplectic_eigenvalues(&self) -> Result<Vec<f64>> {
        symplectic_eigenvalues(&self.covariance)
    }

    /// `Π_k 1/(2ν_k) = 1/(2ⁿ √det σ)`.
    pub fn purity(&self) -> f64 {
        let det = self.covariance.determinant();
        1.0 / (2f64.powi(self.n_modes() as i32) * det.sqrt())
    }

    pub fn position_variance(&self, mode: usize) -> f64 {
        self.covariance[(mode, mode)]
    }
}

/// `exp(J K t)`: the symplectic flow of `H = ½ ξᵀ K ξ` over time `t`.
pub fn symplectic_propagator(h: &QuadraticHamiltonian, t: f64) -> RMat {
    (h.dynamical_matrix() * t).exp()
}

/// Ohmic bath `J(ω) = 2m_Sγω` sampled at `ω_i = iω_cut/N`:
/// `κ_i² = (2/π) m_i ω_i J(ω_i) Δω`.
pub fn ohmic_model(
    n_env: usize,
    system_mass: f64,
    system_frequency: f64,
    gamma: f64,
    omega_cut: f64,
    env_mass: f64,
    sign: CouplingSign,
) -> Result<CaldeiraLeggettModel> {
    if n_env == 0 || n_env > MAX_ENV_MODES {
        return Err(Error::DomainError(format!("environment size {n_env} outside 1..={MAX_ENV_MODES}")));
    }
    if !(gamma >= 0.0) || !(omega_cut > 0.0) {
        return Err(Error::DomainError("need γ ≥ 0 and ω_cut > 0".into()));
    }
    let dw = omega_cut / n_env as f64;
    let freqs: Vec<f64> = (1..=n_env).map(|i| i as f64 * dw).collect();
    let couplings = freqs
        .iter()
        .map(|&w| (2.0 / std::f64::consts::PI * env_mass * w * (2.0 * system_mass * gamma * w) * dw).sqrt())
        .collect();
    CaldeiraLeggettModel::new(system_mass, system_frequency, vec![env_mass; n_env], freqs, couplings, sign)
}

pub const MAX_ENV_MODES: usize = 64;

#[derive(Debug, Clone, PartialEq)]
pub struct DecoherenceTrace {
    pub times: Vec<f64>,
    pub purity_s: Vec<f64>,
    pub purity_s_prime: Vec<f64>,
    pub position_variance_s: Vec<f64>,
    pub position_variance_s_prime: Vec<f64>,
    /// Smallest symplectic eigenvalue of the full covariance at each time.
    pub symplectic_floor: Vec<f64>,
}

/// Evolves the closed system from `ρ_S ⊗ ρ_E`: the system particle in the
/// ground state of its own oscillator, every environment mode thermal at
/// `kt`. `S` is particle 0; `S′` is coordinate 0 of `coords` (the total
/// center of mass).
pub fn parallel_decoherence_experiment(
    model: &CaldeiraLeggettModel,
    coords: &RelativeCoordinates,
    kt: f64,
    times: &[f64],
) -> Result<DecoherenceTrace> {
    if model.n_env() > MAX_ENV_MODES {
        return Err(Error::DomainError(format!("at most {MAX_ENV_MODES} environment modes")));
    }
    if coords.n() != model.n_particles() {
        return Err(Error::DimensionMismatch { expected: model.n_particles(), found: coords.n() });
    }
    caldeira_leggett_restructure(model, coords)?;
    if !(model.system_frequency > 0.0) {
        return Err(Error::DomainError("the system's initial ground state needs ω_S > 0".into()));
    }
    let system = GaussianState::vacuum(&[model.system_mass], &[model.system_frequency])?;
    let env = GaussianState::thermal(&model.env_masses, &model.env_frequencies, kt)?;
    let initial = system.direct_sum(&env);
    let h = model.hamiltonian();
    let cm = coords.lct();
    let mut trace = DecoherenceTrace {
        times: times.to_vec(),
        purity_s: Vec::with_capacity(times.len()),
        purity_s_prime: Vec::with_capacity(times.len()),
        position_variance_s: Vec::with_capacity(times.len()),
        position_variance_s_prime: Vec::with_capacity(times.len()),
        symplectic_floor: Vec::with_capacity(times.len()),
    };
    for &t in times {
        let state = initial.transformed(&symplectic_propagator(&h, t));
        let s = state.marginal(&[0])?;
        let s_prime = state.apply_lct(&cm).marginal(&[0])?;
        trace.purity_s.push(s.purity());
        trace.purity_s_prime.push(s_prime.purity());
        trace.position_variance_s.push(s.position_variance(0));
        trace.position_variance_s_prime.push(s_prime.position_variance(0));
        trace.symplectic_floor.push(state.symplectic_eigenvalues()?[0]);
    }
    Ok(trace)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cv::normal_modes;

    #[test]
    fn vacuum_and_thermal_purity() {
        let v = GaussianState::vacuum(&[2.0], &[0.7]).unwrap();
        assert!((v.purity() - 1.0).abs() < 1e-14);
        let kt = 1.3;
        let th = GaussianState::thermal(&[2.0], &[0.7], kt).unwrap();
        assert!((th.purity() - (0.7 / (2.0 * kt)).tanh()).abs() < 1e-14);
        assert!(GaussianState::new(RVec::zeros(2), RMat::identity(2, 2) * 0.4).is_err());
    }

    #[test]
    fn propagator_matches_normal_mode_rotation() {
        let v = RMat::from_row_slice(2, 2, &[2.0, 0.3, 0.3, 1.0]);
        let h = QuadraticHamiltonian::from_masses(&[1.0, 0.5], &v).unwrap();
        let nm = normal_modes(&h).unwrap();
        let t = 1.7;
        let mut rot = RMat::zeros(4, 4);
        for (i, w) in nm.frequencies.iter().enumerate() {
            let (c, s) = ((w * t).cos(), (w * t).sin());
            rot[(i, i)] = c;
            rot[(i, 2 + i)] = s / w;
            rot[(2 + i, i)] = -w * s;
            rot[(2 + i, 2 + i)] = c;
        }
        let l = nm.lct.matrix();
        let expected = l.clone().try_inverse().unwrap() * rot * l;
        assert!(linalg::max_abs_real(&(symplectic_propagator(&h, t) - expected)) < 1e-12);
    }

    #[test]
    fn uncoupled_equal_oscillators_stay_pure() {
        let model = CaldeiraLeggettModel::uniform(4, 1.0, 1.0, 0.0, 1.0, CouplingSign::Plus).unwrap();
        let times: Vec<f64> = (0..=10).map(|i| i as f64).collect();
        let tr = parallel_decoherence_experiment(&model, &model.default_coordinates(), 0.0, &times).unwrap();
        for k in 0..times.len() {
            assert!((tr.purity_s[k] - 1.0).abs() < 1e-10);
            assert!((tr.purity_s_prime[k] - 1.0).abs() < 1e-10);
            assert!((tr.symplectic_floor[k] - 0.5).abs() < 1e-10);
        }
    }

    #[test]
    fn ohmic_bath_decoheres_both_particles() {
        let model = ohmic_model(16, 1.0, 1.0, 0.05, 4.0, 1.0, CouplingSign::Plus).unwrap();
        let times: Vec<f64> = (0..=40).map(|i| 0.5 * i as f64).collect();
        let tr = parallel_decoherence_experiment(&model, &model.default_coordinates(), 40.0, &times).unwrap();
        assert!((tr.purity_s[0] - 1.0).abs() < 1e-12);
        assert!(tr.purity_s.iter().any(|&p| p < 0.999));
        assert!(tr.purity_s_prime.iter().any(|&p| p < 0.999));
        assert!(tr.symplectic_floor.iter().all(|&v| v >= 0.5 - 1e-9));
        assert!(tr.purity_s.iter().chain(&tr.purity_s_prime).all(|&p| p > 0.0 && p <= 1.0 + 1e-9));
    }
}
