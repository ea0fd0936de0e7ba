use super::relative::{star_pairs, RelativeCoordinates};
use super::{transform_hamiltonian, Lct, QuadraticHamiltonian};
use crate::error::{Error, Result};
use crate::linalg::{self, RMat, RVec};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CouplingSign {
    Plus,
    Minus,
}

impl CouplingSign {
    pub fn value(self) -> f64 {
        match self {
            CouplingSign::Plus => 1.0,
            CouplingSign::Minus => -1.0,
        }
    }
}

/// `H = p_S²/2m_S + m_S ω_S² x_S²/2 + Σ_i (p_i²/2m_i + m_i ω_i² x_i²/2) ± x_S Σ_i κ_i x_i`.
///
/// Particle 0 is the system; particles `1..=n` are the environment oscillators.
#[derive(Debug, Clone, PartialEq)]
pub struct CaldeiraLeggettModel {
    pub system_mass: f64,
    /// Zero for a free particle.
    pub system_frequency: f64,
    pub env_masses: Vec<f64>,
    pub env_frequencies: Vec<f64>,
    pub couplings: Vec<f64>,
    pub sign: CouplingSign,
}

impl CaldeiraLeggettModel {
    pub fn new(
        system_mass: f64,
        system_frequency: f64,
        env_masses: Vec<f64>,
        env_frequencies: Vec<f64>,
        couplings: Vec<f64>,
        sign: CouplingSign,
    ) -> Result<Self> {
        let n = env_masses.len();
        if n == 0 || env_frequencies.len() != n || couplings.len() != n {
            return Err(Error::DimensionError(format!(
                "environment lists disagree: {} masses, {} frequencies, {} couplings",
                n,
                env_frequencies.len(),
                couplings.len()
            )));
        }
        if !(system_mass > 0.0) || env_masses.iter().any(|&m| !(m > 0.0)) {
            return Err(Error::DimensionError("masses must be positive".into()));
        }
        if env_frequencies.iter().any(|&w| !(w > 0.0)) || system_frequency < 0.0 {
            return Err(Error::DimensionError("environment frequencies must be positive".into()));
        }
        Ok(Self { system_mass, system_frequency, env_masses, env_frequencies, couplings, sign })
    }

    /// Identical environment oscillators.
    pub fn uniform(n_env: usize, mass: f64, frequency: f64, coupling: f64, system_frequency: f64, sign: CouplingSign) -> Result<Self> {
        Self::new(mass, system_frequency, vec![mass; n_env], vec![frequency; n_env], vec![coupling; n_env], sign)
    }

    pub fn n_env(&self) -> usize {
        self.env_masses.len()
    }

    pub fn n_particles(&self) -> usize {
        self.n_env() + 1
    }

    pub fn masses(&self) -> Vec<f64> {
        std::iter::once(self.system_mass).chain(self.env_masses.iter().copied()).collect()
    }

    /// Position Hessian `V` with `U = ½ xᵀ V x`.
    pub fn position_hessian(&self) -> RMat {
        let n = self.n_particles();
        let s = self.sign.value();
        let mut v = RMat::zeros(n, n);
        v[(0, 0)] = self.system_mass * self.system_frequency.powi(2);
        for i in 0..self.n_env() {
            v[(i + 1, i + 1)] = self.env_masses[i] * self.env_frequencies[i].powi(2);
            v[(0, i + 1)] = s * self.couplings[i];
            v[(i + 1, 0)] = s * self.couplings[i];
        }
        v
    }

    pub fn hamiltonian(&self) -> QuadraticHamiltonian {
        QuadraticHamiltonian::from_masses(&self.masses(), &self.position_hessian()).expect("shapes fixed by the model")
    }

    /// Relative coordinates `ρ_l = x_{E_l} − x_S` with the total center of mass as `S'`.
    pub fn default_coordinates(&self) -> RelativeCoordinates {
        RelativeCoordinates::new(&self.masses(), &star_pairs(self.n_particles())).expect("star pairs are independent")
    }
}

/// Treatment of the `l = l'` mass-polarization contribution in the new
/// environment's momentum kinetic energy.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum MassPolarization {
    /// Exact kinetic energy.
    #[default]
    Keep,
    /// Diagonal kinetic coefficients replaced by `1/μ_l` (self term dropped).
    NeglectSelf,
}

/// Coefficients of `H = H_{S'} + H_{E'} + H_{S'E'}` in the center-of-mass /
/// relative-position structure, evaluated term by term.
#[derive(Debug, Clone)]
pub struct RestructuredModel {
    pub total_mass: f64,
    /// `MΩ_{S'}²`: coefficient of `x_{S'}²/2`.
    pub m_omega_sq: f64,
    pub reduced_masses: Vec<f64>,
    /// `μ_l ν_l²`: coefficient of `ρ_l²/2`.
    pub mu_nu_sq: Vec<f64>,
    /// Full coefficient of `x_{S'} ρ_l`, coupling sign included.
    pub sigma: Vec<f64>,
    /// `C_ll'` from the velocity form; zero diagonal.
    pub mass_polarization: RMat,
    /// `Ω_ll' = Σ_k m_k ω_k² ω_lk ω_l'k / 2`.
    pub omega_pair: RMat,
    /// `Ω_l = Σ_j κ_j ω_lj`.
    pub omega_single: Vec<f64>,
    /// Coefficients of `ρ_l ρ_l'/2` (diagonal `μ_l ν_l²`).
    pub env_position: RMat,
    /// Momentum kinetic matrix over `(P_{S'}, p_1, …)`.
    pub momentum_kinetic: RMat,
    pub polarization: MassPolarization,
    pub cm_positive: bool,
    pub env_positive: Vec<bool>,
}

impl RestructuredModel {
    pub fn cm_frequency_sq(&self) -> f64 {
        self.m_omega_sq / self.total_mass
    }

    pub fn satisfies_constraints(&self) -> bool {
        self.cm_positive && self.env_positive.iter().all(|&b| b)
    }

    /// Quadratic Hamiltonian over `(x_{S'}, ρ_1, …, P_{S'}, p_1, …)`.
    pub fn hamiltonian(&self) -> QuadraticHamiltonian {
        let n = self.reduced_masses.len() + 1;
        let mut k = RMat::zeros(2 * n, 2 * n);
        k[(0, 0)] = self.m_omega_sq;
        for l in 1..n {
            k[(0, l)] = self.sigma[l - 1];
            k[(l, 0)] = self.sigma[l - 1];
        }
        k.view_mut((1, 1), (n - 1, n - 1)).copy_from(&self.env_position);
        k.view_mut((n, n), (n, n)).copy_from(&self.momentum_kinetic);
        QuadraticHamiltonian::homogeneous(k).expect("symmetric by construction")
    }
}

/// Evaluates every restructured coefficient without checking positivity.
pub fn restructure_unchecked(
    model: &CaldeiraLeggettModel,
    coords: &RelativeCoordinates,
    polarization: MassPolarization,
) -> Result<RestructuredModel> {
    let n = model.n_particles();
    if coords.n() != n || coords.masses != model.masses() {
        return Err(Error::DimensionMismatch { expected: n, found: coords.n() });
    }
    let ne = model.n_env();
    let s = model.sign.value();
    let om = &coords.omega;
    let w_s = |l: usize| om[(0, l + 1)];
    let w_e = |l: usize, j: usize| om[(j + 1, l + 1)];
    let k = &model.couplings;
    let mw2: Vec<f64> = (0..ne).map(|j| model.env_masses[j] * model.env_frequencies[j].powi(2)).collect();
    let sys = model.system_mass * model.system_frequency.powi(2);

    let m_omega_sq = (0..ne).map(|i| 2.0 * s * k[i] + mw2[i]).sum::<f64>() + sys;
    let omega_single: Vec<f64> = (0..ne).map(|l| (0..ne).map(|j| k[j] * w_e(l, j)).sum()).collect();
    let omega_pair = RMat::from_fn(ne, ne, |l, lp| (0..ne).map(|j| mw2[j] * w_e(l, j) * w_e(lp, j)).sum::<f64>() / 2.0);

    let sigma: Vec<f64> = (0..ne)
        .map(|l| {
            let harmonic: f64 = (0..ne).map(|j| mw2[j] * w_e(l, j)).sum();
            let coupling: f64 = (0..ne).map(|j| k[j] * (w_s(l) + w_e(l, j))).sum();
            harmonic + s * coupling + sys * w_s(l)
        })
        .collect();
    let env_position = RMat::from_fn(ne, ne, |l, lp| {
        2.0 * omega_pair[(l, lp)]
            + s * (w_s(l) * omega_single[lp] + w_s(lp) * omega_single[l])
            + sys * w_s(l) * w_s(lp)
    });
    let mu_nu_sq: Vec<f64> = (0..ne).map(|l| env_position[(l, l)]).collect();

    let total_mass = coords.total_mass;
    let reduced_masses = coords.reduced_masses();
    let mass_polarization = coords.mass_polarization();
    // velocity-form kinetic matrix assembled from M, μ_l and C_ll', then inverted
    let mut kv = RMat::zeros(n, n);
    kv[(0, 0)] = total_mass;
    for l in 0..ne {
        kv[(l + 1, l + 1)] = reduced_masses[l];
        for lp in 0..ne {
            if l != lp {
                kv[(l + 1, lp + 1)] = -mass_polarization[(l, lp)];
            }
        }
    }
    let mut momentum_kinetic = kv.try_inverse().ok_or(Error::DependentPairs)?;
    momentum_kinetic = (&momentum_kinetic + momentum_kinetic.transpose()) * 0.5;
    if polarization == MassPolarization::NeglectSelf {
        for l in 0..ne {
            momentum_kinetic[(l + 1, l + 1)] = 1.0 / reduced_masses[l];
        }
    }

    Ok(RestructuredModel {
        total_mass,
        m_omega_sq,
        cm_positive: m_omega_sq > 0.0,
        env_positive: mu_nu_sq.iter().map(|&v| v > 0.0).collect(),
        reduced_masses,
        mu_nu_sq,
        sigma,
        mass_polarization,
        omega_pair,
        omega_single,
        env_position,
        momentum_kinetic,
        polarization,
    })
}

/// Restructured coefficients with the positivity constraints `MΩ_{S'}² > 0`
/// and `μ_l ν_l² > 0` enforced.
pub fn caldeira_leggett_restructure(model: &CaldeiraLeggettModel, coords: &RelativeCoordinates) -> Result<RestructuredModel> {
    let r = restructure_unchecked(model, coords, MassPolarization::Keep)?;
    if !r.cm_positive {
        return Err(Error::ConstraintViolated(format!("M Omega'^2 = {} is not positive", r.m_omega_sq)));
    }
    if let Some(l) = r.env_positive.iter().position(|&b| !b) {
        return Err(Error::ConstraintViolated(format!(
            "mu_{l} nu_{l}^2 = {} is not positive",
            r.mu_nu_sq[l]
        )));
    }
    Ok(r)
}

#[derive(Debug, Clone)]
pub struct NormalModes {
    /// `Q = Oᵀ T^{-1/2} q`, `P = Oᵀ T^{1/2} p`.
    pub lct: Lct,
    /// `λ_i`, ascending.
    pub frequencies: Vec<f64>,
}

/// Diagonalizes `½ pᵀ T p + ½ qᵀ V q` into `Σ (P_i² + λ_i² Q_i²)/2`.
pub fn normal_modes(h: &QuadraticHamiltonian) -> Result<NormalModes> {
    let cross = linalg::max_abs_real(&h.cross_block());
    if cross > 0.0 {
        return Err(Error::DimensionError(format!("position-momentum cross terms present ({cross:e})")));
    }
    let t = h.momentum_block();
    let v = h.position_block();
    let (tvals, _) = linalg::eigh_real(&t);
    if tvals[0] <= 0.0 {
        return Err(Error::NotPositiveDefinite(format!("kinetic block eigenvalue {:e}", tvals[0])));
    }
    let t_half = linalg::symmetric_fn(&t, f64::sqrt);
    let t_inv_half = linalg::symmetric_fn(&t, |x| 1.0 / x.sqrt());
    let (lam2, o) = linalg::eigh_real(&(&t_half * &v * &t_half));
    if lam2[0] <= 0.0 {
        return Err(Error::NotPositiveDefinite(format!("potential block eigenvalue {:e}", lam2[0])));
    }
    let n = h.n_modes();
    let mut m = RMat::zeros(2 * n, 2 * n);
    m.view_mut((0, 0), (n, n)).copy_from(&(o.transpose() * &t_inv_half));
    m.view_mut((n, n), (n, n)).copy_from(&(o.transpose() * &t_half));
    Ok(NormalModes { lct: Lct::new(m, "normal modes")?, frequencies: lam2.iter().map(|x| x.sqrt()).collect() })
}

#[derive(Debug, Clone)]
pub struct QbmPipeline {
    pub restructured: RestructuredModel,
    pub env_modes: NormalModes,
    /// Original coordinates → `(x_{S'}, Q_1, …, P_{S'}, P_1, …)`.
    pub total: Lct,
    pub hamiltonian: QuadraticHamiltonian,
    /// Coefficients of `x_{S'} Q_i`.
    pub sigma_prime: Vec<f64>,
}

impl QbmPipeline {
    /// Largest off-diagonal entry among the environment's position and momentum blocks.
    pub fn env_coupling_residual(&self) -> f64 {
        let n = self.hamiltonian.n_modes();
        let k = self.hamiltonian.quadratic();
        let mut r = 0.0_f64;
        for i in 1..n {
            for j in 1..n {
                if i != j {
                    r = r.max(k[(i, j)].abs()).max(k[(n + i, n + j)].abs());
                }
            }
            for j in 0..n {
                r = r.max(k[(i, n + j)].abs());
            }
        }
        r
    }
}

/// `{x_S, x_{E_i}} → {x_{S'}, ρ_i} → {x_{S'}, Q_i}`.
pub fn full_qbm_pipeline(model: &CaldeiraLeggettModel, coords: &RelativeCoordinates) -> Result<QbmPipeline> {
    let restructured = caldeira_leggett_restructure(model, coords)?;
    let cm = coords.lct();
    let h1 = transform_hamiltonian(&model.hamiltonian(), &cm)?;
    let n = h1.n_modes();
    let ne = n - 1;
    let k1 = h1.quadratic();
    let mut env = RMat::zeros(2 * ne, 2 * ne);
    for bi in 0..2 {
        for bj in 0..2 {
            for i in 0..ne {
                for j in 0..ne {
                    env[(bi * ne + i, bj * ne + j)] = k1[(bi * n + 1 + i, bj * n + 1 + j)];
                }
            }
        }
    }
    // the exact CM/R kinetic energy has no P_{S'} p_l and no q p terms; drop round-off
    for i in 0..ne {
        for j in 0..ne {
            env[(i, ne + j)] = 0.0;
            env[(ne + i, j)] = 0.0;
        }
    }
    let env_modes = normal_modes(&QuadraticHamiltonian::homogeneous(env)?)?;
    let stage2 = Lct::identity(1).direct_sum(&env_modes.lct);
    let total = stage2.compose(&cm)?;
    let mut hamiltonian = transform_hamiltonian(&h1, &stage2)?;
    let sigma_prime = (1..n).map(|i| hamiltonian.quadratic()[(0, i)]).collect();
    hamiltonian = QuadraticHamiltonian::new(hamiltonian.quadratic().clone(), RVec::zeros(2 * n), 0.0)?;
    Ok(QbmPipeline { restructured, env_modes, total, hamiltonian, sigma_prime })
}
