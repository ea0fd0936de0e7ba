//! Long-time behaviour of two independently damped modes seen through
//! alternative degrees of freedom
//! `X_A = α·x`, `P_A = γ·p`, `ξ_B = β·x`, `π_B = δ·p`.

use rand::Rng;

use super::damping::{coherent_state, kraus_operators};
use crate::error::{Error, Result};
use crate::linalg::{kron, projector, trace, CMat, RMat, C64};
use crate::second_quant::build_fock_ops;
use crate::tensor::{apply_local_kraus, DensityMatrix, TensorFactorization};

/// Two uncoupled modes with masses, frequencies and damping rates.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModePair {
    pub mass: [f64; 2],
    pub omega: [f64; 2],
    pub damping: [f64; 2],
}

impl ModePair {
    pub fn new(mass: [f64; 2], omega: [f64; 2], damping: [f64; 2]) -> Result<Self> {
        if mass.iter().chain(&omega).chain(&damping).any(|&v| !(v > 0.0 && v.is_finite())) {
            return Err(Error::DomainError("masses, frequencies and damping rates must be positive".into()));
        }
        Ok(Self { mass, omega, damping })
    }

    /// Asymptotic `⟨x_i²⟩ = 1/(2 m_i ω_i)`.
    fn x_var(&self, i: usize) -> f64 {
        0.5 / (self.mass[i] * self.omega[i])
    }

    fn p_var(&self, i: usize) -> f64 {
        0.5 * self.mass[i] * self.omega[i]
    }
}

pub const COEFFICIENT_TOL: f64 = 1e-9;

/// Coefficients of a point transformation of two modes. Canonicity requires
/// `Σα_iγ_i = Σβ_iδ_i = 1` and `Σα_iδ_i = Σβ_iγ_i = 0`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AltCoefficients {
    alpha: [f64; 2],
    beta: [f64; 2],
    gamma: [f64; 2],
    delta: [f64; 2],
}

impl AltCoefficients {
    pub fn new(alpha: [f64; 2], beta: [f64; 2], gamma: [f64; 2], delta: [f64; 2]) -> Result<Self> {
        let c = Self { alpha, beta, gamma, delta };
        let r = c.constraint_residual();
        if !(r <= COEFFICIENT_TOL) {
            return Err(Error::InvalidCoefficients(format!("canonical constraints violated by {r:e}")));
        }
        Ok(c)
    }

    pub fn identity() -> Self {
        Self { alpha: [1.0, 0.0], beta: [0.0, 1.0], gamma: [1.0, 0.0], delta: [0.0, 1.0] }
    }

    /// Center of mass and relative coordinate of two equal masses.
    pub fn cm_relative() -> Self {
        Self { alpha: [0.5, 0.5], beta: [1.0, -1.0], gamma: [1.0, 1.0], delta: [0.5, -0.5] }
    }

    /// Rows of `a` give `(α, β)`; momenta follow from `a⁻ᵀ`.
    pub fn from_position_matrix(a: &RMat) -> Result<Self> {
        if a.shape() != (2, 2) {
            return Err(Error::InvalidCoefficients("position matrix must be 2 × 2".into()));
        }
        let det = a.determinant();
        if det.abs() < 1e-12 {
            return Err(Error::InvalidCoefficients(format!("singular position matrix (det {det:e})")));
        }
        let g = a.clone().try_inverse().expect("nonsingular").transpose();
        Self::new([a[(0, 0)], a[(0, 1)]], [a[(1, 0)], a[(1, 1)]], [g[(0, 0)], g[(0, 1)]], [g[(1, 0)], g[(1, 1)]])
    }

    /// Random admissible coefficients with entries of `A` uniform in `[−2, 2]`
    /// and `|det A| ≥ 0.1`.
    pub fn random<R: Rng + ?Sized>(rng: &mut R) -> Self {
        loop {
            let a = RMat::from_fn(2, 2, |_, _| rng.random_range(-2.0..2.0));
            if a.determinant().abs() >= 0.1 {
                if let Ok(c) = Self::from_position_matrix(&a) {
                    return c;
                }
            }
        }
    }

    pub fn alpha(&self) -> [f64; 2] {
        self.alpha
    }

    pub fn beta(&self) -> [f64; 2] {
        self.beta
    }

    pub fn gamma(&self) -> [f64; 2] {
        self.gamma
    }

    pub fn delta(&self) -> [f64; 2] {
        self.delta
    }

    pub fn constraint_residual(&self) -> f64 {
        let dot = |u: [f64; 2], v: [f64; 2]| u[0] * v[0] + u[1] * v[1];
        [
            (dot(self.alpha, self.gamma) - 1.0).abs(),
            (dot(self.beta, self.delta) - 1.0).abs(),
            dot(self.alpha, self.delta).abs(),
            dot(self.beta, self.gamma).abs(),
        ]
        .into_iter()
        .fold(0.0, f64::max)
    }

    fn check(&self) -> Result<()> {
        let r = self.constraint_residual();
        if r <= COEFFICIENT_TOL {
            Ok(())
        } else {
            Err(Error::InvalidCoefficients(format!("canonical constraints violated by {r:e}")))
        }
    }
}

fn products(pair: &ModePair, c: &AltCoefficients) -> (f64, f64) {
    let xs = |w: [f64; 2]| w[0] * w[0] * pair.x_var(0) + w[1] * w[1] * pair.x_var(1);
    let ps = |w: [f64; 2]| w[0] * w[0] * pair.p_var(0) + w[1] * w[1] * pair.p_var(1);
    ((xs(c.alpha) * ps(c.gamma)).sqrt(), (xs(c.beta) * ps(c.delta)).sqrt())
}

fn c_infinity(pair: &ModePair, c: &AltCoefficients) -> f64 {
    c.alpha[0] * c.beta[0] * pair.x_var(0) + c.alpha[1] * c.beta[1] * pair.x_var(1)
}

/// `(ΔX_A ΔP_A, Δξ_B Δπ_B)` once both modes have relaxed to the vacuum.
pub fn asymptotic_uncertainty(pair: &ModePair, c: &AltCoefficients) -> Result<(f64, f64)> {
    c.check()?;
    Ok(products(pair, c))
}

/// `C(∞) = α₁β₁/(2m₁ω₁) + α₂β₂/(2m₂ω₂)`: the asymptotic `X_A`–`ξ_B` covariance.
pub fn covariance_asymptotic(pair: &ModePair, c: &AltCoefficients) -> Result<f64> {
    c.check()?;
    Ok(c_infinity(pair, c))
}

/// Matching tolerance for calling a structure uncertainty-minimal and uncorrelated.
pub const PREFERRED_TOL: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq)]
pub struct ScanEntry {
    pub label: String,
    pub coefficients: AltCoefficients,
    pub product_a: f64,
    pub product_b: f64,
    pub c_infinity: f64,
    /// `(ΔX_AΔP_A − ½) + (Δξ_BΔπ_B − ½) + |C(∞)|`.
    pub score: f64,
    pub preferred: bool,
}

/// Candidates ranked by score, ascending; ties keep input order with the
/// identity structure first.
pub fn preferred_structure_scan(pair: &ModePair, candidates: &[(String, AltCoefficients)]) -> Vec<ScanEntry> {
    let id = AltCoefficients::identity();
    let mut all: Vec<(String, AltCoefficients)> = Vec::with_capacity(candidates.len() + 1);
    if !candidates.iter().any(|(_, c)| *c == id) {
        all.push(("identity".into(), id));
    }
    all.extend(candidates.iter().cloned());
    let mut entries: Vec<ScanEntry> = all
        .into_iter()
        .map(|(label, c)| {
            let (pa, pb) = products(pair, &c);
            let cinf = c_infinity(pair, &c);
            let score = (pa - 0.5) + (pb - 0.5) + cinf.abs();
            let preferred = (pa - 0.5).abs() <= PREFERRED_TOL && (pb - 0.5).abs() <= PREFERRED_TOL && cinf.abs() <= PREFERRED_TOL;
            ScanEntry { label, coefficients: c, product_a: pa, product_b: pb, c_infinity: cinf, score, preferred }
        })
        .collect();
    entries.sort_by(|a, b| a.score.total_cmp(&b.score));
    entries
}

/// Means and symmetrized covariances of `(x₁, x₂, p₁, p₂)`.
#[derive(Debug, Clone, PartialEq)]
pub struct TwoModeCovariance {
    pub mean: [f64; 4],
    pub covariance: RMat,
}

impl TwoModeCovariance {
    pub fn from_density(rho: &CMat, dim: usize, pair: &ModePair) -> Result<Self> {
        let f = TensorFactorization::new(vec![dim, dim])?;
        f.check_dim(rho.nrows())?;
        let ops = build_fock_ops(dim);
        let id = crate::linalg::identity(dim);
        let quads = [
            kron(&ops.position(pair.mass[0], pair.omega[0]), &id),
            kron(&id, &ops.position(pair.mass[1], pair.omega[1])),
            kron(&ops.momentum(pair.mass[0], pair.omega[0]), &id),
            kron(&id, &ops.momentum(pair.mass[1], pair.omega[1])),
        ];
        let ev = |o: &CMat| trace(&(rho * o)).re;
        let mean: Vec<f64> = quads.iter().map(ev).collect();
        let cov = RMat::from_fn(4, 4, |i, j| {
            let prod = &quads[i] * &quads[j];
            let sym = (&prod + prod.adjoint()) * C64::new(0.5, 0.0);
            ev(&sym) - mean[i] * mean[j]
        });
        Ok(Self { mean: [mean[0], mean[1], mean[2], mean[3]], covariance: cov })
    }

    fn quad(&self, u: [f64; 2], v: [f64; 2], ou: usize, ov: usize) -> f64 {
        let mut s = 0.0;
        for i in 0..2 {
            for j in 0..2 {
                s += u[i] * v[j] * self.covariance[(ou + i, ov + j)];
            }
        }
        s
    }

    /// `(ΔX_AΔP_A, Δξ_BΔπ_B, Cov(X_A, ξ_B))` read from the covariance.
    pub fn structure_moments(&self, c: &AltCoefficients) -> (f64, f64, f64) {
        let pa = (self.quad(c.alpha, c.alpha, 0, 0) * self.quad(c.gamma, c.gamma, 2, 2)).sqrt();
        let pb = (self.quad(c.beta, c.beta, 0, 0) * self.quad(c.delta, c.delta, 2, 2)).sqrt();
        (pa, pb, self.quad(c.alpha, c.beta, 0, 0))
    }
}

#[derive(Debug, Clone)]
pub struct TwoModeRun {
    pub state: DensityMatrix,
    pub moments: TwoModeCovariance,
    pub time: f64,
}

/// Damps the product of two truncated coherent states with the local Kraus
/// families of each mode for time `t`.
pub fn simulate_two_mode(pair: &ModePair, alphas: [C64; 2], dim: usize, t: f64) -> Result<TwoModeRun> {
    let f = TensorFactorization::new(vec![dim, dim])?;
    let psi = crate::linalg::kron_vec(&coherent_state(alphas[0], dim), &coherent_state(alphas[1], dim));
    let mut rho = projector(&psi);
    for mode in 0..2 {
        rho = apply_local_kraus(&rho, &f, mode, &kraus_operators(pair.damping[mode], t, dim))?;
    }
    let rho = crate::linalg::hermitian_part(&rho);
    let moments = TwoModeCovariance::from_density(&rho, dim, pair)?;
    Ok(TwoModeRun { state: DensityMatrix::from_matrix_unchecked(rho), moments, time: t })
}
