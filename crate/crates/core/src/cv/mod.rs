//! Continuous-variable structures: symplectic linear canonical
//! transformations, quadratic Hamiltonians, center-of-mass/relative
//! coordinates, and the Caldeira–Leggett restructuring.
//!
//! Phase-space vectors are `ξ = (x_1..x_n, p_1..p_n)`; a transform maps
//! `ξ' = S ξ` and is canonical iff `S J Sᵀ = J`.

mod caldeira_leggett;
mod relative;

pub use caldeira_leggett::{
    caldeira_leggett_restructure, full_qbm_pipeline, normal_modes, restructure_unchecked, CaldeiraLeggettModel,
    CouplingSign, MassPolarization, NormalModes, QbmPipeline, RestructuredModel,
};
pub use relative::{make_cm_relative, star_pairs, RelativeCoordinates};

use crate::error::{Error, Result};
use crate::linalg::{self, RMat, RVec};

/// Residual tolerance for accepting a matrix as canonical, relative to its scale.
pub const CANONICAL_TOL: f64 = 1e-10;

/// `J = [[0, I], [−I, 0]]` for `n` modes.
pub fn symplectic_form(n: usize) -> RMat {
    let mut j = RMat::zeros(2 * n, 2 * n);
    for i in 0..n {
        j[(i, n + i)] = 1.0;
        j[(n + i, i)] = -1.0;
    }
    j
}

/// `‖S J Sᵀ − J‖_max`; `f64::INFINITY` for non-square or odd-sized input.
pub fn validate_canonical(s: &RMat) -> f64 {
    if !s.is_square() || s.nrows() % 2 != 0 {
        return f64::INFINITY;
    }
    let j = symplectic_form(s.nrows() / 2);
    linalg::max_abs_real(&(s * &j * s.transpose() - j))
}

#[derive(Debug, Clone, PartialEq)]
pub struct Lct {
    matrix: RMat,
    description: String,
}

impl Lct {
    pub fn new(matrix: RMat, description: impl Into<String>) -> Result<Self> {
        let res = validate_canonical(&matrix);
        let scale = linalg::max_abs_real(&matrix).max(1.0).powi(2);
        if res > CANONICAL_TOL * scale {
            return Err(Error::NotCanonical(res));
        }
        Ok(Self { matrix, description: description.into() })
    }

    pub fn identity(n: usize) -> Self {
        Self { matrix: RMat::identity(2 * n, 2 * n), description: "identity".into() }
    }

    /// Point transformation `x' = A x`, `p' = A⁻ᵀ p`.
    pub fn point(a: &RMat, description: impl Into<String>) -> Result<Self> {
        let n = a.nrows();
        if !a.is_square() {
            return Err(Error::DimensionError("point transformation needs a square matrix".into()));
        }
        let inv = a.clone().try_inverse().ok_or(Error::DependentPairs)?;
        let mut m = RMat::zeros(2 * n, 2 * n);
        m.view_mut((0, 0), (n, n)).copy_from(a);
        m.view_mut((n, n), (n, n)).copy_from(&inv.transpose());
        Self::new(m, description)
    }

    /// Direct sum acting on `(self modes) ⊕ (other modes)` with the
    /// `(x…, p…)` ordering preserved.
    pub fn direct_sum(&self, other: &Lct) -> Lct {
        let (a, b) = (self.n_modes(), other.n_modes());
        let n = a + b;
        let mut m = RMat::zeros(2 * n, 2 * n);
        let place = |m: &mut RMat, src: &RMat, k: usize, off: usize| {
            for (bi, bj) in [(0, 0), (0, 1), (1, 0), (1, 1)] {
                for i in 0..k {
                    for j in 0..k {
                        m[(bi * n + off + i, bj * n + off + j)] = src[(bi * k + i, bj * k + j)];
                    }
                }
            }
        };
        place(&mut m, &self.matrix, a, 0);
        place(&mut m, &other.matrix, b, a);
        Lct { matrix: m, description: format!("{} ⊕ {}", self.description, other.description) }
    }

    pub fn matrix(&self) -> &RMat {
        &self.matrix
    }

    pub fn description(&self) -> &str {
        &self.description
    }

    pub fn n_modes(&self) -> usize {
        self.matrix.nrows() / 2
    }

    pub fn residual(&self) -> f64 {
        validate_canonical(&self.matrix)
    }

    /// `self ∘ first`: apply `first`, then `self`.
    pub fn compose(&self, first: &Lct) -> Result<Lct> {
        if self.n_modes() != first.n_modes() {
            return Err(Error::DimensionMismatch { expected: self.matrix.nrows(), found: first.matrix.nrows() });
        }
        Ok(Lct {
            matrix: &self.matrix * &first.matrix,
            description: format!("{} ∘ {}", self.description, first.description),
        })
    }

    /// `S⁻¹ = −J Sᵀ J`, exact for symplectic `S`.
    pub fn inverse(&self) -> Lct {
        let j = symplectic_form(self.n_modes());
        Lct { matrix: -(&j * self.matrix.transpose() * &j), description: format!("inverse of {}", self.description) }
    }
}

/// `H = ½ ξᵀ K ξ + lᵀ ξ + c`.
#[derive(Debug, Clone, PartialEq)]
pub struct QuadraticHamiltonian {
    quadratic: RMat,
    linear: RVec,
    constant: f64,
}

impl QuadraticHamiltonian {
    pub fn new(quadratic: RMat, linear: RVec, constant: f64) -> Result<Self> {
        if !quadratic.is_square() || quadratic.nrows() % 2 != 0 {
            return Err(Error::DimensionError("quadratic form must be 2n × 2n".into()));
        }
        if linear.len() != quadratic.nrows() {
            return Err(Error::DimensionMismatch { expected: quadratic.nrows(), found: linear.len() });
        }
        let asym = linalg::max_abs_real(&(&quadratic - quadratic.transpose()));
        if asym > 1e-12 * linalg::max_abs_real(&quadratic).max(1.0) {
            return Err(Error::DimensionError(format!("quadratic form not symmetric (residual {asym:e})")));
        }
        Ok(Self { quadratic, linear, constant })
    }

    pub fn homogeneous(quadratic: RMat) -> Result<Self> {
        let n = quadratic.nrows();
        Self::new(quadratic, RVec::zeros(n), 0.0)
    }

    /// `Σ p²/2m + ½ xᵀ V x` with the given masses and position Hessian.
    pub fn from_masses(masses: &[f64], potential: &RMat) -> Result<Self> {
        let n = masses.len();
        if potential.nrows() != n || potential.ncols() != n {
            return Err(Error::DimensionMismatch { expected: n, found: potential.nrows() });
        }
        let mut k = RMat::zeros(2 * n, 2 * n);
        k.view_mut((0, 0), (n, n)).copy_from(potential);
        for (i, m) in masses.iter().enumerate() {
            k[(n + i, n + i)] = 1.0 / m;
        }
        Self::homogeneous(k)
    }

    pub fn quadratic(&self) -> &RMat {
        &self.quadratic
    }

    pub fn linear(&self) -> &RVec {
        &self.linear
    }

    pub fn constant(&self) -> f64 {
        self.constant
    }

    pub fn n_modes(&self) -> usize {
        self.quadratic.nrows() / 2
    }

    pub fn position_block(&self) -> RMat {
        let n = self.n_modes();
        self.quadratic.view((0, 0), (n, n)).into_owned()
    }

    pub fn momentum_block(&self) -> RMat {
        let n = self.n_modes();
        self.quadratic.view((n, n), (n, n)).into_owned()
    }

    pub fn cross_block(&self) -> RMat {
        let n = self.n_modes();
        self.quadratic.view((0, n), (n, n)).into_owned()
    }

    pub fn energy(&self, xi: &RVec) -> f64 {
        0.5 * xi.dot(&(&self.quadratic * xi)) + self.linear.dot(xi) + self.constant
    }

    /// `J K`, generator of `ξ̇ = J K ξ` (homogeneous part).
    pub fn dynamical_matrix(&self) -> RMat {
        symplectic_form(self.n_modes()) * &self.quadratic
    }

    /// Normal frequencies of a positive-definite quadratic form, ascending.
    pub fn normal_frequencies(&self) -> Result<Vec<f64>> {
        symplectic_eigenvalues(&self.quadratic)
    }

    /// Eigenvalues of `J K`, sorted by imaginary then real part.
    pub fn dynamical_spectrum(&self) -> Vec<crate::linalg::C64> {
        let mut ev: Vec<_> = self.dynamical_matrix().complex_eigenvalues().iter().copied().collect();
        ev.sort_by(|a, b| a.im.total_cmp(&b.im).then(a.re.total_cmp(&b.re)));
        ev
    }
}

/// Symplectic eigenvalues `ν_1 ≤ … ≤ ν_n` of a positive-definite `2n × 2n`
/// matrix: the positive eigenvalues of the Hermitian `i M^{1/2} J M^{1/2}`.
pub fn symplectic_eigenvalues(m: &RMat) -> Result<Vec<f64>> {
    let n = m.nrows() / 2;
    let (vals, _) = linalg::eigh_real(m);
    if vals[0] <= 0.0 {
        return Err(Error::NotPositiveDefinite(format!("smallest eigenvalue {:e}", vals[0])));
    }
    let root = linalg::symmetric_fn(m, f64::sqrt);
    let g = &root * symplectic_form(n) * &root;
    let h = g.map(|v| crate::linalg::c(0.0, v));
    let ev = linalg::eigvalsh(&h);
    Ok(ev[n..].to_vec())
}

/// `K' = S⁻ᵀ K S⁻¹`, `l' = S⁻ᵀ l` for new coordinates `ξ' = S ξ`.
pub fn transform_hamiltonian(h: &QuadraticHamiltonian, lct: &Lct) -> Result<QuadraticHamiltonian> {
    if h.quadratic.nrows() != lct.matrix.nrows() {
        return Err(Error::DimensionMismatch { expected: h.quadratic.nrows(), found: lct.matrix.nrows() });
    }
    let inv = lct.matrix.clone().lu().try_inverse().ok_or_else(|| Error::NotCanonical(f64::INFINITY))?;
    let inv_t = inv.transpose();
    let k = &inv_t * &h.quadratic * &inv;
    let k = (&k + k.transpose()) * 0.5;
    Ok(QuadraticHamiltonian { quadratic: k, linear: &inv_t * &h.linear, constant: h.constant })
}
