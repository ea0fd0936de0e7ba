use super::Lct;
use crate::error::{Error, Result};
use crate::linalg::RMat;

/// Pairs `(l, 0)` for `l = 1..n`: every relative coordinate measured from particle 0.
pub fn star_pairs(n: usize) -> Vec<(usize, usize)> {
    (1..n).map(|l| (l, 0)).collect()
}

/// Center-of-mass position `X = Σ m_i x_i / M` plus relative positions
/// `ρ_l = x_i − x_j` for the chosen index pairs (0-based).
#[derive(Debug, Clone)]
pub struct RelativeCoordinates {
    pub masses: Vec<f64>,
    pub pairs: Vec<(usize, usize)>,
    pub total_mass: f64,
    /// Rows `(X, ρ_1, …, ρ_{N−1})` in terms of `(x_1, …, x_N)`.
    pub position_map: RMat,
    /// Inverse map: `x_i = X + Σ_l ω[(i, l)] ρ_l`; column 0 is all ones.
    pub omega: RMat,
    /// Velocity-form kinetic matrix `Ωᵀ diag(m) Ω`: `T = ½ q̇ᵀ K_v q̇`.
    pub velocity_mass: RMat,
}

impl RelativeCoordinates {
    pub fn new(masses: &[f64], pairs: &[(usize, usize)]) -> Result<Self> {
        let n = masses.len();
        if n < 2 {
            return Err(Error::DimensionError("need at least two particles".into()));
        }
        if masses.iter().any(|&m| !(m > 0.0)) {
            return Err(Error::DimensionError("masses must be positive".into()));
        }
        if pairs.len() != n - 1 || pairs.iter().any(|&(i, j)| i >= n || j >= n || i == j) {
            return Err(Error::DependentPairs);
        }
        let total: f64 = masses.iter().sum();
        let mut a = RMat::zeros(n, n);
        for (i, m) in masses.iter().enumerate() {
            a[(0, i)] = m / total;
        }
        for (l, &(i, j)) in pairs.iter().enumerate() {
            a[(l + 1, i)] = 1.0;
            a[(l + 1, j)] = -1.0;
        }
        // rank deficiency shows up as a tiny pivot; the difference rows have integer entries
        let lu = a.clone().lu();
        let det = lu.determinant();
        if det.abs() < 1e-12 {
            return Err(Error::DependentPairs);
        }
        let omega = lu.try_inverse().ok_or(Error::DependentPairs)?;
        let mut mdiag = RMat::zeros(n, n);
        for (i, m) in masses.iter().enumerate() {
            mdiag[(i, i)] = *m;
        }
        let velocity_mass = omega.transpose() * &mdiag * &omega;
        Ok(Self {
            masses: masses.to_vec(),
            pairs: pairs.to_vec(),
            total_mass: total,
            position_map: a,
            omega,
            velocity_mass,
        })
    }

    pub fn n(&self) -> usize {
        self.masses.len()
    }

    /// `μ_l`: diagonal of the velocity-form kinetic matrix for each relative coordinate.
    pub fn reduced_masses(&self) -> Vec<f64> {
        (1..self.n()).map(|l| self.velocity_mass[(l, l)]).collect()
    }

    /// `C_ll' = −K_v[l, l']` for `l ≠ l'` (zero diagonal): the kinetic energy
    /// carries `−Σ_{l≠l'} C_ll' ρ̇_l ρ̇_l' / 2`.
    pub fn mass_polarization(&self) -> RMat {
        let k = self.n() - 1;
        RMat::from_fn(k, k, |i, j| if i == j { 0.0 } else { -self.velocity_mass[(i + 1, j + 1)] })
    }

    /// Exact momentum-form kinetic matrix `A diag(1/m) Aᵀ`: `T = ½ Pᵀ K_p P`.
    pub fn momentum_kinetic(&self) -> RMat {
        let n = self.n();
        let inv_m = RMat::from_fn(n, n, |i, j| if i == j { 1.0 / self.masses[i] } else { 0.0 });
        &self.position_map * inv_m * self.position_map.transpose()
    }

    pub fn lct(&self) -> Lct {
        let n = self.n();
        let mut m = RMat::zeros(2 * n, 2 * n);
        m.view_mut((0, 0), (n, n)).copy_from(&self.position_map);
        m.view_mut((n, n), (n, n)).copy_from(&self.omega.transpose());
        Lct::new(m, "center of mass and relative positions").expect("A ⊕ A⁻ᵀ is canonical")
    }
}

pub fn make_cm_relative(masses: &[f64], pairs: &[(usize, usize)]) -> Result<Lct> {
    Ok(RelativeCoordinates::new(masses, pairs)?.lct())
}
