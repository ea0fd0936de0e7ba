//! Second-quantization operator transforms on truncated or finite spaces:
//! Fock ladders, boson translation, Bogoliubov mixing, Holstein–Primakoff,
//! Jordan–Wigner and the fermion sine transform.
//!
//! Every builder is deterministic and fixes its basis convention: the Fock
//! basis is `|0⟩, |1⟩, …`; a spin-1/2 site uses `(|↑⟩, |↓⟩)`; chains are
//! row-major so site 1 is the leftmost factor.

use crate::error::{Error, Result};
use crate::linalg::{anticommutator, commutator, identity, kron_all, CMat, RMat, C64};

#[derive(Debug, Clone, PartialEq)]
pub struct FockOps {
    pub a: CMat,
    pub a_dagger: CMat,
    pub n: CMat,
    pub dim: usize,
}

/// Ladder operators on `span{|0⟩, …, |dim−1⟩}`.
///
/// # Panics
/// If `dim < 2`.
pub fn build_fock_ops(dim: usize) -> FockOps {
    assert!(dim >= 2, "Fock truncation must keep at least two levels");
    let mut a = CMat::zeros(dim, dim);
    for n in 1..dim {
        a[(n - 1, n)] = C64::new((n as f64).sqrt(), 0.0);
    }
    let a_dagger = a.adjoint();
    // diagonal written directly: a†a would round √n·√n
    let n = CMat::from_fn(dim, dim, |i, j| if i == j { C64::new(i as f64, 0.0) } else { C64::new(0.0, 0.0) });
    FockOps { a, a_dagger, n, dim }
}

impl FockOps {
    /// `[a, a†]` on the truncated space: `diag(1, …, 1, −(dim−1))`.
    pub fn commutator(&self) -> CMat {
        commutator(&self.a, &self.a_dagger)
    }

    /// `x = √(ħ/2mω)(a + a†)` with ħ = 1.
    pub fn position(&self, mass: f64, omega: f64) -> CMat {
        (&self.a + &self.a_dagger) * C64::new((0.5 / (mass * omega)).sqrt(), 0.0)
    }

    /// `p = i√(mωħ/2)(a† − a)` with ħ = 1.
    pub fn momentum(&self, mass: f64, omega: f64) -> CMat {
        (&self.a_dagger - &self.a) * C64::new(0.0, (0.5 * mass * omega).sqrt())
    }
}

/// An annihilation/creation pair, not necessarily adjoint to each other
/// after a non-unitary truncation artefact.
#[derive(Debug, Clone, PartialEq)]
pub struct LadderPair {
    pub a: CMat,
    pub a_dagger: CMat,
}

/// `a(θ) = a + θ I`.
pub fn boson_translate(ops: &FockOps, theta: C64) -> LadderPair {
    let id = identity(ops.dim);
    LadderPair { a: &ops.a + &id * theta, a_dagger: &ops.a_dagger + &id * theta.conj() }
}

/// Largest entry of `m` restricted to rows and columns in `keep`.
pub fn restricted_max_abs(m: &CMat, keep: &[usize]) -> f64 {
    let mut worst = 0.0f64;
    for &i in keep {
        for &j in keep {
            worst = worst.max(m[(i, j)].norm());
        }
    }
    worst
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Statistics {
    Boson,
    Fermion,
}

/// A set of annihilation operators on one space together with the basis
/// indices that are free of truncation artefacts.
#[derive(Debug, Clone)]
pub struct ModeSet {
    pub annihilators: Vec<CMat>,
    pub statistics: Statistics,
    pub interior: Vec<usize>,
}

impl ModeSet {
    /// `n_modes` bosonic modes, each truncated to `dim` levels.
    pub fn bosons(n_modes: usize, dim: usize) -> Self {
        let single = build_fock_ops(dim);
        let id = identity(dim);
        let annihilators = (0..n_modes)
            .map(|k| {
                let factors: Vec<CMat> = (0..n_modes).map(|j| if j == k { single.a.clone() } else { id.clone() }).collect();
                kron_all(&factors)
            })
            .collect();
        let total = dim.pow(n_modes as u32);
        let interior = (0..total)
            .filter(|&idx| {
                let mut r = idx;
                (0..n_modes).all(|_| {
                    let digit = r % dim;
                    r /= dim;
                    digit + 1 < dim
                })
            })
            .collect();
        Self { annihilators, statistics: Statistics::Boson, interior }
    }

    /// Jordan–Wigner fermions on `n` sites; no truncation, so every index is interior.
    pub fn fermions(n: usize) -> Result<Self> {
        let annihilators = jordan_wigner(n)?;
        let interior = (0..1usize << n).collect();
        Ok(Self { annihilators, statistics: Statistics::Fermion, interior })
    }

    pub fn len(&self) -> usize {
        self.annihilators.len()
    }

    pub fn is_empty(&self) -> bool {
        self.annihilators.is_empty()
    }

    /// Largest violation of `[a_i, a_j†]_∓ = δ_ij` and `[a_i, a_j]_∓ = 0` on the interior.
    pub fn relation_residual(&self) -> f64 {
        relation_residuals(&self.annihilators, self.statistics, &self.interior).into_iter().fold(0.0, f64::max)
    }
}

fn bracket(stats: Statistics, a: &CMat, b: &CMat) -> CMat {
    match stats {
        Statistics::Boson => commutator(a, b),
        Statistics::Fermion => anticommutator(a, b),
    }
}

/// `(mixed, pairing)` residuals: `[b_i, b_j†]_∓ − δ_ij` and `[b_i, b_j]_∓`.
fn relation_residuals(ops: &[CMat], stats: Statistics, keep: &[usize]) -> [f64; 2] {
    let dim = ops.first().map_or(0, |m| m.nrows());
    let id = identity(dim);
    let mut mixed = 0.0f64;
    let mut pairing = 0.0f64;
    for (i, bi) in ops.iter().enumerate() {
        for (j, bj) in ops.iter().enumerate() {
            let mut m = bracket(stats, bi, &bj.adjoint());
            if i == j {
                m -= &id;
            }
            mixed = mixed.max(restricted_max_abs(&m, keep));
            pairing = pairing.max(restricted_max_abs(&bracket(stats, bi, bj), keep));
        }
    }
    [mixed, pairing]
}

#[derive(Debug, Clone, PartialEq)]
pub enum BogoliubovSpec {
    Single { u: C64, v: C64 },
    /// `a'_i = Σ_j (u_ij a_j + v_ij a_j†)`.
    Multi { u: CMat, v: CMat },
}

impl BogoliubovSpec {
    /// Single mode `u = e^{iθ₁} cosh r`, `v = e^{iθ₂} sinh r`.
    pub fn squeeze(r: f64, theta1: f64, theta2: f64) -> Self {
        Self::Single { u: C64::from_polar(r.cosh(), theta1), v: C64::from_polar(r.sinh(), theta2) }
    }

    pub fn n_modes(&self) -> usize {
        match self {
            Self::Single { .. } => 1,
            Self::Multi { u, .. } => u.nrows(),
        }
    }

    /// `‖U U† ∓ V V† − I‖_max` (minus sign for bosons).
    pub fn condition_residual(&self, stats: Statistics) -> f64 {
        let sign = match stats {
            Statistics::Boson => -1.0,
            Statistics::Fermion => 1.0,
        };
        match self {
            Self::Single { u, v } => (u.norm_sqr() + sign * v.norm_sqr() - 1.0).abs(),
            Self::Multi { u, v } => {
                let m = u * u.adjoint() + v * v.adjoint() * C64::new(sign, 0.0) - identity(u.nrows());
                crate::linalg::max_abs(&m)
            }
        }
    }
}

#[derive(Debug, Clone)]
pub struct BogoliubovOps {
    pub modes: Vec<LadderPair>,
    /// Largest `[b_i, b_j†]_∓ − δ_ij` entry on the artefact-free subspace.
    pub mixed_residual: f64,
    /// Largest `[b_i, b_j]_∓` entry on the same subspace.
    pub pairing_residual: f64,
}

pub const BOGOLIUBOV_TOL: f64 = 1e-8;

pub fn bogoliubov_apply(modes: &ModeSet, spec: &BogoliubovSpec) -> Result<BogoliubovOps> {
    let n = modes.len();
    if spec.n_modes() != n {
        return Err(Error::DimensionMismatch { expected: n, found: spec.n_modes() });
    }
    let (u, v) = match spec {
        BogoliubovSpec::Single { u, v } => (CMat::from_element(1, 1, *u), CMat::from_element(1, 1, *v)),
        BogoliubovSpec::Multi { u, v } => {
            if u.shape() != (n, n) || v.shape() != (n, n) {
                return Err(Error::InvalidSpec("u and v must be square with one row per mode".into()));
            }
            (u.clone(), v.clone())
        }
    };
    let res = spec.condition_residual(modes.statistics);
    if !(res <= BOGOLIUBOV_TOL) {
        let rel = match modes.statistics {
            Statistics::Boson => "|u|² − |v|² = 1",
            Statistics::Fermion => "|u|² + |v|² = 1",
        };
        return Err(Error::InvalidSpec(format!("{rel} violated by {res:e}")));
    }
    let dim = modes.annihilators.first().map_or(0, |m| m.nrows());
    let new: Vec<CMat> = (0..n)
        .map(|i| {
            let mut b = CMat::zeros(dim, dim);
            for (j, a) in modes.annihilators.iter().enumerate() {
                b += a * u[(i, j)] + a.adjoint() * v[(i, j)];
            }
            b
        })
        .collect();
    let [mixed_residual, pairing_residual] = relation_residuals(&new, modes.statistics, &modes.interior);
    let modes = new.into_iter().map(|b| LadderPair { a_dagger: b.adjoint(), a: b }).collect();
    Ok(BogoliubovOps { modes, mixed_residual, pairing_residual })
}

#[derive(Debug, Clone, PartialEq)]
pub struct SpinOps {
    pub sz: CMat,
    pub s_plus: CMat,
    pub s_minus: CMat,
}

impl SpinOps {
    pub fn sx(&self) -> CMat {
        (&self.s_plus + &self.s_minus) * C64::new(0.5, 0.0)
    }

    pub fn sy(&self) -> CMat {
        (&self.s_plus - &self.s_minus) * C64::new(0.0, -0.5)
    }
}

/// `S_z = ħ(s − n)`, `S_+ = ħ√(2s − n) a`, `S_− = ħ a†√(2s − n)` on the
/// first `dim` Fock levels; level `n` stands for `|s, s − n⟩`.
pub fn holstein_primakoff(s: f64, dim: usize, hbar: f64) -> Result<SpinOps> {
    let two_s = 2.0 * s;
    if !(s > 0.0) || (two_s - two_s.round()).abs() > 1e-12 {
        return Err(Error::DomainError(format!("spin {s} is not a positive half-integer")));
    }
    if dim < 2 || dim as f64 > two_s + 1.0 + 1e-12 {
        return Err(Error::DomainError(format!(
            "truncation {dim} reaches levels where 2s − n < 0 (allowed: 2 ≤ dim ≤ {})",
            two_s.round() as usize + 1
        )));
    }
    let ops = build_fock_ops(dim);
    // 2s − n is diagonal in the Fock basis, so its root is entrywise
    let root = CMat::from_fn(dim, dim, |i, j| if i == j { C64::new((two_s - i as f64).sqrt(), 0.0) } else { C64::new(0.0, 0.0) });
    let h = C64::new(hbar, 0.0);
    let sz = CMat::from_fn(dim, dim, |i, j| if i == j { C64::new(hbar * (s - i as f64), 0.0) } else { C64::new(0.0, 0.0) });
    Ok(SpinOps { sz, s_plus: &root * &ops.a * h, s_minus: &ops.a_dagger * &root * h })
}

pub const MAX_JW_SITES: usize = 10;

/// Spin-1/2 site operators in the `(|↑⟩, |↓⟩)` basis, ħ = 1.
pub fn spin_half_z() -> CMat {
    CMat::from_row_slice(2, 2, &[C64::new(0.5, 0.0), C64::new(0.0, 0.0), C64::new(0.0, 0.0), C64::new(-0.5, 0.0)])
}

pub fn spin_half_lowering() -> CMat {
    CMat::from_row_slice(2, 2, &[C64::new(0.0, 0.0), C64::new(0.0, 0.0), C64::new(1.0, 0.0), C64::new(0.0, 0.0)])
}

/// `a_i = (−2)^{i−1} S_1z ⋯ S_{(i−1)z} S_{i−}` for `i = 1..n`.
pub fn jordan_wigner(n: usize) -> Result<Vec<CMat>> {
    if n == 0 || n > MAX_JW_SITES {
        return Err(Error::DomainError(format!("chain length {n} outside 1..={MAX_JW_SITES}")));
    }
    let (sz, sm, id) = (spin_half_z(), spin_half_lowering(), identity(2));
    Ok((0..n)
        .map(|i| {
            let factors: Vec<CMat> = (0..n)
                .map(|j| match j.cmp(&i) {
                    std::cmp::Ordering::Less => &sz * C64::new(-2.0, 0.0),
                    std::cmp::Ordering::Equal => sm.clone(),
                    std::cmp::Ordering::Greater => id.clone(),
                })
                .collect();
            kron_all(&factors)
        })
        .collect())
}

/// `S_jz` on the full chain, for checking `S_jz = a_j†a_j − 1/2`.
pub fn chain_spin_z(n: usize, site: usize) -> CMat {
    let factors: Vec<CMat> = (0..n).map(|j| if j == site { spin_half_z() } else { identity(2) }).collect();
    kron_all(&factors)
}

#[derive(Debug, Clone)]
pub struct FermionFourier {
    /// `d_mi = √(2/(N+1)) sin(mπ i/(N+1))`, rows `m`, columns `i`.
    pub coefficients: RMat,
    pub modes: Vec<CMat>,
}

/// `β_m = Σ_i d_mi a_i` over the Jordan–Wigner fermions of an `n`-site chain.
pub fn fermion_fourier(n: usize) -> Result<FermionFourier> {
    let a = jordan_wigner(n)?;
    let scale = (2.0 / (n as f64 + 1.0)).sqrt();
    let d = RMat::from_fn(n, n, |m, i| {
        scale * (((m + 1) * (i + 1)) as f64 * std::f64::consts::PI / (n as f64 + 1.0)).sin()
    });
    let dim = 1usize << n;
    let modes = (0..n)
        .map(|m| {
            let mut b = CMat::zeros(dim, dim);
            for (i, ai) in a.iter().enumerate() {
                b += ai * C64::new(d[(m, i)], 0.0);
            }
            b
        })
        .collect();
    Ok(FermionFourier { coefficients: d, modes })
}

/// Largest violation of the canonical anticommutation relations.
pub fn car_residual(ops: &[CMat]) -> f64 {
    let all: Vec<usize> = (0..ops.first().map_or(0, |m| m.nrows())).collect();
    relation_residuals(ops, Statistics::Fermion, &all).into_iter().fold(0.0, f64::max)
}
