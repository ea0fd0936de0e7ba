//! Finite-dimensional states, tensor factorizations ("structures"), partial
//! traces, subsystem permutations, and re-factorization by a global unitary.
//!
//! A structure is an ordered list of factor dimensions. Two structures of the
//! same Hilbert space are related by a [`StructureMap`]: a unitary `W` whose
//! columns are the product basis `|α⟩|β⟩...` of the new factors, written in the
//! old computational basis. Re-factorizing a state returns its components in
//! that new basis, `W† ψ` (or `W† ρ W`).

use crate::error::{Error, Result};
use crate::linalg::{self, c, CMat, CVec, C64, ONE, ZERO};

/// Largest total Hilbert dimension accepted by the dense representation.
pub const MAX_DIM: usize = 4096;

const NORM_TOL: f64 = 1e-12;
const HERMITIAN_TOL: f64 = 1e-12;
const TRACE_TOL: f64 = 1e-12;
/// Eigenvalues below `-POSITIVITY_TOL` make a matrix an invalid density matrix.
pub const POSITIVITY_TOL: f64 = 1e-10;
const UNITARY_TOL: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq)]
pub struct TensorFactorization {
    dims: Vec<usize>,
    labels: Option<Vec<String>>,
}

impl TensorFactorization {
    pub fn new(dims: impl Into<Vec<usize>>) -> Result<Self> {
        let dims = dims.into();
        if dims.is_empty() || dims.iter().any(|&d| d == 0) {
            return Err(Error::FactorizationMismatch(format!(
                "factor dimensions must be positive and non-empty, got {dims:?}"
            )));
        }
        let total = dims.iter().try_fold(1usize, |acc, &d| acc.checked_mul(d));
        match total {
            Some(t) if t <= MAX_DIM => Ok(Self { dims, labels: None }),
            _ => Err(Error::DimensionError(format!(
                "total dimension of {dims:?} exceeds {MAX_DIM}"
            ))),
        }
    }

    pub fn qubits(n: usize) -> Self {
        Self::new(vec![2; n]).expect("qubit register within MAX_DIM")
    }

    pub fn bipartite(da: usize, db: usize) -> Result<Self> {
        Self::new(vec![da, db])
    }

    pub fn with_labels<S: Into<String>>(mut self, labels: impl IntoIterator<Item = S>) -> Result<Self> {
        let labels: Vec<String> = labels.into_iter().map(Into::into).collect();
        if labels.len() != self.dims.len() {
            return Err(Error::FactorizationMismatch(format!(
                "{} labels for {} factors",
                labels.len(),
                self.dims.len()
            )));
        }
        self.labels = Some(labels);
        Ok(self)
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn labels(&self) -> Option<&[String]> {
        self.labels.as_deref()
    }

    pub fn len(&self) -> usize {
        self.dims.len()
    }

    pub fn is_empty(&self) -> bool {
        self.dims.is_empty()
    }

    pub fn total_dim(&self) -> usize {
        self.dims.iter().product()
    }

    pub fn check_dim(&self, dim: usize) -> Result<()> {
        if self.total_dim() == dim {
            Ok(())
        } else {
            Err(Error::FactorizationMismatch(format!(
                "factor dims {:?} multiply to {}, state dimension is {dim}",
                self.dims,
                self.total_dim()
            )))
        }
    }

    pub(crate) fn check_bipartite(&self) -> Result<()> {
        if self.dims.len() == 2 {
            Ok(())
        } else {
            Err(Error::FactorizationMismatch(format!(
                "expected a bipartite factorization, got {} factors",
                self.dims.len()
            )))
        }
    }

    /// Factorization after `permute_subsystems` with the same `perm`.
    pub fn permuted(&self, perm: &[usize]) -> Result<Self> {
        check_permutation(perm, self.len())?;
        let dims = perm.iter().map(|&p| self.dims[p]).collect();
        let labels = self
            .labels
            .as_ref()
            .map(|l| perm.iter().map(|&p| l[p].clone()).collect());
        Ok(Self { dims, labels })
    }

    /// Row-major strides: `index = Σ digit[k] * stride[k]`.
    fn strides(&self) -> Vec<usize> {
        let mut strides = vec![1; self.dims.len()];
        for k in (0..self.dims.len().saturating_sub(1)).rev() {
            strides[k] = strides[k + 1] * self.dims[k + 1];
        }
        strides
    }

    fn digits(&self, mut index: usize) -> Vec<usize> {
        let mut out = vec![0; self.dims.len()];
        for k in (0..self.dims.len()).rev() {
            out[k] = index % self.dims[k];
            index /= self.dims[k];
        }
        out
    }
}

fn check_permutation(perm: &[usize], n: usize) -> Result<()> {
    let mut seen = vec![false; n];
    if perm.len() != n {
        return Err(Error::FactorizationMismatch(format!(
            "permutation of length {} for {n} factors",
            perm.len()
        )));
    }
    for &p in perm {
        if p >= n || seen[p] {
            return Err(Error::FactorizationMismatch(format!("{perm:?} is not a permutation")));
        }
        seen[p] = true;
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq)]
pub struct PureState {
    amplitudes: CVec,
}

impl PureState {
    pub fn new(amplitudes: CVec) -> Result<Self> {
        if amplitudes.is_empty() {
            return Err(Error::InvalidState("empty amplitude vector".into()));
        }
        let norm = amplitudes.norm();
        if (norm - 1.0).abs() > NORM_TOL {
            return Err(Error::InvalidState(format!("norm {norm} differs from 1")));
        }
        Ok(Self { amplitudes })
    }

    /// Normalizes `amplitudes`; fails only on the zero vector.
    pub fn normalized(amplitudes: CVec) -> Result<Self> {
        let norm = amplitudes.norm();
        if norm == 0.0 || !norm.is_finite() {
            return Err(Error::InvalidState("cannot normalize a zero vector".into()));
        }
        Ok(Self { amplitudes: amplitudes.unscale(norm) })
    }

    pub fn from_slice(amplitudes: &[C64]) -> Result<Self> {
        Self::new(CVec::from_column_slice(amplitudes))
    }

    pub fn basis(dim: usize, index: usize) -> Self {
        assert!(index < dim, "basis index {index} out of range for dimension {dim}");
        let mut v = CVec::zeros(dim);
        v[index] = ONE;
        Self { amplitudes: v }
    }

    pub(crate) fn from_unit_vector(amplitudes: CVec) -> Self {
        Self { amplitudes }
    }

    pub fn dim(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn amplitudes(&self) -> &CVec {
        &self.amplitudes
    }

    pub fn into_amplitudes(self) -> CVec {
        self.amplitudes
    }

    pub fn density(&self) -> DensityMatrix {
        DensityMatrix { matrix: linalg::projector(&self.amplitudes) }
    }

    /// `|⟨self|other⟩|`, insensitive to global phase.
    pub fn overlap_abs(&self, other: &Self) -> f64 {
        self.amplitudes.dotc(&other.amplitudes).norm()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix {
    matrix: CMat,
}

impl DensityMatrix {
    pub fn new(matrix: CMat) -> Result<Self> {
        if !matrix.is_square() || matrix.nrows() == 0 {
            return Err(Error::InvalidState("density matrix must be square and non-empty".into()));
        }
        let herm = linalg::max_abs(&(&matrix - matrix.adjoint()));
        if herm > HERMITIAN_TOL {
            return Err(Error::InvalidState(format!("not Hermitian (residual {herm:e})")));
        }
        let tr = linalg::trace(&matrix);
        if (tr - ONE).norm() > TRACE_TOL {
            return Err(Error::InvalidState(format!("trace {tr} differs from 1")));
        }
        let min = linalg::eigvalsh(&matrix)[0];
        if min < -POSITIVITY_TOL {
            return Err(Error::InvalidState(format!("negative eigenvalue {min:e}")));
        }
        Ok(Self { matrix })
    }

    /// Wraps a matrix that is a density matrix by construction (no checks).
    pub(crate) fn from_matrix_unchecked(matrix: CMat) -> Self {
        Self { matrix }
    }

    pub fn maximally_mixed(dim: usize) -> Self {
        Self { matrix: linalg::identity(dim).unscale(dim as f64) }
    }

    /// Diagonal state with the given probabilities.
    pub fn diagonal(probs: &[f64]) -> Result<Self> {
        let m = CMat::from_diagonal(&CVec::from_iterator(probs.len(), probs.iter().map(|&p| c(p, 0.0))));
        Self::new(m)
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn matrix(&self) -> &CMat {
        &self.matrix
    }

    pub fn into_matrix(self) -> CMat {
        self.matrix
    }

    pub fn eigenvalues(&self) -> Vec<f64> {
        linalg::eigvalsh(&self.matrix)
    }

    pub fn purity(&self) -> f64 {
        (&self.matrix * &self.matrix).trace().re
    }

    /// `½‖ρ − σ‖₁`.
    pub fn trace_distance(&self, other: &Self) -> f64 {
        0.5 * linalg::trace_norm_hermitian(&(&self.matrix - &other.matrix))
    }
}

impl From<&PureState> for DensityMatrix {
    fn from(psi: &PureState) -> Self {
        psi.density()
    }
}

/// Kronecker composition in the declared factor order.
pub trait TensorProduct: Sized {
    fn tensor(&self, other: &Self) -> Self;
}

impl TensorProduct for PureState {
    fn tensor(&self, other: &Self) -> Self {
        Self { amplitudes: linalg::kron_vec(&self.amplitudes, &other.amplitudes) }
    }
}

impl TensorProduct for DensityMatrix {
    fn tensor(&self, other: &Self) -> Self {
        Self { matrix: linalg::kron(&self.matrix, &other.matrix) }
    }
}

pub fn tensor_product<T: TensorProduct>(a: &T, b: &T) -> T {
    a.tensor(b)
}

/// Full-space indices split into kept and traced digit groups. Entry
/// `[k][t]` is the full index whose kept digits encode `k` and traced digits `t`.
fn split_index_table(f: &TensorFactorization, keep: &[usize]) -> (usize, usize, Vec<Vec<usize>>) {
    let strides = f.strides();
    let traced: Vec<usize> = (0..f.len()).filter(|i| !keep.contains(i)).collect();
    let kept_dims: Vec<usize> = keep.iter().map(|&k| f.dims[k]).collect();
    let traced_dims: Vec<usize> = traced.iter().map(|&k| f.dims[k]).collect();
    let dk: usize = kept_dims.iter().product();
    let dt: usize = traced_dims.iter().product();
    let offsets = |positions: &[usize], dims: &[usize], n: usize| -> Vec<usize> {
        (0..n)
            .map(|mut idx| {
                let mut off = 0;
                for j in (0..positions.len()).rev() {
                    off += (idx % dims[j]) * strides[positions[j]];
                    idx /= dims[j];
                }
                off
            })
            .collect()
    };
    let kept_off = offsets(keep, &kept_dims, dk);
    let traced_off = offsets(&traced, &traced_dims, dt);
    let table = kept_off
        .iter()
        .map(|&ko| traced_off.iter().map(|&to| ko + to).collect())
        .collect();
    (dk, dt, table)
}

fn check_keep(f: &TensorFactorization, keep: &[usize]) -> Result<Vec<usize>> {
    if keep.is_empty() {
        return Err(Error::FactorizationMismatch("keep set is empty".into()));
    }
    let mut k = keep.to_vec();
    k.sort_unstable();
    k.dedup();
    if k.len() != keep.len() || k.iter().any(|&i| i >= f.len()) {
        return Err(Error::FactorizationMismatch(format!(
            "keep set {keep:?} invalid for {} factors",
            f.len()
        )));
    }
    Ok(k)
}

/// Partial trace of an arbitrary operator (not necessarily a state). Kept
/// factors stay in their original relative order.
pub fn partial_trace_operator(m: &CMat, f: &TensorFactorization, keep: &[usize]) -> Result<CMat> {
    f.check_dim(m.nrows())?;
    let keep = check_keep(f, keep)?;
    let (dk, dt, table) = split_index_table(f, &keep);
    Ok(CMat::from_fn(dk, dk, |i, j| {
        (0..dt).map(|t| m[(table[i][t], table[j][t])]).sum()
    }))
}

pub fn partial_trace(rho: &DensityMatrix, f: &TensorFactorization, keep: &[usize]) -> Result<DensityMatrix> {
    partial_trace_operator(&rho.matrix, f, keep).map(DensityMatrix::from_matrix_unchecked)
}

/// Reduced state of a pure state without forming `|ψ⟩⟨ψ|`.
pub fn reduced_state(psi: &PureState, f: &TensorFactorization, keep: &[usize]) -> Result<DensityMatrix> {
    f.check_dim(psi.dim())?;
    let keep = check_keep(f, keep)?;
    let (dk, dt, table) = split_index_table(f, &keep);
    let a = &psi.amplitudes;
    let m = CMat::from_fn(dk, dk, |i, j| (0..dt).map(|t| a[table[i][t]] * a[table[j][t]].conj()).sum());
    Ok(DensityMatrix::from_matrix_unchecked(m))
}

/// Permutation matrix `P` with `P |i_0 … i_k⟩ = |i_{perm[0]} … i_{perm[k]}⟩`:
/// new factor `j` is old factor `perm[j]`.
pub fn permutation_operator(f: &TensorFactorization, perm: &[usize]) -> Result<CMat> {
    let new_f = f.permuted(perm)?;
    let new_strides = new_f.strides();
    let d = f.total_dim();
    let mut p = CMat::zeros(d, d);
    for old in 0..d {
        let digits = f.digits(old);
        let new: usize = perm.iter().enumerate().map(|(j, &src)| digits[src] * new_strides[j]).sum();
        p[(new, old)] = ONE;
    }
    Ok(p)
}

pub fn permute_subsystems(psi: &PureState, f: &TensorFactorization, perm: &[usize]) -> Result<PureState> {
    f.check_dim(psi.dim())?;
    let p = permutation_operator(f, perm)?;
    Ok(PureState { amplitudes: p * &psi.amplitudes })
}

pub fn permute_density(rho: &DensityMatrix, f: &TensorFactorization, perm: &[usize]) -> Result<DensityMatrix> {
    f.check_dim(rho.dim())?;
    let p = permutation_operator(f, perm)?;
    Ok(DensityMatrix { matrix: &p * &rho.matrix * p.adjoint() })
}

/// Groups consecutive factors: `grouping` lists 0-based factor indices per
/// block, blocks in order, each block contiguous.
pub fn regroup(f: &TensorFactorization, grouping: &[Vec<usize>]) -> Result<TensorFactorization> {
    let mut next = 0;
    let mut dims = Vec::with_capacity(grouping.len());
    for block in grouping {
        if block.is_empty() {
            return Err(Error::InvalidPartition("empty block".into()));
        }
        for &i in block {
            if i != next {
                return Err(Error::InvalidPartition(format!(
                    "blocks {grouping:?} are not contiguous and ordered"
                )));
            }
            next += 1;
        }
        if next > f.len() {
            return Err(Error::InvalidPartition(format!("index beyond {} factors", f.len())));
        }
        dims.push(block.iter().map(|&i| f.dims[i]).product());
    }
    if next != f.len() {
        return Err(Error::InvalidPartition(format!(
            "blocks {grouping:?} do not cover all {} factors",
            f.len()
        )));
    }
    TensorFactorization::new(dims)
}

#[derive(Debug, Clone, PartialEq)]
pub struct StructureMap {
    unitary: CMat,
    factorization: TensorFactorization,
}

impl StructureMap {
    pub fn new(unitary: CMat, factorization: TensorFactorization) -> Result<Self> {
        if !unitary.is_square() {
            return Err(Error::DimensionError("structure-map matrix is not square".into()));
        }
        factorization.check_dim(unitary.nrows())?;
        let res = linalg::unitarity_residual(&unitary);
        if res > UNITARY_TOL {
            return Err(Error::InvalidState(format!("global map not unitary (residual {res:e})")));
        }
        Ok(Self { unitary, factorization })
    }

    pub fn identity(factorization: TensorFactorization) -> Self {
        let d = factorization.total_dim();
        Self { unitary: linalg::identity(d), factorization }
    }

    /// Subsystem permutation as a structure change.
    pub fn permutation(f: &TensorFactorization, perm: &[usize]) -> Result<Self> {
        let p = permutation_operator(f, perm)?;
        Ok(Self { unitary: p.adjoint(), factorization: f.permuted(perm)? })
    }

    /// `cos θ · I − i sin θ · SWAP` on `d ⊗ d`.
    pub fn partial_swap(d: usize, theta: f64) -> Result<Self> {
        let f = TensorFactorization::bipartite(d, d)?;
        let swap = permutation_operator(&f, &[1, 0])?;
        let u = linalg::identity(d * d).scale(theta.cos()) + swap * c(0.0, -theta.sin());
        Self::new(u, f)
    }

    /// Product of local unitaries: leaves every structure-relative property unchanged.
    pub fn local(unitaries: &[CMat]) -> Result<Self> {
        let dims: Vec<usize> = unitaries.iter().map(|u| u.nrows()).collect();
        let f = TensorFactorization::new(dims)?;
        Self::new(linalg::kron_all(unitaries), f)
    }

    pub fn unitary(&self) -> &CMat {
        &self.unitary
    }

    pub fn factorization(&self) -> &TensorFactorization {
        &self.factorization
    }

    pub fn dim(&self) -> usize {
        self.unitary.nrows()
    }

    /// Amplitude `D^{(old index)}_{(new index)} = ⟨new|old⟩` relating an old
    /// computational basis vector to the new product basis.
    pub fn coefficient(&self, old: usize, new: usize) -> C64 {
        self.unitary[(old, new)].conj()
    }

    fn check(&self, dim: usize) -> Result<()> {
        if dim == self.dim() {
            Ok(())
        } else {
            Err(Error::FactorizationMismatch(format!(
                "structure map acts on dimension {}, state has {dim}",
                self.dim()
            )))
        }
    }
}

/// Components of a state relative to the product basis of a new structure.
pub trait Refactorize: Sized {
    fn refactorize(&self, map: &StructureMap) -> Result<Self>;
}

impl Refactorize for PureState {
    fn refactorize(&self, map: &StructureMap) -> Result<Self> {
        map.check(self.dim())?;
        Ok(Self { amplitudes: map.unitary.adjoint() * &self.amplitudes })
    }
}

impl Refactorize for DensityMatrix {
    fn refactorize(&self, map: &StructureMap) -> Result<Self> {
        map.check(self.dim())?;
        Ok(Self { matrix: refactorize_operator(&self.matrix, map)? })
    }
}

pub fn refactorize<T: Refactorize>(state: &T, map: &StructureMap) -> Result<T> {
    state.refactorize(map)
}

/// `W† X W` for an arbitrary operator `X`.
pub fn refactorize_operator(m: &CMat, map: &StructureMap) -> Result<CMat> {
    map.check(m.nrows())?;
    Ok(map.unitary.adjoint() * m * &map.unitary)
}

/// Inverse of [`refactorize_operator`]: `W X W†`.
pub fn unrefactorize_operator(m: &CMat, map: &StructureMap) -> Result<CMat> {
    map.check(m.nrows())?;
    Ok(&map.unitary * m * map.unitary.adjoint())
}

/// Applies a Kraus family acting on one factor: `Σ_n (I⊗K_n⊗I) ρ (I⊗K_n⊗I)†`.
/// Works index-wise so the cost is `O(d_total² · d_factor)` per operator.
pub fn apply_local_kraus(rho: &CMat, f: &TensorFactorization, factor: usize, kraus: &[CMat]) -> Result<CMat> {
    f.check_dim(rho.nrows())?;
    if factor >= f.len() {
        return Err(Error::FactorizationMismatch(format!("factor {factor} out of range")));
    }
    let df = f.dims[factor];
    let stride = f.strides()[factor];
    let d = f.total_dim();
    // full index = rest_base + digit * stride
    let bases: Vec<usize> = (0..d).filter(|i| (i / stride) % df == 0).collect();
    let mut out = CMat::zeros(d, d);
    let mut tmp = CMat::zeros(d, d);
    for k in kraus {
        if k.nrows() != df || k.ncols() != df {
            return Err(Error::DimensionMismatch { expected: df, found: k.nrows() });
        }
        // tmp = (I⊗K⊗I) ρ
        tmp.fill(ZERO);
        for &rb in &bases {
            for a in 0..df {
                let row = rb + a * stride;
                for b in 0..df {
                    let kab = k[(a, b)];
                    if kab == ZERO {
                        continue;
                    }
                    let src = rb + b * stride;
                    for col in 0..d {
                        tmp[(row, col)] += kab * rho[(src, col)];
                    }
                }
            }
        }
        // out += tmp (I⊗K⊗I)†
        for &cb in &bases {
            for a in 0..df {
                let col = cb + a * stride;
                for b in 0..df {
                    let kab = k[(a, b)].conj();
                    if kab == ZERO {
                        continue;
                    }
                    let src = cb + b * stride;
                    for row in 0..d {
                        out[(row, col)] += tmp[(row, src)] * kab;
                    }
                }
            }
        }
    }
    Ok(out)
}

/// Embeds a single-factor operator as `I ⊗ … ⊗ op ⊗ … ⊗ I`.
pub fn embed_operator(op: &CMat, f: &TensorFactorization, factor: usize) -> Result<CMat> {
    if factor >= f.len() || op.nrows() != f.dims[factor] {
        return Err(Error::FactorizationMismatch(format!(
            "operator of size {} cannot act on factor {factor} of {:?}",
            op.nrows(),
            f.dims
        )));
    }
    let parts: Vec<CMat> = f
        .dims
        .iter()
        .enumerate()
        .map(|(i, &d)| if i == factor { op.clone() } else { linalg::identity(d) })
        .collect();
    Ok(linalg::kron_all(&parts))
}

/// The four two-qubit Bell states in the order they appear in a
/// teleportation-style expansion.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BellLabel {
    PsiMinus,
    PsiPlus,
    PhiPlus,
    PhiMinus,
}

impl BellLabel {
    pub const ALL: [BellLabel; 4] = [BellLabel::PsiMinus, BellLabel::PsiPlus, BellLabel::PhiPlus, BellLabel::PhiMinus];

    pub fn state(self) -> PureState {
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let v = match self {
            BellLabel::PhiPlus => [s, 0.0, 0.0, s],
            BellLabel::PhiMinus => [s, 0.0, 0.0, -s],
            BellLabel::PsiPlus => [0.0, s, s, 0.0],
            BellLabel::PsiMinus => [0.0, s, -s, 0.0],
        };
        PureState::from_unit_vector(CVec::from_iterator(4, v.iter().map(|&x| c(x, 0.0))))
    }
}

#[derive(Debug, Clone)]
pub struct BellBlock {
    pub label: BellLabel,
    /// `‖(⟨B|₁₂ ⊗ I₃)|ψ⟩‖`.
    pub weight: f64,
    /// Unnormalized third-qubit vector `(⟨B|₁₂ ⊗ I₃)|ψ⟩`.
    pub residual: CVec,
}

impl BellBlock {
    /// The residual normalized to a unit vector, if non-zero.
    pub fn third_qubit_state(&self) -> Option<CVec> {
        (self.weight > 0.0).then(|| self.residual.unscale(self.weight))
    }
}

#[derive(Debug, Clone)]
pub struct BellExpansion {
    pub blocks: [BellBlock; 4],
}

impl BellExpansion {
    pub fn weights(&self) -> [f64; 4] {
        [self.blocks[0].weight, self.blocks[1].weight, self.blocks[2].weight, self.blocks[3].weight]
    }

    /// `Σ_B |B⟩₁₂ ⊗ residual_B`.
    pub fn reconstruct(&self) -> CVec {
        self.blocks.iter().fold(CVec::zeros(8), |acc, b| {
            acc + linalg::kron_vec(b.label.state().amplitudes(), &b.residual)
        })
    }
}

/// Expands a three-qubit state in the Bell basis of qubits 1+2.
pub fn bell_expand(psi: &PureState) -> Result<BellExpansion> {
    if psi.dim() != 8 {
        return Err(Error::DimensionError(format!("Bell expansion needs dimension 8, got {}", psi.dim())));
    }
    let block = |label: BellLabel| {
        let b = label.state();
        let mut r = CVec::zeros(2);
        for pair in 0..4 {
            let bc = b.amplitudes[pair].conj();
            for k in 0..2 {
                r[k] += bc * psi.amplitudes[pair * 2 + k];
            }
        }
        BellBlock { label, weight: r.norm(), residual: r }
    };
    Ok(BellExpansion { blocks: BellLabel::ALL.map(block) })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{haar_unitary, max_abs, random_density, random_unit_vector};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use std::f64::consts::{FRAC_1_SQRT_2, FRAC_PI_4};

    fn ket(bits: &[usize]) -> PureState {
        bits.iter()
            .map(|&b| PureState::basis(2, b))
            .reduce(|a, b| a.tensor(&b))
            .unwrap()
    }

    fn singlet() -> PureState {
        BellLabel::PsiMinus.state()
    }

    #[test]
    fn tensor_of_basis_vectors_is_row_major() {
        let psi = ket(&[0, 1]);
        assert_eq!(psi.dim(), 4);
        assert_eq!(psi.amplitudes()[1], ONE);
    }

    #[test]
    fn tensor_of_maximally_mixed_qubits() {
        let half = DensityMatrix::maximally_mixed(2);
        let prod = half.tensor(&half);
        assert!(max_abs(&(prod.matrix() - DensityMatrix::maximally_mixed(4).matrix())) < 1e-15);
    }

    #[test]
    fn teleportation_state_first_form() {
        // |u⟩₁ ⊗ (|01⟩ − |10⟩)/√2 has amplitudes u_a/√2 on |a01⟩ and −u_a/√2 on |a10⟩.
        let u = PureState::from_slice(&[c(0.6, 0.0), c(0.0, 0.8)]).unwrap();
        let psi = u.tensor(&singlet());
        for a in 0..2 {
            assert!((psi.amplitudes()[a * 4 + 1] - u.amplitudes()[a] * FRAC_1_SQRT_2).norm() < 1e-15);
            assert!((psi.amplitudes()[a * 4 + 2] + u.amplitudes()[a] * FRAC_1_SQRT_2).norm() < 1e-15);
            assert_eq!(psi.amplitudes()[a * 4], ZERO);
            assert_eq!(psi.amplitudes()[a * 4 + 3], ZERO);
        }
    }

    #[test]
    fn bell_marginal_is_maximally_mixed() {
        let rho = BellLabel::PhiPlus.state().density();
        let f = TensorFactorization::qubits(2);
        let r = partial_trace(&rho, &f, &[0]).unwrap();
        assert!(max_abs(&(r.matrix() - DensityMatrix::maximally_mixed(2).matrix())) < 1e-15);
    }

    #[test]
    fn product_marginal_recovers_factor() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let a = DensityMatrix::new(random_density(2, &mut rng)).unwrap();
        let b = DensityMatrix::new(random_density(3, &mut rng)).unwrap();
        let f = TensorFactorization::new(vec![2, 3]).unwrap();
        let ab = a.tensor(&b);
        assert!(max_abs(&(partial_trace(&ab, &f, &[0]).unwrap().matrix() - a.matrix())) < 1e-14);
        assert!(max_abs(&(partial_trace(&ab, &f, &[1]).unwrap().matrix() - b.matrix())) < 1e-14);
    }

    #[test]
    fn ghz_single_qubit_marginal() {
        let amps: Vec<C64> = (0..8).map(|i| if i == 0 || i == 7 { c(FRAC_1_SQRT_2, 0.0) } else { ZERO }).collect();
        let ghz = PureState::from_slice(&amps).unwrap();
        let f = TensorFactorization::qubits(3);
        let r = partial_trace(&ghz.density(), &f, &[0]).unwrap();
        assert!(max_abs(&(r.matrix() - DensityMatrix::diagonal(&[0.5, 0.5]).unwrap().matrix())) < 1e-15);
    }

    #[test]
    fn partial_trace_rejects_mismatched_factorization() {
        let rho = DensityMatrix::maximally_mixed(4);
        let f = TensorFactorization::new(vec![2, 3]).unwrap();
        assert!(matches!(partial_trace(&rho, &f, &[0]), Err(Error::FactorizationMismatch(_))));
        let f = TensorFactorization::qubits(2);
        assert!(partial_trace(&rho, &f, &[]).is_err());
        assert!(partial_trace(&rho, &f, &[2]).is_err());
    }

    #[test]
    fn reduced_state_matches_partial_trace() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let f = TensorFactorization::new(vec![2, 3, 2]).unwrap();
        let psi = PureState::new(random_unit_vector(12, &mut rng)).unwrap();
        for keep in [vec![0], vec![1], vec![2], vec![0, 2], vec![1, 2]] {
            let a = reduced_state(&psi, &f, &keep).unwrap();
            let b = partial_trace(&psi.density(), &f, &keep).unwrap();
            assert!(max_abs(&(a.matrix() - b.matrix())) < 1e-14);
        }
    }

    #[test]
    fn swap_permutation_on_basis_state() {
        let f = TensorFactorization::qubits(2);
        let out = permute_subsystems(&ket(&[0, 1]), &f, &[1, 0]).unwrap();
        assert_eq!(out, ket(&[1, 0]));
    }

    #[test]
    fn identity_permutation_is_noop() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let f = TensorFactorization::new(vec![2, 3, 2]).unwrap();
        let psi = PureState::new(random_unit_vector(12, &mut rng)).unwrap();
        assert_eq!(permute_subsystems(&psi, &f, &[0, 1, 2]).unwrap(), psi);
    }

    #[test]
    fn reordering_structure_two_one_three() {
        // Structure S₂ = 2+1+3 of the teleportation state: amplitude of
        // |b a c⟩ in the new order equals amplitude of |a b c⟩ in the old one.
        let u = PureState::from_slice(&[c(0.6, 0.0), c(0.0, 0.8)]).unwrap();
        let psi = u.tensor(&singlet());
        let f = TensorFactorization::qubits(3);
        let swapped = permute_subsystems(&psi, &f, &[1, 0, 2]).unwrap();
        for a in 0..2 {
            for b in 0..2 {
                for cc in 0..2 {
                    assert_eq!(swapped.amplitudes()[b * 4 + a * 2 + cc], psi.amplitudes()[a * 4 + b * 2 + cc]);
                }
            }
        }
        // and explicitly: (|0⟩₂|u⟩₁|1⟩₃ − |1⟩₂|u⟩₁|0⟩₃)/√2
        let expected = PureState::basis(2, 0)
            .tensor(&u)
            .tensor(&PureState::basis(2, 1))
            .into_amplitudes()
            .scale(FRAC_1_SQRT_2)
            - PureState::basis(2, 1).tensor(&u).tensor(&PureState::basis(2, 0)).into_amplitudes().scale(FRAC_1_SQRT_2);
        assert!((swapped.amplitudes() - expected).norm() < 1e-15);
    }

    #[test]
    fn permutation_inverse_roundtrip() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let f = TensorFactorization::new(vec![2, 3, 4]).unwrap();
        let psi = PureState::new(random_unit_vector(24, &mut rng)).unwrap();
        let perm = [2, 0, 1];
        let inv = [1, 2, 0];
        let forward = permute_subsystems(&psi, &f, &perm).unwrap();
        let back = permute_subsystems(&forward, &f.permuted(&perm).unwrap(), &inv).unwrap();
        assert!((back.amplitudes() - psi.amplitudes()).norm() < 1e-15);
    }

    #[test]
    fn permutation_rejects_non_permutations() {
        let f = TensorFactorization::qubits(3);
        let psi = ket(&[0, 0, 0]);
        assert!(permute_subsystems(&psi, &f, &[0, 0, 1]).is_err());
        assert!(permute_subsystems(&psi, &f, &[0, 1]).is_err());
    }

    #[test]
    fn regroup_examples() {
        let f = TensorFactorization::qubits(3);
        assert_eq!(regroup(&f, &[vec![0, 1], vec![2]]).unwrap().dims(), &[4, 2]);
        let f = TensorFactorization::qubits(2);
        assert_eq!(regroup(&f, &[vec![0], vec![1]]).unwrap().dims(), &[2, 2]);
        let f = TensorFactorization::new(vec![2, 3, 4]).unwrap();
        assert_eq!(regroup(&f, &[vec![0], vec![1, 2]]).unwrap().dims(), &[2, 12]);
    }

    #[test]
    fn regroup_rejects_bad_partitions() {
        let f = TensorFactorization::qubits(3);
        for bad in [
            vec![vec![0, 2], vec![1]],
            vec![vec![0], vec![1]],
            vec![vec![1, 0], vec![2]],
            vec![vec![0], vec![], vec![1, 2]],
            vec![vec![0, 1, 2, 3]],
        ] {
            assert!(matches!(regroup(&f, &bad), Err(Error::InvalidPartition(_))), "{bad:?}");
        }
    }

    #[test]
    fn identity_map_leaves_amplitudes() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let f = TensorFactorization::qubits(2);
        let psi = PureState::new(random_unit_vector(4, &mut rng)).unwrap();
        let out = psi.refactorize(&StructureMap::identity(f)).unwrap();
        assert_eq!(out, psi);
    }

    #[test]
    fn swap_map_matches_permutation() {
        let mut rng = ChaCha8Rng::seed_from_u64(12);
        let f = TensorFactorization::new(vec![2, 3]).unwrap();
        let psi = PureState::new(random_unit_vector(6, &mut rng)).unwrap();
        let map = StructureMap::permutation(&f, &[1, 0]).unwrap();
        let a = psi.refactorize(&map).unwrap();
        let b = permute_subsystems(&psi, &f, &[1, 0]).unwrap();
        assert!((a.amplitudes() - b.amplitudes()).norm() < 1e-15);
        assert_eq!(map.factorization().dims(), &[3, 2]);
    }

    #[test]
    fn partial_swap_entangles_product_state() {
        let map = StructureMap::partial_swap(2, FRAC_PI_4).unwrap();
        let psi = ket(&[0, 1]).refactorize(&map).unwrap();
        let r = reduced_state(&psi, map.factorization(), &[0]).unwrap();
        let spectrum = r.eigenvalues();
        // oracle: both reduced eigenvalues are 1/2 for cos²θ = sin²θ
        assert!(spectrum.iter().all(|&v| (v - 0.5).abs() < 1e-12));
    }

    #[test]
    fn refactorize_rejects_wrong_dimension() {
        let map = StructureMap::partial_swap(2, 0.3).unwrap();
        assert!(PureState::basis(8, 0).refactorize(&map).is_err());
    }

    #[test]
    fn structure_map_rejects_non_unitary() {
        let f = TensorFactorization::qubits(1);
        let m = CMat::from_row_slice(2, 2, &[ONE, ONE, ZERO, ONE]);
        assert!(StructureMap::new(m, f).is_err());
    }

    #[test]
    fn bell_expansion_of_teleportation_state() {
        let psi = PureState::basis(2, 0).tensor(&singlet());
        let exp = bell_expand(&psi).unwrap();
        for w in exp.weights() {
            assert!((w - 0.5).abs() < 1e-15);
        }
    }

    #[test]
    fn bell_expansion_of_000() {
        let exp = bell_expand(&ket(&[0, 0, 0])).unwrap();
        let w = exp.weights();
        let expected = [0.0, 0.0, FRAC_1_SQRT_2, FRAC_1_SQRT_2];
        for (a, b) in w.iter().zip(expected) {
            assert!((a - b).abs() < 1e-15);
        }
    }

    #[test]
    fn bell_expansion_reconstructs_random_states() {
        let mut rng = ChaCha8Rng::seed_from_u64(13);
        for _ in 0..20 {
            let psi = PureState::new(random_unit_vector(8, &mut rng)).unwrap();
            let exp = bell_expand(&psi).unwrap();
            assert!((exp.reconstruct() - psi.amplitudes()).norm() < 1e-12);
        }
        assert!(matches!(bell_expand(&PureState::basis(4, 0)), Err(Error::DimensionError(_))));
    }

    #[test]
    fn local_kraus_matches_embedded_kraus() {
        let mut rng = ChaCha8Rng::seed_from_u64(14);
        let f = TensorFactorization::new(vec![3, 2, 2]).unwrap();
        let rho = random_density(12, &mut rng);
        let u = haar_unitary(2, &mut rng);
        let k = vec![u.scale(0.6), haar_unitary(2, &mut rng).scale(0.8)];
        let fast = apply_local_kraus(&rho, &f, 1, &k).unwrap();
        let slow = k.iter().fold(CMat::zeros(12, 12), |acc, kk| {
            let e = embed_operator(kk, &f, 1).unwrap();
            acc + &e * &rho * e.adjoint()
        });
        assert!(max_abs(&(fast - slow)) < 1e-14);
    }

    #[test]
    fn density_validation() {
        assert!(DensityMatrix::diagonal(&[0.5, 0.6]).is_err());
        assert!(DensityMatrix::diagonal(&[1.2, -0.2]).is_err());
        assert!(DensityMatrix::diagonal(&[0.25, 0.75]).is_ok());
        assert!(PureState::from_slice(&[ONE, ONE]).is_err());
    }
}
