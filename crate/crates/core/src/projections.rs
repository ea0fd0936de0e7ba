//! Nakajima–Zwanzig projections `Pρ = tr_E ρ ⊗ ρ_E` and numerical witnesses
//! of why projections adapted to two different structures of the same system
//! are not simultaneously usable.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::linalg::{self, kron, CMat};
use crate::tensor::{partial_trace_operator, refactorize_operator, DensityMatrix, StructureMap, TensorFactorization};

#[derive(Debug, Clone, PartialEq)]
pub struct NzProjector {
    factorization: TensorFactorization,
    reference: DensityMatrix,
}

impl NzProjector {
    /// `factorization` must be bipartite `S ⊗ E`; `reference` lives on `E`.
    pub fn new(factorization: TensorFactorization, reference: DensityMatrix) -> Result<Self> {
        if factorization.len() != 2 {
            return Err(Error::FactorizationMismatch(format!(
                "projection needs a bipartite structure, got {} factors",
                factorization.len()
            )));
        }
        if reference.dim() != factorization.dims()[1] {
            return Err(Error::FactorizationMismatch(format!(
                "reference state has dimension {}, environment factor {}",
                reference.dim(),
                factorization.dims()[1]
            )));
        }
        Ok(Self { factorization, reference })
    }

    pub fn factorization(&self) -> &TensorFactorization {
        &self.factorization
    }

    pub fn reference(&self) -> &DensityMatrix {
        &self.reference
    }

    /// `P X = tr_E X ⊗ ρ_E` for any operator `X` on `S ⊗ E`.
    pub fn project_operator(&self, x: &CMat) -> Result<CMat> {
        if x.nrows() != self.factorization.total_dim() || !x.is_square() {
            return Err(Error::FactorizationMismatch(format!(
                "operator of size {} on a space of dimension {}",
                x.nrows(),
                self.factorization.total_dim()
            )));
        }
        let reduced = partial_trace_operator(x, &self.factorization, &[0])?;
        Ok(kron(&reduced, self.reference.matrix()))
    }

    /// `Q X = X − P X`.
    pub fn complement(&self, x: &CMat) -> Result<CMat> {
        Ok(x - self.project_operator(x)?)
    }
}

pub fn nz_project(rho: &DensityMatrix, proj: &NzProjector) -> Result<DensityMatrix> {
    Ok(DensityMatrix::from_matrix_unchecked(proj.project_operator(rho.matrix())?))
}

fn check_map(proj: &NzProjector, map: &StructureMap) -> Result<()> {
    if map.factorization().dims() != proj.factorization().dims() {
        return Err(Error::FactorizationMismatch(format!(
            "structure map acts on {:?}, projector on {:?}",
            map.factorization().dims(),
            proj.factorization().dims()
        )));
    }
    Ok(())
}

/// `d(t) = ‖σ_{E′}(t) − σ_{E′}(0)‖_tr`, where `σ_{E′}(t)` is the new
/// environment's marginal of `ρ_S(t) ⊗ ρ_E` in the structure given by `map`.
pub fn lemma61_witness(family: &[DensityMatrix], rho_e: &DensityMatrix, map: &StructureMap) -> Result<Vec<f64>> {
    let Some(first) = family.first() else {
        return Ok(Vec::new());
    };
    let f = map.factorization();
    if f.len() != 2 || f.dims()[0] != first.dim() || f.dims()[1] != rho_e.dim() {
        return Err(Error::FactorizationMismatch("family and reference do not match the structure map".into()));
    }
    let marginals: Vec<CMat> = family
        .iter()
        .map(|rho_s| {
            if rho_s.dim() != first.dim() {
                return Err(Error::DimensionMismatch { expected: first.dim(), found: rho_s.dim() });
            }
            let joint = kron(rho_s.matrix(), rho_e.matrix());
            partial_trace_operator(&refactorize_operator(&joint, map)?, f, &[1])
        })
        .collect::<Result<_>>()?;
    Ok(marginals.iter().map(|m| linalg::trace_norm_hermitian(&(m - &marginals[0]))).collect())
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Lemma62 {
    /// `max_{m,m′} |A_{mm′}|` with `A = tr_{E′}(Qρ)` in the new structure.
    pub residual: f64,
    /// `|Σ_m A_mm|`, zero because `tr Qρ = 0`.
    pub trace_identity: f64,
}

pub fn lemma62_residual(rho: &DensityMatrix, proj: &NzProjector, map: &StructureMap) -> Result<Lemma62> {
    check_map(proj, map)?;
    let q = proj.complement(rho.matrix())?;
    let a = partial_trace_operator(&refactorize_operator(&q, map)?, map.factorization(), &[0])?;
    Ok(Lemma62 { residual: linalg::max_abs(&a), trace_identity: linalg::trace(&a).norm() })
}

/// `P′X = W [tr_{E′}(W†XW) ⊗ ρ′_E] W†`: the projection adapted to the structure of `map`.
pub fn mapped_projection(x: &CMat, map: &StructureMap, proj: &NzProjector) -> Result<CMat> {
    check_map(proj, map)?;
    let w = map.unitary();
    let inner = proj.project_operator(&refactorize_operator(x, map)?)?;
    Ok(w * inner * w.adjoint())
}

/// `‖P P′ρ − P′ P ρ‖_tr`.
pub fn lemma63_commutator(rho: &DensityMatrix, p1: &NzProjector, map: &StructureMap, p2: &NzProjector) -> Result<f64> {
    let ab = p1.project_operator(&mapped_projection(rho.matrix(), map, p2)?)?;
    let ba = mapped_projection(&p1.project_operator(rho.matrix())?, map, p2)?;
    Ok(linalg::trace_norm(&(ab - ba)))
}

#[derive(Debug, Clone, PartialEq)]
pub struct NzSweep {
    pub lemma62: Vec<Lemma62>,
    pub lemma63: Vec<f64>,
}

impl NzSweep {
    pub fn count_lemma62_above(&self, tol: f64) -> usize {
        self.lemma62.iter().filter(|r| r.residual > tol).count()
    }

    pub fn count_lemma63_above(&self, tol: f64) -> usize {
        self.lemma63.iter().filter(|&&v| v > tol).count()
    }

    pub fn max_trace_identity(&self) -> f64 {
        self.lemma62.iter().map(|r| r.trace_identity).fold(0.0, f64::max)
    }
}

/// Evaluates both lemmas on `count` random full-rank states; state `i` is drawn
/// from its own stream of a ChaCha8 generator seeded with `seed`.
pub fn nz_sweep(count: usize, seed: u64, proj: &NzProjector, map: &StructureMap, proj_new: &NzProjector) -> Result<NzSweep> {
    let d = proj.factorization().total_dim();
    let results: Vec<(Lemma62, f64)> = (0..count)
        .into_par_iter()
        .map(|i| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(i as u64);
            let rho = DensityMatrix::new(linalg::random_density(d, &mut rng))?;
            Ok((lemma62_residual(&rho, proj, map)?, lemma63_commutator(&rho, proj, map, proj_new)?))
        })
        .collect::<Result<_>>()?;
    let (lemma62, lemma63) = results.into_iter().unzip();
    Ok(NzSweep { lemma62, lemma63 })
}
