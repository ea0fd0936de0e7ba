use super::bipartite_dims;
use crate::error::Result;
use crate::linalg::{self, c, CMat, ZERO};
use crate::tensor::{partial_trace, DensityMatrix, TensorFactorization};

/// Eigenvalue gaps below this make the marginal spectrum degenerate.
const DEGENERACY_GAP: f64 = 1e-8;

/// `ρ = Σ_k p_k |k⟩⟨k| ⊗ ρ_k` with `|k⟩` the columns of `basis`.
#[derive(Debug, Clone)]
pub struct ZeroDiscordWitness {
    pub probabilities: Vec<f64>,
    pub basis: CMat,
    pub conditional_states: Vec<CMat>,
    /// Max-norm distance between the decomposition and the input.
    pub reconstruction_error: f64,
}

impl ZeroDiscordWitness {
    pub fn reconstruct(&self) -> CMat {
        let d = self.basis.nrows();
        let du = self.conditional_states[0].nrows();
        let mut out = CMat::zeros(d * du, d * du);
        for (k, (p, cond)) in self.probabilities.iter().zip(&self.conditional_states).enumerate() {
            let v = self.basis.column(k).into_owned();
            out += linalg::kron(&linalg::projector(&v), cond).scale(*p);
        }
        out
    }
}

#[derive(Debug, Clone)]
pub struct ZeroDiscordClass {
    /// Classical on factor 0, arbitrary on factor 1.
    pub classical_quantum: bool,
    /// Classical on both factors.
    pub classical_classical: bool,
    /// Set when the factor-0 marginal has eigenvalue gaps below 1e-8; the
    /// basis then came from the secondary block-diagonalization search.
    pub degenerate_spectrum: bool,
    /// Orthonormal factor-0 basis (columns) in which the blocks were tested.
    pub basis: CMat,
    /// Largest off-diagonal block entry in `basis`.
    pub off_diagonal_residual: f64,
    /// Largest commutator entry among the conditional states.
    pub commutator_residual: f64,
    pub witness: Option<ZeroDiscordWitness>,
}

/// Tests whether `ρ` has the zero-discord forms `Σ p_k |k⟩⟨k| ⊗ ρ_k`
/// (classical-quantum) and `Σ p_kl |k⟩⟨k| ⊗ |l⟩⟨l|` (classical-classical),
/// with factor 0 as the classical side.
pub fn classify_zero_discord(rho: &DensityMatrix, f: &TensorFactorization, tol: f64) -> Result<ZeroDiscordClass> {
    let (da, db) = bipartite_dims(rho, f)?;
    let marginal = partial_trace(rho, f, &[0])?;
    let (vals, mut vecs) = linalg::eigh(marginal.matrix());

    let clusters = cluster(&vals);
    let degenerate = clusters.iter().any(|c| c.len() > 1);
    if degenerate {
        for cl in clusters.iter().filter(|c| c.len() > 1) {
            let sub = CMat::from_fn(da, cl.len(), |r, j| vecs[(r, cl[j])]);
            let rotated = split_degenerate(rho.matrix(), &sub, db);
            for (j, &col) in cl.iter().enumerate() {
                vecs.set_column(col, &rotated.column(j));
            }
        }
    }

    let blocks = blocks_in_basis(rho.matrix(), &vecs, db);
    let mut off = 0.0_f64;
    for k in 0..da {
        for l in 0..da {
            if k != l {
                off = off.max(linalg::max_abs(&blocks[k * da + l]));
            }
        }
    }
    let diag: Vec<&CMat> = (0..da).map(|k| &blocks[k * da + k]).collect();
    let mut comm = 0.0_f64;
    for k in 0..da {
        for l in k + 1..da {
            comm = comm.max(linalg::max_abs(&linalg::commutator(diag[k], diag[l])));
        }
    }

    let classical_quantum = off <= tol;
    let classical_classical = classical_quantum && comm <= tol;
    let witness = classical_quantum.then(|| {
        let probabilities: Vec<f64> = diag.iter().map(|b| linalg::trace(b).re).collect();
        let conditional_states = diag
            .iter()
            .zip(&probabilities)
            .map(|(b, &p)| if p > 0.0 { b.unscale(p) } else { CMat::identity(db, db).unscale(db as f64) })
            .collect();
        let mut w = ZeroDiscordWitness { probabilities, basis: vecs.clone(), conditional_states, reconstruction_error: 0.0 };
        w.reconstruction_error = linalg::max_abs(&(w.reconstruct() - rho.matrix()));
        w
    });
    Ok(ZeroDiscordClass {
        classical_quantum,
        classical_classical,
        degenerate_spectrum: degenerate,
        basis: vecs,
        off_diagonal_residual: off,
        commutator_residual: comm,
        witness,
    })
}

/// Groups indices of an ascending spectrum into runs with gaps < `DEGENERACY_GAP`.
fn cluster(vals: &[f64]) -> Vec<Vec<usize>> {
    let mut out: Vec<Vec<usize>> = Vec::new();
    for (i, &v) in vals.iter().enumerate() {
        match out.last_mut() {
            Some(last) if v - vals[*last.last().unwrap()] < DEGENERACY_GAP => last.push(i),
            _ => out.push(vec![i]),
        }
    }
    out
}

/// Blocks `⟨k|ρ|l⟩` (operators on factor 1) for the basis columns of `vecs`.
fn blocks_in_basis(rho: &CMat, vecs: &CMat, db: usize) -> Vec<CMat> {
    let k = vecs.ncols();
    let u = linalg::kron(vecs, &linalg::identity(db));
    let r = u.adjoint() * rho * &u;
    (0..k * k)
        .map(|idx| r.view(((idx / k) * db, (idx % k) * db), (db, db)).into_owned())
        .collect()
}

/// Within a degenerate eigenspace (columns of `sub`) the product basis is not
/// fixed by the marginal. The family `M_X = tr_B[(I⊗X) ρ]` restricted to the
/// subspace must be simultaneously diagonal for a classical-quantum form, so a
/// generic real combination of the Hermitian family is diagonalized.
fn split_degenerate(rho: &CMat, sub: &CMat, db: usize) -> CMat {
    let g = sub.ncols();
    let blocks = blocks_in_basis(rho, sub, db);
    let mut combo = CMat::zeros(g, g);
    let mut idx = 0usize;
    let mut weight = || {
        idx += 1;
        // fixed irrational weights keep the search deterministic
        ((idx as f64) * 0.754_877_666_246_692_7).fract() + 0.1 * (idx as f64).sqrt().fract()
    };
    for r in 0..db {
        for s in r..db {
            let w_re = weight();
            let w_im = weight();
            for i in 0..g {
                for j in 0..g {
                    let b = &blocks[i * g + j];
                    // tr(B X) for X = |s⟩⟨r| + |r⟩⟨s| and i(|s⟩⟨r| − |r⟩⟨s|)
                    let sym = b[(r, s)] + b[(s, r)];
                    let asym = (b[(r, s)] - b[(s, r)]) * c(0.0, 1.0);
                    let val = if r == s { b[(r, r)] * w_re } else { sym * w_re + asym * w_im };
                    combo[(i, j)] += val;
                }
            }
        }
    }
    if combo.iter().all(|z| *z == ZERO) {
        return sub.clone();
    }
    let (_, w) = linalg::eigh(&combo);
    sub * w
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{haar_unitary, kron, random_density, random_unit_vector};
    use crate::tensor::{BellLabel, PureState};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn cq_state(rng: &mut ChaCha8Rng, da: usize, db: usize, commuting: bool) -> CMat {
        let u = haar_unitary(da, rng);
        let common = haar_unitary(db, rng);
        let mut probs: Vec<f64> = (0..da).map(|_| rng.random_range(0.05..1.0)).collect();
        let s: f64 = probs.iter().sum();
        probs.iter_mut().for_each(|p| *p /= s);
        let mut m = CMat::zeros(da * db, da * db);
        for k in 0..da {
            let cond = if commuting {
                let mut w: Vec<f64> = (0..db).map(|_| rng.random_range(0.0..1.0)).collect();
                let t: f64 = w.iter().sum();
                w.iter_mut().for_each(|x| *x /= t);
                let d = CMat::from_diagonal(&crate::linalg::CVec::from_iterator(db, w.iter().map(|&x| c(x, 0.0))));
                &common * d * common.adjoint()
            } else {
                random_density(db, rng)
            };
            let v = u.column(k).into_owned();
            m += kron(&linalg::projector(&v), &cond).scale(probs[k]);
        }
        linalg::hermitian_part(&m)
    }

    #[test]
    fn classical_classical_states() {
        let mut rng = ChaCha8Rng::seed_from_u64(41);
        let f = TensorFactorization::new(vec![3, 2]).unwrap();
        for _ in 0..10 {
            let rho = DensityMatrix::new(cq_state(&mut rng, 3, 2, true)).unwrap();
            let cls = classify_zero_discord(&rho, &f, 1e-8).unwrap();
            assert!(cls.classical_quantum && cls.classical_classical);
            assert!(cls.witness.unwrap().reconstruction_error < 1e-8);
        }
    }

    #[test]
    fn classical_quantum_with_noncommuting_conditionals() {
        let mut rng = ChaCha8Rng::seed_from_u64(42);
        let f = TensorFactorization::qubits(2);
        for _ in 0..10 {
            let rho = DensityMatrix::new(cq_state(&mut rng, 2, 2, false)).unwrap();
            let cls = classify_zero_discord(&rho, &f, 1e-8).unwrap();
            assert!(cls.classical_quantum);
            assert!(!cls.classical_classical);
        }
    }

    #[test]
    fn entangled_states_are_not_classical() {
        let f = TensorFactorization::qubits(2);
        let cls = classify_zero_discord(&BellLabel::PhiPlus.state().density(), &f, 1e-8).unwrap();
        assert!(!cls.classical_quantum && !cls.classical_classical);
        assert!(cls.degenerate_spectrum);
        let mut rng = ChaCha8Rng::seed_from_u64(43);
        let psi = PureState::new(random_unit_vector(6, &mut rng)).unwrap();
        let cls = classify_zero_discord(&psi.density(), &TensorFactorization::new(vec![2, 3]).unwrap(), 1e-8).unwrap();
        assert!(!cls.classical_quantum);
    }

    #[test]
    fn degenerate_marginal_secondary_search() {
        // (|0⟩⟨0| ⊗ σ0 + |1⟩⟨1| ⊗ σ1)/2 written in a rotated classical basis:
        // the marginal is I/2 so the eigenbasis is arbitrary.
        let mut rng = ChaCha8Rng::seed_from_u64(44);
        let u = haar_unitary(2, &mut rng);
        let s0 = random_density(2, &mut rng);
        let s1 = random_density(2, &mut rng);
        let p = |k: usize| linalg::projector(&u.column(k).into_owned());
        let m = linalg::hermitian_part(&(kron(&p(0), &s0) + kron(&p(1), &s1)).scale(0.5));
        let cls = classify_zero_discord(&DensityMatrix::new(m).unwrap(), &TensorFactorization::qubits(2), 1e-8).unwrap();
        assert!(cls.degenerate_spectrum);
        assert!(cls.classical_quantum);
        assert!(cls.witness.unwrap().reconstruction_error < 1e-8);
    }

    #[test]
    fn maximally_mixed_is_classical_classical() {
        let cls = classify_zero_discord(&DensityMatrix::maximally_mixed(4), &TensorFactorization::qubits(2), 1e-8).unwrap();
        assert!(cls.classical_quantum && cls.classical_classical);
    }
}
