use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use super::{bipartite_dims, check_factor, entropy_of, mutual_information, vn_entropy};
use crate::error::{Error, Result};
use crate::linalg::{self, c, CMat, ZERO};
use crate::optim::{nelder_mead, SimplexOptions};
use crate::tensor::{partial_trace, permute_density, DensityMatrix, TensorFactorization};

/// Largest measured-factor dimension the measurement chart supports.
pub const MAX_MEASURED_DIM: usize = 4;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OptimizerConfig {
    pub restarts: usize,
    /// Simplex termination tolerance on the objective.
    pub tolerance: f64,
    pub seed: u64,
    pub max_evaluations: usize,
}

impl Default for OptimizerConfig {
    fn default() -> Self {
        Self { restarts: 32, tolerance: 1e-9, seed: 0, max_evaluations: 20_000 }
    }
}

impl OptimizerConfig {
    pub fn with_seed(seed: u64) -> Self {
        Self { seed, ..Self::default() }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TraceEntry {
    pub restart: usize,
    pub parameters: Vec<f64>,
    /// Conditional entropy reached by this restart.
    pub objective: f64,
    pub evaluations: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DiscordReport {
    pub measured_factor: usize,
    pub mutual_information: f64,
    pub classical_correlation: f64,
    pub one_way_discord: f64,
    /// Orthonormal measurement vectors (columns) achieving the optimum.
    pub best_basis: CMat,
    pub optimizer_trace: Vec<TraceEntry>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TwoWayDiscord {
    /// Measurement on factor 0.
    pub measuring_first: DiscordReport,
    /// Measurement on factor 1.
    pub measuring_second: DiscordReport,
    pub value: f64,
}

/// Orthonormal measurement basis from chart parameters.
///
/// Qubits use Bloch angles `(θ, φ)`: the first vector is
/// `(cos θ/2, e^{iφ} sin θ/2)`. Dimensions 3 and 4 use `base · exp(iH)` with
/// `H` expanded in the `d² − 1` generalized Gell-Mann matrices.
pub fn measurement_basis(d: usize, params: &[f64], base: Option<&CMat>) -> Result<CMat> {
    match d {
        2 if base.is_none() => {
            if params.len() != 2 {
                return Err(Error::DimensionMismatch { expected: 2, found: params.len() });
            }
            let (th, ph) = (params[0], params[1]);
            let (cs, sn) = ((th / 2.0).cos(), (th / 2.0).sin());
            let e = c(ph.cos(), ph.sin());
            Ok(CMat::from_row_slice(2, 2, &[c(cs, 0.0), c(sn, 0.0), e * sn, -e * cs]))
        }
        2..=MAX_MEASURED_DIM => {
            if params.len() != d * d - 1 {
                return Err(Error::DimensionMismatch { expected: d * d - 1, found: params.len() });
            }
            let h = gell_mann(d)
                .iter()
                .zip(params)
                .fold(CMat::zeros(d, d), |acc, (g, &t)| acc + g.scale(t));
            let u = linalg::expi_hermitian(&h);
            Ok(match base {
                Some(b) => b * u,
                None => u,
            })
        }
        _ => Err(Error::UnsupportedDimension(d)),
    }
}

/// Generalized Gell-Mann matrices: symmetric, antisymmetric, then diagonal.
fn gell_mann(d: usize) -> Vec<CMat> {
    let mut out = Vec::with_capacity(d * d - 1);
    for j in 0..d {
        for k in j + 1..d {
            let mut s = CMat::zeros(d, d);
            s[(j, k)] = c(1.0, 0.0);
            s[(k, j)] = c(1.0, 0.0);
            out.push(s);
            let mut a = CMat::zeros(d, d);
            a[(j, k)] = c(0.0, -1.0);
            a[(k, j)] = c(0.0, 1.0);
            out.push(a);
        }
    }
    for l in 1..d {
        let norm = (2.0 / (l * (l + 1)) as f64).sqrt();
        let mut m = CMat::zeros(d, d);
        for j in 0..l {
            m[(j, j)] = c(norm, 0.0);
        }
        m[(l, l)] = c(-(l as f64) * norm, 0.0);
        out.push(m);
    }
    out
}

/// `ρ` reshaped into `d_m × d_m` blocks of the unmeasured factor, measured factor first.
struct Blocks {
    dm: usize,
    du: usize,
    blocks: Vec<CMat>,
}

impl Blocks {
    fn new(rho: &DensityMatrix, f: &TensorFactorization, measured: usize) -> Result<Self> {
        bipartite_dims(rho, f)?;
        check_factor(f, measured)?;
        let (m, dm, du) = if measured == 0 {
            (rho.matrix().clone(), f.dims()[0], f.dims()[1])
        } else {
            (permute_density(rho, f, &[1, 0])?.into_matrix(), f.dims()[1], f.dims()[0])
        };
        let blocks = (0..dm * dm)
            .map(|idx| {
                let (a, b) = (idx / dm, idx % dm);
                m.view((a * du, b * du), (du, du)).into_owned()
            })
            .collect();
        Ok(Self { dm, du, blocks })
    }

    /// `Σ_i p_i S(ρ_i)` for the measurement basis given by the columns of `basis`.
    fn conditional_entropy(&self, basis: &CMat) -> f64 {
        let mut total = 0.0;
        let mut cond = CMat::zeros(self.du, self.du);
        for i in 0..self.dm {
            cond.fill(ZERO);
            for a in 0..self.dm {
                let ca = basis[(a, i)].conj();
                for b in 0..self.dm {
                    let w = ca * basis[(b, i)];
                    if w != ZERO {
                        cond += &self.blocks[a * self.dm + b] * w;
                    }
                }
            }
            let p = linalg::trace(&cond).re;
            if p > 1e-300 {
                total += p * entropy_of(&cond.unscale(p));
            }
        }
        total
    }
}

/// Conditional entropy of the unmeasured factor after a projective measurement
/// of `measured` in the orthonormal basis given by the columns of `basis`.
pub fn conditional_entropy(rho: &DensityMatrix, f: &TensorFactorization, measured: usize, basis: &CMat) -> Result<f64> {
    let blocks = Blocks::new(rho, f, measured)?;
    if basis.nrows() != blocks.dm || basis.ncols() != blocks.dm {
        return Err(Error::DimensionMismatch { expected: blocks.dm, found: basis.nrows() });
    }
    Ok(blocks.conditional_entropy(basis))
}

struct Optimum {
    basis: CMat,
    value: f64,
    trace: Vec<TraceEntry>,
}

fn minimize_conditional_entropy(blocks: &Blocks, cfg: &OptimizerConfig) -> Result<Optimum> {
    let d = blocks.dm;
    if d > MAX_MEASURED_DIM {
        return Err(Error::UnsupportedDimension(d));
    }
    if d == 1 {
        let basis = linalg::identity(1);
        let value = blocks.conditional_entropy(&basis);
        return Ok(Optimum { basis, value, trace: vec![] });
    }
    let restarts = cfg.restarts.max(1);
    let opts = SimplexOptions {
        initial_step: if d == 2 { 0.6 } else { 0.4 },
        f_tol: cfg.tolerance,
        x_tol: 1e-10,
        max_evals: cfg.max_evaluations,
    };
    let runs: Vec<(TraceEntry, CMat)> = (0..restarts)
        .into_par_iter()
        .map(|r| {
            let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
            rng.set_stream(r as u64);
            let (x0, base) = if d == 2 {
                (vec![rng.random_range(0.0..std::f64::consts::PI), rng.random_range(0.0..std::f64::consts::TAU)], None)
            } else {
                let base = if r == 0 { linalg::identity(d) } else { linalg::haar_unitary(d, &mut rng) };
                (vec![0.0; d * d - 1], Some(base))
            };
            let objective = |x: &[f64]| {
                let basis = measurement_basis(d, x, base.as_ref()).expect("parameter count fixed by d");
                blocks.conditional_entropy(&basis)
            };
            let res = nelder_mead(objective, &x0, opts);
            let basis = measurement_basis(d, &res.x, base.as_ref()).expect("parameter count fixed by d");
            (TraceEntry { restart: r, parameters: res.x, objective: res.value, evaluations: res.evaluations }, basis)
        })
        .collect();
    // first minimum in restart order, independent of thread scheduling
    let best = runs
        .iter()
        .enumerate()
        .fold(0, |best, (i, run)| if run.0.objective < runs[best].0.objective { i } else { best });
    let basis = runs[best].1.clone();
    let value = runs[best].0.objective;
    Ok(Optimum { basis, value, trace: runs.into_iter().map(|r| r.0).collect() })
}

/// Classical correlation `J = S(ρ_u) − min Σ_i p_i S(ρ_{u|i})` with the
/// minimum over rank-1 projective measurements on `measured`.
pub fn classical_correlation(rho: &DensityMatrix, f: &TensorFactorization, measured: usize, cfg: &OptimizerConfig) -> Result<f64> {
    Ok(one_way_discord(rho, f, measured, cfg)?.classical_correlation)
}

pub fn one_way_discord(rho: &DensityMatrix, f: &TensorFactorization, measured: usize, cfg: &OptimizerConfig) -> Result<DiscordReport> {
    let blocks = Blocks::new(rho, f, measured)?;
    if blocks.dm > MAX_MEASURED_DIM {
        return Err(Error::UnsupportedDimension(blocks.dm));
    }
    let unmeasured = partial_trace(rho, f, &[1 - measured])?;
    let mi = mutual_information(rho, f)?;
    let opt = minimize_conditional_entropy(&blocks, cfg)?;
    let j = vn_entropy(&unmeasured) - opt.value;
    Ok(DiscordReport {
        measured_factor: measured,
        mutual_information: mi,
        classical_correlation: j,
        one_way_discord: mi - j,
        best_basis: opt.basis,
        optimizer_trace: opt.trace,
    })
}

/// Both one-way discords and their maximum.
pub fn two_way_discord(rho: &DensityMatrix, f: &TensorFactorization, cfg: &OptimizerConfig) -> Result<TwoWayDiscord> {
    let first = one_way_discord(rho, f, 0, cfg)?;
    let second = one_way_discord(rho, f, 1, cfg)?;
    let value = first.one_way_discord.max(second.one_way_discord);
    Ok(TwoWayDiscord { measuring_first: first, measuring_second: second, value })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{haar_unitary, kron, max_abs, random_density, unitarity_residual};
    use crate::tensor::{BellLabel, StructureMap, TensorProduct};
    use std::f64::consts::LN_2;

    fn qubits() -> TensorFactorization {
        TensorFactorization::qubits(2)
    }

    fn fast() -> OptimizerConfig {
        OptimizerConfig { restarts: 8, ..OptimizerConfig::default() }
    }

    #[test]
    fn measurement_bases_are_unitary() {
        assert!(unitarity_residual(&measurement_basis(2, &[0.7, 2.1], None).unwrap()) < 1e-15);
        let p3: Vec<f64> = (0..8).map(|i| 0.1 * i as f64).collect();
        assert!(unitarity_residual(&measurement_basis(3, &p3, None).unwrap()) < 1e-13);
        let p4: Vec<f64> = (0..15).map(|i| 0.05 * i as f64 - 0.3).collect();
        assert!(unitarity_residual(&measurement_basis(4, &p4, None).unwrap()) < 1e-13);
        assert!(matches!(measurement_basis(5, &[0.0; 24], None), Err(Error::UnsupportedDimension(5))));
    }

    #[test]
    fn gell_mann_basis_is_traceless_and_orthogonal() {
        for d in 2..=4 {
            let g = gell_mann(d);
            assert_eq!(g.len(), d * d - 1);
            for (i, a) in g.iter().enumerate() {
                assert!(linalg::trace(a).norm() < 1e-14);
                for (j, b) in g.iter().enumerate() {
                    let ip = linalg::trace(&(a * b)).re;
                    let expected = if i == j { 2.0 } else { 0.0 };
                    assert!((ip - expected).abs() < 1e-13);
                }
            }
        }
    }

    #[test]
    fn product_state_has_no_correlations() {
        let rho = DensityMatrix::diagonal(&[0.3, 0.7]).unwrap().tensor(&DensityMatrix::diagonal(&[0.4, 0.6]).unwrap());
        let r = one_way_discord(&rho, &qubits(), 1, &fast()).unwrap();
        assert!(r.classical_correlation.abs() < 1e-10);
        assert!(r.one_way_discord.abs() < 1e-10);
    }

    #[test]
    fn bell_state_values() {
        let bell = BellLabel::PhiPlus.state().density();
        let r = one_way_discord(&bell, &qubits(), 1, &fast()).unwrap();
        assert!((r.classical_correlation - LN_2).abs() < 1e-8);
        assert!((r.one_way_discord - LN_2).abs() < 1e-8);
        let two = two_way_discord(&bell, &qubits(), &fast()).unwrap();
        assert!((two.value - LN_2).abs() < 1e-8);
    }

    #[test]
    fn classical_quantum_state_measured_on_classical_side() {
        // Σ p_k |k⟩⟨k| ⊗ ρ_k with non-commuting ρ_k: zero discord when the
        // classical factor is measured, positive the other way round.
        let ket_plus = CMat::from_element(2, 2, c(0.5, 0.0));
        let zero = CMat::from_row_slice(2, 2, &[c(1.0, 0.0), ZERO, ZERO, ZERO]);
        let p0 = CMat::from_row_slice(2, 2, &[c(1.0, 0.0), ZERO, ZERO, ZERO]);
        let p1 = CMat::from_row_slice(2, 2, &[ZERO, ZERO, ZERO, c(1.0, 0.0)]);
        let m = kron(&p0, &zero).scale(0.5) + kron(&p1, &ket_plus).scale(0.5);
        let rho = DensityMatrix::new(m).unwrap();
        let f = qubits();
        let forward = one_way_discord(&rho, &f, 0, &fast()).unwrap();
        assert!(forward.one_way_discord.abs() < 1e-6);
        assert!((forward.classical_correlation - forward.mutual_information).abs() < 1e-6);
        let backward = one_way_discord(&rho, &f, 1, &fast()).unwrap();
        assert!(backward.one_way_discord > 1e-3);
        let two = two_way_discord(&rho, &f, &fast()).unwrap();
        assert!(two.value > 1e-3);
    }

    #[test]
    fn report_invariants_on_random_states() {
        let mut rng = ChaCha8Rng::seed_from_u64(31);
        for dims in [[2usize, 2], [2, 3], [3, 2]] {
            let f = TensorFactorization::new(dims.to_vec()).unwrap();
            let rho = DensityMatrix::new(random_density(dims[0] * dims[1], &mut rng)).unwrap();
            for measured in 0..2 {
                let r = one_way_discord(&rho, &f, measured, &fast()).unwrap();
                assert!((r.one_way_discord - (r.mutual_information - r.classical_correlation)).abs() < 1e-12);
                assert!(r.mutual_information >= -1e-8);
                assert!(r.classical_correlation >= -1e-8);
                assert!(r.one_way_discord >= -1e-8);
                assert!(r.classical_correlation <= r.mutual_information + 1e-6);
                assert!(unitarity_residual(&r.best_basis) < 1e-12);
            }
        }
    }

    #[test]
    fn unsupported_measured_dimension() {
        let f = TensorFactorization::new(vec![5, 2]).unwrap();
        let rho = DensityMatrix::maximally_mixed(10);
        assert!(matches!(one_way_discord(&rho, &f, 0, &fast()), Err(Error::UnsupportedDimension(5))));
        assert!(one_way_discord(&rho, &f, 1, &fast()).is_ok());
    }

    #[test]
    fn seeded_runs_are_reproducible() {
        let mut rng = ChaCha8Rng::seed_from_u64(33);
        let rho = DensityMatrix::new(random_density(4, &mut rng)).unwrap();
        let cfg = OptimizerConfig::with_seed(77);
        let a = one_way_discord(&rho, &qubits(), 0, &cfg).unwrap();
        let b = one_way_discord(&rho, &qubits(), 0, &cfg).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn local_unitary_invariance() {
        let mut rng = ChaCha8Rng::seed_from_u64(34);
        let rho = DensityMatrix::new(random_density(4, &mut rng)).unwrap();
        let map = StructureMap::local(&[haar_unitary(2, &mut rng), haar_unitary(2, &mut rng)]).unwrap();
        let moved = crate::tensor::refactorize(&rho, &map).unwrap();
        let a = one_way_discord(&rho, &qubits(), 1, &OptimizerConfig::default()).unwrap();
        let b = one_way_discord(&moved, &qubits(), 1, &OptimizerConfig::default()).unwrap();
        assert!((a.one_way_discord - b.one_way_discord).abs() < 2e-6);
        assert!(max_abs(&(moved.matrix() - rho.matrix())) > 1e-3);
    }
}
