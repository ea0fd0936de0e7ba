//! Dense complex/real matrix helpers shared by every module.

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;

pub type C64 = Complex64;
pub type CMat = DMatrix<C64>;
pub type CVec = DVector<C64>;
pub type RMat = DMatrix<f64>;
pub type RVec = DVector<f64>;

pub const ZERO: C64 = C64::new(0.0, 0.0);
pub const ONE: C64 = C64::new(1.0, 0.0);
pub const I: C64 = C64::new(0.0, 1.0);

#[inline]
pub fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

pub fn kron(a: &CMat, b: &CMat) -> CMat {
    a.kronecker(b)
}

pub fn kron_vec(a: &CVec, b: &CVec) -> CVec {
    a.kronecker(b)
}

pub fn kron_all(ops: &[CMat]) -> CMat {
    let mut it = ops.iter();
    let first = it.next().expect("kron_all of an empty list").clone();
    it.fold(first, |acc, m| acc.kronecker(m))
}

pub fn identity(d: usize) -> CMat {
    CMat::identity(d, d)
}

pub fn commutator(a: &CMat, b: &CMat) -> CMat {
    a * b - b * a
}

pub fn anticommutator(a: &CMat, b: &CMat) -> CMat {
    a * b + b * a
}

pub fn max_abs(m: &CMat) -> f64 {
    m.iter().fold(0.0, |acc, z| acc.max(z.norm()))
}

pub fn max_abs_real(m: &RMat) -> f64 {
    m.iter().fold(0.0_f64, |acc, z| acc.max(z.abs()))
}

pub fn trace(m: &CMat) -> C64 {
    m.diagonal().iter().sum()
}

pub fn hermitian_part(m: &CMat) -> CMat {
    (m + m.adjoint()).scale(0.5)
}

/// Eigen-decomposition of a Hermitian matrix, eigenvalues ascending and the
/// eigenvector columns ordered to match.
pub fn eigh(m: &CMat) -> (Vec<f64>, CMat) {
    let eig = SymmetricEigen::new(hermitian_part(m));
    let n = m.nrows();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| eig.eigenvalues[i].total_cmp(&eig.eigenvalues[j]));
    let values = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let mut vectors = CMat::zeros(n, n);
    for (dst, &src) in order.iter().enumerate() {
        vectors.set_column(dst, &eig.eigenvectors.column(src));
    }
    (values, vectors)
}

pub fn eigvalsh(m: &CMat) -> Vec<f64> {
    eigh(m).0
}

/// Real symmetric eigen-decomposition, ascending.
pub fn eigh_real(m: &RMat) -> (Vec<f64>, RMat) {
    let sym = (m + m.transpose()) * 0.5;
    let eig = SymmetricEigen::new(sym);
    let n = m.nrows();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| eig.eigenvalues[i].total_cmp(&eig.eigenvalues[j]));
    let values = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let mut vectors = RMat::zeros(n, n);
    for (dst, &src) in order.iter().enumerate() {
        vectors.set_column(dst, &eig.eigenvectors.column(src));
    }
    (values, vectors)
}

/// `f(M)` for Hermitian `M` through its spectral decomposition.
pub fn hermitian_fn(m: &CMat, f: impl Fn(f64) -> f64) -> CMat {
    let (vals, vecs) = eigh(m);
    let d = CMat::from_diagonal(&CVec::from_iterator(vals.len(), vals.iter().map(|&v| c(f(v), 0.0))));
    &vecs * d * vecs.adjoint()
}

/// `f(M)` for real symmetric `M`.
pub fn symmetric_fn(m: &RMat, f: impl Fn(f64) -> f64) -> RMat {
    let (vals, vecs) = eigh_real(m);
    let d = RMat::from_diagonal(&RVec::from_iterator(vals.len(), vals.iter().map(|&v| f(v))));
    &vecs * d * vecs.transpose()
}

/// Trace norm `‖M‖₁` of a Hermitian matrix.
pub fn trace_norm_hermitian(m: &CMat) -> f64 {
    eigvalsh(m).iter().map(|v| v.abs()).sum()
}

/// Trace norm of an arbitrary square matrix (sum of singular values).
pub fn trace_norm(m: &CMat) -> f64 {
    m.clone().svd(false, false).singular_values.iter().sum()
}

/// `-Σ λ ln λ` over the strictly positive part of a spectrum.
pub fn shannon_nats(values: &[f64]) -> f64 {
    values
        .iter()
        .filter(|&&v| v > 0.0)
        .map(|&v| -v * v.ln())
        .sum()
}

pub fn to_complex(m: &RMat) -> CMat {
    m.map(|x| c(x, 0.0))
}

pub fn unitarity_residual(u: &CMat) -> f64 {
    let n = u.nrows();
    max_abs(&(u.adjoint() * u - identity(n)))
}

/// Matrix exponential of `i·H` for Hermitian `H`.
pub fn expi_hermitian(h: &CMat) -> CMat {
    let (vals, vecs) = eigh(h);
    let d = CMat::from_diagonal(&CVec::from_iterator(vals.len(), vals.iter().map(|&v| C64::from_polar(1.0, v))));
    &vecs * d * vecs.adjoint()
}

pub fn ginibre<R: Rng + ?Sized>(rows: usize, cols: usize, rng: &mut R) -> CMat {
    CMat::from_fn(rows, cols, |_, _| {
        let re: f64 = rng.sample(StandardNormal);
        let im: f64 = rng.sample(StandardNormal);
        c(re, im)
    })
}

/// Haar-random unitary from the QR decomposition of a Ginibre matrix with the
/// phases of `R`'s diagonal divided out.
pub fn haar_unitary<R: Rng + ?Sized>(d: usize, rng: &mut R) -> CMat {
    let z = ginibre(d, d, rng);
    let qr = z.qr();
    let mut q = qr.q();
    let r = qr.r();
    for j in 0..d {
        let rjj = r[(j, j)];
        let phase = if rjj.norm() > 0.0 { rjj / rjj.norm() } else { ONE };
        let mut col = q.column_mut(j);
        col *= phase;
    }
    q
}

pub fn random_unit_vector<R: Rng + ?Sized>(d: usize, rng: &mut R) -> CVec {
    let z = ginibre(d, 1, rng);
    let v = CVec::from_column_slice(z.as_slice());
    let n = v.norm();
    v / c(n, 0.0)
}

/// Random full-rank density matrix `G G† / tr(G G†)` with Ginibre `G`.
pub fn random_density<R: Rng + ?Sized>(d: usize, rng: &mut R) -> CMat {
    let g = ginibre(d, d, rng);
    let m = &g * g.adjoint();
    let t = trace(&m).re;
    hermitian_part(&m).unscale(t)
}

pub fn projector(v: &CVec) -> CMat {
    v * v.adjoint()
}
