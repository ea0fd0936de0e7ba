//! Amplitude damping of a single mode: the Kraus family of the lossy-cavity
//! channel and the closed-form Heisenberg moments it induces.
//!
//! The channel solves `dρ/dt = k(2aρa† − a†aρ − ρa†a)` in the interaction
//! picture, so `a(t) = e^{−kt} a` and the fixed point is the vacuum.

use crate::error::{Error, Result};
use crate::linalg::{trace, CMat, CVec, C64};
use crate::second_quant::{build_fock_ops, FockOps};
use crate::tensor::DensityMatrix;

/// Kraus operators with `‖K_n‖_F²` summed over the dropped tail below this are omitted.
pub const KRAUS_TAIL_TOL: f64 = 1e-24;

/// Population allowed on the top Fock level before a channel result is refused.
pub const TRUNCATION_TOL: f64 = 1e-8;

fn ln_binomial(n: usize, k: usize) -> f64 {
    // exact enough for n ≤ a few hundred; dims here are far smaller
    (1..=k).map(|i| ((n - k + i) as f64 / i as f64).ln()).sum()
}

fn xlogy(count: usize, ln_p: f64) -> f64 {
    if count == 0 {
        0.0
    } else {
        count as f64 * ln_p
    }
}

/// `(K_n)_{m, m+n} = √(C(m+n, n) γⁿ (1−γ)^m)` with `γ = 1 − e^{−2kt}`.
///
/// `Σ K_n†K_n = I` holds column by column as a binomial sum, so completeness
/// is exact on the truncated space up to the dropped tail.
pub fn kraus_operators(k: f64, t: f64, dim: usize) -> Vec<CMat> {
    assert!(k >= 0.0 && t >= 0.0 && dim >= 2, "need k ≥ 0, t ≥ 0, dim ≥ 2");
    let decay = 2.0 * k * t;
    let ln_keep = -decay; // ln(1 − γ)
    let ln_gamma = if decay == 0.0 { f64::NEG_INFINITY } else { (-(-decay).exp_m1()).ln() };
    let ops: Vec<CMat> = (0..dim)
        .map(|n| {
            let mut op = CMat::zeros(dim, dim);
            for m in 0..dim - n {
                let ln_w = ln_binomial(m + n, n) + xlogy(n, ln_gamma) + xlogy(m, ln_keep);
                op[(m, m + n)] = C64::new((0.5 * ln_w).exp(), 0.0);
            }
            op
        })
        .collect();
    let norms: Vec<f64> = ops.iter().map(|op| op.iter().map(|z| z.norm_sqr()).sum()).collect();
    let mut keep = norms.len();
    let mut tail = 0.0;
    while keep > 1 && tail + norms[keep - 1] < KRAUS_TAIL_TOL {
        tail += norms[keep - 1];
        keep -= 1;
    }
    ops.into_iter().take(keep).collect()
}

/// `Σ_n K_n ρ K_n†` on a Fock-basis density matrix.
pub fn apply_channel(rho: &DensityMatrix, k: f64, t: f64) -> Result<DensityMatrix> {
    let dim = rho.dim();
    if dim < 2 {
        return Err(Error::DimensionError("Fock space needs at least two levels".into()));
    }
    let top = rho.matrix()[(dim - 1, dim - 1)].re;
    if top > TRUNCATION_TOL {
        return Err(Error::TruncationWarning { population: top });
    }
    let mut out = CMat::zeros(dim, dim);
    for op in kraus_operators(k, t, dim) {
        out += &op * rho.matrix() * op.adjoint();
    }
    Ok(DensityMatrix::from_matrix_unchecked(crate::linalg::hermitian_part(&out)))
}

/// Truncated coherent state `e^{−|α|²/2} Σ αⁿ/√n! |n⟩`, renormalized.
pub fn coherent_state(alpha: C64, dim: usize) -> CVec {
    let mut v = CVec::zeros(dim);
    let mut term = C64::new((-0.5 * alpha.norm_sqr()).exp(), 0.0);
    for n in 0..dim {
        v[n] = term;
        term *= alpha / ((n + 1) as f64).sqrt();
    }
    let norm = v.norm();
    v.unscale(norm)
}

/// First and symmetrized second moments of one mode.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Moments {
    pub x: f64,
    pub p: f64,
    pub x2: f64,
    pub p2: f64,
    /// `⟨(xp + px)/2⟩`.
    pub xp: f64,
}

impl Moments {
    pub fn var_x(&self) -> f64 {
        self.x2 - self.x * self.x
    }

    pub fn var_p(&self) -> f64 {
        self.p2 - self.p * self.p
    }

    /// `Δx Δp`.
    pub fn uncertainty_product(&self) -> f64 {
        (self.var_x() * self.var_p()).sqrt()
    }

    /// Read off a Fock-basis density matrix with quadratures of mass `m`, frequency `ω`.
    pub fn from_density(rho: &CMat, mass: f64, omega: f64) -> Self {
        let ops: FockOps = build_fock_ops(rho.nrows());
        let x = ops.position(mass, omega);
        let p = ops.momentum(mass, omega);
        let ev = |o: &CMat| trace(&(rho * o)).re;
        let xp = &x * &p;
        let sym = (&xp + xp.adjoint()) * C64::new(0.5, 0.0);
        Self { x: ev(&x), p: ev(&p), x2: ev(&(&x * &x)), p2: ev(&(&p * &p)), xp: ev(&sym) }
    }
}

/// Closed-form moments at time `t` (ħ = 1):
/// `x(t) = e^{−kt} x₀`, `x²(t) = e^{−2kt} x₀² + (1/2mω)(1 − e^{−2kt})`,
/// `p²(t) = e^{−2kt} p₀² + (mω/2)(1 − e^{−2kt})`, `xp(t) = e^{−2kt} xp₀`.
pub fn heisenberg_moments(initial: &Moments, mass: f64, omega: f64, k: f64, t: f64) -> Moments {
    let e1 = (-k * t).exp();
    let e2 = (-2.0 * k * t).exp();
    let fill = -(-2.0 * k * t).exp_m1();
    Moments {
        x: e1 * initial.x,
        p: e1 * initial.p,
        x2: e2 * initial.x2 + fill * 0.5 / (mass * omega),
        p2: e2 * initial.p2 + fill * 0.5 * mass * omega,
        xp: e2 * initial.xp,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{identity, max_abs, projector};

    fn coherent_density(alpha: f64, dim: usize) -> DensityMatrix {
        DensityMatrix::new(projector(&coherent_state(C64::new(alpha, 0.0), dim))).unwrap()
    }

    #[test]
    fn zero_time_is_identity() {
        let ops = kraus_operators(0.7, 0.0, 6);
        assert_eq!(ops.len(), 1);
        assert_eq!(ops[0], identity(6));
    }

    #[test]
    fn completeness_below_the_boundary() {
        let ops = kraus_operators(0.7, 1.0, 20);
        let sum = ops.iter().fold(CMat::zeros(20, 20), |acc, k| acc + k.adjoint() * k);
        let resid = max_abs(&(sum - identity(20)).view((0, 0), (19, 19)).into_owned());
        assert!(resid < 1e-10, "{resid}");
    }

    #[test]
    fn full_damping_reaches_vacuum() {
        let rho = coherent_density(1.5, 25);
        let out = apply_channel(&rho, 1.0, 40.0).unwrap();
        assert!((out.matrix()[(0, 0)].re - 1.0).abs() < 1e-12);
        let vac = DensityMatrix::new(projector(&coherent_state(C64::new(0.0, 0.0), 5))).unwrap();
        let still = apply_channel(&vac, 2.0, 3.0).unwrap();
        assert!(max_abs(&(still.matrix() - vac.matrix())) < 1e-15);
    }

    #[test]
    fn mean_position_contracts() {
        let rho = coherent_density(1.0, 30);
        let m0 = Moments::from_density(rho.matrix(), 1.0, 1.0);
        let out = apply_channel(&rho, 0.5, 1.0).unwrap();
        let m1 = Moments::from_density(out.matrix(), 1.0, 1.0);
        assert!((m1.x - (-0.5f64).exp() * m0.x).abs() < 1e-12);
        assert!((m0.x - 2f64.sqrt()).abs() < 1e-12);
    }

    #[test]
    fn truncation_warning() {
        let mut v = CVec::zeros(4);
        v[3] = C64::new(1.0, 0.0);
        let rho = DensityMatrix::new(projector(&v)).unwrap();
        assert!(matches!(apply_channel(&rho, 1.0, 1.0), Err(Error::TruncationWarning { .. })));
    }

    #[test]
    fn moments_follow_closed_form() {
        let (m, w, k) = (1.3, 0.8, 0.4);
        let psi = coherent_state(C64::new(0.6, -0.9), 40);
        let rho = DensityMatrix::new(projector(&psi)).unwrap();
        let m0 = Moments::from_density(rho.matrix(), m, w);
        for t in [0.0, 0.3, 2.0, 7.0] {
            let out = apply_channel(&rho, k, t).unwrap();
            let got = Moments::from_density(out.matrix(), m, w);
            let want = heisenberg_moments(&m0, m, w, k, t);
            for (a, b) in [(got.x, want.x), (got.p, want.p), (got.x2, want.x2), (got.p2, want.p2), (got.xp, want.xp)] {
                assert!((a - b).abs() < 1e-10, "t={t}: {a} vs {b}");
            }
        }
        assert_eq!(heisenberg_moments(&m0, m, w, 0.0, 3.0), m0);
        let late = heisenberg_moments(&m0, m, w, k, 1e3);
        assert!((late.uncertainty_product() - 0.5).abs() < 1e-12);
    }
}
