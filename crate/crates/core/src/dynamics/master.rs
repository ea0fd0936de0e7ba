//! Fixed-step fourth-order Runge–Kutta for Markovian master equations, with
//! the quantum Brownian motion generator
//! `dρ/dt = −i[H, ρ] − iγ[x, {p, ρ}] − 2mγk_BT [x, [x, ρ]]` in a Fock basis.

use super::damping::coherent_state;
use crate::error::{Error, Result};
use crate::linalg::{anticommutator, commutator, projector, trace, CMat, C64};
use crate::second_quant::build_fock_ops;
use crate::tensor::DensityMatrix;

/// Largest tolerated drift of `tr ρ` from its initial value.
pub const TRACE_DRIFT_TOL: f64 = 1e-6;

/// Purity growth above `(tr ρ₀)²` treated as instability. Generators that are
/// not completely positive may overshoot slightly, so this is looser.
const PURITY_BLOWUP: f64 = 1e-3;

#[derive(Debug, Clone)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub states: Vec<CMat>,
    /// `max_t |tr ρ(t) − tr ρ(0)|`.
    pub max_trace_drift: f64,
    pub steps: usize,
}

/// Integrates `dρ/dt = L(ρ)` through `times` (ascending, starting at the
/// initial time) with steps no longer than `max_step`.
pub fn integrate_rk4(rho0: &CMat, generator: impl Fn(&CMat) -> CMat, times: &[f64], max_step: f64) -> Result<Trajectory> {
    if times.is_empty() || times.windows(2).any(|w| !(w[1] >= w[0])) {
        return Err(Error::DomainError("time grid must be nonempty and ascending".into()));
    }
    if !(max_step > 0.0) {
        return Err(Error::DomainError("step must be positive".into()));
    }
    let tr0 = trace(rho0).re;
    let mut rho = rho0.clone();
    let mut states = vec![rho.clone()];
    let mut drift = 0.0f64;
    let mut steps = 0;
    let half = C64::new(0.5, 0.0);
    for w in times.windows(2) {
        let span = w[1] - w[0];
        if span == 0.0 {
            states.push(rho.clone());
            continue;
        }
        let n = (span / max_step).ceil().max(1.0) as usize;
        let h = span / n as f64;
        let hc = C64::new(h, 0.0);
        for _ in 0..n {
            let k1 = generator(&rho);
            let k2 = generator(&(&rho + &k1 * (hc * half)));
            let k3 = generator(&(&rho + &k2 * (hc * half)));
            let k4 = generator(&(&rho + &k3 * hc));
            rho += (k1 + (k2 + k3) * C64::new(2.0, 0.0) + k4) * (hc / 6.0);
            steps += 1;
            let tr = trace(&rho);
            let d = (tr.re - tr0).abs().max(tr.im.abs());
            drift = drift.max(d);
            let purity = trace(&(&rho * &rho)).re;
            if !d.is_finite() || d > TRACE_DRIFT_TOL || !(purity <= tr0 * tr0 * (1.0 + PURITY_BLOWUP)) {
                return Err(Error::StepSizeTooLarge(format!(
                    "step {h:e} at t = {:.6}: trace drift {d:e}, purity {purity:e}",
                    w[0]
                )));
            }
        }
        states.push(rho.clone());
    }
    Ok(Trajectory { times: times.to_vec(), states, max_trace_drift: drift, steps })
}

/// `k(2aρa† − a†aρ − ρa†a)` on a truncated Fock space.
pub fn amplitude_damping_generator(dim: usize, k: f64) -> impl Fn(&CMat) -> CMat {
    let ops = build_fock_ops(dim);
    let (a, ad, n) = (ops.a, ops.a_dagger, ops.n);
    move |rho: &CMat| (&a * rho * &ad * C64::new(2.0, 0.0) - &n * rho - rho * &n) * C64::new(k, 0.0)
}

/// Parameters of the quantum Brownian motion master equation. The Fock basis
/// belongs to an oscillator of mass `mass` and frequency `basis_frequency`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QbmMaster {
    pub mass: f64,
    pub gamma: f64,
    pub kt: f64,
    pub basis_frequency: f64,
    /// Include the `−iγ[x, {p, ρ}]` term.
    pub dissipation: bool,
    /// Include the `−2mγk_BT [x, [x, ρ]]` term.
    pub decoherence: bool,
}

impl QbmMaster {
    pub fn new(mass: f64, gamma: f64, kt: f64, basis_frequency: f64) -> Result<Self> {
        if !(mass > 0.0) || !(basis_frequency > 0.0) {
            return Err(Error::DomainError("mass and basis frequency must be positive".into()));
        }
        if !(gamma >= 0.0) || !(kt > 0.0) {
            return Err(Error::DomainError("need γ ≥ 0 and T > 0".into()));
        }
        Ok(Self { mass, gamma, kt, basis_frequency, dissipation: true, decoherence: true })
    }

    /// `D = 2mγk_BT`: `ρ(x, x′)` decays as `e^{−D(x−x′)²t}` under the last term alone.
    pub fn diffusion(&self) -> f64 {
        2.0 * self.mass * self.gamma * self.kt
    }

    pub fn quadratures(&self, dim: usize) -> (CMat, CMat) {
        let ops = build_fock_ops(dim);
        (ops.position(self.mass, self.basis_frequency), ops.momentum(self.mass, self.basis_frequency))
    }

    /// `p²/2m + ½mω²x²` built from the truncated quadratures.
    pub fn harmonic_hamiltonian(&self, dim: usize, omega: f64) -> CMat {
        let (x, p) = self.quadratures(dim);
        &p * &p * C64::new(0.5 / self.mass, 0.0) + &x * &x * C64::new(0.5 * self.mass * omega * omega, 0.0)
    }

    pub fn generator(&self, h: &CMat) -> impl Fn(&CMat) -> CMat {
        let (x, p) = self.quadratures(h.nrows());
        let h = h.clone();
        let gamma = if self.dissipation { self.gamma } else { 0.0 };
        let d = if self.decoherence { self.diffusion() } else { 0.0 };
        let mi = C64::new(0.0, -1.0);
        move |rho: &CMat| {
            let mut out = commutator(&h, rho) * mi;
            if gamma != 0.0 {
                out += commutator(&x, &anticommutator(&p, rho)) * (mi * gamma);
            }
            if d != 0.0 {
                out -= commutator(&x, &commutator(&x, rho)) * C64::new(d, 0.0);
            }
            out
        }
    }

    /// Step bound `1/‖L‖` with `‖L‖` estimated from operator norms.
    pub fn stable_step(&self, h: &CMat) -> f64 {
        let (x, p) = self.quadratures(h.nrows());
        let nx = x.norm();
        let np = p.norm();
        let d = if self.decoherence { self.diffusion() } else { 0.0 };
        let bound = 2.0 * h.norm() + 4.0 * self.gamma * nx * np + 4.0 * d * nx * nx;
        1.0 / bound.max(1e-12)
    }
}

pub fn integrate_qbm_master(rho0: &DensityMatrix, params: &QbmMaster, h: &CMat, times: &[f64]) -> Result<Trajectory> {
    if h.shape() != (rho0.dim(), rho0.dim()) {
        return Err(Error::DimensionMismatch { expected: rho0.dim(), found: h.nrows() });
    }
    integrate_rk4(rho0.matrix(), params.generator(h), times, params.stable_step(h))
}

/// `ψ_n(x)` for `n < dim`: oscillator eigenfunctions of mass `m`, frequency `ω`.
pub fn hermite_functions(x: f64, dim: usize, mass: f64, omega: f64) -> Vec<f64> {
    let xi = (mass * omega).sqrt() * x;
    let mut psi = vec![0.0; dim];
    psi[0] = (mass * omega / std::f64::consts::PI).powf(0.25) * (-0.5 * xi * xi).exp();
    if dim > 1 {
        psi[1] = 2f64.sqrt() * xi * psi[0];
    }
    for n in 1..dim.saturating_sub(1) {
        let nf = n as f64;
        psi[n + 1] = (2.0 / (nf + 1.0)).sqrt() * xi * psi[n] - (nf / (nf + 1.0)).sqrt() * psi[n - 1];
    }
    psi
}

/// `ρ(x, x′)` of a Fock-basis density matrix.
pub fn position_element(rho: &CMat, x: f64, xp: f64, mass: f64, omega: f64) -> C64 {
    let dim = rho.nrows();
    let a = hermite_functions(x, dim, mass, omega);
    let b = hermite_functions(xp, dim, mass, omega);
    let mut s = C64::new(0.0, 0.0);
    for i in 0..dim {
        for j in 0..dim {
            s += rho[(i, j)] * (a[i] * b[j]);
        }
    }
    s
}

/// `|ρ(x₊, x₋)| / √(ρ(x₊, x₊) ρ(x₋, x₋))`: one for a pure state, decaying under decoherence.
pub fn normalized_coherence(rho: &CMat, x_plus: f64, x_minus: f64, mass: f64, omega: f64) -> f64 {
    let off = position_element(rho, x_plus, x_minus, mass, omega).norm();
    let pp = position_element(rho, x_plus, x_plus, mass, omega).re;
    let mm = position_element(rho, x_minus, x_minus, mass, omega).re;
    off / (pp * mm).sqrt()
}

/// `(|α⟩ + |−α⟩)` normalized, with `α` real so the packets sit at `±d/2`.
pub fn cat_state(separation: f64, dim: usize, mass: f64, omega: f64) -> DensityMatrix {
    let alpha = 0.5 * separation * (0.5 * mass * omega).sqrt();
    let v = coherent_state(C64::new(alpha, 0.0), dim) + coherent_state(C64::new(-alpha, 0.0), dim);
    let n = v.norm();
    DensityMatrix::from_matrix_unchecked(projector(&v.unscale(n)))
}

/// Least-squares slope of `ln y` against `t`.
pub fn log_slope(times: &[f64], values: &[f64]) -> f64 {
    let n = times.len() as f64;
    let ly: Vec<f64> = values.iter().map(|v| v.ln()).collect();
    let mt = times.iter().sum::<f64>() / n;
    let my = ly.iter().sum::<f64>() / n;
    let cov: f64 = times.iter().zip(&ly).map(|(t, y)| (t - mt) * (y - my)).sum();
    let var: f64 = times.iter().map(|t| (t - mt).powi(2)).sum();
    cov / var
}

#[derive(Debug, Clone)]
pub struct CoherenceDecay {
    pub separation: f64,
    pub times: Vec<f64>,
    pub coherence: Vec<f64>,
    /// `−d ln C / dt` from a least-squares fit.
    pub rate: f64,
}

/// Cat of separation `d` under the full generator with harmonic `H_S`. The fit
/// window is `[0, window / (D d²)]` sampled at `samples + 1` points.
pub fn cat_coherence_decay(
    params: &QbmMaster,
    system_frequency: f64,
    separation: f64,
    dim: usize,
    window: f64,
    samples: usize,
) -> Result<CoherenceDecay> {
    let rho0 = cat_state(separation, dim, params.mass, params.basis_frequency);
    let h = params.harmonic_hamiltonian(dim, system_frequency);
    let t_end = window / (params.diffusion() * separation * separation);
    let times: Vec<f64> = (0..=samples).map(|i| t_end * i as f64 / samples as f64).collect();
    let traj = integrate_qbm_master(&rho0, params, &h, &times)?;
    let top = traj.states.iter().map(|r| r[(dim - 1, dim - 1)].re).fold(0.0, f64::max);
    if top > super::damping::TRUNCATION_TOL {
        return Err(Error::TruncationWarning { population: top });
    }
    let (xp, xm) = (0.5 * separation, -0.5 * separation);
    let coherence: Vec<f64> = traj
        .states
        .iter()
        .map(|r| normalized_coherence(r, xp, xm, params.mass, params.basis_frequency))
        .collect();
    let rate = -log_slope(&times, &coherence);
    Ok(CoherenceDecay { separation, times, coherence, rate })
}

/// Fourth cumulant `⟨δx⁴⟩ − 3⟨δx²⟩²` of the position distribution.
pub fn position_fourth_cumulant(rho: &CMat, x: &CMat) -> f64 {
    let ev = |o: &CMat| trace(&(rho * o)).re;
    let mu = ev(x);
    let dx = x - CMat::identity(x.nrows(), x.ncols()) * C64::new(mu, 0.0);
    let d2 = &dx * &dx;
    let m2 = ev(&d2);
    ev(&(&d2 * &d2)) - 3.0 * m2 * m2
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dynamics::damping::apply_channel;
    use crate::linalg::max_abs;

    #[test]
    fn damping_generator_matches_kraus() {
        let dim = 20;
        let rho0 = DensityMatrix::new(projector(&coherent_state(C64::new(1.0, 0.5), dim))).unwrap();
        let (k, t) = (0.5, 1.2);
        let traj = integrate_rk4(rho0.matrix(), amplitude_damping_generator(dim, k), &[0.0, t], 1e-3).unwrap();
        let kraus = apply_channel(&rho0, k, t).unwrap();
        assert!(max_abs(&(traj.states[1].clone() - kraus.matrix())) < 1e-9);
    }

    #[test]
    fn closed_system_conserves_energy() {
        let mut p = QbmMaster::new(1.0, 0.0, 1.0, 1.0).unwrap();
        p.decoherence = false;
        let dim = 25;
        let h = p.harmonic_hamiltonian(dim, 1.3);
        let rho0 = DensityMatrix::new(projector(&coherent_state(C64::new(1.2, 0.0), dim))).unwrap();
        let times: Vec<f64> = (0..=20).map(|i| 0.25 * i as f64).collect();
        let traj = integrate_qbm_master(&rho0, &p, &h, &times).unwrap();
        let e0 = trace(&(&h * rho0.matrix())).re;
        for s in &traj.states {
            assert!((trace(&(&h * s)).re - e0).abs() < 1e-8);
        }
    }

    #[test]
    fn hermite_functions_are_orthonormal() {
        let (m, w, dim) = (1.7, 0.6, 12);
        let h = 0.01;
        let mut gram = vec![vec![0.0; dim]; dim];
        for k in -1500..=1500 {
            let psi = hermite_functions(k as f64 * h, dim, m, w);
            for i in 0..dim {
                for j in 0..dim {
                    gram[i][j] += psi[i] * psi[j] * h;
                }
            }
        }
        for i in 0..dim {
            for j in 0..dim {
                let want = if i == j { 1.0 } else { 0.0 };
                assert!((gram[i][j] - want).abs() < 1e-9);
            }
        }
    }

    #[test]
    fn decoherence_term_alone_gives_gaussian_decay() {
        // no Hamiltonian and no dissipation: ρ(x, x′) → e^{−D(x−x′)²t} ρ(x, x′)
        let mut p = QbmMaster::new(1.0, 1e-3, 200.0, 1.0).unwrap();
        p.dissipation = false;
        let dim = 30;
        let rho0 = cat_state(2.0, dim, 1.0, 1.0);
        let d = 2.0 * 1.0 * 1e-3 * 200.0;
        let t = 0.2;
        let traj = integrate_qbm_master(&rho0, &p, &CMat::zeros(dim, dim), &[0.0, t]).unwrap();
        let c = normalized_coherence(&traj.states[1], 1.0, -1.0, 1.0, 1.0);
        assert!((c.ln() + d * 4.0 * t).abs() < 1e-6, "{}", c.ln());
    }

    #[test]
    fn trace_monitor_rejects_oversized_steps() {
        let p = QbmMaster::new(1.0, 0.1, 50.0, 1.0).unwrap();
        let dim = 20;
        let h = p.harmonic_hamiltonian(dim, 1.0);
        let rho0 = cat_state(2.0, dim, 1.0, 1.0);
        let r = integrate_rk4(rho0.matrix(), p.generator(&h), &[0.0, 1.0], 0.5);
        assert!(matches!(r, Err(Error::StepSizeTooLarge(_))));
    }

    #[test]
    fn gaussian_states_stay_gaussian() {
        let p = QbmMaster::new(1.0, 0.05, 1.0, 1.0).unwrap();
        let dim = 30;
        let h = p.harmonic_hamiltonian(dim, 1.0);
        let rho0 = DensityMatrix::new(projector(&coherent_state(C64::new(0.8, 0.3), dim))).unwrap();
        let times: Vec<f64> = (0..=10).map(|i| 0.3 * i as f64).collect();
        let traj = integrate_qbm_master(&rho0, &p, &h, &times).unwrap();
        let (x, _) = p.quadratures(dim);
        for s in &traj.states {
            assert!(position_fourth_cumulant(s, &x).abs() < 1e-6);
        }
        assert!(traj.max_trace_drift < 1e-12);
    }

    #[test]
    fn doubling_the_separation_quadruples_the_rate() {
        let p = QbmMaster::new(1.0, 0.02, 500.0, 1.0).unwrap();
        let a = cat_coherence_decay(&p, 1.0, 1.5, 30, 1.0, 40).unwrap();
        let b = cat_coherence_decay(&p, 1.0, 3.0, 30, 1.0, 40).unwrap();
        let ratio = b.rate / a.rate;
        eprintln!("rates {} {} ratio {ratio}", a.rate, b.rate);
        assert!((ratio - 4.0).abs() < 0.2, "{ratio}");
    }
}
