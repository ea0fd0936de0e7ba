//! Dynamics engines: amplitude damping with exact moments, long-time
//! structure comparison for damped mode pairs, Markovian master-equation
//! integration, and Gaussian propagation of the closed Caldeira–Leggett model.

mod asymptotics;
mod damping;
mod gaussian;
mod master;

pub use asymptotics::{
    asymptotic_uncertainty, covariance_asymptotic, preferred_structure_scan, simulate_two_mode, AltCoefficients, ModePair,
    ScanEntry, TwoModeCovariance, TwoModeRun, COEFFICIENT_TOL, PREFERRED_TOL,
};
pub use damping::{
    apply_channel, coherent_state, heisenberg_moments, kraus_operators, Moments, KRAUS_TAIL_TOL, TRUNCATION_TOL,
};
pub use gaussian::{
    ohmic_model, parallel_decoherence_experiment, symplectic_propagator, DecoherenceTrace, GaussianState,
    MAX_ENV_MODES, UNCERTAINTY_TOL,
};
pub use master::{
    amplitude_damping_generator, cat_coherence_decay, cat_state, hermite_functions, integrate_qbm_master, integrate_rk4,
    log_slope, normalized_coherence, position_element, position_fourth_cumulant, CoherenceDecay, QbmMaster, Trajectory,
    TRACE_DRIFT_TOL,
};
