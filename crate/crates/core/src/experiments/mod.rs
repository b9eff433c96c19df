//! Simulation harnesses: sign recovery of the compressed lasso as the
//! sample count grows, and predictive risk of the ℓ1-constrained fit as the
//! compressed sample count grows.
//!
//! Every trial draws its own `(X, ε, Φ)` from a stream derived from the base
//! seed and the trial's coordinates, so results do not depend on the number
//! of worker threads.

mod design;
mod persistence;
mod sparsistency;

pub use design::{
    gen_beta, gen_design, sample_count, sample_count_real, sparsity_level, Ensemble, SparsityRegime,
};
pub use persistence::{
    empirical_risk, empirical_risk_op, l1_radii, oracle_risk, oracle_risks, predictive_risk,
    run_persistence_curve, run_persistence_trial, OracleRisks, PersistenceConfig, RiskCurve, RiskRow,
};
pub use sparsistency::{
    calibrate_lambda_c, run_sparsistency_curve, run_sparsistency_trial, select_knot, Compression,
    CurveRow, SparsistencyConfig, SparsistencyCurve, TrialOutcome, SIGN_TOL,
};
