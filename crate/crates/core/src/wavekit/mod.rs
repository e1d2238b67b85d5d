//! Sharp traveling fronts of `u_t = (u^m)_xx + α (u^m)_x + u(1 - u)`.
//!
//! Everything is computed in the pressure variable `φ = m/(m-1) Φ^{m-1}`
//! and its phase-plane form `p(q) = φ'(φ^{-1}(q))` on `q ∈ (0, m/(m-1))`.
//! The minimal speed is the unique `c` for which the trajectory leaving the
//! front point `(0, -c)` enters the saddle `(m/(m-1), 0)`.

mod profile;
mod sensitivity;
mod speed;
mod trajectory;

pub use profile::{reconstruct_profile, reconstruct_profile_with, ProfileOptions, ProfileSample, WaveProfile};
pub use sensitivity::{
    c_prime, c_prime_with, cstar, cstar_profile_form, dphi_dalpha_sup, psi_weight, PsiTable, Sensitivity,
};
pub use speed::{invert_speed, solve_min_speed, solve_min_speed_with, SpeedOptions, WaveSpeed};
pub use trajectory::{integrate_trajectory, IntegratorOptions, PhaseSample, PhaseTrajectory, Side, Termination};

use thiserror::Error;

/// Smallest accepted distance of `m` above 1; the formulas degenerate as `m -> 1+`.
pub const MIN_EXPONENT_GAP: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum WaveError {
    #[error("porous-medium exponent must satisfy m > 1 + {MIN_EXPONENT_GAP:e} (got {0})")]
    InvalidExponent(f64),
    #[error("advection coefficient must be finite (got {0})")]
    InvalidAdvection(f64),
    #[error("wave speed must be positive and finite (got {0})")]
    InvalidSpeed(f64),
    #[error("tolerance must be positive and finite (got {0})")]
    InvalidTolerance(f64),
    #[error("invalid integrator option: {0}")]
    InvalidOptions(&'static str),
    #[error("adaptive step size underflow at q = {q}")]
    StepFailure { q: f64 },
    #[error("no speed bracket found after {expansions} expansions (last bracket [{lo}, {hi}])")]
    BracketNotFound { expansions: usize, lo: f64, hi: f64 },
    #[error("trajectory is not a saddle connection ({0:?})")]
    NotSaddleConnection(Termination),
    #[error("trajectory slope p = {p} is not negative at q = {q}")]
    NonMonotone { q: f64, p: f64 },
    #[error("pressure level {q} outside (0, {q_max})")]
    LevelOutOfRange { q: f64, q_max: f64 },
    #[error("profile tail truncation changes the result by {change:e} (tolerance {tolerance:e})")]
    TailNotConverged { change: f64, tolerance: f64 },
    #[error("no advection coefficient gives speed {target} in [{lo}, {hi}]")]
    SpeedInversionFailed { target: f64, lo: f64, hi: f64 },
}

pub type Result<T> = std::result::Result<T, WaveError>;

/// Porous-medium exponent `m` and advection coefficient `α`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModelParams {
    m: f64,
    alpha: f64,
}

impl ModelParams {
    pub fn new(m: f64, alpha: f64) -> Result<Self> {
        if !m.is_finite() || m <= 1.0 + MIN_EXPONENT_GAP {
            return Err(WaveError::InvalidExponent(m));
        }
        if !alpha.is_finite() {
            return Err(WaveError::InvalidAdvection(alpha));
        }
        Ok(ModelParams { m, alpha })
    }

    pub fn m(&self) -> f64 {
        self.m
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    /// Same exponent, different advection.
    pub fn with_alpha(&self, alpha: f64) -> Result<Self> {
        ModelParams::new(self.m, alpha)
    }

    /// Pressure ceiling `m/(m-1)`, the pressure of the state `u = 1`.
    pub fn q_max(&self) -> f64 {
        self.m / (self.m - 1.0)
    }

    /// Reaction term in pressure form, `f(q) = (m-1) q [1 - ((m-1)q/m)^{1/(m-1)}]`.
    pub fn reaction(&self, q: f64) -> f64 {
        let m1 = self.m - 1.0;
        m1 * q * (1.0 - self.density(q))
    }

    /// Density `Φ` carried by pressure `q`.
    pub fn density(&self, q: f64) -> f64 {
        if q <= 0.0 {
            return 0.0;
        }
        let m1 = self.m - 1.0;
        (m1 * q / self.m).powf(1.0 / m1)
    }

    /// Pressure `φ` of density `u`.
    pub fn pressure(&self, u: f64) -> f64 {
        if u <= 0.0 {
            return 0.0;
        }
        self.q_max() * u.powf(self.m - 1.0)
    }
}

/// Slope `γ > 0` of the saddle connection at `(m/(m-1), 0)`: the positive
/// root of `m β² + (c + m α) β - 1 = 0`.
pub fn gamma(params: &ModelParams, c: f64) -> f64 {
    let m = params.m();
    let b = c + m * params.alpha();
    let disc = (b * b + 4.0 * m).sqrt();
    // pick the cancellation-free form of the positive root
    if b >= 0.0 {
        2.0 / (b + disc)
    } else {
        (disc - b) / (2.0 * m)
    }
}

/// Slope `p'(0) = (m-1)/m (1/c - α)` of the trajectory at the front.
pub fn front_slope(params: &ModelParams, c: f64) -> Result<f64> {
    if !(c > 0.0 && c.is_finite()) {
        return Err(WaveError::InvalidSpeed(c));
    }
    let m = params.m();
    Ok((m - 1.0) / m * (1.0 / c - params.alpha()))
}
