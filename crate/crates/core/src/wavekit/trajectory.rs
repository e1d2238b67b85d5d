use super::{front_slope, gamma, ModelParams, Result, WaveError};
use crate::ode::{attempt, Attempt, StepControl};
use crate::quadrature::Hermite;

/// Controls for integrating `p(q)` from the front toward the saddle.
///
/// Offsets left as `None` default to `1e-5 · q_max`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IntegratorOptions {
    /// Front cutoff δ: integration starts at `q = δ`.
    pub front_offset: Option<f64>,
    /// Saddle offset ε: integration stops at `q = q_max - ε`.
    pub saddle_offset: Option<f64>,
    pub rtol: f64,
    pub atol: f64,
    pub min_step: f64,
    /// Largest step, as a fraction of `q_max`.
    pub max_step_fraction: f64,
    /// `p < -(1 + margin) c` counts as diving below the saddle.
    pub divergence_margin: f64,
    /// Half-width of the saddle cone relative to `γ ε`.
    pub cone_tolerance: f64,
    pub max_steps: usize,
}

impl Default for IntegratorOptions {
    fn default() -> Self {
        IntegratorOptions {
            front_offset: None,
            saddle_offset: None,
            rtol: 1e-10,
            atol: 1e-10,
            min_step: 1e-15,
            max_step_fraction: 2e-3,
            divergence_margin: 0.5,
            cone_tolerance: 1e-2,
            max_steps: 200_000,
        }
    }
}

impl IntegratorOptions {
    pub fn front_offset_for(&self, params: &ModelParams) -> f64 {
        self.front_offset.unwrap_or(1e-5 * params.q_max())
    }

    pub fn saddle_offset_for(&self, params: &ModelParams) -> f64 {
        self.saddle_offset.unwrap_or(1e-5 * params.q_max())
    }

    fn validate(&self, params: &ModelParams) -> Result<()> {
        let q_max = params.q_max();
        let delta = self.front_offset_for(params);
        let eps = self.saddle_offset_for(params);
        if !(delta > 0.0 && eps > 0.0 && delta + eps < 0.5 * q_max) {
            return Err(WaveError::InvalidOptions("offsets must be positive and small against q_max"));
        }
        if !(self.rtol > 0.0 && self.atol > 0.0 && self.min_step > 0.0) {
            return Err(WaveError::InvalidOptions("tolerances must be positive"));
        }
        if !(self.max_step_fraction > 0.0 && self.divergence_margin > 0.0 && self.cone_tolerance > 0.0) {
            return Err(WaveError::InvalidOptions("step fraction, margin and cone must be positive"));
        }
        Ok(())
    }
}

/// How a shooting trajectory ended.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Termination {
    /// Arrived at `q_max - ε` inside the saddle cone.
    ReachedCeiling,
    /// `p` reached 0 at the given level, or arrived at the ceiling above the
    /// saddle cone (and would cross zero before `q_max`).
    CrossedZero(f64),
    /// `p` fell below `-(1 + margin) c`, or arrived at the ceiling below the
    /// saddle cone (and would pass `q_max` with `p < 0`).
    DivedBelow(f64),
    /// Adaptive stepping underflowed at the given level.
    StepFailure(f64),
}

/// Which side of the saddle's stable manifold a trajectory lies on.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Side {
    Above,
    Below,
}

/// One accepted integration node.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhaseSample {
    /// Pressure level.
    pub q: f64,
    /// Pressure slope `p(q) = φ'`.
    pub p: f64,
    /// `dp/dq` from the phase equation.
    pub slope: f64,
    /// Front-relative position `x(q) = ∫_0^q ds / p(s)`.
    pub x: f64,
}

/// Sampled solution of the phase-plane equation at a fixed trial speed.
#[derive(Debug, Clone, PartialEq)]
pub struct PhaseTrajectory {
    pub params: ModelParams,
    pub speed: f64,
    pub samples: Vec<PhaseSample>,
    pub termination: Termination,
    /// `p(q_hi) + γ (q_max - q_hi)` when the run reached the ceiling level.
    pub saddle_miss: Option<f64>,
    pub front_offset: f64,
    pub saddle_offset: f64,
}

impl PhaseTrajectory {
    pub fn q_lo(&self) -> f64 {
        self.samples[0].q
    }

    pub fn q_hi(&self) -> f64 {
        self.samples[self.samples.len() - 1].q
    }

    pub fn gamma(&self) -> f64 {
        gamma(&self.params, self.speed)
    }

    pub fn is_saddle_connection(&self) -> bool {
        self.termination == Termination::ReachedCeiling
    }

    /// Side of the stable manifold, or `None` after a step failure.
    pub fn side(&self) -> Option<Side> {
        match self.termination {
            Termination::CrossedZero(_) => Some(Side::Above),
            Termination::DivedBelow(_) => Some(Side::Below),
            Termination::ReachedCeiling => match self.saddle_miss {
                Some(miss) if miss < 0.0 => Some(Side::Below),
                _ => Some(Side::Above),
            },
            Termination::StepFailure(_) => None,
        }
    }

    /// Cubic Hermite interpolant of `p(q)` through the nodes.
    pub fn interpolant(&self) -> Hermite {
        Hermite::new(
            self.samples.iter().map(|s| s.q).collect(),
            self.samples.iter().map(|s| s.p).collect(),
            self.samples.iter().map(|s| s.slope).collect(),
        )
    }

    /// Cubic Hermite interpolant of `x(q)` (slopes `1/p`).
    pub fn position_interpolant(&self) -> Hermite {
        Hermite::new(
            self.samples.iter().map(|s| s.q).collect(),
            self.samples.iter().map(|s| s.x).collect(),
            self.samples.iter().map(|s| 1.0 / s.p).collect(),
        )
    }
}

/// Right-hand side of the phase equation
/// `p' = -(c + p)/((m-1) q) - α - f(q)/((m-1) q p)`, undefined for `p >= 0`.
pub(crate) fn phase_rhs(params: &ModelParams, c: f64, q: f64, p: f64) -> Option<f64> {
    if !(p < 0.0) || !p.is_finite() {
        return None;
    }
    let m1 = params.m() - 1.0;
    let d = -(c + p) / (m1 * q) - params.alpha() - params.reaction(q) / (m1 * q * p);
    d.is_finite().then_some(d)
}

/// Integrate `p(q)` from the front seed `(δ, -c + p'(0) δ)` toward the saddle
/// and classify how the trajectory ends.
pub fn integrate_trajectory(params: &ModelParams, c: f64, opts: &IntegratorOptions) -> Result<PhaseTrajectory> {
    let slope0 = front_slope(params, c)?;
    opts.validate(params)?;
    let q_max = params.q_max();
    let delta = opts.front_offset_for(params);
    let eps = opts.saddle_offset_for(params);
    let q_hi = q_max - eps;
    let g = gamma(params, c);
    let floor = -(1.0 + opts.divergence_margin) * c;

    let p0 = -c + slope0 * delta;
    // x(δ) = ∫_0^δ ds / (-c + slope0 s)
    let x0 = if (slope0 * delta / c).abs() < 1e-300 {
        -delta / c
    } else {
        (-slope0 * delta / c).ln_1p() / slope0
    };

    let rhs = |q: f64, y: &[f64; 2]| -> Option<[f64; 2]> {
        let dp = phase_rhs(params, c, q, y[0])?;
        Some([dp, 1.0 / y[0]])
    };
    let ctl = StepControl {
        rtol: opts.rtol,
        atol: opts.atol,
        h_min: opts.min_step,
        h_max: opts.max_step_fraction * q_max,
    };

    let mut q = delta;
    let mut y = [p0, x0];
    let mut samples = Vec::with_capacity(1024);
    let Some(mut dy) = rhs(q, &y) else {
        // seed already at or above p = 0
        return Ok(PhaseTrajectory {
            params: *params,
            speed: c,
            samples: vec![PhaseSample { q, p: p0, slope: f64::NAN, x: x0 }],
            termination: Termination::CrossedZero(q),
            saddle_miss: None,
            front_offset: delta,
            saddle_offset: eps,
        });
    };
    samples.push(PhaseSample { q, p: y[0], slope: dy[0], x: y[1] });

    let mut h = (0.1 * delta).min(ctl.h_max);
    let mut last_undefined;
    let mut termination = None;
    let mut steps = 0usize;

    while termination.is_none() {
        if q >= q_hi {
            break;
        }
        if steps >= opts.max_steps {
            termination = Some(Termination::StepFailure(q));
            break;
        }
        steps += 1;
        // avoid leaving a sliver before the ceiling
        let remaining = q_hi - q;
        h = if h >= 0.99 * remaining { remaining } else { h };
        match attempt(&rhs, q, &y, &dy, h, &ctl) {
            Attempt::Accepted { y: yn, dy: dn, h_next } => {
                q = if h == remaining { q_hi } else { q + h };
                y = yn;
                dy = dn;
                h = h_next;
                last_undefined = false;
                samples.push(PhaseSample { q, p: y[0], slope: dy[0], x: y[1] });
                if y[0] < floor {
                    termination = Some(Termination::DivedBelow(q));
                }
            }
            Attempt::Rejected { h_next } => {
                h = h_next;
                last_undefined = false;
            }
            Attempt::Undefined => {
                h *= 0.25;
                last_undefined = true;
            }
        }
        if termination.is_none() && h < ctl.h_min {
            // a stall with p rising steeply just below zero is the approach to p = 0
            let near_zero = dy[0] > 0.0 && y[0] > -1e-4 * c;
            termination = Some(if last_undefined || near_zero {
                Termination::CrossedZero(q)
            } else {
                Termination::StepFailure(q)
            });
        }
    }

    let mut saddle_miss = None;
    let termination = match termination {
        Some(t) => t,
        None => {
            let miss = y[0] + g * (q_max - q);
            saddle_miss = Some(miss);
            let cone = opts.cone_tolerance * g * eps;
            if miss.abs() <= cone {
                Termination::ReachedCeiling
            } else if miss > 0.0 {
                Termination::CrossedZero(q)
            } else {
                Termination::DivedBelow(q)
            }
        }
    };

    Ok(PhaseTrajectory {
        params: *params,
        speed: c,
        samples,
        termination,
        saddle_miss,
        front_offset: delta,
        saddle_offset: eps,
    })
}

/// Integrate the stable manifold of the saddle backward from
/// `q_max - ε` down to `q_stop`, which is attracting in that direction.
///
/// Returned samples are in increasing `q`; their `x` values are relative to
/// an arbitrary origin at `q_stop`.
pub(crate) fn integrate_stable_manifold(
    params: &ModelParams,
    c: f64,
    q_stop: f64,
    opts: &IntegratorOptions,
) -> Result<Vec<PhaseSample>> {
    let q_max = params.q_max();
    let eps = opts.saddle_offset_for(params);
    let q_start = q_max - eps;
    if !(q_stop < q_start) {
        return Ok(Vec::new());
    }
    let g = gamma(params, c);
    // τ = q_start - q runs forward
    let rhs = |tau: f64, y: &[f64; 2]| -> Option<[f64; 2]> {
        let dp = phase_rhs(params, c, q_start - tau, y[0])?;
        Some([-dp, -1.0 / y[0]])
    };
    let ctl = StepControl {
        rtol: opts.rtol,
        atol: opts.atol,
        h_min: opts.min_step,
        h_max: opts.max_step_fraction * q_max,
    };
    let span = q_start - q_stop;
    let mut tau = 0.0;
    let mut y = [-g * eps, 0.0];
    let mut dy = rhs(tau, &y).ok_or(WaveError::StepFailure { q: q_start })?;
    let mut out = vec![PhaseSample { q: q_start, p: y[0], slope: -dy[0], x: 0.0 }];
    let mut h = (0.1 * eps).min(ctl.h_max);
    let mut steps = 0usize;
    while tau < span {
        steps += 1;
        if steps > opts.max_steps || h < ctl.h_min {
            return Err(WaveError::StepFailure { q: q_start - tau });
        }
        let remaining = span - tau;
        h = if h >= 0.99 * remaining { remaining } else { h };
        match attempt(&rhs, tau, &y, &dy, h, &ctl) {
            Attempt::Accepted { y: yn, dy: dn, h_next } => {
                tau = if h == remaining { span } else { tau + h };
                y = yn;
                dy = dn;
                h = h_next;
                out.push(PhaseSample { q: q_start - tau, p: y[0], slope: -dy[0], x: y[1] });
            }
            Attempt::Rejected { h_next } => h = h_next,
            Attempt::Undefined => h *= 0.25,
        }
    }
    out.reverse();
    let x0 = out[0].x;
    for s in &mut out {
        s.x -= x0;
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn m2() -> ModelParams {
        ModelParams::new(2.0, 0.0).unwrap()
    }

    fn opts(delta: f64, eps: f64) -> IntegratorOptions {
        IntegratorOptions {
            front_offset: Some(delta),
            saddle_offset: Some(eps),
            ..Default::default()
        }
    }

    #[test]
    fn m2_trajectory_is_the_exact_line() {
        // p(q) = q/2 - 1 solves the phase equation for m = 2, α = 0, c = 1
        let traj = integrate_trajectory(&m2(), 1.0, &opts(1e-4, 1e-4)).unwrap();
        assert_eq!(traj.termination, Termination::ReachedCeiling);
        let worst = traj
            .samples
            .iter()
            .map(|s| (s.p - (0.5 * s.q - 1.0)).abs())
            .fold(0.0, f64::max);
        assert!(worst < 1e-6, "sup error {worst}");
        // x(q) = 2 ln(1 - q/2)
        let worst_x = traj
            .samples
            .iter()
            .map(|s| (s.x - 2.0 * (1.0 - 0.5 * s.q).ln()).abs())
            .fold(0.0, f64::max);
        assert!(worst_x < 1e-6, "position error {worst_x}");
    }

    #[test]
    fn off_speed_trajectories_land_on_opposite_sides() {
        let slow = integrate_trajectory(&m2(), 0.9, &IntegratorOptions::default()).unwrap();
        let fast = integrate_trajectory(&m2(), 1.1, &IntegratorOptions::default()).unwrap();
        assert!(!slow.is_saddle_connection() && !fast.is_saddle_connection());
        assert_ne!(slow.side(), fast.side());
        assert!(matches!(slow.termination, Termination::CrossedZero(_)));
        assert!(matches!(fast.termination, Termination::DivedBelow(_)));
    }

    #[test]
    fn samples_are_monotone_with_negative_slope() {
        let params = ModelParams::new(3.0, 0.5).unwrap();
        for c in [0.3, 0.6, 1.5] {
            let traj = integrate_trajectory(&params, c, &IntegratorOptions::default()).unwrap();
            assert!(traj.samples.windows(2).all(|w| w[0].q < w[1].q));
            assert!(traj.samples.iter().all(|s| s.p < 0.0 && s.p.is_finite()));
        }
    }

    #[test]
    fn ceiling_trajectory_respects_saddle_asymptotics() {
        let traj = integrate_trajectory(&m2(), 1.0, &IntegratorOptions::default()).unwrap();
        let last = traj.samples.last().unwrap();
        let gap = traj.params.q_max() - last.q;
        assert!((last.p + traj.gamma() * gap).abs() <= 1e-2 * traj.gamma() * traj.saddle_offset);
    }

    #[test]
    fn rejects_bad_inputs() {
        assert!(matches!(
            integrate_trajectory(&m2(), 0.0, &IntegratorOptions::default()),
            Err(WaveError::InvalidSpeed(_))
        ));
        assert!(matches!(
            integrate_trajectory(&m2(), 1.0, &opts(-1.0, 1e-4)),
            Err(WaveError::InvalidOptions(_))
        ));
    }

    #[test]
    fn step_underflow_is_reported_not_truncated() {
        let o = IntegratorOptions {
            max_steps: 5,
            ..Default::default()
        };
        let traj = integrate_trajectory(&m2(), 1.0, &o).unwrap();
        assert!(matches!(traj.termination, Termination::StepFailure(_)));
        assert_eq!(traj.side(), None);
    }
}
