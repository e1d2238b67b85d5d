use std::sync::OnceLock;

use super::trajectory::{integrate_stable_manifold, integrate_trajectory, phase_rhs, IntegratorOptions, PhaseSample, PhaseTrajectory, Side, Termination};
use super::{front_slope, gamma, ModelParams, Result, WaveError};

/// Bracketing and integration settings for the minimal-speed search.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpeedOptions {
    pub integrator: IntegratorOptions,
    pub initial_bracket: (f64, f64),
    /// Cap on geometric bracket expansions (each end separately).
    pub max_expansions: usize,
    /// Bracketing trajectories are merged up to where `|Δp| > separation_tolerance · c`.
    pub separation_tolerance: f64,
}

impl Default for SpeedOptions {
    fn default() -> Self {
        SpeedOptions {
            integrator: IntegratorOptions::default(),
            initial_bracket: (0.5, 2.0),
            max_expansions: 60,
            separation_tolerance: 1e-8,
        }
    }
}

/// Minimal wave speed with its final bisection bracket.
#[derive(Debug, Clone, PartialEq)]
pub struct WaveSpeed {
    pub params: ModelParams,
    pub c: f64,
    pub bracket: (f64, f64),
    /// `|p(δ; c) + c - p'(0) δ|`, the front-seed consistency.
    pub residual: f64,
    pub iterations: usize,
    /// Saddle connection at `c`, truncated where the bracket ends separate.
    pub trajectory: PhaseTrajectory,
}

/// Side of the stable manifold on which too-slow trajectories land,
/// calibrated once against the exactly solvable `m = 2` case.
fn slow_side() -> Side {
    static SLOW: OnceLock<Side> = OnceLock::new();
    *SLOW.get_or_init(|| {
        let params = ModelParams::new(2.0, 0.0).expect("valid calibration params");
        let opts = IntegratorOptions::default();
        let side_at = |c| {
            integrate_trajectory(&params, c, &opts)
                .ok()
                .and_then(|t| t.side())
                .expect("calibration trajectory classifies")
        };
        let (slow, fast) = (side_at(0.9), side_at(1.1));
        assert_ne!(slow, fast, "calibration speeds must fall on opposite sides");
        slow
    })
}

fn side_of(params: &ModelParams, c: f64, opts: &IntegratorOptions) -> Result<(Side, PhaseTrajectory)> {
    let traj = integrate_trajectory(params, c, opts)?;
    match traj.side() {
        Some(side) => Ok((side, traj)),
        None => {
            let q = match traj.termination {
                Termination::StepFailure(q) => q,
                _ => f64::NAN,
            };
            Err(WaveError::StepFailure { q })
        }
    }
}

/// Minimal speed `c(α)` by bisection between the two trajectory classes,
/// with default options.
pub fn solve_min_speed(params: &ModelParams, tol: f64) -> Result<WaveSpeed> {
    solve_min_speed_with(params, tol, &SpeedOptions::default())
}

pub fn solve_min_speed_with(params: &ModelParams, tol: f64, opts: &SpeedOptions) -> Result<WaveSpeed> {
    if !(tol > 0.0 && tol.is_finite()) {
        return Err(WaveError::InvalidTolerance(tol));
    }
    let slow = slow_side();
    let integ = &opts.integrator;
    let (mut lo, mut hi) = opts.initial_bracket;

    let mut expansions = 0;
    let mut lo_traj = loop {
        let (side, traj) = side_of(params, lo, integ)?;
        if side == slow {
            break traj;
        }
        if expansions >= opts.max_expansions {
            return Err(WaveError::BracketNotFound { expansions, lo, hi });
        }
        hi = hi.min(lo);
        lo *= 0.5;
        expansions += 1;
    };
    expansions = 0;
    let mut hi_traj = loop {
        let (side, traj) = side_of(params, hi, integ)?;
        if side != slow {
            break traj;
        }
        if expansions >= opts.max_expansions {
            return Err(WaveError::BracketNotFound { expansions, lo, hi });
        }
        lo = lo.max(hi);
        lo_traj = traj;
        hi *= 2.0;
        expansions += 1;
    };

    let mut iterations = 0;
    while hi - lo > tol {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        iterations += 1;
        let (side, traj) = side_of(params, mid, integ)?;
        if side == slow {
            lo = mid;
            lo_traj = traj;
        } else {
            hi = mid;
            hi_traj = traj;
        }
    }

    let c = 0.5 * (lo + hi);
    let trajectory = connection(c, &lo_traj, &hi_traj, opts.separation_tolerance * c, integ)?;
    let first = trajectory.samples[0];
    let residual = (first.p + c - front_slope(params, c)? * first.q).abs();
    Ok(WaveSpeed {
        params: *params,
        c,
        bracket: (lo, hi),
        residual,
        iterations,
        trajectory,
    })
}

/// Saddle connection assembled from the two bracketing trajectories.
///
/// Both follow the stable manifold until the unstable direction pulls them
/// apart near the saddle. The averaged nodes are kept up to the level where
/// they separate by more than `sep`; above it the manifold is integrated
/// backward from the saddle.
fn connection(
    c: f64,
    a: &PhaseTrajectory,
    b: &PhaseTrajectory,
    sep: f64,
    opts: &IntegratorOptions,
) -> Result<PhaseTrajectory> {
    let b_p = b.interpolant();
    let (a_x, b_x) = (a.position_interpolant(), b.position_interpolant());
    let q_top = a.q_hi().min(b.q_hi());
    let mut samples = Vec::with_capacity(b.samples.len());
    for s in a.samples.iter().take_while(|s| s.q <= q_top) {
        let pb = b_p.eval(s.q);
        if (s.p - pb).abs() > sep {
            break;
        }
        let p = 0.5 * (s.p + pb);
        let slope = phase_rhs(&a.params, c, s.q, p).unwrap_or(s.slope);
        let x = 0.5 * (a_x.eval(s.q) + b_x.eval(s.q));
        samples.push(PhaseSample { q: s.q, p, slope, x });
    }
    if samples.len() < 2 {
        return Err(WaveError::StepFailure { q: a.q_lo() });
    }
    let cut = samples[samples.len() - 1];
    let upper = integrate_stable_manifold(&a.params, c, cut.q, opts)?;
    if let Some(join) = upper.first() {
        if (join.p - cut.p).abs() > 1e3 * sep {
            return Err(WaveError::NonMonotone { q: cut.q, p: join.p - cut.p });
        }
        samples.extend(upper.iter().skip(1).map(|s| PhaseSample { x: s.x + cut.x, ..*s }));
    }
    let last = samples[samples.len() - 1];
    let q_max = a.params.q_max();
    let miss = last.p + gamma(&a.params, c) * (q_max - last.q);
    Ok(PhaseTrajectory {
        params: a.params,
        speed: c,
        samples,
        termination: Termination::ReachedCeiling,
        saddle_miss: Some(miss),
        front_offset: a.front_offset,
        saddle_offset: q_max - last.q,
    })
}

/// Advection coefficient `α` with `c(α) = target`, found by bisection on the
/// decreasing map `α ↦ c(α)` within `[lo, hi]`.
pub fn invert_speed(m: f64, target: f64, (lo, hi): (f64, f64), tol: f64) -> Result<f64> {
    let speed = |alpha: f64| -> Result<f64> { Ok(solve_min_speed(&ModelParams::new(m, alpha)?, 1e-3 * tol)?.c) };
    let fail = WaveError::SpeedInversionFailed { target, lo, hi };
    let (mut a, mut b) = (lo, hi);
    let (ca, cb) = (speed(a)?, speed(b)?);
    if !(ca >= target && target >= cb) {
        return Err(fail);
    }
    while b - a > tol {
        let mid = 0.5 * (a + b);
        if speed(mid)? >= target {
            a = mid;
        } else {
            b = mid;
        }
    }
    Ok(0.5 * (a + b))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn m2_minimal_speed_is_one() {
        let params = ModelParams::new(2.0, 0.0).unwrap();
        let ws = solve_min_speed(&params, 1e-8).unwrap();
        assert!((ws.c - 1.0).abs() < 1e-6, "c = {}", ws.c);
        assert!(ws.bracket.0 < ws.c && ws.c < ws.bracket.1);
        assert!(ws.bracket.1 - ws.bracket.0 <= 1e-8);
        assert!(ws.trajectory.is_saddle_connection());
        assert!(ws.residual < 1e-12);
    }

    #[test]
    fn bracket_expands_from_a_poor_initial_guess() {
        let params = ModelParams::new(2.0, 0.0).unwrap();
        let opts = SpeedOptions {
            initial_bracket: (4.0, 8.0),
            ..Default::default()
        };
        let ws = solve_min_speed_with(&params, 1e-9, &opts).unwrap();
        assert!((ws.c - 1.0).abs() < 1e-6);
    }

    #[test]
    fn bracket_cap_is_reported() {
        let params = ModelParams::new(2.0, 0.0).unwrap();
        let opts = SpeedOptions {
            initial_bracket: (4.0, 8.0),
            max_expansions: 1,
            ..Default::default()
        };
        assert!(matches!(
            solve_min_speed_with(&params, 1e-9, &opts),
            Err(WaveError::BracketNotFound { .. })
        ));
    }

    #[test]
    fn rejects_nonpositive_tolerance() {
        let params = ModelParams::new(2.0, 0.0).unwrap();
        assert!(matches!(solve_min_speed(&params, 0.0), Err(WaveError::InvalidTolerance(_))));
    }

    #[test]
    fn speed_decreases_with_advection() {
        let c = |a: f64| solve_min_speed(&ModelParams::new(2.0, a).unwrap(), 1e-10).unwrap().c;
        let (c1, c2) = (c(0.1), c(0.2));
        assert!(c1 - c2 >= 0.0 && c1 - c2 <= 0.2 * 2.0);
        // c'(0) = -1/2 for m = 2
        let slope = (c(1e-3) - 1.0) / 1e-3;
        assert!((slope + 0.5).abs() < 1e-2, "slope {slope}");
    }

    #[test]
    fn inversion_recovers_zero_advection() {
        let alpha = invert_speed(2.0, 1.0, (-0.5, 0.5), 1e-7).unwrap();
        assert!(alpha.abs() < 1e-6, "α = {alpha}");
        assert!(matches!(
            invert_speed(2.0, 5.0, (-0.5, 0.5), 1e-6),
            Err(WaveError::SpeedInversionFailed { .. })
        ));
    }
}
