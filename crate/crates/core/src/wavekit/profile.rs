use super::trajectory::{phase_rhs, PhaseTrajectory};
use super::{ModelParams, Result, WaveError};
use crate::quadrature::Hermite;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProfileOptions {
    /// Reconstruction stops once `φ >= q_max (1 - tail_tolerance)`.
    pub tail_tolerance: f64,
    /// Largest gap between consecutive samples in `x`.
    pub max_spacing: f64,
}

impl Default for ProfileOptions {
    fn default() -> Self {
        ProfileOptions {
            tail_tolerance: 1e-8,
            max_spacing: 0.02,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProfileSample {
    pub x: f64,
    /// Pressure `φ(x)`.
    pub phi: f64,
    /// Density `Φ(x) = ((m-1) φ / m)^{1/(m-1)}`.
    pub density: f64,
    /// `φ'(x)`.
    pub slope: f64,
    /// `φ''(x)`.
    pub curvature: f64,
}

/// Sharp wavefront on `x <= 0`, front at `x = 0`.
#[derive(Debug, Clone, PartialEq)]
pub struct WaveProfile {
    pub params: ModelParams,
    pub speed: f64,
    gamma: f64,
    samples: Vec<ProfileSample>,
    interp: Hermite,
}

pub fn reconstruct_profile(traj: &PhaseTrajectory) -> Result<WaveProfile> {
    reconstruct_profile_with(traj, &ProfileOptions::default())
}

/// Invert `p = dφ/dx` along a saddle-connecting trajectory.
///
/// The integrated nodes carry `x(q)`; gaps wider than `max_spacing` are
/// filled by inverting the position interpolant, and the approach to
/// `q_max` beyond the last node follows the saddle eigendirection.
pub fn reconstruct_profile_with(traj: &PhaseTrajectory, opts: &ProfileOptions) -> Result<WaveProfile> {
    if !traj.is_saddle_connection() {
        return Err(WaveError::NotSaddleConnection(traj.termination));
    }
    if let Some(s) = traj.samples.iter().find(|s| !(s.p < 0.0)) {
        return Err(WaveError::NonMonotone { q: s.q, p: s.p });
    }
    let params = traj.params;
    let c = traj.speed;
    let gamma = traj.gamma();
    let q_max = params.q_max();
    let p_of = traj.interpolant();
    let x_of = traj.position_interpolant();
    let sample_at_level = |q: f64, x: f64| -> ProfileSample {
        let (p, dp) = p_of.eval_with_derivative(q);
        ProfileSample {
            x,
            phi: q,
            density: params.density(q),
            slope: p,
            curvature: dp * p,
        }
    };

    // built from the tail toward the front, reversed at the end
    let mut rev: Vec<ProfileSample> = Vec::new();

    let last = traj.samples[traj.samples.len() - 1];
    let s_last = q_max - last.q;
    let s_stop = opts.tail_tolerance * q_max;
    if s_last > s_stop {
        // s(x) = s_last exp(γ (x - x_last)) on the eigendirection
        let x_stop = last.x + (s_stop / s_last).ln() / gamma;
        let n = ((last.x - x_stop) / opts.max_spacing).ceil().max(1.0) as usize;
        for k in (1..=n).rev() {
            let x = last.x - (last.x - x_stop) * k as f64 / n as f64;
            let s = s_last * (gamma * (x - last.x)).exp();
            let q = q_max - s;
            rev.push(ProfileSample {
                x,
                phi: q,
                density: params.density(q),
                slope: -gamma * s,
                curvature: -gamma * gamma * s,
            });
        }
    }

    for (i, node) in traj.samples.iter().enumerate().rev() {
        rev.push(ProfileSample {
            x: node.x,
            phi: node.q,
            density: params.density(node.q),
            slope: node.p,
            curvature: node.slope * node.p,
        });
        if i == 0 {
            break;
        }
        let prev = traj.samples[i - 1];
        let gap = prev.x - node.x;
        if gap > opts.max_spacing {
            let n = (gap / opts.max_spacing).ceil() as usize;
            for k in 1..n {
                let x = node.x + gap * k as f64 / n as f64;
                let q = invert_position(&x_of, x, prev.q, node.q);
                rev.push(sample_at_level(q, x));
            }
        }
    }

    // front segment [x(δ), 0] with the linear seed p = -c + p'(0) q
    let first = traj.samples[0];
    let slope0 = super::front_slope(&params, c)?;
    let gap = -first.x;
    let n = (gap / opts.max_spacing).ceil().max(1.0) as usize;
    for k in 1..n {
        let x = first.x + gap * k as f64 / n as f64;
        let q = first.q * (1.0 - k as f64 / n as f64);
        let p = -c + slope0 * q;
        rev.push(ProfileSample {
            x,
            phi: q,
            density: params.density(q),
            slope: p,
            curvature: slope0 * p,
        });
    }
    rev.push(ProfileSample {
        x: 0.0,
        phi: 0.0,
        density: 0.0,
        slope: -c,
        curvature: -c * slope0,
    });

    rev.dedup_by(|b, a| b.x <= a.x);
    let samples = rev;
    let interp = Hermite::new(
        samples.iter().map(|s| s.x).collect(),
        samples.iter().map(|s| s.phi).collect(),
        samples.iter().map(|s| s.slope).collect(),
    );
    Ok(WaveProfile {
        params,
        speed: c,
        gamma,
        samples,
        interp,
    })
}

/// Solve `x(q) = x` for `q` in `[q_a, q_b]`; `x(q)` is decreasing.
fn invert_position(x_of: &Hermite, x: f64, q_a: f64, q_b: f64) -> f64 {
    let (mut lo, mut hi) = (q_a, q_b);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if x_of.eval(mid) > x {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

impl WaveProfile {
    pub fn samples(&self) -> &[ProfileSample] {
        &self.samples
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    /// Leftmost reconstructed position.
    pub fn x_min(&self) -> f64 {
        self.samples[0].x
    }

    /// Pressure `φ(x)` for any `x`: zero ahead of the front and the
    /// eigendirection decay behind the leftmost sample.
    pub fn phi(&self, x: f64) -> f64 {
        self.phi_and_slope(x).0
    }

    pub fn phi_and_slope(&self, x: f64) -> (f64, f64) {
        if x >= 0.0 {
            return (0.0, 0.0);
        }
        let first = self.samples[0];
        if x < first.x {
            let q_max = self.params.q_max();
            let s = (q_max - first.phi) * (self.gamma * (x - first.x)).exp();
            return (q_max - s, -self.gamma * s);
        }
        self.interp.eval_with_derivative(x)
    }

    /// Density `Φ(x)`.
    pub fn density(&self, x: f64) -> f64 {
        self.params.density(self.phi(x))
    }

    /// Left-sided slope of `φ` at the front from the three rightmost
    /// samples (second-order one-sided difference on the values).
    pub fn front_slope_estimate(&self) -> f64 {
        let n = self.samples.len();
        let (a, b, c) = (self.samples[n - 3], self.samples[n - 2], self.samples[n - 1]);
        let (h1, h2) = (c.x - b.x, b.x - a.x);
        // derivative at c of the quadratic through a, b, c
        let w_c = (2.0 * h1 + h2) / (h1 * (h1 + h2));
        let w_b = -(h1 + h2) / (h1 * h2);
        let w_a = h1 / (h2 * (h1 + h2));
        w_c * c.phi + w_b * b.phi + w_a * a.phi
    }

    /// Residual of the traveling-wave equation
    /// `-c φ' - (m-1) φ φ'' - φ'^2 - α (m-1) φ φ' - f(φ)` at a sample.
    pub fn ode_residual(&self, s: &ProfileSample) -> f64 {
        let m1 = self.params.m() - 1.0;
        -self.speed * s.slope - m1 * s.phi * s.curvature - s.slope * s.slope - self.params.alpha() * m1 * s.phi * s.slope
            - self.params.reaction(s.phi)
    }

    /// Largest absolute residual over interior samples (front and tail excluded).
    pub fn max_ode_residual(&self) -> f64 {
        let n = self.samples.len();
        self.samples[1..n - 1]
            .iter()
            .filter(|s| s.phi > 0.0)
            .map(|s| self.ode_residual(s).abs())
            .fold(0.0, f64::max)
    }

    /// Residual at an arbitrary position with `φ''` taken from the phase
    /// equation at the interpolated `(φ, φ')`.
    pub fn ode_residual_at(&self, x: f64) -> f64 {
        let (phi, slope) = self.phi_and_slope(x);
        let dp = phase_rhs(&self.params, self.speed, phi, slope).unwrap_or(f64::NAN);
        let s = ProfileSample {
            x,
            phi,
            density: self.params.density(phi),
            slope,
            curvature: dp * slope,
        };
        self.ode_residual(&s)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::wavekit::{integrate_trajectory, solve_min_speed, IntegratorOptions};

    fn m2_profile() -> WaveProfile {
        let params = ModelParams::new(2.0, 0.0).unwrap();
        let traj = integrate_trajectory(&params, 1.0, &IntegratorOptions::default()).unwrap();
        reconstruct_profile(&traj).unwrap()
    }

    #[test]
    fn m2_profile_matches_closed_form() {
        let profile = m2_profile();
        let worst = profile
            .samples()
            .iter()
            .map(|s| (s.density - (1.0 - (0.5 * s.x).exp())).abs())
            .fold(0.0, f64::max);
        assert!(worst < 1e-5, "sup error {worst}");
        for x in [-30.0, -7.3, -1.0, -0.01] {
            assert!((profile.density(x) - (1.0 - (0.5 * x).exp())).abs() < 1e-5);
        }
    }

    #[test]
    fn profile_invariants() {
        let profile = m2_profile();
        let s = profile.samples();
        assert!(s.windows(2).all(|w| w[0].x < w[1].x && w[0].phi > w[1].phi));
        let last = s.last().unwrap();
        assert_eq!((last.x, last.phi, last.density), (0.0, 0.0, 0.0));
        assert!(s[0].phi >= profile.params.q_max() * (1.0 - 1e-8) * (1.0 - 1e-12));
        for p in s {
            assert!((p.density - profile.params.density(p.phi)).abs() < 1e-15);
        }
    }

    #[test]
    fn darcy_slope_at_front() {
        let profile = m2_profile();
        assert!((profile.front_slope_estimate() + 1.0).abs() < 1e-6);
    }

    #[test]
    fn residual_is_small_for_other_exponents() {
        for (m, alpha) in [(1.5, 0.0), (3.0, -0.5), (3.0, 0.5)] {
            let params = ModelParams::new(m, alpha).unwrap();
            let ws = solve_min_speed(&params, 1e-11).unwrap();
            let profile = reconstruct_profile(&ws.trajectory).unwrap();
            assert!(profile.max_ode_residual() < 1e-6);
            for x in [-5.05, -1.013, -0.2] {
                assert!(profile.ode_residual_at(x).abs() < 1e-6, "m={m} α={alpha} x={x}");
            }
            assert!((profile.front_slope_estimate() + ws.c).abs() < 1e-6);
        }
    }

    #[test]
    fn rejects_non_connecting_trajectories() {
        let params = ModelParams::new(2.0, 0.0).unwrap();
        let traj = integrate_trajectory(&params, 1.2, &IntegratorOptions::default()).unwrap();
        assert!(matches!(reconstruct_profile(&traj), Err(WaveError::NotSaddleConnection(_))));
    }
}
