//! Sensitivity of the minimal speed to advection, and the log-shift constant.
//!
//! With `Ψ(q) = q^{1/(m-1)} exp(∫_q^1 f(s)/((m-1) s p(s)²) ds)` along the
//! minimal-speed trajectory,
//!
//! ```text
//! c'(α) = -(m-1) ∫_0^{q_max} Ψ dq / ∫_0^{q_max} Ψ/q dq
//! ```
//!
//! and `c* = -c'(0)/c(0)`. The same constant is also evaluated from the
//! reconstructed density profile as a double integral in `x`; the two
//! routes share only the minimal-speed trajectory.

use super::profile::{reconstruct_profile, WaveProfile};
use super::speed::solve_min_speed;
use super::trajectory::PhaseTrajectory;
use super::{ModelParams, Result, WaveError};
use crate::quadrature::{gk15, integrate, integrate_panels, Estimate, Hermite};

/// Bisection tolerance used for speeds feeding the sensitivity formulas.
const SPEED_TOL: f64 = 1e-11;
const QUAD_TOL: f64 = 1e-12;

/// `Ψ(q; α)` tabulated along a saddle-connecting trajectory.
///
/// Between nodes the inner integral is completed by a local Gauss-Kronrod
/// pass; below the first node `Ψ` follows `σ q^{1/(m-1)}` and above the
/// last node the saddle power law `(q_max - q)^{1/(m γ²)}`.
#[derive(Debug, Clone)]
pub struct PsiTable {
    params: ModelParams,
    speed: f64,
    gamma: f64,
    p_of: Hermite,
    /// `∫_{q_0}^{q_i} g` at the nodes, `g = f/((m-1) s p²)`.
    cumulative: Vec<f64>,
    /// `∫_{q_0}^{1} g`.
    at_one: f64,
    quad_error: f64,
}

impl PsiTable {
    pub fn new(traj: &PhaseTrajectory) -> Result<Self> {
        if !traj.is_saddle_connection() {
            return Err(WaveError::NotSaddleConnection(traj.termination));
        }
        let params = traj.params;
        let p_of = traj.interpolant();
        let m1 = params.m() - 1.0;
        let nodes = p_of.nodes().to_vec();
        let g = |s: f64| {
            let p = p_of.eval(s);
            params.reaction(s) / (m1 * s * p * p)
        };
        let mut cumulative = Vec::with_capacity(nodes.len());
        let mut acc = 0.0;
        let mut quad_error = 0.0;
        cumulative.push(0.0);
        for w in nodes.windows(2) {
            let rough = gk15(&g, w[0], w[1]).value.abs();
            let est = integrate(&g, w[0], w[1], QUAD_TOL * rough.max(w[1] - w[0]));
            acc += est.value;
            quad_error += est.error;
            cumulative.push(acc);
        }
        let mut table = PsiTable {
            params,
            speed: traj.speed,
            gamma: traj.gamma(),
            p_of,
            cumulative,
            at_one: 0.0,
            quad_error,
        };
        table.at_one = table.cumulative_to(1.0);
        Ok(table)
    }

    fn g(&self, s: f64) -> f64 {
        let p = self.p_of.eval(s);
        self.params.reaction(s) / ((self.params.m() - 1.0) * s * p * p)
    }

    fn cumulative_to(&self, q: f64) -> f64 {
        let i = self.p_of.interval(q);
        let q_i = self.p_of.nodes()[i];
        self.cumulative[i] + gk15(&|s| self.g(s), q_i, q).value
    }

    pub fn q_lo(&self) -> f64 {
        self.p_of.first()
    }

    pub fn q_hi(&self) -> f64 {
        self.p_of.last()
    }

    /// Exponent of the power-law decay of `Ψ` at the saddle, `1/(m γ²)`.
    pub fn saddle_exponent(&self) -> f64 {
        1.0 / (self.params.m() * self.gamma * self.gamma)
    }

    fn ln_psi_interior(&self, q: f64) -> f64 {
        q.ln() / (self.params.m() - 1.0) + self.at_one - self.cumulative_to(q)
    }

    /// `Ψ(q)` for `q ∈ (0, q_max)`.
    pub fn psi(&self, q: f64) -> Result<f64> {
        let q_max = self.params.q_max();
        if !(q > 0.0 && q < q_max) {
            return Err(WaveError::LevelOutOfRange { q, q_max });
        }
        let (lo, hi) = (self.q_lo(), self.q_hi());
        Ok(if q < lo {
            self.ln_psi_interior(lo).exp() * (q / lo).powf(1.0 / (self.params.m() - 1.0))
        } else if q > hi {
            self.ln_psi_interior(hi).exp() * ((q_max - q) / (q_max - hi)).powf(self.saddle_exponent())
        } else {
            self.ln_psi_interior(q).exp()
        })
    }

    /// `(∫_0^{q_max} Ψ dq, ∫_0^{q_max} Ψ/q dq)` with error estimates.
    pub fn moments(&self) -> (Estimate, Estimate) {
        let m = self.params.m();
        let a = 1.0 / (m - 1.0);
        let q_max = self.params.q_max();
        let (lo, hi) = (self.q_lo(), self.q_hi());
        let psi = |q: f64| self.ln_psi_interior(q).exp();

        // front panel: Ψ ≈ σ q^a (1 + b q), b = -g(0) = -1/c²
        let b = -1.0 / (self.speed * self.speed);
        let psi_lo = psi(lo);
        let sigma = psi_lo / (lo.powf(a) * (1.0 + b * lo));
        let front0 = sigma * (lo.powf(a + 1.0) / (a + 1.0) + b * lo.powf(a + 2.0) / (a + 2.0));
        let front1 = sigma * (lo.powf(a) / a + b * lo.powf(a + 1.0) / (a + 1.0));
        let front_err0 = (sigma * b * lo.powf(a + 2.0)).abs();
        let front_err1 = (sigma * b * lo.powf(a + 1.0)).abs();

        // saddle panel: Ψ ≈ Ψ(hi) ((q_max - q)/ε)^κ
        let kappa = self.saddle_exponent();
        let eps = q_max - hi;
        let psi_hi = psi(hi);
        let tail0 = psi_hi * eps / (kappa + 1.0);
        let tail1 = tail0 / (q_max - 0.5 * eps);

        let nodes = self.p_of.nodes();
        let scale = psi_lo.max(psi(1.0_f64.clamp(lo, hi)));
        let body0 = integrate_panels(&psi, nodes, QUAD_TOL * scale);
        let body1 = integrate_panels(&|q: f64| psi(q) / q, nodes, QUAD_TOL * scale);

        let pad = self.quad_error;
        (
            Estimate {
                value: front0 + body0.value + tail0,
                error: front_err0 + body0.error + tail0 * eps + pad,
            },
            Estimate {
                value: front1 + body1.value + tail1,
                error: front_err1 + body1.error + tail1 * eps + pad,
            },
        )
    }
}

/// `Ψ(q; α)` along the minimal-speed trajectory `traj`.
pub fn psi_weight(params: &ModelParams, traj: &PhaseTrajectory, q: f64) -> Result<f64> {
    let q_max = params.q_max();
    if !(q > 0.0 && q < q_max) {
        return Err(WaveError::LevelOutOfRange { q, q_max });
    }
    PsiTable::new(traj)?.psi(q)
}

/// `c'(α)` from the Ψ-moment formula.
#[derive(Debug, Clone, PartialEq)]
pub struct Sensitivity {
    pub alpha: f64,
    pub speed: f64,
    pub c_prime: f64,
    /// `Ψ` at the trajectory nodes.
    pub psi_samples: Vec<(f64, f64)>,
    pub quadrature_error: f64,
}

pub fn c_prime(params: &ModelParams) -> Result<Sensitivity> {
    let ws = solve_min_speed(params, SPEED_TOL)?;
    c_prime_with(params, &ws.trajectory)
}

/// `c'(α)` using an already computed minimal-speed trajectory.
pub fn c_prime_with(params: &ModelParams, traj: &PhaseTrajectory) -> Result<Sensitivity> {
    let table = PsiTable::new(traj)?;
    let (m0, m1) = table.moments();
    let ratio = m0.value / m1.value;
    let c_prime = -(params.m() - 1.0) * ratio;
    let quadrature_error = c_prime.abs() * (m0.error / m0.value.abs() + m1.error / m1.value.abs());
    let psi_samples = traj
        .samples
        .iter()
        .map(|s| Ok((s.q, table.psi(s.q)?)))
        .collect::<Result<Vec<_>>>()?;
    Ok(Sensitivity {
        alpha: params.alpha(),
        speed: traj.speed,
        c_prime,
        psi_samples,
        quadrature_error,
    })
}

/// Log-shift coefficient `c* = -c'(0)/c(0)` by the Ψ route.
pub fn cstar(m: f64) -> Result<f64> {
    let params = ModelParams::new(m, 0.0)?;
    let sens = c_prime(&params)?;
    Ok(-sens.c_prime / sens.speed)
}

/// Allowed change of the profile-form constant under a 100x looser tail cut.
const TAIL_SENSITIVITY_TOL: f64 = 1e-6;

/// Log-shift coefficient from the density profile at `α = 0`:
///
/// ```text
/// c* = (1/c) ∫ (Φ^m)' W dx / ∫ Φ' W dx,
/// W(x) = exp((m-1)/m ∫_x^{x*} (1 - Φ)/(Φ^{m-1})' dy),   Φ(x*) = ((m-1)/m)^{1/(m-1)}.
/// ```
pub fn cstar_profile_form(m: f64) -> Result<f64> {
    let params = ModelParams::new(m, 0.0)?;
    let ws = solve_min_speed(&params, SPEED_TOL)?;
    let profile = reconstruct_profile(&ws.trajectory)?;
    let q_max = params.q_max();
    let full = profile_ratio(&profile, profile.x_min())?;
    let x_loose = crossing(&profile, q_max * (1.0 - 1e-6));
    let loose = profile_ratio(&profile, x_loose)?;
    let change = (full - loose).abs();
    if change > TAIL_SENSITIVITY_TOL {
        return Err(WaveError::TailNotConverged {
            change,
            tolerance: TAIL_SENSITIVITY_TOL,
        });
    }
    Ok(full / ws.c)
}

/// Position where the profile pressure equals `level`.
pub(crate) fn crossing(profile: &WaveProfile, level: f64) -> f64 {
    let (mut lo, mut hi) = (profile.x_min(), 0.0);
    if profile.phi(lo) < level {
        return lo;
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if profile.phi(mid) >= level {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// `∫ (Φ^m)' W dx / ∫ Φ' W dx` over `[x_left, 0]`.
fn profile_ratio(profile: &WaveProfile, x_left: f64) -> Result<f64> {
    let params = profile.params;
    let m1 = params.m() - 1.0;
    // (m-1)/m (1 - Φ)/(Φ^{m-1})' = (1 - Φ)/φ'
    let q_max = params.q_max();
    let inner = |y: f64| {
        let (phi, slope) = profile.phi_and_slope(y);
        // 1 - Φ from the gap s = q_max - φ without cancellation
        let gap = (q_max - phi) / q_max;
        -((-gap).ln_1p() / m1).exp_m1() / slope
    };
    let x_star = crossing(profile, 1.0);

    let mut nodes: Vec<f64> = profile.samples().iter().map(|s| s.x).filter(|&x| x > x_left).collect();
    nodes.insert(0, x_left);
    let n = nodes.len();

    // K_i = ∫_{x_left}^{x_i} inner
    let mut k = vec![0.0; n];
    for i in 1..n {
        let (a, b) = (nodes[i - 1], nodes[i]);
        let rough = gk15(&inner, a, b).value.abs();
        // φ near q_max only carries the gap to about ε q_max absolute
        let gap = ((q_max - profile.phi(a)) / q_max).max(f64::EPSILON);
        let tol = rough * QUAD_TOL.max(16.0 * f64::EPSILON / gap);
        k[i] = k[i - 1] + integrate(&inner, a, b, tol).value;
    }
    let k_at = |x: f64| -> f64 {
        let i = nodes.partition_point(|&v| v <= x).saturating_sub(1).min(n - 2);
        k[i] + gk15(&inner, nodes[i], x).value
    };
    let k_star = k_at(x_star);
    let weight = |x: f64| (k_star - k_at(x)).exp();

    let mut num = 0.0;
    let mut den = 0.0;
    for i in 0..n - 1 {
        let (a, b) = (nodes[i], nodes[i + 1]);
        if i == n - 2 {
            // front panel: Φ' is singular at x = 0 for m > 2, but W is smooth
            // so ∫ Φ' W dx ≈ W(mid) (Φ(b) - Φ(a)), and likewise for Φ^m
            let w = weight(0.5 * (a + b));
            let (da, db) = (profile.density(a), profile.density(b));
            num += w * (db.powf(params.m()) - da.powf(params.m()));
            den += w * (db - da);
            continue;
        }
        let num_f = |x: f64| {
            let (phi, slope) = profile.phi_and_slope(x);
            params.density(phi) * slope * weight(x)
        };
        let den_f = |x: f64| {
            let (phi, slope) = profile.phi_and_slope(x);
            params.density(phi) * slope / (m1 * phi) * weight(x)
        };
        num += gk15(&num_f, a, b).value;
        den += gk15(&den_f, a, b).value;
    }
    Ok(num / den)
}

/// `sup_x |φ(x; α+h) - φ(x; α-h)| / 2h` over `x_range` (clipped to `x <= 0`),
/// sampled every 0.01.
pub fn dphi_dalpha_sup(params: &ModelParams, h: f64, x_range: (f64, f64)) -> Result<f64> {
    if !(h > 0.0 && h.is_finite()) {
        return Err(WaveError::InvalidTolerance(h));
    }
    let build = |alpha: f64| -> Result<WaveProfile> {
        let p = params.with_alpha(alpha)?;
        reconstruct_profile(&solve_min_speed(&p, SPEED_TOL)?.trajectory)
    };
    let plus = build(params.alpha() + h)?;
    let minus = build(params.alpha() - h)?;
    let (lo, hi) = (x_range.0.min(x_range.1), x_range.0.max(x_range.1).min(0.0));
    let n = ((hi - lo) / 0.01).ceil().max(1.0) as usize;
    let sup = (0..=n)
        .map(|k| lo + (hi - lo) * k as f64 / n as f64)
        .map(|x| (plus.phi(x) - minus.phi(x)).abs() / (2.0 * h))
        .fold(0.0, f64::max);
    Ok(sup)
}
