//! Logarithmic front-shift fits and profile-convergence diagnostics.
//!
//! The front model is `h(t) ≈ ĉ t - B̂ log t + r̂₀`; in dimension `N` the
//! expected coefficient is `B = (N-1) c*`.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::sim::{locate_front, InterfaceSeries, SimState};
use crate::wavekit::{self, invert_speed, reconstruct_profile, solve_min_speed, ModelParams, WaveProfile};

#[derive(Debug, thiserror::Error)]
pub enum FitError {
    #[error("window [{lo}, {hi}] holds {rows} rows; at least {needed} are required")]
    TooFewRows {
        lo: f64,
        hi: f64,
        rows: usize,
        needed: usize,
    },
    #[error("design condition number {condition:e} exceeds {limit:e}")]
    IllConditioned { condition: f64, limit: f64 },
    #[error("invalid window [{0}, {1}]")]
    InvalidWindow(f64, f64),
    #[error("front at {front} is within {margin} of the domain edge {r_max}")]
    FrontTooClose { front: f64, r_max: f64, margin: f64 },
    #[error("no snapshots to check")]
    NoSnapshots,
    #[error(transparent)]
    Wave(#[from] wavekit::WaveError),
    #[error(transparent)]
    Sim(#[from] crate::sim::SimError),
}

pub type Result<T> = std::result::Result<T, FitError>;

pub const MIN_ROWS: usize = 50;
/// Largest accepted condition number of the (column-scaled) normal equations.
pub const CONDITION_LIMIT: f64 = 1e12;

/// Least-squares coefficients of `h(t) ≈ c_hat t - b_hat log t + r0_hat`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ShiftFit {
    pub window: (f64, f64),
    pub c_hat: f64,
    pub b_hat: f64,
    pub r0_hat: f64,
    pub rms: f64,
    pub rows: usize,
    /// Condition number of the scaled normal equations.
    pub condition: f64,
}

/// `c_* t - (N-1) c* log t`, the moving frame of the front.
pub fn log_shift_position(c_star: f64, cstar: f64, dim: u32, t: f64) -> f64 {
    c_star * t - (dim as f64 - 1.0) * cstar * t.ln()
}

fn window_rows(series: &InterfaceSeries, window: (f64, f64)) -> Result<(Vec<f64>, Vec<f64>)> {
    let (lo, hi) = window;
    if !(lo > 0.0 && hi > lo && hi.is_finite()) {
        return Err(FitError::InvalidWindow(lo, hi));
    }
    let (t, h): (Vec<f64>, Vec<f64>) = series.window(lo, hi).map(|r| (r.t, r.h)).unzip();
    if t.len() < MIN_ROWS {
        return Err(FitError::TooFewRows {
            lo,
            hi,
            rows: t.len(),
            needed: MIN_ROWS,
        });
    }
    Ok((t, h))
}

/// Solve `min |A x - y|` with columns scaled to unit norm; returns the
/// coefficients, rms residual and condition of the scaled normal equations.
fn least_squares(columns: &[Vec<f64>], y: &[f64]) -> Result<(Vec<f64>, f64, f64)> {
    let n = y.len();
    let k = columns.len();
    let scale: Vec<f64> = columns
        .iter()
        .map(|c| c.iter().map(|v| v * v).sum::<f64>().sqrt().max(f64::MIN_POSITIVE))
        .collect();
    let a = DMatrix::from_fn(n, k, |i, j| columns[j][i] / scale[j]);
    let svd = a.clone().svd(true, true);
    let (smax, smin) = svd
        .singular_values
        .iter()
        .fold((0.0f64, f64::INFINITY), |(hi, lo), &s| (hi.max(s), lo.min(s)));
    let condition = if smin > 0.0 { (smax / smin).powi(2) } else { f64::INFINITY };
    if !(condition <= CONDITION_LIMIT) {
        return Err(FitError::IllConditioned {
            condition,
            limit: CONDITION_LIMIT,
        });
    }
    let b = DVector::from_column_slice(y);
    let x = svd.solve(&b, 0.0).map_err(|_| FitError::IllConditioned {
        condition,
        limit: CONDITION_LIMIT,
    })?;
    let resid = &a * &x - &b;
    let rms = (resid.norm_squared() / n as f64).sqrt();
    let coef = (0..k).map(|j| x[j] / scale[j]).collect();
    Ok((coef, rms, condition))
}

/// Joint least-squares fit of `(ĉ, B̂, r̂₀)` over rows with `t` in `window`.
pub fn fit_shift(series: &InterfaceSeries, window: (f64, f64)) -> Result<ShiftFit> {
    let (t, h) = window_rows(series, window)?;
    let log_t: Vec<f64> = t.iter().map(|v| -v.ln()).collect();
    let ones = vec![1.0; t.len()];
    let (coef, rms, condition) = least_squares(&[t.clone(), log_t, ones], &h)?;
    Ok(ShiftFit {
        window,
        c_hat: coef[0],
        b_hat: coef[1],
        r0_hat: coef[2],
        rms,
        rows: t.len(),
        condition,
    })
}

/// Fit of `(B̂, r̂₀)` with the linear speed pinned to `c`.
pub fn fit_shift_pinned(series: &InterfaceSeries, window: (f64, f64), c: f64) -> Result<ShiftFit> {
    let (t, h) = window_rows(series, window)?;
    let y: Vec<f64> = t.iter().zip(&h).map(|(t, h)| h - c * t).collect();
    let log_t: Vec<f64> = t.iter().map(|v| -v.ln()).collect();
    let ones = vec![1.0; t.len()];
    let (coef, rms, condition) = least_squares(&[log_t, ones], &y)?;
    Ok(ShiftFit {
        window,
        c_hat: c,
        b_hat: coef[0],
        r0_hat: coef[1],
        rms,
        rows: t.len(),
        condition,
    })
}

/// `B̂(N=3) - B̂(N=2)` on a common window; equals `c*` in the limit.
pub fn delta_b(series_hi: &InterfaceSeries, series_lo: &InterfaceSeries, window: (f64, f64)) -> Result<f64> {
    Ok(fit_shift(series_hi, window)?.b_hat - fit_shift(series_lo, window)?.b_hat)
}

/// JSON form of a fit.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ShiftReport {
    pub c_hat: f64,
    #[serde(rename = "B_hat")]
    pub b_hat: f64,
    pub r0_hat: f64,
    pub rms: f64,
    #[serde(rename = "predicted_B")]
    pub predicted_b: Option<f64>,
    /// `B̂ / predicted_B`.
    pub ratio: Option<f64>,
    pub window: [f64; 2],
}

impl ShiftReport {
    pub fn new(fit: &ShiftFit, predicted_b: Option<f64>) -> Self {
        ShiftReport {
            c_hat: fit.c_hat,
            b_hat: fit.b_hat,
            r0_hat: fit.r0_hat,
            rms: fit.rms,
            predicted_b,
            ratio: predicted_b.filter(|&p| p != 0.0).map(|p| fit.b_hat / p),
            window: [fit.window.0, fit.window.1],
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProfileComparison {
    pub t: f64,
    /// Minimising offset `r₀`.
    pub shift: f64,
    pub sup_error: f64,
}

/// Offset scan and comparison range for [`compare_profile_with`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScanOptions {
    pub center: f64,
    pub half_width: f64,
    pub step: f64,
    /// Range of the moving coordinate `ξ` over which the sup is taken.
    pub xi_range: (f64, f64),
    /// Required distance between the front and the domain edge.
    pub edge_margin: f64,
}

impl Default for ScanOptions {
    fn default() -> Self {
        ScanOptions {
            center: 0.0,
            half_width: 10.0,
            step: 1e-3,
            xi_range: (-20.0, 5.0),
            edge_margin: 5.0,
        }
    }
}

/// Sup distance between `u(r, t)` and `Φ(ξ - r₀)`, `ξ = r - k_shift`,
/// minimised over `r₀ ∈ [-10, 10]` on a 1e-3 grid.
pub fn compare_profile(snapshot: &SimState, profile: &WaveProfile, k_shift: f64) -> Result<ProfileComparison> {
    compare_profile_with(snapshot, profile, k_shift, &ScanOptions::default())
}

pub fn compare_profile_with(
    snapshot: &SimState,
    profile: &WaveProfile,
    k_shift: f64,
    opts: &ScanOptions,
) -> Result<ProfileComparison> {
    let front = locate_front(snapshot, 1e-10)?;
    let r_max = snapshot.r_max();
    if front > r_max - opts.edge_margin {
        return Err(FitError::FrontTooClose {
            front,
            r_max,
            margin: opts.edge_margin,
        });
    }
    let points: Vec<(f64, f64)> = (0..snapshot.u.len())
        .map(|i| (snapshot.r(i) - k_shift, snapshot.u[i]))
        .filter(|&(xi, _)| xi >= opts.xi_range.0 && xi <= opts.xi_range.1)
        .collect();
    let n = (2.0 * opts.half_width / opts.step).round() as i64;
    let mut best = ProfileComparison {
        t: snapshot.t,
        shift: f64::NAN,
        sup_error: f64::INFINITY,
    };
    for k in 0..=n {
        let r0 = opts.center - opts.half_width + k as f64 * opts.step;
        let mut sup: f64 = 0.0;
        for &(xi, u) in &points {
            sup = sup.max((u - profile.density(xi - r0)).abs());
            if sup >= best.sup_error {
                break;
            }
        }
        if sup < best.sup_error {
            best.sup_error = sup;
            best.shift = r0;
        }
    }
    Ok(best)
}

/// Which comparison functions bound the solution.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum BarrierFamily {
    /// `(1 ± log t / t²) Φ(·; α(c_* - (N-1)c*/t))`, with `α(·)` the inverse of
    /// the minimal-speed map.
    TimeDependent,
    /// The limiting profile `Φ(·; 0)` on both sides.
    Stationary,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EnvelopeOptions {
    pub family: BarrierFamily,
    /// Lower bound is checked on `r >= c_* t - m_bar log t`.
    pub m_bar: f64,
    pub c_step: f64,
    pub c_max: f64,
    /// Bracket for the advection inversion.
    pub alpha_bracket: (f64, f64),
}

impl Default for EnvelopeOptions {
    fn default() -> Self {
        EnvelopeOptions {
            family: BarrierFamily::TimeDependent,
            m_bar: 10.0,
            c_step: 0.1,
            c_max: 10.0,
            alpha_bracket: (-0.5, 0.5),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EnvelopeReport {
    /// Smallest grid constant for `u >= Φ⁻(r - k(t) + C, t)`, if any `<= c_max`.
    pub c_lower: Option<f64>,
    /// Smallest grid constant for `u <= Φ⁺(r - k(t) - C, t)`.
    pub c_upper: Option<f64>,
    /// Grid points violating a bound at `C = c_max`.
    pub violations: usize,
    /// `α` used at each snapshot time.
    pub alphas: Vec<(f64, f64)>,
}

/// Comparison data at one snapshot time.
struct Barrier {
    profile: WaveProfile,
    factor_lo: f64,
    factor_hi: f64,
}

fn barrier_at(
    m: f64,
    c_star: f64,
    cstar: f64,
    dim: u32,
    t: f64,
    opts: &EnvelopeOptions,
    limit: &WaveProfile,
) -> Result<(Barrier, f64)> {
    match opts.family {
        BarrierFamily::Stationary => Ok((
            Barrier {
                profile: limit.clone(),
                factor_lo: 1.0,
                factor_hi: 1.0,
            },
            0.0,
        )),
        BarrierFamily::TimeDependent => {
            let target = c_star - (dim as f64 - 1.0) * cstar / t;
            let alpha = if target == c_star {
                0.0
            } else {
                invert_speed(m, target, opts.alpha_bracket, 1e-10)?
            };
            let params = ModelParams::new(m, alpha)?;
            let profile = reconstruct_profile(&solve_min_speed(&params, 1e-11)?.trajectory)?;
            let g = t.ln() / (t * t);
            Ok((
                Barrier {
                    profile,
                    factor_lo: 1.0 - g,
                    factor_hi: 1.0 + g,
                },
                alpha,
            ))
        }
    }
}

/// Smallest index `k` in `0..=n` with `holds(k)`, assuming monotonicity.
fn first_holding(n: usize, holds: impl Fn(usize) -> bool) -> Option<usize> {
    if !holds(n) {
        return None;
    }
    let (mut lo, mut hi) = (0usize, n);
    if holds(0) {
        return Some(0);
    }
    while hi - lo > 1 {
        let mid = (lo + hi) / 2;
        if holds(mid) {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Some(hi)
}

/// Two-sided envelope
/// `Φ⁻(r - k(t) + C, t) <= u(r, t) <= Φ⁺(r - k(t) - C, t)`,
/// `k(t) = c_* t - (N-1) c* log t`, with the lower bound on
/// `r >= c_* t - m_bar log t` and the upper bound on `r >= 0`.
pub fn envelope_check(
    snapshots: &[SimState],
    c_star: f64,
    cstar: f64,
    opts: &EnvelopeOptions,
) -> Result<EnvelopeReport> {
    let first = snapshots.first().ok_or(FitError::NoSnapshots)?;
    let (m, dim) = (first.m, first.dim);
    let limit = reconstruct_profile(&solve_min_speed(&ModelParams::new(m, 0.0)?, 1e-11)?.trajectory)?;
    let mut barriers = Vec::with_capacity(snapshots.len());
    let mut alphas = Vec::with_capacity(snapshots.len());
    for s in snapshots {
        let (b, alpha) = barrier_at(m, c_star, cstar, dim, s.t, opts, &limit)?;
        barriers.push(b);
        alphas.push((s.t, alpha));
    }

    let tol = 1e-12;
    let lower_fails = |c: f64| -> usize {
        let mut bad = 0;
        for (s, b) in snapshots.iter().zip(&barriers) {
            let k = log_shift_position(c_star, cstar, dim, s.t);
            let r_from = (c_star * s.t - opts.m_bar * s.t.ln()).max(0.0);
            for i in 0..s.u.len() {
                let r = s.r(i);
                if r < r_from {
                    continue;
                }
                if s.u[i] < b.factor_lo * b.profile.density(r - k + c) - tol {
                    bad += 1;
                }
            }
        }
        bad
    };
    let upper_fails = |c: f64| -> usize {
        let mut bad = 0;
        for (s, b) in snapshots.iter().zip(&barriers) {
            let k = log_shift_position(c_star, cstar, dim, s.t);
            for i in 0..s.u.len() {
                if s.u[i] > b.factor_hi * b.profile.density(s.r(i) - k - c) + tol {
                    bad += 1;
                }
            }
        }
        bad
    };

    let n = (opts.c_max / opts.c_step).round() as usize;
    // k / (1/step) keeps decimal steps such as 0.1 exact on the grid
    let per_unit = 1.0 / opts.c_step;
    let grid = |k: usize| {
        if (per_unit - per_unit.round()).abs() < 1e-9 {
            k as f64 / per_unit.round()
        } else {
            k as f64 * opts.c_step
        }
    };
    let c_lower = first_holding(n, |k| lower_fails(grid(k)) == 0).map(grid);
    let c_upper = first_holding(n, |k| upper_fails(grid(k)) == 0).map(grid);
    let mut violations = 0;
    if c_lower.is_none() {
        violations += lower_fails(opts.c_max);
    }
    if c_upper.is_none() {
        violations += upper_fails(opts.c_max);
    }
    Ok(EnvelopeReport {
        c_lower,
        c_upper,
        violations,
        alphas,
    })
}
