//! Explicit finite differences for the radial problem
//! `u_t = (u^m)_rr + ((N-1)/r)(u^m)_r + u(1 - u)` with compactly supported data.

mod io;

pub use io::{read_series, read_snapshot, snapshot_file_name, write_series, write_snapshot};

use crate::wavekit::{self, ModelParams};

#[derive(Debug, thiserror::Error)]
pub enum SimError {
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
    #[error("initial data rejected: {0}")]
    InvalidInitialData(String),
    #[error("time step {dt} exceeds the positivity bound {bound}")]
    CflViolation { dt: f64, bound: f64 },
    #[error("state has empty support")]
    EmptySupport,
    #[error("front reached the outer boundary at t = {t}")]
    FrontAtBoundary { t: f64 },
    #[error(transparent)]
    Wave(#[from] wavekit::WaveError),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error("malformed {what} at line {line}: {detail}")]
    Parse {
        what: &'static str,
        line: usize,
        detail: String,
    },
}

pub type Result<T> = std::result::Result<T, SimError>;

#[derive(Debug, Clone, PartialEq)]
pub enum InitialData {
    /// `u0 = height` on `r <= radius`, zero beyond.
    Plateau { radius: f64, height: f64 },
    /// Piecewise linear through `(r, u)` pairs, zero beyond the last node.
    Tabulated { r: Vec<f64>, u: Vec<f64> },
}

impl InitialData {
    fn validate(&self) -> Result<()> {
        let bad = |s: &str| Err(SimError::InvalidInitialData(s.to_string()));
        match self {
            InitialData::Plateau { radius, height } => {
                if !(radius.is_finite() && height.is_finite()) {
                    return bad("plateau radius and height must be finite");
                }
                if *height < 0.0 {
                    return bad("negative plateau height");
                }
                if !(*radius > 0.0 && *height > 0.0) {
                    return bad("initial data is identically zero");
                }
            }
            InitialData::Tabulated { r, u } => {
                if r.len() != u.len() || r.len() < 2 {
                    return bad("tabulated data needs matching r and u columns with two or more rows");
                }
                if r.iter().chain(u).any(|v| !v.is_finite()) {
                    return bad("tabulated data must be finite");
                }
                if r[0] < 0.0 || r.windows(2).any(|w| w[0] >= w[1]) {
                    return bad("tabulated radii must be non-negative and increasing");
                }
                if u.iter().any(|&v| v < 0.0) {
                    return bad("negative density");
                }
                if u.iter().all(|&v| v == 0.0) {
                    return bad("initial data is identically zero");
                }
            }
        }
        Ok(())
    }

    /// Radius beyond which the data vanish.
    pub fn support_radius(&self) -> f64 {
        match self {
            InitialData::Plateau { radius, .. } => *radius,
            InitialData::Tabulated { r, u } => {
                let last = u.iter().rposition(|&v| v > 0.0).unwrap_or(0);
                r[(last + 1).min(r.len() - 1)]
            }
        }
    }

    fn sample(&self, r: f64) -> f64 {
        match self {
            InitialData::Plateau { radius, height } => {
                if r <= *radius {
                    *height
                } else {
                    0.0
                }
            }
            InitialData::Tabulated { r: rs, u } => {
                if r < rs[0] {
                    return u[0];
                }
                if r > rs[rs.len() - 1] {
                    return 0.0;
                }
                let i = rs.partition_point(|&x| x <= r).clamp(1, rs.len() - 1);
                let w = (r - rs[i - 1]) / (rs[i] - rs[i - 1]);
                u[i - 1] + w * (u[i] - u[i - 1])
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimConfig {
    pub m: f64,
    pub dim: u32,
    pub dr: f64,
    pub cfl_safety: f64,
    pub t_end: f64,
    /// Domain extent; `None` picks `support + c_* t_end + 10`.
    pub r_max: Option<f64>,
    pub initial: InitialData,
    pub snapshot_times: Vec<f64>,
    /// Density threshold for the front index.
    pub u_tol: f64,
    /// Spacing of the recorded series rows.
    pub series_dt: f64,
    /// Width of the centered difference used for `hdot`.
    pub hdot_window: f64,
    /// Rows are recorded from this time on.
    pub warmup: f64,
    /// Bracket width of the minimal-speed solve behind the domain extent.
    pub speed_tol: f64,
}

impl Default for SimConfig {
    fn default() -> Self {
        SimConfig {
            m: 2.0,
            dim: 1,
            dr: 0.05,
            cfl_safety: 0.9,
            t_end: 200.0,
            r_max: None,
            initial: InitialData::Plateau {
                radius: 1.0,
                height: 1.0,
            },
            snapshot_times: Vec::new(),
            u_tol: 1e-10,
            series_dt: 0.1,
            hdot_window: 1.0,
            warmup: 10.0,
            speed_tol: 1e-10,
        }
    }
}

impl SimConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |s: &str| Err(SimError::InvalidConfig(s.to_string()));
        if !(self.m > 1.0 + wavekit::MIN_EXPONENT_GAP && self.m.is_finite()) {
            return bad("m must exceed 1");
        }
        if self.dim == 0 {
            return bad("dimension must be at least 1");
        }
        if !(self.dr > 0.0 && self.dr.is_finite()) {
            return bad("dr must be positive");
        }
        if !(self.cfl_safety > 0.0 && self.cfl_safety < 1.0) {
            return bad("cfl_safety must lie in (0, 1)");
        }
        if !(self.t_end > 0.0 && self.t_end.is_finite()) {
            return bad("t_end must be positive");
        }
        if !(self.u_tol > 0.0 && self.u_tol < 1.0) {
            return bad("u_tol must lie in (0, 1)");
        }
        if !(self.series_dt > 0.0 && self.hdot_window > 0.0 && self.warmup >= 0.0) {
            return bad("series_dt and hdot_window must be positive, warmup non-negative");
        }
        if !(self.speed_tol > 0.0 && self.speed_tol.is_finite()) {
            return bad("speed_tol must be positive");
        }
        if let Some(r) = self.r_max {
            if !(r > 0.0 && r.is_finite()) {
                return bad("r_max must be positive");
            }
        }
        if self.snapshot_times.iter().any(|&t| !(t >= 0.0 && t <= self.t_end)) {
            return bad("snapshot times must lie in [0, t_end]");
        }
        self.initial.validate()
    }

    /// Domain extent actually used, with a note when the requested value was
    /// too small to contain the front at `t_end`.
    pub fn effective_r_max(&self, c_star: f64) -> (f64, Option<String>) {
        let needed = self.initial.support_radius() + c_star * self.t_end + 10.0;
        match self.r_max {
            None => (needed, None),
            Some(r) if r >= needed => (r, None),
            Some(r) => (
                needed,
                Some(format!("r_max {r} cannot contain the front at t_end; extended to {needed}")),
            ),
        }
    }
}

/// Radial grid state `u_i = u(i dr, t)`.
#[derive(Debug, Clone, PartialEq)]
pub struct SimState {
    pub t: f64,
    pub m: f64,
    pub dim: u32,
    pub dr: f64,
    pub u: Vec<f64>,
}

impl SimState {
    pub fn r(&self, i: usize) -> f64 {
        i as f64 * self.dr
    }

    /// Pressure `v = m/(m-1) u^{m-1}`.
    pub fn pressure(&self, i: usize) -> f64 {
        pressure(self.m, self.u[i])
    }

    pub fn r_max(&self) -> f64 {
        self.r(self.u.len() - 1)
    }

    /// Index of the last positive value.
    pub fn support_end(&self) -> Option<usize> {
        self.u.iter().rposition(|&v| v > 0.0)
    }

    pub fn max_u(&self) -> f64 {
        self.u.iter().copied().fold(0.0, f64::max)
    }

    /// Linear interpolation of `u` at radius `r` (zero outside the grid).
    pub fn u_at(&self, r: f64) -> f64 {
        if r < 0.0 {
            return self.u_at(-r);
        }
        let s = r / self.dr;
        let i = s.floor() as usize;
        if i + 1 >= self.u.len() {
            return if i < self.u.len() { self.u[i] } else { 0.0 };
        }
        let w = s - i as f64;
        self.u[i] * (1.0 - w) + self.u[i + 1] * w
    }
}

fn pressure(m: f64, u: f64) -> f64 {
    m / (m - 1.0) * u.powf(m - 1.0)
}

/// `u^m`, with integer exponents taken by repeated multiplication.
fn power_fn(m: f64) -> impl Fn(f64) -> f64 {
    let k = m.round();
    let integral = (m - k).abs() < 1e-15 && (2.0..=8.0).contains(&k);
    let k = k as i32;
    move |u: f64| if integral { u.powi(k) } else { u.powf(m) }
}

pub fn init_state(config: &SimConfig) -> Result<SimState> {
    config.validate()?;
    let c_star = wavekit::solve_min_speed(&ModelParams::new(config.m, 0.0)?, config.speed_tol)?.c;
    let (r_max, note) = config.effective_r_max(c_star);
    if let Some(note) = note {
        log::info!("{note}");
    }
    init_state_on(config, r_max)
}

/// Sample the initial data on `[0, r_max]` without the automatic extent.
pub fn init_state_on(config: &SimConfig, r_max: f64) -> Result<SimState> {
    config.validate()?;
    let n = (r_max / config.dr).ceil() as usize + 1;
    let support = config.initial.support_radius();
    if support >= (n - 2) as f64 * config.dr {
        return Err(SimError::InvalidInitialData("support reaches the outer boundary".into()));
    }
    let u: Vec<f64> = (0..n).map(|i| config.initial.sample(i as f64 * config.dr)).collect();
    if u.iter().all(|&v| v == 0.0) {
        return Err(SimError::InvalidInitialData("initial data vanish on the grid".into()));
    }
    Ok(SimState {
        t: 0.0,
        m: config.m,
        dim: config.dim,
        dr: config.dr,
        u,
    })
}

/// Largest stable step: `dt = cfl / (2 N m max(u)^{m-1} / dr² + 1)`.
///
/// The factor `N` comes from the origin stencil `2N (w_1 - w_0)/dr²`; the
/// `+1` keeps the logistic term from breaking positivity.
pub fn stable_dt(state: &SimState, cfl_safety: f64) -> f64 {
    cfl_safety / (positivity_rate(state) + 1.0)
}

fn positivity_rate(state: &SimState) -> f64 {
    let umax = state.max_u();
    2.0 * state.dim.max(1) as f64 * state.m * umax.powf(state.m - 1.0) / (state.dr * state.dr)
}

/// Scratch buffers reused across steps.
#[derive(Debug, Default, Clone)]
pub struct Stepper {
    w: Vec<f64>,
    next: Vec<f64>,
}

impl Stepper {
    /// One explicit step of size `dt`.
    pub fn step_with_dt(&mut self, state: &mut SimState, dt: f64) -> Result<()> {
        let bound = 1.0 / (positivity_rate(state) + 1.0);
        if !(dt > 0.0 && dt <= bound) {
            return Err(SimError::CflViolation { dt, bound });
        }
        let n = state.u.len();
        let Some(end) = state.support_end() else {
            state.t += dt;
            return Ok(());
        };
        // the support grows by at most one node per step
        let hi = (end + 1).min(n - 2);
        let pow = power_fn(state.m);
        self.w.clear();
        self.w.extend(state.u[..=hi + 1].iter().map(|&u| pow(u)));
        self.next.clear();
        self.next.resize(hi + 1, 0.0);

        let w = &self.w;
        let inv_dr2 = 1.0 / (state.dr * state.dr);
        let nm1 = state.dim as f64 - 1.0;
        let mut worst_negative: f64 = 0.0;
        for i in 0..=hi {
            let u = state.u[i];
            let diffusion = if i == 0 {
                2.0 * state.dim as f64 * (w[1] - w[0]) * inv_dr2
            } else {
                let lap = (w[i + 1] - 2.0 * w[i] + w[i - 1]) * inv_dr2;
                let adv = nm1 / (i as f64) * (w[i + 1] - w[i - 1]) * 0.5 * inv_dr2;
                lap + adv
            };
            let mut v = u + dt * (diffusion + u * (1.0 - u));
            if v < 0.0 {
                worst_negative = worst_negative.min(v);
                v = 0.0;
            }
            self.next[i] = v;
        }
        if worst_negative < -1e-12 {
            log::warn!("clamped negative density {worst_negative:e} at t = {}", state.t);
        }
        state.u[..=hi].copy_from_slice(&self.next);
        state.t += dt;
        if state.u[n - 2] > 0.0 {
            return Err(SimError::FrontAtBoundary { t: state.t });
        }
        Ok(())
    }

    /// One step with the CFL-derived time step; returns the step used.
    pub fn step(&mut self, state: &mut SimState, cfl_safety: f64) -> Result<f64> {
        let dt = stable_dt(state, cfl_safety);
        self.step_with_dt(state, dt)?;
        Ok(dt)
    }
}

/// Advance a copy of `state` by one CFL step.
pub fn step(state: &SimState, config: &SimConfig) -> Result<SimState> {
    let mut next = state.clone();
    Stepper::default().step(&mut next, config.cfl_safety)?;
    Ok(next)
}

/// Free-boundary position by linear extrapolation of the pressure past the
/// last node `j` with `u_j > u_tol`:
/// `h = r_j + v_j dr / (v_j - v_{j+1})`, offset clamped to `[0, dr]`, and
/// `h = r_j` when `v_{j+1} >= v_j`.
pub fn locate_front(state: &SimState, u_tol: f64) -> Result<f64> {
    let j = state.u.iter().rposition(|&u| u > u_tol).ok_or(SimError::EmptySupport)?;
    let r_j = state.r(j);
    if j + 1 >= state.u.len() {
        return Ok(r_j);
    }
    Ok(r_j + front_offset(state.pressure(j), state.pressure(j + 1), state.dr))
}

/// Subgrid offset `v_j dr / (v_j - v_{j+1})` clamped to `[0, dr]`; zero when
/// the pressure does not decrease.
pub fn front_offset(v_j: f64, v_next: f64, dr: f64) -> f64 {
    if v_next >= v_j {
        return 0.0;
    }
    (v_j * dr / (v_j - v_next)).clamp(0.0, dr)
}

/// Pressure nodes below this fraction of the window maximum are treated as
/// the unresolved precursor of the discrete front and left out of the fit.
const RESOLVED_FRACTION: f64 = 0.1;

/// Cubic least-squares fit of the pressure behind the front.
///
/// Uses nodes in `[r_j - span, r_j]` (`j` the last node with `u > u_tol`)
/// whose pressure exceeds a tenth of the window maximum, and returns the
/// extrapolated zero of the fit together with `v_r` there.
pub fn front_fit(state: &SimState, u_tol: f64, span: f64) -> Option<(f64, f64)> {
    let j = state.u.iter().rposition(|&u| u > u_tol)?;
    let r_j = state.r(j);
    let lo = ((r_j - span) / state.dr).ceil().max(0.0) as usize;
    let v_top = (lo..=j).map(|i| state.pressure(i)).fold(0.0, f64::max);
    let cut = RESOLVED_FRACTION * v_top;
    let mut ata = nalgebra::Matrix4::<f64>::zeros();
    let mut atb = nalgebra::Vector4::<f64>::zeros();
    let mut count = 0;
    for i in lo..=j {
        let v = state.pressure(i);
        if v < cut {
            continue;
        }
        let x = (state.r(i) - r_j) / span;
        let row = nalgebra::Vector4::new(1.0, x, x * x, x * x * x);
        ata += row * row.transpose();
        atb += row * v;
        count += 1;
    }
    if count < 6 {
        return None;
    }
    let k = ata.cholesky()?.solve(&atb);
    let value = |x: f64| k[0] + x * (k[1] + x * (k[2] + x * k[3]));
    let slope = |x: f64| k[1] + x * (2.0 * k[2] + x * 3.0 * k[3]);
    // Newton from the linear root toward the zero on the front side
    let mut x = if k[1] != 0.0 { -k[0] / k[1] } else { 0.0 };
    for _ in 0..30 {
        let d = slope(x);
        if d == 0.0 {
            break;
        }
        let step = value(x) / d;
        x -= step;
        if step.abs() < 1e-15 {
            break;
        }
    }
    if !x.is_finite() || x.abs() > 2.0 {
        return None;
    }
    Some((r_j + x * span, slope(x) / span))
}

/// One-sided pressure gradient `v_r(h⁻)` from [`front_fit`].
pub fn front_gradient(state: &SimState, u_tol: f64, span: f64) -> Option<f64> {
    front_fit(state, u_tol, span).map(|(_, slope)| slope)
}

/// `max_r |(u^m)_r|` by centered differences.
pub fn max_flux(state: &SimState) -> f64 {
    let pow = power_fn(state.m);
    let end = state.support_end().map_or(0, |e| (e + 1).min(state.u.len() - 1));
    let mut best: f64 = 0.0;
    for i in 1..end {
        let g = (pow(state.u[i + 1]) - pow(state.u[i - 1])) / (2.0 * state.dr);
        best = best.max(g.abs());
    }
    best
}

/// One recorded row of the interface series.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SeriesRow {
    pub t: f64,
    pub h: f64,
    pub hdot: f64,
    pub front_flux: f64,
    pub max_flux: f64,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct InterfaceSeries {
    pub rows: Vec<SeriesRow>,
}

impl InterfaceSeries {
    pub fn times(&self) -> Vec<f64> {
        self.rows.iter().map(|r| r.t).collect()
    }

    pub fn fronts(&self) -> Vec<f64> {
        self.rows.iter().map(|r| r.h).collect()
    }

    /// Rows with `t` in `[lo, hi]`.
    pub fn window(&self, lo: f64, hi: f64) -> impl Iterator<Item = &SeriesRow> {
        self.rows.iter().filter(move |r| r.t >= lo && r.t <= hi)
    }

    /// `h` at time `t` by linear interpolation (clamped at the ends).
    pub fn h_at(&self, t: f64) -> f64 {
        let rows = &self.rows;
        let i = rows.partition_point(|r| r.t <= t).clamp(1, rows.len() - 1);
        let (a, b) = (rows[i - 1], rows[i]);
        if b.t == a.t {
            return a.h;
        }
        let w = ((t - a.t) / (b.t - a.t)).clamp(0.0, 1.0);
        a.h + w * (b.h - a.h)
    }

    /// Fill `hdot` by centered differences of `h` over `window`, shrinking
    /// to one-sided differences at the ends of the record.
    fn fill_hdot(&mut self, window: f64) {
        if self.rows.len() < 2 {
            return;
        }
        let (t0, t1) = (self.rows[0].t, self.rows[self.rows.len() - 1].t);
        let hdot: Vec<f64> = self
            .rows
            .iter()
            .map(|r| {
                let a = (r.t - 0.5 * window).max(t0);
                let b = (r.t + 0.5 * window).min(t1);
                if b > a {
                    (self.h_at(b) - self.h_at(a)) / (b - a)
                } else {
                    f64::NAN
                }
            })
            .collect();
        for (r, d) in self.rows.iter_mut().zip(hdot) {
            r.hdot = d;
        }
    }
}

/// Everything a run produces.
#[derive(Debug, Clone)]
pub struct SimOutput {
    pub series: InterfaceSeries,
    pub snapshots: Vec<SimState>,
    pub final_state: SimState,
    /// Minimal speed `c_*` used for the domain extent.
    pub c_star: f64,
    pub r_max: f64,
    pub notes: Vec<String>,
    pub steps: u64,
}

/// Span of the quadratic fit behind `front_flux`.
const FLUX_FIT_SPAN: f64 = 1.0;

pub fn run(config: &SimConfig) -> Result<SimOutput> {
    config.validate()?;
    let c_star = wavekit::solve_min_speed(&ModelParams::new(config.m, 0.0)?, config.speed_tol)?.c;
    let (r_max, note) = config.effective_r_max(c_star);
    let mut notes = Vec::new();
    if let Some(note) = note {
        log::info!("{note}");
        notes.push(note);
    }
    let mut state = init_state_on(config, r_max)?;
    let mut stepper = Stepper::default();

    let mut snap_times: Vec<f64> = config.snapshot_times.clone();
    snap_times.sort_by(f64::total_cmp);
    snap_times.dedup();
    let mut snap_iter = snap_times.into_iter().peekable();
    let mut snapshots = Vec::new();

    // record times are k·series_dt, computed from k to avoid drift
    let first_k = (config.warmup / config.series_dt).ceil() as u64;
    let mut k = first_k;
    let record_time = |k: u64| k as f64 * config.series_dt;
    let mut series = InterfaceSeries::default();
    let mut steps = 0u64;

    let eps_t = 1e-12 * config.t_end.max(1.0);
    loop {
        while let Some(&ts) = snap_iter.peek() {
            if ts <= state.t + eps_t {
                snapshots.push(SimState { t: ts, ..state.clone() });
                snap_iter.next();
            } else {
                break;
            }
        }
        while record_time(k) <= state.t + eps_t && record_time(k) <= config.t_end + eps_t {
            let h = locate_front(&state, config.u_tol)?;
            series.rows.push(SeriesRow {
                t: record_time(k),
                h,
                hdot: f64::NAN,
                front_flux: front_gradient(&state, config.u_tol, FLUX_FIT_SPAN).unwrap_or(f64::NAN),
                max_flux: max_flux(&state),
            });
            k += 1;
        }
        if state.t >= config.t_end - eps_t {
            break;
        }
        let mut target = config.t_end.min(record_time(k));
        if let Some(&ts) = snap_iter.peek() {
            target = target.min(ts);
        }
        let dt = stable_dt(&state, config.cfl_safety);
        let gap = target - state.t;
        let dt = if gap <= dt { gap } else { dt };
        stepper.step_with_dt(&mut state, dt)?;
        if gap <= dt {
            state.t = target;
        }
        steps += 1;
    }
    series.fill_hdot(config.hdot_window);
    Ok(SimOutput {
        series,
        snapshots,
        final_state: state,
        c_star,
        r_max,
        notes,
        steps,
    })
}

/// Lower bound `W(t) = -k e^{-(m-1)kt} / (1 - e^{-(m-1)kt})`,
/// `k = min(1, 1/(m-1))`.
pub fn ab_bound(m: f64, t: f64) -> f64 {
    let k = (1.0f64).min(1.0 / (m - 1.0));
    let a = (m - 1.0) * k * t;
    if !(a > 0.0) {
        return f64::NEG_INFINITY;
    }
    -k * (-a).exp() / -(-a).exp_m1()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AbReport {
    pub t: f64,
    /// `W(t)`.
    pub bound: f64,
    /// `min (Δv + F(v) - W(t))` over interior points with `u > u_tol`.
    pub min_margin: f64,
    /// Radius of the minimum.
    pub r_min: f64,
    pub points: usize,
}

impl AbReport {
    pub fn holds(&self, slack: f64) -> bool {
        self.min_margin >= -slack
    }
}

/// Evaluate `Δv + F(v) - W(t)` at interior nodes where `u` and both
/// neighbours exceed `u_tol`; `F(v) = 1 - ((m-1)v/m)^{1/(m-1)} = 1 - u` is
/// the growth rate of the pressure equation `v_t = (m-1) v (Δv + F(v)) + |v_r|²`.
pub fn ab_check(state: &SimState, t: f64, u_tol: f64) -> AbReport {
    let bound = ab_bound(state.m, t);
    let nm1 = state.dim as f64 - 1.0;
    let dr2 = state.dr * state.dr;
    let mut min_margin = f64::INFINITY;
    let mut r_min = f64::NAN;
    let mut points = 0;
    let n = state.u.len();
    for i in 0..n.saturating_sub(1) {
        let lo = if i == 0 { 1 } else { i - 1 };
        if state.u[i] <= u_tol || state.u[i + 1] <= u_tol || state.u[lo] <= u_tol {
            continue;
        }
        let (vm, v, vp) = (state.pressure(lo), state.pressure(i), state.pressure(i + 1));
        let lap = if i == 0 {
            2.0 * state.dim as f64 * (vp - v) / dr2
        } else {
            (vp - 2.0 * v + vm) / dr2 + nm1 / state.r(i) * (vp - vm) / (2.0 * state.dr)
        };
        let margin = lap + (1.0 - state.u[i]) - bound;
        points += 1;
        if margin < min_margin {
            min_margin = margin;
            r_min = state.r(i);
        }
    }
    AbReport {
        t,
        bound,
        min_margin,
        r_min,
        points,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn uniform(value: f64, dim: u32) -> SimState {
        SimState {
            t: 0.0,
            m: 2.0,
            dim,
            dr: 0.05,
            u: {
                let mut u = vec![value; 1000];
                u.resize(2000, 0.0);
                u
            },
        }
    }

    #[test]
    fn plateau_sampling() {
        let cfg = SimConfig::default();
        let s = init_state_on(&cfg, 30.0).unwrap();
        for (i, &u) in s.u.iter().enumerate() {
            let expected = if s.r(i) <= 1.0 { 1.0 } else { 0.0 };
            assert_eq!(u, expected, "r = {}", s.r(i));
        }
    }

    #[test]
    fn rejects_trivial_and_negative_data() {
        let mut cfg = SimConfig::default();
        cfg.initial = InitialData::Plateau {
            radius: 1.0,
            height: 0.0,
        };
        assert!(matches!(init_state_on(&cfg, 30.0), Err(SimError::InvalidInitialData(_))));
        cfg.initial = InitialData::Tabulated {
            r: vec![0.0, 1.0, 2.0],
            u: vec![0.5, -0.1, 0.0],
        };
        assert!(matches!(init_state_on(&cfg, 30.0), Err(SimError::InvalidInitialData(_))));
        cfg.initial = InitialData::Tabulated {
            r: vec![0.0, 1.0],
            u: vec![f64::INFINITY, 0.0],
        };
        assert!(init_state_on(&cfg, 30.0).is_err());
    }

    #[test]
    fn constant_one_is_an_equilibrium() {
        let mut s = uniform(1.0, 2);
        // keep the interior away from the artificial edge
        let mut stepper = Stepper::default();
        for _ in 0..200 {
            stepper.step(&mut s, 0.9).unwrap();
        }
        assert!(s.u[..700].iter().all(|&u| u == 1.0));
    }

    #[test]
    fn zero_state_stays_zero() {
        let mut s = uniform(0.0, 3);
        let mut stepper = Stepper::default();
        for _ in 0..10 {
            stepper.step_with_dt(&mut s, 1e-3).unwrap();
        }
        assert!(s.u.iter().all(|&u| u == 0.0));
    }

    #[test]
    fn uniform_half_follows_the_logistic_ode() {
        let mut s = uniform(0.5, 1);
        let mut stepper = Stepper::default();
        while s.t < 2.0 {
            let dt = stable_dt(&s, 0.9).min(2.0 - s.t);
            stepper.step_with_dt(&mut s, dt).unwrap();
        }
        let exact = 1.0 / (1.0 + (-2.0f64).exp());
        assert!((s.u[10] - exact).abs() < 1e-3, "{} vs {exact}", s.u[10]);
    }

    #[test]
    fn oversized_step_is_rejected() {
        let mut s = uniform(1.0, 1);
        let dt = 10.0 * stable_dt(&s, 0.9);
        assert!(matches!(
            Stepper::default().step_with_dt(&mut s, dt),
            Err(SimError::CflViolation { .. })
        ));
    }

    fn linear_pressure(vj: f64, vn: f64) -> SimState {
        // m = 2: v = 2u
        let mut u = vec![0.0; 300];
        for (i, x) in u.iter_mut().enumerate().take(200) {
            *x = 0.5 * (vj + (200 - i) as f64 * 0.01);
        }
        u[200] = 0.5 * vj;
        u[201] = 0.5 * vn;
        SimState {
            t: 0.0,
            m: 2.0,
            dim: 1,
            dr: 0.05,
            u,
        }
    }

    #[test]
    fn front_extrapolation_hits_the_next_node() {
        let s = linear_pressure(0.1, 0.0);
        assert!((locate_front(&s, 1e-10).unwrap() - 10.05).abs() < 1e-12);
    }

    #[test]
    fn front_extrapolation_is_clamped() {
        assert_eq!(front_offset(0.1, 0.05, 0.05), 0.05);
        assert_eq!(front_offset(0.1, 0.2, 0.05), 0.0);
        assert!((front_offset(0.1, 0.0, 0.05) - 0.05).abs() < 1e-15);
        assert!(matches!(
            locate_front(&uniform(0.0, 1), 1e-10),
            Err(SimError::EmptySupport)
        ));
    }

    #[test]
    fn ab_bound_value() {
        let w = ab_bound(2.0, 10.0);
        assert!((w + (-10.0f64).exp() / (1.0 - (-10.0f64).exp())).abs() < 1e-18);
        assert!((w + 4.54e-5).abs() < 1e-7);
        let r = ab_check(&uniform(1.0, 2), 10.0, 1e-10);
        assert!(r.points > 0);
        assert!((r.min_margin + w).abs() < 1e-18, "{r:?}");
    }

    #[test]
    fn ab_check_on_the_exact_m2_wave() {
        // v = 2(1 - e^{x/2}) behind x = 0 satisfies v'' + F(v) = e^{x/2}/2 > 0
        let dr = 0.01;
        let u: Vec<f64> = (0..6000)
            .map(|i| {
                let x = i as f64 * dr - 50.0;
                if x < 0.0 {
                    1.0 - (0.5 * x).exp()
                } else {
                    0.0
                }
            })
            .collect();
        let s = SimState {
            t: 0.0,
            m: 2.0,
            dim: 1,
            dr,
            u,
        };
        let r = ab_check(&s, 50.0, 1e-10);
        assert!(r.min_margin > -1e-3, "{r:?}");
        // the same profile gives the exact Darcy slope v_r(0⁻) = -1
        let (h, slope) = front_fit(&s, 1e-10, 1.0).unwrap();
        assert!((h - 50.0).abs() < 1e-3 && (slope + 1.0).abs() < 5e-3, "{h} {slope}");
    }
}
