//! The ten acceptance criteria.
//!
//! Criteria 1-5 (`quick`) only touch the wave solver. Criteria 6-10 (`full`)
//! share three radial runs (`m = 2`, `N = 1, 2, 3`, `dr = 0.05`, `t_end = 200`).
//! Independent criteria run on separate threads; results always come back
//! ordered by id.

use std::time::Instant;

use serde::Serialize;

use crate::shiftfit::{compare_profile, envelope_check, fit_shift, log_shift_position, EnvelopeOptions};
use crate::sim::{self, ab_check, SimConfig, SimOutput};
use crate::wavekit::{
    self, c_prime, c_prime_with, cstar, cstar_profile_form, dphi_dalpha_sup, front_slope, gamma, integrate_trajectory,
    reconstruct_profile, solve_min_speed, solve_min_speed_with, IntegratorOptions, ModelParams, SpeedOptions,
    Termination,
};

type Check = std::result::Result<(bool, String), Box<dyn std::error::Error + Send + Sync>>;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Tier {
    Quick,
    Full,
}

#[derive(Debug, Clone, Serialize)]
pub struct CriterionResult {
    pub id: u8,
    pub name: &'static str,
    pub tier: Tier,
    pub passed: bool,
    pub detail: String,
    pub seconds: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct Summary {
    pub passed: bool,
    pub criteria: Vec<CriterionResult>,
}

impl Summary {
    /// One `PASS`/`FAIL` line per criterion.
    pub fn table(&self) -> String {
        let mut out = String::new();
        for c in &self.criteria {
            out.push_str(&format!(
                "{:>2}  {}  {:<28} {:>8.2}s  {}\n",
                c.id,
                if c.passed { "PASS" } else { "FAIL" },
                c.name,
                c.seconds,
                c.detail
            ));
        }
        out
    }
}

const SPEED_TOL: f64 = 1e-10;
const M_GRID: [f64; 3] = [1.5, 2.0, 3.0];
const ALPHA_GRID: [f64; 3] = [-0.5, 0.0, 0.5];
/// Wider advection grid for the Lipschitz speed bound.
const LIPSCHITZ_GRID: [f64; 5] = [-1.0, -0.5, 0.0, 0.5, 1.0];

fn timed(id: u8, name: &'static str, tier: Tier, limit: Option<f64>, f: impl FnOnce() -> Check) -> CriterionResult {
    let start = Instant::now();
    let outcome = f();
    let seconds = start.elapsed().as_secs_f64();
    let (mut passed, mut detail) = match outcome {
        Ok(v) => v,
        Err(e) => (false, format!("error: {e}")),
    };
    if let Some(limit) = limit {
        if seconds > limit {
            passed = false;
            detail.push_str(&format!("; took {seconds:.1}s > {limit}s"));
        }
    }
    CriterionResult {
        id,
        name,
        tier,
        passed,
        detail,
        seconds,
    }
}

fn check_speed() -> Check {
    let ws = solve_min_speed(&ModelParams::new(2.0, 0.0)?, SPEED_TOL)?;
    let err = (ws.c - 1.0).abs();
    Ok((err < 1e-6, format!("c = {:.10}, |c - 1| = {err:.1e}", ws.c)))
}

fn check_sensitivity() -> Check {
    let params = ModelParams::new(2.0, 0.0)?;
    let sens = c_prime(&params)?;
    let h = 1e-3;
    let up = solve_min_speed(&params.with_alpha(h)?, SPEED_TOL)?.c;
    let down = solve_min_speed(&params.with_alpha(-h)?, SPEED_TOL)?.c;
    let fd = (up - down) / (2.0 * h);
    let e_exact = (sens.c_prime + 0.5).abs();
    let e_fd = (sens.c_prime - fd).abs();
    Ok((
        e_exact < 1e-3 && e_fd < 1e-3,
        format!("c' = {:.6}, finite difference {fd:.6}", sens.c_prime),
    ))
}

fn check_cstar() -> Check {
    let a = cstar(2.0)?;
    let b = cstar_profile_form(2.0)?;
    Ok((
        (a - 0.5).abs() < 2e-3 && (a - b).abs() < 5e-3,
        format!("c* = {a:.6}, profile form {b:.6}"),
    ))
}

fn check_closed_form() -> Check {
    let params = ModelParams::new(2.0, 0.0)?;
    let traj = integrate_trajectory(&params, 1.0, &IntegratorOptions::default())?;
    if traj.termination != Termination::ReachedCeiling {
        return Ok((false, format!("trajectory ended with {:?}", traj.termination)));
    }
    let p_err = traj
        .samples
        .iter()
        .map(|s| (s.p - (0.5 * s.q - 1.0)).abs())
        .fold(0.0, f64::max);
    let ws = solve_min_speed(&params, SPEED_TOL)?;
    let profile = reconstruct_profile(&ws.trajectory)?;
    let mut phi_err: f64 = profile
        .samples()
        .iter()
        .map(|s| (s.density - (1.0 - (0.5 * s.x).exp())).abs())
        .fold(0.0, f64::max);
    let x_min = profile.x_min();
    let n = 20_000;
    for i in 0..=n {
        let x = x_min * i as f64 / n as f64;
        phi_err = phi_err.max((profile.density(x) - (1.0 - (0.5 * x).exp())).abs());
    }
    Ok((
        p_err < 1e-6 && phi_err < 1e-5,
        format!("sup|p - (q/2 - 1)| = {p_err:.1e}, sup|Φ - (1 - e^(x/2))| = {phi_err:.1e}"),
    ))
}

/// Per-grid-point properties; returns the failures.
fn grid_point(m: f64, alpha: f64) -> std::result::Result<Vec<String>, wavekit::WaveError> {
    let mut fails = Vec::new();
    let tag = format!("m={m} α={alpha}");
    let params = ModelParams::new(m, alpha)?;
    let ws = solve_min_speed(&params, SPEED_TOL)?;
    let c = ws.c;
    let q_max = params.q_max();
    let p = ws.trajectory.interpolant();

    // front: |p(δ) + c| within the first-order Taylor term plus a δ² remainder
    let slope = front_slope(&params, c)?;
    for delta in [1e-3, 1e-4, 1e-5] {
        let q = delta * q_max;
        let lhs = (p.eval(q) + c).abs();
        let rhs = slope.abs() * q + q * q + 10.0 * SPEED_TOL;
        if lhs > rhs {
            fails.push(format!("{tag}: Darcy endpoint at δ={delta:e}: {lhs:.3e} > {rhs:.3e}"));
        }
    }

    // saddle: p(q_max - ε)/ε → -γ
    let g = gamma(&params, c);
    let err = |eps: f64| (p.eval(q_max - eps) / eps + g).abs();
    let (coarse, fine) = (err(1e-2 * q_max), err(1e-4 * q_max));
    if !(fine <= (0.1 * coarse).max(1e-9) && fine < 1e-4) {
        fails.push(format!("{tag}: saddle slope error {coarse:.2e} -> {fine:.2e}"));
    }

    // -m < c' < 0 and agreement with the finite difference
    let sens = c_prime_with(&params, &ws.trajectory)?;
    if !(-m < sens.c_prime && sens.c_prime < 0.0) {
        fails.push(format!("{tag}: c' = {} outside (-m, 0)", sens.c_prime));
    }
    let h = 1e-3;
    let fd = (solve_min_speed(&params.with_alpha(alpha + h)?, SPEED_TOL)?.c
        - solve_min_speed(&params.with_alpha(alpha - h)?, SPEED_TOL)?.c)
        / (2.0 * h);
    if (sens.c_prime - fd).abs() > 1e-3 {
        fails.push(format!("{tag}: c' = {:.6} vs finite difference {fd:.6}", sens.c_prime));
    }

    // bounded ∂αφ: stable under h/2 and not growing on a longer range
    let d1 = dphi_dalpha_sup(&params, 1e-3, (-20.0, 0.0))?;
    let d2 = dphi_dalpha_sup(&params, 5e-4, (-20.0, 0.0))?;
    let d3 = dphi_dalpha_sup(&params, 1e-3, (-40.0, 0.0))?;
    if !(d1.is_finite() && (d1 - d2).abs() <= 0.1 * d1 && d3 <= 1.1 * d1) {
        fails.push(format!("{tag}: ∂αφ probe {d1:.4} / {d2:.4} (h/2) / {d3:.4} (x ≥ -40)"));
    }

    // the speed does not depend on the seed offsets
    for scale in [1e-4, 1e-6] {
        let opts = SpeedOptions {
            integrator: IntegratorOptions {
                front_offset: Some(scale * q_max),
                saddle_offset: Some(scale * q_max),
                ..IntegratorOptions::default()
            },
            ..SpeedOptions::default()
        };
        let cs = solve_min_speed_with(&params, SPEED_TOL, &opts)?.c;
        if (cs - c).abs() > 1e-6 {
            fails.push(format!("{tag}: seed offsets {scale:e}·q_max move c by {:.1e}", (cs - c).abs()));
        }
    }
    Ok(fails)
}

fn check_phase_plane_properties() -> Check {
    let mut fails = Vec::new();
    let results: Vec<_> = std::thread::scope(|s| {
        let handles: Vec<_> = M_GRID
            .iter()
            .flat_map(|&m| ALPHA_GRID.iter().map(move |&a| (m, a)))
            .map(|(m, a)| s.spawn(move || grid_point(m, a)))
            .collect();
        handles.into_iter().map(|h| h.join().expect("grid worker panicked")).collect()
    });
    for r in results {
        fails.extend(r?);
    }
    for m in M_GRID {
        let speeds = LIPSCHITZ_GRID
            .iter()
            .map(|&a| Ok(solve_min_speed(&ModelParams::new(m, a)?, SPEED_TOL)?.c))
            .collect::<std::result::Result<Vec<f64>, wavekit::WaveError>>()?;
        for i in 1..speeds.len() {
            let drop = speeds[i - 1] - speeds[i];
            let gap = LIPSCHITZ_GRID[i] - LIPSCHITZ_GRID[i - 1];
            if !(drop >= -2.0 * SPEED_TOL && drop <= m * gap + 2.0 * SPEED_TOL) {
                fails.push(format!("m={m}: c drops by {drop} over Δα = {gap}"));
            }
        }
    }
    let points = M_GRID.len() * ALPHA_GRID.len();
    if fails.is_empty() {
        Ok((true, format!("{points} grid points, all properties hold")))
    } else {
        Ok((false, fails.join("; ")))
    }
}

/// Configuration of the shared full-tier runs.
pub fn reference_config(dim: u32) -> SimConfig {
    SimConfig {
        m: 2.0,
        dim,
        dr: 0.05,
        t_end: 200.0,
        snapshot_times: (0..=15).map(|k| 50.0 + 10.0 * k as f64).collect(),
        ..SimConfig::default()
    }
}

pub const FIT_WINDOW: (f64, f64) = (50.0, 200.0);

struct Runs {
    outputs: [std::result::Result<(SimOutput, f64), String>; 3],
}

impl Runs {
    fn get(&self, dim: u32) -> std::result::Result<&(SimOutput, f64), Box<dyn std::error::Error + Send + Sync>> {
        self.outputs[dim as usize - 1]
            .as_ref()
            .map_err(|e| format!("N={dim} run failed: {e}").into())
    }
}

fn reference_runs() -> Runs {
    let outputs = std::thread::scope(|s| {
        let handles = [1, 2, 3].map(|dim| {
            s.spawn(move || {
                let start = Instant::now();
                sim::run(&reference_config(dim))
                    .map(|out| (out, start.elapsed().as_secs_f64()))
                    .map_err(|e| e.to_string())
            })
        });
        handles.map(|h| h.join().expect("simulation thread panicked"))
    });
    Runs { outputs }
}

fn check_no_shift(runs: &Runs) -> Check {
    let (out, secs) = runs.get(1)?;
    let fit = fit_shift(&out.series, FIT_WINDOW)?;
    Ok((
        fit.b_hat.abs() < 0.05 && *secs < 300.0,
        format!("N=1: B̂ = {:.2e}, ĉ = {:.6}, run {secs:.0}s", fit.b_hat, fit.c_hat),
    ))
}

fn check_log_shift(runs: &Runs) -> Check {
    let (n2, s2) = runs.get(2)?;
    let (n3, s3) = runs.get(3)?;
    let b2 = fit_shift(&n2.series, FIT_WINDOW)?.b_hat;
    let b3 = fit_shift(&n3.series, FIT_WINDOW)?.b_hat;
    let db = b3 - b2;
    let ok = (db - 0.5).abs() <= 0.2 * 0.5 && (b2 - 0.5).abs() <= 0.25 * 0.5 && (b3 - 1.0).abs() <= 0.25 * 1.0;
    Ok((
        ok && s2 + s3 < 1800.0,
        format!("B̂(2) = {b2:.4}, B̂(3) = {b3:.4}, ΔB = {db:.4}"),
    ))
}

fn check_profile(runs: &Runs) -> Check {
    let (out, _) = runs.get(2)?;
    let params = ModelParams::new(2.0, 0.0)?;
    let profile = reconstruct_profile(&solve_min_speed(&params, SPEED_TOL)?.trajectory)?;
    let cs = cstar(2.0)?;
    let at = |t: f64| -> std::result::Result<f64, Box<dyn std::error::Error + Send + Sync>> {
        let snap = out
            .snapshots
            .iter()
            .find(|s| (s.t - t).abs() < 1e-9)
            .ok_or_else(|| format!("no snapshot at t = {t}"))?;
        let k = log_shift_position(out.c_star, cs, 2, t);
        Ok(compare_profile(snap, &profile, k)?.sup_error)
    };
    let (early, late) = (at(50.0)?, at(200.0)?);
    Ok((
        late < 0.05 && late < early,
        format!("sup error {early:.4} at t=50, {late:.4} at t=200"),
    ))
}

fn check_diagnostics(runs: &Runs) -> Check {
    let mut notes = Vec::new();
    let mut ok = true;
    for dim in 1..=3 {
        let (out, _) = runs.get(dim)?;
        let rows: Vec<_> = out
            .series
            .window(100.0, 200.0)
            .filter(|r| r.hdot.is_finite() && r.front_flux.is_finite())
            .collect();
        if rows.is_empty() {
            return Ok((false, format!("N={dim}: no usable rows in [100, 200]")));
        }
        let darcy = rows.iter().map(|r| (r.hdot + r.front_flux).abs() / r.hdot.abs()).sum::<f64>() / rows.len() as f64;
        let flux: Vec<f64> = rows.iter().map(|r| r.max_flux).collect();
        let (lo, hi) = flux.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &v| (a.min(v), b.max(v)));
        let mean = flux.iter().sum::<f64>() / flux.len() as f64;
        let spread = (hi - lo) / mean;
        let slack = 5.0 * out.final_state.dr;
        let worst = out
            .snapshots
            .iter()
            .map(|s| ab_check(s, s.t, 1e-10))
            .min_by(|a, b| a.min_margin.total_cmp(&b.min_margin));
        let ab_ok = worst.map_or(false, |w| w.holds(slack));
        ok &= darcy < 0.1 && spread < 0.1 && ab_ok;
        notes.push(format!(
            "N={dim}: Darcy {:.2}%, flux spread {:.2}%, ab margin {:.1e}",
            100.0 * darcy,
            100.0 * spread,
            worst.map_or(f64::NAN, |w| w.min_margin)
        ));
    }
    Ok((ok, notes.join("; ")))
}

fn check_envelope(runs: &Runs) -> Check {
    let (out, _) = runs.get(2)?;
    let snaps: Vec<_> = out
        .snapshots
        .iter()
        .filter(|s| s.t >= 50.0 && s.t <= 200.0)
        .cloned()
        .collect();
    let report = envelope_check(&snaps, out.c_star, cstar(2.0)?, &EnvelopeOptions::default())?;
    let ok = matches!((report.c_lower, report.c_upper), (Some(_), Some(u)) if u <= 10.0) && report.violations == 0;
    let show = |c: Option<f64>| c.map_or("none".to_string(), |v| format!("{v}"));
    Ok((
        ok,
        format!(
            "C_lower = {}, C_upper = {}, violations {} over {} snapshots",
            show(report.c_lower),
            show(report.c_upper),
            report.violations,
            snaps.len()
        ),
    ))
}

fn quick() -> Vec<CriterionResult> {
    std::thread::scope(|s| {
        let handles = [
            s.spawn(|| timed(1, "minimal speed", Tier::Quick, Some(1.0), check_speed)),
            s.spawn(|| timed(2, "sensitivity", Tier::Quick, Some(10.0), check_sensitivity)),
            s.spawn(|| timed(3, "log-shift constant", Tier::Quick, None, check_cstar)),
            s.spawn(|| timed(4, "closed form m=2", Tier::Quick, None, check_closed_form)),
            s.spawn(|| timed(5, "phase-plane properties", Tier::Quick, Some(120.0), check_phase_plane_properties)),
        ];
        handles.map(|h| h.join().expect("criterion thread panicked")).into()
    })
}

fn full() -> Vec<CriterionResult> {
    let runs = reference_runs();
    let runs = &runs;
    std::thread::scope(|s| {
        let handles = [
            s.spawn(move || timed(6, "1D no log shift", Tier::Full, None, || check_no_shift(runs))),
            s.spawn(move || timed(7, "logarithmic correction", Tier::Full, None, || check_log_shift(runs))),
            s.spawn(move || timed(8, "front-shape convergence", Tier::Full, None, || check_profile(runs))),
            s.spawn(move || timed(9, "front diagnostics", Tier::Full, None, || check_diagnostics(runs))),
            s.spawn(move || timed(10, "envelope", Tier::Full, None, || check_envelope(runs))),
        ];
        handles.map(|h| h.join().expect("criterion thread panicked")).into()
    })
}

/// Run the selected tiers; both tiers proceed concurrently.
pub fn run(quick_tier: bool, full_tier: bool) -> Summary {
    let (mut criteria, rest) = std::thread::scope(|s| {
        let q = quick_tier.then(|| s.spawn(quick));
        let f = full_tier.then(|| s.spawn(full));
        (
            q.map(|h| h.join().expect("quick tier panicked")).unwrap_or_default(),
            f.map(|h| h.join().expect("full tier panicked")).unwrap_or_default(),
        )
    });
    criteria.extend(rest);
    criteria.sort_by_key(|c| c.id);
    Summary {
        passed: criteria.iter().all(|c| c.passed),
        criteria,
    }
}
