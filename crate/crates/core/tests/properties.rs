use std::sync::OnceLock;

use pmefront::shiftfit::{compare_profile_with, fit_shift, fit_shift_pinned, ScanOptions};
use pmefront::sim::{InterfaceSeries, SeriesRow, SimState};
use pmefront::wavekit::{c_prime, gamma, reconstruct_profile, solve_min_speed, ModelParams, WaveProfile};
use proptest::prelude::*;

fn series(t: &[f64], h: impl Fn(f64) -> f64) -> InterfaceSeries {
    InterfaceSeries {
        rows: t
            .iter()
            .map(|&t| SeriesRow {
                t,
                h: h(t),
                hdot: f64::NAN,
                front_flux: f64::NAN,
                max_flux: f64::NAN,
            })
            .collect(),
    }
}

fn grid(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    (0..n).map(|k| lo + (hi - lo) * k as f64 / (n - 1) as f64).collect()
}

fn m2_profile() -> &'static WaveProfile {
    static P: OnceLock<WaveProfile> = OnceLock::new();
    P.get_or_init(|| {
        let ws = solve_min_speed(&ModelParams::new(2.0, 0.0).unwrap(), 1e-10).unwrap();
        reconstruct_profile(&ws.trajectory).unwrap()
    })
}

/// Snapshot holding `Φ(r - front)` on a uniform grid.
fn wave_snapshot(front: f64, dr: f64) -> SimState {
    let profile = m2_profile();
    let n = ((front + 30.0) / dr) as usize;
    let u = (0..n)
        .map(|i| {
            let x = i as f64 * dr - front;
            if x >= 0.0 {
                0.0
            } else {
                profile.density(x.max(profile.x_min()))
            }
        })
        .collect();
    SimState {
        t: 100.0,
        m: 2.0,
        dim: 1,
        dr,
        u,
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn gamma_is_the_positive_root(m in 1.001f64..8.0, alpha in -3.0f64..3.0, c in 1e-3f64..5.0) {
        let p = ModelParams::new(m, alpha).unwrap();
        let g = gamma(&p, c);
        prop_assert!(g > 0.0);
        prop_assert!((m * g * g + (c + m * alpha) * g - 1.0).abs() <= 1e-12);
    }

    #[test]
    fn fit_recovers_any_log_model(
        c in 0.1f64..3.0,
        b in -2.0f64..2.0,
        r0 in -10.0f64..10.0,
        lo in 5.0f64..50.0,
        span in 50.0f64..300.0,
    ) {
        let t = grid(lo, lo + span, 120);
        let s = series(&t, |t| c * t - b * t.ln() + r0);
        let fit = fit_shift(&s, (lo, lo + span)).unwrap();
        prop_assert!((fit.c_hat - c).abs() < 1e-8);
        prop_assert!((fit.b_hat - b).abs() < 1e-6 * (1.0 + b.abs()) * span.ln().max(1.0) * 10.0);
        prop_assert!((fit.r0_hat - r0).abs() < 1e-5);
    }

    #[test]
    fn fit_scales_with_the_data(scale in 0.1f64..10.0, c in 0.5f64..2.0, b in 0.0f64..1.5) {
        let t = grid(20.0, 200.0, 100);
        let base = fit_shift(&series(&t, |t| c * t - b * t.ln() + 1.0 + 0.01 * (t * 0.37).sin()), (20.0, 200.0)).unwrap();
        let scaled = fit_shift(&series(&t, |t| scale * (c * t - b * t.ln() + 1.0 + 0.01 * (t * 0.37).sin())), (20.0, 200.0)).unwrap();
        prop_assert!((scaled.c_hat - scale * base.c_hat).abs() < 1e-9 * scale);
        prop_assert!((scaled.b_hat - scale * base.b_hat).abs() < 1e-7 * scale);
        prop_assert!((scaled.rms - scale * base.rms).abs() < 1e-9 * scale);
    }

    #[test]
    fn pinned_fit_agrees_with_joint_fit_on_exact_data(b in -1.0f64..1.0, r0 in -5.0f64..5.0) {
        let t = grid(50.0, 200.0, 151);
        let s = series(&t, |t| t - b * t.ln() + r0);
        let joint = fit_shift(&s, (50.0, 200.0)).unwrap();
        let pinned = fit_shift_pinned(&s, (50.0, 200.0), 1.0).unwrap();
        prop_assert!((joint.b_hat - pinned.b_hat).abs() < 1e-6);
        prop_assert!((pinned.b_hat - b).abs() < 1e-9);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn profile_offset_is_recovered(front in 40.0f64..60.0, offset in -8.0f64..8.0) {
        let k_shift = front - offset;
        let snap = wave_snapshot(front, 0.05);
        let opts = ScanOptions { step: 1e-3, ..ScanOptions::default() };
        let cmp = compare_profile_with(&snap, m2_profile(), k_shift, &opts).unwrap();
        prop_assert!((cmp.shift - offset).abs() < 2e-3, "shift {} for offset {offset}", cmp.shift);
        prop_assert!(cmp.sup_error < 2e-3);
        // moving the reference frame moves the minimiser by the same amount
        let moved = compare_profile_with(&snap, m2_profile(), k_shift + 1.0, &opts).unwrap();
        prop_assert!((moved.shift - (cmp.shift - 1.0)).abs() < 2e-3);
        prop_assert!((moved.sup_error - cmp.sup_error).abs() < 1e-3);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(8))]

    #[test]
    fn speed_map_is_monotone_lipschitz(m in 1.3f64..4.0, a1 in -1.0f64..1.0, gap in 0.01f64..0.5) {
        let c1 = solve_min_speed(&ModelParams::new(m, a1).unwrap(), 1e-10).unwrap().c;
        let c2 = solve_min_speed(&ModelParams::new(m, a1 + gap).unwrap(), 1e-10).unwrap().c;
        prop_assert!(c1 - c2 >= -2e-10);
        prop_assert!(c1 - c2 <= m * gap + 2e-10);
    }

    #[test]
    fn sensitivity_lies_in_open_interval(m in 1.3f64..4.0, alpha in -1.0f64..1.0) {
        let s = c_prime(&ModelParams::new(m, alpha).unwrap()).unwrap();
        prop_assert!(-m < s.c_prime && s.c_prime < 0.0, "c' = {}", s.c_prime);
        prop_assert!(s.psi_samples.iter().all(|&(_, psi)| psi > 0.0));
    }
}
