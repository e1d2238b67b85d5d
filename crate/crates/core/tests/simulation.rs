use pmefront::sim::{self, init_state_on, locate_front, InitialData, SimConfig, Stepper};
use proptest::prelude::*;

fn short(m: f64, dim: u32, dr: f64, t_end: f64) -> SimConfig {
    SimConfig {
        m,
        dim,
        dr,
        t_end,
        warmup: 1.0,
        ..SimConfig::default()
    }
}

#[test]
fn density_stays_in_unit_interval_with_compact_support() {
    for dim in 1..=3 {
        let cfg = SimConfig {
            snapshot_times: vec![2.0, 5.0, 10.0],
            ..short(2.0, dim, 0.05, 10.0)
        };
        let out = sim::run(&cfg).unwrap();
        for snap in out.snapshots.iter().chain([&out.final_state]) {
            assert!(snap.u.iter().all(|&u| (0.0..=1.0 + 1e-12).contains(&u)), "N={dim} t={}", snap.t);
            let end = snap.support_end().unwrap();
            assert!(end + 10 < snap.u.len(), "support reaches the boundary");
            assert!(snap.u[end + 1..].iter().all(|&u| u == 0.0));
        }
    }
}

#[test]
fn plateau_data_stay_radially_decreasing() {
    let cfg = SimConfig {
        snapshot_times: vec![3.0, 8.0],
        ..short(2.0, 2, 0.05, 8.0)
    };
    let out = sim::run(&cfg).unwrap();
    for snap in &out.snapshots {
        for w in snap.u.windows(2) {
            assert!(w[1] <= w[0] + 1e-12, "t={}", snap.t);
        }
    }
}

#[test]
fn front_position_converges_under_refinement() {
    let front = |dr: f64| {
        let out = sim::run(&short(2.0, 2, dr, 10.0)).unwrap();
        out.series.h_at(10.0)
    };
    let (coarse, mid, fine) = (front(0.2), front(0.1), front(0.05));
    let (d1, d2) = ((coarse - mid).abs(), (mid - fine).abs());
    assert!(d2 < d1, "differences {d1} then {d2}");
    assert!(d2 < 0.2);
}

#[test]
fn series_is_bit_identical_across_runs() {
    let cfg = short(1.5, 3, 0.1, 15.0);
    let a = sim::run(&cfg).unwrap();
    let b = std::thread::spawn(move || sim::run(&cfg).unwrap()).join().unwrap();
    assert_eq!(a.series.rows.len(), b.series.rows.len());
    for (x, y) in a.series.rows.iter().zip(&b.series.rows) {
        assert_eq!(x.h.to_bits(), y.h.to_bits());
        assert_eq!(x.front_flux.to_bits(), y.front_flux.to_bits());
        assert_eq!(x.max_flux.to_bits(), y.max_flux.to_bits());
    }
}

#[test]
fn front_never_retreats() {
    let out = sim::run(&short(3.0, 2, 0.05, 20.0)).unwrap();
    for w in out.series.rows.windows(2) {
        assert!(w[1].h >= w[0].h);
    }
}

#[test]
fn tabulated_data_behave_like_plateau() {
    let plateau = short(2.0, 1, 0.05, 5.0);
    let table = SimConfig {
        initial: InitialData::Tabulated {
            r: vec![0.0, 1.0, 1.0 + 1e-9],
            u: vec![1.0, 1.0, 0.0],
        },
        ..plateau.clone()
    };
    let a = sim::run(&plateau).unwrap();
    let b = sim::run(&table).unwrap();
    assert!((a.series.h_at(5.0) - b.series.h_at(5.0)).abs() <= 0.05 + 1e-12);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn explicit_steps_preserve_bounds(
        m in 1.2f64..4.0,
        dim in 1u32..=3,
        radius in 0.3f64..3.0,
        height in 0.05f64..1.0,
        steps in 1usize..200,
    ) {
        let cfg = SimConfig {
            m,
            dim,
            dr: 0.05,
            initial: InitialData::Plateau { radius, height },
            ..SimConfig::default()
        };
        let mut state = init_state_on(&cfg, radius + 10.0).unwrap();
        let mut stepper = Stepper::default();
        let mut last_front = locate_front(&state, cfg.u_tol).unwrap();
        for _ in 0..steps {
            stepper.step(&mut state, cfg.cfl_safety).unwrap();
            prop_assert!(state.u.iter().all(|&u| u >= 0.0 && u <= 1.0 + 1e-12));
            let front = locate_front(&state, cfg.u_tol).unwrap();
            prop_assert!(front >= last_front);
            last_front = front;
        }
    }
}
