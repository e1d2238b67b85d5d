//! Smallest constants `C` for which the solution sits between the
//! time-dependent barriers `(1 ± log t/t²) Φ(· ∓ C)`.

use pmefront::shiftfit::{envelope_check, EnvelopeOptions};
use pmefront::sim::{self, SimConfig};
use pmefront::wavekit::cstar;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let cfg = SimConfig {
        dim: 2,
        dr: 0.05,
        t_end: 120.0,
        snapshot_times: (5..=12).map(|k| 10.0 * k as f64).collect(),
        ..SimConfig::default()
    };
    let out = sim::run(&cfg)?;
    let report = envelope_check(&out.snapshots, out.c_star, cstar(cfg.m)?, &EnvelopeOptions::default())?;
    println!("C_lower = {:?}", report.c_lower);
    println!("C_upper = {:?}", report.c_upper);
    println!("violations at C_max = {}", report.violations);
    for (t, alpha) in &report.alphas {
        println!("t = {t}: barrier advection {alpha:.5}");
    }
    Ok(())
}
