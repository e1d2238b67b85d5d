//! Radial run of `u_t = Δu^m + u(1 - u)` from a plateau, printing the front
//! position and the Darcy-law diagnostics every 10 time units.
//!
//! ```text
//! cargo run --release --example radial_simulation -- 2 100
//! ```

use pmefront::sim::{self, SimConfig};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let mut args = std::env::args().skip(1);
    let dim: u32 = args.next().map(|s| s.parse()).transpose()?.unwrap_or(2);
    let t_end: f64 = args.next().map(|s| s.parse()).transpose()?.unwrap_or(100.0);
    let cfg = SimConfig {
        dim,
        t_end,
        ..SimConfig::default()
    };
    let out = sim::run(&cfg)?;
    eprintln!("c_* = {:.8}, r_max = {:.1}, {} steps", out.c_star, out.r_max, out.steps);
    println!("t,h,hdot,front_flux,max_flux");
    for row in out.series.rows.iter().filter(|r| (r.t / 10.0 - (r.t / 10.0).round()).abs() < 1e-9) {
        println!(
            "{},{:.3},{:.5},{:.5},{:.5}",
            row.t, row.h, row.hdot, row.front_flux, row.max_flux
        );
    }
    Ok(())
}
