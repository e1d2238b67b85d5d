//! Reconstruct the sharp front `Φ(x)` and print it as CSV. For `m = 2` the
//! last column is the error against `1 - e^{x/2}`.

use pmefront::wavekit::{reconstruct_profile, solve_min_speed, ModelParams};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let m: f64 = std::env::args().nth(1).map(|s| s.parse()).transpose()?.unwrap_or(2.0);
    let ws = solve_min_speed(&ModelParams::new(m, 0.0)?, 1e-10)?;
    let profile = reconstruct_profile(&ws.trajectory)?;
    eprintln!(
        "c = {:.10}, x_min = {:.3}, slope at front = {:.8}, max ODE residual = {:.1e}",
        ws.c,
        profile.x_min(),
        profile.front_slope_estimate(),
        profile.max_ode_residual()
    );
    println!("x,phi,Phi,err_m2");
    let mut x = 0.0;
    while x >= profile.x_min() {
        let phi = profile.phi(x);
        let density = profile.density(x);
        let err = if m == 2.0 { density - (1.0 - (0.5 * x).exp()) } else { f64::NAN };
        println!("{x:.2},{phi:.10},{density:.10},{err:.2e}");
        x -= 0.5;
    }
    Ok(())
}
