//! Minimal wave speed `c(α)` over a range of advection coefficients.
//!
//! ```text
//! cargo run --release --example wave_speed -- 3
//! ```

use pmefront::wavekit::{front_slope, gamma, solve_min_speed, ModelParams};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let m: f64 = std::env::args().nth(1).map(|s| s.parse()).transpose()?.unwrap_or(2.0);
    println!("alpha,c,gamma,front_slope,iterations");
    for k in -4..=4 {
        let alpha = 0.25 * k as f64;
        let params = ModelParams::new(m, alpha)?;
        let ws = solve_min_speed(&params, 1e-10)?;
        println!(
            "{alpha},{:.10},{:.10},{:.10},{}",
            ws.c,
            gamma(&params, ws.c),
            front_slope(&params, ws.c)?,
            ws.iterations
        );
    }
    Ok(())
}
