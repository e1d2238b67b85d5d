//! `c'(α)` from the Ψ quadrature against a finite difference, and the
//! log-shift constant `c*` by both routes.

use pmefront::wavekit::{c_prime, cstar, cstar_profile_form, solve_min_speed, ModelParams};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    println!("m,alpha,c_prime,finite_difference");
    for m in [1.5, 2.0, 3.0] {
        for alpha in [-0.5, 0.0, 0.5] {
            let params = ModelParams::new(m, alpha)?;
            let sens = c_prime(&params)?;
            let h = 1e-3;
            let fd = (solve_min_speed(&params.with_alpha(alpha + h)?, 1e-11)?.c
                - solve_min_speed(&params.with_alpha(alpha - h)?, 1e-11)?.c)
                / (2.0 * h);
            println!("{m},{alpha},{:.8},{fd:.8}", sens.c_prime);
        }
    }
    println!();
    println!("m,cstar,cstar_profile_form");
    for m in [1.5, 2.0, 3.0] {
        println!("{m},{:.8},{:.8}", cstar(m)?, cstar_profile_form(m)?);
    }
    Ok(())
}
