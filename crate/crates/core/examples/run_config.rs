//! Parse a key = value run configuration, run it, and echo the effective
//! configuration.

use pmefront::config::RunConfig;
use pmefront::sim;

const TEXT: &str = "\
# slow diffusion in the plane
m = 3
dim = 2
t_end = 40
snapshot_times = 20, 40
";

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let cfg = RunConfig::parse(TEXT, std::path::Path::new("."))?;
    print!("{}", cfg.render());
    let out = sim::run(&cfg.sim_config()?)?;
    for snap in &out.snapshots {
        println!(
            "# t = {}: front at {:.2}, max u = {:.6}",
            snap.t,
            sim::locate_front(snap, cfg.u_tol)?,
            snap.max_u()
        );
    }
    Ok(())
}
