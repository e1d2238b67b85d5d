//! Traveling fronts and free-boundary asymptotics for the Fisher-KPP
//! porous medium equation `u_t = Δu^m + u(1 - u)`, `m > 1`.

pub mod cli;
pub mod config;
pub mod ode;
pub mod quadrature;
pub mod shiftfit;
pub mod sim;
pub mod verify;
pub mod wavekit;
