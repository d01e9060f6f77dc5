//! Simulation and equilibrium analysis of twice-repeated 2×2 games played
//! through quantum states.

pub mod cli;
pub mod config;
pub mod equilibria;
pub mod error;
pub mod extensive;
pub mod iqbaltoor;
pub mod mw;
pub mod qstate;
pub mod repeated10;
pub mod repro;
pub mod stagegames;

pub use error::{Error, Result};
