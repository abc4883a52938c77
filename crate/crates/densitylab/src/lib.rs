//! densitylab — a simulation and certification lab for perturbed density
//! systems.
//!
//! A *density function* ρ(x,t) is a sign-indefinite scalar field that bounds
//! the derivative of a positive-definite function V along trajectories:
//!
//! ```text
//! V̇ ≤ ρ(x,t)·W₁(x) ≤ 0   on a stable domain D_S, or
//! V̇ ≥ ρ(x,t)·W₂(x) ≥ 0   on an unstable domain D_U.
//! ```
//!
//! The sign pattern of ρ carves the state space into stable, unstable and
//! forbidden regions; where |ρ| diverges, trajectories cannot cross. This
//! crate provides:
//!
//! - a catalog of density fields and bounded time signals ([`density`],
//!   [`signal`]),
//! - a deterministic fixed-step integrator that is robust near the singular
//!   barriers of those fields ([`ode`]),
//! - Lyapunov machinery that certifies the V̇ bounds, region membership and
//!   attraction numerically ([`analysis`]),
//! - a SISO polynomial plant with the decomposition used by the adaptive
//!   density controller ([`poly`], [`plant`], [`adaptive`]),
//! - a scenario harness with a frozen preset bank, CSV export, SVG plots and
//!   machine-checkable run reports ([`harness`], [`plot`]).
//!
//! The `examples/` directory holds one runnable example per capability; the
//! `densitylab` binary exposes the same machinery as `run` / `verify` /
//! `plot` / `list-presets` subcommands.

pub mod adaptive;
pub mod analysis;
pub mod density;
// pub mod harness;
pub mod ode;
pub mod plant;
// pub mod plot;
pub mod poly;
pub mod signal;
