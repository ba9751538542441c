//! Traveling waves, critical speeds and direct simulation for
//! `u_t = Δ_p(u^m) + f(u)` with bistable and monostable reactions.

pub mod error;
pub mod interp;
pub mod ode;
pub mod params;
pub mod pde;
pub mod phase_plane;
pub mod quad;
pub mod reaction;
pub mod wave;

pub use error::{Error, Result};
pub use params::{make_params, Params};
pub use reaction::{cubic_reaction, f_mp, scale_to_kpp, weighted_integral, Reaction, ReactionKind};

/// Library version, recorded next to every CLI output.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");
