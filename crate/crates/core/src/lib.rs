//! Linear response of concurrence and three-tangle to W-type noise, with an
//! independent convex-roof oracle and the sudden-death thresholds of the
//! GHZ-type and W-like families.

pub mod critical;
pub mod error;
pub mod figures;
pub mod linalg;
pub mod measures;
pub mod optim;
pub mod response;
pub mod states;

pub use error::{Error, Result};
pub use measures::{Ensemble, Member, TangleAmplitude};
pub use response::ResponseReport;
pub use states::{Ket, MixedState, NoiseSpec, SymParams};
