//! Linear irreversible thermodynamics and its correspondence with quantum
//! mechanics in the Gaussian regime.
//!
//! * [`thermo`]: entropy, forces, fluxes, reciprocity and Boltzmann fluctuations
//!   of an `N`-variable system near equilibrium.
//! * [`ou`]: the one-variable stationary Gauss-Markov fluctuation process, its
//!   exact sampler and Monte Carlo gate probabilities.
//! * [`path_integral`]: the Onsager-Machlup Lagrangian and a time-sliced
//!   evaluation of the path integral.
//! * [`quantum`]: free and harmonic propagators, the harmonic ground state and
//!   classical actions.
//! * [`correspondence`]: the dictionary `τ ↔ it`, `γ ↔ ω`, `y ↔ x`,
//!   `s/2k_B ↔ mω/ħ`, and numerical verification of each identity it implies.
//! * [`suite`]: the full verification run behind `onsager verify-all`.

pub mod correspondence;
pub mod error;
pub mod ou;
pub mod path_integral;
pub mod quadrature;
pub mod quantum;
pub mod rng;
pub mod suite;
pub mod thermo;
pub mod time;

pub use correspondence::{BoundaryConvention, DictionaryMap};
pub use error::{Error, Result};
pub use ou::{CumulativeEstimate, GateSequence, InitialCondition, OUParams, PathSample, WienerParams};
pub use path_integral::{ConvergenceRow, DiscretePath, QuadraticChain, ThermoLagrangian};
pub use quantum::{Amplitude, QuantumParams};
pub use thermo::{ThermoState, ThermoSystem};
pub use time::ComplexTime;
