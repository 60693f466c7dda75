//! Charged Klein-Gordon fields on De Sitter-Reissner-Nordström black holes:
//! exterior geometry, the Regge-Wheeler chart, the spectral pencil and its
//! resonances, and time-domain evolution.

pub mod evolution;
pub mod ode;
pub mod pencil;
pub mod regge_wheeler;
pub mod resonance_solver;
mod series;
pub mod spacetime;

pub use evolution::{EnergyWindow, EvolutionError, EvolutionProblem, FieldState, GaussianPulse, GridConfig};
pub use pencil::{FreeHarness, JostSolution, ModeConfig, ModeProblem, PencilError, SeedMode, WaveProblem};
pub use regge_wheeler::{ChartError, ChartPoint, LagrangeSeries, PotentialSample, RWChart, Side};
pub use spacetime::{validate_params, Horizons, ParamError, RawParams, SpacetimeParams};
