//! Model specifications, time-stepping schemes, the Stratonovich→Itô
//! conversion, the infinitesimal generator, and ensemble execution.

mod convert;
mod ensemble;
mod model;
mod schemes;
mod trajectory;

pub use convert::{apply_generator, strat_to_ito};
pub use ensemble::{ensemble_path, par_map_indexed, run_ensemble, EnsembleStats, InitialCondition};
pub use model::{DiffusionFn, DriftFn, DriftTerm, Interpretation, ModelSpec};
pub use schemes::{euler_maruyama, heun_strat, rk4, solve_rode, EtaBuilder, RodeScheme, Scheme, Solver};
pub use trajectory::Trajectory;
