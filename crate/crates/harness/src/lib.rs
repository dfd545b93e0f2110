//! Front end for the `ipc-core` solvers: experiment specs and profiles,
//! trace and sweep CSVs, β sweeps and the flow-discretization order study.

pub mod error;
pub mod output;
pub mod run;
pub mod spec;
pub mod trace;

pub use error::{HarnessError, Result};
pub use run::{
    run_order_study, run_single, run_sweep, scalar_flow, OrderRow, SingleRun, SweepReport, SweepRow,
};
pub use spec::{ExperimentSpec, LineSearchSettings, Profile, Settings};
pub use trace::{read_trace, write_trace, TraceFile};
