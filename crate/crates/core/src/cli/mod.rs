//! Configuration, experiment drivers and file output behind the CLI.

pub mod config;
pub mod drivers;
pub mod props;

pub use config::{parse_config, ConfigError, ForceConfig, InitialSpec, RunConfig};
pub use drivers::{
    cmd_mms, cmd_run, cmd_sweep_m, cmd_sweep_n, CliError, MmsReport, RunSummary, SweepMReport,
    SweepNReport,
};
pub use props::{run_suite, PropsOptions, PropsReport};
