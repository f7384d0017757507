//! Run configuration, result files and plots.

mod config;
mod output;
mod run;

pub use config::{
    load_config, parse_config, AutoKeyword, ExperimentSection, Format, GridConfig, Kind, Model, ModelConfig,
    OutputConfig, RunConfig, TruncationConfig, Tunable,
};
pub use output::{plot_svg, series_csv, series_header, snapshot_csv, write_outputs};
pub use run::run_experiment;
