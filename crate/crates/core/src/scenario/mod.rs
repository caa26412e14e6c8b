//! Experiment plumbing: JSON scenario configs, seeded user and building
//! generation, single runs, parameter sweeps and CSV/JSON export.

mod config;
mod export;
mod generate;
mod run;

pub use config::{BuildingSource, HeightRange, Loads, ScenarioConfig, ScenarioKind, Strategy};
pub use export::{
    export_records, records_to_bytes, summarize, summary_to_bytes, Format, PointSummary,
    CSV_HEADER, SUMMARY_HEADER,
};
pub use generate::{
    assign_heights, campus_footprints, derive_seed, generate_users, resolve_buildings,
    synthetic_footprints,
};
pub use run::{
    run_scenario, run_sweep, sort_records, Instance, RunRecord, RunReport, RunStatus, SweepParam,
    SweepSpec,
};
