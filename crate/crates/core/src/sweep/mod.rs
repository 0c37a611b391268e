//! Grid sweeps, density maps and resumable runs.

mod contour;
mod density;
mod probe;
mod row;
mod runner;
mod spec;

pub use contour::{
    write_contour_csv, zero_contour, Contour, ContourAxis, Segment, CONTOUR_CSV_HEADER,
};
pub use density::{boundary_path, contour_path, margin_field, run_density, DensityOutcome};
pub use probe::{cavity_margin, default_trace_length, first_sudden_death, m_trace, x_aa_trace};
pub use row::{evaluate, evaluate_set, physical, Row, CSV_HEADER};
pub use runner::{
    manifest_path, partial_path, run_sweep, write_rows, RunManifest, RunOptions, RunOutcome,
    TOOL_VERSION,
};
pub use spec::{
    parse_config, Axis, AxisSpacing, Format, GridPoint, Output, SweepSpec, CONFIG_KEYS,
};
