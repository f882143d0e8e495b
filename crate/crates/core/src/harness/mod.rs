//! Fixed-aperture sweeps over the element count, CSV output and the model
//! property suite behind the `dense-mimo` command.

mod config;
mod csv;
mod sweep;
mod validate;

pub use self::config::{parse_element_list, SweepConfig, DEFAULT_ELEMENT_COUNTS, MAX_SPACING_OVER_LAMBDA};
pub use self::csv::{emit_csv, format_float, read_rows, read_rows_from, to_csv_bytes, COLUMNS, SIGNIFICANT_DIGITS};
pub use self::sweep::{
    downlink_config, downlink_point, failure_budget, realization_stream, run_downlink_sweep, run_uplink_sweep,
    summarize, uplink_point, DownlinkPoint, DownlinkSample, Scenario, Summary, SweepRow, UplinkPoint, Variant,
};
pub use self::validate::{oracle_tolerance, validate_model, Check, FaultInjection, ValidationReport};
