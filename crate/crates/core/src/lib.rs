//! Intrinsic-time dissection of price series.
//!
//! A price series is cut into directional-change and overshoot events at a
//! fixed relative threshold. The events form an event-indexed "coastline",
//! and fitting event statistics across thresholds yields the
//! directional-change count and average overshoot scaling laws.
//!
//! ```
//! use coastline::{dissect, DissectionConfig, PricePoint};
//!
//! let series: Vec<PricePoint> = [100.0, 101.0, 102.0, 101.0, 100.0, 103.0]
//!     .iter()
//!     .enumerate()
//!     .map(|(i, &price)| PricePoint { time: i as i64 * 1000, price })
//!     .collect();
//! let d = dissect(&series, DissectionConfig::fractional(0.01).unwrap()).unwrap();
//! assert_eq!(d.dc_count(), 3);
//! ```

pub mod agent;
pub mod cli;
pub mod dissect;
pub mod error;
pub mod ingest;
pub mod scaling;
pub mod synth;
pub mod types;

pub use dissect::{avg_overshoot, coastline, count_dc, dissect, Coastline, Dissection, Runner};
pub use error::{Error, Result};
pub use scaling::{dc_count_law, fit_power_law, overshoot_law, tail_exponent, LawSample, ThresholdGrid};
pub use types::{
    relative_move, Agent, DissectionConfig, Event, EventKind, Mode, PricePoint, ReturnConvention, ScalingFit, Segment,
    SegmentKind, Tick,
};
