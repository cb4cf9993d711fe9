//! Value types shared by every stage of the pipeline.
//!
//! Timestamps are integer epoch milliseconds (UTC) and prices are strictly
//! positive `f64`s. All types here are plain `Copy`/`Clone` values.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Epoch milliseconds, UTC.
pub type Millis = i64;

#[inline]
pub(crate) fn check_price(price: f64) -> Result<f64> {
    if price > 0.0 && price.is_finite() {
        Ok(price)
    } else {
        Err(Error::NonPositivePrice(price))
    }
}

/// A two-sided quote.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Tick {
    pub time: Millis,
    pub bid: f64,
    pub ask: f64,
}

impl Tick {
    pub fn new(time: Millis, bid: f64, ask: f64) -> Result<Self> {
        check_price(bid)?;
        check_price(ask)?;
        if ask < bid {
            return Err(Error::param("ask", format!("ask {ask} below bid {bid}")));
        }
        Ok(Self { time, bid, ask })
    }

    #[inline]
    pub fn mid(&self) -> f64 {
        (self.bid + self.ask) / 2.0
    }

    /// Relative spread `(ask - bid) / mid`.
    #[inline]
    pub fn relative_spread(&self) -> f64 {
        (self.ask - self.bid) / self.mid()
    }
}

/// A single-price sample, the input of the dissector.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PricePoint {
    pub time: Millis,
    pub price: f64,
}

impl PricePoint {
    pub fn new(time: Millis, price: f64) -> Result<Self> {
        Ok(Self {
            time,
            price: check_price(price)?,
        })
    }
}

/// Direction of the runner, or of an event once emitted.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    Up,
    Down,
    Unset,
}

impl Mode {
    pub fn opposite(self) -> Self {
        match self {
            Mode::Up => Mode::Down,
            Mode::Down => Mode::Up,
            Mode::Unset => Mode::Unset,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Mode::Up => "up",
            Mode::Down => "down",
            Mode::Unset => "unset",
        }
    }
}

/// How a price move is turned into a dimensionless fraction.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ReturnConvention {
    /// `(to - from) / from`
    #[default]
    Fractional,
    /// `ln(to / from)`
    Logarithmic,
}

/// Signed relative move from `from` to `to` under `convention`.
pub fn relative_move(from: f64, to: f64, convention: ReturnConvention) -> Result<f64> {
    check_price(from)?;
    check_price(to)?;
    Ok(relative_move_unchecked(from, to, convention))
}

#[inline]
pub(crate) fn relative_move_unchecked(from: f64, to: f64, convention: ReturnConvention) -> f64 {
    match convention {
        ReturnConvention::Fractional => (to - from) / from,
        ReturnConvention::Logarithmic => (to / from).ln(),
    }
}

/// Threshold and return convention for one dissection.
///
/// A move from a reference price `r` reaches the threshold upwards when the
/// price is at or above `r * up_factor`, and downwards when at or below
/// `r * down_factor`. For the fractional convention the factors are `1 ± h`,
/// for the logarithmic one `exp(±h)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DissectionConfig {
    threshold: f64,
    convention: ReturnConvention,
    #[serde(skip)]
    up_factor: f64,
    #[serde(skip)]
    down_factor: f64,
}

impl DissectionConfig {
    pub fn new(threshold: f64, convention: ReturnConvention) -> Result<Self> {
        if !(threshold > 0.0 && threshold < 1.0) {
            return Err(Error::InvalidThreshold(threshold));
        }
        let (up_factor, down_factor) = match convention {
            ReturnConvention::Fractional => (1.0 + threshold, 1.0 - threshold),
            ReturnConvention::Logarithmic => (threshold.exp(), (-threshold).exp()),
        };
        Ok(Self {
            threshold,
            convention,
            up_factor,
            down_factor,
        })
    }

    /// Fractional-convention config, the default.
    pub fn fractional(threshold: f64) -> Result<Self> {
        Self::new(threshold, ReturnConvention::Fractional)
    }

    pub fn threshold(&self) -> f64 {
        self.threshold
    }

    pub fn convention(&self) -> ReturnConvention {
        self.convention
    }

    /// Price at or above which a move up from `reference` reaches the threshold.
    #[inline]
    pub fn up_level(&self, reference: f64) -> f64 {
        reference * self.up_factor
    }

    /// Price at or below which a move down from `reference` reaches the threshold.
    #[inline]
    pub fn down_level(&self, reference: f64) -> f64 {
        reference * self.down_factor
    }

    #[inline]
    pub fn magnitude(&self, from: f64, to: f64) -> f64 {
        relative_move_unchecked(from, to, self.convention).abs()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EventKind {
    DirectionalChange,
    Overshoot,
}

impl EventKind {
    pub fn as_str(self) -> &'static str {
        match self {
            EventKind::DirectionalChange => "directional_change",
            EventKind::Overshoot => "overshoot",
        }
    }
}

/// A directional-change or overshoot occurrence.
///
/// `mode` is the direction of the market after the event. `intrinsic_index`
/// is the event clock: it advances by one per emitted event and is
/// independent of `time`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Event {
    pub intrinsic_index: u64,
    pub kind: EventKind,
    pub mode: Mode,
    pub time: Millis,
    pub price: f64,
    pub tick_index: u64,
}

impl Event {
    pub fn is_directional_change(&self) -> bool {
        self.kind == EventKind::DirectionalChange
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SegmentKind {
    DirectionalChange,
    Overshoot,
}

/// Price interval between an extremum and a directional-change trigger
/// (directional-change segment) or between a trigger and the following
/// extremum (overshoot segment).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Segment {
    pub kind: SegmentKind,
    pub start_price: f64,
    pub end_price: f64,
    pub start_time: Millis,
    pub end_time: Millis,
    pub magnitude: f64,
}

/// Fitted power law `y = (x / c)^exponent`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScalingFit {
    #[serde(rename = "C")]
    pub c: f64,
    #[serde(rename = "E")]
    pub exponent: f64,
    /// Intercept of the log-log regression line, `ln y = intercept + E ln x`.
    pub intercept: f64,
    pub r_squared: f64,
    pub n_points: usize,
}

impl ScalingFit {
    pub fn predict(&self, x: f64) -> f64 {
        (x / self.c).powf(self.exponent)
    }
}

/// Position `{entry price, gearing}` plus realized pnl.
///
/// `entry_price` is the volume-weighted average fill price of the open
/// position and is zero when flat. The sign of `gearing` is the direction.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct Agent {
    pub entry_price: f64,
    pub gearing: f64,
    pub realized_pnl: f64,
}

impl Agent {
    pub fn flat() -> Self {
        Self::default()
    }

    pub fn is_flat(&self) -> bool {
        self.gearing == 0.0
    }

    /// Open pnl of the position marked at `price`.
    pub fn unrealized_pnl(&self, price: f64) -> f64 {
        if self.is_flat() {
            0.0
        } else {
            self.gearing * (price - self.entry_price)
        }
    }
}
