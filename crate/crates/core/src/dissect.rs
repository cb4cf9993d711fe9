//! Directional-change and overshoot dissection.
//!
//! A [`Runner`] consumes prices one at a time and emits events on an
//! intrinsic clock that only ticks when the price moves by the configured
//! threshold:
//!
//! * Before the first event the runner is `Unset` and measures moves from
//!   the first price it saw. The first move that reaches the threshold in
//!   either direction is a directional change in that direction.
//! * In `Up` mode the runner tracks the running high. A fall from the high
//!   that reaches the threshold is a directional change to `Down`; the high
//!   closes the overshoot segment of the previous change, and the high is
//!   reset to the current price. `Down` mode is the mirror image.
//! * Within a mode, each further move of one threshold in the mode's
//!   direction, measured from the price of the last event, is an overshoot
//!   event.
//!
//! Triggers are inclusive and use the observed price; nothing is
//! interpolated. Because the next overshoot is measured from the observed
//! trigger price, one point emits at most one event.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::types::{DissectionConfig, Event, EventKind, Millis, Mode, PricePoint, Segment, SegmentKind};

/// Everything a single step produced.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct StepOutput {
    pub event: Option<Event>,
    /// Overshoot segment closed by a directional change. Absent for the
    /// first directional change.
    pub overshoot: Option<Segment>,
    /// Directional-change segment ending at the trigger price.
    pub directional_change: Option<Segment>,
}

/// Streaming dissection state for one threshold.
#[derive(Debug, Clone)]
pub struct Runner {
    config: DissectionConfig,
    mode: Mode,
    started: bool,
    // Running high in Up mode, running low in Down mode, first price while Unset.
    extremum: f64,
    extremum_time: Millis,
    last_dc_price: f64,
    last_dc_time: Millis,
    last_event_price: f64,
    last_time: Millis,
    points_seen: u64,
    counter: u64,
}

impl Runner {
    pub fn new(config: DissectionConfig) -> Self {
        Self {
            config,
            mode: Mode::Unset,
            started: false,
            extremum: f64::NAN,
            extremum_time: 0,
            last_dc_price: f64::NAN,
            last_dc_time: 0,
            last_event_price: f64::NAN,
            last_time: Millis::MIN,
            points_seen: 0,
            counter: 0,
        }
    }

    pub fn config(&self) -> &DissectionConfig {
        &self.config
    }

    pub fn mode(&self) -> Mode {
        self.mode
    }

    /// Number of events emitted so far, which is also the intrinsic index
    /// the next event will carry.
    pub fn intrinsic_counter(&self) -> u64 {
        self.counter
    }

    pub fn points_seen(&self) -> u64 {
        self.points_seen
    }

    /// Running high (Up) or low (Down) since the last directional change.
    pub fn extremum(&self) -> Option<f64> {
        (self.mode != Mode::Unset).then_some(self.extremum)
    }

    pub fn last_dc_price(&self) -> Option<f64> {
        (self.mode != Mode::Unset).then_some(self.last_dc_price)
    }

    pub fn last_event_price(&self) -> Option<f64> {
        (self.mode != Mode::Unset).then_some(self.last_event_price)
    }

    /// The overshoot in progress: from the last directional change to the
    /// current extremum.
    pub fn open_overshoot(&self) -> Option<Segment> {
        (self.mode != Mode::Unset).then(|| self.overshoot_segment())
    }

    /// Feeds one point and returns the event it triggered, if any.
    #[inline]
    pub fn step(&mut self, point: PricePoint) -> Result<Option<Event>> {
        self.step_full(point).map(|out| out.event)
    }

    /// Like [`Runner::step`], also returning the segments a directional
    /// change closes.
    #[inline]
    pub fn step_full(&mut self, point: PricePoint) -> Result<StepOutput> {
        let PricePoint { time, price } = point;
        if time < self.last_time {
            return Err(Error::TimeRegression {
                previous: self.last_time,
                current: time,
            });
        }
        if !(price > 0.0 && price.is_finite()) {
            return Err(Error::NonPositivePrice(price));
        }
        self.last_time = time;
        let tick_index = self.points_seen;
        self.points_seen += 1;

        let out = match self.mode {
            Mode::Up => {
                if price > self.extremum {
                    self.extremum = price;
                    self.extremum_time = time;
                }
                if price >= self.config.up_level(self.last_event_price) {
                    self.overshoot_event(Mode::Up, time, price, tick_index)
                } else if price <= self.config.down_level(self.extremum) {
                    self.directional_change(Mode::Down, time, price, tick_index)
                } else {
                    StepOutput::default()
                }
            }
            Mode::Down => {
                if price < self.extremum {
                    self.extremum = price;
                    self.extremum_time = time;
                }
                if price <= self.config.down_level(self.last_event_price) {
                    self.overshoot_event(Mode::Down, time, price, tick_index)
                } else if price >= self.config.up_level(self.extremum) {
                    self.directional_change(Mode::Up, time, price, tick_index)
                } else {
                    StepOutput::default()
                }
            }
            Mode::Unset => {
                if !self.started {
                    self.started = true;
                    self.extremum = price;
                    self.extremum_time = time;
                    StepOutput::default()
                } else if price >= self.config.up_level(self.extremum) {
                    self.directional_change(Mode::Up, time, price, tick_index)
                } else if price <= self.config.down_level(self.extremum) {
                    self.directional_change(Mode::Down, time, price, tick_index)
                } else {
                    StepOutput::default()
                }
            }
        };
        Ok(out)
    }

    fn next_event(&mut self, kind: EventKind, mode: Mode, time: Millis, price: f64, tick_index: u64) -> Event {
        let event = Event {
            intrinsic_index: self.counter,
            kind,
            mode,
            time,
            price,
            tick_index,
        };
        self.counter += 1;
        self.last_event_price = price;
        event
    }

    fn overshoot_event(&mut self, mode: Mode, time: Millis, price: f64, tick_index: u64) -> StepOutput {
        StepOutput {
            event: Some(self.next_event(EventKind::Overshoot, mode, time, price, tick_index)),
            ..StepOutput::default()
        }
    }

    fn overshoot_segment(&self) -> Segment {
        Segment {
            kind: SegmentKind::Overshoot,
            start_price: self.last_dc_price,
            end_price: self.extremum,
            start_time: self.last_dc_time,
            end_time: self.extremum_time,
            magnitude: self.config.magnitude(self.last_dc_price, self.extremum),
        }
    }

    fn directional_change(&mut self, mode: Mode, time: Millis, price: f64, tick_index: u64) -> StepOutput {
        let overshoot = (self.mode != Mode::Unset).then(|| self.overshoot_segment());
        let directional_change = Segment {
            kind: SegmentKind::DirectionalChange,
            start_price: self.extremum,
            end_price: price,
            start_time: self.extremum_time,
            end_time: time,
            magnitude: self.config.magnitude(self.extremum, price),
        };
        self.mode = mode;
        self.extremum = price;
        self.extremum_time = time;
        self.last_dc_price = price;
        self.last_dc_time = time;
        let event = self.next_event(EventKind::DirectionalChange, mode, time, price, tick_index);
        StepOutput {
            event: Some(event),
            overshoot,
            directional_change: Some(directional_change),
        }
    }
}

/// Batch dissection of a whole series.
#[derive(Debug, Clone, PartialEq)]
pub struct Dissection {
    pub config: DissectionConfig,
    pub events: Vec<Event>,
    /// Closed segments in price order: the first directional change's
    /// segment, then alternating overshoot / directional-change segments.
    pub segments: Vec<Segment>,
    /// Overshoot still in progress at the end of the series.
    pub open_overshoot: Option<Segment>,
}

impl Dissection {
    pub fn dc_count(&self) -> usize {
        self.events.iter().filter(|e| e.is_directional_change()).count()
    }

    pub fn closed_overshoots(&self) -> impl Iterator<Item = &Segment> {
        self.segments.iter().filter(|s| s.kind == SegmentKind::Overshoot)
    }
}

pub fn dissect(series: &[PricePoint], config: DissectionConfig) -> Result<Dissection> {
    let mut runner = Runner::new(config);
    let mut events = Vec::new();
    let mut segments = Vec::new();
    for &point in series {
        let out = runner.step_full(point)?;
        if let Some(e) = out.event {
            events.push(e);
        }
        segments.extend(out.overshoot);
        segments.extend(out.directional_change);
    }
    Ok(Dissection {
        config,
        events,
        segments,
        open_overshoot: runner.open_overshoot(),
    })
}

/// Event counts and overshoot totals without materializing the events.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct DissectionSummary {
    pub dc_count: usize,
    pub os_count: usize,
    pub closed_overshoots: usize,
    pub overshoot_sum: f64,
}

impl DissectionSummary {
    /// Mean magnitude of the closed overshoot segments.
    pub fn avg_overshoot(&self) -> Option<f64> {
        (self.closed_overshoots > 0).then(|| self.overshoot_sum / self.closed_overshoots as f64)
    }
}

pub fn summarize(series: &[PricePoint], config: DissectionConfig) -> Result<DissectionSummary> {
    let mut runner = Runner::new(config);
    let mut s = DissectionSummary::default();
    for &point in series {
        let out = runner.step_full(point)?;
        match out.event {
            Some(e) if e.kind == EventKind::DirectionalChange => s.dc_count += 1,
            Some(_) => s.os_count += 1,
            None => {}
        }
        if let Some(os) = out.overshoot {
            s.closed_overshoots += 1;
            s.overshoot_sum += os.magnitude;
        }
    }
    Ok(s)
}

pub fn count_dc(series: &[PricePoint], config: DissectionConfig) -> Result<usize> {
    summarize(series, config).map(|s| s.dc_count)
}

/// Mean `|Δx_os|` over closed overshoot segments; the trailing open one
/// is excluded.
pub fn avg_overshoot(series: &[PricePoint], config: DissectionConfig) -> Result<f64> {
    summarize(series, config)?.avg_overshoot().ok_or_else(|| {
        Error::InsufficientEvents(format!(
            "no closed overshoot segment at threshold {}",
            config.threshold()
        ))
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CoastPoint {
    pub intrinsic_index: u64,
    pub price: f64,
}

/// Event prices indexed by intrinsic time only.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Coastline {
    pub points: Vec<CoastPoint>,
    /// Sum of closed segment magnitudes.
    pub total_length: f64,
}

pub fn coastline(d: &Dissection) -> Coastline {
    Coastline {
        points: d
            .events
            .iter()
            .map(|e| CoastPoint {
                intrinsic_index: e.intrinsic_index,
                price: e.price,
            })
            .collect(),
        total_length: d.segments.iter().map(|s| s.magnitude).sum(),
    }
}
