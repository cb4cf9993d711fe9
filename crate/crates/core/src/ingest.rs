//! CSV tick ingestion.
//!
//! The canonical input is UTF-8 CSV with a `time,bid,ask` or `time,price`
//! header. The header is optional: when the first row starts with a
//! parseable timestamp it is treated as data and the layout is inferred
//! from the column count. Time may be ISO-8601 or integer epoch
//! milliseconds. Errors carry 1-based line numbers.

use std::fs::File;
use std::io::{BufReader, Read, Write};
use std::path::Path;

use chrono::{DateTime, NaiveDateTime};

use crate::error::{Error, Result};
use crate::types::{check_price, Millis, PricePoint, Tick};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Layout {
    /// `time,bid,ask`
    BidAsk,
    /// `time,price`; parsed into ticks with `bid == ask`.
    Price,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub enum HeaderMode {
    #[default]
    Auto,
    Present,
    Absent,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub enum PriceSide {
    Bid,
    Ask,
    #[default]
    Mid,
}

/// Column layout, delimiter and filtering for a tick file.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TickFormat {
    pub delimiter: u8,
    pub header: HeaderMode,
    /// `None` infers the layout from the header or column count.
    pub layout: Option<Layout>,
    /// Drop ticks whose relative spread `(ask - bid) / mid` exceeds this.
    pub max_spread: Option<f64>,
}

impl Default for TickFormat {
    fn default() -> Self {
        Self {
            delimiter: b',',
            header: HeaderMode::Auto,
            layout: None,
            max_spread: None,
        }
    }
}

pub struct TickSource<R> {
    reader: R,
    format: TickFormat,
}

impl TickSource<BufReader<File>> {
    pub fn open(path: impl AsRef<Path>, format: TickFormat) -> Result<Self> {
        let file = File::open(path)?;
        Ok(Self::from_reader(BufReader::new(file), format))
    }
}

impl<R: Read> TickSource<R> {
    pub fn from_reader(reader: R, format: TickFormat) -> Self {
        Self { reader, format }
    }
}

/// Parses a timestamp given as epoch milliseconds or ISO-8601.
///
/// ISO values without an offset are taken as UTC. Sub-millisecond digits
/// are truncated.
pub fn parse_timestamp(s: &str) -> Option<Millis> {
    let s = s.trim();
    if s.is_empty() {
        return None;
    }
    let digits = s.strip_prefix('-').unwrap_or(s);
    if digits.bytes().all(|b| b.is_ascii_digit()) {
        return s.parse().ok();
    }
    if let Ok(dt) = DateTime::parse_from_rfc3339(s) {
        return Some(dt.timestamp_millis());
    }
    const NAIVE: [&str; 2] = ["%Y-%m-%dT%H:%M:%S%.f", "%Y-%m-%d %H:%M:%S%.f"];
    NAIVE
        .iter()
        .find_map(|f| NaiveDateTime::parse_from_str(s, f).ok())
        .map(|dt| dt.and_utc().timestamp_millis())
}

struct Columns {
    time: usize,
    first: usize,
    second: Option<usize>,
    layout: Layout,
}

impl Columns {
    fn from_header(record: &csv::StringRecord, line: u64) -> Result<Self> {
        let find = |names: &[&str]| {
            record
                .iter()
                .position(|f| names.iter().any(|n| f.eq_ignore_ascii_case(n)))
        };
        let time = find(&["time", "timestamp"]).ok_or_else(|| Error::Malformed {
            line,
            reason: "header has no `time` column".into(),
        })?;
        match (find(&["bid"]), find(&["ask"]), find(&["price", "mid"])) {
            (Some(bid), Some(ask), _) => Ok(Self {
                time,
                first: bid,
                second: Some(ask),
                layout: Layout::BidAsk,
            }),
            (_, _, Some(price)) => Ok(Self {
                time,
                first: price,
                second: None,
                layout: Layout::Price,
            }),
            _ => Err(Error::Malformed {
                line,
                reason: "header must name `bid,ask` or `price` columns".into(),
            }),
        }
    }

    fn positional(layout: Layout) -> Self {
        match layout {
            Layout::BidAsk => Self {
                time: 0,
                first: 1,
                second: Some(2),
                layout,
            },
            Layout::Price => Self {
                time: 0,
                first: 1,
                second: None,
                layout,
            },
        }
    }

    fn width(&self) -> usize {
        1 + self.time.max(self.first).max(self.second.unwrap_or(0))
    }
}

fn field_price(record: &csv::StringRecord, idx: usize, line: u64, name: &str) -> Result<f64> {
    let raw = record.get(idx).unwrap_or("");
    let value: f64 = raw.parse().map_err(|_| Error::Malformed {
        line,
        reason: format!("cannot parse {name} `{raw}`"),
    })?;
    check_price(value).map_err(|_| Error::Malformed {
        line,
        reason: format!("{name} must be positive, got `{raw}`"),
    })
}

/// Reads all ticks in file order, validating prices and time order.
///
/// Equal timestamps are accepted; a strict decrease is an error.
pub fn parse_ticks<R: Read>(source: TickSource<R>) -> Result<Vec<Tick>> {
    let TickSource { reader, format } = source;
    let mut rdr = csv::ReaderBuilder::new()
        .delimiter(format.delimiter)
        .has_headers(false)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(reader);

    let mut columns: Option<Columns> = None;
    let mut ticks = Vec::new();
    let mut previous: Option<Millis> = None;
    let mut record = csv::StringRecord::new();

    while rdr.read_record(&mut record)? {
        let line = record.position().map_or(0, |p| p.line());
        if record.iter().all(str::is_empty) {
            continue;
        }
        let cols = match columns {
            Some(ref c) => c,
            None => {
                let first = record.get(0).unwrap_or("");
                let is_header = match format.header {
                    HeaderMode::Present => true,
                    HeaderMode::Absent => false,
                    HeaderMode::Auto => parse_timestamp(first).is_none(),
                };
                if is_header {
                    let c = Columns::from_header(&record, line)?;
                    if let Some(layout) = format.layout {
                        if layout != c.layout {
                            return Err(Error::Malformed {
                                line,
                                reason: format!("header does not match layout {layout:?}"),
                            });
                        }
                    }
                    columns = Some(c);
                    continue;
                }
                let layout = format.layout.unwrap_or(if record.len() >= 3 {
                    Layout::BidAsk
                } else {
                    Layout::Price
                });
                columns.insert(Columns::positional(layout))
            }
        };

        if record.len() < cols.width() {
            return Err(Error::Malformed {
                line,
                reason: format!("expected at least {} fields, found {}", cols.width(), record.len()),
            });
        }
        let raw_time = record.get(cols.time).unwrap_or("");
        let time = parse_timestamp(raw_time).ok_or_else(|| Error::Malformed {
            line,
            reason: format!("cannot parse time `{raw_time}`"),
        })?;
        let tick = match cols.layout {
            Layout::BidAsk => {
                let bid = field_price(&record, cols.first, line, "bid")?;
                let ask = field_price(&record, cols.second.unwrap_or(2), line, "ask")?;
                if ask < bid {
                    return Err(Error::Malformed {
                        line,
                        reason: format!("ask {ask} below bid {bid}"),
                    });
                }
                Tick { time, bid, ask }
            }
            Layout::Price => {
                let price = field_price(&record, cols.first, line, "price")?;
                Tick {
                    time,
                    bid: price,
                    ask: price,
                }
            }
        };
        if let Some(prev) = previous {
            if time < prev {
                return Err(Error::TimeRegressionAt {
                    line,
                    previous: prev,
                    current: time,
                });
            }
        }
        previous = Some(time);
        if let Some(bound) = format.max_spread {
            if tick.relative_spread() > bound {
                continue;
            }
        }
        ticks.push(tick);
    }
    Ok(ticks)
}

pub fn mid_price(tick: &Tick) -> PricePoint {
    PricePoint {
        time: tick.time,
        price: tick.mid(),
    }
}

/// Mid-price series, one point per tick.
pub fn to_price_series(ticks: &[Tick]) -> Vec<PricePoint> {
    ticks.iter().map(mid_price).collect()
}

pub fn price_series(ticks: &[Tick], side: PriceSide) -> Vec<PricePoint> {
    match side {
        PriceSide::Mid => to_price_series(ticks),
        PriceSide::Bid => ticks
            .iter()
            .map(|t| PricePoint {
                time: t.time,
                price: t.bid,
            })
            .collect(),
        PriceSide::Ask => ticks
            .iter()
            .map(|t| PricePoint {
                time: t.time,
                price: t.ask,
            })
            .collect(),
    }
}

/// Writes `time,bid,ask` CSV with epoch-millisecond times.
pub fn write_ticks<W: Write>(out: W, ticks: &[Tick]) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["time", "bid", "ask"])?;
    for t in ticks {
        w.write_record([t.time.to_string(), t.bid.to_string(), t.ask.to_string()])?;
    }
    w.flush()?;
    Ok(())
}

/// Writes `time,price` CSV with epoch-millisecond times.
pub fn write_prices<W: Write>(out: W, points: &[PricePoint]) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["time", "price"])?;
    for p in points {
        w.write_record([p.time.to_string(), p.price.to_string()])?;
    }
    w.flush()?;
    Ok(())
}

/// Reads a single-column CSV of positive reals, with or without a header.
pub fn parse_values<R: Read>(reader: R) -> Result<Vec<f64>> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(reader);
    let mut values = Vec::new();
    let mut record = csv::StringRecord::new();
    let mut first = true;
    while rdr.read_record(&mut record)? {
        let line = record.position().map_or(0, |p| p.line());
        let raw = record.get(0).unwrap_or("");
        if raw.is_empty() {
            continue;
        }
        match raw.parse::<f64>() {
            Ok(v) => values.push(check_price(v).map_err(|_| Error::Malformed {
                line,
                reason: format!("value must be positive, got `{raw}`"),
            })?),
            Err(_) if first => {}
            Err(_) => {
                return Err(Error::Malformed {
                    line,
                    reason: format!("cannot parse value `{raw}`"),
                })
            }
        }
        first = false;
    }
    Ok(values)
}

pub fn write_values<W: Write>(out: W, values: &[f64]) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["value"])?;
    for v in values {
        w.write_record([v.to_string()])?;
    }
    w.flush()?;
    Ok(())
}
