//! Test-only oracles, written without reference to the library's runner.
#![allow(dead_code)]

use coastline::{Event, EventKind, Mode, PricePoint, ReturnConvention};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Plain scan over a price slice, one pass, direction kept as +1 / -1.
pub struct Reference {
    pub events: Vec<Event>,
    /// (is_overshoot, magnitude) per closed segment in order.
    pub segments: Vec<(bool, f64)>,
}

fn crosses(price: f64, reference: f64, dir: i32, h: f64, conv: ReturnConvention) -> bool {
    let factor = match (conv, dir > 0) {
        (ReturnConvention::Fractional, true) => 1.0 + h,
        (ReturnConvention::Fractional, false) => 1.0 - h,
        (ReturnConvention::Logarithmic, true) => h.exp(),
        (ReturnConvention::Logarithmic, false) => (-h).exp(),
    };
    if dir > 0 {
        price >= reference * factor
    } else {
        price <= reference * factor
    }
}

fn mag(a: f64, b: f64, conv: ReturnConvention) -> f64 {
    match conv {
        ReturnConvention::Fractional => ((b - a) / a).abs(),
        ReturnConvention::Logarithmic => (b / a).ln().abs(),
    }
}

fn mode_of(dir: i32) -> Mode {
    if dir > 0 {
        Mode::Up
    } else {
        Mode::Down
    }
}

pub fn reference(series: &[PricePoint], h: f64, conv: ReturnConvention) -> Reference {
    let mut events = Vec::new();
    let mut segments = Vec::new();
    if series.is_empty() {
        return Reference { events, segments };
    }
    let push = |events: &mut Vec<Event>, kind, dir: i32, i: usize| {
        let n = events.len() as u64;
        events.push(Event {
            intrinsic_index: n,
            kind,
            mode: mode_of(dir),
            time: series[i].time,
            price: series[i].price,
            tick_index: i as u64,
        });
    };

    // first crossing from the opening price
    let open = series[0].price;
    let mut i = 1;
    let mut dir = 0;
    while i < series.len() {
        let p = series[i].price;
        if crosses(p, open, 1, h, conv) {
            dir = 1;
        } else if crosses(p, open, -1, h, conv) {
            dir = -1;
        }
        if dir != 0 {
            break;
        }
        i += 1;
    }
    if dir == 0 {
        return Reference { events, segments };
    }
    push(&mut events, EventKind::DirectionalChange, dir, i);
    segments.push((false, mag(open, series[i].price, conv)));

    let mut dc_price = series[i].price;
    let mut ext = dc_price;
    let mut anchor = dc_price;
    for (j, pt) in series.iter().enumerate().skip(i + 1) {
        let p = pt.price;
        if (dir > 0 && p > ext) || (dir < 0 && p < ext) {
            ext = p;
        }
        if crosses(p, anchor, dir, h, conv) {
            push(&mut events, EventKind::Overshoot, dir, j);
            anchor = p;
        } else if crosses(p, ext, -dir, h, conv) {
            segments.push((true, mag(dc_price, ext, conv)));
            segments.push((false, mag(ext, p, conv)));
            dir = -dir;
            push(&mut events, EventKind::DirectionalChange, dir, j);
            dc_price = p;
            ext = p;
            anchor = p;
        }
    }
    Reference { events, segments }
}

pub fn points(prices: &[f64]) -> Vec<PricePoint> {
    prices
        .iter()
        .enumerate()
        .map(|(i, &price)| PricePoint {
            time: i as i64 * 1000,
            price,
        })
        .collect()
}

/// Multiplicative random walk with uniform log-returns, a simple generator
/// independent of the library's synth module.
pub fn random_series(seed: u64, n: usize, vol: f64) -> Vec<PricePoint> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut p = 1.0 + rng.random::<f64>();
    let mut t = 0i64;
    (0..n)
        .map(|_| {
            let pt = PricePoint { time: t, price: p };
            // occasional duplicate timestamps and repeated prices
            t += rng.random_range(0..3);
            if rng.random::<f64>() > 0.1 {
                p *= (vol * (2.0 * rng.random::<f64>() - 1.0)).exp();
            }
            pt
        })
        .collect()
}

/// Arbitrary event stream; the agent does not care whether it came from a
/// consistent dissection.
pub fn random_events(seed: u64, n: usize) -> Vec<Event> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut price = 100.0;
    (0..n)
        .map(|i| {
            price *= 1.0 + rng.random_range(-0.02..0.02);
            Event {
                intrinsic_index: i as u64,
                kind: if rng.random_bool(0.3) {
                    EventKind::DirectionalChange
                } else {
                    EventKind::Overshoot
                },
                mode: if rng.random_bool(0.5) { Mode::Up } else { Mode::Down },
                time: i as i64,
                price,
                tick_index: i as u64,
            }
        })
        .collect()
}

/// Sum of `size * (mark - price)` over fills.
pub fn ledger_pnl(fills: &[(f64, f64)], mark: f64) -> f64 {
    fills.iter().map(|&(size, price)| size * (mark - price)).sum()
}

/// Least-squares slope of `ln y` on `ln x`.
pub fn loglog_slope(xs: &[f64], ys: &[f64]) -> f64 {
    let n = xs.len() as f64;
    let lx: Vec<f64> = xs.iter().map(|x| x.ln()).collect();
    let ly: Vec<f64> = ys.iter().map(|y| y.ln()).collect();
    let mx = lx.iter().sum::<f64>() / n;
    let my = ly.iter().sum::<f64>() / n;
    let num: f64 = lx.iter().zip(&ly).map(|(x, y)| (x - mx) * (y - my)).sum();
    let den: f64 = lx.iter().map(|x| (x - mx).powi(2)).sum();
    num / den
}
