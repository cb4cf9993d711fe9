//! Event-driven demonstration agent.
//!
//! The agent holds a position `{entry price, gearing}` and reacts to the
//! dissection event stream with one of two fixed demo policies:
//!
//! * `Contrarian`: on an overshoot, trade one unit against the move (sell
//!   into up overshoots, buy into down overshoots).
//! * `TrendFollowing`: on an overshoot, trade one unit with the move.
//!
//! Both close the whole position on a directional change and cap the
//! gearing at `±max_gearing`. Pnl is in price units per unit of gearing,
//! without spread or costs.

use serde::Serialize;

use crate::dissect::Runner;
use crate::error::{Error, Result};
use crate::types::{Agent, DissectionConfig, Event, EventKind, Mode, PricePoint};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Policy {
    #[default]
    Contrarian,
    TrendFollowing,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AgentRules {
    unit_gearing: f64,
    max_gearing: f64,
    policy: Policy,
}

impl AgentRules {
    pub fn new(unit_gearing: f64, max_gearing: f64, policy: Policy) -> Result<Self> {
        if !(unit_gearing > 0.0 && unit_gearing.is_finite()) {
            return Err(Error::param(
                "unit_gearing",
                format!("must be positive, got {unit_gearing}"),
            ));
        }
        if !(max_gearing >= unit_gearing && max_gearing.is_finite()) {
            return Err(Error::param(
                "max_gearing",
                format!("must be at least unit_gearing {unit_gearing}, got {max_gearing}"),
            ));
        }
        Ok(Self {
            unit_gearing,
            max_gearing,
            policy,
        })
    }

    pub fn unit_gearing(&self) -> f64 {
        self.unit_gearing
    }

    pub fn max_gearing(&self) -> f64 {
        self.max_gearing
    }

    pub fn policy(&self) -> Policy {
        self.policy
    }
}

/// A change of gearing by `size` at `price`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Fill {
    pub intrinsic_index: u64,
    pub size: f64,
    pub price: f64,
}

/// Moves the position to `target` gearing at `price`.
///
/// Increases average the entry price by volume; reductions realize pnl
/// on the reduced part; a sign flip closes and reopens at `price`.
pub fn rebalance(agent: Agent, target: f64, price: f64) -> Agent {
    let g = agent.gearing;
    if target == g {
        return agent;
    }
    let mut next = agent;
    next.gearing = target;
    if g == 0.0 {
        next.entry_price = price;
    } else if target == 0.0 || target.signum() != g.signum() {
        next.realized_pnl += g * (price - agent.entry_price);
        next.entry_price = if target == 0.0 { 0.0 } else { price };
    } else if target.abs() > g.abs() {
        next.entry_price = (agent.entry_price * g + price * (target - g)) / target;
    } else {
        next.realized_pnl += (g - target) * (price - agent.entry_price);
    }
    next
}

/// Applies the rules to one event; returns the new position and the fill,
/// if the gearing changed.
pub fn on_event(agent: Agent, rules: &AgentRules, event: &Event) -> (Agent, Option<Fill>) {
    let g = agent.gearing;
    let unit = rules.unit_gearing;
    let target = match event.kind {
        EventKind::DirectionalChange => 0.0,
        EventKind::Overshoot => {
            let with_move = match event.mode {
                Mode::Up => unit,
                Mode::Down => -unit,
                Mode::Unset => 0.0,
            };
            let delta = match rules.policy {
                Policy::Contrarian => -with_move,
                Policy::TrendFollowing => with_move,
            };
            (g + delta).clamp(-rules.max_gearing, rules.max_gearing)
        }
    };
    if target == g {
        return (agent, None);
    }
    let fill = Fill {
        intrinsic_index: event.intrinsic_index,
        size: target - g,
        price: event.price,
    };
    (rebalance(agent, target, event.price), Some(fill))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TrajectoryRecord {
    pub intrinsic_index: u64,
    pub gearing: f64,
    pub entry_price: f64,
    /// Open pnl marked at the event price.
    pub unrealized: f64,
    pub realized: f64,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct AgentTrajectory {
    /// One record per processed event.
    pub records: Vec<TrajectoryRecord>,
    pub fills: Vec<Fill>,
    pub final_agent: Agent,
    /// Last price of the series, used to mark the final position.
    pub final_price: Option<f64>,
}

impl AgentTrajectory {
    pub fn realized(&self) -> f64 {
        self.final_agent.realized_pnl
    }

    pub fn unrealized(&self) -> f64 {
        self.final_price.map_or(0.0, |p| self.final_agent.unrealized_pnl(p))
    }

    pub fn total_pnl(&self) -> f64 {
        self.realized() + self.unrealized()
    }
}

/// Feeds `events` to a flat agent.
pub fn replay(events: &[Event], rules: &AgentRules) -> AgentTrajectory {
    let mut agent = Agent::flat();
    let mut out = AgentTrajectory::default();
    for e in events {
        let (next, fill) = on_event(agent, rules, e);
        agent = next;
        out.fills.extend(fill);
        out.records.push(TrajectoryRecord {
            intrinsic_index: e.intrinsic_index,
            gearing: agent.gearing,
            entry_price: agent.entry_price,
            unrealized: agent.unrealized_pnl(e.price),
            realized: agent.realized_pnl,
        });
    }
    out.final_agent = agent;
    out.final_price = events.last().map(|e| e.price);
    out
}

/// Dissects `series` and runs the agent over the resulting events.
pub fn run_strategy(series: &[PricePoint], config: DissectionConfig, rules: &AgentRules) -> Result<AgentTrajectory> {
    let mut runner = Runner::new(config);
    let mut events = Vec::new();
    for &p in series {
        events.extend(runner.step(p)?);
    }
    let mut out = replay(&events, rules);
    out.final_price = series.last().map(|p| p.price);
    Ok(out)
}
