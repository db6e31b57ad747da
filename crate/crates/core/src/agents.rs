//! Miner agents: economic entry and exit with hysteresis, and the
//! proof-of-mining participation credit.

use alloc::collections::VecDeque;
use alloc::string::String;
use alloc::vec::Vec;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// How an agent chooses whether to mine.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum Behavior {
    /// Enters and leaves by comparing expected revenue with running cost.
    #[default]
    Economic,
    /// Mines every block regardless of profitability.
    AlwaysOn,
    /// Mines `on` blocks, then pauses `off` blocks, starting `phase` blocks
    /// into the cycle.
    DutyCycle {
        on: u32,
        off: u32,
        #[serde(default)]
        phase: u32,
    },
}

impl Behavior {
    /// Whether a scripted agent mines at `height`; `None` for economic agents.
    pub fn scripted_activity(&self, height: u64) -> Option<bool> {
        match *self {
            Behavior::Economic => None,
            Behavior::AlwaysOn => Some(true),
            Behavior::DutyCycle { on, off, phase } => {
                let period = u64::from(on) + u64::from(off);
                Some((height + u64::from(phase)) % period < u64::from(on))
            }
        }
    }

    pub fn validate(&self) -> Result<()> {
        if let Behavior::DutyCycle { on, off, .. } = *self {
            if on == 0 || off == 0 {
                return Err(Error::InvalidParam {
                    field: "duty_cycle",
                    reason: "on and off must both be at least one block",
                });
            }
        }
        Ok(())
    }
}

/// Activity flags of the most recent blocks, oldest first.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ActivityWindow {
    flags: VecDeque<bool>,
    capacity: usize,
    active: usize,
}

impl ActivityWindow {
    pub fn new(capacity: usize) -> Self {
        Self {
            flags: VecDeque::with_capacity(capacity),
            capacity,
            active: 0,
        }
    }

    pub fn push(&mut self, active: bool) {
        if self.capacity == 0 {
            return;
        }
        if self.flags.len() == self.capacity && self.flags.pop_front() == Some(true) {
            self.active -= 1;
        }
        self.flags.push_back(active);
        if active {
            self.active += 1;
        }
    }

    /// Flag of the most recent block.
    pub fn last(&self) -> Option<bool> {
        self.flags.back().copied()
    }

    pub fn active_blocks(&self) -> usize {
        self.active
    }

    pub fn len(&self) -> usize {
        self.flags.len()
    }

    pub fn is_empty(&self) -> bool {
        self.flags.is_empty()
    }

    pub fn capacity(&self) -> usize {
        self.capacity
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct MinerAgent {
    pub id: u32,
    /// Index of the population class the agent was drawn from.
    pub class: usize,
    /// MH/s.
    pub hashrate: f64,
    /// Currency per MH/s per hour.
    pub unit_cost: f64,
    pub active: bool,
    /// Blocks left before the agent may flip state again.
    pub dwell_remaining: u32,
    pub history: ActivityWindow,
    pub behavior: Behavior,
}

impl MinerAgent {
    pub fn new(id: u32, hashrate: f64, unit_cost: f64, window: usize) -> Result<Self> {
        if !(hashrate > 0.0 && hashrate.is_finite()) {
            return Err(Error::InvalidParam {
                field: "hashrate",
                reason: "must be positive and finite",
            });
        }
        if !(unit_cost >= 0.0 && unit_cost.is_finite()) {
            return Err(Error::InvalidParam {
                field: "unit_cost",
                reason: "must be nonnegative and finite",
            });
        }
        Ok(Self {
            id,
            class: 0,
            hashrate,
            unit_cost,
            active: true,
            dwell_remaining: 0,
            history: ActivityWindow::new(window),
            behavior: Behavior::Economic,
        })
    }

    /// Running cost in currency per hour.
    pub fn cost_rate(&self) -> f64 {
        self.unit_cost * self.hashrate
    }
}

/// Hysteresis band and minimum dwell time of the entry/exit rule.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Hysteresis {
    pub margin_on: f64,
    pub margin_off: f64,
    /// Blocks.
    pub dwell: u32,
}

impl Default for Hysteresis {
    fn default() -> Self {
        Self {
            margin_on: 1.1,
            margin_off: 0.9,
            dwell: 10,
        }
    }
}

impl Hysteresis {
    pub fn new(margin_on: f64, margin_off: f64, dwell: u32) -> Result<Self> {
        let h = Self {
            margin_on,
            margin_off,
            dwell,
        };
        h.validate()?;
        Ok(h)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.margin_on >= 1.0 && self.margin_on.is_finite()) {
            return Err(Error::InvalidParam {
                field: "margin_on",
                reason: "must be finite and at least 1",
            });
        }
        if !(self.margin_off > 0.0 && self.margin_off <= 1.0) {
            return Err(Error::InvalidParam {
                field: "margin_off",
                reason: "must lie in (0, 1]",
            });
        }
        Ok(())
    }
}

/// Participation requirement: `required` active blocks out of the last
/// `window` earn full credit.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "PomRecord", into = "PomRecord")]
pub struct PomCredit {
    window: u32,
    required: u32,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct PomRecord {
    window: u32,
    required: u32,
}

impl TryFrom<PomRecord> for PomCredit {
    type Error = Error;

    fn try_from(r: PomRecord) -> Result<Self> {
        Self::new(r.window, r.required)
    }
}

impl From<PomCredit> for PomRecord {
    fn from(c: PomCredit) -> Self {
        Self {
            window: c.window,
            required: c.required,
        }
    }
}

impl PomCredit {
    pub fn new(window: u32, required: u32) -> Result<Self> {
        if window == 0 {
            return Err(Error::InvalidParam {
                field: "window",
                reason: "must be positive",
            });
        }
        if required == 0 || required > window {
            return Err(Error::InvalidParam {
                field: "required",
                reason: "must lie in 1..=window",
            });
        }
        Ok(Self { window, required })
    }

    pub fn window(&self) -> u32 {
        self.window
    }

    pub fn required(&self) -> u32 {
        self.required
    }
}

impl Default for PomCredit {
    fn default() -> Self {
        Self {
            window: 100,
            required: 80,
        }
    }
}

/// Expected income in currency per hour for a miner holding a
/// `hashrate / total_hash` share of the network.
pub fn expected_revenue_rate(
    m: &MinerAgent,
    total_hash: f64,
    block_reward: f64,
    price: f64,
    target_interval: f64,
) -> Result<f64> {
    if !(total_hash > 0.0) {
        return Err(Error::Internal(
            "total hashrate is zero while pricing a miner",
        ));
    }
    if !(target_interval > 0.0) {
        return Err(Error::Domain("target interval must be positive"));
    }
    if !(block_reward >= 0.0) || !(price >= 0.0) {
        return Err(Error::Domain("reward and price must be nonnegative"));
    }
    let blocks_per_hour = 3600.0 / target_interval;
    Ok(m.hashrate / total_hash * block_reward * price * blocks_per_hour)
}

/// Applies the entry/exit rule once.
///
/// While `dwell_remaining` is positive the agent keeps its state and the
/// counter ticks down. Otherwise an idle agent starts when revenue reaches
/// `margin_on` times cost and an active one stops when revenue falls below
/// `margin_off` times cost. Any flip restarts the dwell counter.
pub fn decide(mut m: MinerAgent, revenue_rate: f64, h: &Hysteresis) -> MinerAgent {
    m.apply_decision(revenue_rate, h);
    m
}

impl MinerAgent {
    /// In-place form of [`decide`].
    pub fn apply_decision(&mut self, revenue_rate: f64, h: &Hysteresis) {
        if self.dwell_remaining > 0 {
            self.dwell_remaining -= 1;
            return;
        }
        let cost = self.cost_rate();
        let flip = if self.active {
            revenue_rate < h.margin_off * cost
        } else {
            revenue_rate >= h.margin_on * cost
        };
        if flip {
            self.active = !self.active;
            self.dwell_remaining = h.dwell;
        }
    }
}

/// Credit multiplier in `[0, 1]`: the fraction of the requirement met by
/// active blocks in the window, capped at one.
pub fn pom_multiplier(m: &MinerAgent, c: &PomCredit) -> f64 {
    let active = m.history.active_blocks() as f64;
    (active / f64::from(c.required)).min(1.0)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct UniformRange {
    pub min: f64,
    pub max: f64,
}

impl UniformRange {
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        if self.max == self.min {
            self.min
        } else {
            self.min + (self.max - self.min) * rng.random::<f64>()
        }
    }

    fn valid(&self) -> bool {
        self.min.is_finite() && self.max.is_finite() && self.min <= self.max
    }
}

/// One class of the miner population.
///
/// Exactly one of `count` (number of miners) and `hashrate_budget` (MH/s;
/// miners are drawn until the class total reaches it) must be given.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MinerClassSpec {
    pub name: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub count: Option<u32>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub hashrate_budget: Option<f64>,
    /// MH/s per miner.
    pub hashrate: UniformRange,
    /// Currency per MH/s per hour.
    pub unit_cost: UniformRange,
    #[serde(default)]
    pub behavior: Behavior,
    #[serde(default = "yes")]
    pub initially_active: bool,
}

fn yes() -> bool {
    true
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PopulationSpec {
    pub classes: Vec<MinerClassSpec>,
}

impl PopulationSpec {
    /// Problems found, as `(field path relative to the population, message)`.
    pub fn issues(&self) -> Vec<(String, &'static str)> {
        let mut out = Vec::new();
        if self.classes.is_empty() {
            out.push((String::from("classes"), "at least one class is required"));
        }
        for (i, c) in self.classes.iter().enumerate() {
            let at = |f: &str| alloc::format!("classes[{i}].{f}");
            match (c.count, c.hashrate_budget) {
                (Some(_), Some(_)) | (None, None) => out.push((
                    at("count"),
                    "exactly one of count and hashrate_budget is required",
                )),
                (None, Some(b)) if !(b > 0.0 && b.is_finite()) => {
                    out.push((at("hashrate_budget"), "must be positive and finite"))
                }
                _ => {}
            }
            if !c.hashrate.valid() || !(c.hashrate.min > 0.0) {
                out.push((at("hashrate"), "needs 0 < min <= max"));
            }
            if !c.unit_cost.valid() || !(c.unit_cost.min >= 0.0) {
                out.push((at("unit_cost"), "needs 0 <= min <= max"));
            }
            if c.behavior.validate().is_err() {
                out.push((at("behavior"), "duty cycle needs on >= 1 and off >= 1"));
            }
        }
        out
    }

    /// Draws the population. Hashrate then cost is drawn for each miner,
    /// class by class, in declaration order. A budgeted class ends within
    /// half a miner's hashrate of its budget.
    pub fn generate<R: Rng + ?Sized>(&self, rng: &mut R, window: usize) -> Result<Vec<MinerAgent>> {
        if let Some((path, msg)) = self.issues().into_iter().next() {
            return Err(Error::Config(alloc::format!("population.{path}: {msg}")));
        }
        let mut agents = Vec::new();
        for (class, spec) in self.classes.iter().enumerate() {
            let draw = |rng: &mut R| (spec.hashrate.sample(rng), spec.unit_cost.sample(rng));
            let mut drawn = Vec::new();
            match (spec.count, spec.hashrate_budget) {
                (Some(n), _) => {
                    for _ in 0..n {
                        drawn.push(draw(rng));
                    }
                }
                (None, Some(budget)) => {
                    // Keep the last draw only if it lands closer to the budget.
                    let mut total = 0.0;
                    while total < budget {
                        let (h, c) = draw(rng);
                        if !drawn.is_empty() && total + h - budget > budget - total {
                            break;
                        }
                        total += h;
                        drawn.push((h, c));
                    }
                }
                (None, None) => unreachable!("rejected by issues()"),
            }
            for (hashrate, unit_cost) in drawn {
                let mut agent = MinerAgent::new(agents.len() as u32, hashrate, unit_cost, window)?;
                agent.class = class;
                agent.behavior = spec.behavior;
                agent.active = spec
                    .behavior
                    .scripted_activity(0)
                    .unwrap_or(spec.initially_active);
                agents.push(agent);
            }
        }
        Ok(agents)
    }
}
