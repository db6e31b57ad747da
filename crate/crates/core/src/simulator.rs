//! Seeded block-by-block network simulation.
//!
//! Each block: the solve time is drawn from an exponential law with mean
//! `D / (k * H)`, a winner is drawn in proportion to hashrate, the schedule
//! pays `reward(D)` scaled by the winner's participation credit, difficulty
//! is retargeted from the drawn interval, and then every miner re-decides.
//!
//! Miners price the reward through a smoothed signal: an exponential moving
//! average of the reward on offer at each retargeted difficulty.

use alloc::string::String;
use alloc::vec::Vec;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::agents::{expected_revenue_rate, pom_multiplier, Hysteresis, MinerAgent, PomCredit};
use crate::config::{PricePath, Schedule, SimConfig, StallParams};
use crate::difficulty::{DifficultyMap, RetargetState};
use crate::metrics::{large_miner_share, summarize_records, EquilibriumSummary};
use crate::{Error, Result};

/// Number of segments in [`RunSummary::share_trajectory`].
pub const TRAJECTORY_SEGMENTS: usize = 10;

/// Everything `step` reads but never changes.
#[derive(Debug, Clone)]
pub struct Model {
    pub schedule: Schedule,
    pub map: DifficultyMap,
    pub rate_constant: f64,
    pub target_interval: f64,
    pub hysteresis: Hysteresis,
    pub pom: PomCredit,
    pub price: PricePath,
    pub large_miner_threshold: f64,
    pub stall: StallParams,
    pub signal_smoothing: f64,
}

impl Model {
    pub fn from_config(config: &SimConfig) -> Result<Self> {
        config.validate()?;
        Ok(Self {
            schedule: config.schedule.resolve()?,
            map: config.difficulty_map,
            rate_constant: config.rate_constant(),
            target_interval: config.retarget.target_interval,
            hysteresis: config.hysteresis,
            pom: config.pom,
            price: config.price.clone(),
            large_miner_threshold: config.large_miner_threshold,
            stall: config.stall,
            signal_smoothing: config.signal_smoothing,
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct NetworkState {
    pub height: u64,
    /// Seconds since genesis.
    pub timestamp: f64,
    pub retarget: RetargetState,
    pub agents: Vec<MinerAgent>,
    /// Empty stall quanta seen so far.
    pub stall_quanta: u64,
    /// Miners' smoothed view of the reward on offer.
    pub reward_signal: f64,
}

impl NetworkState {
    pub fn active_hashrate(&self) -> f64 {
        self.agents
            .iter()
            .filter(|a| a.active)
            .map(|a| a.hashrate)
            .sum()
    }

    pub fn difficulty(&self) -> f64 {
        self.retarget.current_difficulty
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BlockRecord {
    pub height: u64,
    /// Seconds since genesis at which the block was found.
    pub timestamp: f64,
    pub difficulty: f64,
    /// Active hashrate while the block was mined, MH/s.
    pub total_hash: f64,
    pub winner: u32,
    pub raw_reward: f64,
    pub pom_multiplier: f64,
    pub credited_reward: f64,
    pub active_miner_count: u32,
    pub large_miner_share: f64,
}

/// Builds the genesis state: draws the population and seeds difficulty from
/// the map at the initially active hashrate.
pub fn genesis<R: Rng + ?Sized>(config: &SimConfig, rng: &mut R) -> Result<NetworkState> {
    let agents = config
        .population
        .generate(rng, config.pom.window() as usize)?;
    let hash: f64 = agents.iter().filter(|a| a.active).map(|a| a.hashrate).sum();
    let difficulty = config.difficulty_map.hash_to_difficulty(hash)?;
    let reward_signal = config.schedule.resolve()?.reward(difficulty)?;
    Ok(NetworkState {
        reward_signal,
        height: 0,
        timestamp: 0.0,
        retarget: RetargetState::new(difficulty, &config.retarget)?,
        agents,
        stall_quanta: 0,
    })
}

/// Uniform draw in the open interval (0, 1).
fn open_unit<R: Rng + ?Sized>(rng: &mut R) -> f64 {
    ((rng.next_u64() >> 11) as f64 + 0.5) / (1u64 << 53) as f64
}

fn redecide(
    state: &mut NetworkState,
    model: &Model,
    total_hash: f64,
    next_height: u64,
) -> Result<()> {
    let offered = model.schedule.reward(state.difficulty())?;
    state.reward_signal += model.signal_smoothing * (offered - state.reward_signal);
    let block_reward = state.reward_signal;
    let price = model.price.price_at(next_height);
    for agent in state.agents.iter_mut() {
        if let Some(active) = agent.behavior.scripted_activity(next_height) {
            agent.active = active;
            continue;
        }
        // An idle miner prices the network it would join, itself included.
        let network = if agent.active {
            total_hash
        } else {
            total_hash + agent.hashrate
        };
        let revenue =
            expected_revenue_rate(agent, network, block_reward, price, model.target_interval)?;
        agent.apply_decision(revenue, &model.hysteresis);
    }
    Ok(())
}

/// Advances the network by one block.
///
/// If nobody is mining, time advances in stall quanta. The retarget
/// controller restarts from the map's difficulty for an empty network and
/// the miners re-decide after each quantum. A stall longer than `stall.max_quanta` is reported as
/// [`Error::Stalled`].
pub fn step<R: Rng + ?Sized>(
    state: &mut NetworkState,
    model: &Model,
    rng: &mut R,
) -> Result<BlockRecord> {
    let mut empty = 0u64;
    let total_hash = loop {
        let h = state.active_hashrate();
        if h > 0.0 {
            break h;
        }
        empty += 1;
        if empty > model.stall.max_quanta {
            return Err(Error::Stalled(empty - 1));
        }
        state.stall_quanta += 1;
        state.timestamp += model.stall.quantum;
        let restart = RetargetState {
            current_difficulty: model.map.hash_to_difficulty(0.0)?,
            ema_difficulty: model.map.hash_to_difficulty(0.0)?,
            ema_interval: state.retarget.target_interval,
            ..state.retarget
        };
        state.retarget = restart;
        redecide(state, model, 0.0, state.height)?;
    };

    let difficulty = state.difficulty();
    let mean_interval = difficulty / (model.rate_constant * total_hash);
    let solve_time = -mean_interval * libm::log(open_unit(rng));

    let mut ticket = rng.random::<f64>() * total_hash;
    let mut winner = None;
    for (i, a) in state.agents.iter().enumerate().filter(|(_, a)| a.active) {
        winner = Some(i);
        if ticket < a.hashrate {
            break;
        }
        ticket -= a.hashrate;
    }
    let winner = winner.ok_or(Error::Internal("positive hashrate without an active miner"))?;

    for a in state.agents.iter_mut() {
        a.history.push(a.active);
    }
    let raw_reward = model.schedule.reward(difficulty)?;
    let multiplier = if state.height < u64::from(model.pom.window()) {
        1.0
    } else {
        pom_multiplier(&state.agents[winner], &model.pom)
    };

    state.timestamp += solve_time;
    let record = BlockRecord {
        height: state.height,
        timestamp: state.timestamp,
        difficulty,
        total_hash,
        winner: state.agents[winner].id,
        raw_reward,
        pom_multiplier: multiplier,
        credited_reward: raw_reward * multiplier,
        active_miner_count: state.agents.iter().filter(|a| a.active).count() as u32,
        large_miner_share: large_miner_share(&state.agents, model.large_miner_threshold),
    };

    let next = state.retarget.retarget(solve_time)?;
    state.retarget = RetargetState {
        current_difficulty: next.current_difficulty.max(model.map.floor()),
        ..next
    };
    state.height += 1;
    redecide(state, model, total_hash, state.height)?;
    Ok(record)
}

/// Static description of one miner plus its earnings over a run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MinerOutcome {
    pub id: u32,
    pub class: String,
    pub hashrate: f64,
    pub unit_cost: f64,
    pub blocks_won: u64,
    pub active_blocks: u64,
    pub credited_reward: f64,
}

/// Network conditions at genesis.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GenesisSummary {
    pub miners: u32,
    pub active_miners: u32,
    pub hashrate: f64,
    pub difficulty: f64,
    pub large_miner_share: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunSummary {
    pub genesis: GenesisSummary,
    /// `None` when the run has no blocks.
    pub equilibrium: Option<EquilibriumSummary>,
    /// Mean large-miner share over consecutive tenths of the run.
    pub share_trajectory: Vec<f64>,
    pub stall_quanta: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunSeries {
    pub config_digest: String,
    pub seed: u64,
    pub records: Vec<BlockRecord>,
    pub miners: Vec<MinerOutcome>,
    pub summary: RunSummary,
}

fn share_trajectory(records: &[BlockRecord]) -> Vec<f64> {
    if records.is_empty() {
        return Vec::new();
    }
    let n = records.len();
    (0..TRAJECTORY_SEGMENTS.min(n))
        .map(|k| {
            let seg = &records
                [k * n / TRAJECTORY_SEGMENTS.min(n)..(k + 1) * n / TRAJECTORY_SEGMENTS.min(n)];
            seg.iter().map(|r| r.large_miner_share).sum::<f64>() / seg.len() as f64
        })
        .collect()
}

/// Runs `config.horizon` blocks from genesis with a generator seeded from
/// `config.seed`. Identical configs give identical series.
pub fn run(config: &SimConfig) -> Result<RunSeries> {
    let model = Model::from_config(config)?;
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let mut state = genesis(config, &mut rng)?;

    let genesis_summary = GenesisSummary {
        miners: state.agents.len() as u32,
        active_miners: state.agents.iter().filter(|a| a.active).count() as u32,
        hashrate: state.active_hashrate(),
        difficulty: state.difficulty(),
        large_miner_share: large_miner_share(&state.agents, config.large_miner_threshold),
    };

    let mut outcomes: Vec<MinerOutcome> = state
        .agents
        .iter()
        .map(|a| MinerOutcome {
            id: a.id,
            class: config.population.classes[a.class].name.clone(),
            hashrate: a.hashrate,
            unit_cost: a.unit_cost,
            blocks_won: 0,
            active_blocks: 0,
            credited_reward: 0.0,
        })
        .collect();

    let mut records = Vec::with_capacity(config.horizon as usize);
    for _ in 0..config.horizon {
        let record = step(&mut state, &model, &mut rng)?;
        for (o, a) in outcomes.iter_mut().zip(&state.agents) {
            if a.history.last() == Some(true) {
                o.active_blocks += 1;
            }
        }
        let w = record.winner as usize;
        outcomes[w].blocks_won += 1;
        outcomes[w].credited_reward += record.credited_reward;
        records.push(record);
    }

    let equilibrium = if records.is_empty() {
        None
    } else {
        Some(summarize_records(&records, config.burn_in())?)
    };
    Ok(RunSeries {
        config_digest: config.digest(),
        seed: config.seed,
        summary: RunSummary {
            genesis: genesis_summary,
            equilibrium,
            share_trajectory: share_trajectory(&records),
            stall_quanta: state.stall_quanta,
        },
        records,
        miners: outcomes,
    })
}
