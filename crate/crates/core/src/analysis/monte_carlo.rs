//! Simulation cross-check for the enumeration engine.
//!
//! Strategies are computed once per reachable history and stored in a
//! binary heap layout. Run `r` draws from its own ChaCha stream seeded by
//! `(seed, r)`, so results do not depend on thread scheduling.

use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use super::enumerate::walk;
use super::events::{EventSpec, PathView};
use super::{check_horizon, AnalysisError};
use crate::equilibrium::{Game, Strategy};
use crate::numeric::{to_f64, Scalar};
use crate::signal_model::{Action, State};

const Z95: f64 = 1.959_963_984_540_054;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MonteCarloResult {
    pub event: EventSpec,
    pub runs: u64,
    pub seed: u64,
    pub hits: u64,
    pub frequency: f64,
    pub std_error: f64,
    /// Wilson score interval at 95%.
    pub ci_low: f64,
    pub ci_high: f64,
}

impl MonteCarloResult {
    /// Distance from `p` in binomial standard deviations at `p`.
    pub fn sigmas_from(&self, p: f64) -> f64 {
        let sd = (p * (1.0 - p) / self.runs as f64).sqrt();
        let diff = (self.frequency - p).abs();
        if sd == 0.0 {
            if diff == 0.0 {
                0.0
            } else {
                f64::INFINITY
            }
        } else {
            diff / sd
        }
    }
}

/// Strategies of every reachable history of length `< depth + 1`, indexed by
/// `(1 << len) | bits` with the first action in the highest bit.
struct StrategyTable {
    slots: Vec<Option<Strategy>>,
}

impl StrategyTable {
    fn build<S: Scalar>(game: &Game<'_, S>, depth: usize) -> Self {
        let mut slots = vec![None; 1 << (depth + 1)];
        walk(game, depth, |node| {
            let idx = index(node.history);
            slots[idx] = node.strategies.last().copied();
        });
        StrategyTable { slots }
    }

    fn get(&self, idx: usize) -> Strategy {
        self.slots[idx].expect("sampled histories are reachable")
    }
}

fn index(history: &[Action]) -> usize {
    history.iter().fold(1usize, |acc, a| (acc << 1) | a.index())
}

pub fn monte_carlo<S: Scalar>(
    game: &Game<'_, S>,
    horizon: usize,
    event: &EventSpec,
    runs: u64,
    seed: u64,
) -> Result<MonteCarloResult, AnalysisError> {
    if runs == 0 {
        return Err(AnalysisError::InvalidArgument("at least one run is required".into()));
    }
    event.validate().map_err(AnalysisError::InvalidEvent)?;
    check_horizon(event.players(), horizon)?;
    let depth = event.depth();
    let table = StrategyTable::build(game, depth);
    let model = game.model();
    let n = model.signals().len();
    let weights = |state: State| (0..n).map(|i| to_f64(model.prob_by_index(i, state))).collect::<Vec<_>>();
    let dist = [
        WeightedIndex::new(weights(State::L)).expect("valid distribution"),
        WeightedIndex::new(weights(State::R)).expect("valid distribution"),
    ];
    let p0 = to_f64(model.p0());

    let hits: u64 = (0..runs)
        .into_par_iter()
        .map(|run| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(run);
            let state = if rng.random_bool(p0) { State::R } else { State::L };
            let mut history = Vec::with_capacity(depth);
            let mut strategies = Vec::with_capacity(depth + 1);
            for _ in 0..depth {
                let strategy = table.get(index(&history));
                strategies.push(strategy);
                let signal = dist[state.index()].sample(&mut rng);
                history.push(strategy.action(signal));
            }
            strategies.push(table.get(index(&history)));
            event.holds(&PathView { history: &history, strategies: &strategies }, state) as u64
        })
        .sum();

    let nf = runs as f64;
    let p = hits as f64 / nf;
    let denom = 1.0 + Z95 * Z95 / nf;
    let centre = (p + Z95 * Z95 / (2.0 * nf)) / denom;
    let half = Z95 * ((p * (1.0 - p) / nf) + Z95 * Z95 / (4.0 * nf * nf)).sqrt() / denom;
    Ok(MonteCarloResult {
        event: event.clone(),
        runs,
        seed,
        hits,
        frequency: p,
        std_error: (p * (1.0 - p) / nf).sqrt(),
        ci_low: (centre - half).max(0.0),
        ci_high: (centre + half).min(1.0),
    })
}
