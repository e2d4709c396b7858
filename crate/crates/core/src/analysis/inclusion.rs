//! Compares, history by history, where players ignore their signals with and
//! without congestion.

use num_traits::{One, Zero};
use serde::Serialize;

use super::conditions::{check_conditions, NumericMode, TargetSet};
use super::{check_horizon, AnalysisError};
use crate::decision::{CongestionSpec, Tiebreak};
use crate::equilibrium::{Game, PublicState};
use crate::numeric::{format_rational, to_f64, Rational};
use crate::signal_model::{render_history, Action, SignalModel};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PlayerInclusion {
    pub player: usize,
    /// Histories of length `player - 1` reachable under at least one cost.
    pub histories: usize,
    pub herd_histories_k0: usize,
    pub herd_histories_kpos: usize,
    /// Reachable histories where the player herds at zero cost but responds
    /// to the signal at positive cost.
    pub counterexamples: Vec<String>,
    pub herd_probability_k0: String,
    pub herd_probability_kpos: String,
    /// Probability, under positive-cost play, of histories where the player
    /// herds only at positive cost.
    pub difference_mass: String,
    pub difference_mass_float: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct InclusionReport {
    pub k: String,
    pub horizon: usize,
    /// Whether the sufficient conditions for the inclusion hold.
    pub hypotheses_met: bool,
    pub players: Vec<PlayerInclusion>,
}

impl InclusionReport {
    pub fn holds(&self) -> bool {
        self.players.iter().all(|p| p.counterexamples.is_empty())
    }

    pub fn counterexample_count(&self) -> usize {
        self.players.iter().map(|p| p.counterexamples.len()).sum()
    }
}

struct Pair<'g> {
    base: &'g Game<'g, Rational>,
    kpos: &'g Game<'g, Rational>,
    prior: [Rational; 2],
}

#[derive(Clone)]
struct Side {
    state: PublicState<Rational>,
    weights: [Rational; 2],
}

impl Side {
    fn mass(&self, prior: &[Rational; 2]) -> Rational {
        &prior[0] * &self.weights[0] + &prior[1] * &self.weights[1]
    }
}

/// Walks every history (including ones off path under one of the costs,
/// evaluated with passive beliefs) up to `horizon` players.
pub fn verify_herding_inclusion(
    model: &SignalModel,
    kpos: &CongestionSpec,
    horizon: usize,
    tiebreak: Tiebreak,
) -> Result<InclusionReport, AnalysisError> {
    check_horizon(horizon, horizon)?;
    let base_spec = kpos.with_cost(Rational::zero())?;
    let base = Game::new(model, &base_spec, tiebreak);
    let pos = Game::new(model, kpos, tiebreak);
    let conditions = check_conditions(model, kpos.k(), horizon, NumericMode::Exact)?;
    let hypotheses_met = TargetSet::HerdIncrease.satisfied_by(&conditions);
    let p0 = model.p0().clone();
    let pair = Pair { base: &base, kpos: &pos, prior: [Rational::one() - &p0, p0] };

    let mut players: Vec<PlayerInclusion> = (1..=horizon)
        .map(|player| PlayerInclusion {
            player,
            histories: 0,
            herd_histories_k0: 0,
            herd_histories_kpos: 0,
            counterexamples: Vec::new(),
            herd_probability_k0: String::new(),
            herd_probability_kpos: String::new(),
            difference_mass: String::new(),
            difference_mass_float: 0.0,
        })
        .collect();
    let mut sums = vec![[Rational::zero(), Rational::zero(), Rational::zero()]; horizon];
    let one = [Rational::one(), Rational::one()];
    let root_b = Side { state: base.initial(), weights: one.clone() };
    let root_k = Side { state: pos.initial(), weights: one };
    let mut history = Vec::new();
    visit(&pair, horizon, &root_b, &root_k, &mut history, &mut players, &mut sums);
    for (p, [b, k, d]) in players.iter_mut().zip(sums) {
        p.herd_probability_k0 = format_rational(&b);
        p.herd_probability_kpos = format_rational(&k);
        p.difference_mass_float = to_f64(&d);
        p.difference_mass = format_rational(&d);
    }
    Ok(InclusionReport { k: format_rational(kpos.k()), horizon, hypotheses_met, players })
}

fn visit(
    pair: &Pair<'_>,
    horizon: usize,
    b: &Side,
    k: &Side,
    history: &mut Vec<Action>,
    players: &mut [PlayerInclusion],
    sums: &mut [[Rational; 3]],
) {
    let mb = b.mass(&pair.prior);
    let mk = k.mass(&pair.prior);
    if mb.is_zero() && mk.is_zero() {
        return;
    }
    let player = history.len() + 1;
    let sb = pair.base.strategy(&b.state);
    let sk = pair.kpos.strategy(&k.state);
    let herd_b = !sb.is_informative();
    let herd_k = !sk.is_informative();
    let slot = &mut players[player - 1];
    slot.histories += 1;
    slot.herd_histories_k0 += herd_b as usize;
    slot.herd_histories_kpos += herd_k as usize;
    if herd_b && !herd_k {
        slot.counterexamples.push(render_history(history));
    }
    let acc = &mut sums[player - 1];
    if herd_b {
        acc[0] += &mb;
    }
    if herd_k {
        acc[1] += &mk;
        if !herd_b {
            acc[2] += &mk;
        }
    }
    if player == horizon {
        return;
    }
    for action in Action::ALL {
        let [bl, br] = pair.base.action_probabilities(&sb, action);
        let [kl, kr] = pair.kpos.action_probabilities(&sk, action);
        let nb = Side {
            state: pair.base.advance_with(&b.state, &sb, action),
            weights: [&b.weights[0] * bl, &b.weights[1] * br],
        };
        let nk = Side {
            state: pair.kpos.advance_with(&k.state, &sk, action),
            weights: [&k.weights[0] * kl, &k.weights[1] * kr],
        };
        history.push(action);
        visit(pair, horizon, &nb, &nk, history, players, sums);
        history.pop();
    }
}
