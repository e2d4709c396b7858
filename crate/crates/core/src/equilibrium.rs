//! Forward pass of the sequential game.
//!
//! Every player's strategy depends only on the public history: the public
//! odds of R, the congestion fraction, and the player's cost. The engine is
//! generic over [`Scalar`] so the same code runs with exact rationals or, as
//! a fast path, with `f64`.

use num_traits::One;
use serde::Serialize;

use crate::decision::{best_response_signed, CongestionSpec, Tiebreak};
use crate::numeric::{format_rational, int, Rational, Scalar};
use crate::signal_model::{render_history, Action, Signal, SignalModel, State};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum EquilibriumError {
    #[error("horizon {horizon} is smaller than the current period {period}")]
    HorizonTooSmall { horizon: usize, period: usize },
    #[error("cascade not certified: strategies stay constant through period {checked_through} but no analytic certificate applies")]
    Uncertified { checked_through: usize },
    #[error("no cascade: player {informative_at} is informative")]
    NoCascade { informative_at: usize },
}

/// Signal-contingent action rule of one player, as a bit set over the
/// model's signal order (bit set = R).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Strategy {
    mask: u8,
    len: u8,
}

impl Strategy {
    pub fn from_actions(actions: &[Action]) -> Self {
        assert!(actions.len() <= 8);
        let mask = actions
            .iter()
            .enumerate()
            .fold(0u8, |m, (i, a)| if *a == Action::R { m | (1 << i) } else { m });
        Strategy { mask, len: actions.len() as u8 }
    }

    pub fn constant(action: Action, len: usize) -> Self {
        Strategy::from_actions(&vec![action; len])
    }

    pub fn len(&self) -> usize {
        self.len as usize
    }

    pub fn is_empty(&self) -> bool {
        self.len == 0
    }

    fn full(&self) -> u8 {
        ((1u16 << self.len) - 1) as u8
    }

    pub fn action(&self, index: usize) -> Action {
        if self.mask & (1 << index) != 0 {
            Action::R
        } else {
            Action::L
        }
    }

    pub fn action_for(&self, model: &SignalModel, signal: Signal) -> Option<Action> {
        model.signals().iter().position(|s| *s == signal).map(|i| self.action(i))
    }

    pub fn actions(&self) -> Vec<Action> {
        (0..self.len()).map(|i| self.action(i)).collect()
    }

    /// The action taken for every signal, if the strategy ignores the signal.
    pub fn constant_action(&self) -> Option<Action> {
        if self.mask == 0 {
            Some(Action::L)
        } else if self.mask == self.full() {
            Some(Action::R)
        } else {
            None
        }
    }

    pub fn is_informative(&self) -> bool {
        self.constant_action().is_none()
    }

    /// Threshold form: R exactly for the signals above some cutoff.
    pub fn is_monotone(&self) -> bool {
        let full = self.full();
        (0..=self.len).any(|t| self.mask == (full & !((1u16 << t) - 1) as u8))
    }

    /// Relabels L and R: the mirrored strategy for mirrored signals.
    pub fn mirror(&self) -> Self {
        let acts: Vec<Action> = self.actions().into_iter().rev().map(Action::mirror).collect();
        Strategy::from_actions(&acts)
    }

    pub fn render(&self) -> String {
        self.actions().iter().map(|a| a.as_char()).collect()
    }
}

/// What the next player knows before their private signal.
#[derive(Debug, Clone, PartialEq)]
pub struct PublicState<S: Scalar = Rational> {
    history: Vec<Action>,
    odds: S,
    fraction: Rational,
    on_path: bool,
}

impl<S: Scalar> PublicState<S> {
    pub fn history(&self) -> &[Action] {
        &self.history
    }

    /// Period of the player about to move.
    pub fn period(&self) -> usize {
        self.history.len() + 1
    }

    /// Public odds of state R.
    pub fn odds(&self) -> &S {
        &self.odds
    }

    pub fn llr(&self) -> f64 {
        self.odds.ln()
    }

    /// Congestion fraction the next player faces.
    pub fn fraction(&self) -> &Rational {
        &self.fraction
    }

    /// False once any observed action had zero probability.
    pub fn on_path(&self) -> bool {
        self.on_path
    }
}

/// Private-signal decision of one player, with floating-point diagnostics.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Decision {
    pub strategy: Strategy,
    pub uncertain: bool,
    pub tie: bool,
}

/// Public odds multiplier carried by an observed action.
#[derive(Debug, Clone, PartialEq)]
pub struct Increment<S: Scalar = Rational> {
    pub odds: S,
    pub on_path: bool,
}

impl<S: Scalar> Increment<S> {
    pub fn llr(&self) -> f64 {
        self.odds.ln()
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum CascadeVerdict {
    /// All later players ignore their signals along the on-path continuation
    /// of the first `after` actions.
    Certified { after: usize, action: Action },
    /// Strategies stay constant up to the horizon, but no certificate applies.
    Undetermined { after: usize, checked_through: usize },
    Absent,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Detection {
    /// `informative[i]` concerns player `i + 1`, for every player up to the
    /// one about to move.
    pub informative: Vec<bool>,
    /// Period of the first player who copies their predecessor regardless of
    /// signal.
    pub herd_start: Option<usize>,
    /// Earliest history length after which a certified cascade is in effect
    /// and consistent with the remaining observed actions.
    pub cascade_start: Option<usize>,
    /// Verdict for the continuation of the full history.
    pub cascade: CascadeVerdict,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TraceRow {
    pub period: usize,
    pub history: String,
    pub public_llr: f64,
    pub public_odds: String,
    pub fraction: String,
    pub cost: String,
    pub cutoff_llr: f64,
    pub strategy: String,
    pub increment_llr_l: f64,
    pub increment_llr_r: f64,
    pub increment_odds_l: String,
    pub increment_odds_r: String,
    pub on_path_l: bool,
    pub on_path_r: bool,
    pub informative: bool,
    pub herd: bool,
    pub observed: Option<char>,
    pub state_on_path: bool,
    pub boundary_uncertain: bool,
}

pub struct Game<'a, S: Scalar = Rational> {
    model: &'a SignalModel,
    spec: &'a CongestionSpec,
    tiebreak: Tiebreak,
    signal_odds: Vec<S>,
    given: Vec<[S; 2]>,
    prior_odds: S,
}

impl<'a, S: Scalar> Game<'a, S> {
    pub fn new(model: &'a SignalModel, spec: &'a CongestionSpec, tiebreak: Tiebreak) -> Self {
        let signal_odds = model.signal_odds().iter().map(S::from_rational).collect();
        let given = (0..model.signals().len())
            .map(|i| {
                [
                    S::from_rational(model.prob_by_index(i, State::L)),
                    S::from_rational(model.prob_by_index(i, State::R)),
                ]
            })
            .collect();
        Game { model, spec, tiebreak, signal_odds, given, prior_odds: S::from_rational(&model.prior_odds()) }
    }

    pub fn model(&self) -> &'a SignalModel {
        self.model
    }

    pub fn spec(&self) -> &'a CongestionSpec {
        self.spec
    }

    pub fn tiebreak(&self) -> Tiebreak {
        self.tiebreak
    }

    /// Pr(signal index | state) in the engine's scalar type.
    pub fn signal_prob(&self, index: usize, state: State) -> &S {
        &self.given[index][state.index()]
    }

    pub fn initial(&self) -> PublicState<S> {
        PublicState {
            history: Vec::new(),
            odds: self.prior_odds.clone(),
            fraction: self.spec.fraction(&[]),
            on_path: true,
        }
    }

    /// Strategy of the player about to move: best response to public odds
    /// times each signal's odds ratio.
    pub fn decide(&self, state: &PublicState<S>) -> Decision {
        self.decide_at(&state.odds, &state.fraction, state.period())
    }

    fn decide_at(&self, odds: &S, fraction: &Rational, period: usize) -> Decision {
        let cost = self.spec.signed_cost_at(period);
        let mut actions = Vec::with_capacity(self.signal_odds.len());
        let mut uncertain = false;
        let mut tie = false;
        for so in &self.signal_odds {
            let belief = crate::decision::PrivateBelief::from_odds(odds.mul(so));
            let choice = best_response_signed(&belief, fraction, &cost, self.tiebreak);
            uncertain |= choice.uncertain;
            tie |= choice.tie;
            actions.push(choice.action);
        }
        Decision { strategy: Strategy::from_actions(&actions), uncertain, tie }
    }

    pub fn strategy(&self, state: &PublicState<S>) -> Strategy {
        self.decide(state).strategy
    }

    /// `[Pr(action | L), Pr(action | R)]` under `strategy`.
    pub fn action_probabilities(&self, strategy: &Strategy, action: Action) -> [S; 2] {
        let mut out = [S::nil(), S::nil()];
        for (i, g) in self.given.iter().enumerate() {
            if strategy.action(i) == action {
                out[0] = out[0].add(&g[0]);
                out[1] = out[1].add(&g[1]);
            }
        }
        out
    }

    /// Odds multiplier from observing `action`. Zero-probability actions
    /// leave beliefs unchanged and are flagged off-path.
    pub fn increment(&self, strategy: &Strategy, action: Action) -> Increment<S> {
        let [pl, pr] = self.action_probabilities(strategy, action);
        if pl.is_nil() && pr.is_nil() {
            Increment { odds: S::unit(), on_path: false }
        } else {
            Increment { odds: pr.div(&pl), on_path: true }
        }
    }

    pub fn advance_with(&self, state: &PublicState<S>, strategy: &Strategy, action: Action) -> PublicState<S> {
        let inc = self.increment(strategy, action);
        let mut history = state.history.clone();
        history.push(action);
        let fraction = self.spec.fraction(&history);
        PublicState { odds: state.odds.mul(&inc.odds), fraction, on_path: state.on_path && inc.on_path, history }
    }

    pub fn advance(&self, state: &PublicState<S>, action: Action) -> PublicState<S> {
        let strategy = self.strategy(state);
        self.advance_with(state, &strategy, action)
    }

    /// Public state after an arbitrary (possibly off-path) history.
    pub fn state_after(&self, history: &[Action]) -> PublicState<S> {
        history.iter().fold(self.initial(), |s, a| self.advance(&s, *a))
    }

    /// Whether a constant strategy at `state` provably persists forever.
    ///
    /// Along the continuation every player takes the same action `a`, public
    /// odds stay fixed and the fraction moves monotonically toward
    /// `1{a = R}`. The cutoff is monotone in the fraction, so if the player
    /// would still ignore their signal at that limit, every later player does.
    fn certified(&self, state: &PublicState<S>, strategy: &Strategy) -> bool {
        let Some(a) = strategy.constant_action() else {
            return false;
        };
        if self.spec.has_overrides_after(state.period()) {
            return false;
        }
        let limit = if a == Action::R { int(1) } else { int(0) };
        self.decide_at(&state.odds, &limit, state.period() + 1).strategy.constant_action() == Some(a)
    }

    /// Follows the on-path continuation of `state` looking for a cascade.
    /// Returns the verdict and the continuation actions walked.
    pub fn cascade_after(&self, state: &PublicState<S>, horizon: usize) -> (CascadeVerdict, Vec<Action>) {
        let after = state.history.len();
        let mut cur = state.clone();
        let mut walked = Vec::new();
        loop {
            let strategy = self.strategy(&cur);
            let Some(a) = strategy.constant_action() else {
                return (CascadeVerdict::Absent, walked);
            };
            if self.certified(&cur, &strategy) {
                return (CascadeVerdict::Certified { after, action: a }, walked);
            }
            if cur.period() >= horizon {
                return (CascadeVerdict::Undetermined { after, checked_through: cur.period() }, walked);
            }
            walked.push(a);
            cur = self.advance_with(&cur, &strategy, a);
        }
    }

    /// Strict certification: the history length after which the cascade
    /// starts, or why it cannot be claimed.
    pub fn certify_cascade(&self, state: &PublicState<S>, horizon: usize) -> Result<usize, EquilibriumError> {
        if horizon < state.period() {
            return Err(EquilibriumError::HorizonTooSmall { horizon, period: state.period() });
        }
        match self.cascade_after(state, horizon) {
            (CascadeVerdict::Certified { after, .. }, _) => Ok(after),
            (CascadeVerdict::Undetermined { checked_through, .. }, _) => {
                Err(EquilibriumError::Uncertified { checked_through })
            }
            (CascadeVerdict::Absent, walked) => {
                Err(EquilibriumError::NoCascade { informative_at: state.period() + walked.len() })
            }
        }
    }

    /// Informativeness, herd and cascade status along the history of `state`.
    pub fn detect(&self, state: &PublicState<S>, horizon: usize) -> Result<Detection, EquilibriumError> {
        if horizon < state.period() {
            return Err(EquilibriumError::HorizonTooSmall { horizon, period: state.period() });
        }
        let history = state.history.clone();
        let mut prefixes = vec![self.initial()];
        for a in &history {
            let next = self.advance(prefixes.last().expect("non-empty"), *a);
            prefixes.push(next);
        }
        let strategies: Vec<Strategy> = prefixes.iter().map(|p| self.strategy(p)).collect();
        let informative = strategies.iter().map(Strategy::is_informative).collect();
        let herd_start = (1..strategies.len())
            .find(|&t| strategies[t].constant_action() == Some(history[t - 1]))
            .map(|t| t + 1);
        let mut cascade_start = None;
        for (t, prefix) in prefixes.iter().enumerate() {
            let (verdict, walked) = self.cascade_after(prefix, horizon.max(prefix.period()));
            if let CascadeVerdict::Certified { .. } = verdict {
                let action = walked_action(&verdict);
                let consistent = history[t..]
                    .iter()
                    .enumerate()
                    .all(|(j, a)| walked.get(j).copied().or(action) == Some(*a));
                if consistent {
                    cascade_start = Some(t);
                    break;
                }
            }
        }
        let (cascade, _) = self.cascade_after(state, horizon);
        Ok(Detection { informative, herd_start, cascade_start, cascade })
    }

    /// One row per player up to and including the one after `history`.
    pub fn trace(&self, history: &[Action]) -> Vec<TraceRow> {
        let mut rows = Vec::with_capacity(history.len() + 1);
        let mut state = self.initial();
        for period in 1..=history.len() + 1 {
            let decision = self.decide(&state);
            let strategy = decision.strategy;
            let inc_l = self.increment(&strategy, Action::L);
            let inc_r = self.increment(&strategy, Action::R);
            let observed = history.get(period - 1).copied();
            let herd = period >= 2 && strategy.constant_action() == Some(history[period - 2]);
            let cost = self.spec.signed_cost_at(period);
            let cutoff = crate::decision::cutoff_for(&cost, &state.fraction).map(|c| c.llr).unwrap_or(f64::NAN);
            rows.push(TraceRow {
                period,
                history: render_history(&state.history),
                public_llr: state.llr(),
                public_odds: state.odds.render(),
                fraction: format_rational(&state.fraction),
                cost: format_rational(self.spec.cost_at(period)),
                cutoff_llr: cutoff,
                strategy: strategy.render(),
                increment_llr_l: inc_l.llr(),
                increment_llr_r: inc_r.llr(),
                increment_odds_l: inc_l.odds.render(),
                increment_odds_r: inc_r.odds.render(),
                on_path_l: inc_l.on_path,
                on_path_r: inc_r.on_path,
                informative: strategy.is_informative(),
                herd,
                observed: observed.map(Action::as_char),
                state_on_path: state.on_path,
                boundary_uncertain: decision.uncertain,
            });
            if let Some(a) = observed {
                state = self.advance_with(&state, &strategy, a);
            }
        }
        rows
    }
}

fn walked_action(verdict: &CascadeVerdict) -> Option<Action> {
    match verdict {
        CascadeVerdict::Certified { action, .. } => Some(*action),
        _ => None,
    }
}

impl<'a> Game<'a, Rational> {
    /// Relative public odds `Pr(history | R) / Pr(history | L)` recomputed
    /// from scratch; equals the product of increments on path.
    pub fn likelihoods(&self, history: &[Action]) -> [Rational; 2] {
        let mut state = self.initial();
        let mut w = [Rational::one(), Rational::one()];
        for a in history {
            let strategy = self.strategy(&state);
            let [pl, pr] = self.action_probabilities(&strategy, *a);
            w = [&w[0] * pl, &w[1] * pr];
            state = self.advance_with(&state, &strategy, *a);
        }
        w
    }
}
