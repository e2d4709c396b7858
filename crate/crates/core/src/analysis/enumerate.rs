//! Exhaustive enumeration of the action tree.
//!
//! Strategies depend on the public history only, so summing over the `2^h`
//! action histories with weights `Pr(history | state)` gives the same result
//! as summing over every signal sequence. Subtrees of zero probability in
//! both states are pruned.

use num_traits::{One, Zero};
use serde::Serialize;

use super::events::{EventSpec, PathView};
use super::{check_horizon, AnalysisError};
use crate::equilibrium::{Game, PublicState, Strategy};
use crate::numeric::{format_rational, to_f64, Rational, Scalar};
use crate::signal_model::{Action, State};

/// A node of the action tree during a walk.
pub struct Node<'n, S: Scalar> {
    pub history: &'n [Action],
    /// `strategies[j]` belongs to player `j + 1`; the last entry is the
    /// strategy of the player about to move.
    pub strategies: &'n [Strategy],
    /// `[Pr(history | L), Pr(history | R)]`.
    pub weights: &'n [S; 2],
    pub state: &'n PublicState<S>,
}

impl<S: Scalar> Node<'_, S> {
    pub fn path(&self) -> PathView<'_> {
        PathView { history: self.history, strategies: self.strategies }
    }

    /// Unconditional probability of reaching this node.
    pub fn mass(&self, prior: &[S; 2]) -> S {
        prior[0].mul(&self.weights[0]).add(&prior[1].mul(&self.weights[1]))
    }
}

/// Depth-first walk over all positive-probability histories of length up to
/// `depth`, calling `visit` on every node including the root.
pub fn walk<S: Scalar>(game: &Game<'_, S>, depth: usize, mut visit: impl FnMut(&Node<'_, S>)) {
    let root = game.initial();
    let mut history = Vec::with_capacity(depth);
    let mut strategies = vec![game.strategy(&root)];
    let weights = [S::unit(), S::unit()];
    recurse(game, depth, &root, &weights, &mut history, &mut strategies, &mut visit);
}

fn recurse<S: Scalar>(
    game: &Game<'_, S>,
    depth: usize,
    state: &PublicState<S>,
    weights: &[S; 2],
    history: &mut Vec<Action>,
    strategies: &mut Vec<Strategy>,
    visit: &mut impl FnMut(&Node<'_, S>),
) {
    visit(&Node { history, strategies, weights, state });
    if history.len() == depth {
        return;
    }
    let strategy = *strategies.last().expect("root strategy present");
    for action in Action::ALL {
        let [pl, pr] = game.action_probabilities(&strategy, action);
        let child_weights = [weights[0].mul(&pl), weights[1].mul(&pr)];
        if child_weights[0].is_nil() && child_weights[1].is_nil() {
            continue;
        }
        let child = game.advance_with(state, &strategy, action);
        history.push(action);
        strategies.push(game.strategy(&child));
        recurse(game, depth, &child, &child_weights, history, strategies, visit);
        strategies.pop();
        history.pop();
    }
}

pub fn prior<S: Scalar>(game: &Game<'_, S>) -> [S; 2] {
    let p0 = game.model().p0();
    [S::from_rational(&(Rational::one() - p0)), S::from_rational(p0)]
}

/// Probability of `event`, optionally conditioned on `condition`.
pub fn probability<S: Scalar>(
    game: &Game<'_, S>,
    horizon: usize,
    event: &EventSpec,
    condition: Option<&EventSpec>,
) -> Result<S, AnalysisError> {
    event.validate().map_err(AnalysisError::InvalidEvent)?;
    if let Some(c) = condition {
        c.validate().map_err(AnalysisError::InvalidEvent)?;
    }
    let depth = event.depth().max(condition.map_or(0, EventSpec::depth));
    check_horizon(event.players().max(condition.map_or(0, EventSpec::players)), horizon)?;
    let prior = prior(game);
    let mut joint = S::nil();
    let mut given = S::nil();
    walk(game, depth, |node| {
        if node.history.len() != depth {
            return;
        }
        let path = node.path();
        for state in State::ALL {
            let i = state.index();
            let mass = prior[i].mul(&node.weights[i]);
            if mass.is_nil() {
                continue;
            }
            let cond = condition.is_none_or(|c| c.holds(&path, state));
            if cond {
                given = given.add(&mass);
                if event.holds(&path, state) {
                    joint = joint.add(&mass);
                }
            }
        }
    });
    if condition.is_some() {
        if given.is_nil() {
            return Err(AnalysisError::ConditionProbabilityZero);
        }
        Ok(joint.div(&given))
    } else {
        Ok(joint)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ProbabilityResult {
    pub event: EventSpec,
    pub conditioned_on: Option<EventSpec>,
    /// Absent in floating-point mode.
    #[serde(serialize_with = "serialize_opt_rational")]
    pub exact: Option<Rational>,
    pub float: f64,
}

fn serialize_opt_rational<Ser: serde::Serializer>(v: &Option<Rational>, s: Ser) -> Result<Ser::Ok, Ser::Error> {
    match v {
        Some(r) => s.serialize_str(&format_rational(r)),
        None => s.serialize_none(),
    }
}

pub fn exact_probability(
    game: &Game<'_, Rational>,
    horizon: usize,
    event: &EventSpec,
    condition: Option<&EventSpec>,
) -> Result<ProbabilityResult, AnalysisError> {
    let p = probability(game, horizon, event, condition)?;
    Ok(ProbabilityResult {
        event: event.clone(),
        conditioned_on: condition.cloned(),
        float: to_f64(&p),
        exact: Some(p),
    })
}

pub fn float_probability(
    game: &Game<'_, f64>,
    horizon: usize,
    event: &EventSpec,
    condition: Option<&EventSpec>,
) -> Result<ProbabilityResult, AnalysisError> {
    let p = probability(game, horizon, event, condition)?;
    Ok(ProbabilityResult { event: event.clone(), conditioned_on: condition.cloned(), exact: None, float: p })
}

/// `Pr(a_i = theta)` for `i = 1 ..= horizon`.
pub fn correct_by_period<S: Scalar>(game: &Game<'_, S>, horizon: usize) -> Vec<S> {
    let prior = prior(game);
    let mut out = vec![S::nil(); horizon];
    walk(game, horizon, |node| {
        if let Some(last) = node.history.last() {
            let state = if *last == Action::R { State::R } else { State::L };
            let i = state.index();
            let slot = &mut out[node.history.len() - 1];
            *slot = slot.add(&prior[i].mul(&node.weights[i]));
        }
    });
    out
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DiscountedResult {
    pub delta: String,
    pub horizon: usize,
    pub value: String,
    pub float: f64,
    pub per_period: Vec<String>,
    pub per_period_float: Vec<f64>,
}

/// `sum_i delta^i Pr(a_i = theta) / sum_i delta^i` over the horizon.
pub fn discounted_correct<S: Scalar>(
    game: &Game<'_, S>,
    horizon: usize,
    delta: &Rational,
) -> Result<DiscountedResult, AnalysisError> {
    if horizon == 0 {
        return Err(AnalysisError::InvalidArgument("horizon must be at least 1".into()));
    }
    if delta <= &Rational::zero() || delta >= &Rational::one() {
        return Err(AnalysisError::InvalidArgument(format!("delta must lie in (0, 1), got {}", format_rational(delta))));
    }
    check_horizon(horizon, horizon)?;
    let per = correct_by_period(game, horizon);
    let d = S::from_rational(delta);
    let mut weight = S::unit();
    let mut num = S::nil();
    let mut den = S::nil();
    for p in &per {
        weight = weight.mul(&d);
        num = num.add(&weight.mul(p));
        den = den.add(&weight);
    }
    let value = num.div(&den);
    Ok(DiscountedResult {
        delta: format_rational(delta),
        horizon,
        float: value.to_f64(),
        value: value.render(),
        per_period_float: per.iter().map(Scalar::to_f64).collect(),
        per_period: per.iter().map(Scalar::render).collect(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::decision::{CongestionSpec, Tiebreak};
    use crate::numeric::rat;
    use crate::signal_model::{ModelParams, SignalModel};

    fn witness() -> SignalModel {
        SignalModel::new(ModelParams::baseline(rat(1, 2), rat(1, 16), rat(9, 256), rat(33, 64))).unwrap()
    }

    #[test]
    fn total_probability_is_one() {
        let m = witness();
        let spec = CongestionSpec::differ(rat(1, 50)).unwrap();
        let g: Game = Game::new(&m, &spec, Tiebreak::PreferR);
        let mut total = Rational::zero();
        let prior = prior(&g);
        walk(&g, 6, |n| {
            if n.history.len() == 6 {
                total += n.mass(&prior);
            }
        });
        assert_eq!(total, Rational::one());
        assert_eq!(probability(&g, 6, &EventSpec::Always, None).unwrap(), Rational::one());
    }

    #[test]
    fn first_player_correct_probability() {
        let m = witness();
        let spec = CongestionSpec::differ(rat(0, 1)).unwrap();
        let g: Game = Game::new(&m, &spec, Tiebreak::PreferR);
        let p = probability(&g, 4, &EventSpec::MatchesState(1), None).unwrap();
        assert_eq!(p, rat(9, 256) + rat(33, 64));
    }

    #[test]
    fn witness_herd_by_three_matches_closed_form() {
        let m = witness();
        let spec = CongestionSpec::differ(rat(1, 50)).unwrap();
        let g: Game = Game::new(&m, &spec, Tiebreak::PreferR);
        let s = rat(9, 256) + rat(33, 64);
        let closed = &s * &s + (Rational::one() - &s) * (Rational::one() - &s);
        assert_eq!(probability(&g, 4, &EventSpec::HerdStartedBy(3), None).unwrap(), closed);
        assert_eq!(closed, rat(16553, 32768));
    }

    #[test]
    fn zero_mass_condition_is_an_error() {
        let m = witness();
        let spec = CongestionSpec::differ(rat(1, 50)).unwrap();
        let g: Game = Game::new(&m, &spec, Tiebreak::PreferR);
        let cond = EventSpec::HistoryEquals(vec![Action::L, Action::L, Action::R]);
        assert_eq!(
            probability(&g, 5, &EventSpec::Always, Some(&cond)),
            Err(AnalysisError::ConditionProbabilityZero)
        );
    }

    #[test]
    fn horizon_is_enforced() {
        let m = witness();
        let spec = CongestionSpec::differ(rat(1, 50)).unwrap();
        let g: Game = Game::new(&m, &spec, Tiebreak::PreferR);
        assert!(matches!(
            probability(&g, 2, &EventSpec::MatchesState(3), None),
            Err(AnalysisError::HorizonTooSmall { .. })
        ));
        assert!(matches!(
            probability(&g, 15, &EventSpec::MatchesState(3), None),
            Err(AnalysisError::HorizonCap { .. })
        ));
    }

    #[test]
    fn discounted_at_horizon_one_is_first_player_accuracy() {
        let m = witness();
        let spec = CongestionSpec::differ(rat(1, 50)).unwrap();
        let g: Game = Game::new(&m, &spec, Tiebreak::PreferR);
        let r = discounted_correct(&g, 1, &rat(9, 10)).unwrap();
        assert_eq!(r.value, format_rational(&(rat(9, 256) + rat(33, 64))));
        assert!(discounted_correct(&g, 3, &rat(1, 1)).is_err());
    }
}
