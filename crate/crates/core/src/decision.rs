//! Single-player payoff comparison under congestion or conformity.
//!
//! A player with private odds `O = e^l` of state R faces the fraction `f` of
//! (scope-weighted) predecessors who chose R. With signed cost `κ` (`+k` when
//! players prefer to differ, `−k` when they prefer to conform) the payoff
//! difference between R and L is
//!
//! ```text
//! Δ(l, f) = (e^l − 1)/(e^l + 1) + (1 − 2f) κ
//! ```
//!
//! and the player switches to R at the cutoff odds
//! `(1 − κ + 2fκ) / (1 + κ − 2fκ)`. Both are rational whenever `O`, `f`, `k`
//! are, so best responses are decided exactly.

use std::cmp::Ordering;
use std::collections::BTreeMap;

use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::numeric::{ln_rational, pow_i, rat, serde_rational, Comparison, Rational, Scalar};
use crate::signal_model::{Action, State};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum DecisionError {
    #[error("congestion cost must lie in [0, 1), got {0}")]
    CostOutOfRange(String),
    #[error("window length must be at least 1")]
    EmptyWindow,
    #[error("discount factor must lie in (0, 1), got {0}")]
    DiscountOutOfRange(String),
    #[error("fraction must lie in [0, 1], got {0}")]
    FractionOutOfRange(String),
    #[error("logarithm of a non-positive number in the cutoff")]
    Domain,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CongestionMode {
    /// Payoff falls with the fraction of predecessors taking the same action.
    Differ,
    /// Payoff rises with that fraction.
    Conform,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CongestionScope {
    AllPredecessors,
    /// Only the `m` immediate predecessors count.
    Window(usize),
    /// Predecessor `j` of player `i` has weight `beta^(i-1-j)`.
    Discounted(#[serde(with = "serde_rational")] Rational),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Tiebreak {
    #[default]
    PreferR,
    PreferL,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CongestionSpec {
    #[serde(with = "serde_rational")]
    k: Rational,
    mode: CongestionMode,
    scope: CongestionScope,
    /// Per-period cost overrides (period -> k).
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    overrides: BTreeMap<usize, Overridden>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(transparent)]
struct Overridden(#[serde(with = "serde_rational")] Rational);

fn check_cost(k: &Rational) -> Result<(), DecisionError> {
    if k.is_negative() || k >= &Rational::one() {
        return Err(DecisionError::CostOutOfRange(crate::numeric::format_rational(k)));
    }
    Ok(())
}

impl CongestionSpec {
    pub fn new(k: Rational, mode: CongestionMode, scope: CongestionScope) -> Result<Self, DecisionError> {
        check_cost(&k)?;
        match &scope {
            CongestionScope::AllPredecessors => {}
            CongestionScope::Window(0) => return Err(DecisionError::EmptyWindow),
            CongestionScope::Window(_) => {}
            CongestionScope::Discounted(beta) => {
                if !beta.is_positive() || beta >= &Rational::one() {
                    return Err(DecisionError::DiscountOutOfRange(crate::numeric::format_rational(beta)));
                }
            }
        }
        Ok(CongestionSpec { k, mode, scope, overrides: BTreeMap::new() })
    }

    pub fn differ(k: Rational) -> Result<Self, DecisionError> {
        Self::new(k, CongestionMode::Differ, CongestionScope::AllPredecessors)
    }

    pub fn conform(k: Rational) -> Result<Self, DecisionError> {
        Self::new(k, CongestionMode::Conform, CongestionScope::AllPredecessors)
    }

    /// Overrides the cost faced by one player.
    pub fn with_override(mut self, period: usize, k: Rational) -> Result<Self, DecisionError> {
        check_cost(&k)?;
        self.overrides.insert(period, Overridden(k));
        Ok(self)
    }

    /// Re-validates after deserialisation.
    pub fn validated(self) -> Result<Self, DecisionError> {
        let overrides = self.overrides.clone();
        let mut spec = Self::new(self.k, self.mode, self.scope)?;
        for (p, k) in overrides {
            spec = spec.with_override(p, k.0)?;
        }
        Ok(spec)
    }

    /// Same mode and scope with a different base cost; overrides are dropped.
    pub fn with_cost(&self, k: Rational) -> Result<Self, DecisionError> {
        Self::new(k, self.mode, self.scope.clone())
    }

    pub fn k(&self) -> &Rational {
        &self.k
    }

    pub fn mode(&self) -> CongestionMode {
        self.mode
    }

    pub fn scope(&self) -> &CongestionScope {
        &self.scope
    }

    pub fn has_overrides(&self) -> bool {
        !self.overrides.is_empty()
    }

    pub fn has_overrides_after(&self, period: usize) -> bool {
        self.overrides.range(period + 1..).next().is_some()
    }

    pub fn cost_at(&self, period: usize) -> &Rational {
        self.overrides.get(&period).map(|o| &o.0).unwrap_or(&self.k)
    }

    /// `+k` for `Differ`, `−k` for `Conform`.
    pub fn signed_cost_at(&self, period: usize) -> Rational {
        let k = self.cost_at(period).clone();
        match self.mode {
            CongestionMode::Differ => k,
            CongestionMode::Conform => -k,
        }
    }

    pub fn is_zero_cost(&self) -> bool {
        self.k.is_zero() && self.overrides.values().all(|o| o.0.is_zero())
    }

    /// Scope-weighted fraction of `history` that chose R, as seen by the next
    /// player. An empty history yields 1/2, which makes the congestion term
    /// vanish for the first player.
    pub fn fraction(&self, history: &[Action]) -> Rational {
        self.weighted_share(history, Action::R).unwrap_or_else(|| rat(1, 2))
    }

    /// Scope-weighted share of `history` equal to `action`, or `None` when no
    /// predecessor is in scope.
    fn weighted_share(&self, history: &[Action], action: Action) -> Option<Rational> {
        if history.is_empty() {
            return None;
        }
        match &self.scope {
            CongestionScope::AllPredecessors => Some(count_share(history, action)),
            CongestionScope::Window(m) => {
                let start = history.len().saturating_sub(*m);
                Some(count_share(&history[start..], action))
            }
            CongestionScope::Discounted(beta) => {
                let n = history.len();
                let mut num = Rational::zero();
                let mut den = Rational::zero();
                for (j, a) in history.iter().enumerate() {
                    let w = pow_i(beta, (n - 1 - j) as i64);
                    if *a == action {
                        num += &w;
                    }
                    den += w;
                }
                Some(num / den)
            }
        }
    }

    /// Cutoff for the base cost.
    pub fn cutoff(&self, f: &Rational) -> Result<Cutoff, DecisionError> {
        cutoff_for(&self.signed_cost_at(0), f)
    }

    pub fn cutoff_at(&self, period: usize, f: &Rational) -> Result<Cutoff, DecisionError> {
        cutoff_for(&self.signed_cost_at(period), f)
    }
}

fn count_share(actions: &[Action], action: Action) -> Rational {
    let hits = actions.iter().filter(|a| **a == action).count();
    rat(hits as i64, actions.len() as i64)
}

/// Cutoff private odds at which a player is indifferent.
#[derive(Debug, Clone, PartialEq)]
pub struct Cutoff {
    pub odds: Rational,
    pub llr: f64,
}

/// `ln(1 − κ + 2fκ) − ln(1 + κ − 2fκ)` with `κ` the signed cost.
pub fn cutoff_for(signed_cost: &Rational, f: &Rational) -> Result<Cutoff, DecisionError> {
    if f.is_negative() || f > &Rational::one() {
        return Err(DecisionError::FractionOutOfRange(crate::numeric::format_rational(f)));
    }
    let one = Rational::one();
    let two_f_k = rat(2, 1) * f * signed_cost;
    let num = &one - signed_cost + &two_f_k;
    let den = &one + signed_cost - &two_f_k;
    if !num.is_positive() || !den.is_positive() {
        return Err(DecisionError::Domain);
    }
    let odds = num / den;
    let llr = ln_rational(&odds);
    Ok(Cutoff { odds, llr })
}

/// The cutoff as an LLR, for the base cost of `spec`.
pub fn cutoff_llr(spec: &CongestionSpec, f: &Rational) -> Result<Cutoff, DecisionError> {
    spec.cutoff(f)
}

/// Private belief about state R.
#[derive(Debug, Clone, PartialEq)]
pub struct PrivateBelief<S: Scalar = Rational> {
    odds: S,
}

impl<S: Scalar> PrivateBelief<S> {
    pub fn from_odds(odds: S) -> Self {
        PrivateBelief { odds }
    }

    pub fn odds(&self) -> &S {
        &self.odds
    }

    pub fn llr(&self) -> f64 {
        self.odds.ln()
    }
}

impl PrivateBelief<Rational> {
    pub fn from_probability(p: &Rational) -> Self {
        PrivateBelief { odds: p / (Rational::one() - p) }
    }
}

/// `Δ(l, f)` evaluated at the belief's odds for a given signed cost.
pub fn payoff_difference_signed<S: Scalar>(belief: &PrivateBelief<S>, f: &Rational, signed_cost: &Rational) -> S {
    let one = S::unit();
    let o = belief.odds();
    let lead = o.sub(&one).div(&o.add(&one));
    let congestion = S::from_rational(&((Rational::one() - rat(2, 1) * f) * signed_cost));
    lead.add(&congestion)
}

pub fn payoff_difference<S: Scalar>(belief: &PrivateBelief<S>, f: &Rational, spec: &CongestionSpec) -> S {
    payoff_difference_signed(belief, f, &spec.signed_cost_at(0))
}

/// A decided action plus whether the comparison sat on a near-tie in
/// floating-point mode.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Choice {
    pub action: Action,
    pub uncertain: bool,
    pub tie: bool,
}

fn resolve(cmp: Comparison, tiebreak: Tiebreak) -> Choice {
    let action = match cmp.ordering {
        Ordering::Greater => Action::R,
        Ordering::Less => Action::L,
        Ordering::Equal => match tiebreak {
            Tiebreak::PreferR => Action::R,
            Tiebreak::PreferL => Action::L,
        },
    };
    Choice { action, uncertain: cmp.uncertain, tie: cmp.ordering == Ordering::Equal }
}

/// Best response from the sign of `Δ`.
pub fn best_response_signed<S: Scalar>(
    belief: &PrivateBelief<S>,
    f: &Rational,
    signed_cost: &Rational,
    tiebreak: Tiebreak,
) -> Choice {
    // Δ (O + 1) = (O − 1) + c (O + 1) with c = (1 − 2f) κ, so Δ > 0 iff
    // O (1 + c) > 1 − c. Both sides are positive because |c| < 1.
    let c = (Rational::one() - rat(2, 1) * f) * signed_cost;
    let lhs = belief.odds().mul(&S::from_rational(&(Rational::one() + &c)));
    let rhs = S::from_rational(&(Rational::one() - &c));
    resolve(lhs.compare(&rhs), tiebreak)
}

pub fn best_response<S: Scalar>(
    belief: &PrivateBelief<S>,
    f: &Rational,
    spec: &CongestionSpec,
    tiebreak: Tiebreak,
) -> Action {
    best_response_signed(belief, f, &spec.signed_cost_at(0), tiebreak).action
}

/// Best response from comparing private odds with the cutoff odds.
pub fn best_response_by_cutoff<S: Scalar>(
    belief: &PrivateBelief<S>,
    f: &Rational,
    signed_cost: &Rational,
    tiebreak: Tiebreak,
) -> Result<Choice, DecisionError> {
    let cutoff = cutoff_for(signed_cost, f)?;
    Ok(resolve(belief.odds().compare(&S::from_rational(&cutoff.odds)), tiebreak))
}

/// Realised payoff of player `period` (1-based) given the action history.
/// The first player bears no congestion term.
pub fn payoff(history: &[Action], period: usize, theta: State, spec: &CongestionSpec) -> Rational {
    assert!(period >= 1 && history.len() >= period, "history must contain the player's action");
    let own = history[period - 1];
    let hit = if own.matches(theta) { Rational::one() } else { Rational::zero() };
    match spec.weighted_share(&history[..period - 1], own) {
        Some(share) => hit - spec.signed_cost_at(period) * share,
        None => hit,
    }
}
