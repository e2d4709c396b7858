//! Prior, private signal structure and the log-likelihood-ratio constants
//! derived from them.
//!
//! Two signal structures are supported. The four-signal model has strong and
//! weak signals in favour of each state. The six-signal model adds a third,
//! faintest tier; its `q` parameter then describes the medium signal and `eta`
//! the weakest one.
//!
//! All probabilities are exact rationals. Every LLR constant is stored as the
//! odds ratio it is the logarithm of, so sums of constants are compared by
//! multiplying odds ratios.

use std::collections::BTreeMap;
use std::fmt;

use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::numeric::{format_rational, ln_rational, rat, serde_rational, Rational};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum State {
    L,
    R,
}

impl State {
    pub const ALL: [State; 2] = [State::L, State::R];

    pub fn index(self) -> usize {
        match self {
            State::L => 0,
            State::R => 1,
        }
    }

    pub fn mirror(self) -> Self {
        match self {
            State::L => State::R,
            State::R => State::L,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Action {
    L,
    R,
}

impl Action {
    pub const ALL: [Action; 2] = [Action::L, Action::R];

    pub fn index(self) -> usize {
        match self {
            Action::L => 0,
            Action::R => 1,
        }
    }

    pub fn mirror(self) -> Self {
        match self {
            Action::L => Action::R,
            Action::R => Action::L,
        }
    }

    pub fn matches(self, state: State) -> bool {
        self.index() == state.index()
    }

    pub fn as_char(self) -> char {
        match self {
            Action::L => 'L',
            Action::R => 'R',
        }
    }

    pub fn from_char(c: char) -> Option<Self> {
        match c {
            'L' | 'l' => Some(Action::L),
            'R' | 'r' => Some(Action::R),
            _ => None,
        }
    }
}

/// Parses an action string such as `"LRRL"`.
pub fn parse_history(text: &str) -> Result<Vec<Action>, char> {
    text.chars()
        .filter(|c| !c.is_whitespace() && *c != ',')
        .map(|c| Action::from_char(c).ok_or(c))
        .collect()
}

pub fn render_history(history: &[Action]) -> String {
    history.iter().map(|a| a.as_char()).collect()
}

/// Private signal realisations, ordered from most L-favouring to most
/// R-favouring. The four-signal model uses `StrongL, WeakL, WeakR, StrongR`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Signal {
    StrongL,
    MedL,
    WeakL,
    WeakR,
    MedR,
    StrongR,
}

impl Signal {
    pub fn mirror(self) -> Self {
        match self {
            Signal::StrongL => Signal::StrongR,
            Signal::MedL => Signal::MedR,
            Signal::WeakL => Signal::WeakR,
            Signal::WeakR => Signal::WeakL,
            Signal::MedR => Signal::MedL,
            Signal::StrongR => Signal::StrongL,
        }
    }

    pub fn favours(self) -> State {
        match self {
            Signal::StrongL | Signal::MedL | Signal::WeakL => State::L,
            Signal::WeakR | Signal::MedR | Signal::StrongR => State::R,
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            Signal::StrongL => "StrongL",
            Signal::MedL => "MedL",
            Signal::WeakL => "WeakL",
            Signal::WeakR => "WeakR",
            Signal::MedR => "MedR",
            Signal::StrongR => "StrongR",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Variant {
    #[serde(alias = "baseline")]
    Baseline4,
    #[serde(alias = "appendix")]
    Appendix6,
}

impl Variant {
    pub fn signals(self) -> &'static [Signal] {
        match self {
            Variant::Baseline4 => &[Signal::StrongL, Signal::WeakL, Signal::WeakR, Signal::StrongR],
            Variant::Appendix6 => &[
                Signal::StrongL,
                Signal::MedL,
                Signal::WeakL,
                Signal::WeakR,
                Signal::MedR,
                Signal::StrongR,
            ],
        }
    }
}

/// Raw, unvalidated model parameters as they appear in a config file.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ModelParams {
    pub variant: Variant,
    /// Prior probability of state R.
    #[serde(with = "serde_rational")]
    pub p0: Rational,
    /// Unconditional mass of the strong signals.
    #[serde(rename = "pS", with = "serde_rational")]
    pub strong_mass: Rational,
    /// Pr(strong signal favouring the true state | state).
    #[serde(rename = "Q", with = "serde_rational")]
    pub strong_hit: Rational,
    /// Pr(own-state second-tier signal | state): weak signal in the
    /// four-signal model, medium signal in the six-signal model.
    #[serde(rename = "q", with = "serde_rational")]
    pub second_hit: Rational,
    /// Six-signal model: unconditional medium-signal mass.
    #[serde(rename = "ps", default, skip_serializing_if = "Option::is_none", with = "serde_rational::option")]
    pub medium_mass: Option<Rational>,
    /// Six-signal model: unconditional weak-signal mass.
    #[serde(rename = "p_sigma", default, skip_serializing_if = "Option::is_none", with = "serde_rational::option")]
    pub weak_mass: Option<Rational>,
    /// Six-signal model: Pr(own-state weak signal | state).
    #[serde(rename = "eta", default, skip_serializing_if = "Option::is_none", with = "serde_rational::option")]
    pub weak_hit: Option<Rational>,
}

impl ModelParams {
    pub fn baseline(p0: Rational, strong_mass: Rational, strong_hit: Rational, second_hit: Rational) -> Self {
        ModelParams {
            variant: Variant::Baseline4,
            p0,
            strong_mass,
            strong_hit,
            second_hit,
            medium_mass: None,
            weak_mass: None,
            weak_hit: None,
        }
    }

    #[allow(clippy::too_many_arguments)]
    pub fn appendix(
        p0: Rational,
        strong_mass: Rational,
        medium_mass: Rational,
        weak_mass: Rational,
        strong_hit: Rational,
        medium_hit: Rational,
        weak_hit: Rational,
    ) -> Self {
        ModelParams {
            variant: Variant::Appendix6,
            p0,
            strong_mass,
            strong_hit,
            second_hit: medium_hit,
            medium_mass: Some(medium_mass),
            weak_mass: Some(weak_mass),
            weak_hit: Some(weak_hit),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum ModelError {
    #[error("constraint violated: {0}")]
    ConstraintViolation(String),
    #[error("missing parameter `{0}` for the six-signal model")]
    MissingParameter(&'static str),
}

/// Whether a failed check rejects the model or is only reported.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum ConstraintKind {
    Structural,
    Assumption,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ConstraintCheck {
    pub name: String,
    pub kind: ConstraintKind,
    pub holds: bool,
}

/// Evaluates every parameter constraint, structural and assumed.
pub fn constraint_checks(params: &ModelParams) -> Result<Vec<ConstraintCheck>, ModelError> {
    let zero = Rational::zero();
    let one = Rational::one();
    let half = rat(1, 2);
    let mut out = Vec::new();
    let mut push = |name: &str, kind, holds| out.push(ConstraintCheck { name: name.to_string(), kind, holds });
    let s = ConstraintKind::Structural;
    let p0 = &params.p0;
    let ps_big = &params.strong_mass;
    let q_big = &params.strong_hit;
    let q = &params.second_hit;
    push("p0 >= 1/2", s, p0 >= &half);
    push("p0 < 1", s, p0 < &one);
    push("0 < pS < 1", s, ps_big > &zero && ps_big < &one);
    match params.variant {
        Variant::Baseline4 => {
            let weak_mass = &one - ps_big;
            push("Q > pS/2", s, q_big * rat(2, 1) > *ps_big);
            push("Q < pS", s, q_big < ps_big);
            push("q > (1-pS)/2", s, q * rat(2, 1) > weak_mass);
            // q < Q(1-pS)/pS, cross-multiplied to stay sign-safe for pS > 0.
            push("q < Q(1-pS)/pS", s, ps_big > &zero && q * ps_big < q_big * &weak_mass);
            push("q > p0(1-pS)  [lq > l0]", ConstraintKind::Assumption, q > &(p0 * &weak_mass));
        }
        Variant::Appendix6 => {
            let ps = params.medium_mass.as_ref().ok_or(ModelError::MissingParameter("ps"))?;
            let psig = params.weak_mass.as_ref().ok_or(ModelError::MissingParameter("p_sigma"))?;
            let eta = params.weak_hit.as_ref().ok_or(ModelError::MissingParameter("eta"))?;
            push("0 < ps < 1", s, ps > &zero && ps < &one);
            push("0 < p_sigma < 1", s, psig > &zero && psig < &one);
            push("pS + ps + p_sigma = 1", s, ps_big + ps + psig == one);
            let positive = ps_big > &zero && ps > &zero && psig > &zero;
            // Ratios compared by cross-multiplication; masses are positive here.
            push("eta/p_sigma > 1/2", s, positive && eta * rat(2, 1) > *psig);
            push("eta/p_sigma < q/ps", s, positive && eta * ps < q * psig);
            push("q/ps < Q/pS", s, positive && q * ps_big < q_big * ps);
            push("Q/pS < 1", s, positive && q_big < ps_big);
            // l_eta > l0 ⟺ eta/(p_sigma - eta) > p0/(1 - p0) ⟺ eta > p0 p_sigma.
            push("eta > p0 p_sigma  [l_eta > l0]", ConstraintKind::Assumption, eta > &(p0 * psig));
        }
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq, Eq)]
struct SignalRow {
    signal: Signal,
    /// Pr(signal | L), Pr(signal | R).
    given: [Rational; 2],
}

/// A validated prior and signal structure.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SignalModel {
    params: ModelParams,
    rows: Vec<SignalRow>,
}

impl SignalModel {
    /// Validates structural constraints and builds the signal distribution.
    pub fn new(params: ModelParams) -> Result<Self, ModelError> {
        if let Some(failed) = constraint_checks(&params)?
            .into_iter()
            .find(|c| c.kind == ConstraintKind::Structural && !c.holds)
        {
            return Err(ModelError::ConstraintViolation(failed.name));
        }
        Self::new_relaxed(params)
    }

    /// Only requires a proper signal distribution with every conditional
    /// probability in (0,1). Used to evaluate conditions outside the
    /// structural parameter region.
    pub fn new_relaxed(params: ModelParams) -> Result<Self, ModelError> {
        constraint_checks(&params)?;
        let one = Rational::one();
        let q_big = params.strong_hit.clone();
        let q = params.second_hit.clone();
        let ps_big = params.strong_mass.clone();
        // Own-state probability per tier, L-side signals; R-side mirror.
        let tiers: Vec<(Signal, Rational, Rational)> = match params.variant {
            Variant::Baseline4 => vec![
                (Signal::StrongL, q_big.clone(), &ps_big - &q_big),
                (Signal::WeakL, q.clone(), &one - &ps_big - &q),
            ],
            Variant::Appendix6 => {
                let ps = params.medium_mass.clone().expect("validated");
                let psig = params.weak_mass.clone().expect("validated");
                let eta = params.weak_hit.clone().expect("validated");
                vec![
                    (Signal::StrongL, q_big.clone(), &ps_big - &q_big),
                    (Signal::MedL, q.clone(), &ps - &q),
                    (Signal::WeakL, eta.clone(), &psig - &eta),
                ]
            }
        };
        let mut rows: Vec<SignalRow> = Vec::new();
        for (signal, own, other) in &tiers {
            rows.push(SignalRow { signal: *signal, given: [own.clone(), other.clone()] });
        }
        for (signal, own, other) in tiers.iter().rev() {
            rows.push(SignalRow { signal: signal.mirror(), given: [other.clone(), own.clone()] });
        }
        let model = SignalModel { params, rows };
        for state in State::ALL {
            let total: Rational = model.rows.iter().map(|r| r.given[state.index()].clone()).sum();
            if total != one {
                return Err(ModelError::ConstraintViolation(format!("signal probabilities sum to 1 given {state:?}")));
            }
            if model.rows.iter().any(|r| !r.given[state.index()].is_positive() || r.given[state.index()] >= one) {
                return Err(ModelError::ConstraintViolation("conditional signal probabilities in (0,1)".into()));
            }
        }
        Ok(model)
    }

    pub fn params(&self) -> &ModelParams {
        &self.params
    }

    pub fn variant(&self) -> Variant {
        self.params.variant
    }

    pub fn p0(&self) -> &Rational {
        &self.params.p0
    }

    pub fn signals(&self) -> &'static [Signal] {
        self.params.variant.signals()
    }

    /// Pr(signal | state), by position in [`Self::signals`].
    pub fn prob_by_index(&self, index: usize, state: State) -> &Rational {
        &self.rows[index].given[state.index()]
    }

    pub fn prob(&self, signal: Signal, state: State) -> Option<&Rational> {
        self.rows.iter().find(|r| r.signal == signal).map(|r| &r.given[state.index()])
    }

    /// Full conditional distribution of signals given `state`.
    pub fn signal_distribution(&self, state: State) -> BTreeMap<Signal, Rational> {
        self.rows.iter().map(|r| (r.signal, r.given[state.index()].clone())).collect()
    }

    /// Pr(s|R) / Pr(s|L) for each signal, by position.
    pub fn signal_odds(&self) -> Vec<Rational> {
        self.rows.iter().map(|r| &r.given[1] / &r.given[0]).collect()
    }

    pub fn prior_odds(&self) -> Rational {
        &self.params.p0 / (Rational::one() - &self.params.p0)
    }

    pub fn constants(&self) -> LlrConstants {
        LlrConstants::derive(self)
    }

    /// Same model with states relabelled, valid only at an even prior.
    pub fn is_symmetric_prior(&self) -> bool {
        self.params.p0 == rat(1, 2)
    }
}

/// Named LLR constants. Display symbols follow the usual notation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum LlrKey {
    /// Prior log-odds of R.
    L0,
    /// Strong signal.
    LQ,
    /// Second-tier signal (weak, or medium in the six-signal model).
    Lq,
    /// Pooled strong and second-tier signals.
    LQq,
    /// Everything except the opposing strong signal.
    LNotQ,
    /// Weakest signal of the six-signal model.
    LEta,
    /// Pooled signals favouring one state, six-signal model.
    LQqEta,
    /// Everything except the opposing strong and medium signals.
    LNotqQ,
}

impl LlrKey {
    pub const BASELINE: [LlrKey; 5] = [LlrKey::L0, LlrKey::LQ, LlrKey::Lq, LlrKey::LQq, LlrKey::LNotQ];
    pub const APPENDIX: [LlrKey; 8] = [
        LlrKey::L0,
        LlrKey::LQ,
        LlrKey::Lq,
        LlrKey::LQq,
        LlrKey::LNotQ,
        LlrKey::LEta,
        LlrKey::LQqEta,
        LlrKey::LNotqQ,
    ];

    pub fn symbol(self) -> &'static str {
        match self {
            LlrKey::L0 => "l0",
            LlrKey::LQ => "lQ",
            LlrKey::Lq => "lq",
            LlrKey::LQq => "lQq",
            LlrKey::LNotQ => "l¬Q",
            LlrKey::LEta => "lη",
            LlrKey::LQqEta => "lQqη",
            LlrKey::LNotqQ => "l¬qQ",
        }
    }
}

impl fmt::Display for LlrKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.symbol())
    }
}

/// One constant: its exact odds ratio and the natural log of it.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Llr {
    #[serde(with = "serde_rational")]
    pub odds: Rational,
    pub value: f64,
}

impl Llr {
    fn from_odds(odds: Rational) -> Self {
        let value = ln_rational(&odds);
        Llr { odds, value }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LlrConstants {
    pub variant: Variant,
    pub entries: BTreeMap<LlrKey, Llr>,
}

impl LlrConstants {
    pub fn derive(model: &SignalModel) -> Self {
        let one = Rational::one();
        let p = &model.params;
        let q_big = &p.strong_hit;
        let q = &p.second_hit;
        let ps_big = &p.strong_mass;
        let mut entries = BTreeMap::new();
        let mut put = |key, num: Rational, den: Rational| {
            entries.insert(key, Llr::from_odds(num / den));
        };
        put(LlrKey::L0, p.p0.clone(), &one - &p.p0);
        put(LlrKey::LQ, q_big.clone(), ps_big - q_big);
        match p.variant {
            Variant::Baseline4 => {
                put(LlrKey::Lq, q.clone(), &one - ps_big - q);
                put(LlrKey::LQq, q_big + q, &one - q_big - q);
                put(LlrKey::LNotQ, &one - ps_big + q_big, &one - q_big);
            }
            Variant::Appendix6 => {
                let ps = p.medium_mass.as_ref().expect("validated");
                let psig = p.weak_mass.as_ref().expect("validated");
                let eta = p.weak_hit.as_ref().expect("validated");
                // Medium signal uses ps - q (the mass of the opposing medium signal).
                put(LlrKey::Lq, q.clone(), ps - q);
                put(LlrKey::LEta, eta.clone(), psig - eta);
                put(LlrKey::LQq, q_big + q, ps_big + ps - q_big - q);
                put(LlrKey::LQqEta, q_big + q + eta, &one - q_big - q - eta);
                put(LlrKey::LNotqQ, psig + q + q_big, &one - q - q_big);
                put(LlrKey::LNotQ, ps + psig + q_big, &one - q_big);
            }
        }
        LlrConstants { variant: p.variant, entries }
    }

    pub fn get(&self, key: LlrKey) -> Option<&Llr> {
        self.entries.get(&key)
    }

    pub fn odds(&self, key: LlrKey) -> &Rational {
        &self.entries[&key].odds
    }

    pub fn value(&self, key: LlrKey) -> f64 {
        self.entries[&key].value
    }

    /// The strict ordering relations every valid model satisfies, each with
    /// its outcome (decided on odds ratios).
    pub fn ordering_checks(&self) -> Vec<(String, bool)> {
        let one = Rational::one();
        let o = |k| self.odds(k);
        let lt = |a: &Rational, b: &Rational| a < b;
        let mut out = Vec::new();
        let mut chain = |name: &str, keys: &[LlrKey]| {
            let mut ok = o(keys[0]) > &one;
            for w in keys.windows(2) {
                ok &= lt(o(w[0]), o(w[1]));
            }
            out.push((name.to_string(), ok));
        };
        use LlrKey::*;
        match self.variant {
            Variant::Baseline4 => {
                chain("0 < lq < lQq < lQ", &[Lq, LQq, LQ]);
                chain("0 < l¬Q < lQq", &[LNotQ, LQq]);
            }
            Variant::Appendix6 => {
                chain("0 < lη < lq < lQq < lQ", &[LEta, Lq, LQq, LQ]);
                chain("0 < lη < lQqη < lQ", &[LEta, LQqEta, LQ]);
                chain("0 < l¬Q < l¬qQ < lQqη", &[LNotQ, LNotqQ, LQqEta]);
            }
        }
        out
    }

    /// Names an odds multiplier as `±constant` or `0` when it is exactly one
    /// of the stored constants.
    pub fn identify(&self, odds: &Rational) -> Option<String> {
        if odds.is_one() {
            return Some("0".into());
        }
        self.entries.iter().filter(|(k, _)| **k != LlrKey::L0).find_map(|(k, v)| {
            if &v.odds == odds {
                Some(format!("+{}", k.symbol()))
            } else if v.odds.recip() == *odds {
                Some(format!("-{}", k.symbol()))
            } else {
                None
            }
        })
    }

    pub fn render_table(&self) -> Vec<(String, String, f64)> {
        self.entries
            .iter()
            .map(|(k, v)| (k.symbol().to_string(), format_rational(&v.odds), v.value))
            .collect()
    }
}
