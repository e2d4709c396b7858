use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::equilibrium::Strategy;
use crate::signal_model::{parse_history, render_history, Action, State};

/// Events over a play path. Indices are 1-based player periods.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(into = "String", try_from = "String")]
pub enum EventSpec {
    Always,
    /// Some player `2 ..= t` copies their predecessor regardless of signal.
    HerdStartedBy(usize),
    /// Player `i` ignores their signal and copies player `i - 1`.
    Herds(usize),
    /// Player `i`'s strategy is constant in the signal.
    Uninformative(usize),
    ActionInformative(usize),
    /// `a_i = a_{i-1}`.
    MatchesPredecessor(usize),
    /// `a_i` equals the true state.
    MatchesState(usize),
    /// The history starts with the given actions.
    HistoryEquals(Vec<Action>),
}

/// One complete path of the action tree.
pub struct PathView<'p> {
    pub history: &'p [Action],
    /// `strategies[j]` belongs to player `j + 1`.
    pub strategies: &'p [Strategy],
}

impl EventSpec {
    /// Number of actions a path must contain to decide the event.
    pub fn depth(&self) -> usize {
        match self {
            EventSpec::Always => 0,
            EventSpec::HerdStartedBy(t)
            | EventSpec::Herds(t)
            | EventSpec::Uninformative(t)
            | EventSpec::ActionInformative(t) => t.saturating_sub(1),
            EventSpec::MatchesPredecessor(i) | EventSpec::MatchesState(i) => *i,
            EventSpec::HistoryEquals(h) => h.len(),
        }
    }

    /// Highest player period the event refers to.
    pub fn players(&self) -> usize {
        match self {
            EventSpec::Always => 0,
            EventSpec::HerdStartedBy(i)
            | EventSpec::Herds(i)
            | EventSpec::Uninformative(i)
            | EventSpec::ActionInformative(i)
            | EventSpec::MatchesPredecessor(i)
            | EventSpec::MatchesState(i) => *i,
            EventSpec::HistoryEquals(h) => h.len(),
        }
    }

    pub fn depends_on_state(&self) -> bool {
        matches!(self, EventSpec::MatchesState(_))
    }

    /// Index sanity independent of any horizon.
    pub fn validate(&self) -> Result<(), String> {
        match self {
            EventSpec::HerdStartedBy(t) | EventSpec::Herds(t) | EventSpec::MatchesPredecessor(t) if *t < 2 => {
                Err(format!("`{self}` needs a period of at least 2"))
            }
            EventSpec::Uninformative(0)
            | EventSpec::ActionInformative(0)
            | EventSpec::MatchesState(0) => Err(format!("`{self}`: periods start at 1")),
            _ => Ok(()),
        }
    }

    /// Evaluates on a path of at least [`depth`](Self::depth) actions.
    pub fn holds(&self, path: &PathView<'_>, state: State) -> bool {
        let h = path.history;
        let s = path.strategies;
        match self {
            EventSpec::Always => true,
            EventSpec::HerdStartedBy(t) => (2..=*t).any(|p| s[p - 1].constant_action() == Some(h[p - 2])),
            EventSpec::Herds(i) => s[i - 1].constant_action() == Some(h[i - 2]),
            EventSpec::Uninformative(i) => !s[i - 1].is_informative(),
            EventSpec::ActionInformative(i) => s[i - 1].is_informative(),
            EventSpec::MatchesPredecessor(i) => h[i - 1] == h[i - 2],
            EventSpec::MatchesState(i) => h[i - 1].matches(state),
            EventSpec::HistoryEquals(prefix) => h.starts_with(prefix),
        }
    }
}

impl fmt::Display for EventSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            EventSpec::Always => write!(f, "always"),
            EventSpec::HerdStartedBy(t) => write!(f, "herd-by:{t}"),
            EventSpec::Herds(i) => write!(f, "herd:{i}"),
            EventSpec::Uninformative(i) => write!(f, "uninformative:{i}"),
            EventSpec::ActionInformative(i) => write!(f, "informative:{i}"),
            EventSpec::MatchesPredecessor(i) => write!(f, "match-prev:{i}"),
            EventSpec::MatchesState(i) => write!(f, "match-state:{i}"),
            EventSpec::HistoryEquals(h) => write!(f, "history:{}", render_history(h)),
        }
    }
}

impl FromStr for EventSpec {
    type Err = String;

    fn from_str(text: &str) -> Result<Self, Self::Err> {
        let text = text.trim();
        if text == "always" {
            return Ok(EventSpec::Always);
        }
        let (kind, arg) = text
            .split_once(':')
            .ok_or_else(|| format!("`{text}`: expected `kind:argument` or `always`"))?;
        if kind == "history" {
            return parse_history(arg)
                .map(EventSpec::HistoryEquals)
                .map_err(|c| format!("`{text}`: invalid action `{c}`"));
        }
        let n: usize = arg.trim().parse().map_err(|_| format!("`{text}`: `{arg}` is not a period"))?;
        let event = match kind {
            "herd-by" => EventSpec::HerdStartedBy(n),
            "herd" => EventSpec::Herds(n),
            "uninformative" => EventSpec::Uninformative(n),
            "informative" => EventSpec::ActionInformative(n),
            "match-prev" => EventSpec::MatchesPredecessor(n),
            "match-state" => EventSpec::MatchesState(n),
            _ => {
                return Err(format!(
                    "unknown event kind `{kind}` (expected herd-by, herd, uninformative, informative, match-prev, match-state, history, always)"
                ))
            }
        };
        event.validate()?;
        Ok(event)
    }
}

impl From<EventSpec> for String {
    fn from(e: EventSpec) -> String {
        e.to_string()
    }
}

impl TryFrom<String> for EventSpec {
    type Error = String;
    fn try_from(s: String) -> Result<Self, Self::Error> {
        s.parse()
    }
}
