//! Closed-form sufficient conditions for herding to rise or fall with the
//! congestion cost, decided exactly.
//!
//! Each condition is a signed sum of LLR constants and cutoff terms compared
//! to zero. With odds ratios, `sum < 0` is equivalent to `product < 1`, so
//! the comparison is exact. `lk(f)` always denotes the cutoff at fraction `f`
//! for a player who dislikes matching; under the conforming payoff the
//! cutoff at `f` equals `lk(1 - f)`.

use std::fmt::Write as _;

use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};

use crate::decision::cutoff_for;
use crate::numeric::{format_rational, pow_i, rat, to_f64, Rational, BOUNDARY_TOLERANCE};
use crate::signal_model::{LlrConstants, LlrKey, SignalModel, Variant};

use super::AnalysisError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum NumericMode {
    #[default]
    Exact,
    Float,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Relation {
    #[serde(rename = "<")]
    Negative,
    #[serde(rename = ">")]
    Positive,
}

/// Signed combination of LLR constants and cutoff terms.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LlrExpr {
    terms: Vec<(i64, LlrKey)>,
    cutoffs: Vec<(i64, Rational)>,
}

impl LlrExpr {
    pub fn new(terms: &[(i64, LlrKey)]) -> Self {
        LlrExpr { terms: terms.to_vec(), cutoffs: Vec::new() }
    }

    pub fn cutoff(mut self, coefficient: i64, f: Rational) -> Self {
        self.cutoffs.push((coefficient, f));
        self
    }

    /// Exact odds product `exp(expr)` at cost `k`.
    pub fn odds(&self, constants: &LlrConstants, k: &Rational) -> Result<Rational, AnalysisError> {
        let mut prod = Rational::one();
        for (c, key) in &self.terms {
            prod *= pow_i(constants.odds(*key), *c);
        }
        for (c, f) in &self.cutoffs {
            prod *= pow_i(&cutoff_for(k, f)?.odds, *c);
        }
        Ok(prod)
    }

    pub fn llr(&self, constants: &LlrConstants, k: &Rational) -> Result<f64, AnalysisError> {
        let mut sum = 0.0;
        for (c, key) in &self.terms {
            sum += *c as f64 * constants.value(*key);
        }
        for (c, f) in &self.cutoffs {
            sum += *c as f64 * cutoff_for(k, f)?.llr;
        }
        Ok(sum)
    }

    pub fn render(&self) -> String {
        let mut out = String::new();
        let mut first = true;
        let mut term = |c: i64, sym: String, out: &mut String| {
            let sign = if c < 0 { "-" } else { "+" };
            if first {
                if c < 0 {
                    out.push('-');
                }
            } else {
                let _ = write!(out, " {sign} ");
            }
            if c.abs() != 1 {
                let _ = write!(out, "{}", c.abs());
            }
            out.push_str(&sym);
            first = false;
        };
        for (c, key) in &self.terms {
            term(*c, key.symbol().to_string(), &mut out);
        }
        for (c, f) in &self.cutoffs {
            term(*c, format!("lk({})", format_rational(f)), &mut out);
        }
        out
    }
}

/// A named inequality evaluated at a fixed cost.
#[derive(Debug, Clone)]
struct Inequality {
    id: String,
    expr: Option<LlrExpr>,
    relation: Relation,
    k: Rational,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConditionEntry {
    pub id: String,
    pub group: String,
    /// Rendered inequality, e.g. `l0 + lQq - lq - lk(1) < 0`.
    pub inequality: String,
    /// Cost at which the terms `lk(.)` are evaluated.
    pub k: String,
    pub holds: bool,
    /// `exp(expr) - 1`; negative iff the expression is negative. Absent in
    /// floating-point mode.
    pub margin: Option<String>,
    pub margin_float: f64,
    pub llr: f64,
    /// Floating-point mode only: the sign is within tolerance of zero.
    pub boundary_uncertain: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConditionGroup {
    pub name: String,
    pub description: String,
    pub entries: Vec<ConditionEntry>,
}

impl ConditionGroup {
    pub fn all_hold(&self) -> bool {
        self.entries.iter().all(|e| e.holds)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Implication {
    pub premises: Vec<String>,
    pub conclusion: String,
    pub premises_hold: bool,
    pub conclusion_holds: bool,
    /// Premises hold but the conclusion fails.
    pub violated: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConditionReport {
    pub variant: Variant,
    pub k: String,
    pub mode: NumericMode,
    /// Periods `2i + 3` covered by the restart family, as `1..=max`.
    pub restart_range: Option<(usize, usize)>,
    pub groups: Vec<ConditionGroup>,
    pub implications: Vec<Implication>,
    /// Condition sets not evaluated for this signal variant.
    pub not_applicable: Vec<String>,
}

impl ConditionReport {
    pub fn group(&self, name: &str) -> Option<&ConditionGroup> {
        self.groups.iter().find(|g| g.name == name)
    }

    pub fn entry(&self, id: &str) -> Option<&ConditionEntry> {
        self.groups.iter().flat_map(|g| &g.entries).find(|e| e.id == id)
    }

    pub fn internal_errors(&self) -> Vec<&Implication> {
        self.implications.iter().filter(|i| i.violated).collect()
    }

    /// All hypothesis groups (everything except derived consequences) hold.
    pub fn all_hypotheses_hold(&self) -> bool {
        self.groups.iter().filter(|g| g.name != IMPLIED).all(ConditionGroup::all_hold)
    }

    /// Whether every group in `names` exists and holds.
    pub fn groups_hold(&self, names: &[&str]) -> bool {
        names.iter().all(|n| self.group(n).is_some_and(ConditionGroup::all_hold))
    }

    pub fn render_text(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "variant {:?}, k = {}, {:?} arithmetic", self.variant, self.k, self.mode);
        for g in &self.groups {
            let _ = writeln!(out, "[{}] {}", g.name, g.description);
            for e in &g.entries {
                let mark = if e.holds { "PASS" } else { "FAIL" };
                let flag = if e.boundary_uncertain { "  (boundary-uncertain)" } else { "" };
                let _ = writeln!(out, "  {mark}  {:<32} {:<44} k={:<8} llr={:+.6}{flag}", e.id, e.inequality, e.k, e.llr);
            }
        }
        if let Some((a, b)) = self.restart_range {
            let _ = writeln!(out, "restart family checked for i = {a}..={b}");
        }
        for i in &self.implications {
            if i.violated {
                let _ = writeln!(out, "INTERNAL ERROR: {} does not follow from {}", i.conclusion, i.premises.join(", "));
            }
        }
        for n in &self.not_applicable {
            let _ = writeln!(out, "not applicable: {n}");
        }
        out
    }
}

pub const MAINTAINED: &str = "maintained";
pub const PLAYER2_INFORMATIVE: &str = "player2-informative";
pub const NO_HERD_K0: &str = "no-herd-k0";
pub const HERD_KPOS: &str = "herd-kpos";
pub const HERD_RESTART: &str = "herd-restart";
pub const PLAYER4: &str = "player4-inclusion";
pub const PLAYER5: &str = "player5-inclusion";
pub const PLAYER6: &str = "player6-inclusion";
pub const CONFORM_MAINTAINED: &str = "conform-maintained";
pub const CONFORM_HERD_K0: &str = "conform-herd-k0";
pub const CONFORM_INFORMATIVE_KPOS: &str = "conform-informative-kpos";
pub const IMPLIED: &str = "implied";

struct Builder<'c> {
    constants: &'c LlrConstants,
    mode: NumericMode,
    groups: Vec<ConditionGroup>,
    evaluated: Vec<(String, bool)>,
}

impl<'c> Builder<'c> {
    fn group(&mut self, name: &str, description: &str, items: Vec<Inequality>) -> Result<(), AnalysisError> {
        let mut entries = Vec::with_capacity(items.len());
        for item in items {
            let e = self.evaluate(name, &item)?;
            self.evaluated.push((e.id.clone(), e.holds));
            entries.push(e);
        }
        self.groups.push(ConditionGroup { name: name.into(), description: description.into(), entries });
        Ok(())
    }

    fn evaluate(&self, group: &str, item: &Inequality) -> Result<ConditionEntry, AnalysisError> {
        let Some(expr) = &item.expr else {
            // The bare requirement k > 0.
            let holds = item.k.is_positive();
            return Ok(ConditionEntry {
                id: item.id.clone(),
                group: group.into(),
                inequality: "k > 0".into(),
                k: format_rational(&item.k),
                holds,
                margin: Some(format_rational(&item.k)),
                margin_float: to_f64(&item.k),
                llr: to_f64(&item.k),
                boundary_uncertain: false,
            });
        };
        let llr = expr.llr(self.constants, &item.k)?;
        let rel = match item.relation {
            Relation::Negative => "<",
            Relation::Positive => ">",
        };
        let inequality = format!("{} {rel} 0", expr.render());
        let (holds, margin, margin_float, uncertain) = match self.mode {
            NumericMode::Exact => {
                let prod = expr.odds(self.constants, &item.k)?;
                let m = prod - Rational::one();
                let holds = match item.relation {
                    Relation::Negative => m.is_negative(),
                    Relation::Positive => m.is_positive(),
                };
                (holds, Some(format_rational(&m)), to_f64(&m), false)
            }
            NumericMode::Float => {
                let m = llr.exp() - 1.0;
                let holds = match item.relation {
                    Relation::Negative => llr < 0.0,
                    Relation::Positive => llr > 0.0,
                };
                (holds, None, m, m.abs() < BOUNDARY_TOLERANCE)
            }
        };
        Ok(ConditionEntry {
            id: item.id.clone(),
            group: group.into(),
            inequality,
            k: format_rational(&item.k),
            holds,
            margin,
            margin_float,
            llr,
            boundary_uncertain: uncertain,
        })
    }

    fn holds(&self, id: &str) -> bool {
        self.evaluated.iter().find(|(i, _)| i == id).is_some_and(|(_, h)| *h)
    }
}

fn neg(id: &str, expr: LlrExpr, k: &Rational) -> Inequality {
    Inequality { id: id.into(), expr: Some(expr), relation: Relation::Negative, k: k.clone() }
}

fn pos(id: &str, expr: LlrExpr, k: &Rational) -> Inequality {
    Inequality { id: id.into(), expr: Some(expr), relation: Relation::Positive, k: k.clone() }
}

fn cost_positive(id: &str, k: &Rational) -> Inequality {
    Inequality { id: id.into(), expr: None, relation: Relation::Positive, k: k.clone() }
}

/// Evaluates every condition set for the model's signal variant at cost `k`.
/// `horizon` bounds the restart family at `ceil(horizon / 2)`.
pub fn check_conditions(
    model: &SignalModel,
    k: &Rational,
    horizon: usize,
    mode: NumericMode,
) -> Result<ConditionReport, AnalysisError> {
    let constants = model.constants();
    let mut b = Builder { constants: &constants, mode, groups: Vec::new(), evaluated: Vec::new() };
    let zero = Rational::zero();
    let one = Rational::one();
    let (implications, restart_range, not_applicable) = match model.variant() {
        Variant::Baseline4 => {
            let range = baseline(&mut b, k, &zero, &one, horizon)?;
            (baseline_implications(&b), range, vec!["conforming-payoff conditions (six-signal model only)".into()])
        }
        Variant::Appendix6 => {
            appendix(&mut b, k, &zero, &one)?;
            (appendix_implications(&b), None, vec!["differing-payoff conditions (four-signal model only)".into()])
        }
    };
    Ok(ConditionReport {
        variant: model.variant(),
        k: format_rational(k),
        mode,
        restart_range,
        groups: b.groups,
        implications,
        not_applicable,
    })
}

use LlrKey::*;

fn baseline(
    b: &mut Builder<'_>,
    k: &Rational,
    zero: &Rational,
    one: &Rational,
    horizon: usize,
) -> Result<Option<(usize, usize)>, AnalysisError> {
    b.group(
        MAINTAINED,
        "first player follows own signal; second player does not ignore a strong signal to differ",
        vec![
            pos("weak-beats-prior", LlrExpr::new(&[(1, Lq), (-1, L0)]), k),
            pos("strong-beats-prior", LlrExpr::new(&[(1, LQ), (-1, L0)]), k),
            neg("no-anti-herd-player2", LlrExpr::new(&[(1, L0), (-1, LQq), (-1, LQ)]).cutoff(1, one.clone()), k),
        ],
    )?;
    b.group(
        PLAYER2_INFORMATIVE,
        "second player responds to the signal after either first action",
        vec![
            pos("player2-weak-beats-prior", LlrExpr::new(&[(1, Lq), (-1, L0)]), k),
            neg("player2-after-L", LlrExpr::new(&[(1, L0), (-1, LQq), (-1, LQ)]).cutoff(-1, zero.clone()), k),
            neg("player2-after-R", LlrExpr::new(&[(1, L0), (1, LQq), (-1, LQ)]).cutoff(-1, one.clone()), k),
        ],
    )?;
    b.group(
        NO_HERD_K0,
        "without congestion the third player stays informative after any two actions",
        vec![
            neg("k0-weak-below-average", LlrExpr::new(&[(1, L0), (-1, LQq), (1, Lq)]), zero),
            neg("k0-strong-beats-pooled", LlrExpr::new(&[(1, L0), (1, LQq), (1, LNotQ), (-1, LQ)]), zero),
        ],
    )?;
    b.group(
        HERD_KPOS,
        "with congestion the third player herds after two equal actions",
        vec![
            cost_positive("cost-positive", k),
            neg("player2-follows-weak", LlrExpr::new(&[(1, L0), (1, LQq), (-1, Lq)]).cutoff(-1, one.clone()), k),
            neg("player3-herds", LlrExpr::new(&[(1, L0), (-2, LQq), (1, LQ)]).cutoff(1, one.clone()), k),
        ],
    )?;
    let top = horizon.div_ceil(2).max(1);
    let restart = (1..=top)
        .map(|i| {
            let f = rat(i as i64 + 1, 2 * i as i64 + 1);
            neg(&format!("restart-{i}"), LlrExpr::new(&[(1, L0), (1, LQq), (-1, Lq)]).cutoff(-1, f), k)
        })
        .collect();
    b.group(HERD_RESTART, "herd starts after two equal actions following a restart", restart)?;
    b.group(
        PLAYER4,
        "fourth player herds at least as often with congestion",
        vec![neg("player4-pooled-below-average", LlrExpr::new(&[(1, L0), (-1, LQq), (1, LNotQ)]), k)],
    )?;
    b.group(
        PLAYER5,
        "fifth player herds at least as often with congestion",
        vec![neg("player5-pooled-below-average", LlrExpr::new(&[(1, L0), (-1, LQq), (1, LNotQ)]), k)],
    )?;
    b.group(
        PLAYER6,
        "sixth player herds at least as often with congestion",
        vec![neg("player6-strong-beats-two-average", LlrExpr::new(&[(1, L0), (2, LQq), (-1, LNotQ), (-1, LQ)]), k)],
    )?;
    b.group(
        IMPLIED,
        "consequences used along the way; each must hold whenever its premises do",
        vec![
            neg("k0-player2-after-R", LlrExpr::new(&[(1, L0), (1, LQq), (-1, LQ)]).cutoff(-1, one.clone()), zero),
            neg("kpos-player2-after-R", LlrExpr::new(&[(1, L0), (1, LQq), (-1, LQ)]).cutoff(-1, one.clone()), k),
            pos("player3-herds-after-R", LlrExpr::new(&[(1, L0), (2, LQq), (-1, LQ)]).cutoff(-1, one.clone()), k),
            pos("player2-follows-weak-after-L", LlrExpr::new(&[(1, L0), (-1, LQq), (1, Lq)]).cutoff(1, one.clone()), k),
            neg("no-anti-herd-weak", LlrExpr::new(&[(1, L0), (-1, LQq), (-1, Lq)]).cutoff(1, one.clone()), k),
            pos("player2-strong-R-after-R", LlrExpr::new(&[(1, L0), (1, LQq), (1, LQ)]).cutoff(-1, one.clone()), k),
            pos("player4-k0-after-RLL", LlrExpr::new(&[(1, L0), (1, LQq), (-1, LNotQ)]), zero),
        ],
    )?;
    Ok(Some((1, top)))
}

fn implication(b: &Builder<'_>, premises: &[&str], conclusion: &str) -> Implication {
    let premises_hold = premises.iter().all(|p| b.holds(p));
    let conclusion_holds = b.holds(conclusion);
    Implication {
        premises: premises.iter().map(|s| s.to_string()).collect(),
        conclusion: conclusion.into(),
        premises_hold,
        conclusion_holds,
        violated: premises_hold && !conclusion_holds,
    }
}

fn baseline_implications(b: &Builder<'_>) -> Vec<Implication> {
    vec![
        implication(b, &["k0-strong-beats-pooled"], "k0-player2-after-R"),
        implication(b, &["player2-follows-weak"], "kpos-player2-after-R"),
        implication(b, &["player3-herds"], "player3-herds-after-R"),
        implication(b, &["player2-follows-weak"], "player2-follows-weak-after-L"),
        implication(b, &["player3-herds"], "no-anti-herd-weak"),
        implication(b, &["player2-after-L"], "player2-strong-R-after-R"),
        implication(b, &[], "player4-k0-after-RLL"),
        implication(b, &["weak-beats-prior"], "strong-beats-prior"),
    ]
}

fn appendix(b: &mut Builder<'_>, k: &Rational, zero: &Rational, one: &Rational) -> Result<(), AnalysisError> {
    b.group(
        CONFORM_MAINTAINED,
        "first player follows own signal",
        vec![pos("weak-beats-prior", LlrExpr::new(&[(1, LEta), (-1, L0)]), k)],
    )?;
    b.group(
        CONFORM_HERD_K0,
        "without a taste for conformity the third player herds after two equal actions",
        vec![
            neg("k0-medium-below-pooled", LlrExpr::new(&[(1, L0), (1, LQqEta), (-1, Lq)]), zero),
            neg("k0-weak-below-pooled", LlrExpr::new(&[(1, L0), (-1, LQqEta), (1, LEta)]), zero),
            neg("k0-player3-herds", LlrExpr::new(&[(1, L0), (-1, LQqEta), (-1, LNotqQ), (1, LQ)]), zero),
        ],
    )?;
    b.group(
        CONFORM_INFORMATIVE_KPOS,
        "with a taste for conformity the third player stays informative",
        vec![
            cost_positive("cost-positive", k),
            neg("player2-conforms-on-medium", LlrExpr::new(&[(1, L0), (-1, LQqEta), (1, Lq)]).cutoff(-1, one.clone()), k),
            neg(
                "player3-strong-beats-pooled",
                LlrExpr::new(&[(1, L0), (1, LQqEta), (1, LNotQ), (-1, LQ)]).cutoff(1, one.clone()),
                k,
            ),
        ],
    )?;
    b.group(
        IMPLIED,
        "consequences used along the way; each must hold whenever its premises do",
        vec![
            pos("k0-medium-R-after-L", LlrExpr::new(&[(1, L0), (-1, LQqEta), (1, Lq)]), zero),
            pos("k0-weak-L-after-R", LlrExpr::new(&[(1, L0), (1, LQqEta), (-1, LEta)]), zero),
            neg("player2-strong-L-after-R", LlrExpr::new(&[(1, L0), (1, LQqEta), (-1, LQ)]).cutoff(1, one.clone()), k),
        ],
    )?;
    Ok(())
}

fn appendix_implications(b: &Builder<'_>) -> Vec<Implication> {
    vec![
        implication(b, &["k0-medium-below-pooled"], "k0-medium-R-after-L"),
        implication(b, &["k0-weak-below-pooled"], "k0-weak-L-after-R"),
        implication(b, &["player3-strong-beats-pooled"], "player2-strong-L-after-R"),
    ]
}

/// Named condition collections for scans.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum TargetSet {
    /// Every differ-mode hypothesis, players two through six.
    HerdIncrease,
    HerdKpos,
    NoHerdK0,
    Player2Informative,
    Player6,
    /// Both conforming-payoff condition sets.
    ConformReducesHerding,
}

impl TargetSet {
    pub fn groups(self) -> &'static [&'static str] {
        match self {
            TargetSet::HerdIncrease => {
                &[MAINTAINED, PLAYER2_INFORMATIVE, NO_HERD_K0, HERD_KPOS, PLAYER4, PLAYER5, PLAYER6]
            }
            TargetSet::HerdKpos => &[MAINTAINED, HERD_KPOS],
            TargetSet::NoHerdK0 => &[MAINTAINED, NO_HERD_K0],
            TargetSet::Player2Informative => &[PLAYER2_INFORMATIVE],
            TargetSet::Player6 => &[PLAYER6],
            TargetSet::ConformReducesHerding => &[CONFORM_MAINTAINED, CONFORM_HERD_K0, CONFORM_INFORMATIVE_KPOS],
        }
    }

    pub fn variant(self) -> Variant {
        match self {
            TargetSet::ConformReducesHerding => Variant::Appendix6,
            _ => Variant::Baseline4,
        }
    }

    pub fn satisfied_by(self, report: &ConditionReport) -> bool {
        report.variant == self.variant() && report.groups_hold(self.groups())
    }
}
