//! Shared helpers for the integration tests: random valid parameter draws
//! and a belief oracle built directly from signal sequences.

#![allow(dead_code)]

use std::collections::BTreeMap;

use herdsim::decision::{CongestionSpec, Tiebreak};
use herdsim::numeric::{rat, Rational};
use herdsim::signal_model::{Action, ModelParams, SignalModel, State};
use num_traits::{One, Zero};
use rand::Rng;

/// A valid four-signal model with parameters on a 1/64 grid.
pub fn random_baseline(rng: &mut impl Rng) -> ModelParams {
    let p0 = rat(rng.random_range(32..=56), 64);
    let ps_big = rat(rng.random_range(4..=60), 64);
    let r = rng.random_range(34..=63);
    let t = rng.random_range(33..r);
    let q_big = &ps_big * rat(r, 64);
    let q = (Rational::one() - &ps_big) * rat(t, 64);
    ModelParams::baseline(p0, ps_big, q_big, q)
}

/// A valid six-signal model.
pub fn random_appendix(rng: &mut impl Rng) -> ModelParams {
    let a = rng.random_range(1..=29);
    let b = rng.random_range(1..=30 - a);
    let (ps_big, ps) = (rat(a, 32), rat(b, 32));
    let psig = Rational::one() - &ps_big - &ps;
    let r1 = rng.random_range(35..=63);
    let r2 = rng.random_range(34..r1);
    let r3 = rng.random_range(33..r2);
    let p0 = rat(rng.random_range(32..=48), 64);
    ModelParams::appendix(
        p0,
        ps_big.clone(),
        ps.clone(),
        psig.clone(),
        &ps_big * rat(r1, 64),
        &ps * rat(r2, 64),
        &psig * rat(r3, 64),
    )
}

pub fn random_model(rng: &mut impl Rng) -> SignalModel {
    let params = if rng.random_bool(0.75) { random_baseline(rng) } else { random_appendix(rng) };
    SignalModel::new(params).expect("generated parameters are valid")
}

pub fn random_cost(rng: &mut impl Rng) -> Rational {
    rat(rng.random_range(0..=40), 100)
}

/// What the oracle knows about one action history.
#[derive(Debug, Clone)]
pub struct OracleNode {
    /// `[Pr(h | L), Pr(h | R)]`.
    pub weights: [Rational; 2],
    /// Action per signal index of the player moving after `h`.
    pub strategy: Vec<Action>,
}

/// Beliefs from first principles: every signal sequence is played out, the
/// public posterior after `h` is Bayes' rule over the sequences producing
/// `h`, and each player compares expected payoffs directly. A history no
/// sequence produces keeps its parent's posterior.
pub fn oracle(model: &SignalModel, spec: &CongestionSpec, tiebreak: Tiebreak, depth: usize) -> BTreeMap<Vec<Action>, OracleNode> {
    let n = model.signals().len();
    let p0 = model.p0().clone();
    let probs: Vec<[Rational; 2]> =
        (0..n).map(|i| [model.prob_by_index(i, State::L).clone(), model.prob_by_index(i, State::R).clone()]).collect();
    let mut out: BTreeMap<Vec<Action>, OracleNode> = BTreeMap::new();
    let mut posterior: BTreeMap<Vec<Action>, Rational> = BTreeMap::new();
    posterior.insert(Vec::new(), p0.clone());
    out.insert(
        Vec::new(),
        OracleNode { weights: [Rational::one(), Rational::one()], strategy: choose(&p0, &probs, &[], spec, tiebreak) },
    );
    for level in 1..=depth {
        let mut weights: BTreeMap<Vec<Action>, [Rational; 2]> = BTreeMap::new();
        let mut seq = vec![0usize; level];
        loop {
            let mut h = Vec::with_capacity(level);
            for &s in &seq {
                let a = out[&h].strategy[s];
                h.push(a);
            }
            let w = weights.entry(h).or_insert_with(|| [Rational::zero(), Rational::zero()]);
            for state in 0..2 {
                let mut p = Rational::one();
                for &s in &seq {
                    p *= &probs[s][state];
                }
                w[state] += p;
            }
            let mut i = 0;
            while i < level {
                seq[i] += 1;
                if seq[i] < n {
                    break;
                }
                seq[i] = 0;
                i += 1;
            }
            if i == level {
                break;
            }
        }
        for (h, w) in weights {
            if w[0].is_zero() && w[1].is_zero() {
                continue;
            }
            let num = &p0 * &w[1];
            let den = &num + (Rational::one() - &p0) * &w[0];
            let post = num / den;
            let strategy = choose(&post, &probs, &h, spec, tiebreak);
            posterior.insert(h.clone(), post);
            out.insert(h, OracleNode { weights: w, strategy });
        }
    }
    out
}

/// Action per signal from the expected payoff difference
/// `2 Pr(R | info) - 1 + (1 - 2f) κ`.
fn choose(public: &Rational, probs: &[[Rational; 2]], h: &[Action], spec: &CongestionSpec, tiebreak: Tiebreak) -> Vec<Action> {
    let period = h.len() + 1;
    let f = if h.is_empty() {
        rat(1, 2)
    } else {
        Rational::new(h.iter().filter(|a| **a == Action::R).count().into(), h.len().into())
    };
    let one = Rational::one();
    let kappa = spec.signed_cost_at(period);
    probs
        .iter()
        .map(|p| {
            let num = public * &p[1];
            let post = &num / (&num + (&one - public) * &p[0]);
            let diff = rat(2, 1) * post - &one + (&one - rat(2, 1) * &f) * &kappa;
            if diff > Rational::zero() || (diff.is_zero() && tiebreak == Tiebreak::PreferR) {
                Action::R
            } else {
                Action::L
            }
        })
        .collect()
}

use herdsim::analysis::enumerate::{probability, walk};
use herdsim::analysis::{monte_carlo, EventSpec};
use herdsim::decision::{CongestionMode, CongestionScope};
use herdsim::equilibrium::{Game, Strategy};

/// Nodes where action probabilities fail to sum to one per state, or where
/// averaging the posterior over actions misses the current public belief.
pub fn martingale_violations(model: &SignalModel, spec: &CongestionSpec, depth: usize) -> usize {
    let game: Game = Game::new(model, spec, Tiebreak::PreferR);
    let prior_odds = model.prior_odds();
    let one = Rational::one();
    let mut bad = 0;
    walk(&game, depth, |node| {
        let odds = node.state.odds().clone();
        if node.state.on_path()
            && node.weights[0] > Rational::zero()
            && odds != &prior_odds * &node.weights[1] / &node.weights[0]
        {
            bad += 1;
        }
        let p = &odds / (&one + &odds);
        let strategy = node.strategies.last().unwrap();
        let mut sums = [Rational::zero(), Rational::zero()];
        let mut mean = Rational::zero();
        for a in Action::ALL {
            let [pl, pr] = game.action_probabilities(strategy, a);
            sums[0] += &pl;
            sums[1] += &pr;
            let unconditional = (&one - &p) * &pl + &p * &pr;
            if unconditional.is_zero() {
                continue;
            }
            let post_odds = &odds * game.increment(strategy, a).odds;
            mean += unconditional * (&post_odds / (&one + &post_odds));
        }
        if sums != [one.clone(), one.clone()] || mean != p {
            bad += 1;
        }
    });
    bad
}

pub type Tree = BTreeMap<Vec<Action>, ([Rational; 2], Strategy)>;

pub fn tree(model: &SignalModel, spec: &CongestionSpec, depth: usize) -> Tree {
    let game: Game = Game::new(model, spec, Tiebreak::PreferR);
    let mut out = BTreeMap::new();
    walk(&game, depth, |node| {
        out.insert(node.history.to_vec(), (node.weights.clone(), *node.strategies.last().unwrap()));
    });
    out
}

/// Every zero-cost variant of mode and scope.
pub fn zero_cost_specs() -> Vec<CongestionSpec> {
    let z = Rational::zero;
    vec![
        CongestionSpec::differ(z()).unwrap(),
        CongestionSpec::conform(z()).unwrap(),
        CongestionSpec::new(z(), CongestionMode::Differ, CongestionScope::Window(1)).unwrap(),
        CongestionSpec::new(z(), CongestionMode::Conform, CongestionScope::Window(3)).unwrap(),
        CongestionSpec::new(z(), CongestionMode::Differ, CongestionScope::Discounted(rat(1, 2))).unwrap(),
        CongestionSpec::new(z(), CongestionMode::Conform, CongestionScope::Discounted(rat(9, 10))).unwrap(),
    ]
}

pub fn zero_cost_independent(model: &SignalModel, depth: usize) -> bool {
    let specs = zero_cost_specs();
    let first = tree(model, &specs[0], depth);
    specs[1..].iter().all(|s| tree(model, s, depth) == first)
}

pub const MC_EVENTS: [&str; 5] = ["herd-by:3", "match-state:4", "match-prev:3", "informative:4", "herd:5"];

/// Largest deviation, in binomial standard deviations, of Monte Carlo
/// estimates from exact values over `sets` random parameter sets.
pub fn monte_carlo_worst_sigma(sets: usize, runs: u64, seed: u64) -> f64 {
    use rand::SeedableRng;
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    let mut worst: f64 = 0.0;
    for i in 0..sets {
        let model = random_model(&mut rng);
        let k = random_cost(&mut rng);
        let spec = if rng.random_bool(0.5) {
            CongestionSpec::differ(k).unwrap()
        } else {
            CongestionSpec::conform(k).unwrap()
        };
        let game: Game = Game::new(&model, &spec, Tiebreak::PreferR);
        let event: EventSpec = MC_EVENTS[i % MC_EVENTS.len()].parse().unwrap();
        let exact = herdsim::numeric::to_f64(&probability(&game, 6, &event, None).unwrap());
        let r = monte_carlo(&game, 6, &event, runs, seed + i as u64).unwrap();
        worst = worst.max(r.sigmas_from(exact));
    }
    worst
}
