//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits
//! non-zero if any criterion fails.

mod common;

use std::time::{Duration, Instant};

use herdsim::analysis::conditions::{
    check_conditions, NumericMode, HERD_KPOS, HERD_RESTART, MAINTAINED, NO_HERD_K0, PLAYER2_INFORMATIVE, PLAYER4,
};
use herdsim::analysis::enumerate::{discounted_correct, probability};
use herdsim::analysis::{verify_herding_inclusion, EventSpec};
use herdsim::config::bundled;
use herdsim::decision::{cutoff_for, CongestionSpec, Tiebreak};
use herdsim::equilibrium::Game;
use herdsim::numeric::{format_rational, rat, to_f64, Rational};
use herdsim::signal_model::{parse_history, LlrKey, ModelParams, SignalModel};
use num_traits::{One, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const P3_HERD_FLOAT: f64 = 0.9764;
const P3_HERD_TOL: f64 = 5e-4;
const TABLE_TOL: f64 = 1e-12;
const APPENDIX_TOL: f64 = 0.01;
const MC_SIGMAS: f64 = 4.0;

struct Verdict {
    ok: bool,
    detail: String,
}

fn run(id: u32, title: &str, budget: Option<Duration>, f: impl FnOnce() -> Verdict) -> bool {
    let start = Instant::now();
    let v = f();
    let elapsed = start.elapsed();
    let in_time = budget.is_none_or(|b| elapsed <= b);
    let ok = v.ok && in_time;
    let timing = match budget {
        Some(b) => format!("{:.2}s of {:.0}s{}", elapsed.as_secs_f64(), b.as_secs_f64(), if in_time { "" } else { ", over budget" }),
        None => format!("{:.2}s", elapsed.as_secs_f64()),
    };
    println!("{} criterion {id}: {title} [{timing}] {}", if ok { "PASS" } else { "FAIL" }, v.detail);
    ok
}

fn example1(variant: u8) -> (SignalModel, CongestionSpec) {
    let name = if variant == 1 { "example1a" } else { "example1b" };
    let c = bundled(name).unwrap();
    (c.model().unwrap(), c.spec().unwrap())
}

fn closed_form(params: &ModelParams) -> Rational {
    let s = &params.strong_hit + &params.second_hit;
    &s * &s + (Rational::one() - &s) * (Rational::one() - &s)
}

fn criterion1() -> Verdict {
    let (m, spec) = example1(1);
    let zero = spec.with_cost(Rational::zero()).unwrap();
    let event = EventSpec::HerdStartedBy(3);
    let exact = probability(&Game::<Rational>::new(&m, &spec, Tiebreak::PreferR), 6, &event, None).unwrap();
    let float = probability(&Game::<f64>::new(&m, &spec, Tiebreak::PreferR), 6, &event, None).unwrap();
    let at_zero = probability(&Game::<Rational>::new(&m, &zero, Tiebreak::PreferR), 6, &event, None).unwrap();
    let closed = closed_form(m.params());
    let ok = exact == closed && (float - P3_HERD_FLOAT).abs() <= P3_HERD_TOL && at_zero.is_zero();
    Verdict {
        ok,
        detail: format!(
            "exact {} vs closed form {} ({:.6}); float {float:.6}; k=0 gives {}",
            format_rational(&exact),
            format_rational(&closed),
            to_f64(&closed),
            format_rational(&at_zero)
        ),
    }
}

fn criterion2() -> Verdict {
    let groups = [MAINTAINED, PLAYER2_INFORMATIVE, NO_HERD_K0, HERD_KPOS, HERD_RESTART, PLAYER4];
    let mut ok = true;
    let mut detail = Vec::new();
    for variant in [1u8, 2] {
        let (m, spec) = example1(variant);
        let report = check_conditions(&m, spec.k(), 6, NumericMode::Exact).unwrap();
        let failed: Vec<String> = groups
            .iter()
            .filter_map(|g| report.group(g))
            .flat_map(|g| g.entries.iter())
            .filter(|e| !e.holds)
            .map(|e| e.id.clone())
            .collect();
        ok &= failed.is_empty() && groups.iter().all(|g| report.group(g).is_some());
        detail.push(if failed.is_empty() {
            format!("variant {variant}: all hold")
        } else {
            format!("variant {variant}: false {}", failed.join(", "))
        });

        // Push q just below p0 (1 - pS).
        let mut p = m.params().clone();
        p.second_hit = &p.p0 * (Rational::one() - &p.strong_mass) - rat(1, 1 << 20);
        let strict = SignalModel::new(p.clone());
        let relaxed = SignalModel::new_relaxed(p).unwrap();
        let r = check_conditions(&relaxed, spec.k(), 6, NumericMode::Exact).unwrap();
        let flipped = r.entry("weak-beats-prior").is_some_and(|e| !e.holds);
        ok &= flipped;
        detail.push(format!(
            "perturbed lq > l0 {} (strict model {})",
            if flipped { "FALSE" } else { "still TRUE" },
            if strict.is_ok() { "accepted" } else { "rejected" }
        ));
    }
    Verdict { ok, detail: detail.join("; ") }
}

type Terms = [i32; 4];

fn combination(m: &SignalModel, t: &Terms) -> (Rational, f64) {
    let c = m.constants();
    let keys = [LlrKey::L0, LlrKey::LQq, LlrKey::LQ, LlrKey::LNotQ];
    let mut odds = Rational::one();
    let mut llr = 0.0;
    for (k, n) in keys.iter().zip(t) {
        odds *= herdsim::numeric::pow_i(c.odds(*k), *n as i64);
        llr += *n as f64 * c.value(*k);
    }
    (odds, llr)
}

/// Public odds before player 4 after each three-action history, and whether
/// the history is on path.
fn table_rows(m: &SignalModel, spec: &CongestionSpec, expected: &[(&str, Option<Terms>)]) -> (usize, Vec<String>) {
    let exact: Game = Game::new(m, spec, Tiebreak::PreferR);
    let float: Game<f64> = Game::new(m, spec, Tiebreak::PreferR);
    let mut matched = 0;
    let mut misses = Vec::new();
    for (h, terms) in expected {
        let hist = parse_history(h).unwrap();
        let se = exact.state_after(&hist);
        let sf = float.state_after(&hist);
        let ok = match terms {
            Some(t) => {
                let (odds, llr) = combination(m, t);
                se.on_path() && se.odds() == &odds && (sf.llr() - llr).abs() <= TABLE_TOL
            }
            None => !se.on_path(),
        };
        if ok {
            matched += 1;
        } else {
            misses.push(h.to_string());
        }
    }
    (matched, misses)
}

const TABLE_K0: [(&str, Option<Terms>); 8] = [
    ("LLL", Some([1, -1, 0, -2])),
    ("RRR", Some([1, 1, 0, 2])),
    ("LLR", Some([1, -1, 1, -1])),
    ("RRL", Some([1, 1, -1, 1])),
    ("LRL", Some([1, -1, 0, 0])),
    ("RLR", Some([1, 1, 0, 0])),
    ("LRR", Some([1, -1, 1, 1])),
    ("RLL", Some([1, 1, -1, -1])),
];

const TABLE_KPOS: [(&str, Option<Terms>); 8] = [
    ("LLL", Some([1, -2, 0, 0])),
    ("RRR", Some([1, 2, 0, 0])),
    ("LLR", None),
    ("RRL", None),
    ("LRL", Some([1, -1, 0, 0])),
    ("RLR", Some([1, 1, 0, 0])),
    ("LRR", Some([1, 1, 0, 0])),
    ("RLL", Some([1, -1, 0, 0])),
];

fn criterion3() -> Verdict {
    let mut ok = true;
    let mut detail = Vec::new();
    for variant in [1u8, 2] {
        let (m, spec) = example1(variant);
        let zero = spec.with_cost(Rational::zero()).unwrap();
        let (a, miss_a) = table_rows(&m, &zero, &TABLE_K0);
        let (b, miss_b) = table_rows(&m, &spec, &TABLE_KPOS);
        ok &= miss_a.is_empty() && miss_b.is_empty();
        detail.push(format!(
            "variant {variant}: k=0 {a}/8, k>0 {b}/8{}",
            if miss_b.is_empty() { String::new() } else { format!(" (k>0 differs at {})", miss_b.join(" ")) }
        ));
    }
    Verdict { ok, detail: detail.join("; ") }
}

fn criterion4() -> Verdict {
    let mut ok = true;
    let mut detail = Vec::new();
    for variant in [1u8, 2] {
        let (m, spec) = example1(variant);
        let r = verify_herding_inclusion(&m, &spec, 6, Tiebreak::PreferR).unwrap();
        let n = r.counterexample_count();
        ok &= n == 0 && r.players.len() == 6;
        let where_: Vec<String> = r
            .players
            .iter()
            .filter(|p| !p.counterexamples.is_empty())
            .map(|p| format!("player {}: {}", p.player, p.counterexamples.join(" ")))
            .collect();
        detail.push(format!(
            "variant {variant}: {n} counterexamples{}",
            if where_.is_empty() { String::new() } else { format!(" ({})", where_.join(", ")) }
        ));
    }
    Verdict { ok, detail: detail.join("; ") }
}

fn criterion5() -> Verdict {
    let c = bundled("appendix").unwrap();
    let m = c.model().unwrap();
    let spec = c.spec().unwrap();
    let zero = spec.with_cost(Rational::zero()).unwrap();
    let p = |s: &CongestionSpec, e: EventSpec| probability(&Game::<Rational>::new(&m, s, Tiebreak::PreferR), 5, &e, None).unwrap();
    let m0 = p(&zero, EventSpec::MatchesPredecessor(2));
    let m1 = p(&spec, EventSpec::MatchesPredecessor(2));
    let i0 = p(&zero, EventSpec::ActionInformative(3));
    let i1 = p(&spec, EventSpec::ActionInformative(3));
    let ok = (to_f64(&m0) - 0.92).abs() <= APPENDIX_TOL
        && (to_f64(&m1) - 0.94).abs() <= APPENDIX_TOL
        && (to_f64(&i0) - 0.08).abs() <= APPENDIX_TOL
        && i1 == Rational::one();
    Verdict {
        ok,
        detail: format!(
            "P(a2=a1) {:.4} -> {:.4}; P(a3 informative) {:.4} -> {}",
            to_f64(&m0),
            to_f64(&m1),
            to_f64(&i0),
            format_rational(&i1)
        ),
    }
}

fn criterion6() -> Verdict {
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let mut antisym = 0;
    for _ in 0..10_000 {
        let k = rat(rng.random_range(0..1000), 1000);
        let kappa = if rng.random_bool(0.5) { -k } else { k };
        let d = rng.random_range(1..=200);
        let f = rat(rng.random_range(0..=d), d);
        let a = cutoff_for(&kappa, &f).unwrap();
        let b = cutoff_for(&kappa, &(Rational::one() - &f)).unwrap();
        antisym += (a.odds * b.odds != Rational::one()) as usize;
    }
    let mut martingale = 0;
    let mut zero_cost = 0;
    for _ in 0..20 {
        let m = common::random_model(&mut rng);
        let depth = if m.signals().len() == 6 { 4 } else { 5 };
        let k = common::random_cost(&mut rng);
        for spec in [CongestionSpec::differ(k.clone()).unwrap(), CongestionSpec::conform(k.clone()).unwrap()] {
            martingale += common::martingale_violations(&m, &spec, depth);
        }
        zero_cost += (!common::zero_cost_independent(&m, depth)) as usize;
    }
    let sigma = common::monte_carlo_worst_sigma(20, 100_000, 6);
    Verdict {
        ok: antisym == 0 && martingale == 0 && zero_cost == 0 && sigma < MC_SIGMAS,
        detail: format!(
            "antisymmetry failures {antisym}/10000; martingale violations {martingale}; zero-cost mismatches {zero_cost}/20; worst Monte Carlo deviation {sigma:.2} sigma"
        ),
    }
}

fn criterion7() -> Verdict {
    let delta = rat(9, 10);
    let mut ok = true;
    let mut detail = Vec::new();
    for variant in [1u8, 2] {
        let (m, spec) = example1(variant);
        let zero = spec.with_cost(Rational::zero()).unwrap();
        let at = |s: &CongestionSpec| discounted_correct(&Game::<Rational>::new(&m, s, Tiebreak::PreferR), 8, &delta).unwrap();
        let (a, b) = (at(&zero), at(&spec));
        let below = herdsim::numeric::parse_rational(&b.value).unwrap() < herdsim::numeric::parse_rational(&a.value).unwrap();
        ok &= below;
        detail.push(format!("variant {variant}: k=0 {:.9}, k>0 {:.9}", a.float, b.float));
    }
    Verdict { ok, detail: detail.join("; ") }
}

fn main() {
    let secs = |n| Some(Duration::from_secs(n));
    let results = [
        run(1, "player 3 herding probability, example1 configs", secs(1), criterion1),
        run(2, "closed-form condition suite, example1 configs", secs(1), criterion2),
        run(3, "public LLRs before player 4", secs(1), criterion3),
        run(4, "herd-history inclusion to horizon 6", secs(30), criterion4),
        run(5, "six-signal conformity example", secs(1), criterion5),
        run(6, "property suites", secs(120), criterion6),
        run(7, "discounted correct actions, k>0 below k=0", None, criterion7),
    ];
    let failed = results.iter().filter(|ok| !**ok).count();
    println!("{} of {} criteria passed", results.len() - failed, results.len());
    if failed > 0 {
        std::process::exit(1);
    }
}
