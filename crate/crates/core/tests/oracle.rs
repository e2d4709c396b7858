mod common;

use std::collections::BTreeMap;

use herdsim::analysis::enumerate::walk;
use herdsim::decision::{CongestionSpec, Tiebreak};
use herdsim::equilibrium::Game;
use herdsim::numeric::{rat, Rational};
use herdsim::signal_model::{Action, ModelParams, SignalModel, Variant};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn engine(model: &SignalModel, spec: &CongestionSpec, tb: Tiebreak, depth: usize) -> BTreeMap<Vec<Action>, ([Rational; 2], Vec<Action>)> {
    let game: Game = Game::new(model, spec, tb);
    let mut out = BTreeMap::new();
    walk(&game, depth, |node| {
        out.insert(node.history.to_vec(), (node.weights.clone(), node.strategies.last().unwrap().actions()));
    });
    out
}

fn agree(model: &SignalModel, spec: &CongestionSpec, tb: Tiebreak, depth: usize) {
    let ours = engine(model, spec, tb, depth);
    let reference = common::oracle(model, spec, tb, depth);
    let keys: Vec<_> = ours.keys().collect();
    let ref_keys: Vec<_> = reference.keys().collect();
    assert_eq!(keys, ref_keys, "reachable histories differ for {:?}", model.params());
    for (h, (w, s)) in &ours {
        let r = &reference[h];
        assert_eq!(w, &r.weights, "weights after {h:?}");
        assert_eq!(s, &r.strategy, "strategy after {h:?} for {:?} k={}", model.params(), spec.k());
    }
}

#[test]
fn random_models_match_signal_path_oracle() {
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    for _ in 0..40 {
        let model = common::random_model(&mut rng);
        let k = common::random_cost(&mut rng);
        let depth = if model.variant() == Variant::Appendix6 { 4 } else { 5 };
        for spec in [CongestionSpec::differ(k.clone()).unwrap(), CongestionSpec::conform(k.clone()).unwrap()] {
            for tb in [Tiebreak::PreferR, Tiebreak::PreferL] {
                agree(&model, &spec, tb, depth);
            }
        }
    }
}

#[test]
fn shipped_parameters_match_oracle() {
    let cases = [
        (ModelParams::baseline(rat(1, 2), rat(61, 64), rat(15611, 16384), rat(9, 256)), rat(1, 3), 6),
        (ModelParams::baseline(rat(5, 8), rat(61, 64), rat(3903, 4096), rat(9, 256)), rat(1, 100), 6),
        (ModelParams::baseline(rat(1, 2), rat(1, 16), rat(9, 256), rat(33, 64)), rat(1, 50), 6),
    ];
    for (params, k, depth) in cases {
        let m = SignalModel::new(params).unwrap();
        agree(&m, &CongestionSpec::differ(k).unwrap(), Tiebreak::PreferR, depth);
    }
    let appendix = ModelParams::appendix(
        rat(1, 2),
        rat(4, 5),
        rat(1, 10),
        rat(1, 10),
        rat(197, 250),
        rat(233, 2500),
        rat(2501, 50000),
    );
    let m = SignalModel::new(appendix).unwrap();
    agree(&m, &CongestionSpec::conform(rat(1, 100)).unwrap(), Tiebreak::PreferR, 4);
}
