//! Finite-difference checks of the full encoder loss on a 3-node entity
//! (one customer, two transactions).

use mtmia::datagen::mock_memorizing_generator;
use mtmia::diffcore::{grad_check, relative_error, Coordinates};
use mtmia::hgnn::{loss_and_gradients, EncoderConfig, EncoderParams};
use mtmia::relgraph::EntitySubgraph;
use rand::seq::index::sample;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::{small_toy, Prepared};

pub const STEP: f64 = 1e-5;
pub const TOLERANCE: f64 = 1e-4;
/// Central differences of a loss near 10 carry about 1e-10 of rounding
/// noise; above this magnitude that noise is below 1e-5 relative.
pub const RESOLVABLE: f64 = 1e-5;

fn three_node(seed: u64) -> (Prepared, EntitySubgraph) {
    let toy = small_toy(2, 2, 2, 2, seed);
    let synth = mock_memorizing_generator(&toy.train, &toy.schema, 0.0, seed).unwrap();
    let p = Prepared::new(&toy, &synth);
    let sub = p.train[0].clone();
    assert_eq!(sub.node_count(), 3);
    (p, sub)
}

/// Every coordinate of a width-8 encoder, scored with the plain relative error.
pub fn compact_error(seed: u64) -> f64 {
    let (p, sub) = three_node(seed);
    let config = EncoderConfig {
        hidden_dim: 8,
        ..EncoderConfig::default()
    };
    let params = EncoderParams::init(&config, &p.schema).unwrap();
    let mut probe = params.clone();
    grad_check(params.store(), STEP, Coordinates::All, |store| {
        *probe.store_mut() = store.clone();
        loss_and_gradients(&probe, &[&sub]).unwrap()
    })
}

/// Default-width encoder: worst relative error over `count` sampled
/// coordinates whose derivative is resolvable, and how many qualified.
pub fn default_width_error(seed: u64, count: usize) -> (f64, usize) {
    let (p, sub) = three_node(seed);
    let params = EncoderParams::init(&EncoderConfig::default(), &p.schema).unwrap();
    let (_, analytic) = loss_and_gradients(&params, &[&sub]).unwrap();
    let flat: Vec<(usize, usize)> = analytic
        .iter()
        .enumerate()
        .flat_map(|(k, g)| (0..g.len()).map(move |i| (k, i)))
        .collect();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let ids: Vec<_> = params.store().ids().collect();
    let mut probe = params.clone();
    let (mut worst, mut used) = (0.0f64, 0);
    for pick in sample(&mut rng, flat.len(), count.min(flat.len())) {
        let (k, i) = flat[pick];
        let base = params.store().get(ids[k]).data()[i];
        let mut at = |x: f64| {
            probe.store_mut().get_mut(ids[k]).data_mut()[i] = x;
            loss_and_gradients(&probe, &[&sub]).unwrap().0
        };
        let numeric = (at(base + STEP) - at(base - STEP)) / (2.0 * STEP);
        at(base);
        let a = analytic[k].data()[i];
        if a.abs() + numeric.abs() >= RESOLVABLE {
            worst = worst.max(relative_error(a, numeric));
            used += 1;
        }
    }
    (worst, used)
}
