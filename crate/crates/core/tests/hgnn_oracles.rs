mod common;

use common::{small_toy, Prepared};
use mtmia::datagen::mock_memorizing_generator;
use mtmia::diffcore::Tensor;
use mtmia::hgnn::{
    attention_pool, encode_subgraph, initial_states, message_pass, reconstruction_loss,
    EncoderConfig, EncoderParams,
};
use mtmia::relgraph::EntitySubgraph;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const D: usize = 6;
const SLOPE: f64 = 0.2;

fn setup(children: usize, seed: u64) -> (Prepared, EncoderParams) {
    let toy = small_toy(3, 3, children, children, seed);
    let synth = mock_memorizing_generator(&toy.train, &toy.schema, 0.0, seed).unwrap();
    let p = Prepared::new(&toy, &synth);
    let config = EncoderConfig {
        hidden_dim: D,
        seed,
        ..EncoderConfig::default()
    };
    let params = EncoderParams::init(&config, &p.schema).unwrap();
    (p, params)
}

fn weight<'a>(params: &'a EncoderParams, name: &str) -> &'a Tensor {
    let store = params.store();
    store.get(store.id(name).unwrap_or_else(|| panic!("no parameter {name}")))
}

/// Row vector times matrix.
fn vm(x: &[f64], w: &Tensor) -> Vec<f64> {
    let (rows, cols) = w.shape();
    assert_eq!(rows, x.len());
    (0..cols)
        .map(|c| (0..rows).map(|r| x[r] * w.get(r, c)).sum())
        .collect()
}

fn plus(a: &[f64], b: &[f64]) -> Vec<f64> {
    a.iter().zip(b).map(|(x, y)| x + y).collect()
}

fn leaky(v: &[f64]) -> Vec<f64> {
    v.iter().map(|&x| if x > 0.0 { x } else { SLOPE * x }).collect()
}

fn close(a: &[f64], b: &[f64], tol: f64) {
    assert_eq!(a.len(), b.len());
    for (x, y) in a.iter().zip(b) {
        assert!((x - y).abs() <= tol, "{x} vs {y}");
    }
}

fn random_states(sub: &EntitySubgraph, rng: &mut ChaCha8Rng) -> Vec<Tensor> {
    (0..2)
        .map(|t| {
            let n = sub.nodes_of(t).len();
            let data = (0..n * D).map(|_| rng.random_range(-1.0..1.0)).collect();
            Tensor::from_vec(n, D, data).unwrap()
        })
        .collect()
}

const FWD_SRC: &str = "layer0.transactions.customer_id.head0.src";
const REV_SRC: &str = "layer0.rev.transactions.customer_id.head0.src";

#[test]
fn isolated_root_passes_through_residual() {
    let (p, params) = setup(0, 1);
    let sub = &p.train[0];
    assert_eq!(sub.node_count(), 1);
    let h0 = initial_states(&params, sub).unwrap();
    let h1 = message_pass(&params, sub, 0, &h0).unwrap();
    close(h1[0].row(0), &leaky(h0[0].row(0)), 0.0);
}

#[test]
fn single_neighbour_gets_full_weight_whatever_the_logit() {
    let (p, mut params) = setup(1, 2);
    let sub = p.train[0].clone();
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let h = random_states(&sub, &mut rng);
    let hc = h[0].row(0).to_vec();
    let ht = h[1].row(0).to_vec();
    let want_c = leaky(&plus(&hc, &vm(&ht, weight(&params, FWD_SRC))));
    let want_t = leaky(&plus(&ht, &vm(&hc, weight(&params, REV_SRC))));
    for scale in [1.0, 50.0, -300.0] {
        let store = params.store_mut();
        for name in [
            "layer0.transactions.customer_id.head0.att",
            "layer0.rev.transactions.customer_id.head0.att",
        ] {
            let id = store.id(name).unwrap();
            for v in store.get_mut(id).data_mut() {
                *v *= scale;
            }
        }
        let out = message_pass(&params, &sub, 0, &h).unwrap();
        close(out[0].row(0), &want_c, 1e-12);
        close(out[1].row(0), &want_t, 1e-12);
    }
}

#[test]
fn star_of_identical_neighbours_matches_single_message() {
    let (p, params) = setup(3, 3);
    let sub = &p.train[0];
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let mut h = random_states(sub, &mut rng);
    let common: Vec<f64> = (0..D).map(|_| rng.random_range(-1.0..1.0)).collect();
    h[1] = Tensor::from_rows(&vec![common.clone(); 3], D).unwrap();
    let out = message_pass(&params, sub, 0, &h).unwrap();
    let hc = h[0].row(0).to_vec();
    let want = leaky(&plus(&hc, &vm(&common, weight(&params, FWD_SRC))));
    close(out[0].row(0), &want, 1e-12);
}

#[test]
fn pooling_matches_brute_force_softmax() {
    let (_, params) = setup(1, 4);
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let rows: Vec<Vec<f64>> = (0..4)
        .map(|_| (0..D).map(|_| rng.random_range(-2.0..2.0)).collect())
        .collect();
    let states = Tensor::from_rows(&rows, D).unwrap();
    let got = attention_pool(&params, 1, &states, &[0; 4], 1).unwrap();

    let u = weight(&params, "pool.transactions.score_proj");
    let v = weight(&params, "pool.transactions.score_vec");
    let scores: Vec<f64> = rows
        .iter()
        .map(|r| {
            let t: Vec<f64> = vm(r, u).into_iter().map(f64::tanh).collect();
            vm(&t, v)[0]
        })
        .collect();
    let z: f64 = scores.iter().map(|s| s.exp()).sum();
    let mut want = vec![0.0; D];
    for (r, s) in rows.iter().zip(&scores) {
        for k in 0..D {
            want[k] += s.exp() / z * r[k];
        }
    }
    close(got.row(0), &want, 1e-12);
    let single = attention_pool(&params, 1, &Tensor::from_rows(&rows[..1], D).unwrap(), &[0], 1)
        .unwrap();
    close(single.row(0), &rows[0], 0.0);
}

#[test]
fn childless_entity_has_zero_context_and_unfused_output() {
    let (p, params) = setup(0, 5);
    for sub in &p.train {
        let e = encode_subgraph(&params, sub).unwrap();
        assert!(e.z_context.iter().all(|&v| v == 0.0));
        assert_eq!(e.z_final, e.z_parent);
    }
}

#[test]
fn parent_only_loss_is_mean_decoder_error() {
    let toy = small_toy(4, 1, 2, 1, 6);
    let synth = mock_memorizing_generator(&toy.train, &toy.schema, 0.0, 6).unwrap();
    let p = Prepared::new(&toy, &synth);
    let config = EncoderConfig {
        hidden_dim: D,
        lambda_context: 0.0,
        ..EncoderConfig::default()
    };
    let params = EncoderParams::init(&config, &p.schema).unwrap();
    let subs: Vec<&EntitySubgraph> = p.train.iter().collect();
    let loss = reconstruction_loss(&params, &subs).unwrap();

    let dense = |x: &[f64], name: &str| {
        let w = weight(&params, &format!("{name}.weight"));
        let b = weight(&params, &format!("{name}.bias"));
        plus(&vm(x, w), b.row(0))
    };
    let mut total = 0.0;
    for sub in &subs {
        let z = encode_subgraph(&params, sub).unwrap().z_final;
        let hidden = leaky(&dense(&z, "decoder.parent.hidden"));
        let recon = dense(&hidden, "decoder.parent.out");
        total += recon
            .iter()
            .zip(sub.root_features())
            .map(|(a, b)| (a - b).powi(2))
            .sum::<f64>();
    }
    let want = total / subs.len() as f64;
    assert!((loss - want).abs() <= 1e-12 * want.max(1.0), "{loss} vs {want}");
}
