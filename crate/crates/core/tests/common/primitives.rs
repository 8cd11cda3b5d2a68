//! Finite-difference checks of individual tape primitives.

use std::sync::Arc;

use mtmia::diffcore::{grad_check, Coordinates, ParamStore, Tape, Tensor, Var};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub const STEP: f64 = 1e-5;
pub const PRIMITIVE_TOL: f64 = 1e-6;

pub fn random(rng: &mut ChaCha8Rng, rows: usize, cols: usize) -> Tensor {
    let data = (0..rows * cols).map(|_| rng.random_range(-1.5..1.5)).collect();
    Tensor::from_vec(rows, cols, data).unwrap()
}

/// Worst relative error of `build`'s gradient, with the output reduced to
/// a scalar by squared error against a fixed random target.
pub fn check<F>(seed: u64, shapes: &[(usize, usize)], build: F) -> f64
where
    F: Fn(&mut Tape, &[Var]) -> Var,
{
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut store = ParamStore::new();
    for (k, &(r, c)) in shapes.iter().enumerate() {
        store.insert(format!("p{k}"), random(&mut rng, r, c)).unwrap();
    }
    let probe = {
        let mut tape = Tape::new();
        let vars: Vec<Var> = store.ids().map(|id| tape.param(&store, id)).collect();
        let out = build(&mut tape, &vars);
        tape.value(out).shape()
    };
    let target = random(&mut rng, probe.0, probe.1);
    let f = |s: &ParamStore| {
        let mut tape = Tape::new();
        let vars: Vec<Var> = s.ids().map(|id| tape.param(s, id)).collect();
        let out = build(&mut tape, &vars);
        let t = tape.constant(target.clone());
        let loss = tape.squared_error(out, t).unwrap();
        let grads = tape.backward(loss).unwrap();
        (tape.value(loss).data()[0], grads.for_params(s))
    };
    grad_check(&store, STEP, Coordinates::All, f)
}

/// Worst error of every primitive, each on its own random instance.
pub fn primitive_errors() -> Vec<(&'static str, f64)> {
    let gather: Arc<[usize]> = Arc::from(vec![2, 0, 2, 1, 2]);
    let seg: Arc<[usize]> = Arc::from(vec![0, 2, 0, 2, 2]);
    let soft: Arc<[usize]> = Arc::from(vec![1, 0, 1, 1, 0, 3]);
    vec![
        ("matmul", check(1, &[(3, 4), (4, 2)], |t, v| t.matmul(v[0], v[1]).unwrap())),
        ("add", check(2, &[(3, 4), (3, 4)], |t, v| t.add(v[0], v[1]).unwrap())),
        ("add row broadcast", check(3, &[(3, 4), (1, 4)], |t, v| t.add(v[0], v[1]).unwrap())),
        ("mul", check(4, &[(3, 4), (3, 4)], |t, v| t.mul(v[0], v[1]).unwrap())),
        ("mul column broadcast", check(5, &[(3, 4), (3, 1)], |t, v| t.mul(v[0], v[1]).unwrap())),
        ("scale", check(6, &[(2, 3)], |t, v| t.scale(v[0], -2.5))),
        ("concat", check(7, &[(2, 3), (2, 1), (2, 2)], |t, v| t.concat(v).unwrap())),
        ("gather_rows", check(8, &[(3, 2)], move |t, v| t.gather_rows(v[0], gather.clone()).unwrap())),
        ("segment_sum", check(9, &[(5, 3)], move |t, v| t.segment_sum(v[0], seg.clone(), 4).unwrap())),
        ("sigmoid", check(10, &[(3, 3)], |t, v| t.sigmoid(v[0]))),
        ("tanh", check(11, &[(3, 3)], |t, v| t.tanh(v[0]))),
        // Random values never sit within a step of the kink.
        ("leaky_relu", check(12, &[(3, 3)], |t, v| t.leaky_relu(v[0], 0.2))),
        (
            "segment_softmax",
            check(13, &[(6, 2)], move |t, v| t.segment_softmax(v[0], soft.clone(), 4).unwrap()),
        ),
        (
            "squared_error",
            check(14, &[(2, 3), (2, 3)], |t, v| {
                let e = t.squared_error(v[0], v[1]).unwrap();
                t.scale(e, 0.5)
            }),
        ),
    ]
}
