use rand::seq::index::sample;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::params::ParamStore;
use super::tensor::Tensor;

/// Which parameter coordinates a gradient check perturbs.
#[derive(Clone, Copy, Debug)]
pub enum Coordinates {
    All,
    /// A seeded random subset of at most this many coordinates.
    Sample { count: usize, seed: u64 },
}

/// Relative error between an analytic and a central-difference derivative.
pub fn relative_error(analytic: f64, numeric: f64) -> f64 {
    if !analytic.is_finite() || !numeric.is_finite() {
        return f64::INFINITY;
    }
    (analytic - numeric).abs() / (analytic.abs() + numeric.abs()).max(1e-8)
}

/// Compares the analytic gradient returned by `f` against central finite
/// differences of its value and returns the largest relative error.
///
/// `f` returns the scalar value and the gradient for every parameter in
/// the store, in store order.
pub fn grad_check<F>(params: &ParamStore, step: f64, coords: Coordinates, mut f: F) -> f64
where
    F: FnMut(&ParamStore) -> (f64, Vec<Tensor>),
{
    let (_, analytic) = f(params);
    let flat: Vec<(usize, usize)> = params
        .iter()
        .enumerate()
        .flat_map(|(p, (_, t))| (0..t.len()).map(move |i| (p, i)))
        .collect();
    let chosen: Vec<(usize, usize)> = match coords {
        Coordinates::All => flat,
        Coordinates::Sample { count, seed } => {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let n = count.min(flat.len());
            let mut picks: Vec<usize> = sample(&mut rng, flat.len(), n).into_vec();
            picks.sort_unstable();
            picks.into_iter().map(|k| flat[k]).collect()
        }
    };

    let ids: Vec<_> = params.ids().collect();
    let mut probe = params.clone();
    let mut worst: f64 = 0.0;
    for (p, i) in chosen {
        let id = ids[p];
        let base = params.get(id).data()[i];
        probe.get_mut(id).data_mut()[i] = base + step;
        let (up, _) = f(&probe);
        probe.get_mut(id).data_mut()[i] = base - step;
        let (down, _) = f(&probe);
        probe.get_mut(id).data_mut()[i] = base;
        let numeric = (up - down) / (2.0 * step);
        let a = analytic.get(p).map_or(f64::NAN, |g| g.data()[i]);
        worst = worst.max(relative_error(a, numeric));
    }
    worst
}
