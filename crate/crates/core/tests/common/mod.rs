#![allow(dead_code)]

use sitepower::formulation::{MilpModel, Sense};
use sitepower::instgen::{generate, small_params};
use sitepower::Instance64;

pub fn small(seed: u64) -> Instance64 {
    generate(&small_params(seed)).unwrap()
}

/// Small instances with at most `max_b` transmitters.
pub fn small_suite(count: usize, max_b: usize) -> Vec<Instance64> {
    (0u64..)
        .map(small)
        .filter(|i| i.n_transmitters() <= max_b)
        .take(count)
        .collect()
}

/// Left-hand side of the SINR inequality moved to `<= 0` form, written out
/// from the instance data: `delta * (mu + sum_{b != beta} a_tb P_b) - a_tbeta P_beta`.
pub fn sinr_rhs(inst: &Instance64, activation: &[Option<usize>], t: usize, beta: usize) -> f64 {
    let mut interference = 0.0;
    for (b, l) in activation.iter().enumerate() {
        if b != beta {
            if let Some(l) = l {
                interference += inst.gain(t, b) * inst.power(*l);
            }
        }
    }
    let own = activation[beta].map_or(0.0, |l| inst.gain(t, beta) * inst.power(l));
    inst.threshold() * interference - own + inst.threshold() * inst.noise()
}

/// Activations that may set several levels of one transmitter: each entry
/// is a bitmask over levels. Returns the z vector as `(b, l) -> 0/1`.
pub fn level_masks(nb: usize, nl: usize) -> impl Iterator<Item = Vec<bool>> {
    let bits = nb * nl;
    (0u64..1 << bits).map(move |m| (0..bits).map(|k| m >> k & 1 == 1).collect())
}

pub fn row_holds(model: &MilpModel<f64>, row: usize, primal: &[f64]) -> bool {
    let (idx, val) = model.row_entries(row);
    let act: f64 = idx.iter().zip(val).map(|(&j, &v)| v * primal[j]).sum();
    let r = &model.rows()[row];
    let tol = 1e-9 * r.rhs.abs().max(1.0);
    match r.sense {
        Sense::Le => act <= r.rhs + tol,
        Sense::Ge => act >= r.rhs - tol,
        Sense::Eq => (act - r.rhs).abs() <= tol,
    }
}
