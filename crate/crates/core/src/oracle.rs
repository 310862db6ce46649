//! Exhaustive solver for small instances.
//!
//! For a fixed activation the interference at a testpoint does not depend on
//! the assignment, so every testpoint can pick its best server on its own and
//! the activation is feasible exactly when enough testpoints find one. The
//! oracle walks all `(|L| + 1)^|B|` activations.

use crate::feasibility::{activation_cost, best_servers};
use crate::{Instance, Scalar, Solution};

pub const DEFAULT_CAP: u64 = 2_000_000;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum OracleError {
    #[error("{patterns} activation patterns exceed the cap of {cap}")]
    CapExceeded { patterns: String, cap: u64 },
}

#[derive(Debug, Clone, PartialEq)]
pub struct OracleResult<S> {
    /// Minimum cost, `None` when no activation reaches the coverage target.
    pub optimum: Option<S>,
    /// Optimal solution with the lexicographically smallest activation.
    pub solution: Option<Solution>,
    /// Number of activations attaining the optimum.
    pub optimal_count: u64,
    /// `forced_on[b * |L| + l]`: every optimal activation sets `b` to level `l`.
    pub forced_on: Vec<bool>,
    pub enumerated: u64,
}

impl<S: Scalar> OracleResult<S> {
    pub fn is_feasible(&self) -> bool {
        self.optimum.is_some()
    }

    /// Whether some optimal activation leaves `(b, l)` off.
    pub fn optimum_without(&self, transmitter: usize, level: usize, n_levels: usize) -> bool {
        !self.forced_on[transmitter * n_levels + level]
    }
}

/// `(n_levels + 1)^n_transmitters`, or `None` on overflow.
pub fn pattern_count(n_transmitters: usize, n_levels: usize) -> Option<u64> {
    let base = n_levels as u64 + 1;
    (0..n_transmitters).try_fold(1u64, |acc, _| acc.checked_mul(base))
}

/// Every activation in lexicographic order: transmitter 0 varies slowest and
/// "off" sorts before level 0.
pub fn activations(
    n_transmitters: usize,
    n_levels: usize,
) -> impl Iterator<Item = Vec<Option<usize>>> {
    let mut next = Some(vec![None; n_transmitters]);
    std::iter::from_fn(move || {
        let cur = next.take()?;
        let mut succ = cur.clone();
        for b in (0..n_transmitters).rev() {
            match succ[b] {
                None if n_levels > 0 => {
                    succ[b] = Some(0);
                    next = Some(succ);
                    break;
                }
                Some(l) if l + 1 < n_levels => {
                    succ[b] = Some(l + 1);
                    next = Some(succ);
                    break;
                }
                _ => succ[b] = None,
            }
        }
        Some(cur)
    })
}

pub fn brute_force<S: Scalar>(
    inst: &Instance<S>,
    cap: u64,
) -> Result<OracleResult<S>, OracleError> {
    let (nb, nl) = (inst.n_transmitters(), inst.n_levels());
    match pattern_count(nb, nl) {
        Some(c) if c <= cap => {}
        other => {
            return Err(OracleError::CapExceeded {
                patterns: other.map_or_else(|| format!("{}^{}", nl + 1, nb), |c| c.to_string()),
                cap,
            })
        }
    }
    let mut best: Option<(S, Solution)> = None;
    let mut count = 0u64;
    let mut forced_on = vec![false; nb * nl];
    let mut enumerated = 0u64;
    let tol = S::lit(1e-9);
    for z in activations(nb, nl) {
        enumerated += 1;
        let cost = activation_cost(inst, &z);
        if let Some((c, _)) = &best {
            if cost > *c + tol {
                continue;
            }
        }
        let servers = best_servers(inst, &z);
        if servers.iter().flatten().count() < inst.coverage() {
            continue;
        }
        let improves = best.as_ref().is_none_or(|(c, _)| cost < *c - tol);
        if improves {
            count = 0;
            forced_on.iter_mut().for_each(|f| *f = true);
            best = Some((cost, Solution::new(servers, z.clone())));
        }
        count += 1;
        for b in 0..nb {
            for l in 0..nl {
                if z[b] != Some(l) {
                    forced_on[b * nl + l] = false;
                }
            }
        }
    }
    if best.is_none() {
        forced_on.iter_mut().for_each(|f| *f = false);
    }
    Ok(OracleResult {
        optimum: best.as_ref().map(|(c, _)| *c),
        solution: best.map(|(_, s)| s),
        optimal_count: count,
        forced_on,
        enumerated,
    })
}
