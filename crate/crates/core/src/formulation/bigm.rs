use std::fmt;

use crate::{Instance, Scalar};

/// Which rule produced a [`BigMTable`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum BigMTier {
    /// Every interferer at the maximum power.
    Base,
    /// Interferers capped at the highest level surviving reduced cost fixing.
    Prime,
    /// Only the strongest interferers that an incumbent-bounded solution can switch on.
    DoublePrime,
}

impl fmt::Display for BigMTier {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            BigMTier::Base => "M",
            BigMTier::Prime => "M'",
            BigMTier::DoublePrime => "M''",
        })
    }
}

/// Per-testpoint ranking of potential interferers used by the `DoublePrime` tier.
#[derive(Debug, Clone, PartialEq)]
pub struct InterfererSets {
    pub gamma: usize,
    /// `sets[t]` is the set A_t of the `gamma` strongest potential interferers at `t`,
    /// strongest first.
    pub sets: Vec<Vec<usize>>,
    /// The next strongest after A_t, which replaces the serving transmitter
    /// itself when it belongs to A_t.
    pub runner_up: Vec<Option<usize>>,
}

/// Big-M coefficient of every SINR row, row-major by testpoint.
#[derive(Debug, Clone, PartialEq)]
pub struct BigMTable<S> {
    n_testpoints: usize,
    n_transmitters: usize,
    values: Vec<S>,
    tier: BigMTier,
    power_caps: Vec<S>,
    interferers: Option<InterfererSets>,
}

impl<S: Scalar> BigMTable<S> {
    pub(crate) fn from_parts(
        n_testpoints: usize,
        n_transmitters: usize,
        values: Vec<S>,
        tier: BigMTier,
        power_caps: Vec<S>,
        interferers: Option<InterfererSets>,
    ) -> Self {
        debug_assert_eq!(values.len(), n_testpoints * n_transmitters);
        debug_assert_eq!(power_caps.len(), n_transmitters);
        Self {
            n_testpoints,
            n_transmitters,
            values,
            tier,
            power_caps,
            interferers,
        }
    }

    /// `delta*mu + delta * sum_{b != beta} cap_b * a[t][b]` for every pair.
    pub fn with_power_caps(inst: &Instance<S>, caps: Vec<S>, tier: BigMTier) -> Self {
        let nb = inst.n_transmitters();
        let delta = inst.threshold();
        let floor = delta * inst.noise();
        let mut values = Vec::with_capacity(inst.n_testpoints() * nb);
        for t in 0..inst.n_testpoints() {
            let gains = inst.gains_at(t);
            for beta in 0..nb {
                let interf = (0..nb)
                    .filter(|&b| b != beta)
                    .fold(S::zero(), |acc, b| acc + caps[b] * gains[b]);
                values.push(floor + delta * interf);
            }
        }
        Self::from_parts(inst.n_testpoints(), nb, values, tier, caps, None)
    }

    pub fn n_testpoints(&self) -> usize {
        self.n_testpoints
    }
    pub fn n_transmitters(&self) -> usize {
        self.n_transmitters
    }
    pub fn get(&self, testpoint: usize, serving: usize) -> S {
        self.values[testpoint * self.n_transmitters + serving]
    }
    pub fn values(&self) -> &[S] {
        &self.values
    }
    pub fn tier(&self) -> BigMTier {
        self.tier
    }
    pub fn power_caps(&self) -> &[S] {
        &self.power_caps
    }
    pub fn interferers(&self) -> Option<&InterfererSets> {
        self.interferers.as_ref()
    }

    pub fn max(&self) -> S {
        self.values.iter().copied().fold(S::zero(), S::max)
    }

    pub fn matches(&self, inst: &Instance<S>) -> bool {
        self.n_testpoints == inst.n_testpoints() && self.n_transmitters == inst.n_transmitters()
    }

    /// Entrywise `self <= other` up to a relative tolerance.
    pub fn dominated_by(&self, other: &Self) -> bool {
        self.values.len() == other.values.len()
            && self
                .values
                .iter()
                .zip(&other.values)
                .all(|(a, b)| *a <= *b + S::lit(1e-12) * b.abs().max(S::one()))
    }
}

/// Big-M with every interferer at maximum power.
pub fn big_m_base<S: Scalar>(inst: &Instance<S>) -> BigMTable<S> {
    let caps = vec![inst.max_power(); inst.n_transmitters()];
    BigMTable::with_power_caps(inst, caps, BigMTier::Base)
}
