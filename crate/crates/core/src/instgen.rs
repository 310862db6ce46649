//! Synthetic instances from random geometry and an inverse-power pathloss law.
//!
//! Transmitters and testpoints are dropped uniformly on a square; the gain is
//! `K / max(d, d_min)^eta`. Unless given, `K` is chosen per instance so that
//! the strongest received power, expressed in units of `scale_factor` watts,
//! is about `9e4`. With the default geometry this keeps every received power
//! inside `(1e-4, 1e5)` in those units.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::{Instance, InstanceError, InstanceSpec, Scalar};

/// Largest received power after scaling when `K` is calibrated.
pub const CALIBRATED_PEAK: f64 = 9e4;

#[derive(Debug, Clone, PartialEq)]
pub struct GenParams {
    pub n_transmitters: usize,
    pub n_testpoints: usize,
    /// Side of the square area, metres.
    pub area: f64,
    pub pathloss_exponent: f64,
    /// `K` of the pathloss law; `None` calibrates it.
    pub reference_gain: Option<f64>,
    pub min_distance: f64,
    pub seed: u64,
    pub threshold: f64,
    /// Coverage target as a fraction of the testpoints.
    pub coverage_fraction: f64,
    /// Watts.
    pub powers: Vec<f64>,
    pub costs: Vec<f64>,
    /// Watts.
    pub noise: f64,
    /// Power unit in watts of the generated instance (see [`scale`]).
    pub scale_factor: f64,
}

impl Default for GenParams {
    fn default() -> Self {
        Self {
            n_transmitters: 30,
            n_testpoints: 500,
            area: 300.0,
            pathloss_exponent: 3.0,
            reference_gain: None,
            min_distance: 1.0,
            seed: 1,
            threshold: 0.316,
            coverage_fraction: 0.95,
            powers: vec![20.0, 40.0, 80.0],
            costs: vec![1.0, 2.0, 4.0],
            noise: 7.998e-14,
            scale_factor: 1e-10,
        }
    }
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum GenError {
    #[error("pathloss exponent {0} outside [2, 4]")]
    Exponent(f64),
    #[error("coverage fraction {0} outside [0, 1]")]
    Coverage(f64),
    #[error("{0} must be at least 1")]
    Count(&'static str),
    #[error("{0} must be positive")]
    NonPositive(&'static str),
    #[error(transparent)]
    Instance(#[from] InstanceError),
}

impl GenParams {
    pub fn validate(&self) -> Result<(), GenError> {
        if !(2.0..=4.0).contains(&self.pathloss_exponent) {
            return Err(GenError::Exponent(self.pathloss_exponent));
        }
        if !(0.0..=1.0).contains(&self.coverage_fraction) {
            return Err(GenError::Coverage(self.coverage_fraction));
        }
        if self.n_transmitters == 0 {
            return Err(GenError::Count("n_transmitters"));
        }
        if self.n_testpoints == 0 {
            return Err(GenError::Count("n_testpoints"));
        }
        for (name, v) in [
            ("area", self.area),
            ("min_distance", self.min_distance),
            ("scale_factor", self.scale_factor),
        ] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(GenError::NonPositive(name));
            }
        }
        if self
            .reference_gain
            .is_some_and(|k| !(k > 0.0 && k.is_finite()))
        {
            return Err(GenError::NonPositive("reference_gain"));
        }
        Ok(())
    }
}

/// `k / max(distance, d_min)^eta`.
pub fn pathloss_gain(k: f64, distance: f64, min_distance: f64, eta: f64) -> f64 {
    k / distance.max(min_distance).powf(eta)
}

/// Generates an instance in physical units, then expresses it in units of
/// `scale_factor` watts.
pub fn generate<S: Scalar>(p: &GenParams) -> Result<Instance<S>, GenError> {
    p.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(p.seed);
    let mut point = || (rng.gen_range(0.0..p.area), rng.gen_range(0.0..p.area));
    let tx: Vec<(f64, f64)> = (0..p.n_transmitters).map(|_| point()).collect();
    let tp: Vec<(f64, f64)> = (0..p.n_testpoints).map(|_| point()).collect();
    let unit_gain: Vec<f64> = tp
        .iter()
        .flat_map(|&(tx_t, ty_t)| {
            tx.iter().map(move |&(bx, by)| {
                pathloss_gain(
                    1.0,
                    (bx - tx_t).hypot(by - ty_t),
                    p.min_distance,
                    p.pathloss_exponent,
                )
            })
        })
        .collect();
    let p_max = p.powers.iter().copied().fold(0.0, f64::max);
    let k = p.reference_gain.unwrap_or_else(|| {
        let peak = unit_gain.iter().copied().fold(0.0, f64::max);
        CALIBRATED_PEAK * p.scale_factor / (peak * p_max)
    });
    let coverage = (p.coverage_fraction * p.n_testpoints as f64).round() as usize;
    let physical = Instance::<f64>::new(InstanceSpec {
        name: format!("gen-s{}-b{}-t{}", p.seed, p.n_transmitters, p.n_testpoints),
        n_transmitters: p.n_transmitters,
        n_testpoints: p.n_testpoints,
        powers: p.powers.clone(),
        costs: p.costs.clone(),
        fading: unit_gain.iter().map(|g| g * k).collect(),
        noise: p.noise,
        threshold: p.threshold,
        coverage: coverage.min(p.n_testpoints),
        scale_factor: 1.0,
    })?;
    Ok(scale(&physical, p.scale_factor).cast())
}

/// Re-expresses powers in units of `factor` watts: gains and noise are divided
/// by `factor`, so a received power of `factor` watts reads as 1. Costs,
/// threshold and every SINR stay the same; the factor accumulates in
/// `scale_factor`.
pub fn scale<S: Scalar>(inst: &Instance<S>, factor: S) -> Instance<S> {
    let spec = inst.to_spec();
    Instance::new(InstanceSpec {
        fading: spec.fading.iter().map(|a| *a / factor).collect(),
        noise: spec.noise / factor,
        scale_factor: spec.scale_factor * factor,
        ..spec
    })
    .expect("scaling by a positive factor keeps the instance valid")
}

/// Smallest and largest `a[t][b] * P_l` over the instance.
pub fn received_power_range<S: Scalar>(inst: &Instance<S>) -> (S, S) {
    let (amin, amax) = inst
        .fading()
        .iter()
        .fold((S::infinity(), S::zero()), |(lo, hi), a| {
            (lo.min(*a), hi.max(*a))
        });
    (amin * inst.power(0), amax * inst.max_power())
}

/// Small random instance for oracle comparisons: at most 4 transmitters,
/// 10 testpoints and 2 levels, coverage 0, half or all testpoints.
///
/// The noise floor is placed so that `delta * mu` sits at a low quantile of
/// the per-testpoint best received power at the lowest level. Most testpoints
/// are then reachable, but not all through the same transmitter.
pub fn small_params(seed: u64) -> GenParams {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x5eed_5a11);
    let nb = rng.gen_range(1..=4);
    let nt = rng.gen_range(1..=10);
    let nl = rng.gen_range(1..=2);
    let coverage_fraction = match rng.gen_range(0..5) {
        0 => 0.0,
        1 | 2 => (nt as f64 / 2.0).ceil() / nt as f64,
        _ => 1.0,
    };
    let mut p = GenParams {
        n_transmitters: nb,
        n_testpoints: nt,
        area: 100.0,
        pathloss_exponent: rng.gen_range(2.0..4.0),
        seed,
        threshold: [0.316, 1.0, 3.16][rng.gen_range(0..3)],
        coverage_fraction,
        powers: [20.0, 40.0][..nl].to_vec(),
        costs: [1.0, 2.0][..nl].to_vec(),
        ..GenParams::default()
    };
    let inst: Instance<f64> = generate(&p).expect("small parameters are valid");
    let mut best: Vec<f64> = (0..nt)
        .map(|t| inst.gains_at(t).iter().fold(0.0, |m: f64, a| m.max(*a)) * inst.power(0))
        .collect();
    best.sort_by(f64::total_cmp);
    let k = rng.gen_range(0..=nt / 2);
    p.noise = 0.999 * best[k] / p.threshold * p.scale_factor;
    p
}

/// Full-size instance: 30 transmitters, 500 testpoints, three levels.
pub fn standard_params(seed: u64) -> GenParams {
    GenParams {
        seed,
        ..GenParams::default()
    }
}
