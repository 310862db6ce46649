//! Physical problem data and the solution encoding.

use std::fmt;

use crate::Scalar;

/// Which field of an instance an [`InstanceError`] refers to.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum InstanceField {
    Dimensions,
    Powers,
    Costs,
    Fading {
        testpoint: usize,
        transmitter: usize,
    },
    Noise,
    Threshold,
    Coverage,
    ScaleFactor,
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
#[error("{message}")]
pub struct InstanceError {
    pub field: InstanceField,
    pub message: String,
}

impl InstanceError {
    fn new(field: InstanceField, message: impl Into<String>) -> Self {
        Self {
            field,
            message: message.into(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum IndexError {
    #[error("testpoint {0} out of range")]
    Testpoint(usize),
    #[error("transmitter {0} out of range")]
    Transmitter(usize),
    #[error("power level {0} out of range")]
    Level(usize),
}

/// Raw data for [`Instance::new`]; fading is row-major by testpoint.
#[derive(Debug, Clone, PartialEq)]
pub struct InstanceSpec<S> {
    pub name: String,
    pub n_transmitters: usize,
    pub n_testpoints: usize,
    pub powers: Vec<S>,
    pub costs: Vec<S>,
    pub fading: Vec<S>,
    pub noise: S,
    pub threshold: S,
    pub coverage: usize,
    pub scale_factor: S,
}

/// A validated site-and-power assignment instance.
///
/// Received powers are `fading(t, b) * power(l)`; the noise is expressed in the
/// same unit. `scale_factor` records the power unit (in watts) the received
/// powers and the noise are expressed in, `1` for plain watts.
#[derive(Debug, Clone, PartialEq)]
pub struct Instance<S> {
    name: String,
    n_transmitters: usize,
    n_testpoints: usize,
    powers: Vec<S>,
    costs: Vec<S>,
    fading: Vec<S>,
    noise: S,
    threshold: S,
    coverage: usize,
    scale_factor: S,
}

impl<S: Scalar> Instance<S> {
    pub fn new(spec: InstanceSpec<S>) -> Result<Self, InstanceError> {
        use InstanceField as F;
        let InstanceSpec {
            name,
            n_transmitters,
            n_testpoints,
            powers,
            costs,
            fading,
            noise,
            threshold,
            coverage,
            scale_factor,
        } = spec;

        if powers.is_empty() {
            return Err(InstanceError::new(
                F::Powers,
                "at least one power level is required",
            ));
        }
        if !powers.iter().all(|p| p.is_finite()) || powers[0] <= S::zero() {
            return Err(InstanceError::new(
                F::Powers,
                "power values must be finite and P_1 > 0",
            ));
        }
        if let Some(i) = powers.windows(2).position(|w| w[1] <= w[0]) {
            return Err(InstanceError::new(
                F::Powers,
                format!(
                    "power values must be strictly increasing (level {} -> {})",
                    i,
                    i + 1
                ),
            ));
        }
        if costs.len() != powers.len() {
            return Err(InstanceError::new(
                F::Costs,
                format!(
                    "expected {} level costs, found {}",
                    powers.len(),
                    costs.len()
                ),
            ));
        }
        if !costs.iter().all(|c| c.is_finite() && *c > S::zero()) {
            return Err(InstanceError::new(
                F::Costs,
                "level costs must be finite and positive",
            ));
        }
        if let Some(i) = costs.windows(2).position(|w| w[1] < w[0]) {
            return Err(InstanceError::new(
                F::Costs,
                format!(
                    "level costs must be nondecreasing (level {} -> {})",
                    i,
                    i + 1
                ),
            ));
        }
        if fading.len() != n_transmitters * n_testpoints {
            return Err(InstanceError::new(
                F::Dimensions,
                format!(
                    "fading has {} entries, expected {} x {}",
                    fading.len(),
                    n_testpoints,
                    n_transmitters
                ),
            ));
        }
        if let Some(k) = fading
            .iter()
            .position(|a| !(a.is_finite() && *a > S::zero()))
        {
            return Err(InstanceError::new(
                F::Fading {
                    testpoint: k / n_transmitters,
                    transmitter: k % n_transmitters,
                },
                format!(
                    "fading coefficient a[{}][{}] must be finite and positive",
                    k / n_transmitters,
                    k % n_transmitters
                ),
            ));
        }
        if !(noise.is_finite() && noise > S::zero()) {
            return Err(InstanceError::new(F::Noise, "noise must be positive"));
        }
        if !(threshold.is_finite() && threshold > S::zero()) {
            return Err(InstanceError::new(
                F::Threshold,
                "SINR threshold must be positive",
            ));
        }
        if coverage > n_testpoints {
            return Err(InstanceError::new(
                F::Coverage,
                format!(
                    "coverage target {} exceeds {} testpoints",
                    coverage, n_testpoints
                ),
            ));
        }
        if !(scale_factor.is_finite() && scale_factor > S::zero()) {
            return Err(InstanceError::new(
                F::ScaleFactor,
                "scale factor must be positive",
            ));
        }
        Ok(Self {
            name,
            n_transmitters,
            n_testpoints,
            powers,
            costs,
            fading,
            noise,
            threshold,
            coverage,
            scale_factor,
        })
    }

    pub fn name(&self) -> &str {
        &self.name
    }
    pub fn n_transmitters(&self) -> usize {
        self.n_transmitters
    }
    pub fn n_testpoints(&self) -> usize {
        self.n_testpoints
    }
    pub fn n_levels(&self) -> usize {
        self.powers.len()
    }
    pub fn powers(&self) -> &[S] {
        &self.powers
    }
    pub fn power(&self, level: usize) -> S {
        self.powers[level]
    }
    pub fn max_power(&self) -> S {
        *self.powers.last().expect("nonempty power set")
    }
    pub fn costs(&self) -> &[S] {
        &self.costs
    }
    pub fn cost(&self, level: usize) -> S {
        self.costs[level]
    }
    pub fn noise(&self) -> S {
        self.noise
    }
    pub fn threshold(&self) -> S {
        self.threshold
    }
    pub fn coverage(&self) -> usize {
        self.coverage
    }
    pub fn scale_factor(&self) -> S {
        self.scale_factor
    }
    /// Row-major fading matrix, one row of `n_transmitters` gains per testpoint.
    pub fn fading(&self) -> &[S] {
        &self.fading
    }
    #[inline]
    pub fn gain(&self, testpoint: usize, transmitter: usize) -> S {
        self.fading[testpoint * self.n_transmitters + transmitter]
    }
    #[inline]
    pub fn gains_at(&self, testpoint: usize) -> &[S] {
        let start = testpoint * self.n_transmitters;
        &self.fading[start..start + self.n_transmitters]
    }

    /// `a[t][b] * P_level`, the power `t` receives from `b` emitting at `level`.
    pub fn received_power(
        &self,
        testpoint: usize,
        transmitter: usize,
        level: usize,
    ) -> Result<S, IndexError> {
        self.check_testpoint(testpoint)?;
        self.check_transmitter(transmitter)?;
        if level >= self.n_levels() {
            return Err(IndexError::Level(level));
        }
        Ok(self.gain(testpoint, transmitter) * self.powers[level])
    }

    pub(crate) fn check_testpoint(&self, t: usize) -> Result<(), IndexError> {
        if t < self.n_testpoints {
            Ok(())
        } else {
            Err(IndexError::Testpoint(t))
        }
    }

    pub(crate) fn check_transmitter(&self, b: usize) -> Result<(), IndexError> {
        if b < self.n_transmitters {
            Ok(())
        } else {
            Err(IndexError::Transmitter(b))
        }
    }

    /// Same instance with a different coverage target.
    pub fn with_coverage(&self, coverage: usize) -> Result<Self, InstanceError> {
        let mut spec = self.to_spec();
        spec.coverage = coverage;
        Self::new(spec)
    }

    pub fn with_name(mut self, name: impl Into<String>) -> Self {
        self.name = name.into();
        self
    }

    pub fn to_spec(&self) -> InstanceSpec<S> {
        InstanceSpec {
            name: self.name.clone(),
            n_transmitters: self.n_transmitters,
            n_testpoints: self.n_testpoints,
            powers: self.powers.clone(),
            costs: self.costs.clone(),
            fading: self.fading.clone(),
            noise: self.noise,
            threshold: self.threshold,
            coverage: self.coverage,
            scale_factor: self.scale_factor,
        }
    }

    /// Converts every value to another scalar type.
    pub fn cast<T: Scalar>(&self) -> Instance<T> {
        let conv = |v: S| T::lit(v.as_f64());
        Instance {
            name: self.name.clone(),
            n_transmitters: self.n_transmitters,
            n_testpoints: self.n_testpoints,
            powers: self.powers.iter().copied().map(conv).collect(),
            costs: self.costs.iter().copied().map(conv).collect(),
            fading: self.fading.iter().copied().map(conv).collect(),
            noise: conv(self.noise),
            threshold: conv(self.threshold),
            coverage: self.coverage,
            scale_factor: conv(self.scale_factor),
        }
    }
}

/// Power level chosen per transmitter, `None` when the transmitter is off.
pub type Activation = [Option<usize>];

/// Binary assignment of the model, stored so that "at most one server per
/// testpoint" and "at most one level per transmitter" hold by construction.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Solution {
    server: Vec<Option<usize>>,
    level: Vec<Option<usize>>,
    slack: Option<Vec<bool>>,
}

impl Solution {
    pub fn new(server: Vec<Option<usize>>, level: Vec<Option<usize>>) -> Self {
        Self {
            server,
            level,
            slack: None,
        }
    }

    /// All transmitters off, nobody served.
    pub fn empty(n_testpoints: usize, n_transmitters: usize) -> Self {
        Self::new(vec![None; n_testpoints], vec![None; n_transmitters])
    }

    /// Attaches a row-major `n_testpoints x n_transmitters` slack table.
    pub fn with_slack(mut self, slack: Vec<bool>) -> Self {
        self.slack = Some(slack);
        self
    }

    pub fn without_slack(mut self) -> Self {
        self.slack = None;
        self
    }

    pub fn server(&self) -> &[Option<usize>] {
        &self.server
    }
    pub fn level(&self) -> &Activation {
        &self.level
    }
    pub fn slack(&self) -> Option<&[bool]> {
        self.slack.as_deref()
    }
    pub fn n_testpoints(&self) -> usize {
        self.server.len()
    }
    pub fn n_transmitters(&self) -> usize {
        self.level.len()
    }

    pub fn slack_at(&self, testpoint: usize, transmitter: usize) -> Option<bool> {
        self.slack
            .as_ref()
            .map(|s| s[testpoint * self.level.len() + transmitter])
    }

    pub fn active_transmitters(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.level
            .iter()
            .enumerate()
            .filter_map(|(b, l)| l.map(|l| (b, l)))
    }

    pub fn served_count(&self) -> usize {
        self.server.iter().filter(|s| s.is_some()).count()
    }
}

impl fmt::Display for Solution {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "levels [")?;
        for (i, l) in self.level.iter().enumerate() {
            if i > 0 {
                write!(f, " ")?;
            }
            match l {
                Some(l) => write!(f, "{}", l)?,
                None => write!(f, "-")?,
            }
        }
        write!(f, "] servers [")?;
        for (i, s) in self.server.iter().enumerate() {
            if i > 0 {
                write!(f, " ")?;
            }
            match s {
                Some(b) => write!(f, "{}", b)?,
                None => write!(f, "-")?,
            }
        }
        write!(f, "]")
    }
}


#[cfg(test)]
mod tests {
    use super::fixtures::ex1;
    use super::*;

    fn spec() -> InstanceSpec<f64> {
        ex1(1).to_spec()
    }

    #[test]
    fn received_power_is_gain_times_power() {
        let inst = ex1(1);
        assert_eq!(inst.received_power(0, 0, 0).unwrap(), 20.0);
        assert_eq!(inst.received_power(0, 1, 0).unwrap(), 5.0);
        assert_eq!(inst.received_power(2, 0, 0), Err(IndexError::Testpoint(2)));
        assert_eq!(
            inst.received_power(0, 2, 0),
            Err(IndexError::Transmitter(2))
        );
        assert_eq!(inst.received_power(0, 0, 1), Err(IndexError::Level(1)));
    }

    #[test]
    fn rejects_zero_power() {
        let mut s = spec();
        s.powers = vec![0.0];
        assert_eq!(Instance::new(s).unwrap_err().field, InstanceField::Powers);
    }

    #[test]
    fn rejects_bad_level_data() {
        let mut s = spec();
        s.powers = vec![10.0, 10.0];
        s.costs = vec![1.0, 2.0];
        assert_eq!(
            Instance::new(s.clone()).unwrap_err().field,
            InstanceField::Powers
        );
        s.powers = vec![10.0, 20.0];
        s.costs = vec![2.0, 1.0];
        assert_eq!(
            Instance::new(s.clone()).unwrap_err().field,
            InstanceField::Costs
        );
        s.costs = vec![1.0];
        assert_eq!(Instance::new(s).unwrap_err().field, InstanceField::Costs);
    }

    #[test]
    fn rejects_nonpositive_fading_with_location() {
        let mut s = spec();
        s.fading[3] = 0.0;
        let err = Instance::new(s).unwrap_err();
        assert_eq!(
            err.field,
            InstanceField::Fading {
                testpoint: 1,
                transmitter: 1
            }
        );
    }

    #[test]
    fn rejects_out_of_range_scalars() {
        let mut s = spec();
        s.coverage = 3;
        assert_eq!(Instance::new(s).unwrap_err().field, InstanceField::Coverage);
        let mut s = spec();
        s.noise = 0.0;
        assert_eq!(Instance::new(s).unwrap_err().field, InstanceField::Noise);
        let mut s = spec();
        s.threshold = -1.0;
        assert_eq!(
            Instance::new(s).unwrap_err().field,
            InstanceField::Threshold
        );
        let mut s = spec();
        s.fading.pop();
        assert_eq!(
            Instance::new(s).unwrap_err().field,
            InstanceField::Dimensions
        );
    }

    #[test]
    fn coverage_bounds_are_inclusive() {
        assert!(ex1(0).with_coverage(0).is_ok());
        assert!(ex1(0).with_coverage(2).is_ok());
    }
}
