//! SINR evaluation, feasibility checking and the objective.
//!
//! Every check is done on the cross-multiplied inequality
//! `a[t][beta] * P >= delta * (mu + interference)` so no division enters the
//! decision; [`sinr`] is only used for reporting and ranking.

use std::fmt;

use crate::instance::{Activation, Instance, Solution};
use crate::Scalar;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum SinrError {
    #[error("no serving power: transmitter {0} is not active")]
    NoServingPower(usize),
    #[error("index out of range")]
    Index(#[from] crate::instance::IndexError),
    #[error("activation covers {found} transmitters, instance has {expected}")]
    Dimension { expected: usize, found: usize },
}

/// Sum of the powers received at `testpoint` from active transmitters other than `serving`.
pub fn interference<S: Scalar>(
    inst: &Instance<S>,
    activation: &Activation,
    testpoint: usize,
    serving: usize,
) -> S {
    let gains = inst.gains_at(testpoint);
    let mut total = S::zero();
    for (b, level) in activation.iter().enumerate() {
        if b == serving {
            continue;
        }
        if let Some(l) = level {
            total += gains[b] * inst.power(*l);
        }
    }
    total
}

fn serving_power<S: Scalar>(
    inst: &Instance<S>,
    activation: &Activation,
    testpoint: usize,
    serving: usize,
) -> Option<S> {
    activation[serving].map(|l| inst.gain(testpoint, serving) * inst.power(l))
}

/// Signal-to-interference-plus-noise ratio at `testpoint` when served by `serving`.
pub fn sinr<S: Scalar>(
    inst: &Instance<S>,
    activation: &Activation,
    testpoint: usize,
    serving: usize,
) -> Result<S, SinrError> {
    check_activation(inst, activation)?;
    inst.check_testpoint(testpoint)?;
    inst.check_transmitter(serving)?;
    let signal = serving_power(inst, activation, testpoint, serving)
        .ok_or(SinrError::NoServingPower(serving))?;
    Ok(signal / (inst.noise() + interference(inst, activation, testpoint, serving)))
}

/// `signal - delta * (mu + interference)`; nonnegative (up to tolerance) iff served.
pub fn sinr_margin<S: Scalar>(
    inst: &Instance<S>,
    activation: &Activation,
    testpoint: usize,
    serving: usize,
) -> S {
    let signal = serving_power(inst, activation, testpoint, serving).unwrap_or_else(S::zero);
    signal - inst.threshold() * (inst.noise() + interference(inst, activation, testpoint, serving))
}

/// Whether `serving` is active and meets the SINR threshold at `testpoint`.
pub fn is_served<S: Scalar>(
    inst: &Instance<S>,
    activation: &Activation,
    testpoint: usize,
    serving: usize,
) -> bool {
    activation[serving].is_some()
        && sinr_margin(inst, activation, testpoint, serving) >= -S::sinr_tolerance()
}

fn check_activation<S: Scalar>(
    inst: &Instance<S>,
    activation: &Activation,
) -> Result<(), SinrError> {
    if activation.len() != inst.n_transmitters() {
        return Err(SinrError::Dimension {
            expected: inst.n_transmitters(),
            found: activation.len(),
        });
    }
    if let Some(l) = activation.iter().flatten().find(|l| **l >= inst.n_levels()) {
        return Err(crate::instance::IndexError::Level(*l).into());
    }
    Ok(())
}

/// Best server for every testpoint under a fixed activation: the active
/// transmitter of largest SINR among those meeting the threshold, lowest index
/// on ties. Interference depends only on the activation, so testpoints are
/// independent of each other.
pub fn best_servers<S: Scalar>(inst: &Instance<S>, activation: &Activation) -> Vec<Option<usize>> {
    (0..inst.n_testpoints())
        .map(|t| best_server(inst, activation, t))
        .collect()
}

pub fn best_server<S: Scalar>(
    inst: &Instance<S>,
    activation: &Activation,
    testpoint: usize,
) -> Option<usize> {
    let mut best: Option<(usize, S)> = None;
    for (b, level) in activation.iter().enumerate() {
        if level.is_none() || !is_served(inst, activation, testpoint, b) {
            continue;
        }
        let signal = serving_power(inst, activation, testpoint, b).unwrap_or_else(S::zero);
        let ratio = signal / (inst.noise() + interference(inst, activation, testpoint, b));
        if best.is_none_or(|(_, r)| ratio > r) {
            best = Some((b, ratio));
        }
    }
    best.map(|(b, _)| b)
}

/// Feasible solution for a fixed activation if the activation can reach the
/// coverage target, serving every testpoint it can.
pub fn complete_activation<S: Scalar>(
    inst: &Instance<S>,
    activation: &Activation,
) -> Option<Solution> {
    let servers = best_servers(inst, activation);
    let served = servers.iter().filter(|s| s.is_some()).count();
    (served >= inst.coverage()).then(|| Solution::new(servers, activation.to_vec()))
}

/// Total level cost of the active transmitters.
pub fn objective<S: Scalar>(inst: &Instance<S>, solution: &Solution) -> S {
    activation_cost(inst, solution.level())
}

pub fn activation_cost<S: Scalar>(inst: &Instance<S>, activation: &Activation) -> S {
    activation
        .iter()
        .flatten()
        .fold(S::zero(), |acc, l| acc + inst.cost(*l))
}

/// One violated condition of a candidate solution.
#[derive(Debug, Clone, PartialEq)]
pub enum Violation {
    /// Solution arrays do not match the instance, or refer to unknown indices.
    Malformed(String),
    InactiveServer {
        testpoint: usize,
        transmitter: usize,
    },
    SinrBelowThreshold {
        testpoint: usize,
        transmitter: usize,
        sinr: f64,
    },
    Coverage {
        served: usize,
        required: usize,
    },
    /// Slack set where the testpoint is served by that transmitter.
    SlackOnServed {
        testpoint: usize,
        transmitter: usize,
    },
    /// Slack cleared, which demands the SINR condition for that pair.
    SlackSinr {
        testpoint: usize,
        transmitter: usize,
    },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::Malformed(msg) => write!(f, "malformed solution: {}", msg),
            Violation::InactiveServer {
                testpoint,
                transmitter,
            } => write!(
                f,
                "testpoint {} assigned to inactive transmitter {}",
                testpoint, transmitter
            ),
            Violation::SinrBelowThreshold {
                testpoint,
                transmitter,
                sinr,
            } => write!(
                f,
                "SINR below threshold at testpoint {} from transmitter {} ({:.6e})",
                testpoint, transmitter, sinr
            ),
            Violation::Coverage { served, required } => {
                write!(f, "coverage {} < {}", served, required)
            }
            Violation::SlackOnServed {
                testpoint,
                transmitter,
            } => write!(
                f,
                "slack set on served pair (testpoint {}, transmitter {})",
                testpoint, transmitter
            ),
            Violation::SlackSinr {
                testpoint,
                transmitter,
            } => write!(
                f,
                "slack cleared but SINR condition fails at (testpoint {}, transmitter {})",
                testpoint, transmitter
            ),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct FeasibilityReport {
    pub violations: Vec<Violation>,
    pub served: usize,
}

impl FeasibilityReport {
    pub fn is_feasible(&self) -> bool {
        self.violations.is_empty()
    }
}

impl fmt::Display for FeasibilityReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_feasible() {
            return write!(f, "feasible ({} testpoints served)", self.served);
        }
        writeln!(f, "infeasible ({} violations)", self.violations.len())?;
        for v in &self.violations {
            writeln!(f, "  {}", v)?;
        }
        Ok(())
    }
}

/// Checks a solution against the instance, listing every violated condition.
pub fn verify_solution<S: Scalar>(inst: &Instance<S>, solution: &Solution) -> FeasibilityReport {
    let mut report = FeasibilityReport::default();
    let nb = inst.n_transmitters();
    let nt = inst.n_testpoints();
    if solution.n_transmitters() != nb || solution.n_testpoints() != nt {
        report.violations.push(Violation::Malformed(format!(
            "solution is {}x{}, instance is {}x{}",
            solution.n_testpoints(),
            solution.n_transmitters(),
            nt,
            nb
        )));
        return report;
    }
    if let Some((b, l)) = solution
        .active_transmitters()
        .find(|(_, l)| *l >= inst.n_levels())
    {
        report.violations.push(Violation::Malformed(format!(
            "transmitter {} uses unknown level {}",
            b, l
        )));
        return report;
    }
    if let Some((t, b)) = solution
        .server()
        .iter()
        .enumerate()
        .find_map(|(t, s)| s.filter(|b| *b >= nb).map(|b| (t, b)))
    {
        report.violations.push(Violation::Malformed(format!(
            "testpoint {} assigned to unknown transmitter {}",
            t, b
        )));
        return report;
    }
    if let Some(slack) = solution.slack() {
        if slack.len() != nt * nb {
            report.violations.push(Violation::Malformed(format!(
                "slack table has {} entries",
                slack.len()
            )));
            return report;
        }
    }

    let activation = solution.level();
    for (t, server) in solution.server().iter().enumerate() {
        let Some(b) = *server else { continue };
        if activation[b].is_none() {
            report.violations.push(Violation::InactiveServer {
                testpoint: t,
                transmitter: b,
            });
        } else if !is_served(inst, activation, t, b) {
            let ratio = sinr(inst, activation, t, b)
                .map(|r| r.as_f64())
                .unwrap_or(0.0);
            report.violations.push(Violation::SinrBelowThreshold {
                testpoint: t,
                transmitter: b,
                sinr: ratio,
            });
        } else {
            report.served += 1;
        }
    }
    if report.served < inst.coverage() {
        report.violations.push(Violation::Coverage {
            served: report.served,
            required: inst.coverage(),
        });
    }
    if solution.slack().is_some() {
        for t in 0..nt {
            for b in 0..nb {
                let slack = solution.slack_at(t, b).unwrap_or(true);
                if slack && solution.server()[t] == Some(b) {
                    report.violations.push(Violation::SlackOnServed {
                        testpoint: t,
                        transmitter: b,
                    });
                }
                if !slack && !is_served(inst, activation, t, b) {
                    report.violations.push(Violation::SlackSinr {
                        testpoint: t,
                        transmitter: b,
                    });
                }
            }
        }
    }
    report
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::instance::fixtures::{ex1, ex2};
    use crate::instance::{InstanceSpec, Solution};
    use approx::assert_relative_eq;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn sinr_single_transmitter_is_snr() {
        let inst = ex1(2);
        assert_relative_eq!(sinr(&inst, &[Some(0), None], 0, 0).unwrap(), 20.0);
    }

    #[test]
    fn sinr_with_interference() {
        let inst = ex1(2);
        let both = [Some(0), Some(0)];
        assert_relative_eq!(sinr(&inst, &both, 0, 0).unwrap(), 10.0 / 3.0);
        assert_relative_eq!(sinr(&inst, &both, 0, 1).unwrap(), 5.0 / 21.0);
    }

    #[test]
    fn sinr_requires_active_server() {
        let inst = ex1(2);
        assert_eq!(
            sinr(&inst, &[Some(0), None], 0, 1),
            Err(SinrError::NoServingPower(1))
        );
    }

    #[test]
    fn single_transmitter_covers_both_testpoints() {
        let inst = ex1(2);
        let sol = Solution::new(vec![Some(0), Some(0)], vec![Some(0), None]);
        let report = verify_solution(&inst, &sol);
        assert!(report.is_feasible(), "{}", report);
        assert_eq!(report.served, 2);
    }

    #[test]
    fn inactive_server_is_reported() {
        let inst = ex1(0);
        let sol = Solution::new(vec![Some(0), None], vec![None, None]);
        let report = verify_solution(&inst, &sol);
        assert_eq!(
            report.violations,
            vec![Violation::InactiveServer {
                testpoint: 0,
                transmitter: 0
            }]
        );
        assert!(report.violations[0]
            .to_string()
            .contains("assigned to inactive transmitter"));
    }

    #[test]
    fn low_sinr_and_coverage_are_reported() {
        let inst = ex1(2);
        let sol = Solution::new(vec![Some(1), None], vec![Some(0), Some(0)]);
        let report = verify_solution(&inst, &sol);
        assert_eq!(report.violations.len(), 2);
        assert!(matches!(
            report.violations[0],
            Violation::SinrBelowThreshold {
                testpoint: 0,
                transmitter: 1,
                ..
            }
        ));
        assert_eq!(
            report.violations[1],
            Violation::Coverage {
                served: 0,
                required: 2
            }
        );
        assert_eq!(report.violations[1].to_string(), "coverage 0 < 2");
    }

    #[test]
    fn slack_consistency() {
        let inst = ex1(1);
        let base = Solution::new(vec![Some(0), None], vec![Some(0), None]);
        let good = base.clone().with_slack(vec![false, true, true, true]);
        assert!(verify_solution(&inst, &good).is_feasible());
        let on_served = base.clone().with_slack(vec![true, true, true, true]);
        assert!(verify_solution(&inst, &on_served).violations.contains(
            &Violation::SlackOnServed {
                testpoint: 0,
                transmitter: 0
            }
        ));
        // w[1][1] = 0 demands SINR(t1, b1) >= delta, but b1 is off.
        let cleared = base.with_slack(vec![false, true, true, false]);
        assert!(verify_solution(&inst, &cleared)
            .violations
            .contains(&Violation::SlackSinr {
                testpoint: 1,
                transmitter: 1
            }));
    }

    #[test]
    fn malformed_solutions_do_not_panic() {
        let inst = ex1(1);
        for sol in [
            Solution::empty(3, 2),
            Solution::new(vec![Some(5), None], vec![Some(0), None]),
            Solution::new(vec![None, None], vec![Some(4), None]),
            Solution::empty(2, 2).with_slack(vec![true]),
        ] {
            assert!(matches!(
                verify_solution(&inst, &sol).violations[0],
                Violation::Malformed(_)
            ));
        }
    }

    #[test]
    fn objective_sums_level_costs() {
        let inst = ex1(0);
        assert_eq!(objective(&inst, &Solution::empty(2, 2)), 0.0);
        let two = ex2(0);
        let sol = Solution::new(vec![None, None], vec![Some(0), Some(1)]);
        assert_eq!(objective(&two, &sol), 3.0);
        let three_levels = Instance::new(InstanceSpec {
            powers: vec![20.0, 40.0, 80.0],
            costs: vec![1.0, 2.0, 4.0],
            ..ex1(0).to_spec()
        })
        .unwrap();
        let top = Solution::new(vec![None, None], vec![Some(2), None]);
        assert_eq!(objective(&three_levels, &top), 4.0);
    }

    fn random_instance(rng: &mut ChaCha8Rng) -> Instance<f64> {
        let nb = rng.gen_range(1..=5);
        let nt = rng.gen_range(1..=6);
        let nl = rng.gen_range(1..=3);
        let mut powers: Vec<f64> = (0..nl).map(|_| rng.gen_range(0.1..100.0)).collect();
        powers.sort_by(f64::total_cmp);
        powers.dedup();
        let costs = (1..=powers.len()).map(|k| k as f64).collect();
        Instance::new(InstanceSpec {
            name: "rand".into(),
            n_transmitters: nb,
            n_testpoints: nt,
            powers,
            costs,
            fading: (0..nb * nt)
                .map(|_| 10f64.powf(rng.gen_range(-4.0..2.0)))
                .collect(),
            noise: rng.gen_range(0.01..10.0),
            threshold: rng.gen_range(0.05..5.0),
            coverage: 0,
            scale_factor: 1.0,
        })
        .unwrap()
    }

    fn random_activation(rng: &mut ChaCha8Rng, inst: &Instance<f64>) -> Vec<Option<usize>> {
        (0..inst.n_transmitters())
            .map(|_| {
                if rng.gen_bool(0.3) {
                    None
                } else {
                    Some(rng.gen_range(0..inst.n_levels()))
                }
            })
            .collect()
    }

    #[test]
    fn served_matches_raw_cross_multiplied_inequality() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let mut checked = 0;
        while checked < 1000 {
            let inst = random_instance(&mut rng);
            let act = random_activation(&mut rng, &inst);
            for t in 0..inst.n_testpoints() {
                for beta in 0..inst.n_transmitters() {
                    let Some(lb) = act[beta] else { continue };
                    let mut interf = 0.0;
                    for b in 0..inst.n_transmitters() {
                        if b != beta {
                            if let Some(l) = act[b] {
                                interf += inst.gain(t, b) * inst.powers()[l];
                            }
                        }
                    }
                    let raw = inst.gain(t, beta) * inst.powers()[lb]
                        >= inst.threshold() * (inst.noise() + interf) - 1e-9;
                    assert_eq!(is_served(&inst, &act, t, beta), raw);
                }
            }
            checked += 1;
        }
    }

    #[test]
    fn sinr_invariant_under_common_rescaling() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..200 {
            let inst = random_instance(&mut rng);
            let mut spec = inst.to_spec();
            spec.noise *= 1e-10;
            spec.fading.iter_mut().for_each(|a| *a *= 1e-10);
            let scaled = Instance::new(spec).unwrap();
            let act = random_activation(&mut rng, &inst);
            for t in 0..inst.n_testpoints() {
                for b in 0..inst.n_transmitters() {
                    if act[b].is_some() {
                        let r0 = sinr(&inst, &act, t, b).unwrap();
                        let r1 = sinr(&scaled, &act, t, b).unwrap();
                        assert_relative_eq!(r0, r1, max_relative = 1e-12);
                    }
                }
            }
        }
    }

    #[test]
    fn feasible_report_implies_objective_matches_binary_encoding() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..300 {
            let inst = random_instance(&mut rng);
            let act = random_activation(&mut rng, &inst);
            let Some(sol) = complete_activation(&inst, &act) else {
                continue;
            };
            assert!(verify_solution(&inst, &sol).is_feasible());
            let mut z = vec![0.0; inst.n_transmitters() * inst.n_levels()];
            for (b, l) in sol.active_transmitters() {
                z[b * inst.n_levels() + l] = 1.0;
            }
            let raw: f64 = z
                .iter()
                .enumerate()
                .map(|(k, v)| v * inst.costs()[k % inst.n_levels()])
                .sum();
            assert_relative_eq!(objective(&inst, &sol), raw);
        }
    }

    #[test]
    fn f32_evaluation_agrees_with_f64() {
        let inst = ex1(2);
        let single: Instance<f32> = inst.cast();
        let both = [Some(0), Some(0)];
        assert_relative_eq!(
            sinr(&single, &both, 0, 0).unwrap(),
            10.0f32 / 3.0,
            max_relative = 1e-6
        );
        let sol = Solution::new(vec![Some(0), Some(0)], vec![Some(0), None]);
        assert!(verify_solution(&single, &sol).is_feasible());
    }
}
