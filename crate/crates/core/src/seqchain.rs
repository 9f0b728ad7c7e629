//! One Alice, several Bobs measuring the same qubit in turn.
//!
//! Each Bob picks one of his settings uniformly at random and knows nothing of the
//! previous Bobs' choices or outcomes. By linearity the state a Bob receives is the
//! previous Bob's non-selective, setting-averaged Lüders channel applied to what that
//! Bob received, so the chain is evolved one channel at a time.

use serde::{Deserialize, Serialize};

use crate::bell::{BellFunctional, CorrelationTable};
use crate::error::{Error, Result};
use crate::measure::{
    decohere_channel, dot, observable, quality_factor, uniform_weights, Direction,
    UnsharpMeasurement,
};
use crate::qcore::{expectation, lift_b, tensor, ComplexMat2};
use crate::states::{make_state, DensityMatrix, StateSpec};

/// A complete sequential experiment.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Scenario {
    pub state: StateSpec,
    pub functional: BellFunctional,
    pub alice_dirs: Vec<Direction>,
    /// `bob_dirs[i]` are the settings of Bob i+1.
    pub bob_dirs: Vec<Vec<Direction>>,
    /// Sharpness per Bob; the last Bob is sharp.
    pub lambdas: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ValueVector {
    pub values: Vec<f64>,
    pub violations: Vec<bool>,
}

impl ValueVector {
    pub fn bob_count(&self) -> usize {
        self.values.len()
    }

    pub fn all_violate(&self) -> bool {
        self.violations.iter().all(|&v| v)
    }
}

impl Scenario {
    pub fn bob_count(&self) -> usize {
        self.bob_dirs.len()
    }

    pub fn validate(&self) -> Result<()> {
        self.state.validate()?;
        self.functional.validate()?;
        let (na, nb) = (self.functional.n_alice(), self.functional.n_bob());
        if self.bob_dirs.is_empty() {
            return Err(Error::InvalidParameter(
                "a scenario needs at least one Bob".into(),
            ));
        }
        if self.alice_dirs.len() != na {
            return Err(Error::DimensionMismatch {
                expected: format!("{na} Alice directions"),
                got: self.alice_dirs.len().to_string(),
            });
        }
        if let Some(bad) = self.bob_dirs.iter().position(|d| d.len() != nb) {
            return Err(Error::DimensionMismatch {
                expected: format!("{nb} directions for every Bob"),
                got: format!("{} for Bob {}", self.bob_dirs[bad].len(), bad + 1),
            });
        }
        if self.lambdas.len() != self.bob_count() {
            return Err(Error::DimensionMismatch {
                expected: format!("{} sharpness values", self.bob_count()),
                got: self.lambdas.len().to_string(),
            });
        }
        if let Some(&l) = self.lambdas.iter().find(|&&l| !(l > 0.0 && l <= 1.0)) {
            return Err(Error::InvalidParameter(format!(
                "sharpness {l} outside (0, 1]"
            )));
        }
        if self.lambdas.last() != Some(&1.0) {
            return Err(Error::InvalidParameter(
                "the last Bob must measure sharply (lambda = 1)".into(),
            ));
        }
        Ok(())
    }

    fn settings(&self, bob: usize) -> Vec<UnsharpMeasurement> {
        self.bob_dirs[bob]
            .iter()
            .map(|&d| UnsharpMeasurement {
                direction: d,
                lambda: self.lambdas[bob],
            })
            .collect()
    }
}

/// Table between Alice and a Bob holding the (already evolved) state `rho`.
fn table_for(
    rho: &DensityMatrix,
    alice: &[Direction],
    bob: &[Direction],
    lambda: f64,
) -> CorrelationTable {
    let id = ComplexMat2::identity();
    let alice_obs: Vec<ComplexMat2> = alice.iter().map(observable).collect();
    let bob_obs: Vec<ComplexMat2> = bob.iter().map(|d| observable(d).scale_re(lambda)).collect();
    CorrelationTable {
        corr: alice_obs
            .iter()
            .map(|a| {
                bob_obs
                    .iter()
                    .map(|b| expectation(rho.matrix(), &tensor(a, b)))
                    .collect()
            })
            .collect(),
        alice_marg: alice_obs
            .iter()
            .map(|a| expectation(rho.matrix(), &tensor(a, &id)))
            .collect(),
        bob_marg: bob_obs
            .iter()
            .map(|b| expectation(rho.matrix(), &lift_b(b)))
            .collect(),
    }
}

/// Density-matrix evolution through every Bob, yielding each Bob's table.
fn tables(s: &Scenario, upto: usize) -> Result<Vec<CorrelationTable>> {
    let mut rho = make_state(&s.state)?;
    let mut out = Vec::with_capacity(upto);
    for bob in 0..upto {
        out.push(table_for(
            &rho,
            &s.alice_dirs,
            &s.bob_dirs[bob],
            s.lambdas[bob],
        ));
        if bob + 1 < upto {
            let settings = s.settings(bob);
            rho = decohere_channel(&rho, &settings, &uniform_weights(settings.len()))?;
        }
    }
    Ok(out)
}

/// Correlation table between Alice and Bob `i` (1-based).
pub fn bob_table(s: &Scenario, i: usize) -> Result<CorrelationTable> {
    s.validate()?;
    if i == 0 || i > s.bob_count() {
        return Err(Error::IndexOutOfRange {
            index: i,
            count: s.bob_count(),
        });
    }
    Ok(tables(s, i)?.pop().expect("non-empty"))
}

pub fn value_vector(s: &Scenario) -> Result<ValueVector> {
    s.validate()?;
    let f = s.functional.compile();
    let values: Vec<f64> = tables(s, s.bob_count())?
        .iter()
        .map(|t| f.value(t))
        .collect();
    let violations = values.iter().map(|&v| v > f.bound).collect();
    Ok(ValueVector { values, violations })
}

/// `x^T M_1 ... M_j y` expanded through the dot-product recursion
/// `D_j(x, y) = F_j D_{j-1}(x, y) + (1 - F_j) avg_k D_{j-1}(x, y_jk) (y_jk . y)`.
fn nested_overlap(x: [f64; 3], y: [f64; 3], prev: &[Vec<[f64; 3]>], fs: &[f64]) -> f64 {
    match prev.split_last() {
        None => dot(x, y),
        Some((last, rest)) => {
            let f = fs[rest.len()];
            let avg = last
                .iter()
                .map(|yk| nested_overlap(x, *yk, rest, fs) * dot(*yk, y))
                .sum::<f64>()
                / last.len() as f64;
            f * nested_overlap(x, y, rest, fs) + (1.0 - f) * avg
        }
    }
}

/// Closed-form singlet correlator between Alice's `alice_dir` and a Bob measuring
/// `bob_dir`, after the Bobs whose settings are `prev_settings` (in order).
///
/// `lambdas` lists the sharpness of every previous Bob followed by this Bob's.
pub fn analytic_singlet_corr(
    alice_dir: &Direction,
    prev_settings: &[Vec<Direction>],
    bob_dir: &Direction,
    lambdas: &[f64],
) -> Result<f64> {
    if lambdas.len() != prev_settings.len() + 1 {
        return Err(Error::DimensionMismatch {
            expected: format!("{} sharpness values", prev_settings.len() + 1),
            got: lambdas.len().to_string(),
        });
    }
    let prev: Vec<Vec<[f64; 3]>> = prev_settings
        .iter()
        .map(|dirs| dirs.iter().map(Direction::unit_vector).collect())
        .collect();
    let fs: Vec<f64> = lambdas[..prev.len()]
        .iter()
        .map(|&l| quality_factor(l))
        .collect();
    let overlap = nested_overlap(alice_dir.unit_vector(), bob_dir.unit_vector(), &prev, &fs);
    Ok(-lambdas[prev.len()] * overlap)
}

/// Every Bob's table from the closed-form singlet correlators (marginals vanish).
pub fn analytic_tables(s: &Scenario) -> Result<Vec<CorrelationTable>> {
    s.validate()?;
    if s.state != StateSpec::Singlet {
        return Err(Error::UnsupportedState);
    }
    (0..s.bob_count())
        .map(|bob| {
            let prev = &s.bob_dirs[..bob];
            let lambdas = &s.lambdas[..=bob];
            let corr = s
                .alice_dirs
                .iter()
                .map(|a| {
                    s.bob_dirs[bob]
                        .iter()
                        .map(|b| analytic_singlet_corr(a, prev, b, lambdas))
                        .collect::<Result<Vec<_>>>()
                })
                .collect::<Result<Vec<_>>>()?;
            Ok(CorrelationTable {
                corr,
                alice_marg: vec![0.0; s.alice_dirs.len()],
                bob_marg: vec![0.0; s.bob_dirs[bob].len()],
            })
        })
        .collect()
}

pub fn analytic_value_vector(s: &Scenario) -> Result<ValueVector> {
    let f = s.functional.compile();
    let values: Vec<f64> = analytic_tables(s)?.iter().map(|t| f.value(t)).collect();
    let violations = values.iter().map(|&v| v > f.bound).collect();
    Ok(ValueVector { values, violations })
}

/// A published setting choice with its expected per-Bob values.
#[derive(Debug, Clone, PartialEq)]
pub struct Preset {
    pub name: String,
    pub scenario: Scenario,
    pub expected: Vec<f64>,
    /// Angles are quoted to two decimals, which limits agreement.
    pub tolerance: f64,
}

pub const PRESET_NAMES: [&str; 3] = [
    "paper-chain3-2bob",
    "paper-chain3-3bob",
    "paper-chain4-2bob",
];

fn dirs(pairs: &[(f64, f64)]) -> Vec<Direction> {
    pairs.iter().map(|&(t, p)| Direction::new(t, p)).collect()
}

// angles are the rounded two-decimal values, not approximations of pi
#[allow(clippy::approx_constant)]
pub fn preset(name: &str) -> Result<Preset> {
    use crate::bell::{builtin, Inequality};
    let chain3_alice = [(1.19, 1.13), (1.21, 6.28), (1.59, 5.28)];
    let chain3_bob = [(2.00, 3.70), (1.76, 2.62), (1.34, 1.66)];
    let (scenario, expected) = match name {
        "paper-chain3-2bob" => (
            Scenario {
                state: StateSpec::Singlet,
                functional: builtin(Inequality::Chain3),
                alice_dirs: dirs(&chain3_alice),
                bob_dirs: vec![dirs(&chain3_bob); 2],
                lambdas: vec![0.81, 1.0],
            },
            vec![4.20, 4.13],
        ),
        "paper-chain3-3bob" => (
            Scenario {
                state: StateSpec::Singlet,
                functional: builtin(Inequality::Chain3),
                alice_dirs: dirs(&chain3_alice),
                bob_dirs: vec![dirs(&chain3_bob); 3],
                lambdas: vec![0.77, 0.94, 1.0],
            },
            vec![4.00, 4.00, 2.86],
        ),
        "paper-chain4-2bob" => (
            Scenario {
                state: StateSpec::Singlet,
                functional: builtin(Inequality::Chain4),
                alice_dirs: dirs(&[(0.39, 0.0), (1.18, 0.0), (1.96, 6.28), (2.75, 0.0)]),
                bob_dirs: vec![
                    dirs(&[(2.36, 3.14), (1.57, 3.14), (0.78, 3.14), (0.0, 5.77)]),
                    dirs(&[(2.36, 3.14), (1.57, 3.14), (0.78, 3.14), (0.0, 6.09)]),
                ],
                lambdas: vec![0.81, 1.0],
            },
            vec![6.00, 5.85],
        ),
        _ => return Err(Error::UnknownPreset(name.to_string())),
    };
    Ok(Preset {
        name: name.to_string(),
        scenario,
        expected,
        tolerance: 0.05,
    })
}
