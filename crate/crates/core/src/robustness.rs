//! Smallest entanglement (concurrence) or purity (Werner weight) at which two Bobs
//! can still both violate a given functional.
//!
//! Two search policies are offered. `Free` re-optimises every direction and the
//! first Bob's sharpness at each state. `SingletFrozen` first finds a two-Bob
//! witness on the singlet and then keeps its settings, varying only a common
//! rotation of all directions and the first Bob's sharpness.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::bell::{BellFunctional, CompiledFunctional, Inequality};
use crate::bloch::{fast_value_chain, BlochTensor, Vec3};
use crate::error::{Error, Result};
use crate::measure::Direction;
use crate::optimize::{multistart, sharing_margin, OptimizerConfig};
use crate::seqchain::{value_vector, Scenario};
use crate::states::StateSpec;

/// Width of the final bisection bracket.
pub const BISECTION_TOL: f64 = 0.005;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ThresholdKind {
    Concurrence,
    #[serde(alias = "werner")]
    WernerW,
}

impl ThresholdKind {
    pub fn name(self) -> &'static str {
        match self {
            ThresholdKind::Concurrence => "concurrence",
            ThresholdKind::WernerW => "werner_w",
        }
    }

    pub fn state(self, p: f64) -> Result<StateSpec> {
        match self {
            ThresholdKind::Concurrence => StateSpec::schmidt_with_concurrence(p),
            ThresholdKind::WernerW => Ok(StateSpec::Werner { w: p }),
        }
    }
}

impl std::str::FromStr for ThresholdKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "concurrence" | "c" => Ok(ThresholdKind::Concurrence),
            "werner" | "werner_w" | "w" => Ok(ThresholdKind::WernerW),
            other => Err(Error::InvalidParameter(format!(
                "unknown threshold kind `{other}`"
            ))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SettingsPolicy {
    #[default]
    Free,
    #[serde(alias = "singlet")]
    SingletFrozen,
}

impl SettingsPolicy {
    pub fn name(self) -> &'static str {
        match self {
            SettingsPolicy::Free => "free",
            SettingsPolicy::SingletFrozen => "singlet_frozen",
        }
    }
}

impl std::str::FromStr for SettingsPolicy {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "free" => Ok(SettingsPolicy::Free),
            "singlet" | "singlet_frozen" | "frozen" => Ok(SettingsPolicy::SingletFrozen),
            other => Err(Error::InvalidParameter(format!(
                "unknown settings policy `{other}`"
            ))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ThresholdResult {
    pub functional: String,
    pub policy: SettingsPolicy,
    /// Midpoint of the final bracket.
    pub threshold: f64,
    pub kind: ThresholdKind,
    /// Infeasible at `lo`, feasible at `hi`.
    pub bracket: (f64, f64),
    pub restarts: usize,
    /// Margin of the sharing search at `hi`.
    pub margin_at_hi: f64,
}

/// Minimum concurrence of a Schmidt state for two-Bob sharing.
pub fn c_min(f: &BellFunctional, cfg: &OptimizerConfig) -> Result<ThresholdResult> {
    threshold(f, ThresholdKind::Concurrence, SettingsPolicy::Free, cfg)
}

/// Minimum Werner weight for two-Bob sharing.
pub fn w_min(f: &BellFunctional, cfg: &OptimizerConfig) -> Result<ThresholdResult> {
    threshold(f, ThresholdKind::WernerW, SettingsPolicy::Free, cfg)
}

/// Feasibility of two-Bob sharing at one state, as `(feasible, margin)`.
trait Probe {
    fn probe(&self, state: StateSpec, cfg: &OptimizerConfig) -> Result<(bool, f64)>;
}

struct FreeProbe<'a>(&'a BellFunctional);

impl Probe for FreeProbe<'_> {
    fn probe(&self, state: StateSpec, cfg: &OptimizerConfig) -> Result<(bool, f64)> {
        let r = sharing_margin(state, self.0, 2, cfg)?;
        Ok((r.feasible, r.margin))
    }
}

/// Settings of a singlet witness, searched over common rotations and `lambda_1`.
pub struct FrozenSettings {
    template: Scenario,
    compiled: CompiledFunctional,
    alice: Vec<Vec3>,
    bobs: Vec<Vec<Vec3>>,
}

/// Rotation matrix for rotation vector `r` (axis times angle).
fn rotation(r: &[f64]) -> [[f64; 3]; 3] {
    let angle = (r[0] * r[0] + r[1] * r[1] + r[2] * r[2]).sqrt();
    if angle < 1e-15 {
        return [[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]];
    }
    let k = [r[0] / angle, r[1] / angle, r[2] / angle];
    let (s, c) = angle.sin_cos();
    let t = 1.0 - c;
    [
        [
            c + t * k[0] * k[0],
            t * k[0] * k[1] - s * k[2],
            t * k[0] * k[2] + s * k[1],
        ],
        [
            t * k[1] * k[0] + s * k[2],
            c + t * k[1] * k[1],
            t * k[1] * k[2] - s * k[0],
        ],
        [
            t * k[2] * k[0] - s * k[1],
            t * k[2] * k[1] + s * k[0],
            c + t * k[2] * k[2],
        ],
    ]
}

/// Rotation by pi about y: takes the singlet to `(|00> + |11>)/sqrt 2` on Bob's side.
fn schmidt_frame(v: &Vec3, flip: bool) -> Vec3 {
    if flip {
        [-v[0], v[1], -v[2]]
    } else {
        *v
    }
}

fn rotate(q: &[[f64; 3]; 3], v: &Vec3) -> Vec3 {
    std::array::from_fn(|i| q[i][0] * v[0] + q[i][1] * v[1] + q[i][2] * v[2])
}

impl FrozenSettings {
    /// Settings of the best two-Bob witness on the singlet.
    pub fn from_singlet(f: &BellFunctional, cfg: &OptimizerConfig) -> Result<Self> {
        let r = sharing_margin(StateSpec::Singlet, f, 2, cfg)?;
        if !r.feasible {
            return Err(Error::NeverFeasible);
        }
        Ok(Self::new(r.best_scenario))
    }

    pub fn new(template: Scenario) -> Self {
        let alice = template
            .alice_dirs
            .iter()
            .map(Direction::unit_vector)
            .collect();
        let bobs = template
            .bob_dirs
            .iter()
            .map(|b| b.iter().map(Direction::unit_vector).collect())
            .collect();
        Self {
            compiled: template.functional.compile(),
            template,
            alice,
            bobs,
        }
    }

    /// `z = [rotation vector (3), lambda_1]`; `flip` maps Bob's singlet frame to the Schmidt one.
    fn margin(&self, initial: &BlochTensor, flip: bool, z: &[f64]) -> f64 {
        let q = rotation(&z[..3]);
        let alice: Vec<Vec3> = self.alice.iter().map(|v| rotate(&q, v)).collect();
        let bobs: Vec<Vec<Vec3>> = self
            .bobs
            .iter()
            .map(|b| {
                b.iter()
                    .map(|v| rotate(&q, &schmidt_frame(v, flip)))
                    .collect()
            })
            .collect();
        let refs: Vec<&[Vec3]> = bobs.iter().map(Vec::as_slice).collect();
        let mut out = [0.0; 2];
        fast_value_chain(
            &self.compiled,
            initial,
            &alice,
            &refs,
            &[z[3], 1.0],
            &mut out,
        );
        out.iter()
            .fold(f64::INFINITY, |m, v| m.min(v - self.compiled.bound))
    }

    fn scenario(&self, state: StateSpec, z: &[f64]) -> Scenario {
        let q = rotation(&z[..3]);
        let flip = matches!(state, StateSpec::Schmidt { .. });
        let dir = |v: &Vec3| Direction::from_vector(rotate(&q, v));
        Scenario {
            state,
            functional: self.template.functional.clone(),
            alice_dirs: self.alice.iter().map(dir).collect(),
            bob_dirs: self
                .bobs
                .iter()
                .map(|b| b.iter().map(|v| dir(&schmidt_frame(v, flip))).collect())
                .collect(),
            lambdas: vec![z[3], 1.0],
        }
    }

    /// Best rotated witness for `state`, verified with density matrices.
    pub fn best(&self, state: StateSpec, cfg: &OptimizerConfig) -> Result<(Scenario, f64)> {
        let initial = BlochTensor::from_spec(&state);
        let flip = matches!(state, StateSpec::Schmidt { .. });
        let lam = Some(cfg.lambda_bounds);
        let bounds = [None, None, None, lam];
        let template_lambda = self.template.lambdas[0];
        let ms = multistart(
            |z| self.margin(&initial, flip, z),
            |r, rng| {
                if r == 0 {
                    vec![0.0, 0.0, 0.0, template_lambda]
                } else {
                    vec![
                        rng.random_range(-3.2..3.2),
                        rng.random_range(-3.2..3.2),
                        rng.random_range(-3.2..3.2),
                        rng.random_range(0.6..0.95),
                    ]
                }
            },
            &[0.5, 0.5, 0.5, 0.1],
            &bounds,
            cfg,
        );
        let scenario = self.scenario(state, &ms.best.x);
        let values = value_vector(&scenario)?;
        let bound = self.template.functional.bound();
        let margin = values
            .values
            .iter()
            .fold(f64::INFINITY, |m, &v| m.min(v - bound));
        Ok((scenario, margin))
    }
}

impl Probe for FrozenSettings {
    fn probe(&self, state: StateSpec, cfg: &OptimizerConfig) -> Result<(bool, f64)> {
        let (_, margin) = self.best(state, cfg)?;
        Ok((margin > cfg.feasibility_eps, margin))
    }
}

/// Bisection on the state parameter over `[0, 1]`, assuming monotone feasibility.
///
/// A step judged infeasible is retried once with twice the restarts before the
/// bracket moves, since under-budgeting only ever produces false negatives.
pub fn threshold(
    f: &BellFunctional,
    kind: ThresholdKind,
    policy: SettingsPolicy,
    cfg: &OptimizerConfig,
) -> Result<ThresholdResult> {
    cfg.validate()?;
    let two_bob = Inequality::TWO_BOB.iter().any(|i| i.name() == f.name);
    if !two_bob {
        return Err(Error::InvalidParameter(format!(
            "`{}` has no two-Bob regime; thresholds are defined for {}",
            f.name,
            Inequality::TWO_BOB.map(|i| i.name()).join(", ")
        )));
    }
    let prober: Box<dyn Probe> = match policy {
        SettingsPolicy::Free => Box::new(FreeProbe(f)),
        SettingsPolicy::SingletFrozen => Box::new(FrozenSettings::from_singlet(f, cfg)?),
    };
    let escalated = cfg.clone().with_restarts(cfg.restarts * 2);
    let probe = |p: f64| -> Result<(bool, f64)> {
        let state = kind.state(p)?;
        let first = prober.probe(state, cfg)?;
        if first.0 {
            return Ok(first);
        }
        prober.probe(state, &escalated)
    };

    let (top_ok, top_margin) = probe(1.0)?;
    if !top_ok {
        return Err(Error::NeverFeasible);
    }
    let (mut lo, mut hi) = (0.0, 1.0);
    let mut margin_at_hi = top_margin;
    while hi - lo > BISECTION_TOL {
        let mid = 0.5 * (lo + hi);
        let (ok, margin) = probe(mid)?;
        if ok {
            hi = mid;
            margin_at_hi = margin;
        } else {
            lo = mid;
        }
    }
    Ok(ThresholdResult {
        functional: f.name.clone(),
        policy,
        threshold: 0.5 * (lo + hi),
        kind,
        bracket: (lo, hi),
        restarts: cfg.restarts,
        margin_at_hi,
    })
}
