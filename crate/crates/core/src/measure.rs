//! Dichotomic spin measurements, sharp and unsharp, and the Lüders update they induce on
//! Bob's half of the shared pair.

use std::f64::consts::{PI, TAU};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::qcore::{lift_b, sqrt_psd, ComplexMat2, ComplexMat4};
use crate::states::DensityMatrix;

/// Probabilities below this are treated as impossible outcomes.
pub const MIN_PROBABILITY: f64 = 1e-14;

/// Spin-measurement axis in polar angles.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Direction {
    pub theta: f64,
    pub phi: f64,
}

impl Direction {
    /// Builds a direction from arbitrary real angles, folded into
    /// `theta in [0, pi]`, `phi in [0, 2 pi)` without changing the unit vector.
    pub fn new(theta: f64, phi: f64) -> Self {
        let mut theta = theta.rem_euclid(TAU);
        let mut phi = phi;
        if theta > PI {
            theta = TAU - theta;
            phi += PI;
        }
        let mut phi = phi.rem_euclid(TAU);
        if phi >= TAU {
            phi = 0.0;
        }
        Self { theta, phi }
    }

    pub fn from_vector(v: [f64; 3]) -> Self {
        let norm = (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt();
        let theta = (v[2] / norm).clamp(-1.0, 1.0).acos();
        Self::new(theta, v[1].atan2(v[0]))
    }

    pub fn unit_vector(&self) -> [f64; 3] {
        let (st, ct) = self.theta.sin_cos();
        let (sp, cp) = self.phi.sin_cos();
        [st * cp, st * sp, ct]
    }

    pub fn z() -> Self {
        Self::new(0.0, 0.0)
    }

    pub fn x() -> Self {
        Self::new(PI / 2.0, 0.0)
    }
}

pub fn dot(a: [f64; 3], b: [f64; 3]) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

/// Two-outcome POVM `E± = (I ± lambda n.sigma) / 2`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct UnsharpMeasurement {
    pub direction: Direction,
    pub lambda: f64,
}

impl UnsharpMeasurement {
    pub fn new(direction: Direction, lambda: f64) -> Result<Self> {
        if !(lambda > 0.0 && lambda <= 1.0) {
            return Err(Error::InvalidParameter(format!(
                "sharpness {lambda} outside (0, 1]"
            )));
        }
        Ok(Self { direction, lambda })
    }

    pub fn sharp(direction: Direction) -> Self {
        Self {
            direction,
            lambda: 1.0,
        }
    }

    /// Quality factor `F = sqrt(1 - lambda^2)`: how much of the state survives.
    pub fn quality_factor(&self) -> f64 {
        quality_factor(self.lambda)
    }

    /// Precision `G = lambda`: the information gained.
    pub fn precision(&self) -> f64 {
        self.lambda
    }
}

pub fn quality_factor(lambda: f64) -> f64 {
    (1.0 - lambda * lambda).max(0.0).sqrt()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Outcome {
    Plus,
    Minus,
}

impl Outcome {
    pub const BOTH: [Outcome; 2] = [Outcome::Plus, Outcome::Minus];

    pub fn value(self) -> i8 {
        match self {
            Outcome::Plus => 1,
            Outcome::Minus => -1,
        }
    }

    pub fn sign(self) -> f64 {
        f64::from(self.value())
    }
}

impl TryFrom<i64> for Outcome {
    type Error = Error;
    fn try_from(v: i64) -> Result<Self> {
        match v {
            1 => Ok(Outcome::Plus),
            -1 => Ok(Outcome::Minus),
            _ => Err(Error::InvalidParameter(format!("outcome {v} is not ±1"))),
        }
    }
}

/// `sigma . n` for the direction's unit vector.
pub fn observable(d: &Direction) -> ComplexMat2 {
    ComplexMat2::spin_along(d.unit_vector())
}

pub fn effects(m: &UnsharpMeasurement) -> Result<(ComplexMat2, ComplexMat2)> {
    let m = UnsharpMeasurement::new(m.direction, m.lambda)?;
    let half_i = ComplexMat2::identity().scale_re(0.5);
    let half_obs = observable(&m.direction).scale_re(0.5 * m.lambda);
    Ok((half_i + half_obs, half_i - half_obs))
}

fn effect(m: &UnsharpMeasurement, outcome: Outcome) -> Result<ComplexMat2> {
    let (plus, minus) = effects(m)?;
    Ok(match outcome {
        Outcome::Plus => plus,
        Outcome::Minus => minus,
    })
}

/// Unnormalised Lüders branch `(I (x) sqrt E) rho (I (x) sqrt E)`.
fn luders_branch(rho: &ComplexMat4, root: &ComplexMat4) -> ComplexMat4 {
    *root * *rho * *root
}

/// Bob measures `m` and obtains `outcome`; returns the outcome probability and the
/// normalised post-measurement state.
pub fn luders_update_b(
    rho: &DensityMatrix,
    m: &UnsharpMeasurement,
    outcome: Outcome,
) -> Result<(f64, DensityMatrix)> {
    let e = effect(m, outcome)?;
    let prob = crate::qcore::expectation(rho.matrix(), &lift_b(&e));
    if prob < MIN_PROBABILITY {
        return Err(Error::ZeroProbability(prob));
    }
    let root = lift_b(&sqrt_psd(&e)?);
    let post = luders_branch(rho.matrix(), &root).scale_re(1.0 / prob);
    Ok((prob, DensityMatrix::new_unchecked(post)))
}

/// Non-selective Bob channel averaged over settings chosen with the given weights.
pub fn decohere_channel(
    rho: &DensityMatrix,
    settings: &[UnsharpMeasurement],
    probs: &[f64],
) -> Result<DensityMatrix> {
    if settings.len() != probs.len() || settings.is_empty() {
        return Err(Error::InvalidParameter(format!(
            "{} settings but {} weights",
            settings.len(),
            probs.len()
        )));
    }
    let total: f64 = probs.iter().sum();
    if (total - 1.0).abs() > 1e-12 || probs.iter().any(|&p| p < 0.0) {
        return Err(Error::InvalidParameter(format!(
            "setting weights must be non-negative and sum to 1 (sum {total})"
        )));
    }
    let mut out = ComplexMat4::zeros();
    for (m, &p) in settings.iter().zip(probs) {
        let (plus, minus) = effects(m)?;
        for e in [plus, minus] {
            let root = lift_b(&sqrt_psd(&e)?);
            out = out + luders_branch(rho.matrix(), &root).scale_re(p);
        }
    }
    Ok(DensityMatrix::new_unchecked(out))
}

/// Uniform weights over `n` settings.
pub fn uniform_weights(n: usize) -> Vec<f64> {
    vec![1.0 / n as f64; n]
}
