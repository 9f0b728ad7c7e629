//! The three shared-state families: singlet, Schmidt-form pure states and Werner states.

use std::f64::consts::FRAC_PI_2;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::qcore::{eigenvalues_hermitian4, ComplexMat4, C64};

/// A two-qubit density matrix (Hermitian, PSD, unit trace).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DensityMatrix(ComplexMat4);

impl DensityMatrix {
    /// Wraps a matrix after checking Hermiticity, trace and positivity.
    pub fn new(m: ComplexMat4) -> Result<Self> {
        let defect = m.hermitian_defect();
        if defect > crate::qcore::HERMITIAN_TOL {
            return Err(Error::NonHermitian(defect));
        }
        let tr = m.trace();
        if (tr.re - 1.0).abs() > 1e-10 || tr.im.abs() > 1e-10 {
            return Err(Error::InvalidParameter(format!("trace {tr} is not 1")));
        }
        let lo = eigenvalues_hermitian4(&m)[0];
        if lo < -crate::qcore::PSD_TOL {
            return Err(Error::NegativeEigenvalue(lo));
        }
        Ok(Self(m))
    }

    pub(crate) fn new_unchecked(m: ComplexMat4) -> Self {
        Self(m)
    }

    pub fn from_pure(psi: [C64; 4]) -> Self {
        let mut m = ComplexMat4::zeros();
        for r in 0..4 {
            for c in 0..4 {
                m.0[r][c] = psi[r] * psi[c].conj();
            }
        }
        Self(m)
    }

    pub fn matrix(&self) -> &ComplexMat4 {
        &self.0
    }
}

/// State family selector, written on the command line as `singlet`,
/// `schmidt:<alpha>` or `werner:<w>`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub enum StateSpec {
    Singlet,
    /// `cos(alpha)|00> + sin(alpha)|11>`, alpha in `[0, pi/2]`.
    Schmidt {
        alpha: f64,
    },
    /// `w |singlet><singlet| + (1 - w) I/4`, w in `[0, 1]`.
    Werner {
        w: f64,
    },
}

impl StateSpec {
    pub fn validate(&self) -> Result<()> {
        match *self {
            StateSpec::Singlet => Ok(()),
            StateSpec::Schmidt { alpha } if (0.0..=FRAC_PI_2).contains(&alpha) => Ok(()),
            StateSpec::Schmidt { alpha } => Err(Error::InvalidParameter(format!(
                "Schmidt angle {alpha} outside [0, pi/2]"
            ))),
            StateSpec::Werner { w } if (0.0..=1.0).contains(&w) => Ok(()),
            StateSpec::Werner { w } => Err(Error::InvalidParameter(format!(
                "Werner weight {w} outside [0, 1]"
            ))),
        }
    }

    /// Schmidt state with the given concurrence (alpha in `[0, pi/4]`).
    pub fn schmidt_with_concurrence(c: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&c) {
            return Err(Error::InvalidParameter(format!(
                "concurrence {c} outside [0, 1]"
            )));
        }
        Ok(StateSpec::Schmidt {
            alpha: 0.5 * c.asin(),
        })
    }
}

impl fmt::Display for StateSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            StateSpec::Singlet => write!(f, "singlet"),
            StateSpec::Schmidt { alpha } => write!(f, "schmidt:{alpha}"),
            StateSpec::Werner { w } => write!(f, "werner:{w}"),
        }
    }
}

impl FromStr for StateSpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        let (kind, arg) = match s.split_once(':') {
            Some((k, a)) => (k.trim(), Some(a.trim())),
            None => (s, None),
        };
        let parse_arg = |a: Option<&str>| -> Result<f64> {
            let a =
                a.ok_or_else(|| Error::InvalidParameter(format!("`{kind}` needs a parameter")))?;
            a.parse::<f64>()
                .map_err(|_| Error::InvalidParameter(format!("bad number `{a}` in state `{s}`")))
        };
        let spec = match kind.to_ascii_lowercase().as_str() {
            "singlet" if arg.is_none() => StateSpec::Singlet,
            "schmidt" => StateSpec::Schmidt {
                alpha: parse_arg(arg)?,
            },
            "werner" => StateSpec::Werner { w: parse_arg(arg)? },
            _ => return Err(Error::InvalidParameter(format!("unknown state `{s}`"))),
        };
        spec.validate()?;
        Ok(spec)
    }
}

impl TryFrom<String> for StateSpec {
    type Error = Error;
    fn try_from(s: String) -> Result<Self> {
        s.parse()
    }
}

impl From<StateSpec> for String {
    fn from(s: StateSpec) -> String {
        s.to_string()
    }
}

fn singlet_matrix() -> ComplexMat4 {
    let h = std::f64::consts::FRAC_1_SQRT_2;
    let z = C64::new(0.0, 0.0);
    *DensityMatrix::from_pure([z, C64::new(h, 0.0), C64::new(-h, 0.0), z]).matrix()
}

pub fn make_state(spec: &StateSpec) -> Result<DensityMatrix> {
    spec.validate()?;
    let m = match *spec {
        StateSpec::Singlet => singlet_matrix(),
        StateSpec::Schmidt { alpha } => {
            let z = C64::new(0.0, 0.0);
            let psi = [C64::new(alpha.cos(), 0.0), z, z, C64::new(alpha.sin(), 0.0)];
            *DensityMatrix::from_pure(psi).matrix()
        }
        StateSpec::Werner { w } => {
            singlet_matrix().scale_re(w) + ComplexMat4::identity().scale_re(0.25 * (1.0 - w))
        }
    };
    Ok(DensityMatrix::new_unchecked(m))
}

/// Concurrence `sin(2 alpha)` of the Schmidt state.
pub fn concurrence_schmidt(alpha: f64) -> Result<f64> {
    StateSpec::Schmidt { alpha }.validate()?;
    Ok((2.0 * alpha).sin())
}
