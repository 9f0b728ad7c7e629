//! Real Pauli-basis representation of a two-qubit state and of the averaged Bob channel.
//!
//! `rho = 1/4 * sum_ij R_ij sigma_i (x) sigma_j`, stored as Alice's Bloch vector
//! `R_i0`, Bob's Bloch vector `R_0j` and the correlation matrix `R_ij` (i, j >= 1).
//! The non-selective Lüders channel of an unsharp measurement along `n` acts on
//! Bob's index only, as `r -> F r + (1 - F)(n.r) n`, so averaging over settings
//! gives a symmetric 3x3 map `M = F I + (1 - F) avg_k n_k n_k^T`. This is what the
//! optimiser evaluates; the density-matrix path in `seqchain` is the reference.

use crate::bell::CompiledFunctional;
use crate::measure::{dot, quality_factor};
use crate::qcore::{expectation, tensor, ComplexMat2};
use crate::states::{DensityMatrix, StateSpec};

pub type Vec3 = [f64; 3];
pub type Mat3 = [[f64; 3]; 3];

/// Upper bound on settings per party in the fixed-size fast path.
pub const MAX_FAST_SETTINGS: usize = 4;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BlochTensor {
    pub alice: Vec3,
    pub bob: Vec3,
    pub corr: Mat3,
}

impl BlochTensor {
    pub fn from_density(rho: &DensityMatrix) -> Self {
        let p = |k| ComplexMat2::pauli(k);
        let e = |i, j| expectation(rho.matrix(), &tensor(&p(i), &p(j)));
        let mut out = BlochTensor {
            alice: [0.0; 3],
            bob: [0.0; 3],
            corr: [[0.0; 3]; 3],
        };
        for i in 0..3 {
            out.alice[i] = e(i + 1, 0);
            out.bob[i] = e(0, i + 1);
            for j in 0..3 {
                out.corr[i][j] = e(i + 1, j + 1);
            }
        }
        out
    }

    /// Closed forms for the three families (the state must already be valid).
    pub fn from_spec(spec: &StateSpec) -> Self {
        match *spec {
            StateSpec::Singlet => Self::werner(1.0),
            StateSpec::Werner { w } => Self::werner(w),
            StateSpec::Schmidt { alpha } => {
                let (s, c) = (2.0 * alpha).sin_cos();
                BlochTensor {
                    alice: [0.0, 0.0, c],
                    bob: [0.0, 0.0, c],
                    corr: [[s, 0.0, 0.0], [0.0, -s, 0.0], [0.0, 0.0, 1.0]],
                }
            }
        }
    }

    fn werner(w: f64) -> Self {
        BlochTensor {
            alice: [0.0; 3],
            bob: [0.0; 3],
            corr: [[-w, 0.0, 0.0], [0.0, -w, 0.0], [0.0, 0.0, -w]],
        }
    }

    /// `a^T R b`.
    pub fn correlator(&self, a: &Vec3, b: &Vec3) -> f64 {
        let mut acc = 0.0;
        for i in 0..3 {
            acc += a[i] * dot(self.corr[i], *b);
        }
        acc
    }

    /// Applies the equal-weight non-selective channel of Bob's settings at sharpness `lambda`.
    pub fn apply_bob_channel(&mut self, dirs: &[Vec3], lambda: f64) {
        let m = channel_map(dirs, lambda);
        self.corr = mat_mul(&self.corr, &m);
        self.bob = mat_vec(&m, &self.bob);
    }
}

/// `F I + (1 - F) avg_k n_k n_k^T`.
pub fn channel_map(dirs: &[Vec3], lambda: f64) -> Mat3 {
    let f = quality_factor(lambda);
    let w = (1.0 - f) / dirs.len() as f64;
    let mut m = [[0.0; 3]; 3];
    for (i, row) in m.iter_mut().enumerate() {
        row[i] = f;
    }
    for n in dirs {
        for i in 0..3 {
            for j in 0..3 {
                m[i][j] += w * n[i] * n[j];
            }
        }
    }
    m
}

fn mat_mul(a: &Mat3, b: &Mat3) -> Mat3 {
    let mut c = [[0.0; 3]; 3];
    for i in 0..3 {
        for k in 0..3 {
            for j in 0..3 {
                c[i][j] += a[i][k] * b[k][j];
            }
        }
    }
    c
}

fn mat_vec(a: &Mat3, v: &Vec3) -> Vec3 {
    [dot(a[0], *v), dot(a[1], *v), dot(a[2], *v)]
}

/// Functional value between Alice and a Bob holding state `t`, without allocating.
///
/// `alice` and `bob` hold unit vectors; `lambda` is this Bob's sharpness.
pub fn fast_value(
    f: &CompiledFunctional,
    t: &BlochTensor,
    alice: &[Vec3],
    bob: &[Vec3],
    lambda: f64,
) -> f64 {
    // Alice's rows of R projected once: row_u = x_u^T R
    let mut rows = [[0.0; 3]; MAX_FAST_SETTINGS];
    for (u, x) in alice.iter().enumerate() {
        for j in 0..3 {
            rows[u][j] = x[0] * t.corr[0][j] + x[1] * t.corr[1][j] + x[2] * t.corr[2][j];
        }
    }
    let mut acc = f.constant;
    for (u, x) in alice.iter().enumerate() {
        let crow = &f.corr[u];
        for (v, y) in bob.iter().enumerate() {
            let c = crow[v];
            if c != 0.0 {
                acc += c * lambda * dot(rows[u], *y);
            }
        }
        if f.alice[u] != 0.0 {
            acc += f.alice[u] * dot(*x, t.alice);
        }
    }
    for (v, y) in bob.iter().enumerate() {
        if f.bob[v] != 0.0 {
            acc += f.bob[v] * lambda * dot(*y, t.bob);
        }
    }
    if f.use_abs {
        acc.abs()
    } else {
        acc
    }
}

/// Values for every Bob in sequence; `bobs[i]` are Bob i's directions, `lambdas[i]` his
/// sharpness. Writes into `out` (length = number of Bobs).
pub fn fast_value_chain(
    f: &CompiledFunctional,
    initial: &BlochTensor,
    alice: &[Vec3],
    bobs: &[&[Vec3]],
    lambdas: &[f64],
    out: &mut [f64],
) {
    let mut t = *initial;
    for (i, (dirs, &lambda)) in bobs.iter().zip(lambdas).enumerate() {
        out[i] = fast_value(f, &t, alice, dirs, lambda);
        if i + 1 < bobs.len() {
            t.apply_bob_channel(dirs, lambda);
        }
    }
}
