//! Fixed-size complex matrices for one and two qubits.
//!
//! Two-qubit operators use the index convention `row = 2 * i_a + i_b`, so the
//! first tensor factor (Alice) is the slow index and the second (Bob) the fast one.

use std::ops::{Add, Mul, Sub};

use num_complex::Complex64;

use crate::error::{Error, Result};

pub type C64 = Complex64;

/// Tolerance for Hermiticity and PSD checks.
pub const HERMITIAN_TOL: f64 = 1e-10;
/// Eigenvalues down to `-PSD_TOL` are clamped to zero.
pub const PSD_TOL: f64 = 1e-10;

const ZERO: C64 = C64::new(0.0, 0.0);
const ONE: C64 = C64::new(1.0, 0.0);

macro_rules! square_matrix {
    ($name:ident, $n:expr) => {
        #[derive(Debug, Clone, Copy, PartialEq)]
        pub struct $name(pub [[C64; $n]; $n]);

        impl $name {
            pub const DIM: usize = $n;

            pub fn zeros() -> Self {
                Self([[ZERO; $n]; $n])
            }

            pub fn identity() -> Self {
                let mut m = Self::zeros();
                for i in 0..$n {
                    m.0[i][i] = ONE;
                }
                m
            }

            pub fn from_real_diag(d: [f64; $n]) -> Self {
                let mut m = Self::zeros();
                for i in 0..$n {
                    m.0[i][i] = C64::new(d[i], 0.0);
                }
                m
            }

            pub fn get(&self, r: usize, c: usize) -> C64 {
                self.0[r][c]
            }

            pub fn adjoint(&self) -> Self {
                let mut m = Self::zeros();
                for r in 0..$n {
                    for c in 0..$n {
                        m.0[r][c] = self.0[c][r].conj();
                    }
                }
                m
            }

            pub fn scale(&self, s: C64) -> Self {
                let mut m = *self;
                m.0.iter_mut().flatten().for_each(|z| *z *= s);
                m
            }

            pub fn scale_re(&self, s: f64) -> Self {
                self.scale(C64::new(s, 0.0))
            }

            pub fn trace(&self) -> C64 {
                (0..$n).map(|i| self.0[i][i]).sum()
            }

            /// Largest entry modulus.
            pub fn max_abs(&self) -> f64 {
                self.0
                    .iter()
                    .flatten()
                    .map(|z| z.norm())
                    .fold(0.0, f64::max)
            }

            pub fn hermitian_defect(&self) -> f64 {
                (*self - self.adjoint()).max_abs()
            }

            pub fn is_hermitian(&self) -> bool {
                self.hermitian_defect() <= HERMITIAN_TOL
            }

            pub fn approx_eq(&self, other: &Self, tol: f64) -> bool {
                (*self - *other).max_abs() <= tol
            }
        }

        impl Add for $name {
            type Output = Self;
            fn add(self, rhs: Self) -> Self {
                let mut m = self;
                for r in 0..$n {
                    for c in 0..$n {
                        m.0[r][c] += rhs.0[r][c];
                    }
                }
                m
            }
        }

        impl Sub for $name {
            type Output = Self;
            fn sub(self, rhs: Self) -> Self {
                let mut m = self;
                for r in 0..$n {
                    for c in 0..$n {
                        m.0[r][c] -= rhs.0[r][c];
                    }
                }
                m
            }
        }

        impl Mul for $name {
            type Output = Self;
            fn mul(self, rhs: Self) -> Self {
                let mut m = Self::zeros();
                for r in 0..$n {
                    for k in 0..$n {
                        let a = self.0[r][k];
                        if a == ZERO {
                            continue;
                        }
                        for c in 0..$n {
                            m.0[r][c] += a * rhs.0[k][c];
                        }
                    }
                }
                m
            }
        }
    };
}

square_matrix!(ComplexMat2, 2);
square_matrix!(ComplexMat4, 4);

impl ComplexMat2 {
    pub fn new(a: C64, b: C64, c: C64, d: C64) -> Self {
        Self([[a, b], [c, d]])
    }

    /// Pauli matrix `sigma_k` for `k` in 1..=3; `k = 0` gives the identity.
    pub fn pauli(k: usize) -> Self {
        let (z, o, i) = (ZERO, ONE, C64::new(0.0, 1.0));
        match k {
            0 => Self::identity(),
            1 => Self::new(z, o, o, z),
            2 => Self::new(z, -i, i, z),
            3 => Self::new(o, z, z, -o),
            _ => panic!("Pauli index {k} out of range"),
        }
    }

    /// `n . sigma` for a real 3-vector.
    pub fn spin_along(n: [f64; 3]) -> Self {
        Self::new(
            C64::new(n[2], 0.0),
            C64::new(n[0], -n[1]),
            C64::new(n[0], n[1]),
            C64::new(-n[2], 0.0),
        )
    }

    /// Eigenvalues `(lo, hi)` of a Hermitian matrix from trace and determinant.
    pub fn eigenvalues_hermitian(&self) -> (f64, f64) {
        let a = self.0[0][0].re;
        let d = self.0[1][1].re;
        let b = self.0[0][1];
        let half_tr = 0.5 * (a + d);
        let disc = (0.25 * (a - d) * (a - d) + b.norm_sqr()).sqrt();
        (half_tr - disc, half_tr + disc)
    }
}

/// Kronecker product `a (x) b`.
pub fn tensor(a: &ComplexMat2, b: &ComplexMat2) -> ComplexMat4 {
    let mut m = ComplexMat4::zeros();
    for ia in 0..2 {
        for ja in 0..2 {
            for ib in 0..2 {
                for jb in 0..2 {
                    m.0[2 * ia + ib][2 * ja + jb] = a.0[ia][ja] * b.0[ib][jb];
                }
            }
        }
    }
    m
}

/// Trace over the second (Bob) factor.
pub fn partial_trace_b(m: &ComplexMat4) -> ComplexMat2 {
    let mut out = ComplexMat2::zeros();
    for ia in 0..2 {
        for ja in 0..2 {
            out.0[ia][ja] = m.0[2 * ia][2 * ja] + m.0[2 * ia + 1][2 * ja + 1];
        }
    }
    out
}

/// Trace over the first (Alice) factor.
pub fn partial_trace_a(m: &ComplexMat4) -> ComplexMat2 {
    let mut out = ComplexMat2::zeros();
    for ib in 0..2 {
        for jb in 0..2 {
            out.0[ib][jb] = m.0[ib][jb] + m.0[2 + ib][2 + jb];
        }
    }
    out
}

/// Principal square root of a Hermitian PSD 2x2 matrix.
///
/// Uses `sqrt(M) = (M + sqrt(det M) I) / sqrt(tr M + 2 sqrt(det M))`, with the
/// eigenvalues clamped at zero first.
pub fn sqrt_psd(m: &ComplexMat2) -> Result<ComplexMat2> {
    let defect = m.hermitian_defect();
    if defect > HERMITIAN_TOL {
        return Err(Error::NonHermitian(defect));
    }
    let (lo, hi) = m.eigenvalues_hermitian();
    if lo < -PSD_TOL {
        return Err(Error::NegativeEigenvalue(lo));
    }
    let (lo, hi) = (lo.max(0.0), hi.max(0.0));
    let s = lo.sqrt() + hi.sqrt();
    if s == 0.0 {
        return Ok(ComplexMat2::zeros());
    }
    let root_det = (lo * hi).sqrt();
    // Shift the spectrum by the clamp so a slightly negative eigenvalue maps to exactly zero.
    let herm = (*m + m.adjoint()).scale_re(0.5);
    let clamp_shift = lo - m.eigenvalues_hermitian().0;
    let shifted = herm + ComplexMat2::identity().scale_re(root_det + clamp_shift);
    Ok(shifted.scale_re(1.0 / s))
}

/// `tr(rho . obs)` returned as a real number.
pub fn expectation(rho: &ComplexMat4, obs: &ComplexMat4) -> f64 {
    let mut acc = ZERO;
    for r in 0..4 {
        for k in 0..4 {
            acc += rho.0[r][k] * obs.0[k][r];
        }
    }
    debug_assert!(acc.im.abs() <= 1e-8, "non-real expectation {acc}");
    acc.re
}

/// `I_2 (x) m`, i.e. an operator acting on Bob's factor only.
pub fn lift_b(m: &ComplexMat2) -> ComplexMat4 {
    tensor(&ComplexMat2::identity(), m)
}

/// Eigenvalues of a Hermitian 4x4 matrix in ascending order.
///
/// Cyclic Jacobi on the 8x8 real symmetric embedding `[[Re, -Im], [Im, Re]]`,
/// whose spectrum is that of `m` with every eigenvalue doubled.
pub fn eigenvalues_hermitian4(m: &ComplexMat4) -> [f64; 4] {
    const N: usize = 8;
    let mut a = [[0.0f64; N]; N];
    for r in 0..4 {
        for c in 0..4 {
            let z = m.0[r][c];
            a[r][c] = z.re;
            a[r + 4][c + 4] = z.re;
            a[r][c + 4] = -z.im;
            a[r + 4][c] = z.im;
        }
    }
    for _sweep in 0..100 {
        let off: f64 = (0..N)
            .flat_map(|p| (0..N).filter(move |&q| q != p).map(move |q| (p, q)))
            .map(|(p, q)| a[p][q] * a[p][q])
            .sum();
        if off < 1e-30 {
            break;
        }
        for p in 0..N {
            for q in (p + 1)..N {
                if a[p][q].abs() < 1e-300 {
                    continue;
                }
                let theta = (a[q][q] - a[p][p]) / (2.0 * a[p][q]);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let t = if theta == 0.0 { 1.0 } else { t };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for k in 0..N {
                    let akp = a[k][p];
                    let akq = a[k][q];
                    a[k][p] = c * akp - s * akq;
                    a[k][q] = s * akp + c * akq;
                }
                for k in 0..N {
                    let apk = a[p][k];
                    let aqk = a[q][k];
                    a[p][k] = c * apk - s * aqk;
                    a[q][k] = s * apk + c * aqk;
                }
            }
        }
    }
    let mut ev: Vec<f64> = (0..N).map(|i| a[i][i]).collect();
    ev.sort_by(f64::total_cmp);
    [ev[0], ev[2], ev[4], ev[6]]
}

#[cfg(test)]
mod tests {
    use super::*;

    fn singlet() -> ComplexMat4 {
        let h = 0.5;
        let mut m = ComplexMat4::zeros();
        m.0[1][1] = C64::new(h, 0.0);
        m.0[2][2] = C64::new(h, 0.0);
        m.0[1][2] = C64::new(-h, 0.0);
        m.0[2][1] = C64::new(-h, 0.0);
        m
    }

    #[test]
    fn tensor_examples() {
        let i2 = ComplexMat2::identity();
        assert_eq!(tensor(&i2, &i2), ComplexMat4::identity());
        let zz = tensor(&ComplexMat2::pauli(3), &ComplexMat2::pauli(3));
        assert_eq!(zz, ComplexMat4::from_real_diag([1.0, -1.0, -1.0, 1.0]));
        // X (x) I sends |00> to |10>
        let xi = tensor(&ComplexMat2::pauli(1), &i2);
        let col: Vec<C64> = (0..4).map(|r| xi.0[r][0]).collect();
        assert_eq!(col, vec![ZERO, ZERO, ONE, ZERO]);
    }

    #[test]
    fn partial_trace_examples() {
        let pt = partial_trace_b(&singlet());
        assert!(pt.approx_eq(&ComplexMat2::identity().scale_re(0.5), 1e-15));

        let p = ComplexMat2::new(
            C64::new(0.3, 0.0),
            C64::new(0.1, 0.2),
            C64::new(0.1, -0.2),
            C64::new(0.7, 0.0),
        );
        let q = ComplexMat2::new(
            C64::new(2.0, 0.0),
            C64::new(0.0, 1.0),
            C64::new(0.0, -1.0),
            C64::new(1.5, 0.0),
        );
        let pt = partial_trace_b(&tensor(&p, &q));
        assert!(pt.approx_eq(&p.scale(q.trace()), 1e-14));

        let alpha: f64 = 0.37;
        let psi = [alpha.cos(), 0.0, 0.0, alpha.sin()];
        let mut m = ComplexMat4::zeros();
        for r in 0..4 {
            for c in 0..4 {
                m.0[r][c] = C64::new(psi[r] * psi[c], 0.0);
            }
        }
        let pt = partial_trace_b(&m);
        let expect = ComplexMat2::from_real_diag([alpha.cos().powi(2), alpha.sin().powi(2)]);
        assert!(pt.approx_eq(&expect, 1e-15));
    }

    #[test]
    fn sqrt_examples() {
        let i2 = ComplexMat2::identity();
        assert!(sqrt_psd(&i2).unwrap().approx_eq(&i2, 1e-15));

        let proj = ComplexMat2::from_real_diag([1.0, 0.0]);
        assert!(sqrt_psd(&proj).unwrap().approx_eq(&proj, 1e-15));

        let e = ComplexMat2::from_real_diag([0.9, 0.1]);
        let want = ComplexMat2::from_real_diag([0.9f64.sqrt(), 0.1f64.sqrt()]);
        assert!(sqrt_psd(&e).unwrap().approx_eq(&want, 1e-14));
    }

    #[test]
    fn sqrt_rejects_bad_input() {
        let nh = ComplexMat2::new(ONE, ONE, ZERO, ONE);
        assert!(matches!(sqrt_psd(&nh), Err(Error::NonHermitian(_))));
        let neg = ComplexMat2::from_real_diag([1.0, -0.01]);
        assert!(matches!(sqrt_psd(&neg), Err(Error::NegativeEigenvalue(_))));
        // within tolerance: clamped
        let tiny = ComplexMat2::from_real_diag([1.0, -1e-12]);
        assert!(sqrt_psd(&tiny).is_ok());
    }

    #[test]
    fn expectation_examples() {
        let zz = tensor(&ComplexMat2::pauli(3), &ComplexMat2::pauli(3));
        assert!((expectation(&singlet(), &zz) + 1.0).abs() < 1e-15);

        let mixed = ComplexMat4::identity().scale_re(0.25);
        for j in 1..4 {
            for k in 0..4 {
                let obs = tensor(&ComplexMat2::pauli(j), &ComplexMat2::pauli(k));
                assert!(expectation(&mixed, &obs).abs() < 1e-15);
            }
        }

        // a = x, b at 60 degrees from x in the xz-plane
        let t = std::f64::consts::FRAC_PI_3;
        let obs = tensor(
            &ComplexMat2::spin_along([1.0, 0.0, 0.0]),
            &ComplexMat2::spin_along([t.cos(), 0.0, t.sin()]),
        );
        assert!((expectation(&singlet(), &obs) + 0.5).abs() < 1e-14);
    }

    #[test]
    fn jacobi_spectrum() {
        let ev = eigenvalues_hermitian4(&singlet());
        let want = [0.0, 0.0, 0.0, 1.0];
        for (a, b) in ev.iter().zip(want) {
            assert!((a - b).abs() < 1e-12, "{ev:?}");
        }
        let d = ComplexMat4::from_real_diag([0.4, -0.1, 0.2, 0.5]);
        let ev = eigenvalues_hermitian4(&d);
        assert!((ev[0] + 0.1).abs() < 1e-14 && (ev[3] - 0.5).abs() < 1e-14);
    }
}
