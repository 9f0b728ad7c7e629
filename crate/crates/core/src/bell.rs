//! Linear Bell functionals over correlators and marginals, the built-in inequalities,
//! and certification of their local-hidden-variable bounds.

use std::fmt;
use std::str::FromStr;

use num_rational::Rational64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Largest number of settings per party accepted by [`lhv_bound`].
pub const MAX_SETTINGS: usize = 8;

/// The built-in inequalities.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Inequality {
    Chsh,
    Chain3,
    Chain4,
    Gisin3,
    Gisin4,
    I3322,
    Dzc,
    Bg,
    Aiig1,
    Aiig2,
}

impl Inequality {
    pub const ALL: [Inequality; 10] = [
        Inequality::Chsh,
        Inequality::Chain3,
        Inequality::Chain4,
        Inequality::Gisin3,
        Inequality::Gisin4,
        Inequality::I3322,
        Inequality::Dzc,
        Inequality::Bg,
        Inequality::Aiig1,
        Inequality::Aiig2,
    ];

    /// Functionals for which two Bobs can share nonlocality on the singlet.
    pub const TWO_BOB: [Inequality; 7] = [
        Inequality::Chsh,
        Inequality::Chain3,
        Inequality::Gisin4,
        Inequality::Dzc,
        Inequality::Bg,
        Inequality::Aiig1,
        Inequality::Aiig2,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Inequality::Chsh => "chsh",
            Inequality::Chain3 => "chain3",
            Inequality::Chain4 => "chain4",
            Inequality::Gisin3 => "gisin3",
            Inequality::Gisin4 => "gisin4",
            Inequality::I3322 => "i3322",
            Inequality::Dzc => "dzc",
            Inequality::Bg => "bg",
            Inequality::Aiig1 => "aiig1",
            Inequality::Aiig2 => "aiig2",
        }
    }

    /// The bound quoted with the inequality in the literature.
    pub fn declared_bound(self) -> i64 {
        match self {
            Inequality::Chsh => 2,
            Inequality::Chain3 => 4,
            Inequality::Chain4 => 6,
            Inequality::Gisin3 => 5,
            Inequality::Gisin4 => 8,
            Inequality::I3322 => 0,
            Inequality::Dzc => 6,
            Inequality::Bg => 0,
            Inequality::Aiig1 => 10,
            Inequality::Aiig2 => 6,
        }
    }
}

impl fmt::Display for Inequality {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Inequality {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        let key = s.trim().to_ascii_lowercase();
        Inequality::ALL
            .into_iter()
            .find(|i| i.name() == key)
            .ok_or_else(|| Error::UnknownInequality(s.to_string()))
    }
}

/// `sum c_uv <A_u B_v> + sum a_u <A_u> + sum b_v <B_v> + constant`, with a classical bound.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BellFunctional {
    pub name: String,
    #[serde(with = "rational_serde::matrix")]
    pub corr_coeffs: Vec<Vec<Rational64>>,
    #[serde(with = "rational_serde::vector")]
    pub alice_marg: Vec<Rational64>,
    #[serde(with = "rational_serde::vector")]
    pub bob_marg: Vec<Rational64>,
    #[serde(with = "rational_serde::scalar")]
    pub constant: Rational64,
    #[serde(with = "rational_serde::scalar")]
    pub classical_bound: Rational64,
    pub use_abs: bool,
}

/// Measured (or computed) correlators and marginals for one Alice–Bob pair.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorrelationTable {
    pub corr: Vec<Vec<f64>>,
    pub alice_marg: Vec<f64>,
    pub bob_marg: Vec<f64>,
}

impl CorrelationTable {
    pub fn zeros(n_alice: usize, n_bob: usize) -> Self {
        Self {
            corr: vec![vec![0.0; n_bob]; n_alice],
            alice_marg: vec![0.0; n_alice],
            bob_marg: vec![0.0; n_bob],
        }
    }

    pub fn n_alice(&self) -> usize {
        self.alice_marg.len()
    }

    pub fn n_bob(&self) -> usize {
        self.bob_marg.len()
    }
}

fn r(n: i64) -> Rational64 {
    Rational64::from_integer(n)
}

fn int_matrix(rows: &[&[i64]]) -> Vec<Vec<Rational64>> {
    rows.iter()
        .map(|row| row.iter().map(|&v| r(v)).collect())
        .collect()
}

/// Builds a correlator matrix from 1-based `(u, v, coefficient)` terms.
fn sparse_matrix(n: usize, terms: &[(usize, usize, i64)]) -> Vec<Vec<Rational64>> {
    let mut m = vec![vec![r(0); n]; n];
    for &(u, v, c) in terms {
        m[u - 1][v - 1] += r(c);
    }
    m
}

/// Probability-form functional: joint terms `P(A_u=+, B_v=+)` and marginal terms
/// `P(A_u=+)`, `P(B_v=+)`, converted exactly with `P(A=+,B=+) = (1+<A>+<B>+<AB>)/4`
/// and `P(A=+) = (1+<A>)/2`.
struct ProbabilityForm<'a> {
    n: usize,
    joint: &'a [(usize, usize, i64)],
    alice: &'a [(usize, i64)],
    bob: &'a [(usize, i64)],
}

impl ProbabilityForm<'_> {
    fn into_functional(self, name: &str, bound: i64) -> BellFunctional {
        let quarter = Rational64::new(1, 4);
        let half = Rational64::new(1, 2);
        let mut corr = vec![vec![r(0); self.n]; self.n];
        let mut am = vec![r(0); self.n];
        let mut bm = vec![r(0); self.n];
        let mut constant = r(0);
        for &(u, v, c) in self.joint {
            let c = r(c) * quarter;
            corr[u - 1][v - 1] += c;
            am[u - 1] += c;
            bm[v - 1] += c;
            constant += c;
        }
        for &(u, c) in self.alice {
            am[u - 1] += r(c) * half;
            constant += r(c) * half;
        }
        for &(v, c) in self.bob {
            bm[v - 1] += r(c) * half;
            constant += r(c) * half;
        }
        BellFunctional {
            name: name.to_string(),
            corr_coeffs: corr,
            alice_marg: am,
            bob_marg: bm,
            constant,
            classical_bound: r(bound),
            use_abs: false,
        }
    }
}

fn correlator_form(name: &str, corr: Vec<Vec<Rational64>>, bound: i64) -> BellFunctional {
    let (na, nb) = (corr.len(), corr[0].len());
    BellFunctional {
        name: name.to_string(),
        corr_coeffs: corr,
        alice_marg: vec![r(0); na],
        bob_marg: vec![r(0); nb],
        constant: r(0),
        classical_bound: r(bound),
        use_abs: true,
    }
}

pub fn builtin(which: Inequality) -> BellFunctional {
    let name = which.name();
    let bound = which.declared_bound();
    match which {
        Inequality::Chsh => correlator_form(
            name,
            sparse_matrix(2, &[(1, 1, 1), (2, 1, 1), (1, 2, 1), (2, 2, -1)]),
            bound,
        ),
        Inequality::Chain3 => correlator_form(
            name,
            sparse_matrix(
                3,
                &[
                    (1, 1, 1),
                    (2, 1, 1),
                    (2, 2, 1),
                    (3, 2, 1),
                    (3, 3, 1),
                    (1, 3, -1),
                ],
            ),
            bound,
        ),
        Inequality::Chain4 => correlator_form(
            name,
            sparse_matrix(
                4,
                &[
                    (1, 1, 1),
                    (2, 1, 1),
                    (2, 2, 1),
                    (3, 2, 1),
                    (3, 3, 1),
                    (4, 3, 1),
                    (4, 4, 1),
                    (1, 4, -1),
                ],
            ),
            bound,
        ),
        Inequality::Gisin3 => correlator_form(
            name,
            int_matrix(&[&[1, 1, 1], &[1, 1, -1], &[1, -1, -1]]),
            bound,
        ),
        Inequality::Gisin4 => correlator_form(
            name,
            int_matrix(&[
                &[1, 1, 1, 1],
                &[1, 1, 1, -1],
                &[1, 1, -1, -1],
                &[1, -1, -1, -1],
            ]),
            bound,
        ),
        Inequality::Dzc => correlator_form(
            name,
            sparse_matrix(
                4,
                &[
                    (1, 1, 1),
                    (2, 2, 1),
                    (1, 2, 1),
                    (2, 1, 1),
                    (1, 4, 1),
                    (4, 1, 1),
                    (2, 4, -1),
                    (4, 2, -1),
                    (3, 3, -2),
                    (3, 1, 1),
                    (1, 3, 1),
                    (3, 2, 1),
                    (2, 3, 1),
                ],
            ),
            bound,
        ),
        Inequality::Aiig1 => correlator_form(
            name,
            int_matrix(&[
                &[2, 1, 1, 2],
                &[1, 1, 2, -2],
                &[1, 2, -2, -1],
                &[2, -2, -1, -1],
            ]),
            bound,
        ),
        Inequality::Aiig2 => correlator_form(
            name,
            int_matrix(&[
                &[2, 1, 0, 1],
                &[1, -1, 1, -1],
                &[0, 1, 0, -1],
                &[1, -1, -1, -1],
            ]),
            bound,
        ),
        Inequality::I3322 => ProbabilityForm {
            n: 3,
            joint: &[
                (1, 1, 1),
                (2, 1, 1),
                (3, 1, 1),
                (1, 2, 1),
                (2, 2, 1),
                (3, 2, -1),
                (1, 3, 1),
                (2, 3, -1),
            ],
            alice: &[(1, -1)],
            bob: &[(1, -2), (2, -1)],
        }
        .into_functional(name, bound),
        Inequality::Bg => ProbabilityForm {
            n: 4,
            joint: &[
                (1, 1, 1),
                (2, 1, 1),
                (3, 1, 1),
                (4, 1, 1),
                (1, 2, 1),
                (2, 2, 1),
                (3, 2, 1),
                (4, 2, -1),
                (1, 3, 1),
                (2, 3, 1),
                (3, 3, -2),
                (1, 4, 1),
                (2, 4, -1),
            ],
            alice: &[(1, -2), (2, -1)],
            bob: &[(1, -2), (2, -1)],
        }
        .into_functional(name, bound),
    }
}

pub fn builtin_by_name(name: &str) -> Result<BellFunctional> {
    Ok(builtin(name.parse()?))
}

fn to_f64(q: Rational64) -> f64 {
    *q.numer() as f64 / *q.denom() as f64
}

impl BellFunctional {
    pub fn n_alice(&self) -> usize {
        self.alice_marg.len()
    }

    pub fn n_bob(&self) -> usize {
        self.bob_marg.len()
    }

    pub fn bound(&self) -> f64 {
        to_f64(self.classical_bound)
    }

    /// Checks that every row has `n_bob` entries and the party sizes are sane.
    pub fn validate(&self) -> Result<()> {
        let (na, nb) = (self.n_alice(), self.n_bob());
        if na == 0 || nb == 0 {
            return Err(Error::Parse(
                "a functional needs at least one setting per party".into(),
            ));
        }
        if self.corr_coeffs.len() != na || self.corr_coeffs.iter().any(|row| row.len() != nb) {
            return Err(Error::DimensionMismatch {
                expected: format!("{na}x{nb} correlator coefficients"),
                got: format!(
                    "{} rows of lengths {:?}",
                    self.corr_coeffs.len(),
                    self.corr_coeffs.iter().map(Vec::len).collect::<Vec<_>>()
                ),
            });
        }
        Ok(())
    }

    /// Floating-point coefficients for hot evaluation loops.
    pub fn compile(&self) -> CompiledFunctional {
        CompiledFunctional {
            n_alice: self.n_alice(),
            n_bob: self.n_bob(),
            corr: self
                .corr_coeffs
                .iter()
                .map(|row| row.iter().map(|&q| to_f64(q)).collect())
                .collect(),
            alice: self.alice_marg.iter().map(|&q| to_f64(q)).collect(),
            bob: self.bob_marg.iter().map(|&q| to_f64(q)).collect(),
            constant: to_f64(self.constant),
            bound: self.bound(),
            use_abs: self.use_abs,
        }
    }

    /// Exact value on a deterministic assignment `a_u, b_v in {-1, +1}`, before `use_abs`.
    fn deterministic_value(&self, a: &[i64], b: &[i64]) -> Rational64 {
        let mut acc = self.constant;
        for (u, row) in self.corr_coeffs.iter().enumerate() {
            for (v, &c) in row.iter().enumerate() {
                if a[u] * b[v] > 0 {
                    acc += c;
                } else {
                    acc -= c;
                }
            }
        }
        for (u, &c) in self.alice_marg.iter().enumerate() {
            acc += c * a[u];
        }
        for (v, &c) in self.bob_marg.iter().enumerate() {
            acc += c * b[v];
        }
        acc
    }
}

/// A [`BellFunctional`] with `f64` coefficients.
#[derive(Debug, Clone, PartialEq)]
pub struct CompiledFunctional {
    pub n_alice: usize,
    pub n_bob: usize,
    pub corr: Vec<Vec<f64>>,
    pub alice: Vec<f64>,
    pub bob: Vec<f64>,
    pub constant: f64,
    pub bound: f64,
    pub use_abs: bool,
}

impl CompiledFunctional {
    /// Signed value before `use_abs` is applied.
    pub fn raw(&self, t: &CorrelationTable) -> f64 {
        let mut acc = self.constant;
        for (crow, trow) in self.corr.iter().zip(&t.corr) {
            acc += crow.iter().zip(trow).map(|(c, x)| c * x).sum::<f64>();
        }
        acc += self
            .alice
            .iter()
            .zip(&t.alice_marg)
            .map(|(c, x)| c * x)
            .sum::<f64>();
        acc += self
            .bob
            .iter()
            .zip(&t.bob_marg)
            .map(|(c, x)| c * x)
            .sum::<f64>();
        acc
    }

    pub fn value(&self, t: &CorrelationTable) -> f64 {
        let v = self.raw(t);
        if self.use_abs {
            v.abs()
        } else {
            v
        }
    }
}

pub fn evaluate(f: &BellFunctional, t: &CorrelationTable) -> Result<f64> {
    let (na, nb) = (f.n_alice(), f.n_bob());
    let shape_ok = t.corr.len() == na
        && t.corr.iter().all(|row| row.len() == nb)
        && t.alice_marg.len() == na
        && t.bob_marg.len() == nb;
    if !shape_ok {
        return Err(Error::DimensionMismatch {
            expected: format!("{na}x{nb} table"),
            got: format!("{}x{} table", t.n_alice(), t.n_bob()),
        });
    }
    Ok(f.compile().value(t))
}

/// Exact local-hidden-variable bound.
///
/// A local model is a convex mixture of deterministic strategies and the functional
/// is affine in the behaviour, so its maximum over the local polytope sits on one of
/// the `2^(n_alice + n_bob)` vertices. With `use_abs` both signs are maximised.
pub fn lhv_bound_exact(f: &BellFunctional) -> Result<Rational64> {
    f.validate()?;
    let (na, nb) = (f.n_alice(), f.n_bob());
    if na > MAX_SETTINGS || nb > MAX_SETTINGS {
        return Err(Error::InvalidParameter(format!(
            "at most {MAX_SETTINGS} settings per party can be enumerated"
        )));
    }
    let signs = |mask: u32, n: usize| -> Vec<i64> {
        (0..n)
            .map(|k| if mask >> k & 1 == 1 { -1 } else { 1 })
            .collect()
    };
    let mut best: Option<Rational64> = None;
    for ma in 0..(1u32 << na) {
        let a = signs(ma, na);
        for mb in 0..(1u32 << nb) {
            let b = signs(mb, nb);
            let v = f.deterministic_value(&a, &b);
            let v = if f.use_abs { v.max(-v) } else { v };
            best = Some(best.map_or(v, |cur| cur.max(v)));
        }
    }
    Ok(best.expect("at least one strategy"))
}

pub fn lhv_bound(f: &BellFunctional) -> Result<f64> {
    lhv_bound_exact(f).map(to_f64)
}

/// On-disk shape of a custom functional. Coefficients are integers or `"p/q"` strings.
#[derive(Debug, Clone, Deserialize, Serialize)]
struct FunctionalFile {
    name: Option<String>,
    corr: Vec<Vec<toml::Value>>,
    alice_marg: Option<Vec<toml::Value>>,
    bob_marg: Option<Vec<toml::Value>>,
    constant: Option<toml::Value>,
    bound: toml::Value,
    #[serde(default)]
    abs: bool,
}

fn parse_coeff(v: &toml::Value) -> Result<Rational64> {
    match v {
        toml::Value::Integer(i) => Ok(r(*i)),
        toml::Value::String(s) => rational_serde::parse(s),
        other => Err(Error::Parse(format!(
            "coefficient {other} must be an integer or a \"p/q\" string"
        ))),
    }
}

/// Parses a custom functional from TOML text:
///
/// ```toml
/// name = "a1b1"
/// corr = [[1, 0], [0, 0]]
/// alice_marg = [0, 0]     # optional
/// bob_marg = [0, 0]       # optional
/// constant = 0            # optional
/// bound = 1
/// abs = false
/// ```
pub fn parse_functional(text: &str) -> Result<BellFunctional> {
    let file: FunctionalFile = toml::from_str(text).map_err(|e| Error::Parse(e.to_string()))?;
    let corr = file
        .corr
        .iter()
        .map(|row| row.iter().map(parse_coeff).collect::<Result<Vec<_>>>())
        .collect::<Result<Vec<_>>>()?;
    let na = corr.len();
    let nb = corr.first().map_or(0, Vec::len);
    let vector = |v: &Option<Vec<toml::Value>>, n: usize| -> Result<Vec<Rational64>> {
        match v {
            Some(v) => v.iter().map(parse_coeff).collect(),
            None => Ok(vec![r(0); n]),
        }
    };
    let f = BellFunctional {
        name: file.name.unwrap_or_else(|| "custom".to_string()),
        alice_marg: vector(&file.alice_marg, na)?,
        bob_marg: vector(&file.bob_marg, nb)?,
        corr_coeffs: corr,
        constant: file
            .constant
            .as_ref()
            .map(parse_coeff)
            .transpose()?
            .unwrap_or(r(0)),
        classical_bound: parse_coeff(&file.bound)?,
        use_abs: file.abs,
    };
    f.validate()?;
    if f.n_alice() != na || f.n_bob() != nb {
        return Err(Error::DimensionMismatch {
            expected: format!("marginals of length {na} and {nb}"),
            got: format!("{} and {}", f.n_alice(), f.n_bob()),
        });
    }
    Ok(f)
}

/// Serialises a functional in the format read by [`parse_functional`].
pub fn functional_to_toml(f: &BellFunctional) -> String {
    let s = |q: &Rational64| toml::Value::String(q.to_string());
    let file = FunctionalFile {
        name: Some(f.name.clone()),
        corr: f
            .corr_coeffs
            .iter()
            .map(|row| row.iter().map(s).collect())
            .collect(),
        alice_marg: Some(f.alice_marg.iter().map(s).collect()),
        bob_marg: Some(f.bob_marg.iter().map(s).collect()),
        constant: Some(s(&f.constant)),
        bound: s(&f.classical_bound),
        abs: f.use_abs,
    };
    toml::to_string(&file).expect("functional serialises")
}

pub(crate) mod rational_serde {
    use num_rational::Rational64;
    use serde::{Deserialize, Deserializer, Serializer};

    use crate::error::{Error, Result};

    pub fn parse(s: &str) -> Result<Rational64> {
        let s = s.trim();
        let bad = || Error::Parse(format!("`{s}` is not an integer or p/q rational"));
        match s.split_once('/') {
            Some((n, d)) => {
                let n: i64 = n.trim().parse().map_err(|_| bad())?;
                let d: i64 = d.trim().parse().map_err(|_| bad())?;
                if d == 0 {
                    return Err(bad());
                }
                Ok(Rational64::new(n, d))
            }
            None => s
                .parse::<i64>()
                .map(Rational64::from_integer)
                .map_err(|_| bad()),
        }
    }

    pub mod scalar {
        use super::*;
        pub fn serialize<S: Serializer>(
            q: &Rational64,
            s: S,
        ) -> std::result::Result<S::Ok, S::Error> {
            s.serialize_str(&q.to_string())
        }
        pub fn deserialize<'de, D: Deserializer<'de>>(
            d: D,
        ) -> std::result::Result<Rational64, D::Error> {
            let s = String::deserialize(d)?;
            parse(&s).map_err(serde::de::Error::custom)
        }
    }

    pub mod vector {
        use super::*;
        pub fn serialize<S: Serializer>(
            v: &[Rational64],
            s: S,
        ) -> std::result::Result<S::Ok, S::Error> {
            s.collect_seq(v.iter().map(|q| q.to_string()))
        }
        pub fn deserialize<'de, D: Deserializer<'de>>(
            d: D,
        ) -> std::result::Result<Vec<Rational64>, D::Error> {
            Vec::<String>::deserialize(d)?
                .iter()
                .map(|s| parse(s).map_err(serde::de::Error::custom))
                .collect()
        }
    }

    pub mod matrix {
        use super::*;
        pub fn serialize<S: Serializer>(
            m: &[Vec<Rational64>],
            s: S,
        ) -> std::result::Result<S::Ok, S::Error> {
            s.collect_seq(
                m.iter()
                    .map(|row| row.iter().map(|q| q.to_string()).collect::<Vec<_>>()),
            )
        }
        pub fn deserialize<'de, D: Deserializer<'de>>(
            d: D,
        ) -> std::result::Result<Vec<Vec<Rational64>>, D::Error> {
            Vec::<Vec<String>>::deserialize(d)?
                .iter()
                .map(|row| {
                    row.iter()
                        .map(|s| parse(s).map_err(serde::de::Error::custom))
                        .collect()
                })
                .collect()
        }
    }
}
