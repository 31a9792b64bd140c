//! Schatten p-norms, the Hilbert–Schmidt pairing, Hölder witnesses and the
//! contractive inclusions `S_p → S_q` for `p ≤ q`.

use std::fmt;

use num_complex::Complex64;
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use thiserror::Error;

use crate::linalg::{self, ComplexMatrix, LinalgError, SingularValueList};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SchattenError {
    #[error(transparent)]
    Linalg(#[from] LinalgError),
    #[error("Schatten exponent must be at least 1, got {0}")]
    InvalidExponent(f64),
    #[error("containment needs p <= q, got p = {p}, q = {q}")]
    DecreasingExponents { p: PExponent, q: PExponent },
    #[error("the zero operator has no norming functional")]
    ZeroOperator,
}

/// Exponent in `[1, ∞]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum PExponent {
    Finite(f64),
    Infinity,
}

impl PExponent {
    pub const ONE: PExponent = PExponent::Finite(1.0);
    pub const TWO: PExponent = PExponent::Finite(2.0);

    pub fn finite(p: f64) -> Result<Self, SchattenError> {
        if p == f64::INFINITY {
            Ok(PExponent::Infinity)
        } else if p.is_finite() && p >= 1.0 {
            Ok(PExponent::Finite(p))
        } else {
            Err(SchattenError::InvalidExponent(p))
        }
    }

    /// `∞` maps to `f64::INFINITY`.
    pub fn value(self) -> f64 {
        match self {
            PExponent::Finite(p) => p,
            PExponent::Infinity => f64::INFINITY,
        }
    }

    pub fn is_finite(self) -> bool {
        matches!(self, PExponent::Finite(_))
    }

    /// Conjugate exponent `q` with `1/p + 1/q = 1`.
    pub fn dual(self) -> PExponent {
        match self {
            PExponent::Infinity => PExponent::ONE,
            PExponent::Finite(1.0) => PExponent::Infinity,
            PExponent::Finite(p) => PExponent::Finite(p / (p - 1.0)),
        }
    }
}

impl PartialOrd for PExponent {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        self.value().partial_cmp(&other.value())
    }
}

impl fmt::Display for PExponent {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PExponent::Finite(p) => write!(f, "{p}"),
            PExponent::Infinity => write!(f, "inf"),
        }
    }
}

impl std::str::FromStr for PExponent {
    type Err = SchattenError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim() {
            "inf" | "Inf" | "infinity" | "∞" => Ok(PExponent::Infinity),
            t => t
                .parse::<f64>()
                .map_err(|_| SchattenError::InvalidExponent(f64::NAN))
                .and_then(PExponent::finite),
        }
    }
}

impl Serialize for PExponent {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        match self {
            PExponent::Finite(p) => s.serialize_f64(*p),
            PExponent::Infinity => s.serialize_str("inf"),
        }
    }
}

impl<'de> Deserialize<'de> for PExponent {
    fn deserialize<D: Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Repr {
            Num(f64),
            Str(String),
        }
        match Repr::deserialize(d)? {
            Repr::Num(p) => PExponent::finite(p),
            Repr::Str(s) => s.parse(),
        }
        .map_err(serde::de::Error::custom)
    }
}

/// `(Σ s_i^p)^{1/p}` for finite `p`, `max s_i` for `p = ∞`.
///
/// Finite sums are scaled by `s_1` so large inputs do not overflow.
pub fn norm_of_values(values: &[f64], p: PExponent) -> f64 {
    let top = values.iter().copied().fold(0.0, f64::max);
    if top == 0.0 {
        return 0.0;
    }
    match p {
        PExponent::Infinity => top,
        PExponent::Finite(1.0) => values.iter().sum(),
        PExponent::Finite(p) => {
            let sum: f64 = values
                .iter()
                .filter(|&&s| s > 0.0)
                .map(|&s| (s / top).powf(p))
                .sum();
            top * sum.powf(1.0 / p)
        }
    }
}

/// Relative comparison with the scale taken from the larger magnitude.
pub fn within_relative(a: f64, b: f64, rel: f64) -> bool {
    (a - b).abs() <= rel * a.abs().max(b.abs())
}

pub fn schatten_norm(a: &ComplexMatrix, p: PExponent) -> Result<f64, SchattenError> {
    let s = linalg::svd_values(a)?;
    Ok(norm_of_values(s.values(), p))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SchattenReport {
    pub p: PExponent,
    pub norm: f64,
    pub singular_values: SingularValueList,
    pub dual_exponent: PExponent,
}

impl SchattenReport {
    pub fn compute(a: &ComplexMatrix, p: PExponent) -> Result<Self, SchattenError> {
        Ok(Self::from_values(linalg::svd_values(a)?, p))
    }

    pub fn from_values(singular_values: SingularValueList, p: PExponent) -> Self {
        Self {
            p,
            norm: norm_of_values(singular_values.values(), p),
            singular_values,
            dual_exponent: p.dual(),
        }
    }

    /// Recomputes the norm from the stored singular values.
    pub fn recompute_norm(&self) -> f64 {
        norm_of_values(self.singular_values.values(), self.p)
    }
}

/// Hilbert–Schmidt pairing `⟨A, B⟩ = Tr(B* A)`.
pub fn hs_inner(a: &ComplexMatrix, b: &ComplexMatrix) -> Result<Complex64, SchattenError> {
    if a.shape() != b.shape() {
        return Err(LinalgError::DimensionMismatch {
            op: "hs_inner",
            left: a.shape(),
            right: b.shape(),
        }
        .into());
    }
    Ok(b.adjoint().matmul(a)?.trace()?)
}

/// Norming element of the dual class for `A`.
#[derive(Debug, Clone)]
pub struct HolderWitness {
    /// `B` with `‖B‖_q = 1`, `q` the dual exponent.
    pub witness: ComplexMatrix,
    /// `|⟨A, B⟩|`, which equals `‖A‖_p` for an exact witness.
    pub attained: f64,
    pub dual: PExponent,
}

/// Singular values below this fraction of `s_1` count as zero when building
/// the `p = 1` polar witness.
const WITNESS_RANK_TOL: f64 = 1e-13;

/// Builds `B` in the unit sphere of `S_q` with `|⟨A, B⟩| = ‖A‖_p`.
///
/// For `1 < p < ∞` this is `U diag(s^{p-1}) V*` normalized in `S_q`; at
/// `p = 1` the polar part `U_r V_r*` over nonzero singular values; at `p = ∞`
/// the top singular pair `u_1 v_1*`.
pub fn holder_witness(a: &ComplexMatrix, p: PExponent) -> Result<HolderWitness, SchattenError> {
    let d = linalg::svd(a)?;
    let s = d.singular_values.values();
    let top = d.singular_values.largest();
    if top == 0.0 {
        return Err(SchattenError::ZeroOperator);
    }
    let k = s.len();
    let weights: Vec<f64> = match p {
        PExponent::Infinity => (0..k).map(|i| if i == 0 { 1.0 } else { 0.0 }).collect(),
        PExponent::Finite(1.0) => s
            .iter()
            .map(|&x| if x > WITNESS_RANK_TOL * top { 1.0 } else { 0.0 })
            .collect(),
        PExponent::Finite(p) => {
            let raw: Vec<f64> = s.iter().map(|&x| (x / top).powf(p - 1.0)).collect();
            let q = p / (p - 1.0);
            let nq = norm_of_values(&raw, PExponent::Finite(q));
            raw.iter().map(|w| w / nq).collect()
        }
    };
    let w: Vec<Complex64> = weights.iter().map(|&x| Complex64::new(x, 0.0)).collect();
    let b = d
        .u
        .matmul(&ComplexMatrix::from_diag(&w))?
        .matmul(&d.v.adjoint())?;
    let attained = hs_inner(a, &b)?.norm();
    Ok(HolderWitness {
        witness: b,
        attained,
        dual: p.dual(),
    })
}

/// Checks `‖X T Y‖_p ≤ ‖X‖_op ‖T‖_p ‖Y‖_op` up to `1e-9` relative.
pub fn verify_ideal_bound(
    x: &ComplexMatrix,
    t: &ComplexMatrix,
    y: &ComplexMatrix,
    p: PExponent,
) -> Result<bool, SchattenError> {
    let xty = x.matmul(t)?.matmul(y)?;
    let lhs = schatten_norm(&xty, p)?;
    let rhs = linalg::operator_norm(x)? * schatten_norm(t, p)? * linalg::operator_norm(y)?;
    Ok(lhs <= rhs + 1e-9 * rhs)
}

/// The inclusion `i_{p,q}` applied to `A`: the operator is unchanged and the
/// two reports certify `‖A‖_q ≤ ‖A‖_p`.
#[derive(Debug, Clone, Serialize)]
pub struct ContainmentCertificate {
    pub source: SchattenReport,
    pub target: SchattenReport,
    pub contractive: bool,
}

pub fn containment_map(
    a: &ComplexMatrix,
    p: PExponent,
    q: PExponent,
) -> Result<ContainmentCertificate, SchattenError> {
    if p > q {
        return Err(SchattenError::DecreasingExponents { p, q });
    }
    let s = linalg::svd_values(a)?;
    let source = SchattenReport::from_values(s.clone(), p);
    let target = SchattenReport::from_values(s, q);
    let contractive = target.norm <= source.norm + 1e-10 * source.norm;
    Ok(ContainmentCertificate {
        source,
        target,
        contractive,
    })
}
