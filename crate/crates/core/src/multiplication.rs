//! Truncated multiplication operators `g ↦ f·g` on `L²(X)`.
//!
//! The basis is the normalized atom indicators (in space order) followed, for
//! every integer cell `[n, n+1)` meeting a diffuse piece, by the exponentials
//! `e^{2πimx}` restricted to the cell, `|m| ≤ M`. Atom indicators are
//! eigenvectors, so the atom block is `diag f(x)`. Each cell block is the
//! Toeplitz matrix of the closed-form integrals `∫ f·d·e^{2πi(m−m′)x} dx`.
//! Cross blocks vanish identically.

use std::f64::consts::TAU;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::linalg::ComplexMatrix;
use crate::measure::{abs_pow, check_exponent, refine, Interval, MeasureError, MeasureSpace, SimpleFunction};
use crate::par::Execution;
use crate::schatten::{norm_of_values, schatten_norm, within_relative, PExponent, SchattenError};

/// Relative slope tolerance: slopes below `SLOPE_TOL·(1 + max partial)` count
/// as converged, slopes above ten times that as divergent.
pub const SLOPE_TOL: f64 = 1e-10;
/// Band factor between the converged and divergent thresholds.
pub const SLOPE_BAND: f64 = 10.0;
/// Default Gabor mode family.
pub const DEFAULT_MODES: [u32; 5] = [4, 8, 16, 32, 64];
/// Relative agreement required between numeric and exact norms.
pub const NORM_AGREEMENT_TOL: f64 = 1e-6;
/// Relative tolerance of the truncated `S_p(ℤ) = ℓ^p` check.
pub const LEMMA1_TOL: f64 = 1e-12;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum MultiplicationError {
    #[error(transparent)]
    Measure(#[from] MeasureError),
    #[error(transparent)]
    Schatten(#[from] SchattenError),
    #[error("schedule: {0}")]
    Schedule(String),
    #[error("divergence diagnosis needs at least 4 points, got {found}")]
    TooFewPoints { found: usize },
    #[error("schedule sizes must increase strictly; point {index} does not")]
    NonIncreasingSchedule { index: usize },
    #[error("inconclusive: slope {slope:e} lies between {tolerance:e} and {divergent:e}")]
    Inconclusive {
        slope: f64,
        tolerance: f64,
        divergent: f64,
    },
    #[error("invalid streaming tail: {0}")]
    InvalidTail(String),
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BasisLabel {
    Atom(String),
    Gabor { n: i64, m: i64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AtomSelection {
    All,
    /// The first `k` atoms in space order.
    Count(usize),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CellSelection {
    /// Every integer cell meeting a diffuse piece.
    Covering,
    /// Explicit cells; each must meet a diffuse piece.
    Cells(Vec<i64>),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TruncationSchedule {
    pub include_atoms: AtomSelection,
    pub cells: CellSelection,
    pub gabor_m_max: u32,
}

impl TruncationSchedule {
    /// All atoms, every covering cell, modes `|m| ≤ m_max`.
    pub fn full(m_max: u32) -> Self {
        Self {
            include_atoms: AtomSelection::All,
            cells: CellSelection::Covering,
            gabor_m_max: m_max,
        }
    }

    pub fn atoms_only() -> Self {
        Self {
            include_atoms: AtomSelection::All,
            cells: CellSelection::Cells(Vec::new()),
            gabor_m_max: 0,
        }
    }

    fn resolve(&self, space: &MeasureSpace) -> Result<(usize, Vec<i64>), MultiplicationError> {
        let atoms = match self.include_atoms {
            AtomSelection::All => space.atoms().len(),
            AtomSelection::Count(k) if k <= space.atoms().len() => k,
            AtomSelection::Count(k) => {
                return Err(MultiplicationError::Schedule(format!(
                    "{k} atoms requested, space has {}",
                    space.atoms().len()
                )))
            }
        };
        let covering = space.gabor_cells();
        let cells = match &self.cells {
            CellSelection::Covering => covering,
            CellSelection::Cells(cells) => {
                let mut cells = cells.clone();
                cells.sort_unstable();
                cells.dedup();
                if let Some(n) = cells.iter().find(|n| !covering.contains(n)) {
                    return Err(MultiplicationError::Schedule(format!(
                        "cell {n} does not meet a diffuse piece"
                    )));
                }
                cells
            }
        };
        Ok((atoms, cells))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OperatorTruncation {
    pub matrix: ComplexMatrix,
    pub labels: Vec<BasisLabel>,
    pub schedule: TruncationSchedule,
    pub space: MeasureSpace,
    pub function: SimpleFunction,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NonMemberReason {
    AtomicSupportViolation,
    PSumDiverges,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "verdict", rename_all = "snake_case")]
pub enum MembershipVerdict {
    Member { norm: f64 },
    NotMember { reason: NonMemberReason },
}

impl MembershipVerdict {
    pub fn is_member(&self) -> bool {
        matches!(self, MembershipVerdict::Member { .. })
    }

    /// Same arm, and norms within [`NORM_AGREEMENT_TOL`] for members.
    pub fn agrees_with(&self, other: &MembershipVerdict) -> bool {
        match (self, other) {
            (MembershipVerdict::Member { norm: a }, MembershipVerdict::Member { norm: b }) => {
                within_relative(*a, *b, NORM_AGREEMENT_TOL)
            }
            (
                MembershipVerdict::NotMember { reason: a },
                MembershipVerdict::NotMember { reason: b },
            ) => a == b,
            _ => false,
        }
    }
}

/// `e^{2πiθ}` with `θ` reduced mod 1; quarter turns are exact.
fn unit_phase(theta: f64) -> Complex64 {
    let r = theta - theta.floor();
    match r {
        0.0 => Complex64::new(1.0, 0.0),
        0.25 => Complex64::new(0.0, 1.0),
        0.5 => Complex64::new(-1.0, 0.0),
        0.75 => Complex64::new(0.0, -1.0),
        x => Complex64::from_polar(1.0, TAU * x),
    }
}

/// `∫_a^b e^{2πikt} dt`. Negative `k` is the exact conjugate of `−k`, so
/// truncations of `conj f` are bitwise adjoints.
fn oscillatory(k: i64, a: f64, b: f64) -> Complex64 {
    if k == 0 {
        return Complex64::new(b - a, 0.0);
    }
    if k < 0 {
        return oscillatory(-k, a, b).conj();
    }
    let kf = k as f64;
    (unit_phase(kf * b) - unit_phase(kf * a)) / Complex64::new(0.0, TAU * kf)
}

/// Pieces of `f·d` inside cell `n`, in local coordinates `t = x − n ∈ [0, 1]`.
fn cell_weights(space: &MeasureSpace, f: &SimpleFunction, n: i64) -> Vec<(f64, f64, Complex64)> {
    let cell = Interval::new(n as f64, (n + 1) as f64);
    let mut out = Vec::new();
    for (i, piece) in space.diffuse().iter().enumerate() {
        if piece.interval.intersect(&cell).is_none() {
            continue;
        }
        for rc in refine(piece, &f.segments_for(i, piece)) {
            if let Some(iv) = rc.interval.intersect(&cell) {
                let w = rc.value * rc.density;
                if w != Complex64::new(0.0, 0.0) {
                    out.push((iv.start - n as f64, iv.end - n as f64, w));
                }
            }
        }
    }
    out
}

fn cell_abs_power(space: &MeasureSpace, f: &SimpleFunction, n: i64, p: f64) -> f64 {
    let cell = Interval::new(n as f64, (n + 1) as f64);
    let mut total = 0.0;
    for (i, piece) in space.diffuse().iter().enumerate() {
        for rc in refine(piece, &f.segments_for(i, piece)) {
            if let Some(iv) = rc.interval.intersect(&cell) {
                total += abs_pow(rc.value, p) * rc.density * iv.length();
            }
        }
    }
    total
}

pub fn build_truncation(
    space: &MeasureSpace,
    f: &SimpleFunction,
    schedule: &TruncationSchedule,
) -> Result<OperatorTruncation, MultiplicationError> {
    f.check_against(space)?;
    let (atom_count, cells) = schedule.resolve(space)?;
    let m_max = schedule.gabor_m_max as i64;
    let modes = 2 * m_max as usize + 1;
    let dim = atom_count + cells.len() * modes;
    let mut matrix = ComplexMatrix::zeros(dim, dim);
    let mut labels = Vec::with_capacity(dim);
    for (i, atom) in space.atoms()[..atom_count].iter().enumerate() {
        matrix[(i, i)] = f.atom_value(&atom.label);
        labels.push(BasisLabel::Atom(atom.label.clone()));
    }
    for (c, &n) in cells.iter().enumerate() {
        let weights = cell_weights(space, f, n);
        let coeff: Vec<Complex64> = (-2 * m_max..=2 * m_max)
            .map(|k| {
                weights
                    .iter()
                    .map(|&(a, b, w)| w * oscillatory(k, a, b))
                    .sum()
            })
            .collect();
        let offset = atom_count + c * modes;
        for (r, m) in (-m_max..=m_max).enumerate() {
            labels.push(BasisLabel::Gabor { n, m });
            for (s, mp) in (-m_max..=m_max).enumerate() {
                matrix[(offset + r, offset + s)] = coeff[(m - mp + 2 * m_max) as usize];
            }
        }
    }
    Ok(OperatorTruncation {
        matrix,
        labels,
        schedule: schedule.clone(),
        space: space.clone(),
        function: f.clone(),
    })
}

/// `Σ_atoms |f(x)|^p + (2M+1)·Σ_cells ∫_n^{n+1} |f|^p d dx`: the partial
/// trace of `π(|f|^p)` over the scheduled basis, i.e. `‖π(f)‖_p^p` restricted.
pub fn trace_power_partial(
    space: &MeasureSpace,
    f: &SimpleFunction,
    p: f64,
    schedule: &TruncationSchedule,
) -> Result<f64, MultiplicationError> {
    check_exponent(p)?;
    f.check_against(space)?;
    let (atom_count, cells) = schedule.resolve(space)?;
    let atoms: f64 = space.atoms()[..atom_count]
        .iter()
        .map(|a| abs_pow(f.atom_value(&a.label), p))
        .sum();
    let diffuse: f64 = cells.iter().map(|&n| cell_abs_power(space, f, n, p)).sum();
    Ok(atoms + (2 * schedule.gabor_m_max as u64 + 1) as f64 * diffuse)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SchedulePoint {
    pub size: f64,
    pub value: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "diagnosis", rename_all = "snake_case")]
pub enum Diagnosis {
    Converged { limit: f64, slope: f64 },
    Diverges { rate: f64 },
}

/// Least-squares slope through the last `⌊n/2⌋` points (at least two).
fn tail_slope(points: &[SchedulePoint]) -> f64 {
    let k = (points.len() / 2).max(2);
    let tail = &points[points.len() - k..];
    let n = tail.len() as f64;
    let mx = tail.iter().map(|p| p.size).sum::<f64>() / n;
    let my = tail.iter().map(|p| p.value).sum::<f64>() / n;
    let sxy: f64 = tail.iter().map(|p| (p.size - mx) * (p.value - my)).sum();
    let sxx: f64 = tail.iter().map(|p| (p.size - mx).powi(2)).sum();
    sxy / sxx
}

/// Classifies the growth of monotone partial sums. Uses [`SLOPE_TOL`].
pub fn diagnose_divergence(points: &[SchedulePoint]) -> Result<Diagnosis, MultiplicationError> {
    diagnose_divergence_with(points, SLOPE_TOL)
}

pub fn diagnose_divergence_with(
    points: &[SchedulePoint],
    slope_tol: f64,
) -> Result<Diagnosis, MultiplicationError> {
    if points.len() < 4 {
        return Err(MultiplicationError::TooFewPoints {
            found: points.len(),
        });
    }
    if let Some(i) = (1..points.len()).find(|&i| points[i].size <= points[i - 1].size) {
        return Err(MultiplicationError::NonIncreasingSchedule { index: i });
    }
    let scale = 1.0 + points.iter().map(|p| p.value.abs()).fold(0.0, f64::max);
    let tolerance = slope_tol * scale;
    let divergent = SLOPE_BAND * tolerance;
    let slope = tail_slope(points);
    if slope >= divergent {
        return Ok(Diagnosis::Diverges { rate: slope });
    }
    if slope.abs() > tolerance {
        return Err(MultiplicationError::Inconclusive {
            slope,
            tolerance,
            divergent,
        });
    }
    let n = points.len();
    let last = points[n - 1].value;
    let d1 = last - points[n - 2].value;
    let d0 = points[n - 2].value - points[n - 3].value;
    let limit = if d0 != 0.0 && d1 / d0 > 0.0 && d1 / d0 < 1.0 {
        let r = d1 / d0;
        last + d1 * r / (1.0 - r)
    } else {
        last
    };
    Ok(Diagnosis::Converged { limit, slope })
}

/// Exact membership: `f` must vanish on the positive-measure diffuse part, and
/// then `‖π(f)‖_p` is the `ℓ^p` norm of its atom values. At `p = ∞` every
/// bounded `f` belongs and the norm is `ess sup |f|`.
pub fn classify_exact(
    space: &MeasureSpace,
    f: &SimpleFunction,
    p: PExponent,
) -> Result<MembershipVerdict, MultiplicationError> {
    f.check_against(space)?;
    if !p.is_finite() {
        return Ok(MembershipVerdict::Member {
            norm: f.ess_sup(space)?,
        });
    }
    if f.diffuse_support_measure(space)? > 0.0 {
        return Ok(MembershipVerdict::NotMember {
            reason: NonMemberReason::AtomicSupportViolation,
        });
    }
    let values: Vec<f64> = space
        .atoms()
        .iter()
        .map(|a| f.atom_value(&a.label).norm())
        .collect();
    Ok(MembershipVerdict::Member {
        norm: norm_of_values(&values, p),
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct NumericClassification {
    pub partials: Vec<SchedulePoint>,
    pub diagnosis: Diagnosis,
    pub verdict: MembershipVerdict,
}

/// Numeric membership from the growth of trace partials over the Gabor mode
/// family `modes` (full atom set, covering cells).
pub fn classify_numeric(
    space: &MeasureSpace,
    f: &SimpleFunction,
    p: f64,
    modes: &[u32],
    exec: Execution,
) -> Result<NumericClassification, MultiplicationError> {
    classify_numeric_with(space, f, p, modes, exec, SLOPE_TOL)
}

/// [`classify_numeric`] with an explicit base slope tolerance.
pub fn classify_numeric_with(
    space: &MeasureSpace,
    f: &SimpleFunction,
    p: f64,
    modes: &[u32],
    exec: Execution,
    slope_tol: f64,
) -> Result<NumericClassification, MultiplicationError> {
    check_exponent(p)?;
    f.check_against(space)?;
    let values = exec.map_slice(modes, |&m| {
        trace_power_partial(space, f, p, &TruncationSchedule::full(m))
    });
    let partials = modes
        .iter()
        .zip(values)
        .map(|(&m, v)| {
            v.map(|value| SchedulePoint {
                size: m as f64,
                value,
            })
        })
        .collect::<Result<Vec<_>, _>>()?;
    let diagnosis = diagnose_divergence_with(&partials, slope_tol)?;
    let verdict = match diagnosis {
        Diagnosis::Converged { limit, .. } => MembershipVerdict::Member {
            norm: limit.max(0.0).powf(1.0 / p),
        },
        Diagnosis::Diverges { .. } => MembershipVerdict::NotMember {
            reason: NonMemberReason::AtomicSupportViolation,
        },
    };
    Ok(NumericClassification {
        partials,
        diagnosis,
        verdict,
    })
}

/// Both routes side by side, as emitted by the CLI.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ClassificationReport {
    pub p: PExponent,
    pub modes: Vec<u32>,
    pub partials: Vec<SchedulePoint>,
    pub slope: Option<f64>,
    pub diagnosis: Option<Diagnosis>,
    pub numeric_verdict: Option<MembershipVerdict>,
    pub inconclusive: bool,
    pub exact_verdict: MembershipVerdict,
    pub agreement: bool,
}

pub fn classify(
    space: &MeasureSpace,
    f: &SimpleFunction,
    p: PExponent,
    modes: &[u32],
    exec: Execution,
) -> Result<ClassificationReport, MultiplicationError> {
    classify_with(space, f, p, modes, exec, SLOPE_TOL)
}

pub fn classify_with(
    space: &MeasureSpace,
    f: &SimpleFunction,
    p: PExponent,
    modes: &[u32],
    exec: Execution,
    slope_tol: f64,
) -> Result<ClassificationReport, MultiplicationError> {
    let exact = classify_exact(space, f, p)?;
    let mut report = ClassificationReport {
        p,
        modes: modes.to_vec(),
        partials: Vec::new(),
        slope: None,
        diagnosis: None,
        numeric_verdict: None,
        inconclusive: false,
        exact_verdict: exact,
        agreement: false,
    };
    if !p.is_finite() {
        // Every bounded f lies in S_∞; trace partials say nothing here.
        report.agreement = exact.is_member();
        return Ok(report);
    }
    let pv = p.value();
    match classify_numeric_with(space, f, pv, modes, exec, slope_tol) {
        Ok(n) => {
            report.slope = Some(tail_slope(&n.partials));
            report.partials = n.partials;
            report.diagnosis = Some(n.diagnosis);
            report.agreement = n.verdict.agrees_with(&exact);
            report.numeric_verdict = Some(n.verdict);
        }
        Err(MultiplicationError::Inconclusive { slope, .. }) => {
            report.slope = Some(slope);
            report.inconclusive = true;
            report.partials = modes
                .iter()
                .map(|&m| {
                    trace_power_partial(space, f, pv, &TruncationSchedule::full(m)).map(|value| {
                        SchedulePoint {
                            size: m as f64,
                            value,
                        }
                    })
                })
                .collect::<Result<_, _>>()?;
        }
        Err(e) => return Err(e),
    }
    Ok(report)
}

/// Atom values on `ℤ` given by a finite head followed by a declared power-law
/// tail `|f(k)| = c·k^{-α}` for `k ≥ tail_start`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StreamingAtoms {
    pub head: Vec<Complex64>,
    pub tail_start: u64,
    pub tail_coefficient: f64,
    pub tail_exponent: f64,
}

/// Terms summed explicitly before the Euler–Maclaurin remainder.
const STREAM_EXPLICIT_TERMS: u64 = 2000;

impl StreamingAtoms {
    fn validate(&self) -> Result<(), MultiplicationError> {
        if self.tail_start == 0 {
            return Err(MultiplicationError::InvalidTail("tail_start must be ≥ 1".into()));
        }
        if !(self.tail_coefficient.is_finite() && self.tail_coefficient >= 0.0) {
            return Err(MultiplicationError::InvalidTail(
                "coefficient must be finite and nonnegative".into(),
            ));
        }
        if !(self.tail_exponent.is_finite() && self.tail_exponent >= 0.0) {
            return Err(MultiplicationError::InvalidTail(
                "exponent must be finite and nonnegative".into(),
            ));
        }
        Ok(())
    }

    /// `|f|^p` on the first `n` atoms (head first, then tail terms).
    pub fn partial(&self, n: u64, p: f64) -> f64 {
        let head: f64 = self.head.iter().take(n as usize).map(|z| abs_pow(*z, p)).sum();
        let extra = n.saturating_sub(self.head.len() as u64);
        let cp = self.tail_coefficient.powf(p);
        let q = self.tail_exponent * p;
        head + (0..extra)
            .map(|j| cp * ((self.tail_start + j) as f64).powf(-q))
            .sum::<f64>()
    }

    /// `Σ_{k ≥ s} c^p k^{-q}` for `q > 1`: explicit terms then Euler–Maclaurin.
    fn tail_sum(&self, p: f64) -> f64 {
        let cp = self.tail_coefficient.powf(p);
        if cp == 0.0 {
            return 0.0;
        }
        let q = self.tail_exponent * p;
        let s = self.tail_start;
        let explicit: f64 = (s..s + STREAM_EXPLICIT_TERMS)
            .map(|k| (k as f64).powf(-q))
            .sum();
        let a = (s + STREAM_EXPLICIT_TERMS) as f64;
        let integral = a.powf(1.0 - q) / (q - 1.0);
        let f = a.powf(-q);
        let d1 = -q * a.powf(-q - 1.0);
        let d3 = -q * (q + 1.0) * (q + 2.0) * a.powf(-q - 3.0);
        cp * (explicit + integral + f / 2.0 - d1 / 12.0 + d3 / 720.0)
    }
}

/// Membership of a streamed atomic function: the `p`-sum diverges iff
/// `α·p ≤ 1` (and the tail is not identically zero).
pub fn classify_streaming(
    atoms: &StreamingAtoms,
    p: PExponent,
) -> Result<MembershipVerdict, MultiplicationError> {
    atoms.validate()?;
    let head_sup = atoms.head.iter().map(|z| z.norm()).fold(0.0, f64::max);
    let Some(pv) = p.is_finite().then(|| p.value()) else {
        let tail_sup = atoms.tail_coefficient * (atoms.tail_start as f64).powf(-atoms.tail_exponent);
        return Ok(MembershipVerdict::Member {
            norm: head_sup.max(tail_sup),
        });
    };
    if atoms.tail_coefficient > 0.0 && atoms.tail_exponent * pv <= 1.0 {
        return Ok(MembershipVerdict::NotMember {
            reason: NonMemberReason::PSumDiverges,
        });
    }
    let head: f64 = atoms.head.iter().map(|z| abs_pow(*z, pv)).sum();
    Ok(MembershipVerdict::Member {
        norm: (head + atoms.tail_sum(pv)).powf(1.0 / pv),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LatticeCheck {
    pub schatten_norm: f64,
    pub lp_norm: f64,
    pub passes: bool,
}

/// On the lattice `{−N..N}` with unit masses, compares the Schatten norm of
/// the atoms-only truncation with the `ℓ^p` norm of `values` (indexed from
/// `−N`).
pub fn verify_lemma1(values: &[Complex64], p: PExponent) -> Result<LatticeCheck, MultiplicationError> {
    if values.len().is_multiple_of(2) {
        return Err(MultiplicationError::Schedule(format!(
            "expected 2N+1 values, got {}",
            values.len()
        )));
    }
    let n = values.len() / 2;
    let space = MeasureSpace::integer_lattice(n);
    let f = SimpleFunction::on_atoms(
        space
            .atoms()
            .iter()
            .zip(values)
            .map(|(a, v)| (a.label.clone(), *v)),
    );
    let t = build_truncation(&space, &f, &TruncationSchedule::atoms_only())?;
    let s = schatten_norm(&t.matrix, p)?;
    let moduli: Vec<f64> = values.iter().map(|z| z.norm()).collect();
    let l = norm_of_values(&moduli, p);
    Ok(LatticeCheck {
        schatten_norm: s,
        lp_norm: l,
        passes: within_relative(s, l, LEMMA1_TOL),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::measure::{DiffusePiece, ValueSegment};
    use crate::oracle;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn unit() -> MeasureSpace {
        MeasureSpace::lebesgue(0.0, 1.0).unwrap()
    }

    fn half_indicator(space: &MeasureSpace) -> SimpleFunction {
        SimpleFunction::zero().with_piece(
            space,
            0,
            vec![
                ValueSegment {
                    sub: Interval::new(0.0, 0.5),
                    value: c(1.0, 0.0),
                },
                ValueSegment {
                    sub: Interval::new(0.5, 1.0),
                    value: c(0.0, 0.0),
                },
            ],
        )
    }

    #[test]
    fn atoms_give_diagonal() {
        let space = MeasureSpace::from_atoms([("a", 2.0), ("b", 1.0)]).unwrap();
        let f = SimpleFunction::on_atoms([("a", c(3.0, 0.0)), ("b", c(-1.0, 0.0))]);
        let t = build_truncation(&space, &f, &TruncationSchedule::atoms_only()).unwrap();
        assert!(t.matrix.exactly_equals(&ComplexMatrix::from_real_diag(&[3.0, -1.0])));
        assert_eq!(t.labels, vec![BasisLabel::Atom("a".into()), BasisLabel::Atom("b".into())]);
    }

    #[test]
    fn constant_is_scalar_on_cell() {
        let space = unit();
        let z = c(0.5, -2.0);
        let f = SimpleFunction::constant(&space, z);
        let t = build_truncation(&space, &f, &TruncationSchedule::full(2)).unwrap();
        assert!(t.matrix.exactly_equals(&ComplexMatrix::identity(5).scale(z)));
    }

    #[test]
    fn half_indicator_entry_matches_quadrature() {
        let space = unit();
        let f = half_indicator(&space);
        let t = build_truncation(&space, &f, &TruncationSchedule::full(1)).unwrap();
        let row = t.labels.iter().position(|l| *l == BasisLabel::Gabor { n: 0, m: 0 }).unwrap();
        let col = t.labels.iter().position(|l| *l == BasisLabel::Gabor { n: 0, m: 1 }).unwrap();
        let entry = t.matrix[(row, col)];
        let closed = c(1.0, 0.0) / c(0.0, std::f64::consts::PI);
        assert!((entry - closed).norm() < 1e-15);
        let quad = oracle::midpoint(
            |x| {
                let v = if x < 0.5 { 1.0 } else { 0.0 };
                Complex64::from_polar(v, -TAU * x)
            },
            0.0,
            1.0,
            200_000,
        );
        assert!((entry - quad).norm() < 1e-9);
    }

    #[test]
    fn misaligned_piece_matches_quadrature() {
        let piece = DiffusePiece {
            interval: Interval::new(-0.3, 1.7),
            density: vec![
                crate::measure::DensitySegment {
                    sub: Interval::new(-0.3, 0.4),
                    value: 1.5,
                },
                crate::measure::DensitySegment {
                    sub: Interval::new(0.4, 1.7),
                    value: 0.5,
                },
            ],
        };
        let space = MeasureSpace::new(vec![], vec![piece]).unwrap();
        let f = SimpleFunction::zero().with_piece(
            &space,
            0,
            vec![
                ValueSegment {
                    sub: Interval::new(-0.3, 1.1),
                    value: c(2.0, 1.0),
                },
                ValueSegment {
                    sub: Interval::new(1.1, 1.7),
                    value: c(-1.0, 0.5),
                },
            ],
        );
        let t = build_truncation(&space, &f, &TruncationSchedule::full(3)).unwrap();
        let fd = |x: f64| {
            let d = if x < 0.4 { 1.5 } else { 0.5 };
            let v = if x < 1.1 { c(2.0, 1.0) } else { c(-1.0, 0.5) };
            v * d
        };
        for (r, rl) in t.labels.iter().enumerate() {
            for (s, sl) in t.labels.iter().enumerate() {
                let (BasisLabel::Gabor { n, m }, BasisLabel::Gabor { n: n2, m: mp }) = (rl, sl) else {
                    unreachable!()
                };
                if n != n2 {
                    assert_eq!(t.matrix[(r, s)], c(0.0, 0.0));
                    continue;
                }
                let lo = (*n as f64).max(-0.3);
                let hi = ((*n + 1) as f64).min(1.7);
                let k = (m - mp) as f64;
                let q = oracle::midpoint(|x| fd(x) * Complex64::from_polar(1.0, TAU * k * x), lo, hi, 140_000);
                assert!((t.matrix[(r, s)] - q).norm() < 1e-8, "{rl:?} {sl:?}");
            }
        }
    }

    #[test]
    fn partials_count_modes() {
        let space = unit();
        let f = SimpleFunction::constant(&space, c(1.0, 0.0));
        for m in DEFAULT_MODES {
            let v = trace_power_partial(&space, &f, 1.0, &TruncationSchedule::full(m)).unwrap();
            assert_eq!(v, (2 * m + 1) as f64);
        }
        let zero = SimpleFunction::zero();
        assert_eq!(trace_power_partial(&space, &zero, 2.0, &TruncationSchedule::full(9)).unwrap(), 0.0);
    }

    #[test]
    fn indicator_diverges_with_rate_two() {
        let space = unit();
        let f = SimpleFunction::constant(&space, c(1.0, 0.0));
        let n = classify_numeric(&space, &f, 1.0, &DEFAULT_MODES, Execution::Parallel).unwrap();
        match n.diagnosis {
            Diagnosis::Diverges { rate } => assert!((rate - 2.0).abs() < 1e-9),
            other => panic!("{other:?}"),
        }
        assert_eq!(
            n.verdict,
            MembershipVerdict::NotMember {
                reason: NonMemberReason::AtomicSupportViolation
            }
        );
    }

    #[test]
    fn tiny_indicator_still_diverges() {
        let space = unit();
        let eps = 1e-8;
        let f = SimpleFunction::constant(&space, c(eps, 0.0));
        let n = classify_numeric(&space, &f, 1.0, &DEFAULT_MODES, Execution::Sequential).unwrap();
        match n.diagnosis {
            Diagnosis::Diverges { rate } => assert!((rate - 2.0 * eps).abs() < 1e-15),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn geometric_partials_converge_to_three() {
        let points: Vec<SchedulePoint> = [4u32, 8, 16, 32, 64]
            .iter()
            .map(|&n| {
                let space = MeasureSpace::integer_lattice(n as usize);
                let f = SimpleFunction::on_atoms(space.atoms().iter().map(|a| {
                    let k: i32 = a.label.parse().unwrap();
                    (a.label.clone(), c(0.5f64.powi(k.abs()), 0.0))
                }));
                let v = trace_power_partial(&space, &f, 1.0, &TruncationSchedule::atoms_only()).unwrap();
                let direct: f64 = 1.0 + 2.0 * (1..=n).map(|k| 0.5f64.powi(k as i32)).sum::<f64>();
                assert!((v - direct).abs() < 1e-14);
                SchedulePoint { size: n as f64, value: v }
            })
            .collect();
        match diagnose_divergence(&points).unwrap() {
            Diagnosis::Converged { limit, .. } => assert!((limit - 3.0).abs() < 1e-6),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn diagnosis_edge_cases() {
        let zeros: Vec<SchedulePoint> = (1..=5).map(|m| SchedulePoint { size: m as f64, value: 0.0 }).collect();
        assert_eq!(
            diagnose_divergence(&zeros).unwrap(),
            Diagnosis::Converged { limit: 0.0, slope: 0.0 }
        );
        assert_eq!(
            diagnose_divergence(&zeros[..3]),
            Err(MultiplicationError::TooFewPoints { found: 3 })
        );
        let noisy: Vec<SchedulePoint> = (1..=5)
            .map(|m| SchedulePoint { size: m as f64, value: 1.0 + 3e-10 * m as f64 })
            .collect();
        assert!(matches!(
            diagnose_divergence(&noisy),
            Err(MultiplicationError::Inconclusive { .. })
        ));
    }

    #[test]
    fn exact_classification_examples() {
        let space = unit();
        let one = SimpleFunction::constant(&space, c(1.0, 0.0));
        let v = classify_exact(&space, &one, PExponent::ONE).unwrap();
        assert!(!v.is_member());

        let atoms = MeasureSpace::from_atoms([("a", 1.0), ("b", 5.0)]).unwrap();
        let f = SimpleFunction::on_atoms([("a", c(3.0, 0.0)), ("b", c(4.0, 0.0))]);
        let v = classify_exact(&atoms, &f, PExponent::TWO).unwrap();
        assert_eq!(v, MembershipVerdict::Member { norm: 5.0 });
        let n = classify_numeric(&atoms, &f, 2.0, &DEFAULT_MODES, Execution::Parallel).unwrap();
        assert!(n.verdict.agrees_with(&v));

        let mixed = MeasureSpace::new(
            vec![crate::measure::AtomEntry { label: "a".into(), mass: 1.0 }],
            vec![DiffusePiece::uniform(Interval::new(0.0, 1.0), 1.0)],
        )
        .unwrap();
        let g = SimpleFunction::constant(&mixed, c(1.0, 0.0)).with_atom("a", c(5.0, 0.0));
        let v = classify_exact(&mixed, &g, PExponent::ONE).unwrap();
        assert_eq!(
            v,
            MembershipVerdict::NotMember { reason: NonMemberReason::AtomicSupportViolation }
        );
        let n = classify_numeric(&mixed, &g, 1.0, &DEFAULT_MODES, Execution::Parallel).unwrap();
        assert!(n.verdict.agrees_with(&v));
    }

    #[test]
    fn lattice_norm_examples() {
        let mut delta = vec![c(0.0, 0.0); 5];
        delta[2] = c(1.0, 0.0);
        let r = verify_lemma1(&delta, PExponent::ONE).unwrap();
        assert!(r.passes && r.schatten_norm == 1.0);

        let harmonic: Vec<Complex64> = (-50i32..=50).map(|n| c(1.0 / (1.0 + n.abs() as f64), 0.0)).collect();
        let r = verify_lemma1(&harmonic, PExponent::TWO).unwrap();
        assert!(r.passes);
        let direct = oracle::lp_norm(&harmonic, 2.0);
        assert!(within_relative(r.schatten_norm, direct, 1e-12));
    }

    #[test]
    fn streaming_tail() {
        let harmonic = StreamingAtoms {
            head: vec![],
            tail_start: 1,
            tail_coefficient: 1.0,
            tail_exponent: 1.0,
        };
        assert_eq!(
            classify_streaming(&harmonic, PExponent::ONE).unwrap(),
            MembershipVerdict::NotMember { reason: NonMemberReason::PSumDiverges }
        );
        match classify_streaming(&harmonic, PExponent::TWO).unwrap() {
            MembershipVerdict::Member { norm } => {
                let zeta2 = std::f64::consts::PI.powi(2) / 6.0;
                assert!((norm * norm - zeta2).abs() < 1e-12);
            }
            other => panic!("{other:?}"),
        }
        assert!(harmonic.partial(1000, 1.0) > harmonic.partial(10, 1.0) + 4.0);
    }
}
