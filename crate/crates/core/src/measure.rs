//! Finite descriptions of σ-finite measure spaces and simple functions on them.
//!
//! A [`MeasureSpace`] is a list of labelled atoms (point masses) plus disjoint
//! half-open intervals carrying a piecewise-constant density. A
//! [`SimpleFunction`] assigns a complex value to every atom and a
//! piecewise-constant complex value along every diffuse piece. Every integral
//! of such functions is a finite sum and is computed in closed form.

use std::borrow::Cow;
use std::collections::{BTreeMap, HashSet};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Current version of the JSON input schemas.
pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum MeasureError {
    #[error("{path}: {reason}")]
    Invalid { path: String, reason: String },
    #[error("function does not match space at {path}: {reason}")]
    Mismatch { path: String, reason: String },
    #[error("exponent must be finite and at least 1, got {0}")]
    InvalidExponent(f64),
    #[error("group must have at least one element")]
    EmptyGroup,
    #[error("expected {expected} singleton masses, got {found}")]
    MassCount { expected: usize, found: usize },
}

fn invalid(path: impl Into<String>, reason: impl Into<String>) -> MeasureError {
    MeasureError::Invalid {
        path: path.into(),
        reason: reason.into(),
    }
}

fn mismatch(path: impl Into<String>, reason: impl Into<String>) -> MeasureError {
    MeasureError::Mismatch {
        path: path.into(),
        reason: reason.into(),
    }
}

/// Half-open interval `[start, end)`; serialized as `[start, end]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(from = "[f64; 2]", into = "[f64; 2]")]
pub struct Interval {
    pub start: f64,
    pub end: f64,
}

impl Interval {
    pub fn new(start: f64, end: f64) -> Self {
        Self { start, end }
    }

    pub fn length(&self) -> f64 {
        self.end - self.start
    }

    pub fn intersect(&self, other: &Interval) -> Option<Interval> {
        let start = self.start.max(other.start);
        let end = self.end.min(other.end);
        (start < end).then_some(Interval { start, end })
    }

    fn check(&self, path: &str) -> Result<(), MeasureError> {
        if !self.start.is_finite() || !self.end.is_finite() {
            return Err(invalid(path, "interval endpoints must be finite"));
        }
        if self.start >= self.end {
            return Err(invalid(
                path,
                format!("empty interval [{}, {})", self.start, self.end),
            ));
        }
        Ok(())
    }
}

impl From<[f64; 2]> for Interval {
    fn from([start, end]: [f64; 2]) -> Self {
        Self { start, end }
    }
}

impl From<Interval> for [f64; 2] {
    fn from(i: Interval) -> Self {
        [i.start, i.end]
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AtomEntry {
    pub label: String,
    pub mass: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DensitySegment {
    pub sub: Interval,
    pub value: f64,
}

/// A diffuse interval with piecewise-constant density. Zero-density segments
/// are legal and carry no measure.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DiffusePiece {
    pub interval: Interval,
    pub density: Vec<DensitySegment>,
}

impl DiffusePiece {
    pub fn uniform(interval: Interval, density: f64) -> Self {
        Self {
            interval,
            density: vec![DensitySegment {
                sub: interval,
                value: density,
            }],
        }
    }

    pub fn measure(&self) -> f64 {
        self.density.iter().map(|s| s.value * s.sub.length()).sum()
    }

    pub fn max_density(&self) -> f64 {
        self.density.iter().map(|s| s.value).fold(0.0, f64::max)
    }
}

/// Validated finite measure space: atoms plus disjoint diffuse pieces.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "SpaceDoc", into = "SpaceDoc")]
pub struct MeasureSpace {
    atoms: Vec<AtomEntry>,
    diffuse: Vec<DiffusePiece>,
}

#[derive(Serialize, Deserialize)]
struct SpaceDoc {
    #[serde(default = "schema_default")]
    schema: u32,
    #[serde(default)]
    atoms: Vec<AtomEntry>,
    #[serde(default)]
    diffuse: Vec<DiffusePiece>,
}

fn schema_default() -> u32 {
    SCHEMA_VERSION
}

fn check_schema(schema: u32) -> Result<(), MeasureError> {
    if schema != SCHEMA_VERSION {
        return Err(invalid(
            "schema",
            format!("unsupported schema version {schema}, expected {SCHEMA_VERSION}"),
        ));
    }
    Ok(())
}

impl TryFrom<SpaceDoc> for MeasureSpace {
    type Error = MeasureError;

    fn try_from(doc: SpaceDoc) -> Result<Self, MeasureError> {
        check_schema(doc.schema)?;
        MeasureSpace::new(doc.atoms, doc.diffuse)
    }
}

impl From<MeasureSpace> for SpaceDoc {
    fn from(space: MeasureSpace) -> Self {
        SpaceDoc {
            schema: SCHEMA_VERSION,
            atoms: space.atoms,
            diffuse: space.diffuse,
        }
    }
}

/// Atom labels `D` and positive-measure diffuse supports `F`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Decomposition {
    pub atoms: Vec<String>,
    pub diffuse: Vec<DiffuseSupport>,
    pub atom_measure: f64,
    pub diffuse_measure: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DiffuseSupport {
    pub piece: usize,
    /// Maximal runs of positive density.
    pub support: Vec<Interval>,
    pub measure: f64,
}

/// Outcome of the translation-invariance test for singleton masses.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "verdict", rename_all = "snake_case")]
pub enum GroupInvariance {
    InvariantCounting { scale: f64 },
    NotInvariant,
}

impl MeasureSpace {
    pub fn new(atoms: Vec<AtomEntry>, diffuse: Vec<DiffusePiece>) -> Result<Self, MeasureError> {
        let mut seen = HashSet::new();
        for (i, atom) in atoms.iter().enumerate() {
            if !seen.insert(atom.label.as_str()) {
                return Err(invalid(
                    format!("atoms[{i}].label"),
                    format!("duplicate atom label {:?}", atom.label),
                ));
            }
            if !(atom.mass.is_finite() && atom.mass > 0.0) {
                return Err(invalid(
                    format!("atoms[{i}].mass"),
                    format!("atom mass must be positive and finite, got {}", atom.mass),
                ));
            }
        }
        for (i, piece) in diffuse.iter().enumerate() {
            let path = format!("diffuse[{i}]");
            piece.interval.check(&format!("{path}.interval"))?;
            check_partition(
                &piece.interval,
                piece.density.iter().map(|s| s.sub),
                &format!("{path}.density"),
            )?;
            for (k, seg) in piece.density.iter().enumerate() {
                if !(seg.value.is_finite() && seg.value >= 0.0) {
                    return Err(invalid(
                        format!("{path}.density[{k}].value"),
                        format!("density must be finite and non-negative, got {}", seg.value),
                    ));
                }
            }
        }
        let mut order: Vec<usize> = (0..diffuse.len()).collect();
        order.sort_by(|&a, &b| diffuse[a].interval.start.total_cmp(&diffuse[b].interval.start));
        for w in order.windows(2) {
            let (a, b) = (&diffuse[w[0]].interval, &diffuse[w[1]].interval);
            if b.start < a.end {
                return Err(invalid(
                    format!("diffuse[{}].interval", w[1]),
                    format!("overlaps diffuse[{}].interval", w[0]),
                ));
            }
        }
        Ok(Self { atoms, diffuse })
    }

    pub fn empty() -> Self {
        Self {
            atoms: Vec::new(),
            diffuse: Vec::new(),
        }
    }

    pub fn from_atoms<S: Into<String>>(
        atoms: impl IntoIterator<Item = (S, f64)>,
    ) -> Result<Self, MeasureError> {
        let atoms = atoms
            .into_iter()
            .map(|(label, mass)| AtomEntry {
                label: label.into(),
                mass,
            })
            .collect();
        Self::new(atoms, Vec::new())
    }

    /// Lebesgue measure on `[start, end)`.
    pub fn lebesgue(start: f64, end: f64) -> Result<Self, MeasureError> {
        Self::new(
            Vec::new(),
            vec![DiffusePiece::uniform(Interval::new(start, end), 1.0)],
        )
    }

    /// Counting measure on the integers `-n..=n`, atoms labelled by value.
    pub fn integer_lattice(n: usize) -> Self {
        let n = n as i64;
        Self::from_atoms((-n..=n).map(|k| (k.to_string(), 1.0))).expect("distinct labels")
    }

    pub fn atoms(&self) -> &[AtomEntry] {
        &self.atoms
    }

    pub fn diffuse(&self) -> &[DiffusePiece] {
        &self.diffuse
    }

    pub fn atom_index(&self, label: &str) -> Option<usize> {
        self.atoms.iter().position(|a| a.label == label)
    }

    pub fn total_measure(&self) -> f64 {
        self.atoms.iter().map(|a| a.mass).sum::<f64>()
            + self.diffuse.iter().map(DiffusePiece::measure).sum::<f64>()
    }

    /// `∫_X |f|^p dμ`, exact up to rounding.
    pub fn integrate_abs_power(&self, f: &SimpleFunction, p: f64) -> Result<f64, MeasureError> {
        check_exponent(p)?;
        f.check_against(self)?;
        let atom_part: f64 = self
            .atoms
            .iter()
            .map(|a| abs_pow(f.atom_value(&a.label), p) * a.mass)
            .sum();
        let mut diffuse_part = 0.0;
        for (i, piece) in self.diffuse.iter().enumerate() {
            for cell in refine(piece, &f.segments_for(i, piece)) {
                diffuse_part += abs_pow(cell.value, p) * cell.density * cell.interval.length();
            }
        }
        Ok(atom_part + diffuse_part)
    }

    /// Splits the space into its atoms and the positive-measure part of its
    /// diffuse pieces.
    pub fn decompose(&self) -> Decomposition {
        let atoms: Vec<String> = self.atoms.iter().map(|a| a.label.clone()).collect();
        let atom_measure = self.atoms.iter().map(|a| a.mass).sum();
        let mut diffuse = Vec::new();
        for (i, piece) in self.diffuse.iter().enumerate() {
            let mut support: Vec<Interval> = Vec::new();
            for seg in piece.density.iter().filter(|s| s.value > 0.0) {
                match support.last_mut() {
                    Some(last) if last.end == seg.sub.start => last.end = seg.sub.end,
                    _ => support.push(seg.sub),
                }
            }
            let measure = piece.measure();
            if measure > 0.0 {
                diffuse.push(DiffuseSupport {
                    piece: i,
                    support,
                    measure,
                });
            }
        }
        let diffuse_measure = diffuse.iter().map(|d| d.measure).sum();
        Decomposition {
            atoms,
            diffuse,
            atom_measure,
            diffuse_measure,
        }
    }

    pub fn is_atomless(&self) -> bool {
        self.decompose().atoms.is_empty()
    }

    /// Integer cells `[n, n+1)` meeting a positive-length diffuse piece.
    pub fn gabor_cells(&self) -> Vec<i64> {
        let mut cells: Vec<i64> = Vec::new();
        for piece in &self.diffuse {
            let lo = piece.interval.start.floor() as i64;
            let hi = piece.interval.end.ceil() as i64;
            for n in lo..hi {
                if Interval::new(n as f64, (n + 1) as f64)
                    .intersect(&piece.interval)
                    .is_some()
                {
                    cells.push(n);
                }
            }
        }
        cells.sort_unstable();
        cells.dedup();
        cells
    }
}

/// Checks whether singleton masses on a group of `group_size` elements are
/// invariant under translation. Every translation permutes the singletons
/// transitively, so invariance holds iff all masses coincide; the common mass
/// is the scale of the counting measure.
pub fn check_group_invariance(
    group_size: usize,
    masses: &[f64],
) -> Result<GroupInvariance, MeasureError> {
    if group_size == 0 {
        return Err(MeasureError::EmptyGroup);
    }
    if masses.len() != group_size {
        return Err(MeasureError::MassCount {
            expected: group_size,
            found: masses.len(),
        });
    }
    if let Some(i) = masses.iter().position(|m| !(m.is_finite() && *m > 0.0)) {
        return Err(invalid(
            format!("masses[{i}]"),
            "singleton mass must be positive and finite",
        ));
    }
    let max = masses.iter().copied().fold(f64::MIN, f64::max);
    let min = masses.iter().copied().fold(f64::MAX, f64::min);
    Ok(if max == min {
        GroupInvariance::InvariantCounting { scale: masses[0] }
    } else {
        GroupInvariance::NotInvariant
    })
}

pub(crate) fn check_exponent(p: f64) -> Result<(), MeasureError> {
    if p.is_finite() && p >= 1.0 {
        Ok(())
    } else {
        Err(MeasureError::InvalidExponent(p))
    }
}

/// `|z|^p` with `0^p = 0`.
pub(crate) fn abs_pow(z: Complex64, p: f64) -> f64 {
    let r = z.norm();
    if r == 0.0 {
        0.0
    } else {
        r.powf(p)
    }
}

fn check_partition(
    whole: &Interval,
    subs: impl Iterator<Item = Interval>,
    path: &str,
) -> Result<(), MeasureError> {
    let mut cursor = whole.start;
    let mut count = 0;
    for (k, sub) in subs.enumerate() {
        sub.check(&format!("{path}[{k}].sub"))?;
        if sub.start != cursor {
            return Err(invalid(
                format!("{path}[{k}].sub"),
                format!("expected segment to start at {cursor}, got {}", sub.start),
            ));
        }
        cursor = sub.end;
        count += 1;
    }
    if count == 0 {
        return Err(invalid(path, "partition must have at least one segment"));
    }
    if cursor != whole.end {
        return Err(invalid(
            path,
            format!("segments end at {cursor}, piece ends at {}", whole.end),
        ));
    }
    Ok(())
}

/// Complex value on a subinterval of a diffuse piece.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ValueSegment {
    pub sub: Interval,
    #[serde(with = "complex_value")]
    pub value: Complex64,
}

/// Common refinement cell of a piece's density and a function's values.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RefinedCell {
    pub interval: Interval,
    pub density: f64,
    pub value: Complex64,
}

/// Walks the density partition and the value partition of one piece together.
pub fn refine(piece: &DiffusePiece, values: &[ValueSegment]) -> Vec<RefinedCell> {
    let mut out = Vec::new();
    let (mut i, mut j) = (0, 0);
    while i < piece.density.len() && j < values.len() {
        let d = &piece.density[i];
        let v = &values[j];
        if let Some(interval) = d.sub.intersect(&v.sub) {
            out.push(RefinedCell {
                interval,
                density: d.value,
                value: v.value,
            });
        }
        if d.sub.end <= v.sub.end {
            i += 1;
        } else {
            j += 1;
        }
    }
    out
}

/// Complex simple function: one value per atom, piecewise-constant values on
/// each diffuse piece. Atoms without an entry take the value 0; an empty
/// diffuse list means 0 on every piece.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "FunctionDoc", into = "FunctionDoc")]
pub struct SimpleFunction {
    atom_values: BTreeMap<String, Complex64>,
    diffuse_values: Vec<Vec<ValueSegment>>,
}

#[derive(Serialize, Deserialize)]
struct FunctionDoc {
    #[serde(default = "schema_default")]
    schema: u32,
    #[serde(default, with = "complex_map")]
    atoms: BTreeMap<String, Complex64>,
    #[serde(default)]
    diffuse: Vec<Vec<ValueSegment>>,
}

impl TryFrom<FunctionDoc> for SimpleFunction {
    type Error = MeasureError;

    fn try_from(doc: FunctionDoc) -> Result<Self, MeasureError> {
        check_schema(doc.schema)?;
        SimpleFunction::new(doc.atoms, doc.diffuse)
    }
}

impl From<SimpleFunction> for FunctionDoc {
    fn from(f: SimpleFunction) -> Self {
        FunctionDoc {
            schema: SCHEMA_VERSION,
            atoms: f.atom_values,
            diffuse: f.diffuse_values,
        }
    }
}

impl SimpleFunction {
    pub fn new(
        atom_values: BTreeMap<String, Complex64>,
        diffuse_values: Vec<Vec<ValueSegment>>,
    ) -> Result<Self, MeasureError> {
        for (label, v) in &atom_values {
            if !(v.re.is_finite() && v.im.is_finite()) {
                return Err(invalid(format!("atoms.{label}"), "value must be finite"));
            }
        }
        for (i, segs) in diffuse_values.iter().enumerate() {
            let path = format!("diffuse[{i}]");
            let Some(first) = segs.first() else {
                return Err(invalid(path, "partition must have at least one segment"));
            };
            let whole = Interval::new(first.sub.start, segs.last().unwrap().sub.end);
            check_partition(&whole, segs.iter().map(|s| s.sub), &path)?;
            for (k, s) in segs.iter().enumerate() {
                if !(s.value.re.is_finite() && s.value.im.is_finite()) {
                    return Err(invalid(format!("{path}[{k}].value"), "value must be finite"));
                }
            }
        }
        Ok(Self {
            atom_values,
            diffuse_values,
        })
    }

    /// The zero function (valid on any space).
    pub fn zero() -> Self {
        Self {
            atom_values: BTreeMap::new(),
            diffuse_values: Vec::new(),
        }
    }

    /// Constant `c` on every atom and every diffuse piece of `space`.
    pub fn constant(space: &MeasureSpace, c: Complex64) -> Self {
        Self {
            atom_values: space.atoms.iter().map(|a| (a.label.clone(), c)).collect(),
            diffuse_values: space
                .diffuse
                .iter()
                .map(|p| {
                    vec![ValueSegment {
                        sub: p.interval,
                        value: c,
                    }]
                })
                .collect(),
        }
    }

    /// Indicator of a single atom.
    pub fn atom_indicator(label: &str) -> Self {
        Self::zero().with_atom(label, Complex64::new(1.0, 0.0))
    }

    /// Function given by values on atoms only (zero on the diffuse part).
    pub fn on_atoms<S: Into<String>>(values: impl IntoIterator<Item = (S, Complex64)>) -> Self {
        Self {
            atom_values: values.into_iter().map(|(l, v)| (l.into(), v)).collect(),
            diffuse_values: Vec::new(),
        }
    }

    pub fn with_atom(mut self, label: &str, value: Complex64) -> Self {
        self.atom_values.insert(label.to_string(), value);
        self
    }

    /// Sets the value partition of diffuse piece `index`; other pieces that
    /// were implicitly zero become explicit zero segments of `space`.
    pub fn with_piece(
        mut self,
        space: &MeasureSpace,
        index: usize,
        segments: Vec<ValueSegment>,
    ) -> Self {
        if self.diffuse_values.is_empty() {
            self.diffuse_values = space
                .diffuse
                .iter()
                .map(|p| {
                    vec![ValueSegment {
                        sub: p.interval,
                        value: Complex64::new(0.0, 0.0),
                    }]
                })
                .collect();
        }
        self.diffuse_values[index] = segments;
        self
    }

    pub fn atom_value(&self, label: &str) -> Complex64 {
        self.atom_values
            .get(label)
            .copied()
            .unwrap_or(Complex64::new(0.0, 0.0))
    }

    pub fn atom_values(&self) -> &BTreeMap<String, Complex64> {
        &self.atom_values
    }

    pub fn diffuse_values(&self) -> &[Vec<ValueSegment>] {
        &self.diffuse_values
    }

    /// Value partition of piece `index`, materializing the implicit zero.
    pub fn segments_for<'a>(&'a self, index: usize, piece: &DiffusePiece) -> Cow<'a, [ValueSegment]> {
        match self.diffuse_values.get(index) {
            Some(segs) => Cow::Borrowed(segs.as_slice()),
            None => Cow::Owned(vec![ValueSegment {
                sub: piece.interval,
                value: Complex64::new(0.0, 0.0),
            }]),
        }
    }

    pub fn check_against(&self, space: &MeasureSpace) -> Result<(), MeasureError> {
        for label in self.atom_values.keys() {
            if space.atom_index(label).is_none() {
                return Err(mismatch(
                    format!("atoms.{label}"),
                    "no atom with this label in the space",
                ));
            }
        }
        if !self.diffuse_values.is_empty() && self.diffuse_values.len() != space.diffuse.len() {
            return Err(mismatch(
                "diffuse",
                format!(
                    "{} value partitions for {} diffuse pieces",
                    self.diffuse_values.len(),
                    space.diffuse.len()
                ),
            ));
        }
        for (i, (segs, piece)) in self.diffuse_values.iter().zip(&space.diffuse).enumerate() {
            let first = segs[0].sub.start;
            let last = segs[segs.len() - 1].sub.end;
            if first != piece.interval.start || last != piece.interval.end {
                return Err(mismatch(
                    format!("diffuse[{i}]"),
                    format!(
                        "values cover [{first}, {last}), piece is [{}, {})",
                        piece.interval.start, piece.interval.end
                    ),
                ));
            }
        }
        Ok(())
    }

    /// Applies `g` pointwise.
    pub fn map(&self, g: impl Fn(Complex64) -> Complex64) -> Self {
        Self {
            atom_values: self
                .atom_values
                .iter()
                .map(|(l, &v)| (l.clone(), g(v)))
                .collect(),
            diffuse_values: self
                .diffuse_values
                .iter()
                .map(|segs| {
                    segs.iter()
                        .map(|s| ValueSegment {
                            sub: s.sub,
                            value: g(s.value),
                        })
                        .collect()
                })
                .collect(),
        }
    }

    /// `|f|^p` as a (real, non-negative) simple function.
    pub fn abs_pow(&self, p: f64) -> Self {
        self.map(|z| Complex64::new(abs_pow(z, p), 0.0))
    }

    pub fn conj(&self) -> Self {
        self.map(|z| z.conj())
    }

    pub fn scale(&self, s: Complex64) -> Self {
        self.map(|z| z * s)
    }

    /// Pointwise combination on the common refinement of both partitions.
    pub fn zip_with(
        &self,
        other: &SimpleFunction,
        space: &MeasureSpace,
        g: impl Fn(Complex64, Complex64) -> Complex64,
    ) -> Result<Self, MeasureError> {
        self.check_against(space)?;
        other.check_against(space)?;
        let atom_values = space
            .atoms
            .iter()
            .map(|a| {
                (
                    a.label.clone(),
                    g(self.atom_value(&a.label), other.atom_value(&a.label)),
                )
            })
            .collect();
        let diffuse_values = space
            .diffuse
            .iter()
            .enumerate()
            .map(|(i, piece)| {
                let a = self.segments_for(i, piece);
                let b = other.segments_for(i, piece);
                let (mut x, mut y) = (0, 0);
                let mut out = Vec::new();
                while x < a.len() && y < b.len() {
                    if let Some(sub) = a[x].sub.intersect(&b[y].sub) {
                        out.push(ValueSegment {
                            sub,
                            value: g(a[x].value, b[y].value),
                        });
                    }
                    if a[x].sub.end <= b[y].sub.end {
                        x += 1;
                    } else {
                        y += 1;
                    }
                }
                out
            })
            .collect();
        Ok(Self {
            atom_values,
            diffuse_values,
        })
    }

    pub fn product(&self, other: &SimpleFunction, space: &MeasureSpace) -> Result<Self, MeasureError> {
        self.zip_with(other, space, |a, b| a * b)
    }

    pub fn sum(&self, other: &SimpleFunction, space: &MeasureSpace) -> Result<Self, MeasureError> {
        self.zip_with(other, space, |a, b| a + b)
    }

    /// Essential supremum of `|f|` with respect to the space's measure.
    pub fn ess_sup(&self, space: &MeasureSpace) -> Result<f64, MeasureError> {
        self.check_against(space)?;
        let mut sup = space
            .atoms
            .iter()
            .map(|a| self.atom_value(&a.label).norm())
            .fold(0.0, f64::max);
        for (i, piece) in space.diffuse.iter().enumerate() {
            for cell in refine(piece, &self.segments_for(i, piece)) {
                if cell.density > 0.0 {
                    sup = sup.max(cell.value.norm());
                }
            }
        }
        Ok(sup)
    }

    /// Measure of the diffuse part of `{f ≠ 0}`.
    pub fn diffuse_support_measure(&self, space: &MeasureSpace) -> Result<f64, MeasureError> {
        self.check_against(space)?;
        let mut total = 0.0;
        for (i, piece) in space.diffuse.iter().enumerate() {
            for cell in refine(piece, &self.segments_for(i, piece)) {
                if cell.value != Complex64::new(0.0, 0.0) {
                    total += cell.density * cell.interval.length();
                }
            }
        }
        Ok(total)
    }
}

/// A complex number read as a bare real or `[re, im]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct ComplexValue(#[serde(with = "complex_value")] pub Complex64);

/// Complex numbers in JSON: a bare number (real) or `[re, im]`.
pub(crate) mod complex_value {
    use num_complex::Complex64;
    use serde::{Deserialize, Deserializer, Serialize, Serializer};

    #[derive(Serialize, Deserialize)]
    #[serde(untagged)]
    pub(super) enum Repr {
        Real(f64),
        Pair([f64; 2]),
    }

    impl From<Repr> for Complex64 {
        fn from(r: Repr) -> Self {
            match r {
                Repr::Real(x) => Complex64::new(x, 0.0),
                Repr::Pair([re, im]) => Complex64::new(re, im),
            }
        }
    }

    pub fn serialize<S: Serializer>(z: &Complex64, s: S) -> Result<S::Ok, S::Error> {
        Repr::Pair([z.re, z.im]).serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Complex64, D::Error> {
        Repr::deserialize(d).map(Into::into)
    }
}

mod complex_map {
    use std::collections::BTreeMap;

    use num_complex::Complex64;
    use serde::{Deserialize, Deserializer, Serialize, Serializer};

    use super::complex_value::Repr;

    pub fn serialize<S: Serializer>(
        m: &BTreeMap<String, Complex64>,
        s: S,
    ) -> Result<S::Ok, S::Error> {
        m.iter()
            .map(|(k, z)| (k, Repr::Pair([z.re, z.im])))
            .collect::<BTreeMap<_, _>>()
            .serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(
        d: D,
    ) -> Result<BTreeMap<String, Complex64>, D::Error> {
        let raw = BTreeMap::<String, Repr>::deserialize(d)?;
        Ok(raw.into_iter().map(|(k, v)| (k, v.into())).collect())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    #[test]
    fn single_atom_integral() {
        let space = MeasureSpace::from_atoms([("a", 2.0)]).unwrap();
        let f = SimpleFunction::atom_indicator("a").scale(c(3.0));
        assert_eq!(space.integrate_abs_power(&f, 2.0).unwrap(), 18.0);
    }

    #[test]
    fn unit_constant_on_unit_interval() {
        let space = MeasureSpace::lebesgue(0.0, 1.0).unwrap();
        let f = SimpleFunction::constant(&space, c(1.0));
        assert_eq!(space.integrate_abs_power(&f, 5.0).unwrap(), 1.0);
    }

    #[test]
    fn step_function_against_midpoint_rule() {
        let space = MeasureSpace::lebesgue(0.0, 2.0).unwrap();
        let f = SimpleFunction::zero().with_piece(
            &space,
            0,
            vec![
                ValueSegment {
                    sub: Interval::new(0.0, 1.0),
                    value: c(4.0),
                },
                ValueSegment {
                    sub: Interval::new(1.0, 2.0),
                    value: c(0.0),
                },
            ],
        );
        let exact = space.integrate_abs_power(&f, 1.0).unwrap();
        // midpoint rule over 2000 cells; the jump sits on a cell boundary
        let n = 2000;
        let h = 2.0 / n as f64;
        let quad: f64 = (0..n)
            .map(|k| {
                let x = (k as f64 + 0.5) * h;
                if x < 1.0 {
                    4.0 * h
                } else {
                    0.0
                }
            })
            .sum();
        assert!((quad - 4.0).abs() < 1e-9);
        assert!((exact - quad).abs() < 1e-9);
        assert_eq!(exact, 4.0);
    }

    #[test]
    fn mismatched_function_is_rejected() {
        let space = MeasureSpace::from_atoms([("a", 1.0)]).unwrap();
        let f = SimpleFunction::atom_indicator("b");
        assert!(matches!(
            space.integrate_abs_power(&f, 1.0),
            Err(MeasureError::Mismatch { .. })
        ));
        assert!(matches!(
            space.integrate_abs_power(&SimpleFunction::zero(), 0.5),
            Err(MeasureError::InvalidExponent(_))
        ));
    }

    #[test]
    fn decompose_cases() {
        let atoms = MeasureSpace::from_atoms([("a", 1.0)]).unwrap();
        let d = atoms.decompose();
        assert_eq!(d.atoms, vec!["a".to_string()]);
        assert!(d.diffuse.is_empty());

        let leb = MeasureSpace::lebesgue(0.0, 1.0).unwrap();
        let d = leb.decompose();
        assert!(d.atoms.is_empty());
        assert_eq!(d.diffuse.len(), 1);
        assert_eq!(d.diffuse[0].support, vec![Interval::new(0.0, 1.0)]);

        let mixed = MeasureSpace::new(
            vec![AtomEntry {
                label: "a".into(),
                mass: 1.0,
            }],
            vec![DiffusePiece::uniform(Interval::new(0.0, 1.0), 0.0)],
        )
        .unwrap();
        let d = mixed.decompose();
        assert_eq!(d.atoms.len(), 1);
        assert!(d.diffuse.is_empty());
        let indicator = SimpleFunction::constant(&mixed, c(1.0)).with_atom("a", c(0.0));
        assert_eq!(mixed.integrate_abs_power(&indicator, 1.0).unwrap(), 0.0);
    }

    #[test]
    fn atomless_cases() {
        assert!(MeasureSpace::lebesgue(0.0, 1.0).unwrap().is_atomless());
        assert!(!MeasureSpace::integer_lattice(5).is_atomless());
        assert!(MeasureSpace::empty().is_atomless());
    }

    #[test]
    fn group_invariance_cases() {
        assert_eq!(
            check_group_invariance(3, &[2.0, 2.0, 2.0]).unwrap(),
            GroupInvariance::InvariantCounting { scale: 2.0 }
        );
        assert_eq!(
            check_group_invariance(3, &[1.0, 2.0, 1.0]).unwrap(),
            GroupInvariance::NotInvariant
        );
        assert_eq!(check_group_invariance(0, &[]), Err(MeasureError::EmptyGroup));
        assert!(check_group_invariance(2, &[1.0]).is_err());
        assert!(check_group_invariance(2, &[1.0, -1.0]).is_err());
    }

    #[test]
    fn json_schema_round_trip() {
        let json = r#"{"atoms":[{"label":"a","mass":2.0}],"diffuse":[{"interval":[0.0,1.0],"density":[{"sub":[0.0,1.0],"value":1.0}]}]}"#;
        let space: MeasureSpace = serde_json::from_str(json).unwrap();
        assert_eq!(space.atoms().len(), 1);
        assert_eq!(space.total_measure(), 3.0);
        let back: MeasureSpace =
            serde_json::from_str(&serde_json::to_string(&space).unwrap()).unwrap();
        assert_eq!(back, space);

        let f_json = r#"{"schema":1,"atoms":{"a":3.0},"diffuse":[[{"sub":[0.0,0.5],"value":[1.0,-1.0]},{"sub":[0.5,1.0],"value":0}]]}"#;
        let f: SimpleFunction = serde_json::from_str(f_json).unwrap();
        f.check_against(&space).unwrap();
        assert_eq!(f.atom_value("a"), c(3.0));
        assert_eq!(f.diffuse_values()[0][0].value, Complex64::new(1.0, -1.0));
    }

    #[test]
    fn json_errors_carry_paths() {
        let cases = [
            (
                r#"{"atoms":[{"label":"a","mass":0.0}]}"#,
                "atoms[0].mass",
            ),
            (
                r#"{"atoms":[{"label":"a","mass":1.0},{"label":"a","mass":1.0}]}"#,
                "atoms[1].label",
            ),
            (
                r#"{"diffuse":[{"interval":[0.0,1.0],"density":[{"sub":[0.0,0.4],"value":1.0},{"sub":[0.5,1.0],"value":1.0}]}]}"#,
                "diffuse[0].density[1].sub",
            ),
            (
                r#"{"diffuse":[{"interval":[0.0,1.0],"density":[{"sub":[0.0,1.0],"value":-1.0}]}]}"#,
                "diffuse[0].density[0].value",
            ),
            (
                r#"{"diffuse":[{"interval":[0.0,2.0],"density":[{"sub":[0.0,2.0],"value":1.0}]},{"interval":[1.0,3.0],"density":[{"sub":[1.0,3.0],"value":1.0}]}]}"#,
                "diffuse[1].interval",
            ),
            (r#"{"schema":2}"#, "schema"),
        ];
        for (json, path) in cases {
            let err = serde_json::from_str::<MeasureSpace>(json).unwrap_err().to_string();
            assert!(err.starts_with(path), "{err} should start with {path}");
        }
    }

    #[test]
    fn refinement_splits_on_both_partitions() {
        let piece = DiffusePiece {
            interval: Interval::new(0.0, 2.0),
            density: vec![
                DensitySegment {
                    sub: Interval::new(0.0, 1.5),
                    value: 1.0,
                },
                DensitySegment {
                    sub: Interval::new(1.5, 2.0),
                    value: 3.0,
                },
            ],
        };
        let values = vec![
            ValueSegment {
                sub: Interval::new(0.0, 0.5),
                value: c(1.0),
            },
            ValueSegment {
                sub: Interval::new(0.5, 2.0),
                value: c(2.0),
            },
        ];
        let cells = refine(&piece, &values);
        let lens: Vec<f64> = cells.iter().map(|c| c.interval.length()).collect();
        assert_eq!(lens, vec![0.5, 1.0, 0.5]);
        assert_eq!(cells[2].density, 3.0);
        assert_eq!(cells[2].value, c(2.0));
    }
}
