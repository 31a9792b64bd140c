//! Exact sequences `0 → left →C→ mid →Q→ quotient → 0` at finite truncation,
//! the maps between them across exponents, and the maps induced by unitary
//! intertwiners.
//!
//! `mid` is the space of all `D×D` matrices in row-major coordinates. In the
//! measure case `left` is spanned by atom indicators and `C` sends `χ_x` to its
//! truncated multiplication operator. In the group case `left` is `L¹(G)`
//! modulo `ker π`, coordinatized by the pivot elements of the induction
//! matrix. `Q` is the coordinate projection onto a fixed standard-basis
//! complement of `im C`.

use num_complex::Complex64;
use rand::Rng;
use serde::Serialize;
use thiserror::Error;

use crate::group::{
    induction_matrix, intertwiner_residual, GroupError, UnitaryRep, INTERTWINER_TOL, REP_TOL,
};
use crate::linalg::{
    complement_indices, inverse, rank, solve_full_column_rank, ComplexMatrix, LinalgError,
    RowEchelon, RANK_TOL,
};
use crate::measure::{MeasureSpace, SimpleFunction};
use crate::multiplication::{build_truncation, BasisLabel, MultiplicationError, TruncationSchedule};
use crate::par::Execution;
use crate::random;
use crate::schatten::{schatten_norm, within_relative, PExponent, SchattenError};

/// Slack on sampled contractivity `‖x‖_q ≤ ‖x‖_p`.
pub const CONTRACTIVITY_SLACK: f64 = 1e-10;
/// Tolerance for the functor laws and norm preservation.
pub const FUNCTOR_TOL: f64 = 1e-9;
/// Random elements per morphism contractivity certificate.
pub const CERTIFICATE_SAMPLES: usize = 8;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SystemError {
    #[error(transparent)]
    Multiplication(#[from] MultiplicationError),
    #[error(transparent)]
    Group(#[from] GroupError),
    #[error(transparent)]
    Linalg(#[from] LinalgError),
    #[error(transparent)]
    Schatten(#[from] SchattenError),
    #[error("connecting map has rank {found}, expected {expected}: a kernel was not quotiented out")]
    RankDeficient { expected: usize, found: usize },
    #[error("morphism needs p ≤ q, got p = {p}, q = {q}")]
    DecreasingExponents { p: PExponent, q: PExponent },
    #[error("nodes come from different contexts")]
    ContextMismatch,
    #[error("exponent grid must be nonempty and nondecreasing")]
    BadGrid,
    #[error("node maps need group contexts")]
    NotGroupContext,
    #[error("nodes have different exponents")]
    ExponentMismatch,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum NodeContext {
    Measure {
        space: MeasureSpace,
        schedule: TruncationSchedule,
    },
    Group {
        rep: UnitaryRep,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SequenceNode {
    pub p: PExponent,
    pub context: NodeContext,
    /// Operator dimension `D`; the mid space has dimension `D²`.
    pub operator_dim: usize,
    pub left_labels: Vec<String>,
    pub connecting_map: ComplexMatrix,
    pub quotient_map: ComplexMatrix,
    /// Standard-basis indices of the mid space spanning the complement.
    pub complement: Vec<usize>,
    pub quotient_dim: usize,
}

impl SequenceNode {
    pub fn left_dim(&self) -> usize {
        self.connecting_map.cols()
    }

    pub fn mid_dim(&self) -> usize {
        self.connecting_map.rows()
    }

    /// Lift from quotient coordinates back to the complement.
    pub fn lift(&self) -> ComplexMatrix {
        let mut e = ComplexMatrix::zeros(self.mid_dim(), self.quotient_dim);
        for (k, &i) in self.complement.iter().enumerate() {
            e[(i, k)] = Complex64::new(1.0, 0.0);
        }
        e
    }

    /// Copy with column `j` of the connecting map set to zero.
    pub fn with_zeroed_image_column(&self, j: usize) -> Self {
        let mut node = self.clone();
        for i in 0..node.mid_dim() {
            node.connecting_map[(i, j)] = Complex64::new(0.0, 0.0);
        }
        node
    }

    /// Operator `C x` for left coordinates `x`, as a `D×D` matrix.
    pub fn image_operator(&self, x: &[Complex64]) -> Result<ComplexMatrix, SystemError> {
        let v = self.connecting_map.apply(x)?;
        Ok(ComplexMatrix::from_vec(self.operator_dim, self.operator_dim, v)?)
    }
}

/// Builds the node of `context` at exponent `p`.
pub fn build_node(context: &NodeContext, p: PExponent) -> Result<SequenceNode, SystemError> {
    let (operator_dim, left_labels, connecting_map) = match context {
        NodeContext::Measure { space, schedule } => {
            let base = build_truncation(space, &SimpleFunction::zero(), schedule)?;
            let labels: Vec<String> = base
                .labels
                .iter()
                .filter_map(|l| match l {
                    BasisLabel::Atom(a) => Some(a.clone()),
                    BasisLabel::Gabor { .. } => None,
                })
                .collect();
            let d = base.labels.len();
            let columns = labels
                .iter()
                .map(|a| {
                    build_truncation(space, &SimpleFunction::atom_indicator(a), schedule)
                        .map(|t| t.matrix.vectorize())
                })
                .collect::<Result<Vec<_>, _>>()?;
            (d, labels, ComplexMatrix::from_columns(d * d, &columns)?)
        }
        NodeContext::Group { rep } => {
            let full = induction_matrix(rep);
            let pivots = RowEchelon::new(&full, RANK_TOL).pivots;
            let columns: Vec<Vec<Complex64>> = pivots.iter().map(|&x| full.column(x)).collect();
            let d = rep.dim();
            (
                d,
                pivots.iter().map(|x| format!("g{x}")).collect(),
                ComplexMatrix::from_columns(d * d, &columns)?,
            )
        }
    };
    let left = connecting_map.cols();
    let found = rank(&connecting_map, RANK_TOL);
    if found != left {
        return Err(SystemError::RankDeficient {
            expected: left,
            found,
        });
    }
    let mid = connecting_map.rows();
    let complement = complement_indices(&connecting_map, RANK_TOL);
    let quotient_dim = mid - left;
    let mut basis = ComplexMatrix::zeros(mid, mid);
    for i in 0..mid {
        for j in 0..left {
            basis[(i, j)] = connecting_map[(i, j)];
        }
    }
    for (k, &i) in complement.iter().enumerate() {
        basis[(i, left + k)] = Complex64::new(1.0, 0.0);
    }
    let inv = inverse(&basis)?;
    let mut quotient_map = ComplexMatrix::zeros(quotient_dim, mid);
    for k in 0..quotient_dim {
        for j in 0..mid {
            quotient_map[(k, j)] = inv[(left + k, j)];
        }
    }
    Ok(SequenceNode {
        p,
        context: context.clone(),
        operator_dim,
        left_labels,
        connecting_map,
        quotient_map,
        complement,
        quotient_dim,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ExactnessReport {
    pub left_dim: usize,
    pub mid_dim: usize,
    pub quotient_dim: usize,
    /// `rank C = dim left`.
    pub injective: bool,
    /// `rank Q = quotient_dim` and `nullity Q + quotient_dim = dim mid`.
    pub rank_nullity: bool,
    /// `Q C = 0` and `nullity Q = dim left`.
    pub image_is_kernel: bool,
    pub passes: bool,
}

pub fn verify_exactness(node: &SequenceNode) -> Result<ExactnessReport, SystemError> {
    let left = node.left_dim();
    let mid = node.mid_dim();
    let injective = rank(&node.connecting_map, RANK_TOL) == left;
    let q_rank = rank(&node.quotient_map, RANK_TOL);
    let q_nullity = mid - q_rank;
    let rank_nullity = q_rank == node.quotient_dim && q_nullity + node.quotient_dim == mid;
    let qc = node.quotient_map.matmul(&node.connecting_map)?;
    let scale = 1.0 + node.quotient_map.max_abs() * node.connecting_map.max_abs();
    let image_is_kernel = qc.max_abs() <= RANK_TOL * scale && q_nullity == left;
    Ok(ExactnessReport {
        left_dim: left,
        mid_dim: mid,
        quotient_dim: node.quotient_dim,
        injective,
        rank_nullity,
        image_is_kernel,
        passes: injective && rank_nullity && image_is_kernel,
    })
}

/// Distance in `S_2` from `T` to the image of the connecting map.
pub fn quotient_norm_p2(node: &SequenceNode, t: &ComplexMatrix) -> Result<f64, SystemError> {
    let mut r = t.vectorize();
    if r.len() != node.mid_dim() {
        return Err(LinalgError::DimensionMismatch {
            op: "quotient norm",
            left: (node.operator_dim, node.operator_dim),
            right: t.shape(),
        }
        .into());
    }
    let mut basis: Vec<Vec<Complex64>> = Vec::new();
    for j in 0..node.left_dim() {
        let mut v = node.connecting_map.column(j);
        for _ in 0..2 {
            for b in &basis {
                let proj: Complex64 = b.iter().zip(&v).map(|(x, y)| x.conj() * y).sum();
                v.iter_mut().zip(b).for_each(|(y, x)| *y -= proj * x);
            }
        }
        let n = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        v.iter_mut().for_each(|z| *z /= n);
        basis.push(v);
    }
    for b in &basis {
        let proj: Complex64 = b.iter().zip(&r).map(|(x, y)| x.conj() * y).sum();
        r.iter_mut().zip(b).for_each(|(y, x)| *y -= proj * x);
    }
    Ok(r.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ContractivitySample {
    pub source_norm: f64,
    pub target_norm: f64,
    pub contractive: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SystemMorphism {
    pub p: PExponent,
    pub q: PExponent,
    #[serde(skip)]
    pub left: ComplexMatrix,
    #[serde(skip)]
    pub mid: ComplexMatrix,
    #[serde(skip)]
    pub right: ComplexMatrix,
    /// `max |mid·C_p − C_q·left|`.
    pub left_square_residual: f64,
    /// `max |right·Q_p − Q_q·mid|`.
    pub right_square_residual: f64,
    pub commutes_exactly: bool,
    pub certificate: Vec<ContractivitySample>,
    pub contractive: bool,
}

/// `φ_{p,q}` between two nodes of one context. Contractivity is certified on
/// every left basis element and [`CERTIFICATE_SAMPLES`] seeded random ones.
pub fn build_morphism(
    node_p: &SequenceNode,
    node_q: &SequenceNode,
    seed: u64,
) -> Result<SystemMorphism, SystemError> {
    if node_p.p > node_q.p {
        return Err(SystemError::DecreasingExponents {
            p: node_p.p,
            q: node_q.p,
        });
    }
    if node_p.context != node_q.context {
        return Err(SystemError::ContextMismatch);
    }
    let mid = ComplexMatrix::identity(node_p.mid_dim());
    let left = solve_full_column_rank(&node_q.connecting_map, &mid.matmul(&node_p.connecting_map)?)?;
    let right = node_q.quotient_map.matmul(&mid)?.matmul(&node_p.lift())?;
    let left_square = mid
        .matmul(&node_p.connecting_map)?
        .sub(&node_q.connecting_map.matmul(&left)?)?;
    let right_square = right
        .matmul(&node_p.quotient_map)?
        .sub(&node_q.quotient_map.matmul(&mid)?)?;
    let left_square_residual = left_square.max_abs();
    let right_square_residual = right_square.max_abs();

    let n = node_p.left_dim();
    let mut elements: Vec<Vec<Complex64>> = (0..n)
        .map(|j| {
            let mut e = vec![Complex64::new(0.0, 0.0); n];
            e[j] = Complex64::new(1.0, 0.0);
            e
        })
        .collect();
    if n > 0 {
        let mut rng = random::rng_for(seed, "morphism-certificate", 0);
        for _ in 0..CERTIFICATE_SAMPLES {
            elements.push((0..n).map(|_| random::complex_normal(&mut rng)).collect());
        }
    }
    let certificate = elements
        .iter()
        .map(|x| {
            let t = node_p.image_operator(x)?;
            let image = mid.apply(&t.vectorize())?;
            let t_q = ComplexMatrix::from_vec(node_q.operator_dim, node_q.operator_dim, image)?;
            let source_norm = schatten_norm(&t, node_p.p)?;
            let target_norm = schatten_norm(&t_q, node_q.p)?;
            Ok(ContractivitySample {
                source_norm,
                target_norm,
                contractive: target_norm <= source_norm + CONTRACTIVITY_SLACK,
            })
        })
        .collect::<Result<Vec<_>, SystemError>>()?;
    let contractive = certificate.iter().all(|c| c.contractive);
    Ok(SystemMorphism {
        p: node_p.p,
        q: node_q.p,
        left,
        mid,
        right,
        left_square_residual,
        right_square_residual,
        commutes_exactly: left_square_residual == 0.0 && right_square_residual == 0.0,
        certificate,
        contractive,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CoherenceCheck {
    pub p: PExponent,
    pub q: PExponent,
    pub r: PExponent,
    pub exact: bool,
    pub residual: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DirectedSystem {
    pub grid: Vec<PExponent>,
    pub nodes: Vec<SequenceNode>,
    /// `morphisms[i][j - i]` is `φ_{grid[i], grid[j]}` for `i ≤ j`.
    pub morphisms: Vec<Vec<SystemMorphism>>,
}

fn check_grid(grid: &[PExponent]) -> Result<(), SystemError> {
    if grid.is_empty() || grid.windows(2).any(|w| w[0] > w[1]) {
        return Err(SystemError::BadGrid);
    }
    Ok(())
}

impl DirectedSystem {
    pub fn build(
        context: &NodeContext,
        grid: &[PExponent],
        seed: u64,
        exec: Execution,
    ) -> Result<Self, SystemError> {
        check_grid(grid)?;
        let nodes = exec
            .map_slice(grid, |&p| build_node(context, p))
            .into_iter()
            .collect::<Result<Vec<_>, _>>()?;
        let n = nodes.len();
        let pairs: Vec<(usize, usize)> = (0..n).flat_map(|i| (i..n).map(move |j| (i, j))).collect();
        let built = exec.map_slice(&pairs, |&(i, j)| {
            build_morphism(&nodes[i], &nodes[j], seed ^ ((i * n + j) as u64))
        });
        let mut morphisms: Vec<Vec<SystemMorphism>> = (0..n).map(|_| Vec::new()).collect();
        for ((i, _), m) in pairs.into_iter().zip(built) {
            morphisms[i].push(m?);
        }
        Ok(Self {
            grid: grid.to_vec(),
            nodes,
            morphisms,
        })
    }

    pub fn morphism(&self, i: usize, j: usize) -> &SystemMorphism {
        &self.morphisms[i][j - i]
    }

    /// `φ_{q,r} ∘ φ_{p,q} = φ_{p,r}` on all three components, for every
    /// `p ≤ q ≤ r` in the grid.
    pub fn coherence(&self) -> Result<Vec<CoherenceCheck>, SystemError> {
        let n = self.grid.len();
        let mut out = Vec::new();
        for i in 0..n {
            for j in i..n {
                for k in j..n {
                    let (a, b, c) = (self.morphism(i, j), self.morphism(j, k), self.morphism(i, k));
                    let mut residual = 0.0f64;
                    let mut exact = true;
                    for (x, y, z) in [(&b.left, &a.left, &c.left), (&b.mid, &a.mid, &c.mid), (&b.right, &a.right, &c.right)] {
                        let comp = x.matmul(y)?;
                        residual = residual.max(comp.sub(z)?.max_abs());
                        exact &= comp.exactly_equals(z);
                    }
                    out.push(CoherenceCheck {
                        p: self.grid[i],
                        q: self.grid[j],
                        r: self.grid[k],
                        exact,
                        residual,
                    });
                }
            }
        }
        Ok(out)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum ColumnKind {
    Schatten,
    /// Compact operators; coincides with the bounded column at truncation.
    Compact,
    Bounded,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GridColumn {
    pub label: String,
    pub p: PExponent,
    pub kind: ColumnKind,
    pub duplicate_of_bounded: bool,
    pub exactness: ExactnessReport,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GridBlock {
    pub from: String,
    pub to: String,
    pub left_square_residual: f64,
    pub right_square_residual: f64,
    pub commutes_exactly: bool,
    pub contractive: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GridReport {
    pub columns: Vec<GridColumn>,
    pub blocks: Vec<GridBlock>,
    pub coherence: Vec<CoherenceCheck>,
    pub all_commute: bool,
    pub all_exact: bool,
    pub coherent: bool,
    pub passes: bool,
}

fn column_label(p: PExponent, kind: ColumnKind) -> String {
    match kind {
        ColumnKind::Schatten => format!("E_{p}"),
        ColumnKind::Compact => "E_0".into(),
        ColumnKind::Bounded => "E_inf".into(),
    }
}

/// Commuting rectangles between adjacent columns, exactness of every column
/// and coherence over the whole grid. A trailing `∞` gets a compact column
/// `E_0` in front of it; both are the full matrix space here.
pub fn verify_fig2(
    context: &NodeContext,
    grid: &[PExponent],
    seed: u64,
    exec: Execution,
) -> Result<GridReport, SystemError> {
    check_grid(grid)?;
    let mut columns: Vec<(PExponent, ColumnKind)> = Vec::new();
    for &p in grid {
        if p.is_finite() {
            columns.push((p, ColumnKind::Schatten));
        } else {
            columns.push((p, ColumnKind::Compact));
            columns.push((p, ColumnKind::Bounded));
        }
    }
    let ps: Vec<PExponent> = columns.iter().map(|c| c.0).collect();
    let system = DirectedSystem::build(context, &ps, seed, exec)?;
    let cols = columns
        .iter()
        .zip(&system.nodes)
        .map(|(&(p, kind), node)| {
            Ok(GridColumn {
                label: column_label(p, kind),
                p,
                kind,
                duplicate_of_bounded: kind == ColumnKind::Compact,
                exactness: verify_exactness(node)?,
            })
        })
        .collect::<Result<Vec<_>, SystemError>>()?;
    let blocks: Vec<GridBlock> = (1..cols.len())
        .map(|j| {
            let m = system.morphism(j - 1, j);
            GridBlock {
                from: cols[j - 1].label.clone(),
                to: cols[j].label.clone(),
                left_square_residual: m.left_square_residual,
                right_square_residual: m.right_square_residual,
                commutes_exactly: m.commutes_exactly,
                contractive: m.contractive,
            }
        })
        .collect();
    let coherence = system.coherence()?;
    let all_commute = (0..ps.len())
        .all(|i| (i..ps.len()).all(|j| system.morphism(i, j).commutes_exactly));
    let all_exact = cols.iter().all(|c| c.exactness.passes);
    let coherent = coherence.iter().all(|c| c.exact);
    let contractive = blocks.iter().all(|b| b.contractive);
    Ok(GridReport {
        passes: all_commute && all_exact && coherent && contractive,
        columns: cols,
        blocks,
        coherence,
        all_commute,
        all_exact,
        coherent,
    })
}

/// Components of the node map induced by a unitary intertwiner.
#[derive(Debug, Clone, PartialEq)]
pub struct NodeMap {
    pub left: ComplexMatrix,
    pub mid: ComplexMatrix,
    pub right: ComplexMatrix,
}

impl NodeMap {
    pub fn compose(&self, first: &NodeMap) -> Result<NodeMap, SystemError> {
        Ok(NodeMap {
            left: self.left.matmul(&first.left)?,
            mid: self.mid.matmul(&first.mid)?,
            right: self.right.matmul(&first.right)?,
        })
    }

    pub fn max_difference(&self, other: &NodeMap) -> Result<f64, SystemError> {
        Ok(self
            .left
            .sub(&other.left)?
            .max_abs()
            .max(self.mid.sub(&other.mid)?.max_abs())
            .max(self.right.sub(&other.right)?.max_abs()))
    }
}

fn group_rep(node: &SequenceNode) -> Result<&UnitaryRep, SystemError> {
    match &node.context {
        NodeContext::Group { rep } => Ok(rep),
        NodeContext::Measure { .. } => Err(SystemError::NotGroupContext),
    }
}

/// Map `src → dst` induced by a unitary intertwiner `U`: `T ↦ U T U*` in the
/// middle, `vec(UTU*) = (U ⊗ conj U) vec T` in row-major coordinates.
pub fn intertwiner_node_map(
    src: &SequenceNode,
    dst: &SequenceNode,
    u: &ComplexMatrix,
) -> Result<NodeMap, SystemError> {
    if src.p != dst.p {
        return Err(SystemError::ExponentMismatch);
    }
    let (r1, r2) = (group_rep(src)?, group_rep(dst)?);
    let residual = intertwiner_residual(u, r1, r2)?;
    if residual > INTERTWINER_TOL {
        return Err(GroupError::NotIntertwiner { residual }.into());
    }
    if !u.is_square() || !u.is_unitary(REP_TOL) {
        return Err(GroupError::NotUnitary.into());
    }
    let mid = u.kron(&u.conj());
    let left = solve_full_column_rank(&dst.connecting_map, &mid.matmul(&src.connecting_map)?)?;
    let right = dst.quotient_map.matmul(&mid)?.matmul(&src.lift())?;
    Ok(NodeMap { left, mid, right })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FunctorReport {
    pub grid_size: usize,
    pub identity_residual: f64,
    pub composition_residual: f64,
    /// Worst relative change of any Schatten norm under `T ↦ U T U*`.
    pub norm_preservation_error: f64,
    pub passes: bool,
}

/// Identity and composition laws for `V: rep → V rep V*` and
/// `W: V rep V* → W V rep V* W*`, plus norm preservation of the induced mid
/// maps on `samples` random operators.
pub fn verify_functor_laws(
    rep: &UnitaryRep,
    v: &ComplexMatrix,
    w: &ComplexMatrix,
    grid: &[PExponent],
    samples: usize,
    seed: u64,
) -> Result<FunctorReport, SystemError> {
    check_grid(grid)?;
    let rep2 = rep.conjugate(v)?;
    let rep3 = rep2.conjugate(w)?;
    let wv = w.matmul(v)?;
    let ctx = |r: &UnitaryRep| NodeContext::Group { rep: r.clone() };
    let mut identity_residual = 0.0f64;
    let mut composition_residual = 0.0f64;
    for &p in grid {
        let n1 = build_node(&ctx(rep), p)?;
        let n2 = build_node(&ctx(&rep2), p)?;
        let n3 = build_node(&ctx(&rep3), p)?;
        let id = intertwiner_node_map(&n1, &n1, &ComplexMatrix::identity(rep.dim()))?;
        let identity = NodeMap {
            left: ComplexMatrix::identity(n1.left_dim()),
            mid: ComplexMatrix::identity(n1.mid_dim()),
            right: ComplexMatrix::identity(n1.quotient_dim),
        };
        identity_residual = identity_residual.max(id.max_difference(&identity)?);
        let sv = intertwiner_node_map(&n1, &n2, v)?;
        let sw = intertwiner_node_map(&n2, &n3, w)?;
        let swv = intertwiner_node_map(&n1, &n3, &wv)?;
        composition_residual = composition_residual.max(sw.compose(&sv)?.max_difference(&swv)?);
    }
    let mut norm_preservation_error = 0.0f64;
    let d = rep.dim();
    for s in 0..samples {
        let mut rng = random::rng_for(seed, "functor-norms", s as u64);
        let t = random::matrix(&mut rng, d, d);
        let u = if rng.random_bool(0.5) { v } else { &wv };
        let image = u.matmul(&t)?.matmul(&u.adjoint())?;
        for &p in grid {
            let a = schatten_norm(&t, p)?;
            let b = schatten_norm(&image, p)?;
            let rel = (a - b).abs() / a.abs().max(b.abs()).max(f64::MIN_POSITIVE);
            norm_preservation_error = norm_preservation_error.max(rel);
        }
    }
    Ok(FunctorReport {
        grid_size: grid.len(),
        identity_residual,
        composition_residual,
        norm_preservation_error,
        passes: identity_residual <= FUNCTOR_TOL
            && composition_residual <= FUNCTOR_TOL
            && norm_preservation_error <= FUNCTOR_TOL,
    })
}

/// Whether `‖U T U*‖_p = ‖T‖_p` within [`FUNCTOR_TOL`] relative.
pub fn preserves_norm(u: &ComplexMatrix, t: &ComplexMatrix, p: PExponent) -> Result<bool, SystemError> {
    let image = u.matmul(t)?.matmul(&u.adjoint())?;
    Ok(within_relative(schatten_norm(t, p)?, schatten_norm(&image, p)?, FUNCTOR_TOL))
}

/// Exponent grid `{1, 1.5, 2, 3, ∞}`.
pub fn default_grid() -> Vec<PExponent> {
    vec![
        PExponent::ONE,
        PExponent::Finite(1.5),
        PExponent::TWO,
        PExponent::Finite(3.0),
        PExponent::Infinity,
    ]
}
