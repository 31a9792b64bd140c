//! Finite groups, unitary representations and the group algebra `L¹(G)`
//! under counting measure.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::linalg::{operator_norm, ComplexMatrix, LinalgError, RowEchelon, RANK_TOL};
use crate::measure::{ComplexValue, SCHEMA_VERSION};
use crate::schatten::{schatten_norm, within_relative, PExponent, SchattenError};

/// Tolerance for unitarity and the homomorphism law of a representation.
pub const REP_TOL: f64 = 1e-10;
/// Tolerance on `max_x ‖U π₁(x) − π₂(x) U‖_op`.
pub const INTERTWINER_TOL: f64 = 1e-9;
/// Relative tolerance for norm preservation under unitary intertwiners.
pub const INVARIANCE_TOL: f64 = 1e-9;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GroupError {
    #[error("invalid group table: {0}")]
    Table(String),
    #[error("invalid representation: {0}")]
    Representation(String),
    #[error("function has {found} values, group has order {expected}")]
    GroupMismatch { expected: usize, found: usize },
    #[error("representations are over different groups")]
    DifferentGroups,
    #[error("expected a {expected_rows}x{expected_cols} matrix, got {rows}x{cols}")]
    Shape {
        expected_rows: usize,
        expected_cols: usize,
        rows: usize,
        cols: usize,
    },
    #[error("not an intertwiner (residual {residual:e})")]
    NotIntertwiner { residual: f64 },
    #[error("intertwiner is not unitary")]
    NotUnitary,
    #[error("unsupported schema version {0}")]
    Schema(u32),
    #[error("{0}")]
    Spec(String),
    #[error(transparent)]
    Linalg(#[from] LinalgError),
    #[error(transparent)]
    Schatten(#[from] SchattenError),
}

/// Group given by its Cayley table; `table[a][b]` is the index of `a·b`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct FiniteGroup {
    table: Vec<Vec<usize>>,
    identity: usize,
    inverse: Vec<usize>,
}

impl FiniteGroup {
    pub fn from_table(table: Vec<Vec<usize>>) -> Result<Self, GroupError> {
        let n = table.len();
        if n == 0 {
            return Err(GroupError::Table("empty table".into()));
        }
        for (a, row) in table.iter().enumerate() {
            if row.len() != n {
                return Err(GroupError::Table(format!("row {a} has {} entries", row.len())));
            }
            let mut seen = vec![false; n];
            for &x in row {
                if x >= n || std::mem::replace(&mut seen[x], true) {
                    return Err(GroupError::Table(format!("row {a} is not a permutation")));
                }
            }
        }
        for b in 0..n {
            let mut seen = vec![false; n];
            for row in &table {
                if std::mem::replace(&mut seen[row[b]], true) {
                    return Err(GroupError::Table(format!("column {b} is not a permutation")));
                }
            }
        }
        let identity = (0..n)
            .find(|&e| (0..n).all(|x| table[e][x] == x && table[x][e] == x))
            .ok_or_else(|| GroupError::Table("no identity element".into()))?;
        for a in 0..n {
            for b in 0..n {
                for c in 0..n {
                    if table[table[a][b]][c] != table[a][table[b][c]] {
                        return Err(GroupError::Table(format!(
                            "not associative at ({a}, {b}, {c})"
                        )));
                    }
                }
            }
        }
        // Latin rows guarantee a unique right inverse; associativity makes it two-sided.
        let inverse = (0..n)
            .map(|a| (0..n).find(|&b| table[a][b] == identity).expect("latin row"))
            .collect();
        Ok(Self {
            table,
            identity,
            inverse,
        })
    }

    /// `ℤ/n`. Panics if `n = 0`.
    pub fn cyclic(n: usize) -> Self {
        assert!(n > 0, "cyclic group of order 0");
        let table = (0..n).map(|a| (0..n).map(|b| (a + b) % n).collect()).collect();
        Self::from_table(table).expect("cyclic table is a group")
    }

    /// Dihedral group of order `2k`; element `i + k·j` is `r^i s^j`.
    pub fn dihedral(k: usize) -> Self {
        assert!(k > 0, "dihedral group of order 0");
        let n = 2 * k;
        let table = (0..n)
            .map(|x| {
                let (a, b) = (x % k, x / k);
                (0..n)
                    .map(|y| {
                        let (c, d) = (y % k, y / k);
                        let rot = if b == 0 { (a + c) % k } else { (a + k - c) % k };
                        rot + k * ((b + d) % 2)
                    })
                    .collect()
            })
            .collect();
        Self::from_table(table).expect("dihedral table is a group")
    }

    /// Permutations of `k` points in lexicographic order, composed as
    /// `(σ·τ)(i) = σ(τ(i))`.
    pub fn symmetric(k: usize) -> Self {
        let perms = permutations(k);
        let index = |p: &Vec<usize>| perms.iter().position(|q| q == p).expect("closed");
        let table = perms
            .iter()
            .map(|s| {
                perms
                    .iter()
                    .map(|t| index(&t.iter().map(|&i| s[i]).collect()))
                    .collect()
            })
            .collect();
        Self::from_table(table).expect("symmetric table is a group")
    }

    /// `G × H`; element `(g, h)` has index `g·|H| + h`.
    pub fn direct_product(g: &FiniteGroup, h: &FiniteGroup) -> Self {
        let (n, m) = (g.order(), h.order());
        let table = (0..n * m)
            .map(|x| {
                (0..n * m)
                    .map(|y| g.mul(x / m, y / m) * m + h.mul(x % m, y % m))
                    .collect()
            })
            .collect();
        Self::from_table(table).expect("product of groups is a group")
    }

    pub fn order(&self) -> usize {
        self.table.len()
    }

    pub fn identity(&self) -> usize {
        self.identity
    }

    pub fn mul(&self, a: usize, b: usize) -> usize {
        self.table[a][b]
    }

    pub fn inverse(&self, a: usize) -> usize {
        self.inverse[a]
    }

    pub fn table(&self) -> &[Vec<usize>] {
        &self.table
    }
}

fn permutations(k: usize) -> Vec<Vec<usize>> {
    fn go(prefix: &mut Vec<usize>, used: &mut [bool], out: &mut Vec<Vec<usize>>) {
        if prefix.len() == used.len() {
            out.push(prefix.clone());
            return;
        }
        for i in 0..used.len() {
            if !used[i] {
                used[i] = true;
                prefix.push(i);
                go(prefix, used, out);
                prefix.pop();
                used[i] = false;
            }
        }
    }
    let mut out = Vec::new();
    go(&mut Vec::new(), &mut vec![false; k], &mut out);
    out
}

/// Parity of permutation index `i` in [`FiniteGroup::symmetric`]`(k)`.
pub fn permutation_sign(k: usize, i: usize) -> f64 {
    let p = &permutations(k)[i];
    let inversions = (0..k)
        .flat_map(|a| (a + 1..k).map(move |b| (a, b)))
        .filter(|&(a, b)| p[a] > p[b])
        .count();
    if inversions % 2 == 0 {
        1.0
    } else {
        -1.0
    }
}

/// Unitary representation, validated on construction.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct UnitaryRep {
    group: FiniteGroup,
    dim: usize,
    matrices: Vec<ComplexMatrix>,
}

impl UnitaryRep {
    pub fn new(group: FiniteGroup, matrices: Vec<ComplexMatrix>) -> Result<Self, GroupError> {
        if matrices.len() != group.order() {
            return Err(GroupError::Representation(format!(
                "{} matrices for a group of order {}",
                matrices.len(),
                group.order()
            )));
        }
        let dim = matrices[0].rows();
        for (x, m) in matrices.iter().enumerate() {
            if m.shape() != (dim, dim) {
                return Err(GroupError::Representation(format!(
                    "matrix {x} is {}x{}, expected {dim}x{dim}",
                    m.rows(),
                    m.cols()
                )));
            }
            if !m.is_unitary(REP_TOL) {
                return Err(GroupError::Representation(format!("matrix {x} is not unitary")));
            }
        }
        if matrices[group.identity()]
            .sub(&ComplexMatrix::identity(dim))?
            .max_abs()
            > REP_TOL
        {
            return Err(GroupError::Representation("identity does not map to I".into()));
        }
        for a in 0..group.order() {
            for b in 0..group.order() {
                let prod = matrices[a].matmul(&matrices[b])?;
                if prod.sub(&matrices[group.mul(a, b)])?.max_abs() > REP_TOL {
                    return Err(GroupError::Representation(format!(
                        "π({a})π({b}) ≠ π({a}·{b})"
                    )));
                }
            }
        }
        Ok(Self {
            group,
            dim,
            matrices,
        })
    }

    /// Left translation `e_y ↦ e_{xy}`.
    pub fn regular(group: &FiniteGroup) -> Self {
        let n = group.order();
        let matrices = (0..n)
            .map(|x| {
                let mut m = ComplexMatrix::zeros(n, n);
                for y in 0..n {
                    m[(group.mul(x, y), y)] = Complex64::new(1.0, 0.0);
                }
                m
            })
            .collect();
        Self::new(group.clone(), matrices).expect("regular representation is valid")
    }

    pub fn trivial(group: &FiniteGroup) -> Self {
        Self::character(group, &vec![Complex64::new(1.0, 0.0); group.order()])
            .expect("trivial character")
    }

    /// One-dimensional representation from a character.
    pub fn character(group: &FiniteGroup, values: &[Complex64]) -> Result<Self, GroupError> {
        Self::new(
            group.clone(),
            values
                .iter()
                .map(|&v| ComplexMatrix::from_diag(&[v]))
                .collect(),
        )
    }

    /// Diagonal form of the regular representation of `ℤ/n`:
    /// `k ↦ diag(ω^{jk})`, `ω = e^{-2πi/n}`. The unitary DFT intertwines
    /// [`UnitaryRep::regular`] with it.
    pub fn cyclic_fourier(n: usize) -> Self {
        let group = FiniteGroup::cyclic(n);
        let matrices = (0..n)
            .map(|k| {
                let diag: Vec<Complex64> = (0..n)
                    .map(|j| {
                        Complex64::from_polar(
                            1.0,
                            -std::f64::consts::TAU * ((j * k) % n) as f64 / n as f64,
                        )
                    })
                    .collect();
                ComplexMatrix::from_diag(&diag)
            })
            .collect();
        Self::new(group, matrices).expect("characters of a cyclic group")
    }

    pub fn direct_sum(&self, other: &UnitaryRep) -> Result<Self, GroupError> {
        if self.group != other.group {
            return Err(GroupError::DifferentGroups);
        }
        let d = self.dim + other.dim;
        let matrices = self
            .matrices
            .iter()
            .zip(&other.matrices)
            .map(|(a, b)| {
                let mut m = ComplexMatrix::zeros(d, d);
                for i in 0..self.dim {
                    for j in 0..self.dim {
                        m[(i, j)] = a[(i, j)];
                    }
                }
                for i in 0..other.dim {
                    for j in 0..other.dim {
                        m[(self.dim + i, self.dim + j)] = b[(i, j)];
                    }
                }
                m
            })
            .collect();
        Self::new(self.group.clone(), matrices)
    }

    /// `x ↦ V π(x) V*` for unitary `V`.
    pub fn conjugate(&self, v: &ComplexMatrix) -> Result<Self, GroupError> {
        check_shape(v, self.dim, self.dim)?;
        if !v.is_unitary(REP_TOL) {
            return Err(GroupError::NotUnitary);
        }
        let vs = v.adjoint();
        let matrices = self
            .matrices
            .iter()
            .map(|m| v.matmul(m)?.matmul(&vs))
            .collect::<Result<_, _>>()?;
        Self::new(self.group.clone(), matrices)
    }

    pub fn group(&self) -> &FiniteGroup {
        &self.group
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn matrix(&self, x: usize) -> &ComplexMatrix {
        &self.matrices[x]
    }

    pub fn matrices(&self) -> &[ComplexMatrix] {
        &self.matrices
    }
}

fn check_shape(m: &ComplexMatrix, rows: usize, cols: usize) -> Result<(), GroupError> {
    if m.shape() != (rows, cols) {
        return Err(GroupError::Shape {
            expected_rows: rows,
            expected_cols: cols,
            rows: m.rows(),
            cols: m.cols(),
        });
    }
    Ok(())
}

/// Element of `L¹(G)`: one complex value per group element.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GroupFunction(Vec<Complex64>);

impl GroupFunction {
    pub fn new(values: Vec<Complex64>) -> Self {
        Self(values)
    }

    pub fn zero(order: usize) -> Self {
        Self(vec![Complex64::new(0.0, 0.0); order])
    }

    pub fn delta(order: usize, x: usize) -> Self {
        let mut f = Self::zero(order);
        f.0[x] = Complex64::new(1.0, 0.0);
        f
    }

    pub fn values(&self) -> &[Complex64] {
        &self.0
    }

    fn check(&self, group: &FiniteGroup) -> Result<(), GroupError> {
        if self.0.len() != group.order() {
            return Err(GroupError::GroupMismatch {
                expected: group.order(),
                found: self.0.len(),
            });
        }
        Ok(())
    }

    /// `(f ⋆ g)(x) = Σ_y f(y) g(y⁻¹x)`.
    pub fn convolve(&self, g: &GroupFunction, group: &FiniteGroup) -> Result<Self, GroupError> {
        self.check(group)?;
        g.check(group)?;
        let n = group.order();
        let mut out = vec![Complex64::new(0.0, 0.0); n];
        for y in 0..n {
            for z in 0..n {
                // x = y·z, so g(y⁻¹x) = g(z).
                out[group.mul(y, z)] += self.0[y] * g.0[z];
            }
        }
        Ok(Self(out))
    }

    /// `f*(x) = conj f(x⁻¹)`.
    pub fn involution(&self, group: &FiniteGroup) -> Result<Self, GroupError> {
        self.check(group)?;
        Ok(Self(
            (0..group.order())
                .map(|x| self.0[group.inverse(x)].conj())
                .collect(),
        ))
    }
}

/// `Σ_x f(x) π(x)`.
pub fn induce(rep: &UnitaryRep, f: &GroupFunction) -> Result<ComplexMatrix, GroupError> {
    f.check(&rep.group)?;
    let mut out = ComplexMatrix::zeros(rep.dim, rep.dim);
    for (x, m) in rep.matrices.iter().enumerate() {
        if f.0[x] != Complex64::new(0.0, 0.0) {
            out = out.add(&m.scale(f.0[x]))?;
        }
    }
    Ok(out)
}

/// Matrix of `f ↦ vec(induce(rep, f))`: column `x` is `vec π(x)`.
pub fn induction_matrix(rep: &UnitaryRep) -> ComplexMatrix {
    let columns: Vec<Vec<Complex64>> = rep.matrices.iter().map(ComplexMatrix::vectorize).collect();
    ComplexMatrix::from_columns(rep.dim * rep.dim, &columns).expect("uniform column length")
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PullbackIdeal {
    pub p: PExponent,
    pub kernel_basis: Vec<GroupFunction>,
    pub kernel_dim: usize,
    pub quotient_dim: usize,
    pub note: String,
}

/// Kernel of `π` on `L¹(G)`. In finite dimension every operator is in every
/// Schatten class, so the pullback is the whole algebra and only the kernel
/// and quotient dimension carry information.
pub fn pullback_ideal(rep: &UnitaryRep, p: PExponent) -> PullbackIdeal {
    let map = induction_matrix(rep);
    let echelon = RowEchelon::new(&map, RANK_TOL);
    let kernel_basis: Vec<GroupFunction> = echelon
        .null_space()
        .into_iter()
        .map(GroupFunction::new)
        .collect();
    let kernel_dim = kernel_basis.len();
    PullbackIdeal {
        p,
        kernel_dim,
        quotient_dim: rep.group.order() - kernel_dim,
        kernel_basis,
        note: "finite dimension: the pullback of S_p is all of L1(G)".into(),
    }
}

/// `max_x ‖U π₁(x) − π₂(x) U‖_op`.
pub fn intertwiner_residual(
    u: &ComplexMatrix,
    rep1: &UnitaryRep,
    rep2: &UnitaryRep,
) -> Result<f64, GroupError> {
    if rep1.group != rep2.group {
        return Err(GroupError::DifferentGroups);
    }
    check_shape(u, rep2.dim, rep1.dim)?;
    let mut worst = 0.0f64;
    for (a, b) in rep1.matrices.iter().zip(&rep2.matrices) {
        let diff = u.matmul(a)?.sub(&b.matmul(u)?)?;
        worst = worst.max(operator_norm(&diff)?);
    }
    Ok(worst)
}

pub fn verify_intertwiner(
    u: &ComplexMatrix,
    rep1: &UnitaryRep,
    rep2: &UnitaryRep,
) -> Result<bool, GroupError> {
    Ok(intertwiner_residual(u, rep1, rep2)? <= INTERTWINER_TOL)
}

/// Whether `‖induce(rep₂, f)‖_p = ‖induce(rep₁, f)‖_p` for a unitary
/// intertwiner `U`.
pub fn check_unitary_equiv_invariance(
    rep1: &UnitaryRep,
    rep2: &UnitaryRep,
    u: &ComplexMatrix,
    f: &GroupFunction,
    p: PExponent,
) -> Result<bool, GroupError> {
    let residual = intertwiner_residual(u, rep1, rep2)?;
    if residual > INTERTWINER_TOL {
        return Err(GroupError::NotIntertwiner { residual });
    }
    if !u.is_unitary(REP_TOL) {
        return Err(GroupError::NotUnitary);
    }
    let a = schatten_norm(&induce(rep1, f)?, p)?;
    let b = schatten_norm(&induce(rep2, f)?, p)?;
    Ok(within_relative(a, b, INVARIANCE_TOL))
}

/// Group description in JSON.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum GroupDesc {
    Cyclic { n: usize },
    Dihedral { n: usize },
    Symmetric { k: usize },
    Table { table: Vec<Vec<usize>> },
    Product { factors: Vec<GroupDesc> },
}

impl GroupDesc {
    pub fn build(&self) -> Result<FiniteGroup, GroupError> {
        match self {
            GroupDesc::Cyclic { n } if *n > 0 => Ok(FiniteGroup::cyclic(*n)),
            GroupDesc::Dihedral { n } if *n > 0 => Ok(FiniteGroup::dihedral(*n)),
            GroupDesc::Symmetric { k } if (1..=6).contains(k) => Ok(FiniteGroup::symmetric(*k)),
            GroupDesc::Cyclic { .. } | GroupDesc::Dihedral { .. } => {
                Err(GroupError::Spec("group size must be positive".into()))
            }
            GroupDesc::Symmetric { .. } => Err(GroupError::Spec("symmetric degree must be in 1..=6".into())),
            GroupDesc::Table { table } => FiniteGroup::from_table(table.clone()),
            GroupDesc::Product { factors } => {
                let mut iter = factors.iter();
                let first = iter
                    .next()
                    .ok_or_else(|| GroupError::Spec("product needs at least one factor".into()))?
                    .build()?;
                iter.try_fold(first, |acc, d| Ok(FiniteGroup::direct_product(&acc, &d.build()?)))
            }
        }
    }

    /// Sign character, where the description makes one evident.
    fn sign(&self) -> Result<Vec<Complex64>, GroupError> {
        let real = |v: Vec<f64>| v.into_iter().map(|x| Complex64::new(x, 0.0)).collect();
        match self {
            GroupDesc::Cyclic { n } if n % 2 == 0 => {
                Ok(real((0..*n).map(|k| if k % 2 == 0 { 1.0 } else { -1.0 }).collect()))
            }
            GroupDesc::Dihedral { n } => {
                Ok(real((0..2 * n).map(|x| if x < *n { 1.0 } else { -1.0 }).collect()))
            }
            GroupDesc::Symmetric { k } => {
                let count = (1..=*k).product::<usize>();
                Ok(real((0..count).map(|i| permutation_sign(*k, i)).collect()))
            }
            _ => Err(GroupError::Spec(
                "sign representation needs an even cyclic, dihedral or symmetric group".into(),
            )),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum RepDesc {
    Regular,
    Trivial,
    Sign,
    /// Diagonalized regular representation of a cyclic group.
    Fourier,
    Matrices { matrices: Vec<ComplexMatrix> },
}

/// `{"schema": 1, "group": …, "representation": …, "function": […]}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GroupSpec {
    #[serde(default = "schema_default")]
    pub schema: u32,
    pub group: GroupDesc,
    #[serde(default = "regular_default")]
    pub representation: RepDesc,
    #[serde(default)]
    pub function: Option<Vec<ComplexValue>>,
}

fn schema_default() -> u32 {
    SCHEMA_VERSION
}

fn regular_default() -> RepDesc {
    RepDesc::Regular
}

impl GroupSpec {
    pub fn build(&self) -> Result<(UnitaryRep, Option<GroupFunction>), GroupError> {
        if self.schema != SCHEMA_VERSION {
            return Err(GroupError::Schema(self.schema));
        }
        let group = self.group.build()?;
        let rep = match &self.representation {
            RepDesc::Regular => UnitaryRep::regular(&group),
            RepDesc::Trivial => UnitaryRep::trivial(&group),
            RepDesc::Sign => UnitaryRep::character(&group, &self.group.sign()?)?,
            RepDesc::Fourier => match self.group {
                GroupDesc::Cyclic { n } => UnitaryRep::cyclic_fourier(n),
                _ => {
                    return Err(GroupError::Spec(
                        "fourier representation needs a cyclic group".into(),
                    ))
                }
            },
            RepDesc::Matrices { matrices } => UnitaryRep::new(group, matrices.clone())?,
        };
        let f = self
            .function
            .as_ref()
            .map(|v| GroupFunction::new(v.iter().map(|c| c.0).collect()));
        if let Some(f) = &f {
            f.check(rep.group())?;
        }
        Ok((rep, f))
    }
}
