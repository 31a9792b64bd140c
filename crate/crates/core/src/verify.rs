//! The end-to-end verification suite.
//!
//! Ten criteria, each a pure function of a [`SuiteConfig`]. Random samples
//! come from per-criterion, per-index streams, so reports are byte-identical
//! across runs and across execution modes. Reports carry no timings.

use std::collections::BTreeMap;

use num_complex::Complex64;
use rand::Rng;
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::group::{
    induce, induction_matrix, pullback_ideal, FiniteGroup, UnitaryRep,
};
use crate::linalg::{svd_values, ComplexMatrix};
use crate::measure::{
    check_group_invariance, AtomEntry, DiffusePiece, GroupInvariance, Interval, MeasureSpace,
    SimpleFunction, SCHEMA_VERSION,
};
use crate::multiplication::{
    build_truncation, classify_exact, classify_numeric, diagnose_divergence, trace_power_partial,
    Diagnosis, MembershipVerdict, MultiplicationError, SchedulePoint, TruncationSchedule,
    DEFAULT_MODES,
};
use crate::oracle;
use crate::par::Execution;
use crate::random;
use crate::schatten::{hs_inner, holder_witness, schatten_norm, PExponent};
use crate::system::{
    build_node, default_grid, verify_exactness, verify_fig2, verify_functor_laws, NodeContext,
};

pub const DEFAULT_SEED: u64 = 20240601;

/// Tolerances used by the suite; any of them can be overridden by name.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Tolerances {
    pub lattice_rel: f64,
    pub partial_abs: f64,
    pub slope_abs: f64,
    pub norm_agreement_rel: f64,
    pub inequality: f64,
    pub witness_rel: f64,
    pub svd_rel: f64,
    pub algebra: f64,
    pub functor: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            lattice_rel: 1e-12,
            partial_abs: 1e-12,
            slope_abs: 1e-9,
            norm_agreement_rel: 1e-6,
            inequality: 1e-9,
            witness_rel: 1e-8,
            svd_rel: 1e-10,
            algebra: 1e-9,
            functor: 1e-9,
        }
    }
}

impl Tolerances {
    pub fn names() -> &'static [&'static str] {
        &[
            "lattice_rel",
            "partial_abs",
            "slope_abs",
            "norm_agreement_rel",
            "inequality",
            "witness_rel",
            "svd_rel",
            "algebra",
            "functor",
        ]
    }

    pub fn set(&mut self, name: &str, value: f64) -> Result<(), String> {
        if !(value.is_finite() && value > 0.0) {
            return Err(format!("tolerance {name} must be positive and finite"));
        }
        let slot = match name {
            "lattice_rel" => &mut self.lattice_rel,
            "partial_abs" => &mut self.partial_abs,
            "slope_abs" => &mut self.slope_abs,
            "norm_agreement_rel" => &mut self.norm_agreement_rel,
            "inequality" => &mut self.inequality,
            "witness_rel" => &mut self.witness_rel,
            "svd_rel" => &mut self.svd_rel,
            "algebra" => &mut self.algebra,
            "functor" => &mut self.functor,
            _ => {
                return Err(format!(
                    "unknown tolerance {name}; expected one of {}",
                    Self::names().join(", ")
                ))
            }
        };
        *slot = value;
        Ok(())
    }
}

/// Sample counts per criterion.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Sizes {
    pub lattice_lp: usize,
    pub dichotomy: usize,
    pub invariance: usize,
    pub inequalities: usize,
    pub svd: usize,
    pub algebra_pairs: usize,
    pub functor_pairs: usize,
}

impl Default for Sizes {
    fn default() -> Self {
        Self {
            lattice_lp: 200,
            dichotomy: 500,
            invariance: 200,
            inequalities: 1000,
            svd: 500,
            algebra_pairs: 100,
            functor_pairs: 50,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SuiteConfig {
    pub seed: u64,
    pub exec: Execution,
    pub tolerances: Tolerances,
    pub sizes: Sizes,
}

impl Default for SuiteConfig {
    fn default() -> Self {
        Self {
            seed: DEFAULT_SEED,
            exec: Execution::Parallel,
            tolerances: Tolerances::default(),
            sizes: Sizes::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CriterionResult {
    pub id: u8,
    pub name: String,
    pub passed: bool,
    pub samples: usize,
    pub measured: BTreeMap<String, Value>,
    pub tolerances: BTreeMap<String, f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

impl CriterionResult {
    fn new(id: u8, name: &str) -> Self {
        Self {
            id,
            name: name.into(),
            passed: false,
            samples: 0,
            measured: BTreeMap::new(),
            tolerances: BTreeMap::new(),
            error: None,
        }
    }

    fn measure(&mut self, key: &str, value: impl Into<Value>) {
        self.measured.insert(key.into(), value.into());
    }

    fn tolerance(&mut self, key: &str, value: f64) {
        self.tolerances.insert(key.into(), value);
    }

    fn fail(mut self, err: impl std::fmt::Display) -> Self {
        self.passed = false;
        self.error = Some(err.to_string());
        self
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SelfTest {
    pub engineered_check: String,
    pub failed_checks: Vec<String>,
    /// The engineered check, and only it, failed.
    pub detected: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SuiteReport {
    pub schema: u32,
    pub seed: u64,
    pub tolerances: Tolerances,
    pub sizes: Sizes,
    pub criteria: Vec<CriterionResult>,
    pub self_test: SelfTest,
    pub passed: bool,
}

impl SuiteReport {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }
}

/// `a ≤ b` up to `tol·max(1, |b|)`.
fn le_tol(a: f64, b: f64, tol: f64) -> bool {
    a <= b + tol * b.abs().max(1.0)
}

fn rel_err(a: f64, b: f64) -> f64 {
    let scale = a.abs().max(b.abs());
    if scale == 0.0 {
        0.0
    } else {
        (a - b).abs() / scale
    }
}

fn fmax(values: impl IntoIterator<Item = f64>) -> f64 {
    values.into_iter().fold(0.0, f64::max)
}

/// Criterion 1: Schatten norm of the atoms-only truncation on `{−20..20}`
/// equals the directly summed `ℓ^p` norm.
pub fn lattice_lp(cfg: &SuiteConfig) -> CriterionResult {
    let mut r = CriterionResult::new(1, "lattice truncation norm equals lp norm");
    let tol = cfg.tolerances.lattice_rel;
    r.tolerance("relative", tol);
    let grid = default_grid();
    let space = MeasureSpace::integer_lattice(20);
    let outcome = cfg.exec.map(cfg.sizes.lattice_lp, |i| {
        let mut rng = random::rng_for(cfg.seed, "lattice_lp", i as u64);
        let values: Vec<Complex64> = (0..41).map(|_| random::complex_normal(&mut rng)).collect();
        let f = SimpleFunction::on_atoms(
            space.atoms().iter().zip(&values).map(|(a, v)| (a.label.clone(), *v)),
        );
        let t = build_truncation(&space, &f, &TruncationSchedule::atoms_only())?;
        let mut worst = 0.0f64;
        for &p in &grid {
            let s = schatten_norm(&t.matrix, p)?;
            let l = oracle::lp_norm(&values, p.value());
            worst = worst.max(rel_err(s, l));
        }
        Ok::<f64, MultiplicationError>(worst)
    });
    let errs = match outcome.into_iter().collect::<Result<Vec<_>, _>>() {
        Ok(e) => e,
        Err(e) => return r.fail(e),
    };
    let worst = fmax(errs);
    r.samples = cfg.sizes.lattice_lp * grid.len();
    r.measure("max_relative_error", worst);
    r.passed = worst <= tol;
    r
}

/// Criterion 2: trace partials of `χ_[0,1)` grow as `2M+1`.
pub fn gabor_divergence(cfg: &SuiteConfig) -> CriterionResult {
    let mut r = CriterionResult::new(2, "gabor trace partials diverge linearly");
    r.tolerance("partial_abs", cfg.tolerances.partial_abs);
    r.tolerance("slope_abs", cfg.tolerances.slope_abs);
    let mut run = || -> Result<(), MultiplicationError> {
        let space = MeasureSpace::lebesgue(0.0, 1.0)?;
        let f = SimpleFunction::constant(&space, Complex64::new(1.0, 0.0));
        let integral = space.integrate_abs_power(&f, 1.0)?;
        let partials = DEFAULT_MODES
            .iter()
            .map(|&m| {
                trace_power_partial(&space, &f, 1.0, &TruncationSchedule::full(m))
                    .map(|value| SchedulePoint { size: m as f64, value })
            })
            .collect::<Result<Vec<_>, _>>()?;
        let partial_err = fmax(partials.iter().map(|p| (p.value - (2.0 * p.size + 1.0)).abs()));
        let diagnosis = diagnose_divergence(&partials)?;
        let numeric = classify_numeric(&space, &f, 1.0, &DEFAULT_MODES, cfg.exec)?;
        let slope_err = match diagnosis {
            Diagnosis::Diverges { rate } => (rate - 2.0 * integral).abs(),
            Diagnosis::Converged { .. } => f64::INFINITY,
        };
        r.measure("partials", partials.iter().map(|p| p.value).collect::<Vec<_>>());
        r.measure("max_partial_error", partial_err);
        r.measure("slope_error", if slope_err.is_finite() { json!(slope_err) } else { json!("converged") });
        r.measure("numeric_member", numeric.verdict.is_member());
        r.samples = partials.len();
        r.passed = partial_err <= cfg.tolerances.partial_abs
            && slope_err <= cfg.tolerances.slope_abs
            && !numeric.verdict.is_member();
        Ok(())
    };
    match run() {
        Ok(()) => r,
        Err(e) => r.fail(e),
    }
}

/// Criterion 3: exact classification matches the generator's ground truth,
/// and the numeric route agrees with it without inconclusive runs.
pub fn dichotomy(cfg: &SuiteConfig) -> CriterionResult {
    let mut r = CriterionResult::new(3, "atomic dichotomy, exact vs numeric");
    r.tolerance("norm_agreement_rel", cfg.tolerances.norm_agreement_rel);
    let ps = [1.0, 2.0, 3.0];
    #[derive(Default)]
    struct Tally {
        truth_mismatch: usize,
        disagreements: usize,
        inconclusive: usize,
        members: usize,
        worst_norm_err: f64,
        errors: Vec<String>,
    }
    let tallies = cfg.exec.map(cfg.sizes.dichotomy, |i| {
        let mut t = Tally::default();
        let mut rng = random::rng_for(cfg.seed, "dichotomy", i as u64);
        let space = random::measure_space(&mut rng, 10, 3);
        let generated = random::simple_function(&mut rng, &space);
        let f = &generated.function;
        for &p in &ps {
            let exact = match classify_exact(&space, f, PExponent::Finite(p)) {
                Ok(v) => v,
                Err(e) => {
                    t.errors.push(e.to_string());
                    continue;
                }
            };
            if exact.is_member() == generated.diffuse_support_positive {
                t.truth_mismatch += 1;
            }
            if exact.is_member() {
                t.members += 1;
            }
            match classify_numeric(&space, f, p, &DEFAULT_MODES, Execution::Sequential) {
                Ok(n) => match (n.verdict, exact) {
                    (MembershipVerdict::Member { norm: a }, MembershipVerdict::Member { norm: b }) => {
                        let e = rel_err(a, b);
                        t.worst_norm_err = t.worst_norm_err.max(e);
                        if e > cfg.tolerances.norm_agreement_rel {
                            t.disagreements += 1;
                        }
                    }
                    (a, b) if a == b => {}
                    _ => t.disagreements += 1,
                },
                Err(MultiplicationError::Inconclusive { .. }) => t.inconclusive += 1,
                Err(e) => t.errors.push(e.to_string()),
            }
        }
        t
    });
    let mut total = Tally::default();
    for t in tallies {
        total.truth_mismatch += t.truth_mismatch;
        total.disagreements += t.disagreements;
        total.inconclusive += t.inconclusive;
        total.members += t.members;
        total.worst_norm_err = total.worst_norm_err.max(t.worst_norm_err);
        total.errors.extend(t.errors);
    }
    r.samples = cfg.sizes.dichotomy * ps.len();
    r.measure("truth_mismatches", total.truth_mismatch);
    r.measure("disagreements", total.disagreements);
    r.measure("inconclusive", total.inconclusive);
    r.measure("member_runs", total.members);
    r.measure("max_norm_relative_error", total.worst_norm_err);
    if let Some(e) = total.errors.first() {
        return r.fail(e);
    }
    r.passed = total.truth_mismatch == 0 && total.disagreements == 0 && total.inconclusive == 0;
    r
}

/// Translation invariance by brute force over the Cayley table.
fn invariant_by_table(group: &FiniteGroup, masses: &[f64]) -> bool {
    let n = group.order();
    (0..n).all(|g| (0..n).all(|x| masses[group.mul(g, x)] == masses[x]))
}

/// Criterion 4: invariant singleton masses are exactly the scaled counting
/// measures.
pub fn invariance(cfg: &SuiteConfig) -> CriterionResult {
    let mut r = CriterionResult::new(4, "invariant atomic measures are counting measures");
    let outcomes = cfg.exec.map(cfg.sizes.invariance, |i| {
        let mut rng = random::rng_for(cfg.seed, "invariance", i as u64);
        let group = random::finite_group(&mut rng, 24);
        let n = group.order();
        let c = rng.random_range(0.1..5.0);
        let mut masses = vec![c; n];
        if rng.random_bool(0.5) {
            let k = rng.random_range(0..n);
            masses[k] = c * rng.random_range(1.01..2.0);
            if n > 1 && rng.random_bool(0.5) {
                for m in masses.iter_mut() {
                    *m = rng.random_range(0.1..5.0);
                }
            }
        }
        let expected = invariant_by_table(&group, &masses);
        match check_group_invariance(n, &masses) {
            Ok(GroupInvariance::InvariantCounting { scale }) => Ok((expected, expected && scale == masses[0])),
            Ok(GroupInvariance::NotInvariant) => Ok((expected, !expected)),
            Err(e) => Err(e),
        }
    });
    let outcomes = match outcomes.into_iter().collect::<Result<Vec<_>, _>>() {
        Ok(o) => o,
        Err(e) => return r.fail(e),
    };
    let invariant = outcomes.iter().filter(|o| o.0).count();
    let wrong = outcomes.iter().filter(|o| !o.1).count();
    r.samples = outcomes.len();
    r.measure("invariant_models", invariant);
    r.measure("mismatches", wrong);
    r.passed = wrong == 0;
    r
}

/// Criterion 5: monotonicity in `p`, triangle, Hölder, ideal bound and dual
/// witnesses.
pub fn inequalities(cfg: &SuiteConfig) -> CriterionResult {
    let mut r = CriterionResult::new(5, "schatten norm inequalities and duality");
    let tol = cfg.tolerances.inequality;
    let wtol = cfg.tolerances.witness_rel;
    r.tolerance("inequality", tol);
    r.tolerance("witness_rel", wtol);
    let grid = default_grid();
    let outcomes = cfg.exec.map(cfg.sizes.inequalities, |i| {
        let mut rng = random::rng_for(cfg.seed, "inequalities", i as u64);
        let (m, n) = (rng.random_range(1..=8), rng.random_range(1..=8));
        let a = random::matrix(&mut rng, m, n);
        let b = random::matrix(&mut rng, m, n);
        let (xr, yc) = (rng.random_range(1..=8), rng.random_range(1..=8));
        let x = random::matrix(&mut rng, xr, m);
        let y = random::matrix(&mut rng, n, yc);
        let mut fails = [0usize; 5];
        let mut witness_err = 0.0f64;
        let norms = |t: &ComplexMatrix| -> Result<Vec<f64>, crate::SchattenError> {
            let s = svd_values(t)?;
            Ok(grid.iter().map(|&p| crate::schatten::norm_of_values(s.values(), p)).collect())
        };
        let na = norms(&a)?;
        let nb = norms(&b)?;
        let nsum = norms(&a.add(&b)?)?;
        let xop = crate::linalg::operator_norm(&x)?;
        let yop = crate::linalg::operator_norm(&y)?;
        let nxay = norms(&x.matmul(&a)?.matmul(&y)?)?;
        let pairing = hs_inner(&a, &b)?.norm();
        for k in 0..grid.len() {
            for l in k..grid.len() {
                if !le_tol(na[l], na[k], tol) {
                    fails[0] += 1;
                }
            }
            if !le_tol(nsum[k], na[k] + nb[k], tol) {
                fails[1] += 1;
            }
            let dual = grid[k].dual();
            let nb_dual = schatten_norm(&b, dual)?;
            if !le_tol(pairing, na[k] * nb_dual, tol) {
                fails[2] += 1;
            }
            if !le_tol(nxay[k], xop * na[k] * yop, tol) {
                fails[3] += 1;
            }
        }
        for p in [1.5, 2.0, 3.0] {
            let p = PExponent::Finite(p);
            let w = holder_witness(&a, p)?;
            let attained = oracle::hs_inner(&a, &w.witness).norm();
            let wq = schatten_norm(&w.witness, w.dual)?;
            let target = schatten_norm(&a, p)?;
            let e = rel_err(attained, target).max((wq - 1.0).abs());
            witness_err = witness_err.max(e);
            if e > wtol {
                fails[4] += 1;
            }
        }
        Ok::<_, crate::SchattenError>((fails, witness_err))
    });
    let outcomes = match outcomes.into_iter().collect::<Result<Vec<_>, _>>() {
        Ok(o) => o,
        Err(e) => return r.fail(e),
    };
    let mut fails = [0usize; 5];
    for (f, _) in &outcomes {
        for k in 0..5 {
            fails[k] += f[k];
        }
    }
    r.samples = outcomes.len();
    r.measure("monotonicity_failures", fails[0]);
    r.measure("triangle_failures", fails[1]);
    r.measure("holder_failures", fails[2]);
    r.measure("ideal_bound_failures", fails[3]);
    r.measure("witness_failures", fails[4]);
    r.measure("max_witness_relative_error", fmax(outcomes.iter().map(|o| o.1)));
    r.passed = fails.iter().all(|&f| f == 0);
    r
}

/// Criterion 6: Jacobi singular values against characteristic-polynomial
/// eigenvalues of the Gram matrix, and unitary invariance.
pub fn svd_correctness(cfg: &SuiteConfig) -> CriterionResult {
    let mut r = CriterionResult::new(6, "svd against characteristic polynomial oracle");
    let tol = cfg.tolerances.svd_rel;
    r.tolerance("relative_to_largest", tol);
    let outcomes = cfg.exec.map(cfg.sizes.svd, |i| {
        let mut rng = random::rng_for(cfg.seed, "svd", i as u64);
        let (m, n) = (rng.random_range(1..=6), rng.random_range(1..=6));
        let a = random::matrix(&mut rng, m, n);
        let s = svd_values(&a)?;
        let squares: Vec<f64> = s.values().iter().map(|x| x * x).collect();
        let oracle_values = oracle::squared_singular_values(&a);
        let top = squares[0].max(oracle_values[0]);
        let oracle_err = squares
            .iter()
            .zip(&oracle_values)
            .map(|(x, y)| (x - y).abs() / top)
            .fold(0.0, f64::max);
        let u = random::unitary(&mut rng, m);
        let v = random::unitary(&mut rng, n);
        let rotated = svd_values(&u.matmul(&a)?.matmul(&v)?)?;
        let invariance_err = s
            .values()
            .iter()
            .zip(rotated.values())
            .map(|(x, y)| (x - y).abs() / s.largest())
            .fold(0.0, f64::max);
        Ok::<_, crate::LinalgError>((oracle_err, invariance_err))
    });
    let outcomes = match outcomes.into_iter().collect::<Result<Vec<_>, _>>() {
        Ok(o) => o,
        Err(e) => return r.fail(e),
    };
    let oracle_err = fmax(outcomes.iter().map(|o| o.0));
    let inv_err = fmax(outcomes.iter().map(|o| o.1));
    r.samples = outcomes.len();
    r.measure("max_oracle_error", oracle_err);
    r.measure("max_invariance_error", inv_err);
    r.passed = oracle_err <= tol && inv_err <= tol;
    r
}

fn algebra_groups() -> Vec<(String, FiniteGroup)> {
    let mut out: Vec<(String, FiniteGroup)> =
        (1..=8).map(|n| (format!("Z/{n}"), FiniteGroup::cyclic(n))).collect();
    out.push(("S3".into(), FiniteGroup::symmetric(3)));
    out.push(("D4".into(), FiniteGroup::dihedral(4)));
    out
}

/// Representations whose kernels are checked on each algebra group.
fn kernel_reps(group: &FiniteGroup) -> Vec<UnitaryRep> {
    let reg = UnitaryRep::regular(group);
    let triv = UnitaryRep::trivial(group);
    let sum = triv.direct_sum(&triv).expect("same group");
    vec![reg, triv, sum]
}

/// Rank by counting singular values above `1e-10·s_1`.
fn svd_rank(a: &ComplexMatrix) -> Result<usize, crate::LinalgError> {
    let s = svd_values(a)?;
    let top = s.largest();
    Ok(s.values().iter().filter(|&&x| x > 1e-10 * top).count())
}

/// Criterion 7: `induce` is a *-homomorphism of the group algebra and kernel
/// dimensions obey rank–nullity.
pub fn algebra_map(cfg: &SuiteConfig) -> CriterionResult {
    let mut r = CriterionResult::new(7, "induced representation is a *-algebra map");
    let tol = cfg.tolerances.algebra;
    r.tolerance("absolute", tol);
    let groups = algebra_groups();
    let outcomes = cfg.exec.map_slice(&groups, |(name, g)| {
        let rep = UnitaryRep::regular(g);
        let n = g.order();
        let mut conv_err = 0.0f64;
        let mut inv_err = 0.0f64;
        for i in 0..cfg.sizes.algebra_pairs {
            let mut rng = random::rng_for(cfg.seed, &format!("algebra-{name}"), i as u64);
            let f = random::group_function(&mut rng, n);
            let h = random::group_function(&mut rng, n);
            let lhs = induce(&rep, &f.convolve(&h, g)?)?;
            let rhs = induce(&rep, &f)?.matmul(&induce(&rep, &h)?)?;
            conv_err = conv_err.max(lhs.sub(&rhs)?.max_abs());
            let star = induce(&rep, &f.involution(g)?)?;
            inv_err = inv_err.max(star.sub(&induce(&rep, &f)?.adjoint())?.max_abs());
        }
        let mut kernel_mismatch = 0usize;
        for rep in kernel_reps(g) {
            let ideal = pullback_ideal(&rep, PExponent::ONE);
            let oracle_rank = svd_rank(&induction_matrix(&rep))?;
            if ideal.kernel_dim + ideal.quotient_dim != n || ideal.quotient_dim != oracle_rank {
                kernel_mismatch += 1;
            }
            for k in &ideal.kernel_basis {
                if induce(&rep, k)?.max_abs() > tol {
                    kernel_mismatch += 1;
                }
            }
        }
        Ok::<_, crate::group::GroupError>((conv_err, inv_err, kernel_mismatch))
    });
    let outcomes = match outcomes.into_iter().collect::<Result<Vec<_>, _>>() {
        Ok(o) => o,
        Err(e) => return r.fail(e),
    };
    let conv = fmax(outcomes.iter().map(|o| o.0));
    let inv = fmax(outcomes.iter().map(|o| o.1));
    let kernel: usize = outcomes.iter().map(|o| o.2).sum();
    r.samples = groups.len() * cfg.sizes.algebra_pairs;
    r.measure("groups", groups.iter().map(|g| g.0.clone()).collect::<Vec<_>>());
    r.measure("max_convolution_error", conv);
    r.measure("max_involution_error", inv);
    r.measure("kernel_mismatches", kernel);
    r.passed = conv <= tol && inv <= tol && kernel == 0;
    r
}

/// Mixed context for criterion 8: three atoms and two diffuse pieces, one of
/// them not aligned to integers.
pub fn mixed_context() -> NodeContext {
    let space = MeasureSpace::new(
        vec![
            AtomEntry { label: "a".into(), mass: 1.0 },
            AtomEntry { label: "b".into(), mass: 0.5 },
            AtomEntry { label: "c".into(), mass: 2.0 },
        ],
        vec![
            DiffusePiece::uniform(Interval::new(0.0, 1.0), 1.0),
            DiffusePiece::uniform(Interval::new(1.25, 2.5), 0.5),
        ],
    )
    .expect("valid space");
    NodeContext::Measure {
        space,
        schedule: TruncationSchedule::full(1),
    }
}

/// Criterion 8: commuting blocks, exact columns, coherent directed systems.
pub fn directed_grid(cfg: &SuiteConfig) -> CriterionResult {
    let mut r = CriterionResult::new(8, "directed system of exact sequences commutes");
    let grid = default_grid();
    let contexts = [
        ("atoms+diffuse", mixed_context()),
        (
            "Z/4 regular",
            NodeContext::Group {
                rep: UnitaryRep::regular(&FiniteGroup::cyclic(4)),
            },
        ),
    ];
    let mut passed = true;
    for (name, ctx) in &contexts {
        match verify_fig2(ctx, &grid, cfg.seed, cfg.exec) {
            Ok(rep) => {
                passed &= rep.passes;
                r.measure(
                    name,
                    json!({
                        "columns": rep.columns.iter().map(|c| c.label.clone()).collect::<Vec<_>>(),
                        "all_commute": rep.all_commute,
                        "all_exact": rep.all_exact,
                        "coherent": rep.coherent,
                        "coherence_checks": rep.coherence.len(),
                        "max_block_residual": fmax(rep.blocks.iter().map(|b| b.left_square_residual.max(b.right_square_residual))),
                    }),
                );
            }
            Err(e) => return r.fail(e),
        }
    }
    r.samples = contexts.len();
    r.passed = passed;
    r
}

/// A random representation of dimension at most 6.
fn random_rep<R: Rng + ?Sized>(rng: &mut R) -> UnitaryRep {
    match rng.random_range(0..4) {
        0 => UnitaryRep::regular(&FiniteGroup::cyclic(rng.random_range(1..=6))),
        1 => UnitaryRep::regular(&FiniteGroup::symmetric(3)),
        2 => UnitaryRep::regular(&FiniteGroup::dihedral(rng.random_range(1..=3))),
        _ => {
            let n = rng.random_range(1..=5);
            UnitaryRep::cyclic_fourier(n)
                .direct_sum(&UnitaryRep::trivial(&FiniteGroup::cyclic(n)))
                .expect("same group")
        }
    }
}

/// Criterion 9: identity and composition laws for maps induced by unitary
/// intertwiners, and Schatten norm preservation.
pub fn functor_laws(cfg: &SuiteConfig) -> CriterionResult {
    let mut r = CriterionResult::new(9, "unitary intertwiners induce a functor");
    let tol = cfg.tolerances.functor;
    r.tolerance("functor", tol);
    let grid = default_grid();
    let outcomes = cfg.exec.map(cfg.sizes.functor_pairs, |i| {
        let mut rng = random::rng_for(cfg.seed, "functor", i as u64);
        let rep = random_rep(&mut rng);
        let v = random::unitary(&mut rng, rep.dim());
        let w = random::unitary(&mut rng, rep.dim());
        verify_functor_laws(&rep, &v, &w, &grid, 2, cfg.seed ^ i as u64)
    });
    let reports = match outcomes.into_iter().collect::<Result<Vec<_>, _>>() {
        Ok(o) => o,
        Err(e) => return r.fail(e),
    };
    let id = fmax(reports.iter().map(|x| x.identity_residual));
    let comp = fmax(reports.iter().map(|x| x.composition_residual));
    let norm = fmax(reports.iter().map(|x| x.norm_preservation_error));
    r.samples = reports.len();
    r.measure("intertwiner_pairs", reports.len());
    r.measure("operators_sampled", 2 * reports.len());
    r.measure("max_identity_residual", id);
    r.measure("max_composition_residual", comp);
    r.measure("max_norm_preservation_error", norm);
    r.passed = id <= tol && comp <= tol && norm <= tol;
    r
}

/// Criteria 1–9, run concurrently and merged in order.
pub fn run_criteria(cfg: &SuiteConfig) -> Vec<CriterionResult> {
    let suites: [fn(&SuiteConfig) -> CriterionResult; 9] = [
        lattice_lp,
        gabor_divergence,
        dichotomy,
        invariance,
        inequalities,
        svd_correctness,
        algebra_map,
        directed_grid,
        functor_laws,
    ];
    cfg.exec.map_slice(&suites, |f| f(cfg))
}

/// Zeroes one image column of a known-good node and reports which exactness
/// checks fail.
pub fn corrupted_node_self_test() -> SelfTest {
    let ctx = NodeContext::Measure {
        space: MeasureSpace::from_atoms([("a", 1.0), ("b", 1.0), ("c", 1.0)]).expect("valid"),
        schedule: TruncationSchedule::atoms_only(),
    };
    let mut failed = Vec::new();
    if let Ok(node) = build_node(&ctx, PExponent::ONE) {
        if let Ok(rep) = verify_exactness(&node.with_zeroed_image_column(0)) {
            for (name, ok) in [
                ("injective", rep.injective),
                ("rank_nullity", rep.rank_nullity),
                ("image_is_kernel", rep.image_is_kernel),
            ] {
                if !ok {
                    failed.push(name.to_string());
                }
            }
        }
    }
    SelfTest {
        engineered_check: "injective".into(),
        detected: failed == ["injective"],
        failed_checks: failed,
    }
}

fn criteria_bytes(criteria: &[CriterionResult]) -> String {
    serde_json::to_string(criteria).expect("criteria serialize")
}

/// Criterion 10: a second run in the other execution mode serializes to the
/// same bytes.
pub fn determinism(cfg: &SuiteConfig, first: &[CriterionResult]) -> CriterionResult {
    let mut r = CriterionResult::new(10, "reports are byte-identical across runs");
    let other = SuiteConfig {
        exec: match cfg.exec {
            Execution::Parallel => Execution::Sequential,
            Execution::Sequential => Execution::Parallel,
        },
        ..*cfg
    };
    let second = run_criteria(&other);
    let (a, b) = (criteria_bytes(first), criteria_bytes(&second));
    r.samples = 2;
    r.measure("report_bytes", a.len());
    r.measure("identical", a == b);
    r.passed = a == b;
    r
}

pub fn run_suite(cfg: &SuiteConfig) -> SuiteReport {
    let mut criteria = run_criteria(cfg);
    let det = determinism(cfg, &criteria);
    criteria.push(det);
    let self_test = corrupted_node_self_test();
    let passed = criteria.iter().all(|c| c.passed) && self_test.detected;
    SuiteReport {
        schema: SCHEMA_VERSION,
        seed: cfg.seed,
        tolerances: cfg.tolerances,
        sizes: cfg.sizes,
        criteria,
        self_test,
        passed,
    }
}
