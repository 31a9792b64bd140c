use proptest::prelude::*;
use schatten_core::linalg::operator_norm;
use schatten_core::measure::{DiffusePiece, Interval, ValueSegment};
use schatten_core::multiplication::{
    build_truncation, classify_exact, classify_numeric, trace_power_partial, verify_lemma1,
    AtomSelection, BasisLabel, CellSelection, MultiplicationError, TruncationSchedule,
    DEFAULT_MODES,
};
use schatten_core::schatten::{norm_of_values, schatten_norm};
use schatten_core::{oracle, random, Complex64, Execution, MeasureSpace, PExponent, SimpleFunction};

/// Unit-density pieces covering whole integer cells, with a function that is
/// constant on each cell. There the truncation is exact.
fn cellwise(seed: u64) -> (MeasureSpace, SimpleFunction, SimpleFunction) {
    let mut rng = random::rng_for(seed, "cellwise", 0);
    let space = random::measure_space(&mut rng, 4, 0);
    let first = (seed % 7) as i64 - 3;
    let cells = 1 + (seed % 3) as i64;
    let piece = DiffusePiece::uniform(Interval::new(first as f64, (first + cells) as f64), 1.0);
    let space = MeasureSpace::new(space.atoms().to_vec(), vec![piece]).unwrap();
    let make = |rng: &mut rand_chacha::ChaCha8Rng| {
        let mut f = SimpleFunction::zero();
        for a in space.atoms() {
            f = f.with_atom(&a.label, random::complex_normal(rng));
        }
        let segs = (0..cells)
            .map(|k| ValueSegment {
                sub: Interval::new((first + k) as f64, (first + k + 1) as f64),
                value: random::complex_normal(rng),
            })
            .collect();
        f.with_piece(&space, 0, segs)
    };
    let f = make(&mut rng);
    let g = make(&mut rng);
    (space, f, g)
}

fn sample(seed: u64) -> (MeasureSpace, SimpleFunction, bool) {
    let mut rng = random::rng_for(seed, "prop-mult", 0);
    let space = random::measure_space(&mut rng, 6, 3);
    let g = random::simple_function(&mut rng, &space);
    (space, g.function, g.diffuse_support_positive)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(96))]

    #[test]
    fn product_and_adjoint_on_cellwise_functions(seed in any::<u64>(), m in 0u32..4) {
        let (space, f, g) = cellwise(seed);
        let sched = TruncationSchedule::full(m);
        let tf = build_truncation(&space, &f, &sched).unwrap().matrix;
        let tg = build_truncation(&space, &g, &sched).unwrap().matrix;
        let tfg = build_truncation(&space, &f.product(&g, &space).unwrap(), &sched).unwrap().matrix;
        prop_assert!(tfg.exactly_equals(&tf.matmul(&tg).unwrap()));
        let tconj = build_truncation(&space, &f.conj(), &sched).unwrap().matrix;
        prop_assert!(tconj.exactly_equals(&tf.adjoint()));
    }

    #[test]
    fn conjugate_is_adjoint_in_general(seed in any::<u64>(), m in 0u32..5) {
        let (space, f, _) = sample(seed);
        let sched = TruncationSchedule::full(m);
        let t = build_truncation(&space, &f, &sched).unwrap().matrix;
        let tc = build_truncation(&space, &f.conj(), &sched).unwrap().matrix;
        prop_assert!(tc.exactly_equals(&t.adjoint()));
    }

    #[test]
    fn block_structure(seed in any::<u64>(), m in 0u32..4) {
        let (space, f, _) = sample(seed);
        let t = build_truncation(&space, &f, &TruncationSchedule::full(m)).unwrap();
        prop_assert_eq!(t.matrix.rows(), t.labels.len());
        for (i, a) in t.labels.iter().enumerate() {
            for (j, b) in t.labels.iter().enumerate() {
                let zero = match (a, b) {
                    (BasisLabel::Atom(x), BasisLabel::Atom(y)) => x != y,
                    (BasisLabel::Gabor { n, .. }, BasisLabel::Gabor { n: k, .. }) => n != k,
                    _ => true,
                };
                if zero {
                    prop_assert_eq!(t.matrix[(i, j)], Complex64::new(0.0, 0.0));
                }
            }
        }
    }

    #[test]
    fn compression_is_contractive_for_unit_density(seed in any::<u64>(), m in 0u32..6) {
        let (space, f, _) = cellwise(seed);
        let t = build_truncation(&space, &f, &TruncationSchedule::full(m)).unwrap();
        let sup = f.ess_sup(&space).unwrap();
        prop_assert!(operator_norm(&t.matrix).unwrap() <= sup + 1e-9);
        let (space, f, _) = sample(seed);
        let dmax = space.diffuse().iter().map(|d| d.max_density()).fold(1.0, f64::max);
        let t = build_truncation(&space, &f, &TruncationSchedule::full(m)).unwrap();
        prop_assert!(operator_norm(&t.matrix).unwrap() <= f.ess_sup(&space).unwrap() * dmax + 1e-9);
    }

    #[test]
    fn diagonal_of_power_matches_partial(seed in any::<u64>(), m in 0u32..4, p in 1.0f64..3.0) {
        let (space, f, _) = sample(seed);
        let sched = TruncationSchedule::full(m);
        let t = build_truncation(&space, &f.abs_pow(p), &sched).unwrap().matrix;
        let trace = t.trace().unwrap();
        let partial = trace_power_partial(&space, &f, p, &sched).unwrap();
        prop_assert!((trace.re - partial).abs() <= 1e-10 * (1.0 + partial));
        prop_assert!(trace.im.abs() <= 1e-10 * (1.0 + partial));
    }

    #[test]
    fn partials_are_monotone(seed in any::<u64>(), p in 1.0f64..4.0) {
        let (space, f, _) = sample(seed);
        let by_modes: Vec<f64> = (0..6)
            .map(|m| trace_power_partial(&space, &f, p, &TruncationSchedule::full(m)).unwrap())
            .collect();
        prop_assert!(by_modes.windows(2).all(|w| w[0] <= w[1]));
        let by_atoms: Vec<f64> = (0..=space.atoms().len())
            .map(|k| {
                let s = TruncationSchedule { include_atoms: AtomSelection::Count(k), cells: CellSelection::Covering, gabor_m_max: 2 };
                trace_power_partial(&space, &f, p, &s).unwrap()
            })
            .collect();
        prop_assert!(by_atoms.windows(2).all(|w| w[0] <= w[1]));
    }

    #[test]
    fn numeric_agrees_with_exact(seed in any::<u64>(), p in prop_oneof![Just(1.0), 1.0f64..4.0]) {
        let (space, f, positive) = sample(seed);
        let exact = classify_exact(&space, &f, PExponent::Finite(p)).unwrap();
        prop_assert_eq!(exact.is_member(), !positive);
        match classify_numeric(&space, &f, p, &DEFAULT_MODES, Execution::Sequential) {
            Ok(n) => prop_assert!(n.verdict.agrees_with(&exact), "{:?} vs {:?}", n.verdict, exact),
            Err(MultiplicationError::Inconclusive { .. }) => {}
            Err(e) => return Err(TestCaseError::fail(e.to_string())),
        }
    }

    #[test]
    fn atoms_only_norm_is_lp(seed in any::<u64>(), p in 1.0f64..5.0) {
        let (space, f, _) = sample(seed);
        let t = build_truncation(&space, &f, &TruncationSchedule::atoms_only()).unwrap();
        let values: Vec<Complex64> = space.atoms().iter().map(|a| f.atom_value(&a.label)).collect();
        let s = schatten_norm(&t.matrix, PExponent::Finite(p)).unwrap();
        let l = oracle::lp_norm(&values, p);
        prop_assert!((s - l).abs() <= 1e-12 * l.max(1e-300));
        let moduli: Vec<f64> = values.iter().map(|z| z.norm()).collect();
        prop_assert!((norm_of_values(&moduli, PExponent::Finite(p)) - l).abs() <= 1e-12 * l.max(1e-300));
    }

    #[test]
    fn lattice_norms_random_sequences(seed in any::<u64>()) {
        let mut rng = random::rng_for(seed, "prop-lattice", 0);
        let values: Vec<Complex64> = (0..41).map(|_| random::complex_normal(&mut rng)).collect();
        for p in [PExponent::ONE, PExponent::Finite(1.5), PExponent::TWO, PExponent::Infinity] {
            prop_assert!(verify_lemma1(&values, p).unwrap().passes);
        }
    }
}

#[test]
fn epsilon_indicator_divergence_scale() {
    // The numeric route still separates ε·χ from 0 at ε = 1e-8.
    let space = MeasureSpace::lebesgue(0.0, 1.0).unwrap();
    for eps in [1.0, 1e-4, 1e-8] {
        let f = SimpleFunction::constant(&space, Complex64::new(eps, 0.0));
        let n = classify_numeric(&space, &f, 1.0, &DEFAULT_MODES, Execution::Parallel).unwrap();
        assert!(!n.verdict.is_member(), "eps = {eps}");
    }
}

#[test]
fn explicit_cell_outside_support_is_rejected() {
    let space = MeasureSpace::lebesgue(0.0, 1.0).unwrap();
    let sched = TruncationSchedule {
        include_atoms: AtomSelection::All,
        cells: CellSelection::Cells(vec![3]),
        gabor_m_max: 1,
    };
    assert!(matches!(
        build_truncation(&space, &SimpleFunction::zero(), &sched),
        Err(MultiplicationError::Schedule(_))
    ));
}
