//! Worked examples across modules, each checked against a closed form or an
//! independent oracle.

use proptest::prelude::*;
use schatten_core::group::{induce, pullback_ideal, verify_intertwiner, FiniteGroup, GroupFunction, UnitaryRep};
use schatten_core::linalg::{operator_norm, svd_values};
use schatten_core::measure::{
    check_group_invariance, AtomEntry, DensitySegment, DiffusePiece, GroupInvariance, Interval,
    ValueSegment,
};
use schatten_core::schatten::{containment_map, hs_inner, holder_witness, schatten_norm};
use schatten_core::system::{build_node, verify_exactness, verify_fig2, NodeContext};
use schatten_core::{oracle, random, Complex64, ComplexMatrix, Execution, MeasureSpace, PExponent, SimpleFunction};

fn c(re: f64) -> Complex64 {
    Complex64::new(re, 0.0)
}

#[test]
fn integrals() {
    let space = MeasureSpace::from_atoms([("x", 2.0)]).unwrap();
    let f = SimpleFunction::on_atoms([("x", c(3.0))]);
    assert_eq!(space.integrate_abs_power(&f, 2.0).unwrap(), 18.0);

    let unit = MeasureSpace::lebesgue(0.0, 1.0).unwrap();
    assert_eq!(unit.integrate_abs_power(&SimpleFunction::constant(&unit, c(1.0)), 5.0).unwrap(), 1.0);

    let two = MeasureSpace::lebesgue(0.0, 2.0).unwrap();
    let step = SimpleFunction::zero().with_piece(
        &two,
        0,
        vec![
            ValueSegment { sub: Interval::new(0.0, 1.0), value: c(4.0) },
            ValueSegment { sub: Interval::new(1.0, 2.0), value: c(0.0) },
        ],
    );
    let exact = two.integrate_abs_power(&step, 1.0).unwrap();
    let quad = oracle::midpoint(|x| c(if x < 1.0 { 4.0 } else { 0.0 }), 0.0, 2.0, 10_000);
    assert_eq!(exact, 4.0);
    assert!((c(exact) - quad).norm() < 1e-9);
}

#[test]
fn decomposition_and_atomlessness() {
    let atoms = MeasureSpace::from_atoms([("a", 1.0)]).unwrap();
    let d = atoms.decompose();
    assert_eq!(d.atoms, vec!["a".to_string()]);
    assert!(d.diffuse.is_empty());

    let null_piece = MeasureSpace::new(
        vec![AtomEntry { label: "a".into(), mass: 1.0 }],
        vec![DiffusePiece::uniform(Interval::new(0.0, 1.0), 0.0)],
    )
    .unwrap();
    assert!(null_piece.decompose().diffuse.is_empty());
    let ind = SimpleFunction::constant(&null_piece, c(1.0)).with_atom("a", c(0.0));
    assert_eq!(null_piece.integrate_abs_power(&ind, 1.0).unwrap(), 0.0);

    assert!(MeasureSpace::lebesgue(0.0, 1.0).unwrap().is_atomless());
    assert!(!MeasureSpace::integer_lattice(5).is_atomless());
    assert!(MeasureSpace::empty().is_atomless());
}

#[test]
fn invariance_examples() {
    assert_eq!(
        check_group_invariance(3, &[2.0, 2.0, 2.0]).unwrap(),
        GroupInvariance::InvariantCounting { scale: 2.0 }
    );
    assert_eq!(check_group_invariance(3, &[1.0, 2.0, 1.0]).unwrap(), GroupInvariance::NotInvariant);
    assert!(check_group_invariance(0, &[]).is_err());
}

#[test]
fn linalg_examples() {
    let i = Complex64::i();
    let a = ComplexMatrix::from_rows(&[vec![c(0.0), i], vec![c(0.0), c(0.0)]]).unwrap();
    let expect = ComplexMatrix::from_rows(&[vec![c(0.0), c(0.0)], vec![-i, c(0.0)]]).unwrap();
    assert!(a.adjoint().exactly_equals(&expect));

    assert_eq!(svd_values(&ComplexMatrix::identity(3)).unwrap().values(), &[1.0, 1.0, 1.0]);
    assert_eq!(svd_values(&ComplexMatrix::from_real_diag(&[3.0, -4.0])).unwrap().values(), &[4.0, 3.0]);
    let nil = ComplexMatrix::from_real_rows(&[vec![0.0, 2.0], vec![0.0, 0.0]]).unwrap();
    assert_eq!(svd_values(&nil).unwrap().values(), &[2.0, 0.0]);
    assert_eq!(nil.trace().unwrap(), c(0.0));
    assert_eq!(operator_norm(&ComplexMatrix::from_real_diag(&[1.0, 5.0, 2.0])).unwrap(), 5.0);
}

#[test]
fn schatten_examples() {
    let n = 5;
    for p in [1.0, 2.0, 3.5] {
        let v = schatten_norm(&ComplexMatrix::identity(n), PExponent::Finite(p)).unwrap();
        assert!((v - (n as f64).powf(1.0 / p)).abs() < 1e-14);
    }
    let d = ComplexMatrix::from_real_diag(&[1.0, 0.5, 0.25, 0.125]);
    assert_eq!(schatten_norm(&d, PExponent::ONE).unwrap(), 1.875);

    let a = ComplexMatrix::from_real_diag(&[1.0, 2.0]);
    assert_eq!(hs_inner(&a, &a).unwrap(), c(5.0));
    let e11 = ComplexMatrix::from_real_diag(&[1.0, 0.0]);
    let e22 = ComplexMatrix::from_real_diag(&[0.0, 1.0]);
    assert_eq!(hs_inner(&e11, &e22).unwrap(), c(0.0));

    let w = holder_witness(&ComplexMatrix::from_real_diag(&[2.0, 1.0]), PExponent::TWO).unwrap();
    assert!((w.attained - 5f64.sqrt()).abs() < 1e-12);

    let cert = containment_map(&ComplexMatrix::identity(4), PExponent::ONE, PExponent::TWO).unwrap();
    assert!((cert.source.norm - 4.0).abs() < 1e-14 && (cert.target.norm - 2.0).abs() < 1e-14);
}

#[test]
fn group_examples() {
    let z2 = FiniteGroup::cyclic(2);
    let reg = UnitaryRep::regular(&z2);
    let (a, b) = (c(1.5), c(-0.25));
    let m = induce(&reg, &GroupFunction::new(vec![a, b])).unwrap();
    let expect = ComplexMatrix::from_rows(&[vec![a, b], vec![b, a]]).unwrap();
    assert!(m.exactly_equals(&expect));
    let s = svd_values(&m).unwrap();
    assert!((s.values()[0] - 1.75).abs() < 1e-14 && (s.values()[1] - 1.25).abs() < 1e-14);

    let triv = UnitaryRep::trivial(&z2);
    let ideal = pullback_ideal(&triv, PExponent::ONE);
    assert_eq!((ideal.kernel_dim, ideal.quotient_dim), (1, 1));
    let k = ideal.kernel_basis[0].values();
    assert!((k[0] + k[1]).norm() < 1e-14);

    let sign = UnitaryRep::character(&z2, &[c(1.0), c(-1.0)]).unwrap();
    assert_eq!(pullback_ideal(&triv.direct_sum(&sign).unwrap(), PExponent::ONE).kernel_dim, 0);
    assert!(verify_intertwiner(reg.matrix(1), &reg, &reg).unwrap());
    assert!(!verify_intertwiner(&ComplexMatrix::identity(1), &triv, &sign).unwrap());
}

#[test]
fn node_examples() {
    let atoms = NodeContext::Measure {
        space: MeasureSpace::from_atoms([("a", 1.0), ("b", 1.0)]).unwrap(),
        schedule: schatten_core::multiplication::TruncationSchedule::atoms_only(),
    };
    let node = build_node(&atoms, PExponent::ONE).unwrap();
    assert_eq!((node.left_dim(), node.mid_dim(), node.quotient_dim), (2, 4, 2));
    assert!(verify_exactness(&node).unwrap().passes);

    let triv = NodeContext::Group { rep: UnitaryRep::trivial(&FiniteGroup::cyclic(2)) };
    let node = build_node(&triv, PExponent::Finite(3.0)).unwrap();
    assert_eq!((node.left_dim(), node.mid_dim(), node.quotient_dim), (1, 1, 0));

    let atomless = NodeContext::Measure {
        space: MeasureSpace::lebesgue(0.0, 1.0).unwrap(),
        schedule: schatten_core::multiplication::TruncationSchedule::full(1),
    };
    let node = build_node(&atomless, PExponent::ONE).unwrap();
    assert_eq!(node.left_dim(), 0);
    assert_eq!(node.quotient_dim, node.mid_dim());
}

#[test]
fn directed_grid_examples() {
    let ctx = NodeContext::Measure {
        space: MeasureSpace::from_atoms([("a", 1.0), ("b", 2.0), ("c", 0.5)]).unwrap(),
        schedule: schatten_core::multiplication::TruncationSchedule::atoms_only(),
    };
    let grid = [PExponent::ONE, PExponent::TWO, PExponent::Finite(3.0), PExponent::Infinity];
    let r = verify_fig2(&ctx, &grid, 7, Execution::Sequential).unwrap();
    assert!(r.passes && r.all_commute);
    assert_eq!(r.columns.len(), 5);
    let single = verify_fig2(&ctx, &[PExponent::TWO], 7, Execution::Sequential).unwrap();
    assert!(single.passes && single.blocks.is_empty());
}

#[test]
fn space_and_function_json_shapes() {
    let space: MeasureSpace = serde_json::from_str(
        r#"{"atoms":[{"label":"a","mass":1.0}],
            "diffuse":[{"interval":[0.0,2.0],
                        "density":[{"sub":[0.0,1.0],"value":1.0},
                                   {"sub":[1.0,2.0],"value":0.5}]}]}"#,
    )
    .unwrap();
    assert_eq!(space.total_measure(), 2.5);
    assert!(serde_json::from_str::<MeasureSpace>(r#"{"atoms":[{"label":"a","mass":-1.0}]}"#).is_err());
    let _ = DensitySegment { sub: Interval::new(0.0, 1.0), value: 1.0 };
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn serde_round_trips(seed in any::<u64>()) {
        let mut rng = random::rng_for(seed, "prop-serde", 0);
        let space = random::measure_space(&mut rng, 5, 3);
        let f = random::simple_function(&mut rng, &space).function;
        let s2: MeasureSpace = serde_json::from_str(&serde_json::to_string(&space).unwrap()).unwrap();
        let f2: SimpleFunction = serde_json::from_str(&serde_json::to_string(&f).unwrap()).unwrap();
        prop_assert_eq!(&s2, &space);
        prop_assert_eq!(&f2, &f);
    }

    #[test]
    fn integral_is_homogeneous(seed in any::<u64>(), p in 1.0f64..5.0, re in -3.0f64..3.0, im in -3.0f64..3.0) {
        let mut rng = random::rng_for(seed, "prop-homog", 0);
        let space = random::measure_space(&mut rng, 5, 3);
        let f = random::simple_function(&mut rng, &space).function;
        let lambda = Complex64::new(re, im);
        let base = space.integrate_abs_power(&f, p).unwrap();
        let scaled = space.integrate_abs_power(&f.scale(lambda), p).unwrap();
        let expect = lambda.norm().powf(p) * base;
        prop_assert!((scaled - expect).abs() <= 1e-12 * expect.max(1e-300) + 1e-300);
    }

    #[test]
    fn integral_is_additive_across_atoms_and_diffuse(seed in any::<u64>(), p in 1.0f64..5.0) {
        let mut rng = random::rng_for(seed, "prop-additive", 0);
        let space = random::measure_space(&mut rng, 5, 3);
        let f = random::simple_function(&mut rng, &space).function;
        let atoms_only = SimpleFunction::new(f.atom_values().clone(), Vec::new()).unwrap();
        let diffuse_only = SimpleFunction::new(Default::default(), f.diffuse_values().to_vec()).unwrap();
        let whole = space.integrate_abs_power(&f, p).unwrap();
        let parts = space.integrate_abs_power(&atoms_only, p).unwrap()
            + space.integrate_abs_power(&diffuse_only, p).unwrap();
        prop_assert!((whole - parts).abs() <= 1e-12 * whole.max(1.0));
    }

    #[test]
    fn decomposition_partitions_the_measure(seed in any::<u64>()) {
        let mut rng = random::rng_for(seed, "prop-partition", 0);
        let space = random::measure_space(&mut rng, 8, 3);
        let d = space.decompose();
        let total = space.total_measure();
        prop_assert!((d.atom_measure + d.diffuse_measure - total).abs() <= 1e-12 * total.max(1.0));
        prop_assert_eq!(d.atoms.len(), space.atoms().len());
        prop_assert_eq!(space.is_atomless(), d.atoms.is_empty());
    }

    #[test]
    fn constant_masses_are_invariant(n in 1usize..20, mass in 0.01f64..100.0) {
        prop_assert_eq!(
            check_group_invariance(n, &vec![mass; n]).unwrap(),
            GroupInvariance::InvariantCounting { scale: mass }
        );
    }
}
