//! Seeded generators for matrices, unitaries, spaces and functions.
//!
//! Every randomized check draws from [`rng_for`], which derives an independent
//! ChaCha stream from `(seed, suite, index)`. Samples are therefore identical
//! whether a batch runs sequentially or in parallel.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::group::{FiniteGroup, GroupFunction};
use crate::linalg::ComplexMatrix;
use crate::measure::{
    AtomEntry, DensitySegment, DiffusePiece, Interval, MeasureSpace, SimpleFunction, ValueSegment,
};

fn splitmix(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9E37_79B9_7F4A_7C15);
    x = (x ^ (x >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    x = (x ^ (x >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    x ^ (x >> 31)
}

/// Stable 64-bit tag for a suite name.
pub fn suite_tag(name: &str) -> u64 {
    name.bytes()
        .fold(0xcbf2_9ce4_8422_2325u64, |h, b| (h ^ b as u64).wrapping_mul(0x100_0000_01b3))
}

/// Independent stream for sample `index` of suite `suite` under `seed`.
pub fn rng_for(seed: u64, suite: &str, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(splitmix(seed ^ splitmix(suite_tag(suite))));
    rng.set_stream(index);
    rng
}

pub fn complex_normal<R: Rng + ?Sized>(rng: &mut R) -> Complex64 {
    Complex64::new(rng.sample(StandardNormal), rng.sample(StandardNormal))
}

pub fn matrix<R: Rng + ?Sized>(rng: &mut R, rows: usize, cols: usize) -> ComplexMatrix {
    let data = (0..rows * cols).map(|_| complex_normal(rng)).collect();
    ComplexMatrix::from_vec(rows, cols, data).expect("shape matches data")
}

/// Haar-like random unitary: Gram–Schmidt (applied twice) on a Gaussian matrix.
pub fn unitary<R: Rng + ?Sized>(rng: &mut R, n: usize) -> ComplexMatrix {
    loop {
        let g = matrix(rng, n, n);
        let mut cols: Vec<Vec<Complex64>> = (0..n).map(|j| g.column(j)).collect();
        let mut ok = true;
        for j in 0..n {
            for _ in 0..2 {
                for k in 0..j {
                    let proj: Complex64 = cols[k]
                        .iter()
                        .zip(&cols[j])
                        .map(|(a, b)| a.conj() * b)
                        .sum();
                    let (head, tail) = cols.split_at_mut(j);
                    for (x, y) in tail[0].iter_mut().zip(&head[k]) {
                        *x -= proj * y;
                    }
                }
            }
            let norm = cols[j].iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
            if norm < 1e-8 {
                ok = false;
                break;
            }
            for x in cols[j].iter_mut() {
                *x /= norm;
            }
        }
        if ok {
            return ComplexMatrix::from_columns(n, &cols).expect("square");
        }
    }
}

pub fn group_function<R: Rng + ?Sized>(rng: &mut R, order: usize) -> GroupFunction {
    GroupFunction::new((0..order).map(|_| complex_normal(rng)).collect())
}

/// Grid step for random breakpoints: every refinement cell is at least this
/// long, which keeps diffuse integrals of nonzero functions bounded away from 0.
pub const GRID_STEP: f64 = 1.0 / 16.0;

/// Random mixed space with `0..=max_atoms` atoms and `0..=max_pieces`
/// disjoint diffuse pieces whose endpoints are generally not integers.
pub fn measure_space<R: Rng + ?Sized>(
    rng: &mut R,
    max_atoms: usize,
    max_pieces: usize,
) -> MeasureSpace {
    let n_atoms = rng.random_range(0..=max_atoms);
    let atoms = (0..n_atoms)
        .map(|i| AtomEntry {
            label: format!("x{i}"),
            mass: rng.random_range(0.1..3.0),
        })
        .collect();
    let n_pieces = rng.random_range(0..=max_pieces);
    let mut cursor = rng.random_range(-40..8) as f64 * GRID_STEP;
    let mut diffuse = Vec::with_capacity(n_pieces);
    for _ in 0..n_pieces {
        let start = cursor + rng.random_range(0..24) as f64 * GRID_STEP;
        let cells = rng.random_range(4..40);
        let end = start + cells as f64 * GRID_STEP;
        let breaks = grid_partition(rng, start, cells, 3);
        let density = breaks
            .into_iter()
            .map(|sub| DensitySegment {
                sub,
                value: if rng.random_bool(0.25) {
                    0.0
                } else {
                    rng.random_range(0.5..2.0)
                },
            })
            .collect();
        diffuse.push(DiffusePiece {
            interval: Interval::new(start, end),
            density,
        });
        cursor = end;
    }
    MeasureSpace::new(atoms, diffuse).expect("generator respects invariants")
}

/// A random simple function with a record of whether it was placed on a
/// positive-measure diffuse region.
#[derive(Debug, Clone)]
pub struct GeneratedFunction {
    pub function: SimpleFunction,
    pub diffuse_support_positive: bool,
}

pub fn simple_function<R: Rng + ?Sized>(rng: &mut R, space: &MeasureSpace) -> GeneratedFunction {
    let mut f = SimpleFunction::zero();
    for atom in space.atoms() {
        if !rng.random_bool(0.2) {
            let r = rng.random_range(0.1..2.0);
            let theta = rng.random_range(0.0..std::f64::consts::TAU);
            f = f.with_atom(&atom.label, Complex64::from_polar(r, theta));
        }
    }
    let mut positive = false;
    if !space.diffuse().is_empty() && rng.random_bool(0.5) {
        for (i, piece) in space.diffuse().iter().enumerate() {
            let cells = (piece.interval.length() / GRID_STEP).round() as usize;
            let subs = grid_partition(rng, piece.interval.start, cells, 3);
            let segs: Vec<ValueSegment> = subs
                .into_iter()
                .map(|sub| {
                    let value = if rng.random_bool(0.5) {
                        Complex64::new(0.0, 0.0)
                    } else {
                        let r = rng.random_range(0.5..2.0);
                        let theta = rng.random_range(0.0..std::f64::consts::TAU);
                        Complex64::from_polar(r, theta)
                    };
                    if value != Complex64::new(0.0, 0.0) {
                        positive |= piece
                            .density
                            .iter()
                            .any(|d| d.value > 0.0 && d.sub.intersect(&sub).is_some());
                    }
                    ValueSegment { sub, value }
                })
                .collect();
            f = f.with_piece(space, i, segs);
        }
    }
    GeneratedFunction {
        function: f,
        diffuse_support_positive: positive,
    }
}

/// Splits `cells` grid steps starting at `start` into at most `max_parts`
/// consecutive subintervals on the grid.
fn grid_partition<R: Rng + ?Sized>(
    rng: &mut R,
    start: f64,
    cells: usize,
    max_parts: usize,
) -> Vec<Interval> {
    let parts = rng.random_range(1..=max_parts.min(cells));
    let mut cuts: Vec<usize> = Vec::new();
    while cuts.len() + 1 < parts {
        let c = rng.random_range(1..cells);
        if !cuts.contains(&c) {
            cuts.push(c);
        }
    }
    cuts.sort_unstable();
    let mut bounds = vec![0];
    bounds.extend(cuts);
    bounds.push(cells);
    bounds
        .windows(2)
        .map(|w| {
            Interval::new(
                start + w[0] as f64 * GRID_STEP,
                start + w[1] as f64 * GRID_STEP,
            )
        })
        .collect()
}

/// A random finite group of order at most `max_order` from the built-in
/// families.
pub fn finite_group<R: Rng + ?Sized>(rng: &mut R, max_order: usize) -> FiniteGroup {
    loop {
        let g = match rng.random_range(0..4) {
            0 => FiniteGroup::cyclic(rng.random_range(1..=max_order)),
            1 => FiniteGroup::dihedral(rng.random_range(1..=(max_order / 2).max(1))),
            2 => FiniteGroup::symmetric(rng.random_range(1..=4)),
            _ => {
                let a = FiniteGroup::cyclic(rng.random_range(1..=6));
                let b = FiniteGroup::cyclic(rng.random_range(1..=4));
                FiniteGroup::direct_product(&a, &b)
            }
        };
        if g.order() <= max_order {
            return g;
        }
    }
}
