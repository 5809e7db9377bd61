//! Brute-force oracles and seeded generators shared by the integration tests.
#![allow(dead_code)]

use std::collections::BTreeSet;

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use tilekit::solve::{solve_quotient, SearchMode};
use tilekit::{Lattice, QuotientGroup, Tile, TileTuple};

fn add(a: &[i64], b: &[i64]) -> Vec<i64> {
    a.iter().zip(b).map(|(x, y)| x + y).collect()
}

/// Next bitmask with the same popcount (Gosper's hack).
fn next_combination(x: u64) -> u64 {
    let c = x & x.wrapping_neg();
    let r = x + c;
    (((r ^ x) >> 2) / c) | r
}

/// Every joint co-tile of `tuple` that is periodic mod `lattice`, found by
/// trying all subsets of the right size. Each result is a residue mask.
pub fn brute_force_joint(tuple: &TileTuple, lattice: &Lattice) -> BTreeSet<Vec<bool>> {
    let q = QuotientGroup::new(lattice).unwrap();
    let n = q.order();
    assert!(n <= 24, "brute force is for small quotients");
    let residues: Vec<Vec<i64>> = q.residues().collect();
    let size = tuple.tiles()[0].len();
    let mut out = BTreeSet::new();
    if !n.is_multiple_of(size) || tuple.iter().any(|t| t.len() != size) {
        return out;
    }
    // sums[t][a][f]: residue index of a + f for tile t
    let sums: Vec<Vec<Vec<usize>>> = tuple
        .iter()
        .map(|t| residues.iter().map(|a| t.points().iter().map(|f| q.index_of(&add(a, f))).collect()).collect())
        .collect();
    let k = n / size;
    let mut mask: u64 = (1u64 << k) - 1;
    while mask < (1u64 << n) {
        let ok = sums.iter().all(|tile_sums| {
            let mut hit = vec![false; n];
            for (a, row) in tile_sums.iter().enumerate() {
                if mask >> a & 1 == 1 {
                    for &x in row {
                        if hit[x] {
                            return false;
                        }
                        hit[x] = true;
                    }
                }
            }
            true
        });
        if ok {
            out.insert((0..n).map(|i| mask >> i & 1 == 1).collect());
        }
        if k == 0 {
            break;
        }
        mask = next_combination(mask);
    }
    out
}

/// The solver's ALL-mode answer on `lattice`, as residue masks.
pub fn solver_masks(tuple: &TileTuple, lattice: &Lattice) -> BTreeSet<Vec<bool>> {
    let q = QuotientGroup::new(lattice).unwrap();
    solve_quotient(tuple, lattice, SearchMode::All).unwrap().iter().map(|a| a.mask(&q)).collect()
}

pub fn slab_pair() -> TileTuple {
    let t = |pts: [[i64; 3]; 4]| Tile::new(3, pts.iter().map(|p| p.to_vec())).unwrap();
    TileTuple::new(vec![
        t([[0, 0, 0], [1, 0, 0], [0, 1, 0], [1, 1, 0]]),
        t([[0, 0, 0], [1, 0, 1], [0, 1, 1], [1, 1, 1]]),
    ])
    .unwrap()
}

/// A random full-rank lattice in `Z^d` with index in `lo..=hi`, built as a
/// random upper-triangular Hermite basis.
pub fn random_lattice(rng: &mut ChaCha8Rng, d: usize, lo: u64, hi: u64) -> Lattice {
    let n = rng.gen_range(lo..=hi) as i64;
    let mut pivots = vec![1i64; d];
    let mut rest = n;
    for p in pivots.iter_mut().take(d - 1) {
        let divisors: Vec<i64> = (1..=rest).filter(|k| rest % k == 0).collect();
        *p = divisors[rng.gen_range(0..divisors.len())];
        rest /= *p;
    }
    pivots[d - 1] = rest;
    let columns: Vec<Vec<i64>> = (0..d)
        .map(|j| (0..d).map(|i| if i == j { pivots[j] } else if i < j { rng.gen_range(0..pivots[i]) } else { 0 }).collect())
        .collect();
    let l = Lattice::from_points(d, &columns).unwrap();
    assert_eq!(l.index().to_u64(), Some(n as u64));
    l
}

/// A complete residue system mod `lattice`, with the zero residue kept at the
/// origin and every other residue moved by a random lattice vector.
pub fn random_lift(rng: &mut ChaCha8Rng, lattice: &Lattice, spread: i64) -> Tile {
    let q = QuotientGroup::new(lattice).unwrap();
    let basis = lattice.basis_points().unwrap();
    let d = lattice.dim();
    let points = q.residues().map(|r| {
        if r.iter().all(|&x| x == 0) {
            return r;
        }
        basis.iter().fold(r, |acc, b| {
            let c = rng.gen_range(-spread..=spread);
            add(&acc, &b.iter().map(|x| c * x).collect::<Vec<_>>())
        })
    });
    Tile::new(d, points.collect::<Vec<_>>()).unwrap()
}

/// `d` random lifts of the residues of `lattice`, retried until independent.
pub fn random_independent_tuple(rng: &mut ChaCha8Rng, lattice: &Lattice) -> TileTuple {
    let d = lattice.dim();
    loop {
        let tiles = (0..d).map(|_| random_lift(rng, lattice, 1)).collect();
        let t = TileTuple::new(tiles).unwrap();
        if tilekit::analysis::is_independent_tuple(&t) {
            return t;
        }
    }
}

pub fn divisor_sum(n: u64) -> u64 {
    (1..=n).filter(|k| n.is_multiple_of(*k)).sum()
}
