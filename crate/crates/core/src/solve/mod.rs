//! Searching for periodic joint co-tiles.
//!
//! A joint co-tile with period lattice `L` is an exact cover problem on the
//! finite group `Z^d / L`: pick residues `A` so that every residue is covered
//! exactly once by `F_j + A`, for every tile `F_j` simultaneously.

mod piecewise;
mod sft;

use std::collections::BTreeMap;

use rayon::prelude::*;

use crate::analysis;
use crate::error::{check_dim, Error, Result};
use crate::lattice::{Lattice, PeriodicSet, QuotientGroup};
use crate::point;
use crate::tiles::{Tile, TileTuple};
use crate::verify;

pub use piecewise::{common_stabilizer, piecewise_to_periodic, CommonStabilizer, Piece, PiecewiseOutcome};
pub use sft::{
    cotile_block_graph, decode_cotile_cycle, lift_to_full_period, membership, BlockGraph, Cycle, Membership,
};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SearchMode {
    First,
    All,
}

/// A joint tiling problem on one quotient group.
#[derive(Clone, Debug)]
pub struct SearchProblem {
    tuple: TileTuple,
    quotient: QuotientGroup,
    /// Residue positions of the points of each tile.
    pub projected: Vec<Vec<usize>>,
    /// Whether each tile is injective modulo the lattice.
    pub injective: Vec<bool>,
    /// Whether every tile size divides the index.
    pub divisible: bool,
}

impl SearchProblem {
    pub fn new(tuple: &TileTuple, lattice: &Lattice) -> Result<SearchProblem> {
        check_dim(tuple.dim(), lattice.dim())?;
        let quotient = lattice.quotient()?;
        let projected: Vec<Vec<usize>> = tuple
            .iter()
            .map(|t| t.points().iter().map(|p| quotient.index_of(p)).collect())
            .collect();
        let injective = tuple.iter().map(|t| t.is_injective_mod(&quotient)).collect();
        let n = quotient.order();
        let divisible = tuple.iter().all(|t| n % t.len() == 0);
        Ok(SearchProblem { tuple: tuple.clone(), quotient, projected, injective, divisible })
    }

    pub fn lattice(&self) -> &Lattice {
        self.quotient.lattice()
    }

    pub fn is_feasible(&self) -> bool {
        self.divisible && self.injective.iter().all(|&b| b) && verify::sizes_agree(&self.tuple)
    }

    pub fn solve(&self, mode: SearchMode) -> Vec<PeriodicSet> {
        if !self.is_feasible() {
            return Vec::new();
        }
        let q = &self.quotient;
        let n = q.order();
        let residues: Vec<point::Point> = q.residues().collect();
        // cover[t][a]: cells covered by tile t placed at residue a.
        let cover: Vec<Vec<Vec<usize>>> = self
            .tuple
            .iter()
            .map(|t| {
                residues
                    .iter()
                    .map(|r| t.points().iter().map(|f| q.index_of(&point::add(r, f))).collect())
                    .collect()
            })
            .collect();
        // back[t][x]: the placements covering x with some point of tile t.
        let back: Vec<Vec<Vec<usize>>> = self
            .tuple
            .iter()
            .map(|t| {
                residues
                    .iter()
                    .map(|r| t.points().iter().map(|f| q.index_of(&point::sub(r, f))).collect())
                    .collect()
            })
            .collect();
        let mut search = Backtrack {
            cover,
            back,
            occupied: vec![vec![false; n]; self.tuple.len()],
            chosen: Vec::new(),
            mode,
            found: Vec::new(),
        };
        search.run();
        let mut out: Vec<PeriodicSet> =
            search.found.into_iter().map(|idx| PeriodicSet::from_indices(q, idx)).collect();
        out.sort();
        out
    }
}

struct Backtrack {
    cover: Vec<Vec<Vec<usize>>>,
    back: Vec<Vec<Vec<usize>>>,
    occupied: Vec<Vec<bool>>,
    chosen: Vec<usize>,
    mode: SearchMode,
    found: Vec<Vec<usize>>,
}

impl Backtrack {
    fn fits(&self, a: usize) -> bool {
        self.cover
            .iter()
            .zip(&self.occupied)
            .all(|(c, occ)| c[a].iter().all(|&x| !occ[x]))
    }

    fn set(&mut self, a: usize, value: bool) {
        for (c, occ) in self.cover.iter().zip(self.occupied.iter_mut()) {
            for &x in &c[a] {
                occ[x] = value;
            }
        }
    }

    /// The uncovered (tile, cell) with the fewest fitting placements, as in
    /// Knuth's exact-cover heuristic. `None` when everything is covered; an
    /// empty list when some cell can no longer be covered.
    fn branch(&self) -> Option<Vec<usize>> {
        let mut best: Option<Vec<usize>> = None;
        for (back, occ) in self.back.iter().zip(&self.occupied) {
            for (x, _) in occ.iter().enumerate().filter(|(_, &o)| !o) {
                let fitting: Vec<usize> = back[x].iter().copied().filter(|&a| self.fits(a)).collect();
                if fitting.len() <= 1 {
                    return Some(fitting);
                }
                if best.as_ref().is_none_or(|b| fitting.len() < b.len()) {
                    best = Some(fitting);
                }
            }
        }
        best
    }

    /// Depth-first search over placements, kept on an explicit stack since the
    /// depth is the number of placements and can reach the quotient order.
    fn run(&mut self) {
        // (candidate placements, next to try); a frame holds a placement
        // exactly when chosen.len() == its depth
        let mut frames: Vec<(Vec<usize>, usize)> = Vec::new();
        loop {
            match self.branch() {
                Some(candidates) => frames.push((candidates, 0)),
                None => {
                    self.found.push(self.chosen.clone());
                    if self.mode == SearchMode::First {
                        return;
                    }
                }
            }
            loop {
                let depth = frames.len();
                if depth == 0 {
                    return;
                }
                if self.chosen.len() == depth {
                    let a = self.chosen.pop().expect("placement on the stack");
                    self.set(a, false);
                }
                let (candidates, next) = &mut frames[depth - 1];
                if let Some(&a) = candidates.get(*next) {
                    *next += 1;
                    self.set(a, true);
                    self.chosen.push(a);
                    break;
                }
                frames.pop();
            }
        }
    }
}

/// All (or the first) joint co-tiles of the tuple that are periodic with respect to `lattice`.
pub fn solve_quotient(tuple: &TileTuple, lattice: &Lattice, mode: SearchMode) -> Result<Vec<PeriodicSet>> {
    Ok(SearchProblem::new(tuple, lattice)?.solve(mode))
}

/// A co-tile found by lattice search.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub struct FoundCotile {
    /// The co-tile presented on its full stabilizer.
    pub cotile: PeriodicSet,
    /// The first lattice (in search order) on which it was found.
    pub search_lattice: Lattice,
}

impl FoundCotile {
    pub fn stabilizer(&self) -> &Lattice {
        self.cotile.lattice()
    }
}

/// Searches all period lattices whose index is a multiple of `|F_1|` and at most `max_index`.
///
/// In `First` mode the search stops at the smallest index with a solution and
/// returns one co-tile from the first lattice (in canonical order) that has one.
/// Results do not depend on the thread schedule.
pub fn search_periodic_cotile(tuple: &TileTuple, max_index: u64, mode: SearchMode) -> Result<Vec<FoundCotile>> {
    let step = tuple.tiles()[0].len() as u64;
    let d = tuple.dim();
    let mut found: BTreeMap<PeriodicSet, Lattice> = BTreeMap::new();
    let mut n = step;
    while n <= max_index {
        let lattices = Lattice::enumerate_sublattices(d, n);
        let results: Vec<Result<Vec<PeriodicSet>>> =
            lattices.par_iter().map(|l| solve_quotient(tuple, l, mode)).collect();
        for (l, r) in lattices.iter().zip(results) {
            for a in r? {
                found.entry(a.canonical()).or_insert_with(|| l.clone());
                if mode == SearchMode::First {
                    break;
                }
            }
            if mode == SearchMode::First && !found.is_empty() {
                break;
            }
        }
        if mode == SearchMode::First && !found.is_empty() {
            break;
        }
        n += step;
    }
    let mut out: Vec<FoundCotile> =
        found.into_iter().map(|(cotile, search_lattice)| FoundCotile { cotile, search_lattice }).collect();
    out.sort();
    Ok(out)
}

/// Outcome of the decision procedure for tilings of `Z`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum ZTiling {
    Tiles { cotile: PeriodicSet },
    /// No co-tile exists. Every tiling of `Z` is periodic with period at most
    /// `bound`, and every admissible period up to it was refuted.
    NoTiling { bound: u64, periods_checked: Vec<u64> },
}

/// Period bound `2^(diam F + 1)` for tilings of `Z` by `F`.
pub fn newman_bound(tile: &Tile) -> Result<u64> {
    let e = tile.diameter() + 1;
    if e >= 63 {
        return Err(Error::TooLarge(format!("2^{e}")));
    }
    Ok(1u64 << e)
}

/// Decides whether a finite subset of `Z` tiles `Z`.
pub fn search_z_cotile(tile: &Tile) -> Result<ZTiling> {
    check_dim(1, tile.dim())?;
    let (f, shift) = tile.normalize();
    let tuple = TileTuple::single(f.clone())?;
    let bound = newman_bound(&f)?;
    let s = f.len() as u64;
    let mut checked = Vec::new();
    let mut p = s;
    while p <= bound {
        let l = Lattice::diagonal(&[p as i64]);
        let q = l.quotient()?;
        if f.is_injective_mod(&q) {
            checked.push(p);
            if let Some(a) = solve_quotient(&tuple, &l, SearchMode::First)?.into_iter().next() {
                // F = F_0 + shift, so F ⊕ (A - shift) = F_0 ⊕ A.
                let a = a.translate(&point::neg(&shift));
                return Ok(ZTiling::Tiles { cotile: a.canonical() });
            }
        }
        p += s;
    }
    Ok(ZTiling::NoTiling { bound, periods_checked: checked })
}

/// Smallest prime product covering all primes up to `n`.
pub fn primorial(n: u64) -> u64 {
    (2..=n).filter(|&p| (2..p).take_while(|k| k * k <= p).all(|k| p % k != 0)).product()
}

/// All joint co-tiles of an independent `d`-tuple of tiles in `Z^d`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct IndependentCotiles {
    pub q: u64,
    /// Every joint co-tile is periodic with respect to this lattice.
    pub bound_lattice: Lattice,
    pub cotiles: Vec<PeriodicSet>,
}

/// The lattice `∩ (qZ v_1 + ... + qZ v_d)` over all selections `v_j ∈ F_j*`,
/// with `q` the primorial of the common tile size.
pub fn independent_period_bound(tuple: &TileTuple) -> Result<(u64, Lattice)> {
    let d = tuple.dim();
    if tuple.len() != d {
        return Err(Error::WrongArity { expected: d, found: tuple.len() });
    }
    if let Some(witness) = analysis::independence_witness(tuple) {
        return Err(Error::NotIndependent { witness });
    }
    if !verify::sizes_agree(tuple) {
        return Err(Error::InvalidInput("tiles of a joint tiling have equal sizes".into()));
    }
    let q = primorial(tuple.tiles()[0].len() as u64) as i64;
    let starred: Vec<Vec<point::Point>> = tuple.iter().map(|t| t.starred()).collect();
    let mut bound: Option<Lattice> = None;
    let mut sel = vec![0usize; d];
    if starred.iter().any(|s| s.is_empty()) {
        return Err(Error::TrivialTile);
    }
    loop {
        let gens: Vec<point::Point> = (0..d).map(|j| point::scale(&starred[j][sel[j]], q)).collect();
        let l = Lattice::from_points(d, &gens)?;
        bound = Some(match bound {
            None => l,
            Some(b) => b.intersect(&l)?,
        });
        let mut j = 0;
        loop {
            if j == d {
                return Ok((q as u64, bound.expect("at least one selection")));
            }
            sel[j] += 1;
            if sel[j] < starred[j].len() {
                break;
            }
            sel[j] = 0;
            j += 1;
        }
    }
}

/// The complete (finite) set of joint co-tiles of an independent `d`-tuple.
pub fn independent_cotiles(tuple: &TileTuple) -> Result<IndependentCotiles> {
    let (q, bound_lattice) = independent_period_bound(tuple)?;
    let cotiles = solve_quotient(tuple, &bound_lattice, SearchMode::All)?;
    Ok(IndependentCotiles { q, bound_lattice, cotiles })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn slab_pair() -> TileTuple {
        let t = |pts: [[i64; 3]; 4]| Tile::new(3, pts.iter().map(|p| p.to_vec())).unwrap();
        TileTuple::new(vec![
            t([[0, 0, 0], [1, 0, 0], [0, 1, 0], [1, 1, 0]]),
            t([[0, 0, 0], [1, 0, 1], [0, 1, 1], [1, 1, 1]]),
        ])
        .unwrap()
    }

    #[test]
    fn example_quotient_solutions() {
        let l = Lattice::diagonal(&[2, 2, 1]);
        let all = solve_quotient(&slab_pair(), &l, SearchMode::All).unwrap();
        assert_eq!(all.len(), 4);
        for a in &all {
            assert_eq!(a.len(), 1);
            assert!(verify::joint_tiles(&slab_pair(), a));
        }
        let first = solve_quotient(&slab_pair(), &l, SearchMode::First).unwrap();
        assert_eq!(first.len(), 1);
    }

    #[test]
    fn one_dimensional_quotients() {
        let pair = TileTuple::single(Tile::from_ints(&[0, 1]).unwrap()).unwrap();
        let all = solve_quotient(&pair, &Lattice::diagonal(&[2]), SearchMode::All).unwrap();
        let members: Vec<_> = all.iter().map(|a| a.members().to_vec()).collect();
        assert_eq!(members, vec![vec![vec![0]], vec![vec![1]]]);
        let f81 = TileTuple::single(Tile::from_ints(&[0, 1, 3, 4, 6, 7]).unwrap()).unwrap();
        let p = SearchProblem::new(&f81, &Lattice::diagonal(&[6])).unwrap();
        assert!(!p.injective[0]);
        assert!(p.solve(SearchMode::All).is_empty());
    }

    #[test]
    fn lattice_search() {
        let found = search_periodic_cotile(&slab_pair(), 4, SearchMode::All).unwrap();
        assert!(!found.is_empty());
        for c in &found {
            assert!(verify::joint_tiles(&slab_pair(), &c.cotile));
            assert_eq!(c.stabilizer(), &c.cotile.stabilizer());
        }
        assert!(found.iter().any(|c| c.stabilizer() == &Lattice::diagonal(&[2, 2, 1])));

        let origin = TileTuple::single(Tile::new(2, [vec![0, 0]]).unwrap()).unwrap();
        let found = search_periodic_cotile(&origin, 1, SearchMode::All).unwrap();
        assert_eq!(found.len(), 1);
        assert_eq!(found[0].cotile, PeriodicSet::everything(Lattice::full(2)).unwrap());

        let pair = TileTuple::single(Tile::from_ints(&[0, 1]).unwrap()).unwrap();
        let found = search_periodic_cotile(&pair, 2, SearchMode::All).unwrap();
        assert_eq!(found.len(), 2);
    }

    #[test]
    fn z_decisions() {
        match search_z_cotile(&Tile::from_ints(&[0, 1, 3, 4, 6, 7]).unwrap()).unwrap() {
            ZTiling::NoTiling { bound, periods_checked } => {
                assert_eq!(bound, 256);
                assert!(periods_checked.iter().all(|p| p % 6 == 0 && *p <= 256));
            }
            other => panic!("unexpected {other:?}"),
        }
        let ZTiling::Tiles { cotile } = search_z_cotile(&Tile::from_ints(&[0]).unwrap()).unwrap() else {
            panic!()
        };
        assert_eq!(cotile, PeriodicSet::everything(Lattice::full(1)).unwrap());
        let gap = Tile::from_ints(&[0, 2]).unwrap();
        let ZTiling::Tiles { cotile } = search_z_cotile(&gap).unwrap() else { panic!() };
        assert!(verify::tiles(&gap, &cotile));
        let shifted = Tile::from_ints(&[5, 7]).unwrap();
        let ZTiling::Tiles { cotile } = search_z_cotile(&shifted).unwrap() else { panic!() };
        assert!(verify::tiles(&shifted, &cotile));
    }

    #[test]
    fn primorials() {
        assert_eq!(primorial(0), 1);
        assert_eq!(primorial(1), 1);
        assert_eq!(primorial(4), 6);
        assert_eq!(primorial(12), 2310);
    }

    #[test]
    fn independent_pair_in_the_plane() {
        let t = TileTuple::new(vec![
            Tile::new(2, [vec![0, 0], vec![1, 0]]).unwrap(),
            Tile::new(2, [vec![0, 0], vec![0, 1]]).unwrap(),
        ])
        .unwrap();
        let r = independent_cotiles(&t).unwrap();
        assert_eq!(r.q, 2);
        assert_eq!(r.bound_lattice, Lattice::diagonal(&[2, 2]));
        assert_eq!(r.cotiles.len(), 2);
        for a in &r.cotiles {
            assert!(verify::joint_tiles(&t, a));
            assert_eq!(a.stabilizer().rank(), 2);
        }
    }
}
