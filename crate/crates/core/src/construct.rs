//! Brother tiles: from a tile `F` with a periodic co-tile `A`, build
//! `F_1, .., F_{d-1}` sharing the co-tile `A` such that `(F_1, .., F_{d-1}, F)`
//! is independent and `(F_1, .., F_{d-2}, F)` has property (★).
//!
//! Every choice is made by scanning lattice points in shell order
//! (increasing sup-norm, lexicographic, negative first), so outputs are
//! deterministic.

use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_rational::BigRational;

use crate::analysis::{has_property_star, is_independent_tuple, vw_dimension, RationalSubspace};
use crate::error::{check_dim, Error, Result};
use crate::lattice::{Lattice, PeriodicSet};
use crate::point::{self, Point};
use crate::solve::{search_periodic_cotile, SearchMode};
use crate::tiles::{Tile, TileTuple};
use crate::verify;

/// `F_g = {v + g(v) : v in F}`; points missing from `g` stay in place.
pub fn translate_by_lattice(tile: &Tile, lattice: &Lattice, g: &BTreeMap<Point, Point>) -> Result<Tile> {
    check_dim(tile.dim(), lattice.dim())?;
    let mut out = Vec::with_capacity(tile.len());
    for v in tile.points() {
        match g.get(v) {
            Some(s) => {
                check_dim(tile.dim(), s.len())?;
                if !lattice.contains(s) {
                    return Err(Error::OutOfLattice(s.clone()));
                }
                out.push(point::add(v, s));
            }
            None => out.push(v.clone()),
        }
    }
    let t = Tile::new(tile.dim(), out)?;
    if t.len() != tile.len() {
        return Err(Error::InvalidInput("translated points collide".into()));
    }
    Ok(t)
}

/// `offset + direction`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AffineSubspace {
    pub offset: Vec<BigRational>,
    pub direction: RationalSubspace,
}

impl AffineSubspace {
    pub fn new(offset: &[i64], direction: RationalSubspace) -> Result<AffineSubspace> {
        check_dim(direction.ambient_dim(), offset.len())?;
        let offset = offset.iter().map(|&x| BigRational::from_integer(BigInt::from(x))).collect();
        Ok(AffineSubspace { offset, direction })
    }

    pub fn linear(direction: RationalSubspace) -> AffineSubspace {
        let offset = vec![BigRational::from_integer(BigInt::from(0)); direction.ambient_dim()];
        AffineSubspace { offset, direction }
    }

    pub fn dimension(&self) -> usize {
        self.direction.dimension()
    }

    pub fn contains(&self, x: &[i64]) -> bool {
        let diff: Vec<BigRational> =
            x.iter().zip(&self.offset).map(|(&a, o)| BigRational::from_integer(BigInt::from(a)) - o).collect();
        self.direction.contains_rational(&diff)
    }
}

/// The first point of `lattice`, in shell order, outside every subspace.
pub fn avoid_subspaces(lattice: &Lattice, subspaces: &[AffineSubspace]) -> Result<Point> {
    let d = lattice.dim();
    if !lattice.is_full_rank() {
        return Err(Error::RankDeficient { rank: lattice.rank(), dim: d });
    }
    for s in subspaces {
        check_dim(d, s.direction.ambient_dim())?;
        if s.dimension() >= d {
            return Err(Error::InvalidInput(format!("subspace of dimension {} fills Q^{d}", s.dimension())));
        }
    }
    Ok(lattice.points_by_norm().find(|x| subspaces.iter().all(|s| !s.contains(x))).expect("lattice points are infinite"))
}

fn subsets_up_to(n: usize, max: usize) -> Vec<Vec<usize>> {
    let mut out = vec![Vec::new()];
    let mut frontier = vec![Vec::new()];
    for _ in 0..max.min(n) {
        let mut next = Vec::new();
        for s in &frontier {
            let start = s.last().map_or(0, |&x: &usize| x + 1);
            for i in start..n {
                let mut t = s.clone();
                t.push(i);
                next.push(t);
            }
        }
        out.extend(next.iter().cloned());
        frontier = next;
    }
    out
}

/// A choice `g_j` in `lattice` for each vector such that for every subset `J`
/// and every `W` in `spaces`, the image of `span{v_j + g_j : j in J}` in
/// `Q^d / W` has dimension `min(d - dim W, |J|)`.
pub fn forcing_assignment(vectors: &[Point], lattice: &Lattice, spaces: &[RationalSubspace]) -> Result<Vec<Point>> {
    let d = lattice.dim();
    for v in vectors {
        check_dim(d, v.len())?;
    }
    if let Some(w) = spaces.iter().find(|w| w.dimension() >= d || w.ambient_dim() != d) {
        return Err(Error::InvalidInput(format!("{} is not a proper subspace of Q^{d}", w.dimension())));
    }
    let mut g: Vec<Point> = Vec::with_capacity(vectors.len());
    for (j, v) in vectors.iter().enumerate() {
        let shifted: Vec<Point> = (0..j).map(|i| point::add(&vectors[i], &g[i])).collect();
        let mut avoid = Vec::new();
        for w in spaces {
            for subset in subsets_up_to(j, d - w.dimension() - 1) {
                let pts: Vec<Point> = subset.iter().map(|&i| shifted[i].clone()).collect();
                let dir = RationalSubspace::span(d, &pts)?.join(w)?;
                avoid.push(AffineSubspace::new(&point::neg(v), dir)?);
            }
        }
        g.push(avoid_subspaces(lattice, &avoid)?);
    }
    // Subsets larger than d - dim W contain one of that size, so checking up
    // to that size covers every subset.
    for w in spaces {
        let cap = d - w.dimension();
        for subset in subsets_up_to(vectors.len(), cap) {
            let dim = vw_dimension(vectors, &g, &subset, w);
            if dim != subset.len().min(cap) {
                return Err(Error::VerificationFailed(format!("subset {subset:?} has dimension {dim} modulo W")));
            }
        }
    }
    Ok(g)
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BrotherReport {
    /// Every brother tile and `F` tile with `A`.
    pub joint_tiling: bool,
    /// `(F_1, .., F_{d-1}, F)` is independent.
    pub independent: bool,
    /// `(F_1, .., F_{d-2}, F)` has property (★); vacuous below dimension 3.
    pub property_star: bool,
}

impl BrotherReport {
    pub fn ok(&self) -> bool {
        self.joint_tiling && self.independent && self.property_star
    }
}

/// Checks the three defining properties of brother tiles directly.
pub fn check_brothers(tile: &Tile, cotile: &PeriodicSet, brothers: &[Tile]) -> Result<BrotherReport> {
    let d = tile.dim();
    let mut all = brothers.to_vec();
    all.push(tile.clone());
    let full = TileTuple::new(all)?;
    let joint_tiling = verify::is_joint_cotile(&full, cotile)?.ok;
    let independent = full.len() == d && is_independent_tuple(&full);
    let property_star = if d < 2 || brothers.len() + 1 < d {
        false
    } else {
        let mut head = brothers[..d - 2].to_vec();
        head.push(tile.clone());
        matches!(has_property_star(&TileTuple::new(head)?), Ok(true))
    };
    Ok(BrotherReport { joint_tiling, independent, property_star: property_star || d == 1 })
}

/// `F_1, .., F_{d-1}` for a tile `F` containing 0 and a periodic co-tile `A`.
pub fn brother_tiles(tile: &Tile, cotile: &PeriodicSet) -> Result<Vec<Tile>> {
    let d = tile.dim();
    check_dim(d, cotile.dim())?;
    if !tile.contains(&vec![0; d]) {
        return Err(Error::InvalidInput("the tile must contain the origin".into()));
    }
    if tile.len() == 1 {
        return Err(Error::TrivialTile);
    }
    if !verify::tiles(tile, cotile) {
        return Err(Error::NotATiling);
    }
    let lattice = cotile.stabilizer();
    if !lattice.is_full_rank() {
        return Err(Error::RankDeficientStabilizer);
    }
    if d == 1 {
        return Ok(Vec::new());
    }
    let starred = tile.starred();
    let k = starred.len();
    let vectors: Vec<Point> = (0..(d - 1) * k).map(|i| starred[i % k].clone()).collect();
    let spaces =
        tile.points().iter().map(|v| RationalSubspace::span(d, std::slice::from_ref(v))).collect::<Result<Vec<_>>>()?;
    let g = forcing_assignment(&vectors, &lattice, &spaces)?;
    let origin = vec![0; d];
    let brothers = (0..d - 1)
        .map(|j| {
            let pts = std::iter::once(origin.clone())
                .chain((0..k).map(|i| point::add(&vectors[k * j + i], &g[k * j + i])));
            Tile::new(d, pts)
        })
        .collect::<Result<Vec<_>>>()?;
    let report = check_brothers(tile, cotile, &brothers)?;
    if !report.ok() {
        return Err(Error::VerificationFailed(format!("{report:?}")));
    }
    Ok(brothers)
}

/// A witness that `F` tiles periodically: tiles `F_1, .., F_{d-2}` and a
/// common periodic co-tile `A` with `(F_1, .., F_{d-2}, F)` having property (★).
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PeriodicityCertificate {
    pub tiles: Vec<Tile>,
    pub cotile: PeriodicSet,
}

/// Searches for a periodic co-tile of index at most `max_index` and, if one
/// exists, returns the certificate built from its brother tiles.
pub fn equiv_condition(tile: &Tile, max_index: u64) -> Result<Option<PeriodicityCertificate>> {
    let found = search_periodic_cotile(&TileTuple::single(tile.clone())?, max_index, SearchMode::First)?;
    let Some(first) = found.into_iter().next() else {
        return Ok(None);
    };
    let d = tile.dim();
    let brothers = brother_tiles(tile, &first.cotile)?;
    let tiles = brothers.into_iter().take(d.saturating_sub(2)).collect();
    Ok(Some(PeriodicityCertificate { tiles, cotile: first.cotile }))
}
