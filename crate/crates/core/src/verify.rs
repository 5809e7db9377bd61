//! Exact checks of tiling equations, level equations, and means.

use num_bigint::BigInt;
use num_rational::BigRational;

use crate::error::{check_dim, Result};
use crate::function::PeriodicFunction;
use crate::lattice::PeriodicSet;
use crate::point::{self, Point};
use crate::tiles::{Tile, TileTuple, WeightedTile};

/// Defects listed in a report are capped at this many residues.
pub const MAX_DEFECTS: usize = 32;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Defect {
    pub residue: Point,
    pub value: BigRational,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TilingReport {
    pub ok: bool,
    /// Number of residues where the equation fails.
    pub defect_count: usize,
    /// The first [`MAX_DEFECTS`] failing residues with the value found there.
    pub defects: Vec<Defect>,
}

impl TilingReport {
    fn from_values(f: &PeriodicFunction, expected: &BigRational) -> TilingReport {
        let mut defects = Vec::new();
        let mut defect_count = 0;
        for (i, v) in f.values().iter().enumerate() {
            if v != expected {
                defect_count += 1;
                if defects.len() < MAX_DEFECTS {
                    defects.push(Defect { residue: f.quotient().residue(i), value: v.clone() });
                }
            }
        }
        TilingReport { ok: defect_count == 0, defect_count, defects }
    }
}

/// Number of representations `a + f` of each residue of the co-tile lattice.
pub fn coverage(tile: &Tile, cotile: &PeriodicSet) -> Result<Vec<u32>> {
    check_dim(tile.dim(), cotile.dim())?;
    let q = cotile.lattice().quotient()?;
    let mut count = vec![0u32; q.order()];
    for a in cotile.members() {
        for f in tile.points() {
            count[q.index_of(&point::add(a, f))] += 1;
        }
    }
    Ok(count)
}

/// Whether `F ⊕ A = Z^d`.
pub fn is_tiling(tile: &Tile, cotile: &PeriodicSet) -> Result<TilingReport> {
    let count = coverage(tile, cotile)?;
    let q = cotile.lattice().quotient()?;
    let mut defects = Vec::new();
    let mut defect_count = 0;
    for (i, &c) in count.iter().enumerate() {
        if c != 1 {
            defect_count += 1;
            if defects.len() < MAX_DEFECTS {
                defects.push(Defect { residue: q.residue(i), value: BigRational::from_integer(BigInt::from(c)) });
            }
        }
    }
    Ok(TilingReport { ok: defect_count == 0, defect_count, defects })
}

pub fn tiles(tile: &Tile, cotile: &PeriodicSet) -> bool {
    is_tiling(tile, cotile).map(|r| r.ok).unwrap_or(false)
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct JointReport {
    pub ok: bool,
    /// Position (0-based) of the first tile that fails, with its report.
    pub failure: Option<(usize, TilingReport)>,
}

/// Whether `A` is a co-tile of every tile in the tuple.
pub fn is_joint_cotile(tuple: &TileTuple, cotile: &PeriodicSet) -> Result<JointReport> {
    for (i, t) in tuple.iter().enumerate() {
        let r = is_tiling(t, cotile)?;
        if !r.ok {
            return Ok(JointReport { ok: false, failure: Some((i, r)) });
        }
    }
    Ok(JointReport { ok: true, failure: None })
}

pub fn joint_tiles(tuple: &TileTuple, cotile: &PeriodicSet) -> bool {
    is_joint_cotile(tuple, cotile).map(|r| r.ok).unwrap_or(false)
}

/// Whether `g * f = level` everywhere.
pub fn is_level_tiling(g: &WeightedTile, f: &PeriodicFunction, level: &BigRational) -> Result<TilingReport> {
    let c = g.convolve(f)?;
    Ok(TilingReport::from_values(&c, level))
}

/// Mean of a periodic function (its fundamental-domain average).
pub fn mean(f: &PeriodicFunction) -> BigRational {
    f.mean()
}

/// Whether all tiles of the tuple have the same size, as every joint tiling requires.
pub fn sizes_agree(tuple: &TileTuple) -> bool {
    tuple.iter().all(|t| t.len() == tuple.tiles()[0].len())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::function::rat;
    use crate::lattice::Lattice;

    fn slab_pair() -> TileTuple {
        let t = |pts: [[i64; 3]; 4]| Tile::new(3, pts.iter().map(|p| p.to_vec())).unwrap();
        TileTuple::new(vec![
            t([[0, 0, 0], [1, 0, 0], [0, 1, 0], [1, 1, 0]]),
            t([[0, 0, 0], [1, 0, 1], [0, 1, 1], [1, 1, 1]]),
        ])
        .unwrap()
    }

    fn slab_pair_cotile() -> PeriodicSet {
        PeriodicSet::new(Lattice::diagonal(&[2, 2, 1]), [vec![0, 0, 0]]).unwrap()
    }

    #[test]
    fn tiling_examples() {
        let a = slab_pair_cotile();
        for t in slab_pair().iter() {
            assert!(is_tiling(t, &a).unwrap().ok);
        }
        let z = PeriodicSet::everything(Lattice::full(2)).unwrap();
        assert!(tiles(&Tile::new(2, [vec![0, 0]]).unwrap(), &z));

        let pair = Tile::from_ints(&[0, 1]).unwrap();
        let bad = PeriodicSet::new(Lattice::diagonal(&[4]), [vec![0], vec![1]]).unwrap();
        let r = is_tiling(&pair, &bad).unwrap();
        assert!(!r.ok);
        assert_eq!(r.defect_count, 2);
        assert_eq!(r.defects[0], Defect { residue: vec![1], value: rat(2) });
        assert_eq!(r.defects[1], Defect { residue: vec![3], value: rat(0) });
    }

    #[test]
    fn joint_examples() {
        assert!(is_joint_cotile(&slab_pair(), &slab_pair_cotile()).unwrap().ok);
        let shifted = PeriodicSet::new(Lattice::diagonal(&[2, 2, 1]), [vec![1, 0, 0]]).unwrap();
        assert!(joint_tiles(&slab_pair(), &shifted));
        let z = PeriodicSet::everything(Lattice::full(3)).unwrap();
        let origin = TileTuple::single(Tile::new(3, [vec![0, 0, 0]]).unwrap()).unwrap();
        assert!(joint_tiles(&origin, &z));
        let r = is_joint_cotile(&slab_pair(), &z).unwrap();
        assert_eq!(r.failure.map(|(i, _)| i), Some(0));
        assert!(sizes_agree(&slab_pair()));
    }

    #[test]
    fn level_examples() {
        let evens = PeriodicSet::new(Lattice::diagonal(&[2]), [vec![0]]).unwrap();
        let nines = PeriodicSet::new(Lattice::diagonal(&[9]), [vec![0], vec![1], vec![2]]).unwrap();
        let f = PeriodicFunction::indicator(&evens).sub(&PeriodicFunction::indicator(&nines)).unwrap();
        let tile = Tile::from_ints(&[0, 1, 3, 4, 6, 7]).unwrap();
        assert!(is_level_tiling(&tile.indicator(), &f, &rat(1)).unwrap().ok);
        assert_eq!(mean(&f), rat(1) / rat(6));

        let half = PeriodicFunction::constant(1, rat(1) / rat(2));
        assert!(is_level_tiling(&Tile::from_ints(&[0, 1]).unwrap().indicator(), &half, &rat(1)).unwrap().ok);
        let three = Tile::from_ints(&[0, 3, 6]).unwrap();
        assert!(is_level_tiling(&three.indicator(), &PeriodicFunction::indicator(&nines), &rat(1)).unwrap().ok);
        assert!(!is_level_tiling(&three.indicator(), &PeriodicFunction::indicator(&nines), &rat(2)).unwrap().ok);
    }

    #[test]
    fn mean_examples() {
        assert_eq!(mean(&PeriodicFunction::indicator(&slab_pair_cotile())), rat(1) / rat(4));
        assert_eq!(mean(&PeriodicFunction::constant(2, rat(7))), rat(7));
    }

    #[test]
    fn dimension_mismatch_is_an_error() {
        assert!(is_tiling(&Tile::from_ints(&[0]).unwrap(), &slab_pair_cotile()).is_err());
    }
}
