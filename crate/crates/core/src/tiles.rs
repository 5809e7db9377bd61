//! Tiles, tuples of tiles, and convolution against periodic functions.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::Zero;

use crate::error::{check_dim, Error, Result};
use crate::function::PeriodicFunction;
use crate::lattice::QuotientGroup;
use crate::point::{self, Point};

/// A finite non-empty subset of `Z^d`, stored sorted.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Tile {
    dim: usize,
    points: Vec<Point>,
}

impl Tile {
    pub fn new(dim: usize, points: impl IntoIterator<Item = Point>) -> Result<Tile> {
        let mut pts: Vec<Point> = points.into_iter().collect();
        for p in &pts {
            check_dim(dim, p.len())?;
        }
        if pts.is_empty() {
            return Err(Error::EmptyTile);
        }
        pts.sort();
        pts.dedup();
        Ok(Tile { dim, points: pts })
    }

    /// A tile in `Z` from integers.
    pub fn from_ints(values: &[i64]) -> Result<Tile> {
        Tile::new(1, values.iter().map(|&v| vec![v]))
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn points(&self) -> &[Point] {
        &self.points
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn contains(&self, v: &[i64]) -> bool {
        self.points.binary_search(&v.to_vec()).is_ok()
    }

    pub fn is_normalized(&self) -> bool {
        self.contains(&vec![0; self.dim])
    }

    /// `F* = F \ {0}`.
    pub fn starred(&self) -> Vec<Point> {
        self.points.iter().filter(|p| !point::is_zero(p)).cloned().collect()
    }

    /// Translate so the lexicographically least point is 0; returns the tile
    /// and the vector that was subtracted.
    pub fn normalize(&self) -> (Tile, Point) {
        let min = self.points[0].clone();
        (self.translate(&point::neg(&min)), min)
    }

    pub fn translate(&self, v: &[i64]) -> Tile {
        Tile::new(self.dim, self.points.iter().map(|p| point::add(p, v))).expect("non-empty")
    }

    /// `rF`.
    pub fn dilate(&self, r: i64) -> Tile {
        Tile::new(self.dim, self.points.iter().map(|p| point::scale(p, r))).expect("non-empty")
    }

    /// `F - F`.
    pub fn difference_set(&self) -> Tile {
        let diffs = self
            .points
            .iter()
            .flat_map(|a| self.points.iter().map(move |b| point::sub(a, b)));
        Tile::new(self.dim, diffs).expect("non-empty")
    }

    /// Largest coordinate spread over all axes.
    pub fn diameter(&self) -> i64 {
        (0..self.dim)
            .map(|i| {
                let lo = self.points.iter().map(|p| p[i]).min().unwrap_or(0);
                let hi = self.points.iter().map(|p| p[i]).max().unwrap_or(0);
                hi - lo
            })
            .max()
            .unwrap_or(0)
    }

    /// Whether distinct points stay distinct modulo the quotient's lattice.
    pub fn is_injective_mod(&self, q: &QuotientGroup) -> bool {
        let mut seen: Vec<usize> = self.points.iter().map(|p| q.index_of(p)).collect();
        seen.sort_unstable();
        seen.windows(2).all(|w| w[0] != w[1])
    }

    pub fn indicator(&self) -> WeightedTile {
        WeightedTile::new(self.dim, self.points.iter().map(|p| (p.clone(), 1)))
            .expect("dimensions already checked")
    }
}

/// A finitely supported integer function on `Z^d`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct WeightedTile {
    dim: usize,
    terms: Vec<(Point, i64)>,
}

impl WeightedTile {
    /// Repeated points have their weights added; zero weights are dropped.
    pub fn new(dim: usize, terms: impl IntoIterator<Item = (Point, i64)>) -> Result<WeightedTile> {
        let mut t: Vec<(Point, i64)> = terms.into_iter().collect();
        for (p, _) in &t {
            check_dim(dim, p.len())?;
        }
        t.sort();
        let mut merged: Vec<(Point, i64)> = Vec::with_capacity(t.len());
        for (p, w) in t {
            match merged.last_mut() {
                Some((q, acc)) if *q == p => *acc += w,
                _ => merged.push((p, w)),
            }
        }
        merged.retain(|(_, w)| *w != 0);
        Ok(WeightedTile { dim, terms: merged })
    }

    /// `δ_v`.
    pub fn delta(v: Point) -> WeightedTile {
        WeightedTile { dim: v.len(), terms: vec![(v, 1)] }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn terms(&self) -> &[(Point, i64)] {
        &self.terms
    }

    /// `(g * f)(x) = sum_y g(y) f(x - y)`, on the lattice of `f`.
    pub fn convolve(&self, f: &PeriodicFunction) -> Result<PeriodicFunction> {
        check_dim(self.dim, f.dim())?;
        let q = f.quotient();
        let weights: Vec<BigRational> =
            self.terms.iter().map(|(_, w)| BigRational::from_integer(BigInt::from(*w))).collect();
        let values = (0..q.order())
            .map(|i| {
                let r = q.residue(i);
                let mut acc = BigRational::zero();
                for ((p, _), w) in self.terms.iter().zip(&weights) {
                    acc += w * &f.values()[q.index_of(&point::sub(&r, p))];
                }
                acc
            })
            .collect();
        Ok(PeriodicFunction::from_quotient(q.clone(), values))
    }
}

/// An ordered non-empty tuple of tiles of equal dimension, each containing 0.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct TileTuple {
    tiles: Vec<Tile>,
}

impl TileTuple {
    pub fn new(tiles: Vec<Tile>) -> Result<TileTuple> {
        let Some(first) = tiles.first() else {
            return Err(Error::InvalidInput("tile tuple must be non-empty".into()));
        };
        let d = first.dim();
        for (i, t) in tiles.iter().enumerate() {
            check_dim(d, t.dim())?;
            if !t.is_normalized() {
                return Err(Error::InvalidInput(format!("tile {} does not contain 0", i + 1)));
            }
        }
        Ok(TileTuple { tiles })
    }

    pub fn single(tile: Tile) -> Result<TileTuple> {
        TileTuple::new(vec![tile])
    }

    pub fn dim(&self) -> usize {
        self.tiles[0].dim()
    }

    pub fn len(&self) -> usize {
        self.tiles.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tiles.is_empty()
    }

    pub fn tiles(&self) -> &[Tile] {
        &self.tiles
    }

    pub fn iter(&self) -> std::slice::Iter<'_, Tile> {
        self.tiles.iter()
    }
}
