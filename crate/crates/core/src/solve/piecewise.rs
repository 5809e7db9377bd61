//! Piecewise periodic joint co-tiles and their conversion to periodic ones.

use std::fmt;
use std::sync::Arc;

use num_bigint::BigInt;
use num_rational::BigRational;

use crate::error::{Error, Result};
use crate::function::PeriodicFunction;
use crate::lattice::{Lattice, PeriodicSet};
use crate::point;
use crate::tiles::TileTuple;
use crate::verify;

use super::sft::{self, Membership};

/// A subset of `Z^d` given by an oracle, together with a lattice of periods
/// it is promised to be invariant under.
#[derive(Clone)]
pub struct Piece {
    pub gamma: Lattice,
    pub member: Membership,
}

impl fmt::Debug for Piece {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Piece(periods {})", self.gamma)
    }
}

impl Piece {
    pub fn new(gamma: Lattice, member: Membership) -> Piece {
        Piece { gamma, member }
    }

    /// A periodic set with its full stabilizer as the declared periods.
    pub fn from_periodic_set(set: &PeriodicSet) -> Piece {
        Piece { gamma: set.stabilizer(), member: sft::membership(set) }
    }

    pub fn contains(&self, x: &[i64]) -> bool {
        (self.member)(x)
    }

    fn union(&self, other: &Piece) -> Result<Piece> {
        let (a, b) = (self.member.clone(), other.member.clone());
        Ok(Piece { gamma: self.gamma.intersect(&other.gamma)?, member: Arc::new(move |x| a(x) || b(x)) })
    }

    /// The piece as a periodic set, when its declared periods have full rank.
    fn to_periodic_set(&self) -> Result<PeriodicSet> {
        let q = self.gamma.quotient()?;
        Ok(PeriodicSet::from_indices(&q, (0..q.order()).filter(|&i| self.contains(&q.residue(i)))))
    }
}

fn union_membership(pieces: &[Piece]) -> Membership {
    let members: Vec<Membership> = pieces.iter().map(|p| p.member.clone()).collect();
    Arc::new(move |x| members.iter().any(|m| m(x)))
}

fn box_radius(pieces: &[Piece], extra: i64) -> i64 {
    let spread = pieces
        .iter()
        .filter_map(|p| p.gamma.basis_points())
        .flat_map(|b| b.into_iter().map(|v| point::sup_norm(&v)))
        .max()
        .unwrap_or(0);
    (spread + extra).clamp(3, 12)
}

fn check_partition(pieces: &[Piece], radius: i64, require_cover: bool) -> Result<()> {
    let d = pieces[0].gamma.dim();
    for u in (0..=radius).flat_map(|k| point::shell(d, k)) {
        let c = pieces.iter().filter(|p| p.contains(&u)).count();
        if c > 1 || (require_cover && c == 0) {
            return Err(Error::NotAPartition(format!("{u:?} lies in {c} pieces")));
        }
    }
    Ok(())
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum CommonStabilizer {
    /// Every piece has a full-rank group of periods.
    AllDPeriodic,
    /// A lattice of rank at least `d-1` leaving every piece invariant.
    Common(Lattice),
}

/// A lattice of periods shared by all pieces of a partition of `Z^d`.
///
/// The partition property is checked on a finite box. Pieces whose declared
/// periods only have rank `d-1` need not share a rank `d-1` lattice: four
/// quadrant-like pieces can have pairwise transverse periods, in which case
/// this reports [`Error::NoCommonStabilizer`].
pub fn common_stabilizer(pieces: &[Piece]) -> Result<CommonStabilizer> {
    let Some(first) = pieces.first() else {
        return Err(Error::NotAPartition("no pieces".into()));
    };
    let d = first.gamma.dim();
    for p in pieces {
        crate::error::check_dim(d, p.gamma.dim())?;
    }
    check_partition(pieces, box_radius(pieces, 2), true)?;
    if pieces.iter().all(|p| p.gamma.is_full_rank()) {
        return Ok(CommonStabilizer::AllDPeriodic);
    }
    let mut gamma = first.gamma.clone();
    for p in &pieces[1..] {
        gamma = gamma.intersect(&p.gamma)?;
    }
    if gamma.rank() + 1 >= d {
        Ok(CommonStabilizer::Common(gamma))
    } else {
        Err(Error::NoCommonStabilizer { needed: d - 1, rank: gamma.rank() })
    }
}

/// Greedy first-fit merging: repeatedly join the first pair (in index order)
/// whose period lattices have an infinite-index sum.
fn merge_pieces(mut pieces: Vec<Piece>) -> Result<Vec<Piece>> {
    'outer: loop {
        for a in 0..pieces.len() {
            for b in a + 1..pieces.len() {
                if !pieces[a].gamma.sum(&pieces[b].gamma)?.is_full_rank() {
                    let merged = pieces[a].union(&pieces[b])?;
                    pieces.remove(b);
                    pieces[a] = merged;
                    continue 'outer;
                }
            }
        }
        return Ok(pieces);
    }
}

/// Outcome of [`piecewise_to_periodic`].
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PiecewiseOutcome {
    /// The periodic joint co-tile, presented on its full stabilizer.
    pub cotile: PeriodicSet,
    /// Whether the pieces shared a rank `d-1` lattice, so the union was lifted directly.
    pub direct: bool,
    /// Number of pieces left after merging.
    pub pieces: usize,
    /// For each remaining piece `j`, the intersection over `i` of the
    /// stabilizers of `1_{F_i} * 1_{piece_j}`.
    pub lambdas: Vec<Lattice>,
}

/// Replaces a piecewise periodic joint co-tile by a periodic one.
///
/// The union of the pieces is checked to be a joint co-tile, and each piece
/// to be invariant under its declared lattice, on a finite box; the result is
/// verified exactly.
pub fn piecewise_to_periodic(tuple: &TileTuple, pieces: &[Piece]) -> Result<PiecewiseOutcome> {
    let d = tuple.dim();
    if pieces.is_empty() {
        return Err(Error::InputNotCotile("no pieces".into()));
    }
    for p in pieces {
        crate::error::check_dim(d, p.gamma.dim())?;
        if p.gamma.rank() + 1 < d {
            return Err(Error::InputContractViolation(format!("piece periods {} have rank below {}", p.gamma, d - 1)));
        }
    }
    let radius = box_radius(pieces, sft::check_radius(tuple));
    if let Err(Error::NotAPartition(msg)) = check_partition(pieces, radius, false) {
        return Err(Error::InputNotCotile(format!("pieces overlap: {msg}")));
    }
    for p in pieces {
        sft::check_invariance_on_box(&p.gamma, &p.member, radius)?;
    }
    let union = union_membership(pieces);
    sft::check_cotile_on_box(tuple, &union, radius)?;

    let mut common = pieces[0].gamma.clone();
    for p in &pieces[1..] {
        common = common.intersect(&p.gamma)?;
    }
    if common.rank() + 1 >= d {
        let cotile = if common.is_full_rank() {
            Piece::new(common, union).to_periodic_set()?
        } else {
            sft::lift_to_full_period(tuple, &common, &union)?
        };
        return finish(tuple, cotile, true, pieces.len(), Vec::new());
    }

    let pieces = merge_pieces(pieces.to_vec())?;
    let mut total: Option<PeriodicFunction> = None;
    let mut lambdas = Vec::new();
    for (j, piece) in pieces.iter().enumerate() {
        // Each 1_{F_i} * 1_{piece_j} is invariant under the intersection of
        // the sums of the period lattices of piece j and the other pieces.
        let mut domain = Lattice::full(d);
        for (l, other) in pieces.iter().enumerate() {
            if l != j {
                domain = domain.intersect(&piece.gamma.sum(&other.gamma)?)?;
            }
        }
        if !domain.is_full_rank() {
            return Err(Error::InputContractViolation("period lattices have an infinite-index sum".into()));
        }
        let mut targets = Vec::new();
        let mut lambda = Lattice::full(d);
        for tile in tuple.iter() {
            let count = |u: &[i64]| tile.points().iter().filter(|f| piece.contains(&point::sub(u, f))).count();
            let h = PeriodicFunction::from_fn(&domain, |u| BigRational::from_integer(BigInt::from(count(u))))?;
            for u in (0..=radius).flat_map(|k| point::shell(d, k)) {
                if BigRational::from_integer(BigInt::from(count(&u))) != *h.at(&u) {
                    return Err(Error::InputContractViolation(format!(
                        "convolution with piece {} is not periodic at {u:?}",
                        j + 1
                    )));
                }
            }
            lambda = lambda.intersect(&h.stabilizer())?;
            targets.push(h);
        }
        let gamma0 = piece.gamma.intersect(&lambda)?;
        let periodic = if gamma0.is_full_rank() {
            Piece::new(gamma0, piece.member.clone()).to_periodic_set()?
        } else {
            sft::lift_solution(tuple.tiles(), &targets, &gamma0, &lambda, &piece.member)?
        };
        lambdas.push(lambda);
        let f = PeriodicFunction::indicator(&periodic);
        total = Some(match total {
            None => f,
            Some(t) => t.add(&f)?,
        });
    }
    let total = total.expect("at least one piece");
    let cotile = total
        .to_set()
        .map_err(|e| Error::VerificationFailed(format!("sum of lifted pieces is not 0/1-valued: {e}")))?;
    finish(tuple, cotile, false, pieces.len(), lambdas)
}

fn finish(
    tuple: &TileTuple,
    cotile: PeriodicSet,
    direct: bool,
    pieces: usize,
    lambdas: Vec<Lattice>,
) -> Result<PiecewiseOutcome> {
    if !verify::joint_tiles(tuple, &cotile) {
        return Err(Error::VerificationFailed("result is not a joint co-tile".into()));
    }
    Ok(PiecewiseOutcome { cotile: cotile.canonical(), direct, pieces, lambdas })
}
