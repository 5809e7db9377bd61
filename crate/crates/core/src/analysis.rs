//! Linear algebra over Q for tile tuples: independence, property (★),
//! span classes, and quotient dimensions modulo a subspace.

use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Zero};

use crate::error::{check_dim, Error, Result};
use crate::lattice::Lattice;
use crate::point::{self, Point};
use crate::tiles::TileTuple;

fn to_rational(v: &[i64]) -> Vec<BigRational> {
    v.iter().map(|&x| BigRational::from_integer(BigInt::from(x))).collect()
}

/// Incremental echelon basis over Q. Each stored row has a leading 1 at its
/// pivot column and zeros at the pivot columns of the other rows.
#[derive(Clone, Debug, Default)]
struct Echelon {
    rows: Vec<(usize, Vec<BigRational>)>,
}

impl Echelon {
    fn residual(&self, v: &[BigRational]) -> Vec<BigRational> {
        let mut w = v.to_vec();
        for (p, row) in &self.rows {
            if !w[*p].is_zero() {
                let k = w[*p].clone();
                for (x, r) in w.iter_mut().zip(row) {
                    *x -= &k * r;
                }
            }
        }
        w
    }

    /// Adds `v`; returns false if it is already in the span.
    fn push(&mut self, v: &[BigRational]) -> bool {
        let mut w = self.residual(v);
        let Some(p) = w.iter().position(|x| !x.is_zero()) else {
            return false;
        };
        let inv = w[p].recip();
        for x in w.iter_mut() {
            *x *= &inv;
        }
        for (_, row) in self.rows.iter_mut() {
            if !row[p].is_zero() {
                let k = row[p].clone();
                for (x, r) in row.iter_mut().zip(&w) {
                    *x -= &k * r;
                }
            }
        }
        self.rows.push((p, w));
        true
    }

    fn rank(&self) -> usize {
        self.rows.len()
    }
}

/// Rank over Q of a list of integer vectors.
pub fn rank(vectors: &[Point]) -> usize {
    let mut e = Echelon::default();
    for v in vectors {
        e.push(&to_rational(v));
    }
    e.rank()
}

/// A linear subspace of `Q^d` in reduced row echelon form.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct RationalSubspace {
    dim: usize,
    rows: Vec<Vec<BigRational>>,
}

impl RationalSubspace {
    pub fn zero(dim: usize) -> RationalSubspace {
        RationalSubspace { dim, rows: Vec::new() }
    }

    pub fn span(dim: usize, vectors: &[Point]) -> Result<RationalSubspace> {
        let rows: Vec<Vec<BigRational>> = vectors
            .iter()
            .map(|v| check_dim(dim, v.len()).map(|_| to_rational(v)))
            .collect::<Result<_>>()?;
        RationalSubspace::span_rational(dim, &rows)
    }

    pub fn span_rational(dim: usize, vectors: &[Vec<BigRational>]) -> Result<RationalSubspace> {
        let mut e = Echelon::default();
        for v in vectors {
            check_dim(dim, v.len())?;
            e.push(v);
        }
        let mut rows = e.rows;
        rows.sort_by_key(|(p, _)| *p);
        Ok(RationalSubspace { dim, rows: rows.into_iter().map(|(_, r)| r).collect() })
    }

    pub fn ambient_dim(&self) -> usize {
        self.dim
    }

    pub fn dimension(&self) -> usize {
        self.rows.len()
    }

    /// Reduced row echelon basis.
    pub fn rows(&self) -> &[Vec<BigRational>] {
        &self.rows
    }

    fn echelon(&self) -> Echelon {
        let rows = self
            .rows
            .iter()
            .map(|r| (r.iter().position(|x| !x.is_zero()).expect("rows are nonzero"), r.clone()))
            .collect();
        Echelon { rows }
    }

    pub fn contains_rational(&self, v: &[BigRational]) -> bool {
        v.len() == self.dim && self.echelon().residual(v).iter().all(|x| x.is_zero())
    }

    pub fn contains(&self, v: &[i64]) -> bool {
        self.contains_rational(&to_rational(v))
    }

    /// Smallest subspace containing both.
    pub fn join(&self, other: &RationalSubspace) -> Result<RationalSubspace> {
        check_dim(self.dim, other.dim)?;
        let all: Vec<Vec<BigRational>> = self.rows.iter().chain(&other.rows).cloned().collect();
        RationalSubspace::span_rational(self.dim, &all)
    }

    /// Integer points of the subspace, as a lattice of rank `dimension()`.
    pub fn integer_points(&self) -> Lattice {
        // The subspace is the kernel of a basis of its orthogonal complement.
        let pivots: Vec<usize> =
            self.rows.iter().map(|r| r.iter().position(|x| !x.is_zero()).unwrap()).collect();
        let mut normals: Vec<Vec<BigInt>> = Vec::new();
        for free in (0..self.dim).filter(|c| !pivots.contains(c)) {
            let mut n = vec![BigRational::zero(); self.dim];
            n[free] = BigRational::one();
            for (row, &p) in self.rows.iter().zip(&pivots) {
                n[p] = -row[free].clone();
            }
            let lcm = n.iter().fold(BigInt::one(), |acc, x| acc.lcm(x.denom()));
            normals.push(n.iter().map(|x| (x * BigRational::from_integer(lcm.clone())).to_integer()).collect());
        }
        if normals.is_empty() {
            return Lattice::full(self.dim);
        }
        // Columns of the normal matrix.
        let cols: Vec<Vec<BigInt>> =
            (0..self.dim).map(|c| normals.iter().map(|n| n[c].clone()).collect()).collect();
        Lattice::kernel(normals.len(), &cols).expect("consistent shapes")
    }
}

fn selections(tuple: &TileTuple) -> Vec<Vec<Point>> {
    tuple.iter().map(|t| t.starred()).collect()
}

/// Depth-first search over selections with an incremental echelon basis;
/// returns the first dependent (partial) selection, extended arbitrarily.
fn dependent_selection(choices: &[Vec<Point>]) -> Option<Vec<Point>> {
    fn go(choices: &[Vec<Point>], depth: usize, basis: &Echelon, chosen: &mut Vec<Point>) -> Option<Vec<Point>> {
        if depth == choices.len() {
            return None;
        }
        for v in &choices[depth] {
            let mut next = basis.clone();
            chosen.push(v.clone());
            if !next.push(&to_rational(v)) {
                let mut witness = chosen.clone();
                for c in &choices[depth + 1..] {
                    witness.push(c[0].clone());
                }
                return Some(witness);
            }
            if let Some(w) = go(choices, depth + 1, &next, chosen) {
                return Some(w);
            }
            chosen.pop();
        }
        None
    }
    if choices.iter().any(|c| c.is_empty()) {
        return None;
    }
    go(choices, 0, &Echelon::default(), &mut Vec::new())
}

/// A dependent selection `(v_1, ..., v_k)` with `v_i` in `F_i*`, if any.
///
/// More than `d` tiles are never independent; the witness is then the first
/// selection (empty if some `F_i*` is empty).
pub fn independence_witness(tuple: &TileTuple) -> Option<Vec<Point>> {
    let choices = selections(tuple);
    if tuple.len() > tuple.dim() {
        return Some(if choices.iter().all(|c| !c.is_empty()) {
            choices.iter().map(|c| c[0].clone()).collect()
        } else {
            Vec::new()
        });
    }
    dependent_selection(&choices)
}

pub fn is_independent_tuple(tuple: &TileTuple) -> bool {
    independence_witness(tuple).is_none()
}

/// Selections of a `(d-1)`-tuple grouped by the hyperplane they span.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SpanClassification {
    pub classes: BTreeMap<RationalSubspace, Vec<Vec<Point>>>,
}

impl SpanClassification {
    pub fn total(&self) -> usize {
        self.classes.values().map(Vec::len).sum()
    }
}

fn for_each_selection(choices: &[Vec<Point>], f: &mut dyn FnMut(&[Point])) {
    fn go(choices: &[Vec<Point>], cur: &mut Vec<Point>, f: &mut dyn FnMut(&[Point])) {
        if cur.len() == choices.len() {
            f(cur);
            return;
        }
        for v in &choices[cur.len()] {
            cur.push(v.clone());
            go(choices, cur, f);
            cur.pop();
        }
    }
    go(choices, &mut Vec::new(), f)
}

fn check_star_arity(tuple: &TileTuple) -> Result<()> {
    let d = tuple.dim();
    if d == 0 || tuple.len() != d - 1 {
        return Err(Error::WrongArity { expected: d.saturating_sub(1), found: tuple.len() });
    }
    Ok(())
}

pub fn span_classes(tuple: &TileTuple) -> Result<SpanClassification> {
    check_star_arity(tuple)?;
    if let Some(witness) = independence_witness(tuple) {
        return Err(Error::NotIndependent { witness });
    }
    let d = tuple.dim();
    let mut classes: BTreeMap<RationalSubspace, Vec<Vec<Point>>> = BTreeMap::new();
    let mut err = None;
    for_each_selection(&selections(tuple), &mut |sel| match RationalSubspace::span(d, sel) {
        Ok(v) => classes.entry(v).or_default().push(sel.to_vec()),
        Err(e) => err = Some(e),
    });
    if let Some(e) = err {
        return Err(e);
    }
    Ok(SpanClassification { classes })
}

/// Two selections spanning the same hyperplane but differing in one of the
/// first `d-2` entries, if any.
pub fn property_star_witness(tuple: &TileTuple) -> Result<Option<(Vec<Point>, Vec<Point>)>> {
    let classes = span_classes(tuple)?;
    let d = tuple.dim();
    let head = d.saturating_sub(2);
    for members in classes.classes.values() {
        let first = &members[0];
        if let Some(other) = members.iter().find(|m| m[..head] != first[..head]) {
            return Ok(Some((first.clone(), other.clone())));
        }
    }
    Ok(None)
}

pub fn has_property_star(tuple: &TileTuple) -> Result<bool> {
    Ok(property_star_witness(tuple)?.is_none())
}

/// Dimension of the image of `span{v_j + g_j : j in J}` in `Q^d / W`.
pub fn vw_dimension(vectors: &[Point], g: &[Point], subset: &[usize], w: &RationalSubspace) -> usize {
    let mut e = Echelon::default();
    for r in w.rows() {
        e.push(r);
    }
    let base = e.rank();
    for &j in subset {
        e.push(&to_rational(&point::add(&vectors[j], &g[j])));
    }
    e.rank() - base
}
