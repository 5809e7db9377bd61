//! Subgroups of `Z^d` in canonical Hermite normal form, their quotients,
//! and periodic subsets of `Z^d`.
//!
//! A lattice is stored as a list of generating columns. Column `c` has a
//! pivot row, the last row where it is nonzero; columns are sorted by
//! ascending pivot row, pivots are positive, and the entry of a later column
//! in an earlier pivot row lies in `[0, pivot)`. For a full-rank lattice the
//! basis matrix is upper triangular with the pivots on the diagonal.

use std::fmt;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::{check_dim, Error, Result};
use crate::point::{self, Point};

/// Largest quotient order that is enumerated residue by residue.
pub const MAX_QUOTIENT_ORDER: u64 = 1 << 26;

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Index {
    Finite(BigInt),
    Infinite,
}

impl Index {
    pub fn is_finite(&self) -> bool {
        matches!(self, Index::Finite(_))
    }

    pub fn to_u64(&self) -> Option<u64> {
        match self {
            Index::Finite(n) => n.to_u64(),
            Index::Infinite => None,
        }
    }
}

impl fmt::Display for Index {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Index::Finite(n) => write!(f, "{n}"),
            Index::Infinite => write!(f, "infinite"),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Lattice {
    dim: usize,
    basis: Vec<Vec<BigInt>>,
}

fn last_nonzero(col: &[BigInt], rows: usize) -> Option<usize> {
    (0..rows).rev().find(|&r| !col[r].is_zero())
}

fn axpy(target: &mut [BigInt], k: &BigInt, src: &[BigInt]) {
    if k.is_zero() {
        return;
    }
    for (t, s) in target.iter_mut().zip(src) {
        *t -= k * s;
    }
}

/// Column elimination restricted to the first `rows` entries of each column.
///
/// Returns pivot columns keyed by their pivot row (sorted ascending) and the
/// columns whose first `rows` entries vanished. Columns may carry extra
/// trailing entries, which are transformed along (used for kernels).
/// Pivot rows with their columns, and the remaining (reduced) columns.
type Elimination = (Vec<(usize, Vec<BigInt>)>, Vec<Vec<BigInt>>);

fn eliminate(rows: usize, cols: Vec<Vec<BigInt>>) -> Elimination {
    let mut active = cols;
    let mut pivots = Vec::new();
    for r in (0..rows).rev() {
        loop {
            let mut best: Option<usize> = None;
            let mut nonzero = 0;
            for (i, c) in active.iter().enumerate() {
                if !c[r].is_zero() {
                    nonzero += 1;
                    if best.is_none_or(|b| c[r].abs() < active[b][r].abs()) {
                        best = Some(i);
                    }
                }
            }
            let Some(b) = best else { break };
            if nonzero == 1 {
                let mut col = active.swap_remove(b);
                if col[r].is_negative() {
                    for x in col.iter_mut() {
                        *x = -&*x;
                    }
                }
                pivots.push((r, col));
                break;
            }
            let pivot_col = active[b].clone();
            for (i, c) in active.iter_mut().enumerate() {
                if i != b && !c[r].is_zero() {
                    let k = &c[r] / &pivot_col[r];
                    axpy(c, &k, &pivot_col);
                }
            }
        }
    }
    pivots.reverse();
    (pivots, active)
}

impl Lattice {
    /// Canonical lattice generated by the given columns.
    pub fn hnf(dim: usize, generators: &[Vec<BigInt>]) -> Result<Lattice> {
        for g in generators {
            check_dim(dim, g.len())?;
        }
        let cols: Vec<Vec<BigInt>> = generators
            .iter()
            .filter(|g| g.iter().any(|x| !x.is_zero()))
            .cloned()
            .collect();
        let (pivots, _) = eliminate(dim, cols);
        let mut basis: Vec<Vec<BigInt>> = Vec::with_capacity(pivots.len());
        let rows: Vec<usize> = pivots.iter().map(|(r, _)| *r).collect();
        for (j, (_, col)) in pivots.into_iter().enumerate() {
            let mut col = col;
            for i in (0..j).rev() {
                let p = rows[i];
                let k = col[p].div_floor(&basis[i][p]);
                axpy(&mut col, &k, &basis[i]);
            }
            basis.push(col);
        }
        Ok(Lattice { dim, basis })
    }

    /// Canonical lattice generated by integer points.
    pub fn from_points(dim: usize, generators: &[Point]) -> Result<Lattice> {
        let big: Vec<Vec<BigInt>> = generators
            .iter()
            .map(|g| g.iter().map(|&x| BigInt::from(x)).collect())
            .collect();
        Lattice::hnf(dim, &big)
    }

    pub(crate) fn from_points_unchecked(dim: usize, generators: &[Point]) -> Lattice {
        Lattice::from_points(dim, generators).expect("generator dimensions checked by caller")
    }

    pub fn zero(dim: usize) -> Lattice {
        Lattice { dim, basis: Vec::new() }
    }

    /// The whole group `Z^d`.
    pub fn full(dim: usize) -> Lattice {
        Lattice::diagonal(&vec![1; dim])
    }

    pub fn diagonal(diag: &[i64]) -> Lattice {
        let d = diag.len();
        let cols: Vec<Point> = (0..d)
            .map(|i| {
                let mut c = vec![0; d];
                c[i] = diag[i];
                c
            })
            .collect();
        Lattice::from_points_unchecked(d, &cols)
    }

    /// `m Z^d`.
    pub fn scaled_full(dim: usize, m: i64) -> Lattice {
        Lattice::diagonal(&vec![m; dim])
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn rank(&self) -> usize {
        self.basis.len()
    }

    pub fn is_full_rank(&self) -> bool {
        self.basis.len() == self.dim
    }

    /// Canonical basis columns.
    pub fn basis(&self) -> &[Vec<BigInt>] {
        &self.basis
    }

    /// Basis columns as machine integers; `None` if an entry does not fit.
    pub fn basis_points(&self) -> Option<Vec<Point>> {
        self.basis
            .iter()
            .map(|c| c.iter().map(|x| x.to_i64()).collect::<Option<Point>>())
            .collect()
    }

    /// Pivot row of each basis column.
    pub fn pivot_rows(&self) -> Vec<usize> {
        self.basis
            .iter()
            .map(|c| last_nonzero(c, self.dim).expect("basis columns are nonzero"))
            .collect()
    }

    pub fn pivots(&self) -> Vec<BigInt> {
        self.basis
            .iter()
            .zip(self.pivot_rows())
            .map(|(c, r)| c[r].clone())
            .collect()
    }

    pub fn index(&self) -> Index {
        if self.is_full_rank() {
            Index::Finite(self.pivots().into_iter().product())
        } else {
            Index::Infinite
        }
    }

    pub fn contains_big(&self, v: &[BigInt]) -> bool {
        if v.len() != self.dim {
            return false;
        }
        let mut w = v.to_vec();
        let rows = self.pivot_rows();
        let mut next = self.basis.len();
        for r in (0..self.dim).rev() {
            if next > 0 && rows[next - 1] == r {
                next -= 1;
                let col = &self.basis[next];
                let (k, rem) = w[r].div_rem(&col[r]);
                if !rem.is_zero() {
                    return false;
                }
                axpy(&mut w, &k, col);
            } else if !w[r].is_zero() {
                return false;
            }
        }
        true
    }

    pub fn contains(&self, v: &[i64]) -> bool {
        let big: Vec<BigInt> = v.iter().map(|&x| BigInt::from(x)).collect();
        self.contains_big(&big)
    }

    /// Whether `other` is a subgroup of `self`.
    pub fn contains_lattice(&self, other: &Lattice) -> bool {
        other.dim == self.dim && other.basis.iter().all(|c| self.contains_big(c))
    }

    /// Canonical residue of `v` in `Z^d / self`.
    pub fn reduce_big(&self, v: &[BigInt]) -> Result<Vec<BigInt>> {
        check_dim(self.dim, v.len())?;
        if !self.is_full_rank() {
            return Err(Error::RankDeficient { rank: self.rank(), dim: self.dim });
        }
        let mut w = v.to_vec();
        for i in (0..self.dim).rev() {
            let k = w[i].div_floor(&self.basis[i][i]);
            axpy(&mut w, &k, &self.basis[i]);
        }
        Ok(w)
    }

    pub fn reduce(&self, v: &[i64]) -> Result<Point> {
        let big: Vec<BigInt> = v.iter().map(|&x| BigInt::from(x)).collect();
        let r = self.reduce_big(&big)?;
        Ok(r.iter().map(|x| x.to_i64().expect("residues are bounded by pivots")).collect())
    }

    pub fn sum(&self, other: &Lattice) -> Result<Lattice> {
        check_dim(self.dim, other.dim)?;
        let mut gens = self.basis.clone();
        gens.extend(other.basis.iter().cloned());
        Lattice::hnf(self.dim, &gens)
    }

    pub fn intersect(&self, other: &Lattice) -> Result<Lattice> {
        check_dim(self.dim, other.dim)?;
        let (k1, k2) = (self.rank(), other.rank());
        let n = k1 + k2;
        // Kernel of [B1 | -B2] via column elimination on the matrix stacked over the identity.
        let mut cols = Vec::with_capacity(n);
        for (j, c) in self.basis.iter().chain(other.basis.iter()).enumerate() {
            let mut col: Vec<BigInt> = if j < k1 {
                c.clone()
            } else {
                c.iter().map(|x| -x).collect()
            };
            col.extend((0..n).map(|i| if i == j { BigInt::one() } else { BigInt::zero() }));
            cols.push(col);
        }
        let (_, kernel) = eliminate(self.dim, cols);
        let gens: Vec<Vec<BigInt>> = kernel
            .iter()
            .map(|kc| {
                let x = &kc[self.dim..self.dim + k1];
                (0..self.dim)
                    .map(|r| self.basis.iter().zip(x).map(|(c, xi)| &c[r] * xi).sum())
                    .collect()
            })
            .collect();
        Lattice::hnf(self.dim, &gens)
    }

    /// Integer solutions `x` of `M x = 0`, with `M` given by its columns
    /// (each of length `rows`).
    pub fn kernel(rows: usize, columns: &[Vec<BigInt>]) -> Result<Lattice> {
        let n = columns.len();
        let mut cols = Vec::with_capacity(n);
        for (j, c) in columns.iter().enumerate() {
            check_dim(rows, c.len())?;
            let mut col = c.clone();
            col.extend((0..n).map(|i| if i == j { BigInt::one() } else { BigInt::zero() }));
            cols.push(col);
        }
        let (_, kernel) = eliminate(rows, cols);
        let gens: Vec<Vec<BigInt>> = kernel.into_iter().map(|k| k[rows..].to_vec()).collect();
        Lattice::hnf(n, &gens)
    }

    /// `m * self`.
    pub fn scale(&self, m: i64) -> Lattice {
        let gens: Vec<Vec<BigInt>> = self
            .basis
            .iter()
            .map(|c| c.iter().map(|x| x * m).collect())
            .collect();
        Lattice::hnf(self.dim, &gens).expect("same dimension")
    }

    pub fn quotient(&self) -> Result<QuotientGroup> {
        QuotientGroup::new(self)
    }

    /// All full-rank sublattices of `Z^d` of index exactly `n`, sorted.
    pub fn enumerate_sublattices(d: usize, n: u64) -> Vec<Lattice> {
        let mut out = Vec::new();
        if n == 0 {
            return out;
        }
        let mut diag = Vec::with_capacity(d);
        diagonals(d, n, &mut diag, &mut |diag| {
            // Column j has free entries in rows i < j, ranging over [0, diag[i]).
            let slots: Vec<(usize, usize)> =
                (0..d).flat_map(|j| (0..j).map(move |i| (i, j))).collect();
            let mut digits = vec![0u64; slots.len()];
            loop {
                let mut m = vec![vec![BigInt::zero(); d]; d];
                for j in 0..d {
                    m[j][j] = BigInt::from(diag[j]);
                }
                for (s, &(i, j)) in slots.iter().enumerate() {
                    m[j][i] = BigInt::from(digits[s]);
                }
                out.push(Lattice { dim: d, basis: m });
                let mut s = 0;
                loop {
                    if s == slots.len() {
                        return;
                    }
                    digits[s] += 1;
                    if digits[s] < diag[slots[s].0] {
                        break;
                    }
                    digits[s] = 0;
                    s += 1;
                }
            }
        });
        out.sort();
        out
    }

    /// Lattice points in order of increasing sup-norm, lexicographic within a shell.
    pub fn points_by_norm(&self) -> impl Iterator<Item = Point> + '_ {
        point::shells(self.dim).filter(move |p| self.contains(p))
    }

    /// Rational density `1 / index`; zero for rank-deficient lattices.
    pub fn density(&self) -> BigRational {
        match self.index() {
            Index::Finite(n) => BigRational::new(BigInt::one(), n),
            Index::Infinite => BigRational::zero(),
        }
    }
}

fn diagonals(d: usize, n: u64, prefix: &mut Vec<u64>, f: &mut dyn FnMut(&[u64])) {
    if prefix.len() == d {
        if n == 1 {
            f(prefix);
        }
        return;
    }
    if prefix.len() + 1 == d {
        prefix.push(n);
        f(prefix);
        prefix.pop();
        return;
    }
    for a in 1..=n {
        if n.is_multiple_of(a) {
            prefix.push(a);
            diagonals(d, n / a, prefix, f);
            prefix.pop();
        }
    }
}

impl fmt::Display for Lattice {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "<")?;
        for (i, c) in self.basis.iter().enumerate() {
            if i > 0 {
                write!(f, ", ")?;
            }
            write!(f, "(")?;
            for (j, x) in c.iter().enumerate() {
                if j > 0 {
                    write!(f, ",")?;
                }
                write!(f, "{x}")?;
            }
            write!(f, ")")?;
        }
        write!(f, ">")
    }
}

/// `Z^d / L` for a full-rank lattice `L`, with residues in mixed-radix order.
///
/// Residue digits `r_i` range over `[0, pivot_i)`; the position of a residue
/// is `r_0 + p_0 (r_1 + p_1 (r_2 + ...))`, so residue 0 comes first.
#[derive(Clone, Debug)]
pub struct QuotientGroup {
    lattice: Lattice,
    cols: Vec<Vec<i128>>,
    pivots: Vec<i128>,
    radix: Vec<usize>,
    order: usize,
}

impl QuotientGroup {
    pub fn new(lattice: &Lattice) -> Result<QuotientGroup> {
        if !lattice.is_full_rank() {
            return Err(Error::RankDeficient { rank: lattice.rank(), dim: lattice.dim });
        }
        let index = lattice.index();
        let order = index
            .to_u64()
            .filter(|&n| n <= MAX_QUOTIENT_ORDER)
            .ok_or_else(|| Error::TooLarge(format!("quotient of order {index}")))? as usize;
        let cols: Vec<Vec<i128>> = lattice
            .basis
            .iter()
            .map(|c| c.iter().map(|x| x.to_i128().expect("bounded by quotient order")).collect())
            .collect();
        let pivots: Vec<i128> = (0..lattice.dim).map(|i| cols[i][i]).collect();
        let mut radix = Vec::with_capacity(lattice.dim);
        let mut acc = 1usize;
        for p in &pivots {
            radix.push(acc);
            acc *= *p as usize;
        }
        Ok(QuotientGroup { lattice: lattice.clone(), cols, pivots, radix, order })
    }

    pub fn lattice(&self) -> &Lattice {
        &self.lattice
    }

    pub fn dim(&self) -> usize {
        self.lattice.dim
    }

    pub fn order(&self) -> usize {
        self.order
    }

    fn reduce_wide(&self, v: &[i64]) -> Vec<i128> {
        let mut w: Vec<i128> = v.iter().map(|&x| x as i128).collect();
        for i in (0..w.len()).rev() {
            let k = w[i].div_euclid(self.pivots[i]);
            if k != 0 {
                for (r, c) in self.cols[i].iter().enumerate().take(i + 1) {
                    w[r] -= k * c;
                }
            }
        }
        w
    }

    /// Canonical residue of `v`.
    pub fn reduce(&self, v: &[i64]) -> Point {
        debug_assert_eq!(v.len(), self.dim());
        self.reduce_wide(v).into_iter().map(|x| x as i64).collect()
    }

    /// Position of the residue class of `v`.
    pub fn index_of(&self, v: &[i64]) -> usize {
        debug_assert_eq!(v.len(), self.dim());
        self.reduce_wide(v)
            .into_iter()
            .zip(&self.radix)
            .map(|(x, r)| x as usize * r)
            .sum()
    }

    /// Residue at a position.
    pub fn residue(&self, mut idx: usize) -> Point {
        self.pivots
            .iter()
            .map(|&p| {
                let p = p as usize;
                let digit = idx % p;
                idx /= p;
                digit as i64
            })
            .collect()
    }

    pub fn residues(&self) -> impl Iterator<Item = Point> + '_ {
        (0..self.order).map(move |i| self.residue(i))
    }

    /// Position of `residue(i) + v`.
    pub fn shift(&self, i: usize, v: &[i64]) -> usize {
        self.index_of(&point::add(&self.residue(i), v))
    }
}

/// A set `members + lattice` with a full-rank lattice; members are canonical
/// residues, sorted and distinct.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct PeriodicSet {
    lattice: Lattice,
    members: Vec<Point>,
}

impl PeriodicSet {
    /// Members are reduced modulo the lattice and deduplicated.
    pub fn new(lattice: Lattice, members: impl IntoIterator<Item = Point>) -> Result<PeriodicSet> {
        if !lattice.is_full_rank() {
            return Err(Error::RankDeficient { rank: lattice.rank(), dim: lattice.dim });
        }
        let mut out = Vec::new();
        for m in members {
            out.push(lattice.reduce(&m)?);
        }
        out.sort();
        out.dedup();
        Ok(PeriodicSet { lattice, members: out })
    }

    pub fn from_indices(q: &QuotientGroup, idx: impl IntoIterator<Item = usize>) -> PeriodicSet {
        let mut members: Vec<Point> = idx.into_iter().map(|i| q.residue(i)).collect();
        members.sort();
        members.dedup();
        PeriodicSet { lattice: q.lattice().clone(), members }
    }

    /// The whole group `Z^d`, presented on the given lattice.
    pub fn everything(lattice: Lattice) -> Result<PeriodicSet> {
        let q = lattice.quotient()?;
        Ok(PeriodicSet::from_indices(&q, 0..q.order()))
    }

    pub fn lattice(&self) -> &Lattice {
        &self.lattice
    }

    pub fn members(&self) -> &[Point] {
        &self.members
    }

    pub fn dim(&self) -> usize {
        self.lattice.dim
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    pub fn contains(&self, v: &[i64]) -> bool {
        match self.lattice.reduce(v) {
            Ok(r) => self.members.binary_search(&r).is_ok(),
            Err(_) => false,
        }
    }

    /// Membership mask indexed by residue position of `q`, whose lattice must be
    /// contained in this set's lattice.
    pub fn mask(&self, q: &QuotientGroup) -> Vec<bool> {
        if q.lattice() == &self.lattice {
            let mut mask = vec![false; q.order()];
            for m in &self.members {
                mask[q.index_of(m)] = true;
            }
            mask
        } else {
            (0..q.order()).map(|i| self.contains(&q.residue(i))).collect()
        }
    }

    /// Density `|members| / index`.
    pub fn density(&self) -> BigRational {
        BigRational::from_integer(BigInt::from(self.members.len())) * self.lattice.density()
    }

    /// The full group of periods `{v : A + v = A}`.
    pub fn stabilizer(&self) -> Lattice {
        let d = self.dim();
        let Some(first) = self.members.first() else {
            return Lattice::full(d);
        };
        let q = self.lattice.quotient().expect("periodic sets have enumerable quotients");
        let mask = self.mask(&q);
        let member_idx: Vec<usize> = self.members.iter().map(|m| q.index_of(m)).collect();
        // every period is a difference of members; candidates already in the
        // lattice found so far are skipped, so at most log2(index) succeed
        let mut periods = self.lattice.clone();
        for m in &self.members {
            let s = point::sub(m, first);
            if periods.contains(&s) {
                continue;
            }
            if member_idx.iter().all(|&i| mask[q.shift(i, &s)]) {
                let mut gens = periods.basis_points().expect("small lattice");
                gens.push(s);
                periods = Lattice::from_points_unchecked(d, &gens);
            }
        }
        periods
    }

    /// The same set presented on a sublattice of its lattice.
    pub fn refine(&self, sub: &Lattice) -> Result<PeriodicSet> {
        check_dim(self.dim(), sub.dim())?;
        if !self.lattice.contains_lattice(sub) {
            return Err(Error::InvalidInput(format!(
                "{sub} is not a sublattice of {}",
                self.lattice
            )));
        }
        let q = sub.quotient()?;
        let mask = self.mask(&q);
        Ok(PeriodicSet::from_indices(&q, (0..q.order()).filter(|&i| mask[i])))
    }

    /// The same set presented on its full stabilizer.
    pub fn canonical(&self) -> PeriodicSet {
        let stab = self.stabilizer();
        PeriodicSet::new(stab, self.members.iter().cloned()).expect("stabilizer contains the lattice")
    }

    /// Equality as subsets of `Z^d`.
    pub fn same_set(&self, other: &PeriodicSet) -> bool {
        self.dim() == other.dim() && self.canonical() == other.canonical()
    }

    pub fn translate(&self, v: &[i64]) -> PeriodicSet {
        PeriodicSet::new(self.lattice.clone(), self.members.iter().map(|m| point::add(m, v)))
            .expect("same lattice")
    }

    pub fn complement(&self) -> PeriodicSet {
        let q = self.lattice.quotient().expect("periodic sets have enumerable quotients");
        let mask = self.mask(&q);
        PeriodicSet::from_indices(&q, (0..q.order()).filter(|&i| !mask[i]))
    }
}
