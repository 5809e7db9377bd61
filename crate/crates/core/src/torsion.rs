//! Tilings of `Z x Z/pZ` for prime `p`.
//!
//! Functions on `Z/pZ` form the ring `Q[x]/(x^p - 1)` under convolution. A
//! non-empty proper `F0` gives a polynomial coprime to `x^p - 1`, so
//! `1_{F0}` has an inverse found by the extended Euclidean algorithm.

use std::collections::BTreeSet;
use std::fmt;

use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Zero};

use crate::error::{Error, Result};
use crate::function::rat;
use crate::lattice::{Lattice, PeriodicSet};
use crate::solve::{search_z_cotile, ZTiling};
use crate::tiles::Tile;
use crate::verify;

/// Largest modulus accepted.
pub const MAX_P: u64 = 1 << 16;

/// Dense polynomial over `Q`, lowest degree first, no trailing zeros.
#[derive(Clone, PartialEq, Eq, Default)]
pub struct QPoly(Vec<BigRational>);

impl fmt::Debug for QPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let terms: Vec<String> = self.0.iter().map(ToString::to_string).collect();
        write!(f, "QPoly[{}]", terms.join(", "))
    }
}

impl QPoly {
    pub fn new(mut coeffs: Vec<BigRational>) -> QPoly {
        while coeffs.last().is_some_and(Zero::is_zero) {
            coeffs.pop();
        }
        QPoly(coeffs)
    }

    pub fn constant(c: BigRational) -> QPoly {
        QPoly::new(vec![c])
    }

    /// `x^n - 1`.
    pub fn cyclic_modulus(n: usize) -> QPoly {
        let mut c = vec![BigRational::zero(); n + 1];
        c[0] = rat(-1);
        c[n] = rat(1);
        QPoly(c)
    }

    pub fn coeffs(&self) -> &[BigRational] {
        &self.0
    }

    pub fn is_zero(&self) -> bool {
        self.0.is_empty()
    }

    /// Degree, with `None` for the zero polynomial.
    pub fn degree(&self) -> Option<usize> {
        self.0.len().checked_sub(1)
    }

    fn lead(&self) -> &BigRational {
        self.0.last().expect("non-zero polynomial")
    }

    pub fn add(&self, o: &QPoly) -> QPoly {
        let n = self.0.len().max(o.0.len());
        let zero = BigRational::zero();
        QPoly::new((0..n).map(|i| self.0.get(i).unwrap_or(&zero) + o.0.get(i).unwrap_or(&zero)).collect())
    }

    pub fn sub(&self, o: &QPoly) -> QPoly {
        self.add(&o.scale(&rat(-1)))
    }

    pub fn scale(&self, k: &BigRational) -> QPoly {
        QPoly::new(self.0.iter().map(|c| c * k).collect())
    }

    pub fn mul(&self, o: &QPoly) -> QPoly {
        if self.is_zero() || o.is_zero() {
            return QPoly::default();
        }
        let mut c = vec![BigRational::zero(); self.0.len() + o.0.len() - 1];
        for (i, a) in self.0.iter().enumerate() {
            for (j, b) in o.0.iter().enumerate() {
                c[i + j] += a * b;
            }
        }
        QPoly::new(c)
    }

    /// Quotient and remainder; panics on division by zero.
    pub fn div_rem(&self, d: &QPoly) -> (QPoly, QPoly) {
        let dd = d.degree().expect("division by the zero polynomial");
        let mut r = self.0.clone();
        let mut q = vec![BigRational::zero(); self.0.len().saturating_sub(dd)];
        let inv = BigRational::one() / d.lead();
        while r.len() > dd && !r.is_empty() {
            let shift = r.len() - 1 - dd;
            let k = r.last().expect("checked") * &inv;
            for (i, c) in d.0.iter().enumerate() {
                r[shift + i] -= &k * c;
            }
            q[shift] = k;
            r.pop();
            while r.last().is_some_and(Zero::is_zero) {
                r.pop();
            }
        }
        (QPoly::new(q), QPoly::new(r))
    }

    /// `(g, s, t)` with `s a + t b = g`, `g` monic (or zero).
    pub fn ext_gcd(a: &QPoly, b: &QPoly) -> (QPoly, QPoly, QPoly) {
        let (mut r0, mut r1) = (a.clone(), b.clone());
        let (mut s0, mut s1) = (QPoly::constant(rat(1)), QPoly::default());
        let (mut t0, mut t1) = (QPoly::default(), QPoly::constant(rat(1)));
        while !r1.is_zero() {
            let (q, r) = r0.div_rem(&r1);
            let s = s0.sub(&q.mul(&s1));
            let t = t0.sub(&q.mul(&t1));
            (r0, r1) = (r1, r);
            (s0, s1) = (s1, s);
            (t0, t1) = (t1, t);
        }
        if r0.is_zero() {
            return (r0, s0, t0);
        }
        let inv = BigRational::one() / r0.lead();
        (r0.scale(&inv), s0.scale(&inv), t0.scale(&inv))
    }
}

fn is_prime(p: u64) -> bool {
    p >= 2 && (2..p).take_while(|k| k * k <= p).all(|k| !p.is_multiple_of(k))
}

fn check_prime(p: u64) -> Result<()> {
    if !is_prime(p) {
        return Err(Error::NotPrime(p));
    }
    if p > MAX_P {
        return Err(Error::TooLarge(format!("modulus {p}")));
    }
    Ok(())
}

/// A rational function on `Z/pZ`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CyclicFunction {
    p: u64,
    values: Vec<BigRational>,
}

impl CyclicFunction {
    pub fn new(p: u64, values: Vec<BigRational>) -> Result<CyclicFunction> {
        if values.len() as u64 != p {
            return Err(Error::InvalidInput(format!("expected {p} values, found {}", values.len())));
        }
        Ok(CyclicFunction { p, values })
    }

    pub fn delta(p: u64, at: u64) -> CyclicFunction {
        let mut values = vec![BigRational::zero(); p as usize];
        values[(at % p) as usize] = rat(1);
        CyclicFunction { p, values }
    }

    pub fn indicator(p: u64, set: &[u64]) -> CyclicFunction {
        let mut values = vec![BigRational::zero(); p as usize];
        for &s in set {
            values[(s % p) as usize] = rat(1);
        }
        CyclicFunction { p, values }
    }

    pub fn p(&self) -> u64 {
        self.p
    }

    pub fn values(&self) -> &[BigRational] {
        &self.values
    }

    pub fn at(&self, t: u64) -> &BigRational {
        &self.values[(t % self.p) as usize]
    }

    /// `(f * g)(t) = sum_s f(s) g(t - s)`.
    pub fn convolve(&self, other: &CyclicFunction) -> Result<CyclicFunction> {
        if self.p != other.p {
            return Err(Error::InvalidInput(format!("moduli {} and {} differ", self.p, other.p)));
        }
        let p = self.p as usize;
        let mut values = vec![BigRational::zero(); p];
        for (s, a) in self.values.iter().enumerate().filter(|(_, a)| !a.is_zero()) {
            for (u, b) in other.values.iter().enumerate() {
                values[(s + u) % p] += a * b;
            }
        }
        Ok(CyclicFunction { p: self.p, values })
    }

    fn to_poly(&self) -> QPoly {
        QPoly::new(self.values.clone())
    }

    fn from_poly(p: u64, poly: &QPoly) -> CyclicFunction {
        let (_, r) = poly.div_rem(&QPoly::cyclic_modulus(p as usize));
        let mut values = r.coeffs().to_vec();
        values.resize(p as usize, BigRational::zero());
        CyclicFunction { p, values }
    }
}

/// The convolution inverse of `1_{F0}` on `Z/pZ`.
pub fn ring_inverse(p: u64, f0: &[u64]) -> Result<CyclicFunction> {
    check_prime(p)?;
    let set: BTreeSet<u64> = f0.iter().map(|&s| s % p).collect();
    if set.is_empty() || set.len() as u64 == p {
        return Err(Error::EmptyOrFull { p });
    }
    let members: Vec<u64> = set.into_iter().collect();
    let poly = CyclicFunction::indicator(p, &members).to_poly();
    let (g, s, _) = QPoly::ext_gcd(&poly, &QPoly::cyclic_modulus(p as usize));
    debug_assert_eq!(g, QPoly::constant(rat(1)));
    Ok(CyclicFunction::from_poly(p, &s))
}

/// A finite subset of `Z x Z/pZ`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MixedTile {
    p: u64,
    points: BTreeSet<(i64, u64)>,
}

impl MixedTile {
    pub fn new(p: u64, points: impl IntoIterator<Item = (i64, u64)>) -> Result<MixedTile> {
        check_prime(p)?;
        let points: BTreeSet<(i64, u64)> = points.into_iter().map(|(n, t)| (n, t % p)).collect();
        if points.is_empty() {
            return Err(Error::EmptyTile);
        }
        Ok(MixedTile { p, points })
    }

    /// `F x Z/pZ`.
    pub fn full_fiber(p: u64, base: &Tile) -> Result<MixedTile> {
        if base.dim() != 1 {
            return Err(Error::DimensionMismatch { expected: 1, found: base.dim() });
        }
        MixedTile::new(p, base.points().iter().flat_map(|x| (0..p).map(move |t| (x[0], t))))
    }

    pub fn p(&self) -> u64 {
        self.p
    }

    pub fn points(&self) -> impl Iterator<Item = &(i64, u64)> {
        self.points.iter()
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// Residues occupied in column `n`.
    pub fn fiber(&self, n: i64) -> Vec<u64> {
        self.points.range((n, 0)..=(n, u64::MAX)).map(|&(_, t)| t).collect()
    }

    pub fn columns(&self) -> Vec<i64> {
        let cols: BTreeSet<i64> = self.points.iter().map(|&(n, _)| n).collect();
        cols.into_iter().collect()
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Classification {
    /// The tile is `base x Z/pZ`.
    FullFiber(Tile),
    Generic,
}

pub fn classify(tile: &MixedTile) -> Classification {
    let cols = tile.columns();
    if cols.iter().all(|&n| tile.fiber(n).len() as u64 == tile.p) {
        Classification::FullFiber(Tile::from_ints(&cols).expect("non-empty"))
    } else {
        Classification::Generic
    }
}

/// A periodic subset of `Z x Z/pZ`, stored as one periodic subset of `Z`
/// per residue: `fibers[t] = {n : (n, t) in A}`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MixedSet {
    p: u64,
    fibers: Vec<PeriodicSet>,
}

impl MixedSet {
    pub fn new(p: u64, fibers: Vec<PeriodicSet>) -> Result<MixedSet> {
        check_prime(p)?;
        if fibers.len() as u64 != p {
            return Err(Error::WrongArity { expected: p as usize, found: fibers.len() });
        }
        if let Some(f) = fibers.iter().find(|f| f.dim() != 1) {
            return Err(Error::DimensionMismatch { expected: 1, found: f.dim() });
        }
        Ok(MixedSet { p, fibers })
    }

    /// `{(n, g(n)) : n in base}` with `g` constant on each residue class of the base lattice.
    pub fn graph(p: u64, base: &PeriodicSet, label: impl Fn(i64) -> u64) -> Result<MixedSet> {
        let mut members = vec![Vec::new(); p as usize];
        for m in base.members() {
            members[(label(m[0]) % p) as usize].push(m.clone());
        }
        let fibers = members
            .into_iter()
            .map(|pts| PeriodicSet::new(base.lattice().clone(), pts))
            .collect::<Result<Vec<_>>>()?;
        MixedSet::new(p, fibers)
    }

    pub fn p(&self) -> u64 {
        self.p
    }

    pub fn fibers(&self) -> &[PeriodicSet] {
        &self.fibers
    }

    /// A common period of all fibers.
    pub fn period(&self) -> i64 {
        self.fibers.iter().fold(1i64, |acc, f| {
            let k = f.lattice().index().to_u64().expect("full rank") as i64;
            acc.lcm(&k)
        })
    }

    pub fn contains(&self, n: i64, t: u64) -> bool {
        self.fibers[(t % self.p) as usize].contains(&[n])
    }

    fn table(&self) -> Vec<Vec<bool>> {
        let per = self.period();
        (0..per).map(|n| (0..self.p).map(|t| self.contains(n, t)).collect()).collect()
    }
}

/// `1_F * 1_A` on one period, indexed `[n][t]`.
pub fn mixed_coverage(tile: &MixedTile, set: &MixedSet) -> Result<Vec<Vec<u32>>> {
    if tile.p != set.p {
        return Err(Error::InvalidInput(format!("moduli {} and {} differ", tile.p, set.p)));
    }
    let (p, per) = (set.p, set.period());
    let table = set.table();
    let mut out = vec![vec![0u32; p as usize]; per as usize];
    for (n, row) in out.iter_mut().enumerate() {
        for (t, c) in row.iter_mut().enumerate() {
            for &(m, s) in tile.points() {
                let a = (n as i64 - m).rem_euclid(per) as usize;
                let b = ((t as u64 + p - s) % p) as usize;
                *c += table[a][b] as u32;
            }
        }
    }
    Ok(out)
}

pub fn is_mixed_tiling(tile: &MixedTile, set: &MixedSet) -> Result<bool> {
    Ok(mixed_coverage(tile, set)?.iter().flatten().all(|&c| c == 1))
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TorsionVerdict {
    pub classification: Classification,
    /// Smallest `(n, t)` with `n > 0` and `A + (n, t) = A`.
    pub period: (i64, u64),
    /// For full-fiber tiles: the projection of `A` to `Z` and whether it tiles with the base.
    pub projection: Option<(PeriodicSet, bool)>,
    /// For full-fiber tiles: whether the base admits a periodic co-tile by exhaustive search.
    pub base_tiles: Option<bool>,
    /// For generic tiles: whether `A` is recovered from `1_{F^Tor} * 1_A` with the ring inverse.
    pub recovered: Option<bool>,
}

fn smallest_period(set: &MixedSet) -> (i64, u64) {
    let table = set.table();
    let per = set.period();
    for n in 1..=per {
        for t in 0..set.p {
            let ok = (0..per).all(|m| {
                (0..set.p).all(|s| {
                    table[m as usize][s as usize]
                        == table[((m + n) % per) as usize][((s + t) % set.p) as usize]
                })
            });
            if ok {
                return (n, t);
            }
        }
    }
    unreachable!("the common period is always a period")
}

/// Structure of a co-tile `A` of `F` in `Z x Z/pZ`.
pub fn cotile_conclusion(tile: &MixedTile, set: &MixedSet) -> Result<TorsionVerdict> {
    if !is_mixed_tiling(tile, set)? {
        return Err(Error::NotACotile("1_F * 1_A is not identically 1".into()));
    }
    let classification = classify(tile);
    let period = smallest_period(set);
    let mut verdict = TorsionVerdict { classification: classification.clone(), period, projection: None, base_tiles: None, recovered: None };
    match classification {
        Classification::FullFiber(base) => {
            let per = set.period();
            let lat = Lattice::diagonal(&[per]);
            let mut members = Vec::new();
            for n in 0..per {
                let k = (0..set.p).filter(|&t| set.contains(n, t)).count();
                if k > 1 {
                    return Err(Error::VerificationFailed(format!("column {n} meets A {k} times")));
                }
                if k == 1 {
                    members.push(vec![n]);
                }
            }
            let proj = PeriodicSet::new(lat, members)?;
            let ok = verify::tiles(&base, &proj);
            verdict.projection = Some((proj, ok));
            verdict.base_tiles = Some(matches!(search_z_cotile(&base)?, ZTiling::Tiles { .. }));
        }
        Classification::Generic => {
            let n0 = *tile.columns().iter().find(|&&n| (tile.fiber(n).len() as u64) < tile.p).expect("generic");
            let f0 = tile.fiber(n0);
            let g = ring_inverse(set.p, &f0)?;
            let ind = CyclicFunction::indicator(set.p, &f0);
            let mut ok = true;
            for n in 0..set.period() {
                let column = CyclicFunction::new(
                    set.p,
                    (0..set.p).map(|t| if set.contains(n, t) { rat(1) } else { rat(0) }).collect(),
                )?;
                let h = ind.convolve(&column)?;
                ok &= g.convolve(&h)? == column;
            }
            verdict.recovered = Some(ok);
        }
    }
    Ok(verdict)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q(a: i64, b: i64) -> BigRational {
        rat(a) / rat(b)
    }

    #[test]
    fn inverse_examples() {
        for p in [2, 3, 5] {
            assert_eq!(ring_inverse(p, &[0]).unwrap(), CyclicFunction::delta(p, 0));
        }
        assert_eq!(ring_inverse(2, &[1]).unwrap(), CyclicFunction::delta(2, 1));
        let g = ring_inverse(3, &[0, 1]).unwrap();
        assert_eq!(g.values(), &[q(1, 2), q(-1, 2), q(1, 2)]);
        assert_eq!(g.convolve(&CyclicFunction::indicator(3, &[0, 1])).unwrap(), CyclicFunction::delta(3, 0));
    }

    #[test]
    fn inverse_errors() {
        assert_eq!(ring_inverse(4, &[0]), Err(Error::NotPrime(4)));
        assert_eq!(ring_inverse(1, &[0]), Err(Error::NotPrime(1)));
        assert_eq!(ring_inverse(3, &[]), Err(Error::EmptyOrFull { p: 3 }));
        assert_eq!(ring_inverse(3, &[0, 1, 2]), Err(Error::EmptyOrFull { p: 3 }));
    }

    #[test]
    fn euclid_identity() {
        let a = QPoly::new(vec![rat(1), rat(1)]);
        let b = QPoly::cyclic_modulus(3);
        let (g, s, t) = QPoly::ext_gcd(&a, &b);
        assert_eq!(g, QPoly::constant(rat(1)));
        assert_eq!(s.mul(&a).add(&t.mul(&b)), g);
        let (qq, r) = b.div_rem(&a);
        assert_eq!(qq.mul(&a).add(&r), b);
    }

    #[test]
    fn classification() {
        let base = Tile::from_ints(&[0, 1]).unwrap();
        let full = MixedTile::full_fiber(3, &base).unwrap();
        assert_eq!(classify(&full), Classification::FullFiber(base));
        assert_eq!(classify(&MixedTile::new(3, [(0, 0)]).unwrap()), Classification::Generic);
        assert_eq!(classify(&MixedTile::new(2, [(0, 0), (0, 1), (1, 0)]).unwrap()), Classification::Generic);
        assert!(matches!(MixedTile::new(6, [(0, 0)]), Err(Error::NotPrime(6))));
    }

    #[test]
    fn full_fiber_cotile_with_moving_labels() {
        // One point per column, the residue cycling with period 3.
        let tile = MixedTile::full_fiber(3, &Tile::from_ints(&[1]).unwrap()).unwrap();
        let base = PeriodicSet::new(Lattice::diagonal(&[3]), [vec![0], vec![1], vec![2]]).unwrap();
        let a = MixedSet::graph(3, &base, |n| (n * n) as u64).unwrap();
        let v = cotile_conclusion(&tile, &a).unwrap();
        let (proj, ok) = v.projection.unwrap();
        assert!(ok);
        assert!(proj.same_set(&PeriodicSet::everything(Lattice::full(1)).unwrap()));
        assert_eq!(v.base_tiles, Some(true));
        assert_eq!(v.period.0, 3);
    }

    #[test]
    fn generic_pair_fiber() {
        // Column 0 holds the proper fiber {0, 1}, so the ring inverse is not a delta.
        let tile = MixedTile::new(3, [(0, 0), (0, 1), (1, 2)]).unwrap();
        let row = PeriodicSet::everything(Lattice::full(1)).unwrap();
        let empty = PeriodicSet::new(Lattice::full(1), []).unwrap();
        let a = MixedSet::new(3, vec![row.clone(), empty.clone(), empty.clone()]).unwrap();
        let v = cotile_conclusion(&tile, &a).unwrap();
        assert_eq!(v.classification, Classification::Generic);
        assert_eq!(v.period, (1, 0));
        assert_eq!(v.recovered, Some(true));

        let two_fiber = MixedTile::new(2, [(0, 0), (0, 1)]).unwrap();
        assert!(matches!(classify(&two_fiber), Classification::FullFiber(_)));
        let half = MixedSet::new(2, vec![row, empty]).unwrap();
        assert_eq!(cotile_conclusion(&two_fiber, &half).unwrap().projection.map(|p| p.1), Some(true));
    }

    #[test]
    fn singleton_and_rejection() {
        let tile = MixedTile::new(3, [(0, 0)]).unwrap();
        let all = PeriodicSet::everything(Lattice::full(1)).unwrap();
        let a = MixedSet::new(3, vec![all.clone(), all.clone(), all.clone()]).unwrap();
        let v = cotile_conclusion(&tile, &a).unwrap();
        assert_eq!(v.period, (1, 0));
        assert_eq!(v.recovered, Some(true));
        let pair = MixedTile::new(3, [(0, 0), (1, 0)]).unwrap();
        assert!(matches!(cotile_conclusion(&pair, &a), Err(Error::NotACotile(_))));
    }
}
