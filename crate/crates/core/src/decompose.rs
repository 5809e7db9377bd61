//! Periodic decomposition of joint co-tile functions.
//!
//! For an integer-valued periodic `f` with `1_{F_i} * f = l_i`, every chain
//! `(v_1, .., v_i)` with `v_j` a nonzero point of `F_j` gets a function
//! `phi` obtained by averaging `f(x - sum_j (1 + n_j q) v_j)` over the `n_j`.
//! Because `f` is periodic the averaged sequence is periodic in each `n_j`,
//! so the limit is an exact average over one multi-period.

use std::collections::BTreeMap;

use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use rayon::prelude::*;

use crate::analysis::{has_property_star, RationalSubspace, SpanClassification};
use crate::error::{Error, Result};
use crate::function::{rat, PeriodicFunction};
use crate::lattice::{Lattice, QuotientGroup};
use crate::point::{self, Point};
use crate::tiles::{Tile, TileTuple};
use crate::verify;

/// Upper bound on terms summed by the direct finite-average cross-check.
const FINITE_AVERAGE_BUDGET: u64 = 4_000_000;

fn checked_primorial(n: u64) -> Result<u64> {
    let mut q: u64 = 1;
    for p in 2..=n {
        if (2..p).take_while(|k| k * k <= p).all(|k| p % k != 0) {
            q = q.checked_mul(p).ok_or_else(|| Error::TooLarge(format!("primorial of {n}")))?;
        }
    }
    Ok(q)
}

fn integer_range(f: &PeriodicFunction) -> Result<u64> {
    if !f.is_integer_valued() {
        return Err(Error::NonIntegerValues);
    }
    let w = f.max() - f.min();
    w.to_integer().try_into().map_err(|_| Error::TooLarge("range of f".into()))
}

/// Product of the primes up to `(max f - min f) * s`.
pub fn compute_q(f: &PeriodicFunction, s: u64) -> Result<u64> {
    let w = integer_range(f)?;
    let n = w.checked_mul(s).ok_or_else(|| Error::TooLarge("range times size".into()))?;
    checked_primorial(n)
}

/// Whether `1_{rF} * f = level`, after confirming `1_F * f = level`.
///
/// For `r = 1 mod compute_q(f, |F|)` the answer is always true; other `r`
/// are allowed as probes.
pub fn dilation_check(tile: &Tile, f: &PeriodicFunction, level: &BigRational, r: i64) -> Result<bool> {
    if !verify::is_level_tiling(&tile.indicator(), f, level)?.ok {
        return Err(Error::PreconditionUnverified(format!("1_F * f is not identically {level}")));
    }
    Ok(verify::is_level_tiling(&tile.dilate(r).indicator(), f, level)?.ok)
}

/// Smallest `m > 0` with `m v` in the lattice of `q`.
fn element_order(q: &QuotientGroup, v: &[i64]) -> u64 {
    let start = q.index_of(v);
    let mut cur = start;
    let mut m = 1;
    while cur != 0 {
        cur = q.shift(cur, v);
        m += 1;
    }
    m
}

pub type Chain = Vec<Point>;

#[derive(Clone, Debug)]
pub struct DecompositionTree {
    pub tuple: TileTuple,
    /// Level of each tile's equation (all 1 for joint co-tiles).
    pub levels: Vec<BigRational>,
    pub cotile_fn: PeriodicFunction,
    pub q: u64,
    /// Every chain of length `1..=k`, each presented on the lattice of `cotile_fn`.
    pub nodes: BTreeMap<Chain, PeriodicFunction>,
}

impl DecompositionTree {
    pub fn depth(&self) -> usize {
        self.tuple.len()
    }

    /// The function at a chain; the empty chain is `f` itself.
    pub fn node(&self, chain: &[Point]) -> Option<&PeriodicFunction> {
        if chain.is_empty() {
            Some(&self.cotile_fn)
        } else {
            self.nodes.get(chain)
        }
    }

    pub fn chains_at(&self, i: usize) -> impl Iterator<Item = (&Chain, &PeriodicFunction)> {
        self.nodes.iter().filter(move |(c, _)| c.len() == i)
    }

    /// `sum_{j<=i} (-1)^{j-1} l_j prod_{s<j} |F_s^*|`.
    pub fn constant(&self, i: usize) -> BigRational {
        let mut total = BigRational::zero();
        let mut prod = BigRational::one();
        for j in 0..i {
            let term = &self.levels[j] * &prod;
            if j % 2 == 0 {
                total += term;
            } else {
                total -= term;
            }
            prod *= rat(self.tuple.tiles()[j].len() as i64 - 1);
        }
        total
    }
}

/// Decomposition for a joint co-tile function (`1_{F_i} * f = 1` for all `i`).
pub fn build_decomposition(tuple: &TileTuple, f: &PeriodicFunction) -> Result<DecompositionTree> {
    build_level_decomposition(tuple, &vec![1; tuple.len()], f)
}

/// Decomposition for `1_{F_i} * f = levels[i]`.
pub fn build_level_decomposition(tuple: &TileTuple, levels: &[i64], f: &PeriodicFunction) -> Result<DecompositionTree> {
    if levels.len() != tuple.len() {
        return Err(Error::WrongArity { expected: tuple.len(), found: levels.len() });
    }
    if let Some(l) = levels.iter().find(|&&l| l < 1) {
        return Err(Error::InvalidInput(format!("level {l} is not a positive integer")));
    }
    crate::error::check_dim(tuple.dim(), f.dim())?;
    let levels: Vec<BigRational> = levels.iter().map(|&l| rat(l)).collect();
    for (i, (t, l)) in tuple.iter().zip(&levels).enumerate() {
        if !verify::is_level_tiling(&t.indicator(), f, l)?.ok {
            return Err(Error::NotACotile(format!("1_F * f is not {l} for tile {i}")));
        }
    }
    let max_level = levels.iter().map(|l| l.to_integer()).max().expect("non-empty tuple");
    let max_size = tuple.iter().map(Tile::len).max().expect("non-empty tuple") as u64;
    let s = u64::try_from(max_level).map_err(|_| Error::TooLarge("level".into()))? * max_size;
    let q = compute_q(f, s)?;

    let quotient = f.quotient().clone();
    let mut nodes: BTreeMap<Chain, PeriodicFunction> = BTreeMap::new();
    let mut frontier: Vec<(Chain, PeriodicFunction)> = vec![(Vec::new(), f.clone())];
    for tile in tuple.iter() {
        let starred = tile.starred();
        let (starred, quotient) = (&starred, &quotient);
        let next: Vec<(Chain, PeriodicFunction)> = frontier
            .par_iter()
            .flat_map_iter(|(chain, parent)| {
                starred.iter().map(move |v| {
                    let mut c = chain.clone();
                    c.push(v.clone());
                    (c, average_over_orbit(parent, quotient, q, v))
                })
            })
            .collect();
        for (c, phi) in &next {
            nodes.insert(c.clone(), phi.clone());
        }
        frontier = next;
    }
    Ok(DecompositionTree { tuple: tuple.clone(), levels, cotile_fn: f.clone(), q, nodes })
}

/// Average of `x -> g(x - (1 + n q) v)` over one period of `n`.
fn average_over_orbit(g: &PeriodicFunction, quotient: &QuotientGroup, q: u64, v: &[i64]) -> PeriodicFunction {
    let ord = element_order(quotient, v);
    let qv = point::scale(v, (q % ord) as i64);
    let m = element_order(quotient, &qv);
    let mut sum = vec![BigRational::zero(); quotient.order()];
    let mut shift = point::add(v, &qv);
    for _ in 0..m {
        let s = g.shift(&shift);
        for (acc, x) in sum.iter_mut().zip(s.values()) {
            *acc += x;
        }
        shift = quotient.residue(quotient.index_of(&point::add(&shift, &qv)));
    }
    let inv = BigRational::new(1.into(), (m as i64).into());
    PeriodicFunction::from_quotient(quotient.clone(), sum.into_iter().map(|x| x * &inv).collect())
}

/// The finite average `N^{-i} sum_{n_1..n_i = 1..N} f(x - sum_j (1 + n_j q) v_j)`,
/// summed term by term.
pub fn finite_average(f: &PeriodicFunction, q: u64, chain: &[Point], n: u64) -> PeriodicFunction {
    let quotient = f.quotient();
    let mut offsets: Vec<Point> = vec![vec![0; f.dim()]];
    for v in chain {
        let mut next = Vec::with_capacity(offsets.len() * n as usize);
        for o in &offsets {
            for k in 1..=n {
                let ord = element_order(quotient, v);
                let coef = (1 + (k % ord) * (q % ord)) as i64;
                let t = point::add(o, &point::scale(v, coef));
                next.push(quotient.residue(quotient.index_of(&t)));
            }
        }
        offsets = next;
    }
    let denom = BigRational::from_integer(num_bigint::BigInt::from(n).pow(chain.len() as u32));
    let values = (0..quotient.order())
        .map(|i| {
            let x = quotient.residue(i);
            let total: BigRational = offsets.iter().map(|o| f.at(&point::sub(&x, o)).clone()).sum();
            total / &denom
        })
        .collect();
    PeriodicFunction::from_quotient(quotient.clone(), values)
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct DecompositionReport {
    /// Every value lies in `[min f, max f]`.
    pub range: bool,
    /// `phi_c = l_{i+1} - sum_v phi_{c,v}` for chains shorter than the tuple.
    pub recursion: bool,
    /// `f = (-1)^i sum phi + constant(i)` at every depth.
    pub reconstruction: bool,
    /// `q v_j` is a period of `phi_{v_1..v_i}` for each `j`.
    pub periods: bool,
    /// `1_{F_j} * phi = l_j` for every node and tile.
    pub tiling: bool,
    /// Mean of each node is `l_j / |F_j|`.
    pub mean: bool,
    /// Direct finite average at a full multi-period matches; `None` when too large to run.
    pub finite_average: Option<bool>,
    pub violations: Vec<String>,
}

impl DecompositionReport {
    pub fn ok(&self) -> bool {
        self.range
            && self.recursion
            && self.reconstruction
            && self.periods
            && self.tiling
            && self.mean
            && self.finite_average != Some(false)
    }
}

fn fmt_chain(c: &[Point]) -> String {
    format!("{c:?}")
}

pub fn verify_decomposition(tree: &DecompositionTree) -> DecompositionReport {
    let f = &tree.cotile_fn;
    let (lo, hi) = (f.min(), f.max());
    let mut viol = Vec::new();
    let k = tree.depth();
    let tiles = tree.tuple.tiles();

    let mut range = true;
    for (c, phi) in &tree.nodes {
        if phi.min() < lo || phi.max() > hi {
            range = false;
            viol.push(format!("range: {} leaves [{lo}, {hi}]", fmt_chain(c)));
        }
    }

    let mut recursion = true;
    let mut heads: Vec<Chain> = vec![Vec::new()];
    heads.extend(tree.nodes.keys().filter(|c| c.len() < k).cloned());
    for c in heads.iter().filter(|c| !c.is_empty()) {
        let i = c.len();
        let mut rhs = PeriodicFunction::constant(f.dim(), tree.levels[i].clone());
        for v in tiles[i].starred() {
            let mut child = c.clone();
            child.push(v);
            match tree.nodes.get(&child) {
                Some(phi) => rhs = rhs.sub(phi).expect("same dimension"),
                None => {
                    recursion = false;
                    viol.push(format!("recursion: missing chain {}", fmt_chain(&child)));
                }
            }
        }
        if !tree.nodes[c].same_function(&rhs) {
            recursion = false;
            viol.push(format!("recursion: fails at {}", fmt_chain(c)));
        }
    }

    let mut reconstruction = true;
    for i in 1..=k {
        let mut sum = PeriodicFunction::constant(f.dim(), BigRational::zero());
        for (_, phi) in tree.chains_at(i) {
            sum = sum.add(phi).expect("same dimension");
        }
        let sign = if i % 2 == 0 { rat(1) } else { rat(-1) };
        let c = tree.constant(i);
        let rhs = sum.map(|x| x * &sign + &c);
        if !f.same_function(&rhs) {
            reconstruction = false;
            viol.push(format!("reconstruction: fails at depth {i}"));
        }
    }

    let mut periods = true;
    for (c, phi) in &tree.nodes {
        for v in c {
            if !phi.is_invariant_under(&point::scale(v, tree.q as i64)) {
                periods = false;
                viol.push(format!("periods: q{v:?} is not a period of {}", fmt_chain(c)));
            }
        }
    }

    let mut tiling = true;
    let mut mean = true;
    for (c, phi) in &tree.nodes {
        for (j, (t, l)) in tiles.iter().zip(&tree.levels).enumerate() {
            let ok = verify::is_level_tiling(&t.indicator(), phi, l).map(|r| r.ok).unwrap_or(false);
            if !ok {
                tiling = false;
                viol.push(format!("tiling: tile {j} fails on {}", fmt_chain(c)));
            }
            if verify::mean(phi) != l / rat(t.len() as i64) {
                mean = false;
                viol.push(format!("mean: tile {j} on {}", fmt_chain(c)));
            }
        }
    }

    let finite_average = finite_average_check(tree, &mut viol);

    DecompositionReport { range, recursion, reconstruction, periods, tiling, mean, finite_average, violations: viol }
}

fn finite_average_check(tree: &DecompositionTree, viol: &mut Vec<String>) -> Option<bool> {
    let f = &tree.cotile_fn;
    let quotient = f.quotient();
    let mut n: u64 = 1;
    for t in tree.tuple.iter() {
        for v in t.starred() {
            let ord = element_order(quotient, &v);
            let qv = point::scale(&v, (tree.q % ord) as i64);
            n = n.lcm(&element_order(quotient, &qv));
        }
    }
    let order = quotient.order() as u64;
    let mut work: u64 = 0;
    for c in tree.nodes.keys() {
        let terms = n.checked_pow(c.len() as u32)?;
        work = work.checked_add(terms.checked_mul(order)?)?;
    }
    if work > FINITE_AVERAGE_BUDGET {
        return None;
    }
    let mut ok = true;
    for (c, phi) in &tree.nodes {
        if finite_average(f, tree.q, c, n).values() != phi.values() {
            ok = false;
            viol.push(format!("finite average at N = {n} differs on {}", fmt_chain(c)));
        }
    }
    Some(ok)
}

/// Sums of the deepest decomposition functions grouped by the hyperplane
/// their chain spans.
#[derive(Clone, Debug)]
pub struct PsiDecomposition {
    pub psi: BTreeMap<RationalSubspace, PeriodicFunction>,
    /// `l - phi_h = sum of psi_V` over the hyperplanes with head `h`, for every head.
    pub partition_ok: bool,
    /// Each `psi_V` has the head's `q v_j` as periods and a rank `d-1` period lattice inside `V`.
    pub rank_ok: bool,
}

pub fn psi_by_span(tree: &DecompositionTree, classes: &SpanClassification) -> Result<PsiDecomposition> {
    let d = tree.tuple.dim();
    if d < 2 || tree.depth() != d - 1 {
        return Err(Error::WrongArity { expected: d.saturating_sub(1), found: tree.depth() });
    }
    if !has_property_star(&tree.tuple)? {
        return Err(Error::PropertyStarRequired);
    }
    let head_len = d - 2;
    let mut psi = BTreeMap::new();
    let mut by_head: BTreeMap<Chain, Vec<RationalSubspace>> = BTreeMap::new();
    for (space, members) in &classes.classes {
        let head = members[0][..head_len].to_vec();
        if members.iter().any(|m| m[..head_len] != head[..]) {
            return Err(Error::PropertyStarRequired);
        }
        let mut sum = PeriodicFunction::constant(d, BigRational::zero());
        for m in members {
            let phi = tree
                .nodes
                .get(m)
                .ok_or_else(|| Error::InvalidInput(format!("chain {m:?} is not in the tree")))?;
            sum = sum.add(phi)?;
        }
        psi.insert(space.clone(), sum);
        by_head.entry(head).or_default().push(space.clone());
    }

    let level = &tree.levels[d - 2];
    let mut partition_ok = true;
    for (head, spaces) in &by_head {
        let phi_h = tree.node(head).ok_or_else(|| Error::InvalidInput(format!("chain {head:?} missing")))?;
        let lhs = phi_h.map(|x| level - x);
        let mut rhs = PeriodicFunction::constant(d, BigRational::zero());
        for s in spaces {
            rhs = rhs.add(&psi[s])?;
        }
        partition_ok &= lhs.same_function(&rhs);
    }
    let heads_seen: usize = by_head.len();
    let expected_heads: usize = tree.tuple.tiles()[..head_len].iter().map(|t| t.len() - 1).product();
    partition_ok &= heads_seen == expected_heads;

    let mut rank_ok = true;
    for (space, g) in &psi {
        let head = &by_head.iter().find(|(_, s)| s.contains(space)).expect("indexed above").0;
        for v in head.iter() {
            rank_ok &= g.is_invariant_under(&point::scale(v, tree.q as i64));
        }
        let inside = g.stabilizer().intersect(&space.integer_points())?;
        rank_ok &= inside.rank() == d - 1;
    }
    Ok(PsiDecomposition { psi, partition_ok, rank_ok })
}

/// `D_v f (w) = f(w) - f(w - v)`.
pub fn discrete_derivative(f: &PeriodicFunction, v: &[i64]) -> PeriodicFunction {
    f.sub(&f.shift(v)).expect("same lattice")
}

fn multisets(n: usize, size: usize) -> Vec<Vec<usize>> {
    fn go(n: usize, size: usize, start: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == size {
            out.push(cur.clone());
            return;
        }
        for i in start..n {
            cur.push(i);
            go(n, size, i, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    go(n, size, 0, &mut Vec::new(), &mut out);
    out
}

/// Whether every `(r+1)`-fold product of derivatives along `gamma` kills `f`.
///
/// Only products of basis generators are tested. Derivatives and translations
/// commute, `D_{u+w} = D_u + D_w - D_u D_w` and `D_{-u} = -T_{-u} D_u`, so any
/// `D_v` with `v` in `gamma` is a sum of translated generator monomials of
/// degree at least one.
pub fn is_polynomial_map(f: &PeriodicFunction, gamma: &Lattice, r: usize) -> Result<bool> {
    crate::error::check_dim(f.dim(), gamma.dim())?;
    if !gamma.is_full_rank() {
        return Err(Error::RankDeficient { rank: gamma.rank(), dim: gamma.dim() });
    }
    let gens = gamma.basis_points().ok_or_else(|| Error::TooLarge("lattice basis".into()))?;
    let mut memo: BTreeMap<Vec<usize>, PeriodicFunction> = BTreeMap::new();
    memo.insert(Vec::new(), f.clone());
    for m in multisets(gens.len(), r + 1) {
        let mut g = f.clone();
        let mut prefix = Vec::new();
        for &i in &m {
            prefix.push(i);
            g = match memo.get(&prefix) {
                Some(h) => h.clone(),
                None => {
                    let h = discrete_derivative(&g, &gens[i]);
                    memo.insert(prefix.clone(), h.clone());
                    h
                }
            };
        }
        if g.values().iter().any(|x| !x.is_zero()) {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Instance check of "a bounded polynomial map with respect to a full-rank
/// lattice is constant on its cosets": true unless `f` is polynomial of
/// degree at most `r` along `gamma` yet not `gamma`-invariant.
pub fn bounded_poly_is_constant_check(f: &PeriodicFunction, gamma: &Lattice, r: usize) -> Result<bool> {
    if !is_polynomial_map(f, gamma, r)? {
        return Ok(true);
    }
    Ok(gamma.basis_points().ok_or_else(|| Error::TooLarge("lattice basis".into()))?.iter().all(|g| f.is_invariant_under(g)))
}

/// Whether the values of `f` stay within `[lo, hi]`.
pub fn within(f: &PeriodicFunction, lo: &BigRational, hi: &BigRational) -> bool {
    f.values().iter().all(|x| x >= lo && x <= hi)
}

/// Largest absolute value taken by `f`.
pub fn sup_abs(f: &PeriodicFunction) -> BigRational {
    f.values().iter().map(|x| x.abs()).max().expect("non-empty")
}
