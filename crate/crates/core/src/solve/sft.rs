//! Lifting co-tiles with a rank `d-1` group of periods to fully periodic ones.
//!
//! Fix `Γ0` of rank `d-1` and a vector `v` outside its span, so that
//! `L' = Γ0 ⊕ Zv` has finite index with fundamental domain `D`. A
//! `Γ0`-invariant set `x` is determined by the blocks `y_n = x|(D + nv)`,
//! and the tiling equations become sliding-window constraints on the
//! sequence `(y_n)`: a shift of finite type over the alphabet `{0,1}^D`.
//! A repeated window state along the input sequence gives a periodic
//! sequence satisfying the same constraints.

use std::collections::{HashMap, HashSet};
use std::fmt;
use std::sync::Arc;

use num_bigint::BigInt;
use num_traits::ToPrimitive;

use crate::analysis;
use crate::error::{check_dim, Error, Result};
use crate::function::PeriodicFunction;
use crate::lattice::{Lattice, PeriodicSet, QuotientGroup};
use crate::point::{self, Point};
use crate::tiles::{Tile, TileTuple};
use crate::verify;

/// Membership oracle for a subset of `Z^d`.
pub type Membership = Arc<dyn Fn(&[i64]) -> bool + Send + Sync>;

/// Oracle for a periodic set.
pub fn membership(set: &PeriodicSet) -> Membership {
    let set = set.clone();
    Arc::new(move |x: &[i64]| set.contains(x))
}

/// Steps walked along the input before giving up on finding a repeated state.
pub const MAX_WALK: usize = 1 << 20;

/// A sum constraint on one window: the number of set cells among `cells`
/// (pairs of block offset and cell) must equal `target`.
#[derive(Clone, Debug, PartialEq, Eq)]
struct WindowConstraint {
    cells: Vec<(usize, usize)>,
    target: i64,
}

/// Sliding-window constraints on sequences of blocks, each block a bitmask
/// over `block_size` cells.
#[derive(Clone, PartialEq, Eq)]
pub struct BlockGraph {
    block_size: usize,
    width: usize,
    constraints: Vec<WindowConstraint>,
}

impl fmt::Debug for BlockGraph {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("BlockGraph")
            .field("block_size", &self.block_size)
            .field("width", &self.width)
            .field("constraints", &self.constraints.len())
            .finish()
    }
}

/// A periodic block sequence: `blocks` repeated forever, with `blocks[0]`
/// sitting at position `start`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Cycle {
    pub start: i64,
    pub blocks: Vec<u64>,
}

impl Cycle {
    pub fn period(&self) -> usize {
        self.blocks.len()
    }

    pub fn at(&self, n: i64) -> u64 {
        let p = self.blocks.len() as i64;
        self.blocks[(n - self.start).rem_euclid(p) as usize]
    }
}

impl BlockGraph {
    pub fn block_size(&self) -> usize {
        self.block_size
    }

    /// Number of consecutive blocks a constraint window spans.
    pub fn width(&self) -> usize {
        self.width
    }

    /// Whether `window` (exactly `width` blocks) satisfies every constraint.
    pub fn window_ok(&self, window: &[u64]) -> bool {
        self.constraints.iter().all(|c| {
            let s: i64 = c.cells.iter().map(|&(o, k)| ((window[o] >> k) & 1) as i64).sum();
            s == c.target
        })
    }

    /// Walks the sequence `n -> path(n)` from `n = 0` until a state of
    /// `width - 1` consecutive blocks repeats. Fails if a window along the way
    /// violates the constraints or no repeat occurs within `max_steps`.
    pub fn walk_cycle(&self, path: impl Fn(i64) -> u64, max_steps: usize) -> Result<Cycle> {
        let w = self.width;
        let mut blocks: Vec<u64> = (0..w as i64).map(&path).collect();
        let mut seen: HashMap<Vec<u64>, usize> = HashMap::new();
        for n in 0..=max_steps {
            let state = blocks[n..n + w - 1].to_vec();
            if let Some(&i) = seen.get(&state) {
                return Ok(Cycle { start: i as i64, blocks: blocks[i..n].to_vec() });
            }
            seen.insert(state, n);
            if !self.window_ok(&blocks[n..n + w]) {
                return Err(Error::InputContractViolation(format!(
                    "input violates the tiling constraints at block {n}"
                )));
            }
            blocks.push(path((n + w) as i64));
        }
        Err(Error::NoCycle)
    }

    /// Depth-first search for a cycle without reference to any input,
    /// exploring at most `max_nodes` block extensions.
    pub fn search_cycle(&self, max_nodes: usize) -> Option<Cycle> {
        if self.block_size > 16 {
            return None;
        }
        struct Dfs<'a> {
            g: &'a BlockGraph,
            path: Vec<u64>,
            on_path: HashMap<Vec<u64>, usize>,
            dead: HashSet<Vec<u64>>,
            budget: usize,
        }
        impl Dfs<'_> {
            fn state_at(&self, s: usize) -> Vec<u64> {
                self.path[s..s + self.g.width - 1].to_vec()
            }

            fn go(&mut self) -> Option<Cycle> {
                let w = self.g.width;
                for b in 0..(1u64 << self.g.block_size) {
                    if self.budget == 0 {
                        return None;
                    }
                    self.budget -= 1;
                    self.path.push(b);
                    let len = self.path.len();
                    if len >= w && !self.g.window_ok(&self.path[len - w..]) {
                        self.path.pop();
                        continue;
                    }
                    if len + 1 >= w {
                        let s = len + 1 - w;
                        let state = self.state_at(s);
                        if let Some(&i) = self.on_path.get(&state) {
                            return Some(Cycle { start: i as i64, blocks: self.path[i..s].to_vec() });
                        }
                        if !self.dead.contains(&state) {
                            self.on_path.insert(state.clone(), s);
                            if let Some(c) = self.go() {
                                return Some(c);
                            }
                            self.on_path.remove(&state);
                            self.dead.insert(state);
                        }
                    } else if let Some(c) = self.go() {
                        return Some(c);
                    }
                    self.path.pop();
                }
                None
            }
        }
        let mut dfs = Dfs { g: self, path: Vec::new(), on_path: HashMap::new(), dead: HashSet::new(), budget: max_nodes };
        if self.width == 1 {
            dfs.on_path.insert(Vec::new(), 0);
        }
        dfs.go()
    }
}

/// Coordinates `u = γ + m v + δ` with `γ ∈ Γ0`, `δ ∈ D`.
struct Frame {
    gamma0: Lattice,
    v: Point,
    normal: Point,
    normal_dot_v: i64,
    quotient: QuotientGroup,
}

fn dot(a: &[i64], b: &[i64]) -> i64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

impl Frame {
    /// Chooses `v` as the first point of `allowed` (by sup-norm, then
    /// lexicographically) outside the span of `gamma0`.
    fn new(gamma0: &Lattice, allowed: &Lattice) -> Result<Frame> {
        let d = gamma0.dim();
        if gamma0.rank() + 1 != d {
            return Err(Error::InvalidInput(format!(
                "lifting needs a period lattice of rank {}, found rank {}",
                d - 1,
                gamma0.rank()
            )));
        }
        let g = gamma0.basis_points().ok_or_else(|| Error::TooLarge(gamma0.to_string()))?;
        let v = allowed
            .points_by_norm()
            .find(|p| {
                let mut all = g.clone();
                all.push(p.clone());
                analysis::rank(&all) == d
            })
            .expect("a full-rank lattice has points outside any hyperplane");
        // Primitive integer normal to Γ0.
        let columns: Vec<Vec<BigInt>> = (0..d)
            .map(|c| gamma0.basis().iter().map(|col| col[c].clone()).collect())
            .collect();
        let normal_lattice = Lattice::kernel(d - 1, &columns)?;
        let normal: Point = normal_lattice.basis()[0]
            .iter()
            .map(|x| x.to_i64().ok_or_else(|| Error::TooLarge(x.to_string())))
            .collect::<Result<_>>()?;
        let normal_dot_v = dot(&normal, &v);
        let mut gens = g;
        gens.push(v.clone());
        let quotient = Lattice::from_points(d, &gens)?.quotient()?;
        Ok(Frame { gamma0: gamma0.clone(), v, normal, normal_dot_v, quotient })
    }

    fn cells(&self) -> usize {
        self.quotient.order()
    }

    /// `(m, cell)` with `u - m v - residue(cell) ∈ Γ0`.
    fn split(&self, u: &[i64]) -> (i64, usize) {
        let cell = self.quotient.index_of(u);
        let delta = self.quotient.residue(cell);
        let m = dot(&self.normal, &point::sub(u, &delta)) / self.normal_dot_v;
        (m, cell)
    }

    fn point(&self, m: i64, cell: usize) -> Point {
        point::add(&self.quotient.residue(cell), &point::scale(&self.v, m))
    }
}

/// Constraint system `sum_{f in F_i} x(u - f) = h_i(u)` for a `Γ0`-invariant
/// 0/1 function `x`, with `h_i` invariant under `allowed ⊇ Γ0`.
fn block_graph(frame: &Frame, tiles: &[Tile], targets: &[PeriodicFunction]) -> Result<BlockGraph> {
    let n = frame.cells();
    if n > 64 {
        return Err(Error::TooLarge(format!("{n} cells per block")));
    }
    let mut raw: Vec<(Vec<(i64, usize)>, i64)> = Vec::new();
    for (tile, h) in tiles.iter().zip(targets) {
        for cell in 0..n {
            let delta = frame.quotient.residue(cell);
            let t = h.at(&delta);
            if !t.is_integer() {
                return Err(Error::NonIntegerValues);
            }
            let target = t.to_integer().to_i64().ok_or(Error::NonIntegerValues)?;
            let terms = tile.points().iter().map(|f| frame.split(&point::sub(&delta, f))).collect();
            raw.push((terms, target));
        }
    }
    let lo = raw.iter().flat_map(|(t, _)| t.iter().map(|x| x.0)).min().unwrap_or(0);
    let hi = raw.iter().flat_map(|(t, _)| t.iter().map(|x| x.0)).max().unwrap_or(0);
    let constraints = raw
        .into_iter()
        .map(|(terms, target)| WindowConstraint {
            cells: terms.into_iter().map(|(m, c)| ((m - lo) as usize, c)).collect(),
            target,
        })
        .collect();
    Ok(BlockGraph { block_size: n, width: (hi - lo + 1) as usize, constraints })
}

/// The block of `x` at position `n`.
fn block_of(frame: &Frame, x: &Membership, n: i64) -> u64 {
    (0..frame.cells()).fold(0u64, |acc, c| if x(&frame.point(n, c)) { acc | (1 << c) } else { acc })
}

fn decode(frame: &Frame, cycle: &Cycle) -> Result<PeriodicSet> {
    let d = frame.gamma0.dim();
    let mut gens = frame.gamma0.basis_points().expect("checked when the frame was built");
    gens.push(point::scale(&frame.v, cycle.period() as i64));
    let lattice = Lattice::from_points(d, &gens)?;
    let q = lattice.quotient()?;
    let members = (0..q.order()).filter(|&i| {
        let (m, cell) = frame.split(&q.residue(i));
        (cycle.at(m) >> cell) & 1 == 1
    });
    Ok(PeriodicSet::from_indices(&q, members))
}

/// Finds a `d`-periodic 0/1 function `x̃`, invariant under `Γ0`, with
/// `1_{F_i} * x̃ = h_i` for all `i`, by walking the input `x` (which must be a
/// `Γ0`-invariant solution) along a vector of `allowed`.
pub(crate) fn lift_solution(
    tiles: &[Tile],
    targets: &[PeriodicFunction],
    gamma0: &Lattice,
    allowed: &Lattice,
    x: &Membership,
) -> Result<PeriodicSet> {
    let frame = Frame::new(gamma0, allowed)?;
    let graph = block_graph(&frame, tiles, targets)?;
    let cycle = graph.walk_cycle(|n| block_of(&frame, x, n), MAX_WALK)?;
    let out = decode(&frame, &cycle)?;
    for (tile, h) in tiles.iter().zip(targets) {
        let c = tile.indicator().convolve(&PeriodicFunction::indicator(&out))?;
        if !c.same_function(h) {
            return Err(Error::InputContractViolation("lifted set fails the tiling constraints".into()));
        }
    }
    Ok(out)
}

/// Radius of the box on which oracle inputs are checked.
pub(crate) fn check_radius(tuple: &TileTuple) -> i64 {
    tuple.iter().map(Tile::diameter).max().unwrap_or(0) + 3
}

/// Checks `F_j ⊕ A = Z^d` at every point of the box `[-r, r]^d`.
pub(crate) fn check_cotile_on_box(tuple: &TileTuple, a: &Membership, r: i64) -> Result<()> {
    let d = tuple.dim();
    for u in (0..=r).flat_map(|k| point::shell(d, k)) {
        for (j, t) in tuple.iter().enumerate() {
            let c = t.points().iter().filter(|f| a(&point::sub(&u, f))).count();
            if c != 1 {
                return Err(Error::InputNotCotile(format!("tile {} covers {u:?} {c} times", j + 1)));
            }
        }
    }
    Ok(())
}

/// Checks invariance of `a` under the basis of `gamma` on the box `[-r, r]^d`.
pub(crate) fn check_invariance_on_box(gamma: &Lattice, a: &Membership, r: i64) -> Result<()> {
    let gens = gamma.basis_points().ok_or_else(|| Error::TooLarge(gamma.to_string()))?;
    for u in (0..=r).flat_map(|k| point::shell(gamma.dim(), k)) {
        for g in &gens {
            if a(&u) != a(&point::add(&u, g)) {
                return Err(Error::InputContractViolation(format!("set is not invariant under {g:?} at {u:?}")));
            }
        }
    }
    Ok(())
}

/// Turns a joint co-tile invariant under a rank `d-1` lattice `gamma0` into
/// a joint co-tile with a full-rank group of periods.
///
/// The input is an oracle; it is checked on a finite box around the origin,
/// and the output is verified exactly.
pub fn lift_to_full_period(tuple: &TileTuple, gamma0: &Lattice, cotile: &Membership) -> Result<PeriodicSet> {
    let d = tuple.dim();
    check_dim(d, gamma0.dim())?;
    let r = check_radius(tuple);
    check_invariance_on_box(gamma0, cotile, r)?;
    check_cotile_on_box(tuple, cotile, r)?;
    let one = PeriodicFunction::constant(d, num_rational::BigRational::from_integer(1.into()));
    let targets = vec![one; tuple.len()];
    let out = lift_solution(tuple.tiles(), &targets, gamma0, &Lattice::full(d), cotile)?;
    if !verify::joint_tiles(tuple, &out) {
        return Err(Error::InputContractViolation("lifted set is not a joint co-tile".into()));
    }
    Ok(out.canonical())
}

/// The block graph of the co-tile constraints for `tuple` relative to `gamma0`.
pub fn cotile_block_graph(tuple: &TileTuple, gamma0: &Lattice) -> Result<BlockGraph> {
    let d = tuple.dim();
    let frame = Frame::new(gamma0, &Lattice::full(d))?;
    let one = PeriodicFunction::constant(d, num_rational::BigRational::from_integer(1.into()));
    block_graph(&frame, tuple.tiles(), &vec![one; tuple.len()])
}

/// Decodes a cycle of [`cotile_block_graph`] into a periodic set.
pub fn decode_cotile_cycle(tuple: &TileTuple, gamma0: &Lattice, cycle: &Cycle) -> Result<PeriodicSet> {
    let frame = Frame::new(gamma0, &Lattice::full(tuple.dim()))?;
    decode(&frame, cycle)
}
