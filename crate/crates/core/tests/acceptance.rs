//! Acceptance suite: one PASS/FAIL line per criterion, non-zero exit on failure.
//!
//! Runs as a plain binary (`harness = false`) so the report reads top to
//! bottom; `cargo test --test acceptance` executes it.

mod common;

use std::panic::{catch_unwind, AssertUnwindSafe};
use std::sync::Arc;
use std::time::{Duration, Instant};

use num_rational::BigRational;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use tilekit::analysis::{has_property_star, is_independent_tuple};
use tilekit::construct::{brother_tiles, check_brothers};
use tilekit::decompose::{build_decomposition, build_level_decomposition, compute_q, dilation_check, verify_decomposition};
use tilekit::solve::{
    independent_cotiles, lift_to_full_period, piecewise_to_periodic, search_z_cotile, Membership, Piece, ZTiling,
};
use tilekit::torsion::{ring_inverse, CyclicFunction};
use tilekit::verify::{is_level_tiling, joint_tiles};
use tilekit::{Lattice, PeriodicFunction, PeriodicSet, QuotientGroup, Tile, TileTuple};

use common::{brute_force_joint, random_independent_tuple, random_lattice, random_lift, slab_pair, solver_masks};

type Outcome = Result<String, String>;

fn rat(n: i64) -> BigRational {
    BigRational::from_integer(n.into())
}

fn check(cond: bool, what: impl Into<String>) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(what.into())
    }
}

fn within(elapsed: Duration, limit_secs: f64) -> Result<(), String> {
    check(elapsed.as_secs_f64() < limit_secs, format!("took {:.2}s, limit {limit_secs}s", elapsed.as_secs_f64()))
}

fn evens() -> PeriodicFunction {
    PeriodicFunction::indicator(&PeriodicSet::new(Lattice::diagonal(&[2]), [vec![0]]).unwrap())
}

fn slab_cotile() -> PeriodicSet {
    PeriodicSet::new(Lattice::diagonal(&[2, 2, 1]), [vec![0, 0, 0]]).unwrap()
}

fn slab_pair_reproduction() -> Outcome {
    let start = Instant::now();
    let tuple = slab_pair();
    let a = slab_cotile();
    check(joint_tiles(&tuple, &a), "2Z x 2Z x Z is not a joint co-tile")?;
    check(is_independent_tuple(&tuple), "tuple not independent")?;
    check(has_property_star(&tuple).map_err(|e| e.to_string())?, "property (★) fails")?;
    let l = Lattice::diagonal(&[2, 2, 1]);
    let solved = solver_masks(&tuple, &l);
    let brute = brute_force_joint(&tuple, &l);
    check(solved.len() == 4, format!("{} solutions, expected 4", solved.len()))?;
    check(solved == brute, "solver and 2^4 brute force disagree")?;
    let q = QuotientGroup::new(&l).unwrap();
    for r in q.residues() {
        check(solved.contains(&a.translate(&r).mask(&q)), format!("translate by {r:?} missing"))?;
    }
    within(start.elapsed(), 1.0)?;
    Ok(format!("4 translates, brute force agrees, {:.3}s", start.elapsed().as_secs_f64()))
}

fn one_dimensional_no_tiling() -> Outcome {
    let start = Instant::now();
    let tile = Tile::from_ints(&[0, 1, 3, 4, 6, 7]).unwrap();
    let ZTiling::NoTiling { bound, periods_checked } = search_z_cotile(&tile).map_err(|e| e.to_string())? else {
        return Err("a co-tile was reported".into());
    };
    check(bound == 256, format!("bound {bound}"))?;
    check(periods_checked.iter().all(|p| p % 6 == 0 && *p <= 256), "a period outside 6Z ∩ [1, 256] was tried")?;
    let nines = PeriodicSet::new(Lattice::diagonal(&[9]), [vec![0], vec![1], vec![2]]).unwrap();
    let f = evens().sub(&PeriodicFunction::indicator(&nines)).unwrap();
    check(f.lattice() == &Lattice::diagonal(&[18]), "f is not tabulated on 18Z")?;
    let level = is_level_tiling(&tile.indicator(), &f, &rat(1)).map_err(|e| e.to_string())?;
    check(level.ok, "level-one tiling fails")?;
    within(start.elapsed(), 10.0)?;
    Ok(format!("no tiling up to 256 ({} periods), level tiling exact", periods_checked.len()))
}

fn decomposition_exactness() -> Outcome {
    let pair = TileTuple::single(Tile::from_ints(&[0, 1]).unwrap()).unwrap();
    let level_tiles = TileTuple::new(vec![Tile::from_ints(&[0, 1, 2, 3]).unwrap(), Tile::from_ints(&[0, 1]).unwrap()]).unwrap();
    type Case<'a, T> = (&'a str, Box<dyn Fn() -> tilekit::Result<T> + 'a>);
    let cases: [Case<_>; 3] = [
        ("pair on 2Z", Box::new(|| build_decomposition(&pair, &evens()))),
        ("slab pair depth 2", Box::new(|| build_decomposition(&slab_pair(), &PeriodicFunction::indicator(&slab_cotile())))),
        ("levels (2,1)", Box::new(|| build_level_decomposition(&level_tiles, &[2, 1], &evens()))),
    ];
    let mut notes = Vec::new();
    for (name, build) in cases {
        let start = Instant::now();
        let tree = build().map_err(|e| format!("{name}: {e}"))?;
        let report = verify_decomposition(&tree);
        check(report.ok(), format!("{name}: {:?}", report.violations))?;
        check(report.finite_average != Some(false), format!("{name}: finite average disagrees"))?;
        within(start.elapsed(), 5.0).map_err(|e| format!("{name}: {e}"))?;
        notes.push(format!("{name} q={}", tree.q));
    }
    Ok(notes.join(", "))
}

fn dilation() -> Outcome {
    let a = PeriodicFunction::indicator(&slab_cotile());
    let tile = &slab_pair().tiles()[0].clone();
    let q = compute_q(&a, tile.len() as u64).map_err(|e| e.to_string())?;
    check(q == 6, format!("q = {q}"))?;
    for r in [7, 13, 19] {
        check(dilation_check(tile, &a, &rat(1), r).map_err(|e| e.to_string())?, format!("r = {r} fails"))?;
    }
    let pair = Tile::from_ints(&[0, 1]).unwrap();
    check(!dilation_check(&pair, &evens(), &rat(1), 2).map_err(|e| e.to_string())?, "r = 2 probe should fail")?;
    Ok("q=6, r in {7,13,19} hold, r=2 fails".into())
}

fn independent_tuples() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let mut compared = 0;
    for case in 0..10 {
        let d = if case % 2 == 0 { 2 } else { 3 };
        let l = random_lattice(&mut rng, d, 2, if d == 2 { 3 } else { 2 });
        let tuple = random_independent_tuple(&mut rng, &l);
        let found = independent_cotiles(&tuple).map_err(|e| format!("case {case}: {e}"))?;
        check(!found.cotiles.is_empty(), format!("case {case}: the known co-tile was missed"))?;
        check(
            found.cotiles.iter().any(|a| a.same_set(&PeriodicSet::new(l.clone(), [vec![0; d]]).unwrap())),
            format!("case {case}: the generating lattice is not among the solutions"),
        )?;
        for a in &found.cotiles {
            check(a.stabilizer().rank() == d, format!("case {case}: a solution is not fully periodic"))?;
            check(joint_tiles(&tuple, a), format!("case {case}: a solution does not tile"))?;
        }
        let size = tuple.tiles()[0].len() as u64;
        for n in [size, 2 * size] {
            for sub in Lattice::enumerate_sublattices(d, n) {
                check(solver_masks(&tuple, &sub) == brute_force_joint(&tuple, &sub), format!("case {case}: disagreement mod {sub:?}"))?;
                compared += 1;
            }
        }
    }
    Ok(format!("10 tuples, {compared} quotients match brute force"))
}

fn brothers() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    for case in 0..5 {
        let d = if case < 3 { 2 } else { 3 };
        let l = random_lattice(&mut rng, d, 2, 4);
        let tile = random_lift(&mut rng, &l, 1);
        let a = PeriodicSet::new(l, [vec![0; d]]).unwrap();
        let bros = brother_tiles(&tile, &a).map_err(|e| format!("case {case}: {e}"))?;
        let r = check_brothers(&tile, &a, &bros).map_err(|e| format!("case {case}: {e}"))?;
        check(r.ok(), format!("case {case}: {r:?}"))?;
    }
    Ok("5 cases: joint tiling, independence, property (★)".into())
}

fn is_square(n: i64) -> bool {
    n >= 0 && (0..=n).take_while(|k| k * k <= n).any(|k| k * k == n)
}

fn lifting() -> Outcome {
    let start = Instant::now();
    let domino = TileTuple::single(Tile::new(2, [vec![0, 0], vec![1, 0]]).unwrap()).unwrap();
    // horizontal dominoes, row y shifted by one when |y| is a square
    let rows: Membership = Arc::new(|p: &[i64]| (p[0] - is_square(p[1].abs()) as i64).rem_euclid(2) == 0);
    let gamma0 = Lattice::from_points(2, &[vec![2, 0]]).unwrap();
    let lifted = lift_to_full_period(&domino, &gamma0, &rows).map_err(|e| e.to_string())?;
    check(tilekit::verify::is_joint_cotile(&domino, &lifted).map_err(|e| e.to_string())?.ok, "lifted set does not tile")?;
    check(lifted.stabilizer().rank() == 2, "lifted set is not fully periodic")?;

    let even_rows = Piece::new(
        gamma0.clone(),
        Arc::new(|p: &[i64]| p[1].rem_euclid(2) == 0 && (p[0] - is_square((p[1] / 2).abs()) as i64).rem_euclid(2) == 0),
    );
    let odd_rows = Piece::new(
        Lattice::from_points(2, &[vec![0, 2]]).unwrap(),
        Arc::new(|p: &[i64]| p[1].rem_euclid(2) == 1 && p[0].rem_euclid(2) == 0),
    );
    let out = piecewise_to_periodic(&domino, &[even_rows, odd_rows]).map_err(|e| e.to_string())?;
    check(joint_tiles(&domino, &out.cotile), "piecewise output does not tile")?;
    check(out.cotile.stabilizer().rank() == 2, "piecewise output is not fully periodic")?;
    within(start.elapsed(), 10.0)?;
    Ok(format!("lift period index {}, two pieces combined", lifted.lattice().index()))
}

fn ring_inverses() -> Outcome {
    let start = Instant::now();
    let mut cases = 0;
    for p in [2u64, 3, 5, 7] {
        for mask in 1..(1u64 << p) - 1 {
            let f0: Vec<u64> = (0..p).filter(|i| mask >> i & 1 == 1).collect();
            let g = ring_inverse(p, &f0).map_err(|e| format!("p={p} {f0:?}: {e}"))?;
            let product = g.convolve(&CyclicFunction::indicator(p, &f0)).map_err(|e| e.to_string())?;
            check(product == CyclicFunction::delta(p, 0), format!("p={p} {f0:?}: g * 1_F0 is not delta_0"))?;
            cases += 1;
        }
    }
    check(cases == 164, format!("{cases} cases"))?;
    within(start.elapsed(), 5.0)?;
    Ok(format!("{cases} cases exact"))
}

fn oracle_equivalence() -> Outcome {
    let one = |pts: &[i64]| TileTuple::single(Tile::from_ints(pts).unwrap()).unwrap();
    let plane = |pts: &[[i64; 2]]| Tile::new(2, pts.iter().map(|p| p.to_vec())).unwrap();
    let domino = plane(&[[0, 0], [1, 0]]);
    let upright = plane(&[[0, 0], [0, 1]]);
    let ell = plane(&[[0, 0], [1, 0], [0, 1]]);
    let corpus: Vec<(TileTuple, Vec<Lattice>)> = vec![
        (slab_pair(), vec![Lattice::diagonal(&[2, 2, 1]), Lattice::diagonal(&[2, 2, 2]), Lattice::diagonal(&[4, 2, 1]), Lattice::diagonal(&[2, 4, 2])]),
        (TileTuple::single(slab_pair().tiles()[1].clone()).unwrap(), vec![Lattice::diagonal(&[2, 2, 2]), Lattice::diagonal(&[4, 4, 1])]),
        (one(&[0, 1]), (1..=10).map(|n| Lattice::diagonal(&[2 * n])).collect()),
        (one(&[0, 2]), vec![Lattice::diagonal(&[4]), Lattice::diagonal(&[8]), Lattice::diagonal(&[12])]),
        (one(&[0, 1, 3, 4, 6, 7]), vec![Lattice::diagonal(&[6]), Lattice::diagonal(&[12]), Lattice::diagonal(&[18])]),
        (one(&[0, 1, 5]), vec![Lattice::diagonal(&[6]), Lattice::diagonal(&[9]), Lattice::diagonal(&[15])]),
        (TileTuple::single(domino.clone()).unwrap(), Lattice::enumerate_sublattices(2, 4)),
        (TileTuple::new(vec![domino, upright]).unwrap(), Lattice::enumerate_sublattices(2, 6)),
        (TileTuple::single(ell).unwrap(), Lattice::enumerate_sublattices(2, 9)),
    ];
    let mut pairs = 0;
    for (tuple, lattices) in &corpus {
        for l in lattices {
            check(solver_masks(tuple, l) == brute_force_joint(tuple, l), format!("disagreement for {tuple:?} mod {l:?}"))?;
            pairs += 1;
        }
    }
    check(pairs >= 25, format!("only {pairs} pairs"))?;
    Ok(format!("{pairs} (tiles, lattice) pairs agree"))
}

fn lattice_algebra() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(10);
    for case in 0..100 {
        let d = rng.gen_range(1..=3);
        let l1 = random_lattice(&mut rng, d, 1, 60);
        let l2 = random_lattice(&mut rng, d, 1, 60);
        let idx = |l: &Lattice| l.index().to_u64().unwrap();
        let meet = l1.intersect(&l2).map_err(|e| e.to_string())?;
        let join = l1.sum(&l2).map_err(|e| e.to_string())?;
        check(idx(&meet) * idx(&join) == idx(&l1) * idx(&l2), format!("case {case}: {l1:?} {l2:?}"))?;
    }
    for n in 1..=12 {
        let count = Lattice::enumerate_sublattices(2, n).len() as u64;
        check(count == common::divisor_sum(n), format!("{count} sublattices of index {n}"))?;
    }
    Ok("100 index identities, sigma(n) for n <= 12".into())
}

fn main() {
    type Criterion = (&'static str, fn() -> Outcome);
    let criteria: [Criterion; 10] = [
        ("slab pair joint tiling and quotient solutions", slab_pair_reproduction),
        ("no tiling of Z by {0,1,3,4,6,7}; level tiling", one_dimensional_no_tiling),
        ("periodic decomposition exactness", decomposition_exactness),
        ("dilation", dilation),
        ("independent tuples have finitely many periodic co-tiles", independent_tuples),
        ("brother tiles", brothers),
        ("lifting and piecewise co-tiles", lifting),
        ("ring inverses mod x^p - 1", ring_inverses),
        ("solver vs brute force on the fixture corpus", oracle_equivalence),
        ("lattice algebra", lattice_algebra),
    ];
    let mut failed = 0;
    for (i, (name, run)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let outcome = catch_unwind(AssertUnwindSafe(run)).unwrap_or_else(|_| Err("panicked".into()));
        let secs = start.elapsed().as_secs_f64();
        match outcome {
            Ok(note) => println!("PASS {:>2}  {name}: {note} [{secs:.2}s]", i + 1),
            Err(why) => {
                failed += 1;
                println!("FAIL {:>2}  {name}: {why} [{secs:.2}s]", i + 1);
            }
        }
    }
    println!("{} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed > 0 {
        std::process::exit(1);
    }
}
