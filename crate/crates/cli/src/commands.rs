use std::fs;
use std::io::Read;
use std::path::Path;

use num_rational::BigRational;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::{json, Value};
use tilekit::analysis::{independence_witness, property_star_witness};
use tilekit::construct::{brother_tiles, check_brothers};
use tilekit::decompose::{build_decomposition, build_level_decomposition, compute_q, dilation_check, verify_decomposition};
use tilekit::json::{self as tj, object};
use tilekit::solve::{
    common_stabilizer, independent_cotiles, lift_to_full_period, newman_bound, piecewise_to_periodic,
    search_periodic_cotile, search_z_cotile, CommonStabilizer, SearchMode, ZTiling,
};
use tilekit::torsion::{classify, cotile_conclusion, Classification};
use tilekit::verify::{self, TilingReport};
use tilekit::{Error, Lattice, PeriodicSet, QuotientGroup, Tile, TileTuple};

use crate::render::render;
use crate::{Cli, Command, Failure, Outcome};

/// Reads and parses a JSON file (`-` for stdin); malformed input names the file.
fn read(path: &Path) -> Result<Value, Failure> {
    let text = if path.as_os_str() == "-" {
        let mut s = String::new();
        std::io::stdin().read_to_string(&mut s).map_err(|e| Failure::Usage(format!("stdin: {e}")))?;
        s
    } else {
        fs::read_to_string(path).map_err(|e| Failure::Usage(format!("{}: {e}", path.display())))?
    };
    tj::parse(&text).map_err(|e| match e {
        Error::Malformed(m) => Failure::Library(Error::Malformed(format!("{}: {m}", path.display()))),
        other => Failure::Library(other),
    })
}

/// Tags a decoding error with the file it came from.
fn in_file<T>(path: &Path, r: tilekit::Result<T>) -> Result<T, Failure> {
    r.map_err(|e| match e {
        Error::Malformed(m) => Failure::Library(Error::Malformed(format!("{}: {m}", path.display()))),
        other => Failure::Library(other),
    })
}

/// Outputs that wrap a co-tile (`solve`, `brothers`, `lift`, ..) can be fed
/// back in wherever a co-tile is expected.
fn unwrap_cotile(v: Value) -> Value {
    match v.get("cotile") {
        Some(inner) if v.get("members").is_none() && v.get("values").is_none() => inner.clone(),
        _ => v,
    }
}

fn load_tuple(path: &Path) -> Result<TileTuple, Failure> {
    let v = read(path)?;
    in_file(path, tj::tuple_from(&v, "$"))
}

fn load_tile(path: &Path) -> Result<Tile, Failure> {
    let v = read(path)?;
    // a one-tile tuple is accepted where a tile is expected
    let t = in_file(path, tj::tuple_from(&v, "$"))?;
    match t.tiles() {
        [one] => Ok(one.clone()),
        many => Err(Failure::Usage(format!("{}: expected one tile, found {}", path.display(), many.len()))),
    }
}

fn load_set(path: &Path) -> Result<PeriodicSet, Failure> {
    let v = unwrap_cotile(read(path)?);
    in_file(path, tj::periodic_set_from(&v, "$"))
}

fn parse_rational(s: &str) -> Result<BigRational, Failure> {
    tj::rational_from(&Value::String(s.into()), "--level").map_err(|_| Failure::Usage(format!("\"{s}\" is not a rational")))
}

fn report_json(r: &TilingReport) -> Value {
    let defects: Vec<Value> =
        r.defects.iter().map(|d| json!({ "residue": d.residue, "value": tj::rational(&d.value) })).collect();
    json!({ "ok": r.ok, "defect_count": r.defect_count, "defects": defects })
}

fn with_render(cli: &Cli, mut value: Value, summary: &mut String, tile: &Tile, cotile: &PeriodicSet) -> Result<Value, Failure> {
    if let Some(kind) = cli.render {
        let picture = render(kind, tile, cotile, cli.window)?;
        summary.push('\n');
        summary.push_str(&picture);
        value["render"] = Value::String(picture);
    }
    Ok(value)
}

pub fn run(cli: &Cli) -> Result<Outcome, Failure> {
    match &cli.command {
        Command::Verify { tiles, cotile, level } => verify_cmd(cli, tiles, cotile, level.as_deref()),
        Command::Solve { tiles, all } => solve(cli, tiles, *all),
        Command::SolveZ { tile } => solve_z(cli, tile),
        Command::Independent { tiles, cotiles, random_dim, size } => {
            independent(cli, tiles.as_deref(), *cotiles, *random_dim, *size)
        }
        Command::Star { tiles } => star(tiles),
        Command::Decompose { tiles, cotile, depth, levels } => decompose(tiles, cotile, *depth, levels.as_deref()),
        Command::Dilate { tile, cotile, r, level } => dilate(tile, cotile, *r, level),
        Command::Brothers { tile, cotile } => brothers(cli, tile, cotile),
        Command::Zp { p, tile, cotile } => zp(*p, tile, cotile.as_deref()),
        Command::Lift { tiles, cotile } => lift(cli, tiles, cotile),
        Command::Piecewise { tiles, pieces } => piecewise(cli, tiles, pieces),
        Command::Stabilizer { pieces, cotile } => stabilizer(pieces.as_deref(), cotile.as_deref()),
    }
}

fn verify_cmd(cli: &Cli, tiles: &Path, cotile: &Path, level: Option<&str>) -> Result<Outcome, Failure> {
    let tuple = load_tuple(tiles)?;
    let v = unwrap_cotile(read(cotile)?);
    let is_set = v.get("members").is_some();
    let (reports, set) = if is_set && level.is_none() {
        let a = in_file(cotile, tj::periodic_set_from(&v, "$"))?;
        let reports = tuple.iter().map(|t| verify::is_tiling(t, &a)).collect::<tilekit::Result<Vec<_>>>()?;
        (reports, Some(a))
    } else {
        let f = in_file(cotile, tj::function_or_set_from(&v, "$"))?;
        let level = parse_rational(level.unwrap_or("1"))?;
        let reports = tuple
            .iter()
            .map(|t| verify::is_level_tiling(&t.indicator(), &f, &level))
            .collect::<tilekit::Result<Vec<_>>>()?;
        (reports, None)
    };
    let verdict = reports.iter().all(|r| r.ok);
    let mut summary = format!("verdict: {verdict}");
    for (i, r) in reports.iter().enumerate().filter(|(_, r)| !r.ok) {
        summary.push_str(&format!("\ntile {i}: {} defective residues", r.defect_count));
    }
    let value = object([("verdict", json!(verdict)), ("tiles", Value::Array(reports.iter().map(report_json).collect()))]);
    let value = match &set {
        Some(a) => with_render(cli, value, &mut summary, &tuple.tiles()[0], a)?,
        None => value,
    };
    Ok(Outcome { value, verdict, summary })
}

fn solve(cli: &Cli, tiles: &Path, all: bool) -> Result<Outcome, Failure> {
    let tuple = load_tuple(tiles)?;
    let max_index = cli
        .max_index
        .ok_or_else(|| Failure::Usage("solve needs --max-index: no general bound on the period exists".into()))?;
    let mode = if all { SearchMode::All } else { SearchMode::First };
    let found = search_periodic_cotile(&tuple, max_index, mode)?;
    let list: Vec<Value> = found
        .iter()
        .map(|c| {
            let mut v = tj::periodic_set(&c.cotile);
            v["stabilizer"] = tj::lattice(c.stabilizer());
            v["found_on"] = tj::lattice(&c.search_lattice);
            v
        })
        .collect();
    let verdict = !found.is_empty();
    let mut summary = if verdict {
        let c = &found[0].cotile;
        format!("{} co-tile(s); first has period index {} and {} residue(s)", found.len(), c.lattice().index(), c.len())
    } else {
        format!("no periodic joint co-tile with index <= {max_index}")
    };
    let mut value = object([("max_index", json!(max_index)), ("cotiles", Value::Array(list))]);
    if let Some(first) = found.first() {
        value["cotile"] = tj::periodic_set(&first.cotile);
        value = with_render(cli, value, &mut summary, &tuple.tiles()[0], &first.cotile)?;
    }
    Ok(Outcome { value, verdict, summary })
}

fn solve_z(cli: &Cli, tile: &Path) -> Result<Outcome, Failure> {
    let tile = load_tile(tile)?;
    let bound = newman_bound(&tile)?;
    match search_z_cotile(&tile)? {
        ZTiling::Tiles { cotile } => {
            let mut summary = format!("TILES with period {}", cotile.lattice().index());
            let value = object([("verdict", json!("TILES")), ("bound", json!(bound)), ("cotile", tj::periodic_set(&cotile))]);
            let value = with_render(cli, value, &mut summary, &tile, &cotile)?;
            Ok(Outcome { value, verdict: true, summary })
        }
        ZTiling::NoTiling { bound, periods_checked } => Ok(Outcome {
            summary: format!("NO-TILING: {} candidate periods up to {bound} exhausted", periods_checked.len()),
            value: object([
                ("verdict", json!("NO-TILING")),
                ("bound", json!(bound)),
                ("periods_checked", json!(periods_checked)),
            ]),
            verdict: false,
        }),
    }
}

/// A random full-rank lattice of the given index, as an upper-triangular Hermite basis.
fn random_lattice(rng: &mut ChaCha8Rng, d: usize, index: u64) -> Lattice {
    let mut pivots = vec![1i64; d];
    let mut rest = index as i64;
    for p in pivots.iter_mut().take(d - 1) {
        let divisors: Vec<i64> = (1..=rest).filter(|k| rest % k == 0).collect();
        *p = divisors[rng.gen_range(0..divisors.len())];
        rest /= *p;
    }
    pivots[d - 1] = rest;
    let columns: Vec<Vec<i64>> = (0..d)
        .map(|j| (0..d).map(|i| if i == j { pivots[j] } else if i < j { rng.gen_range(0..pivots[i]) } else { 0 }).collect())
        .collect();
    Lattice::from_points(d, &columns).expect("columns have length d")
}

/// `d` tiles, each a residue system of one random lattice moved by small
/// lattice vectors, so that the lattice is a joint co-tile; retried until
/// the tuple is independent.
fn random_independent_tuple(seed: u64, d: usize, size: u64) -> Result<TileTuple, Failure> {
    if d == 0 || size == 0 || size > 64 {
        return Err(Failure::Usage("--random-dim needs d >= 1 and 1 <= --size <= 64".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for _ in 0..10_000 {
        let l = random_lattice(&mut rng, d, size);
        let q = QuotientGroup::new(&l)?;
        let basis = l.basis_points().expect("small lattice");
        let tiles = (0..d)
            .map(|_| {
                let pts = q.residues().map(|r| {
                    if r.iter().all(|&x| x == 0) {
                        return r;
                    }
                    basis.iter().fold(r, |acc, b| {
                        let c = rng.gen_range(-1..=1);
                        acc.iter().zip(b).map(|(x, y)| x + c * y).collect()
                    })
                });
                Tile::new(d, pts.collect::<Vec<_>>())
            })
            .collect::<tilekit::Result<Vec<_>>>()?;
        let tuple = TileTuple::new(tiles)?;
        if independence_witness(&tuple).is_none() {
            return Ok(tuple);
        }
    }
    Err(Failure::Usage("no independent tuple found for this seed".into()))
}

fn independent(cli: &Cli, tiles: Option<&Path>, cotiles: bool, random_dim: Option<usize>, size: u64) -> Result<Outcome, Failure> {
    let tuple = match (tiles, random_dim) {
        (Some(p), _) => load_tuple(p)?,
        (None, Some(d)) => random_independent_tuple(cli.seed, d, size)?,
        (None, None) => return Err(Failure::Usage("give --tiles or --random-dim".into())),
    };
    let witness = independence_witness(&tuple);
    let verdict = witness.is_none();
    let mut value = object([("independent", json!(verdict)), ("witness", json!(witness))]);
    if random_dim.is_some() {
        value["tiles"] = tj::tuple(&tuple)["tiles"].clone();
        value["seed"] = json!(cli.seed);
    }
    let mut summary = match &witness {
        None => "independent: true".to_string(),
        Some(w) => format!("independent: false (dependent selection {w:?})"),
    };
    if cotiles && verdict {
        let found = independent_cotiles(&tuple)?;
        summary.push_str(&format!(
            "\n{} joint co-tile(s), all periodic mod a lattice of index {} (q = {})",
            found.cotiles.len(),
            found.bound_lattice.index(),
            found.q
        ));
        value["q"] = json!(found.q);
        value["bound_lattice"] = tj::lattice(&found.bound_lattice);
        value["cotiles"] = Value::Array(found.cotiles.iter().map(|a| tj::periodic_set(&a.canonical())).collect());
    }
    Ok(Outcome { value, verdict, summary })
}

fn star(tiles: &Path) -> Result<Outcome, Failure> {
    let tuple = load_tuple(tiles)?;
    let (verdict, witness, summary) = match property_star_witness(&tuple) {
        Ok(None) => (true, Value::Null, "property (★): true".to_string()),
        Ok(Some((a, b))) => (false, json!([a, b]), format!("property (★): false; {a:?} and {b:?} span the same hyperplane")),
        Err(Error::NotIndependent { witness }) => {
            (false, json!({ "dependent": witness }), format!("property (★): false; not independent ({witness:?})"))
        }
        Err(e) => return Err(e.into()),
    };
    Ok(Outcome { value: object([("property_star", json!(verdict)), ("witness", witness)]), verdict, summary })
}

fn decompose(tiles: &Path, cotile: &Path, depth: Option<usize>, levels: Option<&[i64]>) -> Result<Outcome, Failure> {
    let tuple = load_tuple(tiles)?;
    let v = unwrap_cotile(read(cotile)?);
    let f = in_file(cotile, tj::function_or_set_from(&v, "$"))?;
    let k = depth.unwrap_or(tuple.len());
    if k == 0 || k > tuple.len() {
        return Err(Failure::Usage(format!("--depth must be between 1 and {}", tuple.len())));
    }
    let tuple = TileTuple::new(tuple.tiles()[..k].to_vec())?;
    let tree = match levels {
        Some(ls) => build_level_decomposition(&tuple, &ls[..ls.len().min(k)], &f)?,
        None => build_decomposition(&tuple, &f)?,
    };
    let report = verify_decomposition(&tree);
    let nodes: Vec<Value> =
        tree.nodes.iter().map(|(chain, phi)| json!({ "chain": chain, "function": tj::function(phi) })).collect();
    let constants: Vec<Value> = (1..=tree.depth()).map(|i| tj::rational(&tree.constant(i))).collect();
    let verdict = report.ok();
    let value = object([
        ("q", json!(tree.q)),
        ("levels", Value::Array(tree.levels.iter().map(tj::rational).collect())),
        ("constants", Value::Array(constants)),
        ("nodes", Value::Array(nodes)),
        (
            "report",
            json!({
                "range": report.range,
                "recursion": report.recursion,
                "reconstruction": report.reconstruction,
                "periods": report.periods,
                "tiling": report.tiling,
                "mean": report.mean,
                "finite_average": report.finite_average,
                "violations": report.violations,
            }),
        ),
    ]);
    let mut summary = format!("q = {}, {} nodes, verified: {verdict}", tree.q, tree.nodes.len());
    for v in &report.violations {
        summary.push_str(&format!("\n  {v}"));
    }
    Ok(Outcome { value, verdict, summary })
}

fn dilate(tile: &Path, cotile: &Path, r: i64, level: &str) -> Result<Outcome, Failure> {
    let tile = load_tile(tile)?;
    let v = unwrap_cotile(read(cotile)?);
    let f = in_file(cotile, tj::function_or_set_from(&v, "$"))?;
    let level = parse_rational(level)?;
    let q = compute_q(&f, tile.len() as u64)?;
    let holds = dilation_check(&tile, &f, &level, r)?;
    let covered = r.rem_euclid(q as i64) == 1 % q as i64;
    let value = object([("q", json!(q)), ("r", json!(r)), ("r_is_1_mod_q", json!(covered)), ("holds", json!(holds))]);
    let summary = format!("q = {q}; dilation by {r} {}", if holds { "preserves the equation" } else { "breaks the equation" });
    Ok(Outcome { value, verdict: holds, summary })
}

fn brothers(cli: &Cli, tile: &Path, cotile: &Path) -> Result<Outcome, Failure> {
    let tile = load_tile(tile)?;
    let a = load_set(cotile)?;
    let bros = brother_tiles(&tile, &a)?;
    let report = check_brothers(&tile, &a, &bros)?;
    let mut all = bros.clone();
    all.push(tile.clone());
    let verdict = report.ok();
    let mut summary = format!(
        "{} brother tile(s); joint tiling {}, independent {}, property (★) {}",
        bros.len(),
        report.joint_tiling,
        report.independent,
        report.property_star
    );
    for b in &bros {
        summary.push_str(&format!("\n  {:?}", b.points()));
    }
    let value = object([
        ("tiles", tj::tiles(&all)["tiles"].clone()),
        ("cotile", tj::periodic_set(&a)),
        (
            "report",
            json!({ "joint_tiling": report.joint_tiling, "independent": report.independent, "property_star": report.property_star }),
        ),
    ]);
    let value = with_render(cli, value, &mut summary, all.first().unwrap_or(&tile), &a)?;
    Ok(Outcome { value, verdict, summary })
}

fn zp(p: u64, tile: &Path, cotile: Option<&Path>) -> Result<Outcome, Failure> {
    let v = read(tile)?;
    let t = in_file(tile, tj::mixed_tile_from(&v, "$"))?;
    if t.p() != p {
        return Err(Error::InvalidInput(format!("tile is over Z/{}Z, --p is {p}", t.p())).into());
    }
    let class = match classify(&t) {
        Classification::FullFiber(base) => json!({ "kind": "FULL_FIBER", "base": tj::tile(&base) }),
        Classification::Generic => json!({ "kind": "GENERIC" }),
    };
    let mut value = object([("p", json!(p)), ("classification", class.clone())]);
    let mut summary = format!("classification: {}", class["kind"].as_str().unwrap_or_default());
    let mut verdict = true;
    if let Some(path) = cotile {
        let v = read(path)?;
        let a = in_file(path, tj::mixed_set_from(&v, "$"))?;
        let c = cotile_conclusion(&t, &a)?;
        let projection_ok = c.projection.as_ref().is_none_or(|(_, ok)| *ok);
        verdict = projection_ok && c.base_tiles != Some(false) && c.recovered != Some(false);
        value["verdict"] = json!({
            "period": [c.period.0, c.period.1],
            "projection": c.projection.as_ref().map(|(s, ok)| json!({ "set": tj::periodic_set(s), "tiles_with_base": ok })),
            "base_tiles": c.base_tiles,
            "recovered": c.recovered,
        });
        summary.push_str(&format!("\nco-tile period ({}, {}); conclusion holds: {verdict}", c.period.0, c.period.1));
    }
    Ok(Outcome { value, verdict, summary })
}

fn lift(cli: &Cli, tiles: &Path, cotile: &Path) -> Result<Outcome, Failure> {
    let tuple = load_tuple(tiles)?;
    let v = read(cotile)?;
    let piece = in_file(cotile, tj::piece_from(&v, "$"))?;
    let out = lift_to_full_period(&tuple, &piece.gamma, &piece.member)?;
    let verdict = verify::joint_tiles(&tuple, &out);
    let stab = out.stabilizer();
    let mut summary = format!("periodic co-tile with period index {}, verified: {verdict}", stab.index());
    let value = object([("cotile", tj::periodic_set(&out)), ("stabilizer", tj::lattice(&stab)), ("verified", json!(verdict))]);
    let value = with_render(cli, value, &mut summary, &tuple.tiles()[0], &out)?;
    Ok(Outcome { value, verdict, summary })
}

fn piecewise(cli: &Cli, tiles: &Path, pieces: &Path) -> Result<Outcome, Failure> {
    let tuple = load_tuple(tiles)?;
    let v = read(pieces)?;
    let pieces = in_file(pieces, tj::pieces_from(&v, "$"))?;
    let out = piecewise_to_periodic(&tuple, &pieces)?;
    let verdict = verify::joint_tiles(&tuple, &out.cotile);
    let mut summary = format!(
        "periodic co-tile with period index {} from {} piece(s){}",
        out.cotile.lattice().index(),
        out.pieces,
        if out.direct { ", lifted directly" } else { "" }
    );
    let value = object([
        ("cotile", tj::periodic_set(&out.cotile)),
        ("direct", json!(out.direct)),
        ("pieces", json!(out.pieces)),
        ("lambdas", Value::Array(out.lambdas.iter().map(tj::lattice).collect())),
        ("verified", json!(verdict)),
    ]);
    let value = with_render(cli, value, &mut summary, &tuple.tiles()[0], &out.cotile)?;
    Ok(Outcome { value, verdict, summary })
}

fn stabilizer(pieces: Option<&Path>, cotile: Option<&Path>) -> Result<Outcome, Failure> {
    if let Some(path) = cotile {
        let a = load_set(path)?;
        let s = a.stabilizer();
        return Ok(Outcome {
            summary: format!("stabilizer of rank {} and index {}", s.rank(), s.index()),
            value: object([("stabilizer", tj::lattice(&s)), ("rank", json!(s.rank()))]),
            verdict: true,
        });
    }
    let path = pieces.ok_or_else(|| Failure::Usage("give --pieces or --cotile".into()))?;
    let v = read(path)?;
    let pieces = in_file(path, tj::pieces_from(&v, "$"))?;
    Ok(match common_stabilizer(&pieces)? {
        CommonStabilizer::AllDPeriodic => Outcome {
            value: object([("kind", json!("ALL_D_PERIODIC"))]),
            verdict: true,
            summary: "every piece is fully periodic".into(),
        },
        CommonStabilizer::Common(l) => Outcome {
            summary: format!("common periods of rank {}", l.rank()),
            value: object([("kind", json!("COMMON")), ("lattice", tj::lattice(&l)), ("rank", json!(l.rank()))]),
            verdict: true,
        },
    })
}
