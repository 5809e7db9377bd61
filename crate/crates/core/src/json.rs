//! JSON encoding of lattices, sets, tiles and functions (schema `tilekit/1`).
//!
//! Shape errors (wrong types, missing fields, bad syntax) are reported as
//! [`Error::Malformed`] with a path such as `$.lattice.basis[1]`; everything
//! that parses is canonicalized through the normal constructors, so
//! mathematical problems surface as the usual errors.

use std::str::FromStr;
use std::sync::Arc;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{ToPrimitive, Zero};
use serde_json::{json, Map, Value};

use crate::error::{Error, Result};
use crate::function::PeriodicFunction;
use crate::lattice::{Lattice, PeriodicSet};
use crate::point::Point;
use crate::solve::{membership, Membership, Piece};
use crate::tiles::{Tile, TileTuple};
use crate::torsion::{MixedSet, MixedTile};

pub const SCHEMA: &str = "tilekit/1";

fn malformed(path: &str, what: &str) -> Error {
    Error::Malformed(format!("at {path}: {what}"))
}

/// Parses JSON text, reporting syntax errors with line and column.
pub fn parse(text: &str) -> Result<Value> {
    serde_json::from_str(text)
        .map_err(|e| Error::Malformed(format!("line {} column {}: {e}", e.line(), e.column())))
}

/// Adds the schema tag to an object.
pub fn tag(mut v: Value) -> Value {
    if let Value::Object(m) = &mut v {
        m.insert("schema".into(), Value::String(SCHEMA.into()));
    }
    v
}

fn check_schema(v: &Value, path: &str) -> Result<()> {
    match v.get("schema") {
        None => Ok(()),
        Some(Value::String(s)) if s == SCHEMA => Ok(()),
        Some(other) => Err(malformed(path, &format!("unsupported schema {other}"))),
    }
}

fn field<'a>(v: &'a Value, key: &str, path: &str) -> Result<&'a Value> {
    v.as_object()
        .ok_or_else(|| malformed(path, "expected an object"))?
        .get(key)
        .ok_or_else(|| malformed(path, &format!("missing field \"{key}\"")))
}

fn array<'a>(v: &'a Value, path: &str) -> Result<&'a Vec<Value>> {
    v.as_array().ok_or_else(|| malformed(path, "expected an array"))
}

fn big_int(v: &Value, path: &str) -> Result<BigInt> {
    match v {
        Value::Number(n) => n.as_i64().map(BigInt::from).ok_or_else(|| malformed(path, "expected an integer")),
        Value::String(s) => BigInt::from_str(s.trim()).map_err(|_| malformed(path, "expected an integer")),
        _ => Err(malformed(path, "expected an integer")),
    }
}

fn int(v: &Value, path: &str) -> Result<i64> {
    v.as_i64().ok_or_else(|| malformed(path, "expected a 64-bit integer"))
}

fn usize_field(v: &Value, key: &str, path: &str) -> Result<usize> {
    let x = field(v, key, path)?;
    x.as_u64().map(|n| n as usize).ok_or_else(|| malformed(&format!("{path}.{key}"), "expected a natural number"))
}

pub fn point_from(v: &Value, path: &str) -> Result<Point> {
    array(v, path)?.iter().enumerate().map(|(i, x)| int(x, &format!("{path}[{i}]"))).collect()
}

fn points_from(v: &Value, path: &str) -> Result<Vec<Point>> {
    array(v, path)?.iter().enumerate().map(|(i, p)| point_from(p, &format!("{path}[{i}]"))).collect()
}

fn big_json(x: &BigInt) -> Value {
    match x.to_i64() {
        Some(n) => json!(n),
        None => json!(x.to_string()),
    }
}

/// Exact rational as `"p/q"`, or `"p"` for integers.
pub fn rational(r: &BigRational) -> Value {
    Value::String(r.to_string())
}

/// Accepts an integer, or a string `"p"` / `"p/q"`.
pub fn rational_from(v: &Value, path: &str) -> Result<BigRational> {
    match v {
        Value::Number(n) => {
            n.as_i64().map(|x| BigRational::from_integer(x.into())).ok_or_else(|| malformed(path, "expected an integer"))
        }
        Value::String(s) => {
            let s = s.trim();
            let parsed = match s.split_once('/') {
                Some((a, b)) => {
                    let (a, b) = (BigInt::from_str(a.trim()), BigInt::from_str(b.trim()));
                    match (a, b) {
                        (Ok(a), Ok(b)) if !b.is_zero() => Some(BigRational::new(a, b)),
                        _ => None,
                    }
                }
                None => BigInt::from_str(s).ok().map(BigRational::from_integer),
            };
            parsed.ok_or_else(|| malformed(path, &format!("\"{s}\" is not a rational")))
        }
        _ => Err(malformed(path, "expected a rational")),
    }
}

pub fn point(p: &[i64]) -> Value {
    json!(p)
}

pub fn lattice(l: &Lattice) -> Value {
    let basis: Vec<Value> = l.basis().iter().map(|c| Value::Array(c.iter().map(big_json).collect())).collect();
    json!({ "dim": l.dim(), "basis": basis })
}

/// `{"dim", "basis": [column, ..]}`; any generating set is accepted.
pub fn lattice_from(v: &Value, path: &str) -> Result<Lattice> {
    check_schema(v, path)?;
    let dim = usize_field(v, "dim", path)?;
    let bpath = format!("{path}.basis");
    let cols = array(field(v, "basis", path)?, &bpath)?
        .iter()
        .enumerate()
        .map(|(i, c)| {
            let cpath = format!("{bpath}[{i}]");
            array(c, &cpath)?.iter().enumerate().map(|(j, x)| big_int(x, &format!("{cpath}[{j}]"))).collect()
        })
        .collect::<Result<Vec<Vec<BigInt>>>>()?;
    Lattice::hnf(dim, &cols)
}

pub fn periodic_set(a: &PeriodicSet) -> Value {
    json!({ "lattice": lattice(a.lattice()), "members": a.members() })
}

/// `{"lattice", "members"}`; members are reduced to canonical residues.
pub fn periodic_set_from(v: &Value, path: &str) -> Result<PeriodicSet> {
    check_schema(v, path)?;
    let l = lattice_from(field(v, "lattice", path)?, &format!("{path}.lattice"))?;
    let members = points_from(field(v, "members", path)?, &format!("{path}.members"))?;
    PeriodicSet::new(l, members)
}

pub fn tile(t: &Tile) -> Value {
    json!({ "dim": t.dim(), "points": t.points() })
}

/// `{"dim", "points"}`; `dim` may be omitted when there is a point to infer it from.
pub fn tile_from(v: &Value, path: &str) -> Result<Tile> {
    check_schema(v, path)?;
    let points = points_from(field(v, "points", path)?, &format!("{path}.points"))?;
    let dim = match v.get("dim") {
        Some(_) => usize_field(v, "dim", path)?,
        None => points.first().map(Vec::len).ok_or(Error::EmptyTile)?,
    };
    Tile::new(dim, points)
}

pub fn tuple(t: &TileTuple) -> Value {
    json!({ "tiles": t.iter().map(tile).collect::<Vec<_>>() })
}

pub fn tiles(ts: &[Tile]) -> Value {
    json!({ "tiles": ts.iter().map(tile).collect::<Vec<_>>() })
}

/// `{"tiles": [..]}`, or a single tile object.
pub fn tuple_from(v: &Value, path: &str) -> Result<TileTuple> {
    check_schema(v, path)?;
    if v.get("tiles").is_none() {
        return TileTuple::single(tile_from(v, path)?);
    }
    let tpath = format!("{path}.tiles");
    let tiles = array(field(v, "tiles", path)?, &tpath)?
        .iter()
        .enumerate()
        .map(|(i, t)| tile_from(t, &format!("{tpath}[{i}]")))
        .collect::<Result<Vec<_>>>()?;
    TileTuple::new(tiles)
}

pub fn function(f: &PeriodicFunction) -> Value {
    let values: Vec<Value> = f.entries().map(|(at, v)| json!({ "at": at, "value": rational(v) })).collect();
    json!({ "lattice": lattice(f.lattice()), "values": values })
}

/// `{"lattice", "values": [{"at", "value"}], "default"?}`. Each residue must be
/// given exactly once unless `default` fills the rest.
pub fn function_from(v: &Value, path: &str) -> Result<PeriodicFunction> {
    check_schema(v, path)?;
    let l = lattice_from(field(v, "lattice", path)?, &format!("{path}.lattice"))?;
    let q = l.quotient()?;
    let default = match v.get("default") {
        Some(d) => Some(rational_from(d, &format!("{path}.default"))?),
        None => None,
    };
    let mut values: Vec<Option<BigRational>> = vec![None; q.order()];
    let vpath = format!("{path}.values");
    for (i, e) in array(field(v, "values", path)?, &vpath)?.iter().enumerate() {
        let epath = format!("{vpath}[{i}]");
        let at = point_from(field(e, "at", &epath)?, &format!("{epath}.at"))?;
        crate::error::check_dim(l.dim(), at.len())?;
        let val = rational_from(field(e, "value", &epath)?, &format!("{epath}.value"))?;
        let idx = q.index_of(&at);
        if values[idx].is_some() {
            return Err(Error::InvalidInput(format!("residue of {at:?} is given twice")));
        }
        values[idx] = Some(val);
    }
    let values = values
        .into_iter()
        .enumerate()
        .map(|(i, x)| {
            x.or_else(|| default.clone())
                .ok_or_else(|| Error::InvalidInput(format!("no value for residue {:?}", q.residue(i))))
        })
        .collect::<Result<Vec<_>>>()?;
    PeriodicFunction::new(&l, values)
}

/// A function given either as a function object or as a periodic set (its indicator).
pub fn function_or_set_from(v: &Value, path: &str) -> Result<PeriodicFunction> {
    if v.get("members").is_some() {
        Ok(PeriodicFunction::indicator(&periodic_set_from(v, path)?))
    } else {
        function_from(v, path)
    }
}

pub fn mixed_tile(t: &MixedTile) -> Value {
    let pts: Vec<Value> = t.points().map(|&(n, r)| json!([n, r])).collect();
    json!({ "p": t.p(), "points": pts })
}

/// `{"p", "points": [[n, t], ..]}`.
pub fn mixed_tile_from(v: &Value, path: &str) -> Result<MixedTile> {
    check_schema(v, path)?;
    let p = usize_field(v, "p", path)? as u64;
    let pts = points_from(field(v, "points", path)?, &format!("{path}.points"))?;
    let mut out = Vec::with_capacity(pts.len());
    for (i, x) in pts.iter().enumerate() {
        match x.as_slice() {
            &[n, t] => out.push((n, t.rem_euclid(p.max(1) as i64) as u64)),
            _ => return Err(malformed(&format!("{path}.points[{i}]"), "expected a pair [n, t]")),
        }
    }
    MixedTile::new(p, out)
}

pub fn mixed_set(a: &MixedSet) -> Value {
    json!({ "p": a.p(), "fibers": a.fibers().iter().map(periodic_set).collect::<Vec<_>>() })
}

/// `{"p", "fibers": [PeriodicSet; p]}`; fiber `t` lists the `n` with `(n, t)` in the set.
pub fn mixed_set_from(v: &Value, path: &str) -> Result<MixedSet> {
    check_schema(v, path)?;
    let p = usize_field(v, "p", path)? as u64;
    let fpath = format!("{path}.fibers");
    let fibers = array(field(v, "fibers", path)?, &fpath)?
        .iter()
        .enumerate()
        .map(|(i, f)| periodic_set_from(f, &format!("{fpath}[{i}]")))
        .collect::<Result<Vec<_>>>()?;
    MixedSet::new(p, fibers)
}

fn is_square(n: i64) -> bool {
    if n < 0 {
        return false;
    }
    let r = (n as f64).sqrt() as i64;
    (r.saturating_sub(1)..=r + 1).any(|k| k >= 0 && k.checked_mul(k) == Some(n))
}

/// A membership oracle described by a region expression:
///
/// * `{"set": PeriodicSet}`
/// * `{"halfspace": {"normal": [..], "at_least": c}}`, the points with `normal . x >= c`
/// * `{"square_index": {"coord": i, "modulus": m}}`, the points with `x_i = m k^2` for some `k`
/// * `{"and": [..]}`, `{"or": [..]}`, `{"not": region}`
pub fn region_from(v: &Value, dim: usize, path: &str) -> Result<Membership> {
    let obj = v.as_object().ok_or_else(|| malformed(path, "expected a region object"))?;
    let keys: Vec<&String> = obj.keys().filter(|k| *k != "comment").collect();
    let [key] = keys.as_slice() else {
        return Err(malformed(path, "a region has exactly one operator"));
    };
    let inner = &obj[key.as_str()];
    let ipath = format!("{path}.{key}");
    match key.as_str() {
        "set" => {
            let a = periodic_set_from(inner, &ipath)?;
            crate::error::check_dim(dim, a.dim())?;
            Ok(membership(&a))
        }
        "halfspace" => {
            let normal = point_from(field(inner, "normal", &ipath)?, &format!("{ipath}.normal"))?;
            crate::error::check_dim(dim, normal.len())?;
            let c = int(field(inner, "at_least", &ipath)?, &format!("{ipath}.at_least"))?;
            Ok(Arc::new(move |x: &[i64]| x.iter().zip(&normal).map(|(a, b)| a * b).sum::<i64>() >= c))
        }
        "square_index" => {
            let coord = usize_field(inner, "coord", &ipath)?;
            if coord >= dim {
                return Err(Error::DimensionMismatch { expected: dim, found: coord + 1 });
            }
            let m = int(field(inner, "modulus", &ipath)?, &format!("{ipath}.modulus"))?;
            if m <= 0 {
                return Err(malformed(&ipath, "modulus must be positive"));
            }
            Ok(Arc::new(move |x: &[i64]| x[coord].rem_euclid(m) == 0 && is_square(x[coord] / m)))
        }
        "and" | "or" => {
            let parts = array(inner, &ipath)?
                .iter()
                .enumerate()
                .map(|(i, r)| region_from(r, dim, &format!("{ipath}[{i}]")))
                .collect::<Result<Vec<_>>>()?;
            if key.as_str() == "and" {
                Ok(Arc::new(move |x: &[i64]| parts.iter().all(|m| m(x))))
            } else {
                Ok(Arc::new(move |x: &[i64]| parts.iter().any(|m| m(x))))
            }
        }
        "not" => {
            let m = region_from(inner, dim, &ipath)?;
            Ok(Arc::new(move |x: &[i64]| !m(x)))
        }
        other => Err(malformed(path, &format!("unknown region operator \"{other}\""))),
    }
}

/// `{"period": Lattice, "region": region}`: a set with the declared periods.
pub fn piece_from(v: &Value, path: &str) -> Result<Piece> {
    check_schema(v, path)?;
    let gamma = lattice_from(field(v, "period", path)?, &format!("{path}.period"))?;
    let member = region_from(field(v, "region", path)?, gamma.dim(), &format!("{path}.region"))?;
    Ok(Piece::new(gamma, member))
}

/// `{"pieces": [piece, ..]}`.
pub fn pieces_from(v: &Value, path: &str) -> Result<Vec<Piece>> {
    check_schema(v, path)?;
    let ppath = format!("{path}.pieces");
    array(field(v, "pieces", path)?, &ppath)?
        .iter()
        .enumerate()
        .map(|(i, p)| piece_from(p, &format!("{ppath}[{i}]")))
        .collect()
}

/// An object with the schema tag and the given fields.
pub fn object(fields: impl IntoIterator<Item = (&'static str, Value)>) -> Value {
    let mut m = Map::new();
    m.insert("schema".into(), Value::String(SCHEMA.into()));
    for (k, v) in fields {
        m.insert(k.into(), v);
    }
    Value::Object(m)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::function::rat;

    #[test]
    fn lattice_is_canonicalized() {
        let v = parse(r#"{"dim": 2, "basis": [[2, 0], [1, 3], [4, 6]]}"#).unwrap();
        let l = lattice_from(&v, "$").unwrap();
        assert_eq!(l, Lattice::from_points(2, &[vec![2, 0], vec![1, 3]]).unwrap());
        assert_eq!(lattice_from(&lattice(&l), "$").unwrap(), l);
        let big = parse(r#"{"dim": 1, "basis": [["123456789012345678901234567890"]]}"#).unwrap();
        assert!(lattice_from(&big, "$").unwrap().index().to_u64().is_none());
    }

    #[test]
    fn malformed_inputs_name_their_location() {
        let e = parse("{\"dim\": 2,\n \"basis\": [}").unwrap_err();
        assert!(matches!(&e, Error::Malformed(m) if m.starts_with("line 2")), "{e}");
        let v = parse(r#"{"dim": 2, "basis": [[1, "x"]]}"#).unwrap();
        let e = lattice_from(&v, "$").unwrap_err();
        assert_eq!(e, Error::Malformed("at $.basis[0][1]: expected an integer".into()));
        let v = parse(r#"{"lattice": {"dim": 1, "basis": [[2]]}}"#).unwrap();
        assert!(matches!(periodic_set_from(&v, "$"), Err(Error::Malformed(_))));
        let v = parse(r#"{"schema": "tilekit/9", "dim": 1, "points": [[0]]}"#).unwrap();
        assert!(matches!(tile_from(&v, "$"), Err(Error::Malformed(_))));
    }

    #[test]
    fn sets_tiles_and_functions() {
        let v = parse(r#"{"lattice": {"dim": 1, "basis": [[4]]}, "members": [[5], [-4]]}"#).unwrap();
        let a = periodic_set_from(&v, "$").unwrap();
        assert_eq!(a.members(), &[vec![0], vec![1]]);
        assert_eq!(periodic_set_from(&periodic_set(&a), "$").unwrap(), a);

        let t = tile_from(&parse(r#"{"points": [[3], [0]], "comment": "pair"}"#).unwrap(), "$").unwrap();
        assert_eq!(t, Tile::from_ints(&[0, 3]).unwrap());
        let tt = tuple_from(&tuple(&TileTuple::single(Tile::from_ints(&[0, 1]).unwrap()).unwrap()), "$").unwrap();
        assert_eq!(tt.len(), 1);

        let f = parse(r#"{"lattice": {"dim": 1, "basis": [[3]]}, "values": [{"at": [1], "value": "-1/2"}], "default": 2}"#)
            .unwrap();
        let f = function_from(&f, "$").unwrap();
        assert_eq!(f.values(), &[rat(2), rat(-1) / rat(2), rat(2)]);
        assert_eq!(function_from(&function(&f), "$").unwrap(), f);
        let missing = parse(r#"{"lattice": {"dim": 1, "basis": [[2]]}, "values": [{"at": [0], "value": "1"}]}"#).unwrap();
        assert!(matches!(function_from(&missing, "$"), Err(Error::InvalidInput(_))));
        assert_eq!(function_or_set_from(&periodic_set(&a), "$").unwrap(), PeriodicFunction::indicator(&a));
    }

    #[test]
    fn mixed_objects() {
        let t = mixed_tile_from(&parse(r#"{"p": 3, "points": [[0, 0], [0, 4], [1, 2]]}"#).unwrap(), "$").unwrap();
        assert_eq!(t.fiber(0), vec![0, 1]);
        assert_eq!(mixed_tile_from(&mixed_tile(&t), "$").unwrap(), t);
        let all = PeriodicSet::everything(Lattice::full(1)).unwrap();
        let none = PeriodicSet::new(Lattice::full(1), []).unwrap();
        let a = MixedSet::new(2, vec![all, none]).unwrap();
        assert_eq!(mixed_set_from(&mixed_set(&a), "$").unwrap(), a);
        assert!(matches!(mixed_tile_from(&parse(r#"{"p": 4, "points": [[0, 0]]}"#).unwrap(), "$"), Err(Error::NotPrime(4))));
    }

    #[test]
    fn regions() {
        let v = parse(
            r#"{"or": [
                {"and": [{"square_index": {"coord": 1, "modulus": 2}}, {"halfspace": {"normal": [1, 0], "at_least": 3}}]},
                {"not": {"set": {"lattice": {"dim": 2, "basis": [[2, 0], [0, 1]]}, "members": [[0, 0]]}}}
            ]}"#,
        )
        .unwrap();
        let m = region_from(&v, 2, "$").unwrap();
        assert!(m(&[3, 8]));
        assert!(!m(&[2, 8]) && m(&[4, 8]));
        assert!(!m(&[4, 6]));
        assert!(m(&[1, 6]));
        assert!(m(&[5, -2]) && !m(&[2, -2]));
        let bad = parse(r#"{"and": [], "or": []}"#).unwrap();
        assert!(matches!(region_from(&bad, 2, "$"), Err(Error::Malformed(_))));
        assert!(is_square(0) && is_square(49) && !is_square(50) && !is_square(-1));

        let p = parse(r#"{"pieces": [{"period": {"dim": 2, "basis": [[1, 0]]}, "region": {"halfspace": {"normal": [0, 1], "at_least": 0}}}]}"#)
            .unwrap();
        let pieces = pieces_from(&p, "$").unwrap();
        assert_eq!(pieces[0].gamma.rank(), 1);
        assert!(pieces[0].contains(&[7, 0]) && !pieces[0].contains(&[7, -1]));
    }

    #[test]
    fn tagged_objects() {
        let v = object([("ok", json!(true))]);
        assert_eq!(v["schema"], SCHEMA);
        assert_eq!(tag(json!({}))["schema"], SCHEMA);
    }
}
