use std::path::PathBuf;
use std::process::{Command, Output};

use serde_json::Value;

fn fixture(name: &str) -> String {
    let root = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../fixtures").join(name);
    root.to_string_lossy().into_owned()
}

fn tilekit(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_tilekit")).args(args).output().expect("binary runs")
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exited normally")
}

fn json_of(out: &Output) -> Value {
    let v: Value = serde_json::from_slice(&out.stdout).expect("stdout is JSON");
    assert_eq!(v["schema"], "tilekit/1");
    v
}

fn write_temp(name: &str, text: &str) -> String {
    let path = std::env::temp_dir().join(format!("tilekit-cli-{}-{name}", std::process::id()));
    std::fs::write(&path, text).unwrap();
    path.to_string_lossy().into_owned()
}

#[test]
fn slab_pair_verifies() {
    let out = tilekit(&["verify", "--json", "--tiles", &fixture("slab_pair_tiles.json"), "--cotile", &fixture("slab_pair_cotile.json")]);
    assert_eq!(code(&out), 0);
    assert_eq!(json_of(&out)["verdict"], true);
}

#[test]
fn six_point_tile_does_not_tile_z() {
    let out = tilekit(&["solve-z", "--json", "--tile", &fixture("no_tiling_tile.json")]);
    assert_eq!(code(&out), 3);
    let v = json_of(&out);
    assert_eq!(v["verdict"], "NO-TILING");
    assert_eq!(v["bound"], 256);
}

#[test]
fn six_point_tile_tiles_at_level_one() {
    let args = ["verify", "--tiles", &fixture("no_tiling_tile.json"), "--cotile", &fixture("no_tiling_level_fn.json")];
    let out = tilekit(&[&args[..], &["--level", "1"]].concat());
    assert_eq!(code(&out), 0);
    let out = tilekit(&[&args[..], &["--level", "2", "--json"]].concat());
    assert_eq!(code(&out), 3);
    assert!(json_of(&out)["tiles"][0]["defect_count"].as_u64().unwrap() > 0);
}

#[test]
fn defects_are_listed() {
    let tiles = fixture("pair_tile.json");
    let bad = write_temp("defect.json", r#"{"lattice": {"dim": 1, "basis": [[4]]}, "members": [[0], [1]]}"#);
    let out = tilekit(&["verify", "--json", "--tiles", &tiles, "--cotile", &bad]);
    assert_eq!(code(&out), 3);
    let report = &json_of(&out)["tiles"][0];
    assert_eq!(report["defect_count"], 2);
    let residues: Vec<&Value> = report["defects"].as_array().unwrap().iter().map(|d| &d["residue"]).collect();
    assert_eq!(residues, [&serde_json::json!([1]), &serde_json::json!([3])]);
}

#[test]
fn solve_output_feeds_verify() {
    let out = tilekit(&["solve", "--json", "--tiles", &fixture("plane_patch_tiles.json"), "--max-index", "9"]);
    assert_eq!(code(&out), 0);
    let path = write_temp("solved.json", &String::from_utf8(out.stdout).unwrap());
    let out = tilekit(&["verify", "--tiles", &fixture("plane_patch_tiles.json"), "--cotile", &path]);
    assert_eq!(code(&out), 0);
}

#[test]
fn solve_requires_max_index_and_reports_exhaustion() {
    let tiles = fixture("plane_patch_tiles.json");
    assert_eq!(code(&tilekit(&["solve", "--tiles", &tiles])), 1);
    assert_eq!(code(&tilekit(&["solve", "--tiles", &tiles, "--max-index", "2"])), 3);
}

#[test]
fn independent_and_star() {
    let out = tilekit(&["star", "--json", "--tiles", &fixture("slab_pair_tiles.json")]);
    assert_eq!(code(&out), 0);
    assert_eq!(json_of(&out)["property_star"], true);
    let out = tilekit(&["independent", "--json", "--tiles", &fixture("slab_brothers.json")]);
    assert_eq!(code(&out), 0);
    assert_eq!(json_of(&out)["independent"], true);
    let out = tilekit(&["independent", "--json", "--tiles", &fixture("plane_patch_tiles.json")]);
    assert_eq!(code(&out), 3);
    assert!(json_of(&out)["witness"].is_array());
}

#[test]
fn random_tuples_depend_only_on_the_seed() {
    let run = |seed: &str| tilekit(&["independent", "--json", "--random-dim", "2", "--size", "3", "--seed", seed, "--cotiles"]);
    let (a, b, c) = (run("11"), run("11"), run("12"));
    assert_eq!(code(&a), 0);
    assert_eq!(a.stdout, b.stdout);
    assert_ne!(a.stdout, c.stdout);
}

#[test]
fn decomposition_and_dilation() {
    let out = tilekit(&["decompose", "--json", "--tiles", &fixture("slab_pair_tiles.json"), "--cotile", &fixture("slab_pair_cotile.json")]);
    assert_eq!(code(&out), 0);
    let v = json_of(&out);
    assert_eq!(v["q"], 6);
    assert_eq!(v["constants"][1], "-2");
    let out = tilekit(&["decompose", "--tiles", &fixture("level_tiles.json"), "--cotile", &fixture("evens.json"), "--levels", "2,1"]);
    assert_eq!(code(&out), 0);

    let out = tilekit(&["dilate", "--tile", &fixture("pair_tile.json"), "--cotile", &fixture("evens.json"), "--r", "2"]);
    assert_eq!(code(&out), 3);
    let out = tilekit(&["dilate", "--json", "--tile", &fixture("pair_tile.json"), "--cotile", &fixture("evens.json"), "--r", "3"]);
    assert_eq!(code(&out), 0);
    assert_eq!(json_of(&out)["r_is_1_mod_q"], true);
}

#[test]
fn brothers_round_trip() {
    let out = tilekit(&["brothers", "--json", "--tile", &fixture("bar_tile.json"), "--cotile", &fixture("bar_cotile.json")]);
    assert_eq!(code(&out), 0);
    let v = json_of(&out);
    assert_eq!(v["tiles"].as_array().unwrap().len(), 2);
    let path = write_temp("brothers.json", &String::from_utf8(out.stdout).unwrap());
    assert_eq!(code(&tilekit(&["verify", "--tiles", &path, "--cotile", &path])), 0);
    assert_eq!(code(&tilekit(&["independent", "--tiles", &path])), 0);
}

#[test]
fn torsion_verdicts() {
    let out = tilekit(&["zp", "--json", "--p", "3", "--tile", &fixture("zp_generic_tile.json"), "--cotile", &fixture("zp_generic_cotile.json")]);
    assert_eq!(code(&out), 0);
    let v = json_of(&out);
    assert_eq!(v["classification"]["kind"], "GENERIC");
    assert_eq!(v["verdict"]["recovered"], true);
    let out = tilekit(&["zp", "--json", "--p", "2", "--tile", &fixture("zp_full_tile.json"), "--cotile", &fixture("zp_full_cotile.json")]);
    assert_eq!(code(&out), 0);
    assert_eq!(json_of(&out)["classification"]["kind"], "FULL_FIBER");
    assert_eq!(code(&tilekit(&["zp", "--p", "4", "--tile", &fixture("zp_full_tile.json")])), 2);
}

#[test]
fn lifting_pieces_and_stabilizers() {
    let out = tilekit(&["lift", "--json", "--tiles", &fixture("domino_tile.json"), "--cotile", &fixture("shifted_rows_piece.json")]);
    assert_eq!(code(&out), 0);
    let lifted = json_of(&out);
    assert_eq!(lifted["verified"], true);
    let path = write_temp("lifted.json", &lifted.to_string());
    assert_eq!(code(&tilekit(&["verify", "--tiles", &fixture("domino_tile.json"), "--cotile", &path])), 0);

    let out = tilekit(&["piecewise", "--json", "--tiles", &fixture("domino_tile.json"), "--pieces", &fixture("two_pieces.json")]);
    assert_eq!(code(&out), 0);
    assert_eq!(json_of(&out)["verified"], true);

    let out = tilekit(&["stabilizer", "--json", "--pieces", &fixture("half_planes.json")]);
    assert_eq!(code(&out), 0);
    assert_eq!(json_of(&out)["rank"], 1);
    let out = tilekit(&["stabilizer", "--json", "--cotile", &fixture("bar_cotile.json")]);
    assert_eq!(json_of(&out)["rank"], 2);
}

#[test]
fn rendering() {
    let out = tilekit(&["verify", "--tiles", &fixture("bar_tile.json"), "--cotile", &fixture("bar_cotile.json"), "--render", "ascii", "--window", "2"]);
    assert_eq!(code(&out), 0);
    let text = String::from_utf8(out.stdout).unwrap();
    let picture: Vec<&str> = text.lines().skip(1).collect();
    assert_eq!(picture.len(), 5);
    assert!(picture.iter().all(|l| l.len() == 5 && !l.contains('.') && !l.contains('#')));
    let out = tilekit(&["solve-z", "--json", "--tile", &fixture("pair_tile.json"), "--render", "svg"]);
    assert!(json_of(&out)["render"].as_str().unwrap().starts_with("<svg"));
}

#[test]
fn exit_codes_for_bad_input() {
    let garbage = write_temp("garbage.json", "{\"dim\": 2,\n \"points\": [[0, 0], [1,]]}");
    let out = tilekit(&["solve-z", "--tile", &garbage]);
    assert_eq!(code(&out), 1);
    assert!(String::from_utf8_lossy(&out.stderr).contains("line 2"));

    let wrong_shape = write_temp("shape.json", r#"{"dim": 1, "points": [[0], ["x"]]}"#);
    let out = tilekit(&["solve-z", "--tile", &wrong_shape]);
    assert_eq!(code(&out), 1);
    assert!(String::from_utf8_lossy(&out.stderr).contains("$.points[1][0]"));

    let out = tilekit(&["verify", "--json", "--tiles", &fixture("domino_tile.json"), "--cotile", &fixture("evens.json")]);
    assert_eq!(code(&out), 2);
    assert_eq!(json_of(&out)["kind"], "contract");

    assert_eq!(code(&tilekit(&["verify", "--tiles", "/nonexistent.json", "--cotile", "/nonexistent.json"])), 1);
    assert_eq!(code(&tilekit(&["no-such-command"])), 1);
    assert_eq!(code(&tilekit(&["--help"])), 0);
}
