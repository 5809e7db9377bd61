//! Pictures of a tiling patch: each cell of the window `[-n, n]^2` is
//! labelled by the translate `a + F` covering it. Higher dimensions are cut
//! along the first two coordinates; `Z` is drawn as one row.

use std::collections::BTreeMap;

use tilekit::{PeriodicSet, Tile};

use crate::{Failure, RenderKind};

const LABELS: &[u8] = b"ABCDEFGHIJKLMNOPQRSTUVWXYZabcdefghijklmnopqrstuvwxyz0123456789";
const MAX_WINDOW: i64 = 60;

enum Cell {
    Gap,
    Overlap,
    Translate(usize),
}

fn cells(tile: &Tile, cotile: &PeriodicSet, n: i64) -> Result<Vec<Vec<Cell>>, Failure> {
    let d = tile.dim();
    if cotile.dim() != d {
        return Err(tilekit::Error::DimensionMismatch { expected: d, found: cotile.dim() }.into());
    }
    if !(0..=MAX_WINDOW).contains(&n) {
        return Err(Failure::Usage(format!("--window must be between 0 and {MAX_WINDOW}")));
    }
    let ys: Vec<i64> = if d == 1 { vec![0] } else { (-n..=n).rev().collect() };
    let mut ids: BTreeMap<Vec<i64>, usize> = BTreeMap::new();
    let mut rows = Vec::new();
    for &y in &ys {
        let mut row = Vec::new();
        for x in -n..=n {
            let mut p = vec![0; d];
            p[0] = x;
            if d > 1 {
                p[1] = y;
            }
            let owners: Vec<Vec<i64>> = tile
                .points()
                .iter()
                .map(|f| p.iter().zip(f).map(|(a, b)| a - b).collect::<Vec<i64>>())
                .filter(|a| cotile.contains(a))
                .collect();
            row.push(match owners.as_slice() {
                [] => Cell::Gap,
                [a] => {
                    let next = ids.len();
                    Cell::Translate(*ids.entry(a.clone()).or_insert(next))
                }
                _ => Cell::Overlap,
            });
        }
        rows.push(row);
    }
    Ok(rows)
}

fn ascii(rows: &[Vec<Cell>]) -> String {
    let lines: Vec<String> = rows
        .iter()
        .map(|row| {
            row.iter()
                .map(|c| match c {
                    Cell::Gap => '.',
                    Cell::Overlap => '#',
                    Cell::Translate(i) => LABELS[i % LABELS.len()] as char,
                })
                .collect()
        })
        .collect();
    lines.join("\n")
}

fn svg(rows: &[Vec<Cell>]) -> String {
    const SIZE: usize = 20;
    let height = rows.len() * SIZE;
    let width = rows.first().map_or(0, Vec::len) * SIZE;
    let mut out = format!(r#"<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}">"#);
    for (r, row) in rows.iter().enumerate() {
        for (c, cell) in row.iter().enumerate() {
            let fill = match cell {
                Cell::Gap => "white".to_string(),
                Cell::Overlap => "black".to_string(),
                // golden-angle hues keep neighbouring translates apart
                Cell::Translate(i) => format!("hsl({:.0},60%,65%)", (*i as f64 * 137.508) % 360.0),
            };
            out.push_str(&format!(
                r#"<rect x="{}" y="{}" width="{SIZE}" height="{SIZE}" fill="{fill}" stroke="grey" stroke-width="0.5"/>"#,
                c * SIZE,
                r * SIZE
            ));
        }
    }
    out.push_str("</svg>");
    out
}

pub fn render(kind: RenderKind, tile: &Tile, cotile: &PeriodicSet, n: i64) -> Result<String, Failure> {
    let rows = cells(tile, cotile, n)?;
    Ok(match kind {
        RenderKind::Ascii => ascii(&rows),
        RenderKind::Svg => svg(&rows),
    })
}
