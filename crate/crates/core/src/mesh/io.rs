//! Line-oriented mesh text format:
//!
//! ```text
//! meshfmt 1
//! <N_v> <N>
//! v <x> <y>        (N_v lines)
//! t <i> <j> <k>    (N lines, 0-based, counterclockwise)
//! ```
//!
//! Blank lines and anything after `#` are ignored. Coordinates are written
//! with the shortest representation that parses back to the same `f64`.

use std::fmt::Write as _;

use super::Mesh;
use crate::error::{Error, Result};
use crate::geometry2d::Vec2;

pub fn write_mesh(m: &Mesh) -> String {
    let mut out = String::with_capacity(32 * (m.num_vertices() + m.num_triangles()) + 32);
    out.push_str("meshfmt 1\n");
    let _ = writeln!(out, "{} {}", m.num_vertices(), m.num_triangles());
    for v in m.vertices() {
        let _ = writeln!(out, "v {} {}", v.x, v.y);
    }
    for t in m.triangles() {
        let _ = writeln!(out, "t {} {} {}", t[0], t[1], t[2]);
    }
    out
}

fn parse_err(line: usize, msg: impl Into<String>) -> Error {
    Error::Parse {
        line,
        msg: msg.into(),
    }
}

fn field<T: std::str::FromStr>(tok: Option<&str>, line: usize, what: &str) -> Result<T> {
    let tok = tok.ok_or_else(|| parse_err(line, format!("missing {what}")))?;
    tok.parse()
        .map_err(|_| parse_err(line, format!("cannot parse {what} from {tok:?}")))
}

pub fn read_mesh(text: &str) -> Result<Mesh> {
    let mut lines = text
        .lines()
        .enumerate()
        .map(|(n, l)| (n + 1, l.split('#').next().unwrap_or("").trim()))
        .filter(|(_, l)| !l.is_empty());

    let (n, header) = lines.next().ok_or_else(|| parse_err(1, "empty file"))?;
    if header.split_whitespace().collect::<Vec<_>>() != ["meshfmt", "1"] {
        return Err(parse_err(n, format!("expected `meshfmt 1`, found {header:?}")));
    }
    let (n, counts) = lines.next().ok_or_else(|| parse_err(n + 1, "missing counts line"))?;
    let mut toks = counts.split_whitespace();
    let nv: usize = field(toks.next(), n, "vertex count")?;
    let nt: usize = field(toks.next(), n, "triangle count")?;
    if toks.next().is_some() {
        return Err(parse_err(n, "trailing tokens after counts"));
    }

    let mut vertices = Vec::with_capacity(nv);
    let mut triangles = Vec::with_capacity(nt);
    let mut last = n;
    for (n, line) in lines {
        last = n;
        let mut toks = line.split_whitespace();
        match toks.next() {
            Some("v") => {
                if !triangles.is_empty() {
                    return Err(parse_err(n, "vertex after triangles"));
                }
                if vertices.len() == nv {
                    return Err(parse_err(n, format!("more than {nv} vertices")));
                }
                let x: f64 = field(toks.next(), n, "x")?;
                let y: f64 = field(toks.next(), n, "y")?;
                vertices.push(Vec2::new(x, y));
            }
            Some("t") => {
                if triangles.len() == nt {
                    return Err(parse_err(n, format!("more than {nt} triangles")));
                }
                let i: usize = field(toks.next(), n, "vertex index")?;
                let j: usize = field(toks.next(), n, "vertex index")?;
                let k: usize = field(toks.next(), n, "vertex index")?;
                triangles.push([i, j, k]);
            }
            Some(other) => return Err(parse_err(n, format!("unknown record {other:?}"))),
            None => unreachable!("blank lines are filtered"),
        }
        if toks.next().is_some() {
            return Err(parse_err(n, "trailing tokens"));
        }
    }
    if vertices.len() != nv || triangles.len() != nt {
        return Err(parse_err(
            last,
            format!(
                "expected {nv} vertices and {nt} triangles, found {} and {}",
                vertices.len(),
                triangles.len()
            ),
        ));
    }
    Mesh::new(vertices, triangles)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::{generate_delaunay_mesh, generate_grid_mesh, DelaunayParams, GridPattern, Rect};
    use proptest::prelude::*;

    const ONE: &str = "meshfmt 1\n3 1\nv 0 0\nv 1 0\nv 0 1\nt 0 1 2\n";

    #[test]
    fn minimal_file() {
        let m = read_mesh(ONE).unwrap();
        assert_eq!((m.num_vertices(), m.num_triangles()), (3, 1));
        assert_eq!(write_mesh(&m), ONE);
    }

    #[test]
    fn comments_and_blank_lines() {
        let text = "# a mesh\nmeshfmt 1\n\n3 1 # counts\nv 0 0\nv 1 0\nv 0 1\nt 0 1 2\n";
        assert_eq!(read_mesh(text).unwrap().num_triangles(), 1);
    }

    #[test]
    fn clockwise_is_validation_error() {
        let text = ONE.replace("t 0 1 2", "t 0 2 1");
        assert!(matches!(read_mesh(&text), Err(Error::Validation(_))));
    }

    #[test]
    fn parse_errors_carry_line_numbers() {
        let text = ONE.replace("v 1 0", "v 1 zero");
        assert!(matches!(read_mesh(&text), Err(Error::Parse { line: 4, .. })));
        assert!(matches!(read_mesh("meshfmt 2\n"), Err(Error::Parse { line: 1, .. })));
        let text = ONE.replace("3 1", "4 1");
        assert!(matches!(read_mesh(&text), Err(Error::Parse { .. })));
        let text = ONE.replace("t 0 1 2", "q 0 1 2");
        assert!(matches!(read_mesh(&text), Err(Error::Parse { line: 6, .. })));
    }

    #[test]
    fn grid_round_trip_is_identical() {
        let m = generate_grid_mesh(Rect::unit(), 2, 2, GridPattern::Ne).unwrap();
        let text = write_mesh(&m);
        assert_eq!(write_mesh(&read_mesh(&text).unwrap()), text);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(16))]
        #[test]
        fn round_trip_is_bit_exact(seed in any::<u64>(), n in 1usize..8) {
            let d = Rect::new(-0.1, 1.0 / 3.0, 7.3, 9.1);
            let m = generate_delaunay_mesh(d, n, n, DelaunayParams { jitter: 0.45, seed }).unwrap();
            let back = read_mesh(&write_mesh(&m)).unwrap();
            prop_assert_eq!(back, m);
        }
    }
}
