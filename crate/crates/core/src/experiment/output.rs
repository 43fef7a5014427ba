use std::fmt::Write;

use super::ContourSet;
use crate::error::{Error, Result};
use crate::geometry2d::Vec2;
use crate::mesh::{Mesh, Rect};

const SIZE: f64 = 600.0;
const MARGIN: f64 = 40.0;

/// Minimal SVG writer mapping a world rectangle onto a fixed square
/// viewport, y axis pointing up.
pub struct SvgCanvas {
    world: Rect,
    body: String,
}

impl SvgCanvas {
    pub fn new(x0: f64, y0: f64, x1: f64, y1: f64) -> Self {
        Self {
            world: Rect::new(x0, y0, x1, y1),
            body: String::new(),
        }
    }

    fn map(&self, p: Vec2) -> (f64, f64) {
        let w = SIZE - 2.0 * MARGIN;
        let s = w / self.world.width().max(self.world.height());
        (
            MARGIN + (p.x - self.world.x0) * s,
            SIZE - MARGIN - (p.y - self.world.y0) * s,
        )
    }

    pub fn rect(&mut self, x: f64, y: f64, w: f64, h: f64, fill: &str) {
        let (ax, ay) = self.map(Vec2::new(x, y + h));
        let (bx, by) = self.map(Vec2::new(x + w, y));
        let _ = writeln!(
            self.body,
            r#"<rect x="{ax:.3}" y="{ay:.3}" width="{:.3}" height="{:.3}" fill="{fill}" stroke="none"/>"#,
            bx - ax,
            by - ay
        );
    }

    pub fn polyline(&mut self, pts: &[Vec2], stroke: &str, width: f64) {
        let coords: Vec<String> = pts
            .iter()
            .map(|&p| {
                let (x, y) = self.map(p);
                format!("{x:.3},{y:.3}")
            })
            .collect();
        let _ = writeln!(
            self.body,
            r#"<polyline points="{}" fill="none" stroke="{stroke}" stroke-width="{width}"/>"#,
            coords.join(" ")
        );
    }

    /// Outline of the world rectangle.
    pub fn frame(&mut self) {
        let r = self.world;
        let pts = [
            Vec2::new(r.x0, r.y0),
            Vec2::new(r.x1, r.y0),
            Vec2::new(r.x1, r.y1),
            Vec2::new(r.x0, r.y1),
            Vec2::new(r.x0, r.y0),
        ];
        self.polyline(&pts, "black", 1.0);
    }

    pub fn label_axes(&mut self, x: &str, y: &str) {
        let (cx, by) = self.map(Vec2::new(0.5 * (self.world.x0 + self.world.x1), self.world.y0));
        let (lx, cy) = self.map(Vec2::new(self.world.x0, 0.5 * (self.world.y0 + self.world.y1)));
        let _ = writeln!(
            self.body,
            r#"<text x="{cx:.3}" y="{:.3}" font-size="14" text-anchor="middle">{x}</text>"#,
            by + 28.0
        );
        let _ = writeln!(
            self.body,
            r#"<text x="{:.3}" y="{cy:.3}" font-size="14" text-anchor="middle" transform="rotate(-90 {:.3} {cy:.3})">{y}</text>"#,
            lx - 16.0,
            lx - 16.0
        );
    }

    pub fn finish(self) -> String {
        format!(
            "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{SIZE}\" height=\"{SIZE}\" viewBox=\"0 0 {SIZE} {SIZE}\">\n<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n{}</svg>\n",
            self.body
        )
    }
}

fn level_color(t: f64) -> String {
    // blue (low) to red (high)
    let t = t.clamp(0.0, 1.0);
    let r = (255.0 * t).round() as u8;
    let b = (255.0 * (1.0 - t)).round() as u8;
    format!("#{r:02x}40{b:02x}")
}

/// Contour lines over the domain outline.
pub fn contours_svg(domain: Rect, contours: &ContourSet) -> String {
    let mut c = SvgCanvas::new(domain.x0, domain.y0, domain.x1, domain.y1);
    let (lo, hi) = contours
        .levels
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &v| (a.min(v), b.max(v)));
    for (level, lines) in contours.levels.iter().zip(&contours.lines) {
        let t = if hi > lo { (level - lo) / (hi - lo) } else { 0.5 };
        let color = level_color(t);
        for line in lines {
            c.polyline(line, &color, 1.5);
        }
    }
    c.frame();
    c.label_axes("x", "y");
    c.finish()
}

pub const SOLUTION_CSV_HEADER: &str = "x,y,u,is_boundary";

/// One row per vertex in vertex order; `is_boundary` is 0 or 1.
pub fn solution_csv(m: &Mesh, u: &[f64], is_boundary: &[bool]) -> String {
    assert_eq!(u.len(), m.num_vertices(), "one value per vertex");
    assert_eq!(is_boundary.len(), m.num_vertices(), "one flag per vertex");
    let mut s = String::from(SOLUTION_CSV_HEADER);
    s.push('\n');
    for (i, p) in m.vertices().iter().enumerate() {
        let _ = writeln!(s, "{},{},{},{}", p.x, p.y, u[i], is_boundary[i] as u8);
    }
    s
}

/// Inverse of [`solution_csv`].
pub fn parse_solution_csv(text: &str) -> Result<Vec<(Vec2, f64, bool)>> {
    let mut lines = text.lines().enumerate();
    match lines.next() {
        Some((_, h)) if h.trim() == SOLUTION_CSV_HEADER => {}
        _ => {
            return Err(Error::Parse {
                line: 1,
                msg: format!("expected header '{SOLUTION_CSV_HEADER}'"),
            })
        }
    }
    let mut out = Vec::new();
    for (n, line) in lines {
        if line.trim().is_empty() {
            continue;
        }
        let err = |msg: String| Error::Parse { line: n + 1, msg };
        let f: Vec<&str> = line.split(',').collect();
        if f.len() != 4 {
            return Err(err(format!("expected 4 fields, found {}", f.len())));
        }
        let num = |s: &str| s.trim().parse::<f64>().map_err(|e| err(format!("'{s}': {e}")));
        let flag = match f[3].trim() {
            "0" => false,
            "1" => true,
            other => return Err(err(format!("is_boundary must be 0 or 1, got '{other}'"))),
        };
        out.push((Vec2::new(num(f[0])?, num(f[1])?), num(f[2])?, flag));
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::{generate_grid_mesh, GridPattern};
    use proptest::prelude::*;

    #[test]
    fn three_vertex_mesh_has_four_lines() {
        let m = Mesh::new(
            vec![Vec2::new(0.0, 0.0), Vec2::new(1.0, 0.0), Vec2::new(0.0, 1.0)],
            vec![[0, 1, 2]],
        )
        .unwrap();
        let s = solution_csv(&m, &[0.0, 0.5, 1.0], &[true; 3]);
        assert_eq!(s.lines().count(), 4);
        assert_eq!(s.lines().nth(2).unwrap(), "1,0,0.5,1");
    }

    #[test]
    fn bad_csv_is_rejected() {
        assert!(parse_solution_csv("a,b\n").is_err());
        assert!(parse_solution_csv("x,y,u,is_boundary\n1,2,3\n").is_err());
        assert!(parse_solution_csv("x,y,u,is_boundary\n1,2,3,yes\n").is_err());
    }

    #[test]
    fn svg_maps_domain_into_viewport() {
        let c = ContourSet {
            levels: vec![0.5],
            lines: vec![vec![vec![Vec2::new(0.0, 0.0), Vec2::new(16.0, 16.0)]]],
        };
        let s = contours_svg(Rect::new(0.0, 0.0, 16.0, 16.0), &c);
        assert!(s.contains(r#"points="40.000,560.000 560.000,40.000""#), "{s}");
    }

    proptest! {
        #[test]
        fn csv_round_trip_is_exact(vals in prop::collection::vec(-1e6..1e6f64, 9)) {
            let m = generate_grid_mesh(Rect::new(0.1, 0.2, 3.3, 1.7), 2, 2, GridPattern::Nw).unwrap();
            let flags: Vec<bool> = (0..9).map(|i| i != 4).collect();
            let back = parse_solution_csv(&solution_csv(&m, &vals, &flags)).unwrap();
            for (i, (p, u, b)) in back.into_iter().enumerate() {
                prop_assert_eq!(p, m.vertex(i));
                prop_assert_eq!(u.to_bits(), vals[i].to_bits());
                prop_assert_eq!(b, flags[i]);
            }
        }
    }
}
