use std::collections::HashMap;

use crate::geometry2d::Vec2;
use crate::mesh::Mesh;

/// Iso-lines of a piecewise linear nodal field.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct ContourSet {
    /// Levels that were drawn, i.e. strictly inside the range of the field.
    pub levels: Vec<f64>,
    /// Polylines for each entry of `levels`.
    pub lines: Vec<Vec<Vec<Vec2>>>,
}

impl ContourSet {
    pub fn is_empty(&self) -> bool {
        self.levels.is_empty()
    }

    pub fn num_segments(&self) -> usize {
        self.lines
            .iter()
            .flatten()
            .map(|p| p.len().saturating_sub(1))
            .sum()
    }
}

type EdgeKey = (usize, usize);

fn key(a: usize, b: usize) -> EdgeKey {
    (a.min(b), a.max(b))
}

/// Marching triangles. A vertex with `u >= level` counts as above, so every
/// crossing lies on an edge with one end strictly below; crossings are
/// keyed by mesh edge, which makes neighbouring segments join exactly.
pub fn extract_contours(m: &Mesh, u: &[f64], levels: &[f64]) -> ContourSet {
    assert_eq!(u.len(), m.num_vertices(), "one value per vertex");
    let (lo, hi) = u
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &v| (a.min(v), b.max(v)));
    let mut out = ContourSet::default();
    for &c in levels {
        if !(c > lo && c < hi) {
            continue;
        }
        out.levels.push(c);
        out.lines.push(level_lines(m, u, c));
    }
    out
}

fn level_lines(m: &Mesh, u: &[f64], c: f64) -> Vec<Vec<Vec2>> {
    let mut points: HashMap<EdgeKey, Vec2> = HashMap::new();
    let mut segments: Vec<(EdgeKey, EdgeKey)> = Vec::new();
    for tri in m.triangles() {
        let mut hits = Vec::with_capacity(2);
        for s in 0..3 {
            let (a, b) = (tri[s], tri[(s + 1) % 3]);
            if (u[a] >= c) == (u[b] >= c) {
                continue;
            }
            let k = key(a, b);
            points.entry(k).or_insert_with(|| {
                // interpolate from the lower index for a shared, exact point
                let (p, q) = (k.0, k.1);
                let t = (c - u[p]) / (u[q] - u[p]);
                m.vertex(p) + (m.vertex(q) - m.vertex(p)) * t
            });
            hits.push(k);
        }
        if let [a, b] = hits[..] {
            segments.push((a, b));
        }
    }

    let mut incident: HashMap<EdgeKey, Vec<usize>> = HashMap::new();
    for (s, &(a, b)) in segments.iter().enumerate() {
        incident.entry(a).or_default().push(s);
        incident.entry(b).or_default().push(s);
    }
    let mut used = vec![false; segments.len()];
    let mut lines = Vec::new();
    let walk = |start: EdgeKey, used: &mut Vec<bool>| -> Vec<EdgeKey> {
        let mut chain = vec![start];
        let mut at = start;
        while let Some(&s) = incident[&at].iter().find(|&&s| !used[s]) {
            used[s] = true;
            let (a, b) = segments[s];
            at = if a == at { b } else { a };
            chain.push(at);
        }
        chain
    };
    // open chains first, from their ends, in segment order for determinism
    for pass in 0..2 {
        for s in 0..segments.len() {
            if used[s] {
                continue;
            }
            let (a, _) = segments[s];
            let start = if pass == 0 {
                match [segments[s].0, segments[s].1]
                    .into_iter()
                    .find(|e| incident[e].len() == 1)
                {
                    Some(e) => e,
                    None => continue,
                }
            } else {
                a
            };
            let chain = walk(start, &mut used);
            lines.push(chain.iter().map(|k| points[k]).collect());
        }
    }
    lines
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::{generate_grid_mesh, GridPattern, Rect};

    #[test]
    fn linear_field_gives_straight_line() {
        let m = generate_grid_mesh(Rect::unit(), 1, 1, GridPattern::Ne).unwrap();
        let u: Vec<f64> = m.vertices().iter().map(|p| p.x).collect();
        let c = extract_contours(&m, &u, &[0.5]);
        assert_eq!(c.lines.len(), 1);
        assert_eq!(c.lines[0].len(), 1);
        let line = &c.lines[0][0];
        assert!(line.iter().all(|p| p.x == 0.5));
        let ys: Vec<f64> = line.iter().map(|p| p.y).collect();
        assert_eq!(ys.first().unwrap().min(*ys.last().unwrap()), 0.0);
        assert_eq!(ys.first().unwrap().max(*ys.last().unwrap()), 1.0);
    }

    #[test]
    fn constant_field_has_no_contours() {
        let m = generate_grid_mesh(Rect::unit(), 3, 3, GridPattern::Nw).unwrap();
        let c = extract_contours(&m, &vec![2.0; m.num_vertices()], &[1.0, 2.0, 3.0]);
        assert!(c.is_empty());
    }

    #[test]
    fn closed_loop_around_a_peak() {
        let m = generate_grid_mesh(Rect::new(-1.0, -1.0, 1.0, 1.0), 4, 4, GridPattern::FourWay(0.5)).unwrap();
        let u: Vec<f64> = m.vertices().iter().map(|p| 1.0 - p.x.abs().max(p.y.abs())).collect();
        let c = extract_contours(&m, &u, &[0.75]);
        assert_eq!(c.lines[0].len(), 1);
        let line = &c.lines[0][0];
        assert_eq!(line.first(), line.last());
        assert!(line.len() >= 5);
        assert!(line.iter().all(|p| p.x.abs().max(p.y.abs()) < 0.5));
    }

    #[test]
    fn points_stay_in_bracketing_triangles() {
        let m = generate_grid_mesh(Rect::unit(), 5, 5, GridPattern::Nw).unwrap();
        let u: Vec<f64> = m.vertices().iter().map(|p| (3.0 * p.x).sin() * p.y).collect();
        let c = extract_contours(&m, &u, &[-0.2, 0.1, 0.3, 0.6, 5.0]);
        assert_eq!(c.levels, vec![0.1, 0.3, 0.6]);
        for line in c.lines.iter().flatten() {
            for p in line {
                assert!(m.domain().contains(*p, 1e-12));
            }
        }
        assert!(c.num_segments() > 0);
    }
}
