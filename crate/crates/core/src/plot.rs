//! Marching-squares contours and a small SVG 1.1 writer, enough for the CLI's
//! static figures without an external plotting dependency.

use std::fmt::Write as _;

use rayon::prelude::*;

use crate::error::{invalid, Result};
use crate::C64;

/// Values on a regular `nx × ny` grid over `[x0, x1] × [y0, y1]`, row-major in `y`.
#[derive(Debug, Clone, PartialEq)]
pub struct Grid {
    pub x0: f64,
    pub x1: f64,
    pub y0: f64,
    pub y1: f64,
    pub nx: usize,
    pub ny: usize,
    pub values: Vec<f64>,
}

impl Grid {
    /// Samples `f` at the grid nodes (endpoints included). Points where `f`
    /// fails become NaN and are skipped by the contouring.
    pub fn sample<F>(bounds: [f64; 4], nx: usize, ny: usize, f: F) -> Result<Self>
    where
        F: Fn(C64) -> Option<f64> + Sync,
    {
        let [x0, x1, y0, y1] = bounds;
        if nx < 2 || ny < 2 || !(x1 > x0) || !(y1 > y0) {
            return Err(invalid("grid needs at least 2×2 nodes and a nondegenerate box"));
        }
        let mut g = Self {
            x0,
            x1,
            y0,
            y1,
            nx,
            ny,
            values: Vec::new(),
        };
        g.values = (0..nx * ny)
            .into_par_iter()
            .map(|k| f(g.node(k % nx, k / nx)).unwrap_or(f64::NAN))
            .collect();
        Ok(g)
    }

    pub fn node(&self, i: usize, j: usize) -> C64 {
        C64::new(
            self.x0 + (self.x1 - self.x0) * i as f64 / (self.nx - 1) as f64,
            self.y0 + (self.y1 - self.y0) * j as f64 / (self.ny - 1) as f64,
        )
    }

    pub fn at(&self, i: usize, j: usize) -> f64 {
        self.values[j * self.nx + i]
    }

    pub fn max_abs(&self) -> f64 {
        self.values
            .iter()
            .filter(|v| v.is_finite())
            .fold(0.0, |m, v| m.max(v.abs()))
    }

    /// `x,y,<name>` CSV, one row per node.
    pub fn to_csv(&self, name: &str) -> String {
        let mut out = String::with_capacity(self.values.len() * 40);
        let _ = writeln!(out, "x,y,{name}");
        for j in 0..self.ny {
            for i in 0..self.nx {
                let z = self.node(i, j);
                let _ = writeln!(out, "{},{},{}", z.re, z.im, self.at(i, j));
            }
        }
        out
    }
}

pub type Segment = [(f64, f64); 2];

/// Level-`c` isoline of the grid as unjoined segments. Saddle cells are
/// resolved with the cell-centre average.
pub fn marching_squares(grid: &Grid, level: f64) -> Vec<Segment> {
    let mut segs = Vec::new();
    for j in 0..grid.ny - 1 {
        for i in 0..grid.nx - 1 {
            // corners counterclockwise from bottom-left
            let corners = [(i, j), (i + 1, j), (i + 1, j + 1), (i, j + 1)];
            let v = corners.map(|(a, b)| grid.at(a, b) - level);
            if v.iter().any(|x| !x.is_finite()) {
                continue;
            }
            let p = corners.map(|(a, b)| grid.node(a, b));
            let crossing = |e: usize| {
                let (a, b) = (e, (e + 1) % 4);
                let t = v[a] / (v[a] - v[b]);
                let z = p[a] + (p[b] - p[a]) * t;
                (z.re, z.im)
            };
            let above = v.map(|x| x > 0.0);
            let edges: Vec<usize> = (0..4).filter(|&e| above[e] != above[(e + 1) % 4]).collect();
            match edges.len() {
                2 => segs.push([crossing(edges[0]), crossing(edges[1])]),
                4 => {
                    let centre = v.iter().sum::<f64>() > 0.0;
                    // pair each edge with the neighbour that keeps the centre's side connected
                    if centre == above[0] {
                        segs.push([crossing(0), crossing(3)]);
                        segs.push([crossing(1), crossing(2)]);
                    } else {
                        segs.push([crossing(0), crossing(1)]);
                        segs.push([crossing(2), crossing(3)]);
                    }
                }
                _ => {}
            }
        }
    }
    segs
}

/// Symmetric ladder `0, ±10^{k/2}` covering `[10⁻³ m, m]`, `m = max_abs`.
pub fn level_ladder(max_abs: f64) -> Vec<f64> {
    let mut levels = vec![0.0];
    if !(max_abs > 0.0 && max_abs.is_finite()) {
        return levels;
    }
    let hi = (2.0 * max_abs.log10()).floor() as i32;
    for k in (hi - 6)..=hi {
        let l = 10f64.powf(k as f64 / 2.0);
        levels.push(l);
        levels.push(-l);
    }
    levels.sort_by(f64::total_cmp);
    levels
}

/// Minimal SVG 1.1 document in world coordinates (y up).
#[derive(Debug, Clone)]
pub struct Svg {
    bounds: [f64; 4],
    width: f64,
    height: f64,
    body: String,
}

impl Svg {
    pub fn new(bounds: [f64; 4], width: f64) -> Self {
        let [x0, x1, y0, y1] = bounds;
        Self {
            bounds,
            width,
            height: width * (y1 - y0) / (x1 - x0),
            body: String::new(),
        }
    }

    fn px(&self, (x, y): (f64, f64)) -> (f64, f64) {
        let [x0, x1, y0, y1] = self.bounds;
        ((x - x0) / (x1 - x0) * self.width, (y1 - y) / (y1 - y0) * self.height)
    }

    /// One `<path>` holding all segments of a contour level.
    pub fn contour(&mut self, level: f64, segments: &[Segment], stroke: &str) {
        if segments.is_empty() {
            return;
        }
        let mut d = String::new();
        for s in segments {
            let (a, b) = (self.px(s[0]), self.px(s[1]));
            let _ = write!(d, "M{:.2} {:.2}L{:.2} {:.2}", a.0, a.1, b.0, b.1);
        }
        let _ = writeln!(
            self.body,
            r#"<path class="contour" data-level="{level}" d="{d}" fill="none" stroke="{stroke}" stroke-width="0.6"/>"#
        );
    }

    /// Ray from the origin at angle `psi`, clipped to the view.
    pub fn ray(&mut self, psi: f64, class: &str, stroke: &str) {
        let [x0, x1, y0, y1] = self.bounds;
        let reach = x0.abs().max(x1.abs()).hypot(y0.abs().max(y1.abs()));
        let a = self.px((0.0, 0.0));
        let b = self.px((reach * psi.cos(), reach * psi.sin()));
        let _ = writeln!(
            self.body,
            r#"<line class="{class}" data-angle="{psi}" x1="{:.2}" y1="{:.2}" x2="{:.2}" y2="{:.2}" stroke="{stroke}" stroke-dasharray="4 3"/>"#,
            a.0, a.1, b.0, b.1
        );
    }

    pub fn polygon(&mut self, vertices: &[C64], stroke: &str, fill: &str) {
        let pts: Vec<String> = vertices
            .iter()
            .map(|z| {
                let p = self.px((z.re, z.im));
                format!("{:.2},{:.2}", p.0, p.1)
            })
            .collect();
        let _ = writeln!(
            self.body,
            r#"<polygon points="{}" fill="{fill}" stroke="{stroke}" stroke-width="0.5"/>"#,
            pts.join(" ")
        );
    }

    pub fn point(&mut self, z: C64, radius: f64, fill: &str) {
        let p = self.px((z.re, z.im));
        let _ = writeln!(
            self.body,
            r#"<circle cx="{:.2}" cy="{:.2}" r="{radius}" fill="{fill}"/>"#,
            p.0, p.1
        );
    }

    pub fn finish(&self) -> String {
        format!(
            "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n\
             <svg xmlns=\"http://www.w3.org/2000/svg\" version=\"1.1\" width=\"{w:.0}\" height=\"{h:.0}\" viewBox=\"0 0 {w:.2} {h:.2}\">\n\
             <rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n{body}</svg>\n",
            w = self.width,
            h = self.height,
            body = self.body
        )
    }
}

/// Stroke colour for a contour level: blue below zero, red above, black at zero.
pub fn level_colour(level: f64) -> &'static str {
    if level > 0.0 {
        "#b2182b"
    } else if level < 0.0 {
        "#2166ac"
    } else {
        "#000000"
    }
}

/// Contour plot of a grid on its level ladder.
pub fn contour_svg(grid: &Grid, width: f64) -> Svg {
    let mut svg = Svg::new([grid.x0, grid.x1, grid.y0, grid.y1], width);
    for level in level_ladder(grid.max_abs()) {
        svg.contour(level, &marching_squares(grid, level), level_colour(level));
    }
    svg
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn circle_contour_lies_on_the_circle() {
        let g = Grid::sample([-2.0, 2.0, -2.0, 2.0], 81, 81, |z| Some(z.norm_sqr())).unwrap();
        let segs = marching_squares(&g, 1.0);
        assert!(segs.len() > 40);
        for s in &segs {
            for (x, y) in s {
                assert!((x.hypot(*y) - 1.0).abs() < 5e-3);
            }
        }
        // total length ≈ 2π
        let len: f64 = segs.iter().map(|s| (s[0].0 - s[1].0).hypot(s[0].1 - s[1].1)).sum();
        assert!((len - 2.0 * std::f64::consts::PI).abs() < 1e-2);
    }

    #[test]
    fn linear_field_gives_straight_line() {
        let g = Grid::sample([0.0, 1.0, 0.0, 1.0], 11, 11, |z| Some(z.re - 0.33)).unwrap();
        let segs = marching_squares(&g, 0.0);
        assert_eq!(segs.len(), 10);
        assert!(segs
            .iter()
            .all(|s| (s[0].0 - 0.33).abs() < 1e-12 && (s[1].0 - 0.33).abs() < 1e-12));
    }

    #[test]
    fn saddle_and_nan_cells() {
        let g = Grid::sample([-1.0, 1.0, -1.0, 1.0], 2, 2, |z| Some(z.re * z.im + 0.1)).unwrap();
        assert_eq!(marching_squares(&g, 0.0).len(), 2);
        let g = Grid::sample([-1.0, 1.0, -1.0, 1.0], 3, 3, |z| (z.re > 0.5).then_some(z.im)).unwrap();
        assert!(marching_squares(&g, 0.0).is_empty());
        assert!(Grid::sample([0.0, 1.0, 0.0, 1.0], 1, 5, |_| Some(0.0)).is_err());
    }

    #[test]
    fn ladder_and_csv() {
        let l = level_ladder(150.0);
        assert!(l.contains(&0.0) && l.contains(&100.0) && l.contains(&-100.0));
        assert!(l.iter().all(|v| v.abs() <= 150.0));
        assert_eq!(l.len(), 15);
        assert_eq!(level_ladder(0.0), vec![0.0]);
        let g = Grid::sample([0.0, 1.0, 0.0, 2.0], 3, 4, |z| Some(z.re)).unwrap();
        let csv = g.to_csv("F");
        assert_eq!(csv.lines().count(), 13);
        assert!(csv.starts_with("x,y,F\n"));
    }

    #[test]
    fn svg_document_shape() {
        let g = Grid::sample([-1.0, 1.0, -1.0, 1.0], 21, 21, |z| Some(z.re * z.im)).unwrap();
        let mut svg = contour_svg(&g, 400.0);
        svg.ray(0.5, "zero-growth", "#555");
        svg.polygon(
            &[C64::new(0.0, 0.0), C64::new(0.5, 0.0), C64::new(0.0, 0.5)],
            "#000",
            "none",
        );
        let text = svg.finish();
        assert!(text.contains("version=\"1.1\""));
        assert!(text.contains("class=\"zero-growth\""));
        assert!(text.contains("<polygon"));
        assert!(text.trim_end().ends_with("</svg>"));
    }
}
