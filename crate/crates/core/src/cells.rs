//! Partition of the narrow sector `{|arg z| < ε, Re z > 1}` into pieces of
//! area σ², each carrying its centroid as marked point.
//!
//! Strips are centred on the lattice heights `kσ`: strip 0 is `|Im z| ≤ σ/2`,
//! strip `k ≥ 1` is `(k − ½)σ ≤ Im z ≤ (k + ½)σ`, strip `−k` its mirror image.
//! Centring keeps marked points of neighbouring strips at least σ/2 apart even
//! at the thin tips where a strip first enters the sector. Each strip is swept
//! from the left and cut vertically into pieces of exact area σ²; the cut
//! abscissa solves a quadratic while the cross-section is still growing
//! linearly and is `σ`-periodic afterwards.

use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::C64;

/// One piece of the partition.
#[derive(Debug, Clone, PartialEq)]
pub struct Cell {
    /// Counterclockwise polygon, not closed (first vertex is not repeated).
    pub vertices: Vec<C64>,
    pub area: f64,
    pub marked_point: C64,
    pub strip_index: i64,
}

impl Cell {
    fn from_polygon(vertices: Vec<C64>, strip_index: i64) -> Self {
        let (area, centroid) = polygon_area_centroid(&vertices);
        Self {
            vertices,
            area,
            marked_point: centroid,
            strip_index,
        }
    }

    /// Horizontal extent `(min Re, max Re)`.
    pub fn x_range(&self) -> (f64, f64) {
        self.vertices
            .iter()
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| {
                (lo.min(v.re), hi.max(v.re))
            })
    }

    pub fn diameter(&self) -> f64 {
        let mut d: f64 = 0.0;
        for (i, a) in self.vertices.iter().enumerate() {
            for b in &self.vertices[i + 1..] {
                d = d.max((a - b).norm());
            }
        }
        d
    }

    /// Axis-aligned square with side `sigma` (to relative tolerance 1e-12).
    pub fn is_square(&self, sigma: f64) -> bool {
        if self.vertices.len() != 4 {
            return false;
        }
        let tol = 1e-12 * sigma.max(self.x_range().1);
        self.vertices.iter().enumerate().all(|(i, a)| {
            let b = self.vertices[(i + 1) % 4];
            let e = b - a;
            let axis = e.re.abs() <= tol || e.im.abs() <= tol;
            axis && (e.norm() - sigma).abs() <= tol
        })
    }
}

/// Shoelace area and centroid of a simple polygon, evaluated relative to the
/// first vertex to limit cancellation far from the origin.
pub fn polygon_area_centroid(vertices: &[C64]) -> (f64, C64) {
    let n = vertices.len();
    if n < 3 {
        return (0.0, vertices.first().copied().unwrap_or_default());
    }
    let o = vertices[0];
    let mut a2 = 0.0;
    let mut cx = 0.0;
    let mut cy = 0.0;
    for i in 0..n {
        let p = vertices[i] - o;
        let q = vertices[(i + 1) % n] - o;
        let cross = p.re * q.im - q.re * p.im;
        a2 += cross;
        cx += (p.re + q.re) * cross;
        cy += (p.im + q.im) * cross;
    }
    let area = 0.5 * a2;
    (area, o + C64::new(cx, cy) / (3.0 * a2))
}

/// `|∫_Q (w − a) dμ(w)|` for a polygon `Q`.
pub fn first_moment(vertices: &[C64], a: C64) -> f64 {
    let (area, c) = polygon_area_centroid(vertices);
    (area * (c - a)).norm()
}

/// The partition of the truncated sector.
#[derive(Debug, Clone, PartialEq)]
pub struct CellSet {
    pub eps: f64,
    pub sigma: f64,
    pub r_cut: f64,
    pub cells: Vec<Cell>,
}

#[derive(Serialize, Deserialize)]
struct CellDoc {
    poly: Vec<[f64; 2]>,
    aq: [f64; 2],
    #[serde(default)]
    strip: i64,
}

#[derive(Serialize, Deserialize)]
struct CellSetDoc {
    eps: f64,
    sigma: f64,
    r_cut: f64,
    cells: Vec<CellDoc>,
}

impl CellSet {
    pub fn len(&self) -> usize {
        self.cells.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cells.is_empty()
    }

    pub fn marked_points(&self) -> impl Iterator<Item = C64> + '_ {
        self.cells.iter().map(|c| c.marked_point)
    }

    pub fn to_json(&self) -> Result<String> {
        let doc = CellSetDoc {
            eps: self.eps,
            sigma: self.sigma,
            r_cut: self.r_cut,
            cells: self
                .cells
                .iter()
                .map(|c| CellDoc {
                    poly: c.vertices.iter().map(|v| [v.re, v.im]).collect(),
                    aq: [c.marked_point.re, c.marked_point.im],
                    strip: c.strip_index,
                })
                .collect(),
        };
        Ok(serde_json::to_string(&doc)?)
    }

    /// Reads the JSON form; areas are recomputed from the polygons.
    pub fn from_json(text: &str) -> Result<Self> {
        let doc: CellSetDoc = serde_json::from_str(text)?;
        let cells = doc
            .cells
            .into_iter()
            .map(|c| {
                let vertices: Vec<C64> = c.poly.iter().map(|p| C64::new(p[0], p[1])).collect();
                let (area, _) = polygon_area_centroid(&vertices);
                Cell {
                    vertices,
                    area,
                    marked_point: C64::new(c.aq[0], c.aq[1]),
                    strip_index: c.strip,
                }
            })
            .collect();
        Ok(Self {
            eps: doc.eps,
            sigma: doc.sigma,
            r_cut: doc.r_cut,
            cells,
        })
    }
}

/// Cross-section geometry of one strip with index `k ≥ 0`.
#[derive(Debug, Clone, Copy)]
struct Strip {
    /// Lower edge of the upper half (0 for strip 0, where the strip is symmetric).
    floor: f64,
    /// Slope of the cross-section in the linear part (`t` or `2t`).
    slope: f64,
    /// Abscissa where the cross-section starts growing.
    x_f: f64,
    /// Abscissa where the cross-section reaches σ.
    x_c: f64,
    sigma: f64,
    t: f64,
    central: bool,
}

impl Strip {
    fn new(k: u64, sigma: f64, t: f64) -> Self {
        if k == 0 {
            Self {
                floor: 0.0,
                slope: 2.0 * t,
                x_f: 0.0,
                x_c: 0.5 * sigma / t,
                sigma,
                t,
                central: true,
            }
        } else {
            let floor = (k as f64 - 0.5) * sigma;
            Self {
                floor,
                slope: t,
                x_f: floor / t,
                x_c: (floor + sigma) / t,
                sigma,
                t,
                central: false,
            }
        }
    }

    /// Upper boundary `Im z` at abscissa `x`.
    fn top(&self, x: f64) -> f64 {
        if self.central {
            (x * self.t).min(0.5 * self.sigma)
        } else {
            (x * self.t).clamp(self.floor, self.floor + self.sigma)
        }
    }

    /// Lower boundary `Im z` at abscissa `x`.
    fn bottom(&self, x: f64) -> f64 {
        if self.central {
            -self.top(x)
        } else {
            self.floor
        }
    }

    /// Right cut `b` so that the piece `[a, b]` has area σ².
    fn next_cut(&self, a: f64) -> f64 {
        let s2 = self.sigma * self.sigma;
        if a >= self.x_c {
            return a + self.sigma;
        }
        let u = (a - self.x_f).max(0.0);
        let b = self.x_f + (u * u + 2.0 * s2 / self.slope).sqrt();
        if b <= self.x_c {
            return b;
        }
        let linear_area = 0.5 * self.slope * ((self.x_c - self.x_f).powi(2) - u * u);
        self.x_c + (s2 - linear_area) / self.sigma
    }

    /// `∫_a^b` cross-section, closed form.
    fn area_between(&self, a: f64, b: f64) -> f64 {
        let prim = |x: f64| {
            if x <= self.x_f {
                0.0
            } else if x <= self.x_c {
                0.5 * self.slope * (x - self.x_f).powi(2)
            } else {
                0.5 * self.slope * (self.x_c - self.x_f).powi(2) + self.sigma * (x - self.x_c)
            }
        };
        prim(b) - prim(a)
    }

    /// Counterclockwise polygon of the piece `[a, b]` in the upper strip.
    fn polygon(&self, a: f64, b: f64) -> Vec<C64> {
        let mut pts: Vec<C64> = Vec::with_capacity(8);
        let kink = a < self.x_c && self.x_c < b;
        // lower chain left to right
        pts.push(C64::new(a, self.bottom(a)));
        if kink && self.central {
            pts.push(C64::new(self.x_c, self.bottom(self.x_c)));
        }
        pts.push(C64::new(b, self.bottom(b)));
        // upper chain right to left
        pts.push(C64::new(b, self.top(b)));
        if kink {
            pts.push(C64::new(self.x_c, self.top(self.x_c)));
        }
        pts.push(C64::new(a, self.top(a)));
        dedup_ring(pts)
    }
}

fn dedup_ring(pts: Vec<C64>) -> Vec<C64> {
    let mut out: Vec<C64> = Vec::with_capacity(pts.len());
    for p in pts {
        if out.last() != Some(&p) {
            out.push(p);
        }
    }
    while out.len() > 1 && out.first() == out.last() {
        out.pop();
    }
    out
}

/// Builds the partition of `{|arg z| < eps, Re z ≥ 1}` into area-σ² pieces,
/// keeping the pieces whose right edge lies at or before `r_cut`.
pub fn generate_cells(eps: f64, sigma: f64, r_cut: f64) -> Result<CellSet> {
    if !(eps > 0.0 && eps < std::f64::consts::PI / 8.0) {
        return Err(invalid(format!("sector half-angle must lie in (0, π/8), got {eps}")));
    }
    if !(sigma > 0.0 && sigma.is_finite()) {
        return Err(invalid(format!("sigma must be positive, got {sigma}")));
    }
    if !(r_cut > 2.0 && r_cut.is_finite()) {
        return Err(invalid(format!("r_cut must exceed 2, got {r_cut}")));
    }
    if sigma > r_cut / 4.0 {
        return Err(invalid(format!("sigma {sigma} exceeds r_cut/4")));
    }
    let t = eps.tan();
    let mut cells = Vec::new();
    for k in 0u64.. {
        let strip = Strip::new(k, sigma, t);
        if strip.x_f >= r_cut {
            break;
        }
        let mut a = strip.x_f.max(1.0);
        // pieces entirely in the full-height part are placed at exact multiples
        let mut square_origin: Option<(f64, u64)> = None;
        let mut upper: Vec<Cell> = Vec::new();
        loop {
            let b = match square_origin {
                Some((b0, m)) => b0 + (m + 1) as f64 * sigma,
                None => strip.next_cut(a),
            };
            if b > r_cut {
                break;
            }
            let poly = strip.polygon(a, b);
            upper.push(Cell::from_polygon(poly, k as i64));
            square_origin = match square_origin {
                Some((b0, m)) => Some((b0, m + 1)),
                None if b >= strip.x_c => Some((b, 0)),
                None => None,
            };
            a = b;
        }
        if k == 0 {
            cells.extend(upper);
        } else {
            let lower: Vec<Cell> = upper.iter().map(mirror).collect();
            cells.extend(upper);
            cells.extend(lower);
        }
    }
    Ok(CellSet {
        eps,
        sigma,
        r_cut,
        cells,
    })
}

/// Complex conjugate of a cell, orientation restored to counterclockwise.
fn mirror(c: &Cell) -> Cell {
    let mut vertices: Vec<C64> = c.vertices.iter().map(|v| v.conj()).collect();
    vertices.reverse();
    Cell {
        vertices,
        area: c.area,
        marked_point: c.marked_point.conj(),
        strip_index: -c.strip_index,
    }
}

/// Outcome of [`validate_cells`].
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CellValidation {
    pub passed: bool,
    pub cell_count: usize,
    /// `max |area − σ²| / σ²`.
    pub max_area_deviation: f64,
    /// `max |∫(w − a_Q)| / σ³`.
    pub max_first_moment: f64,
    /// `min |a_Q − a_Q'| / σ`.
    pub min_distance: f64,
    /// `|Σ area − area(covered region)| / area(covered region)`.
    pub area_mismatch: f64,
    pub overlapping_pairs: usize,
    pub failures: Vec<String>,
}

pub const AREA_TOL: f64 = 1e-10;
pub const MOMENT_TOL: f64 = 1e-10;
pub const TILING_TOL: f64 = 1e-8;

/// Checks the partition invariants: exact areas, centroid marks, minimal mark
/// separation σ/2, disjointness within each strip and total area.
pub fn validate_cells(cs: &CellSet) -> CellValidation {
    let sigma = cs.sigma;
    let s2 = sigma * sigma;
    let mut max_area_deviation: f64 = 0.0;
    let mut max_first_moment: f64 = 0.0;
    for c in &cs.cells {
        let (area, _) = polygon_area_centroid(&c.vertices);
        max_area_deviation = max_area_deviation.max((area - s2).abs() / s2);
        max_first_moment = max_first_moment.max(first_moment(&c.vertices, c.marked_point) / (s2 * sigma));
    }

    let min_distance = min_pairwise_distance(cs.marked_points().collect::<Vec<_>>().as_slice(), sigma) / sigma;

    // per strip: pieces sorted by abscissa must not overlap, and their areas must
    // add up to the exact area of the strip section they span
    let t = cs.eps.tan();
    let mut by_strip: HashMap<i64, Vec<(f64, f64, f64)>> = HashMap::new();
    for c in &cs.cells {
        let (lo, hi) = c.x_range();
        let (area, _) = polygon_area_centroid(&c.vertices);
        by_strip.entry(c.strip_index).or_default().push((lo, hi, area));
    }
    let mut overlapping_pairs = 0;
    let mut covered = 0.0;
    let mut total = 0.0;
    let mut strips: Vec<_> = by_strip.into_iter().collect();
    strips.sort_by_key(|(k, _)| *k);
    for (k, mut pieces) in strips {
        pieces.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.total_cmp(&b.1)));
        for w in pieces.windows(2) {
            if w[1].0 < w[0].1 - 1e-9 * sigma.max(w[0].1) {
                overlapping_pairs += 1;
            }
        }
        let strip = Strip::new(k.unsigned_abs(), sigma, t);
        let lo = pieces.first().map_or(0.0, |p| p.0);
        let hi = pieces.iter().fold(f64::NEG_INFINITY, |m, p| m.max(p.1));
        covered += strip.area_between(lo, hi);
        total += pieces.iter().map(|p| p.2).sum::<f64>();
    }
    let area_mismatch = if covered > 0.0 {
        (total - covered).abs() / covered
    } else {
        0.0
    };

    let mut failures = Vec::new();
    if max_area_deviation > AREA_TOL {
        failures.push(format!("area deviation {max_area_deviation:e} exceeds {AREA_TOL:e}"));
    }
    if max_first_moment > MOMENT_TOL {
        failures.push(format!("first moment {max_first_moment:e} exceeds {MOMENT_TOL:e}"));
    }
    if cs.cells.len() > 1 && min_distance < 0.5 {
        failures.push(format!("marked points {min_distance}σ apart, below σ/2"));
    }
    if overlapping_pairs > 0 {
        failures.push(format!("{overlapping_pairs} overlapping pairs"));
    }
    if area_mismatch > TILING_TOL {
        failures.push(format!("tiling area mismatch {area_mismatch:e}"));
    }
    CellValidation {
        passed: failures.is_empty(),
        cell_count: cs.cells.len(),
        max_area_deviation,
        max_first_moment,
        min_distance,
        area_mismatch,
        overlapping_pairs,
        failures,
    }
}

/// Smallest distance between distinct entries, via a uniform grid of spacing
/// `h`. Exact as long as the answer is below `h`; otherwise returns at least `h`.
pub fn min_pairwise_distance(points: &[C64], h: f64) -> f64 {
    let key = |p: C64| ((p.re / h).floor() as i64, (p.im / h).floor() as i64);
    let mut grid: HashMap<(i64, i64), Vec<usize>> = HashMap::new();
    for (i, &p) in points.iter().enumerate() {
        grid.entry(key(p)).or_default().push(i);
    }
    let mut best = f64::INFINITY;
    for (i, &p) in points.iter().enumerate() {
        let (gx, gy) = key(p);
        for dx in -1..=1 {
            for dy in -1..=1 {
                if let Some(list) = grid.get(&(gx + dx, gy + dy)) {
                    for &j in list {
                        if j > i {
                            best = best.min((points[j] - p).norm());
                        }
                    }
                }
            }
        }
    }
    best
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn shoelace_unit_square() {
        let sq = [
            C64::new(0.0, 0.0),
            C64::new(1.0, 0.0),
            C64::new(1.0, 1.0),
            C64::new(0.0, 1.0),
        ];
        let (a, c) = polygon_area_centroid(&sq);
        assert_eq!(a, 1.0);
        assert_eq!(c, C64::new(0.5, 0.5));
    }

    #[test]
    fn generated_set_validates() {
        let cs = generate_cells(0.1, 1.0, 100.0).unwrap();
        let v = validate_cells(&cs);
        assert!(v.passed, "{:?}", v.failures);
        assert!(v.min_distance >= 0.5);
    }

    #[test]
    fn interior_cells_are_unit_squares_with_centred_marks() {
        let cs = generate_cells(0.1, 1.0, 100.0).unwrap();
        let squares: Vec<&Cell> = cs.cells.iter().filter(|c| c.is_square(1.0)).collect();
        assert!(squares.len() > cs.len() / 2);
        for c in squares {
            let centre = c.vertices.iter().sum::<C64>() / 4.0;
            assert!((c.marked_point - centre).norm() < 1e-12 * c.x_range().1);
        }
    }

    #[test]
    fn boundary_cells_have_bounded_diameter() {
        for (eps, sigma) in [(0.1, 1.0), (0.2, 5.27), (0.05, 0.3)] {
            let cs = generate_cells(eps, sigma, 200.0).unwrap();
            let cap = 2.0 * sigma / eps.sqrt();
            for c in &cs.cells {
                assert!(c.diameter() <= cap, "diameter {} > {cap}", c.diameter());
            }
        }
    }

    #[test]
    fn strips_are_symmetric_and_ordered() {
        let cs = generate_cells(0.15, 2.0, 120.0).unwrap();
        for c in cs.cells.iter().filter(|c| c.strip_index > 0) {
            let mirrored = c.marked_point.conj();
            assert!(cs
                .cells
                .iter()
                .any(|d| d.strip_index == -c.strip_index && d.marked_point == mirrored));
        }
        for c in &cs.cells {
            assert!(c.x_range().1 <= cs.r_cut);
            assert!(c.x_range().0 >= 1.0);
        }
    }

    #[test]
    fn generation_is_bit_identical() {
        let a = generate_cells(0.2, 5.27, 200.0).unwrap();
        let b = generate_cells(0.2, 5.27, 200.0).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn perturbed_mark_fails_first_moment() {
        let mut cs = generate_cells(0.1, 1.0, 100.0).unwrap();
        cs.cells[10].marked_point += C64::new(1.0, 0.0);
        let v = validate_cells(&cs);
        assert!(!v.passed);
        assert!(v.max_first_moment > 0.5);
    }

    #[test]
    fn duplicated_cell_fails() {
        let mut cs = generate_cells(0.1, 1.0, 100.0).unwrap();
        let dup = cs.cells[20].clone();
        cs.cells.push(dup);
        let v = validate_cells(&cs);
        assert!(!v.passed);
        assert!(v.overlapping_pairs > 0 && v.area_mismatch > 1e-8);
    }

    #[test]
    fn rejects_bad_parameters() {
        assert!(generate_cells(0.5, 1.0, 100.0).is_err());
        assert!(generate_cells(0.1, 30.0, 100.0).is_err());
        assert!(generate_cells(0.1, -1.0, 100.0).is_err());
        assert!(generate_cells(0.1, 0.1, 1.5).is_err());
    }

    #[test]
    fn json_round_trip() {
        let cs = generate_cells(0.1, 1.0, 20.0).unwrap();
        let text = cs.to_json().unwrap();
        assert!(text.starts_with("{\"eps\":"));
        let back = CellSet::from_json(&text).unwrap();
        assert_eq!(back.len(), cs.len());
        for (a, b) in back.cells.iter().zip(&cs.cells) {
            assert_eq!(a.marked_point, b.marked_point);
            assert!((a.area - b.area).abs() < 1e-14);
        }
    }
}
